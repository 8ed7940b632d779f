//! Instance files: a JSON object with named fields.
//!
//! ```json
//! {
//!   "name": "worked-example",
//!   "x_labels": ["a", "b"],
//!   "y_labels": ["u", "v"],
//!   "pxy": [[0.4, 0.1], [0.1, 0.4]],
//!   "phi_y": [0, 1],
//!   "l_size": 2
//! }
//! ```
//!
//! `pxy` is row-major with rows indexed by X. Everything except `pxy` is
//! optional; missing labels default to `x0, x1, ...` and `y0, y1, ...`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HarnessError, HarnessResult};
use crate::dist::{make_joint, JointDist, MASS_TOL, NEG_CLAMP};
use crate::encoders::Encoder;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub x_labels: Vec<String>,
    #[serde(default)]
    pub y_labels: Vec<String>,
    pub pxy: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_y: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_size: Option<usize>,
}

impl InstanceFile {
    pub fn from_joint(j: &JointDist) -> Self {
        InstanceFile {
            name: None,
            seed: None,
            x_labels: j.x_labels().to_vec(),
            y_labels: j.y_labels().to_vec(),
            pxy: j.rows(),
            phi_y: None,
            l_size: None,
            m_size: None,
        }
    }

    /// Checks the table and the optional encoder, reporting the offending
    /// row/column.
    pub fn validate(&self) -> HarnessResult<()> {
        let bad = |msg: String| Err(HarnessError::Validation(msg));
        if self.pxy.is_empty() || self.pxy[0].is_empty() {
            return bad("pxy is empty".into());
        }
        let width = self.pxy[0].len();
        let mut sum = 0.0;
        for (r, row) in self.pxy.iter().enumerate() {
            if row.len() != width {
                return bad(format!("pxy row {r} has {} entries, expected {width}", row.len()));
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return bad(format!("pxy[{r}][{c}] is not finite"));
                }
                if v < -NEG_CLAMP {
                    return bad(format!("pxy[{r}][{c}] = {v} is negative"));
                }
                sum += v;
            }
        }
        if (sum - 1.0).abs() > MASS_TOL {
            return bad(format!("pxy sums to {sum}, expected 1 within {MASS_TOL:e}"));
        }
        for (what, labels, n) in [
            ("x_labels", &self.x_labels, self.pxy.len()),
            ("y_labels", &self.y_labels, width),
        ] {
            if !labels.is_empty() && labels.len() != n {
                return bad(format!("{what} has {} entries, expected {n}", labels.len()));
            }
        }
        if let Some(phi) = &self.phi_y {
            if phi.len() != width {
                return bad(format!("phi_y has {} entries, expected |Y| = {width}", phi.len()));
            }
            if let Some(l) = self.l_size {
                if let Some((i, &v)) = phi.iter().enumerate().find(|(_, &v)| v >= l) {
                    return bad(format!("phi_y[{i}] = {v} is not below l_size = {l}"));
                }
            }
        }
        for (what, v) in [("l_size", self.l_size), ("m_size", self.m_size)] {
            if v == Some(0) {
                return bad(format!("{what} must be positive"));
            }
        }
        Ok(())
    }

    pub fn joint(&self) -> HarnessResult<JointDist> {
        self.validate()?;
        Ok(make_joint(&self.pxy, self.x_labels.clone(), self.y_labels.clone())?)
    }

    /// The encoder in the file; its range is `l_size` if declared, otherwise
    /// one more than the largest label.
    pub fn phi_y(&self) -> HarnessResult<Option<Encoder>> {
        self.validate()?;
        match &self.phi_y {
            None => Ok(None),
            Some(map) => {
                let l = self
                    .l_size
                    .unwrap_or_else(|| map.iter().max().map_or(1, |m| m + 1));
                Ok(Some(Encoder::new(map.clone(), l)?))
            }
        }
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> HarnessResult<InstanceFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let inst: InstanceFile = serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    inst.validate()?;
    Ok(inst)
}

pub fn save_instance(inst: &InstanceFile, path: impl AsRef<Path>) -> HarnessResult<()> {
    write_json(inst, path)
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> HarnessResult<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag() -> InstanceFile {
        serde_json::from_str(r#"{"pxy": [[0.4, 0.1], [0.1, 0.4]], "phi_y": [0, 1], "l_size": 2}"#).unwrap()
    }

    #[test]
    fn well_formed_file_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i.json");
        std::fs::write(&path, serde_json::to_string(&diag()).unwrap()).unwrap();
        let inst = load_instance(&path).unwrap();
        assert_eq!(inst.joint().unwrap().x_size(), 2);
        assert_eq!(inst.phi_y().unwrap().unwrap().map(), [0, 1]);
    }

    #[test]
    fn bad_sum_names_the_sum() {
        let mut inst = diag();
        inst.pxy = vec![vec![0.5, 0.6]];
        inst.phi_y = None;
        let err = inst.validate().unwrap_err().to_string();
        assert!(err.contains("1.1"), "{err}");
    }

    #[test]
    fn phi_entry_equal_to_l_size_is_rejected() {
        let mut inst = diag();
        inst.phi_y = Some(vec![0, 2]);
        let err = inst.validate().unwrap_err().to_string();
        assert!(err.contains("phi_y[1]"), "{err}");
    }

    #[test]
    fn negative_entry_names_locus() {
        let mut inst = diag();
        inst.pxy = vec![vec![0.6, 0.5], vec![-0.1, 0.0]];
        let err = inst.validate().unwrap_err().to_string();
        assert!(err.contains("pxy[1][0]"), "{err}");
    }

    #[test]
    fn parse_errors_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i.json");
        std::fs::write(&path, "{ not json").unwrap();
        assert!(matches!(load_instance(&path), Err(HarnessError::Parse { .. })));
        assert!(matches!(load_instance(dir.path().join("missing.json")), Err(HarnessError::Io { .. })));
    }
}
