//! Finite joint distributions and the information measures built on them.
//!
//! Every logarithm in this crate is base 2, so information is reported in
//! bits. Zero-probability cells follow the `0 log 0 = 0` convention and never
//! enter a spectrum event.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries in `[-NEG_CLAMP, 0)` are treated as round-off and set to zero.
pub const NEG_CLAMP: f64 = 1e-12;
/// Allowed deviation of the total mass from one.
pub const MASS_TOL: f64 = 1e-9;

/// A joint probability table over `X × Y`, stored row-major with rows = X.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDist {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    x_size: usize,
    y_size: usize,
    p: Vec<f64>,
}

/// Builds default labels `prefix0, prefix1, ...`.
pub fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Validates and renormalizes a rectangular table.
///
/// Empty label vectors are replaced by `x0, x1, ...` / `y0, y1, ...`.
pub fn make_joint(
    table: &[Vec<f64>],
    x_labels: Vec<String>,
    y_labels: Vec<String>,
) -> Result<JointDist> {
    let x_size = table.len();
    if x_size == 0 {
        return Err(Error::EmptyAlphabet);
    }
    let y_size = table[0].len();
    if y_size == 0 {
        return Err(Error::EmptyAlphabet);
    }

    let mut p = Vec::with_capacity(x_size * y_size);
    for (row, values) in table.iter().enumerate() {
        if values.len() != y_size {
            return Err(Error::RaggedTable {
                row,
                expected: y_size,
                found: values.len(),
            });
        }
        for (col, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
            if v < -NEG_CLAMP {
                return Err(Error::NegativeMass { row, col, value: v });
            }
            p.push(v.max(0.0));
        }
    }

    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > MASS_TOL {
        return Err(Error::NotNormalized { sum });
    }
    for v in &mut p {
        *v /= sum;
    }

    let x_labels = check_labels("x_labels", x_labels, x_size, "x")?;
    let y_labels = check_labels("y_labels", y_labels, y_size, "y")?;
    Ok(JointDist {
        x_labels,
        y_labels,
        x_size,
        y_size,
        p,
    })
}

fn check_labels(
    what: &'static str,
    labels: Vec<String>,
    n: usize,
    prefix: &str,
) -> Result<Vec<String>> {
    if labels.is_empty() {
        return Ok(default_labels(prefix, n));
    }
    if labels.len() != n {
        return Err(Error::LabelCount {
            what,
            expected: n,
            found: labels.len(),
        });
    }
    Ok(labels)
}

impl JointDist {
    /// Shorthand for [`make_joint`] with default labels.
    pub fn from_rows(table: &[Vec<f64>]) -> Result<Self> {
        make_joint(table, Vec::new(), Vec::new())
    }

    /// Product distribution `p_X ⊗ p_Y`.
    pub fn product(px: &[f64], py: &[f64]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = px
            .iter()
            .map(|&a| py.iter().map(|&b| a * b).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Internal constructor for tables that are already valid (e.g. produced
    /// by merging columns of a valid table).
    pub(crate) fn from_parts_unchecked(
        x_labels: Vec<String>,
        y_labels: Vec<String>,
        x_size: usize,
        y_size: usize,
        p: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(p.len(), x_size * y_size);
        JointDist {
            x_labels,
            y_labels,
            x_size,
            y_size,
            p,
        }
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y_labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.y_size + y]
    }

    /// Row `x` of the table, i.e. `p(x, ·)`.
    pub fn row(&self, x: usize) -> &[f64] {
        &self.p[x * self.y_size..(x + 1) * self.y_size]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.x_size).map(|x| self.row(x).to_vec()).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        (0..self.x_size).map(|x| self.row(x).iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        let mut py = vec![0.0; self.y_size];
        for x in 0..self.x_size {
            for (acc, v) in py.iter_mut().zip(self.row(x)) {
                *acc += v;
            }
        }
        py
    }

    /// Largest X-marginal probability; the optimal blind-guess success rate.
    pub fn p_max(&self) -> f64 {
        self.marginal_x().into_iter().fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> JointDist {
        let mut p = vec![0.0; self.p.len()];
        for x in 0..self.x_size {
            for y in 0..self.y_size {
                p[y * self.x_size + x] = self.get(x, y);
            }
        }
        JointDist {
            x_labels: self.y_labels.clone(),
            y_labels: self.x_labels.clone(),
            x_size: self.y_size,
            y_size: self.x_size,
            p,
        }
    }

    /// `p_{X|S}` where the column variable plays the role of `S`.
    pub fn conditional_x_given_s(&self) -> CondDist {
        let ps = self.marginal_y();
        let rows = ps
            .iter()
            .enumerate()
            .map(|(s, &mass)| {
                (mass > 0.0).then(|| (0..self.x_size).map(|x| self.get(x, s) / mass).collect())
            })
            .collect();
        CondDist {
            given_size: self.y_size,
            out_size: self.x_size,
            rows,
        }
    }

    /// `I(X; S)` in bits, with the column variable as `S`.
    pub fn mutual_information(&self) -> InfoValue {
        let px = self.marginal_x();
        let ps = self.marginal_y();
        let mut acc = 0.0;
        for x in 0..self.x_size {
            for s in 0..self.y_size {
                let pxs = self.get(x, s);
                if pxs > 0.0 {
                    acc += pxs * (pxs / (px[x] * ps[s])).log2();
                }
            }
        }
        InfoValue::clamped(acc)
    }

    /// Information density `log2(p_{X|S}(x|s) / p_X(x))` on every cell of
    /// positive mass, as `(x, s, mass, density)`.
    pub fn information_density(&self) -> Vec<(usize, usize, f64, f64)> {
        let px = self.marginal_x();
        let ps = self.marginal_y();
        let mut out = Vec::new();
        for x in 0..self.x_size {
            for s in 0..self.y_size {
                let pxs = self.get(x, s);
                if pxs > 0.0 {
                    let cond = pxs / ps[s];
                    out.push((x, s, pxs, (cond / px[x]).log2()));
                }
            }
        }
        out
    }

    /// Mass of the information-spectrum tail
    /// `{(x, s) : log2(p_{X|S}(x|s) / p_X(x)) >= nu}`.
    pub fn relative_ic_spectrum_mass(&self, nu: f64) -> f64 {
        self.information_density()
            .into_iter()
            .filter(|&(_, _, _, d)| d >= nu)
            .map(|(_, _, m, _)| m)
            .sum()
    }

    /// `H(X)` in bits.
    pub fn entropy_x(&self) -> f64 {
        entropy(&self.marginal_x())
    }

    /// `H(S)` in bits (column variable).
    pub fn entropy_y(&self) -> f64 {
        entropy(&self.marginal_y())
    }
}

/// Shannon entropy in bits of a probability vector.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.log2())
        .sum::<f64>()
}

/// Binary entropy `H_2(q)` in bits.
pub fn binary_entropy(q: f64) -> f64 {
    entropy(&[q, 1.0 - q])
}

/// A conditional distribution `p_{out | given}`; rows of zero-mass
/// conditioning values are left undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct CondDist {
    given_size: usize,
    out_size: usize,
    rows: Vec<Option<Vec<f64>>>,
}

impl CondDist {
    pub fn given_size(&self) -> usize {
        self.given_size
    }

    pub fn out_size(&self) -> usize {
        self.out_size
    }

    /// The distribution given `s`, or `None` when `s` has zero mass.
    pub fn row(&self, s: usize) -> Option<&[f64]> {
        self.rows[s].as_deref()
    }

    pub fn is_defined(&self, s: usize) -> bool {
        self.rows[s].is_some()
    }

    pub fn support_mask(&self) -> Vec<bool> {
        self.rows.iter().map(Option::is_some).collect()
    }

    /// `p(out | given)`, or `None` on an undefined row.
    pub fn get(&self, given: usize, out: usize) -> Option<f64> {
        self.row(given).map(|r| r[out])
    }
}

/// A non-negative, finite amount of information in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct InfoValue(f64);

impl InfoValue {
    /// Round-off negatives are clamped to zero.
    pub fn clamped(bits: f64) -> Self {
        debug_assert!(bits.is_finite());
        InfoValue(bits.max(0.0))
    }

    pub fn bits(self) -> f64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j(rows: &[&[f64]]) -> JointDist {
        JointDist::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn make_joint_accepts_valid_tables() {
        let d = j(&[&[0.4, 0.1], &[0.1, 0.4]]);
        assert_eq!((d.x_size(), d.y_size()), (2, 2));
        assert_eq!(d.x_labels(), ["x0", "x1"]);
        let point = j(&[&[1.0]]);
        assert_eq!(point.get(0, 0), 1.0);
    }

    #[test]
    fn make_joint_rejects_bad_tables() {
        assert!(matches!(
            JointDist::from_rows(&[vec![0.5, 0.6]]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            JointDist::from_rows(&[vec![1.1, -0.1]]),
            Err(Error::NegativeMass { row: 0, col: 1, .. })
        ));
        assert_eq!(JointDist::from_rows(&[]), Err(Error::EmptyAlphabet));
        assert_eq!(JointDist::from_rows(&[vec![]]), Err(Error::EmptyAlphabet));
        assert!(matches!(
            JointDist::from_rows(&[vec![0.5, 0.25], vec![0.25]]),
            Err(Error::RaggedTable { row: 1, .. })
        ));
        assert!(matches!(
            make_joint(&[vec![1.0]], vec!["a".into(), "b".into()], vec![]),
            Err(Error::LabelCount { .. })
        ));
    }

    #[test]
    fn tiny_negatives_are_clamped() {
        let d = JointDist::from_rows(&[vec![1.0, -1e-13]]).unwrap();
        assert_eq!(d.get(0, 1), 0.0);
    }

    #[test]
    fn marginals() {
        let d = j(&[&[0.2, 0.3], &[0.1, 0.4]]);
        let px = d.marginal_x();
        let py = d.marginal_y();
        assert!((px[0] - 0.5).abs() < 1e-12 && (px[1] - 0.5).abs() < 1e-12);
        assert!((py[0] - 0.3).abs() < 1e-12 && (py[1] - 0.7).abs() < 1e-12);
        assert_eq!(j(&[&[1.0]]).marginal_x(), vec![1.0]);
    }

    #[test]
    fn p_max_is_largest_row_sum() {
        assert_eq!(j(&[&[0.5], &[0.3], &[0.2]]).p_max(), 0.5);
        assert_eq!(j(&[&[1.0]]).p_max(), 1.0);
        assert_eq!(j(&[&[0.4, 0.1], &[0.1, 0.4]]).p_max(), 0.5);
    }

    #[test]
    fn conditional_masks_zero_columns() {
        let c = j(&[&[0.4, 0.1], &[0.1, 0.4]]).conditional_x_given_s();
        let r = c.row(0).unwrap();
        assert!((r[0] - 0.8).abs() < 1e-12 && (r[1] - 0.2).abs() < 1e-12);

        let c = j(&[&[0.5, 0.0], &[0.5, 0.0]]).conditional_x_given_s();
        assert!(c.is_defined(0));
        assert!(c.row(1).is_none());
        assert_eq!(c.support_mask(), vec![true, false]);

        let c = j(&[&[0.25, 0.25], &[0.25, 0.25]]).conditional_x_given_s();
        assert_eq!(c.row(0).unwrap(), [0.5, 0.5]);
        assert_eq!(c.row(1).unwrap(), [0.5, 0.5]);
    }

    #[test]
    fn mutual_information_examples() {
        assert_eq!(j(&[&[0.25, 0.25], &[0.25, 0.25]]).mutual_information().bits(), 0.0);
        assert!((j(&[&[0.5, 0.0], &[0.0, 0.5]]).mutual_information().bits() - 1.0).abs() < 1e-12);
        // 1 - H_2(0.2), summed by hand from the four cells.
        let oracle = 0.4 * (0.4f64 / 0.25).log2() * 2.0 + 0.1 * (0.1f64 / 0.25).log2() * 2.0;
        let mi = j(&[&[0.4, 0.1], &[0.1, 0.4]]).mutual_information().bits();
        assert!((mi - oracle).abs() < 1e-12);
        assert!((mi - (1.0 - binary_entropy(0.2))).abs() < 1e-12);
        assert!((mi - 0.278_071_905_112_638).abs() < 1e-12);
    }

    #[test]
    fn spectrum_mass_examples() {
        assert_eq!(j(&[&[0.25, 0.25], &[0.25, 0.25]]).relative_ic_spectrum_mass(0.1), 0.0);
        assert_eq!(j(&[&[0.5, 0.0], &[0.0, 0.5]]).relative_ic_spectrum_mass(0.5), 1.0);
        let m = j(&[&[0.4, 0.1], &[0.1, 0.4]]).relative_ic_spectrum_mass(0.5);
        assert!((m - 0.8).abs() < 1e-12);
    }

    #[test]
    fn entropy_of_uniform() {
        assert!((entropy(&[0.25; 4]) - 2.0).abs() < 1e-12);
        assert_eq!(binary_entropy(0.0), 0.0);
    }
}
