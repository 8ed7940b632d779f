use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::instance::{write_json, InstanceFile};
use super::verify::VerifySummary;
use super::{HarnessError, HarnessResult};
use crate::bounds::BoundReport;
use crate::dist::JointDist;
use crate::encoders::{eval_case1, induced_joint_xs, map_estimator_case2, Encoder};
use crate::search::{Method, SearchResult};

pub const TOOL: &str = "guessbound";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Tolerance for re-evaluating reported values.
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub x_size: usize,
    pub y_size: usize,
}

impl InstanceMeta {
    pub fn of(inst: &InstanceFile, j: &JointDist) -> Self {
        InstanceMeta {
            name: inst.name.clone(),
            seed: inst.seed,
            x_size: j.x_size(),
            y_size: j.y_size(),
        }
    }
}

/// The three case optima. `p1` is absent when it was not computed exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub m_size: usize,
    pub l_size: usize,
    pub p1: Option<f64>,
    pub p2: f64,
    pub p2_method: Method,
    pub p3: f64,
    pub p_max: f64,
    pub ordered: Option<bool>,
}

/// Side-information quality of one encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderSummary {
    pub label: String,
    pub phi_y: Vec<usize>,
    pub l_size: usize,
    pub mi_bits: f64,
    pub exact_pc: f64,
    pub optimized: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSearch {
    pub case: u8,
    pub m_size: Option<usize>,
    pub l_size: Option<usize>,
    pub result: SearchResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub generator: Option<String>,
    pub instance: Option<InstanceMeta>,
    pub case_optima: Option<CaseSummary>,
    pub encoders: Vec<EncoderSummary>,
    pub bounds: Vec<BoundReport>,
    pub searches: Vec<LabeledSearch>,
    pub verification: Option<VerifySummary>,
    pub wall_time_ms: u64,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            command: command.to_string(),
            seed: None,
            generator: None,
            instance: None,
            case_optima: None,
            encoders: Vec::new(),
            bounds: Vec::new(),
            searches: Vec::new(),
            verification: None,
            wall_time_ms: 0,
        }
    }

    /// Re-evaluates every reported optimum and encoder value against `j`.
    pub fn check_consistency(&self, j: &JointDist) -> Result<(), String> {
        let close = |what: &str, a: f64, b: f64| {
            if (a - b).abs() <= CONSISTENCY_TOL {
                Ok(())
            } else {
                Err(format!("{what}: reported {a}, re-evaluated {b}"))
            }
        };
        for s in &self.searches {
            let r = &s.result;
            let phi_x = r.best_phi_x.clone().unwrap_or_else(|| Encoder::constant(j.x_size()));
            let phi_y = r.best_phi_y.clone().unwrap_or_else(|| Encoder::constant(j.y_size()));
            let e = eval_case1(j, &phi_x, &phi_y, &r.best_psi).map_err(|e| e.to_string())?;
            close(&format!("case {} search", s.case), r.best_value, e.p_correct)?;
        }
        for enc in &self.encoders {
            let phi = Encoder::new(enc.phi_y.clone(), enc.l_size).map_err(|e| e.to_string())?;
            let xs = induced_joint_xs(j, &phi).map_err(|e| e.to_string())?;
            close(&format!("encoder {} P_c", enc.label), enc.exact_pc, map_estimator_case2(&xs).1.p_correct)?;
            close(&format!("encoder {} MI", enc.label), enc.mi_bits, xs.mutual_information().bits())?;
        }
        if let Some(c) = &self.case_optima {
            close("P3 vs p_max", c.p3, j.p_max())?;
        }
        Ok(())
    }

    /// Same report with the timing field zeroed.
    pub fn without_timing(&self) -> Self {
        RunReport {
            wall_time_ms: 0,
            ..self.clone()
        }
    }
}

pub fn save_report(report: &RunReport, path: impl AsRef<Path>) -> HarnessResult<()> {
    write_json(report, path)
}

pub fn load_report(path: impl AsRef<Path>) -> HarnessResult<RunReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}
