//! The `analyze`, `search`, `bound` and `verify` subcommands as library calls.

use std::path::Path;
use std::time::Instant;

use super::instance::InstanceFile;
use super::report::{CaseSummary, EncoderSummary, InstanceMeta, LabeledSearch, RunReport};
use super::verify::{run_verify, VerifyConfig};
use super::{HarnessError, HarnessResult};
use crate::bounds::{log_nu_grid, BoundInputs};
use crate::dist::JointDist;
use crate::encoders::Encoder;
use crate::error::Error;
use crate::search::{
    exact_case1, exact_case2, exact_case3, local_search_case2, SearchResult, DEFAULT_BUDGET, ORDERING_TOL,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub m_size: Option<usize>,
    pub l_size: Option<usize>,
    pub nu: Option<f64>,
    pub nu_grid: usize,
    pub heuristic: bool,
    pub restarts: u32,
    pub seed: u64,
    pub budget: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            m_size: None,
            l_size: None,
            nu: None,
            nu_grid: 100,
            heuristic: false,
            restarts: 10,
            seed: 0,
            budget: DEFAULT_BUDGET,
        }
    }
}

struct Resolved {
    j: JointDist,
    phi: Option<Encoder>,
    m_size: usize,
    l_size: usize,
}

fn resolve(inst: &InstanceFile, opts: &Options) -> HarnessResult<Resolved> {
    let j = inst.joint()?;
    let phi = inst.phi_y()?;
    let l_size = opts
        .l_size
        .or(inst.l_size)
        .or(phi.as_ref().map(Encoder::range_size))
        .unwrap_or(j.y_size());
    let m_size = opts.m_size.or(inst.m_size).unwrap_or(2);
    if l_size == 0 || m_size == 0 {
        return Err(HarnessError::Validation("l_size and m_size must be positive".into()));
    }
    Ok(Resolved { j, phi, m_size, l_size })
}

/// Exact Case-2 search, or local search when the budget is exceeded and
/// `--heuristic` was given (or always, with `force_local`).
fn case2(r: &Resolved, opts: &Options, force_local: bool) -> HarnessResult<SearchResult> {
    if force_local {
        return Ok(local_search_case2(&r.j, r.l_size, opts.restarts, opts.seed)?);
    }
    match exact_case2(&r.j, r.l_size, opts.budget) {
        Err(Error::BudgetExceeded { .. }) if opts.heuristic => {
            Ok(local_search_case2(&r.j, r.l_size, opts.restarts, opts.seed)?)
        }
        other => Ok(other?),
    }
}

fn case1(r: &Resolved, opts: &Options) -> HarnessResult<Option<SearchResult>> {
    match exact_case1(&r.j, r.m_size, r.l_size, opts.budget) {
        Ok(s) => Ok(Some(s)),
        Err(Error::BudgetExceeded { .. }) if opts.heuristic => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn encoder_summary(j: &JointDist, label: &str, phi: &Encoder) -> HarnessResult<EncoderSummary> {
    let inputs = BoundInputs::new(j, phi)?;
    Ok(EncoderSummary {
        label: label.to_string(),
        phi_y: phi.map().to_vec(),
        l_size: phi.range_size(),
        mi_bits: inputs.mi_bits,
        exact_pc: inputs.exact_pc,
        optimized: inputs.optimize(),
    })
}

fn base_report(command: &str, inst: &InstanceFile, r: &Resolved, opts: &Options) -> RunReport {
    let mut report = RunReport::new(command);
    report.seed = Some(opts.seed);
    report.instance = Some(InstanceMeta::of(inst, &r.j));
    report
}

/// Case optima, encoder summaries and bounds for one instance.
pub fn analyze(inst: &InstanceFile, opts: &Options) -> HarnessResult<RunReport> {
    let start = Instant::now();
    let r = resolve(inst, opts)?;
    let mut report = base_report("analyze", inst, &r, opts);

    let s2 = case2(&r, opts, false)?;
    let s1 = case1(&r, opts)?;
    let s3 = exact_case3(&r.j);
    let p_max = r.j.p_max();
    let p1 = s1.as_ref().map(|s| s.best_value);
    report.case_optima = Some(CaseSummary {
        m_size: r.m_size,
        l_size: r.l_size,
        p1,
        p2: s2.best_value,
        p2_method: s2.method,
        p3: s3.best_value,
        p_max,
        ordered: p1.map(|p1| {
            p1 + ORDERING_TOL >= s2.best_value
                && s2.best_value + ORDERING_TOL >= s3.best_value
                && (s3.best_value - p_max).abs() <= ORDERING_TOL
        }),
    });

    let best_phi = s2.best_phi_y.clone().expect("case-2 search returns an encoder");
    let primary = r.phi.clone().unwrap_or_else(|| best_phi.clone());
    if let Some(phi) = &r.phi {
        report.encoders.push(encoder_summary(&r.j, "instance", phi)?);
    }
    report.encoders.push(encoder_summary(&r.j, "case2-optimal", &best_phi)?);
    report.encoders.push(encoder_summary(&r.j, "identity", &Encoder::identity(r.j.y_size()))?);

    if let Some(nu) = opts.nu {
        report.bounds.push(BoundInputs::new(&r.j, &primary)?.thm1(nu)?);
    }

    if let Some(s1) = s1 {
        report.searches.push(LabeledSearch {
            case: 1,
            m_size: Some(r.m_size),
            l_size: Some(r.l_size),
            result: s1,
        });
    }
    report.searches.push(LabeledSearch {
        case: 2,
        m_size: None,
        l_size: Some(r.l_size),
        result: s2,
    });
    report.searches.push(LabeledSearch {
        case: 3,
        m_size: None,
        l_size: None,
        result: s3,
    });
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Exact (or, with `--heuristic`, local-search) optima for Cases 1–3.
pub fn search(inst: &InstanceFile, opts: &Options) -> HarnessResult<RunReport> {
    let start = Instant::now();
    let r = resolve(inst, opts)?;
    let mut report = base_report("search", inst, &r, opts);
    if !opts.heuristic {
        if let Some(s1) = case1(&r, opts)? {
            report.searches.push(LabeledSearch {
                case: 1,
                m_size: Some(r.m_size),
                l_size: Some(r.l_size),
                result: s1,
            });
        }
    }
    report.searches.push(LabeledSearch {
        case: 2,
        m_size: None,
        l_size: Some(r.l_size),
        result: case2(&r, opts, opts.heuristic)?,
    });
    report.searches.push(LabeledSearch {
        case: 3,
        m_size: None,
        l_size: None,
        result: exact_case3(&r.j),
    });
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// One row of the plot series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub nu: f64,
    pub thm1_bound: f64,
    pub cor_bound: Option<f64>,
    pub exact_pc: Option<f64>,
    pub p_max: f64,
}

pub const CSV_HEADER: [&str; 5] = ["nu", "thm1_bound", "cor_bound", "exact_pc", "p_max"];

/// ν sweep and optimized bound for the instance encoder (identity if none).
pub fn bound(inst: &InstanceFile, opts: &Options) -> HarnessResult<(RunReport, Vec<CurveRow>)> {
    let start = Instant::now();
    let r = resolve(inst, opts)?;
    let mut report = base_report("bound", inst, &r, opts);
    let (label, phi) = match &r.phi {
        Some(phi) => ("instance", phi.clone()),
        None => ("identity", Encoder::identity(r.j.y_size())),
    };
    report.encoders.push(encoder_summary(&r.j, label, &phi)?);

    let inputs = BoundInputs::new(&r.j, &phi)?;
    let grid = match opts.nu {
        Some(nu) => vec![nu],
        None if inputs.is_degenerate() => Vec::new(),
        None => log_nu_grid(inputs.nu_upper(), opts.nu_grid),
    };
    let mut rows = Vec::with_capacity(grid.len());
    for nu in grid {
        let b = inputs.thm1(nu)?;
        rows.push(CurveRow {
            nu,
            thm1_bound: b.thm1_bound,
            cor_bound: b.cor_bound,
            exact_pc: b.exact_pc,
            p_max: b.p_max,
        });
        report.bounds.push(b);
    }
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok((report, rows))
}

pub fn write_csv(rows: &[CurveRow], path: impl AsRef<Path>) -> HarnessResult<()> {
    let path = path.as_ref();
    let io_err = |e: csv::Error| HarnessError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    };
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(CSV_HEADER).map_err(io_err)?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for row in rows {
        w.write_record([
            row.nu.to_string(),
            row.thm1_bound.to_string(),
            opt(row.cor_bound),
            opt(row.exact_pc),
            row.p_max.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Property sweeps; the caller maps a failed summary to exit code 1.
pub fn verify(cfg: &VerifyConfig) -> HarnessResult<RunReport> {
    let start = Instant::now();
    let mut report = RunReport::new("verify");
    report.seed = Some(cfg.seed);
    report.generator = Some(super::generate::GENERATOR.to_string());
    report.verification = Some(run_verify(cfg)?);
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(rows: &[&[f64]]) -> InstanceFile {
        InstanceFile::from_joint(&JointDist::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap())
    }

    #[test]
    fn analyze_worked_example() {
        let i = inst(&[&[0.4, 0.1], &[0.1, 0.4]]);
        let rep = analyze(&i, &Options { nu: Some(0.5), ..Default::default() }).unwrap();
        let c = rep.case_optima.as_ref().unwrap();
        assert!((c.p1.unwrap() - 1.0).abs() < 1e-12);
        assert!((c.p2 - 0.8).abs() < 1e-12);
        assert!((c.p3 - 0.5).abs() < 1e-12);
        assert_eq!(c.ordered, Some(true));
        assert_eq!(rep.bounds.len(), 1);
        rep.check_consistency(&i.joint().unwrap()).unwrap();
    }

    #[test]
    fn analyze_point_mass() {
        let i = inst(&[&[1.0]]);
        let rep = analyze(&i, &Options::default()).unwrap();
        let c = rep.case_optima.unwrap();
        assert_eq!((c.p1, c.p2, c.p3), (Some(1.0), 1.0, 1.0));
        assert!(rep.encoders.iter().all(|e| e.optimized.degenerate_flag));
    }

    #[test]
    fn budget_exceeded_without_heuristic() {
        let py = vec![0.1; 10];
        let i = InstanceFile::from_joint(&JointDist::product(&[0.5, 0.5], &py).unwrap());
        let opts = Options { budget: 100, ..Default::default() };
        let err = search(&i, &opts).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let rep = analyze(&i, &Options { heuristic: true, ..opts }).unwrap();
        assert!(rep.case_optima.unwrap().p1.is_none());
    }

    #[test]
    fn bound_curve_on_independent_instance() {
        let i = InstanceFile::from_joint(&JointDist::product(&[0.3, 0.7], &[0.5, 0.5]).unwrap());
        let (_, rows) = bound(&i, &Options::default()).unwrap();
        assert_eq!(rows.len(), 100);
        let min = rows.iter().map(|r| r.thm1_bound).fold(f64::INFINITY, f64::min);
        assert!((min - 0.7).abs() < 1e-6);
    }
}
