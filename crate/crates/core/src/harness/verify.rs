//! Property sweeps over seeded random instances.
//!
//! Each instance is checked independently (in parallel) and the per-instance
//! tallies are merged in instance order, so the summary does not depend on
//! scheduling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{gen_random, GENERATOR};
use super::instance::InstanceFile;
use super::HarnessResult;
use crate::bounds::{interior_nu_grid, prop1_rhs, BoundInputs, CHECK_TOL};
use crate::dist::JointDist;
use crate::encoders::{induced_table, Encoder};
use crate::search::{exact_case2, ordering_check, partitions_up_to_k};

pub const DEFAULT_ETA_GRID: [f64; 7] = [0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
/// Dirichlet concentrations the sampler picks from, uniformly.
pub const CONCENTRATIONS: [f64; 3] = [0.3, 1.0, 3.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub instances: usize,
    pub seed: u64,
    pub xmax: usize,
    pub ymax: usize,
    pub mmax: usize,
    pub lmax: usize,
    pub eta_grid: Vec<f64>,
    pub nu_points: usize,
    pub budget: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            instances: 200,
            seed: 0,
            xmax: 3,
            ymax: 4,
            mmax: 2,
            lmax: 3,
            eta_grid: DEFAULT_ETA_GRID.to_vec(),
            nu_points: 50,
            budget: crate::search::DEFAULT_BUDGET,
        }
    }
}

/// Counts for one named inequality. `worst_margin` is the smallest observed
/// `rhs − lhs`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckStats {
    pub checked: u64,
    pub violations: u64,
    pub worst_margin: Option<f64>,
}

impl CheckStats {
    fn merge(&mut self, other: &CheckStats) {
        self.checked += other.checked;
        self.violations += other.violations;
        self.worst_margin = match (self.worst_margin, other.worst_margin) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub instances: usize,
    pub seed: u64,
    pub generator: String,
    /// Inequalities that must hold; any violation fails the run.
    pub checks: BTreeMap<String, CheckStats>,
    /// Inequalities that are tracked but not required to hold.
    pub informational: BTreeMap<String, CheckStats>,
    pub skipped_degenerate: u64,
    pub first_violations: Vec<String>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.checks.values().all(|c| c.violations == 0)
    }

    pub fn total_violations(&self) -> u64 {
        self.checks.values().map(|c| c.violations).sum()
    }
}

const MAX_REPORTED: usize = 20;

/// Accumulates check outcomes for one instance.
#[derive(Debug, Default)]
pub struct Tally {
    checks: BTreeMap<String, CheckStats>,
    informational: BTreeMap<String, CheckStats>,
    skipped_degenerate: u64,
    violations: Vec<String>,
    label: String,
}

impl Tally {
    pub fn new(label: impl Into<String>) -> Self {
        Tally {
            label: label.into(),
            ..Default::default()
        }
    }

    /// Records `lhs ≤ rhs + tol`; returns whether it held.
    pub fn record(&mut self, name: &str, lhs: f64, rhs: f64, tol: f64) -> bool {
        let ok = lhs <= rhs + tol;
        let stats = self.checks.entry(name.to_string()).or_default();
        bump(stats, lhs, rhs, ok);
        if !ok && self.violations.len() < MAX_REPORTED {
            self.violations
                .push(format!("{}: {name}: {lhs:.17e} > {rhs:.17e} + {tol:e}", self.label));
        }
        ok
    }

    pub fn record_info(&mut self, name: &str, lhs: f64, rhs: f64, tol: f64) {
        let ok = lhs <= rhs + tol;
        bump(self.informational.entry(name.to_string()).or_default(), lhs, rhs, ok);
    }

    pub fn skip_degenerate(&mut self) {
        self.skipped_degenerate += 1;
    }

    pub fn into_summary(self, instances: usize, seed: u64) -> VerifySummary {
        let mut s = VerifySummary {
            instances,
            seed,
            generator: GENERATOR.to_string(),
            ..Default::default()
        };
        s.absorb(self);
        s
    }
}

fn bump(stats: &mut CheckStats, lhs: f64, rhs: f64, ok: bool) {
    stats.checked += 1;
    if !ok {
        stats.violations += 1;
    }
    let margin = rhs - lhs;
    stats.worst_margin = Some(stats.worst_margin.map_or(margin, |w| w.min(margin)));
}

impl VerifySummary {
    fn absorb(&mut self, t: Tally) {
        for (k, v) in &t.checks {
            self.checks.entry(k.clone()).or_default().merge(v);
        }
        for (k, v) in &t.informational {
            self.informational.entry(k.clone()).or_default().merge(v);
        }
        self.skipped_degenerate += t.skipped_degenerate;
        let room = MAX_REPORTED.saturating_sub(self.first_violations.len());
        self.first_violations.extend(t.violations.into_iter().take(room));
    }
}

/// The instances a sweep with this configuration visits, in order.
pub fn sample_instances(cfg: &VerifyConfig) -> HarnessResult<Vec<InstanceFile>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let xlo = cfg.xmax.clamp(1, 2);
    (0..cfg.instances)
        .map(|_| {
            let x = rng.random_range(xlo..=cfg.xmax.max(1));
            let y = rng.random_range(1..=cfg.ymax.max(1));
            let alpha = CONCENTRATIONS[rng.random_range(0..CONCENTRATIONS.len())];
            let seed: u64 = rng.random();
            gen_random(x, y, alpha, seed)
        })
        .collect()
}

/// All maps `ψ : M × L → X` as row-major tables, in odometer order.
fn for_each_estimator(x_size: usize, cells: usize, mut f: impl FnMut(&[usize])) {
    let mut table = vec![0usize; cells];
    loop {
        f(&table);
        let mut i = cells;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            table[i] += 1;
            if table[i] < x_size {
                break;
            }
            table[i] = 0;
        }
    }
}

/// Counting-lemma and spectrum-bound checks for every estimator under one
/// `(φ, φ)` pair.
pub fn check_lemma_and_prop1(
    tally: &mut Tally,
    j: &JointDist,
    phi_x: &Encoder,
    phi_y: &Encoder,
    eta_grid: &[f64],
) -> HarnessResult<()> {
    let (x_size, m, l) = (j.x_size(), phi_x.range_size(), phi_y.range_size());
    let xs = induced_table(j, phi_y);
    let ps: Vec<f64> = (0..l).map(|s| (0..x_size).map(|x| xs[x * l + s]).sum()).collect();
    // in_d[k][x * l + s] for eta_grid[k]
    let in_d: Vec<Vec<bool>> = eta_grid
        .iter()
        .map(|&eta| {
            let threshold = (-eta).exp2() / m as f64;
            (0..x_size * l)
                .map(|c| ps[c % l] > 0.0 && xs[c] / ps[c % l] >= threshold)
                .collect()
        })
        .collect();
    let rhs: Vec<f64> = eta_grid
        .iter()
        .map(|&eta| prop1_rhs(j, phi_y, m, eta))
        .collect::<Result<_, _>>()?;

    for_each_estimator(x_size, m * l, |psi| {
        let mut mass_e = 0.0;
        let mut dc_and_e = vec![0.0; eta_grid.len()];
        for x in 0..x_size {
            let mx = phi_x.apply(x);
            for s in 0..l {
                let p = xs[x * l + s];
                if p > 0.0 && psi[mx * l + s] == x {
                    mass_e += p;
                    for (k, d) in in_d.iter().enumerate() {
                        if !d[x * l + s] {
                            dc_and_e[k] += p;
                        }
                    }
                }
            }
        }
        for (k, &eta) in eta_grid.iter().enumerate() {
            tally.record("lemma1", dc_and_e[k], (-eta).exp2(), 1e-12);
            tally.record("prop1", mass_e, rhs[k], CHECK_TOL);
        }
    });
    Ok(())
}

/// Per-φ MI-bound checks on a ν grid, plus the linearized bound's dominance.
pub fn check_thm1_for_phi(tally: &mut Tally, j: &JointDist, phi_y: &Encoder, nu_points: usize) -> HarnessResult<()> {
    let inputs = BoundInputs::new(j, phi_y)?;
    if inputs.is_degenerate() {
        tally.skip_degenerate();
        return Ok(());
    }
    let cor_upper = inputs.cor_nu_upper();
    for nu in interior_nu_grid(inputs.nu_upper(), nu_points) {
        let thm1 = inputs.thm1_value(nu);
        tally.record("thm1-per-phi", inputs.exact_pc, thm1, CHECK_TOL);
        if nu < cor_upper {
            let cor = inputs.cor_value(nu);
            tally.record("cor-dominance", thm1, cor, 1e-12);
            tally.record("cor-exact", inputs.exact_pc, cor, CHECK_TOL);
        }
        let tail = inputs.xs().relative_ic_spectrum_mass(nu);
        tally.record_info("markov-step", tail, inputs.mi_bits / nu, CHECK_TOL);
    }
    Ok(())
}

/// `P_c,max^(2) ≤` optimized bound of the MI-maximizing φ with at most `l` blocks.
pub fn check_thm1_searched(tally: &mut Tally, j: &JointDist, l: usize, budget: u64) -> HarnessResult<()> {
    if j.p_max() >= 1.0 {
        tally.skip_degenerate();
        return Ok(());
    }
    let p2 = exact_case2(j, l, budget)?.best_value;
    let mut best: Option<(f64, Encoder)> = None;
    for phi in partitions_up_to_k(j.y_size(), l) {
        let mi = BoundInputs::new(j, &phi)?.mi_bits;
        if best.as_ref().is_none_or(|(b, _)| mi > *b) {
            best = Some((mi, phi));
        }
    }
    let (_, phi) = best.expect("at least one partition");
    let bound = BoundInputs::new(j, &phi)?.optimize();
    tally.record("thm1-searched", p2, bound.thm1_bound, CHECK_TOL);
    Ok(())
}

/// Zero-information instance built from the marginals of `j`.
pub fn check_no_help(tally: &mut Tally, j: &JointDist, budget: u64) -> HarnessResult<()> {
    let prod = JointDist::product(&j.marginal_x(), &j.marginal_y())?;
    let p_max = prod.p_max();
    for l in 1..=prod.y_size() {
        let p2 = exact_case2(&prod, l, budget)?.best_value;
        tally.record("no-help-exact", (p2 - p_max).abs(), 1e-12, 0.0);
    }
    let bound = BoundInputs::new(&prod, &Encoder::identity(prod.y_size()))?;
    if bound.is_degenerate() {
        tally.skip_degenerate();
    } else {
        tally.record("no-help-bound", bound.optimize().thm1_bound, p_max + 1e-6, 0.0);
    }
    Ok(())
}

fn check_instance(cfg: &VerifyConfig, index: usize, inst: &InstanceFile) -> HarnessResult<Tally> {
    let j = inst.joint()?;
    let mut tally = Tally::new(format!(
        "instance {index} ({})",
        inst.name.as_deref().unwrap_or("unnamed")
    ));

    for m in 1..=cfg.mmax {
        for l in 1..=cfg.lmax {
            for phi_x in partitions_up_to_k(j.x_size(), m) {
                for phi_y in partitions_up_to_k(j.y_size(), l) {
                    check_lemma_and_prop1(&mut tally, &j, &phi_x, &phi_y, &cfg.eta_grid)?;
                }
            }
        }
    }

    for phi_y in partitions_up_to_k(j.y_size(), cfg.lmax) {
        check_thm1_for_phi(&mut tally, &j, &phi_y, cfg.nu_points)?;
    }

    for l in 1..=cfg.lmax {
        check_thm1_searched(&mut tally, &j, l, cfg.budget)?;
        let o = ordering_check(&j, 2, l, cfg.budget)?;
        tally.record("ordering-p2-le-p1", o.p2, o.p1, crate::search::ORDERING_TOL);
        tally.record("ordering-p3-le-p2", o.p3, o.p2, crate::search::ORDERING_TOL);
        tally.record("ordering-p3-eq-pmax", (o.p3 - o.p_max).abs(), crate::search::ORDERING_TOL, 0.0);
    }

    check_no_help(&mut tally, &j, cfg.budget)?;
    Ok(tally)
}

/// Runs every sweep over `cfg.instances` sampled instances.
pub fn run_verify(cfg: &VerifyConfig) -> HarnessResult<VerifySummary> {
    let instances = sample_instances(cfg)?;
    let tallies: Vec<HarnessResult<Tally>> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| check_instance(cfg, i, inst))
        .collect();
    let mut summary = VerifySummary {
        instances: cfg.instances,
        seed: cfg.seed,
        generator: GENERATOR.to_string(),
        ..Default::default()
    };
    for t in tallies {
        summary.absorb(t?);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::set_masses;
    use crate::encoders::{eval_case1, Estimator};

    #[test]
    fn estimator_enumeration_is_complete() {
        let mut seen = Vec::new();
        for_each_estimator(3, 2, |t| seen.push(t.to_vec()));
        assert_eq!(seen.len(), 9);
        assert_eq!(seen[0], [0, 0]);
        assert_eq!(seen[8], [2, 2]);
    }

    #[test]
    fn fast_sweep_agrees_with_set_masses() {
        let j = gen_random(3, 3, 0.5, 11).unwrap().joint().unwrap();
        let phi_x = Encoder::new(vec![0, 1, 0], 2).unwrap();
        let phi_y = Encoder::new(vec![0, 0, 1], 2).unwrap();
        let eta = [0.3];
        let mut fast = Vec::new();
        let mut tally = Tally::new("t");
        check_lemma_and_prop1(&mut tally, &j, &phi_x, &phi_y, &eta).unwrap();
        for_each_estimator(3, 4, |t| fast.push(t.to_vec()));
        let mut worst: f64 = f64::INFINITY;
        for t in fast {
            let psi = Estimator::new(2, 2, 3, t).unwrap();
            let m = set_masses(&j, &phi_x, &phi_y, &psi, eta[0]).unwrap();
            let e = eval_case1(&j, &phi_x, &phi_y, &psi).unwrap();
            assert!((m.mass_e - e.p_correct).abs() < 1e-12);
            worst = worst.min(m.lemma_bound() - m.mass_dc_and_e);
        }
        let lemma = &tally.checks["lemma1"];
        assert_eq!(lemma.checked, 81);
        assert!((lemma.worst_margin.unwrap() - worst).abs() < 1e-12);
    }

    #[test]
    fn small_sweep_passes_and_is_deterministic() {
        let cfg = VerifyConfig {
            instances: 6,
            seed: 3,
            ..Default::default()
        };
        let a = run_verify(&cfg).unwrap();
        assert!(a.passed(), "{:?}", a.first_violations);
        assert_eq!(a, run_verify(&cfg).unwrap());
        for key in ["lemma1", "prop1", "thm1-per-phi", "thm1-searched", "cor-dominance", "no-help-exact"] {
            assert!(a.checks[key].checked > 0, "{key}");
        }
    }
}
