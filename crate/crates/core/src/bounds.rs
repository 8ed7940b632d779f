//! Upper bounds on the correct probability of estimation in terms of an
//! information spectrum and of mutual information, together with the
//! intermediate quantities used to establish them.
//!
//! With `S = φ(Y)`, `L = log2(1/p_max)` and `ν ∈ (0, L)`:
//!
//! * spectrum bound: `P_c ≤ p_SX{ log2|M| ≥ log2(1/p_{X|S}) − η } + 2^{−η}`;
//! * MI bound: `max_ψ P_c(φ, ψ) ≤ 2^ν p_max + I(X; S) / ν`;
//! * linearized form for `ν < min(1, L)`: `(1 + ν) p_max + I(X; S) / ν`.

use serde::{Deserialize, Serialize};

use crate::dist::JointDist;
use crate::encoders::{
    eval_case1, induced_joint_xs, map_estimator_case2, Encoder, Estimator,
};
use crate::error::{Error, Result};

/// Tolerance used when checking that a bound holds.
pub const CHECK_TOL: f64 = 1e-9;
/// Distance kept from the ends of the open ν interval.
pub const NU_EPS: f64 = 1e-9;
/// Width at which the golden-section search stops.
pub const GOLDEN_TOL: f64 = 1e-10;
/// Points in the grid used to cross-check the ν optimizer.
pub const NU_CHECK_GRID: usize = 1000;

/// `log2(1 / p_max)`, the right end of the admissible ν interval.
pub fn nu_upper(p_max: f64) -> f64 {
    -p_max.log2()
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be a positive finite number, got {v}")))
    }
}

/// Masses of the sets `D`, `E` and `D^c ∩ E` over `(s, x, y)` with `s = φ(y)`.
///
/// `D = {p_{X|S}(x|s) ≥ 2^{−η} / |M|}` and `E = {ψ(φ(x), φ(y)) = x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetMasses {
    pub mass_d: f64,
    pub mass_e: f64,
    pub mass_dc_and_e: f64,
    pub eta: f64,
}

impl SetMasses {
    /// The counting bound `p(D^c ∩ E) ≤ 2^{−η}`.
    pub fn lemma_bound(&self) -> f64 {
        (-self.eta).exp2()
    }
}

pub fn set_masses(
    j: &JointDist,
    phi_x: &Encoder,
    phi_y: &Encoder,
    psi: &Estimator,
    eta: f64,
) -> Result<SetMasses> {
    check_positive("eta", eta)?;
    // Dimension checks come for free from the evaluator.
    eval_case1(j, phi_x, phi_y, psi)?;
    let xs = induced_joint_xs(j, phi_y)?;
    let cond = xs.conditional_x_given_s();
    let threshold = (-eta).exp2() / phi_x.range_size() as f64;

    let (mut mass_d, mut mass_e, mut mass_dc_and_e) = (0.0, 0.0, 0.0);
    for x in 0..j.x_size() {
        let m = phi_x.apply(x);
        for (y, &p) in j.row(x).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let s = phi_y.apply(y);
            let in_d = cond.get(s, x).is_some_and(|c| c >= threshold);
            let in_e = psi.estimate(m, s) == x;
            if in_d {
                mass_d += p;
            }
            if in_e {
                mass_e += p;
                if !in_d {
                    mass_dc_and_e += p;
                }
            }
        }
    }
    Ok(SetMasses {
        mass_d,
        mass_e,
        mass_dc_and_e,
        eta,
    })
}

/// Spectrum mass `p_SX{ log2 m ≥ log2(1/p_{X|S}(X|S)) − η }` over the
/// positive-mass cells of an `X × S` joint.
fn spectrum_event_mass(xs: &JointDist, m_size: usize, eta: f64) -> f64 {
    let cond = xs.conditional_x_given_s();
    let log_m = (m_size as f64).log2();
    let mut mass = 0.0;
    for x in 0..xs.x_size() {
        for s in 0..xs.y_size() {
            let p = xs.get(x, s);
            if p == 0.0 {
                continue;
            }
            let c = cond.get(s, x).expect("positive cell has positive column");
            if log_m >= -c.log2() - eta {
                mass += p;
            }
        }
    }
    mass
}

/// Right-hand side of the spectrum bound for a given `φ` and `|M|`.
///
/// May exceed one, in which case the bound is vacuous.
pub fn prop1_rhs(j: &JointDist, phi_y: &Encoder, m_size: usize, eta: f64) -> Result<f64> {
    check_positive("eta", eta)?;
    if m_size == 0 {
        return Err(Error::InvalidParameter("m_size must be positive".into()));
    }
    let xs = induced_joint_xs(j, phi_y)?;
    Ok(spectrum_event_mass(&xs, m_size, eta) + (-eta).exp2())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prop1Check {
    pub eta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Checks `P_c(φ, φ, ψ) ≤ rhs(η)` for every `η` in the grid, using `|M|` of `φ`.
pub fn verify_prop1(
    j: &JointDist,
    phi_x: &Encoder,
    phi_y: &Encoder,
    psi: &Estimator,
    eta_grid: &[f64],
) -> Result<Vec<Prop1Check>> {
    let lhs = eval_case1(j, phi_x, phi_y, psi)?.p_correct;
    eta_grid
        .iter()
        .map(|&eta| {
            let rhs = prop1_rhs(j, phi_y, phi_x.range_size(), eta)?;
            Ok(Prop1Check {
                eta,
                lhs,
                rhs,
                ok: lhs <= rhs + CHECK_TOL,
            })
        })
        .collect()
}

/// Evaluated bounds at one ν.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub nu: f64,
    /// `log2(1/p_max) − ν`.
    pub eta: f64,
    pub p_max: f64,
    pub mi_bits: f64,
    /// Spectrum bound at `|M| = 1` and the η above.
    pub prop1_rhs: f64,
    pub thm1_bound: f64,
    /// Present when `ν < min(1, log2(1/p_max))`.
    pub cor_bound: Option<f64>,
    /// `max_ψ P_c(φ, ψ)` for the φ the report was built from.
    pub exact_pc: Option<f64>,
    /// `thm1_bound − exact_pc`.
    pub slack: Option<f64>,
    pub degenerate_flag: bool,
}

/// Everything the bounds need from `(p_XY, φ)`, computed once.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    xs: JointDist,
    pub p_max: f64,
    pub mi_bits: f64,
    pub exact_pc: f64,
}

impl BoundInputs {
    pub fn new(j: &JointDist, phi_y: &Encoder) -> Result<Self> {
        let xs = induced_joint_xs(j, phi_y)?;
        let (_, eval) = map_estimator_case2(&xs);
        Ok(BoundInputs {
            p_max: xs.p_max(),
            mi_bits: xs.mutual_information().bits(),
            exact_pc: eval.p_correct,
            xs,
        })
    }

    pub fn xs(&self) -> &JointDist {
        &self.xs
    }

    /// `log2(1/p_max)`.
    pub fn nu_upper(&self) -> f64 {
        nu_upper(self.p_max)
    }

    /// Upper end of the linearized bound's ν interval, `min(1, log2(1/p_max))`.
    pub fn cor_nu_upper(&self) -> f64 {
        self.nu_upper().min(1.0)
    }

    pub fn is_degenerate(&self) -> bool {
        self.nu_upper() <= 0.0
    }

    pub fn thm1_value(&self, nu: f64) -> f64 {
        nu.exp2() * self.p_max + self.mi_bits / nu
    }

    pub fn cor_value(&self, nu: f64) -> f64 {
        (1.0 + nu) * self.p_max + self.mi_bits / nu
    }

    fn degenerate_report(&self, nu: f64) -> BoundReport {
        BoundReport {
            nu,
            eta: 0.0,
            p_max: self.p_max,
            mi_bits: self.mi_bits,
            prop1_rhs: 1.0,
            thm1_bound: 1.0,
            cor_bound: Some(1.0),
            exact_pc: Some(self.exact_pc),
            slack: Some(1.0 - self.exact_pc),
            degenerate_flag: true,
        }
    }

    /// Report at a ν already known to lie in `(0, log2(1/p_max))`.
    fn report_at(&self, nu: f64) -> BoundReport {
        let eta = self.nu_upper() - nu;
        let prop1 = if eta > 0.0 {
            spectrum_event_mass(&self.xs, 1, eta) + (-eta).exp2()
        } else {
            f64::INFINITY
        };
        let thm1 = self.thm1_value(nu);
        BoundReport {
            nu,
            eta,
            p_max: self.p_max,
            mi_bits: self.mi_bits,
            prop1_rhs: prop1,
            thm1_bound: thm1,
            cor_bound: (nu < self.cor_nu_upper()).then(|| self.cor_value(nu)),
            exact_pc: Some(self.exact_pc),
            slack: Some(thm1 - self.exact_pc),
            degenerate_flag: false,
        }
    }

    pub fn thm1(&self, nu: f64) -> Result<BoundReport> {
        if self.is_degenerate() {
            return Ok(self.degenerate_report(nu));
        }
        let upper = self.nu_upper();
        if !(nu > 0.0 && nu < upper) {
            return Err(Error::NuOutOfRange { nu, upper });
        }
        Ok(self.report_at(nu))
    }

    pub fn cor(&self, nu: f64) -> Result<BoundReport> {
        if self.is_degenerate() {
            return Ok(self.degenerate_report(nu));
        }
        let upper = self.cor_nu_upper();
        if !(nu > 0.0 && nu < upper) {
            return Err(Error::NuOutOfRange { nu, upper });
        }
        Ok(self.report_at(nu))
    }

    /// Tightest MI bound over the clamped interval `[ε, log2(1/p_max) − ε]`.
    pub fn optimize(&self) -> BoundReport {
        if self.is_degenerate() {
            return self.degenerate_report(0.0);
        }
        let upper = self.nu_upper();
        let (lo, hi) = clamped_interval(upper);
        if hi <= lo {
            return self.report_at(upper / 2.0);
        }
        if self.mi_bits == 0.0 {
            return self.report_at(lo);
        }
        let f = |nu: f64| self.thm1_value(nu);
        let mut nu = golden_section_min(f, lo, hi, GOLDEN_TOL);
        // f is convex, so the grid can only win by round-off; keep whichever
        // point is actually lower.
        let (grid_nu, grid_val) = grid_min(f, lo, hi, NU_CHECK_GRID);
        if grid_val < f(nu) {
            nu = grid_nu;
        }
        self.report_at(nu)
    }
}

/// `[ε, upper − ε]`.
pub fn clamped_interval(upper: f64) -> (f64, f64) {
    (NU_EPS, upper - NU_EPS)
}

/// Minimizer of a unimodal `f` on `[a, b]`, to an interval width below `tol`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = (a + b) / 2.0;
    // Return the best of the final bracket points.
    [(mid, f(mid)), (c, fc), (d, fd)]
        .into_iter()
        .fold((mid, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best })
        .0
}

/// Minimum of `f` over `n` evenly spaced points covering `[a, b]`.
pub fn grid_min(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> (f64, f64) {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let nu = a + (b - a) * i as f64 / (n - 1) as f64;
            (nu, f(nu))
        })
        .fold((a, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best })
}

pub fn thm1_bound(j: &JointDist, phi_y: &Encoder, nu: f64) -> Result<BoundReport> {
    BoundInputs::new(j, phi_y)?.thm1(nu)
}

pub fn cor_bound(j: &JointDist, phi_y: &Encoder, nu: f64) -> Result<BoundReport> {
    BoundInputs::new(j, phi_y)?.cor(nu)
}

pub fn optimize_nu(j: &JointDist, phi_y: &Encoder) -> Result<BoundReport> {
    Ok(BoundInputs::new(j, phi_y)?.optimize())
}

/// `n` log-spaced points over the clamped ν interval.
pub fn log_nu_grid(upper: f64, n: usize) -> Vec<f64> {
    let (lo, hi) = clamped_interval(upper);
    if n == 0 || hi <= lo {
        return Vec::new();
    }
    if n == 1 {
        return vec![(lo * hi).sqrt()];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` evenly spaced interior points of `(0, upper)`.
pub fn interior_nu_grid(upper: f64, n: usize) -> Vec<f64> {
    if upper <= 0.0 {
        return Vec::new();
    }
    (1..=n).map(|i| upper * i as f64 / (n + 1) as f64).collect()
}

/// One inequality of the derivation, evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Terms of the derivation of the MI bound at a given `(η, ν)` for a fixed `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofChain {
    pub eta: f64,
    pub nu: f64,
    /// `max_ψ P_c(φ, ψ)`.
    pub exact_pc: f64,
    /// Spectrum bound at `|M| = 1`.
    pub prop1_rhs: f64,
    /// `p_X{ log2(1/p_X(X)) < η + ν }`.
    pub self_info_tail: f64,
    /// `p_SX{ log2(p_{X|S}(X|S) / p_X(X)) ≥ ν }`.
    pub spectrum_tail: f64,
    /// `I(X; S) / ν`.
    pub markov_bound: f64,
    /// `E[max(i, 0)] / ν` for the information density `i`.
    pub positive_part_bound: f64,
    pub two_pow_neg_eta: f64,
    /// `self_info_tail + markov_bound + two_pow_neg_eta`.
    pub chain_sum: f64,
    pub steps: Vec<ChainStep>,
}

impl ProofChain {
    pub fn step(&self, name: &str) -> Option<&ChainStep> {
        self.steps.iter().find(|s| s.name == name)
    }

    pub fn all_hold(&self) -> bool {
        self.steps.iter().all(|s| s.holds)
    }
}

/// Evaluates each term of the derivation and checks every step within 1e-9.
///
/// The `markov` step compares the spectrum tail with `I/ν`. The information
/// density can be negative, so this step does not hold in general; it is
/// reported, not enforced. `markov-positive` is the valid variant using the
/// positive part of the density.
///
/// When `η + ν` is within 1e-12 (relative) of `log2(1/p_max)` it is taken to
/// be exactly that value, so the self-information tail vanishes as intended.
pub fn proof_chain_terms(j: &JointDist, phi_y: &Encoder, eta: f64, nu: f64) -> Result<ProofChain> {
    check_positive("eta", eta)?;
    check_positive("nu", nu)?;
    let inputs = BoundInputs::new(j, phi_y)?;
    let xs = inputs.xs();
    let px = xs.marginal_x();

    let upper = inputs.nu_upper();
    let mut t = eta + nu;
    if (t - upper).abs() <= 1e-12 * upper.max(1.0) {
        t = upper;
    }
    let self_info_tail: f64 = px.iter().filter(|&&p| p > 0.0 && -p.log2() < t).sum();

    let density = xs.information_density();
    let spectrum_tail: f64 = density.iter().filter(|d| d.3 >= nu).map(|d| d.2).sum();
    let positive_part: f64 = density.iter().map(|d| d.2 * d.3.max(0.0)).sum();

    let prop1 = spectrum_event_mass(xs, 1, eta) + (-eta).exp2();
    let two_pow_neg_eta = (-eta).exp2();
    let markov_bound = inputs.mi_bits / nu;
    let chain_sum = self_info_tail + markov_bound + two_pow_neg_eta;

    let step = |name: &str, lhs: f64, rhs: f64| ChainStep {
        name: name.to_string(),
        lhs,
        rhs,
        holds: lhs <= rhs + CHECK_TOL,
    };
    let steps = vec![
        step("spectrum-bound", inputs.exact_pc, prop1),
        step("split", prop1, self_info_tail + spectrum_tail + two_pow_neg_eta),
        step("markov", spectrum_tail, markov_bound),
        step("markov-positive", spectrum_tail, positive_part / nu),
        step("total", inputs.exact_pc, chain_sum),
    ];

    Ok(ProofChain {
        eta,
        nu,
        exact_pc: inputs.exact_pc,
        prop1_rhs: prop1,
        self_info_tail,
        spectrum_tail,
        markov_bound,
        positive_part_bound: positive_part / nu,
        two_pow_neg_eta,
        chain_sum,
        steps,
    })
}
