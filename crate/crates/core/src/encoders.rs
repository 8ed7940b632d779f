//! Deterministic encoders, estimators and exact evaluation of the correct
//! probability of estimation.
//!
//! Case 1: the estimator sees `(φ(X), φ(Y))`. Case 2: it sees only `φ(Y)`
//! (equivalently `|M| = 1`). Case 3: it sees nothing (`|M| = |L| = 1`).
//! All argmax ties are broken toward the smallest index.

use serde::{Deserialize, Serialize};

use crate::dist::{default_labels, JointDist};
use crate::error::{Error, Result};

/// A total map from `{0..domain_size}` to `{0..range_size}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Encoder {
    range_size: usize,
    map: Vec<usize>,
}

impl Encoder {
    pub fn new(map: Vec<usize>, range_size: usize) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::InvalidEncoder("empty domain".into()));
        }
        if range_size == 0 {
            return Err(Error::InvalidEncoder("empty range".into()));
        }
        if let Some((i, &v)) = map.iter().enumerate().find(|(_, &v)| v >= range_size) {
            return Err(Error::InvalidEncoder(format!(
                "map[{i}] = {v} is not below range size {range_size}"
            )));
        }
        Ok(Encoder { range_size, map })
    }

    pub(crate) fn new_unchecked(map: Vec<usize>, range_size: usize) -> Self {
        debug_assert!(map.iter().all(|&v| v < range_size));
        Encoder { range_size, map }
    }

    pub fn identity(n: usize) -> Self {
        Encoder {
            range_size: n,
            map: (0..n).collect(),
        }
    }

    pub fn constant(n: usize) -> Self {
        Encoder {
            range_size: 1,
            map: vec![0; n],
        }
    }

    pub fn domain_size(&self) -> usize {
        self.map.len()
    }

    pub fn range_size(&self) -> usize {
        self.range_size
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    /// Number of labels actually used.
    pub fn num_blocks(&self) -> usize {
        let mut seen = vec![false; self.range_size];
        self.map.iter().for_each(|&v| seen[v] = true);
        seen.into_iter().filter(|&b| b).count()
    }

    /// Relabels blocks in order of first appearance (restricted growth string).
    pub fn canonical(&self) -> Encoder {
        let mut relabel = vec![usize::MAX; self.range_size];
        let mut next = 0;
        let map = self
            .map
            .iter()
            .map(|&v| {
                if relabel[v] == usize::MAX {
                    relabel[v] = next;
                    next += 1;
                }
                relabel[v]
            })
            .collect();
        Encoder {
            range_size: self.range_size,
            map,
        }
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Encoder) -> bool {
        if self.domain_size() != coarser.domain_size() {
            return false;
        }
        let mut image = vec![usize::MAX; self.range_size];
        self.map.iter().zip(&coarser.map).all(|(&f, &c)| {
            if image[f] == usize::MAX {
                image[f] = c;
            }
            image[f] == c
        })
    }
}

/// A total decision rule `ψ : M × L → X`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Estimator {
    m_size: usize,
    l_size: usize,
    x_size: usize,
    table: Vec<usize>,
}

impl Estimator {
    /// `table` is row-major over `(m, l)`.
    pub fn new(m_size: usize, l_size: usize, x_size: usize, table: Vec<usize>) -> Result<Self> {
        if m_size == 0 || l_size == 0 || x_size == 0 {
            return Err(Error::InvalidEstimator("sizes must be positive".into()));
        }
        if table.len() != m_size * l_size {
            return Err(Error::InvalidEstimator(format!(
                "table has {} entries, expected {}",
                table.len(),
                m_size * l_size
            )));
        }
        if let Some(&bad) = table.iter().find(|&&x| x >= x_size) {
            return Err(Error::InvalidEstimator(format!(
                "estimate {bad} is not a valid X index (|X| = {x_size})"
            )));
        }
        Ok(Estimator {
            m_size,
            l_size,
            x_size,
            table,
        })
    }

    /// Case-2 estimator `ψ : L → X`, stored with `|M| = 1`.
    pub fn from_side_info(x_size: usize, guesses: Vec<usize>) -> Result<Self> {
        Self::new(1, guesses.len(), x_size, guesses)
    }

    /// Case-3 estimator: a single guess.
    pub fn blind(x_size: usize, guess: usize) -> Result<Self> {
        Self::new(1, 1, x_size, vec![guess])
    }

    pub fn m_size(&self) -> usize {
        self.m_size
    }

    pub fn l_size(&self) -> usize {
        self.l_size
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    #[inline]
    pub fn estimate(&self, m: usize, l: usize) -> usize {
        self.table[m * self.l_size + l]
    }
}

/// Correct and error probabilities of one `(φ, φ, ψ)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub p_correct: f64,
    pub p_error: f64,
}

impl EvalResult {
    pub fn from_correct(p_correct: f64) -> Self {
        let p_correct = p_correct.clamp(0.0, 1.0);
        EvalResult {
            p_correct,
            p_error: 1.0 - p_correct,
        }
    }
}

fn check_domain(what: &str, enc: &Encoder, expected: usize) -> Result<()> {
    if enc.domain_size() != expected {
        return Err(Error::DimensionMismatch(format!(
            "{what} has domain size {}, alphabet has {expected}",
            enc.domain_size()
        )));
    }
    Ok(())
}

/// Joint of `(X, S)` with `S = φ(Y)`: `p(x, s) = Σ_{y: φ(y) = s} p(x, y)`.
pub fn induced_joint_xs(j: &JointDist, phi_y: &Encoder) -> Result<JointDist> {
    check_domain("phi_y", phi_y, j.y_size())?;
    let l = phi_y.range_size();
    let p = induced_table(j, phi_y);
    Ok(JointDist::from_parts_unchecked(
        j.x_labels().to_vec(),
        default_labels("s", l),
        j.x_size(),
        l,
        p,
    ))
}

/// Row-major `|X| × |L|` table of the induced joint, without validation.
pub(crate) fn induced_table(j: &JointDist, phi_y: &Encoder) -> Vec<f64> {
    let l = phi_y.range_size();
    let mut p = vec![0.0; j.x_size() * l];
    for x in 0..j.x_size() {
        for (y, &v) in j.row(x).iter().enumerate() {
            p[x * l + phi_y.apply(y)] += v;
        }
    }
    p
}

/// Exact `P_c = Σ_{x,y} p(x,y) 1[ψ(φ(x), φ(y)) = x]`.
pub fn eval_case1(
    j: &JointDist,
    phi_x: &Encoder,
    phi_y: &Encoder,
    psi: &Estimator,
) -> Result<EvalResult> {
    check_domain("phi_x", phi_x, j.x_size())?;
    check_domain("phi_y", phi_y, j.y_size())?;
    if psi.m_size() != phi_x.range_size() || psi.l_size() != phi_y.range_size() {
        return Err(Error::DimensionMismatch(format!(
            "estimator is {}x{}, encoders have ranges {}x{}",
            psi.m_size(),
            psi.l_size(),
            phi_x.range_size(),
            phi_y.range_size()
        )));
    }
    if psi.x_size() != j.x_size() {
        return Err(Error::DimensionMismatch(format!(
            "estimator targets |X| = {}, distribution has {}",
            psi.x_size(),
            j.x_size()
        )));
    }
    let mut pc = 0.0;
    for x in 0..j.x_size() {
        let m = phi_x.apply(x);
        for (y, &v) in j.row(x).iter().enumerate() {
            if psi.estimate(m, phi_y.apply(y)) == x {
                pc += v;
            }
        }
    }
    Ok(EvalResult::from_correct(pc))
}

/// Case-2 evaluation: `ψ : L → X` applied to `φ(Y)`.
pub fn eval_case2(j: &JointDist, phi_y: &Encoder, psi: &Estimator) -> Result<EvalResult> {
    eval_case1(j, &Encoder::constant(j.x_size()), phi_y, psi)
}

fn argmax_first(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    values.enumerate().fold(None, |best, (i, v)| match best {
        Some((_, bv)) if v <= bv => best,
        _ => Some((i, v)),
    })
}

/// MAP estimator from the `X × S` joint: `ψ(s) = argmax_x p(x, s)`.
///
/// Zero-mass `s` are assigned the argmax of `p_X`.
pub fn map_estimator_case2(xs: &JointDist) -> (Estimator, EvalResult) {
    let px = xs.marginal_x();
    let (fallback, _) = argmax_first(px.iter().copied()).expect("non-empty alphabet");
    let mut guesses = Vec::with_capacity(xs.y_size());
    let mut pc = 0.0;
    for s in 0..xs.y_size() {
        let (x, v) = argmax_first((0..xs.x_size()).map(|x| xs.get(x, s))).expect("non-empty");
        if v > 0.0 {
            guesses.push(x);
            pc += v;
        } else {
            guesses.push(fallback);
        }
    }
    let psi = Estimator {
        m_size: 1,
        l_size: xs.y_size(),
        x_size: xs.x_size(),
        table: guesses,
    };
    (psi, EvalResult::from_correct(pc))
}

/// MAP estimator for fixed `(φ, φ)`: within each cell `{x : φ(x) = m}`,
/// guess the `x` maximizing `p_XS(x, l)`. Empty cells guess index 0.
pub fn map_estimator_case1(
    j: &JointDist,
    phi_x: &Encoder,
    phi_y: &Encoder,
) -> Result<(Estimator, EvalResult)> {
    check_domain("phi_x", phi_x, j.x_size())?;
    check_domain("phi_y", phi_y, j.y_size())?;
    let (m_size, l_size) = (phi_x.range_size(), phi_y.range_size());
    let xs = induced_table(j, phi_y);
    let mut best: Vec<Option<(usize, f64)>> = vec![None; m_size * l_size];
    for x in 0..j.x_size() {
        let m = phi_x.apply(x);
        for l in 0..l_size {
            let v = xs[x * l_size + l];
            let slot = &mut best[m * l_size + l];
            match slot {
                Some((_, bv)) if v <= *bv => {}
                _ => *slot = Some((x, v)),
            }
        }
    }
    let pc = best.iter().flatten().map(|&(_, v)| v).sum();
    let table = best.iter().map(|b| b.map_or(0, |(x, _)| x)).collect();
    let psi = Estimator {
        m_size,
        l_size,
        x_size: j.x_size(),
        table,
    };
    Ok((psi, EvalResult::from_correct(pc)))
}

/// Optimal Case-2 value for a fixed `φ`, computed without building an
/// estimator: `Σ_s max_x p_XS(x, s)`.
pub fn case2_value(j: &JointDist, phi_y: &Encoder) -> f64 {
    let l = phi_y.range_size();
    let xs = induced_table(j, phi_y);
    (0..l)
        .map(|s| (0..j.x_size()).map(|x| xs[x * l + s]).fold(0.0, f64::max))
        .sum()
}
