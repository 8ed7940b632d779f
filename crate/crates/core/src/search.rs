//! Optimization over encoders.
//!
//! The Case-1 and Case-2 objectives depend on an encoder only through the
//! partition of its domain into fibers, so the exact searches enumerate one
//! restricted growth string per set partition instead of all `|L|^|Y|` maps.
//! Enumeration is lexicographic; ties keep the first (smallest) candidate, and
//! the parallel reduction reproduces the serial answer bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::JointDist;
use crate::encoders::{
    induced_table, map_estimator_case1, map_estimator_case2, Encoder, Estimator,
};
use crate::error::{Error, Result};
use crate::encoders::induced_joint_xs;

/// Default cap on the number of candidates an exact search may evaluate.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

const BATCH: usize = 4096;

/// Iterator over restricted growth strings of length `n` using at most `k`
/// distinct labels, in lexicographic order.
#[derive(Debug, Clone)]
pub struct Partitions {
    k: usize,
    current: Vec<usize>,
    // prefix_max[i] = max(current[..i]), with prefix_max[0] unused
    prefix_max: Vec<usize>,
    done: bool,
}

/// All set partitions of `{0..n}` into at most `k` blocks, as encoders with
/// range size `k`.
pub fn partitions_up_to_k(n: usize, k: usize) -> Partitions {
    assert!(n >= 1 && k >= 1, "partitions_up_to_k needs n >= 1 and k >= 1");
    Partitions {
        k,
        current: vec![0; n],
        prefix_max: vec![0; n],
        done: false,
    }
}

impl Partitions {
    fn advance(&mut self) {
        let n = self.current.len();
        for i in (1..n).rev() {
            let limit = (self.prefix_max[i] + 1).min(self.k - 1);
            if self.current[i] < limit {
                self.current[i] += 1;
                let m = self.prefix_max[i].max(self.current[i]);
                for j in i + 1..n {
                    self.current[j] = 0;
                    self.prefix_max[j] = m;
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for Partitions {
    type Item = Encoder;

    fn next(&mut self) -> Option<Encoder> {
        if self.done {
            return None;
        }
        let out = Encoder::new_unchecked(self.current.clone(), self.k);
        self.advance();
        Some(out)
    }
}

/// Stirling number of the second kind, saturating at `u128::MAX`.
pub fn stirling2(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    // row[j] = S(i, j)
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = (j as u128)
                .saturating_mul(row[j])
                .saturating_add(row[j - 1]);
        }
        row[0] = 0;
    }
    row[k]
}

/// `Σ_{j=1..min(n,k)} S(n, j)`.
pub fn partition_count(n: usize, k: usize) -> u128 {
    (1..=n.min(k)).fold(0u128, |acc, j| acc.saturating_add(stirling2(n, j)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    LocalSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_value: f64,
    pub best_phi_x: Option<Encoder>,
    pub best_phi_y: Option<Encoder>,
    pub best_psi: Estimator,
    pub method: Method,
    pub candidates_evaluated: u64,
    pub restarts: u32,
}

/// Larger value wins; equal values keep the smaller index.
fn pick(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

fn check_budget(needed: u128, budget: u64) -> Result<()> {
    if needed > budget as u128 {
        Err(Error::BudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}

fn check_size(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(Error::InvalidParameter(format!("{name} must be positive")))
    } else {
        Ok(())
    }
}

/// `Σ_s max_x` of a row-major `|X| × l` table.
fn column_max_sum(table: &[f64], x_size: usize, l: usize) -> f64 {
    (0..l)
        .map(|s| (0..x_size).map(|x| table[x * l + s]).fold(0.0, f64::max))
        .sum()
}

/// Exact `P_c,max^(2)` over all `φ : Y → L` with `|L| = l_size`.
pub fn exact_case2(j: &JointDist, l_size: usize, budget: u64) -> Result<SearchResult> {
    check_size("l_size", l_size)?;
    let needed = partition_count(j.y_size(), l_size);
    check_budget(needed, budget)?;

    let mut parts = partitions_up_to_k(j.y_size(), l_size);
    let mut best: Option<(f64, usize)> = None;
    let mut best_enc: Option<Encoder> = None;
    let mut offset = 0usize;
    loop {
        let batch: Vec<Encoder> = parts.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            break;
        }
        let local = batch
            .par_iter()
            .enumerate()
            .map(|(i, enc)| {
                let t = induced_table(j, enc);
                (column_max_sum(&t, j.x_size(), l_size), i)
            })
            .reduce(|| (f64::NEG_INFINITY, usize::MAX), pick);
        let global = (local.0, local.1 + offset);
        if best.is_none_or(|b| pick(b, global) == global) {
            best = Some(global);
            best_enc = Some(batch[local.1].clone());
        }
        offset += batch.len();
    }
    let phi_y = best_enc.expect("at least one partition");
    let (psi, eval) = map_estimator_case2(&induced_joint_xs(j, &phi_y)?);
    Ok(SearchResult {
        best_value: eval.p_correct,
        best_phi_x: None,
        best_phi_y: Some(phi_y),
        best_psi: psi,
        method: Method::Exact,
        candidates_evaluated: offset as u64,
        restarts: 0,
    })
}

/// Exact `P_c,max^(1)` over all `(φ, φ)` with `|M| = m_size`, `|L| = l_size`.
///
/// Candidates are ordered with `φ` outer and `φ` inner.
pub fn exact_case1(j: &JointDist, m_size: usize, l_size: usize, budget: u64) -> Result<SearchResult> {
    check_size("m_size", m_size)?;
    check_size("l_size", l_size)?;
    let cx = partition_count(j.x_size(), m_size);
    let cy = partition_count(j.y_size(), l_size);
    check_budget(cx.saturating_mul(cy), budget)?;

    let x_size = j.x_size();
    let phi_xs: Vec<Encoder> = partitions_up_to_k(x_size, m_size).collect();
    let phi_ys: Vec<Encoder> = partitions_up_to_k(j.y_size(), l_size).collect();
    let tables: Vec<Vec<f64>> = phi_ys.iter().map(|e| induced_table(j, e)).collect();

    let value = |phi_x: &Encoder, t: &[f64]| -> f64 {
        let mut cell = vec![0.0f64; m_size * l_size];
        for x in 0..x_size {
            let m = phi_x.apply(x);
            for l in 0..l_size {
                let v = t[x * l_size + l];
                if v > cell[m * l_size + l] {
                    cell[m * l_size + l] = v;
                }
            }
        }
        cell.iter().sum()
    };

    let ny = phi_ys.len();
    let (_, idx) = phi_xs
        .par_iter()
        .enumerate()
        .map(|(ix, phi_x)| {
            tables
                .iter()
                .enumerate()
                .map(|(iy, t)| (value(phi_x, t), ix * ny + iy))
                .fold((f64::NEG_INFINITY, usize::MAX), pick)
        })
        .reduce(|| (f64::NEG_INFINITY, usize::MAX), pick);

    let phi_x = phi_xs[idx / ny].clone();
    let phi_y = phi_ys[idx % ny].clone();
    let (psi, eval) = map_estimator_case1(j, &phi_x, &phi_y)?;
    Ok(SearchResult {
        best_value: eval.p_correct,
        best_phi_x: Some(phi_x),
        best_phi_y: Some(phi_y),
        best_psi: psi,
        method: Method::Exact,
        candidates_evaluated: (phi_xs.len() * ny) as u64,
        restarts: 0,
    })
}

/// `P_c,max^(3)`: the best blind guess.
pub fn exact_case3(j: &JointDist) -> SearchResult {
    let (psi, eval) = map_estimator_case1(j, &Encoder::constant(j.x_size()), &Encoder::constant(j.y_size()))
        .expect("constant encoders always fit");
    SearchResult {
        best_value: eval.p_correct,
        best_phi_x: None,
        best_phi_y: None,
        best_psi: psi,
        method: Method::Exact,
        candidates_evaluated: 1,
        restarts: 0,
    }
}

/// Hill-climbing state: block labels per `y` and the `|X| × l` cell sums.
struct Climber<'a> {
    j: &'a JointDist,
    l: usize,
    labels: Vec<usize>,
    cells: Vec<f64>,
    block_sizes: Vec<usize>,
}

impl<'a> Climber<'a> {
    fn new(j: &'a JointDist, l: usize, labels: Vec<usize>) -> Self {
        let mut cells = vec![0.0; j.x_size() * l];
        let mut block_sizes = vec![0; l];
        for (y, &b) in labels.iter().enumerate() {
            block_sizes[b] += 1;
            for x in 0..j.x_size() {
                cells[x * l + b] += j.get(x, y);
            }
        }
        Climber {
            j,
            l,
            labels,
            cells,
            block_sizes,
        }
    }

    fn block_max(&self, b: usize) -> f64 {
        (0..self.j.x_size())
            .map(|x| self.cells[x * self.l + b])
            .fold(0.0, f64::max)
    }

    /// Objective change when `y` moves to block `to`.
    fn delta(&self, y: usize, to: usize) -> f64 {
        let from = self.labels[y];
        let (mut new_from, mut new_to) = (0.0f64, 0.0f64);
        for x in 0..self.j.x_size() {
            let v = self.j.get(x, y);
            new_from = new_from.max(self.cells[x * self.l + from] - v);
            new_to = new_to.max(self.cells[x * self.l + to] + v);
        }
        new_from + new_to - self.block_max(from) - self.block_max(to)
    }

    fn apply(&mut self, y: usize, to: usize) {
        let from = self.labels[y];
        for x in 0..self.j.x_size() {
            let v = self.j.get(x, y);
            self.cells[x * self.l + from] -= v;
            self.cells[x * self.l + to] += v;
        }
        self.block_sizes[from] -= 1;
        self.block_sizes[to] += 1;
        self.labels[y] = to;
    }

    /// Runs best-improvement moves to a local optimum; returns the number of
    /// moves evaluated.
    fn climb(&mut self) -> u64 {
        let mut evaluated = 0u64;
        loop {
            let first_empty = self.block_sizes.iter().position(|&c| c == 0);
            let mut best: Option<(f64, usize, usize)> = None;
            for y in 0..self.labels.len() {
                let from = self.labels[y];
                for to in 0..self.l {
                    if to == from || (self.block_sizes[to] == 0 && Some(to) != first_empty) {
                        continue;
                    }
                    // Moving a singleton into an empty block is a relabeling.
                    if self.block_sizes[to] == 0 && self.block_sizes[from] == 1 {
                        continue;
                    }
                    evaluated += 1;
                    let d = self.delta(y, to);
                    if d > 1e-15 && best.is_none_or(|(bd, _, _)| d > bd) {
                        best = Some((d, y, to));
                    }
                }
            }
            match best {
                Some((_, y, to)) => self.apply(y, to),
                None => return evaluated,
            }
        }
    }
}

/// Multi-restart best-improvement hill climbing for the Case-2 objective.
///
/// Each start draws every label uniformly from `{0..l_size}` with a
/// ChaCha8 generator seeded by `seed`, then canonicalizes. `restarts = 0` is
/// treated as a single start.
pub fn local_search_case2(j: &JointDist, l_size: usize, restarts: u32, seed: u64) -> Result<SearchResult> {
    check_size("l_size", l_size)?;
    let starts = restarts.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evaluated = 0u64;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..starts {
        let raw: Vec<usize> = (0..j.y_size()).map(|_| rng.random_range(0..l_size)).collect();
        let start = Encoder::new_unchecked(raw, l_size).canonical();
        let mut climber = Climber::new(j, l_size, start.map().to_vec());
        evaluated += climber.climb();
        let value = column_max_sum(&climber.cells, j.x_size(), l_size);
        if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
            best = Some((value, climber.labels));
        }
    }
    let (_, labels) = best.expect("at least one start");
    let phi_y = Encoder::new_unchecked(labels, l_size).canonical();
    let (psi, eval) = map_estimator_case2(&induced_joint_xs(j, &phi_y)?);
    Ok(SearchResult {
        best_value: eval.p_correct,
        best_phi_x: None,
        best_phi_y: Some(phi_y),
        best_psi: psi,
        method: Method::LocalSearch,
        candidates_evaluated: evaluated,
        restarts: starts,
    })
}

/// The three case optima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseOptima {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p_max: f64,
    /// `p1 >= p2 >= p3` and `|p3 - p_max| <= 1e-12`, all within 1e-12.
    pub ordered: bool,
}

pub const ORDERING_TOL: f64 = 1e-12;

/// Computes `(P¹, P², P³)` exactly and checks `P¹ ≥ P² ≥ P³ = p_max`.
pub fn ordering_check(j: &JointDist, m_size: usize, l_size: usize, budget: u64) -> Result<CaseOptima> {
    let p1 = exact_case1(j, m_size, l_size, budget)?.best_value;
    let p2 = exact_case2(j, l_size, budget)?.best_value;
    let p3 = exact_case3(j).best_value;
    let p_max = j.p_max();
    let ordered = p1 + ORDERING_TOL >= p2
        && p2 + ORDERING_TOL >= p3
        && (p3 - p_max).abs() <= ORDERING_TOL;
    Ok(CaseOptima {
        p1,
        p2,
        p3,
        p_max,
        ordered,
    })
}
