#![allow(dead_code)]

use guessbound::harness::generate::{gen_product, gen_random};
use guessbound::{Encoder, Estimator, JointDist};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded Dirichlet instances with `|X| ∈ [xmin, xmax]`, `|Y| ∈ [1, ymax]`.
pub fn dirichlet_instances(n: usize, seed: u64, xmin: usize, xmax: usize, ymax: usize) -> Vec<JointDist> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = rng.random_range(xmin..=xmax);
            let y = rng.random_range(1..=ymax);
            let alpha = [0.3, 1.0, 3.0][rng.random_range(0..3)];
            gen_random(x, y, alpha, rng.random()).unwrap().joint().unwrap()
        })
        .collect()
}

pub fn product_instances(n: usize, seed: u64, xmax: usize, ymax: usize) -> Vec<JointDist> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = rng.random_range(2..=xmax);
            let y = rng.random_range(1..=ymax);
            gen_product(x, y, 1.0, rng.random()).unwrap().joint().unwrap()
        })
        .collect()
}

/// Every map `{0..n} → {0..k}`, as an encoder with range `k`.
pub fn all_maps(n: usize, k: usize) -> Vec<Encoder> {
    let total = k.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let map = (0..n)
                .map(|_| {
                    let d = code % k;
                    code /= k;
                    d
                })
                .collect();
            Encoder::new(map, k).unwrap()
        })
        .collect()
}

/// Every estimator `M × L → X`.
pub fn all_estimators(m: usize, l: usize, x: usize) -> Vec<Estimator> {
    all_maps(m * l, x)
        .into_iter()
        .map(|e| Estimator::new(m, l, x, e.map().to_vec()).unwrap())
        .collect()
}

/// `Σ p(x,y) log2(p(x,y) / (p(x) p(y)))` straight from the table.
pub fn mi_oracle(rows: &[Vec<f64>]) -> f64 {
    let px: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
    let py: Vec<f64> = (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c]).sum()).collect();
    let mut acc = 0.0;
    for (x, r) in rows.iter().enumerate() {
        for (y, &p) in r.iter().enumerate() {
            if p > 0.0 {
                acc += p * (p / (px[x] * py[y])).log2();
            }
        }
    }
    acc
}

/// Columns of `rows` merged according to `phi`.
pub fn merge_columns(rows: &[Vec<f64>], phi: &Encoder) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            let mut out = vec![0.0; phi.range_size()];
            for (y, &p) in r.iter().enumerate() {
                out[phi.apply(y)] += p;
            }
            out
        })
        .collect()
}
