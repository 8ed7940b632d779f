//! Seeded random instances.
//!
//! A symmetric Dirichlet sample is drawn as independent `Gamma(α, 1)`
//! variates, normalized, from a `ChaCha8Rng` seeded with the given `u64`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::instance::InstanceFile;
use super::{HarnessError, HarnessResult};
use crate::dist::default_labels;

/// Name recorded in reports so other implementations can reproduce the draws.
pub const GENERATOR: &str = "chacha8-seed_from_u64/gamma-normalized-dirichlet";

fn check(x_size: usize, y_size: usize, concentration: f64) -> HarnessResult<()> {
    if x_size == 0 || y_size == 0 {
        return Err(HarnessError::Validation("sizes must be at least 1".into()));
    }
    if !(concentration.is_finite() && concentration > 0.0) {
        return Err(HarnessError::Validation(format!(
            "concentration must be positive, got {concentration}"
        )));
    }
    Ok(())
}

/// One draw from a symmetric Dirichlet of dimension `n`.
pub fn dirichlet<R: Rng>(rng: &mut R, n: usize, concentration: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive shape");
    // Very small concentrations can underflow every variate to zero.
    for _ in 0..64 {
        let draws: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && total.is_finite() {
            return draws.into_iter().map(|v| v / total).collect();
        }
    }
    let mut point = vec![0.0; n];
    point[rng.random_range(0..n)] = 1.0;
    point
}

/// Joint table drawn from a symmetric Dirichlet over all `x_size · y_size` cells.
pub fn gen_random(x_size: usize, y_size: usize, concentration: f64, seed: u64) -> HarnessResult<InstanceFile> {
    check(x_size, y_size, concentration)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flat = dirichlet(&mut rng, x_size * y_size, concentration);
    let pxy = flat.chunks(y_size).map(<[f64]>::to_vec).collect();
    Ok(InstanceFile {
        name: Some(format!("dirichlet-{x_size}x{y_size}-a{concentration}-s{seed}")),
        seed: Some(seed),
        x_labels: default_labels("x", x_size),
        y_labels: default_labels("y", y_size),
        pxy,
        phi_y: None,
        l_size: None,
        m_size: None,
    })
}

/// Product table `p_X ⊗ p_Y` with independent Dirichlet marginals.
pub fn gen_product(x_size: usize, y_size: usize, concentration: f64, seed: u64) -> HarnessResult<InstanceFile> {
    check(x_size, y_size, concentration)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px = dirichlet(&mut rng, x_size, concentration);
    let py = dirichlet(&mut rng, y_size, concentration);
    let pxy = px.iter().map(|&a| py.iter().map(|&b| a * b).collect()).collect();
    Ok(InstanceFile {
        name: Some(format!("product-{x_size}x{y_size}-a{concentration}-s{seed}")),
        seed: Some(seed),
        x_labels: default_labels("x", x_size),
        y_labels: default_labels("y", y_size),
        pxy,
        phi_y: None,
        l_size: None,
        m_size: None,
    })
}
