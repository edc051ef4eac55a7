//! Seeded synthetic instances: planted sparse regression and 2-D blobs.

use geomopt_core::analytics::IndexSet;
use geomopt_core::linalg::{sample_ensemble, vector};
use geomopt_core::{EnsembleKind, EnsembleSpec, Matrix, Problem};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::EtaPolicy;
use crate::error::CliResult;

/// Seed of trial `t` for base seed `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add(1000u64.wrapping_mul(trial as u64))
}

// The design matrix consumes the ChaCha stream for `seed`; everything else
// draws from a decorrelated stream.
fn aux_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15)
}

#[derive(Clone, Debug)]
pub struct Planted {
    pub problem: Problem,
    pub beta_star: Vec<f64>,
    pub support: IndexSet,
    pub noise: Vec<f64>,
    pub eta: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct PlantedSpec {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub ensemble: EnsembleKind,
    pub rho: f64,
    pub sigma: f64,
    pub eta_policy: EtaPolicy,
    pub normalized: bool,
    pub seed: u64,
}

/// `y = Aβ* + ε` with `s` entries of `β*` equal to `±1` and `ε ~ N(0, σ²I)`.
pub fn planted_lasso(spec: &PlantedSpec) -> CliResult<Planted> {
    let ens = EnsembleSpec::new(spec.ensemble, spec.n, spec.d, spec.seed).with_rho(spec.rho);
    let a: Matrix = sample_ensemble(&ens)?;
    let mut rng = aux_rng(spec.seed);
    let mut beta_star = vec![0.0; spec.d];
    let mut support = IndexSet::new();
    for i in index::sample(&mut rng, spec.d, spec.s) {
        beta_star[i] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        support.insert(i);
    }
    let noise: Vec<f64> = (0..spec.n)
        .map(|_| spec.sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let y = vector::add(&a.mul_vec(&beta_star), &noise);
    let eta = match spec.eta_policy {
        EtaPolicy::Fixed(v) => v,
        EtaPolicy::DualCondition(m) => {
            // ∇f(β*) = −Aᵀε (divided by n for the normalized loss)
            let mut g = vector::norm_inf(&a.tr_mul_vec(&noise));
            if spec.normalized {
                g /= spec.n as f64;
            }
            m * g
        }
    };
    let problem = Problem::lasso(a, y, eta, spec.normalized)?;
    Ok(Planted {
        problem,
        beta_star,
        support,
        noise,
        eta,
    })
}

/// Two Gaussian blobs in the plane centred at `±(1, 1)`, alternating labels.
pub fn blobs(n: usize, seed: u64) -> CliResult<(Matrix, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { 1.0 } else { -1.0 };
        let x: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        rows.push([label + x, label + z]);
        labels.push(label);
    }
    Ok((Matrix::from_rows(&rows)?, labels))
}
