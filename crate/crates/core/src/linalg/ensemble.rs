//! Seeded random design matrices.
//!
//! All ensembles draw from a ChaCha8 stream seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`, row by row. Gaussian variates come from
//! `rand_distr::StandardNormal` in `f64` and are then cast to the scalar type.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::matrix::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EnsembleKind {
    Gaussian,
    Rademacher,
    /// Equicorrelated Gaussian rows: covariance `(1−ρ)·I + ρ·𝟙𝟙ᵀ`.
    Spiked,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Gaussian => "gaussian",
            EnsembleKind::Rademacher => "rademacher",
            EnsembleKind::Spiked => "spiked",
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Self::Gaussian),
            "rademacher" => Ok(Self::Rademacher),
            "spiked" => Ok(Self::Spiked),
            other => Err(Error::Input(format!("unknown ensemble '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub d: usize,
    /// Pairwise column correlation, spiked ensemble only.
    pub rho: f64,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n: usize, d: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            d,
            rho: 0.0,
            seed,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::Input("ensemble dimensions must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::Input(format!("rho = {} outside [0, 1)", self.rho)));
        }
        Ok(())
    }
}

pub fn sample_ensemble<T: Scalar>(spec: &EnsembleSpec) -> Result<DenseMatrix<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = Vec::with_capacity(spec.n * spec.d);
    match spec.kind {
        EnsembleKind::Gaussian => {
            for _ in 0..spec.n * spec.d {
                let z: f64 = rng.sample(StandardNormal);
                data.push(T::of(z));
            }
        }
        EnsembleKind::Rademacher => {
            for _ in 0..spec.n * spec.d {
                data.push(if rng.random::<bool>() { T::one() } else { -T::one() });
            }
        }
        EnsembleKind::Spiked => {
            let own = (1.0 - spec.rho).sqrt();
            let shared = spec.rho.sqrt();
            for _ in 0..spec.n {
                let w: f64 = rng.sample(StandardNormal);
                for _ in 0..spec.d {
                    let z: f64 = rng.sample(StandardNormal);
                    data.push(T::of(own * z + shared * w));
                }
            }
        }
    }
    DenseMatrix::new(spec.n, spec.d, data)
}
