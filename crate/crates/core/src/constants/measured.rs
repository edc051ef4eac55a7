use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::vector;
use crate::problem::{CompositeProblem, PolyhedralSystem};
use crate::scalar::Scalar;

use super::region::Region;

/// How distances to the optimal set are measured.
#[derive(Clone, Debug)]
pub enum OptimalSet<T> {
    /// Unique minimizer.
    Singleton(Vec<T>),
    /// Polyhedral optimal set; distances by Dykstra projection.
    Polyhedron(PolyhedralSystem<T>),
}

impl<T: Scalar> OptimalSet<T> {
    pub fn distance(&self, x: &[T]) -> Result<T> {
        match self {
            Self::Singleton(p) => Ok(vector::dist2(x, p)),
            Self::Polyhedron(sys) => sys.distance(x),
        }
    }
}

/// Empirical restricted PL constant:
/// `min D_g(x, L) / (2(F(x) − F*))` over samples in `dom F` with
/// `F(x) > F* + 1e-10`.
pub fn measured_pl<T: Scalar>(
    p: &CompositeProblem<T>,
    region: &Region<T>,
    n_samples: usize,
    seed: u64,
    f_star: T,
) -> Result<T> {
    let l = p.smoothness_constant()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = T::infinity();
    let floor = T::of(1e-10);
    for _ in 0..n_samples {
        let x = region.sample(&mut rng);
        let f = p.objective(&x)?;
        if !f.is_finite() || f <= f_star + floor {
            continue;
        }
        let dg = p.generalized_gradient_size(&x, l)?;
        best = best.min(dg / (T::of(2.0) * (f - f_star)));
    }
    if best.is_infinite() {
        return Err(Error::InsufficientSamples(
            "no sample above the optimal value inside the domain".into(),
        ));
    }
    Ok(best)
}

/// Empirical restricted EB constant:
/// `max dist(x, X*) / ‖G_{1/L}(x)‖` over samples in `dom F` with
/// `‖G‖ > 1e-12`.
pub fn measured_eb<T: Scalar>(
    p: &CompositeProblem<T>,
    region: &Region<T>,
    n_samples: usize,
    seed: u64,
    optimal: &OptimalSet<T>,
) -> Result<T> {
    let l = p.smoothness_constant()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = T::neg_infinity();
    let floor = T::of(1e-12);
    for _ in 0..n_samples {
        let x = region.sample(&mut rng);
        if !p.reg.value(&x)?.is_finite() {
            continue;
        }
        let g = vector::norm2(&p.gradient_mapping(&x, T::one() / l)?);
        if g <= floor {
            continue;
        }
        best = best.max(optimal.distance(&x)? / g);
    }
    if best == T::neg_infinity() {
        return Err(Error::InsufficientSamples(
            "no non-stationary sample inside the domain".into(),
        ));
    }
    Ok(best)
}
