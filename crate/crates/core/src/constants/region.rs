use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::linalg::vector;
use crate::scalar::Scalar;
use crate::solver::IndexSet;

/// Rejection attempts for the cone sampler before it rescales instead.
const CONE_TRIES: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum SamplerSpec<T> {
    /// Uniform on `{x : |x_i − c_i| ≤ half_width}`.
    Box { center: Vec<T>, half_width: T },
    /// Uniform on `{x : ‖x − c‖ ≤ radius}`.
    Ball { center: Vec<T>, radius: T },
}

impl<T: Scalar> SamplerSpec<T> {
    pub fn center(&self) -> &[T] {
        match self {
            Self::Box { center, .. } | Self::Ball { center, .. } => center,
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        match self {
            Self::Box { center, half_width } => x
                .iter()
                .zip(center)
                .all(|(&a, &c)| (a - c).abs() <= *half_width),
            Self::Ball { center, radius } => vector::dist2(x, center) <= *radius,
        }
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> Vec<T> {
        match self {
            Self::Box { center, half_width } => center
                .iter()
                .map(|&c| c + *half_width * T::of(rng.random_range(-1.0..=1.0)))
                .collect(),
            Self::Ball { center, radius } => {
                let d = center.len();
                let z = gaussian_vec::<T, _>(rng, d);
                let nz = vector::norm2(&z);
                let u: f64 = rng.random();
                let r = *radius * T::of(u.powf(1.0 / d as f64));
                center
                    .iter()
                    .zip(&z)
                    .map(|(&c, &zi)| if nz > T::zero() { c + r * zi / nz } else { c })
                    .collect()
            }
        }
    }
}

/// Subset `K` of the domain over which a constant is taken.
#[derive(Clone, Debug, PartialEq)]
pub enum Restriction<T> {
    Global,
    /// Points with zeros off `support`.
    SupportFace { support: IndexSet },
    /// `‖Δ_{Sᶜ}‖₁ ≤ factor·‖Δ_S‖₁ + tolerance_delta`, `Δ` measured from the
    /// region centre.
    Cone {
        support: IndexSet,
        factor: T,
        tolerance_delta: T,
    },
    SampledRegion(SamplerSpec<T>),
}

impl<T: Scalar> Restriction<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Global => "global",
            Self::SupportFace { .. } => "support_face",
            Self::Cone { .. } => "cone",
            Self::SampledRegion(_) => "sampled_region",
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let check_support = |s: &IndexSet| match s.iter().next_back() {
            Some(&i) if i >= dim => Err(Error::Input(format!(
                "support index {i} out of range for dimension {dim}"
            ))),
            _ => Ok(()),
        };
        match self {
            Self::Global => Ok(()),
            Self::SupportFace { support } => check_support(support),
            Self::Cone {
                support,
                factor,
                tolerance_delta,
            } => {
                if *factor < T::zero() || *tolerance_delta < T::zero() {
                    return Err(Error::Input("cone parameters must be nonnegative".into()));
                }
                check_support(support)
            }
            Self::SampledRegion(s) => check_dim(dim, s.center().len()),
        }
    }
}

pub(crate) fn gaussian_vec<T: Scalar, R: RngCore>(rng: &mut R, n: usize) -> Vec<T> {
    (0..n).map(|_| T::of(rng.sample::<f64, _>(StandardNormal))).collect()
}

/// A restriction anchored at a centre point, ready to be sampled.
///
/// Gaussian perturbations have per-coordinate standard deviation
/// `scale/√d`, so their norm is about `scale`. The default scale is three
/// times the norm of the centre (1 when the centre is the origin).
#[derive(Clone, Debug, PartialEq)]
pub struct Region<T> {
    pub restriction: Restriction<T>,
    pub center: Vec<T>,
    pub scale: T,
}

impl<T: Scalar> Region<T> {
    pub fn new(restriction: Restriction<T>, center: Vec<T>) -> Result<Self> {
        restriction.validate(center.len())?;
        let n = vector::norm2(&center);
        let scale = if n > T::zero() { T::of(3.0) * n } else { T::one() };
        Ok(Self {
            restriction,
            center,
            scale,
        })
    }

    pub fn with_scale(mut self, scale: T) -> Result<Self> {
        if !(scale > T::zero()) {
            return Err(Error::Input(format!("region scale must be positive, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn perturbation<R: RngCore>(&self, rng: &mut R) -> Vec<T> {
        let sigma = self.scale / T::of_usize(self.dim()).sqrt();
        vector::scale(&gaussian_vec(rng, self.dim()), sigma)
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> Vec<T> {
        match &self.restriction {
            Restriction::Global => vector::add(&self.center, &self.perturbation(rng)),
            Restriction::SupportFace { support } => {
                let delta = self.perturbation(rng);
                (0..self.dim())
                    .map(|i| {
                        if !support.contains(&i) {
                            return T::zero();
                        }
                        let v = self.center[i] + delta[i];
                        if self.center[i] == T::zero() {
                            v
                        } else {
                            v.abs() * self.center[i].signum()
                        }
                    })
                    .collect()
            }
            Restriction::Cone {
                support,
                factor,
                tolerance_delta,
            } => {
                let mut delta = self.perturbation(rng);
                for _ in 1..CONE_TRIES {
                    if cone_slack(&delta, support, *factor, *tolerance_delta) >= T::zero() {
                        break;
                    }
                    delta = self.perturbation(rng);
                }
                let (on, off) = l1_split(&delta, support);
                let bound = *factor * on + *tolerance_delta;
                if off > bound {
                    let shrink = bound / off;
                    for (i, d) in delta.iter_mut().enumerate() {
                        if !support.contains(&i) {
                            *d = *d * shrink;
                        }
                    }
                }
                vector::add(&self.center, &delta)
            }
            Restriction::SampledRegion(spec) => spec.sample(rng),
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        match &self.restriction {
            Restriction::Global => true,
            Restriction::SupportFace { support } => x
                .iter()
                .enumerate()
                .all(|(i, &v)| support.contains(&i) || v == T::zero()),
            Restriction::Cone {
                support,
                factor,
                tolerance_delta,
            } => {
                let delta = vector::sub(x, &self.center);
                cone_slack(&delta, support, *factor, *tolerance_delta) >= -T::of(1e-12)
            }
            Restriction::SampledRegion(spec) => spec.contains(x),
        }
    }
}

fn l1_split<T: Scalar>(delta: &[T], support: &IndexSet) -> (T, T) {
    let mut on = T::zero();
    let mut off = T::zero();
    for (i, d) in delta.iter().enumerate() {
        if support.contains(&i) {
            on = on + d.abs();
        } else {
            off = off + d.abs();
        }
    }
    (on, off)
}

fn cone_slack<T: Scalar>(delta: &[T], support: &IndexSet, factor: T, tol: T) -> T {
    let (on, off) = l1_split(delta, support);
    factor * on + tol - off
}
