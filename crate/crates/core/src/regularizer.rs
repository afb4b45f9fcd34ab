//! Regularizer catalogue and sampling-based condition checkers.
//!
//! A regularizer is either radial — a nondecreasing, lower semicontinuous
//! profile `h` composed with the norm — or an explicit function on a
//! finite-dimensional model space ℝⁿ. The explicit entries (anisotropic
//! quadratics, shifted norms) deliberately violate radiality; they are the
//! counterexamples that exercise the necessity side of the characterization
//! checks in [`crate::theorem`].
//!
//! The checkers probe two conditions by seeded sampling:
//!
//! * orthogonal monotonicity: `Ω(x+y) ≥ max{Ω(x), Ω(y)}` for `⟨x,y⟩ = 0`;
//! * ray monotonicity: `Ω(x) ≥ Ω(λx)` for `λ ∈ [0,1]`.
//!
//! Radiality itself is probed as "equal norms imply equal values" plus ray
//! monotonicity. For lower semicontinuous regularizers the orthogonal
//! condition and radial-nondecreasing structure are equivalent, which is what
//! the equivalence harness in [`crate::theorem`] verifies across the whole
//! catalogue.

use crate::extreal::ExtReal;
use crate::rkhs::KernelExpansion;
use crate::sampling;
use crate::{Error, Result, TOL_CHECK};
use nalgebra::DVector;
use rand::Rng;
use std::fmt;
use std::sync::Arc;

/// A nondecreasing, lower semicontinuous profile `h: [0,∞) → ℝ ∪ {+∞}`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// `h(t) = t²`
    Square,
    /// `h(t) = t^p`, `p ≥ 0`
    Power { p: f64 },
    /// Left-continuous step function: `h(t) = values[i]` on `(knots[i], knots[i+1]]`
    /// with `knots[0] = 0` covering `[0, knots[1]]`. Left continuity at the
    /// jumps is what makes a nondecreasing step function lower semicontinuous.
    MonotoneTable {
        knots: Vec<f64>,
        values: Vec<ExtReal>,
    },
    /// `h = 0` on `[0, radius]`, `+∞` beyond: the norm-ball constraint of
    /// Ivanov-type problems as an extended-real regularizer.
    IndicatorBall { radius: f64 },
}

impl RadialProfile {
    pub fn power(p: f64) -> Result<Self> {
        if p < 0.0 || !p.is_finite() {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("power exponent must be ≥ 0, got {p}"),
            });
        }
        Ok(RadialProfile::Power { p })
    }

    pub fn indicator_ball(radius: f64) -> Result<Self> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::InvalidParameter {
                name: "radius",
                reason: format!("radius must be positive, got {radius}"),
            });
        }
        Ok(RadialProfile::IndicatorBall { radius })
    }

    /// Builds a step profile. `knots` must start at 0 and strictly increase;
    /// `values` must be nondecreasing (and once `+∞`, stay `+∞`, which the
    /// nondecreasing check enforces).
    pub fn monotone_table(knots: Vec<f64>, values: Vec<ExtReal>) -> Result<Self> {
        if knots.len() != values.len() || knots.is_empty() {
            return Err(Error::InvalidParameter {
                name: "knots",
                reason: "knots and values must be nonempty and of equal length".into(),
            });
        }
        if knots[0] != 0.0 {
            return Err(Error::InvalidParameter {
                name: "knots",
                reason: "first knot must be 0".into(),
            });
        }
        for w in knots.windows(2) {
            if w[1] <= w[0] || w[1].is_nan() {
                return Err(Error::InvalidParameter {
                    name: "knots",
                    reason: "knots must be strictly increasing".into(),
                });
            }
        }
        for w in values.windows(2) {
            if w[1] < w[0] {
                return Err(Error::InvalidParameter {
                    name: "values",
                    reason: "values must be nondecreasing".into(),
                });
            }
        }
        Ok(RadialProfile::MonotoneTable { knots, values })
    }

    /// Evaluates `h(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> ExtReal {
        debug_assert!(t >= 0.0, "profiles are evaluated at norms");
        match self {
            RadialProfile::Square => ExtReal::Finite(t * t),
            RadialProfile::Power { p } => ExtReal::Finite(t.powf(*p)),
            RadialProfile::MonotoneTable { knots, values } => {
                // Largest index with knots[i] < t; 0 when t = 0. The
                // half-open-on-the-left convention keeps jumps left-continuous.
                let mut idx = 0;
                for (i, k) in knots.iter().enumerate() {
                    if *k < t {
                        idx = i;
                    } else {
                        break;
                    }
                }
                values[idx]
            }
            RadialProfile::IndicatorBall { radius } => {
                if t <= *radius {
                    ExtReal::Finite(0.0)
                } else {
                    ExtReal::PosInf
                }
            }
        }
    }

    /// True when `h` is strictly increasing wherever finite, which is the
    /// regime where norm-minimal solutions are unique up to ties in the data
    /// term (needed by the KPCA solver).
    pub fn strictly_increasing(&self) -> bool {
        match self {
            RadialProfile::Square => true,
            RadialProfile::Power { p } => *p > 0.0,
            _ => false,
        }
    }
}

/// Explicit regularizer body for [`Regularizer::Custom`].
pub type OmegaFn = Arc<dyn Fn(&DVector<f64>) -> ExtReal + Send + Sync>;

/// A regularizer `Ω`, either radial on any space carrying a norm or an
/// explicit function on the model space ℝⁿ.
#[derive(Clone)]
pub enum Regularizer {
    /// `Ω(w) = h(‖w‖)`
    Radial(RadialProfile),
    /// `Ω(x) = Σᵢ weights[i] · xᵢ²` with not-all-equal weights: ellipsoidal
    /// sublevel sets, ray-monotone but not radial.
    AnisotropicQuadratic { weights: Vec<f64> },
    /// `Ω(x) = ‖x − center‖` with `center ≠ 0`: minimum away from the origin,
    /// not even ray-monotone.
    ShiftedNorm { center: DVector<f64> },
    /// An arbitrary explicit function on ℝⁿ, for experiments.
    Custom {
        dim: usize,
        name: String,
        func: OmegaFn,
    },
}

impl fmt::Debug for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regularizer::Radial(p) => f.debug_tuple("Radial").field(p).finish(),
            Regularizer::AnisotropicQuadratic { weights } => f
                .debug_struct("AnisotropicQuadratic")
                .field("weights", weights)
                .finish(),
            Regularizer::ShiftedNorm { center } => f
                .debug_struct("ShiftedNorm")
                .field("center", &center.as_slice())
                .finish(),
            Regularizer::Custom { dim, name, .. } => f
                .debug_struct("Custom")
                .field("dim", dim)
                .field("name", name)
                .finish(),
        }
    }
}

impl Regularizer {
    pub fn anisotropic_quadratic(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "need at least two weights".into(),
            });
        }
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "weights must be nonnegative reals".into(),
            });
        }
        if weights.windows(2).all(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "weights must not all be equal (that would be radial)".into(),
            });
        }
        Ok(Regularizer::AnisotropicQuadratic { weights })
    }

    pub fn shifted_norm(center: Vec<f64>) -> Result<Self> {
        let center = DVector::from_vec(center);
        if center.norm() == 0.0 {
            return Err(Error::InvalidParameter {
                name: "center",
                reason: "center must be nonzero (zero center is radial)".into(),
            });
        }
        Ok(Regularizer::ShiftedNorm { center })
    }

    /// The model-space dimension this regularizer is pinned to, or `None` for
    /// radial ones, which work in any dimension.
    pub fn explicit_dim(&self) -> Option<usize> {
        match self {
            Regularizer::Radial(_) => None,
            Regularizer::AnisotropicQuadratic { weights } => Some(weights.len()),
            Regularizer::ShiftedNorm { center } => Some(center.len()),
            Regularizer::Custom { dim, .. } => Some(*dim),
        }
    }

    /// Evaluates `Ω` on a model-space vector.
    pub fn eval_vector(&self, x: &DVector<f64>) -> Result<ExtReal> {
        if let Some(dim) = self.explicit_dim() {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
        }
        Ok(match self {
            Regularizer::Radial(profile) => profile.eval(x.norm()),
            Regularizer::AnisotropicQuadratic { weights } => ExtReal::Finite(
                weights
                    .iter()
                    .zip(x.iter())
                    .map(|(a, xi)| a * xi * xi)
                    .sum(),
            ),
            Regularizer::ShiftedNorm { center } => ExtReal::Finite((x - center).norm()),
            Regularizer::Custom { func, .. } => func(x),
        })
    }

    /// Evaluates `Ω` on an RKHS expansion. Only radial regularizers act on
    /// expansions; explicit ones are pinned to their model space.
    pub fn eval_expansion(&self, w: &KernelExpansion) -> Result<ExtReal> {
        match self {
            Regularizer::Radial(profile) => Ok(profile.eval(w.norm())),
            other => Err(Error::DomainMismatch(format!(
                "{other:?} is defined on ℝⁿ, not on kernel expansions"
            ))),
        }
    }
}

/// Outcome of a sampled condition check. `holds = false` comes with the first
/// witness violation found; the seed is carried for reproducibility.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub holds: bool,
    pub trials: usize,
    pub violations: usize,
    pub seed: u64,
    pub witness: Option<Witness>,
}

/// A concrete violating configuration.
#[derive(Debug, Clone)]
pub struct Witness {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub omega_x: ExtReal,
    pub omega_y: ExtReal,
    pub omega_combined: ExtReal,
}

fn check_dim(reg: &Regularizer, dim: usize) -> Result<usize> {
    match reg.explicit_dim() {
        Some(d) if d != dim => Err(Error::DimensionMismatch {
            expected: d,
            got: dim,
        }),
        _ => Ok(dim),
    }
}

/// The orthogonal-pair sampler behind [`check_orthogonal_monotonicity`]:
/// two scaled normal draws, the second projected onto the orthogonal
/// complement of the first. Exposed so per-trial emitters reproduce the
/// checker's trials exactly (trial `i` uses `substream(seed, i)`).
pub fn orthogonal_pair_sample(rng: &mut impl Rng, dim: usize) -> (DVector<f64>, DVector<f64>) {
    let x = sampling::scaled_vector(rng, dim);
    let mut y = sampling::scaled_vector(rng, dim);
    y -= &x * (x.dot(&y) / x.dot(&x));
    (x, y)
}

/// The point/shrink sampler behind [`check_ray_monotonicity`].
pub fn ray_sample(rng: &mut impl Rng, dim: usize) -> (DVector<f64>, f64) {
    let x = sampling::scaled_vector(rng, dim);
    let lambda: f64 = rng.gen_range(0.0..=1.0);
    (x, lambda)
}

/// Samples orthogonal pairs and tests `Ω(x+y) ≥ max{Ω(x), Ω(y)}`.
///
/// Trial `i` draws `x` and a provisional `y` (normal directions, log-uniform
/// radii), then projects `y` onto the orthogonal complement of `x`. The
/// signed projection is what lets the sampler find failures of anisotropic
/// quadratics, where axis-aligned pairs never violate.
pub fn check_orthogonal_monotonicity(
    reg: &Regularizer,
    dim: usize,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let dim = check_dim(reg, dim)?;
    if dim < 2 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "orthogonal monotonicity needs dimension ≥ 2".into(),
        });
    }
    let mut violations = 0;
    let mut witness = None;
    for trial in 0..trials {
        let mut rng = sampling::substream(seed, trial as u64);
        let (x, y) = orthogonal_pair_sample(&mut rng, dim);
        let omega_x = reg.eval_vector(&x)?;
        let omega_y = reg.eval_vector(&y)?;
        let omega_sum = reg.eval_vector(&(&x + &y))?;
        if !omega_sum.ge_within(omega_x.max(omega_y), TOL_CHECK) {
            violations += 1;
            if witness.is_none() {
                witness = Some(Witness {
                    x: x.clone(),
                    y: y.clone(),
                    omega_x,
                    omega_y,
                    omega_combined: omega_sum,
                });
            }
        }
    }
    Ok(CheckReport {
        holds: violations == 0,
        trials,
        violations,
        seed,
        witness,
    })
}

/// Samples points and shrink factors and tests `Ω(x) ≥ Ω(λx)`, `λ ∈ [0,1]`.
pub fn check_ray_monotonicity(
    reg: &Regularizer,
    dim: usize,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let dim = check_dim(reg, dim)?;
    let mut violations = 0;
    let mut witness = None;
    for trial in 0..trials {
        let mut rng = sampling::substream(seed, trial as u64);
        let (x, lambda) = ray_sample(&mut rng, dim);
        let shrunk = &x * lambda;
        let omega_x = reg.eval_vector(&x)?;
        let omega_shrunk = reg.eval_vector(&shrunk)?;
        if !omega_x.ge_within(omega_shrunk, TOL_CHECK) {
            violations += 1;
            if witness.is_none() {
                witness = Some(Witness {
                    x: x.clone(),
                    y: shrunk,
                    omega_x,
                    omega_y: omega_shrunk,
                    omega_combined: omega_x,
                });
            }
        }
    }
    Ok(CheckReport {
        holds: violations == 0,
        trials,
        violations,
        seed,
        witness,
    })
}

/// Samples pairs of equal norm and tests `Ω(x) = Ω(y)`. Together with ray
/// monotonicity this is the sampling verdict for "radial nondecreasing".
pub fn check_equal_norm_invariance(
    reg: &Regularizer,
    dim: usize,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let dim = check_dim(reg, dim)?;
    let mut violations = 0;
    let mut witness = None;
    for trial in 0..trials {
        let mut rng = sampling::substream(seed, trial as u64);
        let x = sampling::scaled_vector(&mut rng, dim);
        let y = sampling::unit_vector(&mut rng, dim) * x.norm();
        let omega_x = reg.eval_vector(&x)?;
        let omega_y = reg.eval_vector(&y)?;
        if !omega_x.approx_eq(omega_y, TOL_CHECK) {
            violations += 1;
            if witness.is_none() {
                witness = Some(Witness {
                    x: x.clone(),
                    y: y.clone(),
                    omega_x,
                    omega_y,
                    omega_combined: omega_x,
                });
            }
        }
    }
    Ok(CheckReport {
        holds: violations == 0,
        trials,
        violations,
        seed,
        witness,
    })
}

/// Sampling verdict for the radial-nondecreasing structure: equal norms give
/// equal values, and shrinking toward the origin never increases the value.
pub fn check_radial_nondecreasing(
    reg: &Regularizer,
    dim: usize,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    let equal_norm = check_equal_norm_invariance(reg, dim, trials, seed)?;
    let ray = check_ray_monotonicity(reg, dim, trials, seed.wrapping_add(1))?;
    Ok(equal_norm.holds && ray.holds)
}

/// A named catalogue entry with the model dimension its checks run in.
#[derive(Debug, Clone)]
pub struct CatalogueEntry {
    pub id: &'static str,
    pub regularizer: Regularizer,
    pub dim: usize,
    pub radial: bool,
}

/// The shipped regularizer catalogue: five radial profiles and three
/// deliberate counterexamples.
pub fn catalogue() -> Vec<CatalogueEntry> {
    vec![
        CatalogueEntry {
            id: "radial_square",
            regularizer: Regularizer::Radial(RadialProfile::Square),
            dim: 3,
            radial: true,
        },
        CatalogueEntry {
            id: "radial_power_1",
            regularizer: Regularizer::Radial(RadialProfile::power(1.0).unwrap()),
            dim: 3,
            radial: true,
        },
        CatalogueEntry {
            id: "radial_power_3",
            regularizer: Regularizer::Radial(RadialProfile::power(3.0).unwrap()),
            dim: 2,
            radial: true,
        },
        CatalogueEntry {
            id: "radial_step_table",
            regularizer: Regularizer::Radial(
                RadialProfile::monotone_table(
                    vec![0.0, 0.5, 1.0, 2.0],
                    vec![
                        ExtReal::Finite(0.0),
                        ExtReal::Finite(1.0),
                        ExtReal::Finite(2.5),
                        ExtReal::PosInf,
                    ],
                )
                .unwrap(),
            ),
            dim: 3,
            radial: true,
        },
        CatalogueEntry {
            id: "radial_indicator_ball",
            regularizer: Regularizer::Radial(RadialProfile::indicator_ball(1.0).unwrap()),
            dim: 3,
            radial: true,
        },
        CatalogueEntry {
            id: "anisotropic_1_4",
            regularizer: Regularizer::anisotropic_quadratic(vec![1.0, 4.0]).unwrap(),
            dim: 2,
            radial: false,
        },
        CatalogueEntry {
            id: "anisotropic_1_4_9",
            regularizer: Regularizer::anisotropic_quadratic(vec![1.0, 4.0, 9.0]).unwrap(),
            dim: 3,
            radial: false,
        },
        CatalogueEntry {
            id: "shifted_norm_e1",
            regularizer: Regularizer::shifted_norm(vec![1.0, 0.0]).unwrap(),
            dim: 2,
            radial: false,
        },
    ]
}
