//! Numerical probes of the Hilbert-space geometry behind the reduction.
//!
//! Everything here runs on finite-dimensional model spaces ℝⁿ (n ≤ 6) with
//! the standard inner product: the geometric statements under test are about
//! abstract Hilbert structure, and small model spaces keep brute-force
//! oracles feasible. The RKHS pipeline is exercised separately through the
//! projection property in [`crate::reduce`].
//!
//! Probes:
//!
//! * [`build_rotation_path`] — the constructive sequence that rotates a point
//!   of smaller norm onto a target ray by norm-growing orthogonal steps, with
//!   its closed-form norm recursion and terminal alignment coefficient;
//! * [`monotone_chain_check`] — whether a regularizer is nondecreasing along
//!   such a path (it must be when orthogonal monotonicity holds);
//! * [`sublevel_geometry_probe`] — sampled shape of sublevel sets
//!   (origin-centered-ball-likeness and star-shapedness);
//! * [`representer_span_experiment`] — distance of an oracle minimizer from
//!   the span of the data functionals;
//! * [`necessity_probe`] — the λ(γ) trend of the scalar family restricted to
//!   a ray, with the boundedness and limit-inferior inequalities it implies;
//! * [`equivalence_harness`] — agreement of the orthogonal-monotonicity
//!   verdict with the radial-nondecreasing verdict across a catalogue.

use crate::extreal::ExtReal;
use crate::oracle::{self, OracleOptions};
use crate::reduce::ScalarLoss;
use crate::regularizer::{
    check_orthogonal_monotonicity, check_radial_nondecreasing, CatalogueEntry, Regularizer,
};
use crate::sampling;
use crate::{Error, Result, TOL_CHECK};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// The rotation sequence `x₀ = y`, `x_{k+1} = x_k + a_k u_k` with orthogonal
/// unit steps of angle `θ/n` inside `span{x, y}`, ending aligned with `x`.
#[derive(Debug, Clone)]
pub struct RotationPath {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub n: usize,
    /// `x₀ … x_n`
    pub points: Vec<DVector<f64>>,
    /// `a₀ … a_{n−1}`, `a_k = ‖x_k‖ tan(θ/n)`
    pub steps: Vec<f64>,
    /// `u₀ … u_{n−1}`
    pub units: Vec<DVector<f64>>,
    /// Total angle between `y` and `x`, in `(0, π)`.
    pub theta: f64,
    /// Terminal alignment coefficient: `x_n = λ x`.
    pub lambda: f64,
}

impl RotationPath {
    /// Closed form for `λ²`: `(‖y‖/‖x‖)² (1 + tan²(θ/n))ⁿ`.
    pub fn lambda_squared_closed_form(&self) -> f64 {
        lambda_squared(self.y.norm() / self.x.norm(), self.theta, self.n)
    }

    /// Largest violation of the per-step norm recursion
    /// `‖x_{k+1}‖² = ‖x_k‖² (1 + tan²(θ/n))`, relative.
    pub fn max_recursion_residual(&self) -> f64 {
        let growth = 1.0 + (self.theta / self.n as f64).tan().powi(2);
        let mut worst = 0.0f64;
        for k in 0..self.n {
            let lhs = self.points[k + 1].norm_squared();
            let rhs = self.points[k].norm_squared() * growth;
            worst = worst.max((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE));
        }
        worst
    }

    /// Largest `|⟨u_k, x_k⟩|` over the path (scaled by the operand norms).
    pub fn max_step_orthogonality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.n {
            let denom = self.points[k].norm().max(f64::MIN_POSITIVE);
            worst = worst.max(self.units[k].dot(&self.points[k]).abs() / denom);
        }
        worst
    }

    /// Largest deviation of the step directions from `span{x, y}`.
    pub fn max_span_residual(&self) -> f64 {
        let basis = orthonormal_basis(&[self.x.clone(), self.y.clone()]);
        let mut worst = 0.0f64;
        for u in &self.units {
            let mut residual = u.clone();
            for b in &basis {
                let coef = b.dot(u);
                residual.axpy(-coef, b, 1.0);
            }
            worst = worst.max(residual.norm());
        }
        worst
    }

    /// Smallest `⟨u_k, x⟩`; positive for a valid path.
    pub fn min_target_component(&self) -> f64 {
        self.units
            .iter()
            .map(|u| u.dot(&self.x))
            .fold(f64::INFINITY, f64::min)
    }

    /// `‖x_n − λx‖ / ‖x_n‖`, the terminal alignment residual.
    pub fn alignment_residual(&self) -> f64 {
        let end = &self.points[self.n];
        let target = &self.x * self.lambda;
        (end - target).norm() / end.norm().max(f64::MIN_POSITIVE)
    }
}

fn lambda_squared(norm_ratio: f64, theta: f64, n: usize) -> f64 {
    let half_angle = theta / n as f64;
    if half_angle >= std::f64::consts::FRAC_PI_2 {
        return f64::INFINITY;
    }
    let t = half_angle.tan();
    norm_ratio * norm_ratio * (n as f64 * (t * t).ln_1p()).exp()
}

/// Angle between two vectors, from the clamped normalized inner product.
pub fn angle_between(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let cos = (x.dot(y) / (x.norm() * y.norm())).clamp(-1.0, 1.0);
    cos.acos()
}

/// Constructs the rotation path from `y` to the ray of `x` in `n` steps.
///
/// Requirements: dimension ≥ 2, `0 < ‖y‖ < ‖x‖`, `y` not a multiple of `x`
/// (for aligned `y` use ray monotonicity directly: that is the closure
/// argument, not this construction), and `θ/n < π/2` so every step angle is
/// realizable.
pub fn build_rotation_path(x: &DVector<f64>, y: &DVector<f64>, n: usize) -> Result<RotationPath> {
    if x.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: "rotation paths need dimension ≥ 2".into(),
        });
    }
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "need at least one step".into(),
        });
    }
    let (nx, ny) = (x.norm(), y.norm());
    if ny <= 0.0 || ny >= nx || ny.is_nan() {
        return Err(Error::InvalidParameter {
            name: "y",
            reason: format!("need 0 < ‖y‖ < ‖x‖, got ‖y‖ = {ny}, ‖x‖ = {nx}"),
        });
    }
    // Aligned y is excluded from the construction; the conclusion for it
    // follows from closedness of sublevel sets plus ray monotonicity.
    let mut perp = x.clone();
    perp.axpy(-x.dot(y) / ny.powi(2), y, 1.0);
    if perp.norm() <= 1e-12 * nx {
        return Err(Error::InvalidParameter {
            name: "y",
            reason: "y is aligned with x; use the ray-monotonicity check (closure argument) instead"
                .into(),
        });
    }
    let theta = angle_between(x, y);
    let step_angle = theta / n as f64;
    if step_angle >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("step angle θ/n = {step_angle} must be below π/2; increase n"),
        });
    }
    let tan_step = step_angle.tan();

    let mut points = Vec::with_capacity(n + 1);
    let mut steps = Vec::with_capacity(n);
    let mut units = Vec::with_capacity(n);
    points.push(y.clone());
    for k in 0..n {
        let current = &points[k];
        // The unit direction orthogonal to x_k inside span{x, y} with a
        // positive x component: normalize x minus its x_k component.
        let mut u = x.clone();
        u.axpy(-x.dot(current) / current.norm_squared(), current, 1.0);
        let u_norm = u.norm();
        if u_norm <= 1e-300 {
            return Err(Error::SolverFailure(format!(
                "path degenerated to alignment at step {k}"
            )));
        }
        u /= u_norm;
        let a = current.norm() * tan_step;
        let next = current + &u * a;
        steps.push(a);
        units.push(u);
        points.push(next);
    }
    let lambda = points[n].dot(x) / nx.powi(2);
    Ok(RotationPath {
        x: x.clone(),
        y: y.clone(),
        n,
        points,
        steps,
        units,
        theta,
        lambda,
    })
}

/// Smallest `n` with `λ(n) ≤ 1`, by doubling then integer bisection on the
/// closed form. Always exists because `λ(n) → ‖y‖/‖x‖ < 1`.
pub fn min_n_for_contraction(x: &DVector<f64>, y: &DVector<f64>) -> Result<usize> {
    let (nx, ny) = (x.norm(), y.norm());
    if ny <= 0.0 || ny >= nx || ny.is_nan() {
        return Err(Error::InvalidParameter {
            name: "y",
            reason: format!("need 0 < ‖y‖ < ‖x‖, got ‖y‖ = {ny}, ‖x‖ = {nx}"),
        });
    }
    let theta = angle_between(x, y);
    let ratio = ny / nx;
    let contracts = |n: usize| lambda_squared(ratio, theta, n) <= 1.0;
    if contracts(1) {
        return Ok(1);
    }
    let mut hi = 2usize;
    while !contracts(hi) {
        hi = hi.checked_mul(2).ok_or_else(|| {
            Error::SolverFailure("contraction step count overflowed".into())
        })?;
    }
    let mut lo = hi / 2; // λ(lo) > 1
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if contracts(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One failed monotonicity link along a rotation path.
#[derive(Debug, Clone)]
pub struct ChainViolation {
    pub step: usize,
    pub omega_from: ExtReal,
    pub omega_to: ExtReal,
}

/// Result of checking `Ω(x_{k+1}) ≥ Ω(x_k)` along a path, plus the endpoint
/// comparison `Ω(λx) ≥ Ω(y)`. Failures are recorded, not raised: they are the
/// expected observation for regularizers violating orthogonal monotonicity.
#[derive(Debug, Clone)]
pub struct ChainReport {
    pub steps: usize,
    pub violations: Vec<ChainViolation>,
    pub endpoint_ok: bool,
    pub holds: bool,
}

pub fn monotone_chain_check(reg: &Regularizer, path: &RotationPath) -> Result<ChainReport> {
    let mut violations = Vec::new();
    let mut previous = reg.eval_vector(&path.points[0])?;
    for k in 0..path.n {
        let next = reg.eval_vector(&path.points[k + 1])?;
        if !next.ge_within(previous, TOL_CHECK) {
            violations.push(ChainViolation {
                step: k,
                omega_from: previous,
                omega_to: next,
            });
        }
        previous = next;
    }
    let omega_start = reg.eval_vector(&path.points[0])?;
    let omega_end = reg.eval_vector(&path.points[path.n])?;
    let endpoint_ok = omega_end.ge_within(omega_start, TOL_CHECK);
    Ok(ChainReport {
        steps: path.n,
        violations: violations.clone(),
        endpoint_ok,
        holds: violations.is_empty() && endpoint_ok,
    })
}

/// Sampled shape of one sublevel set `S_c = {x : Ω(x) ≤ c}`.
#[derive(Debug, Clone)]
pub struct SublevelReport {
    pub regularizer_id: String,
    pub level: f64,
    pub samples: usize,
    pub inside: usize,
    /// Largest norm among inside samples.
    pub r_in: Option<f64>,
    /// Smallest norm among outside samples.
    pub r_out: Option<f64>,
    pub ball_like: bool,
    pub star_shaped: bool,
    /// An inside point whose segment to the origin leaves the set, with the
    /// offending shrink factor.
    pub star_witness: Option<(DVector<f64>, f64)>,
}

/// Relative slack for the sampled ball test `r_in ≤ r_out`.
pub const TOL_RADIUS: f64 = 1e-3;

/// Estimates whether `S_c` looks like an origin-centered ball (every inside
/// norm below every outside norm) and whether it is star-shaped with respect
/// to the origin (segments toward 0 stay inside). Both are sampling
/// estimates, not exact computations.
pub fn sublevel_geometry_probe(
    reg: &Regularizer,
    regularizer_id: &str,
    dim: usize,
    level: f64,
    samples: usize,
    seed: u64,
) -> Result<SublevelReport> {
    if let Some(d) = reg.explicit_dim() {
        if d != dim {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: dim,
            });
        }
    }
    let level_value = ExtReal::Finite(level);
    let mut inside = 0usize;
    let mut r_in: Option<f64> = None;
    let mut r_out: Option<f64> = None;
    let mut star_shaped = true;
    let mut star_witness = None;
    for trial in 0..samples {
        let mut rng = sampling::substream(seed, trial as u64);
        let point = sampling::scaled_vector(&mut rng, dim);
        let value = reg.eval_vector(&point)?;
        let norm = point.norm();
        if value <= level_value {
            inside += 1;
            r_in = Some(r_in.map_or(norm, |r| r.max(norm)));
            // Probe the segment toward the origin.
            for _ in 0..4 {
                let t: f64 = rng.gen_range(0.0..1.0);
                let shrunk = &point * t;
                let shrunk_value = reg.eval_vector(&shrunk)?;
                if !level_value.ge_within(shrunk_value, TOL_CHECK) {
                    star_shaped = false;
                    if star_witness.is_none() {
                        star_witness = Some((point.clone(), t));
                    }
                }
            }
        } else {
            r_out = Some(r_out.map_or(norm, |r| r.min(norm)));
        }
    }
    let ball_like = match (r_in, r_out) {
        (Some(rin), Some(rout)) => rin <= rout * (1.0 + TOL_RADIUS),
        // All samples on one side: nothing distinguishes the set from a ball
        // (or the whole space) at this sampling resolution.
        _ => true,
    };
    Ok(SublevelReport {
        regularizer_id: regularizer_id.to_string(),
        level,
        samples,
        inside,
        r_in,
        r_out,
        ball_like,
        star_shaped,
        star_witness,
    })
}

/// The data term of a model-space experiment.
#[derive(Debug, Clone)]
pub enum ModelLoss {
    /// `Σᵢ (targets[i] − ⟨w, wᵢ⟩)²`
    Squared { targets: Vec<f64> },
    /// `f(⟨w, w₁⟩)` for a scalar loss; requires exactly one functional.
    Scalar { f: ScalarLoss },
}

impl ModelLoss {
    fn eval(&self, values: &DVector<f64>) -> f64 {
        match self {
            ModelLoss::Squared { targets } => targets
                .iter()
                .zip(values.iter())
                .map(|(y, v)| (y - v) * (y - v))
                .sum(),
            ModelLoss::Scalar { f } => f.eval(values[0]),
        }
    }
}

/// Outcome of one span experiment.
#[derive(Debug, Clone)]
pub struct SpanExperimentReport {
    /// `distance(w*, span{w₁…w_ℓ}) / ‖w*‖` (zero for `w* = 0`).
    pub span_distance: f64,
    pub j_at_min: ExtReal,
    pub j_at_projection: ExtReal,
    pub minimizer: DVector<f64>,
    /// False when the oracle could not find any finite value; the report is
    /// then a flag, not a result.
    pub oracle_converged: bool,
}

/// Minimizes `J(w) = γ·loss(⟨w,w₁⟩,…,⟨w,w_ℓ⟩) + Ω(w)` over ℝⁿ with the
/// brute-force oracle and reports how far the found minimizer is from
/// `span{w₁…w_ℓ}`, along with the objective at its orthogonal projection
/// onto the span.
pub fn representer_span_experiment(
    reg: &Regularizer,
    functionals: &[DVector<f64>],
    loss: &ModelLoss,
    gamma: f64,
    seed: u64,
) -> Result<SpanExperimentReport> {
    if functionals.is_empty() {
        return Err(Error::InvalidParameter {
            name: "functionals",
            reason: "need at least one functional vector".into(),
        });
    }
    let dim = functionals[0].len();
    for w in functionals {
        if w.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: w.len(),
            });
        }
    }
    if functionals.len() >= dim {
        return Err(Error::InvalidParameter {
            name: "functionals",
            reason: "the span must be proper: need ℓ < n".into(),
        });
    }
    if let ModelLoss::Scalar { .. } = loss {
        if functionals.len() != 1 {
            return Err(Error::InvalidParameter {
                name: "loss",
                reason: "scalar loss requires exactly one functional".into(),
            });
        }
    }
    if let Some(d) = reg.explicit_dim() {
        if d != dim {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: dim,
            });
        }
    }

    let objective = |w: &DVector<f64>| -> ExtReal {
        let values = DVector::from_fn(functionals.len(), |i, _| functionals[i].dot(w));
        match reg.eval_vector(w) {
            Ok(omega) => ExtReal::Finite(gamma * loss.eval(&values)) + omega,
            Err(_) => ExtReal::PosInf,
        }
    };
    let opts = OracleOptions {
        seed,
        ..OracleOptions::default()
    };
    let result = oracle::minimize_box(
        objective,
        dim,
        None::<fn(&DVector<f64>) -> DVector<f64>>,
        &opts,
    );

    let basis = orthonormal_basis(functionals);
    let mut projection = DVector::zeros(dim);
    for b in &basis {
        projection.axpy(b.dot(&result.minimizer), b, 1.0);
    }
    let minimizer_norm = result.minimizer.norm();
    // Below the floor the minimizer is the origin, which lies in every span.
    let span_distance = if minimizer_norm > 1e-12 {
        (&result.minimizer - &projection).norm() / minimizer_norm
    } else {
        0.0
    };
    Ok(SpanExperimentReport {
        span_distance,
        j_at_min: result.value,
        j_at_projection: objective(&projection),
        minimizer: result.minimizer,
        oracle_converged: result.converged,
    })
}

/// One γ step of the necessity probe.
#[derive(Debug, Clone)]
pub struct NecessityStep {
    pub gamma: f64,
    pub lambda: f64,
    /// `a = γ(f(λ(γ)) − f(1))`
    pub a_value: f64,
    pub omega_at_lambda_x: ExtReal,
    pub bound_ok: bool,
}

/// Result of the λ(γ) probe along the ray of `x` against the orthogonal
/// perturbation `y`.
#[derive(Debug, Clone)]
pub struct NecessityReport {
    pub omega_sum: ExtReal,
    pub omega_origin: ExtReal,
    /// The `Ω(x+y) = +∞` branch, where the target inequality holds trivially.
    pub trivially_satisfied: bool,
    pub steps: Vec<NecessityStep>,
    /// `|λ(γ_last) − 1| ≤ 1e-3`.
    pub lambda_trend_to_one: bool,
    /// `Ω(x+y) ≥ min over the tail of Ω(λ(γ_k)x)`, the computable form of
    /// the limit-inferior inequality.
    pub liminf_ok: bool,
    pub bounds_all_ok: bool,
}

/// The standard schedule `γ_k = 2^k`, `k = 0…max_exp`.
pub fn gamma_schedule(max_exp: u32) -> Vec<f64> {
    (0..=max_exp).map(|k| (2.0f64).powi(k as i32)).collect()
}

/// For `p = x/‖x‖²` and `f(z) = (z−1)²`, minimizes `γf(λ) + Ω(λx)` over the
/// ray for every γ in the schedule and checks the boundedness of
/// `a_k = γ_k(f(λ(γ_k)) − f(1))` against `Ω(x+y) − Ω(0)`, the trend
/// `λ(γ_k) → 1`, and the limit-inferior inequality.
pub fn necessity_probe(
    reg: &Regularizer,
    x: &DVector<f64>,
    y: &DVector<f64>,
    gammas: &[f64],
) -> Result<NecessityReport> {
    if x.norm() == 0.0 {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: "x must be nonzero".into(),
        });
    }
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let cross = x.dot(y).abs();
    if cross > 1e-9 * x.norm() * y.norm().max(1.0) {
        return Err(Error::InvalidParameter {
            name: "y",
            reason: format!("y must be orthogonal to x, got ⟨x,y⟩ = {cross:.3e}"),
        });
    }
    if gammas.is_empty() {
        return Err(Error::InvalidParameter {
            name: "gammas",
            reason: "schedule must be nonempty".into(),
        });
    }

    let f = ScalarLoss::SquareAtOne;
    let f_min = f.eval(1.0);
    let omega_sum = reg.eval_vector(&(x + y))?;
    let omega_origin = reg.eval_vector(&DVector::zeros(x.len()))?;
    let trivially_satisfied = omega_sum == ExtReal::PosInf;
    let budget = match (omega_sum, omega_origin) {
        (ExtReal::Finite(s), ExtReal::Finite(o)) => Some(s - o),
        _ => None,
    };

    let mut steps = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let restricted = |lambda: f64| match reg.eval_vector(&(x * lambda)) {
            Ok(omega) => ExtReal::Finite(gamma * f.eval(lambda)) + omega,
            Err(_) => ExtReal::PosInf,
        };
        let minimum = oracle::minimize_scalar(restricted, -10.0, 10.0, 4001, 150);
        if !minimum.feasible {
            return Err(Error::Infeasible(format!(
                "restricted problem at γ = {gamma} is +∞ on the whole bracket"
            )));
        }
        let lambda = minimum.argmin;
        let a_value = gamma * (f.eval(lambda) - f_min);
        let bound_ok = match budget {
            Some(b) => a_value <= b + TOL_CHECK,
            None => true, // the +∞ branch bounds nothing
        };
        steps.push(NecessityStep {
            gamma,
            lambda,
            a_value,
            omega_at_lambda_x: reg.eval_vector(&(x * lambda))?,
            bound_ok,
        });
    }

    let lambda_trend_to_one = (steps.last().unwrap().lambda - 1.0).abs() <= 1e-3;
    let tail_start = steps.len() - steps.len().div_ceil(4);
    let tail_min = steps[tail_start..]
        .iter()
        .map(|s| s.omega_at_lambda_x)
        .fold(ExtReal::PosInf, ExtReal::min);
    let liminf_ok = omega_sum.ge_within(tail_min, TOL_CHECK);
    let bounds_all_ok = steps.iter().all(|s| s.bound_ok);
    Ok(NecessityReport {
        omega_sum,
        omega_origin,
        trivially_satisfied,
        steps,
        lambda_trend_to_one,
        liminf_ok,
        bounds_all_ok,
    })
}

/// A frozen model-space instance witnessing that a non-radial regularizer
/// pushes minimizers off the span of its data functionals.
#[derive(Debug, Clone)]
pub struct NecessityWitness {
    /// Catalogue id of the regularizer this witnesses against.
    pub catalogue_id: &'static str,
    pub regularizer: Regularizer,
    pub functionals: Vec<DVector<f64>>,
    pub loss: ModelLoss,
    pub gamma: f64,
    pub seed: u64,
    /// Hand-derived stationary minimizer, where one is available in closed
    /// form.
    pub expected_minimizer: Option<DVector<f64>>,
}

/// One frozen witness instance per non-radial catalogue entry. Each produces
/// `span_distance > 0.01` in [`representer_span_experiment`]; the expected
/// minimizers come from stationarity solved by hand:
///
/// * weights (1,4), `w₁ = (1,1)`, γ = 10: `w* = γ(γw₁w₁ᵀ + diag α)⁻¹w₁ =
///   (20/27, 5/27)`;
/// * weights (1,4,9), `w₁ = (1,1,1)`, γ = 10: `w* = (180, 45, 20)/263`;
/// * shifted norm center (1,0), `w₁ = (0,1)`, γ = 10: the first coordinate
///   snaps to the center and the second balances `2γ(b−1) + 1 = 0`, so
///   `w* = (1, 0.95)`.
pub fn necessity_witnesses() -> Vec<NecessityWitness> {
    vec![
        NecessityWitness {
            catalogue_id: "anisotropic_1_4",
            regularizer: Regularizer::anisotropic_quadratic(vec![1.0, 4.0]).unwrap(),
            functionals: vec![DVector::from_vec(vec![1.0, 1.0])],
            loss: ModelLoss::Scalar {
                f: ScalarLoss::SquareAtOne,
            },
            gamma: 10.0,
            seed: 801,
            expected_minimizer: Some(DVector::from_vec(vec![20.0 / 27.0, 5.0 / 27.0])),
        },
        NecessityWitness {
            catalogue_id: "anisotropic_1_4_9",
            regularizer: Regularizer::anisotropic_quadratic(vec![1.0, 4.0, 9.0]).unwrap(),
            functionals: vec![DVector::from_vec(vec![1.0, 1.0, 1.0])],
            loss: ModelLoss::Scalar {
                f: ScalarLoss::SquareAtOne,
            },
            gamma: 10.0,
            seed: 802,
            expected_minimizer: Some(DVector::from_vec(vec![
                180.0 / 263.0,
                45.0 / 263.0,
                20.0 / 263.0,
            ])),
        },
        NecessityWitness {
            catalogue_id: "shifted_norm_e1",
            regularizer: Regularizer::shifted_norm(vec![1.0, 0.0]).unwrap(),
            functionals: vec![DVector::from_vec(vec![0.0, 1.0])],
            loss: ModelLoss::Scalar {
                f: ScalarLoss::SquareAtOne,
            },
            gamma: 10.0,
            seed: 803,
            expected_minimizer: Some(DVector::from_vec(vec![1.0, 0.95])),
        },
    ]
}

/// Agreement of the two sampling verdicts for one catalogue entry.
#[derive(Debug, Clone)]
pub struct EquivalenceVerdict {
    pub id: String,
    pub orthogonal_holds: bool,
    pub radial_holds: bool,
    pub agree: bool,
}

/// Runs both condition checkers over a catalogue and reports whether the
/// orthogonal-monotonicity verdict matches the radial-nondecreasing verdict
/// for every entry, as the characterization predicts for lower
/// semicontinuous regularizers.
pub fn equivalence_harness(
    entries: &[CatalogueEntry],
    trials: usize,
    seed: u64,
) -> Result<Vec<EquivalenceVerdict>> {
    let mut verdicts = Vec::with_capacity(entries.len());
    for entry in entries {
        let orthogonal =
            check_orthogonal_monotonicity(&entry.regularizer, entry.dim, trials, seed)?.holds;
        let radial = check_radial_nondecreasing(&entry.regularizer, entry.dim, trials, seed)?;
        verdicts.push(EquivalenceVerdict {
            id: entry.id.to_string(),
            orthogonal_holds: orthogonal,
            radial_holds: radial,
            agree: orthogonal == radial,
        });
    }
    Ok(verdicts)
}

/// Modified Gram–Schmidt basis of the span of the given vectors, dropping
/// numerically dependent directions.
pub fn orthonormal_basis(vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut residual = v.clone();
        for b in &basis {
            let coef = b.dot(&residual);
            residual.axpy(-coef, b, 1.0);
        }
        let norm = residual.norm();
        if norm > 1e-12 * v.norm().max(1.0) {
            basis.push(residual / norm);
        }
    }
    basis
}

/// Euclidean Gram matrix of model-space vectors (used by the runner when a
/// span experiment is configured with explicit vectors).
pub fn euclidean_gram(vectors: &[DVector<f64>]) -> DMatrix<f64> {
    let n = vectors.len();
    DMatrix::from_fn(n, n, |i, j| vectors[i].dot(&vectors[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularizer::{catalogue, RadialProfile};
    use nalgebra::dvector;

    #[test]
    fn rotation_path_quarter_turn_example() {
        // x = (1,0), y = (0, 1/2), θ = π/2, n = 64:
        // λ² = (1/4)(1 + tan²(π/128))^64 by the closed form.
        let x = dvector![1.0, 0.0];
        let y = dvector![0.0, 0.5];
        let path = build_rotation_path(&x, &y, 64).unwrap();
        assert!((path.theta - std::f64::consts::FRAC_PI_2).abs() <= 1e-14);
        let expected =
            0.25 * (1.0 + (std::f64::consts::PI / 128.0).tan().powi(2)).powi(64);
        assert!(
            (path.lambda.powi(2) - expected).abs() <= 1e-10 * expected,
            "λ² = {}, closed form {expected}",
            path.lambda.powi(2)
        );
        assert!(path.max_recursion_residual() <= 1e-12);
        assert!(path.max_step_orthogonality_residual() <= 1e-12);
        assert!(path.max_span_residual() <= 1e-10);
        assert!(path.min_target_component() > 0.0);
        assert!(path.alignment_residual() <= 1e-10);
        assert!(path.lambda >= 0.0);
    }

    #[test]
    fn closed_form_product_tends_to_one() {
        // (1 + tan²(θ/n))ⁿ → 1; at n = 10⁶ and θ = π/2 the gap is below 1e-5.
        // Independent high-precision route: n·ln(1+t²) via ln_1p.
        let theta = std::f64::consts::FRAC_PI_2;
        let n = 1_000_000usize;
        let product = lambda_squared(1.0, theta, n);
        assert!((product - 1.0).abs() <= 1e-5, "product = {product}");
        let direct = (1.0 + (theta / n as f64).tan().powi(2)).powi(n as i32);
        assert!((product - direct).abs() <= 1e-9);
    }

    #[test]
    fn nearly_aligned_path_degenerates_smoothly() {
        let x = dvector![1.0, 0.0];
        let y = dvector![0.5, 1e-6];
        let path = build_rotation_path(&x, &y, 16).unwrap();
        // θ ≈ 0: essentially no rotation, λ ≈ ‖y‖/‖x‖.
        assert!((path.lambda - 0.5).abs() <= 1e-9);
    }

    #[test]
    fn path_preconditions() {
        let x = dvector![1.0, 0.0];
        assert!(build_rotation_path(&x, &dvector![0.5, 0.0], 8).is_err()); // aligned
        assert!(build_rotation_path(&x, &dvector![-0.5, 0.0], 8).is_err()); // anti-aligned
        assert!(build_rotation_path(&x, &dvector![0.0, 2.0], 8).is_err()); // too long
        assert!(build_rotation_path(&x, &dvector![0.0, 0.0], 8).is_err()); // zero
        assert!(build_rotation_path(&dvector![1.0], &dvector![0.5], 8).is_err()); // dim 1
    }

    #[test]
    fn min_n_matches_a_linear_scan() {
        let x = dvector![1.0, 0.0];
        let y = dvector![0.0, 0.99];
        let n_star = min_n_for_contraction(&x, &y).unwrap();
        let theta = angle_between(&x, &y);
        let check = |n: usize| lambda_squared(0.99, theta, n) <= 1.0;
        // Oracle: first n that contracts, by direct scan.
        let mut scan = 1;
        while !check(scan) {
            scan += 1;
        }
        assert_eq!(n_star, scan);
        assert!(check(n_star));
        assert!(n_star == 1 || !check(n_star - 1));
    }

    #[test]
    fn min_n_is_one_for_short_y_and_small_angle() {
        let x = dvector![1.0, 0.0];
        let y = dvector![0.0995, 0.00995]; // ‖y‖ ≈ 0.1, θ ≈ 0.0997
        assert_eq!(min_n_for_contraction(&x, &y).unwrap(), 1);
    }

    #[test]
    fn min_n_grows_as_y_approaches_the_sphere() {
        let x = dvector![1.0, 0.0];
        let mut previous = 0;
        for ratio in [0.5, 0.9, 0.99, 0.999] {
            let y = dvector![0.0, ratio];
            let n = min_n_for_contraction(&x, &y).unwrap();
            assert!(n > previous, "ratio {ratio}: n = {n} after {previous}");
            previous = n;
        }
    }

    #[test]
    fn chain_holds_for_radial_square() {
        let square = Regularizer::Radial(RadialProfile::Square);
        let path =
            build_rotation_path(&dvector![2.0, 0.0, 0.0], &dvector![0.3, 0.7, 0.1], 32).unwrap();
        let report = monotone_chain_check(&square, &path).unwrap();
        assert!(report.holds);
    }

    #[test]
    fn chain_fails_on_the_frozen_anisotropic_geometry() {
        // Weights (1,4), x = (1,0), y = (0.5, 0.5), n = 1: the single step is
        // y → (1,0) with Ω dropping from 1.25 to 1.
        let aniso = Regularizer::anisotropic_quadratic(vec![1.0, 4.0]).unwrap();
        let path = build_rotation_path(&dvector![1.0, 0.0], &dvector![0.5, 0.5], 1).unwrap();
        assert!((path.lambda - 1.0).abs() <= 1e-12);
        let report = monotone_chain_check(&aniso, &path).unwrap();
        assert!(!report.holds);
        assert!(!report.violations.is_empty() || !report.endpoint_ok);
    }

    #[test]
    fn chain_orders_indicator_values_correctly() {
        // Ball radius between ‖y‖ and ‖λx‖: values go 0 … 0, ∞ … ∞ along the
        // path, which is monotone in the extended reals.
        let x = dvector![2.0, 0.0];
        let y = dvector![0.3, 0.4]; // ‖y‖ = 0.5
        let path = build_rotation_path(&x, &y, 4).unwrap();
        let terminal_norm = path.points[path.n].norm();
        let radius = 0.52;
        assert!(y.norm() < radius && terminal_norm > radius);
        let ball = Regularizer::Radial(RadialProfile::indicator_ball(radius).unwrap());
        let report = monotone_chain_check(&ball, &path).unwrap();
        assert!(report.holds);
        // Both finite and infinite values occur along the path.
        let values: Vec<_> = path
            .points
            .iter()
            .map(|p| ball.eval_vector(p).unwrap())
            .collect();
        assert!(values.contains(&ExtReal::Finite(0.0)));
        assert!(values.contains(&ExtReal::PosInf));
    }

    #[test]
    fn sublevel_probe_sees_a_ball_for_radial_profiles() {
        let square = Regularizer::Radial(RadialProfile::Square);
        let report = sublevel_geometry_probe(&square, "radial_square", 3, 1.0, 2000, 11).unwrap();
        assert!(report.ball_like);
        assert!(report.star_shaped);
    }

    #[test]
    fn sublevel_probe_sees_the_ellipse_of_an_anisotropic_quadratic() {
        // Closed-form oracle: S_c of Σαᵢxᵢ² has axis radii √(c/αᵢ), so the
        // sampled r_in/r_out approaches √(α_max/α_min) = 2 for (1,4).
        let aniso = Regularizer::anisotropic_quadratic(vec![1.0, 4.0]).unwrap();
        let report = sublevel_geometry_probe(&aniso, "anisotropic_1_4", 2, 1.0, 4000, 12).unwrap();
        assert!(!report.ball_like);
        let ratio = report.r_in.unwrap() / report.r_out.unwrap();
        assert!(
            (ratio - 2.0).abs() <= 0.25,
            "sampled axis ratio {ratio}, ellipse oracle 2"
        );
    }

    #[test]
    fn sublevel_probe_catches_the_shifted_norm_star_failure() {
        // For c < ‖z‖ the set is a ball around z that excludes part of every
        // segment to the origin.
        let shifted = Regularizer::shifted_norm(vec![1.0, 0.0]).unwrap();
        let report = sublevel_geometry_probe(&shifted, "shifted_norm_e1", 2, 0.5, 4000, 13).unwrap();
        assert!(!report.star_shaped);
        assert!(report.star_witness.is_some());
    }

    #[test]
    fn span_experiment_radial_square_stays_in_span() {
        let square = Regularizer::Radial(RadialProfile::Square);
        let functionals = vec![dvector![1.0, 0.5, -0.25]];
        let report = representer_span_experiment(
            &square,
            &functionals,
            &ModelLoss::Squared { targets: vec![1.0] },
            5.0,
            3,
        )
        .unwrap();
        assert!(report.oracle_converged);
        assert!(
            report.span_distance <= 1e-6,
            "distance {}",
            report.span_distance
        );
        let gap = report.j_at_projection.to_f64() - report.j_at_min.to_f64();
        assert!(gap <= 1e-9, "J(projection) exceeds J(min) by {gap}");
    }

    #[test]
    fn span_experiment_frozen_anisotropic_witness() {
        // Ω = diag(1,4,9) quadratic, w₁ = (1,1,1), f(z) = (z−1)², γ = 10.
        // Stationarity gives w* = γ(γ w₁w₁ᵀ + diag α)⁻¹ w₁ =
        // (180, 45, 20)/263, hand-checked: span distance ≈ 0.652.
        let aniso = Regularizer::anisotropic_quadratic(vec![1.0, 4.0, 9.0]).unwrap();
        let functionals = vec![dvector![1.0, 1.0, 1.0]];
        let report = representer_span_experiment(
            &aniso,
            &functionals,
            &ModelLoss::Scalar {
                f: ScalarLoss::SquareAtOne,
            },
            10.0,
            4,
        )
        .unwrap();
        let expected = dvector![180.0 / 263.0, 45.0 / 263.0, 20.0 / 263.0];
        assert!(
            (&report.minimizer - &expected).norm() <= 1e-5,
            "minimizer {:?}",
            report.minimizer
        );
        assert!(report.span_distance > 0.01);
        assert!((report.span_distance - 0.6523).abs() <= 1e-3);
    }

    #[test]
    fn span_experiment_zero_gamma_sits_at_the_origin() {
        let square = Regularizer::Radial(RadialProfile::Square);
        let report = representer_span_experiment(
            &square,
            &[dvector![1.0, 0.0, 0.0]],
            &ModelLoss::Squared { targets: vec![1.0] },
            0.0,
            5,
        )
        .unwrap();
        assert!(report.minimizer.norm() <= 1e-9);
        assert!(report.span_distance <= 1e-9);
    }

    #[test]
    fn necessity_probe_matches_the_ridge_closed_form() {
        // Ω = ‖·‖², ‖x‖ = 1: λ(γ) = γ/(γ+1) and a_k = γ/(γ+1)² stays below
        // Ω(x+y) − Ω(0) = 1 + ‖y‖².
        let square = Regularizer::Radial(RadialProfile::Square);
        let x = dvector![1.0, 0.0];
        let y = dvector![0.0, 0.7];
        let gammas = gamma_schedule(20);
        let report = necessity_probe(&square, &x, &y, &gammas).unwrap();
        assert!(!report.trivially_satisfied);
        for step in &report.steps {
            let expected = step.gamma / (step.gamma + 1.0);
            assert!(
                (step.lambda - expected).abs() <= 1e-9,
                "γ = {}: λ = {} vs {expected}",
                step.gamma,
                step.lambda
            );
            assert!(step.bound_ok);
        }
        assert!(report.lambda_trend_to_one);
        assert!(report.liminf_ok);
        assert!(report.bounds_all_ok);
    }

    #[test]
    fn necessity_probe_indicator_ball_pins_lambda_at_one() {
        // r ≥ ‖x+y‖: the constraint never binds on the ray and f pins λ = 1
        // for every γ ≥ 1; both sides of the recovered inequality are 0.
        let ball = Regularizer::Radial(RadialProfile::indicator_ball(2.0).unwrap());
        let x = dvector![1.0, 0.0];
        let y = dvector![0.0, 0.5];
        let report = necessity_probe(&ball, &x, &y, &gamma_schedule(10)).unwrap();
        for step in &report.steps {
            assert!((step.lambda - 1.0).abs() <= 1e-9, "γ = {}", step.gamma);
        }
        assert_eq!(report.omega_sum, ExtReal::Finite(0.0));
        assert!(report.liminf_ok);
        assert!(report.bounds_all_ok);
    }

    #[test]
    fn necessity_probe_degenerate_y_reduces_to_ray_monotonicity() {
        let square = Regularizer::Radial(RadialProfile::Square);
        let x = dvector![1.0, 0.0];
        let y = dvector![0.0, 0.0];
        let report = necessity_probe(&square, &x, &y, &gamma_schedule(8)).unwrap();
        // Ω(x+0) = Ω(x) ≥ liminf Ω(λ_k x) since λ_k ≤ 1.
        assert!(report.liminf_ok);
    }

    #[test]
    fn necessity_probe_rejects_non_orthogonal_y() {
        let square = Regularizer::Radial(RadialProfile::Square);
        let x = dvector![1.0, 0.0];
        let y = dvector![0.5, 0.5];
        assert!(necessity_probe(&square, &x, &y, &gamma_schedule(4)).is_err());
    }

    #[test]
    fn every_nonradial_catalogue_entry_has_a_working_frozen_witness() {
        let witnessed: Vec<&str> = necessity_witnesses()
            .iter()
            .map(|w| w.catalogue_id)
            .collect();
        for entry in catalogue().into_iter().filter(|e| !e.radial) {
            assert!(
                witnessed.contains(&entry.id),
                "non-radial entry {} has no frozen witness",
                entry.id
            );
        }
        for witness in necessity_witnesses() {
            let report = representer_span_experiment(
                &witness.regularizer,
                &witness.functionals,
                &witness.loss,
                witness.gamma,
                witness.seed,
            )
            .unwrap();
            assert!(report.oracle_converged, "{}", witness.catalogue_id);
            assert!(
                report.span_distance > 0.01,
                "{}: span distance {}",
                witness.catalogue_id,
                report.span_distance
            );
            if let Some(expected) = &witness.expected_minimizer {
                assert!(
                    (&report.minimizer - expected).norm() <= 1e-5,
                    "{}: minimizer {:?} vs hand-derived {:?}",
                    witness.catalogue_id,
                    report.minimizer,
                    expected
                );
            }
        }
    }

    #[test]
    fn equivalence_harness_agrees_on_the_whole_catalogue() {
        let entries = catalogue();
        let verdicts = equivalence_harness(&entries, 10_000, 2024).unwrap();
        for v in &verdicts {
            assert!(
                v.agree,
                "{}: orthogonal {} vs radial {}",
                v.id, v.orthogonal_holds, v.radial_holds
            );
        }
        // Both positive and negative instances are present.
        assert!(verdicts.iter().any(|v| v.orthogonal_holds));
        assert!(verdicts.iter().any(|v| !v.orthogonal_holds));
    }
}
