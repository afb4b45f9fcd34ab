//! Reduction to coefficient space and the solver battery.
//!
//! Once the data functionals `L₁…L_ℓ` are represented by `w₁…w_ℓ`, every
//! candidate solution in their span is `w = Σ cᵢ wᵢ` and the objective
//! becomes a function of the coefficient vector alone:
//!
//! ```text
//! Ĵ(c) = f(Gc) + h(√(cᵀGc)),   Gᵢⱼ = ⟨wᵢ, wⱼ⟩.
//! ```
//!
//! [`ReducedProblem`] packages `G`, the loss, the radial profile and the
//! weight, and exposes both the reduced objective and the original objective
//! evaluated on the reconstructed expansion, so the reduction identity is
//! checkable on any coefficient vector.
//!
//! Solvers: closed-form ridge ([`solve_rls`]), subgradient SVM
//! ([`solve_svm`]), generalized-eigenstructure kernel PCA ([`solve_kpca`]),
//! projected-gradient norm-ball constrained losses ([`solve_ivanov`]), and
//! the 1-D scalar family ([`solve_scalar_family`]) behind the λ(γ) probes.
//! Each one is validated against the independent oracle in [`crate::oracle`].

use crate::extreal::ExtReal;
use crate::functional::{gram_matrix, LinearFunctional};
use crate::oracle;
use crate::regularizer::RadialProfile;
use crate::rkhs::KernelExpansion;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

/// Feasibility tolerance for the unit-variance constraint of the kernel PCA
/// loss: variance within this band of 1 counts as feasible (value 0), else
/// the loss is `+∞`.
pub const KPCA_FEAS_TOL: f64 = 1e-8;

/// A scalar error function `f(z)` that is uniquely minimized at `z = 1`,
/// used by the scalar regularization family `γ f(⟨w, p⟩) + Ω(w)`.
#[derive(Clone)]
pub enum ScalarLoss {
    /// `f(z) = (z − 1)²`
    SquareAtOne,
    /// `f(z) = max{0, 1−z} + max{0, 1+z/2}`, the two-point hinge combination
    /// whose unique minimum sits at `z = 1` with value `3/2`.
    HingePair,
    Custom {
        name: String,
        func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl ScalarLoss {
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            ScalarLoss::SquareAtOne => (z - 1.0) * (z - 1.0),
            ScalarLoss::HingePair => (1.0 - z).max(0.0) + (1.0 + 0.5 * z).max(0.0),
            ScalarLoss::Custom { func, .. } => func(z),
        }
    }

    /// Scan check that `f(1) < f(z)` on the documented grid
    /// `z ∈ [-10, 10]`, step `1e-3`, `z ≠ 1`.
    pub fn validate_uniquely_minimized_at_one(&self) -> Result<()> {
        let f1 = self.eval(1.0);
        if f1.is_nan() {
            return Err(Error::InvalidParameter {
                name: "scalar_loss",
                reason: "f(1) is NaN".into(),
            });
        }
        for i in -10_000..=10_000i64 {
            if i == 1000 {
                continue;
            }
            let z = i as f64 / 1000.0;
            let fz = self.eval(z);
            if fz.is_nan() || fz <= f1 {
                return Err(Error::InvalidParameter {
                    name: "scalar_loss",
                    reason: format!("not uniquely minimized at 1: f({z}) = {fz} ≤ f(1) = {f1}"),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ScalarLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarLoss::SquareAtOne => write!(f, "SquareAtOne"),
            ScalarLoss::HingePair => write!(f, "HingePair"),
            ScalarLoss::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// The error-term variant of a reduced problem.
#[derive(Debug, Clone)]
pub enum LossDescriptor {
    /// `γ Σᵢ (yᵢ − vᵢ)²` against the problem targets.
    Squared,
    /// `γ Σᵢ max{0, 1 − yᵢ vᵢ}` with labels `±1`.
    Hinge { labels: Vec<f64> },
    /// Unit empirical variance of `v` as a hard constraint
    /// (`0` when `|var(v) − 1| ≤ KPCA_FEAS_TOL`, `+∞` otherwise).
    KpcaVarianceConstraint,
    /// `γ f(v₁)` for a scalar loss uniquely minimized at 1; requires `ℓ = 1`.
    ScalarF { f: ScalarLoss },
}

/// The ℓ-dimensional image of a regularization problem under the reduction.
#[derive(Debug, Clone)]
pub struct ReducedProblem {
    functionals: Vec<LinearFunctional>,
    representers: Vec<KernelExpansion>,
    gram: DMatrix<f64>,
    pub loss: LossDescriptor,
    pub profile: RadialProfile,
    pub targets: Option<Vec<f64>>,
    pub gamma: f64,
}

/// Assembles a [`ReducedProblem`]: Gram matrix, eagerly materialized
/// representers, and the packaged objective.
pub fn reduce(
    functionals: Vec<LinearFunctional>,
    loss: LossDescriptor,
    profile: RadialProfile,
    targets: Option<Vec<f64>>,
    gamma: f64,
) -> Result<ReducedProblem> {
    if functionals.is_empty() {
        return Err(Error::InvalidParameter {
            name: "functionals",
            reason: "need at least one functional".into(),
        });
    }
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("must be a finite nonnegative real, got {gamma}"),
        });
    }
    let ell = functionals.len();
    match &loss {
        LossDescriptor::Squared => {
            let t = targets.as_ref().ok_or_else(|| Error::InvalidParameter {
                name: "targets",
                reason: "squared loss requires targets".into(),
            })?;
            if t.len() != ell {
                return Err(Error::DimensionMismatch {
                    expected: ell,
                    got: t.len(),
                });
            }
        }
        LossDescriptor::Hinge { labels } => {
            if labels.len() != ell {
                return Err(Error::DimensionMismatch {
                    expected: ell,
                    got: labels.len(),
                });
            }
            if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
                return Err(Error::InvalidParameter {
                    name: "labels",
                    reason: "hinge labels must be ±1".into(),
                });
            }
        }
        LossDescriptor::KpcaVarianceConstraint => {}
        LossDescriptor::ScalarF { .. } => {
            if ell != 1 {
                return Err(Error::InvalidParameter {
                    name: "functionals",
                    reason: format!("scalar family requires exactly one functional, got {ell}"),
                });
            }
        }
    }
    let gram = gram_matrix(&functionals)?;
    let representers = functionals.iter().map(|l| l.representer()).collect();
    Ok(ReducedProblem {
        functionals,
        representers,
        gram,
        loss,
        profile,
        targets,
        gamma,
    })
}

impl ReducedProblem {
    pub fn len(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functionals.is_empty()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn functionals(&self) -> &[LinearFunctional] {
        &self.functionals
    }

    pub fn representers(&self) -> &[KernelExpansion] {
        &self.representers
    }

    /// Loss value `f(v)` for functional values `v`, with the weight applied.
    pub fn loss_value(&self, v: &DVector<f64>) -> ExtReal {
        match &self.loss {
            LossDescriptor::Squared => {
                let targets = self.targets.as_ref().expect("validated at reduce");
                let sum: f64 = targets
                    .iter()
                    .zip(v.iter())
                    .map(|(y, vi)| (y - vi) * (y - vi))
                    .sum();
                ExtReal::Finite(self.gamma * sum)
            }
            LossDescriptor::Hinge { labels } => {
                let sum: f64 = labels
                    .iter()
                    .zip(v.iter())
                    .map(|(y, vi)| (1.0 - y * vi).max(0.0))
                    .sum();
                ExtReal::Finite(self.gamma * sum)
            }
            LossDescriptor::KpcaVarianceConstraint => {
                if (empirical_variance(v) - 1.0).abs() <= KPCA_FEAS_TOL {
                    ExtReal::Finite(0.0)
                } else {
                    ExtReal::PosInf
                }
            }
            LossDescriptor::ScalarF { f } => ExtReal::Finite(self.gamma * f.eval(v[0])),
        }
    }

    /// The reduced objective `Ĵ(c) = f(Gc) + h(√(cᵀGc))`.
    pub fn reduced_objective(&self, c: &DVector<f64>) -> ExtReal {
        let v = &self.gram * c;
        let norm_sq = c.dot(&v);
        self.loss_value(&v) + self.profile.eval(norm_sq.max(0.0).sqrt())
    }

    /// Rebuilds the expansion `w = Σ cᵢ wᵢ` from coefficients.
    pub fn reconstruct(&self, c: &DVector<f64>) -> KernelExpansion {
        let mut w = self.representers[0].kernel().zero();
        for (rep, ci) in self.representers.iter().zip(c.iter()) {
            w = w.add(&rep.scale(*ci)).expect("same kernel");
        }
        w
    }

    /// The original objective `J(w) = f(L₁w, …, L_ℓw) + h(‖w‖)` evaluated on
    /// an arbitrary expansion, through the functionals' own application path.
    pub fn original_objective(&self, w: &KernelExpansion) -> Result<ExtReal> {
        let mut v = DVector::zeros(self.len());
        for (i, l) in self.functionals.iter().enumerate() {
            v[i] = l.apply(w)?;
        }
        Ok(self.loss_value(&v) + self.profile.eval(w.norm()))
    }
}

fn empirical_variance(v: &DVector<f64>) -> f64 {
    let ell = v.len() as f64;
    let mean = v.sum() / ell;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / ell
}

/// Structured solver result.
#[derive(Debug, Clone)]
pub struct SolverOutput {
    pub coefficients: DVector<f64>,
    pub objective: ExtReal,
    /// Constraint residual where one applies (KPCA variance gap, Ivanov
    /// boundary gap), 0 for unconstrained solvers.
    pub feasibility_residual: f64,
    pub iterations: usize,
    /// Diagonal jitter that had to be added before a factorization succeeded.
    pub jitter: Option<f64>,
}

/// Regularized least squares with the square profile: solves
/// `(G + I/γ) c = y`, the stationarity system of `γ‖y − Gc‖² + cᵀGc`.
pub fn solve_rls(rp: &ReducedProblem) -> Result<SolverOutput> {
    if !matches!(rp.loss, LossDescriptor::Squared) {
        return Err(Error::DomainMismatch("solve_rls requires the squared loss".into()));
    }
    if !matches!(rp.profile, RadialProfile::Square) {
        return Err(Error::DomainMismatch("solve_rls requires the square profile".into()));
    }
    if rp.gamma <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: "ridge solve needs γ > 0".into(),
        });
    }
    let y = DVector::from_vec(rp.targets.clone().expect("validated at reduce"));
    let ell = rp.len();
    let mut system = rp.gram.clone();
    for i in 0..ell {
        system[(i, i)] += 1.0 / rp.gamma;
    }

    let mut jitter = None;
    let solution = match system.clone().cholesky() {
        Some(chol) => chol.solve(&y),
        None => {
            let eps = 1e-10 * rp.gram.trace() / ell as f64;
            let mut jittered = system.clone();
            for i in 0..ell {
                jittered[(i, i)] += eps;
            }
            jitter = Some(eps);
            match jittered.clone().cholesky() {
                Some(chol) => chol.solve(&y),
                None => {
                    let eig = nalgebra::SymmetricEigen::new(jittered);
                    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
                    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
                    return Err(Error::Singular {
                        cond: if min > 0.0 { max / min } else { f64::INFINITY },
                    });
                }
            }
        }
    };

    let residual = (&system * &solution - &y).norm();
    let scale = y.norm().max(1.0);
    if residual > 1e-10 * scale {
        return Err(Error::SolverFailure(format!(
            "linear system residual {residual:.3e} exceeds 1e-10 relative"
        )));
    }
    let objective = rp.reduced_objective(&solution);
    Ok(SolverOutput {
        coefficients: solution,
        objective,
        feasibility_residual: 0.0,
        iterations: 1,
        jitter,
    })
}

/// Iteration budget for the subgradient SVM solver.
pub const SVM_DEFAULT_ITERS: usize = 2_000_000;

/// Hinge-loss solve with the square profile by subgradient descent:
/// step `η_k = η₀ / √(k+1)` with `η₀ = 1/(γ‖G‖₂ + 1)`, iterate averaging over
/// the last half, and best-objective tracking. Returns whichever of the
/// averaged and best-seen iterates has the lower objective.
pub fn solve_svm(rp: &ReducedProblem, iterations: usize) -> Result<SolverOutput> {
    let labels = match &rp.loss {
        LossDescriptor::Hinge { labels } => labels.clone(),
        _ => {
            return Err(Error::DomainMismatch("solve_svm requires the hinge loss".into()));
        }
    };
    if !matches!(rp.profile, RadialProfile::Square) {
        return Err(Error::DomainMismatch("solve_svm requires the square profile".into()));
    }
    let ell = rp.len();
    let g = &rp.gram;
    let eta0 = 1.0 / (rp.gamma * spectral_norm(g) + 1.0);

    let mut c = DVector::zeros(ell);
    let mut avg = DVector::zeros(ell);
    let mut avg_count = 0usize;
    let mut best = c.clone();
    let mut best_obj = rp.reduced_objective(&c);

    for k in 0..iterations {
        let v = g * &c;
        // Objective pieces come almost free from the v = Gc product.
        let hinge: f64 = labels
            .iter()
            .zip(v.iter())
            .map(|(y, vi)| (1.0 - y * vi).max(0.0))
            .sum();
        let obj = ExtReal::Finite(rp.gamma * hinge + c.dot(&v));
        if obj < best_obj {
            best_obj = obj;
            best = c.clone();
        }

        // Subgradient: 2Gc − γ Σ_{i: margin violated} yᵢ G·ᵢ.
        let mut sub = &v * 2.0;
        for (i, (y, vi)) in labels.iter().zip(v.iter()).enumerate() {
            if 1.0 - y * vi > 0.0 {
                sub.axpy(-rp.gamma * y, &g.column(i).into_owned(), 1.0);
            }
        }
        let eta = eta0 / ((k + 1) as f64).sqrt();
        c.axpy(-eta, &sub, 1.0);

        if k >= iterations / 2 {
            avg += &c;
            avg_count += 1;
        }
    }

    if avg_count > 0 {
        avg /= avg_count as f64;
    }
    let avg_obj = rp.reduced_objective(&avg);
    let (coefficients, objective) = if avg_obj < best_obj {
        (avg, avg_obj)
    } else {
        (best, best_obj)
    };
    Ok(SolverOutput {
        coefficients,
        objective,
        feasibility_residual: 0.0,
        iterations,
        jitter: None,
    })
}

/// Kernel PCA: minimizes `h(‖w‖)` subject to unit empirical variance of the
/// functional values. For strictly increasing `h` this is the unit-variance
/// direction of minimal RKHS norm, computed from the eigenstructure of the
/// centered Gram matrix.
pub fn solve_kpca(rp: &ReducedProblem) -> Result<SolverOutput> {
    if !matches!(rp.loss, LossDescriptor::KpcaVarianceConstraint) {
        return Err(Error::DomainMismatch(
            "solve_kpca requires the variance-constraint loss".into(),
        ));
    }
    if !rp.profile.strictly_increasing() {
        return Err(Error::DomainMismatch(
            "solve_kpca requires a strictly increasing radial profile".into(),
        ));
    }
    let ell = rp.len();
    if ell < 2 {
        return Err(Error::InvalidParameter {
            name: "functionals",
            reason: "kernel PCA needs at least two functionals".into(),
        });
    }
    let g = rp.gram.clone();
    let eig = nalgebra::SymmetricEigen::new(g.clone());
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = lambda_max * 1e-12;

    // Range-restricted coordinates: c = U_r Λ_r^{-1/2} d gives cᵀGc = ‖d‖²
    // and cᵀ(GHG)c = dᵀAd with A below, so the minimal-norm unit-variance
    // direction is the top eigenvector of A.
    let kept: Vec<usize> = (0..ell).filter(|&i| eig.eigenvalues[i] > cutoff).collect();
    if kept.is_empty() {
        return Err(Error::Infeasible("Gram matrix is numerically zero".into()));
    }
    let r = kept.len();
    let mut basis = DMatrix::zeros(ell, r); // columns U_r Λ_r^{1/2}
    for (col, &i) in kept.iter().enumerate() {
        let scale = eig.eigenvalues[i].sqrt();
        for row in 0..ell {
            basis[(row, col)] = eig.eigenvectors[(row, i)] * scale;
        }
    }
    let centered = center_columns(&basis); // H · U_r Λ_r^{1/2}
    let a = centered.transpose() * &centered;
    let a_eig = nalgebra::SymmetricEigen::new(a.clone());
    let (mut rho, mut top) = (f64::NEG_INFINITY, 0usize);
    for i in 0..r {
        if a_eig.eigenvalues[i] > rho {
            rho = a_eig.eigenvalues[i];
            top = i;
        }
    }
    if rho <= lambda_max * 1e-10 {
        return Err(Error::Infeasible(
            "centered Gram matrix is zero: the unit-variance constraint is unreachable".into(),
        ));
    }

    // Power-iteration polish of the dominant eigenpair: the factored A can
    // be ill-conditioned enough that the QR eigensolver leaves ~1e-8 in the
    // Rayleigh quotient, which is exactly the solution's squared norm.
    let mut direction = a_eig.eigenvectors.column(top).into_owned();
    for _ in 0..64 {
        let next = &a * &direction;
        let norm = next.norm();
        if norm <= 0.0 {
            break;
        }
        direction = next / norm;
    }
    let refined = direction.dot(&(&a * &direction));
    if refined > rho {
        rho = refined;
    } else {
        direction = a_eig.eigenvectors.column(top).into_owned();
    }

    // Scale d so the variance cᵀ(GHG)c / ℓ is exactly one.
    let d = direction * ((ell as f64 / rho).sqrt());
    let mut c = DVector::zeros(ell);
    for (col, &i) in kept.iter().enumerate() {
        let coef = d[col] / eig.eigenvalues[i].sqrt();
        for row in 0..ell {
            c[row] += eig.eigenvectors[(row, i)] * coef;
        }
    }
    // Sign tie: both ±c have the same norm, keep the lexicographically
    // smaller one.
    let negated = -&c;
    if lex_smaller(&negated, &c) {
        c = negated;
    }

    let v = &rp.gram * &c;
    let variance = empirical_variance(&v);
    let objective = rp.profile.eval(c.dot(&v).max(0.0).sqrt());
    Ok(SolverOutput {
        coefficients: c,
        objective,
        feasibility_residual: (variance - 1.0).abs(),
        iterations: 1,
        jitter: None,
    })
}

/// Iteration budget for the projected-(sub)gradient Ivanov solver.
pub const IVANOV_DEFAULT_ITERS: usize = 60_000;

/// Norm-ball constrained loss minimization: `min f(Gc)` subject to
/// `cᵀGc ≤ r²`, where `r` comes from the problem's indicator profile.
/// Projected gradient for the squared loss, projected subgradient with
/// averaging for the hinge; the projection onto the Gram ellipsoid is by
/// scalar root-finding on the multiplier.
pub fn solve_ivanov(rp: &ReducedProblem, iterations: usize) -> Result<SolverOutput> {
    let radius = match rp.profile {
        RadialProfile::IndicatorBall { radius } => radius,
        _ => {
            return Err(Error::DomainMismatch(
                "solve_ivanov requires an indicator-ball profile".into(),
            ));
        }
    };
    if radius <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "radius",
            reason: "ball radius must be positive".into(),
        });
    }
    let g = &rp.gram;
    let r_sq = radius * radius;
    let project = |c: &DVector<f64>| project_onto_gram_ball(g, c, r_sq);

    let (coefficients, iterations_run) = match &rp.loss {
        LossDescriptor::Squared => {
            let y = DVector::from_vec(rp.targets.clone().expect("validated at reduce"));
            let lip = 2.0 * rp.gamma * spectral_norm(g).powi(2) + 1e-12;
            let eta = 1.0 / lip;
            let mut c = project(&DVector::zeros(rp.len()));
            for _ in 0..iterations {
                let grad = g * (&(g * &c) - &y) * (2.0 * rp.gamma);
                c = project(&(&c - &grad * eta));
            }
            (c, iterations)
        }
        LossDescriptor::Hinge { labels } => {
            let eta0 = 1.0 / (rp.gamma * spectral_norm(g) + 1.0);
            let mut c = project(&DVector::zeros(rp.len()));
            let mut avg = DVector::zeros(rp.len());
            let mut avg_count = 0usize;
            let mut best = c.clone();
            let mut best_loss = rp.loss_value(&(g * &c));
            for k in 0..iterations {
                let v = g * &c;
                let loss = rp.loss_value(&v);
                if loss < best_loss {
                    best_loss = loss;
                    best = c.clone();
                }
                let mut sub = DVector::zeros(rp.len());
                for (i, (yl, vi)) in labels.iter().zip(v.iter()).enumerate() {
                    if 1.0 - yl * vi > 0.0 {
                        sub.axpy(-rp.gamma * yl, &g.column(i).into_owned(), 1.0);
                    }
                }
                let eta = eta0 / ((k + 1) as f64).sqrt();
                c = project(&(&c - &sub * eta));
                if k >= iterations / 2 {
                    avg += &c;
                    avg_count += 1;
                }
            }
            if avg_count > 0 {
                avg /= avg_count as f64;
            }
            // The feasible set is convex, so the average is feasible too.
            if rp.loss_value(&(g * &avg)) < best_loss {
                (avg, iterations)
            } else {
                (best, iterations)
            }
        }
        _ => {
            return Err(Error::DomainMismatch(
                "solve_ivanov supports squared or hinge losses".into(),
            ));
        }
    };

    let norm_sq = coefficients.dot(&(g * &coefficients));
    let objective = rp.loss_value(&(g * &coefficients));
    Ok(SolverOutput {
        coefficients,
        objective,
        feasibility_residual: (norm_sq - r_sq).max(0.0),
        iterations: iterations_run,
        jitter: None,
    })
}

/// Result of the scalar-family solve.
#[derive(Debug, Clone, Copy)]
pub struct ScalarFamilySolution {
    pub lambda: f64,
    pub objective: ExtReal,
    /// Set when `p = 0`, in which case the problem degenerates to minimizing
    /// the regularizer alone and the solution is pinned to the origin.
    pub degenerate_origin: bool,
}

/// Search bracket for the restricted 1-D problems (`λ ∈ [-10, 10]`), wide
/// enough for every catalogue profile and loss.
pub const SCALAR_BRACKET: f64 = 10.0;

/// Minimizes `γ f(⟨w, p⟩) + h(‖w‖)` over the line `w = λ x`, `x = p/‖p‖²`,
/// which by the reduction carries a global minimizer. The 1-D objective is
/// `γ f(λ) + h(|λ|·‖x‖)`; ties resolve to the smallest λ ≥ 0.
pub fn solve_scalar_family(
    p_representer: &KernelExpansion,
    f: &ScalarLoss,
    profile: &RadialProfile,
    gamma: f64,
) -> Result<ScalarFamilySolution> {
    f.validate_uniquely_minimized_at_one()?;
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("must be a finite nonnegative real, got {gamma}"),
        });
    }
    let p_norm = p_representer.norm();
    if p_norm == 0.0 {
        return Ok(ScalarFamilySolution {
            lambda: 0.0,
            objective: ExtReal::Finite(gamma * f.eval(0.0)) + profile.eval(0.0),
            degenerate_origin: true,
        });
    }
    let x_norm = 1.0 / p_norm;
    let objective = |lambda: f64| {
        ExtReal::Finite(gamma * f.eval(lambda)) + profile.eval((lambda * x_norm).abs())
    };
    let result = oracle::minimize_scalar(objective, -SCALAR_BRACKET, SCALAR_BRACKET, 4001, 150);
    if !result.feasible {
        return Err(Error::Infeasible(
            "restricted problem is +∞ on the whole bracket".into(),
        ));
    }
    Ok(ScalarFamilySolution {
        lambda: result.argmin,
        objective: result.value,
        degenerate_origin: false,
    })
}

/// G-orthogonal projection of an arbitrary expansion onto
/// `span{w₁, …, w_ℓ}`: returns `(u, a)` with `u = Σ aᵢ wᵢ` and
/// `⟨w − u, wᵢ⟩ = 0` for all `i`.
pub fn project_onto_span(
    w: &KernelExpansion,
    rp: &ReducedProblem,
) -> Result<(KernelExpansion, DVector<f64>)> {
    let ell = rp.len();
    let mut b = DVector::zeros(ell);
    for (i, l) in rp.functionals.iter().enumerate() {
        b[i] = l.apply(w)?;
    }
    let a = pinv_solve(&rp.gram, &b);
    Ok((rp.reconstruct(&a), a))
}

/// Spectral norm of a symmetric matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    nalgebra::SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.abs()))
}

/// Minimum-norm least-squares solve of `G a = b` for symmetric PSD `G`,
/// with eigenvalues below `1e-12·λmax` treated as zero.
pub fn pinv_solve(g: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let eig = nalgebra::SymmetricEigen::new(g.clone());
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = lambda_max * 1e-12;
    let mut a = DVector::zeros(b.len());
    for i in 0..eig.eigenvalues.len() {
        let lambda = eig.eigenvalues[i];
        if lambda > cutoff {
            let u = eig.eigenvectors.column(i);
            a.axpy(u.dot(b) / lambda, &u.into_owned(), 1.0);
        }
    }
    a
}

/// Euclidean projection of `c0` onto `{c : cᵀGc ≤ r²}`: solves
/// `c(μ) = (I + μG)⁻¹ c0` for the multiplier `μ ≥ 0` that lands on the
/// boundary, by bracketing and bisection on the monotone boundary gap.
pub fn project_onto_gram_ball(g: &DMatrix<f64>, c0: &DVector<f64>, r_sq: f64) -> DVector<f64> {
    let quad = |c: &DVector<f64>| c.dot(&(g * c));
    if quad(c0) <= r_sq {
        return c0.clone();
    }
    let n = c0.len();
    let solve_mu = |mu: f64| -> DVector<f64> {
        let mut system = g * mu;
        for i in 0..n {
            system[(i, i)] += 1.0;
        }
        system
            .lu()
            .solve(c0)
            .expect("I + μG is positive definite for μ ≥ 0")
    };
    let mut hi = 1.0;
    while quad(&solve_mu(hi)) > r_sq {
        hi *= 2.0;
        if hi > 1e30 {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if quad(&solve_mu(mid)) > r_sq {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut c = solve_mu(hi);
    let q = quad(&c);
    if q > r_sq && q > 0.0 {
        // Residual bisection slack lands just outside; pull back radially.
        c *= (r_sq / q).sqrt();
    }
    c
}

fn center_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / col.len() as f64;
        for v in col.iter_mut() {
            *v -= mean;
        }
    }
    out
}

fn lex_smaller(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}
