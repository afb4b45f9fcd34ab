//! Brute-force reference minimizers.
//!
//! Every production solver in this crate is validated against an independent
//! oracle at desk scale (dimension ≤ 6). The oracle is deliberately dumb and
//! documented:
//!
//! 1. dense grid search over a box, with the tie rule "smallest value, then
//!    smallest norm, then lexicographically smallest point";
//! 2. multistart descent refinement (finite-difference gradient steps with
//!    backtracking, then a shrinking compass stencil that also handles
//!    nonsmooth kinks and `+∞` regions);
//! 3. an optional projection applied after every move, for constrained
//!    problems.
//!
//! The 1-D variant ([`minimize_scalar`]) is a grid/golden-section hybrid used
//! by the scalar-family solver and the λ(γ) probes. Ties there resolve to the
//! smallest nonnegative argument.

use crate::extreal::ExtReal;
use crate::sampling;
use nalgebra::DVector;
use rand::Rng;

/// Options for the box oracle.
#[derive(Debug, Clone)]
pub struct OracleOptions {
    /// Symmetric search box `[-half_width, half_width]^dim`.
    pub half_width: f64,
    /// Grid points per axis in the global scan.
    pub grid_per_axis: usize,
    /// Number of descent starts (best grid point, origin, and random points).
    pub starts: usize,
    /// Gradient-descent iterations per start.
    pub descent_iters: usize,
    /// Seed for the random starts.
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            half_width: 5.0,
            grid_per_axis: 21,
            starts: 32,
            descent_iters: 600,
            seed: 0,
        }
    }
}

/// Result of an oracle run.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub minimizer: DVector<f64>,
    pub value: ExtReal,
    /// False when every probed point evaluated to `+∞`.
    pub converged: bool,
}

fn better(
    value: ExtReal,
    point: &DVector<f64>,
    best_value: ExtReal,
    best_point: &DVector<f64>,
) -> bool {
    match (value, best_value) {
        (ExtReal::PosInf, _) => false,
        (ExtReal::Finite(_), ExtReal::PosInf) => true,
        (ExtReal::Finite(v), ExtReal::Finite(b)) => {
            if v < b - 1e-15 * b.abs().max(1.0) {
                return true;
            }
            if v > b + 1e-15 * b.abs().max(1.0) {
                return false;
            }
            // Tie: smaller norm, then lexicographically smaller point.
            let (np, nb) = (point.norm(), best_point.norm());
            if np < nb - 1e-12 {
                return true;
            }
            if np > nb + 1e-12 {
                return false;
            }
            for (a, b) in point.iter().zip(best_point.iter()) {
                if a < b {
                    return true;
                }
                if a > b {
                    return false;
                }
            }
            false
        }
    }
}

/// Minimizes `f` over ℝ^dim (or over `project`'s image) by grid search plus
/// multistart descent. See the module docs for the exact procedure.
pub fn minimize_box<F, P>(f: F, dim: usize, project: Option<P>, opts: &OracleOptions) -> OracleResult
where
    F: Fn(&DVector<f64>) -> ExtReal,
    P: Fn(&DVector<f64>) -> DVector<f64>,
{
    let proj = |x: &DVector<f64>| -> DVector<f64> {
        match &project {
            Some(p) => p(x),
            None => x.clone(),
        }
    };

    let mut best_point = proj(&DVector::zeros(dim));
    let mut best_value = f(&best_point);

    // Phase 1: global grid scan.
    let n = opts.grid_per_axis.max(2);
    let mut index = vec![0usize; dim];
    loop {
        let point = DVector::from_fn(dim, |i, _| {
            -opts.half_width + 2.0 * opts.half_width * index[i] as f64 / (n - 1) as f64
        });
        let point = proj(&point);
        let value = f(&point);
        if better(value, &point, best_value, &best_point) {
            best_value = value;
            best_point = point;
        }
        let mut axis = 0;
        loop {
            if axis == dim {
                break;
            }
            index[axis] += 1;
            if index[axis] < n {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
        if axis == dim {
            break;
        }
    }

    // Phase 2: multistart descent.
    let mut rng = sampling::substream(opts.seed, u64::MAX);
    let mut starts: Vec<DVector<f64>> = vec![best_point.clone(), DVector::zeros(dim)];
    while starts.len() < opts.starts {
        let random =
            DVector::from_fn(dim, |_, _| rng.gen_range(-opts.half_width..opts.half_width));
        starts.push(random);
    }
    for (index, start) in starts.into_iter().enumerate() {
        let (point, value) = descend(
            &f,
            &proj,
            start,
            opts.descent_iters,
            opts.seed.wrapping_add(index as u64),
        );
        if better(value, &point, best_value, &best_point) {
            best_value = value;
            best_point = point;
        }
    }

    OracleResult {
        converged: best_value.is_finite(),
        minimizer: best_point,
        value: best_value,
    }
}

/// Finite-difference gradient descent with backtracking, followed by a
/// shrinking stencil over coordinate, diagonal, and seeded random
/// directions. Coordinate moves alone stall on kinks that are not
/// axis-aligned (hinge objectives); the extra directions let the stencil
/// slide along them. Infinite values are treated as "worse than anything
/// finite", so the line search backs away from `+∞` regions.
fn descend<F, P>(
    f: &F,
    proj: &P,
    start: DVector<f64>,
    iters: usize,
    stencil_seed: u64,
) -> (DVector<f64>, ExtReal)
where
    F: Fn(&DVector<f64>) -> ExtReal,
    P: Fn(&DVector<f64>) -> DVector<f64>,
{
    let dim = start.len();
    let mut x = proj(&start);
    let mut fx = f(&x);

    if fx == ExtReal::PosInf {
        // Fall back to the origin when the start is infeasible.
        let origin = proj(&DVector::zeros(dim));
        let f0 = f(&origin);
        if f0 < fx {
            x = origin;
            fx = f0;
        }
    }

    let mut step = 1.0;
    for _ in 0..iters {
        let fx_val = match fx.finite() {
            Some(v) => v,
            None => break,
        };
        // Central-difference gradient; coordinates probing into +∞ fall back
        // to one-sided differences.
        let h = 1e-6;
        let mut grad = DVector::zeros(dim);
        let mut grad_ok = true;
        for i in 0..dim {
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let fp = f(&xp);
            let fm = f(&xm);
            grad[i] = match (fp.finite(), fm.finite()) {
                (Some(a), Some(b)) => (a - b) / (2.0 * h),
                (Some(a), None) => (a - fx_val) / h,
                (None, Some(b)) => (fx_val - b) / h,
                (None, None) => {
                    grad_ok = false;
                    0.0
                }
            };
        }
        let gnorm = grad.norm();
        if !grad_ok || gnorm <= 1e-12 {
            break;
        }
        // Backtracking on the projected step.
        let mut improved = false;
        let mut trial_step = step;
        for _ in 0..40 {
            let candidate = proj(&(&x - &grad * (trial_step / gnorm.max(1.0))));
            let fc = f(&candidate);
            if fc < fx {
                x = candidate;
                fx = fc;
                step = trial_step * 1.5;
                improved = true;
                break;
            }
            trial_step *= 0.5;
        }
        if !improved {
            break;
        }
    }

    // Stencil directions: coordinates, pairwise diagonals, and a few seeded
    // random units.
    let mut directions: Vec<DVector<f64>> = Vec::new();
    for i in 0..dim {
        let mut e = DVector::zeros(dim);
        e[i] = 1.0;
        directions.push(e);
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            for sign in [1.0, -1.0] {
                let mut d = DVector::zeros(dim);
                d[i] = std::f64::consts::FRAC_1_SQRT_2;
                d[j] = sign * std::f64::consts::FRAC_1_SQRT_2;
                directions.push(d);
            }
        }
    }
    let mut rng = sampling::substream(stencil_seed, u64::MAX - 1);
    for _ in 0..8 {
        directions.push(sampling::unit_vector(&mut rng, dim));
    }

    // Polish with geometrically shrinking steps over the stencil.
    let mut stencil = 0.5 * (1.0 + x.norm());
    while stencil > 1e-13 * (1.0 + x.norm()) {
        let mut moved = true;
        while moved {
            moved = false;
            for direction in &directions {
                for sign in [1.0, -1.0] {
                    let candidate = proj(&(&x + direction * (sign * stencil)));
                    let fc = f(&candidate);
                    if fc < fx {
                        x = candidate;
                        fx = fc;
                        moved = true;
                    }
                }
            }
        }
        stencil *= 0.35;
    }

    (x, fx)
}

/// Result of the 1-D hybrid minimizer.
#[derive(Debug, Clone, Copy)]
pub struct ScalarMinimum {
    pub argmin: f64,
    pub value: ExtReal,
    /// False when the whole bracket evaluated to `+∞`.
    pub feasible: bool,
}

/// Minimizes `g` on `[lo, hi]` by a dense scan followed by golden-section
/// refinement inside the best cell. Among scan ties the smallest nonnegative
/// argument wins (then the one closest to zero).
pub fn minimize_scalar<G>(g: G, lo: f64, hi: f64, grid: usize, refine_iters: usize) -> ScalarMinimum
where
    G: Fn(f64) -> ExtReal,
{
    assert!(hi > lo && grid >= 2);
    let step = (hi - lo) / (grid - 1) as f64;
    let mut best_t = lo;
    let mut best_v = g(lo);
    let tie_tol = 1e-12;
    for i in 1..grid {
        let t = lo + step * i as f64;
        let v = g(t);
        let is_better = match (v, best_v) {
            (ExtReal::PosInf, _) => false,
            (ExtReal::Finite(_), ExtReal::PosInf) => true,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                if a < b - tie_tol * b.abs().max(1.0) {
                    true
                } else if a > b + tie_tol * b.abs().max(1.0) {
                    false
                } else {
                    // Tie: prefer the smallest nonnegative argument.
                    tie_rank(t) < tie_rank(best_t)
                }
            }
        };
        if is_better {
            best_t = t;
            best_v = v;
        }
    }
    if best_v == ExtReal::PosInf {
        return ScalarMinimum {
            argmin: best_t,
            value: best_v,
            feasible: false,
        };
    }

    // Golden-section refinement in the cell around the scan winner.
    let mut a = (best_t - step).max(lo);
    let mut b = (best_t + step).min(hi);
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    for _ in 0..refine_iters {
        // +∞ counts as larger than any finite value, which steers the
        // interval back into the feasible part of the cell.
        if fc < fd || (fc == fd && c.abs() < d.abs()) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = g(d);
        }
    }
    let mid = 0.5 * (a + b);
    let fmid = g(mid);
    let (mut argmin, mut value) = [(mid, fmid), (best_t, best_v), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|(ta, va), (tb, vb)| {
            va.partial_cmp(vb)
                .unwrap()
                .then(tie_rank(*ta).partial_cmp(&tie_rank(*tb)).unwrap())
        })
        .unwrap();

    // Value-only search stalls on the √ε plateau around a smooth minimum;
    // two parabolic-fit steps with shrinking spacing recover the remaining
    // digits. The fit is only accepted when the stencil is locally convex
    // and the vertex does not increase the value, so kinked objectives are
    // left where the golden section put them.
    for spacing_scale in [1e-4, 1e-6] {
        let s = spacing_scale * argmin.abs().max(1.0);
        let (f0, fp, fm) = (g(argmin), g(argmin + s), g(argmin - s));
        if let (ExtReal::Finite(f0v), ExtReal::Finite(fpv), ExtReal::Finite(fmv)) = (f0, fp, fm) {
            let curvature = fpv + fmv - 2.0 * f0v;
            if curvature > 0.0 {
                let vertex = argmin - 0.5 * s * (fpv - fmv) / curvature;
                if (vertex - argmin).abs() <= s {
                    let fv = g(vertex);
                    if fv <= f0 {
                        argmin = vertex;
                        value = fv;
                    }
                }
            }
        }
    }

    ScalarMinimum {
        argmin,
        value,
        feasible: true,
    }
}

// Rank for the "smallest λ ≥ 0 first" tie rule: nonnegative arguments sort
// below negative ones, each group by distance from zero.
fn tie_rank(t: f64) -> (u8, f64) {
    if t >= 0.0 {
        (0, t)
    } else {
        (1, -t)
    }
}
