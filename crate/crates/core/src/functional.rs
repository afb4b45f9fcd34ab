//! Bounded linear functionals on the RKHS and their representers.
//!
//! For a bounded linear functional `L` the representer is the element `K_L`
//! with `⟨w, K_L⟩ = L w` for all `w`; it is computable pointwise as
//! `K_L(x) = L K_x`. All three supported variants have representers that are
//! finite kernel expansions, which are materialized eagerly so every
//! downstream object stays inside the span of kernel sections:
//!
//! * point evaluation at `x` → the kernel section `K_x`;
//! * expectation under a discrete probability measure → the weighted sum of
//!   sections at the atoms;
//! * a sampled convolution `w ↦ Σ_k u(s_k) w(x − s_k) Δs` → sections at the
//!   shifted grid points, weighted by `u(s_k) Δs`.
//!
//! The convolution variant is the rectangle-rule discretization of an
//! integral functional; the grid is part of the functional's identity, so a
//! given configuration reproduces bit-for-bit.

use crate::rkhs::{Kernel, KernelExpansion};
use crate::{Error, Result};
use nalgebra::DMatrix;

/// A discrete probability measure: distinct atoms with nonnegative weights
/// summing to 1 (within 1e-12).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: atoms.len(),
                got: weights.len(),
            });
        }
        if atoms.is_empty() {
            return Err(Error::InvalidParameter {
                name: "atoms",
                reason: "measure must have at least one atom".into(),
            });
        }
        let dim = atoms[0].len();
        for a in &atoms {
            if a.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.len(),
                });
            }
        }
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                if atoms[i] == atoms[j] {
                    return Err(Error::InvalidParameter {
                        name: "atoms",
                        reason: format!("atoms {i} and {j} coincide"),
                    });
                }
            }
        }
        if weights.iter().any(|&w| w < 0.0 || w.is_nan()) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "weights must be nonnegative".into(),
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: format!("weights must sum to 1, got {total}"),
            });
        }
        Ok(DiscreteMeasure { atoms, weights })
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// A signal sampled on a uniform 1-D grid, for convolution functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    grid: Vec<f64>,
    values: Vec<f64>,
    spacing: f64,
}

impl SampledSignal {
    /// The grid must be uniform; its spacing becomes the quadrature weight.
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if grid.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "signal_grid",
                reason: "need at least two grid points".into(),
            });
        }
        let spacing = grid[1] - grid[0];
        if spacing <= 0.0 || spacing.is_nan() {
            return Err(Error::InvalidParameter {
                name: "signal_grid",
                reason: "grid must be strictly increasing".into(),
            });
        }
        for w in grid.windows(2) {
            let step = w[1] - w[0];
            if (step - spacing).abs() > 1e-9 * spacing.abs().max(1.0) {
                return Err(Error::InvalidParameter {
                    name: "signal_grid",
                    reason: "grid must be uniform".into(),
                });
            }
        }
        Ok(SampledSignal {
            grid,
            values,
            spacing,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

/// A bounded linear functional on the RKHS of `kernel`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFunctional {
    kernel: Kernel,
    variant: FunctionalVariant,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalVariant {
    /// `L w = w(x)`
    PointEval { point: Vec<f64> },
    /// `L w = Σ_k u(s_k) w(x − s_k) Δs`, a rectangle-rule convolution at `x`.
    Convolution {
        signal: SampledSignal,
        eval_point: Vec<f64>,
    },
    /// `L w = Σ_j p_j w(x_j)`
    Expectation { measure: DiscreteMeasure },
}

impl LinearFunctional {
    pub fn point_eval(kernel: Kernel, point: Vec<f64>) -> Result<Self> {
        if point.len() != kernel.input_dim {
            return Err(Error::DimensionMismatch {
                expected: kernel.input_dim,
                got: point.len(),
            });
        }
        Ok(LinearFunctional {
            kernel,
            variant: FunctionalVariant::PointEval { point },
        })
    }

    /// Convolution functionals act on 1-D signal domains.
    pub fn convolution(kernel: Kernel, signal: SampledSignal, eval_point: Vec<f64>) -> Result<Self> {
        if kernel.input_dim != 1 {
            return Err(Error::DomainMismatch(
                "convolution functionals require input_dim = 1".into(),
            ));
        }
        if eval_point.len() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: eval_point.len(),
            });
        }
        Ok(LinearFunctional {
            kernel,
            variant: FunctionalVariant::Convolution { signal, eval_point },
        })
    }

    pub fn expectation(kernel: Kernel, measure: DiscreteMeasure) -> Result<Self> {
        for a in measure.atoms() {
            if a.len() != kernel.input_dim {
                return Err(Error::DimensionMismatch {
                    expected: kernel.input_dim,
                    got: a.len(),
                });
            }
        }
        Ok(LinearFunctional {
            kernel,
            variant: FunctionalVariant::Expectation { measure },
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn variant(&self) -> &FunctionalVariant {
        &self.variant
    }

    /// Applies `L` to an expansion.
    pub fn apply(&self, w: &KernelExpansion) -> Result<f64> {
        if w.kernel() != &self.kernel {
            return Err(Error::KernelMismatch);
        }
        match &self.variant {
            FunctionalVariant::PointEval { point } => w.eval(point),
            FunctionalVariant::Convolution { signal, eval_point } => {
                let x = eval_point[0];
                let mut acc = 0.0;
                for (s, u) in signal.grid().iter().zip(signal.values()) {
                    acc += u * w.eval(&[x - s])? * signal.spacing();
                }
                Ok(acc)
            }
            FunctionalVariant::Expectation { measure } => {
                let mut acc = 0.0;
                for (atom, p) in measure.atoms().iter().zip(measure.weights()) {
                    acc += p * w.eval(atom)?;
                }
                Ok(acc)
            }
        }
    }

    /// The representer `K_L`, materialized as an expansion. Satisfies
    /// `⟨w, representer(L)⟩ = L w` for every expansion `w`.
    pub fn representer(&self) -> KernelExpansion {
        match &self.variant {
            FunctionalVariant::PointEval { point } => self
                .kernel
                .section(point)
                .expect("point validated at construction"),
            FunctionalVariant::Convolution { signal, eval_point } => {
                let x = eval_point[0];
                let centers: Vec<Vec<f64>> = signal.grid().iter().map(|s| vec![x - s]).collect();
                let coefficients: Vec<f64> = signal
                    .values()
                    .iter()
                    .map(|u| u * signal.spacing())
                    .collect();
                KernelExpansion::new(self.kernel, centers, coefficients)
                    .expect("centers validated at construction")
            }
            FunctionalVariant::Expectation { measure } => KernelExpansion::new(
                self.kernel,
                measure.atoms().to_vec(),
                measure.weights().to_vec(),
            )
            .expect("atoms validated at construction"),
        }
    }
}

/// Gram matrix of representers, `Gᵢⱼ = ⟨K_{Lᵢ}, K_{Lⱼ}⟩ = Lᵢ K_{Lⱼ}`.
/// Symmetric and positive semidefinite.
pub fn gram_matrix(functionals: &[LinearFunctional]) -> Result<DMatrix<f64>> {
    if functionals.is_empty() {
        return Ok(DMatrix::zeros(0, 0));
    }
    let kernel = functionals[0].kernel();
    for f in functionals {
        if f.kernel() != kernel {
            return Err(Error::KernelMismatch);
        }
    }
    let representers: Vec<KernelExpansion> =
        functionals.iter().map(|f| f.representer()).collect();
    let n = functionals.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = functionals[i].apply(&representers[j])?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::substream;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn random_expansion(kernel: Kernel, terms: usize, seed: u64) -> KernelExpansion {
        let mut rng = substream(seed, 0);
        let centers: Vec<Vec<f64>> = (0..terms)
            .map(|_| (0..kernel.input_dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let coefficients: Vec<f64> = (0..terms).map(|_| rng.gen_range(-1.5..1.5)).collect();
        KernelExpansion::new(kernel, centers, coefficients).unwrap()
    }

    #[test]
    fn point_eval_on_section_reproduces_the_kernel() {
        let k = Kernel::gaussian(1.0, 2).unwrap();
        let z = [0.3, -0.8];
        let x = vec![1.0, 0.25];
        let l = LinearFunctional::point_eval(k, x.clone()).unwrap();
        let w = k.section(&z).unwrap();
        assert_eq!(l.apply(&w).unwrap(), k.eval(&z, &x).unwrap());
    }

    #[test]
    fn one_atom_expectation_equals_point_eval() {
        let k = Kernel::polynomial(2, 1.0, 1).unwrap();
        let x = vec![0.7];
        let point = LinearFunctional::point_eval(k, x.clone()).unwrap();
        let delta = LinearFunctional::expectation(
            k,
            DiscreteMeasure::new(vec![x], vec![1.0]).unwrap(),
        )
        .unwrap();
        let w = random_expansion(k, 4, 11);
        assert_relative_eq!(
            point.apply(&w).unwrap(),
            delta.apply(&w).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn point_eval_representer_is_the_section() {
        let k = Kernel::gaussian(2.0, 1).unwrap();
        let l = LinearFunctional::point_eval(k, vec![0.4]).unwrap();
        assert_eq!(l.representer(), k.section(&[0.4]).unwrap());
        // ⟨K_L, K_L⟩ = K(x,x) = 1 for the gaussian.
        let r = l.representer();
        assert_eq!(r.inner_product(&r).unwrap(), 1.0);
    }

    #[test]
    fn expectation_representer_mixes_sections() {
        let k = Kernel::gaussian(1.0, 1).unwrap();
        let measure =
            DiscreteMeasure::new(vec![vec![-1.0], vec![1.0]], vec![0.5, 0.5]).unwrap();
        let l = LinearFunctional::expectation(k, measure).unwrap();
        let expected = k
            .section(&[-1.0])
            .unwrap()
            .scale(0.5)
            .add(&k.section(&[1.0]).unwrap().scale(0.5))
            .unwrap();
        let x = [0.3];
        assert_relative_eq!(
            l.representer().eval(&x).unwrap(),
            expected.eval(&x).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn box_convolution_of_near_constant_expansion() {
        // u = box of height 1 on [0,1] at step 0.01 applied to an expansion
        // that is nearly constant over the involved window; the result is
        // close to value·∫u = value. Oracle: rectangle quadrature at double
        // resolution.
        let k = Kernel::gaussian(500.0, 1).unwrap();
        let w = k.section(&[0.0]).unwrap().scale(0.7);
        // Left-endpoint rectangle samples: 100 cells of width 0.01 tile [0,1].
        let grid: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let values = vec![1.0; grid.len()];
        let signal = SampledSignal::new(grid, values).unwrap();
        let l = LinearFunctional::convolution(k, signal, vec![0.5]).unwrap();
        let got = l.apply(&w).unwrap();

        let fine_grid: Vec<f64> = (0..200).map(|i| i as f64 / 200.0).collect();
        let oracle: f64 = fine_grid
            .iter()
            .map(|s| 1.0 * w.eval(&[0.5 - s]).unwrap() * 0.005)
            .sum();
        assert!((got - oracle).abs() <= 1e-3, "got {got}, oracle {oracle}");
        assert!((got - 0.7).abs() <= 2e-2);
    }

    #[test]
    fn riesz_consistency_for_all_variants() {
        let k = Kernel::gaussian(1.0, 1).unwrap();
        let functionals = [
            LinearFunctional::point_eval(k, vec![0.2]).unwrap(),
            LinearFunctional::expectation(
                k,
                DiscreteMeasure::new(vec![vec![-0.5], vec![0.5], vec![1.5]], vec![0.2, 0.5, 0.3])
                    .unwrap(),
            )
            .unwrap(),
            LinearFunctional::convolution(
                k,
                SampledSignal::new(
                    (0..=20).map(|i| i as f64 / 20.0).collect(),
                    (0..=20).map(|i| ((i as f64) / 20.0).sin() + 1.0).collect(),
                )
                .unwrap(),
                vec![0.3],
            )
            .unwrap(),
        ];
        for (fi, l) in functionals.iter().enumerate() {
            let r = l.representer();
            for trial in 0..100 {
                let w = random_expansion(k, 5, 1000 + 100 * fi as u64 + trial);
                let lhs = l.apply(&w).unwrap();
                let rhs = w.inner_product(&r).unwrap();
                let tol = 1e-9 * lhs.abs().max(1.0);
                assert!(
                    (lhs - rhs).abs() <= tol,
                    "variant {fi}: apply {lhs} vs inner product {rhs}"
                );
            }
        }
    }

    #[test]
    fn representer_pointwise_equals_functional_of_sections() {
        // K_L(x) = L K_x for every variant, on sampled x.
        let k = Kernel::gaussian(1.2, 1).unwrap();
        let functionals = [
            LinearFunctional::point_eval(k, vec![0.4]).unwrap(),
            LinearFunctional::expectation(
                k,
                DiscreteMeasure::new(vec![vec![-0.3], vec![0.9]], vec![0.35, 0.65]).unwrap(),
            )
            .unwrap(),
            LinearFunctional::convolution(
                k,
                SampledSignal::new(
                    (0..15).map(|i| i as f64 * 0.1).collect(),
                    (0..15).map(|i| 0.5 + (i as f64 * 0.3).cos()).collect(),
                )
                .unwrap(),
                vec![0.2],
            )
            .unwrap(),
        ];
        for (fi, l) in functionals.iter().enumerate() {
            let representer = l.representer();
            for i in -8..=8 {
                let x = [i as f64 * 0.25];
                let lhs = representer.eval(&x).unwrap();
                let rhs = l.apply(&k.section(&x).unwrap()).unwrap();
                assert!(
                    (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
                    "variant {fi} at x = {x:?}: K_L(x) = {lhs} vs L K_x = {rhs}"
                );
            }
        }
    }

    #[test]
    fn linearity_of_apply() {
        let k = Kernel::polynomial(3, 0.5, 1).unwrap();
        let l = LinearFunctional::expectation(
            k,
            DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![0.25, 0.75]).unwrap(),
        )
        .unwrap();
        let u = random_expansion(k, 3, 5);
        let v = random_expansion(k, 4, 6);
        let combo = u.scale(1.3).add(&v.scale(-0.4)).unwrap();
        assert_relative_eq!(
            l.apply(&combo).unwrap(),
            1.3 * l.apply(&u).unwrap() - 0.4 * l.apply(&v).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn gram_of_point_evals_is_the_kernel_matrix() {
        let k = Kernel::gaussian(1.0, 2).unwrap();
        let points = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, -1.5]];
        let ls: Vec<_> = points
            .iter()
            .map(|p| LinearFunctional::point_eval(k, p.clone()).unwrap())
            .collect();
        let g = gram_matrix(&ls).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(
                    g[(i, j)],
                    k.eval(&points[i], &points[j]).unwrap(),
                    max_relative = 1e-14
                );
            }
        }
    }

    #[test]
    fn gram_of_single_functional_is_its_squared_norm() {
        let k = Kernel::gaussian(1.0, 1).unwrap();
        let l = LinearFunctional::expectation(
            k,
            DiscreteMeasure::new(vec![vec![0.0], vec![2.0]], vec![0.5, 0.5]).unwrap(),
        )
        .unwrap();
        let g = gram_matrix(std::slice::from_ref(&l)).unwrap();
        let r = l.representer();
        assert_relative_eq!(g[(0, 0)], r.inner_product(&r).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn duplicated_functionals_give_rank_one_gram() {
        let k = Kernel::linear(2).unwrap();
        let l = LinearFunctional::point_eval(k, vec![1.0, 2.0]).unwrap();
        let g = gram_matrix(&[l.clone(), l]).unwrap();
        assert_relative_eq!(g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gram_agrees_between_apply_and_inner_product_routes() {
        let k = Kernel::gaussian(0.8, 1).unwrap();
        let ls = vec![
            LinearFunctional::point_eval(k, vec![0.1]).unwrap(),
            LinearFunctional::expectation(
                k,
                DiscreteMeasure::new(vec![vec![-1.0], vec![0.4]], vec![0.6, 0.4]).unwrap(),
            )
            .unwrap(),
            LinearFunctional::convolution(
                k,
                SampledSignal::new(vec![0.0, 0.1, 0.2, 0.3], vec![1.0, 2.0, 2.0, 1.0]).unwrap(),
                vec![0.0],
            )
            .unwrap(),
        ];
        let g = gram_matrix(&ls).unwrap();
        let reps: Vec<_> = ls.iter().map(|l| l.representer()).collect();
        for i in 0..3 {
            for j in 0..3 {
                let direct = reps[i].inner_product(&reps[j]).unwrap();
                assert!(
                    (g[(i, j)] - direct).abs() <= 1e-9 * direct.abs().max(1.0),
                    "entry ({i},{j}): {} vs {}",
                    g[(i, j)],
                    direct
                );
            }
        }
    }

    #[test]
    fn measure_validation() {
        assert!(DiscreteMeasure::new(vec![vec![0.0]], vec![0.5]).is_err()); // not normalized
        assert!(DiscreteMeasure::new(vec![vec![0.0], vec![0.0]], vec![0.5, 0.5]).is_err()); // dupes
        assert!(DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![1.5, -0.5]).is_err()); // negative
        assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
    }

    #[test]
    fn signal_validation() {
        assert!(SampledSignal::new(vec![0.0, 0.1, 0.3], vec![1.0, 1.0, 1.0]).is_err()); // non-uniform
        assert!(SampledSignal::new(vec![0.0], vec![1.0]).is_err()); // too short
        assert!(SampledSignal::new(vec![0.1, 0.0], vec![1.0, 1.0]).is_err()); // decreasing
    }

    #[test]
    fn kernel_mismatch_is_rejected() {
        let k1 = Kernel::gaussian(1.0, 1).unwrap();
        let k2 = Kernel::linear(1).unwrap();
        let l = LinearFunctional::point_eval(k1, vec![0.0]).unwrap();
        let w = k2.section(&[0.0]).unwrap();
        assert!(matches!(l.apply(&w), Err(Error::KernelMismatch)));
        let l2 = LinearFunctional::point_eval(k2, vec![0.0]).unwrap();
        assert!(matches!(gram_matrix(&[l, l2]), Err(Error::KernelMismatch)));
    }
}
