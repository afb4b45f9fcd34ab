//! Kernels, kernel sections, and finite kernel expansions.
//!
//! Every element of the RKHS that this toolkit touches is a finite expansion
//! `w = Σᵢ cᵢ K_{zᵢ}` over kernel sections. That is exactly the subspace the
//! representer reduction certifies as sufficient, so no completion machinery
//! is needed: evaluation, inner products, and norms are all finite sums over
//! the kernel.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Kernel family of a concrete RKHS.
///
/// The three families cover the RKHS dimensions of interest: infinite
/// (gaussian), finite but nontrivial (polynomial), and the Euclidean case
/// (linear).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    /// `K(x,y) = exp(-‖x−y‖² / (2 width²))`
    Gaussian { width: f64 },
    /// `K(x,y) = (⟨x,y⟩ + offset)^degree`
    Polynomial { degree: u32, offset: f64 },
    /// `K(x,y) = ⟨x,y⟩`
    Linear,
}

/// A positive-semidefinite kernel on `ℝ^input_dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    #[serde(flatten)]
    pub family: KernelFamily,
    pub input_dim: usize,
}

impl Kernel {
    pub fn gaussian(width: f64, input_dim: usize) -> Result<Self> {
        if width <= 0.0 || !width.is_finite() {
            return Err(Error::InvalidParameter {
                name: "width",
                reason: format!("must be a positive real, got {width}"),
            });
        }
        Self::validated(KernelFamily::Gaussian { width }, input_dim)
    }

    pub fn polynomial(degree: u32, offset: f64, input_dim: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParameter {
                name: "degree",
                reason: "must be a positive integer".into(),
            });
        }
        if offset < 0.0 || !offset.is_finite() {
            return Err(Error::InvalidParameter {
                name: "offset",
                reason: format!("must be a nonnegative real, got {offset}"),
            });
        }
        Self::validated(KernelFamily::Polynomial { degree, offset }, input_dim)
    }

    pub fn linear(input_dim: usize) -> Result<Self> {
        Self::validated(KernelFamily::Linear, input_dim)
    }

    fn validated(family: KernelFamily, input_dim: usize) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidParameter {
                name: "input_dim",
                reason: "must be a positive integer".into(),
            });
        }
        Ok(Kernel { family, input_dim })
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Evaluates `K(x, y)`. Symmetric in its arguments.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Gaussian { width } => {
                let sq_dist: f64 = x
                    .iter()
                    .zip(y.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (-sq_dist / (2.0 * width * width)).exp()
            }
            KernelFamily::Polynomial { degree, offset } => {
                (dot(x, y) + offset).powi(degree as i32)
            }
            KernelFamily::Linear => dot(x, y),
        }
    }

    /// The kernel section `K_x`, as a one-term expansion.
    pub fn section(&self, x: &[f64]) -> Result<KernelExpansion> {
        self.check_point(x)?;
        Ok(KernelExpansion {
            kernel: *self,
            centers: vec![x.to_vec()],
            coefficients: vec![1.0],
        })
    }

    /// The zero element of the RKHS (empty expansion).
    pub fn zero(&self) -> KernelExpansion {
        KernelExpansion {
            kernel: *self,
            centers: Vec::new(),
            coefficients: Vec::new(),
        }
    }

    /// Kernel matrix `[K(xᵢ, xⱼ)]` of a point list.
    pub fn matrix(&self, points: &[Vec<f64>]) -> Result<nalgebra::DMatrix<f64>> {
        for p in points {
            self.check_point(p)?;
        }
        let n = points.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.eval_unchecked(&points[i], &points[j]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

/// A finite kernel expansion `w = Σᵢ cᵢ K_{zᵢ}`.
///
/// Expansions are immutable values; [`add`](KernelExpansion::add) and
/// [`scale`](KernelExpansion::scale) produce new expansions by concatenating
/// center lists without simplification, so numerical results never depend on
/// coefficient compaction. [`compacted`](KernelExpansion::compacted) merges
/// duplicate centers as a separate, optional normalization step.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelExpansion {
    kernel: Kernel,
    centers: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
}

impl KernelExpansion {
    pub fn new(kernel: Kernel, centers: Vec<Vec<f64>>, coefficients: Vec<f64>) -> Result<Self> {
        if centers.len() != coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: centers.len(),
                got: coefficients.len(),
            });
        }
        for c in &centers {
            kernel.check_point(c)?;
        }
        Ok(KernelExpansion {
            kernel,
            centers,
            coefficients,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn num_terms(&self) -> usize {
        self.centers.len()
    }

    /// Evaluates `w(x) = Σᵢ cᵢ K(zᵢ, x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.kernel.check_point(x)?;
        Ok(self
            .centers
            .iter()
            .zip(&self.coefficients)
            .map(|(z, c)| c * self.kernel.eval_unchecked(z, x))
            .sum())
    }

    /// Inner product `⟨u, v⟩ = Σᵢⱼ aᵢ bⱼ K(zᵢ, z'ⱼ)`.
    pub fn inner_product(&self, other: &KernelExpansion) -> Result<f64> {
        if self.kernel != other.kernel {
            return Err(Error::KernelMismatch);
        }
        let mut acc = 0.0;
        for (zi, ai) in self.centers.iter().zip(&self.coefficients) {
            for (zj, bj) in other.centers.iter().zip(&other.coefficients) {
                acc += ai * bj * self.kernel.eval_unchecked(zi, zj);
            }
        }
        Ok(acc)
    }

    /// RKHS norm `sqrt(max(0, ⟨w,w⟩))`. The clamp absorbs the numerical
    /// floor of Gram arithmetic; ⟨w,w⟩ is nonnegative in exact arithmetic.
    pub fn norm(&self) -> f64 {
        self.inner_product(self)
            .expect("same kernel by construction")
            .max(0.0)
            .sqrt()
    }

    /// `self + other`, by concatenation.
    pub fn add(&self, other: &KernelExpansion) -> Result<KernelExpansion> {
        if self.kernel != other.kernel {
            return Err(Error::KernelMismatch);
        }
        let mut centers = self.centers.clone();
        centers.extend_from_slice(&other.centers);
        let mut coefficients = self.coefficients.clone();
        coefficients.extend_from_slice(&other.coefficients);
        Ok(KernelExpansion {
            kernel: self.kernel,
            centers,
            coefficients,
        })
    }

    /// `factor · self`.
    pub fn scale(&self, factor: f64) -> KernelExpansion {
        KernelExpansion {
            kernel: self.kernel,
            centers: self.centers.clone(),
            coefficients: self.coefficients.iter().map(|c| factor * c).collect(),
        }
    }

    /// Merges coefficients of bitwise-identical centers and drops zero terms.
    pub fn compacted(&self) -> KernelExpansion {
        let mut centers: Vec<Vec<f64>> = Vec::new();
        let mut coefficients: Vec<f64> = Vec::new();
        for (z, c) in self.centers.iter().zip(&self.coefficients) {
            if let Some(idx) = centers.iter().position(|existing| existing == z) {
                coefficients[idx] += c;
            } else {
                centers.push(z.clone());
                coefficients.push(*c);
            }
        }
        let kept: Vec<usize> = (0..centers.len())
            .filter(|&i| coefficients[i] != 0.0)
            .collect();
        KernelExpansion {
            kernel: self.kernel,
            centers: kept.iter().map(|&i| centers[i].clone()).collect(),
            coefficients: kept.iter().map(|&i| coefficients[i]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_kernel_is_dot_product() {
        let k = Kernel::linear(2).unwrap();
        assert_eq!(k.eval(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
    }

    #[test]
    fn gaussian_at_equal_points_is_one() {
        for width in [0.3, 1.0, 7.5] {
            let k = Kernel::gaussian(width, 3).unwrap();
            let x = [0.4, -1.2, 2.0];
            assert_eq!(k.eval(&x, &x).unwrap(), 1.0);
        }
    }

    #[test]
    fn gaussian_matches_documented_formula() {
        // K(x,y) = exp(-‖x−y‖²/2) at width 1; hand value for x=0, y=2.
        let k = Kernel::gaussian(1.0, 1).unwrap();
        let got = k.eval(&[0.0], &[2.0]).unwrap();
        assert_relative_eq!(got, (-2.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn polynomial_kernel_value() {
        let k = Kernel::polynomial(2, 1.0, 2).unwrap();
        // (1*3 + 2*4 + 1)^2 = 144
        assert_eq!(k.eval(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 144.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let k = Kernel::linear(2).unwrap();
        assert!(matches!(
            k.eval(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(Kernel::gaussian(0.0, 1).is_err());
        assert!(Kernel::gaussian(-1.0, 1).is_err());
        assert!(Kernel::polynomial(0, 1.0, 1).is_err());
        assert!(Kernel::polynomial(2, -0.5, 1).is_err());
        assert!(Kernel::linear(0).is_err());
    }

    #[test]
    fn empty_expansion_evaluates_to_zero() {
        let k = Kernel::gaussian(1.0, 2).unwrap();
        let w = k.zero();
        assert_eq!(w.eval(&[0.3, 0.4]).unwrap(), 0.0);
        assert_eq!(w.norm(), 0.0);
    }

    #[test]
    fn single_section_is_the_kernel_itself() {
        let k = Kernel::gaussian(0.7, 1).unwrap();
        let s = k.section(&[0.5]).unwrap();
        let x = [1.3];
        assert_eq!(s.eval(&x).unwrap(), k.eval(&[0.5], &x).unwrap());
    }

    #[test]
    fn evaluation_is_linear_in_terms() {
        let k = Kernel::polynomial(3, 0.5, 2).unwrap();
        let a = k.section(&[1.0, 0.0]).unwrap().scale(2.0);
        let b = k.section(&[0.0, -1.0]).unwrap().scale(-0.5);
        let sum = a.add(&b).unwrap();
        let x = [0.2, 0.9];
        assert_relative_eq!(
            sum.eval(&x).unwrap(),
            a.eval(&x).unwrap() + b.eval(&x).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn sections_reproduce_the_kernel_under_inner_product() {
        let k = Kernel::gaussian(1.5, 2).unwrap();
        let x = [0.1, 0.2];
        let y = [-0.7, 1.1];
        let sx = k.section(&x).unwrap();
        let sy = k.section(&y).unwrap();
        assert_eq!(sx.inner_product(&sy).unwrap(), k.eval(&x, &y).unwrap());
    }

    #[test]
    fn difference_of_equal_sections_has_zero_norm() {
        let k = Kernel::gaussian(1.0, 1).unwrap();
        let s = k.section(&[0.4]).unwrap();
        let zero = s.add(&s.scale(-1.0)).unwrap();
        assert!(zero.norm() <= 1e-12);
    }

    #[test]
    fn linear_kernel_inner_product_matches_feature_map() {
        // For the linear kernel the feature map is the identity, so
        // ⟨u, v⟩ must equal the dot product of Σ aᵢ zᵢ and Σ bⱼ z'ⱼ.
        let k = Kernel::linear(3).unwrap();
        let centers_u = vec![vec![1.0, 0.5, -2.0], vec![0.0, 3.0, 1.0], vec![2.0, 2.0, 2.0]];
        let coeff_u = vec![0.3, -1.1, 0.7];
        let centers_v = vec![vec![-1.0, 0.0, 4.0], vec![0.5, 0.5, 0.5], vec![3.0, -3.0, 0.0]];
        let coeff_v = vec![1.2, 0.4, -0.9];
        let u = KernelExpansion::new(k, centers_u.clone(), coeff_u.clone()).unwrap();
        let v = KernelExpansion::new(k, centers_v.clone(), coeff_v.clone()).unwrap();

        let mut fu = [0.0; 3];
        for (z, c) in centers_u.iter().zip(&coeff_u) {
            for (f, zi) in fu.iter_mut().zip(z) {
                *f += c * zi;
            }
        }
        let mut fv = [0.0; 3];
        for (z, c) in centers_v.iter().zip(&coeff_v) {
            for (f, zi) in fv.iter_mut().zip(z) {
                *f += c * zi;
            }
        }
        let expected: f64 = fu.iter().zip(&fv).map(|(a, b)| a * b).sum();
        assert_relative_eq!(u.inner_product(&v).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn norm_of_scaled_section_linear_kernel() {
        // ‖2 K_x‖ = 2‖x‖ for the linear kernel; x = (3,4) has norm 5.
        let k = Kernel::linear(2).unwrap();
        let w = k.section(&[3.0, 4.0]).unwrap().scale(2.0);
        assert_relative_eq!(w.norm(), 10.0, max_relative = 1e-14);
    }

    #[test]
    fn norm_of_gaussian_section_is_one() {
        let k = Kernel::gaussian(2.0, 2).unwrap();
        let w = k.section(&[0.3, -0.4]).unwrap();
        assert_eq!(w.norm(), 1.0);
    }

    #[test]
    fn inner_product_requires_same_kernel() {
        let k1 = Kernel::gaussian(1.0, 1).unwrap();
        let k2 = Kernel::gaussian(2.0, 1).unwrap();
        let u = k1.section(&[0.0]).unwrap();
        let v = k2.section(&[0.0]).unwrap();
        assert!(matches!(u.inner_product(&v), Err(Error::KernelMismatch)));
        assert!(matches!(u.add(&v), Err(Error::KernelMismatch)));
    }

    #[test]
    fn compaction_merges_duplicate_centers() {
        let k = Kernel::gaussian(1.0, 1).unwrap();
        let s = k.section(&[0.5]).unwrap();
        let w = s.add(&s).unwrap().add(&s.scale(-2.0)).unwrap();
        assert_eq!(w.num_terms(), 3);
        let compacted = w.compacted();
        assert_eq!(compacted.num_terms(), 0);
        // Compaction never changes values.
        assert!((w.eval(&[0.1]).unwrap() - compacted.eval(&[0.1]).unwrap()).abs() <= 1e-15);
    }
}
