//! Reproducing kernels for the domain and range spaces.
//!
//! The only kernel shipped is the exponential dot-product kernel
//! `K(x, y) = exp(x·y / μ)`, whose native space is the (real) Bergmann–Fock
//! space. Gram assembly is written against the [`Kernel`] trait so other
//! kernels can be dropped in.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A symmetric positive-definite kernel on `ℝⁿ`.
pub trait Kernel: Sync {
    /// Evaluates `K(x, y)` without checking dimensions.
    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64;

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim("kernel argument", x.len(), y.len())?;
        if x.is_empty() {
            return Err(Error::input("kernel arguments must have dimension ≥ 1"));
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// Kernel difference `K(x, end) − K(x, start)`, the function spanned by
    /// the domain-space basis.
    fn eval_diff(&self, x: &[f64], start: &[f64], end: &[f64]) -> Result<f64> {
        check_dim("kernel difference start", x.len(), start.len())?;
        check_dim("kernel difference end", x.len(), end.len())?;
        if x.is_empty() {
            return Err(Error::input("kernel arguments must have dimension ≥ 1"));
        }
        Ok(self.eval_unchecked(x, end) - self.eval_unchecked(x, start))
    }
}

/// Width parameter `μ` of the exponential dot-product kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    mu: f64,
}

impl KernelParams {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Input(format!("kernel width mu must be positive, got {mu}")));
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

impl Default for KernelParams {
    fn default() -> Self {
        Self { mu: 5.0 }
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

impl Kernel for KernelParams {
    #[inline]
    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        // No clamping: overflow shows up as inf rather than a silently wrong Gram entry.
        (dot(x, y) / self.mu).exp()
    }
}

/// `exp(x·y / μ)`.
pub fn eval_kernel(params: &KernelParams, x: &[f64], y: &[f64]) -> Result<f64> {
    params.eval(x, y)
}

/// `K(x, end) − K(x, start)`.
pub fn eval_kernel_diff(
    params: &KernelParams,
    x: &[f64],
    start: &[f64],
    end: &[f64],
) -> Result<f64> {
    params.eval_diff(x, start, end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};
    use proptest::prelude::*;

    fn p(mu: f64) -> KernelParams {
        KernelParams::new(mu).unwrap()
    }

    #[test]
    fn zero_and_orthogonal_dot_products_give_one() {
        assert_eq!(eval_kernel(&p(5.0), &[0.0, 0.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(eval_kernel(&p(1.0), &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn dot_product_over_mu() {
        // (1,2)·(1,2) = 5, 5/5 = 1
        let v = eval_kernel(&p(5.0), &[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn kernel_difference_examples() {
        let k = p(5.0);
        for x in [[0.3, -1.0], [2.0, 2.0]] {
            assert_eq!(eval_kernel_diff(&k, &x, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        }
        assert_eq!(
            eval_kernel_diff(&p(1.0), &[0.0, 0.0], &[4.0, -1.0], &[-2.0, 7.0]).unwrap(),
            0.0
        );
        let v = eval_kernel_diff(&k, &[1.0, 0.0], &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((v - ((0.2f64).exp() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(KernelParams::new(0.0).is_err());
        assert!(KernelParams::new(-1.0).is_err());
        assert!(KernelParams::new(f64::NAN).is_err());
        assert!(matches!(
            eval_kernel(&p(1.0), &[1.0], &[1.0, 2.0]),
            Err(Error::Input(_))
        ));
        assert!(eval_kernel(&p(1.0), &[], &[]).is_err());
        assert!(eval_kernel_diff(&p(1.0), &[1.0, 0.0], &[1.0], &[0.0, 0.0]).is_err());
    }

    fn vec2() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3.0f64..3.0, 2)
    }

    proptest! {
        #[test]
        fn symmetric_bitwise(x in vec2(), y in vec2(), mu in 0.5f64..10.0) {
            let k = p(mu);
            prop_assert_eq!(k.eval(&x, &y).unwrap().to_bits(), k.eval(&y, &x).unwrap().to_bits());
        }

        #[test]
        fn difference_is_antisymmetric(x in vec2(), a in vec2(), b in vec2()) {
            let k = p(5.0);
            let ab = k.eval_diff(&x, &a, &b).unwrap();
            let ba = k.eval_diff(&x, &b, &a).unwrap();
            prop_assert_eq!(ab, -ba);
        }

        #[test]
        fn gram_is_psd(points in prop::collection::vec(vec2(), 1..=8), mu in 1.0f64..10.0) {
            let k = p(mu);
            let m = points.len();
            let g = DMatrix::from_fn(m, m, |i, j| k.eval_unchecked(&points[i], &points[j]));
            let eig = SymmetricEigen::new(g).eigenvalues;
            let max = eig.max();
            prop_assert!(eig.min() >= -1e-10 * max);
        }
    }
}
