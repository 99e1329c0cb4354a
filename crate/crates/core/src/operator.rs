//! Matrix-free view of an analysis operator acting on real signals.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Real;

/// A real-linear map `R^L -> C^P`.
///
/// `adjoint_real` must be the adjoint with respect to `Re <u, v>` on `C^P`,
/// i.e. `Re(Phi^H c)`.
pub trait AnalysisMap<T: Real>: Sync {
    fn domain_len(&self) -> usize;
    fn range_len(&self) -> usize;
    fn forward_real(&self, x: &[T], out: &mut [Complex<T>]);
    fn adjoint_real(&self, c: &[Complex<T>], out: &mut [T]);
}

impl<T: Real, M: AnalysisMap<T> + ?Sized> AnalysisMap<T> for &M {
    fn domain_len(&self) -> usize {
        (**self).domain_len()
    }
    fn range_len(&self) -> usize {
        (**self).range_len()
    }
    fn forward_real(&self, x: &[T], out: &mut [Complex<T>]) {
        (**self).forward_real(x, out)
    }
    fn adjoint_real(&self, c: &[Complex<T>], out: &mut [T]) {
        (**self).adjoint_real(c, out)
    }
}

/// Estimate of `||Phi||_2` by power iteration on `Phi^T Phi`.
///
/// Stops when successive estimates agree to `rel_tol` or after `max_iter`
/// steps. Seeded so the estimate is reproducible.
pub fn operator_norm<T: Real>(
    op: &impl AnalysisMap<T>,
    max_iter: usize,
    rel_tol: T,
    seed: u64,
) -> T {
    let n = op.domain_len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<T> = (0..n)
        .map(|_| {
            let s: f64 = StandardNormal.sample(&mut rng);
            T::lit(s)
        })
        .collect();
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); op.range_len()];
    let mut w = vec![T::zero(); n];
    let norm = |v: &[T]| v.iter().map(|&a| a * a).sum::<T>().sqrt();
    let mut estimate = T::zero();
    for _ in 0..max_iter {
        let nv = norm(&v);
        if nv == T::zero() {
            return T::zero();
        }
        v.iter_mut().for_each(|a| *a = *a / nv);
        op.forward_real(&v, &mut coeffs);
        op.adjoint_real(&coeffs, &mut w);
        // Rayleigh quotient of Phi^T Phi
        let lambda = v.iter().zip(&w).map(|(&a, &b)| a * b).sum::<T>();
        let next = lambda.max(T::zero()).sqrt();
        std::mem::swap(&mut v, &mut w);
        if (next - estimate).abs() <= rel_tol * next {
            return next;
        }
        estimate = next;
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::FrameMatrix;

    #[test]
    fn norm_of_diagonal_matrix() {
        let m = FrameMatrix::<f64>::from_real_rows(
            3,
            3,
            &[3.0, 0.0, 0.0, 0.0, -5.0, 0.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        let est = operator_norm(&m, 500, 1e-12, 1);
        assert!((est - 5.0).abs() < 1e-6, "{est}");
    }
}
