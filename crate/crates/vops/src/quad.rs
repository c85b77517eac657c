//! Gauss-Hermite quadrature rules for integrals against `exp(-x^2)`.

use crate::linalg::{c64, jacobi_hermitian, CMat};

/// Nodes (ascending) and weights of the n-point rule:
/// `integral f(x) exp(-x^2) dx ~ sum_i w_i f(x_i)`.
///
/// Golub-Welsch construction: the nodes are the eigenvalues of the symmetric
/// tridiagonal recurrence matrix with off-diagonals `sqrt(k/2)`, and each
/// weight is `sqrt(pi)` times the squared first component of the matching
/// eigenvector.
pub(crate) fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let m = CMat::from_fn(n, |i, j| {
        if i + 1 == j {
            c64((j as f64 / 2.0).sqrt(), 0.0)
        } else if j + 1 == i {
            c64((i as f64 / 2.0).sqrt(), 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let (nodes, vecs) = jacobi_hermitian(&m);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let weights = (0..n).map(|k| sqrt_pi * vecs[(0, k)].norm_sqr()).collect();
    (nodes, weights)
}

/// Sums a slice pairwise for deterministic, well-conditioned accumulation.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_are_exact() {
        for n in [8, 16, 24, 32] {
            let (x, w) = gauss_hermite(n);
            let sqrt_pi = std::f64::consts::PI.sqrt();
            let m0: f64 = w.iter().sum();
            assert!((m0 - sqrt_pi).abs() < 1e-12, "order {n}");
            let m2: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi * xi).sum();
            assert!((m2 - sqrt_pi / 2.0).abs() < 1e-12, "order {n}");
            let m6: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(6)).sum();
            assert!((m6 - 15.0 * sqrt_pi / 8.0).abs() < 1e-11, "order {n}");
        }
    }

    #[test]
    fn nodes_are_symmetric_and_sorted() {
        let (x, w) = gauss_hermite(24);
        for k in 0..24 {
            assert!((x[k] + x[23 - k]).abs() < 1e-12);
            assert!((w[k] - w[23 - k]).abs() < 1e-12);
            if k > 0 {
                assert!(x[k] > x[k - 1]);
            }
        }
    }

    #[test]
    fn gaussian_integral_with_scale() {
        // integral g(y) exp(-a y^2) dy via y = u/sqrt(a), here g(y) = y^2 + 1.
        let (x, w) = gauss_hermite(24);
        let a = 3.7f64;
        let total: f64 = x
            .iter()
            .zip(&w)
            .map(|(u, wi)| {
                let y = u / a.sqrt();
                wi * (y * y + 1.0) / a.sqrt()
            })
            .sum();
        let pi = std::f64::consts::PI;
        let expect = 0.5 * (pi / a.powi(3)).sqrt() + (pi / a).sqrt();
        assert!((total - expect).abs() < 1e-12);
    }

    #[test]
    fn pairwise_matches_sequential() {
        let v: Vec<f64> = (0..1000).map(|k| (k as f64).sin()).collect();
        let seq: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - seq).abs() < 1e-9);
    }
}
