//! Cyclic Jacobi eigen-decomposition for small dense symmetric matrices.

/// Sweeps stop once the off-diagonal Frobenius norm falls below this
/// fraction of the matrix's Frobenius norm.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;

pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues (unsorted, in diagonal order) and eigenvectors
/// (`vectors[k]` is the unit eigenvector for `values[k]`).
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
    pub converged: bool,
}

/// Decompose the symmetric row-major `n x n` matrix `a`.
///
/// Rotations are applied in fixed row-cyclic order `(0,1), (0,2), ...,
/// (n-2,n-1)`, so the result is fully deterministic.
pub fn symmetric_eigen(a: &[f64], n: usize) -> SymmetricEigen {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let scale = frobenius(&a).max(f64::MIN_POSITIVE);
    let mut sweeps = 0;
    let mut converged = off_diagonal(&a, n) < OFF_DIAGONAL_TOLERANCE * scale;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, n, p, q, c, s);
            }
        }
        sweeps += 1;
        converged = off_diagonal(&a, n) < OFF_DIAGONAL_TOLERANCE * scale;
    }

    let values = (0..n).map(|i| a[i * n + i]).collect();
    let vectors = (0..n)
        .map(|k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    SymmetricEigen {
        values,
        vectors,
        sweeps,
        converged,
    }
}

// A <- J^T A J and V <- V J for the plane rotation J(p, q) with
// J_pp = J_qq = c, J_pq = s, J_qp = -s.
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        let (akp, akq) = (a[k * n + p], a[k * n + q]);
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[p * n + k], a[q * n + k]);
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
    }
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn off_diagonal(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                sum += a[p * n + q] * a[p * n + q];
            }
        }
    }
    sum.sqrt()
}
