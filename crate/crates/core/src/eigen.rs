//! Extreme eigenpairs of real symmetric matrices.
//!
//! Small matrices go through a dense solve; larger ones through Lanczos with
//! full reorthogonalization, which only needs matrix-vector products.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Matrices up to this order are solved densely.
pub const DENSE_EIGEN_LIMIT: usize = 256;

/// Relative residual target `‖Av − λv‖ ≤ tol·‖A‖`.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: DVector<f64>,
}

pub fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Contract(format!("matrix is {}x{}, not square", a.nrows(), a.ncols())));
    }
    let scale = a.amax().max(1.0);
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Contract(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// The `count` algebraically largest eigenpairs, in decreasing order.
pub fn top_eigenpairs(a: &DMatrix<f64>, count: usize) -> Result<Vec<EigenPair>> {
    check_symmetric(a)?;
    let m = a.nrows();
    if count == 0 || count > m {
        return Err(Error::Contract(format!("requested {count} eigenpairs of a {m}x{m} matrix")));
    }
    if m <= DENSE_EIGEN_LIMIT {
        return Ok(dense_top(a.clone(), count));
    }
    lanczos_top(|x, y| a.mul_to(x, y), m, count)
}

/// Second-largest eigenvalue and a unit eigenvector for it.
pub fn second_eigenpair(a: &DMatrix<f64>) -> Result<EigenPair> {
    let mut pairs = top_eigenpairs(a, 2)?;
    Ok(pairs.swap_remove(1))
}

pub fn largest_eigenvalue(a: &DMatrix<f64>) -> Result<f64> {
    Ok(top_eigenpairs(a, 1)?[0].value)
}

fn dense_top(a: DMatrix<f64>, count: usize) -> Vec<EigenPair> {
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    order
        .into_iter()
        .take(count)
        .map(|i| EigenPair { value: eig.eigenvalues[i], vector: eig.eigenvectors.column(i).into_owned() })
        .collect()
}

/// Lanczos with full reorthogonalization over an implicit symmetric operator.
///
/// On breakdown (an invariant Krylov subspace) a fresh random direction
/// orthogonal to the basis is started, so the process always ends by the
/// dimension of the space.
pub fn lanczos_top<F>(mut apply: F, dim: usize, count: usize) -> Result<Vec<EigenPair>>
where
    F: FnMut(&DVector<f64>, &mut DVector<f64>),
{
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    let mut q = random_unit(&mut rng, dim, &basis);
    let mut w = DVector::zeros(dim);
    let mut next_check = (count + 20).min(dim);
    loop {
        apply(&q, &mut w);
        let a = q.dot(&w);
        alpha.push(a);
        basis.push(q.clone());
        // two passes of Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w.axpy(-c, b, 1.0);
            }
        }
        let k = basis.len();
        let b_norm = w.norm();

        let done = k == dim;
        if done || k >= next_check {
            let (values, ritz) = tridiagonal_top(&alpha, &beta, count.min(k));
            let anorm = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
            let converged = ritz.len() == count
                && ritz.iter().all(|s| (b_norm * s[k - 1]).abs() <= 0.1 * RESIDUAL_TOL * anorm);
            if done || converged {
                let pairs: Vec<EigenPair> = values
                    .iter()
                    .zip(&ritz)
                    .map(|(&value, s)| {
                        let mut v = DVector::zeros(dim);
                        for (coef, b) in s.iter().zip(&basis) {
                            v.axpy(*coef, b, 1.0);
                        }
                        let norm = v.norm();
                        EigenPair { value, vector: v / norm }
                    })
                    .collect();
                if pairs.len() < count {
                    return Err(Error::Contract("Lanczos produced too few Ritz pairs".into()));
                }
                return Ok(pairs);
            }
            next_check = (k + 10 + k / 5).min(dim);
        }

        let scale = alpha.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
        if b_norm <= 1e-10 * scale {
            beta.push(0.0);
            q = random_unit(&mut rng, dim, &basis);
        } else {
            beta.push(b_norm);
            q = &w / b_norm;
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize, basis: &[DVector<f64>]) -> DVector<f64> {
    loop {
        let mut v = DVector::from_fn(dim, |_, _| rng.gen::<f64>() - 0.5);
        for _ in 0..2 {
            for b in basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// Top eigenpairs of the Lanczos tridiagonal matrix; vectors are expressed in
/// the Krylov basis.
fn tridiagonal_top(alpha: &[f64], beta: &[f64], count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let top = dense_top(t, count);
    let values = top.iter().map(|p| p.value).collect();
    let vecs = top.into_iter().map(|p| p.vector.iter().copied().collect()).collect();
    (values, vecs)
}

/// `‖Av − λv‖`.
pub fn residual(a: &DMatrix<f64>, pair: &EigenPair) -> f64 {
    (a * &pair.vector - &pair.vector * pair.value).norm()
}

/// Spectral norm estimate used to scale residual checks.
pub fn norm_estimate(a: &DMatrix<f64>) -> f64 {
    a.norm() // Frobenius, an upper bound on the spectral norm
}
