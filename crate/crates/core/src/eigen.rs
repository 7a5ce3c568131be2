//! Cyclic Jacobi eigensolver for dense Hermitian matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl EigenSolution {
    /// Largest `‖A v − λ v‖` over all pairs.
    pub fn max_residual(&self, a: &DMatrix<Complex64>) -> f64 {
        let av = a * &self.vectors;
        (0..self.values.len())
            .map(|j| (av.column(j) - self.vectors.column(j) * Complex64::new(self.values[j], 0.0)).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|V†V − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.vectors.adjoint() * &self.vectors;
        max_abs_deviation_from_identity(&gram)
    }
}

pub(crate) fn max_abs_deviation_from_identity(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn hermiticity_error(a: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Inputs whose Hermiticity defect exceeds `herm_tol` are rejected; the
/// strictly Hermitian part is diagonalized otherwise.
pub fn jacobi_eigh(a: &DMatrix<Complex64>, herm_tol: f64) -> Result<EigenSolution> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    let defect = hermiticity_error(a);
    if defect > herm_tol {
        return Err(Error::NotHermitian {
            max_deviation: defect,
        });
    }
    let mut m = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v = DMatrix::<Complex64>::identity(n, n);

    let scale = m.norm().max(f64::MIN_POSITIVE);
    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        converged = off_diagonal_norm(&m) <= 1e-14 * scale;
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps,
            off_norm: off_diagonal_norm(&m),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenSolution { values, vectors })
}

fn off_diagonal_norm(m: &DMatrix<Complex64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Annihilates `m[(p, q)]` with a unitary plane rotation `J`, updating
/// `m ← J† m J` and `v ← v J`.
fn rotate(m: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    if mag < 1e-300 {
        m[(p, q)] = Complex64::new(0.0, 0.0);
        m[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = diag(1, conj(phase)) · [[c, s], [-s, c]]
    let j_pp = Complex64::new(c, 0.0);
    let j_pq = Complex64::new(s, 0.0);
    let j_qp = -phase.conj() * s;
    let j_qq = phase.conj() * c;

    let n = m.nrows();
    for r in 0..n {
        let mp = m[(r, p)];
        let mq = m[(r, q)];
        m[(r, p)] = mp * j_pp + mq * j_qp;
        m[(r, q)] = mp * j_pq + mq * j_qq;
    }
    for col in 0..n {
        let mp = m[(p, col)];
        let mq = m[(q, col)];
        m[(p, col)] = j_pp.conj() * mp + j_qp.conj() * mq;
        m[(q, col)] = j_pq.conj() * mp + j_qq.conj() * mq;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
    for r in 0..n {
        let vp = v[(r, p)];
        let vq = v[(r, q)];
        v[(r, p)] = vp * j_pp + vq * j_qp;
        v[(r, q)] = vp * j_pq + vq * j_qq;
    }
}
