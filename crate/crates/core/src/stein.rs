//! Discrete Lyapunov (Stein) equation `P − APA* = BB*`.
//!
//! Two solvers: a dense Kronecker solve used as an oracle for small `n`, and
//! a square-root doubling iteration that only ever manipulates a triangular
//! factor `L` of `P = LL*`. Condition numbers are taken from `L`
//! (`κ(P) = κ(L)²`), never from a formed `P`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{CMat, ComplexMatrix, InputPair};

/// Largest state dimension accepted by the Kronecker oracle.
pub const DIRECT_MAX_N: usize = 32;
pub const DEFAULT_TOL: f64 = 1e-16;
pub const DEFAULT_MAX_ITER: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinSolution {
    /// Lower-triangular Cholesky factor with positive real diagonal.
    #[serde(rename = "l")]
    pub factor_l: ComplexMatrix,
    /// ln κ(P)
    pub log_kappa: f64,
    /// ‖P − APA* − BB*‖_F / ‖BB*‖_F
    pub residual_rel: f64,
    /// Doubling steps taken.
    pub iterations: usize,
}

impl SteinSolution {
    /// `P = LL*`
    pub fn grammian(&self) -> CMat {
        let l = self.factor_l.as_dmatrix();
        l * l.adjoint()
    }

    /// ln κ(L) = ½ ln κ(P)
    pub fn log_kappa_factor(&self) -> f64 {
        0.5 * self.log_kappa
    }
}

/// Dense solve of `(I − A⊗Ā) vec(P) = vec(BB*)` with row-major `vec`.
pub fn solve_stein_direct(pair: &InputPair) -> Result<ComplexMatrix> {
    let n = pair.n();
    if n > DIRECT_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "direct Stein solve is limited to n <= {DIRECT_MAX_N}, got n={n}"
        )));
    }
    let a = pair.a.as_dmatrix();
    let b = pair.b.as_dmatrix();
    let q = b * b.adjoint();
    let system = CMat::identity(n * n, n * n) - linalg::kron(a, &a.conjugate());
    let rhs = CMat::from_fn(n * n, 1, |k, _| q[(k / n, k % n)]);
    let x = linalg::solve_square(system, &rhs).map_err(|_| {
        Error::Singular("I − A⊗conj(A) is singular: the pair is not stable or the solution is not unique".into())
    })?;
    let p = CMat::from_fn(n, n, |i, j| x[(i * n + j, 0)]);
    ComplexMatrix::from_dmatrix(linalg::hermitian_part(&p))
}

/// `‖P − APA* − BB*‖_F / ‖BB*‖_F`
pub fn stein_residual(pair: &InputPair, p: &CMat) -> f64 {
    let a = pair.a.as_dmatrix();
    let b = pair.b.as_dmatrix();
    let q = b * b.adjoint();
    let r = p - a * p * a.adjoint() - &q;
    let scale = q.norm();
    if scale == 0.0 {
        r.norm()
    } else {
        r.norm() / scale
    }
}

pub fn solve_stein_sqrt_doubling(pair: &InputPair, tol: f64, max_iter: usize) -> Result<SteinSolution> {
    doubling(pair, tol, max_iter, None)
}

/// Doubling solve that also records `‖L_k‖_F` after every step.
pub fn solve_stein_sqrt_doubling_traced(
    pair: &InputPair,
    tol: f64,
    max_iter: usize,
) -> Result<(SteinSolution, Vec<f64>)> {
    let mut trace = Vec::new();
    let sol = doubling(pair, tol, max_iter, Some(&mut trace))?;
    Ok((sol, trace))
}

/// Square-root doubling.
///
/// Keeps `F_k` with `F_kF_k* = Σ_{j<2^k} A^j BB* A*^j` and `A_k = A^{2^k}`:
/// `F_{k+1} = [F_k, A_kF_k]` compressed to a triangular factor by QR,
/// `A_{k+1} = A_k²`. Stops once `‖A_kF_k‖_F < tol·‖F_k‖_F`.
fn doubling(pair: &InputPair, tol: f64, max_iter: usize, mut trace: Option<&mut Vec<f64>>) -> Result<SteinSolution> {
    let n = pair.n();
    let mut power = pair.a.as_dmatrix().clone();
    let mut factor = pair.b.as_dmatrix().clone();
    if factor.norm() == 0.0 {
        return Err(Error::Uncontrollable("B is zero".into()));
    }
    let mut converged_at = None;
    for iter in 1..=max_iter {
        let increment = &power * &factor;
        let ratio = increment.norm() / factor.norm();
        let cols = factor.ncols();
        let mut stacked = CMat::zeros(n, 2 * cols);
        stacked.view_mut((0, 0), (n, cols)).copy_from(&factor);
        stacked.view_mut((0, cols), (n, cols)).copy_from(&increment);
        factor = if 2 * cols > n { linalg::compress_factor(&stacked) } else { stacked };
        if let Some(t) = trace.as_deref_mut() {
            t.push(factor.norm());
        }
        if !ratio.is_finite() || factor.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Unstable { radius: pair.spectral_radius().unwrap_or(f64::NAN) });
        }
        if ratio < tol {
            converged_at = Some(iter);
            break;
        }
        power = &power * &power;
    }
    let iterations = converged_at.ok_or(Error::NoConvergence { what: "square-root doubling", iterations: max_iter })?;

    let l = linalg::compress_factor(&factor);
    if l.ncols() < n {
        return Err(Error::Uncontrollable(format!("Grammian has rank at most {} < n={n}", l.ncols())));
    }
    if (0..n).any(|i| !(l[(i, i)].re > 0.0)) {
        return Err(Error::Uncontrollable("Cholesky factor has a zero diagonal entry".into()));
    }
    let log_kappa = cond_from_factor(&l).map_err(|_| Error::Uncontrollable("Grammian factor is singular".into()))?;
    let p = &l * l.adjoint();
    let residual_rel = stein_residual(pair, &p);
    Ok(SteinSolution { factor_l: ComplexMatrix::from_dmatrix(l)?, log_kappa, residual_rel, iterations })
}

/// Doubling solve with default tolerance and iteration cap.
pub fn solve(pair: &InputPair) -> Result<SteinSolution> {
    solve_stein_sqrt_doubling(pair, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

/// `ln κ(P) = 2(ln σ₁(L) − ln σₙ(L))` from the singular values of `L`.
///
/// The singular values come from one-sided Jacobi on `L*`, whose columns
/// carry the grading of `P`.
pub fn cond_from_factor(l: &CMat) -> Result<f64> {
    if l.nrows() != l.ncols() {
        return Err(Error::Dimension("factor must be square".into()));
    }
    let s = linalg::jacobi_singular_values(&l.adjoint());
    let (s1, sn) = (s[0], s[s.len() - 1]);
    if !(sn > 0.0) || !s1.is_finite() {
        return Err(Error::InfiniteCondition);
    }
    Ok(2.0 * (s1.ln() - sn.ln()))
}
