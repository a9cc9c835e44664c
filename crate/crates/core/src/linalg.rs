//! Thin numerical helpers over nalgebra shared by the solver and bound modules.

use nalgebra::{DMatrix, Schur, SymmetricEigen, QR};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{c64, CMat};

const SCHUR_SWEEPS_PER_DIM: usize = 400;
const JACOBI_MAX_SWEEPS: usize = 80;

/// Singular values in non-increasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Singular values by one-sided (Hestenes) Jacobi, non-increasing.
///
/// Columns of `m` are rotated pairwise until mutually orthogonal; the
/// singular values are then the column norms. Unlike bidiagonalization this
/// keeps relative accuracy on column-graded matrices, which is what the
/// adjoint of a graded Cholesky factor looks like.
pub fn jacobi_singular_values(m: &CMat) -> Vec<f64> {
    let mut a = if m.nrows() >= m.ncols() { m.clone() } else { m.adjoint() };
    let cols = a.ncols();
    let rows = a.nrows();
    let mut norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm_squared()).collect();
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let xp = a[(i, p)];
                    let xq = a[(i, q)] * phase.conj();
                    a[(i, p)] = xp * c - xq * s;
                    a[(i, q)] = xp * s + xq * c;
                }
                norms[p] = a.column(p).norm_squared();
                norms[q] = a.column(q).norm_squared();
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = norms.into_iter().map(f64::sqrt).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn is_real(m: &CMat) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub fn real_part(m: &CMat) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn complexify(m: &DMatrix<f64>) -> CMat {
    m.map(|x| c64(x, 0.0))
}

/// Eigenvalues of a square matrix, in no particular order.
///
/// Real matrices go through the real Schur form so that complex eigenvalues
/// come out in exact conjugate pairs.
pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let max_iter = SCHUR_SWEEPS_PER_DIM * n;
    if is_real(m) {
        return real_eigenvalues(&real_part(m));
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, max_iter)
        .ok_or(Error::NoConvergence { what: "complex Schur", iterations: max_iter })?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Eigenvalues of a real matrix, closed under conjugation.
///
/// Falls back to the transpose, then to the complex Schur form (with conjugate
/// pairs re-symmetrized) when the real Schur iteration stalls.
pub fn real_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    let max_iter = SCHUR_SWEEPS_PER_DIM * n.max(1);
    if let Some(schur) = Schur::try_new(m.clone(), f64::EPSILON, max_iter) {
        return Ok(schur.complex_eigenvalues().iter().copied().collect());
    }
    // Same spectrum, different iteration path.
    if let Some(schur) = Schur::try_new(m.transpose(), f64::EPSILON, max_iter) {
        return Ok(schur.complex_eigenvalues().iter().copied().collect());
    }
    let schur = Schur::try_new(complexify(m), f64::EPSILON, max_iter)
        .ok_or(Error::NoConvergence { what: "Schur", iterations: max_iter })?;
    let (_, t) = schur.unpack();
    Ok(pair_conjugates((0..n).map(|i| t[(i, i)]).collect()))
}

/// Snap eigenvalues of a real matrix to exact conjugate pairs.
fn pair_conjugates(mut values: Vec<Complex64>) -> Vec<Complex64> {
    values.sort_by(|a, b| b.im.total_cmp(&a.im));
    let upper: Vec<Complex64> = values.iter().copied().filter(|z| z.im > 0.0).collect();
    let mut lower: Vec<Complex64> = values.iter().copied().filter(|z| z.im < 0.0).collect();
    let mut out: Vec<Complex64> = values.iter().filter(|z| z.im == 0.0).copied().collect();
    for z in upper {
        let j = (0..lower.len()).min_by(|&x, &y| {
            (lower[x] - z.conj()).norm().total_cmp(&(lower[y] - z.conj()).norm())
        });
        match j {
            Some(j) => {
                let w = lower.swap_remove(j);
                let mid = (z + w.conj()) * 0.5;
                out.push(mid);
                out.push(mid.conj());
            }
            None => out.push(c64(z.re, 0.0)),
        }
    }
    out.extend(lower.into_iter().map(|w| c64(w.re, 0.0)));
    out
}

/// Eigenvalues of a Hermitian matrix in non-increasing order.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = hermitian_part(m);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// (M + M*)/2
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Lower-triangular (trapezoidal when `f` has fewer columns than rows)
/// factor `L` with `LL* = FF*` and real non-negative diagonal.
///
/// Computed from the QR factorization of `F*`, so `FF*` is never formed.
pub fn compress_factor(f: &CMat) -> CMat {
    let qr = QR::new(f.adjoint());
    let mut r = qr.r();
    for i in 0..r.nrows() {
        let d = r[(i, i)];
        let mag = d.norm();
        if mag > 0.0 {
            let phase = d.conj() / mag;
            for j in 0..r.ncols() {
                r[(i, j)] *= phase;
            }
            r[(i, i)] = c64(mag, 0.0);
        }
    }
    r.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn solve_square(a: CMat, rhs: &CMat) -> Result<CMat> {
    let lu = a.lu();
    lu.solve(rhs).ok_or_else(|| Error::Singular("LU factorization found a zero pivot".into()))
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    solve_square(a.clone(), &CMat::identity(n, n))
}

/// Normal-matrix test `‖AA* − A*A‖_F ≤ tol·‖A‖_F²`.
pub fn is_normal(a: &CMat, tol: f64) -> bool {
    let comm = a * a.adjoint() - a.adjoint() * a;
    comm.norm() <= tol * a.norm_squared().max(f64::MIN_POSITIVE)
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    (a - a.adjoint()).norm() <= tol * a.norm().max(f64::MIN_POSITIVE)
}

/// Solve `Lx = b` for lower-triangular `L` by forward substitution.
pub fn lower_triangular_inverse(l: &CMat) -> Result<CMat> {
    let n = l.nrows();
    if (0..n).any(|i| l[(i, i)].norm() == 0.0) {
        return Err(Error::InfiniteCondition);
    }
    l.clone()
        .solve_lower_triangular(&CMat::identity(n, n))
        .ok_or(Error::InfiniteCondition)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_like(n: usize, m: usize, seed: u64) -> CMat {
        // Small deterministic LCG; only used to get non-trivial entries.
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        CMat::from_fn(n, m, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let y = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            c64(x, y)
        })
    }

    #[test]
    fn compressed_factor_reproduces_gram() {
        for (n, c) in [(4, 9), (5, 5), (6, 2)] {
            let f = rand_like(n, c, (n * 31 + c) as u64);
            let l = compress_factor(&f);
            assert_eq!(l.nrows(), n);
            assert_eq!(l.ncols(), n.min(c));
            let err = (&l * l.adjoint() - &f * f.adjoint()).norm();
            assert!(err < 1e-13, "{err}");
            for i in 0..l.ncols() {
                assert_eq!(l[(i, i)].im, 0.0);
                assert!(l[(i, i)].re >= 0.0);
                for j in (i + 1)..l.ncols() {
                    assert!(l[(i, j)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn real_eigenvalues_are_conjugate_closed() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.5]);
        let mut ev = eigenvalues(&complexify(&m)).unwrap();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert_eq!(ev[0], ev[2].conj());
        assert!((ev[1] - c64(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn jacobi_matches_bidiagonal_svd() {
        for (n, m) in [(5, 5), (7, 3), (3, 6)] {
            let a = rand_like(n, m, (7 * n + m) as u64);
            let j = jacobi_singular_values(&a);
            let b = singular_values(&a);
            assert_eq!(j.len(), b.len());
            for (x, y) in j.iter().zip(&b) {
                assert!((x - y).abs() < 1e-13 * b[0], "{x} vs {y}");
            }
        }
    }

    #[test]
    fn jacobi_resolves_graded_columns() {
        // diag(1, 1e-20) times a well conditioned matrix: bidiagonal SVD
        // cannot see 1e-20 relative to 1, one-sided Jacobi can.
        let x = CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.5, 0.0), c64(0.25, 0.0), c64(1.0, 0.0)]);
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(1.0, 0.0), c64(1e-20, 0.0)]));
        let s = jacobi_singular_values(&(&x * &d));
        let det = (0.875f64) * 1e-20;
        assert!(((s[0] * s[1]) / det - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conjugate_pairing_fallback() {
        let v = vec![c64(0.1, 0.3 + 1e-15), c64(0.1 + 1e-16, -0.3), c64(0.5, 0.0)];
        let p = pair_conjugates(v);
        assert_eq!(p.len(), 3);
        assert!(p.iter().any(|z| z.im == 0.0));
        let c: Vec<_> = p.iter().filter(|z| z.im != 0.0).collect();
        assert_eq!(*c[0], c[1].conj());
    }

    #[test]
    fn complex_eigenvalues_of_triangular() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[c64(0.5, 0.5), c64(1.0, 0.0), c64(0.0, 0.0), c64(-0.25, 0.1)],
        );
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| b.re.total_cmp(&a.re));
        assert!((ev[0] - c64(0.5, 0.5)).norm() < 1e-14);
        assert!((ev[1] - c64(-0.25, 0.1)).norm() < 1e-14);
    }
}
