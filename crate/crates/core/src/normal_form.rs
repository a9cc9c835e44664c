//! Input-normal form, completion of input-normal matrices, and the bilinear
//! and Cayley maps of an input pair.
//!
//! A pair is input normal when `AA* + BB* = I`, i.e. its Stein solution is
//! the identity. Every controllable stable pair is similar to one through
//! `T = L⁻¹`, where `L` is the Cholesky factor of its Grammian.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{c64, CMat, ComplexMatrix, InputPair};
use crate::stein;

/// Default tolerance on `|σ₁(A) − 1|` for [`in_complete`].
pub const IN_COMPLETE_TOL: f64 = 1e-6;

/// `T`, the transformed pair `(TAT⁻¹, TB)` and `ln κ(T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InTransform {
    pub t: ComplexMatrix,
    pub a_tilde: ComplexMatrix,
    pub b_tilde: ComplexMatrix,
    pub log_kappa_t: f64,
}

impl InTransform {
    pub fn pair(&self) -> InputPair {
        InputPair { a: self.a_tilde.clone(), b: self.b_tilde.clone() }
    }

    /// `‖ÃÃ* + B̃B̃* − I‖_F`
    pub fn residual(&self) -> f64 {
        in_residual(&self.pair())
    }
}

/// `‖AA* + BB* − I‖_F`
pub fn in_residual(pair: &InputPair) -> f64 {
    let a = pair.a.as_dmatrix();
    let b = pair.b.as_dmatrix();
    let n = pair.n();
    (a * a.adjoint() + b * b.adjoint() - CMat::identity(n, n)).norm()
}

/// Similarity to input-normal form through the Cholesky factor of the Grammian.
///
/// `Ã = L⁻¹AL` and `B̃ = L⁻¹B` are formed by triangular solves; `T = L⁻¹` is
/// returned explicitly as well.
pub fn to_input_normal(pair: &InputPair) -> Result<InTransform> {
    let sol = stein::solve(pair)?;
    let l = sol.factor_l.as_dmatrix();
    let solve = |rhs: &CMat| {
        l.solve_lower_triangular(rhs)
            .ok_or_else(|| Error::Uncontrollable("Cholesky factor is singular".into()))
    };
    let a_tilde = solve(&(pair.a.as_dmatrix() * l))?;
    let b_tilde = solve(pair.b.as_dmatrix())?;
    let t = linalg::lower_triangular_inverse(l)
        .map_err(|_| Error::Uncontrollable("Cholesky factor is singular".into()))?;
    Ok(InTransform {
        t: ComplexMatrix::from_dmatrix(t)?,
        a_tilde: ComplexMatrix::from_dmatrix(a_tilde)?,
        b_tilde: ComplexMatrix::from_dmatrix(b_tilde)?,
        log_kappa_t: sol.log_kappa_factor(),
    })
}

/// Input matrix `B` with `BB* = I − AA*` for a stable `A` with `σ₁(A) = 1`.
///
/// Columns are `√(1 − μⱼ) vⱼ` over the eigenpairs `(μⱼ, vⱼ)` of `AA*` with
/// `μⱼ < 1 − tol`, in ascending order of `μⱼ`.
pub fn in_complete(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("A must be square, got {}x{}", a.rows(), a.cols())));
    }
    let m = a.as_dmatrix();
    let s1 = linalg::spectral_norm(m);
    if (s1 - 1.0).abs() > tol {
        return Err(Error::InvalidArgument(format!(
            "input-normal completion needs sigma_1(A) = 1, got {s1}"
        )));
    }
    let eig = nalgebra::SymmetricEigen::new(linalg::hermitian_part(&(m * m.adjoint())));
    let mut order: Vec<usize> = (0..m.nrows()).filter(|&j| eig.eigenvalues[j] < 1.0 - tol).collect();
    if order.is_empty() {
        return Err(Error::InvalidArgument("A is unitary; there is nothing to complete".into()));
    }
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mut b = CMat::zeros(m.nrows(), order.len());
    for (col, &j) in order.iter().enumerate() {
        let weight = (1.0 - eig.eigenvalues[j]).max(0.0).sqrt();
        b.set_column(col, &(eig.eigenvectors.column(j) * c64(weight, 0.0)));
    }
    ComplexMatrix::from_dmatrix(b)
}

/// `f(z, w) = (z − w)/(1 − w̄z)`
pub fn mobius(z: Complex64, w: Complex64) -> Complex64 {
    (z - w) / (c64(1.0, 0.0) - w.conj() * z)
}

/// `(I − w̄A)⁻¹(A − wI)` and `√(1 − |w|²)(I − w̄A)⁻¹B`; preserves the Stein solution.
pub fn bilinear_transform(pair: &InputPair, w: Complex64) -> Result<InputPair> {
    if w.norm() >= 1.0 {
        return Err(Error::InvalidArgument(format!("bilinear map needs |w| < 1, got {}", w.norm())));
    }
    let n = pair.n();
    let a = pair.a.as_dmatrix();
    let id = CMat::identity(n, n);
    let m = &id - a * w.conj();
    let rhs_a = a - &id * w;
    let lu = m.lu();
    let singular = || Error::Singular("I − conj(w)A is singular".into());
    let a_hat = lu.solve(&rhs_a).ok_or_else(singular)?;
    let b_hat = lu.solve(pair.b.as_dmatrix()).ok_or_else(singular)? * c64((1.0 - w.norm_sqr()).sqrt(), 0.0);
    InputPair::from_dmatrices(a_hat, b_hat)
}

/// Pair `(Â, B̂)` of the continuous Lyapunov equation `ÂP + PÂ* = −B̂B̂*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousPair {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

impl ContinuousPair {
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn d(&self) -> usize {
        self.b.cols()
    }

    /// `‖ÂP + PÂ* + B̂B̂*‖_F / ‖B̂B̂*‖_F`
    pub fn lyapunov_residual(&self, p: &CMat) -> f64 {
        let a = self.a.as_dmatrix();
        let b = self.b.as_dmatrix();
        let q = b * b.adjoint();
        let r = a * p + p * a.adjoint() + &q;
        r.norm() / q.norm().max(f64::MIN_POSITIVE)
    }
}

/// Cayley transform `Â = (A + I)⁻¹(A − I)`, `B̂ = √2 (I + A)⁻¹B`.
pub fn cayley(pair: &InputPair) -> Result<ContinuousPair> {
    let n = pair.n();
    let a = pair.a.as_dmatrix();
    let id = CMat::identity(n, n);
    let lu = (a + &id).lu();
    let singular = || Error::Singular("−1 is an eigenvalue of A".into());
    let a_hat = lu.solve(&(a - &id)).ok_or_else(singular)?;
    let b_hat = lu.solve(pair.b.as_dmatrix()).ok_or_else(singular)? * c64(2f64.sqrt(), 0.0);
    Ok(ContinuousPair { a: ComplexMatrix::from_dmatrix(a_hat)?, b: ComplexMatrix::from_dmatrix(b_hat)? })
}

/// `max |σ₁(A^k) − 1|` over `1 ≤ k` with `kd < n`, for an input-normal pair.
///
/// Zero when no such `k` exists. Pairs that are not input normal to within
/// `1e-8·n` are rejected.
pub fn verify_power_identity(in_pair: &InputPair) -> Result<f64> {
    let n = in_pair.n();
    let d = in_pair.d();
    let res = in_residual(in_pair);
    if res > 1e-8 * n as f64 {
        return Err(Error::InvalidArgument(format!("pair is not input normal (residual {res:e})")));
    }
    let a = in_pair.a.as_dmatrix();
    let mut power = a.clone();
    let mut worst: f64 = 0.0;
    let mut k = 1;
    while k * d < n {
        worst = worst.max((linalg::spectral_norm(&power) - 1.0).abs());
        power = &power * a;
        k += 1;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{EnsembleKind, EnsembleSpec};

    #[test]
    fn scalar_input_normal() {
        let tr = to_input_normal(&InputPair::scalar(0.5, 1.0)).unwrap();
        let root3 = 3f64.sqrt();
        assert!((tr.t.get(0, 0).re - root3 / 2.0).abs() < 1e-15);
        assert!((tr.a_tilde.get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((tr.b_tilde.get(0, 0).re - root3 / 2.0).abs() < 1e-15);
        assert!(tr.residual() < 1e-15);
        assert_eq!(tr.log_kappa_t, 0.0);
    }

    #[test]
    fn input_normal_pair_is_fixed() {
        // A = diag(0.6, 0.8), B = diag(0.8, 0.6): AA* + BB* = I.
        let a = ComplexMatrix::from_real_rows(&[&[0.6, 0.0], &[0.0, 0.8]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[&[0.8, 0.0], &[0.0, 0.6]]).unwrap();
        let tr = to_input_normal(&InputPair::new(a, b).unwrap()).unwrap();
        assert!(tr.log_kappa_t.abs() < 1e-12);
        assert!((tr.t.as_dmatrix() - CMat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn random_pair_becomes_input_normal() {
        let spec = EnsembleSpec::new(EnsembleKind::Generic, 8, 10, 3);
        for i in 0..10 {
            let pair = spec.draw(i).unwrap().pair;
            let tr = to_input_normal(&pair).unwrap();
            assert!(tr.residual() <= 1e-8 * 8.0, "{}", tr.residual());
            assert!(linalg::spectral_norm(tr.a_tilde.as_dmatrix()) <= 1.0 + 1e-8);
            assert!(linalg::spectral_norm(tr.b_tilde.as_dmatrix()) <= 1.0 + 1e-8);
            // T A T⁻¹ from the explicit T agrees with the triangular solves.
            let t = tr.t.as_dmatrix();
            let l = linalg::lower_triangular_inverse(t).unwrap();
            let direct = t * pair.a.as_dmatrix() * l;
            assert!((direct - tr.a_tilde.as_dmatrix()).norm() < 1e-8 * (1.0 + tr.log_kappa_t.exp()));
        }
    }

    #[test]
    fn completion_of_nilpotent_shift() {
        // A = e₂e₁ᵀ: AA* = diag(0, 1), so B must span e₁ with unit weight.
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
        let b = in_complete(&a, IN_COMPLETE_TOL).unwrap();
        assert_eq!(b.cols(), 1);
        assert!((b.get(0, 0).norm() - 1.0).abs() < 1e-15);
        assert!(b.get(1, 0).norm() < 1e-15);
    }

    #[test]
    fn completion_recovers_gram_and_determinant_identity() {
        let spec = EnsembleSpec::new(EnsembleKind::Generic, 6, 5, 11);
        for i in 0..5 {
            let pair = spec.draw(i).unwrap().pair;
            let tr = to_input_normal(&pair).unwrap();
            let b = in_complete(&tr.a_tilde, IN_COMPLETE_TOL).unwrap();
            assert_eq!(b.cols(), 1);
            let g1 = b.as_dmatrix() * b.as_dmatrix().adjoint();
            let g2 = tr.b_tilde.as_dmatrix() * tr.b_tilde.as_dmatrix().adjoint();
            assert!((g1 - g2).norm() < 1e-8);
            // Smallest singular value squared = |det|² for d = 1.
            let s = tr.a_tilde.singular_values();
            let lhs = 2.0 * s[5].ln();
            let rhs = 2.0 * pair.spectrum().unwrap().log_abs_det();
            assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn completion_rejects_non_unit_norm() {
        let a = ComplexMatrix::from_real_rows(&[&[0.5, 0.0], &[0.0, 0.5]]).unwrap();
        assert!(matches!(in_complete(&a, IN_COMPLETE_TOL), Err(Error::InvalidArgument(_))));
        assert!(in_complete(&ComplexMatrix::identity(2), IN_COMPLETE_TOL).is_err());
    }

    #[test]
    fn bilinear_examples() {
        let pair = InputPair::scalar(0.0, 1.0);
        let out = bilinear_transform(&pair, c64(0.5, 0.0)).unwrap();
        assert!((out.a.get(0, 0) - c64(-0.5, 0.0)).norm() < 1e-15);
        assert!((out.b.get(0, 0) - c64(0.75f64.sqrt(), 0.0)).norm() < 1e-15);
        let spec = EnsembleSpec::new(EnsembleKind::Generic, 5, 1, 2);
        let p = spec.draw(0).unwrap().pair;
        assert_eq!(bilinear_transform(&p, c64(0.0, 0.0)).unwrap(), p);
        assert!(bilinear_transform(&p, c64(1.0, 0.0)).is_err());
    }

    #[test]
    fn bilinear_preserves_grammian() {
        let spec = EnsembleSpec::new(EnsembleKind::Generic, 8, 3, 5);
        for i in 0..3 {
            let pair = spec.draw(i).unwrap().pair;
            let p = stein::solve_stein_direct(&pair).unwrap();
            let q = stein::solve_stein_direct(&bilinear_transform(&pair, c64(0.3, 0.0)).unwrap()).unwrap();
            assert!((q.as_dmatrix() - p.as_dmatrix()).norm() / p.frobenius_norm() < 1e-8);
        }
    }

    #[test]
    fn cayley_examples() {
        let c = cayley(&InputPair::scalar(0.0, 1.5)).unwrap();
        assert!((c.a.get(0, 0) - c64(-1.0, 0.0)).norm() < 1e-15);
        assert!((c.b.get(0, 0) - c64(1.5 * 2f64.sqrt(), 0.0)).norm() < 1e-15);
        let p = CMat::from_element(1, 1, c64(2.25, 0.0));
        assert!(c.lyapunov_residual(&p) < 1e-15);
        assert!(matches!(cayley(&InputPair::scalar(-1.0, 1.0)), Err(Error::Singular(_))));

        let spec = EnsembleSpec::new(EnsembleKind::Generic, 8, 1, 9);
        let pair = spec.draw(0).unwrap().pair;
        let p = stein::solve_stein_direct(&pair).unwrap();
        assert!(cayley(&pair).unwrap().lyapunov_residual(p.as_dmatrix()) < 1e-9);

        let sym = ComplexMatrix::from_real_rows(&[&[0.2, 0.3], &[0.3, -0.1]]).unwrap();
        let c = cayley(&InputPair::new(sym, ComplexMatrix::unit_vector(2, 0)).unwrap()).unwrap();
        assert!(linalg::is_hermitian(c.a.as_dmatrix(), 1e-14));
        assert!(linalg::hermitian_eigenvalues(c.a.as_dmatrix())[0] < 0.0);
    }

    #[test]
    fn power_identity() {
        let spec = EnsembleSpec::new(EnsembleKind::Generic, 8, 3, 4);
        for i in 0..3 {
            let tr = to_input_normal(&spec.draw(i).unwrap().pair).unwrap();
            assert!(verify_power_identity(&tr.pair()).unwrap() < 1e-6);
        }
        let scalar = to_input_normal(&InputPair::scalar(0.5, 1.0)).unwrap();
        assert_eq!(verify_power_identity(&scalar.pair()).unwrap(), 0.0);
        assert!(verify_power_identity(&InputPair::scalar(0.5, 1.0)).is_err());
    }
}
