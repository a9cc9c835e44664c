//! Companion and Jordan canonical forms, and controllability tests.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{c64, CMat, ComplexMatrix, InputPair, Spectrum};

/// Coefficients of the companion matrix
///
/// ```text
///     ( -c*   -c0* )
///     ( Π     0    )      Π = I − γ e_p e_p*
/// ```
///
/// `c` has length n−1. `p` is 1-based and only used when `gamma` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompanionSpec {
    pub c0: Complex64,
    pub c: Vec<Complex64>,
    pub gamma: bool,
    pub p: usize,
}

impl CompanionSpec {
    /// Plain Frobenius form (γ = 0).
    pub fn frobenius(c0: Complex64, c: Vec<Complex64>) -> Self {
        Self { c0, c, gamma: false, p: 0 }
    }

    /// Companion form with the projected subdiagonal block (γ = 1).
    pub fn projected(c0: Complex64, c: Vec<Complex64>, p: usize) -> Self {
        Self { c0, c, gamma: true, p }
    }

    pub fn n(&self) -> usize {
        self.c.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma {
            let n = self.n();
            if n < 3 || self.p <= 1 || self.p > n - 1 {
                return Err(Error::InvalidArgument(format!(
                    "projected companion form needs 1 < p <= n-1, got p={} with n={n}",
                    self.p
                )));
            }
        }
        Ok(())
    }

    /// Γ = 1 + |c₀|² + ‖c‖²
    pub fn gamma_big(&self) -> f64 {
        1.0 + self.c0.norm_sqr() + self.c_norm_sqr()
    }

    /// ω = |c₀|² + γ|c_p|²
    pub fn omega(&self) -> f64 {
        let mut w = self.c0.norm_sqr();
        if self.gamma {
            w += self.c[self.p - 1].norm_sqr();
        }
        w
    }

    pub fn c_norm_sqr(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    /// ‖Π c‖²
    pub fn projected_c_norm_sqr(&self) -> f64 {
        let mut s = self.c_norm_sqr();
        if self.gamma {
            s -= self.c[self.p - 1].norm_sqr();
        }
        s
    }

    /// Recognize a matrix (exactly) in companion form, γ = 0 or 1.
    pub fn detect(a: &CMat) -> Option<Self> {
        let n = a.nrows();
        if n < 2 || a.ncols() != n {
            return None;
        }
        let mut zero_diag = None;
        for i in 1..n {
            for j in 0..n {
                let z = a[(i, j)];
                let expected_one = j + 1 == i;
                if expected_one {
                    if z == c64(1.0, 0.0) {
                        continue;
                    }
                    if z == c64(0.0, 0.0) && zero_diag.is_none() {
                        zero_diag = Some(j + 1);
                        continue;
                    }
                    return None;
                } else if z != c64(0.0, 0.0) {
                    return None;
                }
            }
        }
        let c: Vec<Complex64> = (0..n - 1).map(|j| -a[(0, j)].conj()).collect();
        let c0 = -a[(0, n - 1)].conj();
        let spec = match zero_diag {
            None => Self::frobenius(c0, c),
            Some(p) => Self::projected(c0, c, p),
        };
        spec.validate().ok().map(|_| spec)
    }
}

pub fn build_companion(spec: &CompanionSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    let n = spec.n();
    let mut a = CMat::zeros(n, n);
    for (j, cj) in spec.c.iter().enumerate() {
        a[(0, j)] = -cj.conj();
    }
    a[(0, n - 1)] = -spec.c0.conj();
    for i in 1..n {
        let diag = if spec.gamma && i == spec.p { 0.0 } else { 1.0 };
        a[(i, i - 1)] = c64(diag, 0.0);
    }
    ComplexMatrix::from_dmatrix(a)
}

/// Companion coefficients (γ = 0) whose matrix has the given eigenvalues.
///
/// With `∏(λ − λᵢ) = λⁿ + a₁λⁿ⁻¹ + … + aₙ` the first row of the companion
/// matrix is `(−a₁, …, −aₙ)`, so `cᵢ = conj(aᵢ)` and `c₀ = conj(aₙ)`.
pub fn charpoly_from_spectrum(spec: &Spectrum) -> CompanionSpec {
    let roots = spec.eigenvalues();
    let n = roots.len();
    if n == 0 {
        return CompanionSpec::frobenius(c64(0.0, 0.0), Vec::new());
    }
    // coeffs[k] multiplies λ^(n-k); coeffs[0] = 1.
    let mut coeffs = vec![c64(0.0, 0.0); n + 1];
    coeffs[0] = c64(1.0, 0.0);
    for (m, &r) in roots.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            let prev = coeffs[k - 1];
            coeffs[k] -= r * prev;
        }
    }
    // Conjugate-closed spectra expand to real polynomials; clear the roundoff.
    let conj_closed = is_conjugate_closed(roots, 1e-12);
    if conj_closed {
        for z in coeffs.iter_mut() {
            z.im = 0.0;
        }
    }
    let c = coeffs[1..n].iter().map(|z| z.conj()).collect();
    CompanionSpec::frobenius(coeffs[n].conj(), c)
}

/// True when every eigenvalue has a conjugate partner within `tol` (paired greedily).
pub fn is_conjugate_closed(values: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; values.len()];
    for i in 0..values.len() {
        if used[i] {
            continue;
        }
        let z = values[i];
        if z.im.abs() <= tol {
            used[i] = true;
            continue;
        }
        let partner = (0..values.len())
            .filter(|&j| j != i && !used[j])
            .min_by(|&x, &y| (values[x] - z.conj()).norm().total_cmp(&(values[y] - z.conj()).norm()));
        match partner {
            Some(j) if (values[j] - z.conj()).norm() <= tol => {
                used[i] = true;
                used[j] = true;
            }
            _ => return false,
        }
    }
    true
}

/// `λ₀I + Z` with `Z` the lower shift (ones on the subdiagonal).
pub fn build_jordan(lambda0: Complex64, n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::Dimension("Jordan block of size 0".into()));
    }
    if lambda0.norm() >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "Jordan eigenvalue must satisfy |λ0| < 1, got {}",
            lambda0.norm()
        )));
    }
    let mut a = CMat::from_diagonal_element(n, n, lambda0);
    for i in 1..n {
        a[(i, i - 1)] = c64(1.0, 0.0);
    }
    ComplexMatrix::from_dmatrix(a)
}

/// Recognize `λ₀I + Z` exactly.
pub fn detect_jordan(a: &CMat) -> Option<Complex64> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return None;
    }
    let lambda0 = a[(0, 0)];
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j {
                lambda0
            } else if i == j + 1 {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            };
            if a[(i, j)] != expected {
                return None;
            }
        }
    }
    Some(lambda0)
}

/// `(B, AB, …, A^{n-1}B)`
pub fn krylov_block(pair: &InputPair) -> CMat {
    let n = pair.n();
    let d = pair.d();
    let a = pair.a.as_dmatrix();
    let mut k = CMat::zeros(n, n * d);
    let mut block = pair.b.as_dmatrix().clone();
    for step in 0..n {
        k.view_mut((0, step * d), (n, d)).copy_from(&block);
        if step + 1 < n {
            block = a * &block;
        }
    }
    k
}

/// Smallest singular value of the controllability block exceeds `tol`·(largest).
pub fn controllability_check(pair: &InputPair, tol: f64) -> bool {
    let s = linalg::singular_values(&krylov_block(pair));
    let n = pair.n();
    match (s.first(), s.get(n - 1)) {
        (Some(&s1), Some(&sn)) => s1 > 0.0 && sn > tol * s1,
        _ => false,
    }
}

/// Popov–Belevitch–Hautus test at the supplied eigenvalues:
/// `σ_min([A − λI, B]) > tol·σ₁([A − λI, B])` for each λ.
pub fn pbh_controllable(pair: &InputPair, eigenvalues: &[Complex64], tol: f64) -> bool {
    let n = pair.n();
    let d = pair.d();
    let a = pair.a.as_dmatrix();
    let b = pair.b.as_dmatrix();
    eigenvalues.iter().all(|&lambda| {
        let mut m = CMat::zeros(n, n + d);
        m.view_mut((0, 0), (n, n)).copy_from(&(a - CMat::from_diagonal_element(n, n, lambda)));
        m.view_mut((0, n), (n, d)).copy_from(b);
        let s = linalg::singular_values(&m);
        let (s1, sn) = (s[0], s[n - 1]);
        s1 > 0.0 && sn > tol * s1
    })
}
