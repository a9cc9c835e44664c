//! State covariance under autocorrelated scalar forcing.
//!
//! With `z_{t+1} = Az_t + Bx_t` and `x_t` stationary with autocovariance
//! `φ_k = E[x_t x_{t−k}*]`, the state covariance is `W = lim M_tΦ_tM_t*`
//! where `M_t = (B, AB, …, A^{t−1}B)` and `Φ_t` is the Toeplitz matrix of `φ`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{c64, CMat, ComplexMatrix, InputPair};
use crate::stein;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_HORIZON: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    White,
    Ar1,
    Ma1,
    Custom,
}

/// Stationary scalar noise with spectral density between `s_min` and `s_max`.
///
/// `param` is `φ₀` for white noise and the coefficient `a` for AR(1) and
/// MA(1). Custom noise lists `φ₀, φ₁, …` explicitly (zero afterwards).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub param: f64,
    pub s_min: f64,
    pub s_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub autocov: Option<Vec<f64>>,
}

impl NoiseModel {
    pub fn white(phi0: f64) -> Result<Self> {
        Self { kind: NoiseKind::White, param: phi0, s_min: phi0, s_max: phi0, autocov: None }.validated()
    }

    /// `x_t = a x_{t−1} + e_t`: `φ_k = a^k/(1−a²)`, density `1/|1 − ae^{iω}|²`.
    pub fn ar1(a: f64) -> Result<Self> {
        let r = a.abs();
        Self { kind: NoiseKind::Ar1, param: a, s_min: (1.0 + r).powi(-2), s_max: (1.0 - r).powi(-2), autocov: None }
            .validated()
    }

    /// `x_t = e_t + a e_{t−1}`: `φ₀ = 1 + a²`, `φ₁ = a`, density `|1 + ae^{iω}|²`.
    pub fn ma1(a: f64) -> Result<Self> {
        let r = a.abs();
        Self { kind: NoiseKind::Ma1, param: a, s_min: (1.0 - r).powi(2), s_max: (1.0 + r).powi(2), autocov: None }
            .validated()
    }

    /// Finite autocovariance sequence with caller-supplied density extremes.
    pub fn custom(autocov: Vec<f64>, s_min: f64, s_max: f64) -> Result<Self> {
        let param = autocov.first().copied().unwrap_or(0.0);
        Self { kind: NoiseKind::Custom, param, s_min, s_max, autocov: Some(autocov) }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !self.param.is_finite() || !self.s_min.is_finite() || !self.s_max.is_finite() {
            return Err(Error::NonFinite);
        }
        match self.kind {
            NoiseKind::Ar1 | NoiseKind::Ma1 if self.param.abs() >= 1.0 => {
                return bad(format!("noise coefficient needs |a| < 1, got {}", self.param));
            }
            NoiseKind::Custom => match &self.autocov {
                None => return bad("custom noise needs an autocovariance list".into()),
                Some(v) if v.iter().any(|x| !x.is_finite()) => return Err(Error::NonFinite),
                _ => {}
            },
            _ => {}
        }
        if !(self.phi(0) > 0.0) {
            return bad(format!("noise variance must be positive, got {}", self.phi(0)));
        }
        if !(self.s_min > 0.0) || self.s_min > self.s_max {
            return bad(format!("need 0 < s_min <= s_max, got {} and {}", self.s_min, self.s_max));
        }
        Ok(())
    }

    /// `φ_k`
    pub fn phi(&self, k: usize) -> f64 {
        let a = self.param;
        match self.kind {
            NoiseKind::White => {
                if k == 0 {
                    a
                } else {
                    0.0
                }
            }
            NoiseKind::Ar1 => a.powi(k as i32) / (1.0 - a * a),
            NoiseKind::Ma1 => match k {
                0 => 1.0 + a * a,
                1 => a,
                _ => 0.0,
            },
            NoiseKind::Custom => self.autocov.as_ref().and_then(|v| v.get(k).copied()).unwrap_or(0.0),
        }
    }

    /// `Φ_t` with `(Φ_t)_{jk} = φ_{|j−k|}`.
    pub fn toeplitz(&self, t: usize) -> DMatrix<f64> {
        DMatrix::from_fn(t, t, |j, k| self.phi(j.abs_diff(k)))
    }

    /// `ln(S_max/S_min)`
    pub fn log_density_ratio(&self) -> f64 {
        self.s_max.ln() - self.s_min.ln()
    }
}

fn check_pair(pair: &InputPair) -> Result<()> {
    if pair.d() != 1 {
        return Err(Error::InvalidArgument(format!("colored forcing is scalar only, got d={}", pair.d())));
    }
    pair.ensure_stable()
}

/// Factor `G` with `W = GG*`, or `None` when only `W` itself is available.
fn covariance_factor(pair: &InputPair, noise: &NoiseModel, tol: f64) -> Result<(CMat, Option<CMat>)> {
    check_pair(pair)?;
    noise.validate()?;
    let n = pair.n();
    let (a, b) = (pair.a.as_dmatrix(), pair.b.as_dmatrix());
    // AR(1) and MA(1) noise are outputs of a first-order filter driven by
    // white noise, so W is a block of the Grammian of an augmented pair.
    let augmented = match noise.kind {
        NoiseKind::White => {
            let l = stein::solve(pair)?.factor_l.into_dmatrix() * c64(noise.param.sqrt(), 0.0);
            return Ok((&l * l.adjoint(), Some(l)));
        }
        NoiseKind::Ar1 => {
            // (z_{t+1}, x_{t+1}) = [[A, B], [0, a]](z_t, x_t) + (0, 1)e_{t+1}
            let mut aa = CMat::zeros(n + 1, n + 1);
            aa.view_mut((0, 0), (n, n)).copy_from(a);
            aa.view_mut((0, n), (n, 1)).copy_from(b);
            aa[(n, n)] = c64(noise.param, 0.0);
            let mut bb = CMat::zeros(n + 1, 1);
            bb[(n, 0)] = c64(1.0, 0.0);
            (aa, bb)
        }
        NoiseKind::Ma1 => {
            // (z_{t+1}, e_t) = [[A, aB], [0, 0]](z_t, e_{t−1}) + (B, 1)e_t
            let mut aa = CMat::zeros(n + 1, n + 1);
            aa.view_mut((0, 0), (n, n)).copy_from(a);
            aa.view_mut((0, n), (n, 1)).copy_from(&(b * c64(noise.param, 0.0)));
            let mut bb = CMat::zeros(n + 1, 1);
            bb.view_mut((0, 0), (n, 1)).copy_from(b);
            bb[(n, 0)] = c64(1.0, 0.0);
            (aa, bb)
        }
        NoiseKind::Custom => return Ok((state_covariance_series(pair, noise, tol)?.into_dmatrix(), None)),
    };
    let big = stein::solve(&InputPair::from_dmatrices(augmented.0, augmented.1)?)?;
    let top = big.factor_l.as_dmatrix().rows(0, n).into_owned();
    let l = linalg::compress_factor(&top);
    Ok((&l * l.adjoint(), Some(l)))
}

/// `W = lim M_tΦ_tM_t*` by the truncated series, doubling `t` until the
/// Frobenius increment is at most `tol·‖W‖_F`.
pub fn state_covariance_series(pair: &InputPair, noise: &NoiseModel, tol: f64) -> Result<ComplexMatrix> {
    check_pair(pair)?;
    noise.validate()?;
    let a = pair.a.as_dmatrix();
    let mut krylov = vec![pair.b.as_dmatrix().column(0).into_owned()];
    let mut previous: Option<CMat> = None;
    let mut t = 1;
    while t <= MAX_HORIZON {
        while krylov.len() < t {
            let next = a * krylov.last().unwrap();
            krylov.push(next);
        }
        let m = CMat::from_columns(&krylov[..t]);
        let phi = linalg::complexify(&noise.toeplitz(t));
        let w = &m * phi * m.adjoint();
        let w = linalg::hermitian_part(&w);
        if let Some(prev) = &previous {
            if (&w - prev).norm() <= tol * w.norm() {
                return ComplexMatrix::from_dmatrix(w);
            }
        }
        previous = Some(w);
        t *= 2;
    }
    Err(Error::NoConvergence { what: "colored covariance series", iterations: MAX_HORIZON })
}

/// Stationary state covariance `W` under the given noise (`d = 1`).
pub fn state_covariance_colored(pair: &InputPair, noise: &NoiseModel, tol: f64) -> Result<ComplexMatrix> {
    ComplexMatrix::from_dmatrix(covariance_factor(pair, noise, tol)?.0)
}

/// `ln κ(W)`
pub fn log_kappa_w(pair: &InputPair, noise: &NoiseModel, tol: f64) -> Result<f64> {
    if noise.kind == NoiseKind::White {
        check_pair(pair)?;
        noise.validate()?;
        return Ok(stein::solve(pair)?.log_kappa);
    }
    match covariance_factor(pair, noise, tol)? {
        (_, Some(l)) => stein::cond_from_factor(&l),
        (w, None) => {
            let ev = linalg::hermitian_eigenvalues(&w);
            let (hi, lo) = (ev[0], ev[ev.len() - 1]);
            if !(lo > 0.0) {
                return Err(Error::InfiniteCondition);
            }
            Ok(hi.ln() - lo.ln())
        }
    }
}

/// `(ln κ(W), ln κ(P) + ln(S_max/S_min))`; the first never exceeds the second.
pub fn colored_condition_bound(pair: &InputPair, noise: &NoiseModel) -> Result<(f64, f64)> {
    let lhs = log_kappa_w(pair, noise, DEFAULT_TOL)?;
    let rhs = stein::solve(pair)?.log_kappa + noise.log_density_ratio();
    Ok((lhs, rhs))
}

/// `(κ(MΦM*), κ(Φ)κ(M)²)` for Hermitian positive definite `Φ` and `M` of
/// full row rank.
pub fn sandwich_lemma_check(phi: &ComplexMatrix, m: &ComplexMatrix) -> Result<(f64, f64)> {
    let (r, c) = (m.rows(), m.cols());
    if !phi.is_square() || phi.rows() != c {
        return Err(Error::Dimension(format!("Φ must be {c}×{c}, got {}×{}", phi.rows(), phi.cols())));
    }
    if r > c {
        return Err(Error::Dimension(format!("M must be wide or square, got {r}×{c}")));
    }
    let p = phi.as_dmatrix();
    if !linalg::is_hermitian(p, 1e-12) {
        return Err(Error::InvalidArgument("Φ must be Hermitian".into()));
    }
    let chol = linalg::hermitian_part(p)
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("Φ must be positive definite".into()))?;
    let sm = linalg::jacobi_singular_values(m.as_dmatrix());
    if !(sm[r - 1] > 0.0) {
        return Err(Error::Singular("M is rank deficient".into()));
    }
    let sg = linalg::jacobi_singular_values(&(m.as_dmatrix() * chol.l()));
    let sp = linalg::hermitian_eigenvalues(p);
    let lhs = (sg[0] / sg[r - 1]).powi(2);
    let rhs = sp[0] / sp[c - 1] * (sm[0] / sm[r - 1]).powi(2);
    Ok((lhs, rhs))
}
