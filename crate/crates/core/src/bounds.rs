//! Analytic lower bounds on `κ(P)` and the low-rank ADI iteration.
//!
//! Every bound is returned as a natural logarithm. Bounds on `κ(T)` (the
//! transformation to input-normal form) are doubled when stored in a
//! [`BoundReport`], since `κ(P) = κ(T)²`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::canonical::{self, CompanionSpec};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{c64, CMat, ComplexMatrix, InputPair, Spectrum};
use crate::normal_form::{self, mobius, ContinuousPair};
use crate::stein;

/// Stand-in for `ln 0` in the Penzl bound.
pub const LOG_FLOOR: f64 = -708.0;

/// Relative tolerance for treating a matrix as normal or symmetric.
const STRUCTURE_TOL: f64 = 1e-12;

pub const TRANS: &str = "trans";
pub const NORMAL: &str = "normal";
pub const NORMAL_D1: &str = "normal-d1";
pub const POWER: &str = "power";
pub const COMPANION_MU: &str = "companion-mu";
pub const COMPANION_POSITIVE: &str = "companion-positive";
pub const JORDAN: &str = "jordan";
pub const JORDAN_WEAK: &str = "jordan-weak";
pub const KREISS: &str = "kreiss";
pub const FRAC_NORMAL: &str = "frac-normal";
pub const DISK: &str = "disk";
pub const PENZL: &str = "penzl";

fn check_log_inputs(spec: &Spectrum) -> Result<()> {
    if spec.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    Ok(())
}

/// `ln max{σ₁, 1/σ₁, σₙ/∏|λᵢ|^{1/d}, σₙ(A′)/σₙ}`, a lower bound on `ln κ(T)`.
///
/// `sigma_n_in` is `σₙ` of the input-normal matrix, when the caller has it.
pub fn trans_bound(a: &ComplexMatrix, d: usize, sigma_n_in: Option<f64>) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension("advance matrix must be square".into()));
    }
    let n = a.rows();
    if d == 0 || d >= n {
        return Err(Error::InvalidArgument(format!("transformation bound needs 1 <= d < n, got d={d}, n={n}")));
    }
    let m = a.as_dmatrix();
    let spec = Spectrum::new(linalg::eigenvalues(m)?);
    let log_det = spec.log_abs_det();
    let s = linalg::jacobi_singular_values(m);
    let (s1, sn) = (s[0], s[n - 1]);
    if !(sn > 0.0) || !log_det.is_finite() {
        return Err(Error::Singular("transformation bound needs an invertible A".into()));
    }
    let mut best = s1.ln().max(-s1.ln()).max(sn.ln() - log_det / d as f64);
    if let Some(t) = sigma_n_in {
        best = best.max(t.ln() - sn.ln());
    }
    Ok(best)
}

/// Lower bound on `ln κ(P)` for normal `A`.
///
/// For `d = 1` this is `ln(1/∏_{i<n}|λᵢ|²)`; otherwise the largest of the
/// terms of [`normal_bound_terms`].
pub fn normal_bound(spec: &Spectrum, d: usize) -> Result<f64> {
    check_log_inputs(spec)?;
    if d == 1 {
        let n = spec.len();
        return Ok(-2.0 * spec.eigenvalues()[..n - 1].iter().map(|z| z.norm().ln()).sum::<f64>());
    }
    normal_bound_terms(spec, d, None)
}

/// `ln max{|λₙ|²/∏|λᵢ|^{2/d}, 1/|λ₁|², σₙ(A′)²/|λₙ|²}` (last term only when supplied).
pub fn normal_bound_terms(spec: &Spectrum, d: usize, sigma_n_in: Option<f64>) -> Result<f64> {
    check_log_inputs(spec)?;
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let ev = spec.eigenvalues();
    let log_min = ev[ev.len() - 1].norm().ln();
    if !log_min.is_finite() {
        return Err(Error::Singular("general normal bound needs a nonzero smallest eigenvalue".into()));
    }
    let mut best = (2.0 * log_min - 2.0 * spec.log_abs_det() / d as f64).max(-2.0 * ev[0].norm().ln());
    if let Some(t) = sigma_n_in {
        best = best.max(2.0 * (t.ln() - log_min));
    }
    Ok(best)
}

/// `−2k ln σ₁` with `k = ⌊(n−1)/d⌋`.
pub fn power_bound(sigma1: f64, n: usize, d: usize) -> f64 {
    let k = if d == 0 || n == 0 { 0 } else { (n - 1) / d };
    if k == 0 {
        return 0.0;
    }
    -2.0 * k as f64 * sigma1.ln()
}

/// Roots `μ±` of `μ² − Γμ + ω = 0`; `√μ±` are the non-unit singular values
/// of the companion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompanionSpectralData {
    pub gamma_big: f64,
    pub omega: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
}

impl CompanionSpectralData {
    pub fn new(spec: &CompanionSpec) -> Self {
        let gamma_big = spec.gamma_big();
        let omega = spec.omega();
        // Γ ≥ 1 + ω makes the discriminant at least (1 − ω)².
        let disc = (gamma_big * gamma_big - 4.0 * omega).max(0.0).sqrt();
        let mu_plus = 0.5 * (gamma_big + disc);
        let mu_minus = if mu_plus > 0.0 { omega / mu_plus } else { 0.0 };
        Self { gamma_big, omega, mu_plus, mu_minus }
    }

    /// `Γ − ω/(Γ−ω)` and `Γ − ω/(Γ − ω/Γ)`, the continued-fraction brackets of `μ₊`.
    pub fn brackets(&self) -> (f64, f64) {
        let (g, w) = (self.gamma_big, self.omega);
        (g - w / (g - w), g - w / (g - w / g))
    }

    /// `1 + ‖Πc‖² ≤ lower ≤ μ₊ ≤ upper ≤ Γ`, each up to `slack` relative.
    pub fn chain_holds(&self, projected_c_norm_sqr: f64, slack: f64) -> bool {
        let (lo, hi) = self.brackets();
        let chain = [1.0 + projected_c_norm_sqr, lo, self.mu_plus, hi, self.gamma_big];
        chain.windows(2).all(|w| w[0] <= w[1] + slack * w[1].abs().max(1.0))
    }
}

/// `μ±` together with the full predicted singular value list (non-increasing).
pub fn companion_singular_values(spec: &CompanionSpec) -> Result<(CompanionSpectralData, Vec<f64>)> {
    spec.validate()?;
    let n = spec.n();
    if n <= 2 {
        return Err(Error::InvalidArgument(format!("companion singular values need n > 2, got {n}")));
    }
    let data = CompanionSpectralData::new(spec);
    let ones = n - 2 - usize::from(spec.gamma);
    let mut s = vec![data.mu_plus.sqrt(), data.mu_minus.sqrt()];
    s.extend(std::iter::repeat_n(1.0, ones));
    if spec.gamma {
        s.push(0.0);
    }
    s.sort_by(|a, b| b.total_cmp(a));
    Ok((data, s))
}

/// `ln μ₊`
pub fn companion_bound(spec: &CompanionSpec) -> Result<f64> {
    Ok(companion_singular_values(spec)?.0.mu_plus.ln())
}

/// `ln(∏(1+λᵢ)²/(n+1) − ∏λᵢ²)` for a spectrum of positive reals.
pub fn companion_positive_bound(spec: &Spectrum) -> Result<f64> {
    check_log_inputs(spec)?;
    let ev = spec.eigenvalues();
    if ev.iter().any(|z| z.im != 0.0 || z.re <= 0.0) {
        return Err(Error::InvalidArgument("positive companion bound needs positive real eigenvalues".into()));
    }
    let n = ev.len() as f64;
    let log_sum: f64 = ev.iter().map(|z| (1.0 + z.re).ln()).sum();
    let log_prod: f64 = ev.iter().map(|z| z.re.ln()).sum();
    // ln(e^x − e^y) with x = 2·log_sum − ln(n+1), y = 2·log_prod.
    let x = 2.0 * log_sum - (n + 1.0).ln();
    let y = 2.0 * log_prod;
    Ok(x + (-(y - x).exp()).ln_1p())
}

/// Strong and weak forms of the single-Jordan-block bound on `ln κ(P)`.
pub fn jordan_bound(lambda0: Complex64, n: usize) -> Result<(f64, f64)> {
    let r = lambda0.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!("Jordan bound needs 0 < |λ0| < 1, got {r}")));
    }
    if n == 0 {
        return Err(Error::Dimension("Jordan block of size 0".into()));
    }
    let nf = n as f64;
    let strong = 2.0 * (-(nf.ln()) + (nf - 1.0) * ((1.0 - 1.0 / nf) / (1.0 - r)).ln());
    let weak = 2.0 * (-1.0 - nf.ln() + (nf - 1.0) * (1.0 / (1.0 - r)).ln());
    Ok((strong, weak))
}

/// Point maximizing `(|z| − 1)/|z − λ₀|ⁿ`: modulus `(n − |λ₀|)/(n − 1)`, phase of `λ₀`.
pub fn jordan_kreiss_point(lambda0: Complex64, n: usize) -> Option<Complex64> {
    if n < 2 || lambda0.norm() == 0.0 {
        return None;
    }
    let r = lambda0.norm();
    let modulus = (n as f64 - r) / (n as f64 - 1.0);
    Some(lambda0 / r * modulus)
}

/// 64 phases × 16 radii `2^{j/16}`, `j = 1..=16`, plus the Jordan point when `a` is a Jordan block.
pub fn kreiss_default_grid(a: &CMat) -> Vec<Complex64> {
    let mut grid = Vec::with_capacity(64 * 16 + 1);
    for j in 1..=16 {
        let r = 2f64.powf(j as f64 / 16.0);
        for p in 0..64 {
            grid.push(Complex64::from_polar(r, std::f64::consts::TAU * p as f64 / 64.0));
        }
    }
    if let Some(z) = canonical::detect_jordan(a).and_then(|l| jordan_kreiss_point(l, a.nrows())) {
        grid.push(z);
    }
    grid
}

/// `σₙ(M)` as `1/‖M⁻¹‖₂`, with triangular inverses when `M` is lower triangular.
fn smallest_singular_value(m: &CMat) -> f64 {
    let n = m.nrows();
    let lower = (0..n).all(|i| (i + 1..n).all(|j| m[(i, j)] == c64(0.0, 0.0)));
    let inv = if lower { linalg::lower_triangular_inverse(m) } else { linalg::inverse(m) };
    match inv {
        Ok(inv) if inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => 1.0 / linalg::spectral_norm(&inv),
        _ => 0.0,
    }
}

/// `ln max_z (|z| − 1)/σₙ(zI − A)` over the grid, a lower bound on `ln κ(T)`.
///
/// A grid point on the spectrum gives `+∞`.
pub fn kreiss_lower(a: &ComplexMatrix, grid: &[Complex64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("Kreiss grid is empty".into()));
    }
    if let Some(z) = grid.iter().find(|z| z.norm() <= 1.0) {
        return Err(Error::InvalidArgument(format!("Kreiss grid points need |z| > 1, got {z}")));
    }
    let m = a.as_dmatrix();
    let n = m.nrows();
    let mut best = f64::NEG_INFINITY;
    for &z in grid {
        let shifted = CMat::from_diagonal_element(n, n, z) - m;
        let sn = smallest_singular_value(&shifted);
        if sn == 0.0 {
            return Ok(f64::INFINITY);
        }
        best = best.max((z.norm() - 1.0).ln() - sn.ln());
    }
    Ok(best)
}

/// `ln[min_k |f(λ_k,w)|² / ∏|f(λᵢ,w)|^{2/d}]` with `f` the disk automorphism.
pub fn frac_normal_bound(spec: &Spectrum, w: Complex64, d: usize) -> Result<f64> {
    check_log_inputs(spec)?;
    if w.norm() >= 1.0 {
        return Err(Error::InvalidArgument(format!("bilinear parameter needs |w| < 1, got {}", w.norm())));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let logs: Vec<f64> = spec.eigenvalues().iter().map(|&z| mobius(z, w).norm().ln()).collect();
    if logs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Singular("bilinear image of an eigenvalue is zero".into()));
    }
    let min = logs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(2.0 * min - 2.0 * logs.iter().sum::<f64>() / d as f64)
}

/// Best [`frac_normal_bound`] over a 33×33 grid on the disk, refined by a
/// shrinking compass search. Returns the maximizing `w` and its value.
pub fn frac_normal_optimize(spec: &Spectrum, d: usize) -> Result<(Complex64, f64)> {
    let eval = |w: Complex64| frac_normal_bound(spec, w, d).unwrap_or(f64::NEG_INFINITY);
    let mut best_w = c64(0.0, 0.0);
    let mut best = frac_normal_bound(spec, best_w, d)?;
    const GRID: usize = 33;
    const REACH: f64 = 0.98;
    for i in 0..GRID {
        for j in 0..GRID {
            let w = c64(-1.0 + 2.0 * i as f64 / (GRID - 1) as f64, -1.0 + 2.0 * j as f64 / (GRID - 1) as f64);
            if w.norm() > REACH {
                continue;
            }
            let v = eval(w);
            if v > best {
                best = v;
                best_w = w;
            }
        }
    }
    let mut step = 2.0 / (GRID - 1) as f64;
    while step > 1e-6 {
        let mut moved = false;
        for dir in [c64(1.0, 0.0), c64(-1.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0)] {
            let w = best_w + dir * step;
            if w.norm() > REACH {
                continue;
            }
            let v = eval(w);
            if v > best {
                best = v;
                best_w = w;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok((best_w, best))
}

fn check_disk(x: Complex64, rho: f64, k: usize) -> Result<()> {
    if !(rho > 0.0) || x.norm() + rho >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "disk bound needs rho > 0 and |x| + rho < 1, got |x|={}, rho={rho}",
            x.norm()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("disk bound needs k >= 1".into()));
    }
    Ok(())
}

/// `−2k ln(ρ/(1 − |x|ρ − ρ²))` for eigenvalues in the disk `|λ − x| < ρ`.
pub fn disk_bound(x: Complex64, rho: f64, k: usize) -> Result<f64> {
    check_disk(x, rho, k)?;
    Ok(-2.0 * k as f64 * (rho / (1.0 - x.norm() * rho - rho * rho)).ln())
}

/// Radius `ρ/(1 − |x|² − |x|ρ)` of a disk containing `f(·, x)` of the disk `|λ − x| < ρ`.
pub fn disk_image_radius(x: Complex64, rho: f64) -> f64 {
    let r = x.norm();
    rho / (1.0 - r * r - r * rho)
}

/// [`disk_bound`] with the radius replaced by [`disk_image_radius`] when that is larger.
pub fn disk_bound_safe(x: Complex64, rho: f64, k: usize) -> Result<f64> {
    let nominal = disk_bound(x, rho, k)?;
    Ok(nominal.min(-2.0 * k as f64 * disk_image_radius(x, rho).ln()))
}

/// Low-rank ADI state: `P^{(k)} = ZZ*` with `Z` of size `n × kd`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiState {
    pub shifts: Vec<Complex64>,
    pub factor: CMat,
    pub k: usize,
}

impl AdiState {
    pub fn new(n: usize) -> Self {
        Self { shifts: Vec::new(), factor: CMat::zeros(n, 0), k: 0 }
    }

    /// `P^{(k)}`
    pub fn approximation(&self) -> CMat {
        &self.factor * self.factor.adjoint()
    }

    /// One ADI step with shift `τ` (Re τ < 0):
    /// `Z ← [f(Â,τ)Z, √(−2Re τ)(Â + τ̄I)⁻¹B̂]`, `f(Â,τ) = (Â + τ̄I)⁻¹(Â − τI)`.
    pub fn step(&mut self, pair: &ContinuousPair, tau: Complex64) -> Result<()> {
        if !(tau.re < 0.0) {
            return Err(Error::InvalidArgument(format!("ADI shifts need negative real part, got {tau}")));
        }
        let n = pair.n();
        let a = pair.a.as_dmatrix();
        let id = CMat::identity(n, n);
        let lu = (a + &id * tau.conj()).lu();
        let singular = || Error::Singular(format!("Â + conj(τ)I is singular at τ = {tau}"));
        let carried = lu.solve(&((a - &id * tau) * &self.factor)).ok_or_else(singular)?;
        let fresh = lu.solve(pair.b.as_dmatrix()).ok_or_else(singular)? * c64((-2.0 * tau.re).sqrt(), 0.0);
        let (c0, c1) = (carried.ncols(), fresh.ncols());
        let mut z = CMat::zeros(n, c0 + c1);
        z.view_mut((0, 0), (n, c0)).copy_from(&carried);
        z.view_mut((0, c0), (n, c1)).copy_from(&fresh);
        self.factor = z;
        self.shifts.push(tau);
        self.k += 1;
        Ok(())
    }
}

/// ADI iterates from `P^{(0)} = 0` through the given shifts.
pub fn adi_iterate(pair: &ContinuousPair, shifts: &[Complex64]) -> Result<AdiState> {
    let mut state = AdiState::new(pair.n());
    for &tau in shifts {
        state.step(pair, tau)?;
    }
    Ok(state)
}

/// Geometric shifts `τⱼ = −λ̂_min·κ̂^{(2j+1)/(2k)}`, `j = 0..k`, for a symmetric
/// negative-definite `Â` whose eigenvalues have moduli in `[λ̂_min, λ̂_min·κ̂]`.
pub fn penzl_shifts(lambda_min: f64, kappa_hat: f64, k: usize) -> Vec<Complex64> {
    (0..k)
        .map(|j| c64(-lambda_min * kappa_hat.powf((2 * j + 1) as f64 / (2 * k) as f64), 0.0))
        .collect()
}

/// `ln (∏_{j<k} (κ̂^{(2j+1)/2k} − 1)/(κ̂^{(2j+1)/2k} + 1))²`, floored at [`LOG_FLOOR`].
pub fn penzl_bound(kappa_hat: f64, k: usize) -> f64 {
    let mut log = 0.0;
    for j in 0..k {
        let s = kappa_hat.powf((2 * j + 1) as f64 / (2 * k) as f64);
        log += 2.0 * ((s - 1.0) / (s + 1.0)).ln();
    }
    if log.is_finite() {
        log.max(LOG_FLOOR)
    } else {
        LOG_FLOOR
    }
}

/// Moduli `(min, max)` of the eigenvalues of a symmetric negative-definite `Â`.
pub fn symmetric_spectrum_range(a_hat: &CMat) -> Result<(f64, f64)> {
    if !linalg::is_hermitian(a_hat, STRUCTURE_TOL) {
        return Err(Error::InvalidArgument("expected a Hermitian continuous-time matrix".into()));
    }
    let ev = linalg::hermitian_eigenvalues(a_hat);
    if ev[0] >= 0.0 {
        return Err(Error::Unstable { radius: ev[0] });
    }
    Ok((-ev[0], -ev[ev.len() - 1]))
}

/// `λ_{kd+1}(P)/λ₁(P)` from the Stein solution and `‖P − P^{(k)}‖₂/‖P‖₂`
/// from `k` ADI steps on the Cayley-transformed pair.
pub fn adi_decay_check(pair: &InputPair, k: usize, shifts: &[Complex64]) -> Result<(f64, f64)> {
    let (n, d) = (pair.n(), pair.d());
    if k * d >= n {
        return Err(Error::InvalidArgument(format!("ADI decay check needs kd < n, got k={k}, d={d}, n={n}")));
    }
    if shifts.len() != k {
        return Err(Error::InvalidArgument(format!("expected {k} shifts, got {}", shifts.len())));
    }
    let p = if n <= stein::DIRECT_MAX_N {
        stein::solve_stein_direct(pair)?.into_dmatrix()
    } else {
        stein::solve(pair)?.grammian()
    };
    let ev = linalg::hermitian_eigenvalues(&p);
    let lhs = ev[k * d] / ev[0];
    let state = adi_iterate(&normal_form::cayley(pair)?, shifts)?;
    let err = linalg::hermitian_eigenvalues(&(&p - state.approximation()));
    let err_norm = err.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok((lhs, err_norm / ev[0]))
}

/// Named bounds on `ln κ(P)` for one pair, plus which of them are valid for it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(flatten)]
    pub entries: BTreeMap<String, f64>,
    pub applicable: Vec<String>,
}

impl BoundReport {
    fn put(&mut self, name: &str, value: f64, applicable: bool) {
        if value.is_finite() {
            self.entries.insert(name.to_string(), value);
            if applicable {
                self.applicable.push(name.to_string());
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).copied()
    }

    pub fn is_applicable(&self, name: &str) -> bool {
        self.applicable.iter().any(|a| a == name)
    }

    /// Largest applicable entry.
    pub fn best(&self) -> Option<(&str, f64)> {
        self.applicable
            .iter()
            .filter_map(|name| self.entries.get(name).map(|v| (name.as_str(), *v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Applicable entries exceeding `log_kappa` beyond the relative slack.
    pub fn violations(&self, log_kappa: f64, slack: f64) -> Vec<(String, f64)> {
        self.applicable
            .iter()
            .filter_map(|name| {
                let v = self.entries.get(name)?;
                (log_kappa < v - slack * v.abs().max(1.0)).then(|| (name.clone(), *v))
            })
            .collect()
    }

    /// Evaluate every bound that can be computed for `pair`.
    ///
    /// `sigma_n_in` is `σₙ` of the input-normal matrix similar to `A`; it
    /// enables the optional terms of the transformation and normal bounds.
    pub fn evaluate(pair: &InputPair, sigma_n_in: Option<f64>) -> Result<Self> {
        let (n, d) = (pair.n(), pair.d());
        let a = pair.a.as_dmatrix();
        let spec = pair.spectrum()?;
        let mut report = Self::default();
        let normal = linalg::is_normal(a, STRUCTURE_TOL);

        if d < n {
            if let Ok(v) = trans_bound(&pair.a, d, sigma_n_in) {
                report.put(TRANS, 2.0 * v, true);
            }
        }
        if let Ok(v) = normal_bound_terms(&spec, d, sigma_n_in) {
            report.put(NORMAL, v, normal && d < n);
        }
        if d == 1 {
            report.put(NORMAL_D1, normal_bound(&spec, 1)?, normal);
        }
        report.put(POWER, power_bound(linalg::spectral_norm(a), n, d), true);

        let companion = CompanionSpec::detect(a).or_else(|| CompanionSpec::detect(&a.adjoint()));
        if let Some(cs) = companion.filter(|cs| cs.n() > 2) {
            report.put(COMPANION_MU, companion_bound(&cs)?, true);
            if let Ok(v) = companion_positive_bound(&spec) {
                report.put(COMPANION_POSITIVE, v, true);
            }
        }

        if let Some(lambda0) = canonical::detect_jordan(a) {
            if let Ok((strong, weak)) = jordan_bound(lambda0, n) {
                report.put(JORDAN, strong, d == 1);
                report.put(JORDAN_WEAK, weak, d == 1);
            }
        }

        let kreiss = kreiss_lower(&pair.a, &kreiss_default_grid(a))?;
        report.put(KREISS, 2.0 * kreiss, true);

        if normal {
            if let Ok((_, v)) = frac_normal_optimize(&spec, d) {
                report.put(FRAC_NORMAL, v, true);
            }
            let k = (n - 1) / d;
            let ev = spec.eigenvalues();
            if k >= 1 {
                let x = ev.iter().sum::<Complex64>() / n as f64;
                let rho = ev.iter().map(|z| (z - x).norm()).fold(0.0, f64::max) * (1.0 + 1e-12) + f64::MIN_POSITIVE;
                if let Ok(v) = disk_bound_safe(x, rho, k) {
                    report.put(DISK, v, true);
                }
            }
        }

        if linalg::is_real(a) && linalg::is_hermitian(a, STRUCTURE_TOL) && n > d {
            if let Ok(c) = normal_form::cayley(pair) {
                let sym = linalg::hermitian_part(c.a.as_dmatrix());
                if let Ok((lo, hi)) = symmetric_spectrum_range(&sym) {
                    let kappa_hat = hi / lo;
                    let kmax = (n - 1) / d;
                    let v = (1..=kmax).map(|k| -penzl_bound(kappa_hat, k)).fold(f64::NEG_INFINITY, f64::max);
                    report.put(PENZL, v, true);
                }
            }
        }
        Ok(report)
    }
}
