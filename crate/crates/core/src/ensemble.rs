//! Random input-pair ensembles.
//!
//! Every sample owns an independent ChaCha stream selected by
//! `(seed, sample index)`, so an ensemble is the same sequence of pairs no
//! matter how samples are distributed over threads. Rejected draws consume
//! further values from the same stream.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::canonical::{self, CompanionSpec};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{c64, CMat, ComplexMatrix, InputPair, Spectrum};

pub const DEFAULT_REJECTION_LIMIT: usize = 10_000;

/// Relative tolerance of the controllability filter applied to every draw.
pub const CONTROLLABILITY_TOL: f64 = 1e-12;

/// Gaussian source for one sample.
#[derive(Debug, Clone)]
pub struct SampleStream {
    rng: ChaCha8Rng,
    rejection_limit: usize,
}

impl SampleStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { rng, rejection_limit: DEFAULT_REJECTION_LIMIT }
    }

    pub fn with_rejection_limit(mut self, limit: usize) -> Self {
        self.rejection_limit = limit;
        self
    }

    pub fn rejection_limit(&self) -> usize {
        self.rejection_limit
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Real standard normal matrix, filled row by row.
    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> DMatrix<f64> {
        let values: Vec<f64> = (0..rows * cols).map(|_| self.normal()).collect();
        DMatrix::from_row_slice(rows, cols, &values)
    }
}

/// One accepted draw together with what was learned while drawing it.
#[derive(Debug, Clone)]
pub struct Draw {
    pub pair: InputPair,
    pub rejections: usize,
    pub spectrum: Spectrum,
    /// Companion coefficients when the advance matrix (or its adjoint) is in companion form.
    pub companion: Option<CompanionSpec>,
}

fn accept_loop<F>(stream: &mut SampleStream, mut attempt: F) -> Result<Draw>
where
    F: FnMut(&mut SampleStream) -> Result<Option<Draw>>,
{
    let limit = stream.rejection_limit;
    let mut rejections = 0;
    loop {
        if let Some(mut draw) = attempt(stream)? {
            draw.rejections = rejections;
            return Ok(draw);
        }
        rejections += 1;
        if rejections >= limit {
            return Err(Error::RejectionLimit { limit });
        }
    }
}

/// Real Gaussian advance matrix scaled by 1/√(n+2), with its spectrum.
///
/// A draw on which every Schur variant stalls comes back as `None` and is
/// treated like any other rejected draw.
fn draw_scaled_gaussian(n: usize, stream: &mut SampleStream) -> Option<(DMatrix<f64>, Spectrum)> {
    let a = stream.normal_matrix(n, n) / ((n + 2) as f64).sqrt();
    let spectrum = Spectrum::new(linalg::real_eigenvalues(&a).ok()?);
    Some((a, spectrum))
}

fn check_dims(n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 || d > n {
        return Err(Error::Dimension(format!("need n >= 1 and 1 <= d <= n, got n={n}, d={d}")));
    }
    Ok(())
}

/// `√(n+2)·A` and `B` have i.i.d. N(0,1) entries, conditioned on stability and controllability.
pub fn sample_generic(n: usize, d: usize, stream: &mut SampleStream) -> Result<Draw> {
    check_dims(n, d)?;
    accept_loop(stream, |s| {
        let Some((a, spectrum)) = draw_scaled_gaussian(n, s) else {
            return Ok(None);
        };
        let b = s.normal_matrix(n, d);
        if !spectrum.is_stable() {
            return Ok(None);
        }
        let pair = InputPair::from_dmatrices(linalg::complexify(&a), linalg::complexify(&b))?;
        if !canonical::pbh_controllable(&pair, spectrum.eigenvalues(), CONTROLLABILITY_TOL) {
            return Ok(None);
        }
        Ok(Some(Draw { pair, rejections: 0, spectrum, companion: None }))
    })
}

/// Stable eigenvalue n-tuple induced by the generic ensemble.
fn draw_stable_spectrum(n: usize, s: &mut SampleStream) -> Result<Option<Spectrum>> {
    Ok(draw_scaled_gaussian(n, s).map(|(_, spectrum)| spectrum).filter(Spectrum::is_stable))
}

/// Diagonal advance matrix carrying the eigenvalues of a generic draw; B ~ N(0,1), n×1.
pub fn sample_normal_diag(n: usize, stream: &mut SampleStream) -> Result<Draw> {
    check_dims(n, 1)?;
    accept_loop(stream, |s| {
        let Some(spectrum) = draw_stable_spectrum(n, s)? else {
            return Ok(None);
        };
        let b = s.normal_matrix(n, 1);
        let a = CMat::from_diagonal(&nalgebra::DVector::from_vec(spectrum.eigenvalues().to_vec()));
        let pair = InputPair::from_dmatrices(a, linalg::complexify(&b))?;
        if !canonical::pbh_controllable(&pair, spectrum.eigenvalues(), CONTROLLABILITY_TOL) {
            return Ok(None);
        }
        Ok(Some(Draw { pair, rejections: 0, spectrum, companion: None }))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompanionInput {
    /// B ~ N(0,1), n×1
    Random,
    /// B = e₁ (autoregressive model)
    E1,
    /// The observability pair `(A_c*, A_c[0,:]ᵀ)`
    ArObservability,
}

pub fn sample_companion(n: usize, mode: CompanionInput, stream: &mut SampleStream) -> Result<Draw> {
    if n <= 2 {
        return Err(Error::Dimension(format!("companion ensembles need n > 2, got {n}")));
    }
    accept_loop(stream, |s| {
        let Some(spectrum) = draw_stable_spectrum(n, s)? else {
            return Ok(None);
        };
        let coeffs = canonical::charpoly_from_spectrum(&spectrum);
        let ac = canonical::build_companion(&coeffs)?;
        let (a, b, eigenvalues) = match mode {
            CompanionInput::Random => {
                let b = linalg::complexify(&s.normal_matrix(n, 1));
                (ac.into_dmatrix(), b, spectrum.eigenvalues().to_vec())
            }
            CompanionInput::E1 => {
                (ac.into_dmatrix(), ComplexMatrix::unit_vector(n, 0).into_dmatrix(), spectrum.eigenvalues().to_vec())
            }
            CompanionInput::ArObservability => {
                let m = ac.into_dmatrix();
                let b = CMat::from_fn(n, 1, |i, _| m[(0, i)]);
                let ev: Vec<Complex64> = spectrum.eigenvalues().iter().map(|z| z.conj()).collect();
                (m.adjoint(), b, ev)
            }
        };
        let pair = InputPair::from_dmatrices(a, b)?;
        let controllable = match mode {
            CompanionInput::Random => canonical::pbh_controllable(&pair, &eigenvalues, CONTROLLABILITY_TOL),
            // (A_c, e₁) is always controllable; (A_c*, first row) is controllable
            // iff A_c is nonsingular. Both pairs are routinely closer than 1e-12
            // to an uncontrollable pair, so a numerical test would censor them.
            CompanionInput::E1 => true,
            CompanionInput::ArObservability => coeffs.c0.norm() > 0.0,
        };
        if !controllable {
            return Ok(None);
        }
        Ok(Some(Draw { pair, rejections: 0, spectrum: Spectrum::new(eigenvalues), companion: Some(coeffs) }))
    })
}

/// Single Jordan block `λ₀I + Z` with B ~ N(0,1), n×1.
pub fn sample_jordan(lambda0: f64, n: usize, stream: &mut SampleStream) -> Result<Draw> {
    if lambda0 <= 0.0 || lambda0 >= 1.0 {
        return Err(Error::InvalidArgument(format!("Jordan ensemble needs 0 < λ0 < 1, got {lambda0}")));
    }
    let lambda = c64(lambda0, 0.0);
    let j = canonical::build_jordan(lambda, n)?;
    accept_loop(stream, |s| {
        let b = ComplexMatrix::from_dmatrix(linalg::complexify(&s.normal_matrix(n, 1)))?;
        let pair = InputPair::new(j.clone(), b)?;
        if !canonical::pbh_controllable(&pair, &[lambda], CONTROLLABILITY_TOL) {
            return Ok(None);
        }
        Ok(Some(Draw { pair, rejections: 0, spectrum: Spectrum::new(vec![lambda; n]), companion: None }))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Generic,
    NormalDiag,
    CompanionRandomB,
    CompanionAr,
    ArObservability,
    Jordan,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 6] = [
        EnsembleKind::Generic,
        EnsembleKind::NormalDiag,
        EnsembleKind::CompanionRandomB,
        EnsembleKind::CompanionAr,
        EnsembleKind::ArObservability,
        EnsembleKind::Jordan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Generic => "generic",
            EnsembleKind::NormalDiag => "normal-diag",
            EnsembleKind::CompanionRandomB => "companion-random-b",
            EnsembleKind::CompanionAr => "companion-ar",
            EnsembleKind::ArObservability => "ar-observability",
            EnsembleKind::Jordan => "jordan",
        }
    }

    fn tag(self) -> u64 {
        match self {
            EnsembleKind::Generic => 1,
            EnsembleKind::NormalDiag => 2,
            EnsembleKind::CompanionRandomB => 3,
            EnsembleKind::CompanionAr => 4,
            EnsembleKind::ArObservability => 5,
            EnsembleKind::Jordan => 6,
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnsembleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown ensemble kind '{s}'")))
    }
}

/// Declarative description of a random input-pair distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub d: usize,
    pub count: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jordan_lambda: Option<f64>,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n: usize, count: usize, seed: u64) -> Self {
        Self { kind, n, d: 1, count, seed, jordan_lambda: None }
    }

    pub fn jordan(lambda: f64, n: usize, count: usize, seed: u64) -> Self {
        Self { kind: EnsembleKind::Jordan, n, d: 1, count, seed, jordan_lambda: Some(lambda) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("ensemble count must be at least 1".into()));
        }
        check_dims(self.n, self.d)?;
        if self.kind != EnsembleKind::Generic && self.d != 1 {
            return Err(Error::InvalidArgument(format!("{} ensembles require d = 1", self.kind)));
        }
        match self.kind {
            EnsembleKind::CompanionRandomB | EnsembleKind::CompanionAr | EnsembleKind::ArObservability
                if self.n <= 2 =>
            {
                Err(Error::InvalidArgument("companion ensembles require n > 2".into()))
            }
            EnsembleKind::Jordan => match self.jordan_lambda {
                Some(l) if l > 0.0 && l < 1.0 => Ok(()),
                other => Err(Error::InvalidArgument(format!(
                    "jordan ensembles need jordan_lambda in (0,1), got {other:?}"
                ))),
            },
            _ => Ok(()),
        }
    }

    /// Seed of the stream family for this ensemble; distinct kinds, sizes and
    /// Jordan eigenvalues never share streams.
    pub fn stream_seed(&self) -> u64 {
        let mut h = splitmix64(self.seed);
        h = splitmix64(h ^ self.kind.tag());
        h = splitmix64(h ^ self.n as u64);
        h = splitmix64(h ^ self.d as u64);
        if let Some(l) = self.jordan_lambda {
            h = splitmix64(h ^ l.to_bits());
        }
        h
    }

    pub fn stream(&self, index: u64) -> SampleStream {
        SampleStream::new(self.stream_seed(), index)
    }

    /// Draw sample `index` of the ensemble.
    pub fn draw(&self, index: u64) -> Result<Draw> {
        self.validate()?;
        let mut stream = self.stream(index);
        match self.kind {
            EnsembleKind::Generic => sample_generic(self.n, self.d, &mut stream),
            EnsembleKind::NormalDiag => sample_normal_diag(self.n, &mut stream),
            EnsembleKind::CompanionRandomB => sample_companion(self.n, CompanionInput::Random, &mut stream),
            EnsembleKind::CompanionAr => sample_companion(self.n, CompanionInput::E1, &mut stream),
            EnsembleKind::ArObservability => {
                sample_companion(self.n, CompanionInput::ArObservability, &mut stream)
            }
            EnsembleKind::Jordan => sample_jordan(self.jordan_lambda.unwrap_or_default(), self.n, &mut stream),
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-sample result carried into the quantile tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: u64,
    pub log_kappa: f64,
    pub bound_log: Option<f64>,
    pub rejections: usize,
    #[serde(default)]
    pub aux: BTreeMap<String, f64>,
}

impl SampleRecord {
    /// Relative slack allowed when comparing against an analytic bound.
    pub const BOUND_SLACK: f64 = 1e-6;

    pub fn satisfies_bound(&self) -> bool {
        match self.bound_log {
            Some(b) => self.log_kappa >= b - Self::BOUND_SLACK * b.abs().max(1.0),
            None => true,
        }
    }
}

/// Gap between each eigenvalue and its nearest conjugate (used by tests and diagnostics).
pub fn max_conjugate_mismatch(values: &[Complex64]) -> f64 {
    values
        .iter()
        .map(|z| values.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}
