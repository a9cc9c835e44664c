//! Dense complex matrices, input pairs and ordered spectra.
//!
//! All matrices are stored as `nalgebra::DMatrix<Complex64>`. The
//! [`ComplexMatrix`] newtype is the validated boundary type: it guarantees
//! finite entries and serializes to the interchange format
//! `{"rows": r, "cols": c, "entries": [[re, im], ...]}` in row-major order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;

pub type CMat = DMatrix<Complex64>;

pub(crate) const fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(CMat);

impl ComplexMatrix {
    /// Build from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty matrix {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_iterator(rows, cols, entries))
    }

    pub fn from_dmatrix(m: CMat) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::Dimension(format!("empty matrix {}x{}", m.nrows(), m.ncols())));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    /// Build from real rows; all rows must have equal length.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let entries = rows.iter().flat_map(|row| row.iter().map(|&x| c64(x, 0.0))).collect();
        Self::new(r, c, entries)
    }

    pub fn real_column(values: &[f64]) -> Result<Self> {
        let entries = values.iter().map(|&x| c64(x, 0.0)).collect();
        Self::new(values.len(), 1, entries)
    }

    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(CMat::zeros(rows, cols))
    }

    pub fn unit_vector(n: usize, index: usize) -> Self {
        let mut m = CMat::zeros(n, 1);
        m[(index, 0)] = c64(1.0, 0.0);
        Self(m)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn as_dmatrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_dmatrix(self) -> CMat {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Singular values in non-increasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        linalg::singular_values(&self.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Row-major entry list.
    pub fn entries(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }
}

impl TryFrom<CMat> for ComplexMatrix {
    type Error = Error;

    fn try_from(m: CMat) -> Result<Self> {
        Self::from_dmatrix(m)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixWire {
            rows: self.rows(),
            cols: self.cols(),
            entries: self.entries().into_iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = MatrixWire::deserialize(deserializer)?;
        let entries = wire.entries.into_iter().map(|[re, im]| c64(re, im)).collect();
        ComplexMatrix::new(wire.rows, wire.cols, entries).map_err(serde::de::Error::custom)
    }
}

/// State advance matrix `a` (n×n) with input matrix `b` (n×d).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputPair {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

impl InputPair {
    pub fn new(a: ComplexMatrix, b: ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("A must be square, got {}x{}", a.rows(), a.cols())));
        }
        if b.rows() != a.rows() {
            return Err(Error::Dimension(format!(
                "B has {} rows but A is {}x{}",
                b.rows(),
                a.rows(),
                a.cols()
            )));
        }
        if b.cols() > a.rows() {
            return Err(Error::Dimension(format!(
                "input dimension d={} exceeds state dimension n={}",
                b.cols(),
                a.rows()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn from_dmatrices(a: CMat, b: CMat) -> Result<Self> {
        Self::new(ComplexMatrix::from_dmatrix(a)?, ComplexMatrix::from_dmatrix(b)?)
    }

    /// Scalar pair `(a, b)` with real entries.
    pub fn scalar(a: f64, b: f64) -> Self {
        Self {
            a: ComplexMatrix(CMat::from_element(1, 1, c64(a, 0.0))),
            b: ComplexMatrix(CMat::from_element(1, 1, c64(b, 0.0))),
        }
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn d(&self) -> usize {
        self.b.cols()
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        Ok(Spectrum::new(linalg::eigenvalues(self.a.as_dmatrix())?))
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self.spectrum()?.radius())
    }

    /// Errors with [`Error::Unstable`] unless the spectral radius is strictly below one.
    pub fn ensure_stable(&self) -> Result<()> {
        let radius = self.spectral_radius()?;
        if radius < 1.0 {
            Ok(())
        } else {
            Err(Error::Unstable { radius })
        }
    }
}

impl<'de> Deserialize<'de> for InputPair {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            a: ComplexMatrix,
            b: ComplexMatrix,
        }
        let w = Wire::deserialize(deserializer)?;
        InputPair::new(w.a, w.b).map_err(serde::de::Error::custom)
    }
}

/// Eigenvalues ordered by non-increasing modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct Spectrum {
    eigenvalues: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(mut eigenvalues: Vec<Complex64>) -> Self {
        // Ties in modulus (conjugate pairs) put the positive imaginary part first.
        eigenvalues.sort_by(|x, y| {
            y.norm()
                .total_cmp(&x.norm())
                .then(y.im.total_cmp(&x.im))
                .then(y.re.total_cmp(&x.re))
        });
        Self { eigenvalues }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| c64(x, 0.0)).collect())
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// |λ₁|, or zero for an empty spectrum.
    pub fn radius(&self) -> f64 {
        self.eigenvalues.first().map_or(0.0, |z| z.norm())
    }

    pub fn is_stable(&self) -> bool {
        self.radius() < 1.0
    }

    /// Sum of ln|λᵢ|; `-inf` when some eigenvalue is zero.
    pub fn log_abs_det(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm().ln()).sum()
    }
}

impl From<Vec<Complex64>> for Spectrum {
    fn from(v: Vec<Complex64>) -> Self {
        Self::new(v)
    }
}

impl From<Spectrum> for Vec<Complex64> {
    fn from(s: Spectrum) -> Self {
        s.eigenvalues
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_layout_is_row_major() {
        let m = ComplexMatrix::new(2, 2, vec![c64(1.0, 0.0), c64(2.0, 0.5), c64(3.0, 0.0), c64(4.0, -1.0)])
            .unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"rows":2,"cols":2,"entries":[[1.0,0.0],[2.0,0.5],[3.0,0.0],[4.0,-1.0]]}"#);
        assert_eq!(m.get(0, 1), c64(2.0, 0.5));
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(matches!(ComplexMatrix::new(2, 2, vec![c64(1.0, 0.0)]), Err(Error::Dimension(_))));
        assert!(matches!(
            ComplexMatrix::new(1, 1, vec![c64(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        ));
        let bad = r#"{"rows":1,"cols":2,"entries":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
    }

    #[test]
    fn input_pair_shape_checks() {
        let a = ComplexMatrix::identity(2);
        assert!(InputPair::new(a.clone(), ComplexMatrix::zeros(3, 1)).is_err());
        assert!(InputPair::new(a.clone(), ComplexMatrix::zeros(2, 3)).is_err());
        assert!(InputPair::new(ComplexMatrix::zeros(2, 3), ComplexMatrix::zeros(2, 1)).is_err());
        let p = InputPair::new(a, ComplexMatrix::zeros(2, 1)).unwrap();
        assert_eq!((p.n(), p.d()), (2, 1));
    }

    #[test]
    fn spectrum_ordering() {
        let s = Spectrum::new(vec![c64(0.1, 0.0), c64(0.0, -0.5), c64(0.0, 0.5), c64(-0.9, 0.0)]);
        let mods: Vec<f64> = s.eigenvalues().iter().map(|z| z.norm()).collect();
        assert_eq!(mods, vec![0.9, 0.5, 0.5, 0.1]);
        assert_eq!(s.eigenvalues()[1], c64(0.0, 0.5));
        assert!(s.is_stable());
        assert!(!Spectrum::from_real(&[1.0]).is_stable());
    }
}
