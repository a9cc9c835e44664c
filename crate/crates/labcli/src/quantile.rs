//! Order-statistic quantiles with linear interpolation.

use serde::{Deserialize, Serialize};
use steincond::ensemble::SampleRecord;
use steincond::{Error, Result};

pub const PROBES: [f64; 7] = [0.01, 0.10, 0.25, 0.50, 0.75, 0.90, 0.99];

/// Quantile `q` of sorted data sits at 1-based position `1 + (N−1)q`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

pub fn quantile_values(values: &[f64], probes: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("quantiles of an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if let Some(q) = probes.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(Error::InvalidArgument(format!("probe {q} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(probes.iter().map(|&q| quantile_sorted(&sorted, q)).collect())
}

/// One table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub probes: Vec<f64>,
    pub values: Vec<f64>,
    pub iq_distance: f64,
    pub count: usize,
    #[serde(default)]
    pub excluded: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
}

impl QuantileSummary {
    pub fn from_values(n: usize, values: &[f64], probes: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument(format!("quantile summary needs at least 2 values, got {}", values.len())));
        }
        let q = quantile_values(values, probes)?;
        let mut s = Self {
            n,
            lambda: None,
            probes: probes.to_vec(),
            values: q,
            iq_distance: 0.0,
            count: values.len(),
            excluded: 0,
            bound: None,
            min: None,
        };
        s.iq_distance = s.iq_from_values();
        Ok(s)
    }

    pub fn value(&self, probe: f64) -> Option<f64> {
        self.probes.iter().position(|p| *p == probe).map(|i| self.values[i])
    }

    pub fn median(&self) -> Option<f64> {
        self.value(0.50)
    }

    /// `value(0.75) − value(0.25)`, or NaN when either probe is missing.
    pub fn iq_from_values(&self) -> f64 {
        match (self.value(0.75), self.value(0.25)) {
            (Some(hi), Some(lo)) => hi - lo,
            _ => f64::NAN,
        }
    }
}

/// Quantiles of `ln κ` over the records.
pub fn quantiles(n: usize, records: &[SampleRecord], probes: &[f64]) -> Result<QuantileSummary> {
    let values: Vec<f64> = records.iter().map(|r| r.log_kappa).collect();
    QuantileSummary::from_values(n, &values, probes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let v = [3.0, 0.0, 4.0, 1.0, 2.0];
        assert_eq!(quantile_values(&v, &[0.5, 0.25, 0.0, 1.0]).unwrap(), vec![2.0, 1.0, 0.0, 4.0]);
        assert_eq!(quantile_values(&[0.0, 1.0], &[0.3]).unwrap(), vec![0.3]);
        assert!(quantile_values(&[], &[0.5]).is_err());
        assert!(QuantileSummary::from_values(1, &[1.0], &PROBES).is_err());
    }

    #[test]
    fn summary_fields() {
        let v: Vec<f64> = (0..101).map(f64::from).collect();
        let s = QuantileSummary::from_values(8, &v, &PROBES).unwrap();
        assert_eq!(s.values, vec![1.0, 10.0, 25.0, 50.0, 75.0, 90.0, 99.0]);
        assert_eq!(s.iq_distance, 50.0);
        assert_eq!(s.median(), Some(50.0));
        assert_eq!(s.count, 101);
    }
}
