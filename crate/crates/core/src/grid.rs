use std::str::FromStr;

use serde::Serialize;

use crate::error::{ElassoError, Result};

/// Tuning values to evaluate, in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaGrid(Vec<f64>);

impl EtaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(ElassoError::Config("eta grid is empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(ElassoError::NegativeTuning(*bad));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ElassoError::Config("eta grid must be strictly increasing".into()));
        }
        Ok(Self(values))
    }

    /// `count` evenly spaced values from `lo` to `hi` inclusive.
    pub fn linear(lo: f64, hi: f64, count: usize) -> Result<Self> {
        match count {
            0 => Err(ElassoError::Config("eta grid is empty".into())),
            1 => Self::new(vec![lo]),
            _ => {
                let step = (hi - lo) / (count - 1) as f64;
                let mut v: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
                v[count - 1] = hi;
                Self::new(v)
            }
        }
    }

    /// `count` log-spaced values from `lo > 0` to `hi` inclusive.
    pub fn geometric(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0) {
            return Err(ElassoError::Config(format!(
                "geometric grid needs a positive lower end, got {lo}"
            )));
        }
        if count == 0 {
            return Err(ElassoError::Config("eta grid is empty".into()));
        }
        let step = if count > 1 {
            (hi.ln() - lo.ln()) / (count - 1) as f64
        } else {
            0.0
        };
        let mut v: Vec<f64> = (0..count).map(|i| (lo.ln() + step * i as f64).exp()).collect();
        v[0] = lo;
        if count > 1 {
            v[count - 1] = hi;
        }
        Self::new(v)
    }

    /// 100 evenly spaced values on `[0, 2.5]`.
    pub fn default_cv() -> Self {
        Self::linear(0.0, 2.5, 100).expect("valid default grid")
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for EtaGrid {
    type Err = ElassoError;

    /// `lo:hi:count` (linear) or `lo:hi:count:log` (geometric).
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || ElassoError::Config(format!("invalid grid {s:?}; expected lo:hi:count[:log]"));
        if parts.len() < 3 || parts.len() > 4 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        match parts.get(3).map(|p| p.trim()) {
            None | Some("lin") => Self::linear(lo, hi, count),
            Some("log") => Self::geometric(lo, hi, count),
            Some(_) => Err(bad()),
        }
    }
}
