//! JSON state files.
//!
//! ```json
//! {"m": 1, "format": "alpha", "alpha0": 1.0,
//!  "coefficients": [{"indices": [1, 2], "value": 0.5}]}
//! {"m": 1, "format": "dense", "dense_re": [[1, 0], [0, 0]], "dense_im": [[0, 0], [0, 0]]}
//! ```
//!
//! Readers check the invariants in a fixed order and report the first one
//! that fails.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clifford::{assemble, check_modes, expand_even, DenseOperator, OperatorExpansion};
use crate::error::{Error, Result};
use crate::gaussian::GaussianSpec;
use crate::{CMat, C64};

/// Tolerance used when validating densities read from disk.
pub const READ_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateFormat {
    Alpha,
    Dense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub indices: Vec<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub m: usize,
    pub format: StateFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<CoefficientEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_re: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_im: Option<Vec<Vec<f64>>>,
}

impl StateFile {
    pub fn from_operator(rho: &DenseOperator, format: StateFormat) -> Result<Self> {
        let m = rho.modes();
        match format {
            StateFormat::Alpha => {
                let e = expand_even(rho)?;
                Ok(Self {
                    m,
                    format,
                    alpha0: Some(e.alpha0),
                    coefficients: Some(
                        e.coefficients
                            .into_iter()
                            .map(|(indices, value)| CoefficientEntry { indices, value })
                            .collect(),
                    ),
                    dense_re: None,
                    dense_im: None,
                })
            }
            StateFormat::Dense => {
                let a = rho.matrix();
                let d = a.nrows();
                let grid = |f: fn(C64) -> f64| -> Vec<Vec<f64>> {
                    (0..d).map(|i| (0..d).map(|j| f(a[(i, j)])).collect()).collect()
                };
                Ok(Self {
                    m,
                    format,
                    alpha0: None,
                    coefficients: None,
                    dense_re: Some(grid(|z| z.re)),
                    dense_im: Some(grid(|z| z.im)),
                })
            }
        }
    }

    /// Decode without density checks.
    pub fn to_operator(&self) -> Result<DenseOperator> {
        check_modes(self.m)?;
        let has_alpha = self.alpha0.is_some() || self.coefficients.is_some();
        let has_dense = self.dense_re.is_some() || self.dense_im.is_some();
        match self.format {
            StateFormat::Alpha => {
                if has_dense {
                    return Err(Error::Format(
                        "alpha format must not carry dense_re/dense_im".into(),
                    ));
                }
                let alpha0 = self
                    .alpha0
                    .ok_or_else(|| Error::Format("alpha format requires alpha0".into()))?;
                let mut e = OperatorExpansion::new(self.m, alpha0);
                for entry in self.coefficients.iter().flatten() {
                    if e.coefficients.contains_key(&entry.indices) {
                        return Err(Error::Format(format!(
                            "duplicate coefficient for {:?}",
                            entry.indices
                        )));
                    }
                    e.set(entry.indices.clone(), entry.value)?;
                }
                assemble(&e)
            }
            StateFormat::Dense => {
                if has_alpha {
                    return Err(Error::Format(
                        "dense format must not carry alpha0/coefficients".into(),
                    ));
                }
                let d = 1usize << self.m;
                let re = self
                    .dense_re
                    .as_ref()
                    .ok_or_else(|| Error::Format("dense format requires dense_re".into()))?;
                let im = self
                    .dense_im
                    .as_ref()
                    .ok_or_else(|| Error::Format("dense format requires dense_im".into()))?;
                for (name, g) in [("dense_re", re), ("dense_im", im)] {
                    if g.len() != d || g.iter().any(|row| row.len() != d) {
                        return Err(Error::Format(format!("{name} must be {d}x{d}")));
                    }
                }
                DenseOperator::new(self.m, CMat::from_fn(d, d, |i, j| C64::new(re[i][j], im[i][j])))
            }
        }
    }
}

/// Parse and validate an even density operator.
pub fn parse_state(text: &str) -> Result<DenseOperator> {
    let file: StateFile = serde_json::from_str(text)?;
    let rho = file.to_operator()?;
    rho.validate_even_density(READ_TOL)?;
    Ok(rho)
}

pub fn read_state(path: impl AsRef<Path>) -> Result<DenseOperator> {
    parse_state(&std::fs::read_to_string(path)?)
}

pub fn state_to_json(rho: &DenseOperator, format: StateFormat) -> Result<String> {
    Ok(serde_json::to_string_pretty(&StateFile::from_operator(rho, format)?)?)
}

pub fn write_state(path: impl AsRef<Path>, rho: &DenseOperator, format: StateFormat) -> Result<()> {
    std::fs::write(path, state_to_json(rho, format)? + "\n")?;
    Ok(())
}

pub fn read_spec(path: impl AsRef<Path>) -> Result<GaussianSpec> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn write_spec(path: impl AsRef<Path>, spec: &GaussianSpec) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(spec)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_payloads_rejected() {
        let text = r#"{"m":1,"format":"alpha","alpha0":1.0,"coefficients":[],
            "dense_re":[[0.5,0],[0,0.5]],"dense_im":[[0,0],[0,0]]}"#;
        assert!(matches!(parse_state(text), Err(Error::Format(_))));
    }

    #[test]
    fn non_psd_alpha_reported() {
        let text = r#"{"m":1,"format":"alpha","alpha0":1.0,
            "coefficients":[{"indices":[1,2],"value":0.8}]}"#;
        assert!(matches!(parse_state(text), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn unit_trace_checked_before_psd() {
        let text = r#"{"m":1,"format":"alpha","alpha0":2.0,"coefficients":[]}"#;
        assert!(matches!(parse_state(text), Err(Error::Normalization { .. })));
    }
}
