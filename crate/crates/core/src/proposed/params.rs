use serde::{Deserialize, Serialize};

use super::SchemeError;

/// How the per-tuple masking term `α` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaForm {
    /// `α = Σ_j (σ_j − t_j)²` with one offset per coordinate.
    #[default]
    PerCoordinate,
    /// `α = (σ_max − t)²` with a single offset.
    Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityParams {
    /// Data dimension `d`.
    #[serde(rename = "d")]
    pub dim: usize,
    /// Number of query-coordinate blocks `c`.
    #[serde(rename = "c")]
    pub split: usize,
    /// Padding width `ε`.
    #[serde(rename = "epsilon")]
    pub padding: usize,
    /// Factor turning `M̂` into integer Paillier exponents.
    pub matrix_scale: u32,
    /// Factor turning the query-side randomizers into integers.
    pub query_scale: u32,
    /// Fixed-point factor applied to real-valued input data.
    pub data_scale: u64,
    #[serde(default)]
    pub alpha_form: AlphaForm,
    /// Decimal places kept in stored ciphertexts; `None` keeps them exact.
    #[serde(default)]
    pub cipher_decimals: Option<u32>,
}

impl SecurityParams {
    pub fn new(dim: usize, split: usize, padding: usize) -> Self {
        Self {
            dim,
            split,
            padding,
            matrix_scale: 10,
            query_scale: 100,
            data_scale: 1000,
            alpha_form: AlphaForm::PerCoordinate,
            cipher_decimals: None,
        }
    }

    /// `η = d + 2 + c + ε`.
    pub fn eta(&self) -> usize {
        self.dim + 2 + self.split + self.padding
    }

    /// Length of the `τ` / `w` / `b` block, `c + ε`.
    pub fn tail_len(&self) -> usize {
        self.split + self.padding
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        if self.split <= 1 {
            return Err(SchemeError::InvalidParams(format!(
                "c must exceed 1, got {}",
                self.split
            )));
        }
        if self.split > self.dim {
            return Err(SchemeError::InvalidParams(format!(
                "c = {} exceeds d = {}",
                self.split, self.dim
            )));
        }
        if self.padding < 2 {
            return Err(SchemeError::InvalidParams(format!(
                "epsilon must be at least 2, got {}",
                self.padding
            )));
        }
        if self.matrix_scale == 0 || self.query_scale == 0 || self.data_scale == 0 {
            return Err(SchemeError::InvalidParams("scales must be positive".into()));
        }
        if self.split == self.dim {
            log::warn!(
                "c = d = {}: every query block holds a single coordinate",
                self.dim
            );
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_dimensions() {
        let p = SecurityParams::new(2, 2, 4);
        assert_eq!(p.eta(), 10);
        assert_eq!(p.tail_len(), 6);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn rejects_bad_split_and_padding() {
        assert!(SecurityParams::new(4, 1, 4).validate().is_err());
        assert!(SecurityParams::new(2, 3, 4).validate().is_err());
        assert!(SecurityParams::new(4, 2, 1).validate().is_err());
        let mut p = SecurityParams::new(4, 2, 2);
        p.query_scale = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn json_uses_short_names() {
        let json = serde_json::to_value(SecurityParams::new(2, 2, 4)).unwrap();
        assert_eq!(json["d"], 2);
        assert_eq!(json["epsilon"], 4);
        assert_eq!(json["alpha_form"], "per-coordinate");
    }
}
