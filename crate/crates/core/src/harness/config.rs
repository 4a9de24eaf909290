//! Per-command configuration records. Missing JSON fields take the defaults
//! below; rationals are `"p/q"` strings.

use serde::{Deserialize, Serialize};

use crate::rational::{q, qi, serde_q, Q};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceConfig {
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(with = "serde_q")]
    pub r_step: Q,
    #[serde(with = "serde_q")]
    pub c_step: Q,
    pub float: bool,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig {
            nodes: 10,
            r_step: q(1, 10),
            c_step: q(1, 10),
            float: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(rename = "K")]
    pub nodes: usize,
    pub r: usize,
    pub g: usize,
    pub eta: usize,
    /// IVA bits; defaults to `8·lcm(1..=r)`.
    #[serde(rename = "T")]
    pub iva_bits: Option<usize>,
    #[serde(rename = "F")]
    pub file_bits: usize,
    #[serde(rename = "B")]
    pub output_bits: usize,
    pub seed: u64,
    pub timing: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            nodes: 4,
            r: 2,
            g: 1,
            eta: 1,
            iva_bits: None,
            file_bits: 64,
            output_bits: 64,
            seed: 0,
            timing: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corner {
    pub r: usize,
    pub g: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShareConfig {
    #[serde(rename = "K")]
    pub nodes: usize,
    pub a: Corner,
    pub b: Corner,
    /// File fraction given to `a`; `b` gets the rest.
    #[serde(with = "serde_q")]
    pub alpha: Q,
    #[serde(rename = "T")]
    pub iva_bits: Option<usize>,
    #[serde(rename = "F")]
    pub file_bits: usize,
    #[serde(rename = "B")]
    pub output_bits: usize,
    pub seed: u64,
    pub timing: bool,
}

impl Default for ShareConfig {
    fn default() -> Self {
        ShareConfig {
            nodes: 10,
            a: Corner { r: 2, g: 1 },
            b: Corner { r: 2, g: 2 },
            alpha: q(1, 2),
            iva_bits: None,
            file_bits: 64,
            output_bits: 64,
            seed: 0,
            timing: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    #[default]
    Exhaustive,
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(rename = "N")]
    pub files: usize,
    #[serde(with = "serde_q")]
    pub r: Q,
    #[serde(with = "serde_q")]
    pub c: Q,
    pub mode: VerifyMode,
    pub samples: usize,
    pub seed: u64,
    pub timing: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            nodes: 3,
            files: 3,
            r: qi(1),
            c: qi(1),
            mode: VerifyMode::Exhaustive,
            samples: 10_000,
            seed: 0,
            timing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub eta: usize,
    #[serde(rename = "F")]
    pub file_bits: usize,
    #[serde(rename = "B")]
    pub output_bits: usize,
    pub seed: u64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            k_min: 3,
            k_max: 6,
            eta: 1,
            file_bits: 64,
            output_bits: 64,
            seed: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_fills_defaults() {
        let c: VerifyConfig =
            serde_json::from_str(r#"{"K": 4, "N": 2, "c": "3/2", "mode": "random"}"#).unwrap();
        assert_eq!(
            (c.nodes, c.files, c.c, c.mode),
            (4, 2, q(3, 2), VerifyMode::Random)
        );
        assert_eq!(c.samples, 10_000);
        assert!(serde_json::from_str::<VerifyConfig>(r#"{"bogus": 1}"#).is_err());
        assert!(serde_json::from_str::<SurfaceConfig>(r#"{"r_step": "1/0"}"#).is_err());
    }
}
