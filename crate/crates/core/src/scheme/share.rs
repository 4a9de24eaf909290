//! Time/memory sharing: disjoint file fractions each run their own D3C
//! instance, so the loads are the fraction-weighted means of the parts.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{assemble, build_part, D3cParams, SchemeInstance};
use crate::error::{Error, Result};
use crate::rational::{qi, serde_q, Q};

/// One ingredient of a shared scheme: corner `(r, g)` on a fraction `alpha`
/// of the files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharePart {
    pub r: usize,
    pub g: usize,
    #[serde(with = "serde_q")]
    pub alpha: Q,
}

impl SharePart {
    pub fn new(r: usize, g: usize, alpha: Q) -> Self {
        SharePart { r, g, alpha }
    }
}

/// Builds the smallest composite scheme in which part `i` covers exactly the
/// fraction `alpha_i` of the files. Parts with `alpha = 0` are dropped.
pub fn share_schemes(nodes: usize, parts: &[SharePart]) -> Result<SchemeInstance> {
    if parts.is_empty() {
        return Err(Error::Range("no parts to share".into()));
    }
    let total: Q = parts.iter().map(|p| p.alpha).sum();
    if total != qi(1) {
        return Err(Error::Range(format!(
            "sharing weights sum to {total}, not 1"
        )));
    }
    if let Some(p) = parts.iter().find(|p| p.alpha < qi(0)) {
        return Err(Error::Range(format!("negative sharing weight {}", p.alpha)));
    }
    let live: Vec<(D3cParams, Q)> = parts
        .iter()
        .filter(|p| p.alpha > qi(0))
        .map(|p| {
            let params = D3cParams::new(nodes, p.r, p.g, 1)?;
            // Batches per unit of file fraction.
            Ok((params, p.alpha / qi(params.batch_count(nodes))))
        })
        .collect::<Result<_>>()?;

    // η_i ∝ alpha_i / base_i, scaled to the smallest integer vector.
    let den = live.iter().fold(1i64, |acc, (_, x)| acc.lcm(x.denom()));
    let scaled: Vec<i64> = live
        .iter()
        .map(|(_, x)| (x * Q::from_integer(den)).to_integer())
        .collect();
    let g = scaled.iter().fold(0i64, |acc, &x| acc.gcd(&x));

    let mut offset = 0;
    let mut built = Vec::with_capacity(live.len());
    for ((params, _), eta) in live.into_iter().zip(scaled) {
        let params = D3cParams {
            eta: (eta / g) as usize,
            ..params
        };
        let part = build_part(nodes, params, offset);
        offset += part.files();
        built.push(part);
    }
    assemble(nodes, built)
}
