//! JSON layout of a [`SchemeInstance`]. All indices are 1-based.

use serde::{Deserialize, Serialize};

use super::{D3cParams, SchemeInstance};
use crate::model::IvaId;

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|x| x + 1).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeDump {
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(rename = "N")]
    pub files: usize,
    pub parts: Vec<PartDump>,
    /// `stored[k-1]` lists the files of node `k`.
    pub stored: Vec<Vec<usize>>,
    /// `computed[k-1]` lists `C_k`.
    pub computed: Vec<Vec<IvaId>>,
    pub signals: Vec<SignalDump>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartDump {
    #[serde(flatten)]
    pub params: D3cParams,
    pub first_file: usize,
    pub batches: Vec<BatchDump>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchDump {
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    #[serde(rename = "T")]
    pub t: Vec<usize>,
    pub files: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalDump {
    pub sender: usize,
    #[serde(rename = "I")]
    pub i: Vec<usize>,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    pub segments: usize,
    pub block_files: usize,
    pub constituents: Vec<ConstituentDump>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstituentDump {
    pub target: usize,
    pub files: Vec<usize>,
    pub segment: usize,
}

impl SchemeDump {
    pub fn from_scheme(s: &SchemeInstance) -> Self {
        SchemeDump {
            nodes: s.nodes,
            files: s.files,
            parts: s
                .parts
                .iter()
                .map(|p| PartDump {
                    params: p.params,
                    first_file: p.file_offset + 1,
                    batches: p
                        .batches
                        .iter()
                        .map(|b| BatchDump {
                            s: one_based(&b.id.s),
                            t: one_based(&b.id.t),
                            files: one_based(&b.files),
                        })
                        .collect(),
                })
                .collect(),
            stored: (0..s.nodes)
                .map(|k| s.placement.stored(k).iter().map(|n| n + 1).collect())
                .collect(),
            computed: (0..s.nodes)
                .map(|k| s.assignment.computed_ivas(k))
                .collect(),
            signals: s
                .signals
                .iter()
                .map(|sig| SignalDump {
                    sender: sig.sender + 1,
                    i: one_based(&sig.group.i),
                    j: one_based(&sig.group.j),
                    segments: sig.segments,
                    block_files: sig.block_files,
                    constituents: sig
                        .constituents
                        .iter()
                        .map(|c| ConstituentDump {
                            target: c.target + 1,
                            files: one_based(&c.files),
                            segment: c.segment + 1,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}
