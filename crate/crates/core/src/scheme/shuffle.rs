//! XOR multicast shuffle plan.
//!
//! For a group `J ⊆ I` and a node `k ∈ J`, the IVAs that `k` needs from batch
//! `(I∖{k}, J∖{k})` form one block of `η·T` bits. The block is cut into `g`
//! contiguous segments, handed to the nodes of `J∖{k}` in ascending order.
//! Node `j ∈ J` multicasts the XOR of its segments over all `k ∈ J∖{j}`.

use serde::{Deserialize, Serialize};

use super::{remove, BatchId, SchemeInstance};
use crate::combin::{subsets, subsets_of};
use crate::model::IvaId;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MulticastGroup {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
}

/// Segment `segment` of the concatenation `v_{target,files[0]} ‖ …`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constituent {
    pub target: usize,
    pub files: Vec<usize>,
    pub segment: usize,
}

impl Constituent {
    pub fn ivas(&self) -> impl Iterator<Item = IvaId> + '_ {
        self.files.iter().map(|&n| IvaId::new(self.target, n))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShuffleSignal {
    pub sender: usize,
    pub group: MulticastGroup,
    /// Segments per block (`g`).
    pub segments: usize,
    /// Files per block (`η`).
    pub block_files: usize,
    pub constituents: Vec<Constituent>,
}

impl ShuffleSignal {
    /// `η·T/g`.
    pub fn payload_bits(&self, iva_bits: usize) -> usize {
        self.block_files * iva_bits / self.segments
    }
}

pub fn build_shuffle_plan(scheme: &SchemeInstance) -> Vec<ShuffleSignal> {
    let k_all = scheme.nodes;
    let mut out = Vec::new();
    for part in &scheme.parts {
        let (r, g) = (part.params.r, part.params.g);
        let batches = part.batch_files();
        for i in subsets(k_all, r + 1) {
            for j in subsets_of(&i, g + 1) {
                let group = MulticastGroup {
                    i: i.clone(),
                    j: j.clone(),
                };
                for &sender in &j {
                    let constituents = j
                        .iter()
                        .filter(|&&k| k != sender)
                        .map(|&k| {
                            let id = BatchId {
                                s: remove(&i, k),
                                t: remove(&j, k),
                            };
                            let helpers = &id.t;
                            let segment = helpers
                                .iter()
                                .position(|&h| h == sender)
                                .expect("sender belongs to J∖{k}");
                            Constituent {
                                target: k,
                                files: batches[&id].to_vec(),
                                segment,
                            }
                        })
                        .collect();
                    out.push(ShuffleSignal {
                        sender,
                        group: group.clone(),
                        segments: g,
                        block_files: part.params.eta,
                        constituents,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::build_scheme;
    use crate::combin::binomial;
    use crate::model::communication_load;
    use crate::rational::q;
    use std::collections::HashMap;

    #[test]
    fn k4_r2_g1_counts() {
        let s = build_scheme(4, 2, 1, 1).unwrap();
        assert_eq!(s.signals.len(), 24);
        let groups: std::collections::HashSet<_> = s.signals.iter().map(|x| &x.group).collect();
        assert_eq!(groups.len(), 12);
        for sig in &s.signals {
            assert_eq!(sig.payload_bits(8), 8);
            // g = 1: one constituent per signal.
            assert_eq!(sig.constituents.len(), 1);
        }
        assert_eq!(communication_load(s.shuffle_bits(8), 12, 4, 8), q(1, 2));
    }

    #[test]
    fn k4_r2_g2_counts() {
        let s = build_scheme(4, 2, 2, 1).unwrap();
        assert_eq!(s.signals.len(), 12);
        assert!(s.signals.iter().all(|x| x.payload_bits(8) == 4));
        assert_eq!(communication_load(s.shuffle_bits(8), 6, 4, 8), q(1, 4));
    }

    #[test]
    fn signal_count_formula() {
        for k in 3..=6 {
            for r in 1..k {
                for g in 1..=r {
                    let s = build_scheme(k, r, g, 1).unwrap();
                    assert_eq!(
                        s.signals.len(),
                        binomial(k, r + 1) * binomial(r + 1, g + 1) * (g + 1)
                    );
                }
            }
        }
    }

    #[test]
    fn structural_invariants() {
        for (k, r, g) in [(4, 2, 1), (5, 3, 2), (5, 3, 3), (6, 4, 2)] {
            let s = build_scheme(k, r, g, 2).unwrap();
            // (group, target, files) -> segments seen in that group
            type Key = (Vec<usize>, Vec<usize>, usize, Vec<usize>);
            let mut seen: HashMap<Key, Vec<usize>> = HashMap::new();
            for sig in &s.signals {
                assert!(sig.group.j.contains(&sig.sender));
                assert!(sig.group.j.iter().all(|x| sig.group.i.contains(x)));
                assert_eq!(sig.group.i.len(), r + 1);
                assert_eq!(sig.group.j.len(), g + 1);
                assert_eq!(sig.constituents.len(), g);
                for c in &sig.constituents {
                    for iva in c.ivas() {
                        assert!(s.assignment.computes(sig.sender, iva), "sender knows {iva}");
                        assert!(!s.placement.stores(c.target, iva.file));
                    }
                    seen.entry((
                        sig.group.i.clone(),
                        sig.group.j.clone(),
                        c.target,
                        c.files.clone(),
                    ))
                    .or_default()
                    .push(c.segment);
                }
            }
            for segs in seen.values_mut() {
                segs.sort();
                assert_eq!(
                    *segs,
                    (0..g).collect::<Vec<_>>(),
                    "each segment exactly once"
                );
            }
        }
    }
}
