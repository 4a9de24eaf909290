//! D3C scheme construction (M-CDC when `g = r`).
//!
//! Files are split into `η·C(K,r)·C(r,g)` slots, one batch of `η` files per
//! nested pair `T ⊆ S` with `|S| = r`, `|T| = g`. Every node of `S` stores the
//! batch and computes its own IVAs from it; only the nodes of `T` also compute
//! the IVAs wanted by nodes outside `S`. The shuffle runs over nested groups
//! `J ⊆ I` with `|I| = r + 1`, `|J| = g + 1`.

mod dump;
mod share;
mod shuffle;
mod simulate;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::analytics::{corner_c, corner_load};
use crate::combin::{binomial, subsets, subsets_of, without};
use crate::error::{Error, Result};
use crate::model::{ComputationAssignment, LoadTriple, Placement};
use crate::rational::{qi, Q};

pub use dump::SchemeDump;
pub use share::{share_schemes, SharePart};
pub use shuffle::{build_shuffle_plan, Constituent, MulticastGroup, ShuffleSignal};
pub use simulate::{
    decode_shuffle, encode_signals, map_phase, run_phases, simulate, LocalStore, PhaseRun,
    Simulation, Tamper,
};

/// Integer corner parameters of one D3C instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct D3cParams {
    pub r: usize,
    pub g: usize,
    pub eta: usize,
}

impl D3cParams {
    pub fn new(nodes: usize, r: usize, g: usize, eta: usize) -> Result<Self> {
        if !(1 <= g && g <= r && r < nodes) {
            return Err(Error::Range(format!(
                "need 1 <= g <= r < K, got K={nodes} r={r} g={g}"
            )));
        }
        if nodes > 32 {
            return Err(Error::Range(format!("K = {nodes} > 32")));
        }
        if eta == 0 {
            return Err(Error::Range("eta must be at least 1".into()));
        }
        Ok(D3cParams { r, g, eta })
    }

    /// `C(K,r)·C(r,g)`: the number of batches.
    pub fn batch_count(&self, nodes: usize) -> usize {
        binomial(nodes, self.r) * binomial(self.r, self.g)
    }

    pub fn file_count(&self, nodes: usize) -> usize {
        self.eta * self.batch_count(nodes)
    }

    /// The corner `(r, r/K + (1 − r/K)g, (K − r)/(gK))` this instance attains.
    pub fn corner(&self, nodes: usize) -> LoadTriple {
        let r = qi(self.r);
        let c = corner_c(r, nodes, qi(self.g));
        LoadTriple::new(r, c, corner_load(r, nodes, c))
    }
}

/// Batch label `(S, T)` with `T ⊆ S`; sorted 0-based node lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BatchId {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Batch {
    pub id: BatchId,
    pub files: Vec<usize>,
}

/// One D3C instance over a contiguous range of files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemePart {
    pub params: D3cParams,
    pub file_offset: usize,
    pub batches: Vec<Batch>,
}

impl SchemePart {
    pub fn files(&self) -> usize {
        self.batches.iter().map(|b| b.files.len()).sum()
    }

    pub fn batch_files(&self) -> HashMap<&BatchId, &[usize]> {
        self.batches
            .iter()
            .map(|b| (&b.id, b.files.as_slice()))
            .collect()
    }
}

/// A complete map-shuffle-reduce scheme: one or more D3C parts over disjoint
/// file ranges, their union placement and assignment, and the shuffle plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeInstance {
    pub nodes: usize,
    pub files: usize,
    pub parts: Vec<SchemePart>,
    pub placement: Placement,
    pub assignment: ComputationAssignment,
    pub signals: Vec<ShuffleSignal>,
}

/// Batches in lexicographic `(S, T)` order, files handed out in index order.
fn build_part(nodes: usize, params: D3cParams, file_offset: usize) -> SchemePart {
    let mut next = file_offset;
    let mut batches = Vec::with_capacity(params.batch_count(nodes));
    for s in subsets(nodes, params.r) {
        for t in subsets_of(&s, params.g) {
            let files = (next..next + params.eta).collect();
            next += params.eta;
            batches.push(Batch {
                id: BatchId { s: s.clone(), t },
                files,
            });
        }
    }
    SchemePart {
        params,
        file_offset,
        batches,
    }
}

type PerNode = Vec<BTreeMap<usize, BTreeSet<usize>>>;

fn place_and_assign(nodes: usize, parts: &[SchemePart]) -> (Vec<BTreeSet<usize>>, PerNode) {
    let mut stored = vec![BTreeSet::new(); nodes];
    let mut computed: PerNode = vec![BTreeMap::new(); nodes];
    for part in parts {
        for batch in &part.batches {
            let outside: Vec<usize> = (0..nodes).filter(|q| !batch.id.s.contains(q)).collect();
            for &k in &batch.id.s {
                let cross = batch.id.t.contains(&k);
                for &n in &batch.files {
                    stored[k].insert(n);
                    let targets = computed[k].entry(n).or_default();
                    targets.insert(k);
                    if cross {
                        targets.extend(outside.iter().copied());
                    }
                }
            }
        }
    }
    (stored, computed)
}

pub(crate) fn assemble(nodes: usize, parts: Vec<SchemePart>) -> Result<SchemeInstance> {
    let files = parts.iter().map(SchemePart::files).sum();
    let (stored, computed) = place_and_assign(nodes, &parts);
    let placement = Placement::new(files, stored)?;
    let assignment = ComputationAssignment::new(&placement, computed)?;
    let mut scheme = SchemeInstance {
        nodes,
        files,
        parts,
        placement,
        assignment,
        signals: Vec::new(),
    };
    scheme.signals = build_shuffle_plan(&scheme);
    Ok(scheme)
}

/// Builds the D3C instance for `(K, r, g, η)`, with `N = η·C(K,r)·C(r,g)` files.
pub fn build_scheme(nodes: usize, r: usize, g: usize, eta: usize) -> Result<SchemeInstance> {
    let params = D3cParams::new(nodes, r, g, eta)?;
    assemble(nodes, vec![build_part(nodes, params, 0)])
}

/// Like [`build_scheme`], but for a given file count, which must be a
/// multiple of `C(K,r)·C(r,g)`.
pub fn build_scheme_for_files(
    nodes: usize,
    r: usize,
    g: usize,
    files: usize,
) -> Result<SchemeInstance> {
    let base = D3cParams::new(nodes, r, g, 1)?.batch_count(nodes);
    if files == 0 || !files.is_multiple_of(base) {
        return Err(Error::Divisibility(format!(
            "N = {files} is not a positive multiple of C({nodes},{r})·C({r},{g}) = {base}"
        )));
    }
    build_scheme(nodes, r, g, files / base)
}

impl SchemeInstance {
    /// Requires `T` divisible by every part's `g`.
    pub fn check_iva_bits(&self, iva_bits: usize) -> Result<()> {
        for part in &self.parts {
            if !iva_bits.is_multiple_of(part.params.g) {
                return Err(Error::Divisibility(format!(
                    "T = {iva_bits} is not a multiple of g = {}",
                    part.params.g
                )));
            }
        }
        Ok(())
    }

    /// Total shuffle bits for IVAs of `T` bits.
    pub fn shuffle_bits(&self, iva_bits: usize) -> u64 {
        self.signals
            .iter()
            .map(|s| s.payload_bits(iva_bits) as u64)
            .sum()
    }

    /// Loads read off the static scheme, without running it.
    pub fn static_loads(&self, iva_bits: usize) -> LoadTriple {
        use crate::model::{communication_load, computation_load, storage_space};
        LoadTriple::new(
            storage_space(&self.placement, self.files),
            computation_load(&self.assignment, self.files, self.nodes),
            communication_load(
                self.shuffle_bits(iva_bits),
                self.files,
                self.nodes,
                iva_bits,
            ),
        )
    }

    /// α-weighted corner loads of the parts.
    pub fn expected_loads(&self) -> LoadTriple {
        let n = qi(self.files);
        let mut out = LoadTriple::new(qi(0), qi(0), qi(0));
        for part in &self.parts {
            let w: Q = qi(part.files()) / n;
            let c = part.params.corner(self.nodes);
            out.r += w * c.r;
            out.c += w * c.c;
            out.l += w * c.l;
        }
        out
    }

    pub fn part_of_file(&self, file: usize) -> &SchemePart {
        self.parts
            .iter()
            .find(|p| (p.file_offset..p.file_offset + p.files()).contains(&file))
            .expect("file index within scheme")
    }

    pub fn to_dump(&self) -> SchemeDump {
        SchemeDump::from_scheme(self)
    }
}

pub(crate) fn remove(set: &[usize], x: usize) -> Vec<usize> {
    without(set, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn k4_r2_g1() {
        let s = build_scheme(4, 2, 1, 1).unwrap();
        assert_eq!(s.files, 12);
        assert_eq!(s.parts[0].batches.len(), 12);
        for k in 0..4 {
            assert_eq!(s.placement.stored(k).len(), 6);
        }
        let loads = s.static_loads(8);
        assert_eq!((loads.r, loads.c), (qi(2), qi(1)));
    }

    #[test]
    fn k4_r2_g2_is_mcdc() {
        let s = build_scheme(4, 2, 2, 1).unwrap();
        assert_eq!(s.files, 6);
        assert_eq!(s.static_loads(8).c, q(3, 2));
        // With T = S every stored file's IVAs are computed by the whole of S.
        for b in &s.parts[0].batches {
            assert_eq!(b.id.s, b.id.t);
        }
    }

    #[test]
    fn k3_r2_g1_storage() {
        let s = build_scheme(3, 2, 1, 1).unwrap();
        assert_eq!(s.files, 6);
        assert_eq!(s.placement.stored(0).len(), 4);
    }

    #[test]
    fn batch_order_is_lexicographic() {
        let s = build_scheme(3, 2, 1, 2).unwrap();
        let ids: Vec<(Vec<usize>, Vec<usize>)> = s.parts[0]
            .batches
            .iter()
            .map(|b| (b.id.s.clone(), b.id.t.clone()))
            .collect();
        assert_eq!(
            ids,
            vec![
                (vec![0, 1], vec![0]),
                (vec![0, 1], vec![1]),
                (vec![0, 2], vec![0]),
                (vec![0, 2], vec![2]),
                (vec![1, 2], vec![1]),
                (vec![1, 2], vec![2]),
            ]
        );
        assert_eq!(s.parts[0].batches[1].files, vec![2, 3]);
    }

    #[test]
    fn range_and_divisibility_errors() {
        assert!(matches!(build_scheme(4, 4, 1, 1), Err(Error::Range(_))));
        assert!(matches!(build_scheme(4, 2, 3, 1), Err(Error::Range(_))));
        assert!(matches!(build_scheme(4, 2, 0, 1), Err(Error::Range(_))));
        assert!(matches!(build_scheme(4, 2, 1, 0), Err(Error::Range(_))));
        assert!(matches!(
            build_scheme_for_files(4, 2, 1, 18),
            Err(Error::Divisibility(_))
        ));
        assert_eq!(build_scheme_for_files(4, 2, 1, 24).unwrap().files, 24);
        let s = build_scheme(5, 3, 2, 1).unwrap();
        assert!(s.check_iva_bits(9).is_err());
        assert!(s.check_iva_bits(8).is_ok());
    }

    #[test]
    fn placement_and_census_invariants() {
        for k in 3..=6 {
            for r in 1..k {
                for g in 1..=r {
                    let eta = 2;
                    let s = build_scheme(k, r, g, eta).unwrap();
                    let per_node = eta * binomial(k - 1, r - 1) * binomial(r, g);
                    for node in 0..k {
                        assert_eq!(s.placement.stored(node).len(), per_node);
                    }
                    for n in 0..s.files {
                        let holders = (0..k).filter(|&node| s.placement.stores(node, n)).count();
                        assert_eq!(holders, r);
                    }
                    assert_eq!(
                        s.assignment.total_computed(),
                        r * s.files + g * (k - r) * s.files
                    );
                    // Each IVA wanted outside S is computed by exactly g nodes.
                    let cov = s.assignment.coverage();
                    for n in 0..s.files {
                        for q in 0..k {
                            let m = cov[n * k + q];
                            let expect = if s.placement.stores(q, n) { 1 } else { g };
                            assert_eq!(m.count_ones() as usize, expect);
                        }
                    }
                    assert_eq!(
                        s.static_loads(lcm_t(r)),
                        D3cParams::new(k, r, g, eta).unwrap().corner(k)
                    );
                }
            }
        }
    }

    fn lcm_t(r: usize) -> usize {
        crate::rational::lcm_upto(r) as usize * 8
    }
}
