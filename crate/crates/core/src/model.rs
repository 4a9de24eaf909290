//! System model: jobs, files, toy map/reduce functions, placements,
//! computation assignments and the three exact load measures.
//!
//! Node and file indices are 0-based in memory. They are rendered and
//! serialized 1-based.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::rational::{serde_q, Q};

const FILE_CONTEXT: &str = "scc-core 2026-10 file corpus";
const MAP_CONTEXT: &str = "scc-core 2026-10 map function";
const REDUCE_CONTEXT: &str = "scc-core 2026-10 reduce function";

/// Cluster and problem dimensions plus the seed behind files and the toy
/// map/reduce functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSpec {
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(rename = "N")]
    pub files: usize,
    #[serde(rename = "F")]
    pub file_bits: usize,
    #[serde(rename = "T")]
    pub iva_bits: usize,
    #[serde(rename = "B")]
    pub output_bits: usize,
    pub seed: u64,
}

impl JobSpec {
    pub fn new(
        nodes: usize,
        files: usize,
        file_bits: usize,
        iva_bits: usize,
        output_bits: usize,
        seed: u64,
    ) -> Result<Self> {
        let spec = JobSpec {
            nodes,
            files,
            file_bits,
            iva_bits,
            output_bits,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::InvalidJob(format!("K = {} < 2", self.nodes)));
        }
        if self.nodes > 32 {
            return Err(Error::InvalidJob(format!("K = {} > 32", self.nodes)));
        }
        for (name, v) in [
            ("N", self.files),
            ("F", self.file_bits),
            ("T", self.iva_bits),
            ("B", self.output_bits),
        ] {
            if v == 0 {
                return Err(Error::InvalidJob(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    fn key(&self, context: &str) -> [u8; 32] {
        blake3::derive_key(context, &self.seed.to_le_bytes())
    }
}

/// Identity of the intermediate value `v_{target,file}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IvaId {
    pub target: usize,
    pub file: usize,
}

impl IvaId {
    pub fn new(target: usize, file: usize) -> Self {
        IvaId { target, file }
    }
}

impl fmt::Display for IvaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v({},{})", self.target + 1, self.file + 1)
    }
}

#[derive(Serialize, Deserialize)]
struct IvaIdRepr {
    target: usize,
    file: usize,
}

impl Serialize for IvaId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IvaIdRepr {
            target: self.target + 1,
            file: self.file + 1,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IvaId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = IvaIdRepr::deserialize(d)?;
        if r.target == 0 || r.file == 0 {
            return Err(serde::de::Error::custom("indices are 1-based"));
        }
        Ok(IvaId::new(r.target - 1, r.file - 1))
    }
}

/// Per-node stored file sets `M_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    files: usize,
    stored: Vec<BTreeSet<usize>>,
}

impl Placement {
    pub fn new(files: usize, stored: Vec<BTreeSet<usize>>) -> Result<Self> {
        for (k, set) in stored.iter().enumerate() {
            if let Some(&n) = set.iter().find(|&&n| n >= files) {
                return Err(Error::InvalidAssignment(format!(
                    "node {} stores file {} but N = {files}",
                    k + 1,
                    n + 1
                )));
            }
        }
        Ok(Placement { files, stored })
    }

    pub fn nodes(&self) -> usize {
        self.stored.len()
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn stored(&self, node: usize) -> &BTreeSet<usize> {
        &self.stored[node]
    }

    pub fn stores(&self, node: usize, file: usize) -> bool {
        self.stored[node].contains(&file)
    }

    pub fn total_stored(&self) -> usize {
        self.stored.iter().map(BTreeSet::len).sum()
    }

    /// Relabels nodes: node `k` of `self` becomes node `perm[k]`.
    pub fn permute_nodes(&self, perm: &[usize]) -> Placement {
        let mut stored = vec![BTreeSet::new(); self.nodes()];
        for (k, set) in self.stored.iter().enumerate() {
            stored[perm[k]] = set.clone();
        }
        Placement {
            files: self.files,
            stored,
        }
    }
}

/// Per-node, per-stored-file target sets `Λ_{k,n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComputationAssignment {
    files: usize,
    computed: Vec<BTreeMap<usize, BTreeSet<usize>>>,
    partial: bool,
}

impl ComputationAssignment {
    /// Builds a feasible assignment: every IVA must be computed somewhere.
    pub fn new(
        placement: &Placement,
        computed: Vec<BTreeMap<usize, BTreeSet<usize>>>,
    ) -> Result<Self> {
        let a = Self::new_partial(placement, computed)?;
        if let Some(iva) = a.uncovered().first() {
            return Err(Error::Infeasible(*iva));
        }
        Ok(ComputationAssignment {
            partial: false,
            ..a
        })
    }

    /// Builds an assignment that may leave IVAs uncomputed.
    pub fn new_partial(
        placement: &Placement,
        computed: Vec<BTreeMap<usize, BTreeSet<usize>>>,
    ) -> Result<Self> {
        let nodes = placement.nodes();
        if computed.len() != nodes {
            return Err(Error::InvalidAssignment(format!(
                "{} node entries for K = {nodes}",
                computed.len()
            )));
        }
        for (k, per_file) in computed.iter().enumerate() {
            for (&n, targets) in per_file {
                if !placement.stores(k, n) {
                    return Err(Error::InvalidAssignment(format!(
                        "node {} computes from file {} which it does not store",
                        k + 1,
                        n + 1
                    )));
                }
                if let Some(&q) = targets.iter().find(|&&q| q >= nodes) {
                    return Err(Error::InvalidAssignment(format!(
                        "target {} out of range",
                        q + 1
                    )));
                }
            }
        }
        Ok(ComputationAssignment {
            files: placement.files(),
            computed,
            partial: true,
        })
    }

    pub fn nodes(&self) -> usize {
        self.computed.len()
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn is_partial(&self) -> bool {
        self.partial
    }

    /// `Λ_{k,n}`, empty when nothing is computed.
    pub fn targets(&self, node: usize, file: usize) -> impl Iterator<Item = usize> + '_ {
        self.computed[node]
            .get(&file)
            .into_iter()
            .flat_map(|s| s.iter().copied())
    }

    pub fn per_file(&self, node: usize) -> &BTreeMap<usize, BTreeSet<usize>> {
        &self.computed[node]
    }

    pub fn computes(&self, node: usize, iva: IvaId) -> bool {
        self.computed[node]
            .get(&iva.file)
            .is_some_and(|s| s.contains(&iva.target))
    }

    /// `C_k` as a sorted list.
    pub fn computed_ivas(&self, node: usize) -> Vec<IvaId> {
        let mut out: Vec<IvaId> = self.computed[node]
            .iter()
            .flat_map(|(&n, ts)| ts.iter().map(move |&q| IvaId::new(q, n)))
            .collect();
        out.sort();
        out
    }

    /// `|C_k|`: distinct (target, file) pairs.
    pub fn computed_count(&self, node: usize) -> usize {
        self.computed[node].values().map(BTreeSet::len).sum()
    }

    pub fn total_computed(&self) -> usize {
        (0..self.nodes()).map(|k| self.computed_count(k)).sum()
    }

    /// Bitmask of computing nodes for each IVA, indexed `file * K + target`.
    pub fn coverage(&self) -> Vec<u32> {
        let k = self.nodes();
        let mut cov = vec![0u32; self.files * k];
        for (node, per_file) in self.computed.iter().enumerate() {
            for (&n, targets) in per_file {
                for &q in targets {
                    cov[n * k + q] |= 1 << node;
                }
            }
        }
        cov
    }

    pub fn uncovered(&self) -> Vec<IvaId> {
        let k = self.nodes();
        self.coverage()
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == 0)
            .map(|(i, _)| IvaId::new(i % k, i / k))
            .collect()
    }

    /// Relabels nodes (and targets) by `perm`.
    pub fn permute_nodes(&self, perm: &[usize]) -> ComputationAssignment {
        let mut computed = vec![BTreeMap::new(); self.nodes()];
        for (k, per_file) in self.computed.iter().enumerate() {
            computed[perm[k]] = per_file
                .iter()
                .map(|(&n, ts)| (n, ts.iter().map(|&q| perm[q]).collect()))
                .collect();
        }
        ComputationAssignment {
            files: self.files,
            computed,
            partial: self.partial,
        }
    }
}

/// Exact storage, computation and communication loads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadTriple {
    #[serde(with = "serde_q")]
    pub r: Q,
    #[serde(with = "serde_q")]
    pub c: Q,
    #[serde(rename = "L", with = "serde_q")]
    pub l: Q,
}

impl LoadTriple {
    pub fn new(r: Q, c: Q, l: Q) -> Self {
        LoadTriple { r, c, l }
    }
}

impl fmt::Display for LoadTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(r={}, c={}, L={})", self.r, self.c, self.l)
    }
}

/// Deterministic corpus of `N` files of `F` bits each.
pub fn generate_files(spec: &JobSpec) -> Vec<Bits> {
    let key = spec.key(FILE_CONTEXT);
    let bytes = spec.file_bits.div_ceil(8);
    (0..spec.files)
        .map(|n| {
            let mut h = blake3::Hasher::new_keyed(&key);
            h.update(&(n as u64).to_le_bytes());
            h.update(&(spec.file_bits as u64).to_le_bytes());
            let mut out = vec![0u8; bytes];
            h.finalize_xof().fill(&mut out);
            Bits::from_bytes(&out, spec.file_bits)
        })
        .collect()
}

/// Toy map function `g_{k,n}`: a keyed PRF of `(k, n, w_n)` truncated to `T` bits.
pub fn map_iva(spec: &JobSpec, k: usize, n: usize, file: &Bits) -> Result<Bits> {
    if file.len() != spec.file_bits {
        return Err(Error::WrongLength {
            expected: spec.file_bits,
            actual: file.len(),
        });
    }
    let mut h = blake3::Hasher::new_keyed(&spec.key(MAP_CONTEXT));
    h.update(&(k as u64).to_le_bytes());
    h.update(&(n as u64).to_le_bytes());
    h.update(&(file.len() as u64).to_le_bytes());
    h.update(&file.to_bytes());
    let mut out = vec![0u8; spec.iva_bits.div_ceil(8)];
    h.finalize_xof().fill(&mut out);
    Ok(Bits::from_bytes(&out, spec.iva_bits))
}

/// Toy reduce function `h_k`: keyed hash of the ordered IVA list, `B` bits.
pub fn reduce_output(spec: &JobSpec, k: usize, ivas: &[Bits]) -> Result<Bits> {
    if ivas.len() != spec.files {
        return Err(Error::WrongCount {
            expected: spec.files,
            actual: ivas.len(),
        });
    }
    let mut h = blake3::Hasher::new_keyed(&spec.key(REDUCE_CONTEXT));
    h.update(&(k as u64).to_le_bytes());
    h.update(&(ivas.len() as u64).to_le_bytes());
    for v in ivas {
        if v.len() != spec.iva_bits {
            return Err(Error::WrongLength {
                expected: spec.iva_bits,
                actual: v.len(),
            });
        }
        h.update(&v.to_bytes());
    }
    let mut out = vec![0u8; spec.output_bits.div_ceil(8)];
    h.finalize_xof().fill(&mut out);
    Ok(Bits::from_bytes(&out, spec.output_bits))
}

/// Every IVA computed centrally, indexed `[k][n]`.
pub fn oracle_ivas(spec: &JobSpec, files: &[Bits]) -> Result<Vec<Vec<Bits>>> {
    (0..spec.nodes)
        .map(|k| {
            files
                .iter()
                .enumerate()
                .map(|(n, w)| map_iva(spec, k, n, w))
                .collect()
        })
        .collect()
}

/// Centralized `φ_k` for every node.
pub fn oracle_outputs(spec: &JobSpec, files: &[Bits]) -> Result<Vec<Bits>> {
    oracle_ivas(spec, files)?
        .iter()
        .enumerate()
        .map(|(k, v)| reduce_output(spec, k, v))
        .collect()
}

/// `r = Σ_k |M_k| / N`.
pub fn storage_space(p: &Placement, files: usize) -> Q {
    Q::new(p.total_stored() as i64, files as i64)
}

/// `c = Σ_k |C_k| / (N K)`.
pub fn computation_load(a: &ComputationAssignment, files: usize, nodes: usize) -> Q {
    Q::new(a.total_computed() as i64, (files * nodes) as i64)
}

/// `L = Σ_k l_k / (N K T)`.
pub fn communication_load(total_bits: u64, files: usize, nodes: usize, iva_bits: usize) -> Q {
    Q::new(total_bits as i64, (files * nodes * iva_bits) as i64)
}

/// Placement where file `n` is stored only on node `n mod K`, with that node
/// computing all `K` IVAs of the file.
pub fn single_copy(nodes: usize, files: usize) -> (Placement, ComputationAssignment) {
    let mut stored = vec![BTreeSet::new(); nodes];
    let mut computed = vec![BTreeMap::new(); nodes];
    for n in 0..files {
        stored[n % nodes].insert(n);
        computed[n % nodes].insert(n, (0..nodes).collect());
    }
    let p = Placement::new(files, stored).expect("valid by construction");
    let a = ComputationAssignment::new(&p, computed).expect("feasible by construction");
    (p, a)
}

/// Every node stores every file and computes every IVA.
pub fn full_replication(nodes: usize, files: usize) -> (Placement, ComputationAssignment) {
    let stored = vec![(0..files).collect::<BTreeSet<_>>(); nodes];
    let all: BTreeMap<usize, BTreeSet<usize>> =
        (0..files).map(|n| (n, (0..nodes).collect())).collect();
    let p = Placement::new(files, stored).expect("valid by construction");
    let a = ComputationAssignment::new(&p, vec![all; nodes]).expect("feasible by construction");
    (p, a)
}

/// Loads of a placement/assignment pair that shuffles uncoded: each missing
/// IVA unicast once, `T` bits each.
pub fn uncoded_loads(p: &Placement, a: &ComputationAssignment, iva_bits: usize) -> LoadTriple {
    let (nodes, files) = (p.nodes(), p.files());
    let missing = (0..nodes)
        .map(|k| {
            (0..files)
                .filter(|&n| !a.computes(k, IvaId::new(k, n)))
                .count()
        })
        .sum::<usize>();
    LoadTriple::new(
        storage_space(p, files),
        computation_load(a, files, nodes),
        communication_load((missing * iva_bits) as u64, files, nodes, iva_bits),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn job(n: usize, f: usize, seed: u64) -> JobSpec {
        JobSpec::new(3, n, f, 16, 32, seed).unwrap()
    }

    #[test]
    fn job_validation() {
        assert!(JobSpec::new(1, 1, 1, 1, 1, 0).is_err());
        assert!(JobSpec::new(2, 0, 1, 1, 1, 0).is_err());
        assert!(JobSpec::new(2, 1, 1, 0, 1, 0).is_err());
        assert!(JobSpec::new(2, 1, 1, 1, 1, 0).is_ok());
    }

    #[test]
    fn files_are_deterministic() {
        let a = generate_files(&job(1, 8, 0));
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].len(), 8);
        assert_eq!(a, generate_files(&job(1, 8, 0)));

        let b = generate_files(&job(12, 32, 0));
        assert_eq!(b.len(), 12);
        assert!(b.iter().all(|w| w.len() == 32));
        assert_eq!(b, generate_files(&job(12, 32, 0)));
    }

    #[test]
    fn distinct_seeds_distinct_corpora() {
        let a = generate_files(&job(4, 64, 1));
        let b = generate_files(&job(4, 64, 2));
        assert_ne!(a, b);
        assert!(a.iter().zip(&b).all(|(x, y)| x != y));
    }

    #[test]
    fn map_contract() {
        let spec = job(2, 40, 7);
        let files = generate_files(&spec);
        let v = map_iva(&spec, 0, 0, &files[0]).unwrap();
        assert_eq!(v.len(), 16);
        assert_eq!(v, map_iva(&spec, 0, 0, &files[0]).unwrap());
        assert_ne!(v, map_iva(&spec, 1, 0, &files[0]).unwrap());
        assert_ne!(v, map_iva(&spec, 0, 1, &files[0]).unwrap());
        let short = Bits::zeros(39);
        assert!(matches!(
            map_iva(&spec, 0, 0, &short),
            Err(Error::WrongLength {
                expected: 40,
                actual: 39
            })
        ));
    }

    #[test]
    fn reduce_contract() {
        let spec = JobSpec::new(3, 4, 8, 16, 24, 3).unwrap();
        let files = generate_files(&spec);
        let ivas: Vec<Bits> = files
            .iter()
            .enumerate()
            .map(|(n, w)| map_iva(&spec, 1, n, w).unwrap())
            .collect();
        let out = reduce_output(&spec, 1, &ivas).unwrap();
        assert_eq!(out.len(), 24);
        assert_eq!(out, reduce_output(&spec, 1, &ivas).unwrap());
        for bit in 0..16 {
            let mut flipped = ivas.clone();
            flipped[2].flip(bit);
            assert_ne!(out, reduce_output(&spec, 1, &flipped).unwrap());
        }
        assert!(matches!(
            reduce_output(&spec, 1, &ivas[..3]),
            Err(Error::WrongCount { .. })
        ));
        let mut bad = ivas.clone();
        bad[0] = Bits::zeros(15);
        assert!(reduce_output(&spec, 1, &bad).is_err());
    }

    #[test]
    fn reduce_single_file() {
        let spec = JobSpec::new(2, 1, 8, 8, 16, 0).unwrap();
        let v = vec![Bits::from_bytes(&[0xab], 8)];
        let out = reduce_output(&spec, 0, &v).unwrap();
        let mut h = blake3::Hasher::new_keyed(&spec.key(REDUCE_CONTEXT));
        h.update(&0u64.to_le_bytes());
        h.update(&1u64.to_le_bytes());
        h.update(&[0xab]);
        let mut exp = [0u8; 2];
        h.finalize_xof().fill(&mut exp);
        assert_eq!(out, Bits::from_bytes(&exp, 16));
    }

    #[test]
    fn storage_examples() {
        let (p, _) = full_replication(3, 3);
        assert_eq!(storage_space(&p, 3), qi(3));
        let (p, _) = single_copy(3, 3);
        assert_eq!(storage_space(&p, 3), qi(1));
    }

    #[test]
    fn computation_examples() {
        let (p, a) = full_replication(3, 3);
        assert_eq!(computation_load(&a, 3, 3), qi(3));
        assert_eq!(computation_load(&a, 3, 3), storage_space(&p, 3));
        let (_, a) = single_copy(3, 3);
        assert_eq!(computation_load(&a, 3, 3), qi(1));
    }

    #[test]
    fn communication_examples() {
        assert_eq!(communication_load(0, 12, 4, 8), qi(0));
        assert_eq!(communication_load(192, 12, 4, 8), q(1, 2));
        let (p, a) = single_copy(3, 3);
        assert_eq!(uncoded_loads(&p, &a, 8).l, q(2, 3));
    }

    #[test]
    fn assignment_must_respect_placement() {
        let p = Placement::new(2, vec![[0].into(), [1].into()]).unwrap();
        let bad = vec![BTreeMap::from([(1, BTreeSet::from([0]))]), BTreeMap::new()];
        assert!(matches!(
            ComputationAssignment::new_partial(&p, bad),
            Err(Error::InvalidAssignment(_))
        ));
        let partial = vec![
            BTreeMap::from([(0, BTreeSet::from([0, 1]))]),
            BTreeMap::from([(1, BTreeSet::from([1]))]),
        ];
        assert!(matches!(
            ComputationAssignment::new(&p, partial.clone()),
            Err(Error::Infeasible(IvaId { target: 0, file: 1 }))
        ));
        let a = ComputationAssignment::new_partial(&p, partial).unwrap();
        assert!(a.is_partial());
        assert_eq!(a.uncovered(), vec![IvaId::new(0, 1)]);
        assert!(Placement::new(2, vec![[2].into()]).is_err());
    }

    #[test]
    fn relabeling_preserves_loads() {
        let p = Placement::new(3, vec![[0, 1].into(), [1, 2].into(), [0, 2].into()]).unwrap();
        let a = ComputationAssignment::new(
            &p,
            vec![
                BTreeMap::from([(0, BTreeSet::from([0, 1, 2])), (1, BTreeSet::from([0]))]),
                BTreeMap::from([(1, BTreeSet::from([1, 2])), (2, BTreeSet::from([0, 1, 2]))]),
                BTreeMap::from([(0, BTreeSet::from([2]))]),
            ],
        )
        .unwrap();
        let perm = [2, 0, 1];
        let (pp, pa) = (p.permute_nodes(&perm), a.permute_nodes(&perm));
        assert_eq!(uncoded_loads(&p, &a, 8), uncoded_loads(&pp, &pa, 8));
        assert!(pa.uncovered().is_empty());
    }

    #[test]
    fn iva_display_is_one_based() {
        assert_eq!(IvaId::new(0, 2).to_string(), "v(1,3)");
        let s = serde_json::to_string(&IvaId::new(1, 0)).unwrap();
        assert_eq!(s, r#"{"target":2,"file":1}"#);
        let back: IvaId = serde_json::from_str(&s).unwrap();
        assert_eq!(back, IvaId::new(1, 0));
    }
}
