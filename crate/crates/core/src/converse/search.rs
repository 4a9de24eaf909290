//! Exhaustive search over placements and computation assignments on tiny
//! instances.
//!
//! A per-file configuration gives every node one state: the file is not
//! stored, or it is stored and the node computes the targets in a mask
//! (possibly empty). Budgets, censuses and the counting bound are all sums of
//! per-file quantities, so an assignment over `N` files is a multiset of `N`
//! feasible configurations. Multisets are further reduced to one
//! representative per node-relabeling orbit.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{census_from_coverage, AssignmentCensus};
use crate::analytics::{c_star, optimal_load};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{ComputationAssignment, IvaId, Placement};
use crate::rational::{lcm_upto, qi, serde_opt_q, serde_q, Q};

/// Maximum number of multisets an exhaustive search may visit.
pub const SEARCH_CAP: u128 = 200_000_000;

#[derive(Clone, Debug)]
pub struct FileConfig {
    /// Per node: `None` = not stored, `Some(mask)` = stored, computing `mask`.
    pub states: Vec<Option<u32>>,
    pub stored: u64,
    pub computed: u64,
    pub census: AssignmentCensus,
    /// `Σ_j b_j · lcm(1..K-1)/j`.
    pub weight: u64,
}

/// Every feasible single-file configuration for `K` nodes, with node
/// relabeling tables.
pub struct FileConfigs {
    pub nodes: usize,
    pub configs: Vec<FileConfig>,
    /// `perm_table[p][i]`: index of config `i` after relabeling `p`.
    perm_table: Vec<Vec<u32>>,
    orbit_min: Vec<bool>,
}

fn permute_mask(mask: u32, perm: &[usize]) -> u32 {
    (0..perm.len())
        .filter(|&q| mask & (1 << q) != 0)
        .fold(0, |m, q| m | 1 << perm[q])
}

impl FileConfigs {
    pub fn new(nodes: usize) -> Self {
        let full = (1u32 << nodes) - 1;
        let lcm = lcm_upto(nodes.saturating_sub(1).max(1)) as u64;
        let per_node: Vec<Option<u32>> =
            std::iter::once(None).chain((0..=full).map(Some)).collect();
        let mut configs = Vec::new();
        let mut index = BTreeMap::new();
        for states in (0..nodes)
            .map(|_| per_node.iter().copied())
            .multi_cartesian_product()
        {
            let mut cov = vec![0u32; nodes];
            for (k, s) in states.iter().enumerate() {
                if let Some(mask) = s {
                    for (q, c) in cov.iter_mut().enumerate() {
                        if mask & (1 << q) != 0 {
                            *c |= 1 << k;
                        }
                    }
                }
            }
            let Ok(census) = census_from_coverage(nodes, 1, &cov) else {
                continue;
            };
            let weight = census
                .b
                .iter()
                .enumerate()
                .map(|(i, b)| b * lcm / (i as u64 + 1))
                .sum();
            index.insert(states.clone(), configs.len() as u32);
            configs.push(FileConfig {
                stored: states.iter().filter(|s| s.is_some()).count() as u64,
                computed: states.iter().flatten().map(|m| m.count_ones() as u64).sum(),
                states,
                census,
                weight,
            });
        }
        let perm_table: Vec<Vec<u32>> = (0..nodes)
            .permutations(nodes)
            .map(|perm| {
                configs
                    .iter()
                    .map(|cfg| {
                        let mut states = vec![None; nodes];
                        for (k, s) in cfg.states.iter().enumerate() {
                            states[perm[k]] = s.map(|m| permute_mask(m, &perm));
                        }
                        index[&states]
                    })
                    .collect()
            })
            .collect();
        let orbit_min = (0..configs.len())
            .map(|i| perm_table.iter().all(|t| t[i] as usize >= i))
            .collect();
        FileConfigs {
            nodes,
            configs,
            perm_table,
            orbit_min,
        }
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Number of multisets of `files` configurations.
    pub fn multiset_count(&self, files: usize) -> u128 {
        let m = self.len() as u128;
        (0..files as u128).fold(1u128, |acc, i| acc * (m + i) / (i + 1))
    }

    /// True if the sorted tuple is lexicographically least in its orbit.
    fn is_canonical(&self, tuple: &[u32], scratch: &mut Vec<u32>) -> bool {
        for t in &self.perm_table[1..] {
            scratch.clear();
            scratch.extend(tuple.iter().map(|&i| t[i as usize]));
            scratch.sort_unstable();
            if scratch.as_slice() < tuple {
                return false;
            }
        }
        true
    }

    /// Visits every canonical non-decreasing tuple of length `files` whose
    /// first entry is `first`.
    fn for_each_canonical<F: FnMut(&[u32])>(&self, files: usize, first: usize, mut f: F) {
        if !self.orbit_min[first] {
            return;
        }
        let mut tuple = vec![first as u32; files];
        let mut scratch = Vec::with_capacity(files);
        self.descend(&mut tuple, 1, &mut scratch, &mut f);
    }

    fn descend<F: FnMut(&[u32])>(
        &self,
        tuple: &mut Vec<u32>,
        pos: usize,
        scratch: &mut Vec<u32>,
        f: &mut F,
    ) {
        if pos == tuple.len() {
            if self.is_canonical(tuple, scratch) {
                f(tuple);
            }
            return;
        }
        for i in tuple[pos - 1]..self.len() as u32 {
            tuple[pos] = i;
            self.descend(tuple, pos + 1, scratch, f);
        }
    }

    /// Placement and assignment for a tuple of configuration indices.
    pub fn realize(&self, tuple: &[u32]) -> (Placement, ComputationAssignment) {
        let k = self.nodes;
        let mut stored = vec![BTreeSet::new(); k];
        let mut computed = vec![BTreeMap::new(); k];
        for (n, &i) in tuple.iter().enumerate() {
            for (node, s) in self.configs[i as usize].states.iter().enumerate() {
                if let Some(mask) = s {
                    stored[node].insert(n);
                    let targets: BTreeSet<usize> =
                        (0..k).filter(|q| mask & (1 << q) != 0).collect();
                    if !targets.is_empty() {
                        computed[node].insert(n, targets);
                    }
                }
            }
        }
        let p = Placement::new(tuple.len(), stored).expect("configs are valid");
        let a = ComputationAssignment::new(&p, computed).expect("configs are feasible");
        (p, a)
    }

    pub fn census_of(&self, tuple: &[u32]) -> AssignmentCensus {
        let mut it = tuple.iter().map(|&i| &self.configs[i as usize].census);
        let first = it.next().expect("non-empty tuple").clone();
        it.fold(first, |acc, c| acc.merge(c))
    }
}

fn check_size(nodes: usize, files: usize) -> Result<FileConfigs> {
    if !(2..=4).contains(&nodes) || !(1..=4).contains(&files) {
        return Err(Error::Range(format!(
            "exhaustive search needs 2 <= K <= 4 and 1 <= N <= 4, got K={nodes} N={files}"
        )));
    }
    let configs = FileConfigs::new(nodes);
    let size = configs.multiset_count(files);
    if size > SEARCH_CAP {
        return Err(Error::SearchCap {
            size,
            cap: SEARCH_CAP,
        });
    }
    Ok(configs)
}

#[derive(Clone, Copy, Default)]
struct Totals {
    stored: u64,
    computed: u64,
    sum_a: u64,
    sum_b: u64,
    excess: u64,
    weighted: u64,
    weight: u64,
}

impl Totals {
    fn of(configs: &FileConfigs, tuple: &[u32]) -> Totals {
        let mut t = Totals::default();
        for &i in tuple {
            let c = &configs.configs[i as usize];
            t.stored += c.stored;
            t.computed += c.computed;
            t.sum_a += c.census.sum_a();
            t.sum_b += c.census.sum_b();
            t.excess += c.census.sum_excess();
            t.weighted += c.census.sum_weighted();
            t.weight += c.weight;
        }
        t
    }
}

/// `(stored, computed) -> L*(r, c)` for every load pair an assignment can have
/// where the bound line applies (`r < K`, `c ≤ c*(r)`).
fn analytic_table(nodes: usize, files: usize) -> BTreeMap<(u64, u64), Q> {
    let nk = (nodes * files) as u64;
    let mut out = BTreeMap::new();
    for stored in files as u64..=nk {
        let r = Q::new(stored as i64, files as i64);
        if r >= qi(nodes) {
            continue;
        }
        let cs = c_star(r, nodes).expect("r in range");
        for computed in nk..=stored * nodes as u64 {
            let c = Q::new(computed as i64, nk as i64);
            if c <= cs {
                out.insert(
                    (stored, computed),
                    optimal_load(r, c, nodes).expect("c in range"),
                );
            }
        }
    }
    out
}

/// Property sweep over every feasible assignment (up to relabeling), each
/// judged against its own loads.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma3Sweep {
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(rename = "N")]
    pub files: usize,
    pub assignments: u64,
    pub lemma3_violations: u64,
    pub partition_violations: u64,
    pub identity_violations: u64,
    pub chain_checked: u64,
    pub chain_violations: u64,
}

impl Lemma3Sweep {
    pub fn clean(&self) -> bool {
        self.lemma3_violations == 0
            && self.partition_violations == 0
            && self.identity_violations == 0
            && self.chain_violations == 0
    }

    fn merge(mut self, o: Lemma3Sweep) -> Self {
        self.assignments += o.assignments;
        self.lemma3_violations += o.lemma3_violations;
        self.partition_violations += o.partition_violations;
        self.identity_violations += o.identity_violations;
        self.chain_checked += o.chain_checked;
        self.chain_violations += o.chain_violations;
        self
    }
}

/// Checks, for every feasible assignment over `N` files:
/// the partition identity, `Σ a_k ≤ Σ |M_k|`, `Σ a_k + Σ j b_j ≤ Σ |C_k|`,
/// both counting inequalities at the assignment's own `(r, c)`, and the
/// counting bound against `L*(r, c)` wherever the bound line applies.
pub fn exhaustive_lemma3(nodes: usize, files: usize, exec: Exec) -> Result<Lemma3Sweep> {
    let configs = check_size(nodes, files)?;
    let table = analytic_table(nodes, files);
    let nk = (nodes * files) as u64;
    let scale = nk as i64 * lcm_upto(nodes.saturating_sub(1).max(1));
    let parts = exec.map_range(configs.len(), |first| {
        let mut s = Lemma3Sweep::default();
        configs.for_each_canonical(files, first, |tuple| {
            let t = Totals::of(&configs, tuple);
            s.assignments += 1;
            if t.sum_a + t.sum_b != nk {
                s.partition_violations += 1;
            }
            if t.sum_a > t.stored || t.sum_a + t.weighted > t.computed {
                s.identity_violations += 1;
            }
            // Σ b_j ≥ NK − Σ|M_k| and Σ (j−1) b_j ≤ Σ|C_k| − NK.
            if t.sum_b + t.stored < nk || t.excess + nk > t.computed {
                s.lemma3_violations += 1;
            }
            if let Some(opt) = table.get(&(t.stored, t.computed)) {
                s.chain_checked += 1;
                if Q::new(t.weight as i64, scale) < *opt {
                    s.chain_violations += 1;
                }
            }
        });
        s
    });
    Ok(parts.into_iter().fold(
        Lemma3Sweep {
            nodes,
            files,
            ..Default::default()
        },
        Lemma3Sweep::merge,
    ))
}

/// Stored files and computed IVAs per node, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentDump {
    pub stored: Vec<Vec<usize>>,
    pub computed: Vec<Vec<IvaId>>,
}

impl AssignmentDump {
    pub fn new(p: &Placement, a: &ComputationAssignment) -> Self {
        AssignmentDump {
            stored: (0..p.nodes())
                .map(|k| p.stored(k).iter().map(|n| n + 1).collect())
                .collect(),
            computed: (0..a.nodes()).map(|k| a.computed_ivas(k)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustiveReport {
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(rename = "N")]
    pub files: usize,
    #[serde(with = "serde_q")]
    pub r_budget: Q,
    #[serde(with = "serde_q")]
    pub c_budget: Q,
    /// Canonical assignments visited.
    pub candidates: u64,
    pub within_budget: u64,
    #[serde(with = "serde_opt_q")]
    pub min_bound: Option<Q>,
    pub argmin: Option<AssignmentDump>,
    /// `λc + μ` at the budgets, when `1 ≤ c ≤ c*(r)` and `r < K`.
    #[serde(with = "serde_opt_q")]
    pub analytic_bound: Option<Q>,
    #[serde(with = "serde_opt_q")]
    pub slack: Option<Q>,
    pub lemma3_violations: u64,
    pub pass: bool,
}

/// Minimum counting bound over every feasible placement/assignment within
/// `Σ|M_k| ≤ rN` and `Σ|C_k| ≤ cNK`, compared with `λc + μ`.
pub fn exhaustive_verify(
    nodes: usize,
    files: usize,
    r_budget: Q,
    c_budget: Q,
    exec: Exec,
) -> Result<ExhaustiveReport> {
    let configs = check_size(nodes, files)?;
    let nk = (nodes * files) as i64;
    let max_stored = (r_budget * qi(files)).floor().to_integer().max(-1);
    let max_computed = (c_budget * Q::from_integer(nk))
        .floor()
        .to_integer()
        .max(-1);
    let scale = nk * lcm_upto(nodes.saturating_sub(1).max(1));

    struct Best {
        candidates: u64,
        within: u64,
        min: Option<(u64, Vec<u32>)>,
        violations: u64,
    }
    let parts = exec.map_range(configs.len(), |first| {
        let mut best = Best {
            candidates: 0,
            within: 0,
            min: None,
            violations: 0,
        };
        configs.for_each_canonical(files, first, |tuple| {
            best.candidates += 1;
            let t = Totals::of(&configs, tuple);
            if t.stored as i64 > max_stored || t.computed as i64 > max_computed {
                return;
            }
            best.within += 1;
            let (r, c) = (r_budget, c_budget);
            let slack1 = Q::from_integer(t.sum_b as i64) - qi(files) * (qi(nodes) - r);
            let slack2 = (c - qi(1)) * Q::from_integer(nk) - Q::from_integer(t.excess as i64);
            if slack1 < qi(0) || slack2 < qi(0) {
                best.violations += 1;
            }
            if best.min.as_ref().is_none_or(|(w, _)| t.weight < *w) {
                best.min = Some((t.weight, tuple.to_vec()));
            }
        });
        best
    });

    let mut candidates = 0;
    let mut within = 0;
    let mut violations = 0;
    let mut min: Option<(u64, Vec<u32>)> = None;
    for b in parts {
        candidates += b.candidates;
        within += b.within;
        violations += b.violations;
        if let Some((w, t)) = b.min {
            if min.as_ref().is_none_or(|(mw, _)| w < *mw) {
                min = Some((w, t));
            }
        }
    }

    let analytic = if r_budget >= qi(1) && r_budget < qi(nodes) && c_budget >= qi(1) {
        let cs = c_star(r_budget, nodes)?;
        (c_budget <= cs)
            .then(|| super::bound_line(r_budget, c_budget, nodes).map(|l| l.value(c_budget)))
            .transpose()?
    } else {
        None
    };
    let min_bound = min.as_ref().map(|(w, _)| Q::new(*w as i64, scale));
    let argmin = min.as_ref().map(|(_, t)| {
        let (p, a) = configs.realize(t);
        AssignmentDump::new(&p, &a)
    });
    let slack = match (min_bound, analytic) {
        (Some(m), Some(a)) => Some(m - a),
        _ => None,
    };
    let pass = violations == 0 && slack.is_none_or(|s| s >= qi(0));
    Ok(ExhaustiveReport {
        nodes,
        files,
        r_budget,
        c_budget,
        candidates,
        within_budget: within,
        min_bound,
        argmin,
        analytic_bound: analytic,
        slack,
        lemma3_violations: violations,
        pass,
    })
}
