//! Counting quantities behind the communication lower bound, and numeric
//! checks of it.
//!
//! For a node `k` and a node set `S ∋ k`, `b_{S,j}^k` counts the IVAs
//! `v_{k,n}` that node `k` does not compute and that are computed by exactly
//! `j` nodes of `S∖{k}` and by no node outside `S`. With `S = [K]` these are
//! the global counts `b_j`, and `a_k` counts the IVAs `v_{k,n}` node `k`
//! computes itself.

mod random;
mod search;

use serde::{Deserialize, Serialize};

use crate::analytics::{c_star, corner_c, corner_load};
use crate::error::{Error, Result};
use crate::model::{ComputationAssignment, IvaId, Placement};
use crate::rational::{ceil, floor, qi, serde_q, Q};

pub use random::{random_verify, sample_assignment, RandomConfig, RandomReport};
pub use search::{
    exhaustive_lemma3, exhaustive_verify, ExhaustiveReport, FileConfigs, Lemma3Sweep, SEARCH_CAP,
};

/// Global census over `S = [K]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentCensus {
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(rename = "N")]
    pub files: usize,
    /// `a_k`, indexed by node.
    pub a: Vec<u64>,
    /// `b_j` at index `j - 1`, for `j = 1..K-1`.
    pub b: Vec<u64>,
}

impl AssignmentCensus {
    pub fn b_j(&self, j: usize) -> u64 {
        self.b[j - 1]
    }

    pub fn sum_a(&self) -> u64 {
        self.a.iter().sum()
    }

    pub fn sum_b(&self) -> u64 {
        self.b.iter().sum()
    }

    /// `Σ_j (j − 1) b_j`.
    pub fn sum_excess(&self) -> u64 {
        self.b.iter().enumerate().map(|(i, b)| i as u64 * b).sum()
    }

    /// `Σ_j j b_j`.
    pub fn sum_weighted(&self) -> u64 {
        self.b
            .iter()
            .enumerate()
            .map(|(i, b)| (i as u64 + 1) * b)
            .sum()
    }

    /// `Σ_k a_k + Σ_j b_j = NK`.
    pub fn partition_holds(&self) -> bool {
        self.sum_a() + self.sum_b() == (self.nodes * self.files) as u64
    }

    /// Census of the union of two assignments over disjoint file sets.
    pub fn merge(&self, other: &AssignmentCensus) -> AssignmentCensus {
        assert_eq!(self.nodes, other.nodes);
        AssignmentCensus {
            nodes: self.nodes,
            files: self.files + other.files,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
            b: self.b.iter().zip(&other.b).map(|(x, y)| x + y).collect(),
        }
    }
}

/// `b_{S,j}^k` for one node set `S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetCensus {
    pub subset: Vec<usize>,
    /// `per_node[i][j-1] = b_{S,j}^{subset[i]}`.
    pub per_node: Vec<Vec<u64>>,
}

impl SubsetCensus {
    /// `b_{S,j} = Σ_{k∈S} b_{S,j}^k`.
    pub fn b_sj(&self, j: usize) -> u64 {
        self.per_node.iter().map(|v| v[j - 1]).sum()
    }
}

/// Census from per-IVA coverage masks (`cov[n * K + q]` = nodes computing
/// `v_{q,n}`). Every mask must be non-empty.
pub fn census_from_coverage(nodes: usize, files: usize, cov: &[u32]) -> Result<AssignmentCensus> {
    let mut a = vec![0u64; nodes];
    let mut b = vec![0u64; nodes.saturating_sub(1)];
    for n in 0..files {
        for k in 0..nodes {
            let m = cov[n * nodes + k];
            if m == 0 {
                return Err(Error::Infeasible(IvaId::new(k, n)));
            }
            if m & (1 << k) != 0 {
                a[k] += 1;
            } else {
                b[m.count_ones() as usize - 1] += 1;
            }
        }
    }
    Ok(AssignmentCensus { nodes, files, a, b })
}

fn check_pair(p: &Placement, a: &ComputationAssignment) -> Result<()> {
    if p.nodes() != a.nodes() || p.files() != a.files() {
        return Err(Error::InvalidAssignment(
            "placement and assignment dimensions differ".into(),
        ));
    }
    for k in 0..a.nodes() {
        if let Some(&n) = a.per_file(k).keys().find(|&&n| !p.stores(k, n)) {
            return Err(Error::InvalidAssignment(format!(
                "node {} computes from unstored file {}",
                k + 1,
                n + 1
            )));
        }
    }
    Ok(())
}

/// Global census; infeasible assignments are rejected.
pub fn census(p: &Placement, a: &ComputationAssignment) -> Result<AssignmentCensus> {
    check_pair(p, a)?;
    census_from_coverage(a.nodes(), a.files(), &a.coverage())
}

/// `b_{S,j}^k` for every `k ∈ subset` and `j = 1..|S|-1`.
pub fn subset_census(a: &ComputationAssignment, subset: &[usize]) -> Result<SubsetCensus> {
    let nodes = a.nodes();
    if subset.is_empty() || subset.iter().any(|&k| k >= nodes) {
        return Err(Error::Range(
            "subset must be a non-empty set of nodes".into(),
        ));
    }
    let s_mask = subset.iter().fold(0u32, |m, &k| m | 1 << k);
    let cov = a.coverage();
    if let Some(i) = cov.iter().position(|&m| m == 0) {
        return Err(Error::Infeasible(IvaId::new(i % nodes, i / nodes)));
    }
    let per_node = subset
        .iter()
        .map(|&k| {
            let mut v = vec![0u64; subset.len() - 1];
            for n in 0..a.files() {
                let m = cov[n * nodes + k];
                if m & (1 << k) == 0 && m & !s_mask == 0 {
                    v[m.count_ones() as usize - 1] += 1;
                }
            }
            v
        })
        .collect();
    Ok(SubsetCensus {
        subset: subset.to_vec(),
        per_node,
    })
}

/// Slacks of the two counting inequalities; both are non-negative when they
/// hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma3Check {
    /// `Σ_j b_j − N(K − r)`.
    #[serde(with = "serde_q")]
    pub uncomputed_slack: Q,
    /// `(c − 1)NK − Σ_j (j − 1) b_j`.
    #[serde(with = "serde_q")]
    pub redundancy_slack: Q,
}

impl Lemma3Check {
    pub fn holds(&self) -> bool {
        self.uncomputed_slack >= qi(0) && self.redundancy_slack >= qi(0)
    }
}

/// Checks `Σ b_j ≥ N(K − r)` and `Σ (j−1) b_j ≤ (c − 1)NK` for budgets that the
/// placement and assignment respect.
pub fn lemma3_check(census: &AssignmentCensus, r_budget: Q, c_budget: Q) -> Lemma3Check {
    let (n, k) = (qi(census.files), qi(census.nodes));
    Lemma3Check {
        uncomputed_slack: Q::from_integer(census.sum_b() as i64) - n * (k - r_budget),
        redundancy_slack: (c_budget - qi(1)) * n * k - Q::from_integer(census.sum_excess() as i64),
    }
}

/// `Σ_j b_j / (N K j)`.
pub fn counting_bound(census: &AssignmentCensus) -> Q {
    let nk = (census.nodes * census.files) as i64;
    census
        .b
        .iter()
        .enumerate()
        .map(|(i, &b)| Q::new(b as i64, nk * (i as i64 + 1)))
        .sum()
}

/// The supporting line through the corners at `⌊g⌋` and `⌈g⌉`, where
/// `g = (c − r/K)/(1 − r/K)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundLine {
    #[serde(with = "serde_q")]
    pub g: Q,
    pub g1: i64,
    pub g2: i64,
    #[serde(with = "serde_q")]
    pub c1: Q,
    #[serde(with = "serde_q")]
    pub c2: Q,
    #[serde(with = "serde_q")]
    pub lambda: Q,
    #[serde(with = "serde_q")]
    pub mu: Q,
}

impl BoundLine {
    pub fn value(&self, c: Q) -> Q {
        self.lambda * c + self.mu
    }
}

/// Solves for `(λ, μ)`. When `g` is an integer the line through `g` and
/// `g + 1` is used; it still passes through the corner at `c`.
pub fn bound_line(r: Q, c: Q, nodes: usize) -> Result<BoundLine> {
    let cs = c_star(r, nodes)?;
    if c < qi(1) || c > cs {
        return Err(Error::Range(format!("c = {c} outside [1, c*(r) = {cs}]")));
    }
    let frac = r / qi(nodes);
    let g = (c - frac) / (qi(1) - frac);
    let g1 = floor(&g);
    let g2 = if ceil(&g) == g1 { g1 + 1 } else { ceil(&g) };
    let c1 = corner_c(r, nodes, Q::from_integer(g1));
    let c2 = corner_c(r, nodes, Q::from_integer(g2));
    let (l1, l2) = (corner_load(r, nodes, c1), corner_load(r, nodes, c2));
    let lambda = (l2 - l1) / (c2 - c1);
    let mu = l1 - lambda * c1;
    debug_assert!(lambda < qi(0) && lambda + mu > qi(0));
    Ok(BoundLine {
        g,
        g1,
        g2,
        c1,
        c2,
        lambda,
        mu,
    })
}

/// The successive lower bounds on `L` for a census within budgets `(r, c)`:
/// the counting bound, its rescaled form, the linearized form, its split into
/// the two counting sums, and `λc + μ`. The sequence is non-increasing.
pub fn bound_chain(census: &AssignmentCensus, r: Q, c: Q) -> Result<[Q; 5]> {
    let (n, k) = (qi(census.files), qi(census.nodes));
    let line = bound_line(r, c, census.nodes)?;
    let frac = r / k;
    let scale = qi(1) / (n * (k - r));
    let mut rescaled = qi(0);
    let mut linear = qi(0);
    for (i, &b) in census.b.iter().enumerate() {
        let j = qi(i + 1);
        let b = Q::from_integer(b as i64);
        let x = (qi(1) - frac) * j + frac;
        rescaled += scale * b / (x - frac) * (qi(1) - frac) * (qi(1) - frac);
        linear += scale * b * (line.lambda * x + line.mu);
    }
    let split = line.lambda / (n * k) * Q::from_integer(census.sum_excess() as i64)
        + (line.lambda + line.mu) * scale * Q::from_integer(census.sum_b() as i64);
    Ok([
        counting_bound(census),
        rescaled,
        linear,
        split,
        line.value(c),
    ])
}
