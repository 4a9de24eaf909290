//! Randomized property sweep for larger instances.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{bound_line, census, counting_bound, lemma3_check};
use crate::analytics::c_star;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{computation_load, storage_space, ComputationAssignment, Placement};
use crate::rational::{qi, serde_opt_q, Q};

const CHUNK: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomConfig {
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(rename = "N")]
    pub files: usize,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomReport {
    pub samples: u64,
    pub lemma3_violations: u64,
    pub partition_violations: u64,
    pub identity_violations: u64,
    pub chain_checked: u64,
    pub chain_violations: u64,
    /// Samples within the requested budgets, if any were given.
    pub within_budget: u64,
    #[serde(with = "serde_opt_q")]
    pub min_bound_within_budget: Option<Q>,
    #[serde(with = "serde_opt_q")]
    pub analytic_bound: Option<Q>,
}

impl RandomReport {
    pub fn clean(&self) -> bool {
        self.lemma3_violations == 0
            && self.partition_violations == 0
            && self.identity_violations == 0
            && self.chain_violations == 0
            && match (self.min_bound_within_budget, self.analytic_bound) {
                (Some(m), Some(a)) => m >= a,
                _ => true,
            }
    }

    fn merge(mut self, o: RandomReport) -> Self {
        self.samples += o.samples;
        self.lemma3_violations += o.lemma3_violations;
        self.partition_violations += o.partition_violations;
        self.identity_violations += o.identity_violations;
        self.chain_checked += o.chain_checked;
        self.chain_violations += o.chain_violations;
        self.within_budget += o.within_budget;
        self.min_bound_within_budget =
            match (self.min_bound_within_budget, o.min_bound_within_budget) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        self
    }
}

/// Draws a feasible placement/assignment: each node stores each file with
/// probability 1/2 and computes a uniform subset of its targets; IVAs left
/// uncovered are then given to a uniformly chosen node.
pub fn sample_assignment(
    nodes: usize,
    files: usize,
    rng: &mut impl Rng,
) -> (Placement, ComputationAssignment) {
    let mut stored = vec![BTreeSet::new(); nodes];
    let mut computed = vec![BTreeMap::<usize, BTreeSet<usize>>::new(); nodes];
    for k in 0..nodes {
        for n in 0..files {
            if rng.gen_bool(0.5) {
                stored[k].insert(n);
                let targets: BTreeSet<usize> = (0..nodes).filter(|_| rng.gen_bool(0.5)).collect();
                if !targets.is_empty() {
                    computed[k].insert(n, targets);
                }
            }
        }
    }
    for n in 0..files {
        for q in 0..nodes {
            if !computed
                .iter()
                .any(|c| c.get(&n).is_some_and(|t| t.contains(&q)))
            {
                let k = rng.gen_range(0..nodes);
                stored[k].insert(n);
                computed[k].entry(n).or_default().insert(q);
            }
        }
    }
    let p = Placement::new(files, stored).expect("indices in range");
    let a = ComputationAssignment::new(&p, computed).expect("repaired to feasibility");
    (p, a)
}

/// Runs `samples` random assignments, checking each against its own loads,
/// and tracks the minimum counting bound among samples within
/// `budgets = (r, c)`.
pub fn random_verify(
    cfg: RandomConfig,
    budgets: Option<(Q, Q)>,
    exec: Exec,
) -> Result<RandomReport> {
    let RandomConfig {
        nodes,
        files,
        samples,
        seed,
    } = cfg;
    if !(2..=16).contains(&nodes) || files == 0 {
        return Err(Error::Range(format!(
            "random sweep needs 2 <= K <= 16 and N >= 1, got K={nodes} N={files}"
        )));
    }
    let analytic = match budgets {
        Some((r, c)) if r >= qi(1) && r < qi(nodes) && c >= qi(1) && c <= c_star(r, nodes)? => {
            Some(bound_line(r, c, nodes)?.value(c))
        }
        _ => None,
    };
    let chunks = samples.div_ceil(CHUNK);
    let parts = exec.map_range(chunks, |chunk| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        let mut rep = RandomReport::default();
        let count = CHUNK.min(samples - chunk * CHUNK);
        for _ in 0..count {
            let (p, a) = sample_assignment(nodes, files, &mut rng);
            let cs = census(&p, &a).expect("sampled assignments are feasible");
            let r = storage_space(&p, files);
            let c = computation_load(&a, files, nodes);
            rep.samples += 1;
            if !cs.partition_holds() {
                rep.partition_violations += 1;
            }
            if cs.sum_a() > p.total_stored() as u64
                || cs.sum_a() + cs.sum_weighted() > a.total_computed() as u64
            {
                rep.identity_violations += 1;
            }
            if !lemma3_check(&cs, r, c).holds() {
                rep.lemma3_violations += 1;
            }
            let bound = counting_bound(&cs);
            if r < qi(nodes) && c <= c_star(r, nodes).expect("r in range") {
                rep.chain_checked += 1;
                if bound < bound_line(r, c, nodes).expect("c in range").value(c) {
                    rep.chain_violations += 1;
                }
            }
            if let Some((rb, cb)) = budgets {
                if r <= rb && c <= cb {
                    rep.within_budget += 1;
                    rep.min_bound_within_budget = Some(
                        rep.min_bound_within_budget
                            .map_or(bound, |m: Q| m.min(bound)),
                    );
                }
            }
        }
        rep
    });
    Ok(parts.into_iter().fold(
        RandomReport {
            analytic_bound: analytic,
            ..Default::default()
        },
        RandomReport::merge,
    ))
}
