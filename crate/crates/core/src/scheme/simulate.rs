//! Bit-exact map, shuffle and reduce phases for a [`SchemeInstance`].
//!
//! Phases are bulk-synchronous: every node finishes its map phase before any
//! signal is encoded, and all signals are encoded before any node decodes.

use std::collections::HashMap;

use super::{SchemeInstance, ShuffleSignal};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{
    communication_load, generate_files, map_iva, oracle_ivas, reduce_output, storage_space, IvaId,
    JobSpec, LoadTriple,
};
use crate::rational::Q;

/// IVAs a node computed in the map phase.
pub type LocalStore = HashMap<IvaId, Bits>;

/// Flip one payload bit of one signal after encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tamper {
    pub signal: usize,
    pub bit: usize,
}

pub fn map_phase(
    scheme: &SchemeInstance,
    spec: &JobSpec,
    files: &[Bits],
    exec: Exec,
) -> Result<Vec<LocalStore>> {
    exec.map_range(scheme.nodes, |k| {
        let mut store = LocalStore::new();
        for (&n, targets) in scheme.assignment.per_file(k) {
            for &q in targets {
                store.insert(IvaId::new(q, n), map_iva(spec, q, n, &files[n])?);
            }
        }
        Ok(store)
    })
    .into_iter()
    .collect()
}

fn segment_of(
    store: &LocalStore,
    node: usize,
    target: usize,
    files: &[usize],
    segment: usize,
    seg_bits: usize,
) -> Result<Bits> {
    let parts = files
        .iter()
        .map(|&n| {
            let iva = IvaId::new(target, n);
            store
                .get(&iva)
                .ok_or(Error::MissingConstituent { node, iva })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Bits::concat(parts).slice(segment * seg_bits, seg_bits))
}

fn encode_one(sig: &ShuffleSignal, store: &LocalStore, iva_bits: usize) -> Result<Bits> {
    let seg_bits = sig.payload_bits(iva_bits);
    let mut payload = Bits::zeros(seg_bits);
    for c in &sig.constituents {
        let seg = segment_of(store, sig.sender, c.target, &c.files, c.segment, seg_bits)?;
        payload.xor_assign(&seg);
    }
    Ok(payload)
}

/// Each sender encodes its signals from its own map-phase store only.
pub fn encode_signals(
    scheme: &SchemeInstance,
    spec: &JobSpec,
    stores: &[LocalStore],
    exec: Exec,
) -> Result<Vec<Bits>> {
    exec.map(&scheme.signals, |sig| {
        encode_one(sig, &stores[sig.sender], spec.iva_bits)
    })
    .into_iter()
    .collect()
}

/// What one node recovered from the shuffle.
#[derive(Clone, Debug)]
pub struct NodeDecode {
    /// `v_{k,1} … v_{k,N}` in file order.
    pub ivas: Vec<Bits>,
    /// Signals sent by other nodes.
    pub received: usize,
    /// Received signals that carried a segment for this node.
    pub useful: usize,
    /// IVAs obtained from the shuffle rather than the local store.
    pub recovered: usize,
}

/// Restores `V_k` for `node` from the payloads and its local store.
///
/// A signal is solved when all of its constituents but one are known locally
/// and the unknown one is a segment of an IVA this node wants.
pub fn decode_shuffle(
    scheme: &SchemeInstance,
    spec: &JobSpec,
    node: usize,
    payloads: &[Bits],
    local: &LocalStore,
) -> Result<NodeDecode> {
    let t = spec.iva_bits;
    // (files of block) -> segments recovered so far
    let mut blocks: HashMap<Vec<usize>, Vec<Option<Bits>>> = HashMap::new();
    let (mut received, mut useful) = (0, 0);
    for (sig, payload) in scheme.signals.iter().zip(payloads) {
        if sig.sender == node {
            continue;
        }
        received += 1;
        let seg_bits = sig.payload_bits(t);
        let mut unknown = Vec::new();
        let mut acc = payload.clone();
        for c in &sig.constituents {
            if c.ivas().all(|iva| local.contains_key(&iva)) {
                acc.xor_assign(&segment_of(
                    local, node, c.target, &c.files, c.segment, seg_bits,
                )?);
            } else {
                unknown.push(c);
            }
        }
        match unknown.as_slice() {
            [c] if c.target == node => {
                useful += 1;
                let slots = blocks
                    .entry(c.files.clone())
                    .or_insert_with(|| vec![None; sig.segments]);
                slots[c.segment] = Some(acc);
            }
            _ => {}
        }
    }

    let mut decoded: HashMap<usize, Bits> = HashMap::new();
    for (files, slots) in blocks {
        if slots.iter().any(Option::is_none) {
            continue;
        }
        let block = Bits::concat(slots.iter().flatten());
        for (i, &n) in files.iter().enumerate() {
            decoded.insert(n, block.slice(i * t, t));
        }
    }

    let mut recovered = 0;
    let ivas = (0..scheme.files)
        .map(|n| {
            let iva = IvaId::new(node, n);
            if let Some(v) = local.get(&iva) {
                Ok(v.clone())
            } else if let Some(v) = decoded.remove(&n) {
                recovered += 1;
                Ok(v)
            } else {
                Err(Error::Undecodable { node, iva })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NodeDecode {
        ivas,
        received,
        useful,
        recovered,
    })
}

/// Everything produced by one execution of the three phases.
#[derive(Clone, Debug)]
pub struct PhaseRun {
    pub files: Vec<Bits>,
    pub stores: Vec<LocalStore>,
    pub payloads: Vec<Bits>,
    pub decoded: Vec<NodeDecode>,
    pub outputs: Vec<Bits>,
}

fn check_job(scheme: &SchemeInstance, spec: &JobSpec) -> Result<()> {
    spec.validate()?;
    if spec.nodes != scheme.nodes || spec.files != scheme.files {
        return Err(Error::InvalidJob(format!(
            "job has K={} N={} but scheme has K={} N={}",
            spec.nodes, spec.files, scheme.nodes, scheme.files
        )));
    }
    scheme.check_iva_bits(spec.iva_bits)
}

/// Runs map, shuffle and reduce. Outputs are not checked here.
pub fn run_phases(
    scheme: &SchemeInstance,
    spec: &JobSpec,
    exec: Exec,
    tamper: Option<Tamper>,
) -> Result<PhaseRun> {
    check_job(scheme, spec)?;
    let files = generate_files(spec);
    let stores = map_phase(scheme, spec, &files, exec)?;
    let mut payloads = encode_signals(scheme, spec, &stores, exec)?;
    if let Some(Tamper { signal, bit }) = tamper {
        payloads[signal].flip(bit);
    }
    let decoded = exec
        .map_range(scheme.nodes, |k| {
            decode_shuffle(scheme, spec, k, &payloads, &stores[k])
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let outputs = decoded
        .iter()
        .enumerate()
        .map(|(k, d)| reduce_output(spec, k, &d.ivas))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseRun {
        files,
        stores,
        payloads,
        decoded,
        outputs,
    })
}

/// Result of a checked simulation.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub measured: LoadTriple,
    pub expected: LoadTriple,
    pub shuffle_bits: u64,
    pub signals: usize,
    pub run: PhaseRun,
}

impl Simulation {
    pub fn exact(&self) -> bool {
        self.measured == self.expected
    }
}

/// Runs the scheme and checks every node's IVAs and output against the
/// centralized computation. Loads are measured from what actually happened:
/// stored files, IVAs in the map-phase stores, and payload bits sent.
pub fn simulate(scheme: &SchemeInstance, spec: &JobSpec, exec: Exec) -> Result<Simulation> {
    let run = run_phases(scheme, spec, exec, None)?;
    let oracle = oracle_ivas(spec, &run.files)?;
    for (k, d) in run.decoded.iter().enumerate() {
        if let Some(n) = (0..spec.files).find(|&n| d.ivas[n] != oracle[k][n]) {
            return Err(Error::DecodeMismatch {
                node: k,
                iva: IvaId::new(k, n),
            });
        }
        let want = reduce_output(spec, k, &oracle[k])?;
        if run.outputs[k] != want {
            return Err(Error::DecodeMismatch {
                node: k,
                iva: IvaId::new(k, 0),
            });
        }
    }
    let shuffle_bits: u64 = run.payloads.iter().map(|p| p.len() as u64).sum();
    let computed: usize = run.stores.iter().map(LocalStore::len).sum();
    let measured = LoadTriple::new(
        storage_space(&scheme.placement, scheme.files),
        Q::new(computed as i64, (spec.files * spec.nodes) as i64),
        communication_load(shuffle_bits, spec.files, spec.nodes, spec.iva_bits),
    );
    Ok(Simulation {
        measured,
        expected: scheme.expected_loads(),
        shuffle_bits,
        signals: scheme.signals.len(),
        run,
    })
}
