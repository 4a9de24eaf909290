//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.
//! Expected values come from small oracles written here, not from the library.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scc_core::analytics::optimal_load;
use scc_core::converse::{
    bound_line, census, counting_bound, exhaustive_lemma3, exhaustive_verify, random_verify,
    sample_assignment, RandomConfig,
};
use scc_core::model::{oracle_outputs, ComputationAssignment, IvaId, JobSpec, Placement};
use scc_core::scheme::{build_scheme, run_phases, share_schemes, simulate, SharePart, Tamper};
use scc_core::Exec;

type Q = Ratio<i64>;
type Mix = (usize, (usize, usize), (usize, usize), Q);
type Criterion = (&'static str, fn() -> Result<String, String>);

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn qi(n: usize) -> Q {
    Q::from_integer(n as i64)
}

fn lcm_to(n: usize) -> usize {
    (1..=n).fold(1, |acc, x| acc / gcd(acc, x) * x)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// ---- oracles ----

fn corner_loads(k: usize, r: usize, g: usize) -> (Q, Q, Q) {
    let (k, r, g) = (qi(k), qi(r), qi(g));
    (r, r / k + (qi(1) - r / k) * g, (k - r) / (g * k))
}

/// Corner points of storage `r` plus the terminal, as `(c, L)`.
fn corner_set(r: Q, k: usize) -> Vec<(Q, Q)> {
    let kq = qi(k);
    let fl = r.floor().to_integer() as usize;
    let mut pts: Vec<(Q, Q)> = (1..=fl)
        .map(|g| {
            let g = qi(g);
            (r / kq + (qi(1) - r / kq) * g, (kq - r) / (g * kq))
        })
        .collect();
    let (f, c) = (r.floor(), r.ceil());
    let gr = if r.is_integer() {
        r
    } else {
        f + (r - f) * (kq - c) / (kq - r)
    };
    let ls = (f + c - r) / (f * c) - qi(1) / kq;
    pts.push((r / kq + (qi(1) - r / kq) * gr, ls));
    pts
}

/// Lower convex envelope by brute force over all chords; flat past the
/// largest abscissa.
fn envelope(r: Q, c: Q, k: usize) -> Q {
    let pts = corner_set(r, k);
    let cmax = pts.iter().map(|p| p.0).max().unwrap();
    let lmin = pts.iter().map(|p| p.1).min().unwrap();
    if c >= cmax {
        return lmin;
    }
    let mut best: Option<Q> = None;
    for a in &pts {
        for b in &pts {
            if a.0 <= c && c <= b.0 {
                let v = if a.0 == b.0 {
                    a.1.min(b.1)
                } else {
                    a.1 + (b.1 - a.1) * (c - a.0) / (b.0 - a.0)
                };
                best = Some(best.map_or(v, |x: Q| x.min(v)));
            }
        }
    }
    best.expect("c inside the corner range")
}

#[derive(Debug, PartialEq, Eq)]
struct Census {
    a: Vec<u64>,
    b: Vec<u64>,
}

fn census_oracle(p: &Placement, a: &ComputationAssignment) -> Census {
    let (k, n) = (p.nodes(), p.files());
    let mut cs = Census {
        a: vec![0; k],
        b: vec![0; k - 1],
    };
    for file in 0..n {
        for target in 0..k {
            let iva = IvaId::new(target, file);
            if a.computes(target, iva) {
                cs.a[target] += 1;
            } else {
                let j = (0..k).filter(|&x| a.computes(x, iva)).count();
                assert!(j >= 1, "uncovered {iva}");
                cs.b[j - 1] += 1;
            }
        }
    }
    cs
}

fn loads_of(p: &Placement, a: &ComputationAssignment) -> (Q, Q) {
    let (k, n) = (p.nodes(), p.files());
    let stored: usize = (0..k).map(|x| p.stored(x).len()).sum();
    let computed: usize = (0..k).map(|x| a.computed_ivas(x).len()).sum();
    (
        q(stored as i64, n as i64),
        q(computed as i64, (n * k) as i64),
    )
}

fn lemma3_holds(cs: &Census, n: usize, k: usize, r: Q, c: Q) -> bool {
    let sum_b: u64 = cs.b.iter().sum();
    let excess: u64 = cs.b.iter().enumerate().map(|(i, &b)| i as u64 * b).sum();
    let nk = qi(n * k);
    Q::from_integer(sum_b as i64) >= qi(n) * (qi(k) - r)
        && Q::from_integer(excess as i64) <= (c - qi(1)) * nk
}

fn partition_holds(cs: &Census, n: usize, k: usize) -> bool {
    cs.a.iter().sum::<u64>() + cs.b.iter().sum::<u64>() == (n * k) as u64
}

fn bound_oracle(cs: &Census, n: usize, k: usize) -> Q {
    cs.b.iter()
        .enumerate()
        .map(|(i, &b)| q(b as i64, (n * k * (i + 1)) as i64))
        .sum()
}

fn job(k: usize, n: usize, t: usize, seed: u64) -> JobSpec {
    JobSpec::new(k, n, 64, t, 64, seed).unwrap()
}

// ---- criteria ----

fn corner_cases() -> Vec<(usize, usize, usize)> {
    let mut v = Vec::new();
    for k in 3..=6 {
        for r in 1..k {
            for g in 1..=r {
                v.push((k, r, g));
            }
        }
    }
    v
}

fn c1_corners() -> Result<String, String> {
    let cases = corner_cases();
    for (i, &(k, r, g)) in cases.iter().enumerate() {
        let scheme = build_scheme(k, r, g, 1).map_err(|e| e.to_string())?;
        let spec = job(k, scheme.files, 8 * lcm_to(r), 1000 + i as u64);
        let sim = simulate(&scheme, &spec, Exec::Parallel)
            .map_err(|e| format!("K={k} r={r} g={g}: {e}"))?;
        let (er, ec, el) = corner_loads(k, r, g);
        let m = &sim.measured;
        if (m.r, m.c, m.l) != (er, ec, el) {
            return Err(format!(
                "K={k} r={r} g={g}: measured {m:?}, want ({er}, {ec}, {el})"
            ));
        }
        let want = oracle_outputs(&spec, &sim.run.files).map_err(|e| e.to_string())?;
        if sim.run.outputs != want {
            return Err(format!(
                "K={k} r={r} g={g}: outputs differ from the centralized run"
            ));
        }
    }
    Ok(format!("{} instances exact", cases.len()))
}

fn c2_surface() -> Result<String, String> {
    let k = 10;
    let ol = |r: Q, c: Q| optimal_load(r, c, k).map_err(|e| e.to_string());
    for (r, c, l) in [(qi(2), qi(1), q(4, 5)), (qi(2), q(9, 5), q(2, 5))] {
        if ol(r, c)? != l {
            return Err(format!("L({r},{c}) != {l}"));
        }
    }
    for c in [qi(3), q(7, 2), qi(4), q(9, 2), qi(5)] {
        if ol(qi(5), c)? != q(1, 10) {
            return Err(format!("L(5,{c}) not flat at 1/10"));
        }
    }
    let step = q(1, 10);
    let rs: Vec<Q> = (10..100).map(|i| q(i, 10)).collect();
    let mut points = 0;
    for &r in &rs {
        let cs: Vec<Q> = (0..)
            .map(|i| qi(1) + step * qi(i))
            .take_while(|&c| c <= r)
            .collect();
        let ls = cs
            .iter()
            .map(|&c| ol(r, c))
            .collect::<Result<Vec<_>, _>>()?;
        for (&c, &l) in cs.iter().zip(&ls) {
            if l != envelope(r, c, k) {
                return Err(format!("L({r},{c}) = {l}, envelope {}", envelope(r, c, k)));
            }
            // More storage never hurts.
            if r + step < qi(k) && ol(r + step, c)? > l {
                return Err(format!("not monotone in r at ({r},{c})"));
            }
        }
        for w in ls.windows(2) {
            if w[1] > w[0] {
                return Err(format!("not monotone in c at r={r}"));
            }
        }
        for w in ls.windows(3) {
            if w[0] + w[2] < w[1] + w[1] {
                return Err(format!("not convex in c at r={r}"));
            }
        }
        points += ls.len();
    }
    Ok(format!("{points} grid points match the chord envelope"))
}

fn c3_sharing() -> Result<String, String> {
    let mut mixes: Vec<Mix> = Vec::new();
    for r in 1..4 {
        for g in 1..r {
            for alpha in [q(1, 4), q(1, 2), q(2, 3)] {
                mixes.push((4, (r, g), (r, g + 1), alpha));
            }
        }
        if r < 3 {
            for g in 1..=r {
                mixes.push((4, (r, g), (r + 1, g), q(1, 2)));
            }
            mixes.push((4, (r, r), (r + 1, r + 1), q(1, 3)));
        }
    }
    mixes.push((10, (2, 1), (2, 2), q(1, 2)));
    mixes.push((10, (2, 1), (2, 2), q(1, 5)));
    mixes.push((10, (2, 2), (3, 3), q(1, 2)));
    mixes.push((10, (2, 1), (3, 1), q(1, 2)));
    let mut hit_example = false;
    for (i, &(k, a, b, alpha)) in mixes.iter().enumerate() {
        let parts = [
            SharePart::new(a.0, a.1, alpha),
            SharePart::new(b.0, b.1, qi(1) - alpha),
        ];
        let scheme = share_schemes(k, &parts).map_err(|e| e.to_string())?;
        let t = 8 * lcm_to(a.0.max(b.0));
        let sim = simulate(
            &scheme,
            &job(k, scheme.files, t, 7 + i as u64),
            Exec::Parallel,
        )
        .map_err(|e| format!("K={k} {a:?}/{b:?}: {e}"))?;
        let m = &sim.measured;
        let (ra, ca, la) = corner_loads(k, a.0, a.1);
        let (rb, cb, lb) = corner_loads(k, b.0, b.1);
        let mix = |x: Q, y: Q| alpha * x + (qi(1) - alpha) * y;
        if (m.r, m.c, m.l) != (mix(ra, rb), mix(ca, cb), mix(la, lb)) {
            return Err(format!(
                "K={k} {a:?}/{b:?} α={alpha}: measured {m:?} is not the mix"
            ));
        }
        if m.l != envelope(m.r, m.c, k) {
            return Err(format!(
                "K={k} {a:?}/{b:?} α={alpha}: ({}, {}, {}) off the envelope",
                m.r, m.c, m.l
            ));
        }
        hit_example |= k == 10 && (m.r, m.c, m.l) == (qi(2), q(7, 5), q(3, 5));
    }
    if !hit_example {
        return Err("K=10 half mix did not give (2, 7/5, 3/5)".into());
    }
    Ok(format!("{} mixes on the envelope", mixes.len()))
}

/// Every assignment for K=3 without any symmetry reduction: per file and node,
/// either not stored or stored with one of the 8 computed-target subsets.
fn raw_k3(files: usize, mut f: impl FnMut(&Placement, &ComputationAssignment)) {
    let k = 3;
    let per_file = 9usize.pow(k as u32);
    for code in 0..per_file.pow(files as u32) {
        let mut stored = vec![BTreeSet::new(); k];
        let mut computed = vec![BTreeMap::new(); k];
        let mut x = code;
        for file in 0..files {
            let mut y = x % per_file;
            x /= per_file;
            for node in 0..k {
                let s = y % 9;
                y /= 9;
                if s > 0 {
                    stored[node].insert(file);
                    let targets: BTreeSet<usize> =
                        (0..k).filter(|t| (s - 1) >> t & 1 == 1).collect();
                    if !targets.is_empty() {
                        computed[node].insert(file, targets);
                    }
                }
            }
        }
        let p = Placement::new(files, stored).unwrap();
        if let Ok(a) = ComputationAssignment::new(&p, computed) {
            f(&p, &a);
        }
    }
}

fn c4_lemma3() -> Result<String, String> {
    let mut raw = 0u64;
    for files in 1..=2 {
        let mut bad = None;
        raw_k3(files, |p, a| {
            raw += 1;
            let cs = census_oracle(p, a);
            let (r, c) = loads_of(p, a);
            let lib = census(p, a).unwrap();
            if !lemma3_holds(&cs, files, 3, r, c)
                || !partition_holds(&cs, files, 3)
                || lib.a != cs.a
                || lib.b != cs.b
            {
                bad.get_or_insert_with(|| format!("N={files}: {cs:?}"));
            }
        });
        if let Some(b) = bad {
            return Err(b);
        }
    }
    let mut reduced = 0;
    for files in 1..=3 {
        let sweep = exhaustive_lemma3(3, files, Exec::Parallel).map_err(|e| e.to_string())?;
        if !sweep.clean() || sweep.assignments == 0 {
            return Err(format!("K=3 N={files}: {sweep:?}"));
        }
        reduced += sweep.assignments;
    }
    let samples = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    for _ in 0..samples {
        let (p, a) = sample_assignment(4, 2, &mut rng);
        let cs = census_oracle(&p, &a);
        let (r, c) = loads_of(&p, &a);
        if !lemma3_holds(&cs, 2, 4, r, c) || !partition_holds(&cs, 2, 4) {
            return Err(format!("K=4 N=2 sample violates: {cs:?}"));
        }
    }
    let rep = random_verify(
        RandomConfig {
            nodes: 4,
            files: 2,
            samples,
            seed: 11,
        },
        None,
        Exec::Parallel,
    )
    .map_err(|e| e.to_string())?;
    if !rep.clean() || rep.samples < samples as u64 {
        return Err(format!("random sweep: {rep:?}"));
    }
    Ok(format!(
        "{raw} raw K=3 assignments (N<=2), {reduced} reduced classes (N<=3), 2x{samples} K=4 samples; 0 violations"
    ))
}

fn c5_converse() -> Result<String, String> {
    let mut out = Vec::new();
    for (r, g, c) in [(1usize, 1usize, qi(1)), (2, 2, q(4, 3))] {
        let (_, ec, want) = corner_loads(3, r, g);
        assert_eq!(ec, c);
        let rq = qi(r);
        let line = bound_line(rq, c, 3).map_err(|e| e.to_string())?;
        let analytic = line.value(c);
        if analytic != want || analytic != envelope(rq, c, 3) {
            return Err(format!("λc+μ = {analytic} at ({r},{c}), want {want}"));
        }
        let rep = exhaustive_verify(3, 3, rq, c, Exec::Parallel).map_err(|e| e.to_string())?;
        let min = rep.min_bound.ok_or("no assignment within budget")?;
        if min < analytic {
            return Err(format!("({r},{c}): min bound {min} < {analytic}"));
        }
        let scheme = build_scheme(3, r, g, 1).map_err(|e| e.to_string())?;
        let cs = census_oracle(&scheme.placement, &scheme.assignment);
        let (sr, sc) = loads_of(&scheme.placement, &scheme.assignment);
        if scheme.files != 3
            || sr > rq
            || sc > c
            || bound_oracle(&cs, 3, 3) != analytic
            || min != analytic
        {
            return Err(format!(
                "({r},{c}): D3C census does not meet the bound {analytic} (min {min})"
            ));
        }
        out.push(format!(
            "({r},{c}): min {min} = λc+μ over {} candidates",
            rep.within_budget
        ));
    }
    Ok(out.join("; "))
}

fn c6_meet() -> Result<String, String> {
    let cases = corner_cases();
    for &(k, r, g) in &cases {
        let scheme = build_scheme(k, r, g, 1).map_err(|e| e.to_string())?;
        let spec = job(k, scheme.files, 8 * lcm_to(r), 99);
        let sim = simulate(&scheme, &spec, Exec::Parallel).map_err(|e| e.to_string())?;
        let cs = census_oracle(&scheme.placement, &scheme.assignment);
        let b = bound_oracle(&cs, scheme.files, k);
        let lib = counting_bound(
            &census(&scheme.placement, &scheme.assignment).map_err(|e| e.to_string())?,
        );
        if b != sim.measured.l || lib != b {
            return Err(format!(
                "K={k} r={r} g={g}: bound {b} (lib {lib}) vs measured {}",
                sim.measured.l
            ));
        }
    }
    Ok(format!("{} instances on the bound", cases.len()))
}

fn c7_tamper() -> Result<String, String> {
    let mut flips = 0;
    for (r, g) in [(2, 1), (3, 2)] {
        let scheme = build_scheme(4, r, g, 1).map_err(|e| e.to_string())?;
        let spec = job(4, scheme.files, 8 * lcm_to(r), 5);
        let clean =
            run_phases(&scheme, &spec, Exec::Sequential, None).map_err(|e| e.to_string())?;
        for (s, payload) in clean.payloads.iter().enumerate() {
            for bit in 0..payload.len() {
                let run = run_phases(
                    &scheme,
                    &spec,
                    Exec::Sequential,
                    Some(Tamper { signal: s, bit }),
                )
                .map_err(|e| e.to_string())?;
                if run.outputs == clean.outputs {
                    return Err(format!(
                        "K=4 r={r} g={g}: flipping signal {s} bit {bit} went unnoticed"
                    ));
                }
                flips += 1;
            }
        }
    }
    Ok(format!("{flips} single-bit flips all detected"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("corner achievability, exact loads and outputs", c1_corners),
        ("K=10 surface values, convexity, monotonicity", c2_surface),
        ("sharing lands on the envelope", c3_sharing),
        ("census inequalities and partition identity", c4_lemma3),
        ("exhaustive converse at K=3, N=3", c5_converse),
        ("counting bound meets measured load", c6_meet),
        ("single-bit payload faults change outputs", c7_tamper),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
