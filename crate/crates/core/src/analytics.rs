//! Closed-form tradeoff surface: `g_r`, `c*(r)`, `L*(r)`, the corner points,
//! the lower convex envelope `L*(r, c)` with its flat region, and the OCP/OCM
//! curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{ceil, floor, qi, serde_q, Q};

fn check_r(r: Q, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Range(format!("K = {k} < 2")));
    }
    if r < qi(1) || r >= qi(k) {
        return Err(Error::Range(format!("r = {r} outside [1, {k})")));
    }
    Ok(())
}

fn check_rc(r: Q, c: Q, k: usize) -> Result<()> {
    check_r(r, k)?;
    if c < qi(1) || c > r {
        return Err(Error::Range(format!("c = {c} outside [1, r = {r}]")));
    }
    Ok(())
}

/// `⌊r⌋ + (r − ⌊r⌋)(K − ⌈r⌉)/(K − r)`.
pub fn g_r(r: Q, k: usize) -> Result<Q> {
    check_r(r, k)?;
    let lo = Q::from_integer(floor(&r));
    let hi = Q::from_integer(ceil(&r));
    let kq = qi(k);
    Ok(lo + (r - lo) * (kq - hi) / (kq - r))
}

/// Computation load at the start of the flat region.
pub fn c_star(r: Q, k: usize) -> Result<Q> {
    let g = g_r(r, k)?;
    Ok(corner_c(r, k, g))
}

/// Optimal storage-communication load (minimum over all `c`).
pub fn l_star_storage(r: Q, k: usize) -> Result<Q> {
    check_r(r, k)?;
    let lo = Q::from_integer(floor(&r));
    let hi = Q::from_integer(ceil(&r));
    Ok((lo + hi - r) / (lo * hi) - Q::new(1, k as i64))
}

/// `r/K + (1 − r/K)·g`.
pub fn corner_c(r: Q, k: usize, g: Q) -> Q {
    let frac = r / qi(k);
    frac + (qi(1) - frac) * g
}

/// `(1 − r/K)² / (c − r/K)`.
pub fn corner_load(r: Q, k: usize, c: Q) -> Q {
    let frac = r / qi(k);
    (qi(1) - frac) * (qi(1) - frac) / (c - frac)
}

/// A vertex of the envelope. `g` is an integer multiplicity for scheme
/// corners and `g_r` for a terminal vertex that is not a scheme corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerPoint {
    #[serde(with = "serde_q")]
    pub g: Q,
    #[serde(with = "serde_q")]
    pub c: Q,
    #[serde(rename = "L", with = "serde_q")]
    pub l: Q,
    pub terminal: bool,
}

/// Envelope vertices in increasing `c`: one per `g ∈ 1..=⌊r⌋`, then
/// `(c*(r), L*(r))`. For integer `r` the terminal point coincides with the
/// `g = r` corner and is not repeated; that corner carries the flag instead.
pub fn corner_points(r: Q, k: usize) -> Result<Vec<CornerPoint>> {
    check_r(r, k)?;
    let top = floor(&r);
    let mut out: Vec<CornerPoint> = (1..=top)
        .map(|g| {
            let g = Q::from_integer(g);
            let c = corner_c(r, k, g);
            CornerPoint {
                g,
                c,
                l: corner_load(r, k, c),
                terminal: false,
            }
        })
        .collect();
    let cs = c_star(r, k)?;
    let ls = l_star_storage(r, k)?;
    match out.last_mut() {
        Some(last) if last.c == cs => {
            debug_assert_eq!(last.l, ls);
            last.terminal = true;
        }
        _ => out.push(CornerPoint {
            g: g_r(r, k)?,
            c: cs,
            l: ls,
            terminal: true,
        }),
    }
    Ok(out)
}

/// `L*(r, c)`: the lower convex envelope of the corner points for
/// `c ≤ c*(r)`, and `L*(r)` on the flat region `c*(r) ≤ c ≤ r`.
pub fn optimal_load(r: Q, c: Q, k: usize) -> Result<Q> {
    check_rc(r, c, k)?;
    let vertices = corner_points(r, k)?;
    let last = vertices.last().expect("at least one vertex");
    if c >= last.c {
        return Ok(last.l);
    }
    // Corner loads are convex and decreasing in c, so the envelope is the
    // piecewise-linear interpolation through consecutive vertices.
    let seg = vertices
        .windows(2)
        .find(|w| w[0].c <= c && c <= w[1].c)
        .expect("c lies within the vertex range");
    let (a, b) = (&seg[0], &seg[1]);
    Ok(a.l + (b.l - a.l) * (c - a.c) / (b.c - a.c))
}

pub fn is_flat(r: Q, c: Q, k: usize) -> Result<bool> {
    check_rc(r, c, k)?;
    Ok(c >= c_star(r, k)?)
}

/// An analytic point `(r, c, L*(r, c))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfacePoint {
    #[serde(with = "serde_q")]
    pub r: Q,
    #[serde(with = "serde_q")]
    pub c: Q,
    #[serde(rename = "L", with = "serde_q")]
    pub l: Q,
    pub flat: bool,
}

impl SurfacePoint {
    pub fn at(r: Q, c: Q, k: usize) -> Result<Self> {
        Ok(SurfacePoint {
            r,
            c,
            l: optimal_load(r, c, k)?,
            flat: is_flat(r, c, k)?,
        })
    }
}

/// `1, 1 + step, …` strictly below `end`.
pub fn grid(start: Q, end: Q, step: Q, inclusive: bool) -> Result<Vec<Q>> {
    if step <= qi(0) {
        return Err(Error::Range(format!("grid step {step} must be positive")));
    }
    let mut out = Vec::new();
    let mut x = start;
    while x < end || (inclusive && x == end) {
        out.push(x);
        x += step;
    }
    Ok(out)
}

/// Optimal computation curve `(r, 1, 1 − r/K)`.
pub fn ocp_curve(k: usize, step: Q) -> Result<Vec<SurfacePoint>> {
    grid(qi(1), qi(k), step, false)?
        .into_iter()
        .map(|r| {
            let l = qi(1) - r / qi(k);
            debug_assert_eq!(optimal_load(r, qi(1), k).ok(), Some(l));
            Ok(SurfacePoint {
                r,
                c: qi(1),
                l,
                flat: is_flat(r, qi(1), k)?,
            })
        })
        .collect()
}

/// Optimal communication curve `(r, c*(r), L*(r))`.
pub fn ocm_curve(k: usize, step: Q) -> Result<Vec<SurfacePoint>> {
    grid(qi(1), qi(k), step, false)?
        .into_iter()
        .map(|r| {
            Ok(SurfacePoint {
                r,
                c: c_star(r, k)?,
                l: l_star_storage(r, k)?,
                flat: true,
            })
        })
        .collect()
}
