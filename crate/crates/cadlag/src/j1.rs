//! Skorokhod J1 distance with a witness time change.
//!
//! For pure step functions the distance
//! `inf over time changes of max(dist(lambda, identity), sup |x∘lambda - y|)`
//! is computed exactly: a feasibility check ("is cost d achievable?") runs a
//! dynamic program over order-preserving partial matchings of the two jump
//! sequences, and the distance is found by bisection. Matching jump `i` of
//! `x` to jump `j` of `y` co-locates them (cost `|a_i - b_j|` on the time
//! term); unmatched jumps contribute full level excursions to the value
//! term. Levels between events depend only on the processed prefix of each
//! sequence, which is what makes the lattice DP exact. The same machinery
//! aligns *pairs* of paths under one common time change, which is the
//! quantity joint-continuity probes need.
//!
//! Paths with nonconstant skeletons get a certified upper bound instead
//! (`exact = false`): candidate witnesses are evaluated exactly with the path
//! algebra and the cheapest is reported.
//!
//! [`brute_force`] re-solves the same cost functional by exhaustive
//! enumeration of lattice routes with greedy earliest-time placement; it
//! exists to validate the DP and refuses inputs with many jumps.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::path::{CadlagPath, TimeChange};

/// Distance report with the realizing (or bounding) time change.
///
/// `distance == max(time_term, value_term)` always holds: the reported
/// distance is the re-evaluated cost of the returned witness. `exact` marks
/// it as the true infimum (step-function inputs) rather than an upper bound.
#[derive(Debug, Clone)]
pub struct J1Result {
    pub distance: f64,
    pub witness: TimeChange,
    pub exact: bool,
    /// `sup |lambda - I|` of the witness.
    pub time_term: f64,
    /// `sup |x ∘ lambda - y|` of the witness (max over components for joint
    /// alignments).
    pub value_term: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum J1Error {
    /// Brute force refuses combinatorial blowup.
    TooManyJumps,
    /// Brute force handles pure step functions only.
    NotStepFunction,
}

impl core::fmt::Display for J1Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            J1Error::TooManyJumps => write!(f, "too many jumps for brute-force enumeration"),
            J1Error::NotStepFunction => write!(f, "brute force requires constant skeletons"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for J1Error {}

const BISECT_TOL: f64 = 1e-13;
const KNOT_GAP: f64 = 1e-13;

/// One side of an alignment: initial levels and jump events of up to two
/// component paths sharing the time axis.
struct AlignSeq {
    times: Vec<f64>,
    /// `prefix[k]` = initial levels plus the first `k` jump vectors.
    prefix: Vec<[f64; 2]>,
}

impl AlignSeq {
    fn single(x: &CadlagPath) -> Self {
        let times: Vec<f64> = x.jumps().iter().map(|j| j.time).collect();
        let mut prefix = Vec::with_capacity(times.len() + 1);
        let mut acc = [x.eval(0.0).unwrap(), 0.0];
        prefix.push(acc);
        for j in x.jumps() {
            acc[0] += j.size;
            prefix.push(acc);
        }
        AlignSeq { times, prefix }
    }

    fn pair(x: &CadlagPath, fx: &CadlagPath) -> Self {
        let (ja, jb) = (x.jumps(), fx.jumps());
        let mut times = Vec::with_capacity(ja.len() + jb.len());
        let mut sizes: Vec<[f64; 2]> = Vec::with_capacity(ja.len() + jb.len());
        let (mut i, mut j) = (0usize, 0usize);
        while i < ja.len() || j < jb.len() {
            let (t, s0, s1) = match (ja.get(i), jb.get(j)) {
                (Some(a), Some(b)) if a.time == b.time => {
                    i += 1;
                    j += 1;
                    (a.time, a.size, b.size)
                }
                (Some(a), Some(b)) if a.time < b.time => {
                    i += 1;
                    (a.time, a.size, 0.0)
                }
                (Some(_), Some(b)) => {
                    j += 1;
                    (b.time, 0.0, b.size)
                }
                (Some(a), None) => {
                    i += 1;
                    (a.time, a.size, 0.0)
                }
                (None, Some(b)) => {
                    j += 1;
                    (b.time, 0.0, b.size)
                }
                (None, None) => unreachable!(),
            };
            times.push(t);
            sizes.push([s0, s1]);
        }
        let mut prefix = Vec::with_capacity(times.len() + 1);
        let mut acc = [x.eval(0.0).unwrap(), fx.eval(0.0).unwrap()];
        prefix.push(acc);
        for s in &sizes {
            acc[0] += s[0];
            acc[1] += s[1];
            prefix.push(acc);
        }
        AlignSeq { times, prefix }
    }

    fn len(&self) -> usize {
        self.times.len()
    }
}

#[inline]
fn level(a: &AlignSeq, b: &AlignSeq, i: usize, j: usize) -> f64 {
    let pa = a.prefix[i];
    let pb = b.prefix[j];
    math::abs(pa[0] - pb[0]).max(math::abs(pa[1] - pb[1]))
}

/// Cost of the identity time change along the merged-in-time route; always a
/// feasible value, and equal to the sup-norm distance for step functions.
fn identity_route_cost(a: &AlignSeq, b: &AlignSeq) -> f64 {
    let (p, q) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut m = level(a, b, 0, 0);
    while i < p || j < q {
        if i < p && (j == q || a.times[i] < b.times[j]) {
            i += 1;
        } else if j < q && (i == p || b.times[j] < a.times[i]) {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
        m = m.max(level(a, b, i, j));
    }
    m
}

/// Lattice feasibility at cost `d`. `t[i][j]` is the smallest achievable
/// time of the latest placed event over all valid interleavings of the first
/// `i` x-events and `j` y-events (a smaller running time is always at least
/// as feasible for the remainder, so the greedy collapse is exact). Returns
/// the tables for route reconstruction, or `None` when infeasible.
fn feasible(a: &AlignSeq, b: &AlignSeq, d: f64) -> Option<(Vec<f64>, Vec<u8>)> {
    let (p, q) = (a.len(), b.len());
    let w = q + 1;
    let mut t = vec![f64::INFINITY; (p + 1) * w];
    let mut from = vec![0u8; (p + 1) * w];
    if level(a, b, 0, 0) > d {
        return None;
    }
    t[0] = 0.0;
    for i in 0..=p {
        for j in 0..=q {
            let cur = t[i * w + j];
            if !cur.is_finite() {
                continue;
            }
            // place x-event i unmatched; a jump at exactly 1 cannot move
            if i < p {
                let at = a.times[i];
                let v = if at == 1.0 {
                    Some(1.0)
                } else {
                    let v = cur.max(at - d);
                    (v <= at + d).then_some(v)
                };
                if let Some(v) = v {
                    let idx = (i + 1) * w + j;
                    if level(a, b, i + 1, j) <= d && v < t[idx] {
                        t[idx] = v;
                        from[idx] = 1;
                    }
                }
            }
            // place y-event j (its time is fixed)
            if j < q {
                let bt = b.times[j];
                if bt >= cur {
                    let idx = i * w + (j + 1);
                    if level(a, b, i, j + 1) <= d && bt < t[idx] {
                        t[idx] = bt;
                        from[idx] = 2;
                    }
                }
            }
            // match x-event i with y-event j (co-located at b's time)
            if i < p && j < q {
                let at = a.times[i];
                let bt = b.times[j];
                let pinned_ok = (at == 1.0) == (bt == 1.0);
                if pinned_ok && math::abs(at - bt) <= d && bt >= cur {
                    let idx = (i + 1) * w + (j + 1);
                    if level(a, b, i + 1, j + 1) <= d && bt < t[idx] {
                        t[idx] = bt;
                        from[idx] = 3;
                    }
                }
            }
        }
    }
    t[p * w + q].is_finite().then_some((t, from))
}

/// Backtrack the route and return `(placement, original_time)` per x-event.
fn placements(a: &AlignSeq, b: &AlignSeq, d: f64, t: &[f64], from: &[u8]) -> Vec<(f64, f64)> {
    let (p, q) = (a.len(), b.len());
    let w = q + 1;
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(p);
    let (mut i, mut j) = (p, q);
    while i > 0 || j > 0 {
        match from[i * w + j] {
            1 => {
                let at = a.times[i - 1];
                let v = if at == 1.0 { 1.0 } else { t[(i - 1) * w + j].max(at - d) };
                out.push((v, at));
                i -= 1;
            }
            2 => {
                j -= 1;
            }
            3 => {
                out.push((b.times[j - 1], a.times[i - 1]));
                i -= 1;
                j -= 1;
            }
            _ => unreachable!("broken backtrack chain"),
        }
    }
    out.reverse();
    out
}

/// Build a valid time change through `(placement, target)` pairs, nudging
/// placements apart where the route co-located them.
fn witness_from_placements(mut pl: Vec<(f64, f64)>) -> TimeChange {
    pl.retain(|&(_, a)| a < 1.0);
    let mut knots: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    let n = pl.len();
    for (k, &(v, a)) in pl.iter().enumerate() {
        let prev = knots.last().unwrap().0;
        // keep strictly inside (prev, 1), leaving room for later knots
        let room_hi = 1.0 - KNOT_GAP * (n - k) as f64;
        let mut u = v.max(prev + KNOT_GAP).min(room_hi);
        if u <= prev {
            u = prev + (1.0 - prev) * 0.5;
        }
        knots.push((u, a));
    }
    knots.push((1.0, 1.0));
    TimeChange::new(knots).unwrap_or_else(|_| TimeChange::identity())
}

/// Exact witness cost via the path algebra: time term and the worst composed
/// sup-norm gap over components.
fn witness_cost(lambda: &TimeChange, xs: &[&CadlagPath], ys: &[&CadlagPath]) -> (f64, f64) {
    let time_term = lambda.sup_dist_to_identity();
    let mut value_term = 0.0f64;
    for (x, y) in xs.iter().zip(ys) {
        value_term = value_term.max(x.compose(lambda).sup_norm_diff(y));
    }
    (time_term, value_term)
}

fn solve(a: &AlignSeq, b: &AlignSeq) -> Vec<(f64, f64)> {
    if let Some((t, from)) = feasible(a, b, 0.0) {
        return placements(a, b, 0.0, &t, &from);
    }
    let mut hi = identity_route_cost(a, b);
    let mut tables = feasible(a, b, hi);
    // The identity route certifies feasibility at the sup-norm bound; widen
    // defensively if floating point disagrees right at the boundary.
    let mut guard = 0;
    while tables.is_none() {
        hi = hi * 2.0 + 1e-9;
        tables = feasible(a, b, hi);
        guard += 1;
        assert!(guard < 64, "feasibility must hold at the sup-norm bound");
    }
    let mut lo = 0.0f64;
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        match feasible(a, b, mid) {
            Some(tb) => {
                hi = mid;
                tables = Some(tb);
            }
            None => lo = mid,
        }
    }
    let (t, from) = tables.expect("bisection keeps a feasible witness");
    placements(a, b, hi, &t, &from)
}

fn finish(xs: &[&CadlagPath], ys: &[&CadlagPath], pl: Vec<(f64, f64)>, exact: bool) -> J1Result {
    let dp_witness = witness_from_placements(pl);
    let (dp_time, dp_value) = witness_cost(&dp_witness, xs, ys);
    let dp_cost = dp_time.max(dp_value);
    // The identity is always admissible; keep whichever witness is cheaper
    // so `distance <= sup_norm_diff` holds unconditionally.
    let id = TimeChange::identity();
    let (id_time, id_value) = witness_cost(&id, xs, ys);
    let id_cost = id_time.max(id_value);
    if dp_cost <= id_cost {
        J1Result {
            distance: dp_cost,
            witness: dp_witness,
            exact,
            time_term: dp_time,
            value_term: dp_value,
        }
    } else {
        J1Result { distance: id_cost, witness: id, exact, time_term: id_time, value_term: id_value }
    }
}

/// J1 distance between two paths. Exact (with realizing witness) when both
/// are pure step functions; otherwise a certified upper bound.
pub fn j1_distance(x: &CadlagPath, y: &CadlagPath) -> J1Result {
    let a = AlignSeq::single(x);
    let b = AlignSeq::single(y);
    let exact = x.has_constant_skeleton() && y.has_constant_skeleton();
    let pl = solve(&a, &b);
    finish(&[x], &[y], pl, exact)
}

/// Joint alignment of the pair `(x, fx)` against `(y, fy)` under one common
/// time change: the cost is
/// `max(dist(lambda, I), sup |x∘lambda - y|, sup |fx∘lambda - fy|)`.
/// With `fx`, `fy` the operator images of `x`, `y`, this is the defect that
/// joint-continuity probes measure. Exact when all four paths are pure step
/// functions.
pub fn j1_joint_distance(
    x: &CadlagPath,
    fx: &CadlagPath,
    y: &CadlagPath,
    fy: &CadlagPath,
) -> J1Result {
    let a = AlignSeq::pair(x, fx);
    let b = AlignSeq::pair(y, fy);
    let exact = [x, fx, y, fy].iter().all(|p| p.has_constant_skeleton());
    let pl = solve(&a, &b);
    finish(&[x, fx], &[y, fy], pl, exact)
}

/// Exhaustive-enumeration oracle for the same cost functional: every lattice
/// route is tried with greedy earliest-time placement, and the optimum is
/// bisected to the same tolerance. Refuses more than `max_jumps` (capped at
/// 7) jumps per path and nonconstant skeletons.
pub fn brute_force(x: &CadlagPath, y: &CadlagPath, max_jumps: usize) -> Result<f64, J1Error> {
    if !x.has_constant_skeleton() || !y.has_constant_skeleton() {
        return Err(J1Error::NotStepFunction);
    }
    let cap = max_jumps.min(7);
    if x.jumps().len() > cap || y.jumps().len() > cap {
        return Err(J1Error::TooManyJumps);
    }
    let a = AlignSeq::single(x);
    let b = AlignSeq::single(y);
    if bf_feasible(&a, &b, 0.0) {
        return Ok(0.0);
    }
    let mut hi = identity_route_cost(&a, &b);
    let mut guard = 0;
    while !bf_feasible(&a, &b, hi) {
        hi = hi * 2.0 + 1e-9;
        guard += 1;
        if guard >= 64 {
            return Ok(hi);
        }
    }
    let mut lo = 0.0f64;
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if bf_feasible(&a, &b, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn bf_feasible(a: &AlignSeq, b: &AlignSeq, d: f64) -> bool {
    if level(a, b, 0, 0) > d {
        return false;
    }
    bf_rec(a, b, d, 0, 0, 0.0)
}

fn bf_rec(a: &AlignSeq, b: &AlignSeq, d: f64, i: usize, j: usize, t: f64) -> bool {
    let (p, q) = (a.len(), b.len());
    if i == p && j == q {
        return true;
    }
    if i < p {
        let at = a.times[i];
        let v = if at == 1.0 {
            Some(1.0)
        } else {
            let v = t.max(at - d);
            (v <= at + d).then_some(v)
        };
        if let Some(v) = v {
            if level(a, b, i + 1, j) <= d && bf_rec(a, b, d, i + 1, j, v) {
                return true;
            }
        }
    }
    if j < q {
        let bt = b.times[j];
        if bt >= t && level(a, b, i, j + 1) <= d && bf_rec(a, b, d, i, j + 1, bt) {
            return true;
        }
    }
    if i < p && j < q {
        let at = a.times[i];
        let bt = b.times[j];
        if (at == 1.0) == (bt == 1.0)
            && math::abs(at - bt) <= d
            && bt >= t
            && level(a, b, i + 1, j + 1) <= d
            && bf_rec(a, b, d, i + 1, j + 1, bt)
        {
            return true;
        }
    }
    false
}

/// One row of a convergence probe.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub index: usize,
    pub result: J1Result,
}

/// Diagnosis of whether a finite sequence behaves like a J1-convergent tail.
#[derive(Debug, Clone)]
pub struct Convergence {
    pub passed: bool,
    pub rows: Vec<ConvergenceRow>,
}

/// True when the distances to `x` end below `tol` and each step shrinks by
/// at least `factor` (use `factor = 1.0` for "nonincreasing").
pub fn converges_j1(xs: &[CadlagPath], x: &CadlagPath, tol: f64, factor: f64) -> Convergence {
    let rows: Vec<ConvergenceRow> = xs
        .iter()
        .enumerate()
        .map(|(index, xn)| ConvergenceRow { index, result: j1_distance(xn, x) })
        .collect();
    let passed = match rows.last() {
        None => false,
        Some(last) => {
            last.result.distance <= tol
                && rows
                    .windows(2)
                    .all(|w| w[1].result.distance <= factor * w[0].result.distance + 1e-15)
        }
    };
    Convergence { passed, rows }
}
