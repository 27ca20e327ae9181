//! Càdlàg paths on `[0,1]` as a continuous piecewise-linear skeleton plus a
//! finite, strictly time-ordered set of jumps, together with the pointwise
//! algebra (sum, affine image, time change) and the running extremal
//! operators. Everything here is a pure function of immutable inputs.
//!
//! The value of a path is `x(t) = k(t) + sum of jump sizes with time <= t`,
//! where `k` is the skeleton. Right continuity and left limits hold by
//! construction, and `x(0) = k(0)` since jump times live in `(0,1]`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// A single jump: `time` in `(0,1]`, `size` nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpPoint {
    pub time: f64,
    pub size: f64,
}

/// Which extremal jump process to track.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpSign {
    /// Largest positive jump so far (0 if none).
    Positive,
    /// Largest magnitude among negative jumps so far (0 if none).
    Negative,
    /// Largest jump modulus so far (0 if none).
    Modulus,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathError {
    /// Evaluation point outside `[0,1]`.
    OutOfDomain(f64),
    /// Left limit requested at 0.
    LeftLimitAtZero,
    BadSkeleton(&'static str),
    BadJumps(&'static str),
    BadTimeChange(&'static str),
}

impl core::fmt::Display for PathError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PathError::OutOfDomain(t) => write!(f, "evaluation point {t} outside [0,1]"),
            PathError::LeftLimitAtZero => write!(f, "left limit undefined at 0"),
            PathError::BadSkeleton(m) => write!(f, "invalid skeleton: {m}"),
            PathError::BadJumps(m) => write!(f, "invalid jumps: {m}"),
            PathError::BadTimeChange(m) => write!(f, "invalid time change: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PathError {}

/// Càdlàg path on `[0,1]`: piecewise-linear continuous skeleton plus jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct CadlagPath {
    /// Knots `(time, value)` of the continuous part; first at 0, last at 1,
    /// times strictly increasing.
    skeleton: Vec<(f64, f64)>,
    /// Jumps with strictly increasing times in `(0,1]`.
    jumps: Vec<JumpPoint>,
    /// `cum[i]` = sum of `jumps[0..=i].size`, fixed summation order.
    cum: Vec<f64>,
}

/// Strictly increasing continuous piecewise-linear bijection of `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChange {
    /// Knots `(u, lambda(u))`, both coordinates strictly increasing, with
    /// `(0,0)` first and `(1,1)` last.
    knots: Vec<(f64, f64)>,
}

fn strictly_increasing(times: impl Iterator<Item = f64>) -> bool {
    let mut prev = f64::NEG_INFINITY;
    for t in times {
        if !(t > prev) || !t.is_finite() {
            return false;
        }
        prev = t;
    }
    true
}

impl CadlagPath {
    pub fn new(skeleton: Vec<(f64, f64)>, jumps: Vec<(f64, f64)>) -> Result<Self, PathError> {
        if skeleton.len() < 2 {
            return Err(PathError::BadSkeleton("needs at least two knots"));
        }
        if skeleton[0].0 != 0.0 {
            return Err(PathError::BadSkeleton("first knot must be at time 0"));
        }
        if skeleton[skeleton.len() - 1].0 != 1.0 {
            return Err(PathError::BadSkeleton("last knot must be at time 1"));
        }
        if !strictly_increasing(skeleton.iter().map(|k| k.0)) {
            return Err(PathError::BadSkeleton("knot times must strictly increase"));
        }
        if skeleton.iter().any(|k| !k.1.is_finite()) {
            return Err(PathError::BadSkeleton("knot values must be finite"));
        }
        if !strictly_increasing(jumps.iter().map(|j| j.0)) {
            return Err(PathError::BadJumps("jump times must strictly increase"));
        }
        if let Some(j) = jumps.first() {
            if j.0 <= 0.0 {
                return Err(PathError::BadJumps("jump times must be positive"));
            }
        }
        if let Some(j) = jumps.last() {
            if j.0 > 1.0 {
                return Err(PathError::BadJumps("jump times must be at most 1"));
            }
        }
        if jumps.iter().any(|j| j.1 == 0.0 || !j.1.is_finite()) {
            return Err(PathError::BadJumps("jump sizes must be finite and nonzero"));
        }
        let jumps: Vec<JumpPoint> = jumps
            .into_iter()
            .map(|(time, size)| JumpPoint { time, size })
            .collect();
        Ok(Self::from_parts(skeleton, jumps))
    }

    /// Internal constructor for outputs that already satisfy the invariants.
    fn from_parts(skeleton: Vec<(f64, f64)>, jumps: Vec<JumpPoint>) -> Self {
        debug_assert!(strictly_increasing(skeleton.iter().map(|k| k.0)));
        debug_assert!(strictly_increasing(jumps.iter().map(|j| j.time)));
        debug_assert!(jumps.iter().all(|j| j.size != 0.0 && j.time > 0.0 && j.time <= 1.0));
        let mut cum = Vec::with_capacity(jumps.len());
        let mut acc = 0.0;
        for j in &jumps {
            acc += j.size;
            cum.push(acc);
        }
        CadlagPath { skeleton, jumps, cum }
    }

    pub fn constant(v: f64) -> Self {
        Self::from_parts(vec![(0.0, v), (1.0, v)], Vec::new())
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Continuous path running linearly from `v0` at 0 to `v1` at 1.
    pub fn linear(v0: f64, v1: f64) -> Self {
        Self::from_parts(vec![(0.0, v0), (1.0, v1)], Vec::new())
    }

    /// Step path: constant skeleton at `initial` plus the given jumps.
    pub fn step(initial: f64, jumps: &[(f64, f64)]) -> Result<Self, PathError> {
        Self::new(vec![(0.0, initial), (1.0, initial)], jumps.to_vec())
    }

    /// The indicator path `1_[a,1]`: a unit jump at `a`.
    pub fn indicator(a: f64) -> Self {
        Self::step(0.0, &[(a, 1.0)]).expect("indicator time must be in (0,1]")
    }

    pub fn skeleton(&self) -> &[(f64, f64)] {
        &self.skeleton
    }

    pub fn jumps(&self) -> &[JumpPoint] {
        &self.jumps
    }

    /// True when the continuous part is constant (pure step function).
    pub fn has_constant_skeleton(&self) -> bool {
        let v0 = self.skeleton[0].1;
        self.skeleton.iter().all(|k| k.1 == v0)
    }

    /// Jump size at exactly `tau`, 0 if none.
    pub fn jump_at(&self, tau: f64) -> f64 {
        match self.jumps.binary_search_by(|j| j.time.partial_cmp(&tau).unwrap()) {
            Ok(i) => self.jumps[i].size,
            Err(_) => 0.0,
        }
    }

    /// Continuous part `k(tau)`; exact at knots.
    fn skeleton_at(&self, tau: f64) -> f64 {
        let n = self.skeleton.len();
        let idx = self.skeleton.partition_point(|k| k.0 <= tau);
        if idx == 0 {
            return self.skeleton[0].1;
        }
        let (t0, v0) = self.skeleton[idx - 1];
        if t0 == tau || idx == n {
            return v0;
        }
        let (t1, v1) = self.skeleton[idx];
        v0 + (v1 - v0) * ((tau - t0) / (t1 - t0))
    }

    /// Sum of jump sizes with time `<= tau` (fixed summation order).
    fn jump_sum_upto(&self, tau: f64) -> f64 {
        let idx = self.jumps.partition_point(|j| j.time <= tau);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }

    /// Sum of jump sizes with time `< tau`.
    fn jump_sum_before(&self, tau: f64) -> f64 {
        let idx = self.jumps.partition_point(|j| j.time < tau);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }

    /// `x(tau)` for `tau` in `[0,1]`.
    pub fn eval(&self, tau: f64) -> Result<f64, PathError> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(PathError::OutOfDomain(tau));
        }
        Ok(self.value(tau))
    }

    /// Left limit `x(tau-)` for `tau` in `(0,1]`.
    pub fn eval_left(&self, tau: f64) -> Result<f64, PathError> {
        if tau == 0.0 {
            return Err(PathError::LeftLimitAtZero);
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(PathError::OutOfDomain(tau));
        }
        Ok(self.value_left(tau))
    }

    pub(crate) fn value(&self, tau: f64) -> f64 {
        self.skeleton_at(tau) + self.jump_sum_upto(tau)
    }

    pub(crate) fn value_left(&self, tau: f64) -> f64 {
        self.skeleton_at(tau) + self.jump_sum_before(tau)
    }

    /// Pointwise sum; coincident jumps are merged and zero-sum jumps dropped.
    pub fn add(&self, other: &CadlagPath) -> CadlagPath {
        self.combine(other, 1.0)
    }

    /// Pointwise difference `self - other`.
    pub fn sub(&self, other: &CadlagPath) -> CadlagPath {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &CadlagPath, sign: f64) -> CadlagPath {
        // Skeleton: union of knot times, values summed.
        let mut skel = Vec::with_capacity(self.skeleton.len() + other.skeleton.len());
        let (sa, sb) = (&self.skeleton, &other.skeleton);
        let (mut i, mut j) = (0usize, 0usize);
        while i < sa.len() || j < sb.len() {
            let t = match (sa.get(i), sb.get(j)) {
                (Some(a), Some(b)) => a.0.min(b.0),
                (Some(a), None) => a.0,
                (None, Some(b)) => b.0,
                (None, None) => unreachable!(),
            };
            let va = if i < sa.len() && sa[i].0 == t {
                i += 1;
                sa[i - 1].1
            } else {
                self.skeleton_at(t)
            };
            let vb = if j < sb.len() && sb[j].0 == t {
                j += 1;
                sb[j - 1].1
            } else {
                other.skeleton_at(t)
            };
            skel.push((t, va + sign * vb));
        }
        // Jumps: merge by time, coincident jumps summed, zeros dropped.
        let mut jumps = Vec::with_capacity(self.jumps.len() + other.jumps.len());
        let (ja, jb) = (&self.jumps, &other.jumps);
        let (mut i, mut j) = (0usize, 0usize);
        while i < ja.len() || j < jb.len() {
            let next = match (ja.get(i), jb.get(j)) {
                (Some(a), Some(b)) => {
                    if a.time < b.time {
                        i += 1;
                        *a
                    } else if b.time < a.time {
                        j += 1;
                        JumpPoint { time: b.time, size: sign * b.size }
                    } else {
                        i += 1;
                        j += 1;
                        JumpPoint { time: a.time, size: a.size + sign * b.size }
                    }
                }
                (Some(a), None) => {
                    i += 1;
                    *a
                }
                (None, Some(b)) => {
                    j += 1;
                    JumpPoint { time: b.time, size: sign * b.size }
                }
                (None, None) => unreachable!(),
            };
            if next.size != 0.0 {
                jumps.push(next);
            }
        }
        CadlagPath::from_parts(skel, jumps)
    }

    /// Affine image `a + b * x`.
    pub fn scalar_affine(&self, a: f64, b: f64) -> CadlagPath {
        if b == 0.0 {
            return CadlagPath::constant(a);
        }
        let skel = self.skeleton.iter().map(|&(t, v)| (t, a + b * v)).collect();
        let jumps = self
            .jumps
            .iter()
            .map(|j| JumpPoint { time: j.time, size: b * j.size })
            .collect();
        CadlagPath::from_parts(skel, jumps)
    }

    /// Time-changed path `x ∘ lambda`; the jump at `u` is the jump of `x` at
    /// `lambda(u)`.
    pub fn compose(&self, lambda: &TimeChange) -> CadlagPath {
        // Knots of the result: lambda's own knots plus preimages of x's knots,
        // with the continuous part evaluated at the exact tau on the x side.
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(self.skeleton.len() + lambda.knots.len());
        for &(u, tau) in &lambda.knots {
            pts.push((u, tau));
        }
        for &(tau, _) in &self.skeleton {
            pts.push((lambda.inverse_at(tau), tau));
        }
        pts.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pts.dedup_by(|a, b| a.0 == b.0);
        let skel: Vec<(f64, f64)> = pts
            .into_iter()
            .map(|(u, tau)| (u, self.skeleton_at(tau)))
            .collect();
        let mut jumps: Vec<JumpPoint> = Vec::with_capacity(self.jumps.len());
        for j in &self.jumps {
            let u = lambda.inverse_at(j.time);
            // Distinct jump times stay distinct through a bijection; merge
            // defensively if rounding collapses two preimages.
            if let Some(last) = jumps.last_mut() {
                if last.time == u {
                    last.size += j.size;
                    if last.size == 0.0 {
                        jumps.pop();
                    }
                    continue;
                }
            }
            jumps.push(JumpPoint { time: u, size: j.size });
        }
        CadlagPath::from_parts(skel, jumps)
    }

    /// Maximal intervals on which the path is linear, walked left to right in
    /// one pass.
    pub fn pieces(&self) -> Pieces<'_> {
        Pieces {
            path: self,
            seg: 0,
            ji: 0,
            t: 0.0,
            v: self.skeleton[0].1,
            jump_sum: 0.0,
        }
    }

    /// Exact extrema of the path over `[0,1]`, accounting for left limits.
    /// The path is linear between events, so extremes occur at piece
    /// endpoints or post-jump values.
    pub fn extrema(&self) -> (f64, f64) {
        let mut lo = self.skeleton[0].1;
        let mut hi = lo;
        for p in self.pieces() {
            lo = lo.min(p.v1_left);
            hi = hi.max(p.v1_left);
            let after = p.v1_left + p.jump;
            lo = lo.min(after);
            hi = hi.max(after);
        }
        (lo, hi)
    }

    /// `sup_{0<=t<=1} |x(t)|`, exact.
    pub fn sup_norm(&self) -> f64 {
        let (lo, hi) = self.extrema();
        math::abs(lo).max(math::abs(hi))
    }

    /// `sup_{0<=t<=1} |x(t) - y(t)|`, exact via candidate-point enumeration
    /// on the difference path.
    pub fn sup_norm_diff(&self, other: &CadlagPath) -> f64 {
        self.sub(other).sup_norm()
    }

    /// Running supremum `S(x)(t) = sup_{0<=s<=t} x(s)`, exact.
    pub fn running_sup(&self) -> CadlagPath {
        let v_start = self.skeleton[0].1;
        let mut b = PathBuilder::new(v_start);
        let mut m = v_start;
        for p in self.pieces() {
            if p.v1_left > m {
                // rising piece crosses the running max strictly inside
                if p.v0 < m {
                    let slope = (p.v1_left - p.v0) / (p.t1 - p.t0);
                    let u = p.t0 + (m - p.v0) / slope;
                    if u > p.t0 && u < p.t1 {
                        b.point(u, m);
                    }
                }
                m = p.v1_left;
            }
            b.point_left(p.t1, m);
            let after = p.v1_left + p.jump;
            if after > m {
                b.jump(p.t1, after - m);
                m = after;
            }
        }
        b.finish()
    }

    /// Running supremum of `|x|`.
    pub fn running_sup_abs(&self) -> CadlagPath {
        self.abs_path().running_sup()
    }

    /// `|x|` as an exact path (kinks inserted at interior zero crossings).
    pub fn abs_path(&self) -> CadlagPath {
        let mut b = PathBuilder::new(math::abs(self.skeleton[0].1));
        for p in self.pieces() {
            if (p.v0 > 0.0 && p.v1_left < 0.0) || (p.v0 < 0.0 && p.v1_left > 0.0) {
                let slope = (p.v1_left - p.v0) / (p.t1 - p.t0);
                let u = p.t0 + (0.0 - p.v0) / slope;
                if u > p.t0 && u < p.t1 {
                    b.point(u, 0.0);
                }
            }
            b.point_left(p.t1, math::abs(p.v1_left));
            let j = math::abs(p.v1_left + p.jump) - math::abs(p.v1_left);
            if j != 0.0 {
                b.jump(p.t1, j);
            }
        }
        b.finish()
    }

    /// Running extremal jump process: the largest positive jump, largest
    /// negative-jump magnitude, or largest jump modulus seen so far, as a
    /// nondecreasing pure step path starting at 0 (a jump exactly at the
    /// origin never exists, so the value before any qualifying jump is 0).
    pub fn running_jump_sup(&self, sign: JumpSign) -> CadlagPath {
        let mut m = 0.0f64;
        let mut jumps: Vec<JumpPoint> = Vec::new();
        for j in &self.jumps {
            let q = match sign {
                JumpSign::Positive => j.size,
                JumpSign::Negative => -j.size,
                JumpSign::Modulus => math::abs(j.size),
            };
            if q > m {
                jumps.push(JumpPoint { time: j.time, size: q - m });
                m = q;
            }
        }
        CadlagPath::from_parts(vec![(0.0, 0.0), (1.0, 0.0)], jumps)
    }
}

/// One maximal linearity interval `[t0, t1]` of a path: the value runs
/// linearly from `v0` (the right-continuous value at `t0`) to `v1_left` (the
/// left limit at `t1`) and then jumps by `jump` at `t1` (`jump` is 0 when
/// `t1` carries no jump, in particular at the endpoint).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub t0: f64,
    pub v0: f64,
    pub t1: f64,
    pub v1_left: f64,
    pub jump: f64,
}

/// Left-to-right single-pass walk over [`Piece`]s.
pub struct Pieces<'a> {
    path: &'a CadlagPath,
    seg: usize,
    ji: usize,
    t: f64,
    v: f64,
    jump_sum: f64,
}

impl Iterator for Pieces<'_> {
    type Item = Piece;

    fn next(&mut self) -> Option<Piece> {
        if self.t >= 1.0 {
            return None;
        }
        let sk = &self.path.skeleton;
        while self.seg + 2 < sk.len() && sk[self.seg + 1].0 <= self.t {
            self.seg += 1;
        }
        let (ta, va) = sk[self.seg];
        let (tb, vb) = sk[self.seg + 1];
        let next_jump = self.path.jumps.get(self.ji);
        let t1 = match next_jump {
            Some(j) if j.time < tb => j.time,
            _ => tb,
        };
        let k1 = if t1 == tb { vb } else { va + (vb - va) * ((t1 - ta) / (tb - ta)) };
        let v1_left = k1 + self.jump_sum;
        let jump = match next_jump {
            Some(j) if j.time == t1 => {
                self.ji += 1;
                self.jump_sum += j.size;
                j.size
            }
            _ => 0.0,
        };
        let piece = Piece { t0: self.t, v0: self.v, t1, v1_left, jump };
        self.t = t1;
        self.v = v1_left + jump;
        Some(piece)
    }
}

/// Incremental construction of a path from (time, value) samples of a
/// function that is linear between pushed points, with explicit jumps.
/// Values passed in are values of the target function; the builder derives
/// the continuous skeleton by subtracting accumulated jumps.
struct PathBuilder {
    skeleton: Vec<(f64, f64)>,
    jumps: Vec<JumpPoint>,
    cumj: f64,
}

impl PathBuilder {
    fn new(v0: f64) -> Self {
        PathBuilder { skeleton: vec![(0.0, v0)], jumps: Vec::new(), cumj: 0.0 }
    }

    /// Record the function value at `t` (right value, no jump at `t`).
    fn point(&mut self, t: f64, v: f64) {
        self.push_knot(t, v - self.cumj);
    }

    /// Record the left-limit value at `t`; use before `jump(t, ..)`.
    fn point_left(&mut self, t: f64, v_left: f64) {
        self.push_knot(t, v_left - self.cumj);
    }

    fn jump(&mut self, t: f64, size: f64) {
        debug_assert!(size != 0.0);
        self.jumps.push(JumpPoint { time: t, size });
        self.cumj += size;
    }

    fn push_knot(&mut self, t: f64, v: f64) {
        if let Some(last) = self.skeleton.last() {
            if last.0 == t {
                return;
            }
        }
        self.skeleton.push((t, v));
    }

    fn finish(self) -> CadlagPath {
        debug_assert_eq!(self.skeleton.last().map(|k| k.0), Some(1.0));
        CadlagPath::from_parts(self.skeleton, self.jumps)
    }
}

impl TimeChange {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, PathError> {
        if knots.len() < 2 {
            return Err(PathError::BadTimeChange("needs at least two knots"));
        }
        if knots[0] != (0.0, 0.0) || knots[knots.len() - 1] != (1.0, 1.0) {
            return Err(PathError::BadTimeChange("must fix (0,0) and (1,1)"));
        }
        if !strictly_increasing(knots.iter().map(|k| k.0))
            || !strictly_increasing(knots.iter().map(|k| k.1))
        {
            return Err(PathError::BadTimeChange("both coordinates must strictly increase"));
        }
        Ok(TimeChange { knots })
    }

    pub fn identity() -> Self {
        TimeChange { knots: vec![(0.0, 0.0), (1.0, 1.0)] }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// `lambda(u)`; exact at knots.
    pub fn apply(&self, u: f64) -> f64 {
        let idx = self.knots.partition_point(|k| k.0 <= u);
        if idx == 0 {
            return self.knots[0].1;
        }
        let (u0, v0) = self.knots[idx - 1];
        if u0 == u || idx == self.knots.len() {
            return v0;
        }
        let (u1, v1) = self.knots[idx];
        v0 + (v1 - v0) * ((u - u0) / (u1 - u0))
    }

    /// `lambda^{-1}(t)`; exact at knots.
    pub fn inverse_at(&self, t: f64) -> f64 {
        let idx = self.knots.partition_point(|k| k.1 <= t);
        if idx == 0 {
            return self.knots[0].0;
        }
        let (u0, v0) = self.knots[idx - 1];
        if v0 == t || idx == self.knots.len() {
            return u0;
        }
        let (u1, v1) = self.knots[idx];
        u0 + (u1 - u0) * ((t - v0) / (v1 - v0))
    }

    /// The inverse bijection (exact coordinate swap).
    pub fn inverse(&self) -> TimeChange {
        TimeChange { knots: self.knots.iter().map(|&(u, v)| (v, u)).collect() }
    }

    /// `sup |lambda - I|`; attained at knots since the difference is
    /// piecewise linear with value 0 at both endpoints.
    pub fn sup_dist_to_identity(&self) -> f64 {
        self.knots
            .iter()
            .map(|&(u, v)| math::abs(v - u))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn third() -> f64 {
        1.0 / 3.0
    }

    fn two_thirds() -> f64 {
        2.0 / 3.0
    }

    /// x = 1_[1/3,1] + 1_[2/3,1]
    fn double_step() -> CadlagPath {
        CadlagPath::step(0.0, &[(third(), 1.0), (two_thirds(), 1.0)]).unwrap()
    }

    /// x = 1_[1/3,2/3)
    fn box_step() -> CadlagPath {
        CadlagPath::step(0.0, &[(third(), 1.0), (two_thirds(), -1.0)]).unwrap()
    }

    /// Pointwise oracle: evaluate on a dense grid refined with all event
    /// times, using only `eval`/`eval_left`.
    fn grid(x: &CadlagPath, n: usize) -> Vec<f64> {
        let mut ts: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        for k in x.skeleton() {
            ts.push(k.0);
        }
        for j in x.jumps() {
            ts.push(j.time);
        }
        ts.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup();
        ts
    }

    #[test]
    fn eval_golden_cases() {
        let x = double_step();
        assert_eq!(x.eval(0.5).unwrap(), 1.0);
        assert_eq!(CadlagPath::zero().eval(0.7).unwrap(), 0.0);
        // slope -1 skeleton with a +2 jump at 0.5
        let y = CadlagPath::new(vec![(0.0, 0.0), (1.0, -1.0)], vec![(0.5, 2.0)]).unwrap();
        assert_eq!(y.eval(0.75).unwrap(), 1.25);
        assert!(matches!(y.eval(1.5), Err(PathError::OutOfDomain(_))));
    }

    #[test]
    fn eval_left_golden_cases() {
        let x = double_step();
        assert_eq!(x.eval_left(two_thirds()).unwrap(), 1.0);
        let c = CadlagPath::linear(0.0, 3.0);
        assert_eq!(c.eval_left(0.4).unwrap(), c.eval(0.4).unwrap());
        let b = box_step();
        assert_eq!(b.eval_left(two_thirds()).unwrap(), 1.0);
        assert_eq!(b.eval(two_thirds()).unwrap(), 0.0);
        assert!(matches!(b.eval_left(0.0), Err(PathError::LeftLimitAtZero)));
    }

    #[test]
    fn add_merges_and_cancels_jumps() {
        let x = double_step();
        let bump = CadlagPath::indicator(two_thirds()).scalar_affine(0.0, 1.0 / 3.0);
        let sum = x.add(&bump);
        // coincident-jump merging regroups the sum, so allow an ulp
        assert!((sum.eval(0.9).unwrap() - (x.eval(0.9).unwrap() + 1.0 / 3.0)).abs() < 1e-15);
        // additive inverse gives the zero path
        let z = x.add(&x.scalar_affine(0.0, -1.0));
        assert_eq!(z.jumps().len(), 0);
        assert_eq!(z.sup_norm(), 0.0);
        // +1 and -1 at the same time cancel
        let a = CadlagPath::step(0.0, &[(0.5, 1.0)]).unwrap();
        let b = CadlagPath::step(0.0, &[(0.5, -1.0)]).unwrap();
        assert_eq!(a.add(&b).jumps().len(), 0);
    }

    #[test]
    fn compose_identity_and_inverse() {
        let x = CadlagPath::new(vec![(0.0, 0.5), (0.3, -1.0), (1.0, 2.0)], vec![(0.5, 2.0)]).unwrap();
        let id = TimeChange::identity();
        assert_eq!(x.compose(&id).sup_norm_diff(&x), 0.0);

        let lam = TimeChange::new(vec![(0.0, 0.0), (0.25, 0.5), (1.0, 1.0)]).unwrap();
        let y = CadlagPath::step(0.0, &[(0.5, 1.0)]).unwrap().compose(&lam);
        let expect = CadlagPath::indicator(0.25);
        assert_eq!(y.sup_norm_diff(&expect), 0.0);

        let round = x.compose(&lam).compose(&lam.inverse());
        assert!(round.sup_norm_diff(&x) <= 1e-12);
    }

    #[test]
    fn compose_against_grid_oracle() {
        let x = CadlagPath::new(
            vec![(0.0, 0.0), (0.4, 1.0), (1.0, -0.5)],
            vec![(0.2, 1.0), (0.7, -2.0)],
        )
        .unwrap();
        let lam = TimeChange::new(vec![(0.0, 0.0), (0.3, 0.6), (0.8, 0.9), (1.0, 1.0)]).unwrap();
        let y = x.compose(&lam);
        for k in 0..=512 {
            let u = k as f64 / 512.0;
            let direct = x.eval(lam.apply(u)).unwrap();
            assert!((y.eval(u).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn sup_norm_diff_golden_cases() {
        let x = double_step();
        let xn = x.add(&CadlagPath::indicator(two_thirds()).scalar_affine(0.0, 0.125));
        assert_eq!(xn.sup_norm_diff(&x), 0.125);
        assert_eq!(x.sup_norm_diff(&x), 0.0);
        let a = CadlagPath::indicator(third());
        let b = CadlagPath::indicator(two_thirds());
        assert_eq!(a.sup_norm_diff(&b), 1.0);
    }

    #[test]
    fn sup_norm_matches_grid_oracle() {
        let x = CadlagPath::new(
            vec![(0.0, 0.3), (0.2, -1.2), (0.9, 2.0), (1.0, 1.0)],
            vec![(0.15, 0.7), (0.6, -3.0), (1.0, 0.5)],
        )
        .unwrap();
        let ts = grid(&x, 4096);
        let mut m: f64 = 0.0;
        for &t in &ts {
            m = m.max(x.eval(t).unwrap().abs());
            if t > 0.0 {
                m = m.max(x.eval_left(t).unwrap().abs());
            }
        }
        assert!((x.sup_norm() - m).abs() < 1e-9);
    }

    #[test]
    fn running_sup_golden_cases() {
        // S(1_[1/3,2/3)) = 1_[1/3,1]
        let s = box_step().running_sup();
        assert_eq!(s.sup_norm_diff(&CadlagPath::indicator(third())), 0.0);

        // nondecreasing path is a fixed point
        let inc = CadlagPath::new(vec![(0.0, 0.0), (1.0, 1.0)], vec![(0.5, 2.0)]).unwrap();
        assert_eq!(inc.running_sup().sup_norm_diff(&inc), 0.0);

        // pure downward drift: S = 0, running sup of |x| is the drift itself
        let down = CadlagPath::linear(0.0, -1.0);
        assert_eq!(down.running_sup().sup_norm(), 0.0);
        assert_eq!(down.running_sup_abs().sup_norm_diff(&CadlagPath::linear(0.0, 1.0)), 0.0);
    }

    #[test]
    fn running_sup_matches_grid_oracle() {
        let x = CadlagPath::new(
            vec![(0.0, 0.5), (0.3, 1.5), (0.55, -0.7), (1.0, 0.9)],
            vec![(0.2, -1.0), (0.5, 2.5), (0.8, -0.25)],
        )
        .unwrap();
        let s = x.running_sup();
        let ts = grid(&x, 2048);
        let mut m = f64::NEG_INFINITY;
        for &t in &ts {
            if t > 0.0 {
                m = m.max(x.eval_left(t).unwrap());
            }
            m = m.max(x.eval(t).unwrap());
            assert!((s.eval(t).unwrap() - m).abs() < 1e-12, "at t={t}");
        }
    }

    #[test]
    fn running_jump_sup_golden_cases() {
        let x = double_step();
        let s = x.running_jump_sup(JumpSign::Positive);
        assert_eq!(s.sup_norm_diff(&CadlagPath::indicator(third())), 0.0);

        let cont = CadlagPath::linear(0.0, -2.0);
        for sign in [JumpSign::Positive, JumpSign::Negative, JumpSign::Modulus] {
            assert_eq!(cont.running_jump_sup(sign).sup_norm(), 0.0);
        }

        let b = box_step();
        assert_eq!(
            b.running_jump_sup(JumpSign::Modulus)
                .sup_norm_diff(&CadlagPath::indicator(third())),
            0.0
        );
        assert_eq!(
            b.running_jump_sup(JumpSign::Negative)
                .sup_norm_diff(&CadlagPath::indicator(two_thirds())),
            0.0
        );
    }

    #[test]
    fn abs_path_matches_grid_oracle() {
        let x = CadlagPath::new(
            vec![(0.0, 1.0), (0.4, -1.0), (1.0, 0.5)],
            vec![(0.3, -1.5), (0.7, 4.0)],
        )
        .unwrap();
        let a = x.abs_path();
        for &t in &grid(&x, 2048) {
            assert!((a.eval(t).unwrap() - x.eval(t).unwrap().abs()).abs() < 1e-12);
            if t > 0.0 {
                assert!((a.eval_left(t).unwrap() - x.eval_left(t).unwrap().abs()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invariants_rejected_by_constructors() {
        assert!(CadlagPath::new(vec![(0.0, 0.0)], vec![]).is_err());
        assert!(CadlagPath::new(vec![(0.1, 0.0), (1.0, 0.0)], vec![]).is_err());
        assert!(CadlagPath::new(vec![(0.0, 0.0), (1.0, 0.0)], vec![(0.0, 1.0)]).is_err());
        assert!(CadlagPath::new(vec![(0.0, 0.0), (1.0, 0.0)], vec![(0.5, 0.0)]).is_err());
        assert!(
            CadlagPath::new(vec![(0.0, 0.0), (1.0, 0.0)], vec![(0.5, 1.0), (0.5, 2.0)]).is_err()
        );
        assert!(TimeChange::new(vec![(0.0, 0.0), (0.5, 0.4)]).is_err());
        assert!(TimeChange::new(vec![(0.0, 0.0), (0.6, 0.4), (0.5, 0.7), (1.0, 1.0)]).is_err());
    }
}
