//! Trimming transforms on càdlàg paths.
//!
//! Three families, all exact on the skeleton-plus-jumps representation:
//!
//! * global ("trim as you go") trimmers, which at every time subtract the
//!   running extremal jump processes, iterated per order, together with the
//!   running r-th extremal jump processes;
//! * the signed-modulus trimmer, which subtracts the signed jump value held
//!   at the *last* modulus record time, so the result stays càdlàg even when
//!   modulus ties change sign;
//! * lookback (record-time) trimmers, which subtract the overall record jump
//!   as an indicator from its first record time onward.
//!
//! Tie bookkeeping (the `A±`, `Ã` tie sets and the sign-changing set `B`) and
//! the sufficient-condition continuity certificate live here as well.

use alloc::vec::Vec;

use crate::math;
use crate::path::{CadlagPath, JumpSign};

/// Which trimmer to apply. `r`/`s` are trim orders; order 0 is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrimSpec {
    /// Subtract the running largest positive jump, iterated `r` times.
    GlobalPos(u32),
    /// Add back the running largest negative-jump magnitude, iterated.
    GlobalNeg(u32),
    /// Positive trim of order `r` composed with negative trim of order `s`
    /// (the two compositions agree; positive is applied first).
    GlobalBoth(u32, u32),
    /// Literal modulus trimmer: subtract the running largest jump modulus,
    /// iterated. Note this subtracts the (positive) modulus value, not the
    /// signed jump; the signed variant is [`TrimSpec::SignedModulus`].
    GlobalModulus(u32),
    /// Subtract the signed jump value at the last modulus record time.
    SignedModulus(u32),
    /// Subtract the record positive jump from its first record time onward.
    LookbackPos(u32),
    /// Same with the record modulus jump (signed value, first record time).
    LookbackModulus(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrimError {
    /// `trim_global` called with a non-global spec.
    NotGlobal(TrimSpec),
    /// Order statistic of order 0 requested.
    ZeroOrder,
    /// Unparseable spec string.
    BadSpec,
}

impl core::fmt::Display for TrimError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TrimError::NotGlobal(s) => write!(f, "spec {s} is not a global trimmer"),
            TrimError::ZeroOrder => write!(f, "jump order statistic needs order >= 1"),
            TrimError::BadSpec => write!(f, "unparseable trim spec"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TrimError {}

impl core::fmt::Display for TrimSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TrimSpec::GlobalPos(r) => write!(f, "pos:{r}"),
            TrimSpec::GlobalNeg(s) => write!(f, "neg:{s}"),
            TrimSpec::GlobalBoth(r, s) => write!(f, "both:{r},{s}"),
            TrimSpec::GlobalModulus(r) => write!(f, "mod:{r}"),
            TrimSpec::SignedModulus(r) => write!(f, "smod:{r}"),
            TrimSpec::LookbackPos(r) => write!(f, "lb-pos:{r}"),
            TrimSpec::LookbackModulus(r) => write!(f, "lb-mod:{r}"),
        }
    }
}

impl core::str::FromStr for TrimSpec {
    type Err = TrimError;

    fn from_str(s: &str) -> Result<Self, TrimError> {
        let (kind, args) = s.split_once(':').ok_or(TrimError::BadSpec)?;
        let one = |a: &str| a.trim().parse::<u32>().map_err(|_| TrimError::BadSpec);
        match kind.trim() {
            "pos" => Ok(TrimSpec::GlobalPos(one(args)?)),
            "neg" => Ok(TrimSpec::GlobalNeg(one(args)?)),
            "both" => {
                let (r, s) = args.split_once(',').ok_or(TrimError::BadSpec)?;
                Ok(TrimSpec::GlobalBoth(one(r)?, one(s)?))
            }
            "mod" => Ok(TrimSpec::GlobalModulus(one(args)?)),
            "smod" => Ok(TrimSpec::SignedModulus(one(args)?)),
            "lb-pos" => Ok(TrimSpec::LookbackPos(one(args)?)),
            "lb-mod" => Ok(TrimSpec::LookbackModulus(one(args)?)),
            _ => Err(TrimError::BadSpec),
        }
    }
}

/// Record-time flavor for lookback trimming and first record times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFlavor {
    Positive,
    Modulus,
}

/// Tie sets at a query time: times of jumps achieving the running positive
/// record, negative record, modulus record, and the sign-changing subset of
/// the modulus ties (consecutive-in-time sign flips).
#[derive(Debug, Clone, PartialEq)]
pub struct TieReport {
    pub a_plus: Vec<f64>,
    pub a_minus: Vec<f64>,
    pub a_mod: Vec<f64>,
    pub b_signchange: Vec<f64>,
}

/// Verdict of the sufficient-condition continuity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    GuaranteedContinuous,
    NotGuaranteed,
}

fn trim_pos_once(x: &CadlagPath) -> CadlagPath {
    x.sub(&x.running_jump_sup(JumpSign::Positive))
}

fn trim_neg_once(x: &CadlagPath) -> CadlagPath {
    x.add(&x.running_jump_sup(JumpSign::Negative))
}

fn trim_mod_once(x: &CadlagPath) -> CadlagPath {
    x.sub(&x.running_jump_sup(JumpSign::Modulus))
}

fn iterate(x: &CadlagPath, n: u32, step: fn(&CadlagPath) -> CadlagPath) -> CadlagPath {
    let mut y = x.clone();
    for _ in 0..n {
        y = step(&y);
    }
    y
}

/// Global ("trim as you go") trimmers, computed by literal iteration.
pub fn trim_global(x: &CadlagPath, spec: &TrimSpec) -> Result<CadlagPath, TrimError> {
    match *spec {
        TrimSpec::GlobalPos(r) => Ok(iterate(x, r, trim_pos_once)),
        TrimSpec::GlobalNeg(s) => Ok(iterate(x, s, trim_neg_once)),
        TrimSpec::GlobalBoth(r, s) => Ok(iterate(&iterate(x, r, trim_pos_once), s, trim_neg_once)),
        TrimSpec::GlobalModulus(r) => Ok(iterate(x, r, trim_mod_once)),
        other => Err(TrimError::NotGlobal(other)),
    }
}

/// Running r-th extremal jump process (r >= 1): the extremal jump process of
/// the (r-1)-times trimmed path.
pub fn jump_order_stat(x: &CadlagPath, r: u32, sign: JumpSign) -> Result<CadlagPath, TrimError> {
    if r == 0 {
        return Err(TrimError::ZeroOrder);
    }
    let step = match sign {
        JumpSign::Positive => trim_pos_once as fn(&CadlagPath) -> CadlagPath,
        JumpSign::Negative => trim_neg_once,
        JumpSign::Modulus => trim_mod_once,
    };
    Ok(iterate(x, r - 1, step).running_jump_sup(sign))
}

/// Last time in `(0, tau]` at which the running modulus record is attained;
/// `None` when the path has no jump in `(0, tau]`.
///
/// `tau` must lie in `[0,1]`.
pub fn last_mod_record_time(x: &CadlagPath, tau: f64) -> Option<f64> {
    assert!((0.0..=1.0).contains(&tau), "tau must be in [0,1]");
    let mut record = 0.0f64;
    let mut at = None;
    for j in x.jumps().iter().take_while(|j| j.time <= tau) {
        let a = math::abs(j.size);
        if a >= record {
            record = a;
            at = Some(j.time);
        }
    }
    at
}

/// First time in `(0, tau]` at which the running record at `tau` was
/// achieved; `None` when no qualifying jump exists (for the positive flavor,
/// no positive jump; for the modulus flavor, no jump at all).
pub fn first_record_time(x: &CadlagPath, tau: f64, flavor: RecordFlavor) -> Option<f64> {
    assert!((0.0..=1.0).contains(&tau), "tau must be in [0,1]");
    let mut record = 0.0f64;
    let mut at = None;
    for j in x.jumps().iter().take_while(|j| j.time <= tau) {
        let q = match flavor {
            RecordFlavor::Positive => j.size,
            RecordFlavor::Modulus => math::abs(j.size),
        };
        if q > record {
            record = q;
            at = Some(j.time);
        }
    }
    at
}

/// Signed-modulus trimmer: subtract, pointwise, the signed jump value at the
/// last modulus record time, iterated `r` times.
pub fn trim_signed_modulus(x: &CadlagPath, r: u32) -> CadlagPath {
    let mut y = x.clone();
    for _ in 0..r {
        y = signed_modulus_once(&y);
    }
    y
}

fn signed_modulus_once(x: &CadlagPath) -> CadlagPath {
    // The subtracted process jumps when the modulus record rises or when a
    // later tie moves the record holder; its value is the signed jump of the
    // current holder.
    let mut record = 0.0f64;
    let mut held = 0.0f64;
    let mut steps: Vec<(f64, f64)> = Vec::new();
    for j in x.jumps() {
        let a = math::abs(j.size);
        // Jump sizes are nonzero, so a == record implies record > 0: a later
        // tie moves the record holder just like a strict record does.
        if a >= record {
            record = a;
            if j.size != held {
                steps.push((j.time, j.size - held));
                held = j.size;
            }
        }
    }
    if steps.is_empty() {
        return x.clone();
    }
    let sub = CadlagPath::step(0.0, &steps).expect("valid step path");
    x.sub(&sub)
}

/// Lookback (record-time) trimmer: subtract the overall record jump as an
/// indicator from its first record time onward, iterated `r` times. A path
/// without a qualifying jump is returned unchanged.
pub fn trim_lookback(x: &CadlagPath, r: u32, flavor: RecordFlavor) -> CadlagPath {
    let mut y = x.clone();
    for _ in 0..r {
        let Some(t) = first_record_time(&y, 1.0, flavor) else {
            return y;
        };
        let size = y.jump_at(t);
        let ind = CadlagPath::step(0.0, &[(t, size)]).expect("record jump is a valid step");
        y = y.sub(&ind);
    }
    y
}

/// Tie sets at `tau`. A continuous path (no jumps up to `tau`) yields empty
/// sets; one-sided sets are empty when no jump of that side exists.
pub fn tie_sets(x: &CadlagPath, tau: f64) -> TieReport {
    assert!((0.0..=1.0).contains(&tau), "tau must be in [0,1]");
    let upto: Vec<_> = x.jumps().iter().take_while(|j| j.time <= tau).collect();
    let mut pos_rec = 0.0f64;
    let mut neg_rec = 0.0f64;
    let mut mod_rec = 0.0f64;
    for j in &upto {
        pos_rec = pos_rec.max(j.size);
        neg_rec = neg_rec.max(-j.size);
        mod_rec = mod_rec.max(math::abs(j.size));
    }
    let collect = |pred: &dyn Fn(f64) -> bool| -> Vec<f64> {
        upto.iter().filter(|j| pred(j.size)).map(|j| j.time).collect()
    };
    let a_plus = if pos_rec > 0.0 { collect(&|s| s == pos_rec) } else { Vec::new() };
    let a_minus = if neg_rec > 0.0 { collect(&|s| -s == neg_rec) } else { Vec::new() };
    let a_mod = if mod_rec > 0.0 { collect(&|s| math::abs(s) == mod_rec) } else { Vec::new() };
    let mut b_signchange = Vec::new();
    for w in a_mod.windows(2) {
        let prev = x.jump_at(w[0]);
        let cur = x.jump_at(w[1]);
        if cur == -prev {
            b_signchange.push(w[1]);
        }
    }
    TieReport { a_plus, a_minus, a_mod, b_signchange }
}

/// Sufficient-condition check for joint J1 continuity of the trimmer at `x`:
/// global trimmers are continuous everywhere; the signed-modulus trimmer is
/// certified when no iterate up to `r-1` ever has a sign-changing modulus
/// tie; lookback trimmers are certified when every iterate has at most one
/// record holder at time 1. `NotGuaranteed` means the hypotheses fail, not
/// that discontinuity is proven (except for lookback at order 1, where a
/// tied record at time 1 is also necessary for failure).
pub fn continuity_certificate(x: &CadlagPath, spec: &TrimSpec) -> Certificate {
    match *spec {
        TrimSpec::GlobalPos(_)
        | TrimSpec::GlobalNeg(_)
        | TrimSpec::GlobalBoth(..)
        | TrimSpec::GlobalModulus(_) => Certificate::GuaranteedContinuous,
        TrimSpec::SignedModulus(r) => {
            let mut y = x.clone();
            for j in 0..r {
                if j > 0 {
                    y = signed_modulus_once(&y);
                }
                // Tie sets change only at jump times, so checking each jump
                // time (and 1) covers the supremum over tau.
                let mut taus: Vec<f64> = y.jumps().iter().map(|jp| jp.time).collect();
                taus.push(1.0);
                for t in taus {
                    if !tie_sets(&y, t).b_signchange.is_empty() {
                        return Certificate::NotGuaranteed;
                    }
                }
            }
            Certificate::GuaranteedContinuous
        }
        TrimSpec::LookbackPos(r) | TrimSpec::LookbackModulus(r) => {
            let flavor = if matches!(spec, TrimSpec::LookbackPos(_)) {
                RecordFlavor::Positive
            } else {
                RecordFlavor::Modulus
            };
            let mut y = x.clone();
            for j in 0..r {
                if j > 0 {
                    y = trim_lookback(&y, 1, flavor);
                }
                let ties = tie_sets(&y, 1.0);
                let count = match flavor {
                    RecordFlavor::Positive => ties.a_plus.len(),
                    RecordFlavor::Modulus => ties.a_mod.len(),
                };
                if count > 1 {
                    return Certificate::NotGuaranteed;
                }
            }
            Certificate::GuaranteedContinuous
        }
    }
}

/// Apply any trimmer.
pub fn apply(x: &CadlagPath, spec: &TrimSpec) -> CadlagPath {
    match *spec {
        TrimSpec::GlobalPos(_)
        | TrimSpec::GlobalNeg(_)
        | TrimSpec::GlobalBoth(..)
        | TrimSpec::GlobalModulus(_) => trim_global(x, spec).expect("global spec"),
        TrimSpec::SignedModulus(r) => trim_signed_modulus(x, r),
        TrimSpec::LookbackPos(r) => trim_lookback(x, r, RecordFlavor::Positive),
        TrimSpec::LookbackModulus(r) => trim_lookback(x, r, RecordFlavor::Modulus),
    }
}

/// Convenience wrapper mirroring the trim spec grammar.
pub fn parse_spec(s: &str) -> Result<TrimSpec, TrimError> {
    s.parse()
}
