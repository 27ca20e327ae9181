//! Exact algebra of càdlàg paths on `[0,1]` and the trimming transforms built on it.
//!
//! A path is stored as a continuous piecewise-linear skeleton plus a finite set
//! of jumps, which keeps every operator in this crate closed and exact: running
//! suprema, running extremal-jump processes, pointwise ("trim as you go"),
//! signed-modulus and lookback (record-time) trimmers all return paths in the
//! same representation. On top of the algebra sit
//!
//! * [`j1`] — a Skorokhod J₁ distance engine for step functions with a witness
//!   time change, plus a brute-force oracle and convergence probes,
//! * [`levy`] — samplers for compound Poisson paths with drift and truncated
//!   stable jump series (ordered-jump construction), with tail-quantile
//!   norming, and
//! * [`random`] — seeded generators of random paths and time changes used by
//!   the law tests and fuzz probes.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature only switches float intrinsics and error-trait impls.

#![cfg_attr(not(feature = "std"), no_std)]
// NaN-rejecting guards of the form `!(x > 0.0)` are intentional throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod math;

pub mod j1;
pub mod levy;
pub mod path;
pub mod random;
pub mod trim;

pub use path::{CadlagPath, JumpPoint, JumpSign, PathError, TimeChange};
pub use trim::{Certificate, TieReport, TrimSpec};
