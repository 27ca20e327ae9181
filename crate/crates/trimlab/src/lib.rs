//! Monte Carlo lab for trimmed-path limit laws: experiments comparing scaled
//! trimmed Lévy marginals against trimmed stable references, tie scanning,
//! continuity probes, ruin-time estimation, and the CLI plus its file
//! formats (path JSON, experiment CSV, key-value config).

// NaN-rejecting guards of the form `!(x > 0.0)` are intentional throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod format;
pub mod harness;
