//! Numerical laboratory for Birkhoff sums over a conservative Markov
//! shift whose excursion lengths have a slowly-varying tail.
//!
//! The model is a countable-state chain that leaves a marked state,
//! wanders for a random excursion length drawn from a heavy-tailed law
//! (the workhorse is `p_n = c / (n ln^2 n)`, whose tail decays like
//! `c / ln s`), and returns.  Birkhoff sums of the natural observable
//! along this chain grow like `exp(n^alpha)` for `alpha` in (0, 1) —
//! a stretched-exponential scale strictly between every polynomial and
//! every exponential — and the normalized sums converge to a
//! nondegenerate limit.  This crate realizes that construction
//! numerically and cross-checks it three independent ways:
//!
//! * **exact renewal recursions** ([`renewal`]) give the distribution
//!   of the height (time since last return) and the local behavior of
//!   the return sequence `u_s`, with algebraic self-checks
//!   (completeness, hazard telescoping, composition enumeration);
//! * **Monte Carlo simulation** ([`simulate`]) draws trajectories
//!   excursion-by-excursion — one uniform per excursion, never one per
//!   step — so horizons of `10^6` steps cost microseconds per sample;
//! * **growth diagnostics** ([`growth`]) classify a normalizing
//!   sequence from its logarithms alone: polynomial vs stretched vs
//!   exponential, ratio convergence, and doubling bounds.
//!
//! All magnitudes that would overflow `f64` live in log space
//! ([`logspace`]); every logarithm in this crate is natural.
//!
//! The CLI ([`cli`]) exposes the same machinery as five subcommands
//! (`law`, `renewal`, `simulate`, `growth`, `verify`).  The runnable
//! examples are the guided tour:
//!
//! | example | what it shows |
//! |---------|---------------|
//! | `law_tables` | excursion laws: pmf/tail/hazard, normalizer certification |
//! | `renewal_heights` | height distributions and the completeness identity |
//! | `stretched_limit` | the stretched-exponential limit theorem end to end |
//! | `degenerate_power_law` | why integrable return times collapse the ratio |
//! | `decorated_marks` | mark-decorated sums and the conditional-uniform limit |
//! | `parity_two_measures` | one chain, two starting states, two limit laws |
//! | `growth_audit` | growth classification on four analytic families |
//! | `clt_calibration` | the i.i.d. Gaussian control run |
//!
//! Reproducibility: every random quantity derives from an explicit
//! `u64` seed via a counter-based generator with per-worker streams,
//! so a run with the same seed and worker count is byte-identical —
//! and the first worker's stream matches a single-worker run, so
//! parallelism never changes the leading samples.

pub mod cli;
pub mod error;
pub mod growth;
pub mod law;
pub mod logspace;
mod output;
pub mod renewal;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
