//! Rateless fountain codes over finite fields GF(q).
//!
//! The crate provides exact GF(q) arithmetic, LT degree distributions
//! (ideal and robust soliton, the Raptor distribution, and a random-tail
//! variant of it), LT and random linear encoders, peeling and Gaussian
//! elimination decoders, closed-form failure rates for random linear codes,
//! and a Monte Carlo harness that measures failure rate against overhead.

pub mod analytic;
pub mod cli;
pub mod codec;
pub mod decode;
pub mod degree;
pub mod gf;
pub mod sim;

pub use analytic::{failure_curve, failure_rate, OverheadPoint};
pub use codec::{combine, encode_lt, encode_random_linear, EncodedSymbol, SourceBlock};
pub use decode::{
    bp_decode, bp_implies_ge, ge_decode, ge_square_replace, DecodeReport, DecodeStatus, LinearSystem,
};
pub use degree::{
    ideal_soliton, raptor_omega, robust_soliton, robust_soliton_tau, sample_degree, DegreePmf, DegreeSource,
    NovelOmega, RobustSolitonParams, TailMode,
};
pub use gf::{FieldElement, FieldSpec};
pub use sim::{run_experiment, run_trial, DecodeMode, Distribution, ExperimentConfig, ResultRow};
