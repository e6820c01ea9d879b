//! Exact-arithmetic analysis of finite-horizon, finite-state market models
//! carrying an extra random time `τ`.
//!
//! The crate builds the progressively enlarged filtration `𝔾` generated by a
//! public filtration `𝔽` and `τ`, computes the Azéma supermartingales
//! `Z = P[τ > n | Fₙ]` and `Z̃ = P[τ ≥ n | Fₙ]`, the martingale deflators and
//! measure changes that transfer `𝔽`-martingales into the insider filtration,
//! and decides the no-arbitrage property of stopped (`Sᵗ`) and post-`τ`
//! (`S − Sᵗ`) markets. Every verdict comes with a certificate: an explicit
//! arbitrage strategy or an equivalent martingale measure.
//!
//! All arithmetic is exact ([`Rational`]); no tolerance appears anywhere.
//!
//! Module map:
//! - [`space`]: sample spaces, partitions, filtrations, processes, strategies,
//!   conditional expectation, martingale tests, densities.
//! - [`random_time`]: random times, the enlarged filtration, Azéma
//!   supermartingales, hitting times, honesty.
//! - [`transfer`]: compensated `𝔾`-martingales, deflators, measure changes,
//!   truncated processes and orthogonality tests.
//! - [`arbitrage`]: NA decision procedures, EMM construction, theorem
//!   validators and the brute-force oracle.
//! - [`lp`]: a small exact simplex solver used by the LP oracle.
//! - [`generate`], [`fuzz`]: seeded random instances and property campaigns.
//! - [`models`]: the two binomial insider examples.

pub mod arbitrage;
pub mod error;
pub mod fuzz;
pub mod generate;
pub mod lp;
pub mod models;
pub mod random_time;
pub mod rational;
pub mod space;
pub mod transfer;

pub use arbitrage::{
    brute_force_na, construct_emm, na_check, na_check_lp, validate_after_theorem,
    validate_before_theorem, validate_reverse_after, validate_reverse_before, EquivalenceReport,
    Grid, GridSearch, NaVerdict, ReverseReport, Witness,
};
pub use error::{Error, Result};
pub use random_time::{
    is_honest, is_honest_strict, progressive_enlargement, AzemaPair, EnlargedModel,
    ExtendedTime, Honesty, RandomTime, StoppingTriple,
};
pub use rational::{int, parse_rational, rat, Rational};
pub use space::{
    Filtration, MartingaleVerdict, MeasureDensity, Partition, Process, SampleSpace, Strategy,
};
pub use transfer::{DeflatorReport, MeasureChangeReport, Orthogonality, Side};
