//! Coverage-probability comparison of binomial-proportion confidence intervals.
//!
//! The library computes the Wald, Wilson, and adjusted Wilson (pseudo-observation)
//! confidence intervals from summary data, evaluates their coverage probability at
//! `(n, p)` pixels either exactly (binomial sum) or by seeded Monte Carlo simulation,
//! sweeps full pixel grids in parallel, classifies coverage values with an
//! eight-bin rainbow color code, renders pixel-color plots, and provides the
//! satisfactory-pixel-percentage tables and paired t-test used to rank the
//! estimators against each other.

pub mod analysis;
pub mod coverage;
pub mod estimators;
pub mod grid;
pub mod palette;
pub mod render;
pub mod special;

pub use analysis::{build_spp_table, paired_t_test, PairedSample, SppTable, TTestResult};
pub use coverage::{
    derive_pixel_seed, derive_run_seed, exact_coverage, monte_carlo_coverage, CoverageResult,
    PixelKey, Provenance, SamplingScheme,
};
pub use estimators::{
    adjusted_wilson_interval, wald_interval, wilson_interval, wilson_interval_weighted_form,
    ConfidenceLevel, EstimatorSpec, Interval, Method, SampleSummary,
};
pub use grid::{optimal_epsilon, run_grid, EpsilonSelection, GridMode, GridSpec, PixelGrid};
pub use palette::{ColorBin, ColorCode};
pub use render::{render_grid, render_legend, PlotImage};
pub use special::inverse_normal_cdf;

/// Errors shared across the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("quantile argument must lie strictly inside (0, 1), got {0}")]
    QuantileOutOfDomain(f64),
    #[error("confidence level must lie strictly inside (0, 1), got {0}")]
    InvalidLevel(f64),
    #[error("sample needs at least one trial")]
    ZeroTrials,
    #[error("successes ({successes}) exceed trials ({trials})")]
    InvalidSample { successes: u64, trials: u64 },
    #[error("adjusted Wilson needs at least one pseudo-observation")]
    InvalidEpsilon,
    #[error("p index must lie in 1..=99, got {0}")]
    InvalidPIndex(u8),
    #[error("sample size {n} exceeds population size {population}")]
    SampleExceedsPopulation { n: u64, population: u64 },
    #[error("Monte Carlo needs at least one replicate")]
    ZeroReplicates,
    #[error("grid spec is empty: {0}")]
    EmptyGrid(&'static str),
    #[error("color code needs alpha below 1/6, got {0}")]
    AlphaTooLarge(f64),
    #[error("legend needs at least one color code")]
    EmptyLegend,
    #[error("paired sequences differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("paired t-test needs at least two pairs, got {0}")]
    TooFewPairs(usize),
    #[error("degenerate pairing: differences have zero variance but nonzero mean")]
    DegeneratePairing,
    #[error("SPP table is missing cells: {0}")]
    MissingCells(String),
    #[error("image dimensions overflow: {0}x{1}")]
    ImageTooLarge(u64, u64),
}

pub type Result<T> = std::result::Result<T, Error>;
