//! Full `(n, p)` grid sweeps: run every pixel for a set of estimators,
//! compute satisfactory pixel percentages and color histograms, and export
//! grids as CSV or JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage::{
    binomial_pmf, derive_pixel_seed, estimator_intervals, exact_coverage_from_parts,
    monte_carlo_coverage, CoverageResult, PixelKey, SamplingScheme,
};
use crate::estimators::EstimatorSpec;
use crate::palette::{ColorBin, ColorCode};
use crate::{Error, Result};

/// Evaluation mode for a grid sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GridMode {
    Exact,
    MonteCarlo {
        scheme: SamplingScheme,
        n_sim: u64,
        seed: u64,
    },
}

/// A grid request: `n` range, `p` indices, estimators, and mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_min: u32,
    pub n_max: u32,
    pub p_indices: Vec<u8>,
    pub estimators: Vec<EstimatorSpec>,
    pub mode: GridMode,
}

impl GridSpec {
    pub fn new(
        n_min: u32,
        n_max: u32,
        estimators: Vec<EstimatorSpec>,
        mode: GridMode,
    ) -> Result<Self> {
        let spec = Self {
            n_min,
            n_max,
            p_indices: (1..=99).collect(),
            estimators,
            mode,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn exact(n_min: u32, n_max: u32, estimators: Vec<EstimatorSpec>) -> Result<Self> {
        Self::new(n_min, n_max, estimators, GridMode::Exact)
    }

    pub fn monte_carlo(
        n_min: u32,
        n_max: u32,
        estimators: Vec<EstimatorSpec>,
        scheme: SamplingScheme,
        n_sim: u64,
        seed: u64,
    ) -> Result<Self> {
        Self::new(
            n_min,
            n_max,
            estimators,
            GridMode::MonteCarlo {
                scheme,
                n_sim,
                seed,
            },
        )
    }

    /// Keep only every `stride`-th p index (1, 1+stride, ...). A stride of 2
    /// is the documented scaled-down mode for the large-n sweep.
    pub fn with_p_stride(mut self, stride: usize) -> Self {
        let stride = stride.max(1);
        self.p_indices = (1..=99).step_by(stride).collect();
        self
    }

    pub fn with_p_indices(mut self, p_indices: Vec<u8>) -> Result<Self> {
        self.p_indices = p_indices;
        self.validate()?;
        Ok(self)
    }

    pub fn pixel_count(&self) -> u64 {
        u64::from(self.n_max - self.n_min + 1) * self.p_indices.len() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 {
            return Err(Error::ZeroTrials);
        }
        if self.n_min > self.n_max {
            return Err(Error::EmptyGrid("n_min exceeds n_max"));
        }
        if self.estimators.is_empty() {
            return Err(Error::EmptyGrid("no estimators"));
        }
        if self.p_indices.is_empty() {
            return Err(Error::EmptyGrid("no p indices"));
        }
        for &p in &self.p_indices {
            if !(1..=99).contains(&p) {
                return Err(Error::InvalidPIndex(p));
            }
        }
        if let GridMode::MonteCarlo { scheme, n_sim, .. } = self.mode {
            if n_sim == 0 {
                return Err(Error::ZeroReplicates);
            }
            if let SamplingScheme::FinitePopulation { population_size } = scheme {
                if u64::from(self.n_max) > population_size {
                    return Err(Error::SampleExceedsPopulation {
                        n: u64::from(self.n_max),
                        population: population_size,
                    });
                }
            }
        }
        Ok(())
    }
}

/// One estimator's dense coverage matrix over the grid, row-major with `n`
/// as the major axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PixelGrid {
    estimator: EstimatorSpec,
    n_values: Vec<u32>,
    p_indices: Vec<u8>,
    cells: Vec<CoverageResult>,
}

impl PixelGrid {
    /// Assemble a grid from parts; `cells` must be row-major over
    /// `n_values x p_indices`.
    pub fn from_cells(
        estimator: EstimatorSpec,
        n_values: Vec<u32>,
        p_indices: Vec<u8>,
        cells: Vec<CoverageResult>,
    ) -> Result<Self> {
        if n_values.is_empty() || p_indices.is_empty() {
            return Err(Error::EmptyGrid("empty axis"));
        }
        if cells.len() != n_values.len() * p_indices.len() {
            return Err(Error::EmptyGrid("cell count does not match axes"));
        }
        Ok(Self {
            estimator,
            n_values,
            p_indices,
            cells,
        })
    }

    pub fn estimator(&self) -> EstimatorSpec {
        self.estimator
    }

    pub fn n_values(&self) -> &[u32] {
        &self.n_values
    }

    pub fn p_indices(&self) -> &[u8] {
        &self.p_indices
    }

    pub fn n_max(&self) -> u32 {
        *self.n_values.last().expect("non-empty")
    }

    pub fn cells(&self) -> &[CoverageResult] {
        &self.cells
    }

    pub fn cell(&self, n: u32, p_index: u8) -> Option<&CoverageResult> {
        let ni = self.n_values.iter().position(|&v| v == n)?;
        let pi = self.p_indices.iter().position(|&v| v == p_index)?;
        self.cells.get(ni * self.p_indices.len() + pi)
    }

    /// Fraction of pixels whose coverage is at least the nominal level.
    pub fn satisfactory_pixel_percentage(&self) -> f64 {
        let satisfied = self.cells.iter().filter(|c| c.is_satisfactory()).count();
        satisfied as f64 / self.cells.len() as f64
    }

    /// Fraction of pixels in each of the eight bins; sums to one exactly
    /// because every cell lands in exactly one bin.
    pub fn color_histogram(&self, code: &ColorCode) -> BTreeMap<ColorBin, f64> {
        let mut counts: BTreeMap<ColorBin, usize> =
            ColorBin::ALL.iter().map(|&b| (b, 0)).collect();
        for cell in &self.cells {
            *counts.get_mut(&code.classify_result(cell)).expect("all bins") += 1;
        }
        let total = self.cells.len() as f64;
        counts
            .into_iter()
            .map(|(bin, count)| (bin, count as f64 / total))
            .collect()
    }

    /// CSV export, one row per pixel, LF line endings.
    pub fn to_csv_string(&self, precision: CsvPrecision) -> String {
        let mut out = String::with_capacity(self.cells.len() * 48 + 64);
        out.push_str("n,p,method,epsilon,level,coverage,mode,seed\n");
        for cell in &self.cells {
            let epsilon = cell
                .estimator
                .epsilon()
                .map(|e| e.to_string())
                .unwrap_or_default();
            let seed = cell
                .provenance
                .seed()
                .map(|s| s.to_string())
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{:.2},{},{},{},{},{},{}",
                cell.pixel.n(),
                cell.pixel.p(),
                cell.estimator.method().token(),
                epsilon,
                cell.estimator.level().level(),
                precision.format(cell.coverage),
                cell.provenance.mode_token(),
                seed,
            );
        }
        out
    }
}

/// Decimal rendering of coverage values in CSV exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvPrecision {
    /// Six decimal places, enough to reproduce any `hits / n_sim <= 10^6`.
    Fixed6,
    /// Fifteen significant digits, for exact-mode grids.
    Sig15,
}

impl CsvPrecision {
    fn format(&self, value: f64) -> String {
        match self {
            CsvPrecision::Fixed6 => format!("{value:.6}"),
            CsvPrecision::Sig15 => format!("{value:.14e}"),
        }
    }
}

/// Run a grid sweep: one [`PixelGrid`] per estimator.
///
/// Pixels are evaluated in parallel by `n` row; in Monte Carlo mode each
/// pixel gets an independently derived seed, so the result is a pure function
/// of the spec regardless of thread count or scheduling.
pub fn run_grid(spec: &GridSpec) -> Result<Vec<PixelGrid>> {
    spec.validate()?;
    let n_values: Vec<u32> = (spec.n_min..=spec.n_max).collect();

    let rows: Vec<Vec<Vec<CoverageResult>>> = n_values
        .par_iter()
        .map(|&n| row_results(spec, n))
        .collect::<Result<Vec<_>>>()?;

    let cells_per_grid = n_values.len() * spec.p_indices.len();
    let mut per_estimator: Vec<Vec<CoverageResult>> =
        vec![Vec::with_capacity(cells_per_grid); spec.estimators.len()];
    for row in rows {
        for pixel_results in row {
            for (slot, result) in per_estimator.iter_mut().zip(pixel_results) {
                slot.push(result);
            }
        }
    }

    spec.estimators
        .iter()
        .zip(per_estimator)
        .map(|(&estimator, cells)| {
            PixelGrid::from_cells(estimator, n_values.clone(), spec.p_indices.clone(), cells)
        })
        .collect()
}

/// All results for one `n` row: `row[p][estimator]`.
fn row_results(spec: &GridSpec, n: u32) -> Result<Vec<Vec<CoverageResult>>> {
    match spec.mode {
        GridMode::Exact => {
            // Intervals depend on (x, n, estimator) only, so one row shares
            // them across all p; the pmf is shared across estimators.
            let intervals: Vec<_> = spec
                .estimators
                .iter()
                .map(|&e| estimator_intervals(e, n))
                .collect();
            spec.p_indices
                .iter()
                .map(|&p_index| {
                    let pixel = PixelKey::new(n, p_index)?;
                    let pmf = binomial_pmf(n, pixel.p());
                    Ok(spec
                        .estimators
                        .iter()
                        .zip(&intervals)
                        .map(|(&e, iv)| exact_coverage_from_parts(pixel, e, iv, &pmf))
                        .collect())
                })
                .collect()
        }
        GridMode::MonteCarlo {
            scheme,
            n_sim,
            seed,
        } => spec
            .p_indices
            .iter()
            .map(|&p_index| {
                let pixel = PixelKey::new(n, p_index)?;
                let pixel_seed = derive_pixel_seed(seed, n, p_index);
                monte_carlo_coverage(pixel, &spec.estimators, scheme, n_sim, pixel_seed)
            })
            .collect(),
    }
}

/// Serializable bundle of a spec and its grids, nested by estimator.
#[derive(Serialize)]
pub struct GridDocument<'a> {
    pub spec: &'a GridSpec,
    pub grids: &'a [PixelGrid],
}

pub fn grids_to_json_string(spec: &GridSpec, grids: &[PixelGrid]) -> serde_json::Result<String> {
    serde_json::to_string_pretty(&GridDocument { spec, grids })
}

/// The winning pseudo-observation count among candidate grids, with any
/// near-ties (within 0.005 of the maximum) reported alongside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonSelection {
    pub best: u32,
    pub best_spp: f64,
    pub near_ties: Vec<u32>,
}

/// Pick the epsilon with the highest satisfactory pixel percentage. Ties are
/// broken toward the smaller epsilon.
pub fn optimal_epsilon(grids: &BTreeMap<u32, PixelGrid>) -> Result<EpsilonSelection> {
    if grids.is_empty() {
        return Err(Error::EmptyGrid("no epsilon candidates"));
    }
    let spp: BTreeMap<u32, f64> = grids
        .iter()
        .map(|(&eps, grid)| (eps, grid.satisfactory_pixel_percentage()))
        .collect();
    let (&best, &best_spp) = spp
        .iter()
        .reduce(|acc, item| if item.1 > acc.1 { item } else { acc })
        .expect("non-empty");
    let near_ties = spp
        .iter()
        .filter(|&(&eps, &s)| eps != best && best_spp - s <= 0.005)
        .map(|(&eps, _)| eps)
        .collect();
    Ok(EpsilonSelection {
        best,
        best_spp,
        near_ties,
    })
}
