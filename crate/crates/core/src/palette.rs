//! The eight-bin rainbow color code for coverage probabilities.
//!
//! For a significance level `alpha` the bins partition `[0, 1]` as
//! `[0, a) [a, 2a) [2a, 3a) [3a, 0.5) [0.5, 1-3a) [1-3a, 1-2a) [1-2a, 1-a)`
//! and the closed top bin `[1-a, 1]`. A coverage exactly equal to the nominal
//! level is satisfactory (Pink).

use serde::{Deserialize, Serialize};

use crate::coverage::{CoverageResult, Provenance};
use crate::estimators::ConfidenceLevel;
use crate::{Error, Result};

/// The eight bins, ordered by ascending coverage range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ColorBin {
    Red,
    Orange,
    LightGreen,
    Green,
    Turquoise,
    Blue,
    Purple,
    Pink,
}

impl ColorBin {
    pub const ALL: [ColorBin; 8] = [
        ColorBin::Red,
        ColorBin::Orange,
        ColorBin::LightGreen,
        ColorBin::Green,
        ColorBin::Turquoise,
        ColorBin::Blue,
        ColorBin::Purple,
        ColorBin::Pink,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ColorBin::Red => "Red",
            ColorBin::Orange => "Orange",
            ColorBin::LightGreen => "Light Green",
            ColorBin::Green => "Green",
            ColorBin::Turquoise => "Turquoise",
            ColorBin::Blue => "Blue",
            ColorBin::Purple => "Purple",
            ColorBin::Pink => "Pink",
        }
    }

    fn index(&self) -> usize {
        *self as usize
    }
}

/// Canonical RGB values for the eight named colors, overridable per code.
const DEFAULT_RGB: [[u8; 3]; 8] = [
    [0xFF, 0x00, 0x00], // Red
    [0xFF, 0xA5, 0x00], // Orange
    [0x90, 0xEE, 0x90], // Light Green
    [0x00, 0x80, 0x00], // Green
    [0x40, 0xE0, 0xD0], // Turquoise
    [0x00, 0x00, 0xFF], // Blue
    [0x80, 0x00, 0x80], // Purple
    [0xFF, 0xC0, 0xCB], // Pink
];

/// Exact parts-per-million representation of a probability, when it has one.
/// Used to compare Monte Carlo rationals `hits / n_sim` against bin
/// boundaries without floating-point boundary misclassification.
pub(crate) fn ppm_of(x: f64) -> Option<u64> {
    if !(0.0..=1.0).contains(&x) {
        return None;
    }
    let ppm = (x * 1e6).round();
    if (ppm / 1e6 - x).abs() < 1e-12 {
        Some(ppm as u64)
    } else {
        None
    }
}

/// The color code instantiated at one significance level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColorCode {
    alpha: f64,
    alpha_ppm: Option<u64>,
    boundaries: [f64; 9],
    rgb: [[u8; 3]; 8],
}

impl ColorCode {
    /// Requires `alpha < 1/6` so that `3 alpha < 0.5 < 1 - 3 alpha` and the
    /// eight ranges are non-degenerate.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0 / 6.0) {
            return Err(Error::AlphaTooLarge(alpha));
        }
        let alpha_ppm = ppm_of(alpha);
        // When alpha is an exact decimal, place every boundary at the float
        // nearest the true decimal value instead of compounding rounding
        // through 1 - k*alpha; 0.85 must then classify as the 0.85 edge.
        let boundaries = match alpha_ppm {
            Some(a) => {
                let at = |ppm: u64| ppm as f64 / 1e6;
                [
                    0.0,
                    at(a),
                    at(2 * a),
                    at(3 * a),
                    0.5,
                    at(1_000_000 - 3 * a),
                    at(1_000_000 - 2 * a),
                    at(1_000_000 - a),
                    1.0,
                ]
            }
            None => [
                0.0,
                alpha,
                2.0 * alpha,
                3.0 * alpha,
                0.5,
                1.0 - 3.0 * alpha,
                1.0 - 2.0 * alpha,
                1.0 - alpha,
                1.0,
            ],
        };
        Ok(Self {
            alpha,
            alpha_ppm,
            boundaries,
            rgb: DEFAULT_RGB,
        })
    }

    pub fn new(level: ConfidenceLevel) -> Result<Self> {
        Self::from_alpha(level.alpha())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Override the RGB triple of one bin.
    pub fn with_rgb(mut self, bin: ColorBin, rgb: [u8; 3]) -> Self {
        self.rgb[bin.index()] = rgb;
        self
    }

    pub fn rgb(&self, bin: ColorBin) -> [u8; 3] {
        self.rgb[bin.index()]
    }

    /// The nine ascending bin boundaries `0, a, 2a, 3a, 0.5, 1-3a, 1-2a, 1-a, 1`.
    pub fn boundaries(&self) -> [f64; 9] {
        self.boundaries
    }

    /// Lower (inclusive) and upper bound of a bin plus whether the upper
    /// bound is inclusive (only the Pink bin is closed on top).
    pub fn bin_range(&self, bin: ColorBin) -> (f64, f64, bool) {
        let b = self.boundaries();
        let i = bin.index();
        (b[i], b[i + 1], bin == ColorBin::Pink)
    }

    /// Classify a coverage probability into exactly one bin.
    pub fn classify(&self, coverage: f64) -> ColorBin {
        debug_assert!((0.0..=1.0).contains(&coverage));
        let b = &self.boundaries;
        if coverage >= b[7] {
            ColorBin::Pink
        } else if coverage >= b[6] {
            ColorBin::Purple
        } else if coverage >= b[5] {
            ColorBin::Blue
        } else if coverage >= b[4] {
            ColorBin::Turquoise
        } else if coverage >= b[3] {
            ColorBin::Green
        } else if coverage >= b[2] {
            ColorBin::LightGreen
        } else if coverage >= b[1] {
            ColorBin::Orange
        } else {
            ColorBin::Red
        }
    }

    /// Classify an exact rational `hits / n_sim` with integer arithmetic,
    /// falling back to the float path when `alpha` has no exact ppm form.
    pub fn classify_counts(&self, hits: u64, n_sim: u64) -> ColorBin {
        debug_assert!(hits <= n_sim && n_sim > 0);
        let Some(a) = self.alpha_ppm else {
            return self.classify(hits as f64 / n_sim as f64);
        };
        const ONE: u64 = 1_000_000;
        let at_least = |bound_ppm: u64| {
            u128::from(hits) * u128::from(ONE) >= u128::from(bound_ppm) * u128::from(n_sim)
        };
        if at_least(ONE - a) {
            ColorBin::Pink
        } else if at_least(ONE - 2 * a) {
            ColorBin::Purple
        } else if at_least(ONE - 3 * a) {
            ColorBin::Blue
        } else if at_least(ONE / 2) {
            ColorBin::Turquoise
        } else if at_least(3 * a) {
            ColorBin::Green
        } else if at_least(2 * a) {
            ColorBin::LightGreen
        } else if at_least(a) {
            ColorBin::Orange
        } else {
            ColorBin::Red
        }
    }

    /// Classify a coverage result, routing Monte Carlo values through the
    /// exact rational comparison.
    pub fn classify_result(&self, result: &CoverageResult) -> ColorBin {
        match result.provenance {
            Provenance::MonteCarlo { hits, n_sim, .. } => self.classify_counts(hits, n_sim),
            Provenance::Exact => self.classify(result.coverage),
        }
    }
}
