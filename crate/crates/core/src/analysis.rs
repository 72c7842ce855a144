//! Statistical comparison utilities: the paired t-test used to adjudicate
//! near-tied estimators, and the satisfactory-pixel-percentage summary table.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::estimators::Method;
use crate::grid::PixelGrid;
use crate::special;
use crate::{Error, Result};

/// Matching-length measurement pairs, one pair per simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    first: Vec<f64>,
    second: Vec<f64>,
}

impl PairedSample {
    pub fn new(first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::LengthMismatch(first.len(), second.len()));
        }
        if first.len() < 2 {
            return Err(Error::TooFewPairs(first.len()));
        }
        Ok(Self { first, second })
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    pub fn differences(&self) -> Vec<f64> {
        self.first
            .iter()
            .zip(&self.second)
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// Result of a paired t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: u64,
    pub p_value: f64,
}

/// Two-sided paired t-test on the per-pair differences, with the sample
/// standard deviation (`m - 1` denominator) and the t CDF evaluated through
/// the regularized incomplete beta function.
///
/// All-zero differences give `t = 0, p = 1`; identical nonzero differences
/// have no sampling variance to test against and are rejected.
pub fn paired_t_test(sample: &PairedSample) -> Result<TTestResult> {
    let d = sample.differences();
    let m = d.len() as f64;
    let mean = d.iter().sum::<f64>() / m;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    let df = d.len() as u64 - 1;
    if var == 0.0 {
        if mean == 0.0 {
            return Ok(TTestResult {
                t: 0.0,
                df,
                p_value: 1.0,
            });
        }
        return Err(Error::DegeneratePairing);
    }
    let t = mean / (var / m).sqrt();
    let p_value = special::student_t_two_sided_p(t, df as f64);
    Ok(TTestResult { t, df, p_value })
}

/// One row of the SPP table: an estimator at a level, with one SPP value per
/// grid range, plus per-column maximum and near-tie flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SppRow {
    pub level: f64,
    pub method: Method,
    pub values: Vec<f64>,
    pub is_max: Vec<bool>,
    pub near_tie: Vec<bool>,
}

/// Satisfactory pixel percentages keyed by (level, method), one column per
/// grid range (`n_max`). Exactly one maximum is flagged per (level, column);
/// competitors within 0.005 of it are marked as near-ties.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SppTable {
    pub columns: Vec<u32>,
    pub rows: Vec<SppRow>,
}

/// Threshold below the per-level maximum at which an SPP value is annotated
/// as a near-tie.
pub const NEAR_TIE_THRESHOLD: f64 = 0.005;

/// Build the SPP table from one grid per (level, method, n_max) cell.
///
/// Every (level, method) pair must have a value for every column; otherwise
/// the missing cells are listed in the error.
pub fn build_spp_table(grids: &[PixelGrid]) -> Result<SppTable> {
    if grids.is_empty() {
        return Err(Error::MissingCells("no grids supplied".to_string()));
    }

    let columns: Vec<u32> = grids
        .iter()
        .map(|g| g.n_max())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    // (level_bits, method order) -> row identity, keeping deterministic order.
    let mut keys: Vec<(f64, Method)> = Vec::new();
    for g in grids {
        let key = (g.estimator().level().level(), g.estimator().method());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("levels are finite")
            .then(a.1.order_key().cmp(&b.1.order_key()))
    });

    let mut rows: Vec<SppRow> = Vec::with_capacity(keys.len());
    let mut missing: Vec<String> = Vec::new();
    for (level, method) in &keys {
        let mut values = Vec::with_capacity(columns.len());
        for &n_max in &columns {
            let grid = grids.iter().find(|g| {
                g.estimator().level().level() == *level
                    && g.estimator().method() == *method
                    && g.n_max() == n_max
            });
            match grid {
                Some(g) => values.push(g.satisfactory_pixel_percentage()),
                None => {
                    missing.push(format!("({}%, {}, n<={})", level * 100.0, method.label(), n_max));
                    values.push(f64::NAN);
                }
            }
        }
        rows.push(SppRow {
            level: *level,
            method: *method,
            values,
            is_max: vec![false; columns.len()],
            near_tie: vec![false; columns.len()],
        });
    }
    if !missing.is_empty() {
        return Err(Error::MissingCells(missing.join(", ")));
    }

    // Flag the unique per-(level, column) maximum and its near-ties.
    let levels: BTreeSet<u64> = rows.iter().map(|r| r.level.to_bits()).collect();
    for level_bits in levels {
        for col in 0..columns.len() {
            let best = rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r.level.to_bits() == level_bits)
                .reduce(|acc, item| {
                    if item.1.values[col] > acc.1.values[col] {
                        item
                    } else {
                        acc
                    }
                })
                .map(|(i, _)| i)
                .expect("level has rows");
            let best_value = rows[best].values[col];
            rows[best].is_max[col] = true;
            for (i, row) in rows.iter_mut().enumerate() {
                if i != best
                    && row.level.to_bits() == level_bits
                    && best_value - row.values[col] <= NEAR_TIE_THRESHOLD
                {
                    row.near_tie[col] = true;
                }
            }
        }
    }

    Ok(SppTable { columns, rows })
}

impl SppTable {
    /// CSV export: `level,method,epsilon,n_max,spp,is_max,near_tie`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("level,method,epsilon,n_max,spp,is_max,near_tie\n");
        for row in &self.rows {
            for (col, &n_max) in self.columns.iter().enumerate() {
                let epsilon = row
                    .method
                    .epsilon()
                    .map(|e| e.to_string())
                    .unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:.6},{},{}",
                    row.level,
                    row.method.token(),
                    epsilon,
                    n_max,
                    row.values[col],
                    row.is_max[col],
                    row.near_tie[col],
                );
            }
        }
        out
    }

    /// Aligned plain-text table. The per-(level, column) maximum is starred
    /// and near-ties are marked with `~`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<24} {:>8} {}",
            "Method",
            "Level",
            self.columns
                .iter()
                .map(|c| format!("{:>12}", format!("n<={c}")))
                .collect::<Vec<_>>()
                .join(" ")
        );
        for row in &self.rows {
            let cells = (0..self.columns.len())
                .map(|col| {
                    let marker = if row.is_max[col] {
                        "*"
                    } else if row.near_tie[col] {
                        "~"
                    } else {
                        " "
                    };
                    format!("{:>11}{marker}", format!("{:.4}", row.values[col]))
                })
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(
                out,
                "{:<24} {:>7}% {}",
                row.method.label(),
                row.level * 100.0,
                cells
            );
        }
        out.push_str("(* per-level maximum, ~ within 0.005 of it)\n");
        out
    }

    pub fn value(&self, level: f64, method: Method, n_max: u32) -> Option<f64> {
        let col = self.columns.iter().position(|&c| c == n_max)?;
        self.rows
            .iter()
            .find(|r| r.level == level && r.method == method)
            .map(|r| r.values[col])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::{CoverageResult, PixelKey, Provenance};
    use crate::estimators::{ConfidenceLevel, EstimatorSpec};

    fn pairs(a: &[f64], b: &[f64]) -> PairedSample {
        PairedSample::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn all_zero_differences() {
        let r = paired_t_test(&pairs(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.df, 3);
    }

    #[test]
    fn hand_computed_example() {
        // d = (1, 2, 3): t = 2 / (1 / sqrt(3)), df = 2, p = 1 - sqrt(6/7).
        let r = paired_t_test(&pairs(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0])).unwrap();
        assert!((r.t - 3.4641).abs() < 1e-3);
        assert_eq!(r.df, 2);
        assert!((r.p_value - 0.0742).abs() < 1e-3);
    }

    #[test]
    fn degenerate_pairing_is_rejected() {
        let err = paired_t_test(&pairs(&[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0]));
        assert_eq!(err, Err(Error::DegeneratePairing));
    }

    #[test]
    fn input_validation() {
        assert!(PairedSample::new(vec![1.0], vec![1.0]).is_err());
        assert!(PairedSample::new(vec![1.0, 2.0], vec![1.0]).is_err());
    }

    #[test]
    fn antisymmetry_and_shared_p() {
        let a = [0.1, 0.5, 0.4, 0.8, 0.2];
        let b = [0.3, 0.1, 0.4, 0.6, 0.4];
        let ab = paired_t_test(&pairs(&a, &b)).unwrap();
        let ba = paired_t_test(&pairs(&b, &a)).unwrap();
        assert_eq!(ab.t, -ba.t);
        assert!((ab.p_value - ba.p_value).abs() < 1e-12);
    }

    #[test]
    fn p_value_decreases_with_t() {
        let mut last = 1.0;
        for t in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let p = special::student_t_two_sided_p(t, 9.0);
            assert!(p < last, "p not monotone at t={t}");
            last = p;
        }
    }

    fn grid(level: f64, method: Method, n_max: u32, spp_cells: &[f64]) -> PixelGrid {
        let lv = ConfidenceLevel::new(level).unwrap();
        let est = EstimatorSpec::new(method, lv).unwrap();
        let cols = spp_cells.len().min(80);
        assert_eq!(spp_cells.len() % cols, 0, "test layout must be rectangular");
        let rows = spp_cells.len() / cols;
        let n_values: Vec<u32> = (n_max + 1 - rows as u32..=n_max).collect();
        let p_indices: Vec<u8> = (1..=cols as u8).collect();
        let cells: Vec<CoverageResult> = spp_cells
            .iter()
            .enumerate()
            .map(|(i, &coverage)| CoverageResult {
                pixel: PixelKey::new(n_values[i / cols], (i % cols + 1) as u8).unwrap(),
                estimator: est,
                coverage,
                provenance: Provenance::Exact,
            })
            .collect();
        PixelGrid::from_cells(est, n_values, p_indices, cells).unwrap()
    }

    #[test]
    fn single_grid_table() {
        let g = grid(0.95, Method::Wilson, 10, &[1.0, 0.0]);
        let t = build_spp_table(&[g.clone()]).unwrap();
        assert_eq!(t.columns, vec![10]);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].values, vec![0.5]);
        assert!(t.rows[0].is_max[0]);
        assert_eq!(t.value(0.95, Method::Wilson, 10), Some(0.5));
        assert_eq!(g.satisfactory_pixel_percentage(), 0.5);
    }

    #[test]
    fn max_flag_and_near_tie() {
        // 79/80 vs 80/80 satisfactory pixels: SPPs 0.9875 and 1.0 are not a
        // near-tie, while 799/800 vs 800/800 (0.99875 vs 1.0) is one.
        let spp_cells = |ones: usize, total: usize| -> Vec<f64> {
            (0..total).map(|i| if i < ones { 1.0 } else { 0.0 }).collect()
        };
        let grids = vec![
            grid(0.99, Method::AdjustedWilson { epsilon: 5 }, 99, &spp_cells(798, 800)),
            grid(0.99, Method::AdjustedWilson { epsilon: 6 }, 99, &spp_cells(800, 800)),
            grid(0.99, Method::Wald, 99, &spp_cells(100, 800)),
        ];
        let t = build_spp_table(&grids).unwrap();
        let aw6 = t
            .rows
            .iter()
            .find(|r| r.method == (Method::AdjustedWilson { epsilon: 6 }))
            .unwrap();
        assert!(aw6.is_max[0]);
        let aw5 = t
            .rows
            .iter()
            .find(|r| r.method == (Method::AdjustedWilson { epsilon: 5 }))
            .unwrap();
        assert!(!aw5.is_max[0]);
        assert!(aw5.near_tie[0], "0.9975 vs 1.0 is within 0.005");
        let wald = t.rows.iter().find(|r| r.method == Method::Wald).unwrap();
        assert!(!wald.near_tie[0]);
        // Exactly one maximum per (level, column).
        assert_eq!(t.rows.iter().filter(|r| r.is_max[0]).count(), 1);
    }

    #[test]
    fn missing_cells_are_listed() {
        let grids = vec![
            grid(0.95, Method::Wald, 100, &[1.0, 0.0]),
            grid(0.95, Method::Wald, 1000, &[1.0, 0.0]),
            grid(0.95, Method::Wilson, 100, &[1.0, 0.0]),
        ];
        match build_spp_table(&grids) {
            Err(Error::MissingCells(s)) => {
                assert!(s.contains("Wilson"), "got: {s}");
                assert!(s.contains("1000"), "got: {s}");
            }
            other => panic!("expected missing cells, got {other:?}"),
        }
    }

    #[test]
    fn csv_and_text_exports() {
        let grids = vec![
            grid(0.95, Method::Wald, 100, &[1.0, 0.0]),
            grid(0.95, Method::AdjustedWilson { epsilon: 4 }, 100, &[1.0, 1.0]),
        ];
        let t = build_spp_table(&grids).unwrap();
        let csv = t.to_csv_string();
        assert!(csv.starts_with("level,method,epsilon,n_max,spp,is_max,near_tie\n"));
        assert!(csv.contains("0.95,wald,,100,0.500000,false,false"));
        assert!(csv.contains("0.95,adjusted_wilson,4,100,1.000000,true,false"));
        let text = t.to_text();
        assert!(text.contains("Adjusted Wilson 4"));
        assert!(text.contains('*'));
    }
}
