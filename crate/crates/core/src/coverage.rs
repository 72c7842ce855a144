//! Coverage probability of an interval estimator at a single `(n, p)` pixel.
//!
//! Two evaluation modes: an exact binomial sum over all `n + 1` outcomes, and
//! the seeded Monte Carlo protocol (draw a sample, evaluate every estimator on
//! it, count how often the population proportion lands inside). The Monte
//! Carlo default draws without replacement from a finite population of 10,000
//! items; a plain binomial mode exists because that is the model under which
//! the exact sum is defined.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::estimators::{EstimatorSpec, Interval, SampleSummary};
use crate::palette::ppm_of;
use crate::{Error, Result};

/// One grid pixel: a sample size and a population proportion `p_index / 100`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PixelKey {
    n: u32,
    p_index: u8,
}

impl PixelKey {
    pub fn new(n: u32, p_index: u8) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroTrials);
        }
        if !(1..=99).contains(&p_index) {
            return Err(Error::InvalidPIndex(p_index));
        }
        Ok(Self { n, p_index })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p_index(&self) -> u8 {
        self.p_index
    }

    /// The population proportion as a real number.
    pub fn p(&self) -> f64 {
        f64::from(self.p_index) / 100.0
    }
}

/// How Monte Carlo samples are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum SamplingScheme {
    /// Draw `n` items without replacement from a population of
    /// `population_size` items containing `round(p * population_size)`
    /// successes.
    FinitePopulation { population_size: u64 },
    /// Draw the success count directly from `Binomial(n, p)`.
    Binomial,
}

impl Default for SamplingScheme {
    fn default() -> Self {
        SamplingScheme::FinitePopulation {
            population_size: 10_000,
        }
    }
}

/// Where a coverage number came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    MonteCarlo { hits: u64, n_sim: u64, seed: u64 },
}

impl Provenance {
    pub fn mode_token(&self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::MonteCarlo { .. } => "mc",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Provenance::Exact => None,
            Provenance::MonteCarlo { seed, .. } => Some(*seed),
        }
    }
}

/// Coverage probability of one estimator at one pixel, with provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub pixel: PixelKey,
    pub estimator: EstimatorSpec,
    pub coverage: f64,
    pub provenance: Provenance,
}

impl CoverageResult {
    /// Whether the pixel is satisfactory: coverage at least the nominal level.
    ///
    /// Monte Carlo results compare the exact rational `hits / n_sim` against
    /// the level so that e.g. 950/1000 at the 95% level counts as
    /// satisfactory instead of falling to floating-point boundary luck.
    pub fn is_satisfactory(&self) -> bool {
        let level = self.estimator.level().level();
        match self.provenance {
            Provenance::MonteCarlo { hits, n_sim, .. } => match ppm_of(level) {
                Some(level_ppm) => {
                    u128::from(hits) * 1_000_000 >= u128::from(level_ppm) * u128::from(n_sim)
                }
                None => self.coverage >= level,
            },
            Provenance::Exact => self.coverage >= level,
        }
    }
}

/// Binomial pmf over `x = 0..=n`, by multiplicative recurrence outward from
/// the mode, normalized to sum to one. Stable for the whole `n <= 1000` range
/// (and far beyond); never touches factorials.
pub fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    debug_assert!(p > 0.0 && p < 1.0);
    let len = n as usize + 1;
    let mut pmf = vec![0.0f64; len];
    let mode = (((f64::from(n)) + 1.0) * p).floor() as usize;
    let mode = mode.min(n as usize);
    pmf[mode] = 1.0;
    let odds = p / (1.0 - p);
    for x in (1..=mode).rev() {
        pmf[x - 1] = pmf[x] * (x as f64) / ((n as usize - x + 1) as f64) / odds;
    }
    for x in mode..n as usize {
        pmf[x + 1] = pmf[x] * ((n as usize - x) as f64) / ((x + 1) as f64) * odds;
    }
    let total: f64 = pmf.iter().sum();
    for v in &mut pmf {
        *v /= total;
    }
    pmf
}

/// Intervals for every possible outcome `x = 0..=n` of one estimator.
pub(crate) fn estimator_intervals(estimator: EstimatorSpec, n: u32) -> Vec<Interval> {
    (0..=u64::from(n))
        .map(|x| estimator.interval(SampleSummary::new(x, u64::from(n)).expect("x <= n")))
        .collect()
}

pub(crate) fn exact_coverage_from_parts(
    pixel: PixelKey,
    estimator: EstimatorSpec,
    intervals: &[Interval],
    pmf: &[f64],
) -> CoverageResult {
    let p = pixel.p();
    let mut coverage = 0.0;
    for (interval, mass) in intervals.iter().zip(pmf) {
        if interval.contains(p) {
            coverage += mass;
        }
    }
    // The normalized pmf can sum a hair past one; coverage is a probability.
    CoverageResult {
        pixel,
        estimator,
        coverage: coverage.min(1.0),
        provenance: Provenance::Exact,
    }
}

/// Exact coverage probability: the binomial-sum oracle
/// `sum_x C(n,x) p^x (1-p)^(n-x) * [p in interval(x, n)]`.
pub fn exact_coverage(pixel: PixelKey, estimator: EstimatorSpec) -> CoverageResult {
    let intervals = estimator_intervals(estimator, pixel.n());
    let pmf = binomial_pmf(pixel.n(), pixel.p());
    exact_coverage_from_parts(pixel, estimator, &intervals, &pmf)
}

/// Monte Carlo coverage with a paired design: each replicate draws one sample
/// and evaluates every estimator on it, so estimator differences are
/// within-sample. Fully deterministic given the seed, independent of how many
/// estimators share the stream.
pub fn monte_carlo_coverage(
    pixel: PixelKey,
    estimators: &[EstimatorSpec],
    scheme: SamplingScheme,
    n_sim: u64,
    seed: u64,
) -> Result<Vec<CoverageResult>> {
    if n_sim == 0 {
        return Err(Error::ZeroReplicates);
    }
    let n = pixel.n();
    let intervals: Vec<Vec<Interval>> = estimators
        .iter()
        .map(|e| estimator_intervals(*e, n))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = vec![0u64; estimators.len()];

    match scheme {
        SamplingScheme::FinitePopulation { population_size } => {
            if u64::from(n) > population_size {
                return Err(Error::SampleExceedsPopulation {
                    n: u64::from(n),
                    population: population_size,
                });
            }
            let pop_successes = (pixel.p() * population_size as f64).round() as u64;
            // Membership is tested against the realized population proportion,
            // which equals p exactly on the 1/100 grid.
            let target = pop_successes as f64 / population_size as f64;
            let mut population = vec![0u8; population_size as usize];
            for slot in &mut population[..pop_successes as usize] {
                *slot = 1;
            }
            for _ in 0..n_sim {
                let x = draw_without_replacement(&mut population, n as usize, &mut rng);
                tally(&intervals, x, target, &mut hits);
            }
        }
        SamplingScheme::Binomial => {
            let target = pixel.p();
            let binomial =
                rand_distr::Binomial::new(u64::from(n), pixel.p()).expect("p lies in (0, 1)");
            for _ in 0..n_sim {
                let x = binomial.sample(&mut rng);
                tally(&intervals, x, target, &mut hits);
            }
        }
    }

    Ok(estimators
        .iter()
        .zip(hits)
        .map(|(estimator, h)| CoverageResult {
            pixel,
            estimator: *estimator,
            coverage: h as f64 / n_sim as f64,
            provenance: Provenance::MonteCarlo {
                hits: h,
                n_sim,
                seed,
            },
        })
        .collect())
}

/// Partial Fisher-Yates draw: after `n` swaps the prefix holds a uniform
/// sample without replacement, whatever arrangement the previous replicate
/// left behind, so the buffer is reused as-is across replicates.
fn draw_without_replacement(population: &mut [u8], n: usize, rng: &mut ChaCha8Rng) -> u64 {
    let len = population.len();
    let mut successes = 0u64;
    for i in 0..n {
        let j = rng.random_range(i..len);
        population.swap(i, j);
        successes += u64::from(population[i]);
    }
    successes
}

fn tally(intervals: &[Vec<Interval>], x: u64, target: f64, hits: &mut [u64]) {
    for (per_outcome, h) in intervals.iter().zip(hits) {
        if per_outcome[x as usize].contains(target) {
            *h += 1;
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-pixel stream seed derived from a master seed, so grid results do not
/// depend on which thread visits which pixel.
pub fn derive_pixel_seed(master: u64, n: u32, p_index: u8) -> u64 {
    let s = splitmix64(master);
    let s = splitmix64(s ^ u64::from(n));
    splitmix64(s ^ u64::from(p_index))
}

/// Per-run seed for repeated simulation runs, kept in a stream separate from
/// the pixel seeds.
pub fn derive_run_seed(master: u64, run: u64) -> u64 {
    let s = splitmix64(master ^ 0x243F_6A88_85A3_08D3);
    splitmix64(s ^ run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::ConfidenceLevel;

    fn level(l: f64) -> ConfidenceLevel {
        ConfidenceLevel::new(l).unwrap()
    }

    fn pixel(n: u32, p_index: u8) -> PixelKey {
        PixelKey::new(n, p_index).unwrap()
    }

    /// Exact pmf through u128 binomial coefficients; usable up to n ~ 60.
    fn pmf_oracle(n: u32, x: u32, p: f64) -> f64 {
        let mut c: u128 = 1;
        for k in 0..x {
            c = c * u128::from(n - k) / u128::from(k + 1);
        }
        c as f64 * p.powi(x as i32) * (1.0 - p).powi((n - x) as i32)
    }

    #[test]
    fn pixel_key_validation() {
        assert!(PixelKey::new(0, 50).is_err());
        assert!(PixelKey::new(5, 0).is_err());
        assert!(PixelKey::new(5, 100).is_err());
        assert_eq!(pixel(5, 25).p(), 0.25);
    }

    #[test]
    fn pmf_matches_exact_coefficients() {
        for &(n, p) in &[(1u32, 0.5f64), (10, 0.5), (17, 0.03), (40, 0.97), (23, 0.42)] {
            let pmf = binomial_pmf(n, p);
            for x in 0..=n {
                let expect = pmf_oracle(n, x, p);
                assert!(
                    (pmf[x as usize] - expect).abs() < 1e-12,
                    "pmf({n},{x},{p}) = {} expected {expect}",
                    pmf[x as usize]
                );
            }
        }
    }

    #[test]
    fn pmf_sums_to_one_for_large_n() {
        for &(n, p) in &[(1000u32, 0.01f64), (1000, 0.5), (1000, 0.99), (777, 0.13)] {
            let total: f64 = binomial_pmf(n, p).iter().sum();
            assert!((total - 1.0).abs() < 1e-10, "sum at ({n},{p}) = {total}");
        }
    }

    #[test]
    fn exact_coverage_spec_pixels() {
        // n = 1, p = 0.5: Wald yields point intervals {0} and {1}.
        let wald = EstimatorSpec::wald(level(0.95));
        assert_eq!(exact_coverage(pixel(1, 50), wald).coverage, 0.0);

        // n = 1, p = 0.5: both Wilson intervals straddle 1/2.
        let wilson = EstimatorSpec::wilson(level(0.95));
        assert_eq!(exact_coverage(pixel(1, 50), wilson).coverage, 1.0);

        // n = 10, p = 0.5: Wald covers for x in {3..7}, Wilson for x in {2..8};
        // the exact sums are 912/1024 and 1002/1024 (dyadic enumeration).
        let c = exact_coverage(pixel(10, 50), wald).coverage;
        assert!((c - 0.890625).abs() < 1e-9, "wald coverage {c}");
        let c = exact_coverage(pixel(10, 50), wilson).coverage;
        assert!((c - 0.978515625).abs() < 1e-9, "wilson coverage {c}");
    }

    #[test]
    fn exact_coverage_enumeration_cross_check() {
        // Independent route: oracle pmf plus direct membership filtering.
        for &(n, p_index, l) in &[(10u32, 50u8, 0.95), (25, 7, 0.90), (40, 93, 0.99)] {
            let est = EstimatorSpec::adjusted_wilson(4, level(l)).unwrap();
            let p = f64::from(p_index) / 100.0;
            let expect: f64 = (0..=n)
                .filter(|&x| {
                    est.interval(SampleSummary::new(u64::from(x), u64::from(n)).unwrap())
                        .contains(p)
                })
                .map(|x| pmf_oracle(n, x, p))
                .sum();
            let got = exact_coverage(pixel(n, p_index), est).coverage;
            assert!((got - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_coverage_is_deterministic() {
        let est = EstimatorSpec::wilson(level(0.99));
        let a = exact_coverage(pixel(137, 42), est);
        let b = exact_coverage(pixel(137, 42), est);
        assert_eq!(a.coverage.to_bits(), b.coverage.to_bits());
    }

    #[test]
    fn exact_coverage_mirror_symmetry() {
        for l in [0.90, 0.95, 0.99] {
            for est in [
                EstimatorSpec::wald(level(l)),
                EstimatorSpec::wilson(level(l)),
                EstimatorSpec::adjusted_wilson(3, level(l)).unwrap(),
            ] {
                for (n, k) in [(7u32, 10u8), (33, 25), (64, 1)] {
                    let a = exact_coverage(pixel(n, k), est).coverage;
                    let b = exact_coverage(pixel(n, 100 - k), est).coverage;
                    assert!((a - b).abs() < 1e-12, "asymmetry at n={n} k={k} l={l}");
                }
            }
        }
    }

    #[test]
    fn monte_carlo_point_intervals_never_cover() {
        let wald = EstimatorSpec::wald(level(0.95));
        for scheme in [SamplingScheme::default(), SamplingScheme::Binomial] {
            let r = monte_carlo_coverage(pixel(1, 50), &[wald], scheme, 1000, 7).unwrap();
            assert_eq!(r[0].coverage, 0.0);
        }
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let ests = [
            EstimatorSpec::wald(level(0.95)),
            EstimatorSpec::wilson(level(0.95)),
        ];
        for scheme in [SamplingScheme::default(), SamplingScheme::Binomial] {
            let a = monte_carlo_coverage(pixel(30, 40), &ests, scheme, 2000, 99).unwrap();
            let b = monte_carlo_coverage(pixel(30, 40), &ests, scheme, 2000, 99).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn paired_design_reuses_one_sample_stream() {
        // The Wald result must be bit-identical whether or not other
        // estimators ride along on the same replicates.
        let wald = EstimatorSpec::wald(level(0.95));
        let wilson = EstimatorSpec::wilson(level(0.95));
        let aw = EstimatorSpec::adjusted_wilson(4, level(0.95)).unwrap();
        for scheme in [SamplingScheme::default(), SamplingScheme::Binomial] {
            let alone = monte_carlo_coverage(pixel(25, 33), &[wald], scheme, 3000, 4242).unwrap();
            let together =
                monte_carlo_coverage(pixel(25, 33), &[wald, wilson, aw], scheme, 3000, 4242)
                    .unwrap();
            assert_eq!(alone[0], together[0]);
        }
    }

    #[test]
    fn monte_carlo_converges_to_exact() {
        let wald = EstimatorSpec::wald(level(0.95));
        let exact = exact_coverage(pixel(10, 50), wald).coverage;
        let mc = monte_carlo_coverage(pixel(10, 50), &[wald], SamplingScheme::Binomial, 100_000, 31)
            .unwrap()[0]
            .coverage;
        let tol = 3.0 * (exact * (1.0 - exact) / 1e5).sqrt() + 1e-5;
        assert!((mc - exact).abs() <= tol, "mc {mc} exact {exact} tol {tol}");
    }

    #[test]
    fn finite_population_tracks_binomial() {
        // At a 1% sampling fraction the hypergeometric and binomial draws
        // should agree closely.
        let ests = [
            EstimatorSpec::wilson(level(0.95)),
            EstimatorSpec::adjusted_wilson(4, level(0.95)).unwrap(),
        ];
        for (n, k) in [(50u32, 20u8), (100, 85)] {
            let fp = monte_carlo_coverage(
                pixel(n, k),
                &ests,
                SamplingScheme::default(),
                100_000,
                11,
            )
            .unwrap();
            let bin =
                monte_carlo_coverage(pixel(n, k), &ests, SamplingScheme::Binomial, 100_000, 12)
                    .unwrap();
            for (a, b) in fp.iter().zip(&bin) {
                assert!(
                    (a.coverage - b.coverage).abs() <= 0.01,
                    "schemes diverge at n={n} k={k}: {} vs {}",
                    a.coverage,
                    b.coverage
                );
            }
        }
    }

    #[test]
    fn rejects_sample_larger_than_population() {
        let est = EstimatorSpec::wald(level(0.95));
        let err = monte_carlo_coverage(
            pixel(200, 50),
            &[est],
            SamplingScheme::FinitePopulation {
                population_size: 100,
            },
            10,
            1,
        );
        assert!(matches!(
            err,
            Err(Error::SampleExceedsPopulation { n: 200, .. })
        ));
    }

    #[test]
    fn rejects_zero_replicates() {
        let est = EstimatorSpec::wald(level(0.95));
        assert!(matches!(
            monte_carlo_coverage(pixel(5, 50), &[est], SamplingScheme::Binomial, 0, 1),
            Err(Error::ZeroReplicates)
        ));
    }

    #[test]
    fn satisfactory_uses_exact_rational_for_monte_carlo() {
        let est = EstimatorSpec::wilson(level(0.95));
        let make = |hits: u64| CoverageResult {
            pixel: pixel(10, 50),
            estimator: est,
            coverage: hits as f64 / 1000.0,
            provenance: Provenance::MonteCarlo {
                hits,
                n_sim: 1000,
                seed: 0,
            },
        };
        assert!(make(950).is_satisfactory());
        assert!(!make(949).is_satisfactory());
        assert!(make(1000).is_satisfactory());
    }

    #[test]
    fn seed_derivation_separates_streams() {
        let a = derive_pixel_seed(1, 10, 50);
        assert_eq!(a, derive_pixel_seed(1, 10, 50));
        assert_ne!(a, derive_pixel_seed(1, 10, 51));
        assert_ne!(a, derive_pixel_seed(1, 11, 50));
        assert_ne!(a, derive_pixel_seed(2, 10, 50));
        assert_ne!(derive_run_seed(1, 0), derive_run_seed(1, 1));
        assert_ne!(derive_run_seed(1, 0), derive_pixel_seed(1, 0, 1));
    }
}
