//! Seeded Monte Carlo simulation of detector counts.
//!
//! Counts are drawn from the exact multinomial distribution over the detector
//! labels plus the undetected remainder, with probabilities computed on the
//! depolarised preselected state. The multinomial is realised as a chain of
//! conditional binomials in label order.
//!
//! Reproducibility: each chunk `k` uses `ChaCha20Rng::seed_from_u64(seed)`
//! with `set_stream(k)`. A run split into `K` chunks gives the first
//! `shots % K` chunks one extra shot. Chunks are merged by summation, which is
//! associative and commutative, so parallel execution order cannot change the
//! result.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::contextuality::depolarized_state;
use crate::error::{Error, Result};
use crate::optics::{build_protocol, detection_probabilities, InjectionPoint, Input, Variant};

/// Recorded in every [`CountRecord`].
pub const PRNG_NAME: &str = "ChaCha20Rng (rand_chacha 0.9): seed_from_u64(seed), stream = chunk index";

/// Default decision threshold, in combined standard errors.
pub const DEFAULT_SIGMA: f64 = 5.0;

/// Label of the undetected remainder in count tables.
pub const UNDETECTED: &str = "undetected";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountRecord {
    pub variant: Variant,
    pub shots: u64,
    pub noise_p: f64,
    pub seed: u64,
    pub chunks: u32,
    pub prng: &'static str,
    pub counts: BTreeMap<String, u64>,
    pub undetected: u64,
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.counts.values().sum::<u64>() + self.undetected
    }
}

/// Exact outcome probabilities: detectors in label order, then the remainder.
pub fn outcome_probabilities(variant: Variant, noise_p: f64) -> Result<Vec<(String, f64)>> {
    let rho = depolarized_state(noise_p)?;
    let rep = detection_probabilities(
        &build_protocol(variant),
        &Input::Mixed(rho),
        InjectionPoint::Preselection,
    )?;
    let mut out: Vec<(String, f64)> = rep.probabilities.into_iter().collect();
    out.push((UNDETECTED.to_string(), rep.undetected));
    Ok(out)
}

fn multinomial(rng: &mut ChaCha20Rng, shots: u64, probs: &[(String, f64)]) -> Vec<u64> {
    let mut remaining = shots;
    let mut mass = 1.0_f64;
    let last = probs.len() - 1;
    let mut counts = Vec::with_capacity(probs.len());
    for (i, (_, p)) in probs.iter().enumerate() {
        let k = if i == last {
            remaining
        } else if remaining == 0 || *p <= 0.0 {
            0
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q)
                .expect("probability in [0, 1]")
                .sample(rng)
        };
        counts.push(k);
        remaining -= k;
        mass -= p;
    }
    counts
}

fn chunk_shots(shots: u64, chunks: u32, k: u32) -> u64 {
    let base = shots / chunks as u64;
    base + u64::from((k as u64) < shots % chunks as u64)
}

fn validate(shots: u64, noise_p: f64, chunks: u32) -> Result<()> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&noise_p) {
        return Err(Error::InvalidParameter(format!("noise p = {noise_p} outside [0, 1]")));
    }
    if chunks == 0 || chunks as u64 > shots {
        return Err(Error::InvalidParameter(format!(
            "chunks = {chunks} must lie in 1..={shots}"
        )));
    }
    Ok(())
}

/// Single-stream sampling; equivalent to one chunk.
pub fn sample_counts(variant: Variant, shots: u64, noise_p: f64, seed: u64) -> Result<CountRecord> {
    sample_counts_chunked(variant, shots, noise_p, seed, 1)
}

/// Sampling split into `chunks` independently seeded streams, run in parallel.
pub fn sample_counts_chunked(
    variant: Variant,
    shots: u64,
    noise_p: f64,
    seed: u64,
    chunks: u32,
) -> Result<CountRecord> {
    validate(shots, noise_p, chunks)?;
    let probs = outcome_probabilities(variant, noise_p)?;
    let totals = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            multinomial(&mut rng, chunk_shots(shots, chunks, k), &probs)
        })
        .reduce(
            || vec![0; probs.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
    let (undetected, detected) = totals.split_last().expect("remainder entry");
    let counts = probs
        .iter()
        .zip(detected)
        .map(|((label, _), n)| (label.clone(), *n))
        .collect();
    Ok(CountRecord {
        variant,
        shots,
        noise_p,
        seed,
        chunks,
        prng: PRNG_NAME,
        counts,
        undetected: *undetected,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub probability: f64,
    pub standard_error: f64,
}

impl Estimate {
    pub fn from_counts(count: u64, shots: u64) -> Self {
        let p = count as f64 / shots as f64;
        Self {
            probability: p,
            standard_error: (p * (1.0 - p) / shots as f64).sqrt(),
        }
    }
}

/// Frequency and binomial standard error per detector.
pub fn estimate(record: &CountRecord) -> BTreeMap<String, Estimate> {
    record
        .counts
        .iter()
        .map(|(label, n)| (label.clone(), Estimate::from_counts(*n, record.shots)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Violated,
    NotViolated,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityTest {
    pub verdict: Verdict,
    /// Empirical `[P(V+) + P(D2) + P(Φ+)] − P(D+)`.
    pub margin: f64,
    /// Standard errors of the four terms added in quadrature.
    pub combined_error: f64,
    pub sigma: f64,
    pub noise_p: f64,
}

/// Decides the noncontextuality inequality from one record per variant.
///
/// `P(Φ+)` is inferred from variant `c` with the model's factor, which also
/// scales its standard error.
pub fn inequality_test(records: &[CountRecord], sigma: f64) -> Result<InequalityTest> {
    let find = |v: Variant| {
        records
            .iter()
            .find(|r| r.variant == v)
            .ok_or_else(|| Error::InvalidParameter(format!("missing record for variant {v}")))
    };
    let base = find(Variant::Baseline)?;
    let noise_p = base.noise_p;
    if records.iter().any(|r| r.noise_p != noise_p) {
        return Err(Error::InvalidParameter("records disagree on noise_p".into()));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must be positive")));
    }
    let term = |v: Variant, label: &str, factor: f64| -> Result<(f64, f64)> {
        let rec = find(v)?;
        let e = estimate(rec).get(label).copied().ok_or_else(|| {
            Error::InvalidParameter(format!("variant {v} record has no `{label}` count"))
        })?;
        Ok((factor * e.probability, factor * e.standard_error))
    };
    let factor_c = build_protocol(Variant::C)
        .inference()
        .map_or(1.0, |inf| inf.factor);
    let terms = [
        term(Variant::B, "V+", 1.0)?,
        term(Variant::A, "D2", 1.0)?,
        term(Variant::C, "D+", factor_c)?,
    ];
    let d_plus = term(Variant::Baseline, "D+", 1.0)?;
    let margin = terms.iter().map(|t| t.0).sum::<f64>() - d_plus.0;
    let combined_error = terms
        .iter()
        .chain(std::iter::once(&d_plus))
        .map(|t| t.1 * t.1)
        .sum::<f64>()
        .sqrt();
    let verdict = if margin < -sigma * combined_error {
        Verdict::Violated
    } else if margin > sigma * combined_error {
        Verdict::NotViolated
    } else {
        Verdict::Inconclusive
    };
    Ok(InequalityTest {
        verdict,
        margin,
        combined_error,
        sigma,
        noise_p,
    })
}
