//! Deterministic Monte Carlo: seeded sampling, empirical exceedance
//! probabilities with binomial confidence intervals, and stochastic
//! verification of the bounds exact arithmetic cannot reach.
//!
//! Per-replication sums are never computed in floating point. A replication
//! draws multinomial atom counts, and the sum `S_N = sum(value_i * count_i)`
//! is accumulated over a common integer scale, so the event
//! `|S_N/N - corrector| > eps` is decided exactly even for the counterexample
//! families whose atom values dwarf 2^53. Replications are independent,
//! indexed substreams; counts merge by addition, which is why serial and
//! parallel runs agree bit-for-bit.

pub mod partition;
mod rng;

pub use partition::{l1_under_q, measure_change_density, MeasureChange, PartitionModel};
pub use rng::{binomial_sample, multinomial_counts, CategoricalSampler, Seed, SubstreamRng};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::dist::{DiscreteDistribution, MixingFamily};
use crate::exch::cond_corrector;
use crate::feller::{corrector_delta, feller_profile};
use crate::dist::TailConvention;
use crate::rational::{to_f64_lossless, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum McError {
    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),
    #[error("atom value {0} is not exactly representable as f64")]
    LossyValue(String),
    #[error("block index ranges overlap")]
    OverlappingBlocks,
    #[error("block size and offset lists differ in length")]
    MismatchedLengths,
    #[error("invalid nesting: {0}")]
    InvalidNesting(String),
}

/// Two-sided normal quantile for the 99% interval.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// A Monte Carlo frequency with its raw count, binomial standard error, and
/// a normal-approximation 99% confidence interval clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub value: f64,
    pub stderr: f64,
    pub reps: u64,
    /// Raw hit count; for derived (aggregated) estimates this is the
    /// weighted count rounded to the nearest integer.
    pub hits: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl MCEstimate {
    pub fn from_counts(hits: u64, reps: u64) -> Self {
        assert!(reps > 0);
        let value = hits as f64 / reps as f64;
        let stderr = (value * (1.0 - value) / reps as f64).sqrt();
        MCEstimate {
            value,
            stderr,
            reps,
            hits,
            ci_low: (value - Z_99 * stderr).max(0.0),
            ci_high: (value + Z_99 * stderr).min(1.0),
        }
    }
}

/// Band event `S outside [lo, hi]` on a common integer scale.
///
/// `Small` keeps everything in `i128` when a worst-case bound proves no
/// overflow is possible; `Big` is the general exact path.
enum SumKernel {
    Small {
        numers: Vec<i128>,
        lo: i128,
        hi: i128,
    },
    Big {
        numers: Vec<BigInt>,
        lo: BigInt,
        hi: BigInt,
    },
}

struct BandEvent {
    masses: Vec<Rational>,
    n: u64,
    kernel: SumKernel,
    /// Nonstrict events use `<= lo || >= hi`; strict use `< lo || > hi`.
    nonstrict: bool,
}

impl BandEvent {
    /// Event `|S_N / N - center| > radius` (or `>=` when `nonstrict`).
    fn new(
        d: &DiscreteDistribution,
        n: u64,
        center: &Rational,
        radius: &Rational,
        nonstrict: bool,
    ) -> Self {
        let n_rat = Rational::from_integer(n.into());
        let hi_rat = &n_rat * (center + radius);
        let lo_rat = &n_rat * (center - radius);
        let mut scale: BigInt = BigInt::one();
        for (v, _) in d.atoms() {
            scale = scale.lcm(v.denom());
        }
        scale = scale.lcm(hi_rat.denom());
        scale = scale.lcm(lo_rat.denom());
        let scale_rat = Rational::from_integer(scale);
        let numers: Vec<BigInt> = d
            .atoms()
            .iter()
            .map(|(v, _)| (v * &scale_rat).to_integer())
            .collect();
        let lo = (&lo_rat * &scale_rat).to_integer();
        let hi = (&hi_rat * &scale_rat).to_integer();
        let masses: Vec<Rational> = d.atoms().iter().map(|(_, m)| m.clone()).collect();

        // Overflow-safe bound for the i128 fast path: |S| <= max|numer| * N.
        let worst: BigInt = numers
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
            * BigInt::from(n);
        let fits = |x: &BigInt| x.to_i128().is_some();
        let kernel = if fits(&worst) && fits(&lo) && fits(&hi) && worst < (BigInt::one() << 120) {
            SumKernel::Small {
                numers: numers.iter().map(|x| x.to_i128().unwrap()).collect(),
                lo: lo.to_i128().unwrap(),
                hi: hi.to_i128().unwrap(),
            }
        } else {
            SumKernel::Big { numers, lo, hi }
        };
        BandEvent {
            masses,
            n,
            kernel,
            nonstrict,
        }
    }

    fn occurs(&self, rng: &mut SubstreamRng) -> bool {
        let counts = multinomial_counts(self.n, &self.masses, rng);
        match &self.kernel {
            SumKernel::Small { numers, lo, hi } => {
                let mut s: i128 = 0;
                for (x, c) in numers.iter().zip(&counts) {
                    s += x * *c as i128;
                }
                if self.nonstrict {
                    s <= *lo || s >= *hi
                } else {
                    s < *lo || s > *hi
                }
            }
            SumKernel::Big { numers, lo, hi } => {
                let mut s = BigInt::zero();
                for (x, c) in numers.iter().zip(&counts) {
                    if *c != 0 {
                        s += x * BigInt::from(*c);
                    }
                }
                if self.nonstrict {
                    s <= *lo || s >= *hi
                } else {
                    s < *lo || s > *hi
                }
            }
        }
    }
}

/// Run `reps` independent replications of the event across `threads`
/// workers. Replication `r` always uses substream `(experiment, r)`, so the
/// hit count is independent of the thread count.
fn run_event(event: &BandEvent, reps: u64, seed: Seed, experiment: u64, threads: usize) -> u64 {
    let threads = threads.max(1).min(reps.max(1) as usize);
    if threads == 1 {
        let mut hits = 0u64;
        for r in 0..reps {
            let mut rng = seed.substream(experiment, r);
            if event.occurs(&mut rng) {
                hits += 1;
            }
        }
        return hits;
    }
    let chunk = reps.div_ceil(threads as u64);
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(threads);
        for t in 0..threads as u64 {
            let start = t * chunk;
            let end = ((t + 1) * chunk).min(reps);
            let ev = &event;
            handles.push(scope.spawn(move || {
                let mut hits = 0u64;
                for r in start..end {
                    let mut rng = seed.substream(experiment, r);
                    if ev.occurs(&mut rng) {
                        hits += 1;
                    }
                }
                hits
            }));
        }
        handles.into_iter().map(|h| h.join().expect("worker")).sum()
    })
}

/// Empirical `pi_N(eps) = P(|S_N/N - corrector| > eps)` for i.i.d. draws
/// from `d`, with binomial standard error.
pub fn estimate_pi(
    d: &DiscreteDistribution,
    n: u64,
    eps: &Rational,
    corrector: &Rational,
    reps: u64,
    seed: Seed,
    experiment: u64,
    threads: usize,
) -> MCEstimate {
    assert!(n >= 1, "N must be at least 1");
    assert!(reps >= 100, "need at least 100 replications");
    let event = BandEvent::new(d, n, corrector, eps, false);
    let hits = run_event(&event, reps, seed, experiment, threads);
    MCEstimate::from_counts(hits, reps)
}

/// Empirical check of the classical tail bound
/// `pi_N(eta) <= tau_N + sigma_N / eta^2` with the truncated-mean corrector.
#[derive(Debug, Clone, PartialEq)]
pub struct FellerBoundReport {
    pub n: u64,
    pub eta: Rational,
    pub empirical: MCEstimate,
    pub rhs: Rational,
    pub holds: bool,
}

pub fn verify_feller_bound(
    d: &DiscreteDistribution,
    n: u64,
    eta: &Rational,
    reps: u64,
    seed: Seed,
    threads: usize,
) -> FellerBoundReport {
    let one = Rational::one();
    let corrector = corrector_delta(d, n, &one);
    let empirical = estimate_pi(d, n, eta, &corrector, reps, seed, 0, threads);
    let profile = feller_profile(
        d,
        &Rational::from_integer(n.into()),
        &one,
        TailConvention::Strict,
    );
    let rhs = &profile.tau + &profile.sigma / (eta * eta);
    // Compare through the exact rational of the f64 lower bound.
    let holds = Rational::from_float(empirical.ci_low)
        .map(|lo| lo <= rhs)
        .unwrap_or(false);
    FellerBoundReport {
        n,
        eta: eta.clone(),
        empirical,
        rhs,
        holds,
    }
}

/// Empirical side of the symmetric martingale lower bound
/// `P(|S_N| >= N) >= c * sigma_N`: the estimate, the exact `sigma_N`, and
/// the implied constant ratio with its CI floor.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricLowerReport {
    pub n: u64,
    pub empirical: MCEstimate,
    pub sigma: Rational,
    pub ratio: f64,
    pub ratio_ci_low: f64,
    /// The ratio's CI excludes zero.
    pub positive: bool,
}

/// The event is the nonstrict `|S_N| >= N`, matching the stopped-martingale
/// argument behind the bound (a +-N law would otherwise have probability
/// exactly zero of clearing the barrier).
pub fn verify_symmetric_lower_bound(
    d: &DiscreteDistribution,
    n: u64,
    reps: u64,
    seed: Seed,
    threads: usize,
) -> Result<SymmetricLowerReport, McError> {
    if !d.is_symmetric() {
        return Err(McError::UnsupportedDistribution(
            "law must be symmetric".into(),
        ));
    }
    let n_rat = Rational::from_integer(n.into());
    if d.support_bound() > n_rat {
        return Err(McError::UnsupportedDistribution(format!(
            "support exceeds N = {n}"
        )));
    }
    let sigma = d.moment(2) / &n_rat;
    if sigma.is_zero() {
        return Err(McError::UnsupportedDistribution(
            "sigma_N vanishes (point mass)".into(),
        ));
    }
    let event = BandEvent::new(d, n, &Rational::zero(), &Rational::one(), true);
    let hits = run_event(&event, reps, seed, 0, threads);
    let empirical = MCEstimate::from_counts(hits, reps);
    let sigma_f = sigma.to_f64().expect("finite sigma");
    let ratio = empirical.value / sigma_f;
    let ratio_ci_low = empirical.ci_low / sigma_f;
    Ok(SymmetricLowerReport {
        n,
        empirical,
        sigma,
        ratio,
        ratio_ci_low,
        positive: ratio_ci_low > 0.0,
    })
}

/// Monte Carlo comparison of `pi_N` against its symmetrized counterpart
/// `pi^sym_N(2)`, plus the empirical ratios standing in for the universal
/// constants that the bounds only assert to exist.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizationPiReport {
    pub n: u64,
    pub pi: MCEstimate,
    pub pi_sym_2: MCEstimate,
    /// `pi_N >= pi^sym_N(2) / 2`, judged with CI slack: fails only when the
    /// intervals are confidently on the wrong side.
    pub holds_with_ci: bool,
    /// For symmetric laws, the explicit-constant tail bound
    /// `tau_N ∧ 1 <= 6 pi_N`, again judged with CI slack; `None` when the
    /// law is not symmetric.
    pub six_pi_tail_holds: Option<bool>,
    /// `pi_N / ((tau_N ∧ 1) + (sigma_N ∧ 1))`.
    pub upper_ratio: Option<f64>,
    /// `((tau_N(4) ∧ 1) + (sigma_N ∧ 1)) / pi_N`.
    pub lower_ratio: Option<f64>,
}

pub fn verify_symmetrization_pi(
    d: &DiscreteDistribution,
    n: u64,
    reps: u64,
    seed: Seed,
    threads: usize,
) -> SymmetrizationPiReport {
    let one = Rational::one();
    let corrector = corrector_delta(d, n, &one);
    let pi = estimate_pi(d, n, &one, &corrector, reps, seed, 0, threads);
    let sym = d.symmetrize();
    let two = Rational::from_integer(2.into());
    let pi_sym_2 = estimate_pi(&sym, n, &two, &Rational::zero(), reps, seed, 1, threads);
    let holds_with_ci = pi.ci_high >= pi_sym_2.ci_low / 2.0;

    let n_rat = Rational::from_integer(n.into());
    let profile = feller_profile(d, &n_rat, &one, TailConvention::Strict);
    let four = Rational::from_integer(4.into());
    let tau4 = &n_rat * d.tail_mass(&(&four * &n_rat), TailConvention::Strict);
    let cap = |x: &Rational| -> f64 { x.min(&one).to_f64().unwrap_or(1.0) };
    let denom_upper = cap(&profile.tau) + cap(&profile.sigma);
    let numer_lower = cap(&tau4) + cap(&profile.sigma);
    let upper_ratio = (denom_upper > 0.0).then(|| pi.value / denom_upper);
    let lower_ratio = (pi.value > 0.0).then(|| numer_lower / pi.value);
    let six_pi_tail_holds = d
        .is_symmetric()
        .then(|| cap(&profile.tau) <= 6.0 * pi.ci_high);
    SymmetrizationPiReport {
        n,
        pi,
        pi_sym_2,
        holds_with_ci,
        six_pi_tail_holds,
        upper_ratio,
        lower_ratio,
    }
}

/// Per-component conditional exceedance estimates and their exact weighted
/// aggregate, which estimates the unconditional probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPiReport {
    pub components: Vec<MCEstimate>,
    pub weights: Vec<Rational>,
    pub aggregate: MCEstimate,
}

/// Empirical conditional probabilities `P(|S_N/N - Delta_N| > eps | class)`,
/// one estimate per mixture entry (component `i` runs as experiment
/// `experiment_base + i`), aggregated by the exact mixture weights.
pub fn estimate_pi_conditional(
    family: &MixingFamily,
    n: u64,
    eps: &Rational,
    reps: u64,
    seed: Seed,
    experiment_base: u64,
    threads: usize,
) -> ConditionalPiReport {
    let correctors = cond_corrector(family, n, &Rational::one());
    let mut components = Vec::with_capacity(family.len());
    for (i, (_, d)) in family.entries().iter().enumerate() {
        let est = estimate_pi(
            d,
            n,
            eps,
            &correctors.values[i],
            reps,
            seed,
            experiment_base + i as u64,
            threads,
        );
        components.push(est);
    }
    let weights: Vec<Rational> = family.weights().cloned().collect();
    // Aggregate value as an exact rational over the weights, then rounded
    // once; variance adds across independent per-component runs.
    let hits_exact: Rational = components
        .iter()
        .zip(&weights)
        .map(|(est, w)| w * Rational::from_integer(BigInt::from(est.hits)))
        .sum();
    let value_exact = &hits_exact / Rational::from_integer(BigInt::from(reps));
    let value = value_exact.to_f64().unwrap_or(0.0);
    let var: f64 = components
        .iter()
        .zip(&weights)
        .map(|(est, w)| {
            let wf = w.to_f64().unwrap_or(0.0);
            (wf * est.stderr).powi(2)
        })
        .sum();
    let stderr = var.sqrt();
    let aggregate = MCEstimate {
        value,
        stderr,
        reps,
        hits: hits_exact.round().to_integer().to_u64().unwrap_or(0),
        ci_low: (value - Z_99 * stderr).max(0.0),
        ci_high: (value + Z_99 * stderr).min(1.0),
    };
    ConditionalPiReport {
        components,
        weights,
        aggregate,
    }
}

/// I.i.d. sample path by exact inverse-CDF over the cumulative masses.
///
/// Atom values convert to `f64` once, with a losslessness check; laws whose
/// values cannot round-trip are refused rather than sampled approximately.
pub fn sample_iid(
    d: &DiscreteDistribution,
    n: u64,
    seed: Seed,
    experiment: u64,
) -> Result<Vec<f64>, McError> {
    assert!(n >= 1);
    let values = lossless_values(d)?;
    let masses: Vec<Rational> = d.atoms().iter().map(|(_, m)| m.clone()).collect();
    let sampler = CategoricalSampler::new(&masses);
    let mut rng = seed.substream(experiment, 0);
    Ok((0..n).map(|_| values[sampler.sample(&mut rng)]).collect())
}

/// De Finetti sampling: draw a component by its weight, then i.i.d. within
/// it. Returns the component index alongside the path.
pub fn sample_exchangeable(
    family: &MixingFamily,
    n: u64,
    seed: Seed,
    experiment: u64,
) -> Result<(usize, Vec<f64>), McError> {
    assert!(n >= 1);
    let weights: Vec<Rational> = family.weights().cloned().collect();
    let component_sampler = CategoricalSampler::new(&weights);
    let mut rng = seed.substream(experiment, 0);
    let idx = component_sampler.sample(&mut rng);
    let d = &family.entries()[idx].1;
    let values = lossless_values(d)?;
    let masses: Vec<Rational> = d.atoms().iter().map(|(_, m)| m.clone()).collect();
    let sampler = CategoricalSampler::new(&masses);
    let path = (0..n).map(|_| values[sampler.sample(&mut rng)]).collect();
    Ok((idx, path))
}

fn lossless_values(d: &DiscreteDistribution) -> Result<Vec<f64>, McError> {
    d.atoms()
        .iter()
        .map(|(v, _)| {
            to_f64_lossless(v).ok_or_else(|| McError::LossyValue(crate::rational::format_rational(v)))
        })
        .collect()
}

/// Running means `S_k / k` of a sample path.
pub fn cesaro_path(samples: &[f64]) -> Vec<f64> {
    assert!(!samples.is_empty());
    let mut sum = 0.0;
    samples
        .iter()
        .enumerate()
        .map(|(i, x)| {
            sum += x;
            sum / (i + 1) as f64
        })
        .collect()
}

/// Exact-arithmetic running means; `cesaro_path_exact(x)[k] * (k+1)` recovers
/// the prefix sums exactly.
pub fn cesaro_path_exact(samples: &[Rational]) -> Vec<Rational> {
    assert!(!samples.is_empty());
    let mut sum = Rational::zero();
    samples
        .iter()
        .enumerate()
        .map(|(i, x)| {
            sum += x;
            &sum / Rational::from_integer(BigInt::from(i as u64 + 1))
        })
        .collect()
}

/// Concatenated 1-based index blocks `{offset+1, ..., offset+size}`.
pub fn glue_blocks(block_sizes: &[u64], offsets: &[u64]) -> Result<Vec<u64>, McError> {
    if block_sizes.len() != offsets.len() {
        return Err(McError::MismatchedLengths);
    }
    for i in 1..offsets.len() {
        if offsets[i] <= offsets[i - 1] || offsets[i] < offsets[i - 1] + block_sizes[i - 1] {
            return Err(McError::OverlappingBlocks);
        }
    }
    let mut indices = Vec::with_capacity(block_sizes.iter().sum::<u64>() as usize);
    for (size, offset) in block_sizes.iter().zip(offsets) {
        for k in 1..=*size {
            indices.push(offset + k);
        }
    }
    Ok(indices)
}
