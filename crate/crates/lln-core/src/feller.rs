//! Exact truncated-moment statistics of a single law, the integral
//! identities that tie them together, and finite-grid condition checkers.
//!
//! For a law `h` with bounded support, every statistic here is a closed-form
//! rational: the tail function is piecewise constant in `t`, so `tau` is
//! piecewise linear and the truncated moments are step functions. Integrals
//! over `t` reduce to finite sums over the knots `|atom|/eps`, which is what
//! makes the identity checks assertable with exact equality rather than a
//! tolerance.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{DiscreteDistribution, TailConvention};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FellerError {
    #[error("grid is empty")]
    EmptyGrid,
}

/// The tuple of scaled truncated-moment statistics at one `(t, eps)`:
///
/// * `delta` — truncated mean `E(h 1{|h| <= eps t})`
/// * `tau`   — scaled tail `t P(|h| > eps t)` (boundary per convention)
/// * `sigma` — scaled truncated second moment `E(h^2 1{|h| <= eps t}) / t`
/// * `v`     — scaled truncated variance `sigma - delta^2 / t`
/// * `rho`   — `eps^2 tau + sigma`, the scaled second moment of `|h| ∧ eps t`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FellerProfile {
    pub t: Rational,
    pub eps: Rational,
    pub delta: Rational,
    pub tau: Rational,
    pub sigma: Rational,
    pub v: Rational,
    pub rho: Rational,
}

/// All five statistics at `(t, eps)`, exactly.
pub fn feller_profile(
    d: &DiscreteDistribution,
    t: &Rational,
    eps: &Rational,
    conv: TailConvention,
) -> FellerProfile {
    assert!(t.is_positive(), "t must be positive");
    assert!(eps.is_positive(), "eps must be positive");
    let cutoff = eps * t;
    let delta = d.truncated_moment(&cutoff, 1);
    let tau = t * d.tail_mass(&cutoff, conv);
    let second = d.truncated_moment(&cutoff, 2);
    let sigma = &second / t;
    let v = &sigma - &delta * &delta / t;
    let rho = eps * eps * &tau + &sigma;
    FellerProfile {
        t: t.clone(),
        eps: eps.clone(),
        delta,
        tau,
        sigma,
        v,
        rho,
    }
}

/// Truncated mean `delta_N(eps)`, the corrector subtracted from the sample
/// mean in the weak law.
pub fn corrector_delta(d: &DiscreteDistribution, n: u64, eps: &Rational) -> Rational {
    assert!(n >= 1, "N must be at least 1");
    let cutoff = eps * Rational::from_integer(n.into());
    d.truncated_moment(&cutoff, 1)
}

/// Exact `(1/M) * integral of tau_t(eps) over [0, M]`.
///
/// `tau_t(eps) = t * P(|h| > eps t)` is linear between the knots `|atom|/eps`,
/// so each piece contributes `P * (w^2 - u^2) / 2`. The tail convention does
/// not change the integral (boundaries have measure zero); the argument is
/// kept for interface uniformity.
pub fn avg_tau(
    d: &DiscreteDistribution,
    m: &Rational,
    eps: &Rational,
    _conv: TailConvention,
) -> Rational {
    assert!(m.is_positive(), "M must be positive");
    let two = Rational::from_integer(2.into());
    let mut bounds: Vec<Rational> = vec![Rational::zero()];
    for knot in d.abs_value_knots() {
        let t = knot / eps;
        if t < *m {
            bounds.push(t);
        }
    }
    bounds.push(m.clone());
    let mut integral = Rational::zero();
    for pair in bounds.windows(2) {
        let (u, w) = (&pair[0], &pair[1]);
        // On (u, w) the tail has no knots, so P(|h| > eps t) = P(|h| > eps u).
        let tail = d.tail_mass(&(eps * u), TailConvention::Strict);
        integral += tail * (w * w - u * u) / &two;
    }
    integral / m
}

/// Exact `M * integral of sigma_t(eps) / t^2 over [M, infinity)`.
///
/// `sigma_t(eps) / t^2 = S(t) / t^3` with `S` a step function; each piece
/// integrates to `S * (1/(2u^2) - 1/(2w^2))`, and bounded support makes the
/// last piece finite.
pub fn tail_sigma_integral(
    d: &DiscreteDistribution,
    m: &Rational,
    eps: &Rational,
    _conv: TailConvention,
) -> Rational {
    m * tail_step_integral(d, m, eps, |second, _| second.clone())
}

/// Exact `M * integral of v_t(eps) / t^2 over [M, infinity)`.
///
/// `v_t(eps)/t^2 = (S(t) - D(t)^2)/t^3` with both `S` and `D` step functions.
pub fn tail_v_integral(
    d: &DiscreteDistribution,
    m: &Rational,
    eps: &Rational,
    _conv: TailConvention,
) -> Rational {
    m * tail_step_integral(d, m, eps, |second, first| second - first * first)
}

/// Integrate `f(S(t), D(t)) / t^3` over `[M, infinity)` for a numerator that
/// is constant between truncation knots.
fn tail_step_integral(
    d: &DiscreteDistribution,
    m: &Rational,
    eps: &Rational,
    numerator: impl Fn(&Rational, &Rational) -> Rational,
) -> Rational {
    assert!(m.is_positive(), "M must be positive");
    let two = Rational::from_integer(2.into());
    let mut bounds: Vec<Rational> = vec![m.clone()];
    for knot in d.abs_value_knots() {
        let t = knot / eps;
        if t > *m {
            bounds.push(t);
        }
    }
    let mut integral = Rational::zero();
    for pair in bounds.windows(2) {
        let (u, w) = (&pair[0], &pair[1]);
        let cutoff = eps * u;
        let num = numerator(&d.truncated_moment(&cutoff, 2), &d.truncated_moment(&cutoff, 1));
        integral += &num * (Rational::from_integer(1.into()) / (&two * u * u)
            - Rational::from_integer(1.into()) / (&two * w * w));
    }
    // Final piece [last knot, infinity): full moments from here on.
    let u = bounds.last().expect("at least M");
    let cutoff = eps * u;
    let num = numerator(&d.truncated_moment(&cutoff, 2), &d.truncated_moment(&cutoff, 1));
    integral += &num / (&two * u * u);
    integral
}

/// Two exactly-computed sides of an integral identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub lhs: Rational,
    pub rhs: Rational,
    pub equal: bool,
}

impl IdentityCheck {
    fn new(lhs: Rational, rhs: Rational) -> Self {
        let equal = lhs == rhs;
        Self { lhs, rhs, equal }
    }
}

/// Integration-by-parts identity: `tau(M) = 2 avg_tau - sigma(M) / eps^2`.
///
/// Stated for the strict tail convention; at `eps = 1` this is the classical
/// form `tau(M) = (2/M) int_0^M tau - sigma(M)`. For general `eps` the
/// `1/eps^2` factor is forced by applying the identity to the scaled law
/// `h / eps`, and exact equality holds for every law and every `M > 0`.
pub fn check_identity_parts(
    d: &DiscreteDistribution,
    m: &Rational,
    eps: &Rational,
    conv: TailConvention,
) -> IdentityCheck {
    let profile = feller_profile(d, m, eps, conv);
    let avg = avg_tau(d, m, eps, conv);
    let two = Rational::from_integer(2.into());
    let rhs = two * avg - &profile.sigma / (eps * eps);
    IdentityCheck::new(profile.tau, rhs)
}

/// Inverse identity: `tau(M) = (2 M int_M^inf sigma(t)/t^2 dt - sigma(M)) / eps^2`.
///
/// The tail integral is finite because the support is bounded; exact for the
/// strict convention, same `eps` scaling as [`check_identity_parts`].
pub fn check_identity_inverse(
    d: &DiscreteDistribution,
    m: &Rational,
    eps: &Rational,
    conv: TailConvention,
) -> IdentityCheck {
    let profile = feller_profile(d, m, eps, conv);
    let tail = tail_sigma_integral(d, m, eps, conv);
    let two = Rational::from_integer(2.into());
    let rhs = (two * tail - &profile.sigma) / (eps * eps);
    IdentityCheck::new(profile.tau, rhs)
}

/// Outcome of searching a grid for the threshold past which
/// `delta_t^2 <= eta * t * (1 + sigma_t)` holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessReport {
    /// Smallest grid point from which the inequality holds at every later
    /// grid point; `None` when the final grid point itself fails.
    pub witness: Option<Rational>,
    /// Every grid point where the inequality fails.
    pub violations: Vec<Rational>,
}

/// Search `t_grid` for the stabilization threshold of the bound
/// `delta_t^2 <= eta t (1 + sigma_t)`, evaluated exactly at every point.
pub fn delta_bound_witness(
    d: &DiscreteDistribution,
    eta: &Rational,
    t_grid: &[Rational],
) -> Result<WitnessReport, FellerError> {
    assert!(eta.is_positive(), "eta must be positive");
    if t_grid.is_empty() {
        return Err(FellerError::EmptyGrid);
    }
    let mut violations = Vec::new();
    let mut holds = Vec::with_capacity(t_grid.len());
    for t in t_grid {
        assert!(t.is_positive(), "grid points must be positive");
        let delta = d.truncated_moment(t, 1);
        let second = d.truncated_moment(t, 2);
        // delta^2 <= eta t (1 + S/t) = eta (t + S), cleared of the division.
        let ok = &delta * &delta <= eta * (t + &second);
        holds.push(ok);
        if !ok {
            violations.push(t.clone());
        }
    }
    let first_bad_from_end = holds.iter().rposition(|ok| !ok);
    let witness = match first_bad_from_end {
        None => Some(t_grid[0].clone()),
        Some(i) if i + 1 < t_grid.len() => Some(t_grid[i + 1].clone()),
        Some(_) => None,
    };
    Ok(WitnessReport { witness, violations })
}

/// Finite-grid proxy for a limit statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    TendsToZero,
    StaysBoundedAway,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::TendsToZero => "tends_to_zero",
            Verdict::StaysBoundedAway => "stays_bounded_away",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Trailing-window verdict rule shared by every checker: over the last
/// `window` grid points, all values on or below the threshold reads as
/// tending to zero, all values strictly above as bounded away.
///
/// The boundary goes with `TendsToZero` so that thresholding a statistic and
/// thresholding its exceedance probability agree exactly on one-component
/// mixtures.
pub fn verdict_for(series: &[Rational], threshold: &Rational, window: usize) -> Verdict {
    let window = window.max(1).min(series.len());
    let tail = &series[series.len() - window..];
    if tail.iter().all(|x| x <= threshold) {
        Verdict::TendsToZero
    } else if tail.iter().all(|x| x > threshold) {
        Verdict::StaysBoundedAway
    } else {
        Verdict::Inconclusive
    }
}

/// Per-condition series and verdicts for the classical weak-law checkers.
///
/// Series keys look like `tau[eps=1/2]`; every series has the same length as
/// `grid`. The point statistics (`tau`, `sigma`, `v`, `rho`) read the grid as
/// values of `t`; the integral transforms (`avg_tau`, `tail_sigma`, `tail_v`)
/// read it as values of `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub grid: Vec<Rational>,
    pub series: BTreeMap<String, Vec<Rational>>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub threshold: Rational,
    pub window: usize,
}

pub const DEFAULT_WINDOW: usize = 5;

pub fn default_threshold() -> Rational {
    Rational::new(1.into(), 100.into())
}

/// Names of the classical condition series, in report order.
pub const CLASSICAL_SERIES: [&str; 7] = [
    "tau",
    "sigma",
    "v",
    "rho",
    "avg_tau",
    "tail_sigma",
    "tail_v",
];

/// Evaluate every classical weak-law condition on a grid, exactly, and apply
/// the trailing-window verdict rule to each series.
pub fn classify_classical(
    d: &DiscreteDistribution,
    eps_list: &[Rational],
    t_grid: &[Rational],
    threshold: &Rational,
    window: usize,
    conv: TailConvention,
) -> Result<ConditionReport, FellerError> {
    if t_grid.is_empty() || eps_list.is_empty() {
        return Err(FellerError::EmptyGrid);
    }
    let mut series = BTreeMap::new();
    for eps in eps_list {
        let mut tau = Vec::with_capacity(t_grid.len());
        let mut sigma = Vec::with_capacity(t_grid.len());
        let mut v = Vec::with_capacity(t_grid.len());
        let mut rho = Vec::with_capacity(t_grid.len());
        let mut avg = Vec::with_capacity(t_grid.len());
        let mut tail_s = Vec::with_capacity(t_grid.len());
        let mut tail_v = Vec::with_capacity(t_grid.len());
        for t in t_grid {
            let p = feller_profile(d, t, eps, conv);
            tau.push(p.tau);
            sigma.push(p.sigma);
            v.push(p.v);
            rho.push(p.rho);
            avg.push(avg_tau(d, t, eps, conv));
            tail_s.push(tail_sigma_integral(d, t, eps, conv));
            tail_v.push(tail_v_integral(d, t, eps, conv));
        }
        let eps_tag = format_rational(eps);
        for (name, values) in CLASSICAL_SERIES.iter().zip([
            tau, sigma, v, rho, avg, tail_s, tail_v,
        ]) {
            series.insert(format!("{name}[eps={eps_tag}]"), values);
        }
    }
    let verdicts = series
        .iter()
        .map(|(k, vals)| (k.clone(), verdict_for(vals, threshold, window)))
        .collect();
    Ok(ConditionReport {
        grid: t_grid.to_vec(),
        series,
        verdicts,
        threshold: threshold.clone(),
        window,
    })
}

/// Exact sides of the symmetrization bounds at one `N`:
/// `v_N <= 2 sigma^sym_{2N}` and `tau_N <= 4 tau^sym_N(1/2)`, where `sym`
/// refers to the law of `X - X'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetrizationBounds {
    pub n: u64,
    /// `P(|h| > N) < 1/2`, the scale past which the bounds are asserted.
    pub n0_ok: bool,
    pub v_n: Rational,
    pub sym_sigma_2n: Rational,
    pub variance_bound_holds: bool,
    pub tau_n: Rational,
    pub sym_tau_n_half: Rational,
    pub tail_bound_holds: bool,
}

impl SymmetrizationBounds {
    pub fn all_hold(&self) -> bool {
        self.variance_bound_holds && self.tail_bound_holds
    }
}

/// Evaluate both symmetrization bounds exactly using the convolution law.
pub fn check_symmetrization_bounds(d: &DiscreteDistribution, n: u64) -> SymmetrizationBounds {
    assert!(n >= 1, "N must be at least 1");
    let one = Rational::from_integer(1.into());
    let two = Rational::from_integer(2.into());
    let four = Rational::from_integer(4.into());
    let t = Rational::from_integer(n.into());
    let sym = d.symmetrize();

    let profile = feller_profile(d, &t, &one, TailConvention::Strict);
    let sym_at_2n = feller_profile(&sym, &(&two * &t), &one, TailConvention::Strict);
    let sym_tau_half = &t * sym.tail_mass(&(&t / &two), TailConvention::Strict);

    let n0_ok = d.tail_mass(&t, TailConvention::Strict) < Rational::new(1.into(), 2.into());
    let variance_bound_holds = profile.v <= &two * &sym_at_2n.sigma;
    let tail_bound_holds = profile.tau <= &four * &sym_tau_half;
    SymmetrizationBounds {
        n,
        n0_ok,
        v_n: profile.v,
        sym_sigma_2n: sym_at_2n.sigma,
        variance_bound_holds,
        tau_n: profile.tau,
        sym_tau_n_half: sym_tau_half,
        tail_bound_holds,
    }
}

/// Geometric grid `t0 * r^k`, `k = 0..count`, the default multiplicative
/// scale for inspecting the statistics.
pub fn geometric_grid(t0: &Rational, ratio: &Rational, count: usize) -> Vec<Rational> {
    assert!(t0.is_positive() && ratio.is_positive());
    let mut grid = Vec::with_capacity(count);
    let mut t = t0.clone();
    for _ in 0..count {
        grid.push(t.clone());
        t *= ratio;
    }
    grid
}
