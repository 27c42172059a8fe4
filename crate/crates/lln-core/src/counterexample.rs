//! Exact construction and verification of the counterexample families that
//! separate the exchangeable weak-law conditions, plus the tail-oscillator
//! law whose statistics refuse to settle.
//!
//! All three families live over the dyadic partition of `[0,1)`: a component
//! is a dyadic interval of the deepest level, and at each level `m` it picks
//! the window indexed by its level-`m` dyadic ancestor. The builders resolve
//! every "large enough" choice by a minimality search over integers, so the
//! output is deterministic and reproducible; the verifiers recheck the
//! defining equalities and inequalities with exact rational arithmetic,
//! independently of how the numbers were produced.
//!
//! Integer sizes grow doubly exponentially in the level index. The intended
//! desk scales are `m <= 3` for family B and `m <= 2` for family C
//! ([`B_DESK_SCALE`], [`C_DESK_SCALE`]); larger levels still build correctly,
//! just slowly and with very large numbers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dist::{DiscreteDistribution, DistError, MixingFamily, TailConvention};
use crate::rational::{format_rational, parse_rational, Rational};

/// Recommended largest level for family B before integers explode.
pub const B_DESK_SCALE: u32 = 3;
/// Recommended largest level for family C.
pub const C_DESK_SCALE: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CounterexampleError {
    #[error("total atom mass exceeds 1")]
    MassOverflow,
    #[error("dyadic depth {depth} is smaller than m_max {m_max}")]
    DepthExceeded { depth: u32, m_max: u32 },
    #[error("infeasible scale: {0}")]
    InfeasibleScale(String),
    #[error("sequence must be strictly increasing")]
    NotIncreasing,
    #[error("need {needed} level values, got {got}")]
    InsufficientLevels { needed: usize, got: usize },
    #[error("levels {0} and {1} violate the separation factor")]
    SeparationViolated(String, String),
    #[error(transparent)]
    Dist(#[from] DistError),
}

fn big_to_rat(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

/// Tail-oscillator law: `P(h = N_k) = k / N_k` along a fast-growing integer
/// sequence, remaining mass at zero. Along `t = N_k` the scaled tail and the
/// scaled second moment trade places, which is what defeats any single
/// unconjoined condition.
pub fn build_oscillator(n_seq: &[BigInt]) -> Result<DiscreteDistribution, CounterexampleError> {
    if n_seq.is_empty() {
        return Err(CounterexampleError::InsufficientLevels { needed: 1, got: 0 });
    }
    for pair in n_seq.windows(2) {
        if pair[1] <= pair[0] {
            return Err(CounterexampleError::NotIncreasing);
        }
    }
    if !n_seq[0].is_positive() {
        return Err(CounterexampleError::NotIncreasing);
    }
    let mut atoms = Vec::with_capacity(n_seq.len() + 1);
    let mut total = Rational::zero();
    for (i, n) in n_seq.iter().enumerate() {
        let mass = Rational::new(BigInt::from(i as u64 + 1), n.clone());
        total += &mass;
        atoms.push((big_to_rat(n), mass));
    }
    if total > Rational::one() {
        return Err(CounterexampleError::MassOverflow);
    }
    if total < Rational::one() {
        atoms.push((Rational::zero(), Rational::one() - total));
    }
    Ok(DiscreteDistribution::new(atoms)?)
}

/// Parameters of the oscillator, serializable with bignum-safe strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OscillatorParams {
    pub n_seq: Vec<BigInt>,
}

/// One level of family B: window thresholds `N_1 < ... < N_{2^m}`, the
/// shared per-window mass `p_m`, and the guard threshold closing the last
/// window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelB {
    pub m: u32,
    pub p: Rational,
    pub ns: Vec<BigInt>,
    pub guard: BigInt,
}

impl LevelB {
    /// Window `[N_j, next)` upper end: the next threshold, or the guard for
    /// the last window.
    fn window_end(&self, j: usize) -> &BigInt {
        if j + 1 < self.ns.len() {
            &self.ns[j + 1]
        } else {
            &self.guard
        }
    }

    /// Single-window law `h_j`: values `{+-N_j, 0}` with `P(+-N_j) = p/2`.
    pub fn window_law(&self, j: usize) -> DiscreteDistribution {
        window_law(&self.ns[j], &self.p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamsB {
    pub levels: Vec<LevelB>,
}

/// One level of family B built by the greedy forward induction, starting
/// strictly above `floor`.
///
/// `N_1` is the smallest integer above the floor with `p = m / N_1 < 2^-m`;
/// each later threshold is the smallest integer past which the previous
/// window's scaled second moment drops below `2^-m`.
pub fn build_b_level(m: u32, floor: &BigInt) -> LevelB {
    assert!(m >= 1);
    let windows = 1usize << m;
    let m_big = BigInt::from(m);
    let two_pow_m = BigInt::one() << m;
    // p = m / N1 < 2^-m  <=>  N1 > m * 2^m.
    let p_floor = &m_big * &two_pow_m;
    let n1: BigInt = std::cmp::max(floor.clone(), p_floor) + 1;
    let p = Rational::new(m_big.clone(), n1.clone());
    let mut ns = vec![n1.clone()];
    // sigma^{(m,j)}_N = N_j^2 p / N < 2^-m  <=>  N > N_j^2 m 2^m / N1.
    let push_next = |prev: &BigInt| {
        let numer = prev * prev * &m_big * &two_pow_m;
        numer.div_floor(&n1) + 1
    };
    for _ in 1..windows {
        let next = push_next(ns.last().unwrap());
        ns.push(next);
    }
    let guard = push_next(ns.last().unwrap());
    LevelB { m, p, ns, guard }
}

/// Forward-inductive construction of family B up to level `m_max`, assembled
/// over the depth-`m_max` dyadic partition.
///
/// Every component is symmetric; at each level head `N_1^{(m)}` the scaled
/// tail equals `m` exactly under the nonstrict convention, while the scaled
/// second moment stays below `2^-m` outside one traveling window per level.
pub fn build_b(m_max: u32) -> (ParamsB, MixingFamily) {
    assert!(m_max >= 1);
    let mut levels = Vec::with_capacity(m_max as usize);
    let mut floor = BigInt::zero();
    for m in 1..=m_max {
        let level = build_b_level(m, &floor);
        floor = level.guard.clone();
        levels.push(level);
    }
    let params = ParamsB { levels };
    let family = assemble_family(m_max, m_max, "family-B", |m, j| {
        let level = &params.levels[m as usize - 1];
        (level.ns[j].clone(), level.p.clone())
    });
    (params, family)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauHeadCheck {
    pub m: u32,
    pub j: usize,
    pub value: Rational,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaViolation {
    pub m: u32,
    pub j: usize,
    pub at: BigInt,
    pub value: Rational,
}

/// Exact recheck of the family-B level claims.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyBReport {
    pub tau_checks: Vec<TauHeadCheck>,
    pub sigma_violations: Vec<SigmaViolation>,
    pub mass_ok: bool,
    pub ordering_ok: bool,
}

impl VerifyBReport {
    pub fn passed(&self) -> bool {
        self.mass_ok && self.ordering_ok && self.sigma_violations.is_empty()
            && self.tau_checks.iter().all(|c| c.ok)
    }
}

/// Verify family-B parameters: the scaled tail equals `m` at every level
/// head (nonstrict tail), the scaled second moment stays below `2^-m` at
/// every constructed threshold outside each window, `p_m < 2^-m`, and the
/// thresholds increase across levels.
pub fn verify_b(params: &ParamsB) -> VerifyBReport {
    let mut tau_checks = Vec::new();
    let mut sigma_violations = Vec::new();
    let mut mass_ok = true;
    let mut ordering_ok = true;

    let mut all_thresholds: Vec<BigInt> = Vec::new();
    let mut prev_guard: Option<&BigInt> = None;
    for level in &params.levels {
        if let Some(g) = prev_guard {
            if &level.ns[0] <= g {
                ordering_ok = false;
            }
        }
        for pair in level.ns.windows(2) {
            if pair[1] <= pair[0] {
                ordering_ok = false;
            }
        }
        if level.guard <= *level.ns.last().unwrap() {
            ordering_ok = false;
        }
        let cap = Rational::new(BigInt::one(), BigInt::one() << level.m);
        if level.p >= cap {
            mass_ok = false;
        }
        all_thresholds.extend(level.ns.iter().cloned());
        all_thresholds.push(level.guard.clone());
        prev_guard = Some(&level.guard);
    }
    all_thresholds.sort();
    all_thresholds.dedup();

    for level in &params.levels {
        let m = level.m;
        let head = big_to_rat(&level.ns[0]);
        let cap = Rational::new(BigInt::one(), BigInt::one() << m);
        let m_rat = Rational::from_integer(BigInt::from(m));
        for j in 0..level.ns.len() {
            let law = level.window_law(j);
            let tau = &head * law.tail_mass(&head, TailConvention::Nonstrict);
            let ok = tau == m_rat;
            tau_checks.push(TauHeadCheck { m, j: j + 1, value: tau, ok });
            let lo = &level.ns[j];
            let hi = level.window_end(j);
            for n in &all_thresholds {
                if n >= lo && n < hi {
                    continue;
                }
                let t = big_to_rat(n);
                let sigma = law.truncated_moment(&t, 2) / &t;
                if sigma >= cap {
                    sigma_violations.push(SigmaViolation {
                        m,
                        j: j + 1,
                        at: n.clone(),
                        value: sigma,
                    });
                }
            }
        }
    }
    VerifyBReport {
        tau_checks,
        sigma_violations,
        mass_ok,
        ordering_ok,
    }
}

/// One level of family C: thresholds and per-window masses tied by the two
/// recursions `p_j N_j^2 = m N_{2^m}` and `p_j N_{j-1} = eps`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelC {
    pub m: u32,
    pub ns: Vec<BigInt>,
    pub ps: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamsC {
    pub eps: Rational,
    pub delta: Rational,
    pub levels: Vec<LevelC>,
}

/// Backwards-inductive construction of family C.
///
/// Within level `m` the thresholds follow the closed form
/// `N_j = N_top * (eps/m)^(2^(2^m - j) - 1)` and the masses come from the
/// recursion `p_j = m N_top / N_j^2` (not from the printed j-independent
/// closed form, which the recursion contradicts; `verify_c` would flag it).
/// `N_top` is `K` times the smallest denominator-clearing base; `K` is the
/// minimal integer making the level start above the previous one and keeping
/// the level mass below `delta`, unless `scales` pins `N_top` explicitly.
pub fn build_c(
    m_max: u32,
    eps: &Rational,
    delta: &Rational,
    scales: Option<&[BigInt]>,
) -> Result<(ParamsC, MixingFamily), CounterexampleError> {
    assert!(m_max >= 1);
    assert!(eps.is_positive() && delta.is_positive());
    if let Some(s) = scales {
        if s.len() != m_max as usize {
            return Err(CounterexampleError::InsufficientLevels {
                needed: m_max as usize,
                got: s.len(),
            });
        }
    }
    let mut levels: Vec<LevelC> = Vec::with_capacity(m_max as usize);
    let mut prev_top = BigInt::zero();
    for m in 1..=m_max {
        let m_rat = Rational::from_integer(BigInt::from(m));
        let ratio = eps / &m_rat;
        if ratio >= Rational::one() {
            return Err(CounterexampleError::InfeasibleScale(format!(
                "eps must be below m; got eps = {} at level m = {}",
                format_rational(eps),
                m
            )));
        }
        let windows = 1usize << m;
        // Exponents 2^(2^m - j) - 1 for j = 1..2^m, decreasing to zero.
        let exponents: Vec<u64> = (1..=windows as u64)
            .map(|j| (1u64 << ((1u64 << m) - j)) - 1)
            .collect();
        // Smallest denominator-clearing scale: with ratio = a/b in lowest
        // terms, N_j = top * ratio^e is integral for every j once b^E | top.
        let big_e = exponents[0];
        let base = pow_bigint(ratio.denom(), big_e);
        let top = match scales {
            Some(s) => {
                let t = s[m as usize - 1].clone();
                if !t.is_positive() {
                    return Err(CounterexampleError::InfeasibleScale(
                        "scale must be positive".into(),
                    ));
                }
                t
            }
            None => {
                // N1(K) = K * a^E must clear the previous level's top, and
                // the level mass sum(p_j) scales as 1/K.
                let n1_unit = pow_bigint(ratio.numer(), big_e);
                let k_order = prev_top.div_floor(&n1_unit) + 1;
                let mass_at_unit: Rational = level_c_numbers(m, &ratio, &big_to_rat(&base))
                    .into_iter()
                    .map(|(_, p)| p)
                    .sum();
                let k_mass = floor_div_ratio(&mass_at_unit, delta) + 1;
                let k = std::cmp::max(std::cmp::max(k_order, k_mass), BigInt::one());
                k * &base
            }
        };
        let mut ns = Vec::with_capacity(windows);
        let mut ps = Vec::with_capacity(windows);
        for (n_rat, p) in level_c_numbers(m, &ratio, &big_to_rat(&top)) {
            if !n_rat.denom().is_one() {
                return Err(CounterexampleError::InfeasibleScale(format!(
                    "scale {} does not make N integral at level m = {}",
                    top, m
                )));
            }
            ns.push(n_rat.numer().clone());
            ps.push(p);
        }
        if ns[0] <= prev_top {
            return Err(CounterexampleError::InfeasibleScale(format!(
                "level m = {} starts at {} which does not clear the previous level top {}",
                m, ns[0], prev_top
            )));
        }
        let mass: Rational = ps.iter().cloned().sum();
        if mass >= *delta {
            return Err(CounterexampleError::InfeasibleScale(format!(
                "level m = {} mass {} is not below delta {}",
                m,
                format_rational(&mass),
                format_rational(delta)
            )));
        }
        prev_top = ns.last().unwrap().clone();
        levels.push(LevelC { m, ns, ps });
    }
    let params = ParamsC {
        eps: eps.clone(),
        delta: delta.clone(),
        levels,
    };
    let family = assemble_family(m_max, m_max, "family-C", |m, j| {
        let level = &params.levels[m as usize - 1];
        (level.ns[j].clone(), level.ps[j].clone())
    });
    Ok((params, family))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursionViolation {
    pub m: u32,
    pub j: usize,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// Exact recheck of the family-C recursions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyCReport {
    /// `p_j N_j^2 = m N_{2^m}` failures.
    pub w2_violations: Vec<RecursionViolation>,
    /// `p_j N_{j-1} = eps` failures (j from the second window on).
    pub w3_violations: Vec<RecursionViolation>,
    pub mass_ok: bool,
    pub ordering_ok: bool,
}

impl VerifyCReport {
    pub fn passed(&self) -> bool {
        self.mass_ok && self.ordering_ok && self.w2_violations.is_empty()
            && self.w3_violations.is_empty()
    }
}

/// Verify family-C parameters against both recursions, the per-level mass
/// bound, and monotone ordering within and across levels.
pub fn verify_c(params: &ParamsC) -> VerifyCReport {
    let mut w2_violations = Vec::new();
    let mut w3_violations = Vec::new();
    let mut mass_ok = true;
    let mut ordering_ok = true;
    let mut prev_top: Option<BigInt> = None;
    for level in &params.levels {
        let m_rat = Rational::from_integer(BigInt::from(level.m));
        let top = big_to_rat(level.ns.last().unwrap());
        if let Some(p) = &prev_top {
            if &level.ns[0] <= p {
                ordering_ok = false;
            }
        }
        for pair in level.ns.windows(2) {
            if pair[1] <= pair[0] {
                ordering_ok = false;
            }
        }
        for (j, (n, p)) in level.ns.iter().zip(&level.ps).enumerate() {
            let n_rat = big_to_rat(n);
            let lhs = p * &n_rat * &n_rat;
            let rhs = &m_rat * &top;
            if lhs != rhs {
                w2_violations.push(RecursionViolation { m: level.m, j: j + 1, lhs, rhs });
            }
            if j >= 1 {
                let lhs = p * big_to_rat(&level.ns[j - 1]);
                if lhs != params.eps {
                    w3_violations.push(RecursionViolation {
                        m: level.m,
                        j: j + 1,
                        lhs,
                        rhs: params.eps.clone(),
                    });
                }
            }
        }
        let mass: Rational = level.ps.iter().cloned().sum();
        if mass >= params.delta {
            mass_ok = false;
        }
        prev_top = Some(level.ns.last().unwrap().clone());
    }
    VerifyCReport {
        w2_violations,
        w3_violations,
        mass_ok,
        ordering_ok,
    }
}

/// Parameters of family A: the per-index scale sequence `N_alpha` with
/// masses `alpha_k = 1/N_alpha_k`, dyadic depth, and the separation factor
/// standing in for the disjoint-interval requirement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamsA {
    pub m_max: u32,
    pub depth: u32,
    pub n_alpha: Vec<BigInt>,
    pub sep_factor: BigInt,
}

pub fn default_separation_factor() -> BigInt {
    BigInt::from(10_000u32)
}

/// Number of `N_alpha` entries family A needs through level `m_max`
/// (indices `k = 2^m + j`, `j = 1..2^m`, `m = 1..m_max`).
pub fn a_levels_needed(m_max: u32) -> usize {
    (1usize << (m_max + 1)) - 2
}

/// Gliding-hump family A over the depth-`depth` dyadic partition.
///
/// Component `x` carries, for each level `m <= m_max`, the symmetric pair
/// `+-N_alpha[k]` with mass `1/(2 N_alpha[k])` at `k = 2^m + j^(m)(x)`. The
/// disjointness of the per-scale windows is enforced by the checkable
/// surrogate that consecutive scales are separated by `sep_factor`.
pub fn build_a(
    m_max: u32,
    depth: u32,
    n_alpha: &[BigInt],
    sep_factor: &BigInt,
) -> Result<(ParamsA, MixingFamily), CounterexampleError> {
    assert!(m_max >= 1);
    if depth < m_max {
        return Err(CounterexampleError::DepthExceeded { depth, m_max });
    }
    let needed = a_levels_needed(m_max);
    if n_alpha.len() < needed {
        return Err(CounterexampleError::InsufficientLevels {
            needed,
            got: n_alpha.len(),
        });
    }
    if !n_alpha[0].is_positive() {
        return Err(CounterexampleError::NotIncreasing);
    }
    for pair in n_alpha.windows(2) {
        if pair[1] <= pair[0] {
            return Err(CounterexampleError::NotIncreasing);
        }
        if &pair[1] < &(sep_factor * &pair[0]) {
            return Err(CounterexampleError::SeparationViolated(
                pair[0].to_string(),
                pair[1].to_string(),
            ));
        }
    }
    let total_alpha: Rational = n_alpha
        .iter()
        .map(|n| Rational::new(BigInt::one(), n.clone()))
        .sum();
    if total_alpha >= Rational::one() {
        return Err(CounterexampleError::MassOverflow);
    }
    let params = ParamsA {
        m_max,
        depth,
        n_alpha: n_alpha.to_vec(),
        sep_factor: sep_factor.clone(),
    };
    let family = assemble_family(m_max, depth, "family-A", |m, j| {
        // Global index k = 2^m + (j+1); the slice starts at k = 3.
        let k = (1usize << m) + j + 1;
        let n = params.n_alpha[k - 3].clone();
        let p = Rational::new(BigInt::one(), n.clone());
        (n, p)
    });
    Ok((params, family))
}

/// Assemble a dyadic family: `2^depth` equally weighted components, where
/// component `i` carries at each level `m` the symmetric pair from window
/// `j^(m)(i) = 1 + floor(i / 2^(depth-m))`, plus the remaining mass at zero.
fn assemble_family(
    m_max: u32,
    depth: u32,
    label: &str,
    window: impl Fn(u32, usize) -> (BigInt, Rational),
) -> MixingFamily {
    let components = 1usize << depth;
    let weight = Rational::new(BigInt::one(), BigInt::from(components as u64));
    let mut entries = Vec::with_capacity(components);
    for i in 0..components {
        let mut atoms: Vec<(Rational, Rational)> = Vec::with_capacity(2 * m_max as usize + 1);
        let mut used = Rational::zero();
        for m in 1..=m_max {
            let j = i >> (depth - m);
            let (n, p) = window(m, j);
            let half = &p / Rational::from_integer(2.into());
            atoms.push((big_to_rat(&n), half.clone()));
            atoms.push((-big_to_rat(&n), half));
            used += p;
        }
        atoms.push((Rational::zero(), Rational::one() - used));
        let d = DiscreteDistribution::new(atoms)
            .expect("constructed component masses are positive and sum to one");
        entries.push((weight.clone(), d));
    }
    MixingFamily::new(entries, label).expect("equal weights sum to one")
}

fn window_law(n: &BigInt, p: &Rational) -> DiscreteDistribution {
    let half = p / Rational::from_integer(2.into());
    DiscreteDistribution::new(vec![
        (-big_to_rat(n), half.clone()),
        (Rational::zero(), Rational::one() - p),
        (big_to_rat(n), half),
    ])
    .expect("window law is valid for 0 < p < 1")
}

/// Thresholds and masses of one C level as exact rationals:
/// `N_j = top * ratio^e_j`, `p_j = m * top / N_j^2`, for `j = 1..2^m`.
fn level_c_numbers(m: u32, ratio: &Rational, top: &Rational) -> Vec<(Rational, Rational)> {
    let m_rat = Rational::from_integer(BigInt::from(m));
    (1..=(1u64 << m))
        .map(|j| {
            let e = (1u64 << ((1u64 << m) - j)) - 1;
            let n = top * pow_rational(ratio, e);
            let p = &m_rat * top / (&n * &n);
            (n, p)
        })
        .collect()
}

fn pow_rational(r: &Rational, e: u64) -> Rational {
    let mut acc = Rational::one();
    let mut base = r.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

fn pow_bigint(b: &BigInt, e: u64) -> BigInt {
    let mut acc = BigInt::one();
    let mut base = b.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

/// Largest integer `k` with `k <= a / b` for positive rationals.
fn floor_div_ratio(a: &Rational, b: &Rational) -> BigInt {
    let q = a / b;
    q.numer().div_floor(q.denom())
}

/// Unified, bignum-safe serialized form of any counterexample parameter set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CounterexampleParams {
    A(ParamsA),
    B(ParamsB),
    C(ParamsC),
    Oscillator(OscillatorParams),
}

#[derive(Serialize, Deserialize)]
struct LevelWire {
    m: u32,
    n: Vec<String>,
    p: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    guard: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct ParamsWire {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    m_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sep_factor: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_alpha: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_seq: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<LevelWire>>,
}

impl Serialize for CounterexampleParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = match self {
            CounterexampleParams::A(a) => ParamsWire {
                kind: "A".into(),
                m_max: Some(a.m_max),
                depth: Some(a.depth),
                eps: None,
                delta: None,
                sep_factor: Some(a.sep_factor.to_string()),
                n_alpha: Some(a.n_alpha.iter().map(|n| n.to_string()).collect()),
                n_seq: None,
                levels: None,
            },
            CounterexampleParams::B(b) => ParamsWire {
                kind: "B".into(),
                m_max: Some(b.levels.len() as u32),
                depth: None,
                eps: None,
                delta: None,
                sep_factor: None,
                n_alpha: None,
                n_seq: None,
                levels: Some(
                    b.levels
                        .iter()
                        .map(|l| LevelWire {
                            m: l.m,
                            n: l.ns.iter().map(|n| n.to_string()).collect(),
                            p: vec![format_rational(&l.p)],
                            guard: Some(l.guard.to_string()),
                        })
                        .collect(),
                ),
            },
            CounterexampleParams::C(c) => ParamsWire {
                kind: "C".into(),
                m_max: Some(c.levels.len() as u32),
                depth: None,
                eps: Some(format_rational(&c.eps)),
                delta: Some(format_rational(&c.delta)),
                sep_factor: None,
                n_alpha: None,
                n_seq: None,
                levels: Some(
                    c.levels
                        .iter()
                        .map(|l| LevelWire {
                            m: l.m,
                            n: l.ns.iter().map(|n| n.to_string()).collect(),
                            p: l.ps.iter().map(format_rational).collect(),
                            guard: None,
                        })
                        .collect(),
                ),
            },
            CounterexampleParams::Oscillator(o) => ParamsWire {
                kind: "oscillator".into(),
                m_max: None,
                depth: None,
                eps: None,
                delta: None,
                sep_factor: None,
                n_alpha: None,
                n_seq: Some(o.n_seq.iter().map(|n| n.to_string()).collect()),
                levels: None,
            },
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CounterexampleParams {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let wire = ParamsWire::deserialize(deserializer)?;
        let parse_big = |s: &str| -> Result<BigInt, D::Error> {
            s.parse().map_err(|_| D::Error::custom(format!("bad integer `{s}`")))
        };
        let parse_rat =
            |s: &str| -> Result<Rational, D::Error> { parse_rational(s).map_err(D::Error::custom) };
        match wire.kind.as_str() {
            "A" => {
                let n_alpha = wire
                    .n_alpha
                    .ok_or_else(|| D::Error::missing_field("n_alpha"))?
                    .iter()
                    .map(|s| parse_big(s))
                    .collect::<Result<_, _>>()?;
                Ok(CounterexampleParams::A(ParamsA {
                    m_max: wire.m_max.ok_or_else(|| D::Error::missing_field("m_max"))?,
                    depth: wire.depth.ok_or_else(|| D::Error::missing_field("depth"))?,
                    n_alpha,
                    sep_factor: parse_big(
                        &wire
                            .sep_factor
                            .ok_or_else(|| D::Error::missing_field("sep_factor"))?,
                    )?,
                }))
            }
            "B" => {
                let levels = wire
                    .levels
                    .ok_or_else(|| D::Error::missing_field("levels"))?
                    .into_iter()
                    .map(|l| {
                        let ns = l.ns_parsed(parse_big)?;
                        let p = parse_rat(l.p.first().ok_or_else(|| D::Error::custom("empty p"))?)?;
                        let guard =
                            parse_big(&l.guard.ok_or_else(|| D::Error::missing_field("guard"))?)?;
                        Ok(LevelB { m: l.m, p, ns, guard })
                    })
                    .collect::<Result<_, D::Error>>()?;
                Ok(CounterexampleParams::B(ParamsB { levels }))
            }
            "C" => {
                let levels = wire
                    .levels
                    .ok_or_else(|| D::Error::missing_field("levels"))?
                    .into_iter()
                    .map(|l| {
                        let ns = l.ns_parsed(parse_big)?;
                        let ps = l.p.iter().map(|s| parse_rat(s)).collect::<Result<_, _>>()?;
                        Ok(LevelC { m: l.m, ns, ps })
                    })
                    .collect::<Result<_, D::Error>>()?;
                Ok(CounterexampleParams::C(ParamsC {
                    eps: parse_rat(&wire.eps.ok_or_else(|| D::Error::missing_field("eps"))?)?,
                    delta: parse_rat(
                        &wire.delta.ok_or_else(|| D::Error::missing_field("delta"))?,
                    )?,
                    levels,
                }))
            }
            "oscillator" => {
                let n_seq = wire
                    .n_seq
                    .ok_or_else(|| D::Error::missing_field("n_seq"))?
                    .iter()
                    .map(|s| parse_big(s))
                    .collect::<Result<_, _>>()?;
                Ok(CounterexampleParams::Oscillator(OscillatorParams { n_seq }))
            }
            other => Err(D::Error::custom(format!("unknown kind `{other}`"))),
        }
    }
}

impl LevelWire {
    fn ns_parsed<E>(&self, parse_big: impl Fn(&str) -> Result<BigInt, E>) -> Result<Vec<BigInt>, E> {
        self.n.iter().map(|s| parse_big(s)).collect()
    }
}
