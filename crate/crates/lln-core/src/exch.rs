//! Conditional statistics over finite mixing families and the exchangeable
//! weak-law condition checkers.
//!
//! With the tail sigma-algebra modeled as the finite partition induced by the
//! mixture entries, every conditional statistic is just the classical one per
//! component, and "tends to zero in probability" turns into exact accounting:
//! the probability that the statistic exceeds a threshold is the total weight
//! of exceeding components.

use std::collections::BTreeMap;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::dist::{DiscreteDistribution, MixingFamily, TailConvention};
use crate::feller::{
    avg_tau, feller_profile, tail_sigma_integral, tail_v_integral, verdict_for, FellerError,
    Verdict,
};
use crate::rational::{format_rational, Rational};

/// Which scalar statistic a conditional slice carries. The variants track the
/// profile fields: scaled tail (`tau`), scaled truncated second moment
/// (`sigma`), scaled truncated variance (`v`), their combination (`rho`) and
/// the truncated mean used as corrector (`delta`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    Tail,
    Second,
    Var,
    Rho,
    Mean,
}

impl StatKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StatKind::Tail => "T",
            StatKind::Second => "Sigma",
            StatKind::Var => "V",
            StatKind::Rho => "R",
            StatKind::Mean => "Delta",
        }
    }
}

/// One conditional statistic at `(t, eps)`: a value per mixture entry plus
/// the entry weights, which together describe the full law of the
/// tail-measurable random variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondStatSlice {
    pub t: Rational,
    pub eps: Rational,
    pub stat_kind: StatKind,
    pub values: Vec<Rational>,
    pub weights: Vec<Rational>,
}

/// Componentwise classical statistic of the family at `(t, eps)`.
pub fn cond_stat(
    family: &MixingFamily,
    stat_kind: StatKind,
    t: &Rational,
    eps: &Rational,
    conv: TailConvention,
) -> CondStatSlice {
    let values = family
        .components()
        .map(|d| {
            let p = feller_profile(d, t, eps, conv);
            match stat_kind {
                StatKind::Tail => p.tau,
                StatKind::Second => p.sigma,
                StatKind::Var => p.v,
                StatKind::Rho => p.rho,
                StatKind::Mean => p.delta,
            }
        })
        .collect();
    CondStatSlice {
        t: t.clone(),
        eps: eps.clone(),
        stat_kind,
        values,
        weights: family.weights().cloned().collect(),
    }
}

/// `P(stat > threshold)`: total weight of entries whose value strictly
/// exceeds the threshold. Exact, monotone nonincreasing in the threshold.
pub fn prob_exceed(slice: &CondStatSlice, threshold: &Rational) -> Rational {
    slice
        .values
        .iter()
        .zip(&slice.weights)
        .filter(|(v, _)| *v > threshold)
        .map(|(_, w)| w.clone())
        .sum()
}

/// Conditional corrector slice: per-component truncated mean at `t = N`.
pub fn cond_corrector(family: &MixingFamily, n: u64, eps: &Rational) -> CondStatSlice {
    assert!(n >= 1, "N must be at least 1");
    cond_stat(
        family,
        StatKind::Mean,
        &Rational::from_integer(n.into()),
        eps,
        TailConvention::Strict,
    )
}

/// Exceedance series of `|Delta_N| / sqrt(N) > theta` along an `N` grid,
/// with the trailing-window verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectorGrowthReport {
    pub grid: Vec<u64>,
    pub exceedance: Vec<Rational>,
    pub verdict: Verdict,
}

/// Checks the corrector growth claim `Delta_N / sqrt(N) -> 0` in probability.
///
/// The comparison is squared (`Delta_N^2 > theta^2 N`) so that everything
/// stays rational.
pub fn corrector_growth_check(
    family: &MixingFamily,
    n_grid: &[u64],
    theta: &Rational,
    prob_threshold: &Rational,
    window: usize,
) -> Result<CorrectorGrowthReport, FellerError> {
    assert!(theta.is_positive(), "theta must be positive");
    if n_grid.is_empty() {
        return Err(FellerError::EmptyGrid);
    }
    let theta_sq = theta * theta;
    let mut exceedance = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let slice = cond_corrector(family, n, &Rational::from_integer(1.into()));
        let bound = &theta_sq * Rational::from_integer(n.into());
        let p: Rational = slice
            .values
            .iter()
            .zip(&slice.weights)
            .filter(|(v, _)| *v * *v > bound)
            .map(|(_, w)| w.clone())
            .sum();
        exceedance.push(p);
    }
    let verdict = verdict_for(&exceedance, prob_threshold, window);
    Ok(CorrectorGrowthReport {
        grid: n_grid.to_vec(),
        exceedance,
        verdict,
    })
}

/// Exceedance-probability series and verdicts for the exchangeable weak-law
/// conditions, plus the underlying per-component values for the long format.
///
/// For each `eps` and each condition the series holds
/// `P(stat_t > stat_threshold)` along the grid; verdicts apply the
/// trailing-window rule against `prob_threshold`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchReport {
    pub grid: Vec<Rational>,
    pub series: BTreeMap<String, Vec<Rational>>,
    pub verdicts: BTreeMap<String, Verdict>,
    /// Per-component values behind each series, indexed like `series`;
    /// `component_values[name][grid_idx][component_idx]`.
    pub component_values: BTreeMap<String, Vec<Vec<Rational>>>,
    pub weights: Vec<Rational>,
    pub stat_threshold: Rational,
    pub prob_threshold: Rational,
    pub window: usize,
}

/// Names of the exchangeable condition series, in report order: the four
/// point statistics and the three integral transforms.
pub const EXCHANGEABLE_SERIES: [&str; 7] =
    ["T", "Sigma", "V", "R", "avg_T", "tail_Sigma", "tail_V"];

/// Evaluate every exchangeable weak-law condition on a grid.
///
/// Point statistics and the exact componentwise integral transforms are
/// thresholded at `stat_threshold`; the resulting exceedance-probability
/// series get the same trailing-window verdict rule as the classical
/// checkers, against `prob_threshold`.
pub fn classify_exchangeable(
    family: &MixingFamily,
    eps_list: &[Rational],
    t_grid: &[Rational],
    stat_threshold: &Rational,
    prob_threshold: &Rational,
    window: usize,
    conv: TailConvention,
) -> Result<ExchReport, FellerError> {
    if t_grid.is_empty() || eps_list.is_empty() {
        return Err(FellerError::EmptyGrid);
    }
    let weights: Vec<Rational> = family.weights().cloned().collect();
    let mut series = BTreeMap::new();
    let mut component_values = BTreeMap::new();
    for eps in eps_list {
        let mut per_condition: Vec<Vec<Vec<Rational>>> = vec![Vec::new(); 7];
        for t in t_grid {
            let mut columns: Vec<Vec<Rational>> = vec![Vec::new(); 7];
            for d in family.components() {
                let p = feller_profile(d, t, eps, conv);
                columns[0].push(p.tau);
                columns[1].push(p.sigma);
                columns[2].push(p.v);
                columns[3].push(p.rho);
                columns[4].push(avg_tau(d, t, eps, conv));
                columns[5].push(tail_sigma_integral(d, t, eps, conv));
                columns[6].push(tail_v_integral(d, t, eps, conv));
            }
            for (acc, col) in per_condition.iter_mut().zip(columns) {
                acc.push(col);
            }
        }
        let eps_tag = format_rational(eps);
        for (name, values) in EXCHANGEABLE_SERIES.iter().zip(per_condition) {
            let key = format!("{name}[eps={eps_tag}]");
            let exceedance: Vec<Rational> = values
                .iter()
                .map(|col| {
                    col.iter()
                        .zip(&weights)
                        .filter(|(v, _)| *v > stat_threshold)
                        .map(|(_, w)| w.clone())
                        .sum()
                })
                .collect();
            series.insert(key.clone(), exceedance);
            component_values.insert(key, values);
        }
    }
    let verdicts = series
        .iter()
        .map(|(k, vals)| (k.clone(), verdict_for(vals, prob_threshold, window)))
        .collect();
    Ok(ExchReport {
        grid: t_grid.to_vec(),
        series,
        verdicts,
        component_values,
        weights,
        stat_threshold: stat_threshold.clone(),
        prob_threshold: prob_threshold.clone(),
        window,
    })
}

/// Lacunary/hereditary statistic: the supremum over a finite list of laws of
/// the classical statistic, one tail class at a time.
pub fn lh_stat(
    laws: &[DiscreteDistribution],
    stat_kind: StatKind,
    t: &Rational,
    eps: &Rational,
    conv: TailConvention,
) -> Rational {
    assert!(!laws.is_empty(), "law list must be non-empty");
    laws.iter()
        .map(|d| {
            let p = feller_profile(d, t, eps, conv);
            match stat_kind {
                StatKind::Tail => p.tau,
                StatKind::Second => p.sigma,
                StatKind::Var => p.v,
                StatKind::Rho => p.rho,
                StatKind::Mean => p.delta,
            }
        })
        .max()
        .expect("non-empty list")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feller::{classify_classical, default_threshold, DEFAULT_WINDOW};
    use crate::rational::{rat, rat_int};

    fn two_point_plus_zero() -> DiscreteDistribution {
        DiscreteDistribution::new(vec![
            (rat_int(-10), rat(1, 20)),
            (rat_int(0), rat(9, 10)),
            (rat_int(10), rat(1, 20)),
        ])
        .unwrap()
    }

    fn pair_family() -> MixingFamily {
        MixingFamily::new(
            vec![
                (rat(1, 2), DiscreteDistribution::point_mass(rat_int(0))),
                (rat(1, 2), two_point_plus_zero()),
            ],
            "pair",
        )
        .unwrap()
    }

    #[test]
    fn cond_stat_componentwise() {
        let fam = pair_family();
        let slice = cond_stat(
            &fam,
            StatKind::Tail,
            &rat_int(5),
            &rat_int(1),
            TailConvention::Strict,
        );
        assert_eq!(slice.values, vec![rat_int(0), rat(1, 2)]);
        assert_eq!(slice.weights, vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn cond_stat_single_component_equals_classical() {
        let d = two_point_plus_zero();
        let fam = MixingFamily::degenerate(d.clone(), "one");
        for kind in [
            StatKind::Tail,
            StatKind::Second,
            StatKind::Var,
            StatKind::Rho,
            StatKind::Mean,
        ] {
            let slice = cond_stat(&fam, kind, &rat_int(7), &rat(1, 2), TailConvention::Strict);
            let p = feller_profile(&d, &rat_int(7), &rat(1, 2), TailConvention::Strict);
            let expected = match kind {
                StatKind::Tail => p.tau,
                StatKind::Second => p.sigma,
                StatKind::Var => p.v,
                StatKind::Rho => p.rho,
                StatKind::Mean => p.delta,
            };
            assert_eq!(slice.values, vec![expected]);
        }
    }

    #[test]
    fn prob_exceed_mass_accounting() {
        let fam = pair_family();
        let slice = cond_stat(
            &fam,
            StatKind::Tail,
            &rat_int(5),
            &rat_int(1),
            TailConvention::Strict,
        );
        assert_eq!(prob_exceed(&slice, &rat(1, 4)), rat(1, 2));
        assert_eq!(prob_exceed(&slice, &rat_int(0)), rat(1, 2));
        assert_eq!(prob_exceed(&slice, &rat_int(9)), rat_int(0));
    }

    #[test]
    fn prob_exceed_monotone_in_threshold() {
        let fam = pair_family();
        let slice = cond_stat(
            &fam,
            StatKind::Rho,
            &rat_int(3),
            &rat_int(1),
            TailConvention::Strict,
        );
        let thresholds = [rat_int(0), rat(1, 10), rat(1, 2), rat_int(1), rat_int(5)];
        let probs: Vec<Rational> = thresholds
            .iter()
            .map(|th| prob_exceed(&slice, th))
            .collect();
        for pair in probs.windows(2) {
            assert!(pair[0] >= pair[1]);
        }
    }

    #[test]
    fn symmetric_components_have_zero_correctors() {
        let fam = pair_family();
        let slice = cond_corrector(&fam, 12, &rat_int(1));
        assert!(slice.values.iter().all(|v| v == &rat_int(0)));
    }

    #[test]
    fn rho_identity_holds_componentwise() {
        let fam = pair_family();
        for t in [rat_int(2), rat_int(11), rat(7, 2)] {
            for eps in [rat(1, 2), rat_int(1), rat_int(2)] {
                let tail = cond_stat(&fam, StatKind::Tail, &t, &eps, TailConvention::Strict);
                let second = cond_stat(&fam, StatKind::Second, &t, &eps, TailConvention::Strict);
                let rho = cond_stat(&fam, StatKind::Rho, &t, &eps, TailConvention::Strict);
                for i in 0..fam.len() {
                    assert_eq!(
                        rho.values[i],
                        &eps * &eps * &tail.values[i] + &second.values[i]
                    );
                }
            }
        }
    }

    #[test]
    fn corrector_growth_point_mass_at_one() {
        // |Delta_N|/sqrt(N) = 1/sqrt(N): exceedance over theta = 1/10 drops
        // to zero exactly once N > 100.
        let fam = MixingFamily::degenerate(DiscreteDistribution::point_mass(rat_int(1)), "one");
        let grid: Vec<u64> = vec![1, 10, 100, 101, 200, 400];
        let report = corrector_growth_check(
            &fam,
            &grid,
            &rat(1, 10),
            &default_threshold(),
            2,
        )
        .unwrap();
        assert_eq!(
            report.exceedance,
            vec![
                rat_int(1),
                rat_int(1),
                rat_int(0),
                rat_int(0),
                rat_int(0),
                rat_int(0)
            ]
        );
        assert_eq!(report.verdict, Verdict::TendsToZero);
    }

    #[test]
    fn corrector_growth_symmetric_is_identically_zero() {
        let fam = pair_family();
        let report = corrector_growth_check(
            &fam,
            &[1, 2, 4, 8],
            &rat(1, 10),
            &default_threshold(),
            2,
        )
        .unwrap();
        assert!(report.exceedance.iter().all(|p| p == &rat_int(0)));
    }

    #[test]
    fn degenerate_family_matches_classical_verdicts() {
        let d = two_point_plus_zero();
        let fam = MixingFamily::degenerate(d.clone(), "one");
        let grid: Vec<Rational> = (0..10).map(|k| rat_int(1 << k)).collect();
        let eps = vec![rat(1, 2), rat_int(1)];
        let th = default_threshold();
        let classical =
            classify_classical(&d, &eps, &grid, &th, DEFAULT_WINDOW, TailConvention::Strict)
                .unwrap();
        let exch = classify_exchangeable(
            &fam,
            &eps,
            &grid,
            &th,
            &th,
            DEFAULT_WINDOW,
            TailConvention::Strict,
        )
        .unwrap();
        // Series names differ (T vs tau); verdicts must line up pairwise.
        let pairs = [
            ("T", "tau"),
            ("Sigma", "sigma"),
            ("V", "v"),
            ("R", "rho"),
            ("avg_T", "avg_tau"),
            ("tail_Sigma", "tail_sigma"),
            ("tail_V", "tail_v"),
        ];
        for eps_tag in ["1/2", "1"] {
            for (e_name, c_name) in pairs {
                let e = &exch.verdicts[&format!("{e_name}[eps={eps_tag}]")];
                let c = &classical.verdicts[&format!("{c_name}[eps={eps_tag}]")];
                assert_eq!(e, c, "{e_name} vs {c_name} at eps={eps_tag}");
            }
        }
    }

    #[test]
    fn integration_by_parts_holds_componentwise() {
        // T_M = 2 * avg T - Sigma_M / eps^2, per component, exactly.
        let fam = pair_family();
        let two = rat_int(2);
        for m in [rat_int(5), rat_int(20), rat(15, 2)] {
            for eps in [rat(1, 2), rat_int(1)] {
                let tail = cond_stat(&fam, StatKind::Tail, &m, &eps, TailConvention::Strict);
                let second = cond_stat(&fam, StatKind::Second, &m, &eps, TailConvention::Strict);
                for (i, d) in fam.components().enumerate() {
                    let avg = avg_tau(d, &m, &eps, TailConvention::Strict);
                    assert_eq!(
                        tail.values[i],
                        &two * avg - &second.values[i] / (&eps * &eps),
                        "component {i} at M={m}, eps={eps}"
                    );
                }
            }
        }
    }

    #[test]
    fn lh_stat_is_max_over_laws() {
        let laws = vec![
            DiscreteDistribution::point_mass(rat_int(0)),
            two_point_plus_zero(),
        ];
        let t = rat_int(5);
        let one = rat_int(1);
        assert_eq!(
            lh_stat(&laws, StatKind::Tail, &t, &one, TailConvention::Strict),
            rat(1, 2)
        );
        // Singleton reduces to the classical statistic.
        let single = vec![two_point_plus_zero()];
        let p = feller_profile(&single[0], &t, &one, TailConvention::Strict);
        assert_eq!(
            lh_stat(&single, StatKind::Tail, &t, &one, TailConvention::Strict),
            p.tau
        );
        // k identical laws equal the common value.
        let triple = vec![
            two_point_plus_zero(),
            two_point_plus_zero(),
            two_point_plus_zero(),
        ];
        assert_eq!(
            lh_stat(&triple, StatKind::Second, &t, &one, TailConvention::Strict),
            p.sigma
        );
    }

    #[test]
    fn lh_rho_sandwiched_by_tail_and_second() {
        // (1/2)(eps^2 T + Sigma) <= R <= eps^2 T + Sigma for the sup-reduced
        // statistics, whatever the law list.
        let laws = vec![
            two_point_plus_zero(),
            DiscreteDistribution::new(vec![(rat_int(2), rat(1, 3)), (rat_int(9), rat(2, 3))])
                .unwrap(),
        ];
        for t in [rat_int(3), rat_int(8), rat_int(25)] {
            for eps in [rat(1, 2), rat_int(1), rat_int(2)] {
                let tail = lh_stat(&laws, StatKind::Tail, &t, &eps, TailConvention::Strict);
                let second = lh_stat(&laws, StatKind::Second, &t, &eps, TailConvention::Strict);
                let rho = lh_stat(&laws, StatKind::Rho, &t, &eps, TailConvention::Strict);
                let combined = &eps * &eps * tail + second;
                assert!(rho <= combined);
                assert!(rat_int(2) * rho >= combined);
            }
        }
    }
}
