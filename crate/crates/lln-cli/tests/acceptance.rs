//! Acceptance suite: one test per criterion, each printing a PASS line when
//! its checks clear. Exact criteria assert rational equality with no
//! tolerance; Monte Carlo criteria compare one-sided against confidence
//! intervals so that sampling noise cannot flake them.
//!
//! Run with `cargo test -p lln-cli --test acceptance -- --nocapture` to see
//! the per-criterion lines.

use std::collections::BTreeSet;
use std::process::Command;

use num_bigint::BigInt;

use lln_core::counterexample::{build_a, build_b, build_c, verify_b, verify_c};
use lln_core::dist::{DiscreteDistribution, MixingFamily, TailConvention};
use lln_core::exch::{classify_exchangeable, cond_stat, StatKind};
use lln_core::feller::{
    check_identity_inverse, check_identity_parts, classify_classical, delta_bound_witness,
    feller_profile, geometric_grid, Verdict,
};
use lln_core::mc::{
    estimate_pi_conditional, l1_under_q, measure_change_density, verify_feller_bound,
    verify_symmetric_lower_bound, PartitionModel, Seed,
};
use lln_core::rational::{rat, rat_int, Rational};

fn pass(criterion: &str, detail: &str) {
    println!("acceptance {criterion}: PASS — {detail}");
}

fn pow10(e: u32) -> BigInt {
    (0..e).fold(BigInt::from(1u32), |acc, _| acc * 10)
}

/// Scale sequence for family A with consecutive ratios of 10^4.
fn family_a_scales() -> Vec<BigInt> {
    [2u32, 6, 10, 14, 18, 22].iter().map(|&e| pow10(e)).collect()
}

/// Deterministic randomized suite: up to 12 atoms, rational masses, values
/// `z/d` with `|z| <= 60` and `d` in {1, 2, 4}.
fn random_dist(seed: Seed, idx: u64) -> DiscreteDistribution {
    let mut rng = seed.substream(99, idx);
    let n_atoms = 1 + (rng.next_u64() % 12) as usize;
    let denom = [1i64, 2, 4][(rng.next_u64() % 3) as usize];
    let mut numerators = BTreeSet::new();
    while numerators.len() < n_atoms {
        numerators.insert((rng.next_u64() % 121) as i64 - 60);
    }
    let weights: Vec<i64> = (0..n_atoms).map(|_| 1 + (rng.next_u64() % 99) as i64).collect();
    let total: i64 = weights.iter().sum();
    let atoms = numerators
        .into_iter()
        .zip(&weights)
        .map(|(z, &w)| (rat(z, denom), rat(w, total)))
        .collect();
    DiscreteDistribution::new(atoms).expect("suite law is valid")
}

fn suite(count: usize) -> Vec<DiscreteDistribution> {
    let seed = Seed::new(0xACCE97);
    (0..count).map(|i| random_dist(seed, i as u64)).collect()
}

fn m_grid_20() -> Vec<Rational> {
    geometric_grid(&rat(1, 2), &rat_int(2), 20)
}

fn eps_three() -> Vec<Rational> {
    vec![rat(1, 2), rat_int(1), rat_int(2)]
}

#[test]
fn criterion_01_integration_by_parts_identity() {
    let start = std::time::Instant::now();
    let mut checks = 0u32;
    for d in suite(50) {
        for m in m_grid_20() {
            for eps in eps_three() {
                let check = check_identity_parts(&d, &m, &eps, TailConvention::Strict);
                assert!(
                    check.equal,
                    "identity failed at M={m}, eps={eps}: lhs {:?} rhs {:?}",
                    check.lhs, check.rhs
                );
                checks += 1;
            }
        }
    }
    assert_eq!(checks, 3000);
    assert!(start.elapsed().as_secs() < 10, "over the 10 s budget");
    pass("01", &format!("integration-by-parts identity exact on {checks} cases"));
}

#[test]
fn criterion_02_inverse_identity() {
    let start = std::time::Instant::now();
    let mut checks = 0u32;
    for d in suite(50) {
        for m in m_grid_20() {
            for eps in eps_three() {
                let check = check_identity_inverse(&d, &m, &eps, TailConvention::Strict);
                assert!(
                    check.equal,
                    "inverse identity failed at M={m}, eps={eps}: lhs {:?} rhs {:?}",
                    check.lhs, check.rhs
                );
                checks += 1;
            }
        }
    }
    assert_eq!(checks, 3000);
    assert!(start.elapsed().as_secs() < 10, "over the 10 s budget");
    pass("02", &format!("inverse identity exact on {checks} cases"));
}

#[test]
fn criterion_03_rho_combination_identity() {
    let start = std::time::Instant::now();
    let mut checks = 0u32;
    // Classical side on the randomized suite.
    for d in suite(50) {
        for t in m_grid_20() {
            for eps in eps_three() {
                let p = feller_profile(&d, &t, &eps, TailConvention::Strict);
                assert_eq!(p.rho, &eps * &eps * &p.tau + &p.sigma);
                checks += 1;
            }
        }
    }
    // Conditional side, componentwise, on all constructed families.
    let (_, fam_b) = build_b(3);
    let (_, fam_c) = build_c(2, &rat(1, 2), &rat(1, 10), None).expect("family C builds");
    let n_alpha = family_a_scales();
    let (_, fam_a) = build_a(2, 2, &n_alpha, &BigInt::from(10_000u32)).expect("family A builds");
    for family in [&fam_b, &fam_c, &fam_a] {
        for t in [rat_int(5), rat_int(40), rat_int(1_000_000)] {
            for eps in eps_three() {
                let tail = cond_stat(family, StatKind::Tail, &t, &eps, TailConvention::Strict);
                let second = cond_stat(family, StatKind::Second, &t, &eps, TailConvention::Strict);
                let rho = cond_stat(family, StatKind::Rho, &t, &eps, TailConvention::Strict);
                for i in 0..family.len() {
                    assert_eq!(
                        rho.values[i],
                        &eps * &eps * &tail.values[i] + &second.values[i],
                        "component {i} at t={t}, eps={eps}"
                    );
                    checks += 1;
                }
            }
        }
    }
    assert!(start.elapsed().as_secs() < 10, "over the 10 s budget");
    pass(
        "03",
        &format!("rho = eps^2 tau + sigma exact on {checks} classical and componentwise cases"),
    );
}

#[test]
fn criterion_04_delta_bound_witness() {
    let start = std::time::Instant::now();
    // Geometric N grid to 2^16; |mean| <= 60 so eta = 1/10 stabilizes by
    // N = 36000 at the latest.
    let grid = geometric_grid(&rat_int(1), &rat_int(2), 17);
    let mut found = 0u32;
    for (i, d) in suite(50).iter().enumerate() {
        for eta in [rat(1, 10), rat_int(1)] {
            let report = delta_bound_witness(d, &eta, &grid).unwrap();
            let witness = report
                .witness
                .unwrap_or_else(|| panic!("no witness for suite[{i}] at eta={eta}"));
            // Zero violations at or beyond the witness.
            assert!(
                report.violations.iter().all(|v| *v < witness),
                "violation past witness for suite[{i}]"
            );
            found += 1;
        }
    }
    assert_eq!(found, 100);
    assert!(start.elapsed().as_secs() < 10, "over the 10 s budget");
    pass("04", "witness found for every suite law at eta in {1/10, 1}, no violations past it");
}

#[test]
fn criterion_05_family_c_exact_construction() {
    let start = std::time::Instant::now();
    // Pinned scale 160 reproduces the worked parameters exactly.
    let (params, _) = build_c(1, &rat(1, 2), &rat(1, 10), Some(&[BigInt::from(160u32)]))
        .expect("scale 160 is feasible");
    let level = &params.levels[0];
    assert_eq!(level.ns, vec![BigInt::from(80u32), BigInt::from(160u32)]);
    assert_eq!(level.ps, vec![rat(1, 40), rat(1, 160)]);
    let report = verify_c(&params);
    assert!(report.passed(), "{report:?}");
    // The second recursion explicitly: p_2 N_1 = eps.
    assert_eq!(&level.ps[1] * rat_int(80), rat(1, 2));

    // m = 2 builds and verifies with bignums.
    let (params2, fam2) = build_c(2, &rat(1, 2), &rat(1, 10), None).expect("m = 2 builds");
    assert!(verify_c(&params2).passed());
    assert_eq!(params2.levels[1].ns.len(), 4);
    assert!(params2.levels[1].ns[0] > *params2.levels[0].ns.last().unwrap());
    assert_eq!(fam2.len(), 4);
    assert!(start.elapsed().as_secs() < 30, "over the 30 s budget");
    pass("05", "family C reproduces N=(80,160), p=(1/40,1/160) at scale 160; m=2 verifies");
}

#[test]
fn criterion_06_family_b_exact_verification() {
    let start = std::time::Instant::now();
    for m_max in 1..=3 {
        let (params, _) = build_b(m_max);
        let report = verify_b(&params);
        assert!(report.passed(), "m_max = {m_max}: {report:?}");
        // tau equals m at every level head, exactly.
        for check in &report.tau_checks {
            assert_eq!(check.value, rat_int(check.m as i64));
        }
        assert!(report.sigma_violations.is_empty());
    }
    assert!(start.elapsed().as_secs() < 30, "over the 30 s budget");
    pass("06", "family B verifies tau = m at level heads and sigma < 2^-m off-window, m <= 3");
}

#[test]
fn criterion_07_feller_bound_monte_carlo() {
    let start = std::time::Instant::now();
    let seed = Seed::new(0xF311);
    let mut cells = 0u32;
    for d in suite(20) {
        for n in [100u64, 1_000, 10_000] {
            for eta in [rat(1, 2), rat_int(1)] {
                let report = verify_feller_bound(&d, n, &eta, 100_000, seed, 4);
                assert!(
                    report.holds,
                    "bound failed at N={n}, eta={eta}: ci_low {} vs rhs {:?}",
                    report.empirical.ci_low, report.rhs
                );
                cells += 1;
            }
        }
    }
    assert_eq!(cells, 120);
    assert!(start.elapsed().as_secs() < 300, "over the 5 min budget");
    pass("07", "empirical pi_N(eta) CI floor below tau_N + sigma_N/eta^2 in 120/120 cells");
}

/// Full-enumeration oracle: `P(|S_N| >= N)` for the +-1 coin by walking all
/// 2^N sign paths.
fn coin_barrier_probability(n: u32) -> Rational {
    let mut hits = 0u64;
    for mask in 0u64..(1u64 << n) {
        let plus = mask.count_ones() as i64;
        let s = 2 * plus - n as i64;
        if s.abs() >= n as i64 {
            hits += 1;
        }
    }
    rat(hits as i64, 1i64 << n)
}

#[test]
fn criterion_08_symmetric_lower_bound_coverage() {
    let start = std::time::Instant::now();
    let coin = DiscreteDistribution::new(vec![(rat_int(-1), rat(1, 2)), (rat_int(1), rat(1, 2))])
        .unwrap();
    for n in [4u32, 8] {
        let exact = coin_barrier_probability(n);
        // Freeze the enumeration oracle's values.
        let expected = if n == 4 { rat(1, 8) } else { rat(1, 128) };
        assert_eq!(exact, expected);
        let exact_f = if n == 4 { 0.125 } else { 1.0 / 128.0 };

        let mut covered = 0u32;
        for trial in 0..100u64 {
            let report = verify_symmetric_lower_bound(
                &coin,
                n as u64,
                100_000,
                Seed::new(1_000 + trial),
                2,
            )
            .unwrap();
            if report.empirical.ci_low <= exact_f && exact_f <= report.empirical.ci_high {
                covered += 1;
            }
            assert!(report.ratio > 0.0, "ratio not strictly positive at N={n}");
        }
        assert!(covered >= 95, "N={n}: only {covered}/100 trials covered the exact value");
    }
    assert!(start.elapsed().as_secs() < 120, "over the 2 min budget");
    pass("08", "coin pi_N matches the enumeration oracle within 99% CI in >=95/100 seeds; ratio positive");
}

#[test]
fn criterion_09_exchangeable_contrast() {
    let start = std::time::Instant::now();
    let theta = rat(1, 2);
    let prob = rat(1, 5);

    // Family B (m <= 3), nonstrict tail, grid = level heads + inner guards.
    let (params_b, fam_b) = build_b(3);
    let grid_b: Vec<Rational> = vec![
        Rational::from_integer(params_b.levels[0].ns[0].clone()),
        Rational::from_integer(params_b.levels[0].guard.clone()),
        Rational::from_integer(params_b.levels[1].ns[0].clone()),
        Rational::from_integer(params_b.levels[1].guard.clone()),
        Rational::from_integer(params_b.levels[2].ns[0].clone()),
    ];
    let report_b = classify_exchangeable(
        &fam_b,
        &[rat_int(1)],
        &grid_b,
        &theta,
        &prob,
        2,
        TailConvention::Nonstrict,
    )
    .unwrap();
    let sigma_b = &report_b.series["Sigma[eps=1]"];
    let tail_b = &report_b.series["T[eps=1]"];
    assert_eq!(
        sigma_b,
        &vec![rat(1, 2), rat_int(0), rat(1, 4), rat_int(0), rat(1, 8)],
        "family B Sigma exceedance"
    );
    assert!(tail_b.iter().all(|p| p == &rat_int(1)), "family B T exceedance {tail_b:?}");
    assert_eq!(report_b.verdicts["Sigma[eps=1]"], Verdict::TendsToZero);
    assert_eq!(report_b.verdicts["T[eps=1]"], Verdict::StaysBoundedAway);

    // Family C (m <= 2), strict tail, grid = all level thresholds; the
    // mirrored verdicts.
    let (params_c, fam_c) = build_c(2, &rat(1, 2), &rat(1, 10), None).unwrap();
    let grid_c: Vec<Rational> = params_c
        .levels
        .iter()
        .flat_map(|level| level.ns.iter().cloned().map(Rational::from_integer))
        .collect();
    let report_c = classify_exchangeable(
        &fam_c,
        &[rat_int(1)],
        &grid_c,
        &theta,
        &prob,
        4,
        TailConvention::Strict,
    )
    .unwrap();
    let tail_c = &report_c.series["T[eps=1]"];
    let sigma_c = &report_c.series["Sigma[eps=1]"];
    assert_eq!(
        tail_c,
        &vec![rat(3, 4), rat(1, 4), rat_int(0), rat_int(0), rat_int(0), rat_int(0)],
        "family C T exceedance"
    );
    assert_eq!(
        sigma_c,
        &vec![rat(1, 2), rat_int(1), rat(1, 4), rat(1, 2), rat(3, 4), rat_int(1)],
        "family C Sigma exceedance"
    );
    assert_eq!(report_c.verdicts["T[eps=1]"], Verdict::TendsToZero);
    assert_eq!(report_c.verdicts["Sigma[eps=1]"], Verdict::StaysBoundedAway);

    // Family A (depth 2): conditional estimates light up at a component's
    // own scale while the aggregate stays small off-level.
    let n_alpha = family_a_scales();
    let (_, fam_a) = build_a(2, 2, &n_alpha, &BigInt::from(10_000u32)).unwrap();
    let seed = Seed::new(0xA11A);
    let off_level = estimate_pi_conditional(&fam_a, 10_000, &rat(1, 2), 100_000, seed, 0, 4);
    assert!(
        off_level.aggregate.value < 0.05,
        "aggregate at off-level N: {}",
        off_level.aggregate.value
    );
    let own_level = estimate_pi_conditional(&fam_a, 100, &rat(1, 2), 100_000, seed, 100, 4);
    let best = own_level
        .components
        .iter()
        .map(|est| est.value)
        .fold(0.0f64, f64::max);
    assert!(best > 0.2, "own-level conditional estimate only reached {best}");

    assert!(start.elapsed().as_secs() < 300, "over the 5 min budget");
    pass("09", "families B/C show mirrored exceedance verdicts; family A contrasts conditional vs aggregate");
}

#[test]
fn criterion_10_degeneracy_reduction() {
    let start = std::time::Instant::now();
    let grid = geometric_grid(&rat_int(1), &rat_int(4), 10);
    let eps = vec![rat(1, 2), rat_int(1)];
    let th = rat(1, 100);
    let pairs = [
        ("T", "tau"),
        ("Sigma", "sigma"),
        ("V", "v"),
        ("R", "rho"),
        ("avg_T", "avg_tau"),
        ("tail_Sigma", "tail_sigma"),
        ("tail_V", "tail_v"),
    ];
    for d in suite(60) {
        let fam = MixingFamily::degenerate(d.clone(), "one");
        let classical =
            classify_classical(&d, &eps, &grid, &th, 5, TailConvention::Strict).unwrap();
        let exch =
            classify_exchangeable(&fam, &eps, &grid, &th, &th, 5, TailConvention::Strict).unwrap();
        for eps_tag in ["1/2", "1"] {
            for (e_name, c_name) in pairs {
                let e_key = format!("{e_name}[eps={eps_tag}]");
                let c_key = format!("{c_name}[eps={eps_tag}]");
                assert_eq!(
                    exch.verdicts[&e_key], classical.verdicts[&c_key],
                    "verdict mismatch on {e_key}"
                );
                // Identical exact statistic values: the single component's
                // series equals the classical series pointwise.
                for (i, classical_value) in classical.series[&c_key].iter().enumerate() {
                    assert_eq!(&exch.component_values[&e_key][i][0], classical_value);
                }
            }
        }
    }
    assert!(start.elapsed().as_secs() < 10, "over the 10 s budget");
    pass("10", "one-entry mixtures reproduce classical verdicts and exact statistics on 60 laws");
}

#[test]
fn criterion_11_measure_change_sizing() {
    let start = std::time::Instant::now();
    // Ten cells with masses 2^-1 .. 2^-9, 2^-9; humps growing like 4^n.
    let mut cells: Vec<(Rational, String)> = (1..=9)
        .map(|i| (rat(1, 1i64 << i), format!("c{i}")))
        .collect();
    cells.push((rat(1, 512), "c10".into()));
    let prefixes: Vec<usize> = (1..=10).collect();
    let values: Vec<Vec<Rational>> = (1..=10)
        .map(|n| {
            (1..=10)
                .map(|i| if i == n { rat_int(4i64.pow(n as u32)) } else { rat_int(0) })
                .collect()
        })
        .collect();

    // Alphas sized exactly at the 1/j^2 cap.
    let mut sized_alphas = Vec::new();
    for (j, &prefix) in prefixes.iter().enumerate() {
        let sup_norm: Rational = values
            .iter()
            .map(|row| {
                row[..prefix]
                    .iter()
                    .zip(&cells[..prefix])
                    .map(|(v, (m, _))| {
                        (rat_int(1) + if v < &rat_int(0) { -v.clone() } else { v.clone() }) * m
                    })
                    .sum::<Rational>()
            })
            .max()
            .unwrap();
        sized_alphas.push(rat(1, ((j + 1) * (j + 1)) as i64) / sup_norm);
    }
    let inv_square_sum: Rational = (1..=10i64).map(|j| rat(1, j * j)).sum();

    let sized = PartitionModel {
        cells: cells.clone(),
        prefixes: prefixes.clone(),
        alphas: sized_alphas,
    };
    let sized_result = l1_under_q(&sized, &values).unwrap();
    assert!(sized_result.sizing_ok);
    let sized_bound = &inv_square_sum / &measure_change_density(&sized).unwrap().normalizer;
    assert!(
        sized_result.sup < sized_bound,
        "sized sup {:?} not below bound {:?}",
        sized_result.sup,
        sized_bound
    );

    let uniform = PartitionModel {
        cells,
        prefixes,
        alphas: vec![rat(1, 10); 10],
    };
    let uniform_result = l1_under_q(&uniform, &values).unwrap();
    assert!(!uniform_result.sizing_ok);
    let uniform_bound = &inv_square_sum / &measure_change_density(&uniform).unwrap().normalizer;
    assert!(
        uniform_result.sup > uniform_bound,
        "uniform sup {:?} not above bound {:?}",
        uniform_result.sup,
        uniform_bound
    );
    assert!(start.elapsed().as_secs() < 1, "over the 1 s budget");
    pass("11", "alpha-sized L1(Q) sup under the 1/j^2 bound; uniform alphas exceed it");
}

#[test]
fn criterion_12_cli_reproducibility() {
    let bin = env!("CARGO_BIN_EXE_lln-lab");
    let dir = std::env::temp_dir().join("lln-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let dist_path = dir.join("two_point.json");
    std::fs::write(
        &dist_path,
        r#"{"atoms":[["-10","1/20"],["0","9/10"],["10","1/20"]]}"#,
    )
    .unwrap();

    let run = |subcmd: &[&str], out: &std::path::Path, threads: &str| {
        let status = Command::new(bin)
            .args(subcmd)
            .args(["--threads", threads, "--out"])
            .arg(out)
            .status()
            .expect("binary runs");
        assert!(status.success(), "{subcmd:?} failed");
    };

    let sim_args = [
        "simulate",
        "--dist",
        dist_path.to_str().unwrap(),
        "--N",
        "100,1000",
        "--eps",
        "1/2,1",
        "--reps",
        "5000",
        "--seed",
        "424242",
    ];
    let a = dir.join("sim_a.csv");
    let b = dir.join("sim_b.csv");
    run(&sim_args, &a, "1");
    run(&sim_args, &b, "4");
    assert_eq!(
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        "simulate output differs across thread counts"
    );

    let bounds_args = [
        "bounds",
        "--dist",
        dist_path.to_str().unwrap(),
        "--check",
        "feller",
        "--N",
        "100",
        "--eps",
        "1/2,1",
        "--reps",
        "5000",
        "--seed",
        "77",
    ];
    let c = dir.join("bounds_a.csv");
    let d = dir.join("bounds_b.csv");
    run(&bounds_args, &c, "1");
    run(&bounds_args, &d, "3");
    assert_eq!(
        std::fs::read(&c).unwrap(),
        std::fs::read(&d).unwrap(),
        "bounds output differs across thread counts"
    );

    // And identical seeds rerun byte-identically at the same thread count.
    let e = dir.join("sim_c.csv");
    run(&sim_args, &e, "4");
    assert_eq!(std::fs::read(&b).unwrap(), std::fs::read(&e).unwrap());

    pass("12", "simulate/bounds CSVs byte-identical across reruns and thread counts");
}
