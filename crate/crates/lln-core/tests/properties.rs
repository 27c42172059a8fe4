//! Property tests for the exact identities and invariants: these hold for
//! every valid law, not just the worked examples, and rational arithmetic
//! makes them assertable with equality rather than tolerance.

use proptest::prelude::*;

use lln_core::dist::{DiscreteDistribution, MixingFamily, TailConvention};
use lln_core::exch::{classify_exchangeable, cond_stat, prob_exceed, StatKind};
use lln_core::feller::{
    check_identity_inverse, check_identity_parts, classify_classical, default_threshold,
    feller_profile, DEFAULT_WINDOW,
};
use lln_core::rational::{rat, rat_int, Rational};

fn arb_dist() -> impl Strategy<Value = DiscreteDistribution> {
    proptest::collection::btree_set(-100i64..=100, 1..=12).prop_flat_map(|values| {
        let n = values.len();
        proptest::collection::vec(1u32..=99, n).prop_map(move |weights| {
            let total: i64 = weights.iter().map(|&w| w as i64).sum();
            let atoms = values
                .iter()
                .zip(&weights)
                .map(|(&v, &w)| (rat(v, 4), rat(w as i64, total)))
                .collect();
            DiscreteDistribution::new(atoms).expect("normalized masses")
        })
    })
}

fn arb_positive_rat() -> impl Strategy<Value = Rational> {
    (1i64..=64, 1i64..=8).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reconstruction_round_trip(d in arb_dist()) {
        let rebuilt = DiscreteDistribution::new(d.atoms().to_vec()).unwrap();
        prop_assert_eq!(rebuilt, d);
    }

    #[test]
    fn symmetrize_is_negation_invariant(d in arb_dist()) {
        let s = d.symmetrize();
        prop_assert!(s.is_symmetric());
        prop_assert_eq!(s.mean(), rat_int(0));
        let atoms = s.atoms();
        for (v, m) in atoms {
            let neg = atoms.iter().find(|(w, _)| w == &-v).expect("mirror atom");
            prop_assert_eq!(&neg.1, m);
        }
    }

    #[test]
    fn rho_combines_tau_and_sigma(d in arb_dist(), t in arb_positive_rat(), eps in arb_positive_rat()) {
        let p = feller_profile(&d, &t, &eps, TailConvention::Strict);
        prop_assert_eq!(&p.rho, &(&eps * &eps * &p.tau + &p.sigma));
        let q = feller_profile(&d, &t, &eps, TailConvention::Nonstrict);
        prop_assert_eq!(&q.rho, &(&eps * &eps * &q.tau + &q.sigma));
    }

    #[test]
    fn truncated_variance_bounds(d in arb_dist(), t in arb_positive_rat(), eps in arb_positive_rat()) {
        let p = feller_profile(&d, &t, &eps, TailConvention::Strict);
        prop_assert!(p.v >= rat_int(0));
        prop_assert!(p.v <= p.sigma);
    }

    #[test]
    fn integration_by_parts_identity_is_exact(
        d in arb_dist(),
        m in arb_positive_rat(),
        eps in arb_positive_rat(),
    ) {
        let check = check_identity_parts(&d, &m, &eps, TailConvention::Strict);
        prop_assert!(check.equal, "lhs {:?} rhs {:?}", check.lhs, check.rhs);
    }

    #[test]
    fn inverse_identity_is_exact(
        d in arb_dist(),
        m in arb_positive_rat(),
        eps in arb_positive_rat(),
    ) {
        let check = check_identity_inverse(&d, &m, &eps, TailConvention::Strict);
        prop_assert!(check.equal, "lhs {:?} rhs {:?}", check.lhs, check.rhs);
    }

    #[test]
    fn tau_monotone_down_sigma_monotone_up_in_eps(
        d in arb_dist(),
        t in arb_positive_rat(),
        eps in arb_positive_rat(),
        bump in arb_positive_rat(),
    ) {
        let wider = &eps + &bump;
        let p = feller_profile(&d, &t, &eps, TailConvention::Strict);
        let q = feller_profile(&d, &t, &wider, TailConvention::Strict);
        prop_assert!(q.tau <= p.tau);
        prop_assert!(q.sigma >= p.sigma);
    }

    #[test]
    fn tail_vanishes_past_support(d in arb_dist(), eps in arb_positive_rat()) {
        // Once eps*t exceeds the support bound, tau = 0 and sigma = E(h^2)/t.
        let bound = d.support_bound();
        let t = (&bound + rat_int(1)) / &eps;
        let p = feller_profile(&d, &t, &eps, TailConvention::Strict);
        prop_assert_eq!(&p.tau, &rat_int(0));
        prop_assert_eq!(&p.sigma, &(d.moment(2) / &t));
    }

    #[test]
    fn exceedance_monotone_in_threshold(
        d in arb_dist(),
        t in arb_positive_rat(),
        lo in arb_positive_rat(),
        bump in arb_positive_rat(),
    ) {
        let fam = MixingFamily::new(
            vec![
                (rat(1, 3), d.clone()),
                (rat(2, 3), d.symmetrize()),
            ],
            "prop",
        ).unwrap();
        let slice = cond_stat(&fam, StatKind::Rho, &t, &rat_int(1), TailConvention::Strict);
        let hi = &lo + &bump;
        prop_assert!(prob_exceed(&slice, &lo) >= prob_exceed(&slice, &hi));
    }

    #[test]
    fn json_round_trip(d in arb_dist()) {
        let json = serde_json::to_string(&d).unwrap();
        let back: DiscreteDistribution = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn one_entry_family_reduces_to_classical(d in arb_dist()) {
        let fam = MixingFamily::degenerate(d.clone(), "one");
        let grid: Vec<Rational> = (0..8).map(|k| rat_int(1i64 << (2 * k))).collect();
        let eps = vec![rat(1, 2), rat_int(1)];
        let th = default_threshold();
        let classical = classify_classical(
            &d, &eps, &grid, &th, DEFAULT_WINDOW, TailConvention::Strict,
        ).unwrap();
        let exch = classify_exchangeable(
            &fam, &eps, &grid, &th, &th, DEFAULT_WINDOW, TailConvention::Strict,
        ).unwrap();
        for (e_name, c_name) in [
            ("T", "tau"), ("Sigma", "sigma"), ("V", "v"), ("R", "rho"),
            ("avg_T", "avg_tau"), ("tail_Sigma", "tail_sigma"), ("tail_V", "tail_v"),
        ] {
            for eps_tag in ["1/2", "1"] {
                let e = exch.verdicts[&format!("{e_name}[eps={eps_tag}]")];
                let c = classical.verdicts[&format!("{c_name}[eps={eps_tag}]")];
                prop_assert_eq!(e, c);
            }
        }
    }
}
