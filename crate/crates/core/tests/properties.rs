use proptest::prelude::*;

use wmgame_core::equilibrium::{
    best_responses, closed_form_values, expansion_deltas, mixed_2x2_closed_form, mixed_2x2_from_matrix,
    mixed_2x2_simplified, pure_equilibria, simplified_values, structural_deltas, support_enumeration, Player,
};
use wmgame_core::game::{
    alice_payoff, asr, bob_payoff, coo, csr_general, csr_simplified, RobustnessMatrix, StrategySpaces,
};
use wmgame_core::profiles::{
    agreement_rate, bounds_check, estimate_profile, EvaluationSet, ModelProfile, PredictionRecord, SetKind,
};
use wmgame_core::region::{export_region_csv, parse_region_csv, Axis};
use wmgame_core::{build_payoff_matrix, scan, CostParameters, CsrMode, PayoffMatrix, Scenario, SweepSpec};

fn increasing(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, len).prop_filter_map("strictly increasing", |mut v| {
        v.sort_by(f64::total_cmp);
        v.windows(2).all(|w| w[0] < w[1]).then_some(v)
    })
}

fn costs(proportional: bool) -> impl Strategy<Value = CostParameters> {
    (prop::array::uniform8(0.0..=5.0f64), 0.0..=2.0f64, 0.0..=1.0f64).prop_map(move |(c, k, lambda_frac)| {
        let (o_def, o_att) = if proportional {
            (k * c[5], k * c[7])
        } else {
            (c[2], c[3])
        };
        CostParameters {
            i_def: c[0],
            i_att: c[1],
            o_def,
            o_att,
            r_def_minus: c[4],
            r_def_plus: c[5],
            r_att_minus: c[6],
            r_att_plus: c[7],
            k,
            // Scaled below so that 1 - lambda alpha stays in [0, 1].
            lambda: lambda_frac,
        }
    })
}

fn scenario(n: usize, m: usize, proportional: bool) -> impl Strategy<Value = Scenario> {
    (
        increasing(n),
        increasing(m),
        prop::collection::vec(prop::collection::vec(0.0..=1.0f64, m), n),
        costs(proportional),
    )
        .prop_map(|(alphas, betas, r, mut costs)| {
            let top = *alphas.last().unwrap();
            if top > 0.0 {
                costs.lambda /= top;
            }
            Scenario {
                spaces: StrategySpaces { alphas, betas },
                robustness: RobustnessMatrix(r),
                costs,
                csr_mode: CsrMode::SimplifiedLambda,
                profiles: None,
            }
        })
}

fn any_scenario() -> impl Strategy<Value = Scenario> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(n, m)| scenario(n, m, false))
}

fn bimatrix() -> impl Strategy<Value = PayoffMatrix> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(n, m)| {
        let grid = move || prop::collection::vec(prop::collection::vec(-10.0..10.0f64, m), n);
        (grid(), grid()).prop_map(|(a, b)| PayoffMatrix::from_grids(a, b).unwrap())
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn csr_stays_in_unit_interval(alpha in 0.0..=1.0f64, p in 0.0..=1.0f64, q in 0.0..=1.0f64,
                                  beta in 0.0..=1.0f64, r in 0.0..=1.0f64, lambda_frac in 0.0..=1.0f64) {
        let general = csr_general(alpha, p, q, beta, r).unwrap();
        prop_assert!((0.0..=1.0).contains(&general));
        let lambda = if alpha > 0.0 { lambda_frac / alpha } else { lambda_frac };
        let simplified = csr_simplified(alpha, lambda.min(1e12), beta, r);
        if let Ok(v) = simplified {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn csr_endpoints_are_exact(alpha in 0.0..=1.0f64, p in 0.0..=1.0f64, q in 0.0..=1.0f64, r in 0.0..=1.0f64) {
        prop_assert_eq!(csr_general(alpha, p, q, 0.0, r).unwrap(), (1.0 - alpha) * p + alpha * q);
        prop_assert_eq!(csr_general(alpha, p, q, 1.0, r).unwrap(), r);
    }

    #[test]
    fn blended_accuracy_is_bounded(alpha in 0.0..=1.0f64, p in 0.0..=1.0f64, q in 0.0..=1.0f64) {
        let profile = ModelProfile { alpha, p, q };
        prop_assert!(bounds_check(&profile).passed);
    }

    #[test]
    fn asr_is_an_involution(x in 0.0..=1.0f64) {
        let back = asr(asr(x).unwrap()).unwrap();
        prop_assert!((back - x).abs() <= f64::EPSILON);
    }

    #[test]
    fn coo_is_linear(k in 0.0..=5.0f64, alpha in 0.0..=1.0f64, beta in 0.0..=1.0f64) {
        prop_assert!(close(coo(k, alpha, beta).unwrap(), k * (alpha + beta), 1e-15));
    }

    #[test]
    fn payoffs_are_linear_in_initial_cost(s in any_scenario(), c in 0.0..=1e3f64) {
        let mut zero = s.clone();
        zero.costs.i_def = 0.0;
        zero.costs.i_att = 0.0;
        let mut shifted = zero.clone();
        shifted.costs.i_def = c;
        shifted.costs.i_att = c;
        let (n, m) = s.dims();
        for i in 0..n {
            for j in 0..m {
                prop_assert!(close(alice_payoff(&shifted, i, j).unwrap(), alice_payoff(&zero, i, j).unwrap() - c, 1e-13));
                prop_assert!(close(bob_payoff(&shifted, i, j).unwrap(), bob_payoff(&zero, i, j).unwrap() - c, 1e-13));
            }
        }
    }

    #[test]
    fn alice_payoff_is_monotone(s in any_scenario(), bump in 0.0..=2.0f64) {
        let (n, m) = s.dims();
        let mut costlier = s.clone();
        costlier.costs.i_def += bump;
        let mut richer = s.clone();
        richer.costs.r_def_plus += bump;
        for i in 0..n {
            for j in 0..m {
                let base = alice_payoff(&s, i, j).unwrap();
                prop_assert!(alice_payoff(&costlier, i, j).unwrap() <= base);
                prop_assert!(alice_payoff(&richer, i, j).unwrap() >= base - 1e-15);
            }
        }
    }

    #[test]
    fn matrix_matches_elementwise_payoffs(s in any_scenario()) {
        let matrix = build_payoff_matrix(&s).unwrap();
        let (n, m) = s.dims();
        prop_assert_eq!((matrix.rows(), matrix.cols()), (n, m));
        for i in 0..n {
            for j in 0..m {
                prop_assert_eq!(matrix.alice(i, j), alice_payoff(&s, i, j).unwrap());
                prop_assert_eq!(matrix.bob(i, j), bob_payoff(&s, i, j).unwrap());
            }
        }
    }

    #[test]
    fn expansion_matches_matrix_deltas(s in scenario(2, 2, false)) {
        let from_matrix = wmgame_core::equilibrium::payoff_deltas(&build_payoff_matrix(&s).unwrap()).unwrap();
        let expanded = expansion_deltas(&s).unwrap();
        for (a, b) in from_matrix.as_array().iter().zip(expanded.as_array()) {
            prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
        }
    }

    #[test]
    fn denominator_identity(s in scenario(2, 2, false)) {
        let d = structural_deltas(&s).unwrap();
        prop_assert!((d.column_difference() - d.row_difference()).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn closed_forms_agree_with_matrix_and_oracle(s in scenario(2, 2, true)) {
        let matrix = build_payoff_matrix(&s).unwrap();
        if let Ok(closed) = mixed_2x2_closed_form(&s) {
            let from_matrix = mixed_2x2_from_matrix(&matrix);
            if let Ok(direct) = from_matrix {
                prop_assert!(close(closed.pr_alpha1(), direct.pr_alpha1(), 1e-9));
                prop_assert!(close(closed.pr_beta1(), direct.pr_beta1(), 1e-9));
            }
            let simplified = mixed_2x2_simplified(&s).unwrap();
            prop_assert!(close(closed.pr_alpha1(), simplified.pr_alpha1(), 1e-12));
            prop_assert!(close(closed.pr_beta1(), simplified.pr_beta1(), 1e-12));

            let oracle = support_enumeration(&matrix).unwrap();
            let hit = oracle.equilibria.iter().any(|e| {
                e.profile.alice.iter().zip(&closed.alice).chain(e.profile.bob.iter().zip(&closed.bob))
                    .all(|(x, y)| (x - y).abs() <= 1e-7)
            });
            prop_assert!(hit);
        }
    }

    #[test]
    fn initial_costs_do_not_move_closed_forms(s in scenario(2, 2, true), d_def in -1e3..=1e3f64, d_att in -1e3..=1e3f64) {
        let mut t = s.clone();
        t.costs.i_def = (s.costs.i_def + 1e3 + d_def).max(0.0);
        t.costs.i_att = (s.costs.i_att + 1e3 + d_att).max(0.0);
        prop_assert_eq!(expansion_deltas(&s).unwrap(), expansion_deltas(&t).unwrap());
        prop_assert_eq!(simplified_values(&s).ok(), simplified_values(&t).ok());
        prop_assert_eq!(closed_form_values(&s).ok(), closed_form_values(&t).ok());
    }

    #[test]
    fn every_game_has_an_equilibrium(m in bimatrix()) {
        prop_assert!(!support_enumeration(&m).unwrap().equilibria.is_empty());
    }

    #[test]
    fn pure_equilibria_survive_constant_shifts(m in bimatrix(), shift in -100.0..100.0f64) {
        let shifted = PayoffMatrix::from_grids(
            m.alice_grid().iter().map(|r| r.iter().map(|v| v + shift).collect()).collect(),
            m.bob_grid().to_vec(),
        ).unwrap();
        for j in 0..m.cols() {
            prop_assert_eq!(best_responses(&m, Player::Alice, j).unwrap(), best_responses(&shifted, Player::Alice, j).unwrap());
        }
        for i in 0..m.rows() {
            prop_assert_eq!(best_responses(&m, Player::Bob, i).unwrap(), best_responses(&shifted, Player::Bob, i).unwrap());
        }
        prop_assert_eq!(pure_equilibria(&m), pure_equilibria(&shifted));
    }

    #[test]
    fn agreement_is_symmetric_and_order_free(labels in prop::collection::vec((0u64..4, 0u64..4, 0u64..4), 1..40), seed in any::<u64>()) {
        let base: Vec<_> = labels.iter().enumerate().map(|(n, &(l, p, _))| PredictionRecord::new(format!("s{n}"), l, p)).collect();
        let marked: Vec<_> = labels.iter().enumerate().map(|(n, &(l, _, p))| PredictionRecord::new(format!("s{n}"), l, p)).collect();
        let mut shuffled = marked.clone();
        let len = shuffled.len();
        shuffled.rotate_left((seed % len as u64) as usize);
        shuffled.reverse();

        let a = EvaluationSet::new(SetKind::Test, base).unwrap();
        let b = EvaluationSet::new(SetKind::Test, marked).unwrap();
        let c = EvaluationSet::new(SetKind::Test, shuffled.clone()).unwrap();
        let forward = agreement_rate(&a, &b).unwrap();
        prop_assert_eq!(forward, agreement_rate(&b, &a).unwrap());
        prop_assert_eq!(forward, agreement_rate(&a, &c).unwrap());

        let trigger = EvaluationSet::new(SetKind::Trigger, shuffled.clone()).unwrap();
        let relabeled: Vec<_> = shuffled.iter().map(|r| PredictionRecord::new(format!("x-{}", r.sample_id), r.label, r.prediction)).collect();
        let relabeled_test = EvaluationSet::new(SetKind::Test, relabeled.clone()).unwrap();
        let relabeled_trigger = EvaluationSet::new(SetKind::Trigger, relabeled).unwrap();
        prop_assert_eq!(
            estimate_profile(0.3, &b, &trigger).unwrap(),
            estimate_profile(0.3, &relabeled_test, &relabeled_trigger).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scan_is_deterministic_and_round_trips(s in scenario(2, 2, true), steps in 2usize..40) {
        let axes = vec![
            format!("betas.1:{}:1:{steps}", s.spaces.betas[0] + 1e-3).parse::<Axis>().unwrap(),
            "costs.k:0:2:7".parse::<Axis>().unwrap(),
        ];
        let mut spec = SweepSpec::new(s, axes);
        spec.couple_ongoing_costs = true;
        let first = scan(&spec).unwrap();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        prop_assert_eq!(&first, &single.install(|| scan(&spec)).unwrap());

        let mut csv = Vec::new();
        export_region_csv(&first, &mut csv).unwrap();
        let parsed = parse_region_csv(csv.as_slice()).unwrap();
        let mut again = Vec::new();
        export_region_csv(&parsed, &mut again).unwrap();
        prop_assert_eq!(csv, again);
        prop_assert_eq!(parsed, first);
    }
}
