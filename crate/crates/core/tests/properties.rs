use insider_na::generate::{
    random_adapted, random_density, random_honest_instance, random_instance, random_martingale,
};
use insider_na::random_time::{stop_at, ExtendedTime};
use insider_na::space::{Process, Strategy};
use insider_na::transfer::Side;
use insider_na::{int, EnlargedModel, Rational};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn model(seed: u64) -> EnlargedModel {
    let (space, f, tau) = random_instance(seed, 8, 4);
    EnlargedModel::new(space, f, tau).unwrap()
}

fn honest_model(seed: u64) -> EnlargedModel {
    let (space, f, tau) = random_honest_instance(seed, 8, 4);
    EnlargedModel::new(space, f, tau).unwrap()
}

fn rv(raw: &[i64], len: usize) -> Vec<Rational> {
    raw.iter().cycle().take(len).map(|&v| int(v)).collect()
}

fn times(x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    x.iter().zip(y).map(|(a, b)| a * b).collect()
}

fn event_rv(e: &[bool]) -> Vec<Rational> {
    e.iter().map(|&b| if b { int(1) } else { int(0) }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn conditional_expectation_is_a_projection_and_towers(seed in any::<u64>(), raw in prop::collection::vec(-9i64..=9, 8)) {
        let m = model(seed);
        let x = rv(&raw, m.len());
        for n in 0..=m.horizon() {
            let once = m.cond_exp(&x, n);
            prop_assert_eq!(m.cond_exp(&once, n), once.clone());
            for k in 0..=n {
                prop_assert_eq!(m.cond_exp(&once, k), m.cond_exp(&x, k));
            }
        }
    }

    #[test]
    fn martingale_gains_have_zero_mean(seed in any::<u64>(), raw in prop::collection::vec(-3i64..=3, 40)) {
        let m = model(seed);
        let x = random_martingale(&m.space, &m.public, seed);
        let mut h = Strategy::zeros(m.horizon(), m.len());
        let mut it = raw.iter().cycle();
        for n in 1..=m.horizon() {
            for atom in m.public.level(n - 1).atoms() {
                h.set_on(n, atom, &int(*it.next().unwrap()));
            }
        }
        prop_assert!(m.public.check_predictable(&h).is_ok());
        prop_assert!(m.space.expectation(&h.gains(&x)).is_zero());
    }

    #[test]
    fn stochastic_exponential_recursion(seed in any::<u64>()) {
        let m = model(seed);
        let n_proc = random_adapted(&m.space, &m.public, seed);
        let e = n_proc.stochastic_exponential();
        for n in 1..=m.horizon() {
            let d = n_proc.increment(n);
            for w in 0..m.len() {
                prop_assert_eq!(e.value(n, w), &(e.value(n - 1, w) * (Rational::one() + &d[w])));
                let all_pos = (1..=n).all(|k| (Rational::one() + &n_proc.increment(k)[w]).is_positive());
                if all_pos {
                    prop_assert!(e.value(n, w).is_positive());
                }
            }
        }
    }

    #[test]
    fn bayes_rule(seed in any::<u64>(), raw in prop::collection::vec(-9i64..=9, 8)) {
        let m = model(seed);
        let d = random_density(&m.space, seed);
        let q = m.space.apply_density(&d).unwrap();
        let y = rv(&raw, m.len());
        for n in 0..=m.horizon() {
            let eq = m.public.conditional_expectation(&q, &y, n);
            let ed = m.cond_exp(d.values(), n);
            let edy = m.cond_exp(&times(d.values(), &y), n);
            prop_assert_eq!(times(&eq, &ed), edy);
        }
    }

    #[test]
    fn zero_level_sets_are_nested(seed in any::<u64>()) {
        let m = model(seed);
        let az = &m.azema;
        for n in 1..=m.horizon() {
            let (zp, zt, z) = (az.z_is_zero(n - 1), az.z_tilde_is_zero(n), az.z_is_zero(n));
            for w in 0..m.len() {
                prop_assert!(!zp[w] || zt[w]);
                prop_assert!(!zt[w] || z[w]);
                if n <= m.tau.value(w) {
                    prop_assert!(!zp[w] && !zt[w]);
                }
            }
            let positive: Vec<bool> = az.z_tilde.at(n).iter().map(Signed::is_positive).collect();
            let p_pos = m.cond_prob(&positive, n - 1);
            for w in 0..m.len() {
                prop_assert!(n > m.tau.value(w) || positive[w]);
                prop_assert!(!positive[w] || !zp[w]);
                prop_assert_eq!(!zp[w], p_pos[w].is_positive());
            }
        }
        let r = m.zero_hitting_times();
        for w in 0..m.len() {
            prop_assert!(r.first[w] <= r.third[w] && r.third[w] <= r.second[w]);
            if let (Some(a), Some(b)) = (r.first[w].finite(), r.second[w].finite()) {
                prop_assert_eq!(b, a + 1);
            }
            prop_assert!(ExtendedTime::At(m.tau.value(w)) <= r.first[w]);
        }
    }

    #[test]
    fn one_level_sets_are_nested(seed in any::<u64>()) {
        let m = model(seed);
        let az = &m.azema;
        let one = Rational::one();
        for n in 1..=m.horizon() {
            for w in 0..m.len() {
                let zt = az.z_tilde.value(n, w) < &one;
                prop_assert!(!zt || az.z.value(n - 1, w) < &one);
                prop_assert!(!zt || az.z.value(n, w) < &one);
                if m.tau.value(w) < n {
                    prop_assert!(zt && az.z.value(n - 1, w) < &one);
                }
            }
        }
        let s = m.one_hitting_times();
        for w in 0..m.len() {
            prop_assert!(s.second[w] <= s.third[w]);
            prop_assert!(s.first[w] <= s.third[w]);
        }
    }

    #[test]
    fn enlarged_conditional_expectations(seed in any::<u64>(), raw in prop::collection::vec(-9i64..=9, 8)) {
        let m = honest_model(seed);
        let y = rv(&raw, m.len());
        let az = &m.azema;
        let one = Rational::one();
        for n in 0..=m.horizon() {
            let g = m.insider.conditional_expectation(&m.space, &y, n);
            let after = m.tau.event(|t| t > n);
            let f_after = m.cond_exp(&times(&y, &event_rv(&after)), n);
            let before = m.tau.event(|t| t <= n);
            let f_before = m.cond_exp(&times(&y, &event_rv(&before)), n);
            for w in 0..m.len() {
                if after[w] {
                    prop_assert_eq!(&g[w], &(&f_after[w] / az.z.value(n, w)));
                } else {
                    prop_assert_eq!(&g[w], &(&f_before[w] / (&one - az.z.value(n, w))));
                }
            }
            if n == 0 {
                continue;
            }
            let g_prev = m.insider.conditional_expectation(&m.space, &y, n - 1);
            let reaches = m.tau.event(|t| t >= n);
            let f_reaches = m.cond_exp(&times(&y, &event_rv(&reaches)), n - 1);
            for w in 0..m.len() {
                if reaches[w] {
                    prop_assert_eq!(&g_prev[w], &(&f_reaches[w] / az.z.value(n - 1, w)));
                }
            }
            // For Fₙ-measurable Y, 1_{τ ≥ n} can be replaced by Z̃ₙ.
            let yn = m.cond_exp(&y, n);
            prop_assert_eq!(
                m.cond_exp(&times(&yn, &event_rv(&reaches)), n - 1),
                m.cond_exp(&times(&yn, az.z_tilde.at(n)), n - 1)
            );
            let passed: Vec<Rational> = az.z_tilde.at(n).iter().map(|z| &one - z).collect();
            prop_assert_eq!(
                m.cond_exp(&times(&yn, &event_rv(&m.tau.event(|t| t < n))), n - 1),
                m.cond_exp(&times(&yn, &passed), n - 1)
            );
        }
    }

    #[test]
    fn level_sets_survive_equivalent_measures(seed in any::<u64>()) {
        let m = model(seed);
        let r = m.reweighted(&random_density(&m.space, seed ^ 0x55)).unwrap();
        for n in 0..=m.horizon() {
            prop_assert_eq!(m.azema.z_is_zero(n), r.azema.z_is_zero(n));
            prop_assert_eq!(m.azema.z_tilde_is_zero(n), r.azema.z_tilde_is_zero(n));
            prop_assert_eq!(m.azema.z_is_one(n), r.azema.z_is_one(n));
            prop_assert_eq!(m.azema.z_tilde_is_one(n), r.azema.z_tilde_is_one(n));
        }
    }

    #[test]
    fn doob_meyer_pieces(seed in any::<u64>()) {
        let m = model(seed);
        let (mart, a) = m.m_a_decomposition().unwrap();
        prop_assert!(m.public.is_martingale(&m.space, &mart).unwrap().holds());
        prop_assert!(m.public.is_adapted(&a));
        prop_assert!(a.is_nondecreasing());
        prop_assert_eq!(&mart - &a, m.azema.z.clone());
        let jumps = insider_na::random_time::dual_optional_increments(&m.azema);
        let total: Rational = (0..=m.horizon()).map(|n| m.space.expectation(jumps.at(n))).sum();
        prop_assert!(total.is_one());
    }

    #[test]
    fn compensated_martingales_are_insider_martingales(seed in any::<u64>()) {
        let m = model(seed);
        let x = random_martingale(&m.space, &m.public, seed);
        prop_assert!(m.g_compensated_before(&x).is_ok());
        let h = honest_model(seed);
        let x = random_martingale(&h.space, &h.public, seed);
        prop_assert!(h.g_compensated_after(&x).is_ok());
        prop_assert!(h.g_martingale(&x).is_ok());
    }

    #[test]
    fn deflator_and_measure_change_agree_with_pairwise_orthogonality(seed in any::<u64>()) {
        let m = model(seed);
        let x = random_martingale(&m.space, &m.public, seed.wrapping_add(1));
        let deflated = m.deflated_stopped(&x).unwrap();
        let deflator_side = m.insider.is_martingale(&m.space, &deflated).unwrap().holds();
        let q = m.measure_change_before().unwrap();
        let qspace = m.space.apply_density(&q.terminal).unwrap();
        let measure_side = m.public.is_martingale(&qspace, &x).unwrap().holds();
        let ortho = m.pairwise_orthogonality(&x, &q.increments).holds();
        prop_assert_eq!(deflator_side, measure_side);
        prop_assert_eq!(measure_side, ortho);
        if m.orthogonality_check(&x, Side::Before).holds() {
            prop_assert!(deflator_side);
        }
    }

    #[test]
    fn post_time_deflator_and_measure_change(seed in any::<u64>()) {
        let m = honest_model(seed);
        let x = random_martingale(&m.space, &m.public, seed.wrapping_add(1));
        let deflated = m.deflated_after(&x).unwrap();
        let deflator_side = m.insider.is_martingale(&m.space, &deflated).unwrap().holds();
        let q = m.measure_change_after().unwrap();
        let qspace = m.space.apply_density(&q.terminal).unwrap();
        let measure_side = m.public.is_martingale(&qspace, &x).unwrap().holds();
        let ortho = m.pairwise_orthogonality(&x, &q.increments).holds();
        prop_assert_eq!(measure_side, ortho);
        if m.orthogonality_check(&x, Side::After).holds() {
            prop_assert!(deflator_side);
        }
    }

    #[test]
    fn per_period_densities_match_indicator_orthogonality(seed in any::<u64>()) {
        let m = model(seed);
        let x = random_martingale(&m.space, &m.public, seed.wrapping_add(2));
        let q = m.space.apply_density(&m.per_period_density_before().unwrap()).unwrap();
        let stopped = m.stopped(&x);
        prop_assert_eq!(
            m.insider.is_martingale(&q, &stopped).unwrap().holds(),
            m.orthogonality_check(&x, Side::Before).holds()
        );
        let h = honest_model(seed);
        let x = random_martingale(&h.space, &h.public, seed.wrapping_add(2));
        let q = h.space.apply_density(&h.per_period_density_after().unwrap()).unwrap();
        prop_assert_eq!(
            h.insider.is_martingale(&q, &h.after(&x)).unwrap().holds(),
            h.orthogonality_check(&x, Side::After).holds()
        );
    }

    #[test]
    fn truncated_processes_are_martingales_under_qe(seed in any::<u64>()) {
        let m = model(seed);
        let x = random_martingale(&m.space, &m.public, seed.wrapping_add(3));
        let (qe, qe_tilde) = m.qe_measures().unwrap();
        prop_assert!(qe.values().iter().all(Signed::is_positive));
        prop_assert!(qe_tilde.values().iter().all(Signed::is_positive));
        let stopped_y = stop_at(&m.measure_change_before().unwrap().increments, &m.tau);
        prop_assert!(stopped_y.is_nondecreasing());
        let c = Process::constant(m.horizon(), m.len(), int(3));
        prop_assert_eq!(m.truncate_before(&c), c.clone());
        prop_assert_eq!(m.truncate_after(&c), c);
        let _ = x;
    }
}
