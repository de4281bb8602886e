use jacobi_mimo::analytic::{ergodic_capacity, outage_single_mode, rho_norm};
use jacobi_mimo::ensembles::{draw_channel, squared_singular_values, verify_lemma1, UNIT_TOL};
use jacobi_mimo::feedback::complete_unitary;
use jacobi_mimo::linalg::identity_defect;
use jacobi_mimo::simulate::{mc_outage, run_collect, run_scalar, tag, Rate};
use jacobi_mimo::{ChannelDims, CMatrix, McConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn any_dims(max_m: usize) -> impl Strategy<Value = ChannelDims> {
    (1..=max_m)
        .prop_flat_map(|m| (1..=m, 1..=m, Just(m)))
        .prop_map(|(t, r, m)| ChannelDims::new(t, r, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn spectra_live_in_unit_interval(d in any_dims(7), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = squared_singular_values(&draw_channel(d, &mut rng, false), UNIT_TOL).unwrap();
        prop_assert_eq!(s.len(), d.m_min());
        prop_assert!(s.lambdas.iter().all(|&l| (0.0..=1.0).contains(&l)));
        prop_assert!(s.n_unit >= d.k());
    }

    #[test]
    fn lemma1_holds_for_random_draws(d in any_dims(6), seed in any::<u64>()) {
        prop_assume!(d.k() > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rep = verify_lemma1(&draw_channel(d, &mut rng, true), UNIT_TOL).unwrap();
        prop_assert!(rep.holds(), "{:?}", rep);
    }

    #[test]
    fn completion_is_unitary(d in any_dims(6), seed in any::<u64>()) {
        prop_assume!(d.k() > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let real = draw_channel(d, &mut rng, false);
        let h21 = complete_unitary(real.h11(), d).unwrap();
        let mut stacked = CMatrix::zeros(d.m(), d.m_t());
        stacked.rows_mut(0, d.m_r()).copy_from(real.h11());
        stacked.rows_mut(d.m_r(), d.m() - d.m_r()).copy_from(&h21);
        prop_assert!(identity_defect(&(stacked.adjoint() * &stacked)) < 1e-9);
    }

    #[test]
    fn capacity_is_symmetric_and_bounded(d in any_dims(6), rho_db in -10.0..30.0f64) {
        let rho = 10f64.powf(rho_db / 10.0);
        let c = ergodic_capacity(d, rho).unwrap();
        let swapped = ergodic_capacity(d.swapped(), rho).unwrap();
        prop_assert!((c - swapped).abs() < 1e-9 * c.max(1.0));
        prop_assert!(c >= -1e-12);
        prop_assert!(c <= d.m_min() as f64 * (1.0 + rho).log2() + 1e-9);
    }

    #[test]
    fn single_mode_outage_is_a_cdf_in_rate(m in 2usize..40, frac in 0.0..1.0f64, r1 in 0.0..8.0f64, dr in 0.0..4.0f64) {
        let m_r = ((m - 1) as f64 * frac) as usize + 1;
        let m_r = m_r.min(m - 1);
        let p1 = outage_single_mode(m_r, m, r1, 10.0).unwrap();
        let p2 = outage_single_mode(m_r, m, r1 + dr, 10.0).unwrap();
        prop_assert!((0.0..=1.0).contains(&p1));
        prop_assert!(p2 >= p1 - 1e-12);
    }

    #[test]
    fn rho_norm_decreases_with_receive_modes(m in 2usize..80, eps_exp in 1.0..8.0f64) {
        let eps = 10f64.powf(-eps_exp);
        let mut prev = f64::INFINITY;
        for m_r in 1..=m {
            let v = rho_norm(m_r, m, eps).unwrap();
            prop_assert!(v >= 1.0 && v < prev);
            prev = v;
        }
    }
}

#[test]
fn monte_carlo_is_independent_of_worker_count() {
    let d = ChannelDims::new(2, 3, 5).unwrap();
    let one = mc_outage(d, 10.0, Rate::Ratio(0.8), &McConfig::new(5000, 3)).unwrap();
    let many = mc_outage(d, 10.0, Rate::Ratio(0.8), &McConfig::new(5000, 3).with_workers(4)).unwrap();
    assert_eq!(one, many);
}

#[test]
fn trial_streams_do_not_depend_on_trial_count() {
    let cfg_small = McConfig::new(1500, 9);
    let cfg_big = McConfig::new(3000, 9);
    let f = |rng: &mut ChaCha8Rng, _i: u64, out: &mut Vec<f64>| {
        out.push(rng.random::<f64>());
        Ok(())
    };
    let small = run_collect(&cfg_small, tag("prefix"), f).unwrap();
    let big = run_collect(&cfg_big, tag("prefix"), f).unwrap();
    assert_eq!(small[..], big[..1500]);
    let est = run_scalar(&cfg_small, tag("prefix"), |rng, _| Ok(rng.random::<f64>())).unwrap();
    assert!((est.value - 0.5).abs() < 4.0 * est.stderr);
}
