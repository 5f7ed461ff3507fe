use proptest::prelude::*;
use sinai_idla::env::{make_environment, EnvironmentLaw};
use sinai_idla::path::Side;

#[test]
fn uniform_log_rho_mean_is_zero_at_logistic_scale() {
    let law = EnvironmentLaw::uniform(0.0).unwrap();
    let mut env = make_environment(law, 17).unwrap();
    let sites = 1_000_000i64;
    let sum: f64 = (1..=sites / 2)
        .chain(-(sites / 2) + 1..=0)
        .map(|i| env.log_rho(i))
        .sum();
    let sigma = (law.log_rho_second_moment().unwrap() / sites as f64).sqrt();
    assert!((std::f64::consts::PI.powi(2) / 3.0 - 3.289_868_133_696_453).abs() < 1e-12);
    let mean = sum / sites as f64;
    assert!(
        mean.abs() <= 3.0 * sigma,
        "mean {mean} outside 3 sigma = {}",
        3.0 * sigma
    );
}

#[test]
fn two_point_values_and_frequencies() {
    let mut env = make_environment(EnvironmentLaw::two_point(0.3).unwrap(), 5).unwrap();
    let up = (7.0f64 / 3.0).ln();
    let sites = 100_000;
    let mut ups = 0usize;
    for i in -(sites / 2) + 1..=sites / 2 {
        let l = env.log_rho(i);
        assert!(l == up || l == -up, "log rho = {l}");
        let w = env.omega(i);
        assert!(w == 0.3 || w == 0.7);
        ups += (l == up) as usize;
    }
    let freq = ups as f64 / sites as f64;
    assert!(
        (freq - 0.5).abs() <= 3.0 * (0.25 / sites as f64).sqrt(),
        "frequency {freq}"
    );
}

#[test]
fn uniform_omega_stays_inside_truncation() {
    let mut env = make_environment(EnvironmentLaw::uniform(0.2).unwrap(), 3).unwrap();
    for i in -5000..5000 {
        let w = env.omega(i);
        assert!(w > 0.2 && w < 0.8);
    }
}

#[test]
fn potential_telescopes_on_both_sides() {
    let mut env = make_environment(EnvironmentLaw::uniform(0.0).unwrap(), 11).unwrap();
    assert_eq!(env.potential(0), 0.0);
    let mut acc = 0.0;
    for i in 1..=2000 {
        acc += env.log_rho(i);
        assert!((env.potential(i) - acc).abs() <= 1e-9 * (1.0 + acc.abs()));
    }
    let mut acc = 0.0;
    for i in (-2000..=-1).rev() {
        acc -= env.log_rho(i + 1);
        assert!((env.potential(i) - acc).abs() <= 1e-9 * (1.0 + acc.abs()));
    }
}

fn snapshot(
    law: EnvironmentLaw,
    seed: u64,
    len: usize,
    ops: &[(bool, usize)],
) -> (Vec<f64>, Vec<f64>) {
    let mut env = make_environment(law, seed).unwrap();
    for &(right, l) in ops {
        env.extend(if right { Side::Right } else { Side::Left }, l);
        // interleave point queries too
        let _ = env.omega(if right { l as i64 } else { -(l as i64) });
    }
    let omegas: Vec<f64> = (-(len as i64)..=len as i64).map(|i| env.omega(i)).collect();
    let potentials: Vec<f64> = (-(len as i64)..=len as i64)
        .map(|i| env.potential(i))
        .collect();
    (omegas, potentials)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extension_order_never_changes_the_environment(
        seed in any::<u64>(),
        two_point in any::<bool>(),
        ops in prop::collection::vec((any::<bool>(), 0usize..3000), 0..12),
    ) {
        let law = if two_point {
            EnvironmentLaw::two_point(0.3).unwrap()
        } else {
            EnvironmentLaw::uniform(0.0).unwrap()
        };
        let reference = snapshot(law, seed, 2500, &[]);
        prop_assert_eq!(snapshot(law, seed, 2500, &ops), reference);
    }

    #[test]
    fn rho_is_odds_of_omega(seed in any::<u64>(), i in -1000i64..1000) {
        let mut env = make_environment(EnvironmentLaw::uniform(0.0).unwrap(), seed).unwrap();
        let w = env.omega(i);
        prop_assert!(w > 0.0 && w < 1.0);
        prop_assert_eq!(env.rho(i), (1.0 - w) / w);
    }
}
