use batchbandit::environment::{generate_instance, sample_context, uniform_grid, EnvironmentConfig};
use batchbandit::metrics::instantaneous_regret;
use batchbandit::{Instance, RngStream, StreamRole, Vector};
use proptest::prelude::*;

#[test]
fn contexts_are_standard_normal() {
    let cfg = EnvironmentConfig { d: 4, n_signal: 2, n_noise: 2, ..EnvironmentConfig::default() };
    let mut rng = RngStream::new(3, 0, StreamRole::Contexts);
    let n = 200_000;
    let mut sum = [0.0; 4];
    let mut sq = [[0.0; 4]; 4];
    for _ in 0..n {
        let x: Vector = sample_context(&cfg, &mut rng);
        for i in 0..4 {
            sum[i] += x[i];
            for j in 0..4 {
                sq[i][j] += x[i] * x[j];
            }
        }
    }
    for i in 0..4 {
        assert!((sum[i] / n as f64).abs() < 0.01);
        for j in 0..4 {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((sq[i][j] / n as f64 - target).abs() < 0.015);
        }
    }
}

#[test]
fn reward_noise_has_variance_s_squared() {
    let cfg = EnvironmentConfig::default();
    let inst: Instance = generate_instance(&cfg, &mut RngStream::new(4, 0, StreamRole::Instance));
    let x = vec![0.3; cfg.d];
    let mu = inst.mean_reward(2, &x);
    let mut rng = RngStream::new(4, 0, StreamRole::Rewards);
    let n = 1_000_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let e = inst.sample_reward(2, &x, &mut rng) - mu;
        s += e;
        s2 += e * e;
    }
    let var = s2 / n as f64 - (s / n as f64).powi(2);
    assert!((var - 100.0).abs() < 1.0, "variance {var}");
}

#[test]
fn noiseless_reward_is_the_mean() {
    let cfg = EnvironmentConfig { noise_scale: 0.0, ..EnvironmentConfig::default() };
    let inst: Instance = generate_instance(&cfg, &mut RngStream::new(5, 0, StreamRole::Instance));
    let x: Vector = sample_context(&cfg, &mut RngStream::new(5, 0, StreamRole::Contexts));
    let mut rng = RngStream::new(5, 0, StreamRole::Rewards);
    for a in 0..cfg.num_arms {
        assert_eq!(inst.sample_reward(a, &x, &mut rng), inst.mean_reward(a, &x));
    }
}

#[test]
fn irrelevant_coefficients_are_zero_and_signal_is_standard_normal() {
    let cfg = EnvironmentConfig::default();
    let (mut s, mut s2, mut n) = (0.0, 0.0, 0.0);
    for rep in 0..2000 {
        let inst: Instance = generate_instance(&cfg, &mut RngStream::new(6, rep, StreamRole::Instance));
        for row in &inst.theta {
            for (i, &t) in row.iter().enumerate() {
                if inst.relevant_set.contains(&i) {
                    s += t;
                    s2 += t * t;
                    n += 1.0;
                } else {
                    assert_eq!(t, 0.0);
                }
            }
        }
    }
    assert!((s / n).abs() < 0.02);
    assert!((s2 / n - 1.0).abs() < 0.03);
}

#[test]
fn replication_pairing_shares_instance_and_contexts() {
    let cfg = EnvironmentConfig::default();
    let a: Instance = generate_instance(&cfg, &mut RngStream::new(9, 4, StreamRole::Instance));
    let b: Instance = generate_instance(&cfg, &mut RngStream::new(9, 4, StreamRole::Instance));
    let c: Instance = generate_instance(&cfg, &mut RngStream::new(9, 5, StreamRole::Instance));
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert_ne!(a.fingerprint(), c.fingerprint());
    let x1: Vector = sample_context(&cfg, &mut RngStream::new(9, 4, StreamRole::Contexts));
    let x2: Vector = sample_context(&cfg, &mut RngStream::new(9, 4, StreamRole::Contexts));
    assert_eq!(x1, x2);
}

#[test]
fn instance_json_has_theta_relevant_set_and_s() {
    let cfg = EnvironmentConfig { d: 2, n_signal: 1, n_noise: 1, num_arms: 2, ..EnvironmentConfig::default() };
    let inst: Instance = generate_instance(&cfg, &mut RngStream::new(1, 0, StreamRole::Instance));
    let v = serde_json::to_value(&inst).unwrap();
    assert_eq!(v["theta"].as_array().unwrap().len(), 2);
    assert_eq!(v["relevant_set"], serde_json::json!([0]));
    assert_eq!(v["s"], serde_json::json!(10.0));
    let back: Instance = serde_json::from_value(v).unwrap();
    assert_eq!(back, inst);
}

#[test]
fn f32_instances_follow_the_same_streams() {
    let cfg = EnvironmentConfig::default();
    let a: batchbandit::environment::Instance<f32> = generate_instance(&cfg, &mut RngStream::new(2, 0, StreamRole::Instance));
    let b: Instance = generate_instance(&cfg, &mut RngStream::new(2, 0, StreamRole::Instance));
    for (ra, rb) in a.theta.iter().zip(&b.theta) {
        for (&x, &y) in ra.iter().zip(rb.iter()) {
            assert!((x as f64 - y).abs() < 1e-6);
        }
    }
}

proptest! {
    #[test]
    fn uniform_grid_partitions_the_horizon(m in 1usize..50, per in 1usize..40, extra in 1usize..40) {
        let n = m * per;
        if m > 1 {
            prop_assert!(uniform_grid(n + extra % m, m).is_err() || extra % m == 0);
        }
        let grid = uniform_grid(n, m).unwrap();
        let b = grid.boundaries();
        prop_assert_eq!(b.len(), m + 1);
        prop_assert_eq!(b[0], 0);
        prop_assert_eq!(b[m], n);
        prop_assert!(b.windows(2).all(|w| w[0] < w[1]));
        let total: usize = grid.batches().map(|r| r.len()).sum();
        prop_assert_eq!(total, n);
    }

    #[test]
    fn regret_is_nonnegative(seed in 0u64..500, arm in 0usize..5) {
        let cfg = EnvironmentConfig::default();
        let inst: Instance = generate_instance(&cfg, &mut RngStream::new(seed, 0, StreamRole::Instance));
        let x: Vector = sample_context(&cfg, &mut RngStream::new(seed, 0, StreamRole::Contexts));
        let rec = inst.interact(0, x.clone(), arm, &mut RngStream::new(seed, 0, StreamRole::Rewards));
        let r = instantaneous_regret(&rec);
        prop_assert!(r >= 0.0);
        prop_assert_eq!(r == 0.0, inst.mean_reward(arm, &x) == inst.mean_reward(inst.optimal_action(&x), &x));
    }
}

#[test]
fn bad_configs_are_rejected() {
    let base = EnvironmentConfig::default();
    assert!(EnvironmentConfig { n_noise: 11, ..base.clone() }.validate().is_err());
    assert!(EnvironmentConfig { num_arms: 0, ..base.clone() }.validate().is_err());
    assert!(EnvironmentConfig { num_batches: 0, ..base.clone() }.validate().is_err());
    assert!(EnvironmentConfig { noise_scale: -1.0, ..base.clone() }.validate().is_err());
    assert!(base.with_dimension(21).is_err());
    assert_eq!(base.with_dimension(80).unwrap().n_signal, 40);
}
