use gibbs_fisher::criticality::{critical_temperature, scaling_series, Backend};
use gibbs_fisher::ensembles::{gce_report, gge_report, ChargeState, JointEnsemble, ParticleState};
use gibbs_fisher::estimation::{run_trials, SimConfig};
use gibbs_fisher::fisher::renyi_fisher;
use gibbs_fisher::thermo::renyi_point;
use gibbs_fisher::{fisher_report, log_partition, thermo_point, EnergyLevel, ThermalModel};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Five-point central differences.
fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn d2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
        / (12.0 * h * h)
}

fn spectrum_strategy() -> impl Strategy<Value = ThermalModel> {
    prop::collection::vec((0.0f64..4.0, 1u64..4), 2..8)
        .prop_filter("needs two distinct levels", |v| {
            v.iter().any(|l| (l.0 - v[0].0).abs() > 0.05)
        })
        .prop_map(|v| {
            ThermalModel::spectrum(v.into_iter().map(|(e, g)| EnergyLevel::new(e, g)).collect())
                .unwrap()
        })
}

fn any_model() -> impl Strategy<Value = ThermalModel> {
    prop_oneof![
        (0.1f64..5.0).prop_map(|g| ThermalModel::two_level(g).unwrap()),
        (0.1f64..5.0).prop_map(|w| ThermalModel::oscillator(w).unwrap()),
        prop::collection::vec(0.1f64..5.0, 1..4)
            .prop_map(|w| ThermalModel::oscillator_bank(w).unwrap()),
        (1u32..9).prop_map(|f| ThermalModel::classical(f).unwrap()),
        (0.1f64..2.0, 2.0f64..20.0).prop_map(|(r, v)| ThermalModel::diatomic(r, v).unwrap()),
        spectrum_strategy(),
    ]
}

/// Gibbs probabilities evaluated directly, independent of the library.
fn probabilities(levels: &[(f64, u64)], beta: f64) -> Vec<f64> {
    let e0 = levels.iter().map(|l| l.0).fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = levels
        .iter()
        .map(|&(e, g)| g as f64 * (-beta * (e - e0)).exp())
        .collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}

proptest! {
    #[test]
    fn product_is_inverse_temperature_squared(model in any_model(), log_t in (0.05f64).ln()..(50.0f64).ln()) {
        let t = log_t.exp();
        if let Ok(r) = fisher_report(&model, 1.0 / t, 1) {
            prop_assert!((r.product_fs_ft * t * t - 1.0).abs() < 1e-11);
            prop_assert!(rel_close(r.f_s * r.c_v(), 1.0, 1e-14));
        }
    }

    #[test]
    fn quantum_fisher_equals_classical_fisher(
        levels in prop::collection::vec((0.0f64..3.0, 1u64..4), 2..6),
        beta in 0.1f64..3.0,
    ) {
        let distinct = levels.iter().any(|l| (l.0 - levels[0].0).abs() > 0.05);
        prop_assume!(distinct);
        let model = ThermalModel::spectrum(
            levels.iter().map(|&(e, g)| EnergyLevel::new(e, g)).collect(),
        ).unwrap();
        let h = 1e-3;
        let p = probabilities(&levels, beta);
        let classical: f64 = (0..levels.len())
            .map(|k| {
                let dp = d1(|b| probabilities(&levels, b)[k], beta, h);
                dp * dp / p[k]
            })
            .sum();
        let r = fisher_report(&model, beta, 1).unwrap();
        prop_assert!(rel_close(r.f_beta, classical, 1e-5), "{} vs {}", r.f_beta, classical);
    }

    #[test]
    fn entropy_fisher_by_reparametrisation(model in any_model(), beta in 0.2f64..4.0) {
        let Ok(r) = fisher_report(&model, beta, 1) else { return Ok(()); };
        let ds = d1(|b| thermo_point(&model, b).unwrap().s, beta, 1e-3 * beta);
        prop_assert!(rel_close(r.f_beta / (ds * ds), r.f_s, 1e-6));
    }

    #[test]
    fn log_partition_derivatives(model in any_model(), beta in 0.2f64..4.0) {
        let p = thermo_point(&model, beta).unwrap();
        let h = 1e-3 * beta;
        // Keep the stencil roundoff, ~eps·|ln Z|/h², well below the tolerance.
        prop_assume!(p.var_h * h * h > 1e-9 * (1.0 + p.ln_z.abs()));
        let f = |b: f64| log_partition(&model, b).unwrap();
        prop_assert!(rel_close(-d1(f, beta, h), p.u, 1e-6) || (d1(f, beta, h) + p.u).abs() < 1e-9);
        prop_assert!(rel_close(d2(f, beta, h), p.var_h, 1e-6), "{} vs {}", d2(f, beta, h), p.var_h);
    }

    #[test]
    fn renyi_derivative_by_differences(
        model in any_model(),
        beta in 0.2f64..3.0,
        alpha in prop_oneof![0.3f64..0.9, 1.2f64..4.0],
    ) {
        let r = renyi_point(&model, beta, alpha).unwrap();
        let num = d1(|b| renyi_point(&model, b, alpha).unwrap().s_alpha, beta, 1e-3 * beta);
        prop_assert!(rel_close(num, r.ds_alpha_dbeta, 1e-6) || (num - r.ds_alpha_dbeta).abs() < 1e-10);
    }

    #[test]
    fn renyi_fisher_by_reparametrisation(model in any_model(), beta in 0.2f64..3.0, alpha in 1.2f64..4.0) {
        let Ok(fr) = renyi_fisher(&model, beta, alpha) else { return Ok(()); };
        let var = thermo_point(&model, beta).unwrap().var_h;
        let ds = renyi_point(&model, beta, alpha).unwrap().ds_alpha_dbeta;
        prop_assert!(rel_close(var / (ds * ds), fr.f_s_alpha, 1e-10));
    }

    #[test]
    fn renyi_entropy_decreases_in_alpha(model in spectrum_strategy(), beta in 0.1f64..3.0, a in 0.1f64..5.0, b in 0.1f64..5.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let s_lo = renyi_point(&model, beta, lo).unwrap().s_alpha;
        let s_hi = renyi_point(&model, beta, hi).unwrap().s_alpha;
        prop_assert!(s_hi <= s_lo + 1e-12);
    }

    #[test]
    fn energy_shift_invariance(
        levels in prop::collection::vec((0.0f64..3.0, 1u64..4), 2..6),
        shift in -50.0f64..50.0,
        beta in 0.1f64..3.0,
    ) {
        prop_assume!(levels.iter().any(|l| (l.0 - levels[0].0).abs() > 0.05));
        let build = |c: f64| ThermalModel::spectrum(
            levels.iter().map(|&(e, g)| EnergyLevel::new(e + c, g)).collect(),
        ).unwrap();
        let a = thermo_point(&build(0.0), beta).unwrap();
        let b = thermo_point(&build(shift), beta).unwrap();
        prop_assert!(rel_close(a.s, b.s, 1e-9) || (a.s - b.s).abs() < 1e-12);
        prop_assert!(rel_close(a.var_h, b.var_h, 1e-9));
        prop_assert!((b.ln_z - (a.ln_z - beta * shift)).abs() < 1e-9 * (1.0 + (beta * shift).abs()));
        prop_assert!((b.u - a.u - shift).abs() < 1e-9 * (1.0 + shift.abs()));
    }

    #[test]
    fn merging_levels_preserves_partition_function(
        levels in prop::collection::vec((0u8..5, 1u64..4), 2..8),
        beta in 0.1f64..3.0,
    ) {
        let merged = ThermalModel::spectrum(
            levels.iter().map(|&(e, g)| EnergyLevel::new(e as f64, g)).collect(),
        ).unwrap();
        let split = ThermalModel::spectrum(
            levels.iter()
                .flat_map(|&(e, g)| std::iter::repeat_n(EnergyLevel::new(e as f64, 1), g as usize))
                .collect(),
        ).unwrap();
        let direct: f64 = levels.iter().map(|&(e, g)| g as f64 * (-beta * e as f64).exp()).sum();
        prop_assert!(rel_close(log_partition(&merged, beta).unwrap(), direct.ln(), 1e-12) || (log_partition(&merged, beta).unwrap() - direct.ln()).abs() < 1e-14);
        prop_assert_eq!(log_partition(&merged, beta).unwrap(), log_partition(&split, beta).unwrap());
    }

    #[test]
    fn entropy_decreases_with_beta(model in any_model(), b1 in 0.05f64..10.0, b2 in 0.05f64..10.0) {
        prop_assume!((b1 - b2).abs() > 1e-6);
        let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
        let s_lo = thermo_point(&model, lo).unwrap().s;
        let s_hi = thermo_point(&model, hi).unwrap().s;
        prop_assert!(s_hi <= s_lo + 1e-12);
    }

    #[test]
    fn oscillator_heat_capacity_increases_with_temperature(omega in 0.1f64..5.0, t1 in 0.05f64..20.0, t2 in 0.05f64..20.0) {
        prop_assume!((t1 - t2).abs() > 1e-6);
        let m = ThermalModel::oscillator(omega).unwrap();
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        let c_lo = thermo_point(&m, 1.0 / lo).unwrap().c_v;
        let c_hi = thermo_point(&m, 1.0 / hi).unwrap().c_v;
        prop_assert!(c_hi >= c_lo);
    }

    #[test]
    fn single_charge_gge_is_canonical(model in spectrum_strategy(), beta in 0.1f64..3.0) {
        let levels = model.levels().unwrap();
        let e = JointEnsemble::new(
            levels.iter().map(|l| ChargeState { charges: vec![l.energy], degeneracy: l.degeneracy }).collect(),
            vec![beta],
        ).unwrap();
        let gge = gge_report(&e).unwrap();
        let canonical = fisher_report(&model, beta, 1).unwrap();
        prop_assert!(rel_close(gge.f_s, canonical.f_s, 1e-12));
    }

    #[test]
    fn fixed_number_heat_capacity_is_bounded(
        states in prop::collection::vec((-2.0f64..2.0, 0u8..4, 1u64..3), 3..10),
        beta in 0.2f64..3.0,
        mu in -1.0f64..1.0,
    ) {
        let states: Vec<ParticleState> = states
            .into_iter()
            .map(|(e, n, g)| ParticleState { energy: e, particles: n as f64, degeneracy: g })
            .collect();
        let Ok(r) = gce_report(&states, beta, mu) else { return Ok(()); };
        if let Some(c) = r.c_v_fixed_n {
            prop_assert!(c <= r.c_v * (1.0 + 1e-12) + 1e-15);
            prop_assert!(c >= -1e-12 * r.c_v.max(1e-300));
        }
    }

    #[test]
    fn gge_entropy_gradient_and_positivity(
        states in prop::collection::vec(prop::collection::vec(-1.5f64..1.5, 3), 4..10),
        lambdas in prop::collection::vec(-1.5f64..1.5, 3),
    ) {
        let states: Vec<ChargeState> = states
            .into_iter()
            .map(|charges| ChargeState { charges, degeneracy: 1 })
            .collect();
        let e = JointEnsemble::new(states.clone(), lambdas.clone()).unwrap();
        let Ok(r) = gge_report(&e) else { return Ok(()); };
        for k in 0..3 {
            let s_at = |x: f64| {
                let mut l = lambdas.clone();
                l[k] = x;
                JointEnsemble::new(states.clone(), l).unwrap().entropy().unwrap()
            };
            let num = d1(s_at, lambdas[k], 1e-3);
            prop_assert!((num - r.entropy_gradient[k]).abs() < 1e-6 * (1.0 + num.abs()));
        }
        let f = DMatrix::from_fn(3, 3, |i, j| r.fisher_matrix[i][j]);
        let trace = f.trace();
        for ev in f.symmetric_eigen().eigenvalues.iter() {
            prop_assert!(*ev >= -1e-12 * trace);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>(), beta in 0.3f64..2.0) {
        let cfg = SimConfig {
            model: ThermalModel::two_level(1.0).unwrap(),
            beta_true: beta,
            n_copies: 50,
            n_trials: 64,
            master_seed: seed,
        };
        prop_assert_eq!(run_trials(&cfg).unwrap(), run_trials(&cfg).unwrap());
    }
}

#[test]
fn two_level_entropy_fisher_has_interior_minimum() {
    let m = ThermalModel::two_level(1.0).unwrap();
    let temps: Vec<f64> = (0..400)
        .map(|i| 0.05 * (1000.0f64).powf(i as f64 / 399.0))
        .collect();
    let fs: Vec<f64> = temps
        .iter()
        .map(|t| fisher_report(&m, 1.0 / t, 1).unwrap().f_s)
        .collect();
    let (imin, _) = fs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    assert!(imin > 0 && imin < temps.len() - 1);
    // The minimum of F_S is the maximum of C_v, the Schottky peak near T = 0.4168.
    assert!(
        (temps[imin] - 0.4168).abs() < 0.01,
        "minimum at {}",
        temps[imin]
    );
}

#[test]
fn estimator_is_consistent() {
    let model = ThermalModel::two_level(1.0).unwrap();
    let truth = thermo_point(&model, 1.0).unwrap();
    let trials = 400u64;
    let cfg = SimConfig {
        model,
        beta_true: 1.0,
        n_copies: 4000,
        n_trials: trials,
        master_seed: 7,
    };
    let st = run_trials(&cfg).unwrap();
    let band_s = 3.0 * truth.c_v.sqrt() / (cfg.n_copies as f64).sqrt() / (trials as f64).sqrt();
    assert!((st.mean_s_hat - truth.s).abs() < band_s + 3.0 * truth.c_v / cfg.n_copies as f64);
    assert!((st.mean_t_hat - 1.0).abs() < 0.01);
    assert!(st.ratio_s > 0.8 && st.ratio_s < 1.2);
}

#[test]
fn saturation_ratio_approaches_one() {
    let mut prev_gap = f64::INFINITY;
    for n in [10u64, 100, 1000] {
        let cfg = SimConfig {
            model: ThermalModel::two_level(1.0).unwrap(),
            beta_true: 1.0,
            n_copies: n,
            n_trials: 4000,
            master_seed: 11,
        };
        let st = run_trials(&cfg).unwrap();
        let gap = (st.ratio_s - 1.0).abs();
        assert!(
            gap < prev_gap + 2.0 * st.ratio_s_se,
            "n = {n}: gap {gap}, previous {prev_gap}"
        );
        prev_gap = gap;
    }
}

#[test]
fn critical_entropy_fisher_falls_with_size() {
    let series =
        scaling_series(&[4, 6, 8], critical_temperature(), Backend::TransferMatrix).unwrap();
    for w in series.entries.windows(2) {
        assert!(w[1].f_s < w[0].f_s);
    }
}
