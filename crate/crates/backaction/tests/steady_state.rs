//! Mean-field solver against the brute-force residual-scan oracle.

mod common;

use backaction::params::derive_scales;
use backaction::steady_state::{continuation_sweep, solve_mean_field};
use common::{brute_force_roots, fig2_at};
use rand::{Rng, SeedableRng};

#[test]
fn fig2_base_power_photon_number() {
    // Frozen from the 1e6-point scan + bisection oracle at 3.0 uW.
    let expected = 3.8994442957e5;
    let p = fig2_at(3.0e-6);
    let s = derive_scales(&p);
    let roots = solve_mean_field(&p, &s).unwrap();
    assert_eq!(roots.len(), 1);
    assert!(
        (roots[0].n_cav - expected).abs() / expected < 1e-9,
        "n_cav = {:.10e}",
        roots[0].n_cav
    );
    let oracle = brute_force_roots(&p);
    assert_eq!(oracle.len(), 1);
    assert!((roots[0].n_cav - oracle[0]).abs() / oracle[0] < 1e-9);
}

#[test]
fn solver_matches_scan_oracle_on_random_draws() {
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2024);
    for i in 0..100 {
        let set = common::random_stable_set(&mut rng);
        let p = set.params;
        let s = derive_scales(&p);
        let solved = solve_mean_field(&p, &s).unwrap();
        let oracle = brute_force_roots(&p);
        assert_eq!(
            solved.len(),
            oracle.len(),
            "draw {i}: root count {} vs oracle {}",
            solved.len(),
            oracle.len()
        );
        assert!(solved.len() % 2 == 1, "draw {i}: even root count");
        for (a, b) in solved.iter().zip(&oracle) {
            assert!(
                (a.n_cav - b).abs() / b.max(1e-9) < 1e-6,
                "draw {i}: {} vs oracle {}",
                a.n_cav,
                b
            );
        }
    }
}

#[test]
fn kerr_bistability_root_counts_certified() {
    // Strong positive Kerr, red detuning: classic dispersive bistability.
    let mut p = fig2_at(1.0e-6);
    p.radius = f64::INFINITY;
    p.kerr = num_complex::Complex64::new(common::TWO_PI * 50.0, 0.0);
    p.delta0 = -4.0 * p.gamma();
    p.omega_laser = p.omega0 + p.delta0;
    let mut seen_three = false;
    for pw_uw in [5.0, 9.0, 12.0, 16.0, 20.0, 24.0, 30.0] {
        let pp = p.with_power(pw_uw * 1.0e-6);
        let s = derive_scales(&pp);
        let solved = solve_mean_field(&pp, &s).unwrap();
        let oracle = brute_force_roots(&pp);
        assert_eq!(solved.len(), oracle.len(), "at {pw_uw} uW");
        for (a, b) in solved.iter().zip(&oracle) {
            assert!((a.n_cav - b).abs() / b < 1e-6);
        }
        seen_three |= solved.len() == 3;
    }
    assert!(seen_three, "sweep never entered the bistable window");
}

#[test]
fn fig2_ladder_is_monotone_without_jumps() {
    let p = fig2_at(3.0e-6);
    let powers: Vec<f64> = (0..18).map(|i| 3.0e-6 + 9.0e-6 * i as f64 / 17.0).collect();
    let sweep = continuation_sweep(&p, &powers).unwrap();
    assert!(sweep.jumps.is_empty());
    for w in sweep.solutions.windows(2) {
        assert!(w[1].n_cav > w[0].n_cav);
    }
    // Each tracked point agrees with the independent scan oracle.
    for (i, &pw) in powers.iter().enumerate() {
        let oracle = brute_force_roots(&p.with_power(pw));
        let closest = oracle
            .iter()
            .map(|r| (sweep.solutions[i].n_cav - r).abs() / r)
            .fold(f64::INFINITY, f64::min);
        assert!(closest < 1e-9, "power {pw}: relative gap {closest}");
    }
}

#[test]
fn random_linear_cavities_have_exact_slope() {
    // g = 0, Lambda = 0: photon number strictly linear in power.
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
    for _ in 0..20 {
        let mut p = fig2_at(rng.gen_range(1.0e-7..2.0e-5));
        p.radius = f64::INFINITY;
        p.kerr = num_complex::Complex64::new(0.0, 0.0);
        p.delta0 = p.gamma() * rng.gen_range(-2.0..2.0);
        p.omega_laser = p.omega0 + p.delta0;
        let s = derive_scales(&p);
        let r = solve_mean_field(&p, &s).unwrap();
        assert_eq!(r.len(), 1);
        let slope = 2.0 * p.gamma_in
            / ((p.gamma().powi(2) + p.delta0.powi(2))
                * backaction::consts::HBAR
                * p.omega_laser);
        assert!((r[0].n_cav - slope * p.p_in).abs() / r[0].n_cav < 1e-12);
    }
}
