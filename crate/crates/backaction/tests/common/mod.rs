//! Shared test fixtures and independent oracles.
//!
//! The oracles here re-derive everything they check straight from the
//! linearized equations of motion, sharing nothing with the closed-form
//! implementation paths they gate.

#![allow(dead_code)]

use num_complex::Complex64;

use backaction::params::{build_params, derive_scales, RawConfig, SystemParams};
use backaction::steady_state::MeanFieldSolution;

pub const TWO_PI: f64 = std::f64::consts::TAU;
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn config_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

pub fn load_config(name: &str) -> SystemParams {
    build_params(&RawConfig::load(&config_path(name)).unwrap()).unwrap()
}

pub fn fig2_at(p_in: f64) -> SystemParams {
    let mut p = load_config("fig2.cfg");
    p.p_in = p_in;
    p
}

/// Brute-force mean-field root scan: residual sign changes on a uniform grid
/// of 1e6 points over [0, 2 gamma_in flux / gamma^2], refined by bisection.
/// Also certifies the root count.
pub fn brute_force_roots(p: &SystemParams) -> Vec<f64> {
    let s = derive_scales(p);
    let gamma = p.gamma();
    let drive = 2.0 * p.gamma_in * s.flux_in;
    if drive == 0.0 {
        return vec![0.0];
    }
    let spring = s.g * s.g * backaction::consts::HBAR / (p.m_eff * p.omega_m * p.omega_m);
    let beta = spring + p.kerr.re;
    let lam_i = p.kerr.im;
    let h = |n: f64| n * ((gamma + lam_i * n).powi(2) + (p.delta0 + beta * n).powi(2)) - drive;

    let n_max = drive / (gamma * gamma) * 1.000001;
    let grid_n = 1_000_000usize;
    let mut roots = Vec::new();
    let mut prev = h(0.0);
    for i in 1..=grid_n {
        let n = n_max * i as f64 / grid_n as f64;
        let cur = h(n);
        if prev == 0.0 {
            roots.push(n_max * (i - 1) as f64 / grid_n as f64);
        } else if prev.signum() != cur.signum() {
            let (mut lo, mut hi) = (n_max * (i - 1) as f64 / grid_n as f64, n);
            let mut flo = prev;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = h(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    roots
}

fn det3(a: &[[Complex64; 3]; 3]) -> Complex64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// First component of the solution of a 3x3 complex system (Cramer's rule).
fn solve3(a: &[[Complex64; 3]; 3], b: &[Complex64; 3]) -> Complex64 {
    let det = det3(a);
    let mut a1 = *a;
    for r in 0..3 {
        a1[r][0] = b[r];
    }
    det3(&a1) / det
}

/// Independent frequency-domain solver: the three linearized equations
/// (field at +W, conjugate field at -W, displacement) assembled as a 3x3
/// complex system, solved for the output coefficient of each input port.
pub fn oracle_coefficients(
    sol: &MeanFieldSolution,
    p: &SystemParams,
    omega: f64,
) -> [Complex64; 6] {
    let gamma = sol.gamma;
    let ot = omega / gamma;
    let z = sol.delta_tilde_c();
    let k = sol.k;
    let m = sol.m;
    let sqrt_l = sol.sqrt_l;
    let l = sol.l;
    let eta = sol.eta;

    let d1 = 1.0 + I * (ot - z - k);
    let d2 = 1.0 + I * (ot + z.conj() + k.conj());
    let chi =
        gamma * gamma / Complex64::new(p.omega_m * p.omega_m - omega * omega, omega * p.gamma_m);
    let n_bar = backaction::consts::KB * p.temperature / (backaction::consts::HBAR * p.omega_m);
    let thermal_amp = (n_bar * p.gamma_m / gamma).sqrt();
    let mech = 2.0 * (p.omega_m / gamma) * chi;

    // Rows: field(+W) equation, conjugate-field(-W) equation, displacement.
    let a = [
        [d1, -I * k * l, -I * m * sqrt_l],
        [I * (k * l).conj(), d2, I * m * sqrt_l.conj()],
        [-mech * m * sqrt_l.conj(), -mech * m * sqrt_l, Complex64::new(1.0, 0.0)],
    ];
    let se = eta.sqrt();
    let sl = (1.0 - eta).max(0.0).sqrt();
    let zero = Complex64::new(0.0, 0.0);
    let rhs: [[Complex64; 3]; 6] = [
        [Complex64::new(2.0 * se, 0.0), zero, zero],
        [zero, Complex64::new(2.0 * se, 0.0), zero],
        [zero, zero, mech * thermal_amp],
        [Complex64::new(2.0 * sl, 0.0), zero, zero],
        [zero, Complex64::new(2.0 * sl, 0.0), zero],
        [I * m * sqrt_l, -I * m * sqrt_l.conj(), zero],
    ];
    let mut out = [zero; 6];
    for (idx, b) in rhs.iter().enumerate() {
        let alpha = solve3(&a, b);
        out[idx] = se * alpha;
        if idx == 0 {
            out[idx] -= 1.0; // input-output subtraction on the driven port
        }
    }
    out
}

/// Physical-observable oracle for the intensity transfer: drive coherent
/// sidebands on the input port at +-W and form the photodetected flux
/// modulation relative to the input flux modulation.
pub fn oracle_intensity_transfer(
    sol: &MeanFieldSolution,
    p: &SystemParams,
    omega: f64,
) -> f64 {
    let cp = oracle_coefficients(sol, p, omega);
    let cm = oracle_coefficients(sol, p, -omega);
    let out_p = cp[0] + cp[1];
    let out_m = cm[0] + cm[1];
    let gain = 0.5 * (sol.l2.conj() * out_p + sol.l2 * out_m.conj());
    gain.norm_sqr()
}

/// Random below-threshold parameter draw for oracle-equivalence sweeps.
/// Rejection-samples until the dressed mode is damped at every frequency.
pub struct RandomStable {
    pub params: SystemParams,
    pub solution: MeanFieldSolution,
}

pub fn random_stable_set(rng: &mut impl rand::Rng) -> RandomStable {
    use backaction::linear_response::damping_margin;
    use backaction::steady_state::solve_mean_field;
    loop {
        let gamma_hz: f64 = rng.gen_range(2.0e6..40.0e6);
        let eta: f64 = rng.gen_range(0.1..1.0);
        let omega0 = TWO_PI * rng.gen_range(1.0e14..3.0e14);
        let p = SystemParams {
            omega0,
            omega_laser: omega0,
            delta0: TWO_PI * gamma_hz * rng.gen_range(-1.5..1.5),
            gamma_in: TWO_PI * gamma_hz * eta,
            gamma_loss: TWO_PI * gamma_hz * (1.0 - eta),
            omega_m: TWO_PI * gamma_hz * rng.gen_range(0.05..1.5),
            gamma_m: TWO_PI * gamma_hz * rng.gen_range(1.0e-4..5.0e-3),
            m_eff: rng.gen_range(1.0e-10..1.0e-7),
            radius: rng.gen_range(1.0e-6..50.0e-6),
            kerr: Complex64::new(
                TWO_PI * rng.gen_range(-2.0..2.0),
                TWO_PI * rng.gen_range(0.0..1.0),
            ),
            temperature: if rng.gen_bool(0.5) { 300.0 } else { 0.0 },
            p_in: rng.gen_range(1.0e-9..2.0e-5),
        };
        if p.validate().is_err() {
            continue;
        }
        let s = derive_scales(&p);
        let Ok(roots) = solve_mean_field(&p, &s) else { continue };
        let sol = roots.into_iter().next().unwrap();
        // Keep the backaction noticeable but safely below threshold.
        if sol.m < 1.0e-6 {
            continue;
        }
        match damping_margin(&sol, &p) {
            Ok(margin) if margin > 0.05 => return RandomStable { params: p, solution: sol },
            _ => continue,
        }
    }
}
