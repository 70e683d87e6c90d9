//! Classical mean field of the driven cavity.
//!
//! Setting the time derivatives to zero in the coupled equations of motion
//! gives the mean intracavity amplitude
//!
//! ```text
//! a_bar = sqrt(2 gamma_in) a_in / (gamma - i Delta_bar),
//! Delta_bar = delta0 + g x_bar + Lambda |a_bar|^2,
//! ```
//!
//! with the static displacement forced by the constant radiation pressure,
//! `x_bar = g hbar |a_bar|^2 / (m_eff omega_m^2)`. A complex Kerr rate splits
//! into a detuning shift (real part) and an intensity-dependent loss
//! (imaginary part), `gamma_eff = gamma + Im(Lambda) |a_bar|^2`.
//!
//! Both the spring term and the Kerr term shift the detuning linearly in the
//! photon number `n = |a_bar|^2`, so self-consistency reduces to the real
//! scalar residual
//!
//! ```text
//! h(n) = n [ gamma_eff(n)^2 + Delta_bar(n)^2 ] - 2 gamma_in flux_in,
//! ```
//!
//! a cubic with up to three non-negative roots (optical bistability). Roots
//! are located by splitting `[0, n_max]` at the critical points of the cubic
//! and bisecting each bracketing interval, which is robust at bistability
//! turning points where Newton iterations stall.

use num_complex::Complex64;

use crate::consts::HBAR;
use crate::error::Error;
use crate::params::{derive_scales, DerivedScales, SystemParams};
use crate::Result;

/// Relative residual every returned solution must satisfy.
const RESIDUAL_TOL: f64 = 1e-10;

/// Self-consistent mean-field solution at one input power.
#[derive(Debug, Clone)]
pub struct MeanFieldSolution {
    /// Intracavity amplitude (sqrt photons); phase relative to a real input.
    pub a_bar: Complex64,
    /// Intracavity photon number |a_bar|^2.
    pub n_cav: f64,
    /// Effective detuning, real part (rad/s).
    pub delta_bar: f64,
    /// Static radiation-pressure displacement (m).
    pub x_bar: f64,
    /// Dimensionless complex Kerr shift K = (kerr/gamma) |a_bar|^2.
    pub k: Complex64,
    /// Dimensionless drive M = g x_zp |a_bar| / gamma.
    pub m: f64,
    /// Carrier phase-squared factor L = (a_bar/|a_bar|)^2, |L| = 1.
    pub l: Complex64,
    /// Principal carrier phase sqrt(L) = a_bar/|a_bar|.
    pub sqrt_l: Complex64,
    /// Mean-field input-output factor L2 = 2 eta / (1 - i Delta_tilde_c) - 1.
    pub l2: Complex64,
    /// delta_bar / gamma.
    pub delta_tilde: f64,
    /// Bistability branch index, ascending photon number (0 = lowest).
    pub branch_id: usize,
    /// Total bare decay rate gamma (rad/s), carried for kernel evaluation.
    pub gamma: f64,
    /// Kerr-augmented decay gamma + Im(Lambda) n (rad/s).
    pub gamma_eff: f64,
    /// Coupling fraction gamma_in / gamma.
    pub eta: f64,
}

impl MeanFieldSolution {
    /// Complex dimensionless detuning including the Kerr loss,
    /// `Delta_tilde_c = delta_bar/gamma + i Im(K)`. The linearized kernels
    /// are written in terms of this quantity; it reduces to `delta_tilde`
    /// for a real Kerr rate.
    pub fn delta_tilde_c(&self) -> Complex64 {
        Complex64::new(self.delta_tilde, self.k.im)
    }

    /// Dimensionless sideband frequency omega / gamma.
    pub fn omega_tilde(&self, omega: f64) -> f64 {
        omega / self.gamma
    }
}

/// Continuation sweep result: one solution per power plus the indices at
/// which the tracked branch jumped.
#[derive(Debug, Clone)]
pub struct ContinuationSweep {
    pub solutions: Vec<MeanFieldSolution>,
    /// Indices into `solutions` where the continued root jumped branches.
    pub jumps: Vec<usize>,
}

/// Branch selection policy for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchPolicy {
    /// Follow the root closest in photon number to the previous power
    /// (mimics a monotone power ramp under thermal locking).
    Continuation,
    /// Always take the lowest-photon-number root.
    Low,
    /// Always take the highest-photon-number root.
    High,
}

fn finish_solution(
    p: &SystemParams,
    s: &DerivedScales,
    n: f64,
    branch_id: usize,
) -> MeanFieldSolution {
    let gamma = p.gamma();
    let gamma_eff = gamma + p.kerr.im * n;
    let spring = s.g * s.g * HBAR / (p.m_eff * p.omega_m * p.omega_m);
    let delta_bar = p.delta0 + (spring + p.kerr.re) * n;
    let denom = Complex64::new(gamma_eff, -delta_bar);
    let a_bar = (2.0 * p.gamma_in * s.flux_in).sqrt() * denom.conj() / denom.norm_sqr();
    // Carrier phase from the denominator directly; identical to a_bar/|a_bar|
    // but well defined in the undriven limit a_bar -> 0.
    let sqrt_l = Complex64::new(gamma_eff, delta_bar) / denom.norm();
    let l2 = 2.0 * p.gamma_in * denom.conj() / denom.norm_sqr() - 1.0;
    MeanFieldSolution {
        a_bar,
        n_cav: n,
        delta_bar,
        x_bar: s.g * HBAR * n / (p.m_eff * p.omega_m * p.omega_m),
        k: s.lambda_tilde * n,
        m: s.g_tilde * n.sqrt(),
        l: sqrt_l * sqrt_l,
        sqrt_l,
        l2,
        delta_tilde: delta_bar / gamma,
        branch_id,
        gamma,
        gamma_eff,
        eta: s.eta,
    }
}

/// Solves the mean-field fixed point, returning every real solution in
/// ascending photon number. There is always at least one.
pub fn solve_mean_field(
    p: &SystemParams,
    s: &DerivedScales,
) -> Result<Vec<MeanFieldSolution>> {
    p.validate()?;
    let gamma = p.gamma();
    let drive = 2.0 * p.gamma_in * s.flux_in;
    if drive == 0.0 {
        return Ok(vec![finish_solution(p, s, 0.0, 0)]);
    }

    let lam_i = p.kerr.im;
    let spring = s.g * s.g * HBAR / (p.m_eff * p.omega_m * p.omega_m);
    let beta = spring + p.kerr.re;

    // h(n) = a3 n^3 + a2 n^2 + a1 n - drive, with
    // a3 n^2 + a2 n + a1 = gamma_eff(n)^2 + Delta_bar(n)^2 >= 0.
    let a3 = lam_i * lam_i + beta * beta;
    let a2 = 2.0 * (gamma * lam_i + p.delta0 * beta);
    let a1 = gamma * gamma + p.delta0 * p.delta0;
    let h = |n: f64| ((a3 * n + a2) * n + a1) * n - drive;

    let mut roots: Vec<f64> = Vec::new();
    if a3 == 0.0 && a2 == 0.0 {
        // Linear cavity (g = 0, Lambda = 0): closed form.
        roots.push(drive / a1);
    } else {
        // Critical points of the cubic: 3 a3 n^2 + 2 a2 n + a1 = 0.
        let mut crits: Vec<f64> = Vec::new();
        let (qa, qb, qc) = (3.0 * a3, 2.0 * a2, a1);
        if qa != 0.0 {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc > 0.0 {
                let sq = disc.sqrt();
                // Numerically stable quadratic roots.
                let q = -0.5 * (qb + qb.signum() * sq);
                for cand in [q / qa, if q != 0.0 { qc / q } else { f64::NAN }] {
                    if cand.is_finite() && cand > 0.0 {
                        crits.push(cand);
                    }
                }
            }
        } else if qb != 0.0 {
            let cand = -qc / qb;
            if cand > 0.0 {
                crits.push(cand);
            }
        }
        // Upper bound: past the largest critical point h is monotone
        // increasing, so doubling until h > 0 encloses every root.
        let mut upper = (drive / a1 * 1.000001 + f64::MIN_POSITIVE)
            .max(crits.iter().fold(0.0_f64, |m, &c| m.max(2.0 * c)));
        let mut guard = 0;
        while h(upper) < 0.0 {
            upper *= 2.0;
            guard += 1;
            if guard > 600 {
                return Err(Error::NoConvergence {
                    what: "mean-field upper bracket".to_string(),
                    residual: h(upper),
                });
            }
        }
        let mut knots = vec![0.0, upper];
        knots.extend(crits.into_iter().filter(|&c| c < upper));
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in knots.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let (mut flo, fhi) = (h(lo), h(hi));
            if flo == 0.0 {
                roots.push(lo);
                continue;
            }
            if flo.signum() == fhi.signum() {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fmid = h(mid);
                if fmid == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fmid.signum() == flo.signum() {
                    lo = mid;
                    flo = fmid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        // Dedup near-coincident roots (tangential double roots).
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1e-6));
    }

    let mut out = Vec::with_capacity(roots.len());
    for (i, &n) in roots.iter().enumerate() {
        let sol = finish_solution(p, s, n, i);
        // Certify against the defining relations.
        let expect = 2.0 * p.gamma_in * s.flux_in
            / (sol.gamma_eff * sol.gamma_eff + sol.delta_bar * sol.delta_bar);
        let resid = (sol.n_cav - expect).abs() / expect.abs().max(1e-300);
        if resid > RESIDUAL_TOL && (sol.n_cav - expect).abs() > 1e-6 {
            return Err(Error::NoConvergence {
                what: format!("mean-field root at n = {n:.6e}"),
                residual: resid,
            });
        }
        out.push(sol);
    }
    Ok(out)
}

/// Convenience: solve at a single power with a branch policy.
pub fn mean_field_at_power(
    p: &SystemParams,
    p_in: f64,
    policy: BranchPolicy,
) -> Result<MeanFieldSolution> {
    let pw = p.with_power(p_in);
    let s = derive_scales(&pw);
    let roots = solve_mean_field(&pw, &s)?;
    let sol = match policy {
        BranchPolicy::Low | BranchPolicy::Continuation => roots.into_iter().next(),
        BranchPolicy::High => roots.into_iter().last(),
    };
    sol.ok_or_else(|| Error::NoConvergence {
        what: "no mean-field root".to_string(),
        residual: f64::NAN,
    })
}

/// Mean output amplitude through the input-output relation,
/// `a_out = a_in (2 eta / (1 - i Delta_tilde_c) - 1) = a_in L2`.
pub fn mean_output(sol: &MeanFieldSolution, a_in: Complex64) -> Complex64 {
    a_in * sol.l2
}

/// Sweeps an ascending power list, tracking one root per power by
/// continuation: each step keeps the root closest in photon number to the
/// previous step (the first step starts on the lowest branch). Discontinuous
/// jumps between branches are reported, not fatal.
pub fn continuation_sweep(p: &SystemParams, powers: &[f64]) -> Result<ContinuationSweep> {
    if powers.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Precondition("powers must be sorted ascending".to_string()));
    }
    let mut solutions: Vec<MeanFieldSolution> = Vec::with_capacity(powers.len());
    let mut jumps = Vec::new();
    let mut prev_n: Option<f64> = None;
    for (i, &pw) in powers.iter().enumerate() {
        let pp = p.with_power(pw);
        let s = derive_scales(&pp);
        let roots = solve_mean_field(&pp, &s)?;
        let chosen = match prev_n {
            None => roots.first().cloned().unwrap(),
            Some(n0) => roots
                .iter()
                .min_by(|a, b| {
                    (a.n_cav - n0)
                        .abs()
                        .partial_cmp(&(b.n_cav - n0).abs())
                        .unwrap()
                })
                .cloned()
                .unwrap(),
        };
        if let Some(n0) = prev_n {
            // A jump shows up as a change far larger than the drive increment
            // alone could produce on a smooth branch.
            if chosen.branch_id != solutions[i - 1].branch_id
                && (chosen.n_cav - n0).abs() > 0.5 * n0.max(1.0)
            {
                jumps.push(i);
            }
        }
        prev_n = Some(chosen.n_cav);
        solutions.push(chosen);
    }
    Ok(ContinuationSweep { solutions, jumps })
}
