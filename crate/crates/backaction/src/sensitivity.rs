//! Displacement sensitivity relative to the standard quantum limit.
//!
//! The self-homodyne amplitude quadrature transduces a cavity-length
//! perturbation with gain `H6`; inverting it turns the measured quadrature
//! into a displacement estimate. The estimator noise is the quadrature noise
//! of the two vacuum ports referred back through `H6`, and the SQL benchmark
//! is `hbar |chi_eff|` with the backaction-dressed susceptibility in SI
//! units. Their ratio,
//!
//! ```text
//! S_x,sig / S_SQL = (sum |G|^2 / |H6|^2) / (4 omega_m_tilde |chi_eff|),
//! ```
//!
//! is what drops below one near the dressed resonance as the pump approaches
//! the regenerative threshold. Thermal motion is excluded by default (cooled
//! mirror assumption); a flag adds it back for realism studies.
//!
//! The absolute uncertainty is reported with the dimensionally consistent
//! `x_zp^2 / (2 gamma)` spectral-density prefactor by default. Some
//! treatments carry a `1 / sqrt(2 gamma)` prefactor instead; that variant is
//! available behind [`Prefactor::SqrtRate`] for comparison, and does not
//! affect the SQL ratio.

use num_complex::Complex64;

use crate::consts::HBAR;
use crate::error::Error;
use crate::linear_response::{effective_susceptibility, quadrature_gains};
use crate::params::SystemParams;
use crate::steady_state::MeanFieldSolution;
use crate::Result;

/// Normalization of the reported uncertainty spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Prefactor {
    /// `x_zp^2 / (2 gamma)`: dimensionally consistent; `ratio * s_sql = s_x_sig`.
    #[default]
    Rate,
    /// `x_zp^2 / sqrt(2 gamma)`: alternate normalization, reported only.
    SqrtRate,
}

/// Options for the sensitivity computation.
#[derive(Debug, Clone, Copy, Default)]
pub struct SensitivityOptions {
    /// Include the thermal term |H3|^2 in the estimator noise.
    pub thermal: bool,
    /// Spectral-density prefactor for the reported `s_x_sig`.
    pub prefactor: Prefactor,
}

/// Sensitivity at one sideband frequency.
#[derive(Debug, Clone)]
pub struct SensitivitySample {
    /// Sideband angular frequency (rad/s).
    pub omega: f64,
    /// Signal transduction gain onto the measured quadrature.
    pub h6: Complex64,
    /// Estimator noise in units of x_zp^2: `sum |G|^2 / |H6|^2`.
    pub s_dimensionless: f64,
    /// Measurement uncertainty spectral density (m^2 s), per the prefactor.
    pub s_x_sig: f64,
    /// Standard quantum limit `hbar |chi_eff|` in SI units (m^2 s).
    pub s_sql: f64,
    /// `s_x_sig / s_sql` under the consistent normalization.
    pub ratio: f64,
}

/// Contiguous sub-SQL frequency intervals on an evaluation grid.
#[derive(Debug, Clone)]
pub struct BandReport {
    /// Intervals (rad/s) where ratio < 1; empty is a valid result.
    pub intervals: Vec<(f64, f64)>,
    /// Grid minimum of the ratio and where it occurs, if any point was defined.
    pub argmin: Option<(f64, f64)>,
}

/// Complex gain mapping the measured output quadrature to the displacement
/// estimate, `x_zp / H6` (meters per quadrature unit).
pub fn signal_estimate_gain(
    sol: &MeanFieldSolution,
    p: &SystemParams,
    omega: f64,
) -> Result<Complex64> {
    let q = quadrature_gains(sol, p, omega)?;
    let h6 = q.h[5];
    if h6.norm() == 0.0 {
        return Err(Error::NoTransduction);
    }
    let x_zp = (HBAR / (2.0 * p.m_eff * p.omega_m)).sqrt();
    Ok(x_zp * h6.inv())
}

/// Measurement uncertainty and its ratio to the SQL at one frequency.
pub fn sensitivity(
    sol: &MeanFieldSolution,
    p: &SystemParams,
    omega: f64,
    opts: SensitivityOptions,
) -> Result<SensitivitySample> {
    let q = quadrature_gains(sol, p, omega)?;
    let h6 = q.h[5];
    if h6.norm() == 0.0 {
        return Err(Error::NoTransduction);
    }
    let mut noise = q.g_in_plus.norm_sqr()
        + q.g_in_minus.norm_sqr()
        + q.g_loss_plus.norm_sqr()
        + q.g_loss_minus.norm_sqr();
    if opts.thermal {
        noise += q.h[2].norm_sqr();
    }
    let s_dimensionless = noise / h6.norm_sqr();

    let gamma = sol.gamma;
    let x_zp2 = HBAR / (2.0 * p.m_eff * p.omega_m);
    let chi_eff = effective_susceptibility(sol, p, omega)?;
    // chi_eff is dimensionless; the mechanical susceptibility in SI units is
    // chi_eff / (m_eff gamma^2).
    let s_sql = HBAR * chi_eff.norm() / (p.m_eff * gamma * gamma);

    let s_consistent = s_dimensionless * x_zp2 / (2.0 * gamma);
    let s_x_sig = match opts.prefactor {
        Prefactor::Rate => s_consistent,
        Prefactor::SqrtRate => s_dimensionless * x_zp2 / (2.0 * gamma).sqrt(),
    };
    let ratio = s_consistent / s_sql;

    Ok(SensitivitySample {
        omega,
        h6,
        s_dimensionless,
        s_x_sig,
        s_sql,
        ratio,
    })
}

/// Scans a frequency grid for contiguous `ratio < 1` intervals. Points where
/// the mode is not transduced are treated as outside any band.
pub fn sql_band(
    sol: &MeanFieldSolution,
    p: &SystemParams,
    grid: &[f64],
    opts: SensitivityOptions,
) -> Result<BandReport> {
    let mut intervals = Vec::new();
    let mut argmin: Option<(f64, f64)> = None;
    let mut open: Option<f64> = None;
    for &w in grid {
        let ratio = match sensitivity(sol, p, w, opts) {
            Ok(s) => s.ratio,
            Err(Error::NoTransduction) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if argmin.map_or(true, |(_, best)| ratio < best) && ratio.is_finite() {
            argmin = Some((w, ratio));
        }
        match (ratio < 1.0, open) {
            (true, None) => open = Some(w),
            (false, Some(start)) => {
                intervals.push((start, w));
                open = None;
            }
            _ => {}
        }
    }
    if let (Some(start), Some(&last)) = (open, grid.last()) {
        intervals.push((start, last));
    }
    Ok(BandReport { intervals, argmin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_response::quadrature_gains;
    use crate::params::derive_scales;
    use crate::steady_state::{mean_field_at_power, solve_mean_field, BranchPolicy};

    fn fig2(p_in: f64) -> SystemParams {
        crate::steady_state::tests::fig2_params(p_in)
    }

    #[test]
    fn no_coupling_means_no_transduction() {
        let mut p = fig2(5.0e-6);
        p.radius = f64::INFINITY;
        p.kerr = num_complex::Complex64::new(0.0, 0.0);
        let s = derive_scales(&p);
        let sol = solve_mean_field(&p, &s).unwrap().into_iter().next().unwrap();
        assert!(matches!(
            signal_estimate_gain(&sol, &p, p.omega_m),
            Err(Error::NoTransduction)
        ));
        assert!(matches!(
            sensitivity(&sol, &p, p.omega_m, SensitivityOptions::default()),
            Err(Error::NoTransduction)
        ));
        let grid: Vec<f64> = (0..50).map(|i| p.omega_m * (0.9 + 0.004 * i as f64)).collect();
        let band = sql_band(&sol, &p, &grid, SensitivityOptions::default()).unwrap();
        assert!(band.intervals.is_empty());
    }

    #[test]
    fn estimate_gain_scales_inversely_with_drive() {
        let p = fig2(9.0e-6);
        let sol = mean_field_at_power(&p, 9.0e-6, BranchPolicy::Continuation).unwrap();
        let w = p.omega_m + 3.0 * p.gamma_m;
        let gain = |scale: f64| {
            let mut weak = sol.clone();
            weak.m *= scale;
            signal_estimate_gain(&weak, &p, w).unwrap().norm()
        };
        let g1 = gain(1.0e-3);
        let g2 = gain(2.0e-3);
        assert!((g1 / g2 - 2.0).abs() < 1e-3, "gain ratio = {}", g1 / g2);
    }

    #[test]
    fn ratio_matches_independently_combined_pieces() {
        let p = fig2(9.6e-6);
        let sol = mean_field_at_power(&p, 9.6e-6, BranchPolicy::Continuation).unwrap();
        let s_scales = derive_scales(&p);
        for &w in &[0.98 * p.omega_m, p.omega_m, 1.01 * p.omega_m] {
            let samp = sensitivity(&sol, &p, w, SensitivityOptions::default()).unwrap();
            // Independent recombination through the closed form.
            let q = quadrature_gains(&sol, &p, w).unwrap();
            let chi_eff = effective_susceptibility(&sol, &p, w).unwrap();
            let noise = q.g_in_plus.norm_sqr()
                + q.g_in_minus.norm_sqr()
                + q.g_loss_plus.norm_sqr()
                + q.g_loss_minus.norm_sqr();
            let expect = noise / (q.h[5].norm_sqr() * 4.0 * s_scales.omega_m_tilde * chi_eff.norm());
            assert!((samp.ratio - expect).abs() / expect < 1e-12);
            // Consistency of the reported SI pieces.
            assert!((samp.ratio * samp.s_sql - samp.s_x_sig).abs() / samp.s_x_sig < 1e-12);
            // Units audit: SI value is the dimensionless form times x_zp^2/(2 gamma).
            let si = samp.s_dimensionless * s_scales.x_zp * s_scales.x_zp / (2.0 * p.gamma());
            assert!((samp.s_x_sig - si).abs() / si < 1e-12);
        }
    }

    #[test]
    fn sqrt_rate_prefactor_changes_only_reported_density() {
        let p = fig2(9.6e-6);
        let sol = mean_field_at_power(&p, 9.6e-6, BranchPolicy::Continuation).unwrap();
        let w = p.omega_m;
        let a = sensitivity(&sol, &p, w, SensitivityOptions::default()).unwrap();
        let b = sensitivity(
            &sol,
            &p,
            w,
            SensitivityOptions { prefactor: Prefactor::SqrtRate, ..Default::default() },
        )
        .unwrap();
        assert_eq!(a.ratio, b.ratio);
        let expect = a.s_x_sig * (2.0 * p.gamma()).sqrt();
        assert!((b.s_x_sig - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn ratio_diverges_off_resonance() {
        let p = fig2(9.6e-6);
        let sol = mean_field_at_power(&p, 9.6e-6, BranchPolicy::Continuation).unwrap();
        let on = sensitivity(&sol, &p, p.omega_m, SensitivityOptions::default()).unwrap();
        let off = sensitivity(
            &sol,
            &p,
            p.omega_m + 400.0 * p.gamma_m,
            SensitivityOptions::default(),
        )
        .unwrap();
        assert!(off.ratio > 100.0 * on.ratio.min(1.0), "off-resonance ratio = {}", off.ratio);
        assert!(off.ratio > 1.0);
    }
}
