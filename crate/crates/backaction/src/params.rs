//! Physical and dimensionless parameter sets.
//!
//! [`SystemParams`] holds the device and drive parameters in SI units
//! (angular frequencies in rad/s). Configuration files quote ordinary
//! frequencies in Hz and are converted on ingest; quality factors may be
//! given instead of rates:
//!
//! * intrinsic optical quality factor `q0` maps to the loss rate
//!   `gamma_loss = omega0 / (2 q0)` (amplitude half-width convention, so the
//!   intensity Lorentzian has FWHM `2 gamma`),
//! * mechanical quality factor `q_m` maps to `gamma_m = omega_m / q_m`
//!   (energy decay rate of the displacement equation).
//!
//! [`DerivedScales`] collects the closed-form derived quantities: zero-point
//! motion, thermal occupation, the optomechanical coupling `g = omega0 / r`,
//! input photon flux, and the dimensionless ratios used throughout the
//! linearized model.

use num_complex::Complex64;
use serde::Deserialize;

use crate::consts::{C_LIGHT, HBAR, KB};
use crate::error::Error;
use crate::Result;

const TWO_PI: f64 = std::f64::consts::TAU;

/// Physical device and drive parameters, SI units throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Optical resonance angular frequency (rad/s).
    pub omega0: f64,
    /// Pump laser angular frequency (rad/s).
    pub omega_laser: f64,
    /// Bare detuning Delta0 = omega_laser - omega0 (rad/s); positive = blue.
    pub delta0: f64,
    /// Input coupling rate (rad/s).
    pub gamma_in: f64,
    /// Intrinsic loss rate (rad/s).
    pub gamma_loss: f64,
    /// Mechanical resonance angular frequency (rad/s).
    pub omega_m: f64,
    /// Mechanical damping rate (rad/s).
    pub gamma_m: f64,
    /// Effective mass of the mechanical mode (kg).
    pub m_eff: f64,
    /// Cavity radius (m); sets the optomechanical coupling g = omega0 / r.
    pub radius: f64,
    /// Complex Kerr rate per intracavity photon (rad/s). The imaginary part
    /// acts as intensity-dependent loss.
    pub kerr: Complex64,
    /// Bath temperature (K).
    pub temperature: f64,
    /// Input optical power (W).
    pub p_in: f64,
}

impl SystemParams {
    /// Total optical decay rate gamma = gamma_in + gamma_loss (rad/s).
    pub fn gamma(&self) -> f64 {
        self.gamma_in + self.gamma_loss
    }

    /// Coupling fraction eta = gamma_in / gamma.
    pub fn eta(&self) -> f64 {
        self.gamma_in / self.gamma()
    }

    /// Returns a copy with a different input power.
    pub fn with_power(&self, p_in: f64) -> SystemParams {
        SystemParams { p_in, ..self.clone() }
    }

    /// Returns the red-detuned mirror of a blue-detuned configuration: the
    /// whole dispersive response is reflected, so both the bare detuning and
    /// the dispersive (real) Kerr shift change sign. The dissipative Kerr
    /// component is a loss and keeps its sign. Without the Kerr flip the
    /// intensity-dependent shift would drag a nominally red-detuned cavity
    /// back across resonance at high power, which is a different experiment,
    /// not a mirror.
    pub fn mirrored_detuning(&self) -> SystemParams {
        SystemParams {
            delta0: -self.delta0,
            omega_laser: self.omega0 - self.delta0,
            kerr: Complex64::new(-self.kerr.re, self.kerr.im),
            ..self.clone()
        }
    }

    /// Validates all parameter invariants.
    pub fn validate(&self) -> Result<()> {
        fn req(cond: bool, msg: &str) -> Result<()> {
            if cond {
                Ok(())
            } else {
                Err(Error::InvalidParam(msg.to_string()))
            }
        }
        req(self.omega0 > 0.0, "omega0 must be > 0")?;
        req(self.omega_laser > 0.0, "omega_laser must be > 0")?;
        req(self.gamma_in > 0.0, "gamma_in must be > 0")?;
        req(self.gamma_loss >= 0.0, "gamma_loss must be >= 0")?;
        req(self.gamma() > 0.0, "total decay gamma must be > 0")?;
        req(self.omega_m > 0.0, "omega_m must be > 0")?;
        req(self.gamma_m > 0.0, "gamma_m must be > 0")?;
        req(self.m_eff > 0.0, "m_eff must be > 0")?;
        req(self.radius > 0.0, "radius must be > 0")?;
        req(self.temperature >= 0.0, "temperature must be >= 0")?;
        req(self.p_in >= 0.0, "p_in must be >= 0")?;
        let eta = self.eta();
        req(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]")?;
        // The carrier phase factor sqrt(L) degenerates only as |Delta|/gamma
        // diverges; keep the detuning in a sane range.
        req(
            self.delta0.abs() <= 1e3 * self.gamma(),
            "|delta0| must not exceed 1e3 * gamma",
        )?;
        for (v, name) in [
            (self.omega0, "omega0"),
            (self.delta0, "delta0"),
            (self.kerr.re, "kerr.re"),
            (self.kerr.im, "kerr.im"),
            (self.p_in, "p_in"),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} is not finite")));
            }
        }
        Ok(())
    }

    /// Human-readable physics notes for `validate` runs: detuning side,
    /// sideband resolution, coupling regime.
    pub fn physics_notes(&self) -> Vec<String> {
        let gamma = self.gamma();
        let mut notes = Vec::new();
        if self.delta0 > 0.0 {
            notes.push("blue-detuned pump (delta0 > 0): mechanical gain regime, a regenerative threshold may exist".to_string());
        } else if self.delta0 < 0.0 {
            notes.push("red-detuned pump (delta0 < 0): mechanical damping regime, no regenerative threshold".to_string());
        } else {
            notes.push("pump on resonance (delta0 = 0): no dynamical backaction gain".to_string());
        }
        notes.push(format!(
            "sideband ratio omega_m/gamma = {:.3} ({} the optical linewidth)",
            self.omega_m / gamma,
            if self.omega_m < gamma { "within" } else { "outside" }
        ));
        let eta = self.eta();
        let regime = if eta > 0.5 {
            "overcoupled"
        } else if eta < 0.5 {
            "undercoupled"
        } else {
            "critically coupled"
        };
        notes.push(format!("eta = {eta:.4} ({regime})"));
        notes
    }
}

/// Dimensionless scales and derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedScales {
    /// Zero-point motion sqrt(hbar / (2 m_eff omega_m)) (m).
    pub x_zp: f64,
    /// Thermal phonon occupation k_B T / (hbar omega_m), high-T limit.
    pub n_bar: f64,
    /// Optomechanical coupling omega0 / radius (rad/(s·m)).
    pub g: f64,
    /// g x_zp / gamma, dimensionless.
    pub g_tilde: f64,
    /// gamma_in / gamma.
    pub eta: f64,
    /// Input photon flux |a_in|^2 = p_in / (hbar omega_laser) (photons/s).
    pub flux_in: f64,
    /// kerr / gamma.
    pub lambda_tilde: Complex64,
    /// omega_m / gamma.
    pub omega_m_tilde: f64,
    /// gamma_m / gamma.
    pub gamma_m_tilde: f64,
    /// radius / x_zp.
    pub r_tilde: f64,
}

/// Computes all derived scales in closed form.
pub fn derive_scales(p: &SystemParams) -> DerivedScales {
    let gamma = p.gamma();
    let x_zp = (HBAR / (2.0 * p.m_eff * p.omega_m)).sqrt();
    let g = p.omega0 / p.radius;
    DerivedScales {
        x_zp,
        n_bar: KB * p.temperature / (HBAR * p.omega_m),
        g,
        g_tilde: g * x_zp / gamma,
        eta: p.eta(),
        flux_in: photon_flux(p.p_in, p.omega_laser).expect("validated params"),
        lambda_tilde: p.kerr / gamma,
        omega_m_tilde: p.omega_m / gamma,
        gamma_m_tilde: p.gamma_m / gamma,
        r_tilde: p.radius / x_zp,
    }
}

/// Photon flux carried by `power` at laser angular frequency `omega_laser`.
pub fn photon_flux(power: f64, omega_laser: f64) -> Result<f64> {
    if omega_laser <= 0.0 {
        return Err(Error::InvalidParam("omega_laser must be > 0".to_string()));
    }
    if power < 0.0 {
        return Err(Error::InvalidParam("power must be >= 0".to_string()));
    }
    Ok(power / (HBAR * omega_laser))
}

/// Flat key-value configuration as it appears on disk. Frequencies are
/// ordinary frequencies in Hz; mass in kg, power in W, temperature in K.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    /// Optical resonance, Hz. Alternative: `wavelength_m`.
    pub omega0_hz: Option<f64>,
    /// Vacuum wavelength, m. Alternative to `omega0_hz`.
    pub wavelength_m: Option<f64>,
    /// Pump laser frequency, Hz. Defaults to omega0_hz + delta0_hz.
    pub omega_laser_hz: Option<f64>,
    /// Bare detuning, Hz (positive = blue).
    pub delta0_hz: Option<f64>,
    /// Input coupling rate, Hz.
    pub gamma_in_hz: Option<f64>,
    /// Intrinsic loss rate, Hz. Alternative: `q0`.
    pub gamma_loss_hz: Option<f64>,
    /// Intrinsic optical quality factor; gamma_loss = omega0 / (2 q0).
    pub q0: Option<f64>,
    /// Mechanical resonance, Hz.
    pub omega_m_hz: Option<f64>,
    /// Mechanical damping rate, Hz. Alternative: `q_m`.
    pub gamma_m_hz: Option<f64>,
    /// Mechanical quality factor; gamma_m = omega_m / q_m.
    pub q_m: Option<f64>,
    /// Effective mass, kg.
    pub m_eff_kg: Option<f64>,
    /// Cavity radius, m.
    pub radius_m: Option<f64>,
    /// Kerr rate per intracavity photon, real part, Hz.
    pub kerr_re_hz: Option<f64>,
    /// Kerr rate per intracavity photon, imaginary part, Hz.
    pub kerr_im_hz: Option<f64>,
    /// Bath temperature, K.
    pub temperature_k: Option<f64>,
    /// Input optical power, W.
    pub p_in_w: Option<f64>,
}

impl RawConfig {
    /// Parses a TOML-style flat key-value document.
    pub fn parse(text: &str) -> Result<RawConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads and parses a configuration file.
    pub fn load(path: &std::path::Path) -> Result<RawConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RawConfig::parse(&text)
    }
}

fn require(v: Option<f64>, key: &str) -> Result<f64> {
    v.ok_or_else(|| Error::MissingKey(key.to_string()))
}

/// Builds validated [`SystemParams`] from a raw configuration, applying the
/// Hz -> rad/s conversion and the quality-factor-to-rate mappings.
pub fn build_params(raw: &RawConfig) -> Result<SystemParams> {
    let omega0 = match (raw.omega0_hz, raw.wavelength_m) {
        (Some(f0), None) => TWO_PI * f0,
        (None, Some(lam)) => {
            if lam <= 0.0 {
                return Err(Error::InvalidParam("wavelength_m must be > 0".to_string()));
            }
            TWO_PI * C_LIGHT / lam
        }
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "give either omega0_hz or wavelength_m, not both".to_string(),
            ))
        }
        (None, None) => return Err(Error::MissingKey("omega0_hz (or wavelength_m)".to_string())),
    };

    let delta0 = TWO_PI * require(raw.delta0_hz, "delta0_hz")?;
    let gamma_in = TWO_PI * require(raw.gamma_in_hz, "gamma_in_hz")?;

    let gamma_loss = match (raw.gamma_loss_hz, raw.q0) {
        (Some(f), None) => TWO_PI * f,
        (None, Some(q0)) => {
            if q0 <= 0.0 {
                return Err(Error::InvalidParam("q0 must be > 0".to_string()));
            }
            omega0 / (2.0 * q0)
        }
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "give either gamma_loss_hz or q0, not both".to_string(),
            ))
        }
        (None, None) => return Err(Error::MissingKey("gamma_loss_hz (or q0)".to_string())),
    };

    let omega_m = TWO_PI * require(raw.omega_m_hz, "omega_m_hz")?;
    let gamma_m = match (raw.gamma_m_hz, raw.q_m) {
        (Some(f), None) => TWO_PI * f,
        (None, Some(qm)) => {
            if qm <= 0.0 {
                return Err(Error::InvalidParam("q_m must be > 0".to_string()));
            }
            omega_m / qm
        }
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "give either gamma_m_hz or q_m, not both".to_string(),
            ))
        }
        (None, None) => return Err(Error::MissingKey("gamma_m_hz (or q_m)".to_string())),
    };

    let omega_laser = match raw.omega_laser_hz {
        Some(f) => TWO_PI * f,
        None => omega0 + delta0,
    };

    let p = SystemParams {
        omega0,
        omega_laser,
        delta0,
        gamma_in,
        gamma_loss,
        omega_m,
        gamma_m,
        m_eff: require(raw.m_eff_kg, "m_eff_kg")?,
        radius: require(raw.radius_m, "radius_m")?,
        kerr: Complex64::new(
            TWO_PI * require(raw.kerr_re_hz, "kerr_re_hz")?,
            TWO_PI * require(raw.kerr_im_hz, "kerr_im_hz")?,
        ),
        temperature: require(raw.temperature_k, "temperature_k")?,
        p_in: require(raw.p_in_w, "p_in_w")?,
    };
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2_raw(p_in_w: f64) -> RawConfig {
        RawConfig::parse(&format!(
            r#"
            omega0_hz = 1.934e14
            delta0_hz = 3.0e6
            gamma_in_hz = 13.0e6
            q0 = 4.0e7
            omega_m_hz = 6.254e6
            q_m = 480.0
            m_eff_kg = 6.4e-8
            radius_m = 1.71e-6
            kerr_re_hz = 0.19
            kerr_im_hz = 0.089
            temperature_k = 300.0
            p_in_w = {p_in_w}
            "#
        ))
        .unwrap()
    }

    #[test]
    fn q0_maps_to_intrinsic_loss_rate() {
        // Q0 = 4e7 at f0 = 1.934e14 Hz gives a loss rate of 2.4175 MHz; with
        // gamma_in = 13 MHz the total linewidth is 15.4175 MHz and eta < 1.
        let p = build_params(&fig2_raw(3.0e-6)).unwrap();
        let f_loss = p.gamma_loss / TWO_PI;
        assert!((f_loss - 1.934e14 / (2.0 * 4.0e7)).abs() / f_loss < 1e-12);
        assert!((f_loss - 2.4175e6).abs() < 1.0);
        assert!((p.gamma() / TWO_PI - 15.4175e6).abs() < 1.0);
        let eta = p.eta();
        assert!(eta > 0.0 && eta <= 1.0, "eta = {eta}");
        assert!((eta - 13.0 / 15.4175).abs() < 1e-4);
    }

    #[test]
    fn q_m_maps_to_energy_decay_rate() {
        // Q_m = 480 at 6.254 MHz: Gamma/2pi = 13.029 kHz.
        let p = build_params(&fig2_raw(3.0e-6)).unwrap();
        assert!((p.gamma_m / TWO_PI - 6.254e6 / 480.0).abs() < 1e-6);
        assert!((p.gamma_m / TWO_PI - 13.029e3).abs() < 1.0);
    }

    #[test]
    fn gamma_in_stored_unchanged() {
        let p = build_params(&fig2_raw(3.0e-6)).unwrap();
        assert_eq!(p.gamma_in, TWO_PI * 13.0e6);
    }

    #[test]
    fn default_laser_frequency_is_omega0_plus_detuning() {
        let p = build_params(&fig2_raw(3.0e-6)).unwrap();
        assert_eq!(p.omega_laser, p.omega0 + p.delta0);
        assert!(p.delta0 > 0.0);
    }

    #[test]
    fn wavelength_alternative() {
        let mut raw = fig2_raw(3.0e-6);
        raw.omega0_hz = None;
        raw.wavelength_m = Some(1.55e-6);
        let p = build_params(&raw).unwrap();
        let f0 = p.omega0 / TWO_PI;
        assert!((f0 - 1.934e14).abs() / f0 < 1e-3);
    }

    #[test]
    fn missing_key_is_named() {
        let mut raw = fig2_raw(3.0e-6);
        raw.m_eff_kg = None;
        let err = build_params(&raw).unwrap_err();
        assert!(err.to_string().contains("m_eff_kg"), "{err}");
    }

    #[test]
    fn nonpositive_rates_rejected() {
        let mut raw = fig2_raw(3.0e-6);
        raw.gamma_in_hz = Some(0.0);
        assert!(build_params(&raw).is_err());

        let mut raw = fig2_raw(3.0e-6);
        raw.q0 = None;
        raw.gamma_loss_hz = Some(-1.0e6);
        assert!(build_params(&raw).is_err());

        let mut raw = fig2_raw(-1.0e-6);
        raw.p_in_w = Some(-1.0e-6);
        assert!(build_params(&raw).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RawConfig::parse("omega_zero_hz = 1.0").unwrap_err();
        assert!(err.to_string().contains("omega_zero_hz"), "{err}");
    }

    #[test]
    fn zero_point_motion_closed_form() {
        // m_eff = 64 ug, omega_m = 2pi * 6.254 MHz:
        // x_zp = sqrt(hbar / (2 m omega_m)) = 4.579e-18 m (hand evaluation).
        let p = build_params(&fig2_raw(3.0e-6)).unwrap();
        let s = derive_scales(&p);
        assert!((s.x_zp - 4.579e-18).abs() / s.x_zp < 1e-3);
        // Defining identity to 1e-12 relative.
        assert!((s.x_zp * s.x_zp * 2.0 * p.m_eff * p.omega_m / HBAR - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_occupation_limits() {
        let mut p = build_params(&fig2_raw(3.0e-6)).unwrap();
        p.temperature = 0.0;
        assert_eq!(derive_scales(&p).n_bar, 0.0);
        p.temperature = 300.0;
        let s = derive_scales(&p);
        assert!((s.n_bar - KB * 300.0 / (HBAR * p.omega_m)).abs() / s.n_bar < 1e-14);
    }

    #[test]
    fn lossless_cavity_has_eta_one() {
        let mut p = build_params(&fig2_raw(3.0e-6)).unwrap();
        p.gamma_loss = 0.0;
        p.validate().unwrap();
        assert_eq!(p.eta(), 1.0);
    }

    #[test]
    fn eta_identities() {
        let p = build_params(&fig2_raw(3.0e-6)).unwrap();
        let s = derive_scales(&p);
        let gamma = p.gamma();
        assert!((s.eta * gamma - p.gamma_in).abs() / p.gamma_in < 1e-12);
        assert!(((1.0 - s.eta) * gamma - p.gamma_loss).abs() / p.gamma_loss < 1e-12);
    }

    #[test]
    fn photon_flux_examples() {
        assert_eq!(photon_flux(0.0, TWO_PI * 1.934e14).unwrap(), 0.0);
        // 12 uW at 1550 nm is about 9.36e13 photons/s.
        let omega = TWO_PI * 1.934e14;
        let f = photon_flux(12.0e-6, omega).unwrap();
        assert!((f - 9.36e13).abs() / f < 5e-3);
        // Exact identity and linearity.
        assert!((f * HBAR * omega - 12.0e-6).abs() / 12.0e-6 < 1e-14);
        assert!((photon_flux(24.0e-6, omega).unwrap() - 2.0 * f).abs() / f < 1e-14);
        assert!(photon_flux(1.0, 0.0).is_err());
        assert!(photon_flux(-1.0, omega).is_err());
    }

    #[test]
    fn derived_scales_match_defining_formulas_on_random_draws() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..100 {
            let omega0 = TWO_PI * rng.gen_range(1.0e14..3.0e14);
            let p = SystemParams {
                omega0,
                omega_laser: omega0,
                delta0: TWO_PI * rng.gen_range(-20.0e6..20.0e6),
                gamma_in: TWO_PI * rng.gen_range(0.5e6..30.0e6),
                gamma_loss: TWO_PI * rng.gen_range(0.0..30.0e6),
                omega_m: TWO_PI * rng.gen_range(0.5e6..50.0e6),
                gamma_m: TWO_PI * rng.gen_range(1.0e3..100.0e3),
                m_eff: rng.gen_range(1.0e-12..1.0e-6),
                radius: rng.gen_range(1.0e-6..100.0e-6),
                kerr: Complex64::new(rng.gen_range(-10.0..10.0), rng.gen_range(0.0..10.0)),
                temperature: rng.gen_range(0.0..400.0),
                p_in: rng.gen_range(0.0..1.0e-3),
            };
            p.validate().unwrap();
            let s = derive_scales(&p);
            let gamma = p.gamma_in + p.gamma_loss;
            // Recompute every closed form independently.
            assert_eq!(s.x_zp, (HBAR / (2.0 * p.m_eff * p.omega_m)).sqrt());
            assert_eq!(s.n_bar, KB * p.temperature / (HBAR * p.omega_m));
            assert_eq!(s.g, p.omega0 / p.radius);
            assert_eq!(s.g_tilde, s.g * s.x_zp / gamma);
            assert_eq!(s.eta, p.gamma_in / gamma);
            assert_eq!(s.flux_in, p.p_in / (HBAR * p.omega_laser));
            assert_eq!(s.lambda_tilde, p.kerr / gamma);
            assert_eq!(s.omega_m_tilde, p.omega_m / gamma);
            assert_eq!(s.gamma_m_tilde, p.gamma_m / gamma);
            assert_eq!(s.r_tilde, p.radius / s.x_zp);
        }
    }
}
