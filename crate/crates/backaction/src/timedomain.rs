//! Direct integration of the nonlinear coupled equations of motion.
//!
//! This is the validation path for the linearized model: the complex field
//! and the mechanical oscillator are integrated together in SI units,
//!
//! ```text
//! da/dt = -[gamma + Im(Lambda) |a|^2] a + i [delta0 + g x + Re(Lambda) |a|^2] a
//!         + sqrt(2 gamma_in) a_in(t)
//! d2x/dt2 = -gamma_m dx/dt - omega_m^2 x + g hbar |a|^2 / m_eff + F_T / m_eff
//! ```
//!
//! with a sinusoidally amplitude-modulated coherent input
//! `a_in(t) = a_in (1 + (depth/2) cos(omega_mod t))` and a thermal Langevin
//! force discretized as `F_k = sqrt(2 m_eff gamma_m k_B T / dt) N(0,1)` per
//! step. Optical vacuum inputs are omitted: this classical oracle validates
//! the deterministic transfer function and the thermal displacement spectrum,
//! not the quantum noise floor.
//!
//! The default scheme is stochastic Heun (predictor-corrector drift, shared
//! noise increment). Plain Euler-Maruyama is available for convergence
//! studies but is not the default: an explicit Euler update of an oscillator
//! inflates phase-space volume at the rate `omega_m^2 dt` per unit time,
//! which at the allowed step bound exceeds the intrinsic damping `gamma_m`
//! for a high-Q mechanical mode and would anti-damp the motion outright.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::consts::{HBAR, KB};
use crate::error::Error;
use crate::params::{DerivedScales, SystemParams};
use crate::spectral::{lockin, welch_psd, Psd};
use crate::steady_state::solve_mean_field;
use crate::Result;

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Stochastic Heun: second-order deterministic part, additive noise.
    #[default]
    Heun,
    /// First-order Euler-Maruyama, for convergence checks.
    EulerMaruyama,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Heun => "heun",
            Scheme::EulerMaruyama => "euler-maruyama",
        }
    }
}

/// Input amplitude modulation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Drive {
    /// Relative amplitude modulation depth (0 = unmodulated carrier).
    pub mod_depth: f64,
    /// Modulation angular frequency (rad/s).
    pub omega_mod: f64,
}

/// Stochastic settings.
///
/// Trajectories are strictly sequential; ensembles parallelize across
/// trajectories with independent recorded seeds, by the counter convention
/// `seed_i = base_seed + i`.
#[derive(Debug, Clone, Copy)]
pub struct Noise {
    /// Apply the thermal Langevin force.
    pub thermal: bool,
    /// RNG seed; identical seeds give bit-identical trajectories.
    pub seed: u64,
}

impl Default for Noise {
    fn default() -> Self {
        Noise { thermal: false, seed: 1 }
    }
}

/// Initial condition.
#[derive(Debug, Clone, Copy, Default)]
pub enum Start {
    /// Start on the lowest-branch self-consistent steady state.
    #[default]
    SteadyState,
    /// Steady state with the displacement offset by `dx` meters.
    Perturbed { dx: f64 },
    /// Explicit state.
    Custom { a: Complex64, x: f64, v: f64 },
}

/// Full integration request.
#[derive(Debug, Clone)]
pub struct IntegrationSpec {
    pub drive: Drive,
    pub noise: Noise,
    /// Total integration time (s).
    pub duration: f64,
    /// Step (s); must satisfy [`max_stable_dt`].
    pub dt: f64,
    pub scheme: Scheme,
    /// Keep every k-th sample; 0 = choose automatically from the fastest
    /// retained frequency scale.
    pub store_every: usize,
    pub start: Start,
    /// Abort when |a|^2 exceeds this multiple of the steady-state value.
    pub overflow_factor: f64,
}

impl IntegrationSpec {
    pub fn new(duration: f64, dt: f64) -> Self {
        IntegrationSpec {
            drive: Drive::default(),
            noise: Noise::default(),
            duration,
            dt,
            scheme: Scheme::default(),
            store_every: 0,
            start: Start::default(),
            overflow_factor: 1.0e6,
        }
    }
}

/// Largest step the integrator accepts for these parameters:
/// `min(1/gamma, 1/omega_m, 1/|delta0|) / 50`.
pub fn max_stable_dt(p: &SystemParams) -> f64 {
    let mut m = (1.0 / p.gamma()).min(1.0 / p.omega_m);
    if p.delta0 != 0.0 {
        m = m.min(1.0 / p.delta0.abs());
    }
    m / 50.0
}

/// Carried context for post-processing a trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryMeta {
    pub gamma_in: f64,
    pub gamma_m: f64,
    /// Unmodulated input amplitude sqrt(flux) (sqrt photons/s).
    pub a_in_amp: f64,
    pub drive: Drive,
    pub thermal: bool,
    /// Steady photon number used for the overflow guard.
    pub n_steady: f64,
    pub a_steady: Complex64,
    pub x_steady: f64,
}

/// Uniformly sampled trajectory of the coupled system.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Sample spacing (s) = integration dt * store_every.
    pub dt: f64,
    /// Complex field samples (sqrt photons).
    pub a: Vec<Complex64>,
    /// Displacement samples (m).
    pub x: Vec<f64>,
    /// Velocity samples (m/s).
    pub v: Vec<f64>,
    pub seed: u64,
    pub scheme: Scheme,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Sample time of index `i`.
    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    /// Input amplitude at sample `i`.
    pub fn a_in(&self, i: usize) -> f64 {
        let t = self.t(i);
        self.meta.a_in_amp
            * (1.0 + 0.5 * self.meta.drive.mod_depth * (self.meta.drive.omega_mod * t).cos())
    }

    /// Output amplitude via the input-output relation,
    /// `a_out = sqrt(2 gamma_in) a - a_in`.
    pub fn a_out(&self, i: usize) -> Complex64 {
        (2.0 * self.meta.gamma_in).sqrt() * self.a[i] - self.a_in(i)
    }

    /// Output photon flux |a_out|^2.
    pub fn flux_out(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.a_out(i).norm_sqr()).collect()
    }

    /// Input photon flux |a_in|^2.
    pub fn flux_in(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.a_in(i).powi(2)).collect()
    }

    /// Writes `t, re_a, im_a, x, v` rows; `header` lines are emitted first as
    /// `# key = value` comments.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W, header: &[(String, String)]) -> Result<()> {
        for (k, v) in header {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "# seed = {}", self.seed)?;
        writeln!(w, "# scheme = {}", self.scheme.name())?;
        writeln!(w, "t_s,re_a,im_a,x_m,v_m_per_s")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.t(i),
                self.a[i].re,
                self.a[i].im,
                self.x[i],
                self.v[i]
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct State {
    a: Complex64,
    x: f64,
    v: f64,
}

struct System<'a> {
    gamma: f64,
    gamma_in: f64,
    delta0: f64,
    kerr: Complex64,
    g: f64,
    omega_m2: f64,
    gamma_m: f64,
    rp_per_photon: f64, // g hbar / m_eff
    a_in_amp: f64,
    drive: Drive,
    _p: &'a SystemParams,
}

impl System<'_> {
    fn a_in(&self, t: f64) -> f64 {
        self.a_in_amp * (1.0 + 0.5 * self.drive.mod_depth * (self.drive.omega_mod * t).cos())
    }

    fn deriv(&self, t: f64, s: &State) -> State {
        let n = s.a.norm_sqr();
        let decay = self.gamma + self.kerr.im * n;
        let phase = self.delta0 + self.g * s.x + self.kerr.re * n;
        State {
            a: Complex64::new(-decay, phase) * s.a + (2.0 * self.gamma_in).sqrt() * self.a_in(t),
            x: s.v,
            v: -self.gamma_m * s.v - self.omega_m2 * s.x + self.rp_per_photon * n,
        }
    }
}

/// Integrates the coupled equations and returns the sampled trajectory.
pub fn integrate(p: &SystemParams, s: &DerivedScales, spec: &IntegrationSpec) -> Result<Trajectory> {
    let bound = max_stable_dt(p);
    if spec.dt > bound {
        return Err(Error::StepTooLarge { dt: spec.dt, bound });
    }
    if spec.duration <= 0.0 || spec.dt <= 0.0 {
        return Err(Error::Precondition("duration and dt must be > 0".to_string()));
    }

    let steady = solve_mean_field(p, s)?.into_iter().next().unwrap();
    let sys = System {
        gamma: p.gamma(),
        gamma_in: p.gamma_in,
        delta0: p.delta0,
        kerr: p.kerr,
        g: s.g,
        omega_m2: p.omega_m * p.omega_m,
        gamma_m: p.gamma_m,
        rp_per_photon: s.g * HBAR / p.m_eff,
        a_in_amp: s.flux_in.sqrt(),
        drive: spec.drive,
        _p: p,
    };

    let mut state = match spec.start {
        Start::SteadyState => State { a: steady.a_bar, x: steady.x_bar, v: 0.0 },
        Start::Perturbed { dx } => State { a: steady.a_bar, x: steady.x_bar + dx, v: 0.0 },
        Start::Custom { a, x, v } => State { a, x, v },
    };

    let n_steps = (spec.duration / spec.dt).round() as usize;
    let store_every = if spec.store_every > 0 {
        spec.store_every
    } else {
        // Keep >= 32 samples per cycle of the fastest retained scale.
        let mut fast = p.omega_m;
        if spec.drive.mod_depth != 0.0 {
            fast = fast.max(spec.drive.omega_mod);
        }
        ((std::f64::consts::TAU / (32.0 * fast)) / spec.dt).floor().max(1.0) as usize
    };

    let mut rng = ChaCha12Rng::seed_from_u64(spec.noise.seed);
    let sigma_v = if spec.noise.thermal {
        (2.0 * p.gamma_m * KB * p.temperature / p.m_eff).sqrt()
    } else {
        0.0
    };
    let sqrt_dt = spec.dt.sqrt();
    let guard_n = spec.overflow_factor * steady.n_cav.max(1.0);

    let capacity = n_steps / store_every + 2;
    let mut traj = Trajectory {
        dt: spec.dt * store_every as f64,
        a: Vec::with_capacity(capacity),
        x: Vec::with_capacity(capacity),
        v: Vec::with_capacity(capacity),
        seed: spec.noise.seed,
        scheme: spec.scheme,
        meta: TrajectoryMeta {
            gamma_in: p.gamma_in,
            gamma_m: p.gamma_m,
            a_in_amp: sys.a_in_amp,
            drive: spec.drive,
            thermal: spec.noise.thermal,
            n_steady: steady.n_cav,
            a_steady: steady.a_bar,
            x_steady: steady.x_bar,
        },
    };
    traj.a.push(state.a);
    traj.x.push(state.x);
    traj.v.push(state.v);

    for step in 0..n_steps {
        let t = step as f64 * spec.dt;
        let dw = if sigma_v > 0.0 {
            let g: f64 = StandardNormal.sample(&mut rng);
            sigma_v * sqrt_dt * g
        } else {
            0.0
        };
        let k1 = sys.deriv(t, &state);
        state = match spec.scheme {
            Scheme::EulerMaruyama => State {
                a: state.a + k1.a * spec.dt,
                x: state.x + k1.x * spec.dt,
                v: state.v + k1.v * spec.dt + dw,
            },
            Scheme::Heun => {
                let pred = State {
                    a: state.a + k1.a * spec.dt,
                    x: state.x + k1.x * spec.dt,
                    v: state.v + k1.v * spec.dt + dw,
                };
                let k2 = sys.deriv(t + spec.dt, &pred);
                State {
                    a: state.a + (k1.a + k2.a) * (0.5 * spec.dt),
                    x: state.x + (k1.x + k2.x) * (0.5 * spec.dt),
                    v: state.v + (k1.v + k2.v) * (0.5 * spec.dt) + dw,
                }
            }
        };

        let n = state.a.norm_sqr();
        if !n.is_finite() || !state.x.is_finite() || !state.v.is_finite() {
            return Err(Error::NonFinite(format!("trajectory at t = {:.6e} s", t + spec.dt)));
        }
        if n > guard_n {
            return Err(Error::Overflow { t: t + spec.dt, factor: spec.overflow_factor });
        }
        if (step + 1) % store_every == 0 {
            traj.a.push(state.a);
            traj.x.push(state.x);
            traj.v.push(state.v);
        }
    }
    Ok(traj)
}

/// Lock-in transfer estimate from a modulated trajectory.
#[derive(Debug, Clone, Copy)]
pub struct TransferEstimate {
    pub omega_mod: f64,
    /// Output photon-flux modulation over input photon-flux modulation.
    pub gain: Complex64,
    /// Standard error of the gain across averaging windows.
    pub std_error: f64,
    /// Whole modulation periods used after the transient discard.
    pub periods: usize,
}

/// Demodulates `|a_out|^2` (and `|a_in|^2` for normalization) at `omega_mod`.
///
/// `discard` seconds are dropped first; `None` uses 20 mechanical decay
/// times. At least 100 whole modulation periods must remain.
pub fn measure_transfer(
    traj: &Trajectory,
    omega_mod: f64,
    discard: Option<f64>,
) -> Result<TransferEstimate> {
    let discard_s = discard.unwrap_or(20.0 / traj.meta.gamma_m);
    let skip = (discard_s / traj.dt).ceil() as usize;
    if skip + 16 >= traj.len() {
        return Err(Error::InsufficientData(
            "trajectory shorter than the transient discard".to_string(),
        ));
    }
    let y_out: Vec<f64> = (skip..traj.len()).map(|i| traj.a_out(i).norm_sqr()).collect();
    let y_in: Vec<f64> = (skip..traj.len()).map(|i| traj.a_in(i).powi(2)).collect();
    let period = std::f64::consts::TAU / omega_mod;
    let periods = (y_out.len() as f64 * traj.dt / period).floor() as usize;
    if periods < 100 {
        return Err(Error::InsufficientData(format!(
            "only {periods} modulation periods after transient discard (need >= 100)"
        )));
    }
    let n_windows = 8;
    let out = lockin(&y_out, traj.dt, omega_mod, n_windows)?;
    let inp = lockin(&y_in, traj.dt, omega_mod, n_windows)?;
    if inp.amplitude.norm() == 0.0 {
        return Err(Error::Precondition("input modulation depth is zero".to_string()));
    }
    let gain = out.amplitude / inp.amplitude;
    let std_error = out.std_error / inp.amplitude.norm();
    Ok(TransferEstimate { omega_mod, gain, std_error, periods: out.periods })
}

/// Welch spectra of a Brownian-driven trajectory.
#[derive(Debug, Clone)]
pub struct SpectrumEstimate {
    /// Two-sided displacement PSD (m^2/Hz).
    pub x: Psd,
    /// Two-sided output photon-flux PSD ((photons/s)^2/Hz).
    pub flux_out: Psd,
}

/// Welch-averaged PSDs of `x(t)` and `|a_out(t)|^2`. Requires thermal noise
/// on and the drive off; fewer than 16 averaged segments is an error.
pub fn estimate_psd(
    traj: &Trajectory,
    discard: Option<f64>,
    n_segments: usize,
) -> Result<SpectrumEstimate> {
    if traj.meta.drive.mod_depth != 0.0 {
        return Err(Error::Precondition("estimate_psd requires the drive off".to_string()));
    }
    if !traj.meta.thermal {
        return Err(Error::Precondition("estimate_psd requires thermal noise on".to_string()));
    }
    let discard_s = discard.unwrap_or(20.0 / traj.meta.gamma_m);
    let skip = (discard_s / traj.dt).ceil() as usize;
    if skip + 32 >= traj.len() {
        return Err(Error::InsufficientData(
            "trajectory shorter than the transient discard".to_string(),
        ));
    }
    let x = welch_psd(&traj.x[skip..], traj.dt, n_segments)?;
    if x.segments < 16 {
        return Err(Error::InsufficientData(format!(
            "only {} Welch segments (need >= 16)",
            x.segments
        )));
    }
    let flux = traj.flux_out();
    let flux_out = welch_psd(&flux[skip..], traj.dt, n_segments)?;
    Ok(SpectrumEstimate { x, flux_out })
}

/// Log-amplitude slope (1/s) of the displacement envelope around the steady
/// state, from per-period maxima of |x - x_steady|.
fn envelope_slope(traj: &Trajectory, omega_m: f64) -> Option<f64> {
    let period = std::f64::consts::TAU / omega_m;
    let per = (period / traj.dt).round() as usize;
    if per < 4 {
        return None;
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i + per <= traj.len() {
        let mut peak = 0.0;
        for k in i..i + per {
            let d = (traj.x[k] - traj.meta.x_steady).abs();
            if d > peak {
                peak = d;
            }
        }
        if peak > 0.0 {
            pts.push((traj.t(i) + 0.5 * period, peak.ln()));
        }
        i += per;
    }
    // Skip the first third: the optical transient and the ring-up to the
    // slowest eigenmode both settle there.
    let start = pts.len() / 3;
    let pts = &pts[start..];
    if pts.len() < 8 {
        return None;
    }
    let n = pts.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, y) in pts {
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let denom = n * stt - st * st;
    if denom == 0.0 {
        return None;
    }
    Some((n * sty - st * sy) / denom)
}

/// Smallest power (to 2% relative) whose noise-free trajectory grows
/// exponentially from a small displacement kick off the steady state.
/// The bracket must straddle the onset.
pub fn oscillation_onset(p: &SystemParams, bracket: (f64, f64)) -> Result<f64> {
    let grows = |power: f64| -> Result<bool> {
        let pp = p.with_power(power);
        let s = crate::params::derive_scales(&pp);
        let x_zp = s.x_zp;
        let mut spec = IntegrationSpec::new(10.0 / p.gamma_m, max_stable_dt(&pp));
        spec.start = Start::Perturbed { dx: 1.0e-6 * x_zp };
        spec.noise = Noise { thermal: false, seed: 0 };
        // Growth past the guard is itself a positive verdict.
        match integrate(&pp, &s, &spec) {
            Ok(traj) => Ok(envelope_slope(&traj, pp.omega_m).map_or(false, |sl| sl > 0.0)),
            Err(Error::Overflow { .. }) => Ok(true),
            Err(e) => Err(e),
        }
    };

    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Precondition("onset bracket must satisfy 0 < lo < hi".to_string()));
    }
    if grows(lo)? {
        return Err(Error::Precondition("oscillation already grows at the bracket low end".to_string()));
    }
    if !grows(hi)? {
        return Err(Error::Precondition("no oscillation onset inside the bracket".to_string()));
    }
    while (hi - lo) / hi > 0.02 {
        let mid = 0.5 * (lo + hi);
        if grows(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
