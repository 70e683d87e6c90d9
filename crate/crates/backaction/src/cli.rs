//! Command-line front end: configuration parsing, sweep dispatch, and
//! reproducible data files.
//!
//! Every run writes CSV data files plus a `manifest.json` listing each file
//! with its SHA-256 checksum and the full resolved parameter echo. Outputs
//! carry no timestamps, and floats are printed with 17 significant digits, so
//! identical inputs (and seeds) reproduce byte-identical files.
//!
//! Exit codes: 0 success, 2 configuration error, 3 physics refusal (e.g.
//! linearized response requested at or above threshold), 4 numeric failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::linear_response::{
    assert_below_threshold, dressed_resonance_peak, response_sample, threshold_power, to_db,
    ThresholdReport,
};
use crate::params::{build_params, derive_scales, RawConfig, SystemParams};
use crate::sensitivity::{sensitivity, sql_band, Prefactor, SensitivityOptions};
use crate::steady_state::{continuation_sweep, mean_field_at_power, BranchPolicy, MeanFieldSolution};
use crate::timedomain::{
    estimate_psd, integrate, max_stable_dt, measure_transfer, Drive, IntegrationSpec, Noise, Scheme,
};
use crate::Result;

const TWO_PI: f64 = std::f64::consts::TAU;

#[derive(Debug, Parser)]
#[command(name = "backaction", version, about = "Near-threshold backaction amplifier simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub mode: Mode,
}

#[derive(Debug, Subcommand)]
pub enum Mode {
    /// Intensity transfer, output spectrum and displacement PSD vs frequency.
    Transfer(CommonArgs),
    /// Transfer in dB over a (power, frequency) matrix.
    PowerSurface(CommonArgs),
    /// Peak gain and amplification factor vs power, with threshold marker.
    GainVsPower(CommonArgs),
    /// Narrowband suppression sweep at 60% of the model threshold.
    Notch(CommonArgs),
    /// Displacement sensitivity vs the standard quantum limit.
    Sql(CommonArgs),
    /// Integrate the nonlinear equations of motion.
    Timedomain(TimedomainArgs),
    /// Locate the regenerative-oscillation threshold power.
    Threshold(CommonArgs),
    /// Validate a configuration file without computing anything.
    Validate {
        /// Configuration file path.
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Continuation,
    Low,
    High,
}

impl From<BranchArg> for BranchPolicy {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Continuation => BranchPolicy::Continuation,
            BranchArg::Low => BranchPolicy::Low,
            BranchArg::High => BranchPolicy::High,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrefactorArg {
    /// x_zp^2 / (2 gamma): dimensionally consistent spectral density.
    Rate,
    /// x_zp^2 / sqrt(2 gamma): alternate normalization, for comparison.
    SqrtRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Heun,
    EulerMaruyama,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Configuration file path.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if absent).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Frequency grid points.
    #[arg(long, default_value_t = 4001)]
    pub points: usize,
    /// Full frequency span in Hz centered on the dressed resonance
    /// (default: 100 mechanical linewidths).
    #[arg(long)]
    pub span_hz: Option<f64>,
    /// Comma-separated input powers in W (default: mode-dependent ladder
    /// from the configured power).
    #[arg(long, value_delimiter = ',')]
    pub powers: Option<Vec<f64>>,
    /// RNG seed for stochastic runs.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Bistability branch policy.
    #[arg(long, value_enum, default_value_t = BranchArg::Continuation)]
    pub branch: BranchArg,
    /// Thermal noise in spectra and time-domain runs.
    #[arg(long, value_enum, default_value_t = OnOff::Off)]
    pub thermal: OnOff,
    /// Normalization of the reported sensitivity spectral density.
    #[arg(long, value_enum, default_value_t = PrefactorArg::Rate)]
    pub sensitivity_prefactor: PrefactorArg,
}

#[derive(Debug, Args)]
pub struct TimedomainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Relative input amplitude modulation depth.
    #[arg(long, default_value_t = 0.0)]
    pub mod_depth: f64,
    /// Modulation frequency, Hz (default: mechanical resonance).
    #[arg(long)]
    pub mod_freq_hz: Option<f64>,
    /// Integration time, s (default: 50 mechanical decay times).
    #[arg(long)]
    pub duration_s: Option<f64>,
    /// Step, s (default: the stability bound).
    #[arg(long)]
    pub dt_s: Option<f64>,
    /// Integration scheme.
    #[arg(long, value_enum, default_value_t = SchemeArg::Heun)]
    pub scheme: SchemeArg,
}

/// One output file plus its checksum, as recorded in the manifest.
#[derive(Debug, serde::Serialize)]
struct FileEntry {
    name: String,
    sha256: String,
    figure_analogue: Option<String>,
    description: String,
}

#[derive(Debug, serde::Serialize)]
struct Manifest {
    artifact: String,
    version: String,
    mode: String,
    config: String,
    seed: u64,
    parameters: Vec<(String, String)>,
    files: Vec<FileEntry>,
}

struct Emitter {
    dir: PathBuf,
    files: Vec<FileEntry>,
    header: String,
}

impl Emitter {
    fn new(dir: &Path, mode: &str, config: &Path, p: &SystemParams, seed: Option<u64>) -> Result<Emitter> {
        std::fs::create_dir_all(dir)?;
        let mut header = String::new();
        let _ = writeln!(header, "# artifact = backaction {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(header, "# mode = {mode}");
        let _ = writeln!(header, "# config = {}", config.display());
        for (k, v) in param_echo(p) {
            let _ = writeln!(header, "# {k} = {v}");
        }
        if let Some(s) = seed {
            let _ = writeln!(header, "# seed = {s}");
        }
        Ok(Emitter { dir: dir.to_path_buf(), files: Vec::new(), header })
    }

    fn write(&mut self, name: &str, figure: Option<&str>, description: &str, body: &str) -> Result<()> {
        let full = format!("{}{}", self.header, body);
        let path = self.dir.join(name);
        std::fs::write(&path, &full)?;
        let mut hasher = Sha256::new();
        hasher.update(full.as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest {
            let _ = write!(hex, "{b:02x}");
        }
        self.files.push(FileEntry {
            name: name.to_string(),
            sha256: hex,
            figure_analogue: figure.map(str::to_string),
            description: description.to_string(),
        });
        Ok(())
    }

    fn finish(self, mode: &str, config: &Path, p: &SystemParams, seed: u64) -> Result<PathBuf> {
        let manifest = Manifest {
            artifact: "backaction".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            mode: mode.to_string(),
            config: config.display().to_string(),
            seed,
            parameters: param_echo(p),
            files: self.files,
        };
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

fn param_echo(p: &SystemParams) -> Vec<(String, String)> {
    let f = |v: f64| format!("{v:.16e}");
    vec![
        ("omega0_hz".into(), f(p.omega0 / TWO_PI)),
        ("omega_laser_hz".into(), f(p.omega_laser / TWO_PI)),
        ("delta0_hz".into(), f(p.delta0 / TWO_PI)),
        ("gamma_in_hz".into(), f(p.gamma_in / TWO_PI)),
        ("gamma_loss_hz".into(), f(p.gamma_loss / TWO_PI)),
        ("omega_m_hz".into(), f(p.omega_m / TWO_PI)),
        ("gamma_m_hz".into(), f(p.gamma_m / TWO_PI)),
        ("m_eff_kg".into(), f(p.m_eff)),
        ("radius_m".into(), f(p.radius)),
        ("kerr_re_hz".into(), f(p.kerr.re / TWO_PI)),
        ("kerr_im_hz".into(), f(p.kerr.im / TWO_PI)),
        ("temperature_k".into(), f(p.temperature)),
        ("p_in_w".into(), f(p.p_in)),
    ]
}

fn load(config: &Path) -> Result<SystemParams> {
    build_params(&RawConfig::load(config)?)
}

/// Solve the mean field at one power under the requested branch policy; the
/// continuation policy ramps up from 5% of the target in 16 steps.
fn solve_at(p: &SystemParams, power: f64, policy: BranchPolicy) -> Result<MeanFieldSolution> {
    match policy {
        BranchPolicy::Low | BranchPolicy::High => mean_field_at_power(p, power, policy),
        BranchPolicy::Continuation => {
            let n = 16;
            let powers: Vec<f64> = (0..=n)
                .map(|i| power * (0.05 + 0.95 * i as f64 / n as f64))
                .collect();
            Ok(continuation_sweep(p, &powers)?.solutions.into_iter().last().unwrap())
        }
    }
}

fn frequency_grid(
    sol: &MeanFieldSolution,
    p: &SystemParams,
    args: &CommonArgs,
) -> Result<Vec<f64>> {
    let center = dressed_resonance_peak(sol, p)?;
    let half = match args.span_hz {
        Some(span) => std::f64::consts::PI * span, // full span in Hz -> half span in rad/s
        None => 50.0 * p.gamma_m,
    };
    let lo = (center - half).max(1e-9 * p.omega_m);
    let n = args.points.max(2);
    Ok((0..n)
        .map(|i| lo + (center + half - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

fn power_ladder(p: &SystemParams, args: &CommonArgs) -> Vec<f64> {
    match &args.powers {
        Some(v) => v.clone(),
        None => (0..18)
            .map(|i| p.p_in * (1.0 + 3.0 * i as f64 / 17.0))
            .collect(),
    }
}

/// Threshold search with a generous default bracket around the configured power.
fn locate_threshold(p: &SystemParams) -> Result<ThresholdReport> {
    threshold_power(p, (0.02 * p.p_in, 50.0 * p.p_in))
}

fn run_transfer(args: &CommonArgs) -> Result<()> {
    let p = load(&args.config)?;
    let power = args.powers.as_ref().and_then(|v| v.first().copied()).unwrap_or(p.p_in);
    let sol = solve_at(&p, power, args.branch.into())?;
    let rep = assert_below_threshold(&sol, &p)?;
    let grid = frequency_grid(&sol, &p, args)?;

    let mut body = String::from("omega_hz,t_intensity,t_db,s_out,s_xx_m2_s\n");
    for &w in &grid {
        let r = response_sample(&sol, &p, w)?;
        let _ = writeln!(
            body,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            w / TWO_PI,
            r.t_intensity,
            to_db(r.t_intensity),
            r.s_out,
            r.s_xx
        );
    }
    let pw = p.with_power(power);
    let mut em = Emitter::new(&args.out, "transfer", &args.config, &pw, None)?;
    em.write(
        "transfer.csv",
        Some("fig2a-f"),
        &format!(
            "intensity transfer at {power:.3e} W; R = {:.6}, dressed resonance {:.6e} Hz",
            rep.r_factor,
            rep.omega_m_eff / TWO_PI
        ),
        &body,
    )?;
    em.finish("transfer", &args.config, &pw, args.seed)?;
    Ok(())
}

fn run_power_surface(args: &CommonArgs) -> Result<()> {
    let p = load(&args.config)?;
    let powers = power_ladder(&p, args);
    if powers.is_empty() {
        return Err(Error::Config("empty power list".to_string()));
    }
    let sweep = continuation_sweep(&p, &powers)?;
    report_jumps(&sweep.jumps, &powers);
    // Common grid anchored at the highest power, where features are sharpest.
    let last = sweep.solutions.last().unwrap();
    assert_below_threshold(last, &p)?;
    let grid = frequency_grid(last, &p, args)?;

    let mut body = String::from("p_in_w");
    for &w in &grid {
        let _ = write!(body, ",{:.16e}", w / TWO_PI);
    }
    body.push('\n');
    for (i, sol) in sweep.solutions.iter().enumerate() {
        assert_below_threshold(sol, &p)?;
        let _ = write!(body, "{:.16e}", powers[i]);
        for &w in &grid {
            let t = crate::linear_response::intensity_transfer(sol, &p, w)?;
            let _ = write!(body, ",{:.16e}", to_db(t));
        }
        body.push('\n');
    }
    let mut em = Emitter::new(&args.out, "power-surface", &args.config, &p, None)?;
    em.write(
        "power_surface.csv",
        Some("fig2h"),
        "transfer in dB over (power, frequency); first row is the frequency grid in Hz",
        &body,
    )?;
    em.finish("power-surface", &args.config, &p, args.seed)?;
    Ok(())
}

/// Continuation is not fatal across a bistability fold, but the user should
/// know the tracked branch jumped.
fn report_jumps(jumps: &[usize], powers: &[f64]) {
    for &i in jumps {
        eprintln!(
            "note: branch jump at power {:.6e} W (sweep index {i})",
            powers[i]
        );
    }
}

fn run_gain_vs_power(args: &CommonArgs) -> Result<()> {
    let p = load(&args.config)?;
    let powers = power_ladder(&p, args);
    let sweep = continuation_sweep(&p, &powers)?;
    report_jumps(&sweep.jumps, &powers);

    let mut body = String::from("p_in_w,r_factor,omega_m_eff_hz,peak_t_db,omega_peak_hz\n");
    for (i, sol) in sweep.solutions.iter().enumerate() {
        let rep = assert_below_threshold(sol, &p)?;
        let grid = frequency_grid(sol, &p, args)?;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for &w in &grid {
            let t = crate::linear_response::intensity_transfer(sol, &p, w)?;
            if t > best.0 {
                best = (t, w);
            }
        }
        let _ = writeln!(
            body,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            powers[i],
            rep.r_factor,
            rep.omega_m_eff / TWO_PI,
            to_db(best.0),
            best.1 / TWO_PI
        );
    }
    let thr = locate_threshold(&p)?;
    let mut thr_body = String::from("p_threshold_w,r_at_report,omega_m_eff_hz,g1,g2\n");
    let _ = writeln!(
        thr_body,
        "{},{:.16e},{:.16e},{:.16e},{:.16e}",
        thr.p_threshold.map_or(String::new(), |v| format!("{v:.16e}")),
        thr.r_factor,
        thr.omega_m_eff / TWO_PI,
        thr.g1,
        thr.g2
    );

    let mut em = Emitter::new(&args.out, "gain-vs-power", &args.config, &p, None)?;
    em.write(
        "gain_vs_power.csv",
        Some("fig3"),
        "peak transfer gain and amplification factor per input power",
        &body,
    )?;
    em.write("threshold.csv", Some("fig3"), "threshold marker", &thr_body)?;
    em.finish("gain-vs-power", &args.config, &p, args.seed)?;
    Ok(())
}

fn run_notch(args: &CommonArgs) -> Result<()> {
    let p = load(&args.config)?;
    let thr = locate_threshold(&p)?;
    let p_thr = thr.p_threshold.ok_or_else(|| {
        Error::Precondition("no threshold found; the notch point is defined at 60% of threshold".into())
    })?;
    let power = args.powers.as_ref().and_then(|v| v.first().copied()).unwrap_or(0.6 * p_thr);
    let sol = solve_at(&p, power, args.branch.into())?;
    assert_below_threshold(&sol, &p)?;
    let grid = frequency_grid(&sol, &p, args)?;

    let mut t_lin = Vec::with_capacity(grid.len());
    let mut body = String::from("omega_hz,t_intensity,t_db\n");
    for &w in &grid {
        let t = crate::linear_response::intensity_transfer(&sol, &p, w)?;
        t_lin.push(t);
        let _ = writeln!(body, "{:.16e},{:.16e},{:.16e}", w / TWO_PI, t, to_db(t));
    }
    let metrics = notch_metrics(&grid, &t_lin);
    let mut rep_body =
        String::from("p_in_w,p_threshold_w,min_t_db,omega_min_hz,fwhm_hz\n");
    let _ = writeln!(
        rep_body,
        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        power,
        p_thr,
        to_db(metrics.t_min),
        metrics.omega_min / TWO_PI,
        metrics.fwhm / TWO_PI
    );

    let pw = p.with_power(power);
    let mut em = Emitter::new(&args.out, "notch", &args.config, &pw, None)?;
    em.write("notch.csv", Some("fig4"), "transfer around the suppression notch", &body)?;
    em.write("notch_report.csv", Some("fig4"), "notch depth and width", &rep_body)?;
    em.finish("notch", &args.config, &pw, args.seed)?;
    Ok(())
}

/// Notch depth and full width at half depth, on a linear-transfer grid.
pub struct NotchMetrics {
    pub t_min: f64,
    pub omega_min: f64,
    /// Full width (rad/s) where the dip recovers half its depth relative to
    /// the local background.
    pub fwhm: f64,
}

/// Locates the deepest dip and measures its width at half the logarithmic
/// depth — the full width at half maximum one reads off a dB trace. The
/// background is the window median (robust against both the narrow notch and
/// the adjacent amplification peak), and the half-depth level in linear
/// units is the geometric mean of background and minimum.
pub fn notch_metrics(grid: &[f64], t: &[f64]) -> NotchMetrics {
    let n = grid.len();
    let (imin, &t_min) = t
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let mut sorted = t.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let background = sorted[n / 2];
    let level = (background * t_min.max(1e-300)).sqrt();

    let mut left = grid[0];
    for i in (1..=imin).rev() {
        if t[i - 1] >= level && t[i] < level {
            // Interpolate in log space, matching the dB reading.
            let f = (level / t[i]).ln() / (t[i - 1] / t[i]).ln();
            left = grid[i] + f * (grid[i - 1] - grid[i]);
            break;
        }
    }
    let mut right = grid[n - 1];
    for i in imin..n - 1 {
        if t[i] < level && t[i + 1] >= level {
            let f = (level / t[i]).ln() / (t[i + 1] / t[i]).ln();
            right = grid[i] + f * (grid[i + 1] - grid[i]);
            break;
        }
    }
    NotchMetrics { t_min, omega_min: grid[imin], fwhm: right - left }
}

fn run_sql(args: &CommonArgs) -> Result<()> {
    let p = load(&args.config)?;
    let powers = match &args.powers {
        Some(v) => v.clone(),
        None => vec![p.p_in],
    };
    let opts = SensitivityOptions {
        thermal: args.thermal == OnOff::On,
        prefactor: match args.sensitivity_prefactor {
            PrefactorArg::Rate => Prefactor::Rate,
            PrefactorArg::SqrtRate => Prefactor::SqrtRate,
        },
    };
    let sweep = continuation_sweep(&p, &powers)?;
    report_jumps(&sweep.jumps, &powers);

    let mut body = String::from("p_in_w,omega_hz,ratio,s_x_sig_m2_s,s_sql_m2_s\n");
    let mut bands = String::from("p_in_w,band_lo_hz,band_hi_hz,min_ratio,omega_min_hz\n");
    for (i, sol) in sweep.solutions.iter().enumerate() {
        assert_below_threshold(sol, &p)?;
        let grid = frequency_grid(sol, &p, args)?;
        for &w in &grid {
            let s = sensitivity(sol, &p, w, opts)?;
            let _ = writeln!(
                body,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                powers[i],
                w / TWO_PI,
                s.ratio,
                s.s_x_sig,
                s.s_sql
            );
        }
        let band = sql_band(sol, &p, &grid, opts)?;
        let (min_ratio, omega_min) = band.argmin.map_or((f64::NAN, f64::NAN), |(w, r)| (r, w));
        if band.intervals.is_empty() {
            let _ = writeln!(
                bands,
                "{:.16e},,,{:.16e},{:.16e}",
                powers[i],
                min_ratio,
                omega_min / TWO_PI
            );
        }
        for (lo, hi) in &band.intervals {
            let _ = writeln!(
                bands,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                powers[i],
                lo / TWO_PI,
                hi / TWO_PI,
                min_ratio,
                omega_min / TWO_PI
            );
        }
    }
    let mut em = Emitter::new(&args.out, "sql", &args.config, &p, None)?;
    em.write(
        "sql.csv",
        Some("fig5b"),
        "displacement sensitivity to SQL ratio over (power, frequency)",
        &body,
    )?;
    em.write("sql_bands.csv", Some("fig5a"), "sub-SQL frequency bands", &bands)?;
    em.finish("sql", &args.config, &p, args.seed)?;
    Ok(())
}

fn run_timedomain(args: &TimedomainArgs) -> Result<()> {
    let c = &args.common;
    let p = load(&c.config)?;
    let power = c.powers.as_ref().and_then(|v| v.first().copied()).unwrap_or(p.p_in);
    let p = p.with_power(power);
    let s = derive_scales(&p);

    let omega_mod = args.mod_freq_hz.map_or(p.omega_m, |f| TWO_PI * f);
    let mut spec = IntegrationSpec::new(
        args.duration_s.unwrap_or(50.0 / p.gamma_m),
        args.dt_s.unwrap_or(max_stable_dt(&p)),
    );
    spec.drive = Drive { mod_depth: args.mod_depth, omega_mod };
    spec.noise = Noise { thermal: c.thermal == OnOff::On, seed: c.seed };
    spec.scheme = match args.scheme {
        SchemeArg::Heun => Scheme::Heun,
        SchemeArg::EulerMaruyama => Scheme::EulerMaruyama,
    };
    let traj = integrate(&p, &s, &spec)?;

    let mut em = Emitter::new(&c.out, "timedomain", &c.config, &p, Some(c.seed))?;
    let mut body = Vec::new();
    traj.write_csv(&mut body, &param_echo(&p))?;
    let body = String::from_utf8(body).expect("csv is utf-8");
    em.write("trajectory.csv", None, "sampled trajectory (t, Re a, Im a, x, v)", &body)?;

    if args.mod_depth > 0.0 {
        let est = measure_transfer(&traj, omega_mod, None)?;
        let mut tbody = String::from("omega_mod_hz,gain_re,gain_im,gain_mag2,gain_db,std_error,periods\n");
        let _ = writeln!(
            tbody,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            omega_mod / TWO_PI,
            est.gain.re,
            est.gain.im,
            est.gain.norm_sqr(),
            to_db(est.gain.norm_sqr()),
            est.std_error,
            est.periods
        );
        em.write("transfer_estimate.csv", Some("fig2a-f"), "lock-in transfer estimate", &tbody)?;
    }
    if spec.noise.thermal && args.mod_depth == 0.0 {
        // Spectra need a record much longer than the transient; short runs
        // still produce a valid trajectory file.
        match estimate_psd(&traj, None, 16) {
            Ok(psd) => {
                let mut pbody = String::from("freq_hz,s_xx_m2_per_hz,s_flux_out_per_hz\n");
                for k in 0..psd.x.freqs.len() {
                    let _ = writeln!(
                        pbody,
                        "{:.16e},{:.16e},{:.16e}",
                        psd.x.freqs[k],
                        psd.x.values[k],
                        psd.flux_out.values[k]
                    );
                }
                em.write("psd.csv", None, "Welch spectra of x and output flux", &pbody)?;
            }
            Err(Error::InsufficientData(msg)) => {
                eprintln!("note: skipping psd.csv ({msg})");
            }
            Err(e) => return Err(e),
        }
    }
    em.finish("timedomain", &c.config, &p, c.seed)?;
    Ok(())
}

fn run_threshold(args: &CommonArgs) -> Result<()> {
    let p = load(&args.config)?;
    let rep = locate_threshold(&p)?;
    let mut body = String::from("p_threshold_w,r_at_report,omega_m_eff_hz,g1,g2,fit_residual\n");
    let _ = writeln!(
        body,
        "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        rep.p_threshold.map_or(String::new(), |v| format!("{v:.16e}")),
        rep.r_factor,
        rep.omega_m_eff / TWO_PI,
        rep.g1,
        rep.g2,
        rep.fit_residual
    );
    let mut em = Emitter::new(&args.out, "threshold", &args.config, &p, None)?;
    em.write("threshold.csv", None, "regenerative-oscillation threshold", &body)?;
    em.finish("threshold", &args.config, &p, args.seed)?;
    Ok(())
}

fn run_validate(config: &Path) -> Result<()> {
    let p = load(config)?;
    println!("configuration OK: {}", config.display());
    for (k, v) in param_echo(&p) {
        println!("  {k} = {v}");
    }
    for note in p.physics_notes() {
        println!("  note: {note}");
    }
    Ok(())
}

/// Dispatches a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.mode {
        Mode::Transfer(a) => run_transfer(a),
        Mode::PowerSurface(a) => run_power_surface(a),
        Mode::GainVsPower(a) => run_gain_vs_power(a),
        Mode::Notch(a) => run_notch(a),
        Mode::Sql(a) => run_sql(a),
        Mode::Timedomain(a) => run_timedomain(a),
        Mode::Threshold(a) => run_threshold(a),
        Mode::Validate { config } => run_validate(config),
    }
}
