//! Spectral estimation helpers: Welch-averaged periodograms and lock-in
//! demodulation of a sampled record.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::Error;
use crate::Result;

/// Two-sided power spectral density on the non-negative frequency half.
///
/// Values are two-sided densities in 1/Hz units: the signal variance is
/// recovered by [`Psd::integrated_power`], which counts interior bins twice.
#[derive(Debug, Clone)]
pub struct Psd {
    /// Bin centers, Hz, from 0 to the Nyquist frequency.
    pub freqs: Vec<f64>,
    /// Two-sided PSD values (unit^2 / Hz).
    pub values: Vec<f64>,
    /// Frequency resolution, Hz.
    pub df: f64,
    /// Number of averaged segments.
    pub segments: usize,
}

impl Psd {
    /// Total power = integral of the two-sided PSD over both frequency signs.
    pub fn integrated_power(&self) -> f64 {
        let n = self.values.len();
        let mut acc = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            // DC counts once; the Nyquist bin (present for even segment
            // lengths) also counts once; interior bins represent +-f pairs.
            let weight = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            acc += weight * v;
        }
        acc * self.df
    }
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let x = std::f64::consts::TAU * i as f64 / n as f64;
            0.5 * (1.0 - x.cos())
        })
        .collect()
}

/// Welch PSD estimate with Hann window and 50% overlap.
///
/// `n_segments` is the requested number of overlapping segments; fewer may be
/// produced when the record is short, and fewer than `min_segments = 2` is an
/// error. The mean of each segment is removed before windowing, so the DC bin
/// reflects only residual drift.
pub fn welch_psd(x: &[f64], dt: f64, n_segments: usize) -> Result<Psd> {
    if n_segments < 1 {
        return Err(Error::InsufficientData("welch: need at least one segment".into()));
    }
    // 50% overlap: total length = seg_len * (n_segments + 1) / 2.
    let seg_len = (2 * x.len() / (n_segments + 1)).max(2) & !1usize;
    if seg_len < 8 || x.len() < seg_len {
        return Err(Error::InsufficientData(format!(
            "welch: record of {} samples cannot host {} segments",
            x.len(),
            n_segments
        )));
    }
    let hop = seg_len / 2;
    let segments = (x.len() - seg_len) / hop + 1;

    let window = hann(seg_len);
    let w2: f64 = window.iter().map(|w| w * w).sum();
    let fs = 1.0 / dt;
    let norm = dt / w2; // two-sided density normalization |X_k|^2 * dt / sum(w^2)

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(seg_len);
    let n_bins = seg_len / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); seg_len];

    for s in 0..segments {
        let seg = &x[s * hop..s * hop + seg_len];
        let mean = seg.iter().sum::<f64>() / seg_len as f64;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new((seg[i] - mean) * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr() * norm;
        }
    }
    for a in acc.iter_mut() {
        *a /= segments as f64;
    }
    let df = fs / seg_len as f64;
    Ok(Psd {
        freqs: (0..n_bins).map(|k| k as f64 * df).collect(),
        values: acc,
        df,
        segments,
    })
}

/// Lock-in estimate of the complex cosine amplitude of `y` at `omega`.
#[derive(Debug, Clone, Copy)]
pub struct LockinEstimate {
    /// Complex amplitude c such that y(t) ~ Re(c e^{i omega t}) + DC.
    pub amplitude: Complex64,
    /// Standard error of |amplitude| across averaging windows.
    pub std_error: f64,
    /// Number of whole modulation periods used.
    pub periods: usize,
}

/// Demodulates a uniformly sampled record at angular frequency `omega`,
/// using only whole periods and averaging over `n_windows` sub-windows for
/// an error estimate.
pub fn lockin(y: &[f64], dt: f64, omega: f64, n_windows: usize) -> Result<LockinEstimate> {
    if omega <= 0.0 {
        return Err(Error::Precondition("lockin: omega must be > 0".into()));
    }
    let period = std::f64::consts::TAU / omega;
    let samples_per_period = period / dt;
    let total_periods = (y.len() as f64 * dt / period).floor() as usize;
    if total_periods < 1 || samples_per_period < 4.0 {
        return Err(Error::InsufficientData(format!(
            "lockin: record holds {total_periods} whole periods at {samples_per_period:.1} samples/period"
        )));
    }
    let n_windows = n_windows.max(1).min(total_periods);
    let periods_per_window = total_periods / n_windows;

    // A large DC pedestal leaks into the demodulation through the sub-sample
    // misalignment of the window edges; remove it first.
    let span = (((total_periods as f64) * period / dt).round() as usize).min(y.len());
    let mean = y[..span].iter().sum::<f64>() / span as f64;

    let mut estimates = Vec::with_capacity(n_windows);
    for w in 0..n_windows {
        let t_start = w as f64 * periods_per_window as f64 * period;
        let t_end = t_start + periods_per_window as f64 * period;
        let i0 = (t_start / dt).round() as usize;
        let i1 = ((t_end / dt).round() as usize).min(y.len());
        if i1 <= i0 + 2 {
            continue;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in i0..i1 {
            let t = i as f64 * dt;
            acc += (y[i] - mean) * Complex64::new(0.0, -omega * t).exp();
        }
        // 2/T * integral(y e^{-iwt} dt) recovers the cosine amplitude.
        estimates.push(acc * Complex64::new(2.0 * dt / ((i1 - i0) as f64 * dt), 0.0));
    }
    if estimates.is_empty() {
        return Err(Error::InsufficientData("lockin: no usable windows".into()));
    }
    let mean = estimates.iter().sum::<Complex64>() / estimates.len() as f64;
    let var = estimates
        .iter()
        .map(|e| (e - mean).norm_sqr())
        .sum::<f64>()
        / estimates.len() as f64;
    let std_error = (var / estimates.len() as f64).sqrt();
    Ok(LockinEstimate {
        amplitude: mean,
        std_error,
        periods: total_periods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn white_noise_psd_is_flat_at_known_level() {
        // Unit-intensity white noise sampled as N(0,1)/sqrt(dt) has two-sided
        // PSD = 1 at every frequency.
        let dt: f64 = 1.0e-3;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..1 << 17)
            .map(|_| {
                let u: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                u / dt.sqrt()
            })
            .collect();
        let psd = welch_psd(&x, dt, 64).unwrap();
        assert!(psd.segments >= 64);
        let mid = &psd.values[2..psd.values.len() - 2];
        let mean = mid.iter().sum::<f64>() / mid.len() as f64;
        assert!((mean - 1.0).abs() < 0.05, "white PSD level = {mean}");
        // Integral equals the variance (1/dt) within statistics.
        let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        let power = psd.integrated_power();
        assert!((power / var - 1.0).abs() < 0.05);
    }

    #[test]
    fn sine_power_recovered() {
        let dt = 1.0e-4;
        let f0 = 321.0;
        let x: Vec<f64> = (0..1 << 16)
            .map(|i| 2.0 * (std::f64::consts::TAU * f0 * i as f64 * dt).sin())
            .collect();
        let psd = welch_psd(&x, dt, 16).unwrap();
        let power = psd.integrated_power();
        assert!((power - 2.0).abs() < 0.05, "sine power = {power}");
        // Peak at the right bin.
        let peak = psd
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!((psd.freqs[peak] - f0).abs() < 2.0 * psd.df);
    }

    #[test]
    fn too_short_record_rejected() {
        assert!(welch_psd(&[0.0; 16], 1.0, 16).is_err());
    }

    #[test]
    fn lockin_recovers_amplitude_and_phase() {
        let dt = 1.0e-6;
        let omega = std::f64::consts::TAU * 5.0e3;
        let amp = Complex64::new(0.7, -0.3);
        let y: Vec<f64> = (0..200_000)
            .map(|i| {
                let t = i as f64 * dt;
                (amp * Complex64::new(0.0, omega * t).exp()).re + 5.0
            })
            .collect();
        let est = lockin(&y, dt, omega, 8).unwrap();
        assert!((est.amplitude - amp).norm() < 1e-6, "amplitude = {}", est.amplitude);
        assert!(est.std_error < 1e-6);
    }

    #[test]
    fn lockin_orthogonal_frequency_rejected() {
        let dt = 1.0e-6;
        let omega = std::f64::consts::TAU * 5.0e3;
        let y: Vec<f64> = (0..200_000)
            .map(|i| (omega * i as f64 * dt).cos())
            .collect();
        let est = lockin(&y, dt, 2.0 * omega, 8).unwrap();
        assert!(est.amplitude.norm() < 1e-6);
    }

    #[test]
    fn lockin_insufficient_duration() {
        let dt = 1.0e-6;
        let y = vec![0.0; 100];
        assert!(lockin(&y, dt, std::f64::consts::TAU * 1.0e3, 4).is_err());
    }

    #[test]
    fn lockin_linearity_in_noise() {
        // Amplitude estimate is unbiased against additive wideband noise.
        let dt = 1.0e-6;
        let omega = std::f64::consts::TAU * 7.0e3;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let y: Vec<f64> = (0..400_000)
            .map(|i| {
                let t = i as f64 * dt;
                0.01 * (omega * t).cos() + 0.1 * rng.gen_range(-1.0..1.0)
            })
            .collect();
        let est = lockin(&y, dt, omega, 8).unwrap();
        assert!((est.amplitude.re - 0.01).abs() < 5.0 * est.std_error.max(1e-5));
    }
}
