//! Post-beamforming signal chain: band-pass, envelope, log compression.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{Error, Result};

/// Linear-phase band-pass FIR specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    /// Passband centre (Hz).
    pub center: f64,
    /// Half of the passband width (Hz).
    pub half_bandwidth: f64,
    /// Filter length; odd so the group delay is a whole number of samples.
    pub taps: usize,
}

impl FilterSpec {
    pub const DEFAULT_TAPS: usize = 63;

    /// Passband `center +- f0/2` with the default length.
    pub fn around(center: f64, f0: f64) -> Self {
        Self {
            center,
            half_bandwidth: f0 / 2.0,
            taps: Self::DEFAULT_TAPS,
        }
    }

    pub fn validate(&self, fs: f64) -> Result<()> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::SamplingFrequency(fs));
        }
        if self.taps.is_multiple_of(2) || self.taps < 3 {
            return Err(Error::Filter(format!(
                "taps must be odd and >= 3, got {}",
                self.taps
            )));
        }
        let lo = self.center - self.half_bandwidth;
        let hi = self.center + self.half_bandwidth;
        if !(self.half_bandwidth > 0.0 && lo > 0.0 && hi < fs / 2.0) {
            return Err(Error::Filter(format!(
                "passband [{lo}, {hi}] Hz must lie strictly inside (0, {}) Hz",
                fs / 2.0
            )));
        }
        Ok(())
    }
}

/// Designed filter taps, symmetric about the centre tap.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    taps: Vec<f64>,
}

impl FirFilter {
    /// Hann-windowed sinc band-pass with an exact spectral null at DC and unit
    /// gain at the passband centre.
    pub fn design(spec: &FilterSpec, fs: f64) -> Result<Self> {
        spec.validate(fs)?;
        let n = spec.taps;
        let half = (n / 2) as f64;
        let lo = (spec.center - spec.half_bandwidth) / fs;
        let hi = (spec.center + spec.half_bandwidth) / fs;
        // endpoints of the window stay nonzero so every tap contributes
        let window: Vec<f64> = (0..n)
            .map(|k| 0.5 - 0.5 * (2.0 * PI * (k + 1) as f64 / (n + 1) as f64).cos())
            .collect();
        let mut taps: Vec<f64> = (0..n)
            .map(|k| {
                let t = k as f64 - half;
                (2.0 * hi * sinc(2.0 * hi * t) - 2.0 * lo * sinc(2.0 * lo * t)) * window[k]
            })
            .collect();
        // remove the residual DC leakage with a scaled copy of the window
        let dc: f64 = taps.iter().sum::<f64>() / window.iter().sum::<f64>();
        for (h, w) in taps.iter_mut().zip(&window) {
            *h -= dc * w;
        }
        let mut filter = Self { taps };
        let g = filter.gain(spec.center, fs);
        if !(g > 0.0) {
            return Err(Error::Filter(
                "degenerate design, zero gain at centre".into(),
            ));
        }
        filter.taps.iter_mut().for_each(|h| *h /= g);
        for k in 0..n / 2 {
            filter.taps[n - 1 - k] = filter.taps[k];
        }
        Ok(filter)
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn group_delay(&self) -> usize {
        self.taps.len() / 2
    }

    /// Magnitude response at frequency `f`.
    pub fn gain(&self, f: f64, fs: f64) -> f64 {
        let w = 2.0 * PI * f / fs;
        let (re, im) = self
            .taps
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(re, im), (k, &h)| {
                (re + h * (w * k as f64).cos(), im - h * (w * k as f64).sin())
            });
        re.hypot(im)
    }

    /// Filters `signal`, compensating the group delay so the output lines up
    /// with the input. The signal is mirrored about its end samples to fill
    /// the filter support near the edges.
    pub fn apply(&self, signal: &[f64]) -> Result<Vec<f64>> {
        let n = self.taps.len();
        if signal.len() <= n {
            return Err(Error::SignalTooShort {
                required: n,
                actual: signal.len(),
            });
        }
        let c = self.group_delay();
        let len = signal.len();
        let mut padded = Vec::with_capacity(len + 2 * c);
        padded.extend(signal[1..=c].iter().rev());
        padded.extend_from_slice(signal);
        padded.extend(signal[len - 1 - c..len - 1].iter().rev());
        // taps are symmetric, so correlation equals convolution
        let out = padded
            .windows(n)
            .map(|w| w.iter().zip(&self.taps).map(|(x, h)| x * h).sum())
            .collect();
        Ok(out)
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Designs `spec` at `fs` and filters `signal`.
pub fn bandpass(signal: &[f64], spec: &FilterSpec, fs: f64) -> Result<Vec<f64>> {
    FirFilter::design(spec, fs)?.apply(signal)
}

/// Magnitude of the analytic signal.
///
/// The input is zero-padded to the next power of two, negative frequencies are
/// zeroed and positive ones doubled before the inverse transform.
pub fn envelope(signal: &[f64]) -> Result<Vec<f64>> {
    let mut planner = FftPlanner::new();
    envelope_with(signal, &mut planner)
}

pub(crate) fn envelope_with(signal: &[f64], planner: &mut FftPlanner<f64>) -> Result<Vec<f64>> {
    if signal.len() < 4 {
        return Err(Error::SignalTooShort {
            required: 3,
            actual: signal.len(),
        });
    }
    let n = signal.len().next_power_of_two();
    let mut buf: Vec<Complex64> = signal
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(n)
        .collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for v in &mut buf[1..n / 2] {
        *v *= 2.0;
    }
    for v in &mut buf[n / 2 + 1..] {
        *v = Complex64::new(0.0, 0.0);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(buf[..signal.len()]
        .iter()
        .map(|v| v.norm() * scale)
        .collect())
}

/// `20 log10(v / max v)`, floored at `-dynamic_range`.
pub fn log_compress(envelope: &[f64], dynamic_range: f64) -> Result<Vec<f64>> {
    if !(dynamic_range.is_finite() && dynamic_range > 0.0) {
        return Err(Error::Filter(format!(
            "dynamic range must be positive, got {dynamic_range}"
        )));
    }
    let max = envelope.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) || !max.is_finite() {
        return Err(Error::ZeroImage);
    }
    let floor = -dynamic_range;
    Ok(envelope
        .iter()
        .map(|&v| {
            let db = 20.0 * (v.max(0.0) / max).log10();
            if db > floor {
                db
            } else {
                floor
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 100e6;
    const F0: f64 = 3e6;

    fn tone(f: f64, n: usize, phase: f64) -> Vec<f64> {
        (0..n)
            .map(|k| (2.0 * PI * f * k as f64 / FS + phase).sin())
            .collect()
    }

    #[test]
    fn rejects_bad_specs() {
        let spec = FilterSpec::around(2.0 * F0, F0);
        assert!(spec.validate(FS).is_ok());
        assert!(FilterSpec { taps: 62, ..spec }.validate(FS).is_err());
        assert!(FilterSpec {
            center: 1e6,
            ..spec
        }
        .validate(FS)
        .is_err());
        assert!(FilterSpec {
            center: 49.5e6,
            ..spec
        }
        .validate(FS)
        .is_err());
        assert!(bandpass(&[0.0; 63], &spec, FS).is_err());
    }

    #[test]
    fn dc_rejected() {
        let spec = FilterSpec::around(2.0 * F0, F0);
        let y = bandpass(&vec![1.0; 2000], &spec, FS).unwrap();
        let worst = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst <= 0.01, "max |y| = {worst}");
        let f = FirFilter::design(&spec, FS).unwrap();
        assert!(20.0 * f.gain(0.0, FS).log10() <= -40.0);
        // the fundamental-band filter used for DAS also nulls DC
        let das = FirFilter::design(&FilterSpec::around(F0, F0), FS).unwrap();
        assert!(20.0 * das.gain(0.0, FS).max(1e-300).log10() <= -40.0);
    }

    #[test]
    fn passband_tone_amplitude() {
        let spec = FilterSpec::around(2.0 * F0, F0);
        let x = tone(2.0 * F0, 4000, 0.3);
        let y = bandpass(&x, &spec, FS).unwrap();
        let amp = y[1000..3000].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((0.89..=1.12).contains(&amp), "amplitude {amp}");
        let g = FirFilter::design(&spec, FS).unwrap().gain(2.0 * F0, FS);
        assert!((20.0 * g.log10()).abs() <= 1.0);
    }

    #[test]
    fn impulse_returns_symmetric_taps() {
        let spec = FilterSpec::around(2.0 * F0, F0);
        let f = FirFilter::design(&spec, FS).unwrap();
        let mut x = vec![0.0; 200];
        x[100] = 1.0;
        let y = f.apply(&x).unwrap();
        let c = f.group_delay();
        assert_eq!(&y[100 - c..=100 + c], f.taps());
        let t = f.taps();
        for k in 0..t.len() {
            assert!((t[k] - t[t.len() - 1 - k]).abs() < 1e-15);
        }
    }

    #[test]
    fn filter_is_shift_equivariant() {
        let spec = FilterSpec::around(2.0 * F0, F0);
        let x: Vec<f64> = (0..600)
            .map(|k| ((k * 7919) % 101) as f64 / 50.0 - 1.0)
            .collect();
        let mut shifted = vec![0.0; 600];
        shifted[10..].copy_from_slice(&x[..590]);
        let y = bandpass(&x, &spec, FS).unwrap();
        let ys = bandpass(&shifted, &spec, FS).unwrap();
        for k in 100..500 {
            assert!((ys[k + 10] - y[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_of_zero_is_zero() {
        assert_eq!(envelope(&[0.0; 16]).unwrap(), vec![0.0; 16]);
        assert!(envelope(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn envelope_of_tone_is_flat_and_phase_invariant() {
        let n = 3000;
        for phase in [0.0, PI / 2.0, 1.1] {
            let e = envelope(&tone(F0, n, phase)).unwrap();
            for &v in &e[n / 20..n - n / 20] {
                assert!((v - 1.0).abs() <= 0.02, "envelope {v}");
            }
        }
        let e = envelope(&tone(F0, n, 0.0)).unwrap();
        let scaled: Vec<f64> = tone(F0, n, 0.0).iter().map(|v| 2.5 * v).collect();
        let es = envelope(&scaled).unwrap();
        for (a, b) in e.iter().zip(&es) {
            assert!((2.5 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn log_compress_values() {
        let db = log_compress(&[10.0, 1.0, 1e-5, 0.0], 70.0).unwrap();
        assert_eq!(db[0], 0.0);
        assert!((db[1] + 20.0).abs() < 1e-12);
        assert_eq!(db[2], -70.0);
        assert_eq!(db[3], -70.0);
        assert_eq!(log_compress(&[0.0; 4], 70.0).unwrap_err(), Error::ZeroImage);
    }

    #[test]
    fn log_compress_scale_invariant_for_binary_scales() {
        let e: Vec<f64> = (1..200)
            .map(|k| (k as f64 * 0.37).sin().abs() + 1e-3)
            .collect();
        let base = log_compress(&e, 70.0).unwrap();
        for p in [-30, -3, 1, 17] {
            let a = 2f64.powi(p);
            let s: Vec<f64> = e.iter().map(|v| v * a).collect();
            assert_eq!(log_compress(&s, 70.0).unwrap(), base);
        }
    }
}
