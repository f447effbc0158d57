//! Point-scatterer RF synthesis for the numerical phantoms.
//!
//! Single-scattering model with a plane transmit wavefront travelling along
//! the depth axis. Element `i` records, for every scatterer `s`,
//!
//! ```text
//! a_s / r_is * p(t - (z_s + r_is) / c)
//! ```
//!
//! where `r_is` is the scatterer-to-element distance and `p` the round-trip
//! pulse (excitation convolved twice with the element impulse response). The
//! recording clock is referenced to the pulse centre, so an echo from depth `z`
//! right below an element peaks at `t = 2z/c`.
//!
//! Elements are omnidirectional points; there is no attenuation and no
//! elevation focusing.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::geometry::ArrayGeometry;
use crate::rf::RfFrame;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    pub x: f64,
    pub z: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomLabel {
    Wires,
    Cysts,
    TumorWire,
    Custom,
}

/// Axis-aligned box (m) that every scatterer of a phantom must lie in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Bounds {
    pub fn contains(&self, x: f64, z: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.z_min..=self.z_max).contains(&z)
    }
}

/// Circular inclusion in a speckle phantom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub x: f64,
    pub z: f64,
    pub radius: f64,
}

impl Disc {
    pub fn contains(&self, x: f64, z: f64) -> bool {
        (x - self.x).powi(2) + (z - self.z).powi(2) <= self.radius * self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub label: PhantomLabel,
    pub bounds: Bounds,
    pub scatterers: Vec<Scatterer>,
    /// Anechoic regions, kept for metric placement.
    pub cysts: Vec<Disc>,
}

impl Phantom {
    pub fn new(label: PhantomLabel, bounds: Bounds, scatterers: Vec<Scatterer>) -> Result<Self> {
        let p = Self {
            label,
            bounds,
            scatterers,
            cysts: Vec::new(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bounds.z_min <= 0.0 {
            return Err(Error::Phantom(
                "bounding box must lie below the array (z > 0)".into(),
            ));
        }
        for (k, s) in self.scatterers.iter().enumerate() {
            if !s.amplitude.is_finite() {
                return Err(Error::Phantom(format!(
                    "scatterer {k} has non-finite amplitude"
                )));
            }
            if !self.bounds.contains(s.x, s.z) {
                return Err(Error::Phantom(format!(
                    "scatterer {k} at ({}, {}) lies outside the bounding box",
                    s.x, s.z
                )));
            }
        }
        Ok(())
    }

    /// Reflection about `x = 0`.
    pub fn mirrored(&self) -> Self {
        let b = self.bounds;
        Self {
            label: self.label,
            bounds: Bounds {
                x_min: -b.x_max,
                x_max: -b.x_min,
                ..b
            },
            scatterers: self
                .scatterers
                .iter()
                .map(|s| Scatterer { x: -s.x, ..*s })
                .collect(),
            cysts: self.cysts.iter().map(|d| Disc { x: -d.x, ..*d }).collect(),
        }
    }
}

/// Wire phantom layout.
#[derive(Debug, Clone, PartialEq)]
pub struct WireLayout {
    /// Lateral distance between the two wires of a pair (m).
    pub pair_separation: f64,
    pub pair_depths: Vec<f64>,
    pub single_depths: Vec<f64>,
    pub amplitude: f64,
}

impl Default for WireLayout {
    fn default() -> Self {
        Self {
            pair_separation: 3e-3,
            pair_depths: vec![35e-3, 40e-3, 45e-3, 50e-3, 55e-3, 60e-3],
            single_depths: vec![32e-3, 63e-3],
            amplitude: 1.0,
        }
    }
}

impl WireLayout {
    /// Lateral positions of the two wires of a pair.
    pub fn pair_x(&self) -> [f64; 2] {
        [-self.pair_separation / 2.0, self.pair_separation / 2.0]
    }
}

pub fn make_wire_phantom() -> Phantom {
    wire_phantom(&WireLayout::default()).expect("default wire layout is valid")
}

/// Wires in pairs at `pair_depths`, single wires on axis at `single_depths`.
pub fn wire_phantom(layout: &WireLayout) -> Result<Phantom> {
    let mut scatterers = Vec::new();
    for &z in &layout.single_depths {
        scatterers.push(Scatterer {
            x: 0.0,
            z,
            amplitude: layout.amplitude,
        });
    }
    for &z in &layout.pair_depths {
        for x in layout.pair_x() {
            scatterers.push(Scatterer {
                x,
                z,
                amplitude: layout.amplitude,
            });
        }
    }
    scatterers.sort_by(|a, b| a.z.total_cmp(&b.z).then(a.x.total_cmp(&b.x)));
    let depths = scatterers.iter().map(|s| s.z);
    let z_min = depths.clone().fold(f64::INFINITY, f64::min);
    let z_max = depths.fold(f64::NEG_INFINITY, f64::max);
    let half = layout.pair_separation.max(1e-3);
    Phantom::new(
        PhantomLabel::Wires,
        Bounds {
            x_min: -half,
            x_max: half,
            z_min: (z_min - 1e-3).max(1e-4),
            z_max: z_max + 1e-3,
        },
        scatterers,
    )
}

/// Speckle phantom parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeckleParams {
    pub bounds: Bounds,
    /// Scatterers per square millimetre.
    pub density_per_mm2: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CystLayout {
    pub speckle: SpeckleParams,
    pub depths: Vec<f64>,
    pub large: (f64, f64),
    pub small: (f64, f64),
}

impl CystLayout {
    /// `(x, radius)` of the large and small cyst at each depth.
    pub fn discs(&self) -> Vec<Disc> {
        self.depths
            .iter()
            .flat_map(|&z| [self.large, self.small].map(|(x, radius)| Disc { x, z, radius }))
            .collect()
    }
}

impl Default for CystLayout {
    fn default() -> Self {
        Self {
            speckle: SpeckleParams {
                bounds: Bounds {
                    x_min: -15e-3,
                    x_max: 15e-3,
                    z_min: 4e-3,
                    z_max: 56e-3,
                },
                density_per_mm2: 20.0,
                seed: 1,
            },
            depths: vec![10e-3, 20e-3, 30e-3, 40e-3, 50e-3],
            large: (-5e-3, 4e-3),
            small: (10e-3, 2.5e-3),
        }
    }
}

fn speckle(params: &SpeckleParams) -> Vec<Scatterer> {
    let b = params.bounds;
    let area_mm2 = (b.x_max - b.x_min) * (b.z_max - b.z_min) * 1e6;
    let count = (area_mm2 * params.density_per_mm2).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    (0..count)
        .map(|_| Scatterer {
            x: rng.random_range(b.x_min..=b.x_max),
            z: rng.random_range(b.z_min..=b.z_max),
            amplitude: rng.random_range(-1.0..=1.0),
        })
        .collect()
}

pub fn make_cyst_phantom() -> Phantom {
    cyst_phantom(&CystLayout::default()).expect("default cyst layout is valid")
}

/// Uniform speckle with zero-amplitude scatterers inside every cyst disc.
pub fn cyst_phantom(layout: &CystLayout) -> Result<Phantom> {
    let discs = layout.discs();
    let scatterers = speckle(&layout.speckle)
        .into_iter()
        .map(|s| {
            if discs.iter().any(|d| d.contains(s.x, s.z)) {
                Scatterer {
                    amplitude: 0.0,
                    ..s
                }
            } else {
                s
            }
        })
        .collect();
    let mut p = Phantom::new(PhantomLabel::Cysts, layout.speckle.bounds, scatterers)?;
    p.cysts = discs;
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TumorLayout {
    pub speckle: SpeckleParams,
    /// Centre `(x, z)` and semi-axes `(a_x, a_z)` of the echogenic ellipse.
    pub center: (f64, f64),
    pub semi_axes: (f64, f64),
    pub contrast: f64,
    pub wire: Scatterer,
}

impl Default for TumorLayout {
    fn default() -> Self {
        Self {
            speckle: SpeckleParams {
                bounds: Bounds {
                    x_min: -15e-3,
                    x_max: 15e-3,
                    z_min: 20e-3,
                    z_max: 60e-3,
                },
                density_per_mm2: 20.0,
                seed: 2,
            },
            center: (-2e-3, 40e-3),
            semi_axes: (6e-3, 4e-3),
            contrast: 4.0,
            wire: Scatterer {
                x: 8e-3,
                z: 30e-3,
                amplitude: 20.0,
            },
        }
    }
}

pub fn make_tumor_phantom() -> Phantom {
    tumor_phantom(&TumorLayout::default()).expect("default tumor layout is valid")
}

/// Speckle background, an elliptical region of elevated amplitude, one wire.
pub fn tumor_phantom(layout: &TumorLayout) -> Result<Phantom> {
    let (cx, cz) = layout.center;
    let (ax, az) = layout.semi_axes;
    let mut scatterers: Vec<Scatterer> = speckle(&layout.speckle)
        .into_iter()
        .map(|s| {
            let inside = ((s.x - cx) / ax).powi(2) + ((s.z - cz) / az).powi(2) <= 1.0;
            if inside {
                Scatterer {
                    amplitude: s.amplitude * layout.contrast,
                    ..s
                }
            } else {
                s
            }
        })
        .collect();
    scatterers.push(layout.wire);
    Phantom::new(PhantomLabel::TumorWire, layout.speckle.bounds, scatterers)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseWeighting {
    Rectangular,
    Hann,
}

/// Windowed sinusoid of `cycles` periods at `f0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseModel {
    pub f0: f64,
    pub cycles: u32,
    pub weighting: PulseWeighting,
}

impl PulseModel {
    /// Two-cycle Hann-weighted element impulse response.
    pub fn impulse_response(f0: f64) -> Self {
        Self {
            f0,
            cycles: 2,
            weighting: PulseWeighting::Hann,
        }
    }

    /// Two-cycle rectangular excitation.
    pub fn excitation(f0: f64) -> Self {
        Self {
            f0,
            cycles: 2,
            weighting: PulseWeighting::Rectangular,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cycles < 1 || !(self.f0.is_finite() && self.f0 > 0.0) {
            return Err(Error::Phantom(format!(
                "pulse needs cycles >= 1 and f0 > 0, got {} cycles at {} Hz",
                self.cycles, self.f0
            )));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.cycles as f64 / self.f0
    }

    /// Samples at `rate`, covering `[0, duration]`.
    pub fn sampled(&self, rate: f64) -> Vec<f64> {
        let t_end = self.duration();
        let n = (t_end * rate).round() as usize + 1;
        (0..n)
            .map(|k| {
                let t = k as f64 / rate;
                let w = match self.weighting {
                    PulseWeighting::Rectangular => 1.0,
                    PulseWeighting::Hann => 0.5 - 0.5 * (2.0 * PI * t / t_end).cos(),
                };
                w * (2.0 * PI * self.f0 * t).sin()
            })
            .collect()
    }
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &u) in a.iter().enumerate() {
        for (j, &v) in b.iter().enumerate() {
            out[i + j] += u * v;
        }
    }
    out
}

/// Round-trip pulse tabulated on a fine grid, time origin at its centre,
/// peak magnitude normalized to one.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTripPulse {
    table: Vec<f64>,
    rate: f64,
}

impl RoundTripPulse {
    const OVERSAMPLE: f64 = 16.0;

    pub fn new(excitation: &PulseModel, impulse: &PulseModel, fs: f64) -> Result<Self> {
        excitation.validate()?;
        impulse.validate()?;
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::SamplingFrequency(fs));
        }
        let rate = fs * Self::OVERSAMPLE;
        let e = excitation.sampled(rate);
        let h = impulse.sampled(rate);
        let mut table = convolve(&convolve(&e, &h), &h);
        let peak = table.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        table.iter_mut().for_each(|v| *v /= peak);
        Ok(Self { table, rate })
    }

    /// Pulse centred on its midpoint, so the echo envelope peaks at the arrival time.
    pub fn half_duration(&self) -> f64 {
        (self.table.len() - 1) as f64 / (2.0 * self.rate)
    }

    /// Value at time `t` (s) relative to the pulse centre.
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        let pos = t * self.rate + (self.table.len() - 1) as f64 / 2.0;
        if !(pos >= 0.0 && pos <= (self.table.len() - 1) as f64) {
            return 0.0;
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        if i + 1 >= self.table.len() {
            return self.table[i];
        }
        self.table[i] + frac * (self.table[i + 1] - self.table[i])
    }
}

/// Synthesizes one frame with a two-cycle rectangular excitation and the
/// element impulse response `impulse`.
pub fn synthesize_rf(
    phantom: &Phantom,
    geometry: &ArrayGeometry,
    impulse: &PulseModel,
    fs: f64,
) -> Result<RfFrame> {
    let excitation = PulseModel {
        weighting: PulseWeighting::Rectangular,
        ..*impulse
    };
    let pulse = RoundTripPulse::new(&excitation, impulse, fs)?;
    synthesize_rf_with(phantom, geometry, &pulse, impulse.f0, fs)
}

pub fn synthesize_rf_with(
    phantom: &Phantom,
    geometry: &ArrayGeometry,
    pulse: &RoundTripPulse,
    f0: f64,
    fs: f64,
) -> Result<RfFrame> {
    if phantom.scatterers.is_empty() {
        return Err(Error::Phantom("phantom has no scatterers".into()));
    }
    phantom.validate()?;
    let c = geometry.sound_speed();
    let xs = geometry.element_x();
    let latest = phantom
        .scatterers
        .iter()
        .flat_map(|s| xs.iter().map(move |&xi| (s.z + (s.x - xi).hypot(s.z)) / c))
        .fold(0.0f64, f64::max);
    let half = pulse.half_duration();
    let k = ((latest + half) * fs).ceil() as usize + 1;

    let mut samples = vec![0.0; xs.len() * k];
    samples
        .par_chunks_mut(k)
        .zip(xs.par_iter())
        .for_each(|(channel, &xi)| {
            for s in phantom.scatterers.iter().filter(|s| s.amplitude != 0.0) {
                let r = (s.x - xi).hypot(s.z);
                let arrival = (s.z + r) / c;
                let gain = s.amplitude / r;
                let first = ((arrival - half) * fs).ceil().max(0.0) as usize;
                let last = (((arrival + half) * fs).floor() as usize).min(k - 1);
                for (n, out) in channel.iter_mut().enumerate().take(last + 1).skip(first) {
                    *out += gain * pulse.at(n as f64 / fs - arrival);
                }
            }
        });
    RfFrame::new(samples, xs.len(), fs, f0, c)
}

/// Target SNR and generator seed for additive channel noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub target_snr_db: f64,
    pub seed: u64,
}

/// Noise level actually injected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseReport {
    pub signal_power: f64,
    pub sigma: f64,
    pub noise_power: f64,
    pub realized_snr_db: f64,
}

/// Signal power: mean square over samples above 1% of the frame's peak magnitude.
pub fn signal_power(frame: &RfFrame) -> f64 {
    let peak = frame.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = 0.01 * peak;
    let (sum, n) = frame
        .samples()
        .iter()
        .filter(|v| v.abs() > threshold)
        .fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Adds white Gaussian noise with `sigma^2 = P_signal / 10^(snr/10)`.
///
/// Targets of 300 dB and above return the frame unchanged.
pub fn add_noise(frame: &RfFrame, spec: &NoiseSpec) -> Result<(RfFrame, NoiseReport)> {
    let p_signal = signal_power(frame);
    if !(p_signal > 0.0) {
        return Err(Error::ZeroSignal);
    }
    if spec.target_snr_db >= 300.0 {
        return Ok((
            frame.clone(),
            NoiseReport {
                signal_power: p_signal,
                sigma: 0.0,
                noise_power: 0.0,
                realized_snr_db: f64::INFINITY,
            },
        ));
    }
    if !spec.target_snr_db.is_finite() {
        return Err(Error::Frame(format!(
            "invalid target SNR {}",
            spec.target_snr_db
        )));
    }
    let sigma = (p_signal / 10f64.powf(spec.target_snr_db / 10.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noise_energy = 0.0;
    let noisy: Vec<f64> = frame
        .samples()
        .iter()
        .map(|&v| {
            let n: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
            noise_energy += n * n;
            v + n
        })
        .collect();
    let noise_power = noise_energy / noisy.len() as f64;
    let report = NoiseReport {
        signal_power: p_signal,
        sigma,
        noise_power,
        realized_snr_db: 10.0 * (p_signal / noise_power).log10(),
    };
    Ok((frame.with_samples(noisy)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 100e6;
    const F0: f64 = 3e6;

    fn geometry(m: usize) -> ArrayGeometry {
        ArrayGeometry::new(m, 0.3e-3, 1540.0).unwrap()
    }

    fn point(x: f64, z: f64, amplitude: f64) -> Phantom {
        Phantom::new(
            PhantomLabel::Custom,
            Bounds {
                x_min: -10e-3,
                x_max: 10e-3,
                z_min: 1e-3,
                z_max: 70e-3,
            },
            vec![Scatterer { x, z, amplitude }],
        )
        .unwrap()
    }

    #[test]
    fn wire_phantom_layout() {
        let p = make_wire_phantom();
        assert_eq!(p.label, PhantomLabel::Wires);
        assert!(p.scatterers.iter().any(|s| (s.z - 35e-3).abs() < 1e-12));
        let mut depths: Vec<f64> = p.scatterers.iter().map(|s| (s.z * 1e3).round()).collect();
        depths.dedup();
        assert_eq!(depths, vec![32.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0, 63.0]);
        assert_eq!(p.scatterers.len(), 14);
    }

    #[test]
    fn cyst_phantom_is_anechoic_inside_discs() {
        let p = make_cyst_phantom();
        assert_eq!(p.cysts.len(), 10);
        let mut radii: Vec<f64> = p.cysts.iter().map(|d| d.radius).collect();
        radii.dedup();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        assert_eq!(radii, vec![2.5e-3, 4e-3]);
        let mut inside = 0;
        for s in &p.scatterers {
            if p.cysts.iter().any(|d| d.contains(s.x, s.z)) {
                assert_eq!(s.amplitude, 0.0);
                inside += 1;
            }
        }
        assert!(inside > 100);
    }

    #[test]
    fn tumor_phantom_has_wire_and_bright_region() {
        let p = make_tumor_phantom();
        assert_eq!(p.label, PhantomLabel::TumorWire);
        assert!(p.scatterers.iter().any(|s| s.amplitude == 20.0));
        assert!(p
            .scatterers
            .iter()
            .any(|s| s.amplitude.abs() > 1.0 && s.amplitude != 20.0));
    }

    #[test]
    fn rejects_empty_and_out_of_box() {
        let b = Bounds {
            x_min: -1e-3,
            x_max: 1e-3,
            z_min: 1e-3,
            z_max: 2e-3,
        };
        assert!(Phantom::new(
            PhantomLabel::Custom,
            b,
            vec![Scatterer {
                x: 5e-3,
                z: 1.5e-3,
                amplitude: 1.0
            }]
        )
        .is_err());
        let empty = Phantom::new(PhantomLabel::Custom, b, vec![]).unwrap();
        assert!(
            synthesize_rf(&empty, &geometry(4), &PulseModel::impulse_response(F0), FS).is_err()
        );
    }

    #[test]
    fn on_axis_echo_arrives_at_round_trip_time() {
        // two elements at +-0.15 mm; scatterer right below element 0
        let g = ArrayGeometry::new(2, 0.3e-3, 1540.0).unwrap();
        let x0 = g.element_x()[0];
        let z = 30e-3;
        let frame = synthesize_rf(
            &point(x0, z, 1.0),
            &g,
            &PulseModel::impulse_response(F0),
            FS,
        )
        .unwrap();
        let env = crate::dsp::envelope(frame.channel(0)).unwrap();
        let peak = env
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let expected = FS * 2.0 * z / 1540.0;
        assert!(
            (peak as f64 - expected).abs() <= 2.0,
            "peak {peak}, expected {expected}"
        );
    }

    #[test]
    fn zero_amplitude_and_superposition() {
        let g = geometry(8);
        let pulse = PulseModel::impulse_response(F0);
        let one = point(1e-3, 20e-3, 1.0);
        let base = synthesize_rf(&one, &g, &pulse, FS).unwrap();

        let mut with_zero = one.clone();
        with_zero.scatterers.push(Scatterer {
            x: -2e-3,
            z: 15e-3,
            amplitude: 0.0,
        });
        assert_eq!(synthesize_rf(&with_zero, &g, &pulse, FS).unwrap(), base);

        let mut doubled = one.clone();
        doubled.scatterers.push(one.scatterers[0]);
        let two = synthesize_rf(&doubled, &g, &pulse, FS).unwrap();
        for (a, b) in base.samples().iter().zip(two.samples()) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn mirrored_phantom_reverses_channels() {
        let g = geometry(9);
        let pulse = PulseModel::impulse_response(F0);
        let mut p = point(2e-3, 20e-3, 1.0);
        p.scatterers.push(Scatterer {
            x: -0.7e-3,
            z: 25e-3,
            amplitude: -0.4,
        });
        let a = synthesize_rf(&p, &g, &pulse, FS).unwrap();
        let b = synthesize_rf(&p.mirrored(), &g, &pulse, FS).unwrap();
        assert_eq!(a.sample_count(), b.sample_count());
        for i in 0..9 {
            for (u, v) in a.channel(i).iter().zip(b.channel(8 - i)) {
                assert!((u - v).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn noise_limits_and_determinism() {
        let g = geometry(4);
        let frame = synthesize_rf(
            &point(0.0, 10e-3, 1.0),
            &g,
            &PulseModel::impulse_response(F0),
            FS,
        )
        .unwrap();
        let (same, rep) = add_noise(
            &frame,
            &NoiseSpec {
                target_snr_db: 300.0,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(same, frame);
        assert_eq!(rep.sigma, 0.0);
        let spec = NoiseSpec {
            target_snr_db: 10.0,
            seed: 42,
        };
        let (a, _) = add_noise(&frame, &spec).unwrap();
        let (b, _) = add_noise(&frame, &spec).unwrap();
        assert_eq!(a, b);
        let (c, _) = add_noise(&frame, &NoiseSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a, c);
        let zero = RfFrame::zeros(4, 100, FS, F0, 1540.0).unwrap();
        assert_eq!(add_noise(&zero, &spec).unwrap_err(), Error::ZeroSignal);
    }

    #[test]
    fn zero_db_noise_matches_signal_power() {
        let g = geometry(8);
        let frame = synthesize_rf(
            &make_wire_phantom(),
            &g,
            &PulseModel::impulse_response(F0),
            FS,
        )
        .unwrap();
        let p_signal = signal_power(&frame);
        for seed in 0..10 {
            let (noisy, _) = add_noise(
                &frame,
                &NoiseSpec {
                    target_snr_db: 0.0,
                    seed,
                },
            )
            .unwrap();
            let p_noise = noisy
                .samples()
                .iter()
                .zip(frame.samples())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / frame.samples().len() as f64;
            assert!(
                (p_noise / p_signal - 1.0).abs() <= 0.05,
                "ratio {}",
                p_noise / p_signal
            );
        }
    }
}
