//! Flat `key = value` run configuration.
//!
//! Lengths are given in millimetres and frequencies in megahertz. Values are
//! applied in order: defaults, config file, then command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use sonobeam::bmode::default_filter;
use sonobeam::dsp::FilterSpec;
use sonobeam::sim::{self, Phantom, PulseModel};
use sonobeam::{ArrayGeometry, BeamformerKind, ImageGrid};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    Wires,
    Cysts,
    Tumor,
}

impl PhantomKind {
    pub fn build(self) -> Phantom {
        match self {
            PhantomKind::Wires => sim::make_wire_phantom(),
            PhantomKind::Cysts => sim::make_cyst_phantom(),
            PhantomKind::Tumor => sim::make_tumor_phantom(),
        }
    }
}

/// Image lattice in metres. `nz = None` samples each line at `fs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub nz: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub phantom: PhantomKind,
    pub elements: usize,
    pub pitch: f64,
    pub f0: f64,
    pub cycles: u32,
    pub fs: f64,
    pub sound_speed: f64,
    /// `None` leaves the frame noise-free.
    pub snr_db: Option<f64>,
    pub seed: u64,
    pub grid: GridConfig,
    pub algo: BeamformerKind,
    pub filter_center: Option<f64>,
    pub filter_half_bandwidth: Option<f64>,
    pub filter_taps: Option<usize>,
    pub dynamic_range: f64,
    pub rf_path: Option<PathBuf>,
    pub image_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            phantom: PhantomKind::Wires,
            elements: 128,
            pitch: 0.3e-3,
            f0: 3e6,
            cycles: 2,
            fs: 100e6,
            sound_speed: 1540.0,
            snr_db: Some(50.0),
            seed: 7,
            grid: GridConfig {
                x_min: -10e-3,
                x_max: 10e-3,
                nx: 201,
                z_min: 25e-3,
                z_max: 70e-3,
                nz: None,
            },
            algo: BeamformerKind::DmasFast,
            filter_center: None,
            filter_half_bandwidth: None,
            filter_taps: None,
            dynamic_range: 70.0,
            rf_path: None,
            image_path: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "phantom",
    "elements",
    "pitch_mm",
    "f0_mhz",
    "cycles",
    "fs_mhz",
    "sound_speed",
    "snr_db",
    "seed",
    "x_min_mm",
    "x_max_mm",
    "nx",
    "z_min_mm",
    "z_max_mm",
    "nz",
    "algo",
    "filter_center_mhz",
    "filter_half_bandwidth_mhz",
    "filter_taps",
    "dynamic_range_db",
    "rf_path",
    "image_path",
];

fn bad(key: &str, value: &str, why: &str) -> CliError {
    CliError::Config(format!("{key} = {value:?}: {why}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value.parse().map_err(|_| bad(key, value, "not a number"))
}

/// Splits `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!(
                "line {}: expected key = value, got {line:?}",
                n + 1
            ))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses a single `key=value` override.
pub fn parse_override(arg: &str) -> CliResult<(String, String)> {
    let (k, v) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override {arg:?} is not key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        let mut cfg = Self::default();
        cfg.apply_all(parse_pairs(&text)?)?;
        Ok(cfg)
    }

    pub fn apply_all<I, K, V>(&mut self, pairs: I) -> CliResult<()>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (k, v) in pairs {
            self.apply(k.as_ref(), v.as_ref())?;
        }
        Ok(())
    }

    pub fn apply(&mut self, key: &str, value: &str) -> CliResult<()> {
        let mm = |v: &str| num::<f64>(key, v).map(|x| x * 1e-3);
        let mhz = |v: &str| num::<f64>(key, v).map(|x| x * 1e6);
        match key {
            "phantom" => {
                self.phantom = match value {
                    "wires" => PhantomKind::Wires,
                    "cysts" => PhantomKind::Cysts,
                    "tumor" => PhantomKind::Tumor,
                    _ => return Err(bad(key, value, "expected wires, cysts or tumor")),
                }
            }
            "elements" => self.elements = num(key, value)?,
            "pitch_mm" => self.pitch = mm(value)?,
            "f0_mhz" => self.f0 = mhz(value)?,
            "cycles" => self.cycles = num(key, value)?,
            "fs_mhz" => self.fs = mhz(value)?,
            "sound_speed" => self.sound_speed = num(key, value)?,
            "snr_db" => {
                self.snr_db = match value {
                    "off" | "none" => None,
                    v => Some(num(key, v)?),
                }
            }
            "seed" => self.seed = num(key, value)?,
            "x_min_mm" => self.grid.x_min = mm(value)?,
            "x_max_mm" => self.grid.x_max = mm(value)?,
            "nx" => self.grid.nx = num(key, value)?,
            "z_min_mm" => self.grid.z_min = mm(value)?,
            "z_max_mm" => self.grid.z_max = mm(value)?,
            "nz" => {
                self.grid.nz = match value {
                    "auto" => None,
                    v => Some(num(key, v)?),
                }
            }
            "algo" => self.algo = value.parse().map_err(|e: String| bad(key, value, &e))?,
            "filter_center_mhz" => self.filter_center = Some(mhz(value)?),
            "filter_half_bandwidth_mhz" => self.filter_half_bandwidth = Some(mhz(value)?),
            "filter_taps" => self.filter_taps = Some(num(key, value)?),
            "dynamic_range_db" => self.dynamic_range = num(key, value)?,
            "rf_path" => self.rf_path = Some(PathBuf::from(value)),
            "image_path" => self.image_path = Some(PathBuf::from(value)),
            _ => {
                return Err(CliError::Config(format!(
                    "unknown key {key:?}; known keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> CliResult<ArrayGeometry> {
        ArrayGeometry::new(self.elements, self.pitch, self.sound_speed)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn image_grid(&self) -> CliResult<ImageGrid> {
        let g = &self.grid;
        match g.nz {
            Some(nz) => ImageGrid::new(g.x_min, g.x_max, g.nx, g.z_min, g.z_max, nz),
            None => ImageGrid::with_axial_sampling(
                g.x_min,
                g.x_max,
                g.nx,
                g.z_min,
                g.z_max,
                self.fs,
                self.sound_speed,
            ),
        }
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn impulse_response(&self) -> PulseModel {
        PulseModel {
            cycles: self.cycles,
            ..PulseModel::impulse_response(self.f0)
        }
    }

    /// Post-beamforming band for `kind` at transmit frequency `f0`, with any
    /// configured overrides applied.
    pub fn filter_for(&self, kind: BeamformerKind, f0: f64) -> FilterSpec {
        let mut spec = default_filter(kind, f0);
        if let Some(c) = self.filter_center {
            spec.center = c;
        }
        if let Some(h) = self.filter_half_bandwidth {
            spec.half_bandwidth = h;
        }
        if let Some(t) = self.filter_taps {
            spec.taps = t;
        }
        spec
    }

    /// Checks every physical value before any computation starts.
    pub fn validate(&self) -> CliResult<()> {
        let positive = [
            ("pitch_mm", self.pitch * 1e3),
            ("f0_mhz", self.f0 * 1e-6),
            ("fs_mhz", self.fs * 1e-6),
            ("sound_speed", self.sound_speed),
            ("dynamic_range_db", self.dynamic_range),
        ];
        for (k, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!("{k} must be positive, got {v}")));
            }
        }
        if self.elements == 0 || self.elements > u16::MAX as usize {
            return Err(CliError::Config(format!(
                "elements must lie in 1..=65535, got {}",
                self.elements
            )));
        }
        if self.cycles == 0 {
            return Err(CliError::Config("cycles must be at least 1".into()));
        }
        if self.fs <= 2.0 * self.f0 {
            return Err(CliError::Config(format!(
                "fs_mhz = {} does not exceed twice f0_mhz = {}",
                self.fs * 1e-6,
                self.f0 * 1e-6
            )));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(CliError::Config(format!(
                    "snr_db must be finite, got {snr}"
                )));
            }
        }
        self.geometry()?;
        let grid = self.image_grid()?;
        if grid.nx > u16::MAX as usize {
            return Err(CliError::Config(format!("nx = {} exceeds 65535", grid.nx)));
        }
        let line_rate = grid.axial_sample_rate(self.sound_speed).ok_or_else(|| {
            CliError::Config("grid needs at least two rows for envelope detection".into())
        })?;
        self.filter_for(self.algo, self.f0)
            .validate(line_rate)
            .map_err(|e| {
                CliError::Config(format!("{e} (axial line rate {:.3} MHz)", line_rate * 1e-6))
            })?;
        Ok(())
    }
}
