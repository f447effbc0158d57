//! Command implementations. The `*_frame`, `render_pgm`, `profile_csv` and
//! `metrics_report` functions work in memory; the file-level wrappers add
//! reading and atomic writing.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sonobeam::bmode::envelope_image;
use sonobeam::metrics::{self, RegionSpec};
use sonobeam::sim::{add_noise, synthesize_rf, NoiseReport, NoiseSpec};
use sonobeam::{compute_delays, ArrayGeometry, BeamformerKind, EnvelopeImage, OpCount, RfFrame};

use crate::config::RunConfig;
use crate::container::{self, RfHeader};
use crate::{CliError, CliResult};

/// Floor used when metrics and profiles need a dB image; deep enough that no
/// realistic sidelobe is clipped.
pub const ANALYSIS_FLOOR_DB: f64 = 300.0;

/// Axial search half-range (m) when locating a point target's peak row.
pub const TARGET_SEARCH: f64 = 1e-3;

pub struct SimulateSummary {
    pub elements: usize,
    pub samples: usize,
    pub noise: Option<NoiseReport>,
}

impl std::fmt::Display for SimulateSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "elements {} samples {}", self.elements, self.samples)?;
        match &self.noise {
            Some(n) => write!(f, " realized_snr_db {:.3}", n.realized_snr_db),
            None => write!(f, " realized_snr_db inf"),
        }
    }
}

/// Synthesizes the configured phantom and adds the configured noise.
pub fn simulate_frame(cfg: &RunConfig) -> CliResult<(RfFrame, Option<NoiseReport>)> {
    cfg.validate()?;
    let geometry = cfg.geometry()?;
    let clean = synthesize_rf(
        &cfg.phantom.build(),
        &geometry,
        &cfg.impulse_response(),
        cfg.fs,
    )?;
    match cfg.snr_db {
        None => Ok((clean, None)),
        Some(snr) => {
            let (noisy, report) = add_noise(
                &clean,
                &NoiseSpec {
                    target_snr_db: snr,
                    seed: cfg.seed,
                },
            )?;
            Ok((noisy, Some(report)))
        }
    }
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> CliResult<SimulateSummary> {
    let (frame, noise) = simulate_frame(cfg)?;
    container::write_rf(out, &frame, cfg.pitch)?;
    Ok(SimulateSummary {
        elements: frame.element_count(),
        samples: frame.sample_count(),
        noise,
    })
}

pub struct BeamformSummary {
    pub kind: BeamformerKind,
    pub elements: usize,
    pub pixels: usize,
    pub per_pixel: OpCount,
}

impl BeamformSummary {
    pub fn report(&self) -> String {
        let p = &self.per_pixel;
        let n = self.pixels as u64;
        format!(
            "algorithm,{}\nelements,{}\npixels,{}\nper_pixel_additions,{}\nper_pixel_multiplies,{}\n\
             per_pixel_special_ops,{}\nper_pixel_total,{}\nframe_total,{}\n",
            self.kind,
            self.elements,
            self.pixels,
            p.additions,
            p.multiplies,
            p.special_ops,
            p.total,
            p.total * n
        )
    }
}

/// Reconstructs the envelope image of `frame` on the configured grid with
/// `cfg.algo`. The aperture comes from the frame and `pitch`.
pub fn beamform_frame(
    cfg: &RunConfig,
    frame: &RfFrame,
    pitch: f64,
) -> CliResult<(EnvelopeImage, BeamformSummary)> {
    let kind = cfg.algo;
    kind.check_elements(frame.element_count())?;
    let geometry = ArrayGeometry::new(frame.element_count(), pitch, frame.sound_speed())?;
    let grid = cfg.image_grid()?;
    let delays = compute_delays(&geometry, &grid, frame.fs())?;
    let filter = cfg.filter_for(kind, frame.f0());
    let (env, ops) = envelope_image(frame, &delays, kind, Some(&filter))?;
    let summary = BeamformSummary {
        kind,
        elements: frame.element_count(),
        pixels: grid.pixel_count(),
        per_pixel: ops,
    };
    Ok((env, summary))
}

pub fn beamform(
    cfg: &RunConfig,
    rf: &Path,
    out: &Path,
    report: &Path,
) -> CliResult<BeamformSummary> {
    cfg.validate()?;
    let (header, frame): (RfHeader, RfFrame) = container::read_rf(rf)?;
    let (env, summary) = beamform_frame(cfg, &frame, header.pitch)?;
    container::write_image(out, &env)?;
    container::write_atomic(report, summary.report().as_bytes())?;
    Ok(summary)
}

/// Gray level of a dB value: `0 dB -> 255`, `-dynamic_range -> 0`.
pub fn gray_level(v_db: f64, dynamic_range: f64) -> u8 {
    (255.0 * (v_db + dynamic_range) / dynamic_range)
        .round()
        .clamp(0.0, 255.0) as u8
}

/// Binary portable graymap, one image row per depth.
pub fn render_pgm(image: &EnvelopeImage, dynamic_range: f64) -> CliResult<Vec<u8>> {
    if !(dynamic_range.is_finite() && dynamic_range > 0.0) {
        return Err(CliError::Usage(format!(
            "dynamic range must be positive, got {dynamic_range}"
        )));
    }
    let db = image.to_db(dynamic_range)?;
    let g = db.grid();
    let mut out = format!("P5\n{} {}\n255\n", g.nx, g.nz).into_bytes();
    out.reserve(g.pixel_count());
    for iz in 0..g.nz {
        out.extend((0..g.nx).map(|ix| gray_level(db.at(ix, iz), dynamic_range)));
    }
    Ok(out)
}

pub fn render(image: &Path, dynamic_range: f64, out: &Path) -> CliResult<()> {
    let img = container::read_image(image)?;
    container::write_atomic(out, &render_pgm(&img, dynamic_range)?)
}

/// `x_mm,value_db` rows of the lateral profile nearest `depth` (m).
pub fn profile_csv(image: &EnvelopeImage, depth: f64, dynamic_range: f64) -> CliResult<String> {
    let p = metrics::lateral_profile(&image.to_db(dynamic_range)?, depth)?;
    let mut out = String::from("x_mm,value_db\n");
    for (x, v) in p.x.iter().zip(&p.value_db) {
        let x_mm = (x * 1e9).round() / 1e6;
        writeln!(out, "{x_mm},{v}").unwrap();
    }
    Ok(out)
}

pub fn profile(image: &Path, depth: f64, dynamic_range: f64) -> CliResult<String> {
    profile_csv(&container::read_image(image)?, depth, dynamic_range)
}

/// One line of a regions file. Positions are in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricRequest {
    Snr(RegionSpec),
    Cr {
        cyst: RegionSpec,
        background: RegionSpec,
    },
    /// Point target near `(x, z)`, profile restricted to `[x_lo, x_hi]`.
    Fwhm {
        x: f64,
        z: f64,
        x_lo: f64,
        x_hi: f64,
    },
    Sidelobe {
        x: f64,
        z: f64,
        x_lo: f64,
        x_hi: f64,
    },
}

impl MetricRequest {
    fn depth(&self) -> f64 {
        match self {
            MetricRequest::Snr(r) => r.z,
            MetricRequest::Cr { cyst, .. } => cyst.z,
            MetricRequest::Fwhm { z, .. } | MetricRequest::Sidelobe { z, .. } => *z,
        }
    }
}

fn region_bad(n: usize, why: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("regions line {n}: {why}"))
}

fn take_mm(words: &mut std::slice::Iter<'_, &str>, n: usize, what: &str) -> CliResult<f64> {
    let w = words
        .next()
        .ok_or_else(|| region_bad(n, format!("missing {what}")))?;
    w.parse::<f64>()
        .map(|v| v * 1e-3)
        .map_err(|_| region_bad(n, format!("{what} {w:?} is not a number")))
}

fn take_region(words: &mut std::slice::Iter<'_, &str>, n: usize) -> CliResult<RegionSpec> {
    match words.next().copied() {
        Some("rect") => {
            let x = take_mm(words, n, "x")?;
            let z = take_mm(words, n, "z")?;
            let hx = take_mm(words, n, "half width")?;
            let hz = take_mm(words, n, "half height")?;
            Ok(RegionSpec::rect(x, z, hx, hz))
        }
        Some("disc") => {
            let x = take_mm(words, n, "x")?;
            let z = take_mm(words, n, "z")?;
            let r = take_mm(words, n, "radius")?;
            Ok(RegionSpec::disc(x, z, r))
        }
        other => Err(region_bad(
            n,
            format!("expected rect or disc, got {other:?}"),
        )),
    }
}

/// Parses a regions file. Lengths are in millimetres, `#` starts a comment:
///
/// ```text
/// snr rect <x> <z> <half_x> <half_z>
/// snr disc <x> <z> <r>
/// cr <cyst region> <background region>
/// fwhm <x> <z> <x_lo> <x_hi>
/// sidelobe <x> <z> <x_lo> <x_hi>
/// ```
pub fn parse_regions(text: &str) -> CliResult<Vec<MetricRequest>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let n = k + 1;
        let words: Vec<&str> = raw
            .split('#')
            .next()
            .unwrap_or("")
            .split_whitespace()
            .collect();
        let Some((&metric, rest)) = words.split_first() else {
            continue;
        };
        let mut it = rest.iter();
        let req = match metric {
            "snr" => MetricRequest::Snr(take_region(&mut it, n)?),
            "cr" => MetricRequest::Cr {
                cyst: take_region(&mut it, n)?,
                background: take_region(&mut it, n)?,
            },
            "fwhm" | "sidelobe" => {
                let x = take_mm(&mut it, n, "x")?;
                let z = take_mm(&mut it, n, "z")?;
                let x_lo = take_mm(&mut it, n, "x_lo")?;
                let x_hi = take_mm(&mut it, n, "x_hi")?;
                if metric == "fwhm" {
                    MetricRequest::Fwhm { x, z, x_lo, x_hi }
                } else {
                    MetricRequest::Sidelobe { x, z, x_lo, x_hi }
                }
            }
            other => return Err(region_bad(n, format!("unknown metric {other:?}"))),
        };
        if let Some(extra) = it.next() {
            return Err(region_bad(n, format!("unexpected trailing {extra:?}")));
        }
        out.push(req);
    }
    Ok(out)
}

/// Profile through the peak of the point target near `(x, z)`.
pub fn target_profile(
    image: &EnvelopeImage,
    db: &sonobeam::DbImage,
    x: f64,
    z: f64,
    x_lo: f64,
    x_hi: f64,
) -> CliResult<metrics::LateralProfile> {
    let depth = metrics::target_depth(image, x, z, TARGET_SEARCH)?;
    Ok(metrics::lateral_profile(db, depth)?.window(x_lo, x_hi)?)
}

/// Evaluates every request, one `depth_mm,metric,value` row each.
pub fn metrics_report(image: &EnvelopeImage, requests: &[MetricRequest]) -> CliResult<String> {
    let db = image.to_db(ANALYSIS_FLOOR_DB)?;
    let mut out = String::from("depth_mm,metric,value\n");
    for req in requests {
        let (name, value) = match *req {
            MetricRequest::Snr(r) => ("snr_db", metrics::snr_region(image, &r)?),
            MetricRequest::Cr { cyst, background } => {
                ("cr_db", metrics::cr(image, &cyst, &background)?)
            }
            MetricRequest::Fwhm { x, z, x_lo, x_hi } => (
                "fwhm_mm",
                metrics::fwhm(&target_profile(image, &db, x, z, x_lo, x_hi)?)? * 1e3,
            ),
            MetricRequest::Sidelobe { x, z, x_lo, x_hi } => (
                "sidelobe_db",
                metrics::sidelobe_level(&target_profile(image, &db, x, z, x_lo, x_hi)?)?,
            ),
        };
        // depth rounded to the micrometre so 12e-3 m prints as 12
        let depth_mm = (req.depth() * 1e6).round() / 1e3;
        writeln!(out, "{depth_mm},{name},{value}").unwrap();
    }
    Ok(out)
}

pub fn metrics(image: &Path, regions: &Path) -> CliResult<String> {
    let img = container::read_image(image)?;
    let text = fs::read_to_string(regions).map_err(CliError::io(regions))?;
    metrics_report(&img, &parse_regions(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sonobeam::ImageGrid;

    #[test]
    fn gray_levels() {
        assert_eq!(gray_level(0.0, 70.0), 255);
        assert_eq!(gray_level(-70.0, 70.0), 0);
        assert_eq!(gray_level(-35.0, 70.0), 128);
        assert_eq!(gray_level(-500.0, 70.0), 0);
    }

    #[test]
    fn pgm_layout() {
        let grid = ImageGrid::new(-1e-3, 1e-3, 3, 10e-3, 11e-3, 2).unwrap();
        // line-major: column 0 = [1, 0.1], column 1 = [0.5, 1e-9], column 2 = [0.01, 0.2]
        let img = EnvelopeImage::new(grid, vec![1.0, 0.1, 0.5, 1e-9, 0.01, 0.2]).unwrap();
        let pgm = render_pgm(&img, 40.0).unwrap();
        let head = b"P5\n3 2\n255\n";
        assert_eq!(&pgm[..head.len()], head);
        let px = &pgm[head.len()..];
        assert_eq!(px.len(), 6);
        assert_eq!(px[0], 255);
        assert_eq!(px[1], gray_level(20.0 * 0.5f64.log10(), 40.0));
        assert_eq!(px[2], 0);
        assert_eq!(px[3], gray_level(-20.0, 40.0));
        assert_eq!(px[4], 0);
        assert!(render_pgm(&img, 0.0).is_err());
    }

    #[test]
    fn regions_parse() {
        let text = "# comment\nsnr rect 1.5 35 2 2\ncr disc -5 10 3 disc 2.5 10 3 # tail\n\nfwhm 0 32 -6 6\nsidelobe 1.5 35 0 6\n";
        let r = parse_regions(text).unwrap();
        assert_eq!(r.len(), 4);
        assert!(matches!(r[0], MetricRequest::Snr(s) if (s.z - 35e-3).abs() < 1e-15));
        assert!(
            matches!(r[1], MetricRequest::Cr { background, .. } if (background.x - 2.5e-3).abs() < 1e-15)
        );
        for bad in [
            "snr ellipse 1 2 3",
            "cr disc 1 2 3",
            "fwhm 1 2 3",
            "psnr rect 1 1 1 1",
            "snr disc 1 2 3 4",
        ] {
            assert!(parse_regions(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn identical_regions_give_zero_cr() {
        let grid = ImageGrid::new(-2e-3, 2e-3, 41, 10e-3, 14e-3, 41).unwrap();
        let data = (0..grid.pixel_count())
            .map(|k| 1.0 + (k % 7) as f64)
            .collect();
        let img = EnvelopeImage::new(grid, data).unwrap();
        let r = RegionSpec::disc(0.0, 12e-3, 1e-3);
        let rep = metrics_report(
            &img,
            &[MetricRequest::Cr {
                cyst: r,
                background: r,
            }],
        )
        .unwrap();
        assert_eq!(rep, "depth_mm,metric,value\n12,cr_db,0\n");
    }
}
