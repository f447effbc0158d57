//! Image-quality metrics.
//!
//! SNR and CR are evaluated on the envelope before log compression. FWHM and
//! sidelobe level work on normalized lateral profiles in dB.

use crate::geometry::ImageGrid;
use crate::image::{DbImage, EnvelopeImage};
use crate::{Error, Result};

/// Half-amplitude threshold of an envelope, `20 log10(0.5)`.
pub const HALF_MAX_DB: f64 = -6.020599913279624;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionShape {
    Rect { half_x: f64, half_z: f64 },
    Disc { radius: f64 },
}

/// Region of interest centred at `(x, z)` (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec {
    pub shape: RegionShape,
    pub x: f64,
    pub z: f64,
}

impl RegionSpec {
    pub fn rect(x: f64, z: f64, half_x: f64, half_z: f64) -> Self {
        Self {
            shape: RegionShape::Rect { half_x, half_z },
            x,
            z,
        }
    }

    pub fn disc(x: f64, z: f64, radius: f64) -> Self {
        Self {
            shape: RegionShape::Disc { radius },
            x,
            z,
        }
    }

    fn half_extents(&self) -> (f64, f64) {
        match self.shape {
            RegionShape::Rect { half_x, half_z } => (half_x, half_z),
            RegionShape::Disc { radius } => (radius, radius),
        }
    }

    fn contains(&self, x: f64, z: f64) -> bool {
        // grid coordinates carry rounding error; keep boundary pixels
        const EPS: f64 = 1e-12;
        let (dx, dz) = (x - self.x, z - self.z);
        match self.shape {
            RegionShape::Rect { half_x, half_z } => {
                dx.abs() <= half_x + EPS && dz.abs() <= half_z + EPS
            }
            RegionShape::Disc { radius } => (dx * dx + dz * dz).sqrt() <= radius + EPS,
        }
    }

    /// `(ix, iz)` of every pixel inside the region. The region must lie
    /// entirely inside the grid.
    pub fn pixels(&self, grid: &ImageGrid) -> Result<Vec<(usize, usize)>> {
        let (hx, hz) = self.half_extents();
        if !(hx >= 0.0 && hz >= 0.0) {
            return Err(Error::Region("negative region extent".into()));
        }
        let tol = 1e-9;
        if self.x - hx < grid.x_min - tol
            || self.x + hx > grid.x_max + tol
            || self.z - hz < grid.z_min - tol
            || self.z + hz > grid.z_max + tol
        {
            return Err(Error::Region(format!(
                "region at ({:.4}, {:.4}) mm with half extents ({:.4}, {:.4}) mm leaves the grid",
                self.x * 1e3,
                self.z * 1e3,
                hx * 1e3,
                hz * 1e3
            )));
        }
        let mut out = Vec::new();
        for ix in 0..grid.nx {
            let x = grid.x(ix);
            if (x - self.x).abs() > hx + 1e-12 {
                continue;
            }
            for iz in 0..grid.nz {
                if self.contains(x, grid.z(iz)) {
                    out.push((ix, iz));
                }
            }
        }
        if out.is_empty() {
            return Err(Error::Region("region contains no pixel".into()));
        }
        Ok(out)
    }

    pub fn values(&self, image: &EnvelopeImage) -> Result<Vec<f64>> {
        Ok(self
            .pixels(image.grid())?
            .into_iter()
            .map(|(ix, iz)| image.at(ix, iz))
            .collect())
    }
}

/// `20 log10((max - min) / std)` over the region.
pub fn snr_region(image: &EnvelopeImage, region: &RegionSpec) -> Result<f64> {
    let v = region.values(image)?;
    if v.len() < 2 {
        return Err(Error::Region("SNR needs at least two pixels".into()));
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    if !(std > 0.0) {
        return Err(Error::Region("region has zero variance".into()));
    }
    let (min, max) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    Ok(20.0 * ((max - min) / std).log10())
}

/// `20 log10(mean_cyst / mean_background)`; `-inf` for a perfectly dark cyst.
pub fn cr(image: &EnvelopeImage, cyst: &RegionSpec, background: &RegionSpec) -> Result<f64> {
    let mean = |r: &RegionSpec| -> Result<f64> {
        let v = r.values(image)?;
        Ok(v.iter().sum::<f64>() / v.len() as f64)
    };
    let mu_cyst = mean(cyst)?;
    let mu_bck = mean(background)?;
    if !(mu_bck > 0.0) {
        return Err(Error::Region("background mean is not positive".into()));
    }
    if mu_cyst == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(20.0 * (mu_cyst / mu_bck).log10())
}

/// One image row, renormalized so its own maximum is 0 dB.
#[derive(Debug, Clone, PartialEq)]
pub struct LateralProfile {
    /// Depth of the extracted row (m).
    pub depth: f64,
    pub requested_depth: f64,
    pub row: usize,
    pub x: Vec<f64>,
    pub value_db: Vec<f64>,
}

impl LateralProfile {
    pub fn new(depth: f64, x: Vec<f64>, value_db: Vec<f64>) -> Result<Self> {
        if x.len() != value_db.len() || x.is_empty() {
            return Err(Error::Profile(
                "positions and values differ in length or are empty".into(),
            ));
        }
        let mut p = Self {
            depth,
            requested_depth: depth,
            row: 0,
            x,
            value_db,
        };
        p.renormalize();
        Ok(p)
    }

    /// Distance between the requested and the extracted depth.
    pub fn depth_offset(&self) -> f64 {
        (self.depth - self.requested_depth).abs()
    }

    fn renormalize(&mut self) {
        let max = self
            .value_db
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if max.is_finite() && max != 0.0 {
            self.value_db.iter_mut().for_each(|v| *v -= max);
        }
    }

    /// Sub-profile over `[x_lo, x_hi]`, renormalized.
    pub fn window(&self, x_lo: f64, x_hi: f64) -> Result<Self> {
        let (x, v): (Vec<f64>, Vec<f64>) = self
            .x
            .iter()
            .zip(&self.value_db)
            .filter(|(x, _)| (x_lo..=x_hi).contains(*x))
            .map(|(x, v)| (*x, *v))
            .unzip();
        if x.len() < 3 {
            return Err(Error::Profile(
                "window holds fewer than three samples".into(),
            ));
        }
        let mut p = Self {
            x,
            value_db: v,
            ..self.clone()
        };
        p.renormalize();
        Ok(p)
    }

    /// Linear amplitude relative to the peak.
    pub fn amplitude(&self) -> Vec<f64> {
        self.value_db.iter().map(|v| 10f64.powf(v / 20.0)).collect()
    }
}

/// Row of `image` nearest to `depth`.
pub fn lateral_profile(image: &DbImage, depth: f64) -> Result<LateralProfile> {
    let grid = image.grid();
    let row = grid.nearest_row(depth).ok_or_else(|| {
        Error::Profile(format!(
            "depth {:.4} mm outside grid [{:.4}, {:.4}] mm",
            depth * 1e3,
            grid.z_min * 1e3,
            grid.z_max * 1e3
        ))
    })?;
    let mut p = LateralProfile::new(
        grid.z(row),
        (0..grid.nx).map(|ix| grid.x(ix)).collect(),
        image.row(row),
    )?;
    p.requested_depth = depth;
    p.row = row;
    Ok(p)
}

/// Depth of the brightest pixel in the column nearest `x`, searched over
/// `depth +- half_search`. Locates a point target before taking its profile.
pub fn target_depth(image: &EnvelopeImage, x: f64, depth: f64, half_search: f64) -> Result<f64> {
    let grid = image.grid();
    let outside = || {
        Error::Profile(format!(
            "target at ({:.3}, {:.3}) mm outside grid",
            x * 1e3,
            depth * 1e3
        ))
    };
    let ix = grid.nearest_column(x).ok_or_else(outside)?;
    let r0 = grid.nearest_row(depth - half_search).ok_or_else(outside)?;
    let r1 = grid.nearest_row(depth + half_search).ok_or_else(outside)?;
    let line = image.line(ix);
    let best = (r0..=r1).fold(r0, |b, iz| if line[iz] > line[b] { iz } else { b });
    Ok(grid.z(best))
}

fn peak_index(v: &[f64]) -> Result<usize> {
    let p = v
        .iter()
        .enumerate()
        .fold(0, |best, (k, &x)| if x > v[best] { k } else { best });
    if p == 0 || p == v.len() - 1 {
        return Err(Error::Profile(
            "peak on the profile boundary, mainlobe truncated".into(),
        ));
    }
    Ok(p)
}

/// Width between the `threshold` crossings nearest the peak, linearly
/// interpolated between samples.
fn width_at(x: &[f64], v: &[f64], threshold: f64) -> Result<f64> {
    let p = peak_index(v)?;
    let cross = |a: usize, b: usize| x[a] + (threshold - v[a]) / (v[b] - v[a]) * (x[b] - x[a]);
    let left = (0..p)
        .rev()
        .find(|&k| v[k] < threshold)
        .map(|k| cross(k, k + 1))
        .ok_or_else(|| Error::Profile("no half-maximum crossing left of the peak".into()))?;
    let right = (p + 1..v.len())
        .find(|&k| v[k] < threshold)
        .map(|k| cross(k - 1, k))
        .ok_or_else(|| Error::Profile("no half-maximum crossing right of the peak".into()))?;
    Ok(right - left)
}

/// Full width at half maximum (m), interpolating in the dB domain.
pub fn fwhm(profile: &LateralProfile) -> Result<f64> {
    width_at(&profile.x, &profile.value_db, HALF_MAX_DB)
}

/// Full width at half maximum of a linear-amplitude profile.
pub fn fwhm_linear(x: &[f64], amplitude: &[f64]) -> Result<f64> {
    if x.len() != amplitude.len() {
        return Err(Error::Profile(
            "positions and values differ in length".into(),
        ));
    }
    let max = amplitude.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    width_at(x, amplitude, 0.5 * max)
}

/// Highest level outside the mainlobe (dB relative to the peak).
///
/// The mainlobe ends at the first local minimum on each side of the peak,
/// located on a 3-sample moving average of the profile and searched outward
/// from the half-maximum crossings.
pub fn sidelobe_level(profile: &LateralProfile) -> Result<f64> {
    fwhm(profile)?;
    let v = &profile.value_db;
    let n = v.len();
    let smooth: Vec<f64> = (0..n)
        .map(|k| {
            let lo = k.saturating_sub(1);
            let hi = (k + 1).min(n - 1);
            v[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let p = peak_index(v)?;
    // descend from the half-maximum points so ripple on the peak is not taken for a minimum
    let mut left = (0..p).rev().find(|&k| v[k] < HALF_MAX_DB).unwrap_or(0);
    while left > 0 && smooth[left - 1] < smooth[left] {
        left -= 1;
    }
    let mut right = (p + 1..n).find(|&k| v[k] < HALF_MAX_DB).unwrap_or(n - 1);
    while right < n - 1 && smooth[right + 1] < smooth[right] {
        right += 1;
    }
    let outside = v[..left].iter().chain(&v[right + 1..]);
    let level = outside.copied().fold(f64::NEG_INFINITY, f64::max);
    if level == f64::NEG_INFINITY {
        return Err(Error::Profile("no sidelobe outside the mainlobe".into()));
    }
    Ok(level)
}
