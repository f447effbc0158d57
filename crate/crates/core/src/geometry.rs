//! Transducer layout, reconstruction grid and round-trip focusing delays.
//!
//! The delay law models the synthesized transmit as straight axial travel to
//! the pixel depth and the receive path as the exact pixel-to-element
//! distance:
//!
//! ```text
//! d[p][i] = fs * (z_p + sqrt((x_p - x_i)^2 + z_p^2)) / c
//! ```
//!
//! Delays are kept fractional; interpolation happens when samples are fetched.

use crate::{Error, Result};

/// Uniform linear array centred on `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pitch: f64,
    sound_speed: f64,
    element_x: Vec<f64>,
}

impl ArrayGeometry {
    pub fn new(element_count: usize, pitch: f64, sound_speed: f64) -> Result<Self> {
        if element_count < 2 {
            return Err(Error::Geometry(format!(
                "need at least 2 elements, got {element_count}"
            )));
        }
        if !(pitch.is_finite() && pitch > 0.0) {
            return Err(Error::Geometry(format!(
                "pitch must be positive, got {pitch}"
            )));
        }
        if !(sound_speed.is_finite() && sound_speed > 0.0) {
            return Err(Error::Geometry(format!(
                "sound speed must be positive, got {sound_speed}"
            )));
        }
        // (i - (M-1)/2) is an exact half-integer, so x[M-1-i] == -x[i] bit for bit.
        let centre = (element_count as f64 - 1.0) / 2.0;
        let element_x = (0..element_count)
            .map(|i| (i as f64 - centre) * pitch)
            .collect();
        Ok(Self {
            pitch,
            sound_speed,
            element_x,
        })
    }

    pub fn element_count(&self) -> usize {
        self.element_x.len()
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }

    pub fn element_x(&self) -> &[f64] {
        &self.element_x
    }

    /// Full aperture width, first to last element centre.
    pub fn aperture(&self) -> f64 {
        self.pitch * (self.element_count() - 1) as f64
    }
}

/// Rectangular pixel lattice. Pixel `(ix, iz)` sits at
/// `x_min + ix * dx`, `z_min + iz * dz`; a single-pixel axis collapses to its minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub nx: usize,
    pub nz: usize,
}

impl ImageGrid {
    pub fn new(
        x_min: f64,
        x_max: f64,
        nx: usize,
        z_min: f64,
        z_max: f64,
        nz: usize,
    ) -> Result<Self> {
        let grid = Self {
            x_min,
            x_max,
            z_min,
            z_max,
            nx,
            nz,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid whose axial spacing equals one RF sample of round-trip travel,
    /// `dz = c / (2 fs)`, so each image line is sampled at `fs`.
    pub fn with_axial_sampling(
        x_min: f64,
        x_max: f64,
        nx: usize,
        z_min: f64,
        z_max: f64,
        fs: f64,
        sound_speed: f64,
    ) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::SamplingFrequency(fs));
        }
        let dz = sound_speed / (2.0 * fs);
        if !(z_max > z_min) {
            return Err(Error::Grid(format!(
                "z_max {z_max} must exceed z_min {z_min}"
            )));
        }
        let nz = ((z_max - z_min) / dz).floor() as usize + 1;
        let z_max = z_min + (nz - 1) as f64 * dz;
        Self::new(x_min, x_max, nx, z_min, z_max, nz)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.z_min, self.z_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Grid("extents must be finite".into()));
        }
        if self.nx == 0 || self.nz == 0 {
            return Err(Error::Grid(format!(
                "pixel counts must be positive, got {}x{}",
                self.nx, self.nz
            )));
        }
        if self.z_min <= 0.0 {
            return Err(Error::Grid(format!(
                "z_min must lie below the array face (> 0), got {}",
                self.z_min
            )));
        }
        if self.x_max < self.x_min || self.z_max < self.z_min {
            return Err(Error::Grid("max extent below min extent".into()));
        }
        if (self.nx > 1 && self.x_max == self.x_min) || (self.nz > 1 && self.z_max == self.z_min) {
            return Err(Error::Grid("zero extent with more than one pixel".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        if self.nx > 1 {
            (self.x_max - self.x_min) / (self.nx - 1) as f64
        } else {
            0.0
        }
    }

    pub fn dz(&self) -> f64 {
        if self.nz > 1 {
            (self.z_max - self.z_min) / (self.nz - 1) as f64
        } else {
            0.0
        }
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x_min + ix as f64 * self.dx()
    }

    pub fn z(&self, iz: usize) -> f64 {
        self.z_min + iz as f64 * self.dz()
    }

    pub fn pixel_count(&self) -> usize {
        self.nx * self.nz
    }

    /// Sampling rate of an image line in round-trip time, `c / (2 dz)`.
    pub fn axial_sample_rate(&self, sound_speed: f64) -> Option<f64> {
        (self.nz > 1).then(|| sound_speed / (2.0 * self.dz()))
    }

    /// Row nearest to `depth`, or `None` when the depth lies outside the grid
    /// by more than half a pixel.
    pub fn nearest_row(&self, depth: f64) -> Option<usize> {
        nearest_index(depth, self.z_min, self.dz(), self.nz)
    }

    pub fn nearest_column(&self, x: f64) -> Option<usize> {
        nearest_index(x, self.x_min, self.dx(), self.nx)
    }
}

fn nearest_index(v: f64, min: f64, step: f64, n: usize) -> Option<usize> {
    if !v.is_finite() {
        return None;
    }
    if n == 1 || step == 0.0 {
        return ((v - min).abs() <= f64::EPSILON * min.abs().max(1.0)).then_some(0);
    }
    let pos = (v - min) / step;
    if pos < -0.5 || pos > (n - 1) as f64 + 0.5 {
        return None;
    }
    Some((pos.round().max(0.0) as usize).min(n - 1))
}

/// Per-pixel, per-element fractional sample delays.
///
/// A paper-scale image (128 elements, millions of pixels) would need gigabytes
/// as a dense table, so the table stores the validated delay law and evaluates
/// rows on demand. Every accessor returns the same values a dense table would.
#[derive(Debug, Clone)]
pub struct DelayTable {
    geometry: ArrayGeometry,
    grid: ImageGrid,
    fs: f64,
}

/// Builds the delay table for `geometry` over `grid` at sampling rate `fs`.
pub fn compute_delays(geometry: &ArrayGeometry, grid: &ImageGrid, fs: f64) -> Result<DelayTable> {
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::SamplingFrequency(fs));
    }
    grid.validate()?;
    Ok(DelayTable {
        geometry: geometry.clone(),
        grid: grid.clone(),
        fs,
    })
}

impl DelayTable {
    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn grid(&self) -> &ImageGrid {
        &self.grid
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn element_count(&self) -> usize {
        self.geometry.element_count()
    }

    /// Delay in samples for pixel `(ix, iz)` and element `element`.
    pub fn delay(&self, ix: usize, iz: usize, element: usize) -> f64 {
        let x = self.grid.x(ix);
        let z = self.grid.z(iz);
        round_trip_samples(
            x,
            z,
            self.geometry.element_x[element],
            self.geometry.sound_speed,
            self.fs,
        )
    }

    /// Writes the delays of pixel `(ix, iz)` for every element into `out`.
    pub fn pixel_delays_into(&self, ix: usize, iz: usize, out: &mut [f64]) {
        let x = self.grid.x(ix);
        let z = self.grid.z(iz);
        let c = self.geometry.sound_speed;
        for (d, &xi) in out.iter_mut().zip(&self.geometry.element_x) {
            *d = round_trip_samples(x, z, xi, c, self.fs);
        }
    }

    pub fn pixel_delays(&self, ix: usize, iz: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.element_count()];
        self.pixel_delays_into(ix, iz, &mut out);
        out
    }
}

#[inline]
fn round_trip_samples(x: f64, z: f64, xi: f64, c: f64, fs: f64) -> f64 {
    let dx = x - xi;
    fs * (z + (dx * dx + z * z).sqrt()) / c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geometry(m: usize) -> ArrayGeometry {
        ArrayGeometry::new(m, 0.3e-3, 1540.0).unwrap()
    }

    #[test]
    fn elements_are_centred_and_uniform() {
        let g = geometry(128);
        let x = g.element_x();
        assert_eq!(x.len(), 128);
        for w in x.windows(2) {
            assert!((w[1] - w[0] - 0.3e-3).abs() < 1e-12);
        }
        for i in 0..128 {
            assert_eq!(x[i], -x[127 - i]);
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(ArrayGeometry::new(1, 0.3e-3, 1540.0).is_err());
        assert!(ArrayGeometry::new(8, 0.0, 1540.0).is_err());
        assert!(ArrayGeometry::new(8, 0.3e-3, -1.0).is_err());
    }

    #[test]
    fn rejects_bad_grid_and_fs() {
        let g = geometry(8);
        assert!(ImageGrid::new(-1e-3, 1e-3, 10, 0.0, 1e-2, 10).is_err());
        assert!(ImageGrid::new(-1e-3, 1e-3, 0, 1e-3, 1e-2, 10).is_err());
        let grid = ImageGrid::new(-1e-3, 1e-3, 10, 1e-3, 1e-2, 10).unwrap();
        assert_eq!(
            compute_delays(&g, &grid, 0.0).unwrap_err(),
            Error::SamplingFrequency(0.0)
        );
        assert!(compute_delays(&g, &grid, -5.0).is_err());
        let bad = ImageGrid {
            z_min: -1e-3,
            ..grid
        };
        assert!(compute_delays(&g, &bad, 1e8).is_err());
    }

    #[test]
    fn on_axis_delay_is_twice_depth() {
        // Two elements at +-0.15 mm; pixel directly above element 1.
        let g = ArrayGeometry::new(2, 0.3e-3, 1540.0).unwrap();
        let x1 = g.element_x()[1];
        let grid = ImageGrid::new(x1, x1, 1, 35e-3, 35e-3, 1).unwrap();
        let t = compute_delays(&g, &grid, 100e6).unwrap();
        let d = t.delay(0, 0, 1);
        assert!((d - 100e6 * 2.0 * 35e-3 / 1540.0).abs() < 1e-9);
        assert!((d - 4545.4545).abs() < 1e-3);
    }

    #[test]
    fn three_four_five_triangle() {
        let g = ArrayGeometry::new(2, 3e-3, 1540.0).unwrap();
        // element 0 at -1.5 mm, pixel at +1.5 mm, depth 4 mm
        let grid = ImageGrid::new(1.5e-3, 1.5e-3, 1, 4e-3, 4e-3, 1).unwrap();
        let t = compute_delays(&g, &grid, 100e6).unwrap();
        let expected = 100e6 * (4e-3 + 5e-3) / 1540.0;
        assert!((t.delay(0, 0, 0) - expected).abs() < 1e-9);
    }

    #[test]
    fn axial_sampling_grid_matches_fs() {
        let grid =
            ImageGrid::with_axial_sampling(-5e-3, 5e-3, 11, 30e-3, 40e-3, 100e6, 1540.0).unwrap();
        let fs_line = grid.axial_sample_rate(1540.0).unwrap();
        assert!((fs_line - 100e6).abs() / 100e6 < 1e-9);
        assert_eq!(grid.nz, 1299);
    }

    #[test]
    fn nearest_row_rounds_and_rejects_outside() {
        let grid = ImageGrid::new(0.0, 1.0, 2, 1.0, 2.0, 11).unwrap();
        assert_eq!(grid.nearest_row(1.0), Some(0));
        assert_eq!(grid.nearest_row(1.26), Some(3));
        assert_eq!(grid.nearest_row(2.04), Some(10));
        assert_eq!(grid.nearest_row(2.2), None);
        assert_eq!(grid.nearest_row(0.9), None);
    }

    proptest! {
        #[test]
        fn delays_nonnegative_mirror_symmetric_and_monotone(
            m in 2usize..40,
            x in -20e-3f64..20e-3,
            z in 1e-3f64..80e-3,
        ) {
            let g = geometry(m);
            let grid = ImageGrid::new(-x.abs(), x.abs(), 2, z, z, 1).unwrap();
            let t = compute_delays(&g, &grid, 100e6).unwrap();
            let left = t.pixel_delays(0, 0);
            let right = t.pixel_delays(1, 0);
            for i in 0..m {
                prop_assert!(left[i] >= 0.0);
                let mirrored = right[m - 1 - i];
                prop_assert!((left[i] - mirrored).abs() <= 1e-9 * left[i].max(1.0));
            }
            // non-decreasing with lateral distance
            let xs = g.element_x();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| (xs[a] - x.abs()).abs().total_cmp(&(xs[b] - x.abs()).abs()));
            for w in order.windows(2) {
                prop_assert!(right[w[0]] <= right[w[1]] + 1e-9);
            }
        }

        #[test]
        fn doubling_fs_doubles_delays(m in 2usize..20, x in -10e-3f64..10e-3, z in 1e-3f64..60e-3) {
            let g = geometry(m);
            let grid = ImageGrid::new(x, x, 1, z, z, 1).unwrap();
            let a = compute_delays(&g, &grid, 40e6).unwrap().pixel_delays(0, 0);
            let b = compute_delays(&g, &grid, 80e6).unwrap().pixel_delays(0, 0);
            for (u, v) in a.iter().zip(&b) {
                prop_assert_eq!(2.0 * u, *v);
            }
        }
    }
}
