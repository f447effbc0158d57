//! Pixel containers shared by the beamformers, the signal chain and the metrics.

use crate::dsp;
use crate::geometry::ImageGrid;
use crate::{Error, Result};

/// Real-valued image stored line by line: `data[ix * nz + iz]`.
///
/// The same container holds raw beamformer output, filtered RF and envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    grid: ImageGrid,
    data: Vec<f64>,
}

pub type BeamformedImage = Image;
pub type EnvelopeImage = Image;

impl Image {
    pub fn new(grid: ImageGrid, data: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if data.len() != grid.pixel_count() {
            return Err(Error::Grid(format!(
                "{} values for a {}x{} grid",
                data.len(),
                grid.nx,
                grid.nz
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: ImageGrid) -> Result<Self> {
        let n = grid.pixel_count();
        Self::new(grid, vec![0.0; n])
    }

    pub fn grid(&self) -> &ImageGrid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn at(&self, ix: usize, iz: usize) -> f64 {
        self.data[ix * self.grid.nz + iz]
    }

    /// Axial line `ix`.
    pub fn line(&self, ix: usize) -> &[f64] {
        let nz = self.grid.nz;
        &self.data[ix * nz..(ix + 1) * nz]
    }

    pub fn lines(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.grid.nz)
    }

    /// Lateral row `iz`, one value per line.
    pub fn row(&self, iz: usize) -> Vec<f64> {
        (0..self.grid.nx).map(|ix| self.at(ix, iz)).collect()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self.data.iter().map(|v| v * alpha).collect(),
        }
    }

    /// Normalizes to the image maximum and converts to dB, floored at `-dynamic_range`.
    pub fn to_db(&self, dynamic_range: f64) -> Result<DbImage> {
        let values = dsp::log_compress(&self.data, dynamic_range)?;
        Ok(DbImage {
            grid: self.grid.clone(),
            values,
            dynamic_range,
        })
    }
}

/// Log-compressed image: 0 dB at the maximum, floored at `-dynamic_range`.
#[derive(Debug, Clone, PartialEq)]
pub struct DbImage {
    grid: ImageGrid,
    values: Vec<f64>,
    dynamic_range: f64,
}

impl DbImage {
    pub fn grid(&self) -> &ImageGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dynamic_range(&self) -> f64 {
        self.dynamic_range
    }

    pub fn at(&self, ix: usize, iz: usize) -> f64 {
        self.values[ix * self.grid.nz + iz]
    }

    pub fn row(&self, iz: usize) -> Vec<f64> {
        (0..self.grid.nx).map(|ix| self.at(ix, iz)).collect()
    }
}
