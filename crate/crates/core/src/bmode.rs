//! Frame to envelope image: beamform, band-pass each line, detect the envelope.

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::beamform::{beamform_image, BeamformerKind, OpCount};
use crate::dsp::{self, FilterSpec, FirFilter};
use crate::geometry::DelayTable;
use crate::image::{BeamformedImage, EnvelopeImage};
use crate::rf::RfFrame;
use crate::{Error, Result};

/// Default band for `kind`: `f0 +- f0/2` for DAS, `2 f0 +- f0/2` for the
/// multiplicative beamformers, whose useful band sits at the second harmonic.
pub fn default_filter(kind: BeamformerKind, f0: f64) -> FilterSpec {
    let center = if kind.is_multiplicative() {
        2.0 * f0
    } else {
        f0
    };
    FilterSpec::around(center, f0)
}

/// Band-passes and envelope-detects every axial line of `image`.
pub fn detect_lines(
    image: &BeamformedImage,
    filter: &FilterSpec,
    sound_speed: f64,
) -> Result<EnvelopeImage> {
    let grid = image.grid();
    let fs_line = grid
        .axial_sample_rate(sound_speed)
        .ok_or_else(|| Error::Grid("envelope detection needs more than one axial pixel".into()))?;
    let fir = FirFilter::design(filter, fs_line)?;
    let nz = grid.nz;
    let mut out = vec![0.0; grid.pixel_count()];
    out.par_chunks_mut(nz)
        .zip(image.data().par_chunks(nz))
        .try_for_each_init(FftPlanner::new, |planner, (dst, line)| -> Result<()> {
            let filtered = fir.apply(line)?;
            dst.copy_from_slice(&dsp::envelope_with(&filtered, planner)?);
            Ok(())
        })?;
    EnvelopeImage::new(grid.clone(), out)
}

/// Full reconstruction of one frame. `filter` defaults to [`default_filter`].
pub fn envelope_image(
    frame: &RfFrame,
    delays: &DelayTable,
    kind: BeamformerKind,
    filter: Option<&FilterSpec>,
) -> Result<(EnvelopeImage, OpCount)> {
    let (raw, ops) = beamform_image(frame, delays, kind)?;
    let spec = filter
        .copied()
        .unwrap_or_else(|| default_filter(kind, frame.f0()));
    let env = detect_lines(&raw, &spec, frame.sound_speed())?;
    Ok((env, ops))
}
