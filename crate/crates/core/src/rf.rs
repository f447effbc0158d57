//! Channel data container and the delayed-sample fetch used by every beamformer.

use crate::{Error, Result};

/// Raw channel data, `elements x samples`, channel-major, with acquisition metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct RfFrame {
    samples: Vec<f64>,
    elements: usize,
    len: usize,
    fs: f64,
    f0: f64,
    sound_speed: f64,
}

impl RfFrame {
    pub fn new(
        samples: Vec<f64>,
        elements: usize,
        fs: f64,
        f0: f64,
        sound_speed: f64,
    ) -> Result<Self> {
        if elements == 0 {
            return Err(Error::Frame("no channels".into()));
        }
        if samples.is_empty() || !samples.len().is_multiple_of(elements) {
            return Err(Error::Frame(format!(
                "{} samples do not split into {elements} non-empty channels",
                samples.len()
            )));
        }
        if !(f0.is_finite() && f0 > 0.0) {
            return Err(Error::Frame(format!(
                "center frequency must be positive, got {f0}"
            )));
        }
        if !(fs.is_finite() && fs > 2.0 * f0) {
            return Err(Error::Frame(format!(
                "sampling frequency {fs} must exceed twice the center frequency {f0}"
            )));
        }
        if !(sound_speed.is_finite() && sound_speed > 0.0) {
            return Err(Error::Frame(format!(
                "sound speed must be positive, got {sound_speed}"
            )));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Frame(format!("non-finite sample at index {pos}")));
        }
        let len = samples.len() / elements;
        Ok(Self {
            samples,
            elements,
            len,
            fs,
            f0,
            sound_speed,
        })
    }

    pub fn zeros(elements: usize, len: usize, fs: f64, f0: f64, sound_speed: f64) -> Result<Self> {
        Self::new(vec![0.0; elements * len], elements, fs, f0, sound_speed)
    }

    pub fn element_count(&self) -> usize {
        self.elements
    }

    /// Samples per channel (K).
    pub fn sample_count(&self) -> usize {
        self.len
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }

    pub fn channel(&self, element: usize) -> &[f64] {
        &self.samples[element * self.len..(element + 1) * self.len]
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Same metadata, new sample values. Used by transforms that keep the layout.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, self.elements, self.fs, self.f0, self.sound_speed)
    }

    /// Linearly interpolated sample of `element` at fractional index `index`;
    /// zero outside `[0, K-1]`.
    #[inline]
    pub fn sample_at(&self, element: usize, index: f64) -> f64 {
        let last = (self.len - 1) as f64;
        if !(index >= 0.0 && index <= last) {
            return 0.0;
        }
        let ch = self.channel(element);
        let i0 = index.floor() as usize;
        let frac = index - i0 as f64;
        if frac == 0.0 {
            return ch[i0];
        }
        ch[i0] + frac * (ch[i0 + 1] - ch[i0])
    }

    /// Fills `out[i]` with the sample of element `i` at `delays[i]`.
    pub fn fetch_delayed_into(&self, delays: &[f64], out: &mut [f64]) {
        assert_eq!(delays.len(), self.elements, "one delay per element");
        assert_eq!(out.len(), self.elements, "one output slot per element");
        for (i, (o, &d)) in out.iter_mut().zip(delays).enumerate() {
            *o = self.sample_at(i, d);
        }
    }
}

/// Per-pixel vector of delayed channel samples, one entry per element.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayedSamples(pub Vec<f64>);

impl DelayedSamples {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for DelayedSamples {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Samples of every channel at its own fractional delay.
pub fn fetch_delayed(frame: &RfFrame, delays: &[f64]) -> DelayedSamples {
    let mut out = vec![0.0; frame.element_count()];
    frame.fetch_delayed_into(delays, &mut out);
    DelayedSamples(out)
}

/// `sign(x) * sqrt(|x|)`.
#[inline]
pub fn signed_sqrt(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().sqrt()
    }
}
