//! Reconstruction kernels.
//!
//! Each kernel maps the vector of delayed samples of one pixel (`xd`, one
//! entry per element) to a single beamformer output:
//!
//! - DAS: `sum_i xd_i`
//! - DMAS, naive: `sum_{i<j} sign(xd_i xd_j) sqrt(|xd_i xd_j|)`
//! - DMAS, fast: `x'_i = sign(xd_i) sqrt(|xd_i|)` once per element, then
//!   `sum_{i<j} x'_i x'_j`
//! - DS-DMAS: the DMAS expansion grouped by its first index gives `M-1`
//!   stage-one terms `t_i = x'_i * sum_{j>i} x'_j`; each group is itself a
//!   DAS, which is replaced by a second fast-DMAS pass over the terms:
//!   `sum_{i<j} t'_i t'_j` with `t'_i = sign(t_i) sqrt(|t_i|)`.
//!
//! The fast paths evaluate the pair sums through suffix sums,
//! `sum_{i<j} a_i a_j = sum_i a_i * (a_{i+1} + ... + a_M)`, so every kernel
//! runs in O(M) per pixel. [`OpCount`] reports the operation model of the
//! published complexity table rather than what this implementation executes.

use rayon::prelude::*;

use crate::geometry::DelayTable;
use crate::image::BeamformedImage;
use crate::rf::{signed_sqrt, RfFrame};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BeamformerKind {
    Das,
    DmasNaive,
    DmasFast,
    DsDmas,
}

impl BeamformerKind {
    pub const ALL: [BeamformerKind; 4] = [
        BeamformerKind::Das,
        BeamformerKind::DmasNaive,
        BeamformerKind::DmasFast,
        BeamformerKind::DsDmas,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BeamformerKind::Das => "das",
            BeamformerKind::DmasNaive => "dmas-naive",
            BeamformerKind::DmasFast => "dmas",
            BeamformerKind::DsDmas => "dsdmas",
        }
    }

    pub fn min_elements(self) -> usize {
        match self {
            BeamformerKind::Das => 1,
            BeamformerKind::DmasNaive | BeamformerKind::DmasFast => 2,
            BeamformerKind::DsDmas => 3,
        }
    }

    /// Whether the output is built from sample products, whose useful band
    /// sits at twice the transmit frequency.
    pub fn is_multiplicative(self) -> bool {
        !matches!(self, BeamformerKind::Das)
    }

    pub fn check_elements(self, m: usize) -> Result<()> {
        if m < self.min_elements() {
            return Err(Error::TooFewElements {
                kind: self.name(),
                required: self.min_elements(),
                actual: m,
            });
        }
        Ok(())
    }

    /// Per-pixel operation count for an `m`-element aperture.
    pub fn op_count(self, m: usize) -> OpCount {
        let m = m as u64;
        let pairs = m * m.saturating_sub(1) / 2;
        let linear = m.saturating_sub(1);
        match self {
            BeamformerKind::Das => OpCount::new(m, 0, 0),
            // sign/abs/sqrt evaluated once per pair
            BeamformerKind::DmasNaive => OpCount::new(0, pairs, pairs),
            BeamformerKind::DmasFast => OpCount::new(0, pairs, 2 * linear),
            BeamformerKind::DsDmas => OpCount::new(0, 2 * pairs, 3 * linear),
        }
    }

    /// Evaluates the kernel on one pixel.
    pub fn pixel(self, xd: &[f64]) -> Result<f64> {
        match self {
            BeamformerKind::Das => Ok(das_pixel(xd)),
            BeamformerKind::DmasNaive => dmas_pixel_naive(xd),
            BeamformerKind::DmasFast => dmas_pixel_fast(xd),
            BeamformerKind::DsDmas => dsdmas_pixel(xd),
        }
    }
}

impl std::fmt::Display for BeamformerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BeamformerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        BeamformerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!("unknown beamformer '{s}' (expected das, dmas, dmas-naive or dsdmas)")
            })
    }
}

/// Operation counts following the published complexity model.
///
/// `multiplies` is the quadratic coupling term, `special_ops` the linear
/// overhead term (a sign/abs/sqrt triple counts as one) and `additions` the
/// DAS accumulations. `total` is their sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCount {
    pub additions: u64,
    pub multiplies: u64,
    pub special_ops: u64,
    pub total: u64,
}

impl OpCount {
    pub fn new(additions: u64, multiplies: u64, special_ops: u64) -> Self {
        Self {
            additions,
            multiplies,
            special_ops,
            total: additions + multiplies + special_ops,
        }
    }

    pub fn times(self, n: u64) -> Self {
        Self::new(
            self.additions * n,
            self.multiplies * n,
            self.special_ops * n,
        )
    }
}

impl std::ops::Add for OpCount {
    type Output = OpCount;

    fn add(self, rhs: OpCount) -> OpCount {
        OpCount::new(
            self.additions + rhs.additions,
            self.multiplies + rhs.multiplies,
            self.special_ops + rhs.special_ops,
        )
    }
}

/// The `M-1` grouped terms of the DMAS expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOneTerms(pub Vec<f64>);

impl StageOneTerms {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

pub fn das_pixel(xd: &[f64]) -> f64 {
    xd.iter().sum()
}

pub fn dmas_pixel_naive(xd: &[f64]) -> Result<f64> {
    BeamformerKind::DmasNaive.check_elements(xd.len())?;
    let mut acc = 0.0;
    for i in 0..xd.len() - 1 {
        for j in i + 1..xd.len() {
            let p = xd[i] * xd[j];
            acc += p.signum() * p.abs().sqrt();
        }
    }
    Ok(acc)
}

pub fn dmas_pixel_fast(xd: &[f64]) -> Result<f64> {
    BeamformerKind::DmasFast.check_elements(xd.len())?;
    let mut scratch = Vec::with_capacity(xd.len());
    Ok(dmas_fast_with(xd, &mut scratch))
}

pub fn stage_one_terms(xd: &[f64]) -> Result<StageOneTerms> {
    BeamformerKind::DsDmas.check_elements(xd.len())?;
    let mut terms = Vec::with_capacity(xd.len() - 1);
    fill_stage_one(xd, &mut terms);
    Ok(StageOneTerms(terms))
}

pub fn dsdmas_pixel(xd: &[f64]) -> Result<f64> {
    BeamformerKind::DsDmas.check_elements(xd.len())?;
    let mut scratch = Vec::with_capacity(xd.len());
    Ok(dsdmas_with(xd, &mut scratch))
}

/// `sum_{i<j} a_i a_j` in O(n).
#[inline]
fn pair_product_sum(a: &[f64]) -> f64 {
    let mut suffix = 0.0;
    let mut acc = 0.0;
    for &v in a.iter().rev() {
        acc += v * suffix;
        suffix += v;
    }
    acc
}

fn dmas_fast_with(xd: &[f64], scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend(xd.iter().map(|&v| signed_sqrt(v)));
    pair_product_sum(scratch)
}

/// Writes `t_i = x'_i * sum_{j>i} x'_j`, `i = 0..M-1`, into `terms`.
fn fill_stage_one(xd: &[f64], terms: &mut Vec<f64>) {
    let m = xd.len();
    terms.clear();
    terms.resize(m - 1, 0.0);
    let mut suffix = signed_sqrt(xd[m - 1]);
    for i in (0..m - 1).rev() {
        let xi = signed_sqrt(xd[i]);
        terms[i] = xi * suffix;
        suffix += xi;
    }
}

fn dsdmas_with(xd: &[f64], scratch: &mut Vec<f64>) -> f64 {
    fill_stage_one(xd, scratch);
    for t in scratch.iter_mut() {
        *t = signed_sqrt(*t);
    }
    pair_product_sum(scratch)
}

#[inline]
fn kernel_with(kind: BeamformerKind, xd: &[f64], scratch: &mut Vec<f64>) -> f64 {
    match kind {
        BeamformerKind::Das => das_pixel(xd),
        // length checked by the caller
        BeamformerKind::DmasNaive => dmas_pixel_naive(xd).unwrap_or(0.0),
        BeamformerKind::DmasFast => dmas_fast_with(xd, scratch),
        BeamformerKind::DsDmas => dsdmas_with(xd, scratch),
    }
}

/// Applies `kind` to every pixel of the delay table's grid.
///
/// Returns the raw (unfiltered) beamformer output and the per-pixel operation count.
pub fn beamform_image(
    frame: &RfFrame,
    delays: &DelayTable,
    kind: BeamformerKind,
) -> Result<(BeamformedImage, OpCount)> {
    let m = frame.element_count();
    if m != delays.element_count() {
        return Err(Error::ElementMismatch {
            frame: m,
            table: delays.element_count(),
        });
    }
    kind.check_elements(m)?;
    let grid = delays.grid().clone();
    let nz = grid.nz;
    let mut data = vec![0.0; grid.pixel_count()];
    data.par_chunks_mut(nz).enumerate().for_each_init(
        || (vec![0.0; m], vec![0.0; m], Vec::with_capacity(m)),
        |(d, xd, scratch), (ix, line)| {
            for (iz, out) in line.iter_mut().enumerate() {
                delays.pixel_delays_into(ix, iz, d);
                frame.fetch_delayed_into(d, xd);
                *out = kernel_with(kind, xd, scratch);
            }
        },
    );
    Ok((BeamformedImage::new(grid, data)?, kind.op_count(m)))
}
