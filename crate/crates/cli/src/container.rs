//! Binary containers: `URF1` for RF frames, `UIM1` for envelope images.
//!
//! Both use a 64-byte little-endian header followed by 32-bit floats.
//! RF bodies are channel-major, image bodies line-major (one axial line per
//! lateral position).

use std::fs;
use std::io::Write;
use std::path::Path;

use sonobeam::{EnvelopeImage, ImageGrid, RfFrame};

use crate::{CliError, CliResult};

pub const RF_MAGIC: [u8; 4] = *b"URF1";
pub const IMAGE_MAGIC: [u8; 4] = *b"UIM1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 64;

/// Metadata stored ahead of the RF samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfHeader {
    pub element_count: u16,
    pub sample_count: u32,
    pub fs: f64,
    pub f0: f64,
    pub sound_speed: f64,
    pub pitch: f64,
}

impl RfHeader {
    pub fn of(frame: &RfFrame, pitch: f64) -> Result<Self, String> {
        let element_count = u16::try_from(frame.element_count()).map_err(|_| {
            format!(
                "{} elements exceed the u16 header field",
                frame.element_count()
            )
        })?;
        let sample_count = u32::try_from(frame.sample_count()).map_err(|_| {
            format!(
                "{} samples exceed the u32 header field",
                frame.sample_count()
            )
        })?;
        Ok(Self {
            element_count,
            sample_count,
            fs: frame.fs(),
            f0: frame.f0(),
            sound_speed: frame.sound_speed(),
            pitch,
        })
    }

    pub fn file_len(&self) -> usize {
        HEADER_LEN + 4 * self.element_count as usize * self.sample_count as usize
    }

    fn encode(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[0..4].copy_from_slice(&RF_MAGIC);
        h[4..6].copy_from_slice(&VERSION.to_le_bytes());
        h[6..8].copy_from_slice(&self.element_count.to_le_bytes());
        h[8..12].copy_from_slice(&self.sample_count.to_le_bytes());
        for (k, v) in [self.fs, self.f0, self.sound_speed, self.pitch]
            .iter()
            .enumerate()
        {
            h[12 + 8 * k..20 + 8 * k].copy_from_slice(&v.to_le_bytes());
        }
        h
    }

    fn decode(bytes: &[u8]) -> Result<Self, String> {
        check_preamble(bytes, RF_MAGIC)?;
        Ok(Self {
            element_count: u16_at(bytes, 6),
            sample_count: u32_at(bytes, 8),
            fs: f64_at(bytes, 12),
            f0: f64_at(bytes, 20),
            sound_speed: f64_at(bytes, 28),
            pitch: f64_at(bytes, 36),
        })
    }
}

/// Grid metadata stored ahead of the image samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageHeader {
    pub nx: u16,
    pub nz: u32,
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl ImageHeader {
    pub fn of(grid: &ImageGrid) -> Result<Self, String> {
        let nx = u16::try_from(grid.nx)
            .map_err(|_| format!("nx = {} exceeds the u16 header field", grid.nx))?;
        let nz = u32::try_from(grid.nz)
            .map_err(|_| format!("nz = {} exceeds the u32 header field", grid.nz))?;
        Ok(Self {
            nx,
            nz,
            x_min: grid.x_min,
            x_max: grid.x_max,
            z_min: grid.z_min,
            z_max: grid.z_max,
        })
    }

    pub fn file_len(&self) -> usize {
        HEADER_LEN + 4 * self.nx as usize * self.nz as usize
    }

    fn encode(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[0..4].copy_from_slice(&IMAGE_MAGIC);
        h[4..6].copy_from_slice(&VERSION.to_le_bytes());
        h[6..8].copy_from_slice(&self.nx.to_le_bytes());
        h[8..12].copy_from_slice(&self.nz.to_le_bytes());
        for (k, v) in [self.x_min, self.x_max, self.z_min, self.z_max]
            .iter()
            .enumerate()
        {
            h[12 + 8 * k..20 + 8 * k].copy_from_slice(&v.to_le_bytes());
        }
        h
    }

    fn decode(bytes: &[u8]) -> Result<Self, String> {
        check_preamble(bytes, IMAGE_MAGIC)?;
        Ok(Self {
            nx: u16_at(bytes, 6),
            nz: u32_at(bytes, 8),
            x_min: f64_at(bytes, 12),
            x_max: f64_at(bytes, 20),
            z_min: f64_at(bytes, 28),
            z_max: f64_at(bytes, 36),
        })
    }
}

fn check_preamble(bytes: &[u8], magic: [u8; 4]) -> Result<(), String> {
    if bytes.len() < HEADER_LEN {
        return Err(format!(
            "{} bytes is shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        ));
    }
    if bytes[0..4] != magic {
        return Err(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&bytes[0..4]),
            String::from_utf8_lossy(&magic)
        ));
    }
    let version = u16_at(bytes, 4);
    if version != VERSION {
        return Err(format!("unsupported version {version}, expected {VERSION}"));
    }
    Ok(())
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes(b[at..at + 2].try_into().unwrap())
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

fn push_f32(out: &mut Vec<u8>, values: &[f64]) {
    out.reserve(4 * values.len());
    for &v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
}

fn body_f64(body: &[u8]) -> Vec<f64> {
    body.chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect()
}

fn check_len(bytes: &[u8], expected: usize) -> Result<(), String> {
    if bytes.len() != expected {
        return Err(format!(
            "file holds {} bytes, header implies {expected}",
            bytes.len()
        ));
    }
    Ok(())
}

pub fn encode_rf(frame: &RfFrame, pitch: f64) -> Result<Vec<u8>, String> {
    let header = RfHeader::of(frame, pitch)?;
    let mut out = Vec::with_capacity(header.file_len());
    out.extend_from_slice(&header.encode());
    push_f32(&mut out, frame.samples());
    Ok(out)
}

pub fn decode_rf(bytes: &[u8]) -> Result<(RfHeader, RfFrame), String> {
    let header = RfHeader::decode(bytes)?;
    check_len(bytes, header.file_len())?;
    let frame = RfFrame::new(
        body_f64(&bytes[HEADER_LEN..]),
        header.element_count as usize,
        header.fs,
        header.f0,
        header.sound_speed,
    )
    .map_err(|e| e.to_string())?;
    Ok((header, frame))
}

pub fn encode_image(image: &EnvelopeImage) -> Result<Vec<u8>, String> {
    let header = ImageHeader::of(image.grid())?;
    let mut out = Vec::with_capacity(header.file_len());
    out.extend_from_slice(&header.encode());
    push_f32(&mut out, image.data());
    Ok(out)
}

pub fn decode_image(bytes: &[u8]) -> Result<EnvelopeImage, String> {
    let h = ImageHeader::decode(bytes)?;
    check_len(bytes, h.file_len())?;
    let grid = ImageGrid::new(
        h.x_min,
        h.x_max,
        h.nx as usize,
        h.z_min,
        h.z_max,
        h.nz as usize,
    )
    .map_err(|e| e.to_string())?;
    EnvelopeImage::new(grid, body_f64(&bytes[HEADER_LEN..])).map_err(|e| e.to_string())
}

fn format_err(path: &Path) -> impl FnOnce(String) -> CliError + '_ {
    move |msg| CliError::Format {
        path: path.to_path_buf(),
        msg,
    }
}

pub fn write_rf(path: &Path, frame: &RfFrame, pitch: f64) -> CliResult<()> {
    write_atomic(path, &encode_rf(frame, pitch).map_err(format_err(path))?)
}

pub fn read_rf(path: &Path) -> CliResult<(RfHeader, RfFrame)> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    decode_rf(&bytes).map_err(format_err(path))
}

pub fn write_image(path: &Path, image: &EnvelopeImage) -> CliResult<()> {
    write_atomic(path, &encode_image(image).map_err(format_err(path))?)
}

pub fn read_image(path: &Path) -> CliResult<EnvelopeImage> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    decode_image(&bytes).map_err(format_err(path))
}

/// Writes through a temporary file in the target directory, then renames it
/// into place so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut builder = tempfile::Builder::new();
    // temp files default to 0600; artifacts get the usual umask-filtered mode
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(fs::Permissions::from_mode(0o666));
    }
    let mut tmp = builder.tempfile_in(dir).map_err(CliError::io(path))?;
    tmp.write_all(bytes).map_err(CliError::io(path))?;
    tmp.as_file().sync_all().map_err(CliError::io(path))?;
    tmp.persist(path).map_err(|e| CliError::io(path)(e.error))?;
    Ok(())
}
