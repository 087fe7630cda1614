//! `RIMG` raw image container.
//!
//! Layout, all little-endian: `"RIMG"`, `u16` version (1), `u8` dtype
//! (0 real, 1 complex interleaved), `u32` height, `u32` width, then the
//! row-major `f32` payload.

use std::fs;
use std::path::Path;

use csmri_core::{Complex64, ComplexImage, Domain, RealImage, SamplingMask, Shape};

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"RIMG";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Real(Vec<f32>),
    /// `(re, im)` pairs.
    Complex(Vec<[f32; 2]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawImageFile {
    pub height: u32,
    pub width: u32,
    pub payload: Payload,
}

impl RawImageFile {
    pub fn from_real(img: &RealImage) -> Self {
        let s = img.shape();
        Self {
            height: s.height as u32,
            width: s.width as u32,
            payload: Payload::Real(img.data().iter().map(|&v| v as f32).collect()),
        }
    }

    pub fn from_complex(img: &ComplexImage) -> Self {
        let s = img.shape();
        Self {
            height: s.height as u32,
            width: s.width as u32,
            payload: Payload::Complex(img.data().iter().map(|c| [c.re as f32, c.im as f32]).collect()),
        }
    }

    pub fn from_mask(mask: &SamplingMask) -> Self {
        let s = mask.shape();
        Self {
            height: s.height as u32,
            width: s.width as u32,
            payload: Payload::Real(mask.indicator().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()),
        }
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.height as usize, self.width as usize)
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.payload, Payload::Complex(_))
    }

    /// Real payloads as-is, complex payloads by magnitude.
    pub fn to_real(&self) -> Result<RealImage> {
        let data = match &self.payload {
            Payload::Real(v) => v.iter().map(|&x| x as f64).collect(),
            Payload::Complex(v) => v.iter().map(|&[re, im]| (re as f64).hypot(im as f64)).collect(),
        };
        Ok(RealImage::new(self.shape(), data)?)
    }

    pub fn to_complex(&self, domain: Domain) -> Result<ComplexImage> {
        let data = match &self.payload {
            Payload::Real(v) => v.iter().map(|&x| Complex64::new(x as f64, 0.0)).collect(),
            Payload::Complex(v) => v
                .iter()
                .map(|&[re, im]| Complex64::new(re as f64, im as f64))
                .collect(),
        };
        Ok(ComplexImage::new(self.shape(), data, domain)?)
    }

    /// Entries must be exactly 0 or 1.
    pub fn to_mask(&self) -> Result<SamplingMask> {
        let Payload::Real(v) = &self.payload else {
            return Err(CliError::Usage("mask file must hold a real image".into()));
        };
        if let Some(bad) = v.iter().find(|&&x| x != 0.0 && x != 1.0) {
            return Err(CliError::Usage(format!("mask entries must be 0 or 1, found {bad}")));
        }
        Ok(SamplingMask::new(self.shape(), v.iter().map(|&x| x == 1.0).collect())?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (dtype, floats): (u8, Vec<f32>) = match &self.payload {
            Payload::Real(v) => (0, v.clone()),
            Payload::Complex(v) => (1, v.iter().flatten().copied().collect()),
        };
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * floats.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(dtype);
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&self.width.to_le_bytes());
        for f in floats {
            out.extend_from_slice(&f.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < HEADER_LEN {
            return Err(format!("file is {} bytes, shorter than the header", bytes.len()));
        }
        if &bytes[..4] != MAGIC {
            return Err("bad magic, expected RIMG".into());
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(format!("unsupported version {version}"));
        }
        let dtype = bytes[6];
        let height = u32::from_le_bytes(bytes[7..11].try_into().unwrap());
        let width = u32::from_le_bytes(bytes[11..15].try_into().unwrap());
        let channels = match dtype {
            0 => 1,
            1 => 2,
            d => return Err(format!("unknown dtype {d}")),
        };
        let expected = (height as u64) * (width as u64) * channels * 4;
        let body = &bytes[HEADER_LEN..];
        if body.len() as u64 != expected {
            return Err(format!("payload is {} bytes, expected {expected}", body.len()));
        }
        let floats: Vec<f32> = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let payload = if dtype == 0 {
            Payload::Real(floats)
        } else {
            Payload::Complex(floats.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
        };
        Ok(Self { height, width, payload })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|r| CliError::format(path, r))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| CliError::io(path, e))
    }
}
