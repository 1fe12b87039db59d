//! PGM export and FNCIMG1 image batches.
//!
//! FNCIMG1 layout (little-endian): `"FNCIMG1\0"`, `u32 N`, `u32 S`, `u8 kind`,
//! then `N·S·S` f32 pixels, image-major and row-major within an image.

use std::io::Write;

use crate::error::{Error, Result};

use super::{ImageKind, RasterImage};

pub const MAGIC: &[u8; 8] = b"FNCIMG1\0";

/// Binary (P5) PGM with 8-bit depth.
pub fn write_pgm(img: &RasterImage, out: &mut impl Write) -> Result<()> {
    write!(out, "P5\n{} {}\n255\n", img.res, img.res)?;
    let bytes: Vec<u8> = img.pixels.iter().map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
    out.write_all(&bytes)?;
    Ok(())
}

pub fn encode_batch(images: &[RasterImage]) -> Result<Vec<u8>> {
    let res = images.first().map_or(0, |i| i.res);
    let kind = images.first().map_or(ImageKind::Trajectory, |i| i.kind);
    if images.iter().any(|i| i.res != res || i.kind != kind) {
        return Err(Error::Shape("all images in a batch must share resolution and kind".into()));
    }
    let mut buf = Vec::with_capacity(17 + images.len() * res * res * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(images.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(res as u32).to_le_bytes());
    buf.push(kind.code());
    for img in images {
        for p in &img.pixels {
            buf.extend_from_slice(&p.to_le_bytes());
        }
    }
    Ok(buf)
}

pub fn decode_batch(buf: &[u8]) -> Result<Vec<RasterImage>> {
    if buf.len() < 17 || &buf[..8] != MAGIC {
        return Err(Error::Format { offset: 0, msg: "not an FNCIMG1 batch".into() });
    }
    let n = u32::from_le_bytes(buf[8..12].try_into().unwrap()) as usize;
    let res = u32::from_le_bytes(buf[12..16].try_into().unwrap()) as usize;
    let kind = ImageKind::from_code(buf[16])
        .ok_or_else(|| Error::Format { offset: 16, msg: format!("unknown image kind {}", buf[16]) })?;
    let expected = 17 + n * res * res * 4;
    if buf.len() != expected {
        return Err(Error::Format {
            offset: buf.len().min(expected) as u64,
            msg: format!("payload length {} does not match header (expected {expected})", buf.len()),
        });
    }
    Ok(buf[17..]
        .chunks_exact((res * res * 4).max(1))
        .take(n)
        .map(|chunk| RasterImage {
            res,
            pixels: chunk.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect(),
            kind,
        })
        .collect())
}
