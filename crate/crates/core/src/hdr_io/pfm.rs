//! Portable float map (PFM) reader and writer.
//!
//! `PF` headers carry interleaved RGB float32 samples, `Pf` a single
//! grayscale channel (replicated to RGB on load). The scale token's sign
//! selects endianness; rows are stored bottom-to-top.

use crate::error::{Error, Result};
use crate::hdr_io::HdrImage;
use crate::plane::Plane;

/// Parse a PFM file into a linear-light [`HdrImage`]. Grayscale (`Pf`)
/// images are replicated across all three channels; negative samples are
/// clamped to zero.
pub fn load_pfm(bytes: &[u8]) -> Result<HdrImage> {
    let mut pos = 0;
    let magic = read_token(bytes, &mut pos)
        .ok_or_else(|| Error::Format("empty PFM file".into()))?;
    let channels = match magic {
        b"PF" => 3,
        b"Pf" => 1,
        other => {
            return Err(Error::Format(format!(
                "bad PFM magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };

    let width: usize = parse_token(bytes, &mut pos, "width")?;
    let height: usize = parse_token(bytes, &mut pos, "height")?;
    let scale: f64 = parse_token(bytes, &mut pos, "scale")?;
    if width == 0 || height == 0 {
        return Err(Error::Format("zero image dimension".into()));
    }
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Format(format!("bad PFM scale {scale}")));
    }
    let little_endian = scale < 0.0;

    // Exactly one whitespace byte separates the scale token from the samples.
    match bytes.get(pos) {
        Some(b' ') | Some(b'\n') | Some(b'\r') | Some(b'\t') => pos += 1,
        _ => return Err(Error::Format("missing separator before samples".into())),
    }

    let sample_count = width * height * channels;
    if bytes.len() < pos + sample_count * 4 {
        return Err(Error::Truncated(format!(
            "PFM needs {} sample bytes, found {}",
            sample_count * 4,
            bytes.len() - pos
        )));
    }

    let mut samples = Vec::with_capacity(sample_count);
    for i in 0..sample_count {
        let raw: [u8; 4] = bytes[pos + 4 * i..pos + 4 * i + 4].try_into().unwrap();
        let v = if little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        } as f64;
        if !v.is_finite() {
            return Err(Error::Format(format!("non-finite sample at index {i}")));
        }
        samples.push(v.max(0.0));
    }

    // PFM rows run bottom-to-top; flip into top-to-bottom planes.
    let mut r = vec![0.0; width * height];
    let mut g = vec![0.0; width * height];
    let mut b = vec![0.0; width * height];
    for row in 0..height {
        let src_row = height - 1 - row;
        for x in 0..width {
            let src = (src_row * width + x) * channels;
            let dst = row * width + x;
            if channels == 3 {
                r[dst] = samples[src];
                g[dst] = samples[src + 1];
                b[dst] = samples[src + 2];
            } else {
                r[dst] = samples[src];
                g[dst] = samples[src];
                b[dst] = samples[src];
            }
        }
    }

    HdrImage::new(
        Plane::from_data(width, height, r)?,
        Plane::from_data(width, height, g)?,
        Plane::from_data(width, height, b)?,
    )
}

/// Write a single plane as a grayscale (`Pf`) little-endian PFM.
pub fn write_pfm_gray(plane: &Plane) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(format!("Pf\n{} {}\n-1.0\n", plane.width, plane.height).as_bytes());
    for row in (0..plane.height).rev() {
        for x in 0..plane.width {
            out.extend_from_slice(&(plane.get(x, row) as f32).to_le_bytes());
        }
    }
    out
}

/// Write three planes as a color (`PF`) little-endian PFM.
pub fn write_pfm_color(r: &Plane, g: &Plane, b: &Plane) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(format!("PF\n{} {}\n-1.0\n", r.width, r.height).as_bytes());
    for row in (0..r.height).rev() {
        for x in 0..r.width {
            out.extend_from_slice(&(r.get(x, row) as f32).to_le_bytes());
            out.extend_from_slice(&(g.get(x, row) as f32).to_le_bytes());
            out.extend_from_slice(&(b.get(x, row) as f32).to_le_bytes());
        }
    }
    out
}

fn read_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    Some(&bytes[start..*pos])
}

fn parse_token<T: std::str::FromStr>(bytes: &[u8], pos: &mut usize, what: &str) -> Result<T> {
    let token = read_token(bytes, pos)
        .ok_or_else(|| Error::Format(format!("missing PFM {what}")))?;
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| {
            Error::Format(format!(
                "bad PFM {what}: {:?}",
                String::from_utf8_lossy(token)
            ))
        })
}
