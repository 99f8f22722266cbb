//! Radiance RGBE (`.hdr`/`.pic`) reader and writer.
//!
//! Pixels are 4-byte quadruples (r, g, b, e) sharing one exponent. A
//! quadruple with `e > 0` decodes each channel as `mantissa * 2^(e - 136)`;
//! `e == 0` is black. Scanlines may be flat, old-style run-length coded
//! (`(1,1,1,n)` repeat markers), or new-style per-component RLE.

use crate::error::{Error, Result};
use crate::hdr_io::HdrImage;
use crate::plane::Plane;

const MAGIC_RADIANCE: &[u8] = b"#?RADIANCE";
const MAGIC_RGBE: &[u8] = b"#?RGBE";

// New-style RLE applies only to these scanline widths (Radiance convention).
const RLE_MIN_WIDTH: usize = 8;
const RLE_MAX_WIDTH: usize = 0x7fff;

/// Decode one RGBE quadruple to linear RGB.
#[inline]
pub(crate) fn decode_rgbe(q: [u8; 4]) -> [f64; 3] {
    if q[3] == 0 {
        return [0.0, 0.0, 0.0];
    }
    let scale = (2.0_f64).powi(q[3] as i32 - 136);
    [
        q[0] as f64 * scale,
        q[1] as f64 * scale,
        q[2] as f64 * scale,
    ]
}

/// Encode linear RGB as an RGBE quadruple. The shared exponent comes from
/// the largest channel; mantissas are truncated, so each decoded channel is
/// within one mantissa quantum below the original.
#[inline]
pub(crate) fn encode_rgbe(r: f64, g: f64, b: f64) -> [u8; 4] {
    let v = r.max(g).max(b);
    if v < 1e-38 {
        return [0, 0, 0, 0];
    }
    let (_, exp) = frexp(v);
    let exp = exp.clamp(-127, 127);
    let scale = (2.0_f64).powi(8 - exp);
    [
        (r * scale) as u8,
        (g * scale) as u8,
        (b * scale) as u8,
        (exp + 128) as u8,
    ]
}

/// Split a positive finite float into `(f, e)` with `v = f * 2^e` and
/// `f` in `[0.5, 1)`.
fn frexp(v: f64) -> (f64, i32) {
    debug_assert!(v > 0.0 && v.is_finite());
    let bits = v.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased == 0 {
        // subnormal: renormalize first
        let (f, e) = frexp(v * (2.0_f64).powi(64));
        return (f, e - 64);
    }
    let e = biased - 1022;
    let f = f64::from_bits((bits & !(0x7ff_u64 << 52)) | (1022_u64 << 52));
    (f, e)
}

struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn read_u8(&mut self) -> Result<u8> {
        let b = *self
            .data
            .get(self.pos)
            .ok_or_else(|| Error::Truncated("unexpected end of RGBE pixel data".into()))?;
        self.pos += 1;
        Ok(b)
    }

    fn read_quad(&mut self) -> Result<[u8; 4]> {
        if self.pos + 4 > self.data.len() {
            return Err(Error::Truncated("unexpected end of RGBE pixel data".into()));
        }
        let q = [
            self.data[self.pos],
            self.data[self.pos + 1],
            self.data[self.pos + 2],
            self.data[self.pos + 3],
        ];
        self.pos += 4;
        Ok(q)
    }

    /// Read up to the next `\n` (not included). Returns None at EOF.
    fn read_line(&mut self) -> Option<&'a [u8]> {
        if self.pos >= self.data.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
            self.pos += 1;
        }
        let line = &self.data[start..self.pos];
        if self.pos < self.data.len() {
            self.pos += 1; // consume '\n'
        }
        Some(line)
    }
}

/// Parse a Radiance RGBE file into a linear-light [`HdrImage`].
pub fn load_radiance_hdr(bytes: &[u8]) -> Result<HdrImage> {
    let mut r = ByteReader::new(bytes);

    let magic = r
        .read_line()
        .ok_or_else(|| Error::Format("empty file".into()))?;
    if !(magic.starts_with(MAGIC_RADIANCE) || magic.starts_with(MAGIC_RGBE)) {
        return Err(Error::Format(
            "missing #?RADIANCE / #?RGBE signature".into(),
        ));
    }

    // Header lines up to the blank separator.
    loop {
        let line = r
            .read_line()
            .ok_or_else(|| Error::Format("unterminated header".into()))?;
        if line.is_empty() || line == b"\r" {
            break;
        }
        if line.starts_with(b"#") {
            continue;
        }
        let text = String::from_utf8_lossy(line);
        if let Some(fmt) = text.trim().strip_prefix("FORMAT=") {
            if fmt.trim() != "32-bit_rle_rgbe" {
                return Err(Error::Unsupported(format!("pixel format {}", fmt.trim())));
            }
        }
        // EXPOSURE, GAMMA, and other attributes are ignored.
    }

    let res_line = r
        .read_line()
        .ok_or_else(|| Error::Format("missing resolution line".into()))?;
    let res_text = String::from_utf8_lossy(res_line);
    let tokens: Vec<&str> = res_text.split_whitespace().collect();
    if tokens.len() != 4 {
        return Err(Error::Format(format!("bad resolution line: {res_text}")));
    }
    if tokens[0] != "-Y" || tokens[2] != "+X" {
        return Err(Error::Unsupported(format!(
            "orientation {} .. {} (only -Y h +X w is supported)",
            tokens[0], tokens[2]
        )));
    }
    let height: usize = tokens[1]
        .parse()
        .map_err(|_| Error::Format(format!("bad height: {}", tokens[1])))?;
    let width: usize = tokens[3]
        .parse()
        .map_err(|_| Error::Format(format!("bad width: {}", tokens[3])))?;
    if width == 0 || height == 0 {
        return Err(Error::Format("zero image dimension".into()));
    }

    let mut red = Vec::with_capacity(width * height);
    let mut green = Vec::with_capacity(width * height);
    let mut blue = Vec::with_capacity(width * height);
    let mut row = vec![[0u8; 4]; width];
    for _ in 0..height {
        read_scanline(&mut r, &mut row)?;
        for q in &row {
            let [cr, cg, cb] = decode_rgbe(*q);
            red.push(cr);
            green.push(cg);
            blue.push(cb);
        }
    }

    HdrImage::new(
        Plane::from_data(width, height, red)?,
        Plane::from_data(width, height, green)?,
        Plane::from_data(width, height, blue)?,
    )
}

fn read_scanline(r: &mut ByteReader, row: &mut [[u8; 4]]) -> Result<()> {
    let width = row.len();
    if !(RLE_MIN_WIDTH..=RLE_MAX_WIDTH).contains(&width) {
        return read_scanline_old(r, None, row);
    }
    let first = r.read_quad()?;
    if first[0] == 2 && first[1] == 2 && first[2] & 0x80 == 0 {
        // new-style per-component RLE
        let coded_width = ((first[2] as usize) << 8) | first[3] as usize;
        if coded_width != width {
            return Err(Error::Format(format!(
                "scanline width {coded_width} does not match image width {width}"
            )));
        }
        for channel in 0..4 {
            read_component(r, row, channel)?;
        }
        Ok(())
    } else {
        read_scanline_old(r, Some(first), row)
    }
}

fn read_component(r: &mut ByteReader, row: &mut [[u8; 4]], channel: usize) -> Result<()> {
    let width = row.len();
    let mut pos = 0;
    while pos < width {
        let code = r.read_u8()?;
        if code > 128 {
            let run = (code - 128) as usize;
            if pos + run > width {
                return Err(Error::Format("RLE run overflows scanline".into()));
            }
            let value = r.read_u8()?;
            for px in &mut row[pos..pos + run] {
                px[channel] = value;
            }
            pos += run;
        } else {
            let count = code as usize;
            if count == 0 {
                return Err(Error::Format("zero-length RLE literal block".into()));
            }
            if pos + count > width {
                return Err(Error::Format("RLE literal block overflows scanline".into()));
            }
            for i in 0..count {
                row[pos + i][channel] = r.read_u8()?;
            }
            pos += count;
        }
    }
    Ok(())
}

/// Flat pixels with old-style `(1,1,1,n)` repeat markers.
fn read_scanline_old(
    r: &mut ByteReader,
    first: Option<[u8; 4]>,
    row: &mut [[u8; 4]],
) -> Result<()> {
    let width = row.len();
    let mut pos = 0;
    let mut rshift = 0u32;
    let mut pending = first;
    while pos < width {
        let q = match pending.take() {
            Some(q) => q,
            None => r.read_quad()?,
        };
        if q[0] == 1 && q[1] == 1 && q[2] == 1 {
            if pos == 0 {
                return Err(Error::Format(
                    "scanline begins with a repeat marker".into(),
                ));
            }
            if rshift >= 32 {
                return Err(Error::Format("repeat marker shift overflow".into()));
            }
            let count = (q[3] as usize) << rshift;
            if pos + count > width {
                return Err(Error::Format("repeat marker overflows scanline".into()));
            }
            let prev = row[pos - 1];
            for px in &mut row[pos..pos + count] {
                *px = prev;
            }
            pos += count;
            rshift += 8;
        } else {
            row[pos] = q;
            pos += 1;
            rshift = 0;
        }
    }
    Ok(())
}

/// Serialize an [`HdrImage`] as a Radiance RGBE file. Scanlines use
/// new-style RLE where the format allows it and flat pixels otherwise.
pub fn write_radiance_hdr(img: &HdrImage) -> Vec<u8> {
    let (width, height) = (img.width(), img.height());
    let mut out = Vec::new();
    out.extend_from_slice(b"#?RADIANCE\n");
    out.extend_from_slice(b"FORMAT=32-bit_rle_rgbe\n");
    out.extend_from_slice(b"\n");
    out.extend_from_slice(format!("-Y {height} +X {width}\n").as_bytes());

    let rle = (RLE_MIN_WIDTH..=RLE_MAX_WIDTH).contains(&width);
    let mut quads = vec![[0u8; 4]; width];
    for y in 0..height {
        for x in 0..width {
            quads[x] = encode_rgbe(img.r.get(x, y), img.g.get(x, y), img.b.get(x, y));
        }
        if rle {
            out.push(2);
            out.push(2);
            out.push((width >> 8) as u8);
            out.push((width & 0xff) as u8);
            for channel in 0..4 {
                let bytes: Vec<u8> = quads.iter().map(|q| q[channel]).collect();
                write_component_rle(&bytes, &mut out);
            }
        } else {
            for q in &quads {
                out.extend_from_slice(q);
            }
        }
    }
    out
}

fn write_component_rle(data: &[u8], out: &mut Vec<u8>) {
    const MIN_RUN: usize = 4;
    let mut i = 0;
    while i < data.len() {
        let mut run = 1;
        while i + run < data.len() && data[i + run] == data[i] && run < 127 {
            run += 1;
        }
        if run >= MIN_RUN {
            out.push(128 + run as u8);
            out.push(data[i]);
            i += run;
        } else {
            let start = i;
            let mut count = 0;
            while i < data.len() && count < 128 {
                let mut r = 1;
                while i + r < data.len() && data[i + r] == data[i] && r < MIN_RUN {
                    r += 1;
                }
                if r >= MIN_RUN {
                    break;
                }
                i += 1;
                count += 1;
            }
            out.push(count as u8);
            out.extend_from_slice(&data[start..start + count]);
        }
    }
}
