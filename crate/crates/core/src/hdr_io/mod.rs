//! HDR image containers, file I/O, and the color pipeline around the
//! luminance compressor.
//!
//! Readers: Radiance RGBE (`.hdr`/`.pic`, flat and RLE scanlines) and PFM
//! (`PF` color / `Pf` grayscale, both endiannesses). Writer: 8-bit RGB PNG
//! with a display gamma curve. The compressor itself only sees luminance;
//! color is carried through by per-pixel gain so hue is untouched.

mod pfm;
mod rgbe;

pub use pfm::{load_pfm, write_pfm_color, write_pfm_gray};
pub use rgbe::{load_radiance_hdr, write_radiance_hdr};

use crate::error::{Error, Result};
use crate::plane::Plane;

/// Scene-referred linear-light RGB image. Channel values are finite,
/// non-negative, and unbounded above.
#[derive(Debug, Clone)]
pub struct HdrImage {
    pub r: Plane,
    pub g: Plane,
    pub b: Plane,
}

impl HdrImage {
    pub fn new(r: Plane, g: Plane, b: Plane) -> Result<Self> {
        r.check_same_shape(&g)?;
        r.check_same_shape(&b)?;
        for plane in [&r, &g, &b] {
            if plane.data.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Format(
                    "HDR channels must be finite and non-negative".into(),
                ));
            }
        }
        Ok(Self { r, g, b })
    }

    pub fn width(&self) -> usize {
        self.r.width
    }

    pub fn height(&self) -> usize {
        self.r.height
    }
}

/// Max-RGB luminance, floored and normalized so the brightest pixel is
/// exactly 1. Every sample lies in `(0, 1]`.
#[derive(Debug, Clone)]
pub struct LuminanceField {
    pub y: Plane,
}

impl LuminanceField {
    pub fn width(&self) -> usize {
        self.y.width
    }

    pub fn height(&self) -> usize {
        self.y.height
    }
}

/// Display-referred RGB image with channel values in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct LdrImage {
    pub r: Plane,
    pub g: Plane,
    pub b: Plane,
}

impl LdrImage {
    pub fn width(&self) -> usize {
        self.r.width
    }

    pub fn height(&self) -> usize {
        self.r.height
    }
}

/// Default fraction of peak luminance used to floor dark pixels before the
/// logarithm. Roughly 6 log10 units of range below the peak.
pub const DEFAULT_FLOOR_RATIO: f64 = 1e-6;

/// Luminance as the maximum of the RGB triplet, floored at
/// `floor_ratio * peak` and normalized to a maximum of exactly 1.
///
/// Taking the channel maximum (rather than a weighted sum) guarantees that
/// gain-scaled channels never leave the displayable range later in the
/// pipeline.
pub fn extract_luminance(img: &HdrImage, floor_ratio: f64) -> Result<LuminanceField> {
    if !(floor_ratio > 0.0 && floor_ratio < 1.0) {
        return Err(Error::InvalidParam(format!(
            "floor_ratio must be in (0, 1), got {floor_ratio}"
        )));
    }
    let n = img.r.len();
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        y.push(img.r.data[i].max(img.g.data[i]).max(img.b.data[i]));
    }
    let peak = y.iter().copied().fold(0.0_f64, f64::max);
    if peak <= 0.0 {
        return Err(Error::DegenerateInput(
            "all-black image has no luminance to compress".into(),
        ));
    }
    let floor = floor_ratio * peak;
    for v in &mut y {
        *v = v.max(floor) / peak;
    }
    Ok(LuminanceField {
        y: Plane {
            width: img.width(),
            height: img.height(),
            data: y,
        },
    })
}

/// Rebuild color from compressed luminance: every channel is the normalized
/// input channel times the per-pixel gain `y_out / y_in`.
///
/// `y_in` must be the normalized max-RGB luminance of `img` and `y_out` the
/// compressed luminance in `(0, 1]`. Because `y_in` dominates each
/// normalized channel, no output channel exceeds `y_out`.
pub fn recombine_color(img: &HdrImage, y_in: &LuminanceField, y_out: &Plane) -> Result<LdrImage> {
    img.r.check_same_shape(&y_in.y)?;
    img.r.check_same_shape(y_out)?;

    // Same peak the luminance was normalized by.
    let mut peak = 0.0_f64;
    for i in 0..img.r.len() {
        peak = peak
            .max(img.r.data[i])
            .max(img.g.data[i])
            .max(img.b.data[i]);
    }
    if peak <= 0.0 {
        return Err(Error::DegenerateInput(
            "all-black image has no luminance to recombine".into(),
        ));
    }

    let n = img.r.len();
    let mut out = LdrImage {
        r: Plane::filled(img.width(), img.height(), 0.0),
        g: Plane::filled(img.width(), img.height(), 0.0),
        b: Plane::filled(img.width(), img.height(), 0.0),
    };
    for i in 0..n {
        let gain = y_out.data[i] / y_in.y.data[i];
        out.r.data[i] = img.r.data[i] / peak * gain;
        out.g.data[i] = img.g.data[i] / peak * gain;
        out.b.data[i] = img.b.data[i] / peak * gain;
    }
    Ok(out)
}

/// Encode an LDR image as 8-bit RGB PNG bytes after applying a display
/// gamma curve: each channel becomes `round(255 * v^(1/display_gamma))`,
/// clamped to `[0, 255]`.
pub fn encode_display_png(img: &LdrImage, display_gamma: f64) -> Result<Vec<u8>> {
    if !(display_gamma > 0.0) {
        return Err(Error::InvalidParam(format!(
            "display gamma must be positive, got {display_gamma}"
        )));
    }
    let (w, h) = (img.width(), img.height());
    let mut pixels = Vec::with_capacity(w * h * 3);
    for i in 0..w * h {
        pixels.push(gamma_encode(img.r.data[i], display_gamma));
        pixels.push(gamma_encode(img.g.data[i], display_gamma));
        pixels.push(gamma_encode(img.b.data[i], display_gamma));
    }
    let buf = image::RgbImage::from_raw(w as u32, h as u32, pixels)
        .expect("pixel buffer matches dimensions");
    let mut bytes = Vec::new();
    image::DynamicImage::ImageRgb8(buf).write_to(
        &mut std::io::Cursor::new(&mut bytes),
        image::ImageFormat::Png,
    )?;
    Ok(bytes)
}

/// [`encode_display_png`] straight to a file.
pub fn write_display(img: &LdrImage, display_gamma: f64, path: &std::path::Path) -> Result<()> {
    let bytes = encode_display_png(img, display_gamma)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

#[inline]
fn gamma_encode(v: f64, display_gamma: f64) -> u8 {
    let v = v.max(0.0);
    (255.0 * v.powf(1.0 / display_gamma)).round().clamp(0.0, 255.0) as u8
}
