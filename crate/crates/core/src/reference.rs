//! Reference brightness construction.
//!
//! The compressed output is regularized toward a reference image with a
//! reduced dynamic range. The reference is produced by a monotonic
//! logarithmic tone curve whose shape adapts to a local geometric mean of
//! the surround, expanding dark regions more and compressing bright ones
//! less, and its logarithm gives the reference brightness.

use crate::error::{Error, Result};
use crate::hdr_io::LuminanceField;
use crate::plane::Plane;

/// Per-pixel log-luminance (natural log). Fields produced by this module or
/// by the solver are non-positive everywhere.
#[derive(Debug, Clone)]
pub struct BrightnessField {
    pub b: Plane,
}

impl BrightnessField {
    /// Brightness as the natural log of normalized luminance. Values are
    /// finite (the luminance is floored) and non-positive (it is
    /// normalized to a maximum of 1).
    pub fn from_luminance(y: &LuminanceField) -> Self {
        Self {
            b: y.y.map(f64::ln),
        }
    }

    pub fn width(&self) -> usize {
        self.b.width
    }

    pub fn height(&self) -> usize {
        self.b.height
    }
}

/// Parameters of the logarithmic tone curve.
#[derive(Debug, Clone, Copy)]
pub struct TroParams {
    /// Global strength of the surround term. Larger values brighten the
    /// rendition overall.
    pub beta: f64,
    /// Exponent applied to the local geometric mean; values below 1 soften
    /// the surround's influence.
    pub gamma_exp: f64,
    /// Radius of the square window for the local geometric mean.
    pub window_radius: usize,
    /// Lower clamp on the curve output before taking its log, bounding the
    /// reference brightness from below.
    pub g_floor: f64,
}

impl Default for TroParams {
    fn default() -> Self {
        Self {
            beta: 0.1,
            gamma_exp: 0.6,
            window_radius: 8,
            g_floor: 1e-6,
        }
    }
}

impl TroParams {
    /// Defaults with the surround window scaled to the image size.
    pub fn for_image(width: usize, height: usize) -> Self {
        Self {
            window_radius: default_window_radius(width, height),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(Error::InvalidParam(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.gamma_exp > 0.0) {
            return Err(Error::InvalidParam(format!(
                "gamma exponent must be > 0, got {}",
                self.gamma_exp
            )));
        }
        if !(self.g_floor > 0.0 && self.g_floor < 1.0) {
            return Err(Error::InvalidParam(format!(
                "g_floor must be in (0, 1), got {}",
                self.g_floor
            )));
        }
        Ok(())
    }
}

/// Surround window radius that tracks image size: min dimension / 32,
/// never below 8 pixels.
pub fn default_window_radius(width: usize, height: usize) -> usize {
    ((width.min(height) as f64 / 32.0).round() as usize).max(8)
}

/// Per-pixel geometric mean of `y` over a `(2r+1)x(2r+1)` window, computed
/// as a box average in the log domain. Windows are clipped at the borders
/// and renormalized by the clipped pixel count.
pub fn local_geometric_mean(y: &Plane, window_radius: usize) -> Plane {
    let (w, h) = (y.width, y.height);
    let log_y = y.map(f64::ln);
    let r = window_radius;

    // horizontal pass: windowed sums per row via prefix sums
    let mut row_sums = vec![0.0; w * h];
    let mut prefix = vec![0.0; w + 1];
    for yy in 0..h {
        for x in 0..w {
            prefix[x + 1] = prefix[x] + log_y.data[yy * w + x];
        }
        for x in 0..w {
            let lo = x.saturating_sub(r);
            let hi = (x + r).min(w - 1);
            row_sums[yy * w + x] = prefix[hi + 1] - prefix[lo];
        }
    }

    // vertical pass over the row sums
    let mut out = Plane::filled(w, h, 0.0);
    let mut col_prefix = vec![0.0; h + 1];
    for x in 0..w {
        for yy in 0..h {
            col_prefix[yy + 1] = col_prefix[yy] + row_sums[yy * w + x];
        }
        for yy in 0..h {
            let lo = yy.saturating_sub(r);
            let hi = (yy + r).min(h - 1);
            let sum = col_prefix[hi + 1] - col_prefix[lo];
            let count = ((x + r).min(w - 1) - x.saturating_sub(r) + 1) * (hi - lo + 1);
            out.data[yy * w + x] = (sum / count as f64).exp();
        }
    }
    out
}

/// The tone curve at a single pixel: how far `log(y + s)` has climbed from
/// `log(s)` toward `log(1 + s)`, with `s = beta * ybar^gamma`. Maps
/// `(0, 1]` into `[0, 1]` with `g(1) = 1`.
#[inline]
pub fn tro_scalar(y: f64, ybar: f64, beta: f64, gamma_exp: f64) -> f64 {
    let s = beta * ybar.powf(gamma_exp);
    let log_s = s.ln();
    ((y + s).ln() - log_s) / ((1.0 + s).ln() - log_s)
}

/// Apply the tone curve to a whole luminance field.
pub fn tro_map(y: &LuminanceField, params: &TroParams) -> Result<Plane> {
    params.validate()?;
    let ybar = local_geometric_mean(&y.y, params.window_radius);
    let mut out = Plane::filled(y.width(), y.height(), 0.0);
    for i in 0..out.len() {
        out.data[i] = tro_scalar(y.y.data[i], ybar.data[i], params.beta, params.gamma_exp);
    }
    Ok(out)
}

/// Reference brightness: the log of the (floored) tone-curve output.
/// Non-positive everywhere, and exactly 0 where the luminance is 1.
pub fn reference_brightness(y: &LuminanceField, params: &TroParams) -> Result<BrightnessField> {
    let g = tro_map(y, params)?;
    Ok(BrightnessField {
        b: g.map(|v| v.max(params.g_floor).ln()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lum(width: usize, height: usize, data: Vec<f64>) -> LuminanceField {
        LuminanceField {
            y: Plane::from_data(width, height, data).unwrap(),
        }
    }

    #[test]
    fn geometric_mean_of_constant_plane() {
        let y = Plane::filled(5, 4, 0.3);
        for radius in [0, 1, 3, 10] {
            let m = local_geometric_mean(&y, radius);
            for v in &m.data {
                assert!((v - 0.3).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn geometric_mean_radius_zero_is_identity() {
        let y = Plane::from_data(2, 2, vec![0.1, 0.9, 0.4, 1.0]).unwrap();
        let m = local_geometric_mean(&y, 0);
        for (a, b) in m.data.iter().zip(&y.data) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn geometric_mean_of_two_pixels() {
        let y = Plane::from_data(2, 1, vec![1.0, 4.0]).unwrap();
        let m = local_geometric_mean(&y, 1);
        assert!((m.data[0] - 2.0).abs() < 1e-14);
        assert!((m.data[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tone_curve_spec_points() {
        // y = 1 maps to exactly 1 regardless of the surround
        assert_eq!(tro_scalar(1.0, 0.37, 0.1, 0.6), 1.0);
        assert_eq!(tro_scalar(1.0, 1e-6, 7.3, 2.0), 1.0);

        // hand-evaluated point: ln(2)/ln(11)
        let g = tro_scalar(0.1, 1.0, 0.1, 1.0);
        assert!((g - 2.0_f64.ln() / 11.0_f64.ln()).abs() < 1e-15);
        assert!((g - 0.2891).abs() < 1e-4);
    }

    #[test]
    fn tone_curve_vanishes_with_y() {
        let g = tro_scalar(1e-300, 0.5, 0.1, 0.6);
        assert!(g >= 0.0 && g < 1e-290);
    }

    #[test]
    fn reference_brightness_spec_points() {
        let y = lum(2, 1, vec![1.0, 0.1]);
        // radius large enough to mix both pixels; use radius 0 to pin the
        // surround to the pixel itself for the hand-computed case below
        let params = TroParams {
            beta: 0.1,
            gamma_exp: 1.0,
            window_radius: 0,
            g_floor: 1e-6,
        };
        let r = reference_brightness(&y, &params).unwrap();
        assert_eq!(r.b.data[0], 0.0); // log 1

        // hand-evaluated point: log of the ln(2)/ln(11) curve value,
        // ln(ln 2 / ln 11) = -1.24110...
        let g = tro_scalar(0.1, 1.0, 0.1, 1.0);
        assert!((g.ln() - (2.0_f64.ln() / 11.0_f64.ln()).ln()).abs() < 1e-15);
        assert!((g.ln() - (-1.2411)).abs() < 1e-4);

        // floor clamp: with radius 0 the curve at y = 0.1 sits near 0.52,
        // so a floor of 0.9 binds
        let y1 = lum(1, 1, vec![0.1]);
        let params_floor = TroParams {
            g_floor: 0.9,
            ..params
        };
        let r1 = reference_brightness(&y1, &params_floor).unwrap();
        assert_eq!(r1.b.data[0], 0.9_f64.ln());
    }

    #[test]
    fn curve_monotone_in_y_and_antimonotone_in_surround() {
        let betas = [0.01, 0.1, 1.0, 10.0];
        let gammas = [0.3, 0.6, 1.0, 2.0];
        let ys: Vec<f64> = (1..=40).map(|i| i as f64 / 40.0).collect();
        let ybars: Vec<f64> = (0..20).map(|i| 1e-4_f64 * 10f64.powf(i as f64 / 5.0)).collect();
        for &beta in &betas {
            for &gamma in &gammas {
                for &ybar in &ybars {
                    for pair in ys.windows(2) {
                        assert!(
                            tro_scalar(pair[1], ybar, beta, gamma)
                                > tro_scalar(pair[0], ybar, beta, gamma)
                        );
                    }
                }
                for &y in &ys {
                    for pair in ybars.windows(2) {
                        assert!(
                            tro_scalar(y, pair[1], beta, gamma)
                                <= tro_scalar(y, pair[0], beta, gamma) + 1e-15
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn reference_is_nonpositive_and_curve_in_unit_range() {
        let data: Vec<f64> = (1..=64).map(|i| i as f64 / 64.0).collect();
        let y = lum(8, 8, data);
        let params = TroParams::default();
        let g = tro_map(&y, &params).unwrap();
        for v in &g.data {
            assert!(*v >= 0.0 && *v <= 1.0);
        }
        let r = reference_brightness(&y, &params).unwrap();
        for v in &r.b.data {
            assert!(*v <= 0.0 && v.is_finite());
        }
    }

    #[test]
    fn window_radius_tracks_image_size() {
        assert_eq!(default_window_radius(100, 100), 8);
        assert_eq!(default_window_radius(1024, 512), 16);
        assert_eq!(default_window_radius(4096, 4096), 128);
    }
}
