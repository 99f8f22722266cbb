//! Halo mitigation around strong edges.
//!
//! Matching high local contrast at strong edges overshoots and produces
//! halos. Two per-pixel maps counter this: the regularization weight is
//! ramped up toward edges (suppressing dark halos), and the solver's upper
//! bound is ramped down from zero toward the reference brightness
//! (suppressing bright halos). Both ramps are linear in Chebyshev distance
//! from the nearest marked edge pixel.

use crate::error::{Error, Result};
use crate::plane::{Mask, Plane};
use crate::reference::BrightnessField;

/// Edge handling parameters.
#[derive(Debug, Clone, Copy)]
pub struct EdgeParams {
    /// Brightness difference (natural log units) above which a neighbor
    /// pair counts as a strong edge.
    pub edge_threshold: f64,
    /// Distance over which both ramps fade out. Zero disables them.
    pub ramp_radius: usize,
    /// Peak multiplier on the regularization weight at an edge pixel.
    /// One disables the weight ramp.
    pub lambda_boost: f64,
}

impl Default for EdgeParams {
    fn default() -> Self {
        Self {
            // an 8:1 luminance ratio between 4-neighbors
            edge_threshold: 8.0_f64.ln(),
            ramp_radius: 6,
            lambda_boost: 10.0,
        }
    }
}

impl EdgeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.edge_threshold > 0.0) {
            return Err(Error::InvalidParam(format!(
                "edge threshold must be > 0, got {}",
                self.edge_threshold
            )));
        }
        if !(self.lambda_boost >= 1.0) {
            return Err(Error::InvalidParam(format!(
                "lambda boost must be >= 1, got {}",
                self.lambda_boost
            )));
        }
        Ok(())
    }
}

/// Per-pixel solver inputs derived from the edge analysis.
#[derive(Debug, Clone)]
pub struct AdaptationMaps {
    /// Regularization weight per pixel; equals the base weight away from
    /// edges.
    pub lambda: Plane,
    /// Upper bound on the compressed brightness per pixel, in `[R_i, 0]`.
    pub upper_bound: Plane,
}

impl AdaptationMaps {
    /// Uniform weight and a zero upper bound: the plain problem with no
    /// edge treatment.
    pub fn uniform(width: usize, height: usize, base_lambda: f64) -> Self {
        Self {
            lambda: Plane::filled(width, height, base_lambda),
            upper_bound: Plane::filled(width, height, 0.0),
        }
    }
}

/// Mark pixels whose brightness differs from any 4-neighbor by more than
/// `edge_threshold`.
pub fn detect_strong_edges(b: &BrightnessField, edge_threshold: f64) -> Mask {
    let (w, h) = (b.width(), b.height());
    let mut mask = Mask::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            let center = b.b.get(x, y);
            let mut max_diff = 0.0_f64;
            if x > 0 {
                max_diff = max_diff.max((center - b.b.get(x - 1, y)).abs());
            }
            if x + 1 < w {
                max_diff = max_diff.max((center - b.b.get(x + 1, y)).abs());
            }
            if y > 0 {
                max_diff = max_diff.max((center - b.b.get(x, y - 1)).abs());
            }
            if y + 1 < h {
                max_diff = max_diff.max((center - b.b.get(x, y + 1)).abs());
            }
            if max_diff > edge_threshold {
                mask.set(x, y, true);
            }
        }
    }
    mask
}

/// Chebyshev distance from each pixel to the nearest marked pixel, with
/// anything at or beyond `radius` left at infinity. Brute force per marked
/// pixel; the radius is small.
fn chebyshev_distance_within(edges: &Mask, radius: usize) -> Plane {
    let (w, h) = (edges.width, edges.height);
    let mut dist = Plane::filled(w, h, f64::INFINITY);
    if radius == 0 {
        return dist;
    }
    for ey in 0..h {
        for ex in 0..w {
            if !edges.get(ex, ey) {
                continue;
            }
            let y_lo = ey.saturating_sub(radius - 1);
            let y_hi = (ey + radius - 1).min(h - 1);
            let x_lo = ex.saturating_sub(radius - 1);
            let x_hi = (ex + radius - 1).min(w - 1);
            for y in y_lo..=y_hi {
                for x in x_lo..=x_hi {
                    let d = (x.abs_diff(ex)).max(y.abs_diff(ey)) as f64;
                    let slot = &mut dist.data[y * w + x];
                    if d < *slot {
                        *slot = d;
                    }
                }
            }
        }
    }
    dist
}

/// Ramp weight `max(0, 1 - d/ramp_radius)`: 1 on edge pixels, 0 at and
/// beyond the ramp radius.
#[inline]
fn ramp_t(d: f64, ramp_radius: usize) -> f64 {
    if ramp_radius == 0 || !d.is_finite() {
        return 0.0;
    }
    (1.0 - d / ramp_radius as f64).max(0.0)
}

/// Per-pixel regularization weight: `base * (1 + (boost - 1) * t)` with the
/// linear ramp `t` in Chebyshev distance to the nearest edge pixel.
pub fn build_lambda_map(edges: &Mask, base_lambda: f64, params: &EdgeParams) -> Plane {
    let dist = chebyshev_distance_within(edges, params.ramp_radius);
    dist.map(|d| base_lambda * (1.0 + (params.lambda_boost - 1.0) * ramp_t(d, params.ramp_radius)))
}

/// Per-pixel upper bound `t * R_i`: the reference brightness on edge
/// pixels, zero away from them, linearly interpolated between.
pub fn build_upper_bound(edges: &Mask, r: &BrightnessField, params: &EdgeParams) -> Plane {
    let dist = chebyshev_distance_within(edges, params.ramp_radius);
    let mut out = Plane::filled(r.width(), r.height(), 0.0);
    for i in 0..out.len() {
        out.data[i] = ramp_t(dist.data[i], params.ramp_radius) * r.b.data[i];
    }
    out
}

/// Both adaptation maps from one distance transform.
pub fn build_adaptation_maps(
    b: &BrightnessField,
    r: &BrightnessField,
    base_lambda: f64,
    params: &EdgeParams,
) -> Result<AdaptationMaps> {
    params.validate()?;
    if !(base_lambda > 0.0) {
        return Err(Error::InvalidParam(format!(
            "base lambda must be > 0, got {base_lambda}"
        )));
    }
    b.b.check_same_shape(&r.b)?;
    let edges = detect_strong_edges(b, params.edge_threshold);
    let dist = chebyshev_distance_within(&edges, params.ramp_radius);
    let mut lambda = Plane::filled(b.width(), b.height(), 0.0);
    let mut upper = Plane::filled(b.width(), b.height(), 0.0);
    for i in 0..lambda.len() {
        let t = ramp_t(dist.data[i], params.ramp_radius);
        lambda.data[i] = base_lambda * (1.0 + (params.lambda_boost - 1.0) * t);
        upper.data[i] = t * r.b.data[i];
    }
    Ok(AdaptationMaps {
        lambda,
        upper_bound: upper,
    })
}
