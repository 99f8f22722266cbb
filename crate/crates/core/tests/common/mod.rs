//! Synthetic scenes shared by the integration suites.
//!
//! No HDR captures ship with the repository, so the tests synthesize
//! scenes with photographic structure (multi-decade range, strong edges,
//! fine texture) and, where a test wants a "file", push them through the
//! Radiance RGBE writer/reader round trip.

use tonemap_core::{load_radiance_hdr, write_radiance_hdr, HdrImage, Plane};

/// Deterministic pseudo-random stream (splitmix64).
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Grayscale luminance plane — replicated over RGB.
pub fn gray_image(y: &Plane) -> HdrImage {
    HdrImage::new(y.clone(), y.clone(), y.clone()).unwrap()
}

/// Two flat plateaus splitting the image vertically, `ratio`:1 apart.
pub fn two_plateau(width: usize, height: usize, ratio: f64) -> HdrImage {
    let y = Plane::from_fn(width, height, |x, _| {
        if x < width / 2 {
            1.0
        } else {
            1.0 / ratio
        }
    });
    gray_image(&y)
}

/// Bright disk of luminance 1 on a dark background `1/contrast`.
pub fn bright_disk(width: usize, height: usize, radius: f64, contrast: f64) -> HdrImage {
    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    let y = Plane::from_fn(width, height, |x, yy| {
        let d = ((x as f64 - cx).powi(2) + (yy as f64 - cy).powi(2)).sqrt();
        if d <= radius {
            1.0
        } else {
            1.0 / contrast
        }
    });
    gray_image(&y)
}

/// Smooth horizontal exponential ramp spanning `decades` orders of
/// magnitude.
pub fn smooth_ramp(width: usize, height: usize, decades: f64) -> HdrImage {
    let y = Plane::from_fn(width, height, |x, _| {
        10f64.powf(-decades * (1.0 - x as f64 / (width - 1).max(1) as f64))
    });
    gray_image(&y)
}

/// Log-uniform per-pixel noise across `decades` orders of magnitude.
pub fn noise_scene(width: usize, height: usize, seed: u64, decades: f64) -> HdrImage {
    let mut rng = Rng::new(seed);
    let y = Plane::from_fn(width, height, |_, _| 10f64.powf(-decades * rng.uniform()));
    gray_image(&y)
}

/// Textured two-plateau scene: a hard step plus smooth detail and grain.
pub fn textured_step(width: usize, height: usize, seed: u64, ratio: f64) -> HdrImage {
    let mut rng = Rng::new(seed);
    let y = Plane::from_fn(width, height, |x, yy| {
        let base = if x < width / 2 { 1.0 } else { 1.0 / ratio };
        let wave = 0.15 * ((x as f64 * 0.7).sin() + (yy as f64 * 0.45).cos());
        let grain = rng.range(-0.2, 0.2);
        base * (wave + grain).exp()
    });
    gray_image(&y)
}

fn smoothstep(edge0: f64, edge1: f64, x: f64) -> f64 {
    let t = ((x - edge0) / (edge1 - edge0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Dim interior with a bright window: the classic backlit-room layout.
pub fn scene_indoor_window(width: usize, height: usize, seed: u64) -> HdrImage {
    let mut rng = Rng::new(seed);
    let (wf, hf) = (width as f64, height as f64);
    let mut y = Plane::from_fn(width, height, |x, yy| {
        let (xf, yf) = (x as f64, yy as f64);
        // room: dim with a gentle falloff toward the corners
        let vign = 1.0 - 0.5 * (((xf / wf - 0.35).powi(2) + (yf / hf - 0.6).powi(2)) * 2.0);
        let mut v = 2e-3 * vign.max(0.2);
        // window: a bright rectangle with a soft sky gradient
        let in_x = smoothstep(0.55 * wf, 0.58 * wf, xf) * (1.0 - smoothstep(0.88 * wf, 0.91 * wf, xf));
        let in_y = smoothstep(0.15 * hf, 0.18 * hf, yf) * (1.0 - smoothstep(0.62 * hf, 0.65 * hf, yf));
        let window = in_x * in_y;
        if window > 0.0 {
            let sky = 1.0 - 0.6 * (yf / hf);
            v = v * (1.0 - window) + window * sky;
        }
        // furniture-ish darker blocks
        if xf > 0.1 * wf && xf < 0.3 * wf && yf > 0.7 * hf {
            v *= 0.35;
        }
        v
    });
    // fine grain so the contrast term has real texture to match
    for v in &mut y.data {
        *v *= rng.range(-0.15, 0.15).exp();
    }
    gray_image(&y)
}

/// Dark vault pierced by bright circular windows.
pub fn scene_vault(width: usize, height: usize, seed: u64) -> HdrImage {
    let mut rng = Rng::new(seed);
    let (wf, hf) = (width as f64, height as f64);
    let windows = [
        (0.25 * wf, 0.25 * hf, 0.08 * wf),
        (0.5 * wf, 0.18 * hf, 0.1 * wf),
        (0.75 * wf, 0.25 * hf, 0.08 * wf),
    ];
    let mut y = Plane::from_fn(width, height, |x, yy| {
        let (xf, yf) = (x as f64, yy as f64);
        // stone interior, brighter toward the floor
        let mut v = 4e-4 * (1.0 + 1.5 * yf / hf);
        for &(cx, cy, rad) in &windows {
            let d = ((xf - cx).powi(2) + (yf - cy).powi(2)).sqrt();
            let core = 1.0 - smoothstep(rad * 0.9, rad, d);
            if core > 0.0 {
                v = v * (1.0 - core) + core * 0.9;
            }
            // faint glow on the surrounding wall
            let glow = (-d / (rad * 2.0)).exp() * 0.01;
            v += glow;
        }
        v
    });
    for v in &mut y.data {
        *v *= rng.range(-0.25, 0.25).exp();
    }
    gray_image(&y)
}

/// Sunlit exterior: bright sky band, mid ground, deep shadow strip.
pub fn scene_outdoor(width: usize, height: usize, seed: u64) -> HdrImage {
    let mut rng = Rng::new(seed);
    let (wf, hf) = (width as f64, height as f64);
    let mut y = Plane::from_fn(width, height, |x, yy| {
        let (xf, yf) = (x as f64, yy as f64);
        let horizon = 0.4 * hf;
        if yf < horizon {
            // sky brightening toward a sun spot
            let d = ((xf - 0.8 * wf).powi(2) + (yf - 0.15 * hf).powi(2)).sqrt();
            0.25 + 0.75 * (-d / (0.12 * wf)).exp()
        } else {
            // ground with a shadow strip cast across it
            let ground = 0.02 * (1.0 + 0.5 * (yf - horizon) / (hf - horizon));
            let in_shadow = xf > 0.2 * wf
                && xf < 0.55 * wf
                && (xf - 0.2 * wf) * 0.6 < (yf - horizon);
            if in_shadow {
                ground * 5e-3
            } else {
                ground
            }
        }
    });
    for v in &mut y.data {
        *v *= rng.range(-0.2, 0.2).exp();
    }
    gray_image(&y)
}

/// Serialize-and-reload through the Radiance RGBE container, exactly as a
/// file on disk would arrive.
pub fn through_radiance_container(img: &HdrImage) -> HdrImage {
    load_radiance_hdr(&write_radiance_hdr(img)).unwrap()
}
