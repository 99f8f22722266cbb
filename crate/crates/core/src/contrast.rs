//! Sparse contrast-matching system.
//!
//! Local contrast between two pixels is the difference of their log
//! luminances. The system stores, for every adjacent pair, the target
//! contrast of the original scene and a pair weight, and evaluates the
//! full objective: weighted squared contrast mismatch plus the per-pixel
//! regularization toward the reference.

use crate::edge::AdaptationMaps;
use crate::plane::Plane;
use crate::reference::BrightnessField;

/// Which pixel pairs participate in contrast matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    /// Horizontal and vertical neighbors.
    #[default]
    Four,
    /// Also diagonal neighbors, weighted by 1/sqrt(2) for their distance.
    Eight,
}

/// Adjacency pair list with target contrasts and weights. Each unordered
/// pair is stored once, oriented so the target is `B_first - B_second`
/// with `first` the left/top pixel.
#[derive(Debug, Clone)]
pub struct ContrastSystem {
    pub width: usize,
    pub height: usize,
    pub connectivity: Connectivity,
    /// Pair `(x,y)-(x+1,y)`, indexed `y*(width-1)+x`.
    pub c_right: Vec<f64>,
    pub w_right: Vec<f64>,
    /// Pair `(x,y)-(x,y+1)`, indexed `y*width+x`.
    pub c_down: Vec<f64>,
    pub w_down: Vec<f64>,
    /// Pair `(x,y)-(x+1,y+1)`, indexed `y*(width-1)+x`. Empty for
    /// 4-connectivity.
    pub c_down_right: Vec<f64>,
    pub w_down_right: Vec<f64>,
    /// Pair `(x,y)-(x-1,y+1)`, indexed `y*(width-1)+(x-1)`. Empty for
    /// 4-connectivity.
    pub c_down_left: Vec<f64>,
    pub w_down_left: Vec<f64>,
}

const DIAGONAL_WEIGHT: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Build the pair system from the scene brightness: every adjacent pair's
/// target is the brightness difference, every weight is 1 (diagonals, if
/// enabled, get 1/sqrt(2)).
pub fn build_contrast_system(b: &BrightnessField) -> ContrastSystem {
    build_contrast_system_with(b, Connectivity::Four)
}

/// [`build_contrast_system`] with an explicit pair topology.
pub fn build_contrast_system_with(b: &BrightnessField, connectivity: Connectivity) -> ContrastSystem {
    let (w, h) = (b.width(), b.height());
    let mut sys = ContrastSystem {
        width: w,
        height: h,
        connectivity,
        c_right: Vec::with_capacity((w - 1) * h),
        w_right: vec![1.0; (w - 1) * h],
        c_down: Vec::with_capacity(w * (h - 1)),
        w_down: vec![1.0; w * (h - 1)],
        c_down_right: Vec::new(),
        w_down_right: Vec::new(),
        c_down_left: Vec::new(),
        w_down_left: Vec::new(),
    };
    for y in 0..h {
        for x in 0..w - 1 {
            sys.c_right.push(b.b.get(x, y) - b.b.get(x + 1, y));
        }
    }
    for y in 0..h - 1 {
        for x in 0..w {
            sys.c_down.push(b.b.get(x, y) - b.b.get(x, y + 1));
        }
    }
    if connectivity == Connectivity::Eight {
        let diag = (w - 1) * (h - 1);
        sys.w_down_right = vec![DIAGONAL_WEIGHT; diag];
        sys.w_down_left = vec![DIAGONAL_WEIGHT; diag];
        for y in 0..h - 1 {
            for x in 0..w - 1 {
                sys.c_down_right.push(b.b.get(x, y) - b.b.get(x + 1, y + 1));
            }
        }
        for y in 0..h - 1 {
            for x in 1..w {
                sys.c_down_left.push(b.b.get(x, y) - b.b.get(x - 1, y + 1));
            }
        }
    }
    sys
}

impl ContrastSystem {
    /// Number of stored pairs.
    pub fn pair_count(&self) -> usize {
        self.c_right.len() + self.c_down.len() + self.c_down_right.len() + self.c_down_left.len()
    }

    /// Weighted neighbor sums for one pixel: `(sum_w, sum_w*(b_j + c_ij))`
    /// with the target oriented from the pixel toward each neighbor.
    /// Neighbor order is fixed, so the sums are reproducible regardless of
    /// sweep parallelism.
    #[inline]
    pub fn accumulate_neighbors(&self, b: &Plane, x: usize, y: usize) -> (f64, f64) {
        let w = self.width;
        let mut sum_w = 0.0;
        let mut sum_wbc = 0.0;
        {
            let mut add = |weight: f64, neighbor: f64, c_oriented: f64| {
                sum_w += weight;
                sum_wbc += weight * (neighbor + c_oriented);
            };
            if x > 0 {
                let p = y * (w - 1) + (x - 1);
                add(self.w_right[p], b.get(x - 1, y), -self.c_right[p]);
            }
            if x + 1 < w {
                let p = y * (w - 1) + x;
                add(self.w_right[p], b.get(x + 1, y), self.c_right[p]);
            }
            if y > 0 {
                let p = (y - 1) * w + x;
                add(self.w_down[p], b.get(x, y - 1), -self.c_down[p]);
            }
            if y + 1 < self.height {
                let p = y * w + x;
                add(self.w_down[p], b.get(x, y + 1), self.c_down[p]);
            }
            if self.connectivity == Connectivity::Eight {
                let dw = w - 1;
                if x > 0 && y > 0 {
                    let p = (y - 1) * dw + (x - 1);
                    add(self.w_down_right[p], b.get(x - 1, y - 1), -self.c_down_right[p]);
                }
                if x + 1 < w && y > 0 {
                    let p = (y - 1) * dw + x;
                    add(self.w_down_left[p], b.get(x + 1, y - 1), -self.c_down_left[p]);
                }
                if x > 0 && y + 1 < self.height {
                    let p = y * dw + (x - 1);
                    add(self.w_down_left[p], b.get(x - 1, y + 1), self.c_down_left[p]);
                }
                if x + 1 < w && y + 1 < self.height {
                    let p = y * dw + x;
                    add(self.w_down_right[p], b.get(x + 1, y + 1), self.c_down_right[p]);
                }
            }
        }
        (sum_w, sum_wbc)
    }
}

/// Full objective: contrast mismatch over all pairs plus the per-pixel
/// regularization toward the reference. Non-negative; zero only when every
/// pair contrast is met and the field matches the reference wherever the
/// weight is positive.
pub fn objective(
    system: &ContrastSystem,
    b_hat: &Plane,
    maps: &AdaptationMaps,
    r: &BrightnessField,
) -> f64 {
    let (w, h) = (system.width, system.height);
    let mut total = 0.0;
    for y in 0..h {
        for x in 0..w - 1 {
            let p = y * (w - 1) + x;
            let e = b_hat.get(x, y) - b_hat.get(x + 1, y) - system.c_right[p];
            total += system.w_right[p] * e * e;
        }
    }
    for y in 0..h - 1 {
        for x in 0..w {
            let p = y * w + x;
            let e = b_hat.get(x, y) - b_hat.get(x, y + 1) - system.c_down[p];
            total += system.w_down[p] * e * e;
        }
    }
    if system.connectivity == Connectivity::Eight {
        let dw = w - 1;
        for y in 0..h - 1 {
            for x in 0..w - 1 {
                let p = y * dw + x;
                let e = b_hat.get(x, y) - b_hat.get(x + 1, y + 1) - system.c_down_right[p];
                total += system.w_down_right[p] * e * e;
            }
        }
        for y in 0..h - 1 {
            for x in 1..w {
                let p = y * dw + (x - 1);
                let e = b_hat.get(x, y) - b_hat.get(x - 1, y + 1) - system.c_down_left[p];
                total += system.w_down_left[p] * e * e;
            }
        }
    }
    for i in 0..b_hat.len() {
        let e = b_hat.data[i] - r.b.data[i];
        total += maps.lambda.data[i] * e * e;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::Plane;

    fn brightness(width: usize, height: usize, data: Vec<f64>) -> BrightnessField {
        BrightnessField {
            b: Plane::from_data(width, height, data).unwrap(),
        }
    }

    #[test]
    fn constant_brightness_gives_zero_targets() {
        let b = brightness(3, 3, vec![-0.7; 9]);
        let sys = build_contrast_system(&b);
        assert!(sys.c_right.iter().chain(&sys.c_down).all(|&c| c == 0.0));
    }

    #[test]
    fn target_is_log_luminance_ratio() {
        // Y_left = 4 * Y_right -> c = ln 4
        let b = brightness(2, 1, vec![4.0_f64.ln(), 0.0]);
        let sys = build_contrast_system(&b);
        assert!((sys.c_right[0] - 4.0_f64.ln()).abs() < 1e-15);
        assert!((sys.c_right[0] - 1.386).abs() < 1e-3);
    }

    #[test]
    fn three_by_three_has_twelve_pairs() {
        let b = brightness(3, 3, vec![0.0; 9]);
        assert_eq!(build_contrast_system(&b).pair_count(), 12);
        assert_eq!(
            build_contrast_system_with(&b, Connectivity::Eight).pair_count(),
            12 + 8
        );
    }

    #[test]
    fn objective_zero_when_field_meets_targets_and_reference() {
        let r = brightness(2, 2, vec![-0.3, -0.9, -0.1, -0.4]);
        let sys = build_contrast_system(&r);
        let maps = AdaptationMaps::uniform(2, 2, 1.0);
        assert_eq!(objective(&sys, &r.b, &maps, &r), 0.0);
    }

    #[test]
    fn objective_regularizer_vanishes_at_reference() {
        let b = brightness(2, 2, vec![-1.0, -2.0, -0.5, -1.5]);
        let r = brightness(2, 2, vec![-0.5, -1.0, -0.25, -0.75]);
        let sys = build_contrast_system(&b);
        let maps = AdaptationMaps::uniform(2, 2, 1.0);
        // at b_hat = r only the contrast term remains
        let mut expect = 0.0;
        for (i, j, c) in [
            (0usize, 1usize, sys.c_right[0]),
            (2, 3, sys.c_right[1]),
            (0, 2, sys.c_down[0]),
            (1, 3, sys.c_down[1]),
        ] {
            let e = r.b.data[i] - r.b.data[j] - c;
            expect += e * e;
        }
        assert!((objective(&sys, &r.b, &maps, &r) - expect).abs() < 1e-15);
    }

    #[test]
    fn objective_hand_example() {
        // 1x2 field, b_hat = (0, -1), c = ln 2, lambda = 1, r = (0, 0)
        let sys = ContrastSystem {
            width: 2,
            height: 1,
            connectivity: Connectivity::Four,
            c_right: vec![2.0_f64.ln()],
            w_right: vec![1.0],
            c_down: vec![],
            w_down: vec![],
            c_down_right: vec![],
            w_down_right: vec![],
            c_down_left: vec![],
            w_down_left: vec![],
        };
        let b_hat = Plane::from_data(2, 1, vec![0.0, -1.0]).unwrap();
        let maps = AdaptationMaps::uniform(2, 1, 1.0);
        let r = brightness(2, 1, vec![0.0, 0.0]);
        let got = objective(&sys, &b_hat, &maps, &r);
        let e = 1.0 - 2.0_f64.ln();
        assert!((got - (e * e + 1.0)).abs() < 1e-15);
        assert!((got - 1.0942).abs() < 1e-4);
    }

    #[test]
    fn contrast_term_ignores_constant_shifts() {
        let b = brightness(3, 2, vec![-0.1, -0.7, -0.2, -0.9, -0.3, -0.5]);
        let sys = build_contrast_system(&b);
        let r = brightness(3, 2, vec![0.0; 6]);
        let zero_lambda = AdaptationMaps {
            lambda: Plane::filled(3, 2, 0.0),
            upper_bound: Plane::filled(3, 2, 0.0),
        };
        let shifted = b.b.map(|v| v - 1.25);
        let f0 = objective(&sys, &b.b, &zero_lambda, &r);
        let f1 = objective(&sys, &shifted, &zero_lambda, &r);
        assert_eq!(f0, 0.0);
        assert!((f1 - f0).abs() < 1e-12);
    }

    #[test]
    fn neighbor_accumulation_matches_objective_gradient() {
        // d/db_i objective = 2*(sum_w*b_i - sum_wbc) + 2*lambda*(b_i - r_i);
        // check against a central difference of the objective
        let b = brightness(3, 3, (0..9).map(|i| -((i * 7 % 5) as f64) * 0.3).collect());
        let sys = build_contrast_system_with(&b, Connectivity::Eight);
        let r = brightness(3, 3, vec![-0.2; 9]);
        let maps = AdaptationMaps::uniform(3, 3, 0.7);
        let mut field = b.b.clone();
        for y in 0..3 {
            for x in 0..3 {
                let (sum_w, sum_wbc) = sys.accumulate_neighbors(&field, x, y);
                let v = field.get(x, y);
                let analytic = 2.0 * (sum_w * v - sum_wbc)
                    + 2.0 * maps.lambda.get(x, y) * (v - r.b.get(x, y));
                let eps = 1e-6;
                field.set(x, y, v + eps);
                let fp = objective(&sys, &field, &maps, &r);
                field.set(x, y, v - eps);
                let fm = objective(&sys, &field, &maps, &r);
                field.set(x, y, v);
                let numeric = (fp - fm) / (2.0 * eps);
                assert!(
                    (analytic - numeric).abs() < 1e-6,
                    "gradient mismatch at {x},{y}: {analytic} vs {numeric}"
                );
            }
        }
    }
}
