//! Reference solver for small instances.
//!
//! Projected gradient descent on the same objective the ICM solver
//! minimizes, used to certify that ICM reaches the global optimum. Slow
//! and simple on purpose; intended for instances up to a few thousand
//! variables.

use crate::contrast::ContrastSystem;
use crate::edge::AdaptationMaps;
use crate::error::{Error, Result};
use crate::reference::BrightnessField;

/// One contrast pair, oriented so the target is `b[i] - b[j]`.
#[derive(Debug, Clone, Copy)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    pub target: f64,
}

/// Flattened problem data: pair list plus per-variable weight, reference,
/// and upper bound.
#[derive(Debug, Clone)]
pub struct DenseInstance {
    pub n: usize,
    pub pairs: Vec<Pair>,
    pub lambda: Vec<f64>,
    pub r: Vec<f64>,
    pub upper: Vec<f64>,
}

impl DenseInstance {
    /// Mirror a [`ContrastSystem`] and its adaptation maps into flat form.
    pub fn from_system(
        system: &ContrastSystem,
        maps: &AdaptationMaps,
        r: &BrightnessField,
    ) -> Self {
        let (w, h) = (system.width, system.height);
        let mut pairs = Vec::with_capacity(system.pair_count());
        for y in 0..h {
            for x in 0..w - 1 {
                pairs.push(Pair {
                    i: y * w + x,
                    j: y * w + x + 1,
                    weight: system.w_right[y * (w - 1) + x],
                    target: system.c_right[y * (w - 1) + x],
                });
            }
        }
        for y in 0..h - 1 {
            for x in 0..w {
                pairs.push(Pair {
                    i: y * w + x,
                    j: (y + 1) * w + x,
                    weight: system.w_down[y * w + x],
                    target: system.c_down[y * w + x],
                });
            }
        }
        if !system.c_down_right.is_empty() {
            let dw = w - 1;
            for y in 0..h - 1 {
                for x in 0..w - 1 {
                    pairs.push(Pair {
                        i: y * w + x,
                        j: (y + 1) * w + x + 1,
                        weight: system.w_down_right[y * dw + x],
                        target: system.c_down_right[y * dw + x],
                    });
                }
            }
            for y in 0..h - 1 {
                for x in 1..w {
                    pairs.push(Pair {
                        i: y * w + x,
                        j: (y + 1) * w + x - 1,
                        weight: system.w_down_left[y * dw + x - 1],
                        target: system.c_down_left[y * dw + x - 1],
                    });
                }
            }
        }
        Self {
            n: w * h,
            pairs,
            lambda: maps.lambda.data.clone(),
            r: r.b.data.clone(),
            upper: maps.upper_bound.data.clone(),
        }
    }

    /// Objective value at `x`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for p in &self.pairs {
            let e = x[p.i] - x[p.j] - p.target;
            total += p.weight * e * e;
        }
        for i in 0..self.n {
            let e = x[i] - self.r[i];
            total += self.lambda[i] * e * e;
        }
        total
    }

    /// Gradient of the objective at `x`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for p in &self.pairs {
            let e = 2.0 * p.weight * (x[p.i] - x[p.j] - p.target);
            g[p.i] += e;
            g[p.j] -= e;
        }
        for i in 0..self.n {
            g[i] += 2.0 * self.lambda[i] * (x[i] - self.r[i]);
        }
        g
    }

    /// Lipschitz bound used for the fixed step: twice the largest
    /// per-variable total of pair weights plus regularization weight.
    pub fn lipschitz_bound(&self) -> f64 {
        let mut row = self.lambda.clone();
        for p in &self.pairs {
            row[p.i] += p.weight;
            row[p.j] += p.weight;
        }
        2.0 * row.iter().copied().fold(0.0, f64::max)
    }

    /// Largest KKT violation at `x`: interior variables need a vanishing
    /// gradient; at an active upper bound the gradient must be
    /// non-positive (decreasing the variable may not improve the
    /// objective).
    pub fn kkt_violation(&self, x: &[f64]) -> f64 {
        let g = self.gradient(x);
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            let at_bound = x[i] >= self.upper[i] - 1e-12;
            let v = if at_bound { g[i].max(0.0) } else { g[i].abs() };
            worst = worst.max(v);
        }
        worst
    }
}

/// Iteration cap; generous because the fixed step can be slow on stiff
/// instances.
const MAX_STEPS: usize = 5_000_000;

/// Projected gradient descent with fixed step `1/L`, projecting onto
/// `x <= upper` each step, until the projected-gradient max-norm drops
/// below `tol`. Returns the minimizer of the strictly convex objective to
/// within solver precision.
pub fn oracle_solve(inst: &DenseInstance, tol: f64) -> Result<Vec<f64>> {
    if inst.lambda.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParam(
            "oracle requires a positive regularization weight everywhere".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParam(format!("tol must be > 0, got {tol}")));
    }
    let step = 1.0 / inst.lipschitz_bound();
    let mut x: Vec<f64> = inst
        .r
        .iter()
        .zip(&inst.upper)
        .map(|(&r, &u)| r.min(u))
        .collect();
    for _ in 0..MAX_STEPS {
        let g = inst.gradient(&x);
        let mut pg_norm = 0.0_f64;
        for i in 0..inst.n {
            let next = (x[i] - step * g[i]).min(inst.upper[i]);
            pg_norm = pg_norm.max((x[i] - next).abs() / step);
            x[i] = next;
        }
        if !pg_norm.is_finite() {
            return Err(Error::OracleFailure("non-finite projected gradient".into()));
        }
        if pg_norm < tol {
            return Ok(x);
        }
    }
    Err(Error::OracleFailure(format!(
        "projected gradient did not reach tol {tol} within {MAX_STEPS} steps"
    )))
}
