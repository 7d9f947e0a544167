//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const MAX_SUBDIVISIONS_LIMIT: usize = 1_000_000;

/// Tolerances and subdivision budget for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(domain(format!(
                "abs_tol must be finite and > 0, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(domain(format!(
                "rel_tol must be finite and > 0, got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 || self.max_subdivisions > MAX_SUBDIVISIONS_LIMIT {
            return Err(domain(format!(
                "max_subdivisions must be in 1..={MAX_SUBDIVISIONS_LIMIT}, got {}",
                self.max_subdivisions
            )));
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-300,
            rel_tol: 1e-12,
            max_subdivisions: 20_000,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    // Floor at roundoff level so smooth integrands stop refining.
    let error = ((kronrod - gauss) * half)
        .abs()
        .max(50.0 * f64::EPSILON * abs_sum * half.abs());
    Segment {
        a,
        b,
        value,
        error: if error.is_nan() { f64::INFINITY } else { error },
    }
}

pub(crate) fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(domain(format!("finite bounds required, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b);
    let mut total = first.value;
    let mut total_err = first.error;
    heap.push(first);
    let mut subdivisions = 1;
    loop {
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            let estimate = neumaier_sum(heap.iter().map(|s| s.value));
            return Err(Error::NonConvergence {
                estimate,
                error_bound: total_err,
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // Resynchronise the running sums to avoid drift.
            total = neumaier_sum(heap.iter().map(|s| s.value));
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let result = neumaier_sum(heap.iter().map(|s| s.value));
    if result.is_finite() {
        Ok(result)
    } else {
        Err(Error::NonConvergence {
            estimate: result,
            error_bound: total_err,
        })
    }
}

/// Integrates `f` over `[a, inf)` with the map `y = a + u / (1 - u)`.
pub fn integrate_from<F: Fn(f64) -> f64>(f: F, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate(
        |u: f64| {
            let w = 1.0 - u;
            let v = f(a + u / w) / (w * w);
            if v.is_finite() {
                v
            } else if u > 1.0 - 1e-10 {
                // far tail of a decaying integrand evaluated at an overflowed abscissa
                0.0
            } else {
                v
            }
        },
        0.0,
        1.0,
        spec,
    )
}

/// Integrates `f` over `[0, inf)`.
///
/// Substitutes `y = t^2` first, which removes an integrable `y^{-1/2}`
/// endpoint singularity, then maps the half-line onto `[0, 1)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    integrate_from(|t: f64| 2.0 * t * f(t * t), 0.0, spec)
}
