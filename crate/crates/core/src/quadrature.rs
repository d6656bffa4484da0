//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

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

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub absolute: f64,
    pub relative: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            absolute: 1e-8,
            relative: 1e-6,
            max_intervals: 2000,
        }
    }
}

impl Tolerance {
    pub fn tight() -> Self {
        Self {
            absolute: 1e-13,
            relative: 1e-11,
            max_intervals: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64> {
        let y = f(x)?;
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteIntegrand { x })
        }
    };
    let fc = eval(center)?;
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = eval(center - dx)? + eval(center + dx)?;
        kron += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Ok((kron * half, ((kron - gauss) * half).abs()))
}

/// Integrates a fallible integrand over `[a, b]`.
pub fn try_integrate<F>(f: F, a: f64, b: f64, tol: &Tolerance) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_with_breakpoints(f, &[a, b], tol)
}

/// Integrates over `points[0]..points[last]`, seeding the adaptive process
/// with one segment per consecutive pair. Breakpoints should sit on kinks,
/// discontinuities or sharp peaks of the integrand.
pub fn try_integrate_with_breakpoints<F>(mut f: F, points: &[f64], tol: &Tolerance) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    if points.len() < 2 {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (first, last) = (points[0], points[points.len() - 1]);
    if first > last {
        let reversed: Vec<f64> = points.iter().rev().copied().collect();
        let out = try_integrate_with_breakpoints(f, &reversed, tol)?;
        return Ok(Integral {
            value: -out.value,
            ..out
        });
    }

    let mut heap = BinaryHeap::new();
    let mut settled_value = 0.0;
    let mut settled_error = 0.0;
    let mut running_value = 0.0;
    let mut running_error = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (value, error) = kronrod(&mut f, a, b)?;
        evaluations += 15;
        running_value += value;
        running_error += error;
        heap.push(Segment { a, b, value, error });
    }

    loop {
        let target = tol.absolute.max(tol.relative * running_value.abs());
        if running_error <= target {
            let value = settled_value + heap.iter().map(|s| s.value).sum::<f64>();
            let error = settled_error + heap.iter().map(|s| s.error).sum::<f64>();
            return Ok(Integral {
                value,
                error,
                evaluations,
            });
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::Quadrature {
                a: first,
                b: last,
                error: running_error,
                intervals: 0,
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        // Segment has hit floating-point resolution; keep its contribution.
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-14 * (worst.a.abs() + worst.b.abs()) {
            settled_value += worst.value;
            settled_error += worst.error;
            if settled_error > target {
                return Err(Error::Quadrature {
                    a: first,
                    b: last,
                    error: settled_error,
                    intervals: heap.len(),
                });
            }
            continue;
        }
        if heap.len() + 2 > tol.max_intervals {
            return Err(Error::Quadrature {
                a: first,
                b: last,
                error: running_error,
                intervals: heap.len() + 1,
            });
        }
        let (lv, le) = kronrod(&mut f, worst.a, mid)?;
        let (rv, re) = kronrod(&mut f, mid, worst.b)?;
        evaluations += 30;
        running_value += lv + rv - worst.value;
        running_error = (running_error + le + re - worst.error).max(0.0);
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
    }
}

pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: &Tolerance) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, tol)
}

pub fn integrate_with_breakpoints<F>(mut f: F, points: &[f64], tol: &Tolerance) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_with_breakpoints(|x| Ok(f(x)), points, tol)
}
