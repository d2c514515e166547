//! Adaptive Gauss-Kronrod quadrature (7-15 pair) with interval bisection.
//!
//! Used for the phase integrals `theta_j(t) = int J mu_j / R_j^2` and as the
//! independent defining-integral oracle for the elliptic routines.

use crate::error::{Error, Result};

// Nodes and weights of the 15-point Kronrod rule on [-1, 1] (positive half);
// the embedded 7-point Gauss rule uses the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_3,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_54,
    0.104_790_010_322_250_17,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod panel: returns (kronrod value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for i in 0..8 {
        let x = h * XGK[i];
        let (flo, fhi) = (f(c - x), f(c + x));
        let pair = if i == 7 { f(c) } else { flo + fhi };
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrate `f` over [a, b] to absolute tolerance `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    integrate_split(f, a, b, &[], abs_tol)
}

const MAX_PANELS: usize = 65_536;

struct Panel {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive integration: the worst panel (by error estimate) is
/// bisected until the summed estimates meet `abs_tol` or the panel budget is
/// exhausted. Optional interior `splits` seed panel boundaries at known
/// integrand features (extrema, kinks).
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    splits: &[f64],
    abs_tol: f64,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite("quadrature bounds"));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut pts = vec![a];
    for &s in splits {
        if (a < s && s < b) || (b < s && s < a) {
            pts.push(s);
        }
    }
    pts.push(b);

    let mut heap = std::collections::BinaryHeap::new();
    let mut total_err = 0.0;
    for w in pts.windows(2) {
        let (value, err) = gk15(&f, w[0], w[1]);
        total_err += err;
        heap.push(Panel { err, a: w[0], b: w[1], value });
    }

    while total_err > abs_tol {
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        // an unsplittable worst panel marks the roundoff floor
        let lo = worst.a.min(worst.b);
        let hi = worst.a.max(worst.b);
        if mid <= lo || mid >= hi || heap.len() >= MAX_PANELS {
            return Err(Error::QuadratureDidNotConverge {
                tol: abs_tol,
                reached: total_err,
            });
        }
        total_err -= worst.err;
        for (pa, pb) in [(worst.a, mid), (mid, worst.b)] {
            let (value, err) = gk15(&f, pa, pb);
            total_err += err;
            heap.push(Panel { err, a: pa, b: pb, value });
        }
    }
    Ok(heap.iter().map(|p| p.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-14).unwrap();
        assert!((v - 8.0).abs() < 1e-13, "got {v}");
    }

    #[test]
    fn sine_over_period() {
        let v = integrate(f64::sin, 0.0, PI, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let v = integrate(f64::sin, PI, 0.0, 1e-13).unwrap();
        assert!((v + 2.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_peak_needs_adaptivity() {
        // Lorentzian of half-width 1e-4 centered mid-interval.
        let w = 1e-4;
        let v = integrate(|x| w / (w * w + (x - 0.3) * (x - 0.3)), 0.0, 1.0, 1e-11).unwrap();
        let exact = ((1.0 - 0.3) / w).atan() + (0.3 / w).atan();
        assert!((v - exact).abs() < 1e-10, "got {v}, exact {exact}");
    }

    #[test]
    fn split_points_help_kinks() {
        let v = integrate_split(|x: f64| x.abs(), -1.0, 1.0, &[0.0], 1e-13).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }
}
