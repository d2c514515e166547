//! Small helpers for points of C^3 = R^6: Hermitian and symplectic pairings,
//! complex 3x3 determinants, norms.

use num_complex::Complex64;

/// A point or tangent vector of C^3.
pub type C3 = [Complex64; 3];

pub const C3_ZERO: C3 = [Complex64::new(0.0, 0.0); 3];

/// Hermitian inner product `sum conj(a_j) b_j`.
#[inline]
pub fn hermitian(a: &C3, b: &C3) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

/// Real (R^6) inner product.
#[inline]
pub fn inner(a: &C3, b: &C3) -> f64 {
    hermitian(a, b).re
}

/// Standard symplectic form `sum dx_j ^ dy_j` evaluated on (a, b).
#[inline]
pub fn omega(a: &C3, b: &C3) -> f64 {
    hermitian(a, b).im
}

#[inline]
pub fn norm_sq(a: &C3) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()
}

#[inline]
pub fn dist(a: &C3, b: &C3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    norm_sq(&d).sqrt()
}

/// Complex determinant of the 3x3 matrix with columns (a, b, c).
#[inline]
pub fn det3(a: &C3, b: &C3, c: &C3) -> Complex64 {
    a[0] * (b[1] * c[2] - c[1] * b[2]) - b[0] * (a[1] * c[2] - c[1] * a[2])
        + c[0] * (a[1] * b[2] - b[1] * a[2])
}

#[inline]
pub fn scale(a: &C3, s: f64) -> C3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn cscale(a: &C3, s: Complex64) -> C3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn add(a: &C3, b: &C3) -> C3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &C3, b: &C3) -> C3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Area density of the parallelogram spanned by two tangent vectors.
#[inline]
pub fn gram_area(a: &C3, b: &C3) -> f64 {
    let aa = norm_sq(a);
    let bb = norm_sq(b);
    let ab = inner(a, b);
    (aa * bb - ab * ab).max(0.0).sqrt()
}

/// Volume density of the parallelepiped spanned by three tangent vectors.
pub fn gram_volume(a: &C3, b: &C3, c: &C3) -> f64 {
    let g = [
        [norm_sq(a), inner(a, b), inner(a, c)],
        [inner(a, b), norm_sq(b), inner(b, c)],
        [inner(a, c), inner(b, c), norm_sq(c)],
    ];
    let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
        - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    det.max(0.0).sqrt()
}
