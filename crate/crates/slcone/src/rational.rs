//! Rational detection by continued fractions.
//!
//! Floating-point data can never prove rationality; `detect` reports the
//! first convergent within `tol`, bounded by `max_den`, or None. Callers
//! phrase a None as "not detected at this tolerance".

/// Genericity guard: a convergent p/q only counts as a detection when it
/// approximates x much better than a generic real would (every real is
/// within ~0.5/q^2 of some convergent, so a plain tolerance test would
/// accept any input once q is large enough).
const SHARPNESS: f64 = 1e-3;

/// Rational detection: the first continued-fraction convergent p/q of `x`
/// with q <= max_den, |x - p/q| <= tol, and |x - p/q| <= SHARPNESS / q^2.
/// Returns (p, q) in lowest terms with q > 0, or None ("not detected at
/// this tolerance", never "irrational").
pub fn detect(x: f64, max_den: u64, tol: f64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let mut a = x.floor();
    let mut frac = x - a;
    // convergents p_k / q_k
    let (mut p0, mut q0) = (1i128, 0i128);
    let (mut p1, mut q1) = (a as i128, 1i128);
    for _ in 0..64 {
        let err = if q1 > 0 {
            (x - p1 as f64 / q1 as f64).abs()
        } else {
            f64::INFINITY
        };
        if err <= tol && err <= SHARPNESS / (q1 as f64 * q1 as f64) {
            let (mut p, mut q) = (p1, q1);
            let g = gcd(p.unsigned_abs(), q.unsigned_abs()).max(1) as i128;
            p /= g;
            q /= g;
            return Some((p as i64, q as i64));
        }
        if frac.abs() < 1e-18 {
            break;
        }
        let next = 1.0 / frac;
        a = next.floor();
        frac = next - a;
        let p2 = a as i128 * p1 + p0;
        let q2 = a as i128 * q1 + q0;
        if q2 as u128 > max_den as u128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    None
}

pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Parse "m/n" or a plain decimal.
pub fn parse_ratio(s: &str) -> Option<(f64, Option<(i64, i64)>)> {
    if let Some((m, n)) = s.split_once('/') {
        let m: i64 = m.trim().parse().ok()?;
        let n: i64 = n.trim().parse().ok()?;
        if n == 0 {
            return None;
        }
        Some((m as f64 / n as f64, Some((m, n))))
    } else {
        let v: f64 = s.trim().parse().ok()?;
        Some((v, None))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_simple_fractions() {
        assert_eq!(detect(0.5, 1000, 1e-12), Some((1, 2)));
        assert_eq!(detect(2.0 / 3.0, 1000, 1e-12), Some((2, 3)));
        assert_eq!(detect(-7.0 / 13.0, 1000, 1e-12), Some((-7, 13)));
        assert_eq!(detect(3.0, 1000, 1e-12), Some((3, 1)));
        assert_eq!(detect(0.0, 1000, 1e-12), Some((0, 1)));
    }

    #[test]
    fn rejects_irrational_proxies() {
        // 1/sqrt(2) has no small-denominator convergent within 1e-9
        assert_eq!(detect(std::f64::consts::FRAC_1_SQRT_2, 1_000_000, 1e-9), None);
        assert_eq!(detect(std::f64::consts::PI - 3.0, 1_000, 1e-12), None);
    }

    #[test]
    fn tolerance_aware() {
        // 0.3333 is 3333/10000 exactly, but within 1e-4 of 1/3
        assert_eq!(detect(0.3333, 100, 1e-4), Some((1, 3)));
        assert_eq!(detect(0.3333, 100, 1e-9), None);
    }

    #[test]
    fn parses_ratios() {
        assert_eq!(parse_ratio("1/2"), Some((0.5, Some((1, 2)))));
        let (v, r) = parse_ratio("0.25").unwrap();
        assert_eq!((v, r), (0.25, None));
        assert!(parse_ratio("1/0").is_none());
        assert!(parse_ratio("abc").is_none());
    }
}
