//! Jacobi elliptic functions sn, cn, dn and the complete elliptic integral
//! Ke(k), computed by the arithmetic-geometric mean with the descending
//! Landen (amplitude) recursion.
//!
//! Conventions: modulus k with 0 <= k <= 1, and
//! `Ke(k) = int_0^{pi/2} dx / sqrt(1 - k^2 sin^2 x)`; sn and cn have period
//! 4 Ke(k) for k < 1, and k = 1 degenerates to tanh / sech exactly.

use crate::error::{Error, Result};
use serde::Serialize;

/// Elliptic modulus k, stored together with k^2.
///
/// k^2 is the quantity that arises directly from the cone data
/// (k^2 = (1-alpha^2)/(1+2 alpha) at J = 0), and squaring a computed k loses
/// precision near k = 1, so both are kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticModulus {
    k: f64,
    ksq: f64,
}

impl EllipticModulus {
    pub fn from_k(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::NonFinite("elliptic modulus"));
        }
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::ModulusOutOfRange(k));
        }
        Ok(Self { k, ksq: k * k })
    }

    pub fn from_k_squared(ksq: f64) -> Result<Self> {
        if !ksq.is_finite() {
            return Err(Error::NonFinite("elliptic modulus"));
        }
        // tolerate a few ulp of negative drift from root arithmetic
        let ksq = if (-1e-14..0.0).contains(&ksq) { 0.0 } else { ksq };
        if !(0.0..=1.0).contains(&ksq) {
            return Err(Error::ModulusOutOfRange(ksq.sqrt()));
        }
        Ok(Self { k: ksq.sqrt(), ksq })
    }

    #[inline]
    pub fn k(&self) -> f64 {
        self.k
    }

    #[inline]
    pub fn k_squared(&self) -> f64 {
        self.ksq
    }

    /// Complementary parameter k'^2 = 1 - k^2.
    #[inline]
    pub fn complement_squared(&self) -> f64 {
        1.0 - self.ksq
    }
}

/// Values of the three Jacobi functions at a common argument.
#[derive(Debug, Clone, Copy)]
pub struct JacobiValues {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Complete elliptic integral of the first kind, via the AGM:
/// Ke(k) = pi / (2 agm(1, k')).
///
/// Errors with `DivergentModulus` at k = 1 (logarithmic divergence).
pub fn complete_k(modulus: EllipticModulus) -> Result<f64> {
    if modulus.ksq >= 1.0 {
        return Err(Error::DivergentModulus);
    }
    let mut a = 1.0_f64;
    let mut b = modulus.complement_squared().sqrt();
    for _ in 0..64 {
        if (a - b).abs() <= 2.0 * f64::EPSILON * a {
            break;
        }
        let am = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = am;
    }
    Ok(std::f64::consts::FRAC_PI_2 / a)
}

const MAX_AGM_LEVELS: usize = 32;

/// Jacobi sn, cn, dn at argument `t`.
///
/// k = 0 and k = 1 short-circuit to the trigonometric and hyperbolic
/// degenerations; otherwise the amplitude am(t, k) is computed by the AGM
/// ladder and the arcsine descent, with dn = sqrt(k'^2 + k^2 cn^2) (bounded
/// away from zero by k', so no cancellation near the quarter period).
pub fn jacobi_sn_cn_dn(t: f64, modulus: EllipticModulus) -> Result<JacobiValues> {
    if !t.is_finite() {
        return Err(Error::NonFinite("jacobi argument"));
    }
    let ksq = modulus.ksq;
    if ksq == 0.0 {
        return Ok(JacobiValues { sn: t.sin(), cn: t.cos(), dn: 1.0 });
    }
    if ksq == 1.0 {
        let sech = 1.0 / t.cosh();
        return Ok(JacobiValues { sn: t.tanh(), cn: sech, dn: sech });
    }

    // ascending AGM ladder: a_n, c_n = ((a+b)/2, (a-b)/2) of the previous
    // level, stopping when c_n is negligible
    let mut a_arr = [0.0_f64; MAX_AGM_LEVELS];
    let mut c_arr = [0.0_f64; MAX_AGM_LEVELS];
    let mut a_prev = 1.0_f64;
    let mut b_prev = modulus.complement_squared().sqrt();
    let mut levels = 0;
    for i in 1..MAX_AGM_LEVELS {
        let a_i = 0.5 * (a_prev + b_prev);
        let c_i = 0.5 * (a_prev - b_prev);
        let b_i = (a_prev * b_prev).sqrt();
        a_arr[i] = a_i;
        c_arr[i] = c_i;
        a_prev = a_i;
        b_prev = b_i;
        levels = i;
        if c_i.abs() <= f64::EPSILON * a_i {
            break;
        }
    }

    // amplitude descent: phi_{n-1} = (phi_n + asin((c_n/a_n) sin phi_n)) / 2
    let mut phi = (1u64 << levels) as f64 * a_arr[levels] * t;
    for i in (1..=levels).rev() {
        let s = (c_arr[i] / a_arr[i] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + s.asin());
    }

    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (modulus.complement_squared() + ksq * cn * cn).sqrt();
    Ok(JacobiValues { sn, cn, dn })
}

/// Labeled turning values Gamma_2 <= 0 <= Gamma_1 <= Gamma_3 of the cone
/// cubic, plus the derived rate and modulus. See `family::cubic_roots`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EllipticData {
    pub modulus: EllipticModulus,
    /// Growth rate r; the sn argument is r t.
    pub rate: f64,
    /// Ke(k); infinite (separatrix) cases store f64::INFINITY.
    pub quarter_period: f64,
    /// gamma oscillates over [gamma_lo, gamma_hi]; gamma_far is the third
    /// turning value (infinite when mu_3 = 0).
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub gamma_far: f64,
    pub degeneracy: Degeneracy,
}

/// How (alpha, J) sits relative to the degenerate strata of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Degeneracy {
    /// Interior parameters: genuine oscillation, finite period.
    None,
    /// J = 1/(3 sqrt 3): gamma identically zero (flat Clifford torus).
    GammaZero,
    /// alpha = 1: mu_3 = 0, third turning value at infinity; y is constant
    /// (flat Clifford torus) although gamma oscillates harmonically.
    MuThreeZero,
    /// alpha = 0, J = 0: k = 1 separatrix, infinite period (the totally
    /// geodesic sphere).
    Separatrix,
}

impl EllipticData {
    /// Basic period T = 2 Ke(k) / r of gamma (and of y = |Az|^2).
    pub fn basic_period(&self) -> f64 {
        if self.degeneracy == Degeneracy::Separatrix {
            f64::INFINITY
        } else {
            2.0 * self.quarter_period / self.rate
        }
    }

    /// gamma(t) and its derivative, from the sn^2 closed form anchored at
    /// the minimum: gamma(0) = gamma_lo, gamma_dot(0) = 0.
    pub fn gamma(&self, t: f64) -> Result<(f64, f64)> {
        let jv = jacobi_sn_cn_dn(self.rate * t, self.modulus)?;
        let span = self.gamma_lo - self.gamma_hi;
        let g = self.gamma_lo - span * jv.sn * jv.sn;
        let gdot = -2.0 * self.rate * span * jv.sn * jv.cn * jv.dn;
        Ok((g, gdot))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn m(ksq: f64) -> EllipticModulus {
        EllipticModulus::from_k_squared(ksq).unwrap()
    }

    /// Defining-integral oracle for Ke, independent of the AGM path.
    fn complete_k_by_quadrature(ksq: f64) -> f64 {
        quad::integrate(
            |x| 1.0 / (1.0 - ksq * x.sin().powi(2)).sqrt(),
            0.0,
            FRAC_PI_2,
            1e-14,
        )
        .unwrap()
    }

    #[test]
    fn k_zero_is_pi_over_two() {
        assert!((complete_k(m(0.0)).unwrap() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn k_matches_quadrature_oracle() {
        for ksq in [0.375, 0.1, 0.5, 0.9, 0.99] {
            let agm = complete_k(m(ksq)).unwrap();
            let oracle = complete_k_by_quadrature(ksq);
            assert!(
                (agm - oracle).abs() <= 1e-12 * oracle,
                "ksq={ksq}: agm={agm}, oracle={oracle}"
            );
        }
    }

    #[test]
    fn k_blows_up_logarithmically() {
        let near_one = EllipticModulus::from_k(0.999999).unwrap();
        let v = complete_k(near_one).unwrap();
        assert!(v > 7.0, "Ke(0.999999) = {v}");
        // monotone increase toward the divergence
        let mut prev = 0.0;
        for ksq in [0.0, 0.3, 0.6, 0.9, 0.999, 0.999999999] {
            let v = complete_k(m(ksq)).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn k_domain_errors() {
        assert!(matches!(complete_k(m(1.0)), Err(Error::DivergentModulus)));
        assert!(matches!(
            EllipticModulus::from_k(1.5),
            Err(Error::ModulusOutOfRange(_))
        ));
        assert!(matches!(
            EllipticModulus::from_k(-0.1),
            Err(Error::ModulusOutOfRange(_))
        ));
    }

    #[test]
    fn jacobi_initial_conditions() {
        for ksq in [0.0, 0.2, 0.7, 1.0] {
            let v = jacobi_sn_cn_dn(0.0, m(ksq)).unwrap();
            assert_eq!(v.sn, 0.0);
            assert_eq!(v.cn, 1.0);
            assert_eq!(v.dn, 1.0);
        }
    }

    #[test]
    fn jacobi_reduces_to_trig_at_k_zero() {
        let v = jacobi_sn_cn_dn(FRAC_PI_2, m(0.0)).unwrap();
        assert!((v.sn - 1.0).abs() < 1e-15);
        assert!(v.cn.abs() < 1e-15);
        assert!((v.dn - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_reduces_to_hyperbolic_at_k_one() {
        // oracle: evaluate tanh / sech directly
        let v = jacobi_sn_cn_dn(1.0, m(1.0)).unwrap();
        assert!((v.sn - 1.0_f64.tanh()).abs() < 1e-15);
        assert!((v.cn - 1.0 / 1.0_f64.cosh()).abs() < 1e-15);
        assert!((v.dn - 1.0 / 1.0_f64.cosh()).abs() < 1e-15);
    }

    #[test]
    fn quarter_period_identity() {
        let modulus = m(0.375);
        let ke = complete_k(modulus).unwrap();
        let v = jacobi_sn_cn_dn(ke, modulus).unwrap();
        assert!((v.sn - 1.0).abs() < 1e-12, "sn(Ke) = {}", v.sn);
        assert!(v.cn.abs() < 1e-12);
        assert!((v.dn - modulus.complement_squared().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn periodicity_4ke() {
        for ksq in [0.1, 0.375, 0.8, 0.99] {
            let modulus = m(ksq);
            let ke = complete_k(modulus).unwrap();
            for t in [-2.3, 0.4, 1.7, 5.1] {
                let a = jacobi_sn_cn_dn(t, modulus).unwrap();
                let b = jacobi_sn_cn_dn(t + 4.0 * ke, modulus).unwrap();
                assert!((a.sn - b.sn).abs() < 1e-10);
                assert!((a.cn - b.cn).abs() < 1e-10);
                assert!((a.dn - b.dn).abs() < 1e-10);
            }
        }
    }

    /// Quadrature-inversion oracle: solve t = F(phi, k) for the amplitude by
    /// Newton's method on the defining incomplete integral, then
    /// sn = sin phi. Valid for t in [0, Ke]; callers fold by symmetry.
    fn jacobi_by_inversion(t: f64, ksq: f64) -> (f64, f64, f64) {
        let f = |phi: f64| {
            quad::integrate(|x| 1.0 / (1.0 - ksq * x.sin().powi(2)).sqrt(), 0.0, phi, 1e-14)
                .unwrap()
        };
        let mut phi = t; // good enough start; F' >= 1
        for _ in 0..60 {
            let step = (f(phi) - t) * (1.0 - ksq * phi.sin().powi(2)).sqrt();
            phi -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (sn, cn) = (phi.sin(), phi.cos());
        (sn, cn, (1.0 - ksq * sn * sn).sqrt())
    }

    /// Fold an arbitrary argument into [0, Ke] using the quarter-period
    /// symmetries; returns (reduced t, sn sign, cn sign).
    fn fold(t: f64, ke: f64) -> (f64, f64, f64) {
        let period = 4.0 * ke;
        let mut t = t.rem_euclid(period);
        let (mut ssn, mut scn) = (1.0, 1.0);
        if t >= 2.0 * ke {
            t -= 2.0 * ke;
            ssn = -ssn;
            scn = -scn;
        }
        if t > ke {
            t = 2.0 * ke - t;
            scn = -scn;
        }
        (t, ssn, scn)
    }

    #[test]
    fn agreement_with_inversion_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let ksq: f64 = rng.gen_range(0.01..0.99);
            let modulus = m(ksq);
            let ke = complete_k(modulus).unwrap();
            let t: f64 = rng.gen_range(-3.0 * ke..3.0 * ke);
            let v = jacobi_sn_cn_dn(t, modulus).unwrap();
            let (tr, ssn, scn) = fold(t, ke);
            let (osn, ocn, odn) = jacobi_by_inversion(tr, ksq);
            assert!((v.sn - ssn * osn).abs() < 1e-10, "sn mismatch at t={t} ksq={ksq}");
            assert!((v.cn - scn * ocn).abs() < 1e-10, "cn mismatch at t={t} ksq={ksq}");
            assert!((v.dn - odn).abs() < 1e-10, "dn mismatch at t={t} ksq={ksq}");
        }
    }

    proptest! {
        #[test]
        fn pythagorean_identities(t in -20.0..20.0f64, ksq in 0.0..1.0f64) {
            let v = jacobi_sn_cn_dn(t, m(ksq)).unwrap();
            prop_assert!((v.sn * v.sn + v.cn * v.cn - 1.0).abs() <= 1e-12);
            prop_assert!((v.dn * v.dn + ksq * v.sn * v.sn - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn sn_is_odd_cn_even(t in -10.0..10.0f64, ksq in 0.0..1.0f64) {
            let a = jacobi_sn_cn_dn(t, m(ksq)).unwrap();
            let b = jacobi_sn_cn_dn(-t, m(ksq)).unwrap();
            prop_assert!((a.sn + b.sn).abs() < 1e-13);
            prop_assert!((a.cn - b.cn).abs() < 1e-13);
            prop_assert!((a.dn - b.dn).abs() < 1e-13);
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert!(jacobi_sn_cn_dn(f64::NAN, m(0.5)).is_err());
        assert!(jacobi_sn_cn_dn(f64::INFINITY, m(0.5)).is_err());
    }

    #[test]
    fn jacobi_near_k_one_stays_accurate() {
        // alpha -> 0 limit pushes ksq to 1; the periodicity identity is the
        // sensitive one there.
        let modulus = m(1.0 - 1e-9);
        let ke = complete_k(modulus).unwrap();
        let a = jacobi_sn_cn_dn(0.3, modulus).unwrap();
        let b = jacobi_sn_cn_dn(0.3 + 4.0 * ke, modulus).unwrap();
        assert!((a.sn - b.sn).abs() < 1e-9);
        assert!((a.dn * a.dn + modulus.k_squared() * a.sn * a.sn - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pi_over_2_k0_special_value() {
        // sn(pi/2, 0) = 1, cn = 0, dn = 1 per the trig degeneration
        let v = jacobi_sn_cn_dn(PI / 2.0, m(0.0)).unwrap();
        assert!((v.sn - 1.0).abs() < 1e-15 && v.cn.abs() < 1e-15 && v.dn == 1.0);
    }
}
