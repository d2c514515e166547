//! The two-parameter family u_{alpha,J}(s,t) = e^{As} z(t) of S^1-equivariant
//! special Legendrian immersions R^2 -> S^5.
//!
//! The radial profile is governed by a single function gamma(t) solving
//!
//!   gamma_dot^2 / 4 + J^2 = prod_j (gamma mu_j + 1/3),
//!
//! whose turning values Gamma_2 <= 0 <= Gamma_1 <= Gamma_3 give the Jacobi
//! closed form gamma(t) = Gamma_2 - (Gamma_2 - Gamma_1) sn^2(rt, k). Squared
//! radii are R_j^2 = gamma mu_j + 1/3, phases integrate
//! theta_j_dot = J mu_j / R_j^2, the conformal factor is
//! y = -gamma mu_1 mu_2 mu_3 + (1/3) sum lambda_i^2, and the Gauss curvature
//! is K = 1 + 2 C y^{-3} with -C = prod lambda_i^2 + J^2 prod mu_i^2.

use crate::elliptic::{self, Degeneracy, EllipticData, EllipticModulus};
use crate::error::{Error, Result};
use crate::geom::{self, C3};
use crate::neumann::{NeumannState, SymmetryAxis};
use crate::quad;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, TAU};

/// Largest admissible angular momentum parameter, 1/(3 sqrt 3).
pub const J_MAX: f64 = 0.19245008972987526; // = 1/(3 sqrt 3)

/// Absolute tolerance for the phase quadrature.
pub const PHASE_QUAD_TOL: f64 = 1e-11;

/// (alpha, J, theta): the symmetry axis, the angular momentum scale, and the
/// calibration phase.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeParameters {
    pub axis: SymmetryAxis,
    pub j: f64,
    pub theta: f64,
}

impl ConeParameters {
    pub fn new(alpha: f64, j: f64, theta: f64) -> Result<Self> {
        let axis = SymmetryAxis::new(alpha)?;
        if !j.is_finite() || !(0.0..=J_MAX + 1e-15).contains(&j) {
            return Err(Error::InvalidParameter(format!(
                "J = {j} outside [0, 1/(3 sqrt 3)]"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::NonFinite("theta"));
        }
        Ok(Self { axis, j, theta: theta.rem_euclid(TAU) })
    }

    pub fn alpha(&self) -> f64 {
        self.axis.alpha
    }
}

/// Turning values of gamma plus derived elliptic data for (alpha, J).
///
/// Solves prod_j (gamma mu_j + 1/3) - J^2 = 0, i.e.
/// e3 g^3 + (e2/3) g^2 + (1/27 - J^2) = 0 with e2, e3 the symmetric
/// polynomials of mu. Degenerate strata short-circuit to exact data:
/// J = 1/(3 sqrt 3) gives gamma == 0; alpha = 1 loses the cubic term
/// (Gamma_3 at infinity, harmonic gamma at k = 0); alpha = J = 0 is the
/// k = 1 separatrix.
pub fn cubic_roots(params: &ConeParameters) -> Result<EllipticData> {
    let axis = &params.axis;
    let j = params.j;
    let e2 = axis.mu_sym2();
    let e3 = axis.mu_product();
    let q = 1.0 / 27.0 - j * j;

    let near = |a: f64, b: f64| (a - b).abs() <= 1e-12;

    if near(j, J_MAX) || q <= 0.0 {
        // gamma == 0 exactly
        let rate = (-e2 / 3.0).sqrt();
        let gamma_far = if e3 > 0.0 { -e2 / (3.0 * e3) } else { f64::INFINITY };
        let modulus = EllipticModulus::from_k_squared(0.0)?;
        return Ok(EllipticData {
            modulus,
            rate,
            quarter_period: elliptic::complete_k(modulus)?,
            gamma_lo: 0.0,
            gamma_hi: 0.0,
            gamma_far,
            degeneracy: Degeneracy::GammaZero,
        });
    }

    if near(axis.alpha, 1.0) {
        // quadratic branch: (e2/3) g^2 + q = 0
        let g = (q / (-e2 / 3.0)).sqrt();
        let rate = (-e2 / 3.0).sqrt();
        let modulus = EllipticModulus::from_k_squared(0.0)?;
        return Ok(EllipticData {
            modulus,
            rate,
            quarter_period: elliptic::complete_k(modulus)?,
            gamma_lo: -g,
            gamma_hi: g,
            gamma_far: f64::INFINITY,
            degeneracy: Degeneracy::MuThreeZero,
        });
    }

    if j == 0.0 {
        // exact roots gamma_i = -1/(3 mu_i)
        let g1 = -1.0 / (3.0 * axis.mu[0]);
        let g2 = -1.0 / (3.0 * axis.mu[1]);
        let g3 = -1.0 / (3.0 * axis.mu[2]);
        let (lo, hi, far) = (g2, g1, g3);
        let rate = (e3 * (far - lo)).sqrt();
        if near(axis.alpha, 0.0) {
            // hi == far: k = 1 separatrix
            let modulus = EllipticModulus::from_k_squared(1.0)?;
            return Ok(EllipticData {
                modulus,
                rate,
                quarter_period: f64::INFINITY,
                gamma_lo: lo,
                gamma_hi: hi,
                gamma_far: far,
                degeneracy: Degeneracy::Separatrix,
            });
        }
        let ksq = (lo - hi) / (lo - far);
        let modulus = EllipticModulus::from_k_squared(ksq)?;
        return Ok(EllipticData {
            modulus,
            rate,
            quarter_period: elliptic::complete_k(modulus)?,
            gamma_lo: lo,
            gamma_hi: hi,
            gamma_far: far,
            degeneracy: Degeneracy::None,
        });
    }

    // general case: trigonometric solution of the depressed cubic, then a
    // Newton polish on the original polynomial
    let a = e3;
    let b = e2 / 3.0;
    let p = -b * b / (3.0 * a * a);
    let qq = (2.0 * b * b * b + 27.0 * a * a * q) / (27.0 * a * a * a);
    let m = 2.0 * (-p / 3.0).sqrt();
    let acos_arg = (3.0 * qq / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
    let phi = acos_arg.acos();
    let mut roots = [0.0_f64; 3];
    for (i, root) in roots.iter_mut().enumerate() {
        let x = m * ((phi - TAU * i as f64) / 3.0).cos();
        let mut g = x - b / (3.0 * a);
        for _ in 0..2 {
            let f = a * g * g * g + b * g * g + q;
            let df = 3.0 * a * g * g + 2.0 * b * g;
            if df.abs() > 1e-300 {
                g -= f / df;
            }
        }
        *root = g;
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (lo, hi, far) = (roots[0], roots[1], roots[2]);
    let rate = (e3 * (far - lo)).sqrt();
    let ksq = ((lo - hi) / (lo - far)).clamp(0.0, 1.0);
    let modulus = EllipticModulus::from_k_squared(ksq)?;
    Ok(EllipticData {
        modulus,
        rate,
        quarter_period: elliptic::complete_k(modulus)?,
        gamma_lo: lo,
        gamma_hi: hi,
        gamma_far: far,
        degeneracy: Degeneracy::None,
    })
}

/// gamma(t) and gamma_dot(t); see `EllipticData::gamma`.
pub fn gamma_closed_form(ed: &EllipticData, t: f64) -> Result<(f64, f64)> {
    ed.gamma(t)
}

/// Squared radii R_j^2(t) = gamma(t) mu_j + 1/3.
///
/// Values in [-1e-12, 0) are clamped to 0 (exact zeros of the J = 0 case);
/// anything more negative is an inconsistency and errors.
pub fn radii_squared(ed: &EllipticData, axis: &SymmetryAxis, t: f64) -> Result<[f64; 3]> {
    let (g, _) = ed.gamma(t)?;
    let mut r2 = [0.0; 3];
    for jx in 0..3 {
        let v = g * axis.mu[jx] + 1.0 / 3.0;
        if v < -1e-12 {
            return Err(Error::NegativeRadius { value: v, t });
        }
        r2[jx] = v.max(0.0);
    }
    Ok(r2)
}

/// The gamma profile with its associated constants, as one value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GammaSolution {
    pub elliptic: EllipticData,
    /// gamma(0) in the implemented convention (the orbit minimum Gamma_2).
    pub gamma0: f64,
    /// curvature constant C with K = 1 + 2 C y^{-3}
    pub curvature_constant: f64,
    /// basic period of gamma and of y (infinite on the separatrix)
    pub basic_period_t: f64,
}

pub fn gamma_solution(params: &ConeParameters) -> Result<GammaSolution> {
    let ed = cubic_roots(params)?;
    Ok(GammaSolution {
        elliptic: ed,
        gamma0: ed.gamma_lo,
        curvature_constant: curvature_constant(params),
        basic_period_t: ed.basic_period(),
    })
}

fn curvature_constant(params: &ConeParameters) -> f64 {
    let lp = params.axis.lambda_product();
    let mp = params.axis.mu_product();
    -(lp * lp + params.j * params.j * mp * mp)
}

/// One sampled point of the immersion.
#[derive(Debug, Clone, Copy)]
pub struct ImmersionSample {
    pub s: f64,
    pub t: f64,
    /// point of S^5 in C^3
    pub u: C3,
    /// conformal factor y = |Az|^2
    pub y: f64,
    /// Gauss curvature
    pub k_gauss: f64,
    /// unwrapped phases theta_j(t) of the z-profile (constant in s)
    pub theta: [f64; 3],
}

/// A fixed (alpha, J, theta) immersion with its derived data precomputed,
/// ready for pointwise evaluation.
#[derive(Debug, Clone)]
pub struct Immersion {
    params: ConeParameters,
    ed: EllipticData,
    c_const: f64,
    period: f64,
    theta0: [f64; 3],
    /// phase increments over one basic period (zeros for J = 0)
    holonomy: [f64; 3],
    /// signed-radius coefficients (c_1, c_2, c_3) for the J = 0 branch
    radius_coeff: [f64; 3],
}

impl Immersion {
    pub fn new(params: ConeParameters) -> Result<Self> {
        let ed = cubic_roots(&params)?;
        let c_const = curvature_constant(&params);
        let period = ed.basic_period();

        // calibration phase convention: with theta_2(0) = theta_3(0) = 0,
        // theta_1(0) = -theta for J != 0 and -theta + pi/2 for J = 0; both
        // make e^{i theta} det_C(z, Az, zdot) the real constant -y.
        let theta0 = if params.j == 0.0 {
            [-params.theta + FRAC_PI_2, 0.0, 0.0]
        } else {
            [-params.theta, 0.0, 0.0]
        };

        // signed radii R = (c1 cn, c2 sn, c3 dn) for the J = 0 branch; the
        // coefficients are the extreme values mu_1 G2 + 1/3, mu_2 G1 + 1/3,
        // mu_3 G2 + 1/3 (finite even when Gamma_3 is at infinity).
        let radius_coeff = [
            (params.axis.mu[0] * ed.gamma_lo + 1.0 / 3.0).max(0.0).sqrt(),
            (params.axis.mu[1] * ed.gamma_hi + 1.0 / 3.0).max(0.0).sqrt(),
            (params.axis.mu[2] * ed.gamma_lo + 1.0 / 3.0).max(0.0).sqrt(),
        ];

        let mut imm = Self {
            params,
            ed,
            c_const,
            period,
            theta0,
            holonomy: [0.0; 3],
            radius_coeff,
        };
        if params.j != 0.0 {
            let mut hol = [0.0; 3];
            for (jx, h) in hol.iter_mut().enumerate() {
                *h = imm.phase_increment(jx, imm.period)?;
            }
            imm.holonomy = hol;
        }
        Ok(imm)
    }

    pub fn params(&self) -> &ConeParameters {
        &self.params
    }

    pub fn axis(&self) -> SymmetryAxis {
        self.params.axis
    }

    pub fn elliptic_data(&self) -> &EllipticData {
        &self.ed
    }

    pub fn basic_period(&self) -> f64 {
        self.period
    }

    pub fn curvature_constant(&self) -> f64 {
        self.c_const
    }

    /// Phase increments (Delta theta_1, Delta theta_2, Delta theta_3) over
    /// one basic period.
    pub fn holonomy(&self) -> [f64; 3] {
        self.holonomy
    }

    pub fn is_flat(&self) -> bool {
        matches!(
            self.ed.degeneracy,
            Degeneracy::GammaZero | Degeneracy::MuThreeZero
        )
    }

    /// int_0^t J mu_j / R_j^2 for t within one basic period.
    fn phase_increment(&self, jx: usize, t: f64) -> Result<f64> {
        let j = self.params.j;
        let mu_j = self.params.axis.mu[jx];
        if j == 0.0 || mu_j == 0.0 {
            return Ok(0.0);
        }
        let half = if self.period.is_finite() { self.period * 0.5 } else { f64::NAN };
        let splits = if half.is_finite() { vec![half] } else { vec![] };
        let ed = self.ed;
        let integrand = move |tau: f64| {
            let (g, _) = ed.gamma(tau).expect("finite quadrature node");
            j * mu_j / (g * mu_j + 1.0 / 3.0)
        };
        quad::integrate_split(integrand, 0.0, t, &splits, PHASE_QUAD_TOL)
    }

    /// Unwrapped phases theta_j(t) (constants for J = 0).
    pub fn phases(&self, t: f64) -> Result<[f64; 3]> {
        if self.params.j == 0.0 {
            return Ok(self.theta0);
        }
        let (wind, frac) = if self.period.is_finite() {
            let m = (t / self.period).floor();
            (m, t - m * self.period)
        } else {
            (0.0, t)
        };
        let mut th = [0.0; 3];
        for jx in 0..3 {
            th[jx] = self.theta0[jx]
                + wind * self.holonomy[jx]
                + self.phase_increment(jx, frac)?;
        }
        Ok(th)
    }

    /// gamma, gamma_dot, y, K at time t.
    pub fn profile(&self, t: f64) -> Result<(f64, f64, f64, f64)> {
        let (g, gdot) = self.ed.gamma(t)?;
        let y = -g * self.params.axis.mu_product()
            + self.params.axis.lambda_sq_sum() / 3.0;
        let k = 1.0 + 2.0 * self.c_const / (y * y * y);
        Ok((g, gdot, y, k))
    }

    /// z(t) on S^5.
    pub fn z_of_t(&self, t: f64) -> Result<C3> {
        Ok(self.state_at(t)?.z)
    }

    /// Full phase-space point (z, zdot) at time t, exactly on the
    /// constraint manifold.
    pub fn state_at(&self, t: f64) -> Result<NeumannState> {
        let axis = &self.params.axis;
        if self.params.j == 0.0 {
            // signed radii through {cn, sn, dn}; z stays smooth through the
            // radius zeros, theta_j constant
            let jv = elliptic::jacobi_sn_cn_dn(self.ed.rate * t, self.ed.modulus)?;
            let [c1, c2, c3] = self.radius_coeff;
            let r = self.ed.rate;
            let ksq = self.ed.modulus.k_squared();
            let rad = [c1 * jv.cn, c2 * jv.sn, c3 * jv.dn];
            let rad_dot = [
                -c1 * r * jv.sn * jv.dn,
                c2 * r * jv.cn * jv.dn,
                -c3 * r * ksq * jv.sn * jv.cn,
            ];
            let mut z = geom::C3_ZERO;
            let mut zdot = geom::C3_ZERO;
            for jx in 0..3 {
                let ph = Complex64::from_polar(1.0, self.theta0[jx]);
                z[jx] = ph * rad[jx];
                zdot[jx] = ph * rad_dot[jx];
            }
            return Ok(NeumannState::new(t, z, zdot));
        }
        let (g, gdot) = self.ed.gamma(t)?;
        let th = self.phases(t)?;
        let mut z = geom::C3_ZERO;
        let mut zdot = geom::C3_ZERO;
        for jx in 0..3 {
            let r2 = (g * axis.mu[jx] + 1.0 / 3.0).max(0.0);
            let r = r2.sqrt();
            let r_dot = axis.mu[jx] * gdot / (2.0 * r);
            let th_dot = self.params.j * axis.mu[jx] / r2;
            let ph = Complex64::from_polar(1.0, th[jx]);
            z[jx] = ph * r;
            zdot[jx] = ph * Complex64::new(r_dot, r * th_dot);
        }
        Ok(NeumannState::new(t, z, zdot))
    }

    /// Initial data for the Neumann flow (t = 0).
    pub fn initial_state(&self) -> NeumannState {
        self.state_at(0.0).expect("t = 0 is always evaluable")
    }

    /// One sample u(s, t) = e^{As} z(t) with metric and curvature data.
    pub fn sample(&self, s: f64, t: f64) -> Result<ImmersionSample> {
        let st = self.state_at(t)?;
        let (_, _, y, k) = self.profile(t)?;
        let theta = self.phases(t)?;
        Ok(ImmersionSample {
            s,
            t,
            u: self.params.axis.rotate(&st.z, s),
            y,
            k_gauss: k,
            theta,
        })
    }
}

/// Convenience single-point evaluation. Building an `Immersion` once and
/// calling `sample` is cheaper in loops.
pub fn immerse(params: &ConeParameters, s: f64, t: f64) -> Result<ImmersionSample> {
    Immersion::new(*params)?.sample(s, t)
}

/// Extreme Gauss curvature values of u_{alpha,J}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvatureExtremes {
    pub k_min: f64,
    pub k_max: f64,
    /// true for (alpha, J) = (0, 0): y_min -> 0, K unbounded below
    pub unbounded: bool,
}

pub fn curvature_extremes(params: &ConeParameters) -> Result<CurvatureExtremes> {
    let ed = cubic_roots(params)?;
    let axis = &params.axis;
    match ed.degeneracy {
        Degeneracy::GammaZero | Degeneracy::MuThreeZero => Ok(CurvatureExtremes {
            k_min: 0.0,
            k_max: 0.0,
            unbounded: false,
        }),
        Degeneracy::Separatrix => Ok(CurvatureExtremes {
            k_min: f64::NEG_INFINITY,
            k_max: 1.0,
            unbounded: true,
        }),
        Degeneracy::None => {
            if params.j == 0.0 {
                let a = axis.alpha;
                Ok(CurvatureExtremes {
                    k_min: 1.0 - 2.0 / (a * (1.0 + a)),
                    k_max: 1.0 - 2.0 * a * a / (1.0 + a),
                    unbounded: false,
                })
            } else {
                // y is an affine decreasing function of gamma, so the y
                // extremes sit at the gamma turning values; both solve the
                // cubic 4y^3 - 2 y^2 sum(lambda^2) - 4C = 0 from ydot = 0.
                let e3 = axis.mu_product();
                let base = axis.lambda_sq_sum() / 3.0;
                let y_lo = -ed.gamma_hi * e3 + base;
                let y_hi = -ed.gamma_lo * e3 + base;
                let c = curvature_constant(params);
                Ok(CurvatureExtremes {
                    k_min: 1.0 + 2.0 * c / (y_lo * y_lo * y_lo),
                    k_max: 1.0 + 2.0 * c / (y_hi * y_hi * y_hi),
                    unbounded: false,
                })
            }
        }
    }
}
