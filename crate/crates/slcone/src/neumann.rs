//! The constrained C. Neumann system on S^5: motion of a point z on the unit
//! sphere of C^3 under the quadratic potential |Az|^2 with
//! A = i diag(lambda_1, lambda_2, lambda_3), lambda = (1, alpha, -1-alpha).
//!
//! Provides the equations of motion, an adaptive embedded Runge-Kutta
//! integrator with re-projection onto {|z| = 1, <z, zdot> = 0}, the conserved
//! quantities H and J_j, and the constraint residuals that cut out the
//! special Legendrian solutions.

use crate::error::{Error, Result};
use crate::geom::{self, C3};
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

/// The diagonal su(3) symmetry axis for a given alpha in [0, 1]:
/// lambda = (1, alpha, -1-alpha) and mu = (1,1,1) x lambda.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SymmetryAxis {
    pub alpha: f64,
    pub lambda: [f64; 3],
    pub mu: [f64; 3],
}

impl SymmetryAxis {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha} outside [0, 1]"
            )));
        }
        Ok(Self {
            alpha,
            lambda: [1.0, alpha, -1.0 - alpha],
            mu: [-1.0 - 2.0 * alpha, 2.0 + alpha, alpha - 1.0],
        })
    }

    /// Trace-free by construction; exposed for tests.
    pub fn lambda_sum(&self) -> f64 {
        self.lambda[0] + self.lambda[1] + self.lambda[2]
    }

    pub fn lambda_sq_sum(&self) -> f64 {
        self.lambda.iter().map(|l| l * l).sum()
    }

    /// mu_1 mu_2 mu_3 (>= 0 on [0,1], zero exactly at alpha = 1).
    pub fn mu_product(&self) -> f64 {
        self.mu[0] * self.mu[1] * self.mu[2]
    }

    /// Second elementary symmetric polynomial of mu (always negative).
    pub fn mu_sym2(&self) -> f64 {
        self.mu[0] * self.mu[1] + self.mu[0] * self.mu[2] + self.mu[1] * self.mu[2]
    }

    pub fn lambda_product(&self) -> f64 {
        self.lambda[0] * self.lambda[1] * self.lambda[2]
    }

    /// A z = (i lambda_j z_j).
    #[inline]
    pub fn apply(&self, z: &C3) -> C3 {
        [
            Complex64::new(0.0, self.lambda[0]) * z[0],
            Complex64::new(0.0, self.lambda[1]) * z[1],
            Complex64::new(0.0, self.lambda[2]) * z[2],
        ]
    }

    /// e^{A s} z = (e^{i lambda_j s} z_j).
    #[inline]
    pub fn rotate(&self, z: &C3, s: f64) -> C3 {
        [
            Complex64::from_polar(1.0, self.lambda[0] * s) * z[0],
            Complex64::from_polar(1.0, self.lambda[1] * s) * z[1],
            Complex64::from_polar(1.0, self.lambda[2] * s) * z[2],
        ]
    }

    /// |A z|^2 = sum lambda_j^2 |z_j|^2.
    #[inline]
    pub fn potential(&self, z: &C3) -> f64 {
        self.lambda[0] * self.lambda[0] * z[0].norm_sqr()
            + self.lambda[1] * self.lambda[1] * z[1].norm_sqr()
            + self.lambda[2] * self.lambda[2] * z[2].norm_sqr()
    }
}

/// Point of the phase space: position z on S^5 and velocity zdot tangent to
/// the sphere.
#[derive(Debug, Clone, Copy)]
pub struct NeumannState {
    pub t: f64,
    pub z: C3,
    pub zdot: C3,
}

impl NeumannState {
    pub fn new(t: f64, z: C3, zdot: C3) -> Self {
        Self { t, z, zdot }
    }

    pub fn sphere_defect(&self) -> f64 {
        (geom::norm_sq(&self.z) - 1.0).abs()
    }

    pub fn tangency_defect(&self) -> f64 {
        geom::inner(&self.z, &self.zdot).abs()
    }

    /// Project (z, zdot) back onto {|z| = 1, <z, zdot> = 0}.
    fn projected(&self) -> Self {
        let norm = geom::norm_sq(&self.z).sqrt();
        let z = geom::scale(&self.z, 1.0 / norm);
        let mut zdot = self.zdot;
        let r = geom::inner(&z, &zdot);
        for j in 0..3 {
            zdot[j] -= z[j] * r;
        }
        Self { t: self.t, z, zdot }
    }
}

/// Acceleration of the Neumann flow: zddot = -A^2 z - (|zdot|^2 + |Az|^2) z.
///
/// Satisfies <z, zddot> = -|zdot|^2 identically on |z| = 1.
pub fn neumann_rhs(state: &NeumannState, axis: &SymmetryAxis) -> C3 {
    let coupling = geom::norm_sq(&state.zdot) + axis.potential(&state.z);
    let mut acc = geom::C3_ZERO;
    for j in 0..3 {
        // -A^2 z = +lambda_j^2 z_j componentwise
        acc[j] = (axis.lambda[j] * axis.lambda[j] - coupling) * state.z[j];
    }
    acc
}

/// Energy, planar angular momenta, and the Legendrian constraint
/// c = omega(z, Az) = sum lambda_j |z_j|^2.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConservedSet {
    pub h: f64,
    pub j: [f64; 3],
    pub c: f64,
}

pub fn conserved(state: &NeumannState, axis: &SymmetryAxis) -> ConservedSet {
    let h = geom::norm_sq(&state.zdot) - axis.potential(&state.z);
    let mut j = [0.0; 3];
    for i in 0..3 {
        // J_i = x_i ydot_i - y_i xdot_i
        j[i] = state.z[i].re * state.zdot[i].im - state.z[i].im * state.zdot[i].re;
    }
    let az = axis.apply(&state.z);
    let c = geom::omega(&state.z, &az);
    ConservedSet { h, j, c }
}

/// The five residuals that vanish on special Legendrian data:
/// (H, sum lambda_i J_i, sum lambda_i R_i^2, sum J_i, |z|^2 - 1).
pub fn constraint_residuals(state: &NeumannState, axis: &SymmetryAxis) -> [f64; 5] {
    let cs = conserved(state, axis);
    let lam_j = axis.lambda[0] * cs.j[0] + axis.lambda[1] * cs.j[1] + axis.lambda[2] * cs.j[2];
    let sum_j = cs.j[0] + cs.j[1] + cs.j[2];
    [cs.h, lam_j, cs.c, sum_j, geom::norm_sq(&state.z) - 1.0]
}

// Dormand-Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const DIM: usize = 12;

fn pack(state: &NeumannState) -> [f64; DIM] {
    let mut y = [0.0; DIM];
    for j in 0..3 {
        y[2 * j] = state.z[j].re;
        y[2 * j + 1] = state.z[j].im;
        y[6 + 2 * j] = state.zdot[j].re;
        y[6 + 2 * j + 1] = state.zdot[j].im;
    }
    y
}

fn unpack(t: f64, y: &[f64; DIM]) -> NeumannState {
    let mut z = geom::C3_ZERO;
    let mut zdot = geom::C3_ZERO;
    for j in 0..3 {
        z[j] = Complex64::new(y[2 * j], y[2 * j + 1]);
        zdot[j] = Complex64::new(y[6 + 2 * j], y[6 + 2 * j + 1]);
    }
    NeumannState { t, z, zdot }
}

fn flow(y: &[f64; DIM], axis: &SymmetryAxis) -> [f64; DIM] {
    let st = unpack(0.0, y);
    let acc = neumann_rhs(&st, axis);
    let mut dy = [0.0; DIM];
    dy[..6].copy_from_slice(&y[6..]);
    for j in 0..3 {
        dy[6 + 2 * j] = acc[j].re;
        dy[6 + 2 * j + 1] = acc[j].im;
    }
    dy
}

/// Integration output: re-projected states at every accepted step (plus any
/// requested sample times) and the worst pre-projection constraint drift.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<NeumannState>,
    /// max | |z|^2 - 1 | seen before re-projection
    pub max_sphere_drift: f64,
    /// max | <z, zdot> | seen before re-projection
    pub max_tangency_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &NeumannState {
        self.states.last().expect("trajectory is never empty")
    }
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_STEPS: usize = 10_000_000;

/// Integrate the Neumann flow from `state0` to `t_end` with per-step local
/// error `tol` (embedded 5(4) pair, infinity norm, atol = rtol = tol).
///
/// After each accepted step the state is re-projected onto the constraint
/// manifold; the drift removed by the projection is recorded, not hidden.
pub fn integrate(
    state0: &NeumannState,
    axis: &SymmetryAxis,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory> {
    integrate_sampled(state0, axis, t_end, tol, &[])
}

/// Like `integrate`, but the trajectory is guaranteed to contain states at
/// exactly the requested `samples` times (which must lie between state0.t and
/// t_end, in integration order).
pub fn integrate_sampled(
    state0: &NeumannState,
    axis: &SymmetryAxis,
    t_end: f64,
    tol: f64,
    samples: &[f64],
) -> Result<Trajectory> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!("tol = {tol}")));
    }
    let t0 = state0.t;
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    let mut targets: Vec<f64> = samples
        .iter()
        .copied()
        .filter(|&s| (s - t0) * dir >= 0.0 && (t_end - s) * dir >= 0.0)
        .collect();
    targets.sort_by(|a, b| ((a - t0) * dir).partial_cmp(&((b - t0) * dir)).unwrap());
    targets.push(t_end);

    let mut traj = Trajectory {
        states: vec![state0.projected()],
        max_sphere_drift: 0.0,
        max_tangency_drift: 0.0,
        accepted_steps: 0,
        rejected_steps: 0,
    };
    if span == 0.0 {
        return Ok(traj);
    }

    let mut t = t0;
    let mut y = pack(&traj.states[0]);
    let mut h = dir * (span / 100.0).clamp(1e-8, 1e-3);
    let mut k0 = flow(&y, axis); // FSAL
    let mut target_idx = 0;

    for _step in 0..MAX_STEPS {
        // land exactly on the next requested time
        let next_target = targets[target_idx];
        let mut hitting_target = false;
        if (t + h - next_target) * dir >= 0.0 {
            h = next_target - t;
            hitting_target = true;
        }
        if h.abs() < f64::EPSILON * (1.0 + t.abs()) {
            // target coincides with current time
            if hitting_target {
                traj.states.push(unpack(t, &y).projected());
                target_idx += 1;
                if target_idx == targets.len() {
                    return Ok(traj);
                }
                h = dir * 1e-6_f64.max(span * 1e-12);
                continue;
            }
            return Err(Error::StepSizeUnderflow { t, h });
        }

        // stages
        let mut k = [[0.0; DIM]; 7];
        k[0] = k0;
        for i in 1..7 {
            let mut yi = y;
            for j in 0..i {
                let a = DP_A[i][j];
                if a != 0.0 {
                    for d in 0..DIM {
                        yi[d] += h * a * k[j][d];
                    }
                }
            }
            let _ = DP_C; // stage times unused: autonomous system
            k[i] = flow(&yi, axis);
        }
        let mut y5 = y;
        let mut err = 0.0_f64;
        let mut finite = true;
        for d in 0..DIM {
            let mut s5 = 0.0;
            let mut s4 = 0.0;
            for i in 0..7 {
                s5 += DP_B5[i] * k[i][d];
                s4 += DP_B4[i] * k[i][d];
            }
            y5[d] += h * s5;
            finite &= y5[d].is_finite();
            // f64::max drops NaN, so non-finite states are tracked aside
            let scale = tol + tol * y[d].abs().max(y5[d].abs());
            err = err.max((h * (s5 - s4)).abs() / scale);
        }

        if err <= 1.0 && finite {
            // accept
            t += h;
            let raw = unpack(t, &y5);
            traj.max_sphere_drift = traj.max_sphere_drift.max(raw.sphere_defect());
            traj.max_tangency_drift = traj.max_tangency_drift.max(raw.tangency_defect());
            let proj = raw.projected();
            y = pack(&proj);
            k0 = flow(&y, axis);
            traj.accepted_steps += 1;
            traj.states.push(proj);
            if hitting_target {
                target_idx += 1;
                if target_idx == targets.len() {
                    return Ok(traj);
                }
            }
        } else {
            traj.rejected_steps += 1;
        }

        let factor = if !finite {
            // non-finite state: shrink toward the underflow diagnostic
            0.2
        } else if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
    }
    Err(Error::MaxStepsExceeded(MAX_STEPS))
}

/// CSV trajectory export: t, z, zdot, H, J_1..J_3, c (header row, one row per
/// recorded state, full round-trip float precision).
pub fn write_trajectory_csv<W: Write>(
    w: &mut W,
    traj: &Trajectory,
    axis: &SymmetryAxis,
) -> std::io::Result<()> {
    writeln!(
        w,
        "t,x1,y1,x2,y2,x3,y3,xd1,yd1,xd2,yd2,xd3,yd3,H,J1,J2,J3,c"
    )?;
    for st in &traj.states {
        let cs = conserved(st, axis);
        write!(w, "{}", st.t)?;
        for j in 0..3 {
            write!(w, ",{},{}", st.z[j].re, st.z[j].im)?;
        }
        for j in 0..3 {
            write!(w, ",{},{}", st.zdot[j].re, st.zdot[j].im)?;
        }
        writeln!(w, ",{},{},{},{},{}", cs.h, cs.j[0], cs.j[1], cs.j[2], cs.c)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn north_pole_rest() -> NeumannState {
        NeumannState::new(
            0.0,
            [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            geom::C3_ZERO,
        )
    }

    #[test]
    fn axis_invariants() {
        for alpha in [0.0, 0.3, 0.5, 1.0] {
            let ax = SymmetryAxis::new(alpha).unwrap();
            assert!(ax.lambda_sum().abs() < 1e-15);
            assert!((ax.mu[0] + ax.mu[1] + ax.mu[2]).abs() < 1e-15);
            let dot: f64 = (0..3).map(|i| ax.lambda[i] * ax.mu[i]).sum();
            assert!(dot.abs() < 1e-14);
        }
        assert!(SymmetryAxis::new(1.5).is_err());
        assert!(SymmetryAxis::new(-0.1).is_err());
    }

    #[test]
    fn rest_point_has_zero_acceleration() {
        // (0, z2, 0) is fixed by e^{As} when alpha = 0, and Az = 0 there.
        let ax = SymmetryAxis::new(0.0).unwrap();
        let st = north_pole_rest();
        let acc = neumann_rhs(&st, &ax);
        assert_eq!(geom::norm_sq(&acc), 0.0);
        let cs = conserved(&st, &ax);
        assert_eq!(cs.h, 0.0);
        assert_eq!(cs.j, [0.0; 3]);
        assert_eq!(cs.c, 0.0);
        for r in constraint_residuals(&st, &ax) {
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn clifford_defining_identity() {
        // R_i^2 = 1/3 with tangent velocity: zddot + A^2 z + coupling z = 0
        // is the definition of the flow; check the arithmetic on that data.
        let ax = SymmetryAxis::new(0.4).unwrap();
        let r = (1.0f64 / 3.0).sqrt();
        let z = [c(r, 0.0), c(0.0, r), c(r * 0.6, r * 0.8)];
        let zdot = [c(0.0, 0.5), c(-0.5, 0.0), c(-0.4, 0.3)];
        let st = NeumannState::new(0.0, z, zdot);
        let coupling = geom::norm_sq(&zdot) + ax.potential(&z);
        let acc = neumann_rhs(&st, &ax);
        for j in 0..3 {
            // acc_j - lambda_j^2 z_j + coupling z_j = 0
            let res = acc[j] - z[j] * (ax.lambda[j] * ax.lambda[j]) + z[j] * coupling;
            assert!(res.norm() < 1e-15);
        }
    }

    #[test]
    fn sphere_consistency_random_states() {
        // <z, zddot> + |zdot|^2 = 0 on |z| = 1, as an algebraic identity.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let alpha: f64 = rng.gen_range(0.0..1.0);
            let ax = SymmetryAxis::new(alpha).unwrap();
            let mut z = geom::C3_ZERO;
            let mut zdot = geom::C3_ZERO;
            for j in 0..3 {
                z[j] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                zdot[j] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            let norm = geom::norm_sq(&z).sqrt();
            for j in 0..3 {
                z[j] /= norm;
            }
            let st = NeumannState::new(0.0, z, zdot).projected();
            let acc = neumann_rhs(&st, &ax);
            let res = geom::inner(&st.z, &acc) + geom::norm_sq(&st.zdot);
            assert!(res.abs() <= 1e-12, "residual {res}");
        }
    }

    #[test]
    fn rhs_matches_finite_difference_of_trajectory() {
        let ax = SymmetryAxis::new(0.3).unwrap();
        let imm = crate::family::Immersion::new(
            crate::family::ConeParameters::new(0.3, 0.1, 0.0).unwrap(),
        )
        .unwrap();
        let st0 = imm.initial_state();
        let h = 1e-3;
        let samples = [-2.0 * h, -h, 0.0, h, 2.0 * h];
        let fwd = integrate_sampled(&st0, &ax, 2.0 * h, 1e-12, &samples).unwrap();
        let bwd = integrate_sampled(&st0, &ax, -2.0 * h, 1e-12, &samples).unwrap();
        let at = |t: f64| -> NeumannState {
            let pool = fwd.states.iter().chain(bwd.states.iter());
            *pool
                .min_by(|a, b| {
                    (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap()
                })
                .unwrap()
        };
        let acc = neumann_rhs(&st0, &ax);
        for j in 0..3 {
            let num = (at(h).z[j] - at(0.0).z[j] * 2.0 + at(-h).z[j]) / (h * h);
            assert!(
                (num - acc[j]).norm() < 1e-5,
                "component {j}: fd {num} vs rhs {}",
                acc[j]
            );
        }
    }

    #[test]
    fn rest_point_trajectory_is_constant() {
        let ax = SymmetryAxis::new(0.0).unwrap();
        let traj = integrate(&north_pole_rest(), &ax, 5.0, 1e-10).unwrap();
        for st in &traj.states {
            assert!(geom::dist(&st.z, &north_pole_rest().z) < 1e-12);
            assert!(geom::norm_sq(&st.zdot).sqrt() < 1e-12);
        }
    }

    #[test]
    fn conserved_quantities_drift_bound() {
        // ten basic periods at tol 1e-10 keep H and J_j within 1e-8
        let params = crate::family::ConeParameters::new(0.3, 0.1, 0.0).unwrap();
        let imm = crate::family::Immersion::new(params).unwrap();
        let ax = imm.axis();
        let st0 = imm.initial_state();
        let t_end = 10.0 * imm.basic_period();
        let traj = integrate(&st0, &ax, t_end, 1e-10).unwrap();
        let c0 = conserved(&st0, &ax);
        let mut drift = 0.0_f64;
        for st in &traj.states {
            let cs = conserved(st, &ax);
            drift = drift.max((cs.h - c0.h).abs());
            for j in 0..3 {
                drift = drift.max((cs.j[j] - c0.j[j]).abs());
            }
        }
        assert!(drift <= 1e-8, "drift {drift}");
        // the Legendrian constraint c is carried along too
        for st in &traj.states {
            assert!(conserved(st, &ax).c.abs() <= 1e-8);
        }
        // sphere and tangency stay within the re-projection budget
        assert!(traj.max_sphere_drift <= 1e-10, "{}", traj.max_sphere_drift);
        assert!(traj.max_tangency_drift <= 1e-10, "{}", traj.max_tangency_drift);
        for st in &traj.states {
            assert!(st.sphere_defect() < 1e-14 && st.tangency_defect() < 1e-14);
        }
    }

    #[test]
    fn energy_identity_on_cone_data() {
        // |zdot|^2 + |Az|^2 = 2 |Az|^2 on H = 0 data, the angular momenta
        // align with mu, and all five constraint residuals vanish
        for (alpha, j) in [(0.2, 0.05), (0.5, 0.0), (0.85, 0.12)] {
            let imm = crate::family::Immersion::new(
                crate::family::ConeParameters::new(alpha, j, 0.0).unwrap(),
            )
            .unwrap();
            let st = imm.initial_state();
            let ax = imm.axis();
            let lhs = geom::norm_sq(&st.zdot) + ax.potential(&st.z);
            let rhs = 2.0 * ax.potential(&st.z);
            assert!((lhs - rhs).abs() <= 1e-10, "alpha={alpha} J={j}");
            let cs = conserved(&st, &ax);
            for i in 0..3 {
                assert!(
                    (cs.j[i] - j * ax.mu[i]).abs() <= 1e-12,
                    "J vector misaligned at alpha={alpha} J={j}"
                );
            }
            for r in constraint_residuals(&st, &ax) {
                assert!(r.abs() <= 1e-12, "residual {r} at alpha={alpha} J={j}");
            }
        }
    }

    #[test]
    fn cddot_detects_non_sl3_axis() {
        // For an axis with nonzero trace, admissible initial data still
        // exists (built from 1 x lambda), but c = omega(z, Az) accelerates:
        // cddot = (sum lambda) |Az|^2 at an instant where all constraints
        // and cdot vanish and H = 0. Compare with a finite difference.
        let lambda = [1.0, 0.4, -1.2]; // sum = 0.2 != 0
        let sum_l: f64 = lambda.iter().sum();
        let lam_sq: f64 = lambda.iter().map(|l| l * l).sum();
        let mut ax = SymmetryAxis::new(0.4).unwrap();
        ax.lambda = lambda;
        ax.mu = [
            lambda[2] - lambda[1],
            lambda[0] - lambda[2],
            lambda[1] - lambda[0],
        ];
        let mu = ax.mu;
        // R^2 in the affine space { 1.R^2 = 1, lambda.R^2 = 0 }: the base
        // point a(1 - (sum lambda / |lambda|^2) lambda) plus a multiple of
        // 1 x lambda
        let a = 1.0 / (3.0 - sum_l * sum_l / lam_sq);
        let g = 0.05;
        let r2: Vec<f64> = (0..3)
            .map(|i| a * (1.0 - sum_l / lam_sq * lambda[i]) + g * mu[i])
            .collect();
        for v in &r2 {
            assert!(*v > 0.0, "test data needs positive squared radii");
        }
        let r: Vec<f64> = r2.iter().map(|v| v.sqrt()).collect();
        // a_j = ka mu_j / R_j, b_j = kb mu_j / R_j with ka^2 + kb^2 scaled to H = 0
        let denom: f64 = (0..3).map(|i| mu[i] * mu[i] / r2[i]).sum();
        let pot: f64 = (0..3).map(|i| lambda[i] * lambda[i] * r2[i]).sum();
        let ka = (0.3_f64 * pot / denom).sqrt();
        let kb = (0.7_f64 * pot / denom).sqrt();
        let mut z = geom::C3_ZERO;
        let mut zdot = geom::C3_ZERO;
        for j in 0..3 {
            z[j] = c(r[j], 0.0);
            zdot[j] = c(ka * mu[j] / r[j], kb * mu[j] / r[j]);
        }
        let st0 = NeumannState::new(0.0, z, zdot);
        let res = constraint_residuals(&st0, &ax);
        for v in res {
            assert!(v.abs() < 1e-12, "constraint setup broken: {v}");
        }
        let az = ax.apply(&z);
        assert!(geom::omega(&z, &az).abs() < 1e-12);
        // with H = 0 and all constraints at t = 0, the constraint
        // accelerates at (sum lambda) |Az|^2 per unit of omega(zdot, Az);
        // c = sum lambda_i R_i^2 has cdot = 2 omega(zdot, Az), hence the 2
        let expected = 2.0 * sum_l * ax.potential(&z);
        assert!(expected.abs() > 0.01);

        let h = 1e-3;
        let cs = |t: f64| -> f64 {
            let traj = integrate_sampled(&st0, &ax, t, 1e-12, &[t]).unwrap();
            conserved(traj.last(), &ax).c
        };
        let cddot_fd = (cs(h) - 2.0 * cs(0.0) + cs(-h)) / (h * h);
        assert!(
            (cddot_fd - expected).abs() < 1e-4 * expected.abs(),
            "fd {cddot_fd} vs formula {expected}"
        );
        // control: a genuine trace-free axis keeps the constraint flat
        let imm = crate::family::Immersion::new(
            crate::family::ConeParameters::new(0.4, 0.09, 0.0).unwrap(),
        )
        .unwrap();
        let ax0 = imm.axis();
        let st0 = imm.initial_state();
        let cs0 = |t: f64| -> f64 {
            let traj = integrate_sampled(&st0, &ax0, t, 1e-12, &[t]).unwrap();
            conserved(traj.last(), &ax0).c
        };
        let cddot0 = (cs0(h) - 2.0 * cs0(0.0) + cs0(-h)) / (h * h);
        assert!(cddot0.abs() < 1e-6, "su(3) constraint accelerated: {cddot0}");
    }

    #[test]
    fn non_finite_state_surfaces_as_stiffness_error() {
        // NaN poisons every error estimate, the controller shrinks h to the
        // floor, and the run aborts with a diagnostic instead of spinning
        let ax = SymmetryAxis::new(0.3).unwrap();
        let st = NeumannState::new(
            0.0,
            [c(f64::NAN, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            geom::C3_ZERO,
        );
        match integrate(&st, &ax, 1.0, 1e-10) {
            Err(Error::StepSizeUnderflow { .. }) => {}
            other => panic!("expected StepSizeUnderflow, got {other:?}"),
        }
    }

    #[test]
    fn csv_export_shape() {
        let ax = SymmetryAxis::new(0.0).unwrap();
        let traj = integrate(&north_pole_rest(), &ax, 0.1, 1e-8).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj, &ax).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,x1,y1,x2,y2,x3,y3,xd1,yd1,xd2,yd2,xd3,yd3,H,J1,J2,J3,c"
        );
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 18);
    }
}
