//! Independent differential-geometric audits of sampled surfaces.
//!
//! Everything here works from grid values and centered finite differences
//! only, so the checks do not share code with the closed-form construction
//! they are auditing. Residuals on true solutions decay at O(h^2); control
//! surfaces stay at order one.

use crate::error::{Error, Result};
use crate::family::ConeParameters;
use crate::geom::{self, C3};
use crate::grid::SurfaceGrid;
use crate::neumann;
use crate::par;
use num_complex::Complex64;
use serde::Serialize;

/// Outcome of one residual sweep over a grid.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub name: String,
    pub max_abs: f64,
    pub grid_dims: (usize, usize),
    /// finite-difference step (the larger of the two grid spacings)
    pub h: f64,
    /// measured order from an h vs h/2 pair; only set by `order_from_pair`
    pub convergence_order: Option<f64>,
}

/// Attach the measured order log2(coarse/fine) to the fine report.
pub fn order_from_pair(coarse: &ResidualReport, fine: ResidualReport) -> ResidualReport {
    ResidualReport {
        convergence_order: Some((coarse.max_abs / fine.max_abs).log2()),
        ..fine
    }
}

struct Stencil {
    u: C3,
    us: C3,
    ut: C3,
    uss: C3,
    utt: C3,
}

fn check_dims(grid: &SurfaceGrid) -> Result<()> {
    if grid.ns < 5 || grid.nt < 5 {
        return Err(Error::GridTooCoarse {
            min: 5,
            got: grid.ns.min(grid.nt),
        });
    }
    Ok(())
}

/// Max of `f` over interior nodes, evaluated node-parallel.
fn max_over_interior<F>(grid: &SurfaceGrid, f: F) -> f64
where
    F: Fn(&Stencil) -> f64 + Sync + Send,
{
    let ds = grid.ds();
    let dt = grid.dt();
    let (ns, nt) = (grid.ns, grid.nt);
    let inner = (ns - 2) * (nt - 2);
    let vals = par::map_indexed(inner, |idx| {
        let is = 1 + idx % (ns - 2);
        let it = 1 + idx / (ns - 2);
        let u = grid.at(is, it).u;
        let (ul, ur) = (grid.at(is - 1, it).u, grid.at(is + 1, it).u);
        let (ud, uu) = (grid.at(is, it - 1).u, grid.at(is, it + 1).u);
        let mut st = Stencil {
            u,
            us: geom::C3_ZERO,
            ut: geom::C3_ZERO,
            uss: geom::C3_ZERO,
            utt: geom::C3_ZERO,
        };
        for j in 0..3 {
            st.us[j] = (ur[j] - ul[j]) / (2.0 * ds);
            st.ut[j] = (uu[j] - ud[j]) / (2.0 * dt);
            st.uss[j] = (ur[j] - u[j] * 2.0 + ul[j]) / (ds * ds);
            st.utt[j] = (uu[j] - u[j] * 2.0 + ud[j]) / (dt * dt);
        }
        f(&st)
    });
    vals.into_iter().fold(0.0, f64::max)
}

fn report(grid: &SurfaceGrid, name: &str, max_abs: f64) -> ResidualReport {
    ResidualReport {
        name: name.to_string(),
        max_abs,
        grid_dims: (grid.ns, grid.nt),
        h: grid.ds().max(grid.dt()),
        convergence_order: None,
    }
}

/// Harmonic-map residual | Delta u + |du|^2 u | at interior nodes.
pub fn harmonic_residual(grid: &SurfaceGrid) -> Result<ResidualReport> {
    check_dims(grid)?;
    let max = max_over_interior(grid, |st| {
        let du_sq = geom::norm_sq(&st.us) + geom::norm_sq(&st.ut);
        let mut res = 0.0_f64;
        let mut v = geom::C3_ZERO;
        for j in 0..3 {
            v[j] = st.uss[j] + st.utt[j] + st.u[j] * du_sq;
        }
        res = res.max(geom::norm_sq(&v).sqrt());
        res
    });
    Ok(report(grid, "harmonic", max))
}

/// Hopf differential |phi| with
/// phi = (|u_s|^2 - |u_t|^2 - 2i (u_s, u_t)) / 4; zero iff conformal.
pub fn hopf_differential(grid: &SurfaceGrid) -> Result<ResidualReport> {
    check_dims(grid)?;
    let max = max_over_interior(grid, |st| {
        let a = geom::norm_sq(&st.us) - geom::norm_sq(&st.ut);
        let b = geom::inner(&st.us, &st.ut);
        0.25 * Complex64::new(a, -2.0 * b).norm()
    });
    Ok(report(grid, "hopf", max))
}

/// Contact-form residual: the larger of |omega(u, u_s)| and |omega(u, u_t)|.
pub fn legendrian_residual(grid: &SurfaceGrid) -> Result<ResidualReport> {
    check_dims(grid)?;
    let max = max_over_interior(grid, |st| {
        geom::omega(&st.u, &st.us)
            .abs()
            .max(geom::omega(&st.u, &st.ut).abs())
    });
    Ok(report(grid, "legendrian", max))
}

/// The two halves of the calibration check at phase theta.
#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    /// max |Im(e^{i theta} det_C(u, u_s, u_t))|
    pub im: ResidualReport,
    /// max | |Re(e^{i theta} det_C(u, u_s, u_t))| / vol - 1 |
    /// (orientation-insensitive: the immersions as parametrized realize the
    /// calibration up to the orientation of the (s, t) chart)
    pub re: ResidualReport,
}

pub fn calibration_defect(grid: &SurfaceGrid, theta: f64) -> Result<CalibrationReport> {
    check_dims(grid)?;
    let phase = Complex64::from_polar(1.0, theta);
    let im_max = max_over_interior(grid, |st| {
        (phase * geom::det3(&st.u, &st.us, &st.ut)).im.abs()
    });
    let re_max = max_over_interior(grid, |st| {
        let vol = geom::gram_area(&st.us, &st.ut);
        if vol < 1e-300 {
            return 0.0;
        }
        ((phase * geom::det3(&st.u, &st.us, &st.ut)).re.abs() / vol - 1.0).abs()
    });
    Ok(CalibrationReport {
        im: report(grid, "calibration_im", im_max),
        re: report(grid, "calibration_re", re_max),
    })
}

/// Finite-difference Gauss curvature -(ln y)'' / (2y) along t versus the
/// curvature stored on the grid.
pub fn curvature_fd_check(grid: &SurfaceGrid) -> Result<ResidualReport> {
    check_dims(grid)?;
    let dt = grid.dt();
    let (ns, nt) = (grid.ns, grid.nt);
    let vals = par::map_indexed(nt - 2, |row| {
        let it = row + 1;
        let mut worst = 0.0_f64;
        for is in 0..ns {
            let ym = grid.at(is, it - 1).y.ln();
            let y0 = grid.at(is, it).y;
            let yp = grid.at(is, it + 1).y.ln();
            let k_fd = -(yp - 2.0 * y0.ln() + ym) / (dt * dt) / (2.0 * y0);
            worst = worst.max((k_fd - grid.at(is, it).k_gauss).abs());
        }
        worst
    });
    let max = vals.into_iter().fold(0.0, f64::max);
    Ok(report(grid, "curvature_fd", max))
}

/// Sup distance between the closed-form profile z(t) and the integrated
/// Neumann trajectory started from matched initial data at `t_start`.
pub fn neumann_vs_closed_form(
    params: &ConeParameters,
    t_start: f64,
    t_end: f64,
    tol: f64,
) -> Result<ResidualReport> {
    let imm = crate::family::Immersion::new(*params)?;
    let axis = imm.axis();
    let st0 = imm.state_at(t_start)?;
    let traj = neumann::integrate(&st0, &axis, t_end, tol)?;
    let mut worst = 0.0_f64;
    for st in &traj.states {
        let z_closed = imm.z_of_t(st.t)?;
        worst = worst.max(geom::dist(&st.z, &z_closed));
    }
    Ok(ResidualReport {
        name: "neumann_vs_closed_form".into(),
        max_abs: worst,
        grid_dims: (traj.states.len(), 1),
        h: tol,
        convergence_order: None,
    })
}
