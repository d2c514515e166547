//! The one-parameter family Sigma_d of asymptotically conical special
//! Lagrangian submanifolds over a special Legendrian link Sigma:
//!
//!   Sigma_d = { f * x : x in Sigma, Im(f^n) = d, arg f in [0, pi/n] },
//!
//! built as the product Phi(t, x) = f(t) phi(x). d = 0 degenerates to the
//! union of the cones over Sigma and e^{i pi/n} Sigma; d != 0 interpolates
//! between those two ends.

use crate::error::{Error, Result};
use crate::geom::{self, C3};
use crate::grid::SurfaceGrid;
use crate::par;
use crate::verify;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// The profile curve f in C with Im(f^n) = d, sampled along smooth segments
/// (one segment for d > 0; the two boundary rays for d = 0).
#[derive(Debug, Clone, Serialize)]
pub struct ACProfile {
    /// ambient complex dimension (3 for the cones built here)
    pub n: u32,
    /// effective level Im(f^n); negative inputs are folded to |d|
    pub d: f64,
    /// true when a negative d was folded by conjugation symmetry
    pub conjugated: bool,
    pub rho_max: f64,
    pub segments: Vec<Vec<Complex64>>,
}

impl ACProfile {
    /// max |Im(f^n) - d| over all samples.
    pub fn level_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for seg in &self.segments {
            for f in seg {
                worst = worst.max((f.powu(self.n).im - self.d).abs());
            }
        }
        worst
    }
}

/// Sample the profile with `m` points per segment, truncated at |f| =
/// `rho_max`.
///
/// For d > 0 the curve is parametrized by the phase: rho(phi) =
/// (d / sin(n phi))^{1/n}, phi in (0, pi/n), sampled with cosine clustering
/// toward both asymptotic ends. For d = 0 the two rays arg f in {0, pi/n}
/// are returned as separate segments. d < 0 folds to |d| by conjugation and
/// is flagged.
pub fn profile_curve(n: u32, d: f64, m: usize, rho_max: f64) -> Result<ACProfile> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("profile needs n >= 2, got {n}")));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(format!("profile needs m >= 2 samples, got {m}")));
    }
    if !d.is_finite() || !rho_max.is_finite() || rho_max <= 0.0 {
        return Err(Error::NonFinite("profile parameters"));
    }
    let conjugated = d < 0.0;
    let d = d.abs();
    let sector = PI / n as f64;

    if d == 0.0 {
        // two rays, clustered toward the cone point (which is excluded)
        let mut rays = Vec::with_capacity(2);
        for arg in [0.0, sector] {
            let mut seg = Vec::with_capacity(m);
            for i in 0..m {
                let xi = (i + 1) as f64 / m as f64;
                seg.push(Complex64::from_polar(rho_max * xi * xi, arg));
            }
            rays.push(seg);
        }
        return Ok(ACProfile { n, d, conjugated, rho_max, segments: rays });
    }

    if d > rho_max.powi(n as i32) {
        return Err(Error::InvalidParameter(format!(
            "d = {d} exceeds rho_max^n; the curve never enters |f| <= {rho_max}"
        )));
    }
    let phi_min = (d / rho_max.powi(n as i32)).asin() / n as f64;
    let span = sector - 2.0 * phi_min;
    let mut seg = Vec::with_capacity(m);
    for i in 0..m {
        let xi = i as f64 / (m - 1) as f64;
        // cosine map clusters samples at both ends of the sector
        let phi = phi_min + span * 0.5 * (1.0 - (PI * xi).cos());
        let rho = (d / (n as f64 * phi).sin()).powf(1.0 / n as f64);
        seg.push(Complex64::from_polar(rho, phi));
    }
    Ok(ACProfile { n, d, conjugated, rho_max, segments: vec![seg] })
}

/// One smooth piece of the product submanifold: samples indexed
/// (ip * nt + it) * ns + is.
#[derive(Debug, Clone)]
pub struct AcSegment {
    pub f: Vec<Complex64>,
    pub samples: Vec<C3>,
}

/// Sampled Sigma_d: the profile, the (pre-rotated) link, and the product
/// samples Phi = f * u.
#[derive(Debug, Clone)]
pub struct ACGrid {
    pub profile: ACProfile,
    pub link: SurfaceGrid,
    /// calibration phase of the link that was rotated away, so residuals are
    /// always taken against the 0-calibration
    pub theta_removed: f64,
    pub segments: Vec<AcSegment>,
}

// generous enough for the O(h^2) finite-difference floor of honest links at
// modest resolutions, far below any genuinely non-Legendrian surface
pub const DEFAULT_LINK_TOL: f64 = 1e-2;

/// Build the product Phi(t, x) = f(t) u(x) over every profile segment.
///
/// The link must pass the Legendrian residual check at `link_tol` (finite
/// differences on the link grid); the link's own calibration phase theta is
/// removed by the global rotation e^{-i theta / n} so every residual is
/// measured against the 0-calibration.
pub fn build_ac_surface(
    profile: &ACProfile,
    link: &SurfaceGrid,
    link_tol: f64,
) -> Result<ACGrid> {
    let leg = verify::legendrian_residual(link)?;
    if leg.max_abs > link_tol {
        return Err(Error::LinkNotLegendrian {
            max_abs: leg.max_abs,
            tol: link_tol,
        });
    }
    let theta_removed = link.params.map(|p| p.theta).unwrap_or(0.0);
    let spin = Complex64::from_polar(1.0, -theta_removed / profile.n as f64);
    let rotated: Vec<C3> = link
        .samples
        .iter()
        .map(|s| geom::cscale(&s.u, spin))
        .collect();

    let ns = link.ns;
    let nt = link.nt;
    let mut segments = Vec::with_capacity(profile.segments.len());
    for seg in &profile.segments {
        let f = seg.clone();
        let np = f.len();
        let samples: Vec<C3> = par::map_indexed(np * ns * nt, |idx| {
            let ip = idx / (ns * nt);
            let rest = idx % (ns * nt);
            geom::cscale(&rotated[rest], f[ip])
        });
        segments.push(AcSegment { f, samples });
    }
    let mut link_rotated = link.clone();
    for (s, u) in link_rotated.samples.iter_mut().zip(rotated) {
        s.u = u;
    }
    Ok(ACGrid {
        profile: profile.clone(),
        link: link_rotated,
        theta_removed,
        segments,
    })
}

impl ACGrid {
    #[inline]
    fn at(&self, seg: usize, ip: usize, is: usize, it: usize) -> &C3 {
        &self.segments[seg].samples[(ip * self.link.nt + it) * self.link.ns + is]
    }

    /// Centered-difference tangent triple (Phi_p, Phi_s, Phi_t) at an
    /// interior node.
    fn tangents(&self, seg: usize, ip: usize, is: usize, it: usize) -> (C3, C3, C3) {
        let ds = self.link.ds();
        let dt = self.link.dt();
        let mut dp = geom::C3_ZERO;
        let mut dus = geom::C3_ZERO;
        let mut dut = geom::C3_ZERO;
        let (pm, pp) = (self.at(seg, ip - 1, is, it), self.at(seg, ip + 1, is, it));
        let (sm, sp) = (self.at(seg, ip, is - 1, it), self.at(seg, ip, is + 1, it));
        let (tm, tp) = (self.at(seg, ip, is, it - 1), self.at(seg, ip, is, it + 1));
        for j in 0..3 {
            dp[j] = pp[j] - pm[j]; // profile direction: uniform xi, scale-free
            dus[j] = (sp[j] - sm[j]) / (2.0 * ds);
            dut[j] = (tp[j] - tm[j]) / (2.0 * dt);
        }
        (dp, dus, dut)
    }

    fn max_over_interior<F>(&self, f: F) -> f64
    where
        F: Fn(&C3, &C3, &C3) -> f64 + Sync + Send,
    {
        let ns = self.link.ns;
        let nt = self.link.nt;
        let mut worst = 0.0_f64;
        for (seg_i, seg) in self.segments.iter().enumerate() {
            let np = seg.f.len();
            if np < 3 {
                continue;
            }
            let inner = (np - 2) * (ns - 2) * (nt - 2);
            let vals = par::map_indexed(inner, |idx| {
                let ip = 1 + idx / ((ns - 2) * (nt - 2));
                let rest = idx % ((ns - 2) * (nt - 2));
                let it = 1 + rest / (ns - 2);
                let is = 1 + rest % (ns - 2);
                let (dp, dus, dut) = self.tangents(seg_i, ip, is, it);
                f(&dp, &dus, &dut)
            });
            worst = worst.max(vals.into_iter().fold(0.0, f64::max));
        }
        worst
    }

    /// Scale-invariant Lagrangian residual: max over tangent pairs of
    /// |omega(a, b)| / (|a| |b|).
    pub fn lagrangian_residual(&self) -> verify::ResidualReport {
        let max = self.max_over_interior(|dp, dus, dut| {
            let pairs = [
                (dp, dus),
                (dp, dut),
                (dus, dut),
            ];
            let mut worst = 0.0_f64;
            for (a, b) in pairs {
                let scale = (geom::norm_sq(a) * geom::norm_sq(b)).sqrt();
                if scale > 1e-300 {
                    worst = worst.max(geom::omega(a, b).abs() / scale);
                }
            }
            worst
        });
        verify::ResidualReport {
            name: "ac_lagrangian".into(),
            max_abs: max,
            grid_dims: (self.link.ns, self.link.nt),
            h: self.link.ds().max(self.link.dt()),
            convergence_order: None,
        }
    }

    /// Special-Lagrangian residual against the 0-calibration:
    /// |Im det_C(tangents)| / vol and | |Re det_C| / vol - 1 |.
    pub fn special_residual(&self) -> (verify::ResidualReport, verify::ResidualReport) {
        let im = self.max_over_interior(|dp, dus, dut| {
            let vol = geom::gram_volume(dp, dus, dut);
            if vol < 1e-300 {
                return 0.0;
            }
            geom::det3(dp, dus, dut).im.abs() / vol
        });
        let re = self.max_over_interior(|dp, dus, dut| {
            let vol = geom::gram_volume(dp, dus, dut);
            if vol < 1e-300 {
                return 0.0;
            }
            (geom::det3(dp, dus, dut).re.abs() / vol - 1.0).abs()
        });
        let mk = |name: &str, max_abs: f64| verify::ResidualReport {
            name: name.into(),
            max_abs,
            grid_dims: (self.link.ns, self.link.nt),
            h: self.link.ds().max(self.link.dt()),
            convergence_order: None,
        };
        (mk("ac_special_im", im), mk("ac_special_re", re))
    }
}

/// One row of the end-decay table: the worst distance from the |f| = rho
/// slice of Sigma_d to each of the two candidate cones.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EndDecayRow {
    pub rho: f64,
    /// slice near arg f = 0: distance to C(Sigma)
    pub near_cone: f64,
    /// distance of the same slice to the rotated cone C(e^{i pi/n} Sigma)
    pub rotated_cone: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EndDecayReport {
    pub d: f64,
    pub rows: Vec<EndDecayRow>,
    /// same table for the arg f ~ pi/n end (distances swap roles)
    pub far_end_rows: Vec<EndDecayRow>,
}

/// Distance from p to the cone over the sampled link (min over rays). The
/// residual vector p - t x is formed explicitly; the algebraically equal
/// |p|^2 - t^2 loses half the digits to cancellation near the cone.
fn dist_to_cone(p: &C3, link_pts: &[C3]) -> f64 {
    let mut best = f64::INFINITY;
    for x in link_pts {
        let t = geom::inner(p, x).max(0.0);
        let res = geom::sub(p, &geom::scale(x, t));
        best = best.min(geom::norm_sq(&res));
    }
    best.sqrt()
}

/// Empirical decay of the two ends toward their cones.
///
/// For each requested radius rho the slice {f x : |f| = rho} on the
/// arg f ~ 0 side is compared against C(Sigma) and C(e^{i pi/n} Sigma); the
/// mirrored slice near arg f = pi/n is compared the same way. No decay rate
/// is asserted, only the measured table.
pub fn asymptotic_ends(ac: &ACGrid, rhos: &[f64]) -> Result<EndDecayReport> {
    let n = ac.profile.n;
    let d = ac.profile.d;
    if rhos.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two far-field radii".into(),
        ));
    }
    // stride the link down to keep the distance scan quadratic but small
    let stride = ((ac.link.samples.len() as f64 / 1024.0).sqrt().ceil() as usize).max(1);
    let mut link_pts = Vec::new();
    for it in (0..ac.link.nt).step_by(stride) {
        for is in (0..ac.link.ns).step_by(stride) {
            link_pts.push(ac.link.at(is, it).u);
        }
    }
    let spin = Complex64::from_polar(1.0, PI / n as f64);
    let rotated_pts: Vec<C3> = link_pts.iter().map(|x| geom::cscale(x, spin)).collect();

    let slice_dists = |f: Complex64| -> (f64, f64) {
        let mut worst_near = 0.0_f64;
        let mut worst_rot = 0.0_f64;
        for x in &link_pts {
            let p = geom::cscale(x, f);
            worst_near = worst_near.max(dist_to_cone(&p, &link_pts));
            worst_rot = worst_rot.max(dist_to_cone(&p, &rotated_pts));
        }
        (worst_near, worst_rot)
    };

    let mut rows = Vec::with_capacity(rhos.len());
    let mut far_rows = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        if d > 0.0 {
            let sin_arg = d / rho.powi(n as i32);
            if sin_arg > 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "radius {rho} is inside the neck |f|^n < d"
                )));
            }
            let phi = sin_arg.asin() / n as f64;
            let (near, rot) = slice_dists(Complex64::from_polar(rho, phi));
            rows.push(EndDecayRow { rho, near_cone: near, rotated_cone: rot });
            let (near2, rot2) = slice_dists(Complex64::from_polar(rho, PI / n as f64 - phi));
            far_rows.push(EndDecayRow { rho, near_cone: near2, rotated_cone: rot2 });
        } else {
            // the rays lie exactly on the cones
            rows.push(EndDecayRow { rho, near_cone: 0.0, rotated_cone: f64::NAN });
            far_rows.push(EndDecayRow { rho, near_cone: f64::NAN, rotated_cone: 0.0 });
        }
    }
    Ok(EndDecayReport { d, rows, far_end_rows: far_rows })
}

/// Sup over Sigma_d samples with |f| <= rho_cap of the distance to the cone
/// union C(Sigma) u C(e^{i pi/n} Sigma); the d -> 0 continuity measure.
pub fn distance_to_cone_union(ac: &ACGrid, rho_cap: f64) -> f64 {
    let spin = Complex64::from_polar(1.0, PI / ac.profile.n as f64);
    let stride = ((ac.link.samples.len() as f64 / 1024.0).sqrt().ceil() as usize).max(1);
    let mut link_pts = Vec::new();
    for it in (0..ac.link.nt).step_by(stride) {
        for is in (0..ac.link.ns).step_by(stride) {
            link_pts.push(ac.link.at(is, it).u);
        }
    }
    let rotated: Vec<C3> = link_pts.iter().map(|x| geom::cscale(x, spin)).collect();
    let mut worst = 0.0_f64;
    for seg in &ac.segments {
        for (ip, f) in seg.f.iter().enumerate() {
            if f.norm() > rho_cap {
                continue;
            }
            // one representative link point per profile sample is enough:
            // the product structure makes the distance x-independent
            let p = geom::cscale(&link_pts[ip % link_pts.len()], *f);
            let d = dist_to_cone(&p, &link_pts).min(dist_to_cone(&p, &rotated));
            worst = worst.max(d);
        }
    }
    worst
}
