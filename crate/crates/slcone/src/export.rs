//! OBJ / CSV / JSON writers for sampled surfaces and product grids.

use crate::acfamily::ACGrid;
use crate::error::Result;
use crate::family::CurvatureExtremes;
use crate::grid::SurfaceGrid;
use crate::periods::PeriodLattice;
use serde_json::json;
use std::io::Write;

/// Orthographic projection R^6 -> R^3 selecting three of the six real
/// coordinates (x1, y1, x2, y2, x3, y3), indexed 0..5.
#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub axes: [usize; 3],
}

impl Default for Projection {
    fn default() -> Self {
        // (Re z1, Im z1, Re z2)
        Self { axes: [0, 1, 2] }
    }
}

impl Projection {
    pub fn parse(s: &str) -> Option<Self> {
        let names = ["x1", "y1", "x2", "y2", "x3", "y3"];
        let mut axes = [0usize; 3];
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return None;
        }
        for (i, p) in parts.iter().enumerate() {
            axes[i] = names.iter().position(|n| n == p)?;
        }
        Some(Self { axes })
    }

    fn apply(&self, u: &crate::geom::C3) -> [f64; 3] {
        let coords = [u[0].re, u[0].im, u[1].re, u[1].im, u[2].re, u[2].im];
        [coords[self.axes[0]], coords[self.axes[1]], coords[self.axes[2]]]
    }
}

/// Wavefront OBJ mesh: projected vertices, grid quads split into triangles.
pub fn write_obj<W: Write>(w: &mut W, grid: &SurfaceGrid, proj: &Projection) -> Result<()> {
    writeln!(w, "# surface grid {} x {}", grid.ns, grid.nt)?;
    for smp in &grid.samples {
        let p = proj.apply(&smp.u);
        writeln!(w, "v {} {} {}", p[0], p[1], p[2])?;
    }
    let idx = |is: usize, it: usize| it * grid.ns + is + 1; // OBJ is 1-based
    for it in 0..grid.nt - 1 {
        for is in 0..grid.ns - 1 {
            let (a, b, c, d) = (idx(is, it), idx(is + 1, it), idx(is + 1, it + 1), idx(is, it + 1));
            writeln!(w, "f {a} {b} {c}")?;
            writeln!(w, "f {a} {c} {d}")?;
        }
    }
    Ok(())
}

/// Per-sample CSV dump: s, t, u1..u6, y, K.
pub fn write_grid_csv<W: Write>(w: &mut W, grid: &SurfaceGrid) -> Result<()> {
    writeln!(w, "s,t,x1,y1,x2,y2,x3,y3,y_conf,K")?;
    for smp in &grid.samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            smp.s,
            smp.t,
            smp.u[0].re,
            smp.u[0].im,
            smp.u[1].re,
            smp.u[1].im,
            smp.u[2].re,
            smp.u[2].im,
            smp.y,
            smp.k_gauss
        )?;
    }
    Ok(())
}

/// JSON manifest of a grid export.
pub fn grid_manifest(
    grid: &SurfaceGrid,
    extremes: Option<&CurvatureExtremes>,
    lattice: Option<&PeriodLattice>,
) -> serde_json::Value {
    let (k_lo, k_hi) = grid.k_extremes();
    json!({
        "alpha": grid.params.map(|p| p.axis.alpha),
        "J": grid.params.map(|p| p.j),
        "theta": grid.params.map(|p| p.theta),
        "grid": { "ns": grid.ns, "nt": grid.nt },
        "ranges": { "s": [grid.s_range.0, grid.s_range.1], "t": [grid.t_range.0, grid.t_range.1] },
        "K_observed": { "min": k_lo, "max": k_hi },
        "K_closed_form": extremes.map(|e| json!({
            "min": e.k_min, "max": e.k_max, "unbounded": e.unbounded
        })),
        "lattice": lattice.map(|l| serde_json::to_value(l).expect("lattice serializes")),
    })
}

/// CSV dump of a product grid: segment, ip, is, it, f, Phi coordinates.
pub fn write_ac_csv<W: Write>(w: &mut W, ac: &ACGrid) -> Result<()> {
    writeln!(w, "seg,ip,is,it,f_re,f_im,p1,q1,p2,q2,p3,q3")?;
    for (seg_i, seg) in ac.segments.iter().enumerate() {
        for ip in 0..seg.f.len() {
            for it in 0..ac.link.nt {
                for is in 0..ac.link.ns {
                    let p = &seg.samples[(ip * ac.link.nt + it) * ac.link.ns + is];
                    writeln!(
                        w,
                        "{seg_i},{ip},{is},{it},{},{},{},{},{},{},{},{}",
                        seg.f[ip].re,
                        seg.f[ip].im,
                        p[0].re,
                        p[0].im,
                        p[1].re,
                        p[1].im,
                        p[2].re,
                        p[2].im
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// OBJ sheet of a product grid at the link's middle t-row: the surface swept
/// by (profile, s).
pub fn write_ac_obj<W: Write>(w: &mut W, ac: &ACGrid, proj: &Projection) -> Result<()> {
    let it = ac.link.nt / 2;
    let mut offset = 1usize;
    for seg in &ac.segments {
        let np = seg.f.len();
        writeln!(w, "# segment sheet {} x {} at link row {}", np, ac.link.ns, it)?;
        for ip in 0..np {
            for is in 0..ac.link.ns {
                let p = proj.apply(&seg.samples[(ip * ac.link.nt + it) * ac.link.ns + is]);
                writeln!(w, "v {} {} {}", p[0], p[1], p[2])?;
            }
        }
        let idx = |ip: usize, is: usize| offset + ip * ac.link.ns + is;
        for ip in 0..np - 1 {
            for is in 0..ac.link.ns - 1 {
                let (a, b, c, d) = (
                    idx(ip, is),
                    idx(ip + 1, is),
                    idx(ip + 1, is + 1),
                    idx(ip, is + 1),
                );
                writeln!(w, "f {a} {b} {c}")?;
                writeln!(w, "f {a} {c} {d}")?;
            }
        }
        offset += np * ac.link.ns;
    }
    Ok(())
}
