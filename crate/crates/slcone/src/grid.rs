//! Sampled immersions over parameter rectangles.
//!
//! Rows share a t value (one elliptic/phase evaluation per row), columns
//! apply the e^{As} rotation. Row and sample evaluation run under rayon when
//! the `parallel` feature is enabled; `build_sequential` is the reference
//! path benchmarked against it.

use crate::error::{Error, Result};
use crate::family::{ConeParameters, Immersion, ImmersionSample};
use crate::geom::C3;
use crate::par;

/// A uniformly sampled rectangle of an immersion.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub params: Option<ConeParameters>,
    pub s_range: (f64, f64),
    pub t_range: (f64, f64),
    pub ns: usize,
    pub nt: usize,
    /// row-major in t: index = it * ns + is
    pub samples: Vec<ImmersionSample>,
}

impl SurfaceGrid {
    /// Build by sampling `imm` on a ns x nt grid (parallel when enabled).
    pub fn build(
        imm: &Immersion,
        s_range: (f64, f64),
        t_range: (f64, f64),
        ns: usize,
        nt: usize,
    ) -> Result<Self> {
        Self::build_inner(imm, s_range, t_range, ns, nt, false)
    }

    /// Sequential reference build (identical output, no rayon).
    pub fn build_sequential(
        imm: &Immersion,
        s_range: (f64, f64),
        t_range: (f64, f64),
        ns: usize,
        nt: usize,
    ) -> Result<Self> {
        Self::build_inner(imm, s_range, t_range, ns, nt, true)
    }

    fn build_inner(
        imm: &Immersion,
        s_range: (f64, f64),
        t_range: (f64, f64),
        ns: usize,
        nt: usize,
        sequential: bool,
    ) -> Result<Self> {
        if ns < 2 || nt < 2 {
            return Err(Error::GridTooCoarse {
                min: 2,
                got: ns.min(nt),
            });
        }
        let ds = (s_range.1 - s_range.0) / (ns - 1) as f64;
        let dt = (t_range.1 - t_range.0) / (nt - 1) as f64;
        // one profile evaluation per row, then rotate across the row
        let rows: Vec<Result<Vec<ImmersionSample>>> = if sequential {
            par::map_indexed_seq(nt, |it| {
                build_row(imm, s_range.0, ds, ns, t_range.0 + it as f64 * dt)
            })
        } else {
            par::map_indexed(nt, |it| {
                build_row(imm, s_range.0, ds, ns, t_range.0 + it as f64 * dt)
            })
        };
        let mut samples = Vec::with_capacity(ns * nt);
        for row in rows {
            samples.extend(row?);
        }
        Ok(Self {
            params: Some(*imm.params()),
            s_range,
            t_range,
            ns,
            nt,
            samples,
        })
    }

    /// Build from an arbitrary chart (control surfaces, external links).
    /// Metric fields y, K and phases are not defined for such grids and are
    /// filled with NaN.
    pub fn from_fn<F>(
        s_range: (f64, f64),
        t_range: (f64, f64),
        ns: usize,
        nt: usize,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(f64, f64) -> C3 + Sync + Send,
    {
        if ns < 2 || nt < 2 {
            return Err(Error::GridTooCoarse {
                min: 2,
                got: ns.min(nt),
            });
        }
        let ds = (s_range.1 - s_range.0) / (ns - 1) as f64;
        let dt = (t_range.1 - t_range.0) / (nt - 1) as f64;
        let samples = par::map_indexed(ns * nt, |idx| {
            let (it, is) = (idx / ns, idx % ns);
            let s = s_range.0 + is as f64 * ds;
            let t = t_range.0 + it as f64 * dt;
            ImmersionSample {
                s,
                t,
                u: f(s, t),
                y: f64::NAN,
                k_gauss: f64::NAN,
                theta: [f64::NAN; 3],
            }
        });
        Ok(Self {
            params: None,
            s_range,
            t_range,
            ns,
            nt,
            samples,
        })
    }

    #[inline]
    pub fn at(&self, is: usize, it: usize) -> &ImmersionSample {
        &self.samples[it * self.ns + is]
    }

    pub fn ds(&self) -> f64 {
        (self.s_range.1 - self.s_range.0) / (self.ns - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t_range.1 - self.t_range.0) / (self.nt - 1) as f64
    }

    /// Observed extremes of the Gauss curvature over the samples.
    pub fn k_extremes(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.samples {
            lo = lo.min(s.k_gauss);
            hi = hi.max(s.k_gauss);
        }
        (lo, hi)
    }

    /// Spread max(y) - min(y) of the conformal factor over the samples.
    pub fn y_spread(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.samples {
            lo = lo.min(s.y);
            hi = hi.max(s.y);
        }
        hi - lo
    }

    /// Minimum ambient distance between parameter-adjacent samples; the
    /// resolution scale used to pick proximity thresholds.
    pub fn min_neighbor_spacing(&self) -> f64 {
        let mut best = f64::INFINITY;
        for it in 0..self.nt {
            for is in 0..self.ns {
                let here = &self.at(is, it).u;
                if is + 1 < self.ns {
                    best = best.min(crate::geom::dist(here, &self.at(is + 1, it).u));
                }
                if it + 1 < self.nt {
                    best = best.min(crate::geom::dist(here, &self.at(is, it + 1).u));
                }
            }
        }
        best
    }
}

fn build_row(
    imm: &Immersion,
    s0: f64,
    ds: f64,
    ns: usize,
    t: f64,
) -> Result<Vec<ImmersionSample>> {
    let st = imm.state_at(t)?;
    let (_, _, y, k_gauss) = imm.profile(t)?;
    let theta = imm.phases(t)?;
    let axis = imm.axis();
    let mut row = Vec::with_capacity(ns);
    for is in 0..ns {
        let s = s0 + is as f64 * ds;
        row.push(ImmersionSample {
            s,
            t,
            u: axis.rotate(&st.z, s),
            y,
            k_gauss,
            theta,
        });
    }
    Ok(row)
}
