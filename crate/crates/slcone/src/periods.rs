//! Closure analysis: when does u_{alpha,J} descend to a torus?
//!
//! The t-component of any period is an integer multiple of the basic period
//! T of y. A pure s-translation period exists iff alpha is rational, and two
//! independent periods exist iff additionally
//! (alpha Dtheta_1(T) - Dtheta_2(T)) / 2pi is rational; the proof's recipe
//! then produces an explicit second period (-2N Dtheta_1(T), 2NT).
//!
//! For J = 0 the lattice is classified exactly: alpha = m/n in lowest terms
//! gives basis (2n pi, 0), (0, 4Ke/r) when mn is even, and the oblique basis
//! (2n pi, 0), (n pi, 2Ke/r) when mn is odd.

use crate::error::{Error, Result};
use crate::family::{ConeParameters, Immersion, J_MAX};
use crate::geom;
use crate::grid::SurfaceGrid;
use crate::par;
use crate::rational;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Zero, one, or two independent periods (sigma, tau) of the immersion.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodLattice {
    /// period vectors in the (s, t) parameter plane
    pub basis: Vec<[f64; 2]>,
    /// Some(true/false) for the classified J = 0 lattices; None when only
    /// the existence recipe is available (J != 0), where no shape claim is
    /// made about the full lattice
    pub rectangular: Option<bool>,
    /// basic period T of y = |Az|^2
    pub basic_period_t: f64,
    /// phase increments (Dtheta_1, Dtheta_2, Dtheta_3) over T
    pub holonomy: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

/// The classified J = 0 torus for alpha = m/n.
#[derive(Debug, Clone, Serialize)]
pub struct TorusSpec {
    pub m: u32,
    pub n: u32,
    pub lattice: PeriodLattice,
    pub parity: Parity,
    /// m = n = 1 is the flat Clifford torus
    pub degenerate_flat: bool,
}

/// Explicit period lattice of the J = 0 torus T_{m,n}.
pub fn torus_lattice(m: u32, n: u32) -> Result<TorusSpec> {
    if m == 0 || m > n || (m < n && rational::gcd(m as u128, n as u128) != 1) || (m == n && m != 1)
    {
        return Err(Error::BadTorusIndices { m, n });
    }
    let alpha = m as f64 / n as f64;
    let params = ConeParameters::new(alpha, 0.0, 0.0)?;
    let imm = Immersion::new(params)?;
    let t_basic = imm.basic_period(); // 2 Ke(k) / r
    let parity = if m.is_multiple_of(2) || n.is_multiple_of(2) {
        Parity::Even
    } else {
        Parity::Odd
    };
    let (basis, rectangular) = match parity {
        Parity::Even => (
            vec![[2.0 * n as f64 * PI, 0.0], [0.0, 2.0 * t_basic]],
            Some(true),
        ),
        Parity::Odd => (
            vec![[2.0 * n as f64 * PI, 0.0], [n as f64 * PI, t_basic]],
            Some(false),
        ),
    };
    Ok(TorusSpec {
        m,
        n,
        lattice: PeriodLattice {
            basis,
            rectangular,
            basic_period_t: t_basic,
            holonomy: imm.holonomy(),
        },
        parity,
        degenerate_flat: m == 1 && n == 1,
    })
}

/// Minimality facts for the J = 0 lattice of T_{m,n}, from the unit-modulus
/// conditions: (sigma, 0) is a period iff sigma and sigma m/n are in 2 pi Z,
/// and (sigma, T) is a period iff e^{i sigma} = e^{i sigma m/n} = -1.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MinimalityCheck {
    /// smallest positive sigma with (sigma, 0) a period: always 2 n pi
    pub minimal_sigma: f64,
    /// whether some (sigma, T) is a period (true iff m n odd), and the
    /// smallest such sigma in [0, 2 n pi)
    pub half_cell_period: Option<f64>,
}

pub fn lattice_minimality(m: u32, n: u32) -> Result<MinimalityCheck> {
    if m == 0 || m > n {
        return Err(Error::BadTorusIndices { m, n });
    }
    // sigma = 2 pi c with c m / n integer; minimal c = n when gcd(m,n) = 1
    let minimal_sigma = 2.0 * PI * n as f64;
    // sigma = (2a+1) pi and sigma m/n = (2b+1) pi simultaneously solvable
    // iff m and n are both odd; then sigma = n pi is the smallest solution
    let half_cell_period = if !m.is_multiple_of(2) && !n.is_multiple_of(2) {
        Some(n as f64 * PI)
    } else {
        None
    };
    Ok(MinimalityCheck {
        minimal_sigma,
        half_cell_period,
    })
}

/// Options for `closure_test`.
#[derive(Debug, Clone, Copy)]
pub struct ClosureOptions {
    /// acceptance tolerance for rational detection
    pub tol: f64,
    /// continued-fraction denominator bound
    pub max_den: u64,
    /// exact rational alpha = m/n when known (bypasses detection)
    pub alpha_rational: Option<(i64, i64)>,
    /// verify emitted periods on a test grid of this size (0 skips)
    pub verify_grid: usize,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_den: 1_000_000,
            alpha_rational: None,
            verify_grid: 64,
        }
    }
}

/// Result of the closure analysis at one (alpha, J).
#[derive(Debug, Clone, Serialize)]
pub struct ClosureReport {
    pub alpha: f64,
    pub j: f64,
    pub lattice: PeriodLattice,
    /// detected (or supplied) rational alpha
    pub alpha_rational: Option<(i64, i64)>,
    /// the quantity (alpha Dtheta_1(T) - Dtheta_2(T)) / 2 pi
    pub phase_ratio: f64,
    pub phase_rational: Option<(i64, i64)>,
    /// max |u(p + omega) - u(p)| over the test grid, across emitted periods
    pub verified_max_deviation: f64,
    pub message: String,
}

/// Decide whether u_{alpha,J} closes up, and emit explicit periods.
///
/// Detection is tolerance-aware: a None never claims irrationality, only
/// "not detected at this tolerance with the given denominator bound".
pub fn closure_test(params: &ConeParameters, opts: &ClosureOptions) -> Result<ClosureReport> {
    let imm = Immersion::new(*params)?;
    let t_basic = imm.basic_period();
    let holonomy = imm.holonomy();
    let alpha = params.alpha();
    let j = params.j;

    let mut report = ClosureReport {
        alpha,
        j,
        lattice: PeriodLattice {
            basis: vec![],
            rectangular: None,
            basic_period_t: t_basic,
            holonomy,
        },
        alpha_rational: None,
        phase_ratio: f64::NAN,
        phase_rational: None,
        verified_max_deviation: 0.0,
        message: String::new(),
    };

    if !t_basic.is_finite() {
        report.message = "separatrix orbit: the profile is not periodic (sphere limit)".into();
        return Ok(report);
    }

    let alpha_rat = opts
        .alpha_rational
        .or_else(|| rational::detect(alpha, opts.max_den, opts.tol));
    report.alpha_rational = alpha_rat;

    match alpha_rat {
        None => {
            if j == 0.0 {
                // the t-translation by 2T is always a period at J = 0
                report.lattice.basis = vec![[0.0, 2.0 * t_basic]];
                report.message = format!(
                    "no rational closure detected at tolerance {} (denominators up to {}); \
                     single period family only",
                    opts.tol, opts.max_den
                );
            } else {
                report.message = format!(
                    "no rational closure detected at tolerance {} (denominators up to {})",
                    opts.tol, opts.max_den
                );
            }
        }
        Some((ma, na)) => {
            let n = na.unsigned_abs() as u32;
            let m = ma.unsigned_abs() as u32;
            if j == 0.0 {
                if m == 0 {
                    // alpha = 0 with J = 0 is the separatrix; unreachable here
                    report.message = "alpha = 0 requires J > 0 for a periodic profile".into();
                } else {
                    let spec = torus_lattice(m, n)?;
                    report.lattice = spec.lattice;
                    report.message = format!("J = 0 torus T_{{{m},{n}}} ({:?} lattice)", spec.parity);
                }
            } else {
                // two periods iff (alpha Dtheta_1 - Dtheta_2)/2pi is rational
                let ratio = (alpha * holonomy[0] - holonomy[1]) / (2.0 * PI);
                report.phase_ratio = ratio;
                let phase_rat = rational::detect(ratio, opts.max_den, opts.tol);
                report.phase_rational = phase_rat;
                let sigma1 = 2.0 * n as f64 * PI;
                match phase_rat {
                    Some((_, nn)) => {
                        let big_n = nn.unsigned_abs() as f64;
                        // recipe period: sigma = -2N Dtheta_1 / lambda_1, tau = 2NT
                        report.lattice.basis = vec![
                            [sigma1, 0.0],
                            [-2.0 * big_n * holonomy[0], 2.0 * big_n * t_basic],
                        ];
                        report.message =
                            "two independent periods (existence recipe basis; lattice shape \
                             unclassified for J != 0)"
                                .into();
                    }
                    None => {
                        report.lattice.basis = vec![[sigma1, 0.0]];
                        report.message = format!(
                            "rational alpha gives the s-translation period; no rational phase \
                             closure detected at tolerance {} (denominators up to {})",
                            opts.tol, opts.max_den
                        );
                    }
                }
            }
        }
    }

    if opts.verify_grid >= 2 {
        let mut worst = 0.0_f64;
        for w in &report.lattice.basis {
            worst = worst.max(verify_period(&imm, w[0], w[1], opts.verify_grid)?);
        }
        report.verified_max_deviation = worst;
    }
    Ok(report)
}

/// max |u(s + sigma, t + tau) - u(s, t)| over an n x n test grid.
pub fn verify_period(imm: &Immersion, sigma: f64, tau: f64, n: usize) -> Result<f64> {
    let t_basic = imm.basic_period();
    let t_span = if t_basic.is_finite() { 2.0 * t_basic } else { 4.0 };
    let devs = par::map_indexed(n * n, |idx| -> Result<f64> {
        let (i, k) = (idx % n, idx / n);
        let s = 4.0 * PI * i as f64 / n as f64;
        let t = t_span * k as f64 / n as f64;
        let a = imm.sample(s, t)?;
        let b = imm.sample(s + sigma, t + tau)?;
        Ok(geom::dist(&a.u, &b.u))
    });
    let mut worst = 0.0_f64;
    for d in devs {
        worst = worst.max(d?);
    }
    Ok(worst)
}

/// A pair of samples that are ambient-close but far apart in the lattice
/// quotient of the parameter plane.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuspiciousPair {
    pub i: usize,
    pub j: usize,
    pub ambient: f64,
    /// quotient parameter distance in units of grid cells
    pub cells: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddednessReport {
    pub eps: f64,
    pub min_sample_spacing: f64,
    pub threshold_cells: f64,
    pub pairs_checked: u64,
    pub suspicious_count: usize,
    /// first suspicious pairs, capped
    pub pairs: Vec<SuspiciousPair>,
}

const PAIR_CAP: usize = 100;
const CELL_THRESHOLD: f64 = 4.0;

/// Spatial-hash scan for near self-intersections.
///
/// Every pair at ambient distance < eps whose lattice-quotient parameter
/// distance exceeds `CELL_THRESHOLD` grid cells is reported. An empty report
/// means no self-intersection was detected at this resolution; it is a scan,
/// not a proof. `eps` defaults to half the minimal nearest-neighbor sample
/// distance.
pub fn embeddedness_scan(
    grid: &SurfaceGrid,
    lattice: &PeriodLattice,
    eps: Option<f64>,
) -> Result<EmbeddednessReport> {
    if lattice.basis.len() != 2 {
        return Err(Error::GridDomainMismatch(
            "embeddedness scan needs a rank-2 lattice".into(),
        ));
    }
    let w1 = lattice.basis[0];
    let w2 = lattice.basis[1];
    if w1[1].abs() > 1e-12 {
        return Err(Error::GridDomainMismatch(
            "first basis vector must be an s-translation (sigma, 0)".into(),
        ));
    }
    // the rectangle sigma_1 x tau_2 is a fundamental domain
    let span_s = grid.s_range.1 - grid.s_range.0;
    let span_t = grid.t_range.1 - grid.t_range.0;
    let ds = grid.ds();
    let dt = grid.dt();
    let ok = |span: f64, cell: f64, step: f64| {
        (span - cell).abs() <= 1e-9 * cell.abs().max(1.0)
            || (span + step - cell).abs() <= 1e-9 * cell.abs().max(1.0)
    };
    if !ok(span_s, w1[0], ds) || !ok(span_t, w2[1], dt) {
        return Err(Error::GridDomainMismatch(format!(
            "grid spans ({span_s:.6}, {span_t:.6}) vs fundamental cell ({:.6}, {:.6})",
            w1[0], w2[1]
        )));
    }

    let min_spacing = grid.min_neighbor_spacing();
    let eps = eps.unwrap_or(0.5 * min_spacing);

    // hash all samples into 6D cells of width eps
    let key = |u: &geom::C3| -> [i32; 6] {
        let mut k = [0i32; 6];
        for j in 0..3 {
            k[2 * j] = (u[j].re / eps).floor() as i32;
            k[2 * j + 1] = (u[j].im / eps).floor() as i32;
        }
        k
    };
    let mut cells: HashMap<[i32; 6], Vec<u32>> = HashMap::new();
    for (i, smp) in grid.samples.iter().enumerate() {
        cells.entry(key(&smp.u)).or_default().push(i as u32);
    }

    // 3^6 neighbor offsets
    let mut offsets = Vec::with_capacity(729);
    let r = [-1i32, 0, 1];
    for a in r {
        for b in r {
            for c in r {
                for d in r {
                    for e in r {
                        for f in r {
                            offsets.push([a, b, c, d, e, f]);
                        }
                    }
                }
            }
        }
    }

    let quotient_cells = |a: &crate::family::ImmersionSample,
                          b: &crate::family::ImmersionSample|
     -> f64 {
        let dsp = a.s - b.s;
        let dtp = a.t - b.t;
        let mut best = f64::INFINITY;
        for p in -2i32..=2 {
            for q in -2i32..=2 {
                let rs = dsp - p as f64 * w1[0] - q as f64 * w2[0];
                let rt = dtp - q as f64 * w2[1];
                let d = (rs / ds).hypot(rt / dt);
                best = best.min(d);
            }
        }
        best
    };

    let n = grid.samples.len();
    let per_sample: Vec<(u64, Vec<SuspiciousPair>)> = par::map_indexed(n, |i| {
        let a = &grid.samples[i];
        let base = key(&a.u);
        let mut checked = 0u64;
        let mut found = Vec::new();
        for off in &offsets {
            let mut k = base;
            for d in 0..6 {
                k[d] += off[d];
            }
            if let Some(list) = cells.get(&k) {
                for &jj in list {
                    let j = jj as usize;
                    if j <= i {
                        continue;
                    }
                    checked += 1;
                    let b = &grid.samples[j];
                    let dist = geom::dist(&a.u, &b.u);
                    if dist < eps {
                        let cells_apart = quotient_cells(a, b);
                        if cells_apart > CELL_THRESHOLD {
                            found.push(SuspiciousPair {
                                i,
                                j,
                                ambient: dist,
                                cells: cells_apart,
                            });
                        }
                    }
                }
            }
        }
        (checked, found)
    });

    let mut report = EmbeddednessReport {
        eps,
        min_sample_spacing: min_spacing,
        threshold_cells: CELL_THRESHOLD,
        pairs_checked: 0,
        suspicious_count: 0,
        pairs: Vec::new(),
    };
    for (checked, found) in per_sample {
        report.pairs_checked += checked;
        report.suspicious_count += found.len();
        for p in found {
            if report.pairs.len() < PAIR_CAP {
                report.pairs.push(p);
            }
        }
    }
    Ok(report)
}

/// Basic period of y measured directly from the integrated flow, with no
/// use of the elliptic closed form: ydot = d|Az|^2/dt vanishes at 0, T/2,
/// T, ...; the second sign change after t = 0 is bracketed on a sampled
/// trajectory and refined by bisection. Cross-validates T = 2 Ke(k)/r.
pub fn basic_period_from_flow(params: &ConeParameters, tol: f64) -> Result<f64> {
    let imm = Immersion::new(*params)?;
    let axis = imm.axis();
    let st0 = imm.initial_state();
    let ydot_at = |t: f64| -> Result<f64> {
        let traj = crate::neumann::integrate_sampled(&st0, &axis, t, tol, &[t])?;
        let st = traj.last();
        let mut v = 0.0;
        for j in 0..3 {
            v += 2.0 * axis.lambda[j] * axis.lambda[j]
                * (st.z[j].re * st.zdot[j].re + st.z[j].im * st.zdot[j].im);
        }
        Ok(v)
    };
    // coarse scan for the first two sign changes (T/2 and T)
    let horizon = 1000.0;
    let dt = 0.05;
    let mut crossings = Vec::new();
    let mut t_prev = dt;
    let mut v_prev = ydot_at(t_prev)?;
    let mut t = 2.0 * dt;
    while t < horizon && crossings.len() < 2 {
        let v = ydot_at(t)?;
        if v_prev * v <= 0.0 && v_prev != 0.0 {
            crossings.push((t_prev, t));
        }
        t_prev = t;
        v_prev = v;
        t += dt;
    }
    let (mut lo, mut hi) = *crossings
        .get(1)
        .ok_or(Error::BracketingFailed("basic period from flow"))?;
    let mut f_lo = ydot_at(lo)?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let f_mid = ydot_at(mid)?;
        if f_lo * f_mid <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// theta_2 increment over one basic period at alpha = 0, as a function of J.
///
/// Strictly monotone increasing on (0, 1/(3 sqrt 3)), from pi (separatrix
/// limit) to 2 pi / sqrt 3 (Clifford limit). Below J ~ 1e-3 the phase
/// integrand develops a 1/R_2^2 spike whose double-precision jitter exceeds
/// the quadrature tolerance, and the evaluation reports non-convergence.
pub fn theta2_of_j(j: f64) -> Result<f64> {
    if !(0.0 < j && j < J_MAX) {
        return Err(Error::InvalidParameter(format!(
            "theta2_of_j needs 0 < J < 1/(3 sqrt 3), got {j}"
        )));
    }
    let imm = Immersion::new(ConeParameters::new(0.0, j, 0.0)?)?;
    Ok(imm.holonomy()[1])
}

/// Bisection solve of theta_2(T)(J) / 2 pi = target at alpha = 0.
///
/// Returns (J*, residual). Errors with the attainable window when the target
/// lies outside it.
pub fn search_theta2(target: f64, tol: f64) -> Result<(f64, f64)> {
    let mut lo = 2e-3; // below this the phase quadrature hits its noise floor
    let mut hi = J_MAX - 1e-9;
    let f = |j: f64| -> Result<f64> { Ok(theta2_of_j(j)? / (2.0 * PI) - target) };
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo * fhi > 0.0 {
        return Err(Error::TargetOutOfRange {
            target,
            lo: flo + target,
            hi: fhi + target,
        });
    }
    let mut fl = flo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() <= tol * 0.1 || (hi - lo) < 1e-16 {
            return Ok((mid, fm.abs()));
        }
        if fl * fm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            fl = fm;
        }
    }
    let mid = 0.5 * (lo + hi);
    Ok((mid, f(mid)?.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn t12_is_rectangular_with_stated_basis() {
        let spec = torus_lattice(1, 2).unwrap();
        assert_eq!(spec.parity, Parity::Even);
        assert_eq!(spec.lattice.rectangular, Some(true));
        let b = &spec.lattice.basis;
        assert_relative_eq!(b[0][0], 4.0 * PI, max_relative = 1e-14);
        assert_eq!(b[0][1], 0.0);
        assert_eq!(b[1][0], 0.0);
        // 4 Ke / r with k^2 = 3/8, r = sqrt 2
        let imm = Immersion::new(ConeParameters::new(0.5, 0.0, 0.0).unwrap()).unwrap();
        let ed = imm.elliptic_data();
        assert_relative_eq!(b[1][1], 4.0 * ed.quarter_period / ed.rate, max_relative = 1e-14);
        assert_relative_eq!(ed.modulus.k_squared(), 0.375, max_relative = 1e-13);
        assert_relative_eq!(ed.rate, 2f64.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn t13_is_oblique() {
        let spec = torus_lattice(1, 3).unwrap();
        assert_eq!(spec.parity, Parity::Odd);
        assert_eq!(spec.lattice.rectangular, Some(false));
        let b = &spec.lattice.basis;
        assert_relative_eq!(b[0][0], 6.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(b[1][0], 3.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(b[1][1], spec.lattice.basic_period_t, max_relative = 1e-14);
    }

    #[test]
    fn t11_flags_clifford() {
        let spec = torus_lattice(1, 1).unwrap();
        assert!(spec.degenerate_flat);
    }

    #[test]
    fn bad_indices_rejected() {
        assert!(torus_lattice(2, 4).is_err());
        assert!(torus_lattice(0, 3).is_err());
        assert!(torus_lattice(3, 2).is_err());
        assert!(torus_lattice(2, 2).is_err());
    }

    #[test]
    fn emitted_periods_verify_on_grid() {
        for (m, n) in [(1, 2), (1, 3)] {
            let spec = torus_lattice(m, n).unwrap();
            let imm =
                Immersion::new(ConeParameters::new(m as f64 / n as f64, 0.0, 0.0).unwrap())
                    .unwrap();
            for w in &spec.lattice.basis {
                let dev = verify_period(&imm, w[0], w[1], 32).unwrap();
                assert!(dev <= 1e-8, "T_{{{m},{n}}} period {w:?}: dev {dev}");
            }
        }
    }

    #[test]
    fn minimality_conditions() {
        let c = lattice_minimality(1, 2).unwrap();
        assert_relative_eq!(c.minimal_sigma, 4.0 * PI);
        assert!(c.half_cell_period.is_none());
        let c = lattice_minimality(1, 3).unwrap();
        assert_eq!(c.half_cell_period, Some(3.0 * PI));
        // numeric confirmation that the excluded candidates really fail
        let imm = Immersion::new(ConeParameters::new(0.5, 0.0, 0.0).unwrap()).unwrap();
        let t = imm.basic_period();
        for (sigma, tau) in [(2.0 * PI, 0.0), (PI, 0.0), (2.0 * PI, t), (4.0 * PI, t)] {
            let dev = verify_period(&imm, sigma, tau, 24).unwrap();
            assert!(dev > 0.1, "({sigma}, {tau}) unexpectedly close to a period: {dev}");
        }
        // and the odd-case extra period really is one
        let imm = Immersion::new(ConeParameters::new(1.0 / 3.0, 0.0, 0.0).unwrap()).unwrap();
        let dev = verify_period(&imm, 3.0 * PI, imm.basic_period(), 24).unwrap();
        assert!(dev <= 1e-8, "oblique half-cell period fails: {dev}");
    }

    #[test]
    fn closure_at_half_zero() {
        let params = ConeParameters::new(0.5, 0.0, 0.0).unwrap();
        let rep = closure_test(&params, &ClosureOptions::default()).unwrap();
        assert_eq!(rep.lattice.basis.len(), 2);
        assert_eq!(rep.alpha_rational, Some((1, 2)));
        assert!(rep.verified_max_deviation <= 1e-8);
    }

    #[test]
    fn closure_rejects_irrational_proxy() {
        let params =
            ConeParameters::new(std::f64::consts::FRAC_1_SQRT_2, 0.0, 0.0).unwrap();
        let rep = closure_test(&params, &ClosureOptions::default()).unwrap();
        assert_eq!(rep.alpha_rational, None);
        assert_eq!(rep.lattice.basis.len(), 1); // only the t-translation
        assert_eq!(rep.lattice.basis[0][0], 0.0);
        assert!(rep.message.contains("no rational closure detected"));
    }

    #[test]
    fn period_from_flow_matches_closed_form() {
        for (alpha, j) in [(0.3, 0.1), (0.5, 0.0)] {
            let params = ConeParameters::new(alpha, j, 0.0).unwrap();
            let closed = Immersion::new(params).unwrap().basic_period();
            let flow = basic_period_from_flow(&params, 1e-11).unwrap();
            assert!(
                (flow - closed).abs() <= 1e-8,
                "alpha={alpha} J={j}: flow {flow} vs closed {closed}"
            );
        }
    }

    #[test]
    fn theta_sum_over_period_lands_in_pi_z() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let alpha = rng.gen_range(0.0..0.95);
            let j = rng.gen_range(0.01..J_MAX * 0.98);
            let imm = Immersion::new(ConeParameters::new(alpha, j, 0.0).unwrap()).unwrap();
            let sum: f64 = imm.holonomy().iter().sum();
            let frac = (sum / PI - (sum / PI).round()).abs();
            assert!(frac <= 1e-8 / PI, "alpha={alpha} J={j}: sum={sum}");
        }
    }

    #[test]
    fn theta2_monotone_and_bracketed() {
        let mut prev = 0.0;
        for i in 1..=30 {
            let j = J_MAX * i as f64 / 31.0;
            let v = theta2_of_j(j).unwrap();
            assert!(v > prev, "not monotone at J={j}");
            prev = v;
        }
        // limits: pi at J -> 0+, 2 pi / sqrt 3 at the Clifford end
        let low = theta2_of_j(2e-3).unwrap();
        assert!(low > PI && low < PI + 0.1, "near-separatrix value {low}");
        assert!((theta2_of_j(J_MAX * 0.9999999).unwrap() - 2.0 * PI / 3f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn search_hits_rational_target_and_closes() {
        let target = 5.0 / 9.0;
        let (j_star, residual) = search_theta2(target, 1e-10).unwrap();
        assert!(residual <= 1e-10, "residual {residual}");
        let params = ConeParameters::new(0.0, j_star, 0.0).unwrap();
        let opts = ClosureOptions {
            alpha_rational: Some((0, 1)),
            ..Default::default()
        };
        let rep = closure_test(&params, &opts).unwrap();
        assert_eq!(rep.lattice.basis.len(), 2, "{}", rep.message);
        assert_eq!(rep.phase_rational, Some((-5, 9)));
        assert!(rep.verified_max_deviation <= 1e-8, "{}", rep.verified_max_deviation);
    }

    #[test]
    fn search_reports_unreachable_target() {
        match search_theta2(1.0 / 3.0, 1e-10) {
            Err(Error::TargetOutOfRange { lo, hi, .. }) => {
                assert!(lo > 0.5 - 1e-3 && hi < 0.578);
            }
            other => panic!("expected TargetOutOfRange, got {other:?}"),
        }
    }

    #[test]
    fn embedded_scan_t12_small_grid_clean() {
        let spec = torus_lattice(1, 2).unwrap();
        let imm = Immersion::new(ConeParameters::new(0.5, 0.0, 0.0).unwrap()).unwrap();
        let cell = (spec.lattice.basis[0][0], spec.lattice.basis[1][1]);
        let g = SurfaceGrid::build(&imm, (0.0, cell.0), (0.0, cell.1), 96, 96).unwrap();
        let rep = embeddedness_scan(&g, &spec.lattice, None).unwrap();
        assert_eq!(rep.suspicious_count, 0, "pairs: {:?}", rep.pairs);
        assert!(rep.pairs_checked > 0);
    }

    #[test]
    fn doubled_domain_is_flagged_everywhere() {
        // grid spans two true fundamental domains in t, but we claim a fake
        // lattice with doubled tau: every sample has a far-parameter twin
        let spec = torus_lattice(1, 2).unwrap();
        let imm = Immersion::new(ConeParameters::new(0.5, 0.0, 0.0).unwrap()).unwrap();
        let (s1, t1) = (spec.lattice.basis[0][0], spec.lattice.basis[1][1]);
        let fake = PeriodLattice {
            basis: vec![[s1, 0.0], [0.0, 2.0 * t1]],
            rectangular: Some(true),
            basic_period_t: spec.lattice.basic_period_t,
            holonomy: [0.0; 3],
        };
        // 49 rows over the doubled span put the true period exactly 24 rows
        // apart, so each sample has an on-grid duplicate
        let g = SurfaceGrid::build(&imm, (0.0, s1), (0.0, 2.0 * t1), 48, 49).unwrap();
        let rep = embeddedness_scan(&g, &fake, None).unwrap();
        assert!(
            rep.suspicious_count >= 48 * 20,
            "only {} suspicious pairs",
            rep.suspicious_count
        );
    }

    #[test]
    fn scan_domain_mismatch_rejected() {
        let spec = torus_lattice(1, 2).unwrap();
        let imm = Immersion::new(ConeParameters::new(0.5, 0.0, 0.0).unwrap()).unwrap();
        let g = SurfaceGrid::build(&imm, (0.0, 1.0), (0.0, 1.0), 16, 16).unwrap();
        assert!(matches!(
            embeddedness_scan(&g, &spec.lattice, None),
            Err(Error::GridDomainMismatch(_))
        ));
    }
}
