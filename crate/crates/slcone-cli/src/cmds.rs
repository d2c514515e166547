use crate::manifest::RunManifest;
use crate::{
    AcArgs, EllipticArgs, EllipticOp, NeumannArgs, PeriodsArgs, SearchArgs, TorusArgs, VerifyArgs,
};
use anyhow::{anyhow, bail, Context};
use serde_json::json;
use slcone::acfamily;
use slcone::elliptic::{self, EllipticModulus};
use slcone::export::{self, Projection};
use slcone::family::{ConeParameters, Immersion};
use slcone::grid::SurfaceGrid;
use slcone::neumann::{conserved, integrate, write_trajectory_csv};
use slcone::periods::{closure_test, embeddedness_scan, ClosureOptions};
use slcone::rational;
use slcone::verify;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

fn parse_alpha(s: &str) -> anyhow::Result<(f64, Option<(i64, i64)>)> {
    let (v, rat) = rational::parse_ratio(s).ok_or_else(|| anyhow!("bad alpha '{s}'"))?;
    if !(0.0..=1.0).contains(&v) {
        bail!("alpha = {v} outside [0, 1]");
    }
    Ok((v, rat))
}

fn parse_grid(s: &str) -> anyhow::Result<(usize, usize)> {
    let (a, b) = s.split_once('x').ok_or_else(|| anyhow!("bad grid '{s}', want NSxNT"))?;
    Ok((a.parse()?, b.parse()?))
}

/// Domain for sampling one immersion: a fundamental cell when the lattice
/// closes with a reasonable t-extent, else a default window.
fn sample_domain(imm: &Immersion, closure: &slcone::periods::ClosureReport) -> ((f64, f64), (f64, f64), &'static str) {
    let t_basic = imm.basic_period();
    if !t_basic.is_finite() {
        return ((0.0, 2.0 * std::f64::consts::PI), (-5.0, 5.0), "separatrix window");
    }
    if closure.lattice.basis.len() == 2 {
        let s1 = closure.lattice.basis[0][0];
        let t2 = closure.lattice.basis[1][1];
        if t2 <= 50.0 * t_basic {
            return ((0.0, s1), (0.0, t2), "fundamental cell");
        }
    }
    ((0.0, 2.0 * std::f64::consts::PI), (0.0, 2.0 * t_basic), "default window")
}

struct Battery {
    reports: Vec<verify::ResidualReport>,
    worst: f64,
}

fn residual_battery(grid: &SurfaceGrid, theta: f64) -> anyhow::Result<Battery> {
    let mut reports = vec![
        verify::harmonic_residual(grid)?,
        verify::hopf_differential(grid)?,
        verify::legendrian_residual(grid)?,
    ];
    let cal = verify::calibration_defect(grid, theta)?;
    reports.push(cal.im);
    reports.push(cal.re);
    let worst = reports.iter().map(|r| r.max_abs).fold(0.0, f64::max);
    Ok(Battery { reports, worst })
}

pub fn torus(a: TorusArgs) -> anyhow::Result<u8> {
    let (alpha, alpha_rat) = parse_alpha(&a.alpha)?;
    let (ns, nt) = parse_grid(&a.grid)?;
    let proj = Projection::parse(&a.proj).ok_or_else(|| anyhow!("bad projection '{}'", a.proj))?;
    let params = ConeParameters::new(alpha, a.j, a.theta)?;
    let imm = Immersion::new(params)?;

    let opts = ClosureOptions { alpha_rational: alpha_rat, ..Default::default() };
    let closure = closure_test(&params, &opts)?;
    let (s_range, t_range, domain_kind) = sample_domain(&imm, &closure);
    let grid = SurfaceGrid::build(&imm, s_range, t_range, ns, nt)?;

    let battery = residual_battery(&grid, a.theta)?;
    let extremes = slcone::family::curvature_extremes(&params)?;

    let prefix = Path::new(&a.out);
    let mut man = RunManifest::new("torus");
    man.args = json!({
        "alpha": a.alpha, "J": a.j, "theta": a.theta, "grid": [ns, nt],
        "format": a.format, "proj": a.proj, "domain": domain_kind,
        "s_range": s_range, "t_range": t_range,
    });
    man.tolerances = json!({ "residual_tol": a.residual_tol });

    let mesh_path = match a.format.as_str() {
        "obj" => {
            let p = prefix.with_extension("obj");
            let mut w = BufWriter::new(File::create(&p)?);
            export::write_obj(&mut w, &grid, &proj)?;
            p
        }
        "csv" => {
            let p = prefix.with_extension("csv");
            let mut w = BufWriter::new(File::create(&p)?);
            export::write_grid_csv(&mut w, &grid)?;
            p
        }
        _ => {
            let p = prefix.with_extension("json");
            std::fs::write(
                &p,
                serde_json::to_string_pretty(&export::grid_manifest(
                    &grid,
                    Some(&extremes),
                    Some(&closure.lattice),
                ))?,
            )?;
            p
        }
    };
    man.outputs.push(mesh_path.display().to_string());

    let residual_path = prefix.with_extension("residuals.json");
    std::fs::write(
        &residual_path,
        serde_json::to_string_pretty(&json!({
            "reports": battery.reports,
            "worst": battery.worst,
            "tol": a.residual_tol,
        }))?,
    )?;
    man.outputs.push(residual_path.display().to_string());

    let (k_lo, k_hi) = grid.k_extremes();
    let mut notes = Vec::new();
    if imm.is_flat() {
        notes.push("flat Clifford torus: K == 0");
    }
    if !imm.basic_period().is_finite() {
        notes.push("totally geodesic sphere (separatrix limit)");
    }
    man.metrics = json!({
        "K_observed": { "min": k_lo, "max": k_hi },
        "K_closed_form": { "min": extremes.k_min, "max": extremes.k_max, "unbounded": extremes.unbounded },
        "worst_residual": battery.worst,
        "lattice": closure.lattice,
        "period_verification_max_dev": closure.verified_max_deviation,
        "notes": notes,
    });
    man.write(prefix)?;

    println!(
        "torus alpha={} J={} ({}): worst residual {:.3e}, K in [{:.6}, {:.6}]",
        a.alpha, a.j, domain_kind, battery.worst, k_lo, k_hi
    );
    for n in &notes {
        println!("note: {n}");
    }
    Ok(if battery.worst < a.residual_tol { 0 } else { 1 })
}

fn closure_json(rep: &slcone::periods::ClosureReport) -> serde_json::Value {
    let alpha_str = match rep.alpha_rational {
        Some((m, n)) => format!("{m}/{n}"),
        None => format!("{}", rep.alpha),
    };
    json!({
        "alpha": alpha_str,
        "J": rep.j,
        "T": rep.lattice.basic_period_t,
        "theta_T": rep.lattice.holonomy,
        "lattice": rep.lattice,
        "phase_ratio": if rep.phase_ratio.is_nan() { None } else { Some(rep.phase_ratio) },
        "phase_rational": rep.phase_rational,
        "verified_max_deviation": rep.verified_max_deviation,
        "message": rep.message,
    })
}

pub fn periods(a: PeriodsArgs) -> anyhow::Result<u8> {
    let (alpha, alpha_rat) = parse_alpha(&a.alpha)?;
    let params = ConeParameters::new(alpha, a.j, 0.0)?;
    let opts = ClosureOptions {
        tol: a.tol,
        max_den: a.max_den,
        alpha_rational: alpha_rat,
        ..Default::default()
    };
    let rep = closure_test(&params, &opts)?;
    let mut out = closure_json(&rep);
    let mut violation = false;

    if a.scan_embedded {
        if rep.lattice.basis.len() != 2 {
            bail!("embeddedness scan needs a rank-2 lattice ({})", rep.message);
        }
        let (ns, nt) = parse_grid(&a.grid)?;
        let imm = Immersion::new(params)?;
        let cell = (rep.lattice.basis[0][0], rep.lattice.basis[1][1]);
        let grid = SurfaceGrid::build(&imm, (0.0, cell.0), (0.0, cell.1), ns, nt)?;
        let scan = embeddedness_scan(&grid, &rep.lattice, None)?;
        violation = scan.suspicious_count > 0;
        out["embedded_scan"] = serde_json::to_value(&scan)?;
    }

    let text = serde_json::to_string_pretty(&out)?;
    match &a.out {
        Some(path) => {
            std::fs::write(path, &text)?;
            let mut man = RunManifest::new("periods");
            man.args = json!({"alpha": a.alpha, "J": a.j, "scan_embedded": a.scan_embedded, "grid": a.grid});
            man.tolerances = json!({"tol": a.tol, "max_den": a.max_den});
            man.outputs.push(path.clone());
            man.metrics = json!({"basis_rank": rep.lattice.basis.len(), "message": rep.message});
            man.write(Path::new(path))?;
        }
        None => println!("{text}"),
    }
    Ok(u8::from(violation))
}

pub fn search(a: SearchArgs) -> anyhow::Result<u8> {
    let (alpha, _) = parse_alpha(&a.alpha)?;
    if alpha != 0.0 {
        bail!("the monotone theta_2 search requires --alpha 0");
    }
    let (p, q) = match rational::parse_ratio(&a.target) {
        Some((_, Some(r))) => r,
        _ => bail!("target must be a rational 'p/q', got '{}'", a.target),
    };
    let target = p as f64 / q as f64;
    let (j_star, residual) = slcone::periods::search_theta2(target, a.tol)
        .context("search failed (the attainable window of theta_2(T)/2pi at alpha = 0 is about (0.50, 0.5774))")?;
    let params = ConeParameters::new(0.0, j_star, 0.0)?;
    let opts = ClosureOptions { alpha_rational: Some((0, 1)), ..Default::default() };
    let rep = closure_test(&params, &opts)?;
    let closed = rep.lattice.basis.len() == 2;
    let out = json!({
        "target": format!("{p}/{q}"),
        "J_star": j_star,
        "residual": residual,
        "closure": closure_json(&rep),
        "closed": closed,
    });
    let text = serde_json::to_string_pretty(&out)?;
    match &a.out {
        Some(path) => {
            std::fs::write(path, &text)?;
            let mut man = RunManifest::new("search");
            man.args = json!({"alpha": "0", "target": a.target});
            man.tolerances = json!({"tol": a.tol});
            man.outputs.push(path.clone());
            man.metrics = json!({"J_star": j_star, "residual": residual, "closed": closed});
            man.write(Path::new(path))?;
        }
        None => println!("{text}"),
    }
    Ok(u8::from(!closed))
}

pub fn neumann(a: NeumannArgs) -> anyhow::Result<u8> {
    let (alpha, _) = parse_alpha(&a.alpha)?;
    let params = ConeParameters::new(alpha, a.j, a.theta)?;
    let imm = Immersion::new(params)?;
    let axis = imm.axis();
    let st0 = imm.initial_state();
    let traj = integrate(&st0, &axis, a.t_end, a.tol)?;

    let c0 = conserved(&st0, &axis);
    let mut drift = 0.0_f64;
    let mut c_max = 0.0_f64;
    for st in &traj.states {
        let cs = conserved(st, &axis);
        drift = drift.max((cs.h - c0.h).abs());
        for k in 0..3 {
            drift = drift.max((cs.j[k] - c0.j[k]).abs());
        }
        c_max = c_max.max(cs.c.abs());
    }

    let prefix = Path::new(&a.out);
    let csv_path = prefix.with_extension("csv");
    let mut w = BufWriter::new(File::create(&csv_path)?);
    write_trajectory_csv(&mut w, &traj, &axis)?;
    w.flush()?;

    let mut man = RunManifest::new("neumann");
    man.args = json!({"alpha": a.alpha, "J": a.j, "theta": a.theta, "t_end": a.t_end});
    man.tolerances = json!({"tol": a.tol});
    man.outputs.push(csv_path.display().to_string());
    man.metrics = json!({
        "states": traj.states.len(),
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
        "conserved_drift": drift,
        "max_abs_c": c_max,
        "max_sphere_drift_pre_projection": traj.max_sphere_drift,
        "max_tangency_drift_pre_projection": traj.max_tangency_drift,
    });
    man.write(prefix)?;
    println!(
        "integrated to t = {} in {} steps; conserved drift {:.3e}",
        a.t_end, traj.accepted_steps, drift
    );
    Ok(0)
}

pub fn verify(a: VerifyArgs) -> anyhow::Result<u8> {
    let (alpha, _) = parse_alpha(&a.alpha)?;
    let (ns, nt) = parse_grid(&a.grid)?;
    let params = ConeParameters::new(alpha, a.j, a.theta)?;
    let imm = Immersion::new(params)?;
    let t_basic = imm.basic_period();
    let (s_range, t_range) = if t_basic.is_finite() {
        ((0.0, 4.0), (0.0, 2.0 * t_basic))
    } else {
        ((0.0, 4.0), (-5.0, 5.0))
    };
    let grid = SurfaceGrid::build(&imm, s_range, t_range, ns, nt)?;
    let mut battery = residual_battery(&grid, a.theta)?;

    // cross-validation of the two construction routes
    let span_end = if t_basic.is_finite() { 2.0 * t_basic } else { 5.0 };
    let span_start = if t_basic.is_finite() { 0.0 } else { -5.0 };
    let cross = verify::neumann_vs_closed_form(&params, span_start, span_end, 1e-10)?;
    let cross_ok = cross.max_abs <= 1e-7;
    battery.reports.push(cross);

    let out = json!({
        "alpha": a.alpha, "J": a.j, "theta": a.theta,
        "reports": battery.reports,
        "worst_grid_residual": battery.worst,
        "tol": a.tol,
    });
    let text = serde_json::to_string_pretty(&out)?;
    match &a.out {
        Some(path) => {
            std::fs::write(path, &text)?;
            let mut man = RunManifest::new("verify");
            man.args = json!({"alpha": a.alpha, "J": a.j, "theta": a.theta, "grid": a.grid});
            man.tolerances = json!({"tol": a.tol});
            man.outputs.push(path.clone());
            man.metrics = json!({"worst_grid_residual": battery.worst});
            man.write(Path::new(path))?;
        }
        None => println!("{text}"),
    }
    Ok(if battery.worst < a.tol && cross_ok { 0 } else { 1 })
}

fn build_link(spec: &str, ns: usize, nt: usize) -> anyhow::Result<SurfaceGrid> {
    match spec {
        "clifford" => {
            let imm = Immersion::new(ConeParameters::new(0.5, slcone::J_MAX, 0.0)?)?;
            let t = imm.basic_period();
            Ok(SurfaceGrid::build(&imm, (0.0, 4.0), (0.0, 2.0 * t), ns, nt)?)
        }
        "sphere" => Ok(SurfaceGrid::from_fn(
            (-1.2, 1.2),
            (-1.2, 1.2),
            ns,
            nt,
            |s, t| {
                [
                    num_complex_real(s.cos() * t.cos()),
                    num_complex_real(s.sin() * t.cos()),
                    num_complex_real(t.sin()),
                ]
            },
        )?),
        other => {
            let (al, jj) = other
                .split_once(':')
                .ok_or_else(|| anyhow!("bad link '{other}', want clifford | sphere | ALPHA:J"))?;
            let alpha: f64 = al.parse()?;
            let j: f64 = jj.parse()?;
            let imm = Immersion::new(ConeParameters::new(alpha, j, 0.0)?)?;
            let t = imm.basic_period();
            let t_span = if t.is_finite() { 2.0 * t } else { 8.0 };
            Ok(SurfaceGrid::build(&imm, (0.0, 4.0), (0.0, t_span), ns, nt)?)
        }
    }
}

fn num_complex_real(x: f64) -> slcone::Complex64 {
    slcone::Complex64::new(x, 0.0)
}

pub fn ac(a: AcArgs) -> anyhow::Result<u8> {
    let (ns, nt) = parse_grid(&a.grid)?;
    let link = build_link(&a.link, ns, nt)?;
    let profile = acfamily::profile_curve(3, a.d, a.profile_samples, a.rho_max)?;
    let ac = acfamily::build_ac_surface(&profile, &link, acfamily::DEFAULT_LINK_TOL)?;

    let lag = ac.lagrangian_residual();
    let (sp_im, sp_re) = ac.special_residual();
    let worst = lag.max_abs.max(sp_im.max_abs).max(sp_re.max_abs);
    let level_defect = profile.level_defect();

    let decay = if profile.d > 0.0 {
        let lo = (2.0_f64).max(1.5 * profile.d.powf(1.0 / 3.0));
        let n = 12;
        let rhos: Vec<f64> = (0..n)
            .map(|i| lo * (a.rho_max / lo).powf(i as f64 / (n - 1) as f64))
            .collect();
        Some(acfamily::asymptotic_ends(&ac, &rhos)?)
    } else {
        None
    };

    let prefix = Path::new(&a.out);
    let mut man = RunManifest::new("ac");
    man.args = json!({
        "d": a.d, "link": a.link, "rho_max": a.rho_max,
        "profile_samples": a.profile_samples, "grid": [ns, nt], "format": a.format,
    });
    man.tolerances = json!({"residual_tol": a.residual_tol, "link_tol": acfamily::DEFAULT_LINK_TOL});

    let mesh = if a.format == "obj" {
        let p = prefix.with_extension("obj");
        let mut w = BufWriter::new(File::create(&p)?);
        export::write_ac_obj(&mut w, &ac, &Projection::default())?;
        p
    } else {
        let p = prefix.with_extension("csv");
        let mut w = BufWriter::new(File::create(&p)?);
        export::write_ac_csv(&mut w, &ac)?;
        p
    };
    man.outputs.push(mesh.display().to_string());

    let report_path = prefix.with_extension("report.json");
    std::fs::write(
        &report_path,
        serde_json::to_string_pretty(&json!({
            "level_defect": level_defect,
            "lagrangian": lag,
            "special_im": sp_im,
            "special_re": sp_re,
            "end_decay": decay,
            "conjugated": profile.conjugated,
        }))?,
    )?;
    man.outputs.push(report_path.display().to_string());
    man.metrics = json!({"worst_residual": worst, "level_defect": level_defect});
    man.write(prefix)?;

    println!(
        "ac d={} link={}: worst residual {:.3e}, level defect {:.3e}",
        a.d, a.link, worst, level_defect
    );
    Ok(if worst < a.residual_tol { 0 } else { 1 })
}

pub fn elliptic(a: EllipticArgs) -> anyhow::Result<u8> {
    let out = match a.op {
        EllipticOp::K { ksq } => {
            let m = EllipticModulus::from_k_squared(ksq)?;
            json!({"ksq": ksq, "K": elliptic::complete_k(m)?})
        }
        EllipticOp::Jacobi { t, ksq } => {
            let m = EllipticModulus::from_k_squared(ksq)?;
            let v = elliptic::jacobi_sn_cn_dn(t, m)?;
            json!({"t": t, "ksq": ksq, "sn": v.sn, "cn": v.cn, "dn": v.dn})
        }
        EllipticOp::Data { alpha, j } => {
            let params = ConeParameters::new(alpha, j, 0.0)?;
            let ed = slcone::family::cubic_roots(&params)?;
            serde_json::to_value(ed)?
        }
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}
