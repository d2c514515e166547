//! Command-line front end: construct the equivariant special Legendrian
//! immersions, analyze their period lattices, audit the defining equations,
//! and export meshes and reports.
//!
//! Exit codes: 0 = all requested checks below tolerance, 1 = a residual or
//! scan violation, 2 = input error.

mod cmds;
mod manifest;

use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "slcone", version, about = "Equivariant minimal Legendrian surfaces in S^5: construction, closure analysis, verification, and asymptotically conical families")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one immersion over a fundamental domain (or default window),
    /// run the verification battery, and export mesh + reports
    Torus(TorusArgs),
    /// Closure analysis: basic period, phase holonomy, period lattice
    Periods(PeriodsArgs),
    /// Bisection on theta_2(T)/2pi at alpha = 0 toward a rational target
    Search(SearchArgs),
    /// Integrate the constrained flow and export the trajectory as CSV
    Neumann(NeumannArgs),
    /// Run the residual audits on a sampled immersion
    Verify(VerifyArgs),
    /// Build the asymptotically conical family over a link
    Ac(AcArgs),
    /// Evaluate the elliptic backbone (debugging aid)
    Elliptic(EllipticArgs),
}

#[derive(Args)]
pub struct TorusArgs {
    /// alpha as an exact rational "m/n" (enables lattice classification) or
    /// a real number (closure then only tolerance-detected)
    #[arg(long)]
    pub alpha: String,
    /// angular momentum parameter J in [0, 1/(3 sqrt 3)]
    #[arg(long, default_value_t = 0.0)]
    pub j: f64,
    /// calibration phase theta
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// grid resolution "NSxNT"
    #[arg(long, default_value = "200x200")]
    pub grid: String,
    /// output path prefix
    #[arg(long, default_value = "torus_out")]
    pub out: String,
    /// mesh format
    #[arg(long, default_value = "obj", value_parser = ["obj", "csv", "json"])]
    pub format: String,
    /// orthographic projection axes for OBJ, e.g. "x1,y1,x2"
    #[arg(long, default_value = "x1,y1,x2")]
    pub proj: String,
    /// residual tolerance for the verification battery
    #[arg(long, default_value_t = 1e-2)]
    pub residual_tol: f64,
}

#[derive(Args)]
pub struct PeriodsArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 0.0)]
    pub j: f64,
    /// rational-detection tolerance
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// continued-fraction denominator bound
    #[arg(long, default_value_t = 1_000_000)]
    pub max_den: u64,
    /// also run the embeddedness scan over one fundamental domain
    #[arg(long)]
    pub scan_embedded: bool,
    /// scan grid resolution "NSxNT"
    #[arg(long, default_value = "400x400")]
    pub grid: String,
    /// output JSON path (stdout when omitted)
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args)]
pub struct SearchArgs {
    /// must be 0: the monotone theta_2 search lives on the alpha = 0 axis
    #[arg(long, default_value = "0")]
    pub alpha: String,
    /// rational target "p/q" for theta_2(T)/2pi
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args)]
pub struct NeumannArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 0.0)]
    pub j: f64,
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// integrate from t = 0 to this time
    #[arg(long)]
    pub t_end: f64,
    /// per-step local error tolerance
    #[arg(long, default_value_t = slcone::neumann::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value = "trajectory")]
    pub out: String,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 0.0)]
    pub j: f64,
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, default_value = "129x129")]
    pub grid: String,
    /// residual tolerance (exit 1 above it)
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args)]
pub struct AcArgs {
    /// level Im(f^3) = d of the profile curve (0 gives the cone union)
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    /// link surface: "clifford", "sphere" (the real form), or "ALPHA:J"
    #[arg(long, default_value = "clifford")]
    pub link: String,
    /// far-field truncation |f| <= rho_max
    #[arg(long, default_value_t = 50.0)]
    pub rho_max: f64,
    #[arg(long, default_value_t = 64)]
    pub profile_samples: usize,
    /// link grid resolution "NSxNT"
    #[arg(long, default_value = "48x48")]
    pub grid: String,
    #[arg(long, default_value = "ac_out")]
    pub out: String,
    #[arg(long, default_value = "obj", value_parser = ["obj", "csv"])]
    pub format: String,
    /// residual tolerance (exit 1 above it)
    #[arg(long, default_value_t = 1e-2)]
    pub residual_tol: f64,
}

#[derive(Args)]
pub struct EllipticArgs {
    #[command(subcommand)]
    pub op: EllipticOp,
}

#[derive(Subcommand)]
pub enum EllipticOp {
    /// complete elliptic integral Ke(k) from k^2
    K {
        #[arg(long)]
        ksq: f64,
    },
    /// Jacobi sn, cn, dn at argument t
    Jacobi {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        ksq: f64,
    },
    /// turning values, rate, and modulus for (alpha, J)
    Data {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        j: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Command::Torus(a) => cmds::torus(a),
        Command::Periods(a) => cmds::periods(a),
        Command::Search(a) => cmds::search(a),
        Command::Neumann(a) => cmds::neumann(a),
        Command::Verify(a) => cmds::verify(a),
        Command::Ac(a) => cmds::ac(a),
        Command::Elliptic(a) => cmds::elliptic(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
