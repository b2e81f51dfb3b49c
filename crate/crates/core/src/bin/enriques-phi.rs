//! Command-line front end: identity checks, q-expansions, point evaluations
//! and lattice information.

use clap::{Args, Parser, Subcommand, ValueEnum};
use enriques_phi::borcherds::{phi1_eval, phi2_eval, phi_gamma_leading_qexp, ProductParams};
use enriques_phi::enriques::{lambda_gamma_for, GammaClass};
use enriques_phi::lattice::{invariants, standard_lattice};
use enriques_phi::modular::{eta_eval, j_eval, lambda_eval, parse_complex_rational, rat_to_f64, weber_eval, HalfPlanePoint};
use enriques_phi::verify::{
    fmt_log, reference_points, verify_appendix, verify_denominator, verify_even_product, verify_main_theorem,
    verify_odd_leading, verify_section8, Report, VerifyParams,
};
use enriques_phi::Error;
use num_complex::Complex64;
use serde_json::json;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "enriques-phi", version, about = "Borcherds products on the Enriques period domain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// First point, e.g. "2i", "5i/2", "1/2+3i".
    #[arg(long, global = true, allow_hyphen_values = true)]
    tau: Option<String>,
    /// Second point.
    #[arg(long = "tau-prime", global = true, allow_hyphen_values = true)]
    tau_prime: Option<String>,
    /// Fixed height cutoff of the products (automatic when absent).
    #[arg(long, global = true)]
    height: Option<f64>,
    /// Precision in bits of the modular-function side.
    #[arg(long, global = true, default_value_t = 128)]
    prec: usize,
    /// Series order (half units for `odd-leading` and `qexp`, full units for
    /// `denominator`).
    #[arg(long, global = true)]
    order: Option<i64>,
    /// Relative tolerance of the main identity checks.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Write the reports as a JSON array to this path.
    #[arg(long, global = true)]
    json: Option<std::path::PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run identity checks.
    Verify {
        #[arg(value_enum)]
        check: Check,
    },
    /// Exact leading expansion of a product.
    Qexp {
        #[arg(value_enum)]
        what: QexpWhat,
        /// Involution class as four halves, e.g. "0,0,1/2,1/2".
        #[arg(long)]
        gamma: String,
    },
    /// Evaluate a function at a point.
    Eval {
        #[arg(value_enum)]
        function: Function,
        /// Point: one complex number, or for phi1/phi2 the coordinates
        /// "z1,z2[,c1,…,c8]" on the hyperbolic plane and E8(2).
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Lattice invariants.
    Lattice {
        #[arg(value_enum)]
        what: LatticeWhat,
        /// One of U, U2, E8_2, K, Lambda, I29_2.
        #[arg(long)]
        name: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Check {
    Main,
    Even,
    OddLeading,
    Denominator,
    Section8,
    Appendix,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum QexpWhat {
    Phi,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Function {
    Phi1,
    Phi2,
    J,
    Eta,
    Lambda,
    Weber,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LatticeWhat {
    Info,
}

enum Failure {
    Usage(String),
    Check,
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::Usage(_) | Error::UnknownLattice(_) | Error::InvalidMatrix(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.opts.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("warning: {e}");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let o = &cli.opts;
    match &cli.command {
        Command::Verify { check } => run_verify(*check, o),
        Command::Qexp { gamma, .. } => {
            let g = GammaClass::parse(gamma)?;
            let order = o.order.unwrap_or(2);
            let lg = lambda_gamma_for(&g);
            let s = phi_gamma_leading_qexp(lg, order)?;
            println!("Phi[{}] (level {}) = {}", g.label(), lg.level(), s.digest());
            write_json(o, &json!({ "gamma": g.label(), "level": lg.level(), "series": s.to_json(), "digest": s.digest() }))
        }
        Command::Eval { function, at } => run_eval(*function, at, o),
        Command::Lattice { name, .. } => {
            let lat = standard_lattice(name)?;
            let mut info = lat.to_json();
            info["signature"] = json!(lat.signature());
            info["det"] = json!(lat.det().to_string());
            info["even"] = json!(lat.is_even());
            if let Ok(inv) = invariants(&lat) {
                info["invariants"] = json!(inv);
            }
            println!("{}", serde_json::to_string_pretty(&info).unwrap());
            write_json(o, &info)
        }
    }
}

fn point(s: &str, prec: usize) -> Result<HalfPlanePoint, Failure> {
    Ok(HalfPlanePoint::parse(s, prec)?)
}

fn run_verify(check: Check, o: &Opts) -> Result<(), Failure> {
    let vp = VerifyParams {
        product: ProductParams { height_cutoff: o.height, ..VerifyParams::default().product },
        prec: o.prec,
        tol: o.tol,
        ..VerifyParams::default()
    };
    let pairs: Vec<(String, String)> = match (&o.tau, &o.tau_prime) {
        (Some(a), Some(b)) => vec![(a.clone(), b.clone())],
        (None, None) => reference_points().into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        _ => return Err(Failure::Usage("give both --tau and --tau-prime, or neither".into())),
    };
    let mut reports: Vec<Report> = Vec::new();
    let want = |c: Check| check == c || check == Check::All;
    if want(Check::Denominator) {
        reports.push(verify_denominator(o.order.filter(|_| check == Check::Denominator).unwrap_or(8))?);
    }
    if want(Check::OddLeading) {
        reports.push(verify_odd_leading(o.order.filter(|_| check == Check::OddLeading).unwrap_or(4))?);
    }
    if want(Check::Appendix) {
        reports.push(verify_appendix()?);
    }
    for (a, b) in &pairs {
        let (t, tp) = (point(a, o.prec)?, point(b, o.prec)?);
        if want(Check::Main) {
            reports.push(verify_main_theorem(&t, &tp, &vp)?);
        }
        if want(Check::Even) {
            reports.push(verify_even_product(&t, &tp, &vp)?);
        }
    }
    if want(Check::Section8) {
        let (a, b) = match (&o.tau, &o.tau_prime) {
            (Some(a), Some(b)) if check == Check::Section8 => (a.as_str(), b.as_str()),
            _ => ("4i", "5i"),
        };
        reports.push(verify_section8(&point(a, o.prec)?, &point(b, o.prec)?, &vp)?);
    }
    print_table(&reports);
    write_json(o, &serde_json::to_value(&reports).unwrap())?;
    if reports.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn print_table(reports: &[Report]) {
    println!("{:<40} {:<11} {:>12} {:>10} {:>10}", "check", "status", "rel_error", "tolerance", "ms");
    fn row(r: &Report, depth: usize) {
        let name = format!("{}{}", "  ".repeat(depth), r.check_name);
        let status = serde_json::to_value(r.status).unwrap();
        println!(
            "{:<40} {:<11} {:>12.3e} {:>10.1e} {:>10}",
            name,
            status.as_str().unwrap_or("?"),
            r.rel_error,
            r.tolerance,
            r.runtime_ms
        );
        for s in &r.subchecks {
            row(s, depth + 1);
        }
    }
    for r in reports {
        row(r, 0);
    }
}

fn write_json(o: &Opts, v: &serde_json::Value) -> Result<(), Failure> {
    if let Some(p) = &o.json {
        std::fs::write(p, serde_json::to_string_pretty(v).unwrap() + "\n")
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn run_eval(f: Function, at: &str, o: &Opts) -> Result<(), Failure> {
    let out = match f {
        Function::Phi1 | Function::Phi2 => {
            let mut z: Vec<Complex64> = Vec::new();
            for part in at.split(',') {
                let (re, im) = parse_complex_rational(part.trim())?;
                z.push(Complex64::new(rat_to_f64(&re), rat_to_f64(&im)));
            }
            if z.len() < 2 || z.len() > 10 {
                return Err(Failure::Usage("expected 2 to 10 comma-separated coordinates".into()));
            }
            z.resize(10, Complex64::new(0.0, 0.0));
            let params = ProductParams { height_cutoff: o.height, tail_target: 1e-12, ..Default::default() };
            let v = if matches!(f, Function::Phi1) { phi1_eval(&z, &params)? } else { phi2_eval(&z, &params)? };
            json!({ "function": format!("{f:?}").to_lowercase(), "at": at, "value": fmt_log(v.log),
                    "log": [v.log.re, v.log.im], "tail_bound": v.tail_bound, "height": v.height,
                    "terms": v.terms_used, "exact_zero": v.is_zero, "precision": "double, log-space" })
        }
        _ => {
            let t = point(at, o.prec)?;
            let func = match f {
                Function::J => j_eval,
                Function::Eta => eta_eval,
                Function::Lambda => lambda_eval,
                _ => weber_eval,
            };
            let v = func(&t)?;
            let digits = (o.prec as f64 * std::f64::consts::LOG10_2).floor() as usize;
            json!({ "function": format!("{f:?}").to_lowercase(), "at": at, "value": v.to_decimal(digits),
                    "precision": format!("{} bits", o.prec) })
        }
    };
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    write_json(o, &out)
}
