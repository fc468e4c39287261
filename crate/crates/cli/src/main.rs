mod cli;

use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::Parser;
use serde_json::json;

use cli::{Cli, Command, EvalArgs, FigureArgs, Global, MethodArg, PhotonArgs, RateArgs, SpecfunCommand, Variant, VerifyArgs, WindowArgs};
use hyperrad::io::{grid_to_csv, to_json, write_text, RunManifest};
use hyperrad::radiation::{
    figure_grids, rate_asymptotic, rate_classical_nr, rate_general, rate_halfinfinite, rate_parallel, rate_symmetric, total_energy,
    Cutoffs, FigureParams, GridKind, RateResult,
};
use hyperrad::specfun::{incomplete_macdonald, MacdonaldOptions, Method};
use hyperrad::units::ConfigFile;
use hyperrad::{derive_constants, DerivedConstants, Error, Interval, QuadSpec, SourceConfig, UnitSystem, Window};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;

/// A failed run and its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::NonConvergence { .. }) => EXIT_NONCONVERGENCE,
            _ => EXIT_USAGE,
        };
        Self { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, error: anyhow::anyhow!(msg.into()) }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match &cli.command {
        Command::Figure(a) => figure(&cli.global, a),
        Command::Energy(w) => energy(&cli.global, w),
        Command::Rate(a) => rate(&cli.global, a),
        Command::PhotonStats(a) => photon_stats(&cli.global, a),
        Command::Specfun { command: SpecfunCommand::Eval(a) } => specfun_eval(&cli.global, a),
        Command::Verify(a) => verify(&cli.global, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn quad_spec(g: &Global) -> Result<QuadSpec, Failure> {
    let d = QuadSpec::default();
    let spec = QuadSpec {
        abs_tol: g.abs_tol.unwrap_or(d.abs_tol),
        rel_tol: g.rel_tol.unwrap_or(d.rel_tol),
        max_evals: g.max_evals.unwrap_or(d.max_evals),
        ..d
    };
    spec.validate()?;
    Ok(spec)
}

fn cutoffs(g: &Global) -> Cutoffs {
    Cutoffs { kperp_max: g.kperp_max, kpar_max: g.kpar_max }
}

fn source(g: &Global) -> Result<(SourceConfig, UnitSystem, DerivedConstants), Failure> {
    let mut file = match &g.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ConfigFile::from_json(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => ConfigFile::default(),
    };
    file.merge(&ConfigFile {
        q: g.q,
        m: g.mass,
        e_field: g.field,
        u0_perp_x: g.u_perp_x,
        u0_perp_y: g.u_perp_y,
        u0_par: g.u_par,
        c: g.c,
        hbar: g.hbar,
    });
    let (cfg, units) = file.resolve()?;
    let d = derive_constants(&cfg, &units)?;
    Ok((cfg, units, d))
}

fn finite_window(d: &DerivedConstants, w: &WindowArgs) -> Result<Window, Failure> {
    match (w.eta_in, w.eta, w.t_in, w.t) {
        (Some(a), Some(b), None, None) => Ok(Window::from_eta(a, b)?),
        (None, None, Some(a), Some(b)) => Ok(Window::from_times(d, Some(a), Some(b))?),
        _ => Err(usage("a finite window needs --eta-in and --eta, or --t-in and --t")),
    }
}

fn manifest(command: &str, g: &Global, spec: QuadSpec, extra: serde_json::Value) -> Result<RunManifest, Failure> {
    let mut params = json!({
        "kperp_max": g.kperp_max,
        "kpar_max": g.kpar_max,
    });
    if !matches!(command, "figure" | "verify" | "specfun eval") {
        let (cfg, units, _) = source(g)?;
        params["source"] = serde_json::to_value(cfg).map_err(Error::from)?;
        params["units"] = serde_json::to_value(units).map_err(Error::from)?;
    }
    if let (Some(obj), serde_json::Value::Object(more)) = (params.as_object_mut(), extra) {
        obj.extend(more);
    }
    Ok(RunManifest::new(command, params, spec))
}

fn emit(g: &Global, text: &str) -> Result<(), Failure> {
    match &g.out {
        Some(p) => write_text(p, text)?,
        None => print_line(text),
    }
    Ok(())
}

/// Writes to stdout; a closed pipe ends output quietly.
fn print_line(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn finish(g: &Global, mut m: RunManifest, start: Instant, body: serde_json::Value, converged: bool) -> Outcome {
    m.wall_time_s = start.elapsed().as_secs_f64();
    let mut out = body;
    out["manifest"] = serde_json::to_value(&m).map_err(Error::from)?;
    emit(g, &to_json(&out)?)?;
    if converged {
        Ok(0)
    } else {
        eprintln!("warning: the cutoff growth did not settle; see \"trend\" in the output");
        Ok(EXIT_NONCONVERGENCE)
    }
}

fn figure(g: &Global, a: &FigureArgs) -> Outcome {
    let start = Instant::now();
    let spec = quad_spec(g)?;
    let mut p = FigureParams::for_figure(a.figure)?;
    if let Some(e) = &a.etas {
        p.etas = e.clone();
    }
    if let Some(n) = a.nodes {
        p.nodes = n;
    }
    if let Some(x) = a.kx_extent {
        p.kx_max = x;
    }
    if let Some(x) = a.kpar_extent {
        p.kpar_max = x;
    }
    if let Some(q) = g.q {
        p.q = q;
    }
    if let Some(s) = a.c_over_eps {
        p.c_over_eps = s;
    }
    let grids = figure_grids(a.figure, &p, &spec)?;
    let dir = g.out.clone().unwrap_or_else(|| ".".into());
    let mut m = manifest("figure", g, spec, json!({ "figure": a.figure, "figure_params": p }))?;
    m.wall_time_s = start.elapsed().as_secs_f64();
    for grid in &grids {
        let kind = match grid.kind {
            GridKind::Energy => "energy",
            GridKind::EnergyAsymptotic => "energy-asymptotic",
            GridKind::Rate => "rate",
        };
        let path = dir.join(format!("fig{}_{kind}_eta{}.csv", grid.figure, grid.eta));
        write_text(&path, &grid_to_csv(grid, Some(&m))?)?;
        print_line(&path.display().to_string());
    }
    Ok(0)
}

fn energy(g: &Global, w: &WindowArgs) -> Outcome {
    let start = Instant::now();
    let spec = quad_spec(g)?;
    let (_, _, d) = source(g)?;
    let window = finite_window(&d, w)?;
    let r = total_energy(&d, &window, &spec, &cutoffs(g))?;
    let mut m = manifest("energy", g, spec, json!({ "window": window }))?;
    m.errors.insert("W".into(), r.error);
    let converged = r.converged || cutoffs(g).is_fixed();
    let body = json!({ "W": r.value, "error": r.error, "converged": r.converged, "grid": r.grid, "trend": r.trend });
    finish(g, m, start, body, converged)
}

fn rate(g: &Global, a: &RateArgs) -> Outcome {
    let start = Instant::now();
    let spec = quad_spec(g)?;
    let (_, _, d) = source(g)?;
    let c = cutoffs(g);
    let w = &a.window;
    let no_window = w.eta_in.is_none() && w.eta.is_none() && w.t_in.is_none() && w.t.is_none();
    if a.period.is_some() && a.variant != Variant::Symmetric {
        return Err(usage("--period applies to --variant symmetric only"));
    }
    let r: RateResult = match a.variant {
        Variant::Asymmetric => rate_general(&d, &finite_window(&d, w)?, &spec, &c, None)?,
        Variant::Parallel => rate_parallel(&d, &finite_window(&d, w)?, &spec, &c, None)?,
        Variant::HalfInfinite => {
            if w.eta_in.is_some() || w.t_in.is_some() {
                return Err(usage(
                    "the half-infinite rate starts at t_in = -infinity; drop --eta-in/--t-in or use --variant asymmetric",
                ));
            }
            match (w.eta, w.t) {
                (Some(eta), None) => rate_general(&d, &Window::half_infinite(eta), &spec, &c, None)?,
                (None, Some(t)) => rate_halfinfinite(&d, t, &spec, &c, None)?,
                _ => return Err(usage("the half-infinite rate needs --eta or --t")),
            }
        }
        Variant::Symmetric => {
            if !no_window {
                return Err(usage("the symmetric rate takes --period T, not window ends"));
            }
            rate_symmetric(&d, a.period, &spec)?
        }
        Variant::Asymptotic | Variant::ClassicalNr => {
            if !no_window || a.period.is_some() {
                return Err(usage("closed-form rates take no window"));
            }
            if a.variant == Variant::Asymptotic {
                rate_asymptotic(&d, &spec)?
            } else {
                rate_classical_nr(&d, &spec)?
            }
        }
    };
    let mut m = manifest("rate", g, spec, json!({ "variant": r.variant.label(), "period": a.period }))?;
    m.errors.insert("w".into(), r.error);
    let converged = r.converged || c.is_fixed();
    let body = serde_json::to_value(&r).map_err(Error::from)?;
    finish(g, m, start, body, converged)
}

fn photon_stats(g: &Global, a: &PhotonArgs) -> Outcome {
    let start = Instant::now();
    let spec = quad_spec(g)?;
    let (_, _, d) = source(g)?;
    let window = finite_window(&d, &a.window)?;
    let s = hyperrad::photon_stats::emission_summary(&d, &window, &spec, &cutoffs(g), a.n_max)?;
    let mut m = manifest("photon-stats", g, spec, json!({ "window": window, "n_max": a.n_max }))?;
    m.errors.insert("W".into(), s.w_error);
    m.errors.insert("lambda_bar".into(), s.lambda_bar_error);
    let converged = s.converged || cutoffs(g).is_fixed();
    let body = serde_json::to_value(&s).map_err(Error::from)?;
    finish(g, m, start, body, converged)
}

fn specfun_eval(g: &Global, a: &EvalArgs) -> Outcome {
    let spec = quad_spec(g)?;
    let method = match a.method {
        MethodArg::Auto => Method::Auto,
        MethodArg::Contour => Method::Contour,
        MethodArg::Series => Method::Series,
        MethodArg::Direct => Method::Direct,
    };
    let opts = MacdonaldOptions { method, ..Default::default() };
    let window = Interval::finite(a.u_in, a.u)?;
    let m = manifest("specfun eval", g, spec, json!({ "nu": a.nu, "z": a.z, "u_in": a.u_in, "u": a.u, "method": format!("{:?}", a.method) }))?;
    let mut csv = format!("# manifest={}\nnu,z,u_in,u,re,im,err\n", serde_json::to_string(&m).map_err(Error::from)?);
    for &nu in &a.nu {
        for &z in &a.z {
            let k = incomplete_macdonald(nu, z, &window, &opts, &spec)?;
            csv.push_str(&format!(
                "{nu},{z},{},{},{:.16e},{:.16e},{:.3e}\n",
                a.u_in, a.u, k.value.re, k.value.im, k.error
            ));
        }
    }
    emit(g, csv.trim_end())?;
    Ok(0)
}

fn verify(g: &Global, a: &VerifyArgs) -> Outcome {
    let report = hyperrad::verify::run(a.only.as_deref(), a.tighten)?;
    for o in &report.outcomes {
        eprintln!("{}", o.line());
    }
    let failed = report.failures().count();
    eprintln!("{} passed, {failed} failed", report.outcomes.len() - failed);
    emit(g, &to_json(&report)?)?;
    Ok(if report.passed { 0 } else { EXIT_VERIFY })
}
