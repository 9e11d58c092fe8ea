use std::io::Write;

use kcc_core::deviation::{self, FocusingDiagnostic, Truncation};
use kcc_core::kcc::{KccInvariants, Sode};
use kcc_core::linalg::Matrix;
use kcc_core::models;
use kcc_core::stability::{
    self, analyze_fixed_point, merge_points, newton, FixedPointReport, JacobiVerdict, SeedFailure, SeedSpec, Tolerances,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::format as fmt;
use crate::{AnalyzeArgs, CliError, Common, DeviateArgs, InvariantsArgs, ModelsArgs, OutputFormat, Status, SystemDefinition};

/// Tensors whose largest entry is at most this are flagged as zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;

fn input(msg: impl ToString) -> CliError {
    CliError::Input(msg.to_string())
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

/// `"1, -2.5"` into numbers.
pub fn parse_vector(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| input(format!("{what}: '{part}' is not a finite number")))
        })
        .collect()
}

fn parse_vector_of_len(text: &str, what: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let v = parse_vector(text, what)?;
    if v.len() != n {
        return Err(input(format!("{what} has {} entries, system has {n}", v.len())));
    }
    Ok(v)
}

/// `"0,0;1,0.5"` into a list of points.
pub fn parse_seeds(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_vector(s, "--seeds"))
        .collect()
}

/// `"-1:1,0:2"` into intervals.
pub fn parse_box(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    text.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| input(format!("--box: '{part}' is not of the form lo:hi")))?;
            let lo = parse_vector(lo, "--box")?;
            let hi = parse_vector(hi, "--box")?;
            Ok((lo[0], hi[0]))
        })
        .collect()
}

fn tolerances(common: &Common) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    for item in &common.tolerances {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| input(format!("--tol '{item}' is not NAME=VALUE")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| input(format!("--tol {name}: '{value}' is not a number")))?;
        tol.set(name.trim(), value).map_err(input)?;
    }
    Ok(tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisFailure {
    pub location: Vec<f64>,
    pub message: String,
}

/// Everything `analyze` reports, in location order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub system: String,
    pub variables: Vec<String>,
    pub components: Vec<String>,
    pub tolerances: Tolerances,
    pub seed_count: usize,
    pub fixed_points: Vec<FixedPointReport>,
    pub seed_failures: Vec<SeedFailure>,
    pub analysis_failures: Vec<AnalysisFailure>,
}

/// Seeds run through Newton in parallel; results are merged and sorted, so
/// the report does not depend on scheduling.
pub fn analyze_definition(def: &SystemDefinition, spec: &SeedSpec, tol: &Tolerances) -> Result<AnalyzeReport, CliError> {
    let field = &def.field;
    let seeds = spec.seeds(field.dimension()).map_err(input)?;
    log::info!("{}: {} seeds", def.name, seeds.len());
    let outcomes: Vec<Result<Vec<f64>, SeedFailure>> = seeds.par_iter().map(|s| newton(field, s, tol)).collect();
    let mut found = Vec::new();
    let mut seed_failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(p) => found.push(p),
            Err(f) => {
                log::debug!("seed {:?}: {:?}", f.seed, f.reason);
                seed_failures.push(f);
            }
        }
    }
    let points = merge_points(found, tol);
    let analyses: Vec<_> = points
        .par_iter()
        .map(|p| analyze_fixed_point(field, p, tol).map_err(|e| (p.clone(), e)))
        .collect();
    let mut fixed_points = Vec::new();
    let mut analysis_failures = Vec::new();
    for a in analyses {
        match a {
            Ok(report) => fixed_points.push(report),
            Err((location, e)) => {
                log::warn!("analysis at {location:?} failed: {e}");
                analysis_failures.push(AnalysisFailure {
                    location,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(AnalyzeReport {
        system: def.name.clone(),
        variables: field.variables().to_vec(),
        components: field.components().iter().map(|c| c.to_string()).collect(),
        tolerances: *tol,
        seed_count: seeds.len(),
        fixed_points,
        seed_failures,
        analysis_failures,
    })
}

pub fn analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let mut def = SystemDefinition::resolve(&args.common.system)?;
    let tol = tolerances(&args.common)?;
    if let Some(seeds) = &args.seeds {
        def.seeds = Some(parse_seeds(seeds)?);
    }
    if let Some(b) = &args.bounds {
        def.seeds = None;
        def.search_box = Some(parse_box(b)?);
    }
    if let Some(g) = args.grid {
        def.seeds = None;
        def.grid = Some(g);
    }
    let report = analyze_definition(&def, &def.seed_spec(), &tol)?;
    match args.common.format {
        OutputFormat::Json => write_json(out, &report)?,
        OutputFormat::Text => write_analysis_text(out, &report)?,
    }
    if report.fixed_points.is_empty() {
        eprintln!(
            "no fixed point found from {} seeds ({} failed)",
            report.seed_count,
            report.seed_failures.len()
        );
        return Ok(Status::NoFixedPoint);
    }
    Ok(Status::Ok)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn write_analysis_text(out: &mut dyn Write, report: &AnalyzeReport) -> Result<(), CliError> {
    writeln!(
        out,
        "{}: {} fixed point(s) from {} seeds, {} seed(s) without convergence",
        report.system,
        report.fixed_points.len(),
        report.seed_count,
        report.seed_failures.len()
    )?;
    for (k, r) in report.fixed_points.iter().enumerate() {
        writeln!(out)?;
        writeln!(out, "fixed point {}: {}", k + 1, fmt::vector(&r.location))?;
        writeln!(out, "  residual           {}", fmt::num(r.residual))?;
        writeln!(out, "  jacobian           {}", fmt::matrix(&r.jacobian))?;
        writeln!(out, "  char polynomial    [{}]", fmt::list(&r.characteristic_polynomial))?;
        writeln!(out, "  eigenvalues        {}", fmt::complex_list(&r.eigenvalues))?;
        writeln!(out, "  hurwitz D1..Dn     {}", fmt::list(&r.hurwitz))?;
        writeln!(out, "  hurwitz stable     {}", yes_no(r.hurwitz_stable))?;
        writeln!(out, "  descartes bound    {}", r.descartes_bound)?;
        writeln!(out, "  lyapunov           {}", r.lyapunov_class)?;
        writeln!(out, "  deviation tensor   {}", fmt::matrix(&r.deviation_tensor))?;
        writeln!(out, "  jacobi spectrum    {}", fmt::complex_list(&r.jacobi_spectrum))?;
        writeln!(out, "  jacobi             {} (margin {})", r.jacobi_verdict, fmt::num(r.jacobi_margin))?;
        if r.location.len() == 3 {
            writeln!(out, "  saddle-focus       {}", yes_no(r.jacobi_saddle_focus))?;
        }
    }
    for f in &report.analysis_failures {
        writeln!(out)?;
        writeln!(out, "analysis failed at {}: {}", fmt::vector(&f.location), f.message)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantsReport {
    pub system: String,
    pub invariants: KccInvariants,
    /// Names of tensors whose entries all vanish.
    pub zero_tensors: Vec<String>,
}

/// `"x1,..;y1,..[;t]"`
pub fn parse_phase_point(text: &str, n: usize) -> Result<(Vec<f64>, Vec<f64>, f64), CliError> {
    let parts: Vec<&str> = text.split(';').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(input("--at expects \"x1,..,xn;y1,..,yn[;t]\""));
    }
    let x = parse_vector_of_len(parts[0], "--at position", n)?;
    let y = parse_vector_of_len(parts[1], "--at velocity", n)?;
    let t = match parts.get(2) {
        Some(t) => parse_vector_of_len(t, "--at time", 1)?[0],
        None => 0.0,
    };
    Ok((x, y, t))
}

pub fn zero_tensors(inv: &KccInvariants) -> Vec<String> {
    let checks = [
        ("epsilon", inv.epsilon.iter().fold(0.0_f64, |m, v| m.max(v.abs()))),
        ("connection", inv.connection.max_abs()),
        ("berwald", inv.berwald.max_abs()),
        ("deviation", inv.deviation.max_abs()),
        ("torsion", inv.torsion.max_abs()),
        ("curvature", inv.curvature.max_abs()),
        ("douglas", inv.douglas.max_abs()),
    ];
    checks
        .iter()
        .filter(|(_, m)| *m <= ZERO_THRESHOLD)
        .map(|(name, _)| name.to_string())
        .collect()
}

pub fn invariants(args: &InvariantsArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let def = SystemDefinition::resolve(&args.common.system)?;
    tolerances(&args.common)?;
    let n = def.field.dimension();
    let (x, y, t) = match &args.at {
        Some(at) => parse_phase_point(at, n)?,
        None => {
            let x = def.sample_state();
            let y = def.field.eval(&x).map_err(input)?;
            (x, y, 0.0)
        }
    };
    let sode = Sode::lift(&def.field);
    let inv = sode.invariants(&x, &y, t).map_err(input)?;
    let report = InvariantsReport {
        system: def.name.clone(),
        zero_tensors: zero_tensors(&inv),
        invariants: inv,
    };
    match args.common.format {
        OutputFormat::Json => write_json(out, &report)?,
        OutputFormat::Text => write_invariants_text(out, &report)?,
    }
    Ok(Status::Ok)
}

fn write_invariants_text(out: &mut dyn Write, report: &InvariantsReport) -> Result<(), CliError> {
    let inv = &report.invariants;
    let zero = |name: &str| report.zero_tensors.iter().any(|z| z == name);
    let tag = |name: &str| if zero(name) { "  (zero)" } else { "" };
    writeln!(
        out,
        "{} at x = {}, y = {}, t = {}",
        report.system,
        fmt::vector(&inv.x),
        fmt::vector(&inv.y),
        fmt::num(inv.t)
    )?;
    writeln!(out, "epsilon (first invariant)      {}{}", fmt::vector(&inv.epsilon), tag("epsilon"))?;
    writeln!(out, "N (nonlinear connection)       {}{}", fmt::matrix(&inv.connection), tag("connection"))?;
    write_block(out, "Berwald connection", zero("berwald"), fmt::tensor3_lines(&inv.berwald))?;
    writeln!(out, "P (deviation tensor)           {}{}", fmt::matrix(&inv.deviation), tag("deviation"))?;
    writeln!(out, "trace P                        {}", fmt::num(inv.trace))?;
    write_block(out, "P3 (torsion)", zero("torsion"), fmt::tensor3_lines(&inv.torsion))?;
    write_block(out, "P4 (curvature)", zero("curvature"), fmt::tensor4_lines(&inv.curvature))?;
    write_block(out, "D (Douglas tensor)", zero("douglas"), fmt::tensor4_lines(&inv.douglas))?;
    Ok(())
}

fn write_block(out: &mut dyn Write, title: &str, zero: bool, lines: Vec<String>) -> Result<(), CliError> {
    if zero {
        writeln!(out, "{title:<30} 0  (zero)")?;
        return Ok(());
    }
    writeln!(out, "{title}")?;
    for line in lines {
        writeln!(out, "  {line}")?;
    }
    Ok(())
}

/// Summary of a deviation run; the samples themselves go to the CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationSummary {
    pub system: String,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub w: Vec<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub samples: usize,
    pub end_time: f64,
    pub final_xi: Vec<f64>,
    pub final_norm: f64,
    pub focusing: Option<FocusingDiagnostic>,
    /// `P` at `(x0, y0, 0)` and the verdict read from its spectrum.
    pub deviation_tensor: Matrix,
    pub deviation_spectrum: Vec<Complex64>,
    pub jacobi_verdict: JacobiVerdict,
    pub truncated: Option<Truncation>,
    pub csv: Option<String>,
}

pub const FOCUSING_NOTE: &str =
    "note: the t^2 comparison is informational; the Jacobi verdict comes from the spectrum of P";

pub fn deviate(args: &DeviateArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let def = SystemDefinition::resolve(&args.common.system)?;
    let tol = tolerances(&args.common)?;
    let n = def.field.dimension();
    let sode = Sode::lift(&def.field);
    let x0 = match &args.x0 {
        Some(s) => parse_vector_of_len(s, "--x0", n)?,
        None => def.sample_state(),
    };
    let y0 = match &args.y0 {
        Some(s) => parse_vector_of_len(s, "--y0", n)?,
        None => deviation::default_velocity(&sode, &x0)
            .ok_or_else(|| input("cannot evaluate f(x0) for the default --y0"))?,
    };
    let w = match &args.w {
        Some(s) => parse_vector_of_len(s, "--W", n)?,
        None => {
            let mut e1 = vec![0.0; n];
            e1[0] = 1.0;
            e1
        }
    };
    if !(args.probe.is_finite() && args.probe > 0.0) {
        return Err(input(format!("--probe must be positive, got {}", args.probe)));
    }
    let run = deviation::integrate(&sode, &x0, &y0, &w, args.t_end, args.dt).map_err(input)?;
    let p = sode.deviation_tensor(&x0, &y0, 0.0).map_err(input)?;
    let (spectrum, verdict) = stability::deviation_verdict(&p, tol.hyperbolic).map_err(input)?;

    let csv = match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            let mut buf = std::io::BufWriter::new(file);
            run.write_csv(&mut buf)?;
            buf.flush()?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let last = run.len() - 1;
    let summary = DeviationSummary {
        system: def.name.clone(),
        x0,
        y0,
        w,
        dt: args.dt,
        t_end: args.t_end,
        samples: run.len(),
        end_time: run.end_time(),
        final_xi: run.xi[last].clone(),
        final_norm: run.norms[last],
        focusing: deviation::focusing_diagnostic(&run, args.probe).ok(),
        deviation_tensor: p,
        deviation_spectrum: spectrum,
        jacobi_verdict: verdict,
        truncated: run.truncated.clone(),
        csv,
    };
    match args.common.format {
        OutputFormat::Json => write_json(out, &summary)?,
        OutputFormat::Text => write_deviation_text(out, &summary)?,
    }
    if let Some(tr) = &summary.truncated {
        eprintln!("integration truncated at t = {}: {:?}", tr.time, tr.reason);
        return Ok(Status::Truncated);
    }
    Ok(Status::Ok)
}

fn write_deviation_text(out: &mut dyn Write, s: &DeviationSummary) -> Result<(), CliError> {
    writeln!(
        out,
        "{}: x0 = {}, y0 = {}, W = {}",
        s.system,
        fmt::vector(&s.x0),
        fmt::vector(&s.y0),
        fmt::vector(&s.w)
    )?;
    writeln!(out, "steps              {} (dt {}, t_end {})", s.samples - 1, fmt::num(s.dt), fmt::num(s.t_end))?;
    writeln!(
        out,
        "|xi({})|           {}  xi = {}",
        fmt::num(s.end_time),
        fmt::num(s.final_norm),
        fmt::vector(&s.final_xi)
    )?;
    match &s.focusing {
        Some(f) => writeln!(
            out,
            "t^2 test at t* = {}  |xi| = {} vs t*^2 = {}: {}",
            fmt::num(f.probe),
            fmt::num(f.norm),
            fmt::num(f.threshold),
            f.label
        )?,
        None => writeln!(out, "t^2 test           not available (probe outside the run)")?,
    }
    writeln!(out, "{FOCUSING_NOTE}")?;
    writeln!(out, "P at (x0, y0)      {}", fmt::matrix(&s.deviation_tensor))?;
    writeln!(out, "P spectrum         {}", fmt::complex_list(&s.deviation_spectrum))?;
    writeln!(out, "jacobi             {}", s.jacobi_verdict)?;
    if let Some(tr) = &s.truncated {
        writeln!(out, "truncated at t = {}", fmt::num(tr.time))?;
    }
    if let Some(path) = &s.csv {
        writeln!(out, "csv                {path}")?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
struct ModelEntry {
    name: &'static str,
    description: &'static str,
    dimension: usize,
    variables: Vec<String>,
    components: Vec<String>,
    search_box: Vec<(f64, f64)>,
    grid: usize,
    sample_state: Vec<f64>,
}

pub fn models(args: &ModelsArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let entries: Vec<ModelEntry> = models::builtins()
        .into_iter()
        .map(|m| ModelEntry {
            name: m.name,
            description: m.description,
            dimension: m.field.dimension(),
            variables: m.field.variables().to_vec(),
            components: m.field.components().iter().map(|c| c.to_string()).collect(),
            search_box: m.search_box,
            grid: m.grid,
            sample_state: m.sample_state,
        })
        .collect();
    match args.format {
        OutputFormat::Json => write_json(out, &entries)?,
        OutputFormat::Text => {
            for e in &entries {
                writeln!(out, "{:<15} n={}  {}", e.name, e.dimension, e.description)?;
            }
        }
    }
    Ok(Status::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_argument_lists() {
        assert_eq!(parse_seeds("0,0; 1,-0.5").unwrap(), vec![vec![0.0, 0.0], vec![1.0, -0.5]]);
        assert_eq!(parse_box("-1:1,0:2").unwrap(), vec![(-1.0, 1.0), (0.0, 2.0)]);
        assert!(parse_box("1,2").is_err());
        assert!(parse_vector("1,x", "v").is_err());
        assert!(parse_vector("1,inf", "v").is_err());
        let (x, y, t) = parse_phase_point("0,1;0,0;2", 2).unwrap();
        assert_eq!((x, y, t), (vec![0.0, 1.0], vec![0.0, 0.0], 2.0));
        assert!(parse_phase_point("0,1", 2).is_err());
        assert!(parse_phase_point("0;0", 2).is_err());
    }
}
