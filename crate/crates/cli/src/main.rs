use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use wmgame_core::equilibrium::MixedProfile;
use wmgame_core::profiles::{
    agreement_rate, bounds_check, estimate_profile, fit_lambda, EvaluationSet, FidelityPolicy, ModelProfile, SetKind,
};
use wmgame_core::region::{export_region_csv, render_region_svg, Axis};
use wmgame_core::{
    build_payoff_matrix, solve_with, Classification, Error, Method, ReportDocument, Scenario, ScenarioDocument,
    SweepSpec,
};

#[derive(Parser)]
#[command(name = "wmgame", version, about = "Equilibria of the model watermarking game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and print the validation report
    Validate {
        scenario: PathBuf,
        /// Treat warnings as failures
        #[arg(long)]
        strict: bool,
    },
    /// Write both payoff matrices as CSV
    Payoff {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Report pure and mixed equilibria
    Solve {
        scenario: PathBuf,
        #[arg(long, default_value = "auto", value_parser = ["auto", "simplified", "general", "matrix", "oracle"])]
        method: String,
        /// Print the full-precision JSON report
        #[arg(long)]
        json: bool,
    },
    /// Estimate model profiles from prediction records and fit lambda
    Fit(FitArgs),
    /// Sweep parameters and map where the defender mixes
    Region(RegionArgs),
}

#[derive(Args)]
struct FitArgs {
    manifest: PathBuf,
    /// Largest allowed distance of a per-model lambda from the mean
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct RegionArgs {
    scenario: PathBuf,
    /// Sweep axis as path:start:end:steps, e.g. betas.1:0:1:101
    #[arg(long = "axis", required = true)]
    axes: Vec<String>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Keep O = k R_+ at every grid point
    #[arg(long)]
    couple_ongoing: bool,
    /// Worker threads for the scan (defaults to one per core)
    #[arg(long)]
    threads: Option<usize>,
}

struct Failure {
    name: &'static str,
    message: String,
    code: u8,
}

impl Failure {
    fn new(name: &'static str, message: impl Into<String>, code: u8) -> Self {
        Failure {
            name,
            message: message.into(),
            code,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) | Error::InvalidSpec(_) | Error::GridTooLarge { .. } | Error::WrongAxisCount(_) => 1,
            Error::InvalidScenario(_)
            | Error::Domain { .. }
            | Error::MismatchedSampleIds(_)
            | Error::EmptySet
            | Error::WrongKind { .. }
            | Error::DuplicateSampleId(_)
            | Error::HeterogeneousCoordinates => 2,
            Error::Io(_) => 4,
            _ => 3,
        };
        Failure {
            name: e.name(),
            message: e.to_string(),
            code,
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn read_text(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Failure::new("file-not-found", path.display().to_string(), 4),
        _ => Failure::new("io-failure", format!("{}: {e}", path.display()), 4),
    })
}

fn load_scenario(path: &Path) -> std::result::Result<Scenario, Failure> {
    let text = read_text(path)?;
    let doc = ScenarioDocument::from_json(&text)
        .map_err(|e| Failure::new("parse-error", format!("{}: {e}", path.display()), 1))?;
    Ok(doc.into_scenario())
}

fn load_valid_scenario(path: &Path) -> std::result::Result<Scenario, Failure> {
    let scenario = load_scenario(path)?;
    let report = scenario.validate();
    if !report.passed() {
        return Err(Error::InvalidScenario(report.failures()).into());
    }
    Ok(scenario)
}

fn create(path: &Path) -> std::result::Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::new("io-failure", format!("{}: {e}", path.display()), 4))
}

fn finish(mut out: BufWriter<File>, path: &Path) -> CmdResult {
    out.flush()
        .map_err(|e| Failure::new("io-failure", format!("{}: {e}", path.display()), 4))
}

/// Six significant digits, trailing zeros trimmed.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    let text = format!("{x:.decimals$}");
    let text = if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        text
    };
    if text == "-0" {
        "0".into()
    } else {
        text
    }
}

fn vector(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|&v| sig6(v)).collect();
    format!("[{}]", parts.join(", "))
}

fn cmd_validate(path: &Path, strict: bool) -> CmdResult {
    let scenario = load_scenario(path)?;
    let report = scenario.validate();
    for check in &report.checks {
        println!("check {}: {}", check.name, check.detail);
    }
    for warning in &report.warnings {
        println!("warning {}: {}", warning.code, warning.message);
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    if !report.passed() {
        return Err(Error::InvalidScenario(report.failures()).into());
    }
    if strict && !report.warnings.is_empty() {
        let codes: Vec<&str> = report.warnings.iter().map(|w| w.code).collect();
        return Err(Failure::new("sign-convention-warning", codes.join(", "), 2));
    }
    println!("result: pass");
    Ok(())
}

fn cmd_payoff(path: &Path, output: &Path) -> CmdResult {
    let scenario = load_valid_scenario(path)?;
    let matrix = build_payoff_matrix(&scenario)?;
    let mut out = create(output)?;
    let io_err = |e: io::Error| Failure::new("io-failure", format!("{}: {e}", output.display()), 4);
    writeln!(out, "i,j,u_alice,u_bob").map_err(io_err)?;
    for i in 0..matrix.rows() {
        for j in 0..matrix.cols() {
            writeln!(out, "{},{},{},{}", i + 1, j + 1, matrix.alice(i, j), matrix.bob(i, j)).map_err(io_err)?;
        }
    }
    finish(out, output)
}

fn print_profile(label: &str, profile: &MixedProfile) {
    println!("{label}");
    println!("  Pr(alpha) = {}", vector(&profile.alice));
    println!("  Pr(beta)  = {}", vector(&profile.bob));
}

fn cmd_solve(path: &Path, method: &str, json: bool) -> CmdResult {
    let scenario = load_valid_scenario(path)?;
    let method: Method = method.parse()?;
    let report = solve_with(&scenario, method)?;

    if json {
        let doc = ReportDocument::from(&report);
        println!("{}", serde_json::to_string_pretty(&doc).expect("plain data serialises"));
    } else {
        println!("scenario {}", scenario.digest());
        let cells: Vec<String> = report
            .pure
            .iter()
            .map(|(i, j)| format!("({},{})", i + 1, j + 1))
            .collect();
        println!(
            "pure equilibria: {}",
            if cells.is_empty() {
                "none".to_string()
            } else {
                cells.join(" ")
            }
        );
        match (&report.mixed, report.mixed_method) {
            (Some(profile), Some(m)) => {
                print_profile(&format!("mixed equilibrium ({}):", m.as_str()), profile);
                if let Some((bob, alice)) = report.residuals {
                    println!("  residuals: bob {}, alice {}", sig6(bob), sig6(alice));
                }
            }
            _ => println!("mixed equilibrium: none"),
        }
        for (n, other) in report.other_mixed.iter().enumerate() {
            print_profile(&format!("further mixed equilibrium {}:", n + 2), other);
        }
        println!("feasibility: {}", report.feasibility.as_str());
        if report.degenerate {
            println!("degenerate: yes");
        }
        for d in &report.diagnostics {
            println!("skipped {}: {}: {}", d.method.as_str(), d.error.name(), d.error);
        }
        for w in &report.warnings {
            println!("warning {}: {}", w.code, w.message);
        }
    }

    if report.pure.is_empty() && report.mixed.is_none() {
        return Err(Failure::new("no-equilibrium", "no equilibrium was found", 3));
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    models: Vec<ManifestModel>,
    /// Test records of the unmarked model; enables the fidelity report.
    #[serde(default)]
    base_test: Option<PathBuf>,
    #[serde(default)]
    delta_test: Option<f64>,
    #[serde(default)]
    delta_trigger: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestModel {
    alpha: f64,
    test: PathBuf,
    trigger: PathBuf,
}

fn load_set(dir: &Path, file: &Path, kind: SetKind) -> std::result::Result<EvaluationSet, Failure> {
    let path = dir.join(file);
    let text = read_text(&path)?;
    EvaluationSet::from_csv(kind, text.as_bytes()).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn cmd_fit(args: &FitArgs) -> CmdResult {
    let text = read_text(&args.manifest)?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Failure::new("parse-error", format!("{}: {e}", args.manifest.display()), 1))?;
    let dir = args.manifest.parent().unwrap_or(Path::new("."));

    let base = match &manifest.base_test {
        Some(file) => Some(load_set(dir, file, SetKind::Test)?),
        None => None,
    };
    let test_policy = manifest.delta_test.map(FidelityPolicy::new).transpose()?;
    let trigger_policy = manifest.delta_trigger.map(FidelityPolicy::new).transpose()?;

    let mut profiles: Vec<ModelProfile> = Vec::with_capacity(manifest.models.len());
    for model in &manifest.models {
        let test = load_set(dir, &model.test, SetKind::Test)?;
        let trigger = load_set(dir, &model.trigger, SetKind::Trigger)?;
        let profile = estimate_profile(model.alpha, &test, &trigger)?;
        let bounds = bounds_check(&profile);
        println!(
            "alpha={} p={} q={} blended={} bounds={}",
            sig6(profile.alpha),
            sig6(profile.p),
            sig6(profile.q),
            sig6(bounds.blended),
            if bounds.passed { "ok" } else { "violated" }
        );
        if let Some(base) = &base {
            let agreement = agreement_rate(base, &test)?;
            let verdict = match test_policy {
                Some(policy) if !policy.satisfied_by(agreement) => " (below 1 - delta_test)",
                _ => "",
            };
            println!("  agreement with base={}{verdict}", sig6(agreement));
        }
        if let Some(policy) = trigger_policy {
            if !policy.satisfied_by(profile.q) {
                println!("  trigger accuracy below 1 - delta_trigger");
            }
        }
        profiles.push(profile);
    }

    match fit_lambda(&profiles, args.tol) {
        Ok(fit) => {
            for c in &fit.coefficients.coefficients {
                println!("lambda_i alpha={} lambda={}", sig6(c.alpha), sig6(c.lambda));
            }
            if !fit.coefficients.skipped.is_empty() {
                println!("skipped {} profile(s) with alpha = 0", fit.coefficients.skipped.len());
            }
            println!("lambda={} spread={}", fit.lambda, fit.spread);
            Ok(())
        }
        Err(e @ Error::AssumptionFailure { spread, .. }) => {
            println!("spread={spread}");
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_region(args: &RegionArgs) -> CmdResult {
    let axes = args
        .axes
        .iter()
        .map(|a| a.parse::<Axis>())
        .collect::<wmgame_core::Result<Vec<_>>>()?;
    if args.svg.is_some() && axes.len() != 2 {
        return Err(Error::WrongAxisCount(axes.len()).into());
    }
    let base = load_valid_scenario(&args.scenario)?;
    let mut spec = SweepSpec::new(base, axes);
    spec.couple_ongoing_costs = args.couple_ongoing;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Failure::new("invalid-spec", "--threads must be at least 1", 1));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::new("io-failure", format!("thread pool: {e}"), 4))?;
    let points = pool.install(|| wmgame_core::scan(&spec))?;

    if let Some(path) = &args.csv {
        let mut out = create(path)?;
        export_region_csv(&points, &mut out)?;
        finish(out, path)?;
    }
    if let Some(path) = &args.svg {
        let mut out = create(path)?;
        render_region_svg(&points, &mut out)?;
        finish(out, path)?;
    }

    let count = |c: Classification| points.iter().filter(|p| p.classification == c).count();
    println!(
        "points={} mixed={} pure_only={} degenerate={} out_of_domain={}",
        points.len(),
        count(Classification::Mixed),
        count(Classification::PureOnly),
        count(Classification::Degenerate),
        count(Classification::OutOfDomain)
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("usage-error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = match &cli.command {
        Command::Validate { scenario, strict } => cmd_validate(scenario, *strict),
        Command::Payoff { scenario, output } => cmd_payoff(scenario, output),
        Command::Solve { scenario, method, json } => cmd_solve(scenario, method, *json),
        Command::Fit(args) => cmd_fit(args),
        Command::Region(args) => cmd_region(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}: {}", f.name, f.message);
            ExitCode::from(f.code)
        }
    }
}
