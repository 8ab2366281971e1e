//! `surfmaps` command-line tool.
//!
//! Exit codes: 0 on success with every check passing, 1 when a check fails
//! or an internal error occurs, 2 on usage or parameter errors.

mod config;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use surfmaps::acceptance::{all_blocking_passed, desk_criteria, slow_criteria};
use surfmaps::bijections::{m3_vs_m3prime_audit, miermont_check, ms_count_check};
use surfmaps::constants::{t_from_tau, tau_sequence};
use surfmaps::elimination::{derive_rhs_identity, dump_terms};
use surfmaps::maps::{
    brute_force_a, brute_force_l, enumerate_rooted_maps, for_each_two_face, unicellular_genus_counts,
    verify_case_decomposition, verify_tutte_equation, ROOTED_MAX_EDGES,
};
use surfmaps::montecarlo::{dirichlet_moment, estimate_moments, MomentParams};
use surfmaps::rational::to_pq;
use surfmaps::series::{kernel_check, verify_eliminate_identity, verify_tau_ode, ResidualReport};

use config::{required, FileConfig, Format, RunConfig, SEED_ENV};
use report::{contains_float, envelope, to_csv, to_json};

#[derive(Debug)]
pub struct UsageError(pub String);

#[derive(Debug)]
enum Failure {
    Usage(String),
    Internal(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<surfmaps::Error> for Failure {
    fn from(e: surfmaps::Error) -> Self {
        use surfmaps::Error as E;
        match e {
            E::Parameter(_) | E::BoundExceeded { .. } | E::ParseRational(_) => Failure::Usage(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

/// `Ok(true)` when every check of the command passed.
type Outcome = Result<bool, Failure>;

#[derive(Parser, Debug)]
#[command(name = "surfmaps", version, about = "Exact combinatorics and sampling of maps on surfaces")]
struct Cli {
    /// TOML file with default values for any long flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format (json by default; text for eliminate and selftest).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Random seed (falls back to the config file, then $SURFMAPS_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The tau numbers and the constants t_g.
    Tau(TauArgs),
    /// Power-series identities.
    Series {
        #[command(subcommand)]
        cmd: SeriesCmd,
    },
    /// Symbolic elimination identity.
    Eliminate(EliminateArgs),
    /// Exact counts of small maps.
    Enumerate(EnumerateArgs),
    /// Exhaustive checks of counting identities and bijections.
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
    /// Monte-Carlo sampling.
    Sample {
        #[command(subcommand)]
        cmd: SampleCmd,
    },
    /// Reference moments.
    Moments {
        #[command(subcommand)]
        cmd: MomentsCmd,
    },
    /// Acceptance suite; `--slow` runs the million-face Monte-Carlo criteria.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct TauArgs {
    #[arg(long)]
    max_g: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum SeriesCmd {
    Verify(SeriesVerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SeriesWhich {
    Ode,
    Eliminate,
    Kernel,
}

#[derive(Args, Debug)]
struct SeriesVerifyArgs {
    /// Identity to check; all three when omitted.
    #[arg(long, value_enum)]
    which: Option<SeriesWhich>,
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Args, Debug)]
struct EliminateArgs {
    #[arg(long)]
    derive: bool,
    /// Also write the solved expressions and the residual to this file.
    #[arg(long)]
    dump_terms: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long)]
    edges: Option<usize>,
    #[arg(long)]
    genus: Option<u32>,
    #[arg(long)]
    labelled: bool,
    #[arg(long)]
    two_face: bool,
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    Tutte(TutteArgs),
    Cases(CasesArgs),
    Bijections(BijectionArgs),
}

#[derive(Args, Debug)]
struct TutteArgs {
    #[arg(long)]
    max_edges: Option<usize>,
    #[arg(long)]
    genus_target: Option<u32>,
}

#[derive(Args, Debug)]
struct CasesArgs {
    #[arg(long)]
    max_edges: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BijectionWhich {
    Ms,
    Miermont,
    Audit,
}

#[derive(Args, Debug)]
struct BijectionArgs {
    #[arg(long)]
    max_edges: Option<usize>,
    #[arg(long)]
    genus: Option<u32>,
    /// Check to run; all three when omitted.
    #[arg(long, value_enum)]
    which: Option<BijectionWhich>,
}

#[derive(Subcommand, Debug)]
enum SampleCmd {
    Voronoi(VoronoiArgs),
}

#[derive(Args, Debug)]
struct VoronoiArgs {
    #[arg(long)]
    genus: Option<u32>,
    #[arg(long)]
    faces: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv_per_trial: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum MomentsCmd {
    Dirichlet(DirichletArgs),
}

#[derive(Args, Debug)]
struct DirichletArgs {
    /// Number of spacings; defaults to the number of exponents.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated exponents, one per spacing.
    #[arg(long, value_delimiter = ',', required = true)]
    exponents: Vec<u32>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long)]
    slow: bool,
}

/// Commands whose reports carry measured floating-point values.
const MEASURED_COMMANDS: [&str; 2] = ["sample voronoi", "selftest"];

fn emit(cfg: &RunConfig, default: Format, value: &Value, rows_key: &str, text: Option<String>) -> Result<(), Failure> {
    let measured = value["command"].as_str().is_some_and(|c| MEASURED_COMMANDS.contains(&c));
    if !measured && contains_float(value) {
        return Err(Failure::Internal("floating-point value in an exact report".into()));
    }
    let out = match cfg.format_or(default) {
        Format::Json => to_json(value),
        Format::Csv => to_csv(value, rows_key),
        Format::Text => text.unwrap_or_else(|| to_json(value)),
    };
    println!("{}", out.trim_end());
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))
}

fn cmd_tau(cfg: &RunConfig, a: &TauArgs) -> Outcome {
    let max_g = required(a.max_g, &cfg.file.max_g, "max-g")?;
    let tau = tau_sequence(max_g);
    let t: Vec<_> = tau.iter().enumerate().map(|(g, x)| t_from_tau(g, x)).collect();
    let rows: Vec<Value> = tau
        .iter()
        .zip(&t)
        .enumerate()
        .map(|(g, (x, tg))| json!({"g": g, "tau": to_pq(x), "t_coeff": to_pq(&tg.coeff), "t_sqrt_pi_exp": tg.sqrt_pi_exp}))
        .collect();
    let value = envelope(
        "tau",
        &json!({
            "max_g": max_g,
            "tau": tau.iter().map(to_pq).collect::<Vec<_>>(),
            "t": t,
        }),
    );
    if cfg.format_or(Format::Json) == Format::Csv {
        println!("{}", to_csv(&json!({ "rows": rows }), "rows").trim_end());
    } else {
        emit(cfg, Format::Json, &value, "rows", None)?;
    }
    Ok(true)
}

fn cmd_series(cfg: &RunConfig, a: &SeriesVerifyArgs) -> Outcome {
    let order = required(a.order, &cfg.file.order, "order")?;
    let which: Vec<SeriesWhich> = match a.which {
        Some(w) => vec![w],
        None => vec![SeriesWhich::Ode, SeriesWhich::Eliminate, SeriesWhich::Kernel],
    };
    let reports: Vec<ResidualReport> = which
        .iter()
        .map(|w| match w {
            SeriesWhich::Ode => ResidualReport::new("ode", &verify_tau_ode(order)),
            SeriesWhich::Eliminate => ResidualReport::new("eliminate", &verify_eliminate_identity(order)),
            SeriesWhich::Kernel => ResidualReport::new("kernel", &kernel_check(order)),
        })
        .collect();
    let passed = reports.iter().all(|r| r.zero);
    let value = envelope("series verify", &json!({"order": order, "passed": passed, "rows": reports}));
    emit(cfg, Format::Json, &value, "rows", None)?;
    Ok(passed)
}

fn cmd_eliminate(cfg: &RunConfig, a: &EliminateArgs) -> Outcome {
    if !a.derive {
        return Err(Failure::Usage("nothing to do: pass --derive".into()));
    }
    let d = derive_rhs_identity()?;
    let dump = dump_terms(&d);
    if let Some(path) = a.dump_terms.as_ref().or(cfg.file.dump_terms.as_ref()) {
        write_file(path, &dump)?;
    }
    let passed = d.residual.is_zero();
    let exprs: Vec<String> = d.solution.exprs.iter().map(|e| e.to_string()).collect();
    let value = envelope(
        "eliminate",
        &json!({
            "solved": exprs,
            "lhs_reduced": d.lhs_reduced.to_string(),
            "rhs": d.rhs.to_string(),
            "residual": d.residual.to_string(),
            "passed": passed,
        }),
    );
    emit(cfg, Format::Text, &value, "solved", Some(dump))?;
    Ok(passed)
}

#[derive(Serialize)]
struct EnumerateReport {
    edges: usize,
    genus: u32,
    labelled: bool,
    two_face: bool,
    /// Rooted one-face maps (gluings of a polygon rooted at side 0).
    #[serde(skip_serializing_if = "Option::is_none")]
    one_face_maps: Option<u64>,
    /// Rooted maps of this genus with any number of faces.
    #[serde(skip_serializing_if = "Option::is_none")]
    rooted_maps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labelled_one_face_maps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    two_face_maps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labelled_two_face_maps: Option<surfmaps::maps::TwoFaceCounts>,
}

fn cmd_enumerate(cfg: &RunConfig, a: &EnumerateArgs) -> Outcome {
    let n = required(a.edges, &cfg.file.edges, "edges")?;
    let g = required(a.genus, &cfg.file.genus, "genus")?;
    let mut rep = EnumerateReport {
        edges: n,
        genus: g,
        labelled: a.labelled,
        two_face: a.two_face,
        one_face_maps: None,
        rooted_maps: None,
        labelled_one_face_maps: None,
        two_face_maps: None,
        labelled_two_face_maps: None,
    };
    match (a.two_face, a.labelled) {
        (false, false) => {
            let counts = unicellular_genus_counts(n)?;
            rep.one_face_maps = Some(counts.get(g as usize).copied().unwrap_or(0));
            if (1..=ROOTED_MAX_EDGES).contains(&n) {
                rep.rooted_maps = Some(enumerate_rooted_maps(n)?.get(g));
            }
        }
        (false, true) => rep.labelled_one_face_maps = Some(brute_force_l(n, g)?),
        (true, false) => {
            let mut count = 0u64;
            for_each_two_face(n, g, |_, _| count += 1)?;
            rep.two_face_maps = Some(count);
        }
        (true, true) => rep.labelled_two_face_maps = Some(brute_force_a(n, g)?),
    }
    emit(cfg, Format::Json, &envelope("enumerate", &rep), "rows", None)?;
    Ok(true)
}

fn cmd_tutte(cfg: &RunConfig, a: &TutteArgs) -> Outcome {
    let n = required(a.max_edges, &cfg.file.max_edges, "max-edges")?;
    let g = required(a.genus_target, &cfg.file.genus_target, "genus-target")?;
    let rep = verify_tutte_equation(n, g)?;
    let passed = rep.passed();
    let mut value = envelope("verify tutte", &rep);
    value["passed"] = json!(passed);
    emit(cfg, Format::Json, &value, "rows", None)?;
    Ok(passed)
}

fn cmd_cases(cfg: &RunConfig, a: &CasesArgs) -> Outcome {
    let n = required(a.max_edges, &cfg.file.max_edges, "max-edges")?;
    let rep = verify_case_decomposition(n)?;
    let passed = rep.three_components_hold && rep.two_components_formula_holds && rep.non_isthmic_holds;
    let mut value = envelope("verify cases", &rep);
    value["passed"] = json!(passed);
    emit(cfg, Format::Json, &value, "rows", None)?;
    Ok(passed)
}

fn cmd_bijections(cfg: &RunConfig, a: &BijectionArgs) -> Outcome {
    let n_max = required(a.max_edges, &cfg.file.max_edges, "max-edges")?;
    let g = required(a.genus, &cfg.file.genus, "genus")?;
    let which: Vec<BijectionWhich> = match a.which {
        Some(w) => vec![w],
        None => vec![BijectionWhich::Ms, BijectionWhich::Miermont, BijectionWhich::Audit],
    };
    let mut passed = true;
    let mut out = serde_json::Map::new();
    for w in which {
        let mut rows = Vec::new();
        for n in 1..=n_max {
            let (ok, v) = match w {
                BijectionWhich::Ms => {
                    let r = ms_count_check(n, g)?;
                    (r.passed, serde_json::to_value(r))
                }
                BijectionWhich::Miermont => {
                    let r = miermont_check(n, g)?;
                    (r.passed, serde_json::to_value(r))
                }
                BijectionWhich::Audit => {
                    let r = m3_vs_m3prime_audit(n, g)?;
                    (r.passed, serde_json::to_value(r))
                }
            };
            passed &= ok;
            rows.push(v.map_err(|e| Failure::Internal(e.to_string()))?);
        }
        let key = match w {
            BijectionWhich::Ms => "ms",
            BijectionWhich::Miermont => "miermont",
            BijectionWhich::Audit => "audit",
        };
        out.insert(key.into(), Value::Array(rows));
    }
    out.insert("passed".into(), json!(passed));
    let value = envelope("verify bijections", &Value::Object(out));
    let rows_key = ["ms", "miermont", "audit"]
        .into_iter()
        .find(|k| value.get(k).is_some())
        .unwrap_or("rows");
    emit(cfg, Format::Json, &value, rows_key, None)?;
    Ok(passed)
}

fn cmd_voronoi(cfg: &RunConfig, a: &VoronoiArgs) -> Outcome {
    let f = &cfg.file;
    let params = MomentParams {
        genus: a.genus.or(f.genus).unwrap_or(0),
        faces: required(a.faces, &f.faces, "faces")?,
        points: a.points.or(f.points).unwrap_or(2),
        trials: required(a.trials, &f.trials, "trials")?,
        seed: cfg.seed,
    };
    let rep = estimate_moments(params, cfg.threads)?;
    let value = envelope("sample voronoi", &rep);
    if let Some(path) = a.out.as_ref().or(f.out.as_ref()) {
        write_file(path, &to_json(&value))?;
    }
    let csv = rep.to_csv();
    if let Some(path) = a.csv_per_trial.as_ref().or(f.csv_per_trial.as_ref()) {
        write_file(path, &csv)?;
    }
    if cfg.format_or(Format::Json) == Format::Csv {
        println!("{}", csv.trim_end());
    } else {
        emit(cfg, Format::Json, &value, "moments", None)?;
    }
    Ok(true)
}

fn cmd_dirichlet(cfg: &RunConfig, a: &DirichletArgs) -> Outcome {
    let k = a.k.unwrap_or(a.exponents.len());
    let value = dirichlet_moment(k, &a.exponents)?;
    let v = envelope(
        "moments dirichlet",
        &json!({"k": k, "exponents": a.exponents, "value": to_pq(&value)}),
    );
    emit(cfg, Format::Json, &v, "rows", None)?;
    Ok(true)
}

fn cmd_selftest(cfg: &RunConfig, a: &SelftestArgs) -> Outcome {
    let results = if a.slow { slow_criteria() } else { desk_criteria() };
    let passed = all_blocking_passed(&results);
    let text: Vec<String> = results.iter().map(|r| r.line()).collect();
    let value = envelope(
        "selftest",
        &json!({"slow": a.slow, "passed": passed, "criteria": results}),
    );
    emit(cfg, Format::Text, &value, "criteria", Some(text.join("\n")))?;
    Ok(passed)
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Outcome {
    match &cli.command {
        Command::Tau(a) => cmd_tau(cfg, a),
        Command::Series { cmd: SeriesCmd::Verify(a) } => cmd_series(cfg, a),
        Command::Eliminate(a) => cmd_eliminate(cfg, a),
        Command::Enumerate(a) => cmd_enumerate(cfg, a),
        Command::Verify { cmd } => match cmd {
            VerifyCmd::Tutte(a) => cmd_tutte(cfg, a),
            VerifyCmd::Cases(a) => cmd_cases(cfg, a),
            VerifyCmd::Bijections(a) => cmd_bijections(cfg, a),
        },
        Command::Sample { cmd: SampleCmd::Voronoi(a) } => cmd_voronoi(cfg, a),
        Command::Moments { cmd: MomentsCmd::Dirichlet(a) } => cmd_dirichlet(cfg, a),
        Command::Selftest(a) => cmd_selftest(cfg, a),
    }
}

fn run(cli: &Cli) -> Outcome {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(
        cli.seed,
        cli.threads.map(|t| t as usize),
        cli.format,
        file,
        std::env::var(SEED_ENV).ok(),
    )?;
    dispatch(cli, &cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
