//! `infconv`: grid transforms and the inequality verification suite.
//!
//! Exit codes: 0 success / all checks pass, 1 check failure, 2 usage or
//! config error, 3 internal invariant violation.

use clap::{Args, Parser, Subcommand};
use infconv::grid::{default_grid, make_grid, sample, FunctionFamily, GridFunction, GridSpec};
use infconv::transforms::{self, Block, CostScale};
use infconv::verify::{self, SuiteConfig, VerificationReport, INEQUALITY_IDS};
use infconv::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "infconv",
    about = "Infimum convolution, polar transforms, Steiner symmetrization, and a Gaussian inequality verification suite",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a transform to a sampled family or a grid JSON file
    Transform(TransformArgs),
    /// Run a verification suite from a JSON config
    Verify(VerifyArgs),
    /// List builtin families and inequality ids
    List,
}

#[derive(Args)]
struct TransformArgs {
    /// One of: moreau, legendre, polar, symmetrize, symmetrize1, symmetrize2
    kind: String,
    /// Compact family spec, e.g. quadratic:a=1
    #[arg(long, conflicts_with = "input")]
    family: Option<String>,
    /// Path to a grid-function JSON file
    #[arg(long)]
    input: Option<PathBuf>,
    /// Cost scale t for the moreau transform (cost |y|^2/(2t))
    #[arg(long)]
    t: Option<f64>,
    /// Grid: d1-default, d2-default, d3-default, or L:n[,L:n...]
    #[arg(long, default_value = "d1-default")]
    grid: String,
    /// Output path for the transformed grid JSON
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite config JSON
    config: PathBuf,
    /// Directory for report.json and report.csv
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Transform(args) => match cmd_transform(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit_code_for(&e))
            }
        },
        Command::Verify(args) => match cmd_verify(&args) {
            Ok(all_pass) => {
                if all_pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_CHECK_FAILED)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit_code_for(&e))
            }
        },
        Command::List => {
            cmd_list();
            ExitCode::SUCCESS
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Family(_) | Error::Hypothesis(_) | Error::Class(_) => EXIT_USAGE,
        Error::GridInvariant(_) | Error::Quadrature(_) | Error::Serde(_) => EXIT_INTERNAL,
    }
}

fn parse_grid(text: &str) -> Result<GridSpec, Error> {
    match text {
        "d1-default" => default_grid(1),
        "d2-default" => default_grid(2),
        "d3-default" => default_grid(3),
        custom => {
            let mut half_widths = Vec::new();
            let mut counts = Vec::new();
            for axis in custom.split(',') {
                let (l, n) = axis.split_once(':').ok_or_else(|| {
                    Error::Config(format!("bad grid axis {axis:?}, expected L:n"))
                })?;
                half_widths.push(
                    l.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad half-width {l:?}")))?,
                );
                counts.push(
                    n.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad count {n:?}")))?,
                );
            }
            let dim = counts.len();
            make_grid(dim, &half_widths, &counts)
        }
    }
}

fn load_input(args: &TransformArgs) -> Result<GridFunction, Error> {
    if let Some(path) = &args.input {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        GridFunction::from_json(&text)
    } else if let Some(spec_text) = &args.family {
        let family = FunctionFamily::parse(spec_text)?;
        let spec = parse_grid(&args.grid)?;
        sample(&family, &spec)
    } else {
        Err(Error::Config(
            "transform needs --family or --input".into(),
        ))
    }
}

fn cmd_transform(args: &TransformArgs) -> Result<(), Error> {
    let f = load_input(args)?;
    let out = match args.kind.as_str() {
        "moreau" => {
            let t = args
                .t
                .ok_or_else(|| Error::Config("moreau requires --t".into()))?;
            transforms::inf_conv_quadratic(&f, CostScale::new(t)?)
        }
        "legendre" => transforms::legendre(&f, f.spec())?,
        "polar" => transforms::polar(&f, f.spec())?,
        "symmetrize" => transforms::symmetrize(&f),
        "symmetrize1" => transforms::symmetrize_partial(&f, f.spec().dim() - 1, Block::First)?,
        "symmetrize2" => transforms::symmetrize_partial(&f, f.spec().dim() - 1, Block::Second)?,
        other => {
            return Err(Error::Config(format!(
                "unknown transform {other:?}; expected moreau, legendre, polar, symmetrize, symmetrize1, symmetrize2"
            )))
        }
    };
    let json = out.to_json()?;
    std::fs::write(&args.output, json)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", args.output.display())))?;
    Ok(())
}

fn threads_from_env() -> usize {
    match std::env::var("INFCONV_THREADS") {
        Ok(v) => v.trim().parse().unwrap_or(0),
        Err(_) => 0,
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, Error> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let cfg = SuiteConfig::from_json(&text)?;
    let reports = verify::run_suite(&cfg, threads_from_env())?;
    write_reports(&args.out, &reports)?;
    print_summary(&reports);
    Ok(reports.iter().all(|r| r.pass))
}

fn write_reports(dir: &Path, reports: &[VerificationReport]) -> Result<(), Error> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    let json = verify::reports_to_json(reports)?;
    std::fs::write(dir.join("report.json"), json)
        .map_err(|e| Error::Config(format!("cannot write report.json: {e}")))?;
    let csv = verify::reports_to_csv(reports);
    std::fs::write(dir.join("report.csv"), csv)
        .map_err(|e| Error::Config(format!("cannot write report.csv: {e}")))?;
    // tidy per-check series (eps vs excess) for the scaling checks
    for r in reports {
        if r.series.is_empty() {
            continue;
        }
        let name: String = r
            .id
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { '_' })
            .collect();
        let mut text = String::from("eps,product,excess,bound\n");
        for p in &r.series {
            text.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                p.eps, p.product, p.excess, p.bound
            ));
        }
        std::fs::write(dir.join(format!("{name}_series.csv")), text)
            .map_err(|e| Error::Config(format!("cannot write series csv: {e}")))?;
    }
    Ok(())
}

fn print_summary(reports: &[VerificationReport]) {
    let id_width = reports
        .iter()
        .map(|r| r.id.len())
        .max()
        .unwrap_or(8)
        .max(8);
    println!("{:<id_width$}  {:>24}  {:>6}", "id", "margin", "pass");
    for r in reports {
        println!(
            "{:<id_width$}  {:>24.16e}  {:>6}",
            r.id,
            r.margin,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    println!("{passed}/{} checks passed", reports.len());
}

fn cmd_list() {
    println!("families (compact spec form):");
    for (name, params) in FunctionFamily::builtin_catalog() {
        if params.is_empty() {
            println!("  {name}");
        } else {
            println!("  {name}:{params}");
        }
    }
    println!();
    println!("inequality ids:");
    for id in INEQUALITY_IDS {
        println!("  {id}");
    }
}
