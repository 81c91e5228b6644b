//! Batch command-line front end: build invariant bases, generate roots,
//! canonicalize, normalize, verify, and export JSON artifacts.
//!
//! All file and stdout output is byte-deterministic for a fixed command line
//! (including `--seed`); progress and timing go to stderr only. Exit codes:
//! 0 success, 1 verification failure (the report is still emitted), 2 usage
//! error (including the E8 opt-in gate), 3 internal error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use invar_core::canonicalize::{
    canonicalize_all, normalization_factor, records_from_json, records_json, records_text,
    CanonicalBasis,
};
use invar_core::groups::{
    basis_json, build_p_basis, catalog, generate_positive_roots, group_json, rescale_to_q,
    roots_json, BasisSet, GroupName, GroupSpec,
};
use invar_core::verify::{report_json, report_text, run_report, JacobianMode, VerifyOptions};
use invar_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "invar",
    version,
    about = "Exact canonical bases of reflection-group invariants (E6, E7, E8, D4, B3)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the starting invariant basis and its rescaled form.
    Basis(CommonArgs),
    /// Generate the positive roots of the group.
    Roots(CommonArgs),
    /// Compute the canonical basis records.
    Canonicalize(CommonArgs),
    /// Print normalization factors for previously exported records.
    Normalize(CommonArgs),
    /// Re-verify previously exported records and write a report.
    Verify(CommonArgs),
    /// Write every artifact for a group into the output directory.
    Export(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Basis(a)
            | Command::Roots(a)
            | Command::Canonicalize(a)
            | Command::Normalize(a)
            | Command::Verify(a)
            | Command::Export(a) => a,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Group name: E6, E7, E8, D4, or B3 (case-insensitive).
    #[arg(long)]
    group: String,

    /// Stdout format; JSON artifacts on disk are unaffected.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Directory for JSON artifacts (created if missing). Required by
    /// normalize, verify, and export; optional elsewhere.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed for the randomized verification points; recorded in the report.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Opt in to the long-running E8 computations (minutes to hours).
    #[arg(long = "heavy-ok", default_value_t = false)]
    heavy_ok: bool,

    /// Worker count hint; the current implementation is single-threaded and
    /// accepts this for interface stability.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,

    /// fast: seeded point checks; full: exhaustive Jacobian verification
    /// (symbolic division chain up to rank 6, every hyperplane beyond).
    #[arg(long = "check-level", value_enum, default_value_t = CheckLevel::Fast)]
    check_level: CheckLevel,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckLevel {
    Fast,
    Full,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::UnknownGroup(_)
                | Error::InvalidData(_)
                | Error::Io(_)
                | Error::Json(_) => 2,
                _ => 3,
            })
        }
    }
}

fn run(command: &Command) -> Result<ExitCode> {
    let args = command.args();
    let name: GroupName = args.group.parse()?;
    let g = catalog(name);

    // The E8 pipeline is an explicit opt-in: the degree-24 and degree-30
    // systems and the pairwise condition checks run for minutes to hours.
    let heavy = matches!(
        command,
        Command::Canonicalize(_) | Command::Verify(_) | Command::Export(_)
    );
    if name == GroupName::E8 && heavy && !args.heavy_ok {
        eprintln!(
            "E8 {} is a long computation (minutes to hours of exact arithmetic); \
             pass --heavy-ok to run it",
            match command {
                Command::Canonicalize(_) => "canonicalization",
                Command::Verify(_) => "verification",
                _ => "export",
            }
        );
        return Ok(ExitCode::from(2));
    }

    // normalize and verify replay exported records, and export has nowhere
    // to write without a directory.
    let needs_out = matches!(
        command,
        Command::Normalize(_) | Command::Verify(_) | Command::Export(_)
    );
    if needs_out && args.out.is_none() {
        eprintln!("this command needs --out <DIR> for its artifacts");
        return Ok(ExitCode::from(2));
    }

    let t0 = Instant::now();
    let mut progress = |m: &str| eprintln!("[{:>9.2?}] {m}", t0.elapsed());

    match command {
        Command::Basis(_) => cmd_basis(g, args),
        Command::Roots(_) => cmd_roots(g, args),
        Command::Canonicalize(_) => cmd_canonicalize(g, args, &mut progress),
        Command::Normalize(_) => cmd_normalize(g, args),
        Command::Verify(_) => cmd_verify(g, args, &mut progress),
        Command::Export(_) => cmd_export(g, args, &mut progress),
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_basis(g: &GroupSpec, args: &CommonArgs) -> Result<ExitCode> {
    let p = build_p_basis(g);
    let q = rescale_to_q(g, &p)?;
    if let Some(dir) = &args.out {
        write_artifact(dir, &file_name(g, "p_basis"), &basis_json(&p))?;
        write_artifact(dir, &file_name(g, "q_basis"), &basis_json(&q))?;
    }
    match args.format {
        Format::Json => print_json(&json!({ "p_basis": basis_json(&p), "q_basis": basis_json(&q) })),
        Format::Text => {
            print!("{}", basis_text(g, &p));
            print!("{}", basis_text(g, &q));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_roots(g: &GroupSpec, args: &CommonArgs) -> Result<ExitCode> {
    let roots = generate_positive_roots(g)?;
    if let Some(dir) = &args.out {
        write_artifact(dir, &file_name(g, "roots"), &roots_json(&roots))?;
    }
    match args.format {
        Format::Json => print_json(&roots_json(&roots)),
        Format::Text => {
            println!("{}: {} positive roots", g.name.as_str(), roots.len());
            for (i, r) in roots.iter().enumerate() {
                let coords: Vec<String> = r.iter().map(|c| c.to_string()).collect();
                println!("  {:>3}: [{}]", i + 1, coords.join(", "));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_canonicalize(
    g: &GroupSpec,
    args: &CommonArgs,
    progress: &mut dyn FnMut(&str),
) -> Result<ExitCode> {
    let basis = canonicalize_all(g, progress)?;
    if let Some(dir) = &args.out {
        write_artifact(dir, &file_name(g, "records"), &records_json(&basis))?;
    }
    match args.format {
        Format::Json => print_json(&records_json(&basis)),
        Format::Text => print!("{}", records_text(&basis)),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_normalize(g: &GroupSpec, args: &CommonArgs) -> Result<ExitCode> {
    let dir = require_out(args);
    let basis = load_records(g, dir)?;
    let v = normalization_json(g, &basis)?;
    write_artifact(dir, &file_name(g, "normalization"), &v)?;
    match args.format {
        Format::Json => print_json(&v),
        Format::Text => {
            println!("{}: normalization factors 1/√⟨h,h⟩", g.name.as_str());
            for r in &basis.records {
                println!(
                    "  h_{}: ⟨h,h⟩ = {}, factor = {}",
                    r.a, r.norm_sq, r.norm_factor
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    g: &GroupSpec,
    args: &CommonArgs,
    progress: &mut dyn FnMut(&str),
) -> Result<ExitCode> {
    let dir = require_out(args);
    let basis = load_records(g, dir)?;
    let jacobian = match args.check_level {
        CheckLevel::Fast => JacobianMode::Points { count: 20 },
        CheckLevel::Full if g.rank <= 6 => JacobianMode::DivisionChain,
        CheckLevel::Full => JacobianMode::Points { count: g.n_positive_roots },
    };
    let opts = VerifyOptions { seed: args.seed, jacobian };
    let report = run_report(g, &basis, &opts, progress)?;
    write_artifact(dir, &file_name(g, "report"), &report_json(&report))?;
    match args.format {
        Format::Json => print_json(&report_json(&report)),
        Format::Text => print!("{}", report_text(&report)),
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_export(
    g: &GroupSpec,
    args: &CommonArgs,
    progress: &mut dyn FnMut(&str),
) -> Result<ExitCode> {
    let dir = require_out(args);
    let p = build_p_basis(g);
    let q = rescale_to_q(g, &p)?;
    let roots = generate_positive_roots(g)?;
    let basis = canonicalize_all(g, progress)?;
    let written = vec![
        write_artifact(dir, &file_name(g, "group"), &group_json(g))?,
        write_artifact(dir, &file_name(g, "roots"), &roots_json(&roots))?,
        write_artifact(dir, &file_name(g, "p_basis"), &basis_json(&p))?,
        write_artifact(dir, &file_name(g, "q_basis"), &basis_json(&q))?,
        write_artifact(dir, &file_name(g, "records"), &records_json(&basis))?,
        write_artifact(dir, &file_name(g, "normalization"), &normalization_json(g, &basis)?)?,
    ];
    match args.format {
        Format::Json => {
            let names: Vec<String> =
                written.iter().map(|p| p.to_string_lossy().into_owned()).collect();
            print_json(&json!({ "group": g.name.as_str(), "written": names }));
        }
        Format::Text => {
            println!("{}: wrote {} artifacts", g.name.as_str(), written.len());
            for path in &written {
                println!("  {}", path.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

fn file_name(g: &GroupSpec, kind: &str) -> String {
    format!("{}_{kind}.json", g.name.as_str().to_lowercase())
}

fn require_out(args: &CommonArgs) -> &Path {
    args.out.as_deref().expect("checked before dispatch")
}

/// Loads previously exported records; verification and normalization work
/// only from the interchange format, never from in-process state.
fn load_records(g: &GroupSpec, dir: &Path) -> Result<CanonicalBasis> {
    let path = dir.join(file_name(g, "records"));
    let raw = fs::read_to_string(&path).map_err(|e| {
        Error::InvalidData(format!(
            "cannot read {} (run `canonicalize --group {} --out …` first): {e}",
            path.display(),
            g.name.as_str()
        ))
    })?;
    let v: Value = serde_json::from_str(&raw)?;
    let basis = records_from_json(&v)?;
    if basis.group != g.name {
        return Err(Error::InvalidData(format!(
            "{} holds records for {}, not {}",
            path.display(),
            basis.group.as_str(),
            g.name.as_str()
        )));
    }
    Ok(basis)
}

fn normalization_json(g: &GroupSpec, basis: &CanonicalBasis) -> Result<Value> {
    let mut entries = Vec::with_capacity(basis.records.len());
    for r in &basis.records {
        // Cheap integrity check: the stored factor must be 1/√norm_sq.
        let expected = normalization_factor(&r.norm_sq)?;
        if expected != r.norm_factor {
            return Err(Error::InvalidData(format!(
                "record h_{} carries a norm factor that is not 1/√norm_sq",
                r.a
            )));
        }
        entries.push(json!({
            "a": r.a,
            "degree": r.degree,
            "norm_sq": r.norm_sq.to_string(),
            "norm_factor": serde_json::to_value(&r.norm_factor)?,
        }));
    }
    Ok(json!({ "group": g.name.as_str(), "entries": entries }))
}

fn basis_text(g: &GroupSpec, b: &BasisSet) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {} basis\n", b.group.as_str(), b.label.as_str()));
    for (i, poly) in b.polys.iter().enumerate() {
        out.push_str(&format!("{}_{} (degree {})\n", b.label.as_str(), i + 1, g.degrees[i]));
        poly.render_text(&mut out);
    }
    out
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON values always serialize"));
}

fn write_artifact(dir: &Path, file: &str, v: &Value) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(file);
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(&path, s)?;
    Ok(path)
}
