mod args;
mod commands;
mod manifest;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command, GenerateArgs, Variant};
use commands::{Output, Table};
use manifest::{sha256_hex, sibling, RunManifest};
use qslab::generators::{gen_rickman_rug, gen_round_sphere, gen_snowflake_plane};
use qslab::space::io;
use qslab::{DiscreteSpace, Error};

const THREADS_VAR: &str = "QSLAB_THREADS";

enum Failure {
    Input(String),
    Computation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input() {
            Failure::Input(e.to_string())
        } else {
            Failure::Computation(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Computation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Failure::Input(format!(
                "{THREADS_VAR} must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Computation(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let start = Instant::now();
    let command_line: Vec<String> = std::iter::once("qslab".to_string())
        .chain(std::env::args().skip(1))
        .collect();
    let mut manifest = RunManifest::new(command_line, &cli.command);

    if let Command::Generate(a) = &cli.command {
        return generate(a, manifest, start);
    }

    let (space_path, out) = match &cli.command {
        Command::Chain(a) => (&a.space.space, &a.out),
        Command::Constants(a) => (&a.space.space, &a.out),
        Command::ProbeDimension(a) => (&a.space.space, &a.out),
        Command::ProbeRug(a) => (&a.space.space, &a.out),
        Command::Ring(a) => (&a.space.space, &a.out),
        Command::Connect(a) => (&a.space.space, &a.out),
        Command::QsProfile(a) => (&a.space.space, &a.out),
        Command::Validate(a) => (&a.space.space, &a.out),
        Command::Generate(_) => unreachable!("handled above"),
    };
    let bytes = fs::read(space_path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", space_path.display())))?;
    manifest.space_digest = Some(sha256_hex(&bytes));
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::Input(format!("{} is not UTF-8", space_path.display())))?;
    let space = io::from_json(&text)?;

    let output = execute(&cli.command, &space)?;
    if let Some(seed) = seed_of(&cli.command) {
        for name in &output.streams {
            manifest.seeds.insert(name.to_string(), seed);
        }
    }
    let digest = manifest.digest();
    write_report(out, cli.command.name(), &digest, &output)?;
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    write_manifest(&sibling(out, "manifest.json"), &manifest, &digest)?;
    match output.failure {
        Some(note) => Err(Failure::Computation(note)),
        None => Ok(()),
    }
}

fn execute(command: &Command, space: &DiscreteSpace) -> Result<Output, Failure> {
    let out = match command {
        Command::Chain(a) => commands::chain(space, a),
        Command::Constants(a) => commands::constants(space, a),
        Command::ProbeDimension(a) => commands::probe_dimension(space, a),
        Command::ProbeRug(a) => commands::probe_rug(space, a),
        Command::Ring(a) => commands::ring(space, a),
        Command::Connect(a) => commands::connect(space, a),
        Command::QsProfile(a) => commands::qs(space, a),
        Command::Validate(a) => commands::validate(space, a),
        Command::Generate(_) => unreachable!("generate writes no report"),
    };
    Ok(out?)
}

fn seed_of(command: &Command) -> Option<u64> {
    match command {
        Command::Generate(a) => Some(a.seed),
        Command::Chain(a) => Some(a.seed),
        Command::Constants(a) => Some(a.seed),
        Command::ProbeDimension(a) => Some(a.seed),
        Command::QsProfile(a) => Some(a.seed),
        Command::Validate(a) => Some(a.seed),
        Command::ProbeRug(_) | Command::Ring(_) | Command::Connect(_) => None,
    }
}

fn generate(a: &GenerateArgs, mut manifest: RunManifest, start: Instant) -> Result<(), Failure> {
    let space = match a.variant {
        Variant::Sphere => {
            manifest.seeds.insert("sphere-rotation".into(), a.seed);
            gen_round_sphere(a.n, a.seed)?
        }
        Variant::Rug => gen_rickman_rug(a.nx, a.ny, a.dimension, a.extent)?,
        Variant::Snowflake => {
            manifest.seeds.insert("snowflake-points".into(), a.seed);
            gen_snowflake_plane(a.n, a.exponent, a.extent, a.seed)?
        }
    };
    let text = io::to_json(&space);
    manifest.space_digest = Some(sha256_hex(text.as_bytes()));
    fs::write(&a.out, text)?;
    let digest = manifest.digest();
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    write_manifest(&sibling(&a.out, "manifest.json"), &manifest, &digest)
}

fn write_report(out: &Path, command: &str, digest: &str, output: &Output) -> Result<(), Failure> {
    let body = json!({
        "command": command,
        "manifest_digest": digest,
        "report": output.report,
    });
    let mut text = serde_json::to_string_pretty(&body).expect("reports serialize");
    text.push('\n');
    fs::write(out, text)?;
    if let Some(table) = &output.table {
        write_csv(&sibling(out, "csv"), table, digest)?;
    }
    Ok(())
}

fn write_csv(path: &Path, table: &Table, digest: &str) -> Result<(), Failure> {
    let csv_err = |e: csv::Error| Failure::Input(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = table.header.clone();
    header.push("manifest_digest");
    w.write_record(&header).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(String::as_str).chain([digest]))
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn write_manifest(path: &Path, manifest: &RunManifest, digest: &str) -> Result<(), Failure> {
    let body = json!({ "digest": digest, "manifest": manifest });
    let mut text = serde_json::to_string_pretty(&body).expect("manifests serialize");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
