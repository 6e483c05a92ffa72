use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dataval_core::codec::{decode_to_xml, encode, roundtrip_check, RoundTrip};
use dataval_core::dataset_io::{load_dataset, parse_bindings, read_canonical};
use dataval_core::railway_model::{fixture_files, generate_network, GenParams, BINDINGS_SOURCE, MODEL_SOURCE};
use dataval_core::spec_lang::load_model;
use dataval_core::validator::{
    explain, parse_manifest, parse_requirements, render_matrix, render_records, render_text, run, test_properties, trace_matrix,
    EngineChoice, RunConfig, Source, ValidationReport, DEFAULT_REF_BOUND,
};

#[derive(Parser)]
#[command(name = "dataval", version, about = "Validate configuration data against a set-theoretic model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every property of the model on a dataset.
    Run(RunArgs),
    /// Show the evaluation tree of one property.
    Explain {
        #[command(flatten)]
        run: RunArgs,
        /// Expand referenced definitions, one level per repetition.
        #[arg(short = 'x', long, action = clap::ArgAction::Count)]
        expand: u8,
    },
    /// Run the fixture harness.
    Test {
        #[command(flatten)]
        model: ModelArgs,
        /// Directory holding `manifest` and the fixtures it lists; the
        /// bundled fixtures when absent.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long, env = "DATAVAL_REF_BOUND", default_value_t = DEFAULT_REF_BOUND)]
        ref_bound: usize,
    },
    /// Print the requirement traceability table.
    Trace {
        #[command(flatten)]
        model: ModelArgs,
        /// Requirement tags, one per line; tags no property covers are flagged.
        #[arg(long)]
        requirements: Option<PathBuf>,
        /// Dataset whose verdicts fill the table.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Convert an XML dataset to the binary format.
    Encode {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Convert a binary dataset to canonical XML.
    Decode {
        #[arg(long)]
        data: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that a binary dataset re-encodes to the same bytes.
    Roundtrip {
        #[arg(long)]
        data: PathBuf,
    },
    /// Generate a railway network, or the bundled fixtures.
    Gen {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        blocks: usize,
        #[arg(long, default_value_t = 0)]
        switches: usize,
        #[arg(long, default_value_t = 0)]
        flips: usize,
        /// Defaults to one per block.
        #[arg(long)]
        signals: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the nominal fixture, its mutations and the manifest to this directory instead.
        #[arg(long, conflicts_with = "output")]
        fixtures: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Model file; the bundled railway model when absent.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Bindings file; the bundled railway bindings when absent.
    #[arg(long)]
    bindings: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Both,
    Main,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Records,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Dataset, XML or binary.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = EngineArg::Both)]
    engine: EngineArg,
    #[arg(long, env = "DATAVAL_REF_BOUND", default_value_t = DEFAULT_REF_BOUND)]
    ref_bound: usize,
    /// Defaults to the number of available cores.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Evaluate only this property.
    #[arg(long)]
    property: Option<String>,
}

impl ModelArgs {
    fn sources(&self) -> (Source, Source) {
        let model = match &self.model {
            Some(p) => read_source(p),
            None => Source::new("railway.model (bundled)", MODEL_SOURCE),
        };
        let bindings = match &self.bindings {
            Some(p) => read_source(p),
            None => Source::new("railway.bindings (bundled)", BINDINGS_SOURCE),
        };
        (model, bindings)
    }

    fn text(&self) -> Result<(String, String)> {
        let model = match &self.model {
            Some(p) => read_text(p)?,
            None => MODEL_SOURCE.to_string(),
        };
        let bindings = match &self.bindings {
            Some(p) => read_text(p)?,
            None => BINDINGS_SOURCE.to_string(),
        };
        Ok((model, bindings))
    }
}

/// An unreadable file becomes an empty source, which the validator reports
/// as a load error.
fn read_source(path: &Path) -> Source {
    match fs::read(path) {
        Ok(bytes) => Source::new(path.display().to_string(), bytes),
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            Source::new(path.display().to_string(), Vec::new())
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).context("cannot write to stdout")
        }
    }
}

fn validate(args: &RunArgs) -> ValidationReport {
    let (model, bindings) = args.model.sources();
    let data = read_source(&args.data);
    let cfg = RunConfig {
        engine: match args.engine {
            EngineArg::Both => EngineChoice::Both,
            EngineArg::Main => EngineChoice::Main,
        },
        ref_bound: args.ref_bound,
        workers: args
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
        property: args.property.clone(),
    };
    let report = run(&model, &bindings, &data, &cfg);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(e) = &report.load_error {
        eprintln!("error: {e}");
    }
    if let Some(Err(e)) = &report.roundtrip {
        eprintln!("error: round trip failed: {e}");
    }
    report
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code.clamp(0, 255) as u8)
}

fn main() -> ExitCode {
    // usage errors share the load-error code; clap's default would collide with WD errors
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return exit(if e.use_stderr() { 5 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            exit(5)
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Run(args) => {
            let report = validate(&args);
            let out = match args.format {
                Format::Text => render_text(&report),
                Format::Records => render_records(&report),
            };
            print!("{out}");
            Ok(report.exit_code())
        }
        Command::Explain { run: args, expand } => {
            let Some(property) = args.property.clone() else {
                bail!("explain needs --property");
            };
            let report = validate(&args);
            if report.properties.is_empty() {
                return Ok(report.exit_code());
            }
            let (model, _) = args.model.text()?;
            let model = load_model(&model)?;
            print!("{}", explain(&report, &model, &property, expand as usize)?);
            Ok(report.exit_code())
        }
        Command::Test {
            model,
            fixtures,
            ref_bound,
        } => {
            let (model_text, bindings_text) = model.text()?;
            let model = load_model(&model_text)?;
            let bindings = parse_bindings(&bindings_text)?;
            let bundled = fixture_files();
            let read = |name: &str| -> std::result::Result<String, String> {
                match &fixtures {
                    Some(dir) => fs::read_to_string(dir.join(name)).map_err(|e| e.to_string()),
                    None => bundled
                        .iter()
                        .find(|(n, _)| n == name)
                        .map(|(_, x)| x.clone())
                        .ok_or_else(|| "no such bundled fixture".to_string()),
                }
            };
            let manifest = parse_manifest(&read("manifest").map_err(|e| anyhow::anyhow!("manifest: {e}"))?)?;
            let report = test_properties(&model, &bindings, &manifest, &read, ref_bound)?;
            print!("{}", report.render());
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Trace {
            model,
            requirements,
            data,
        } => {
            let reqs = requirements.as_deref().map(read_text).transpose()?.map(|t| parse_requirements(&t));
            let report = match &data {
                Some(path) => {
                    let args = RunArgs {
                        model: ModelArgs {
                            model: model.model.clone(),
                            bindings: model.bindings.clone(),
                        },
                        data: path.clone(),
                        engine: EngineArg::Main,
                        ref_bound: DEFAULT_REF_BOUND,
                        workers: None,
                        format: Format::Text,
                        property: None,
                    };
                    Some(validate(&args))
                }
                None => None,
            };
            let (model_text, _) = model.text()?;
            let model = load_model(&model_text)?;
            let rows = trace_matrix(&model, reqs.as_deref(), report.as_ref().map(|r| r.properties.as_slice()));
            print!("{}", render_matrix(&rows));
            Ok(if rows.iter().any(|r| r.orphan) { 1 } else { 0 })
        }
        Command::Encode { model, data, output } => {
            let (model_text, bindings_text) = model.text()?;
            let model = load_model(&model_text)?;
            let bindings = parse_bindings(&bindings_text)?;
            let xml = read_text(&data)?;
            let ds = match read_canonical(&xml) {
                Ok(ds) => {
                    ds.conforms_to(&model, &bindings)?;
                    ds
                }
                Err(_) => load_dataset(&xml, &bindings, &model)?,
            };
            write_out(Some(&output), &encode(&ds)?)?;
            Ok(0)
        }
        Command::Decode { data, output } => {
            let bytes = fs::read(&data).with_context(|| format!("cannot read {}", data.display()))?;
            write_out(output.as_deref(), decode_to_xml(&bytes)?.as_bytes())?;
            Ok(0)
        }
        Command::Roundtrip { data } => {
            let bytes = fs::read(&data).with_context(|| format!("cannot read {}", data.display()))?;
            Ok(match roundtrip_check(&bytes) {
                RoundTrip::Pass => {
                    println!("round-trip: pass ({} bytes)", bytes.len());
                    0
                }
                RoundTrip::Mismatch { offset } => {
                    println!("round-trip: FAIL: re-encoded message differs at byte {offset}");
                    4
                }
                RoundTrip::Decode(e) => {
                    println!("round-trip: FAIL: decode error: {e}");
                    4
                }
                RoundTrip::Encode(e) => {
                    println!("round-trip: FAIL: re-encode error: {e}");
                    4
                }
            })
        }
        Command::Gen {
            seed,
            blocks,
            switches,
            flips,
            signals,
            output,
            fixtures,
        } => {
            if let Some(dir) = fixtures {
                fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
                for (name, content) in fixture_files() {
                    write_out(Some(&dir.join(name)), content.as_bytes())?;
                }
                return Ok(0);
            }
            let params = GenParams {
                blocks,
                switches,
                flips,
                signals: signals.unwrap_or(blocks.max(2)),
            };
            let net = generate_network(seed, &params)?;
            write_out(output.as_deref(), net.to_xml().as_bytes())?;
            Ok(0)
        }
    }
}
