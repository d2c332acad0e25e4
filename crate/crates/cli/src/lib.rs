//! Command-line front end: file formats, rendering and subcommand dispatch.

pub mod io;
pub mod render;

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use sandcross::firing_graph::{crossing_graphs, disjointify, DisjointifyError};
use sandcross::geometry::{discretize, parse_rational, Rational};
use sandcross::synthesis::{find_min_working_ratio, synthesize, SynthesisError};
use sandcross::verify::verify_crossing;
use sandcross::{stabilize, stabilize_sequential};

use crate::render::{render_ascii, render_svg, Layer, RenderSpec};

pub const EXIT_CROSSING: i32 = 0;
pub const EXIT_NOT_CROSSING: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "sandcross", version, about = "Signal crossing in abelian sandpiles with uniform neighborhoods")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Output {
    /// Write the result here instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CrossingInput {
    /// Configuration JSON, or a synthesis document.
    pub config: PathBuf,
    #[arg(long)]
    pub nb: PathBuf,
    /// Crossing spec JSON; read from the configuration file when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Neighborhood of a shape at a scaling ratio.
    Discretize {
        shape: PathBuf,
        #[arg(long)]
        ratio: String,
        #[command(flatten)]
        out: Output,
    },
    /// Stabilize a configuration.
    Stabilize {
        config: PathBuf,
        #[arg(long)]
        nb: PathBuf,
        /// Fire one random unstable cell at a time, with this seed.
        #[arg(long)]
        sequential: Option<u64>,
        #[command(flatten)]
        out: Output,
    },
    /// Check the crossing conditions; exit 0 for a crossing, 1 otherwise.
    Verify {
        #[command(flatten)]
        input: CrossingInput,
        #[command(flatten)]
        out: Output,
    },
    /// Build a crossing for a scaled shape.
    Synthesize {
        shape: PathBuf,
        #[arg(long, conflicts_with = "sweep", required_unless_present = "sweep")]
        ratio: Option<String>,
        /// Smallest working ratio on the grid STEP, 2 STEP, ..., R_MAX.
        #[arg(long, num_args = 2, value_names = ["R_MAX", "STEP"])]
        sweep: Option<Vec<String>>,
        /// Also write the neighborhood JSON here.
        #[arg(long)]
        nb_out: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Remove the cells fired by both signals from a crossing.
    Disjointify {
        #[command(flatten)]
        input: CrossingInput,
        #[command(flatten)]
        out: Output,
    },
    /// Firing graphs of both signals.
    Graphs {
        #[command(flatten)]
        input: CrossingInput,
        #[command(flatten)]
        out: Output,
    },
    /// Draw a configuration, optionally with firing graphs.
    Render {
        config: PathBuf,
        #[arg(long)]
        graphs: Option<PathBuf>,
        /// Neighborhood shaded around the west-to-east fired cells.
        #[arg(long)]
        nb: Option<PathBuf>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        cell_size: u32,
        /// Comma-separated subset of grains, neighborhood-overlay,
        /// firing-graph-we, firing-graph-ns, borders.
        #[arg(long, value_delimiter = ',')]
        layers: Option<Vec<String>>,
        /// Plain text instead of SVG.
        #[arg(long)]
        ascii: bool,
        #[command(flatten)]
        out: Output,
    },
}

/// A failure reported on stderr with exit code 2.
#[derive(Debug)]
pub struct Failure(pub String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn emit(out: &Output, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match &out.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(Failure::from),
    }
}

fn ratio_arg(text: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(|_| Failure(format!("invalid ratio {text:?}")))
}

fn load_crossing(
    input: &CrossingInput,
) -> Result<(sandcross::Configuration, sandcross::Neighborhood, sandcross::verify::CrossingSpec), Failure> {
    let text = read(&input.config)?;
    let config = io::configuration_from_any(&text)?;
    let nb = io::neighborhood_from_json(&read(&input.nb)?)?;
    let spec = match &input.spec {
        Some(path) => io::spec_from_any(&read(path)?)?,
        None => io::spec_from_any(&text).map_err(|_| Failure("no --spec given and none in the configuration file".into()))?,
    };
    Ok((config, nb, spec))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_CROSSING;
            }
            let rendered = e.to_string();
            let line = rendered.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error");
            let _ = writeln!(stderr, "{line}");
            return EXIT_ERROR;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(stderr, "error: {}", msg.lines().next().unwrap_or(""));
            EXIT_ERROR
        }
    }
}

fn synthesis_code(e: &SynthesisError) -> i32 {
    match e {
        SynthesisError::RatioTooSmall { .. } | SynthesisError::GeometryConflict(_) | SynthesisError::NoRatioFound(_) => {
            EXIT_NOT_CROSSING
        }
        _ => EXIT_ERROR,
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Discretize { shape, ratio, out } => {
            let shape = io::shape_from_json(&read(&shape)?)?;
            let nb = discretize(&shape, &ratio_arg(&ratio)?)?;
            emit(&out, &io::neighborhood_to_json(&nb), stdout)?;
            Ok(EXIT_CROSSING)
        }
        Command::Stabilize { config, nb, sequential, out } => {
            let config = io::configuration_from_any(&read(&config)?)?;
            let nb = io::neighborhood_from_json(&read(&nb)?)?;
            let (stable, _) = match sequential {
                Some(seed) => stabilize_sequential(&config, &nb, seed, None)?,
                None => stabilize(&config, &nb, None)?,
            };
            emit(&out, &io::configuration_to_json(&stable), stdout)?;
            Ok(EXIT_CROSSING)
        }
        Command::Verify { input, out } => {
            let (config, nb, spec) = load_crossing(&input)?;
            let report = verify_crossing(&config, &nb, &spec);
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            emit(&out, &text, stdout)?;
            Ok(if report.verdict { EXIT_CROSSING } else { EXIT_NOT_CROSSING })
        }
        Command::Synthesize { shape, ratio, sweep, nb_out, out } => {
            let shape = io::shape_from_json(&read(&shape)?)?;
            let result = match (ratio, sweep) {
                (Some(r), None) => synthesize(&shape, &ratio_arg(&r)?),
                (None, Some(sw)) => find_min_working_ratio(&shape, &ratio_arg(&sw[0])?, &ratio_arg(&sw[1])?).map(|s| s.synthesis),
                _ => return Err(Failure("give exactly one of --ratio and --sweep".into())),
            };
            match result {
                Ok(s) => {
                    if let Some(path) = nb_out {
                        fs::write(&path, io::neighborhood_to_json(&s.neighborhood))
                            .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
                    }
                    emit(&out, &io::synthesis_to_json(&s), stdout)?;
                    Ok(EXIT_CROSSING)
                }
                Err(e) => {
                    let code = synthesis_code(&e);
                    if code == EXIT_ERROR {
                        return Err(Failure(e.to_string()));
                    }
                    let mut text = serde_json::to_string_pretty(&serde_json::json!({ "error": e.to_string() }))?;
                    text.push('\n');
                    emit(&out, &text, stdout)?;
                    Ok(code)
                }
            }
        }
        Command::Disjointify { input, out } => {
            let (config, nb, spec) = load_crossing(&input)?;
            match disjointify(&config, &nb, &spec) {
                Ok(c) => {
                    emit(&out, &io::configuration_to_json(&c), stdout)?;
                    Ok(EXIT_CROSSING)
                }
                Err(DisjointifyError::NotACrossing(report)) => {
                    let mut text = serde_json::to_string_pretty(&*report)?;
                    text.push('\n');
                    emit(&out, &text, stdout)?;
                    Ok(EXIT_NOT_CROSSING)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Graphs { input, out } => {
            let (config, nb, spec) = load_crossing(&input)?;
            let (we, ns) = crossing_graphs(&config, &nb, &spec)?;
            emit(&out, &io::graph_pair_to_json(&we, &ns), stdout)?;
            Ok(EXIT_CROSSING)
        }
        Command::Render { config, graphs, nb, spec, cell_size, layers, ascii, out } => {
            let text = read(&config)?;
            let config = io::configuration_from_any(&text)?;
            let graphs = graphs.map(|p| read(&p).and_then(|t| Ok(io::graph_pair_from_json(&t)?))).transpose()?;
            let overlay = nb.map(|p| read(&p).and_then(|t| Ok(io::neighborhood_from_json(&t)?))).transpose()?;
            let crossing = match spec {
                Some(p) => Some(io::spec_from_any(&read(&p)?)?),
                None => io::spec_from_any(&text).ok(),
            };
            let layers: BTreeSet<Layer> = match layers {
                Some(names) => names
                    .iter()
                    .map(|n| Layer::parse(n).ok_or_else(|| Failure(format!("unknown layer {n:?}"))))
                    .collect::<Result<_, _>>()?,
                None => Layer::ALL.into_iter().collect(),
            };
            let rs = RenderSpec { cell_size, layers, p: overlay.as_ref().map(|n| n.p()), overlay, crossing };
            let pair = graphs.as_ref().map(|(we, ns)| (we, ns));
            let picture = if ascii { render_ascii(&config, pair, &rs) } else { render_svg(&config, pair, &rs) };
            emit(&out, &picture, stdout)?;
            Ok(EXIT_CROSSING)
        }
    }
}
