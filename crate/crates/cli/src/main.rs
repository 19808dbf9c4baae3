use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use modfrm::Case;
use modfrm_cli::commands::{
    cmd_channelize, cmd_cost, cmd_design, cmd_respond, cmd_sweep, presets_table, ChannelizeArgs,
    DesignArgs, SignalSource, Targets,
};
use modfrm_cli::freq::{parse_counts, parse_frequency, parse_tone};
use modfrm_cli::{presets, CliError, CliResult};

/// Parsed as one comma-separated value rather than repeated flags.
type Counts = Vec<usize>;

/// Modulated frequency-response-masking filter banks.
///
/// Frequencies accept radians or multiples of pi: `0.2pi`, `0.25*pi`, `pi/4`.
#[derive(Parser)]
#[command(name = "modfrm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct TargetArgs {
    /// Modal passband edge.
    #[arg(long, default_value = "0.2pi", value_parser = parse_frequency)]
    theta: f64,
    /// Modal stopband edge.
    #[arg(long, default_value = "0.3pi", value_parser = parse_frequency)]
    phi: f64,
    /// Peak-to-peak passband ripple in dB.
    #[arg(long, default_value_t = 0.0065)]
    ripple: f64,
    /// Minimum stopband attenuation in dB.
    #[arg(long, default_value_t = 60.0)]
    atten: f64,
    /// Number of channels of the modal bank (odd).
    #[arg(short, long, default_value_t = 3)]
    m: usize,
    /// Masking case, I or II.
    #[arg(long, default_value = "I")]
    case: Case,
}

impl TargetArgs {
    fn targets(&self) -> Targets {
        Targets {
            theta: self.theta,
            phi: self.phi,
            ripple_db: self.ripple,
            atten_db: self.atten,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Design a ModFRM filter and its uniform bank; writes a JSON design file.
    Design {
        #[command(flatten)]
        targets: TargetArgs,
        /// Interpolation factor of the modal filter.
        #[arg(short, long)]
        l: Option<usize>,
        /// Channel counts to merge, e.g. `2,1,3,2`.
        #[arg(long, value_parser = parse_counts)]
        allocation: Option<Counts>,
        /// Take L, modal edges, m and the allocation from a preset.
        #[arg(long)]
        preset: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Design one filter per L and write a CSV of edges and multiplier counts.
    Sweep {
        #[command(flatten)]
        targets: TargetArgs,
        /// Interpolation factors, e.g. `10,15,20`.
        #[arg(long, value_parser = parse_counts, default_value = "10,15,20,25,30,40")]
        ls: Counts,
        /// CSV destination; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Tabulate the magnitude response of every channel in dB.
    Respond {
        #[arg(short, long)]
        design: PathBuf,
        /// Number of points on [0, 2pi).
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        /// Merge channels by the allocation stored in the design file.
        #[arg(long)]
        merged: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Filter a signal through the merged bank.
    ///
    /// Raw input and output files hold interleaved little-endian f32 pairs
    /// (real, imaginary) with no header. Each output channel goes to
    /// `channel_<i>.f32` in the output directory with `report.json`.
    Channelize {
        #[arg(short, long)]
        design: PathBuf,
        #[arg(long, value_parser = parse_counts, conflicts_with = "preset")]
        allocation: Option<Counts>,
        #[arg(long)]
        preset: Option<String>,
        /// Test tones `freq[:amplitude]`; repeatable.
        #[arg(long = "tone", value_parser = parse_tone, conflicts_with = "input")]
        tones: Vec<(f64, f64)>,
        /// Raw complex input file.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Length of the synthesized tone signal.
        #[arg(long, default_value_t = 8192)]
        samples: usize,
        #[arg(short, long)]
        output_dir: PathBuf,
    },
    /// Print the multiplier count of a stored design.
    Cost {
        #[arg(short, long)]
        design: PathBuf,
    },
    /// Channelizer presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List all presets.
    List,
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Design {
            targets,
            l,
            allocation,
            preset,
            output,
        } => {
            let (targets, m, l, case, allocation) = match preset {
                Some(name) => {
                    let p = presets::find(&name)
                        .ok_or_else(|| CliError::Argument(format!("unknown preset '{name}'")))?;
                    let t = Targets {
                        theta: p.theta,
                        phi: p.phi,
                        ..targets.targets()
                    };
                    (
                        t,
                        p.m,
                        p.l,
                        Case::I,
                        Some(allocation.unwrap_or_else(|| p.allocation.to_vec())),
                    )
                }
                None => {
                    let l = l.ok_or_else(|| {
                        CliError::Argument("--l is required without --preset".into())
                    })?;
                    (targets.targets(), targets.m, l, targets.case, allocation)
                }
            };
            let args = DesignArgs {
                targets,
                m,
                l,
                case,
                allocation,
                output,
                command_line: command_line(),
            };
            let (_, summary) = cmd_design(&args)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&summary).expect("summary serializes")
            );
        }
        Command::Sweep {
            targets,
            ls,
            output,
        } => {
            cmd_sweep(
                &targets.targets(),
                targets.m,
                targets.case,
                &ls,
                output.as_deref(),
            )?;
        }
        Command::Respond {
            design,
            grid,
            merged,
            output,
        } => {
            let n = cmd_respond(&design, grid, &output, merged)?;
            eprintln!("wrote {n} channel responses to {}", output.display());
        }
        Command::Channelize {
            design,
            allocation,
            preset,
            tones,
            input,
            samples,
            output_dir,
        } => {
            let source = match input {
                Some(p) => SignalSource::Raw(p),
                None if tones.is_empty() => {
                    return Err(CliError::Argument("give --tone or --input".into()));
                }
                None => SignalSource::Tones { tones, samples },
            };
            let report = cmd_channelize(&ChannelizeArgs {
                design,
                allocation,
                preset,
                source,
                output_dir,
            })?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
        }
        Command::Cost { design } => println!("{}", cmd_cost(&design)?),
        Command::Presets {
            action: PresetAction::List,
        } => print!("{}", presets_table()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
