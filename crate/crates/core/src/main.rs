use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use micromotion::runner::{list_scenarios, run_scenario, sweep, ScenarioConfig, SweepParam};
use micromotion::Result;

#[derive(Parser)]
#[command(
    version,
    about = "Hopf invariants and edge states of periodically driven two-band lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Overrides {
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Hopf grid size along k1, k2 and the drive phase.
    #[arg(long)]
    hopf_grid: Option<usize>,
    /// Strip width in sites.
    #[arg(long)]
    strip_sites: Option<usize>,
}

impl Overrides {
    fn apply(&self, c: &mut ScenarioConfig) -> Result<()> {
        if let Some(out) = &self.out {
            c.output_dir = out.clone();
        }
        if let Some(t) = self.threads {
            c.threads = t;
        }
        if let Some(n) = self.hopf_grid {
            c.hopf_grid = n;
            c.alpha_points = n;
        }
        if let Some(n) = self.strip_sites {
            c.strip_sites = n;
        }
        c.validate()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a builtin scenario or a configuration file.
    Run {
        scenario: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List the builtin scenarios and any given configuration files.
    List { configs: Vec<String> },
    /// Run a scenario once per value of one parameter (t0, mu2, mu or omega).
    Sweep {
        parameter: String,
        #[arg(allow_negative_numbers = true)]
        values: Vec<f64>,
        /// Scenario the sweep starts from.
        #[arg(long, default_value = "example1-nontrivial")]
        scenario: String,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { scenario, overrides } => {
            let mut c = ScenarioConfig::resolve(&scenario)?;
            overrides.apply(&mut c)?;
            let report = run_scenario(&c)?;
            let t = &report.topology;
            println!("{}", c.echo());
            println!(
                "hopf {:.6} -> {}  linking {}  chern slices {:?}",
                t.hopf_value,
                t.hopf_rounded,
                t.linking_number.map_or_else(|| "n/a".to_string(), |l| l.to_string()),
                t.chern_slices
            );
            println!(
                "edge modes: gap 0: {}, gap pi/T: {}",
                report.gap0.modes, report.gap_pi.modes
            );
            for (stage, secs) in &report.timings {
                println!("  {stage}: {secs:.2} s");
            }
            println!("wrote {}", c.output_dir.display());
        }
        Command::List { configs } => {
            let extra = configs
                .iter()
                .map(|p| ScenarioConfig::resolve(p))
                .collect::<Result<Vec<_>>>()?;
            for (_, echo) in list_scenarios(&extra) {
                println!("{echo}");
            }
        }
        Command::Sweep {
            parameter,
            values,
            scenario,
            overrides,
        } => {
            let parameter: SweepParam = parameter.parse()?;
            let mut c = ScenarioConfig::resolve(&scenario)?;
            overrides.apply(&mut c)?;
            let report = sweep(&c, parameter, &values)?;
            print!("{}", report.to_csv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
