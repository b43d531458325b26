use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pffdnn::plot::{self, Metric, PlotSpec};
use pffdnn::ExperimentConfig;

#[derive(Parser)]
#[command(name = "pffdnn", version, about = "Fit broadband signals segment by segment in the frequency domain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one signal with one method at one delta_omega.
    Fit(RunArgs),
    /// Fit every (method, delta_omega) pair and write a combined CSV.
    Sweep(RunArgs),
    /// Render CSV outputs as an SVG chart.
    Plot(PlotArgs),
    /// Write a signal's samples and half spectrum as CSV.
    Signal(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    signal: Option<String>,
    /// vanilla, phasednn or pffdnn. Repeatable for sweeps.
    #[arg(long, value_delimiter = ',')]
    method: Vec<String>,
    /// Segment or band width in bins. Repeatable for sweeps.
    #[arg(long = "delta-omega", value_delimiter = ',')]
    delta_omega: Vec<String>,
    #[arg(long)]
    updates: Option<String>,
    #[arg(long = "eval-every")]
    eval_every: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long = "energy-threshold")]
    energy_threshold: Option<String>,
    /// Layer widths, e.g. 1,40,40,40,1.
    #[arg(long = "net-shape")]
    net_shape: Option<String>,
    #[arg(long = "learning-rate")]
    learning_rate: Option<String>,
    #[arg(long = "batch-size")]
    batch_size: Option<String>,
    #[arg(long = "x-start", allow_hyphen_values = true)]
    x_start: Option<String>,
    #[arg(long = "x-end", allow_hyphen_values = true)]
    x_end: Option<String>,
    /// Use the linear chirp phase instead of the cubic one.
    #[arg(long = "linear-chirp")]
    linear_chirp: bool,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> pffdnn::Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let mut overrides: Vec<(&str, String)> = Vec::new();
        let scalars = [
            ("signal", &self.signal),
            ("updates", &self.updates),
            ("eval_every", &self.eval_every),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("energy_threshold", &self.energy_threshold),
            ("net_shape", &self.net_shape),
            ("learning_rate", &self.learning_rate),
            ("batch_size", &self.batch_size),
            ("x_start", &self.x_start),
            ("x_end", &self.x_end),
            ("jobs", &self.jobs),
        ];
        for (key, value) in scalars {
            if let Some(v) = value {
                overrides.push((key, v.clone()));
            }
        }
        if !self.method.is_empty() {
            overrides.push(("method", self.method.join(",")));
        }
        if !self.delta_omega.is_empty() {
            overrides.push(("delta_omega", self.delta_omega.join(",")));
        }
        if self.linear_chirp {
            overrides.push(("chirp_linear", "true".into()));
        }
        if let Some(out) = &self.out {
            overrides.push(("out", out.display().to_string()));
        }
        for (key, value) in overrides {
            config.set(key, &value)?;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct PlotArgs {
    /// CSV files sharing one schema.
    #[arg(required = true)]
    csv: Vec<PathBuf>,
    /// Output SVG file, or a directory to hold `plot.svg`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    title: Option<String>,
    /// relative_rmse, rmse or test_rmse.
    #[arg(long, default_value = "relative_rmse")]
    metric: Metric,
}

fn run(cli: Cli) -> pffdnn::Result<()> {
    match cli.command {
        Command::Fit(args) => {
            let run = pffdnn::run_fit(&args.resolve()?)?;
            let last = run.result.final_checkpoint();
            println!(
                "{} networks, {} updates, relative RMSE {:.6}, written to {}",
                run.result.networks,
                last.updates,
                last.relative_rmse,
                run.dir.display()
            );
        }
        Command::Sweep(args) => {
            let sweep = pffdnn::run_sweep(&args.resolve()?)?;
            for cell in &sweep.cells {
                let last = cell.result.final_checkpoint();
                let dw = cell.result.delta_omega.map(|d| d.to_string()).unwrap_or_else(|| "-".into());
                println!("{:<9} dw={:<4} relative RMSE {:.6}", cell.result.method.as_str(), dw, last.relative_rmse);
            }
            println!("combined log in {}", sweep.dir.join(pffdnn::run::SWEEP_CSV).display());
        }
        Command::Signal(args) => {
            let config = args.resolve()?;
            let (samples, bins) = pffdnn::dump_signal(&config.signal_spec(), &config.out)?;
            println!("{} samples, {} spectrum bins, written to {}", samples.len(), bins.len(), config.out.display());
        }
        Command::Plot(args) => {
            let out = if args.out.is_dir() { args.out.join("plot.svg") } else { args.out.clone() };
            let spec = PlotSpec { title: args.title, metric: args.metric, ..Default::default() };
            plot::write_plot(&args.csv, &spec, &out)?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // Clap exits with status 2 on its own usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

