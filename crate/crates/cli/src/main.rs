use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use proxgrip_core::controller::ControlCase;
use proxgrip_core::output;
use proxgrip_core::sweep::{self, Execution, REFERENCE_POSITION, SWEEP_POSITIONS};
use proxgrip_core::{run_scenario_streaming, ScenarioConfig, SimError, SurfaceReflectance};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "proxgrip",
    version,
    about = "Two-finger gripper simulator with proximity-based impedance control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop scenario and write timeseries.csv and report.csv.
    Run(Options),
    /// Run a batch of scenarios and write sweep_<kind>.csv.
    Sweep {
        kind: SweepKind,
        #[command(flatten)]
        opts: Options,
    },
    /// Check a config and print the resolved parameter set as TOML.
    Validate(Options),
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    /// Object centers 0.00 to 0.05 m under Cases 1 and 2.
    Position,
    /// Equal reflectance pairs plus one unequal pair, both orders.
    Reflectance,
    /// Cases 0, 1 and 2 on the same object.
    Impact,
}

impl SweepKind {
    fn name(self) -> &'static str {
        match self {
            SweepKind::Position => "position",
            SweepKind::Reflectance => "reflectance",
            SweepKind::Impact => "impact",
        }
    }
}

#[derive(Args)]
struct Options {
    /// TOML config file; built-in defaults apply to any key left out.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Control case: 0 impedance only, 1 adds impact reduction, 2 adds simultaneous contact.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
    case: Option<u8>,
    /// Object center, m.
    #[arg(long, value_name = "METERS", allow_negative_numbers = true)]
    xm: Option<f64>,
    /// Reflectance ratio seen by finger 1.
    #[arg(long, value_name = "R", requires = "alpha2")]
    alpha1: Option<f64>,
    /// Reflectance ratio seen by finger 2.
    #[arg(long, value_name = "R", requires = "alpha1")]
    alpha2: Option<f64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Integration step, s.
    #[arg(long, value_name = "SECONDS")]
    dt: Option<f64>,
    /// Simulated duration, s.
    #[arg(long, value_name = "SECONDS")]
    t_end: Option<f64>,
    /// Run sweep cells one after another.
    #[arg(long)]
    sequential: bool,
}

impl Options {
    /// Loads the config file (or defaults), applies command-line overrides
    /// and checks the result.
    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("cannot read config file {}", path.display()))?;
                ScenarioConfig::from_toml(&text)
                    .with_context(|| format!("invalid config file {}", path.display()))?
            }
            None => ScenarioConfig::default(),
        };
        if let Some(case) = self.case {
            cfg.scenario.case = ControlCase::try_from(case).map_err(anyhow::Error::msg)?;
        }
        if let Some(x_m) = self.xm {
            cfg.plant.object.center = x_m;
        }
        if let (Some(a1), Some(a2)) = (self.alpha1, self.alpha2) {
            cfg.set_reflectance(SurfaceReflectance::new(a1, a2));
        }
        if let Some(dt) = self.dt {
            cfg.plant.dt = dt;
        }
        if let Some(t_end) = self.t_end {
            cfg.scenario.t_end = t_end;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        fs::create_dir_all(&self.out)
            .with_context(|| format!("cannot create output directory {}", self.out.display()))?;
        let path = self.out.join(name);
        let file =
            File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(BufWriter::new(file))
    }
}

fn cmd_run(opts: &Options) -> Result<()> {
    let cfg = opts.resolve()?;
    let provenance = output::provenance_line(VERSION, &cfg);

    let mut series = opts.create("timeseries.csv")?;
    output::write_timeseries_header(&mut series, &provenance)?;
    let mut write_error = None;
    let outcome = run_scenario_streaming(&cfg, |s| {
        if write_error.is_none() {
            write_error = output::write_sample(&mut series, s).err();
        }
    });
    if let Some(e) = write_error {
        return Err(e).context("cannot write timeseries.csv");
    }
    series.flush()?;
    let report = outcome?;

    let mut summary = opts.create("report.csv")?;
    output::write_report(&mut summary, &provenance, &cfg, &report)?;
    summary.flush()?;

    let t = |v: Option<f64>| v.map_or("never".to_string(), |v| format!("{v:.2} s"));
    println!("{} at x_m = {} m", report.case, report.x_m);
    println!(
        "  time to contact: finger 1 {}, finger 2 {}",
        t(report.t_contact[0]),
        t(report.t_contact[1])
    );
    println!("  time difference of contact: {}", t(report.dt_contact));
    println!(
        "  steady contact force: {:.3} N / {:.3} N",
        report.f_c_final[0], report.f_c_final[1]
    );
    println!("  wrote {}", opts.out.display());
    Ok(())
}

fn cmd_sweep(kind: SweepKind, opts: &Options) -> Result<()> {
    let base = opts.resolve()?;
    let exec = opts.execution();
    let rows = match kind {
        SweepKind::Position => sweep::sweep_positions(
            &base,
            &[ControlCase::Case1, ControlCase::Case2],
            &SWEEP_POSITIONS,
            exec,
        ),
        SweepKind::Reflectance => {
            sweep::sweep_reflectances(&base, &sweep::reflectance_pairs(), exec)
        }
        SweepKind::Impact => {
            let x_m = opts.xm.unwrap_or(REFERENCE_POSITION);
            sweep::compare_impact(&base, x_m, exec)
        }
    };

    let name = format!("sweep_{}.csv", kind.name());
    let mut file = opts.create(&name)?;
    output::write_summary(&mut file, &output::provenance_line(VERSION, &base), &rows)?;
    file.flush()?;

    print!("{}", sweep::render_table(&rows));
    println!("wrote {}", opts.out.join(&name).display());

    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed == rows.len() {
        // Surface the first cell's error so the exit code reflects its kind.
        if let Some(Err(e)) = rows.into_iter().next().map(|r| r.outcome) {
            return Err(e).context("every sweep cell failed");
        }
        bail!("sweep produced no cells");
    }
    if failed > 0 {
        eprintln!("{failed} of {} cells failed", rows.len());
    }
    Ok(())
}

fn cmd_validate(opts: &Options) -> Result<()> {
    let cfg = opts.resolve()?;
    let resolved = ScenarioConfig {
        plant: cfg.plant.resolved(),
        ..cfg
    };
    println!("{}", output::provenance_line(VERSION, &resolved));
    print!("{}", resolved.to_toml());
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let diverged = err.chain().any(|c| {
        matches!(
            c.downcast_ref::<SimError>(),
            Some(SimError::Divergence { .. })
        )
    });
    if diverged {
        2
    } else {
        1
    }
}

fn report_error(err: &anyhow::Error) {
    for (i, cause) in err.chain().enumerate() {
        let lead = if i == 0 { "error" } else { "  caused by" };
        match cause.downcast_ref::<SimError>() {
            Some(SimError::InvalidConfig(problems)) => {
                eprintln!("{lead}: invalid configuration");
                for p in problems {
                    eprintln!("    - {p}");
                }
            }
            _ => eprintln!("{lead}: {cause}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(opts) => cmd_run(opts),
        Command::Sweep { kind, opts } => cmd_sweep(*kind, opts),
        Command::Validate(opts) => cmd_validate(opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            report_error(&err);
            ExitCode::from(exit_code(&err))
        }
    }
}
