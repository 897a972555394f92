use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swellfront::analysis::{self, FitMode, FitWindow, Material};
use swellfront::engine::{self, product_grid};
use swellfront::io::{self, fmt_sig, ConfigFile};
use swellfront::{nondimensionalize, Error, Result};

#[derive(Parser)]
#[command(name = "swellfront", version, about = "Diffusion fronts in swelling rubber")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file, or one of the presets `dense` and `foam`.
    #[arg(long, short, default_value = "dense")]
    config: String,
    /// Override a config key, e.g. `--set physical.T=5000`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ConfigFile> {
        ConfigFile::load(&self.config, &self.overrides)
    }
}

#[derive(Args)]
struct FitArgs {
    /// Start of the fit window (min).
    #[arg(long, default_value_t = 1.0)]
    t_min: f64,
    /// End of the fit window (min); defaults to the whole run.
    #[arg(long)]
    t_max: Option<f64>,
    /// Fit `log s = gamma log t + c` instead of `s = t^gamma`.
    #[arg(long)]
    intercept: bool,
}

impl FitArgs {
    fn window(&self) -> FitWindow {
        FitWindow::new(self.t_min, self.t_max.unwrap_or(f64::INFINITY))
    }

    fn mode(&self) -> FitMode {
        if self.intercept {
            FitMode::WithIntercept
        } else {
            FitMode::ThroughOrigin
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation; writes front.csv, profiles.csv and run.meta.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Run an (a0, sigma) grid and write gamma_table.csv.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Kinetic coefficients a0.
        #[arg(long, value_delimiter = ',', required = true)]
        a0: Vec<f64>,
        /// Swelling divisors c in sigma(s) = s/c.
        #[arg(long, value_delimiter = ',', required = true)]
        sigma: Vec<f64>,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Fit s = t^gamma to a front curve and write fit.csv.
    Fit {
        /// Existing front.csv; when absent the configured run is simulated.
        #[arg(long)]
        front: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Compare a simulated front with measurements and write compare.csv.
    Compare {
        #[arg(long, default_value = "dense")]
        material: Material,
        /// Semicolon-separated measurement file with columns t;FR;FF;LR;LF;AR;AF.
        #[arg(long)]
        data: PathBuf,
        /// Config file or preset; defaults to the preset of the material.
        #[arg(long, short)]
        config: Option<String>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Print the dimensionless groups of a config.
    Dimensionless {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { config, out } => {
            let file = config.load()?;
            let res = engine::run(&file.run_config()?)?;
            write(&out, "front.csv", &io::front_csv(&res))?;
            write(&out, "profiles.csv", &io::profiles_csv(&res))?;
            write(&out, "run.meta", &io::run_meta(&file, &res))?;
            println!("s(T) = {} mm", fmt_sig(res.final_front()));
            if let swellfront::integrator::Termination::FrontReachedEll { tau } = res.termination() {
                println!(
                    "front reached ell at t = {} min; later samples dropped",
                    fmt_sig(tau * res.groups.time_scale())
                );
            }
        }
        Command::Sweep {
            config,
            a0,
            sigma,
            fit,
            out,
        } => {
            let base = config.load()?.run_config()?;
            let outcomes = engine::sweep(&product_grid(&a0, &sigma), &base)?;
            let table = analysis::gamma_table(&outcomes, fit.window(), fit.mode())?;
            let csv = table.to_csv();
            write(&out, "gamma_table.csv", &csv)?;
            print!("{csv}");
        }
        Command::Fit {
            front,
            config,
            fit,
            out,
        } => {
            let curve = match front {
                Some(path) => io::read_front_csv(path)?,
                None => engine::run(&config.load()?.run_config()?)?.front_pairs(),
            };
            let res = analysis::fit_power_law(&curve, fit.window(), fit.mode())?;
            write(&out, "fit.csv", &io::fit_csv(&res))?;
            println!(
                "gamma = {} ({:?}) over [{}, {}] min, {} points",
                fmt_sig(res.gamma),
                analysis::classify(res.gamma),
                res.window.0,
                res.window.1,
                res.n_points
            );
        }
        Command::Compare {
            material,
            data,
            config,
            overrides,
            out,
        } => {
            let (dense, foam) = io::ingest_experiment(&data)?;
            let series = match material {
                Material::Dense => dense,
                Material::Foam => foam,
            };
            let source = config.unwrap_or_else(|| material.to_string());
            let res = engine::run(&ConfigFile::load(&source, &overrides)?.run_config()?)?;
            let report = analysis::compare(&res.front_pairs(), &series)?;
            write(&out, "compare.csv", &io::compare_csv(&report))?;
            println!(
                "rmse = {} mm, max error = {} mm",
                fmt_sig(report.rmse),
                fmt_sig(report.max_abs_error)
            );
            if !report.flagged.is_empty() {
                println!("not compared (beyond simulated span): {:?}", report.flagged);
            }
        }
        Command::Dimensionless { config } => {
            let g = nondimensionalize(&config.load()?.physical_params()?)?;
            println!("Bi = {}", fmt_sig(g.biot));
            println!("A0 = {}", fmt_sig(g.thiele));
            println!("T* = {}", fmt_sig(g.end_time));
            println!("h0 = {}", fmt_sig(g.initial_front));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn exit_status(e: &Error) -> u8 {
    e.exit_code() as u8
}
