//! Command-line surface: configuration, dispatch and artifact writing.

pub mod config;
pub mod experiments;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

pub use config::{Experiment, RunConfig, OUT_DIR_ENV};
pub use report::{summary_json, write_artifacts, Report, RunOutput, RunSummary, Table, Verdict};

use crate::dynamics::Potential;
use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "covscat", version, about = "Two-body relativistic scattering experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output root; artifacts go to <out>/<experiment>/.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write whitespace-separated .dat files for plotting.
    #[arg(long)]
    pub emit_plot_data: bool,
    /// Override any config key, e.g. --set limit.doublings=6. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args, Default)]
pub struct PotentialArgs {
    /// zero | square:<depth>:<radius> | gaussian:<depth>:<width>
    #[arg(long)]
    pub potential: Option<String>,
    #[arg(long)]
    pub well_depth: Option<f64>,
    #[arg(long)]
    pub well_radius: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct ChannelArgs {
    #[arg(long)]
    pub l: Option<u32>,
    /// Radial grid points.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Packet central momentum.
    #[arg(long)]
    pub z0: Option<f64>,
    #[arg(long)]
    pub sigma_z: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Center-variable round trips, covariance and the two-body mass relation.
    Kinematics {
        #[command(flatten)]
        common: Common,
        /// JSON momenta to decompose.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generator algebra closure, hermiticity and translation phases.
    RepCheck {
        #[command(flatten)]
        common: Common,
        /// Spin as 2s; repeatable.
        #[arg(long = "spin")]
        spins: Vec<u32>,
        #[arg(long)]
        test_functions: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Stationary phase shifts on a momentum grid.
    Phaseshift {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long)]
        lmax: Option<u32>,
        #[arg(long)]
        z_min: Option<f64>,
        #[arg(long)]
        z_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Moeller limit, intertwining and the time-dependent S-matrix.
    Moeller {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Skip the n/2 → n refinement of the phase comparison.
        #[arg(long)]
        no_refine: bool,
    },
    /// Commuting interaction: the limit does not exist.
    DemoNogo {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Constant added to the mass spectrum.
        #[arg(long)]
        shift: Option<f64>,
    },
    /// Monte Carlo cross section in two frames.
    Xsection {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long)]
        z0: Option<f64>,
        #[arg(long)]
        lmax: Option<u32>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// full | band:<cmin>:<cmax> | cone:<cmin>
        #[arg(long)]
        region: Option<String>,
    },
    /// Luminosity of position-space packets.
    Luminosity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target_width: Option<f64>,
        #[arg(long)]
        beam_width: Option<f64>,
        #[arg(long)]
        speed: Option<f64>,
        /// Points per axis, e.g. 128,64,64.
        #[arg(long, value_delimiter = ',')]
        r#box: Option<Vec<usize>>,
        /// Half-width of the time window.
        #[arg(long)]
        window: Option<f64>,
    },
    /// Scattering probability against cross section times luminosity.
    Factorization {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        potential: PotentialArgs,
        /// σ/z₀ values; repeatable.
        #[arg(long = "width-ratio")]
        width_ratios: Vec<f64>,
    },
    /// List violated preconditions without running.
    Validate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        channel: ChannelArgs,
    },
}

/// A numerical failure and the stage that raised it.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub stage: String,
    pub error: Error,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

fn set_opt<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Parses `zero`, `square:<depth>:<radius>` or `gaussian:<depth>:<width>`.
pub fn parse_potential(s: &str) -> crate::Result<Potential> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Config(format!("potential: bad number {x:?} in {s:?}")));
    let v = match parts.as_slice() {
        ["zero"] => Potential::Zero,
        ["square", d, a] => Potential::SquareWell { depth: num(d)?, radius: num(a)? },
        ["gaussian", d, w] => Potential::Gaussian { depth: num(d)?, width: num(w)? },
        _ => return Err(Error::Config(format!("potential: unknown spec {s:?}; expected zero, square:<depth>:<radius> or gaussian:<depth>:<width>"))),
    };
    Ok(v)
}

impl PotentialArgs {
    fn apply(&self, cfg: &mut RunConfig) -> crate::Result<()> {
        if let Some(s) = &self.potential {
            cfg.potential = parse_potential(s)?;
        }
        if self.well_depth.is_some() || self.well_radius.is_some() {
            let (d0, a0) = match cfg.potential {
                Potential::SquareWell { depth, radius } => (depth, radius),
                _ => (0.5, 1.0),
            };
            cfg.potential = Potential::SquareWell { depth: self.well_depth.unwrap_or(d0), radius: self.well_radius.unwrap_or(a0) };
        }
        Ok(())
    }
}

impl ChannelArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set_opt(&mut cfg.grid.l, self.l);
        set_opt(&mut cfg.grid.n, self.n);
        set_opt(&mut cfg.grid.radius, self.radius);
        set_opt(&mut cfg.packet.z0, self.z0);
        set_opt(&mut cfg.packet.sigma_z, self.sigma_z);
    }
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Kinematics { common, .. }
            | Command::RepCheck { common, .. }
            | Command::Phaseshift { common, .. }
            | Command::Moeller { common, .. }
            | Command::DemoNogo { common, .. }
            | Command::Xsection { common, .. }
            | Command::Luminosity { common, .. }
            | Command::Factorization { common, .. }
            | Command::Validate { common, .. } => common,
        }
    }

    /// Config file, then `--set` overrides, then named flags.
    pub fn resolve(&self) -> crate::Result<RunConfig> {
        let common = self.common();
        let mut cfg = match &common.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                RunConfig::from_toml(&text)?
            }
            None => RunConfig::default(),
        };
        for s in &common.set {
            cfg.set(s)?;
        }
        match self {
            Command::Kinematics { input, samples, seed, .. } => {
                cfg.experiment = Experiment::Kinematics;
                if input.is_some() {
                    cfg.kinematics.input = input.clone();
                }
                set_opt(&mut cfg.kinematics.samples, *samples);
                set_opt(&mut cfg.kinematics.seed, *seed);
            }
            Command::RepCheck { spins, test_functions, seed, .. } => {
                cfg.experiment = Experiment::RepCheck;
                if !spins.is_empty() {
                    cfg.rep_check.spins = spins.clone();
                }
                set_opt(&mut cfg.rep_check.test_functions, *test_functions);
                set_opt(&mut cfg.rep_check.seed, *seed);
            }
            Command::Phaseshift { potential, lmax, z_min, z_max, points, .. } => {
                cfg.experiment = Experiment::Phaseshift;
                potential.apply(&mut cfg)?;
                set_opt(&mut cfg.phaseshift.lmax, *lmax);
                set_opt(&mut cfg.phaseshift.z_min, *z_min);
                set_opt(&mut cfg.phaseshift.z_max, *z_max);
                set_opt(&mut cfg.phaseshift.points, *points);
            }
            Command::Moeller { potential, channel, no_refine, .. } => {
                cfg.experiment = Experiment::Moeller;
                potential.apply(&mut cfg)?;
                channel.apply(&mut cfg);
                if *no_refine {
                    cfg.grid.refine = false;
                }
            }
            Command::DemoNogo { channel, shift, .. } => {
                cfg.experiment = Experiment::DemoNogo;
                channel.apply(&mut cfg);
                set_opt(&mut cfg.nogo.shift, *shift);
            }
            Command::Xsection { potential, z0, lmax, samples, seed, region, .. } => {
                cfg.experiment = Experiment::Xsection;
                potential.apply(&mut cfg)?;
                set_opt(&mut cfg.xsection.z0, *z0);
                set_opt(&mut cfg.xsection.lmax, *lmax);
                set_opt(&mut cfg.xsection.samples, *samples);
                set_opt(&mut cfg.xsection.seed, *seed);
                set_opt(&mut cfg.xsection.region, region.clone());
            }
            Command::Luminosity { target_width, beam_width, speed, r#box, window, .. } => {
                cfg.experiment = Experiment::Luminosity;
                set_opt(&mut cfg.luminosity.target_width, *target_width);
                set_opt(&mut cfg.luminosity.beam_width, *beam_width);
                set_opt(&mut cfg.luminosity.speed, *speed);
                set_opt(&mut cfg.luminosity.window, *window);
                if let Some(b) = r#box {
                    cfg.luminosity.r#box = b
                        .as_slice()
                        .try_into()
                        .map_err(|_| Error::Config(format!("luminosity.box: need 3 values, got {}", b.len())))?;
                }
            }
            Command::Factorization { potential, width_ratios, .. } => {
                cfg.experiment = Experiment::Factorization;
                potential.apply(&mut cfg)?;
                if !width_ratios.is_empty() {
                    cfg.factorization.width_ratios = width_ratios.clone();
                }
            }
            Command::Validate { potential, channel, .. } => {
                potential.apply(&mut cfg)?;
                channel.apply(&mut cfg);
            }
        }
        Ok(cfg)
    }
}

/// Output root: explicit flag, then config, then the environment, then `./out`.
pub fn output_root(flag: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Runs the configured experiment without touching the filesystem.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, Failure> {
    let start = Instant::now();
    let mut report = Report::new();
    let mut timings = vec![];
    let outcome = experiments::run_experiment(cfg, &mut report, &mut timings);
    if let Err(error) = outcome {
        return Err(Failure { stage: report.stage, error });
    }
    let mut wall_clock = Map::new();
    wall_clock.insert("total".into(), Value::from(start.elapsed().as_secs_f64()));
    for (k, v) in timings {
        wall_clock.insert(k, Value::from(v));
    }
    let summary = RunSummary {
        experiment: cfg.experiment.name().into(),
        config_digest: cfg.digest(),
        verdicts: report.verdicts,
        results: report.results,
        wall_clock,
    };
    Ok(RunOutput { summary, tables: report.tables, documents: report.documents })
}

/// Parses `args`, runs, writes artifacts and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let cfg = match cli.command.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid configuration: {e}");
            return EXIT_INVALID;
        }
    };
    let diagnostics = cfg.validate();
    if let Command::Validate { .. } = cli.command {
        for d in &diagnostics {
            println!("{d}");
        }
        return if diagnostics.is_empty() { EXIT_OK } else { EXIT_INVALID };
    }
    if !diagnostics.is_empty() {
        eprintln!("invalid configuration:");
        for d in &diagnostics {
            eprintln!("  {d}");
        }
        return EXIT_INVALID;
    }
    let common = cli.command.common();
    let output = match execute(&cfg) {
        Ok(x) => x,
        Err(f) if matches!(f.error, Error::Config(_)) => {
            eprintln!("invalid configuration: {}", f.error);
            return EXIT_INVALID;
        }
        Err(f) => {
            eprintln!("numerical failure in stage \"{}\": {}", f.stage, f.error);
            return EXIT_FAILED;
        }
    };
    let dir = output_root(common.out.as_deref(), &cfg).join(cfg.experiment.name());
    if let Err(e) = write_artifacts(&dir, &output, common.emit_plot_data) {
        eprintln!("{e}");
        return EXIT_FAILED;
    }
    if let Ok(text) = cfg.to_toml() {
        let _ = std::fs::write(dir.join("config.toml"), format!("# config_digest={}\n{text}", output.summary.config_digest));
    }
    let summary = &output.summary;
    for v in &summary.verdicts {
        println!("{} {:<44} {:.3e} (tolerance {:.1e})", if v.pass { "PASS" } else { "FAIL" }, v.check, v.value, v.tolerance);
    }
    println!("artifacts: {}", dir.display());
    if summary.passed() {
        EXIT_OK
    } else {
        for v in summary.failed() {
            eprintln!("check failed: {}", v.check);
        }
        EXIT_FAILED
    }
}
