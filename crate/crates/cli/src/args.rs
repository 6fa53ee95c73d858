//! Command-line flags and their merge into a [`RunConfig`].
//!
//! Precedence, lowest first: built-in defaults, the `--config` file, the
//! `NF_SEED` environment variable (seed only), explicit flags.

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use toric_rbim::duality::Sector;
use toric_rbim::mc::Observable;
use toric_rbim::noisy::{Engine, HomologyMethod};
use toric_rbim::Boundary;

use crate::config::{
    steps, BuildCodeParams, CodeKind, Command, DualizeParams, Fault, OutputFormat, RbimAxis, RunConfig,
    ScanCoherenceParams, ScanRbimParams, ThresholdParams, VerifyParams,
};
use crate::run::CliError;

pub const SEED_ENV: &str = "NF_SEED";

const FORMATS_HELP: &str = "\
Output files (CSV: '.' decimals, '\\n' line ends, columns in this order):
  scan-rbim, scan-coherence   p,q_or_T,mean,stderr,n_disorder,sweeps,seed
                              (failed cells carry NaN in mean and stderr)
  scan-rbim --sizes ...       L,p,q_or_T,binder,binder_stderr,mean,stderr,n_disorder,sweeps,seed
  threshold                   p,success_mean,success_stderr,n_eta,L
  verify                      check,passed,instances,max_error,tolerance,failures
  dualize, build-code         hypergraph text: vertex count on the first line,
                              then one hyperedge per line (vertex indices)
  --couplings FILE            spin count on the first line, then one
                              interaction per line: spin indices, then sign 1|-1

With --format json the output is {\"config\": ..., \"result\": ...}. Any other
output file gets a sidecar <FILE>.config.json holding the full run config,
which can be replayed with --config.

Grids accept a comma list (0.1,0.2,0.3) or start:stop:step (0.1:0.3:0.05).

Exit status: 0 ok, 1 failed check (or no usable result), 2 usage, parse or
size-limit error.";

#[derive(Debug, Parser)]
#[command(name = "toric-rbim", version, about = "Noisy toric code coherence and random-bond Ising model toolkit", after_long_help = FORMATS_HELP)]
pub struct Cli {
    /// JSON run config; flags given explicitly override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed [default: 1; env NF_SEED].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Output format [default: csv].
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads [default: available parallelism]. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Log more (-v info, -vv debug).
    #[arg(long, short, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Run the exact equivalence battery on small lattices.
    Verify(VerifyArgs),
    /// Monte Carlo order parameter of the random-bond Ising model over a grid,
    /// or Binder crossings when --sizes lists two or more sizes.
    ScanRbim(ScanRbimArgs),
    /// Coherence of the probed site over a (p, q) grid of noise strengths.
    ScanCoherence(ScanCoherenceArgs),
    /// Maximum-likelihood decoding success on tori along p = q.
    Threshold(ThresholdArgs),
    /// Dual of a hypergraph text file.
    Dualize(DualizeArgs),
    /// Build a CSS code and write one sector (or its dual) as a hypergraph.
    BuildCode(BuildCodeArgs),
}

impl CliCommand {
    pub fn name(&self) -> &'static str {
        match self {
            CliCommand::Verify(_) => "verify",
            CliCommand::ScanRbim(_) => "scan-rbim",
            CliCommand::ScanCoherence(_) => "scan-coherence",
            CliCommand::Threshold(_) => "threshold",
            CliCommand::Dualize(_) => "dualize",
            CliCommand::BuildCode(_) => "build-code",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err("a range is start:stop:step".into());
        };
        let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
        if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
            return Err("a range needs start <= stop and step > 0".into());
        }
        if (stop - start) / step > 1e6 {
            return Err("range has too many points".into());
        }
        return Ok(Grid(steps(start, stop, step)));
    }
    s.split(',').map(num).collect::<Result<Vec<_>, _>>().map(Grid)
}

fn parse_observable(s: &str) -> Result<Observable, String> {
    match s {
        "center" => Ok(Observable::Center),
        "site-average" | "site_average" => Ok(Observable::SiteAverage),
        _ => s
            .strip_prefix("site:")
            .and_then(|i| i.parse().ok())
            .map(Observable::Site)
            .ok_or_else(|| format!("expected center, site-average or site:<index>, got {s:?}")),
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoundaryArg {
    Open,
    Torus,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Open => Boundary::Open,
            BoundaryArg::Torus => Boundary::Torus,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SectorArg {
    #[value(name = "X", alias = "x")]
    X,
    #[value(name = "Z", alias = "z")]
    Z,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EngineArg {
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Enumeration,
    TransferMatrix,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Random instances for the partition-function and magnetization checks [default: 20].
    #[arg(long)]
    pub n_instances: Option<usize>,
    /// Largest open-lattice side, at most 5 [default: 3].
    #[arg(long)]
    pub max_size: Option<usize>,
    /// Patterns per (p, q) cell of the coherence check [default: 50].
    #[arg(long)]
    pub n_eta: Option<usize>,
    /// Patterns per (L, q) cell of the fidelity check [default: 10].
    #[arg(long)]
    pub n_eta_fidelity: Option<usize>,
    /// Corrupt one computation on purpose (self-test of the failure path).
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Disorder realizations per cell [default: 16].
    #[arg(long)]
    pub n_disorder: Option<usize>,
    /// Equilibration sweeps per chain [default: 1000].
    #[arg(long)]
    pub n_equilibration_sweeps: Option<usize>,
    /// Measurement sweeps per chain [default: 4000].
    #[arg(long)]
    pub n_measure_sweeps: Option<usize>,
    /// Sweeps between measurements [default: 2].
    #[arg(long)]
    pub measure_interval: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScanRbimArgs {
    /// Second grid coordinate [default: T].
    #[arg(long, value_enum)]
    pub axis: Option<RbimAxis>,
    /// Lattice side of a grid scan [default: 16].
    #[arg(long, short = 'L')]
    pub linear_size: Option<usize>,
    /// Lattice boundary of a grid scan [default: torus].
    #[arg(long, value_enum)]
    pub boundary: Option<BoundaryArg>,
    /// Disorder grid; the p = q points on the Nishimori axis.
    #[arg(long, value_parser = parse_grid)]
    pub ps: Option<Grid>,
    /// T or q grid.
    #[arg(long, value_parser = parse_grid)]
    pub xs: Option<Grid>,
    /// Torus sizes for a Binder crossing, e.g. 8,16.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Open-lattice probe: center, site-average or site:<index> [default: site-average].
    #[arg(long, value_parser = parse_observable)]
    pub observable: Option<Observable>,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Args)]
pub struct ScanCoherenceArgs {
    /// Side of the open lattice [default: 3].
    #[arg(long, short = 'L')]
    pub linear_size: Option<usize>,
    /// Probed free site [default: center].
    #[arg(long)]
    pub site: Option<usize>,
    /// Quenched noise grid [default: 0:0.25:0.05].
    #[arg(long, value_parser = parse_grid)]
    pub ps: Option<Grid>,
    /// Annealed noise grid [default: 0.05:0.3:0.05].
    #[arg(long, value_parser = parse_grid)]
    pub qs: Option<Grid>,
    /// Patterns per cell [default: 50].
    #[arg(long)]
    pub n_eta: Option<usize>,
    /// Evaluation engine [default: auto].
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    /// Equilibration sweeps (Monte Carlo engine) [default: 1000].
    #[arg(long)]
    pub n_equilibration_sweeps: Option<usize>,
    /// Measurement sweeps (Monte Carlo engine) [default: 4000].
    #[arg(long)]
    pub n_measure_sweeps: Option<usize>,
    /// Sweeps between measurements [default: 2].
    #[arg(long)]
    pub measure_interval: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Torus sizes [default: 3,4].
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// p = q grid [default: 0.05:0.2:0.01].
    #[arg(long, value_parser = parse_grid)]
    pub ps: Option<Grid>,
    /// Patterns per point [default: 1000].
    #[arg(long)]
    pub n_eta: Option<usize>,
    /// Class-weight evaluation: enumeration (L <= 4) or transfer-matrix (L <= 10).
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
}

#[derive(Debug, Args)]
pub struct DualizeArgs {
    /// Hypergraph text file.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Also write the dual's spin model as a coupling file.
    #[arg(long, value_name = "FILE")]
    pub couplings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildCodeArgs {
    /// Code family [default: toric].
    #[arg(long, value_enum)]
    pub code: Option<CodeKind>,
    /// Toric: L or W,H; color: extent; xcube: L or Lx,Ly,Lz [default: 3].
    #[arg(long, value_delimiter = ',')]
    pub size: Option<Vec<usize>>,
    /// Toric code boundary [default: torus].
    #[arg(long, value_enum)]
    pub boundary: Option<BoundaryArg>,
    /// Check sector to export [default: X].
    #[arg(long, value_enum)]
    pub sector: Option<SectorArg>,
    /// Export the dual hypergraph.
    #[arg(long)]
    pub dual: bool,
    /// Also write the dual's spin model as a coupling file.
    #[arg(long, value_name = "FILE")]
    pub couplings: Option<PathBuf>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply(command: &mut Command, args: &CliCommand) {
    match (command, args) {
        (Command::Verify(p), CliCommand::Verify(a)) => {
            set(&mut p.n_instances, a.n_instances);
            set(&mut p.max_size, a.max_size);
            set(&mut p.n_eta, a.n_eta);
            set(&mut p.n_eta_fidelity, a.n_eta_fidelity);
            if a.inject_fault.is_some() {
                p.inject_fault = a.inject_fault;
            }
        }
        (Command::ScanRbim(p), CliCommand::ScanRbim(a)) => {
            set(&mut p.axis, a.axis);
            set(&mut p.linear_size, a.linear_size);
            set(&mut p.boundary, a.boundary.map(Into::into));
            set(&mut p.ps, a.ps.clone().map(|g| g.0));
            set(&mut p.xs, a.xs.clone().map(|g| g.0));
            set(&mut p.sizes, a.sizes.clone());
            set(&mut p.observable, a.observable);
            set(&mut p.n_disorder, a.mc.n_disorder);
            set(&mut p.n_equilibration_sweeps, a.mc.n_equilibration_sweeps);
            set(&mut p.n_measure_sweeps, a.mc.n_measure_sweeps);
            set(&mut p.measure_interval, a.mc.measure_interval);
            p.fill_defaults();
        }
        (Command::ScanCoherence(p), CliCommand::ScanCoherence(a)) => {
            set(&mut p.linear_size, a.linear_size);
            if a.site.is_some() {
                p.site = a.site;
            }
            set(&mut p.ps, a.ps.clone().map(|g| g.0));
            set(&mut p.qs, a.qs.clone().map(|g| g.0));
            set(&mut p.n_eta, a.n_eta);
            set(
                &mut p.engine,
                a.engine.map(|e| match e {
                    EngineArg::Auto => Engine::Auto,
                    EngineArg::Exact => Engine::Exact,
                    EngineArg::MonteCarlo => Engine::MonteCarlo,
                }),
            );
            set(&mut p.n_equilibration_sweeps, a.n_equilibration_sweeps);
            set(&mut p.n_measure_sweeps, a.n_measure_sweeps);
            set(&mut p.measure_interval, a.measure_interval);
        }
        (Command::Threshold(p), CliCommand::Threshold(a)) => {
            set(&mut p.sizes, a.sizes.clone());
            set(&mut p.ps, a.ps.clone().map(|g| g.0));
            set(&mut p.n_eta, a.n_eta);
            set(
                &mut p.method,
                a.method.map(|m| match m {
                    MethodArg::Enumeration => HomologyMethod::Enumeration,
                    MethodArg::TransferMatrix => HomologyMethod::TransferMatrix,
                }),
            );
        }
        (Command::Dualize(p), CliCommand::Dualize(a)) => {
            set(&mut p.input, a.input.clone());
            if a.couplings.is_some() {
                p.couplings = a.couplings.clone();
            }
        }
        (Command::BuildCode(p), CliCommand::BuildCode(a)) => {
            set(&mut p.code, a.code);
            set(&mut p.size, a.size.clone());
            set(&mut p.boundary, a.boundary.map(Into::into));
            set(
                &mut p.sector,
                a.sector.map(|s| match s {
                    SectorArg::X => Sector::X,
                    SectorArg::Z => Sector::Z,
                }),
            );
            p.dual |= a.dual;
            if a.couplings.is_some() {
                p.couplings = a.couplings.clone();
            }
        }
        _ => unreachable!("subcommand checked by the caller"),
    }
}

fn default_command(args: &CliCommand) -> Result<Command, CliError> {
    Ok(match args {
        CliCommand::Verify(_) => Command::Verify(VerifyParams::default()),
        CliCommand::ScanRbim(_) => Command::ScanRbim(ScanRbimParams::default()),
        CliCommand::ScanCoherence(_) => Command::ScanCoherence(ScanCoherenceParams::default()),
        CliCommand::Threshold(_) => Command::Threshold(ThresholdParams::default()),
        CliCommand::Dualize(a) => Command::Dualize(DualizeParams {
            input: a
                .input
                .clone()
                .ok_or_else(|| CliError::Usage("dualize needs --input (or a --config naming one)".into()))?,
            couplings: None,
        }),
        CliCommand::BuildCode(_) => Command::BuildCode(BuildCodeParams::default()),
    })
}

/// The run config for a parsed command line. `config_text` is the content
/// of the `--config` file and `env_seed` the value of `NF_SEED`.
pub fn resolve(cli: &Cli, config_text: Option<&str>, env_seed: Option<&str>) -> Result<RunConfig, CliError> {
    let mut cfg = match config_text {
        Some(text) => {
            let cfg: RunConfig =
                serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid config file: {e}")))?;
            if cfg.command.name() != cli.command.name() {
                return Err(CliError::Usage(format!(
                    "config file is for `{}`, not `{}`",
                    cfg.command.name(),
                    cli.command.name()
                )));
            }
            cfg
        }
        None => RunConfig::new(default_command(&cli.command)?),
    };
    apply(&mut cfg.command, &cli.command);
    if let Some(s) = env_seed {
        cfg.seed = s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={s:?} is not an unsigned 64-bit integer")))?;
    }
    set(&mut cfg.seed, cli.seed);
    if cli.output.is_some() {
        cfg.output = cli.output.clone();
    }
    set(&mut cfg.format, cli.format);
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("toric-rbim").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn grids_parse() {
        assert_eq!(parse_grid("0.1,0.2").unwrap(), Grid(vec![0.1, 0.2]));
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap(), Grid(vec![0.1, 0.2, 0.3]));
        assert!(parse_grid("0.1:0.3").is_err());
        assert!(parse_grid("0.3:0.1:0.1").is_err());
        assert!(parse_grid("a,b").is_err());
        assert_eq!(parse_observable("site:4").unwrap(), Observable::Site(4));
        assert!(parse_observable("edge").is_err());
    }

    #[test]
    fn defaults_then_flags() {
        let cfg = resolve(&cli(&["threshold", "--sizes", "2,3", "--ps", "0.1,0.2"]), None, None).unwrap();
        let Command::Threshold(p) = &cfg.command else { panic!() };
        assert_eq!(p.sizes, vec![2, 3]);
        assert_eq!(p.ps, vec![0.1, 0.2]);
        assert_eq!(p.n_eta, 1000);
        assert_eq!(cfg.seed, crate::config::DEFAULT_SEED);
    }

    #[test]
    fn config_is_baseline_and_flags_override() {
        let mut base = RunConfig::new(Command::Threshold(ThresholdParams {
            n_eta: 7,
            ..ThresholdParams::default()
        }));
        base.seed = 99;
        base.format = OutputFormat::Json;
        let text = base.to_json();
        let cfg = resolve(&cli(&["threshold", "--sizes", "2,3"]), Some(&text), None).unwrap();
        let Command::Threshold(p) = &cfg.command else { panic!() };
        assert_eq!((p.n_eta, p.sizes.clone()), (7, vec![2, 3]));
        assert_eq!((cfg.seed, cfg.format), (99, OutputFormat::Json));
        let unchanged = resolve(&cli(&["threshold"]), Some(&text), None).unwrap();
        assert_eq!(unchanged, base);
    }

    #[test]
    fn seed_precedence() {
        let mut base = RunConfig::new(Command::Verify(VerifyParams::default()));
        base.seed = 5;
        let text = base.to_json();
        assert_eq!(resolve(&cli(&["verify"]), Some(&text), None).unwrap().seed, 5);
        assert_eq!(resolve(&cli(&["verify"]), Some(&text), Some("6")).unwrap().seed, 6);
        assert_eq!(resolve(&cli(&["verify", "--seed", "7"]), Some(&text), Some("6")).unwrap().seed, 7);
        assert!(matches!(resolve(&cli(&["verify"]), None, Some("x")), Err(CliError::Usage(_))));
    }

    #[test]
    fn config_for_another_subcommand_is_rejected() {
        let text = RunConfig::new(Command::Verify(VerifyParams::default())).to_json();
        assert!(matches!(resolve(&cli(&["threshold"]), Some(&text), None), Err(CliError::Usage(_))));
        assert!(matches!(resolve(&cli(&["verify"]), Some("{"), None), Err(CliError::Usage(_))));
    }

    #[test]
    fn scan_axis_defaults() {
        let cfg = resolve(&cli(&["scan-rbim", "--axis", "nishimori"]), None, None).unwrap();
        let Command::ScanRbim(p) = &cfg.command else { panic!() };
        assert_eq!(p.ps.len(), 9);
        assert!(p.xs.is_empty());
        let cfg = resolve(&cli(&["scan-rbim", "--axis", "q", "--ps", "0,0.05"]), None, None).unwrap();
        let Command::ScanRbim(p) = &cfg.command else { panic!() };
        assert_eq!(p.ps, vec![0.0, 0.05]);
        assert_eq!(p.xs.len(), 8);
    }

    #[test]
    fn dualize_needs_an_input() {
        assert!(matches!(resolve(&cli(&["dualize"]), None, None), Err(CliError::Usage(_))));
        let cfg = resolve(&cli(&["dualize", "-i", "a.txt"]), None, None).unwrap();
        assert_eq!(cfg.command, Command::Dualize(DualizeParams { input: "a.txt".into(), couplings: None }));
    }
}
