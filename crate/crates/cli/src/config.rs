//! Run configuration: everything that determines a run's output.
//!
//! A `RunConfig` serializes to JSON as
//! `{"subcommand": ..., "params": {...}, "seed": ..., "output": ..., "format": ...}`
//! and is written next to (or inside) every output file.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toric_rbim::duality::Sector;
use toric_rbim::mc::Observable;
use toric_rbim::noisy::{Engine, HomologyMethod};
use toric_rbim::Boundary;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", content = "params", rename_all = "kebab-case")]
pub enum Command {
    Verify(VerifyParams),
    ScanRbim(ScanRbimParams),
    ScanCoherence(ScanCoherenceParams),
    Threshold(ThresholdParams),
    Dualize(DualizeParams),
    BuildCode(BuildCodeParams),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::ScanRbim(_) => "scan-rbim",
            Command::ScanCoherence(_) => "scan-coherence",
            Command::Threshold(_) => "threshold",
            Command::Dualize(_) => "dualize",
            Command::BuildCode(_) => "build-code",
        }
    }
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            seed: DEFAULT_SEED,
            output: None,
            format: OutputFormat::Csv,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Deliberate corruption used to check that `verify` reports failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Flip one bond sign on the quantum side of the partition check.
    BondSign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    /// Random open-lattice instances for the partition and magnetization checks.
    pub n_instances: usize,
    /// Largest lattice side used by the open-lattice checks.
    pub max_size: usize,
    /// Patterns per `(p, q)` cell of the coherence check.
    pub n_eta: usize,
    /// Patterns per `(L, q)` cell of the fidelity check.
    pub n_eta_fidelity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject_fault: Option<Fault>,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            n_instances: 20,
            max_size: 3,
            n_eta: 50,
            n_eta_fidelity: 10,
            inject_fault: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RbimAxis {
    /// Temperature `T = 1/βJ`.
    #[value(name = "T", alias = "t")]
    #[serde(rename = "T")]
    T,
    /// Annealed flip probability `q`, `βJ = ½ ln((1-q)/q)`.
    Q,
    /// The line `p = q`.
    Nishimori,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRbimParams {
    pub axis: RbimAxis,
    /// Lattice side of a grid scan.
    pub linear_size: usize,
    pub boundary: Boundary,
    /// Disorder values; on the Nishimori axis these are the `p = q` points.
    pub ps: Vec<f64>,
    /// `T` or `q` values. Unused on the Nishimori axis.
    #[serde(default)]
    pub xs: Vec<f64>,
    /// Two or more sizes switch from a grid scan to a Binder crossing on tori.
    #[serde(default)]
    pub sizes: Vec<usize>,
    pub n_disorder: usize,
    pub n_equilibration_sweeps: usize,
    pub n_measure_sweeps: usize,
    pub measure_interval: usize,
    #[serde(default = "default_scan_observable")]
    pub observable: Observable,
}

fn default_scan_observable() -> Observable {
    Observable::SiteAverage
}

impl Default for ScanRbimParams {
    fn default() -> Self {
        ScanRbimParams {
            axis: RbimAxis::T,
            linear_size: 16,
            boundary: Boundary::Torus,
            ps: Vec::new(),
            xs: Vec::new(),
            sizes: Vec::new(),
            n_disorder: 16,
            n_equilibration_sweeps: 1000,
            n_measure_sweeps: 4000,
            measure_interval: 2,
            observable: Observable::SiteAverage,
        }
    }
}

impl ScanRbimParams {
    /// Fills empty grids with the axis defaults.
    pub fn fill_defaults(&mut self) {
        match self.axis {
            RbimAxis::Nishimori => {
                if self.ps.is_empty() {
                    self.ps = steps(0.06, 0.14, 0.01);
                }
                self.xs.clear();
            }
            RbimAxis::T => {
                if self.ps.is_empty() {
                    self.ps = vec![0.0];
                }
                if self.xs.is_empty() {
                    self.xs = steps(1.5, 3.5, 0.25);
                }
            }
            RbimAxis::Q => {
                if self.ps.is_empty() {
                    self.ps = vec![0.0];
                }
                if self.xs.is_empty() {
                    self.xs = steps(0.05, 0.4, 0.05);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCoherenceParams {
    /// Side of the open lattice.
    pub linear_size: usize,
    /// Probed free site; the central site when absent.
    #[serde(default)]
    pub site: Option<usize>,
    pub ps: Vec<f64>,
    pub qs: Vec<f64>,
    pub n_eta: usize,
    pub engine: Engine,
    pub n_equilibration_sweeps: usize,
    pub n_measure_sweeps: usize,
    pub measure_interval: usize,
}

impl Default for ScanCoherenceParams {
    fn default() -> Self {
        ScanCoherenceParams {
            linear_size: 3,
            site: None,
            ps: steps(0.0, 0.25, 0.05),
            qs: steps(0.05, 0.3, 0.05),
            n_eta: 50,
            engine: Engine::Auto,
            n_equilibration_sweeps: 1000,
            n_measure_sweeps: 4000,
            measure_interval: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub sizes: Vec<usize>,
    pub ps: Vec<f64>,
    pub n_eta: usize,
    pub method: HomologyMethod,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        ThresholdParams {
            sizes: vec![3, 4],
            ps: steps(0.05, 0.2, 0.01),
            n_eta: 1000,
            method: HomologyMethod::Enumeration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualizeParams {
    /// Hypergraph text file.
    pub input: PathBuf,
    /// Also write the spin model of the dual as a coupling file.
    #[serde(default)]
    pub couplings: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKind {
    Toric,
    Color,
    Xcube,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildCodeParams {
    pub code: CodeKind,
    /// Toric: `[L]` or `[W, H]`; color: `[extent]`; X-cube: `[L]` or `[Lx, Ly, Lz]`.
    pub size: Vec<usize>,
    /// Toric code only.
    pub boundary: Boundary,
    pub sector: Sector,
    /// Write the dual hypergraph instead of the sector itself.
    pub dual: bool,
    #[serde(default)]
    pub couplings: Option<PathBuf>,
}

impl Default for BuildCodeParams {
    fn default() -> Self {
        BuildCodeParams {
            code: CodeKind::Toric,
            size: vec![3],
            boundary: Boundary::Torus,
            sector: Sector::X,
            dual: false,
            couplings: None,
        }
    }
}

/// `start, start + step, ..., stop` with values rounded to 12 decimals so
/// that they print cleanly.
pub fn steps(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}
