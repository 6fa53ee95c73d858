//! Executes a resolved [`RunConfig`] and writes its outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use toric_rbim::duality::{
    build_color_2d, build_toric, build_xcube, code_to_hypergraph, dual_hypergraph, spin_model_from_hypergraph,
    CssCode, Sector,
};
use toric_rbim::mc::{
    binder_curve, find_crossing, grid_scan, nishimori_line_scan, BinderCurve, CurveAxis, GridAxis, McParams,
    Observable,
};
use toric_rbim::noisy::{coherence_grid, success_crossing, threshold_experiment_with, write_threshold_csv};
use toric_rbim::rng::derive_seed;
use toric_rbim::{Boundary, Error, Hypergraph, Lattice2D};

use crate::config::{
    BuildCodeParams, CodeKind, Command, DualizeParams, OutputFormat, RbimAxis, RunConfig, ScanCoherenceParams,
    ScanRbimParams, ThresholdParams, VerifyParams,
};
use crate::verify;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot read {path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::NotBracketed(_) | Error::Io(_)) | CliError::Output { .. } => 1,
            _ => 2,
        }
    }
}

/// What a finished run reports besides its files.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match &cfg.command {
        Command::Verify(p) => run_verify(cfg, p),
        Command::ScanRbim(p) => run_scan_rbim(cfg, p),
        Command::ScanCoherence(p) => run_scan_coherence(cfg, p),
        Command::Threshold(p) => run_threshold(cfg, p),
        Command::Dualize(p) => run_dualize(cfg, p),
        Command::BuildCode(p) => run_build_code(cfg, p),
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".config.json");
    path.with_file_name(name)
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|e| CliError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// A plain-text output with its config sidecar.
fn write_with_sidecar(cfg: &RunConfig, path: &Path, content: &str) -> Result<(), CliError> {
    write_file(path, content)?;
    write_file(&sidecar_path(path), &(cfg.to_json() + "\n"))
}

/// Writes `text` (csv format) or `{"config", "result"}` (json format) to the
/// output file, or to standard output.
fn emit<T: Serialize>(cfg: &RunConfig, text: &str, result: &T) -> Result<(), CliError> {
    let body = match cfg.format {
        OutputFormat::Csv => text.to_string(),
        OutputFormat::Json => {
            let doc = json!({ "config": cfg, "result": result });
            serde_json::to_string_pretty(&doc).expect("result serializes") + "\n"
        }
    };
    match (&cfg.output, cfg.format) {
        (Some(path), OutputFormat::Csv) => write_with_sidecar(cfg, path, &body),
        (Some(path), OutputFormat::Json) => write_file(path, &body),
        (None, _) => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run_verify(cfg: &RunConfig, p: &VerifyParams) -> Result<Outcome, CliError> {
    let report = verify::run_battery(p, cfg.seed)?;
    emit(cfg, &report.to_csv(), &report)?;
    Ok(Outcome {
        passed: report.passed,
        summary: report.human(),
    })
}

fn mc_params(p: &ScanRbimParams, linear_size: usize, seed: u64) -> Result<McParams, CliError> {
    let mc = McParams {
        linear_size,
        boundary: p.boundary,
        beta_j: 0.0,
        disorder_p: 0.0,
        n_disorder: p.n_disorder,
        n_equilibration_sweeps: p.n_equilibration_sweeps,
        n_measure_sweeps: p.n_measure_sweeps,
        measure_interval: p.measure_interval,
        seed,
        observable: p.observable,
    };
    mc.validate()?;
    Ok(mc)
}

fn nonempty(what: &str, values: &[f64]) -> Result<(), CliError> {
    if values.is_empty() {
        Err(CliError::Usage(format!("the {what} grid is empty")))
    } else {
        Ok(())
    }
}

fn run_scan_rbim(cfg: &RunConfig, p: &ScanRbimParams) -> Result<Outcome, CliError> {
    let mut p = p.clone();
    p.fill_defaults();
    nonempty("p", &p.ps)?;
    match p.sizes.len() {
        0 => {}
        1 => return Err(CliError::Usage("a Binder crossing needs at least two --sizes".into())),
        _ => return run_binder(cfg, &p),
    }
    if p.axis != RbimAxis::Nishimori {
        nonempty("x", &p.xs)?;
    }
    let mc = mc_params(&p, p.linear_size, cfg.seed)?;
    let lattice = Lattice2D::new(p.linear_size, p.linear_size, p.boundary)?;
    let scan = match p.axis {
        RbimAxis::T => grid_scan(&lattice, &p.ps, &p.xs, GridAxis::T, &mc),
        RbimAxis::Q => grid_scan(&lattice, &p.ps, &p.xs, GridAxis::Q, &mc),
        RbimAxis::Nishimori => nishimori_line_scan(&lattice, &p.ps, &mc),
    };
    emit(cfg, &scan.to_csv_string(), &scan)?;
    let failed = scan.n_failed();
    Ok(Outcome {
        passed: failed < scan.cells.len(),
        summary: format!("{} cells, {failed} failed\n", scan.cells.len()),
    })
}

const BINDER_HEADER: &str = "L,p,q_or_T,binder,binder_stderr,mean,stderr,n_disorder,sweeps,seed\n";

fn run_binder(cfg: &RunConfig, params: &ScanRbimParams) -> Result<Outcome, CliError> {
    let single_p = || {
        if params.ps.len() == 1 {
            Ok(params.ps[0])
        } else {
            Err(CliError::Usage("a Binder crossing along T or q takes exactly one p".into()))
        }
    };
    let (axis, xs): (CurveAxis, Vec<f64>) = match params.axis {
        RbimAxis::T => {
            nonempty("T", &params.xs)?;
            if let Some(&t) = params.xs.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
                return Err(Error::Domain {
                    name: "T",
                    value: t,
                    domain: "(0, inf)",
                }
                .into());
            }
            (CurveAxis::BetaJ { p: single_p()? }, params.xs.iter().map(|t| 1.0 / t).collect())
        }
        RbimAxis::Q => {
            nonempty("q", &params.xs)?;
            (CurveAxis::Q { p: single_p()? }, params.xs.clone())
        }
        RbimAxis::Nishimori => (CurveAxis::Nishimori, params.ps.clone()),
    };
    let torus = ScanRbimParams {
        boundary: Boundary::Torus,
        ..params.clone()
    };
    let mc = mc_params(&torus, params.sizes[0], cfg.seed)?;
    let curves = params
        .sizes
        .iter()
        .map(|&l| binder_curve(l, axis, &xs, &mc))
        .collect::<Result<Vec<BinderCurve>, Error>>()?;
    let crossing = find_crossing(&curves);

    // rows report the grid as given: T on the T axis, q otherwise
    let mut csv = String::from(BINDER_HEADER);
    for c in &curves {
        for (j, pt) in c.points.iter().enumerate() {
            let (p, x) = match axis {
                CurveAxis::BetaJ { p } => (p, params.xs[j]),
                CurveAxis::Q { p } => (p, pt.x),
                CurveAxis::Nishimori => (pt.x, pt.x),
            };
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                c.linear_size,
                p,
                x,
                pt.binder,
                pt.binder_error,
                pt.order.mean,
                pt.order.std_error,
                c.n_disorder,
                c.sweeps,
                pt.seed
            ));
        }
    }
    let summary = match (&crossing, axis) {
        (Ok(c), CurveAxis::BetaJ { .. }) => format!(
            "Binder crossing at beta_J = {:.5} +- {:.5} (T = {:.5} +- {:.5})\n",
            c.x,
            c.std_error,
            1.0 / c.x,
            c.std_error / (c.x * c.x)
        ),
        (Ok(c), CurveAxis::Q { .. }) => format!("Binder crossing at q = {:.5} +- {:.5}\n", c.x, c.std_error),
        (Ok(c), CurveAxis::Nishimori) => format!("Binder crossing at p = q = {:.5} +- {:.5}\n", c.x, c.std_error),
        (Err(e), _) => format!("{e}\n"),
    };
    let result = json!({
        "curves": curves,
        "crossing": crossing.as_ref().ok(),
        "failure": crossing.as_ref().err().map(|e| e.to_string()),
    });
    emit(cfg, &csv, &result)?;
    Ok(Outcome {
        passed: crossing.is_ok(),
        summary,
    })
}

fn run_scan_coherence(cfg: &RunConfig, p: &ScanCoherenceParams) -> Result<Outcome, CliError> {
    nonempty("p", &p.ps)?;
    nonempty("q", &p.qs)?;
    let lattice = Lattice2D::new(p.linear_size, p.linear_size, Boundary::Open)?;
    let site = p.site.unwrap_or(lattice.center());
    let mc = McParams {
        linear_size: p.linear_size,
        boundary: Boundary::Open,
        beta_j: 0.0,
        disorder_p: 0.0,
        n_disorder: p.n_eta,
        n_equilibration_sweeps: p.n_equilibration_sweeps,
        n_measure_sweeps: p.n_measure_sweeps,
        measure_interval: p.measure_interval,
        seed: cfg.seed,
        observable: Observable::Site(site),
    };
    mc.validate()?;
    let scan = coherence_grid(&lattice, site, &p.ps, &p.qs, p.n_eta, &mc, p.engine, cfg.seed);
    emit(cfg, &scan.to_csv_string(), &scan)?;
    let failed = scan.n_failed();
    let mut summary = format!("{} cells, {failed} failed\n", scan.cells.len());
    if failed == scan.cells.len() {
        if let Some(msg) = scan.cells.iter().find_map(|c| c.failure.as_ref()) {
            summary.push_str(&format!("first failure: {msg}\n"));
        }
    }
    Ok(Outcome {
        passed: failed < scan.cells.len(),
        summary,
    })
}

fn run_threshold(cfg: &RunConfig, p: &ThresholdParams) -> Result<Outcome, CliError> {
    nonempty("p", &p.ps)?;
    if p.sizes.is_empty() {
        return Err(CliError::Usage("threshold needs at least one size".into()));
    }
    // independent pattern streams per size
    let curves = p
        .sizes
        .iter()
        .map(|&l| threshold_experiment_with(l, &p.ps, p.n_eta, derive_seed(cfg.seed, l as u64, 0), p.method))
        .collect::<Result<Vec<_>, Error>>()?;
    let points: Vec<_> = curves.iter().flatten().copied().collect();
    let mut crossings = Vec::new();
    let mut summary = String::new();
    for w in curves.windows(2) {
        let (small, large) = (w[0][0].linear_size, w[1][0].linear_size);
        match success_crossing(&w[0], &w[1]) {
            Ok(c) => {
                summary.push_str(&format!("L={small}/{large} success curves cross at p = {:.5} +- {:.5}\n", c.p, c.std_error));
                crossings.push(json!({"small": small, "large": large, "p": c.p, "std_error": c.std_error}));
            }
            Err(e) => {
                summary.push_str(&format!("L={small}/{large}: {e}\n"));
                crossings.push(json!({"small": small, "large": large, "failure": e.to_string()}));
            }
        }
    }
    let mut csv = Vec::new();
    write_threshold_csv(&points, &mut csv)?;
    let csv = String::from_utf8(csv).expect("csv is utf-8");
    emit(cfg, &csv, &json!({ "points": points, "crossings": crossings }))?;
    summary.push_str(&format!("{} points\n", points.len()));
    Ok(Outcome { passed: true, summary })
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn describe(h: &Hypergraph) -> Value {
    json!({
        "n_vertices": h.n_vertices(),
        "n_edges": h.n_edges(),
        "edge_size_histogram": h.edge_size_histogram(),
    })
}

fn write_couplings(cfg: &RunConfig, path: &Option<PathBuf>, dual: &Hypergraph) -> Result<(), CliError> {
    if let Some(path) = path {
        write_with_sidecar(cfg, path, &spin_model_from_hypergraph(dual).to_coupling_text())?;
    }
    Ok(())
}

fn run_dualize(cfg: &RunConfig, p: &DualizeParams) -> Result<Outcome, CliError> {
    let text = read_input(&p.input)?;
    let h = Hypergraph::from_text(&text).map_err(|e| match e {
        Error::Parse { line, message } => CliError::Input {
            path: p.input.clone(),
            message: format!("parse error at line {line}: {message}"),
        },
        other => other.into(),
    })?;
    let dual = dual_hypergraph(&h)?;
    write_couplings(cfg, &p.couplings, &dual)?;
    emit(cfg, &dual.to_text(), &json!({ "input": describe(&h), "dual": dual }))?;
    Ok(Outcome {
        passed: true,
        summary: format!(
            "input: {} vertices, {} edges; dual: {} vertices, {} edges, sizes {:?}\n",
            h.n_vertices(),
            h.n_edges(),
            dual.n_vertices(),
            dual.n_edges(),
            dual.edge_size_histogram()
        ),
    })
}

fn build_code(p: &BuildCodeParams) -> Result<CssCode, CliError> {
    let bad = |what: &str| CliError::Usage(format!("{what} takes {}", match p.code {
        CodeKind::Toric => "--size L or W,H",
        CodeKind::Color => "--size EXTENT",
        CodeKind::Xcube => "--size L or LX,LY,LZ",
    }));
    let code = match (p.code, p.size.as_slice()) {
        (CodeKind::Toric, &[l]) => build_toric(&Lattice2D::new(l, l, p.boundary)?)?,
        (CodeKind::Toric, &[w, h]) => build_toric(&Lattice2D::new(w, h, p.boundary)?)?,
        (CodeKind::Color, &[e]) => build_color_2d(e)?,
        (CodeKind::Xcube, &[l]) => build_xcube(l, l, l)?,
        (CodeKind::Xcube, &[x, y, z]) => build_xcube(x, y, z)?,
        (CodeKind::Toric, _) => return Err(bad("the toric code")),
        (CodeKind::Color, _) => return Err(bad("the color code")),
        (CodeKind::Xcube, _) => return Err(bad("the X-cube model")),
    };
    Ok(code)
}

fn run_build_code(cfg: &RunConfig, p: &BuildCodeParams) -> Result<Outcome, CliError> {
    let code = build_code(p)?;
    let sector = code_to_hypergraph(&code, p.sector)?;
    let dual = dual_hypergraph(&sector)?;
    write_couplings(cfg, &p.couplings, &dual)?;
    let out = if p.dual { &dual } else { &sector };
    let (rx, rz, k) = (code.rank(Sector::X), code.rank(Sector::Z), code.logical_qubits());
    let result = json!({
        "name": code.name,
        "n_qubits": code.n_qubits,
        "n_x_checks": code.x_checks.len(),
        "n_z_checks": code.z_checks.len(),
        "rank_x": rx,
        "rank_z": rz,
        "logical_qubits": k,
        "sector": p.sector,
        "dual": p.dual,
        "hypergraph": out,
    });
    emit(cfg, &out.to_text(), &result)?;
    Ok(Outcome {
        passed: true,
        summary: format!(
            "{}: {} qubits, rank X {rx}, rank Z {rz}, {k} logical qubits; wrote {} hypergraph with {} vertices, {} edges, sizes {:?}\n",
            code.name,
            code.n_qubits,
            if p.dual { "dual" } else { "sector" },
            out.n_vertices(),
            out.n_edges(),
            out.edge_size_histogram()
        ),
    })
}
