use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{disorder_averaged_m, McEstimate, McParams};
use crate::couplings::{beta_j_from_q, check_q};
use crate::error::{check_domain, Error, Result};
use crate::lattice::{Boundary, Lattice2D};
use crate::rng::derive_seed;

pub const CSV_HEADER: [&str; 7] = ["p", "q_or_T", "mean", "stderr", "n_disorder", "sweeps", "seed"];

/// Meaning of the second scan coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridAxis {
    /// Annealed flip probability, `βJ = ½ ln((1-q)/q)`.
    Q,
    /// Temperature in units of `J`, `βJ = 1/T`.
    T,
}

impl GridAxis {
    pub fn beta_j(self, x: f64) -> Result<f64> {
        match self {
            GridAxis::Q => {
                check_q(x)?;
                Ok(beta_j_from_q(x))
            }
            GridAxis::T => {
                check_domain("T", x, x > 0.0, "(0, inf)")?;
                Ok(1.0 / x)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub p: f64,
    pub x: f64,
    /// `None` marks a failed cell.
    pub estimate: Option<McEstimate>,
    pub n_disorder: usize,
    pub sweeps: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Order-parameter estimates over a set of `(p, x)` cells, p-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub axis: GridAxis,
    pub linear_size: usize,
    pub boundary: Boundary,
    pub cells: Vec<ScanCell>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    p: f64,
    q_or_t: f64,
    mean: f64,
    stderr: f64,
    n_disorder: usize,
    sweeps: usize,
    seed: u64,
}

impl ScanResult {
    pub fn n_failed(&self) -> usize {
        self.cells.iter().filter(|c| c.estimate.is_none()).count()
    }

    /// Distinct `p` and `x` values in first-seen order.
    pub fn axes(&self) -> (Vec<f64>, Vec<f64>) {
        let mut ps: Vec<f64> = Vec::new();
        let mut xs: Vec<f64> = Vec::new();
        for c in &self.cells {
            if !ps.contains(&c.p) {
                ps.push(c.p);
            }
            if !xs.contains(&c.x) {
                xs.push(c.x);
            }
        }
        (ps, xs)
    }

    /// Every `(p, x)` pair of the axes occurs exactly once.
    pub fn is_rectangular(&self) -> bool {
        let (ps, xs) = self.axes();
        ps.len() * xs.len() == self.cells.len()
            && ps.iter().enumerate().all(|(i, &p)| {
                xs.iter()
                    .enumerate()
                    .all(|(j, &x)| self.cells[i * xs.len() + j].p == p && self.cells[i * xs.len() + j].x == x)
            })
    }

    pub fn get(&self, p: f64, x: f64) -> Option<&ScanCell> {
        self.cells.iter().find(|c| c.p == p && c.x == x)
    }

    /// Fixed column order, `.` decimals, `\n` line ends; failed cells carry
    /// `NaN` in `mean` and `stderr`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(CSV_HEADER).map_err(io)?;
        for c in &self.cells {
            let (m, s) = c.estimate.map_or((f64::NAN, f64::NAN), |e| (e.mean, e.std_error));
            w.write_record([
                c.p.to_string(),
                c.x.to_string(),
                m.to_string(),
                s.to_string(),
                c.n_disorder.to_string(),
                c.sweeps.to_string(),
                c.seed.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Inverse of [`ScanResult::write_csv`]; the CSV does not carry the
    /// axis, size or boundary, so they are supplied by the caller.
    pub fn read_csv<R: Read>(input: R, axis: GridAxis, linear_size: usize, boundary: Boundary) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        for (i, want) in CSV_HEADER.iter().enumerate() {
            match header.get(i) {
                Some(h) if h == *want => {}
                other => {
                    return Err(Error::Parse {
                        line: 1,
                        message: format!("column {i} must be `{want}`, found {other:?}"),
                    })
                }
            }
        }
        if header.len() != CSV_HEADER.len() {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected {} columns, found {}", CSV_HEADER.len(), header.len()),
            });
        }
        let mut cells = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let row: CsvRow = rec.deserialize(None).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let estimate = (!row.mean.is_nan()).then_some(McEstimate {
                mean: row.mean,
                std_error: row.stderr,
                n_samples: row.n_disorder,
                autocorrelation_hint: f64::NAN,
            });
            cells.push(ScanCell {
                p: row.p,
                x: row.q_or_t,
                estimate,
                n_disorder: row.n_disorder,
                sweeps: row.sweeps,
                seed: row.seed,
                failure: None,
            });
        }
        Ok(ScanResult {
            axis,
            linear_size,
            boundary,
            cells,
        })
    }
}

pub(crate) fn run_cell(lattice: &Lattice2D, params: &McParams, p: f64, beta_j: Result<f64>, seed: u64, x: f64) -> ScanCell {
    let outcome = beta_j.and_then(|beta_j| {
        let cell = McParams {
            disorder_p: p,
            beta_j,
            seed,
            ..params.clone()
        };
        disorder_averaged_m(lattice, &cell)
    });
    let (estimate, failure) = match outcome {
        Ok(e) => (Some(e), None),
        Err(e) => {
            log::warn!("scan cell p={p} x={x} failed: {e}");
            (None, Some(e.to_string()))
        }
    };
    ScanCell {
        p,
        x,
        estimate,
        n_disorder: params.n_disorder,
        sweeps: params.total_sweeps(),
        seed,
        failure,
    }
}

/// Disorder-averaged order parameter on the full `ps × xs` grid. Cell `k`
/// (p-major) uses the master seed `derive_seed(params.seed, 0, k)`. Failing
/// cells are recorded and the scan continues.
pub fn grid_scan(lattice: &Lattice2D, ps: &[f64], xs: &[f64], axis: GridAxis, params: &McParams) -> ScanResult {
    let mut cells = Vec::with_capacity(ps.len() * xs.len());
    for &p in ps {
        for &x in xs {
            let seed = derive_seed(params.seed, 0, cells.len() as u64);
            cells.push(run_cell(lattice, params, p, axis.beta_j(x), seed, x));
        }
    }
    ScanResult {
        axis,
        linear_size: lattice.width(),
        boundary: lattice.boundary(),
        cells,
    }
}

/// [`grid_scan`] over `(p, q)`.
pub fn phase_diagram_scan(lattice: &Lattice2D, ps: &[f64], qs: &[f64], params: &McParams) -> ScanResult {
    grid_scan(lattice, ps, qs, GridAxis::Q, params)
}

/// Cells along `p = q` (axis `q`). Cell `k` uses `derive_seed(params.seed, 0, k)`.
pub fn nishimori_line_scan(lattice: &Lattice2D, ps: &[f64], params: &McParams) -> ScanResult {
    let cells = ps
        .iter()
        .enumerate()
        .map(|(k, &p)| run_cell(lattice, params, p, GridAxis::Q.beta_j(p), derive_seed(params.seed, 0, k as u64), p))
        .collect();
    ScanResult {
        axis: GridAxis::Q,
        linear_size: lattice.width(),
        boundary: lattice.boundary(),
        cells,
    }
}
