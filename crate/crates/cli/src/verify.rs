//! The exact verification battery behind `toric-rbim verify`.
//!
//! Every check pits two independent evaluations against each other on
//! small instances. Instance `i` of a check is regenerated from
//! `derive_seed(seed, tag, i)`; that seed is reported with each failure.

use serde::{Deserialize, Serialize};
use toric_rbim::duality::{build_color_2d, build_toric, build_xcube, code_to_hypergraph, dual_hypergraph, Sector};
use toric_rbim::exact::{
    fidelity_vs_partition_proportionality, loop_parity_weights, magnetization_direct, magnetization_quantum,
    partition_function_direct, partition_function_quantum, MAX_ENUMERATION_BITS,
};
use toric_rbim::lattice::Direction;
use toric_rbim::rng::{derive_seed, disorder_pattern};
use toric_rbim::{shortest_boundary_path, Boundary, CouplingAssignment, Error, Lattice2D, Result};

use crate::config::{Fault, VerifyParams};

pub const Z_TOLERANCE: f64 = 1e-10;
pub const M_TOLERANCE: f64 = 1e-10;
pub const PATH_TOLERANCE: f64 = 1e-12;
pub const COHERENCE_TOLERANCE: f64 = 1e-10;
pub const SPREAD_TOLERANCE: f64 = 1e-8;

pub const COHERENCE_PS: [f64; 3] = [0.05, 0.1, 0.2];
pub const COHERENCE_QS: [f64; 3] = [0.1, 0.2, 0.3];
pub const FIDELITY_SIZES: [usize; 2] = [2, 3];
pub const FIDELITY_QS: [f64; 2] = [0.05, 0.15];

const TAG_INSTANCE: u64 = 0x1001;
const TAG_COHERENCE: u64 = 0x1002;
const TAG_FIDELITY: u64 = 0x1003;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFailure {
    pub instance: usize,
    pub seed: u64,
    pub detail: String,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub instances: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub failures: Vec<InstanceFailure>,
}

impl CheckReport {
    fn new(name: &str, tolerance: f64) -> Self {
        CheckReport {
            name: name.to_string(),
            passed: true,
            instances: 0,
            max_error: 0.0,
            tolerance,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, seed: u64, error: f64, detail: impl FnOnce() -> String) {
        let instance = self.instances;
        self.instances += 1;
        if error.is_nan() {
            self.max_error = f64::NAN;
        } else if !self.max_error.is_nan() {
            self.max_error = self.max_error.max(error);
        }
        if !(error <= self.tolerance) {
            self.passed = false;
            self.failures.push(InstanceFailure {
                instance,
                seed,
                detail: detail(),
                error,
            });
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} {:<28} instances={:<4} max_error={:.3e} tolerance={:.0e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            self.max_error,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,passed,instances,max_error,tolerance,failures\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.name,
                c.passed,
                c.instances,
                c.max_error,
                c.tolerance,
                c.failures.len()
            ));
        }
        out
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&c.summary_line());
            out.push('\n');
            for f in c.failures.iter().take(5) {
                out.push_str(&format!(
                    "    instance {} (seed {}): error {:.3e}: {}\n",
                    f.instance, f.seed, f.error, f.detail
                ));
            }
        }
        out.push_str(if self.passed { "all checks passed\n" } else { "verification FAILED\n" });
        out
    }
}

/// Refuses batteries whose open lattices exceed the enumeration bound.
pub fn check_bounds(params: &VerifyParams) -> Result<()> {
    if params.max_size < 2 {
        return Err(Error::InvalidDimension {
            what: "max_size",
            min: 2,
            got: params.max_size,
        });
    }
    let bits = params.max_size * params.max_size;
    if bits > MAX_ENUMERATION_BITS {
        return Err(Error::InstanceTooLarge {
            required: bits,
            limit: MAX_ENUMERATION_BITS,
        });
    }
    for (what, got) in [
        ("n_instances", params.n_instances),
        ("n_eta", params.n_eta),
        ("n_eta_fidelity", params.n_eta_fidelity),
    ] {
        if got == 0 {
            return Err(Error::InvalidDimension { what, min: 1, got });
        }
    }
    Ok(())
}

pub fn run_battery(params: &VerifyParams, seed: u64) -> Result<VerifyReport> {
    check_bounds(params)?;
    let [z, m, paths] = partition_and_magnetization(params.n_instances, params.max_size, seed, params.inject_fault)?;
    let mut checks = vec![
        z,
        m,
        paths,
        coherence_identity(params.max_size, &COHERENCE_PS, &COHERENCE_QS, params.n_eta, seed)?,
        fidelity_proportionality(&FIDELITY_SIZES, &FIDELITY_QS, params.n_eta_fidelity, seed)?,
    ];
    checks.extend(code_anchors()?);
    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn unit_interval(seed: u64, tag: u64) -> f64 {
    (derive_seed(seed, tag, 0) >> 11) as f64 / (1u64 << 53) as f64
}

/// One random open-lattice instance: shape, `βJ ∈ [0.1, 2]`, ±J signs and a
/// probed site.
pub struct Instance {
    pub lattice: Lattice2D,
    pub beta_j: f64,
    pub signs: toric_rbim::BitVector,
    pub site: usize,
}

pub fn random_instance(index: usize, max_size: usize, seed: u64) -> Result<Instance> {
    let shapes: Vec<(usize, usize)> = (2..=max_size).flat_map(|w| (2..=max_size).map(move |h| (w, h))).collect();
    // largest shapes first so that short batteries still reach them
    let (w, h) = shapes[shapes.len() - 1 - index % shapes.len()];
    let lattice = Lattice2D::new(w, h, Boundary::Open)?;
    let beta_j = 0.1 + 1.9 * unit_interval(seed, 1);
    let signs = disorder_pattern(&lattice, 0.5, seed, 0);
    let site = (derive_seed(seed, 2, 0) % lattice.n_free_spins() as u64) as usize;
    Ok(Instance {
        lattice,
        beta_j,
        signs,
        site,
    })
}

/// Partition function (spin sum vs stabilizer sum), magnetization (spin sum
/// vs loop-parity sum) and the path independence of the loop-parity route.
pub fn partition_and_magnetization(
    n_instances: usize,
    max_size: usize,
    seed: u64,
    fault: Option<Fault>,
) -> Result<[CheckReport; 3]> {
    let mut z = CheckReport::new("partition_function", Z_TOLERANCE);
    let mut m = CheckReport::new("magnetization", M_TOLERANCE);
    let mut paths = CheckReport::new("path_independence", PATH_TOLERANCE);
    for i in 0..n_instances {
        let s = derive_seed(seed, TAG_INSTANCE, i as u64);
        let inst = random_instance(i, max_size, s)?;
        let lat = &inst.lattice;
        let c = CouplingAssignment::new(lat, inst.signs.clone(), 1.0, inst.beta_j)?;
        let direct = partition_function_direct(&c)?;
        let quantum = match fault {
            Some(Fault::BondSign) => {
                let mut bad = inst.signs.clone();
                bad.set(0, !bad.get(0));
                partition_function_quantum(&c.with_signs(bad)?)?
            }
            None => partition_function_quantum(&c)?,
        };
        let dz = quantum.relative_difference(&direct);
        z.record(s, dz, || {
            format!("{}x{} beta_J={:.4}: ln Z {} vs {}", lat.width(), lat.height(), inst.beta_j, quantum.ln, direct.ln)
        });

        let md = magnetization_direct(&c, inst.site)?;
        let mq = magnetization_quantum(&c, &shortest_boundary_path(lat, inst.site)?)?;
        m.record(s, (md - mq).abs(), || format!("site {}: {mq} vs {md}", inst.site));

        let mut values = Vec::with_capacity(4);
        for dir in [Direction::Up, Direction::Down, Direction::Left, Direction::Right] {
            values.push(magnetization_quantum(&c, &lat.straight_boundary_path(inst.site, dir)?)?);
        }
        let spread = values.iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max);
        paths.record(s, spread, || format!("site {}: straight paths give {values:?}", inst.site));
    }
    Ok([z, m, paths])
}

/// Coherence from loop parities vs the dual Ising magnetization at the
/// center of an `L × L` open lattice, with `βJ` tied to `q`.
pub fn coherence_identity(size: usize, ps: &[f64], qs: &[f64], n_eta: usize, seed: u64) -> Result<CheckReport> {
    let lat = Lattice2D::new(size, size, Boundary::Open)?;
    let center = lat.center();
    let path = shortest_boundary_path(&lat, center)?;
    let mut report = CheckReport::new("coherence_identity", COHERENCE_TOLERANCE);
    for (k, (&p, &q)) in ps.iter().flat_map(|p| qs.iter().map(move |q| (p, q))).enumerate() {
        let cell_seed = derive_seed(seed, TAG_COHERENCE, k as u64);
        for i in 0..n_eta as u64 {
            let eta = disorder_pattern(&lat, p, cell_seed, i);
            let o = loop_parity_weights(&lat, &eta, q, &path)?.order;
            let mag = magnetization_direct(&CouplingAssignment::from_q(&lat, eta, q)?, center)?;
            report.record(cell_seed, (o - mag).abs(), || format!("p={p} q={q} pattern {i}: {o} vs {mag}"));
        }
    }
    Ok(report)
}

/// Spread of `F*[η] / Z[J(η)]` over patterns on tori, along `p = q`. One
/// instance per `(L, q)` cell.
pub fn fidelity_proportionality(sizes: &[usize], qs: &[f64], n_eta: usize, seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::new("fidelity_proportionality", SPREAD_TOLERANCE);
    for (k, (&l, &q)) in sizes.iter().flat_map(|l| qs.iter().map(move |q| (l, q))).enumerate() {
        let lat = Lattice2D::new(l, l, Boundary::Torus)?;
        let cell_seed = derive_seed(seed, TAG_FIDELITY, k as u64);
        let etas: Vec<_> = (0..n_eta as u64).map(|i| disorder_pattern(&lat, q, cell_seed, i)).collect();
        let r = fidelity_vs_partition_proportionality(&lat, &etas, q)?;
        report.record(cell_seed, r.max_relative_spread, || format!("L={l} q={q}: ln ratios {:?}", r.ln_ratios));
    }
    Ok(report)
}

/// Structural checks of the code builders: toric ground-space degeneracy,
/// CSS commutation of the color and X-cube codes, and 4-body X-cube duals.
pub fn code_anchors() -> Result<Vec<CheckReport>> {
    let mut degeneracy = CheckReport::new("toric_degeneracy", 0.0);
    for l in [2, 3, 4] {
        let code = build_toric(&Lattice2D::new(l, l, Boundary::Torus)?)?;
        let d = code.degeneracy().map_or(f64::INFINITY, |d| d as f64);
        degeneracy.record(l as u64, (d - 4.0).abs(), || format!("L={l}: degeneracy {d}"));
    }
    let mut color = CheckReport::new("color_code_css", 0.0);
    for extent in [2, 3] {
        let code = build_color_2d(extent)?;
        let bad = code.first_anticommuting_pair();
        color.record(extent as u64, if bad.is_some() { 1.0 } else { 0.0 }, || format!("extent {extent}: {bad:?}"));
    }
    let mut xcube = CheckReport::new("xcube_css_dual_4body", 0.0);
    for l in [2, 3] {
        let code = build_xcube(l, l, l)?;
        let bad = code.first_anticommuting_pair();
        let dual = dual_hypergraph(&code_to_hypergraph(&code, Sector::X)?)?;
        let off = dual.edges().iter().filter(|e| e.len() != 4).count();
        xcube.record(l as u64, (off + usize::from(bad.is_some())) as f64, || {
            format!("L={l}: anticommuting {bad:?}, {off} dual edges not of size 4")
        });
    }
    Ok(vec![degeneracy, color, xcube])
}
