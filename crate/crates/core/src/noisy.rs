//! The two-channel bit-flip experiment on the toric code.
//!
//! The first channel flips each qubit with probability `p`; its pattern `η`
//! is quenched (its syndrome is measured). The second flips with probability
//! `q` and is summed over. The coherence left between `|ψ₊⟩` and `|ψ₋⟩` is the
//! disorder-averaged magnetization of the random-bond Ising model with bonds
//! flipped on `η` at `βJ = ½ ln((1-q)/q)`.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::couplings::{beta_j_from_q, check_p, check_q, Q_MIN};
use crate::error::{check_domain, Error, Result};
use crate::exact::{
    coherence_scan_exact, homology_distribution, homology_distribution_transfer, MAX_ENUMERATION_BITS,
    MAX_TRANSFER_WIDTH,
};
use crate::gf2::BitVector;
use crate::lattice::{Boundary, Lattice2D};
use crate::mc::{disorder_average, GridAxis, McEstimate, McParams, Observable, ScanCell, ScanResult};
use crate::rng::{bernoulli_edges, derive_seed, disorder_pattern};
use crate::stats::mean_stderr;

/// Largest torus for which the threshold experiment enumerates classes.
pub const MAX_THRESHOLD_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub p_quenched: f64,
    pub q_annealed: f64,
}

impl ChannelSpec {
    pub fn new(p_quenched: f64, q_annealed: f64) -> Result<Self> {
        check_p(p_quenched)?;
        check_q(q_annealed)?;
        Ok(ChannelSpec {
            p_quenched,
            q_annealed,
        })
    }

    pub fn is_nishimori(&self) -> bool {
        (self.p_quenched - self.q_annealed).abs() < 1e-12
    }
}

/// Faces whose check anticommutes with an error, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeSet {
    pub flagged_faces: Vec<usize>,
}

impl SyndromeSet {
    pub fn symmetric_difference(&self, other: &SyndromeSet) -> SyndromeSet {
        let mut out: Vec<usize> = self
            .flagged_faces
            .iter()
            .filter(|f| other.flagged_faces.binary_search(f).is_err())
            .chain(
                other
                    .flagged_faces
                    .iter()
                    .filter(|f| self.flagged_faces.binary_search(f).is_err()),
            )
            .copied()
            .collect();
        out.sort_unstable();
        SyndromeSet { flagged_faces: out }
    }

    pub fn len(&self) -> usize {
        self.flagged_faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flagged_faces.is_empty()
    }
}

/// Independent Bernoulli(`p`) flip per qubit, `p ∈ [0, 1]`.
pub fn sample_error_pattern<R: Rng + ?Sized>(lattice: &Lattice2D, p: f64, rng: &mut R) -> Result<BitVector> {
    check_domain("p", p, (0.0..=1.0).contains(&p), "[0, 1]")?;
    Ok(bernoulli_edges(lattice, p, rng))
}

pub fn syndromes_of(lattice: &Lattice2D, error: &BitVector) -> Result<SyndromeSet> {
    if error.len() != lattice.n_edges() {
        return Err(Error::Shape {
            expected: lattice.n_edges(),
            found: error.len(),
        });
    }
    let flagged_faces = lattice
        .faces()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.iter().filter(|&&e| error.get(e)).count() % 2 == 1)
        .map(|(i, _)| i)
        .collect();
    Ok(SyndromeSet { flagged_faces })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Exact enumeration when the lattice is within the bound, else Monte Carlo.
    #[default]
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// `O[η_i]` (exact) or its Monte Carlo estimate, in sample order.
    pub samples: Vec<f64>,
    pub exact: bool,
}

impl CoherenceEstimate {
    pub fn to_mc_estimate(&self) -> McEstimate {
        McEstimate {
            mean: self.mean,
            std_error: self.std_error,
            n_samples: self.samples.len(),
            autocorrelation_hint: 0.5,
        }
    }
}

/// Quenched average of the coherence `O(p, q)` at `site` over `n_eta`
/// first-channel patterns drawn from the disorder streams of `seed`.
///
/// The exact path evaluates `(W₊ - W₋)/(W₊ + W₋)` per pattern and returns
/// the same numbers as [`coherence_scan_exact`]. The Monte Carlo path takes
/// sweep counts from `mc` and estimates the dual magnetization instead.
pub fn coherence_experiment(
    lattice: &Lattice2D,
    site: usize,
    spec: ChannelSpec,
    n_eta: usize,
    mc: &McParams,
    engine: Engine,
    seed: u64,
) -> Result<CoherenceEstimate> {
    let spec = ChannelSpec::new(spec.p_quenched, spec.q_annealed)?;
    lattice.require(Boundary::Open)?;
    lattice.check_vertex(site)?;
    if lattice.is_ghost(site) {
        return Err(Error::Index {
            index: site,
            len: lattice.n_free_spins(),
        });
    }
    let exact = match engine {
        Engine::Exact => true,
        Engine::MonteCarlo => false,
        Engine::Auto => lattice.n_free_spins() <= MAX_ENUMERATION_BITS,
    };
    if exact {
        let s = coherence_scan_exact(lattice, site, spec.p_quenched, spec.q_annealed, n_eta, seed)?;
        return Ok(CoherenceEstimate {
            mean: s.mean,
            std_error: s.std_error,
            samples: s.samples,
            exact: true,
        });
    }
    let params = McParams {
        linear_size: lattice.width(),
        boundary: Boundary::Open,
        beta_j: beta_j_from_q(spec.q_annealed),
        disorder_p: spec.p_quenched,
        n_disorder: n_eta,
        seed,
        observable: Observable::Site(site),
        ..mc.clone()
    };
    if lattice.width() != lattice.height() {
        return Err(Error::Shape {
            expected: lattice.width(),
            found: lattice.height(),
        });
    }
    let avg = disorder_average(lattice, &params)?;
    Ok(CoherenceEstimate {
        mean: avg.estimate.mean,
        std_error: avg.estimate.std_error,
        samples: avg.chains.iter().map(|c| c.mean).collect(),
        exact: false,
    })
}

/// [`coherence_experiment`] over the `ps × qs` grid as a scan (axis `q`).
/// Cell `k` (p-major) uses seed `derive_seed(seed, 0, k)`.
#[allow(clippy::too_many_arguments)]
pub fn coherence_grid(
    lattice: &Lattice2D,
    site: usize,
    ps: &[f64],
    qs: &[f64],
    n_eta: usize,
    mc: &McParams,
    engine: Engine,
    seed: u64,
) -> ScanResult {
    let mut cells = Vec::with_capacity(ps.len() * qs.len());
    for &p in ps {
        for &q in qs {
            let cell_seed = derive_seed(seed, 0, cells.len() as u64);
            let outcome = ChannelSpec::new(p, q)
                .and_then(|spec| coherence_experiment(lattice, site, spec, n_eta, mc, engine, cell_seed));
            let (estimate, failure, sweeps) = match outcome {
                Ok(c) => {
                    let sweeps = if c.exact { 0 } else { mc.total_sweeps() };
                    (Some(c.to_mc_estimate()), None, sweeps)
                }
                Err(e) => {
                    log::warn!("coherence cell p={p} q={q} failed: {e}");
                    (None, Some(e.to_string()), 0)
                }
            };
            cells.push(ScanCell {
                p,
                x: q,
                estimate,
                n_disorder: n_eta,
                sweeps,
                seed: cell_seed,
                failure,
            });
        }
    }
    ScanResult {
        axis: GridAxis::Q,
        linear_size: lattice.width(),
        boundary: lattice.boundary(),
        cells,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub p: f64,
    pub success_mean: f64,
    pub success_stderr: f64,
    pub n_eta: usize,
    #[serde(rename = "L")]
    pub linear_size: usize,
}

/// How the four homology class weights are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomologyMethod {
    /// Sum over the vertex-check group, `L ≤ 4`.
    #[default]
    Enumeration,
    /// Row transfer matrices of the twisted Ising models, `L ≤ 10`.
    TransferMatrix,
}

/// Success probability of maximum-likelihood decoding on the `L × L` torus
/// along `p = q`: the mean over patterns `η` of the largest homology class
/// probability. Every `p` uses the same disorder streams of `seed`, so the
/// patterns are nested as `p` grows.
pub fn threshold_experiment(linear_size: usize, ps: &[f64], n_eta: usize, seed: u64) -> Result<Vec<ThresholdPoint>> {
    threshold_experiment_with(linear_size, ps, n_eta, seed, HomologyMethod::Enumeration)
}

pub fn threshold_experiment_with(
    linear_size: usize,
    ps: &[f64],
    n_eta: usize,
    seed: u64,
    method: HomologyMethod,
) -> Result<Vec<ThresholdPoint>> {
    let limit = match method {
        HomologyMethod::Enumeration => MAX_THRESHOLD_SIZE,
        HomologyMethod::TransferMatrix => MAX_TRANSFER_WIDTH,
    };
    if linear_size > limit {
        return Err(Error::InstanceTooLarge {
            required: linear_size * linear_size - 1,
            limit: limit * limit - 1,
        });
    }
    if n_eta == 0 {
        return Err(Error::InvalidDimension {
            what: "n_eta",
            min: 1,
            got: 0,
        });
    }
    let lattice = Lattice2D::new(linear_size, linear_size, Boundary::Torus)?;
    ps.iter()
        .map(|&p| {
            check_p(p)?;
            let q = p.max(Q_MIN);
            let success = (0..n_eta as u64)
                .into_par_iter()
                .map(|i| {
                    let eta = disorder_pattern(&lattice, p, seed, i);
                    let h = match method {
                        HomologyMethod::Enumeration => homology_distribution(&lattice, &eta, q),
                        HomologyMethod::TransferMatrix => homology_distribution_transfer(&lattice, &eta, q),
                    };
                    h.map(|h| h.max_prob())
                })
                .collect::<Result<Vec<f64>>>()?;
            let (success_mean, success_stderr) = mean_stderr(&success);
            Ok(ThresholdPoint {
                p,
                success_mean,
                success_stderr,
                n_eta,
                linear_size,
            })
        })
        .collect()
}

pub fn write_threshold_csv<W: Write>(points: &[ThresholdPoint], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["p", "success_mean", "success_stderr", "n_eta", "L"]).map_err(io)?;
    for t in points {
        w.write_record([
            t.p.to_string(),
            t.success_mean.to_string(),
            t.success_stderr.to_string(),
            t.n_eta.to_string(),
            t.linear_size.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessCrossing {
    pub p: f64,
    pub std_error: f64,
}

/// Where the success curves of two sizes cross: below it the larger code
/// decodes better, above it worse. Both curves must share the `p` grid.
pub fn success_crossing(small: &[ThresholdPoint], large: &[ThresholdPoint]) -> Result<SuccessCrossing> {
    if small.len() != large.len() || small.iter().zip(large).any(|(a, b)| a.p != b.p) {
        return Err(Error::NotBracketed("success curves use different p grids".into()));
    }
    let d: Vec<(f64, f64, f64)> = small
        .iter()
        .zip(large)
        .map(|(a, b)| (a.p, b.success_mean - a.success_mean, a.success_stderr.hypot(b.success_stderr)))
        .collect();
    let mut best: Option<(f64, SuccessCrossing)> = None;
    for w in d.windows(2) {
        let ((xa, da, sa), (xb, db, sb)) = (w[0], w[1]);
        if !(da > 0.0 && db <= 0.0) {
            continue;
        }
        let delta = da - db;
        let p = xa + (xb - xa) * da / delta;
        let ga = (xb - xa) * (-db) / (delta * delta);
        let gb = (xb - xa) * da / (delta * delta);
        let significance = delta / sa.hypot(sb).max(f64::MIN_POSITIVE);
        if best.as_ref().is_none_or(|(s, _)| significance > *s) {
            best = Some((
                significance,
                SuccessCrossing {
                    p,
                    std_error: (ga * sa).hypot(gb * sb),
                },
            ));
        }
    }
    best.map(|(_, c)| c)
        .ok_or_else(|| Error::NotBracketed("success curves do not cross".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::magnetization_direct;
    use crate::gf2::gf2_solve_membership;
    use crate::lattice::{build_square_lattice, FaceKind};
    use crate::couplings::CouplingAssignment;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mc_params() -> McParams {
        McParams {
            linear_size: 3,
            boundary: Boundary::Open,
            beta_j: 1.0,
            disorder_p: 0.0,
            n_disorder: 1,
            n_equilibration_sweeps: 500,
            n_measure_sweeps: 20_000,
            measure_interval: 1,
            seed: 0,
            observable: Observable::Center,
        }
    }

    #[test]
    fn channel_spec() {
        assert!(ChannelSpec::new(0.1, 0.1).unwrap().is_nishimori());
        assert!(!ChannelSpec::new(0.1, 0.2).unwrap().is_nishimori());
        assert!(ChannelSpec::new(0.1, 0.0).is_err());
        assert!(ChannelSpec::new(0.6, 0.1).is_err());
    }

    #[test]
    fn error_pattern_limits() {
        let lat = build_square_lattice(30, 30, Boundary::Torus).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_error_pattern(&lat, 0.0, &mut rng).unwrap().is_zero());
        assert_eq!(sample_error_pattern(&lat, 1.0, &mut rng).unwrap().weight(), 1800);
        let w = sample_error_pattern(&lat, 0.1, &mut rng).unwrap().weight() as f64;
        assert!((w - 180.0).abs() < 5.0 * (1800.0f64 * 0.09).sqrt());
        assert!(sample_error_pattern(&lat, 1.5, &mut rng).is_err());
    }

    #[test]
    fn single_edge_flags_two_faces() {
        // every edge borders two faces, including the three-edge boundary faces
        for b in [Boundary::Open, Boundary::Torus] {
            let lat = build_square_lattice(4, 3, b).unwrap();
            for e in 0..lat.n_edges() {
                let err = BitVector::from_indices(lat.n_edges(), [e]).unwrap();
                let s = syndromes_of(&lat, &err).unwrap();
                assert_eq!(s.len(), 2);
            }
        }
        let lat = build_square_lattice(3, 3, Boundary::Open).unwrap();
        let corner_bond = lat.vertices()[0][0];
        let s = syndromes_of(&lat, &BitVector::from_indices(lat.n_edges(), [corner_bond]).unwrap()).unwrap();
        assert!(s.flagged_faces.iter().any(|&f| lat.face_kind(f) == FaceKind::Boundary));
    }

    #[test]
    fn stabilizers_and_loops_have_no_syndrome() {
        let lat = build_square_lattice(4, 4, Boundary::Torus).unwrap();
        for v in 0..lat.n_vertices() {
            assert!(syndromes_of(&lat, &lat.vertex_support(v)).unwrap().is_empty());
        }
        let rows = lat.free_vertex_supports();
        for t in lat.logical_x_loops().unwrap() {
            assert!(syndromes_of(&lat, &t).unwrap().is_empty());
            // a non-contractible dual loop is not a product of vertex checks
            assert!(gf2_solve_membership(&t, &rows).unwrap().is_none());
        }
        let open = build_square_lattice(3, 3, Boundary::Open).unwrap();
        let a = open.vertex_support(open.center());
        let b = open.vertex_support(0);
        let ab = a.xor(&b).unwrap();
        assert!(syndromes_of(&open, &ab).unwrap().is_empty());
        assert!(gf2_solve_membership(&ab, &open.free_vertex_supports()).unwrap().is_some());
    }

    #[test]
    fn wrong_length_error_is_rejected() {
        let lat = build_square_lattice(3, 3, Boundary::Open).unwrap();
        assert!(syndromes_of(&lat, &BitVector::zeros(3)).is_err());
    }

    #[test]
    fn coherence_limits() {
        let lat = build_square_lattice(3, 3, Boundary::Open).unwrap();
        let c = lat.center();
        let e = coherence_experiment(&lat, c, ChannelSpec::new(0.0, 1e-6).unwrap(), 4, &mc_params(), Engine::Auto, 1)
            .unwrap();
        assert!(e.exact);
        assert!(e.mean > 1.0 - 1e-4);
        let e = coherence_experiment(&lat, c, ChannelSpec::new(0.2, 0.5).unwrap(), 8, &mc_params(), Engine::Auto, 1)
            .unwrap();
        assert!(e.mean.abs() < 1e-12);
        let bad = ChannelSpec {
            p_quenched: 0.1,
            q_annealed: 0.0,
        };
        assert!(matches!(
            coherence_experiment(&lat, c, bad, 4, &mc_params(), Engine::Auto, 1),
            Err(Error::Domain { .. })
        ));
        let ghost = lat.ghost().unwrap();
        let spec = ChannelSpec::new(0.1, 0.1).unwrap();
        assert!(coherence_experiment(&lat, ghost, spec, 4, &mc_params(), Engine::Auto, 1).is_err());
    }

    #[test]
    fn exact_path_matches_oracle_bitwise() {
        let lat = build_square_lattice(3, 3, Boundary::Open).unwrap();
        let spec = ChannelSpec::new(0.1, 0.15).unwrap();
        let e = coherence_experiment(&lat, lat.center(), spec, 50, &mc_params(), Engine::Exact, 9).unwrap();
        let o = coherence_scan_exact(&lat, lat.center(), 0.1, 0.15, 50, 9).unwrap();
        assert_eq!(e.samples, o.samples);
        assert_eq!(e.mean, o.mean);
        for (i, &x) in e.samples.iter().enumerate() {
            let eta = disorder_pattern(&lat, 0.1, 9, i as u64);
            let c = CouplingAssignment::from_q(&lat, eta, 0.15).unwrap();
            assert!((magnetization_direct(&c, lat.center()).unwrap() - x).abs() < 1e-10);
        }
    }

    #[test]
    fn monte_carlo_path_matches_exact_statistically() {
        let lat = build_square_lattice(3, 3, Boundary::Open).unwrap();
        let spec = ChannelSpec::new(0.1, 0.15).unwrap();
        let exact = coherence_experiment(&lat, lat.center(), spec, 40, &mc_params(), Engine::Exact, 9).unwrap();
        let mc = coherence_experiment(&lat, lat.center(), spec, 40, &mc_params(), Engine::MonteCarlo, 9).unwrap();
        assert!(!mc.exact);
        let mut within = 0;
        for (a, b) in exact.samples.iter().zip(&mc.samples) {
            if (a - b).abs() < 0.03 {
                within += 1;
            }
        }
        assert!(within >= 38, "{within}");
        assert!((exact.mean - mc.mean).abs() < 0.01);
    }

    #[test]
    fn coherence_grid_is_monotone_in_q() {
        let lat = build_square_lattice(3, 3, Boundary::Open).unwrap();
        let s = coherence_grid(&lat, lat.center(), &[0.0, 0.1], &[0.05, 0.2, 0.35, 0.5], 30, &mc_params(), Engine::Auto, 4);
        assert!(s.is_rectangular());
        for p in [0.0, 0.1] {
            let row: Vec<f64> = [0.05, 0.2, 0.35, 0.5].iter().map(|&q| s.get(p, q).unwrap().estimate.unwrap().mean).collect();
            assert!(row.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{row:?}");
        }
    }

    #[test]
    fn threshold_cases() {
        let pts = threshold_experiment(3, &[0.01, 0.5], 200, 3).unwrap();
        assert!(pts[0].success_mean > 0.95);
        assert!((pts[1].success_mean - 0.25).abs() < 1e-12);
        let pts = threshold_experiment(2, &[0.0], 3, 3).unwrap();
        assert!(pts[0].success_mean > 1.0 - 1e-9);
        assert!(matches!(
            threshold_experiment(5, &[0.1], 10, 0),
            Err(Error::InstanceTooLarge { .. })
        ));
        assert!(threshold_experiment(3, &[0.7], 10, 0).is_err());
        let a = threshold_experiment(4, &[0.1, 0.2], 40, 2).unwrap();
        let b = threshold_experiment_with(4, &[0.1, 0.2], 40, 2, HomologyMethod::TransferMatrix).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.success_mean - y.success_mean).abs() < 1e-12);
        }
        assert!(threshold_experiment_with(5, &[0.1], 4, 0, HomologyMethod::TransferMatrix).is_ok());
        assert!(threshold_experiment_with(11, &[0.1], 4, 0, HomologyMethod::TransferMatrix).is_err());
    }

    #[test]
    fn threshold_decreases_along_grid() {
        let ps = [0.05, 0.1, 0.15, 0.2];
        let pts = threshold_experiment(3, &ps, 300, 17).unwrap();
        for w in pts.windows(2) {
            let tol = 2.0 * w[0].success_stderr.hypot(w[1].success_stderr);
            assert!(w[1].success_mean <= w[0].success_mean + tol);
        }
        let mut buf = Vec::new();
        write_threshold_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p,success_mean,success_stderr,n_eta,L\n"));
        assert_eq!(text.lines().count(), 5);
        assert_eq!(pts, threshold_experiment(3, &ps, 300, 17).unwrap());
    }

    #[test]
    fn success_crossing_on_synthetic_curves() {
        let mk = |l: usize, f: &dyn Fn(f64) -> f64| -> Vec<ThresholdPoint> {
            [0.05, 0.1, 0.15]
                .iter()
                .map(|&p| ThresholdPoint {
                    p,
                    success_mean: f(p),
                    success_stderr: 0.01,
                    n_eta: 1,
                    linear_size: l,
                })
                .collect()
        };
        let a = mk(3, &|p| 1.0 - 2.0 * p);
        let b = mk(4, &|p| 1.0 - 2.0 * p - 3.0 * (p - 0.11));
        let c = success_crossing(&a, &b).unwrap();
        assert!((c.p - 0.11).abs() < 1e-12);
        assert!(success_crossing(&b, &a).is_err());
    }

    proptest! {
        #[test]
        fn syndrome_is_linear(seed in any::<u64>(), torus in any::<bool>()) {
            let lat = build_square_lattice(4, 3, if torus { Boundary::Torus } else { Boundary::Open }).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e1 = sample_error_pattern(&lat, 0.3, &mut rng).unwrap();
            let e2 = sample_error_pattern(&lat, 0.3, &mut rng).unwrap();
            let s12 = syndromes_of(&lat, &e1.xor(&e2).unwrap()).unwrap();
            let s1 = syndromes_of(&lat, &e1).unwrap();
            let s2 = syndromes_of(&lat, &e2).unwrap();
            prop_assert_eq!(s12, s1.symmetric_difference(&s2));
            prop_assert_eq!(s1.len() % 2, 0);
        }
    }
}
