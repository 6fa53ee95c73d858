//! Metropolis sampling of the random-bond Ising model.
//!
//! Disorder realization `i` of a run with master seed `s` draws its bond
//! signs from [`disorder_pattern`]`(lattice, p, s, i)` and its spin updates
//! from the `Spins` sub-stream `i`, so realizations can be evaluated in any
//! order and on any number of threads with identical results.

mod binder;
mod chain;
mod scan;
mod system;


pub use binder::{
    binder_crossing, binder_curve, find_crossing, nishimori_scan, q_threshold, BinderCurve,
    BinderPoint, Crossing, CrossingAnalysis, CurveAxis,
};
pub use chain::{run_chain, Chain, ChainPlan, ChainSummary, Probe, Start, BETA_J_CAP};
pub use scan::{grid_scan, nishimori_line_scan, phase_diagram_scan, GridAxis, ScanCell, ScanResult};
pub use system::SpinSystem;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::couplings::{check_p, CouplingAssignment};
use crate::error::{check_domain, Error, Result};
use crate::lattice::{Boundary, Lattice2D};
use crate::rng::{disorder_pattern, substream, Purpose};
use crate::stats::{mean, mean_stderr, pairwise_sum};

/// Order parameter measured on an open lattice. Periodic lattices always
/// report `|m|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `s` at the central site.
    #[default]
    Center,
    /// `s` at a given free site.
    Site(usize),
    /// Mean spin over all free sites.
    SiteAverage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McParams {
    pub linear_size: usize,
    pub boundary: Boundary,
    pub beta_j: f64,
    pub disorder_p: f64,
    pub n_disorder: usize,
    pub n_equilibration_sweeps: usize,
    pub n_measure_sweeps: usize,
    pub measure_interval: usize,
    pub seed: u64,
    #[serde(default)]
    pub observable: Observable,
}

impl McParams {
    pub fn validate(&self) -> Result<()> {
        check_domain("beta_J", self.beta_j, self.beta_j >= 0.0, "[0, inf)")?;
        check_p(self.disorder_p)?;
        for (what, got) in [
            ("n_disorder", self.n_disorder),
            ("n_equilibration_sweeps", self.n_equilibration_sweeps),
            ("n_measure_sweeps", self.n_measure_sweeps),
            ("measure_interval", self.measure_interval),
        ] {
            if got == 0 {
                return Err(Error::InvalidDimension { what, min: 1, got });
            }
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<Lattice2D> {
        Lattice2D::new(self.linear_size, self.linear_size, self.boundary)
    }

    pub fn total_sweeps(&self) -> usize {
        self.n_equilibration_sweeps + self.n_measure_sweeps
    }

    fn probe(&self, lattice: &Lattice2D) -> Result<Probe> {
        Ok(match (lattice.boundary(), self.observable) {
            (Boundary::Torus, _) => Probe::AbsMean,
            (Boundary::Open, Observable::Center) => Probe::Spin(lattice.center()),
            (Boundary::Open, Observable::Site(i)) => {
                if i >= lattice.n_free_spins() {
                    return Err(Error::Index {
                        index: i,
                        len: lattice.n_free_spins(),
                    });
                }
                Probe::Spin(i)
            }
            (Boundary::Open, Observable::SiteAverage) => Probe::Mean,
        })
    }

    fn plan(&self, probe: Probe) -> ChainPlan {
        ChainPlan {
            beta_j: self.beta_j,
            probe,
            n_equilibration_sweeps: self.n_equilibration_sweeps,
            n_measure_sweeps: self.n_measure_sweeps,
            measure_interval: self.measure_interval,
        }
    }

    fn check_lattice(&self, lattice: &Lattice2D) -> Result<()> {
        if lattice.width() != self.linear_size || lattice.height() != self.linear_size {
            return Err(Error::Shape {
                expected: self.linear_size,
                found: lattice.width().max(lattice.height()),
            });
        }
        if lattice.boundary() != self.boundary {
            return Err(Error::UnsupportedBoundary {
                expected: self.boundary,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    /// Integrated autocorrelation time in measurements, averaged over chains.
    pub autocorrelation_hint: f64,
}

/// The `index`-th quenched assignment of the run keyed by `seed`.
pub fn sample_disorder<'a>(
    lattice: &'a Lattice2D,
    p: f64,
    beta_j: f64,
    seed: u64,
    index: u64,
) -> Result<CouplingAssignment<'a>> {
    check_p(p)?;
    CouplingAssignment::new(lattice, disorder_pattern(lattice, p, seed, index), 1.0, beta_j)
}

/// One chain on fixed couplings, using spin stream 0 of `params.seed`.
/// `params.beta_j` and `params.disorder_p` are ignored in favour of the
/// couplings' own temperature and signs.
pub fn metropolis_run(c: &CouplingAssignment, params: &McParams) -> Result<McEstimate> {
    params.validate()?;
    let probe = params.probe(c.lattice())?;
    let sys = SpinSystem::from_couplings(c);
    let mut plan = params.plan(probe);
    plan.beta_j = c.beta_j();
    let s = run_chain(&sys, &plan, substream(params.seed, Purpose::Spins, 0));
    Ok(combine(std::slice::from_ref(&s)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisorderAverage {
    pub estimate: McEstimate,
    /// One summary per realization, in realization order.
    pub chains: Vec<ChainSummary>,
}

impl DisorderAverage {
    /// Binder cumulant `1 - [⟨m⁴⟩] / (3 [⟨m²⟩]²)` with a jackknife error,
    /// over realizations or, for a single realization, over time blocks.
    pub fn binder(&self) -> (f64, f64) {
        let pairs: Vec<(f64, f64)> = if self.chains.len() > 1 {
            self.chains.iter().map(|c| (c.m2, c.m4)).collect()
        } else {
            self.chains[0].blocks.clone()
        };
        crate::stats::jackknife(pairs.len(), |mask| {
            let sel: Vec<(f64, f64)> = pairs
                .iter()
                .zip(mask)
                .filter(|(_, &k)| k)
                .map(|(p, _)| *p)
                .collect();
            let m2 = mean(&sel.iter().map(|p| p.0).collect::<Vec<_>>());
            let m4 = mean(&sel.iter().map(|p| p.1).collect::<Vec<_>>());
            if m2 > 0.0 {
                1.0 - m4 / (3.0 * m2 * m2)
            } else {
                0.0
            }
        })
    }
}

/// Mean over realizations; the error is the larger of the spread between
/// realizations and the pooled within-chain error.
fn combine(chains: &[ChainSummary]) -> McEstimate {
    let means: Vec<f64> = chains.iter().map(|c| c.mean).collect();
    let (m, between) = mean_stderr(&means);
    let within_sq: Vec<f64> = chains.iter().map(|c| c.std_error * c.std_error).collect();
    let within = pairwise_sum(&within_sq).sqrt() / chains.len() as f64;
    McEstimate {
        mean: m,
        std_error: between.max(within),
        n_samples: chains.iter().map(|c| c.n_samples).sum(),
        autocorrelation_hint: mean(&chains.iter().map(|c| c.tau).collect::<Vec<_>>()),
    }
}

pub fn disorder_average(lattice: &Lattice2D, params: &McParams) -> Result<DisorderAverage> {
    params.validate()?;
    params.check_lattice(lattice)?;
    let plan = params.plan(params.probe(lattice)?);
    let chains: Vec<ChainSummary> = (0..params.n_disorder as u64)
        .into_par_iter()
        .map(|i| {
            let c = sample_disorder(lattice, params.disorder_p, params.beta_j, params.seed, i)?;
            let sys = SpinSystem::from_couplings(&c);
            Ok(run_chain(&sys, &plan, substream(params.seed, Purpose::Spins, i)))
        })
        .collect::<Result<_>>()?;
    Ok(DisorderAverage {
        estimate: combine(&chains),
        chains,
    })
}

/// Quenched average of the order parameter over `params.n_disorder`
/// realizations at `params.disorder_p`, `params.beta_j`.
pub fn disorder_averaged_m(lattice: &Lattice2D, params: &McParams) -> Result<McEstimate> {
    disorder_average(lattice, params).map(|d| d.estimate)
}

/// `params.n_disorder` independent chains on a fixed system, reporting
/// `|m|` (the system has no clamped spin to break the symmetry).
pub fn replica_average(sys: &SpinSystem, params: &McParams) -> Result<DisorderAverage> {
    params.validate()?;
    let plan = params.plan(Probe::AbsMean);
    let chains: Vec<ChainSummary> = (0..params.n_disorder as u64)
        .into_par_iter()
        .map(|i| run_chain(sys, &plan, substream(params.seed, Purpose::Spins, i)))
        .collect();
    Ok(DisorderAverage {
        estimate: combine(&chains),
        chains,
    })
}
