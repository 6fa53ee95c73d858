use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;

use super::system::SpinSystem;

/// Above this `βJ` the chain is replaced by a zero-temperature quench.
pub const BETA_J_CAP: f64 = 15.0;

const MAX_QUENCH_SWEEPS: usize = 10_000;
const N_BLOCKS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    /// All spins `+1`.
    Cold,
    /// Independent uniform spins.
    Hot,
}

/// What a chain records at each measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    /// One spin `s_i`.
    Spin(usize),
    /// Signed mean spin.
    Mean,
    /// `|Σ s_i| / N`.
    AbsMean,
}

/// Single-spin-flip Metropolis chain with sequential sweeps.
pub struct Chain<'a> {
    sys: &'a SpinSystem,
    spins: Vec<i8>,
    total: i64,
    /// `accept[k]` is `⌊2^32 e^{-2βJ k}⌋` for `k = s_i h_i > 0`.
    accept: Vec<u64>,
    rng: ChaCha8Rng,
}

impl<'a> Chain<'a> {
    pub fn new(sys: &'a SpinSystem, beta_j: f64, start: Start, mut rng: ChaCha8Rng) -> Self {
        let n = sys.n_spins();
        let mut spins = vec![1i8; n + 1];
        if start == Start::Hot {
            for s in spins.iter_mut().take(n) {
                if rng.random::<bool>() {
                    *s = -1;
                }
            }
        }
        let total = spins[..n].iter().map(|&s| s as i64).sum();
        let accept = (0..=sys.max_degree())
            .map(|k| ((-2.0 * beta_j * k as f64).exp() * 4_294_967_296.0).min(4_294_967_296.0) as u64)
            .collect();
        Chain {
            sys,
            spins,
            total,
            accept,
            rng,
        }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins[..self.sys.n_spins()]
    }

    pub fn sweep(&mut self) {
        for i in 0..self.sys.n_spins() {
            let k = self.spins[i] as i32 * self.sys.local_field(&self.spins, i);
            if k <= 0 || (self.rng.next_u32() as u64) < self.accept[k as usize] {
                self.spins[i] = -self.spins[i];
                self.total += 2 * self.spins[i] as i64;
            }
        }
    }

    /// Greedy descent: flip any spin that strictly lowers the energy until
    /// none is left. Returns the number of sweeps used.
    pub fn quench(&mut self) -> usize {
        for sweep in 0..MAX_QUENCH_SWEEPS {
            let mut changed = false;
            for i in 0..self.sys.n_spins() {
                if self.spins[i] as i32 * self.sys.local_field(&self.spins, i) < 0 {
                    self.spins[i] = -self.spins[i];
                    self.total += 2 * self.spins[i] as i64;
                    changed = true;
                }
            }
            if !changed {
                return sweep + 1;
            }
        }
        MAX_QUENCH_SWEEPS
    }

    pub fn observe(&self, probe: Probe) -> f64 {
        let n = self.sys.n_spins() as f64;
        match probe {
            Probe::Spin(i) => self.spins[i] as f64,
            Probe::Mean => self.total as f64 / n,
            Probe::AbsMean => self.total.abs() as f64 / n,
        }
    }

    pub fn magnetization(&self) -> f64 {
        self.total as f64 / self.sys.n_spins() as f64
    }
}

/// Time series summary of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSummary {
    pub mean: f64,
    pub std_error: f64,
    pub tau: f64,
    pub n_samples: usize,
    /// `⟨m²⟩`, `⟨m⁴⟩` of the mean spin.
    pub m2: f64,
    pub m4: f64,
    /// `(⟨m²⟩, ⟨m⁴⟩)` over contiguous blocks of the series.
    pub blocks: Vec<(f64, f64)>,
}

pub struct ChainPlan {
    pub beta_j: f64,
    pub probe: Probe,
    pub n_equilibration_sweeps: usize,
    pub n_measure_sweeps: usize,
    pub measure_interval: usize,
}

pub fn run_chain(sys: &SpinSystem, plan: &ChainPlan, rng: ChaCha8Rng) -> ChainSummary {
    let mut chain = Chain::new(sys, plan.beta_j, Start::Cold, rng);
    if plan.beta_j > BETA_J_CAP {
        chain.quench();
        let m = chain.magnetization();
        let v = chain.observe(plan.probe);
        return ChainSummary {
            mean: v,
            std_error: 0.0,
            tau: 0.5,
            n_samples: 1,
            m2: m * m,
            m4: m.powi(4),
            blocks: vec![(m * m, m.powi(4))],
        };
    }
    for _ in 0..plan.n_equilibration_sweeps {
        chain.sweep();
    }
    let mut series = Vec::new();
    let mut m2s = Vec::new();
    let mut m4s = Vec::new();
    for t in 1..=plan.n_measure_sweeps {
        chain.sweep();
        if t % plan.measure_interval == 0 {
            series.push(chain.observe(plan.probe));
            let m2 = chain.magnetization().powi(2);
            m2s.push(m2);
            m4s.push(m2 * m2);
        }
    }
    if series.is_empty() {
        series.push(chain.observe(plan.probe));
        let m2 = chain.magnetization().powi(2);
        m2s.push(m2);
        m4s.push(m2 * m2);
    }
    let (std_error, tau) = crate::stats::blocking_stderr(&series);
    let nb = N_BLOCKS.min(series.len());
    let size = series.len() / nb;
    let blocks = (0..nb)
        .map(|b| {
            let r = b * size..(b + 1) * size;
            (crate::stats::mean(&m2s[r.clone()]), crate::stats::mean(&m4s[r]))
        })
        .collect();
    ChainSummary {
        mean: crate::stats::mean(&series),
        std_error,
        tau,
        n_samples: series.len(),
        m2: crate::stats::mean(&m2s),
        m4: crate::stats::mean(&m4s),
        blocks,
    }
}
