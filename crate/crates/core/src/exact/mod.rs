//! Exact small-instance engines.
//!
//! Two independent routes are implemented for every thermodynamic quantity:
//!
//! * the *direct* route enumerates vertex-spin configurations (Gray code over
//!   the free spins, clamped frame at `+1`) and sums Boltzmann weights;
//! * the *stabilizer* route expands `|G⟩ = Π_v (1+A_v)/2 |0…0⟩` into the
//!   X-stabilizer group (edge bit patterns `x`) and weights each element by
//!   `Π_e e^{βJ_e(-1)^{x_e}}` or, after the change of variables to the flip
//!   probability `q`, by `q^{|x⊕η|}(1-q)^{M-|x⊕η|}`.
//!
//! No state vector is ever formed. Both routes reduce to integer histograms
//! over the bond sum / Hamming distance, which are then summed in log space.

mod enumerate;
mod transfer;

pub use enumerate::{group_histograms, spin_histogram, SpinHistogram};
pub use transfer::{homology_distribution_transfer, MAX_TRANSFER_WIDTH};

use serde::{Deserialize, Serialize};

use crate::couplings::{check_p, check_q, CouplingAssignment};
use crate::error::{Error, Result};
use crate::gf2::{row_basis, BitVector};
use crate::lattice::{shortest_boundary_path, Boundary, Lattice2D, StringPath};
use crate::rng::disorder_pattern;
use crate::stats::{log_sum_exp, mean_stderr, pairwise_sum};

/// At most `2^25` configurations or group elements are enumerated.
pub const MAX_ENUMERATION_BITS: usize = 25;

fn check_bits(bits: usize) -> Result<()> {
    if bits > MAX_ENUMERATION_BITS {
        Err(Error::InstanceTooLarge {
            required: bits,
            limit: MAX_ENUMERATION_BITS,
        })
    } else {
        Ok(())
    }
}

/// A partition function held as its logarithm; large `βJ·M` overflows `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionValue {
    pub ln: f64,
}

impl PartitionValue {
    pub fn value(&self) -> f64 {
        self.ln.exp()
    }

    /// `|self - other| / other`, evaluated without leaving log space.
    pub fn relative_difference(&self, other: &PartitionValue) -> f64 {
        (self.ln - other.ln).exp_m1().abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceResult {
    pub w_plus: f64,
    pub w_minus: f64,
    /// `(W₊ - W₋) / (W₊ + W₋)`
    pub order: f64,
}

/// Class weights indexed by `μ + 2ν`, where the class representative is
/// `(T_x¹)^μ (T_x²)^ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomologyDistribution {
    /// `ln Σ_{g} q^{|g⊕η⊕ℓ_c|}(1-q)^{M-|g⊕η⊕ℓ_c|}`.
    pub ln_weights: [f64; 4],
    pub class_prob: [f64; 4],
}

impl HomologyDistribution {
    /// Fidelity `F*[η]`: the un-normalized weight of the trivial class.
    pub fn fidelity(&self) -> f64 {
        self.ln_weights[0].exp()
    }

    pub fn most_likely_class(&self) -> usize {
        (0..4)
            .max_by(|&a, &b| self.class_prob[a].total_cmp(&self.class_prob[b]).then(b.cmp(&a)))
            .expect("four classes")
    }

    pub fn max_prob(&self) -> f64 {
        self.class_prob[self.most_likely_class()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceScan {
    pub mean: f64,
    pub std_error: f64,
    /// `O[η_i]` in sample order.
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionalityReport {
    /// `ln(F*[η_i] / Z[J(η_i)])` per sample.
    pub ln_ratios: Vec<f64>,
    /// `max ratio / min ratio - 1`.
    pub max_relative_spread: f64,
}

/// Ratio `Σ_k a_k e^{x·k} / Σ_k b_k e^{x·k}` over a histogram indexed by
/// `k + offset`, shifted by the largest populated exponent.
fn weighted_ratio(num: &[f64], den: &[f64], exponent: impl Fn(usize) -> f64) -> f64 {
    let shift = den
        .iter()
        .enumerate()
        .filter(|(_, &d)| d != 0.0)
        .map(|(i, _)| exponent(i))
        .fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = (0..den.len()).map(|i| (exponent(i) - shift).exp()).collect();
    let n: Vec<f64> = num.iter().zip(&w).map(|(a, w)| a * w).collect();
    let d: Vec<f64> = den.iter().zip(&w).map(|(a, w)| a * w).collect();
    pairwise_sum(&n) / pairwise_sum(&d)
}

fn ln_hist_sum(counts: &[u64], exponent: impl Fn(usize) -> f64) -> f64 {
    let terms: Vec<f64> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (c as f64).ln() + exponent(i))
        .collect();
    log_sum_exp(&terms)
}

/// `Z[J] = Σ_s exp(β Σ J_ij s_i s_j)` by enumerating the free spins.
pub fn partition_function_direct(c: &CouplingAssignment) -> Result<PartitionValue> {
    let lat = c.lattice();
    check_bits(lat.n_free_spins())?;
    let h = spin_histogram(c, None);
    let m = lat.n_edges() as f64;
    let bj = c.beta_j();
    Ok(PartitionValue {
        ln: ln_hist_sum(&h.up, |slot| bj * (slot as f64 - m)),
    })
}

/// Independent generators of the X-stabilizer group acting on the lattice.
fn vertex_basis(lat: &Lattice2D) -> Result<Vec<BitVector>> {
    let basis = row_basis(&lat.free_vertex_supports())?;
    check_bits(basis.len())?;
    Ok(basis)
}

/// `Z[J] = 2^M ⟨α[J]|G⟩` via the X-stabilizer expansion of `|G⟩`.
///
/// Each group element `x` contributes `Π_e e^{βJ_e(-1)^{x_e}} =
/// e^{βJ(M - 2|x⊕η|)}`. On the torus the spin-to-edge map is two-to-one, and
/// the result is multiplied by the kernel size `2^{#spins - rank}` to compare
/// with the vertex-spin sum.
pub fn partition_function_quantum(c: &CouplingAssignment) -> Result<PartitionValue> {
    let lat = c.lattice();
    let basis = vertex_basis(lat)?;
    let hist = group_histograms(&basis, std::slice::from_ref(c.signs()), None);
    let m = lat.n_edges() as f64;
    let bj = c.beta_j();
    let kernel = (lat.n_free_spins() - basis.len()) as f64 * std::f64::consts::LN_2;
    Ok(PartitionValue {
        ln: kernel + ln_hist_sum(&hist[0][0], |d| bj * (m - 2.0 * d as f64)),
    })
}

/// Thermal average `⟨s_site⟩` by spin enumeration. The frame spin is `+1`.
pub fn magnetization_direct(c: &CouplingAssignment, site: usize) -> Result<f64> {
    let lat = c.lattice();
    lat.check_vertex(site)?;
    check_bits(lat.n_free_spins())?;
    if lat.is_ghost(site) {
        return Ok(1.0);
    }
    let h = spin_histogram(c, Some(site));
    let m = lat.n_edges() as f64;
    let bj = c.beta_j();
    let num: Vec<f64> = h.up.iter().zip(&h.down).map(|(&u, &d)| u as f64 - d as f64).collect();
    let den: Vec<f64> = h.up.iter().zip(&h.down).map(|(&u, &d)| (u + d) as f64).collect();
    Ok(weighted_ratio(&num, &den, |slot| bj * (slot as f64 - m)))
}

fn check_path(lat: &Lattice2D, path: &StringPath) -> Result<()> {
    lat.require(Boundary::Open)?;
    if !path.anchored {
        return Err(Error::InvalidPath("string is not anchored on the boundary".into()));
    }
    if path.edges.len() != lat.n_edges() {
        return Err(Error::Shape {
            expected: lat.n_edges(),
            found: path.edges.len(),
        });
    }
    lat.check_vertex(path.endpoint)?;
    let ghost = lat.ghost().expect("open lattice");
    let mut odd = vec![false; lat.n_vertices()];
    for e in path.edges.ones_iter() {
        for v in lat.edges()[e] {
            odd[v] = !odd[v];
        }
    }
    let ends: Vec<usize> = (0..odd.len()).filter(|&v| odd[v]).collect();
    let expected: Vec<usize> = if path.endpoint == ghost {
        vec![]
    } else {
        let mut e = vec![path.endpoint, ghost];
        e.sort_unstable();
        e
    };
    if ends != expected {
        return Err(Error::InvalidPath(format!(
            "string boundary is {ends:?}, expected {expected:?}"
        )));
    }
    Ok(())
}

/// `m_n = ⟨α|Γ_Z|G⟩ / ⟨α|G⟩` with `Γ_Z = Π_{e∈γ} Z_e`: group elements crossing
/// the string an odd number of times enter with a minus sign.
pub fn magnetization_quantum(c: &CouplingAssignment, path: &StringPath) -> Result<f64> {
    let lat = c.lattice();
    check_path(lat, path)?;
    let basis = vertex_basis(lat)?;
    let hist = group_histograms(&basis, std::slice::from_ref(c.signs()), Some(&path.edges));
    let [even, odd] = &hist[0];
    let m = lat.n_edges() as f64;
    let bj = c.beta_j();
    let num: Vec<f64> = even.iter().zip(odd).map(|(&a, &b)| a as f64 - b as f64).collect();
    let den: Vec<f64> = even.iter().zip(odd).map(|(&a, &b)| (a + b) as f64).collect();
    Ok(weighted_ratio(&num, &den, |d| bj * (m - 2.0 * d as f64)))
}

/// Loop-parity weights `W_±[η]`: total Bernoulli(`q`) probability of the
/// second-channel patterns `E` such that `E ⊕ η` is a closed loop
/// configuration crossing `γ` an even (`+`) or odd (`-`) number of times.
/// The weights are un-normalized; only `order` is scale free.
pub fn loop_parity_weights(
    lattice: &Lattice2D,
    eta: &BitVector,
    q: f64,
    path: &StringPath,
) -> Result<CoherenceResult> {
    check_q(q)?;
    if eta.len() != lattice.n_edges() {
        return Err(Error::Shape {
            expected: lattice.n_edges(),
            found: eta.len(),
        });
    }
    check_path(lattice, path)?;
    let basis = vertex_basis(lattice)?;
    let hist = group_histograms(&basis, std::slice::from_ref(eta), Some(&path.edges));
    let m = lattice.n_edges();
    let (lq, lp) = (q.ln(), (-q).ln_1p());
    let exponent = |d: usize| d as f64 * lq + (m - d) as f64 * lp;
    let ln_plus = ln_hist_sum(&hist[0][0], exponent);
    let ln_minus = ln_hist_sum(&hist[0][1], exponent);
    let top = ln_plus.max(ln_minus);
    let (a, b) = ((ln_plus - top).exp(), (ln_minus - top).exp());
    Ok(CoherenceResult {
        w_plus: ln_plus.exp(),
        w_minus: ln_minus.exp(),
        order: (a - b) / (a + b),
    })
}

/// Quenched average of `O[η]` over `η ~ Bernoulli(p)` drawn from the
/// disorder streams of `seed`.
pub fn coherence_scan_exact(
    lattice: &Lattice2D,
    site: usize,
    p: f64,
    q: f64,
    n_eta_samples: usize,
    seed: u64,
) -> Result<CoherenceScan> {
    check_p(p)?;
    check_q(q)?;
    lattice.require(Boundary::Open)?;
    if n_eta_samples == 0 {
        return Err(Error::InvalidDimension {
            what: "n_eta_samples",
            min: 1,
            got: 0,
        });
    }
    let path = shortest_boundary_path(lattice, site)?;
    let samples = (0..n_eta_samples as u64)
        .map(|i| {
            let eta = disorder_pattern(lattice, p, seed, i);
            loop_parity_weights(lattice, &eta, q, &path).map(|r| r.order)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, std_error) = mean_stderr(&samples);
    Ok(CoherenceScan {
        mean,
        std_error,
        samples,
    })
}

/// Probabilities of the four homology classes of the error given the
/// syndrome of `η`, at annealed flip probability `q`.
pub fn homology_distribution(
    lattice: &Lattice2D,
    eta: &BitVector,
    q: f64,
) -> Result<HomologyDistribution> {
    lattice.require(Boundary::Torus)?;
    check_q(q)?;
    if eta.len() != lattice.n_edges() {
        return Err(Error::Shape {
            expected: lattice.n_edges(),
            found: eta.len(),
        });
    }
    let basis = vertex_basis(lattice)?;
    let [t1, t2] = lattice.logical_x_loops()?;
    let offsets: Vec<BitVector> = (0..4)
        .map(|c| {
            let mut o = eta.clone();
            if c & 1 == 1 {
                o.xor_assign(&t1)?;
            }
            if c & 2 == 2 {
                o.xor_assign(&t2)?;
            }
            Ok(o)
        })
        .collect::<Result<_>>()?;
    let hist = group_histograms(&basis, &offsets, None);
    let m = lattice.n_edges();
    let (lq, lp) = (q.ln(), (-q).ln_1p());
    let mut ln_weights = [0.0; 4];
    for (w, h) in ln_weights.iter_mut().zip(&hist) {
        *w = ln_hist_sum(&h[0], |d| d as f64 * lq + (m - d) as f64 * lp);
    }
    let total = log_sum_exp(&ln_weights);
    let class_prob = ln_weights.map(|w| (w - total).exp());
    Ok(HomologyDistribution {
        ln_weights,
        class_prob,
    })
}

/// Checks that `F*[η] / Z[J(η)]` is independent of `η` when `βJ` is tied to
/// `q`. `Z` comes from the direct spin sum on the same torus.
pub fn fidelity_vs_partition_proportionality(
    lattice: &Lattice2D,
    eta_samples: &[BitVector],
    q: f64,
) -> Result<ProportionalityReport> {
    let mut ln_ratios = Vec::with_capacity(eta_samples.len());
    for eta in eta_samples {
        let fid = homology_distribution(lattice, eta, q)?;
        let c = CouplingAssignment::from_q(lattice, eta.clone(), q)?;
        let z = partition_function_direct(&c)?;
        ln_ratios.push(fid.ln_weights[0] - z.ln);
    }
    let hi = ln_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = ln_ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if ln_ratios.is_empty() {
        0.0
    } else {
        (hi - lo).exp_m1()
    };
    Ok(ProportionalityReport {
        ln_ratios,
        max_relative_spread: spread,
    })
}
