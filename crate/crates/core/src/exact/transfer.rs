//! Homology class weights from row transfer matrices.
//!
//! On the torus each class weight is proportional to the random-bond Ising
//! partition function with bonds flipped on `η ⊕ ℓ_c`. Those partition
//! functions are traced row by row over `2^W` row states, which reaches
//! sizes far beyond the stabilizer enumeration.

use crate::couplings::{beta_j_from_q, check_q};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::lattice::{Boundary, Lattice2D};
use crate::stats::log_sum_exp;

use super::HomologyDistribution;

/// Widest torus accepted; the cost grows as `W H 4^W`.
pub const MAX_TRANSFER_WIDTH: usize = 10;

/// `[ln Z(signs), ln Z(signs ⊕ vertical bonds of row 0)]` on the torus.
///
/// The second trace is free: negating the first vertical layer is the same
/// as starting from the reversed row state.
fn ln_partition_pair(lat: &Lattice2D, signs: &BitVector, beta_j: f64) -> [f64; 2] {
    let (w, h) = (lat.width(), lat.height());
    let n = 1usize << w;
    let sign = |e: usize| if signs.get(e) { -1.0 } else { 1.0 };
    let spin = |st: usize, c: usize| if (st >> c) & 1 == 1 { -1.0 } else { 1.0 };

    // per row: e^{βJ·(horizontal bond sum) - shift}, and the shift
    let rows: Vec<(Vec<f64>, f64)> = (0..h)
        .map(|r| {
            let k: Vec<f64> = (0..n)
                .map(|st| {
                    (0..w)
                        .map(|c| sign(lat.horizontal_torus_edge(r, c)) * spin(st, c) * spin(st, (c + 1) % w))
                        .sum::<f64>()
                        * beta_j
                })
                .collect();
            let shift = k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (k.iter().map(|x| (x - shift).exp()).collect(), shift)
        })
        .collect();
    let vertical: Vec<Vec<(f64, f64)>> = (0..h)
        .map(|r| {
            (0..w)
                .map(|c| {
                    let g = beta_j * sign(lat.vertical_torus_edge(r, c));
                    (g.exp(), (-g).exp())
                })
                .collect()
        })
        .collect();

    let mut same = Vec::with_capacity(n / 2);
    let mut reversed = Vec::with_capacity(n / 2);
    let mut v = vec![0.0; n];
    // global spin reversal pairs start states; keep those with the top spin up
    for start in 0..n / 2 {
        v.iter_mut().for_each(|x| *x = 0.0);
        v[start] = rows[0].0[start];
        let mut ln_scale = rows[0].1;
        for r in 0..h {
            for (c, &(ep, em)) in vertical[r].iter().enumerate() {
                let bit = 1 << c;
                for st in 0..n {
                    if st & bit == 0 {
                        let (a, b) = (v[st], v[st | bit]);
                        v[st] = a * ep + b * em;
                        v[st | bit] = a * em + b * ep;
                    }
                }
            }
            if r + 1 < h {
                let (weights, shift) = &rows[r + 1];
                for (x, wgt) in v.iter_mut().zip(weights) {
                    *x *= wgt;
                }
                ln_scale += shift;
            }
            let max = v.iter().copied().fold(0.0, f64::max);
            if max > 0.0 {
                v.iter_mut().for_each(|x| *x /= max);
                ln_scale += max.ln();
            }
        }
        same.push(ln_scale + v[start].ln());
        reversed.push(ln_scale + v[start ^ (n - 1)].ln());
    }
    let ln2 = std::f64::consts::LN_2;
    [ln2 + log_sum_exp(&same), ln2 + log_sum_exp(&reversed)]
}

/// Same contract as [`super::homology_distribution`], computed by transfer
/// matrices; the torus width may be up to [`MAX_TRANSFER_WIDTH`].
pub fn homology_distribution_transfer(lattice: &Lattice2D, eta: &BitVector, q: f64) -> Result<HomologyDistribution> {
    lattice.require(Boundary::Torus)?;
    check_q(q)?;
    if eta.len() != lattice.n_edges() {
        return Err(Error::Shape {
            expected: lattice.n_edges(),
            found: eta.len(),
        });
    }
    if lattice.width() > MAX_TRANSFER_WIDTH {
        return Err(Error::InstanceTooLarge {
            required: 2 * lattice.width(),
            limit: 2 * MAX_TRANSFER_WIDTH,
        });
    }
    let beta_j = beta_j_from_q(q);
    let [_, t2] = lattice.logical_x_loops()?;
    let [z0, z1] = ln_partition_pair(lattice, eta, beta_j);
    let [z2, z3] = ln_partition_pair(lattice, &eta.xor(&t2)?, beta_j);
    // F* = (1-q)^M e^{-βJ M} Z / 2
    let m = lattice.n_edges() as f64;
    let offset = m * (-q).ln_1p() - m * beta_j - std::f64::consts::LN_2;
    let ln_weights = [z0, z1, z2, z3].map(|z| z + offset);
    let total = log_sum_exp(&ln_weights);
    let class_prob = ln_weights.map(|w| (w - total).exp());
    Ok(HomologyDistribution {
        ln_weights,
        class_prob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::CouplingAssignment;
    use crate::exact::{homology_distribution, partition_function_direct};
    use crate::lattice::build_square_lattice;
    use crate::rng::disorder_pattern;

    #[test]
    fn partition_function_matches_spin_sum() {
        for (w, h) in [(2, 2), (3, 3), (3, 4), (4, 3), (4, 4)] {
            let lat = build_square_lattice(w, h, Boundary::Torus).unwrap();
            for i in 0..3 {
                let eta = disorder_pattern(&lat, 0.2, 4, i);
                let c = CouplingAssignment::new(&lat, eta.clone(), 1.0, 0.7).unwrap();
                let direct = partition_function_direct(&c).unwrap().ln;
                let [z, _] = ln_partition_pair(&lat, &eta, 0.7);
                assert!((z - direct).abs() < 1e-11, "{w}x{h}: {z} vs {direct}");
                let [t1, _] = lat.logical_x_loops().unwrap();
                let twisted = CouplingAssignment::new(&lat, eta.xor(&t1).unwrap(), 1.0, 0.7).unwrap();
                let [_, zt] = ln_partition_pair(&lat, &eta, 0.7);
                assert!((zt - partition_function_direct(&twisted).unwrap().ln).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn classes_match_stabilizer_enumeration() {
        for l in [2, 3, 4] {
            let lat = build_square_lattice(l, l, Boundary::Torus).unwrap();
            for (i, q) in [0.02, 0.1, 0.2, 0.5].into_iter().enumerate() {
                let eta = disorder_pattern(&lat, 0.15, 8, i as u64);
                let a = homology_distribution(&lat, &eta, q).unwrap();
                let b = homology_distribution_transfer(&lat, &eta, q).unwrap();
                for c in 0..4 {
                    assert!((a.ln_weights[c] - b.ln_weights[c]).abs() < 1e-10);
                    assert!((a.class_prob[c] - b.class_prob[c]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn large_coupling_stays_finite() {
        let lat = build_square_lattice(6, 6, Boundary::Torus).unwrap();
        let eta = disorder_pattern(&lat, 0.05, 1, 0);
        let h = homology_distribution_transfer(&lat, &eta, 1e-6).unwrap();
        assert!(h.ln_weights.iter().all(|w| w.is_finite()));
        assert!((h.class_prob.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let wide = build_square_lattice(11, 3, Boundary::Torus).unwrap();
        assert!(matches!(
            homology_distribution_transfer(&wide, &BitVector::zeros(wide.n_edges()), 0.1),
            Err(Error::InstanceTooLarge { .. })
        ));
    }
}
