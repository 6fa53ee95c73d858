//! Gray-code enumeration kernels.
//!
//! Both kernels reduce to integer histograms, so splitting the Gray sequence
//! into chunks and merging the chunk histograms gives bitwise identical
//! results regardless of scheduling.

use rayon::prelude::*;

use crate::couplings::CouplingAssignment;
use crate::gf2::BitVector;

const CHUNKS: u64 = 64;
const MIN_PARALLEL_BITS: usize = 14;

fn chunk_ranges(total: u64, bits: usize) -> Vec<(u64, u64)> {
    if bits < MIN_PARALLEL_BITS {
        return vec![(0, total)];
    }
    let step = total / CHUNKS;
    (0..CHUNKS).map(|i| (i * step, (i + 1) * step)).collect()
}

#[inline]
fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

/// Energy histogram of all free-spin configurations.
///
/// `bond_sum[k + M]` counts configurations with `Σ_e sign_e s_i s_j = k`; when
/// a tracked site is given, configurations are split by its spin value into
/// `[up, down]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinHistogram {
    pub n_edges: usize,
    pub up: Vec<u64>,
    pub down: Vec<u64>,
}

struct SpinTables {
    n_free: usize,
    /// per free spin: (neighbour or usize::MAX for the clamped frame, sign)
    nbrs: Vec<Vec<(usize, i64)>>,
    edges: Vec<([usize; 2], i64)>,
}

impl SpinTables {
    fn new(c: &CouplingAssignment) -> Self {
        let lat = c.lattice();
        let n_free = lat.n_free_spins();
        let fixed = |v: usize| if v >= n_free { usize::MAX } else { v };
        let mut nbrs = vec![Vec::new(); n_free];
        let mut edges = Vec::with_capacity(lat.n_edges());
        for (e, &[a, b]) in lat.edges().iter().enumerate() {
            let s = c.sign(e) as i64;
            edges.push(([fixed(a), fixed(b)], s));
            if a < n_free {
                nbrs[a].push((fixed(b), s));
            }
            if b < n_free {
                nbrs[b].push((fixed(a), s));
            }
        }
        SpinTables { n_free, nbrs, edges }
    }
}

pub fn spin_histogram(c: &CouplingAssignment, tracked: Option<usize>) -> SpinHistogram {
    let tables = SpinTables::new(c);
    let m = c.lattice().n_edges();
    let n = tables.n_free;
    let total = 1u64 << n;
    let tracked = tracked.filter(|&t| t < n);

    let run = |(start, end): (u64, u64)| {
        let mut up = vec![0u64; 2 * m + 1];
        let mut down = vec![0u64; 2 * m + 1];
        let g0 = gray(start);
        let spin = |v: usize, code: u64| -> i64 {
            if v == usize::MAX || (code >> v) & 1 == 0 {
                1
            } else {
                -1
            }
        };
        let mut s: Vec<i64> = (0..n).map(|v| spin(v, g0)).collect();
        let mut k: i64 = tables
            .edges
            .iter()
            .map(|&([a, b], sg)| sg * spin(a, g0) * spin(b, g0))
            .sum();
        for idx in start..end {
            let slot = (k + m as i64) as usize;
            match tracked {
                Some(t) if s[t] < 0 => down[slot] += 1,
                _ => up[slot] += 1,
            }
            let next = idx + 1;
            if next < end {
                let i = next.trailing_zeros() as usize;
                let h: i64 = tables.nbrs[i]
                    .iter()
                    .map(|&(j, sg)| sg * if j == usize::MAX { 1 } else { s[j] })
                    .sum();
                k -= 2 * s[i] * h;
                s[i] = -s[i];
            }
        }
        (up, down)
    };

    let parts: Vec<(Vec<u64>, Vec<u64>)> =
        chunk_ranges(total, n).into_par_iter().map(run).collect();
    let mut up = vec![0u64; 2 * m + 1];
    let mut down = vec![0u64; 2 * m + 1];
    for (u, d) in parts {
        for (a, b) in up.iter_mut().zip(u) {
            *a += b;
        }
        for (a, b) in down.iter_mut().zip(d) {
            *a += b;
        }
    }
    SpinHistogram {
        n_edges: m,
        up,
        down,
    }
}

/// For each offset `o`, histogram of `|x ⊕ o|` over every element `x` of the
/// span of `basis`, split by the parity of `|x ∩ mask|` when a mask is given
/// (`counts[o][parity][distance]`).
pub fn group_histograms(
    basis: &[BitVector],
    offsets: &[BitVector],
    mask: Option<&BitVector>,
) -> Vec<[Vec<u64>; 2]> {
    let len = offsets.first().map(|o| o.len()).unwrap_or(0);
    let words = len.div_ceil(64);
    let gens: Vec<&[u64]> = basis.iter().map(|b| b.words()).collect();
    let offs: Vec<&[u64]> = offsets.iter().map(|o| o.words()).collect();
    let zero = vec![0u64; words];
    let mask_w: &[u64] = mask.map(|m| m.words()).unwrap_or(&zero);
    let bits = basis.len();
    let total = 1u64 << bits;

    let run = |(start, end): (u64, u64)| {
        let mut hist: Vec<[Vec<u64>; 2]> = (0..offs.len())
            .map(|_| [vec![0u64; len + 1], vec![0u64; len + 1]])
            .collect();
        let g0 = gray(start);
        let mut x = vec![0u64; words];
        for (b, g) in gens.iter().enumerate() {
            if (g0 >> b) & 1 == 1 {
                for (xw, gw) in x.iter_mut().zip(g.iter()) {
                    *xw ^= gw;
                }
            }
        }
        for idx in start..end {
            let parity = x
                .iter()
                .zip(mask_w)
                .map(|(a, b)| (a & b).count_ones())
                .sum::<u32>() as usize
                & 1;
            for (o, h) in offs.iter().zip(hist.iter_mut()) {
                let d: u32 = x.iter().zip(o.iter()).map(|(a, b)| (a ^ b).count_ones()).sum();
                h[parity][d as usize] += 1;
            }
            let next = idx + 1;
            if next < end {
                let g = gens[next.trailing_zeros() as usize];
                for (xw, gw) in x.iter_mut().zip(g.iter()) {
                    *xw ^= gw;
                }
            }
        }
        hist
    };

    let parts: Vec<Vec<[Vec<u64>; 2]>> =
        chunk_ranges(total, bits).into_par_iter().map(run).collect();
    let mut out: Vec<[Vec<u64>; 2]> = (0..offs.len())
        .map(|_| [vec![0u64; len + 1], vec![0u64; len + 1]])
        .collect();
    for part in parts {
        for (acc, h) in out.iter_mut().zip(part) {
            for p in 0..2 {
                for (a, b) in acc[p].iter_mut().zip(&h[p]) {
                    *a += b;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::row_basis;
    use crate::lattice::{build_square_lattice, Boundary};

    #[test]
    fn spin_histogram_totals() {
        let lat = build_square_lattice(3, 2, Boundary::Open).unwrap();
        let c = CouplingAssignment::ferromagnetic(&lat, 1.0).unwrap();
        let h = spin_histogram(&c, Some(0));
        let up: u64 = h.up.iter().sum();
        let down: u64 = h.down.iter().sum();
        assert_eq!(up, 32);
        assert_eq!(down, 32);
        // all spins up: every bond satisfied
        assert_eq!(h.up[2 * lat.n_edges()], 1);
    }

    #[test]
    fn chunked_and_single_pass_agree() {
        // 4x4 open = 16 free spins, above the parallel threshold
        let lat = build_square_lattice(4, 4, Boundary::Open).unwrap();
        let mut signs = BitVector::zeros(lat.n_edges());
        signs.set(3, true);
        signs.set(17, true);
        let c = CouplingAssignment::new(&lat, signs.clone(), 1.0, 1.0).unwrap();
        let h = spin_histogram(&c, Some(5));
        let basis = row_basis(&lat.free_vertex_supports()).unwrap();
        let g = group_histograms(&basis, &[signs], None);
        // each spin configuration maps to exactly one group element, and
        // k = M - 2|x ⊕ η|
        let m = lat.n_edges();
        for d in 0..=m {
            let k = m as i64 - 2 * d as i64;
            let slot = (k + m as i64) as usize;
            assert_eq!(g[0][0][d], h.up[slot] + h.down[slot]);
        }
    }
}
