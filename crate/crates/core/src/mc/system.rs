use crate::couplings::CouplingAssignment;
use crate::error::{Error, Result};

/// Sparse ±1 coupling graph for Metropolis updates.
///
/// Spins are `0..n`; slot `n` is a fixed `+1` spin standing for the clamped
/// frame of an open lattice (unused on periodic or file-defined systems).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    n: usize,
    offsets: Vec<u32>,
    nbrs: Vec<u32>,
    signs: Vec<i8>,
    max_degree: usize,
}

impl SpinSystem {
    /// Free spins of the lattice with the couplings' signs; bonds to the
    /// frame become fields from the fixed slot.
    pub fn from_couplings(c: &CouplingAssignment) -> Self {
        let lat = c.lattice();
        let n = lat.n_free_spins();
        let pairs: Vec<(usize, usize, i8)> = lat
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &[a, b])| (a.min(n), b.min(n), c.sign(e) as i8))
            .collect();
        Self::build(n, &pairs)
    }

    /// Free-standing system from `(i, j, sign)` bonds; no clamped spin.
    pub fn from_pairs(n_spins: usize, pairs: &[(usize, usize, i8)]) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::InvalidDimension {
                what: "n_spins",
                min: 1,
                got: 0,
            });
        }
        for &(a, b, s) in pairs {
            for v in [a, b] {
                if v >= n_spins {
                    return Err(Error::Index {
                        index: v,
                        len: n_spins,
                    });
                }
            }
            if a == b {
                return Err(Error::InvalidHypergraph(format!("self-coupling on spin {a}")));
            }
            if s != 1 && s != -1 {
                return Err(Error::InvalidHypergraph(format!("coupling sign {s} is not ±1")));
            }
        }
        Ok(Self::build(n_spins, pairs))
    }

    fn build(n: usize, pairs: &[(usize, usize, i8)]) -> Self {
        let mut adj: Vec<Vec<(u32, i8)>> = vec![Vec::new(); n];
        for &(a, b, s) in pairs {
            if a < n {
                adj[a].push((b as u32, s));
            }
            if b < n {
                adj[b].push((a as u32, s));
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut nbrs = Vec::new();
        let mut signs = Vec::new();
        offsets.push(0);
        for list in &adj {
            for &(j, s) in list {
                nbrs.push(j);
                signs.push(s);
            }
            offsets.push(nbrs.len() as u32);
        }
        let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
        SpinSystem {
            n,
            offsets,
            nbrs,
            signs,
            max_degree,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `Σ_j sign_ij s_j`.
    #[inline]
    pub(crate) fn local_field(&self, spins: &[i8], i: usize) -> i32 {
        let lo = self.offsets[i] as usize;
        let hi = self.offsets[i + 1] as usize;
        let mut h = 0i32;
        for k in lo..hi {
            h += (self.signs[k] * spins[self.nbrs[k] as usize]) as i32;
        }
        h
    }

    /// `Σ_bonds sign_ij s_i s_j`, each bond counted once.
    pub fn bond_sum(&self, spins: &[i8]) -> i64 {
        let mut twice = 0i64;
        let mut frame = 0i64;
        for i in 0..self.n {
            let lo = self.offsets[i] as usize;
            let hi = self.offsets[i + 1] as usize;
            for k in lo..hi {
                let j = self.nbrs[k] as usize;
                let t = (self.signs[k] * spins[i] * spins[j]) as i64;
                if j == self.n {
                    frame += t;
                } else {
                    twice += t;
                }
            }
        }
        twice / 2 + frame
    }
}
