use crate::error::{check_domain, Error, Result};
use crate::gf2::BitVector;
use crate::lattice::Lattice2D;

/// Smallest annealed flip probability accepted; `q = 0` is `βJ = ∞`.
pub const Q_MIN: f64 = 1e-6;

/// `βJ = ½ ln((1-q)/q)`, the inverse of [`q_from_beta_j`].
pub fn beta_j_from_q(q: f64) -> f64 {
    0.5 * ((1.0 - q) / q).ln()
}

/// `q = e^{-2βJ} / (1 + e^{-2βJ})`.
pub fn q_from_beta_j(beta_j: f64) -> f64 {
    let t = (-2.0 * beta_j).exp();
    t / (1.0 + t)
}

pub fn check_q(q: f64) -> Result<()> {
    check_domain("q", q, q > 0.0 && q <= 0.5, "(0, 1/2]")
}

pub fn check_p(p: f64) -> Result<()> {
    check_domain("p", p, (0.0..=0.5).contains(&p), "[0, 1/2]")
}

/// Quenched ±J couplings on a lattice: bit `e` of `signs` set means
/// `J_e = -J` (the bond belongs to the antiferromagnetic set), clear means
/// `J_e = +J`. The same bit vector is the first-channel error pattern `η`.
#[derive(Debug, Clone)]
pub struct CouplingAssignment<'a> {
    lattice: &'a Lattice2D,
    signs: BitVector,
    j: f64,
    beta: f64,
}

impl<'a> CouplingAssignment<'a> {
    pub fn new(lattice: &'a Lattice2D, signs: BitVector, j: f64, beta: f64) -> Result<Self> {
        if signs.len() != lattice.n_edges() {
            return Err(Error::Shape {
                expected: lattice.n_edges(),
                found: signs.len(),
            });
        }
        check_domain("J", j, j > 0.0, "(0, inf)")?;
        check_domain("beta", beta, beta >= 0.0, "[0, inf)")?;
        Ok(CouplingAssignment {
            lattice,
            signs,
            j,
            beta,
        })
    }

    pub fn ferromagnetic(lattice: &'a Lattice2D, beta_j: f64) -> Result<Self> {
        Self::new(lattice, BitVector::zeros(lattice.n_edges()), 1.0, beta_j)
    }

    /// Couplings flipped on `eta` at the temperature matching annealed flip
    /// probability `q`, with `J = 1`.
    pub fn from_q(lattice: &'a Lattice2D, eta: BitVector, q: f64) -> Result<Self> {
        check_q(q)?;
        Self::new(lattice, eta, 1.0, beta_j_from_q(q))
    }

    pub fn lattice(&self) -> &'a Lattice2D {
        self.lattice
    }

    pub fn signs(&self) -> &BitVector {
        &self.signs
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn beta_j(&self) -> f64 {
        self.beta * self.j
    }

    /// `+1` or `-1`.
    pub fn sign(&self, e: usize) -> i32 {
        if self.signs.get(e) {
            -1
        } else {
            1
        }
    }

    pub fn with_signs(&self, signs: BitVector) -> Result<Self> {
        Self::new(self.lattice, signs, self.j, self.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_square_lattice, Boundary};

    #[test]
    fn q_and_beta_j_are_inverse() {
        for q in [1e-6, 0.01, 0.1, 0.25, 0.4999, 0.5] {
            let bj = beta_j_from_q(q);
            assert!((q_from_beta_j(bj) - q).abs() < 1e-14);
        }
        assert_eq!(beta_j_from_q(0.5), 0.0);
    }

    #[test]
    fn validation() {
        let lat = build_square_lattice(2, 2, Boundary::Torus).unwrap();
        assert!(CouplingAssignment::new(&lat, BitVector::zeros(3), 1.0, 1.0).is_err());
        assert!(CouplingAssignment::new(&lat, BitVector::zeros(8), 0.0, 1.0).is_err());
        assert!(CouplingAssignment::new(&lat, BitVector::zeros(8), 1.0, -0.1).is_err());
        assert!(CouplingAssignment::from_q(&lat, BitVector::zeros(8), 0.0).is_err());
        assert!(CouplingAssignment::from_q(&lat, BitVector::zeros(8), 0.6).is_err());
        let c = CouplingAssignment::from_q(&lat, BitVector::zeros(8), 0.5).unwrap();
        assert_eq!(c.beta_j(), 0.0);
    }
}
