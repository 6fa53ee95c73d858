//! CSS codes as hypergraphs, hypergraph duals, and the classical spin
//! models they define.
//!
//! A CSS code's X sector is a hypergraph whose vertices are qubits and whose
//! edges are check supports. Its dual has one spin per check and one
//! interaction per qubit, coupling the checks that act on that qubit.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{gf2_rank, BitVector};
use crate::hypergraph::Hypergraph;
use crate::lattice::Lattice2D;
use crate::mc::SpinSystem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CssCode {
    pub name: String,
    pub n_qubits: usize,
    pub x_checks: Vec<BitVector>,
    pub z_checks: Vec<BitVector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    X,
    Z,
}

impl CssCode {
    /// Rejects checks of the wrong length and pairs of X and Z checks with
    /// odd overlap.
    pub fn new(name: &str, n_qubits: usize, x_checks: Vec<BitVector>, z_checks: Vec<BitVector>) -> Result<Self> {
        for c in x_checks.iter().chain(&z_checks) {
            if c.len() != n_qubits {
                return Err(Error::Shape {
                    expected: n_qubits,
                    found: c.len(),
                });
            }
        }
        let code = CssCode {
            name: name.to_string(),
            n_qubits,
            x_checks,
            z_checks,
        };
        if let Some((x_check, z_check)) = code.first_anticommuting_pair() {
            return Err(Error::NotCommuting { x_check, z_check });
        }
        Ok(code)
    }

    pub fn first_anticommuting_pair(&self) -> Option<(usize, usize)> {
        for (i, x) in self.x_checks.iter().enumerate() {
            for (j, z) in self.z_checks.iter().enumerate() {
                if x.overlap(z).expect("lengths checked") % 2 == 1 {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn is_css(&self) -> bool {
        self.first_anticommuting_pair().is_none()
    }

    pub fn checks(&self, sector: Sector) -> &[BitVector] {
        match sector {
            Sector::X => &self.x_checks,
            Sector::Z => &self.z_checks,
        }
    }

    pub fn rank(&self, sector: Sector) -> usize {
        gf2_rank(self.checks(sector)).expect("lengths checked")
    }

    /// `n - rank(X) - rank(Z)`.
    pub fn logical_qubits(&self) -> usize {
        self.n_qubits - self.rank(Sector::X) - self.rank(Sector::Z)
    }

    /// Ground-space dimension `2^k`, or `None` if it overflows `u128`.
    pub fn degeneracy(&self) -> Option<u128> {
        1u128.checked_shl(self.logical_qubits() as u32)
    }

    pub fn check_weights(&self, sector: Sector) -> Vec<usize> {
        self.checks(sector).iter().map(BitVector::weight).collect()
    }
}

/// Toric code on a lattice: X checks on the free vertices, Z checks on the
/// faces.
pub fn build_toric(lattice: &Lattice2D) -> Result<CssCode> {
    let name = format!(
        "toric-{:?}-{}x{}",
        lattice.boundary(),
        lattice.width(),
        lattice.height()
    )
    .to_lowercase();
    CssCode::new(&name, lattice.n_edges(), lattice.free_vertex_supports(), lattice.face_supports())
}

/// X sector of the toric code on an arbitrary graph given as a 2-uniform
/// hypergraph: one qubit per graph edge, one check per vertex star.
pub fn toric_x_hypergraph(graph: &Hypergraph) -> Result<Hypergraph> {
    if let Some(i) = graph.edges().iter().position(|e| e.len() != 2) {
        return Err(Error::InvalidHypergraph(format!("edge {i} is not a graph edge")));
    }
    let mut stars = vec![Vec::new(); graph.n_vertices()];
    for (q, e) in graph.edges().iter().enumerate() {
        for &v in e {
            stars[v].push(q);
        }
    }
    if let Some(v) = stars.iter().position(Vec::is_empty) {
        return Err(Error::InvalidHypergraph(format!("vertex {v} has no incident edge")));
    }
    Hypergraph::new(graph.n_edges(), stars)
}

fn check_extent(what: &'static str, got: usize) -> Result<()> {
    if got < 2 {
        Err(Error::InvalidDimension { what, min: 2, got })
    } else {
        Ok(())
    }
}

/// 2D color code on a periodic honeycomb with `2·extent` rows and
/// `6·extent` columns of qubits (brick-wall layout). Every hexagon carries
/// an X and a Z check; hexagons are 3-colourable, so each qubit sits on
/// three hexagons of distinct colours.
pub fn build_color_2d(extent: usize) -> Result<CssCode> {
    check_extent("extent", extent)?;
    let (rows, cols) = (2 * extent, 6 * extent);
    let n = rows * cols;
    let q = |r: usize, c: usize| (r % rows) * cols + (c % cols);
    let mut hexes = Vec::with_capacity(n / 2);
    for r in 0..rows {
        for c in (r % 2..cols).step_by(2) {
            let support = (0..3).flat_map(|d| [q(r, c + d), q(r + 1, c + d)]);
            hexes.push(BitVector::from_indices(n, support)?);
        }
    }
    CssCode::new(&format!("color-2d-{extent}"), n, hexes.clone(), hexes)
}

/// Colour of the hexagon whose top-left qubit is at `(row, col)`.
pub fn color_2d_hexagon_color(row: usize, col: usize, extent: usize) -> usize {
    let rows = 2 * extent;
    let shifted = (col + rows * 3 - row) / 2;
    (shifted + 3 * rows - row) % 3
}

/// X-cube model on the periodic `lx × ly × lz` cubic lattice: qubits on
/// links, one 12-qubit X check per cube, and three 4-qubit Z crosses per
/// vertex (one per coordinate plane).
pub fn build_xcube(lx: usize, ly: usize, lz: usize) -> Result<CssCode> {
    check_extent("lx", lx)?;
    check_extent("ly", ly)?;
    check_extent("lz", lz)?;
    let dims = [lx, ly, lz];
    let n_sites = lx * ly * lz;
    let n = 3 * n_sites;
    let site = |p: [usize; 3]| ((p[2] % lz) * ly + (p[1] % ly)) * lx + (p[0] % lx);
    let link = |p: [usize; 3], dir: usize| 3 * site(p) + dir;
    let shift = |p: [usize; 3], dir: usize, by: usize| {
        let mut out = p;
        out[dir] = (out[dir] + by) % dims[dir];
        out
    };
    let mut cubes = Vec::with_capacity(n_sites);
    let mut crosses = Vec::with_capacity(3 * n_sites);
    for z in 0..lz {
        for y in 0..ly {
            for x in 0..lx {
                let p = [x, y, z];
                let mut cube = Vec::with_capacity(12);
                for dir in 0..3 {
                    let (a, b) = ((dir + 1) % 3, (dir + 2) % 3);
                    for (da, db) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                        cube.push(link(shift(shift(p, a, da), b, db), dir));
                    }
                }
                cubes.push(BitVector::from_indices(n, cube)?);
                // the cross in the plane orthogonal to `normal`
                for normal in 0..3 {
                    let (a, b) = ((normal + 1) % 3, (normal + 2) % 3);
                    let cross = [
                        link(p, a),
                        link(shift(p, a, dims[a] - 1), a),
                        link(p, b),
                        link(shift(p, b, dims[b] - 1), b),
                    ];
                    crosses.push(BitVector::from_indices(n, cross)?);
                }
            }
        }
    }
    CssCode::new(&format!("xcube-{lx}x{ly}x{lz}"), n, cubes, crosses)
}

/// Vertices are qubits, edges are the supports of the sector's checks.
pub fn code_to_hypergraph(code: &CssCode, sector: Sector) -> Result<Hypergraph> {
    let checks = code.checks(sector);
    if checks.is_empty() {
        return Err(Error::EmptySector(match sector {
            Sector::X => "X",
            Sector::Z => "Z",
        }));
    }
    Hypergraph::new(code.n_qubits, checks.iter().map(|c| c.ones_iter().collect()).collect())
}

/// Exchange vertices and edges: dual vertex `i` is edge `i` of `h`, and dual
/// edge `j` lists the edges of `h` containing vertex `j`. Duplicate edges of
/// `h` are collapsed first (with a warning).
pub fn dual_hypergraph(h: &Hypergraph) -> Result<Hypergraph> {
    let isolated = h.isolated_vertices();
    if !isolated.is_empty() {
        return Err(Error::NotDualizable(isolated));
    }
    let mut h = h.clone();
    let removed = h.collapse_duplicate_edges();
    if removed > 0 {
        log::warn!("collapsed {removed} duplicate hyperedges before dualizing");
    }
    let mut dual_edges = vec![Vec::new(); h.n_vertices()];
    for (i, e) in h.edges().iter().enumerate() {
        for &v in e {
            dual_edges[v].push(i);
        }
    }
    Hypergraph::new(h.n_edges(), dual_edges)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub spins: Vec<usize>,
    /// `+1` ferromagnetic, `-1` antiferromagnetic.
    pub sign: i8,
}

/// Classical model `H = -J Σ_a sign_a Π_{i∈a} s_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinModel {
    pub n_spins: usize,
    pub interactions: Vec<Interaction>,
}

impl SpinModel {
    /// `(body size, count)`, ascending by size.
    pub fn body_size_histogram(&self) -> Vec<(usize, usize)> {
        let mut h = std::collections::BTreeMap::new();
        for a in &self.interactions {
            *h.entry(a.spins.len()).or_insert(0) += 1;
        }
        h.into_iter().collect()
    }

    /// Coupling file: the spin count on the first line, then one line per
    /// interaction with its spin indices followed by its sign (`1` or `-1`).
    pub fn to_coupling_text(&self) -> String {
        let mut out = format!("{}\n", self.n_spins);
        for a in &self.interactions {
            for v in &a.spins {
                write!(out, "{v} ").expect("write to string");
            }
            writeln!(out, "{}", a.sign).expect("write to string");
        }
        out
    }

    pub fn from_coupling_text(text: &str) -> Result<Self> {
        let mut n_spins = None;
        let mut interactions = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            let Some(n) = n_spins else {
                if toks.len() != 1 {
                    return Err(err("header must be a single spin count".into()));
                }
                n_spins = Some(toks[0].parse::<usize>().map_err(|_| err(format!("bad spin count {:?}", toks[0])))?);
                continue;
            };
            if toks.len() < 2 {
                return Err(err("an interaction needs at least one spin and a sign".into()));
            }
            let sign = match toks[toks.len() - 1] {
                "1" | "+1" => 1,
                "-1" => -1,
                other => return Err(err(format!("sign must be 1 or -1, got {other:?}"))),
            };
            let mut spins = Vec::with_capacity(toks.len() - 1);
            for tok in &toks[..toks.len() - 1] {
                let v: usize = tok.parse().map_err(|_| err(format!("expected a spin index, got {tok:?}")))?;
                if v >= n {
                    return Err(err(format!("spin {v} out of range for {n} spins")));
                }
                spins.push(v);
            }
            let mut sorted = spins.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(err("interaction repeats a spin".into()));
            }
            interactions.push(Interaction { spins, sign });
        }
        let n_spins = n_spins.ok_or(Error::Parse {
            line: 1,
            message: "missing spin-count header".into(),
        })?;
        Ok(SpinModel { n_spins, interactions })
    }

    /// Pair-coupled system for the Monte Carlo runner; fails on any
    /// interaction that is not 2-body.
    pub fn to_pair_system(&self) -> Result<SpinSystem> {
        let mut pairs = Vec::with_capacity(self.interactions.len());
        for (i, a) in self.interactions.iter().enumerate() {
            if a.spins.len() != 2 {
                return Err(Error::InvalidHypergraph(format!(
                    "interaction {i} is {}-body; only 2-body models can be simulated",
                    a.spins.len()
                )));
            }
            pairs.push((a.spins[0], a.spins[1], a.sign));
        }
        SpinSystem::from_pairs(self.n_spins, &pairs)
    }
}

/// One interaction per hyperedge, all with the placeholder sign `+1`.
pub fn spin_model_from_hypergraph(h: &Hypergraph) -> SpinModel {
    SpinModel {
        n_spins: h.n_vertices(),
        interactions: h
            .edges()
            .iter()
            .map(|e| Interaction {
                spins: e.clone(),
                sign: 1,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_square_lattice, Boundary};
    use proptest::prelude::*;

    #[test]
    fn toric_counts_and_degeneracy() {
        for l in [2, 3, 4] {
            let lat = build_square_lattice(l, l, Boundary::Torus).unwrap();
            let code = build_toric(&lat).unwrap();
            assert_eq!(code.n_qubits, 2 * l * l);
            assert_eq!((code.x_checks.len(), code.z_checks.len()), (l * l, l * l));
            assert_eq!(code.rank(Sector::X), l * l - 1);
            assert_eq!(code.rank(Sector::Z), l * l - 1);
            assert_eq!(code.degeneracy(), Some(4));
        }
        let open = build_toric(&build_square_lattice(3, 3, Boundary::Open).unwrap()).unwrap();
        assert!(open.is_css());
        assert_eq!(open.logical_qubits(), 0);
    }

    #[test]
    fn toric_hypergraph_edge_sizes() {
        let lat = build_square_lattice(3, 3, Boundary::Torus).unwrap();
        let h = code_to_hypergraph(&build_toric(&lat).unwrap(), Sector::X).unwrap();
        assert_eq!(h.n_edges(), 9);
        assert!(h.edges().iter().all(|e| e.len() == 4));
        let open = build_square_lattice(3, 3, Boundary::Open).unwrap();
        let z = code_to_hypergraph(&build_toric(&open).unwrap(), Sector::Z).unwrap();
        assert_eq!(z.edge_size_histogram(), vec![(3, 8), (4, 4)]);
    }

    #[test]
    fn toric_dual_is_ising_graph() {
        let lat = build_square_lattice(4, 3, Boundary::Torus).unwrap();
        let h = code_to_hypergraph(&build_toric(&lat).unwrap(), Sector::X).unwrap();
        let dual = dual_hypergraph(&h).unwrap();
        assert!(dual.same_up_to_edge_order(&lat.to_hypergraph()));
        let model = spin_model_from_hypergraph(&dual);
        assert_eq!(model.body_size_histogram(), vec![(2, lat.n_edges())]);
    }

    #[test]
    fn xcube_structure() {
        let code = build_xcube(2, 2, 2).unwrap();
        assert_eq!(code.n_qubits, 24);
        assert_eq!(code.x_checks.len(), 8);
        assert!(code.check_weights(Sector::X).iter().all(|&w| w == 12));
        assert!(code.check_weights(Sector::Z).iter().all(|&w| w == 4));
        let h = code_to_hypergraph(&code, Sector::X).unwrap();
        let dual = dual_hypergraph(&h).unwrap();
        assert_eq!(dual.n_vertices(), 8);
        assert_eq!(dual.n_edges(), 24);
        assert!(dual.edges().iter().all(|e| e.len() == 4));
        for l in [2, 3] {
            let c = build_xcube(l, l, l).unwrap();
            assert!(c.is_css());
            assert_eq!(c.logical_qubits(), 6 * l - 3);
        }
        let c = build_xcube(3, 2, 4).unwrap();
        assert_eq!(c.n_qubits, 72);
        assert!(c.is_css());
        assert!(matches!(build_xcube(1, 2, 2), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn color_code_structure() {
        for extent in [2, 3] {
            let code = build_color_2d(extent).unwrap();
            assert!(code.is_css());
            assert!(code.check_weights(Sector::X).iter().all(|&w| w == 6));
            assert_eq!(code.x_checks.len(), code.n_qubits / 2);
            assert_eq!(code.logical_qubits(), 4);
            let dual = dual_hypergraph(&code_to_hypergraph(&code, Sector::X).unwrap()).unwrap();
            assert!(dual.edges().iter().all(|e| e.len() == 3));
            let model = spin_model_from_hypergraph(&dual);
            assert_eq!(model.body_size_histogram(), vec![(3, code.n_qubits)]);
        }
        assert!(matches!(build_color_2d(1), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn color_code_hexagons_are_three_coloured() {
        let extent = 2;
        let (rows, cols) = (2 * extent, 6 * extent);
        let code = build_color_2d(extent).unwrap();
        let origins: Vec<(usize, usize)> = (0..rows).flat_map(|r| (r % 2..cols).step_by(2).map(move |c| (r, c))).collect();
        for (i, a) in code.x_checks.iter().enumerate() {
            for (j, b) in code.x_checks.iter().enumerate().skip(i + 1) {
                if a.overlap(b).unwrap() > 0 {
                    let (ra, ca) = origins[i];
                    let (rb, cb) = origins[j];
                    assert_ne!(
                        color_2d_hexagon_color(ra, ca, extent),
                        color_2d_hexagon_color(rb, cb, extent),
                        "hexagons {i} and {j}"
                    );
                }
            }
        }
    }

    #[test]
    fn dual_examples_and_errors() {
        let h = Hypergraph::new(2, vec![vec![0, 1]]).unwrap();
        let d = dual_hypergraph(&h).unwrap();
        assert_eq!(d.n_vertices(), 1);
        assert_eq!(d.edges(), &[vec![0], vec![0]]);
        let iso = Hypergraph::new(4, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(dual_hypergraph(&iso), Err(Error::NotDualizable(vec![3])));
        let dup = Hypergraph::new(3, vec![vec![0, 1], vec![1, 0], vec![1, 2]]).unwrap();
        assert_eq!(dual_hypergraph(&dup).unwrap().n_vertices(), 2);
    }

    #[test]
    fn empty_sector_and_anticommuting_checks() {
        let code = CssCode::new("x-only", 2, vec![BitVector::ones(2)], vec![]).unwrap();
        assert_eq!(code_to_hypergraph(&code, Sector::Z), Err(Error::EmptySector("Z")));
        let bad = CssCode::new(
            "bad",
            2,
            vec![BitVector::from_indices(2, [0]).unwrap()],
            vec![BitVector::ones(2)],
        );
        assert_eq!(bad, Err(Error::NotCommuting { x_check: 0, z_check: 0 }));
    }

    #[test]
    fn coupling_file_roundtrip() {
        let lat = build_square_lattice(3, 3, Boundary::Torus).unwrap();
        let mut model = spin_model_from_hypergraph(&lat.to_hypergraph());
        model.interactions[2].sign = -1;
        let text = model.to_coupling_text();
        assert!(text.starts_with("9\n0 1 1\n"));
        let back = SpinModel::from_coupling_text(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_pair_system().unwrap().n_spins(), 9);
        let three = SpinModel::from_coupling_text("3\n0 1 2 1\n").unwrap();
        assert!(three.to_pair_system().is_err());
        for (bad, line) in [("3\n0 1 2\n", 2), ("3\n0 x 1\n", 2), ("2\n\n0 5 1\n", 3), ("2\n0 0 1\n", 2), ("", 1), ("2 2\n", 1)] {
            match SpinModel::from_coupling_text(bad) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{bad:?}"),
                other => panic!("{bad:?}: {other:?}"),
            }
        }
    }

    // every vertex covered and no repeated edge
    fn arb_hypergraph() -> impl Strategy<Value = Hypergraph> {
        (2usize..9).prop_flat_map(|n| {
            prop::collection::vec(prop::collection::btree_set(0..n, 1..=n.min(4)), 1..10).prop_map(move |sets| {
                let mut edges: Vec<Vec<usize>> = sets.into_iter().map(|e| e.into_iter().collect()).collect();
                let k = edges.len();
                for v in 0..n {
                    if !edges.iter().any(|e| e.contains(&v)) {
                        edges[v % k].push(v);
                    }
                }
                let mut h = Hypergraph::new(n, edges).unwrap();
                h.collapse_duplicate_edges();
                h
            })
        })
    }

    fn arb_graph() -> impl Strategy<Value = Hypergraph> {
        (2usize..8).prop_flat_map(|n| {
            prop::collection::btree_set((0..n, 0..n), 1..20).prop_map(move |pairs| {
                let edges: Vec<Vec<usize>> = pairs.into_iter().filter(|(a, b)| a < b).map(|(a, b)| vec![a, b]).collect();
                Hypergraph::new(n, edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn dual_is_an_involution(h in arb_hypergraph()) {
            let d = dual_hypergraph(&h).unwrap();
            prop_assert_eq!(d.n_vertices(), h.n_edges());
            prop_assert_eq!(d.n_edges(), h.n_vertices());
            prop_assume!(!d.has_duplicate_edges());
            prop_assert!(dual_hypergraph(&d).unwrap().same_up_to_edge_order(&h));
        }

        #[test]
        fn toric_dual_on_any_graph_is_the_graph(g in arb_graph()) {
            prop_assume!(g.isolated_vertices().is_empty() && g.n_edges() > 0);
            let x = toric_x_hypergraph(&g).unwrap();
            // an isolated edge gives its two endpoints the same star
            prop_assume!(!x.has_duplicate_edges());
            let d = dual_hypergraph(&x).unwrap();
            prop_assert!(d.same_up_to_edge_order(&g));
            prop_assert!(spin_model_from_hypergraph(&d).interactions.iter().all(|a| a.spins.len() == 2));
        }

        #[test]
        fn built_codes_commute(extent in 2usize..4, l in 2usize..4) {
            prop_assert!(build_color_2d(extent).unwrap().is_css());
            prop_assert!(build_xcube(l, l + 1, 2).unwrap().is_css());
            let lat = build_square_lattice(l + 1, l, Boundary::Open).unwrap();
            prop_assert!(build_toric(&lat).unwrap().is_css());
        }
    }
}
