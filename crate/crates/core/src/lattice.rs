//! Square lattices carrying Ising spins on vertices and toric-code qubits on
//! edges.
//!
//! Two boundary conditions are supported.
//!
//! * `Torus`: an `L_x × L_y` periodic lattice. For row `r` the horizontal
//!   edges `(r,c)–(r,c+1)` take indices `2·W·r + c`, followed by the vertical
//!   edges `(r,c)–(r+1,c)` at `2·W·r + W + c`.
//! * `Open`: `W × H` free spins enclosed by a frame of boundary spins clamped
//!   to `+1`. The whole frame is one vertex (the *ghost*, index `W·H`). Every
//!   spin of the top and bottom rows couples vertically to the frame; spins in
//!   rows `1..H-1` of the outer columns couple horizontally to it. With this
//!   choice every boundary face is a 3-edge chain closed through the ghost and
//!   every interior face is a 4-cycle. Edges are numbered row by row: the
//!   horizontal edges of row `r` (left frame bond, interior bonds, right frame
//!   bond) come first, then the vertical edges joining row `r` to the row
//!   above it (the frame for `r = 0`). The `W` bonds from the bottom row down
//!   to the frame close the list.
//!
//! Faces on both boundaries are the full set of plaquettes, so the XOR of all
//! face supports vanishes and they span the cycle space of the graph.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::hypergraph::Hypergraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    Open,
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceKind {
    Interior,
    Boundary,
}

/// A boundary-anchored string `γ` of edges ending at `endpoint`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringPath {
    pub edges: BitVector,
    pub endpoint: usize,
    /// The string starts on the clamped boundary.
    pub anchored: bool,
}

impl StringPath {
    pub fn weight(&self) -> usize {
        self.edges.weight()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice2D {
    width: usize,
    height: usize,
    boundary: Boundary,
    edges: Vec<[usize; 2]>,
    faces: Vec<Vec<usize>>,
    face_kinds: Vec<FaceKind>,
    vertices: Vec<Vec<usize>>,
    frame_dirs: Vec<Option<Direction>>,
}

pub fn build_square_lattice(width: usize, height: usize, boundary: Boundary) -> Result<Lattice2D> {
    Lattice2D::new(width, height, boundary)
}

impl Lattice2D {
    pub fn new(width: usize, height: usize, boundary: Boundary) -> Result<Self> {
        for (what, got) in [("width", width), ("height", height)] {
            if got < 2 {
                return Err(Error::InvalidDimension { what, min: 2, got });
            }
        }
        let (edges, faces, face_kinds, n_vertices, frame_dirs) = match boundary {
            Boundary::Torus => torus_geometry(width, height),
            Boundary::Open => open_geometry(width, height),
        };
        let mut vertices = vec![Vec::new(); n_vertices];
        for (e, &[a, b]) in edges.iter().enumerate() {
            vertices[a].push(e);
            if b != a {
                vertices[b].push(e);
            }
        }
        Ok(Lattice2D {
            width,
            height,
            boundary,
            edges,
            faces,
            face_kinds,
            vertices,
            frame_dirs,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Number of edges `M` (qubits of the dual toric code).
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Number of vertices including the ghost on open lattices.
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// Spins that are summed over; the ghost is excluded.
    pub fn n_free_spins(&self) -> usize {
        self.width * self.height
    }

    pub fn ghost(&self) -> Option<usize> {
        match self.boundary {
            Boundary::Open => Some(self.width * self.height),
            Boundary::Torus => None,
        }
    }

    pub fn is_ghost(&self, v: usize) -> bool {
        self.ghost() == Some(v)
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn face_kind(&self, f: usize) -> FaceKind {
        self.face_kinds[f]
    }

    /// Edges incident to each vertex.
    pub fn vertices(&self) -> &[Vec<usize>] {
        &self.vertices
    }

    pub fn site(&self, row: usize, col: usize) -> usize {
        assert!(row < self.height && col < self.width);
        row * self.width + col
    }

    pub fn coords(&self, v: usize) -> Option<(usize, usize)> {
        (v < self.n_free_spins()).then(|| (v / self.width, v % self.width))
    }

    pub fn center(&self) -> usize {
        self.site(self.height / 2, self.width / 2)
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n_vertices() {
            Ok(())
        } else {
            Err(Error::Index {
                index: v,
                len: self.n_vertices(),
            })
        }
    }

    pub fn other_end(&self, edge: usize, v: usize) -> usize {
        let [a, b] = self.edges[edge];
        if a == v {
            b
        } else {
            a
        }
    }

    /// Support of `B_F = Π_{e∈∂F} Z_e`.
    pub fn face_support(&self, f: usize) -> BitVector {
        BitVector::from_indices(self.n_edges(), self.faces[f].iter().copied())
            .expect("face edges are in range")
    }

    /// Support of `A_v = Π_{e∋v} X_e`.
    pub fn vertex_support(&self, v: usize) -> BitVector {
        BitVector::from_indices(self.n_edges(), self.vertices[v].iter().copied())
            .expect("vertex edges are in range")
    }

    pub fn face_supports(&self) -> Vec<BitVector> {
        (0..self.n_faces()).map(|f| self.face_support(f)).collect()
    }

    /// Vertex-operator supports of the free spins (the ghost's operator is
    /// the product of all others and is left out).
    pub fn free_vertex_supports(&self) -> Vec<BitVector> {
        (0..self.n_free_spins()).map(|v| self.vertex_support(v)).collect()
    }

    /// Edge set `δS` of a set of flipped spins, i.e. the bonds whose edge
    /// spin `s_i s_j` is `-1`.
    pub fn coboundary(&self, flipped: &[bool]) -> BitVector {
        let mut out = BitVector::zeros(self.n_edges());
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            let fa = flipped.get(a).copied().unwrap_or(false);
            let fb = flipped.get(b).copied().unwrap_or(false);
            if fa != fb {
                out.set(e, true);
            }
        }
        out
    }

    pub(crate) fn horizontal_torus_edge(&self, r: usize, c: usize) -> usize {
        2 * self.width * r + c
    }

    pub(crate) fn vertical_torus_edge(&self, r: usize, c: usize) -> usize {
        2 * self.width * r + self.width + c
    }

    /// X-type non-contractible loops `[T_x¹, T_x²]` on the dual lattice:
    /// `T_x¹` crosses every vertical edge of row 0, `T_x²` every horizontal
    /// edge of column 0.
    pub fn logical_x_loops(&self) -> Result<[BitVector; 2]> {
        self.require(Boundary::Torus)?;
        let m = self.n_edges();
        let t1 = BitVector::from_indices(m, (0..self.width).map(|c| self.vertical_torus_edge(0, c)))?;
        let t2 =
            BitVector::from_indices(m, (0..self.height).map(|r| self.horizontal_torus_edge(r, 0)))?;
        Ok([t1, t2])
    }

    /// Z-type non-contractible loops `[T_z¹, T_z²]`: the horizontal edges of
    /// row 0 and the vertical edges of column 0. `T_z^i` anticommutes with
    /// `T_x^j` exactly when `i != j`.
    pub fn logical_z_loops(&self) -> Result<[BitVector; 2]> {
        self.require(Boundary::Torus)?;
        let m = self.n_edges();
        let t1 =
            BitVector::from_indices(m, (0..self.width).map(|c| self.horizontal_torus_edge(0, c)))?;
        let t2 = BitVector::from_indices(m, (0..self.height).map(|r| self.vertical_torus_edge(r, 0)))?;
        Ok([t1, t2])
    }

    pub(crate) fn require(&self, boundary: Boundary) -> Result<()> {
        if self.boundary == boundary {
            Ok(())
        } else {
            Err(Error::UnsupportedBoundary { expected: boundary })
        }
    }

    /// Graph as a hypergraph of 2-element edges (ghost included).
    pub fn to_hypergraph(&self) -> Hypergraph {
        Hypergraph::new(
            self.n_vertices(),
            self.edges.iter().map(|&[a, b]| vec![a, b]).collect(),
        )
        .expect("lattice edges are valid")
    }

    fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.vertices[a]
            .iter()
            .copied()
            .filter(|&e| self.other_end(e, a) == b)
            .min()
    }

    fn path_from_vertices(&self, site: usize, chain: &[usize]) -> StringPath {
        let mut edges = BitVector::zeros(self.n_edges());
        for w in chain.windows(2) {
            let e = self.edge_between(w[0], w[1]).expect("consecutive vertices are adjacent");
            edges.flip(e);
        }
        StringPath {
            edges,
            endpoint: site,
            anchored: true,
        }
    }

    /// Straight string from the frame to `site` entering from `dir`. Once the
    /// walk reaches the outermost spin in that direction it closes through
    /// that spin's frame bond (preferring one pointing along `dir`).
    pub fn straight_boundary_path(&self, site: usize, dir: Direction) -> Result<StringPath> {
        self.require(Boundary::Open)?;
        let ghost = self.ghost().expect("open lattice");
        self.check_vertex(site)?;
        if site == ghost {
            return Ok(self.path_from_vertices(site, &[]));
        }
        let (mut r, mut c) = self.coords(site).expect("free site");
        let mut chain = vec![site];
        loop {
            let next = match dir {
                Direction::Up => r.checked_sub(1).map(|nr| (nr, c)),
                Direction::Down => (r + 1 < self.height).then_some((r + 1, c)),
                Direction::Left => c.checked_sub(1).map(|nc| (r, nc)),
                Direction::Right => (c + 1 < self.width).then_some((r, c + 1)),
            };
            match next {
                Some((nr, nc)) => {
                    r = nr;
                    c = nc;
                    chain.push(self.site(r, c));
                }
                None => break,
            }
        }
        chain.push(ghost);
        // A corner may have two frame bonds; prefer the one along `dir`.
        let last = self.site(r, c);
        let frame_bonds: Vec<usize> = self.vertices[last]
            .iter()
            .copied()
            .filter(|&e| self.other_end(e, last) == ghost)
            .collect();
        let mut path = self.path_from_vertices(site, &chain[..chain.len() - 1]);
        let preferred = frame_bonds
            .iter()
            .copied()
            .find(|&e| self.bond_direction(e) == Some(dir))
            .or_else(|| frame_bonds.first().copied())
            .expect("outermost spin touches the frame");
        path.edges.flip(preferred);
        Ok(path)
    }

    /// Direction of a frame bond as seen from its free endpoint.
    fn bond_direction(&self, e: usize) -> Option<Direction> {
        self.frame_dirs.get(e).copied().flatten()
    }
}

/// Shortest string of edges from the clamped frame to `site`. Breadth-first
/// search from the ghost visits neighbours in increasing vertex index, so the
/// result is deterministic.
pub fn shortest_boundary_path(lattice: &Lattice2D, site: usize) -> Result<StringPath> {
    lattice.require(Boundary::Open)?;
    lattice.check_vertex(site)?;
    let ghost = lattice.ghost().expect("open lattice");
    let n = lattice.n_vertices();
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[ghost] = true;
    let mut queue = VecDeque::from([ghost]);
    while let Some(v) = queue.pop_front() {
        if v == site {
            break;
        }
        let mut nbrs: Vec<usize> = lattice.vertices[v]
            .iter()
            .map(|&e| lattice.other_end(e, v))
            .collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        for u in nbrs {
            if !seen[u] {
                seen[u] = true;
                parent[u] = v;
                queue.push_back(u);
            }
        }
    }
    let mut chain = vec![site];
    let mut v = site;
    while v != ghost {
        v = parent[v];
        chain.push(v);
    }
    Ok(lattice.path_from_vertices(site, &chain))
}

type Geometry = (
    Vec<[usize; 2]>,
    Vec<Vec<usize>>,
    Vec<FaceKind>,
    usize,
    Vec<Option<Direction>>,
);

fn torus_geometry(w: usize, h: usize) -> Geometry {
    let site = |r: usize, c: usize| (r % h) * w + (c % w);
    let hor = |r: usize, c: usize| 2 * w * (r % h) + (c % w);
    let ver = |r: usize, c: usize| 2 * w * (r % h) + w + (c % w);
    let mut edges = Vec::with_capacity(2 * w * h);
    for r in 0..h {
        for c in 0..w {
            edges.push([site(r, c), site(r, c + 1)]);
        }
        for c in 0..w {
            edges.push([site(r, c), site(r + 1, c)]);
        }
    }
    let mut faces = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            let mut f = vec![hor(r, c), hor(r + 1, c), ver(r, c), ver(r, c + 1)];
            f.sort_unstable();
            faces.push(f);
        }
    }
    let kinds = vec![FaceKind::Interior; faces.len()];
    let dirs = vec![None; edges.len()];
    (edges, faces, kinds, w * h, dirs)
}

fn open_geometry(w: usize, h: usize) -> Geometry {
    let ghost = w * h;
    let site = |r: usize, c: usize| r * w + c;
    let mut edges: Vec<[usize; 2]> = Vec::new();
    let mut dirs: Vec<Option<Direction>> = Vec::new();
    // hor[r][c]: bond (r,c)-(r,c+1); left/right[r]: side frame bonds
    let mut hor = vec![vec![0usize; w - 1]; h];
    let mut left = vec![None; h];
    let mut right = vec![None; h];
    // up[r][c]: bond from (r,c) to the row above (frame for r == 0); up[h] is
    // the bottom frame row
    let mut up = vec![vec![0usize; w]; h + 1];
    for r in 0..h {
        let side = r > 0 && r + 1 < h;
        if side {
            left[r] = Some(edges.len());
            edges.push([site(r, 0), ghost]);
            dirs.push(Some(Direction::Left));
        }
        for c in 0..w - 1 {
            hor[r][c] = edges.len();
            edges.push([site(r, c), site(r, c + 1)]);
            dirs.push(None);
        }
        if side {
            right[r] = Some(edges.len());
            edges.push([site(r, w - 1), ghost]);
            dirs.push(Some(Direction::Right));
        }
        for c in 0..w {
            up[r][c] = edges.len();
            if r == 0 {
                edges.push([site(0, c), ghost]);
                dirs.push(Some(Direction::Up));
            } else {
                edges.push([site(r - 1, c), site(r, c)]);
                dirs.push(None);
            }
        }
    }
    for c in 0..w {
        up[h][c] = edges.len();
        edges.push([site(h - 1, c), ghost]);
        dirs.push(Some(Direction::Down));
    }

    let mut faces = Vec::new();
    let mut kinds = Vec::new();
    let mut push = |mut f: Vec<usize>, k: FaceKind| {
        f.sort_unstable();
        faces.push(f);
        kinds.push(k);
    };
    for r in 0..h - 1 {
        for c in 0..w - 1 {
            push(
                vec![hor[r][c], hor[r + 1][c], up[r + 1][c], up[r + 1][c + 1]],
                FaceKind::Interior,
            );
        }
    }
    for c in 0..w - 1 {
        push(vec![up[0][c], up[0][c + 1], hor[0][c]], FaceKind::Boundary);
    }
    for c in 0..w - 1 {
        push(vec![up[h][c], up[h][c + 1], hor[h - 1][c]], FaceKind::Boundary);
    }
    // Outer columns: the corner spins reach the frame through their vertical
    // bonds.
    let side_bond = |side: &Vec<Option<usize>>, r: usize, col: usize| {
        side[r].unwrap_or(if r == 0 { up[0][col] } else { up[h][col] })
    };
    for r in 0..h - 1 {
        push(
            vec![side_bond(&left, r, 0), side_bond(&left, r + 1, 0), up[r + 1][0]],
            FaceKind::Boundary,
        );
    }
    for r in 0..h - 1 {
        push(
            vec![
                side_bond(&right, r, w - 1),
                side_bond(&right, r + 1, w - 1),
                up[r + 1][w - 1],
            ],
            FaceKind::Boundary,
        );
    }
    (edges, faces, kinds, w * h + 1, dirs)
}
