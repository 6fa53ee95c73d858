//! Hypergraphs: a vertex count plus a list of hyperedges (vertex subsets).
//!
//! Text format: the first non-blank line holds `n_vertices`; every following
//! non-blank line is one hyperedge, its vertex indices separated by spaces.
//! Lines starting with `#` are comments.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    n_vertices: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Vertices within each edge are sorted; repeated vertices inside one
    /// edge are rejected.
    pub fn new(n_vertices: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut checked = Vec::with_capacity(edges.len());
        for (i, mut e) in edges.into_iter().enumerate() {
            if e.is_empty() {
                return Err(Error::InvalidHypergraph(format!("edge {i} is empty")));
            }
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {i} repeats a vertex"
                )));
            }
            if let Some(&v) = e.last().filter(|&&v| v >= n_vertices) {
                return Err(Error::Index {
                    index: v,
                    len: n_vertices,
                });
            }
            checked.push(e);
        }
        Ok(Hypergraph {
            n_vertices,
            edges: checked,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Number of edges containing each vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_vertices];
        for e in &self.edges {
            for &v in e {
                d[v] += 1;
            }
        }
        d
    }

    pub fn isolated_vertices(&self) -> Vec<usize> {
        self.degrees()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(v, _)| v)
            .collect()
    }

    pub fn has_duplicate_edges(&self) -> bool {
        let mut sorted = self.edges.clone();
        sorted.sort();
        sorted.windows(2).any(|w| w[0] == w[1])
    }

    /// Drops repeated hyperedges, keeping first occurrences. Returns how many
    /// were removed.
    pub fn collapse_duplicate_edges(&mut self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let before = self.edges.len();
        self.edges.retain(|e| seen.insert(e.clone()));
        before - self.edges.len()
    }

    /// Edge multiset in sorted order. Two hypergraphs on the same labelled
    /// vertex set are equal up to edge order iff their canonical edges agree.
    pub fn canonical_edges(&self) -> Vec<Vec<usize>> {
        let mut e = self.edges.clone();
        e.sort();
        e
    }

    pub fn same_up_to_edge_order(&self, other: &Hypergraph) -> bool {
        self.n_vertices == other.n_vertices && self.canonical_edges() == other.canonical_edges()
    }

    /// Histogram of edge sizes as `(size, count)` pairs, ascending by size.
    pub fn edge_size_histogram(&self) -> Vec<(usize, usize)> {
        let mut h = std::collections::BTreeMap::new();
        for e in &self.edges {
            *h.entry(e.len()).or_insert(0) += 1;
        }
        h.into_iter().collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n_vertices);
        for e in &self.edges {
            let mut first = true;
            for v in e {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{v}").expect("write to string");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n_vertices = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse = |tok: &str| {
                tok.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("expected a vertex index, got {tok:?}"),
                })
            };
            match n_vertices {
                None => {
                    let mut toks = line.split_whitespace();
                    let n = parse(toks.next().expect("non-empty line"))?;
                    if toks.next().is_some() {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "header must be a single vertex count".into(),
                        });
                    }
                    n_vertices = Some(n);
                }
                Some(n) => {
                    let edge = line.split_whitespace().map(parse).collect::<Result<Vec<_>>>()?;
                    if let Some(&bad) = edge.iter().find(|&&v| v >= n) {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("vertex {bad} out of range for {n} vertices"),
                        });
                    }
                    let mut sorted = edge.clone();
                    sorted.sort_unstable();
                    if sorted.windows(2).any(|w| w[0] == w[1]) {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "edge repeats a vertex".into(),
                        });
                    }
                    edges.push(edge);
                }
            }
        }
        let n = n_vertices.ok_or(Error::Parse {
            line: 1,
            message: "missing vertex-count header".into(),
        })?;
        Hypergraph::new(n, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let h = Hypergraph::new(5, vec![vec![0, 1], vec![4, 2, 3], vec![1]]).unwrap();
        let text = h.to_text();
        assert_eq!(text, "5\n0 1\n2 3 4\n1\n");
        assert_eq!(Hypergraph::from_text(&text).unwrap(), h);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Hypergraph::from_text("3\n0 1\n1 x\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                message: "expected a vertex index, got \"x\"".into()
            }
        );
        let err = Hypergraph::from_text("# comment\n2\n\n0 5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }));
        assert!(matches!(
            Hypergraph::from_text("").unwrap_err(),
            Error::Parse { .. }
        ));
        assert!(matches!(
            Hypergraph::from_text("3 4\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(Hypergraph::new(2, vec![vec![]]).is_err());
        assert!(Hypergraph::new(2, vec![vec![0, 2]]).is_err());
        assert!(Hypergraph::new(2, vec![vec![1, 1]]).is_err());
    }

    #[test]
    fn duplicates_and_isolated() {
        let mut h = Hypergraph::new(4, vec![vec![0, 1], vec![1, 0], vec![2]]).unwrap();
        assert_eq!(h.isolated_vertices(), vec![3]);
        assert!(h.has_duplicate_edges());
        assert_eq!(h.collapse_duplicate_edges(), 1);
        assert!(!h.has_duplicate_edges());
        assert_eq!(h.edge_size_histogram(), vec![(1, 1), (2, 1)]);
    }
}
