//! Undirected multigraphs and their Kirchhoff-Symanzik polynomials.
//!
//! A connectivity matrix `F` symmetrizes to `F + F^t`, the adjacency
//! matrix of an undirected multigraph `G(F)` without self-loops.  The
//! class integrals attached to `F` depend only on this multigraph
//! through its Kirchhoff-Symanzik polynomial: the sum, over spanning
//! trees, of the product of the edge variables *outside* the tree.
//! This module builds the graphs, enumerates their spanning trees,
//! forms the polynomial, and decides the two equivalence notions that
//! let distinct matrix classes share integral values: isomorphy of the
//! graphs and equality of the polynomials up to edge relabeling
//! ("gamma-equivalence").

use crate::combinatorics::{int_determinant, permutations, ConnectivityMatrix};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MultiGraphError {
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("edge ({0}, {1}) is a self-loop")]
    SelfLoop(usize, usize),
    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    VertexOutOfRange(usize, usize, usize),
    #[error("graph is not connected")]
    Disconnected,
    #[error("deleting edge {0} disconnects the graph")]
    DisconnectedResult(usize),
    #[error("edge index {0} out of range for {1} edges")]
    EdgeIndex(usize, usize),
    #[error("operation supports at most {limit} edges, graph has {got}")]
    TooManyEdges { got: usize, limit: usize },
    #[error("operation supports at most {limit} vertices, graph has {got}")]
    TooManyVertices { got: usize, limit: usize },
}

const MAX_TREE_EDGES: usize = 12;
const MAX_CANON_VERTICES: usize = 8;

/// A connected undirected multigraph without self-loops.  Edges are
/// stored as `(low, high)` vertex pairs in sorted order, so equal
/// graphs compare equal structurally; parallel edges are repeated
/// entries and remain individually addressable by index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

/// Incremental union-find over a fixed small vertex set.
struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            components: n,
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Returns true if the edge merged two components.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        self.components -= 1;
        true
    }
}

impl MultiGraph {
    /// Validate and canonicalize an edge list over `0..vertex_count`.
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self, MultiGraphError> {
        if vertex_count == 0 {
            return Err(MultiGraphError::NoVertices);
        }
        let mut canonical = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= vertex_count || b >= vertex_count {
                return Err(MultiGraphError::VertexOutOfRange(a, b, vertex_count));
            }
            if a == b {
                return Err(MultiGraphError::SelfLoop(a, b));
            }
            canonical.push((a.min(b), a.max(b)));
        }
        canonical.sort_unstable();
        let mut uf = UnionFind::new(vertex_count);
        for &(a, b) in &canonical {
            uf.union(a, b);
        }
        if uf.components != 1 {
            return Err(MultiGraphError::Disconnected);
        }
        Ok(MultiGraph {
            vertex_count,
            edges: canonical,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as sorted `(low, high)` pairs, in canonical order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// First Betti number `E - V + 1`; the number of independent
    /// cycles, and the length of every polynomial monomial.
    pub fn loop_number(&self) -> usize {
        self.edges.len() + 1 - self.vertex_count
    }

    /// All spanning trees as ascending edge-index lists, in
    /// lexicographic order.  Enumerates the `C(E, V-1)` index subsets
    /// and keeps the acyclic spanning ones, so it is limited to small
    /// graphs (at most 12 edges).
    pub fn spanning_trees(&self) -> Result<Vec<Vec<usize>>, MultiGraphError> {
        if self.edges.len() > MAX_TREE_EDGES {
            return Err(MultiGraphError::TooManyEdges {
                got: self.edges.len(),
                limit: MAX_TREE_EDGES,
            });
        }
        let need = self.vertex_count - 1;
        let mut trees = Vec::new();
        let mut subset: Vec<usize> = (0..need).collect();
        if need == 0 {
            return Ok(vec![Vec::new()]);
        }
        if need > self.edges.len() {
            return Ok(Vec::new()); // cannot happen for connected graphs
        }
        loop {
            let mut uf = UnionFind::new(self.vertex_count);
            let joins = subset
                .iter()
                .filter(|&&e| {
                    let (a, b) = self.edges[e];
                    uf.union(a, b)
                })
                .count();
            if joins == need {
                trees.push(subset.clone());
            }
            // Next combination in lexicographic order.
            let mut i = need;
            loop {
                if i == 0 {
                    return Ok(trees);
                }
                i -= 1;
                if subset[i] != i + self.edges.len() - need {
                    break;
                }
            }
            subset[i] += 1;
            for j in i + 1..need {
                subset[j] = subset[j - 1] + 1;
            }
        }
    }

    /// Spanning-tree count through the reduced Laplacian determinant,
    /// in exact integer arithmetic.  Independent of the subset
    /// enumeration, so the two routes cross-check each other.
    pub fn tree_count_by_determinant(&self) -> i64 {
        let n = self.vertex_count - 1;
        if n == 0 {
            return 1;
        }
        let mut lap = vec![0i64; n * n];
        for &(a, b) in &self.edges {
            for (u, v) in [(a, b), (b, a)] {
                if u > 0 {
                    lap[(u - 1) * n + (u - 1)] += 1;
                    if v > 0 {
                        lap[(u - 1) * n + (v - 1)] -= 1;
                    }
                }
            }
        }
        int_determinant(n, &mut lap)
    }

    /// The Kirchhoff-Symanzik polynomial: one monomial per spanning
    /// tree, consisting of the edge indices *not* in the tree.
    pub fn symanzik(&self) -> Result<SymanzikPolynomial, MultiGraphError> {
        let trees = self.spanning_trees()?;
        let mut monomials: Vec<Vec<usize>> = trees
            .iter()
            .map(|t| (0..self.edges.len()).filter(|e| !t.contains(e)).collect())
            .collect();
        monomials.sort_unstable();
        Ok(SymanzikPolynomial {
            edge_count: self.edges.len(),
            monomials,
        })
    }

    /// The graph with edge `index` removed, if it stays connected.
    pub fn delete_edge(&self, index: usize) -> Result<MultiGraph, MultiGraphError> {
        if index >= self.edges.len() {
            return Err(MultiGraphError::EdgeIndex(index, self.edges.len()));
        }
        let rest: Vec<(usize, usize)> = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != index)
            .map(|(_, &e)| e)
            .collect();
        MultiGraph::new(self.vertex_count, &rest)
            .map_err(|_| MultiGraphError::DisconnectedResult(index))
    }

    /// Lexicographically least edge list over all vertex relabelings;
    /// equal canonical forms mean isomorphic multigraphs.  Exhaustive
    /// over permutations, so limited to at most 8 vertices.
    pub fn canonical_form(&self) -> Result<Vec<(usize, usize)>, MultiGraphError> {
        if self.vertex_count > MAX_CANON_VERTICES {
            return Err(MultiGraphError::TooManyVertices {
                got: self.vertex_count,
                limit: MAX_CANON_VERTICES,
            });
        }
        let mut best: Option<Vec<(usize, usize)>> = None;
        for sigma in permutations(self.vertex_count) {
            let mut mapped: Vec<(usize, usize)> = self
                .edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (sigma[a], sigma[b]);
                    (x.min(y), x.max(y))
                })
                .collect();
            mapped.sort_unstable();
            if best.as_ref().is_none_or(|b| mapped < *b) {
                best = Some(mapped);
            }
        }
        Ok(best.expect("at least the identity relabeling"))
    }

    /// True if the two graphs are isomorphic as multigraphs.
    pub fn isomorphic(&self, other: &MultiGraph) -> Result<bool, MultiGraphError> {
        Ok(self.vertex_count == other.vertex_count
            && self.edges.len() == other.edges.len()
            && self.canonical_form()? == other.canonical_form()?)
    }

    /// Partition the edge indices into deletion orbits: two edges are
    /// in the same orbit when their deletion results are isomorphic.
    /// Edges whose removal disconnects the graph form orbits keyed by
    /// that failure.  Orbits are sorted by smallest member.
    pub fn edge_orbits(&self) -> Result<Vec<Vec<usize>>, MultiGraphError> {
        let mut groups: BTreeMap<Option<Vec<(usize, usize)>>, Vec<usize>> = BTreeMap::new();
        for e in 0..self.edges.len() {
            let key = match self.delete_edge(e) {
                Ok(g) => Some(g.canonical_form()?),
                Err(MultiGraphError::DisconnectedResult(_)) => None,
                Err(other) => return Err(other),
            };
            groups.entry(key).or_default().push(e);
        }
        let mut orbits: Vec<Vec<usize>> = groups.into_values().collect();
        orbits.sort_by_key(|o| o[0]);
        Ok(orbits)
    }

    /// True if the Kirchhoff-Symanzik polynomials agree after some
    /// bijection of edge variables.  Gamma-equivalent graphs have
    /// identical ordered-sector integrands, hence equal scaled vertex
    /// integrals at every order, even when the graphs themselves are
    /// not isomorphic.
    ///
    /// The search assigns edges in order, pruned by per-edge monomial
    /// occurrence counts and pairwise co-occurrence counts; a complete
    /// assignment is accepted only if it maps the full monomial set
    /// onto the other.
    pub fn gamma_equivalent(&self, other: &MultiGraph) -> Result<bool, MultiGraphError> {
        let pa = self.symanzik()?;
        let pb = other.symanzik()?;
        if pa.edge_count != pb.edge_count
            || pa.monomials.len() != pb.monomials.len()
            || pa.monomials.first().map(Vec::len) != pb.monomials.first().map(Vec::len)
        {
            return Ok(false);
        }
        let e = pa.edge_count;
        let occ = |p: &SymanzikPolynomial| -> Vec<usize> {
            let mut c = vec![0usize; e];
            for m in &p.monomials {
                for &i in m {
                    c[i] += 1;
                }
            }
            c
        };
        let cooc = |p: &SymanzikPolynomial| -> Vec<usize> {
            let mut c = vec![0usize; e * e];
            for m in &p.monomials {
                for &i in m {
                    for &j in m {
                        c[i * e + j] += 1;
                    }
                }
            }
            c
        };
        let (occ_a, occ_b) = (occ(&pa), occ(&pb));
        let mut sa = occ_a.clone();
        let mut sb = occ_b.clone();
        sa.sort_unstable();
        sb.sort_unstable();
        if sa != sb {
            return Ok(false);
        }
        let (co_a, co_b) = (cooc(&pa), cooc(&pb));
        let target: BTreeSet<&[usize]> = pb.monomials.iter().map(Vec::as_slice).collect();

        // Depth-first search for an edge bijection.
        #[allow(clippy::too_many_arguments)]
        fn dfs(
            depth: usize,
            e: usize,
            map: &mut Vec<usize>,
            used: &mut Vec<bool>,
            occ_a: &[usize],
            occ_b: &[usize],
            co_a: &[usize],
            co_b: &[usize],
            pa: &SymanzikPolynomial,
            target: &BTreeSet<&[usize]>,
        ) -> bool {
            if depth == e {
                return pa.monomials.iter().all(|m| {
                    let mut mapped: Vec<usize> = m.iter().map(|&i| map[i]).collect();
                    mapped.sort_unstable();
                    target.contains(mapped.as_slice())
                });
            }
            for cand in 0..e {
                if used[cand] || occ_a[depth] != occ_b[cand] {
                    continue;
                }
                if (0..depth).any(|p| co_a[depth * e + p] != co_b[cand * e + map[p]]) {
                    continue;
                }
                map[depth] = cand;
                used[cand] = true;
                if dfs(
                    depth + 1,
                    e,
                    map,
                    used,
                    occ_a,
                    occ_b,
                    co_a,
                    co_b,
                    pa,
                    target,
                ) {
                    return true;
                }
                used[cand] = false;
            }
            false
        }

        let mut map = vec![usize::MAX; e];
        let mut used = vec![false; e];
        Ok(dfs(
            0, e, &mut map, &mut used, &occ_a, &occ_b, &co_a, &co_b, &pa, &target,
        ))
    }
}

impl fmt::Display for MultiGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V={} E={{", self.vertex_count)?;
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}-{b}")?;
        }
        write!(f, "}}")
    }
}

/// Symmetrize a connectivity matrix into its undirected multigraph:
/// `F[i][j] + F[j][i]` parallel edges between vertices `i < j`.
pub fn graph_from_matrix(f: &ConnectivityMatrix) -> MultiGraph {
    let r = f.order();
    let mut edges = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            for _ in 0..f.get(i, j) + f.get(j, i) {
                edges.push((i, j));
            }
        }
    }
    MultiGraph::new(r, &edges).expect("admissible matrices symmetrize to connected graphs")
}

/// A Kirchhoff-Symanzik polynomial: a set of monomials over edge
/// variables, each the complement of one spanning tree.  Monomials are
/// multilinear (no repeated index) and all have the loop number as
/// their degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymanzikPolynomial {
    edge_count: usize,
    monomials: Vec<Vec<usize>>,
}

impl SymanzikPolynomial {
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted monomials, each a sorted list of edge indices.
    pub fn monomials(&self) -> &[Vec<usize>] {
        &self.monomials
    }

    /// Evaluate at an edge-variable assignment.
    ///
    /// # Panics
    /// If `alpha.len()` differs from the edge count.
    pub fn eval(&self, alpha: &[f64]) -> f64 {
        assert_eq!(alpha.len(), self.edge_count, "variable count mismatch");
        self.monomials
            .iter()
            .map(|m| m.iter().map(|&i| alpha[i]).product::<f64>())
            .sum()
    }
}
