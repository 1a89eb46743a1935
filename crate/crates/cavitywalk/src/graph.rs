//! Network topologies and the cavity-cavity coupling matrix.
//!
//! A network node is one cavity mode plus one two-level atom; the graph's
//! adjacency matrix fixes which cavities exchange photons. All builders
//! produce a symmetric, zero-diagonal, non-negative adjacency, so the
//! coupling matrix `K = kappa * A` is real symmetric (Hermitian).

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use thiserror::Error;

/// Grid position of a node, 1-based in both components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeCoord {
    pub i1: usize,
    pub i2: usize,
}

impl NodeCoord {
    pub fn new(i1: usize, i2: usize) -> Self {
        Self { i1, i2 }
    }
}

impl fmt::Display for NodeCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i1, self.i2)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{family} requires n1 >= {min1} and n2 >= {min2}, got {n1} x {n2}")]
    DimensionTooSmall {
        family: &'static str,
        min1: usize,
        min2: usize,
        n1: usize,
        n2: usize,
    },
    #[error("coupling strength must be positive, got {0}")]
    InvalidCoupling(f64),
    #[error("failed to read edge list: {0}")]
    Io(#[from] std::io::Error),
    #[error("edge list line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge list line {line}: self-loop on node {node} (no self-coupling allowed)")]
    SelfLoop { line: usize, node: usize },
    #[error("edge list line {line}: negative weight {weight}")]
    NegativeWeight { line: usize, weight: f64 },
    #[error("edge list line {line}: edge ({from}, {to}) conflicts with an earlier entry")]
    ConflictingEdge { line: usize, from: usize, to: usize },
    #[error("edge list contains no edges; node count cannot be inferred")]
    EmptyEdgeList,
    #[error("adjacency matrix must be square, got {rows} x {cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("adjacency matrix is not symmetric at ({row}, {col})")]
    Asymmetric { row: usize, col: usize },
    #[error("adjacency matrix has a nonzero diagonal entry at node {node}")]
    NonZeroDiagonal { node: usize },
    #[error("adjacency matrix has a negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
}

/// An undirected network of atom-cavity nodes laid out on an `n1 x n2` grid.
///
/// Nodes are addressed either by [`NodeCoord`] or by the linear index
/// `k = (i1 - 1) * n2 + (i2 - 1)`; every other module shares this ordering.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    n1: usize,
    n2: usize,
    adjacency: DMatrix<f64>,
    kappa: f64,
}

impl NetworkGraph {
    /// Periodic grid in both directions: neighbors differ by one step
    /// (mod `n1` or mod `n2`) in exactly one component.
    ///
    /// Both dimensions must be at least 3; at 2 the forward and backward
    /// wrap-around neighbors coincide, which would double adjacency entries
    /// and break the 0/1 contract.
    pub fn torus(n1: usize, n2: usize, kappa: f64) -> Result<Self, GraphError> {
        if n1 < 3 || n2 < 3 {
            return Err(GraphError::DimensionTooSmall {
                family: "torus",
                min1: 3,
                min2: 3,
                n1,
                n2,
            });
        }
        check_kappa(kappa)?;
        let n = n1 * n2;
        let mut adjacency = DMatrix::zeros(n, n);
        let idx = |i1: usize, i2: usize| (i1 - 1) * n2 + (i2 - 1);
        let wrap = |i: usize, len: usize, step: isize| -> usize {
            // 1-based cyclic shift
            let zero = (i as isize - 1 + step).rem_euclid(len as isize);
            zero as usize + 1
        };
        for i1 in 1..=n1 {
            for i2 in 1..=n2 {
                let k = idx(i1, i2);
                adjacency[(k, idx(wrap(i1, n1, 1), i2))] = 1.0;
                adjacency[(k, idx(wrap(i1, n1, -1), i2))] = 1.0;
                adjacency[(k, idx(i1, wrap(i2, n2, 1)))] = 1.0;
                adjacency[(k, idx(i1, wrap(i2, n2, -1)))] = 1.0;
            }
        }
        Ok(Self {
            n1,
            n2,
            adjacency,
            kappa,
        })
    }

    /// Open grid glued along the `i1` direction with an orientation flip:
    /// the seam connects `(1, i2)` to `(n1, n2 + 1 - i2)`.
    pub fn moebius(n1: usize, n2: usize, kappa: f64) -> Result<Self, GraphError> {
        if n1 < 3 || n2 < 2 {
            return Err(GraphError::DimensionTooSmall {
                family: "moebius",
                min1: 3,
                min2: 2,
                n1,
                n2,
            });
        }
        check_kappa(kappa)?;
        let n = n1 * n2;
        let mut adjacency = DMatrix::zeros(n, n);
        let idx = |i1: usize, i2: usize| (i1 - 1) * n2 + (i2 - 1);
        for i1 in 1..=n1 {
            for i2 in 1..=n2 {
                let k = idx(i1, i2);
                if i1 < n1 {
                    adjacency[(k, idx(i1 + 1, i2))] = 1.0;
                    adjacency[(idx(i1 + 1, i2), k)] = 1.0;
                }
                if i2 < n2 {
                    adjacency[(k, idx(i1, i2 + 1))] = 1.0;
                    adjacency[(idx(i1, i2 + 1), k)] = 1.0;
                }
            }
        }
        // seam with flipped transverse coordinate
        for i2 in 1..=n2 {
            let a = idx(1, i2);
            let b = idx(n1, n2 + 1 - i2);
            adjacency[(a, b)] = 1.0;
            adjacency[(b, a)] = 1.0;
        }
        Ok(Self {
            n1,
            n2,
            adjacency,
            kappa,
        })
    }

    /// Wrap a caller-supplied adjacency matrix, validating symmetry,
    /// zero diagonal, and non-negative weights. The grid layout degenerates
    /// to a single row (`n1 = n`, `n2 = 1`).
    pub fn from_adjacency(adjacency: DMatrix<f64>, kappa: f64) -> Result<Self, GraphError> {
        check_kappa(kappa)?;
        let (rows, cols) = adjacency.shape();
        if rows != cols {
            return Err(GraphError::NonSquare { rows, cols });
        }
        for r in 0..rows {
            if adjacency[(r, r)] != 0.0 {
                return Err(GraphError::NonZeroDiagonal { node: r });
            }
            for c in (r + 1)..cols {
                if adjacency[(r, c)] != adjacency[(c, r)] {
                    return Err(GraphError::Asymmetric { row: r, col: c });
                }
                if adjacency[(r, c)] < 0.0 {
                    return Err(GraphError::NegativeEntry { row: r, col: c });
                }
            }
        }
        Ok(Self {
            n1: rows,
            n2: 1,
            adjacency,
            kappa,
        })
    }

    /// Load a custom graph from an edge-list file.
    ///
    /// Format: UTF-8 text, one undirected edge per line as
    /// `<k_from> <k_to> [weight]` with 0-based linear node indices; `#`
    /// starts a comment; the weight defaults to 1.0. Each edge is listed
    /// once and symmetrized on load. The node count is one past the largest
    /// index that appears.
    pub fn load_custom<P: AsRef<Path>>(path: P, kappa: f64) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_edge_list(&text, kappa)
    }

    /// Parse the edge-list format from a string. See [`Self::load_custom`].
    pub fn parse_edge_list(text: &str, kappa: f64) -> Result<Self, GraphError> {
        check_kappa(kappa)?;
        let mut edges: Vec<(usize, usize, f64, usize)> = Vec::new();
        let mut max_node = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut fields = content.split_whitespace();
            let from = parse_field::<usize>(fields.next(), line, "missing source index")?;
            let to = parse_field::<usize>(fields.next(), line, "missing target index")?;
            let weight = match fields.next() {
                Some(w) => parse_field::<f64>(Some(w), line, "bad weight")?,
                None => 1.0,
            };
            if let Some(extra) = fields.next() {
                return Err(GraphError::Parse {
                    line,
                    message: format!("unexpected trailing field {extra:?}"),
                });
            }
            if from == to {
                return Err(GraphError::SelfLoop { line, node: from });
            }
            if weight < 0.0 {
                return Err(GraphError::NegativeWeight { line, weight });
            }
            edges.push((from, to, weight, line));
            max_node = max_node.max(from).max(to);
        }
        if edges.is_empty() {
            return Err(GraphError::EmptyEdgeList);
        }
        let n = max_node + 1;
        let mut adjacency = DMatrix::zeros(n, n);
        let mut seen = vec![false; n * n];
        for &(from, to, weight, line) in &edges {
            if seen[from * n + to] {
                return Err(GraphError::ConflictingEdge { line, from, to });
            }
            seen[from * n + to] = true;
            seen[to * n + from] = true;
            adjacency[(from, to)] = weight;
            adjacency[(to, from)] = weight;
        }
        Ok(Self {
            n1: n,
            n2: 1,
            adjacency,
            kappa,
        })
    }

    /// Coupling matrix `K = kappa * A`, real symmetric.
    pub fn coupling_matrix(&self) -> DMatrix<f64> {
        &self.adjacency * self.kappa
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.adjacency.nrows()
    }

    /// Grid dimensions `(n1, n2)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    /// Linear index of a grid coordinate, `k = (i1 - 1) * n2 + (i2 - 1)`.
    /// Returns `None` when the coordinate falls outside the grid.
    pub fn linear_index(&self, node: NodeCoord) -> Option<usize> {
        if node.i1 == 0 || node.i2 == 0 || node.i1 > self.n1 || node.i2 > self.n2 {
            return None;
        }
        Some((node.i1 - 1) * self.n2 + (node.i2 - 1))
    }

    /// Inverse of [`Self::linear_index`].
    pub fn coord_of(&self, k: usize) -> Option<NodeCoord> {
        if k >= self.node_count() {
            return None;
        }
        Some(NodeCoord::new(k / self.n2 + 1, k % self.n2 + 1))
    }

    /// Weighted degree of node `k` (row sum of the adjacency).
    pub fn degree(&self, k: usize) -> f64 {
        self.adjacency.row(k).sum()
    }

    /// Number of undirected edges with nonzero weight.
    pub fn edge_count(&self) -> usize {
        let n = self.node_count();
        (0..n)
            .map(|r| {
                ((r + 1)..n)
                    .filter(|&c| self.adjacency[(r, c)] != 0.0)
                    .count()
            })
            .sum()
    }

    /// Neighbor indices of node `k`.
    pub fn neighbors(&self, k: usize) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&j| self.adjacency[(k, j)] != 0.0)
            .collect()
    }

    /// Breadth-first reachability from node 0.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut visited = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        visited[0] = true;
        let mut count = 1;
        while let Some(k) = queue.pop_front() {
            for j in self.neighbors(k) {
                if !visited[j] {
                    visited[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == n
    }
}

fn check_kappa(kappa: f64) -> Result<(), GraphError> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(GraphError::InvalidCoupling(kappa))
    }
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    line: usize,
    missing: &str,
) -> Result<T, GraphError> {
    let raw = field.ok_or_else(|| GraphError::Parse {
        line,
        message: missing.to_string(),
    })?;
    raw.parse().map_err(|_| GraphError::Parse {
        line,
        message: format!("cannot parse {raw:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn neighbors_by_coord(g: &NetworkGraph, node: NodeCoord) -> Vec<NodeCoord> {
        let k = g.linear_index(node).unwrap();
        g.neighbors(k)
            .into_iter()
            .map(|j| g.coord_of(j).unwrap())
            .collect()
    }

    #[test]
    fn torus_5x5_is_4_regular_with_50_edges() {
        let g = NetworkGraph::torus(5, 5, 1.0).unwrap();
        assert_eq!(g.node_count(), 25);
        for k in 0..25 {
            assert_eq!(g.degree(k), 4.0, "node {k}");
        }
        assert_eq!(g.edge_count(), 50);
    }

    #[test]
    fn torus_3x3_corner_neighbors() {
        let g = NetworkGraph::torus(3, 3, 1.0).unwrap();
        let mut got = neighbors_by_coord(&g, NodeCoord::new(1, 1));
        got.sort_by_key(|c| (c.i1, c.i2));
        let mut want = vec![
            NodeCoord::new(2, 1),
            NodeCoord::new(3, 1),
            NodeCoord::new(1, 2),
            NodeCoord::new(1, 3),
        ];
        want.sort_by_key(|c| (c.i1, c.i2));
        assert_eq!(got, want);
    }

    #[test]
    fn torus_rejects_small_dims_and_bad_kappa() {
        assert!(matches!(
            NetworkGraph::torus(2, 5, 1.0),
            Err(GraphError::DimensionTooSmall { .. })
        ));
        assert!(matches!(
            NetworkGraph::torus(5, 2, 1.0),
            Err(GraphError::DimensionTooSmall { .. })
        ));
        assert!(matches!(
            NetworkGraph::torus(5, 5, 0.0),
            Err(GraphError::InvalidCoupling(_))
        ));
        assert!(matches!(
            NetworkGraph::torus(5, 5, -1.0),
            Err(GraphError::InvalidCoupling(_))
        ));
    }

    #[test]
    fn moebius_5x5_corner_and_interior() {
        let g = NetworkGraph::moebius(5, 5, 1.0).unwrap();
        let mut corner = neighbors_by_coord(&g, NodeCoord::new(1, 1));
        corner.sort_by_key(|c| (c.i1, c.i2));
        assert_eq!(
            corner,
            vec![
                NodeCoord::new(1, 2),
                NodeCoord::new(2, 1),
                NodeCoord::new(5, 5),
            ]
        );
        let interior = g.linear_index(NodeCoord::new(3, 3)).unwrap();
        assert_eq!(g.degree(interior), 4.0);
        assert_eq!(g.edge_count(), 45);
    }

    #[test]
    fn moebius_seam_maps_row_to_flipped_row() {
        let g = NetworkGraph::moebius(5, 5, 1.0).unwrap();
        // (1, 3) sits on the seam; its partner keeps i2 = 3 because 5 + 1 - 3 = 3
        let nbrs = neighbors_by_coord(&g, NodeCoord::new(1, 3));
        assert!(nbrs.contains(&NodeCoord::new(5, 3)));
        // (1, 2) flips to (5, 4)
        let nbrs = neighbors_by_coord(&g, NodeCoord::new(1, 2));
        assert!(nbrs.contains(&NodeCoord::new(5, 4)));
    }

    #[test]
    fn moebius_edge_count_formula_holds_exhaustively() {
        for n1 in 3..=8 {
            for n2 in 2..=8 {
                let g = NetworkGraph::moebius(n1, n2, 1.0).unwrap();
                let want = (n1 - 1) * n2 + n1 * (n2 - 1) + n2;
                assert_eq!(g.edge_count(), want, "moebius {n1}x{n2}");
            }
        }
        for n1 in 3..=8 {
            for n2 in 3..=8 {
                let g = NetworkGraph::torus(n1, n2, 1.0).unwrap();
                assert_eq!(g.edge_count(), 2 * n1 * n2, "torus {n1}x{n2}");
            }
        }
    }

    #[test]
    fn moebius_degrees_by_enumeration() {
        let g = NetworkGraph::moebius(5, 5, 1.0).unwrap();
        for k in 0..g.node_count() {
            let c = g.coord_of(k).unwrap();
            let want = if c.i2 == 1 || c.i2 == 5 { 3.0 } else { 4.0 };
            assert_eq!(g.degree(k), want, "node {c}");
        }
    }

    #[test]
    fn square_torus_transpose_permutation_is_automorphism() {
        for n in [3, 4, 5] {
            let g = NetworkGraph::torus(n, n, 1.0).unwrap();
            let a = g.adjacency();
            let perm = |k: usize| (k % n) * n + k / n; // (i1, i2) -> (i2, i1)
            for r in 0..n * n {
                for c in 0..n * n {
                    assert_eq!(a[(r, c)], a[(perm(r), perm(c))]);
                }
            }
        }
    }

    #[test]
    fn edge_list_path_graph() {
        let g = NetworkGraph::parse_edge_list("0 1\n1 2\n", 1.0).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.degree(0), 1.0);
        assert_eq!(g.degree(1), 2.0);
        assert_eq!(g.degree(2), 1.0);
    }

    #[test]
    fn edge_list_rejects_self_loop() {
        assert!(matches!(
            NetworkGraph::parse_edge_list("0 0\n", 1.0),
            Err(GraphError::SelfLoop { node: 0, .. })
        ));
    }

    #[test]
    fn edge_list_symmetrizes_single_entry() {
        let g = NetworkGraph::parse_edge_list("# weighted edge\n0 1 2.0\n", 1.0).unwrap();
        assert_eq!(g.adjacency()[(0, 1)], 2.0);
        assert_eq!(g.adjacency()[(1, 0)], 2.0);
    }

    #[test]
    fn edge_list_rejects_conflicting_duplicates() {
        assert!(matches!(
            NetworkGraph::parse_edge_list("0 1 2.0\n1 0 3.0\n", 1.0),
            Err(GraphError::ConflictingEdge { .. })
        ));
    }

    #[test]
    fn edge_list_rejects_negative_weight_and_garbage() {
        assert!(matches!(
            NetworkGraph::parse_edge_list("0 1 -2.0\n", 1.0),
            Err(GraphError::NegativeWeight { .. })
        ));
        assert!(matches!(
            NetworkGraph::parse_edge_list("0 x\n", 1.0),
            Err(GraphError::Parse { .. })
        ));
        assert!(matches!(
            NetworkGraph::parse_edge_list("", 1.0),
            Err(GraphError::EmptyEdgeList)
        ));
    }

    #[test]
    fn coupling_matrix_scales_and_stays_symmetric() {
        let g = NetworkGraph::torus(3, 3, 2.0).unwrap();
        let k = g.coupling_matrix();
        for r in 0..9 {
            let row_sum: f64 = k.row(r).sum();
            assert_eq!(row_sum, 8.0);
            for c in 0..9 {
                assert!(k[(r, c)] == 0.0 || k[(r, c)] == 2.0);
                assert_eq!(k[(r, c)], k[(c, r)]);
            }
        }
    }

    #[test]
    fn single_node_coupling_is_zero() {
        let g = NetworkGraph::from_adjacency(DMatrix::zeros(1, 1), 1.0).unwrap();
        let k = g.coupling_matrix();
        assert_eq!(k.shape(), (1, 1));
        assert_eq!(k[(0, 0)], 0.0);
    }

    #[test]
    fn from_adjacency_validates() {
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 1)] = 1.0;
        assert!(matches!(
            NetworkGraph::from_adjacency(a, 1.0),
            Err(GraphError::Asymmetric { .. })
        ));
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 0)] = 1.0;
        assert!(matches!(
            NetworkGraph::from_adjacency(a, 1.0),
            Err(GraphError::NonZeroDiagonal { .. })
        ));
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 1)] = -1.0;
        a[(1, 0)] = -1.0;
        assert!(matches!(
            NetworkGraph::from_adjacency(a, 1.0),
            Err(GraphError::NegativeEntry { .. })
        ));
    }

    #[test]
    fn connectivity() {
        assert!(NetworkGraph::torus(5, 5, 1.0).unwrap().is_connected());
        assert!(NetworkGraph::moebius(5, 5, 1.0).unwrap().is_connected());
        let g = NetworkGraph::parse_edge_list("0 1\n2 3\n", 1.0).unwrap();
        assert!(!g.is_connected());
    }

    #[test]
    fn linear_index_convention() {
        let g = NetworkGraph::torus(5, 5, 1.0).unwrap();
        assert_eq!(g.linear_index(NodeCoord::new(3, 3)), Some(12));
        assert_eq!(g.linear_index(NodeCoord::new(1, 1)), Some(0));
        assert_eq!(g.linear_index(NodeCoord::new(5, 5)), Some(24));
        assert_eq!(g.linear_index(NodeCoord::new(6, 1)), None);
        assert_eq!(g.linear_index(NodeCoord::new(0, 1)), None);
        for k in 0..25 {
            assert_eq!(g.linear_index(g.coord_of(k).unwrap()), Some(k));
        }
    }
}
