//! Graph instances, oracle encodings, and small-graph enumeration.
//!
//! Two input encodings are used by the graph problems:
//!
//! * **Adjacency matrix**: one binary coordinate per vertex pair — `n(n-1)/2`
//!   coordinates for undirected graphs, `n(n-1)` for digraphs — laid out
//!   lexicographically by [`pair_index`] / [`arc_index`].
//! * **Adjacency list**: an `n x (n-1)` table of cells over the alphabet
//!   `[n] ∪ {nil}` (`nil = n`), cell `(v, i)` holding the `i`-th neighbor of
//!   `v`, laid out by [`cell_index`]. Each neighbor appears exactly once per
//!   row, followed by nil padding; the canonical encoding sorts each row
//!   ascending.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::Symbol;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("vertex {0} out of range for n={1}")]
    VertexRange(usize, usize),
    #[error("self-loop at vertex {0}; only simple graphs are supported")]
    SelfLoop(usize),
    #[error("string length {0} does not match the {1}-coordinate encoding")]
    BadLength(usize, usize),
    #[error("symbol {0} out of range in adjacency-list string")]
    BadSymbol(Symbol),
}

/// A simple graph or digraph with a fixed vertex count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphInstance {
    n: usize,
    directed: bool,
    /// Undirected edges stored as `(u, w)` with `u < w`; arcs stored as-is.
    edges: BTreeSet<(usize, usize)>,
}

impl GraphInstance {
    pub fn undirected(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut set = BTreeSet::new();
        for &(u, w) in edges {
            if u >= n {
                return Err(GraphError::VertexRange(u, n));
            }
            if w >= n {
                return Err(GraphError::VertexRange(w, n));
            }
            if u == w {
                return Err(GraphError::SelfLoop(u));
            }
            set.insert((u.min(w), u.max(w)));
        }
        Ok(GraphInstance {
            n,
            directed: false,
            edges: set,
        })
    }

    pub fn directed(n: usize, arcs: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut set = BTreeSet::new();
        for &(u, w) in arcs {
            if u >= n {
                return Err(GraphError::VertexRange(u, n));
            }
            if w >= n {
                return Err(GraphError::VertexRange(w, n));
            }
            if u == w {
                return Err(GraphError::SelfLoop(u));
            }
            set.insert((u, w));
        }
        Ok(GraphInstance {
            n,
            directed: true,
            edges: set,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Arc count as seen by the list encoding: each undirected edge occupies
    /// a cell in both endpoint rows.
    pub fn arc_count(&self) -> usize {
        if self.directed {
            self.edges.len()
        } else {
            2 * self.edges.len()
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, w: usize) -> bool {
        if u == w {
            return false;
        }
        if self.directed {
            self.edges.contains(&(u, w))
        } else {
            self.edges.contains(&(u.min(w), u.max(w)))
        }
    }

    /// Neighbors reachable from `u` (out-neighbors for digraphs), ascending.
    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        (0..self.n).filter(|&w| self.has_edge(u, w)).collect()
    }

    pub fn in_neighbors(&self, w: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.has_edge(u, w)).collect()
    }

    /// The digraph with every arc flipped.
    pub fn reverse(&self) -> GraphInstance {
        assert!(self.directed, "reverse is a digraph operation");
        GraphInstance {
            n: self.n,
            directed: true,
            edges: self.edges.iter().map(|&(u, w)| (w, u)).collect(),
        }
    }

    /// Number of coordinates in this graph's matrix encoding.
    pub fn matrix_len(&self) -> usize {
        if self.directed {
            self.n * (self.n - 1)
        } else {
            self.n * (self.n - 1) / 2
        }
    }

    pub fn matrix_string(&self) -> Vec<Symbol> {
        let mut s = vec![0 as Symbol; self.matrix_len()];
        for &(u, w) in &self.edges {
            let idx = if self.directed {
                arc_index(self.n, u, w)
            } else {
                pair_index(self.n, u, w)
            };
            s[idx] = 1;
        }
        s
    }

    pub fn from_matrix_string(n: usize, directed: bool, s: &[Symbol]) -> Result<Self, GraphError> {
        let want = if directed {
            n * (n - 1)
        } else {
            n * (n - 1) / 2
        };
        if s.len() != want {
            return Err(GraphError::BadLength(s.len(), want));
        }
        let mut edges = Vec::new();
        for u in 0..n {
            for w in 0..n {
                if u == w || (!directed && u > w) {
                    continue;
                }
                let idx = if directed {
                    arc_index(n, u, w)
                } else {
                    pair_index(n, u, w)
                };
                if s[idx] == 1 {
                    edges.push((u, w));
                }
            }
        }
        if directed {
            Self::directed(n, &edges)
        } else {
            Self::undirected(n, &edges)
        }
    }

    /// Canonical adjacency-list encoding: each row lists its neighbors
    /// ascending, padded with nil.
    pub fn list_string(&self) -> Vec<Symbol> {
        let orders: Vec<Vec<usize>> = (0..self.n).map(|v| self.neighbors(v)).collect();
        self.list_string_ordered(&orders)
            .expect("canonical neighbor order is always valid")
    }

    /// Adjacency-list encoding with an explicit neighbor order per row.
    pub fn list_string_ordered(&self, orders: &[Vec<usize>]) -> Result<Vec<Symbol>, GraphError> {
        assert_eq!(orders.len(), self.n);
        let nil = self.n as Symbol;
        let mut s = vec![nil; self.n * (self.n - 1)];
        for (v, order) in orders.iter().enumerate() {
            let canonical: BTreeSet<usize> = self.neighbors(v).into_iter().collect();
            let given: BTreeSet<usize> = order.iter().copied().collect();
            if canonical != given || order.len() != canonical.len() {
                return Err(GraphError::BadLength(order.len(), canonical.len()));
            }
            for (i, &w) in order.iter().enumerate() {
                s[cell_index(self.n, v, i)] = w as Symbol;
            }
        }
        Ok(s)
    }

    /// Decodes a list string, accepting any neighbor order (nil padding must
    /// still trail the real entries).
    pub fn from_list_string(n: usize, directed: bool, s: &[Symbol]) -> Result<Self, GraphError> {
        if s.len() != n * (n - 1) {
            return Err(GraphError::BadLength(s.len(), n * (n - 1)));
        }
        let nil = n as Symbol;
        let mut edges = Vec::new();
        for v in 0..n {
            for i in 0..n - 1 {
                let sym = s[cell_index(n, v, i)];
                if sym == nil {
                    break;
                }
                if sym > nil {
                    return Err(GraphError::BadSymbol(sym));
                }
                edges.push((v, sym as usize));
            }
        }
        if directed {
            Self::directed(n, &edges)
        } else {
            Self::undirected(n, &edges)
        }
    }
}

/// Lexicographic index of the unordered pair `{u, w}` among all pairs of
/// `[n]`: pairs with smaller min first, ties by max.
pub fn pair_index(n: usize, u: usize, w: usize) -> usize {
    assert!(u != w && u < n && w < n);
    let (a, b) = (u.min(w), u.max(w));
    // Pairs with min < a occupy the first a*(n-1) - a*(a-1)/2 slots.
    a * (n - 1) - a * (a.saturating_sub(1)) / 2 + (b - a - 1)
}

/// Lexicographic index of the ordered pair `(u, w)`, `u != w`, among the
/// `n(n-1)` arcs: grouped by tail, heads ascending with `u` skipped.
pub fn arc_index(n: usize, u: usize, w: usize) -> usize {
    assert!(u != w && u < n && w < n);
    u * (n - 1) + if w > u { w - 1 } else { w }
}

/// Index of adjacency-list cell `(v, i)`: the `i`-th neighbor slot of `v`.
pub fn cell_index(n: usize, v: usize, i: usize) -> usize {
    assert!(v < n && i < n - 1);
    v * (n - 1) + i
}

/// All `2^(n(n-1)/2)` simple undirected graphs on `[n]`.
pub fn all_undirected(n: usize) -> Vec<GraphInstance> {
    let coords = n * (n - 1) / 2;
    assert!(
        coords < 26,
        "undirected enumeration capped at 25 coordinates"
    );
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |w| (u, w)))
        .collect();
    (0u64..1 << coords)
        .map(|mask| {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            GraphInstance::undirected(n, &edges).unwrap()
        })
        .collect()
}

/// All `2^(n(n-1))` simple digraphs on `[n]`.
pub fn all_digraphs(n: usize) -> Vec<GraphInstance> {
    let coords = n * (n - 1);
    assert!(coords < 26, "digraph enumeration capped at 25 coordinates");
    let arcs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&w| w != u).map(move |w| (u, w)))
        .collect();
    (0u64..1 << coords)
        .map(|mask| {
            let chosen: Vec<(usize, usize)> = arcs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &a)| a)
                .collect();
            GraphInstance::directed(n, &chosen).unwrap()
        })
        .collect()
}

/// All acyclic digraphs on `[n]`.
pub fn all_dags(n: usize) -> Vec<GraphInstance> {
    all_digraphs(n)
        .into_iter()
        .filter(super::classical::is_acyclic)
        .collect()
}

/// All bipartite instances with left part `{0..a}` and right part
/// `{a..a+b}`: one per subset of the `a*b` cross edges.
pub fn all_bipartite(a: usize, b: usize) -> Vec<GraphInstance> {
    assert!(a * b < 26, "bipartite enumeration capped at 25 cross edges");
    let n = a + b;
    let cross: Vec<(usize, usize)> = (0..a)
        .flat_map(|u| (0..b).map(move |j| (u, a + j)))
        .collect();
    (0u64..1 << (a * b))
        .map(|mask| {
            let edges: Vec<(usize, usize)> = cross
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            GraphInstance::undirected(n, &edges).unwrap()
        })
        .collect()
}

/// Up to `count` distinct graphs drawn with a seeded generator; if the whole
/// space is at most `count`, returns it exhaustively instead.
pub fn sample_graphs(n: usize, directed: bool, count: usize, seed: u64) -> Vec<GraphInstance> {
    let coords = if directed {
        n * (n - 1)
    } else {
        n * (n - 1) / 2
    };
    if coords < 26 && (1u64 << coords) <= count as u64 {
        return if directed {
            all_digraphs(n)
        } else {
            all_undirected(n)
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let bits: Vec<Symbol> = (0..coords).map(|_| rng.gen_range(0..2) as Symbol).collect();
        if seen.insert(bits.clone()) {
            out.push(GraphInstance::from_matrix_string(n, directed, &bits).unwrap());
        }
    }
    out
}

/// Every adjacency-list encoding of `g` (all per-row neighbor orders).
/// Exponential in degrees — intended for `n <= 3` encoding-independence
/// checks.
pub fn all_list_encodings(g: &GraphInstance) -> Vec<Vec<Symbol>> {
    let row_orders: Vec<Vec<Vec<usize>>> = (0..g.n())
        .map(|v| {
            let base = g.neighbors(v);
            super::permutations(base.len())
                .into_iter()
                .map(|p| p.iter().map(|&i| base[i]).collect())
                .collect()
        })
        .collect();
    let mut encodings = Vec::new();
    let mut choice = vec![0usize; g.n()];
    loop {
        let orders: Vec<Vec<usize>> = choice
            .iter()
            .enumerate()
            .map(|(v, &c)| row_orders[v][c].clone())
            .collect();
        encodings.push(g.list_string_ordered(&orders).unwrap());
        // Odometer increment over the per-row choices.
        let mut v = 0;
        loop {
            if v == g.n() {
                return encodings;
            }
            choice[v] += 1;
            if choice[v] < row_orders[v].len() {
                break;
            }
            choice[v] = 0;
            v += 1;
        }
    }
}
