//! Graph algorithms as query trees over adjacency-matrix oracles.
//!
//! Every tree queries edge-indicator coordinates with the binary partition
//! `{0} black / {1} red`: the standing guess is "no edge there", and each
//! edge actually found is a surprise. Traversals query lazily — a
//! coordinate is read only when its answer could still matter — which is
//! what keeps the red count per path at `O(n)` instead of `O(n^2)`:
//!
//! * BFS/DFS sweeps probe only currently-undiscovered targets, so every 1
//!   is a discovery (at most `n-1` per path).
//! * Cycle detection instead probes every pair once and halts on the first
//!   non-tree edge (one extra red).
//! * The two-pass strongly-connected-components tree shares a query cache
//!   between passes, so a coordinate probed forward is never re-queried
//!   when the reversed graph asks for it.

use std::sync::Arc;

use super::graph::{arc_index, pair_index, GraphInstance};
use super::Interner;
use crate::model::{Label, Partition, QuerySink, TreeError, TreeProgram};

fn edge(sink: &mut dyn QuerySink, n: usize, u: usize, w: usize) -> Result<bool, TreeError> {
    Ok(sink.query(pair_index(n, u, w), Partition::bit_guess_zero())? == 1)
}

fn arc(sink: &mut dyn QuerySink, n: usize, u: usize, w: usize) -> Result<bool, TreeError> {
    Ok(sink.query(arc_index(n, u, w), Partition::bit_guess_zero())? == 1)
}

/// BFS spanning forest (ascending roots and scans); the label is the
/// parent array.
pub struct MatrixBfsTree {
    pub n: usize,
    pub labels: Arc<Interner<Vec<Option<usize>>>>,
}

impl TreeProgram for MatrixBfsTree {
    fn arity(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
    fn alphabet(&self) -> usize {
        2
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let n = self.n;
        let mut parents = vec![None; n];
        let mut discovered = vec![false; n];
        for root in 0..n {
            if discovered[root] {
                continue;
            }
            discovered[root] = true;
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                for w in 0..n {
                    if !discovered[w] && edge(sink, n, u, w)? {
                        discovered[w] = true;
                        parents[w] = Some(u);
                        queue.push_back(w);
                    }
                }
            }
        }
        Ok(self.labels.label_or_invalid(&parents))
    }
}

/// DFS spanning forest (ascending roots and scans); the label is the
/// parent array.
pub struct MatrixDfsTree {
    pub n: usize,
    pub labels: Arc<Interner<Vec<Option<usize>>>>,
}

impl TreeProgram for MatrixDfsTree {
    fn arity(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
    fn alphabet(&self) -> usize {
        2
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        fn visit(
            sink: &mut dyn QuerySink,
            n: usize,
            u: usize,
            discovered: &mut [bool],
            parents: &mut [Option<usize>],
        ) -> Result<(), TreeError> {
            discovered[u] = true;
            for w in 0..n {
                if !discovered[w] && edge(sink, n, u, w)? {
                    parents[w] = Some(u);
                    visit(sink, n, w, discovered, parents)?;
                }
            }
            Ok(())
        }
        let n = self.n;
        let mut parents = vec![None; n];
        let mut discovered = vec![false; n];
        for root in 0..n {
            if !discovered[root] {
                visit(sink, n, root, &mut discovered, &mut parents)?;
            }
        }
        Ok(self.labels.label_or_invalid(&parents))
    }
}

/// Connected components via a BFS sweep; the label is the canonical
/// partition.
pub struct MatrixComponents {
    pub n: usize,
    pub labels: Arc<Interner<Vec<Vec<usize>>>>,
}

impl TreeProgram for MatrixComponents {
    fn arity(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
    fn alphabet(&self) -> usize {
        2
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let n = self.n;
        let mut discovered = vec![false; n];
        let mut parts: Vec<Vec<usize>> = Vec::new();
        for root in 0..n {
            if discovered[root] {
                continue;
            }
            discovered[root] = true;
            let mut comp = vec![root];
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                for w in 0..n {
                    if !discovered[w] && edge(sink, n, u, w)? {
                        discovered[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            parts.push(comp);
        }
        Ok(self.labels.label_or_invalid(&parts))
    }
}

/// Two-phase bipartiteness: a BFS sweep assigns parities, then every pair
/// the sweep never read and whose endpoints share a parity is probed; any
/// edge there closes an odd cycle. Labels: 0 = bipartite, 1 = not.
pub struct MatrixBipartiteness {
    pub n: usize,
}

impl TreeProgram for MatrixBipartiteness {
    fn arity(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
    fn alphabet(&self) -> usize {
        2
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let n = self.n;
        let mut discovered = vec![false; n];
        let mut parity = vec![0u8; n];
        let mut queried = vec![false; n * (n - 1) / 2];
        for root in 0..n {
            if discovered[root] {
                continue;
            }
            discovered[root] = true;
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                for w in 0..n {
                    if !discovered[w] && w != u {
                        queried[pair_index(n, u, w)] = true;
                        if edge(sink, n, u, w)? {
                            discovered[w] = true;
                            parity[w] = parity[u] ^ 1;
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
        // Unread pairs always join vertices of one component; an edge
        // between equal parities there is an odd cycle.
        for u in 0..n {
            for w in u + 1..n {
                if !queried[pair_index(n, u, w)] && parity[u] == parity[w] && edge(sink, n, u, w)? {
                    return Ok(1);
                }
            }
        }
        Ok(0)
    }
}

/// Forest detection: a DFS sweep that probes every pair once and halts on
/// the first edge into an already-discovered vertex. Labels: 0 = forest,
/// 1 = has a cycle.
pub struct MatrixForest {
    pub n: usize,
}

impl TreeProgram for MatrixForest {
    fn arity(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
    fn alphabet(&self) -> usize {
        2
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        fn visit(
            sink: &mut dyn QuerySink,
            n: usize,
            u: usize,
            discovered: &mut [bool],
            queried: &mut [bool],
        ) -> Result<bool, TreeError> {
            for w in 0..n {
                if w == u || queried[pair_index(n, u, w)] {
                    continue;
                }
                queried[pair_index(n, u, w)] = true;
                if edge(sink, n, u, w)? {
                    if discovered[w] {
                        return Ok(true);
                    }
                    discovered[w] = true;
                    if visit(sink, n, w, discovered, queried)? {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        let n = self.n;
        let mut discovered = vec![false; n];
        let mut queried = vec![false; n * (n - 1) / 2];
        for root in 0..n {
            if !discovered[root] {
                discovered[root] = true;
                if visit(sink, n, root, &mut discovered, &mut queried)? {
                    return Ok(1);
                }
            }
        }
        Ok(0)
    }
}

/// Directed BFS from `s` that halts the moment `t` is discovered; the
/// label is the shortest `s -> t` vertex path, or "unreachable".
pub struct MatrixStPath {
    pub n: usize,
    pub s: usize,
    pub t: usize,
    pub labels: Arc<Interner<Option<Vec<usize>>>>,
}

impl TreeProgram for MatrixStPath {
    fn arity(&self) -> usize {
        self.n * (self.n - 1)
    }
    fn alphabet(&self) -> usize {
        2
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let n = self.n;
        if self.s == self.t {
            return Ok(self.labels.label_or_invalid(&Some(vec![self.s])));
        }
        let mut discovered = vec![false; n];
        let mut parents = vec![None; n];
        discovered[self.s] = true;
        let mut queue = std::collections::VecDeque::from([self.s]);
        while let Some(u) = queue.pop_front() {
            for w in 0..n {
                if !discovered[w] && arc(sink, n, u, w)? {
                    discovered[w] = true;
                    parents[w] = Some(u);
                    if w == self.t {
                        let mut path = vec![w];
                        let mut at = w;
                        while let Some(p) = parents[at] {
                            path.push(p);
                            at = p;
                        }
                        path.reverse();
                        return Ok(self.labels.label_or_invalid(&Some(path)));
                    }
                    queue.push_back(w);
                }
            }
        }
        Ok(self.labels.label_or_invalid(&None))
    }
}

/// DFS reverse-finishing order on a DAG domain; the label is the order.
pub struct MatrixToposort {
    pub n: usize,
    pub labels: Arc<Interner<Vec<usize>>>,
}

impl TreeProgram for MatrixToposort {
    fn arity(&self) -> usize {
        self.n * (self.n - 1)
    }
    fn alphabet(&self) -> usize {
        2
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        fn visit(
            sink: &mut dyn QuerySink,
            n: usize,
            u: usize,
            visited: &mut [bool],
            finish: &mut Vec<usize>,
        ) -> Result<(), TreeError> {
            visited[u] = true;
            for w in 0..n {
                if !visited[w] && arc(sink, n, u, w)? {
                    visit(sink, n, w, visited, finish)?;
                }
            }
            finish.push(u);
            Ok(())
        }
        let n = self.n;
        let mut visited = vec![false; n];
        let mut finish = Vec::with_capacity(n);
        for root in 0..n {
            if !visited[root] {
                visit(sink, n, root, &mut visited, &mut finish)?;
            }
        }
        finish.reverse();
        Ok(self.labels.label_or_invalid(&finish))
    }
}

/// Two lazy DFS passes — forward for finishing order, then on the reversed
/// graph in that order — sharing one coordinate cache so nothing is read
/// twice. The label is the canonical partition into strongly connected
/// components.
pub struct MatrixScc {
    pub n: usize,
    pub labels: Arc<Interner<Vec<Vec<usize>>>>,
}

struct ArcCache {
    n: usize,
    seen: Vec<Option<bool>>,
}

impl ArcCache {
    fn new(n: usize) -> Self {
        ArcCache {
            n,
            seen: vec![None; n * (n - 1)],
        }
    }
    fn probe(&mut self, sink: &mut dyn QuerySink, u: usize, w: usize) -> Result<bool, TreeError> {
        let idx = arc_index(self.n, u, w);
        if let Some(b) = self.seen[idx] {
            return Ok(b);
        }
        let b = sink.query(idx, Partition::bit_guess_zero())? == 1;
        self.seen[idx] = Some(b);
        Ok(b)
    }
}

impl TreeProgram for MatrixScc {
    fn arity(&self) -> usize {
        self.n * (self.n - 1)
    }
    fn alphabet(&self) -> usize {
        2
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        fn forward(
            sink: &mut dyn QuerySink,
            cache: &mut ArcCache,
            u: usize,
            visited: &mut [bool],
            finish: &mut Vec<usize>,
        ) -> Result<(), TreeError> {
            visited[u] = true;
            for w in 0..cache.n {
                if !visited[w] && cache.probe(sink, u, w)? {
                    forward(sink, cache, w, visited, finish)?;
                }
            }
            finish.push(u);
            Ok(())
        }
        fn backward(
            sink: &mut dyn QuerySink,
            cache: &mut ArcCache,
            u: usize,
            visited: &mut [bool],
            comp: &mut Vec<usize>,
        ) -> Result<(), TreeError> {
            visited[u] = true;
            comp.push(u);
            for w in 0..cache.n {
                // Reversed-graph arc (u, w) is the forward arc (w, u).
                if !visited[w] && cache.probe(sink, w, u)? {
                    backward(sink, cache, w, visited, comp)?;
                }
            }
            Ok(())
        }
        let n = self.n;
        let mut cache = ArcCache::new(n);
        let mut visited = vec![false; n];
        let mut finish = Vec::with_capacity(n);
        for root in 0..n {
            if !visited[root] {
                forward(sink, &mut cache, root, &mut visited, &mut finish)?;
            }
        }
        let mut visited2 = vec![false; n];
        let mut parts: Vec<Vec<usize>> = Vec::new();
        for &root in finish.iter().rev() {
            if visited2[root] {
                continue;
            }
            let mut comp = Vec::new();
            backward(sink, &mut cache, root, &mut visited2, &mut comp)?;
            comp.sort_unstable();
            parts.push(comp);
        }
        parts.sort_by_key(|c| c[0]);
        Ok(self.labels.label_or_invalid(&parts))
    }
}

/// Directed BFS from `v` that checks, at each discovery, whether the new
/// vertex closes a cycle back to `v`. Discoveries arrive in distance
/// order, so the first hit is the smallest cycle through `v`.
pub struct MatrixSmallestCycle {
    pub n: usize,
    pub v: usize,
    pub labels: Arc<Interner<Option<usize>>>,
}

impl TreeProgram for MatrixSmallestCycle {
    fn arity(&self) -> usize {
        self.n * (self.n - 1)
    }
    fn alphabet(&self) -> usize {
        2
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let n = self.n;
        let mut discovered = vec![false; n];
        let mut level = vec![0usize; n];
        discovered[self.v] = true;
        let mut queue = std::collections::VecDeque::from([self.v]);
        while let Some(u) = queue.pop_front() {
            for w in 0..n {
                if !discovered[w] && arc(sink, n, u, w)? {
                    discovered[w] = true;
                    level[w] = level[u] + 1;
                    if arc(sink, n, w, self.v)? {
                        return Ok(self.labels.label_or_invalid(&Some(level[w] + 1)));
                    }
                    queue.push_back(w);
                }
            }
        }
        Ok(self.labels.label_or_invalid(&None))
    }
}

/// Builds the interner + spec + tree for one matrix problem over an
/// explicit instance set. Returns `(inputs, labels, interner)` ready for
/// `FunctionSpec` assembly.
pub fn intern_structures<S: Eq + std::hash::Hash + Clone>(
    instances: &[GraphInstance],
    classify: impl Fn(&GraphInstance) -> S,
    render: impl Fn(&S) -> String + Send + Sync + 'static,
) -> (Vec<Label>, Arc<Interner<S>>) {
    let mut interner = Interner::new(render);
    let labels = instances
        .iter()
        .map(|g| interner.intern(classify(g)))
        .collect();
    (labels, Arc::new(interner))
}

/// Renders a parent array like `[-,0,1,-]`.
pub fn render_parents(parents: &Vec<Option<usize>>) -> String {
    let cells: Vec<String> = parents
        .iter()
        .map(|p| p.map_or("-".to_string(), |u| u.to_string()))
        .collect();
    format!("[{}]", cells.join(","))
}

/// Renders a partition like `{0,1|2}`.
pub fn render_partition(parts: &Vec<Vec<usize>>) -> String {
    let cells: Vec<String> = parts
        .iter()
        .map(|c| {
            c.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    format!("{{{}}}", cells.join("|"))
}

/// Renders a vertex sequence like `0->2->3`.
pub fn render_order(order: &Vec<usize>) -> String {
    order
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("->")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tree_metrics;
    use crate::model::{validate, FunctionSpec};

    use super::super::classical;
    use super::super::graph::{all_dags, all_digraphs, all_undirected};

    fn matrix_spec(
        instances: &[GraphInstance],
        labels: Vec<Label>,
        m: usize,
        names: Vec<String>,
    ) -> FunctionSpec {
        let directed = instances[0].is_directed();
        let n = instances[0].n();
        let coords = if directed {
            n * (n - 1)
        } else {
            n * (n - 1) / 2
        };
        let inputs = instances.iter().map(|g| g.matrix_string()).collect();
        FunctionSpec::with_label_names(coords, 2, m, inputs, labels, names).unwrap()
    }

    #[test]
    fn bfs_tree_reproduces_the_reference_forest_on_all_small_graphs() {
        let instances = all_undirected(4);
        let (labels, interner) =
            intern_structures(&instances, |g| classical::bfs_forest(g).0, render_parents);
        let f = matrix_spec(&instances, labels, interner.len(), interner.names());
        let tree = MatrixBfsTree {
            n: 4,
            labels: interner,
        };
        assert!(validate(&tree, &f).is_valid());
        let m = tree_metrics(&tree, &f).unwrap();
        assert!(m.t <= 6 && m.g <= 3, "T={} G={}", m.t, m.g);
    }

    #[test]
    fn dfs_tree_reproduces_the_reference_forest() {
        let instances = all_undirected(4);
        let (labels, interner) =
            intern_structures(&instances, classical::dfs_forest, render_parents);
        let f = matrix_spec(&instances, labels, interner.len(), interner.names());
        let tree = MatrixDfsTree {
            n: 4,
            labels: interner,
        };
        assert!(validate(&tree, &f).is_valid());
    }

    #[test]
    fn components_match_the_floodfill_partition() {
        let instances = all_undirected(4);
        let (labels, interner) =
            intern_structures(&instances, classical::components, render_partition);
        let f = matrix_spec(&instances, labels, interner.len(), interner.names());
        let tree = MatrixComponents {
            n: 4,
            labels: interner,
        };
        assert!(validate(&tree, &f).is_valid());
        let m = tree_metrics(&tree, &f).unwrap();
        assert!(m.g <= 3);
    }

    #[test]
    fn bipartiteness_agrees_with_exhaustive_two_coloring() {
        let instances = all_undirected(4);
        let labels: Vec<Label> = instances
            .iter()
            .map(|g| usize::from(!classical::is_bipartite(g)))
            .collect();
        let f = matrix_spec(
            &instances,
            labels,
            2,
            vec!["bipartite".into(), "not_bipartite".into()],
        );
        let tree = MatrixBipartiteness { n: 4 };
        assert!(validate(&tree, &f).is_valid());
        let m = tree_metrics(&tree, &f).unwrap();
        assert!(m.t <= 6 && m.g <= 4, "T={} G={}", m.t, m.g);
    }

    #[test]
    fn forest_detection_agrees_with_the_edge_count_criterion() {
        let instances = all_undirected(4);
        let labels: Vec<Label> = instances
            .iter()
            .map(|g| usize::from(!classical::is_forest(g)))
            .collect();
        let f = matrix_spec(
            &instances,
            labels,
            2,
            vec!["forest".into(), "has_cycle".into()],
        );
        let tree = MatrixForest { n: 4 };
        assert!(validate(&tree, &f).is_valid());
    }

    #[test]
    fn st_paths_are_shortest_on_all_digraphs() {
        let instances = all_digraphs(3);
        let (labels, interner) = intern_structures(
            &instances,
            |g| classical::shortest_path(g, 0, 2),
            |p| match p {
                None => "unreachable".to_string(),
                Some(path) => render_order(path),
            },
        );
        let f = matrix_spec(&instances, labels, interner.len(), interner.names());
        let tree = MatrixStPath {
            n: 3,
            s: 0,
            t: 2,
            labels: interner,
        };
        assert!(validate(&tree, &f).is_valid());
    }

    #[test]
    fn toposort_matches_the_reference_on_all_small_dags() {
        let instances = all_dags(3);
        assert_eq!(instances.len(), 25);
        let (labels, interner) =
            intern_structures(&instances, classical::topological_order, render_order);
        let f = matrix_spec(&instances, labels, interner.len(), interner.names());
        let tree = MatrixToposort {
            n: 3,
            labels: interner,
        };
        assert!(validate(&tree, &f).is_valid());
        // Reverse finishing order is genuinely topological on every DAG.
        for g in &instances {
            assert!(classical::is_topological_order(
                g,
                &classical::topological_order(g)
            ));
        }
    }

    #[test]
    fn scc_partition_matches_mutual_reachability() {
        let instances = all_digraphs(3);
        let (labels, interner) =
            intern_structures(&instances, classical::strongly_connected, render_partition);
        let f = matrix_spec(&instances, labels, interner.len(), interner.names());
        let tree = MatrixScc {
            n: 3,
            labels: interner,
        };
        assert!(validate(&tree, &f).is_valid());
        let m = tree_metrics(&tree, &f).unwrap();
        assert!(m.g <= 2 * 3, "G={}", m.g);
    }

    #[test]
    fn smallest_cycle_equals_the_enumeration_answer() {
        let instances = all_digraphs(3);
        let (labels, interner) = intern_structures(
            &instances,
            |g| classical::smallest_cycle_through(g, 0),
            |c| c.map_or("no_cycle".to_string(), |l| format!("cycle_len={l}")),
        );
        let f = matrix_spec(&instances, labels, interner.len(), interner.names());
        let tree = MatrixSmallestCycle {
            n: 3,
            v: 0,
            labels: interner,
        };
        assert!(validate(&tree, &f).is_valid());
    }
}
