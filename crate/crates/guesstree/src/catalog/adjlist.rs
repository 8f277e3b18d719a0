//! Graph algorithms as query trees over adjacency-list oracles.
//!
//! The input string has one row of `n - 1` cells per vertex; a cell holds
//! a neighbor id or the padding symbol `n` once the row is exhausted. The
//! trees below exploit the coarse/fine partition freedom of the query
//! model: a scan that only needs to know "this neighbor is old news"
//! lumps every already-discovered vertex into one black block, while each
//! genuinely new vertex (and the end-of-row marker) sits in its own red
//! singleton. Reds per path then count discoveries plus row endings —
//! `O(n)` — while total cells read stay near the edge count.

use std::sync::Arc;

use super::classical;
use super::graph::cell_index;
use super::Interner;
use crate::model::{Block, Color, Label, Partition, QuerySink, Symbol, TreeError, TreeProgram};

/// What one scanned cell turned out to be, aligned with the block order
/// of the partition used to read it.
enum CellOutcome {
    /// Some already-discovered vertex (we do not learn which).
    Known,
    /// A specific newly seen vertex.
    New(usize),
    /// The padding symbol: the row is exhausted.
    End,
}

/// Partition for one cell read during a sweep: discovered vertices form a
/// single black block, every undiscovered vertex and the padding symbol
/// are red singletons.
fn sweep_partition(n: usize, discovered: &[bool]) -> (Partition, Vec<CellOutcome>) {
    let mut parts: Vec<(Block, Color)> = Vec::new();
    let mut outcomes = Vec::new();
    let known: Vec<Symbol> = (0..n)
        .filter(|&w| discovered[w])
        .map(|w| w as Symbol)
        .collect();
    if !known.is_empty() {
        parts.push((Block::new(known), Color::Black));
        outcomes.push(CellOutcome::Known);
    }
    for w in 0..n {
        if !discovered[w] {
            parts.push((Block::new(vec![w as Symbol]), Color::Red));
            outcomes.push(CellOutcome::New(w));
        }
    }
    parts.push((Block::new(vec![n as Symbol]), Color::Red));
    outcomes.push(CellOutcome::End);
    (Partition::new(parts), outcomes)
}

fn read_cell(
    sink: &mut dyn QuerySink,
    n: usize,
    v: usize,
    i: usize,
    discovered: &[bool],
) -> Result<CellOutcome, TreeError> {
    let (partition, mut outcomes) = sweep_partition(n, discovered);
    let block = sink.query(cell_index(n, v, i), partition)?;
    Ok(outcomes.swap_remove(block))
}

/// BFS spanning forest over list oracles; the label is the parent array.
/// Scanning a row in stored (ascending) order makes the forest identical
/// to the matrix version's.
pub struct ListBfsTree {
    pub n: usize,
    pub labels: Arc<Interner<Vec<Option<usize>>>>,
}

impl TreeProgram for ListBfsTree {
    fn arity(&self) -> usize {
        self.n * (self.n - 1)
    }
    fn alphabet(&self) -> usize {
        self.n + 1
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
                for i in 0..n - 1 {
                    match read_cell(sink, n, u, i, &discovered)? {
                        CellOutcome::End => break,
                        CellOutcome::Known => {}
                        CellOutcome::New(w) => {
                            discovered[w] = true;
                            parents[w] = Some(u);
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
        Ok(self.labels.label_or_invalid(&parents))
    }
}

/// Connected components over list oracles.
pub struct ListComponents {
    pub n: usize,
    pub labels: Arc<Interner<Vec<Vec<usize>>>>,
}

impl TreeProgram for ListComponents {
    fn arity(&self) -> usize {
        self.n * (self.n - 1)
    }
    fn alphabet(&self) -> usize {
        self.n + 1
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
                for i in 0..n - 1 {
                    match read_cell(sink, n, u, i, &discovered)? {
                        CellOutcome::End => break,
                        CellOutcome::Known => {}
                        CellOutcome::New(w) => {
                            discovered[w] = true;
                            comp.push(w);
                            queue.push_back(w);
                        }
                    }
                }
            }
            comp.sort_unstable();
            parts.push(comp);
        }
        Ok(self.labels.label_or_invalid(&parts))
    }
}

/// Directed BFS from `s` over list oracles, halting when `t` appears.
pub struct ListStPath {
    pub n: usize,
    pub s: usize,
    pub t: usize,
    pub labels: Arc<Interner<Option<Vec<usize>>>>,
}

impl TreeProgram for ListStPath {
    fn arity(&self) -> usize {
        self.n * (self.n - 1)
    }
    fn alphabet(&self) -> usize {
        self.n + 1
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
            for i in 0..n - 1 {
                match read_cell(sink, n, u, i, &discovered)? {
                    CellOutcome::End => break,
                    CellOutcome::Known => {}
                    CellOutcome::New(w) => {
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
        }
        Ok(self.labels.label_or_invalid(&None))
    }
}

/// One-pass bipartiteness over list oracles. While scanning the row of a
/// parity-`p` vertex, discovered vertices of the *opposite* parity are
/// routine (black), but any discovered vertex of the *same* parity is an
/// odd cycle, so those form a red block that halts the sweep. Every row
/// is eventually read in full, and every edge is parity-checked from
/// whichever endpoint is scanned second.
pub struct ListBipartite {
    pub n: usize,
}

impl TreeProgram for ListBipartite {
    fn arity(&self) -> usize {
        self.n * (self.n - 1)
    }
    fn alphabet(&self) -> usize {
        self.n + 1
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let n = self.n;
        let mut discovered = vec![false; n];
        let mut parity = vec![0u8; n];
        for root in 0..n {
            if discovered[root] {
                continue;
            }
            discovered[root] = true;
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                'row: for i in 0..n - 1 {
                    // Blocks: expected neighbors (u itself plus discovered
                    // opposite parity) in black; discovered same parity in
                    // a red halting block; fresh vertices and the padding
                    // symbol as red singletons.
                    let mut parts: Vec<(Block, Color)> = Vec::new();
                    let mut expected: Vec<Symbol> = vec![u as Symbol];
                    let mut odd: Vec<Symbol> = Vec::new();
                    for w in 0..n {
                        if w == u || !discovered[w] {
                            continue;
                        }
                        if parity[w] == parity[u] {
                            odd.push(w as Symbol);
                        } else {
                            expected.push(w as Symbol);
                        }
                    }
                    parts.push((Block::new(expected), Color::Black));
                    let odd_block = if odd.is_empty() {
                        None
                    } else {
                        parts.push((Block::new(odd), Color::Red));
                        Some(parts.len() - 1)
                    };
                    let mut fresh = Vec::new();
                    for w in 0..n {
                        if !discovered[w] {
                            parts.push((Block::new(vec![w as Symbol]), Color::Red));
                            fresh.push(w);
                        }
                    }
                    parts.push((Block::new(vec![n as Symbol]), Color::Red));
                    let end_block = parts.len() - 1;
                    let partition = Partition::new(parts);
                    let block = sink.query(cell_index(n, u, i), partition)?;
                    if block == 0 {
                        continue;
                    }
                    if Some(block) == odd_block {
                        return Ok(1);
                    }
                    if block == end_block {
                        break 'row;
                    }
                    let offset = block - 1 - usize::from(odd_block.is_some());
                    let w = fresh[offset];
                    discovered[w] = true;
                    parity[w] = parity[u] ^ 1;
                    queue.push_back(w);
                }
            }
        }
        Ok(0)
    }
}

/// DFS reverse-finishing order over directed list oracles (DAG domain).
pub struct ListToposort {
    pub n: usize,
    pub labels: Arc<Interner<Vec<usize>>>,
}

impl TreeProgram for ListToposort {
    fn arity(&self) -> usize {
        self.n * (self.n - 1)
    }
    fn alphabet(&self) -> usize {
        self.n + 1
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        fn visit(
            sink: &mut dyn QuerySink,
            n: usize,
            u: usize,
            visited: &mut Vec<bool>,
            finish: &mut Vec<usize>,
        ) -> Result<(), TreeError> {
            visited[u] = true;
            for i in 0..n - 1 {
                match read_cell(sink, n, u, i, visited)? {
                    CellOutcome::End => break,
                    CellOutcome::Known => {}
                    CellOutcome::New(w) => visit(sink, n, w, visited, finish)?,
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

/// Maximum bipartite matching over list oracles (left part `0..a`, right
/// part `a..a+b`). Left rows are read in full the first time the matching
/// search needs them and cached; right rows are never touched. Every cell
/// read is a red singleton — left rows can only hold right ids or the
/// padding symbol, so nothing is ever "expected" — which makes the guess
/// count equal the query count (both at most edges + a).
pub struct ListHk {
    pub a: usize,
    pub b: usize,
    pub labels: Arc<Interner<Vec<(usize, usize)>>>,
}

impl TreeProgram for ListHk {
    fn arity(&self) -> usize {
        let n = self.a + self.b;
        n * (n - 1)
    }
    fn alphabet(&self) -> usize {
        self.a + self.b + 1
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let (a, b) = (self.a, self.b);
        let n = a + b;
        // Left ids can never appear inside a left row, so they make a
        // safe black block; right ids and the padding symbol are red
        // singletons.
        let mut parts: Vec<(Block, Color)> = vec![(
            Block::new((0..a).map(|w| w as Symbol).collect()),
            Color::Black,
        )];
        for w in a..=n {
            parts.push((Block::new(vec![w as Symbol]), Color::Red));
        }
        let partition = Partition::new(parts);

        let mut cache: Vec<Option<Vec<usize>>> = vec![None; a];
        let mut poisoned = false;
        let result =
            classical::hopcroft_karp_with(a, b, &mut |u| -> Result<Vec<usize>, TreeError> {
                if let Some(row) = &cache[u] {
                    return Ok(row.clone());
                }
                let mut row = Vec::new();
                for i in 0..n - 1 {
                    let block = sink.query(cell_index(n, u, i), partition.clone())?;
                    if block == 0 {
                        // A left id inside a left row: not a bipartite
                        // encoding. Finish with an out-of-range label so
                        // validation flags it.
                        poisoned = true;
                        break;
                    }
                    let w = a + block - 1;
                    if w == n {
                        break;
                    }
                    row.push(w);
                }
                cache[u] = Some(row.clone());
                Ok(row)
            })?;
        if poisoned {
            return Ok(self.labels.len());
        }
        Ok(self.labels.label_or_invalid(&result))
    }
}

/// Renders a matching like `{(0,3),(1,4)}`.
pub fn render_matching(m: &Vec<(usize, usize)>) -> String {
    let cells: Vec<String> = m.iter().map(|(u, w)| format!("({u},{w})")).collect();
    format!("{{{}}}", cells.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tree_metrics;
    use crate::model::{validate, FunctionSpec};

    use super::super::adjmatrix::{render_parents, render_partition};
    use super::super::graph::{all_bipartite, all_digraphs, all_undirected, GraphInstance};

    fn list_spec(
        instances: &[GraphInstance],
        labels: Vec<Label>,
        m: usize,
        names: Vec<String>,
    ) -> FunctionSpec {
        let n = instances[0].n();
        let inputs = instances.iter().map(|g| g.list_string()).collect();
        FunctionSpec::with_label_names(n * (n - 1), n + 1, m, inputs, labels, names).unwrap()
    }

    #[test]
    fn list_bfs_matches_the_matrix_forest_on_canonical_encodings() {
        let instances = all_undirected(4);
        let mut interner = Interner::new(render_parents);
        let labels: Vec<Label> = instances
            .iter()
            .map(|g| interner.intern(classical::bfs_forest(g).0))
            .collect();
        let interner = Arc::new(interner);
        let f = list_spec(&instances, labels, interner.len(), interner.names());
        let tree = ListBfsTree {
            n: 4,
            labels: interner,
        };
        assert!(validate(&tree, &f).is_valid());
        let m = tree_metrics(&tree, &f).unwrap();
        // Cells read stay near the arc count; reds stay linear.
        assert!(m.t <= 4 + 12 && m.g <= 8, "T={} G={}", m.t, m.g);
    }

    #[test]
    fn list_components_match_floodfill_on_every_row_ordering() {
        // Component structure ignores row order, so non-canonical
        // encodings of the same graph must agree.
        let instances = all_undirected(3);
        let mut interner = Interner::new(render_partition);
        let mut inputs = Vec::new();
        let mut labels = Vec::new();
        for g in &instances {
            let label = interner.intern(classical::components(g));
            for enc in super::super::graph::all_list_encodings(g) {
                inputs.push(enc);
                labels.push(label);
            }
        }
        let interner = Arc::new(interner);
        let f =
            FunctionSpec::with_label_names(6, 4, interner.len(), inputs, labels, interner.names())
                .unwrap();
        let tree = ListComponents {
            n: 3,
            labels: interner,
        };
        assert!(validate(&tree, &f).is_valid());
    }

    #[test]
    fn list_st_path_finds_shortest_routes() {
        let instances = all_digraphs(3);
        let mut interner = Interner::new(|p: &Option<Vec<usize>>| match p {
            None => "unreachable".to_string(),
            Some(path) => super::super::adjmatrix::render_order(path),
        });
        let labels: Vec<Label> = instances
            .iter()
            .map(|g| interner.intern(classical::shortest_path(g, 0, 2)))
            .collect();
        let interner = Arc::new(interner);
        let f = list_spec(&instances, labels, interner.len(), interner.names());
        let tree = ListStPath {
            n: 3,
            s: 0,
            t: 2,
            labels: interner,
        };
        assert!(validate(&tree, &f).is_valid());
    }

    #[test]
    fn list_bipartiteness_agrees_with_two_coloring_on_every_ordering() {
        let instances = all_undirected(3);
        let mut inputs = Vec::new();
        let mut labels = Vec::new();
        for g in &instances {
            let yes = classical::is_bipartite(g);
            for enc in super::super::graph::all_list_encodings(g) {
                inputs.push(enc);
                labels.push(usize::from(!yes));
            }
        }
        let f = FunctionSpec::with_label_names(
            6,
            4,
            2,
            inputs,
            labels,
            vec!["bipartite".into(), "not_bipartite".into()],
        )
        .unwrap();
        let tree = ListBipartite { n: 3 };
        assert!(validate(&tree, &f).is_valid());
    }

    #[test]
    fn list_toposort_matches_the_matrix_reference() {
        let instances = super::super::graph::all_dags(3);
        let mut interner = Interner::new(super::super::adjmatrix::render_order);
        let labels: Vec<Label> = instances
            .iter()
            .map(|g| interner.intern(classical::topological_order(g)))
            .collect();
        let interner = Arc::new(interner);
        let f = list_spec(&instances, labels, interner.len(), interner.names());
        let tree = ListToposort {
            n: 3,
            labels: interner,
        };
        assert!(validate(&tree, &f).is_valid());
    }

    #[test]
    fn matching_tree_reproduces_the_reference_matching_and_optimal_size() {
        let (a, b) = (2, 2);
        let instances = all_bipartite(a, b);
        assert_eq!(instances.len(), 16);
        let mut interner = Interner::new(render_matching);
        let labels: Vec<Label> = instances
            .iter()
            .map(|g| interner.intern(classical::hopcroft_karp(g, a, b)))
            .collect();
        let interner = Arc::new(interner);
        let f = list_spec(&instances, labels, interner.len(), interner.names());
        let tree = ListHk {
            a,
            b,
            labels: interner,
        };
        assert!(validate(&tree, &f).is_valid());
        for g in &instances {
            let got = classical::hopcroft_karp(g, a, b);
            assert!(classical::is_matching(g, &got));
            assert_eq!(got.len(), classical::max_matching_size(g));
        }
        // All reads are surprises, so guesses equal queries.
        let m = tree_metrics(&tree, &f).unwrap();
        assert_eq!(m.t, m.g);
    }
}
