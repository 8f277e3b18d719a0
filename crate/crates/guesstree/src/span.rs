//! Span programs compiled from guess-colored trees.
//!
//! The compiled program lives over one basis vector per tree vertex the
//! domain can reach (plus a stub child for every untaken block), and has
//! one input-controlled column per (vertex, block) edge:
//!
//! ```text
//!   col(v, B) = sqrt(W_e) * ( |v> - |child(v, B)> ),
//! ```
//!
//! available on input `x` exactly when `x` answers the vertex's query with
//! a symbol in `B`. The target for an input reaching leaf `u` is
//! `|root> - |u>`.
//!
//! * Positive witness: `x` pays `1/sqrt(W_e)` on each edge of its own path;
//!   the columns telescope to the target. Squared mass: `sum 1/W_e`.
//! * Negative witness: the indicator vector of `x`'s path (leaf included).
//!   It is orthogonal to every available column — an available column at a
//!   path vertex is the taken edge (both endpoints on the path), and one at
//!   an off-path vertex has both endpoints off the path — and pairs to 1
//!   with every other leaf's target. Squared image mass: the total weight
//!   of untaken edges hanging off the path.
//!
//! Both witness checks reduce to integer bookkeeping (the `sqrt(W)` factors
//! cancel against the witness coefficients), so axiom verification is exact
//! no matter the weights.

use std::collections::HashMap;

use crate::certificate::WeightSchedule;
use crate::model::{
    evaluate_path, Block, Color, FunctionSpec, Label, Symbol, TreeError, TreeProgram, VertexId,
};

/// Hard cap on basis size; beyond this the explicit compilation is refused.
pub const VERTEX_CAP: usize = 100_000;

/// Why a span program could not be built.
#[derive(Debug, thiserror::Error)]
pub enum SpanError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("span basis would exceed {cap} vertices")]
    TooManyVertices { cap: usize },
    #[error("weight for color {color} at vertex {vertex} is {value}; weights must be positive and finite")]
    BadWeight {
        vertex: String,
        color: Color,
        value: f64,
    },
}

/// One input-controlled column.
#[derive(Clone, Debug)]
pub struct SpanColumn {
    pub vertex: u32,
    pub child: u32,
    pub query: usize,
    pub block: Block,
    pub color: Color,
    pub weight: f64,
}

impl SpanColumn {
    pub fn available(&self, x: &[Symbol]) -> bool {
        self.block.contains(x[self.query])
    }
}

/// Target vector `|root> - |leaf>` for one reached leaf.
#[derive(Clone, Debug)]
pub struct SpanTarget {
    pub leaf: u32,
    pub label: Label,
}

/// One input's compiled path: its vertex set (sorted, leaf included), the
/// columns it pays for, and its target.
#[derive(Clone, Debug)]
struct SpanPath {
    vertices: Vec<u32>,
    /// `(column index, positive-witness coefficient)` per path edge.
    columns: Vec<(usize, f64)>,
    target: usize,
    label: Label,
}

/// A compiled span program together with per-input witnesses.
#[derive(Clone, Debug)]
pub struct SpanProgram {
    /// Basis size: root + one child per column.
    d: usize,
    columns: Vec<SpanColumn>,
    /// Column indices grouped by their tail vertex.
    columns_at: Vec<Vec<usize>>,
    targets: Vec<SpanTarget>,
    paths: Vec<SpanPath>,
    root: u32,
}

/// Witness masses per input and their maxima.
#[derive(Clone, Debug)]
pub struct WitnessSizes {
    pub per_input: Vec<(f64, f64)>,
    pub positive_max: f64,
    pub negative_max: f64,
    pub argmax_positive: usize,
    pub argmax_negative: usize,
}

impl WitnessSizes {
    /// The single number quoted for the program: the larger witness side.
    pub fn wsize(&self) -> f64 {
        self.positive_max.max(self.negative_max)
    }
}

/// Outcome of the exact axiom sweep.
#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub inputs_checked: usize,
    pub checks: u64,
    pub violations: Vec<String>,
}

impl AxiomReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl SpanProgram {
    /// Compiles `tree` over the domain of `f` under `schedule`.
    pub fn build(
        tree: &dyn TreeProgram,
        f: &FunctionSpec,
        schedule: &WeightSchedule,
    ) -> Result<SpanProgram, SpanError> {
        let root: u32 = 0;
        // Vertex 0 is the root; every other vertex is the head of exactly
        // one column, created the first time its (tail, block) edge shows up.
        let mut vertex_count = 1usize;
        let mut vertex_ids: Vec<VertexId> = vec![VertexId::root()];
        let mut columns: Vec<SpanColumn> = Vec::new();
        let mut col_index: HashMap<(u32, usize), usize> = HashMap::new();
        let mut columns_at: Vec<Vec<usize>> = vec![Vec::new()];
        let mut targets: Vec<SpanTarget> = Vec::new();
        let mut target_of_leaf: HashMap<u32, usize> = HashMap::new();
        let mut paths = Vec::with_capacity(f.len());

        for x in f.inputs() {
            let transcript = evaluate_path(tree, x)?;
            let mut at = root;
            let mut path_vertices = vec![root];
            let mut path_columns = Vec::with_capacity(transcript.len());
            for step in &transcript.steps {
                // Materialize every block's column at this vertex.
                for (bi, block) in step.partition.blocks.iter().enumerate() {
                    if col_index.contains_key(&(at, bi)) {
                        continue;
                    }
                    let color = step.partition.colors[bi];
                    let weight =
                        schedule.edge_weight(&vertex_ids[at as usize], step.reds_before, color);
                    if !(weight.is_finite() && weight > 0.0) {
                        return Err(SpanError::BadWeight {
                            vertex: vertex_ids[at as usize].to_string(),
                            color,
                            value: weight,
                        });
                    }
                    vertex_count += 1;
                    if vertex_count > VERTEX_CAP {
                        return Err(SpanError::TooManyVertices { cap: VERTEX_CAP });
                    }
                    let child = vertex_ids.len() as u32;
                    vertex_ids.push(vertex_ids[at as usize].child(step.query, block.clone()));
                    col_index.insert((at, bi), columns.len());
                    columns_at[at as usize].push(columns.len());
                    columns_at.push(Vec::new());
                    columns.push(SpanColumn {
                        vertex: at,
                        child,
                        query: step.query,
                        block: block.clone(),
                        color,
                        weight,
                    });
                }
                let ci = col_index[&(at, step.block_index)];
                path_columns.push((ci, 1.0 / columns[ci].weight.sqrt()));
                at = columns[ci].child;
                path_vertices.push(at);
            }
            let next_target = targets.len();
            let target = *target_of_leaf.entry(at).or_insert_with(|| {
                targets.push(SpanTarget {
                    leaf: at,
                    label: transcript.label,
                });
                next_target
            });
            debug_assert_eq!(targets[target].label, transcript.label);
            path_vertices.sort_unstable();
            paths.push(SpanPath {
                vertices: path_vertices,
                columns: path_columns,
                target,
                label: transcript.label,
            });
        }

        Ok(SpanProgram {
            d: vertex_count,
            columns,
            columns_at,
            targets,
            paths,
            root,
        })
    }

    /// Basis dimension (root plus one vertex per column).
    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[SpanColumn] {
        &self.columns
    }

    pub fn target_count(&self) -> usize {
        self.targets.len()
    }

    pub fn input_count(&self) -> usize {
        self.paths.len()
    }

    pub fn label(&self, x: usize) -> Label {
        self.paths[x].label
    }

    fn on_path(&self, x: usize, vertex: u32) -> bool {
        self.paths[x].vertices.binary_search(&vertex).is_ok()
    }

    /// Squared witness masses: `(sum of 1/W over the path, total W hanging
    /// off the path)` per input.
    pub fn witness_sizes(&self) -> WitnessSizes {
        let mut per_input = Vec::with_capacity(self.paths.len());
        let (mut pos_max, mut neg_max) = (0.0f64, 0.0f64);
        let (mut arg_pos, mut arg_neg) = (0, 0);
        for (xi, path) in self.paths.iter().enumerate() {
            let pos: f64 = path
                .columns
                .iter()
                .map(|&(ci, _)| 1.0 / self.columns[ci].weight)
                .sum();
            // Negative mass: every column with its tail on the path and its
            // head off it. Column heads are unique, so it is enough to walk
            // the path vertices' outgoing columns and skip the taken ones.
            let mut neg = 0.0f64;
            for &v in &path.vertices {
                for &ci in &self.columns_at[v as usize] {
                    let col = &self.columns[ci];
                    if !self.on_path(xi, col.child) {
                        neg += col.weight;
                    }
                }
            }
            if pos > pos_max {
                pos_max = pos;
                arg_pos = xi;
            }
            if neg > neg_max {
                neg_max = neg;
                arg_neg = xi;
            }
            per_input.push((pos, neg));
        }
        WitnessSizes {
            per_input,
            positive_max: pos_max,
            negative_max: neg_max,
            argmax_positive: arg_pos,
            argmax_negative: arg_neg,
        }
    }

    /// Exact verification of all witness axioms over the domain:
    ///
    /// 1. positive witnesses ride available columns only and telescope to
    ///    their own target;
    /// 2. negative witnesses are orthogonal to every available column;
    /// 3. negative witnesses pair to 1 with every other target, 0 with
    ///    their own.
    ///
    /// All three reduce to endpoint membership tests, so a clean sweep means
    /// the axioms hold with zero arithmetic error.
    pub fn verify(&self, f: &FunctionSpec) -> AxiomReport {
        let mut violations = Vec::new();
        let mut checks = 0u64;
        for (xi, path) in self.paths.iter().enumerate() {
            let x = f.input(xi);

            // 1a. Support is available.
            for &(ci, coeff) in &path.columns {
                checks += 1;
                let col = &self.columns[ci];
                if !col.available(x) {
                    violations.push(format!(
                        "input {xi}: positive witness rides unavailable column {ci}"
                    ));
                }
                if coeff <= 0.0 || !coeff.is_finite() {
                    violations.push(format!(
                        "input {xi}: positive witness coefficient {coeff} on column {ci}"
                    ));
                }
            }

            // 1b. Telescoping: +1 at each tail, -1 at each head must leave
            // +1 at the root and -1 at the leaf.
            let mut acc: HashMap<u32, i64> = HashMap::new();
            for &(ci, _) in &path.columns {
                let col = &self.columns[ci];
                *acc.entry(col.vertex).or_insert(0) += 1;
                *acc.entry(col.child).or_insert(0) -= 1;
            }
            let leaf = self.targets[path.target].leaf;
            checks += 1;
            let mut telescopes = true;
            for (&v, &c) in &acc {
                let want = if v == self.root {
                    1
                } else if v == leaf {
                    -1
                } else {
                    0
                };
                if c != want {
                    telescopes = false;
                }
            }
            if self.root == leaf {
                // Depth-zero path: empty sum, nothing to check beyond acc.
                telescopes = acc.values().all(|&c| c == 0);
            }
            if !telescopes {
                violations.push(format!("input {xi}: positive witness misses its target"));
            }

            // 2. Orthogonality of the path indicator to available columns.
            for (ci, col) in self.columns.iter().enumerate() {
                checks += 1;
                if !col.available(x) {
                    continue;
                }
                let tail_on = self.on_path(xi, col.vertex);
                let head_on = self.on_path(xi, col.child);
                if tail_on != head_on {
                    violations.push(format!(
                        "input {xi}: negative witness not orthogonal to available column {ci}"
                    ));
                }
            }

            // 3. Pairings with all targets.
            for (ti, t) in self.targets.iter().enumerate() {
                checks += 1;
                let inner = 1 - i64::from(self.on_path(xi, t.leaf));
                let want = i64::from(ti != path.target);
                if inner != want {
                    violations.push(format!(
                        "input {xi}: negative witness pairs to {inner} with target {ti}"
                    ));
                }
            }
        }
        AxiomReport {
            inputs_checked: self.paths.len(),
            checks,
            violations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::default_weights;
    use crate::metrics::tree_metrics;
    use crate::model::{all_strings, Partition, QuerySink};

    struct StopAtTwoTwos {
        n: usize,
    }

    impl TreeProgram for StopAtTwoTwos {
        fn arity(&self) -> usize {
            self.n
        }
        fn alphabet(&self) -> usize {
            3
        }
        fn run(&self, q: &mut dyn QuerySink) -> Result<Label, TreeError> {
            let mut twos = 0;
            for j in 0..self.n {
                if q.query(j, Partition::split(3, &[2], Color::Red, Color::Black))? == 0 {
                    twos += 1;
                    if twos == 2 {
                        return Ok(1);
                    }
                }
            }
            Ok(0)
        }
    }

    fn spec(n: usize) -> FunctionSpec {
        FunctionSpec::from_outputs(
            n,
            3,
            all_strings(n, 3),
            |x| usize::from(x.iter().filter(|&&s| s == 2).count() >= 2),
            |o| o.to_string(),
        )
        .unwrap()
    }

    #[test]
    fn axioms_hold_exactly_for_the_scanner() {
        let tree = StopAtTwoTwos { n: 4 };
        let f = spec(4);
        let m = tree_metrics(&tree, &f).unwrap();
        let (schedule, _) = default_weights(m.t, m.g);
        let span = SpanProgram::build(&tree, &f, &schedule).unwrap();
        let report = span.verify(&f);
        assert!(report.ok(), "{:?}", report.violations);
        assert_eq!(report.inputs_checked, 81);
    }

    #[test]
    fn witness_masses_meet_the_balanced_bound() {
        for n in 2..=5 {
            let tree = StopAtTwoTwos { n };
            let f = spec(n);
            let m = tree_metrics(&tree, &f).unwrap();
            let (schedule, _) = default_weights(m.t, m.g);
            let span = SpanProgram::build(&tree, &f, &schedule).unwrap();
            let sizes = span.witness_sizes();
            let bound = 2.0 * ((m.g * m.t) as f64).sqrt();
            assert!(
                sizes.positive_max <= bound + 1e-9,
                "n={n}: positive {} > {bound}",
                sizes.positive_max
            );
            assert!(
                sizes.negative_max <= bound + 1e-9,
                "n={n}: negative {} > {bound}",
                sizes.negative_max
            );
        }
    }

    #[test]
    fn basis_is_root_plus_one_head_per_column() {
        let tree = StopAtTwoTwos { n: 3 };
        let f = spec(3);
        let (schedule, _) = default_weights(3, 2);
        let span = SpanProgram::build(&tree, &f, &schedule).unwrap();
        assert_eq!(span.dimension(), span.column_count() + 1);
        // Labels reach two distinct outputs but more than two leaves.
        assert!(span.target_count() >= 2);
    }

    #[test]
    fn tampered_weights_still_pass_axioms() {
        // The axioms are weight-independent; only the masses move.
        let tree = StopAtTwoTwos { n: 3 };
        let f = spec(3);
        let schedule = WeightSchedule::Constant {
            black: 9.0,
            red: 0.01,
        };
        let span = SpanProgram::build(&tree, &f, &schedule).unwrap();
        assert!(span.verify(&f).ok());
        let sizes = span.witness_sizes();
        assert!(sizes.positive_max > 0.0 && sizes.negative_max > 0.0);
    }

    #[test]
    fn nonpositive_weights_are_rejected() {
        let tree = StopAtTwoTwos { n: 3 };
        let f = spec(3);
        let schedule = WeightSchedule::Constant {
            black: 0.0,
            red: 1.0,
        };
        assert!(matches!(
            SpanProgram::build(&tree, &f, &schedule),
            Err(SpanError::BadWeight { .. })
        ));
    }
}
