//! Ready-made problems: specs, trees/families, and registered bounds.
//!
//! Each entry packages a [`FunctionSpec`] over an enumerable domain
//! together with a tree program (or a randomized family of them) that
//! solves it, plus the worst-case query and guess bounds the construction
//! promises. The registry in [`build`] is string-keyed so the CLI and the
//! test suites share one source of truth.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use num_rational::Ratio;

use crate::metrics::TreeFamily;
use crate::model::{FunctionSpec, Label, TreeProgram};

pub mod adjlist;
pub mod adjmatrix;
pub mod classical;
pub mod graph;
pub mod list;
pub mod order;
pub mod reduction;

pub(crate) use order::all_permutations as permutations;

/// Assigns dense ids to distinct structured outputs and remembers a
/// rendered name for each, in first-seen order.
pub struct Interner<S> {
    index: HashMap<S, Label>,
    names: Vec<String>,
    render: Box<dyn Fn(&S) -> String + Send + Sync>,
}

impl<S: Eq + Hash + Clone> Interner<S> {
    pub fn new(render: impl Fn(&S) -> String + Send + Sync + 'static) -> Interner<S> {
        Interner {
            index: HashMap::new(),
            names: Vec::new(),
            render: Box::new(render),
        }
    }

    /// Id for `s`, allocating the next one on first sight.
    pub fn intern(&mut self, s: S) -> Label {
        if let Some(&l) = self.index.get(&s) {
            return l;
        }
        let l = self.names.len();
        self.names.push((self.render)(&s));
        self.index.insert(s, l);
        l
    }

    /// Id for `s` if it was interned; otherwise the one-past-the-end
    /// sentinel, which no spec accepts — validation then reports the
    /// mismatch instead of a panic hiding it.
    pub fn label_or_invalid(&self, s: &S) -> Label {
        self.index.get(s).copied().unwrap_or(self.names.len())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.names.clone()
    }
}

/// Integer key=value parameters for catalog entries.
#[derive(Clone, Debug, Default)]
pub struct Params {
    map: BTreeMap<String, i64>,
}

impl Params {
    pub fn new() -> Params {
        Params::default()
    }

    /// Parses `key=value` pairs.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[S]) -> Result<Params, CatalogError> {
        let mut map = BTreeMap::new();
        for p in pairs {
            let p = p.as_ref();
            let (key, value) = p.split_once('=').ok_or_else(|| CatalogError::BadParam {
                param: p.to_string(),
                reason: "expected key=value".to_string(),
            })?;
            let value: i64 = value.trim().parse().map_err(|_| CatalogError::BadParam {
                param: p.to_string(),
                reason: "value is not an integer".to_string(),
            })?;
            if map.insert(key.trim().to_string(), value).is_some() {
                return Err(CatalogError::BadParam {
                    param: p.to_string(),
                    reason: "key given twice".to_string(),
                });
            }
        }
        Ok(Params { map })
    }

    pub fn set(mut self, key: &str, value: i64) -> Params {
        self.map.insert(key.to_string(), value);
        self
    }

    fn get(&self, key: &str) -> Option<i64> {
        self.map.get(key).copied()
    }

    /// Nonnegative integer with a default.
    pub fn size(&self, key: &str, default: usize) -> Result<usize, CatalogError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) if v >= 0 => Ok(v as usize),
            Some(v) => Err(CatalogError::BadParam {
                param: format!("{key}={v}"),
                reason: "must be nonnegative".to_string(),
            }),
        }
    }

    pub fn seed(&self, default: u64) -> u64 {
        self.get("seed").map(|v| v as u64).unwrap_or(default)
    }

    /// Rejects keys outside the accepted set for a problem.
    pub fn check_keys(&self, accepted: &[&str]) -> Result<(), CatalogError> {
        for key in self.map.keys() {
            if !accepted.contains(&key.as_str()) {
                return Err(CatalogError::UnknownKey {
                    key: key.clone(),
                    accepted: accepted.join(", "),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown problem '{0}'; known: {}", PROBLEMS.join(", "))]
    UnknownProblem(String),
    #[error("bad parameter '{param}': {reason}")]
    BadParam { param: String, reason: String },
    #[error("unknown parameter '{key}'; accepted: {accepted}")]
    UnknownKey { key: String, accepted: String },
    #[error("domain too large: {what} needs {size} inputs (cap {cap})")]
    DomainTooBig { what: String, size: u128, cap: u128 },
}

/// Hard cap on enumerated domain sizes.
const DOMAIN_CAP: u128 = 1 << 20;

fn checked_pow(what: &str, ell: usize, n: usize) -> Result<(), CatalogError> {
    let size = (ell as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > DOMAIN_CAP {
        return Err(CatalogError::DomainTooBig {
            what: what.to_string(),
            size,
            cap: DOMAIN_CAP,
        });
    }
    Ok(())
}

/// How an entry's members relate to its function table.
#[derive(Clone, Debug, PartialEq)]
pub enum MemberKind {
    /// Every member computes the registered function exactly.
    Deterministic,
    /// Members may err; each input must still succeed with at least this
    /// probability under the family distribution.
    Randomized { success_floor: f64 },
}

/// A packaged problem: domain, solver, and its promised bounds.
pub struct CatalogEntry {
    pub name: String,
    pub problem: String,
    pub spec: FunctionSpec,
    pub family: TreeFamily,
    pub kind: MemberKind,
    /// Worst-case path length any member may reach on the domain.
    pub t_bound: f64,
    pub t_formula: String,
    /// Worst-case red count (deterministic) or expected red count bound.
    pub g_bound: f64,
    pub g_formula: String,
    /// Exact expected red count when the construction pins one down.
    pub exact_expected_g: Option<Ratio<i64>>,
    pub notes: String,
}

impl CatalogEntry {
    /// The single tree of a deterministic entry.
    pub fn tree(&self) -> Arc<dyn TreeProgram> {
        self.family.member(0).tree.clone()
    }

    pub fn is_deterministic(&self) -> bool {
        self.kind == MemberKind::Deterministic
    }
}

/// Problem names accepted by [`build`].
pub const PROBLEMS: &[&str] = &[
    "search",
    "counting",
    "threshold",
    "two_twos",
    "min",
    "k_min",
    "matrix_bfs_tree",
    "matrix_dfs_tree",
    "matrix_components",
    "matrix_bipartiteness",
    "matrix_forest_detection",
    "matrix_st_shortest_path",
    "matrix_topological_sort",
    "matrix_scc",
    "matrix_smallest_cycle_via_vertex",
    "matrix_k_cycle_via_vertex",
    "list_bfs_tree",
    "list_st_shortest_path",
    "list_bipartiteness",
    "list_topological_sort",
    "list_components",
    "list_hopcroft_karp",
];

fn single(name: &str, tree: Arc<dyn TreeProgram>) -> TreeFamily {
    TreeFamily::uniform(vec![(name.to_string(), tree)])
}

fn entry(
    problem: &str,
    name: String,
    spec: FunctionSpec,
    family: TreeFamily,
    kind: MemberKind,
    t_bound: f64,
    t_formula: &str,
    g_bound: f64,
    g_formula: &str,
    exact_expected_g: Option<Ratio<i64>>,
    notes: &str,
) -> CatalogEntry {
    CatalogEntry {
        name,
        problem: problem.to_string(),
        spec,
        family,
        kind,
        t_bound,
        t_formula: t_formula.to_string(),
        g_bound,
        g_formula: g_formula.to_string(),
        exact_expected_g,
        notes: notes.to_string(),
    }
}

fn undirected_domain(n: usize) -> Result<Vec<graph::GraphInstance>, CatalogError> {
    if n < 2 || n > 5 {
        return Err(CatalogError::BadParam {
            param: format!("n={n}"),
            reason: "undirected domains are enumerated for 2 <= n <= 5".to_string(),
        });
    }
    Ok(graph::all_undirected(n))
}

/// List-oracle domains carry `n(n-1)` coordinates per instance, so they
/// stay a step smaller than the matrix ones.
fn list_n(n: usize) -> Result<usize, CatalogError> {
    if !(2..=4).contains(&n) {
        return Err(CatalogError::BadParam {
            param: format!("n={n}"),
            reason: "list domains are enumerated for 2 <= n <= 4".to_string(),
        });
    }
    Ok(n)
}

fn digraph_domain(n: usize) -> Result<Vec<graph::GraphInstance>, CatalogError> {
    if n < 2 || n > 4 {
        return Err(CatalogError::BadParam {
            param: format!("n={n}"),
            reason: "digraph domains are enumerated for 2 <= n <= 4".to_string(),
        });
    }
    Ok(graph::all_digraphs(n))
}

fn matrix_spec_from(
    instances: &[graph::GraphInstance],
    labels: Vec<Label>,
    m: usize,
    names: Vec<String>,
) -> FunctionSpec {
    let g0 = &instances[0];
    let inputs = instances.iter().map(|g| g.matrix_string()).collect();
    FunctionSpec::with_label_names(g0.matrix_len(), 2, m, inputs, labels, names)
        .expect("matrix domain is well-formed")
}

fn list_spec_from(
    instances: &[graph::GraphInstance],
    labels: Vec<Label>,
    m: usize,
    names: Vec<String>,
) -> FunctionSpec {
    let n = instances[0].n();
    let inputs = instances.iter().map(|g| g.list_string()).collect();
    FunctionSpec::with_label_names(n * (n - 1), n + 1, m, inputs, labels, names)
        .expect("list domain is well-formed")
}

/// Builds the entry for `problem` with the given parameters; see
/// [`PROBLEMS`] for the accepted names and each arm for its keys.
pub fn build(problem: &str, params: &Params) -> Result<CatalogEntry, CatalogError> {
    match problem {
        "search" => {
            params.check_keys(&["n", "ell", "q"])?;
            let n = params.size("n", 6)?;
            let ell = params.size("ell", 2)?.max(2);
            let q = params.size("q", 1)? as u16;
            let spec = list::search_spec(n, ell, q);
            let tree = Arc::new(list::SearchTree { n, ell, q });
            Ok(entry(
                problem,
                format!("search-n{n}"),
                spec,
                single("scan", tree),
                MemberKind::Deterministic,
                n as f64,
                "n",
                1.0,
                "1",
                None,
                "scan for one marked symbol, guessing absence",
            ))
        }
        "counting" => {
            params.check_keys(&["n", "ell", "q", "r"])?;
            let n = params.size("n", 5)?;
            let ell = params.size("ell", 3)?.max(2);
            let q = params.size("q", 1)? as u16;
            let r = params.size("r", 2)?;
            let spec = list::counting_spec(n, ell, q, r);
            let tree = Arc::new(list::CountingTree { n, ell, q, r });
            Ok(entry(
                problem,
                format!("counting-n{n}-r{r}"),
                spec,
                single("scan", tree),
                MemberKind::Deterministic,
                n as f64,
                "n",
                r as f64,
                "r",
                None,
                "count occurrences on a domain promising at most r",
            ))
        }
        "threshold" => {
            params.check_keys(&["n", "ell", "q", "k"])?;
            let n = params.size("n", 5)?;
            let ell = params.size("ell", 2)?.max(2);
            let q = params.size("q", 1)? as u16;
            let k = params.size("k", 2)?;
            checked_pow("threshold domain", ell, n)?;
            let spec = list::threshold_spec(n, ell, q, k);
            let tree = Arc::new(list::ThresholdTree { n, ell, q, k });
            Ok(entry(
                problem,
                format!("threshold-n{n}-k{k}"),
                spec,
                single("scan", tree),
                MemberKind::Deterministic,
                n as f64,
                "n",
                (k + 1) as f64,
                "k+1",
                None,
                "halt at the (k+1)-th occurrence",
            ))
        }
        "two_twos" => {
            params.check_keys(&["n"])?;
            let n = params.size("n", 5)?;
            checked_pow("ternary cube", 3, n)?;
            let spec = list::two_twos_spec(n);
            let tree = Arc::new(list::TwoTwosTree { n });
            Ok(entry(
                problem,
                format!("two-twos-n{n}"),
                spec,
                single("scan", tree),
                MemberKind::Deterministic,
                n as f64,
                "n",
                2.0,
                "2",
                None,
                "halt at the second 2",
            ))
        }
        "min" => {
            params.check_keys(&["n", "ell", "orders_cap", "sample", "seed"])?;
            let n = params.size("n", 4)?.max(1);
            let ell = params.size("ell", 4)?.max(2);
            checked_pow("value cube", ell, n)?;
            let cap = params.size("orders_cap", 5040)?;
            let sample = params.size("sample", 120)?.max(1);
            let (orders, exhaustive) = order::scan_orders(n, cap, sample, params.seed(17));
            let spec = order::min_spec(n, ell);
            let family = order::min_family(n, ell, orders);
            let exact = exhaustive.then(|| order::harmonic(n));
            Ok(entry(
                problem,
                format!("min-n{n}"),
                spec,
                family,
                MemberKind::Deterministic,
                n as f64,
                "n",
                n as f64,
                "E[G] = H_n over scan orders",
                exact,
                "minimum finding under a random scan order",
            ))
        }
        "k_min" => {
            params.check_keys(&["n", "ell", "k", "orders_cap", "sample", "seed"])?;
            let n = params.size("n", 4)?.max(1);
            let ell = params.size("ell", 3)?.max(2);
            let k = params.size("k", 2)?.clamp(1, n);
            checked_pow("value cube", ell, n)?;
            let cap = params.size("orders_cap", 5040)?;
            let sample = params.size("sample", 120)?.max(1);
            let (orders, exhaustive) = order::scan_orders(n, cap, sample, params.seed(17));
            let (spec, interner) = order::k_min_spec(n, ell, k);
            let family = order::k_min_family(n, ell, k, orders, interner);
            let exact = exhaustive.then(|| order::expected_records(n, k));
            Ok(entry(
                problem,
                format!("k-min-n{n}-k{k}"),
                spec,
                family,
                MemberKind::Deterministic,
                n as f64,
                "n",
                n as f64,
                "E[G] = k + k(H_n - H_k) over scan orders",
                exact,
                "k smallest entries under a random scan order",
            ))
        }
        "matrix_bfs_tree" | "matrix_dfs_tree" => {
            params.check_keys(&["n"])?;
            let n = params.size("n", 4)?;
            let instances = undirected_domain(n)?;
            let dfs = problem == "matrix_dfs_tree";
            let (labels, interner) = adjmatrix::intern_structures(
                &instances,
                |g| {
                    if dfs {
                        classical::dfs_forest(g)
                    } else {
                        classical::bfs_forest(g).0
                    }
                },
                adjmatrix::render_parents,
            );
            let spec = matrix_spec_from(&instances, labels, interner.len(), interner.names());
            let tree: Arc<dyn TreeProgram> = if dfs {
                Arc::new(adjmatrix::MatrixDfsTree {
                    n,
                    labels: interner,
                })
            } else {
                Arc::new(adjmatrix::MatrixBfsTree {
                    n,
                    labels: interner,
                })
            };
            Ok(entry(
                problem,
                format!("{}-n{n}", if dfs { "dfs" } else { "bfs" }),
                spec,
                single("sweep", tree),
                MemberKind::Deterministic,
                (n * (n - 1) / 2) as f64,
                "n(n-1)/2",
                (n - 1) as f64,
                "n-1",
                None,
                "spanning forest; every edge answer 1 is a discovery",
            ))
        }
        "matrix_components" => {
            params.check_keys(&["n"])?;
            let n = params.size("n", 4)?;
            let instances = undirected_domain(n)?;
            let (labels, interner) = adjmatrix::intern_structures(
                &instances,
                classical::components,
                adjmatrix::render_partition,
            );
            let spec = matrix_spec_from(&instances, labels, interner.len(), interner.names());
            let tree = Arc::new(adjmatrix::MatrixComponents {
                n,
                labels: interner,
            });
            Ok(entry(
                problem,
                format!("components-n{n}"),
                spec,
                single("sweep", tree),
                MemberKind::Deterministic,
                (n * (n - 1) / 2) as f64,
                "n(n-1)/2",
                (n - 1) as f64,
                "n-1",
                None,
                "connected components from a BFS sweep",
            ))
        }
        "matrix_bipartiteness" => {
            params.check_keys(&["n"])?;
            let n = params.size("n", 4)?;
            let instances = undirected_domain(n)?;
            let labels = instances
                .iter()
                .map(|g| usize::from(!classical::is_bipartite(g)))
                .collect();
            let spec = matrix_spec_from(
                &instances,
                labels,
                2,
                vec!["bipartite".into(), "not_bipartite".into()],
            );
            let tree = Arc::new(adjmatrix::MatrixBipartiteness { n });
            Ok(entry(
                problem,
                format!("bipartiteness-n{n}"),
                spec,
                single("two-phase", tree),
                MemberKind::Deterministic,
                (n * (n - 1) / 2) as f64,
                "n(n-1)/2",
                n as f64,
                "n",
                None,
                "BFS parities, then probe unread same-parity pairs",
            ))
        }
        "matrix_forest_detection" => {
            params.check_keys(&["n"])?;
            let n = params.size("n", 4)?;
            let instances = undirected_domain(n)?;
            let labels = instances
                .iter()
                .map(|g| usize::from(!classical::is_forest(g)))
                .collect();
            let spec = matrix_spec_from(
                &instances,
                labels,
                2,
                vec!["forest".into(), "has_cycle".into()],
            );
            let tree = Arc::new(adjmatrix::MatrixForest { n });
            Ok(entry(
                problem,
                format!("forest-n{n}"),
                spec,
                single("full-dfs", tree),
                MemberKind::Deterministic,
                (n * (n - 1) / 2) as f64,
                "n(n-1)/2",
                n as f64,
                "n",
                None,
                "DFS over every pair, halting on a non-tree edge",
            ))
        }
        "matrix_st_shortest_path" => {
            params.check_keys(&["n", "s", "t"])?;
            let n = params.size("n", 4)?;
            let s = params.size("s", 0)?;
            let t = params.size("t", n.saturating_sub(1))?;
            if s >= n || t >= n {
                return Err(CatalogError::BadParam {
                    param: format!("s={s},t={t}"),
                    reason: format!("endpoints must lie in 0..{n}"),
                });
            }
            let instances = digraph_domain(n)?;
            let (labels, interner) = adjmatrix::intern_structures(
                &instances,
                |g| classical::shortest_path(g, s, t),
                |p| match p {
                    None => "unreachable".to_string(),
                    Some(path) => adjmatrix::render_order(path),
                },
            );
            let spec = matrix_spec_from(&instances, labels, interner.len(), interner.names());
            let tree = Arc::new(adjmatrix::MatrixStPath {
                n,
                s,
                t,
                labels: interner,
            });
            Ok(entry(
                problem,
                format!("st-path-n{n}"),
                spec,
                single("bfs", tree),
                MemberKind::Deterministic,
                (n * (n - 1)) as f64,
                "n(n-1)",
                (n - 1) as f64,
                "n-1",
                None,
                "BFS from s, halting the moment t is discovered",
            ))
        }
        "matrix_topological_sort" => {
            params.check_keys(&["n"])?;
            let n = params.size("n", 4)?;
            if !(2..=4).contains(&n) {
                return Err(CatalogError::BadParam {
                    param: format!("n={n}"),
                    reason: "DAG domains are enumerated for 2 <= n <= 4".to_string(),
                });
            }
            let instances = graph::all_dags(n);
            let (labels, interner) = adjmatrix::intern_structures(
                &instances,
                classical::topological_order,
                adjmatrix::render_order,
            );
            let spec = matrix_spec_from(&instances, labels, interner.len(), interner.names());
            let tree = Arc::new(adjmatrix::MatrixToposort {
                n,
                labels: interner,
            });
            Ok(entry(
                problem,
                format!("toposort-n{n}"),
                spec,
                single("dfs-finish", tree),
                MemberKind::Deterministic,
                (n * (n - 1)) as f64,
                "n(n-1)",
                (n - 1) as f64,
                "n-1",
                None,
                "reverse DFS finishing order on acyclic inputs",
            ))
        }
        "matrix_scc" => {
            params.check_keys(&["n"])?;
            let n = params.size("n", 4)?;
            let instances = digraph_domain(n)?;
            let (labels, interner) = adjmatrix::intern_structures(
                &instances,
                classical::strongly_connected,
                adjmatrix::render_partition,
            );
            let spec = matrix_spec_from(&instances, labels, interner.len(), interner.names());
            let tree = Arc::new(adjmatrix::MatrixScc {
                n,
                labels: interner,
            });
            Ok(entry(
                problem,
                format!("scc-n{n}"),
                spec,
                single("two-pass", tree),
                MemberKind::Deterministic,
                (n * (n - 1)) as f64,
                "n(n-1)",
                (2 * (n - 1)) as f64,
                "2(n-1)",
                None,
                "two lazy DFS passes sharing one coordinate cache",
            ))
        }
        "matrix_smallest_cycle_via_vertex" => {
            params.check_keys(&["n", "v"])?;
            let n = params.size("n", 4)?;
            let v = params.size("v", 0)?;
            if v >= n {
                return Err(CatalogError::BadParam {
                    param: format!("v={v}"),
                    reason: format!("vertex must lie in 0..{n}"),
                });
            }
            let instances = digraph_domain(n)?;
            let (labels, interner) = adjmatrix::intern_structures(
                &instances,
                |g| classical::smallest_cycle_through(g, v),
                |c| c.map_or("no_cycle".to_string(), |l| format!("cycle_len={l}")),
            );
            let spec = matrix_spec_from(&instances, labels, interner.len(), interner.names());
            let tree = Arc::new(adjmatrix::MatrixSmallestCycle {
                n,
                v,
                labels: interner,
            });
            Ok(entry(
                problem,
                format!("smallest-cycle-n{n}-v{v}"),
                spec,
                single("bfs-back-arc", tree),
                MemberKind::Deterministic,
                (n * (n - 1)) as f64,
                "n(n-1)",
                n as f64,
                "n",
                None,
                "distance-ordered discoveries, each probed for a closing arc",
            ))
        }
        "matrix_k_cycle_via_vertex" => {
            params.check_keys(&["k", "v", "rounds", "members", "seed"])?;
            let k = params.size("k", 3)?;
            if !(3..=4).contains(&k) {
                return Err(CatalogError::BadParam {
                    param: format!("k={k}"),
                    reason: "the demonstration instance is built for k in 3..=4".to_string(),
                });
            }
            let n = 2 * k;
            let v = params.size("v", 0)?;
            if v >= n {
                return Err(CatalogError::BadParam {
                    param: format!("v={v}"),
                    reason: format!("vertex must lie in 0..{n}"),
                });
            }
            let rounds = params.size("rounds", reduction::default_rounds(k))?.max(1);
            let members = params.size("members", 40)?.max(1);
            let spec = reduction::k_cycle_spec(k);
            let family = reduction::k_cycle_family(n, v, k, rounds, members, params.seed(7));
            let p = (2.0 * k as f64).powi(-(k as i32 - 1));
            let floor = 1.0 - (1.0 - p).powi(rounds as i32);
            Ok(entry(
                problem,
                format!("k-cycle-k{k}"),
                spec,
                family,
                MemberKind::Randomized {
                    success_floor: (floor - 0.01).max(0.5),
                },
                (n * (n - 1) / 2) as f64,
                "n(n-1)/2 (pairs cached across rounds)",
                (n * (n - 1) / 2) as f64,
                "n(n-1)/2",
                None,
                "color-coded BFS rounds; per-draw success (2k)^-(k-1) on the canonical instance",
            ))
        }
        "list_bfs_tree" => {
            params.check_keys(&["n"])?;
            let n = params.size("n", 3)?;
            let instances = undirected_domain(list_n(n)?)?;
            let mut interner = Interner::new(adjmatrix::render_parents);
            let labels: Vec<Label> = instances
                .iter()
                .map(|g| interner.intern(classical::bfs_forest(g).0))
                .collect();
            let interner = Arc::new(interner);
            let spec = list_spec_from(&instances, labels, interner.len(), interner.names());
            let tree = Arc::new(adjlist::ListBfsTree {
                n,
                labels: interner,
            });
            Ok(entry(
                problem,
                format!("list-bfs-n{n}"),
                spec,
                single("sweep", tree),
                MemberKind::Deterministic,
                (n * n) as f64,
                "arcs + n",
                (2 * n) as f64,
                "2n",
                None,
                "row scans stop at the padding symbol; discoveries and row ends are the only reds",
            ))
        }
        "list_components" => {
            params.check_keys(&["n"])?;
            let n = params.size("n", 3)?;
            let instances = undirected_domain(list_n(n)?)?;
            let mut interner = Interner::new(adjmatrix::render_partition);
            let labels: Vec<Label> = instances
                .iter()
                .map(|g| interner.intern(classical::components(g)))
                .collect();
            let interner = Arc::new(interner);
            let spec = list_spec_from(&instances, labels, interner.len(), interner.names());
            let tree = Arc::new(adjlist::ListComponents {
                n,
                labels: interner,
            });
            Ok(entry(
                problem,
                format!("list-components-n{n}"),
                spec,
                single("sweep", tree),
                MemberKind::Deterministic,
                (n * n) as f64,
                "arcs + n",
                (2 * n) as f64,
                "2n",
                None,
                "connected components over row oracles",
            ))
        }
        "list_st_shortest_path" => {
            params.check_keys(&["n", "s", "t"])?;
            let n = params.size("n", 3)?;
            let s = params.size("s", 0)?;
            let t = params.size("t", n.saturating_sub(1))?;
            if s >= n || t >= n {
                return Err(CatalogError::BadParam {
                    param: format!("s={s},t={t}"),
                    reason: format!("endpoints must lie in 0..{n}"),
                });
            }
            let instances = digraph_domain(n)?;
            let mut interner = Interner::new(|p: &Option<Vec<usize>>| match p {
                None => "unreachable".to_string(),
                Some(path) => adjmatrix::render_order(path),
            });
            let labels: Vec<Label> = instances
                .iter()
                .map(|g| interner.intern(classical::shortest_path(g, s, t)))
                .collect();
            let interner = Arc::new(interner);
            let spec = list_spec_from(&instances, labels, interner.len(), interner.names());
            let tree = Arc::new(adjlist::ListStPath {
                n,
                s,
                t,
                labels: interner,
            });
            Ok(entry(
                problem,
                format!("list-st-path-n{n}"),
                spec,
                single("bfs", tree),
                MemberKind::Deterministic,
                (n * n) as f64,
                "arcs + n",
                (2 * n) as f64,
                "2n",
                None,
                "BFS over row oracles, halting when t appears",
            ))
        }
        "list_bipartiteness" => {
            params.check_keys(&["n"])?;
            let n = params.size("n", 3)?;
            let instances = undirected_domain(list_n(n)?)?;
            let labels = instances
                .iter()
                .map(|g| usize::from(!classical::is_bipartite(g)))
                .collect();
            let spec = list_spec_from(
                &instances,
                labels,
                2,
                vec!["bipartite".into(), "not_bipartite".into()],
            );
            let tree = Arc::new(adjlist::ListBipartite { n });
            Ok(entry(
                problem,
                format!("list-bipartiteness-n{n}"),
                spec,
                single("one-pass", tree),
                MemberKind::Deterministic,
                (n * n) as f64,
                "arcs + n",
                (2 * n + 1) as f64,
                "2n+1",
                None,
                "same-parity discovered neighbors form the red halting block",
            ))
        }
        "list_topological_sort" => {
            params.check_keys(&["n"])?;
            let n = params.size("n", 3)?;
            if !(2..=4).contains(&n) {
                return Err(CatalogError::BadParam {
                    param: format!("n={n}"),
                    reason: "DAG domains are enumerated for 2 <= n <= 4".to_string(),
                });
            }
            let instances = graph::all_dags(n);
            let mut interner = Interner::new(adjmatrix::render_order);
            let labels: Vec<Label> = instances
                .iter()
                .map(|g| interner.intern(classical::topological_order(g)))
                .collect();
            let interner = Arc::new(interner);
            let spec = list_spec_from(&instances, labels, interner.len(), interner.names());
            let tree = Arc::new(adjlist::ListToposort {
                n,
                labels: interner,
            });
            Ok(entry(
                problem,
                format!("list-toposort-n{n}"),
                spec,
                single("dfs-finish", tree),
                MemberKind::Deterministic,
                (n * n) as f64,
                "arcs + n",
                (2 * n) as f64,
                "2n",
                None,
                "reverse DFS finishing order over row oracles",
            ))
        }
        "list_hopcroft_karp" => {
            params.check_keys(&["a", "b"])?;
            let a = params.size("a", 3)?.max(1);
            let b = params.size("b", 3)?.max(1);
            if a * b > 9 {
                return Err(CatalogError::BadParam {
                    param: format!("a={a},b={b}"),
                    reason: "bipartite domains are enumerated for a*b <= 9".to_string(),
                });
            }
            let instances = graph::all_bipartite(a, b);
            let mut interner = Interner::new(adjlist::render_matching);
            let labels: Vec<Label> = instances
                .iter()
                .map(|g| interner.intern(classical::hopcroft_karp(g, a, b)))
                .collect();
            let interner = Arc::new(interner);
            let spec = list_spec_from(&instances, labels, interner.len(), interner.names());
            let tree = Arc::new(adjlist::ListHk {
                a,
                b,
                labels: interner,
            });
            let t_bound = (a * b + a) as f64;
            Ok(entry(
                problem,
                format!("hopcroft-karp-{a}x{b}"),
                spec,
                single("layered", tree),
                MemberKind::Deterministic,
                t_bound,
                "edges + a",
                t_bound,
                "edges + a (every read is red)",
                None,
                "maximum matching reading left rows lazily",
            ))
        }
        other => Err(CatalogError::UnknownProblem(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tree_metrics;
    use crate::model::validate;

    #[test]
    fn params_parse_and_reject_malformed_pairs() {
        let p = Params::from_pairs(&["n=5", "k = 2"]).unwrap();
        assert_eq!(p.get("n"), Some(5));
        assert_eq!(p.get("k"), Some(2));
        assert!(Params::from_pairs(&["n"]).is_err());
        assert!(Params::from_pairs(&["n=x"]).is_err());
        assert!(Params::from_pairs(&["n=1", "n=2"]).is_err());
    }

    #[test]
    fn unknown_problems_and_keys_are_rejected() {
        assert!(matches!(
            build("sorting", &Params::new()),
            Err(CatalogError::UnknownProblem(_))
        ));
        assert!(matches!(
            build("search", &Params::new().set("bogus", 1)),
            Err(CatalogError::UnknownKey { .. })
        ));
    }

    #[test]
    fn every_deterministic_default_entry_is_valid_and_within_bounds() {
        for &problem in PROBLEMS {
            // Shrink the heavyweight graph domains for this smoke pass.
            let params = match problem {
                "matrix_st_shortest_path" | "matrix_scc" | "matrix_smallest_cycle_via_vertex" => {
                    Params::new().set("n", 3)
                }
                "list_hopcroft_karp" => Params::new().set("a", 2).set("b", 2),
                "min" | "k_min" => Params::new().set("n", 3).set("ell", 3),
                _ => Params::new(),
            };
            let e = build(problem, &params).unwrap_or_else(|err| {
                panic!("building {problem} failed: {err}");
            });
            if !e.is_deterministic() {
                continue;
            }
            for member in e.family.members() {
                let report = validate(member.tree.as_ref(), &e.spec);
                assert!(
                    report.is_valid(),
                    "{problem}/{} disagrees with its spec",
                    member.name
                );
                let m = tree_metrics(member.tree.as_ref(), &e.spec).unwrap();
                assert!(
                    (m.t as f64) <= e.t_bound + 1e-9,
                    "{problem}: T={} over bound {}",
                    m.t,
                    e.t_bound
                );
                assert!(
                    (m.g as f64) <= e.g_bound + 1e-9,
                    "{problem}: G={} over bound {}",
                    m.g,
                    e.g_bound
                );
            }
        }
    }

    #[test]
    fn interner_round_trips_and_flags_strangers() {
        let mut i = Interner::new(|s: &u32| format!("v{s}"));
        let a = i.intern(7);
        let b = i.intern(9);
        assert_eq!(i.intern(7), a);
        assert_eq!(i.label_or_invalid(&9), b);
        assert_eq!(i.label_or_invalid(&1), i.len());
        assert_eq!(i.names(), vec!["v7".to_string(), "v9".to_string()]);
    }
}
