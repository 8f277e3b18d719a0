//! Dual adversary certificates for guess-colored trees.
//!
//! For a tree computing `f` on a finite domain `D`, a feasible certificate
//! assigns every input `x` and coordinate `j` a pair of vectors `u_{x,j}`,
//! `w_{x,j}` such that for all `x, y` in `D`
//!
//! ```text
//!   sum over j with x_j != y_j of  <u_{x,j}, w_{y,j}>  =  1 - [f(x) = f(y)]
//! ```
//!
//! and reports the objective `max_x max( sum_j |u_{x,j}|^2, sum_j |w_{x,j}|^2 )`,
//! which upper-bounds the quantum query complexity of `f` up to a constant.
//!
//! The construction: at the vertex where `x`'s path queries `j`, taking the
//! edge `(v, c)` of weight `W`,
//!
//! * `u_{x,j} = W^{-1/2} |v, c> (x) mu_{B} (x) mu~_{l(x)}`,
//! * `w_{x,j} = sum over off-colors c' of W_{v,c'}^{1/2} |v, c'> (x) nu_{B} (x) nu~_{l(x)}`,
//!
//! where `B` is the block taken, `l(x)` the leaf label, `mu/nu` the paired
//! families of [`crate::family`], and the off-colors are the colors present
//! among the blocks *not* taken at `v`. Pairing `u_{x,j}` with `w_{y,j}`
//! collapses to a single candidate term at the first vertex where the two
//! paths part ways; the `W^{-1/2} * W^{1/2}` factors cancel there because
//! both vectors name the same vertex-color slots, leaving the exact value
//! `1 - [l(x) = l(y)]`. Feasibility checks therefore run in integers; the
//! dense oracle below re-derives the same numbers from literal coordinates.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::family::CrossFamily;
use crate::metrics::TreeMetrics;
use crate::model::{
    evaluate_path, Color, FunctionSpec, Label, Symbol, TreeError, TreeProgram, VertexId,
};

/// How block vectors are indexed at a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyMode {
    /// One family per vertex, sized by that vertex's block count. Smallest
    /// norms, and the default.
    PerVertex,
    /// One fixed family shared by every vertex, indexed by alphabet subsets
    /// (size `2^ell`); blocks are addressed by their symbol bitmask. Slightly
    /// larger norms, but vertex-independent dimensions.
    Subset,
}

impl FamilyMode {
    pub fn parse(s: &str) -> Option<FamilyMode> {
        match s {
            "per-vertex" => Some(FamilyMode::PerVertex),
            "subset" => Some(FamilyMode::Subset),
            _ => None,
        }
    }
}

impl fmt::Display for FamilyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyMode::PerVertex => write!(f, "per-vertex"),
            FamilyMode::Subset => write!(f, "subset"),
        }
    }
}

/// Edge-weight assignment for a tree.
///
/// Weights are keyed by the vertex and the edge color. The generation of a
/// red edge counts the edge itself: a red edge leaving a vertex with `r`
/// red steps above it is the `(r+1)`-st guess and uses the reciprocal of
/// the `(r+1)`-st generation weight, while a black edge under the same
/// vertex stays in generation `r`. This keeps `1/weight` of every red edge
/// — the term the positive side pays — on the same scale as the black
/// steps of the generation the guess *opens*.
#[derive(Clone, Debug)]
pub enum WeightSchedule {
    /// One weight per color everywhere.
    Constant { black: f64, red: f64 },
    /// One weight per generation `g = 0, 1, ...`: black edges in generation
    /// `g` get `w[g]`, red edges opening generation `g` get `1 / w[g]`.
    /// Generations past the end of the list fall back to weight one.
    PerGeneration { w: Vec<f64> },
    /// Explicit per-vertex `(black, red)` weights with a fallback pair.
    PerVertex {
        weights: HashMap<VertexId, (f64, f64)>,
        default: (f64, f64),
    },
}

impl WeightSchedule {
    /// Weight of the edge of color `color` leaving `vertex`, which has
    /// `reds_before` red steps strictly above it.
    pub fn edge_weight(&self, vertex: &VertexId, reds_before: u32, color: Color) -> f64 {
        match self {
            WeightSchedule::Constant { black, red } => match color {
                Color::Black => *black,
                Color::Red => *red,
            },
            WeightSchedule::PerGeneration { w } => {
                let at = |g: usize| w.get(g).copied().unwrap_or(1.0);
                match color {
                    Color::Black => at(reds_before as usize),
                    Color::Red => 1.0 / at(reds_before as usize + 1),
                }
            }
            WeightSchedule::PerVertex { weights, default } => {
                let (b, r) = weights.get(vertex).copied().unwrap_or(*default);
                match color {
                    Color::Black => b,
                    Color::Red => r,
                }
            }
        }
    }

    /// Short descriptor for report rows.
    pub fn describe(&self) -> String {
        match self {
            WeightSchedule::Constant { black, red } => {
                format!("constant(black={black:.6},red={red:.6})")
            }
            WeightSchedule::PerGeneration { w } => {
                let parts: Vec<String> = w.iter().map(|v| format!("{v:.6}")).collect();
                format!("per-generation[{}]", parts.join(","))
            }
            WeightSchedule::PerVertex { weights, .. } => {
                format!("per-vertex({} overrides)", weights.len())
            }
        }
    }
}

/// The balanced constant schedule for worst-case depth `t` and guess count
/// `g`: black weight `sqrt(t/g)`, red weight `sqrt(g/t)`. With it the
/// objective lands at `12 * sqrt(g * t)` or below. A guess-free tree
/// (`g = 0`) degenerates to unit weights (flagged in the returned warnings)
/// and an `8t` objective bound.
pub fn default_weights(t: usize, g: usize) -> (WeightSchedule, Vec<String>) {
    if g == 0 || t == 0 {
        let mut warnings = Vec::new();
        if g == 0 {
            warnings
                .push("guess count is zero; using unit weights (objective bound 8T)".to_string());
        }
        if t == 0 {
            warnings.push("tree never queries; weights are moot".to_string());
        }
        return (
            WeightSchedule::Constant {
                black: 1.0,
                red: 1.0,
            },
            warnings,
        );
    }
    let ratio = t as f64 / g as f64;
    (
        WeightSchedule::Constant {
            black: ratio.sqrt(),
            red: (1.0 / ratio).sqrt(),
        },
        Vec::new(),
    )
}

/// The per-generation schedule tuned to measured generation depths `t_g`:
/// `w[0] = t_0`, `w[g] = sqrt(t_g)` for `g >= 1`. Generations with zero
/// measured depth fall back to weight one (flagged), keeping the schedule
/// usable when the last guess ends the computation immediately.
pub fn generation_weights(t_g: &[usize]) -> (WeightSchedule, Vec<String>) {
    let mut warnings = Vec::new();
    let mut w = Vec::with_capacity(t_g.len());
    for (g, &depth) in t_g.iter().enumerate() {
        if depth == 0 {
            warnings.push(format!(
                "generation {g} has zero measured depth; using weight 1"
            ));
            w.push(1.0);
        } else if g == 0 {
            w.push(depth as f64);
        } else {
            w.push((depth as f64).sqrt());
        }
    }
    (WeightSchedule::PerGeneration { w }, warnings)
}

/// Why a certificate could not be built or checked.
#[derive(Debug, thiserror::Error)]
pub enum CertError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("leaf label {got} disagrees with the function table ({want}) on input #{input}")]
    LeafMismatch {
        input: usize,
        got: Label,
        want: Label,
    },
    #[error("weight for color {color} at vertex {vertex} is {value}; weights must be positive and finite")]
    BadWeight {
        vertex: String,
        color: Color,
        value: f64,
    },
    #[error("subset families need alphabet size <= 60, got {ell}")]
    AlphabetTooWide { ell: usize },
    #[error("vertex {vertex} revisited with inconsistent shape")]
    InconsistentRevisit { vertex: String },
    #[error("dense oracle capped at {cap} inputs, domain has {len}")]
    DomainTooLargeForDense { len: usize, cap: usize },
}

/// One step of one input's path, with everything the certificate needs.
#[derive(Clone, Debug)]
struct CertStep {
    query: usize,
    symbol: Symbol,
    parent: u32,
    color: Color,
    block_key: u64,
    /// Number of blocks at the vertex (the per-vertex family size).
    block_count: usize,
    w_black: f64,
    w_red: f64,
    off_black: bool,
    off_red: bool,
}

impl CertStep {
    fn taken_weight(&self) -> f64 {
        match self.color {
            Color::Black => self.w_black,
            Color::Red => self.w_red,
        }
    }

    fn off_weight_sum(&self) -> f64 {
        let mut s = 0.0;
        if self.off_black {
            s += self.w_black;
        }
        if self.off_red {
            s += self.w_red;
        }
        s
    }

    fn off_has(&self, c: Color) -> bool {
        match c {
            Color::Black => self.off_black,
            Color::Red => self.off_red,
        }
    }
}

#[derive(Clone, Debug)]
struct CertPath {
    steps: Vec<CertStep>,
    label: Label,
}

/// Data shared by all steps at one tree vertex.
#[derive(Clone, Debug)]
struct VertexInfo {
    id: VertexId,
    reds_before: u32,
    block_count: usize,
}

/// A fully materialized certificate for one tree on one finite domain.
#[derive(Clone, Debug)]
pub struct Certificate {
    mode: FamilyMode,
    schedule: WeightSchedule,
    ell: usize,
    m: usize,
    paths: Vec<CertPath>,
    vertices: Vec<VertexInfo>,
}

/// Pair-checking strategy for [`Certificate::verify_feasibility`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    /// Every ordered pair of domain inputs.
    Exhaustive,
    /// `pairs` ordered pairs drawn with a seeded generator.
    Sampled { pairs: usize, seed: u64 },
}

impl fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyMode::Exhaustive => write!(f, "exhaustive"),
            VerifyMode::Sampled { pairs, seed } => write!(f, "sampled:{pairs}@{seed}"),
        }
    }
}

/// Result of a feasibility sweep.
#[derive(Clone, Debug)]
pub struct FeasibilityReport {
    pub pairs_checked: u64,
    pub max_residual: f64,
    /// Domain indices of the worst pair, when any pair was checked.
    pub worst_pair: Option<(usize, usize)>,
    pub mode: VerifyMode,
}

/// Objective value with its per-input breakdown.
#[derive(Clone, Debug)]
pub struct ObjectiveReport {
    /// `max_x max(u_x, w_x)`.
    pub value: f64,
    pub u_max: f64,
    pub w_max: f64,
    pub argmax_u: usize,
    pub argmax_w: usize,
    /// `(u_x, w_x)` per domain input.
    pub per_input: Vec<(f64, f64)>,
}

/// One named inequality `value <= bound` from [`Certificate::bound_check`].
#[derive(Clone, Debug)]
pub struct BoundItem {
    pub name: String,
    pub value: f64,
    pub bound: f64,
}

impl BoundItem {
    pub fn slack(&self) -> f64 {
        self.bound - self.value
    }

    pub fn holds(&self) -> bool {
        self.value <= self.bound + 1e-9
    }
}

/// Deviations between the closed-form certificate arithmetic and literal
/// dense vectors.
#[derive(Clone, Debug)]
pub struct DenseReport {
    pub pairs_checked: u64,
    pub max_pair_deviation: f64,
    pub max_norm_deviation: f64,
    pub dimension: usize,
}

/// Per-input witness masses for per-vertex weight tuning: `m_plus` charges
/// `1/weight` for every edge taken, `m_minus` charges the opposite color's
/// weight at every vertex passed.
#[derive(Clone, Debug)]
pub struct VertexMassReport {
    pub m_plus: Vec<f64>,
    pub m_minus: Vec<f64>,
    pub m_plus_max: f64,
    pub m_minus_max: f64,
    /// `sqrt(max m_plus * max m_minus)` — the scale the schedule controls.
    pub product_bound: f64,
    /// The same bound after one application of the rebalancing rule
    /// `black' = sqrt(black/red), red' = 1/black'` at every vertex.
    pub improved_product_bound: f64,
    /// The rebalanced schedule itself.
    pub improved: WeightSchedule,
}

const DENSE_INPUT_CAP: usize = 256;

impl Certificate {
    /// Builds the certificate for `tree` on the domain of `f`, checking on
    /// the way that every leaf agrees with the table and that all weights
    /// are positive and finite.
    pub fn for_function(
        tree: &dyn TreeProgram,
        f: &FunctionSpec,
        schedule: WeightSchedule,
        mode: FamilyMode,
    ) -> Result<Certificate, CertError> {
        let ell = f.ell();
        if mode == FamilyMode::Subset && ell > 60 {
            return Err(CertError::AlphabetTooWide { ell });
        }
        let mut vertices = vec![VertexInfo {
            id: VertexId::root(),
            reds_before: 0,
            block_count: 0,
        }];
        // Children are interned by (parent, query, block-key), so a vertex
        // is hashed once, not re-hashed per visit.
        let mut children: HashMap<(u32, usize, u64), u32> = HashMap::new();
        let mut paths = Vec::with_capacity(f.len());

        for (xi, x) in f.inputs().iter().enumerate() {
            let transcript = evaluate_path(tree, x)?;
            let want = f.label(xi);
            if transcript.label != want {
                return Err(CertError::LeafMismatch {
                    input: xi,
                    got: transcript.label,
                    want,
                });
            }
            let mut steps = Vec::with_capacity(transcript.len());
            let mut at: u32 = 0;
            for step in &transcript.steps {
                let block_key = match mode {
                    FamilyMode::PerVertex => step.block_index as u64,
                    FamilyMode::Subset => step
                        .block
                        .bitmask()
                        .ok_or(CertError::AlphabetTooWide { ell })?,
                };
                {
                    let info = &mut vertices[at as usize];
                    if info.block_count == 0 {
                        info.block_count = step.block_count;
                        info.reds_before = step.reds_before;
                    } else if info.block_count != step.block_count
                        || info.reds_before != step.reds_before
                    {
                        return Err(CertError::InconsistentRevisit {
                            vertex: info.id.to_string(),
                        });
                    }
                }
                let vertex_id = &vertices[at as usize].id;
                let w_black = schedule.edge_weight(vertex_id, step.reds_before, Color::Black);
                let w_red = schedule.edge_weight(vertex_id, step.reds_before, Color::Red);
                for (c, w) in [(Color::Black, w_black), (Color::Red, w_red)] {
                    if !(w.is_finite() && w > 0.0) {
                        return Err(CertError::BadWeight {
                            vertex: vertex_id.to_string(),
                            color: c,
                            value: w,
                        });
                    }
                }
                steps.push(CertStep {
                    query: step.query,
                    symbol: step.value,
                    parent: at,
                    color: step.color,
                    block_key,
                    block_count: step.block_count,
                    w_black,
                    w_red,
                    off_black: step.off_colors.black,
                    off_red: step.off_colors.red,
                });
                let key = (at, step.query, block_key);
                at = if let Some(&c) = children.get(&key) {
                    c
                } else {
                    let id = vertices[at as usize]
                        .id
                        .child(step.query, step.block.clone());
                    let c = vertices.len() as u32;
                    vertices.push(VertexInfo {
                        id,
                        reds_before: 0,
                        block_count: 0,
                    });
                    children.insert(key, c);
                    c
                };
            }
            paths.push(CertPath {
                steps,
                label: transcript.label,
            });
        }

        Ok(Certificate {
            mode,
            schedule,
            ell,
            m: f.m(),
            paths,
            vertices,
        })
    }

    pub fn mode(&self) -> FamilyMode {
        self.mode
    }

    pub fn schedule(&self) -> &WeightSchedule {
        &self.schedule
    }

    /// Number of distinct tree vertices the domain visits (root included).
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn input_count(&self) -> usize {
        self.paths.len()
    }

    pub fn label(&self, x: usize) -> Label {
        self.paths[x].label
    }

    /// Squared-norm factor of the block family used at a vertex with
    /// `block_count` blocks.
    fn block_norm_sq(&self, block_count: usize) -> f64 {
        match self.mode {
            FamilyMode::PerVertex => crate::family::norm_sq_for(block_count),
            FamilyMode::Subset => 2.0 - 2.0 / (self.ell as f64).exp2(),
        }
    }

    fn out_norm_sq(&self) -> f64 {
        crate::family::norm_sq_for(self.m)
    }

    /// Closed-form constraint sum for the ordered pair `(x, y)`:
    /// `sum over j with x_j != y_j of <u_{x,j}, w_{y,j}>`.
    ///
    /// All terms vanish except possibly at the first step where the two
    /// paths take different blocks; there the weights cancel exactly and
    /// the value is `1 - [label(x) = label(y)]` provided `x`'s edge color
    /// appears among `y`'s off-colors (it always does: `x`'s block is one
    /// of the blocks `y` did not take).
    pub fn pair_sum(&self, x: usize, y: usize) -> f64 {
        let a = &self.paths[x];
        let b = &self.paths[y];
        let common = a.steps.len().min(b.steps.len());
        for t in 0..common {
            let sa = &a.steps[t];
            let sb = &b.steps[t];
            debug_assert_eq!(sa.query, sb.query, "paths agree on blocks but not queries");
            if sa.block_key != sb.block_key {
                debug_assert_ne!(sa.symbol, sb.symbol);
                let present = sb.off_has(sa.color);
                let cross_out = if a.label != b.label { 1.0 } else { 0.0 };
                return if present { cross_out } else { 0.0 };
            }
        }
        0.0
    }

    /// Constraint right-hand side for the pair: `1 - [label(x) = label(y)]`.
    pub fn pair_target(&self, x: usize, y: usize) -> f64 {
        if self.paths[x].label != self.paths[y].label {
            1.0
        } else {
            0.0
        }
    }

    /// Checks `pair_sum == pair_target` over ordered pairs.
    pub fn verify_feasibility(&self, mode: VerifyMode) -> FeasibilityReport {
        let n = self.paths.len();
        let mut max_residual = 0.0f64;
        let mut worst = None;
        let mut pairs = 0u64;
        let consider = |this: &Certificate, x: usize, y: usize| -> f64 {
            (this.pair_sum(x, y) - this.pair_target(x, y)).abs()
        };
        match &mode {
            VerifyMode::Exhaustive => {
                for x in 0..n {
                    for y in 0..n {
                        let r = consider(self, x, y);
                        pairs += 1;
                        if r > max_residual {
                            max_residual = r;
                            worst = Some((x, y));
                        }
                    }
                }
            }
            VerifyMode::Sampled { pairs: count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for _ in 0..*count {
                    let x = rng.gen_range(0..n);
                    let y = rng.gen_range(0..n);
                    let r = consider(self, x, y);
                    pairs += 1;
                    if r > max_residual {
                        max_residual = r;
                        worst = Some((x, y));
                    }
                }
            }
        }
        FeasibilityReport {
            pairs_checked: pairs,
            max_residual,
            worst_pair: worst,
            mode,
        }
    }

    /// Squared-norm sums per input and the overall objective.
    pub fn objective(&self) -> ObjectiveReport {
        let nout = self.out_norm_sq();
        let mut per_input = Vec::with_capacity(self.paths.len());
        let (mut u_max, mut w_max) = (0.0f64, 0.0f64);
        let (mut argmax_u, mut argmax_w) = (0, 0);
        for (xi, path) in self.paths.iter().enumerate() {
            let mut u = 0.0;
            let mut w = 0.0;
            for s in &path.steps {
                let nq = self.block_norm_sq(s.block_count);
                u += nq * nout / s.taken_weight();
                w += nq * nout * s.off_weight_sum();
            }
            if u > u_max {
                u_max = u;
                argmax_u = xi;
            }
            if w > w_max {
                w_max = w;
                argmax_w = xi;
            }
            per_input.push((u, w));
        }
        ObjectiveReport {
            value: u_max.max(w_max),
            u_max,
            w_max,
            argmax_u,
            argmax_w,
            per_input,
        }
    }

    /// Closed-form bound checks appropriate to the active schedule, using
    /// the measured tree statistics.
    ///
    /// * Constant `(b, r)`: `u <= 4(T/b + G/r)`, `w <= 4(2rT + bG)`, and the
    ///   objective below the larger of the two. At the balanced default
    ///   weights both sides merge into `12 sqrt(G T)`.
    /// * Per-generation `w_g`: every input's `u` and `w` below
    ///   `4(T_0/w_0 + sum_{g>=1}(T_g/w_g + w_g))`, and the objective below
    ///   the weight-free form `4 + 8 sum_{g>=1} sqrt(T_g)`.
    /// * Per-vertex schedules have no closed form here; see
    ///   [`Certificate::vertex_masses`].
    pub fn bound_check(&self, metrics: &TreeMetrics) -> Vec<BoundItem> {
        let obj = self.objective();
        let t = metrics.t as f64;
        let g = metrics.g as f64;
        match &self.schedule {
            WeightSchedule::Constant { black, red } => {
                let u_bound = 4.0 * (t / black + g / red);
                let w_bound = 4.0 * (2.0 * red * t + black * g);
                vec![
                    BoundItem {
                        name: "u_side".into(),
                        value: obj.u_max,
                        bound: u_bound,
                    },
                    BoundItem {
                        name: "w_side".into(),
                        value: obj.w_max,
                        bound: w_bound,
                    },
                    BoundItem {
                        name: "objective".into(),
                        value: obj.value,
                        bound: u_bound.max(w_bound),
                    },
                ]
            }
            WeightSchedule::PerGeneration { w } => {
                let at = |g: usize| w.get(g).copied().unwrap_or(1.0);
                let mut per_input_bound = 0.0;
                for (gen, &depth) in metrics.t_g.iter().enumerate() {
                    if gen == 0 {
                        per_input_bound += 4.0 * depth as f64 / at(0);
                    } else {
                        per_input_bound += 4.0 * (depth as f64 / at(gen) + at(gen));
                    }
                }
                let weight_free = 4.0
                    + 8.0
                        * metrics
                            .t_g
                            .iter()
                            .skip(1)
                            .map(|&d| (d as f64).sqrt())
                            .sum::<f64>();
                vec![
                    BoundItem {
                        name: "u_side".into(),
                        value: obj.u_max,
                        bound: per_input_bound,
                    },
                    BoundItem {
                        name: "w_side".into(),
                        value: obj.w_max,
                        bound: per_input_bound,
                    },
                    BoundItem {
                        name: "objective".into(),
                        value: obj.value,
                        bound: weight_free,
                    },
                ]
            }
            WeightSchedule::PerVertex { .. } => Vec::new(),
        }
    }

    /// Per-input positive/negative witness masses and the product bound the
    /// per-vertex rebalancing rule optimizes. Rebalancing replaces each
    /// vertex's `(black, red)` pair by `(sqrt(black/red), sqrt(red/black))`,
    /// never increases the product bound, and is idempotent.
    pub fn vertex_masses(&self) -> VertexMassReport {
        let mass = |black_of: &dyn Fn(u32) -> f64, red_of: &dyn Fn(u32) -> f64| {
            let mut m_plus = Vec::with_capacity(self.paths.len());
            let mut m_minus = Vec::with_capacity(self.paths.len());
            for path in &self.paths {
                let mut mp = 0.0;
                let mut mm = 0.0;
                for s in &path.steps {
                    let (b, r) = (black_of(s.parent), red_of(s.parent));
                    match s.color {
                        Color::Black => {
                            mp += 1.0 / b;
                            mm += r;
                        }
                        Color::Red => {
                            mp += 1.0 / r;
                            mm += b;
                        }
                    }
                }
                m_plus.push(mp);
                m_minus.push(mm);
            }
            (m_plus, m_minus)
        };

        // Current weights, read back from any step at each vertex.
        let mut current: Vec<(f64, f64)> = vec![(1.0, 1.0); self.vertices.len()];
        for path in &self.paths {
            for s in &path.steps {
                current[s.parent as usize] = (s.w_black, s.w_red);
            }
        }
        let cur_b = |v: u32| current[v as usize].0;
        let cur_r = |v: u32| current[v as usize].1;
        let (m_plus, m_minus) = mass(&cur_b, &cur_r);
        let m_plus_max = m_plus.iter().cloned().fold(0.0, f64::max);
        let m_minus_max = m_minus.iter().cloned().fold(0.0, f64::max);

        let improved: Vec<(f64, f64)> = current
            .iter()
            .map(|&(b, r)| {
                let nb = (b / r).sqrt();
                (nb, 1.0 / nb)
            })
            .collect();
        let imp_b = |v: u32| improved[v as usize].0;
        let imp_r = |v: u32| improved[v as usize].1;
        let (ip, im) = mass(&imp_b, &imp_r);
        let ip_max = ip.iter().cloned().fold(0.0, f64::max);
        let im_max = im.iter().cloned().fold(0.0, f64::max);

        let mut weights = HashMap::new();
        for (vi, info) in self.vertices.iter().enumerate() {
            weights.insert(info.id.clone(), improved[vi]);
        }

        VertexMassReport {
            m_plus,
            m_minus,
            m_plus_max,
            m_minus_max,
            product_bound: (m_plus_max * m_minus_max).sqrt(),
            improved_product_bound: (ip_max * im_max).sqrt(),
            improved: WeightSchedule::PerVertex {
                weights,
                default: (1.0, 1.0),
            },
        }
    }

    /// Re-derives pair sums and norms from literal dense coordinates and
    /// reports the largest deviation from the closed forms. Quadratic in
    /// the domain, so capped at 256 inputs.
    pub fn dense_check(&self, f: &FunctionSpec) -> Result<DenseReport, CertError> {
        if self.paths.len() > DENSE_INPUT_CAP {
            return Err(CertError::DomainTooLargeForDense {
                len: self.paths.len(),
                cap: DENSE_INPUT_CAP,
            });
        }
        if self.mode == FamilyMode::Subset && self.ell > 16 {
            return Err(CertError::AlphabetTooWide { ell: self.ell });
        }

        // Lay out one dense slot per (visited vertex, color); each slot is
        // a (block-family dim) x (output-family dim) tensor square.
        let fam_dim = |block_count: usize| -> usize {
            match self.mode {
                FamilyMode::PerVertex => block_count,
                FamilyMode::Subset => 1usize << self.ell,
            }
        };
        let mut offsets: HashMap<(u32, Color), usize> = HashMap::new();
        let mut dim = 0usize;
        for (vi, info) in self.vertices.iter().enumerate() {
            if info.block_count == 0 {
                continue; // leaf-only entry, never queried through
            }
            for c in [Color::Black, Color::Red] {
                offsets.insert((vi as u32, c), dim);
                dim += fam_dim(info.block_count) * self.m;
            }
        }

        let out_family = CrossFamily::new(self.m);
        let block_family = |count: usize| CrossFamily::new(fam_dim(count));

        // Sparse coordinate lists (index, value), sorted by index.
        type Sparse = Vec<(usize, f64)>;
        let tensor_into =
            |base: usize, scale: f64, left: &[f64], right: &[f64], out: &mut Sparse| {
                for (i, &lv) in left.iter().enumerate() {
                    for (j, &rv) in right.iter().enumerate() {
                        let v = scale * lv * rv;
                        if v != 0.0 {
                            out.push((base + i * right.len() + j, v));
                        }
                    }
                }
            };

        // Per input: map query -> (u vector, w vector).
        let mut by_input: Vec<HashMap<usize, (Sparse, Sparse)>> =
            Vec::with_capacity(self.paths.len());
        for path in &self.paths {
            let mut per_query = HashMap::new();
            for s in &path.steps {
                let fam = block_family(s.block_count);
                let block_index = match self.mode {
                    FamilyMode::PerVertex => s.block_key as usize,
                    // In subset mode the family is indexed by all masks;
                    // the block's own mask is its index.
                    FamilyMode::Subset => s.block_key as usize,
                };
                let mu_b = fam.mu(block_index);
                let nu_b = fam.nu(block_index);
                let mu_l = out_family.mu(path.label);
                let nu_l = out_family.nu(path.label);

                let mut u: Sparse = Vec::new();
                let base_taken = offsets[&(s.parent, s.color)];
                tensor_into(
                    base_taken,
                    1.0 / s.taken_weight().sqrt(),
                    &mu_b,
                    &mu_l,
                    &mut u,
                );

                let mut w: Sparse = Vec::new();
                for (c, present, weight) in [
                    (Color::Black, s.off_black, s.w_black),
                    (Color::Red, s.off_red, s.w_red),
                ] {
                    if present {
                        tensor_into(offsets[&(s.parent, c)], weight.sqrt(), &nu_b, &nu_l, &mut w);
                    }
                }
                u.sort_unstable_by_key(|e| e.0);
                w.sort_unstable_by_key(|e| e.0);
                per_query.insert(s.query, (u, w));
            }
            by_input.push(per_query);
        }

        let dot = |a: &Sparse, b: &Sparse| -> f64 {
            let mut s = 0.0;
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].0.cmp(&b[j].0) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        s += a[i].1 * b[j].1;
                        i += 1;
                        j += 1;
                    }
                }
            }
            s
        };

        // Norm deviations against the closed-form objective table.
        let closed = self.objective();
        let mut max_norm_dev = 0.0f64;
        for (xi, per_query) in by_input.iter().enumerate() {
            let mut u_norm = 0.0;
            let mut w_norm = 0.0;
            for (u, w) in per_query.values() {
                u_norm += dot(u, u);
                w_norm += dot(w, w);
            }
            let (cu, cw) = closed.per_input[xi];
            max_norm_dev = max_norm_dev
                .max((u_norm - cu).abs())
                .max((w_norm - cw).abs());
        }

        // Pair deviations against the closed-form pair sums.
        let inputs = f.inputs();
        let mut max_pair_dev = 0.0f64;
        let mut pairs = 0u64;
        for x in 0..self.paths.len() {
            for y in 0..self.paths.len() {
                let mut sum = 0.0;
                for (j, (u, _)) in &by_input[x] {
                    if inputs[x][*j] == inputs[y][*j] {
                        continue;
                    }
                    if let Some((_, wv)) = by_input[y].get(j) {
                        sum += dot(u, wv);
                    }
                }
                let closed_sum = self.pair_sum(x, y);
                max_pair_dev = max_pair_dev.max((sum - closed_sum).abs());
                pairs += 1;
            }
        }

        Ok(DenseReport {
            pairs_checked: pairs,
            max_pair_deviation: max_pair_dev,
            max_norm_deviation: max_norm_dev,
            dimension: dim,
        })
    }

    /// Structured view of `u_{x,j}`; zero when `x` never queries `j`.
    pub fn build_u(&self, x: usize, j: usize) -> StructuredVector {
        self.build_vector(x, j, VectorRole::U)
    }

    /// Structured view of `w_{x,j}`; zero when `x` never queries `j`.
    pub fn build_w(&self, x: usize, j: usize) -> StructuredVector {
        self.build_vector(x, j, VectorRole::W)
    }

    fn build_vector(&self, x: usize, j: usize, role: VectorRole) -> StructuredVector {
        let path = &self.paths[x];
        let Some(s) = path.steps.iter().find(|s| s.query == j) else {
            return StructuredVector::zero(role, path.label);
        };
        let terms = match role {
            VectorRole::U => vec![(s.color, 1.0 / s.taken_weight().sqrt())],
            VectorRole::W => {
                let mut t = Vec::new();
                if s.off_black {
                    t.push((Color::Black, s.w_black.sqrt()));
                }
                if s.off_red {
                    t.push((Color::Red, s.w_red.sqrt()));
                }
                t
            }
        };
        StructuredVector {
            role,
            vertex: Some(self.vertices[s.parent as usize].id.clone()),
            terms,
            block_key: s.block_key,
            family_size: match self.mode {
                FamilyMode::PerVertex => s.block_count,
                FamilyMode::Subset => 1usize << self.ell,
            },
            label: path.label,
        }
    }
}

/// Which side of the constraint a structured vector sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorRole {
    U,
    W,
}

/// A certificate vector in factored form: scalar terms on (vertex, color)
/// slots, tensored with the block-family vector `block_key` and the
/// output-family vector `label`.
#[derive(Clone, Debug)]
pub struct StructuredVector {
    pub role: VectorRole,
    /// `None` encodes the zero vector.
    pub vertex: Option<VertexId>,
    pub terms: Vec<(Color, f64)>,
    pub block_key: u64,
    pub family_size: usize,
    pub label: Label,
}

impl StructuredVector {
    fn zero(role: VectorRole, label: Label) -> StructuredVector {
        StructuredVector {
            role,
            vertex: None,
            terms: Vec::new(),
            block_key: 0,
            family_size: 0,
            label,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vertex.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{all_strings, Partition, QuerySink};

    /// Scans for 2s over [3]^n and reports whether it saw at least two.
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

    fn build(n: usize, mode: FamilyMode) -> (Certificate, FunctionSpec, TreeMetrics) {
        let tree = StopAtTwoTwos { n };
        let f = spec(n);
        let metrics = crate::metrics::tree_metrics(&tree, &f).unwrap();
        let (schedule, warn) = default_weights(metrics.t, metrics.g);
        assert!(warn.is_empty());
        let cert = Certificate::for_function(&tree, &f, schedule, mode).unwrap();
        (cert, f, metrics)
    }

    #[test]
    fn pair_sums_hit_their_targets_exhaustively() {
        let (cert, _, _) = build(4, FamilyMode::PerVertex);
        let report = cert.verify_feasibility(VerifyMode::Exhaustive);
        assert_eq!(report.pairs_checked, 81 * 81);
        assert_eq!(
            report.max_residual, 0.0,
            "worst pair {:?}",
            report.worst_pair
        );
    }

    #[test]
    fn subset_families_are_also_feasible() {
        let (cert, _, _) = build(4, FamilyMode::Subset);
        let report = cert.verify_feasibility(VerifyMode::Exhaustive);
        assert_eq!(report.max_residual, 0.0);
    }

    #[test]
    fn objective_meets_the_balanced_bound() {
        let (cert, _, metrics) = build(5, FamilyMode::PerVertex);
        let obj = cert.objective();
        let target = 12.0 * ((metrics.g * metrics.t) as f64).sqrt();
        assert!(obj.value <= target + 1e-9, "{} > {}", obj.value, target);
        for item in cert.bound_check(&metrics) {
            assert!(
                item.holds(),
                "{} = {} > {}",
                item.name,
                item.value,
                item.bound
            );
        }
    }

    #[test]
    fn dense_oracle_agrees_with_closed_forms() {
        let (cert, f, _) = build(4, FamilyMode::PerVertex);
        let dense = cert.dense_check(&f).unwrap();
        assert!(
            dense.max_pair_deviation < 1e-9,
            "{}",
            dense.max_pair_deviation
        );
        assert!(
            dense.max_norm_deviation < 1e-9,
            "{}",
            dense.max_norm_deviation
        );
    }

    #[test]
    fn dense_oracle_agrees_in_subset_mode() {
        let (cert, f, _) = build(4, FamilyMode::Subset);
        let dense = cert.dense_check(&f).unwrap();
        assert!(dense.max_pair_deviation < 1e-9);
        assert!(dense.max_norm_deviation < 1e-9);
    }

    #[test]
    fn generation_schedule_builds_and_bounds() {
        let tree = StopAtTwoTwos { n: 9 };
        let f = spec(9);
        let metrics = crate::metrics::tree_metrics(&tree, &f).unwrap();
        assert_eq!(metrics.t_g, vec![9, 8, 0]);
        let (schedule, warnings) = generation_weights(&metrics.t_g);
        assert_eq!(warnings.len(), 1, "the empty final generation is flagged");
        let cert = Certificate::for_function(&tree, &f, schedule, FamilyMode::PerVertex).unwrap();
        let items = cert.bound_check(&metrics);
        for item in &items {
            assert!(
                item.holds(),
                "{} = {} > {}",
                item.name,
                item.value,
                item.bound
            );
        }
        // The per-input bound evaluates to 8 + 16*sqrt(2) here.
        let b = items[0].bound;
        assert!((b - (8.0 + 16.0 * 2.0f64.sqrt())).abs() < 1e-9, "{b}");
    }

    #[test]
    fn rebalancing_never_hurts_and_is_idempotent() {
        let tree = StopAtTwoTwos { n: 4 };
        let f = spec(4);
        let cert = Certificate::for_function(
            &tree,
            &f,
            WeightSchedule::Constant {
                black: 3.0,
                red: 0.2,
            },
            FamilyMode::PerVertex,
        )
        .unwrap();
        let masses = cert.vertex_masses();
        assert!(masses.improved_product_bound <= masses.product_bound + 1e-9);
        let again =
            Certificate::for_function(&tree, &f, masses.improved.clone(), FamilyMode::PerVertex)
                .unwrap()
                .vertex_masses();
        assert!((again.product_bound - masses.improved_product_bound).abs() < 1e-9);
        assert!((again.improved_product_bound - again.product_bound).abs() < 1e-9);
    }

    #[test]
    fn structured_vectors_expose_the_factored_form() {
        let (cert, _, _) = build(3, FamilyMode::PerVertex);
        // Input (2,0,2) queries coordinate 0 first, taking the red block.
        let f = spec(3);
        let xi = f.position(&[2, 0, 2]).unwrap();
        let u = cert.build_u(xi, 0);
        assert!(!u.is_zero());
        assert_eq!(u.terms.len(), 1);
        assert_eq!(u.terms[0].0, Color::Red);
        let w = cert.build_w(xi, 0);
        assert_eq!(w.terms.len(), 1, "only the black block is off at the root");
        assert_eq!(w.terms[0].0, Color::Black);
        // Zero vector for a coordinate never queried: input (2,2) halts at 2.
        let yi = f.position(&[2, 2, 0]).unwrap();
        assert!(cert.build_u(yi, 2).is_zero());
    }

    #[test]
    fn sampled_verification_is_reproducible() {
        let (cert, _, _) = build(4, FamilyMode::PerVertex);
        let mode = VerifyMode::Sampled {
            pairs: 500,
            seed: 11,
        };
        let a = cert.verify_feasibility(mode.clone());
        let b = cert.verify_feasibility(mode);
        assert_eq!(a.max_residual, b.max_residual);
        assert_eq!(a.worst_pair, b.worst_pair);
        assert_eq!(a.pairs_checked, 500);
    }

    #[test]
    fn zero_guess_default_weights_warn() {
        let (schedule, warnings) = default_weights(7, 0);
        assert_eq!(warnings.len(), 1);
        match schedule {
            WeightSchedule::Constant { black, red } => {
                assert_eq!((black, red), (1.0, 1.0));
            }
            _ => panic!("expected constant schedule"),
        }
    }

    #[test]
    fn leaf_table_disagreement_is_rejected() {
        let tree = StopAtTwoTwos { n: 3 };
        // Deliberately wrong table: claims the all-zero string has label 1.
        let f = FunctionSpec::from_outputs(
            3,
            3,
            all_strings(3, 3),
            |x| usize::from(x == [0, 0, 0] || x.iter().filter(|&&s| s == 2).count() >= 2),
            |o| o.to_string(),
        )
        .unwrap();
        let (schedule, _) = default_weights(3, 2);
        let err =
            Certificate::for_function(&tree, &f, schedule, FamilyMode::PerVertex).unwrap_err();
        assert!(matches!(err, CertError::LeafMismatch { .. }));
    }
}
