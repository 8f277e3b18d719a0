//! Run orchestration for the CLI: resolve a configuration into a concrete
//! instance (a catalog entry or a tree/table file pair), execute one
//! command against it, and assemble a deterministic [`RunReport`].
//!
//! Exit-code contract: [`run`] returns [`RunError::Malformed`] when the
//! inputs themselves violate the model — unknown problems, out-of-range
//! parameters, ill-formed tree files, unusable weights — and the message
//! names the violated invariant (the CLI maps this to exit code 2). A
//! well-formed run whose assertions fail comes back `Ok` with
//! `pass == false` (exit code 1); a clean run passes (exit code 0).

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::Arc;

use serde::Deserialize;

use crate::catalog::adjmatrix::MatrixBipartiteness;
use crate::catalog::{self, classical, graph, order, CatalogEntry, MemberKind, Params};
use crate::certificate::{
    default_weights, generation_weights, Certificate, FamilyMode, VerifyMode, WeightSchedule,
};
use crate::ensemble::EnsembleCertificate;
use crate::metrics::{ensemble_metrics, tree_metrics, ExpectationMode, TreeFamily, TreeMetrics};
use crate::model::{evaluate_path, validate, FunctionSpec, Symbol, TreeProgram, VertexId};
use crate::report::{bound_formula, fmt_f, fmt_pass, fmt_ratio, RunReport, Table};
use crate::span::SpanProgram;
use crate::treefile::{table_from_json, ExplicitTree};

/// What the run should do.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Measure depth/guess statistics (exact, or in expectation for
    /// families) and compare them against registered claims.
    Analyze,
    /// Build the dual certificate, verify feasibility, and check the
    /// closed-form objective bounds.
    Certify,
    /// Compile the span program and check its axioms and witness sizes.
    Span,
    /// Build the family certificate: state-generation residuals, success
    /// probabilities, and the mixture objective.
    Ensemble,
    /// Range sweeps with per-size bound checks.
    Sweep,
    /// Re-run every member over the whole domain and report disagreements.
    Validate,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        match s {
            "analyze" => Some(Command::Analyze),
            "certify" => Some(Command::Certify),
            "span" => Some(Command::Span),
            "ensemble" => Some(Command::Ensemble),
            "sweep" => Some(Command::Sweep),
            "validate" => Some(Command::Validate),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Certify => "certify",
            Command::Span => "span",
            Command::Ensemble => "ensemble",
            Command::Sweep => "sweep",
            Command::Validate => "validate",
        }
    }
}

/// Where the instance comes from.
#[derive(Clone, Debug)]
pub enum Source {
    /// A registered problem with `key=value` parameters.
    Catalog { problem: String, params: Params },
    /// An explicit tree document plus the function table it should decide.
    Files {
        tree: PathBuf,
        table: Option<PathBuf>,
    },
}

/// Pair-checking effort, combined with the run seed into a [`VerifyMode`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeSpec {
    Exhaustive,
    Sampled { pairs: usize },
}

impl ModeSpec {
    /// Accepts `exhaustive` or `sampled:N`.
    pub fn parse(s: &str) -> Result<ModeSpec, String> {
        if s == "exhaustive" {
            return Ok(ModeSpec::Exhaustive);
        }
        if let Some(rest) = s.strip_prefix("sampled:") {
            let pairs: usize = rest
                .parse()
                .map_err(|_| format!("bad sample count '{rest}' in mode '{s}'"))?;
            if pairs == 0 {
                return Err("sampled mode needs at least one pair".to_string());
            }
            return Ok(ModeSpec::Sampled { pairs });
        }
        Err(format!(
            "unknown mode '{s}' (expected 'exhaustive' or 'sampled:N')"
        ))
    }

    pub fn to_verify(self, seed: u64) -> VerifyMode {
        match self {
            ModeSpec::Exhaustive => VerifyMode::Exhaustive,
            ModeSpec::Sampled { pairs } => VerifyMode::Sampled { pairs, seed },
        }
    }
}

/// Which edge-weight schedule to certify under.
#[derive(Clone, Debug)]
pub enum WeightSelector {
    /// Balanced constants `sqrt(T/G)` / `sqrt(G/T)` from measured stats.
    Default,
    /// Per-generation schedule derived from the measured depth profile.
    Generation,
    /// Explicit constants.
    Constant { black: f64, red: f64 },
    /// Per-vertex overrides from a JSON file.
    File(PathBuf),
}

impl WeightSelector {
    /// Accepts `default`, `generation`, `constant:B,R`, or `file:PATH`.
    pub fn parse(s: &str) -> Result<WeightSelector, String> {
        match s {
            "default" => return Ok(WeightSelector::Default),
            "generation" => return Ok(WeightSelector::Generation),
            _ => {}
        }
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err("empty path in weights 'file:'".to_string());
            }
            return Ok(WeightSelector::File(PathBuf::from(path)));
        }
        if let Some(rest) = s.strip_prefix("constant:") {
            let mut it = rest.split(',');
            let parse = |part: Option<&str>| -> Result<f64, String> {
                let part = part.ok_or_else(|| {
                    format!("weights 'constant:' needs two comma-separated values, got '{rest}'")
                })?;
                part.parse::<f64>()
                    .map_err(|_| format!("bad weight '{part}' in '{s}'"))
            };
            let black = parse(it.next())?;
            let red = parse(it.next())?;
            if it.next().is_some() {
                return Err(format!("too many values in weights '{s}'"));
            }
            return Ok(WeightSelector::Constant { black, red });
        }
        Err(format!(
            "unknown weights '{s}' (expected default, generation, constant:B,R, or file:PATH)"
        ))
    }
}

/// Numeric acceptance thresholds.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Max allowed constraint residual in feasibility / state-generation
    /// checks.
    pub feasibility: f64,
    /// Max allowed error in the block-family identities.
    pub family: f64,
    /// Max allowed deviation from the dense reference reconstruction.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-9,
            family: 1e-12,
            oracle: 1e-9,
        }
    }
}

impl Tolerances {
    /// Overrides one named tolerance; values must be positive and finite.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        if !(value.is_finite() && value > 0.0) {
            return Err(format!(
                "tolerance {key}={value} must be positive and finite"
            ));
        }
        match key {
            "feasibility" => self.feasibility = value,
            "family" => self.family = value,
            "oracle" => self.oracle = value,
            _ => {
                return Err(format!(
                    "unknown tolerance '{key}' (known: feasibility, family, oracle)"
                ))
            }
        }
        Ok(())
    }
}

/// Full description of one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub source: Source,
    pub mode: ModeSpec,
    pub weights: WeightSelector,
    pub family: FamilyMode,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn new(command: Command, source: Source) -> RunConfig {
        RunConfig {
            command,
            source,
            mode: ModeSpec::Exhaustive,
            weights: WeightSelector::Default,
            family: FamilyMode::PerVertex,
            seed: 17,
            tolerances: Tolerances::default(),
        }
    }
}

/// Input that violates the model; the CLI reports it on exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Malformed(String),
}

fn malformed(msg: impl Into<String>) -> RunError {
    RunError::Malformed(msg.into())
}

fn catalog_err(e: catalog::CatalogError) -> RunError {
    malformed(e.to_string())
}

/// Registered bounds carried along from a catalog entry.
#[derive(Clone, Debug)]
struct CatalogClaims {
    t_bound: f64,
    t_formula: String,
    g_bound: f64,
    g_formula: String,
    exact_expected_g: Option<num_rational::Ratio<i64>>,
}

/// A resolved instance: the target function and the tree family that is
/// supposed to decide it.
struct Instance {
    name: String,
    spec: FunctionSpec,
    family: TreeFamily,
    kind: MemberKind,
    claims: Option<CatalogClaims>,
}

impl Instance {
    fn from_entry(entry: CatalogEntry) -> Instance {
        Instance {
            name: entry.name,
            spec: entry.spec,
            family: entry.family,
            kind: entry.kind,
            claims: Some(CatalogClaims {
                t_bound: entry.t_bound,
                t_formula: entry.t_formula,
                g_bound: entry.g_bound,
                g_formula: entry.g_formula,
                exact_expected_g: entry.exact_expected_g,
            }),
        }
    }
}

fn resolve(source: &Source) -> Result<Instance, RunError> {
    match source {
        Source::Catalog { problem, params } => {
            let entry = catalog::build(problem, params).map_err(catalog_err)?;
            Ok(Instance::from_entry(entry))
        }
        Source::Files { tree, table } => {
            let text = std::fs::read_to_string(tree)
                .map_err(|e| malformed(format!("tree file {}: {e}", tree.display())))?;
            let parsed = ExplicitTree::from_json(&text)
                .map_err(|e| malformed(format!("tree file {}: {e}", tree.display())))?;
            let table_path = table.as_ref().ok_or_else(|| {
                malformed("this command needs --table FILE naming the function table")
            })?;
            let table_text = std::fs::read_to_string(table_path)
                .map_err(|e| malformed(format!("table file {}: {e}", table_path.display())))?;
            let spec = table_from_json(&table_text)
                .map_err(|e| malformed(format!("table file {}: {e}", table_path.display())))?;
            if parsed.arity() != spec.n() || parsed.alphabet() != spec.ell() {
                return Err(malformed(format!(
                    "tree is over [{}]^{} but the table is over [{}]^{}",
                    parsed.alphabet(),
                    parsed.arity(),
                    spec.ell(),
                    spec.n()
                )));
            }
            let name = tree
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "tree".to_string());
            let family = TreeFamily::uniform(vec![(
                name.clone(),
                Arc::new(parsed) as Arc<dyn TreeProgram>,
            )]);
            Ok(Instance {
                name,
                spec,
                family,
                kind: MemberKind::Deterministic,
                claims: None,
            })
        }
    }
}

/// Executes `config` and returns the assembled report.
pub fn run(config: &RunConfig) -> Result<RunReport, RunError> {
    if config.command == Command::Sweep {
        return sweep(config);
    }
    let inst = resolve(&config.source)?;
    let mut report = RunReport::new(config.command.name(), &inst.name);
    report.seed = config.seed;
    report.family = config.family.to_string();
    match config.command {
        Command::Analyze => analyze(&mut report, &inst, config)?,
        Command::Certify => certify(&mut report, &inst, config)?,
        Command::Span => span_cmd(&mut report, &inst, config)?,
        Command::Ensemble => ensemble_cmd(&mut report, &inst, config)?,
        Command::Validate => validate_cmd(&mut report, &inst),
        Command::Sweep => unreachable!("handled above"),
    }
    Ok(report)
}

fn single_tree(inst: &Instance) -> Result<Arc<dyn TreeProgram>, RunError> {
    let members = inst.family.members();
    if members.len() != 1 {
        return Err(malformed(format!(
            "'{}' is a family of {} trees; use the ensemble command",
            inst.name,
            members.len()
        )));
    }
    Ok(members[0].tree.clone())
}

fn measure(tree: &dyn TreeProgram, spec: &FunctionSpec) -> Result<TreeMetrics, RunError> {
    tree_metrics(tree, spec).map_err(|e| malformed(format!("tree evaluation: {e}")))
}

/// Picks the weight schedule for a single tree. The boolean is true only
/// for the balanced default, which is the one schedule whose objective
/// bound collapses to `12*sqrt(G*T)`.
fn resolve_schedule(
    config: &RunConfig,
    metrics: &TreeMetrics,
    tree: &dyn TreeProgram,
    spec: &FunctionSpec,
) -> Result<(WeightSchedule, Vec<String>, bool), RunError> {
    match &config.weights {
        WeightSelector::Default => {
            let (s, notes) = default_weights(metrics.t, metrics.g);
            Ok((s, notes, true))
        }
        WeightSelector::Generation => {
            let (s, notes) = generation_weights(&metrics.t_g);
            Ok((s, notes, false))
        }
        WeightSelector::Constant { black, red } => {
            check_weight_pair("constant weights", (*black, *red))?;
            Ok((
                WeightSchedule::Constant {
                    black: *black,
                    red: *red,
                },
                Vec::new(),
                false,
            ))
        }
        WeightSelector::File(path) => {
            let schedule = per_vertex_from_file(path, tree, spec)?;
            Ok((schedule, Vec::new(), false))
        }
    }
}

#[derive(Deserialize)]
struct WeightsDoc {
    /// Fallback `(black, red)` pair for vertices not listed below.
    default: (f64, f64),
    /// Overrides keyed by the vertex path id, e.g. `"[0:{0} 2:{1,2}]"`.
    #[serde(default)]
    vertices: BTreeMap<String, (f64, f64)>,
}

fn check_weight_pair(what: &str, pair: (f64, f64)) -> Result<(), RunError> {
    for (side, v) in [("black", pair.0), ("red", pair.1)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(malformed(format!(
                "{what}: {side} weight {v} must be positive and finite"
            )));
        }
    }
    Ok(())
}

fn per_vertex_from_file(
    path: &PathBuf,
    tree: &dyn TreeProgram,
    spec: &FunctionSpec,
) -> Result<WeightSchedule, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| malformed(format!("weights file {}: {e}", path.display())))?;
    let doc: WeightsDoc = serde_json::from_str(&text)
        .map_err(|e| malformed(format!("weights file {}: {e}", path.display())))?;
    check_weight_pair("weights file default", doc.default)?;
    // Reconstruct the reachable vertex set so file keys can be resolved
    // (and typos rejected) by their printed path ids.
    let mut by_name: BTreeMap<String, VertexId> = BTreeMap::new();
    for x in spec.inputs() {
        let tr = evaluate_path(tree, x).map_err(|e| malformed(format!("tree evaluation: {e}")))?;
        for depth in 0..tr.steps.len() {
            let id = tr.vertex_id(depth);
            by_name.entry(id.to_string()).or_insert(id);
        }
    }
    let mut weights: HashMap<VertexId, (f64, f64)> = HashMap::new();
    for (key, pair) in &doc.vertices {
        check_weight_pair(&format!("weights file vertex '{key}'"), *pair)?;
        let id = by_name.get(key).ok_or_else(|| {
            malformed(format!(
                "weights file names unknown vertex '{key}' (known ids look like '[0:{{0}}]')"
            ))
        })?;
        weights.insert(id.clone(), *pair);
    }
    Ok(WeightSchedule::PerVertex {
        weights,
        default: doc.default,
    })
}

fn render_input(x: &[Symbol], ell: usize) -> String {
    if ell <= 10 {
        x.iter().map(|s| s.to_string()).collect()
    } else {
        x.iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn generation_table(t_g: &[usize]) -> Table {
    let mut tab = Table::new("generation_depths", &["g", "depth"]);
    for (g, d) in t_g.iter().enumerate() {
        tab.row(vec![g.to_string(), d.to_string()]);
    }
    tab
}

/// Compares measured stats against the bounds registered with the catalog
/// entry, when the instance came from the catalog.
fn claims_table(report: &mut RunReport, inst: &Instance, t: f64, g: f64) {
    let Some(c) = &inst.claims else { return };
    let t_ok = t <= c.t_bound + 1e-9;
    let g_ok = g <= c.g_bound + 1e-9;
    let mut tab = Table::new(
        "catalog_claims",
        &["quantity", "measured", "claim", "formula", "holds"],
    );
    tab.row(vec![
        "T".into(),
        fmt_f(t),
        fmt_f(c.t_bound),
        c.t_formula.clone(),
        fmt_pass(t_ok).into(),
    ]);
    tab.row(vec![
        "G".into(),
        fmt_f(g),
        fmt_f(c.g_bound),
        c.g_formula.clone(),
        fmt_pass(g_ok).into(),
    ]);
    report.table(tab);
    report.check(t_ok, || {
        format!(
            "measured depth {} exceeds the registered claim {} = {}",
            fmt_f(t),
            fmt_f(c.t_bound),
            c.t_formula
        )
    });
    report.check(g_ok, || {
        format!(
            "measured guesses {} exceed the registered claim {} = {}",
            fmt_f(g),
            fmt_f(c.g_bound),
            c.g_formula
        )
    });
}

fn describe_expectation(mode: &ExpectationMode) -> String {
    match mode {
        ExpectationMode::Exact => "exact expectation".to_string(),
        ExpectationMode::Sampled { samples, seed } => {
            format!("sampled expectation:{samples}@{seed}")
        }
    }
}

/// Exact when the member x input x depth product is tractable.
fn expectation_mode(inst: &Instance, config: &RunConfig) -> ExpectationMode {
    let work = inst.family.len() as u128 * inst.spec.len() as u128 * inst.spec.n().max(1) as u128;
    if work <= 2_000_000 {
        ExpectationMode::Exact
    } else {
        ExpectationMode::Sampled {
            samples: 200,
            seed: config.seed,
        }
    }
}

fn analyze(report: &mut RunReport, inst: &Instance, config: &RunConfig) -> Result<(), RunError> {
    if inst.family.len() == 1 {
        let tree = inst.family.members()[0].tree.clone();
        let m = measure(tree.as_ref(), &inst.spec)?;
        report.verification = "exhaustive".into();
        report.kv("inputs", inst.spec.len().to_string());
        report.kv("T", m.t.to_string());
        report.kv("G", m.g.to_string());
        report.table(generation_table(&m.t_g));
        claims_table(report, inst, m.t as f64, m.g as f64);
        let mut tab = Table::new("per_input", &["input", "label", "depth", "guesses"]);
        let cap = inst.spec.len().min(64);
        for x in 0..cap {
            tab.row(vec![
                render_input(&inst.spec.inputs()[x], inst.spec.ell()),
                inst.spec.label_name(inst.spec.label(x)).to_string(),
                m.per_input[x].length.to_string(),
                m.per_input[x].reds.to_string(),
            ]);
        }
        if inst.spec.len() > cap {
            report.kv("per_input_rows_shown", cap.to_string());
        }
        report.table(tab);
    } else {
        let mode = expectation_mode(inst, config);
        let em = ensemble_metrics(&inst.family, &inst.spec, mode.clone())
            .map_err(|e| malformed(format!("family evaluation: {e}")))?;
        report.verification = describe_expectation(&mode);
        report.kv("members", inst.family.len().to_string());
        report.kv("inputs", inst.spec.len().to_string());
        report.kv("E_T", fmt_f(em.t));
        report.kv("E_G", fmt_f(em.g));
        report.kv("G_max", em.g_max.to_string());
        if let Some(ex) = &em.exact {
            report.kv("E_T_exact", fmt_ratio(ex.t));
            report.kv("E_G_exact", fmt_ratio(ex.g));
            if let Some(claims) = &inst.claims {
                if let Some(want) = claims.exact_expected_g {
                    report.kv("E_G_registered", fmt_ratio(want));
                    report.check(ex.g == want, || {
                        format!(
                            "exact expected guesses {} differ from the registered value {}",
                            fmt_ratio(ex.g),
                            fmt_ratio(want)
                        )
                    });
                }
            }
        }
        claims_table(report, inst, em.t, em.g);
        let mut tab = Table::new("generation_depths", &["g", "expected_depth"]);
        for (g, d) in em.t_g.iter().enumerate() {
            tab.row(vec![g.to_string(), fmt_f(*d)]);
        }
        report.table(tab);
    }
    Ok(())
}

fn worst_pair_note(pair: Option<(usize, usize)>) -> String {
    match pair {
        Some((x, y)) => format!(" (worst pair x={x}, y={y})"),
        None => String::new(),
    }
}

fn certify(report: &mut RunReport, inst: &Instance, config: &RunConfig) -> Result<(), RunError> {
    let tree = single_tree(inst)?;
    let m = measure(tree.as_ref(), &inst.spec)?;
    let (schedule, notes, balanced) = resolve_schedule(config, &m, tree.as_ref(), &inst.spec)?;
    let vmode = config.mode.to_verify(config.seed);
    report.weights = schedule.describe();
    report.verification = vmode.to_string();

    let cert =
        Certificate::for_function(tree.as_ref(), &inst.spec, schedule.clone(), config.family)
            .map_err(|e| malformed(format!("certificate construction: {e}")))?;
    let feas = cert.verify_feasibility(vmode);
    let obj = cert.objective();
    let bounds = cert.bound_check(&m);

    report.kv("T", m.t.to_string());
    report.kv("G", m.g.to_string());
    report.kv("objective", fmt_f(obj.value));
    if let Some(item) = bounds.iter().find(|b| b.name == "objective") {
        report.kv("bound", fmt_f(item.bound));
        report.kv("slack", fmt_f(item.slack()));
    } else {
        report.kv("bound", "-");
        report.kv("slack", "-");
    }
    report.kv("residual", fmt_f(feas.max_residual));
    report.kv("pairs", feas.pairs_checked.to_string());
    if !notes.is_empty() {
        report.kv("notes", notes.join("; "));
    }

    report.check(feas.max_residual <= config.tolerances.feasibility, || {
        format!(
            "feasibility residual {} exceeds tolerance {}{}",
            fmt_f(feas.max_residual),
            fmt_f(config.tolerances.feasibility),
            worst_pair_note(feas.worst_pair)
        )
    });

    if bounds.is_empty() {
        // Per-vertex schedules have no closed form; report the witness
        // masses the rebalancing rule controls instead.
        let vm = cert.vertex_masses();
        let mut tab = Table::new("vertex_masses", &["quantity", "value", "formula"]);
        tab.row(vec![
            "m_plus_max".into(),
            fmt_f(vm.m_plus_max),
            "max_x sum 1/weight(edge taken)".into(),
        ]);
        tab.row(vec![
            "m_minus_max".into(),
            fmt_f(vm.m_minus_max),
            "max_x sum weight(opposite color)".into(),
        ]);
        tab.row(vec![
            "product_bound".into(),
            fmt_f(vm.product_bound),
            "sqrt(m_plus_max * m_minus_max)".into(),
        ]);
        tab.row(vec![
            "rebalanced_product_bound".into(),
            fmt_f(vm.improved_product_bound),
            "product bound after black' = sqrt(black/red)".into(),
        ]);
        report.table(tab);
        report.check(vm.improved_product_bound <= vm.product_bound + 1e-9, || {
            format!(
                "rebalancing increased the product bound: {} -> {}",
                fmt_f(vm.product_bound),
                fmt_f(vm.improved_product_bound)
            )
        });
    } else {
        let mut tab = Table::new(
            "bounds",
            &["name", "value", "bound", "slack", "formula", "holds"],
        );
        for b in &bounds {
            let ok = b.holds();
            let formula = bound_formula(&schedule, &b.name, balanced);
            tab.row(vec![
                b.name.clone(),
                fmt_f(b.value),
                fmt_f(b.bound),
                fmt_f(b.slack()),
                formula.clone(),
                fmt_pass(ok).into(),
            ]);
            report.check(ok, || {
                format!(
                    "{} = {} exceeds its bound {} = {}",
                    b.name,
                    fmt_f(b.value),
                    fmt_f(b.bound),
                    formula
                )
            });
        }
        report.table(tab);
    }

    let mut extremes = Table::new("objective_extremes", &["quantity", "value", "input"]);
    extremes.row(vec![
        "u_max".into(),
        fmt_f(obj.u_max),
        render_input(&inst.spec.inputs()[obj.argmax_u], inst.spec.ell()),
    ]);
    extremes.row(vec![
        "w_max".into(),
        fmt_f(obj.w_max),
        render_input(&inst.spec.inputs()[obj.argmax_w], inst.spec.ell()),
    ]);
    report.table(extremes);
    report.table(generation_table(&m.t_g));
    claims_table(report, inst, m.t as f64, m.g as f64);

    // Cross-check the structured vectors against a dense reconstruction on
    // domains small enough to materialize.
    if inst.spec.len() <= 256 {
        let dense = cert
            .dense_check(&inst.spec)
            .map_err(|e| malformed(format!("dense cross-check: {e}")))?;
        let dev = dense.max_pair_deviation.max(dense.max_norm_deviation);
        report.kv("dense_pairs", dense.pairs_checked.to_string());
        report.kv("dense_deviation", fmt_f(dev));
        report.check(dev <= config.tolerances.oracle, || {
            format!(
                "dense reconstruction deviates by {} (tolerance {})",
                fmt_f(dev),
                fmt_f(config.tolerances.oracle)
            )
        });
    }
    Ok(())
}

fn span_cmd(report: &mut RunReport, inst: &Instance, config: &RunConfig) -> Result<(), RunError> {
    let tree = single_tree(inst)?;
    let m = measure(tree.as_ref(), &inst.spec)?;
    let (schedule, notes, balanced) = resolve_schedule(config, &m, tree.as_ref(), &inst.spec)?;
    report.weights = schedule.describe();
    report.verification = "exact".into();

    let prog = SpanProgram::build(tree.as_ref(), &inst.spec, &schedule)
        .map_err(|e| malformed(format!("span construction: {e}")))?;
    let ws = prog.witness_sizes();
    let ax = prog.verify(&inst.spec);

    report.kv("T", m.t.to_string());
    report.kv("G", m.g.to_string());
    report.kv("dimension", prog.dimension().to_string());
    report.kv("columns", prog.column_count().to_string());
    report.kv("wsize", fmt_f(ws.wsize()));
    let bound = balanced.then(|| 2.0 * ((m.g as f64) * (m.t as f64)).sqrt());
    if let Some(b) = bound {
        report.kv("bound", fmt_f(b));
        report.kv("slack", fmt_f(b - ws.wsize()));
    } else {
        report.kv("bound", "-");
        report.kv("slack", "-");
    }
    report.kv("axiom_checks", ax.checks.to_string());
    report.kv("axiom_violations", ax.violations.len().to_string());
    if !notes.is_empty() {
        report.kv("notes", notes.join("; "));
    }

    let mut tab = Table::new(
        "witness_sizes",
        &["quantity", "value", "bound", "formula", "holds"],
    );
    for (name, value, worst) in [
        ("wsize_plus", ws.positive_max, ws.argmax_positive),
        ("wsize_minus", ws.negative_max, ws.argmax_negative),
    ] {
        let (b_str, formula, ok) = match bound {
            Some(b) => (fmt_f(b), "2*sqrt(G*T)".to_string(), value <= b + 1e-9),
            None => ("-".into(), "-".into(), true),
        };
        tab.row(vec![
            name.into(),
            fmt_f(value),
            b_str,
            formula.clone(),
            fmt_pass(ok).into(),
        ]);
        report.check(ok, || {
            format!(
                "{} = {} exceeds 2*sqrt(G*T) = {} (worst input index {})",
                name,
                fmt_f(value),
                fmt_f(bound.unwrap_or(f64::NAN)),
                worst
            )
        });
    }
    report.table(tab);

    for v in ax.violations.iter().take(5) {
        report.fail(format!("span axiom violated: {v}"));
    }
    if ax.violations.len() > 5 {
        report.fail(format!(
            "... and {} more axiom violations",
            ax.violations.len() - 5
        ));
    }
    claims_table(report, inst, m.t as f64, m.g as f64);
    Ok(())
}

/// Worst-case stats across family members: max depth, max guesses, the
/// elementwise max of generation depth profiles, and per-member rows.
fn member_maxima(
    family: &TreeFamily,
    spec: &FunctionSpec,
) -> Result<(usize, usize, Vec<usize>, Vec<(String, usize, usize)>), RunError> {
    let mut t_max = 0usize;
    let mut g_max = 0usize;
    let mut tg_max: Vec<usize> = Vec::new();
    let mut rows = Vec::with_capacity(family.len());
    for member in family.members() {
        let m = measure(member.tree.as_ref(), spec)?;
        t_max = t_max.max(m.t);
        g_max = g_max.max(m.g);
        if m.t_g.len() > tg_max.len() {
            tg_max.resize(m.t_g.len(), 0);
        }
        for (slot, d) in tg_max.iter_mut().zip(m.t_g.iter()) {
            *slot = (*slot).max(*d);
        }
        rows.push((member.name.clone(), m.t, m.g));
    }
    Ok((t_max, g_max, tg_max, rows))
}

fn ensemble_cmd(
    report: &mut RunReport,
    inst: &Instance,
    config: &RunConfig,
) -> Result<(), RunError> {
    let (t_max, g_max, tg_max, member_rows) = member_maxima(&inst.family, &inst.spec)?;
    let (schedule, notes, balanced) = match &config.weights {
        WeightSelector::Default => {
            let (s, notes) = default_weights(t_max, g_max);
            (s, notes, true)
        }
        WeightSelector::Generation => {
            let (s, notes) = generation_weights(&tg_max);
            (s, notes, false)
        }
        WeightSelector::Constant { black, red } => {
            check_weight_pair("constant weights", (*black, *red))?;
            (
                WeightSchedule::Constant {
                    black: *black,
                    red: *red,
                },
                Vec::new(),
                false,
            )
        }
        WeightSelector::File(_) => {
            return Err(malformed(
                "per-vertex weight files apply to single-tree runs, not families",
            ))
        }
    };
    let vmode = config.mode.to_verify(config.seed);
    report.weights = schedule.describe();
    report.verification = vmode.to_string();

    let ens = EnsembleCertificate::build(&inst.family, &inst.spec, schedule, config.family)
        .map_err(|e| malformed(format!("family certificate construction: {e}")))?;
    let sg = ens.verify_state_generation(vmode);
    let succ = ens.success_probability();
    let obj = ens.objective();

    report.kv("members", inst.family.len().to_string());
    report.kv("T", t_max.to_string());
    report.kv("G", g_max.to_string());
    report.kv("objective", fmt_f(obj.value));
    let bound = balanced.then(|| 12.0 * ((g_max as f64) * (t_max as f64)).sqrt());
    if let Some(b) = bound {
        report.kv("bound", fmt_f(b));
        report.kv("slack", fmt_f(b - obj.value));
        report.check(obj.value <= b + 1e-9, || {
            format!(
                "family objective {} exceeds 12*sqrt(G*T) = {} at member-maximal T={t_max}, G={g_max}",
                fmt_f(obj.value),
                fmt_f(b)
            )
        });
    } else {
        report.kv("bound", "-");
        report.kv("slack", "-");
    }
    report.kv("residual", fmt_f(sg.max_residual));
    report.kv("pairs", sg.pairs_checked.to_string());
    report.kv(
        "gram_arithmetic",
        if sg.exact {
            "exact-rational"
        } else {
            "floating"
        },
    );
    report.kv("min_success", fmt_f(succ.min));
    if !notes.is_empty() {
        report.kv("notes", notes.join("; "));
    }

    report.check(sg.max_residual <= config.tolerances.feasibility, || {
        format!(
            "state-generation residual {} exceeds tolerance {}{}",
            fmt_f(sg.max_residual),
            fmt_f(config.tolerances.feasibility),
            worst_pair_note(sg.worst_pair)
        )
    });

    match inst.kind {
        MemberKind::Deterministic => {
            report.kv("success_floor", "1");
            report.check(succ.min >= 1.0 - 1e-12, || {
                format!(
                    "every member must decide the target exactly, but input index {} succeeds with probability {}",
                    succ.argmin,
                    fmt_f(succ.min)
                )
            });
        }
        MemberKind::Randomized { success_floor } => {
            report.kv("success_floor", fmt_f(success_floor));
            report.check(succ.min >= success_floor - 1e-12, || {
                format!(
                    "success probability {} at input index {} is below the registered floor {}",
                    fmt_f(succ.min),
                    succ.argmin,
                    fmt_f(success_floor)
                )
            });
            report.check(succ.meets_floor(), || {
                format!(
                    "success probability {} at input index {} is below the 0.9 evaluation floor",
                    fmt_f(succ.min),
                    succ.argmin
                )
            });
        }
    }

    let mut members = Table::new("members", &["member", "weight", "depth", "guesses"]);
    for (i, (name, t, g)) in member_rows.iter().enumerate() {
        members.row(vec![
            name.clone(),
            fmt_f(inst.family.prob(i)),
            t.to_string(),
            g.to_string(),
        ]);
    }
    report.table(members);

    if inst.spec.len() <= 64 {
        let mut tab = Table::new("success", &["input", "label", "probability"]);
        for (x, p) in succ.per_input.iter().enumerate() {
            tab.row(vec![
                render_input(&inst.spec.inputs()[x], inst.spec.ell()),
                inst.spec.label_name(inst.spec.label(x)).to_string(),
                fmt_f(*p),
            ]);
        }
        report.table(tab);
    }
    claims_table(report, inst, t_max as f64, g_max as f64);
    Ok(())
}

fn validate_cmd(report: &mut RunReport, inst: &Instance) {
    report.verification = "exhaustive, two runs per input".into();
    let mut tab = Table::new(
        "members",
        &[
            "member",
            "inputs_checked",
            "issues",
            "single_block_vertices",
        ],
    );
    let mut issues_total = 0usize;
    let mut inputs_total = 0usize;
    for member in inst.family.members() {
        let v = validate(member.tree.as_ref(), &inst.spec);
        issues_total += v.issues.len();
        inputs_total += v.inputs_checked;
        tab.row(vec![
            member.name.clone(),
            v.inputs_checked.to_string(),
            v.issues.len().to_string(),
            v.single_block_vertices.to_string(),
        ]);
        for issue in v.issues.iter().take(5) {
            report.fail(format!("{}: {issue}", member.name));
        }
        if v.issues.len() > 5 {
            report.fail(format!(
                "{}: ... and {} more issues",
                member.name,
                v.issues.len() - 5
            ));
        }
    }
    report.table(tab);
    report.kv("members", inst.family.len().to_string());
    report.kv("inputs_checked", inputs_total.to_string());
    report.kv("issues", issues_total.to_string());
}

fn sweep(config: &RunConfig) -> Result<RunReport, RunError> {
    let Source::Catalog { problem, params } = &config.source else {
        return Err(malformed(
            "sweep runs over catalog problems; pass --problem, not --tree",
        ));
    };
    match problem.as_str() {
        "bipartiteness" | "matrix_bipartiteness" => sweep_bipartiteness(params, config),
        "min" => sweep_min(params, config),
        other => Err(malformed(format!(
            "no sweep is defined for '{other}' (available: bipartiteness, min)"
        ))),
    }
}

/// Bipartiteness over growing vertex counts: on a seeded sample of
/// adjacency matrices per size, the certificate objective must stay below
/// `12*n^(3/2)`.
fn sweep_bipartiteness(params: &Params, config: &RunConfig) -> Result<RunReport, RunError> {
    params
        .check_keys(&["n_min", "n_max", "samples", "seed"])
        .map_err(catalog_err)?;
    let n_min = params.size("n_min", 4).map_err(catalog_err)?;
    let n_max = params.size("n_max", 8).map_err(catalog_err)?;
    let samples = params.size("samples", 200).map_err(catalog_err)?.max(1);
    if n_min < 2 || n_max < n_min || n_max > 12 {
        return Err(malformed(format!(
            "sweep range n_min={n_min}, n_max={n_max} must satisfy 2 <= n_min <= n_max <= 12"
        )));
    }
    let seed = params.seed(config.seed);

    let mut report = RunReport::new("sweep", &format!("bipartiteness(n={n_min}..{n_max})"));
    report.seed = seed;
    report.family = config.family.to_string();
    report.weights = "constant(black=sqrt(T/G),red=sqrt(G/T))".into();
    report.verification = format!("objective bound over {samples} sampled graphs per size");

    let mut tab = Table::new(
        "sweep",
        &[
            "n",
            "domain",
            "T",
            "G",
            "objective",
            "bound",
            "ratio",
            "holds",
        ],
    );
    let mut max_ratio = 0.0f64;
    for n in n_min..=n_max {
        let instances = graph::sample_graphs(n, false, samples, seed.wrapping_add(n as u64));
        let labels = instances
            .iter()
            .map(|g| usize::from(!classical::is_bipartite(g)))
            .collect();
        let inputs = instances.iter().map(|g| g.matrix_string()).collect();
        let spec = FunctionSpec::with_label_names(
            n * (n - 1) / 2,
            2,
            2,
            inputs,
            labels,
            vec!["bipartite".into(), "not_bipartite".into()],
        )
        .map_err(|e| malformed(format!("sweep domain at n={n}: {e}")))?;
        let tree = MatrixBipartiteness { n };
        let m = measure(&tree, &spec)?;
        let (schedule, _) = default_weights(m.t, m.g);
        let cert = Certificate::for_function(&tree, &spec, schedule, config.family)
            .map_err(|e| malformed(format!("certificate at n={n}: {e}")))?;
        let obj = cert.objective();
        let bound = 12.0 * (n as f64).powf(1.5);
        let ratio = obj.value / bound;
        let ok = obj.value <= bound + 1e-9;
        max_ratio = max_ratio.max(ratio);
        tab.row(vec![
            n.to_string(),
            instances.len().to_string(),
            m.t.to_string(),
            m.g.to_string(),
            fmt_f(obj.value),
            fmt_f(bound),
            fmt_f(ratio),
            fmt_pass(ok).into(),
        ]);
        report.check(ok, || {
            format!(
                "n={n}: objective {} exceeds 12*n^(3/2) = {}",
                fmt_f(obj.value),
                fmt_f(bound)
            )
        });
    }
    report.table(tab);
    report.kv("sizes", (n_max - n_min + 1).to_string());
    report.kv("samples_per_size", samples.to_string());
    report.kv("bound", "12*n^(3/2)");
    report.kv("max_ratio", fmt_f(max_ratio));
    Ok(report)
}

/// A few structurally different probe inputs for minimum finding; the
/// expected guess count is order-independent, so any small set works.
fn min_probe_inputs(n: usize) -> Vec<Vec<Symbol>> {
    let mut out: Vec<Vec<Symbol>> = Vec::new();
    let mut push = |x: Vec<Symbol>| {
        if !out.contains(&x) {
            out.push(x);
        }
    };
    push((0..n as Symbol).collect());
    push((0..n as Symbol).rev().collect());
    push(vec![0; n]);
    push((0..n).map(|i| (i % 2) as Symbol).collect());
    out
}

/// Minimum finding over all `n!` scan orders: the exact expected number of
/// guesses must equal the n-th harmonic number on every probed input.
fn sweep_min(params: &Params, config: &RunConfig) -> Result<RunReport, RunError> {
    params
        .check_keys(&["n_min", "n_max", "seed"])
        .map_err(catalog_err)?;
    let n_min = params.size("n_min", 3).map_err(catalog_err)?;
    let n_max = params.size("n_max", 7).map_err(catalog_err)?;
    if n_min < 2 || n_max < n_min || n_max > 7 {
        return Err(malformed(format!(
            "min sweep enumerates all n! scan orders; n_min={n_min}, n_max={n_max} must satisfy \
             2 <= n_min <= n_max <= 7"
        )));
    }
    let mut report = RunReport::new("sweep", &format!("min(n={n_min}..{n_max})"));
    report.seed = params.seed(config.seed);
    report.verification = "exact expectation over all scan orders".into();

    let mut tab = Table::new(
        "sweep",
        &["n", "members", "domain", "E_T", "E_G", "harmonic", "holds"],
    );
    for n in n_min..=n_max {
        let orders = order::all_permutations(n);
        let members = orders.len();
        let family = order::min_family(n, n, orders);
        let inputs = min_probe_inputs(n);
        let labels = inputs
            .iter()
            .map(|x| {
                x.iter()
                    .enumerate()
                    .min_by_key(|(i, v)| (**v, *i))
                    .map(|(i, _)| i)
                    .unwrap_or(0)
            })
            .collect();
        let names = (0..n).map(|i| format!("argmin={i}")).collect();
        let spec = FunctionSpec::with_label_names(n, n, n, inputs, labels, names)
            .map_err(|e| malformed(format!("min sweep domain at n={n}: {e}")))?;
        let em = ensemble_metrics(&family, &spec, ExpectationMode::Exact)
            .map_err(|e| malformed(format!("min sweep at n={n}: {e}")))?;
        let ex = em
            .exact
            .as_ref()
            .ok_or_else(|| malformed(format!("exact expectations unavailable at n={n}")))?;
        let h = order::harmonic(n);
        let ok = ex.g == h;
        tab.row(vec![
            n.to_string(),
            members.to_string(),
            spec.len().to_string(),
            fmt_ratio(ex.t),
            fmt_ratio(ex.g),
            fmt_ratio(h),
            fmt_pass(ok).into(),
        ]);
        report.check(ok, || {
            format!(
                "n={n}: exact expected guesses {} differ from H_n = {}",
                fmt_ratio(ex.g),
                fmt_ratio(h)
            )
        });
    }
    report.table(tab);
    report.kv("sizes", (n_max - n_min + 1).to_string());
    report.kv("formula", "E[G] = H_n");
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog_config(command: Command, problem: &str, pairs: &[&str]) -> RunConfig {
        let params = Params::from_pairs(pairs).expect("test params parse");
        RunConfig::new(
            command,
            Source::Catalog {
                problem: problem.to_string(),
                params,
            },
        )
    }

    #[test]
    fn certify_search_passes_with_zero_residual() {
        let config = catalog_config(Command::Certify, "search", &[]);
        let report = run(&config).expect("search certify runs");
        assert!(report.pass, "failures: {:?}", report.failures);
        let residual = report
            .summary
            .iter()
            .find(|(k, _)| k == "residual")
            .map(|(_, v)| v.clone())
            .unwrap();
        assert_eq!(residual, "0");
        assert!(report.render_text().contains("# table: bounds"));
        // Deterministic output: same config, same bytes.
        let again = run(&config).expect("rerun");
        assert_eq!(report.render_text(), again.render_text());
        assert_eq!(report.to_json(), again.to_json());
    }

    #[test]
    fn certify_rejects_families_and_unknown_problems() {
        let err = run(&catalog_config(Command::Certify, "min", &["n=3", "ell=3"]))
            .expect_err("families cannot be certified as one tree");
        let RunError::Malformed(msg) = err;
        assert!(msg.contains("ensemble"), "got: {msg}");

        let err = run(&catalog_config(Command::Certify, "no_such_problem", &[]))
            .expect_err("unknown problem");
        let RunError::Malformed(msg) = err;
        assert!(msg.contains("no_such_problem"), "got: {msg}");
    }

    #[test]
    fn certify_generation_weights_on_two_twos() {
        let mut config = catalog_config(Command::Certify, "two_twos", &["n=5"]);
        config.weights = WeightSelector::Generation;
        let report = run(&config).expect("runs");
        assert!(report.pass, "failures: {:?}", report.failures);
        assert!(report.weights.starts_with("per-generation["));
        assert!(report.render_text().contains("4 + 8*sum_{g>=1} sqrt(T_g)"));
    }

    #[test]
    fn constant_and_file_weight_selectors() {
        assert!(matches!(
            WeightSelector::parse("constant:2.0,0.5"),
            Ok(WeightSelector::Constant { .. })
        ));
        assert!(WeightSelector::parse("constant:2.0").is_err());
        assert!(WeightSelector::parse("nonsense").is_err());
        assert!(matches!(
            WeightSelector::parse("file:w.json"),
            Ok(WeightSelector::File(_))
        ));

        let mut config = catalog_config(Command::Certify, "threshold", &["n=4", "k=2"]);
        config.weights = WeightSelector::Constant {
            black: 2.0,
            red: 0.5,
        };
        let report = run(&config).expect("runs");
        assert!(report.pass, "failures: {:?}", report.failures);

        // Nonpositive weights are rejected as malformed input.
        config.weights = WeightSelector::Constant {
            black: -1.0,
            red: 0.5,
        };
        assert!(run(&config).is_err());
    }

    #[test]
    fn per_vertex_weights_file_round_trip() {
        let dir = std::env::temp_dir().join(format!("guesstree-w-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("weights.json");
        std::fs::write(&path, r#"{ "default": [1.0, 1.0] }"#).unwrap();
        let mut config = catalog_config(Command::Certify, "search", &["n=4"]);
        config.weights = WeightSelector::File(path.clone());
        let report = run(&config).expect("runs");
        assert!(report.pass, "failures: {:?}", report.failures);
        assert!(report.render_text().contains("# table: vertex_masses"));

        // Unknown vertex ids in the file are named in the error.
        std::fs::write(
            &path,
            r#"{ "default": [1.0, 1.0], "vertices": { "[9:{9}]": [2.0, 0.5] } }"#,
        )
        .unwrap();
        let RunError::Malformed(msg) = run(&config).unwrap_err();
        assert!(msg.contains("[9:{9}]"), "got: {msg}");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn span_command_reports_witness_sizes() {
        let report = run(&catalog_config(Command::Span, "search", &["n=4"])).expect("runs");
        assert!(report.pass, "failures: {:?}", report.failures);
        assert!(report.render_text().contains("wsize_plus"));
        assert!(report.render_text().contains("2*sqrt(G*T)"));
    }

    #[test]
    fn ensemble_command_covers_deterministic_and_randomized_kinds() {
        let report =
            run(&catalog_config(Command::Ensemble, "min", &["n=3", "ell=3"])).expect("runs");
        assert!(report.pass, "failures: {:?}", report.failures);
        let min_success = report
            .summary
            .iter()
            .find(|(k, _)| k == "min_success")
            .map(|(_, v)| v.clone())
            .unwrap();
        assert_eq!(min_success, "1");

        let report = run(&catalog_config(
            Command::Ensemble,
            "matrix_k_cycle_via_vertex",
            &[],
        ))
        .expect("runs");
        assert!(report.pass, "failures: {:?}", report.failures);
        assert!(report.render_text().contains("success_floor"));
    }

    #[test]
    fn analyze_families_reports_exact_expectations() {
        let report =
            run(&catalog_config(Command::Analyze, "min", &["n=3", "ell=3"])).expect("runs");
        assert!(report.pass, "failures: {:?}", report.failures);
        let eg = report
            .summary
            .iter()
            .find(|(k, _)| k == "E_G_exact")
            .map(|(_, v)| v.clone())
            .unwrap();
        assert_eq!(eg, "11/6");
    }

    #[test]
    fn validate_passes_on_catalog_and_flags_wrong_tables() {
        let report = run(&catalog_config(Command::Validate, "counting", &[])).expect("runs");
        assert!(report.pass, "failures: {:?}", report.failures);
    }

    #[test]
    fn sweeps_hold_their_bounds_on_small_ranges() {
        let config = catalog_config(
            Command::Sweep,
            "bipartiteness",
            &["n_min=4", "n_max=5", "samples=24"],
        );
        let report = run(&config).expect("runs");
        assert!(report.pass, "failures: {:?}", report.failures);
        assert_eq!(report.render_text(), run(&config).unwrap().render_text());

        let report = run(&catalog_config(
            Command::Sweep,
            "min",
            &["n_min=3", "n_max=4"],
        ))
        .expect("runs");
        assert!(report.pass, "failures: {:?}", report.failures);
        assert!(report.render_text().contains("25/12"));

        let RunError::Malformed(msg) =
            run(&catalog_config(Command::Sweep, "search", &[])).unwrap_err();
        assert!(msg.contains("no sweep"), "got: {msg}");
    }

    #[test]
    fn mode_and_tolerance_parsing() {
        assert_eq!(ModeSpec::parse("exhaustive"), Ok(ModeSpec::Exhaustive));
        assert_eq!(
            ModeSpec::parse("sampled:500"),
            Ok(ModeSpec::Sampled { pairs: 500 })
        );
        assert!(ModeSpec::parse("sampled:0").is_err());
        assert!(ModeSpec::parse("sampled:x").is_err());
        assert!(ModeSpec::parse("half").is_err());

        let mut tol = Tolerances::default();
        assert_eq!(tol.feasibility, 1e-9);
        tol.set("feasibility", 1e-6).unwrap();
        assert_eq!(tol.feasibility, 1e-6);
        assert!(tol.set("feasibility", -1.0).is_err());
        assert!(tol.set("bogus", 1e-6).is_err());
    }

    #[test]
    fn sampled_verification_mode_runs() {
        let mut config = catalog_config(Command::Certify, "two_twos", &[]);
        config.mode = ModeSpec::Sampled { pairs: 300 };
        config.seed = 5;
        let report = run(&config).expect("runs");
        assert!(report.pass, "failures: {:?}", report.failures);
        assert_eq!(report.verification, "sampled:300@5");
    }
}
