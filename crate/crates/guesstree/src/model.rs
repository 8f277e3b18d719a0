//! The query-program model.
//!
//! A *tree program* is a deterministic classical algorithm that reads its
//! input one coordinate at a time. Instead of learning the exact symbol, each
//! query presents a [`Partition`] of the alphabet into blocks and the program
//! is told which block the symbol fell into. Blocks are colored: at most one
//! block per query is **black** (the guessed outcome), every other block is
//! **red** (a surprise). Running a program on an input yields a
//! [`Transcript`] — the sequence of (query, block, color) steps ending in an
//! output label — and the set of transcripts over a finite domain is exactly
//! the reachable part of the underlying decision tree. Vertex identity is the
//! canonical prefix of (query, block) pairs, so implicit programs never have
//! to materialise their tree.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Input symbol. Alphabets stay small (`[ell] = {0, .., ell-1}`).
pub type Symbol = u16;

/// Output label, an index into a [`FunctionSpec`]'s label space `[m]`.
pub type Label = usize;

/// Edge/block color of a guess coloring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    Red,
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::Black => write!(f, "black"),
            Color::Red => write!(f, "red"),
        }
    }
}

/// A block of a query partition: a sorted, duplicate-free set of symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block(pub Vec<Symbol>);

impl Block {
    pub fn new(mut symbols: Vec<Symbol>) -> Self {
        symbols.sort_unstable();
        symbols.dedup();
        Block(symbols)
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.0.binary_search(&s).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bitmask over symbols, used by the subset-indexed vector family.
    pub fn bitmask(&self) -> Option<u64> {
        if self.0.iter().any(|&s| s >= 64) {
            return None;
        }
        Some(self.0.iter().fold(0u64, |m, &s| m | (1u64 << s)))
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// The partition a program presents when it queries a coordinate.
///
/// `blocks[i]` carries color `colors[i]`. A valid partition covers the whole
/// alphabet with disjoint nonempty blocks and colors at most one block black.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub blocks: Vec<Block>,
    pub colors: Vec<Color>,
}

impl Partition {
    pub fn new(parts: Vec<(Block, Color)>) -> Self {
        let (blocks, colors) = parts.into_iter().unzip();
        Partition { blocks, colors }
    }

    /// Two-block partition `[marked, rest-of-alphabet]` with the given colors.
    /// Handy for the common "these symbols are the surprise" shape.
    pub fn split(
        ell: usize,
        marked: &[Symbol],
        marked_color: Color,
        rest_color: Color,
    ) -> Partition {
        let marked_block = Block::new(marked.to_vec());
        let rest: Vec<Symbol> = (0..ell as Symbol)
            .filter(|s| !marked_block.contains(*s))
            .collect();
        if rest.is_empty() {
            return Partition::new(vec![(marked_block, marked_color)]);
        }
        Partition::new(vec![
            (marked_block, marked_color),
            (Block(rest), rest_color),
        ])
    }

    /// Binary-alphabet partition `[{0}, {1}]` with `{1}` red and `{0}` black.
    pub fn bit_guess_zero() -> Partition {
        Partition::new(vec![
            (Block(vec![0]), Color::Black),
            (Block(vec![1]), Color::Red),
        ])
    }

    /// All-singleton partition with a uniform color.
    pub fn singletons(ell: usize, color: Color) -> Partition {
        Partition::new(
            (0..ell as Symbol)
                .map(|s| (Block(vec![s]), color))
                .collect(),
        )
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Index of the block containing `s`, if any.
    pub fn block_of(&self, s: Symbol) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(s))
    }

    /// Checks disjoint-nonempty-cover and the at-most-one-black rule.
    pub fn check(&self, ell: usize) -> Result<(), PartitionFault> {
        if self.blocks.len() != self.colors.len() {
            return Err(PartitionFault::Shape);
        }
        if self.blocks.is_empty() {
            return Err(PartitionFault::EmptyPartition);
        }
        let mut seen = vec![false; ell];
        for b in &self.blocks {
            if b.is_empty() {
                return Err(PartitionFault::EmptyBlock);
            }
            for &s in &b.0 {
                if (s as usize) >= ell {
                    return Err(PartitionFault::SymbolOutOfRange(s));
                }
                if seen[s as usize] {
                    return Err(PartitionFault::Overlap(s));
                }
                seen[s as usize] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|v| !v) {
            return Err(PartitionFault::Uncovered(missing as Symbol));
        }
        let blacks = self.colors.iter().filter(|c| **c == Color::Black).count();
        if blacks > 1 {
            return Err(PartitionFault::TwoBlackBlocks);
        }
        Ok(())
    }
}

/// Why a partition was rejected.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PartitionFault {
    #[error("blocks/colors length mismatch")]
    Shape,
    #[error("partition has no blocks")]
    EmptyPartition,
    #[error("partition contains an empty block")]
    EmptyBlock,
    #[error("symbol {0} outside the alphabet")]
    SymbolOutOfRange(u16),
    #[error("symbol {0} appears in two blocks")]
    Overlap(u16),
    #[error("symbol {0} not covered by any block")]
    Uncovered(u16),
    #[error("more than one black block at a single query")]
    TwoBlackBlocks,
}

/// Errors raised while running a tree program on an input.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("query index {index} out of range (arity {arity})")]
    QueryOutOfRange { index: usize, arity: usize },
    #[error("coordinate {index} queried twice on one path")]
    RepeatedQuery { index: usize },
    #[error("invalid partition at query {index}: {fault}")]
    InvalidPartition { index: usize, fault: PartitionFault },
    #[error("step budget of {budget} exhausted")]
    BudgetExceeded { budget: usize },
    #[error("program fault: {0}")]
    Program(String),
}

/// Where queries go while a program runs. [`Driver`] is the recording
/// implementation; wrappers (recoloring, translation) forward to an inner sink.
pub trait QuerySink {
    /// Presents `partition` for coordinate `index`; returns the index of the
    /// block containing the input symbol.
    fn query(&mut self, index: usize, partition: Partition) -> Result<usize, TreeError>;
}

/// A deterministic query program with a guess coloring.
///
/// `run` must be a pure function of the answers it receives: two runs that
/// see the same block sequence must issue the same queries with the same
/// partitions and finish with the same label.
pub trait TreeProgram: Send + Sync {
    /// Number of input coordinates.
    fn arity(&self) -> usize;
    /// Alphabet size `ell`; symbols are `0..ell`.
    fn alphabet(&self) -> usize;
    /// Runs the program against a query sink until it can output a label.
    fn run(&self, queries: &mut dyn QuerySink) -> Result<Label, TreeError>;
}

/// Sibling-color summary stored per step: which colors appear among the
/// blocks *not* taken at this vertex. This is the color set of the paired
/// negative-side certificate vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OffColors {
    pub black: bool,
    pub red: bool,
}

/// One recorded query step.
#[derive(Clone, Debug)]
pub struct Step {
    pub query: usize,
    pub value: Symbol,
    pub block_index: usize,
    pub block: Block,
    pub color: Color,
    /// Red edges strictly above this vertex on the path.
    pub reds_before: u32,
    /// Number of blocks in the partition at this vertex.
    pub block_count: usize,
    pub off_colors: OffColors,
    /// The full partition asked at this vertex (the taken block is
    /// `partition.blocks[block_index]`).
    pub partition: Partition,
}

/// The run record of a program on one input.
#[derive(Clone, Debug)]
pub struct Transcript {
    pub steps: Vec<Step>,
    pub label: Label,
}

impl Transcript {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn reds_total(&self) -> u32 {
        self.steps.iter().filter(|s| s.color == Color::Red).count() as u32
    }

    /// Canonical identity of the vertex *before* step `t` (so `vertex_id(0)`
    /// is the root and `vertex_id(len())` is the leaf).
    pub fn vertex_id(&self, t: usize) -> VertexId {
        VertexId(
            self.steps[..t]
                .iter()
                .map(|s| (s.query, s.block.clone()))
                .collect(),
        )
    }

    /// Step index at which coordinate `j` was queried, if it was.
    pub fn step_of_query(&self, j: usize) -> Option<usize> {
        self.steps.iter().position(|s| s.query == j)
    }
}

/// Canonical vertex identity: the (query, block) prefix leading to it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub Vec<(usize, Block)>);

impl VertexId {
    pub fn root() -> Self {
        VertexId(Vec::new())
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, query: usize, block: Block) -> VertexId {
        let mut v = self.0.clone();
        v.push((query, block));
        VertexId(v)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (q, b)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{q}:{b}")?;
        }
        write!(f, "]")
    }
}

/// The recording query sink: answers from a concrete input, enforces the
/// model invariants (query-once, valid partitions, budget), and accumulates
/// the transcript.
pub struct Driver<'a> {
    input: &'a [Symbol],
    alphabet: usize,
    budget: usize,
    steps: Vec<Step>,
    queried: Vec<bool>,
    reds: u32,
}

impl<'a> Driver<'a> {
    pub fn new(input: &'a [Symbol], alphabet: usize, budget: usize) -> Self {
        Driver {
            input,
            alphabet,
            budget,
            steps: Vec::new(),
            queried: vec![false; input.len()],
            reds: 0,
        }
    }

    pub fn into_steps(self) -> Vec<Step> {
        self.steps
    }
}

impl QuerySink for Driver<'_> {
    fn query(&mut self, index: usize, partition: Partition) -> Result<usize, TreeError> {
        if self.steps.len() >= self.budget {
            return Err(TreeError::BudgetExceeded {
                budget: self.budget,
            });
        }
        if index >= self.input.len() {
            return Err(TreeError::QueryOutOfRange {
                index,
                arity: self.input.len(),
            });
        }
        if self.queried[index] {
            return Err(TreeError::RepeatedQuery { index });
        }
        partition
            .check(self.alphabet)
            .map_err(|fault| TreeError::InvalidPartition { index, fault })?;
        let value = self.input[index];
        let block_index = partition
            .block_of(value)
            .expect("checked partition covers the alphabet");
        let color = partition.colors[block_index];
        let mut off = OffColors {
            black: false,
            red: false,
        };
        for (i, c) in partition.colors.iter().enumerate() {
            if i != block_index {
                match c {
                    Color::Black => off.black = true,
                    Color::Red => off.red = true,
                }
            }
        }
        self.queried[index] = true;
        self.steps.push(Step {
            query: index,
            value,
            block_index,
            block: partition.blocks[block_index].clone(),
            color,
            reds_before: self.reds,
            block_count: partition.blocks.len(),
            off_colors: off,
            partition,
        });
        if color == Color::Red {
            self.reds += 1;
        }
        Ok(block_index)
    }
}

/// Default step budget for path evaluation: generous for every program in
/// the catalog while still catching runaway state machines.
pub fn default_budget(arity: usize, alphabet: usize) -> usize {
    4 * arity * alphabet + 16
}

/// Runs `tree` on `input` and returns the transcript, with the default budget.
pub fn evaluate_path(tree: &dyn TreeProgram, input: &[Symbol]) -> Result<Transcript, TreeError> {
    evaluate_path_with_budget(tree, input, default_budget(tree.arity(), tree.alphabet()))
}

/// Runs `tree` on `input` with an explicit step budget.
pub fn evaluate_path_with_budget(
    tree: &dyn TreeProgram,
    input: &[Symbol],
    budget: usize,
) -> Result<Transcript, TreeError> {
    if input.len() != tree.arity() {
        return Err(TreeError::Program(format!(
            "input length {} does not match arity {}",
            input.len(),
            tree.arity()
        )));
    }
    let ell = tree.alphabet();
    if let Some(&s) = input.iter().find(|&&s| (s as usize) >= ell) {
        return Err(TreeError::Program(format!(
            "input symbol {s} outside alphabet of size {ell}"
        )));
    }
    let mut driver = Driver::new(input, ell, budget);
    let label = tree.run(&mut driver)?;
    Ok(Transcript {
        steps: driver.into_steps(),
        label,
    })
}

/// First vertex where two paths take different blocks, with the queried
/// coordinate. `None` when one transcript's block sequence is a prefix of
/// the other's (in a deterministic tree that means equal leaf vertices).
pub fn divergence_vertex(a: &Transcript, b: &Transcript) -> Option<(VertexId, usize)> {
    let upto = a.len().min(b.len());
    for t in 0..upto {
        let (sa, sb) = (&a.steps[t], &b.steps[t]);
        if sa.query != sb.query {
            // Two deterministic runs with an identical answer prefix cannot
            // disagree on the next query; treat the earlier vertex as the
            // divergence point so callers still get a stable answer.
            return Some((a.vertex_id(t), sa.query));
        }
        if sa.block != sb.block {
            return Some((a.vertex_id(t), sa.query));
        }
    }
    None
}

/// A total function on an enumerated domain.
///
/// Inputs are strings over `[ell]` of length `n`; outputs are labels in
/// `[m]`. Catalog constructors also attach human-readable label names.
#[derive(Clone, Debug)]
pub struct FunctionSpec {
    n: usize,
    ell: usize,
    m: usize,
    inputs: Vec<Vec<Symbol>>,
    labels: Vec<Label>,
    index: HashMap<Vec<Symbol>, usize>,
    label_names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("domain is empty")]
    EmptyDomain,
    #[error("input {0} has length {1}, expected {2}")]
    BadLength(usize, usize, usize),
    #[error("input {0} contains symbol {1} outside alphabet of size {2}")]
    BadSymbol(usize, Symbol, usize),
    #[error("input {0} duplicates an earlier domain entry")]
    Duplicate(usize),
    #[error("input {0} has label {1} outside label space of size {2}")]
    BadLabel(usize, Label, usize),
    #[error("{0} labels for {1} inputs")]
    LabelCountMismatch(usize, usize),
    #[error("label space must be nonempty")]
    NoLabels,
}

impl FunctionSpec {
    pub fn new(
        n: usize,
        ell: usize,
        m: usize,
        inputs: Vec<Vec<Symbol>>,
        labels: Vec<Label>,
    ) -> Result<Self, SpecError> {
        let names = (0..m).map(|l| l.to_string()).collect();
        Self::with_label_names(n, ell, m, inputs, labels, names)
    }

    pub fn with_label_names(
        n: usize,
        ell: usize,
        m: usize,
        inputs: Vec<Vec<Symbol>>,
        labels: Vec<Label>,
        label_names: Vec<String>,
    ) -> Result<Self, SpecError> {
        if inputs.is_empty() {
            return Err(SpecError::EmptyDomain);
        }
        if m == 0 {
            return Err(SpecError::NoLabels);
        }
        let mut index = HashMap::with_capacity(inputs.len());
        for (i, x) in inputs.iter().enumerate() {
            if x.len() != n {
                return Err(SpecError::BadLength(i, x.len(), n));
            }
            if let Some(&s) = x.iter().find(|&&s| (s as usize) >= ell) {
                return Err(SpecError::BadSymbol(i, s, ell));
            }
            if index.insert(x.clone(), i).is_some() {
                return Err(SpecError::Duplicate(i));
            }
        }
        if labels.len() != inputs.len() {
            return Err(SpecError::LabelCountMismatch(labels.len(), inputs.len()));
        }
        for (i, &l) in labels.iter().enumerate() {
            if l >= m {
                return Err(SpecError::BadLabel(i, l, m));
            }
        }
        Ok(FunctionSpec {
            n,
            ell,
            m,
            inputs,
            labels,
            index,
            label_names,
        })
    }

    /// Builds a spec by evaluating `f` over `inputs`, interning distinct
    /// outputs as labels in first-seen order.
    pub fn from_outputs<O, F>(
        n: usize,
        ell: usize,
        inputs: Vec<Vec<Symbol>>,
        mut f: F,
        mut name: impl FnMut(&O) -> String,
    ) -> Result<Self, SpecError>
    where
        O: Eq + std::hash::Hash + Clone,
        F: FnMut(&[Symbol]) -> O,
    {
        let mut interner: HashMap<O, Label> = HashMap::new();
        let mut names = Vec::new();
        let mut labels = Vec::with_capacity(inputs.len());
        for x in &inputs {
            let out = f(x);
            let next = interner.len();
            let label = *interner.entry(out.clone()).or_insert_with(|| {
                names.push(name(&out));
                next
            });
            labels.push(label);
        }
        let m = interner.len();
        Self::with_label_names(n, ell, m, inputs, labels, names)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<Symbol>] {
        &self.inputs
    }

    pub fn input(&self, i: usize) -> &[Symbol] {
        &self.inputs[i]
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn label_name(&self, l: Label) -> &str {
        &self.label_names[l]
    }

    pub fn value(&self, x: &[Symbol]) -> Option<Label> {
        self.index.get(x).map(|&i| self.labels[i])
    }

    pub fn position(&self, x: &[Symbol]) -> Option<usize> {
        self.index.get(x).copied()
    }
}

/// Every string over `[ell]` of length `n`, in lexicographic order.
pub fn all_strings(n: usize, ell: usize) -> Vec<Vec<Symbol>> {
    let mut out = Vec::with_capacity(ell.pow(n as u32));
    let mut cur = vec![0 as Symbol; n];
    loop {
        out.push(cur.clone());
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if (cur[k] as usize) + 1 < ell {
                cur[k] += 1;
                for v in cur.iter_mut().skip(k + 1) {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// One problem found by [`validate`].
#[derive(Clone, Debug)]
pub enum ValidationIssue {
    /// Running the tree on a domain input failed.
    Evaluation { input: usize, error: TreeError },
    /// The leaf label disagrees with the function value.
    WrongLabel {
        input: usize,
        got: Label,
        want: Label,
    },
    /// Two runs on the same input produced different transcripts.
    NonDeterministic { input: usize },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::Evaluation { input, error } => {
                write!(f, "input #{input}: {error}")
            }
            ValidationIssue::WrongLabel { input, got, want } => {
                write!(f, "input #{input}: leaf label {got}, function value {want}")
            }
            ValidationIssue::NonDeterministic { input } => {
                write!(f, "input #{input}: repeated evaluation differs")
            }
        }
    }
}

/// Result of validating a tree against a function spec.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
    /// Vertices with a single outgoing block carry no information; they are
    /// legal but usually a sign of a wasted query.
    pub single_block_vertices: usize,
    pub inputs_checked: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks that `tree` decides `f` with a well-formed guess coloring.
///
/// Every domain input is run twice (catching nondeterministic programs); the
/// driver itself enforces query-once, partition validity, and the
/// at-most-one-black rule, so any structural violation surfaces as an
/// evaluation issue.
pub fn validate(tree: &dyn TreeProgram, f: &FunctionSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    for i in 0..f.len() {
        report.inputs_checked += 1;
        let x = f.input(i);
        let first = match evaluate_path(tree, x) {
            Ok(t) => t,
            Err(error) => {
                report
                    .issues
                    .push(ValidationIssue::Evaluation { input: i, error });
                continue;
            }
        };
        match evaluate_path(tree, x) {
            Ok(second) => {
                let same = first.label == second.label
                    && first.len() == second.len()
                    && first.steps.iter().zip(&second.steps).all(|(a, b)| {
                        a.query == b.query && a.block == b.block && a.color == b.color
                    });
                if !same {
                    report
                        .issues
                        .push(ValidationIssue::NonDeterministic { input: i });
                    continue;
                }
            }
            Err(error) => {
                report
                    .issues
                    .push(ValidationIssue::Evaluation { input: i, error });
                continue;
            }
        }
        report.single_block_vertices += first.steps.iter().filter(|s| s.block_count == 1).count();
        if first.label != f.label(i) {
            report.issues.push(ValidationIssue::WrongLabel {
                input: i,
                got: first.label,
                want: f.label(i),
            });
        }
    }
    report
}

/// Evaluates every domain input once and returns the transcripts in domain
/// order. Fails fast on the first evaluation error.
pub fn transcripts_for(
    tree: &dyn TreeProgram,
    f: &FunctionSpec,
) -> Result<Vec<Transcript>, TreeError> {
    f.inputs().iter().map(|x| evaluate_path(tree, x)).collect()
}

/// Rewrites every partition a program presents so that the block containing
/// `guess` is black and all other blocks are red. This is the "always guess
/// `q0`" coloring; it never changes which block an input falls into.
pub struct FixedGuess {
    inner: Arc<dyn TreeProgram>,
    guess: Symbol,
}

impl FixedGuess {
    pub fn new(inner: Arc<dyn TreeProgram>, guess: Symbol) -> Result<Self, TreeError> {
        if (guess as usize) >= inner.alphabet() {
            return Err(TreeError::Program(format!(
                "guess symbol {guess} outside alphabet of size {}",
                inner.alphabet()
            )));
        }
        Ok(FixedGuess { inner, guess })
    }
}

struct RecolorSink<'a> {
    inner: &'a mut dyn QuerySink,
    guess: Symbol,
}

impl QuerySink for RecolorSink<'_> {
    fn query(&mut self, index: usize, mut partition: Partition) -> Result<usize, TreeError> {
        for (block, color) in partition.blocks.iter().zip(partition.colors.iter_mut()) {
            *color = if block.contains(self.guess) {
                Color::Black
            } else {
                Color::Red
            };
        }
        self.inner.query(index, partition)
    }
}

impl TreeProgram for FixedGuess {
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn alphabet(&self) -> usize {
        self.inner.alphabet()
    }

    fn run(&self, queries: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let mut sink = RecolorSink {
            inner: queries,
            guess: self.guess,
        };
        self.inner.run(&mut sink)
    }
}
