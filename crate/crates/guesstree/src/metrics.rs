//! Path and tree statistics.
//!
//! The two numbers the whole crate revolves around are `T` — the depth of a
//! decision tree over its domain — and `G` — the worst-case number of red
//! (surprise) edges along a root-to-leaf path. Everything here measures
//! those, their per-generation refinement `T_g`, and their expectations over
//! randomized tree families.

use std::collections::HashMap;
use std::sync::Arc;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    evaluate_path, Color, FixedGuess, FunctionSpec, Symbol, Transcript, TreeError, TreeProgram,
};

/// Statistics of a single root-to-leaf path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathStats {
    /// Number of queries on the path (`T_x`).
    pub length: usize,
    /// Number of red steps (`G_x`).
    pub reds: usize,
    /// Lengths of the maximal black runs, split by the red steps.
    /// `segments[g]` counts black steps taken after the `g`-th red step
    /// (so `segments[0]` is the run before the first red). Always has
    /// `reds + 1` entries, and `length = reds + sum(segments)`.
    pub segments: Vec<usize>,
}

/// Measures one transcript.
pub fn path_stats(t: &Transcript) -> PathStats {
    let mut segments = vec![0usize];
    for step in &t.steps {
        match step.color {
            Color::Black => *segments.last_mut().unwrap() += 1,
            Color::Red => segments.push(0),
        }
    }
    PathStats {
        length: t.len(),
        reds: segments.len() - 1,
        segments,
    }
}

/// Worst-case statistics of a tree over a finite domain.
#[derive(Clone, Debug)]
pub struct TreeMetrics {
    /// `T = max_x T_x`.
    pub t: usize,
    /// `G = max_x G_x`.
    pub g: usize,
    /// `T_g = max_x` (black steps of `x` after its `g`-th red step), for
    /// `g = 0..=G`. Note the maxima may be attained by different inputs.
    pub t_g: Vec<usize>,
    /// Index (into the domain) of an input attaining `T`.
    pub argmax_t: usize,
    /// Index of an input attaining `G`.
    pub argmax_g: usize,
    /// Per-input stats, aligned with the domain order.
    pub per_input: Vec<PathStats>,
}

/// Runs `tree` on every domain input and aggregates the maxima.
pub fn tree_metrics(tree: &dyn TreeProgram, f: &FunctionSpec) -> Result<TreeMetrics, TreeError> {
    let mut per_input = Vec::with_capacity(f.len());
    for x in f.inputs() {
        per_input.push(path_stats(&evaluate_path(tree, x)?));
    }
    Ok(aggregate(per_input))
}

fn aggregate(per_input: Vec<PathStats>) -> TreeMetrics {
    let mut t = 0;
    let mut g = 0;
    let mut argmax_t = 0;
    let mut argmax_g = 0;
    for (i, s) in per_input.iter().enumerate() {
        if s.length > t {
            t = s.length;
            argmax_t = i;
        }
        if s.reds > g {
            g = s.reds;
            argmax_g = i;
        }
    }
    let mut t_g = vec![0usize; g + 1];
    for s in &per_input {
        for (gen, &run) in s.segments.iter().enumerate() {
            if run > t_g[gen] {
                t_g[gen] = run;
            }
        }
    }
    TreeMetrics {
        t,
        g,
        t_g,
        argmax_t,
        argmax_g,
        per_input,
    }
}

/// Recolors a tree so that, at every vertex, the block containing `guess`
/// is the single black block and every other block is red. The classical
/// behavior is untouched; only the colors (and hence `G`) change.
pub fn auto_color_fixed_guess(
    tree: Arc<dyn TreeProgram>,
    guess: Symbol,
) -> Result<FixedGuess, TreeError> {
    FixedGuess::new(tree, guess)
}

/// Sparsity of a function's domain: the symbol `q*` minimizing the
/// worst-case number of coordinates differing from it, together with that
/// count. A domain that is `g`-sparse around `q*` admits a depth-`T`,
/// `G <= g` tree by guessing `q*` everywhere.
pub fn sparse_g(f: &FunctionSpec) -> (Symbol, usize) {
    let mut best = (0 as Symbol, usize::MAX);
    for q in 0..f.ell() as Symbol {
        let worst = f
            .inputs()
            .iter()
            .map(|x| x.iter().filter(|&&s| s != q).count())
            .max()
            .unwrap_or(0);
        if worst < best.1 {
            best = (q, worst);
        }
    }
    best
}

/// A finite randomized family of trees computing (or approximating) one
/// function: members carry sampling weights that sum to one.
#[derive(Clone)]
pub struct TreeFamily {
    members: Vec<FamilyMember>,
    uniform: bool,
}

#[derive(Clone)]
pub struct FamilyMember {
    pub name: String,
    pub tree: Arc<dyn TreeProgram>,
    /// Sampling probability; the family normalizes these to sum to one.
    pub weight: f64,
}

impl TreeFamily {
    /// Builds a uniformly weighted family. Panics on an empty member list or
    /// on members that disagree about arity/alphabet.
    pub fn uniform(members: Vec<(String, Arc<dyn TreeProgram>)>) -> TreeFamily {
        let k = members.len();
        assert!(k > 0, "family needs at least one member");
        let w = 1.0 / k as f64;
        TreeFamily::build(
            members
                .into_iter()
                .map(|(name, tree)| FamilyMember {
                    name,
                    tree,
                    weight: w,
                })
                .collect(),
            true,
        )
    }

    /// Builds a family with explicit positive weights (normalized here).
    pub fn weighted(members: Vec<(String, Arc<dyn TreeProgram>, f64)>) -> TreeFamily {
        assert!(!members.is_empty(), "family needs at least one member");
        let total: f64 = members.iter().map(|(_, _, w)| *w).sum();
        assert!(total > 0.0, "weights must have positive total");
        let k = members.len() as f64;
        let uniform = members
            .iter()
            .all(|(_, _, w)| (w / total - 1.0 / k).abs() < 1e-12);
        TreeFamily::build(
            members
                .into_iter()
                .map(|(name, tree, w)| FamilyMember {
                    name,
                    tree,
                    weight: w / total,
                })
                .collect(),
            uniform,
        )
    }

    fn build(members: Vec<FamilyMember>, uniform: bool) -> TreeFamily {
        let arity = members[0].tree.arity();
        let alphabet = members[0].tree.alphabet();
        for m in &members {
            assert_eq!(m.tree.arity(), arity, "family members disagree on arity");
            assert_eq!(
                m.tree.alphabet(),
                alphabet,
                "family members disagree on alphabet"
            );
        }
        TreeFamily { members, uniform }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn member(&self, i: usize) -> &FamilyMember {
        &self.members[i]
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.members[i].weight
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn arity(&self) -> usize {
        self.members[0].tree.arity()
    }

    pub fn alphabet(&self) -> usize {
        self.members[0].tree.alphabet()
    }
}

/// How member expectations were evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum ExpectationMode {
    /// Every member, weighted by its probability.
    Exact,
    /// `samples` members drawn by weight with a seeded generator.
    Sampled { samples: usize, seed: u64 },
}

/// Expected statistics of a randomized family over a domain, maximized over
/// inputs: `T = max_x E[T_x]`, `G = max_x E[G_x]`, and per-generation
/// `T_g = max_x E[T_{g,x}]`. `g_max` is the largest red count any evaluated
/// (member, input) pair produced.
#[derive(Clone, Debug)]
pub struct EnsembleMetrics {
    pub t: f64,
    pub g: f64,
    pub g_max: usize,
    pub t_g: Vec<f64>,
    /// Same maxima as exact rationals, present when the evaluation was exact
    /// over a uniform family of tractable size.
    pub exact: Option<ExactEnsembleMetrics>,
    pub mode: ExpectationMode,
    pub members_evaluated: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactEnsembleMetrics {
    pub t: Ratio<i64>,
    pub g: Ratio<i64>,
    pub t_g: Vec<Ratio<i64>>,
}

/// Work cap for carrying exact rationals alongside the floats: the number
/// of evaluated members times the deepest path must stay at most this.
const EXACT_WORK_CAP: u128 = 1_000_000;

/// Evaluates expected path statistics of `family` over the domain of `f`.
pub fn ensemble_metrics(
    family: &TreeFamily,
    f: &FunctionSpec,
    mode: ExpectationMode,
) -> Result<EnsembleMetrics, TreeError> {
    // Member indices to evaluate plus the probability attached to each.
    let picks: Vec<(usize, f64)> = match &mode {
        ExpectationMode::Exact => (0..family.len()).map(|i| (i, family.prob(i))).collect(),
        ExpectationMode::Sampled { samples, seed } => {
            assert!(*samples > 0, "sampled mode needs a positive sample count");
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let w = 1.0 / *samples as f64;
            (0..*samples)
                .map(|_| (sample_member(family, &mut rng), w))
                .collect()
        }
    };

    let mut per_input: Vec<Moments> = vec![Moments::default(); f.len()];
    let mut g_max = 0usize;
    let mut t_max_seen = 0usize;
    // Count exactly when the family is uniform (probabilities are then the
    // rational 1/K, or 1/samples in sampled mode, which is always uniform).
    let exact_eligible = family.is_uniform() || matches!(mode, ExpectationMode::Sampled { .. });

    for &(mi, p) in &picks {
        let tree = family.member(mi).tree.as_ref();
        for (xi, x) in f.inputs().iter().enumerate() {
            let stats = path_stats(&evaluate_path(tree, x)?);
            g_max = g_max.max(stats.reds);
            t_max_seen = t_max_seen.max(stats.length);
            per_input[xi].add(&stats, p);
        }
    }

    let work = picks.len() as u128 * t_max_seen.max(1) as u128;
    let exact = if exact_eligible && work <= EXACT_WORK_CAP {
        Some(exact_maxima(&per_input, picks.len() as i64))
    } else {
        None
    };

    let mut t = 0.0f64;
    let mut g = 0.0f64;
    let mut t_g = vec![0.0f64; g_max + 1];
    for m in &per_input {
        t = t.max(m.t);
        g = g.max(m.g);
        for (gen, &v) in m.t_g.iter().enumerate() {
            t_g[gen] = t_g[gen].max(v);
        }
    }

    Ok(EnsembleMetrics {
        t,
        g,
        g_max,
        t_g,
        exact,
        mode,
        members_evaluated: picks.len(),
    })
}

fn sample_member(family: &TreeFamily, rng: &mut ChaCha8Rng) -> usize {
    if family.is_uniform() {
        return rng.gen_range(0..family.len());
    }
    let mut u: f64 = rng.gen();
    for i in 0..family.len() {
        u -= family.prob(i);
        if u <= 0.0 {
            return i;
        }
    }
    family.len() - 1
}

/// Running expectation accumulators for one input, in floats plus integer
/// tallies (the latter yield exact rationals for uniform weights).
#[derive(Clone, Default)]
struct Moments {
    t: f64,
    g: f64,
    t_g: Vec<f64>,
    t_total: i64,
    g_total: i64,
    t_g_total: Vec<i64>,
}

impl Moments {
    fn add(&mut self, stats: &PathStats, p: f64) {
        self.t += p * stats.length as f64;
        self.g += p * stats.reds as f64;
        self.t_total += stats.length as i64;
        self.g_total += stats.reds as i64;
        if self.t_g.len() < stats.segments.len() {
            self.t_g.resize(stats.segments.len(), 0.0);
            self.t_g_total.resize(stats.segments.len(), 0);
        }
        for (gen, &run) in stats.segments.iter().enumerate() {
            self.t_g[gen] += p * run as f64;
            self.t_g_total[gen] += run as i64;
        }
    }
}

fn exact_maxima(per_input: &[Moments], k: i64) -> ExactEnsembleMetrics {
    let zero = Ratio::new(0, 1);
    let mut t = zero;
    let mut g = zero;
    let mut t_g: Vec<Ratio<i64>> = Vec::new();
    for m in per_input {
        t = t.max(Ratio::new(m.t_total, k));
        g = g.max(Ratio::new(m.g_total, k));
        if t_g.len() < m.t_g_total.len() {
            t_g.resize(m.t_g_total.len(), zero);
        }
        for (gen, &v) in m.t_g_total.iter().enumerate() {
            t_g[gen] = t_g[gen].max(Ratio::new(v, k));
        }
    }
    ExactEnsembleMetrics { t, g, t_g }
}

/// Convenience: a single tree seen as a one-member family, so the two
/// metric paths agree on shared inputs.
pub fn singleton_family(name: &str, tree: Arc<dyn TreeProgram>) -> TreeFamily {
    TreeFamily::uniform(vec![(name.to_string(), tree)])
}

/// Expectation table for reporting: per-input expected `T_x`/`G_x`.
pub fn per_input_expectations(
    family: &TreeFamily,
    f: &FunctionSpec,
) -> Result<Vec<(f64, f64)>, TreeError> {
    let mut out = vec![(0.0, 0.0); f.len()];
    for i in 0..family.len() {
        let p = family.prob(i);
        let tree = family.member(i).tree.as_ref();
        for (xi, x) in f.inputs().iter().enumerate() {
            let s = path_stats(&evaluate_path(tree, x)?);
            out[xi].0 += p * s.length as f64;
            out[xi].1 += p * s.reds as f64;
        }
    }
    Ok(out)
}

/// Groups domain inputs by leaf label under one tree; used by reports.
pub fn label_histogram(
    tree: &dyn TreeProgram,
    f: &FunctionSpec,
) -> Result<HashMap<usize, usize>, TreeError> {
    let mut h = HashMap::new();
    for x in f.inputs() {
        let t = evaluate_path(tree, x)?;
        *h.entry(t.label).or_insert(0) += 1;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{all_strings, Partition, QuerySink};
    use proptest::prelude::*;

    /// Fixture: scans for 2s over [3]^n, stopping at the second one.
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
        fn run(&self, q: &mut dyn QuerySink) -> Result<usize, TreeError> {
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
    fn stats_of_a_known_path() {
        let tree = StopAtTwoTwos { n: 5 };
        let t = evaluate_path(&tree, &[0, 2, 0, 0, 2]).unwrap();
        let s = path_stats(&t);
        assert_eq!(s.length, 5);
        assert_eq!(s.reds, 2);
        assert_eq!(s.segments, vec![1, 2, 0]);
    }

    #[test]
    fn tree_maxima_for_the_scanner() {
        let m = tree_metrics(&StopAtTwoTwos { n: 4 }, &spec(4)).unwrap();
        assert_eq!(m.t, 4);
        assert_eq!(m.g, 2);
        // The all-black input fills generation 0; a single leading 2 leaves
        // three blacks in generation 1; the second 2 always ends the run.
        assert_eq!(m.t_g, vec![4, 3, 0]);
    }

    #[test]
    fn generation_depths_for_the_nine_coordinate_scanner() {
        let m = tree_metrics(&StopAtTwoTwos { n: 9 }, &spec(9)).unwrap();
        assert_eq!(m.t, 9);
        assert_eq!(m.g, 2);
        assert_eq!(m.t_g, vec![9, 8, 0]);
    }

    #[test]
    fn sparse_g_finds_the_quiet_symbol() {
        // Strings over [3]^4 with at most one coordinate differing from 1.
        let mut inputs = vec![vec![1, 1, 1, 1]];
        for j in 0..4 {
            for s in [0u16, 2] {
                let mut x = vec![1, 1, 1, 1];
                x[j] = s;
                inputs.push(x);
            }
        }
        let f = FunctionSpec::from_outputs(
            4,
            3,
            inputs,
            |x| x.iter().filter(|&&s| s != 1).count(),
            |o| o.to_string(),
        )
        .unwrap();
        assert_eq!(sparse_g(&f), (1, 1));
    }

    #[test]
    fn singleton_family_matches_plain_metrics() {
        let f = spec(4);
        let plain = tree_metrics(&StopAtTwoTwos { n: 4 }, &f).unwrap();
        let fam = singleton_family("scan", Arc::new(StopAtTwoTwos { n: 4 }));
        let em = ensemble_metrics(&fam, &f, ExpectationMode::Exact).unwrap();
        assert_eq!(em.t, plain.t as f64);
        assert_eq!(em.g, plain.g as f64);
        assert_eq!(em.g_max, plain.g);
        let ex = em.exact.unwrap();
        assert_eq!(ex.t, Ratio::new(plain.t as i64, 1));
        assert_eq!(ex.g, Ratio::new(plain.g as i64, 1));
    }

    #[test]
    fn sampled_expectations_are_reproducible() {
        let fam = TreeFamily::uniform(vec![
            (
                "a".into(),
                Arc::new(StopAtTwoTwos { n: 4 }) as Arc<dyn TreeProgram>,
            ),
            (
                "b".into(),
                Arc::new(StopAtTwoTwos { n: 4 }) as Arc<dyn TreeProgram>,
            ),
        ]);
        let f = spec(4);
        let mode = ExpectationMode::Sampled {
            samples: 50,
            seed: 7,
        };
        let a = ensemble_metrics(&fam, &f, mode.clone()).unwrap();
        let b = ensemble_metrics(&fam, &f, mode).unwrap();
        assert_eq!(a.t, b.t);
        assert_eq!(a.g, b.g);
        assert_eq!(a.t_g, b.t_g);
    }

    #[test]
    fn weighted_family_normalizes() {
        let fam = TreeFamily::weighted(vec![
            (
                "a".into(),
                Arc::new(StopAtTwoTwos { n: 3 }) as Arc<dyn TreeProgram>,
                3.0,
            ),
            (
                "b".into(),
                Arc::new(StopAtTwoTwos { n: 3 }) as Arc<dyn TreeProgram>,
                1.0,
            ),
        ]);
        assert!((fam.prob(0) - 0.75).abs() < 1e-15);
        assert!((fam.prob(1) - 0.25).abs() < 1e-15);
        assert!(!fam.is_uniform());
    }

    proptest! {
        /// Path length always splits as reds + total black-run mass, with
        /// exactly reds + 1 runs.
        #[test]
        fn length_decomposes_into_runs(x in proptest::collection::vec(0u16..3, 1..9)) {
            let tree = StopAtTwoTwos { n: x.len() };
            let t = evaluate_path(&tree, &x).unwrap();
            let s = path_stats(&t);
            prop_assert_eq!(s.segments.len(), s.reds + 1);
            prop_assert_eq!(s.length, s.reds + s.segments.iter().sum::<usize>());
        }
    }
}
