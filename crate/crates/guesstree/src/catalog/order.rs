//! Order statistics via randomized scan order: minimum finding and the
//! `k` smallest entries.
//!
//! Each family member fixes a permutation and scans the input in that
//! order, keeping the running best (or best `k`). Ties are split by
//! position — entry `(value, index)` beats `(value', index')` when the
//! value is smaller or the values tie and the index is smaller — which
//! makes the answer member-independent and keeps the record analysis
//! exact: under a uniformly random scan order the expected number of
//! record updates among the first `t` entries changes by `min(k, t)/t`
//! at step `t`, so the expected red count is `k + k*(H_n - H_k)`
//! (harmonic numbers; `k = 1` gives `H_n`).

use std::sync::Arc;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::metrics::TreeFamily;
use crate::model::{
    all_strings, Block, Color, FunctionSpec, Label, Partition, QuerySink, Symbol, TreeError,
    TreeProgram,
};

/// `(value, position)` precedence: smaller value first, position breaking
/// ties.
fn beats(value: Symbol, pos: usize, best_value: Symbol, best_pos: usize) -> bool {
    value < best_value || (value == best_value && pos < best_pos)
}

/// One scan order for minimum finding. Red singletons are exactly the
/// symbols that would replace the current best; the rest is one black
/// block.
pub struct MinMember {
    pub n: usize,
    pub ell: usize,
    pub perm: Vec<usize>,
}

fn record_partition(ell: usize, pos: usize, best: Option<(Symbol, usize)>) -> Partition {
    match best {
        // First probe: everything is a record.
        None => Partition::singletons(ell, Color::Red),
        Some((bv, bp)) => {
            let mut parts: Vec<(Block, Color)> = Vec::new();
            let mut black: Vec<Symbol> = Vec::new();
            for q in 0..ell as Symbol {
                if beats(q, pos, bv, bp) {
                    parts.push((Block::new(vec![q]), Color::Red));
                } else {
                    black.push(q);
                }
            }
            if !black.is_empty() {
                parts.push((Block::new(black), Color::Black));
            }
            Partition::new(parts)
        }
    }
}

impl TreeProgram for MinMember {
    fn arity(&self) -> usize {
        self.n
    }
    fn alphabet(&self) -> usize {
        self.ell
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let mut best: Option<(Symbol, usize)> = None;
        for &j in &self.perm {
            let partition = record_partition(self.ell, j, best);
            let block = sink.query(j, partition.clone())?;
            if partition.colors[block] == Color::Red {
                // Red blocks are singletons, so the value is known.
                best = Some((partition.blocks[block].0[0], j));
            }
        }
        Ok(best.expect("n >= 1").1)
    }
}

/// One scan order for the `k` smallest entries. The label is the interned
/// id of the `k` best positions in precedence order.
pub struct KMinMember {
    pub n: usize,
    pub ell: usize,
    pub k: usize,
    pub perm: Vec<usize>,
    labels: Arc<super::Interner<Vec<usize>>>,
}

fn top_k_partition(ell: usize, pos: usize, top: &[(Symbol, usize)], k: usize) -> Partition {
    if top.len() < k {
        return Partition::singletons(ell, Color::Red);
    }
    let (bv, bp) = *top.last().expect("k >= 1");
    let mut parts: Vec<(Block, Color)> = Vec::new();
    let mut black: Vec<Symbol> = Vec::new();
    for q in 0..ell as Symbol {
        if beats(q, pos, bv, bp) {
            parts.push((Block::new(vec![q]), Color::Red));
        } else {
            black.push(q);
        }
    }
    if !black.is_empty() {
        parts.push((Block::new(black), Color::Black));
    }
    Partition::new(parts)
}

impl TreeProgram for KMinMember {
    fn arity(&self) -> usize {
        self.n
    }
    fn alphabet(&self) -> usize {
        self.ell
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        // Kept sorted by precedence, at most k entries.
        let mut top: Vec<(Symbol, usize)> = Vec::with_capacity(self.k + 1);
        for &j in &self.perm {
            let partition = top_k_partition(self.ell, j, &top, self.k);
            let block = sink.query(j, partition.clone())?;
            if partition.colors[block] == Color::Red {
                let value = partition.blocks[block].0[0];
                let at = top
                    .iter()
                    .position(|&(v, p)| beats(value, j, v, p))
                    .unwrap_or(top.len());
                top.insert(at, (value, j));
                top.truncate(self.k);
            }
        }
        let answer: Vec<usize> = top.iter().map(|&(_, p)| p).collect();
        Ok(self.labels.label_or_invalid(&answer))
    }
}

/// The precedence-minimum position: the classical answer every member
/// computes.
pub fn argmin(x: &[Symbol]) -> usize {
    (0..x.len())
        .min_by_key(|&j| (x[j], j))
        .expect("nonempty input")
}

/// The `k` precedence-smallest positions in precedence order.
pub fn k_smallest(x: &[Symbol], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by_key(|&j| (x[j], j));
    order.truncate(k);
    order
}

/// All permutations of `0..n` in a deterministic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    fn heap(k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(current.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, current, out);
            if k % 2 == 0 {
                current.swap(i, k - 1);
            } else {
                current.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut current, &mut out);
    out
}

/// Scan orders for a family: all `n!` when that stays within `cap`,
/// otherwise `sample` seeded draws.
pub fn scan_orders(n: usize, cap: usize, sample: usize, seed: u64) -> (Vec<Vec<usize>>, bool) {
    let mut factorial = 1usize;
    for t in 2..=n {
        factorial = factorial.saturating_mul(t);
    }
    if factorial <= cap {
        (all_permutations(n), true)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let orders = (0..sample)
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        (orders, false)
    }
}

/// Uniform family of [`MinMember`] trees, one per scan order.
pub fn min_family(n: usize, ell: usize, orders: Vec<Vec<usize>>) -> TreeFamily {
    TreeFamily::uniform(
        orders
            .into_iter()
            .map(|perm| {
                let name = format!(
                    "order-{}",
                    perm.iter()
                        .map(|j| j.to_string())
                        .collect::<Vec<_>>()
                        .join("")
                );
                let tree: Arc<dyn TreeProgram> = Arc::new(MinMember { n, ell, perm });
                (name, tree)
            })
            .collect(),
    )
}

/// Uniform family of [`KMinMember`] trees sharing one label interner.
pub fn k_min_family(
    n: usize,
    ell: usize,
    k: usize,
    orders: Vec<Vec<usize>>,
    labels: Arc<super::Interner<Vec<usize>>>,
) -> TreeFamily {
    TreeFamily::uniform(
        orders
            .into_iter()
            .map(|perm| {
                let name = format!(
                    "order-{}",
                    perm.iter()
                        .map(|j| j.to_string())
                        .collect::<Vec<_>>()
                        .join("")
                );
                let tree: Arc<dyn TreeProgram> = Arc::new(KMinMember {
                    n,
                    ell,
                    k,
                    perm,
                    labels: labels.clone(),
                });
                (name, tree)
            })
            .collect(),
    )
}

/// Domain and labels for minimum finding: the full cube, labeled by the
/// precedence-minimum position.
pub fn min_spec(n: usize, ell: usize) -> FunctionSpec {
    let inputs = all_strings(n, ell);
    let labels: Vec<Label> = inputs.iter().map(|x| argmin(x)).collect();
    let names = (0..n).map(|j| format!("argmin={j}")).collect();
    FunctionSpec::with_label_names(n, ell, n, inputs, labels, names)
        .expect("min spec is well-formed")
}

/// Domain, labels, and shared interner for the `k`-smallest problem.
pub fn k_min_spec(
    n: usize,
    ell: usize,
    k: usize,
) -> (FunctionSpec, Arc<super::Interner<Vec<usize>>>) {
    let inputs = all_strings(n, ell);
    let mut interner = super::Interner::new(|s: &Vec<usize>| {
        format!(
            "best[{}]",
            s.iter()
                .map(|j| j.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    });
    let labels: Vec<Label> = inputs
        .iter()
        .map(|x| interner.intern(k_smallest(x, k)))
        .collect();
    let interner = Arc::new(interner);
    let spec =
        FunctionSpec::with_label_names(n, ell, interner.len(), inputs, labels, interner.names())
            .expect("k-min spec is well-formed");
    (spec, interner)
}

/// `H_n = sum_{t=1..n} 1/t` as an exact rational.
pub fn harmonic(n: usize) -> Ratio<i64> {
    (1..=n as i64).map(|t| Ratio::new(1, t)).sum()
}

/// Exact expected red count for the `k`-smallest scan:
/// `k + k*(H_n - H_k)`, which is `H_n` at `k = 1`.
pub fn expected_records(n: usize, k: usize) -> Ratio<i64> {
    assert!(k >= 1 && k <= n);
    Ratio::from_integer(k as i64) + Ratio::from_integer(k as i64) * (harmonic(n) - harmonic(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{ensemble_metrics, path_stats, ExpectationMode};
    use crate::model::{evaluate_path, validate};

    #[test]
    fn every_member_computes_the_precedence_minimum() {
        let f = min_spec(3, 3);
        for perm in all_permutations(3) {
            let member = MinMember { n: 3, ell: 3, perm };
            assert!(validate(&member, &f).is_valid());
        }
    }

    #[test]
    fn sorted_input_in_identity_order_is_all_records() {
        let member = MinMember {
            n: 4,
            ell: 4,
            perm: vec![0, 1, 2, 3],
        };
        // Strictly decreasing along the scan: every probe is a new record.
        let t = evaluate_path(&member, &[3, 2, 1, 0]).unwrap();
        assert_eq!(path_stats(&t).reds, 4);
        // Strictly increasing: only the first probe is a record.
        let t = evaluate_path(&member, &[0, 1, 2, 3]).unwrap();
        assert_eq!(path_stats(&t).reds, 1);
    }

    #[test]
    fn expected_records_match_the_harmonic_recurrence() {
        assert_eq!(harmonic(4), Ratio::new(25, 12));
        assert_eq!(expected_records(4, 1), Ratio::new(25, 12));
        // k=2: 2, then +2/3, then +2/4.
        assert_eq!(expected_records(4, 2), Ratio::new(19, 6));
    }

    #[test]
    fn min_family_expected_reds_are_exact_for_every_input() {
        let f = min_spec(4, 4);
        let family = min_family(4, 4, all_permutations(4));
        let m = ensemble_metrics(&family, &f, ExpectationMode::Exact).unwrap();
        let exact = m.exact.expect("within the exact work cap");
        assert_eq!(exact.g, harmonic(4));
    }

    #[test]
    fn k_min_members_agree_with_the_classical_answer() {
        let (f, interner) = k_min_spec(4, 3, 2);
        let family = k_min_family(4, 3, 2, all_permutations(4), interner);
        for member in family.members() {
            assert!(
                validate(member.tree.as_ref(), &f).is_valid(),
                "{}",
                member.name
            );
        }
        let m = ensemble_metrics(&family, &f, ExpectationMode::Exact).unwrap();
        assert_eq!(m.exact.expect("small").g, Ratio::new(19, 6));
    }

    #[test]
    fn scan_order_sampling_is_deterministic() {
        let (a, exhaustive_a) = scan_orders(8, 5040, 25, 9);
        let (b, _) = scan_orders(8, 5040, 25, 9);
        assert!(!exhaustive_a);
        assert_eq!(a, b);
        assert_eq!(a.len(), 25);
        let (all, exhaustive) = scan_orders(4, 5040, 25, 9);
        assert!(exhaustive);
        assert_eq!(all.len(), 24);
    }
}
