//! List problems: single-pass scanners over a string input.
//!
//! All four trees query positions `0..n` in order and split the alphabet at
//! each vertex into the marked symbol `{q}` (red — the scanner's guess is
//! "this position is not a hit") and everything else (black).

use crate::model::{
    all_strings, Color, FunctionSpec, Label, Partition, QuerySink, Symbol, TreeError, TreeProgram,
};

/// Looks for the at-most-one position holding `q`; labels are the found
/// position, or `n` for "absent".
pub struct SearchTree {
    pub n: usize,
    pub ell: usize,
    pub q: Symbol,
}

impl TreeProgram for SearchTree {
    fn arity(&self) -> usize {
        self.n
    }
    fn alphabet(&self) -> usize {
        self.ell
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        for j in 0..self.n {
            let hit = Partition::split(self.ell, &[self.q], Color::Red, Color::Black);
            if sink.query(j, hit)? == 0 {
                return Ok(j);
            }
        }
        Ok(self.n)
    }
}

/// Counts occurrences of `q`, on a domain promising at most `r` of them.
pub struct CountingTree {
    pub n: usize,
    pub ell: usize,
    pub q: Symbol,
    pub r: usize,
}

impl TreeProgram for CountingTree {
    fn arity(&self) -> usize {
        self.n
    }
    fn alphabet(&self) -> usize {
        self.ell
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let mut count = 0;
        for j in 0..self.n {
            let hit = Partition::split(self.ell, &[self.q], Color::Red, Color::Black);
            if sink.query(j, hit)? == 0 {
                count += 1;
            }
        }
        Ok(count)
    }
}

/// Decides whether `q` occurs more than `k` times, halting at the
/// `(k+1)`-th hit. Labels: 0 = at most `k`, 1 = more.
pub struct ThresholdTree {
    pub n: usize,
    pub ell: usize,
    pub q: Symbol,
    pub k: usize,
}

impl TreeProgram for ThresholdTree {
    fn arity(&self) -> usize {
        self.n
    }
    fn alphabet(&self) -> usize {
        self.ell
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let mut count = 0;
        for j in 0..self.n {
            let hit = Partition::split(self.ell, &[self.q], Color::Red, Color::Black);
            if sink.query(j, hit)? == 0 {
                count += 1;
                if count > self.k {
                    return Ok(1);
                }
            }
        }
        Ok(0)
    }
}

/// Decides whether a ternary string holds at least two 2s, halting at the
/// second. Labels: 0 = fewer, 1 = at least two.
pub struct TwoTwosTree {
    pub n: usize,
}

impl TreeProgram for TwoTwosTree {
    fn arity(&self) -> usize {
        self.n
    }
    fn alphabet(&self) -> usize {
        3
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let mut twos = 0;
        for j in 0..self.n {
            let hit = Partition::split(3, &[2], Color::Red, Color::Black);
            if sink.query(j, hit)? == 0 {
                twos += 1;
                if twos == 2 {
                    return Ok(1);
                }
            }
        }
        Ok(0)
    }
}

fn occurrences(x: &[Symbol], q: Symbol) -> usize {
    x.iter().filter(|&&s| s == q).count()
}

/// Domain and labels for [`SearchTree`]: strings with at most one `q`.
pub fn search_spec(n: usize, ell: usize, q: Symbol) -> FunctionSpec {
    let inputs: Vec<Vec<Symbol>> = all_strings(n, ell)
        .into_iter()
        .filter(|x| occurrences(x, q) <= 1)
        .collect();
    let names: Vec<String> = (0..n)
        .map(|j| format!("found@{j}"))
        .chain(["absent".to_string()])
        .collect();
    let labels: Vec<Label> = inputs
        .iter()
        .map(|x| x.iter().position(|&s| s == q).unwrap_or(n))
        .collect();
    FunctionSpec::with_label_names(n, ell, n + 1, inputs, labels, names)
        .expect("search spec is well-formed")
}

/// Domain and labels for [`CountingTree`]: strings with at most `r` copies
/// of `q`, labeled by the exact count.
pub fn counting_spec(n: usize, ell: usize, q: Symbol, r: usize) -> FunctionSpec {
    let inputs: Vec<Vec<Symbol>> = all_strings(n, ell)
        .into_iter()
        .filter(|x| occurrences(x, q) <= r)
        .collect();
    let labels: Vec<Label> = inputs.iter().map(|x| occurrences(x, q)).collect();
    let names = (0..=r).map(|c| format!("count={c}")).collect();
    FunctionSpec::with_label_names(n, ell, r + 1, inputs, labels, names)
        .expect("counting spec is well-formed")
}

/// Domain and labels for [`ThresholdTree`]: the full cube, labeled by the
/// comparison against `k`.
pub fn threshold_spec(n: usize, ell: usize, q: Symbol, k: usize) -> FunctionSpec {
    let inputs = all_strings(n, ell);
    let labels: Vec<Label> = inputs
        .iter()
        .map(|x| usize::from(occurrences(x, q) > k))
        .collect();
    let names = vec![format!("at_most_{k}"), format!("more_than_{k}")];
    FunctionSpec::with_label_names(n, ell, 2, inputs, labels, names)
        .expect("threshold spec is well-formed")
}

/// Domain and labels for [`TwoTwosTree`]: the full ternary cube.
pub fn two_twos_spec(n: usize) -> FunctionSpec {
    let inputs = all_strings(n, 3);
    let labels: Vec<Label> = inputs
        .iter()
        .map(|x| usize::from(occurrences(x, 2) >= 2))
        .collect();
    let names = vec!["fewer_than_two_twos".into(), "two_twos".into()];
    FunctionSpec::with_label_names(n, 3, 2, inputs, labels, names)
        .expect("two-twos spec is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tree_metrics;
    use crate::model::validate;

    #[test]
    fn search_tree_matches_spec_and_metrics() {
        let f = search_spec(6, 2, 1);
        assert_eq!(f.len(), 7);
        let tree = SearchTree { n: 6, ell: 2, q: 1 };
        assert!(validate(&tree, &f).is_valid());
        let m = tree_metrics(&tree, &f).unwrap();
        assert_eq!((m.t, m.g), (6, 1));
    }

    #[test]
    fn counting_tree_never_halts_early() {
        let f = counting_spec(5, 3, 2, 2);
        assert_eq!(f.len(), 32 + 80 + 80);
        let tree = CountingTree {
            n: 5,
            ell: 3,
            q: 2,
            r: 2,
        };
        assert!(validate(&tree, &f).is_valid());
        let m = tree_metrics(&tree, &f).unwrap();
        assert_eq!((m.t, m.g), (5, 2));
        // Every path runs the full scan.
        assert!(m.per_input.iter().all(|p| p.length == 5));
    }

    #[test]
    fn threshold_tree_halts_after_k_plus_one_hits() {
        let f = threshold_spec(5, 2, 1, 2);
        assert_eq!(f.len(), 32);
        let tree = ThresholdTree {
            n: 5,
            ell: 2,
            q: 1,
            k: 2,
        };
        assert!(validate(&tree, &f).is_valid());
        let m = tree_metrics(&tree, &f).unwrap();
        assert_eq!((m.t, m.g), (5, 3));
        // The all-ones string stops right after its third hit.
        let all_ones = f.position(&vec![1; 5]).unwrap();
        assert_eq!(m.per_input[all_ones].length, 3);
    }

    #[test]
    fn two_twos_tree_is_threshold_at_one() {
        let f = two_twos_spec(5);
        let tree = TwoTwosTree { n: 5 };
        assert!(validate(&tree, &f).is_valid());
        let m = tree_metrics(&tree, &f).unwrap();
        assert_eq!((m.t, m.g), (5, 2));
    }
}
