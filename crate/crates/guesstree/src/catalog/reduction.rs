//! Instance transformations and the randomized k-cycle detector.
//!
//! Two deterministic constructions — closing an s-t path into a cycle
//! through a fresh vertex, and reversing every arc — plus the color-coding
//! machinery for finding a k-cycle through a fixed vertex: a random
//! k-coloring and a random orientation of every pair thin the graph to a
//! digraph whose directed cycles all have length divisible by k, and a
//! cheap BFS looks for one through the pinned vertex. A unique k-cycle
//! survives one draw with probability exactly `(2k)^-(k-1)`.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::classical;
use super::graph::{pair_index, GraphInstance};
use crate::metrics::TreeFamily;
use crate::model::{FunctionSpec, Label, Partition, QuerySink, TreeError, TreeProgram};

/// Adds a fresh vertex `n` with arcs `n -> s` and `t -> n`, so every
/// directed cycle through the new vertex is an s-t path plus two arcs;
/// the smallest one has length `dist(s, t) + 2`.
pub fn cycle_reduction(g: &GraphInstance, s: usize, t: usize) -> GraphInstance {
    assert!(g.is_directed());
    let n = g.n();
    assert!(s < n && t < n);
    let mut arcs: Vec<(usize, usize)> = g.edges().collect();
    arcs.push((n, s));
    arcs.push((t, n));
    GraphInstance::directed(n + 1, &arcs).expect("augmented instance is well-formed")
}

/// Every arc flipped; an involution.
pub fn reverse_graph(g: &GraphInstance) -> GraphInstance {
    g.reverse()
}

/// One random draw for the k-cycle detector: a color per vertex and an
/// orientation coin per unordered pair.
#[derive(Clone, Debug)]
pub struct ColorDraw {
    pub k: usize,
    pub colors: Vec<usize>,
    /// Indexed by `pair_index`; `true` orients the pair low -> high.
    pub coins: Vec<bool>,
}

impl ColorDraw {
    pub fn sample(n: usize, k: usize, rng: &mut impl Rng) -> ColorDraw {
        ColorDraw {
            k,
            colors: (0..n).map(|_| rng.gen_range(0..k)).collect(),
            coins: (0..n * (n - 1) / 2).map(|_| rng.gen()).collect(),
        }
    }

    /// Whether the ordered pair `(u, w)` would be an arc of the thinned
    /// digraph *if* `{u, w}` is an edge: colors must step up by one
    /// (mod k) and the coin must pick this direction.
    pub fn permits(&self, n: usize, u: usize, w: usize) -> bool {
        let step = self.colors[w] == (self.colors[u] + 1) % self.k;
        let coin = self.coins[pair_index(n, u, w)];
        step && if u < w { coin } else { !coin }
    }
}

/// The thinned digraph induced by a draw: arc `(u, w)` survives iff the
/// edge exists and [`ColorDraw::permits`] it. Directed cycles here climb
/// the colors by one per arc, so their lengths are multiples of `k`.
pub fn thinned_digraph(g: &GraphInstance, draw: &ColorDraw) -> GraphInstance {
    assert!(!g.is_directed());
    let n = g.n();
    let mut arcs = Vec::new();
    for (u, w) in g.edges() {
        if draw.permits(n, u, w) {
            arcs.push((u, w));
        }
        if draw.permits(n, w, u) {
            arcs.push((w, u));
        }
    }
    GraphInstance::directed(n, &arcs).expect("thinned instance is well-formed")
}

/// Monte Carlo estimate of the per-draw success probability: the fraction
/// of `draws` random draws whose thinned digraph has a directed cycle
/// through `v`. Built directly on known instances — no query trees — so it
/// is an independent reference for the detector.
pub fn survival_estimate(g: &GraphInstance, v: usize, k: usize, draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..draws {
        let draw = ColorDraw::sample(g.n(), k, &mut rng);
        if classical::smallest_cycle_through(&thinned_digraph(g, &draw), v).is_some() {
            hits += 1;
        }
    }
    hits as f64 / draws as f64
}

/// One member of the randomized k-cycle family: a fixed sequence of draws,
/// replayed round by round. Each round runs a BFS from `v` inside its
/// thinned digraph, probing an edge coordinate only when the draw permits
/// the arc; a shared cache across rounds keeps every pair queried at most
/// once on a path, so queries never exceed `n(n-1)/2` regardless of the
/// round count. Labels: 1 the moment any round closes a cycle, else 0.
pub struct KCycleMember {
    pub n: usize,
    pub v: usize,
    pub draws: Vec<ColorDraw>,
}

struct PairCache {
    n: usize,
    seen: Vec<Option<bool>>,
}

impl PairCache {
    fn probe(&mut self, sink: &mut dyn QuerySink, u: usize, w: usize) -> Result<bool, TreeError> {
        let idx = pair_index(self.n, u, w);
        if let Some(b) = self.seen[idx] {
            return Ok(b);
        }
        let b = sink.query(idx, Partition::bit_guess_zero())? == 1;
        self.seen[idx] = Some(b);
        Ok(b)
    }
}

impl TreeProgram for KCycleMember {
    fn arity(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
    fn alphabet(&self) -> usize {
        2
    }
    fn run(&self, sink: &mut dyn QuerySink) -> Result<Label, TreeError> {
        let n = self.n;
        let mut cache = PairCache {
            n,
            seen: vec![None; n * (n - 1) / 2],
        };
        for draw in &self.draws {
            let mut discovered = vec![false; n];
            discovered[self.v] = true;
            let mut queue = std::collections::VecDeque::from([self.v]);
            while let Some(u) = queue.pop_front() {
                for w in 0..n {
                    if discovered[w] || !draw.permits(n, u, w) {
                        continue;
                    }
                    if cache.probe(sink, u, w)? {
                        discovered[w] = true;
                        if draw.permits(n, w, self.v) && cache.probe(sink, w, self.v)? {
                            return Ok(1);
                        }
                        queue.push_back(w);
                    }
                }
            }
        }
        Ok(0)
    }
}

/// Default round count for the k-cycle detector: three expected hits'
/// worth of draws, `ceil(3 (2k)^(k-1))`.
pub fn default_rounds(k: usize) -> usize {
    3 * (2 * k).pow((k - 1) as u32)
}

/// The canonical demonstration instance: a k-cycle through vertex 0 with
/// a path tail, so the cycle through 0 is unique. The paired no-instance
/// drops one cycle edge, leaving no cycle at all.
pub fn canonical_instances(k: usize) -> (GraphInstance, GraphInstance) {
    let n = 2 * k;
    let mut edges: Vec<(usize, usize)> = (0..k).map(|i| (i, (i + 1) % k)).collect();
    for w in k - 1..n - 1 {
        edges.push((w, w + 1));
    }
    let yes = GraphInstance::undirected(n, &edges).expect("cycle instance is well-formed");
    let dropped: Vec<(usize, usize)> = edges
        .iter()
        .copied()
        .filter(|&e| e != (k - 2, k - 1))
        .collect();
    let no = GraphInstance::undirected(n, &dropped).expect("path instance is well-formed");
    (yes, no)
}

/// Spec over the canonical yes/no pair.
pub fn k_cycle_spec(k: usize) -> FunctionSpec {
    let (yes, no) = canonical_instances(k);
    FunctionSpec::with_label_names(
        yes.matrix_len(),
        2,
        2,
        vec![no.matrix_string(), yes.matrix_string()],
        vec![0, 1],
        vec!["no_cycle_found".into(), "k_cycle_found".into()],
    )
    .expect("canonical pair forms a spec")
}

/// A uniform family of `members` independent detectors, each with its own
/// seeded draw sequence.
pub fn k_cycle_family(
    n: usize,
    v: usize,
    k: usize,
    rounds: usize,
    members: usize,
    seed: u64,
) -> TreeFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let list: Vec<(String, Arc<dyn TreeProgram>)> = (0..members)
        .map(|i| {
            let draws = (0..rounds)
                .map(|_| ColorDraw::sample(n, k, &mut rng))
                .collect();
            (
                format!("detector-{i}"),
                Arc::new(KCycleMember { n, v, draws }) as Arc<dyn TreeProgram>,
            )
        })
        .collect();
    TreeFamily::uniform(list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tree_metrics;
    use crate::model::evaluate_path;

    use super::super::graph::all_digraphs;

    #[test]
    fn closing_the_path_makes_the_smallest_cycle_track_the_distance() {
        for g in all_digraphs(3) {
            let h = cycle_reduction(&g, 0, 2);
            let expect = classical::distances_from(&g, 0)[2].map(|d| d + 2);
            assert_eq!(classical::smallest_cycle_through(&h, 3), expect);
        }
    }

    #[test]
    fn reversal_is_an_involution() {
        for g in all_digraphs(3) {
            let back = reverse_graph(&reverse_graph(&g));
            assert_eq!(
                g.edges().collect::<Vec<_>>(),
                back.edges().collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn thinned_cycles_have_length_divisible_by_k() {
        let (yes, _) = canonical_instances(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let draw = ColorDraw::sample(yes.n(), 3, &mut rng);
            let h = thinned_digraph(&yes, &draw);
            for v in 0..yes.n() {
                if let Some(len) = classical::smallest_cycle_through(&h, v) {
                    assert_eq!(len % 3, 0, "cycle of length {len} survived");
                }
            }
        }
    }

    #[test]
    fn triangle_survival_is_exactly_one_in_thirty_six() {
        // Survival of the unique triangle {0,1,2} depends only on those
        // three colors and three coins; sweep that sub-space exactly.
        let (yes, _) = canonical_instances(3);
        let n = yes.n();
        let mut survivors = 0usize;
        let mut total = 0usize;
        for c0 in 0..3 {
            for c1 in 0..3 {
                for c2 in 0..3 {
                    for coins in 0..8u32 {
                        let mut draw = ColorDraw {
                            k: 3,
                            colors: vec![0; n],
                            coins: vec![false; n * (n - 1) / 2],
                        };
                        draw.colors[0] = c0;
                        draw.colors[1] = c1;
                        draw.colors[2] = c2;
                        draw.coins[pair_index(n, 0, 1)] = coins & 1 != 0;
                        draw.coins[pair_index(n, 0, 2)] = coins & 2 != 0;
                        draw.coins[pair_index(n, 1, 2)] = coins & 4 != 0;
                        total += 1;
                        let h = thinned_digraph(&yes, &draw);
                        if classical::smallest_cycle_through(&h, 0).is_some() {
                            survivors += 1;
                            // The query tree must detect exactly when the
                            // oracle does.
                            let member = KCycleMember {
                                n,
                                v: 0,
                                draws: vec![draw.clone()],
                            };
                            let t = evaluate_path(&member, &yes.matrix_string()).unwrap();
                            assert_eq!(t.label, 1);
                        } else {
                            let member = KCycleMember {
                                n,
                                v: 0,
                                draws: vec![draw.clone()],
                            };
                            let t = evaluate_path(&member, &yes.matrix_string()).unwrap();
                            assert_eq!(t.label, 0);
                        }
                    }
                }
            }
        }
        assert_eq!(total, 216);
        assert_eq!(survivors, 6, "expected exactly 6/216 = 1/36");
    }

    #[test]
    fn detector_members_stay_within_the_pair_budget() {
        let f = k_cycle_spec(3);
        let family = k_cycle_family(6, 0, 3, default_rounds(3), 4, 11);
        for member in family.members() {
            let m = tree_metrics(member.tree.as_ref(), &f).unwrap();
            assert!(m.t <= 15, "T={} exceeds the pair count", m.t);
        }
    }

    #[test]
    fn no_instance_never_triggers_a_detection() {
        let (_, no) = canonical_instances(3);
        let family = k_cycle_family(6, 0, 3, 40, 3, 23);
        for member in family.members() {
            let t = evaluate_path(member.tree.as_ref(), &no.matrix_string()).unwrap();
            assert_eq!(t.label, 0);
        }
    }
}
