//! Brute-force and reference graph algorithms.
//!
//! Everything here works on a fully known [`GraphInstance`] — no query
//! machinery — and serves as the ground truth the query trees are checked
//! against. Whenever an output is algorithm-dependent (forests, orderings,
//! shortest paths, matchings), the reference fixes the same tie-breaks the
//! trees use: roots and neighbor scans ascend by vertex id. Boolean and
//! partition outputs are algorithm-independent and are computed here by
//! deliberately different means (exhaustive colorings, reachability
//! closures, edge-subset enumeration) so that agreement is meaningful.

use std::collections::VecDeque;

use super::graph::GraphInstance;

/// True iff the graph admits a proper 2-coloring, decided by trying all
/// `2^n` colorings (`n <= 20`).
pub fn is_bipartite(g: &GraphInstance) -> bool {
    let n = g.n();
    assert!(n <= 20, "exhaustive 2-coloring capped at n=20");
    let edges: Vec<(usize, usize)> = g.edges().collect();
    (0u64..1 << n).any(|mask| {
        edges
            .iter()
            .all(|&(u, w)| (mask >> u & 1) != (mask >> w & 1))
    })
}

/// Connected components as a canonical partition: each component sorted,
/// components ordered by smallest member.
pub fn components(g: &GraphInstance) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for root in 0..n {
        if comp[root] != usize::MAX {
            continue;
        }
        let mut stack = vec![root];
        comp[root] = count;
        while let Some(u) = stack.pop() {
            for w in 0..n {
                if comp[w] == usize::MAX && (g.has_edge(u, w) || g.has_edge(w, u)) {
                    comp[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    let mut parts = vec![Vec::new(); count];
    for (v, &c) in comp.iter().enumerate() {
        parts[c].push(v);
    }
    parts
}

/// A forest has exactly `n - #components` edges.
pub fn is_forest(g: &GraphInstance) -> bool {
    g.edge_count() == g.n() - components(g).len()
}

/// Reachability closure of a digraph: `reach[u]` has bit `w` set iff there
/// is a directed path from `u` to `w` (including `u` itself).
fn reachability(g: &GraphInstance) -> Vec<u64> {
    let n = g.n();
    assert!(n <= 60);
    let mut reach: Vec<u64> = (0..n)
        .map(|u| {
            let mut r = 1u64 << u;
            for w in g.neighbors(u) {
                r |= 1 << w;
            }
            r
        })
        .collect();
    loop {
        let mut changed = false;
        for u in 0..n {
            let mut r = reach[u];
            for w in 0..n {
                if reach[u] >> w & 1 == 1 {
                    r |= reach[w];
                }
            }
            if r != reach[u] {
                reach[u] = r;
                changed = true;
            }
        }
        if !changed {
            return reach;
        }
    }
}

/// Strongly connected components via mutual reachability, canonicalized
/// like [`components`].
pub fn strongly_connected(g: &GraphInstance) -> Vec<Vec<usize>> {
    assert!(g.is_directed());
    let n = g.n();
    let reach = reachability(g);
    let mut comp = vec![usize::MAX; n];
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for u in 0..n {
        if comp[u] != usize::MAX {
            continue;
        }
        let c = parts.len();
        parts.push(Vec::new());
        for w in u..n {
            if comp[w] == usize::MAX && reach[u] >> w & 1 == 1 && reach[w] >> u & 1 == 1 {
                comp[w] = c;
                parts[c].push(w);
            }
        }
    }
    parts
}

/// True iff the digraph has no directed cycle.
pub fn is_acyclic(g: &GraphInstance) -> bool {
    let reach = reachability(g);
    (0..g.n()).all(|u| !g.neighbors(u).iter().any(|&w| reach[w] >> u & 1 == 1))
}

/// BFS spanning forest with ascending roots and scans: `parents[w]` is the
/// discoverer of `w` (`None` for roots), `levels[w]` its BFS depth.
pub fn bfs_forest(g: &GraphInstance) -> (Vec<Option<usize>>, Vec<usize>) {
    let n = g.n();
    let mut parents = vec![None; n];
    let mut levels = vec![0usize; n];
    let mut discovered = vec![false; n];
    for root in 0..n {
        if discovered[root] {
            continue;
        }
        discovered[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for w in 0..n {
                if !discovered[w] && g.has_edge(u, w) {
                    discovered[w] = true;
                    parents[w] = Some(u);
                    levels[w] = levels[u] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    (parents, levels)
}

/// DFS spanning forest with ascending roots and scans.
pub fn dfs_forest(g: &GraphInstance) -> Vec<Option<usize>> {
    let n = g.n();
    let mut parents = vec![None; n];
    let mut discovered = vec![false; n];
    fn visit(g: &GraphInstance, u: usize, discovered: &mut [bool], parents: &mut [Option<usize>]) {
        discovered[u] = true;
        for w in 0..g.n() {
            if !discovered[w] && g.has_edge(u, w) {
                parents[w] = Some(u);
                visit(g, w, discovered, parents);
            }
        }
    }
    for root in 0..n {
        if !discovered[root] {
            visit(g, root, &mut discovered, &mut parents);
        }
    }
    parents
}

/// Shortest `s -> t` path by BFS with ascending scans, as a vertex sequence
/// starting at `s` and ending at `t`.
pub fn shortest_path(g: &GraphInstance, s: usize, t: usize) -> Option<Vec<usize>> {
    let n = g.n();
    if s == t {
        return Some(vec![s]);
    }
    let mut parents = vec![None; n];
    let mut discovered = vec![false; n];
    discovered[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for w in 0..n {
            if !discovered[w] && g.has_edge(u, w) {
                discovered[w] = true;
                parents[w] = Some(u);
                if w == t {
                    let mut path = vec![t];
                    let mut at = t;
                    while let Some(p) = parents[at] {
                        path.push(p);
                        at = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(w);
            }
        }
    }
    None
}

/// Distances from `s` by plain edge relaxation (independent of any BFS).
pub fn distances_from(g: &GraphInstance, s: usize) -> Vec<Option<usize>> {
    let n = g.n();
    let mut dist: Vec<Option<usize>> = vec![None; n];
    dist[s] = Some(0);
    for _ in 0..n {
        for u in 0..n {
            if let Some(du) = dist[u] {
                for w in g.neighbors(u) {
                    if dist[w].map_or(true, |dw| dw > du + 1) {
                        dist[w] = Some(du + 1);
                    }
                }
            }
        }
    }
    dist
}

/// DFS finishing order with ascending roots and scans, reversed. On a DAG
/// this is a topological order.
pub fn topological_order(g: &GraphInstance) -> Vec<usize> {
    assert!(g.is_directed());
    let n = g.n();
    let mut discovered = vec![false; n];
    let mut finish = Vec::with_capacity(n);
    fn visit(g: &GraphInstance, u: usize, discovered: &mut [bool], finish: &mut Vec<usize>) {
        discovered[u] = true;
        for w in 0..g.n() {
            if !discovered[w] && g.has_edge(u, w) {
                visit(g, w, discovered, finish);
            }
        }
        finish.push(u);
    }
    for root in 0..n {
        if !discovered[root] {
            visit(g, root, &mut discovered, &mut finish);
        }
    }
    finish.reverse();
    finish
}

/// True iff `order` lists every vertex once and no arc points backwards.
pub fn is_topological_order(g: &GraphInstance, order: &[usize]) -> bool {
    let n = g.n();
    if order.len() != n {
        return false;
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return false;
        }
        pos[v] = i;
    }
    g.edges().all(|(u, w)| pos[u] < pos[w])
}

/// Maximum matching size by enumerating all edge subsets (`|E| <= 20`).
pub fn max_matching_size(g: &GraphInstance) -> usize {
    let edges: Vec<(usize, usize)> = g.edges().collect();
    assert!(edges.len() <= 20, "matching enumeration capped at 20 edges");
    let mut best = 0;
    for mask in 0u64..1 << edges.len() {
        let mut used = 0u64;
        let mut size = 0;
        let mut ok = true;
        for (i, &(u, w)) in edges.iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            let ends = (1u64 << u) | (1 << w);
            if used & ends != 0 {
                ok = false;
                break;
            }
            used |= ends;
            size += 1;
        }
        if ok {
            best = best.max(size);
        }
    }
    best
}

/// True iff `m` is a set of endpoint-disjoint edges of `g`.
pub fn is_matching(g: &GraphInstance, m: &[(usize, usize)]) -> bool {
    let mut used = vec![false; g.n()];
    for &(u, w) in m {
        if !g.has_edge(u, w) || used[u] || used[w] {
            return false;
        }
        used[u] = true;
        used[w] = true;
    }
    true
}

/// Maximum bipartite matching by layered augmenting phases (left part
/// `0..a`, right part `a..a+b`), generic over the row source so the same
/// phase logic runs both classically and inside a query tree. `row(u)`
/// yields `u`'s neighbors in row order; it is consulted lazily — only for
/// left vertices the phases actually reach.
///
/// Returns matched pairs `(left, right)` sorted by left vertex.
pub fn hopcroft_karp_with<E>(
    a: usize,
    b: usize,
    row: &mut dyn FnMut(usize) -> Result<Vec<usize>, E>,
) -> Result<Vec<(usize, usize)>, E> {
    const INF: usize = usize::MAX;
    let mut match_l: Vec<Option<usize>> = vec![None; a]; // left -> absolute right id
    let mut match_r: Vec<Option<usize>> = vec![None; b]; // right offset -> left id
    let mut dist = vec![INF; a];

    loop {
        // Layer the left vertices by alternating BFS from the free ones.
        let mut queue = VecDeque::new();
        for u in 0..a {
            if match_l[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut dist_free = INF;
        while let Some(u) = queue.pop_front() {
            if dist[u] >= dist_free {
                continue;
            }
            for w in row(u)? {
                match match_r[w - a] {
                    None => {
                        if dist_free == INF {
                            dist_free = dist[u] + 1;
                        }
                    }
                    Some(u2) => {
                        if dist[u2] == INF {
                            dist[u2] = dist[u] + 1;
                            queue.push_back(u2);
                        }
                    }
                }
            }
        }
        if dist_free == INF {
            break;
        }

        // Harvest a maximal set of vertex-disjoint shortest augmenting paths.
        fn augment<E>(
            u: usize,
            a: usize,
            dist_free: usize,
            row: &mut dyn FnMut(usize) -> Result<Vec<usize>, E>,
            match_l: &mut [Option<usize>],
            match_r: &mut [Option<usize>],
            dist: &mut [usize],
        ) -> Result<bool, E> {
            for w in row(u)? {
                let take = match match_r[w - a] {
                    None => dist[u] + 1 == dist_free,
                    Some(u2) => {
                        dist[u2] == dist[u] + 1
                            && augment(u2, a, dist_free, row, match_l, match_r, dist)?
                    }
                };
                if take {
                    match_l[u] = Some(w);
                    match_r[w - a] = Some(u);
                    return Ok(true);
                }
            }
            dist[u] = usize::MAX;
            Ok(false)
        }
        for u in 0..a {
            if match_l[u].is_none() {
                augment(u, a, dist_free, row, &mut match_l, &mut match_r, &mut dist)?;
            }
        }
    }

    Ok(match_l
        .iter()
        .enumerate()
        .filter_map(|(u, m)| m.map(|w| (u, w)))
        .collect())
}

/// [`hopcroft_karp_with`] fed directly from an instance's sorted rows.
pub fn hopcroft_karp(g: &GraphInstance, a: usize, b: usize) -> Vec<(usize, usize)> {
    assert_eq!(g.n(), a + b);
    let rows: Vec<Vec<usize>> = (0..a).map(|u| g.neighbors(u)).collect();
    let result: Result<_, std::convert::Infallible> =
        hopcroft_karp_with(a, b, &mut |u| Ok(rows[u].clone()));
    result.unwrap()
}

/// Length of the smallest directed cycle through `v`, by enumerating all
/// simple directed paths out of `v` and closing them with a back arc.
pub fn smallest_cycle_through(g: &GraphInstance, v: usize) -> Option<usize> {
    assert!(g.is_directed());
    let n = g.n();
    let mut best: Option<usize> = None;
    let mut on_path = vec![false; n];
    on_path[v] = true;
    fn explore(
        g: &GraphInstance,
        v: usize,
        u: usize,
        len: usize,
        on_path: &mut [bool],
        best: &mut Option<usize>,
    ) {
        if best.is_some_and(|b| len + 1 >= b) {
            return;
        }
        for w in g.neighbors(u) {
            if w == v {
                if len >= 1 && best.map_or(true, |b| len + 1 < b) {
                    *best = Some(len + 1);
                }
            } else if !on_path[w] {
                on_path[w] = true;
                explore(g, v, w, len + 1, on_path, best);
                on_path[w] = false;
            }
        }
    }
    explore(g, v, v, 0, &mut on_path, &mut best);
    best
}

/// True iff the undirected graph has a simple cycle of length exactly `k`
/// through `v`, by enumerating simple paths.
pub fn has_k_cycle_through(g: &GraphInstance, v: usize, k: usize) -> bool {
    assert!(!g.is_directed() && k >= 3);
    let n = g.n();
    let mut on_path = vec![false; n];
    on_path[v] = true;
    fn explore(
        g: &GraphInstance,
        v: usize,
        u: usize,
        len: usize,
        k: usize,
        on_path: &mut [bool],
    ) -> bool {
        if len == k - 1 {
            return g.has_edge(u, v);
        }
        for w in g.neighbors(u) {
            if !on_path[w] && w != v {
                on_path[w] = true;
                if explore(g, v, w, len + 1, k, on_path) {
                    return true;
                }
                on_path[w] = false;
            }
        }
        false
    }
    explore(g, v, v, 0, k, &mut on_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> GraphInstance {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        GraphInstance::undirected(n, &edges).unwrap()
    }

    #[test]
    fn even_cycles_are_bipartite_odd_are_not() {
        assert!(is_bipartite(&cycle(4)));
        assert!(!is_bipartite(&cycle(5)));
        assert!(is_bipartite(&cycle(6)));
    }

    #[test]
    fn component_partitions_are_canonical() {
        let g = GraphInstance::undirected(5, &[(3, 1), (0, 4)]).unwrap();
        assert_eq!(components(&g), vec![vec![0, 4], vec![1, 3], vec![2]]);
    }

    #[test]
    fn forests_counted_by_edge_budget() {
        let path = GraphInstance::undirected(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(is_forest(&path));
        assert!(!is_forest(&cycle(4)));
        let empty = GraphInstance::undirected(3, &[]).unwrap();
        assert!(is_forest(&empty));
    }

    #[test]
    fn scc_of_a_directed_cycle_plus_tail() {
        let g = GraphInstance::directed(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap();
        assert_eq!(strongly_connected(&g), vec![vec![0, 1, 2], vec![3]]);
        assert!(!is_acyclic(&g));
        let dag = GraphInstance::directed(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        assert!(is_acyclic(&dag));
    }

    #[test]
    fn bfs_levels_equal_relaxation_distances() {
        for g in super::super::graph::all_undirected(4) {
            let (parents, levels) = bfs_forest(&g);
            // Distances within the root's component must agree with level.
            let comps = components(&g);
            for comp in comps {
                let root = comp[0];
                let dist = distances_from(&g, root);
                for &v in &comp {
                    assert_eq!(dist[v], Some(levels[v]), "{g:?} vertex {v}");
                }
            }
            // Parent edges exist and point one level up.
            for (w, p) in parents.iter().enumerate() {
                if let Some(u) = p {
                    assert!(g.has_edge(*u, w));
                    assert_eq!(levels[w], levels[*u] + 1);
                }
            }
        }
    }

    #[test]
    fn shortest_paths_match_distances() {
        for g in super::super::graph::all_digraphs(3) {
            let dist = distances_from(&g, 0);
            match shortest_path(&g, 0, 2) {
                Some(p) => {
                    assert_eq!(p.len(), dist[2].unwrap() + 1);
                    assert_eq!(p[0], 0);
                    assert_eq!(*p.last().unwrap(), 2);
                    for pair in p.windows(2) {
                        assert!(g.has_edge(pair[0], pair[1]));
                    }
                }
                None => assert_eq!(dist[2], None),
            }
        }
    }

    #[test]
    fn topological_orders_are_valid_on_dags() {
        for g in super::super::graph::all_dags(4) {
            let order = topological_order(&g);
            assert!(is_topological_order(&g, &order), "{g:?}");
        }
    }

    #[test]
    fn hopcroft_karp_equals_brute_force_on_k22() {
        let g = GraphInstance::undirected(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let m = hopcroft_karp(&g, 2, 2);
        assert_eq!(m.len(), 2);
        assert!(is_matching(&g, &m));
        assert_eq!(max_matching_size(&g), 2);
    }

    #[test]
    fn smallest_cycle_enumerator() {
        let g = GraphInstance::directed(4, &[(0, 1), (1, 2), (2, 0), (1, 0)]).unwrap();
        assert_eq!(smallest_cycle_through(&g, 0), Some(2));
        assert_eq!(smallest_cycle_through(&g, 2), Some(3));
        let dag = GraphInstance::directed(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(smallest_cycle_through(&dag, 0), None);
    }

    #[test]
    fn k_cycle_detection() {
        let g = GraphInstance::undirected(6, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5)])
            .unwrap();
        assert!(has_k_cycle_through(&g, 0, 3));
        assert!(!has_k_cycle_through(&g, 3, 3));
        assert!(!has_k_cycle_through(&g, 0, 4));
    }
}
