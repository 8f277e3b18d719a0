//! Acceptance suite: ten end-to-end checks, one per release criterion,
//! each printing a single pass/fail line (run with `--nocapture` to see
//! them). Every check drives the public API the way the CLI does and
//! asserts exact or toleranced quantities frozen independently of the
//! implementation under test.

use std::time::{Duration, Instant};

use guesstree::catalog::{self, classical, graph, reduction, Params};
use guesstree::certificate::{
    default_weights, generation_weights, Certificate, FamilyMode, VerifyMode,
};
use guesstree::ensemble::EnsembleCertificate;
use guesstree::family::CrossFamily;
use guesstree::metrics::{ensemble_metrics, tree_metrics, ExpectationMode};
use guesstree::model::validate;
use guesstree::runner::{run, Command, RunConfig, Source};
use guesstree::span::SpanProgram;

use num_rational::Ratio;

fn criterion(n: usize, what: &str, ok: bool, detail: &str) {
    println!(
        "criterion {n:2}: {what} ... {}",
        if ok { "pass" } else { "fail" }
    );
    assert!(ok, "criterion {n} failed: {detail}");
}

fn entry(problem: &str, pairs: &[&str]) -> catalog::CatalogEntry {
    let params = Params::from_pairs(pairs).expect("params");
    catalog::build(problem, &params).expect("catalog entry")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn criterion_01_block_family_identities() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 1..=64usize {
        let fam = CrossFamily::new(n);
        let want_norm = if n == 0 {
            0.0
        } else {
            2.0 * (n as f64 - 1.0) / n as f64
        };
        for i in 0..n {
            let mu = fam.mu(i);
            let nu_i = fam.nu(i);
            worst = worst.max((dot(&mu, &mu) - want_norm).abs());
            worst = worst.max((dot(&nu_i, &nu_i) - want_norm).abs());
            for j in 0..n {
                let want = if i == j { 0.0 } else { 1.0 };
                worst = worst.max((dot(&mu, &fam.nu(j)) - want).abs());
                worst = worst.max((fam.cross_inner(i, j) - want).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = worst <= 1e-12 && elapsed < Duration::from_secs(1);
    criterion(
        1,
        "block-family inner products and norms match closed forms (N=1..64)",
        ok,
        &format!("worst deviation {worst:.3e}, elapsed {elapsed:?}"),
    );
}

/// The instances every feasibility and objective criterion quantifies over.
fn certified_instances() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("search", vec!["n=6"]),
        ("two_twos", vec!["n=5"]),
        ("counting", vec!["n=5", "ell=3", "r=2"]),
        ("threshold", vec!["n=5", "k=2"]),
        ("matrix_bipartiteness", vec!["n=4"]),
        ("matrix_forest_detection", vec!["n=4"]),
        ("matrix_st_shortest_path", vec!["n=4"]),
        ("matrix_topological_sort", vec!["n=4"]),
        ("list_bfs_tree", vec!["n=3"]),
        ("list_bipartiteness", vec!["n=3"]),
    ]
}

#[test]
fn criterion_02_exact_feasibility_exhaustive() {
    let mut detail = String::new();
    let mut ok = true;
    for (problem, pairs) in certified_instances() {
        let start = Instant::now();
        let e = entry(problem, &pairs);
        let tree = e.tree();
        let m = tree_metrics(tree.as_ref(), &e.spec).expect("metrics");
        let (schedule, _) = default_weights(m.t, m.g);
        let cert =
            Certificate::for_function(tree.as_ref(), &e.spec, schedule, FamilyMode::PerVertex)
                .expect("certificate");
        let feas = cert.verify_feasibility(VerifyMode::Exhaustive);
        let elapsed = start.elapsed();
        let this_ok = feas.max_residual <= 1e-9 && elapsed < Duration::from_secs(60);
        if !this_ok {
            ok = false;
        }
        detail.push_str(&format!(
            "{}: residual {:.3e} over {} pairs in {:?}; ",
            e.name, feas.max_residual, feas.pairs_checked, elapsed
        ));
    }
    criterion(
        2,
        "constraint residuals are at most 1e-9 under exhaustive pair checks",
        ok,
        &detail,
    );
}

#[test]
fn criterion_03_objective_bounds_at_default_weights() {
    let mut detail = String::new();
    let mut ok = true;
    for (problem, pairs) in certified_instances() {
        let e = entry(problem, &pairs);
        let tree = e.tree();
        let m = tree_metrics(tree.as_ref(), &e.spec).expect("metrics");
        let (schedule, _) = default_weights(m.t, m.g);
        let cert =
            Certificate::for_function(tree.as_ref(), &e.spec, schedule, FamilyMode::PerVertex)
                .expect("certificate");
        let obj = cert.objective();
        let balanced = 12.0 * ((m.g as f64) * (m.t as f64)).sqrt();
        let mut this_ok = obj.value <= balanced + 1e-9;
        for item in cert.bound_check(&m) {
            if item.slack() < -1e-9 {
                this_ok = false;
                detail.push_str(&format!(
                    "{}: {} = {} exceeds {}; ",
                    e.name, item.name, item.value, item.bound
                ));
            }
        }
        if !this_ok {
            ok = false;
        }
        detail.push_str(&format!(
            "{}: objective {:.6} vs 12*sqrt(G*T) = {:.6}; ",
            e.name, obj.value, balanced
        ));
    }
    criterion(
        3,
        "objective stays below 12*sqrt(G*T) and both side bounds have nonnegative slack",
        ok,
        &detail,
    );
}

#[test]
fn criterion_04_closed_forms_match_dense_oracle() {
    let mut detail = String::new();
    let mut ok = true;
    for (problem, pairs) in [
        ("search", vec!["n=3"]),
        ("two_twos", vec!["n=4"]),
        ("list_bfs_tree", vec!["n=3"]),
    ] {
        let e = entry(problem, &pairs);
        let tree = e.tree();
        let m = tree_metrics(tree.as_ref(), &e.spec).expect("metrics");
        let (schedule, _) = default_weights(m.t, m.g);
        let cert =
            Certificate::for_function(tree.as_ref(), &e.spec, schedule, FamilyMode::PerVertex)
                .expect("certificate");
        let dense = cert.dense_check(&e.spec).expect("dense reconstruction");
        let dev = dense.max_pair_deviation.max(dense.max_norm_deviation);
        if dev > 1e-9 {
            ok = false;
        }
        detail.push_str(&format!(
            "{}: dense deviation {:.3e} over {} pairs (dimension {}); ",
            e.name, dev, dense.pairs_checked, dense.dimension
        ));
    }
    criterion(
        4,
        "closed-form pair sums and norms match the dense materialization",
        ok,
        &detail,
    );
}

#[test]
fn criterion_05_min_finding_ensemble_exact() {
    let start = Instant::now();
    let e = entry("min", &["n=4", "ell=4"]);
    assert_eq!(e.family.len(), 24, "all 4! scan orders");
    assert_eq!(e.spec.len(), 256, "full [4]^4 domain");

    let (t_max, g_max) = e
        .family
        .members()
        .iter()
        .map(|mem| {
            let m = tree_metrics(mem.tree.as_ref(), &e.spec).expect("metrics");
            (m.t, m.g)
        })
        .fold((0, 0), |acc, (t, g)| (acc.0.max(t), acc.1.max(g)));
    let (schedule, _) = default_weights(t_max, g_max);
    let ens = EnsembleCertificate::build(&e.family, &e.spec, schedule, FamilyMode::PerVertex)
        .expect("family certificate");
    let sg = ens.verify_state_generation(VerifyMode::Exhaustive);
    let succ = ens.success_probability();

    let em = ensemble_metrics(&e.family, &e.spec, ExpectationMode::Exact).expect("expectations");
    let exact_g = em.exact.as_ref().expect("exact rationals").g;
    let elapsed = start.elapsed();

    let ok = sg.max_residual <= 1e-9
        && exact_g == Ratio::new(25, 12)
        && succ.min >= 1.0 - 1e-12
        && succ.min >= 0.9
        && elapsed < Duration::from_secs(300);
    criterion(
        5,
        "min-finding over all 24 orders: residual <= 1e-9, E[G] = 25/12 exactly, success = 1",
        ok,
        &format!(
            "residual {:.3e} over {} pairs, E[G] = {}, min success {}, elapsed {:?}",
            sg.max_residual, sg.pairs_checked, exact_g, succ.min, elapsed
        ),
    );
}

#[test]
fn criterion_06_per_generation_schedule_bounds() {
    let e = entry("two_twos", &["n=9"]);
    let tree = e.tree();
    let m = tree_metrics(tree.as_ref(), &e.spec).expect("metrics");
    assert_eq!(m.t_g, vec![9, 8, 0], "depth profile of the two-pass scan");

    let (schedule, _) = generation_weights(&m.t_g);
    let cert = Certificate::for_function(tree.as_ref(), &e.spec, schedule, FamilyMode::PerVertex)
        .expect("certificate");
    let items = cert.bound_check(&m);
    let per_input = 8.0 + 16.0 * 2.0f64.sqrt();
    let weight_free = 4.0 + 16.0 * 2.0f64.sqrt();

    let mut ok = true;
    let mut detail = String::new();
    for item in &items {
        let want = if item.name == "objective" {
            weight_free
        } else {
            per_input
        };
        if (item.bound - want).abs() > 1e-9 || item.slack() < -1e-9 {
            ok = false;
        }
        detail.push_str(&format!(
            "{}: {:.6} <= {:.6}; ",
            item.name, item.value, item.bound
        ));
    }
    criterion(
        6,
        "generation schedule meets 4(T_0/W_0 + sum(T_g/W_g + W_g)) and 4 + 8*sum sqrt(T_g)",
        ok,
        &detail,
    );
}

#[test]
fn criterion_07_span_program_axioms_and_witness_sizes() {
    let mut ok = true;
    let mut detail = String::new();
    let mut cases: Vec<(&str, Vec<String>)> = Vec::new();
    for n in 3..=6 {
        cases.push(("search", vec![format!("n={n}")]));
    }
    for n in 4..=5 {
        cases.push(("two_twos", vec![format!("n={n}")]));
    }
    for (problem, pairs) in cases {
        let pair_refs: Vec<&str> = pairs.iter().map(|s| s.as_str()).collect();
        let e = entry(problem, &pair_refs);
        let tree = e.tree();
        let m = tree_metrics(tree.as_ref(), &e.spec).expect("metrics");
        let (schedule, _) = default_weights(m.t, m.g);
        let prog = SpanProgram::build(tree.as_ref(), &e.spec, &schedule).expect("span program");
        let ax = prog.verify(&e.spec);
        let ws = prog.witness_sizes();
        let bound = 2.0 * ((m.g as f64) * (m.t as f64)).sqrt();
        let this_ok = ax.ok() && ws.positive_max <= bound + 1e-9 && ws.negative_max <= bound + 1e-9;
        if !this_ok {
            ok = false;
        }
        detail.push_str(&format!(
            "{}: {} checks, wsize+ {:.4}, wsize- {:.4}, bound {:.4}; ",
            e.name, ax.checks, ws.positive_max, ws.negative_max, bound
        ));
    }
    criterion(
        7,
        "span axioms hold exactly and witness sizes stay below 2*sqrt(G*T)",
        ok,
        &detail,
    );
}

#[test]
fn criterion_08_tree_outputs_match_classical_references() {
    let mut ok = true;
    let mut detail = String::new();

    // Matching: the phase algorithm must reproduce brute-force maximum
    // matchings on every bipartite graph with parts up to 3+3, and the
    // oracle tree must land on exactly those labels.
    let mut graphs_checked = 0usize;
    for a in 1..=3usize {
        for b in 1..=3usize {
            for g in graph::all_bipartite(a, b) {
                let m = classical::hopcroft_karp(&g, a, b);
                if !(classical::is_matching(&g, &m) && m.len() == classical::max_matching_size(&g))
                {
                    ok = false;
                    detail.push_str(&format!("matching mismatch on a={a}, b={b}; "));
                }
                graphs_checked += 1;
            }
            let e = entry(
                "list_hopcroft_karp",
                &[&format!("a={a}"), &format!("b={b}")],
            );
            let report = validate(e.tree().as_ref(), &e.spec);
            if !report.is_valid() {
                ok = false;
                detail.push_str(&format!("tree disagrees at a={a}, b={b}; "));
            }
        }
    }
    detail.push_str(&format!("{graphs_checked} bipartite graphs; "));

    // Graph classifiers: tree outputs equal the independent references over
    // each problem's full registered n=4 domain.
    for problem in [
        "matrix_scc",
        "matrix_components",
        "matrix_topological_sort",
        "matrix_bipartiteness",
    ] {
        let e = entry(problem, &["n=4"]);
        let report = validate(e.tree().as_ref(), &e.spec);
        if !report.is_valid() {
            ok = false;
            detail.push_str(&format!("{problem} disagrees with its reference; "));
        }
        detail.push_str(&format!("{}: {} inputs; ", e.name, report.inputs_checked));
    }
    criterion(
        8,
        "matching and graph-classifier trees equal brute-force references",
        ok,
        &detail,
    );
}

#[test]
fn criterion_09_scaling_sweeps() {
    let bip = run(&RunConfig::new(
        Command::Sweep,
        Source::Catalog {
            problem: "bipartiteness".into(),
            params: Params::from_pairs::<&str>(&[]).unwrap(),
        },
    ))
    .expect("bipartiteness sweep runs");
    let min = run(&RunConfig::new(
        Command::Sweep,
        Source::Catalog {
            problem: "min".into(),
            params: Params::from_pairs::<&str>(&[]).unwrap(),
        },
    ))
    .expect("min sweep runs");
    let ok = bip.pass && min.pass;
    criterion(
        9,
        "sweeps: objective <= 12*n^(3/2) on sampled graphs (n=4..8), E[G] = H_n (n=3..7)",
        ok,
        &format!(
            "bipartiteness failures {:?}, min failures {:?}",
            bip.failures, min.failures
        ),
    );
}

#[test]
fn criterion_10_color_coding_survival_rate() {
    let (yes, _no) = reduction::canonical_instances(3);
    let draws = 10_000usize;
    let p_hat = reduction::survival_estimate(&yes, 0, 3, draws, 11);
    let sigma = (p_hat * (1.0 - p_hat) / draws as f64).sqrt();
    let floor = 1.0 / 36.0 - 3.0 * sigma;
    let ok = p_hat >= floor;
    criterion(
        10,
        "Monte Carlo cycle survival over 10^4 draws meets the 1/36 - 3*sigma floor",
        ok,
        &format!("p_hat {p_hat:.5}, sigma {sigma:.5}, floor {floor:.5}"),
    );
}
