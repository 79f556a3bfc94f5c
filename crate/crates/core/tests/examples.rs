//! Worked examples for each public operation, on the shared fixtures and on
//! small hand-built instances.

use std::collections::BTreeSet;

use fdpattern::errorgen::{generate_synthetic, inject_errors, replay, InjectionUnit, Profile};
use fdpattern::instance_graph::NodeId;
use fdpattern::patterns::{
    composable, compose, composed_quality, independent, interaction_case, is_maximal,
    repair_covers, Interaction,
};
use fdpattern::repair::Branch;
use fdpattern::{
    brute_force_optimal, build_fd_graph, build_instance_graph, classify_attributes,
    compute_pattern_quality, compute_sccs, delta, detect_violations, evaluate, explain, fixtures,
    instance_quality, order_fds_anchored, repair, satisfies, Error, FdPattern, GraphOptions,
    Instance, InstanceGraph, OracleLimits, RepairConfig, Sigma, Strategy,
};

fn graph(inst: &Instance, sigma: &Sigma) -> InstanceGraph {
    let cls = classify_attributes(sigma, inst, &[]).unwrap();
    let order = order_fds_anchored(sigma, &compute_sccs(&build_fd_graph(sigma)), &cls);
    let mut g = build_instance_graph(inst, sigma, GraphOptions::default()).unwrap();
    compute_pattern_quality(&mut g, &order);
    g
}

fn node(g: &InstanceGraph, attr: &str, value: &str) -> NodeId {
    (0..g.nodes().len())
        .find(|&n| g.node_attrs(n) == [attr] && g.node_values(n) == [value])
        .unwrap_or_else(|| panic!("no node {attr}={value}"))
}

fn pattern(fd: usize, pairs: &[(&str, &str)]) -> FdPattern {
    FdPattern::simple(fd, pairs.iter().copied())
}

fn traced(inst: &Instance, sigma: &Sigma, s: Strategy) -> fdpattern::RepairResult {
    let cfg = RepairConfig {
        record_trace: true,
        ..Default::default()
    };
    repair(inst, sigma, s, &cfg).unwrap()
}

#[test]
fn fd_spec_parsing() {
    let s = Sigma::parse(fixtures::TOUR_FDS).unwrap();
    assert_eq!(s, fixtures::tour_sigma());
    let composite = Sigma::parse("A,B -> C").unwrap();
    assert_eq!(composite.len(), 1);
    assert_eq!(composite.fd(0).lhs(), ["A", "B"]);
    let split = Sigma::parse("A -> B,C").unwrap();
    assert_eq!((split.fd(0).rhs(), split.fd(1).rhs()), ("B", "C"));
    assert!(matches!(
        Sigma::parse("A -> A"),
        Err(Error::RhsInLhs { .. })
    ));
    assert!(matches!(
        Sigma::parse("A -> B\nA -> B"),
        Err(Error::DuplicateFd { line: 2, .. })
    ));
}

#[test]
fn loading_instances() {
    let tour = Instance::from_csv_str(fixtures::TOUR_CSV).unwrap();
    assert_eq!((tour.len(), tour.arity()), (5, 3));
    assert_eq!(tour, fixtures::tour());
    assert!(Instance::from_csv_str("A,B\n").unwrap().is_empty());
    let rank = fixtures::tour_rank();
    assert_eq!((rank.len(), rank.arity()), (6, 4));
    let round_trip = Instance::from_csv_str(&rank.to_csv_string()).unwrap();
    assert_eq!(round_trip, rank);
}

#[test]
fn violations_on_tour_rank() {
    let groups = detect_violations(&fixtures::tour_rank(), &fixtures::tour_rank_sigma()).unwrap();
    let has = |fd: usize, lhs: &str| groups.iter().any(|g| g.fd == fd && g.lhs_value == [lhs]);
    assert!(has(0, "Marcel Kittel"));
    assert!(has(2, "166"));
    let rank166 = groups
        .iter()
        .find(|g| g.fd == 2 && g.lhs_value == ["166"])
        .unwrap();
    assert_eq!(rank166.tuple_indices, [0, 1, 2]);
    assert!(satisfies(
        &Instance::new(&["cyclist", "country", "capital"]).unwrap(),
        &fixtures::tour_sigma()
    )
    .unwrap());
}

#[test]
fn deltas_against_the_tour_repairs() {
    let tour = fixtures::tour();
    let r2 = delta(&tour, &fixtures::tour_r2()).unwrap();
    assert_eq!(r2.cost, 1);
    assert_eq!(
        (r2.cells[0].tuple, r2.cells[0].attribute.as_str()),
        (0, "country")
    );
    let r1 = delta(&tour, &fixtures::tour_r1()).unwrap();
    assert_eq!(
        (r1.cells[0].tuple, r1.cells[0].attribute.as_str()),
        (1, "country")
    );
    assert_eq!(delta(&tour, &tour).unwrap().cost, 0);
}

#[test]
fn tour_graph_counts() {
    let g = graph(&fixtures::tour(), &fixtures::tour_sigma());
    let record = |fd: usize, lhs: &str, rhs: &str| {
        (0..g.edges().len())
            .map(|e| g.edge_record(e))
            .find(|r| r.fd == fd && r.lhs == [lhs] && r.rhs == rhs)
            .unwrap()
    };
    let berlin = record(1, "Germany", "Berlin");
    assert_eq!((berlin.frequency, berlin.sup, berlin.conf), (4, 0.8, 1.0));
    let russia = record(0, "Marcel Kittel", "Russia");
    assert_eq!((russia.frequency, russia.sup, russia.conf), (1, 0.2, 0.5));
}

#[test]
fn interaction_cases_of_the_tour_rules() {
    let s = fixtures::tour_rank_sigma();
    assert_eq!(interaction_case(s.fd(0), s.fd(1)), Interaction::Case3);
    assert_eq!(interaction_case(s.fd(2), s.fd(3)), Interaction::Case4);
    let shared_rhs = Sigma::parse("A -> C\nB -> C").unwrap();
    assert_eq!(
        interaction_case(shared_rhs.fd(0), shared_rhs.fd(1)),
        Interaction::Case2
    );
}

#[test]
fn disjoint_patterns_are_independent_but_not_composable() {
    let sigma = Sigma::parse("A -> B\nC -> D").unwrap();
    let p = pattern(0, &[("A", "a"), ("B", "b")]);
    let q = pattern(1, &[("C", "c"), ("D", "d")]);
    assert!(!composable(&p, &q));
    assert!(independent(&p, &q, &sigma));
    assert!(compose(&p, &q).is_empty());
}

#[test]
fn maximal_patterns_on_tour() {
    let g = graph(&fixtures::tour(), &fixtures::tour_sigma());
    let p1 = pattern(0, &[("cyclist", "Marcel Kittel"), ("country", "Russia")]);
    let p3 = pattern(1, &[("country", "Russia"), ("capital", "Berlin")]);
    assert!(!is_maximal(&p1, &g));
    assert!(is_maximal(&compose(&p1, &p3), &g));

    let single = Sigma::parse("cyclist -> country").unwrap();
    let g1 = graph(&fixtures::tour(), &single);
    assert!(is_maximal(&p1, &g1));
}

#[test]
fn composed_quality_is_the_mean_edge_quality() {
    let g = graph(&fixtures::chain(), &fixtures::abc_sigma());
    let ab = pattern(0, &[("A", "a1"), ("B", "b1")]);
    let bc = pattern(1, &[("B", "b1"), ("C", "c1")]);
    assert!((composed_quality(&bc, &g).unwrap() - 1.0).abs() < 1e-12);
    assert!((composed_quality(&ab, &g).unwrap() - 0.875).abs() < 1e-12);
    assert!((composed_quality(&compose(&ab, &bc), &g).unwrap() - 0.9375).abs() < 1e-12);
    let missing = pattern(0, &[("A", "a9"), ("B", "b1")]);
    assert!(matches!(
        composed_quality(&missing, &g),
        Err(Error::MissingEdge)
    ));
}

#[test]
fn repair_covers_of_the_abc_instance() {
    let (inst, sigma) = (fixtures::abc(), fixtures::abc_sigma());
    let g = graph(&inst, &sigma);
    let cls = classify_attributes(&sigma, &inst, &[]).unwrap();
    assert!(repair_covers(node(&g, "A", "a1"), &g, &cls).is_empty());
    assert!(repair_covers(node(&g, "A", "a2"), &g, &cls).is_empty());

    let c2 = repair_covers(node(&g, "C", "c2"), &g, &cls);
    let sources: BTreeSet<Vec<&str>> = c2
        .iter()
        .map(|c| g.node_values(g.edge(c.edges[0]).from))
        .collect();
    assert_eq!(sources, BTreeSet::from([vec!["b1"], vec!["b2"]]));

    let b1 = repair_covers(node(&g, "B", "b1"), &g, &cls);
    assert_eq!(b1.len(), 6);
    let pairs: BTreeSet<(Vec<&str>, &str)> = b1
        .iter()
        .map(|c| {
            (
                g.node_values(g.edge(c.edges[0]).from),
                g.rhs_value(c.edges[1]),
            )
        })
        .collect();
    assert_eq!(pairs.len(), 6);
}

#[test]
fn greedy_breaks_ties_by_value() {
    let sigma = Sigma::parse("A -> B").unwrap();
    let tied = Instance::from_rows(&["A", "B"], vec![vec!["k", "Y"], vec!["k", "X"]]).unwrap();
    let r = repair(&tied, &sigma, Strategy::greedy(), &RepairConfig::default()).unwrap();
    assert_eq!(r.repaired.get(0, "B"), Some("X"));
    assert_eq!(r.repaired.get(1, "B"), Some("X"));

    let single = Instance::from_rows(&["A", "B"], vec![vec!["k", "Y"]]).unwrap();
    let r = repair(
        &single,
        &sigma,
        Strategy::greedy(),
        &RepairConfig::default(),
    )
    .unwrap();
    assert_eq!(r.repaired, single);
}

#[test]
fn hybrid_on_tour_matches_greedy() {
    let (tour, sigma) = (fixtures::tour(), fixtures::tour_sigma());
    let cfg = RepairConfig::default();
    let greedy = repair(&tour, &sigma, Strategy::greedy(), &cfg).unwrap();
    let hybrid = repair(&tour, &sigma, Strategy::hybrid(0.5), &cfg).unwrap();
    assert_eq!(greedy.repaired, hybrid.repaired);
}

#[test]
fn consistent_instance_is_left_alone() {
    let sigma = fixtures::tour_sigma();
    let clean = fixtures::tour_r2();
    for s in [Strategy::greedy(), Strategy::rc(), Strategy::hybrid(0.5)] {
        let r = traced(&clean, &sigma, s);
        assert_eq!(r.repaired, clean);
        assert_eq!(r.stats.cost, 0);
        let t = explain(&r, 4).unwrap();
        assert!(t.changes.is_empty());
        assert!(t.conflicts.is_empty());
    }
}

#[test]
fn tour_t1_is_explained_by_its_path() {
    let r = traced(
        &fixtures::tour(),
        &fixtures::tour_sigma(),
        Strategy::greedy(),
    );
    let t = explain(&r, 0).unwrap();
    let g = r.graph();
    let path: Vec<(Vec<&str>, &str)> = t
        .steps
        .iter()
        .map(|s| {
            let e = s.edge.unwrap();
            (g.node_values(g.edge(e).from), g.rhs_value(e))
        })
        .collect();
    assert_eq!(
        path,
        [
            (vec!["Marcel Kittel"], "Germany"),
            (vec!["Germany"], "Berlin")
        ]
    );
    assert_eq!(t.changes[0].old, "Russia");
    assert_eq!(t.changes[0].new, "Germany");
}

#[test]
fn shared_rhs_conflict_is_traced() {
    let sigma = Sigma::parse("A -> C\nB -> C").unwrap();
    let inst = Instance::from_rows(
        &["A", "B", "C"],
        vec![
            vec!["a1", "b1", "c1"],
            vec!["a2", "b2", "c2"],
            vec!["a1", "b2", "c1"],
        ],
    )
    .unwrap();
    let r = traced(&inst, &sigma, Strategy::greedy());
    assert_eq!(r.conflicts.len(), 1);
    assert_eq!(r.conflicts[0].tuple, 2);
    let t = explain(&r, 2).unwrap();
    assert_eq!(t.conflicts, r.conflicts);
    assert!(t.steps.iter().any(|s| s.branch == Branch::Conflict));
}

#[test]
fn oracle_examples() {
    let limits = OracleLimits::default();
    let tour = brute_force_optimal(&fixtures::tour(), &fixtures::tour_sigma(), &limits).unwrap();
    assert_eq!(tour.best_gain, 10);
    assert_eq!(tour.min_cost_repairs, [fixtures::tour_r2()]);
    // Moving every tuple to Russia reaches the same quality at cost 4.
    let countries: BTreeSet<Vec<&str>> = tour
        .best_repairs
        .iter()
        .map(|i| (0..5).map(|row| i.get(row, "country").unwrap()).collect())
        .collect();
    assert_eq!(
        countries,
        BTreeSet::from([vec!["Germany"; 5], vec!["Russia"; 5]])
    );
    assert_eq!(tour.gain_by_cost[&1], 10);

    let clean = fixtures::tour_r2();
    let r = brute_force_optimal(&clean, &fixtures::tour_sigma(), &limits).unwrap();
    assert_eq!(r.best_gain, 0);
    assert_eq!(r.min_cost_repairs, [clean]);

    let sigma = Sigma::parse("X -> Y").unwrap();
    let split = Instance::from_rows(&["X", "Y"], vec![vec!["x", "a"], vec!["x", "b"]]).unwrap();
    let r = brute_force_optimal(&split, &sigma, &limits).unwrap();
    assert_eq!(r.best_gain, 2);
    let values: Vec<Vec<&str>> = r
        .best_repairs
        .iter()
        .map(|i| (0..2).map(|row| i.get(row, "Y").unwrap()).collect())
        .collect();
    assert_eq!(values, [["a", "a"], ["b", "b"]]);
}

#[test]
fn oracle_refuses_wide_instances() {
    let schema: Vec<String> = (0..20).map(|i| format!("A{i}")).collect();
    let rows = (0..3).map(|r| {
        (0..20)
            .map(|c| format!("v{}", (r + c) % 3))
            .collect::<Vec<_>>()
    });
    let inst = Instance::from_rows(&schema, rows).unwrap();
    let fds: String = (0..19).map(|i| format!("A{i} -> A{}\n", i + 1)).collect();
    let sigma = Sigma::parse(&fds).unwrap();
    match brute_force_optimal(&inst, &sigma, &OracleLimits::default()) {
        Err(Error::SearchSpaceExceeded { estimate, limit }) => {
            assert_eq!(estimate, 3f64.powi(20));
            assert_eq!(limit, 10_000_000);
        }
        other => panic!("expected a refusal, got {other:?}"),
    }
}

#[test]
fn quality_of_a_single_tuple_counts_fds() {
    let s = fixtures::tour_sigma();
    let one = Instance::from_rows(
        &["cyclist", "country", "capital"],
        vec![vec!["a", "b", "c"]],
    )
    .unwrap();
    assert_eq!(instance_quality(&one, &s).unwrap(), 2);
}

#[test]
fn evaluation_with_three_fixes_and_one_miswrite() {
    let profile = Profile::tax_like(50);
    let sigma = profile.sigma().unwrap();
    let clean = generate_synthetic(50, &profile, 11).unwrap();
    let (dirty, log) = inject_errors(&clean, &sigma, 0.08, 4, InjectionUnit::Tuple).unwrap();
    assert_eq!(log.changes.len(), 4);

    let mut repaired = dirty.clone();
    for ch in &log.changes[..3] {
        let col = repaired.attr_index(&ch.attribute).unwrap();
        repaired.set(ch.tuple, col, &ch.old);
    }
    let touched: BTreeSet<usize> = log.changes.iter().map(|c| c.tuple).collect();
    let victim = (0..50).find(|t| !touched.contains(t)).unwrap();
    let fname = repaired.attr_index("fname").unwrap();
    repaired.set(victim, fname, "not a name");

    let report = evaluate(&dirty, &repaired, &clean, &sigma).unwrap();
    assert_eq!(
        (
            report.correct_changed,
            report.changed_cells,
            report.dirty_cells
        ),
        (3, 4, 4)
    );
    assert_eq!((report.precision, report.recall), (0.75, 0.75));
    assert!(!report.precision_vacuous && !report.recall_vacuous);
}

#[test]
fn generator_examples() {
    let profile = Profile::tax_like(100);
    let sigma = profile.sigma().unwrap();
    assert_eq!(sigma.len(), 4);
    let clean = generate_synthetic(100, &profile, 5).unwrap();
    assert!(satisfies(&clean, &sigma).unwrap());
    assert_eq!(clean, generate_synthetic(100, &profile, 5).unwrap());
    let empty = generate_synthetic(0, &profile, 5).unwrap();
    assert!(empty.is_empty());
    assert_eq!(empty.schema(), clean.schema());

    let (dirty, log) = inject_errors(&clean, &sigma, 0.1, 8, InjectionUnit::Tuple).unwrap();
    assert_eq!(log.changes.len(), 10);
    assert_eq!(delta(&clean, &dirty).unwrap().cost, 10);
    assert!(!detect_violations(&dirty, &sigma).unwrap().is_empty());
    assert_eq!(
        replay(&clean, &log).unwrap().to_csv_string(),
        dirty.to_csv_string()
    );
}
