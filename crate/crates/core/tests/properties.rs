//! Invariants of parsing, the instance graph, pattern algebra, the repair
//! chase and the metrics, checked on random small instances.

use std::collections::BTreeMap;

use fdpattern::patterns::{composable, compose};
use fdpattern::{
    brute_force_optimal, build_fd_graph, build_instance_graph, classify_attributes,
    compute_pattern_quality, compute_sccs, delta, evaluate, gain, instance_quality,
    order_fds_anchored, repair, satisfies, FdPattern, GraphOptions, Instance, OracleLimits,
    RepairConfig, Sigma, Strategy as Chase,
};
use proptest::prelude::*;

const ATTRS: [&str; 4] = ["A", "B", "C", "D"];

const SIGMAS: [&str; 8] = [
    "A -> B\nB -> C\n",
    "A -> B\nA -> C\nB -> D\n",
    "A -> C\nB -> C\n",
    "A -> B\nB -> A\nA -> C\n",
    "A,B -> C\nC -> D\n",
    "A -> B\nB -> C\nC -> A\nD -> A\n",
    "A -> B\nC -> D\n",
    "A,B -> C\nA -> D\nD -> C\n",
];

fn to_instance(rows: &[Vec<u8>]) -> Instance {
    let rows = rows.iter().map(|r| {
        r.iter()
            .zip(ATTRS)
            .map(|(v, a)| format!("{}{v}", a.to_lowercase()))
            .collect::<Vec<_>>()
    });
    Instance::from_rows(&ATTRS, rows).unwrap()
}

fn rows(max_rows: usize, values: u8) -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(0..values, ATTRS.len()), 0..max_rows)
}

fn instance(max_rows: usize, values: u8) -> impl Strategy<Value = (Instance, Sigma)> {
    (0..SIGMAS.len(), rows(max_rows, values))
        .prop_map(|(s, r)| (to_instance(&r), Sigma::parse(SIGMAS[s]).unwrap()))
}

/// Two instances of the same shape over the same attributes.
fn instance_pair() -> impl Strategy<Value = (Instance, Instance)> {
    (1usize..10).prop_flat_map(|n| {
        let rows = prop::collection::vec(prop::collection::vec(0u8..3, ATTRS.len()), n);
        (rows.clone(), rows).prop_map(|(a, b)| (to_instance(&a), to_instance(&b)))
    })
}

/// FD lines over A..E as an LHS bit set and an RHS index.
fn fd_lines() -> impl Strategy<Value = Vec<(u8, usize)>> {
    prop::collection::vec((1u8..32, 0usize..5), 1..6)
}

fn fd_text(lines: &[(u8, usize)]) -> String {
    let names = ["A", "B", "C", "D", "E"];
    lines
        .iter()
        .map(|&(lhs, rhs)| {
            let lhs = match lhs & !(1 << rhs) {
                0 => 1 << ((rhs + 1) % 5),
                rest => rest,
            };
            let lhs: Vec<&str> = (0..5)
                .filter(|i| lhs & (1 << i) != 0)
                .map(|i| names[i])
                .collect();
            format!("{} -> {}\n", lhs.join(","), names[rhs])
        })
        .collect()
}

fn pattern_strategy() -> impl Strategy<Value = FdPattern> {
    (
        0usize..4,
        prop::collection::btree_map(0usize..4, 0u8..2, 1..4),
    )
        .prop_map(|(fd, values)| {
            FdPattern::simple(
                fd,
                values.into_iter().map(|(a, v)| (ATTRS[a], format!("v{v}"))),
            )
        })
}

fn run(inst: &Instance, sigma: &Sigma, s: Chase) -> fdpattern::RepairResult {
    repair(inst, sigma, s, &RepairConfig::default()).unwrap()
}

proptest! {
    #[test]
    fn fd_spec_round_trips(lines in fd_lines()) {
        if let Ok(sigma) = Sigma::parse(&fd_text(&lines)) {
            let again = Sigma::parse(&sigma.to_string()).unwrap();
            prop_assert_eq!(&again, &sigma);
            prop_assert_eq!(again.to_string(), sigma.to_string());
        }
    }

    #[test]
    fn delta_is_symmetric((a, b) in instance_pair()) {
        let ab = delta(&a, &b).unwrap();
        let ba = delta(&b, &a).unwrap();
        prop_assert_eq!(&ab, &ba);
        prop_assert_eq!(ab.cost == 0, a == b);
        prop_assert_eq!(delta(&a, &a).unwrap().cost, 0);
    }

    #[test]
    fn compose_is_commutative_and_idempotent(p in pattern_strategy(), q in pattern_strategy()) {
        prop_assert_eq!(compose(&p, &q), compose(&q, &p));
        prop_assert_eq!(compose(&p, &p), p.clone());
        prop_assert!(compose(&p, &FdPattern::empty()).is_empty());
        let pq = compose(&p, &q);
        prop_assert_eq!(pq.is_empty(), !composable(&p, &q));
        for (a, v) in p.values.iter().chain(&q.values) {
            if !pq.is_empty() {
                prop_assert_eq!(pq.get(a), Some(v.as_str()));
            }
        }
    }

    #[test]
    fn graph_invariants((inst, sigma) in instance(16, 3)) {
        let cls = classify_attributes(&sigma, &inst, &[]).unwrap();
        let order = order_fds_anchored(&sigma, &compute_sccs(&build_fd_graph(&sigma)), &cls);
        let mut g = build_instance_graph(&inst, &sigma, GraphOptions::default()).unwrap();
        compute_pattern_quality(&mut g, &order);

        let mut per_fd = vec![0usize; sigma.len()];
        let mut conf: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for e in g.edges() {
            per_fd[e.fd] += e.frequency;
            *conf.entry((e.fd, e.from)).or_default() += e.conf;
            prop_assert!(e.quality > 0.0 && e.quality <= 1.0, "quality {}", e.quality);
        }
        prop_assert!(per_fd.iter().all(|&f| f == inst.len()));
        prop_assert!(conf.values().all(|c| (c - 1.0).abs() < 1e-9));
        let stats = g.stats();
        prop_assert!(stats.nodes_visited <= g.nodes().len());
        prop_assert!(stats.nodes_visited + stats.edges_examined <= g.nodes().len() + g.edges().len());

        let mut again = build_instance_graph(&inst, &sigma, GraphOptions::default()).unwrap();
        compute_pattern_quality(&mut again, &order);
        let records = |g: &fdpattern::InstanceGraph| {
            (0..g.edges().len()).map(|e| g.edge_record(e)).collect::<Vec<_>>()
        };
        prop_assert_eq!(records(&g), records(&again));
    }

    #[test]
    fn repair_invariants((inst, sigma) in instance(24, 3), kind in 0usize..3) {
        let s = [Chase::greedy(), Chase::rc(), Chase::hybrid(0.5)][kind];
        let r = run(&inst, &sigma, s);
        prop_assert_eq!(r.repaired.len(), inst.len());
        prop_assert_eq!(r.repaired.schema(), inst.schema());
        prop_assert_eq!(&run(&inst, &sigma, s).repaired, &r.repaired);
        prop_assert_eq!(r.stats.cost, delta(&inst, &r.repaired).unwrap().cost);
        prop_assert_eq!(r.stats.cost, r.changes().count());

        for (c, attr) in inst.schema().iter().enumerate() {
            let domain: Vec<&str> = (0..inst.len()).map(|row| inst.value(row, c)).collect();
            for row in 0..inst.len() {
                let v = r.repaired.value(row, c);
                prop_assert!(domain.contains(&v), "{attr}={v} is outside the active domain");
                if r.classification.is_bound(attr) {
                    prop_assert_eq!(v, inst.value(row, c));
                }
            }
        }

        for expr in r.expressions() {
            prop_assert!(expr.covers(&sigma));
        }

        if r.conflicts.is_empty() {
            prop_assert!(satisfies(&r.repaired, &sigma).unwrap());
            for expr in r.expressions() {
                for p in &expr.patterns {
                    for (a, v) in &p.values {
                        prop_assert_eq!(r.repaired.get(expr.tuple, a), Some(v.as_str()));
                    }
                }
            }
            let second = run(&r.repaired, &sigma, s);
            prop_assert_eq!(second.stats.cost, 0);
        }
    }

    #[test]
    fn hybrid_thresholds_select_a_strategy((inst, sigma) in instance(24, 3)) {
        let greedy = run(&inst, &sigma, Chase::greedy());
        let rc = run(&inst, &sigma, Chase::rc());
        prop_assert_eq!(&run(&inst, &sigma, Chase::hybrid(0.0)).repaired, &greedy.repaired);
        prop_assert_eq!(&run(&inst, &sigma, Chase::hybrid(1.01)).repaired, &rc.repaired);
    }

    #[test]
    fn oracle_bounds_every_strategy((inst, sigma) in instance(6, 3)) {
        let best = brute_force_optimal(&inst, &sigma, &OracleLimits::default()).unwrap();
        for s in [Chase::greedy(), Chase::rc(), Chase::hybrid(0.5)] {
            let r = run(&inst, &sigma, s);
            if r.conflicts.is_empty() {
                prop_assert!(r.stats.gain <= best.best_gain, "{:?}: {} > {}", s, r.stats.gain, best.best_gain);
            }
        }
        for repaired in &best.best_repairs {
            prop_assert!(satisfies(repaired, &sigma).unwrap());
        }
    }

    #[test]
    fn metric_invariants((a, b) in instance_pair(), (c, _) in instance_pair(), s in 0..SIGMAS.len()) {
        let sigma = Sigma::parse(SIGMAS[s]).unwrap();
        prop_assert_eq!(gain(&a, &b, &sigma).unwrap(), -gain(&b, &a, &sigma).unwrap());
        let q = instance_quality(&a, &sigma).unwrap();
        prop_assert!(q >= (a.len() * sigma.len()) as u64);
        if c.len() == a.len() {
            let report = evaluate(&a, &b, &c, &sigma).unwrap();
            prop_assert!((0.0..=1.0).contains(&report.precision));
            prop_assert!((0.0..=1.0).contains(&report.recall));
            prop_assert_eq!(report, evaluate(&a, &b, &c, &sigma).unwrap());
        }
    }
}
