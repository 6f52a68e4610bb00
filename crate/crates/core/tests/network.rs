use finegraph_core::network::*;
use proptest::prelude::*;

fn small(seed: u64) -> (Topology, RoutingTable) {
    let t = synthetic(12, 4, 24, seed).unwrap();
    let r = compute_routes(&t).unwrap();
    (t, r)
}

#[test]
fn full_size_topology_from_file() {
    let t = random_regular_topology(3294, 22, 16384, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.topo");
    std::fs::write(&path, t.to_text()).unwrap();
    let back = build_topology(&TopologySpec::File {
        path,
        radix: Some(22),
    })
    .unwrap();
    assert_eq!(back.router_count(), 3294);
    assert_eq!(back.node_count(), 16384);
    assert!(back.max_router_degree() <= 22);
    assert!(back
        .attachments
        .iter()
        .all(|&[a, b]| a != b && a < 3294 && b < 3294));
    assert!(back
        .nodes_by_router()
        .iter()
        .all(|n| n.len() == 9 || n.len() == 10));
    let r = compute_routes(&back).unwrap();
    assert!(r.diameter >= 3);
}

#[test]
fn random_graph_misses_diameter_three_at_full_size() {
    let e = synthetic(3294, 22, 16384, 1).unwrap_err().to_string();
    assert!(e.contains("best diameter 4"), "{e}");
}

#[test]
fn disconnected_graph_is_rejected() {
    let t = Topology {
        adjacency: vec![vec![1], vec![0], vec![3], vec![2]],
        attachments: vec![[0, 1]],
        hop_latency_ns: 100,
        radix: None,
    };
    assert!(compute_routes(&t).is_err());
    assert!(t.validate().is_err());
}

#[test]
fn drain_delivers_everything() {
    let (t, r) = small(2);
    let cfg = NetConfig {
        duration_ns: 600,
        link_bandwidth: 200.0,
        drain: true,
        ..NetConfig::default()
    };
    let s = simulate(&t, &r, &cfg).unwrap();
    assert!(s.injected > 0);
    assert_eq!(s.in_flight, 0);
    assert_eq!(s.delivered, s.injected);
    assert_eq!(s.latency.count(), s.injected);
    assert_eq!(s.conservation_violations, 0);
}

#[test]
fn csv_outputs() {
    let (t, r) = small(1);
    let s = simulate(
        &t,
        &r,
        &NetConfig {
            duration_ns: 300,
            ..NetConfig::default()
        },
    )
    .unwrap();
    let mut q = Vec::new();
    s.write_queue_csv(&mut q).unwrap();
    let q = String::from_utf8(q).unwrap();
    assert_eq!(q.lines().count(), 4);
    assert!(q.lines().nth(1).unwrap().starts_with("100,"));
    let mut c = Vec::new();
    s.write_ccdf_csv(&mut c).unwrap();
    let c = String::from_utf8(c).unwrap();
    let first: Vec<&str> = c.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[1], "1");
    let report = stats_report(&s);
    assert!(report.contains("p99 / no-load"));
    assert!(report.starts_with("topology            12 routers, 24 nodes"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn conservation_and_bounds(seed in 0u64..50, frac in 0.0f64..1.0, bw in 40.0f64..3000.0) {
        let (t, r) = small(seed % 5);
        let cfg = NetConfig {
            duration_ns: 400,
            injection: Injection::Fraction(frac),
            link_bandwidth: bw,
            seed,
            ..NetConfig::default()
        };
        let s = simulate(&t, &r, &cfg).unwrap();
        prop_assert_eq!(s.conservation_violations, 0);
        prop_assert_eq!(s.injected, s.delivered + s.in_flight);
        prop_assert_eq!(s.latency_bound_violations, 0);
        prop_assert!(s.max_router_link_bytes_per_ns as f64 <= bw);
        if let Some(min) = s.latency.min() {
            prop_assert!(min >= 2 * t.hop_latency_ns);
        }
    }

    #[test]
    fn more_bandwidth_never_raises_mean_latency(
        seed in 0u64..20,
        frac in 0.05f64..1.0,
        bw in 40.0f64..2000.0,
        factor in 1.0f64..4.0,
    ) {
        let (t, r) = small(seed % 4);
        let cfg = NetConfig {
            duration_ns: 500,
            injection: Injection::Fraction(frac),
            link_bandwidth: bw,
            seed,
            drain: true,
            ..NetConfig::default()
        };
        let lo = simulate(&t, &r, &cfg).unwrap();
        let hi = simulate(&t, &r, &NetConfig { link_bandwidth: bw * factor, ..cfg }).unwrap();
        prop_assert_eq!(lo.injected, hi.injected);
        prop_assert!(hi.latency.mean().unwrap() <= lo.latency.mean().unwrap());
    }
}
