//! Graph-layer verification at q = 3, diameter 2: counting, distance
//! regularity against the independently built plain Grassmann graph, the
//! exact adjacency-block identities, and the local spectrum.

use twistg_core::check::CheckReport;
use twistg_core::graph::{
    local_spectrum_table, verify_adjacency_blocks, verify_distance_regularity,
    verify_graph_structure, verify_local_spectrum, TwistedGraph,
};

fn assert_all_passed(report: CheckReport, what: &str) {
    assert!(
        report.all_passed(),
        "{what} failures: {:?}",
        report.failures().collect::<Vec<_>>()
    );
}

fn graph_3_2() -> TwistedGraph {
    TwistedGraph::new(3, 2).expect("graph builds")
}

#[test]
fn structure_and_eigenvalues_at_3_2() {
    let g = graph_3_2();
    assert_eq!(g.len(), 1210);
    assert_eq!(g.n_inner, 40);
    assert_eq!(g.degree().expect("degree"), 156);
    let thetas: Vec<i64> = (0..=2)
        .map(|i| i64::try_from(&g.theta(i).expect("theta")).expect("small"))
        .collect();
    assert_eq!(thetas, vec![156, 35, -4]);
    assert_all_passed(verify_graph_structure(&g), "structure");
}

#[test]
fn intersection_array_matches_the_plain_grassmann_at_3_2() {
    let g = graph_3_2();
    let (b, c, report) = verify_distance_regularity(&g).expect("regular");
    assert_eq!(b, vec![156, 108]);
    assert_eq!(c, vec![1, 16]);
    assert_all_passed(report, "distance regularity");
}

#[test]
fn adjacency_blocks_exact_at_3_2() {
    let g = graph_3_2();
    assert_all_passed(verify_adjacency_blocks(&g), "adjacency blocks");
}

#[test]
fn local_spectrum_frozen_at_3_2() {
    let g = graph_3_2();
    let table: Vec<(i64, i64)> = local_spectrum_table(3, 2)
        .into_iter()
        .map(|(ev, m)| {
            (
                i64::try_from(&ev).expect("small"),
                i64::try_from(&m).expect("small"),
            )
        })
        .collect();
    assert_eq!(table, vec![(-4, 90), (-1, 26), (8, 38), (35, 1), (47, 1)]);
    assert_all_passed(
        verify_local_spectrum(&g).expect("spectrum verifies"),
        "local spectrum",
    );
}
