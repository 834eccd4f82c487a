//! Top-level acceptance gate: nine criteria covering every layer of the
//! crate, each as one test emitting a single pass line.  Numeric targets
//! (counts, spectra, masses, commutant dimensions) are frozen literals so a
//! regression in any layer turns the corresponding criterion red.

use std::collections::BTreeMap;
use std::time::Instant;

use num_traits::Zero;
use twistg_core::check::CheckReport;
use twistg_core::gf::GfField;
use twistg_core::graph::{
    verify_adjacency_blocks, verify_adjacency_blocks_with, verify_distance_regularity,
    verify_graph_structure, verify_idempotents, verify_local_spectrum, TwistedGraph,
};
use twistg_core::hcatalog::{enumerate_h_classes, lowest_space_oracle, verify_h_catalog};
use twistg_core::htrep::{
    ht_catalog_mass, verify_characters, verify_ht_catalog, verify_operator_transport,
};
use twistg_core::lattice::PairGround;
use twistg_core::qarith::{cell_size_pair, cell_size_triple, gaussian_binomial, subspace_count};
use twistg_core::sparse::BinMat;
use twistg_core::subspace::enumerate_subspaces;
use twistg_core::tdecomp::{
    enumerate_t_catalog, merge_isomorphism_classes, merged_vertex_mass, standard_params,
    verify_global_decomposition, verify_isomorphism_separation, verify_mass_identity,
    verify_t_catalog_against_omega, verify_t_modules, COMMUTANT_PRIME,
};
use twistg_core::{Int, Rat, DEFAULT_TOL};

fn assert_green(report: &CheckReport, what: &str) {
    let fails: Vec<String> = report
        .failures()
        .map(|c| format!("{}: {}", c.name, c.details))
        .collect();
    assert!(fails.is_empty(), "{what} failed checks: {fails:#?}");
}

fn pass(criterion: u32, label: &str, started: Instant) {
    println!(
        "criterion {criterion} ({label}): PASS in {:.1}s",
        started.elapsed().as_secs_f64()
    );
}

fn rat(v: i64) -> Rat {
    Rat::from_integer(Int::from(v))
}

/// Criterion 1: enumerated subspace counts equal the closed forms and the
/// cell double sums reproduce the totals, for every split, at both fields.
#[test]
fn criterion_1_counting_layer() {
    let started = Instant::now();
    for (q, n_max) in [(2u64, 7u32), (3, 5)] {
        let field = GfField::new(q).unwrap();
        for n in 0..=n_max {
            let total = subspace_count(n, q);
            let mut by_dim = Int::zero();
            for k in 0..=n {
                let formula = gaussian_binomial(n as i64, k as i64, q);
                let seen = enumerate_subspaces(&field, n as usize, k as usize).len();
                assert_eq!(
                    formula,
                    Int::from(seen as u64),
                    "count mismatch at q={q} n={n} k={k}"
                );
                by_dim += formula;
            }
            assert_eq!(by_dim, total, "dimension totals at q={q} n={n}");
            for a in 0..=n {
                let b = n - a;
                let mut pair_sum = Int::zero();
                let mut triple_sum = Int::zero();
                for i in 0..=a {
                    for j in 0..=b {
                        pair_sum += cell_size_pair(a as i64, b as i64, i as i64, j as i64, q);
                        for k in 0..=1 {
                            triple_sum +=
                                cell_size_triple(a as i64, b as i64, i as i64, j as i64, k, q);
                        }
                    }
                }
                assert_eq!(pair_sum, total, "pair split at q={q} a={a} b={b}");
                assert_eq!(
                    triple_sum,
                    subspace_count(n + 1, q),
                    "triple split at q={q} a={a} b={b}"
                );
            }
        }
    }
    pass(1, "counting layer", started);
}

/// Criterion 2: catalog mass identity across the stated parameter sweeps,
/// and the kernel-based multiplicity oracle at four concrete grounds.
#[test]
fn criterion_2_h_catalog() {
    let started = Instant::now();
    for (q, n_max) in [(2u64, 7usize), (3, 5)] {
        for a in 0..=n_max {
            for b in 0..=n_max - a {
                let mut mass = Int::zero();
                for c in enumerate_h_classes(a, b) {
                    mass += c.multiplicity(q).unwrap() * Int::from(c.dim());
                }
                assert_eq!(
                    mass,
                    subspace_count((a + b) as u32, q),
                    "mass identity at q={q} a={a} b={b}"
                );
            }
        }
    }
    for (a, b) in [(1usize, 2usize), (2, 2), (1, 3), (2, 4)] {
        let g = PairGround::standalone(2, a, b).unwrap();
        let ops = g.ops();
        let oracle = lowest_space_oracle(&g, &ops).unwrap();
        let mut formula = BTreeMap::new();
        for c in enumerate_h_classes(a, b) {
            let m = usize::try_from(&c.multiplicity(2).unwrap()).unwrap();
            if m > 0 {
                formula.insert((c.nu, c.mu, c.rho), m);
            }
        }
        assert_eq!(oracle, formula, "oracle disagreement at (a,b)=({a},{b})");
        if a + b < 6 {
            assert_green(&verify_h_catalog(&g), &format!("h catalog at ({a},{b})"));
        }
    }
    pass(2, "pair-operator catalog", started);
}

/// Criterion 3: character formulas against brute force, operator transport
/// identities at both fields, the extended mass identity, and exact module
/// actions at q = 2.
#[test]
fn criterion_3_extended_catalog() {
    let started = Instant::now();
    for q in [2u64, 3] {
        assert_green(
            &verify_characters(q, 1, 3, DEFAULT_TOL).unwrap(),
            &format!("characters at q={q}"),
        );
        assert_green(
            &verify_operator_transport(q, 1, 3, DEFAULT_TOL).unwrap(),
            &format!("operator transport at q={q}"),
        );
        for a in 0..=6usize {
            for b in 0..=6 - a {
                assert_eq!(
                    ht_catalog_mass(a, b, q).unwrap(),
                    subspace_count((a + b + 1) as u32, q),
                    "extended mass at q={q} a={a} b={b}"
                );
            }
        }
    }
    assert_green(
        &verify_ht_catalog(2, 1, 3, DEFAULT_TOL).unwrap(),
        "extended catalog with concrete modules at q=2",
    );
    pass(3, "extended catalog", started);
}

/// Criterion 4: the graph at (2,2) in full (sizes, degree, distance
/// regularity against the plain Grassmann graph, spectrum, adjacency block
/// identities, distance projectors), then blocks and projectors at (2,3).
#[test]
fn criterion_4_twisted_graph() {
    let started = Instant::now();
    let g = TwistedGraph::new(2, 2).unwrap();
    assert_eq!(g.len(), 155);
    assert_eq!(g.n_inner, 15, "vertices inside the hyperplane");
    assert_eq!(g.len() - g.n_inner, 140, "vertices outside the hyperplane");
    assert_eq!(g.degree().unwrap(), 42);
    assert_green(&verify_graph_structure(&g), "graph structure at (2,2)");
    let (b, c, drg) = verify_distance_regularity(&g).unwrap();
    assert_green(&drg, "distance regularity at (2,2)");
    assert_eq!((b, c), (vec![42, 24], vec![1, 9]));
    let (spectrum, idem) = verify_idempotents(&g).unwrap();
    assert_green(&idem, "primitive idempotents at (2,2)");
    assert_eq!(
        spectrum,
        vec![(Int::from(42), 1), (Int::from(11), 30), (Int::from(-3), 124)]
    );
    assert_green(&verify_adjacency_blocks(&g), "adjacency blocks at (2,2)");

    let g3 = TwistedGraph::new(2, 3).unwrap();
    assert_eq!(g3.len(), 11811);
    assert_green(&verify_graph_structure(&g3), "graph structure at (2,3)");
    assert_green(&verify_adjacency_blocks(&g3), "adjacency blocks at (2,3)");
    pass(4, "twisted graph", started);
}

/// Criterion 5: every cataloged module verified concretely at (2,2),
/// including spectrally measured endpoints and standardized bases, plus the
/// frozen spot values of the primary normal form.
#[test]
fn criterion_5_t_modules() {
    let started = Instant::now();
    assert_green(
        &verify_t_modules(2, 2, true, DEFAULT_TOL).unwrap(),
        "concrete modules at (2,2)",
    );
    let principal = standard_params(2, 2, 0, 0, 2).unwrap();
    assert_eq!(principal.b(0), rat(42));
    assert_eq!(principal.c(1), rat(1));
    assert_eq!(principal.eigenvalue(1), rat(11));
    pass(5, "irreducible modules", started);
}

/// Criterion 6: the three global decomposition counts at (2,2) and the mass
/// identity alone at (2,3).
#[test]
fn criterion_6_completeness() {
    let started = Instant::now();
    let catalog = enumerate_t_catalog(2, 2).unwrap();
    let merged = merge_isomorphism_classes(&catalog);
    assert_eq!(merged_vertex_mass(&merged), Int::from(155));
    let dim_t: usize = merged.iter().map(|c| (c.d + 1) * (c.d + 1)).sum();
    assert_eq!(dim_t, 21);
    let commutant: Int = merged.iter().map(|c| &c.multiplicity * &c.multiplicity).sum();
    assert_eq!(commutant, Int::from(7573));
    let g = TwistedGraph::new(2, 2).unwrap();
    assert_green(
        &verify_global_decomposition(&g, &merged, Some(COMMUTANT_PRIME)).unwrap(),
        "global decomposition at (2,2)",
    );
    assert_green(&verify_mass_identity(2, 3).unwrap(), "mass identity at (2,3)");
    let merged3 = merge_isomorphism_classes(&enumerate_t_catalog(2, 3).unwrap());
    assert_eq!(merged_vertex_mass(&merged3), Int::from(11811));
    pass(6, "decomposition completeness", started);
}

/// Criterion 7: r-classes separate same-shape d > 0 modules without moving
/// eigenvalues, and d = 0 classes merge across families.
#[test]
fn criterion_7_isomorphism_separation() {
    let started = Instant::now();
    for big_d in [2usize, 3] {
        assert_green(
            &verify_isomorphism_separation(2, big_d).unwrap(),
            &format!("separation at (2,{big_d})"),
        );
    }
    pass(7, "isomorphism separation", started);
}

/// Criterion 8: the local spectrum at (2,2) as a frozen multiset with its
/// internal size and trace sanity, and the dual-endpoint-deficient class at
/// (2,3).
#[test]
fn criterion_8_remarks() {
    let started = Instant::now();
    let g = TwistedGraph::new(2, 2).unwrap();
    let report = verify_local_spectrum(&g).unwrap();
    assert_green(&report, "local spectrum at (2,2)");
    let table = twistg_core::graph::local_spectrum_table(2, 2);
    let want: Vec<(Int, Int)> = [(-3i64, 20i64), (-1, 7), (3, 13), (11, 1), (17, 1)]
        .into_iter()
        .map(|(e, m)| (Int::from(e), Int::from(m)))
        .collect();
    assert_eq!(table, want);
    let size: Int = table.iter().map(|(_, m)| m).sum();
    let trace: Int = table.iter().map(|(e, m)| e * m).sum();
    assert_eq!(size, Int::from(42), "local graph order equals the degree");
    assert_eq!(trace, Int::zero(), "local adjacency is traceless");

    assert_green(
        &verify_t_catalog_against_omega(2, 3).unwrap(),
        "catalog against the admissible grid at (2,3)",
    );
    let merged = merge_isomorphism_classes(&enumerate_t_catalog(2, 3).unwrap());
    let deficient = merged
        .iter()
        .find(|c| (c.eps, c.eps_star, c.d) == (2, 1, 1))
        .expect("a merged class with dual endpoint below the endpoint");
    assert_eq!(deficient.eps_star, deficient.eps - 1);
    assert_eq!(deficient.multiplicity, Int::from(48));
    pass(8, "remark-level observations", started);
}

/// Criterion 9: the checks cannot pass vacuously.  A single flipped
/// adjacency entry breaks a block identity, and a single multiplicity bump
/// shifts the vertex mass by exactly the module dimension.
#[test]
fn criterion_9_negative_controls() {
    let started = Instant::now();
    let g = TwistedGraph::new(2, 2).unwrap();
    let (u, v) = (0usize, g.adj.row(0)[0]);
    let tampered = BinMat::from_entries(
        g.len(),
        g.len(),
        (0..g.len()).flat_map(|r| {
            let skip = r == u;
            g.adj
                .row(r)
                .iter()
                .filter(move |&&c| !(skip && c == v))
                .map(move |&c| (r as u32, c))
        }),
    );
    assert_eq!(tampered.nnz() + 1, g.adj.nnz(), "exactly one entry flipped");
    let report = verify_adjacency_blocks_with(&g, &tampered);
    assert!(
        !report.all_passed(),
        "tampered adjacency must fail a block identity"
    );

    let merged = merge_isomorphism_classes(&enumerate_t_catalog(2, 2).unwrap());
    let true_mass = merged_vertex_mass(&merged);
    assert_eq!(true_mass, Int::from(155));
    for bump in 0..merged.len() {
        let mut perturbed = merged.clone();
        perturbed[bump].multiplicity += 1;
        let off = merged_vertex_mass(&perturbed) - &true_mass;
        assert_eq!(
            off,
            Int::from((merged[bump].d + 1) as u64),
            "mass shift equals the bumped module dimension"
        );
    }
    pass(9, "negative controls", started);
}
