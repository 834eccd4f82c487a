use std::time::Instant;
use twistg_core::graph::TwistedGraph;
use twistg_core::tdecomp::{
    commutant_nullity_bound_modp, enumerate_t_catalog, merge_isomorphism_classes,
    verify_global_decomposition, COMMUTANT_PRIME,
};

fn rss() -> String {
    std::fs::read_to_string("/proc/self/status")
        .ok()
        .and_then(|s| s.lines().find(|l| l.starts_with("VmRSS")).map(|l| l.to_string()))
        .unwrap_or_default()
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    let t0 = Instant::now();
    let g = TwistedGraph::new(2, 2).expect("graph");
    eprintln!("graph built {:?} {}", t0.elapsed(), rss());
    match which.as_str() {
        "modp" => {
            let bound = commutant_nullity_bound_modp(&g, COMMUTANT_PRIME).expect("bound");
            eprintln!("nullity bound {} {:?} {}", bound, t0.elapsed(), rss());
        }
        "exact" => {
            let catalog = enumerate_t_catalog(2, 2).expect("catalog");
            let merged = merge_isomorphism_classes(&catalog);
            let report = verify_global_decomposition(&g, &merged, None).expect("global");
            for c in &report.checks {
                eprintln!("{} {} ({})", c.passed, c.name, c.details);
            }
            eprintln!("exact phase {:?} {}", t0.elapsed(), rss());
        }
        _ => {
            let catalog = enumerate_t_catalog(2, 2).expect("catalog");
            let merged = merge_isomorphism_classes(&catalog);
            let report = verify_global_decomposition(&g, &merged, Some(COMMUTANT_PRIME))
                .expect("global");
            for c in &report.checks {
                eprintln!("{} {} ({})", c.passed, c.name, c.details);
            }
            eprintln!("full {:?} {}", t0.elapsed(), rss());
        }
    }
}
