//! Command handlers: each maps parsed flags to library calls and folds the
//! results into a deterministic report.

use std::fmt;
use std::path::PathBuf;

use twistg_core::gf::GfField;
use twistg_core::graph::{
    grassmann_graph, local_adjacency, local_spectrum_table, primitive_idempotents,
    verify_adjacency_blocks, verify_distance_regularity, verify_graph_structure,
    verify_idempotents, verify_local_spectrum, TwistedGraph,
};
use twistg_core::hcatalog::{enumerate_h_classes, verify_h_catalog};
use twistg_core::htrep::{
    enumerate_ht_classes, ht_catalog_mass, verify_characters, verify_ht_catalog,
    verify_operator_transport,
};
use twistg_core::lattice::PairGround;
use twistg_core::qarith::{cell_size_pair, cell_size_triple, gaussian_binomial, subspace_count};
use twistg_core::subspace::enumerate_subspaces;
use twistg_core::tdecomp::{
    enumerate_t_catalog, merge_isomorphism_classes, verify_global_decomposition,
    verify_isomorphism_separation, verify_mass_identity, verify_t_catalog_against_omega,
    verify_t_modules, TFamily, COMMUTANT_PRIME, T_FAMILIES,
};
use twistg_core::Int;

use crate::emit;
use crate::report::{Report, Table};

/// Vertex ceiling for the quadratic dense phases (idempotent export and the
/// global decomposition counts), much stricter than the point ceiling.
const DENSE_VERTEX_CEILING: u64 = 2000;

pub enum CmdError {
    /// Desk-scale refusal or other misuse; exits with the usage code.
    Guard(String),
    Core(twistg_core::Error),
    Io(std::io::Error),
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Guard(msg) => write!(f, "{msg}"),
            CmdError::Core(e) => write!(f, "{e}"),
            CmdError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<twistg_core::Error> for CmdError {
    fn from(e: twistg_core::Error) -> CmdError {
        CmdError::Core(e)
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> CmdError {
        CmdError::Io(e)
    }
}

impl CmdError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Guard(_) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CmdError>;

/// Settings shared by every command.
pub struct Opts {
    pub tol: f64,
    pub max_points: u64,
    pub force: bool,
    pub out_dir: PathBuf,
}

fn guard(estimate: &Int, ceiling: u64, force: bool, what: &str) -> Result<()> {
    if force || *estimate <= Int::from(ceiling) {
        return Ok(());
    }
    Err(CmdError::Guard(format!(
        "{what} would touch {estimate} points, over the desk-scale ceiling {ceiling}; \
         raise --max-points or pass --force to proceed anyway"
    )))
}

fn compact_family(f: TFamily) -> String {
    format!("V{}{}", f.w_index(), f.delta())
}

fn parse_family(s: &str) -> Result<TFamily> {
    for f in T_FAMILIES {
        if s.eq_ignore_ascii_case(&format!("V{}{}", f.w_index(), f.delta()))
            || s.eq_ignore_ascii_case(&f.to_string())
        {
            return Ok(f);
        }
    }
    Err(CmdError::Guard(format!(
        "unknown family {s:?}; expected one of V10, V11, V20, V21, V30, V31"
    )))
}

/// Counting layer: enumerated subspace counts against the closed forms,
/// plus the split identities, for every total up to `n`.
pub fn qarith(q: u64, n: u32, opts: &Opts) -> Result<Report> {
    let mut report = Report::new("qarith");
    report.input("q", q);
    report.input("n", n);
    guard(&subspace_count(n, q), opts.max_points, opts.force, "subspace enumeration")?;
    let field = GfField::new(q)?;

    let mut binomials = Table::new(&["m", "k", "closed_form", "enumerated"]);
    let mut totals = Table::new(&["m", "subspace_count"]);
    let mut splits = Table::new(&["a", "b", "pair_cell_sum", "triple_cell_sum"]);
    let mut enum_ok = true;
    let mut total_ok = true;
    let mut pair_ok = true;
    let mut triple_ok = true;
    for m in 0..=n {
        let mut dim_total = Int::from(0u32);
        for k in 0..=m {
            let formula = gaussian_binomial(m as i64, k as i64, q);
            let seen = Int::from(enumerate_subspaces(&field, m as usize, k as usize).len() as u64);
            enum_ok &= formula == seen;
            dim_total += &seen;
            binomials.push(vec![
                m.to_string(),
                k.to_string(),
                formula.to_string(),
                seen.to_string(),
            ]);
        }
        let s = subspace_count(m, q);
        total_ok &= dim_total == s;
        totals.push(vec![m.to_string(), s.to_string()]);
        for a in 0..=m {
            let b = m - a;
            let mut pair_sum = Int::from(0u32);
            let mut triple_sum = Int::from(0u32);
            for i in 0..=a {
                for j in 0..=b {
                    pair_sum += cell_size_pair(a as i64, b as i64, i as i64, j as i64, q);
                    for k in 0..=1 {
                        triple_sum +=
                            cell_size_triple(a as i64, b as i64, i as i64, j as i64, k, q);
                    }
                }
            }
            pair_ok &= pair_sum == s;
            triple_ok &= triple_sum == subspace_count(m + 1, q);
            splits.push(vec![
                a.to_string(),
                b.to_string(),
                pair_sum.to_string(),
                triple_sum.to_string(),
            ]);
        }
    }
    report.check(
        "enumerated subspace counts match the closed forms",
        enum_ok,
        format!("all m <= {n}"),
    );
    report.check(
        "per-dimension counts sum to the subspace total",
        total_ok,
        format!("all m <= {n}"),
    );
    report.check(
        "pair-cell double sum equals the subspace total for every split",
        pair_ok,
        format!("all a + b <= {n}"),
    );
    report.check(
        "triple-cell sum equals the next subspace total for every split",
        triple_ok,
        format!("all a + b <= {n}"),
    );
    report.table("gaussian_binomials", binomials);
    report.table("subspace_totals", totals);
    report.table("split_identities", splits);
    report.finish();
    Ok(report)
}

pub fn catalog_h(q: u64, a: usize, b: usize) -> Result<Report> {
    let mut report = Report::new("catalog h");
    report.input("q", q);
    report.input("a", a);
    report.input("b", b);
    let mut t = Table::new(&["nu", "mu", "rho", "dim", "multiplicity"]);
    let mut mass = Int::from(0u32);
    for class in enumerate_h_classes(a, b) {
        let m = class.multiplicity(q)?;
        mass += &m * Int::from(class.dim() as u64);
        t.push(vec![
            class.nu.to_string(),
            class.mu.to_string(),
            class.rho.to_string(),
            class.dim().to_string(),
            m.to_string(),
        ]);
    }
    let expected = subspace_count((a + b) as u32, q);
    report.check(
        "multiplicity-weighted dimensions sum to the subspace total",
        mass == expected,
        format!("{mass} vs {expected}"),
    );
    report.table("h_classes", t);
    report.finish();
    Ok(report)
}

pub fn catalog_ht(q: u64, a: usize, b: usize) -> Result<Report> {
    let mut report = Report::new("catalog ht");
    report.input("q", q);
    report.input("a", a);
    report.input("b", b);
    let mut t = Table::new(&["nu", "mu", "tau", "rho", "dim", "multiplicity"]);
    for class in enumerate_ht_classes(a, b) {
        t.push(vec![
            class.nu.to_string(),
            class.mu.to_string(),
            class.tau.to_string(),
            class.rho.to_string(),
            class.dim().to_string(),
            class.multiplicity(q)?.to_string(),
        ]);
    }
    let mass = ht_catalog_mass(a, b, q)?;
    let expected = subspace_count((a + b + 1) as u32, q);
    report.check(
        "multiplicity-weighted dimensions sum to the subspace total",
        mass == expected,
        format!("{mass} vs {expected}"),
    );
    report.table("ht_classes", t);
    report.finish();
    Ok(report)
}

fn t_catalog_table(q: u64, big_d: usize, family: Option<TFamily>) -> Result<Table> {
    let mut t = Table::new(&[
        "family",
        "eps",
        "eps_star",
        "d",
        "r",
        "multiplicity",
        "source_nu",
        "source_mu",
        "source_tau",
        "source_rho",
    ]);
    for desc in enumerate_t_catalog(q, big_d)? {
        if family.is_some_and(|f| f != desc.family) {
            continue;
        }
        t.push(vec![
            compact_family(desc.family),
            desc.eps.to_string(),
            desc.eps_star.to_string(),
            desc.d.to_string(),
            desc.r_class.to_string(),
            desc.multiplicity.to_string(),
            desc.source.nu.to_string(),
            desc.source.mu.to_string(),
            desc.source.tau.to_string(),
            desc.source.rho.to_string(),
        ]);
    }
    Ok(t)
}

fn t_merged_table(q: u64, big_d: usize) -> Result<Table> {
    let mut t = Table::new(&["eps", "eps_star", "d", "delta", "multiplicity", "families"]);
    let catalog = enumerate_t_catalog(q, big_d)?;
    for class in merge_isomorphism_classes(&catalog) {
        let families: Vec<String> = class.families.iter().map(|f| compact_family(*f)).collect();
        t.push(vec![
            class.eps.to_string(),
            class.eps_star.to_string(),
            class.d.to_string(),
            class.delta.map(|x| x.to_string()).unwrap_or_default(),
            class.multiplicity.to_string(),
            families.join("+"),
        ]);
    }
    Ok(t)
}

pub fn catalog_t(
    q: u64,
    big_d: usize,
    merged: bool,
    family: Option<&str>,
) -> Result<Report> {
    let mut report = Report::new("catalog t");
    report.input("q", q);
    report.input("D", big_d);
    let family = family.map(parse_family).transpose()?;
    if let Some(f) = family {
        report.input("family", f);
    }
    if merged {
        report.table("t_merged_classes", t_merged_table(q, big_d)?);
    } else {
        report.table("t_catalog", t_catalog_table(q, big_d, family)?);
    }
    report.absorb(verify_mass_identity(q, big_d)?);
    report.finish();
    Ok(report)
}

fn build_graph(q: u64, big_d: usize, opts: &Opts) -> Result<TwistedGraph> {
    let vertices = gaussian_binomial(2 * big_d as i64 + 1, big_d as i64, q);
    guard(&vertices, opts.max_points, opts.force, "graph construction")?;
    Ok(TwistedGraph::new(q, big_d)?)
}

fn size_table(g: &TwistedGraph) -> Result<Table> {
    let mut t = Table::new(&["quantity", "value"]);
    t.push(vec!["vertices".into(), g.len().to_string()]);
    t.push(vec![
        "upper-side vertices (dimension D+1)".into(),
        (g.len() - g.n_inner).to_string(),
    ]);
    t.push(vec![
        "lower-side vertices (dimension D-1)".into(),
        g.n_inner.to_string(),
    ]);
    t.push(vec!["degree".into(), g.degree()?.to_string()]);
    Ok(t)
}

pub fn graph_build(q: u64, big_d: usize, write: bool, opts: &Opts) -> Result<Report> {
    let mut report = Report::new("graph build");
    report.input("q", q);
    report.input("D", big_d);
    let g = build_graph(q, big_d, opts)?;
    report.table("sizes", size_table(&g)?);
    let mut eig = Table::new(&["i", "eigenvalue"]);
    for i in 0..=big_d {
        eig.push(vec![i.to_string(), g.theta(i)?.to_string()]);
    }
    report.table("adjacency_eigenvalues", eig);
    report.absorb(verify_graph_structure(&g));
    if write {
        let body = emit::matrix_market_pattern_symmetric(&g.adj);
        let path = emit::write_text(&opts.out_dir, "adjacency.mtx", &body)?;
        report.note(format!("wrote {}", path.display()));
    }
    report.finish();
    Ok(report)
}

pub fn graph_check_drg(q: u64, big_d: usize, opts: &Opts) -> Result<Report> {
    let mut report = Report::new("graph check-drg");
    report.input("q", q);
    report.input("D", big_d);
    let g = build_graph(q, big_d, opts)?;
    report.absorb(verify_graph_structure(&g));
    let (b, c, drg) = verify_distance_regularity(&g)?;
    report.absorb(drg);
    let mut arr = Table::new(&["i", "b_i", "c_i"]);
    for i in 0..b.len() {
        arr.push(vec![
            i.to_string(),
            b[i].to_string(),
            if i == 0 { String::new() } else { c[i - 1].to_string() },
        ]);
    }
    arr.push(vec![b.len().to_string(), String::new(), c[b.len() - 1].to_string()]);
    report.table("intersection_array", arr);
    let (spectrum, idem) = verify_idempotents(&g)?;
    report.absorb(idem);
    let mut spec = Table::new(&["eigenvalue", "multiplicity"]);
    for (ev, m) in spectrum {
        spec.push(vec![ev.to_string(), m.to_string()]);
    }
    report.table("spectrum", spec);
    report.finish();
    Ok(report)
}

pub fn graph_local_spectrum(q: u64, big_d: usize, opts: &Opts) -> Result<Report> {
    let mut report = Report::new("graph local-spectrum");
    report.input("q", q);
    report.input("D", big_d);
    let g = build_graph(q, big_d, opts)?;
    report.absorb(verify_local_spectrum(&g)?);
    let mut t = Table::new(&["eigenvalue", "multiplicity"]);
    for (ev, m) in local_spectrum_table(q, big_d) {
        t.push(vec![ev.to_string(), m.to_string()]);
    }
    report.table("local_spectrum", t);
    report.finish();
    Ok(report)
}

pub fn verify_operator_identities(q: u64, a: usize, b: usize, opts: &Opts) -> Result<Report> {
    let mut report = Report::new("verify operator-identities");
    report.input("q", q);
    report.input("a", a);
    report.input("b", b);
    report.input("tolerance", opts.tol);
    guard(
        &subspace_count((a + b + 1) as u32, q),
        opts.max_points,
        opts.force,
        "the extended ground set",
    )?;
    report.absorb(verify_characters(q, a, b, opts.tol)?);
    report.absorb(verify_operator_transport(q, a, b, opts.tol)?);
    report.finish();
    Ok(report)
}

pub fn verify_blocks(q: u64, big_d: usize, opts: &Opts) -> Result<Report> {
    let mut report = Report::new("verify blocks");
    report.input("q", q);
    report.input("D", big_d);
    let g = build_graph(q, big_d, opts)?;
    report.absorb(verify_graph_structure(&g));
    report.absorb(verify_adjacency_blocks(&g));
    report.finish();
    Ok(report)
}

pub fn verify_all(q: u64, big_d: usize, opts: &Opts) -> Result<Report> {
    let n = 2 * big_d as u32 + 1;
    let mut report = Report::new("verify all");
    report.input("q", q);
    report.input("D", big_d);
    report.input("tolerance", opts.tol);
    guard(&subspace_count(n, q), opts.max_points, opts.force, "the full pipeline")?;
    let (a, b) = (big_d - 1, big_d + 1);

    // counting layer at the ambient dimension
    let field = GfField::new(q)?;
    let mut enum_ok = true;
    for k in 0..=n {
        enum_ok &= gaussian_binomial(n as i64, k as i64, q)
            == Int::from(enumerate_subspaces(&field, n as usize, k as usize).len() as u64);
    }
    report.check(
        "enumerated subspace counts match the closed forms",
        enum_ok,
        format!("all dimensions in F_{q}^{n}"),
    );
    let s = subspace_count(n, q);
    let mut split_ok = true;
    for sa in 0..=n {
        let mut sum = Int::from(0u32);
        for i in 0..=sa {
            for j in 0..=(n - sa) {
                sum += cell_size_pair(sa as i64, (n - sa) as i64, i as i64, j as i64, q);
            }
        }
        split_ok &= sum == s;
    }
    report.check(
        "pair-cell double sum equals the subspace total for every split",
        split_ok,
        format!("all a + b = {n}"),
    );

    // lower catalog on the hyperplane pair, extended catalog above it
    report.absorb(verify_h_catalog(&PairGround::standalone(q, a, b)?));
    report.absorb(verify_characters(q, a, b, opts.tol)?);
    report.absorb(verify_operator_transport(q, a, b, opts.tol)?);
    report.absorb(verify_ht_catalog(q, a, b, opts.tol)?);

    // graph layer
    let g = build_graph(q, big_d, opts)?;
    report.absorb(verify_graph_structure(&g));
    let (_, _, drg) = verify_distance_regularity(&g)?;
    report.absorb(drg);
    report.absorb(verify_adjacency_blocks(&g));
    let (_, idem) = verify_idempotents(&g)?;
    report.absorb(idem);
    report.absorb(verify_local_spectrum(&g)?);

    // module catalog and concrete construction
    report.absorb(verify_t_catalog_against_omega(q, big_d)?);
    report.absorb(verify_mass_identity(q, big_d)?);
    report.absorb(verify_isomorphism_separation(q, big_d)?);
    report.absorb(verify_t_modules(q, big_d, true, opts.tol)?);

    // global counts need ambient-size dense work
    if opts.force || g.len() as u64 <= DENSE_VERTEX_CEILING {
        let catalog = enumerate_t_catalog(q, big_d)?;
        let merged = merge_isomorphism_classes(&catalog);
        report.absorb(verify_global_decomposition(&g, &merged, Some(COMMUTANT_PRIME))?);
    } else {
        report.note(format!(
            "global decomposition counts skipped: {} vertices over the dense ceiling {}; \
             pass --force to run them anyway",
            g.len(),
            DENSE_VERTEX_CEILING
        ));
    }
    report.finish();
    Ok(report)
}

pub fn decompose(
    q: u64,
    big_d: usize,
    with_oracle: bool,
    spectral: bool,
    opts: &Opts,
) -> Result<Report> {
    let mut report = Report::new("decompose");
    report.input("q", q);
    report.input("D", big_d);
    report.input("with_oracle", with_oracle);
    report.input("spectral", spectral);
    report.input("tolerance", opts.tol);
    guard(
        &subspace_count(2 * big_d as u32 + 1, q),
        opts.max_points,
        opts.force,
        "the module construction",
    )?;
    report.table("t_catalog", t_catalog_table(q, big_d, None)?);
    report.table("t_merged_classes", t_merged_table(q, big_d)?);
    report.absorb(verify_mass_identity(q, big_d)?);
    report.absorb(verify_t_modules(q, big_d, spectral, opts.tol)?);
    if with_oracle {
        report.absorb(verify_t_catalog_against_omega(q, big_d)?);
        report.absorb(verify_isomorphism_separation(q, big_d)?);
        let vertices = gaussian_binomial(2 * big_d as i64 + 1, big_d as i64, q);
        if opts.force || vertices <= Int::from(DENSE_VERTEX_CEILING) {
            let g = TwistedGraph::new(q, big_d)?;
            let catalog = enumerate_t_catalog(q, big_d)?;
            let merged = merge_isomorphism_classes(&catalog);
            report.absorb(verify_global_decomposition(&g, &merged, Some(COMMUTANT_PRIME))?);
        } else {
            report.note(format!(
                "global decomposition counts skipped: {vertices} vertices over the dense \
                 ceiling {DENSE_VERTEX_CEILING}; pass --force to run them anyway"
            ));
        }
    }
    report.finish();
    Ok(report)
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExportWhat {
    /// Adjacency matrix of the twisted graph, Matrix Market pattern format
    Adjacency,
    /// Adjacency matrix of the local graph at the base vertex
    LocalAdjacency,
    /// Adjacency matrix of the plain Grassmann graph with the same parameters
    GrassmannAdjacency,
    /// Primitive idempotents as exact rational triplet CSVs
    Idempotents,
    /// Module catalog and merged-class tables as CSVs
    CatalogT,
}

pub fn export(q: u64, big_d: usize, what: ExportWhat, opts: &Opts) -> Result<Report> {
    let mut report = Report::new("export");
    report.input("q", q);
    report.input("D", big_d);
    let mut files = Table::new(&["file", "format", "entries"]);
    match what {
        ExportWhat::Adjacency => {
            report.input("what", "adjacency");
            let g = build_graph(q, big_d, opts)?;
            let body = emit::matrix_market_pattern_symmetric(&g.adj);
            let path = emit::write_text(&opts.out_dir, "adjacency.mtx", &body)?;
            files.push(vec![
                "adjacency.mtx".into(),
                "matrixmarket".into(),
                (g.adj.nnz() / 2).to_string(),
            ]);
            report.note(format!("wrote {}", path.display()));
        }
        ExportWhat::LocalAdjacency => {
            report.input("what", "local-adjacency");
            let g = build_graph(q, big_d, opts)?;
            let local = local_adjacency(&g);
            let body = emit::matrix_market_pattern_symmetric(&local);
            let path = emit::write_text(&opts.out_dir, "local_adjacency.mtx", &body)?;
            files.push(vec![
                "local_adjacency.mtx".into(),
                "matrixmarket".into(),
                (local.nnz() / 2).to_string(),
            ]);
            report.note(format!("wrote {}", path.display()));
        }
        ExportWhat::GrassmannAdjacency => {
            report.input("what", "grassmann-adjacency");
            let vertices = gaussian_binomial(2 * big_d as i64 + 1, big_d as i64, q);
            guard(&vertices, opts.max_points, opts.force, "graph construction")?;
            let (_, adj) = grassmann_graph(q, 2 * big_d + 1, big_d)?;
            let body = emit::matrix_market_pattern_symmetric(&adj);
            let path = emit::write_text(&opts.out_dir, "grassmann_adjacency.mtx", &body)?;
            files.push(vec![
                "grassmann_adjacency.mtx".into(),
                "matrixmarket".into(),
                (adj.nnz() / 2).to_string(),
            ]);
            report.note(format!("wrote {}", path.display()));
        }
        ExportWhat::Idempotents => {
            report.input("what", "idempotents");
            let vertices = gaussian_binomial(2 * big_d as i64 + 1, big_d as i64, q);
            guard(
                &vertices,
                opts.max_points.min(DENSE_VERTEX_CEILING),
                opts.force,
                "the dense idempotents",
            )?;
            let g = TwistedGraph::new(q, big_d)?;
            for (i, e) in primitive_idempotents(&g)?.iter().enumerate() {
                let t = emit::rational_triplets_table(e);
                let name = format!("idempotent_{i}.csv");
                let entries = t.rows.len();
                let path = emit::write_text(&opts.out_dir, &name, &t.to_csv())?;
                files.push(vec![name, "csv".into(), entries.to_string()]);
                report.note(format!("wrote {}", path.display()));
            }
        }
        ExportWhat::CatalogT => {
            report.input("what", "catalog-t");
            let catalog = t_catalog_table(q, big_d, None)?;
            let merged = t_merged_table(q, big_d)?;
            for (name, t) in [("t_catalog.csv", &catalog), ("t_merged_classes.csv", &merged)] {
                let path = emit::write_text(&opts.out_dir, name, &t.to_csv())?;
                files.push(vec![name.to_string(), "csv".into(), t.rows.len().to_string()]);
                report.note(format!("wrote {}", path.display()));
            }
        }
    }
    report.table("files", files);
    report.finish();
    Ok(report)
}
