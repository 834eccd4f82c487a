//! The twisted Grassmann graph and its Terwilliger generators.
//!
//! Vertices are the (D+1)-dimensional subspaces not inside the distinguished
//! hyperplane together with the (D-1)-dimensional subspaces inside it; two
//! vertices are adjacent when dim y + dim z - 2 dim(y ∩ z) = 2.  The graph
//! shares its intersection array with the plain Grassmann graph of
//! D-dimensional subspaces, which this module builds independently as a
//! comparator.  The adjacency matrix decomposes into four blocks expressible
//! in the nine-generator algebra of the extended ground set; those block
//! identities, the distance projectors, the exact primitive idempotents, and
//! the local spectrum at the base vertex are all verified here.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::gf::GfField;
use crate::lattice::{TripleGround, TripleOps};
use crate::qarith::{bracket, cell_size_triple, gaussian_binomial, q_pow_int, theta};
use crate::sparse::{BinMat, SparseMat};
use crate::subspace::{bit_rank, bit_rows, enumerate_subspaces, Subspace};
use crate::{Int, Rat, DEFAULT_TOL};

/// Exact dense matrix, for the idempotent and local-spectrum computations.
pub type DenseRat = Vec<Vec<Rat>>;

pub struct TwistedGraph {
    pub q: u64,
    /// Graph diameter D; the ground set lives at (a, b) = (D-1, D+1).
    pub big_d: usize,
    pub tg: TripleGround,
    pub tops: TripleOps,
    /// Ground-point ids in vertex order: the (D-1)-dimensional subspaces of
    /// the hyperplane first (cells (D-l-1, l, 0) for l = 0..D), then the
    /// (D+1)-dimensional spaces not inside it (cells (D-l, l, 1) for
    /// l = 1..=D), each cell in ground order.
    pub verts: Vec<u32>,
    /// Inverse of `verts`, indexed by ground-point id.
    pub vert_of_point: Vec<Option<u32>>,
    /// Number of leading vertices lying inside the hyperplane.
    pub n_inner: usize,
    pub adj: BinMat,
}

/// 0/1 adjacency under the dimension rule, parallel over rows.  The rule
/// handles mixed dimensions uniformly: an odd dimension sum never yields 2.
fn adjacency_by_dim_rule(field: &GfField, points: &[Subspace]) -> BinMat {
    let n = points.len();
    let dims: Vec<usize> = points.iter().map(Subspace::dim).collect();
    let rows: Vec<Vec<u32>> = if field.q == 2 {
        let bits: Vec<Vec<u64>> = points.iter().map(bit_rows).collect();
        (0..n)
            .into_par_iter()
            .map(|u| {
                let mut scratch = Vec::with_capacity(2 * dims[u] + 2);
                (0..n)
                    .filter(|&v| {
                        if v == u {
                            return false;
                        }
                        scratch.clear();
                        scratch.extend_from_slice(&bits[u]);
                        scratch.extend_from_slice(&bits[v]);
                        let join = bit_rank(&mut scratch);
                        // dim u + dim v - 2 meet = 2 join - dim u - dim v
                        2 * join == dims[u] + dims[v] + 2
                    })
                    .map(|v| v as u32)
                    .collect()
            })
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|u| {
                (0..n)
                    .filter(|&v| {
                        v != u
                            && dims[u] + dims[v]
                                == 2 * points[u].dim_meet(field, &points[v]) + 2
                    })
                    .map(|v| v as u32)
                    .collect()
            })
            .collect()
    };
    BinMat::from_entries(
        n,
        n,
        rows.into_iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.into_iter().map(move |v| (u as u32, v))),
    )
}

impl TwistedGraph {
    pub fn new(q: u64, big_d: usize) -> Result<TwistedGraph> {
        if big_d < 2 {
            return Err(Error::domain("the construction needs diameter at least 2"));
        }
        let tg = TripleGround::new(q, big_d - 1, big_d + 1)?;
        let tops = tg.ops();
        let mut verts: Vec<u32> = Vec::new();
        for l in 0..big_d {
            verts.extend_from_slice(tg.cell_ids(big_d - l - 1, l, 0));
        }
        let n_inner = verts.len();
        for l in 1..=big_d {
            verts.extend_from_slice(tg.cell_ids(big_d - l, l, 1));
        }
        let mut vert_of_point = vec![None; tg.len()];
        for (v, &pid) in verts.iter().enumerate() {
            vert_of_point[pid as usize] = Some(v as u32);
        }
        let points: Vec<Subspace> = verts
            .iter()
            .map(|&pid| tg.points[pid as usize].clone())
            .collect();
        let adj = adjacency_by_dim_rule(&tg.field, &points);
        Ok(TwistedGraph {
            q,
            big_d,
            tg,
            tops,
            verts,
            vert_of_point,
            n_inner,
            adj,
        })
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn point(&self, v: usize) -> &Subspace {
        &self.tg.points[self.verts[v] as usize]
    }

    /// Cell of a vertex in the triple grading.
    pub fn cell(&self, v: usize) -> (usize, usize, usize) {
        self.tg.cell_of[self.verts[v] as usize]
    }

    pub fn theta(&self, i: usize) -> Result<Int> {
        theta(self.q, self.big_d as u32, i as u32)
    }

    pub fn degree(&self) -> Result<usize> {
        let t0 = self.theta(0)?;
        usize::try_from(&t0).map_err(|_| Error::inconsistency("degree exceeds usize"))
    }

    /// Distance by the dimension rule.
    pub fn distance(&self, u: usize, v: usize) -> usize {
        let (yu, yv) = (self.point(u), self.point(v));
        let total = yu.dim() + yv.dim();
        let meet = yu.dim_meet(&self.tg.field, yv);
        debug_assert!(total % 2 == 0 || (total - 2 * meet) % 2 == 0);
        (total - 2 * meet) / 2
    }

    pub fn bfs_distances(&self, from: usize) -> Vec<u32> {
        bfs(&self.adj, from)
    }

    /// Distance-i projector from the base vertex, as a vertex-space diagonal.
    /// The distance equals the middle cell index, so this is the restriction
    /// of the two matching cell projectors of the ground set.
    pub fn estar_x(&self, i: usize) -> BinMat {
        let n = self.len();
        BinMat::from_entries(
            n,
            n,
            (0..n).filter_map(|v| {
                let (_, j, _) = self.cell(v);
                (j == i).then_some((v as u32, v as u32))
            }),
        )
    }

    /// Adjacency embedded into ground-point coordinates.
    pub fn adjacency_on_ground(&self) -> BinMat {
        let n = self.tg.len();
        BinMat::from_entries(
            n,
            n,
            (0..self.len()).flat_map(|u| {
                self.adj
                    .row(u)
                    .iter()
                    .map(move |&v| (self.verts[u], self.verts[v as usize]))
            }),
        )
    }
}

fn bfs(adj: &BinMat, from: usize) -> Vec<u32> {
    let n = adj.nrows;
    let mut dist = vec![u32::MAX; n];
    dist[from] = 0;
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u];
        for &v in adj.row(u) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = du + 1;
                queue.push_back(v as usize);
            }
        }
    }
    dist
}

/// Intersection numbers of a connected regular graph, demanding constancy
/// over every (base vertex, vertex) pair.  Returns (b_0..b_{diam-1},
/// c_1..c_diam).
pub fn distance_regularity_array(adj: &BinMat, diameter: usize) -> Result<(Vec<u64>, Vec<u64>)> {
    let n = adj.nrows;
    if n == 0 {
        return Err(Error::domain("empty graph"));
    }
    let base = bfs(adj, 0);
    if base.iter().any(|&d| d == u32::MAX) {
        return Err(Error::inconsistency("graph is disconnected"));
    }
    if base.iter().max().copied() != Some(diameter as u32) {
        return Err(Error::inconsistency(format!(
            "eccentricity of vertex 0 is not {diameter}"
        )));
    }
    let profile = |dist: &[u32], v: usize| -> (u64, u64, u64) {
        let dv = dist[v];
        let (mut below, mut level, mut above) = (0u64, 0u64, 0u64);
        for &w in adj.row(v) {
            let dw = dist[w as usize];
            if dw + 1 == dv {
                below += 1;
            } else if dw == dv {
                level += 1;
            } else {
                above += 1;
            }
        }
        (below, level, above)
    };
    let mut cand: Vec<Option<(u64, u64, u64)>> = vec![None; diameter + 1];
    for v in 0..n {
        let d = base[v] as usize;
        if cand[d].is_none() {
            cand[d] = Some(profile(&base, v));
        }
    }
    let cand: Vec<(u64, u64, u64)> = cand
        .into_iter()
        .map(|c| c.ok_or_else(|| Error::inconsistency("a distance level is empty")))
        .collect::<Result<_>>()?;
    let uniform = (0..n).into_par_iter().all(|s| {
        let dist = bfs(adj, s);
        dist.iter().all(|&d| d != u32::MAX)
            && (0..n).all(|v| {
                let d = dist[v] as usize;
                d <= diameter && profile(&dist, v) == cand[d]
            })
    });
    if !uniform {
        return Err(Error::inconsistency(
            "intersection numbers vary across vertex pairs",
        ));
    }
    let b: Vec<u64> = (0..diameter).map(|i| cand[i].2).collect();
    let c: Vec<u64> = (1..=diameter).map(|i| cand[i].0).collect();
    Ok((b, c))
}

/// The plain Grassmann graph on k-dimensional subspaces of an n-space.
pub fn grassmann_graph(q: u64, n: usize, k: usize) -> Result<(Vec<Subspace>, BinMat)> {
    let field = GfField::new(q)?;
    let points = enumerate_subspaces(&field, n, k);
    let adj = adjacency_by_dim_rule(&field, &points);
    Ok((points, adj))
}

/// Counting, regularity, symmetry, and distance-projector structure.
pub fn verify_graph_structure(g: &TwistedGraph) -> CheckReport {
    let mut report = CheckReport::new();
    let (q, big_d) = (g.q, g.big_d);
    let (a, b) = (big_d as i64 - 1, big_d as i64 + 1);

    let expected_total = gaussian_binomial(2 * big_d as i64 + 1, big_d as i64, q);
    report.record(
        "vertex count equals the Grassmann count",
        Int::from(g.len() as u64) == expected_total,
        format!("{} vertices, expected {expected_total}", g.len()),
    );

    let mut cells_ok = true;
    for l in 0..big_d {
        let inner = g.tg.cell_ids(big_d - l - 1, l, 0).len() as u64;
        cells_ok &=
            Int::from(inner) == cell_size_triple(a, b, a - l as i64, l as i64, 0, q);
        let outer = g.tg.cell_ids(big_d - l - 1, l + 1, 1).len() as u64;
        cells_ok &= Int::from(outer)
            == cell_size_triple(a, b, a - l as i64, l as i64 + 1, 1, q);
    }
    let inner_count: usize = (0..big_d)
        .map(|l| g.tg.cell_ids(big_d - l - 1, l, 0).len())
        .sum();
    report.record(
        "vertex cells have the predicted sizes and split at the hyperplane",
        cells_ok && inner_count == g.n_inner,
        format!("{} inside the hyperplane, {} outside", g.n_inner, g.len() - g.n_inner),
    );

    let degree = g.degree().unwrap_or(usize::MAX);
    let regular = (0..g.len()).all(|v| g.adj.row(v).len() == degree);
    report.record(
        "graph is regular of the top-eigenvalue degree",
        regular,
        format!("degree {degree}"),
    );
    report.record(
        "adjacency is symmetric with zero diagonal",
        g.adj.is_symmetric() && (0..g.len()).all(|v| !g.adj.get(v, v)),
        "",
    );

    let from_x = g.bfs_distances(0);
    let estar_ok = (0..g.len()).all(|v| {
        let (_, j, _) = g.cell(v);
        from_x[v] as usize == j && g.distance(0, v) == j
    });
    report.record(
        "distance projectors from the base vertex match the middle cell index",
        estar_ok,
        "",
    );
    let mut total = 0usize;
    let mut disjoint = true;
    let mut seen = vec![false; g.len()];
    for i in 0..=big_d {
        let proj = g.estar_x(i);
        for v in 0..g.len() {
            if proj.get(v, v) {
                disjoint &= !seen[v];
                seen[v] = true;
                total += 1;
            }
        }
    }
    report.record(
        "distance projectors resolve the identity",
        disjoint && total == g.len(),
        "",
    );
    report
}

/// BFS distances against the dimension rule, over all pairs.
pub fn verify_distance_rule(g: &TwistedGraph) -> bool {
    (0..g.len()).into_par_iter().all(|s| {
        let dist = bfs(&g.adj, s);
        (0..g.len()).all(|v| dist[v] != u32::MAX && g.distance(s, v) == dist[v] as usize)
    })
}

/// Distance regularity of the twisted graph and agreement of its
/// intersection array with the plain Grassmann graph built independently.
pub fn verify_distance_regularity(g: &TwistedGraph) -> Result<(Vec<u64>, Vec<u64>, CheckReport)> {
    let mut report = CheckReport::new();
    let (b, c) = distance_regularity_array(&g.adj, g.big_d)?;
    report.record(
        "twisted graph is distance-regular",
        true,
        format!("b = {b:?}, c = {c:?}"),
    );
    report.record(
        "distances satisfy the dimension rule",
        verify_distance_rule(g),
        "",
    );
    let (gpoints, gadj) = grassmann_graph(g.q, 2 * g.big_d + 1, g.big_d)?;
    let (gb, gc) = distance_regularity_array(&gadj, g.big_d)?;
    report.record(
        "vertex counts of the twisted and plain graphs agree",
        gpoints.len() == g.len(),
        format!("{} vs {}", g.len(), gpoints.len()),
    );
    report.record(
        "intersection arrays of the twisted and plain graphs agree",
        b == gb && c == gc,
        format!("plain: b = {gb:?}, c = {gc:?}"),
    );
    Ok((b, c, report))
}

fn mask_rows(m: &SparseMat<i64>, keep: &[bool]) -> SparseMat<i64> {
    let rows = m
        .rows
        .iter()
        .enumerate()
        .map(|(r, row)| if keep[r] { row.clone() } else { Vec::new() })
        .collect();
    SparseMat {
        nrows: m.nrows,
        ncols: m.ncols,
        rows,
    }
}

fn mask_cols(m: &SparseMat<i64>, keep: &[bool]) -> SparseMat<i64> {
    let rows = m
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .filter(|(c, _)| keep[*c as usize])
                .cloned()
                .collect()
        })
        .collect();
    SparseMat {
        nrows: m.nrows,
        ncols: m.ncols,
        rows,
    }
}

fn diag_where(n: usize, keep: &[bool], value: i64) -> SparseMat<i64> {
    SparseMat::from_triplets(
        n,
        n,
        (0..n).filter(|&i| keep[i]).map(|i| (i as u32, i as u32, value)),
    )
}

/// The four adjacency-block identities in the nine-generator algebra, plus
/// their sum recovering the whole adjacency matrix and the transpose pairing
/// of the two cross blocks.  Exact integer arithmetic throughout.
pub fn verify_adjacency_blocks(g: &TwistedGraph) -> CheckReport {
    verify_adjacency_blocks_with(g, &g.adj)
}

pub fn verify_adjacency_blocks_with(g: &TwistedGraph, adj: &BinMat) -> CheckReport {
    let mut report = CheckReport::new();
    let n = g.tg.len();
    let big_d = g.big_d;
    let q = g.q;

    // Vertex-set membership by cell: outside the hyperplane the middle
    // indices sum to D, inside to D - 1.
    let outer: Vec<bool> = g
        .tg
        .cell_of
        .iter()
        .map(|&(i, j, k)| k == 1 && i + j == big_d)
        .collect();
    let inner: Vec<bool> = g
        .tg
        .cell_of
        .iter()
        .map(|&(i, j, k)| k == 0 && i + j + 1 == big_d)
        .collect();

    let a_pt = BinMat::from_entries(
        n,
        n,
        (0..g.len()).flat_map(|u| {
            adj.row(u)
                .iter()
                .map(move |&v| (g.verts[u], g.verts[v as usize]))
        }),
    )
    .to_mat::<i64>();

    let lower_sum = g
        .tops
        .l1
        .to_mat::<i64>()
        .add(&g.tops.l2.to_mat::<i64>());
    let raise_sum = g
        .tops
        .r1
        .to_mat::<i64>()
        .add(&g.tops.r2.to_mat::<i64>());
    let lower_all = lower_sum.add(&g.tops.l3.to_mat::<i64>());
    let raise_all = raise_sum.add(&g.tops.r3.to_mat::<i64>());

    let bracket_i64 = |m: i64| -> i64 {
        i64::try_from(&bracket(m, q)).expect("small bracket value")
    };

    let outer_block = mask_rows(&a_pt, &outer);
    let inner_block = mask_rows(&a_pt, &inner);

    let a11_lhs = mask_cols(&outer_block, &outer);
    let a11_rhs = mask_rows(&raise_all, &outer)
        .mul(&mask_cols(&lower_all, &outer))
        .sub(&diag_where(n, &outer, bracket_i64(big_d as i64 + 1)));
    report.record(
        "outer-outer adjacency block matches its raise-lower expression",
        a11_lhs.sub(&a11_rhs).is_zero_matrix(),
        "",
    );

    let a12_lhs = mask_cols(&outer_block, &inner);
    let a12_rhs = mask_rows(&g.tops.r3.to_mat::<i64>(), &outer)
        .mul(&mask_cols(&raise_sum, &inner));
    report.record(
        "outer-inner adjacency block matches its double-raise expression",
        a12_lhs.sub(&a12_rhs).is_zero_matrix(),
        "",
    );

    let a21_lhs = mask_cols(&inner_block, &outer);
    let a21_rhs = mask_rows(&lower_sum, &inner)
        .mul(&mask_cols(&g.tops.l3.to_mat::<i64>(), &outer));
    report.record(
        "inner-outer adjacency block matches its double-lower expression",
        a21_lhs.sub(&a21_rhs).is_zero_matrix(),
        "",
    );

    let a22_lhs = mask_cols(&inner_block, &inner);
    let a22_rhs = mask_rows(&raise_sum, &inner)
        .mul(&mask_cols(&lower_sum, &inner))
        .sub(&diag_where(n, &inner, bracket_i64(big_d as i64 - 1)));
    report.record(
        "inner-inner adjacency block matches its raise-lower expression",
        a22_lhs.sub(&a22_rhs).is_zero_matrix(),
        "",
    );

    let total = a11_rhs.add(&a12_rhs).add(&a21_rhs).add(&a22_rhs);
    report.record(
        "the four block expressions sum to the adjacency matrix",
        total.sub(&a_pt).is_zero_matrix(),
        "",
    );
    report.record(
        "the two cross blocks are transposes of each other",
        a12_rhs.transpose().sub(&a21_rhs).is_zero_matrix(),
        "",
    );
    report
}

pub(crate) fn dense_identity(n: usize) -> DenseRat {
    (0..n)
        .map(|i| {
            let mut row = vec![Rat::zero(); n];
            row[i] = Rat::one();
            row
        })
        .collect()
}

/// `(m · (A - θI)) / denom` with a 0/1 symmetric adjacency.
fn apply_adjacency_factor(m: &DenseRat, adj: &BinMat, th: &Rat, denom: &Rat) -> DenseRat {
    let n = adj.nrows;
    m.par_iter()
        .map(|row| {
            let mut acc = vec![Rat::zero(); n];
            for (k, coef) in row.iter().enumerate() {
                if !coef.is_zero() {
                    for &c in adj.row(k) {
                        acc[c as usize] += coef;
                    }
                }
            }
            for (c, entry) in acc.iter_mut().enumerate() {
                *entry -= th * &row[c];
                *entry /= denom;
            }
            acc
        })
        .collect()
}

pub(crate) fn dense_mul(a: &DenseRat, b: &DenseRat) -> DenseRat {
    let n = b.len();
    let ncols = if n == 0 { 0 } else { b[0].len() };
    a.par_iter()
        .map(|row| {
            let mut acc = vec![Rat::zero(); ncols];
            for (k, coef) in row.iter().enumerate() {
                if !coef.is_zero() {
                    for (c, entry) in acc.iter_mut().enumerate() {
                        *entry += coef * &b[k][c];
                    }
                }
            }
            acc
        })
        .collect()
}

/// Exact spectral projectors: E_i is the Lagrange interpolation polynomial
/// of the indicator of θ_i, evaluated at the adjacency matrix.
pub fn primitive_idempotents(g: &TwistedGraph) -> Result<Vec<DenseRat>> {
    let n = g.len();
    let thetas: Vec<Rat> = (0..=g.big_d)
        .map(|i| Ok(Rat::from_integer(g.theta(i)?)))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(thetas.len());
    for i in 0..thetas.len() {
        let mut m = dense_identity(n);
        for j in 0..thetas.len() {
            if j != i {
                let denom = &thetas[i] - &thetas[j];
                m = apply_adjacency_factor(&m, &g.adj, &thetas[j], &denom);
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Idempotent, orthogonality, eigenprojection, and rank structure of the
/// exact spectral projectors; returns (θ_i, multiplicity) pairs.
pub fn verify_idempotents(g: &TwistedGraph) -> Result<(Vec<(Int, usize)>, CheckReport)> {
    let mut report = CheckReport::new();
    let n = g.len();
    let es = primitive_idempotents(g)?;

    let mut sum = dense_identity(n);
    for row in sum.iter_mut().flatten() {
        *row = Rat::zero();
    }
    for e in &es {
        for (r, row) in e.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                sum[r][c] += v;
            }
        }
    }
    report.record(
        "spectral projectors resolve the identity",
        sum == dense_identity(n),
        "",
    );

    let mut ortho = true;
    let mut idem = true;
    for i in 0..es.len() {
        for j in i..es.len() {
            let prod = dense_mul(&es[i], &es[j]);
            if i == j {
                idem &= prod == es[i];
            } else {
                ortho &= prod.iter().flatten().all(Zero::is_zero);
            }
        }
    }
    report.record("spectral projectors are idempotent", idem, "");
    report.record("spectral projectors are pairwise orthogonal", ortho, "");

    let mut eigen = true;
    let mut symmetric = true;
    for (i, e) in es.iter().enumerate() {
        let th = Rat::from_integer(g.theta(i)?);
        let one = Rat::one();
        // A·E_i = θ_i E_i, evaluated without forming A densely.
        let ae = apply_adjacency_factor(e, &g.adj, &Rat::zero(), &one);
        eigen &= (0..n).all(|r| (0..n).all(|c| ae[r][c] == &th * &e[r][c]));
        symmetric &= (0..n).all(|r| (r..n).all(|c| e[r][c] == e[c][r]));
    }
    report.record(
        "spectral projectors are symmetric eigenprojections",
        eigen && symmetric,
        "",
    );

    let mut spectrum = Vec::with_capacity(es.len());
    let mut rank_total = 0usize;
    for (i, e) in es.iter().enumerate() {
        let rank = crate::elim::rank_dense(e.clone(), DEFAULT_TOL);
        rank_total += rank;
        spectrum.push((g.theta(i)?, rank));
    }
    report.record(
        "projector ranks sum to the vertex count",
        rank_total == n,
        format!("{spectrum:?}"),
    );
    report.record(
        "the top projector has rank one",
        spectrum.first().map(|s| s.1) == Some(1),
        "",
    );
    Ok((spectrum, report))
}

/// Induced adjacency on the neighbors of the base vertex, in vertex order.
pub fn local_adjacency(g: &TwistedGraph) -> BinMat {
    let nbrs: Vec<u32> = g.adj.row(0).to_vec();
    let pos: std::collections::BTreeMap<u32, u32> = nbrs
        .iter()
        .enumerate()
        .map(|(p, &v)| (v, p as u32))
        .collect();
    BinMat::from_entries(
        nbrs.len(),
        nbrs.len(),
        nbrs.iter().enumerate().flat_map(|(p, &v)| {
            let pos = &pos;
            g.adj
                .row(v as usize)
                .iter()
                .filter_map(move |w| pos.get(w).map(|&pw| (p as u32, pw)))
        }),
    )
}

/// The five-column spectrum of the local graph at the base vertex, with
/// coinciding eigenvalues merged.
pub fn local_spectrum_table(q: u64, big_d: usize) -> Vec<(Int, Int)> {
    let d = big_d as i64;
    let br = |m: i64| bracket(m, q);
    let qp = |e: i64| q_pow_int(q, e as u32);
    let rows: [(Int, Int); 5] = [
        (
            Int::from(q) * (Int::from(1) + Int::from(q)) * br(d) - 1,
            Int::from(1),
        ),
        (qp(2) * br(d) - 1, br(d - 1)),
        (Int::from(-1), (qp(d + 1) - 1) * br(d - 1)),
        (
            Int::from(-(q as i64)) - 1,
            qp(2) * br(d - 1) * (br(d + 1) - qp(d - 1)),
        ),
        (qp(2) * br(d - 1) - 1, Int::from(q) * br(d + 1) - 1),
    ];
    let mut merged: std::collections::BTreeMap<Int, Int> = std::collections::BTreeMap::new();
    for (ev, m) in rows {
        *merged.entry(ev).or_default() += m;
    }
    merged.into_iter().collect()
}

/// Spectrum of the induced subgraph on the base vertex's neighbors, checked
/// eigenvalue by eigenvalue against the predicted table with exact kernel
/// dimensions, plus the size and trace consistency of the table itself.
pub fn verify_local_spectrum(g: &TwistedGraph) -> Result<CheckReport> {
    let mut report = CheckReport::new();
    let local = local_adjacency(g);
    let n = local.nrows;
    let degree = g.degree()?;
    report.record(
        "local graph has one vertex per neighbor",
        n == degree,
        format!("{n} vertices"),
    );

    let table = local_spectrum_table(g.q, g.big_d);
    let mass: Int = table.iter().map(|(_, m)| m.clone()).sum();
    let trace: Int = table.iter().map(|(ev, m)| ev * m).sum();
    report.record(
        "predicted spectrum has the right mass and zero trace",
        mass == Int::from(n as u64) && trace.is_zero(),
        format!("{table:?}"),
    );

    let dense: DenseRat = (0..n)
        .map(|r| {
            let mut row = vec![Rat::zero(); n];
            for &c in local.row(r) {
                row[c as usize] = Rat::one();
            }
            row
        })
        .collect();
    let mut all_match = true;
    let mut detail = String::new();
    for (ev, m) in &table {
        let mut shifted = dense.clone();
        let evr = Rat::from_integer(ev.clone());
        for (r, row) in shifted.iter_mut().enumerate() {
            row[r] -= &evr;
        }
        let nullity = crate::elim::nullity_dense(shifted, DEFAULT_TOL);
        if Int::from(nullity as u64) != *m {
            all_match = false;
            detail = format!("eigenvalue {ev}: kernel dimension {nullity}, predicted {m}");
            break;
        }
    }
    report.record(
        "local eigenvalue multiplicities match the predicted table",
        all_match,
        detail,
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_2_2() -> TwistedGraph {
        TwistedGraph::new(2, 2).expect("graph builds")
    }

    #[test]
    fn sizes_degree_and_symmetry_at_2_2() {
        let g = graph_2_2();
        assert_eq!(g.len(), 155);
        assert_eq!(g.n_inner, 15);
        assert_eq!(g.degree().expect("degree"), 42);
        let report = verify_graph_structure(&g);
        assert!(
            report.all_passed(),
            "failures: {:?}",
            report.failures().collect::<Vec<_>>()
        );
    }

    #[test]
    fn base_vertex_is_the_reference_subspace() {
        let g = graph_2_2();
        assert_eq!(g.point(0), &g.tg.x);
        assert_eq!(g.cell(0), (1, 0, 0));
    }

    #[test]
    fn eigenvalues_frozen_at_2_2() {
        let g = graph_2_2();
        let thetas: Vec<i64> = (0..=2)
            .map(|i| i64::try_from(&g.theta(i).expect("theta")).expect("small"))
            .collect();
        assert_eq!(thetas, vec![42, 11, -3]);
    }

    #[test]
    fn intersection_array_matches_the_plain_grassmann_at_2_2() {
        let g = graph_2_2();
        let (b, c, report) = verify_distance_regularity(&g).expect("regular");
        assert_eq!(b, vec![42, 24]);
        assert_eq!(c, vec![1, 9]);
        assert!(
            report.all_passed(),
            "failures: {:?}",
            report.failures().collect::<Vec<_>>()
        );
    }

    #[test]
    fn adjacency_blocks_exact_at_2_2() {
        let g = graph_2_2();
        let report = verify_adjacency_blocks(&g);
        assert!(
            report.all_passed(),
            "failures: {:?}",
            report.failures().collect::<Vec<_>>()
        );
    }

    #[test]
    fn tampered_adjacency_fails_a_block_identity() {
        let g = graph_2_2();
        // Join two vertices at distance two; the dimension rule says they
        // must not be adjacent.
        let far = (1..g.len())
            .find(|&v| g.distance(0, v) == 2)
            .expect("distance-2 vertex exists");
        let mut tampered = BinMat::from_entries(
            g.len(),
            g.len(),
            (0..g.len()).flat_map(|u| {
                g.adj
                    .row(u)
                    .iter()
                    .map(move |&v| (u as u32, v))
                    .collect::<Vec<_>>()
            }),
        );
        tampered.set(0, far);
        let report = verify_adjacency_blocks_with(&g, &tampered);
        assert!(!report.all_passed(), "tamper must be detected");
    }

    #[test]
    fn spectral_projectors_at_2_2() {
        let g = graph_2_2();
        let (spectrum, report) = verify_idempotents(&g).expect("projectors build");
        assert!(
            report.all_passed(),
            "failures: {:?}",
            report.failures().collect::<Vec<_>>()
        );
        let got: Vec<(i64, usize)> = spectrum
            .iter()
            .map(|(ev, m)| (i64::try_from(ev).expect("small"), *m))
            .collect();
        assert_eq!(got, vec![(42, 1), (11, 30), (-3, 124)]);
    }

    #[test]
    fn local_spectrum_frozen_at_2_2() {
        let g = graph_2_2();
        let table: Vec<(i64, i64)> = local_spectrum_table(2, 2)
            .into_iter()
            .map(|(ev, m)| {
                (
                    i64::try_from(&ev).expect("small"),
                    i64::try_from(&m).expect("small"),
                )
            })
            .collect();
        assert_eq!(table, vec![(-3, 20), (-1, 7), (3, 13), (11, 1), (17, 1)]);
        let report = verify_local_spectrum(&g).expect("spectrum verifies");
        assert!(
            report.all_passed(),
            "failures: {:?}",
            report.failures().collect::<Vec<_>>()
        );
    }
}
