//! Characters of the hyperplane translation group and the irreducible
//! module catalog of the nine-generator algebra on the extended ground set.
//!
//! The ambient space carries a distinguished hyperplane H (the coordinate
//! prefix of codimension one).  The unimodular maps fixing H pointwise form
//! an abelian group isomorphic to the additive group of H; its characters
//! split the span of the points outside H into isotypic components.  Each
//! nontrivial character supports a lifting map from a smaller pair ground
//! into the extended ground, and those maps transport the two-operator
//! module catalog into the three-operator one.  Everything here is checked
//! two ways: brute-force sums over the group against closed-form case
//! formulas, and abstract action coefficients against concretely built
//! submodules.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::gf::GfField;
use crate::hcatalog::{concrete_h_module, HClass};
use crate::lattice::{PairGround, PairOps, TripleGround, TripleOps};
use crate::qarith::{
    bracket, cell_size_pair, cell_size_triple, choose2, gaussian_binomial, poch_q, q_pow,
    q_pow_int, rat_to_positive_int, subspace_count,
};
use crate::scalar::Scalar;
use crate::sparse::{apply_transposed_bin, row_add_scaled, scale_sparse, BinMat, SparseMat};
use crate::subspace::{all_vectors, Subspace};
use crate::{Cpx, Int, Rat, INT_SNAP_TOL};

/// The abelian group of unimodular maps fixing the distinguished hyperplane
/// pointwise.  An element is indexed by its translation vector alpha: it
/// fixes the first a+b coordinate vectors and adds alpha to the last one.
pub struct GroupModel {
    pub field: GfField,
    pub a: usize,
    pub b: usize,
    /// All translation vectors, the zero vector first.
    pub alphas: Vec<Vec<u16>>,
}

impl GroupModel {
    pub fn new(field: GfField, a: usize, b: usize) -> GroupModel {
        let mut alphas = all_vectors(field.q as usize, a + b);
        alphas.sort();
        GroupModel {
            field,
            a,
            b,
            alphas,
        }
    }

    pub fn order(&self) -> usize {
        self.alphas.len()
    }

    /// Size of the subgroup translating along the reference subspace.
    pub fn k_order(&self) -> usize {
        (self.field.q as usize).pow(self.a as u32)
    }

    pub fn is_identity(&self, alpha: &[u16]) -> bool {
        alpha.iter().all(|&t| t == 0)
    }

    /// True when the translation direction lies inside the reference
    /// subspace (the first a coordinates carry the whole vector).
    pub fn in_k(&self, alpha: &[u16]) -> bool {
        alpha[self.a..].iter().all(|&t| t == 0)
    }

    /// Image of a subspace: each spanning vector keeps its last coordinate t
    /// and gains t * alpha on the hyperplane coordinates.
    pub fn apply(&self, alpha: &[u16], y: &Subspace) -> Subspace {
        let n = self.a + self.b + 1;
        debug_assert_eq!(y.ambient(), n);
        y.transform(&self.field, |v| {
            let mut w = v.to_vec();
            let t = v[n - 1];
            if t != 0 {
                for (m, &am) in alpha.iter().enumerate() {
                    w[m] = self.field.add(w[m], self.field.mul(t, am));
                }
            }
            w
        })
    }
}

/// Kind of a group element, the case split of the fixed-point counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementKind {
    Identity,
    /// Translation direction inside the reference subspace, not the identity.
    InsideK,
    OutsideK,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CharClass {
    Trivial,
    /// Nontrivial, but restricting to the trivial character on K.
    KTrivial,
    /// Restriction to K is already nontrivial.
    KNontrivial,
}

/// Additive character labeled by a vector c: its value on the translation
/// by alpha is the primitive p-th root of unity raised to Tr(c . alpha).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Character {
    pub c: Vec<u16>,
}

impl Character {
    pub fn class(&self, a: usize) -> CharClass {
        let head_zero = self.c[..a].iter().all(|&t| t == 0);
        let tail_zero = self.c[a..].iter().all(|&t| t == 0);
        match (head_zero, tail_zero) {
            (true, true) => CharClass::Trivial,
            (true, false) => CharClass::KTrivial,
            (false, _) => CharClass::KNontrivial,
        }
    }

    /// Exponent of the primitive p-th root of unity at one translation.
    pub fn exponent(&self, field: &GfField, alpha: &[u16]) -> u64 {
        let mut dot = 0u16;
        for (&cm, &am) in self.c.iter().zip(alpha) {
            dot = field.add(dot, field.mul(cm, am));
        }
        field.trace(dot) as u64
    }

    pub fn value<S: Scalar>(&self, field: &GfField, alpha: &[u16]) -> Result<S> {
        root_of_unity_checked(field.p as u64, self.exponent(field, alpha))
    }
}

fn root_of_unity_checked<S: Scalar>(p: u64, k: u64) -> Result<S> {
    S::root_of_unity(p, k).ok_or_else(|| {
        Error::domain("character values in odd characteristic need complex scalars")
    })
}

/// Fixed-point count of one group element on the cell (i, j, 1).
pub fn psi_formula(a: usize, b: usize, i: usize, j: usize, kind: ElementKind, q: u64) -> Int {
    let (a, b, i, j) = (a as i64, b as i64, i as i64, j as i64);
    match kind {
        ElementKind::Identity => cell_size_triple(a, b, i, j, 1, q),
        ElementKind::InsideK => {
            let binom = gaussian_binomial(a - 1, i - 1, q) * gaussian_binomial(b, j, q);
            if binom.is_zero() {
                return binom;
            }
            q_pow_int(q, ((a - i) * j + (a + b - i - j)) as u32) * binom
        }
        ElementKind::OutsideK => {
            let binom = gaussian_binomial(a, i, q) * gaussian_binomial(b - 1, j - 1, q);
            if binom.is_zero() {
                return binom;
            }
            q_pow_int(q, ((a - i) * (j - 1) + (a + b - i - j)) as u32) * binom
        }
    }
}

/// Inner product of a character against the permutation character of the
/// cell (i, j, 1), by the three-case closed formula.
pub fn psi_inner_formula(
    a: usize,
    b: usize,
    i: usize,
    j: usize,
    class: CharClass,
    q: u64,
) -> Int {
    let (a, b, i, j) = (a as i64, b as i64, i as i64, j as i64);
    match class {
        CharClass::Trivial => cell_size_pair(a, b, i, j, q),
        CharClass::KTrivial => {
            let binom = gaussian_binomial(a, i, q) * gaussian_binomial(b - 1, j, q);
            if binom.is_zero() {
                return binom;
            }
            q_pow_int(q, ((a - i) * j) as u32) * binom
        }
        CharClass::KNontrivial => {
            let binom = gaussian_binomial(a - 1, i, q) * gaussian_binomial(b, j, q);
            if binom.is_zero() {
                return binom;
            }
            q_pow_int(q, ((a - i - 1) * j) as u32) * binom
        }
    }
}

/// Shared scene: the triple-graded ground with its six operators, the
/// translation group, and the fixed complement line used to lift hyperplane
/// subspaces out of the k = 0 layer.
pub struct HtContext {
    pub tg: TripleGround,
    pub tops: TripleOps,
    pub gm: GroupModel,
    pub u: Subspace,
}

impl HtContext {
    pub fn new(q: u64, a: usize, b: usize) -> Result<HtContext> {
        let tg = TripleGround::new(q, a, b)?;
        let tops = tg.ops();
        let gm = GroupModel::new(tg.field.clone(), a, b);
        let n = a + b + 1;
        let mut row = vec![0u16; n];
        row[n - 1] = 1;
        let u = Subspace::from_rows(&tg.field, n, &[row]);
        Ok(HtContext { tg, tops, gm, u })
    }

    pub fn q(&self) -> u64 {
        self.tg.field.q as u64
    }
}

/// Image of the idempotent attached to `chi` on a single point outside the
/// hyperplane, as a sparse vector over the extended ground.
pub fn e_chi_apply_point<S: Scalar>(
    ctx: &HtContext,
    chi: &Character,
    y: &Subspace,
    tol: f64,
) -> Result<Vec<(u32, S)>> {
    let p = ctx.tg.field.p as u64;
    let order = S::from_i64(ctx.gm.order() as i64);
    let mut acc: BTreeMap<u32, S> = BTreeMap::new();
    for alpha in &ctx.gm.alphas {
        // The inverse of a translation negates the exponent.
        let e = chi.exponent(&ctx.tg.field, alpha);
        let coef: S = root_of_unity_checked(p, (p - e % p) % p)?;
        let z = ctx.gm.apply(alpha, y);
        let id = ctx
            .tg
            .id_of(&z)
            .ok_or_else(|| Error::inconsistency("translation image left the ground set"))?;
        let slot = acc.entry(id).or_insert_with(S::zero);
        *slot = slot.clone() + coef;
    }
    Ok(acc
        .into_iter()
        .map(|(id, v)| (id, v / order.clone()))
        .filter(|(_, v)| !v.is_negligible(tol))
        .collect())
}

/// The lifting map attached to a nontrivial character: each subspace of the
/// support hyperplane goes to the idempotent image of its join with the
/// fixed complement line.
pub struct ThetaChi<S: Scalar> {
    pub chi: Character,
    pub class: CharClass,
    /// Unique maximal support: images are nonzero exactly on its subspaces.
    pub h_chi: Subspace,
    /// Sub-ambient pair ground living on the support hyperplane.
    pub pair: PairGround,
    /// Matrix of the map from the pair ground into the extended ground.
    pub theta: SparseMat<S>,
}

pub fn theta_chi<S: Scalar>(ctx: &HtContext, chi: &Character, tol: f64) -> Result<ThetaChi<S>> {
    let class = chi.class(ctx.gm.a);
    let (a, b) = (ctx.gm.a, ctx.gm.b);
    let field = &ctx.tg.field;
    let (ci, cj) = match class {
        CharClass::Trivial => {
            return Err(Error::domain("the trivial character has no lifting map"))
        }
        CharClass::KTrivial => (a, b - 1),
        CharClass::KNontrivial => (a - 1, b),
    };
    let mut support = Vec::new();
    for &yid in ctx.tg.cell_ids(ci, cj, 0) {
        let y = &ctx.tg.points[yid as usize];
        let img = e_chi_apply_point::<S>(ctx, chi, &y.join(field, &ctx.u), tol)?;
        if !img.is_empty() {
            support.push(y.clone());
        }
    }
    if support.len() != 1 {
        return Err(Error::inconsistency(format!(
            "expected a unique support hyperplane for the lifting map, found {}",
            support.len()
        )));
    }
    let h_chi = support.pop().expect("just checked length");
    let x_ref = match class {
        CharClass::KTrivial => ctx.tg.x.clone(),
        _ => ctx.tg.x.meet(field, &h_chi),
    };
    let pair = PairGround::in_space(field.clone(), h_chi.clone(), x_ref)?;
    let mut triplets = Vec::new();
    for (pid, y) in pair.points.iter().enumerate() {
        let img = e_chi_apply_point::<S>(ctx, chi, &y.join(field, &ctx.u), tol)?;
        if img.is_empty() {
            return Err(Error::inconsistency(
                "lifting map vanished on a subspace of its support hyperplane",
            ));
        }
        for (row, coef) in img {
            triplets.push((row, pid as u32, coef));
        }
    }
    let theta = SparseMat::from_triplets(ctx.tg.len(), pair.len(), triplets);
    Ok(ThetaChi {
        chi: chi.clone(),
        class,
        h_chi,
        pair,
        theta,
    })
}

/// The hyperplane pair ground together with its inclusion as the k = 0
/// layer: a 0/1 matrix and the plain id translation table.
pub fn hyperplane_layer(ctx: &HtContext) -> Result<(PairGround, BinMat, Vec<u32>)> {
    let pair = PairGround::in_space(ctx.tg.field.clone(), ctx.tg.h.clone(), ctx.tg.x.clone())?;
    let mut ids = Vec::with_capacity(pair.len());
    for y in &pair.points {
        let id = ctx
            .tg
            .id_of(y)
            .ok_or_else(|| Error::inconsistency("layer point missing from the ground set"))?;
        ids.push(id);
    }
    let incl = BinMat::from_entries(
        ctx.tg.len(),
        pair.len(),
        ids.iter().enumerate().map(|(pid, &id)| (id, pid as u32)),
    );
    Ok((pair, incl, ids))
}

fn mats_equal<S: Scalar>(lhs: &SparseMat<S>, rhs: &SparseMat<S>, tol: f64) -> bool {
    if S::EXACT {
        lhs.sub(rhs).is_zero_matrix()
    } else {
        lhs.max_diff(rhs) <= tol
    }
}

fn mat_vanishes<S: Scalar>(m: &SparseMat<S>, tol: f64) -> bool {
    if S::EXACT {
        m.is_zero_matrix()
    } else {
        m.max_magnitude() <= tol
    }
}

/// Identities tying the k-layer inclusion to the raising-3 operator: the
/// composite intertwines the four pair operators (with a factor q on the
/// raising side), squares to zero, and lands entirely in the k = 1 layer
/// with the graded diagonal as its left inverse.
pub fn verify_raising_layer_identities(ctx: &HtContext, report: &mut CheckReport) -> Result<()> {
    let (pair, incl, _) = hyperplane_layer(ctx)?;
    let pops = pair.ops();
    let (a, b) = (ctx.gm.a, ctx.gm.b);
    let q = ctx.q() as i64;
    let lift = ctx.tops.r3.mul_bin(&incl);
    let incl_m = incl.to_mat::<i64>();

    let pairs = [
        ("lowering-1", &ctx.tops.l1, &pops.l1, 1i64),
        ("lowering-2", &ctx.tops.l2, &pops.l2, 1),
        ("raising-1", &ctx.tops.r1, &pops.r1, q),
        ("raising-2", &ctx.tops.r2, &pops.r2, q),
    ];
    for (name, big, small, factor) in pairs {
        let lhs = big.to_mat::<i64>().mul(&lift);
        let rhs = lift.mul(&small.to_mat::<i64>()).scale(&factor);
        report.record(
            format!("k-layer lift intertwines {name} (factor {factor})"),
            lhs.sub(&rhs).is_zero_matrix(),
            "",
        );
    }

    // Lowering-3 recovers the layer with the graded scalar q^{a+b-i-j}.
    let diag = SparseMat::from_triplets(
        pair.len(),
        pair.len(),
        pair.cell_of
            .iter()
            .enumerate()
            .map(|(pid, &(i, j))| {
                let e = (a + b - i - j) as u32;
                (pid as u32, pid as u32, i64::pow(q, e))
            })
            .collect::<Vec<_>>(),
    );
    let lhs = ctx.tops.l3.to_mat::<i64>().mul(&lift);
    let rhs = incl_m.mul(&diag);
    report.record(
        "lowering-3 after the lift scales each cell by its layer degree",
        lhs.sub(&rhs).is_zero_matrix(),
        "",
    );

    report.record(
        "raising-3 squares to zero",
        ctx.tops.r3.mul_bin(&ctx.tops.r3).is_zero_matrix(),
        "",
    );

    let mut k0_dead = true;
    let mut k1_match = true;
    for i in 0..=a {
        for j in 0..=b {
            let left0 = ctx.tg.estar(i, j, 0).to_mat::<i64>().mul(&lift);
            k0_dead &= left0.is_zero_matrix();
            let left1 = ctx.tg.estar(i, j, 1).to_mat::<i64>().mul(&lift);
            let right = lift.mul(&pair.estar(i, j).to_mat::<i64>());
            k1_match &= left1.sub(&right).is_zero_matrix();
        }
    }
    report.record("lifted vectors have no k = 0 component", k0_dead, "");
    report.record("cell projectors commute through the lift", k1_match, "");
    Ok(())
}

/// Identities of one lifting map: it intertwines the sub-ambient operators
/// (factor q on the lowering side), kills lowering-3 and raising-3, and
/// matches cell projectors; its columns are nonzero with disjoint supports,
/// so the isotypic component has the sub-ambient ground's dimension.
pub fn verify_lifting_map_identities<S: Scalar>(
    ctx: &HtContext,
    chi: &Character,
    tol: f64,
) -> Result<(ThetaChi<S>, Vec<String>)> {
    let th = theta_chi::<S>(ctx, chi, tol)?;
    let pops = th.pair.ops();
    let q_s = S::from_i64(ctx.q() as i64);
    let (a, b) = (ctx.gm.a, ctx.gm.b);
    let theta = &th.theta;
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };

    let pairs = [
        ("lowering-1 intertwine", &ctx.tops.l1, &pops.l1, true),
        ("lowering-2 intertwine", &ctx.tops.l2, &pops.l2, true),
        ("raising-1 intertwine", &ctx.tops.r1, &pops.r1, false),
        ("raising-2 intertwine", &ctx.tops.r2, &pops.r2, false),
    ];
    for (name, big, small, scaled) in pairs {
        let lhs = big.to_mat::<S>().mul(theta);
        let mut rhs = theta.mul(&small.to_mat::<S>());
        if scaled {
            rhs = rhs.scale(&q_s);
        }
        check(name, mats_equal(&lhs, &rhs, tol));
    }
    check(
        "lowering-3 annihilates",
        mat_vanishes(&ctx.tops.l3.to_mat::<S>().mul(theta), tol),
    );
    check(
        "raising-3 annihilates",
        mat_vanishes(&ctx.tops.r3.to_mat::<S>().mul(theta), tol),
    );

    let mut k0_dead = true;
    let mut excluded_dead = true;
    let mut blocks_match = true;
    for i in 0..=a {
        for j in 0..=b {
            let left0 = ctx.tg.estar(i, j, 0).to_mat::<S>().mul(theta);
            k0_dead &= mat_vanishes(&left0, tol);
            let excluded = match th.class {
                CharClass::KTrivial => j == b,
                _ => i == a,
            };
            let left1 = ctx.tg.estar(i, j, 1).to_mat::<S>().mul(theta);
            if excluded {
                excluded_dead &= mat_vanishes(&left1, tol);
            } else {
                let right = theta.mul(&th.pair.estar(i, j).to_mat::<S>());
                blocks_match &= mats_equal(&left1, &right, tol);
            }
        }
    }
    check("no k = 0 component", k0_dead);
    check("excluded cells vanish", excluded_dead);
    check("cell projectors commute through", blocks_match);

    // Disjoint supports: no ground point receives from two columns.
    check(
        "column supports are disjoint",
        theta.rows.iter().all(|r| r.len() <= 1),
    );
    let expected_dim = subspace_count((a + b - 1) as u32, ctx.q());
    check(
        "isotypic dimension matches the sub-ambient ground",
        Int::from(th.pair.len() as u64) == expected_dim,
    );
    Ok((th, failures))
}

/// All displayed operator identities: the k-layer case plus one lifting map
/// per nontrivial character.
pub fn verify_operator_transport(q: u64, a: usize, b: usize, tol: f64) -> Result<CheckReport> {
    let field = GfField::new(q)?;
    if field.p == 2 {
        verify_operator_transport_impl::<Rat>(q, a, b, tol)
    } else {
        verify_operator_transport_impl::<Cpx>(q, a, b, tol)
    }
}

fn verify_operator_transport_impl<S: Scalar>(
    q: u64,
    a: usize,
    b: usize,
    tol: f64,
) -> Result<CheckReport> {
    let ctx = HtContext::new(q, a, b)?;
    let mut report = CheckReport::new();
    verify_raising_layer_identities(&ctx, &mut report)?;
    for c in all_vectors(q as usize, a + b) {
        let chi = Character { c };
        if chi.class(a) == CharClass::Trivial {
            continue;
        }
        let (th, failures) = verify_lifting_map_identities::<S>(&ctx, &chi, tol)?;
        report.record(
            format!(
                "lifting-map identities for character {:?} ({:?})",
                chi.c, th.class
            ),
            failures.is_empty(),
            failures.join("; "),
        );
    }
    Ok(report)
}

/// Brute-force character sweep: fixed-point counts against the case formula,
/// inner products against the case formula, idempotent supports against the
/// stabilizer criterion, and the resolution of the identity.
pub fn verify_characters(q: u64, a: usize, b: usize, tol: f64) -> Result<CheckReport> {
    let field = GfField::new(q)?;
    if field.p == 2 {
        character_sweep::<Rat>(&HtContext::new(q, a, b)?, tol)
    } else {
        character_sweep::<Cpx>(&HtContext::new(q, a, b)?, tol)
    }
}

fn character_sweep<S: Scalar>(ctx: &HtContext, tol: f64) -> Result<CheckReport> {
    let mut report = CheckReport::new();
    let gm = &ctx.gm;
    let field = &ctx.tg.field;
    let p = field.p as u64;
    let (a, b) = (gm.a, gm.b);
    let q = ctx.q();
    let order = gm.order();
    let roots: Vec<S> = (0..p)
        .map(|k| root_of_unity_checked(p, k))
        .collect::<Result<Vec<_>>>()?;

    // Points outside the hyperplane, with their cells.
    let p1: Vec<(u32, (usize, usize))> = ctx
        .tg
        .cells()
        .filter(|((_, _, k), _)| *k == 1)
        .flat_map(|(&(i, j, _), ids)| ids.iter().map(move |&id| (id, (i, j))))
        .collect();

    let kinds: Vec<ElementKind> = gm
        .alphas
        .iter()
        .map(|al| {
            if gm.is_identity(al) {
                ElementKind::Identity
            } else if gm.in_k(al) {
                ElementKind::InsideK
            } else {
                ElementKind::OutsideK
            }
        })
        .collect();
    let inside = kinds.iter().filter(|k| **k == ElementKind::InsideK).count();
    let outside = kinds
        .iter()
        .filter(|k| **k == ElementKind::OutsideK)
        .count();
    report.record(
        "group splits into identity, K, and complement of the right sizes",
        order == (q as usize).pow((a + b) as u32)
            && inside + 1 == gm.k_order()
            && outside == order - gm.k_order(),
        format!("|G| = {order}, |K| = {}", gm.k_order()),
    );

    let chars: Vec<Character> = gm
        .alphas
        .iter()
        .map(|c| Character { c: c.clone() })
        .collect();
    let n_ktrivial = chars
        .iter()
        .filter(|ch| ch.class(a) == CharClass::KTrivial)
        .count();
    let n_knontriv = chars
        .iter()
        .filter(|ch| ch.class(a) == CharClass::KNontrivial)
        .count();
    report.record(
        "character classes have sizes 1, q^b - 1, q^(a+b) - q^b",
        n_ktrivial == (q as usize).pow(b as u32) - 1
            && n_knontriv == order - (q as usize).pow(b as u32),
        format!("K-trivial: {n_ktrivial}, K-nontrivial: {n_knontriv}"),
    );

    // Permutation table of the group on the outside points.
    let perm: Vec<Vec<u32>> = gm
        .alphas
        .par_iter()
        .map(|alpha| {
            p1.iter()
                .map(|(id, _)| {
                    let z = gm.apply(alpha, &ctx.tg.points[*id as usize]);
                    ctx.tg
                        .id_of(&z)
                        .expect("translation image stays in the ground set")
                })
                .collect()
        })
        .collect();

    // Fixed-point counts per element and cell, against the case formula.
    let cells1: Vec<(usize, usize)> = {
        let mut v: Vec<_> = p1.iter().map(|&(_, c)| c).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut psi: Vec<BTreeMap<(usize, usize), i64>> = Vec::with_capacity(order);
    for images in &perm {
        let mut counts: BTreeMap<(usize, usize), i64> =
            cells1.iter().map(|&c| (c, 0)).collect();
        for (pos, &(id, cell)) in p1.iter().enumerate() {
            if images[pos] == id {
                *counts.get_mut(&cell).expect("cell preregistered") += 1;
            }
        }
        psi.push(counts);
    }
    let mut psi_ok = true;
    let mut psi_bad = None;
    for (ai, counts) in psi.iter().enumerate() {
        for (&(i, j), &got) in counts {
            if psi_formula(a, b, i, j, kinds[ai], q) != Int::from(got) {
                psi_ok = false;
                psi_bad.get_or_insert(format!("element {ai}, cell ({i}, {j})"));
            }
        }
    }
    report.record(
        "fixed-point counts match the three-case formula",
        psi_ok,
        psi_bad.unwrap_or_default(),
    );

    // Inner products, brute sum against the case formula.
    let exps: Vec<Vec<u64>> = chars
        .par_iter()
        .map(|ch| {
            gm.alphas
                .iter()
                .map(|al| ch.exponent(field, al))
                .collect()
        })
        .collect();
    let mut inner_ok = true;
    let mut inner_bad = None;
    for (ci, ch) in chars.iter().enumerate() {
        let class = ch.class(a);
        for &(i, j) in &cells1 {
            let mut s = S::zero();
            for ai in 0..order {
                let conj = roots[((p - exps[ci][ai]) % p) as usize].clone();
                s = s + conj * S::from_i64(psi[ai][&(i, j)]);
            }
            s = s / S::from_i64(order as i64);
            let snapped = s.to_integer(INT_SNAP_TOL);
            if snapped.as_ref() != Some(&psi_inner_formula(a, b, i, j, class, q)) {
                inner_ok = false;
                inner_bad.get_or_insert(format!("character {ci}, cell ({i}, {j})"));
            }
        }
    }
    report.record(
        "character inner products match the three-case formula",
        inner_ok,
        inner_bad.unwrap_or_default(),
    );

    // Idempotent supports and the resolution of the identity, pointwise.
    let point_results: Vec<(bool, bool)> = (0..p1.len())
        .into_par_iter()
        .map(|pos| {
            let yid = p1[pos].0;
            let mut orbit: Vec<u32> = (0..order).map(|ai| perm[ai][pos]).collect();
            orbit.sort_unstable();
            orbit.dedup();
            let slots: Vec<usize> = (0..order)
                .map(|ai| {
                    orbit
                        .binary_search(&perm[ai][pos])
                        .expect("image is in the orbit")
                })
                .collect();
            let stab: Vec<usize> = (0..order).filter(|&ai| perm[ai][pos] == yid).collect();
            let big_tol = tol * order as f64;
            let mut support_ok = true;
            let mut sums: Vec<S> = vec![S::zero(); orbit.len()];
            let mut scratch: Vec<S> = vec![S::zero(); orbit.len()];
            for ce in exps.iter() {
                for s in scratch.iter_mut() {
                    *s = S::zero();
                }
                for ai in 0..order {
                    let conj = roots[((p - ce[ai]) % p) as usize].clone();
                    let k = slots[ai];
                    scratch[k] = scratch[k].clone() + conj;
                }
                let trivial_on_stab = stab.iter().all(|&ai| ce[ai] == 0);
                let nonzero = scratch.iter().any(|s| !s.is_negligible(big_tol));
                support_ok &= nonzero == trivial_on_stab;
                for (k, s) in scratch.iter().enumerate() {
                    sums[k] = sums[k].clone() + s.clone();
                }
            }
            let mut resolution_ok = true;
            for (k, s) in sums.iter().enumerate() {
                let target = if orbit[k] == yid {
                    S::from_i64(order as i64)
                } else {
                    S::zero()
                };
                resolution_ok &= (s.clone() - target).is_negligible(big_tol);
            }
            (support_ok, resolution_ok)
        })
        .collect();
    report.record(
        "idempotent image is nonzero exactly when the stabilizer is killed",
        point_results.iter().all(|r| r.0),
        "",
    );
    report.record(
        "idempotents resolve the identity on the outside points",
        point_results.iter().all(|r| r.1),
        "",
    );
    Ok(report)
}

/// Descriptor of an irreducible module of the nine-generator algebra: the
/// lower endpoint (nu, mu, tau) and the index rho.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct HtClass {
    pub a: usize,
    pub b: usize,
    pub nu: usize,
    pub mu: usize,
    pub tau: usize,
    pub rho: usize,
}

/// Generators in display order: three lowering, three raising.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HtGen {
    L1,
    L2,
    L3,
    R1,
    R2,
    R3,
}

pub const HT_GENS: [HtGen; 6] = [
    HtGen::L1,
    HtGen::L2,
    HtGen::L3,
    HtGen::R1,
    HtGen::R2,
    HtGen::R3,
];

impl HtClass {
    pub fn is_valid(&self) -> bool {
        let (a, b) = (self.a as i64, self.b as i64);
        let (nu, mu, tau, rho) = (
            self.nu as i64,
            self.mu as i64,
            self.tau as i64,
            self.rho as i64,
        );
        (0..=a).contains(&nu)
            && (0..=b).contains(&mu)
            && (0..=1).contains(&tau)
            && rho >= 0.max(2 * mu - b + tau)
            && rho <= (a - 2 * nu).min(mu + tau)
    }

    /// The k-layer class with the same grid (meaningful for tau = 0).
    pub fn layer_class(&self) -> HClass {
        HClass {
            a: self.a,
            b: self.b,
            nu: self.nu,
            mu: self.mu,
            rho: self.rho,
        }
    }

    pub fn i_range(&self) -> std::ops::RangeInclusive<usize> {
        self.nu..=(self.a - self.nu - self.rho)
    }

    pub fn j_range(&self) -> std::ops::RangeInclusive<usize> {
        // Sums first: the subtrahends can exceed the leading term alone.
        self.mu..=(self.b + self.rho - self.mu - self.tau)
    }

    pub fn k_range(&self) -> std::ops::RangeInclusive<usize> {
        self.tau..=1
    }

    /// Upper endpoint; the third coordinate is always 1.
    pub fn upper_endpoint(&self) -> (usize, usize, usize) {
        (
            self.a - self.nu - self.rho,
            self.b + self.rho - self.mu - self.tau,
            1,
        )
    }

    pub fn dim(&self) -> usize {
        let rows = self.a + 1 - 2 * self.nu - self.rho;
        match self.tau {
            0 => 2 * rows * (self.b + self.rho + 1 - 2 * self.mu),
            _ => rows * (self.b + self.rho - 2 * self.mu),
        }
    }

    pub fn multiplicity(&self, q: u64) -> Result<Int> {
        if self.tau == 0 {
            return self.layer_class().multiplicity(q);
        }
        let (a, b) = (self.a as i64, self.b as i64);
        let (nu, mu, rho) = (self.nu as i64, self.mu as i64, self.rho as i64);
        let sign = if rho % 2 == 0 {
            Int::from(-1)
        } else {
            Int::from(1)
        };
        let one = Int::from(1);
        let extra = q_pow_int(q, (b + 2) as u32) - q_pow_int(q, (b - mu + 1) as u32)
            - q_pow_int(q, (mu - rho + 1) as u32)
            + &one;
        let num = sign
            * poch_q(q, a as u32)
            * poch_q(q, b as u32)
            * (&one - q_pow_int(q, (a - 2 * nu - rho + 1) as u32))
            * (&one - q_pow_int(q, (b - 2 * mu + rho) as u32))
            * extra;
        let den = poch_q(q, (a - nu - rho + 1) as u32)
            * poch_q(q, (b - mu + 1) as u32)
            * poch_q(q, nu as u32)
            * poch_q(q, (mu - rho + 1) as u32)
            * poch_q(q, rho as u32);
        let m = Rat::new(num, den) * q_pow(q, nu + mu - rho + choose2(rho));
        rat_to_positive_int(
            &m,
            &format!(
                "multiplicity of class (nu={}, mu={}, tau=1, rho={}) at (a={}, b={})",
                self.nu, self.mu, self.rho, self.a, self.b
            ),
        )
    }

    /// Basis indices in lexicographic order.
    pub fn basis_keys(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::with_capacity(self.dim());
        for i in self.i_range() {
            for j in self.j_range() {
                for k in self.k_range() {
                    out.push((i, j, k));
                }
            }
        }
        out
    }

    /// Displayed action of one generator on the basis vector at (i, j, k):
    /// the coefficient and the receiving index, normalized to zero when the
    /// image leaves the basis grid.
    pub fn action(
        &self,
        q: u64,
        gen: HtGen,
        i: usize,
        j: usize,
        k: usize,
    ) -> (Rat, Option<(usize, usize, usize)>) {
        let (av, bv) = (self.a as i64, self.b as i64);
        let (nu, mu, rho) = (self.nu as i64, self.mu as i64, self.rho as i64);
        let (iv, jv, kv) = (i as i64, j as i64, k as i64);
        let (coef, target) = match (gen, self.tau) {
            (HtGen::L1, 0) => (
                q_pow(q, nu + jv)
                    * Rat::from_integer(
                        bracket(av - nu - rho - iv + 1, q) * bracket(iv - nu, q),
                    ),
                (iv - 1, jv, kv),
            ),
            (HtGen::L1, _) => (
                q_pow(q, nu + jv + 1)
                    * Rat::from_integer(
                        bracket(av - nu - rho - iv + 1, q) * bracket(iv - nu, q),
                    ),
                (iv - 1, jv, kv),
            ),
            (HtGen::L2, 0) => (
                q_pow(q, av - nu + mu - rho)
                    * Rat::from_integer(
                        bracket(bv - mu + rho - jv + 1, q) * bracket(jv - mu, q),
                    ),
                (iv, jv - 1, kv),
            ),
            (HtGen::L2, _) => (
                q_pow(q, av - nu + mu - rho + 1)
                    * Rat::from_integer(bracket(bv - mu + rho - jv, q) * bracket(jv - mu, q)),
                (iv, jv - 1, kv),
            ),
            (HtGen::L3, 0) => (q_pow(q, av + bv - iv - jv), (iv, jv, kv - 1)),
            (HtGen::L3, _) => (Rat::zero(), (iv, jv, kv)),
            (HtGen::R1, 0) => (q_pow(q, kv), (iv + 1, jv, kv)),
            (HtGen::R1, _) => (Rat::one(), (iv + 1, jv, kv)),
            (HtGen::R2, 0) => (q_pow(q, nu - iv + kv), (iv, jv + 1, kv)),
            (HtGen::R2, _) => (q_pow(q, nu - iv), (iv, jv + 1, kv)),
            (HtGen::R3, 0) => (Rat::one(), (iv, jv, kv + 1)),
            (HtGen::R3, _) => (Rat::zero(), (iv, jv, kv)),
        };
        let (ti, tj, tk) = target;
        let in_grid = !coef.is_zero()
            && ti >= *self.i_range().start() as i64
            && ti <= *self.i_range().end() as i64
            && tj >= *self.j_range().start() as i64
            && tj <= *self.j_range().end() as i64
            && tk >= self.tau as i64
            && tk <= 1;
        if in_grid {
            (coef, Some((ti as usize, tj as usize, tk as usize)))
        } else {
            (Rat::zero(), None)
        }
    }

    /// Matrices of the six generators on the abstract basis, in the order
    /// of [`HT_GENS`].
    pub fn action_matrices(&self, q: u64) -> [SparseMat<Rat>; 6] {
        let keys = self.basis_keys();
        let pos: BTreeMap<(usize, usize, usize), usize> = keys
            .iter()
            .enumerate()
            .map(|(idx, &key)| (key, idx))
            .collect();
        HT_GENS.map(|gen| {
            let mut triplets = Vec::new();
            for (src, &(i, j, k)) in keys.iter().enumerate() {
                if let (coef, Some(t)) = self.action(q, gen, i, j, k) {
                    triplets.push((pos[&t] as u32, src as u32, coef));
                }
            }
            SparseMat::from_triplets(keys.len(), keys.len(), triplets)
        })
    }
}

/// All valid descriptors at `(a, b)`, ordered by `(nu, mu, tau, rho)`.
pub fn enumerate_ht_classes(a: usize, b: usize) -> Vec<HtClass> {
    let mut out = Vec::new();
    for nu in 0..=a {
        for mu in 0..=b {
            for tau in 0..=1usize {
                let lo = 0.max(2 * mu as i64 - b as i64 + tau as i64);
                let hi = (a as i64 - 2 * nu as i64).min(mu as i64 + tau as i64);
                for rho in lo..=hi {
                    out.push(HtClass {
                        a,
                        b,
                        nu,
                        mu,
                        tau,
                        rho: rho as usize,
                    });
                }
            }
        }
    }
    out
}

/// Total catalog mass: the sum of multiplicity times dimension, which must
/// equal the number of subspaces of the extended ambient space.
pub fn ht_catalog_mass(a: usize, b: usize, q: u64) -> Result<Int> {
    let mut total = Int::zero();
    for class in enumerate_ht_classes(a, b) {
        total += class.multiplicity(q)? * Int::from(class.dim() as u64);
    }
    Ok(total)
}

/// Multiplicity of a pair-ground class, zero when out of range.
fn layer_multiplicity_or_zero(
    a: i64,
    b: i64,
    nu: usize,
    mu: usize,
    rho: i64,
    q: u64,
) -> Result<Int> {
    if a < 0 || b < 0 || rho < 0 || mu as i64 > b {
        return Ok(Int::zero());
    }
    let class = HClass {
        a: a as usize,
        b: b as usize,
        nu,
        mu,
        rho: rho as usize,
    };
    if !class.is_valid() {
        return Ok(Int::zero());
    }
    class.multiplicity(q)
}

/// Counting identity for tau = 1: the multiplicity splits over the two
/// nontrivial character classes, weighted by the class sizes.
pub fn ht_multiplicity_recursion_holds(class: &HtClass, q: u64) -> Result<bool> {
    debug_assert_eq!(class.tau, 1);
    let (a, b) = (class.a as i64, class.b as i64);
    let direct = class.multiplicity(q)?;
    let qb = Int::from(q).pow(b as u32);
    let k_trivial = &qb - 1;
    let k_nontrivial = Int::from(q).pow((a + b) as u32) - &qb;
    let t1 = layer_multiplicity_or_zero(a, b - 1, class.nu, class.mu, class.rho as i64, q)?;
    let t2 = layer_multiplicity_or_zero(a - 1, b, class.nu, class.mu, class.rho as i64 - 1, q)?;
    Ok(direct == k_trivial * t1 + k_nontrivial * t2)
}

/// Which character class seeds a concrete tau = 1 module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ThetaRoute {
    KTrivial,
    KNontrivial,
}

/// The available seeding routes of a tau = 1 class, each with its source
/// class on the smaller pair ground.
pub fn tau1_routes(class: &HtClass) -> Vec<(ThetaRoute, HClass)> {
    debug_assert_eq!(class.tau, 1);
    let mut out = Vec::new();
    if class.b >= 1 {
        let src = HClass {
            a: class.a,
            b: class.b - 1,
            nu: class.nu,
            mu: class.mu,
            rho: class.rho,
        };
        if src.is_valid() {
            out.push((ThetaRoute::KTrivial, src));
        }
    }
    if class.a >= 1 && class.rho >= 1 {
        let src = HClass {
            a: class.a - 1,
            b: class.b,
            nu: class.nu,
            mu: class.mu,
            rho: class.rho - 1,
        };
        if src.is_valid() {
            out.push((ThetaRoute::KNontrivial, src));
        }
    }
    out
}

/// Deterministic representative character for a route: the first label
/// vector of the wanted class.
pub fn route_character(a: usize, b: usize, route: ThetaRoute) -> Character {
    let mut c = vec![0u16; a + b];
    match route {
        ThetaRoute::KTrivial => c[a + b - 1] = 1,
        ThetaRoute::KNontrivial => c[0] = 1,
    }
    Character { c }
}

/// A module realized by explicit vectors over the extended ground set.
pub struct ConcreteHtModule<S: Scalar> {
    pub class: HtClass,
    pub route: Option<ThetaRoute>,
    pub basis: BTreeMap<(usize, usize, usize), Vec<(u32, S)>>,
}

/// Concrete module of a tau = 0 class: a k-layer module paired with its
/// raising-3 image.
pub fn concrete_ht_module_tau0(
    ctx: &HtContext,
    pair: &PairGround,
    pops: &PairOps,
    layer_ids: &[u32],
    class: &HtClass,
) -> Result<ConcreteHtModule<Rat>> {
    if class.tau != 0 || !class.is_valid() {
        return Err(Error::domain("expected a valid tau = 0 class"));
    }
    let hm = concrete_h_module(pair, pops, &class.layer_class())?;
    let mut basis = BTreeMap::new();
    for ((i, j), v) in &hm.basis {
        let mut w0: Vec<(u32, Rat)> = v
            .iter()
            .map(|(id, coef)| (layer_ids[*id as usize], coef.clone()))
            .collect();
        w0.sort_by_key(|e| e.0);
        let w1 = apply_transposed_bin(&ctx.tops.l3, &w0);
        basis.insert((*i, *j, 0), w0);
        basis.insert((*i, *j, 1), w1);
    }
    Ok(ConcreteHtModule {
        class: class.clone(),
        route: None,
        basis,
    })
}

/// Concrete module of a tau = 1 class: a module of the sub-ambient pair
/// ground pushed through the lifting map of a representative character.
pub fn concrete_ht_module_tau1<S: Scalar>(
    ctx: &HtContext,
    class: &HtClass,
    route: ThetaRoute,
    tol: f64,
) -> Result<ConcreteHtModule<S>> {
    if class.tau != 1 || !class.is_valid() {
        return Err(Error::domain("expected a valid tau = 1 class"));
    }
    let source = tau1_routes(class)
        .into_iter()
        .find(|(r, _)| *r == route)
        .map(|(_, src)| src)
        .ok_or_else(|| Error::domain("route not available for this class"))?;
    let chi = route_character(ctx.gm.a, ctx.gm.b, route);
    let th = theta_chi::<S>(ctx, &chi, tol)?;
    if (th.pair.a, th.pair.b) != (source.a, source.b) {
        return Err(Error::inconsistency(
            "sub-ambient ground shape does not match the source class",
        ));
    }
    let pops = th.pair.ops();
    let hm = concrete_h_module(&th.pair, &pops, &source)?;
    let mut basis = BTreeMap::new();
    for ((i, j), v) in &hm.basis {
        let mut dense = vec![S::zero(); th.pair.len()];
        for (id, coef) in v {
            dense[*id as usize] = S::from_rat(coef);
        }
        let img = th.theta.mul_vec(&dense);
        let w: Vec<(u32, S)> = img
            .into_iter()
            .enumerate()
            .filter(|(_, s)| !s.is_negligible(tol))
            .map(|(r, s)| (r as u32, s))
            .collect();
        if w.is_empty() {
            return Err(Error::inconsistency("lifted basis vector vanished"));
        }
        basis.insert((*i, *j, 1), w);
    }
    Ok(ConcreteHtModule {
        class: class.clone(),
        route: Some(route),
        basis,
    })
}

fn apply_gen<S: Scalar>(ctx: &HtContext, gen: HtGen, v: &[(u32, S)]) -> Vec<(u32, S)> {
    // Each operator is applied through its stored transpose partner.
    let op_t = match gen {
        HtGen::L1 => &ctx.tops.r1,
        HtGen::L2 => &ctx.tops.r2,
        HtGen::L3 => &ctx.tops.r3,
        HtGen::R1 => &ctx.tops.l1,
        HtGen::R2 => &ctx.tops.l2,
        HtGen::R3 => &ctx.tops.l3,
    };
    apply_transposed_bin(op_t, v)
}

/// Check every generator action on a concrete module against the displayed
/// coefficients, plus cell membership and nonvanishing of each basis vector.
pub fn verify_ht_module_actions<S: Scalar>(
    ctx: &HtContext,
    module: &ConcreteHtModule<S>,
    tol: f64,
) -> Result<()> {
    let class = &module.class;
    let q = ctx.q();
    let keys = class.basis_keys();
    if module.basis.len() != keys.len() || !keys.iter().all(|k| module.basis.contains_key(k)) {
        return Err(Error::inconsistency(
            "module basis does not cover the index grid",
        ));
    }
    for (&(i, j, k), w) in &module.basis {
        if w.is_empty() {
            return Err(Error::inconsistency(format!(
                "basis vector ({i}, {j}, {k}) vanished"
            )));
        }
        let cell = ctx.tg.cell_ids(i, j, k);
        if !w.iter().all(|(id, _)| cell.binary_search(id).is_ok()) {
            return Err(Error::inconsistency(format!(
                "basis vector ({i}, {j}, {k}) leaves its cell"
            )));
        }
        for gen in HT_GENS {
            let img = apply_gen(ctx, gen, w);
            let (coef, target) = class.action(q, gen, i, j, k);
            let expected: Vec<(u32, S)> = match target {
                Some(t) => scale_sparse(&module.basis[&t], &S::from_rat(&coef)),
                None => Vec::new(),
            };
            let residual = row_add_scaled(&img, &expected, &(-S::one()));
            if !residual.iter().all(|(_, s)| s.is_negligible(tol)) {
                return Err(Error::inconsistency(format!(
                    "generator {gen:?} on basis vector ({i}, {j}, {k}) of class \
                     (nu={}, mu={}, tau={}, rho={}) deviates from the displayed coefficient",
                    class.nu, class.mu, class.tau, class.rho
                )));
            }
        }
    }
    Ok(())
}

/// Full catalog verification at one parameter point: formula identities,
/// character sweep, operator transport, and one concrete module per class
/// (both seeding routes where both exist).
pub fn verify_ht_catalog(q: u64, a: usize, b: usize, tol: f64) -> Result<CheckReport> {
    let field = GfField::new(q)?;
    if field.p == 2 {
        verify_ht_catalog_impl::<Rat>(q, a, b, tol)
    } else {
        verify_ht_catalog_impl::<Cpx>(q, a, b, tol)
    }
}

fn verify_ht_catalog_impl<S: Scalar>(
    q: u64,
    a: usize,
    b: usize,
    tol: f64,
) -> Result<CheckReport> {
    let ctx = HtContext::new(q, a, b)?;
    let mut report = CheckReport::new();

    let classes = enumerate_ht_classes(a, b);
    let mut endpoint_ok = true;
    for class in &classes {
        let (_, mu_up, tau_up) = class.upper_endpoint();
        endpoint_ok &= tau_up == 1
            && class.mu + mu_up + class.tau == class.b + class.rho
            && class.dim() == class.basis_keys().len();
    }
    report.record(
        "upper endpoints satisfy the index relation and dimensions count the grid",
        endpoint_ok,
        format!("{} classes", classes.len()),
    );

    let mass = ht_catalog_mass(a, b, q)?;
    let expected_mass = subspace_count((a + b + 1) as u32, q);
    report.record(
        "catalog mass equals the subspace count of the extended space",
        mass == expected_mass,
        format!("mass {mass}, expected {expected_mass}"),
    );

    let mut recursion_ok = true;
    for class in classes.iter().filter(|c| c.tau == 1) {
        recursion_ok &= ht_multiplicity_recursion_holds(class, q)?;
    }
    report.record(
        "tau = 1 multiplicities split over the two character classes",
        recursion_ok,
        "",
    );

    report.merge(character_sweep::<S>(&ctx, tol)?);
    report.merge(verify_operator_transport_impl::<S>(q, a, b, tol)?);

    let (pair, _, layer_ids) = hyperplane_layer(&ctx)?;
    let pops = pair.ops();
    for class in &classes {
        if class.tau == 0 {
            let outcome = concrete_ht_module_tau0(&ctx, &pair, &pops, &layer_ids, class)
                .and_then(|m| verify_ht_module_actions(&ctx, &m, tol));
            report.record(
                format!(
                    "concrete module actions for class (nu={}, mu={}, tau=0, rho={})",
                    class.nu, class.mu, class.rho
                ),
                outcome.is_ok(),
                outcome.err().map(|e| e.to_string()).unwrap_or_default(),
            );
        } else {
            let routes = tau1_routes(class);
            let mut all_ok = !routes.is_empty();
            let mut detail = Vec::new();
            for (route, src) in &routes {
                let outcome = concrete_ht_module_tau1::<S>(&ctx, class, *route, tol)
                    .and_then(|m| verify_ht_module_actions(&ctx, &m, tol));
                detail.push(format!(
                    "{:?} from (nu={}, mu={}, rho={}) at (a={}, b={}): {}",
                    route,
                    src.nu,
                    src.mu,
                    src.rho,
                    src.a,
                    src.b,
                    match &outcome {
                        Ok(()) => "ok".to_string(),
                        Err(e) => e.to_string(),
                    }
                ));
                all_ok &= outcome.is_ok();
            }
            report.record(
                format!(
                    "concrete module actions for class (nu={}, mu={}, tau=1, rho={})",
                    class.nu, class.mu, class.rho
                ),
                all_ok,
                detail.join(" | "),
            );
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_TOL;

    fn ctx(q: u64, a: usize, b: usize) -> HtContext {
        HtContext::new(q, a, b).expect("context builds")
    }

    #[test]
    fn translation_group_orders_and_kinds() {
        let c = ctx(2, 1, 2);
        assert_eq!(c.gm.order(), 8);
        assert_eq!(c.gm.k_order(), 2);
        let inside = c
            .gm
            .alphas
            .iter()
            .filter(|al| !c.gm.is_identity(al) && c.gm.in_k(al))
            .count();
        assert_eq!(inside, 1);

        let c3 = ctx(3, 1, 1);
        assert_eq!(c3.gm.order(), 9);
        assert_eq!(c3.gm.k_order(), 3);
    }

    #[test]
    fn translations_preserve_cells_and_fix_the_hyperplane_layer() {
        let c = ctx(2, 1, 2);
        for alpha in &c.gm.alphas {
            for (id, y) in c.tg.points.iter().enumerate() {
                let z = c.gm.apply(alpha, y);
                let zid = c.tg.id_of(&z).expect("image in ground") as usize;
                assert_eq!(c.tg.cell_of[id], c.tg.cell_of[zid]);
                if c.tg.cell_of[id].2 == 0 {
                    assert_eq!(zid, id, "k = 0 points must be fixed");
                }
            }
        }
    }

    #[test]
    fn inner_product_frozen_values_at_1_2() {
        assert_eq!(
            psi_inner_formula(1, 2, 0, 1, CharClass::Trivial, 2),
            Int::from(6)
        );
        assert_eq!(
            psi_inner_formula(1, 2, 0, 1, CharClass::KNontrivial, 2),
            Int::from(3)
        );
    }

    #[test]
    fn character_sweep_passes_at_1_2_binary() {
        let report = verify_characters(2, 1, 2, DEFAULT_TOL).expect("sweep runs");
        assert!(report.all_passed(), "failures: {:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn character_sweep_passes_at_1_1_ternary() {
        let report = verify_characters(3, 1, 1, DEFAULT_TOL).expect("sweep runs");
        assert!(report.all_passed(), "failures: {:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn idempotent_matrices_are_projections_resolving_the_identity() {
        let c = ctx(2, 1, 2);
        let n = c.tg.len();
        let mut total = SparseMat::<Rat>::zero(n, n);
        for label in all_vectors(2, 3) {
            let chi = Character { c: label };
            let trivial = chi.class(1) == CharClass::Trivial;
            let mut triplets = Vec::new();
            for (id, y) in c.tg.points.iter().enumerate() {
                if c.tg.cell_of[id].2 == 0 {
                    // The group fixes the layer, so only the trivial
                    // character survives averaging there.
                    if trivial {
                        triplets.push((id as u32, id as u32, Rat::one()));
                    }
                } else {
                    for (r, coef) in
                        e_chi_apply_point::<Rat>(&c, &chi, y, DEFAULT_TOL).expect("applies")
                    {
                        triplets.push((r, id as u32, coef));
                    }
                }
            }
            let e = SparseMat::from_triplets(n, n, triplets);
            assert!(e.mul(&e).sub(&e).is_zero_matrix(), "not idempotent");
            for op in [
                &c.tops.l1, &c.tops.l2, &c.tops.l3, &c.tops.r1, &c.tops.r2, &c.tops.r3,
            ] {
                let m = op.to_mat::<Rat>();
                assert!(
                    m.mul(&e).sub(&e.mul(&m)).is_zero_matrix(),
                    "does not commute with a generator"
                );
            }
            total = total.add(&e);
        }
        assert!(
            total.sub(&SparseMat::identity(n)).is_zero_matrix(),
            "idempotents do not resolve the identity"
        );
    }

    #[test]
    fn lifting_map_support_and_shape_at_1_2() {
        let c = ctx(2, 1, 2);
        let kt = theta_chi::<Rat>(&c, &route_character(1, 2, ThetaRoute::KTrivial), DEFAULT_TOL)
            .expect("map builds");
        assert_eq!(kt.class, CharClass::KTrivial);
        assert_eq!((kt.pair.a, kt.pair.b), (1, 1));
        assert_eq!(kt.pair.len(), 5);
        assert_eq!(kt.h_chi.dim(), 2);
        assert!(kt.theta.rows.iter().all(|r| r.len() <= 1));

        let kn = theta_chi::<Rat>(
            &c,
            &route_character(1, 2, ThetaRoute::KNontrivial),
            DEFAULT_TOL,
        )
        .expect("map builds");
        assert_eq!(kn.class, CharClass::KNontrivial);
        assert_eq!((kn.pair.a, kn.pair.b), (0, 2));
        assert_eq!(kn.pair.len(), 5);
    }

    #[test]
    fn operator_transport_exact_at_1_2_binary() {
        let report = verify_operator_transport(2, 1, 2, DEFAULT_TOL).expect("runs");
        assert!(report.all_passed(), "failures: {:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn operator_transport_within_tolerance_at_1_1_ternary() {
        let report = verify_operator_transport(3, 1, 1, DEFAULT_TOL).expect("runs");
        assert!(report.all_passed(), "failures: {:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn catalog_frozen_at_1_2() {
        let classes = enumerate_ht_classes(1, 2);
        let summary: Vec<(usize, usize, usize, usize, u64, usize)> = classes
            .iter()
            .map(|c| {
                let m = c.multiplicity(2).expect("integer multiplicity");
                (
                    c.nu,
                    c.mu,
                    c.tau,
                    c.rho,
                    u64::try_from(&m).expect("small"),
                    c.dim(),
                )
            })
            .collect();
        let expected = vec![
            (0, 0, 0, 0, 1, 12),
            (0, 0, 1, 0, 3, 4),
            (0, 0, 1, 1, 4, 3),
            (0, 1, 0, 0, 2, 4),
            (0, 1, 0, 1, 3, 4),
            (0, 1, 1, 1, 11, 1),
        ];
        assert_eq!(summary, expected);
    }

    #[test]
    fn catalog_mass_small_sizes() {
        for q in [2u64, 3] {
            for (a, b) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
                let mass = ht_catalog_mass(a, b, q).expect("mass computes");
                assert_eq!(
                    mass,
                    subspace_count((a + b + 1) as u32, q),
                    "mass off at (a={a}, b={b}, q={q})"
                );
            }
        }
    }

    #[test]
    fn tau1_multiplicity_recursion_small_sizes() {
        for q in [2u64, 3, 4] {
            for a in 0..=2usize {
                for b in 0..=2usize {
                    for class in enumerate_ht_classes(a, b) {
                        if class.tau == 1 {
                            assert!(
                                ht_multiplicity_recursion_holds(&class, q).expect("computes"),
                                "recursion fails for {class:?} at q={q}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn action_matrices_kill_raising_3_for_tau_1() {
        let class = HtClass {
            a: 1,
            b: 2,
            nu: 0,
            mu: 0,
            tau: 1,
            rho: 0,
        };
        let mats = class.action_matrices(2);
        assert!(mats[2].is_zero_matrix(), "lowering-3 must vanish");
        assert!(mats[5].is_zero_matrix(), "raising-3 must vanish");

        let tau0 = HtClass {
            a: 1,
            b: 2,
            nu: 0,
            mu: 0,
            tau: 0,
            rho: 0,
        };
        let m0 = tau0.action_matrices(2);
        assert!(
            m0[5].mul(&m0[5]).is_zero_matrix(),
            "raising-3 must square to zero"
        );
    }

    #[test]
    fn concrete_tau0_modules_match_actions_at_1_2() {
        let c = ctx(2, 1, 2);
        let (pair, _, layer_ids) = hyperplane_layer(&c).expect("layer builds");
        let pops = pair.ops();
        for class in enumerate_ht_classes(1, 2)
            .into_iter()
            .filter(|cl| cl.tau == 0)
        {
            let m = concrete_ht_module_tau0(&c, &pair, &pops, &layer_ids, &class)
                .expect("module builds");
            verify_ht_module_actions(&c, &m, DEFAULT_TOL).expect("actions match");
        }
    }

    #[test]
    fn concrete_tau1_modules_cover_both_routes_at_1_2() {
        let c = ctx(2, 1, 2);
        let route_kinds: Vec<(usize, Vec<ThetaRoute>)> = enumerate_ht_classes(1, 2)
            .into_iter()
            .filter(|cl| cl.tau == 1)
            .map(|class| {
                let routes = tau1_routes(&class);
                assert!(!routes.is_empty(), "every class needs a seeding route");
                for (route, _) in &routes {
                    let m = concrete_ht_module_tau1::<Rat>(&c, &class, *route, DEFAULT_TOL)
                        .expect("module builds");
                    verify_ht_module_actions(&c, &m, DEFAULT_TOL).expect("actions match");
                }
                (class.rho, routes.into_iter().map(|(r, _)| r).collect())
            })
            .collect();
        // rho = 0 only lifts from the smaller-b ground, rho = mu + 1 only
        // from the smaller-a ground, and the middle range from both.
        assert_eq!(
            route_kinds,
            vec![
                (0, vec![ThetaRoute::KTrivial]),
                (1, vec![ThetaRoute::KNontrivial]),
                (1, vec![ThetaRoute::KTrivial, ThetaRoute::KNontrivial]),
            ]
        );
    }

    #[test]
    fn tampered_module_fails_verification() {
        let c = ctx(2, 1, 2);
        let (pair, _, layer_ids) = hyperplane_layer(&c).expect("layer builds");
        let pops = pair.ops();
        let class = HtClass {
            a: 1,
            b: 2,
            nu: 0,
            mu: 0,
            tau: 0,
            rho: 0,
        };
        let mut m =
            concrete_ht_module_tau0(&c, &pair, &pops, &layer_ids, &class).expect("builds");
        let key = *m.basis.keys().next().expect("nonempty");
        let doubled = scale_sparse(&m.basis[&key], &Rat::from_integer(Int::from(2)));
        m.basis.insert(key, doubled);
        assert!(verify_ht_module_actions(&c, &m, DEFAULT_TOL).is_err());
    }

    #[test]
    fn full_catalog_verification_at_1_2() {
        let report = verify_ht_catalog(2, 1, 2, DEFAULT_TOL).expect("verification runs");
        assert!(report.all_passed(), "failures: {:?}", report.failures().collect::<Vec<_>>());
    }
}
