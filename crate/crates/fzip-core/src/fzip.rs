//! Classical and derived F-zips.
//!
//! A classical F-zip is a descending flag and an ascending flag on the same
//! finite-dimensional space, with equal graded dimensions and an invertible
//! frobenius-twisted comparison map on each graded piece.  The derived
//! version replaces the flags by a descending and an ascending filtration of
//! bounded complexes, glued by a quasi-isomorphism on colimits, with a
//! quasi-isomorphism `frobenius_twist(gr^k C) -> gr^k D` for every index.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::chain::{cone_with_maps, qiso_matching_homology, qiso_through_homology, ChainMap, Complex};
use crate::filt::{day_convolution, is_degenerate, is_strong, Direction, FiltError, Filtration};
use crate::gf::Field;
use crate::mat::{subsets, Mat};

/// (index, homological degree) -> graded Betti number.
pub type ZipType = BTreeMap<(i64, i64), usize>;
/// index -> graded Euler characteristic (zero entries omitted).
pub type EulerType = BTreeMap<i64, i64>;

#[derive(Debug, Error)]
pub enum ZipError {
    #[error("descending side is not a descending filtration")]
    NotDescending,
    #[error("ascending side is not an ascending filtration")]
    NotAscending,
    #[error("field mismatch between zip components")]
    FieldMismatch,
    #[error("identity glue needs degreewise equal colimits")]
    GlueShape,
    #[error("glue endpoints do not match the colimits")]
    GlueEndpoints,
    #[error("glue is not a quasi-isomorphism")]
    GlueNotQiso,
    #[error("missing twist at index {0}")]
    TwistMissing(i64),
    #[error("twist {0} has wrong endpoints")]
    TwistShape(i64),
    #[error("twist {0} not a quasi-isomorphism")]
    TwistNotQiso(i64),
    #[error("flag subspace at index {0} is not nested in its neighbour")]
    FlagNotNested(i64),
    #[error("flag indices must form a contiguous range")]
    FlagIndices,
    #[error("flag subspace at index {0} has the wrong ambient dimension")]
    FlagAmbient(i64),
    #[error("a positive-rank flag needs at least one listed subspace")]
    FlagUnderspecified,
    #[error("graded dimensions of the two flags disagree at index {0}")]
    GradedMismatch(i64),
    #[error("comparison map at index {0} is missing or not invertible")]
    BadPhi(i64),
    #[error("input is not degenerate")]
    NotDegenerate,
    #[error("classical input does not have the expected type")]
    WrongType,
    #[error("exterior power index out of range")]
    ExteriorRange,
    #[error("pairing map endpoints do not match")]
    PairingShape,
    #[error("decomposition does not rebuild the input invariants")]
    DecomposeMismatch,
    #[error(transparent)]
    Filtration(#[from] FiltError),
}

fn frob_mat(m: &Mat) -> Mat {
    let f = m.field().clone();
    m.map_entries(|x| f.frobenius(x))
}

/// Coordinates of the classes of the columns of `v` with respect to `reps`,
/// inside the quotient by the span of `sub`.  Panics if a column is outside
/// the span of `[sub | reps]`.
fn class_in_quotient(sub: &Mat, reps: &Mat, v: &Mat) -> Mat {
    let span = sub.hstack(reps);
    let x = span.solve(v).expect("vector outside the flag subspace");
    Mat::from_fn(sub.field(), reps.cols(), v.cols(), |i, j| x[(sub.cols() + i, j)])
}

/// Basis of span(a) ∩ span(b).
fn intersection_basis(a: &Mat, b: &Mat) -> Mat {
    let f = a.field().clone();
    if a.cols() == 0 || b.cols() == 0 {
        return Mat::zeros(&f, a.rows(), 0);
    }
    let k = a.hstack(&b.neg()).kernel_basis();
    let x = Mat::from_fn(&f, a.cols(), k.cols(), |i, j| k[(i, j)]);
    a.mul(&x).col_space_basis()
}

// ======================================================================
// classical F-zips
// ======================================================================

/// Flag subspaces are stored as canonical echelon bases over the minimal
/// window where the flag is interesting.  The descending flag is full
/// below its window and zero from the window's top entry on; the ascending
/// flag is zero below its window and full from the top entry on.  The
/// comparison matrices are written with respect to the canonical graded
/// bases of `c_graded_reps` / `d_graded_reps`, so two zips are equal as
/// data exactly when the structures agree in these canonical coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalFZip {
    field: Field,
    rank: usize,
    c_lo: i64,
    c_subs: Vec<Mat>,
    d_lo: i64,
    d_subs: Vec<Mat>,
    phi: BTreeMap<i64, Mat>,
}

fn normalize_desc(field: &Field, rank: usize, subs: &BTreeMap<i64, Mat>) -> Result<(i64, Vec<Mat>), ZipError> {
    if rank == 0 {
        for (&k, m) in subs {
            if m.rows() != 0 {
                return Err(ZipError::FlagAmbient(k));
            }
        }
        return Ok((0, Vec::new()));
    }
    if subs.is_empty() {
        return Err(ZipError::FlagUnderspecified);
    }
    let kmin = *subs.keys().next().unwrap();
    let kmax = *subs.keys().last().unwrap();
    if (kmax - kmin + 1) as usize != subs.len() {
        return Err(ZipError::FlagIndices);
    }
    let mut canon = BTreeMap::new();
    for (&k, m) in subs {
        if m.rows() != rank {
            return Err(ZipError::FlagAmbient(k));
        }
        canon.insert(k, m.col_space_basis());
    }
    let s = |k: i64| -> Mat {
        if k < kmin {
            Mat::identity(field, rank)
        } else if k > kmax {
            Mat::zeros(field, rank, 0)
        } else {
            canon[&k].clone()
        }
    };
    for k in kmin - 1..=kmax {
        let big = s(k);
        if big.hstack(&s(k + 1)).rank() != big.cols() {
            return Err(ZipError::FlagNotNested(k + 1));
        }
    }
    let mut lo = kmin;
    while lo <= kmax && s(lo).cols() == rank {
        lo += 1;
    }
    let mut hi = lo;
    while hi <= kmax && s(hi).cols() > 0 {
        hi += 1;
    }
    Ok((lo, (lo..=hi).map(s).collect()))
}

fn normalize_asc(field: &Field, rank: usize, subs: &BTreeMap<i64, Mat>) -> Result<(i64, Vec<Mat>), ZipError> {
    if rank == 0 {
        for (&k, m) in subs {
            if m.rows() != 0 {
                return Err(ZipError::FlagAmbient(k));
            }
        }
        return Ok((0, Vec::new()));
    }
    if subs.is_empty() {
        return Err(ZipError::FlagUnderspecified);
    }
    let kmin = *subs.keys().next().unwrap();
    let kmax = *subs.keys().last().unwrap();
    if (kmax - kmin + 1) as usize != subs.len() {
        return Err(ZipError::FlagIndices);
    }
    let mut canon = BTreeMap::new();
    for (&k, m) in subs {
        if m.rows() != rank {
            return Err(ZipError::FlagAmbient(k));
        }
        canon.insert(k, m.col_space_basis());
    }
    let s = |k: i64| -> Mat {
        if k < kmin {
            Mat::zeros(field, rank, 0)
        } else if k > kmax {
            Mat::identity(field, rank)
        } else {
            canon[&k].clone()
        }
    };
    for k in kmin - 1..=kmax {
        let big = s(k + 1);
        if big.hstack(&s(k)).rank() != big.cols() {
            return Err(ZipError::FlagNotNested(k));
        }
    }
    let mut lo = kmin;
    while lo <= kmax && s(lo).cols() == 0 {
        lo += 1;
    }
    let mut hi = lo;
    while hi <= kmax && s(hi).cols() < rank {
        hi += 1;
    }
    Ok((lo, (lo..=hi).map(s).collect()))
}

impl ClassicalFZip {
    /// Build from subspace listings over contiguous index ranges.  Unlisted
    /// indices follow the flag conventions (descending: full below, zero
    /// above; ascending: zero below, full above).  Inputs are canonicalized,
    /// so any generating sets with the right spans produce equal data.
    pub fn new(
        field: Field,
        rank: usize,
        c: &BTreeMap<i64, Mat>,
        d: &BTreeMap<i64, Mat>,
        phi: &BTreeMap<i64, Mat>,
    ) -> Result<Self, ZipError> {
        let (c_lo, c_subs) = normalize_desc(&field, rank, c)?;
        let (d_lo, d_subs) = normalize_asc(&field, rank, d)?;
        let z = ClassicalFZip { field, rank, c_lo, c_subs, d_lo, d_subs, phi: BTreeMap::new() };
        let tc = z.classical_type();
        let td = z.d_type();
        for k in tc.keys().chain(td.keys()) {
            if tc.get(k).copied().unwrap_or(0) != td.get(k).copied().unwrap_or(0) {
                return Err(ZipError::GradedMismatch(*k));
            }
        }
        for (&k, &g) in &tc {
            match phi.get(&k) {
                Some(m) if m.rows() == g && m.cols() == g && m.is_invertible() => {}
                _ => return Err(ZipError::BadPhi(k)),
            }
        }
        for &k in phi.keys() {
            if !tc.contains_key(&k) {
                return Err(ZipError::BadPhi(k));
            }
        }
        Ok(ClassicalFZip { phi: phi.clone(), ..z })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Stored window of the descending flag; `(0, -1)`-style empty for rank 0.
    pub fn c_window(&self) -> (i64, i64) {
        (self.c_lo, self.c_lo + self.c_subs.len() as i64 - 1)
    }
    pub fn d_window(&self) -> (i64, i64) {
        (self.d_lo, self.d_lo + self.d_subs.len() as i64 - 1)
    }

    pub fn c_subspace(&self, k: i64) -> Mat {
        let (lo, hi) = self.c_window();
        if self.c_subs.is_empty() || k < lo {
            Mat::identity(&self.field, self.rank)
        } else if k > hi {
            Mat::zeros(&self.field, self.rank, 0)
        } else {
            self.c_subs[(k - lo) as usize].clone()
        }
    }

    pub fn d_subspace(&self, k: i64) -> Mat {
        let (lo, hi) = self.d_window();
        if self.d_subs.is_empty() || k > hi {
            Mat::identity(&self.field, self.rank)
        } else if k < lo {
            Mat::zeros(&self.field, self.rank, 0)
        } else {
            self.d_subs[(k - lo) as usize].clone()
        }
    }

    /// Graded dimensions of the descending flag (the classical type).
    pub fn classical_type(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        let (lo, hi) = self.c_window();
        for k in lo - 1..=hi - 1 {
            let g = self.c_subspace(k).cols() - self.c_subspace(k + 1).cols();
            if g > 0 {
                out.insert(k, g);
            }
        }
        out
    }

    fn d_type(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        let (lo, hi) = self.d_window();
        for k in lo..=hi {
            let g = self.d_subspace(k).cols() - self.d_subspace(k - 1).cols();
            if g > 0 {
                out.insert(k, g);
            }
        }
        out
    }

    /// Canonical representatives of gr^k of the descending flag: the columns
    /// of the echelon basis of C^k selected to extend C^{k+1}.
    pub fn c_graded_reps(&self, k: i64) -> Mat {
        self.c_subspace(k + 1).extend_basis(&self.c_subspace(k))
    }

    pub fn d_graded_reps(&self, k: i64) -> Mat {
        self.d_subspace(k - 1).extend_basis(&self.d_subspace(k))
    }

    pub fn phi_at(&self, k: i64) -> Option<&Mat> {
        self.phi.get(&k)
    }

    fn intersection_table(&self) -> BTreeMap<(i64, i64), usize> {
        let mut out = BTreeMap::new();
        let (clo, chi) = self.c_window();
        let (dlo, dhi) = self.d_window();
        for j in clo - 1..=chi {
            for k in dlo - 1..=dhi {
                let u = self.c_subspace(j);
                let w = self.d_subspace(k);
                let dim = u.cols() + w.cols() - u.hstack(&w).rank();
                out.insert((j, k), dim);
            }
        }
        out
    }

    /// Re-express the zip in a deterministically chosen basis adapted to
    /// both flags simultaneously.  Both flags become spans of coordinate
    /// vectors in the result.
    fn restandardized(&self) -> Option<ClassicalFZip> {
        let fld = self.field.clone();
        let r = self.rank;
        if r == 0 {
            return Some(self.clone());
        }
        let (clo, chi) = self.c_window();
        let (dlo, dhi) = self.d_window();
        let mut chosen = Mat::zeros(&fld, r, 0);
        let mut cw = Vec::new();
        let mut dw = Vec::new();
        for j in (clo - 1..=chi - 1).rev() {
            for k in dlo..=dhi {
                let u = intersection_basis(&self.c_subspace(j), &self.d_subspace(k));
                let lower = intersection_basis(&self.c_subspace(j + 1), &self.d_subspace(k))
                    .hstack(&intersection_basis(&self.c_subspace(j), &self.d_subspace(k - 1)))
                    .col_space_basis();
                let new = lower.extend_basis(&u);
                for _ in 0..new.cols() {
                    cw.push(j);
                    dw.push(k);
                }
                chosen = chosen.hstack(&new);
            }
        }
        if !chosen.is_invertible() {
            return None;
        }
        let standard = |idx: &[usize]| -> Mat {
            let mut m = Mat::zeros(&fld, r, idx.len());
            for (c, &i) in idx.iter().enumerate() {
                m[(i, c)] = 1;
            }
            m
        };
        let mut cmap = BTreeMap::new();
        for j in clo..=chi {
            let idx: Vec<usize> = (0..r).filter(|&l| cw[l] >= j).collect();
            cmap.insert(j, standard(&idx));
        }
        let mut dmap = BTreeMap::new();
        for k in dlo - 1..=dhi {
            let idx: Vec<usize> = (0..r).filter(|&l| dw[l] <= k).collect();
            dmap.insert(k, standard(&idx));
        }
        let (nc_lo, nc_subs) = normalize_desc(&fld, r, &cmap).ok()?;
        let (nd_lo, nd_subs) = normalize_asc(&fld, r, &dmap).ok()?;
        let bare = ClassicalFZip {
            field: fld.clone(),
            rank: r,
            c_lo: nc_lo,
            c_subs: nc_subs,
            d_lo: nd_lo,
            d_subs: nd_subs,
            phi: BTreeMap::new(),
        };
        let mut phi = BTreeMap::new();
        for (&k, _) in &self.classical_type() {
            let reps_c = bare.c_graded_reps(k);
            let pc = class_in_quotient(&self.c_subspace(k + 1), &self.c_graded_reps(k), &chosen.mul(&reps_c));
            let reps_d = bare.d_graded_reps(k);
            let pd = class_in_quotient(&self.d_subspace(k - 1), &self.d_graded_reps(k), &chosen.mul(&reps_d));
            let (pci, pdi) = (pc.is_invertible(), pd.is_invertible());
            if !pci || !pdi {
                return None;
            }
            phi.insert(k, pd.inverse().unwrap().mul(self.phi_at(k).unwrap()).mul(&frob_mat(&pc)));
        }
        ClassicalFZip::new(fld, r, &cmap, &dmap, &phi).ok()
    }

    /// Isomorphism test: invariants first, then canonical data equality,
    /// then equality after re-expressing both sides in a common adapted
    /// basis.  Sound; flag-respecting presentations of the same zip are
    /// always recognized.
    pub fn is_isomorphic(&self, other: &ClassicalFZip) -> bool {
        if self.field != other.field
            || self.rank != other.rank
            || self.classical_type() != other.classical_type()
            || self.c_window() != other.c_window()
            || self.d_window() != other.d_window()
            || self.intersection_table() != other.intersection_table()
        {
            return false;
        }
        if self == other {
            return true;
        }
        match (self.restandardized(), other.restandardized()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }
}

/// Rank-one classical zip jumping at index j, comparison the identity.
pub fn rank_one_at(field: &Field, j: i64) -> ClassicalFZip {
    let c = BTreeMap::from([(j + 1, Mat::zeros(field, 1, 0))]);
    let d = BTreeMap::from([(j, Mat::identity(field, 1))]);
    let phi = BTreeMap::from([(j, Mat::identity(field, 1))]);
    ClassicalFZip::new(field.clone(), 1, &c, &d, &phi).unwrap()
}

/// The unit classical zip: rank one, jump at index zero.
pub fn unit_classical(field: &Field) -> ClassicalFZip {
    rank_one_at(field, 0)
}

// ======================================================================
// exterior powers
// ======================================================================

/// Basis adapted to the descending flag, columns grouped by flag level in
/// ascending order; returns the basis matrix and the level of each column.
fn adapted_desc(z: &ClassicalFZip, alt: bool) -> (Mat, Vec<i64>) {
    let fld = z.field().clone();
    let (lo, hi) = z.c_window();
    let mut groups: Vec<(i64, Mat)> = Vec::new();
    let mut cur = z.c_subspace(hi);
    for k in (lo - 1..=hi - 1).rev() {
        let cand = z.c_subspace(k);
        let cand = if alt {
            let idx: Vec<usize> = (0..cand.cols()).rev().collect();
            cand.select_cols(&idx)
        } else {
            cand
        };
        let new = cur.extend_basis(&cand);
        cur = cur.hstack(&new);
        groups.push((k, new));
    }
    groups.reverse();
    let mut v = Mat::zeros(&fld, z.rank(), 0);
    let mut w = Vec::new();
    for (k, g) in groups {
        for _ in 0..g.cols() {
            w.push(k);
        }
        v = v.hstack(&g);
    }
    (v, w)
}

fn adapted_asc(z: &ClassicalFZip, alt: bool) -> (Mat, Vec<i64>) {
    let fld = z.field().clone();
    let (lo, hi) = z.d_window();
    let mut v = Mat::zeros(&fld, z.rank(), 0);
    let mut w = Vec::new();
    let mut cur = z.d_subspace(lo - 1);
    for k in lo..=hi {
        let cand = z.d_subspace(k);
        let cand = if alt {
            let idx: Vec<usize> = (0..cand.cols()).rev().collect();
            cand.select_cols(&idx)
        } else {
            cand
        };
        let new = cur.extend_basis(&cand);
        cur = cur.hstack(&new);
        for _ in 0..new.cols() {
            w.push(k);
        }
        v = v.hstack(&new);
    }
    (v, w)
}

fn exterior_power_with(z: &ClassicalFZip, i: usize, alt: bool) -> Result<ClassicalFZip, ZipError> {
    let r = z.rank();
    if i > r {
        return Err(ZipError::ExteriorRange);
    }
    let fld = z.field().clone();
    let (vc, wc) = adapted_desc(z, alt);
    let (vd, wd) = adapted_asc(z, alt);
    // comparison in the adapted bases, block diagonal by level
    let mut phi_full = Mat::zeros(&fld, r, r);
    for (&k, &g) in &z.classical_type() {
        let idx_c: Vec<usize> = (0..r).filter(|&l| wc[l] == k).collect();
        let idx_d: Vec<usize> = (0..r).filter(|&l| wd[l] == k).collect();
        let pc = class_in_quotient(&z.c_subspace(k + 1), &z.c_graded_reps(k), &vc.select_cols(&idx_c));
        let pd = class_in_quotient(&z.d_subspace(k - 1), &z.d_graded_reps(k), &vd.select_cols(&idx_d));
        let blk = pd.inverse().unwrap().mul(z.phi_at(k).unwrap()).mul(&frob_mat(&pc));
        debug_assert_eq!(blk.rows(), g);
        for a in 0..g {
            for b in 0..g {
                phi_full[(idx_d[a], idx_c[b])] = blk[(a, b)];
            }
        }
    }
    let cc = vc.compound(i);
    let cd = vd.compound(i);
    let cphi = phi_full.compound(i);
    let sets = subsets(r, i);
    let weight = |levels: &[i64], s: &[usize]| -> i64 { s.iter().map(|&l| levels[l]).sum() };
    let wsc: Vec<i64> = sets.iter().map(|s| weight(&wc, s)).collect();
    let wsd: Vec<i64> = sets.iter().map(|s| weight(&wd, s)).collect();
    let wmin = *wsc.iter().min().unwrap();
    let wmax = *wsc.iter().max().unwrap();
    let mut cmap = BTreeMap::new();
    for j in wmin..=wmax + 1 {
        let idx: Vec<usize> = (0..wsc.len()).filter(|&s| wsc[s] >= j).collect();
        cmap.insert(j, cc.select_cols(&idx));
    }
    let mut dmap = BTreeMap::new();
    for j in wmin - 1..=wmax {
        let idx: Vec<usize> = (0..wsd.len()).filter(|&s| wsd[s] <= j).collect();
        dmap.insert(j, cd.select_cols(&idx));
    }
    let out_rank = sets.len();
    let (nc_lo, nc_subs) = normalize_desc(&fld, out_rank, &cmap)?;
    let (nd_lo, nd_subs) = normalize_asc(&fld, out_rank, &dmap)?;
    let bare = ClassicalFZip {
        field: fld.clone(),
        rank: out_rank,
        c_lo: nc_lo,
        c_subs: nc_subs,
        d_lo: nd_lo,
        d_subs: nd_subs,
        phi: BTreeMap::new(),
    };
    let mut phi = BTreeMap::new();
    for (&j, _) in &bare.classical_type() {
        let idx_c: Vec<usize> = (0..wsc.len()).filter(|&s| wsc[s] == j).collect();
        let idx_d: Vec<usize> = (0..wsd.len()).filter(|&s| wsd[s] == j).collect();
        let qc = class_in_quotient(&bare.c_subspace(j + 1), &bare.c_graded_reps(j), &cc.select_cols(&idx_c));
        let qd = class_in_quotient(&bare.d_subspace(j - 1), &bare.d_graded_reps(j), &cd.select_cols(&idx_d));
        let blk = cphi.submatrix(&idx_d, &idx_c);
        let m = qd.mul(&blk).mul(&frob_mat(&qc).inverse().expect("adapted wedge classes form a basis"));
        phi.insert(j, m);
    }
    ClassicalFZip::new(fld, out_rank, &cmap, &dmap, &phi)
}

/// i-th exterior power of a classical zip: flags spanned by wedge products
/// with total level at least j, comparison induced on the graded pieces.
/// The result does not depend on the (internal) choice of adapted bases.
pub fn exterior_power(z: &ClassicalFZip, i: usize) -> Result<ClassicalFZip, ZipError> {
    exterior_power_with(z, i, false)
}

// ======================================================================
// derived F-zips
// ======================================================================

#[derive(Clone)]
pub enum Glue {
    /// Marker for a glue map that is the identity; only meaningful when the
    /// two colimits are degreewise equal.
    Identity,
    Map(ChainMap),
}

#[derive(Clone)]
pub struct DerivedFZip {
    c: Filtration,
    d: Filtration,
    glue: Glue,
    twists: BTreeMap<i64, ChainMap>,
}

impl DerivedFZip {
    pub fn new(c: Filtration, d: Filtration, glue: Glue, twists: BTreeMap<i64, ChainMap>) -> Self {
        DerivedFZip { c, d, glue, twists }
    }

    pub fn field(&self) -> &Field {
        self.c.field()
    }
    pub fn descending(&self) -> &Filtration {
        &self.c
    }
    pub fn ascending(&self) -> &Filtration {
        &self.d
    }
    pub fn glue(&self) -> &Glue {
        &self.glue
    }
    pub fn twists(&self) -> &BTreeMap<i64, ChainMap> {
        &self.twists
    }

    /// Matrix induced by the glue on homology at degree n, in the canonical
    /// representative bases of the two colimits.
    pub fn glue_induced(&self, n: i64) -> Mat {
        match &self.glue {
            Glue::Identity => Mat::identity(self.field(), self.c.colim().betti(n)),
            Glue::Map(m) => m.induced_on_homology(n),
        }
    }

    fn twist_indices(&self) -> BTreeSet<i64> {
        let mut out: BTreeSet<i64> = self.twists.keys().copied().collect();
        if !self.c.is_window_empty() {
            let (a, b) = self.c.window();
            out.extend(a..=b);
        }
        if !self.d.is_window_empty() {
            let (a, b) = self.d.window();
            out.extend(a..=b);
        }
        out
    }

    /// Check the full structure; the error names the first failing condition.
    pub fn validate(&self) -> Result<(), ZipError> {
        if self.c.direction() != Direction::Descending {
            return Err(ZipError::NotDescending);
        }
        if self.d.direction() != Direction::Ascending {
            return Err(ZipError::NotAscending);
        }
        if self.c.field() != self.d.field() {
            return Err(ZipError::FieldMismatch);
        }
        let colim_c = self.c.colim();
        let colim_d = self.d.colim();
        match &self.glue {
            Glue::Identity => {
                if colim_c != colim_d {
                    return Err(ZipError::GlueShape);
                }
            }
            Glue::Map(m) => {
                if m.source() != &colim_c || m.target() != &colim_d {
                    return Err(ZipError::GlueEndpoints);
                }
                if !m.is_quasi_iso() {
                    return Err(ZipError::GlueNotQiso);
                }
            }
        }
        for k in self.twist_indices() {
            let gc = self.c.graded(k);
            let gd = self.d.graded(k);
            match self.twists.get(&k) {
                None => {
                    if !(gc.is_acyclic() && gd.is_acyclic()) {
                        return Err(ZipError::TwistMissing(k));
                    }
                }
                Some(t) => {
                    if t.source() != &gc.frobenius_twist() || t.target() != &gd {
                        return Err(ZipError::TwistShape(k));
                    }
                    if !t.is_quasi_iso() {
                        return Err(ZipError::TwistNotQiso(k));
                    }
                }
            }
        }
        Ok(())
    }

    /// Graded Betti numbers of the descending side: (k, i) -> dim H_i(gr^k).
    pub fn zip_type(&self) -> ZipType {
        let mut out = BTreeMap::new();
        if self.c.is_window_empty() {
            return out;
        }
        let (a, b) = self.c.window();
        for k in a..=b {
            for (i, dim) in self.c.graded(k).betti_map() {
                out.insert((k, i), dim);
            }
        }
        out
    }

    /// Graded Euler characteristics, zero entries omitted.
    pub fn euler(&self) -> EulerType {
        let mut out: EulerType = BTreeMap::new();
        for (&(k, i), &dim) in &self.zip_type() {
            let sign = if i.rem_euclid(2) == 0 { 1 } else { -1 };
            *out.entry(k).or_insert(0) += sign * dim as i64;
        }
        out.retain(|_, v| *v != 0);
        out
    }

    pub fn is_degenerate_zip(&self) -> bool {
        is_degenerate(&self.c) && is_degenerate(&self.d)
    }

    pub fn is_strong_zip(&self) -> bool {
        is_strong(&self.c) && is_strong(&self.d)
    }

    /// Frobenius-twist every component.  Leaves the zip type unchanged.
    pub fn frobenius_twist(&self) -> DerivedFZip {
        let glue = match &self.glue {
            Glue::Identity => Glue::Identity,
            Glue::Map(m) => Glue::Map(m.frobenius_twist()),
        };
        DerivedFZip {
            c: self.c.frobenius_twist(),
            d: self.d.frobenius_twist(),
            glue,
            twists: self.twists.iter().map(|(k, t)| (*k, t.frobenius_twist())).collect(),
        }
    }
}

/// The unit zip: unit filtrations on both sides, identity glue and twist.
pub fn unit_zip(field: &Field) -> DerivedFZip {
    use crate::filt::unit_filtration;
    let unit = Complex::concentrated(field, 0, 1);
    DerivedFZip {
        c: unit_filtration(field, Direction::Descending),
        d: unit_filtration(field, Direction::Ascending),
        glue: Glue::Identity,
        twists: BTreeMap::from([(0, ChainMap::identity(&unit))]),
    }
}

/// Day convolution of both sides, with freshly synthesized glue and twists
/// (identity blocks on canonical homology bases).
pub fn tensor(a: &DerivedFZip, b: &DerivedFZip) -> Result<DerivedFZip, ZipError> {
    if a.field() != b.field() {
        return Err(ZipError::FieldMismatch);
    }
    let c = day_convolution(&a.c, &b.c)?;
    let d = day_convolution(&a.d, &b.d)?;
    let glue = Glue::Map(qiso_matching_homology(&c.colim(), &d.colim()));
    let mut twists = BTreeMap::new();
    let mut keys = BTreeSet::new();
    if !c.is_window_empty() {
        let (x, y) = c.window();
        keys.extend(x..=y);
    }
    if !d.is_window_empty() {
        let (x, y) = d.window();
        keys.extend(x..=y);
    }
    for k in keys {
        let gc = c.graded(k);
        let gd = d.graded(k);
        if gc.is_acyclic() && gd.is_acyclic() {
            continue;
        }
        let gct = gc.frobenius_twist();
        if gct.betti_map() != gd.betti_map() {
            return Err(ZipError::GradedMismatch(k));
        }
        twists.insert(k, qiso_matching_homology(&gct, &gd));
    }
    Ok(DerivedFZip { c, d, glue, twists })
}

// ----------------------------------------------------------------------
// embedding classical zips and projecting back
// ----------------------------------------------------------------------

/// Transition from the canonical homology basis of the one-degree piece of
/// an inclusion cone to the canonical graded basis of the flag quotient
/// span(big)/span(small).
fn cone_transition(field: &Field, big: &Mat, small: &Mat, flag_reps: &Mat) -> Mat {
    let x = big.solve(small).expect("flag subspaces are nested");
    let cone_reps = x.col_space_basis().extend_basis(&Mat::identity(field, big.cols()));
    class_in_quotient(small, flag_reps, &big.mul(&cone_reps))
}

/// Direct sum of classical zips placed in distinct homological degrees,
/// realized as a derived zip of zero-differential complexes with identity
/// glue.  The twists realize each layer's comparison maps on homology.
pub fn assemble_layers(field: &Field, layers: &[(i64, ClassicalFZip)]) -> DerivedFZip {
    let degrees: BTreeSet<i64> = layers.iter().map(|(n, _)| *n).collect();
    assert_eq!(degrees.len(), layers.len(), "layers must sit in distinct degrees");
    for (_, m) in layers {
        assert_eq!(m.field(), field, "layer field mismatch");
    }
    let active: Vec<&(i64, ClassicalFZip)> = layers.iter().filter(|(_, m)| m.rank() > 0).collect();
    if active.is_empty() {
        return DerivedFZip {
            c: Filtration::empty(field, Direction::Descending),
            d: Filtration::empty(field, Direction::Ascending),
            glue: Glue::Identity,
            twists: BTreeMap::new(),
        };
    }
    let deg_min = *active.iter().map(|(n, _)| n).min().unwrap();
    let deg_max = *active.iter().map(|(n, _)| n).max().unwrap();
    let layer_at = |deg: i64| -> Option<&ClassicalFZip> {
        active.iter().find(|(n, _)| *n == deg).map(|(_, m)| m)
    };

    let c_lo = active.iter().map(|(_, m)| m.c_window().0 - 1).min().unwrap();
    let c_hi = active.iter().map(|(_, m)| m.c_window().1).max().unwrap();
    let level = |sub: &dyn Fn(&ClassicalFZip, i64) -> Mat, k: i64| -> Complex {
        let dims: Vec<usize> = (deg_min..=deg_max)
            .map(|deg| layer_at(deg).map_or(0, |m| sub(m, k).cols()))
            .collect();
        Complex::with_zero_diff(field, deg_min, &dims)
    };
    let c_sub = |m: &ClassicalFZip, k: i64| m.c_subspace(k);
    let d_sub = |m: &ClassicalFZip, k: i64| m.d_subspace(k);

    let c_levels: Vec<Complex> = (c_lo..=c_hi).map(|k| level(&c_sub, k)).collect();
    let mut c_steps = Vec::new();
    for k in c_lo..c_hi {
        let src = &c_levels[(k + 1 - c_lo) as usize];
        let tgt = &c_levels[(k - c_lo) as usize];
        let comps = src
            .degrees()
            .map(|deg| match layer_at(deg) {
                Some(m) if src.dim(deg) > 0 => {
                    m.c_subspace(k).solve(&m.c_subspace(k + 1)).expect("nested flag")
                }
                _ => Mat::zeros(field, tgt.dim(deg), src.dim(deg)),
            })
            .collect();
        c_steps.push(ChainMap::new(src.clone(), tgt.clone(), comps).unwrap());
    }
    let c = Filtration::new(field.clone(), Direction::Descending, c_lo, c_levels, c_steps).unwrap();

    let d_lo = active.iter().map(|(_, m)| m.d_window().0 - 1).min().unwrap();
    let d_hi = active.iter().map(|(_, m)| m.d_window().1).max().unwrap();
    let d_levels: Vec<Complex> = (d_lo..=d_hi).map(|k| level(&d_sub, k)).collect();
    let mut d_steps = Vec::new();
    for k in d_lo..d_hi {
        let src = &d_levels[(k - d_lo) as usize];
        let tgt = &d_levels[(k + 1 - d_lo) as usize];
        let comps = src
            .degrees()
            .map(|deg| match layer_at(deg) {
                Some(m) if src.dim(deg) > 0 => {
                    m.d_subspace(k + 1).solve(&m.d_subspace(k)).expect("nested flag")
                }
                _ => Mat::zeros(field, tgt.dim(deg), src.dim(deg)),
            })
            .collect();
        d_steps.push(ChainMap::new(src.clone(), tgt.clone(), comps).unwrap());
    }
    let d = Filtration::new(field.clone(), Direction::Ascending, d_lo, d_levels, d_steps).unwrap();

    let mut support = BTreeSet::new();
    for (_, m) in &active {
        support.extend(m.classical_type().keys().copied());
    }
    let mut twists = BTreeMap::new();
    for k in support {
        let mut blocks = BTreeMap::new();
        for (deg, m) in &active {
            if m.classical_type().get(&k).copied().unwrap_or(0) == 0 {
                continue;
            }
            let tc = cone_transition(field, &m.c_subspace(k), &m.c_subspace(k + 1), &m.c_graded_reps(k));
            let td = cone_transition(field, &m.d_subspace(k), &m.d_subspace(k - 1), &m.d_graded_reps(k));
            let blk = td.inverse().unwrap().mul(m.phi_at(k).unwrap()).mul(&frob_mat(&tc));
            blocks.insert(*deg, blk);
        }
        let gc = c.graded(k);
        let gd = d.graded(k);
        twists.insert(k, qiso_through_homology(&gc.frobenius_twist(), &gd, &blocks));
    }
    DerivedFZip { c, d, glue: Glue::Identity, twists }
}

/// Embed a classical zip as a derived zip concentrated in degree n.
pub fn embed(m: &ClassicalFZip, n: i64) -> DerivedFZip {
    assemble_layers(m.field(), &[(n, m.clone())])
}

/// Project a degenerate derived zip to the classical zip carried by the
/// degree-n homology of its levels: flags are the images in H_n of the
/// colimit, comparisons are induced by the twists.  Errors on
/// non-degenerate input.
pub fn pi(z: &DerivedFZip, n: i64) -> Result<ClassicalFZip, ZipError> {
    if !z.is_degenerate_zip() {
        return Err(ZipError::NotDegenerate);
    }
    let fld = z.field().clone();
    let colim_c = z.c.colim();
    let colim_d = z.d.colim();
    let r = colim_c.betti(n);
    if colim_d.betti(n) != r {
        return Err(ZipError::GlueShape);
    }
    if r == 0 {
        return ClassicalFZip::new(fld, 0, &BTreeMap::new(), &BTreeMap::new(), &BTreeMap::new());
    }
    let g = z.glue_induced(n);

    let (ca, cb) = z.c.window();
    let mut cmap = BTreeMap::new();
    let mut c_im = BTreeMap::new();
    for k in ca..=cb + 1 {
        let a_k = z.c.composite_to_colim(k).induced_on_homology(n);
        let ga = g.mul(&a_k);
        cmap.insert(k, ga.col_space_basis());
        c_im.insert(k, ga);
    }
    let (da, db) = z.d.window();
    let mut dmap = BTreeMap::new();
    let mut d_im = BTreeMap::new();
    for k in da - 1..=db {
        let b_k = z.d.composite_to_colim(k).induced_on_homology(n);
        dmap.insert(k, b_k.col_space_basis());
        d_im.insert(k, b_k);
    }

    let (nc_lo, nc_subs) = normalize_desc(&fld, r, &cmap)?;
    let (nd_lo, nd_subs) = normalize_asc(&fld, r, &dmap)?;
    let bare = ClassicalFZip {
        field: fld.clone(),
        rank: r,
        c_lo: nc_lo,
        c_subs: nc_subs,
        d_lo: nd_lo,
        d_subs: nd_subs,
        phi: BTreeMap::new(),
    };
    let mut phi = BTreeMap::new();
    for (&k, &gk) in &bare.classical_type() {
        let reps_c = bare.c_graded_reps(k);
        let u = c_im
            .get(&k)
            .and_then(|m| m.solve(&reps_c))
            .ok_or(ZipError::NotDegenerate)?;
        let incl_c = cone_with_maps(&z.c.step_between(k)).1;
        let beta = incl_c.induced_on_homology(n).mul(&u);
        let reps_d = bare.d_graded_reps(k);
        let v = d_im
            .get(&k)
            .and_then(|m| m.solve(&reps_d))
            .ok_or(ZipError::NotDegenerate)?;
        let incl_d = cone_with_maps(&z.d.step_between(k - 1)).1;
        let gamma = incl_d.induced_on_homology(n).mul(&v);
        if beta.rows() != gk || !beta.is_invertible() || gamma.rows() != gk || !gamma.is_invertible() {
            return Err(ZipError::NotDegenerate);
        }
        let t = z.twists.get(&k).ok_or(ZipError::TwistMissing(k))?;
        let ht = t.induced_on_homology(n);
        phi.insert(k, gamma.inverse().unwrap().mul(&ht).mul(&frob_mat(&beta)));
    }
    ClassicalFZip::new(fld, r, &cmap, &dmap, &phi)
}

/// Split a degenerate zip into its classical layers and verify that
/// reassembling them reproduces the zip type, the Euler type, and the
/// levelwise Betti numbers of the input.
pub fn decompose(z: &DerivedFZip) -> Result<Vec<(i64, ClassicalFZip)>, ZipError> {
    let colim_c = z.c.colim();
    let mut parts = Vec::new();
    for n in colim_c.degrees() {
        if colim_c.betti(n) > 0 {
            parts.push((n, pi(z, n)?));
        }
    }
    let rebuilt = assemble_layers(z.field(), &parts);
    if rebuilt.zip_type() != z.zip_type() || rebuilt.euler() != z.euler() {
        return Err(ZipError::DecomposeMismatch);
    }
    let level_range = |f: &Filtration, g: &Filtration| -> Option<(i64, i64)> {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for x in [f, g] {
            if !x.is_window_empty() {
                let (a, b) = x.window();
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        (lo <= hi).then_some((lo, hi))
    };
    if let Some((lo, hi)) = level_range(&z.c, &rebuilt.c) {
        for k in lo..=hi {
            if z.c.level_at(k).betti_map() != rebuilt.c.level_at(k).betti_map() {
                return Err(ZipError::DecomposeMismatch);
            }
        }
    }
    if let Some((lo, hi)) = level_range(&z.d, &rebuilt.d) {
        for k in lo..=hi {
            if z.d.level_at(k).betti_map() != rebuilt.d.level_at(k).betti_map() {
                return Err(ZipError::DecomposeMismatch);
            }
        }
    }
    Ok(parts)
}

// ----------------------------------------------------------------------
// geometric lifts
// ----------------------------------------------------------------------

/// Lift a classical zip of type (g, g) at indices (0, 1) to the derived zip
/// of a curve of genus g: an extra unit layer in degree 0 and a rank-one
/// index-1 layer in degree -2 around the input in degree -1.
pub fn lift_curve(m: &ClassicalFZip) -> Result<DerivedFZip, ZipError> {
    let g = m.rank() / 2;
    let expected: BTreeMap<i64, usize> = if g == 0 {
        BTreeMap::new()
    } else {
        BTreeMap::from([(0, g), (1, g)])
    };
    if m.rank() != 2 * g || m.classical_type() != expected {
        return Err(ZipError::WrongType);
    }
    let fld = m.field();
    Ok(assemble_layers(
        fld,
        &[(0, unit_classical(fld)), (-1, m.clone()), (-2, rank_one_at(fld, 1))],
    ))
}

/// Lift a rank-22 classical zip of type (1, 20, 1) at indices (0, 1, 2) to
/// the derived zip of a K3 surface: unit layer in degree 0, the input in
/// degree -2, and a rank-one index-2 layer in degree -4.
pub fn lift_k3(m: &ClassicalFZip) -> Result<DerivedFZip, ZipError> {
    let expected = BTreeMap::from([(0, 1), (1, 20), (2, 1)]);
    if m.rank() != 22 || m.classical_type() != expected {
        return Err(ZipError::WrongType);
    }
    let fld = m.field();
    Ok(assemble_layers(
        fld,
        &[(0, unit_classical(fld)), (-2, m.clone()), (-4, rank_one_at(fld, 2))],
    ))
}

/// Poincaré-style pairing check: w must be a chain map from the descending
/// colimit to the shifted dual of that colimit; returns whether it is a
/// quasi-isomorphism.
pub fn check_dr_pairing(z: &DerivedFZip, shift: i64, w: &ChainMap) -> Result<bool, ZipError> {
    let src = z.c.colim();
    let tgt = src.dual().shift(shift);
    if w.source() != &src || w.target() != &tgt {
        return Err(ZipError::PairingShape);
    }
    Ok(w.is_quasi_iso())
}

// ======================================================================
