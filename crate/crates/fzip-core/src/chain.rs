//! Bounded chain complexes of finite dimensional vector spaces over a finite
//! field, and chain maps between them. Indexing is homological: the
//! differential lowers degree by one. A complex stores its support range
//! `[lo, hi]` and one dimension per degree; degrees outside the range are
//! zero. Constructors trim zero dimensions off both ends, so two complexes
//! are equal as data exactly when they agree degreewise.
//!
//! Homology at each degree comes with a fixed choice of representatives:
//! cycles are the echelon kernel of the outgoing differential, boundaries the
//! echelon column space of the incoming one, and representatives are the
//! kernel columns selected by the pivot scan to extend the boundary basis.
//! Every choice routes through `Mat`'s deterministic echelon code, so the
//! same complex always yields the same bases, and all of them commute with
//! entrywise Frobenius.

use std::collections::BTreeMap;

use crate::gf::Field;
use crate::mat::Mat;

#[derive(Debug, thiserror::Error)]
pub enum ChainError {
    #[error("field mismatch between components")]
    FieldMismatch,
    #[error("dimension list and differential list have inconsistent lengths")]
    Arity,
    #[error("differential into degree {0} has the wrong shape")]
    DiffShape(i64),
    #[error("composite of consecutive differentials is nonzero at degree {0}")]
    NotAComplex(i64),
    #[error("chain map component at degree {0} has the wrong shape")]
    CompShape(i64),
    #[error("chain map condition fails at degree {0}")]
    NotAChainMap(i64),
}

#[derive(Clone, PartialEq)]
pub struct Complex {
    field: Field,
    lo: i64,
    dims: Vec<usize>,
    /// diffs[j] is the differential into degree lo+j, i.e. the map
    /// C_{lo+j+1} -> C_{lo+j}, of shape dims[j] x dims[j+1].
    diffs: Vec<Mat>,
}

impl std::fmt::Debug for Complex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Complex[{}..{}] dims {:?} over {:?}",
            self.lo,
            self.hi(),
            self.dims,
            self.field
        )
    }
}

impl Complex {
    pub fn new(field: Field, lo: i64, dims: Vec<usize>, diffs: Vec<Mat>) -> Result<Self, ChainError> {
        if dims.is_empty() {
            if !diffs.is_empty() {
                return Err(ChainError::Arity);
            }
        } else if diffs.len() + 1 != dims.len() {
            return Err(ChainError::Arity);
        }
        for (j, d) in diffs.iter().enumerate() {
            if d.field() != &field {
                return Err(ChainError::FieldMismatch);
            }
            if d.rows() != dims[j] || d.cols() != dims[j + 1] {
                return Err(ChainError::DiffShape(lo + j as i64));
            }
        }
        for j in 1..diffs.len() {
            // d into lo+j-1 composed with d into lo+j must vanish.
            if !diffs[j - 1].mul(&diffs[j]).is_zero() {
                return Err(ChainError::NotAComplex(lo + j as i64 + 1));
            }
        }
        let mut c = Complex { field, lo, dims, diffs };
        c.trim();
        Ok(c)
    }

    fn trim(&mut self) {
        while self.dims.last() == Some(&0) {
            self.dims.pop();
            self.diffs.pop();
        }
        while self.dims.first() == Some(&0) {
            self.dims.remove(0);
            if !self.diffs.is_empty() {
                self.diffs.remove(0);
            }
            self.lo += 1;
        }
        if self.dims.is_empty() {
            self.lo = 0;
            self.diffs.clear();
        }
    }

    pub fn zero(field: &Field) -> Self {
        Complex { field: field.clone(), lo: 0, dims: Vec::new(), diffs: Vec::new() }
    }

    pub fn concentrated(field: &Field, degree: i64, dim: usize) -> Self {
        if dim == 0 {
            return Self::zero(field);
        }
        Complex { field: field.clone(), lo: degree, dims: vec![dim], diffs: Vec::new() }
    }

    /// A complex with the given dimensions and all differentials zero.
    pub fn with_zero_diff(field: &Field, lo: i64, dims: &[usize]) -> Self {
        let diffs = if dims.is_empty() {
            Vec::new()
        } else {
            (0..dims.len() - 1).map(|j| Mat::zeros(field, dims[j], dims[j + 1])).collect()
        };
        Self::new(field.clone(), lo, dims.to_vec(), diffs).unwrap()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn lo(&self) -> i64 {
        self.lo
    }
    pub fn hi(&self) -> i64 {
        self.lo + self.dims.len() as i64 - 1
    }
    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }
    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn dim(&self, d: i64) -> usize {
        if d < self.lo || d > self.hi() {
            0
        } else {
            self.dims[(d - self.lo) as usize]
        }
    }

    /// The differential out of degree d, a map C_d -> C_{d-1}.
    pub fn diff(&self, d: i64) -> Mat {
        if d > self.lo && d <= self.hi() {
            self.diffs[(d - 1 - self.lo) as usize].clone()
        } else {
            Mat::zeros(&self.field, self.dim(d - 1), self.dim(d))
        }
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi()
    }

    // ------------------------------------------------------------------
    // homology
    // ------------------------------------------------------------------

    /// Echelon-kernel basis of the outgoing differential; columns are cycles.
    pub fn cycles(&self, d: i64) -> Mat {
        self.diff(d).kernel_basis()
    }

    /// Canonical column-space basis of the incoming differential.
    pub fn boundaries(&self, d: i64) -> Mat {
        self.diff(d + 1).col_space_basis()
    }

    pub fn betti(&self, d: i64) -> usize {
        self.dim(d) - self.diff(d).rank() - self.diff(d + 1).rank()
    }

    /// Nonzero Betti numbers by degree.
    pub fn betti_map(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for d in self.degrees() {
            let b = self.betti(d);
            if b > 0 {
                out.insert(d, b);
            }
        }
        out
    }

    /// Cycle representatives for a basis of homology at degree d: the kernel
    /// columns chosen by the pivot scan to extend the boundary basis.
    pub fn homology_reps(&self, d: i64) -> Mat {
        self.boundaries(d).extend_basis(&self.cycles(d))
    }

    /// Coordinates of the homology classes of the given cycles (one column
    /// each) in the `homology_reps` basis. None if some column is not in the
    /// span of boundaries and representatives, i.e. not a cycle.
    pub fn express_in_homology(&self, d: i64, cycles: &Mat) -> Option<Mat> {
        let b = self.boundaries(d);
        let r = self.homology_reps(d);
        let x = b.hstack(&r).solve(cycles)?;
        let h = r.cols();
        Some(Mat::from_fn(&self.field, h, cycles.cols(), |i, j| x[(b.cols() + i, j)]))
    }

    /// The complex with the homology dimensions and zero differentials.
    pub fn homology_complex(&self) -> Complex {
        let dims: Vec<usize> = self.degrees().map(|d| self.betti(d)).collect();
        Complex::with_zero_diff(&self.field, self.lo, &dims)
    }

    pub fn is_acyclic(&self) -> bool {
        self.degrees().all(|d| self.betti(d) == 0)
    }

    // ------------------------------------------------------------------
    // constructions
    // ------------------------------------------------------------------

    /// Degree shift: the result has C_{d-k} in degree d, with differentials
    /// scaled by (-1)^k.
    pub fn shift(&self, k: i64) -> Complex {
        let flip = k.rem_euclid(2) == 1;
        let diffs = self
            .diffs
            .iter()
            .map(|m| if flip { m.neg() } else { m.clone() })
            .collect();
        Complex::new(self.field.clone(), self.lo + k, self.dims.clone(), diffs).unwrap()
    }

    /// Degreewise dual: degree d of the result is the dual of degree -d, and
    /// the differential is the transpose of the original one. Applying it
    /// twice gives back the original complex degreewise.
    pub fn dual(&self) -> Complex {
        if self.is_empty() {
            return Complex::zero(&self.field);
        }
        let n = self.dims.len();
        let dims: Vec<usize> = self.dims.iter().rev().copied().collect();
        let diffs: Vec<Mat> = (0..n - 1).map(|j| self.diffs[n - 2 - j].transpose()).collect();
        Complex::new(self.field.clone(), -self.hi(), dims, diffs).unwrap()
    }

    /// Apply the field's Frobenius to every differential entry.
    pub fn frobenius_twist(&self) -> Complex {
        let f = self.field.clone();
        let diffs = self.diffs.iter().map(|m| m.map_entries(|x| f.frobenius(x))).collect();
        Complex::new(self.field.clone(), self.lo, self.dims.clone(), diffs).unwrap()
    }

    /// Tensor product with the usual sign rule: on the summand A_i (x) B_j
    /// the differential acts by d_A (x) 1 into (i-1, j) and by (-1)^i 1 (x)
    /// d_B into (i, j-1). Summands of a fixed total degree are ordered by
    /// ascending first index; within a summand the basis order is the
    /// Kronecker order.
    pub fn tensor(&self, other: &Complex) -> Complex {
        assert_eq!(self.field, other.field);
        if self.is_empty() || other.is_empty() {
            return Complex::zero(&self.field);
        }
        let f = &self.field;
        let lo = self.lo + other.lo;
        let hi = self.hi() + other.hi();
        let layout = |d: i64| tensor_layout(self, other, d);
        let mut dims = Vec::new();
        for d in lo..=hi {
            dims.push(layout(d).total);
        }
        let mut diffs = Vec::new();
        for d in lo + 1..=hi {
            let tgt = layout(d - 1);
            let src = layout(d);
            let mut m = Mat::zeros(f, tgt.total, src.total);
            for &(i, j, off) in &src.parts {
                let di = self.dim(i);
                let dj = other.dim(j);
                // d_A (x) 1 lands in (i-1, j).
                if let Some(toff) = tgt.offset(i - 1, j) {
                    let blk = self.diff(i).kronecker(&Mat::identity(f, dj));
                    copy_block(&mut m, &blk, toff, off);
                }
                // (-1)^i 1 (x) d_B lands in (i, j-1).
                if let Some(toff) = tgt.offset(i, j - 1) {
                    let mut blk = Mat::identity(f, di).kronecker(&other.diff(j));
                    if i.rem_euclid(2) == 1 {
                        blk = blk.neg();
                    }
                    copy_block(&mut m, &blk, toff, off);
                }
            }
            diffs.push(m);
        }
        // The differentials are built target-first in diffs order: diffs[j]
        // must be the map into degree lo+j, which is the one we pushed for
        // d = lo+j+1. The loop above pushed them in ascending d, so they are
        // already in the right slots.
        Complex::new(f.clone(), lo, dims, diffs).unwrap()
    }
}

/// Per-degree summand layout of a tensor product.
pub(crate) struct TensorLayout {
    pub parts: Vec<(i64, i64, usize)>,
    pub total: usize,
}

impl TensorLayout {
    pub fn offset(&self, i: i64, j: i64) -> Option<usize> {
        self.parts.iter().find(|&&(a, b, _)| a == i && b == j).map(|&(_, _, o)| o)
    }
}

pub(crate) fn tensor_layout(a: &Complex, b: &Complex, d: i64) -> TensorLayout {
    let mut parts = Vec::new();
    let mut total = 0;
    for i in a.lo()..=a.hi() {
        let j = d - i;
        if j < b.lo() || j > b.hi() {
            continue;
        }
        parts.push((i, j, total));
        total += a.dim(i) * b.dim(j);
    }
    TensorLayout { parts, total }
}

fn copy_block(dst: &mut Mat, blk: &Mat, roff: usize, coff: usize) {
    for r in 0..blk.rows() {
        for c in 0..blk.cols() {
            dst[(roff + r, coff + c)] = blk[(r, c)];
        }
    }
}

// ======================================================================
// chain maps
// ======================================================================

#[derive(Clone, PartialEq)]
pub struct ChainMap {
    source: Complex,
    target: Complex,
    /// comps[j] is the component at degree source.lo + j, of shape
    /// target.dim(d) x source.dim(d).
    comps: Vec<Mat>,
}

impl std::fmt::Debug for ChainMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ChainMap {:?} -> {:?}", self.source, self.target)
    }
}

impl ChainMap {
    pub fn new(source: Complex, target: Complex, comps: Vec<Mat>) -> Result<Self, ChainError> {
        if source.field() != target.field() {
            return Err(ChainError::FieldMismatch);
        }
        if comps.len() != source.dims.len() {
            return Err(ChainError::Arity);
        }
        for (j, m) in comps.iter().enumerate() {
            let d = source.lo + j as i64;
            if m.field() != source.field() {
                return Err(ChainError::FieldMismatch);
            }
            if m.rows() != target.dim(d) || m.cols() != source.dim(d) {
                return Err(ChainError::CompShape(d));
            }
        }
        let map = ChainMap { source, target, comps };
        for d in map.source.lo..=map.source.hi() {
            let lhs = map.target.diff(d).mul(&map.comp(d));
            let rhs = map.comp(d - 1).mul(&map.source.diff(d));
            if lhs != rhs {
                return Err(ChainError::NotAChainMap(d));
            }
        }
        Ok(map)
    }

    pub fn zero(source: &Complex, target: &Complex) -> Self {
        let comps = source
            .degrees()
            .map(|d| Mat::zeros(source.field(), target.dim(d), source.dim(d)))
            .collect();
        ChainMap { source: source.clone(), target: target.clone(), comps }
    }

    pub fn identity(c: &Complex) -> Self {
        let comps = c.degrees().map(|d| Mat::identity(c.field(), c.dim(d))).collect();
        ChainMap { source: c.clone(), target: c.clone(), comps }
    }

    pub fn source(&self) -> &Complex {
        &self.source
    }
    pub fn target(&self) -> &Complex {
        &self.target
    }

    pub fn comp(&self, d: i64) -> Mat {
        if d < self.source.lo || d > self.source.hi() {
            Mat::zeros(self.source.field(), self.target.dim(d), self.source.dim(d))
        } else {
            self.comps[(d - self.source.lo) as usize].clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|m| m.is_zero())
    }

    pub fn add(&self, other: &ChainMap) -> ChainMap {
        assert!(self.source == other.source && self.target == other.target, "map addition shape mismatch");
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect();
        ChainMap { source: self.source.clone(), target: self.target.clone(), comps }
    }

    pub fn neg(&self) -> ChainMap {
        let comps = self.comps.iter().map(|m| m.neg()).collect();
        ChainMap { source: self.source.clone(), target: self.target.clone(), comps }
    }

    pub fn sub(&self, other: &ChainMap) -> ChainMap {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u16) -> ChainMap {
        let comps = self.comps.iter().map(|m| m.scale(c)).collect();
        ChainMap { source: self.source.clone(), target: self.target.clone(), comps }
    }

    /// Composition in diagrammatic order: self followed by next.
    pub fn then(&self, next: &ChainMap) -> ChainMap {
        assert!(self.target == next.source, "composition through mismatched middle complex");
        let comps = self.source.degrees().map(|d| next.comp(d).mul(&self.comp(d))).collect();
        ChainMap { source: self.source.clone(), target: next.target.clone(), comps }
    }

    pub fn frobenius_twist(&self) -> ChainMap {
        let f = self.source.field().clone();
        let comps = self.comps.iter().map(|m| m.map_entries(|x| f.frobenius(x))).collect();
        ChainMap {
            source: self.source.frobenius_twist(),
            target: self.target.frobenius_twist(),
            comps,
        }
    }

    /// Matrix of the induced map on homology at degree d, written in the
    /// canonical representative bases of source and target.
    pub fn induced_on_homology(&self, d: i64) -> Mat {
        let reps = self.source.homology_reps(d);
        let img = self.comp(d).mul(&reps);
        self.target
            .express_in_homology(d, &img)
            .expect("image of a cycle under a chain map is a cycle")
    }

    pub fn is_quasi_iso(&self) -> bool {
        let lo = self.source.lo.min(self.target.lo);
        let hi = self.source.hi().max(self.target.hi());
        for d in lo..=hi {
            let hs = self.source.betti(d);
            let ht = self.target.betti(d);
            if hs != ht {
                return false;
            }
            if hs > 0 && self.induced_on_homology(d).rank() != hs {
                return false;
            }
        }
        true
    }

    /// Monomorphism in the homotopy sense: injective on homology in every
    /// degree.
    pub fn is_monomorphism(&self) -> bool {
        for d in self.source.degrees() {
            let hs = self.source.betti(d);
            if hs > 0 && self.induced_on_homology(d).rank() != hs {
                return false;
            }
        }
        true
    }
}

// ======================================================================
// cones, sums, splittings
// ======================================================================

/// Mapping cone of f: degree d is source_{d-1} (+) target_d, source block
/// first, with differential [[-d_src, 0], [-f, d_tgt]].
pub fn cone(f: &ChainMap) -> Complex {
    cone_with_maps(f).0
}

/// The cone together with its two structure maps: the inclusion of the
/// target and the projection onto the source shifted up by one.
pub fn cone_with_maps(f: &ChainMap) -> (Complex, ChainMap, ChainMap) {
    let src = f.source();
    let tgt = f.target();
    let fld = src.field().clone();
    let lo = (src.lo() + 1).min(tgt.lo());
    let hi = (src.hi() + 1).max(tgt.hi());
    if src.is_empty() && tgt.is_empty() {
        let z = Complex::zero(&fld);
        return (z.clone(), ChainMap::zero(tgt, &z), ChainMap::zero(&z, &src.shift(1)));
    }
    let dims: Vec<usize> = (lo..=hi).map(|d| src.dim(d - 1) + tgt.dim(d)).collect();
    let mut diffs = Vec::new();
    for d in lo + 1..=hi {
        let a = src.diff(d - 1).neg();
        let b = Mat::zeros(&fld, src.dim(d - 2), tgt.dim(d));
        let c = f.comp(d - 1).neg();
        let e = tgt.diff(d);
        diffs.push(Mat::from_blocks(&fld, &[vec![&a, &b], vec![&c, &e]]));
    }
    let cone = Complex::new(fld.clone(), lo, dims, diffs).unwrap();
    let incl = {
        let comps = tgt
            .degrees()
            .map(|d| {
                let z = Mat::zeros(&fld, src.dim(d - 1), tgt.dim(d));
                z.vstack(&Mat::identity(&fld, tgt.dim(d)))
            })
            .collect();
        ChainMap::new(tgt.clone(), cone.clone(), comps).unwrap()
    };
    let shifted = src.shift(1);
    let proj = {
        let comps = cone
            .degrees()
            .map(|d| {
                let i = Mat::identity(&fld, src.dim(d - 1));
                let z = Mat::zeros(&fld, src.dim(d - 1), tgt.dim(d));
                i.hstack(&z)
            })
            .collect();
        ChainMap::new(cone.clone(), shifted, comps).unwrap()
    };
    (cone, incl, proj)
}

/// Map between cones induced by a commuting square: alpha on sources, beta
/// on targets, with beta . f1 == f2 . alpha.
pub fn cone_functorial(f1: &ChainMap, f2: &ChainMap, alpha: &ChainMap, beta: &ChainMap) -> ChainMap {
    assert!(alpha.source() == f1.source() && alpha.target() == f2.source(), "alpha endpoints");
    assert!(beta.source() == f1.target() && beta.target() == f2.target(), "beta endpoints");
    assert!(f1.then(beta) == alpha.then(f2), "square does not commute");
    let c1 = cone(f1);
    let c2 = cone(f2);
    let fld = c1.field().clone();
    let comps = c1
        .degrees()
        .map(|d| {
            let a = alpha.comp(d - 1);
            let b = beta.comp(d);
            Mat::block_diag(&fld, &[&a, &b])
        })
        .collect();
    ChainMap::new(c1, c2, comps).unwrap()
}

/// Direct sum with inclusion and projection maps, blocks in argument order.
pub fn direct_sum_with_maps(field: &Field, parts: &[&Complex]) -> (Complex, Vec<ChainMap>, Vec<ChainMap>) {
    let lo = parts.iter().filter(|c| !c.is_empty()).map(|c| c.lo()).min().unwrap_or(0);
    let hi = parts.iter().filter(|c| !c.is_empty()).map(|c| c.hi()).max().unwrap_or(-1);
    if hi < lo {
        let z = Complex::zero(field);
        let incls = parts.iter().map(|p| ChainMap::zero(p, &z)).collect();
        let projs = parts.iter().map(|p| ChainMap::zero(&z, p)).collect();
        return (z, incls, projs);
    }
    let offset = |i: usize, d: i64| -> usize { parts[..i].iter().map(|p| p.dim(d)).sum() };
    let dims: Vec<usize> = (lo..=hi).map(|d| offset(parts.len(), d)).collect();
    let mut diffs = Vec::new();
    for d in lo + 1..=hi {
        let mut m = Mat::zeros(field, offset(parts.len(), d - 1), offset(parts.len(), d));
        for (i, p) in parts.iter().enumerate() {
            let blk = p.diff(d);
            let (ro, co) = (offset(i, d - 1), offset(i, d));
            for r in 0..blk.rows() {
                for c in 0..blk.cols() {
                    m[(ro + r, co + c)] = blk[(r, c)];
                }
            }
        }
        diffs.push(m);
    }
    let sum = Complex::new(field.clone(), lo, dims, diffs).unwrap();
    let mut incls = Vec::new();
    let mut projs = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        let inc_comps = p
            .degrees()
            .map(|d| {
                let mut m = Mat::zeros(field, sum.dim(d), p.dim(d));
                for k in 0..p.dim(d) {
                    m[(offset(i, d) + k, k)] = 1;
                }
                m
            })
            .collect();
        incls.push(ChainMap::new((*p).clone(), sum.clone(), inc_comps).unwrap());
        let prj_comps = sum
            .degrees()
            .map(|d| {
                let mut m = Mat::zeros(field, p.dim(d), sum.dim(d));
                for k in 0..p.dim(d) {
                    m[(k, offset(i, d) + k)] = 1;
                }
                m
            })
            .collect();
        projs.push(ChainMap::new(sum.clone(), (*p).clone(), prj_comps).unwrap());
    }
    (sum, incls, projs)
}

pub fn direct_sum(field: &Field, parts: &[&Complex]) -> Complex {
    direct_sum_with_maps(field, parts).0
}

/// Tensor product of chain maps, Kronecker blocks on matching summands.
pub fn tensor_map(f: &ChainMap, g: &ChainMap) -> ChainMap {
    let src = f.source().tensor(g.source());
    let tgt = f.target().tensor(g.target());
    let fld = src.field().clone();
    let comps = src
        .degrees()
        .map(|d| {
            let sl = tensor_layout(f.source(), g.source(), d);
            let tl = tensor_layout(f.target(), g.target(), d);
            let mut m = Mat::zeros(&fld, tgt.dim(d), src.dim(d));
            for &(i, j, soff) in &sl.parts {
                if let Some(toff) = tl.offset(i, j) {
                    let blk = f.comp(i).kronecker(&g.comp(j));
                    for r in 0..blk.rows() {
                        for c in 0..blk.cols() {
                            m[(toff + r, soff + c)] = blk[(r, c)];
                        }
                    }
                }
            }
            m
        })
        .collect();
    ChainMap::new(src, tgt, comps).unwrap()
}

/// Quasi-isomorphism from a complex onto its homology (zero differentials):
/// project each degree along a fixed complement of the cycles, then take
/// homology classes in the canonical representative basis.
pub fn split(c: &Complex) -> ChainMap {
    let h = c.homology_complex();
    let fld = c.field().clone();
    let comps = c
        .degrees()
        .map(|d| {
            let n = c.dim(d);
            let z = c.cycles(d);
            let w = z.extend_basis(&Mat::identity(&fld, n));
            let p = z.hstack(&w);
            let pinv = p.inverse().expect("cycle basis extension is a basis");
            let cls = c.express_in_homology(d, &z).expect("kernel columns are cycles");
            let zer = Mat::zeros(&fld, h.dim(d), w.cols());
            cls.hstack(&zer).mul(&pinv)
        })
        .collect();
    ChainMap::new(c.clone(), h, comps).unwrap()
}

/// Section of `split` up to homotopy: include the canonical representatives
/// back into the complex. Induces the identity on homology.
pub fn cosplit(c: &Complex) -> ChainMap {
    let h = c.homology_complex();
    let comps = h.degrees().map(|d| c.homology_reps(d)).collect();
    ChainMap::new(h, c.clone(), comps).unwrap()
}

/// Chain map x -> y assembled as cosplit(y) . m . split(x), where m is given
/// degreewise on homology (missing degrees are zero). Quasi-isomorphism
/// exactly when every degree's block is square and invertible.
pub fn qiso_through_homology(x: &Complex, y: &Complex, blocks: &BTreeMap<i64, Mat>) -> ChainMap {
    let hx = x.homology_complex();
    let hy = y.homology_complex();
    let fld = x.field().clone();
    let comps = hx
        .degrees()
        .map(|d| match blocks.get(&d) {
            Some(m) => {
                assert!(m.rows() == hy.dim(d) && m.cols() == hx.dim(d), "homology block shape at degree {d}");
                m.clone()
            }
            None => Mat::zeros(&fld, hy.dim(d), hx.dim(d)),
        })
        .collect();
    let mid = ChainMap::new(hx, hy, comps).unwrap();
    split(x).then(&mid).then(&cosplit(y))
}

/// The same with identity blocks wherever the two homologies have equal
/// dimension; panics if they do not.
pub fn qiso_matching_homology(x: &Complex, y: &Complex) -> ChainMap {
    let fld = x.field().clone();
    let mut blocks = BTreeMap::new();
    for d in x.lo().min(y.lo())..=x.hi().max(y.hi()) {
        let b = x.betti(d);
        assert_eq!(b, y.betti(d), "Betti mismatch at degree {d}");
        if b > 0 {
            blocks.insert(d, Mat::identity(&fld, b));
        }
    }
    qiso_through_homology(x, y, &blocks)
}

// ======================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;

    fn two_term(f: &Field, d: Mat) -> Complex {
        let (r, c) = (d.rows(), d.cols());
        Complex::new(f.clone(), 0, vec![r, c], vec![d]).unwrap()
    }

    #[test]
    fn homology_of_two_term() {
        let f = make_field(2, 1).unwrap();
        let d = Mat::from_rows(&f, &[vec![1, 0]]);
        let c = two_term(&f, d);
        assert_eq!(c.betti(0), 0);
        assert_eq!(c.betti(1), 1);
        assert_eq!(c.betti_map(), [(1i64, 1usize)].into_iter().collect());
    }

    #[test]
    fn constructor_rejects_bad_data() {
        let f = make_field(2, 1).unwrap();
        let d1 = Mat::from_rows(&f, &[vec![1]]);
        let d2 = Mat::from_rows(&f, &[vec![1]]);
        // d1*d2 = [1] != 0.
        let err = Complex::new(f.clone(), 0, vec![1, 1, 1], vec![d1, d2]).unwrap_err();
        assert!(matches!(err, ChainError::NotAComplex(2)));
        let bad = Mat::from_rows(&f, &[vec![1, 0]]);
        let err = Complex::new(f.clone(), 0, vec![1, 1], vec![bad]).unwrap_err();
        assert!(matches!(err, ChainError::DiffShape(0)));
    }

    #[test]
    fn trimming_normalizes_bounds() {
        let f = make_field(3, 1).unwrap();
        let c = Complex::with_zero_diff(&f, -2, &[0, 0, 2, 0]);
        assert_eq!(c.lo(), 0);
        assert_eq!(c.hi(), 0);
        assert_eq!(c.dim(0), 2);
        assert!(Complex::with_zero_diff(&f, 5, &[0, 0]).is_empty());
    }

    #[test]
    fn shift_round_trip_and_sign() {
        let f = make_field(3, 1).unwrap();
        let d = Mat::from_rows(&f, &[vec![1], vec![2]]);
        let c = two_term(&f, d);
        assert_eq!(c.shift(3).shift(-3), c);
        let s = c.shift(1);
        assert_eq!(s.lo(), 1);
        assert_eq!(s.diff(2), Mat::from_rows(&f, &[vec![2], vec![1]]));
        assert_eq!(c.shift(2).diff(3), c.diff(1));
    }

    #[test]
    fn dual_is_an_involution() {
        let f = make_field(5, 1).unwrap();
        let d1 = Mat::from_rows(&f, &[vec![1, 2], vec![0, 0]]);
        let d2 = Mat::from_rows(&f, &[vec![3, 3], vec![1, 1]]);
        let c = Complex::new(f.clone(), -1, vec![2, 2, 2], vec![d1, d2]).unwrap();
        let dd = c.dual().dual();
        assert_eq!(dd, c);
        // Degree bookkeeping: dual swaps lo and hi through negation.
        assert_eq!(c.dual().lo(), -c.hi());
        assert_eq!(c.dual().hi(), -c.lo());
        assert_eq!(c.dual().diff(0), c.diff(1).transpose());
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let f = make_field(2, 2).unwrap();
        let d = Mat::from_rows(&f, &[vec![2, 1], vec![3, 2]]);
        let kernel_dim = d.kernel_basis().cols();
        assert!(kernel_dim > 0);
        let c = two_term(&f, d);
        let id = ChainMap::identity(&c);
        assert!(cone(&id).is_acyclic());
    }

    #[test]
    fn cone_entries_frozen_gf3() {
        let f = make_field(3, 1).unwrap();
        // Multiplication by 2 on a one-dimensional complex in degree 0.
        let a = Complex::concentrated(&f, 0, 1);
        let fm = ChainMap::new(a.clone(), a.clone(), vec![Mat::from_rows(&f, &[vec![2]])]).unwrap();
        let c = cone(&fm);
        assert_eq!((c.lo(), c.hi()), (0, 1));
        assert_eq!(c.diff(1), Mat::from_rows(&f, &[vec![1]]));
        assert!(c.is_acyclic());
        // Cone over the zero target is the shifted source with flipped sign.
        let b = two_term(&f, Mat::from_rows(&f, &[vec![1]]));
        let z = ChainMap::zero(&b, &Complex::zero(&f));
        let cz = cone(&z);
        assert_eq!(cz, b.shift(1));
        assert_eq!(cz.diff(2), Mat::from_rows(&f, &[vec![2]]));
    }

    #[test]
    fn cone_structure_maps_compose_to_zero() {
        let f = make_field(2, 1).unwrap();
        let a = two_term(&f, Mat::from_rows(&f, &[vec![1]]));
        let fm = ChainMap::identity(&a);
        let (c, incl, proj) = cone_with_maps(&fm);
        assert_eq!((c.lo(), c.hi()), (0, 2));
        assert!(incl.then(&proj).is_zero());
        assert_eq!(proj.target(), &a.shift(1));
    }

    #[test]
    fn tensor_signs_frozen_gf3() {
        let f = make_field(3, 1).unwrap();
        let a = two_term(&f, Mat::from_rows(&f, &[vec![1]]));
        let t = a.tensor(&a);
        assert_eq!((t.lo(), t.hi()), (0, 2));
        assert_eq!(t.dim(1), 2);
        // Degree 1 summand order: (0,1) then (1,0).
        assert_eq!(t.diff(2), Mat::from_rows(&f, &[vec![1], vec![2]]));
        assert_eq!(t.diff(1), Mat::from_rows(&f, &[vec![1, 1]]));
        assert!(t.is_acyclic());
    }

    #[test]
    fn kunneth_dimensions() {
        let f = make_field(2, 1).unwrap();
        // Zero differentials: homology is the whole thing, so the tensor
        // Betti numbers are the convolution of the dimension sequences.
        let a = Complex::with_zero_diff(&f, 0, &[1, 2]);
        let b = Complex::with_zero_diff(&f, -1, &[3, 1]);
        let t = a.tensor(&b);
        assert_eq!(t.betti(-1), 3);
        assert_eq!(t.betti(0), 1 + 6);
        assert_eq!(t.betti(1), 2);
        // Mixed: an acyclic factor kills everything.
        let acyclic = two_term(&f, Mat::from_rows(&f, &[vec![1]]));
        assert!(acyclic.tensor(&b).is_acyclic());
    }

    #[test]
    fn tensor_map_respects_composition() {
        let f = make_field(3, 1).unwrap();
        let a = two_term(&f, Mat::from_rows(&f, &[vec![1]]));
        let b = Complex::with_zero_diff(&f, 0, &[2]);
        let fm = ChainMap::identity(&a).scale(2);
        let gm = ChainMap::new(b.clone(), b.clone(), vec![Mat::from_rows(&f, &[vec![1, 1], vec![0, 1]])]).unwrap();
        let t = tensor_map(&fm, &gm);
        let t2 = tensor_map(&fm.then(&fm), &gm.then(&gm));
        assert_eq!(t.then(&t), t2);
    }

    #[test]
    fn split_and_cosplit_are_quasi_isos() {
        let f = make_field(2, 1).unwrap();
        // d(e1) = x, so H_1 = 0 and H_0 has the class of e2's image space.
        let d = Mat::from_rows(&f, &[vec![1], vec![0]]);
        let c = Complex::new(f.clone(), 0, vec![2, 1], vec![d]).unwrap();
        let s = split(&c);
        assert_eq!(s.target().dim(0), 1);
        assert_eq!(s.target().dim(1), 0);
        assert!(s.is_quasi_iso());
        assert_eq!(s.comp(0), Mat::from_rows(&f, &[vec![0, 1]]));
        let t = cosplit(&c);
        assert!(t.is_quasi_iso());
        // split . cosplit is the identity on homology already at chain level.
        assert_eq!(t.then(&s), ChainMap::identity(&c.homology_complex()));
    }

    #[test]
    fn qiso_through_homology_synthesizes_quasi_isos() {
        let f = make_field(3, 2).unwrap();
        let x = Complex::new(
            f.clone(),
            0,
            vec![2, 1],
            vec![Mat::from_rows(&f, &[vec![1], vec![0]])],
        )
        .unwrap();
        let y = Complex::with_zero_diff(&f, 0, &[1]);
        let m = qiso_matching_homology(&x, &y);
        assert!(m.is_quasi_iso());
        let back = qiso_matching_homology(&y, &x);
        assert!(back.is_quasi_iso());
        // A non-invertible block gives a non-quasi-iso.
        let blocks = [(0i64, Mat::zeros(&f, 1, 1))].into_iter().collect();
        assert!(!qiso_through_homology(&x, &y, &blocks).is_quasi_iso());
    }

    #[test]
    fn homology_reps_commute_with_frobenius() {
        let f = make_field(2, 2).unwrap();
        let d = Mat::from_rows(&f, &[vec![2, 1, 0], vec![3, 0, 1]]);
        let c = Complex::new(f.clone(), 0, vec![2, 3], vec![d]).unwrap();
        let tw = c.frobenius_twist();
        for deg in 0..=1 {
            let a = c.homology_reps(deg).map_entries(|x| f.frobenius(x));
            let b = tw.homology_reps(deg);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn induced_on_homology_matrix() {
        let f = make_field(3, 1).unwrap();
        let c = Complex::concentrated(&f, 0, 1);
        let m = ChainMap::new(c.clone(), c.clone(), vec![Mat::from_rows(&f, &[vec![2]])]).unwrap();
        assert_eq!(m.induced_on_homology(0), Mat::from_rows(&f, &[vec![2]]));
        assert!(m.is_quasi_iso());
        let z = ChainMap::zero(&c, &c);
        assert!(!z.is_quasi_iso());
        assert!(!z.is_monomorphism());
    }

    #[test]
    fn direct_sum_betti_and_maps() {
        let f = make_field(2, 1).unwrap();
        let a = two_term(&f, Mat::from_rows(&f, &[vec![1]]));
        let b = Complex::concentrated(&f, -1, 2);
        let (s, incls, projs) = direct_sum_with_maps(&f, &[&a, &b]);
        assert_eq!((s.lo(), s.hi()), (-1, 1));
        assert_eq!(s.betti(-1), 2);
        assert_eq!(s.betti(0), 0);
        for i in 0..2 {
            let round = incls[i].then(&projs[i]);
            let id = ChainMap::identity(if i == 0 { &a } else { &b });
            assert_eq!(round, id);
        }
        assert!(incls[0].then(&projs[1]).is_zero());
    }

    #[test]
    fn cone_functorial_is_a_chain_map() {
        let f = make_field(2, 1).unwrap();
        let a = two_term(&f, Mat::from_rows(&f, &[vec![1]]));
        let id = ChainMap::identity(&a);
        // Square with alpha = beta = id over f1 = f2 = id.
        let cf = cone_functorial(&id, &id, &id, &id);
        assert_eq!(cf, ChainMap::identity(&cone(&id)));
    }

    #[test]
    fn express_in_homology_rejects_non_cycles() {
        let f = make_field(2, 1).unwrap();
        let d = Mat::from_rows(&f, &[vec![1, 0]]);
        let c = two_term(&f, d);
        // Degree 1: cycles are spanned by e2; e1 is not a cycle.
        let v = Mat::from_rows(&f, &[vec![1], vec![0]]);
        assert!(c.express_in_homology(1, &v).is_none());
        let w = Mat::from_rows(&f, &[vec![0], vec![1]]);
        assert_eq!(c.express_in_homology(1, &w).unwrap(), Mat::identity(&f, 1));
    }
}
