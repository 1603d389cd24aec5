//! The dictionary between filtered data and sheaf-style presentations on a
//! projective line with its two standard charts glued through Frobenius.
//!
//! Three layers: a Koszul-style pullback that splits a filtration into the
//! direct sum of its graded pieces; an encoding of classical F-zips as a
//! pair of graded chart modules with transition maps of degrees +1 and -1;
//! and a perfect-complex variant whose single glued comparison map is
//! stored against the indexed direct sum of all graded pieces.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::chain::{direct_sum, direct_sum_with_maps, ChainMap, Complex};
use crate::filt::{Direction, Filtration};
use crate::fzip::{ClassicalFZip, DerivedFZip, Glue, ZipError};
use crate::gf::Field;
use crate::mat::Mat;

#[derive(Debug, Error)]
pub enum PinchedError {
    #[error("chart module has inconsistent shapes")]
    ChartShape,
    #[error("charts must raise degree on the ascending side and lower it on the descending side")]
    ChartDirection,
    #[error("chart components live over different fields")]
    ChartField,
    #[error("stabilized chart ranks disagree")]
    ChartRank,
    #[error("big twist endpoints do not match the graded direct sums")]
    BigTwistEndpoints,
    #[error("big twist mixes indices {0} and {1}")]
    IndexMixing(i64, i64),
    #[error(transparent)]
    Zip(#[from] ZipError),
}

/// Direction of the transition maps in a graded chart module.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransitionDegree {
    Up,
    Down,
}

/// A finitely supported graded module: one finite-dimensional space per
/// index in a window, with a transition map between each adjacent pair
/// (upward for the degree +1 chart, downward for the degree -1 chart).
/// Below the window the spaces are zero; above it the last transition is
/// understood to continue as an isomorphism.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedChainModule {
    field: Field,
    degree: TransitionDegree,
    lo: i64,
    dims: Vec<usize>,
    maps: Vec<Mat>,
}

impl GradedChainModule {
    pub fn new(
        field: Field,
        degree: TransitionDegree,
        lo: i64,
        dims: Vec<usize>,
        maps: Vec<Mat>,
    ) -> Result<Self, PinchedError> {
        let expected = dims.len().saturating_sub(1);
        if maps.len() != expected {
            return Err(PinchedError::ChartShape);
        }
        for (j, m) in maps.iter().enumerate() {
            if m.field() != &field {
                return Err(PinchedError::ChartField);
            }
            let (rows, cols) = match degree {
                TransitionDegree::Up => (dims[j + 1], dims[j]),
                TransitionDegree::Down => (dims[j], dims[j + 1]),
            };
            if m.rows() != rows || m.cols() != cols {
                return Err(PinchedError::ChartShape);
            }
        }
        Ok(GradedChainModule { field, degree, lo, dims, maps })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn transition_degree(&self) -> TransitionDegree {
        self.degree
    }
    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.dims.len() as i64 - 1)
    }
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
    /// maps[j] connects indices lo+j and lo+j+1, in the direction given by
    /// `transition_degree`.
    pub fn maps(&self) -> &[Mat] {
        &self.maps
    }
}

/// Chart presentation of a classical zip: the ascending flag becomes the
/// degree +1 chart (inclusion transitions), the descending flag the
/// degree -1 chart, and the comparison matrices become the glue over the
/// pinch point.
pub fn encode_vb(m: &ClassicalFZip) -> (GradedChainModule, GradedChainModule, BTreeMap<i64, Mat>) {
    let fld = m.field().clone();
    if m.rank() == 0 {
        let triv = GradedChainModule::new(fld.clone(), TransitionDegree::Up, 0, vec![0], Vec::new()).unwrap();
        let mut lowered = triv.clone();
        lowered.degree = TransitionDegree::Down;
        return (triv, lowered, BTreeMap::new());
    }
    let (d_lo, d_hi) = m.d_window();
    let v_dims: Vec<usize> = (d_lo..=d_hi).map(|k| m.d_subspace(k).cols()).collect();
    let v_maps: Vec<Mat> = (d_lo..d_hi)
        .map(|k| m.d_subspace(k + 1).solve(&m.d_subspace(k)).expect("ascending flag is nested"))
        .collect();
    let v = GradedChainModule::new(fld.clone(), TransitionDegree::Up, d_lo, v_dims, v_maps).unwrap();

    let (c_lo, c_hi) = m.c_window();
    let (w_lo, w_hi) = (c_lo - 1, c_hi - 1);
    let w_dims: Vec<usize> = (w_lo..=w_hi).map(|k| m.c_subspace(k).cols()).collect();
    let w_maps: Vec<Mat> = (w_lo..w_hi)
        .map(|k| m.c_subspace(k).solve(&m.c_subspace(k + 1)).expect("descending flag is nested"))
        .collect();
    let w = GradedChainModule::new(fld, TransitionDegree::Down, w_lo, w_dims, w_maps).unwrap();

    let glue: BTreeMap<i64, Mat> = m
        .classical_type()
        .keys()
        .map(|&k| (k, m.phi_at(k).unwrap().clone()))
        .collect();
    (v, w, glue)
}

/// Inverse of `encode_vb`: rebuild the flags as images of the composite
/// transitions into the stabilized ends of the charts, and take the glue
/// matrices as the comparison maps.
pub fn decode_vb(
    v: &GradedChainModule,
    w: &GradedChainModule,
    glue: &BTreeMap<i64, Mat>,
) -> Result<ClassicalFZip, PinchedError> {
    if v.degree != TransitionDegree::Up || w.degree != TransitionDegree::Down {
        return Err(PinchedError::ChartDirection);
    }
    if v.field != w.field || glue.values().any(|m| m.field() != &v.field) {
        return Err(PinchedError::ChartField);
    }
    let fld = v.field.clone();
    let r = v.dims.last().copied().unwrap_or(0);
    if w.dims.first().copied().unwrap_or(0) != r {
        return Err(PinchedError::ChartRank);
    }
    if r == 0 {
        return Ok(ClassicalFZip::new(fld, 0, &BTreeMap::new(), &BTreeMap::new(), &BTreeMap::new())?);
    }

    // ascending flag: D_k = image of V_k in the top space
    let mut dmap = BTreeMap::new();
    let top = v.window().1;
    let mut acc = Mat::identity(&fld, r);
    dmap.insert(top, acc.clone());
    for j in (0..v.maps.len()).rev() {
        acc = acc.mul(&v.maps[j]);
        dmap.insert(v.lo + j as i64, acc.clone());
    }
    // descending flag: C^k = image of W_k in the bottom space
    let mut cmap = BTreeMap::new();
    let mut acc = Mat::identity(&fld, r);
    cmap.insert(w.lo, acc.clone());
    for (j, step) in w.maps.iter().enumerate() {
        acc = acc.mul(step);
        cmap.insert(w.lo + j as i64 + 1, acc.clone());
    }
    Ok(ClassicalFZip::new(fld, r, &cmap, &dmap, glue)?)
}

// ======================================================================
// Koszul pullback
// ======================================================================

/// Pull a filtration back over the pinch point: the result is the direct
/// sum of all graded pieces over the window, together with the per-index
/// pieces as a witness of the decomposition.  The total Betti numbers are
/// the sums of the graded Betti numbers.
pub fn koszul_pullback(f: &Filtration) -> (Complex, Vec<(i64, Complex)>) {
    if f.is_window_empty() {
        return (Complex::zero(f.field()), Vec::new());
    }
    let (a, b) = f.window();
    let witness: Vec<(i64, Complex)> = (a..=b).map(|i| (i, f.graded(i))).collect();
    let parts: Vec<&Complex> = witness.iter().map(|(_, c)| c).collect();
    (direct_sum(f.field(), &parts), witness)
}

// ======================================================================
// pinched perfect data
// ======================================================================

/// Like a derived zip, but the per-index comparison maps are fused into a
/// single quasi-isomorphism between the direct sums of all graded pieces,
/// stored blockwise over the shared ascending index list.
#[derive(Clone)]
pub struct PinchedPerfData {
    c: Filtration,
    d: Filtration,
    glue: Glue,
    big_twist: ChainMap,
}

impl PinchedPerfData {
    pub fn new(c: Filtration, d: Filtration, glue: Glue, big_twist: ChainMap) -> Self {
        PinchedPerfData { c, d, glue, big_twist }
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
    pub fn big_twist(&self) -> &ChainMap {
        &self.big_twist
    }
}

/// Ascending list of indices carrying the graded pieces of either side.
fn shared_indices(c: &Filtration, d: &Filtration) -> Vec<i64> {
    let mut keys = BTreeSet::new();
    for f in [c, d] {
        if !f.is_window_empty() {
            let (a, b) = f.window();
            keys.extend(a..=b);
        }
    }
    keys.into_iter().collect()
}

/// The two ends a fused comparison map must connect: the direct sum of the
/// Frobenius-twisted descending graded pieces and the direct sum of the
/// ascending ones, over the union of the two windows.
pub fn big_twist_endpoints(c: &Filtration, d: &Filtration) -> (Complex, Complex) {
    let (_, src_parts, tgt_parts) = graded_parts(c, d);
    let src_refs: Vec<&Complex> = src_parts.iter().collect();
    let tgt_refs: Vec<&Complex> = tgt_parts.iter().collect();
    (direct_sum(c.field(), &src_refs), direct_sum(c.field(), &tgt_refs))
}

fn graded_parts(c: &Filtration, d: &Filtration) -> (Vec<i64>, Vec<Complex>, Vec<Complex>) {
    let indices = shared_indices(c, d);
    let src: Vec<Complex> = indices.iter().map(|&i| c.graded(i).frobenius_twist()).collect();
    let tgt: Vec<Complex> = indices.iter().map(|&i| d.graded(i)).collect();
    (indices, src, tgt)
}

fn chain_map_is_zero(m: &ChainMap) -> bool {
    m.source().degrees().all(|d| m.comp(d).is_zero())
}

/// Structural check.  Boundedness of the graded data is re-derived from the
/// stored windows: every piece outside them must be exact and the total
/// graded dimension finite, which closes the windows.
pub fn validate_pinched(p: &PinchedPerfData) -> bool {
    if p.c.direction() != Direction::Descending || p.d.direction() != Direction::Ascending {
        return false;
    }
    if p.c.field() != p.d.field() {
        return false;
    }
    let colim_c = p.c.colim();
    let colim_d = p.d.colim();
    match &p.glue {
        Glue::Identity => {
            if colim_c != colim_d {
                return false;
            }
        }
        Glue::Map(m) => {
            if m.source() != &colim_c || m.target() != &colim_d || !m.is_quasi_iso() {
                return false;
            }
        }
    }
    let indices = shared_indices(&p.c, &p.d);
    // windows close: just outside them every graded piece is exact
    for f in [&p.c, &p.d] {
        let (a, b) = match indices.as_slice() {
            [] => continue,
            s => (s[0], s[s.len() - 1]),
        };
        if !f.graded(a - 1).is_acyclic() || !f.graded(b + 1).is_acyclic() {
            return false;
        }
    }
    let (_, src_parts, tgt_parts) = graded_parts(&p.c, &p.d);
    let src_refs: Vec<&Complex> = src_parts.iter().collect();
    let tgt_refs: Vec<&Complex> = tgt_parts.iter().collect();
    let src_sum = direct_sum(p.field(), &src_refs);
    let tgt_sum = direct_sum(p.field(), &tgt_refs);
    p.big_twist.source() == &src_sum && p.big_twist.target() == &tgt_sum && p.big_twist.is_quasi_iso()
}

/// Split the fused comparison map back into per-index twists.  Fails if any
/// off-diagonal block between two distinct indices is nonzero.
pub fn to_derived_fzip(p: &PinchedPerfData) -> Result<DerivedFZip, PinchedError> {
    let (indices, src_parts, tgt_parts) = graded_parts(&p.c, &p.d);
    let src_refs: Vec<&Complex> = src_parts.iter().collect();
    let tgt_refs: Vec<&Complex> = tgt_parts.iter().collect();
    let (src_sum, src_incls, _) = direct_sum_with_maps(p.field(), &src_refs);
    let (tgt_sum, _, tgt_projs) = direct_sum_with_maps(p.field(), &tgt_refs);
    if p.big_twist.source() != &src_sum || p.big_twist.target() != &tgt_sum {
        return Err(PinchedError::BigTwistEndpoints);
    }
    let mut twists = BTreeMap::new();
    for (a, incl) in src_incls.iter().enumerate() {
        for (b, proj) in tgt_projs.iter().enumerate() {
            let block = incl.then(&p.big_twist).then(proj);
            if a != b {
                if !chain_map_is_zero(&block) {
                    return Err(PinchedError::IndexMixing(indices[a], indices[b]));
                }
            } else if !(block.source().is_acyclic() && block.target().is_acyclic()) {
                twists.insert(indices[a], block);
            }
        }
    }
    Ok(DerivedFZip::new(p.c.clone(), p.d.clone(), p.glue.clone(), twists))
}

/// Fuse the per-index twists of a derived zip into the single blockwise
/// comparison map.  Indices whose graded pieces are exact on both sides may
/// lack a stored twist; they contribute zero blocks.
pub fn from_derived_fzip(z: &DerivedFZip) -> Result<PinchedPerfData, PinchedError> {
    let c = z.descending().clone();
    let d = z.ascending().clone();
    let (indices, src_parts, tgt_parts) = graded_parts(&c, &d);
    let src_refs: Vec<&Complex> = src_parts.iter().collect();
    let tgt_refs: Vec<&Complex> = tgt_parts.iter().collect();
    let (src_sum, _, src_projs) = direct_sum_with_maps(z.field(), &src_refs);
    let (tgt_sum, tgt_incls, _) = direct_sum_with_maps(z.field(), &tgt_refs);
    let mut big = ChainMap::zero(&src_sum, &tgt_sum);
    for (j, &i) in indices.iter().enumerate() {
        let piece = match z.twists().get(&i) {
            Some(t) => {
                if t.source() != &src_parts[j] || t.target() != &tgt_parts[j] {
                    return Err(PinchedError::Zip(ZipError::TwistShape(i)));
                }
                t.clone()
            }
            None => {
                if !(src_parts[j].is_acyclic() && tgt_parts[j].is_acyclic()) {
                    return Err(PinchedError::Zip(ZipError::TwistMissing(i)));
                }
                ChainMap::zero(&src_parts[j], &tgt_parts[j])
            }
        };
        big = big.add(&src_projs[j].then(&piece).then(&tgt_incls[j]));
    }
    Ok(PinchedPerfData { c, d, glue: z.glue().clone(), big_twist: big })
}

// ======================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::qiso_matching_homology;
    use crate::filt::unit_filtration;
    use crate::fzip::{embed, unit_classical, unit_zip};
    use crate::gf::make_field;

    fn gf2() -> Field {
        make_field(2, 1).unwrap()
    }
    fn gf4() -> Field {
        make_field(2, 2).unwrap()
    }

    fn col(f: &Field, entries: &[u16]) -> Mat {
        Mat::from_fn(f, entries.len(), 1, |i, _| entries[i])
    }

    fn small_gf4() -> ClassicalFZip {
        let f = gf4();
        let c = BTreeMap::from([(1, col(&f, &[1, 2]))]);
        let d = BTreeMap::from([(0, col(&f, &[1, 1]))]);
        let phi = BTreeMap::from([
            (0, Mat::from_rows(&f, &[vec![2]])),
            (1, Mat::from_rows(&f, &[vec![3]])),
        ]);
        ClassicalFZip::new(f, 2, &c, &d, &phi).unwrap()
    }

    #[test]
    fn koszul_betti_additivity() {
        let f = gf2();
        // descending: full 2-dim space, then a line, then zero
        let total = Complex::with_zero_diff(&f, 0, &[2]);
        let line = Complex::with_zero_diff(&f, 0, &[1]);
        let incl = ChainMap::new(line.clone(), total.clone(), vec![col(&f, &[1, 0])]).unwrap();
        let filt = Filtration::new(f.clone(), Direction::Descending, 0, vec![total, line], vec![incl]).unwrap();
        let (sum, witness) = koszul_pullback(&filt);
        let lhs: usize = sum.degrees().map(|d| sum.betti(d)).sum();
        let rhs: usize = witness
            .iter()
            .map(|(_, g)| g.degrees().map(|d| g.betti(d)).sum::<usize>())
            .sum();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, 2);
        assert_eq!(witness.len(), 2);
    }

    #[test]
    fn koszul_identity_steps_contribute_exact_pieces() {
        let f = gf2();
        let m = Complex::with_zero_diff(&f, 0, &[1]);
        let id = ChainMap::identity(&m);
        let filt =
            Filtration::new(f.clone(), Direction::Descending, 0, vec![m.clone(), m.clone()], vec![id]).unwrap();
        let (sum, witness) = koszul_pullback(&filt);
        // the repeated level is invisible; only the boundary jump survives
        assert!(witness[0].1.is_acyclic());
        assert_eq!(witness[1].1.betti_map(), m.betti_map());
        assert_eq!(sum.betti(0), 1);

        // on an exact complex the whole pullback is exact
        let e = Complex::new(f.clone(), 0, vec![1, 1], vec![Mat::identity(&f, 1)]).unwrap();
        let idf = Filtration::new(
            f.clone(),
            Direction::Descending,
            0,
            vec![e.clone(), e.clone()],
            vec![ChainMap::identity(&e)],
        )
        .unwrap();
        let (sum, _) = koszul_pullback(&idf);
        assert!(sum.is_acyclic());
    }

    #[test]
    fn koszul_single_step_gives_the_module_back() {
        let f = gf2();
        let m = Complex::with_zero_diff(&f, -1, &[2, 3]);
        let zero = Complex::zero(&f);
        let step = ChainMap::zero(&zero, &m);
        let filt = Filtration::new(f.clone(), Direction::Descending, 0, vec![m.clone(), zero], vec![step]).unwrap();
        let (sum, witness) = koszul_pullback(&filt);
        assert_eq!(sum.betti_map(), m.betti_map());
        assert_eq!(witness[0].1.betti_map(), m.betti_map());
        assert!(witness[1].1.is_acyclic());
    }

    #[test]
    fn encode_unit_is_one_dimensional_at_zero() {
        let f = gf2();
        let (v, w, glue) = encode_vb(&unit_classical(&f));
        assert_eq!(v.window(), (0, 0));
        assert_eq!(v.dims(), &[1]);
        assert_eq!(w.window(), (0, 0));
        assert_eq!(w.dims(), &[1]);
        assert_eq!(glue, BTreeMap::from([(0, Mat::identity(&f, 1))]));
    }

    #[test]
    fn encode_rank_two_has_two_graded_indices() {
        let (v, w, glue) = encode_vb(&small_gf4());
        assert_eq!(v.window(), (0, 1));
        assert_eq!(v.dims(), &[1, 2]);
        assert_eq!(w.window(), (0, 1));
        assert_eq!(w.dims(), &[2, 1]);
        assert_eq!(glue.len(), 2);
    }

    #[test]
    fn decode_inverts_encode_exactly() {
        for m in [unit_classical(&gf2()), small_gf4()] {
            let (v, w, glue) = encode_vb(&m);
            let back = decode_vb(&v, &w, &glue).unwrap();
            assert_eq!(back, m);
            let (v2, w2, glue2) = encode_vb(&back);
            assert_eq!(v2, v);
            assert_eq!(w2, w);
            assert_eq!(glue2, glue);
        }
    }

    #[test]
    fn decode_rejects_swapped_charts() {
        let (v, w, glue) = encode_vb(&small_gf4());
        assert!(matches!(decode_vb(&w, &v, &glue), Err(PinchedError::ChartDirection)));
        let bad_glue = BTreeMap::from([(0, Mat::zeros(&gf4(), 1, 1)), (1, Mat::identity(&gf4(), 1))]);
        assert!(matches!(
            decode_vb(&v, &w, &bad_glue),
            Err(PinchedError::Zip(ZipError::BadPhi(0)))
        ));
    }

    #[test]
    fn unit_zip_fuses_and_splits() {
        let f = gf2();
        let z = unit_zip(&f);
        let p = from_derived_fzip(&z).unwrap();
        assert!(validate_pinched(&p));
        let z2 = to_derived_fzip(&p).unwrap();
        z2.validate().unwrap();
        assert_eq!(z2.zip_type(), z.zip_type());
        assert_eq!(z2.twists(), z.twists());
    }

    #[test]
    fn embedded_zip_round_trips_at_type_level() {
        let z = embed(&small_gf4(), 0);
        let p = from_derived_fzip(&z).unwrap();
        assert!(validate_pinched(&p));
        let z2 = to_derived_fzip(&p).unwrap();
        z2.validate().unwrap();
        assert_eq!(z2.zip_type(), z.zip_type());
        assert_eq!(z2.twists(), z.twists());
    }

    #[test]
    fn index_mixing_twist_is_rejected() {
        let z = embed(&small_gf4(), 0);
        let c = z.descending().clone();
        let d = z.ascending().clone();
        let (indices, src_parts, tgt_parts) = graded_parts(&c, &d);
        let src_refs: Vec<&Complex> = src_parts.iter().collect();
        let tgt_refs: Vec<&Complex> = tgt_parts.iter().collect();
        let (_, _, src_projs) = direct_sum_with_maps(z.field(), &src_refs);
        let (_, tgt_incls, _) = direct_sum_with_maps(z.field(), &tgt_refs);
        // send index-0 homology to index-1 homology and vice versa
        let i0 = indices.iter().position(|&i| i == 0).unwrap();
        let i1 = indices.iter().position(|&i| i == 1).unwrap();
        let cross01 = qiso_matching_homology(&src_parts[i0], &tgt_parts[i1]);
        let cross10 = qiso_matching_homology(&src_parts[i1], &tgt_parts[i0]);
        let mixed = src_projs[i0]
            .then(&cross01)
            .then(&tgt_incls[i1])
            .add(&src_projs[i1].then(&cross10).then(&tgt_incls[i0]));
        let p = PinchedPerfData::new(c, d, Glue::Identity, mixed);
        assert!(validate_pinched(&p));
        match to_derived_fzip(&p) {
            Err(PinchedError::IndexMixing(a, b)) => assert!((a, b) == (0, 1) || (a, b) == (1, 0)),
            other => panic!("expected index mixing rejection, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn missing_twist_for_visible_index_fails() {
        let f = gf2();
        let z = DerivedFZip::new(
            unit_filtration(&f, Direction::Descending),
            unit_filtration(&f, Direction::Ascending),
            Glue::Identity,
            BTreeMap::new(),
        );
        assert!(matches!(
            from_derived_fzip(&z),
            Err(PinchedError::Zip(ZipError::TwistMissing(0)))
        ));
    }
}
