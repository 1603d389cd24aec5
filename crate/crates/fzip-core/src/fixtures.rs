//! Ready-made derived F-zips with the cohomological shapes of familiar
//! families: curves, K3 surfaces, abelian varieties, and the three kinds of
//! Enriques surface in characteristic two.  Everything is generated from
//! split complexes and explicit connecting matrices, so the invariants the
//! tests quote are recomputed, never stored.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::chain::{qiso_matching_homology, ChainMap, Complex};
use crate::filt::{Direction, Filtration};
use crate::fzip::{
    assemble_layers, exterior_power, lift_curve, lift_k3, ClassicalFZip, DerivedFZip, Glue, ZipError,
};
use crate::gf::Field;
use crate::mat::Mat;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("this fixture needs a field of characteristic 2")]
    WrongCharacteristic,
    #[error(transparent)]
    Zip(#[from] ZipError),
}

/// Classical zip with both flags spanned by standard coordinate blocks:
/// one block per listed jump, in ascending index order, with identity
/// comparisons.  Zero-size jumps are ignored.
pub fn split_standard(field: &Field, jumps: &[(i64, usize)]) -> ClassicalFZip {
    let jumps: Vec<(i64, usize)> = jumps.iter().copied().filter(|&(_, d)| d > 0).collect();
    for w in jumps.windows(2) {
        assert!(w[0].0 < w[1].0, "jump indices must be strictly ascending");
    }
    let r: usize = jumps.iter().map(|&(_, d)| d).sum();
    if r == 0 {
        return ClassicalFZip::new(field.clone(), 0, &BTreeMap::new(), &BTreeMap::new(), &BTreeMap::new())
            .unwrap();
    }
    let mut offsets = Vec::new();
    let mut acc = 0;
    for &(_, d) in &jumps {
        offsets.push(acc);
        acc += d;
    }
    let std_cols = |idx: &[usize]| Mat::from_fn(field, r, idx.len(), |i, j| u16::from(i == idx[j]));
    let jmin = jumps[0].0;
    let jmax = jumps.last().unwrap().0;
    let block_coords = |keep: &dyn Fn(i64) -> bool| -> Vec<usize> {
        jumps
            .iter()
            .zip(&offsets)
            .filter(|((j, _), _)| keep(*j))
            .flat_map(|((_, d), &o)| o..o + d)
            .collect()
    };
    let mut c = BTreeMap::new();
    for k in jmin..=jmax + 1 {
        c.insert(k, std_cols(&block_coords(&|j| j >= k)));
    }
    let mut d = BTreeMap::new();
    for k in jmin - 1..=jmax {
        d.insert(k, std_cols(&block_coords(&|j| j <= k)));
    }
    let phi: BTreeMap<i64, Mat> = jumps.iter().map(|&(j, dim)| (j, Mat::identity(field, dim))).collect();
    ClassicalFZip::new(field.clone(), r, &c, &d, &phi).unwrap()
}

/// The derived zip of a genus-g curve: unit in degree 0, a split rank-2g
/// piece with jumps (g, g) at indices (0, 1) in degree -1, and a rank-one
/// index-1 piece in degree -2.
pub fn curve(field: &Field, g: usize) -> DerivedFZip {
    lift_curve(&split_standard(field, &[(0, g), (1, g)])).unwrap()
}

/// The derived zip of a K3 surface: rank 22 with jumps (1, 20, 1) in
/// degree -2 between the unit in degree 0 and a rank-one index-2 piece in
/// degree -4.
pub fn k3(field: &Field) -> DerivedFZip {
    lift_k3(&split_standard(field, &[(0, 1), (1, 20), (2, 1)])).unwrap()
}

/// The derived zip of an n-dimensional abelian variety built from a
/// rank-2n classical zip m: the k-th exterior power of m sits in degree -k.
/// The total dimension in degree -k is the binomial coefficient (2n, k).
pub fn abelian(n: usize, m: &ClassicalFZip) -> Result<DerivedFZip, FixtureError> {
    if m.rank() != 2 * n {
        return Err(FixtureError::Zip(ZipError::WrongType));
    }
    let mut layers = Vec::new();
    for k in 0..=2 * n {
        layers.push((-(k as i64), exterior_power(m, k)?));
    }
    Ok(assemble_layers(m.field(), &layers))
}

/// `abelian` applied to the split rank-2n zip with jumps (n, n).
pub fn abelian_standard(field: &Field, n: usize) -> DerivedFZip {
    abelian(n, &split_standard(field, &[(0, n), (1, n)])).unwrap()
}

fn require_char2(field: &Field) -> Result<(), FixtureError> {
    if field.p() != 2 {
        return Err(FixtureError::WrongCharacteristic);
    }
    Ok(())
}

/// Enriques surface of the multiplicative kind: Hodge grid columns
/// (1,1,1), (0,10,0), (1,0,1), de Rham dimensions (1,1,12,0,1).
pub fn enriques_mu2(field: &Field) -> Result<DerivedFZip, FixtureError> {
    require_char2(field)?;
    Ok(assemble_layers(
        field,
        &[
            (0, split_standard(field, &[(0, 1)])),
            (-1, split_standard(field, &[(0, 1)])),
            (-2, split_standard(field, &[(0, 1), (1, 10), (2, 1)])),
            (-4, split_standard(field, &[(2, 1)])),
        ],
    ))
}

/// Enriques surface of the constant-group kind: Hodge grid columns
/// (1,0,0), (1,12,0), (0,0,1), de Rham dimensions (1,1,12,0,1).
pub fn enriques_z2(field: &Field) -> Result<DerivedFZip, FixtureError> {
    require_char2(field)?;
    Ok(assemble_layers(
        field,
        &[
            (0, split_standard(field, &[(0, 1)])),
            (-1, split_standard(field, &[(1, 1)])),
            (-2, split_standard(field, &[(1, 12)])),
            (-4, split_standard(field, &[(2, 1)])),
        ],
    ))
}

/// Enriques surface of the infinitesimal kind.  The Hodge grid columns are
/// (1,1,1), (1,12,1), (1,0,1) — one more than the de Rham dimensions
/// (1,1,12,0,1) can absorb — so the page-one data is strictly bigger than
/// the stable page and the filtration pair is neither strong nor
/// degenerate.  Built on a 19-dimensional complex with two nonzero
/// differential entries crossing the filtration levels.
pub fn enriques_alpha2(field: &Field) -> Result<DerivedFZip, FixtureError> {
    require_char2(field)?;
    let f = field;
    // degrees -4..0: f1 | e1 | c1..c14 | b1 b2 | a0, with d(b2) = c14, d(c1) = e1
    let total = Complex::new(
        f.clone(),
        -4,
        vec![1, 1, 14, 2, 1],
        vec![
            Mat::zeros(f, 1, 1),
            Mat::from_fn(f, 1, 14, |_, j| u16::from(j == 0)),
            Mat::from_fn(f, 14, 2, |i, j| u16::from(j == 1 && i == 13)),
            Mat::zeros(f, 2, 1),
        ],
    )
    .unwrap();

    // level 1 keeps b2; c2..c14; e1; f1 — a subcomplex since d(b2) = c14
    let f1 = Complex::new(
        f.clone(),
        -4,
        vec![1, 1, 13, 1],
        vec![
            Mat::zeros(f, 1, 1),
            Mat::zeros(f, 1, 13),
            Mat::from_fn(f, 13, 1, |i, _| u16::from(i == 12)),
        ],
    )
    .unwrap();
    let f1_in = ChainMap::new(
        f1.clone(),
        total.clone(),
        vec![
            Mat::identity(f, 1),
            Mat::identity(f, 1),
            Mat::from_fn(f, 14, 13, |i, j| u16::from(i == j + 1)),
            Mat::from_fn(f, 2, 1, |i, _| u16::from(i == 1)),
        ],
    )
    .unwrap();

    // level 2 keeps c14 and f1, both with zero differential
    let f2 = Complex::with_zero_diff(f, -4, &[1, 0, 1]);
    let f2_in = ChainMap::new(
        f2.clone(),
        f1.clone(),
        vec![
            Mat::identity(f, 1),
            Mat::zeros(f, 1, 0),
            Mat::from_fn(f, 13, 1, |i, _| u16::from(i == 12)),
        ],
    )
    .unwrap();
    let hodge = Filtration::new(
        f.clone(),
        Direction::Descending,
        0,
        vec![total.clone(), f1, f2],
        vec![f1_in, f2_in],
    )
    .unwrap();

    // conjugate side: level 0 holds a0, b1, c14; level 1 adds b2, c2..c13, e1
    let d0 = Complex::with_zero_diff(f, -2, &[1, 1, 1]);
    let d1 = Complex::new(
        f.clone(),
        -3,
        vec![1, 13, 2, 1],
        vec![
            Mat::zeros(f, 1, 13),
            Mat::from_fn(f, 13, 2, |i, j| u16::from(j == 1 && i == 12)),
            Mat::zeros(f, 2, 1),
        ],
    )
    .unwrap();
    let d0_in = ChainMap::new(
        d0.clone(),
        d1.clone(),
        vec![
            Mat::from_fn(f, 13, 1, |i, _| u16::from(i == 12)),
            Mat::from_fn(f, 2, 1, |i, _| u16::from(i == 0)),
            Mat::identity(f, 1),
        ],
    )
    .unwrap();
    let d1_in = ChainMap::new(
        d1.clone(),
        total.clone(),
        vec![
            Mat::identity(f, 1),
            Mat::from_fn(f, 14, 13, |i, j| u16::from(i == j + 1)),
            Mat::identity(f, 2),
            Mat::identity(f, 1),
        ],
    )
    .unwrap();
    let conj = Filtration::new(f.clone(), Direction::Ascending, 0, vec![d0, d1, total], vec![d0_in, d1_in])
        .unwrap();

    let mut twists = BTreeMap::new();
    for k in 0..=2 {
        let gc = hodge.graded(k).frobenius_twist();
        let gd = conj.graded(k);
        twists.insert(k, qiso_matching_homology(&gc, &gd));
    }
    Ok(DerivedFZip::new(hodge, conj, Glue::Identity, twists))
}

// ======================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filt::{page_infinity, spectral_page};
    use crate::fzip::{decompose, pi, unit_classical};
    use crate::gf::make_field;

    fn gf2() -> Field {
        make_field(2, 1).unwrap()
    }

    fn binomial(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        let mut num = 1usize;
        let mut den = 1usize;
        for i in 0..k.min(n - k) {
            num *= n - i;
            den *= i + 1;
        }
        num / den
    }

    #[test]
    fn split_standard_shape() {
        let f = gf2();
        let m = split_standard(&f, &[(0, 1), (1, 2)]);
        assert_eq!(m.rank(), 3);
        assert_eq!(m.classical_type(), BTreeMap::from([(0, 1), (1, 2)]));
        assert_eq!(m.c_subspace(1).cols(), 2);
        assert_eq!(m.d_subspace(0).cols(), 1);
        assert_eq!(split_standard(&f, &[(0, 1)]), unit_classical(&f));
        assert_eq!(split_standard(&f, &[]).rank(), 0);
        assert_eq!(split_standard(&f, &[(0, 0), (2, 1)]).classical_type(), BTreeMap::from([(2, 1)]));
    }

    #[test]
    fn curve_types() {
        for g in [0usize, 1, 2, 5] {
            let z = curve(&gf2(), g);
            z.validate().unwrap();
            let mut expected = BTreeMap::from([((0, 0), 1), ((1, -2), 1)]);
            if g > 0 {
                expected.insert((0, -1), g);
                expected.insert((1, -1), g);
            }
            assert_eq!(z.zip_type(), expected);
            assert!(z.is_degenerate_zip());
            assert!(z.is_strong_zip());
        }
        // over an odd-characteristic field as well
        let z = curve(&make_field(5, 1).unwrap(), 2);
        z.validate().unwrap();
        assert!(z.is_degenerate_zip());
    }

    #[test]
    fn k3_type_and_projection() {
        let z = k3(&gf2());
        z.validate().unwrap();
        let expected = BTreeMap::from([
            ((0, 0), 1),
            ((0, -2), 1),
            ((1, -2), 20),
            ((2, -2), 1),
            ((2, -4), 1),
        ]);
        assert_eq!(z.zip_type(), expected);
        assert_eq!(z.euler(), BTreeMap::from([(0, 2), (1, 20), (2, 2)]));
        assert!(z.is_degenerate_zip());
        assert!(z.is_strong_zip());
        let m = pi(&z, -2).unwrap();
        assert_eq!(m.classical_type(), BTreeMap::from([(0, 1), (1, 20), (2, 1)]));

        let z3 = k3(&make_field(3, 2).unwrap());
        z3.validate().unwrap();
        assert_eq!(z3.zip_type(), expected);
    }

    #[test]
    fn abelian_binomial_dimensions() {
        for n in [1usize, 2] {
            let z = abelian_standard(&gf2(), n);
            z.validate().unwrap();
            assert!(z.is_degenerate_zip());
            let colim = z.descending().colim();
            for k in 0..=2 * n {
                assert_eq!(colim.betti(-(k as i64)), binomial(2 * n, k), "n={n} k={k}");
            }
            // all graded Euler characteristics cancel
            assert_eq!(z.euler(), BTreeMap::new());
        }
        let bad = split_standard(&gf2(), &[(0, 1)]);
        assert!(matches!(abelian(1, &bad), Err(FixtureError::Zip(ZipError::WrongType))));
    }

    #[test]
    fn enriques_split_kinds_match_their_grids() {
        let f = gf2();
        let mu = enriques_mu2(&f).unwrap();
        mu.validate().unwrap();
        assert!(mu.is_degenerate_zip());
        assert_eq!(
            mu.zip_type(),
            BTreeMap::from([
                ((0, 0), 1),
                ((0, -1), 1),
                ((0, -2), 1),
                ((1, -2), 10),
                ((2, -2), 1),
                ((2, -4), 1),
            ])
        );
        assert_eq!(
            mu.descending().colim().betti_map(),
            BTreeMap::from([(0, 1), (-1, 1), (-2, 12), (-4, 1)])
        );
        let parts = decompose(&mu).unwrap();
        assert_eq!(parts.len(), 4);

        let z2 = enriques_z2(&f).unwrap();
        z2.validate().unwrap();
        assert!(z2.is_degenerate_zip());
        assert_eq!(
            z2.zip_type(),
            BTreeMap::from([((0, 0), 1), ((1, -1), 1), ((1, -2), 12), ((2, -4), 1)])
        );
        assert_eq!(
            z2.descending().colim().betti_map(),
            BTreeMap::from([(0, 1), (-1, 1), (-2, 12), (-4, 1)])
        );

        assert!(matches!(enriques_mu2(&make_field(3, 1).unwrap()), Err(FixtureError::WrongCharacteristic)));
        assert!(matches!(enriques_z2(&make_field(5, 1).unwrap()), Err(FixtureError::WrongCharacteristic)));
    }

    #[test]
    fn enriques_alpha2_is_neither_strong_nor_degenerate() {
        let f = gf2();
        let z = enriques_alpha2(&f).unwrap();
        z.validate().unwrap();
        assert!(!z.is_degenerate_zip());
        assert!(!z.is_strong_zip());
        assert_eq!(
            z.descending().colim().betti_map(),
            BTreeMap::from([(0, 1), (-1, 1), (-2, 12), (-4, 1)])
        );
        let e1 = spectral_page(z.descending(), 1).unwrap();
        assert_eq!(
            e1.dims(),
            BTreeMap::from([
                ((0, 0), 1),
                ((0, -1), 1),
                ((0, -2), 1),
                ((1, -2), 1),
                ((1, -3), 12),
                ((1, -4), 1),
                ((2, -4), 1),
                ((2, -6), 1),
            ])
        );
        let einf = page_infinity(z.descending());
        assert_eq!(
            einf.dims(),
            BTreeMap::from([((0, 0), 1), ((0, -1), 1), ((1, -3), 12), ((2, -6), 1)])
        );
        // the conjugate side drops the same amount
        let e1_total: usize = spectral_page(z.ascending(), 1).unwrap().dims().values().sum();
        let einf_total: usize = page_infinity(z.ascending()).dims().values().sum();
        assert_eq!(e1_total, 19);
        assert_eq!(einf_total, 15);
        assert!(matches!(pi(&z, -2), Err(ZipError::NotDegenerate)));
        assert!(matches!(enriques_alpha2(&make_field(7, 1).unwrap()), Err(FixtureError::WrongCharacteristic)));
    }
}
