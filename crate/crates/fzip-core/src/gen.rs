//! Seeded random generators for the property suites and the CLI self-test:
//! matrices, bounded complexes, chain maps, filtrations (general and
//! guaranteed-strong), classical zips, and degenerate derived zips.  All of
//! them draw from a caller-supplied ChaCha8 stream, so a fixed seed fixes
//! every byte of the output.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{qiso_through_homology, ChainMap, Complex};
use crate::filt::{from_truncations, Direction, Filtration};
use crate::fzip::{assemble_layers, ClassicalFZip, DerivedFZip};
use crate::gf::Field;
use crate::mat::Mat;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_mat<R: Rng>(rng: &mut R, field: &Field, rows: usize, cols: usize) -> Mat {
    let q = field.q();
    let entries: Vec<u16> = (0..rows * cols).map(|_| rng.gen_range(0..q) as u16).collect();
    Mat::from_fn(field, rows, cols, |i, j| entries[i * cols + j])
}

/// Rejection-sampled invertible matrix; the miss probability is below 3/4
/// even over GF(2), so this terminates fast for the sizes we generate.
pub fn rand_invertible<R: Rng>(rng: &mut R, field: &Field, n: usize) -> Mat {
    loop {
        let m = rand_mat(rng, field, n, n);
        if m.is_invertible() {
            return m;
        }
    }
}

/// Random complex with the given degree window: each differential is drawn
/// from the kernel of the previous one, so every entry pattern with
/// d∘d = 0 is reachable.
pub fn rand_complex<R: Rng>(rng: &mut R, field: &Field, lo: i64, dims: &[usize]) -> Complex {
    let mut diffs: Vec<Mat> = Vec::new();
    for j in 0..dims.len().saturating_sub(1) {
        let d = if j == 0 {
            rand_mat(rng, field, dims[0], dims[1])
        } else {
            let k = diffs[j - 1].kernel_basis();
            k.mul(&rand_mat(rng, field, k.cols(), dims[j + 1]))
        };
        diffs.push(d);
    }
    Complex::new(field.clone(), lo, dims.to_vec(), diffs).unwrap()
}

pub fn rand_complex_sized<R: Rng>(rng: &mut R, field: &Field, max_len: usize, max_dim: usize) -> Complex {
    let len = rng.gen_range(1..=max_len.max(1));
    let dims: Vec<usize> = (0..len).map(|_| rng.gen_range(0..=max_dim)).collect();
    let lo = rng.gen_range(-3..=0);
    rand_complex(rng, field, lo, &dims)
}

/// Random chain map x -> y: a map through homology with random blocks plus
/// a random null-homotopic part d∘u + u∘d.  Together these reach every
/// homotopy class and plenty of distinct representatives of each.
pub fn rand_chain_map<R: Rng>(rng: &mut R, x: &Complex, y: &Complex) -> ChainMap {
    let field = x.field().clone();
    let mut blocks = BTreeMap::new();
    for d in y.lo().min(x.lo())..=y.hi().max(x.hi()) {
        let (r, c) = (y.betti(d), x.betti(d));
        if r > 0 && c > 0 && rng.gen_ratio(2, 3) {
            blocks.insert(d, rand_mat(rng, &field, r, c));
        }
    }
    let through = qiso_through_homology(x, y, &blocks);
    let u: BTreeMap<i64, Mat> = x
        .degrees()
        .map(|d| (d, rand_mat(rng, &field, y.dim(d + 1), x.dim(d))))
        .collect();
    let zero = |d: i64, cols: usize| Mat::zeros(&field, y.dim(d + 1), cols);
    let comps = x
        .degrees()
        .map(|d| {
            let ud = u.get(&d).cloned().unwrap_or_else(|| zero(d, x.dim(d)));
            let udm1 = u.get(&(d - 1)).cloned().unwrap_or_else(|| zero(d - 1, x.dim(d - 1)));
            y.diff(d + 1).mul(&ud).add(&udm1.mul(&x.diff(d)))
        })
        .collect();
    let homotopic = ChainMap::new(x.clone(), y.clone(), comps).unwrap();
    through.add(&homotopic)
}

/// Split filtration with nested coordinate subspaces conjugated by random
/// degreewise isomorphisms: the steps are injective on the nose and hence
/// on homology, so the result is always strong.
pub fn rand_strong_filtration<R: Rng>(
    rng: &mut R,
    field: &Field,
    direction: Direction,
    max_levels: usize,
    max_dim: usize,
) -> Filtration {
    let w = rng.gen_range(1..=max_levels.max(1));
    let lo = rng.gen_range(-3..=0i64);
    let len = rng.gen_range(1..=3usize);
    let degrees: Vec<i64> = (0..len).map(|j| lo + j as i64).collect();
    // nested dimension chains per degree, in inclusion order small -> big
    let mut chains: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for &d in &degrees {
        let mut col = Vec::with_capacity(w);
        let mut cur = rng.gen_range(0..=max_dim);
        for _ in 0..w {
            cur = rng.gen_range(0..=cur);
            col.push(cur);
        }
        col.reverse();
        chains.insert(d, col);
    }
    // level i in inclusion order, with its own random coordinates
    let mut levels = Vec::new();
    let mut coords: Vec<BTreeMap<i64, Mat>> = Vec::new();
    for i in 0..w {
        let dims: Vec<usize> = degrees.iter().map(|d| chains[d][i]).collect();
        levels.push(Complex::with_zero_diff(field, lo, &dims));
        coords.push(degrees.iter().map(|&d| (d, rand_invertible(rng, field, chains[&d][i]))).collect());
    }
    let mut steps = Vec::new();
    for i in 0..w.saturating_sub(1) {
        let (src, tgt) = (&levels[i], &levels[i + 1]);
        let comps = src
            .degrees()
            .map(|d| {
                let (sc, tc) = (&coords[i][&d], &coords[i + 1][&d]);
                let incl = Mat::from_fn(field, tc.rows(), sc.rows(), |a, b| u16::from(a == b));
                tc.mul(&incl).mul(&sc.inverse().unwrap())
            })
            .collect();
        steps.push(ChainMap::new(src.clone(), tgt.clone(), comps).unwrap());
    }
    if direction == Direction::Descending {
        // biggest level first; each step still maps the smaller space in
        levels.reverse();
        steps.reverse();
    }
    let a = rng.gen_range(-2..=2);
    Filtration::new(field.clone(), direction, a, levels, steps).unwrap()
}

/// Random bounded filtration: a mix of towers of arbitrary chain maps,
/// truncation filtrations of a random complex, and guaranteed-strong split
/// instances, so both halves of the strong/degenerate dichotomy show up.
pub fn rand_filtration<R: Rng>(
    rng: &mut R,
    field: &Field,
    direction: Direction,
    max_levels: usize,
    max_dim: usize,
) -> Filtration {
    match rng.gen_range(0..6u32) {
        0 | 1 | 2 => {
            let w = rng.gen_range(1..=max_levels.max(1));
            let a = rng.gen_range(-2..=2);
            let mut levels = vec![rand_complex_sized(rng, field, max_levels, max_dim)];
            let mut steps = Vec::new();
            for _ in 1..w {
                let next = rand_complex_sized(rng, field, max_levels, max_dim);
                match direction {
                    Direction::Descending => {
                        // steps run from the deeper level up into the previous one
                        let prev = levels.last().unwrap().clone();
                        steps.push(rand_chain_map(rng, &next, &prev));
                    }
                    Direction::Ascending => {
                        let prev = levels.last().unwrap().clone();
                        steps.push(rand_chain_map(rng, &prev, &next));
                    }
                }
                levels.push(next);
            }
            Filtration::new(field.clone(), direction, a, levels, steps).unwrap()
        }
        3 => {
            let k = rand_complex_sized(rng, field, max_levels, max_dim);
            let (desc, asc) = from_truncations(&k);
            match direction {
                Direction::Descending => desc,
                Direction::Ascending => asc,
            }
        }
        _ => rand_strong_filtration(rng, field, direction, max_levels, max_dim),
    }
}

/// Random classical zip of the given rank: a random jump type, flags taken
/// from column blocks of independent random invertible matrices, and random
/// invertible graded comparisons.
pub fn rand_classical_zip<R: Rng>(rng: &mut R, field: &Field, rank: usize) -> ClassicalFZip {
    if rank == 0 {
        return ClassicalFZip::new(field.clone(), 0, &BTreeMap::new(), &BTreeMap::new(), &BTreeMap::new())
            .unwrap();
    }
    let mut tally: BTreeMap<i64, usize> = BTreeMap::new();
    for _ in 0..rank {
        *tally.entry(rng.gen_range(-1..=3)).or_insert(0) += 1;
    }
    let jumps: Vec<(i64, usize)> = tally.into_iter().collect();
    let mut offsets = Vec::new();
    let mut acc = 0;
    for &(_, d) in &jumps {
        offsets.push(acc);
        acc += d;
    }
    let a = rand_invertible(rng, field, rank);
    let b = rand_invertible(rng, field, rank);
    let pick = |m: &Mat, keep: &dyn Fn(i64) -> bool| -> Mat {
        let idx: Vec<usize> = jumps
            .iter()
            .zip(&offsets)
            .filter(|((j, _), _)| keep(*j))
            .flat_map(|((_, d), &o)| o..o + d)
            .collect();
        m.select_cols(&idx)
    };
    let jmin = jumps[0].0;
    let jmax = jumps.last().unwrap().0;
    let mut c = BTreeMap::new();
    for k in jmin..=jmax + 1 {
        c.insert(k, pick(&a, &|j| j >= k));
    }
    let mut d = BTreeMap::new();
    for k in jmin - 1..=jmax {
        d.insert(k, pick(&b, &|j| j <= k));
    }
    let phi: BTreeMap<i64, Mat> = jumps.iter().map(|&(j, dim)| (j, rand_invertible(rng, field, dim))).collect();
    ClassicalFZip::new(field.clone(), rank, &c, &d, &phi).unwrap()
}

/// Random degenerate derived zip: one to three random classical zips placed
/// at distinct degrees and assembled into split filtrations.
pub fn rand_degenerate_zip<R: Rng>(rng: &mut R, field: &Field) -> DerivedFZip {
    let count = rng.gen_range(1..=3usize);
    let mut degrees = BTreeSet::new();
    while degrees.len() < count {
        degrees.insert(rng.gen_range(-4..=1i64));
    }
    let mut layers: Vec<(i64, ClassicalFZip)> = Vec::new();
    for deg in degrees {
        let rank = rng.gen_range(1..=3);
        layers.push((deg, rand_classical_zip(rng, field, rank)));
    }
    assemble_layers(field, &layers)
}

// ======================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filt::{is_degenerate, is_strong, spectral_page};
    use crate::fzip::decompose;
    use crate::gf::make_field;

    #[test]
    fn complexes_have_square_zero_differentials() {
        let f = make_field(2, 1).unwrap();
        let f9 = make_field(3, 2).unwrap();
        for seed in 0..25 {
            for fld in [&f, &f9] {
                let mut r = rng(seed);
                let c = rand_complex_sized(&mut r, fld, 4, 5);
                for d in c.degrees() {
                    assert!(c.diff(d).mul(&c.diff(d + 1)).is_zero());
                }
            }
        }
    }

    #[test]
    fn chain_maps_validate_and_vary() {
        let f = make_field(2, 2).unwrap();
        let mut r = rng(3);
        let x = rand_complex_sized(&mut r, &f, 4, 4);
        let y = rand_complex_sized(&mut r, &f, 4, 4);
        let m1 = rand_chain_map(&mut r, &x, &y);
        let m2 = rand_chain_map(&mut r, &x, &y);
        assert_eq!(m1.source(), &x);
        assert_eq!(m1.target(), &y);
        // same stream position reproduces, fresh draws differ
        let mut r2 = rng(3);
        let x2 = rand_complex_sized(&mut r2, &f, 4, 4);
        let y2 = rand_complex_sized(&mut r2, &f, 4, 4);
        assert_eq!(rand_chain_map(&mut r2, &x2, &y2), m1);
        assert_ne!(m1, m2);
    }

    #[test]
    fn strong_generator_is_strong_and_degenerate() {
        let f = make_field(3, 1).unwrap();
        for seed in 0..20 {
            for dir in [Direction::Descending, Direction::Ascending] {
                let mut r = rng(seed);
                let filt = rand_strong_filtration(&mut r, &f, dir, 4, 5);
                assert!(is_strong(&filt), "seed {seed}");
                assert!(is_degenerate(&filt), "seed {seed}");
            }
        }
    }

    #[test]
    fn general_generator_feeds_the_page_engine() {
        let f = make_field(2, 1).unwrap();
        let mut strong = 0;
        for seed in 0..40 {
            let mut r = rng(seed);
            let filt = rand_filtration(&mut r, &f, Direction::Descending, 4, 5);
            spectral_page(&filt, 1).unwrap();
            if is_strong(&filt) {
                strong += 1;
            }
        }
        // the mix covers both sides of the dichotomy
        assert!(strong > 0 && strong < 40, "strong count {strong}");
    }

    #[test]
    fn classical_zip_generator_hits_the_rank() {
        let f = make_field(5, 1).unwrap();
        for seed in 0..10 {
            let mut r = rng(seed);
            let rank = (seed % 7) as usize;
            let m = rand_classical_zip(&mut r, &f, rank);
            assert_eq!(m.rank(), rank);
            let total: usize = m.classical_type().values().sum();
            assert_eq!(total, rank);
        }
    }

    #[test]
    fn degenerate_zip_generator_round_trips() {
        let f = make_field(2, 2).unwrap();
        for seed in 0..6 {
            let mut r = rng(seed);
            let z = rand_degenerate_zip(&mut r, &f);
            z.validate().unwrap();
            assert!(z.is_degenerate_zip());
            assert!(z.is_strong_zip());
            let parts = decompose(&z).unwrap();
            assert!(!parts.is_empty());
        }
    }

    #[test]
    fn fixed_seed_reproduces_everything() {
        let f = make_field(3, 2).unwrap();
        let make = || {
            let mut r = rng(42);
            let z = rand_degenerate_zip(&mut r, &f);
            let m = rand_classical_zip(&mut r, &f, 4);
            (z, m)
        };
        let (z1, m1) = make();
        let (z2, m2) = make();
        assert_eq!(z1.zip_type(), z2.zip_type());
        assert!(m1.is_isomorphic(&m2));
        assert_eq!(m1, m2);
    }
}
