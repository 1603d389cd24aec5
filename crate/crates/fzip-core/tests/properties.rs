//! Property tests for the structural laws: proptest drives the parameter
//! and seed space, the seeded generators build the objects.

use std::collections::BTreeMap;

use proptest::prelude::*;

use fzip_core::chain::cone_with_maps;
use fzip_core::filt::{
    from_truncations, is_degenerate, is_strong, page_infinity, spectral_page, Direction,
};
use fzip_core::fzip::{exterior_power, tensor};
use fzip_core::gen::{
    rand_chain_map, rand_classical_zip, rand_complex, rand_complex_sized, rand_degenerate_zip,
    rand_filtration, rng,
};
use fzip_core::{make_field, Field};

fn fields() -> Vec<Field> {
    [(2, 1), (2, 2), (3, 1), (3, 2), (5, 1)]
        .iter()
        .map(|&(p, n)| make_field(p, n).unwrap())
        .collect()
}

fn euler(b: &BTreeMap<i64, usize>) -> i64 {
    b.iter().map(|(&d, &v)| if d.rem_euclid(2) == 0 { v as i64 } else { -(v as i64) }).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_moves_homology(seed in any::<u64>(), fi in 0usize..5, k in -3i64..=3, lo in -2i64..=1) {
        let f = &fields()[fi];
        let mut r = rng(seed);
        let dims: Vec<usize> = (0..4).map(|_| seed as usize % 4 + 1).collect();
        let c = rand_complex(&mut r, f, lo, &dims);
        let s = c.shift(k);
        for d in lo - 4..=lo + 8 {
            prop_assert_eq!(s.betti(d), c.betti(d - k));
        }
    }

    #[test]
    fn dual_is_an_involution_reflecting_betti(seed in any::<u64>(), fi in 0usize..5) {
        let f = &fields()[fi];
        let mut r = rng(seed);
        let c = rand_complex_sized(&mut r, f, 4, 4);
        let d = c.dual();
        prop_assert_eq!(d.dual(), c.clone());
        for deg in -8i64..=8 {
            prop_assert_eq!(d.betti(deg), c.betti(-deg));
        }
    }

    #[test]
    fn cone_euler_additivity(seed in any::<u64>(), fi in 0usize..5) {
        let f = &fields()[fi];
        let mut r = rng(seed);
        let x = rand_complex_sized(&mut r, f, 4, 4);
        let y = rand_complex_sized(&mut r, f, 4, 4);
        let m = rand_chain_map(&mut r, &x, &y);
        let (cone, _, _) = cone_with_maps(&m);
        prop_assert_eq!(
            euler(&cone.betti_map()),
            euler(&y.betti_map()) - euler(&x.betti_map())
        );
    }

    #[test]
    fn frobenius_twist_preserves_betti(seed in any::<u64>(), fi in 0usize..5) {
        let f = &fields()[fi];
        let mut r = rng(seed);
        let c = rand_complex_sized(&mut r, f, 4, 4);
        prop_assert_eq!(c.frobenius_twist().betti_map(), c.betti_map());
    }

    #[test]
    fn truncation_filtration_concentrates_graded_pieces(seed in any::<u64>(), fi in 0usize..5) {
        let f = &fields()[fi];
        let mut r = rng(seed);
        let k = rand_complex_sized(&mut r, f, 4, 4);
        let (desc, _) = from_truncations(&k);
        if k.degrees().count() == 0 {
            return Ok(());
        }
        // brutal truncation: gr^p holds exactly the degree -p chains, so its
        // homology sits in one degree with the dimension of that term
        let (a, b) = desc.window();
        for p in a..=b {
            let g = desc.graded(p);
            let expect = k.dim(-p);
            let total: usize = g.betti_map().values().sum();
            prop_assert_eq!(total, expect);
            if expect > 0 {
                prop_assert_eq!(g.betti(-p), expect);
            }
        }
    }

    #[test]
    fn pages_converge_to_colim_homology(seed in any::<u64>(), fi in 0usize..5, di in 0usize..2) {
        let f = &fields()[fi];
        let dir = [Direction::Descending, Direction::Ascending][di];
        let mut r = rng(seed);
        let filt = rand_filtration(&mut r, f, dir, 4, 5);
        let einf = page_infinity(&filt);
        let h = filt.colim().betti_map();
        let mut totals: BTreeMap<i64, usize> = BTreeMap::new();
        for (&(p, q), &dim) in &einf.dims() {
            if dim > 0 {
                *totals.entry(p + q).or_insert(0) += dim;
            }
        }
        prop_assert_eq!(totals, h);
    }

    #[test]
    fn page_one_is_graded_homology(seed in any::<u64>(), fi in 0usize..5) {
        let f = &fields()[fi];
        let mut r = rng(seed);
        let filt = rand_filtration(&mut r, f, Direction::Descending, 4, 5);
        let e1 = spectral_page(&filt, 1).unwrap();
        let (a, b) = if filt.is_window_empty() { (0, -1) } else { filt.window() };
        for p in a - 1..=b + 1 {
            let g = filt.graded(p);
            for n in -10i64..=10 {
                prop_assert_eq!(e1.dim(p, n - p), g.betti(n), "p={} n={}", p, n);
            }
        }
    }

    #[test]
    fn strong_iff_degenerate(seed in any::<u64>(), fi in 0usize..5, di in 0usize..2) {
        let f = &fields()[fi];
        let dir = [Direction::Descending, Direction::Ascending][di];
        let mut r = rng(seed);
        let filt = rand_filtration(&mut r, f, dir, 4, 5);
        prop_assert_eq!(is_strong(&filt), is_degenerate(&filt));
    }

    #[test]
    fn tensor_type_is_the_convolution(seed in any::<u64>(), fi in 0usize..5) {
        let f = &fields()[fi];
        let mut r = rng(seed);
        let a = rand_degenerate_zip(&mut r, f);
        let b = rand_degenerate_zip(&mut r, f);
        let t = tensor(&a, &b).unwrap();
        let mut expect: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        for (&(ka, na), &va) in &a.zip_type() {
            for (&(kb, nb), &vb) in &b.zip_type() {
                *expect.entry((ka + kb, na + nb)).or_insert(0) += va * vb;
            }
        }
        prop_assert_eq!(t.zip_type(), expect);
    }

    #[test]
    fn exterior_first_power_is_identity(seed in any::<u64>(), fi in 0usize..5, rank in 1usize..=4) {
        let f = &fields()[fi];
        let mut r = rng(seed);
        let m = rand_classical_zip(&mut r, f, rank);
        let w1 = exterior_power(&m, 1).unwrap();
        prop_assert!(w1.is_isomorphic(&m));
    }
}
