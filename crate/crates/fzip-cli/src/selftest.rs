//! The `selftest` command: seeded randomized suites over the library's
//! headline laws, one pass/fail row each.  Output depends only on the seed
//! and count, never on timing, so identical invocations are byte-identical.

use std::collections::BTreeMap;

use fzip_core::chain::split;
use fzip_core::filt::{day_convolution, is_degenerate, is_strong, unit_filtration, Direction};
use fzip_core::fzip::{assemble_layers, decompose, embed, pi};
use fzip_core::gen::{rand_classical_zip, rand_complex_sized, rand_degenerate_zip, rand_filtration, rng};
use fzip_core::gf::{make_field, Field};
use fzip_core::pinched::{decode_vb, encode_vb};
use rand::Rng;

fn fields() -> Vec<Field> {
    [(2, 1), (2, 2), (3, 1), (3, 2)]
        .iter()
        .map(|&(p, n)| make_field(p, n).unwrap())
        .collect()
}

fn dir_of(i: usize) -> Direction {
    if i % 2 == 0 {
        Direction::Descending
    } else {
        Direction::Ascending
    }
}

fn strong_iff_degenerate(seed: u64, count: usize) -> bool {
    let fs = fields();
    let mut r = rng(seed);
    for i in 0..count {
        let f = &fs[i % fs.len()];
        let filt = rand_filtration(&mut r, f, dir_of(i), 4, 5);
        if is_strong(&filt) != is_degenerate(&filt) {
            return false;
        }
    }
    true
}

fn split_is_quasi_iso(seed: u64, count: usize) -> bool {
    let fs = fields();
    let mut r = rng(seed);
    for i in 0..count {
        let f = &fs[i % fs.len()];
        let c = rand_complex_sized(&mut r, f, 4, 5);
        let s = split(&c);
        if !s.is_quasi_iso() || s.target().betti_map() != c.betti_map() {
            return false;
        }
    }
    true
}

fn kunneth(seed: u64, count: usize) -> bool {
    let f = make_field(2, 2).unwrap();
    let mut r = rng(seed);
    for _ in 0..count {
        let x = rand_complex_sized(&mut r, &f, 3, 3);
        let y = rand_complex_sized(&mut r, &f, 3, 3);
        let t = x.tensor(&y);
        let mut expect: BTreeMap<i64, usize> = BTreeMap::new();
        for (i, a) in x.betti_map() {
            for (j, b) in y.betti_map() {
                *expect.entry(i + j).or_insert(0) += a * b;
            }
        }
        if t.betti_map() != expect {
            return false;
        }
    }
    true
}

fn day_laws(seed: u64, count: usize) -> bool {
    let fs = fields();
    let mut r = rng(seed);
    for i in 0..count {
        let f = &fs[i % fs.len()];
        let dir = dir_of(i);
        let a = rand_filtration(&mut r, f, dir, 3, 3);
        let b = rand_filtration(&mut r, f, dir, 3, 3);

        let u = unit_filtration(f, dir);
        let conv = match day_convolution(&a, &u) {
            Ok(c) => c,
            Err(_) => return false,
        };
        let (wa, wb) = if a.is_window_empty() { (0, -1) } else { a.window() };
        let (ca, cb) = if conv.is_window_empty() { (0, -1) } else { conv.window() };
        for p in wa.min(ca) - 1..=wb.max(cb) + 1 {
            if conv.level_at(p).betti_map() != a.level_at(p).betti_map() {
                return false;
            }
        }

        let prod = match day_convolution(&a, &b) {
            Ok(c) => c,
            Err(_) => return false,
        };
        let (pa, pb) = if prod.is_window_empty() { (0, -1) } else { prod.window() };
        for k in pa - 1..=pb + 1 {
            let lhs = prod.graded(k).betti_map();
            let mut rhs: BTreeMap<i64, usize> = BTreeMap::new();
            for n in wa - 1..=wb + 1 {
                for (d, v) in a.graded(n).tensor(&b.graded(k - n)).betti_map() {
                    *rhs.entry(d).or_insert(0) += v;
                }
            }
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

fn pi_after_embed(seed: u64, count: usize) -> bool {
    let fs = fields();
    let mut r = rng(seed);
    for i in 0..count {
        let f = &fs[i % fs.len()];
        let rank = r.gen_range(0..=6);
        let m = rand_classical_zip(&mut r, f, rank);
        let n = r.gen_range(-2..=2);
        let back = match pi(&embed(&m, n), n) {
            Ok(b) => b,
            Err(_) => return false,
        };
        if !back.is_isomorphic(&m) {
            return false;
        }
    }
    true
}

fn vb_round_trip(seed: u64, count: usize) -> bool {
    let fs = fields();
    let mut r = rng(seed);
    for i in 0..count {
        let f = &fs[i % fs.len()];
        let rank = r.gen_range(0..=5);
        let m = rand_classical_zip(&mut r, f, rank);
        let (v, w, glue) = encode_vb(&m);
        let back = match decode_vb(&v, &w, &glue) {
            Ok(b) => b,
            Err(_) => return false,
        };
        if !back.is_isomorphic(&m) {
            return false;
        }
    }
    true
}

fn decompose_rebuild(seed: u64, count: usize) -> bool {
    let fs = fields();
    let mut r = rng(seed);
    for i in 0..count {
        let f = &fs[i % fs.len()];
        let z = rand_degenerate_zip(&mut r, f);
        let layers = match decompose(&z) {
            Ok(l) => l,
            Err(_) => return false,
        };
        let rebuilt = assemble_layers(f, &layers);
        if rebuilt.zip_type() != z.zip_type()
            || rebuilt.euler() != z.euler()
            || rebuilt.descending().colim().betti_map() != z.descending().colim().betti_map()
        {
            return false;
        }
    }
    true
}

pub fn run(seed: u64, count: usize) -> bool {
    let suites: Vec<(&str, fn(u64, usize) -> bool)> = vec![
        ("strong iff degenerate", strong_iff_degenerate),
        ("split quasi-isomorphism", split_is_quasi_iso),
        ("kunneth", kunneth),
        ("day convolution laws", day_laws),
        ("pi after embed", pi_after_embed),
        ("vector bundle round trip", vb_round_trip),
        ("decompose and rebuild", decompose_rebuild),
    ];
    let mut all = true;
    for (i, (name, run_suite)) in suites.iter().enumerate() {
        let ok = run_suite(seed.wrapping_add(i as u64), count);
        all &= ok;
        println!("{name:<26} {} ({count} cases)", if ok { "pass" } else { "FAIL" });
    }
    println!("{}", if all { "all suites passed" } else { "some suites FAILED" });
    all
}
