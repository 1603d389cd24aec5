//! Arithmetic in GF(p^n) for q = p^n up to 2^16.
//!
//! An element is an integer in [0, q). Its base-p digits, least significant
//! first, are the coefficients of its polynomial-basis representative, so the
//! constant term is the lowest digit. The modulus is the lexicographically
//! smallest monic irreducible polynomial of degree n over GF(p), where
//! coefficient lists are compared low-to-high. Multiplication goes through
//! discrete-log tables built on a fixed primitive element, so all operations
//! after construction are table lookups plus (for addition in odd
//! characteristic) a short digit loop.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest admissible field size.
pub const MAX_Q: u64 = 1 << 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("field size {0} exceeds 2^16")]
    TooLarge(u64),
}

struct FieldData {
    p: u32,
    n: u32,
    q: u32,
    /// Monic modulus, coefficients low-to-high, length n + 1, top coefficient 1.
    modulus: Vec<u32>,
    /// exp[i] = g^i for a fixed primitive g; doubled length so that
    /// exp[log a + log b] needs no reduction.
    exp: Vec<u16>,
    /// log[a] for a in [1, q); log[0] is a sentinel never read.
    log: Vec<u32>,
    neg: Vec<u16>,
    frob: Vec<u16>,
    /// Full addition table for small fields (q <= 1024), row-major a * q + b.
    add_tbl: Option<Vec<u16>>,
}

/// Handle to a finite field; cheap to clone, compared by (p, n).
#[derive(Clone)]
pub struct Field(Arc<FieldData>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.n == other.0.n
    }
}
impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.0.p, self.0.n)
    }
}

// ======================================================================
// polynomial helpers over GF(p), coefficients low-to-high, u32 entries
// ======================================================================

fn poly_trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_rem(mut f: Vec<u32>, g: &[u32], p: u32) -> Vec<u32> {
    debug_assert_eq!(*g.last().unwrap(), 1, "divisor must be monic");
    let dg = g.len() - 1;
    while f.len() > dg {
        let lead = *f.last().unwrap();
        let shift = f.len() - 1 - dg;
        if lead != 0 {
            for (i, &gc) in g.iter().enumerate() {
                let idx = shift + i;
                f[idx] = (f[idx] + p - lead * gc % p) % p;
            }
        }
        f.pop();
        f = poly_trim(f);
        if f.len() <= dg {
            break;
        }
    }
    poly_trim(f)
}

/// Monic polynomial with the given degree whose low coefficients are the
/// base-p digits of `idx` read so that `idx` ascending matches lexicographic
/// order on the coefficient list (constant term compared first).
fn monic_from_index(idx: u64, degree: usize, p: u32) -> Vec<u32> {
    let mut coeffs = vec![0u32; degree + 1];
    coeffs[degree] = 1;
    let mut v = idx;
    // Constant term is the most significant position of the lex order, so it
    // takes the highest-weight digit.
    for slot in 0..degree {
        let weight = (p as u64).pow((degree - 1 - slot) as u32);
        coeffs[slot] = (v / weight) as u32;
        v %= weight;
    }
    coeffs
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let n = f.len() - 1;
    if n == 1 {
        return true;
    }
    if f[0] == 0 {
        return false; // divisible by x
    }
    for d in 1..=n / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let g = monic_from_index(idx, d, p);
            if poly_rem(f.to_vec(), &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

// ======================================================================
// construction
// ======================================================================

/// Digit-wise (coefficient-wise) sum of two encoded elements.
fn raw_add(a: u32, b: u32, p: u32) -> u32 {
    if p == 2 {
        return a ^ b;
    }
    let (mut a, mut b) = (a, b);
    let mut out = 0u32;
    let mut weight = 1u32;
    while a > 0 || b > 0 {
        out += (a % p + b % p) % p * weight;
        a /= p;
        b /= p;
        weight *= p;
    }
    out
}

fn raw_neg(a: u32, p: u32) -> u32 {
    let mut a = a;
    let mut out = 0u32;
    let mut weight = 1u32;
    while a > 0 {
        out += (p - a % p) % p * weight;
        a /= p;
        weight *= p;
    }
    out
}

fn digits(a: u32, p: u32, n: u32) -> Vec<u32> {
    let mut v = Vec::with_capacity(n as usize);
    let mut a = a;
    for _ in 0..n {
        v.push(a % p);
        a /= p;
    }
    v
}

fn undigits(d: &[u32], p: u32) -> u32 {
    let mut out = 0u32;
    for &c in d.iter().rev() {
        out = out * p + c;
    }
    out
}

/// Product of encoded elements by schoolbook polynomial multiplication and
/// reduction; only used while bootstrapping the log tables.
fn raw_mul(a: u32, b: u32, p: u32, n: u32, modulus: &[u32]) -> u32 {
    let da = digits(a, p, n);
    let db = digits(b, p, n);
    let mut prod = vec![0u32; 2 * n as usize];
    for (i, &x) in da.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    let rem = poly_rem(poly_trim(prod), modulus, p);
    let mut full = vec![0u32; n as usize];
    full[..rem.len()].copy_from_slice(&rem);
    undigits(&full, p)
}

/// Construct GF(p^n). The modulus is found by scanning monic degree-n
/// polynomials in lexicographic order (coefficients compared low-to-high) for
/// the first irreducible one.
pub fn make_field(p: u64, n: u64) -> Result<Field, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if n == 0 {
        return Err(FieldError::ZeroDegree);
    }
    let mut q: u64 = 1;
    for _ in 0..n {
        q = q.saturating_mul(p);
        if q > MAX_Q {
            return Err(FieldError::TooLarge(q));
        }
    }
    let (p, n, q) = (p as u32, n as u32, q as u32);

    let modulus = {
        let count = (p as u64).pow(n);
        let mut found = None;
        for idx in 0..count {
            let cand = monic_from_index(idx, n as usize, p);
            if is_irreducible(&cand, p) {
                found = Some(cand);
                break;
            }
        }
        found.expect("an irreducible polynomial of every degree exists")
    };

    // Discrete-log tables on the first primitive element.
    let ord = (q - 1) as u64;
    let factors = prime_factors(ord);
    let pow = |mut base: u32, mut e: u64| -> u32 {
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = raw_mul(acc, base, p, n, &modulus);
            }
            base = raw_mul(base, base, p, n, &modulus);
            e >>= 1;
        }
        acc
    };
    let mut gen = 0u32;
    if q > 2 {
        for g in 2..q {
            if factors.iter().all(|&f| pow(g, ord / f) != 1) {
                gen = g;
                break;
            }
        }
        assert!(gen != 0, "multiplicative group of a finite field is cyclic");
    } else {
        gen = 1;
    }

    let mut exp = vec![0u16; (2 * ord.max(1)) as usize];
    let mut log = vec![0u32; q as usize];
    let mut acc = 1u32;
    for i in 0..ord as usize {
        exp[i] = acc as u16;
        exp[i + ord as usize] = acc as u16;
        log[acc as usize] = i as u32;
        acc = raw_mul(acc, gen, p, n, &modulus);
    }
    assert_eq!(acc, 1, "generator order mismatch");

    let neg: Vec<u16> = (0..q).map(|a| raw_neg(a, p) as u16).collect();
    let frob: Vec<u16> = (0..q)
        .map(|a| {
            if a == 0 {
                0
            } else {
                exp[(log[a as usize] as u64 * p as u64 % ord) as usize]
            }
        })
        .collect();
    let add_tbl = if q <= 1024 {
        let mut t = vec![0u16; (q * q) as usize];
        for a in 0..q {
            for b in 0..q {
                t[(a * q + b) as usize] = raw_add(a, b, p) as u16;
            }
        }
        Some(t)
    } else {
        None
    };

    Ok(Field(Arc::new(FieldData {
        p,
        n,
        q,
        modulus,
        exp,
        log,
        neg,
        frob,
        add_tbl,
    })))
}

// ======================================================================
// element operations
// ======================================================================

impl Field {
    pub fn p(&self) -> u32 {
        self.0.p
    }
    pub fn n(&self) -> u32 {
        self.0.n
    }
    pub fn q(&self) -> u32 {
        self.0.q
    }
    /// Modulus coefficients, low-to-high; length n + 1, leading 1.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        debug_assert!((a as u32) < self.0.q && (b as u32) < self.0.q);
        if self.0.p == 2 {
            return a ^ b;
        }
        if let Some(t) = &self.0.add_tbl {
            return t[(a as u32 * self.0.q + b as u32) as usize];
        }
        raw_add(a as u32, b as u32, self.0.p) as u16
    }

    #[inline]
    pub fn neg(&self, a: u16) -> u16 {
        self.0.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u16, b: u16) -> u16 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        let d = &self.0;
        d.exp[(d.log[a as usize] + d.log[b as usize]) as usize]
    }

    /// Multiplicative inverse; None for zero.
    #[inline]
    pub fn inv(&self, a: u16) -> Option<u16> {
        if a == 0 {
            return None;
        }
        let d = &self.0;
        let ord = d.q - 1;
        Some(d.exp[((ord - d.log[a as usize]) % ord) as usize])
    }

    pub fn div(&self, a: u16, b: u16) -> u16 {
        self.mul(a, self.inv(b).expect("division by zero"))
    }

    pub fn pow(&self, a: u16, e: u64) -> u16 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let d = &self.0;
        let ord = (d.q - 1) as u64;
        d.exp[(d.log[a as usize] as u64 * (e % ord) % ord) as usize]
    }

    /// The p-power map a -> a^p.
    #[inline]
    pub fn frobenius(&self, a: u16) -> u16 {
        self.0.frob[a as usize]
    }

    /// k-fold Frobenius.
    pub fn frobenius_iter(&self, a: u16, k: u32) -> u16 {
        let mut a = a;
        for _ in 0..k % self.0.n {
            a = self.frobenius(a);
        }
        a
    }

    /// Coefficients of the polynomial representative, low-to-high, length n.
    pub fn element_digits(&self, a: u16) -> Vec<u32> {
        digits(a as u32, self.0.p, self.0.n)
    }
}

// ======================================================================
