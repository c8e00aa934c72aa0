//! Exact arithmetic in GF(p^d) for odd p, in the polynomial basis
//! (Z/p)[X]/(f) with a deterministic choice of irreducible modulus f.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of GF(p^d): odd prime p, degree d, and the lexicographically
/// smallest monic irreducible modulus of degree d over GF(p).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldParams {
    pub p: u64,
    pub d: u32,
    /// Monic modulus, coefficients low-to-high degree (length d+1, last entry 1).
    pub modulus: Vec<u64>,
}

/// Element of GF(p^d): coefficient vector of length d, entries reduced mod p.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    pub coeffs: Vec<u64>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2u64;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

impl FieldParams {
    /// Builds GF(p^d) with the smallest irreducible modulus in the
    /// coefficient-counter order (X^d first, then X^d + 1, ...).
    pub fn new(p: u64, d: u32) -> Result<Self> {
        if !is_prime(p) || p == 2 {
            return Err(Error::NotOddPrime(p));
        }
        if d == 0 || d > 12 {
            return Err(Error::DegreeOutOfRange(d));
        }
        if d == 1 {
            // X itself: the prime field.
            return Ok(FieldParams { p, d, modulus: vec![0, 1] });
        }
        let mut low = vec![0u64; d as usize];
        loop {
            let mut modulus = low.clone();
            modulus.push(1);
            if poly_is_irreducible(&modulus, p, d) {
                return Ok(FieldParams { p, d, modulus });
            }
            // low-to-high odometer on the non-leading coefficients
            let mut i = 0;
            loop {
                low[i] += 1;
                if low[i] < p {
                    break;
                }
                low[i] = 0;
                i += 1;
                if i == d as usize {
                    return Err(Error::Internal(format!(
                        "no irreducible polynomial of degree {d} over GF({p})"
                    )));
                }
            }
        }
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.d)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { coeffs: vec![0; self.d as usize] }
    }

    pub fn one(&self) -> FieldElement {
        let mut coeffs = vec![0; self.d as usize];
        coeffs[0] = 1;
        FieldElement { coeffs }
    }

    /// The class of X (a generator of the field over GF(p) for d > 1).
    pub fn gen(&self) -> FieldElement {
        if self.d == 1 {
            return self.one();
        }
        let mut coeffs = vec![0; self.d as usize];
        coeffs[1] = 1;
        FieldElement { coeffs }
    }

    /// Element with the given coefficient vector, entries reduced mod p.
    pub fn element(&self, coeffs: &[u64]) -> FieldElement {
        let mut c = vec![0; self.d as usize];
        for (i, &x) in coeffs.iter().enumerate().take(self.d as usize) {
            c[i] = x % self.p;
        }
        FieldElement { coeffs: c }
    }

    /// Element number `idx` in enumeration order (base-p digits, low first).
    pub fn element_from_index(&self, mut idx: u64) -> FieldElement {
        let mut coeffs = vec![0; self.d as usize];
        for c in coeffs.iter_mut() {
            *c = idx % self.p;
            idx /= self.p;
        }
        FieldElement { coeffs }
    }

    pub fn element_index(&self, x: &FieldElement) -> u64 {
        let mut idx = 0;
        for &c in x.coeffs.iter().rev() {
            idx = idx * self.p + c;
        }
        idx
    }

    pub fn add(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let coeffs = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(&a, &b)| (a + b) % self.p)
            .collect();
        FieldElement { coeffs }
    }

    pub fn sub(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let coeffs = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(&a, &b)| (a + self.p - b) % self.p)
            .collect();
        FieldElement { coeffs }
    }

    pub fn neg(&self, x: &FieldElement) -> FieldElement {
        let coeffs = x.coeffs.iter().map(|&a| (self.p - a) % self.p).collect();
        FieldElement { coeffs }
    }

    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let prod = poly_mul(&x.coeffs, &y.coeffs, self.p);
        FieldElement { coeffs: poly_rem(&prod, &self.modulus, self.p, self.d as usize) }
    }

    pub fn is_zero(&self, x: &FieldElement) -> bool {
        x.coeffs.iter().all(|&c| c == 0)
    }

    pub fn inv(&self, x: &FieldElement) -> Result<FieldElement> {
        if self.is_zero(x) {
            return Err(Error::DivisionByZero);
        }
        // x^(q-2); exact and simple at these field sizes
        Ok(self.pow(x, self.order() - 2))
    }

    pub fn pow(&self, x: &FieldElement, mut e: u64) -> FieldElement {
        let mut base = x.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Absolute Frobenius x -> x^p.
    pub fn frobenius(&self, x: &FieldElement) -> FieldElement {
        self.pow(x, self.p)
    }

    pub fn frobenius_iter(&self, x: &FieldElement, i: u32) -> FieldElement {
        let mut y = x.clone();
        for _ in 0..(i % self.d) {
            y = self.frobenius(&y);
        }
        y
    }

    /// Trace to GF(p), returned as a residue mod p.
    pub fn trace(&self, x: &FieldElement) -> u64 {
        let mut acc = self.zero();
        let mut y = x.clone();
        for _ in 0..self.d {
            acc = self.add(&acc, &y);
            y = self.frobenius(&y);
        }
        debug_assert!(acc.coeffs[1..].iter().all(|&c| c == 0));
        acc.coeffs[0]
    }

    /// All p^d elements, lexicographic on coefficient vectors (low digit first).
    pub fn enumerate(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order()).map(move |i| self.element_from_index(i))
    }
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = ((out[i + j] as u128 + ai as u128 * bj as u128) % p as u128) as u64;
        }
    }
    out
}

/// Remainder of `a` modulo the monic polynomial `m`, truncated to `d` coefficients.
fn poly_rem(a: &[u64], m: &[u64], p: u64, d: usize) -> Vec<u64> {
    let mut a = a.to_vec();
    for i in (d..a.len()).rev() {
        let c = a[i];
        if c == 0 {
            continue;
        }
        a[i] = 0;
        let shift = i - d;
        for (j, &mj) in m.iter().enumerate().take(d) {
            let sub = (c as u128 * mj as u128) % p as u128;
            a[shift + j] = ((a[shift + j] as u128 + p as u128 - sub) % p as u128) as u64;
        }
    }
    a.truncate(d.max(1));
    a.resize(d, 0);
    a
}

fn poly_deg(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

fn poly_gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    loop {
        let db = match poly_deg(&b) {
            None => return a,
            Some(db) => db,
        };
        // a mod b, with b made monic on the fly
        let lead_inv = mod_inv_prime(b[db], p);
        let da = poly_deg(&a);
        match da {
            None => return b,
            Some(da) if da < db => {
                std::mem::swap(&mut a, &mut b);
                continue;
            }
            Some(da) => {
                for i in (db..=da).rev() {
                    let c = (a[i] as u128 * lead_inv as u128 % p as u128) as u64;
                    if c == 0 {
                        continue;
                    }
                    let shift = i - db;
                    for j in 0..=db {
                        let sub = (c as u128 * b[j] as u128) % p as u128;
                        a[shift + j] =
                            ((a[shift + j] as u128 + p as u128 - sub) % p as u128) as u64;
                    }
                }
                std::mem::swap(&mut a, &mut b);
            }
        }
    }
}

fn mod_inv_prime(a: u64, p: u64) -> u64 {
    // Fermat
    let mut e = p - 2;
    let mut base = a % p;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * base as u128 % p as u128) as u64;
        }
        base = (base as u128 * base as u128 % p as u128) as u64;
        e >>= 1;
    }
    acc
}

/// X^(p^e) mod f, by e-fold p-th powering in (Z/p)[X]/(f).
fn x_pow_p_e(f: &[u64], p: u64, d: usize, e: u32) -> Vec<u64> {
    let mut cur = vec![0u64; d];
    if d == 1 {
        // X reduces to a constant; irrelevant since d = 1 never reaches here
        cur[0] = 0;
    } else {
        cur[1] = 1;
    }
    for _ in 0..e {
        // cur <- cur^p mod f
        let mut acc = vec![0u64; d];
        acc[0] = 1;
        let mut base = cur.clone();
        let mut k = p;
        while k > 0 {
            if k & 1 == 1 {
                acc = poly_rem(&poly_mul(&acc, &base, p), f, p, d);
            }
            base = poly_rem(&poly_mul(&base, &base, p), f, p, d);
            k >>= 1;
        }
        cur = acc;
    }
    cur
}

/// Irreducibility of a monic degree-d polynomial over GF(p):
/// X^(p^d) = X mod f, and gcd(X^(p^e) - X, f) = 1 for all e | d, e < d.
fn poly_is_irreducible(f: &[u64], p: u64, d: u32) -> bool {
    let du = d as usize;
    let xpd = x_pow_p_e(f, p, du, d);
    let mut x = vec![0u64; du];
    x[1] = 1;
    if xpd != x {
        return false;
    }
    for e in 1..d {
        if d % e != 0 {
            continue;
        }
        let mut g = x_pow_p_e(f, p, du, e);
        // g - X
        g[1] = (g[1] + p - 1) % p;
        let gcd = poly_gcd(f.to_vec(), g, p);
        if poly_deg(&gcd) != Some(0) {
            return false;
        }
    }
    true
}
