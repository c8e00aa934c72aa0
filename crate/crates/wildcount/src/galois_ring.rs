//! Arithmetic in W_n(F_{p^d}), realized as the Galois ring
//! GR(p^n, d) = (Z/p^n)[X]/(f~) for a monic lift f~ of the field modulus.
//!
//! The Frobenius lift sigma is determined by a Hensel-lifted root of f~
//! congruent to X^p mod p; multiplication by p coincides with Ver . sigma,
//! but only its composite (plain scalar multiplication here) is observable
//! in this model.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::finite_field::{FieldElement, FieldParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingParams {
    pub p: u64,
    pub n: u32,
    pub d: u32,
    /// p^n, the coefficient modulus.
    pub modulus: u64,
    /// Monic degree-d lift of the field modulus, coefficients low-to-high mod p^n.
    pub lifted_modulus: Vec<u64>,
    /// Image of the ring generator under sigma (a root of lifted_modulus
    /// reducing to generator^p), stored with its powers 0..d.
    frobenius_powers: Vec<RingElement>,
    pub field: FieldParams,
}

/// Element of GR(p^n, d): coefficient vector of length d, entries mod p^n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElement {
    pub coeffs: Vec<u64>,
}

impl RingParams {
    pub fn new(field: &FieldParams, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("Witt length must be >= 1".into()));
        }
        let p = field.p;
        let d = field.d;
        let modulus = p
            .checked_pow(n)
            .filter(|m| m.checked_mul(*m).is_some())
            .ok_or_else(|| Error::InvalidInput(format!("p^n = {p}^{n} too large")))?;
        let lifted_modulus: Vec<u64> = field.modulus.clone();
        let mut params = RingParams {
            p,
            n,
            d,
            modulus,
            lifted_modulus,
            frobenius_powers: Vec::new(),
            field: field.clone(),
        };
        let frob_image = params.lift_frobenius_root();
        let mut powers = Vec::with_capacity(d as usize);
        let mut acc = params.one();
        for _ in 0..d {
            powers.push(acc.clone());
            acc = params.mul(&acc, &frob_image);
        }
        params.frobenius_powers = powers;
        debug_assert!(params.is_zero(&params.eval_modulus(&frob_image)));
        Ok(params)
    }

    /// Newton-iterates the root X^p of f mod p to a root of f mod p^n.
    /// Always converges: f is separable mod p.
    fn lift_frobenius_root(&self) -> RingElement {
        let x = self.gen();
        let mut rho = self.pow(&x, self.p);
        for _ in 0..40 {
            let fr = self.eval_modulus(&rho);
            if self.is_zero(&fr) {
                break;
            }
            let dfr = self.eval_modulus_derivative(&rho);
            let corr = self.mul(&fr, &self.inv_unit(&dfr));
            rho = self.sub(&rho, &corr);
        }
        assert!(self.is_zero(&self.eval_modulus(&rho)), "Hensel lift did not converge");
        rho
    }

    /// f(x), by Horner; f is the monic lifted modulus.
    fn eval_modulus(&self, x: &RingElement) -> RingElement {
        let mut val = self.scalar(self.lifted_modulus[self.d as usize]);
        for i in (0..self.d as usize).rev() {
            val = self.mul(&val, x);
            val = self.add(&val, &self.scalar(self.lifted_modulus[i]));
        }
        val
    }

    fn eval_modulus_derivative(&self, x: &RingElement) -> RingElement {
        let d = self.d as usize;
        let mut val = self.scalar(d as u64 % self.modulus);
        for i in (1..d).rev() {
            val = self.mul(&val, x);
            let c = (self.lifted_modulus[i] as u128 * i as u128 % self.modulus as u128) as u64;
            val = self.add(&val, &self.scalar(c));
        }
        val
    }

    /// Inverse of a unit, by lifting the residue inverse with Newton steps.
    fn inv_unit(&self, u: &RingElement) -> RingElement {
        let res = self.residue(u);
        let res_inv = self
            .field
            .inv(&res)
            .expect("not a unit");
        let mut v = self.lift(&res_inv);
        for _ in 0..6 {
            // v <- v (2 - u v)
            let uv = self.mul(u, &v);
            let two_minus = self.sub(&self.scalar(2), &uv);
            v = self.mul(&v, &two_minus);
            if self.is_one(&self.mul(u, &v)) {
                break;
            }
        }
        debug_assert!(self.is_one(&self.mul(u, &v)));
        v
    }

    pub fn size(&self) -> u128 {
        (self.modulus as u128).pow(self.d)
    }

    pub fn zero(&self) -> RingElement {
        RingElement { coeffs: vec![0; self.d as usize] }
    }

    pub fn one(&self) -> RingElement {
        self.scalar(1)
    }

    pub fn is_zero(&self, x: &RingElement) -> bool {
        x.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self, x: &RingElement) -> bool {
        x.coeffs[0] == 1 && x.coeffs[1..].iter().all(|&c| c == 0)
    }

    pub fn scalar(&self, c: u64) -> RingElement {
        let mut coeffs = vec![0; self.d as usize];
        coeffs[0] = c % self.modulus;
        RingElement { coeffs }
    }

    pub fn gen(&self) -> RingElement {
        if self.d == 1 {
            // X = -f[0] in the quotient
            return self.scalar(self.modulus - self.lifted_modulus[0] % self.modulus);
        }
        let mut coeffs = vec![0; self.d as usize];
        coeffs[1] = 1;
        RingElement { coeffs }
    }

    pub fn element(&self, coeffs: &[u64]) -> RingElement {
        let mut c = vec![0; self.d as usize];
        for (i, &x) in coeffs.iter().enumerate().take(self.d as usize) {
            c[i] = x % self.modulus;
        }
        RingElement { coeffs: c }
    }

    pub fn add(&self, x: &RingElement, y: &RingElement) -> RingElement {
        let coeffs = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(&a, &b)| ((a as u128 + b as u128) % self.modulus as u128) as u64)
            .collect();
        RingElement { coeffs }
    }

    pub fn sub(&self, x: &RingElement, y: &RingElement) -> RingElement {
        let m = self.modulus;
        let coeffs = x.coeffs.iter().zip(&y.coeffs).map(|(&a, &b)| (a + m - b) % m).collect();
        RingElement { coeffs }
    }

    pub fn neg(&self, x: &RingElement) -> RingElement {
        let m = self.modulus;
        let coeffs = x.coeffs.iter().map(|&a| (m - a) % m).collect();
        RingElement { coeffs }
    }

    pub fn mul(&self, x: &RingElement, y: &RingElement) -> RingElement {
        let d = self.d as usize;
        let m = self.modulus as u128;
        let mut prod = vec![0u64; 2 * d - 1];
        for (i, &a) in x.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in y.coeffs.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u128 + a as u128 * b as u128) % m) as u64;
            }
        }
        // reduce by the monic lifted modulus
        for i in (d..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            let shift = i - d;
            for j in 0..d {
                let sub = c as u128 * self.lifted_modulus[j] as u128 % m;
                prod[shift + j] = ((prod[shift + j] as u128 + m - sub) % m) as u64;
            }
        }
        prod.truncate(d);
        RingElement { coeffs: prod }
    }

    pub fn scalar_mul(&self, c: u64, x: &RingElement) -> RingElement {
        let m = self.modulus as u128;
        let c = c as u128 % m;
        let coeffs = x.coeffs.iter().map(|&a| (a as u128 * c % m) as u64).collect();
        RingElement { coeffs }
    }

    pub fn pow(&self, x: &RingElement, mut e: u64) -> RingElement {
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

    pub fn mul_by_p(&self, x: &RingElement) -> RingElement {
        self.scalar_mul(self.p, x)
    }

    pub fn p_power_annihilates(&self, x: &RingElement, k: u32) -> bool {
        let mut y = x.clone();
        for _ in 0..k {
            y = self.mul_by_p(&y);
        }
        self.is_zero(&y)
    }

    /// sigma, the Frobenius lift: evaluate the coefficient polynomial at the
    /// lifted root of the modulus. O(d^2).
    pub fn frobenius(&self, x: &RingElement) -> RingElement {
        let mut acc = self.zero();
        for (t, &c) in x.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            acc = self.add(&acc, &self.scalar_mul(c, &self.frobenius_powers[t]));
        }
        acc
    }

    pub fn frobenius_iter(&self, x: &RingElement, i: u32) -> RingElement {
        let mut y = x.clone();
        for _ in 0..(i % self.d) {
            y = self.frobenius(&y);
        }
        y
    }

    /// Reduction mod p onto the residue field.
    pub fn residue(&self, x: &RingElement) -> FieldElement {
        self.field.element(&x.coeffs.iter().map(|&c| c % self.p).collect::<Vec<_>>())
    }

    /// Coefficient-wise integer lift of a residue-field element.
    pub fn lift(&self, a: &FieldElement) -> RingElement {
        RingElement { coeffs: a.coeffs.clone() }
    }

    /// The Teichmuller representative: the unique lift t of a with t^(p^d) = t.
    pub fn teichmuller(&self, a: &FieldElement) -> RingElement {
        let q = self.field.order();
        let mut t = self.lift(a);
        for _ in 0..self.n {
            let next = self.pow(&t, q);
            if next == t {
                return t;
            }
            t = next;
        }
        debug_assert_eq!(self.pow(&t, q), t);
        t
    }

    /// Reduce the coefficients of `x` modulo p^k (canonical form of the image
    /// in W_k). Requires k <= n.
    pub fn reduce_coeffs(&self, x: &RingElement, k: u32) -> RingElement {
        let m = self.p.pow(k);
        RingElement { coeffs: x.coeffs.iter().map(|&c| c % m).collect() }
    }

    pub fn element_from_index(&self, mut idx: u128) -> RingElement {
        let m = self.modulus as u128;
        let mut coeffs = vec![0u64; self.d as usize];
        for c in coeffs.iter_mut() {
            *c = (idx % m) as u64;
            idx /= m;
        }
        RingElement { coeffs }
    }

    pub fn enumerate(&self) -> impl Iterator<Item = RingElement> + '_ {
        (0..self.size()).map(move |i| self.element_from_index(i))
    }
}

impl Serialize for RingParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("RingParams", 4)?;
        s.serialize_field("p", &self.p)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("d", &self.d)?;
        s.serialize_field("lifted_modulus", &self.lifted_modulus)?;
        s.end()
    }
}

impl Serialize for RingElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs.serialize(serializer)
    }
}
