//! Finite Lie Z_p-algebras of nilpotency class <= 2, given by cyclic-factor
//! orders and bracket structure constants, together with their base changes
//! g (x) W(kappa) and the truncated BCH group law x o y = x + y + [x,y]/2.

use std::collections::HashSet;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_field::{is_prime, FieldParams};
use crate::galois_ring::{RingElement, RingParams};

pub type Q = Ratio<i64>;

/// Structure constant [e_i, e_j] = value for one basis pair i < j.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub value: Vec<u64>,
}

/// A finite Lie Z_p-algebra g = prod_i Z/p^{n_i} with brackets on basis pairs.
/// Omitted pairs have zero bracket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LieAlgebraSpec {
    pub p: u64,
    pub orders: Vec<u32>,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
}

/// Element of g itself (integer coordinates, coordinate i reduced mod p^{n_i}).
pub type GVec = Vec<u64>;

/// Derived subobjects of a validated spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subobjects {
    pub center_basis: Vec<GVec>,
    pub p_torsion_basis: Vec<GVec>,
    pub derived_basis: Vec<GVec>,
    pub center_size: u128,
    pub p_torsion_size: u128,
    pub derived_size: u128,
    /// r = log_p |g[p]|.
    pub r: u32,
    pub p_torsion_abelian: bool,
    /// M = 1 if g[p] abelian, else 1 + 1/p.
    pub m_constant: Q,
    /// Whether Z(g) satisfies the intersection hypothesis
    /// n cap p^k g = p^k n for all k >= 1.
    pub better_bound_ok: bool,
}

impl LieAlgebraSpec {
    pub fn abelian(p: u64, orders: Vec<u32>) -> Self {
        LieAlgebraSpec { p, orders, brackets: Vec::new() }
    }

    /// The generalized Heisenberg algebra h_k: basis (a_1..a_k, b_1..b_k, z),
    /// [a_i, b_i] = z, all other basis brackets zero, exponent p.
    pub fn heisenberg(p: u64, k: usize) -> Self {
        let r = 2 * k + 1;
        let mut z = vec![0u64; r];
        z[2 * k] = 1;
        let brackets = (0..k).map(|i| BracketEntry { i, j: k + i, value: z.clone() }).collect();
        LieAlgebraSpec { p, orders: vec![1; r], brackets }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: LieAlgebraSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn max_order(&self) -> u32 {
        self.orders.iter().copied().max().unwrap_or(1)
    }

    /// |g| = p^(sum n_i).
    pub fn group_size(&self) -> u128 {
        self.orders.iter().map(|&n| (self.p as u128).pow(n)).product()
    }

    pub fn exponent_p(&self) -> bool {
        self.orders.iter().all(|&n| n == 1)
    }

    fn coord_mod(&self, k: usize) -> u64 {
        self.p.pow(self.orders[k])
    }

    /// Checks all spec invariants; reports the first violated axiom.
    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) || self.p == 2 {
            return Err(Error::InvalidSpec(format!("p = {} is not an odd prime", self.p)));
        }
        if self.orders.is_empty() {
            return Err(Error::InvalidSpec("empty generator list".into()));
        }
        if self.orders.contains(&0) {
            return Err(Error::InvalidSpec("zero order".into()));
        }
        if self.orders.iter().any(|&n| self.p.checked_pow(2 * n).is_none()) {
            return Err(Error::InvalidSpec("p^(2n) overflows".into()));
        }
        let r = self.rank();
        let mut seen = HashSet::new();
        for e in &self.brackets {
            if e.i >= e.j || e.j >= r {
                return Err(Error::InvalidSpec(format!(
                    "bracket pair ({}, {}) must satisfy i < j < {}",
                    e.i, e.j, r
                )));
            }
            if !seen.insert((e.i, e.j)) {
                return Err(Error::InvalidSpec(format!("duplicate bracket pair ({}, {})", e.i, e.j)));
            }
            if e.value.len() != r {
                return Err(Error::InvalidSpec(format!(
                    "bracket value for ({}, {}) has length {} != {}",
                    e.i,
                    e.j,
                    e.value.len(),
                    r
                )));
            }
        }
        // torsion compatibility: p^min(n_i, n_j) c_ij = 0
        for e in &self.brackets {
            let kill = self.p.pow(self.orders[e.i].min(self.orders[e.j]));
            for (k, &c) in e.value.iter().enumerate() {
                let m = self.coord_mod(k);
                if (c % m) as u128 * kill as u128 % m as u128 != 0 {
                    return Err(Error::InvalidSpec(format!(
                        "torsion violation: p^min(n_{}, n_{}) [e_{}, e_{}] != 0 at coordinate {}",
                        e.i, e.j, e.i, e.j, k
                    )));
                }
            }
        }
        // class <= 2: every bracket value is central, i.e. [c_ij, e_k] = 0
        for e in &self.brackets {
            for k in 0..r {
                let ek = self.g_basis(k);
                let val = self.g_bracket(&self.g_reduce(&e.value), &ek);
                if val.iter().any(|&c| c != 0) {
                    return Err(Error::InvalidSpec(format!(
                        "class > 2: [[e_{}, e_{}], e_{}] != 0",
                        e.i, e.j, k
                    )));
                }
            }
        }
        // Jacobi on basis triples (automatic given class <= 2; kept as a guard)
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    let t1 = self.g_bracket(&self.g_bracket(&self.g_basis(i), &self.g_basis(j)), &self.g_basis(k));
                    let t2 = self.g_bracket(&self.g_bracket(&self.g_basis(j), &self.g_basis(k)), &self.g_basis(i));
                    let t3 = self.g_bracket(&self.g_bracket(&self.g_basis(k), &self.g_basis(i)), &self.g_basis(j));
                    let sum = self.g_add(&self.g_add(&t1, &t2), &t3);
                    if sum.iter().any(|&c| c != 0) {
                        return Err(Error::InvalidSpec(format!("Jacobi fails at ({i}, {j}, {k})")));
                    }
                }
            }
        }
        Ok(())
    }

    // ---- arithmetic in g itself (d = 1, integer coordinates) ----

    pub fn g_zero(&self) -> GVec {
        vec![0; self.rank()]
    }

    pub fn g_basis(&self, k: usize) -> GVec {
        let mut v = self.g_zero();
        v[k] = 1;
        v
    }

    pub fn g_reduce(&self, x: &[u64]) -> GVec {
        x.iter().enumerate().map(|(k, &c)| c % self.coord_mod(k)).collect()
    }

    pub fn g_add(&self, x: &[u64], y: &[u64]) -> GVec {
        x.iter()
            .zip(y)
            .enumerate()
            .map(|(k, (&a, &b))| ((a as u128 + b as u128) % self.coord_mod(k) as u128) as u64)
            .collect()
    }

    pub fn g_smul(&self, c: i128, x: &[u64]) -> GVec {
        x.iter()
            .enumerate()
            .map(|(k, &a)| {
                let m = self.coord_mod(k) as i128;
                ((c * a as i128).rem_euclid(m)) as u64
            })
            .collect()
    }

    pub fn g_bracket(&self, x: &[u64], y: &[u64]) -> GVec {
        let mut acc = vec![0i128; self.rank()];
        for e in &self.brackets {
            let t = x[e.i] as i128 * y[e.j] as i128 - x[e.j] as i128 * y[e.i] as i128;
            if t == 0 {
                continue;
            }
            for (k, &c) in e.value.iter().enumerate() {
                acc[k] += t * c as i128;
            }
        }
        acc.iter()
            .enumerate()
            .map(|(k, &a)| a.rem_euclid(self.coord_mod(k) as i128) as u64)
            .collect()
    }

    pub fn g_element_from_index(&self, mut idx: u128) -> GVec {
        let mut v = self.g_zero();
        for (k, c) in v.iter_mut().enumerate() {
            let m = self.coord_mod(k) as u128;
            *c = (idx % m) as u64;
            idx /= m;
        }
        v
    }

    pub fn g_enumerate(&self) -> impl Iterator<Item = GVec> + '_ {
        (0..self.group_size()).map(move |i| self.g_element_from_index(i))
    }

    /// Derived subobjects: center, p-torsion ideal, derived subalgebra,
    /// r = log_p |g[p]|, M, and the better-bound hypothesis for n = Z(g).
    pub fn subobjects(&self) -> Result<Subobjects> {
        self.validate()?;
        let size = self.group_size();
        if size > 1 << 24 {
            return Err(Error::TooLarge { required: size, guard: 1 << 24 });
        }
        let all: Vec<GVec> = self.g_enumerate().collect();
        let basis_vecs: Vec<GVec> = (0..self.rank()).map(|k| self.g_basis(k)).collect();

        let center: Vec<GVec> = all
            .iter()
            .filter(|x| basis_vecs.iter().all(|e| self.g_bracket(x, e).iter().all(|&c| c == 0)))
            .cloned()
            .collect();
        let p_torsion: Vec<GVec> = all
            .iter()
            .filter(|x| self.g_smul(self.p as i128, x).iter().all(|&c| c == 0))
            .cloned()
            .collect();
        let derived_gens: Vec<GVec> =
            self.brackets.iter().map(|e| self.g_reduce(&e.value)).collect();
        let derived = self.span(&derived_gens);

        let mut r = 0u32;
        let mut pw = 1u128;
        while pw < p_torsion.len() as u128 {
            pw *= self.p as u128;
            r += 1;
        }
        assert_eq!(pw, p_torsion.len() as u128, "|g[p]| is not a power of p");

        let p_torsion_abelian = p_torsion.iter().all(|x| {
            p_torsion.iter().all(|y| self.g_bracket(x, y).iter().all(|&c| c == 0))
        });
        let m_constant = if p_torsion_abelian {
            Q::from_integer(1)
        } else {
            Q::new(self.p as i64 + 1, self.p as i64)
        };

        // n cap p^k g = p^k n for n = Z(g), k = 1..max order (automatic beyond)
        let center_set: HashSet<&GVec> = center.iter().collect();
        let mut better_bound_ok = true;
        for k in 1..self.max_order() {
            let pk = (self.p as i128).pow(k);
            let pk_g: HashSet<GVec> = all.iter().map(|x| self.g_smul(pk, x)).collect();
            let pk_n: HashSet<GVec> = center.iter().map(|x| self.g_smul(pk, x)).collect();
            let inter: HashSet<GVec> =
                pk_g.iter().filter(|x| center_set.contains(x)).cloned().collect();
            if inter != pk_n {
                better_bound_ok = false;
                break;
            }
        }

        Ok(Subobjects {
            center_basis: self.generating_set(&center),
            p_torsion_basis: self.generating_set(&p_torsion),
            derived_basis: self.generating_set(&derived),
            center_size: center.len() as u128,
            p_torsion_size: p_torsion.len() as u128,
            derived_size: derived.len() as u128,
            r,
            p_torsion_abelian,
            m_constant,
            better_bound_ok,
        })
    }

    /// Closure of a generating set under addition (the generated submodule).
    fn span(&self, gens: &[GVec]) -> Vec<GVec> {
        let mut set: HashSet<GVec> = HashSet::new();
        set.insert(self.g_zero());
        let mut frontier = vec![self.g_zero()];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = self.g_add(&x, g);
                if set.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        let mut out: Vec<GVec> = set.into_iter().collect();
        out.sort();
        out
    }

    /// Greedy generating set of a subgroup given by its element list.
    fn generating_set(&self, subgroup: &[GVec]) -> Vec<GVec> {
        let target = subgroup.len();
        let mut gens: Vec<GVec> = Vec::new();
        let mut spanned = 1usize;
        for x in subgroup {
            if x.iter().all(|&c| c == 0) {
                continue;
            }
            if spanned == target {
                break;
            }
            let mut cand = gens.clone();
            cand.push(x.clone());
            let s = self.span(&cand).len();
            if s > spanned {
                spanned = s;
                gens = cand;
            }
        }
        gens
    }
}

/// g (x) W(kappa): every coordinate lives in the level-N Galois ring
/// (N = max n_i) and is kept reduced mod p^{n_i}. Mixed-modulus products in
/// brackets are well-defined thanks to the validated torsion compatibility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorAlgebra {
    pub spec: LieAlgebraSpec,
    pub field: FieldParams,
    pub ring: RingParams,
    pub sub: Subobjects,
    coord_mod: Vec<u64>,
    inv2: u64,
}

/// Element of g (x) W(kappa): one ring element per generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LieElement {
    pub coords: Vec<RingElement>,
}

impl TensorAlgebra {
    pub fn new(spec: LieAlgebraSpec, field: FieldParams) -> Result<Self> {
        let sub = spec.subobjects()?;
        if spec.p != field.p {
            return Err(Error::InvalidInput(format!(
                "algebra characteristic {} != field characteristic {}",
                spec.p, field.p
            )));
        }
        let ring = RingParams::new(&field, spec.max_order())?;
        let coord_mod = (0..spec.rank()).map(|k| spec.coord_mod(k)).collect();
        let inv2 = mod_inverse(2, ring.modulus);
        Ok(TensorAlgebra { spec, field, ring, sub, coord_mod, inv2 })
    }

    pub fn p(&self) -> u64 {
        self.spec.p
    }

    pub fn rank(&self) -> usize {
        self.spec.rank()
    }

    /// |g (x) W(kappa)| = |kappa|^(sum n_i).
    pub fn size(&self) -> u128 {
        self.coord_mod.iter().map(|&m| (m as u128).pow(self.field.d)).product()
    }

    pub fn inv2(&self) -> u64 {
        self.inv2
    }

    pub fn modulus(&self) -> u64 {
        self.ring.modulus
    }

    fn reduce(&self, mut x: LieElement) -> LieElement {
        for (k, c) in x.coords.iter_mut().enumerate() {
            *c = self.ring.reduce_coeffs(c, self.spec.orders[k]);
        }
        x
    }

    pub fn zero(&self) -> LieElement {
        LieElement { coords: vec![self.ring.zero(); self.rank()] }
    }

    pub fn is_zero(&self, x: &LieElement) -> bool {
        x.coords.iter().all(|c| self.ring.is_zero(c))
    }

    /// Embeds an element of g (integer coordinates).
    pub fn from_gvec(&self, v: &[u64]) -> LieElement {
        let coords = v.iter().map(|&c| self.ring.scalar(c)).collect();
        self.reduce(LieElement { coords })
    }

    /// Builds an element from per-generator ring coefficient vectors.
    pub fn from_coeff_vectors(&self, vecs: &[Vec<u64>]) -> Result<LieElement> {
        if vecs.len() != self.rank() {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinate vectors, got {}",
                self.rank(),
                vecs.len()
            )));
        }
        let coords = vecs.iter().map(|v| self.ring.element(v)).collect();
        Ok(self.reduce(LieElement { coords }))
    }

    pub fn add(&self, x: &LieElement, y: &LieElement) -> LieElement {
        let coords = x.coords.iter().zip(&y.coords).map(|(a, b)| self.ring.add(a, b)).collect();
        self.reduce(LieElement { coords })
    }

    pub fn sub(&self, x: &LieElement, y: &LieElement) -> LieElement {
        let coords = x.coords.iter().zip(&y.coords).map(|(a, b)| self.ring.sub(a, b)).collect();
        self.reduce(LieElement { coords })
    }

    pub fn neg(&self, x: &LieElement) -> LieElement {
        let coords = x.coords.iter().map(|a| self.ring.neg(a)).collect();
        self.reduce(LieElement { coords })
    }

    pub fn scalar_mul(&self, c: u64, x: &LieElement) -> LieElement {
        let coords = x.coords.iter().map(|a| self.ring.scalar_mul(c, a)).collect();
        self.reduce(LieElement { coords })
    }

    /// W(kappa)-bilinear bracket, assembled from the structure constants.
    pub fn bracket(&self, x: &LieElement, y: &LieElement) -> LieElement {
        let mut acc = vec![self.ring.zero(); self.rank()];
        for e in &self.spec.brackets {
            let t = self.ring.sub(
                &self.ring.mul(&x.coords[e.i], &y.coords[e.j]),
                &self.ring.mul(&x.coords[e.j], &y.coords[e.i]),
            );
            if self.ring.is_zero(&t) {
                continue;
            }
            for (k, &c) in e.value.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                acc[k] = self.ring.add(&acc[k], &self.ring.scalar_mul(c, &t));
            }
        }
        self.reduce(LieElement { coords: acc })
    }

    /// Truncated BCH product x o y = x + y + [x,y]/2.
    pub fn bch(&self, x: &LieElement, y: &LieElement) -> LieElement {
        let br = self.bracket(x, y);
        self.add(&self.add(x, y), &self.scalar_mul(self.inv2, &br))
    }

    /// sigma, applied coordinatewise.
    pub fn frobenius(&self, x: &LieElement) -> LieElement {
        let coords = x.coords.iter().map(|c| self.ring.frobenius(c)).collect();
        self.reduce(LieElement { coords })
    }

    pub fn frobenius_iter(&self, x: &LieElement, i: u32) -> LieElement {
        let mut y = x.clone();
        for _ in 0..(i % self.field.d) {
            y = self.frobenius(&y);
        }
        y
    }

    /// Twisted conjugation g.m = sigma(g) o m o (-g).
    pub fn act(&self, g: &LieElement, m: &LieElement) -> LieElement {
        self.bch(&self.bch(&self.frobenius(g), m), &self.neg(g))
    }

    /// The multiplicative Artin-Schreier map: wp(g) = sigma(g) o (-g) = g.0.
    pub fn artin_schreier(&self, g: &LieElement) -> LieElement {
        self.bch(&self.frobenius(g), &self.neg(g))
    }

    pub fn is_central(&self, x: &LieElement) -> bool {
        (0..self.rank()).all(|k| {
            let e = self.from_gvec(&self.spec.g_basis(k));
            self.is_zero(&self.bracket(x, &e))
        })
    }

    pub fn element_from_index(&self, mut idx: u128) -> LieElement {
        let d = self.field.d as usize;
        let mut coords = Vec::with_capacity(self.rank());
        for &m in &self.coord_mod {
            let mut coeffs = vec![0u64; d];
            for c in coeffs.iter_mut() {
                *c = (idx % m as u128) as u64;
                idx /= m as u128;
            }
            coords.push(RingElement { coeffs });
        }
        LieElement { coords }
    }

    pub fn element_index(&self, x: &LieElement) -> u128 {
        let mut idx = 0u128;
        for (k, c) in x.coords.iter().enumerate().rev() {
            let m = self.coord_mod[k] as u128;
            for &digit in c.coeffs.iter().rev() {
                idx = idx * m + digit as u128;
            }
        }
        idx
    }

    pub fn enumerate(&self) -> impl Iterator<Item = LieElement> + '_ {
        (0..self.size()).map(move |i| self.element_from_index(i))
    }
}

pub(crate) fn mod_inverse(a: u64, m: u64) -> u64 {
    // extended Euclid; gcd(a, m) = 1 expected
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    assert_eq!(old_r, 1, "not invertible");
    old_s.rem_euclid(m as i128) as u64
}
