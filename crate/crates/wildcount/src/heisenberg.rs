//! Counters specific to the generalized Heisenberg algebras h_k: the sets
//! A_{k,m}(F_q) of vectors orthogonal to their first m Frobenius images under
//! the standard symplectic form, maximal isotropic subspace counts, and the
//! exact local count identity N(<1+p^{-m}) = q |A_{k,m}(F_q)|.

use std::collections::HashSet;
use std::sync::Arc;

use num_rational::Ratio;

use crate::error::{check_guard, Error, Result};
use crate::finite_field::{FieldElement, FieldParams};
use crate::lie::{LieAlgebraSpec, TensorAlgebra};
use crate::local::count_lastjump_lt;

type Q = Ratio<i64>;

/// F_q^{2k} with the symplectic form f_k((a, b), (a', b')) = a.b' - b.a'.
#[derive(Debug, Clone)]
pub struct SymplecticSpace {
    pub k: usize,
    pub field: FieldParams,
}

impl SymplecticSpace {
    pub fn new(k: usize, field: FieldParams) -> Self {
        SymplecticSpace { k, field }
    }

    pub fn form(&self, x: &[FieldElement], y: &[FieldElement]) -> FieldElement {
        let f = &self.field;
        let k = self.k;
        let mut acc = f.zero();
        for i in 0..k {
            acc = f.add(&acc, &f.mul(&x[i], &y[k + i]));
            acc = f.sub(&acc, &f.mul(&x[k + i], &y[i]));
        }
        acc
    }

    fn vector_from_index(&self, mut idx: u128) -> Vec<FieldElement> {
        let q = self.field.order() as u128;
        (0..2 * self.k)
            .map(|_| {
                let e = self.field.element_from_index((idx % q) as u64);
                idx /= q;
                e
            })
            .collect()
    }

    fn dimension_count(&self) -> u128 {
        (self.field.order() as u128).pow(2 * self.k as u32)
    }
}

/// |A_{k,m}(F_q)| by exhaustive enumeration of F_q^{2k}.
pub fn a_km_bruteforce(k: usize, m: u32, field: &FieldParams) -> Result<u64> {
    let space = SymplecticSpace::new(k, field.clone());
    let total = space.dimension_count();
    check_guard(total, 100_000_000)?;
    let mut count = 0u64;
    for idx in 0..total {
        let x = space.vector_from_index(idx);
        let mut sx = x.clone();
        let mut ok = true;
        for _i in 1..=m {
            for c in sx.iter_mut() {
                *c = field.frobenius(c);
            }
            if !field.is_zero(&space.form(&sx, &x)) {
                ok = false;
                break;
            }
        }
        if ok {
            count += 1;
        }
    }
    Ok(count)
}

/// |A_{k,m}(F_q)| = q^{k-m} sum_t R(t)^k through exact root counting:
/// R(t) = #{b in F_q : sum_i (sigma^{m-i}(t_i) b^{p^m + p^{m-i}}
///                           - sigma^m(t_i) b^{p^{m+i} + p^m}) = 0}.
/// b = 0 always satisfies the condition; t = 0 contributes R(0)^k = q^k.
pub fn a_km_charsum(k: usize, m: u32, field: &FieldParams) -> Result<u64> {
    if m == 0 {
        return Err(Error::InvalidInput("character-sum path requires m >= 1".into()));
    }
    let q = field.order();
    let total = (q as u128).pow(m + 1);
    check_guard(total, 100_000_000)?;

    let mut sum = 0u128;
    let q_u = q as u128;
    for t_idx in 0..q_u.pow(m) {
        let mut idx = t_idx;
        let t: Vec<FieldElement> = (0..m)
            .map(|_| {
                let e = field.element_from_index((idx % q_u) as u64);
                idx /= q_u;
                e
            })
            .collect();
        let mut roots = 0u64;
        for b_idx in 0..q {
            let b = field.element_from_index(b_idx);
            // sigma powers of b up to 2m
            let mut sig_b = Vec::with_capacity(2 * m as usize + 1);
            sig_b.push(b.clone());
            for j in 1..=2 * m {
                sig_b.push(field.frobenius(&sig_b[(j - 1) as usize]));
            }
            let mut val = field.zero();
            for i in 1..=m {
                let ti = &t[(i - 1) as usize];
                let sig_mi_t = field.frobenius_iter(ti, m - i);
                let sig_m_t = field.frobenius_iter(ti, m);
                // b^{p^m + p^{m-i}} = sigma^m(b) sigma^{m-i}(b)
                let pos = field.mul(&sig_mi_t, &field.mul(&sig_b[m as usize], &sig_b[(m - i) as usize]));
                let neg = field.mul(&sig_m_t, &field.mul(&sig_b[(m + i) as usize], &sig_b[m as usize]));
                val = field.add(&val, &field.sub(&pos, &neg));
            }
            if field.is_zero(&val) {
                roots += 1;
            }
        }
        sum += (roots as u128).pow(k as u32);
    }
    // |A| = q^{k-m} sum = q^k sum / q^m, which must divide exactly
    let scaled = q_u.pow(k as u32).checked_mul(sum).ok_or_else(|| {
        Error::Internal("character sum overflow".into())
    })?;
    let denom = q_u.pow(m);
    if scaled % denom != 0 {
        return Err(Error::Internal(format!(
            "character sum not divisible by q^m: {scaled} / {denom}"
        )));
    }
    u64::try_from(scaled / denom).map_err(|_| Error::Internal("count exceeds u64".into()))
}

/// Maximal (k-dimensional) totally isotropic subspaces of F_p^{2k}:
/// brute-force enumeration via reduced echelon bases, and the closed form
/// prod_{i=1..k} (p^i + 1). Both values are returned.
pub fn isotropic_count(p: u64, k: usize) -> Result<(u64, u64)> {
    check_guard((p as u128).pow(2 * k as u32), 10_000_000)?;
    let field = FieldParams::new(p, 1)?;
    let bases = maximal_isotropic_bases(k, &field);
    let formula: u64 = (1..=k as u32).map(|i| p.pow(i) + 1).product();
    Ok((bases.len() as u64, formula))
}

/// All maximal isotropic subspaces of kappa^{2k}, each as an echelon basis.
fn maximal_isotropic_bases(k: usize, field: &FieldParams) -> Vec<Vec<Vec<FieldElement>>> {
    let n = 2 * k;
    let space = SymplecticSpace::new(k, field.clone());
    let q = field.order();
    let mut out = Vec::new();

    // choose pivot columns, then fill free entries in reduced echelon form
    let mut pivots: Vec<usize> = (0..k).collect();
    loop {
        // free positions: row r, column c > pivots[r], c not a pivot
        let mut free = Vec::new();
        for (r, &pc) in pivots.iter().enumerate() {
            for c in (pc + 1)..n {
                if !pivots.contains(&c) {
                    free.push((r, c));
                }
            }
        }
        let combos = (q as u128).pow(free.len() as u32);
        for mut idx in 0..combos {
            let mut basis = vec![vec![field.zero(); n]; k];
            for (r, &pc) in pivots.iter().enumerate() {
                basis[r][pc] = field.one();
            }
            for &(r, c) in &free {
                basis[r][c] = field.element_from_index((idx % q as u128) as u64);
                idx /= q as u128;
            }
            let isotropic = (0..k).all(|i| {
                (i + 1..k).all(|j| field.is_zero(&space.form(&basis[i], &basis[j])))
            });
            if isotropic {
                out.push(basis);
            }
        }
        // next pivot combination (lexicographic)
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pivots[i] < n - (k - i) {
                pivots[i] += 1;
                for j in i + 1..k {
                    pivots[j] = pivots[i] + (j - i);
                }
                break;
            }
        }
    }
}

/// |A_{k,m}(F_q)| for m >= k, as the union of W (x) F_q over all maximal
/// isotropic F_p-subspaces W.
pub fn a_km_stable(k: usize, field: &FieldParams) -> Result<u64> {
    let p = field.p;
    check_guard((p as u128).pow(2 * k as u32), 10_000_000)?;
    let q = field.order();
    let prime_field = FieldParams::new(p, 1)?;
    let bases = maximal_isotropic_bases(k, &prime_field);
    check_guard(bases.len() as u128 * (q as u128).pow(k as u32), 100_000_000)?;

    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    for basis in &bases {
        // kappa-span of the F_p-basis rows
        let combos = (q as u128).pow(k as u32);
        for mut idx in 0..combos {
            let coeffs: Vec<FieldElement> = (0..k)
                .map(|_| {
                    let e = field.element_from_index((idx % q as u128) as u64);
                    idx /= q as u128;
                    e
                })
                .collect();
            let mut vec = vec![field.zero(); 2 * k];
            for (row, c) in basis.iter().zip(&coeffs) {
                for (col, entry) in row.iter().enumerate() {
                    if prime_field.is_zero(entry) {
                        continue;
                    }
                    let lifted = field.element(&entry.coeffs);
                    vec[col] = field.add(&vec[col], &field.mul(c, &lifted));
                }
            }
            seen.insert(vec.iter().map(|e| field.element_index(e)).collect());
        }
    }
    Ok(seen.len() as u64)
}

/// q |A_{k,m}(F_q)|, cross-checked against the ramification-equation count
/// N(< 1 + p^{-m}) before being returned.
pub fn heisenberg_local_small_v(k: usize, field: &FieldParams, m: u32, jobs: usize) -> Result<u128> {
    let a_km = a_km_bruteforce(k, m, field)? as u128;
    let expected = field.order() as u128 * a_km;
    let alg = Arc::new(TensorAlgebra::new(
        LieAlgebraSpec::heisenberg(field.p, k),
        field.clone(),
    )?);
    let v = Q::from_integer(1) + Q::new(1, (field.p as i64).pow(m));
    let counted = count_lastjump_lt(&alg, v, jobs)?;
    if counted != expected {
        return Err(Error::Internal(format!(
            "Heisenberg local identity fails: q |A_{{{k},{m}}}| = {expected} but N(<1+p^-{m}) = {counted}"
        )));
    }
    Ok(expected)
}
