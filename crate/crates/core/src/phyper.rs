//! Finite groups `V_n ⋊_α C` with `V_n` elementary abelian of order `p^n`
//! and `C` cyclic inside `(Z/pZ)^*` acting diagonally by the scalar `α`.
//!
//! Element arithmetic follows the closed forms
//!
//! ```text
//! (v, a)(w, b)  = (v + α^a w, a + b)
//! (v, a)^-1     = (-α^-a v, -a)
//! [(v,a),(w,b)] = ((1 - α^b) v + (α^a - 1) w, 0)
//! ```
//!
//! and the module also provides generation tests, minimal generator counts,
//! and the exhaustive quotient-enumeration oracle that the decision pipeline
//! is validated against.

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, inv_mod_prime, mul_mod, pow_mod};
use crate::words::{SubgroupBasis, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PHyperError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("invalid group data: {0}")]
    BadGroup(String),
    #[error("element does not belong to the group")]
    BadElement,
    #[error("generation test requires a nonabelian group; use a span test for m = 1")]
    AbelianGroup,
    #[error("generation test needs exactly n + 1 = {0} elements")]
    WrongArity(usize),
}

/// Element `(v, x^a)` of `V_n ⋊_α C`: a vector over `Z/pZ` and an exponent
/// modulo the order of `C`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PHyperElement {
    pub v: Vec<u64>,
    pub a: u64,
}

/// The group `V_n ⋊_α C` with `|C| = m`. A faithful group has `α` of exact
/// multiplicative order `m`, so `C` acts faithfully; tuples drawn from the
/// modular-evaluation side only guarantee `α^m ≡ 1` and are created with
/// [`PHyperGroup::with_action`]. Order-sensitive operations require the
/// faithful form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PHyperGroup {
    p: u64,
    n: usize,
    alpha: u64,
    m: u64,
    faithful: bool,
}

impl PHyperGroup {
    /// Faithful constructor: `α` must have exact order `m` mod `p`, and
    /// `α = 1` exactly when `m = 1`.
    pub fn new(p: u64, n: usize, alpha: u64, m: u64) -> Result<PHyperGroup, PHyperError> {
        if !arith::is_prime_u64(p) {
            return Err(PHyperError::BadGroup(format!("{p} is not prime")));
        }
        if n == 0 || alpha == 0 || alpha >= p || m == 0 || m > p - 1 {
            return Err(PHyperError::BadGroup(format!(
                "parameters out of range: p={p} n={n} alpha={alpha} m={m}"
            )));
        }
        if arith::order_mod_prime(alpha, p) != m {
            return Err(PHyperError::BadGroup(format!(
                "alpha={alpha} does not have order {m} mod {p}"
            )));
        }
        Ok(PHyperGroup {
            p,
            n,
            alpha,
            m,
            faithful: true,
        })
    }

    /// Relaxed constructor for evaluation targets: only `α^m ≡ 1 mod p` is
    /// required, so the action may fail to be faithful.
    pub fn with_action(p: u64, n: usize, alpha: u64, m: u64) -> Result<PHyperGroup, PHyperError> {
        if !arith::is_prime_u64(p) {
            return Err(PHyperError::BadGroup(format!("{p} is not prime")));
        }
        if n == 0 || alpha == 0 || alpha >= p || m == 0 {
            return Err(PHyperError::BadGroup(format!(
                "parameters out of range: p={p} n={n} alpha={alpha} m={m}"
            )));
        }
        if pow_mod(alpha, m, p) != 1 {
            return Err(PHyperError::BadGroup(format!(
                "alpha^m must be 1 mod p (alpha={alpha} m={m} p={p})"
            )));
        }
        let faithful = arith::order_mod_prime(alpha, p) == m;
        Ok(PHyperGroup {
            p,
            n,
            alpha,
            m,
            faithful,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn is_faithful(&self) -> bool {
        self.faithful
    }

    /// `p^n * m`.
    pub fn order(&self) -> u64 {
        self.p.pow(self.n as u32) * self.m
    }

    pub fn identity(&self) -> PHyperElement {
        PHyperElement {
            v: vec![0; self.n],
            a: 0,
        }
    }

    pub fn element(&self, v: Vec<u64>, a: u64) -> Result<PHyperElement, PHyperError> {
        if v.len() != self.n || v.iter().any(|&x| x >= self.p) || a >= self.m {
            return Err(PHyperError::BadElement);
        }
        Ok(PHyperElement { v, a })
    }

    fn assert_member(&self, g: &PHyperElement) {
        assert!(
            g.v.len() == self.n && g.v.iter().all(|&x| x < self.p) && g.a < self.m,
            "element does not belong to this group"
        );
    }

    pub fn mul(&self, g: &PHyperElement, h: &PHyperElement) -> PHyperElement {
        self.assert_member(g);
        self.assert_member(h);
        let scale = pow_mod(self.alpha, g.a, self.p);
        let v = g
            .v
            .iter()
            .zip(&h.v)
            .map(|(&x, &y)| (x + mul_mod(scale, y, self.p)) % self.p)
            .collect();
        PHyperElement {
            v,
            a: (g.a + h.a) % self.m,
        }
    }

    pub fn inv(&self, g: &PHyperElement) -> PHyperElement {
        self.assert_member(g);
        let scale_inv = inv_mod_prime(pow_mod(self.alpha, g.a, self.p), self.p);
        let v = g
            .v
            .iter()
            .map(|&x| mul_mod(self.p - 1, mul_mod(scale_inv, x, self.p), self.p))
            .collect();
        PHyperElement {
            v,
            a: (self.m - g.a) % self.m,
        }
    }

    /// Commutator by its closed form; the result always lies in `V_n`.
    pub fn comm(&self, g: &PHyperElement, h: &PHyperElement) -> PHyperElement {
        self.assert_member(g);
        self.assert_member(h);
        let ag = pow_mod(self.alpha, g.a, self.p);
        let ah = pow_mod(self.alpha, h.a, self.p);
        // (1 - α^b) v + (α^a - 1) w, all mod p.
        let left = (1 + self.p - ah) % self.p;
        let right = (ag + self.p - 1) % self.p;
        let v = g
            .v
            .iter()
            .zip(&h.v)
            .map(|(&x, &y)| (mul_mod(left, x, self.p) + mul_mod(right, y, self.p)) % self.p)
            .collect();
        PHyperElement { v, a: 0 }
    }

    /// Element order by its closed form. Requires a faithful action.
    pub fn ord(&self, g: &PHyperElement) -> u64 {
        self.assert_member(g);
        assert!(self.faithful, "element order needs a faithful action");
        if g.v.iter().all(|&x| x == 0) && g.a == 0 {
            return 1;
        }
        if g.a == 0 {
            self.p
        } else {
            self.m / self.m.gcd(&g.a)
        }
    }

    /// Conjugation of a vector of `V_n`: `g u g^{-1} = α^{a} u`.
    pub fn conj_vec(&self, g: &PHyperElement, u: &[u64]) -> Vec<u64> {
        self.assert_member(g);
        assert!(u.len() == self.n && u.iter().all(|&x| x < self.p));
        let scale = pow_mod(self.alpha, g.a, self.p);
        u.iter().map(|&x| mul_mod(scale, x, self.p)).collect()
    }

    /// Conjugating element sending `g` with nonzero `C`-part into `C`:
    /// `h g h^{-1} = x^{a}` for `h = (v / (α^a - 1), 0)`. Test support only.
    pub fn conj_into_c(&self, g: &PHyperElement) -> Option<PHyperElement> {
        self.assert_member(g);
        if g.a == 0 {
            return None;
        }
        let denom = (pow_mod(self.alpha, g.a, self.p) + self.p - 1) % self.p;
        if denom == 0 {
            return None;
        }
        let inv = inv_mod_prime(denom, self.p);
        let v = g.v.iter().map(|&x| mul_mod(inv, x, self.p)).collect();
        Some(PHyperElement { v, a: 0 })
    }

    pub fn pow(&self, g: &PHyperElement, k: i64) -> PHyperElement {
        if k < 0 {
            return self.pow(&self.inv(g), -k);
        }
        let mut acc = self.identity();
        let mut base = g.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Image of a word under the homomorphism sending `x_i` to `images[i-1]`.
    pub fn eval_word(&self, images: &[PHyperElement], w: &Word) -> PHyperElement {
        assert_eq!(images.len(), w.rank());
        let mut acc = self.identity();
        for &letter in w.letters() {
            let idx = letter.unsigned_abs() as usize - 1;
            let g = if letter > 0 {
                images[idx].clone()
            } else {
                self.inv(&images[idx])
            };
            acc = self.mul(&acc, &g);
        }
        acc
    }

    /// Every element, vectors enumerated lexicographically within each
    /// `C`-part.
    pub fn elements(&self) -> Vec<PHyperElement> {
        let mut out = Vec::with_capacity(self.order() as usize);
        let mut v = vec![0u64; self.n];
        for a in 0..self.m {
            loop {
                out.push(PHyperElement { v: v.clone(), a });
                // Odometer increment.
                let mut i = self.n;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    v[i] += 1;
                    if v[i] < self.p {
                        break;
                    }
                    v[i] = 0;
                }
                if v.iter().all(|&x| x == 0) {
                    break;
                }
            }
        }
        out
    }

    /// Subgroup generated by `gens`, as a sorted element list. Breadth-first
    /// multiplication; finite groups need no explicit inverses.
    pub fn closure(&self, gens: &[PHyperElement]) -> Vec<PHyperElement> {
        let mut seen = std::collections::HashSet::new();
        let mut frontier = vec![self.identity()];
        seen.insert(self.identity());
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = self.mul(&x, g);
                if seen.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        let mut out: Vec<PHyperElement> = seen.into_iter().collect();
        out.sort();
        out
    }

    /// Generation test for a set of exactly `n + 1` elements in a nonabelian
    /// group: the `C`-parts must generate `C` and the pairwise commutators
    /// must span `V_n`.
    pub fn is_generating(&self, z: &[PHyperElement]) -> Result<bool, PHyperError> {
        if self.m == 1 {
            return Err(PHyperError::AbelianGroup);
        }
        if z.len() != self.n + 1 {
            return Err(PHyperError::WrongArity(self.n + 1));
        }
        for g in z {
            self.assert_member(g);
        }
        // lcm of the C-part orders over elements with a nonzero C-part.
        let mut l: u64 = 1;
        let mut any = false;
        for g in z {
            if g.a != 0 {
                any = true;
                l = l.lcm(&(self.m / self.m.gcd(&g.a)));
            }
        }
        if !any || l != self.m {
            return Ok(false);
        }
        let mut vectors: Vec<Vec<u64>> = Vec::new();
        for i in 0..z.len() {
            for j in i + 1..z.len() {
                vectors.push(self.comm(&z[i], &z[j]).v);
            }
        }
        Ok(rank_mod_p(&mut vectors, self.p) == self.n)
    }

    /// Minimal number of generators: `n` when `C` is trivial, `n + 1`
    /// otherwise.
    pub fn min_generators(&self) -> usize {
        assert!(self.faithful, "generator count needs a faithful action");
        if self.m == 1 {
            self.n
        } else {
            self.n + 1
        }
    }
}

/// Row rank of a set of vectors over `Z/pZ`; consumes the rows.
fn rank_mod_p(rows: &mut [Vec<u64>], p: u64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] % p != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = inv_mod_prime(rows[rank][col] % p, p);
        for c in 0..cols {
            rows[rank][c] = mul_mod(rows[rank][c] % p, inv, p);
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] % p != 0 {
                let f = rows[r][col] % p;
                for c in 0..cols {
                    let sub = mul_mod(f, rows[rank][c], p);
                    rows[r][c] = (rows[r][c] + p - sub) % p;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Code-table model of `Z/pZ ⋊_α Z/mZ` used by the oracle sweep. Elements
/// are encoded as `a * p + v`.
struct CodeGroup {
    size: usize,
    mul: Vec<u16>,
    inv: Vec<u16>,
}

impl CodeGroup {
    fn build(p: u64, alpha: u64, m: u64) -> CodeGroup {
        let size = (p * m) as usize;
        let mut mul = vec![0u16; size * size];
        let mut inv = vec![0u16; size];
        let mut alpha_pow = vec![1u64; m as usize];
        for a in 1..m as usize {
            alpha_pow[a] = mul_mod(alpha_pow[a - 1], alpha, p);
        }
        for x in 0..size {
            let (ax, vx) = (x as u64 / p, x as u64 % p);
            for y in 0..size {
                let (ay, vy) = (y as u64 / p, y as u64 % p);
                let v = (vx + mul_mod(alpha_pow[ax as usize], vy, p)) % p;
                let a = (ax + ay) % m;
                mul[x * size + y] = (a * p + v) as u16;
            }
        }
        for x in 0..size {
            let (ax, vx) = (x as u64 / p, x as u64 % p);
            let a = (m - ax) % m;
            let v = if vx == 0 {
                0
            } else {
                p - mul_mod(inv_mod_prime(alpha_pow[ax as usize], p), vx, p)
            };
            inv[x] = (a * p + v) as u16;
        }
        CodeGroup { size, mul, inv }
    }

    #[inline]
    fn mul(&self, x: u16, y: u16) -> u16 {
        self.mul[x as usize * self.size + y as usize]
    }
}

/// Bitset closure of the subgroup generated by `gens`; returns the number
/// of elements reached. `bits` and `stack` are caller-provided scratch.
fn closure_size(
    g: &CodeGroup,
    gens: &[u16],
    bits: &mut [u64],
    stack: &mut Vec<u16>,
) -> usize {
    for b in bits.iter_mut() {
        *b = 0;
    }
    stack.clear();
    bits[0] |= 1; // identity has code 0
    stack.push(0);
    let mut count = 1usize;
    while let Some(x) = stack.pop() {
        for &gen in gens {
            let y = g.mul(x, gen);
            let (w, b) = (y as usize / 64, y as usize % 64);
            if bits[w] & (1 << b) == 0 {
                bits[w] |= 1 << b;
                count += 1;
                stack.push(y);
            }
        }
    }
    count
}

/// Word evaluation over element codes.
fn eval_word_code(g: &CodeGroup, images: &[u16], w: &Word) -> u16 {
    let mut acc = 0u16;
    for &letter in w.letters() {
        let idx = letter.unsigned_abs() as usize - 1;
        let img = if letter > 0 {
            images[idx]
        } else {
            g.inv[images[idx] as usize]
        };
        acc = g.mul(acc, img);
    }
    acc
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for d in 1..=n {
        if n % d == 0 {
            out.push(d);
        }
    }
    out
}

/// Does every surjection from the free group onto a group `Z/pZ ⋊ C`,
/// `C ≤ (Z/pZ)^*`, map the subgroup generated by `basis` onto the whole
/// group? Decided by exhaustive enumeration of generator images over one
/// representative `α` per cyclic order `m` dividing `p - 1`; surjectivity
/// and the subgroup image are both tested by closure.
pub fn qp_oracle(basis: &SubgroupBasis, p: u64) -> Result<bool, PHyperError> {
    qp_oracle_impl(basis, p, false)
}

/// Variant sweeping every `α` of exact order `m`, used to validate the
/// single-representative reduction.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn qp_oracle_all_alpha(basis: &SubgroupBasis, p: u64) -> Result<bool, PHyperError> {
    qp_oracle_impl(basis, p, true)
}

fn qp_oracle_impl(basis: &SubgroupBasis, p: u64, all_alpha: bool) -> Result<bool, PHyperError> {
    if p == 2 || !arith::is_prime_u64(p) {
        return Err(PHyperError::NotOddPrime(p));
    }
    let d = basis.rank();
    for m in divisors(p - 1) {
        let mut alphas: Vec<u64> = (1..p)
            .filter(|&a| arith::order_mod_prime(a, p) == m)
            .collect();
        if alphas.is_empty() {
            continue;
        }
        if !all_alpha {
            alphas.truncate(1);
        }
        for alpha in alphas {
            let group = CodeGroup::build(p, alpha, m);
            let size = group.size;
            let wide: u128 = (size as u128).pow(d as u32);
            if wide > 20_000_000_000 {
                return Err(PHyperError::BadGroup(format!(
                    "oracle sweep of {wide} assignments at p={p}, m={m}, d={d} is out of reach"
                )));
            }
            let total = wide as u64;
            let words = size.div_ceil(64).max(1);
            let chunk = 1u64 << 12;
            let ranges: Vec<(u64, u64)> = (0..total.div_ceil(chunk))
                .map(|i| (i * chunk, ((i + 1) * chunk).min(total)))
                .collect();
            let failed = ranges
                .par_iter()
                .map_init(
                    || (vec![0u64; words], Vec::<u16>::with_capacity(size), vec![0u16; d]),
                    |(bits, stack, images), &(lo, hi)| {
                        for idx in lo..hi {
                            let mut rest = idx;
                            for slot in images.iter_mut() {
                                *slot = (rest % size as u64) as u16;
                                rest /= size as u64;
                            }
                            // Images of the subgroup generators first: if they
                            // already reach everything this assignment cannot
                            // witness a failure.
                            let h_codes: Vec<u16> = basis
                                .words()
                                .iter()
                                .map(|w| eval_word_code(&group, images, w))
                                .collect();
                            if closure_size(&group, &h_codes, bits, stack) == size {
                                continue;
                            }
                            if closure_size(&group, images, bits, stack) == size {
                                return true; // surjective with proper image
                            }
                        }
                        false
                    },
                )
                .any(|x| x);
            if failed {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3_shape() -> PHyperGroup {
        PHyperGroup::new(3, 1, 2, 2).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let g = s3_shape();
        let e = g.element(vec![1], 1).unwrap();
        assert_eq!(g.inv(&e), g.element(vec![1], 1).unwrap());
        assert_eq!(g.mul(&e, &g.inv(&e)), g.identity());
        assert_eq!(g.ord(&g.element(vec![1], 0).unwrap()), 3);
        assert_eq!(g.ord(&g.identity()), 1);
        let c = g.comm(
            &g.element(vec![1], 1).unwrap(),
            &g.element(vec![1], 0).unwrap(),
        );
        assert_eq!(c, g.element(vec![1], 0).unwrap());
    }

    #[test]
    fn group_constructors_enforce_invariants() {
        assert!(PHyperGroup::new(3, 1, 2, 2).is_ok());
        // 2 has order 2 mod 3, not 1.
        assert!(PHyperGroup::new(3, 1, 2, 1).is_err());
        // 4 is not prime.
        assert!(PHyperGroup::new(4, 1, 3, 2).is_err());
        // Relaxed action: alpha = p-1 has order 2, m = 4 is a proper multiple.
        let relaxed = PHyperGroup::with_action(5, 1, 4, 4).unwrap();
        assert!(!relaxed.is_faithful());
        assert!(PHyperGroup::with_action(5, 1, 2, 3).is_err());
    }

    #[test]
    fn closed_forms_match_brute_force_small() {
        for (p, n, alpha, m) in [(3, 1, 2, 2), (5, 1, 2, 4), (5, 2, 4, 2), (7, 1, 2, 3)] {
            let g = PHyperGroup::new(p, n, alpha, m).unwrap();
            let elems = g.elements();
            assert_eq!(elems.len() as u64, g.order());
            for x in &elems {
                // Inverse law.
                assert_eq!(g.mul(x, &g.inv(x)), g.identity());
                // Order by repeated multiplication.
                let mut acc = x.clone();
                let mut k = 1;
                while acc != g.identity() {
                    acc = g.mul(&acc, x);
                    k += 1;
                }
                assert_eq!(k, g.ord(x), "ord mismatch for {x:?} in p={p} n={n}");
                for y in &elems {
                    let brute = g.mul(
                        &g.mul(&g.mul(x, y), &g.inv(x)),
                        &g.inv(y),
                    );
                    assert_eq!(g.comm(x, y), brute);
                }
            }
        }
    }

    #[test]
    fn conjugation_scales_vectors() {
        let g = PHyperGroup::new(5, 2, 2, 4).unwrap();
        for x in g.elements().iter().take(40) {
            let u = vec![1, 3];
            let direct = g.conj_vec(x, &u);
            let u_elem = g.element(u.clone(), 0).unwrap();
            let brute = g.mul(&g.mul(x, &u_elem), &g.inv(x));
            assert_eq!(direct, brute.v);
            assert_eq!(brute.a, 0);
        }
    }

    #[test]
    fn conj_into_c_recovers_the_c_part() {
        let g = PHyperGroup::new(5, 1, 2, 4).unwrap();
        for x in g.elements() {
            if x.a == 0 {
                continue;
            }
            let h = g.conj_into_c(&x).unwrap();
            let conj = g.mul(&g.mul(&h, &x), &g.inv(&h));
            assert_eq!(conj, g.element(vec![0], x.a).unwrap());
        }
    }

    #[test]
    fn generation_criterion_examples() {
        let g = s3_shape();
        let z = vec![
            g.element(vec![0], 1).unwrap(),
            g.element(vec![1], 0).unwrap(),
        ];
        assert!(g.is_generating(&z).unwrap());
        assert_eq!(g.closure(&z).len(), 6);

        let inside = vec![
            g.element(vec![1], 0).unwrap(),
            g.element(vec![2], 0).unwrap(),
        ];
        assert!(!g.is_generating(&inside).unwrap());

        let dup = vec![
            g.element(vec![0], 1).unwrap(),
            g.element(vec![0], 1).unwrap(),
        ];
        assert!(!g.is_generating(&dup).unwrap());

        let abelian = PHyperGroup::new(3, 1, 1, 1).unwrap();
        assert!(matches!(
            abelian.is_generating(&[abelian.identity(), abelian.identity()]),
            Err(PHyperError::AbelianGroup)
        ));
    }

    #[test]
    fn generation_matches_closure_on_a_midsize_group() {
        let g = PHyperGroup::new(5, 1, 2, 4).unwrap();
        let elems = g.elements();
        let full = g.order() as usize;
        for i in 0..elems.len() {
            for j in i..elems.len() {
                let z = vec![elems[i].clone(), elems[j].clone()];
                let fast = g.is_generating(&z).unwrap();
                let brute = g.closure(&z).len() == full;
                assert_eq!(fast, brute, "subset {:?}", z);
            }
        }
    }

    #[test]
    fn min_generators_closed_form() {
        assert_eq!(PHyperGroup::new(3, 2, 1, 1).unwrap().min_generators(), 2);
        assert_eq!(PHyperGroup::new(3, 2, 2, 2).unwrap().min_generators(), 3);
        assert_eq!(PHyperGroup::new(3, 1, 2, 2).unwrap().min_generators(), 2);
    }

    #[test]
    fn oracle_full_group_always_passes() {
        for d in [1usize, 2, 3] {
            let basis = SubgroupBasis::full_group(d).unwrap();
            for p in [3u64, 5, 7] {
                assert!(qp_oracle(&basis, p).unwrap(), "d={d} p={p}");
            }
        }
        assert!(matches!(
            qp_oracle(&SubgroupBasis::full_group(2).unwrap(), 2),
            Err(PHyperError::NotOddPrime(2))
        ));
    }

    #[test]
    fn oracle_detects_square_and_cube_failures() {
        let wd = |letters: &[i32]| Word::reduce(2, letters).unwrap();
        // <x1, x2^2>: the assignment x1 -> (1,0), x2 -> (0,1) onto the
        // S3-shaped quotient is surjective but maps the subgroup into V_1.
        let basis = SubgroupBasis::new(2, vec![wd(&[1]), wd(&[2, 2])]).unwrap();
        let g = s3_shape();
        let images = vec![g.element(vec![1], 0).unwrap(), g.element(vec![0], 1).unwrap()];
        assert!(g.is_generating(&images).unwrap());
        let h_images: Vec<PHyperElement> = basis
            .words()
            .iter()
            .map(|w| g.eval_word(&images, w))
            .collect();
        assert!(g.closure(&h_images).len() < 6);
        assert!(!qp_oracle(&basis, 3).unwrap());

        // Abelianized image of index 3 fails through the m = 1 quotient.
        let cube = SubgroupBasis::new(2, vec![wd(&[1, 1, 1]), wd(&[2])]).unwrap();
        assert!(!qp_oracle(&cube, 3).unwrap());
        assert!(qp_oracle(&cube, 5).unwrap());
    }

    #[test]
    fn oracle_single_alpha_matches_full_alpha_sweep() {
        let wd = |letters: &[i32]| Word::reduce(2, letters).unwrap();
        let bases = vec![
            SubgroupBasis::full_group(2).unwrap(),
            SubgroupBasis::new(2, vec![wd(&[1]), wd(&[2, 2])]).unwrap(),
            SubgroupBasis::new(2, vec![wd(&[1, 2]), wd(&[2, 1])]).unwrap(),
            SubgroupBasis::new(2, vec![wd(&[1]), wd(&[2, 1, -2, -1, 2])]).unwrap(),
        ];
        for basis in &bases {
            for p in [3u64, 5, 7] {
                assert_eq!(
                    qp_oracle(basis, p).unwrap(),
                    qp_oracle_all_alpha(basis, p).unwrap(),
                    "p={p}"
                );
            }
        }
    }
}
