//! The monoid ring `R = Z[a1^±1, ..., ad^±1, b1, ..., b_{d-1}]` and its
//! extension by three auxiliary indeterminates `g1, g2, g3`.
//!
//! A single polynomial type carries all `2d + 2` exponent slots; membership
//! in the plain ring is simply the property that every gamma exponent is
//! zero. The alpha variables admit negative exponents, the beta and gamma
//! variables do not. Coefficients are arbitrary-precision integers and the
//! term map is kept canonical: no zero coefficients, one entry per monomial,
//! sorted under graded reverse lexicographic comparison.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LaurentError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("variable index {index} out of range for rank {rank}")]
    VarOutOfRange { index: usize, rank: usize },
    #[error("beta and gamma exponents must be nonnegative")]
    NegativeExponent,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("alpha value 0 mod p meets a negative exponent")]
    ZeroAlphaWithInverse,
    #[error("evaluation point has wrong arity")]
    BadAssignment,
}

/// Exponent vector of one monomial, laid out as
/// `[alpha_1..alpha_d, beta_1..beta_{d-1}, gamma_1..gamma_3]`.
/// Alpha exponents may be negative; the rest are nonnegative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<i32>,
}

impl Monomial {
    pub fn one(rank: usize) -> Monomial {
        Monomial {
            exps: vec![0; 2 * rank + 2],
        }
    }

    pub fn new(alpha: &[i32], beta: &[i32], gamma: &[i32]) -> Result<Monomial, LaurentError> {
        let d = alpha.len();
        if d == 0 || beta.len() != d - 1 || gamma.len() != 3 {
            return Err(LaurentError::BadAssignment);
        }
        if beta.iter().chain(gamma).any(|&e| e < 0) {
            return Err(LaurentError::NegativeExponent);
        }
        let mut exps = Vec::with_capacity(2 * d + 2);
        exps.extend_from_slice(alpha);
        exps.extend_from_slice(beta);
        exps.extend_from_slice(gamma);
        Ok(Monomial { exps })
    }

    pub fn rank(&self) -> usize {
        (self.exps.len() - 2) / 2
    }

    pub fn alpha_exps(&self) -> &[i32] {
        &self.exps[..self.rank()]
    }

    pub fn beta_exps(&self) -> &[i32] {
        let d = self.rank();
        &self.exps[d..2 * d - 1]
    }

    pub fn gamma_exps(&self) -> &[i32] {
        let d = self.rank();
        &self.exps[2 * d - 1..]
    }

    pub fn exps(&self) -> &[i32] {
        &self.exps
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn has_gamma(&self) -> bool {
        self.gamma_exps().iter().any(|&e| e != 0)
    }

    pub fn has_negative_alpha(&self) -> bool {
        self.alpha_exps().iter().any(|&e| e < 0)
    }

    pub fn total_degree(&self) -> i64 {
        self.exps.iter().map(|&e| e as i64).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Quotient monomial, if the beta and gamma exponents stay nonnegative.
    /// Alpha exponents are free to go negative.
    pub fn try_div(&self, other: &Monomial) -> Option<Monomial> {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        let d = self.rank();
        let mut exps = Vec::with_capacity(self.exps.len());
        for (i, (a, b)) in self.exps.iter().zip(&other.exps).enumerate() {
            let e = a - b;
            if i >= d && e < 0 {
                return None;
            }
            exps.push(e);
        }
        Some(Monomial { exps })
    }

    /// Quotient under the convention of an ordinary polynomial ring: every
    /// exponent, alpha included, must stay nonnegative.
    pub fn try_div_nonneg(&self, other: &Monomial) -> Option<Monomial> {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        let mut exps = Vec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(&other.exps) {
            let e = a - b;
            if e < 0 {
                return None;
            }
            exps.push(e);
        }
        Some(Monomial { exps })
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| *a.max(b))
                .collect(),
        }
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.exps
            .iter()
            .zip(&other.exps)
            .all(|(a, b)| *a == 0 || *b == 0)
    }
}

/// Graded reverse lexicographic comparison; this is also the canonical
/// storage order for polynomial terms.
impl Ord for Monomial {
    fn cmp(&self, other: &Monomial) -> Ordering {
        grevlex(self, other)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Monomial) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn grevlex(a: &Monomial, b: &Monomial) -> Ordering {
    debug_assert_eq!(a.exps.len(), b.exps.len());
    match a.total_degree().cmp(&b.total_degree()) {
        Ordering::Equal => {}
        ord => return ord,
    }
    for i in (0..a.exps.len()).rev() {
        match a.exps[i].cmp(&b.exps[i]) {
            Ordering::Equal => continue,
            // Rightmost difference: the smaller exponent wins under grevlex.
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
        }
    }
    Ordering::Equal
}

fn lex(a: &Monomial, b: &Monomial) -> Ordering {
    debug_assert_eq!(a.exps.len(), b.exps.len());
    for i in 0..a.exps.len() {
        match a.exps[i].cmp(&b.exps[i]) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}

/// Monomial orders available to the Gröbner machinery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonomialOrder {
    GrevLex,
    Lex,
}

impl MonomialOrder {
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            MonomialOrder::GrevLex => grevlex(a, b),
            MonomialOrder::Lex => lex(a, b),
        }
    }
}

impl fmt::Display for MonomialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonomialOrder::GrevLex => write!(f, "grevlex"),
            MonomialOrder::Lex => write!(f, "lex"),
        }
    }
}

/// Element of the Laurent ring with integer coefficients, in canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    rank: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl LaurentPoly {
    pub fn zero(rank: usize) -> LaurentPoly {
        LaurentPoly {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(rank: usize, c: impl Into<BigInt>) -> LaurentPoly {
        let mut p = LaurentPoly::zero(rank);
        p.add_term(Monomial::one(rank), c.into());
        p
    }

    pub fn one(rank: usize) -> LaurentPoly {
        LaurentPoly::constant(rank, 1)
    }

    /// The variable `alpha_i^exp`, `i` in `1..=d`. `exp` may be negative.
    pub fn alpha(rank: usize, i: usize, exp: i32) -> Result<LaurentPoly, LaurentError> {
        if i == 0 || i > rank {
            return Err(LaurentError::VarOutOfRange {
                index: i,
                rank,
            });
        }
        let mut exps = vec![0i32; 2 * rank + 2];
        exps[i - 1] = exp;
        let mut p = LaurentPoly::zero(rank);
        p.add_term(Monomial { exps }, BigInt::one());
        Ok(p)
    }

    /// The variable `beta_j`, `j` in `1..=d-1`.
    pub fn beta(rank: usize, j: usize) -> Result<LaurentPoly, LaurentError> {
        if j == 0 || j + 1 > rank {
            return Err(LaurentError::VarOutOfRange {
                index: j,
                rank,
            });
        }
        let mut exps = vec![0i32; 2 * rank + 2];
        exps[rank + j - 1] = 1;
        let mut p = LaurentPoly::zero(rank);
        p.add_term(Monomial { exps }, BigInt::one());
        Ok(p)
    }

    /// The variable `gamma_k`, `k` in `1..=3`.
    pub fn gamma(rank: usize, k: usize) -> Result<LaurentPoly, LaurentError> {
        if k == 0 || k > 3 {
            return Err(LaurentError::VarOutOfRange {
                index: k,
                rank,
            });
        }
        let mut exps = vec![0i32; 2 * rank + 2];
        exps[2 * rank - 1 + k - 1] = 1;
        let mut p = LaurentPoly::zero(rank);
        p.add_term(Monomial { exps }, BigInt::one());
        Ok(p)
    }

    pub fn from_terms(
        rank: usize,
        terms: impl IntoIterator<Item = (Monomial, BigInt)>,
    ) -> Result<LaurentPoly, LaurentError> {
        let mut p = LaurentPoly::zero(rank);
        for (m, c) in terms {
            if m.rank() != rank {
                return Err(LaurentError::RankMismatch(rank, m.rank()));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    /// The constant value if the polynomial is constant (including zero).
    pub fn as_constant(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn has_gamma(&self) -> bool {
        self.terms.keys().any(Monomial::has_gamma)
    }

    pub fn has_negative_alpha(&self) -> bool {
        self.terms.keys().any(Monomial::has_negative_alpha)
    }

    /// Leading term under the canonical grevlex order.
    pub fn leading(&self) -> Option<(&Monomial, &BigInt)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    fn check_rank(&self, other: &LaurentPoly) -> Result<(), LaurentError> {
        if self.rank != other.rank {
            return Err(LaurentError::RankMismatch(self.rank, other.rank));
        }
        Ok(())
    }

    pub fn add(&self, other: &LaurentPoly) -> Result<LaurentPoly, LaurentError> {
        self.check_rank(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &LaurentPoly) -> Result<LaurentPoly, LaurentError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &LaurentPoly) -> Result<LaurentPoly, LaurentError> {
        self.check_rank(other)?;
        let mut out = LaurentPoly::zero(self.rank);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &BigInt) -> LaurentPoly {
        debug_assert_eq!(m.rank(), self.rank);
        let mut out = LaurentPoly::zero(self.rank);
        for (m1, c1) in &self.terms {
            out.add_term(m1.mul(m), c1 * c);
        }
        out
    }

    /// Divides every term by `m`, which must divide exactly (beta and gamma
    /// exponents stay nonnegative; alpha exponents may go negative).
    pub fn div_monomial(&self, m: &Monomial) -> Result<LaurentPoly, LaurentError> {
        let mut out = LaurentPoly::zero(self.rank);
        for (m1, c1) in &self.terms {
            let q = m1.try_div(m).ok_or(LaurentError::NegativeExponent)?;
            out.add_term(q, c1.clone());
        }
        Ok(out)
    }

    /// Exact division for polynomials with all exponents nonnegative.
    /// Returns `None` if the division is not exact. Inputs with negative
    /// alpha exponents are rejected as `None`; callers clear those first.
    pub fn div_exact(&self, divisor: &LaurentPoly) -> Option<LaurentPoly> {
        if divisor.is_zero() {
            return None;
        }
        if self.has_negative_alpha() || divisor.has_negative_alpha() {
            return None;
        }
        let mut rem = self.clone();
        let mut quot = LaurentPoly::zero(self.rank);
        let (dm, dc) = divisor.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.try_div_nonneg(&dm)?;
            let (qc, r) = rc.div_rem(&dc);
            if !r.is_zero() {
                return None;
            }
            let piece = divisor.mul_monomial(&qm, &qc);
            rem = rem.sub(&piece).expect("same rank");
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Divides out the alpha-monomial content, so that every alpha variable
    /// has minimum exponent zero across the terms. The beta and gamma
    /// exponents are untouched.
    pub fn alpha_primitive(&self) -> LaurentPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mins = self.min_alpha_exponent();
        if mins.iter().all(|&e| e == 0) {
            return self.clone();
        }
        let mono = Monomial::new(&mins, &vec![0; self.rank - 1], &[0, 0, 0])
            .expect("alpha-only monomial");
        self.div_monomial(&mono)
            .expect("monomial content divides every term")
    }

    /// Componentwise minimum of the alpha exponents over all terms; the zero
    /// polynomial yields the all-zero vector.
    pub fn min_alpha_exponent(&self) -> Vec<i32> {
        let mut out = vec![0i32; self.rank];
        let mut first = true;
        for m in self.terms.keys() {
            let a = m.alpha_exps();
            if first {
                out.copy_from_slice(a);
                first = false;
            } else {
                for (o, &e) in out.iter_mut().zip(a) {
                    *o = (*o).min(e);
                }
            }
        }
        out
    }

    /// Image under the ring homomorphism to `Z/pZ` fixed by the given values
    /// for the alpha, beta, and gamma variables. Negative alpha exponents
    /// evaluate through the modular inverse, so the corresponding alpha
    /// value must be nonzero.
    pub fn eval_mod_p(
        &self,
        p: u64,
        alpha: &[u64],
        beta: &[u64],
        gamma: &[u64],
    ) -> Result<u64, LaurentError> {
        if !arith::is_prime_u64(p) {
            return Err(LaurentError::NotPrime(p));
        }
        if alpha.len() != self.rank || beta.len() != self.rank - 1 || gamma.len() != 3 {
            return Err(LaurentError::BadAssignment);
        }
        let mut acc = 0u64;
        for (m, c) in &self.terms {
            let mut t = coef_mod(c, p);
            for (vals, exps) in [
                (alpha, m.alpha_exps()),
                (beta, m.beta_exps()),
                (gamma, m.gamma_exps()),
            ] {
                for (&v, &e) in vals.iter().zip(exps) {
                    if e == 0 {
                        continue;
                    }
                    let v = v % p;
                    let base = if e > 0 {
                        v
                    } else {
                        if v == 0 {
                            return Err(LaurentError::ZeroAlphaWithInverse);
                        }
                        arith::inv_mod_prime(v, p)
                    };
                    t = arith::mul_mod(t, arith::pow_mod(base, e.unsigned_abs() as u64, p), p);
                }
            }
            acc = (acc + t) % p;
        }
        Ok(acc)
    }
}

pub(crate) fn coef_mod(c: &BigInt, p: u64) -> u64 {
    let m = BigInt::from(p);
    let r = c.mod_floor(&m);
    let (_, digits) = r.to_u64_digits();
    digits.first().copied().unwrap_or(0)
}

fn var_name(rank: usize, slot: usize) -> String {
    if slot < rank {
        format!("a{}", slot + 1)
    } else if slot < 2 * rank - 1 {
        format!("b{}", slot - rank + 1)
    } else {
        format!("g{}", slot - (2 * rank - 1) + 1)
    }
}

/// Deterministic textual form: terms in descending grevlex order, each as
/// `coef*var^exp*...`, joined by ` + `. Negative coefficients keep their
/// sign, so the output splits back apart on `+` at the top level.
impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if m.is_one() {
                write!(f, "{c}")?;
                continue;
            }
            write!(f, "{c}")?;
            for (slot, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                write!(f, "*{}", var_name(self.rank, slot))?;
                if e != 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Parses the textual polynomial format. Accepts both the canonical output
/// of [`LaurentPoly::fmt`] and hand-written forms such as `a1^2 - 2*b1 + 1`;
/// `*` between factors is optional.
pub fn parse_poly(rank: usize, text: &str) -> Result<LaurentPoly, LaurentError> {
    let mut out = LaurentPoly::zero(rank);
    let mut chars = text.chars().peekable();
    let mut sign = BigInt::one();
    // Coefficient and exponent vector of the term being accumulated.
    let mut term: Option<(BigInt, Vec<i32>)> = None;

    macro_rules! flush {
        () => {
            if let Some((coef, exps)) = term.take() {
                out.add_term(Monomial { exps }, &sign * coef);
            }
        };
    }
    macro_rules! current {
        () => {
            term.get_or_insert_with(|| (BigInt::one(), vec![0i32; 2 * rank + 2]))
        };
    }

    while let Some(&ch) = chars.peek() {
        match ch {
            ' ' | '\t' | '*' => {
                chars.next();
            }
            '+' | '-' => {
                chars.next();
                flush!();
                sign = if ch == '-' { -BigInt::one() } else { BigInt::one() };
            }
            '0'..='9' => {
                let mut num = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_digit() {
                        num.push(c2);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let n: BigInt = num.parse().expect("digits");
                current!().0 *= n;
            }
            'a' | 'b' | 'g' => {
                chars.next();
                let mut num = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_digit() {
                        num.push(c2);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let idx: usize = num.parse().map_err(|_| LaurentError::BadAssignment)?;
                let slot = match ch {
                    'a' if idx >= 1 && idx <= rank => idx - 1,
                    'b' if idx >= 1 && idx + 1 <= rank => rank + idx - 1,
                    'g' if (1..=3).contains(&idx) => 2 * rank - 1 + idx - 1,
                    _ => {
                        return Err(LaurentError::VarOutOfRange { index: idx, rank });
                    }
                };
                let mut exp = 1i32;
                if chars.peek() == Some(&'^') {
                    chars.next();
                    let mut s = String::new();
                    if chars.peek() == Some(&'-') {
                        s.push('-');
                        chars.next();
                    }
                    while let Some(&c2) = chars.peek() {
                        if c2.is_ascii_digit() {
                            s.push(c2);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    exp = s.parse().map_err(|_| LaurentError::BadAssignment)?;
                }
                if exp < 0 && slot >= rank {
                    return Err(LaurentError::NegativeExponent);
                }
                current!().1[slot] += exp;
            }
            _ => return Err(LaurentError::BadAssignment),
        }
    }
    flush!();
    Ok(out)
}
