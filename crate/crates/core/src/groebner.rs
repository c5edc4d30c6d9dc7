//! Reduced Gröbner bases over the rationals and integer certificates
//! `Σ f_i ℓ_i = a` for systems with empty complex variety.
//!
//! The basis computation is Buchberger's algorithm with the coprime-pair
//! criterion, normal pair selection by lcm degree with index tie-break, and
//! a final inter-reduction with monic normalization, so the output for a
//! fixed order is the unique reduced basis. Internally every polynomial is
//! kept with integer coefficients: reductions cross-scale by leading
//! coefficients and strip the content afterwards, which avoids rational
//! normalization in the hot loop. Monomials pack into a single `u128` for
//! up to eight variables, with a vector fallback above that.
//!
//! Certificates come from the same loop with cofactor tracking: every
//! S-polynomial and reduction step updates an expression of the working
//! polynomial in terms of the input system, scaled identically on both
//! sides, and the first nonzero constant encountered yields the identity.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::laurent::{LaurentPoly, Monomial, MonomialOrder};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroebnerError {
    #[error("input system must be nonempty and not all zero")]
    EmptyInput,
    #[error("input polynomials must have nonnegative exponents")]
    NegativeExponent,
    #[error("rank mismatch across input polynomials")]
    RankMismatch,
    #[error("step limit of {0} exceeded")]
    StepLimit(usize),
    #[error("certificate requested for a system with nonempty variety")]
    VarietyNonempty,
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

/// Polynomial with rational coefficients and nonnegative exponents, in
/// canonical sorted form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    rank: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl RatPoly {
    pub fn zero(rank: usize) -> RatPoly {
        RatPoly {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_laurent(p: &LaurentPoly) -> Result<RatPoly, GroebnerError> {
        if p.has_negative_alpha() {
            return Err(GroebnerError::NegativeExponent);
        }
        let mut terms = BTreeMap::new();
        for (m, c) in p.terms() {
            terms.insert(m.clone(), BigRational::from_integer(c.clone()));
        }
        Ok(RatPoly {
            rank: p.rank(),
            terms,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
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

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

}

impl fmt::Display for RatPoly {
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
            write!(f, "{c}")?;
            for (slot, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let d = self.rank;
                let name = if slot < d {
                    format!("a{}", slot + 1)
                } else if slot < 2 * d - 1 {
                    format!("b{}", slot - d + 1)
                } else {
                    format!("g{}", slot - (2 * d - 1) + 1)
                };
                write!(f, "*{name}")?;
                if e != 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Monomial key abstraction for the engine; packed and vector forms share
/// the algorithm.
trait EngineMono: Clone + Eq + Hash {
    fn from_monomial(m: &Monomial) -> Self;
    fn to_monomial(&self, rank: usize) -> Monomial;
    fn mul(&self, o: &Self) -> Self;
    fn try_div(&self, o: &Self) -> Option<Self>;
    fn lcm(&self, o: &Self) -> Self;
    fn coprime(&self, o: &Self) -> bool;
    fn degree(&self) -> u64;
    fn is_one(&self) -> bool;
    fn cmp_order(&self, o: &Self, order: MonomialOrder) -> Ordering;
}

/// Up to eight exponents in 16-bit fields of one `u128`; variable 0 sits in
/// the highest field so that plain integer comparison is lexicographic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Packed {
    bits: u128,
    nvars: u8,
    degree: u32,
}

const FIELD: u32 = 16;

impl Packed {
    #[inline]
    fn field(&self, i: usize) -> u16 {
        (self.bits >> ((self.nvars as usize - 1 - i) as u32 * FIELD)) as u16
    }
}

impl EngineMono for Packed {
    fn from_monomial(m: &Monomial) -> Packed {
        let exps = m.exps();
        let nvars = exps.len() as u8;
        debug_assert!(nvars as usize <= 8);
        let mut bits = 0u128;
        let mut degree = 0u32;
        for &e in exps {
            assert!((0..1 << 15).contains(&e), "exponent out of packed range");
            bits = (bits << FIELD) | e as u128;
            degree += e as u32;
        }
        Packed {
            bits,
            nvars,
            degree,
        }
    }

    fn to_monomial(&self, rank: usize) -> Monomial {
        let n = self.nvars as usize;
        debug_assert_eq!(n, 2 * rank + 2);
        let exps: Vec<i32> = (0..n).map(|i| self.field(i) as i32).collect();
        Monomial::new(&exps[..rank], &exps[rank..2 * rank - 1], &exps[2 * rank - 1..])
            .expect("packed exponents are nonnegative")
    }

    #[inline]
    fn mul(&self, o: &Packed) -> Packed {
        // Fields cannot carry: each exponent stays below 2^15.
        debug_assert!((0..self.nvars as usize)
            .all(|i| (self.field(i) as u32 + o.field(i) as u32) < (1 << 15)));
        Packed {
            bits: self.bits + o.bits,
            nvars: self.nvars,
            degree: self.degree + o.degree,
        }
    }

    #[inline]
    fn try_div(&self, o: &Packed) -> Option<Packed> {
        for i in 0..self.nvars as usize {
            if self.field(i) < o.field(i) {
                return None;
            }
        }
        Some(Packed {
            bits: self.bits - o.bits,
            nvars: self.nvars,
            degree: self.degree - o.degree,
        })
    }

    fn lcm(&self, o: &Packed) -> Packed {
        let mut bits = 0u128;
        let mut degree = 0u32;
        for i in 0..self.nvars as usize {
            let e = self.field(i).max(o.field(i));
            bits = (bits << FIELD) | e as u128;
            degree += e as u32;
        }
        Packed {
            bits,
            nvars: self.nvars,
            degree,
        }
    }

    fn coprime(&self, o: &Packed) -> bool {
        (0..self.nvars as usize).all(|i| self.field(i) == 0 || o.field(i) == 0)
    }

    #[inline]
    fn degree(&self) -> u64 {
        self.degree as u64
    }

    #[inline]
    fn is_one(&self) -> bool {
        self.bits == 0
    }

    #[inline]
    fn cmp_order(&self, o: &Packed, order: MonomialOrder) -> Ordering {
        match order {
            MonomialOrder::Lex => self.bits.cmp(&o.bits),
            MonomialOrder::GrevLex => match self.degree.cmp(&o.degree) {
                Ordering::Equal => {
                    if self.bits == o.bits {
                        return Ordering::Equal;
                    }
                    // Rightmost (lowest) differing field: smaller wins.
                    let diff = self.bits ^ o.bits;
                    let k = (diff.trailing_zeros() / FIELD) as usize;
                    let idx = self.nvars as usize - 1 - k;
                    o.field(idx).cmp(&self.field(idx))
                }
                ord => ord,
            },
        }
    }
}

impl EngineMono for Monomial {
    fn from_monomial(m: &Monomial) -> Monomial {
        m.clone()
    }

    fn to_monomial(&self, _rank: usize) -> Monomial {
        self.clone()
    }

    fn mul(&self, o: &Monomial) -> Monomial {
        Monomial::mul(self, o)
    }

    fn try_div(&self, o: &Monomial) -> Option<Monomial> {
        self.try_div_nonneg(o)
    }

    fn lcm(&self, o: &Monomial) -> Monomial {
        Monomial::lcm(self, o)
    }

    fn coprime(&self, o: &Monomial) -> bool {
        Monomial::coprime(self, o)
    }

    fn degree(&self) -> u64 {
        self.total_degree().max(0) as u64
    }

    fn is_one(&self) -> bool {
        Monomial::is_one(self)
    }

    fn cmp_order(&self, o: &Monomial, order: MonomialOrder) -> Ordering {
        order.cmp(self, o)
    }
}


/// Compile-time order selection so the accumulator map can carry the
/// comparison in its key type.
trait OrderSpec: 'static {
    const ORDER: MonomialOrder;
}

struct GrevLexSpec;
struct LexSpec;

impl OrderSpec for GrevLexSpec {
    const ORDER: MonomialOrder = MonomialOrder::GrevLex;
}

impl OrderSpec for LexSpec {
    const ORDER: MonomialOrder = MonomialOrder::Lex;
}

/// Rational polynomial as a term list strictly descending under the active
/// order. Stored basis elements are monic, so reduction never rescales the
/// working polynomial.
type Terms<M> = Vec<(M, BigRational)>;

/// Working polynomial with an expression in terms of the input system:
/// `poly = Σ cof[j] * input[j]` holds at every step.
#[derive(Debug, Clone)]
struct Tracked<M> {
    poly: Terms<M>,
    cof: Vec<Terms<M>>,
}

impl<M: EngineMono> Tracked<M> {
    fn is_constant_one(&self) -> bool {
        self.poly.len() == 1 && self.poly[0].0.is_one()
    }
}

struct Key<M, O>(M, std::marker::PhantomData<O>);

impl<M: EngineMono, O: OrderSpec> Clone for Key<M, O> {
    fn clone(&self) -> Self {
        Key(self.0.clone(), std::marker::PhantomData)
    }
}

impl<M: EngineMono, O: OrderSpec> Key<M, O> {
    fn new(m: M) -> Key<M, O> {
        Key(m, std::marker::PhantomData)
    }
}

impl<M: EngineMono, O: OrderSpec> PartialEq for Key<M, O> {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl<M: EngineMono, O: OrderSpec> Eq for Key<M, O> {}

impl<M: EngineMono, O: OrderSpec> PartialOrd for Key<M, O> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<M: EngineMono, O: OrderSpec> Ord for Key<M, O> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_order(&other.0, O::ORDER)
    }
}

/// Sparse accumulator keyed by monomial in the active order. One head
/// reduction against a monic basis element touches only that element's
/// terms, never the rest of the working polynomial.
struct Accum<M: EngineMono, O: OrderSpec> {
    map: std::collections::BTreeMap<Key<M, O>, BigRational>,
}

impl<M: EngineMono, O: OrderSpec> Accum<M, O> {
    fn new() -> Accum<M, O> {
        Accum {
            map: std::collections::BTreeMap::new(),
        }
    }

    fn from_terms(terms: &[(M, BigRational)]) -> Accum<M, O> {
        let mut acc = Accum::new();
        acc.add_scaled(terms, None, &BigRational::one());
        acc
    }

    /// `self += coef * mono * terms`; `mono` of `None` means 1.
    fn add_scaled(&mut self, terms: &[(M, BigRational)], mono: Option<&M>, coef: &BigRational) {
        for (m, c) in terms {
            let key = match mono {
                Some(q) => m.mul(q),
                None => m.clone(),
            };
            let entry = self
                .map
                .entry(Key::new(key))
                .or_insert_with(BigRational::zero);
            *entry += c * coef;
            if entry.is_zero() {
                // Leave removal to the pop; zero entries are rare.
            }
        }
    }

    /// Largest monomial with a nonzero coefficient.
    fn pop_max(&mut self) -> Option<(M, BigRational)> {
        while let Some((key, coef)) = self.map.pop_last() {
            if !coef.is_zero() {
                return Some((key.0, coef));
            }
        }
        None
    }

    /// Remaining terms in descending order.
    fn into_terms(self) -> Terms<M> {
        self.map
            .into_iter()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k.0, c))
            .collect()
    }
}

/// Rescales the polynomial to its primitive integer form: denominators
/// cleared, content divided out, leading coefficient positive. The
/// cofactors are scaled by the same rational, so the tracked identity is
/// preserved. Keeping stored coefficients as small integers is what holds
/// the intermediate coefficient growth down.
fn normalize_primitive<M: EngineMono>(mut t: Tracked<M>) -> Tracked<M> {
    if t.poly.is_empty() {
        return t;
    }
    let mut denom_lcm = BigInt::one();
    for (_, c) in &t.poly {
        denom_lcm = denom_lcm.lcm(c.denom());
    }
    let mut content = BigInt::zero();
    for (_, c) in &t.poly {
        content = content.gcd(&(c.numer() * (&denom_lcm / c.denom())));
    }
    if (t.poly[0].1.numer() * t.poly[0].1.denom()).sign() == num_bigint::Sign::Minus {
        content = -content;
    }
    let scale = BigRational::new(denom_lcm, content);
    if scale.is_one() {
        return t;
    }
    for (_, c) in t.poly.iter_mut() {
        *c *= &scale;
    }
    for cof in t.cof.iter_mut() {
        for (_, c) in cof.iter_mut() {
            *c *= &scale;
        }
    }
    t
}

/// Core reduction loop: repeatedly pops the largest monomial, cancels it
/// against the best reducer (fewest terms, index tie-break), or moves it to
/// the result if irreducible. Produces the full normal form.
fn reduce_state<M: EngineMono, O: OrderSpec>(
    mut acc: Accum<M, O>,
    mut cof_acc: Vec<Accum<M, O>>,
    basis: &[Tracked<M>],
    top_only: bool,
) -> Tracked<M> {
    let mut out: Terms<M> = Vec::new();
    while let Some((lm, lc)) = acc.pop_max() {
        let mut pick: Option<(usize, M)> = None;
        for (k, g) in basis.iter().enumerate() {
            if let Some(q) = lm.try_div(&g.poly[0].0) {
                match &pick {
                    Some((best, _)) if basis[*best].poly.len() <= g.poly.len() => {}
                    _ => pick = Some((k, q)),
                }
            }
        }
        match pick {
            None => {
                out.push((lm, lc));
                if top_only {
                    // Keep the tail as it stands; cofactor updates stay
                    // proportional to the reduction chain, not to it.
                    out.extend(acc.into_terms());
                    return Tracked {
                        poly: out,
                        cof: cof_acc.into_iter().map(Accum::into_terms).collect(),
                    };
                }
            }
            Some((k, q)) => {
                // The head cancels against the popped term after scaling by
                // the ratio of leading coefficients.
                let g = &basis[k];
                let factor = -(lc / &g.poly[0].1);
                acc.add_scaled(&g.poly[1..], Some(&q), &factor);
                for (ca, gcof) in cof_acc.iter_mut().zip(&g.cof) {
                    ca.add_scaled(gcof, Some(&q), &factor);
                }
            }
        }
    }
    Tracked {
        poly: out,
        cof: cof_acc.into_iter().map(Accum::into_terms).collect(),
    }
}

fn reduce_tracked<M: EngineMono, O: OrderSpec>(t: Tracked<M>, basis: &[Tracked<M>]) -> Tracked<M> {
    let acc = Accum::<M, O>::from_terms(&t.poly);
    let cof_acc = t.cof.iter().map(|c| Accum::from_terms(c)).collect();
    reduce_state(acc, cof_acc, basis, false)
}

struct EngineOutcome<M> {
    basis: Vec<Tracked<M>>,
    /// Index of a constant basis element, if one appeared.
    constant: Option<usize>,
}

/// Pair bookkeeping with the Gebauer-Moeller criteria. Pairs are treated
/// in order of lcm degree with index tie-break. Elements whose leading
/// term becomes divisible by a newer one stop spawning pairs but remain
/// available as reducers.
struct PairQueue<M: EngineMono, O: OrderSpec> {
    pairs: std::collections::BTreeSet<(Key<M, O>, usize, usize)>,
    active: Vec<bool>,
}

impl<M: EngineMono, O: OrderSpec> PairQueue<M, O> {
    fn new() -> PairQueue<M, O> {
        PairQueue {
            pairs: std::collections::BTreeSet::new(),
            active: Vec::new(),
        }
    }

    fn pop(&mut self) -> Option<(usize, usize)> {
        let first = self.pairs.pop_first()?;
        Some((first.1, first.2))
    }

    /// Installs basis element `h`, pruning old pairs by the chain
    /// criterion and new ones by divisibility of lcms, duplicate lcms, and
    /// the coprimality criterion.
    fn install(&mut self, basis: &[Tracked<M>], h: usize) {
        debug_assert_eq!(self.active.len(), h);
        let hm = basis[h].poly[0].0.clone();

        // Chain criterion on queued pairs.
        let stale: Vec<(Key<M, O>, usize, usize)> = self
            .pairs
            .iter()
            .filter(|(_, i, j)| {
                let li = basis[*i].poly[0].0.lcm(&basis[*j].poly[0].0);
                li.try_div(&hm).is_some()
                    && li != basis[*i].poly[0].0.lcm(&hm)
                    && li != basis[*j].poly[0].0.lcm(&hm)
            })
            .cloned()
            .collect();
        for p in stale {
            self.pairs.remove(&p);
        }

        // New pair candidates against the active elements.
        let cands: Vec<(usize, M)> = (0..h)
            .filter(|&i| self.active[i])
            .map(|i| (i, basis[i].poly[0].0.lcm(&hm)))
            .collect();
        // Drop candidates whose lcm another lcm strictly divides.
        let survivors: Vec<&(usize, M)> = cands
            .iter()
            .filter(|(_, li)| {
                !cands
                    .iter()
                    .any(|(_, lj)| lj != li && li.try_div(lj).is_some())
            })
            .collect();
        // One representative per lcm value; a coprime member kills its
        // whole class, as its S-polynomial reduces to zero.
        let mut handled: Vec<&M> = Vec::new();
        for &(i, ref li) in &survivors {
            if handled.iter().any(|m| *m == li) {
                continue;
            }
            handled.push(li);
            let class: Vec<usize> = survivors
                .iter()
                .filter(|(_, lj)| lj == li)
                .map(|(j, _)| *j)
                .collect();
            if class.iter().any(|&j| basis[j].poly[0].0.coprime(&hm)) {
                continue;
            }
            let rep = *class.iter().min().unwrap_or(&i);
            self.pairs.insert((Key::new(li.clone()), rep, h));
        }

        // Retire elements whose head the new one divides.
        for i in 0..h {
            if self.active[i] && basis[i].poly[0].0.try_div(&hm).is_some() {
                self.active[i] = false;
            }
        }
        self.active.push(true);
    }
}

fn run_buchberger<M: EngineMono, O: OrderSpec>(
    inputs: Vec<Tracked<M>>,
    step_limit: usize,
    stop_on_constant: bool,
    top_only: bool,
) -> Result<EngineOutcome<M>, GroebnerError> {
    let mut prepared: Vec<Tracked<M>> = inputs
        .into_iter()
        .filter(|t| !t.poly.is_empty())
        .map(normalize_primitive)
        .collect();
    if prepared.is_empty() {
        return Err(GroebnerError::EmptyInput);
    }
    prepared.sort_by(|a, b| a.poly[0].0.cmp_order(&b.poly[0].0, O::ORDER));

    let mut basis: Vec<Tracked<M>> = Vec::new();
    let mut queue: PairQueue<M, O> = PairQueue::new();
    let mut constant = None;
    for t in prepared {
        if t.is_constant_one() && constant.is_none() {
            constant = Some(basis.len());
        }
        let h = basis.len();
        basis.push(t);
        queue.install(&basis, h);
    }
    if basis.is_empty() {
        return Err(GroebnerError::EmptyInput);
    }
    if stop_on_constant && constant.is_some() {
        return Ok(EngineOutcome { basis, constant });
    }

    let debug = std::env::var("SUDENSE_GB_DEBUG").is_ok();
    let mut steps = 0usize;
    while let Some((i, j)) = queue.pop() {
        steps += 1;
        if debug && steps % 25 == 0 {
            let max_terms = basis.iter().map(|t| t.poly.len()).max().unwrap_or(0);
            let max_bits = basis
                .iter()
                .flat_map(|t| {
                    t.poly
                        .iter()
                        .map(|(_, c)| c.numer().bits().max(c.denom().bits()))
                })
                .max()
                .unwrap_or(0);
            eprintln!(
                "gb step {steps}: basis={} queued={} max_terms={max_terms} max_bits={max_bits}",
                basis.len(),
                queue.pairs.len()
            );
        }
        if steps > step_limit {
            return Err(GroebnerError::StepLimit(step_limit));
        }
        let mi = basis[i].poly[0].0.clone();
        let mj = basis[j].poly[0].0.clone();
        if mi.coprime(&mj) {
            continue;
        }
        let lcm = mi.lcm(&mj);
        let ui = lcm.try_div(&mi).expect("lcm is divisible");
        let uj = lcm.try_div(&mj).expect("lcm is divisible");
        // S = ui * f_i / lc_i - uj * f_j / lc_j.
        let ci = basis[i].poly[0].1.clone().recip();
        let cj = -basis[j].poly[0].1.clone().recip();
        let mut acc = Accum::<M, O>::new();
        acc.add_scaled(&basis[i].poly, Some(&ui), &ci);
        acc.add_scaled(&basis[j].poly, Some(&uj), &cj);
        let m = basis[i].cof.len();
        let mut cof_acc: Vec<Accum<M, O>> = (0..m).map(|_| Accum::new()).collect();
        for ((ca, fi), fj) in cof_acc.iter_mut().zip(&basis[i].cof).zip(&basis[j].cof) {
            ca.add_scaled(fi, Some(&ui), &ci);
            ca.add_scaled(fj, Some(&uj), &cj);
        }
        let reduced = reduce_state(acc, cof_acc, &basis, top_only);
        if reduced.poly.is_empty() {
            continue;
        }
        let reduced = normalize_primitive(reduced);
        let new_index = basis.len();
        let is_const = reduced.is_constant_one();
        basis.push(reduced);
        queue.install(&basis, new_index);
        if is_const {
            if constant.is_none() {
                constant = Some(new_index);
            }
            if stop_on_constant {
                return Ok(EngineOutcome { basis, constant });
            }
        }
    }
    Ok(EngineOutcome { basis, constant })
}

/// The reduced Gröbner basis: monic generators, none of whose terms is
/// divisible by the leading term of another, sorted by leading monomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroebnerBasis {
    order: MonomialOrder,
    generators: Vec<RatPoly>,
}

impl GroebnerBasis {
    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn generators(&self) -> &[RatPoly] {
        &self.generators
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.generators.len() == 1 && self.generators[0].is_one()
    }

    /// Full normal form of `p` modulo this basis; plain rational division,
    /// which the monic basis keeps tame.
    pub fn normal_form(&self, p: &RatPoly) -> RatPoly {
        let mut work: Vec<(Monomial, BigRational)> =
            p.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        work.sort_by(|a, b| self.order.cmp(&b.0, &a.0));
        let mut out: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        'outer: while let Some((lm, lc)) = work.first().cloned() {
            for g in &self.generators {
                let (gm, _) = g.terms.iter().next_back().expect("generators are nonzero");
                if let Some(q) = lm.try_div_nonneg(gm) {
                    // work -= lc * q * g (g is monic).
                    let mut merged: BTreeMap<Monomial, BigRational> = work.drain(..).collect();
                    for (m, c) in &g.terms {
                        let key = m.mul(&q);
                        let delta = c * &lc;
                        let entry = merged.entry(key).or_insert_with(BigRational::zero);
                        *entry -= delta;
                    }
                    merged.retain(|_, c| !c.is_zero());
                    work = merged.into_iter().collect();
                    work.sort_by(|a, b| self.order.cmp(&b.0, &a.0));
                    continue 'outer;
                }
            }
            out.insert(lm, lc);
            work.remove(0);
        }
        RatPoly {
            rank: p.rank,
            terms: out,
        }
    }
}

fn check_inputs(j: &[RatPoly]) -> Result<usize, GroebnerError> {
    if j.is_empty() || j.iter().all(RatPoly::is_zero) {
        return Err(GroebnerError::EmptyInput);
    }
    let rank = j[0].rank();
    if j.iter().any(|p| p.rank() != rank) {
        return Err(GroebnerError::RankMismatch);
    }
    Ok(rank)
}

fn to_engine_terms<M: EngineMono>(p: &RatPoly, order: MonomialOrder) -> Terms<M> {
    let mut out: Terms<M> = p
        .terms
        .iter()
        .map(|(m, c)| (M::from_monomial(m), c.clone()))
        .collect();
    out.sort_by(|a, b| b.0.cmp_order(&a.0, order));
    out
}

pub const DEFAULT_STEP_LIMIT: usize = 1_000_000;

/// Reduced Gröbner basis of the ideal generated by `j`.
pub fn groebner_reduce(j: &[RatPoly]) -> Result<GroebnerBasis, GroebnerError> {
    groebner_reduce_with(j, MonomialOrder::GrevLex, DEFAULT_STEP_LIMIT)
}

pub fn groebner_reduce_with(
    j: &[RatPoly],
    order: MonomialOrder,
    step_limit: usize,
) -> Result<GroebnerBasis, GroebnerError> {
    let rank = check_inputs(j)?;
    match (2 * rank + 2 <= 8, order) {
        (true, MonomialOrder::GrevLex) => reduce_impl::<Packed, GrevLexSpec>(j, rank, step_limit),
        (true, MonomialOrder::Lex) => reduce_impl::<Packed, LexSpec>(j, rank, step_limit),
        (false, MonomialOrder::GrevLex) => {
            reduce_impl::<Monomial, GrevLexSpec>(j, rank, step_limit)
        }
        (false, MonomialOrder::Lex) => reduce_impl::<Monomial, LexSpec>(j, rank, step_limit),
    }
}

fn reduce_impl<M: EngineMono, O: OrderSpec>(
    j: &[RatPoly],
    rank: usize,
    step_limit: usize,
) -> Result<GroebnerBasis, GroebnerError> {
    let order = O::ORDER;
    let inputs: Vec<Tracked<M>> = j
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| Tracked {
            poly: to_engine_terms(p, order),
            cof: Vec::new(),
        })
        .collect();
    let outcome = run_buchberger::<M, O>(inputs, step_limit, false, false)?;
    let mut polys: Vec<Terms<M>> = outcome.basis.into_iter().map(|t| t.poly).collect();

    // Minimal basis: drop any generator whose leading term another divides.
    polys.sort_by(|a, b| a[0].0.cmp_order(&b[0].0, order));
    let mut minimal: Vec<Terms<M>> = Vec::new();
    for p in polys {
        if !minimal
            .iter()
            .any(|q: &Terms<M>| p[0].0.try_div(&q[0].0).is_some())
        {
            minimal.push(p);
        }
    }

    // Inter-reduce tails; leading terms are pairwise indivisible already.
    let tracked: Vec<Tracked<M>> = minimal
        .iter()
        .map(|p| Tracked {
            poly: p.clone(),
            cof: Vec::new(),
        })
        .collect();
    let mut reduced: Vec<Terms<M>> = Vec::new();
    for (idx, p) in minimal.iter().enumerate() {
        let others: Vec<Tracked<M>> = tracked
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != idx)
            .map(|(_, t)| t.clone())
            .collect();
        let nf = reduce_tracked::<M, O>(
            Tracked {
                poly: p.clone(),
                cof: Vec::new(),
            },
            &others,
        );
        reduced.push(normalize_primitive(nf).poly);
    }
    reduced.sort_by(|a, b| a[0].0.cmp_order(&b[0].0, order));

    let generators = reduced
        .into_iter()
        .map(|terms| {
            let lc = terms[0].1.clone();
            let map: BTreeMap<Monomial, BigRational> = terms
                .into_iter()
                .map(|(m, c)| (m.to_monomial(rank), c / &lc))
                .collect();
            RatPoly { rank, terms: map }
        })
        .collect();
    Ok(GroebnerBasis { order, generators })
}

/// Is the complex variety of `j` empty? Equivalent to the reduced basis
/// being `{1}`; the run stops as soon as a constant enters the working
/// basis, since that already settles the question.
pub fn variety_empty(j: &[RatPoly]) -> Result<bool, GroebnerError> {
    variety_empty_with(j, MonomialOrder::GrevLex, DEFAULT_STEP_LIMIT)
}

pub fn variety_empty_with(
    j: &[RatPoly],
    order: MonomialOrder,
    step_limit: usize,
) -> Result<bool, GroebnerError> {
    let rank = check_inputs(j)?;
    match (2 * rank + 2 <= 8, order) {
        (true, MonomialOrder::GrevLex) => variety_impl::<Packed, GrevLexSpec>(j, step_limit),
        (true, MonomialOrder::Lex) => variety_impl::<Packed, LexSpec>(j, step_limit),
        (false, MonomialOrder::GrevLex) => variety_impl::<Monomial, GrevLexSpec>(j, step_limit),
        (false, MonomialOrder::Lex) => variety_impl::<Monomial, LexSpec>(j, step_limit),
    }
}

fn variety_impl<M: EngineMono, O: OrderSpec>(
    j: &[RatPoly],
    step_limit: usize,
) -> Result<bool, GroebnerError> {
    let inputs: Vec<Tracked<M>> = j
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| Tracked {
            poly: to_engine_terms(p, O::ORDER),
            cof: Vec::new(),
        })
        .collect();
    let outcome = run_buchberger::<M, O>(inputs, step_limit, true, false)?;
    Ok(outcome.constant.is_some())
}

/// Integer certificate `Σ f_i ℓ_i = a` with `a >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NullCertificate {
    pub a: BigInt,
    pub cofactors: Vec<LaurentPoly>,
}

impl NullCertificate {
    /// Recomputes the identity against the source system.
    pub fn verify(&self, j: &[LaurentPoly]) -> bool {
        if j.len() != self.cofactors.len() || j.is_empty() {
            return false;
        }
        let rank = j[0].rank();
        let mut acc = LaurentPoly::zero(rank);
        for (f, l) in j.iter().zip(&self.cofactors) {
            let Ok(prod) = f.mul(l) else { return false };
            let Ok(sum) = acc.add(&prod) else { return false };
            acc = sum;
        }
        acc.as_constant() == Some(self.a.clone())
    }
}

/// Certificate for a system already known to have empty variety: runs the
/// tracked loop until a constant appears, expresses 1 in terms of the
/// inputs, clears denominators, and divides out the common content of the
/// resulting identity.
pub fn null_certificate(
    j: &[LaurentPoly],
    order: MonomialOrder,
    step_limit: usize,
) -> Result<NullCertificate, GroebnerError> {
    let rat: Vec<RatPoly> = j
        .iter()
        .map(RatPoly::from_laurent)
        .collect::<Result<_, _>>()?;
    let rank = check_inputs(&rat)?;
    match (2 * rank + 2 <= 8, order) {
        (true, MonomialOrder::GrevLex) => {
            certificate_impl::<Packed, GrevLexSpec>(j, &rat, rank, step_limit)
        }
        (true, MonomialOrder::Lex) => certificate_impl::<Packed, LexSpec>(j, &rat, rank, step_limit),
        (false, MonomialOrder::GrevLex) => {
            certificate_impl::<Monomial, GrevLexSpec>(j, &rat, rank, step_limit)
        }
        (false, MonomialOrder::Lex) => {
            certificate_impl::<Monomial, LexSpec>(j, &rat, rank, step_limit)
        }
    }
}

fn certificate_impl<M: EngineMono, O: OrderSpec>(
    j: &[LaurentPoly],
    rat: &[RatPoly],
    rank: usize,
    step_limit: usize,
) -> Result<NullCertificate, GroebnerError> {
    let m = j.len();
    let inputs: Vec<Tracked<M>> = rat
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(idx, p)| {
            let mut cof = vec![Vec::new(); m];
            cof[idx] = vec![(M::from_monomial(&Monomial::one(rank)), BigRational::one())];
            Tracked {
                poly: to_engine_terms(p, O::ORDER),
                cof,
            }
        })
        .collect();
    let outcome = run_buchberger::<M, O>(inputs, step_limit, true, false)?;
    let Some(idx) = outcome.constant else {
        return Err(GroebnerError::VarietyNonempty);
    };
    // The constant element is monic, so its cofactors already express 1.
    let hit = &outcome.basis[idx];
    debug_assert!(hit.is_constant_one() && hit.poly[0].1.is_one());

    let mut denom_lcm = BigInt::one();
    for cof in &hit.cof {
        for (_, c) in cof {
            denom_lcm = denom_lcm.lcm(c.denom());
        }
    }
    let factor = BigRational::from_integer(denom_lcm.clone());
    let mut a = denom_lcm;
    let mut content = a.clone();
    let mut cofactors: Vec<LaurentPoly> = Vec::with_capacity(m);
    for cof in &hit.cof {
        let terms: Vec<(Monomial, BigInt)> = cof
            .iter()
            .map(|(mo, c)| {
                let v = c * &factor;
                debug_assert!(v.denom().is_one());
                (mo.to_monomial(rank), v.numer().clone())
            })
            .collect();
        for (_, c) in &terms {
            content = content.gcd(c);
        }
        cofactors.push(
            LaurentPoly::from_terms(rank, terms)
                .map_err(|e| GroebnerError::Internal(e.to_string()))?,
        );
    }
    if content > BigInt::one() {
        a = &a / &content;
        cofactors = cofactors
            .iter()
            .map(|p| {
                let terms: Vec<(Monomial, BigInt)> =
                    p.terms().map(|(mo, c)| (mo.clone(), c / &content)).collect();
                LaurentPoly::from_terms(rank, terms).expect("rank preserved")
            })
            .collect();
    }

    let cert = NullCertificate { a, cofactors };
    if !cert.verify(j) {
        return Err(GroebnerError::Internal(
            "certificate identity failed to verify".into(),
        ));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SplitMix64;
    use crate::laurent::parse_poly;

    fn rp(rank: usize, text: &str) -> RatPoly {
        RatPoly::from_laurent(&parse_poly(rank, text).unwrap()).unwrap()
    }

    fn lp(rank: usize, text: &str) -> LaurentPoly {
        parse_poly(rank, text).unwrap()
    }

    #[test]
    fn reduce_examples() {
        // {x - 1, x^2 - 1} -> {x - 1}
        let gb = groebner_reduce(&[rp(1, "a1 - 1"), rp(1, "a1^2 - 1")]).unwrap();
        assert_eq!(gb.generators(), &[rp(1, "a1 - 1")]);

        // {x, x - 1} -> {1}
        let gb = groebner_reduce(&[rp(1, "a1"), rp(1, "a1 - 1")]).unwrap();
        assert!(gb.is_unit_ideal());

        // {x*y - 1, x} -> {1}  (two variables: x = a1, y = a2)
        let gb = groebner_reduce(&[rp(2, "a1*a2 - 1"), rp(2, "a1")]).unwrap();
        assert!(gb.is_unit_ideal());
    }

    #[test]
    fn variety_empty_examples() {
        assert!(variety_empty(&[rp(1, "a1"), rp(1, "a1 - 1")]).unwrap());
        assert!(!variety_empty(&[rp(1, "a1 - 1")]).unwrap());
        // x^2 + 1 has complex roots, so the variety is nonempty.
        assert!(!variety_empty(&[rp(1, "a1^2 + 1")]).unwrap());
        assert!(matches!(
            variety_empty(&[RatPoly::zero(1)]),
            Err(GroebnerError::EmptyInput)
        ));
    }

    #[test]
    fn certificate_examples() {
        let j = vec![lp(1, "a1"), lp(1, "a1 - 1")];
        let cert = null_certificate(&j, MonomialOrder::GrevLex, 10_000).unwrap();
        assert_eq!(cert.a, BigInt::from(1));
        assert_eq!(cert.cofactors, vec![lp(1, "1"), lp(1, "-1")]);
        assert!(cert.verify(&j));

        let j = vec![lp(1, "a1 - 2"), lp(1, "a1 - 5")];
        let cert = null_certificate(&j, MonomialOrder::GrevLex, 10_000).unwrap();
        assert_eq!(cert.a, BigInt::from(3));
        assert_eq!(cert.cofactors, vec![lp(1, "1"), lp(1, "-1")]);
        assert!(cert.verify(&j));

        let j = vec![lp(1, "2*a1 - 1"), lp(1, "a1")];
        let cert = null_certificate(&j, MonomialOrder::GrevLex, 10_000).unwrap();
        assert_eq!(cert.a, BigInt::from(1));
        assert_eq!(cert.cofactors, vec![lp(1, "-1"), lp(1, "2")]);
        assert!(cert.verify(&j));

        assert!(matches!(
            null_certificate(&[lp(1, "a1 - 1")], MonomialOrder::GrevLex, 10_000),
            Err(GroebnerError::VarietyNonempty)
        ));
    }

    #[test]
    fn generators_reduce_to_zero_and_idempotence() {
        let sys = vec![
            rp(2, "a1^2 + a2^2 - 1"),
            rp(2, "a1*a2 - 1"),
            rp(2, "a1 + a2 - 2"),
        ];
        let gb = groebner_reduce(&sys).unwrap();
        for p in &sys {
            assert!(gb.normal_form(p).is_zero());
        }
        let again = groebner_reduce(gb.generators()).unwrap();
        assert_eq!(again, gb);
    }

    #[test]
    fn packed_and_generic_engines_agree() {
        // Rank 3 uses the packed path (8 variables), rank 4 the generic
        // one; cross-check them on the same ideal laid out in each rank.
        let sys3 = vec![rp(3, "a1*a2 - 1"), rp(3, "a1 - a3"), rp(3, "a2^2 - a3")];
        let sys4 = vec![rp(4, "a1*a2 - 1"), rp(4, "a1 - a3"), rp(4, "a2^2 - a3")];
        let gb3 = groebner_reduce(&sys3).unwrap();
        let gb4 = groebner_reduce(&sys4).unwrap();
        let s3: Vec<String> = gb3.generators().iter().map(|g| g.to_string()).collect();
        let s4: Vec<String> = gb4.generators().iter().map(|g| g.to_string()).collect();
        assert_eq!(s3, s4);
        assert_eq!(
            variety_empty(&sys3).unwrap(),
            variety_empty(&sys4).unwrap()
        );
    }

    fn random_system(rng: &mut SplitMix64, rank: usize, count: usize) -> Vec<RatPoly> {
        (0..count)
            .map(|_| {
                let mut p = LaurentPoly::zero(rank);
                let nterms = 1 + rng.below(3);
                for _ in 0..nterms {
                    let alpha: Vec<i32> = (0..rank).map(|_| rng.below(3) as i32).collect();
                    let beta = vec![0i32; rank - 1];
                    let m = Monomial::new(&alpha, &beta, &[0, 0, 0]).unwrap();
                    let c = BigInt::from(rng.below(7) as i64 - 3);
                    p = p
                        .add(&LaurentPoly::from_terms(rank, [(m, c)]).unwrap())
                        .unwrap();
                }
                RatPoly::from_laurent(&p).unwrap()
            })
            .filter(|p| !p.is_zero())
            .collect()
    }

    #[test]
    fn emptiness_agrees_across_orders() {
        let mut rng = SplitMix64::new(0x5eed_4001);
        let mut tested = 0;
        while tested < 60 {
            let count = 2 + rng.below(2) as usize;
            let sys = random_system(&mut rng, 2, count);
            if sys.is_empty() {
                continue;
            }
            tested += 1;
            let grevlex = variety_empty_with(&sys, MonomialOrder::GrevLex, 200_000).unwrap();
            let lex = variety_empty_with(&sys, MonomialOrder::Lex, 200_000).unwrap();
            assert_eq!(grevlex, lex);
        }
    }

    #[test]
    fn empty_variety_blocks_roots_at_primes_not_dividing_a() {
        // When the variety is empty, any prime admitting a common root must
        // divide the certificate constant. Brute-force check mod p <= 50.
        let mut rng = SplitMix64::new(0x5eed_4002);
        let mut tested = 0;
        while tested < 25 {
            let sys_l: Vec<LaurentPoly> = random_system(&mut rng, 2, 2)
                .iter()
                .map(|p| {
                    // Rebuild integer polynomials from the rational ones.
                    let terms: Vec<(Monomial, BigInt)> = p
                        .terms()
                        .map(|(m, c)| (m.clone(), c.numer().clone()))
                        .collect();
                    LaurentPoly::from_terms(2, terms).unwrap()
                })
                .collect();
            if sys_l.len() < 2 {
                continue;
            }
            let rat: Vec<RatPoly> = sys_l
                .iter()
                .map(|p| RatPoly::from_laurent(p).unwrap())
                .collect();
            if !variety_empty(&rat).unwrap() {
                continue;
            }
            tested += 1;
            let cert = null_certificate(&sys_l, MonomialOrder::GrevLex, 200_000).unwrap();
            for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
                if (&cert.a % BigInt::from(p)).is_zero() {
                    continue;
                }
                // No common root mod p may exist.
                for x in 0..p {
                    for y in 0..p {
                        let all_zero = sys_l.iter().all(|f| {
                            f.eval_mod_p(p, &[x, y], &[0], &[0, 0, 0]).unwrap() == 0
                        });
                        assert!(
                            !all_zero,
                            "root ({x},{y}) mod {p} despite a = {}",
                            cert.a
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn step_limit_is_reported() {
        let sys = vec![
            rp(3, "a1^2*a2 - a3"),
            rp(3, "a2^2*a3 - a1"),
            rp(3, "a3^2*a1 - a2"),
        ];
        assert!(matches!(
            groebner_reduce_with(&sys, MonomialOrder::GrevLex, 2),
            Err(GroebnerError::StepLimit(2))
        ));
    }
}
