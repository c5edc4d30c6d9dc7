//! The finite side of the pipeline: evaluation tuples, the induced group
//! homomorphisms onto `V_{d-1} ⋊_α Z/mZ`, integer factorization with
//! primality certification, and exhaustive common-root search modulo a
//! prime.

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, inv_mod_prime, mul_mod, pow_mod};
use crate::laurent::{LaurentError, LaurentPoly};
use crate::magnus::{MagnusElement, PolySystem, PolyTag};
use crate::phyper::{PHyperElement, PHyperGroup};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModularError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("tuple component out of range: {0}")]
    BadTuple(String),
    #[error("polynomial must not involve the gamma variables")]
    GammaPresent,
    #[error("laurent evaluation: {0}")]
    Laurent(#[from] LaurentError),
    #[error("factorization budget of {0:?} exhausted")]
    FactorTimeout(Duration),
    #[error("factorization needs |a| >= 2")]
    FactorTooSmall,
    #[error("root search needs {needed} evaluations, over the budget of {budget}")]
    RootBudget { needed: u128, budget: u64 },
    #[error("system shape not searchable: {0}")]
    UnsupportedSystem(String),
}

/// Evaluation tuple `(c, α, u, m)`: exponents `c_i` for the alpha values
/// `α^{c_i}`, beta values `u_j`, and a modulus `m >= 2` with `α^m ≡ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QTuple {
    p: u64,
    c: Vec<u64>,
    alpha: u64,
    u: Vec<u64>,
    m: u64,
}

impl QTuple {
    pub fn new(p: u64, c: Vec<u64>, alpha: u64, u: Vec<u64>, m: u64) -> Result<QTuple, ModularError> {
        if p == 2 || !arith::is_prime_u64(p) {
            return Err(ModularError::NotOddPrime(p));
        }
        if c.is_empty() || u.len() + 1 != c.len() {
            return Err(ModularError::BadTuple("arity".into()));
        }
        if c.iter().any(|&x| x > p - 2) {
            return Err(ModularError::BadTuple(format!("c exponents exceed {}", p - 2)));
        }
        if !(2..=p - 1).contains(&alpha) || !(2..=p - 1).contains(&m) {
            return Err(ModularError::BadTuple("alpha and m must lie in 2..=p-1".into()));
        }
        if u.iter().any(|&x| x > p - 1) {
            return Err(ModularError::BadTuple("u values exceed p-1".into()));
        }
        if pow_mod(alpha, m, p) != 1 {
            return Err(ModularError::BadTuple(format!(
                "alpha^m must be 1 mod p (alpha={alpha}, m={m})"
            )));
        }
        Ok(QTuple { p, c, alpha, u, m })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn d(&self) -> usize {
        self.c.len()
    }

    pub fn c(&self) -> &[u64] {
        &self.c
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn u(&self) -> &[u64] {
        &self.u
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Alpha-variable values `α^{c_1}, ..., α^{c_d}`.
    pub fn alpha_values(&self) -> Vec<u64> {
        self.c.iter().map(|&ci| pow_mod(self.alpha, ci, self.p)).collect()
    }

    /// The target group `V_{d-1} ⋊_α Z/mZ`; the action need not be
    /// faithful, since `m` only has to be a multiple of the order of `α`.
    pub fn target_group(&self) -> PHyperGroup {
        PHyperGroup::with_action(self.p, self.d() - 1, self.alpha, self.m)
            .expect("tuple invariants imply a valid action")
    }

    /// Uniform-ish random tuple for randomized identity tests.
    pub fn random(rng: &mut crate::corpus::SplitMix64, p: u64, d: usize) -> QTuple {
        assert!(p > 2 && arith::is_prime_u64(p) && d >= 2);
        let alpha = 2 + rng.below(p - 2);
        let ord = arith::order_mod_prime(alpha, p);
        let multiples: Vec<u64> = (1..=(p - 1) / ord).map(|k| k * ord).filter(|&m| m >= 2).collect();
        let m = multiples[rng.below(multiples.len() as u64) as usize];
        let c: Vec<u64> = (0..d).map(|_| rng.below(p - 1)).collect();
        let u: Vec<u64> = (0..d - 1).map(|_| rng.below(p)).collect();
        QTuple::new(p, c, alpha, u, m).expect("components drawn in range")
    }
}

/// Ring-homomorphic evaluation `alpha_i -> α^{c_i}`, `beta_j -> u_j` of a
/// gamma-free polynomial.
pub fn phi_pq(poly: &LaurentPoly, q: &QTuple) -> Result<u64, ModularError> {
    if poly.has_gamma() {
        return Err(ModularError::GammaPresent);
    }
    if poly.rank() != q.d() {
        return Err(ModularError::BadTuple("rank mismatch".into()));
    }
    Ok(poly.eval_mod_p(q.p, &q.alpha_values(), &q.u, &[0, 0, 0])?)
}

/// The induced group homomorphism on the semidirect product: applies the
/// ring evaluation to every polynomial coordinate and `k -> Σ c_i k_i mod m`
/// to the `Z^d` part.
pub fn phi_group(x: &MagnusElement, q: &QTuple) -> Result<PHyperElement, ModularError> {
    if x.rank() != q.d() {
        return Err(ModularError::BadTuple("rank mismatch".into()));
    }
    let v = x
        .poly()
        .iter()
        .map(|p| phi_pq(p, q))
        .collect::<Result<Vec<_>, _>>()?;
    let mut acc: i128 = 0;
    for (&ci, &ki) in q.c.iter().zip(x.abel()) {
        acc += ci as i128 * ki as i128;
    }
    let a = acc.rem_euclid(q.m as i128) as u64;
    Ok(q.target_group().element(v, a).expect("values reduced mod p and m"))
}

fn jacobi(mut a: BigInt, mut n: BigUint) -> i32 {
    let mut t = 1i32;
    let big_n: BigInt = n.clone().into();
    a = a.mod_floor(&big_n);
    let mut a: BigUint = a.to_biguint().expect("nonnegative after mod_floor");
    while !a.is_zero() {
        while a.is_even() {
            a >>= 1;
            let r = (&n % 8u32).to_u32().unwrap();
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if (&a % 4u32).to_u32().unwrap() == 3 && (&n % 4u32).to_u32().unwrap() == 3 {
            t = -t;
        }
        a %= &n;
    }
    if n.is_one() {
        t
    } else {
        0
    }
}

fn is_perfect_square(n: &BigUint) -> bool {
    let r = n.sqrt();
    &(&r * &r) == n
}

/// Strong Lucas probable-prime test with Selfridge parameters; combined
/// with a strong base-2 Miller-Rabin round this is the usual two-sided
/// test for integers past the deterministic 64-bit range.
fn strong_lucas_prp(n: &BigUint) -> bool {
    if is_perfect_square(n) {
        return false;
    }
    // Find D in 5, -7, 9, -11, ... with Jacobi(D, n) = -1.
    let mut d_abs: i64 = 5;
    let mut sign = 1i64;
    let d: i64 = loop {
        let d = sign * d_abs;
        match jacobi(BigInt::from(d), n.clone()) {
            -1 => break d,
            0 => {
                if BigUint::from(d_abs.unsigned_abs()) < *n {
                    return false;
                }
            }
            _ => {}
        }
        d_abs += 2;
        sign = -sign;
    };
    let big_n: BigInt = n.clone().into();
    let q_int: BigInt = BigInt::from((1 - d) / 4).mod_floor(&big_n);

    // n + 1 = t * 2^s with t odd.
    let n_plus = n + 1u32;
    let s = n_plus.trailing_zeros().unwrap_or(0);
    let t = &n_plus >> s;

    // Lucas chains by binary ladder on (U, V) with P = 1.
    let to_big = |x: &BigInt| -> BigInt { x.mod_floor(&big_n) };
    let mut u = BigInt::zero();
    let mut v = BigInt::from(2);
    let mut qk = BigInt::one();
    let inv2 = BigInt::from(inv_mod_prime_big(&BigUint::from(2u32), n));
    let bits = t.bits();
    for i in (0..bits).rev() {
        // Double: U_{2k} = U_k V_k, V_{2k} = V_k^2 - 2 Q^k.
        let u2 = to_big(&(&u * &v));
        let v2 = to_big(&(&v * &v - 2 * &qk));
        let q2 = to_big(&(&qk * &qk));
        u = u2;
        v = v2;
        qk = q2;
        if t.bit(i) {
            // Increment: U_{k+1} = (U_k + V_k)/2, V_{k+1} = (V_k + D U_k)/2.
            let u1 = to_big(&(&(&u + &v) * &inv2));
            let v1 = to_big(&(&(&v + BigInt::from(d) * &u) * &inv2));
            qk = to_big(&(&qk * &q_int));
            u = u1;
            v = v1;
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = to_big(&(&v * &v - 2 * &qk));
        qk = to_big(&(&qk * &qk));
        if v.is_zero() {
            return true;
        }
    }
    false
}

fn inv_mod_prime_big(a: &BigUint, n: &BigUint) -> BigUint {
    // Extended Euclid; n odd in every call site, a = 2.
    let a_int: BigInt = a.clone().into();
    let n_int: BigInt = n.clone().into();
    let e = a_int.extended_gcd(&n_int);
    e.x.mod_floor(&n_int).to_biguint().expect("nonnegative")
}

fn miller_rabin_base(n: &BigUint, a: &BigUint) -> bool {
    let one = BigUint::one();
    let n_minus = n - &one;
    let s = n_minus.trailing_zeros().unwrap_or(0);
    let d = &n_minus >> s;
    let mut x = a.modpow(&d, n);
    if x == one || x == n_minus {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus {
            return true;
        }
    }
    false
}

/// Primality test: deterministic Miller-Rabin for 64-bit inputs, a
/// Baillie-style combination of strong base-2 Miller-Rabin and a strong
/// Lucas round beyond.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return arith::is_prime_u64(small);
    }
    for p in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43] {
        if (n % p).is_zero() {
            return false;
        }
    }
    miller_rabin_base(n, &BigUint::from(2u32)) && strong_lucas_prp(n)
}

fn pollard_rho(n: &BigUint, deadline: Instant) -> Result<BigUint, ModularError> {
    // Brent's cycle variant with product batching.
    let one = BigUint::one();
    let mut c = BigUint::from(1u32);
    loop {
        if Instant::now() > deadline {
            return Err(ModularError::FactorTimeout(Duration::ZERO));
        }
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut x = BigUint::from(2u32);
        let mut y = x.clone();
        let mut d = one.clone();
        let mut count = 0u64;
        while d == one {
            x = f(&x);
            y = f(&f(&y));
            let diff = if x > y { &x - &y } else { &y - &x };
            d = diff.gcd(n);
            count += 1;
            if count % 1024 == 0 && Instant::now() > deadline {
                return Err(ModularError::FactorTimeout(Duration::ZERO));
            }
        }
        if &d != n {
            return Ok(d);
        }
        c += 1u32;
    }
}

/// Complete prime factorization of `|a|`, `|a| >= 2`: trial division up to
/// 10^4, then Pollard rho splits with primality certification on every
/// emitted factor. The time budget covers the whole call.
pub fn factorize(a: &BigInt, budget: Duration) -> Result<Vec<BigUint>, ModularError> {
    let n = a.abs().to_biguint().expect("abs is nonnegative");
    if n < BigUint::from(2u32) {
        return Err(ModularError::FactorTooSmall);
    }
    let deadline = Instant::now() + budget;
    let mut out: Vec<BigUint> = Vec::new();
    let mut rest = n;
    for q in 2u64..10_000 {
        let qb = BigUint::from(q);
        if &qb * &qb > rest {
            break;
        }
        while (&rest % &qb).is_zero() {
            out.push(qb.clone());
            rest /= &qb;
        }
    }
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime(&m) {
            out.push(m);
            continue;
        }
        if Instant::now() > deadline {
            return Err(ModularError::FactorTimeout(budget));
        }
        let f = pollard_rho(&m, deadline).map_err(|_| ModularError::FactorTimeout(budget))?;
        let g = &m / &f;
        stack.push(f);
        stack.push(g);
    }
    out.sort();
    Ok(out)
}

/// A common root modulo `p`: alpha values are units, beta and gamma values
/// arbitrary residues.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootAssignment {
    pub p: u64,
    pub alpha_vals: Vec<u64>,
    pub beta_vals: Vec<u64>,
    pub gamma_vals: Vec<u64>,
}

impl RootAssignment {
    /// Checked evaluation of every system polynomial; the search result is
    /// re-verified through this independent path.
    pub fn satisfies(&self, system: &PolySystem) -> bool {
        system.polys().iter().all(|poly| {
            poly.eval_mod_p(self.p, &self.alpha_vals, &self.beta_vals, &self.gamma_vals)
                == Ok(0)
        })
    }
}

/// One gamma-free polynomial compiled to flat term data for the sweep.
struct Compiled {
    terms: Vec<(u64, Vec<i32>, Vec<i32>)>, // coefficient, alpha exps, beta exps
}

impl Compiled {
    fn build(poly: &LaurentPoly, p: u64) -> Result<Compiled, ModularError> {
        if poly.has_gamma() {
            return Err(ModularError::GammaPresent);
        }
        let mut terms = Vec::with_capacity(poly.num_terms());
        for (m, c) in poly.terms() {
            let coef = crate::laurent::coef_mod(c, p);
            if coef == 0 {
                continue;
            }
            terms.push((coef, m.alpha_exps().to_vec(), m.beta_exps().to_vec()));
        }
        Ok(Compiled { terms })
    }

    /// Folds the alpha values in, leaving a sparse polynomial in beta.
    fn specialize_alpha(&self, alpha: &[u64], p: u64) -> Vec<(u64, Vec<i32>)> {
        let mut buckets: std::collections::HashMap<Vec<i32>, u64> =
            std::collections::HashMap::new();
        for (coef, a_exps, b_exps) in &self.terms {
            let mut t = *coef;
            for (&v, &e) in alpha.iter().zip(a_exps) {
                if e == 0 {
                    continue;
                }
                let base = if e > 0 { v } else { inv_mod_prime(v, p) };
                t = mul_mod(t, pow_mod(base, e.unsigned_abs() as u64, p), p);
            }
            let slot = buckets.entry(b_exps.clone()).or_insert(0);
            *slot = (*slot + t) % p;
        }
        buckets.into_iter().filter(|(_, c)| *c != 0).map(|(e, c)| (c, e)).collect()
    }
}

fn eval_beta(spec: &[(u64, Vec<i32>)], beta: &[u64], p: u64) -> u64 {
    let mut acc = 0u64;
    for (coef, exps) in spec {
        let mut t = *coef;
        for (&v, &e) in beta.iter().zip(exps) {
            if e != 0 {
                t = mul_mod(t, pow_mod(v, e as u64, p), p);
            }
        }
        acc = (acc + t) % p;
    }
    acc
}

/// Exhaustive search for a common root modulo the odd prime `p`,
/// structured by the gamma eliminations: alpha and beta values are
/// enumerated lexicographically (alpha over units, beta over all
/// residues), the gamma values are derived from their defining
/// constraints, and any returned assignment is independently re-checked
/// against the full system. Returns the first root in enumeration order.
pub fn root_search(
    system: &PolySystem,
    p: u64,
    eval_budget: u64,
) -> Result<Option<RootAssignment>, ModularError> {
    if p == 2 || !arith::is_prime_u64(p) {
        return Err(ModularError::NotOddPrime(p));
    }
    let d = system.rank();
    let total: u128 = (p as u128 - 1).pow(d as u32) * (p as u128).pow(d as u32 - 1);
    if total > eval_budget as u128 {
        return Err(ModularError::RootBudget {
            needed: total,
            budget: eval_budget,
        });
    }

    let mut minor_polys: Vec<Compiled> = Vec::new();
    let mut has_g1 = false;
    let mut has_g2 = false;
    let mut has_g3 = false;
    for (poly, tag) in system.iter() {
        match tag {
            PolyTag::MinorVanishing => minor_polys.push(Compiled::build(poly, p)?),
            PolyTag::Gamma1Constraint => has_g1 = true,
            PolyTag::Gamma2Constraint => has_g2 = true,
            PolyTag::Gamma3Constraint => has_g3 = true,
        }
    }
    // The gamma-2 value is the trace expression; its constraint polynomial
    // must have the shape A(alpha, beta) - gamma2.
    let g2_free = if has_g2 {
        let poly = system
            .iter()
            .find(|(_, t)| *t == PolyTag::Gamma2Constraint)
            .map(|(p, _)| p)
            .unwrap();
        let g2var = LaurentPoly::gamma(d, 2)?;
        let rest = poly.add(&g2var)?;
        if rest.has_gamma() {
            return Err(ModularError::UnsupportedSystem(
                "gamma2 polynomial is not of the form A - g2".into(),
            ));
        }
        Some(Compiled::build(&rest, p)?)
    } else {
        None
    };
    if has_g3 {
        let poly = system
            .iter()
            .find(|(_, t)| *t == PolyTag::Gamma3Constraint)
            .map(|(p, _)| p)
            .unwrap();
        let expected = LaurentPoly::gamma(d, 2)?
            .mul(&LaurentPoly::gamma(d, 3)?)?
            .sub(&LaurentPoly::one(d))?;
        if poly != &expected {
            return Err(ModularError::UnsupportedSystem(
                "gamma3 polynomial is not g2*g3 - 1".into(),
            ));
        }
        if !has_g2 {
            return Err(ModularError::UnsupportedSystem(
                "gamma3 constraint without a gamma2 constraint".into(),
            ));
        }
    }
    let scaled_y0 = if has_g1 {
        let s = system.scaled_y0().ok_or_else(|| {
            ModularError::UnsupportedSystem("gamma1 constraint without extractable base".into())
        })?;
        Some(Compiled::build(s, p)?)
    } else {
        None
    };

    let mut alpha = vec![1u64; d];
    loop {
        let minors_spec: Vec<Vec<(u64, Vec<i32>)>> = minor_polys
            .iter()
            .map(|c| c.specialize_alpha(&alpha, p))
            .collect();
        let g2_spec = g2_free.as_ref().map(|c| c.specialize_alpha(&alpha, p));
        let y0_spec = scaled_y0.as_ref().map(|c| c.specialize_alpha(&alpha, p));

        let mut beta = vec![0u64; d - 1];
        'beta: loop {
            let accept = (|| {
                for spec in &minors_spec {
                    if eval_beta(spec, &beta, p) != 0 {
                        return None;
                    }
                }
                let g2_val = g2_spec.as_ref().map(|s| eval_beta(s, &beta, p));
                let mut gamma = vec![0u64; 3];
                if let Some(v) = g2_val {
                    if has_g3 && v == 0 {
                        return None;
                    }
                    gamma[1] = v;
                    if has_g3 {
                        gamma[2] = inv_mod_prime(v, p);
                    }
                }
                if let Some(spec) = &y0_spec {
                    let s_val = eval_beta(spec, &beta, p);
                    if s_val == 0 {
                        return None;
                    }
                    gamma[0] = inv_mod_prime(s_val, p);
                }
                Some(gamma)
            })();

            if let Some(gamma_vals) = accept {
                let candidate = RootAssignment {
                    p,
                    alpha_vals: alpha.clone(),
                    beta_vals: beta.clone(),
                    gamma_vals,
                };
                if candidate.satisfies(system) {
                    return Ok(Some(candidate));
                }
            }

            // Lexicographic odometer on beta, last coordinate fastest.
            let mut i = d - 1;
            loop {
                if i == 0 {
                    break 'beta;
                }
                i -= 1;
                beta[i] += 1;
                if beta[i] < p {
                    continue 'beta;
                }
                beta[i] = 0;
            }
        }

        let mut i = d;
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            alpha[i] += 1;
            if alpha[i] < p {
                break;
            }
            alpha[i] = 1;
        }
    }
}
