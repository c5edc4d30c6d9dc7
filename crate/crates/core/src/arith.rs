//! Small modular-arithmetic helpers on `u64` shared across modules.

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo the prime `p`.
pub(crate) fn inv_mod_prime(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a % p, p - 2, p)
}

/// Deterministic Miller-Rabin for `u64`. The base set below is a proven
/// witness set for all 64-bit integers.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Multiplicative order of `a` modulo the prime `p`.
pub(crate) fn order_mod_prime(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    let group = p - 1;
    let mut order = group;
    let mut rem = group;
    let mut q = 2u64;
    // Strip each prime factor of p-1 from the order while possible.
    while q * q <= rem {
        if rem % q == 0 {
            while rem % q == 0 {
                rem /= q;
            }
            while order % q == 0 && pow_mod(a, order / q, p) == 1 {
                order /= q;
            }
        }
        q += 1;
    }
    if rem > 1 {
        while order % rem == 0 && pow_mod(a, order / rem, p) == 1 {
            order /= rem;
        }
    }
    order
}
