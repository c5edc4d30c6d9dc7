//! Smith normal form of integer matrices with transform tracking.
//!
//! Used to test whether the exponent lattice of a subgroup equals `Z^d`:
//! that holds exactly when the rank is `d` and every invariant factor is 1.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Decomposition `P * A * Q = D` with `P`, `Q` unimodular and `D` diagonal,
/// the diagonal entries nonnegative and forming a divisibility chain.
#[derive(Debug, Clone)]
pub struct SmithNormalForm {
    pub p: Vec<Vec<BigInt>>,
    pub d: Vec<Vec<BigInt>>,
    pub q: Vec<Vec<BigInt>>,
    pub invariant_factors: Vec<BigInt>,
}

impl SmithNormalForm {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

pub fn smith_normal_form(a: &[Vec<BigInt>]) -> SmithNormalForm {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut d: Vec<Vec<BigInt>> = a.to_vec();
    let mut p = identity(rows);
    let mut q = identity(cols);

    let swap_rows = |d: &mut Vec<Vec<BigInt>>, p: &mut Vec<Vec<BigInt>>, i: usize, j: usize| {
        d.swap(i, j);
        p.swap(i, j);
    };
    let swap_cols = |d: &mut Vec<Vec<BigInt>>, q: &mut Vec<Vec<BigInt>>, i: usize, j: usize| {
        for row in d.iter_mut() {
            row.swap(i, j);
        }
        for row in q.iter_mut() {
            row.swap(i, j);
        }
    };
    // row_i -= f * row_j
    let row_sub = |d: &mut Vec<Vec<BigInt>>, p: &mut Vec<Vec<BigInt>>, i: usize, j: usize, f: &BigInt| {
        for k in 0..cols {
            let t = &d[j][k] * f;
            d[i][k] -= t;
        }
        for k in 0..rows {
            let t = &p[j][k] * f;
            p[i][k] -= t;
        }
    };
    // col_i -= f * col_j
    let col_sub = |d: &mut Vec<Vec<BigInt>>, q: &mut Vec<Vec<BigInt>>, i: usize, j: usize, f: &BigInt| {
        for row in d.iter_mut() {
            let t = &row[j] * f;
            row[i] -= t;
        }
        for row in q.iter_mut() {
            let t = &row[j] * f;
            row[i] -= t;
        }
    };

    let mut t = 0usize;
    while t < rows.min(cols) {
        // Smallest nonzero entry of the trailing submatrix becomes the pivot.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if d[i][j].is_zero() {
                    continue;
                }
                match &pivot {
                    Some((pi, pj)) if d[*pi][*pj].abs() <= d[i][j].abs() => {}
                    _ => pivot = Some((i, j)),
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        swap_rows(&mut d, &mut p, t, pi);
        swap_cols(&mut d, &mut q, t, pj);

        // Clear row and column t; restart whenever a remainder shrinks the pivot.
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if d[i][t].is_zero() {
                    continue;
                }
                let f = &d[i][t] / &d[t][t];
                row_sub(&mut d, &mut p, i, t, &f);
                if !d[i][t].is_zero() {
                    // Remainder is strictly smaller than the pivot.
                    swap_rows(&mut d, &mut p, t, i);
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if d[t][j].is_zero() {
                    continue;
                }
                let f = &d[t][j] / &d[t][t];
                col_sub(&mut d, &mut q, j, t, &f);
                if !d[t][j].is_zero() {
                    swap_cols(&mut d, &mut q, t, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Enforce the divisibility chain: fold in any entry the pivot
            // does not divide and restart the clearing loop.
            let mut offender = None;
            'scan: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !(&d[i][j] % &d[t][t]).is_zero() {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_sub(&mut d, &mut p, t, i, &minus_one);
                }
                None => break,
            }
        }
        if d[t][t].is_negative() {
            for k in 0..cols {
                d[t][k] = -&d[t][k];
            }
            for k in 0..rows {
                p[t][k] = -&p[t][k];
            }
        }
        t += 1;
    }

    let invariant_factors = (0..rows.min(cols))
        .map(|k| d[k][k].clone())
        .take_while(|v| !v.is_zero())
        .collect();
    SmithNormalForm {
        p,
        d,
        q,
        invariant_factors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
        let n = a.len();
        let m = b[0].len();
        let k = b.len();
        (0..n)
            .map(|i| {
                (0..m)
                    .map(|j| (0..k).map(|l| &a[i][l] * &b[l][j]).sum())
                    .collect()
            })
            .collect()
    }

    fn det(a: &[Vec<BigInt>]) -> BigInt {
        let n = a.len();
        if n == 1 {
            return a[0][0].clone();
        }
        let mut acc = BigInt::zero();
        for j in 0..n {
            let minor: Vec<Vec<BigInt>> = a[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let term = &a[0][j] * det(&minor);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    fn check(a: &[Vec<BigInt>]) -> SmithNormalForm {
        let snf = smith_normal_form(a);
        let lhs = mat_mul(&mat_mul(&snf.p, a), &snf.q);
        assert_eq!(lhs, snf.d, "P*A*Q must equal D");
        assert_eq!(det(&snf.p).abs(), BigInt::one());
        assert_eq!(det(&snf.q).abs(), BigInt::one());
        for w in snf.invariant_factors.windows(2) {
            assert!((&w[1] % &w[0]).is_zero(), "divisibility chain");
        }
        for (i, row) in snf.d.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    assert!(v.is_zero(), "off-diagonal must vanish");
                }
            }
        }
        snf
    }

    #[test]
    fn snf_examples() {
        let snf = check(&big(&[&[1, 1], &[0, 1]]));
        assert_eq!(snf.invariant_factors, vec![BigInt::one(), BigInt::one()]);

        let snf = check(&big(&[&[2, 0], &[0, 1]]));
        assert_eq!(
            snf.invariant_factors,
            vec![BigInt::one(), BigInt::from(2)]
        );

        let snf = check(&big(&[&[2, 4, 4], &[-6, 6, 12], &[10, 4, 16]]));
        assert_eq!(
            snf.invariant_factors,
            vec![BigInt::from(2), BigInt::from(2), BigInt::from(156)]
        );
    }

    #[test]
    fn snf_rank_deficient_and_rectangular() {
        let snf = check(&big(&[&[1, 2], &[2, 4]]));
        assert_eq!(snf.invariant_factors, vec![BigInt::one()]);

        let snf = check(&big(&[&[3, 0], &[0, 5], &[6, 10]]));
        assert_eq!(snf.rank(), 2);

        let snf = check(&big(&[&[0, 0], &[0, 0]]));
        assert!(snf.invariant_factors.is_empty());
    }

    #[test]
    fn snf_random_consistency() {
        let mut rng = crate::corpus::SplitMix64::new(0x5eed_2001);
        for _ in 0..60 {
            let rows = 1 + rng.below(4) as usize;
            let cols = 1 + rng.below(4) as usize;
            let a: Vec<Vec<BigInt>> = (0..rows)
                .map(|_| {
                    (0..cols)
                        .map(|_| BigInt::from(rng.below(21) as i64 - 10))
                        .collect()
                })
                .collect();
            check(&a);
        }
    }
}
