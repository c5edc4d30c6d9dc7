//! Free group words over a fixed basis `x1, ..., xd`.
//!
//! Words are stored as flat sequences of signed generator indices: letter
//! `i > 0` is the generator `x_i`, letter `-i` its inverse. Every exposed
//! word is freely reduced; reduction is a single stack pass. Values are
//! immutable after construction and safe to share across threads.

use std::fmt;

use num_integer::Integer;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("generator index {index} out of range 1..={rank}")]
    IndexOutOfRange { index: i64, rank: usize },
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("automorphism index {t} out of range 1..={rank}")]
    TauOutOfRange { t: usize, rank: usize },
    #[error("residues {gens:?} do not generate Z/{c}Z")]
    NotGenerating { c: u64, gens: Vec<u64> },
    #[error("a subgroup basis needs rank >= 1 and at least one word")]
    EmptyBasis,
    #[error("trivial (empty) words are not admitted as generators")]
    TrivialWord,
}

/// A freely reduced word over the rank-`d` basis and its inverses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    rank: usize,
    letters: Vec<i32>,
}

impl Word {
    /// Freely reduces a raw letter sequence. Idempotent on reduced input.
    pub fn reduce(rank: usize, raw: &[i32]) -> Result<Word, WordError> {
        if rank == 0 {
            return Err(WordError::EmptyBasis);
        }
        let mut stack: Vec<i32> = Vec::with_capacity(raw.len());
        for &x in raw {
            if x == 0 || x.unsigned_abs() as usize > rank {
                return Err(WordError::IndexOutOfRange {
                    index: x as i64,
                    rank,
                });
            }
            if stack.last().is_some_and(|&y| y == -x) {
                stack.pop();
            } else {
                stack.push(x);
            }
        }
        Ok(Word {
            rank,
            letters: stack,
        })
    }

    pub fn empty(rank: usize) -> Word {
        Word {
            rank,
            letters: Vec::new(),
        }
    }

    /// The single-letter word `x_i` (sign `+1`) or `x_i^{-1}` (sign `-1`).
    pub fn generator(rank: usize, i: usize, sign: i8) -> Result<Word, WordError> {
        if i == 0 || i > rank {
            return Err(WordError::IndexOutOfRange {
                index: i as i64,
                rank,
            });
        }
        let letter = if sign >= 0 { i as i32 } else { -(i as i32) };
        Ok(Word {
            rank,
            letters: vec![letter],
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Reduced product `self · other`.
    pub fn multiply(&self, other: &Word) -> Result<Word, WordError> {
        if self.rank != other.rank {
            return Err(WordError::RankMismatch(self.rank, other.rank));
        }
        let mut raw = Vec::with_capacity(self.letters.len() + other.letters.len());
        raw.extend_from_slice(&self.letters);
        raw.extend_from_slice(&other.letters);
        Word::reduce(self.rank, &raw)
    }

    /// Reverses the letters and flips their signs.
    pub fn invert(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|&x| -x).collect(),
        }
    }

    /// `self^k`, with negative powers through inversion.
    pub fn pow(&self, k: i64) -> Word {
        if k < 0 {
            return self.invert().pow(-k);
        }
        let mut raw = Vec::with_capacity(self.letters.len() * k as usize);
        for _ in 0..k {
            raw.extend_from_slice(&self.letters);
        }
        Word::reduce(self.rank, &raw).expect("letters of a valid word stay in range")
    }

    /// Reduced commutator `self · other · self^{-1} · other^{-1}`.
    pub fn commutator(&self, other: &Word) -> Result<Word, WordError> {
        self.multiply(other)?
            .multiply(&self.invert())?
            .multiply(&other.invert())
    }

    /// The basis automorphism swapping `x_t` and `x_d`; identity for `t = d`.
    pub fn tau(&self, t: usize) -> Result<Word, WordError> {
        if t == 0 || t > self.rank {
            return Err(WordError::TauOutOfRange { t, rank: self.rank });
        }
        let d = self.rank as i32;
        let t = t as i32;
        let letters = self
            .letters
            .iter()
            .map(|&x| {
                let a = x.abs();
                let b = if a == t {
                    d
                } else if a == d {
                    t
                } else {
                    a
                };
                b * x.signum()
            })
            .collect();
        Ok(Word {
            rank: self.rank,
            letters,
        })
    }

    /// Letter-count exponent vector: the image in `Z^d` under abelianization.
    pub fn abelianization(&self) -> Vec<i64> {
        let mut v = vec![0i64; self.rank];
        for &x in &self.letters {
            let i = x.unsigned_abs() as usize - 1;
            v[i] += x.signum() as i64;
        }
        v
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (k, &x) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            if x > 0 {
                write!(f, "x{x}")?;
            } else {
                write!(f, "x{}^-1", -x)?;
            }
        }
        Ok(())
    }
}

/// A generating set for a finitely generated subgroup of the rank-`d` free
/// group. The words are treated as generators; the decision procedure does
/// not require them to be Nielsen reduced or a free basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupBasis {
    rank: usize,
    words: Vec<Word>,
}

impl SubgroupBasis {
    pub fn new(rank: usize, words: Vec<Word>) -> Result<SubgroupBasis, WordError> {
        if rank == 0 || words.is_empty() {
            return Err(WordError::EmptyBasis);
        }
        for w in &words {
            if w.rank() != rank {
                return Err(WordError::RankMismatch(rank, w.rank()));
            }
            if w.is_empty() {
                return Err(WordError::TrivialWord);
            }
        }
        Ok(SubgroupBasis { rank, words })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Applies the swap automorphism `tau_t` to every generator.
    pub fn tau(&self, t: usize) -> Result<SubgroupBasis, WordError> {
        let words = self
            .words
            .iter()
            .map(|w| w.tau(t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SubgroupBasis {
            rank: self.rank,
            words,
        })
    }

    /// The standard basis `x1, ..., xd` generating the whole free group.
    pub fn full_group(rank: usize) -> Result<SubgroupBasis, WordError> {
        let words = (1..=rank)
            .map(|i| Word::generator(rank, i, 1))
            .collect::<Result<Vec<_>, _>>()?;
        SubgroupBasis::new(rank, words)
    }
}

fn gcd_all(c: u64, gens: &[u64]) -> u64 {
    gens.iter().fold(c, |acc, &g| acc.gcd(&g))
}

/// Exponents `r_1, ..., r_{m-1}` such that `g_m + Σ r_i g_i` generates
/// `Z/cZ`, given residues `g_1, ..., g_m` that jointly generate it.
///
/// Follows the inductive construction: strip the subgroup generated by
/// `g_1`, recurse on the quotient, then lift the combined element back by
/// scanning multiples of `g_1`. The lift scans exponents `1, ..., ord-1`
/// and falls back to `0`, so a trivial first residue contributes exponent 0.
pub fn cyclic_combine(c: u64, gens: &[u64]) -> Result<Vec<u64>, WordError> {
    if c == 0 || gens.is_empty() || gcd_all(c, gens) != 1 {
        return Err(WordError::NotGenerating {
            c,
            gens: gens.to_vec(),
        });
    }
    let m = gens.len();
    if m == 1 {
        return Ok(Vec::new());
    }
    let g1 = gens[0] % c;
    // <g1> has index gcd(g1, c) in Z/cZ, so the quotient is Z/c1Z.
    let c1 = if g1 == 0 { c } else { g1.gcd(&c) };
    let tail: Vec<u64> = gens[1..].iter().map(|&g| g % c1).collect();
    let rs_tail = cyclic_combine(c1, &tail)?;

    let mut s: u64 = gens[m - 1] % c;
    for (i, &r) in rs_tail.iter().enumerate() {
        let g = gens[i + 1] % c;
        let add = ((r as u128 * g as u128) % c as u128) as u64;
        s = ((s as u128 + add as u128) % c as u128) as u64;
    }

    let ord1 = c / c1;
    for r1 in (1..ord1).chain(std::iter::once(0)) {
        let add = ((r1 as u128 * g1 as u128) % c as u128) as u64;
        let candidate = ((s as u128 + add as u128) % c as u128) as u64;
        if candidate.gcd(&c) == 1 {
            let mut out = Vec::with_capacity(m - 1);
            out.push(r1);
            out.extend(rs_tail);
            return Ok(out);
        }
    }
    unreachable!("a generating lift always exists for a cyclic quotient")
}

/// The primitive word `x_d x_1^{r_1} ... x_{d-1}^{r_{d-1}}` whose image
/// under `x_i -> images[i]` generates `Z/cZ`.
pub fn primitive_lift(d: usize, c: u64, images: &[u64]) -> Result<Word, WordError> {
    if d == 0 || images.len() != d {
        return Err(WordError::EmptyBasis);
    }
    let exps = cyclic_combine(c, images)?;
    let mut raw: Vec<i32> = vec![d as i32];
    for (i, &r) in exps.iter().enumerate() {
        for _ in 0..r {
            raw.push((i + 1) as i32);
        }
    }
    Word::reduce(d, &raw)
}

/// Errors raised while parsing the textual word format.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        col,
        msg: msg.into(),
    }
}

/// Parses one word line. Tokens are `x<N>`, optionally `x<N>^<k>` for a
/// nonzero integer `k`, or alias runs where `a..z` stand for generators
/// 1..26 and `A..Z` for their inverses. Both forms may be mixed freely.
pub fn parse_word(rank: usize, text: &str, line_no: usize) -> Result<Word, ParseError> {
    let mut raw: Vec<i32> = Vec::new();
    let mut col = 1usize;
    for token in text.split_whitespace() {
        // Track a rough column for diagnostics.
        col = text.find(token).map(|i| i + 1).unwrap_or(col);
        if let Some(rest) = token.strip_prefix('x') {
            let (idx_str, exp) = match rest.split_once('^') {
                Some((i, e)) => {
                    let exp: i64 = e.parse().map_err(|_| {
                        parse_err(line_no, col, format!("bad exponent in token `{token}`"))
                    })?;
                    (i, exp)
                }
                None => (rest, 1),
            };
            let idx: usize = idx_str.parse().map_err(|_| {
                parse_err(line_no, col, format!("bad generator index in `{token}`"))
            })?;
            if idx == 0 || idx > rank {
                return Err(parse_err(
                    line_no,
                    col,
                    format!("generator x{idx} out of range 1..={rank}"),
                ));
            }
            if exp == 0 {
                return Err(parse_err(line_no, col, "zero exponent is not allowed"));
            }
            let letter = if exp > 0 { idx as i32 } else { -(idx as i32) };
            for _ in 0..exp.unsigned_abs() {
                raw.push(letter);
            }
        } else if token.chars().all(|ch| ch.is_ascii_alphabetic()) {
            for ch in token.chars() {
                let (idx, sign) = if ch.is_ascii_lowercase() {
                    (ch as usize - 'a' as usize + 1, 1i32)
                } else {
                    (ch as usize - 'A' as usize + 1, -1i32)
                };
                if idx > rank {
                    return Err(parse_err(
                        line_no,
                        col,
                        format!("alias `{ch}` means generator {idx}, out of range 1..={rank}"),
                    ));
                }
                raw.push(sign * idx as i32);
            }
        } else {
            return Err(parse_err(
                line_no,
                col,
                format!("unrecognized token `{token}`"),
            ));
        }
    }
    if raw.is_empty() {
        return Err(parse_err(line_no, 1, "empty word"));
    }
    let w = Word::reduce(rank, &raw)
        .map_err(|e| parse_err(line_no, 1, e.to_string()))?;
    if w.is_empty() {
        return Err(parse_err(
            line_no,
            1,
            "word reduces to the identity; trivial generators are rejected",
        ));
    }
    Ok(w)
}

/// Parses a word file: a `rank <d>` header followed by one word per line.
/// `#` starts a comment; blank lines are skipped.
pub fn parse_basis(text: &str) -> Result<SubgroupBasis, ParseError> {
    let mut rank: Option<usize> = None;
    let mut words: Vec<Word> = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match rank {
            None => {
                let mut it = line.split_whitespace();
                let kw = it.next().unwrap_or("");
                let val = it.next();
                if kw != "rank" || it.next().is_some() {
                    return Err(parse_err(line_no, 1, "expected header `rank <d>`"));
                }
                let d: usize = val
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| parse_err(line_no, 1, "expected header `rank <d>`"))?;
                if d == 0 {
                    return Err(parse_err(line_no, 1, "rank must be at least 1"));
                }
                rank = Some(d);
            }
            Some(d) => words.push(parse_word(d, line, line_no)?),
        }
    }
    let rank = rank.ok_or_else(|| parse_err(1, 1, "missing `rank <d>` header"))?;
    SubgroupBasis::new(rank, words).map_err(|e| parse_err(1, 1, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SplitMix64;
    use proptest::prelude::*;

    fn w(rank: usize, letters: &[i32]) -> Word {
        Word::reduce(rank, letters).unwrap()
    }

    #[test]
    fn reduce_cancels_adjacent_pairs() {
        assert_eq!(w(2, &[1, 2, -2, 1]).letters(), &[1, 1]);
        assert_eq!(w(2, &[]).letters(), &[] as &[i32]);
        assert_eq!(w(2, &[-1, 1, 2]).letters(), &[2]);
    }

    #[test]
    fn reduce_rejects_out_of_range() {
        assert!(matches!(
            Word::reduce(2, &[3]),
            Err(WordError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            Word::reduce(2, &[0]),
            Err(WordError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn multiply_invert_commutator() {
        let x1 = w(2, &[1]);
        let x1i = w(2, &[-1]);
        assert!(x1.multiply(&x1i).unwrap().is_empty());
        assert_eq!(w(2, &[1, -2]).invert().letters(), &[2, -1]);
        assert_eq!(x1.commutator(&w(2, &[2])).unwrap().letters(), &[1, 2, -1, -2]);
        assert!(matches!(
            x1.multiply(&w(3, &[1])),
            Err(WordError::RankMismatch(2, 3))
        ));
    }

    #[test]
    fn tau_swaps_t_and_d() {
        assert_eq!(w(3, &[1, -2, 3]).tau(1).unwrap().letters(), &[3, -2, 1]);
        let v = w(3, &[1, 2, -3, 1]);
        assert_eq!(v.tau(3).unwrap(), v);
        let u = w(2, &[2, 2]);
        assert_eq!(u.tau(2).unwrap(), u);
    }

    #[test]
    fn cyclic_combine_examples() {
        assert_eq!(cyclic_combine(6, &[2, 3]).unwrap(), vec![1]);
        assert_eq!(cyclic_combine(5, &[1]).unwrap(), Vec::<u64>::new());
        assert_eq!(cyclic_combine(4, &[2, 1]).unwrap(), vec![1]);
        assert!(matches!(
            cyclic_combine(6, &[2, 4]),
            Err(WordError::NotGenerating { .. })
        ));
    }

    #[test]
    fn cyclic_combine_output_generates_exhaustively() {
        // Oracle: the combined residue must be a unit mod c. Checked for
        // every c <= 24 against all generating pairs and many triples.
        for c in 1..=24u64 {
            for g1 in 0..c.max(1) {
                for g2 in 0..c.max(1) {
                    if gcd_all(c, &[g1, g2]) != 1 {
                        continue;
                    }
                    let rs = cyclic_combine(c, &[g1, g2]).unwrap();
                    let combined = (g2 as u128 + rs[0] as u128 * g1 as u128) % c as u128;
                    assert_eq!((combined as u64).gcd(&c), 1, "c={c} g=({g1},{g2})");
                }
            }
        }
        let mut rng = SplitMix64::new(0x5eed_0001);
        for _ in 0..500 {
            let c = 2 + rng.below(29);
            let gens: Vec<u64> = (0..3).map(|_| rng.below(c)).collect();
            if gcd_all(c, &gens) != 1 {
                continue;
            }
            let rs = cyclic_combine(c, &gens).unwrap();
            let mut combined = gens[2] % c;
            for (i, &r) in rs.iter().enumerate() {
                combined = ((combined as u128 + r as u128 * gens[i] as u128) % c as u128) as u64;
            }
            assert_eq!(combined.gcd(&c), 1);
        }
    }

    #[test]
    fn primitive_lift_examples() {
        assert_eq!(primitive_lift(1, 5, &[1]).unwrap().letters(), &[1]);
        assert_eq!(primitive_lift(2, 6, &[2, 3]).unwrap().letters(), &[2, 1]);
        assert_eq!(primitive_lift(2, 3, &[0, 1]).unwrap().letters(), &[2]);
        assert!(primitive_lift(1, 6, &[2]).is_err());
    }

    #[test]
    fn primitive_lift_image_generates() {
        let mut rng = SplitMix64::new(0x5eed_0002);
        for _ in 0..2000 {
            let c = 1 + rng.below(30);
            let d = 1 + rng.below(4) as usize;
            let images: Vec<u64> = (0..d).map(|_| rng.below(c.max(1))).collect();
            if gcd_all(c, &images) != 1 {
                continue;
            }
            let word = primitive_lift(d, c, &images).unwrap();
            let mut val: i128 = 0;
            for &x in word.letters() {
                let i = x.unsigned_abs() as usize - 1;
                val += x.signum() as i128 * images[i] as i128;
            }
            let val = val.rem_euclid(c as i128) as u64;
            assert_eq!(val.gcd(&c), 1, "c={c} images={images:?}");
        }
    }

    #[test]
    fn parse_word_formats() {
        let w1 = parse_word(3, "x1 x2^-1 x3", 1).unwrap();
        assert_eq!(w1.letters(), &[1, -2, 3]);
        let w2 = parse_word(3, "aBc", 1).unwrap();
        assert_eq!(w2.letters(), &[1, -2, 3]);
        let w3 = parse_word(2, "x1^3 B", 1).unwrap();
        assert_eq!(w3.letters(), &[1, 1, 1, -2]);
        assert!(parse_word(2, "x3", 1).is_err());
        assert!(parse_word(2, "x1 x1^-1", 1).is_err());
        assert!(parse_word(2, "y1", 1).is_err());
    }

    #[test]
    fn parse_basis_file() {
        let text = "# sample\nrank 2\nx1 x2\nab\n";
        let basis = parse_basis(text).unwrap();
        assert_eq!(basis.rank(), 2);
        assert_eq!(basis.len(), 2);
        assert!(parse_basis("x1\n").is_err());
        assert!(parse_basis("rank 0\n").is_err());
    }

    fn arb_word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(
            (1..=rank as i32).prop_flat_map(|i| prop_oneof![Just(i), Just(-i)]),
            0..=max_len,
        )
        .prop_map(move |raw| Word::reduce(rank, &raw).unwrap())
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(u in arb_word(3, 12)) {
            let again = Word::reduce(3, u.letters()).unwrap();
            prop_assert_eq!(&again, &u);
        }

        #[test]
        fn multiply_is_associative(
            u in arb_word(3, 8),
            v in arb_word(3, 8),
            t in arb_word(3, 8),
        ) {
            let left = u.multiply(&v).unwrap().multiply(&t).unwrap();
            let right = u.multiply(&v.multiply(&t).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn invert_reverses_products(u in arb_word(3, 8), v in arb_word(3, 8)) {
            let lhs = u.multiply(&v).unwrap().invert();
            let rhs = v.invert().multiply(&u.invert()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn tau_is_length_preserving_involutive_homomorphism(
            u in arb_word(3, 8),
            v in arb_word(3, 8),
            t in 1..=3usize,
        ) {
            let tu = u.tau(t).unwrap();
            prop_assert_eq!(tu.len(), u.len());
            prop_assert_eq!(tu.tau(t).unwrap(), u.clone());
            let prod_then_tau = u.multiply(&v).unwrap().tau(t).unwrap();
            let tau_then_prod = tu.multiply(&v.tau(t).unwrap()).unwrap();
            prop_assert_eq!(prod_then_tau, tau_then_prod);
        }
    }
}
