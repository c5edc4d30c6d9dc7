//! The embedding of the free group into `T^(d-1) ⋊ Z^d`, where `T` is the
//! additive group of the Laurent ring: commutator matrices, their square
//! minors, and assembly of the polynomial systems whose roots modulo a
//! prime witness non-denseness.
//!
//! The product law of the semidirect product is
//! `(P, k)(P', k') = (P + α^k P', k + k')` with `α^k = α_1^{k_1}...α_d^{k_d}`
//! acting coordinatewise on the polynomial vector.

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::laurent::{LaurentError, LaurentPoly, Monomial, parse_poly};
use crate::words::{SubgroupBasis, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MagnusError {
    #[error("the embedding requires rank d >= 2")]
    RankTooSmall,
    #[error("generator index {0} out of range")]
    BadIndex(usize),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("a commutator matrix needs at least two generating words")]
    TooFewWords,
    #[error("the reference minor must be nonzero")]
    ZeroReferenceMinor,
    #[error("laurent arithmetic: {0}")]
    Laurent(#[from] LaurentError),
    #[error("system parse error at line {line}: {msg}")]
    SystemParse { line: usize, msg: String },
}

/// Image `(ξ1(w), ξ2(w))` of a word: a vector of `d - 1` Laurent
/// polynomials and its abelianization in `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MagnusElement {
    rank: usize,
    poly: Vec<LaurentPoly>,
    abel: Vec<i64>,
}

impl MagnusElement {
    pub fn identity(rank: usize) -> Result<MagnusElement, MagnusError> {
        if rank < 2 {
            return Err(MagnusError::RankTooSmall);
        }
        Ok(MagnusElement {
            rank,
            poly: vec![LaurentPoly::zero(rank); rank - 1],
            abel: vec![0; rank],
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The `T^(d-1)` component.
    pub fn poly(&self) -> &[LaurentPoly] {
        &self.poly
    }

    /// The `Z^d` component, which equals the abelianization of the word.
    pub fn abel(&self) -> &[i64] {
        &self.abel
    }
}

/// Image of a single letter under the embedding.
pub fn xi_generator(i: usize, sign: i8, d: usize) -> Result<MagnusElement, MagnusError> {
    if d < 2 {
        return Err(MagnusError::RankTooSmall);
    }
    if i == 0 || i > d {
        return Err(MagnusError::BadIndex(i));
    }
    let mut out = MagnusElement::identity(d)?;
    if sign >= 0 {
        if i < d {
            out.poly[i - 1] = LaurentPoly::one(d);
            out.abel[i - 1] = 1;
        } else {
            for j in 1..d {
                out.poly[j - 1] = LaurentPoly::beta(d, j)?;
            }
            out.abel[d - 1] = 1;
        }
    } else {
        let neg_inv = LaurentPoly::alpha(d, i, -1)?.neg();
        if i < d {
            out.poly[i - 1] = neg_inv;
            out.abel[i - 1] = -1;
        } else {
            for j in 1..d {
                out.poly[j - 1] = neg_inv.mul(&LaurentPoly::beta(d, j)?)?;
            }
            out.abel[d - 1] = -1;
        }
    }
    Ok(out)
}

/// Semidirect product law `(P, k)(P', k') = (P + α^k P', k + k')`.
pub fn magnus_mul(x: &MagnusElement, y: &MagnusElement) -> Result<MagnusElement, MagnusError> {
    if x.rank != y.rank {
        return Err(MagnusError::RankMismatch(x.rank, y.rank));
    }
    let d = x.rank;
    let alpha: Vec<i32> = x
        .abel
        .iter()
        .map(|&k| i32::try_from(k).expect("exponent fits i32"))
        .collect();
    let twist = Monomial::new(&alpha, &vec![0; d - 1], &[0, 0, 0])?;
    let mut poly = Vec::with_capacity(d - 1);
    for (p, q) in x.poly.iter().zip(&y.poly) {
        poly.push(p.add(&q.mul_monomial(&twist, &BigInt::one()))?);
    }
    let abel = x.abel.iter().zip(&y.abel).map(|(a, b)| a + b).collect();
    Ok(MagnusElement {
        rank: d,
        poly,
        abel,
    })
}

/// Left-to-right evaluation of the embedding on a reduced word.
pub fn xi_eval(w: &Word) -> Result<MagnusElement, MagnusError> {
    let d = w.rank();
    let mut acc = MagnusElement::identity(d)?;
    for &letter in w.letters() {
        let i = letter.unsigned_abs() as usize;
        let sign = if letter > 0 { 1 } else { -1 };
        acc = magnus_mul(&acc, &xi_generator(i, sign, d)?)?;
    }
    Ok(acc)
}

/// Matrix over `T` whose rows are `ξ1` of the commutators
/// `[τ_t(w_r), τ_t(w_s)]`, ordered lexicographically by `(r, s)`.
#[derive(Debug, Clone)]
pub struct CommutatorMatrix {
    rank: usize,
    rows: Vec<Vec<LaurentPoly>>,
    provenance: Vec<(usize, usize)>,
}

impl CommutatorMatrix {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rows(&self) -> &[Vec<LaurentPoly>] {
        &self.rows
    }

    /// One-based word index pairs `(r, s)` that produced each row.
    pub fn provenance(&self) -> &[(usize, usize)] {
        &self.provenance
    }
}

pub fn commutator_matrix(
    basis: &SubgroupBasis,
    t: usize,
) -> Result<CommutatorMatrix, MagnusError> {
    let d = basis.rank();
    if d < 2 {
        return Err(MagnusError::RankTooSmall);
    }
    let e = basis.len();
    if e < 2 {
        return Err(MagnusError::TooFewWords);
    }
    let twisted: Vec<Word> = basis
        .words()
        .iter()
        .map(|w| w.tau(t))
        .collect::<Result<_, _>>()
        .map_err(|_| MagnusError::BadIndex(t))?;
    let mut rows = Vec::new();
    let mut provenance = Vec::new();
    for r in 0..e {
        for s in r + 1..e {
            let comm = twisted[r]
                .commutator(&twisted[s])
                .expect("words share a rank");
            rows.push(xi_eval(&comm)?.poly.clone());
            provenance.push((r + 1, s + 1));
        }
    }
    Ok(CommutatorMatrix {
        rank: d,
        rows,
        provenance,
    })
}

/// One `(d-1) x (d-1)` minor: its determinant over the Laurent ring plus
/// the rows that produced it.
#[derive(Debug, Clone)]
pub struct Minor {
    /// Word index pairs of the chosen rows, in matrix order.
    pub rows: Vec<(usize, usize)>,
    pub det: LaurentPoly,
}

/// All `(d-1) x (d-1)` minors in lexicographic row-set order. Returns the
/// empty list when the matrix has fewer than `d - 1` rows. With `dedup`
/// set, rows that are zero or duplicates up to sign are dropped first;
/// such rows only contribute zero or repeated determinants.
pub fn minors(matrix: &CommutatorMatrix, dedup: bool) -> Vec<Minor> {
    let d = matrix.rank;
    let k = d - 1;
    let mut keep: Vec<usize> = Vec::new();
    if dedup {
        let mut seen: std::collections::HashSet<String> = std::collections::HashSet::new();
        for (i, row) in matrix.rows.iter().enumerate() {
            if row.iter().all(LaurentPoly::is_zero) {
                continue;
            }
            let fwd = row.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("|");
            let neg = row
                .iter()
                .map(|p| p.neg().to_string())
                .collect::<Vec<_>>()
                .join("|");
            let key = fwd.clone().min(neg);
            if seen.insert(key) {
                keep.push(i);
            }
        }
    } else {
        keep = (0..matrix.rows.len()).collect();
    }
    if keep.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut choice: Vec<usize> = (0..k).collect();
    loop {
        let picked: Vec<&Vec<LaurentPoly>> =
            choice.iter().map(|&c| &matrix.rows[keep[c]]).collect();
        let det = det_bareiss(&picked, d);
        out.push(Minor {
            rows: choice.iter().map(|&c| matrix.provenance[keep[c]]).collect(),
            det,
        });
        // Next k-combination of keep indices in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if choice[i] != i + keep.len() - k {
                choice[i] += 1;
                for j in i + 1..k {
                    choice[j] = choice[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Fraction-free determinant of a square matrix of Laurent polynomials.
/// Negative alpha exponents are cleared row by row first, the Bareiss
/// recurrence runs over the ordinary polynomial ring, and the clearing
/// monomial is divided back out at the end.
pub fn det_bareiss(rows: &[&Vec<LaurentPoly>], rank: usize) -> LaurentPoly {
    let n = rows.len();
    debug_assert!(rows.iter().all(|r| r.len() == n));
    if n == 0 {
        return LaurentPoly::one(rank);
    }
    let mut total_clear = vec![0i32; rank];
    let mut mat: Vec<Vec<LaurentPoly>> = Vec::with_capacity(n);
    for row in rows {
        let mut mins = vec![0i32; rank];
        for entry in row.iter() {
            for (m, e) in mins.iter_mut().zip(entry.min_alpha_exponent()) {
                *m = (*m).min(e);
            }
        }
        let clear: Vec<i32> = mins.iter().map(|&e| -e).collect();
        for (t, c) in total_clear.iter_mut().zip(&clear) {
            *t += c;
        }
        let mono = Monomial::new(&clear, &vec![0; rank - 1], &[0, 0, 0]).expect("nonnegative");
        mat.push(
            row.iter()
                .map(|p| p.mul_monomial(&mono, &BigInt::one()))
                .collect(),
        );
    }

    let mut sign = false;
    let mut prev = LaurentPoly::one(rank);
    for k in 0..n - 1 {
        if mat[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !mat[i][k].is_zero()) else {
                return LaurentPoly::zero(rank);
            };
            mat.swap(k, swap);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = mat[k][k]
                    .mul(&mat[i][j])
                    .and_then(|a| a.sub(&mat[i][k].mul(&mat[k][j])?))
                    .expect("uniform rank");
                mat[i][j] = num
                    .div_exact(&prev)
                    .expect("Bareiss division is exact over an integral domain");
            }
            mat[i][k] = LaurentPoly::zero(rank);
        }
        prev = mat[k][k].clone();
    }
    let mut det = mat[n - 1][n - 1].clone();
    if sign {
        det = det.neg();
    }
    let unclear = Monomial::new(&total_clear, &vec![0; rank - 1], &[0, 0, 0]).expect("nonnegative");
    det.div_monomial(&unclear)
        .expect("clearing monomial divides every term")
}

/// Role of a polynomial inside a [`PolySystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyTag {
    Gamma1Constraint,
    Gamma2Constraint,
    Gamma3Constraint,
    MinorVanishing,
}

impl PolyTag {
    pub fn name(&self) -> &'static str {
        match self {
            PolyTag::Gamma1Constraint => "gamma1",
            PolyTag::Gamma2Constraint => "gamma2",
            PolyTag::Gamma3Constraint => "gamma3",
            PolyTag::MinorVanishing => "minor",
        }
    }
}

/// Finite polynomial system with nonnegative exponents only, tagged by
/// role. The alpha-clearing exponent and the scaled reference determinant
/// are kept alongside for the root search.
#[derive(Debug, Clone)]
pub struct PolySystem {
    rank: usize,
    scaling: u32,
    polys: Vec<LaurentPoly>,
    tags: Vec<PolyTag>,
    scaled_y0: Option<LaurentPoly>,
}

impl PolySystem {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The clearing exponent `N`.
    pub fn scaling(&self) -> u32 {
        self.scaling
    }

    pub fn polys(&self) -> &[LaurentPoly] {
        &self.polys
    }

    pub fn tags(&self) -> &[PolyTag] {
        &self.tags
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LaurentPoly, PolyTag)> {
        self.polys.iter().zip(self.tags.iter().copied())
    }

    /// `(α_1...α_d)^N * det(Y0)`, when the system carries a reference minor.
    pub fn scaled_y0(&self) -> Option<&LaurentPoly> {
        self.scaled_y0.as_ref()
    }

    /// Assembles a system directly from tagged polynomials; used by the
    /// file parser and by tests. Gamma-1 entries of the shape `g1*S - 1`
    /// have `S` extracted for the root search.
    pub fn from_tagged(
        rank: usize,
        entries: Vec<(PolyTag, LaurentPoly)>,
    ) -> Result<PolySystem, MagnusError> {
        let mut polys = Vec::with_capacity(entries.len());
        let mut tags = Vec::with_capacity(entries.len());
        let mut scaled_y0 = None;
        for (tag, poly) in entries {
            if poly.rank() != rank {
                return Err(MagnusError::RankMismatch(rank, poly.rank()));
            }
            if poly.has_negative_alpha() {
                return Err(MagnusError::Laurent(LaurentError::NegativeExponent));
            }
            if tag == PolyTag::Gamma1Constraint {
                let g1 = gamma1_monomial(rank);
                let shifted = poly.add(&LaurentPoly::one(rank)).expect("same rank");
                scaled_y0 = Some(shifted.div_monomial(&g1).map_err(|_| {
                    MagnusError::SystemParse {
                        line: 0,
                        msg: "gamma1 polynomial is not of the form g1*S - 1".into(),
                    }
                })?);
            }
            polys.push(poly);
            tags.push(tag);
        }
        Ok(PolySystem {
            rank,
            scaling: 0,
            polys,
            tags,
            scaled_y0,
        })
    }

    /// An equivalent system for deciding emptiness of the complex variety
    /// and bounding the primes that admit roots. The gamma-1 constraint
    /// already forces every alpha value to be a unit, so alpha-monomial
    /// factors can be stripped from the minors, the clearing power dropped
    /// to one, and the two trace constraints merged into a single
    /// disequality. Common roots modulo any prime are in bijection with
    /// those of the original system, so both the emptiness answer and the
    /// certificate's prime bound transfer.
    pub fn emptiness_system(&self) -> Result<Vec<LaurentPoly>, MagnusError> {
        let d = self.rank;
        // The trace pair merges only when it has exactly the built shape.
        let g2_poly = self
            .iter()
            .find(|(_, t)| *t == PolyTag::Gamma2Constraint)
            .map(|(p, _)| p);
        let g3_poly = self
            .iter()
            .find(|(_, t)| *t == PolyTag::Gamma3Constraint)
            .map(|(p, _)| p);
        let g3_expected = LaurentPoly::gamma(d, 2)?
            .mul(&LaurentPoly::gamma(d, 3)?)?
            .sub(&LaurentPoly::one(d))?;
        let trace_shift = match (g2_poly, g3_poly) {
            (Some(g2), Some(g3)) if *g3 == g3_expected => {
                let shifted = g2.add(&LaurentPoly::gamma(d, 2)?)?;
                (!shifted.has_gamma()).then_some(shifted)
            }
            _ => None,
        };

        let mut out: Vec<LaurentPoly> = Vec::new();
        let mut seen_minors: std::collections::HashSet<String> = std::collections::HashSet::new();
        for (poly, tag) in self.iter() {
            match tag {
                PolyTag::Gamma1Constraint => {
                    let s0 = self
                        .scaled_y0
                        .as_ref()
                        .ok_or(MagnusError::ZeroReferenceMinor)?
                        .alpha_primitive();
                    let prod = Monomial::new(&vec![1; d], &vec![0; d - 1], &[0, 0, 0])?;
                    out.push(
                        s0.mul_monomial(&prod, &BigInt::one())
                            .mul(&LaurentPoly::gamma(d, 1)?)?
                            .sub(&LaurentPoly::one(d))?,
                    );
                }
                PolyTag::Gamma2Constraint => match &trace_shift {
                    // A - g2 with g2*g3 - 1 pins A away from zero; a single
                    // inverse variable does the same.
                    Some(shift) => out.push(
                        shift
                            .mul(&LaurentPoly::gamma(d, 2)?)?
                            .sub(&LaurentPoly::one(d))?,
                    ),
                    None => out.push(poly.clone()),
                },
                PolyTag::Gamma3Constraint => {
                    if trace_shift.is_none() {
                        out.push(poly.clone());
                    }
                }
                PolyTag::MinorVanishing => {
                    let primitive = poly.alpha_primitive();
                    if primitive.is_zero() {
                        continue;
                    }
                    if seen_minors.insert(primitive.to_string()) {
                        out.push(primitive);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Serialized form consumed by the `roots` subcommand: a `rank` header,
    /// a `scaling` line, then one `tag: poly` line per polynomial.
    pub fn to_text(&self) -> String {
        let mut out = format!("rank {}\nscaling {}\n", self.rank, self.scaling);
        for (poly, tag) in self.iter() {
            out.push_str(&format!("{}: {}\n", tag.name(), poly));
        }
        out
    }

    pub fn parse(text: &str) -> Result<PolySystem, MagnusError> {
        let mut rank: Option<usize> = None;
        let mut scaling = 0u32;
        let mut entries: Vec<(PolyTag, LaurentPoly)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if rank.is_none() {
                let d = line
                    .strip_prefix("rank")
                    .and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| MagnusError::SystemParse {
                        line: line_no,
                        msg: "expected `rank <d>` header".into(),
                    })?;
                rank = Some(d);
                continue;
            }
            if let Some(v) = line.strip_prefix("scaling") {
                scaling = v.trim().parse().map_err(|_| MagnusError::SystemParse {
                    line: line_no,
                    msg: "bad scaling value".into(),
                })?;
                continue;
            }
            let (tag_name, poly_text) =
                line.split_once(':').ok_or_else(|| MagnusError::SystemParse {
                    line: line_no,
                    msg: "expected `tag: polynomial`".into(),
                })?;
            let tag = match tag_name.trim() {
                "gamma1" => PolyTag::Gamma1Constraint,
                "gamma2" => PolyTag::Gamma2Constraint,
                "gamma3" => PolyTag::Gamma3Constraint,
                "minor" => PolyTag::MinorVanishing,
                other => {
                    return Err(MagnusError::SystemParse {
                        line: line_no,
                        msg: format!("unknown tag `{other}`"),
                    })
                }
            };
            let poly = parse_poly(rank.unwrap(), poly_text.trim()).map_err(|e| {
                MagnusError::SystemParse {
                    line: line_no,
                    msg: e.to_string(),
                }
            })?;
            entries.push((tag, poly));
        }
        let rank = rank.ok_or(MagnusError::SystemParse {
            line: 1,
            msg: "missing `rank <d>` header".into(),
        })?;
        let mut sys = PolySystem::from_tagged(rank, entries)?;
        sys.scaling = scaling;
        Ok(sys)
    }
}

fn gamma1_monomial(rank: usize) -> Monomial {
    Monomial::new(&vec![0; rank], &vec![0; rank - 1], &[1, 0, 0]).expect("valid")
}

fn alpha_power_monomial(rank: usize, n: u32) -> Monomial {
    Monomial::new(&vec![n as i32; rank], &vec![0; rank - 1], &[0, 0, 0]).expect("valid")
}

/// Builds the cleared system for one reference minor `Y0` of the full-group
/// matrix and the minors of the twisted subgroup matrix:
///
/// ```text
/// { g1 * (α_1...α_d)^N * det(Y0) - 1,
///   α_1 + ... + α_d - d - g2,
///   g2 * g3 - 1 }
/// ∪ { (α_1...α_d)^(N(d-1)) * det(Y) }
/// ```
///
/// with the smallest `N >= 1` that clears every negative alpha exponent.
/// Scaling a `(d-1) x (d-1)` minor matrix by `(α_1...α_d)^N` multiplies its
/// determinant by `(α_1...α_d)^(N(d-1))`, hence the two different powers.
pub fn build_system(
    y0: &Minor,
    minors_h: &[Minor],
    rank: usize,
) -> Result<PolySystem, MagnusError> {
    if rank < 2 {
        return Err(MagnusError::RankTooSmall);
    }
    if y0.det.is_zero() {
        return Err(MagnusError::ZeroReferenceMinor);
    }
    let k = (rank - 1) as i64;
    let mut n_min: i64 = 1;
    for e in y0.det.min_alpha_exponent() {
        n_min = n_min.max(-(e as i64));
    }
    for minor in minors_h {
        for e in minor.det.min_alpha_exponent() {
            // Need N*(d-1) + e >= 0.
            n_min = n_min.max((-(e as i64) + k - 1) / k);
        }
    }
    let n = u32::try_from(n_min).expect("clearing exponent fits u32");

    let one = BigInt::one();
    let mut entries = Vec::new();
    let scaled_y0 = y0.det.mul_monomial(&alpha_power_monomial(rank, n), &one);
    let g1_poly = scaled_y0
        .mul(&LaurentPoly::gamma(rank, 1)?)?
        .sub(&LaurentPoly::one(rank))?;
    entries.push((PolyTag::Gamma1Constraint, g1_poly));

    let mut trace = LaurentPoly::zero(rank);
    for i in 1..=rank {
        trace = trace.add(&LaurentPoly::alpha(rank, i, 1)?)?;
    }
    let g2_poly = trace
        .sub(&LaurentPoly::constant(rank, rank as i64))?
        .sub(&LaurentPoly::gamma(rank, 2)?)?;
    entries.push((PolyTag::Gamma2Constraint, g2_poly));

    let g3_poly = LaurentPoly::gamma(rank, 2)?
        .mul(&LaurentPoly::gamma(rank, 3)?)?
        .sub(&LaurentPoly::one(rank))?;
    entries.push((PolyTag::Gamma3Constraint, g3_poly));

    let minor_scale = alpha_power_monomial(rank, n * (rank as u32 - 1));
    for minor in minors_h {
        entries.push((
            PolyTag::MinorVanishing,
            minor.det.mul_monomial(&minor_scale, &one),
        ));
    }

    let mut sys = PolySystem::from_tagged(rank, entries)?;
    sys.scaling = n;
    debug_assert!(sys.polys.iter().all(|p| !p.has_negative_alpha()));
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{random_word, SplitMix64};
    use crate::laurent::LaurentPoly;

    fn wd(rank: usize, letters: &[i32]) -> Word {
        Word::reduce(rank, letters).unwrap()
    }

    /// `(1 - a2) + (a1 - 1) b1` for rank 2: the single entry of the
    /// full-group commutator matrix.
    fn xi1_comm_d2() -> LaurentPoly {
        let one = LaurentPoly::one(2);
        let a1 = LaurentPoly::alpha(2, 1, 1).unwrap();
        let a2 = LaurentPoly::alpha(2, 2, 1).unwrap();
        let b1 = LaurentPoly::beta(2, 1).unwrap();
        one.sub(&a2)
            .unwrap()
            .add(&a1.sub(&one).unwrap().mul(&b1).unwrap())
            .unwrap()
    }

    #[test]
    fn generator_images() {
        let x1 = xi_generator(1, 1, 2).unwrap();
        assert_eq!(x1.poly()[0], LaurentPoly::one(2));
        assert_eq!(x1.abel(), &[1, 0]);

        let x2 = xi_generator(2, 1, 2).unwrap();
        assert_eq!(x2.poly()[0], LaurentPoly::beta(2, 1).unwrap());
        assert_eq!(x2.abel(), &[0, 1]);

        let x2_inv = xi_generator(2, -1, 2).unwrap();
        let expected = LaurentPoly::alpha(2, 2, -1)
            .unwrap()
            .neg()
            .mul(&LaurentPoly::beta(2, 1).unwrap())
            .unwrap();
        assert_eq!(x2_inv.poly()[0], expected);
        assert_eq!(x2_inv.abel(), &[0, -1]);

        assert!(xi_generator(1, 1, 1).is_err());
    }

    #[test]
    fn product_law() {
        let d = 2;
        let x1 = xi_generator(1, 1, d).unwrap();
        let x1_inv = xi_generator(1, -1, d).unwrap();
        let prod = magnus_mul(&x1, &x1_inv).unwrap();
        assert_eq!(prod, MagnusElement::identity(d).unwrap());

        // xi(x1) * xi(x2) = (1 + a1*b1, (1, 1)).
        let x2 = xi_generator(2, 1, d).unwrap();
        let p = magnus_mul(&x1, &x2).unwrap();
        let expected = LaurentPoly::one(d)
            .add(
                &LaurentPoly::alpha(d, 1, 1)
                    .unwrap()
                    .mul(&LaurentPoly::beta(d, 1).unwrap())
                    .unwrap(),
            )
            .unwrap();
        assert_eq!(p.poly()[0], expected);
        assert_eq!(p.abel(), &[1, 1]);

        let id = MagnusElement::identity(d).unwrap();
        assert_eq!(magnus_mul(&id, &x2).unwrap(), x2);
    }

    #[test]
    fn xi_eval_examples() {
        let empty = Word::empty(2);
        assert_eq!(xi_eval(&empty).unwrap(), MagnusElement::identity(2).unwrap());

        // The commutator [x1, x2] lands on (1 - a2) + (a1 - 1) b1 with
        // trivial abelianization.
        let comm = wd(2, &[1]).commutator(&wd(2, &[2])).unwrap();
        let img = xi_eval(&comm).unwrap();
        assert_eq!(img.poly()[0], xi1_comm_d2());
        assert_eq!(img.abel(), &[0, 0]);

        let w = wd(2, &[1, 2, -1]);
        assert_eq!(xi_eval(&w).unwrap().abel(), &[0, 1]);
    }

    #[test]
    fn xi_is_a_homomorphism() {
        let mut rng = SplitMix64::new(0x5eed_3001);
        for d in [2usize, 3] {
            for _ in 0..60 {
                let u = random_word(&mut rng, d, 8);
                let v = random_word(&mut rng, d, 8);
                let prod = u.multiply(&v).unwrap();
                let lhs = xi_eval(&prod).unwrap();
                let rhs = magnus_mul(&xi_eval(&u).unwrap(), &xi_eval(&v).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
                assert_eq!(lhs.abel(), prod.abelianization().as_slice());
            }
        }
    }

    #[test]
    fn commutator_matrix_full_group_d2() {
        let basis = SubgroupBasis::full_group(2).unwrap();
        let m = commutator_matrix(&basis, 2).unwrap();
        assert_eq!(m.rows().len(), 1);
        assert_eq!(m.provenance(), &[(1, 2)]);
        assert_eq!(m.rows()[0][0], xi1_comm_d2());
    }

    #[test]
    fn commutator_matrix_repeated_word_gives_zero_row() {
        let w1 = wd(2, &[1, 2]);
        let basis = SubgroupBasis::new(2, vec![w1.clone(), w1]).unwrap();
        let m = commutator_matrix(&basis, 2).unwrap();
        assert!(m.rows()[0][0].is_zero());
        // The zero row is dropped by dedup, leaving no minors at all.
        assert!(minors(&m, true).is_empty());
        assert_eq!(minors(&m, false).len(), 1);
    }

    #[test]
    fn commutator_matrix_full_group_d3() {
        let basis = SubgroupBasis::full_group(3).unwrap();
        let m = commutator_matrix(&basis, 3).unwrap();
        assert_eq!(m.rows().len(), 3);
        assert_eq!(m.provenance(), &[(1, 2), (1, 3), (2, 3)]);
        let comm12 = wd(3, &[1]).commutator(&wd(3, &[2])).unwrap();
        assert_eq!(m.rows()[0], xi_eval(&comm12).unwrap().poly());
        let mnr = minors(&m, false);
        assert_eq!(mnr.len(), 3);
        assert_eq!(mnr[0].rows, vec![(1, 2), (1, 3)]);
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let mut rng = SplitMix64::new(0x5eed_3002);
        let rank = 3;
        let rand_poly = |rng: &mut SplitMix64| {
            let mut p = LaurentPoly::zero(rank);
            for _ in 0..3 {
                let alpha: Vec<i32> = (0..rank).map(|_| rng.below(5) as i32 - 2).collect();
                let beta: Vec<i32> = (0..rank - 1).map(|_| rng.below(2) as i32).collect();
                let m = Monomial::new(&alpha, &beta, &[0, 0, 0]).unwrap();
                p = p
                    .add(
                        &LaurentPoly::from_terms(
                            rank,
                            [(m, BigInt::from(rng.below(9) as i64 - 4))],
                        )
                        .unwrap(),
                    )
                    .unwrap();
            }
            p
        };
        for _ in 0..20 {
            let a = rand_poly(&mut rng);
            let b = rand_poly(&mut rng);
            let c = rand_poly(&mut rng);
            let d = rand_poly(&mut rng);
            let row1 = vec![a.clone(), b.clone()];
            let row2 = vec![c.clone(), d.clone()];
            let det = det_bareiss(&[&row1, &row2], rank);
            let expected = a.mul(&d).unwrap().sub(&b.mul(&c).unwrap()).unwrap();
            assert_eq!(det, expected);
        }
    }

    #[test]
    fn bareiss_zero_on_equal_rows() {
        let rank = 3;
        let basis = SubgroupBasis::full_group(3).unwrap();
        let m = commutator_matrix(&basis, 3).unwrap();
        let row = &m.rows()[0];
        let det = det_bareiss(&[row, row], rank);
        assert!(det.is_zero());
    }

    #[test]
    fn minors_single_entry() {
        let basis = SubgroupBasis::full_group(2).unwrap();
        let m = commutator_matrix(&basis, 2).unwrap();
        let y = minors(&m, true);
        assert_eq!(y.len(), 1);
        assert_eq!(y[0].det, xi1_comm_d2());
    }

    #[test]
    fn build_system_full_group_d2() {
        let basis = SubgroupBasis::full_group(2).unwrap();
        let m = commutator_matrix(&basis, 2).unwrap();
        let y = minors(&m, true);
        let sys = build_system(&y[0], &y, 2).unwrap();
        assert_eq!(sys.scaling(), 1);
        assert_eq!(sys.polys().len(), 4);
        assert!(sys.polys().iter().all(|p| !p.has_negative_alpha()));

        // Scaled determinant: a1*a2*((1 - a2) + (a1 - 1) b1).
        let scale = Monomial::new(&[1, 1], &[0], &[0, 0, 0]).unwrap();
        let scaled = xi1_comm_d2().mul_monomial(&scale, &BigInt::one());
        assert_eq!(sys.scaled_y0().unwrap(), &scaled);

        let g1_expected = scaled
            .mul(&LaurentPoly::gamma(2, 1).unwrap())
            .unwrap()
            .sub(&LaurentPoly::one(2))
            .unwrap();
        assert_eq!(sys.polys()[0], g1_expected);

        let g2_expected = LaurentPoly::alpha(2, 1, 1)
            .unwrap()
            .add(&LaurentPoly::alpha(2, 2, 1).unwrap())
            .unwrap()
            .sub(&LaurentPoly::constant(2, 2))
            .unwrap()
            .sub(&LaurentPoly::gamma(2, 2).unwrap())
            .unwrap();
        assert_eq!(sys.polys()[1], g2_expected);

        let g3_expected = LaurentPoly::gamma(2, 2)
            .unwrap()
            .mul(&LaurentPoly::gamma(2, 3).unwrap())
            .unwrap()
            .sub(&LaurentPoly::one(2))
            .unwrap();
        assert_eq!(sys.polys()[2], g3_expected);

        // The lone minor-vanishing member equals the scaled determinant.
        assert_eq!(sys.polys()[3], scaled);
    }

    #[test]
    fn build_system_without_subgroup_minors() {
        let basis = SubgroupBasis::full_group(2).unwrap();
        let m = commutator_matrix(&basis, 2).unwrap();
        let y = minors(&m, true);
        let sys = build_system(&y[0], &[], 2).unwrap();
        assert_eq!(sys.polys().len(), 3);
        assert!(matches!(
            build_system(
                &Minor {
                    rows: vec![],
                    det: LaurentPoly::zero(2)
                },
                &[],
                2
            ),
            Err(MagnusError::ZeroReferenceMinor)
        ));
    }

    #[test]
    fn emptiness_system_shares_roots_with_the_original() {
        // The reduced system must admit a root modulo p exactly when the
        // original does; checked by exhaustive enumeration.
        let wd2 = |letters: &[i32]| Word::reduce(2, letters).unwrap();
        let bases = vec![
            SubgroupBasis::full_group(2).unwrap(),
            SubgroupBasis::new(2, vec![wd2(&[1, 2]), wd2(&[2, 1]), wd2(&[1, 1, 2])]).unwrap(),
            SubgroupBasis::new(
                2,
                vec![wd2(&[1]), wd2(&[2, 1, -2, -2]), wd2(&[2, 2, 1, -2]), wd2(&[2, 2, 2])],
            )
            .unwrap(),
        ];
        let full = SubgroupBasis::full_group(2).unwrap();
        let y_f = minors(&commutator_matrix(&full, 2).unwrap(), true);
        for basis in &bases {
            for t in 1..=2 {
                let mh = minors(&commutator_matrix(basis, t).unwrap(), true);
                let sys = build_system(&y_f[0], &mh, 2).unwrap();
                let reduced = sys.emptiness_system().unwrap();
                for p in [3u64, 5] {
                    let original_has = has_root_mod_p(sys.polys(), 2, p);
                    let reduced_has = has_root_mod_p(&reduced, 2, p);
                    assert_eq!(original_has, reduced_has, "p={p} t={t}");
                }
            }
        }
    }

    fn has_root_mod_p(polys: &[LaurentPoly], d: usize, p: u64) -> bool {
        let nvars = 2 * d + 2;
        let mut assignment = vec![0u64; nvars];
        loop {
            let alpha = &assignment[..d];
            let beta = &assignment[d..2 * d - 1];
            let gamma = &assignment[2 * d - 1..];
            if alpha.iter().all(|&a| a != 0)
                && polys
                    .iter()
                    .all(|poly| poly.eval_mod_p(p, alpha, beta, gamma) == Ok(0))
            {
                return true;
            }
            let mut i = nvars;
            loop {
                if i == 0 {
                    return false;
                }
                i -= 1;
                assignment[i] += 1;
                if assignment[i] < p {
                    break;
                }
                assignment[i] = 0;
            }
        }
    }

    #[test]
    fn system_text_round_trip() {
        let basis = SubgroupBasis::full_group(2).unwrap();
        let m = commutator_matrix(&basis, 2).unwrap();
        let y = minors(&m, true);
        let sys = build_system(&y[0], &y, 2).unwrap();
        let text = sys.to_text();
        let back = PolySystem::parse(&text).unwrap();
        assert_eq!(back.rank(), sys.rank());
        assert_eq!(back.scaling(), sys.scaling());
        assert_eq!(back.polys(), sys.polys());
        assert_eq!(back.scaled_y0(), sys.scaled_y0());
    }
}
