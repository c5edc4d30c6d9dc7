//! Experiments with variety-preserving simplifications of the systems fed
//! to the basis computation. Run with
//! `cargo test --release -p sudense-core --test probe2 -- --ignored --nocapture`.

use std::time::Instant;

use num_bigint::BigInt;
use sudense_core::corpus::generate_corpus;
use sudense_core::groebner::{variety_empty_with, RatPoly};
use sudense_core::laurent::{LaurentPoly, Monomial, MonomialOrder};
use sudense_core::magnus::{build_system, commutator_matrix, minors, Minor, PolyTag};
use sudense_core::words::SubgroupBasis;

/// Divides out the alpha-monomial content of a polynomial.
fn alpha_primitive(p: &LaurentPoly) -> LaurentPoly {
    if p.is_zero() {
        return p.clone();
    }
    let rank = p.rank();
    let mins = p.min_alpha_exponent();
    let mono = Monomial::new(&mins, &vec![0; rank - 1], &[0, 0, 0]).unwrap();
    p.div_monomial(&mono).unwrap()
}

fn variants(basis: &SubgroupBasis, t: usize, y0: &Minor) -> Vec<(String, Vec<LaurentPoly>)> {
    let d = basis.rank();
    let mat_h = commutator_matrix(basis, t).unwrap();
    let minors_h = minors(&mat_h, true);
    let sys = build_system(y0, &minors_h, d).unwrap();
    let original: Vec<LaurentPoly> = sys.polys().to_vec();

    // Variant: alpha-primitive minors, power-1 clearing on the reference
    // polynomial, and a single merged disequality for the trace.
    let one = LaurentPoly::one(d);
    let mut trace = LaurentPoly::zero(d);
    let mut prod_alpha = Monomial::one(d);
    for i in 1..=d {
        trace = trace.add(&LaurentPoly::alpha(d, i, 1).unwrap()).unwrap();
        prod_alpha = prod_alpha.mul(
            &Monomial::new(
                &(0..d).map(|k| if k + 1 == i { 1 } else { 0 }).collect::<Vec<_>>(),
                &vec![0; d - 1],
                &[0, 0, 0],
            )
            .unwrap(),
        );
    }
    let s0 = alpha_primitive(&y0.det);
    let g1 = s0
        .mul_monomial(&prod_alpha, &BigInt::from(1))
        .mul(&LaurentPoly::gamma(d, 1).unwrap())
        .unwrap()
        .sub(&one)
        .unwrap();
    let g2 = trace
        .sub(&LaurentPoly::constant(d, d as i64))
        .unwrap()
        .mul(&LaurentPoly::gamma(d, 2).unwrap())
        .unwrap()
        .sub(&one)
        .unwrap();
    let mut reduced = vec![g1, g2];
    for minor in &minors_h {
        if minor.det.is_zero() {
            continue;
        }
        reduced.push(alpha_primitive(&minor.det));
    }

    // Variant: the reduced system without gamma constraints at all.
    let bare: Vec<LaurentPoly> = reduced[2..].to_vec();

    let _ = original;
    vec![
        ("bare-minors".into(), bare),
        ("reduced".into(), reduced),
    ]
}

#[test]
#[ignore]
fn probe_variants() {
    let corpus = generate_corpus(11, 40, 6);
    for idx in [28usize, 10, 8] {
        let basis = &corpus[idx];
        let d = basis.rank();
        if d < 2 {
            continue;
        }
        let full = SubgroupBasis::full_group(d).unwrap();
        let mat_f = commutator_matrix(&full, d).unwrap();
        let y_f = minors(&mat_f, true);
        for t in 1..=d {
            for (yi, y0) in y_f.iter().enumerate() {
                for (name, sys) in variants(basis, t, y0) {
                    let rat: Vec<RatPoly> = sys
                        .iter()
                        .map(|p| RatPoly::from_laurent(p).unwrap())
                        .collect();
                    if rat.iter().all(|p| p.is_zero()) {
                        continue;
                    }
                    let t0 = Instant::now();
                    let r = variety_empty_with(&rat, MonomialOrder::GrevLex, 5_000);
                    println!(
                        "[{idx}] t={t} y0={yi} {name}: {:?} in {:.2}s",
                        r,
                        t0.elapsed().as_secs_f64()
                    );
                }
            }
        }
    }
}
