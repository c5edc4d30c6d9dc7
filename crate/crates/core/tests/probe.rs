//! Manual timing probe for the decision pipeline; run with
//! `cargo test --release -p sudense-core --test probe -- --ignored --nocapture`.

use std::time::Instant;

use sudense_core::corpus::generate_corpus;
use sudense_core::decider::{ab_dense, Budget};
use sudense_core::groebner::{null_certificate, variety_empty_with, RatPoly};
use sudense_core::laurent::MonomialOrder;
use sudense_core::magnus::{build_system, commutator_matrix, minors, Minor};
use sudense_core::words::SubgroupBasis;

fn probe_basis(idx: usize, basis: &SubgroupBasis, budget: &Budget) {
    let d = basis.rank();
    let (ab, _) = ab_dense(basis);
    if !ab || d < 2 {
        println!("[{idx}] d={d} e={} gate-handled", basis.len());
        return;
    }
    let full = SubgroupBasis::full_group(d).unwrap();
    let mat_f = commutator_matrix(&full, d).unwrap();
    let y_f: Vec<Minor> = minors(&mat_f, true)
        .into_iter()
        .filter(|m| !m.det.is_zero())
        .collect();
    for t in 1..=d {
        let mat_h = commutator_matrix(basis, t).unwrap();
        let minors_h = minors(&mat_h, true);
        for (yi, y0) in y_f.iter().enumerate() {
            let t0 = Instant::now();
            let sys = build_system(y0, &minors_h, d).unwrap();
            let built = t0.elapsed();
            let sizes: Vec<usize> = sys.polys().iter().map(|p| p.num_terms()).collect();
            println!(
                "[{idx}] t={t} y0={yi} building sizes={sizes:?} N={} ({:.1}ms)",
                sys.scaling(),
                built.as_secs_f64() * 1000.0
            );
            let rat: Vec<RatPoly> = sys
                .polys()
                .iter()
                .map(|p| RatPoly::from_laurent(p).unwrap())
                .collect();
            let t1 = Instant::now();
            let empty = variety_empty_with(&rat, MonomialOrder::GrevLex, 20_000);
            let ve = t1.elapsed();
            let mut cert_ms = 0.0;
            let mut a_str = String::from("-");
            if empty == Ok(true) {
                let t2 = Instant::now();
                let cert =
                    null_certificate(sys.polys(), MonomialOrder::GrevLex, budget.groebner_steps);
                cert_ms = t2.elapsed().as_secs_f64() * 1000.0;
                a_str = cert.map(|c| c.a.to_string()).unwrap_or("ERR".into());
            }
            println!(
                "[{idx}] d={d} e={} t={t} y0={yi} polys={} max_terms={} build={:.1}ms ve={:?}({:.1}ms) cert a={} ({:.1}ms)",
                basis.len(),
                sizes.len(),
                sizes.iter().max().unwrap(),
                built.as_secs_f64() * 1000.0,
                empty,
                ve.as_secs_f64() * 1000.0,
                a_str,
                cert_ms,
            );
        }
    }
}

#[test]
#[ignore]
fn probe_corpus_entries() {
    let budget = Budget::default();
    let corpus = generate_corpus(11, 40, 6);
    for (idx, basis) in corpus.iter().enumerate().skip(27) {
        let t0 = Instant::now();
        probe_basis(idx, basis, &budget);
        println!("[{idx}] total {:.2}s", t0.elapsed().as_secs_f64());
        if t0.elapsed().as_secs_f64() > 120.0 {
            break;
        }
    }
}
