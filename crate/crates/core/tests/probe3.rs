//! Branch-level timing for one corpus entry. Run with
//! `cargo test --release -p sudense-core --test probe3 -- --ignored --nocapture`.

use std::time::Instant;

use sudense_core::corpus::generate_corpus;
use sudense_core::decider::ab_dense;
use sudense_core::groebner::{null_certificate, variety_empty_with, RatPoly};
use sudense_core::laurent::MonomialOrder;
use sudense_core::magnus::{build_system, commutator_matrix, minors, Minor};
use sudense_core::modular::root_search;
use sudense_core::words::SubgroupBasis;

#[test]
#[ignore]
fn probe_entry_33() {
    let corpus = generate_corpus(11, 200, 6);
    let basis = &corpus[100];
    let d = basis.rank();
    println!(
        "entry 33: d={d} e={} words={:?}",
        basis.len(),
        basis.words().iter().map(|w| w.to_string()).collect::<Vec<_>>()
    );
    let (ab, _) = ab_dense(basis);
    println!("ab_dense = {ab}");
    if !ab || d < 2 {
        return;
    }
    let full = SubgroupBasis::full_group(d).unwrap();
    let y_f: Vec<Minor> = minors(&commutator_matrix(&full, d).unwrap(), true)
        .into_iter()
        .filter(|m| !m.det.is_zero())
        .collect();
    for t in 1..=d {
        let mh = minors(&commutator_matrix(basis, t).unwrap(), true);
        for (yi, y0) in y_f.iter().enumerate() {
            let sys = build_system(y0, &mh, d).unwrap();
            let reduced = sys.emptiness_system().unwrap();
            let rat: Vec<RatPoly> = reduced
                .iter()
                .map(|p| RatPoly::from_laurent(p).unwrap())
                .collect();
            let sizes: Vec<usize> = reduced.iter().map(|q| q.num_terms()).collect();
            let degs: Vec<i64> = reduced
                .iter()
                .map(|q| q.terms().map(|(m, _)| m.total_degree()).max().unwrap_or(0))
                .collect();
            println!("t={t} y0={yi} sizes={sizes:?} degs={degs:?}");
            let t0 = Instant::now();
            let empty = variety_empty_with(&rat, MonomialOrder::GrevLex, 2_000);
            println!(
                "t={t} y0={yi}: variety_empty={:?} in {:.2}s",
                empty,
                t0.elapsed().as_secs_f64()
            );
            match empty {
                Ok(true) => {
                    let t1 = Instant::now();
                    let cert = null_certificate(&reduced, MonomialOrder::GrevLex, 400_000);
                    println!(
                        "  certificate a={:?} in {:.2}s",
                        cert.as_ref().map(|c| c.a.to_string()),
                        t1.elapsed().as_secs_f64()
                    );
                }
                Ok(false) => {
                    for p in [3u64, 5, 7, 11, 13] {
                        let t1 = Instant::now();
                        let root = root_search(&sys, p, 50_000_000);
                        println!(
                            "  root mod {p}: {:?} in {:.2}s",
                            root.as_ref().map(|r| r.is_some()),
                            t1.elapsed().as_secs_f64()
                        );
                        if matches!(root, Ok(Some(_))) {
                            break;
                        }
                    }
                }
                Err(_) => {}
            }
        }
    }
}
