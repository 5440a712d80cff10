mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use common::fm::{decide, random_sentence};
use common::random_net;
use nnq_core::query::{evaluate_query, QueryAnswer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_sentences_agree_with_fourier_motzkin() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut slowest = (std::time::Duration::ZERO, String::new());
    for case in 0..60 {
        let m = if case % 2 == 0 { 1 } else { 2 };
        let width = rng.gen_range(1..=2);
        let net = random_net(&mut rng, m, &[width]);
        let s = random_sentence(&mut rng, m, 3, 4);
        let text = s.render();
        let t = Instant::now();
        let got = evaluate_query(&net, &text, &BTreeMap::new(), &[]).unwrap();
        let el = t.elapsed();
        if el > slowest.0 {
            slowest = (el, text.clone());
        }
        let want = decide(&net, &s);
        assert_eq!(got, QueryAnswer::Closed(want), "case {case}: {text}");
    }
    println!("slowest {:?}: {}", slowest.0, slowest.1);
}
