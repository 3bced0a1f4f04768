//! Regression fixture: a 3x3 PSD pair with `Re Tr[ABABBA] < 0`.

use bmv_lab_core::{negative_word_search, word_trace, WordSearchResult, WordSpec};

fn fixture() -> WordSearchResult {
    let text = include_str!("fixtures/abab_negative.json");
    serde_json::from_str(text).expect("fixture parses and both matrices are unit PSD")
}

#[test]
fn stored_pair_still_has_negative_trace() {
    let f = fixture();
    assert_eq!(f.word.to_string(), "010110");
    let tr = word_trace(f.a.as_mat(), f.b.as_mat(), &f.word).unwrap();
    assert!(tr.re < 0.0, "Re Tr = {}", tr.re);
    assert!((tr.re - f.trace).abs() <= 1e-20);
    // Every cyclic rotation of the word shares the trace.
    for r in 1..6 {
        let t = word_trace(f.a.as_mat(), f.b.as_mat(), &f.word.rotated(r)).unwrap();
        assert!((t - tr).norm() <= 1e-16);
    }
}

#[test]
fn search_reproduces_the_fixture() {
    let f = fixture();
    let again =
        negative_word_search(&"ABABBA".parse::<WordSpec>().unwrap(), 3, f.trials, f.seed).unwrap();
    assert_eq!(again.trace.to_bits(), f.trace.to_bits());
    assert_eq!(again.a.as_mat(), f.a.as_mat());
}
