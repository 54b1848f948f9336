mod common;

use std::time::Instant;

#[test]
fn full_decoder_matches_finite_differences() {
    let start = Instant::now();
    for seed in 0..5u64 {
        let report = common::decoder_gradcheck(seed);
        assert!(report.passed(), "seed {seed}: {report:?}");
        assert!(report.checked > 100);
    }
    assert!(start.elapsed().as_secs() < 120);
}
