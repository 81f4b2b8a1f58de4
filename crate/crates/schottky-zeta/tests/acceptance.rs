//! Runs every acceptance criterion and prints one PASS/FAIL line for each.
//! This target has no test harness, so the lines appear without
//! `--nocapture`.

use schottky_zeta::cli::verify;

/// Criterion 3 compares the second-order expansion of the three-funnel
/// intermediate zeta with a closed form in `x2 = e^{s z^2 / (2 log(1/|z|))}`.
/// The hyperbolic length of `a1 A2` is `8 log(1/z) + 2 z^2 + O(z^4)`, which
/// forces `x2 = e^{s z^2 / log(1/|z|)}`; with that exponent the closed form
/// matches to 1e-11, with the stated one it does not. The harness keeps the
/// stated exponent and reports the mismatch.
const EXPECTED_FAILURES: [usize; 1] = [3];

fn main() {
    let results = verify::run(&[]);
    assert_eq!(results.len(), 11);
    for r in &results {
        println!(
            "criterion {:>2} {}: {} (measured: {}; target: {})",
            r.id,
            if r.pass { "PASS" } else { "FAIL" },
            r.title,
            r.measured,
            r.target
        );
    }
    let unexpected: Vec<usize> = results
        .iter()
        .filter(|r| r.pass == EXPECTED_FAILURES.contains(&r.id))
        .map(|r| r.id)
        .collect();
    if !unexpected.is_empty() {
        eprintln!("criteria with unexpected outcome: {unexpected:?}");
        std::process::exit(1);
    }
    println!(
        "acceptance: {}/{} criteria passed, expected failures {EXPECTED_FAILURES:?}",
        results.iter().filter(|r| r.pass).count(),
        results.len()
    );
}
