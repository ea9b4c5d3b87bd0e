use allmatch_core::exact;
use allmatch_core::verify::{run, Implementations, Level};
use allmatch_core::{ExactCount, Result, ZeroOneMatrix};

#[test]
fn quick_level_passes() {
    let t = std::time::Instant::now();
    let summary = run(Level::Quick, &Implementations::default());
    assert!(summary.passed(), "{}", summary.to_text());
    assert!(t.elapsed().as_secs() < 60);
}

#[test]
fn full_level_passes() {
    let summary = run(Level::Full, &Implementations::default());
    assert!(summary.passed(), "{}", summary.to_text());
    assert!(summary.checks.len() > run(Level::Quick, &Implementations::default()).checks.len());
}

// Off by one whenever the first row is full.
fn mutated_am_dp(a: &ZeroOneMatrix) -> Result<ExactCount> {
    let v = exact::am_dp(a)?;
    let full_row = a.rows() > 0 && (0..a.cols()).all(|j| a.get(0, j));
    Ok(if full_row && a.cols() > 1 { v + 1u32 } else { v })
}

#[test]
fn mutated_dp_is_caught_with_witness() {
    let imp = Implementations {
        am_dp: mutated_am_dp,
        ..Implementations::default()
    };
    let summary = run(Level::Quick, &imp);
    assert!(!summary.passed());
    let first = summary.checks.iter().find(|c| !c.passed()).unwrap();
    let failure = first.failure.as_ref().unwrap();
    assert_eq!(first.name, "am_dp = am_recursive = sum of matching vector");
    assert_eq!(failure.witness.as_deref(), Some("11"));
    assert!(summary.to_text().contains("witness: 11"));
}
