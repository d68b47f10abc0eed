//! One PASS/FAIL line per acceptance criterion, including the determinism
//! check across two full runs.

use hgop::suite::run_acceptance;

#[test]
fn acceptance() {
    let dir = std::env::temp_dir().join(format!("hgop-acceptance-{}", std::process::id()));
    let outcomes = run_acceptance(&dir).expect("battery runs");
    for o in &outcomes {
        println!("{}  [{:.2?}]", o.line(), o.elapsed);
    }
    let _ = std::fs::remove_dir_all(&dir);
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
