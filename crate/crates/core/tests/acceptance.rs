//! Runs the ten acceptance checks at their tolerances and prints one line
//! per check.

use pwlab_core::verify::{run_check, CheckOutcome};

const SEED: u64 = 0;

#[test]
fn acceptance_suite() {
    let outcomes: Vec<CheckOutcome> = (1..=10).map(|id| run_check(id, SEED)).collect();
    for o in &outcomes {
        println!("{}", o.summary_line());
        for note in &o.notes {
            println!("       note: {note}");
        }
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
