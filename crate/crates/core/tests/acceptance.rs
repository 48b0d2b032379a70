//! Replays every criterion at its headline bound. One line per criterion;
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use mod2hecke::suite::{SuiteBounds, CRITERIA};

fn main() -> ExitCode {
    let bounds = SuiteBounds::full();
    let mut failed = Vec::new();
    for criterion in CRITERIA {
        let start = Instant::now();
        let outcome = criterion(&bounds);
        println!("{} ({:.1}s)", outcome.line(), start.elapsed().as_secs_f64());
        if !outcome.passed {
            failed.push(outcome.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria pass", CRITERIA.len(), CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
