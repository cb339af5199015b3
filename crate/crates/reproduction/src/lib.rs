//! Reporting for the acceptance suite in `tests/acceptance.rs`.
//!
//! The suite lives in its own package so that `cargo test --workspace`
//! runs every other package's tests before it.

use std::time::Instant;

/// Result of one criterion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    /// Measured quantities, printed after the verdict.
    pub detail: String,
}

pub fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// A named check over shared state.
pub type Check<'a, S> = Box<dyn FnOnce(&mut S) -> Outcome + 'a>;

/// Formats one report line.
pub fn report_line(name: &str, result: &Outcome, seconds: f64) -> String {
    let tag = if result.pass { "PASS" } else { "FAIL" };
    format!("[{tag}] {name}: {} ({seconds:.1}s)", result.detail)
}

/// Runs criteria in order, printing one line each, and returns the number
/// that failed. `state` is threaded through so later criteria can reuse
/// measurements from earlier ones.
pub fn run_criteria<S>(state: &mut S, criteria: Vec<(&str, Check<'_, S>)>) -> usize {
    let total = criteria.len();
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check(state);
        if !result.pass {
            failed += 1;
        }
        println!("{}", report_line(name, &result, start.elapsed().as_secs_f64()));
    }
    if failed > 0 {
        println!("{failed} of {total} acceptance criteria failed");
    } else {
        println!("all {total} acceptance criteria passed");
    }
    failed
}
