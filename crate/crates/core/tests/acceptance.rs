//! Acceptance criteria A1–A9: one PASS/FAIL line per criterion, exit
//! status 1 if any fails. A plain `main` rather than libtest so that every
//! line is printed, not only those of failing criteria.
//!
//! All checks are exact (zero tolerance) except the runtime bounds:
//! A1 < 10 s and A8 < 60 s of wall-clock time.
//!
//! Positional arguments select criteria (`cargo test --test acceptance -- A5`);
//! libtest-style flags are ignored.

use std::process::ExitCode;

use ellis_core::repro::{run_criterion, CRITERIA};

const SEED: u64 = 20;

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let selected: Vec<&str> = CRITERIA
        .iter()
        .copied()
        .filter(|id| filters.is_empty() || filters.iter().any(|f| f.eq_ignore_ascii_case(id)))
        .collect();
    println!("\nrunning {} acceptance criteria (seed {SEED})", selected.len());
    let mut failed = Vec::new();
    for id in &selected {
        let r = run_criterion(id, SEED).expect("known criterion");
        println!("{}", r.line());
        for d in &r.details {
            println!("    {d}");
        }
        if !r.passed {
            failed.push(r.id);
        }
    }
    println!(
        "\nacceptance: {} passed; {} failed{}",
        selected.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" ({})", failed.join(", "))
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
