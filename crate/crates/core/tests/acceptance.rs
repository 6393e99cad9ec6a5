//! Acceptance suite: one line per numbered criterion, nonzero exit on failure.
//!
//! Set `S3RADON_ACCEPTANCE_ONLY=3,7` to run a subset.

use s3radon::verify::{errored, run_criterion, VerifyConfig, CRITERIA};

fn main() {
    let cfg = VerifyConfig::default();
    let only: Option<Vec<u8>> = std::env::var("S3RADON_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for n in 1..=CRITERIA {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let res = run_criterion(n, &cfg).unwrap_or_else(|e| errored(Some(n), &e));
        println!("{}", res.line());
        if !res.passed() {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
