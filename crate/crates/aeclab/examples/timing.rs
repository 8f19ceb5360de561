use aeclab::suite::{run_suite, Suite, SuiteConfig};
use std::time::Instant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "intersections".into());
    let max_size = std::env::args().nth(2).and_then(|s| s.parse().ok());
    let config = SuiteConfig { max_size, ..SuiteConfig::default() };
    let suite: Suite = which.parse().unwrap();
    let t = Instant::now();
    let outcome = run_suite(suite, &config).unwrap();
    println!("{suite}: {:?} passed={}", t.elapsed(), outcome.passed());
    for s in &outcome.report.sections {
        println!("  {} checked={} violations={}", s.name, s.checked, s.violation_count);
    }
}
