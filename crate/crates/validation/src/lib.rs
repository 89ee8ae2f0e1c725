//! Runner for the acceptance checks: each check yields a verdict and one
//! line is printed per check.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

pub struct Check {
    pub id: u32,
    pub title: &'static str,
    /// Wall-clock budget; exceeding it fails the check.
    pub budget: Option<Duration>,
    pub run: fn() -> Verdict,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {} ({:.1} s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// Runs one check, turning panics and budget overruns into failures.
pub fn run_check(check: &Check) -> Outcome {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(check.run));
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match result {
        Ok(v) => (v.passed, v.detail),
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (false, format!("panicked: {msg}"))
        }
    };
    if let Some(budget) = check.budget {
        if elapsed > budget {
            passed = false;
            detail = format!("{detail}; over the {:.0} s budget", budget.as_secs_f64());
        }
    }
    Outcome { id: check.id, title: check.title, passed, detail, elapsed }
}

/// Runs all checks in order, prints one line each, and returns whether all
/// passed.
pub fn run_all(checks: &[Check]) -> bool {
    let mut all = true;
    for c in checks {
        let o = run_check(c);
        println!("{}", o.line());
        all &= o.passed;
    }
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_failures() {
        let c = Check { id: 1, title: "t", budget: None, run: || panic!("boom") };
        let o = run_check(&c);
        assert!(!o.passed && o.detail.contains("boom"));
    }

    #[test]
    fn line_format() {
        let c = Check { id: 7, title: "demo", budget: Some(Duration::from_secs(10)), run: || Verdict::new(true, "ok") };
        let line = run_check(&c).line();
        assert!(line.starts_with("criterion  7 PASS demo"));
    }
}
