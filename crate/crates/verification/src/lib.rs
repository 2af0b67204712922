//! Runner for the acceptance criteria: each criterion gathers validation
//! cases, is timed against its budget and prints a single status line.

use std::time::{Duration, Instant};

use sepnoise::validation::ValidationCase;

pub struct Criterion {
    pub id: usize,
    pub title: &'static str,
    pub budget: Option<Duration>,
    pub cases: Vec<ValidationCase>,
    pub runtime: Duration,
    pub error: Option<String>,
}

impl Criterion {
    /// Runs `f`, recording its cases, wall time and any error.
    pub fn run<F>(id: usize, title: &'static str, budget: Option<Duration>, f: F) -> Self
    where
        F: FnOnce() -> sepnoise::Result<Vec<ValidationCase>>,
    {
        let start = Instant::now();
        let res = f();
        let runtime = start.elapsed();
        let (cases, error) = match res {
            Ok(c) => (c, None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        Criterion {
            id,
            title,
            budget,
            cases,
            runtime,
            error,
        }
    }

    pub fn over_budget(&self) -> bool {
        self.budget.is_some_and(|b| self.runtime > b)
    }

    pub fn pass(&self) -> bool {
        self.error.is_none() && !self.cases.is_empty() && self.cases.iter().all(|c| c.pass) && !self.over_budget()
    }

    /// One status line, followed by indented detail for failures.
    pub fn line(&self) -> String {
        let worst = self
            .cases
            .iter()
            .filter(|c| c.tol > 0.0)
            .map(|c| c.error / c.tol)
            .fold(0.0, f64::max);
        let budget = match self.budget {
            Some(b) => format!("/{:.0}s", b.as_secs_f64()),
            None => String::new(),
        };
        let mut s = format!(
            "[{}] AC-{} {}: {} cases, worst err/tol {:.2e}, {:.2}s{}",
            if self.pass() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.cases.len(),
            worst,
            self.runtime.as_secs_f64(),
            budget
        );
        if let Some(e) = &self.error {
            s.push_str(&format!("\n    error: {e}"));
        }
        if self.over_budget() {
            s.push_str("\n    runtime exceeds budget");
        }
        for c in self.cases.iter().filter(|c| !c.pass) {
            s.push_str(&format!(
                "\n    {} computed={:?} reference={:?} err={:.3e} tol={:.1e}",
                c.id, c.computed, c.reference, c.error, c.tol
            ));
        }
        s
    }
}

pub fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}
