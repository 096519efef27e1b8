//! Check reports: labeled pass/fail items with optional counterexamples.
//!
//! Rendered reports are byte-deterministic for fixed inputs; timings are
//! carried separately so they never perturb the report text.

use std::fmt::Write as _;
use std::time::Duration;

#[derive(Debug, Clone)]
pub struct CheckItem {
    pub label: String,
    pub pass: bool,
    pub counterexample: Option<String>,
    pub elapsed: Option<Duration>,
}

impl CheckItem {
    pub fn pass(label: impl Into<String>) -> Self {
        CheckItem {
            label: label.into(),
            pass: true,
            counterexample: None,
            elapsed: None,
        }
    }

    pub fn fail(label: impl Into<String>, counterexample: impl Into<String>) -> Self {
        CheckItem {
            label: label.into(),
            pass: false,
            counterexample: Some(counterexample.into()),
            elapsed: None,
        }
    }

    pub fn from_result(label: impl Into<String>, counterexample: Option<String>) -> Self {
        match counterexample {
            None => CheckItem::pass(label),
            Some(c) => CheckItem::fail(label, c),
        }
    }

    pub fn timed(mut self, elapsed: Duration) -> Self {
        self.elapsed = Some(elapsed);
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub title: String,
    pub items: Vec<CheckItem>,
}

impl RunReport {
    pub fn new(title: impl Into<String>) -> Self {
        RunReport {
            title: title.into(),
            items: Vec::new(),
        }
    }

    pub fn push(&mut self, item: CheckItem) {
        self.items.push(item);
    }

    pub fn pass(&mut self, label: impl Into<String>) {
        self.push(CheckItem::pass(label));
    }

    pub fn fail(&mut self, label: impl Into<String>, counterexample: impl Into<String>) {
        self.push(CheckItem::fail(label, counterexample));
    }

    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    /// Deterministic rendering: one `label: VERDICT` line per item, each
    /// failure followed by a `counterexample:` line when one is known.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            let _ = writeln!(
                out,
                "{}: {}",
                item.label,
                if item.pass { "PASS" } else { "FAIL" }
            );
            if let Some(c) = &item.counterexample {
                let _ = writeln!(out, "counterexample: {}", c);
            }
        }
        let _ = writeln!(
            out,
            "{}: {}",
            self.title,
            if self.passed() { "PASS" } else { "FAIL" }
        );
        out
    }

    /// Timing lines, kept apart from the deterministic report body.
    pub fn render_timings(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            if let Some(d) = item.elapsed {
                let _ = writeln!(out, "{}: {} ms", item.label, d.as_millis());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_stable_and_counterexamples_attach_to_failures() {
        let mut r = RunReport::new("demo");
        r.pass("first");
        r.fail("second", "x = 3");
        r.push(CheckItem::pass("third").timed(Duration::from_millis(7)));
        assert!(!r.passed());
        assert_eq!(
            r.render(),
            "first: PASS\nsecond: FAIL\ncounterexample: x = 3\nthird: PASS\ndemo: FAIL\n"
        );
        assert_eq!(r.render(), r.render());
        assert_eq!(r.render_timings(), "third: 7 ms\n");
    }
}
