use std::fmt::Write;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

/// Key-value run report. Timing lines come last so that runs on the same
/// inputs differ only there.
#[derive(Debug, Default)]
pub struct Report {
    /// Emitted instance printed before the report when no --output is set.
    pub artifact: Option<String>,
    lines: Vec<(String, String)>,
    primary: Option<String>,
    verdicts: Vec<bool>,
    timings: Vec<(String, Duration)>,
}

impl Report {
    pub fn new(argv: &[String]) -> Self {
        let mut r = Report::default();
        r.push("command", argv.join(" "));
        r
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn input(&mut self, key: &str, label: &str, bytes: &[u8]) {
        self.push(format!("input.{key}"), label);
        self.push(format!("input.{key}.sha256"), hex::encode(Sha256::digest(bytes)));
    }

    pub fn output(&mut self, key: &str, label: &str, bytes: &[u8]) {
        self.push(format!("output.{key}"), label);
        self.push(format!("output.{key}.sha256"), hex::encode(Sha256::digest(bytes)));
    }

    /// A result line; the first one is what --quiet prints.
    pub fn result(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        self.primary.get_or_insert_with(|| value.clone());
        self.push(format!("result.{key}"), value);
    }

    pub fn check(&mut self, key: &str, ok: bool) {
        self.verdicts.push(ok);
        self.push(format!("verify.{key}"), if ok { "OK" } else { "MISMATCH" });
    }

    pub fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push((phase.to_string(), start.elapsed()));
        out
    }

    pub fn mismatch(&self) -> bool {
        self.verdicts.iter().any(|ok| !ok)
    }

    pub fn render(&self, quiet: bool) -> String {
        let mut out = String::new();
        if let Some(a) = &self.artifact {
            out.push_str(a);
            if !a.ends_with('\n') {
                out.push('\n');
            }
        }
        if quiet {
            if let Some(p) = &self.primary {
                writeln!(out, "{p}").unwrap();
            }
            return out;
        }
        for (k, v) in &self.lines {
            writeln!(out, "{k}={v}").unwrap();
        }
        if !self.verdicts.is_empty() {
            writeln!(out, "verify={}", if self.mismatch() { "MISMATCH" } else { "OK" }).unwrap();
        }
        for (k, d) in &self.timings {
            writeln!(out, "time.{k}_ms={:.3}", d.as_secs_f64() * 1e3).unwrap();
        }
        out
    }
}
