use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    schema_version: u32,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// `--out`: where the JSON report goes instead of standard output.
#[derive(Args, Clone, Debug, Default)]
pub struct ReportPath {
    /// Write the JSON report to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub struct Output {
    quiet: bool,
}

impl Output {
    pub fn new(quiet: bool) -> Self {
        Output { quiet }
    }

    /// Emits the report and returns `verdict` for the exit code.
    pub fn emit<T: Serialize>(
        &self,
        path: &ReportPath,
        command: &str,
        body: &T,
        verdict: Verdict,
    ) -> anyhow::Result<Verdict> {
        let env = Envelope {
            schema_version: SCHEMA_VERSION,
            command,
            body,
        };
        let text = serde_json::to_string_pretty(&env)? + "\n";
        match &path.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(verdict)
    }

    /// One line of human-readable summary on standard error.
    pub fn note(&self, line: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", line.as_ref());
        }
    }
}
