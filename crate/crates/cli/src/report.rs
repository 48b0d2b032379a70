use std::fmt::Write as _;
use std::io;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Text => "txt",
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// What a command produced. Every command fills all three renderings so any
/// `--format` works.
#[derive(Debug)]
pub struct Report {
    pub command: String,
    pub passed: bool,
    pub summary: String,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Text lines; when empty the rows are printed instead.
    pub transcript: Vec<String>,
    pub result: Value,
}

impl Report {
    pub fn new(command: &str, passed: bool, summary: String) -> Self {
        Report {
            command: command.to_string(),
            passed,
            summary,
            headers: Vec::new(),
            rows: Vec::new(),
            transcript: Vec::new(),
            result: Value::Null,
        }
    }

    /// A failed check whose only content is the error.
    pub fn failure(command: &str, err: impl std::fmt::Display) -> Self {
        let mut r = Report::new(command, false, err.to_string());
        r.headers = vec!["error"];
        r.rows = vec![vec![err.to_string()]];
        r.result = json!({ "error": err.to_string() });
        r
    }

    pub fn status_line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}: {}", self.command, self.summary)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => {
                let mut out = String::new();
                if self.transcript.is_empty() {
                    for row in &self.rows {
                        writeln!(out, "{}", row.join(" ")).unwrap();
                    }
                } else {
                    for line in &self.transcript {
                        writeln!(out, "{line}").unwrap();
                    }
                }
                writeln!(out, "{}", self.status_line()).unwrap();
                out
            }
            Format::Json => {
                let doc = json!({
                    "command": self.command,
                    "passed": self.passed,
                    "summary": self.summary,
                    "result": self.result,
                });
                let mut s = serde_json::to_string_pretty(&doc).unwrap();
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.headers).unwrap();
                for row in &self.rows {
                    w.write_record(row).unwrap();
                }
                String::from_utf8(w.into_inner().unwrap()).unwrap()
            }
        }
    }

    /// Default file name under the output directory, e.g. `cn-express.json`.
    pub fn file_name(&self, format: Format) -> String {
        format!("{}.{}", self.command.replace(' ', "-"), format.extension())
    }

    pub fn write_to(&self, path: &Path, format: Format) -> io::Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, self.render(format))
    }
}
