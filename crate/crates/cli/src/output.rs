//! CSV tables. Comment lines (`#`) carry run metadata such as timestamps;
//! everything after them is deterministic for a given configuration.

use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

/// Plain decimal, switching to scientific notation below 1e-4 in magnitude.
pub fn fmt_num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { comments: Vec::new(), header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        for c in &self.comments {
            writeln!(w, "# {c}")?;
        }
        let line = |cells: &[String]| cells.iter().map(|c| escape(c)).collect::<Vec<_>>().join(",");
        writeln!(w, "{}", line(&self.header))?;
        for r in &self.rows {
            writeln!(w, "{}", line(r))?;
        }
        w.flush()
    }

    /// Writes to `path`, or to standard output when there is none.
    pub fn write(&self, path: Option<&Path>) -> io::Result<()> {
        match path {
            Some(p) => self.write_to(io::BufWriter::new(std::fs::File::create(p)?)),
            None => self.write_to(io::stdout().lock()),
        }
    }
}

/// `# started_unix = …` line for the comment block.
pub fn timestamp_comment() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("started_unix = {secs}")
}

/// The non-comment lines of a CSV document.
pub fn body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}
