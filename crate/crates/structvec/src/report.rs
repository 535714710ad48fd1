//! CSV report output.
//!
//! Every report starts with the line `#structvec-report v1`, followed by any
//! extra comment lines (e.g. a timestamp, suppressible by the caller), a
//! column header row, and data rows.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub const REPORT_HEADER: &str = "#structvec-report v1";

/// Quote a CSV field when it contains a delimiter, quote or newline.
pub fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}

/// In-memory report: comments, header, rows.
#[derive(Debug, Clone, Default)]
pub struct Report {
    comments: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        Report {
            comments: Vec::new(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    /// Add a `# ...` comment line after the version header.
    pub fn comment(&mut self, text: impl AsRef<str>) -> &mut Self {
        self.comments.push(format!("# {}", text.as_ref()));
        self
    }

    pub fn row(&mut self, fields: Vec<String>) -> &mut Self {
        debug_assert_eq!(fields.len(), self.columns.len());
        self.rows.push(fields);
        self
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(REPORT_HEADER);
        out.push('\n');
        for comment in &self.comments {
            out.push_str(comment);
            out.push('\n');
        }
        let header: Vec<String> = self.columns.iter().map(|c| csv_escape(c)).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|f| csv_escape(f)).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_layout_and_escaping() {
        let mut r = Report::new(&["word", "score"]);
        r.comment("k=2");
        r.row(vec!["plain".into(), "0.5".into()]);
        r.row(vec!["with,comma".into(), "1".into()]);
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "#structvec-report v1");
        assert_eq!(lines[1], "# k=2");
        assert_eq!(lines[2], "word,score");
        assert_eq!(lines[3], "plain,0.5");
        assert_eq!(lines[4], "\"with,comma\",1");
    }
}
