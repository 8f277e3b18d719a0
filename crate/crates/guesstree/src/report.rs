//! Deterministic rendering of run results.
//!
//! Every number the CLI prints flows through [`fmt_f`] or [`fmt_ratio`], so
//! repeated runs with the same configuration produce byte-identical output.
//! Tables are tab-separated with a header row; the JSON mirror stores the
//! same formatted strings instead of raw floats to keep both forms stable.

use std::fmt::Write as _;

use num_rational::Ratio;
use serde::Serialize;

use crate::certificate::WeightSchedule;

/// Fixed 12-decimal float rendering with trailing zeros trimmed.
///
/// `-0.0` collapses to `"0"`, non-finite values render as `nan` / `inf` /
/// `-inf`. Twelve decimals is enough to distinguish every quantity the
/// tolerances care about (the tightest is `1e-12`) while staying immune to
/// shortest-representation churn.
pub fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let mut s = format!("{v:.12}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Exact rational rendering: `25/12`, or just `3` for integers.
pub fn fmt_ratio(r: Ratio<i64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical pass/fail cell text.
pub fn fmt_pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

/// A named tab-separated table with a fixed column set.
#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Table {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; the cell count must match the header.
    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(
            cells.len(),
            self.columns.len(),
            "table {} expects {} cells per row",
            self.name,
            self.columns.len()
        );
        self.rows.push(cells);
    }

    /// The table as DSV: a `# table:` marker, the header line, then one
    /// line per row, all tab-separated.
    pub fn dsv(&self) -> String {
        let mut out = format!("# table: {}\n", self.name);
        out.push_str(&self.columns.join("\t"));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Everything a single run reports: header metadata, key/value summary
/// fields, tables, and the verdict with any failure messages.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub instance: String,
    pub seed: u64,
    pub verification: String,
    pub weights: String,
    pub family: String,
    /// Ordered key/value pairs echoed on the final `result` line.
    pub summary: Vec<(String, String)>,
    pub tables: Vec<Table>,
    /// One message per violated invariant; empty iff `pass`.
    pub failures: Vec<String>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(command: &str, instance: &str) -> RunReport {
        RunReport {
            command: command.to_string(),
            instance: instance.to_string(),
            seed: 0,
            verification: String::new(),
            weights: String::new(),
            family: String::new(),
            summary: Vec::new(),
            tables: Vec::new(),
            failures: Vec::new(),
            pass: true,
        }
    }

    /// Adds a summary field (appears on the `result` line in insertion
    /// order).
    pub fn kv(&mut self, key: &str, value: impl Into<String>) {
        self.summary.push((key.to_string(), value.into()));
    }

    /// Records a violated invariant and flips the verdict.
    pub fn fail(&mut self, message: String) {
        self.failures.push(message);
        self.pass = false;
    }

    /// Asserts `ok`, recording `message()` on failure.
    pub fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.fail(message());
        }
    }

    pub fn table(&mut self, table: Table) {
        self.tables.push(table);
    }

    /// The one-line machine-readable verdict:
    /// `result<TAB>instance=...<TAB>...<TAB>pass=pass|fail`.
    pub fn summary_line(&self) -> String {
        let mut line = format!("result\tinstance={}", self.instance);
        for (k, v) in &self.summary {
            let _ = write!(line, "\t{k}={v}");
        }
        let _ = write!(line, "\tpass={}", fmt_pass(self.pass));
        line
    }

    /// Full plain-text report: `#` header lines, tables separated by blank
    /// lines, failure lines prefixed with `!`, then the summary line.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# guesstree {}: {}", self.command, self.instance);
        let _ = writeln!(out, "# seed: {}", self.seed);
        if !self.verification.is_empty() {
            let _ = writeln!(out, "# verification: {}", self.verification);
        }
        if !self.weights.is_empty() {
            let _ = writeln!(out, "# weights: {}", self.weights);
        }
        if !self.family.is_empty() {
            let _ = writeln!(out, "# family: {}", self.family);
        }
        for table in &self.tables {
            out.push('\n');
            out.push_str(&table.dsv());
        }
        if !self.failures.is_empty() {
            out.push('\n');
            for f in &self.failures {
                let _ = writeln!(out, "! {f}");
            }
        }
        out.push('\n');
        out.push_str(&self.summary_line());
        out.push('\n');
        out
    }

    /// JSON mirror of the report (numbers already formatted as strings).
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Names the closed-form expression behind a bound row, so every printed
/// bound can be traced to the formula that produced it.
pub fn bound_formula(schedule: &WeightSchedule, bound_name: &str, balanced: bool) -> String {
    match schedule {
        WeightSchedule::Constant { .. } => match bound_name {
            "u_side" => "4*(T/black + G/red)".into(),
            "w_side" => "4*(2*red*T + black*G)".into(),
            _ if balanced => "12*sqrt(G*T)".into(),
            _ => "max(4*(T/black + G/red), 4*(2*red*T + black*G))".into(),
        },
        WeightSchedule::PerGeneration { .. } => match bound_name {
            "objective" => "4 + 8*sum_{g>=1} sqrt(T_g)".into(),
            _ => "4*(T_0/W_0 + sum_{g>=1}(T_g/W_g + W_g))".into(),
        },
        WeightSchedule::PerVertex { .. } => "per-vertex mass product".into(),
    }
}
