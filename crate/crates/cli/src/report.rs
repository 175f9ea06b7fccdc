//! Report assembly and serialization.
//!
//! Two files per run: a comma-separated table (`report.csv`) and a
//! structured document (`report.json`). Every floating-point value is
//! written with 17 significant digits so the files round-trip exactly and
//! identical runs are byte-identical.

/// One computed quantity.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub task: String,
    /// name of the quantity within the task
    pub name: String,
    /// human-readable inputs
    pub inputs: String,
    pub value: f64,
    /// closed-form reference value, when one exists
    pub formula_value: Option<f64>,
    /// value / formula_value, present only when both exist
    pub ratio: Option<f64>,
    /// the formula or identity the row instantiates
    pub provenance: String,
    pub error_budget: Option<f64>,
    /// outcome of a hard check (exact identity within tolerance), if the
    /// row is one
    pub check: Option<bool>,
}

impl ReportRow {
    pub fn new(task: &str, name: &str, inputs: String, value: f64, provenance: &str) -> Self {
        Self {
            task: task.into(),
            name: name.into(),
            inputs,
            value,
            formula_value: None,
            ratio: None,
            provenance: provenance.into(),
            error_budget: None,
            check: None,
        }
    }

    pub fn with_formula(mut self, formula_value: f64) -> Self {
        self.ratio = Some(self.value / formula_value);
        self.formula_value = Some(formula_value);
        self
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.error_budget = Some(budget);
        self
    }

    pub fn with_check(mut self, pass: bool) -> Self {
        self.check = Some(pass);
        self
    }
}

/// A full run: header metadata plus rows in task order.
#[derive(Debug, Clone)]
pub struct Report {
    pub seed: u64,
    pub instance: String,
    pub norms: String,
    pub rows: Vec<ReportRow>,
}

/// 17 significant digits, round-trip exact.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// JSON numbers must be finite; non-finite values degrade to strings.
fn json_float(v: f64) -> String {
    if v.is_finite() {
        fmt_float(v)
    } else {
        format!("\"{}\"", fmt_float(v))
    }
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("task,name,inputs,value,formula_value,ratio,provenance,error_budget,check\n");
        for r in &self.rows {
            let cells = [
                csv_escape(&r.task),
                csv_escape(&r.name),
                csv_escape(&r.inputs),
                fmt_float(r.value),
                r.formula_value.map(fmt_float).unwrap_or_default(),
                r.ratio.map(fmt_float).unwrap_or_default(),
                csv_escape(&r.provenance),
                r.error_budget.map(fmt_float).unwrap_or_default(),
                r.check.map(|c| if c { "pass" } else { "fail" }.to_string()).unwrap_or_default(),
            ];
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!("  \"seed\": {},\n", self.seed));
        out.push_str(&format!("  \"instance\": \"{}\",\n", json_escape(&self.instance)));
        out.push_str(&format!("  \"norms\": \"{}\",\n", json_escape(&self.norms)));
        out.push_str("  \"rows\": [\n");
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str("    {");
            out.push_str(&format!("\"task\": \"{}\", ", json_escape(&r.task)));
            out.push_str(&format!("\"name\": \"{}\", ", json_escape(&r.name)));
            out.push_str(&format!("\"inputs\": \"{}\", ", json_escape(&r.inputs)));
            out.push_str(&format!("\"value\": {}", json_float(r.value)));
            if let Some(f) = r.formula_value {
                out.push_str(&format!(", \"formula_value\": {}", json_float(f)));
            }
            if let Some(rt) = r.ratio {
                out.push_str(&format!(", \"ratio\": {}", json_float(rt)));
            }
            out.push_str(&format!(", \"provenance\": \"{}\"", json_escape(&r.provenance)));
            if let Some(b) = r.error_budget {
                out.push_str(&format!(", \"error_budget\": {}", json_float(b)));
            }
            if let Some(c) = r.check {
                out.push_str(&format!(", \"check\": {c}"));
            }
            out.push('}');
            out.push_str(if i + 1 < self.rows.len() { ",\n" } else { "\n" });
        }
        out.push_str("  ]\n}\n");
        out
    }
}
