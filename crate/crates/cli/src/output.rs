//! Text rendering shared by the subcommands.

use serde::Serialize;

use crate::Failure;

/// Pretty JSON with a trailing newline. Keys follow struct field order and
/// map keys are sorted, so output is stable across runs.
pub fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output values serialize");
    s.push('\n');
    s
}

/// Six significant digits: fixed notation for magnitudes in `[1e-4, 1e6)`,
/// scientific otherwise. Zero prints as `0`.
pub fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    // rounding can carry into the next decade
    let exp = if (x.abs() / 10f64.powi(exp)) >= 9.999995 { exp + 1 } else { exp };
    if (-4..6).contains(&exp) {
        format!("{x:.prec$}", prec = (5 - exp).max(0) as usize)
    } else {
        format!("{x:.5e}")
    }
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    comments: Vec<String>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table {
            header,
            rows: Vec::new(),
            comments: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// Trailing `# ...` line after the records.
    pub fn push_comment(&mut self, text: &str) {
        self.comments.push(text.to_string());
    }

    pub fn render(&self) -> Result<String, Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| Failure::invalid(format!("csv: {e}"));
        w.write_record(&self.header).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::invalid(format!("csv: {e}")))?;
        let mut text = String::from_utf8(bytes).expect("csv output is utf-8");
        for c in &self.comments {
            text.push_str(&format!("# {c}\n"));
        }
        Ok(text)
    }
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig(1.0 / 6.0), "0.166667");
        assert_eq!(sig(2.0 / 3.0), "0.666667");
        assert_eq!(sig(1.0), "1.00000");
        assert_eq!(sig(17.632194841), "17.6322");
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(-0.5), "-0.500000");
        assert_eq!(sig(9.9999999), "10.0000");
        assert_eq!(sig(4.44e-16), "4.44000e-16");
        assert_eq!(sig(0.0123), "0.0123000");
    }
}
