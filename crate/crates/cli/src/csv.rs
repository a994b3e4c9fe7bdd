//! Minimal CSV emission: a `#`-prefixed preamble, a header row, data rows
//! and an optional `#`-prefixed footer. Numbers carry 12 significant digits.

use std::fmt::Write as _;

/// Shortest `%.12g`-style rendering of `x`.
pub fn format_number(x: f64) -> String {
    format_significant(x, 12)
}

pub fn format_significant(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent marker");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if exponent < -4 || exponent >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exponent.abs())
    } else {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_owned()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cell {
    Text(String),
    Number(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Number(format_number(x))
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Number(x.to_string())
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Number(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl Cell {
    /// Raw value, unquoted.
    pub fn as_str(&self) -> &str {
        match self {
            Cell::Text(s) | Cell::Number(s) => s,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Number(s) => s.clone(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    preamble: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
    footer: Vec<String>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| (*s).to_owned()).collect(),
            ..Self::default()
        }
    }

    /// Lines echoed before the header, each prefixed with `# `.
    pub fn preamble(&mut self, text: &str) {
        self.preamble.extend(text.lines().map(str::to_owned));
    }

    pub fn footer(&mut self, line: impl Into<String>) {
        self.footer.push(line.into());
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn footer_lines(&self) -> &[String] {
        &self.footer
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.preamble {
            comment(&mut out, line);
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for line in &self.footer {
            comment(&mut out, line);
        }
        out
    }
}

fn comment(out: &mut String, line: &str) {
    if line.is_empty() {
        out.push_str("#\n");
    } else {
        writeln!(out, "# {line}").expect("writing to a String");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (0.1276041666666667, "0.127604166667"),
            (0.75, "0.75"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1.4426950408889634e-10, "1.44269504089e-10"),
            (123456789012345.0, "1.23456789012e+14"),
            (0.0001, "0.0001"),
            (0.00001, "1e-05"),
            (100.0, "100"),
            (999999999999.5, "1e+12"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(format_number(x), want, "{x}");
        }
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn renders_preamble_rows_and_footer() {
        let mut t = Table::new(&["a", "b"]);
        t.preamble("x = 1\n\ny = 2");
        t.push(vec!["p,q".into(), 0.5.into()]);
        t.footer("done");
        assert_eq!(t.render(), "# x = 1\n#\n# y = 2\na,b\n\"p,q\",0.5\n# done\n");
    }
}
