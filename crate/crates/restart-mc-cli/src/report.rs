//! Report and CSV emission. All numbers print with 12 significant digits in
//! exponent form, infinity as the literal `inf`; both are valid TOML floats,
//! so every report re-parses as a TOML document.

use std::fmt::Write;

use restart_mc::ExtReal;

pub fn num(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        format!("{x:.11e}")
    }
}

pub fn ext(v: ExtReal) -> String {
    num(v.as_f64())
}

pub fn num_array(xs: impl IntoIterator<Item = f64>) -> String {
    let body: Vec<String> = xs.into_iter().map(num).collect();
    format!("[{}]", body.join(", "))
}

pub fn ext_array<'a>(xs: impl IntoIterator<Item = &'a ExtReal>) -> String {
    num_array(xs.into_iter().map(|v| v.as_f64()))
}

pub fn str_array<'a>(xs: impl IntoIterator<Item = &'a str>) -> String {
    let body: Vec<String> = xs.into_iter().map(|s| format!("{s:?}")).collect();
    format!("[{}]", body.join(", "))
}

/// Key-value report accumulator.
#[derive(Default)]
pub struct Report {
    buf: String,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Report::default();
        r.raw("schema_version", "1");
        r.string("command", command);
        r
    }

    pub fn raw(&mut self, key: &str, value: &str) -> &mut Self {
        writeln!(self.buf, "{key} = {value}").unwrap();
        self
    }

    pub fn string(&mut self, key: &str, value: &str) -> &mut Self {
        self.raw(key, &format!("{value:?}"))
    }

    pub fn number(&mut self, key: &str, value: f64) -> &mut Self {
        self.raw(key, &num(value))
    }

    pub fn integer(&mut self, key: &str, value: u64) -> &mut Self {
        self.raw(key, &value.to_string())
    }

    pub fn finish(&self) -> &str {
        &self.buf
    }
}

/// Two-column CSV with a header.
pub fn csv_table(header: (&str, &str), rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (a, b) in rows {
        writeln!(out, "{},{}", num(a), num(b)).unwrap();
    }
    out
}

pub fn csv_table3(
    header: (&str, &str, &str),
    rows: impl IntoIterator<Item = (f64, f64, f64)>,
) -> String {
    let mut out = format!("{},{},{}\n", header.0, header.1, header.2);
    for (a, b, c) in rows {
        writeln!(out, "{},{},{}", num(a), num(b), num(c)).unwrap();
    }
    out
}
