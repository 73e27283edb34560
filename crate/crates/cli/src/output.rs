//! CSV emission. Numbers use `%g`-style formatting with nine significant
//! digits, so output never depends on locale or on float printing quirks.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use buymany::Subset;

use crate::Failure;

const SIGNIFICANT: i32 = 9;

/// `%.9g`: fixed notation for exponents in `-4..9`, scientific otherwise,
/// trailing zeros dropped. `inf`, `-inf` and `nan` are spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (SIGNIFICANT - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT).contains(&exp) {
        trim(format!("{:.*}", (SIGNIFICANT - 1 - exp) as usize, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa.to_string()), exp.abs())
    }
}

fn trim(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// `{0 2 5}`; the empty set is `{}`.
pub fn set(s: Subset) -> String {
    let items: Vec<String> = s.items().map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(" "))
}

/// Accepts `0,2,5`, `0 2 5` or either form in braces; `{}` or an empty
/// string is the empty set.
pub fn parse_set(text: &str, n: usize) -> Result<Subset, Failure> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    let mut items = Vec::new();
    for tok in inner.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let i: usize = tok
            .parse()
            .map_err(|_| Failure::invalid(format!("bad item index {tok:?} in set {text:?}")))?;
        if i >= n {
            return Err(Failure::invalid(format!("item {i} outside a universe of {n}")));
        }
        items.push(i);
    }
    Ok(Subset::from_items(items))
}

/// A CSV document with a fixed header.
pub struct Table {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn write(&self, out: Option<&Path>) -> Result<(), Failure> {
        let sink: Box<dyn Write> = match out {
            Some(path) => Box::new(File::create(path).map_err(|e| Failure::io(path, e))?),
            None => Box::new(io::stdout().lock()),
        };
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| Failure::invalid(format!("writing output: {e}")))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_format() {
        assert_eq!(num(12.0 / 7.0), "1.71428571");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(3.0), "3");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(123456789.0), "123456789");
        assert_eq!(num(1234567890.0), "1.23456789e+09");
        assert_eq!(num(0.0001), "0.0001");
        assert_eq!(num(0.00001234), "1.234e-05");
        assert_eq!(num(9.9999999999), "10");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(-f64::INFINITY), "-inf");
        assert_eq!(num(-2.5e-300), "-2.5e-300");
    }

    #[test]
    fn sets_round_trip() {
        let s = Subset::from_items([0, 2, 5]);
        assert_eq!(set(s), "{0 2 5}");
        assert_eq!(parse_set(&set(s), 6).unwrap(), s);
        assert_eq!(parse_set("0,2,5", 6).unwrap(), s);
        assert_eq!(parse_set("{}", 3).unwrap(), Subset::EMPTY);
        assert!(parse_set("7", 3).is_err());
        assert!(parse_set("x", 3).is_err());
    }
}
