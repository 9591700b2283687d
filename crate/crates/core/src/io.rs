//! Shared text formats.

use serde::Serializer;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Rational};

pub fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

/// Parses lines `sigma<TAB>num/den`; blank lines and `#` comments are skipped.
/// The empty string is a line starting with the tab.
pub fn parse_sigma_table(text: &str) -> Result<Vec<(BitString, Rational)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(no, line)| {
            let (sigma, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("line {}: expected a tab", no + 1)))?;
            Ok((sigma.trim().parse()?, parse_rational(value)?))
        })
        .collect()
}

pub fn format_sigma_table<'a>(rows: impl IntoIterator<Item = (&'a BitString, &'a Rational)>) -> String {
    rows.into_iter()
        .map(|(s, v)| format!("{s}\t{}\n", format_rational(v)))
        .collect()
}
