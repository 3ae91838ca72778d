//! Report emission: JSON with 17 significant digits per float, and CSV for
//! tabular results.

use std::io::{self, Write};
use std::path::Path;

use ogp_core::landscape::{Histogram, StabilityReport};
use ogp_core::theory::ExponentReport;
use ogp_core::DiscrepancyResult;
use serde::Serialize;

/// Shortest fixed or scientific rendering of `x` with exactly 17 significant
/// digits, which round-trips every finite `f64`.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    if (0..=16).contains(&exp) {
        let (int, frac) = digits.split_at(exp as usize + 1);
        if frac.is_empty() {
            format!("{sign}{int}.0")
        } else {
            format!("{sign}{int}.{frac}")
        }
    } else if (-5..0).contains(&exp) {
        format!("{sign}0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else {
        format!("{sign}{mantissa}e{exp}")
    }
}

struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes `value` as compact JSON with [`format_f64`] floats.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Results with a natural table form.
pub trait Tabular {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

impl Tabular for Histogram {
    fn header(&self) -> Vec<&'static str> {
        vec!["bin_lo", "bin_hi", "count"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.bins
            .iter()
            .map(|b| vec![format_f64(b.lo), format_f64(b.hi), b.count.to_string()])
            .collect()
    }
}

impl Tabular for DiscrepancyResult {
    fn header(&self) -> Vec<&'static str> {
        vec!["row", "row_sum"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.row_sums
            .iter()
            .enumerate()
            .map(|(i, &v)| vec![i.to_string(), format_f64(v)])
            .collect()
    }
}

impl Tabular for ExponentReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["term", "value"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.terms
            .iter()
            .map(|(k, &v)| vec![k.clone(), format_f64(v)])
            .chain([vec!["total".to_string(), format_f64(self.value)]])
            .collect()
    }
}

impl Tabular for StabilityReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["quantile", "hamming"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.quantiles
            .iter()
            .map(|&(q, d)| vec![format_f64(q), format_f64(d)])
            .collect()
    }
}

/// One online run, as listed in sweep outputs.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct OnlineRecord {
    pub seed: u64,
    pub algorithm: String,
    pub discrepancy: f64,
    pub signs: ogp_core::SignVector,
}

impl Tabular for Vec<OnlineRecord> {
    fn header(&self) -> Vec<&'static str> {
        vec!["seed", "algorithm", "discrepancy", "signs"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.iter()
            .map(|r| vec![r.seed.to_string(), r.algorithm.clone(), format_f64(r.discrepancy), r.signs.to_string()])
            .collect()
    }
}

pub fn to_csv<T: Tabular + ?Sized>(value: &T) -> String {
    let mut out = value.header().join(",");
    out.push('\n');
    for row in value.rows() {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Renders `value` in `format`. Values without a table form fall back to JSON.
pub fn render<T: Serialize>(value: &T, format: Format, table: Option<&dyn Tabular>) -> anyhow::Result<String> {
    Ok(match (format, table) {
        (Format::Csv, Some(t)) => to_csv(t),
        (Format::Csv, None) => anyhow::bail!("this result has no CSV form; use --format json"),
        (Format::Json, _) => to_json(value)?,
    })
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text).map_err(|e| anyhow::anyhow!("writing {}: {e}", p.display()))
        }
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Renders and writes a report.
pub fn emit_report<T: Serialize>(value: &T, format: Format, table: Option<&dyn Tabular>, path: Option<&Path>) -> anyhow::Result<()> {
    emit(&render(value, format, table)?, path)
}
