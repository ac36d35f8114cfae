//! BER result files: `es_n0_db,codewords,bit_errors,bits,ber,seconds`.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};

pub const CSV_HEADER: &str = "es_n0_db,codewords,bit_errors,bits,ber,seconds";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub es_n0_db: f64,
    pub codewords: u64,
    pub bit_errors: u64,
    pub bits: u64,
    /// `bit_errors / bits`; NaN when the point was aborted before counting.
    pub ber: f64,
    /// Wall time, when timing is enabled.
    pub seconds: Option<f64>,
    /// Why the point stopped early (e.g. training divergence).
    pub aborted: Option<String>,
}

impl BerPoint {
    pub fn new(es_n0_db: f64, codewords: u64, bit_errors: u64, bits: u64) -> Self {
        BerPoint {
            es_n0_db,
            codewords,
            bit_errors,
            bits,
            ber: if bits == 0 {
                f64::NAN
            } else {
                bit_errors as f64 / bits as f64
            },
            seconds: None,
            aborted: None,
        }
    }

    /// Binomial standard error of the estimate.
    pub fn std_error(&self) -> f64 {
        if self.bits == 0 {
            return f64::INFINITY;
        }
        (self.ber * (1.0 - self.ber) / self.bits as f64).sqrt()
    }
}

pub fn to_csv(points: &[BerPoint]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for p in points {
        let seconds = p.seconds.map(|t| format!("{t:.3}")).unwrap_or_default();
        let ber = if p.ber.is_nan() {
            "nan".to_string()
        } else {
            format!("{:.6e}", p.ber)
        };
        writeln!(
            s,
            "{},{},{},{},{ber},{seconds}",
            p.es_n0_db, p.codewords, p.bit_errors, p.bits
        )
        .expect("string write");
    }
    s
}

fn bad(line: usize, msg: impl Into<String>) -> HarnessError {
    HarnessError::Csv { line, msg: msg.into() }
}

pub fn parse_csv(text: &str) -> Result<Vec<BerPoint>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == CSV_HEADER => {}
        Some((_, h)) => return Err(bad(1, format!("expected header `{CSV_HEADER}`, found `{h}`"))),
        None => return Err(bad(1, "empty file")),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let lno = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad(lno, format!("expected 6 fields, found {}", f.len())));
        }
        let num = |s: &str, name: &str| s.parse::<f64>().map_err(|_| bad(lno, format!("bad {name} `{s}`")));
        let int = |s: &str, name: &str| s.parse::<u64>().map_err(|_| bad(lno, format!("bad {name} `{s}`")));
        let es_n0_db = num(f[0], "es_n0_db")?;
        if !es_n0_db.is_finite() {
            return Err(bad(lno, "es_n0_db must be finite"));
        }
        let codewords = int(f[1], "codewords")?;
        let bit_errors = int(f[2], "bit_errors")?;
        let bits = int(f[3], "bits")?;
        if bit_errors > bits {
            return Err(bad(lno, "bit_errors exceeds bits"));
        }
        let ber = num(f[4], "ber")?;
        let seconds = if f[5].is_empty() {
            None
        } else {
            Some(num(f[5], "seconds")?)
        };
        out.push(BerPoint {
            es_n0_db,
            codewords,
            bit_errors,
            bits,
            ber,
            seconds,
            aborted: None,
        });
    }
    Ok(out)
}

/// Indices `i` where `ber[i+1]` exceeds `ber[i]` by more than `z` combined
/// standard errors.
pub fn monotonicity_violations(points: &[BerPoint], z: f64) -> Vec<usize> {
    points
        .windows(2)
        .enumerate()
        .filter(|(_, w)| {
            let slack = z * (w[0].std_error().powi(2) + w[1].std_error().powi(2)).sqrt();
            w[1].ber > w[0].ber + slack
        })
        .map(|(i, _)| i)
        .collect()
}

/// Side-by-side BER table over the union of sweep points. Missing entries
/// print as `-`; a row is flagged when two curves present in both it and
/// the previous row swap order.
pub fn summarize(curves: &[(String, Vec<BerPoint>)]) -> String {
    let mut rows: BTreeMap<u64, (f64, Vec<Option<f64>>)> = BTreeMap::new();
    for (c, (_, pts)) in curves.iter().enumerate() {
        for p in pts {
            // Order by value; total_cmp keys keep -0.0 and 0.0 apart, so
            // normalize zero first.
            let x = if p.es_n0_db == 0.0 { 0.0 } else { p.es_n0_db };
            let key = ordered_key(x);
            let e = rows.entry(key).or_insert_with(|| (x, vec![None; curves.len()]));
            e.1[c] = Some(p.ber);
        }
    }
    let width = curves.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(12);
    let mut s = format!("{:>10}", "es_n0_db");
    for (name, _) in curves {
        write!(s, "  {name:>width$}").expect("string write");
    }
    s.push_str("  note\n");
    let mut prev: Option<Vec<Option<f64>>> = None;
    for (x, bers) in rows.values() {
        write!(s, "{x:>10}").expect("string write");
        for b in bers {
            let cell = match b {
                None => "-".to_string(),
                Some(v) if v.is_nan() => "nan".to_string(),
                Some(v) => format!("{v:.3e}"),
            };
            write!(s, "  {cell:>width$}").expect("string write");
        }
        let mut notes = Vec::new();
        if let Some(p) = &prev {
            for a in 0..bers.len() {
                for b in a + 1..bers.len() {
                    if let (Some(pa), Some(pb), Some(ca), Some(cb)) = (p[a], p[b], bers[a], bers[b]) {
                        if (pa - pb).signum() * (ca - cb).signum() < 0.0 && pa != pb && ca != cb {
                            notes.push(format!("crossover {}/{}", curves[a].0, curves[b].0));
                        }
                    }
                }
            }
        }
        s.push_str("  ");
        s.push_str(&notes.join(", "));
        s = s.trim_end().to_string();
        s.push('\n');
        prev = Some(bers.clone());
    }
    s
}

fn ordered_key(x: f64) -> u64 {
    // Monotone map from f64 to u64 for BTreeMap ordering.
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}
