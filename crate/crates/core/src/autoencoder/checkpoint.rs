//! Plain-text parameter checkpoints.
//!
//! ```text
//! onebit-ae-checkpoint 1
//! dims <input> <rail> <hidden>
//! sigma_theta2 <f64>
//! sigma_b2 <f64>
//! tensor <name> <rows> <cols>
//! <cols values>          (one line per row)
//! ...
//! ```
//!
//! Tensors appear in a fixed order: `encoder.weight`, `encoder.bias`, then
//! `decoder.<i>.weight` / `decoder.<i>.bias` for `i` in 0..4. Biases are
//! stored as `rows × 1`. Values use Rust's shortest round-trip exponent
//! formatting, so a save/load cycle is bit exact.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::network::{AeDims, Dense, MlpParams, DECODER_LAYERS};
use super::{AeError, Result};

const MAGIC: &str = "onebit-ae-checkpoint 1";

fn tensor_names() -> Vec<String> {
    let mut names = vec!["encoder.weight".to_string(), "encoder.bias".to_string()];
    for i in 0..DECODER_LAYERS {
        names.push(format!("decoder.{i}.weight"));
        names.push(format!("decoder.{i}.bias"));
    }
    names
}

fn write_tensor(out: &mut String, name: &str, m: &DMatrix<f64>) {
    let _ = writeln!(out, "tensor {name} {} {}", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
}

pub fn save(p: &MlpParams) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let d = p.dims;
    let _ = writeln!(out, "dims {} {} {}", d.input, d.rail, d.hidden);
    let _ = writeln!(out, "sigma_theta2 {:e}", p.sigma_theta2);
    let _ = writeln!(out, "sigma_b2 {:e}", p.sigma_b2);
    let layers = std::iter::once(&p.encoder).chain(&p.decoder);
    for (layer, names) in layers.zip(tensor_names().chunks(2)) {
        write_tensor(&mut out, &names[0], &layer.weight);
        let bias = DMatrix::from_column_slice(layer.bias.len(), 1, layer.bias.as_slice());
        write_tensor(&mut out, &names[1], &bias);
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .ok_or_else(|| AeError::Checkpoint {
                line: 0,
                msg: format!("unexpected end of file, expected {what}"),
            })
    }
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(AeError::Checkpoint { line, msg: msg.into() })
}

fn parse_f64(line: usize, tok: &str) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => err(line, format!("invalid number {tok:?}")),
    }
}

fn parse_usize(line: usize, tok: &str) -> Result<usize> {
    tok.parse::<usize>()
        .or_else(|_| err(line, format!("invalid integer {tok:?}")))
}

fn keyed<'a>(lines: &mut Lines<'a>, key: &str, count: usize) -> Result<(usize, Vec<&'a str>)> {
    let (no, line) = lines.next(key)?;
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.first() != Some(&key) || toks.len() != count + 1 {
        return err(no, format!("expected `{key}` with {count} value(s)"));
    }
    Ok((no, toks[1..].to_vec()))
}

fn read_tensor(lines: &mut Lines<'_>, name: &str, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    let (no, toks) = keyed(lines, "tensor", 3)?;
    if toks[0] != name {
        return err(no, format!("expected tensor {name}, found {}", toks[0]));
    }
    let (r, c) = (parse_usize(no, toks[1])?, parse_usize(no, toks[2])?);
    if (r, c) != (rows, cols) {
        return err(no, format!("tensor {name}: shape {r}x{c}, expected {rows}x{cols}"));
    }
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        let (no, line) = lines.next(name)?;
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != cols {
            return err(
                no,
                format!("tensor {name} row {i}: {} values, expected {cols}", vals.len()),
            );
        }
        for (j, tok) in vals.iter().enumerate() {
            m[(i, j)] = parse_f64(no, tok)?;
        }
    }
    Ok(m)
}

/// Largest layer width accepted from a checkpoint header.
const MAX_WIDTH: usize = 1 << 16;

pub fn load(text: &str) -> Result<MlpParams> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (no, magic) = lines.next("header")?;
    if magic != MAGIC {
        return err(no, "not an onebit-ae checkpoint (bad header)");
    }
    let (no, dims) = keyed(&mut lines, "dims", 3)?;
    let dims = AeDims {
        input: parse_usize(no, dims[0])?,
        rail: parse_usize(no, dims[1])?,
        hidden: parse_usize(no, dims[2])?,
    };
    if [dims.input, dims.rail, dims.hidden]
        .iter()
        .any(|&w| w == 0 || w > MAX_WIDTH)
    {
        return err(no, format!("layer widths out of range: {dims:?}"));
    }
    let (no, v) = keyed(&mut lines, "sigma_theta2", 1)?;
    let sigma_theta2 = parse_f64(no, v[0])?;
    let (no, v) = keyed(&mut lines, "sigma_b2", 1)?;
    let sigma_b2 = parse_f64(no, v[0])?;

    let shapes = [
        (dims.encoded(), dims.input),
        (dims.hidden, dims.encoded()),
        (dims.hidden, dims.hidden),
        (dims.hidden, dims.hidden),
        (dims.input, dims.hidden),
    ];
    let names = tensor_names();
    let mut layers = Vec::with_capacity(shapes.len());
    for (&(o, i), pair) in shapes.iter().zip(names.chunks(2)) {
        let weight = read_tensor(&mut lines, &pair[0], o, i)?;
        let bias = read_tensor(&mut lines, &pair[1], o, 1)?;
        layers.push(Dense {
            weight,
            bias: DVector::from_column_slice(bias.as_slice()),
        });
    }
    if let Some((no, extra)) = lines.inner.find(|(_, l)| !l.trim().is_empty()) {
        return err(
            no + 1,
            format!("trailing content {:?}", extra.chars().take(32).collect::<String>()),
        );
    }
    let encoder = layers.remove(0);
    Ok(MlpParams {
        dims,
        encoder,
        decoder: layers,
        sigma_theta2,
        sigma_b2,
    })
}
