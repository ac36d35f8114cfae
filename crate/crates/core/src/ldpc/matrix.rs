use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{LdpcError, Result};

/// Sparse binary parity-check matrix.
///
/// Stored as both column and row adjacency lists, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    rows: usize,
    cols: usize,
    col_adj: Vec<Vec<usize>>,
    row_adj: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from `(check, variable)` pairs.
    pub fn from_entries(rows: usize, cols: usize, entries: &[(usize, usize)]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LdpcError::Invalid("matrix must have nonzero dimensions".into()));
        }
        if rows >= cols {
            return Err(LdpcError::Invalid(format!(
                "rows ({rows}) must be fewer than cols ({cols})"
            )));
        }
        let mut seen = BTreeSet::new();
        let mut col_adj = vec![Vec::new(); cols];
        let mut row_adj = vec![Vec::new(); rows];
        for &(r, c) in entries {
            if r >= rows || c >= cols {
                return Err(LdpcError::Invalid(format!(
                    "entry ({r}, {c}) out of range for {rows}x{cols}"
                )));
            }
            if !seen.insert((r, c)) {
                return Err(LdpcError::Invalid(format!("duplicate entry ({r}, {c})")));
            }
            col_adj[c].push(r);
            row_adj[r].push(c);
        }
        for list in col_adj.iter_mut().chain(row_adj.iter_mut()) {
            list.sort_unstable();
        }
        let h = ParityCheckMatrix {
            rows,
            cols,
            col_adj,
            row_adj,
        };
        h.check_degrees()?;
        Ok(h)
    }

    fn check_degrees(&self) -> Result<()> {
        if let Some(c) = self.col_adj.iter().position(|l| l.is_empty()) {
            return Err(LdpcError::Invalid(format!("column {c} has degree 0")));
        }
        if let Some(r) = self.row_adj.iter().position(|l| l.len() < 2) {
            return Err(LdpcError::Invalid(format!(
                "row {r} has degree {} (< 2)",
                self.row_adj[r].len()
            )));
        }
        Ok(())
    }

    /// Expands a quasi-cyclic base matrix. `None` marks an all-zero block,
    /// `Some(s)` an identity cyclically shifted right by `s`.
    pub fn from_base_matrix(base: &[&[Option<usize>]], z: usize) -> Result<Self> {
        let brows = base.len();
        let bcols = base.first().map_or(0, |r| r.len());
        let mut entries = Vec::new();
        for (br, row) in base.iter().enumerate() {
            if row.len() != bcols {
                return Err(LdpcError::Invalid("ragged base matrix".into()));
            }
            for (bc, shift) in row.iter().enumerate() {
                if let Some(s) = shift {
                    for i in 0..z {
                        entries.push((br * z + i, bc * z + (i + s) % z));
                    }
                }
            }
        }
        Self::from_entries(brows * z, bcols * z, &entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of nonzero entries.
    pub fn num_entries(&self) -> usize {
        self.row_adj.iter().map(Vec::len).sum()
    }

    /// Checks touching variable `col`.
    pub fn col(&self, col: usize) -> &[usize] {
        &self.col_adj[col]
    }

    /// Variables touched by check `row`.
    pub fn row(&self, row: usize) -> &[usize] {
        &self.row_adj[row]
    }

    pub fn column_degrees(&self) -> Vec<usize> {
        self.col_adj.iter().map(Vec::len).collect()
    }

    pub fn row_degrees(&self) -> Vec<usize> {
        self.row_adj.iter().map(Vec::len).collect()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.row_adj[row].binary_search(&col).is_ok()
    }

    /// All `(check, variable)` pairs in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_adj
            .iter()
            .enumerate()
            .flat_map(|(r, cols)| cols.iter().map(move |&c| (r, c)))
    }

    /// Parity of `bits` on the support of each check.
    pub fn syndrome(&self, bits: &[u8]) -> Result<Vec<u8>> {
        if bits.len() != self.cols {
            return Err(LdpcError::LengthMismatch {
                expected: self.cols,
                got: bits.len(),
            });
        }
        Ok(self
            .row_adj
            .iter()
            .map(|cols| cols.iter().fold(0u8, |acc, &c| acc ^ (bits[c] & 1)))
            .collect())
    }

    /// True when every check is satisfied.
    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        bits.len() == self.cols
            && self
                .row_adj
                .iter()
                .all(|cols| cols.iter().fold(0u8, |acc, &c| acc ^ (bits[c] & 1)) == 0)
    }

    /// Serializes to the alist format (1-based, zero padded).
    pub fn to_alist(&self) -> String {
        let col_deg = self.column_degrees();
        let row_deg = self.row_degrees();
        let max_col = col_deg.iter().copied().max().unwrap_or(0);
        let max_row = row_deg.iter().copied().max().unwrap_or(0);
        let mut out = String::new();
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "{} {}", self.cols, self.rows);
        let _ = writeln!(out, "{max_col} {max_row}");
        let _ = writeln!(out, "{}", join(&col_deg));
        let _ = writeln!(out, "{}", join(&row_deg));
        for (adj, width) in [(&self.col_adj, max_col), (&self.row_adj, max_row)] {
            for list in adj.iter() {
                let mut padded: Vec<usize> = list.iter().map(|x| x + 1).collect();
                padded.resize(width, 0);
                let _ = writeln!(out, "{}", join(&padded));
            }
        }
        out
    }

    /// Parses the alist format. Errors carry 1-based line numbers.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let mut next_line = |what: &str| -> Result<(usize, Vec<usize>)> {
            let (no, line) = lines.next().ok_or_else(|| LdpcError::Alist {
                line: 0,
                msg: format!("unexpected end of input while reading {what}"),
            })?;
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| LdpcError::Alist {
                        line: no,
                        msg: format!("invalid integer {t:?} in {what}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((no, nums))
        };

        let (no, dims) = next_line("dimension line")?;
        let [cols, rows] = dims[..] else {
            return Err(LdpcError::Alist {
                line: no,
                msg: "malformed dimension line: expected \"cols rows\"".into(),
            });
        };
        if cols == 0 || rows == 0 {
            return Err(LdpcError::Alist {
                line: no,
                msg: "malformed dimension line: zero dimension".into(),
            });
        }
        let (no, maxes) = next_line("max degree line")?;
        let [max_col, max_row] = maxes[..] else {
            return Err(LdpcError::Alist {
                line: no,
                msg: "malformed max degree line".into(),
            });
        };

        let mut read_degrees = |count: usize, max: usize, what: &str| -> Result<Vec<usize>> {
            let (no, degs) = next_line(what)?;
            if degs.len() != count {
                return Err(LdpcError::Alist {
                    line: no,
                    msg: format!("{what}: expected {count} values, found {}", degs.len()),
                });
            }
            if let Some(d) = degs.iter().find(|&&d| d > max) {
                return Err(LdpcError::Alist {
                    line: no,
                    msg: format!("{what}: degree {d} exceeds declared maximum {max}"),
                });
            }
            Ok(degs)
        };
        let col_deg = read_degrees(cols, max_col, "column degrees")?;
        let row_deg = read_degrees(rows, max_row, "row degrees")?;

        let mut read_lists = |degs: &[usize], range: usize, what: &str| -> Result<Vec<Vec<usize>>> {
            let mut out = Vec::with_capacity(degs.len());
            for (i, &deg) in degs.iter().enumerate() {
                let (no, vals) = next_line(what)?;
                if vals.len() < deg {
                    return Err(LdpcError::Alist {
                        line: no,
                        msg: format!(
                            "degree mismatch in {what} {}: declared {deg}, found {}",
                            i + 1,
                            vals.len()
                        ),
                    });
                }
                let mut list = Vec::with_capacity(deg);
                for &v in &vals[..deg] {
                    if v == 0 || v > range {
                        return Err(LdpcError::Alist {
                            line: no,
                            msg: format!("index out of range: {v} (valid 1..={range})"),
                        });
                    }
                    list.push(v - 1);
                }
                if vals[deg..].iter().any(|&v| v != 0) {
                    return Err(LdpcError::Alist {
                        line: no,
                        msg: format!("degree mismatch in {what} {}: more than {deg} nonzero indices", i + 1),
                    });
                }
                out.push(list);
            }
            Ok(out)
        };
        let col_lists = read_lists(&col_deg, rows, "column list")?;
        let row_lists = read_lists(&row_deg, cols, "row list")?;

        let mut from_cols: Vec<(usize, usize)> = col_lists
            .iter()
            .enumerate()
            .flat_map(|(c, rs)| rs.iter().map(move |&r| (r, c)))
            .collect();
        let mut from_rows: Vec<(usize, usize)> = row_lists
            .iter()
            .enumerate()
            .flat_map(|(r, cs)| cs.iter().map(move |&c| (r, c)))
            .collect();
        from_cols.sort_unstable();
        from_rows.sort_unstable();
        if from_cols != from_rows {
            return Err(LdpcError::Alist {
                line: 0,
                msg: "column lists and row lists describe different matrices".into(),
            });
        }
        Self::from_entries(rows, cols, &from_rows)
    }
}
