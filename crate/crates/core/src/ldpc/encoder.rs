use super::{LdpcError, ParityCheckMatrix, Result};

/// Systematic encoder derived from `H` over GF(2).
///
/// Two strategies: forward substitution when the trailing `rows` columns of
/// `H` are lower triangular with a unit diagonal (staircase / IRA codes), and
/// Gauss-Jordan elimination to reduced row echelon form otherwise.
#[derive(Debug, Clone)]
pub(crate) enum Encoder {
    Triangular {
        info_len: usize,
    },
    Dense {
        /// Codeword positions carrying the information bits, ascending.
        info_positions: Vec<usize>,
        /// For each independent check: its pivot column and the indices
        /// (into the info vector) that XOR into it.
        parity: Vec<(usize, Vec<usize>)>,
    },
}

impl Encoder {
    pub(crate) fn new(h: &ParityCheckMatrix) -> Self {
        if is_lower_triangular_tail(h) {
            Encoder::Triangular {
                info_len: h.cols() - h.rows(),
            }
        } else {
            gauss_jordan(h)
        }
    }

    pub(crate) fn info_len(&self) -> usize {
        match self {
            Encoder::Triangular { info_len } => *info_len,
            Encoder::Dense { info_positions, .. } => info_positions.len(),
        }
    }

    pub(crate) fn rank(&self, h: &ParityCheckMatrix) -> usize {
        match self {
            Encoder::Triangular { .. } => h.rows(),
            Encoder::Dense { parity, .. } => parity.len(),
        }
    }

    pub(crate) fn info_positions(&self) -> Vec<usize> {
        match self {
            Encoder::Triangular { info_len } => (0..*info_len).collect(),
            Encoder::Dense { info_positions, .. } => info_positions.clone(),
        }
    }

    pub(crate) fn encode(&self, h: &ParityCheckMatrix, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.info_len() {
            return Err(LdpcError::LengthMismatch {
                expected: self.info_len(),
                got: info.len(),
            });
        }
        let mut cw = vec![0u8; h.cols()];
        match self {
            Encoder::Triangular { info_len } => {
                cw[..*info_len].iter_mut().zip(info).for_each(|(c, &b)| *c = b & 1);
                for r in 0..h.rows() {
                    let pivot = info_len + r;
                    let bit = h
                        .row(r)
                        .iter()
                        .filter(|&&c| c != pivot)
                        .fold(0u8, |acc, &c| acc ^ cw[c]);
                    cw[pivot] = bit;
                }
            }
            Encoder::Dense { info_positions, parity } => {
                for (&pos, &b) in info_positions.iter().zip(info) {
                    cw[pos] = b & 1;
                }
                for (pivot, deps) in parity {
                    cw[*pivot] = deps.iter().fold(0u8, |acc, &i| acc ^ (info[i] & 1));
                }
            }
        }
        Ok(cw)
    }
}

fn is_lower_triangular_tail(h: &ParityCheckMatrix) -> bool {
    let offset = h.cols() - h.rows();
    (0..h.rows()).all(|r| {
        let row = h.row(r);
        row.binary_search(&(offset + r)).is_ok() && row.last().is_some_and(|&c| c == offset + r)
    })
}

fn gauss_jordan(h: &ParityCheckMatrix) -> Encoder {
    let words = h.cols().div_ceil(64);
    let mut m: Vec<Vec<u64>> = (0..h.rows())
        .map(|r| {
            let mut row = vec![0u64; words];
            for &c in h.row(r) {
                row[c / 64] |= 1 << (c % 64);
            }
            row
        })
        .collect();
    let get = |row: &[u64], c: usize| (row[c / 64] >> (c % 64)) & 1 == 1;

    // Pivot search runs right to left so that, for the usual [info | parity]
    // layout, the parity columns become pivots and info stays in front.
    let mut pivots = Vec::new();
    let mut next = 0;
    for c in (0..h.cols()).rev() {
        if next == m.len() {
            break;
        }
        let Some(found) = (next..m.len()).find(|&r| get(&m[r], c)) else {
            continue;
        };
        m.swap(next, found);
        let pivot_row = m[next].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != next && get(row, c) {
                row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
            }
        }
        pivots.push(c);
        next += 1;
    }

    let mut is_pivot = vec![false; h.cols()];
    pivots.iter().for_each(|&c| is_pivot[c] = true);
    let info_positions: Vec<usize> = (0..h.cols()).filter(|&c| !is_pivot[c]).collect();
    let parity = pivots
        .iter()
        .enumerate()
        .map(|(r, &pc)| {
            let deps = info_positions
                .iter()
                .enumerate()
                .filter(|(_, &c)| get(&m[r], c))
                .map(|(i, _)| i)
                .collect();
            (pc, deps)
        })
        .collect();
    Encoder::Dense { info_positions, parity }
}
