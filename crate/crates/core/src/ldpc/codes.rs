//! Builtin parity-check matrices.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ParityCheckMatrix, Result};

/// 802.11n rate-1/2 prototype matrix for the 648-bit code (circulant 27).
#[rustfmt::skip]
const WIFI_648_R12: [[i8; 24]; 12] = [
    [ 0, -1, -1, -1,  0,  0, -1, -1,  0, -1, -1,  0,  1,  0, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1],
    [22,  0, -1, -1, 17, -1,  0,  0, 12, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1, -1, -1, -1],
    [ 6, -1,  0, -1, 10, -1, -1, -1, 24, -1,  0, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1, -1, -1],
    [ 2, -1, -1,  0, 20, -1, -1, -1, 25,  0, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1, -1],
    [23, -1, -1, -1,  3, -1, -1, -1,  0, -1,  9, 11, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1],
    [24, -1, 23,  1, 17, -1,  3, -1, 10, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1],
    [25, -1, -1, -1,  8, -1, -1, -1,  7, 18, -1, -1,  0, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1],
    [13, 24, -1, -1,  0, -1,  8, -1,  6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1],
    [ 7, 20, -1, 16, 22, 10, -1, -1, 23, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1, -1],
    [11, -1, -1, -1, 19, -1, -1, -1, 13, -1,  3, 17, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1],
    [25, -1,  8, -1, 23, 18, -1, 14,  9, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0],
    [ 3, -1, -1, -1, 16, -1, -1,  2, 25,  5, -1, -1,  1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0],
];

/// The (7,4) Hamming code.
pub fn hamming_7_4() -> ParityCheckMatrix {
    let rows: [[u8; 7]; 3] = [[1, 0, 1, 0, 1, 0, 1], [0, 1, 1, 0, 0, 1, 1], [0, 0, 0, 1, 1, 1, 1]];
    let entries: Vec<(usize, usize)> = rows
        .iter()
        .enumerate()
        .flat_map(|(r, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &b)| b == 1)
                .map(move |(c, _)| (r, c))
        })
        .collect();
    ParityCheckMatrix::from_entries(3, 7, &entries).expect("hamming matrix is valid")
}

/// 802.11n rate-1/2, 648-bit code.
pub fn wifi_648_r12() -> ParityCheckMatrix {
    let base: Vec<Vec<Option<usize>>> = WIFI_648_R12
        .iter()
        .map(|row| row.iter().map(|&s| usize::try_from(s).ok()).collect())
        .collect();
    let refs: Vec<&[Option<usize>]> = base.iter().map(Vec::as_slice).collect();
    ParityCheckMatrix::from_base_matrix(&refs, 27).expect("802.11n prototype is valid")
}

/// Rate-1/2 quasi-cyclic code with a staircase parity part.
///
/// Information columns come in groups of `z`; each group gets `col_degree`
/// circulants at distinct random block rows with random shifts. Parity bit
/// `j` is tied to check `j` and `j + 1`, so encoding is an accumulator.
pub fn staircase_qc(block_cols: usize, z: usize, col_degree: usize, seed: u64) -> Result<ParityCheckMatrix> {
    let block_rows = block_cols;
    let rows = block_rows * z;
    let cols = 2 * rows;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(block_cols * col_degree * z + 2 * rows);
    for bc in 0..block_cols {
        for br in sample(&mut rng, block_rows, col_degree.min(block_rows)) {
            let shift = rng.random_range(0..z);
            for i in 0..z {
                entries.push((br * z + i, bc * z + (i + shift) % z));
            }
        }
    }
    for j in 0..rows {
        entries.push((j, rows + j));
        if j + 1 < rows {
            entries.push((j + 1, rows + j));
        }
    }
    ParityCheckMatrix::from_entries(rows, cols, &entries)
}

/// Stand-in for the long 64800-bit rate-1/2 code: 90 block columns of 360,
/// column degree 3 on the information part.
pub fn long_64800_r12() -> ParityCheckMatrix {
    staircase_qc(90, 360, 3, 0x6480_0012).expect("staircase construction is valid")
}
