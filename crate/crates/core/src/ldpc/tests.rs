use super::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HAMMING_ALIST: &str = "\
7 3
3 4
1 1 2 1 2 2 3
4 4 4
1 0 0
2 0 0
1 2 0
3 0 0
1 3 0
2 3 0
1 2 3
1 3 5 7
2 3 6 7
4 5 6 7
";

fn dense(h: &ParityCheckMatrix) -> Vec<Vec<u8>> {
    let mut m = vec![vec![0u8; h.cols()]; h.rows()];
    for (r, c) in h.entries() {
        m[r][c] = 1;
    }
    m
}

#[test]
fn hamming_alist_loads() {
    let h = ParityCheckMatrix::from_alist(HAMMING_ALIST).unwrap();
    assert_eq!((h.rows(), h.cols(), h.num_entries()), (3, 7, 12));
    assert_eq!(h, hamming_7_4());
}

#[test]
fn alist_roundtrip_wifi() {
    let h = wifi_648_r12();
    assert_eq!((h.rows(), h.cols()), (324, 648));
    let back = ParityCheckMatrix::from_alist(&h.to_alist()).unwrap();
    assert_eq!(back, h);
}

#[test]
fn alist_zero_index_is_out_of_range() {
    let bad = HAMMING_ALIST.replacen("1 0 0\n2 0 0", "0 0 0\n2 0 0", 1);
    let err = ParityCheckMatrix::from_alist(&bad).unwrap_err().to_string();
    assert!(err.contains("index out of range"), "{err}");
    assert!(err.contains("line 5"), "{err}");
}

#[test]
fn alist_errors_report_lines() {
    let err = ParityCheckMatrix::from_alist("7\n").unwrap_err().to_string();
    assert!(err.contains("line 1") && err.contains("dimension"), "{err}");

    let bad = HAMMING_ALIST.replacen("1 2 3\n1 3 5 7", "1 2 9\n1 3 5 7", 1);
    let err = ParityCheckMatrix::from_alist(&bad).unwrap_err().to_string();
    assert!(err.contains("line 11") && err.contains("out of range"), "{err}");

    let bad = HAMMING_ALIST.replacen("1 1 2 1 2 2 3", "1 1 2 1 2 2 2", 1);
    let err = ParityCheckMatrix::from_alist(&bad).unwrap_err().to_string();
    assert!(err.contains("degree mismatch"), "{err}");
}

#[test]
fn matrix_invariants_enforced() {
    assert!(ParityCheckMatrix::from_entries(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)]).is_err());
    assert!(ParityCheckMatrix::from_entries(1, 3, &[(0, 0), (0, 1)]).is_err());
    assert!(ParityCheckMatrix::from_entries(1, 2, &[(0, 0), (0, 0), (0, 1)]).is_err());
    assert!(ParityCheckMatrix::from_entries(1, 3, &[(0, 0), (0, 1), (0, 2), (1, 2)]).is_err());
}

#[test]
fn all_zero_info_encodes_to_zero() {
    let code = LdpcCode::new(wifi_648_r12());
    assert_eq!(code.info_len(), 324);
    assert!(!code.is_rate_adjusted());
    let cw = code.encode(&vec![0; 324]).unwrap();
    assert!(cw.bits.iter().all(|&b| b == 0));
}

#[test]
fn hamming_info_1000_has_zero_syndrome() {
    let code = LdpcCode::new(hamming_7_4());
    let cw = code.encode(&[1, 0, 0, 0]).unwrap();
    let m = dense(code.h());
    for row in &m {
        let parity: u8 = row.iter().zip(&cw.bits).map(|(a, b)| a & b).fold(0, |x, y| x ^ y);
        assert_eq!(parity, 0);
    }
    assert_eq!(code.extract_info(&cw.bits), vec![1, 0, 0, 0]);
}

#[test]
fn syndrome_matches_dense_product() {
    let h = hamming_7_4();
    let m = dense(&h);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let v: Vec<u8> = (0..7).map(|_| rng.random_range(0..2)).collect();
        let expected: Vec<u8> = m
            .iter()
            .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum::<u8>() % 2)
            .collect();
        assert_eq!(h.syndrome(&v).unwrap(), expected);
    }
    assert!(matches!(
        h.syndrome(&[0; 6]),
        Err(LdpcError::LengthMismatch { expected: 7, got: 6 })
    ));
}

#[test]
fn single_flip_syndrome_is_column() {
    let code = LdpcCode::new(wifi_648_r12());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let info: Vec<u8> = (0..324).map(|_| rng.random_range(0..2)).collect();
    let mut cw = code.encode(&info).unwrap().bits;
    cw[100] ^= 1;
    let syn = code.syndrome(&cw).unwrap();
    let col: Vec<u8> = (0..324).map(|r| u8::from(code.h().contains(r, 100))).collect();
    assert_eq!(syn, col);
}

#[test]
fn saturated_llrs_converge_in_one_iteration() {
    let code = LdpcCode::new(wifi_648_r12());
    let out = code
        .decode_bp(&LlrVector::from_bits(&[0; 648], 20.0), DEFAULT_MAX_ITERS)
        .unwrap();
    assert!(out.converged);
    assert_eq!(out.iters_used, 1);
    assert!(out.bits.iter().all(|&b| b == 0));
}

#[test]
fn zero_llrs_do_not_converge() {
    let code = LdpcCode::new(hamming_7_4());
    let out = code.decode_bp(&LlrVector::new(vec![0.0; 7]).unwrap(), 10).unwrap();
    assert!(!out.converged);
    assert_eq!(out.iters_used, 10);
}

#[test]
fn non_finite_llrs_rejected() {
    assert!(matches!(
        LlrVector::new(vec![0.0, f64::NAN]),
        Err(LdpcError::NonFiniteLlr(1))
    ));
}

fn ml_decode(code: &LdpcCode, llrs: &[f64]) -> Vec<u8> {
    let k = code.info_len();
    (0..1u32 << k)
        .map(|m| {
            let info: Vec<u8> = (0..k).map(|i| ((m >> i) & 1) as u8).collect();
            code.encode(&info).unwrap().bits
        })
        .min_by(|a, b| {
            let cost = |c: &Vec<u8>| -> f64 { c.iter().zip(llrs).map(|(&b, &l)| if b == 1 { l } else { 0.0 }).sum() };
            cost(a).partial_cmp(&cost(b)).unwrap()
        })
        .unwrap()
}

#[test]
fn one_flip_hamming_matches_ml() {
    let code = LdpcCode::new(hamming_7_4());
    let cw = code.encode(&[1, 0, 1, 1]).unwrap().bits;
    for flip in 0..7 {
        let llrs: Vec<f64> = cw
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                let sign = if b == 0 { 1.0 } else { -1.0 };
                if i == flip {
                    -2.0 * sign
                } else {
                    8.0 * sign
                }
            })
            .collect();
        let out = code.decode_bp(&LlrVector::new(llrs.clone()).unwrap(), 50).unwrap();
        assert_eq!(out.bits, ml_decode(&code, &llrs));
        assert_eq!(out.bits, cw);
    }
}

#[test]
fn rank_deficient_matrix_is_rate_adjusted() {
    // Last row is the XOR of the first three.
    let rows: [[u8; 8]; 4] = [
        [1, 1, 0, 0, 1, 0, 0, 1],
        [0, 1, 1, 0, 0, 1, 0, 1],
        [0, 0, 1, 1, 0, 0, 1, 0],
        [1, 0, 0, 1, 1, 1, 1, 0],
    ];
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
    let code = LdpcCode::new(ParityCheckMatrix::from_entries(4, 8, &entries).unwrap());
    assert_eq!(code.rank(), 3);
    assert!(code.is_rate_adjusted());
    assert_eq!(code.info_len(), 5);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let info: Vec<u8> = (0..5).map(|_| rng.random_range(0..2)).collect();
        let cw = code.encode(&info).unwrap();
        assert!(code.h().is_codeword(&cw.bits));
        assert_eq!(code.extract_info(&cw.bits), info);
    }
}

#[test]
fn dependent_rows_reduce_rank() {
    let entries = [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2), (2, 3)];
    let code = LdpcCode::new(ParityCheckMatrix::from_entries(3, 4, &entries).unwrap());
    assert_eq!(code.rank(), 2);
    assert!(code.is_rate_adjusted());
    assert_eq!(code.info_len(), 2);
}

#[test]
fn staircase_code_encodes_by_substitution() {
    let h = staircase_qc(6, 15, 3, 1).unwrap();
    let code = LdpcCode::new(h);
    assert_eq!(code.info_len(), 90);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let info: Vec<u8> = (0..90).map(|_| rng.random_range(0..2)).collect();
    let cw = code.encode(&info).unwrap();
    assert!(code.h().is_codeword(&cw.bits));
    assert_eq!(&cw.bits[..90], &info[..]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoder_is_linear_and_valid(seed in any::<u64>()) {
        let code = LdpcCode::new(wifi_648_r12());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<u8> = (0..324).map(|_| rng.random_range(0..2)).collect();
        let y: Vec<u8> = (0..324).map(|_| rng.random_range(0..2)).collect();
        let xy: Vec<u8> = x.iter().zip(&y).map(|(a, b)| a ^ b).collect();
        let (cx, cy, cxy) = (code.encode(&x).unwrap(), code.encode(&y).unwrap(), code.encode(&xy).unwrap());
        prop_assert!(code.h().is_codeword(&cx.bits));
        let sum: Vec<u8> = cx.bits.iter().zip(&cy.bits).map(|(a, b)| a ^ b).collect();
        prop_assert_eq!(sum, cxy.bits);
        prop_assert_eq!(code.extract_info(&cx.bits), x);
    }

    #[test]
    fn noiseless_roundtrip(seed in any::<u64>()) {
        let code = LdpcCode::new(wifi_648_r12());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<u8> = (0..324).map(|_| rng.random_range(0..2)).collect();
        let cw = code.encode(&x).unwrap();
        let out = code.decode_bp(&LlrVector::from_bits(&cw.bits, 20.0), 50).unwrap();
        prop_assert!(out.converged);
        prop_assert_eq!(out.bits, cw.bits);
    }

    #[test]
    fn alist_roundtrip_random(rows in 2usize..8, extra in 1usize..8, seed in any::<u64>()) {
        let cols = rows + extra;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::new();
        for r in 0..rows {
            entries.push((r, r % cols));
            entries.push((r, (r + 1) % cols));
        }
        for c in 0..cols {
            entries.push((rng.random_range(0..rows), c));
        }
        entries.sort_unstable();
        entries.dedup();
        let h = ParityCheckMatrix::from_entries(rows, cols, &entries).unwrap();
        prop_assert_eq!(ParityCheckMatrix::from_alist(&h.to_alist()).unwrap(), h);
    }
}
