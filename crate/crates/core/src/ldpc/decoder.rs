use super::{LlrVector, ParityCheckMatrix};

/// Magnitude limit for every message and posterior.
pub const LLR_CLAMP: f64 = 30.0;

/// Result of a belief-propagation run.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Hard decisions on the full codeword.
    pub bits: Vec<u8>,
    pub converged: bool,
    pub iters_used: usize,
}

/// Flooding-schedule sum-product decoder in the log domain.
///
/// Messages live in per-call buffers indexed by edge; edges are laid out
/// check-major so the check update walks contiguous memory.
pub(crate) fn decode_sum_product(h: &ParityCheckMatrix, llrs: &LlrVector, max_iters: usize) -> DecodeOutcome {
    assert!(max_iters >= 1, "max_iters must be at least 1");
    let channel = llrs.as_slice();
    assert_eq!(channel.len(), h.cols(), "LLR length must equal code length");

    let mut check_start = Vec::with_capacity(h.rows() + 1);
    let mut edge_var = Vec::with_capacity(h.num_entries());
    check_start.push(0);
    for r in 0..h.rows() {
        edge_var.extend_from_slice(h.row(r));
        check_start.push(edge_var.len());
    }
    let mut var_edges: Vec<Vec<usize>> = vec![Vec::new(); h.cols()];
    for (e, &v) in edge_var.iter().enumerate() {
        var_edges[v].push(e);
    }

    let mut v2c: Vec<f64> = edge_var.iter().map(|&v| channel[v]).collect();
    let mut c2v = vec![0.0; edge_var.len()];
    let mut tanhs = Vec::new();
    let mut suffix = Vec::new();
    let mut bits = vec![0u8; h.cols()];
    let mut erased;

    for iter in 1..=max_iters {
        for r in 0..h.rows() {
            let (s, e) = (check_start[r], check_start[r + 1]);
            tanhs.clear();
            tanhs.extend(v2c[s..e].iter().map(|&m| (0.5 * m).tanh()));
            // Leave-one-out products via prefix/suffix to avoid dividing by
            // near-zero tanh values.
            suffix.clear();
            suffix.resize(tanhs.len() + 1, 1.0);
            for i in (0..tanhs.len()).rev() {
                suffix[i] = suffix[i + 1] * tanhs[i];
            }
            let mut prefix = 1.0;
            for (i, out) in c2v[s..e].iter_mut().enumerate() {
                let p = prefix * suffix[i + 1];
                *out = (2.0 * p.atanh()).clamp(-LLR_CLAMP, LLR_CLAMP);
                prefix *= tanhs[i];
            }
        }

        erased = false;
        for (v, edges) in var_edges.iter().enumerate() {
            let total = channel[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
            for &e in edges {
                v2c[e] = (total - c2v[e]).clamp(-LLR_CLAMP, LLR_CLAMP);
            }
            bits[v] = u8::from(total < 0.0);
            erased |= total == 0.0;
        }

        // A zero posterior is no decision at all, even if the tie-broken
        // hard decision happens to satisfy every check.
        if !erased && h.is_codeword(&bits) {
            return DecodeOutcome {
                bits,
                converged: true,
                iters_used: iter,
            };
        }
    }
    DecodeOutcome {
        bits,
        converged: false,
        iters_used: max_iters,
    }
}
