use crate::embed::cooc::CooccurrenceMatrix;
use crate::embed::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// Positive PMI with context-distribution smoothing:
/// `max(0, ln(p(w,c) / (p(w) * p_alpha(c))))`, where
/// `p_alpha(c) = colsum(c)^alpha / sum_c' colsum(c')^alpha`.
pub fn ppmi(cooc: &CooccurrenceMatrix, alpha: f64) -> Result<SparseMatrix> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidInput(format!("alpha must be in (0, 1], got {alpha}")));
    }
    if cooc.total_pairs == 0 {
        return Err(Error::InvalidInput("co-occurrence matrix has no pairs".into()));
    }
    let counts = &cooc.counts;
    let total = cooc.total_pairs as f64;
    let row_p: Vec<f64> = counts.row_sums().into_iter().map(|s| s / total).collect();
    let col_smoothed: Vec<f64> = counts.col_sums().into_iter().map(|s| s.powf(alpha)).collect();
    let col_norm: f64 = col_smoothed.iter().sum();

    let triplets = counts
        .iter()
        .filter_map(|(w, c, n)| {
            let pmi = ((n / total) / (row_p[w] * col_smoothed[c] / col_norm)).ln();
            (pmi > 0.0).then_some((w, c, pmi))
        })
        .collect();
    Ok(SparseMatrix::from_triplets(counts.nrows(), counts.ncols(), triplets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, PeriodCorpus, TimePeriod};
    use crate::embed::cooc::count_cooccurrences;

    fn cooc(text: &str, window: usize) -> CooccurrenceMatrix {
        let pc = PeriodCorpus::new(
            TimePeriod::new(1930, 1939).unwrap(),
            vec![Document::from_text(1930, text)],
        );
        count_cooccurrences(&pc, window, 1).unwrap()
    }

    #[test]
    fn abab() {
        // counts (a,b) = (b,a) = 3 of 6 pairs, every marginal 1/2
        let m = cooc("a b a b", 1);
        let p = ppmi(&m, 1.0).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!((p.get(0, 1) - ln2).abs() < 1e-12);
        assert!((p.get(1, 0) - ln2).abs() < 1e-12);
        assert_eq!(p.get(0, 0), 0.0);
        assert_eq!(p.get(1, 1), 0.0);
    }

    #[test]
    fn uniform_counts_give_zero() {
        // window covering the whole document: every ordered pair once
        let m = cooc("a b c", 2);
        let p = ppmi(&m, 1.0).unwrap();
        // p(w,c) = 1/6, p(w) = p(c) = 1/3: PMI = ln(1.5) for off-diagonal
        // pairs; the diagonal is 0 so marginals are not product-form.
        assert!(p.values().iter().all(|&v| (v - 1.5f64.ln()).abs() < 1e-12));

        let mut full = m.clone();
        let n = m.vocabulary.len();
        let t: Vec<_> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j, 2.0))).collect();
        full.counts = SparseMatrix::from_triplets(n, n, t);
        full.total_pairs = (2 * n * n) as u64;
        assert_eq!(ppmi(&full, 1.0).unwrap().nnz(), 0);
    }

    #[test]
    fn bad_alpha() {
        let m = cooc("a b", 1);
        assert!(ppmi(&m, 0.0).is_err());
        assert!(ppmi(&m, 1.5).is_err());
    }

    #[test]
    fn non_negative() {
        let m = cooc("a b c a d b e a c c b d", 2);
        let p = ppmi(&m, 0.75).unwrap();
        assert!(p.values().iter().all(|&v| v > 0.0));
    }
}
