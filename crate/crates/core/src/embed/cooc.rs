use std::collections::HashMap;

use crate::corpus::PeriodCorpus;
use crate::embed::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// Word-by-context counts within a symmetric window.
#[derive(Debug, Clone)]
pub struct CooccurrenceMatrix {
    pub vocabulary: Vec<String>,
    pub counts: SparseMatrix,
    pub window: usize,
    pub total_pairs: u64,
}

/// Vocabulary of tokens seen at least `min_count` times, most frequent
/// first, ties by token.
pub(crate) fn pruned_vocabulary(pc: &PeriodCorpus, min_count: u64) -> Vec<String> {
    pc.words_by_frequency()
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(w, _)| w.to_string())
        .collect()
}

/// Counts, for each token position, every neighbour within `window`
/// positions inside the same document. Pruned tokens keep their positions
/// but contribute no pairs.
pub fn count_cooccurrences(pc: &PeriodCorpus, window: usize, min_count: u64) -> Result<CooccurrenceMatrix> {
    if window == 0 {
        return Err(Error::InvalidInput("window must be >= 1".into()));
    }
    let vocabulary = pruned_vocabulary(pc, min_count);
    if vocabulary.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no token of period {} reaches min_count {min_count}",
            pc.period
        )));
    }
    let index: HashMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();

    let mut pairs: HashMap<(usize, usize), f64> = HashMap::new();
    let mut total_pairs = 0u64;
    for doc in &pc.documents {
        let ids: Vec<Option<usize>> = doc.tokens.iter().map(|t| index.get(t.as_str()).copied()).collect();
        for (i, &center) in ids.iter().enumerate() {
            let Some(w) = center else { continue };
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(ids.len() - 1);
            for (j, ctx) in ids.iter().enumerate().take(hi + 1).skip(lo) {
                if j == i {
                    continue;
                }
                if let Some(c) = *ctx {
                    *pairs.entry((w, c)).or_default() += 1.0;
                    total_pairs += 1;
                }
            }
        }
    }
    let n = vocabulary.len();
    let counts = SparseMatrix::from_triplets(n, n, pairs.into_iter().map(|((w, c), v)| (w, c, v)).collect());
    Ok(CooccurrenceMatrix {
        vocabulary,
        counts,
        window,
        total_pairs,
    })
}

impl CooccurrenceMatrix {
    pub fn count(&self, word: &str, context: &str) -> f64 {
        let pos = |t: &str| self.vocabulary.iter().position(|w| w == t);
        match (pos(word), pos(context)) {
            (Some(w), Some(c)) => self.counts.get(w, c),
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, TimePeriod};
    use proptest::prelude::*;

    fn pc(docs: &[&str]) -> PeriodCorpus {
        PeriodCorpus::new(
            TimePeriod::new(1930, 1939).unwrap(),
            docs.iter().map(|t| Document::from_text(1930, t)).collect(),
        )
    }

    #[test]
    fn window_one() {
        let m = count_cooccurrences(&pc(&["a b c"]), 1, 1).unwrap();
        assert_eq!(m.total_pairs, 4);
        assert_eq!(m.count("a", "b"), 1.0);
        assert_eq!(m.count("b", "a"), 1.0);
        assert_eq!(m.count("b", "c"), 1.0);
        assert_eq!(m.count("c", "b"), 1.0);
        assert_eq!(m.count("a", "c"), 0.0);
    }

    #[test]
    fn window_two() {
        let m = count_cooccurrences(&pc(&["a b c"]), 2, 1).unwrap();
        assert_eq!(m.total_pairs, 6);
        assert_eq!(m.count("a", "c"), 1.0);
        assert_eq!(m.count("c", "a"), 1.0);
    }

    #[test]
    fn no_pairs_across_documents() {
        let m = count_cooccurrences(&pc(&["a", "b"]), 2, 1).unwrap();
        assert_eq!(m.total_pairs, 0);
        assert_eq!(m.counts.nnz(), 0);
    }

    #[test]
    fn pruning() {
        let m = count_cooccurrences(&pc(&["a a b"]), 1, 2).unwrap();
        assert_eq!(m.vocabulary, vec!["a"]);
        assert_eq!(m.total_pairs, 2);
        assert!(count_cooccurrences(&pc(&["a b"]), 1, 5).is_err());
        assert!(count_cooccurrences(&pc(&["a b"]), 0, 1).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_conserved(docs in prop::collection::vec("[a-e]( [a-e]){0,15}", 1..6), window in 1usize..4) {
            let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
            let m = count_cooccurrences(&pc(&refs), window, 1).unwrap();
            let n = m.vocabulary.len();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(m.counts.get(i, j), m.counts.get(j, i));
                }
            }
            let sum: f64 = m.counts.values().iter().sum();
            prop_assert_eq!(sum as u64, m.total_pairs);
        }
    }
}
