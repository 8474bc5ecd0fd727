//! Counterpart retrieval: exact cosine k-NN over an aligned query vector,
//! optionally reranked by the Spearman correlation of frequency series.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::align::{align_vector, AlignmentKind, AlignmentMap};
use crate::corpus::{FrequencySeries, FrequencyStore};
use crate::embed::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::sigfig::sig6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "OP")]
    Op,
    #[serde(rename = "OP+SC")]
    OpSc,
    #[serde(rename = "LT")]
    Lt,
}

impl Method {
    pub fn required_map(self) -> AlignmentKind {
        match self {
            Method::Op | Method::OpSc => AlignmentKind::Orthogonal,
            Method::Lt => AlignmentKind::Linear,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Op => "OP",
            Method::OpSc => "OP+SC",
            Method::Lt => "LT",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "op" => Ok(Method::Op),
            "opsc" | "op+sc" | "op_sc" => Ok(Method::OpSc),
            "lt" => Ok(Method::Lt),
            _ => Err(Error::Usage(format!("unknown method '{s}' (op, opsc, lt)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RerankOrder {
    /// Most negative correlation first.
    #[default]
    AnticorrelatedFirst,
    /// Decreasing correlation.
    CorrelatedFirst,
}

impl fmt::Display for RerankOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RerankOrder::AnticorrelatedFirst => "anti",
            RerankOrder::CorrelatedFirst => "desc",
        })
    }
}

impl FromStr for RerankOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anti" | "anticorrelated_first" => Ok(RerankOrder::AnticorrelatedFirst),
            "desc" | "correlated_first" => Ok(RerankOrder::CorrelatedFirst),
            _ => Err(Error::Usage(format!("unknown order '{s}' (anti, desc)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub token: String,
    pub cosine: f64,
    pub spearman_rho: Option<f64>,
    pub final_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidates {
    pub query: String,
    pub method: Method,
    pub k: usize,
    pub pool: usize,
    pub order: Option<RerankOrder>,
    pub items: Vec<Candidate>,
    pub warnings: Vec<String>,
}

impl RankedCandidates {
    pub fn rank_of(&self, token: &str) -> Option<usize> {
        self.items.iter().find(|c| c.token == token).map(|c| c.final_rank)
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.items.iter().map(|c| c.token.as_str()).collect()
    }

    fn renumber(&mut self) {
        for (i, c) in self.items.iter_mut().enumerate() {
            c.final_rank = i + 1;
        }
    }

    /// `rank token cosine rho`, preceded by a `#` header echoing the query
    /// settings.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# query={} method={} k={} pool={} order={}",
            self.query,
            self.method,
            self.k,
            self.pool,
            self.order.map_or("-".to_string(), |o| o.to_string())
        )?;
        writeln!(out, "rank\ttoken\tcosine\trho")?;
        for c in &self.items {
            let rho = c.spearman_rho.map_or("NA".to_string(), sig6);
            writeln!(out, "{}\t{}\t{}\t{}", c.final_rank, c.token, sig6(c.cosine), rho)?;
        }
        Ok(())
    }
}

/// Unit-normalized copy of a space for repeated cosine scans.
#[derive(Debug, Clone)]
pub struct CosineIndex<'a> {
    space: &'a EmbeddingSpace,
    unit_rows: DMatrix<f64>,
}

impl<'a> CosineIndex<'a> {
    pub fn new(space: &'a EmbeddingSpace) -> Self {
        let mut unit_rows = space.matrix().clone();
        for mut row in unit_rows.row_iter_mut() {
            let n = row.norm();
            if n > 0.0 {
                row /= n;
            }
        }
        CosineIndex { space, unit_rows }
    }

    pub fn space(&self) -> &EmbeddingSpace {
        self.space
    }

    /// Exact top-`k` by cosine, excluding `exclude`; ties broken by token.
    pub fn knn(&self, query: &DVector<f64>, k: usize, exclude: &HashSet<String>) -> Result<Vec<Candidate>> {
        if k == 0 {
            return Err(Error::InvalidInput("k must be >= 1".into()));
        }
        if query.len() != self.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                got: query.len(),
            });
        }
        let qn = query.norm();
        let scores = if qn > 0.0 {
            &self.unit_rows * (query / qn)
        } else {
            DVector::zeros(self.space.len())
        };
        let vocab = self.space.vocabulary();
        let mut ids: Vec<usize> = (0..vocab.len()).filter(|&i| !exclude.contains(&vocab[i])).collect();
        let cmp = |a: &usize, b: &usize| -> Ordering {
            scores[*b]
                .total_cmp(&scores[*a])
                .then_with(|| vocab[*a].cmp(&vocab[*b]))
        };
        if k < ids.len() {
            ids.select_nth_unstable_by(k - 1, cmp);
            ids.truncate(k);
        }
        ids.sort_by(cmp);
        Ok(ids
            .into_iter()
            .enumerate()
            .map(|(r, i)| Candidate {
                token: vocab[i].clone(),
                cosine: scores[i],
                spearman_rho: None,
                final_rank: r + 1,
            })
            .collect())
    }
}

pub fn knn(space: &EmbeddingSpace, query: &DVector<f64>, k: usize, exclude: &HashSet<String>) -> Result<Vec<Candidate>> {
    let available = space.vocabulary().iter().filter(|w| !exclude.contains(*w)).count();
    if k > available {
        log::warn!("k = {k} exceeds the {available} searchable words; returning all of them");
    }
    CosineIndex::new(space).knn(query, k, exclude)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j share the mean of ranks i+1..=j+1
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of average ranks. Undefined when either series is
/// constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidInput("spearman needs at least two points".into()));
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

pub fn spearman_series(a: &FrequencySeries, b: &FrequencySeries) -> Result<f64> {
    if a.periods != b.periods {
        return Err(Error::InvalidInput(format!(
            "series for '{}' and '{}' use different period axes",
            a.word, b.word
        )));
    }
    spearman(&a.values, &b.values)
}

/// Annotates each candidate with its correlation to the query series and
/// re-sorts: defined correlations first in the requested direction (cosine
/// breaks ties), then undefined ones in their previous order.
pub fn rerank_spearman(
    cands: &RankedCandidates,
    query_series: &FrequencySeries,
    series_of: impl Fn(&str) -> FrequencySeries,
    order: RerankOrder,
) -> RankedCandidates {
    let mut defined = Vec::new();
    let mut undefined = Vec::new();
    for c in &cands.items {
        let rho = spearman_series(query_series, &series_of(&c.token)).ok();
        let c = Candidate {
            spearman_rho: rho,
            ..c.clone()
        };
        if rho.is_some() {
            defined.push(c);
        } else {
            undefined.push(c);
        }
    }
    defined.sort_by(|a, b| {
        let (ra, rb) = (a.spearman_rho.unwrap(), b.spearman_rho.unwrap());
        let primary = match order {
            RerankOrder::AnticorrelatedFirst => ra.total_cmp(&rb),
            RerankOrder::CorrelatedFirst => rb.total_cmp(&ra),
        };
        primary.then_with(|| b.cosine.total_cmp(&a.cosine))
    });
    defined.extend(undefined);
    let mut out = RankedCandidates {
        items: defined,
        order: Some(order),
        ..cands.clone()
    };
    out.renumber();
    out
}

/// Neighbour pool fetched before reranking: 1→5, 10→15 and 100→150, and
/// `max(k + 5, ceil(1.5 k))` for any other `k`.
pub fn default_pool(k: usize) -> usize {
    match k {
        1 => 5,
        10 => 15,
        100 => 150,
        _ => (k + 5).max((3 * k).div_ceil(2)),
    }
}

/// Closest base-vocabulary spellings by edit distance.
pub fn suggest_spellings(word: &str, vocabulary: &[String], n: usize) -> Vec<String> {
    let mut scored: Vec<(usize, &String)> = vocabulary
        .iter()
        .map(|w| (strsim::levenshtein(word, w), w))
        .collect();
    scored.sort();
    scored.into_iter().take(n).map(|(_, w)| w.clone()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryOptions {
    pub k: usize,
    /// Neighbours fetched before reranking; `None` uses [`default_pool`].
    pub pool: Option<usize>,
    pub order: RerankOrder,
    /// Keep the query token itself out of the target candidates.
    pub exclude_query: bool,
}

impl QueryOptions {
    pub fn new(k: usize) -> Self {
        QueryOptions {
            k,
            pool: None,
            order: RerankOrder::default(),
            exclude_query: true,
        }
    }

    pub fn pool_size(&self) -> usize {
        self.pool.unwrap_or_else(|| default_pool(self.k))
    }
}

/// Answers counterpart queries from one base space into one target space
/// through a fitted map. Both spaces are preprocessed the way the map was
/// fitted.
pub struct Retriever<'a> {
    base: EmbeddingSpace,
    target: EmbeddingSpace,
    map: &'a AlignmentMap,
    frequencies: Option<&'a FrequencyStore>,
}

impl<'a> Retriever<'a> {
    pub fn new(
        base: &EmbeddingSpace,
        target: &EmbeddingSpace,
        map: &'a AlignmentMap,
        frequencies: Option<&'a FrequencyStore>,
    ) -> Result<Self> {
        if base.dim() != map.dim() || target.dim() != map.dim() {
            return Err(Error::DimensionMismatch {
                expected: map.dim(),
                got: base.dim().max(target.dim()),
            });
        }
        Ok(Retriever {
            base: map.preprocess.apply(base),
            target: map.preprocess.apply(target),
            map,
            frequencies,
        })
    }

    pub fn base(&self) -> &EmbeddingSpace {
        &self.base
    }

    pub fn target(&self) -> &EmbeddingSpace {
        &self.target
    }

    pub fn index(&self) -> CosineIndex<'_> {
        CosineIndex::new(&self.target)
    }

    pub fn query(&self, word: &str, method: Method, opts: &QueryOptions) -> Result<RankedCandidates> {
        self.query_with(&self.index(), word, method, opts)
    }

    /// Like [`Retriever::query`] but reuses a prebuilt target index.
    pub fn query_with(&self, index: &CosineIndex<'_>, word: &str, method: Method, opts: &QueryOptions) -> Result<RankedCandidates> {
        if method.required_map() != self.map.kind {
            return Err(Error::InvalidInput(format!(
                "method {method} needs a {} map, got {}",
                method.required_map(),
                self.map.kind
            )));
        }
        let v = self.base.vector(word).ok_or_else(|| Error::OutOfVocabulary {
            word: word.to_string(),
            suggestions: suggest_spellings(word, self.base.vocabulary(), 5),
        })?;
        let aligned = align_vector(self.map, &v)?;
        let mut exclude = HashSet::new();
        if opts.exclude_query {
            exclude.insert(word.to_string());
        }
        let searchable = self.target.len() - usize::from(self.target.contains(word) && opts.exclude_query);
        let mut warnings = Vec::new();

        let (fetch, pool) = match method {
            Method::OpSc => {
                let pool = opts.pool_size();
                if pool < opts.k {
                    return Err(Error::InvalidInput(format!("pool {pool} is smaller than k {}", opts.k)));
                }
                (pool, pool)
            }
            _ => (opts.k, opts.k),
        };
        if fetch > searchable {
            warnings.push(format!("requested {fetch} neighbours but only {searchable} words are searchable"));
        }
        let items = index.knn(&aligned, fetch, &exclude)?;
        let mut ranked = RankedCandidates {
            query: word.to_string(),
            method,
            k: opts.k,
            pool,
            order: None,
            items,
            warnings,
        };
        if method == Method::OpSc {
            let store = self
                .frequencies
                .ok_or_else(|| Error::InvalidInput("OP+SC needs frequency series".into()))?;
            ranked = rerank_spearman(&ranked, &store.series(word), |t| store.series(t), opts.order);
            ranked.items.truncate(opts.k);
        }
        Ok(ranked)
    }
}

/// One-shot counterpart query; see [`Retriever`] for repeated queries.
pub fn query_counterparts(
    word: &str,
    base: &EmbeddingSpace,
    target: &EmbeddingSpace,
    map: &AlignmentMap,
    method: Method,
    opts: &QueryOptions,
    frequencies: Option<&FrequencyStore>,
) -> Result<RankedCandidates> {
    Retriever::new(base, target, map, frequencies)?.query(word, method, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TimePeriod;
    use crate::embed::EmbeddingMeta;
    use proptest::prelude::*;

    fn space(words: &[&str], rows: &[&[f64]]) -> EmbeddingSpace {
        let d = rows[0].len();
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        EmbeddingSpace::new(
            words.iter().map(|w| w.to_string()).collect(),
            DMatrix::from_row_slice(rows.len(), d, &data),
            EmbeddingMeta::default(),
        )
        .unwrap()
    }

    fn hand_space() -> EmbeddingSpace {
        space(
            &["a", "b", "c", "d", "e"],
            &[&[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[-1.0, 0.2], &[3.0, 0.5]],
        )
    }

    #[test]
    fn knn_hand_ranking() {
        let s = hand_space();
        let q = DVector::from_vec(vec![1.0, 0.0]);
        let got = knn(&s, &q, 5, &HashSet::new()).unwrap();
        // cosines: a 1, e 3/sqrt(9.25)=0.98639, b 0.70711, c 0, d -0.98058
        let tokens: Vec<&str> = got.iter().map(|c| c.token.as_str()).collect();
        assert_eq!(tokens, vec!["a", "e", "b", "c", "d"]);
        assert!((got[1].cosine - 3.0 / 9.25f64.sqrt()).abs() < 1e-12);
        assert_eq!(got.iter().map(|c| c.final_rank).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn knn_excludes_query_word() {
        let s = hand_space();
        let q = s.vector("b").unwrap();
        let ex: HashSet<String> = ["b".to_string()].into();
        let got = knn(&s, &q, 1, &ex).unwrap();
        // brute force over the remaining words
        let best = ["a", "c", "d", "e"]
            .iter()
            .map(|w| {
                let v = s.vector(w).unwrap();
                (v.dot(&q) / (v.norm() * q.norm()), *w)
            })
            .max_by(|x, y| x.0.total_cmp(&y.0))
            .unwrap();
        assert_eq!(got[0].token, best.1);
    }

    #[test]
    fn knn_orthogonal_and_overflow() {
        let s = space(&["x", "y"], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let got = knn(&s, &DVector::from_vec(vec![1.0, 0.0]), 10, &HashSet::new()).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[1].cosine, 0.0);
    }

    #[test]
    fn knn_ties_by_token() {
        let s = space(&["zz", "aa", "mm"], &[&[1.0, 0.0], &[2.0, 0.0], &[0.5, 0.0]]);
        let got = knn(&s, &DVector::from_vec(vec![1.0, 0.0]), 3, &HashSet::new()).unwrap();
        let tokens: Vec<&str> = got.iter().map(|c| c.token.as_str()).collect();
        assert_eq!(tokens, vec!["aa", "mm", "zz"]);
    }

    #[test]
    fn spearman_cases() {
        assert_eq!(spearman(&[1., 2., 3., 4.], &[10., 20., 30., 40.]).unwrap(), 1.0);
        assert_eq!(spearman(&[1., 2., 3., 4.], &[4., 3., 2., 1.]).unwrap(), -1.0);
        assert!((spearman(&[1., 2., 3., 4.], &[1., 3., 2., 4.]).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(spearman(&[1., 1., 1.], &[1., 2., 3.]), Err(Error::UndefinedCorrelation)));
        assert!(spearman(&[1.], &[1.]).is_err());
        assert!(spearman(&[1., 2.], &[1.]).is_err());
    }

    #[test]
    fn average_ranks_with_ties() {
        assert_eq!(average_ranks(&[10., 20., 20., 5.]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn pool_sizes() {
        assert_eq!(default_pool(1), 5);
        assert_eq!(default_pool(10), 15);
        assert_eq!(default_pool(100), 150);
        assert_eq!(default_pool(3), 8);
        assert_eq!(default_pool(40), 60);
    }

    fn periods(n: usize) -> Vec<TimePeriod> {
        (0..n).map(|i| TimePeriod::new(1920 + 10 * i as i32, 1929 + 10 * i as i32).unwrap()).collect()
    }

    fn series(word: &str, values: &[f64]) -> FrequencySeries {
        FrequencySeries {
            word: word.into(),
            values: values.to_vec(),
            periods: periods(values.len()),
        }
    }

    fn cands(tokens: &[&str]) -> RankedCandidates {
        RankedCandidates {
            query: "q".into(),
            method: Method::OpSc,
            k: tokens.len(),
            pool: tokens.len(),
            order: None,
            items: tokens
                .iter()
                .enumerate()
                .map(|(i, t)| Candidate {
                    token: t.to_string(),
                    cosine: 0.9 - 0.1 * i as f64,
                    spearman_rho: None,
                    final_rank: i + 1,
                })
                .collect(),
            warnings: vec![],
        }
    }

    fn planted_lookup(t: &str) -> FrequencySeries {
        match t {
            "new" => series(t, &[0.0, 1.0, 2.0, 3.0, 4.0]),
            "flat" => series(t, &[1.0, 1.0, 1.0, 1.0, 1.0]),
            "same" => series(t, &[5.0, 4.0, 3.0, 2.0, 1.0]),
            _ => series(t, &[1.0, 3.0, 2.0, 5.0, 4.0]),
        }
    }

    #[test]
    fn rerank_moves_counterpart() {
        let q = series("q", &[4.0, 3.0, 2.0, 1.0, 0.0]);
        let c = cands(&["same", "noise", "flat", "new"]);
        let anti = rerank_spearman(&c, &q, planted_lookup, RerankOrder::AnticorrelatedFirst);
        assert_eq!(anti.tokens(), vec!["new", "noise", "same", "flat"]);
        assert_eq!(anti.items[0].spearman_rho, Some(-1.0));
        assert_eq!(anti.items[3].spearman_rho, None);
        let desc = rerank_spearman(&c, &q, planted_lookup, RerankOrder::CorrelatedFirst);
        // last among the defined correlations; undefined ones follow
        assert_eq!(desc.tokens(), vec!["same", "noise", "new", "flat"]);
    }

    #[test]
    fn rerank_equal_rho_keeps_cosine_order() {
        let q = series("q", &[4.0, 3.0, 2.0, 1.0, 0.0]);
        let c = cands(&["x1", "x2", "x3"]);
        let r = rerank_spearman(&c, &q, |t| series(t, &[0.0, 1.0, 2.0, 3.0, 4.0]), RerankOrder::AnticorrelatedFirst);
        assert_eq!(r.tokens(), c.tokens());
        let flat = rerank_spearman(&c, &series("q", &[1.0; 5]), planted_lookup, RerankOrder::AnticorrelatedFirst);
        assert_eq!(flat.tokens(), c.tokens());
    }

    #[test]
    fn oov_suggestions() {
        let vocab: Vec<String> = ["vesika", "belge", "vesik", "kitap"].iter().map(|s| s.to_string()).collect();
        assert_eq!(suggest_spellings("vesikx", &vocab, 2), vec!["vesik", "vesika"]);
        assert_eq!(suggest_spellings("vesikaa", &vocab, 1), vec!["vesika"]);
    }

    #[test]
    fn tsv_header_echoes_settings() {
        let mut c = cands(&["a", "b"]);
        c.pool = 15;
        c.k = 10;
        c.order = Some(RerankOrder::AnticorrelatedFirst);
        let mut buf = Vec::new();
        c.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# query=q method=OP+SC k=10 pool=15 order=anti\n"));
        assert!(text.contains("1\ta\t0.900000\tNA"));
    }

    proptest! {
        #[test]
        fn spearman_range_and_invariance(v in prop::collection::vec(-100i32..100, 3..12), w in prop::collection::vec(-100i32..100, 3..12)) {
            let n = v.len().min(w.len());
            let a: Vec<f64> = v[..n].iter().map(|&x| x as f64).collect();
            let b: Vec<f64> = w[..n].iter().map(|&x| x as f64).collect();
            if let Ok(rho) = spearman(&a, &b) {
                prop_assert!((-1.0..=1.0).contains(&rho));
                let a_exp: Vec<f64> = a.iter().map(|x| (x / 50.0).exp() + 3.0 * x).collect();
                prop_assert!((spearman(&a_exp, &b).unwrap() - rho).abs() < 1e-12);
                prop_assert!((spearman(&a, &a).unwrap() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn rerank_is_permutation(rhos in prop::collection::vec(0usize..6, 1..10)) {
            let tokens: Vec<String> = (0..rhos.len()).map(|i| format!("t{i}")).collect();
            let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
            let c = cands(&refs);
            let q = series("q", &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
            let lookup = |t: &str| {
                let i: usize = t[1..].parse().unwrap();
                let mut v: Vec<f64> = (0..6).map(|x| x as f64).collect();
                v.swap(0, rhos[i]);
                series(t, &v)
            };
            let r = rerank_spearman(&c, &q, lookup, RerankOrder::AnticorrelatedFirst);
            let mut a = r.tokens();
            let mut b = c.tokens();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
            prop_assert_eq!(r.items.iter().map(|c| c.final_rank).collect::<Vec<_>>(), (1..=c.items.len()).collect::<Vec<_>>());
        }
    }
}
