//! Scoring retrieved counterparts against gold pairs (Recall@k, MRR), the
//! temporal sweep, and synthetic replacement corpora with planted pairs.

mod sweep;
mod synth;

pub use sweep::{temporal_sweep, EmbeddingKind, SweepConfig, SweepOutcome};
pub use synth::{generate_synthetic_replacement_corpus, SynthSpec, SyntheticCorpus};

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::align::{AlignmentKind, AlignmentMap};
use crate::corpus::{tokenize, FrequencyStore};
use crate::embed::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::retrieve::{default_pool, Method, QueryOptions, RankedCandidates, RerankOrder, Retriever};
use crate::sigfig::sig6;

/// Query words paired with their expected counterparts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldPairSet {
    pub pairs: Vec<(String, String)>,
    pub provenance: String,
}

impl GoldPairSet {
    pub fn new(pairs: Vec<(String, String)>, provenance: impl Into<String>) -> Result<Self> {
        let mut seen = HashMap::new();
        for (i, (q, c)) in pairs.iter().enumerate() {
            if q.is_empty() || c.is_empty() {
                return Err(Error::InvalidInput(format!("gold pair {} has an empty token", i + 1)));
            }
            if let Some(first) = seen.insert(q.as_str(), i) {
                return Err(Error::InvalidInput(format!(
                    "duplicate query '{q}' at pairs {} and {}",
                    first + 1,
                    i + 1
                )));
            }
        }
        Ok(GoldPairSet {
            pairs,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().map(|(q, _)| q.as_str())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        for line in self.provenance.lines() {
            writeln!(w, "# {line}").map_err(io)?;
        }
        for (q, c) in &self.pairs {
            writeln!(w, "{q}\t{c}").map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

fn gold_token(path: &Path, line: usize, field: &str) -> Result<String> {
    let mut toks = tokenize(field);
    if toks.len() != 1 {
        return Err(Error::format(path, line, format!("'{field}' is not a single token")));
    }
    Ok(toks.remove(0))
}

/// Reads `query<TAB>counterpart` lines. `#` lines are comments and become
/// the provenance note; tokens get the corpus normalization.
pub fn load_gold_pairs(path: &Path) -> Result<GoldPairSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    let mut lines_of: HashMap<String, usize> = HashMap::new();
    let mut notes = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let n = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(note) = trimmed.strip_prefix('#') {
            notes.push(note.trim().to_string());
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::format(path, n, "expected query<TAB>counterpart"));
        }
        let q = gold_token(path, n, fields[0])?;
        let c = gold_token(path, n, fields[1])?;
        if let Some(first) = lines_of.insert(q.clone(), n) {
            return Err(Error::format(path, n, format!("duplicate query '{q}' (first on line {first})")));
        }
        pairs.push((q, c));
    }
    let provenance = if notes.is_empty() {
        path.display().to_string()
    } else {
        notes.join("\n")
    };
    GoldPairSet::new(pairs, provenance)
}

/// What to do with gold queries that have no result list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OovPolicy {
    #[default]
    Skip,
    CountAsMiss,
}

/// Result lists keyed by query word. Gold queries without an entry are
/// out of vocabulary.
pub type QueryResults = BTreeMap<String, RankedCandidates>;

/// 1-based position of `counterpart` in the list, if retrieved.
pub fn rank_in(list: &RankedCandidates, counterpart: &str) -> Option<usize> {
    list.items.iter().position(|c| c.token == counterpart).map(|p| p + 1)
}

/// Per-query reciprocal-rank style scores, skipping or zeroing OOV queries.
fn per_query(results: &QueryResults, gold: &GoldPairSet, policy: OovPolicy, score: impl Fn(Option<usize>) -> f64) -> (f64, usize, usize) {
    let (mut sum, mut n, mut skipped) = (0.0, 0usize, 0usize);
    for (q, c) in &gold.pairs {
        match results.get(q) {
            Some(list) => {
                sum += score(rank_in(list, c));
                n += 1;
            }
            None => match policy {
                OovPolicy::Skip => skipped += 1,
                OovPolicy::CountAsMiss => n += 1,
            },
        }
    }
    let mean = if n == 0 { 0.0 } else { sum / n as f64 };
    (mean, n, skipped)
}

/// Fraction of evaluated queries whose counterpart is within the top `k`.
pub fn recall_at_k(results: &QueryResults, gold: &GoldPairSet, k: usize, policy: OovPolicy) -> f64 {
    per_query(results, gold, policy, |r| match r {
        Some(r) if r <= k => 1.0,
        _ => 0.0,
    })
    .0
}

/// Mean reciprocal rank; a counterpart missing from its list scores 0.
pub fn mrr(results: &QueryResults, gold: &GoldPairSet, policy: OovPolicy) -> f64 {
    per_query(results, gold, policy, |r| r.map_or(0.0, |r| 1.0 / r as f64)).0
}

/// Pairs whose query word has a vector in every space, and how many were
/// removed.
pub fn filter_pairs_present(gold: &GoldPairSet, spaces: &[&EmbeddingSpace]) -> Result<(GoldPairSet, usize)> {
    if spaces.is_empty() {
        return Err(Error::InvalidInput("no spaces to filter against".into()));
    }
    let kept: Vec<(String, String)> = gold
        .pairs
        .iter()
        .filter(|(q, _)| spaces.iter().all(|s| s.contains(q)))
        .cloned()
        .collect();
    let removed = gold.len() - kept.len();
    Ok((
        GoldPairSet {
            pairs: kept,
            provenance: gold.provenance.clone(),
        },
        removed,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCell {
    pub method: Method,
    pub embedding: String,
    pub base: String,
    pub target: String,
    pub recall_at: BTreeMap<usize, f64>,
    pub mrr: f64,
    pub n_queries: usize,
    pub n_skipped_oov: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub cells: Vec<EvalCell>,
    /// Metric conventions in force, e.g. how MRR treats truncated lists.
    pub conventions: BTreeMap<String, String>,
}

impl EvalReport {
    pub fn cell(&self, method: Method, embedding: &str, base: &str, target: &str) -> Option<&EvalCell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.embedding == embedding && c.base == base && c.target == target)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("bad report JSON: {e}")))
    }

    /// Flat `method,embedding,base,target,k,recall,mrr` rows, one per k.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "method,embedding,base,target,k,recall,mrr")?;
        for c in &self.cells {
            for (k, r) in &c.recall_at {
                writeln!(out, "{},{},{},{},{},{},{}", c.method, c.embedding, c.base, c.target, k, r, c.mrr)?;
            }
        }
        Ok(())
    }

    /// Aligned human-readable table.
    pub fn write_summary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let ks: Vec<usize> = {
            let mut ks: Vec<usize> = self.cells.iter().flat_map(|c| c.recall_at.keys().copied()).collect();
            ks.sort_unstable();
            ks.dedup();
            ks
        };
        write!(out, "{:<6} {:<6} {:<10} {:<10}", "method", "emb", "base", "target")?;
        for k in &ks {
            write!(out, " {:>9}", format!("R@{k}"))?;
        }
        writeln!(out, " {:>9} {:>5} {:>5}", "MRR", "n", "oov")?;
        for c in &self.cells {
            write!(out, "{:<6} {:<6} {:<10} {:<10}", c.method.to_string(), c.embedding, c.base, c.target)?;
            for k in &ks {
                let v = c.recall_at.get(k).map_or("-".to_string(), |v| sig6(*v));
                write!(out, " {v:>9}")?;
            }
            writeln!(out, " {:>9} {:>5} {:>5}", sig6(c.mrr), c.n_queries, c.n_skipped_oov)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSettings {
    pub methods: Vec<Method>,
    pub ks: Vec<usize>,
    pub order: RerankOrder,
    pub oov: OovPolicy,
    pub exclude_query: bool,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            methods: vec![Method::Op, Method::OpSc, Method::Lt],
            ks: vec![1, 10, 100],
            order: RerankOrder::AnticorrelatedFirst,
            oov: OovPolicy::Skip,
            exclude_query: true,
        }
    }
}

impl EvalSettings {
    pub fn conventions(&self) -> BTreeMap<String, String> {
        let kmax = self.ks.iter().copied().max().unwrap_or(1);
        [
            ("mrr_list", "truncated retrieved list; counterpart absent scores 0".to_string()),
            ("opsc_mrr_pool", format!("reranked pool of {} (largest k = {kmax})", default_pool(kmax))),
            ("opsc_recall", "each k reranks its own pool".to_string()),
            ("oov", match self.oov {
                OovPolicy::Skip => "skipped".to_string(),
                OovPolicy::CountAsMiss => "counted as miss".to_string(),
            }),
            ("query_excluded_from_candidates", self.exclude_query.to_string()),
            ("rerank_order", self.order.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// Fitted maps available for an evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Maps<'a> {
    pub orthogonal: Option<&'a AlignmentMap>,
    pub linear: Option<&'a AlignmentMap>,
}

impl<'a> Maps<'a> {
    fn for_method(&self, m: Method) -> Result<&'a AlignmentMap> {
        let (map, kind) = match m.required_map() {
            AlignmentKind::Orthogonal => (self.orthogonal, AlignmentKind::Orthogonal),
            AlignmentKind::Linear => (self.linear, AlignmentKind::Linear),
        };
        map.ok_or_else(|| Error::InvalidInput(format!("method {m} needs a {kind} map")))
    }
}

fn run_queries(
    retriever: &Retriever<'_>,
    gold: &GoldPairSet,
    method: Method,
    opts: &QueryOptions,
) -> Result<QueryResults> {
    let index = retriever.index();
    let mut out = QueryResults::new();
    for q in gold.queries() {
        match retriever.query_with(&index, q, method, opts) {
            Ok(list) => {
                out.insert(q.to_string(), list);
            }
            Err(Error::OutOfVocabulary { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Scores each requested method on one (base, target) pair of spaces.
pub fn evaluate_methods(
    base: &EmbeddingSpace,
    target: &EmbeddingSpace,
    maps: Maps<'_>,
    frequencies: Option<&FrequencyStore>,
    gold: &GoldPairSet,
    embedding: &str,
    settings: &EvalSettings,
) -> Result<Vec<EvalCell>> {
    if settings.ks.is_empty() || settings.ks.contains(&0) {
        return Err(Error::InvalidInput("k values must be >= 1".into()));
    }
    let kmax = *settings.ks.iter().max().unwrap();
    let mut cells = Vec::new();
    for &method in &settings.methods {
        let map = maps.for_method(method)?;
        let retriever = Retriever::new(base, target, map, frequencies)?;
        let opts = |k: usize, pool: Option<usize>| QueryOptions {
            k,
            pool,
            order: settings.order,
            exclude_query: settings.exclude_query,
        };
        let mut recall_at = BTreeMap::new();
        let (mrr_value, n, skipped) = match method {
            Method::OpSc => {
                for &k in &settings.ks {
                    let res = run_queries(&retriever, gold, method, &opts(k, None))?;
                    recall_at.insert(k, recall_at_k(&res, gold, k, settings.oov));
                }
                let pool = default_pool(kmax);
                let res = run_queries(&retriever, gold, method, &opts(pool, Some(pool)))?;
                per_query(&res, gold, settings.oov, |r| r.map_or(0.0, |r| 1.0 / r as f64))
            }
            _ => {
                let res = run_queries(&retriever, gold, method, &opts(kmax, None))?;
                for &k in &settings.ks {
                    recall_at.insert(k, recall_at_k(&res, gold, k, settings.oov));
                }
                per_query(&res, gold, settings.oov, |r| r.map_or(0.0, |r| 1.0 / r as f64))
            }
        };
        cells.push(EvalCell {
            method,
            embedding: embedding.to_string(),
            base: base.meta.period.clone().unwrap_or_else(|| "base".into()),
            target: target.meta.period.clone().unwrap_or_else(|| "target".into()),
            recall_at,
            mrr: mrr_value,
            n_queries: n,
            n_skipped_oov: skipped,
        });
    }
    Ok(cells)
}
