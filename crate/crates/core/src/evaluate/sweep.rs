use std::collections::BTreeMap;

use crate::align::{AlignmentKind, intersect, orthogonal_procrustes, ridge_linear_map, select_seed_pairs, Preprocess, DEFAULT_RIDGE_ALPHA, DEFAULT_SEED_TOP_N};
use crate::corpus::{FrequencyStore, PeriodCorpus, TimePeriod};
use crate::embed::{train_cbow, train_svd, CbowConfig, EmbeddingSpace, SvdConfig};
use crate::error::{Error, Result};

use super::{evaluate_methods, filter_pairs_present, EvalReport, EvalSettings, GoldPairSet, Maps};

#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingKind {
    Svd(SvdConfig),
    Cbow(CbowConfig),
}

impl EmbeddingKind {
    pub fn label(&self) -> &'static str {
        match self {
            EmbeddingKind::Svd(_) => "svd",
            EmbeddingKind::Cbow(_) => "cbow",
        }
    }

    pub fn train(&self, pc: &PeriodCorpus) -> Result<EmbeddingSpace> {
        match self {
            EmbeddingKind::Svd(cfg) => train_svd(pc, cfg),
            EmbeddingKind::Cbow(cfg) => Ok(train_cbow(pc, cfg)?.space),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: TimePeriod,
    pub targets: Vec<TimePeriod>,
    pub embedding: EmbeddingKind,
    /// Downsample every target to the smallest target token count first.
    pub balance_tokens: bool,
    pub balance_seed: u64,
    pub seed_top_n: usize,
    pub ridge_alpha: f64,
    pub preprocess: Preprocess,
    pub eval: EvalSettings,
    /// Target cells evaluated concurrently.
    pub workers: usize,
}

impl SweepConfig {
    pub fn new(base: TimePeriod, targets: Vec<TimePeriod>, embedding: EmbeddingKind) -> Self {
        SweepConfig {
            base,
            targets,
            embedding,
            balance_tokens: false,
            balance_seed: 0,
            seed_top_n: DEFAULT_SEED_TOP_N,
            ridge_alpha: DEFAULT_RIDGE_ALPHA,
            preprocess: Preprocess::default(),
            eval: EvalSettings::default(),
            workers: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub report: EvalReport,
    /// Gold pairs dropped because the query was missing from some target.
    pub filtered_out: usize,
    /// Token budget applied to each target when balancing.
    pub balanced_tokens: Option<u64>,
}

fn corpus_for<'a>(corpora: &'a BTreeMap<TimePeriod, PeriodCorpus>, p: &TimePeriod) -> Result<&'a PeriodCorpus> {
    corpora.get(p).ok_or_else(|| Error::MissingPeriod(p.label.clone()))
}

/// Trains the base and every target space, then scores each method for
/// each target against the gold pairs present in all targets.
pub fn temporal_sweep(
    corpora: &BTreeMap<TimePeriod, PeriodCorpus>,
    gold: &GoldPairSet,
    cfg: &SweepConfig,
) -> Result<SweepOutcome> {
    if cfg.targets.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one target period".into()));
    }
    let base_pc = corpus_for(corpora, &cfg.base)?;
    let mut target_pcs = cfg
        .targets
        .iter()
        .map(|p| corpus_for(corpora, p).cloned())
        .collect::<Result<Vec<_>>>()?;
    let balanced_tokens = if cfg.balance_tokens {
        let budget = target_pcs.iter().map(|pc| pc.token_count).min().unwrap();
        for pc in &mut target_pcs {
            *pc = pc.downsample_documents(budget, cfg.balance_seed);
        }
        Some(budget)
    } else {
        None
    };

    let frequencies = FrequencyStore::from_corpora(corpora.values());
    let base_space = cfg.embedding.train(base_pc)?;
    let target_spaces = train_all(&target_pcs, cfg)?;
    let refs: Vec<&EmbeddingSpace> = target_spaces.iter().collect();
    let (gold, filtered_out) = filter_pairs_present(gold, &refs)?;
    if gold.is_empty() {
        return Err(Error::InvalidInput(format!(
            "none of the {filtered_out} gold queries has a vector in every target period; drop the sparsest targets or lower min_count"
        )));
    }
    if filtered_out > 0 {
        log::info!("{filtered_out} gold pairs dropped: query missing from some target period");
    }

    let mut report = EvalReport {
        cells: Vec::new(),
        conventions: cfg.eval.conventions(),
    };
    for (pc, space) in target_pcs.iter().zip(&target_spaces) {
        let needs = |kind: AlignmentKind| cfg.eval.methods.iter().any(|m| m.required_map() == kind);
        let op = if needs(AlignmentKind::Orthogonal) {
            Some(orthogonal_procrustes(&intersect(&base_space, space, cfg.preprocess)?)?)
        } else {
            None
        };
        let lt = if needs(AlignmentKind::Linear) {
            let seeds = select_seed_pairs(&base_space, space, &base_pc.vocabulary, &pc.vocabulary, cfg.seed_top_n, cfg.preprocess)?;
            Some(ridge_linear_map(&seeds, cfg.ridge_alpha)?)
        } else {
            None
        };
        let maps = Maps {
            orthogonal: op.as_ref(),
            linear: lt.as_ref(),
        };
        report.cells.extend(evaluate_methods(
            &base_space,
            space,
            maps,
            Some(&frequencies),
            &gold,
            cfg.embedding.label(),
            &cfg.eval,
        )?);
    }
    report
        .conventions
        .insert("balanced_tokens".into(), balanced_tokens.map_or("off".into(), |b| b.to_string()));
    Ok(SweepOutcome {
        report,
        filtered_out,
        balanced_tokens,
    })
}

/// Trains target spaces, up to `cfg.workers` at a time.
fn train_all(pcs: &[PeriodCorpus], cfg: &SweepConfig) -> Result<Vec<EmbeddingSpace>> {
    let workers = cfg.workers.max(1);
    if workers == 1 {
        return pcs.iter().map(|pc| cfg.embedding.train(pc)).collect();
    }
    let mut out = Vec::with_capacity(pcs.len());
    for chunk in pcs.chunks(workers) {
        let trained: Vec<Result<EmbeddingSpace>> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|pc| s.spawn(|| cfg.embedding.train(pc))).collect();
            handles.into_iter().map(|h| h.join().expect("training thread panicked")).collect()
        });
        for t in trained {
            out.push(t?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{bucket_by_decade, Document};

    #[test]
    fn missing_period_is_named() {
        let docs = vec![Document::from_text(1931, "a b c")];
        let corpora = bucket_by_decade(docs, 1920);
        let gold = GoldPairSet::new(vec![("a".into(), "b".into())], "t").unwrap();
        let cfg = SweepConfig::new(
            TimePeriod::new(1930, 1939).unwrap(),
            vec![TimePeriod::new(1960, 1969).unwrap()],
            EmbeddingKind::Svd(SvdConfig::default()),
        );
        match temporal_sweep(&corpora, &gold, &cfg) {
            Err(Error::MissingPeriod(p)) => assert_eq!(p, "1960-1969"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
