//! Unigram distributions, KL / Jensen-Shannon divergence between periods,
//! and per-word divergence contributions used to mine vocabulary change.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{FrequencySeries, PeriodCorpus, TimePeriod};
use crate::error::{Error, Result};

/// Candidate pool size used when mining replacement pairs.
pub const DEFAULT_TOP_WORDS: usize = 5000;

/// Probability distribution over a fixed, ordered support.
#[derive(Debug, Clone, PartialEq)]
pub struct UnigramDistribution {
    pub period: TimePeriod,
    support: Vec<String>,
    probabilities: Vec<f64>,
}

impl UnigramDistribution {
    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, word: &str) -> Option<f64> {
        self.support
            .binary_search_by(|w| w.as_str().cmp(word))
            .ok()
            .map(|i| self.probabilities[i])
    }

    /// Builds a distribution directly from probabilities (sorted by token).
    pub fn from_probabilities(period: TimePeriod, entries: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut entries: Vec<(String, f64)> = entries.into_iter().collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        entries.dedup_by(|a, b| a.0 == b.0);
        if entries.is_empty() {
            return Err(Error::InvalidInput("empty support".into()));
        }
        let sum: f64 = entries.iter().map(|e| e.1).sum();
        if entries.iter().any(|e| e.1 < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "probabilities must be non-negative and sum to 1 (sum = {sum})"
            )));
        }
        let (support, probabilities) = entries.into_iter().unzip();
        Ok(UnigramDistribution {
            period,
            support,
            probabilities,
        })
    }

    fn same_support(&self, other: &Self) -> Result<()> {
        if self.support != other.support {
            return Err(Error::InvalidInput(
                "distributions are defined over different supports".into(),
            ));
        }
        Ok(())
    }
}

/// Union of two period vocabularies, sorted.
pub fn union_support(a: &PeriodCorpus, b: &PeriodCorpus) -> Vec<String> {
    let set: BTreeSet<&String> = a.vocabulary.keys().chain(b.vocabulary.keys()).collect();
    set.into_iter().cloned().collect()
}

/// `P(w) = (count(w) + smoothing) / (token_count + smoothing * |support|)`.
pub fn unigram_distribution(
    pc: &PeriodCorpus,
    support: &[String],
    smoothing: f64,
) -> Result<UnigramDistribution> {
    if support.is_empty() {
        return Err(Error::InvalidInput("empty support".into()));
    }
    if pc.token_count == 0 {
        return Err(Error::InvalidInput(format!("period {} has no tokens", pc.period)));
    }
    if smoothing < 0.0 {
        return Err(Error::InvalidInput("smoothing must be >= 0".into()));
    }
    let mut support = support.to_vec();
    support.sort();
    support.dedup();
    let denom = pc.token_count as f64 + smoothing * support.len() as f64;
    let probabilities = support
        .iter()
        .map(|w| (pc.count(w) as f64 + smoothing) / denom)
        .collect();
    Ok(UnigramDistribution {
        period: pc.period.clone(),
        support,
        probabilities,
    })
}

fn plogp_over(p: f64, q: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * (p / q).ln()
    }
}

/// `KL(P || A)` in nats, with `0 log(0/x) = 0`.
pub fn kl_divergence(p: &UnigramDistribution, a: &UnigramDistribution) -> Result<f64> {
    p.same_support(a)?;
    let mut total = 0.0;
    for ((w, &pw), &aw) in p.support.iter().zip(&p.probabilities).zip(&a.probabilities) {
        if pw > 0.0 && aw == 0.0 {
            return Err(Error::InfiniteDivergence(w.clone()));
        }
        total += plogp_over(pw, aw);
    }
    Ok(total)
}

/// Divergence value plus each word's share of it, largest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub base: String,
    pub target: String,
    pub jsd: f64,
    pub log_base: String,
    pub contributions: Vec<(String, f64)>,
}

/// Jensen-Shannon divergence of `target` and `base` against their mean.
pub fn jsd(target: &UnigramDistribution, base: &UnigramDistribution) -> Result<DivergenceReport> {
    target.same_support(base)?;
    let mut contributions: Vec<(String, f64)> = target
        .support
        .iter()
        .zip(target.probabilities.iter().zip(&base.probabilities))
        .map(|(w, (&pt, &pb))| {
            let a = 0.5 * (pt + pb);
            (w.clone(), 0.5 * (plogp_over(pt, a) + plogp_over(pb, a)))
        })
        .collect();
    // exact rounding can leave -0.0 or a tiny negative on identical inputs
    for c in &mut contributions {
        c.1 = c.1.max(0.0);
    }
    let total = contributions.iter().map(|c| c.1).sum();
    contributions.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(DivergenceReport {
        base: base.period.label.clone(),
        target: target.period.label.clone(),
        jsd: total,
        log_base: "e".into(),
        contributions,
    })
}

/// Convenience: JSD between two period corpora over their union vocabulary,
/// without smoothing.
pub fn period_jsd(target: &PeriodCorpus, base: &PeriodCorpus) -> Result<DivergenceReport> {
    let support = union_support(target, base);
    let pt = unigram_distribution(target, &support, 0.0)?;
    let pb = unigram_distribution(base, &support, 0.0)?;
    jsd(&pt, &pb)
}

pub fn top_divergence_words(report: &DivergenceReport, n: usize) -> Vec<String> {
    report
        .contributions
        .iter()
        .take(n)
        .map(|(w, _)| w.clone())
        .collect()
}

impl DivergenceReport {
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# jsd={} log_base={} base={} target={}",
            self.jsd, self.log_base, self.base, self.target
        )?;
        writeln!(out, "token\tcontribution")?;
        for (w, c) in &self.contributions {
            writeln!(out, "{w}\t{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftThresholds {
    /// Below this relative frequency a word counts as absent.
    pub absent_below: f64,
    /// At or above this relative frequency a word counts as present.
    pub present_at: f64,
    /// Frequency ratio needed for `Rose` / `Fell`.
    pub ratio: f64,
}

impl Default for ShiftThresholds {
    fn default() -> Self {
        ShiftThresholds {
            absent_below: 1e-8,
            present_at: 1e-6,
            ratio: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shift {
    Emerged,
    Vanished,
    Rose,
    Fell,
    Stable,
}

pub fn categorize_shift(
    series: &FrequencySeries,
    base: &TimePeriod,
    target: &TimePeriod,
    thresholds: &ShiftThresholds,
) -> Result<Shift> {
    let at = |p: &TimePeriod| {
        series
            .periods
            .iter()
            .position(|q| q == p)
            .map(|i| series.values[i])
            .ok_or_else(|| Error::MissingPeriod(p.label.clone()))
    };
    let (fb, ft) = (at(base)?, at(target)?);
    let t = thresholds;
    Ok(if fb < t.absent_below && ft >= t.present_at {
        Shift::Emerged
    } else if ft < t.absent_below && fb >= t.present_at {
        Shift::Vanished
    } else if fb > 0.0 && ft >= t.ratio * fb {
        Shift::Rose
    } else if ft > 0.0 && fb >= t.ratio * ft {
        Shift::Fell
    } else {
        Shift::Stable
    })
}

/// Shift category for each word of a ranked candidate list.
pub fn categorize_words(
    words: &[String],
    series_of: impl Fn(&str) -> FrequencySeries,
    base: &TimePeriod,
    target: &TimePeriod,
    thresholds: &ShiftThresholds,
) -> Result<HashMap<String, Shift>> {
    words
        .iter()
        .map(|w| Ok((w.clone(), categorize_shift(&series_of(w), base, target, thresholds)?)))
        .collect()
}
