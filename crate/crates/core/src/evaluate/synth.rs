use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::TimePeriod;
use crate::error::{Error, Result};

use super::GoldPairSet;

/// Parameters of a planted-replacement corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_pairs: usize,
    pub n_filler_words: usize,
    pub docs_per_period: usize,
    pub periods: Vec<TimePeriod>,
    pub seed: u64,
    /// Template sentences per pair and period, shared between OLD and NEW.
    pub sentences_per_pair: usize,
    /// Filler-only sentences per period.
    pub filler_sentences: usize,
    /// Distinct context words owned by each pair.
    pub context_words: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_pairs: 20,
            n_filler_words: 200,
            docs_per_period: 40,
            periods: (1920..=2020)
                .step_by(10)
                .map(|y| TimePeriod::new(y, y + 9).expect("valid decade"))
                .collect(),
            seed: 7,
            sentences_per_pair: 60,
            filler_sentences: 600,
            context_words: 6,
        }
    }
}

/// Documents as `(year, text)` plus the planted (old, new) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub documents: Vec<(i32, String)>,
    pub gold: GoldPairSet,
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    year: i32,
    text: &'a str,
}

impl SyntheticCorpus {
    /// Writes `corpus.jsonl` and `gold.tsv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let corpus = dir.join("corpus.jsonl");
        let file = File::create(&corpus).map_err(|e| Error::io(&corpus, e))?;
        let mut w = BufWriter::new(file);
        for (year, text) in &self.documents {
            let line = serde_json::to_string(&JsonDoc { year: *year, text }).expect("plain record");
            writeln!(w, "{line}").map_err(|e| Error::io(&corpus, e))?;
        }
        w.flush().map_err(|e| Error::io(&corpus, e))?;
        let gold = dir.join("gold.tsv");
        self.gold.save(&gold)?;
        Ok((corpus, gold))
    }
}

const ONSETS: &[&str] = &["b", "c", "ç", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "ş", "t", "v", "y", "z"];
const VOWELS: &[&str] = &["a", "e", "ı", "i", "o", "ö", "u", "ü"];

fn pseudo_words(n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.random_range(2..=4);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(VOWELS.choose(rng).unwrap());
        }
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// OLD-word sentence count for period `p` of `n`: a linear hand-over from
/// all OLD in the first period to all NEW in the last.
fn old_count(total: usize, p: usize, n: usize) -> usize {
    if n == 1 {
        return total;
    }
    let share = 1.0 - p as f64 / (n - 1) as f64;
    (total as f64 * share).round() as usize
}

/// Builds a corpus where each pair's OLD word is gradually replaced by its
/// NEW word inside the same pool of context words. Every period has the
/// same number of tokens, so both raw and relative frequencies are strictly
/// monotone.
pub fn generate_synthetic_replacement_corpus(spec: &SynthSpec) -> Result<SyntheticCorpus> {
    if spec.n_pairs == 0 {
        return Err(Error::InvalidInput("need at least one pair".into()));
    }
    if spec.periods.is_empty() || spec.docs_per_period == 0 || spec.context_words == 0 {
        return Err(Error::InvalidInput("periods, docs_per_period and context_words must be non-empty".into()));
    }
    if spec.n_filler_words == 0 && spec.filler_sentences > 0 {
        return Err(Error::InvalidInput("filler sentences need filler words".into()));
    }
    let n_periods = spec.periods.len();
    if spec.sentences_per_pair < n_periods.saturating_sub(1) {
        return Err(Error::InvalidInput(format!(
            "sentences_per_pair must be at least {} for strictly monotone series",
            n_periods - 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let words = pseudo_words(spec.n_pairs * (2 + spec.context_words) + spec.n_filler_words, &mut rng);
    let (olds, rest) = words.split_at(spec.n_pairs);
    let (news, rest) = rest.split_at(spec.n_pairs);
    let (contexts, fillers) = rest.split_at(spec.n_pairs * spec.context_words);

    let mut documents = Vec::new();
    for (p, period) in spec.periods.iter().enumerate() {
        let n_old = old_count(spec.sentences_per_pair, p, n_periods);
        let mut sentences: Vec<String> = Vec::new();
        for i in 0..spec.n_pairs {
            let pool = &contexts[i * spec.context_words..(i + 1) * spec.context_words];
            for s in 0..spec.sentences_per_pair {
                let x = if s < n_old { &olds[i] } else { &news[i] };
                let c: Vec<&String> = (0..4).map(|_| pool.choose(&mut rng).unwrap()).collect();
                sentences.push(format!("{} {} {x} {} {}", c[0], c[1], c[2], c[3]));
            }
        }
        for _ in 0..spec.filler_sentences {
            let f: Vec<&str> = (0..5).map(|_| fillers.choose(&mut rng).unwrap().as_str()).collect();
            sentences.push(f.join(" "));
        }
        sentences.shuffle(&mut rng);
        let span = (period.end_year - period.start_year + 1) as usize;
        for d in 0..spec.docs_per_period {
            let text: Vec<&str> = sentences
                .iter()
                .skip(d)
                .step_by(spec.docs_per_period)
                .map(String::as_str)
                .collect();
            if text.is_empty() {
                continue;
            }
            documents.push((period.start_year + (d % span) as i32, text.join(" ")));
        }
    }
    let pairs = olds.iter().cloned().zip(news.iter().cloned()).collect();
    let gold = GoldPairSet::new(
        pairs,
        format!("synthetic replacement pairs: n_pairs={} seed={}", spec.n_pairs, spec.seed),
    )?;
    Ok(SyntheticCorpus { documents, gold })
}
