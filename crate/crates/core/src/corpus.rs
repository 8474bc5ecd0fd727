//! Time-stamped document ingestion, tokenization and per-decade bucketing.
//!
//! A corpus is read either from JSON lines (`{"year": 1935, "text": "..."}`)
//! or from a `<root>/<year>/<name>.txt` directory tree, tokenized with
//! Turkish-aware lowercasing, and split into fixed ten-year [`TimePeriod`]s.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EPOCH: i32 = 1920;

/// Inclusive year interval used as the key for all period-indexed data.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TimePeriod {
    pub start_year: i32,
    pub end_year: i32,
    pub label: String,
}

impl TimePeriod {
    pub fn new(start_year: i32, end_year: i32) -> Result<Self> {
        if start_year > end_year {
            return Err(Error::InvalidInput(format!(
                "period start {start_year} is after end {end_year}"
            )));
        }
        Ok(TimePeriod {
            start_year,
            end_year,
            label: format!("{start_year}-{end_year}"),
        })
    }

    /// The ten-year bucket holding `year`, with buckets anchored at `epoch`.
    pub fn decade_of(year: i32, epoch: i32) -> Self {
        let start = epoch + (year - epoch).div_euclid(10) * 10;
        TimePeriod {
            start_year: start,
            end_year: start + 9,
            label: format!("{}-{}", start, start + 9),
        }
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start_year..=self.end_year).contains(&year)
    }
}

impl fmt::Display for TimePeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Accepts `1930-1939` or a bare start year `1930` (read as a decade).
impl FromStr for TimePeriod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse period '{s}'"));
        match s.split_once('-') {
            Some((a, b)) => {
                let a = a.trim().parse().map_err(|_| bad())?;
                let b = b.trim().parse().map_err(|_| bad())?;
                TimePeriod::new(a, b)
            }
            None => {
                let start: i32 = s.trim().parse().map_err(|_| bad())?;
                TimePeriod::new(start, start + 9)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub year: i32,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn from_text(year: i32, text: &str) -> Self {
        Document {
            year,
            tokens: tokenize(text),
        }
    }
}

fn turkish_lowercase(word: &str) -> String {
    let mut out = String::with_capacity(word.len());
    for c in word.chars() {
        match c {
            'I' => out.push('ı'),
            'İ' => out.push('i'),
            _ => out.extend(c.to_lowercase()),
        }
    }
    out
}

/// Splits on whitespace, lowercases with Turkish dotted/dotless i rules,
/// trims non-alphanumeric characters at both ends and drops tokens that
/// contain no alphabetic character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
            if !trimmed.chars().any(char::is_alphabetic) {
                return None;
            }
            Some(turkish_lowercase(trimmed))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestFormat {
    /// One JSON object per line with integer `year` and string `text`.
    Jsonl,
    /// `<root>/<year>/<name>.txt`; the year comes from the directory name,
    /// falling back to leading digits of the file name.
    YearDirs,
}

impl FromStr for IngestFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(IngestFormat::Jsonl),
            "year_dirs" | "year-dirs" | "dirs" => Ok(IngestFormat::YearDirs),
            other => Err(Error::Usage(format!("unknown corpus format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub documents: Vec<Document>,
    /// Records that could not be parsed and were skipped.
    pub skipped: usize,
}

#[derive(Deserialize)]
struct JsonRecord {
    year: i32,
    text: String,
}

pub fn ingest(source: &Path, format: IngestFormat) -> Result<Ingested> {
    let ingested = match format {
        IngestFormat::Jsonl => ingest_jsonl(source)?,
        IngestFormat::YearDirs => ingest_year_dirs(source)?,
    };
    if ingested.documents.is_empty() {
        return Err(Error::EmptyCorpus(source.to_path_buf()));
    }
    if ingested.skipped > 0 {
        log::warn!(
            "{}: skipped {} malformed record(s)",
            source.display(),
            ingested.skipped
        );
    }
    Ok(ingested)
}

fn ingest_jsonl(path: &Path) -> Result<Ingested> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut documents = Vec::new();
    let mut skipped = 0;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<JsonRecord>(&line) {
            Ok(rec) => documents.push(Document::from_text(rec.year, &rec.text)),
            Err(_) => skipped += 1,
        }
    }
    Ok(Ingested { documents, skipped })
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn leading_year(name: &str) -> Option<i32> {
    let digits: String = name.chars().take_while(char::is_ascii_digit).collect();
    if digits.len() == 4 {
        digits.parse().ok()
    } else {
        None
    }
}

fn ingest_year_dirs(root: &Path) -> Result<Ingested> {
    let mut documents = Vec::new();
    let mut skipped = 0;
    for entry in sorted_entries(root)? {
        let name = entry
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        if entry.is_dir() {
            let dir_year = name.parse::<i32>().ok();
            for file in sorted_entries(&entry)? {
                if file.extension().and_then(|e| e.to_str()) != Some("txt") {
                    continue;
                }
                let fname = file.file_name().unwrap_or_default().to_string_lossy();
                let year = dir_year.or_else(|| leading_year(&fname));
                match (year, fs::read_to_string(&file)) {
                    (Some(year), Ok(text)) => documents.push(Document::from_text(year, &text)),
                    _ => skipped += 1,
                }
            }
        } else if entry.extension().and_then(|e| e.to_str()) == Some("txt") {
            match (leading_year(&name), fs::read_to_string(&entry)) {
                (Some(year), Ok(text)) => documents.push(Document::from_text(year, &text)),
                _ => skipped += 1,
            }
        }
    }
    Ok(Ingested { documents, skipped })
}

/// All documents of one period with their token statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodCorpus {
    pub period: TimePeriod,
    pub documents: Vec<Document>,
    pub token_count: u64,
    pub vocabulary: HashMap<String, u64>,
}

impl PeriodCorpus {
    pub fn new(period: TimePeriod, documents: Vec<Document>) -> Self {
        let mut vocabulary: HashMap<String, u64> = HashMap::new();
        let mut token_count = 0;
        for doc in &documents {
            token_count += doc.tokens.len() as u64;
            for tok in &doc.tokens {
                *vocabulary.entry(tok.clone()).or_default() += 1;
            }
        }
        PeriodCorpus {
            period,
            documents,
            token_count,
            vocabulary,
        }
    }

    pub fn count(&self, word: &str) -> u64 {
        self.vocabulary.get(word).copied().unwrap_or(0)
    }

    /// Words ordered by descending count, ties by token.
    pub fn words_by_frequency(&self) -> Vec<(&str, u64)> {
        let mut words: Vec<(&str, u64)> = self
            .vocabulary
            .iter()
            .map(|(w, &c)| (w.as_str(), c))
            .collect();
        words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        words
    }

    /// Keeps whole documents, chosen in a seeded random order, until adding
    /// the next one would exceed `max_tokens`.
    pub fn downsample_documents(&self, max_tokens: u64, seed: u64) -> PeriodCorpus {
        if self.token_count <= max_tokens {
            return self.clone();
        }
        let mut order: Vec<usize> = (0..self.documents.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut kept = Vec::new();
        let mut total = 0u64;
        for i in order {
            let len = self.documents[i].tokens.len() as u64;
            if total + len > max_tokens {
                continue;
            }
            total += len;
            kept.push(i);
        }
        kept.sort_unstable();
        let docs = kept.into_iter().map(|i| self.documents[i].clone()).collect();
        PeriodCorpus::new(self.period.clone(), docs)
    }

    /// Writes one document per line as `year<TAB>space-joined tokens`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "# period\t{}", self.period.label).map_err(|e| Error::io(path, e))?;
        for doc in &self.documents {
            writeln!(w, "{}\t{}", doc.year, doc.tokens.join(" ")).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut period = None;
        let mut docs = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if let Some(rest) = line.strip_prefix("# period\t") {
                period = Some(rest.parse::<TimePeriod>()?);
                continue;
            }
            let (year, toks) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(path, i + 1, "expected year<TAB>tokens"))?;
            let year = year
                .parse()
                .map_err(|_| Error::format(path, i + 1, format!("bad year '{year}'")))?;
            docs.push(Document {
                year,
                tokens: toks.split(' ').filter(|t| !t.is_empty()).map(String::from).collect(),
            });
        }
        let period = period.ok_or_else(|| Error::format(path, 1, "missing '# period' header"))?;
        Ok(PeriodCorpus::new(period, docs))
    }
}

/// Assigns every document to its decade. Empty decades are absent.
pub fn bucket_by_decade(docs: Vec<Document>, epoch_year: i32) -> BTreeMap<TimePeriod, PeriodCorpus> {
    let mut grouped: BTreeMap<TimePeriod, Vec<Document>> = BTreeMap::new();
    for doc in docs {
        grouped
            .entry(TimePeriod::decade_of(doc.year, epoch_year))
            .or_default()
            .push(doc);
    }
    grouped
        .into_iter()
        .map(|(p, docs)| (p.clone(), PeriodCorpus::new(p, docs)))
        .collect()
}

/// Relative frequency of one word in each of an ordered list of periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySeries {
    pub word: String,
    pub values: Vec<f64>,
    pub periods: Vec<TimePeriod>,
}

pub fn frequency_series(word: &str, periods: &[PeriodCorpus]) -> FrequencySeries {
    FrequencySeries {
        word: word.to_string(),
        values: periods
            .iter()
            .map(|pc| {
                if pc.token_count == 0 {
                    0.0
                } else {
                    pc.count(word) as f64 / pc.token_count as f64
                }
            })
            .collect(),
        periods: periods.iter().map(|pc| pc.period.clone()).collect(),
    }
}

/// Per-period word counts for every word of a corpus, enough to build a
/// [`FrequencySeries`] for any token without keeping the documents around.
#[derive(Debug, Clone, Default)]
pub struct FrequencyStore {
    periods: Vec<TimePeriod>,
    totals: Vec<u64>,
    counts: HashMap<String, Vec<u64>>,
}

impl FrequencyStore {
    pub fn from_corpora<'a>(corpora: impl IntoIterator<Item = &'a PeriodCorpus>) -> Self {
        let mut corpora: Vec<&PeriodCorpus> = corpora.into_iter().collect();
        corpora.sort_by(|a, b| a.period.cmp(&b.period));
        let n = corpora.len();
        let mut counts: HashMap<String, Vec<u64>> = HashMap::new();
        for (i, pc) in corpora.iter().enumerate() {
            for (w, &c) in &pc.vocabulary {
                counts.entry(w.clone()).or_insert_with(|| vec![0; n])[i] = c;
            }
        }
        FrequencyStore {
            periods: corpora.iter().map(|pc| pc.period.clone()).collect(),
            totals: corpora.iter().map(|pc| pc.token_count).collect(),
            counts,
        }
    }

    pub fn periods(&self) -> &[TimePeriod] {
        &self.periods
    }

    pub fn token_total(&self, period: &TimePeriod) -> Option<u64> {
        self.periods.iter().position(|p| p == period).map(|i| self.totals[i])
    }

    pub fn raw_counts(&self, word: &str) -> Option<&[u64]> {
        self.counts.get(word).map(Vec::as_slice)
    }

    /// Absent words get an all-zero series.
    pub fn series(&self, word: &str) -> FrequencySeries {
        let values = match self.counts.get(word) {
            Some(c) => c
                .iter()
                .zip(&self.totals)
                .map(|(&c, &t)| if t == 0 { 0.0 } else { c as f64 / t as f64 })
                .collect(),
            None => vec![0.0; self.periods.len()],
        };
        FrequencySeries {
            word: word.to_string(),
            values,
            periods: self.periods.clone(),
        }
    }

    /// TSV with columns `word period_label count relative_frequency`.
    pub fn write_tsv<W: Write>(&self, words: &[String], mut out: W) -> std::io::Result<()> {
        writeln!(out, "word\tperiod_label\tcount\trelative_frequency")?;
        for word in words {
            let series = self.series(word);
            for (i, p) in self.periods.iter().enumerate() {
                let count = self.counts.get(word.as_str()).map_or(0, |c| c[i]);
                writeln!(out, "{}\t{}\t{}\t{}", word, p.label, count, series.values[i])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(year: i32, text: &str) -> Document {
        Document::from_text(year, text)
    }

    #[test]
    fn tokenize_strips_punctuation() {
        assert_eq!(tokenize("Belge verildi."), vec!["belge", "verildi"]);
    }

    #[test]
    fn tokenize_turkish_casing() {
        assert_eq!(tokenize("İSTANBUL"), vec!["istanbul"]);
        assert_eq!(tokenize("IRMAK"), vec!["ırmak"]);
        assert_eq!(tokenize("Işık İçin"), vec!["ışık", "için"]);
    }

    #[test]
    fn tokenize_drops_non_alphabetic() {
        assert!(tokenize("1935 --").is_empty());
        assert_eq!(tokenize("madde 3a"), vec!["madde", "3a"]);
    }

    #[test]
    fn ingest_jsonl_single_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#"{{"year":1935,"text":"vesika verildi"}}"#).unwrap();
        let got = ingest(f.path(), IngestFormat::Jsonl).unwrap();
        assert_eq!(got.documents, vec![doc(1935, "vesika verildi")]);
        assert_eq!(got.skipped, 0);
    }

    #[test]
    fn ingest_jsonl_skips_malformed() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#"{{"year":1935,"text":"a"}}"#).unwrap();
        writeln!(f, r#"{{"year":"x","text":"b"}}"#).unwrap();
        writeln!(f, r#"{{"year":1936,"text":"c"}}"#).unwrap();
        writeln!(f, r#"{{"year":1981,"text":"d"}}"#).unwrap();
        let got = ingest(f.path(), IngestFormat::Jsonl).unwrap();
        assert_eq!(got.documents.len(), 3);
        assert_eq!(got.skipped, 1);
    }

    #[test]
    fn ingest_empty_file_is_error() {
        let f = tempfile::NamedTempFile::new().unwrap();
        assert!(matches!(
            ingest(f.path(), IngestFormat::Jsonl),
            Err(Error::EmptyCorpus(_))
        ));
    }

    #[test]
    fn ingest_missing_file_is_io_error() {
        assert!(matches!(
            ingest(Path::new("/nonexistent/corpus.jsonl"), IngestFormat::Jsonl),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn ingest_year_dirs_layout() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("1935")).unwrap();
        fs::create_dir(dir.path().join("1981")).unwrap();
        fs::write(dir.path().join("1935/a.txt"), "Vesika verildi").unwrap();
        fs::write(dir.path().join("1981/b.txt"), "Belge verildi").unwrap();
        fs::write(dir.path().join("1942_notes.txt"), "eski metin").unwrap();
        let got = ingest(dir.path(), IngestFormat::YearDirs).unwrap();
        let years: Vec<i32> = got.documents.iter().map(|d| d.year).collect();
        assert_eq!(years, vec![1935, 1942, 1981]);
    }

    #[test]
    fn bucket_decades() {
        let docs = vec![doc(1935, "a"), doc(1936, "b"), doc(1981, "c")];
        let buckets = bucket_by_decade(docs, 1920);
        assert_eq!(buckets.len(), 2);
        let p30 = TimePeriod::new(1930, 1939).unwrap();
        let p80 = TimePeriod::new(1980, 1989).unwrap();
        assert_eq!(buckets[&p30].documents.len(), 2);
        assert_eq!(buckets[&p80].documents.len(), 1);
    }

    #[test]
    fn bucket_boundary_year() {
        let buckets = bucket_by_decade(vec![doc(1940, "a")], 1920);
        let (p, _) = buckets.iter().next().unwrap();
        assert_eq!((p.start_year, p.end_year), (1940, 1949));
        assert_eq!(p.label, "1940-1949");
    }

    #[test]
    fn bucket_empty() {
        assert!(bucket_by_decade(vec![], 1920).is_empty());
    }

    #[test]
    fn bucket_respects_epoch_offset() {
        let buckets = bucket_by_decade(vec![doc(1921, "a"), doc(1930, "b")], 1921);
        let labels: Vec<_> = buckets.keys().map(|p| p.label.clone()).collect();
        assert_eq!(labels, vec!["1921-1930"]);
    }

    #[test]
    fn frequency_series_cases() {
        let pc = PeriodCorpus::new(TimePeriod::new(1930, 1939).unwrap(), vec![doc(1930, "a a")]);
        assert_eq!(frequency_series("z", std::slice::from_ref(&pc)).values, vec![0.0]);
        assert_eq!(frequency_series("a", std::slice::from_ref(&pc)).values, vec![1.0]);
    }

    #[test]
    fn store_matches_frequency_series() {
        let corpora: Vec<PeriodCorpus> = bucket_by_decade(
            vec![doc(1931, "a b b"), doc(1955, "a c"), doc(1957, "c c")],
            1920,
        )
        .into_values()
        .collect();
        let store = FrequencyStore::from_corpora(&corpora);
        for w in ["a", "b", "c", "zz"] {
            assert_eq!(store.series(w), frequency_series(w, &corpora));
        }
        let mut buf = Vec::new();
        store.write_tsv(&["a".to_string()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("a\t1950-1959\t1\t0.25"));
    }

    #[test]
    fn save_load_roundtrip() {
        let pc = PeriodCorpus::new(
            TimePeriod::new(1930, 1939).unwrap(),
            vec![doc(1931, "vesika verildi"), doc(1932, "ırmak")],
        );
        let f = tempfile::NamedTempFile::new().unwrap();
        pc.save(f.path()).unwrap();
        assert_eq!(PeriodCorpus::load(f.path()).unwrap(), pc);
    }

    #[test]
    fn downsample_keeps_whole_documents() {
        let docs: Vec<Document> = (0..50).map(|i| doc(1930, &"w ".repeat(1 + i % 4))).collect();
        let pc = PeriodCorpus::new(TimePeriod::new(1930, 1939).unwrap(), docs);
        let small = pc.downsample_documents(40, 3);
        assert!(small.token_count <= 40);
        assert!(small.token_count >= 37);
        assert_eq!(small, pc.downsample_documents(40, 3));
    }

    proptest! {
        #[test]
        fn tokenizer_idempotent(text in "\\PC{0,60}") {
            let once = tokenize(&text);
            prop_assert_eq!(tokenize(&once.join(" ")), once);
        }

        #[test]
        fn counts_conserved(texts in prop::collection::vec(("[a-c ]{0,12}", 1920i32..2030), 0..20)) {
            let docs: Vec<Document> = texts.iter().map(|(t, y)| doc(*y, t)).collect();
            let n_docs = docs.len();
            let buckets = bucket_by_decade(docs, 1920);
            let mut seen = 0;
            for pc in buckets.values() {
                seen += pc.documents.len();
                let sum: u64 = pc.vocabulary.values().sum();
                prop_assert_eq!(sum, pc.token_count);
                let lens: u64 = pc.documents.iter().map(|d| d.tokens.len() as u64).sum();
                prop_assert_eq!(lens, pc.token_count);
                prop_assert!(pc.documents.iter().all(|d| pc.period.contains(d.year)));
            }
            prop_assert_eq!(seen, n_docs);
        }
    }
}
