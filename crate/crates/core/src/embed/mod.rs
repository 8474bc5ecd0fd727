//! Per-period word embeddings: PPMI + truncated SVD, and CBOW with
//! negative sampling, stored in the common `|V| d` text format.

pub mod cbow;
pub mod cooc;
pub mod ppmi;
pub mod sparse;
pub mod svd;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::config::KeyValues;
use crate::corpus::PeriodCorpus;
use crate::error::{Error, Result};

pub use cbow::{train_cbow, CbowConfig, CbowTrained};
pub use cooc::{count_cooccurrences, CooccurrenceMatrix};
pub use ppmi::ppmi;
pub use sparse::SparseMatrix;
pub use svd::{truncated_svd, SvdSolver, TruncatedSvd};

/// Context window and smoothing exponent shared by both trainers.
pub const DEFAULT_WINDOW: usize = 2;
pub const DEFAULT_ALPHA: f64 = 0.75;
pub const DEFAULT_DIM: usize = 300;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingMeta {
    pub method: String,
    pub period: Option<String>,
    pub params: BTreeMap<String, String>,
    pub singular_values: Vec<f64>,
    pub warnings: Vec<String>,
}

impl EmbeddingMeta {
    fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::default();
        kv.set("method", &self.method);
        if let Some(p) = &self.period {
            kv.set("period", p);
        }
        for (k, v) in &self.params {
            kv.set(&format!("param.{k}"), v);
        }
        if !self.singular_values.is_empty() {
            let s: Vec<String> = self.singular_values.iter().map(f64::to_string).collect();
            kv.set("singular_values", &s.join(","));
        }
        for (i, w) in self.warnings.iter().enumerate() {
            kv.set(&format!("warning.{i}"), w);
        }
        kv
    }

    fn from_key_values(kv: &KeyValues) -> Self {
        let mut meta = EmbeddingMeta {
            method: kv.get("method").unwrap_or_default().to_string(),
            period: kv.get("period").map(String::from),
            ..Default::default()
        };
        for (k, v) in kv.iter() {
            if let Some(p) = k.strip_prefix("param.") {
                meta.params.insert(p.to_string(), v.to_string());
            } else if k.starts_with("warning.") {
                meta.warnings.push(v.to_string());
            }
        }
        if let Some(s) = kv.get("singular_values") {
            meta.singular_values = s.split(',').filter_map(|x| x.parse().ok()).collect();
        }
        meta
    }
}

/// Vocabulary plus one row vector per word.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    vocabulary: Vec<String>,
    index: HashMap<String, usize>,
    matrix: DMatrix<f64>,
    pub meta: EmbeddingMeta,
}

impl EmbeddingSpace {
    pub fn new(vocabulary: Vec<String>, matrix: DMatrix<f64>, meta: EmbeddingMeta) -> Result<Self> {
        if vocabulary.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: vocabulary.len(),
                got: matrix.nrows(),
            });
        }
        let mut index = HashMap::with_capacity(vocabulary.len());
        for (i, w) in vocabulary.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate token '{w}'")));
            }
        }
        Ok(EmbeddingSpace {
            vocabulary,
            index,
            matrix,
            meta,
        })
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<DVector<f64>> {
        self.index_of(word).map(|i| self.matrix.row(i).transpose())
    }

    /// Returns a copy with every row transformed by `f`.
    pub fn map_rows(&self, mut f: impl FnMut(RowDVector<f64>) -> RowDVector<f64>) -> Self {
        let mut m = self.matrix.clone();
        for i in 0..m.nrows() {
            let r = f(m.row(i).into_owned());
            m.row_mut(i).copy_from(&r);
        }
        EmbeddingSpace {
            matrix: m,
            ..self.clone()
        }
    }

    /// Drops rows whose vector is all zeros; returns how many were removed.
    pub fn drop_zero_rows(self) -> (Self, usize) {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.matrix.row(i).iter().any(|&x| x != 0.0))
            .collect();
        let removed = self.len() - keep.len();
        if removed == 0 {
            return (self, 0);
        }
        let vocab = keep.iter().map(|&i| self.vocabulary[i].clone()).collect();
        let m = DMatrix::from_fn(keep.len(), self.dim(), |r, c| self.matrix[(keep[r], c)]);
        (EmbeddingSpace::new(vocab, m, self.meta).expect("subset of a valid space"), removed)
    }

    /// Writes `|V| d` followed by one `token v1 .. vd` line per word, plus
    /// the metadata as `key=value` lines in `<path>.meta`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(w, "{} {}", self.len(), self.dim()).map_err(io)?;
        for (i, word) in self.vocabulary.iter().enumerate() {
            write!(w, "{word}").map_err(io)?;
            for x in self.matrix.row(i).iter() {
                write!(w, " {x}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        w.flush().map_err(io)?;
        self.meta.to_key_values().save(&meta_path(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::io(path, e))?
            .ok_or_else(|| Error::format(path, 1, "missing header"))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::format(path, 1, format!("header must be '|V| d', got '{header}'")))?;
        let [n, d] = nums[..] else {
            return Err(Error::format(path, 1, format!("header must be '|V| d', got '{header}'")));
        };

        let mut vocab = Vec::with_capacity(n);
        let mut seen = HashSet::with_capacity(n);
        let mut data = Vec::with_capacity(n * d);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            if vocab.len() == n {
                return Err(Error::format(path, lineno, format!("more than the {n} rows declared in the header")));
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().unwrap().to_string();
            let row: Vec<f64> = fields
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::format(path, lineno, "non-numeric vector entry"))?;
            if row.len() != d {
                return Err(Error::format(
                    path,
                    lineno,
                    format!("expected {d} values for '{word}', found {}", row.len()),
                ));
            }
            if !seen.insert(word.clone()) {
                return Err(Error::format(path, lineno, format!("duplicate token '{word}'")));
            }
            vocab.push(word);
            data.extend(row);
        }
        if vocab.len() != n {
            return Err(Error::format(
                path,
                vocab.len() + 2,
                format!("header declares {n} rows but row {} is missing", vocab.len() + 1),
            ));
        }
        let meta_file = meta_path(path);
        let meta = if meta_file.exists() {
            EmbeddingMeta::from_key_values(&KeyValues::load(&meta_file)?)
        } else {
            EmbeddingMeta::default()
        };
        EmbeddingSpace::new(vocab, DMatrix::from_row_slice(n, d, &data), meta)
    }
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdConfig {
    pub dim: usize,
    pub window: usize,
    pub alpha: f64,
    pub min_count: u64,
    pub sigma_exponent: f64,
    pub solver: SvdSolver,
}

impl Default for SvdConfig {
    fn default() -> Self {
        SvdConfig {
            dim: DEFAULT_DIM,
            window: DEFAULT_WINDOW,
            alpha: DEFAULT_ALPHA,
            min_count: 10,
            sigma_exponent: 0.5,
            solver: SvdSolver::Auto,
        }
    }
}

impl SvdConfig {
    pub fn params(&self) -> BTreeMap<String, String> {
        [
            ("dim", self.dim.to_string()),
            ("window", self.window.to_string()),
            ("alpha", self.alpha.to_string()),
            ("min_count", self.min_count.to_string()),
            ("sigma_exponent", self.sigma_exponent.to_string()),
            ("solver", format!("{:?}", self.solver)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// Co-occurrence counting, PPMI and truncated SVD for one period. Words
/// whose PPMI row is entirely zero have no direction and are dropped.
pub fn train_svd(pc: &PeriodCorpus, cfg: &SvdConfig) -> Result<EmbeddingSpace> {
    let cooc = count_cooccurrences(pc, cfg.window, cfg.min_count)?;
    let m = ppmi(&cooc, cfg.alpha)?;
    let svd = truncated_svd(&m, cfg.dim, cfg.solver)?;
    let mut meta = EmbeddingMeta {
        method: "svd".into(),
        period: Some(pc.period.label.clone()),
        params: cfg.params(),
        singular_values: svd.singular_values.clone(),
        warnings: vec![],
    };
    if svd.rank_deficient {
        meta.warnings.push(format!(
            "requested {} dimensions, matrix rank is {}",
            cfg.dim,
            svd.rank()
        ));
    }
    // keep every period at the requested width so spaces stay alignable
    let vectors = svd.word_vectors(cfg.sigma_exponent);
    let rows = vectors.nrows();
    let vectors = vectors.resize(rows, cfg.dim, 0.0);
    let space = EmbeddingSpace::new(cooc.vocabulary, vectors, meta)?;
    let (mut space, dropped) = space.drop_zero_rows();
    if dropped > 0 {
        space.meta.warnings.push(format!("{dropped} words with all-zero vectors dropped"));
    }
    Ok(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, TimePeriod};

    fn small_space() -> EmbeddingSpace {
        EmbeddingSpace::new(
            vec!["a".into(), "belge".into(), "ırmak".into()],
            DMatrix::from_row_slice(3, 2, &[0.1, -2.5, 1.0 / 3.0, 4e-7, 1e10, -0.0]),
            EmbeddingMeta {
                method: "svd".into(),
                period: Some("1930-1939".into()),
                params: [("dim".to_string(), "2".to_string())].into(),
                singular_values: vec![3.5, 1.25],
                warnings: vec!["note".into()],
            },
        )
        .unwrap()
    }

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.vec");
        let s = small_space();
        s.save(&path).unwrap();
        let back = EmbeddingSpace::load(&path).unwrap();
        assert_eq!(back.vocabulary(), s.vocabulary());
        assert!((back.matrix() - s.matrix()).abs().max() < 1e-6);
        assert_eq!(back.meta, s.meta);
    }

    #[test]
    fn missing_row_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.vec");
        std::fs::write(&path, "5 2\na 1 2\nb 1 2\nc 1 2\nd 1 2\n").unwrap();
        let err = EmbeddingSpace::load(&path).unwrap_err().to_string();
        assert!(err.contains("row 5 is missing"), "{err}");
    }

    #[test]
    fn row_arity_mismatch_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.vec");
        std::fs::write(&path, "2 2\na 1 2\nb 1 2 3\n").unwrap();
        match EmbeddingSpace::load(&path).unwrap_err() {
            Error::Format { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.vec");
        std::fs::write(&path, "two 2\n").unwrap();
        assert!(matches!(EmbeddingSpace::load(&path), Err(Error::Format { line: 1, .. })));
    }

    #[test]
    fn duplicate_vocabulary_rejected() {
        let r = EmbeddingSpace::new(
            vec!["a".into(), "a".into()],
            DMatrix::zeros(2, 1),
            EmbeddingMeta::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn svd_pipeline_has_no_zero_rows() {
        let docs = ["a b c d a b", "c d e f c d", "a b e f a b", "x y"]
            .iter()
            .map(|t| Document::from_text(1930, t))
            .collect();
        let pc = PeriodCorpus::new(TimePeriod::new(1930, 1939).unwrap(), docs);
        let cfg = SvdConfig {
            dim: 3,
            min_count: 1,
            ..Default::default()
        };
        let space = train_svd(&pc, &cfg).unwrap();
        assert_eq!(space.dim(), 3);
        let wide = train_svd(&pc, &SvdConfig { dim: 40, ..cfg.clone() }).unwrap();
        assert_eq!(wide.dim(), 40);
        assert!(wide.meta.warnings.iter().any(|w| w.contains("rank")));
        for i in 0..space.len() {
            assert!(space.matrix().row(i).iter().any(|&x| x != 0.0));
        }
        assert_eq!(space.meta.method, "svd");
        assert_eq!(space.meta.params["window"], "2");
    }
}
