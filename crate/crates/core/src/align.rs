//! Mapping a base-period embedding space onto a target-period space.
//!
//! Rows are words throughout. The orthogonal map `Q` minimizes
//! `||E_base Q - E_target||_F` over the shared vocabulary and is
//! `U Vᵀ` for the SVD `E_baseᵀ E_target = U S Vᵀ`. The linear baseline
//! fits `M` with `M x_base ≈ x_target` by ridge regression on the most
//! frequent words of both periods.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingSpace;
use crate::error::{Error, Result};

pub const DEFAULT_SEED_TOP_N: usize = 1000;
pub const DEFAULT_RIDGE_ALPHA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocess {
    None,
    #[default]
    L2Normalize,
    CenterThenL2,
}

impl Preprocess {
    pub fn apply(self, space: &EmbeddingSpace) -> EmbeddingSpace {
        let normalize = |r: RowDVector<f64>| {
            let n = r.norm();
            if n > 0.0 {
                r / n
            } else {
                r
            }
        };
        match self {
            Preprocess::None => space.clone(),
            Preprocess::L2Normalize => space.map_rows(normalize),
            Preprocess::CenterThenL2 => {
                let mean = space.matrix().row_mean();
                space.map_rows(|r| normalize(r - &mean))
            }
        }
    }
}

impl fmt::Display for Preprocess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preprocess::None => "none",
            Preprocess::L2Normalize => "l2_normalize",
            Preprocess::CenterThenL2 => "center_then_l2",
        })
    }
}

impl FromStr for Preprocess {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Preprocess::None),
            "l2_normalize" | "l2" => Ok(Preprocess::L2Normalize),
            "center_then_l2" | "center" => Ok(Preprocess::CenterThenL2),
            _ => Err(Error::Usage(format!("unknown preprocessing '{s}'"))),
        }
    }
}

/// Row-aligned vectors of the words both spaces share.
#[derive(Debug, Clone)]
pub struct IntersectionEmbeddings {
    pub shared_vocabulary: Vec<String>,
    pub base: DMatrix<f64>,
    pub target: DMatrix<f64>,
    pub preprocess: Preprocess,
    pub base_period: Option<String>,
    pub target_period: Option<String>,
}

fn check_dims(base: &EmbeddingSpace, target: &EmbeddingSpace) -> Result<()> {
    if base.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            got: target.dim(),
        });
    }
    Ok(())
}

fn stack_rows(space: &EmbeddingSpace, words: &[String]) -> DMatrix<f64> {
    let m = space.matrix();
    let idx: Vec<usize> = words.iter().map(|w| space.index_of(w).expect("word in space")).collect();
    DMatrix::from_fn(words.len(), space.dim(), |r, c| m[(idx[r], c)])
}

/// Preprocesses both full spaces, then stacks the shared words in sorted
/// order.
pub fn intersect(base: &EmbeddingSpace, target: &EmbeddingSpace, preprocess: Preprocess) -> Result<IntersectionEmbeddings> {
    check_dims(base, target)?;
    let shared: Vec<String> = base
        .vocabulary()
        .iter()
        .filter(|w| target.contains(w))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if shared.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let b = preprocess.apply(base);
    let t = preprocess.apply(target);
    Ok(IntersectionEmbeddings {
        base: stack_rows(&b, &shared),
        target: stack_rows(&t, &shared),
        shared_vocabulary: shared,
        preprocess,
        base_period: base.meta.period.clone(),
        target_period: target.meta.period.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignmentKind {
    Orthogonal,
    Linear,
}

impl fmt::Display for AlignmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlignmentKind::Orthogonal => "orthogonal",
            AlignmentKind::Linear => "linear",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingStats {
    /// Shared vocabulary size (orthogonal) or seed count (linear).
    pub pairs: usize,
    /// Squared Frobenius norm of the fit's data term.
    pub residual: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentMap {
    pub kind: AlignmentKind,
    /// `Q` (applied as `vᵀ Q`) or `M` (applied as `M v`).
    pub matrix: DMatrix<f64>,
    pub stats: TrainingStats,
    pub preprocess: Preprocess,
    pub base_period: Option<String>,
    pub target_period: Option<String>,
}

pub fn orthogonal_procrustes(ie: &IntersectionEmbeddings) -> Result<AlignmentMap> {
    let d = ie.base.ncols();
    let n = ie.base.nrows();
    let k = ie.base.transpose() * &ie.target;
    if k.iter().all(|&x| x == 0.0) {
        return Err(Error::Numeric("cross-covariance matrix is all zero".into()));
    }
    let svd = k.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numeric("SVD did not converge".into())),
    };
    let q = u * v_t;
    let residual = (&ie.base * &q - &ie.target).norm_squared();
    let mut warnings = Vec::new();
    if n < d {
        warnings.push(format!("only {n} shared words for dimension {d}; map is underdetermined"));
    }
    Ok(AlignmentMap {
        kind: AlignmentKind::Orthogonal,
        matrix: q,
        stats: TrainingStats {
            pairs: n,
            residual,
            warnings,
        },
        preprocess: ie.preprocess,
        base_period: ie.base_period.clone(),
        target_period: ie.target_period.clone(),
    })
}

/// Seed words with their base and target vectors, sorted by token.
#[derive(Debug, Clone)]
pub struct SeedPairSet {
    pub tokens: Vec<String>,
    pub base: DMatrix<f64>,
    pub target: DMatrix<f64>,
    pub warnings: Vec<String>,
    pub preprocess: Preprocess,
    pub base_period: Option<String>,
    pub target_period: Option<String>,
}

fn top_n_words(freq: &HashMap<String, u64>, n: usize) -> BTreeSet<&str> {
    let mut words: Vec<(&str, u64)> = freq.iter().map(|(w, &c)| (w.as_str(), c)).collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    words.into_iter().take(n).map(|(w, _)| w).collect()
}

/// Words in the top `top_n` by corpus frequency of both periods that also
/// have vectors in both spaces.
pub fn select_seed_pairs(
    base: &EmbeddingSpace,
    target: &EmbeddingSpace,
    base_freq: &HashMap<String, u64>,
    target_freq: &HashMap<String, u64>,
    top_n: usize,
    preprocess: Preprocess,
) -> Result<SeedPairSet> {
    check_dims(base, target)?;
    let top_b = top_n_words(base_freq, top_n);
    let top_t = top_n_words(target_freq, top_n);
    let tokens: Vec<String> = top_b
        .intersection(&top_t)
        .filter(|w| base.contains(w) && target.contains(w))
        .map(|w| w.to_string())
        .collect();
    let mut warnings = Vec::new();
    if tokens.len() < base.dim() {
        warnings.push(format!(
            "only {} seed pairs for dimension {}",
            tokens.len(),
            base.dim()
        ));
    }
    let b = preprocess.apply(base);
    let t = preprocess.apply(target);
    Ok(SeedPairSet {
        base: stack_rows(&b, &tokens),
        target: stack_rows(&t, &tokens),
        tokens,
        warnings,
        preprocess,
        base_period: base.meta.period.clone(),
        target_period: target.meta.period.clone(),
    })
}

/// Closed-form ridge regression `B = (XᵀX + αI)⁻¹ XᵀY`, returned as
/// `M = Bᵀ` so that `M x_base ≈ x_target`.
pub fn ridge_linear_map(seeds: &SeedPairSet, ridge_alpha: f64) -> Result<AlignmentMap> {
    if seeds.tokens.is_empty() {
        return Err(Error::InvalidInput("no seed pairs; cannot fit a linear map".into()));
    }
    if ridge_alpha < 0.0 {
        return Err(Error::InvalidInput("ridge alpha must be >= 0".into()));
    }
    let x = &seeds.base;
    let y = &seeds.target;
    let d = x.ncols();
    let gram = x.transpose() * x + DMatrix::identity(d, d) * ridge_alpha;
    let chol = gram.cholesky().ok_or_else(|| {
        Error::Numeric("normal equations are singular; use a ridge alpha > 0".into())
    })?;
    let b = chol.solve(&(x.transpose() * y));
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("normal equations are singular; use a ridge alpha > 0".into()));
    }
    let residual = (x * &b - y).norm_squared();
    Ok(AlignmentMap {
        kind: AlignmentKind::Linear,
        matrix: b.transpose(),
        stats: TrainingStats {
            pairs: seeds.tokens.len(),
            residual,
            warnings: seeds.warnings.clone(),
        },
        preprocess: seeds.preprocess,
        base_period: seeds.base_period.clone(),
        target_period: seeds.target_period.clone(),
    })
}

pub fn align_vector(map: &AlignmentMap, v: &DVector<f64>) -> Result<DVector<f64>> {
    let d = map.matrix.ncols();
    if v.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: v.len(),
        });
    }
    Ok(match map.kind {
        AlignmentKind::Orthogonal => map.matrix.tr_mul(v),
        AlignmentKind::Linear => &map.matrix * v,
    })
}

impl AlignmentMap {
    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    /// Max absolute entry of `QᵀQ - I`.
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.dim();
        (self.matrix.transpose() * &self.matrix - DMatrix::identity(d, d)).abs().max()
    }

    /// Header line of `key=value` fields, then `d` rows of `d` numbers.
    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(
            w,
            "kind={} d={} base={} target={} residual={} pairs={} preprocess={}",
            self.kind,
            self.dim(),
            self.base_period.as_deref().unwrap_or("-"),
            self.target_period.as_deref().unwrap_or("-"),
            self.stats.residual,
            self.stats.pairs,
            self.preprocess
        )
        .map_err(io)?;
        for r in 0..self.matrix.nrows() {
            let row: Vec<String> = self.matrix.row(r).iter().map(f64::to_string).collect();
            writeln!(w, "{}", row.join(" ")).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::io(path, e))?
            .ok_or_else(|| Error::format(path, 1, "missing header"))?;
        let fields: HashMap<&str, &str> = header.split_whitespace().filter_map(|f| f.split_once('=')).collect();
        let field = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| Error::format(path, 1, format!("header lacks '{k}'")))
        };
        let kind = match field("kind")? {
            "orthogonal" => AlignmentKind::Orthogonal,
            "linear" => AlignmentKind::Linear,
            k => return Err(Error::format(path, 1, format!("unknown map kind '{k}'"))),
        };
        let bad = |k: &str| Error::format(path, 1, format!("bad value for '{k}'"));
        let d: usize = field("d")?.parse().map_err(|_| bad("d"))?;
        let residual: f64 = field("residual")?.parse().map_err(|_| bad("residual"))?;
        let pairs: usize = field("pairs")?.parse().map_err(|_| bad("pairs"))?;
        let preprocess: Preprocess = field("preprocess")?.parse().map_err(|_| bad("preprocess"))?;
        let period = |k: &str| field(k).ok().filter(|p| *p != "-").map(String::from);

        let mut data = Vec::with_capacity(d * d);
        let mut rows = 0;
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::format(path, i + 2, "non-numeric entry"))?;
            if row.len() != d {
                return Err(Error::format(path, i + 2, format!("expected {d} values, found {}", row.len())));
            }
            data.extend(row);
            rows += 1;
        }
        if rows != d {
            return Err(Error::format(path, rows + 2, format!("expected {d} rows, found {rows}")));
        }
        Ok(AlignmentMap {
            kind,
            matrix: DMatrix::from_row_slice(d, d, &data),
            stats: TrainingStats {
                pairs,
                residual,
                warnings: vec![],
            },
            preprocess,
            base_period: period("base"),
            target_period: period("target"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::EmbeddingMeta;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        random(d, d, rng).qr().q()
    }

    fn ie(base: DMatrix<f64>, target: DMatrix<f64>) -> IntersectionEmbeddings {
        IntersectionEmbeddings {
            shared_vocabulary: (0..base.nrows()).map(|i| format!("w{i}")).collect(),
            base,
            target,
            preprocess: Preprocess::None,
            base_period: None,
            target_period: None,
        }
    }

    fn space(words: &[&str], m: DMatrix<f64>) -> EmbeddingSpace {
        EmbeddingSpace::new(words.iter().map(|w| w.to_string()).collect(), m, EmbeddingMeta::default()).unwrap()
    }

    #[test]
    fn intersect_shared_sorted() {
        let b = space(&["c", "a", "b"], DMatrix::from_row_slice(3, 2, &[1., 0., 0., 1., 1., 1.]));
        let t = space(&["d", "b", "c"], DMatrix::from_row_slice(3, 2, &[1., 0., 2., 0., 0., 3.]));
        let ie = intersect(&b, &t, Preprocess::None).unwrap();
        assert_eq!(ie.shared_vocabulary, vec!["b", "c"]);
        assert_eq!(ie.base.row(0).iter().copied().collect::<Vec<_>>(), vec![1., 1.]);
        assert_eq!(ie.target.row(1).iter().copied().collect::<Vec<_>>(), vec![0., 3.]);
        let n = intersect(&b, &t, Preprocess::L2Normalize).unwrap();
        assert!((n.target.row(1).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn intersect_identical_and_disjoint() {
        let b = space(&["a", "b"], DMatrix::from_row_slice(2, 2, &[1., 2., 3., 4.]));
        let ie = intersect(&b, &b, Preprocess::CenterThenL2).unwrap();
        assert_eq!(ie.base, ie.target);
        let t = space(&["x"], DMatrix::from_row_slice(1, 2, &[1., 2.]));
        assert!(matches!(intersect(&b, &t, Preprocess::None), Err(Error::EmptyIntersection)));
        let t3 = space(&["a"], DMatrix::from_row_slice(1, 3, &[1., 2., 3.]));
        assert!(matches!(intersect(&b, &t3, Preprocess::None), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn procrustes_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = random(30, 5, &mut rng);
        let map = orthogonal_procrustes(&ie(e.clone(), e)).unwrap();
        assert!((map.matrix.clone() - DMatrix::identity(5, 5)).abs().max() < 1e-8);
    }

    #[test]
    fn procrustes_planted_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = random_orthogonal(20, &mut rng);
        let e = random(200, 20, &mut rng);
        let map = orthogonal_procrustes(&ie(e.clone(), &e * &r)).unwrap();
        assert!((&map.matrix - &r).norm() < 1e-6);
        assert!(map.orthogonality_error() < 1e-8);
    }

    #[test]
    fn procrustes_quarter_turn() {
        let rot = DMatrix::from_row_slice(2, 2, &[0., 1., -1., 0.]);
        let map = orthogonal_procrustes(&ie(DMatrix::identity(2, 2), rot.clone())).unwrap();
        assert!((&map.matrix - &rot).abs().max() < 1e-12);
        assert!(map.stats.residual < 1e-12);
    }

    #[test]
    fn procrustes_zero_is_error() {
        let z = DMatrix::zeros(4, 2);
        assert!(orthogonal_procrustes(&ie(z.clone(), z)).is_err());
    }

    fn seeds(x: DMatrix<f64>, y: DMatrix<f64>) -> SeedPairSet {
        SeedPairSet {
            tokens: (0..x.nrows()).map(|i| format!("s{i}")).collect(),
            base: x,
            target: y,
            warnings: vec![],
            preprocess: Preprocess::None,
            base_period: None,
            target_period: None,
        }
    }

    #[test]
    fn ridge_planted_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m_star = random(5, 5, &mut rng);
        let x = random(40, 5, &mut rng);
        let y = &x * m_star.transpose();
        let map = ridge_linear_map(&seeds(x, y), 0.0).unwrap();
        assert!((&map.matrix - &m_star).abs().max() < 1e-8);
    }

    #[test]
    fn ridge_identity_design() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = random(4, 4, &mut rng);
        let map = ridge_linear_map(&seeds(DMatrix::identity(4, 4), y.clone()), 0.2).unwrap();
        assert!((&map.matrix - y.transpose() / 1.2).abs().max() < 1e-12);
    }

    #[test]
    fn ridge_shrinks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random(30, 4, &mut rng);
        let y = random(30, 4, &mut rng);
        let map = ridge_linear_map(&seeds(x, y), 1e9).unwrap();
        assert!(map.matrix.norm() < 1e-6);
    }

    #[test]
    fn ridge_singular_without_alpha() {
        let x = DMatrix::from_row_slice(3, 2, &[1., 1., 2., 2., 3., 3.]);
        let err = ridge_linear_map(&seeds(x.clone(), x), 0.0).unwrap_err();
        assert!(err.to_string().contains("alpha > 0"), "{err}");
    }

    #[test]
    fn ridge_residual_monotone_in_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random(25, 4, &mut rng);
        let y = random(25, 4, &mut rng);
        let s = seeds(x, y);
        let res: Vec<f64> = [0.0, 0.01, 0.2, 1.0, 10.0, 1e3]
            .iter()
            .map(|&a| ridge_linear_map(&s, a).unwrap().stats.residual)
            .collect();
        assert!(res.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{res:?}");
    }

    #[test]
    fn seed_pairs_from_top_lists() {
        let vocab = ["a", "b", "c", "d", "e"];
        let m = DMatrix::from_fn(5, 2, |r, c| (r * 2 + c) as f64 + 1.0);
        let b = space(&vocab, m.clone());
        let t = space(&vocab, m);
        let bf: HashMap<String, u64> = [("a", 9), ("b", 8), ("c", 7), ("d", 1), ("e", 1)]
            .iter()
            .map(|(w, c)| (w.to_string(), *c))
            .collect();
        let tf: HashMap<String, u64> = [("a", 1), ("b", 8), ("c", 7), ("d", 9), ("e", 1)]
            .iter()
            .map(|(w, c)| (w.to_string(), *c))
            .collect();
        let s = select_seed_pairs(&b, &t, &bf, &tf, 3, Preprocess::None).unwrap();
        assert_eq!(s.tokens, vec!["b", "c"]);
        let all = select_seed_pairs(&b, &t, &bf, &tf, 5, Preprocess::None).unwrap();
        assert_eq!(all.tokens, intersect(&b, &t, Preprocess::None).unwrap().shared_vocabulary);
        let none = select_seed_pairs(&b, &t, &bf, &tf, 1, Preprocess::None).unwrap();
        assert!(none.tokens.is_empty());
        assert!(ridge_linear_map(&none, 0.2).is_err());
    }

    #[test]
    fn align_vector_conventions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = random_orthogonal(4, &mut rng);
        let map = AlignmentMap {
            kind: AlignmentKind::Orthogonal,
            matrix: q.clone(),
            stats: TrainingStats {
                pairs: 0,
                residual: 0.0,
                warnings: vec![],
            },
            preprocess: Preprocess::None,
            base_period: None,
            target_period: None,
        };
        let v = DVector::from_fn(4, |i, _| i as f64 - 1.5);
        let out = align_vector(&map, &v).unwrap();
        assert!((out.transpose() - v.transpose() * &q).abs().max() < 1e-15);
        assert!((out.norm() - v.norm()).abs() < 1e-10);
        assert!(align_vector(&map, &DVector::zeros(3)).is_err());

        let lin = AlignmentMap {
            kind: AlignmentKind::Linear,
            ..map.clone()
        };
        assert!((align_vector(&lin, &v).unwrap() - &q * &v).abs().max() < 1e-15);

        let ident = AlignmentMap {
            matrix: DMatrix::identity(4, 4),
            ..map
        };
        assert_eq!(align_vector(&ident, &v).unwrap(), v);
    }

    #[test]
    fn map_file_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let map = AlignmentMap {
            kind: AlignmentKind::Linear,
            matrix: random(3, 3, &mut rng),
            stats: TrainingStats {
                pairs: 12,
                residual: 0.125,
                warnings: vec![],
            },
            preprocess: Preprocess::CenterThenL2,
            base_period: Some("1930-1939".into()),
            target_period: Some("1980-1989".into()),
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.map");
        map.save(&p).unwrap();
        assert_eq!(AlignmentMap::load(&p).unwrap(), map);

        std::fs::write(&p, "kind=orthogonal d=2 residual=0 pairs=1 preprocess=none\n1 0\n0\n").unwrap();
        assert!(matches!(AlignmentMap::load(&p), Err(Error::Format { line: 3, .. })));
    }
}
