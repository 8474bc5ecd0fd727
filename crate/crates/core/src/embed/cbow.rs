//! CBOW with negative sampling.
//!
//! The averaged input vectors of the symmetric window predict the centre
//! word against `negatives` noise words drawn from the unigram^alpha
//! distribution. Frequent tokens are discarded with probability
//! `1 - sqrt(t / f(w))` before windowing.
//!
//! Parameters live in relaxed atomics so that several workers can update
//! them without locks; with one worker training is fully deterministic.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::corpus::PeriodCorpus;
use crate::embed::cooc::pruned_vocabulary;
use crate::embed::{EmbeddingMeta, EmbeddingSpace, DEFAULT_ALPHA, DEFAULT_DIM, DEFAULT_WINDOW};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CbowConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    /// Subsampling threshold `t`; 0 disables subsampling.
    pub downsample: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub min_count: u64,
    /// Exponent of the noise distribution.
    pub alpha: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for CbowConfig {
    fn default() -> Self {
        CbowConfig {
            dim: DEFAULT_DIM,
            window: DEFAULT_WINDOW,
            negatives: 5,
            downsample: 1e-5,
            epochs: 5,
            learning_rate: 0.025,
            min_learning_rate: 1e-4,
            min_count: 10,
            alpha: DEFAULT_ALPHA,
            seed: 1,
            workers: 1,
        }
    }
}

impl CbowConfig {
    pub fn params(&self) -> BTreeMap<String, String> {
        [
            ("dim", self.dim.to_string()),
            ("window", self.window.to_string()),
            ("negatives", self.negatives.to_string()),
            ("downsample", self.downsample.to_string()),
            ("epochs", self.epochs.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("min_learning_rate", self.min_learning_rate.to_string()),
            ("min_count", self.min_count.to_string()),
            ("alpha", self.alpha.to_string()),
            ("seed", self.seed.to_string()),
            ("workers", self.workers.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Loss of one example given the averaged context vector `h` and the
/// output rows (`k x dim`, flattened; row 0 is the target, the rest are
/// negatives). Writes `dL/ds_k` into `coefs` and `dL/dh` into `grad_h`.
fn forward_backward(h: &[f64], out_rows: &[f64], coefs: &mut [f64], grad_h: &mut [f64]) -> f64 {
    let dim = h.len();
    grad_h.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    for (k, row) in out_rows.chunks_exact(dim).enumerate() {
        let s: f64 = row.iter().zip(h).map(|(a, b)| a * b).sum();
        let label = if k == 0 { 1.0 } else { 0.0 };
        loss += if k == 0 { softplus(-s) } else { softplus(s) };
        let g = sigmoid(s) - label;
        coefs[k] = g;
        for (gh, r) in grad_h.iter_mut().zip(row) {
            *gh += g * r;
        }
    }
    loss
}

/// One training example: context word ids, centre word, noise words.
#[derive(Debug, Clone, PartialEq)]
pub struct CbowExample {
    pub context: Vec<usize>,
    pub target: usize,
    pub negatives: Vec<usize>,
}

/// Plain dense parameters, rows indexed by word id. Used for inspection and
/// gradient checking; training itself runs on shared atomic storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CbowParams {
    pub input: DMatrix<f64>,
    pub output: DMatrix<f64>,
}

impl CbowParams {
    fn context_mean(&self, ex: &CbowExample) -> Vec<f64> {
        let dim = self.input.ncols();
        let mut h = vec![0.0; dim];
        for &c in &ex.context {
            for (j, x) in h.iter_mut().enumerate() {
                *x += self.input[(c, j)];
            }
        }
        h.iter_mut().for_each(|x| *x /= ex.context.len() as f64);
        h
    }

    fn stacked_outputs(&self, ex: &CbowExample) -> Vec<f64> {
        std::iter::once(ex.target)
            .chain(ex.negatives.iter().copied())
            .flat_map(|w| self.output.row(w).iter().copied().collect::<Vec<_>>())
            .collect()
    }

    pub fn loss(&self, ex: &CbowExample) -> f64 {
        let k = 1 + ex.negatives.len();
        let h = self.context_mean(ex);
        forward_backward(&h, &self.stacked_outputs(ex), &mut vec![0.0; k], &mut vec![0.0; h.len()])
    }

    /// Gradients of [`CbowParams::loss`] with respect to both matrices.
    pub fn gradient(&self, ex: &CbowExample) -> (DMatrix<f64>, DMatrix<f64>) {
        let k = 1 + ex.negatives.len();
        let dim = self.input.ncols();
        let h = self.context_mean(ex);
        let mut coefs = vec![0.0; k];
        let mut grad_h = vec![0.0; dim];
        forward_backward(&h, &self.stacked_outputs(ex), &mut coefs, &mut grad_h);

        let mut g_in = DMatrix::zeros(self.input.nrows(), dim);
        let mut g_out = DMatrix::zeros(self.output.nrows(), dim);
        let m = ex.context.len() as f64;
        for &c in &ex.context {
            for j in 0..dim {
                g_in[(c, j)] += grad_h[j] / m;
            }
        }
        for (i, w) in std::iter::once(ex.target).chain(ex.negatives.iter().copied()).enumerate() {
            for j in 0..dim {
                g_out[(w, j)] += coefs[i] * h[j];
            }
        }
        (g_in, g_out)
    }
}

#[derive(Default)]
struct AtomicF64(AtomicU64);

impl AtomicF64 {
    fn new(x: f64) -> Self {
        AtomicF64(AtomicU64::new(x.to_bits()))
    }

    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }

    fn add(&self, delta: f64) {
        self.0.store((self.get() + delta).to_bits(), Ordering::Relaxed);
    }
}

struct SharedWeights {
    dim: usize,
    input: Vec<AtomicF64>,
    output: Vec<AtomicF64>,
}

impl SharedWeights {
    fn read_row(store: &[AtomicF64], dim: usize, w: usize, into: &mut [f64]) {
        for (x, a) in into.iter_mut().zip(&store[w * dim..(w + 1) * dim]) {
            *x = a.get();
        }
    }

    fn to_params(&self, n: usize) -> CbowParams {
        let dim = self.dim;
        CbowParams {
            input: DMatrix::from_fn(n, dim, |r, c| self.input[r * dim + c].get()),
            output: DMatrix::from_fn(n, dim, |r, c| self.output[r * dim + c].get()),
        }
    }
}

/// Per-worker scratch space so the hot loop does not allocate.
struct Scratch {
    h: Vec<f64>,
    outs: Vec<f64>,
    ids: Vec<usize>,
    coefs: Vec<f64>,
    grad_h: Vec<f64>,
}

struct Trainer<'a> {
    cfg: &'a CbowConfig,
    weights: &'a SharedWeights,
    keep_prob: &'a [f64],
    noise: &'a WeightedAliasIndex<f64>,
    processed: &'a AtomicU64,
    total_work: u64,
}

impl Trainer<'_> {
    fn learning_rate(&self) -> f64 {
        let progress = self.processed.load(Ordering::Relaxed) as f64 / self.total_work.max(1) as f64;
        (self.cfg.learning_rate * (1.0 - progress)).max(self.cfg.min_learning_rate)
    }

    /// Returns (summed loss, example count).
    fn run_shard(&self, docs: &[Vec<usize>], rng: &mut ChaCha8Rng) -> (f64, u64) {
        let dim = self.weights.dim;
        let neg = self.cfg.negatives;
        let mut s = Scratch {
            h: vec![0.0; dim],
            outs: vec![0.0; (neg + 1) * dim],
            ids: Vec::with_capacity(neg + 1),
            coefs: vec![0.0; neg + 1],
            grad_h: vec![0.0; dim],
        };
        let mut loss = 0.0;
        let mut examples = 0u64;
        let mut kept: Vec<usize> = Vec::new();
        let mut context: Vec<usize> = Vec::new();
        for doc in docs {
            kept.clear();
            kept.extend(doc.iter().copied().filter(|&w| {
                let p = self.keep_prob[w];
                p >= 1.0 || rng.random::<f64>() < p
            }));
            for i in 0..kept.len() {
                context.clear();
                let lo = i.saturating_sub(self.cfg.window);
                let hi = (i + self.cfg.window).min(kept.len().saturating_sub(1));
                context.extend((lo..=hi).filter(|&j| j != i).map(|j| kept[j]));
                if context.is_empty() {
                    continue;
                }
                let lr = self.learning_rate();
                loss += self.step(&context, kept[i], lr, rng, &mut s);
                examples += 1;
            }
            self.processed.fetch_add(doc.len() as u64, Ordering::Relaxed);
        }
        (loss, examples)
    }

    fn step(&self, context: &[usize], target: usize, lr: f64, rng: &mut ChaCha8Rng, s: &mut Scratch) -> f64 {
        let w = self.weights;
        let dim = w.dim;
        s.h.iter_mut().for_each(|x| *x = 0.0);
        for &c in context {
            for (x, a) in s.h.iter_mut().zip(&w.input[c * dim..(c + 1) * dim]) {
                *x += a.get();
            }
        }
        let m = context.len() as f64;
        s.h.iter_mut().for_each(|x| *x /= m);

        s.ids.clear();
        s.ids.push(target);
        for _ in 0..self.cfg.negatives {
            let n = self.noise.sample(rng);
            if n != target {
                s.ids.push(n);
            }
        }
        let k = s.ids.len();
        for (slot, &id) in s.ids.iter().enumerate() {
            SharedWeights::read_row(&w.output, dim, id, &mut s.outs[slot * dim..(slot + 1) * dim]);
        }
        let loss = forward_backward(&s.h, &s.outs[..k * dim], &mut s.coefs[..k], &mut s.grad_h);

        for (slot, &id) in s.ids.iter().enumerate() {
            let g = s.coefs[slot];
            for (a, x) in w.output[id * dim..(id + 1) * dim].iter().zip(&s.h) {
                a.add(-lr * g * x);
            }
        }
        // every context word takes the full hidden-layer error, as in word2vec,
        // rather than the 1/m share of the exact gradient
        for &c in context {
            for (a, g) in w.input[c * dim..(c + 1) * dim].iter().zip(&s.grad_h) {
                a.add(-lr * g);
            }
        }
        loss
    }
}

#[derive(Debug, Clone)]
pub struct CbowTrained {
    pub space: EmbeddingSpace,
    pub params: CbowParams,
    /// Mean per-example loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn train_cbow(pc: &PeriodCorpus, cfg: &CbowConfig) -> Result<CbowTrained> {
    if cfg.dim == 0 || cfg.window == 0 || cfg.epochs == 0 {
        return Err(Error::InvalidInput("dim, window and epochs must be >= 1".into()));
    }
    let vocabulary = pruned_vocabulary(pc, cfg.min_count);
    if vocabulary.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no token of period {} reaches min_count {}",
            pc.period, cfg.min_count
        )));
    }
    let n = vocabulary.len();
    let index: HashMap<&str, usize> = vocabulary.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let docs: Vec<Vec<usize>> = pc
        .documents
        .iter()
        .map(|d| d.tokens.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    let counts: Vec<f64> = vocabulary.iter().map(|w| pc.count(w) as f64).collect();
    let train_tokens: f64 = counts.iter().sum();

    let keep_prob: Vec<f64> = counts
        .iter()
        .map(|&c| {
            if cfg.downsample <= 0.0 {
                1.0
            } else {
                (cfg.downsample / (c / train_tokens)).sqrt().min(1.0)
            }
        })
        .collect();
    let noise = WeightedAliasIndex::new(counts.iter().map(|c| c.powf(cfg.alpha)).collect())
        .map_err(|e| Error::Numeric(format!("noise distribution: {e}")))?;

    let dim = cfg.dim;
    let mut init_rng = rng_for(cfg.seed, u64::MAX);
    let weights = SharedWeights {
        dim,
        input: (0..n * dim)
            .map(|_| AtomicF64::new((init_rng.random::<f64>() - 0.5) / dim as f64))
            .collect(),
        output: (0..n * dim).map(|_| AtomicF64::default()).collect(),
    };
    let processed = AtomicU64::new(0);
    let trainer = Trainer {
        cfg,
        weights: &weights,
        keep_prob: &keep_prob,
        noise: &noise,
        processed: &processed,
        total_work: (train_tokens as u64) * cfg.epochs as u64,
    };

    let workers = cfg.workers.max(1).min(docs.len().max(1));
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (loss, examples) = if workers == 1 {
            trainer.run_shard(&docs, &mut rng_for(cfg.seed, epoch as u64 * 1024))
        } else {
            let chunk = docs.len().div_ceil(workers);
            std::thread::scope(|scope| {
                let handles: Vec<_> = docs
                    .chunks(chunk)
                    .enumerate()
                    .map(|(wi, shard)| {
                        let trainer = &trainer;
                        scope.spawn(move || {
                            trainer.run_shard(shard, &mut rng_for(cfg.seed, epoch as u64 * 1024 + wi as u64))
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .fold((0.0, 0), |acc, x| (acc.0 + x.0, acc.1 + x.1))
            })
        };
        let mean = if examples == 0 { 0.0 } else { loss / examples as f64 };
        log::debug!("cbow epoch {epoch}: mean loss {mean:.6} over {examples} examples");
        epoch_losses.push(mean);
    }

    let params = weights.to_params(n);
    let mut meta_params = cfg.params();
    meta_params.insert(
        "epoch_losses".into(),
        epoch_losses.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
    );
    let meta = EmbeddingMeta {
        method: "cbow".into(),
        period: Some(pc.period.label.clone()),
        params: meta_params,
        singular_values: vec![],
        warnings: vec![],
    };
    let space = EmbeddingSpace::new(vocabulary, params.input.clone(), meta)?;
    Ok(CbowTrained {
        space,
        params,
        epoch_losses,
    })
}
