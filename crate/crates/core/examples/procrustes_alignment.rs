//! Recovers a planted rotation with orthogonal Procrustes, then aligns two
//! trained decades and reports how many shared words map onto themselves.

use std::collections::HashSet;

use diachron::align::{align_vector, intersect, orthogonal_procrustes, Preprocess};
use diachron::corpus::{bucket_by_decade, Document, TimePeriod};
use diachron::embed::{train_svd, EmbeddingMeta, EmbeddingSpace, SvdConfig};
use diachron::evaluate::{generate_synthetic_replacement_corpus, SynthSpec};
use diachron::retrieve::CosineIndex;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> diachron::Result<()> {
    // planted: target = base * R
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, d) = (200, 20);
    let base = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
    let r = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng)).qr().q();
    let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let b = EmbeddingSpace::new(words.clone(), base.clone(), EmbeddingMeta::default())?;
    let t = EmbeddingSpace::new(words, &base * &r, EmbeddingMeta::default())?;
    let q = orthogonal_procrustes(&intersect(&b, &t, Preprocess::None)?)?;
    println!("planted rotation: |Q - R|_F = {:.2e}", (&q.matrix - &r).norm());

    // two trained decades
    let synth = generate_synthetic_replacement_corpus(&SynthSpec::default())?;
    let docs = synth.documents.iter().map(|(y, t)| Document::from_text(*y, t)).collect();
    let periods = bucket_by_decade(docs, 1920);
    let cfg = SvdConfig { dim: 100, ..Default::default() };
    let base = train_svd(&periods[&"1930".parse::<TimePeriod>()?], &cfg)?;
    let target = train_svd(&periods[&"1980".parse::<TimePeriod>()?], &cfg)?;
    let ie = intersect(&base, &target, Preprocess::L2Normalize)?;
    let map = orthogonal_procrustes(&ie)?;
    println!(
        "{} shared words, residual {:.4}, orthogonality error {:.1e}",
        map.stats.pairs,
        map.stats.residual,
        map.orthogonality_error()
    );

    let target_n = Preprocess::L2Normalize.apply(&target);
    let base_n = Preprocess::L2Normalize.apply(&base);
    let index = CosineIndex::new(&target_n);
    let mut hits = 0;
    for w in &ie.shared_vocabulary {
        let v = align_vector(&map, &base_n.vector(w).unwrap())?;
        if index.knn(&v, 1, &HashSet::new())?[0].token == *w {
            hits += 1;
        }
    }
    println!("{hits}/{} shared words have themselves as nearest aligned neighbour", ie.shared_vocabulary.len());
    Ok(())
}
