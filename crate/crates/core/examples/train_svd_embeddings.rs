//! Counts co-occurrences, builds a PPMI matrix and factorizes it. Also
//! prints the nearest neighbours of one planted word within its period.
//!
//! cargo run --release --example train_svd_embeddings

use std::collections::HashSet;

use diachron::corpus::{bucket_by_decade, Document, TimePeriod};
use diachron::embed::{count_cooccurrences, ppmi, train_svd, SvdConfig};
use diachron::evaluate::{generate_synthetic_replacement_corpus, SynthSpec};
use diachron::retrieve::knn;

fn main() -> diachron::Result<()> {
    let synth = generate_synthetic_replacement_corpus(&SynthSpec::default())?;
    let docs = synth.documents.iter().map(|(y, t)| Document::from_text(*y, t)).collect();
    let periods = bucket_by_decade(docs, 1920);
    let pc = &periods[&"1930".parse::<TimePeriod>()?];

    let cooc = count_cooccurrences(pc, 2, 10)?;
    let m = ppmi(&cooc, 0.75)?;
    println!("{} words, {} co-occurring pairs, {} positive PPMI cells", cooc.vocabulary.len(), cooc.total_pairs, m.nnz());

    let cfg = SvdConfig { dim: 100, ..Default::default() };
    let space = train_svd(pc, &cfg)?;
    println!("{} x {}; top singular values {:?}", space.len(), space.dim(), &space.meta.singular_values[..5]);
    for w in &space.meta.warnings {
        println!("warning: {w}");
    }

    let (old, _) = &synth.gold.pairs[0];
    let exclude: HashSet<String> = [old.clone()].into();
    for c in knn(&space, &space.vector(old).unwrap(), 5, &exclude)? {
        println!("{:>2} {:<12} {:.4}", c.final_rank, c.token, c.cosine);
    }
    Ok(())
}
