//! Trains CBOW with negative sampling on one decade and prints the loss per
//! epoch. Pass a worker count to train Hogwild-style.
//!
//! cargo run --release --example train_cbow_embeddings -- [workers]

use std::collections::HashSet;

use diachron::corpus::{bucket_by_decade, Document, TimePeriod};
use diachron::embed::{train_cbow, CbowConfig};
use diachron::evaluate::{generate_synthetic_replacement_corpus, SynthSpec};
use diachron::retrieve::knn;

fn main() -> diachron::Result<()> {
    let workers = std::env::args().nth(1).map_or(1, |a| a.parse().expect("workers"));
    let synth = generate_synthetic_replacement_corpus(&SynthSpec::default())?;
    let docs = synth.documents.iter().map(|(y, t)| Document::from_text(*y, t)).collect();
    let periods = bucket_by_decade(docs, 1920);
    let pc = &periods[&"1930".parse::<TimePeriod>()?];

    // a 9k-token decade is far too small for frequent-word subsampling
    let cfg = CbowConfig {
        dim: 50,
        epochs: 20,
        downsample: 0.0,
        workers,
        ..Default::default()
    };
    let trained = train_cbow(pc, &cfg)?;
    for (e, l) in trained.epoch_losses.iter().enumerate() {
        println!("epoch {:>2}: loss {l:.5}", e + 1);
    }

    let space = &trained.space;
    let (old, _) = &synth.gold.pairs[0];
    let exclude: HashSet<String> = [old.clone()].into();
    println!("neighbours of {old}:");
    for c in knn(space, &space.vector(old).unwrap(), 5, &exclude)? {
        println!("{:>2} {:<12} {:.4}", c.final_rank, c.token, c.cosine);
    }
    Ok(())
}
