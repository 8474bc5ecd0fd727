//! Evaluates a fixed base decade against several target decades, with the
//! targets downsampled to equal token counts.
//!
//! cargo run --release --example temporal_sweep

use diachron::corpus::{bucket_by_decade, Document};
use diachron::embed::SvdConfig;
use diachron::evaluate::{generate_synthetic_replacement_corpus, temporal_sweep, EmbeddingKind, SweepConfig, SynthSpec};

fn main() -> diachron::Result<()> {
    let synth = generate_synthetic_replacement_corpus(&SynthSpec::default())?;
    let docs = synth.documents.iter().map(|(y, t)| Document::from_text(*y, t)).collect();
    let periods = bucket_by_decade(docs, 1920);

    let targets = ["1960", "1970", "1980", "1990"].iter().map(|p| p.parse()).collect::<Result<_, _>>()?;
    let embedding = EmbeddingKind::Svd(SvdConfig { dim: 50, ..Default::default() });
    let mut cfg = SweepConfig::new("1930".parse()?, targets, embedding);
    cfg.balance_tokens = true;
    cfg.eval.ks = vec![1, 10];
    cfg.workers = 4;

    let outcome = temporal_sweep(&periods, &synth.gold, &cfg)?;
    println!("{} pairs filtered out", outcome.filtered_out);
    outcome.report.write_summary(std::io::stdout()).unwrap();
    outcome.report.write_csv(std::io::stdout()).unwrap();
    Ok(())
}
