//! Plants replacement pairs in a synthetic corpus, then trains, aligns and
//! scores OP, OP+SC and LT on them.
//!
//! cargo run --release --example synthetic_end_to_end -- [dim]

use diachron::align::{intersect, orthogonal_procrustes, ridge_linear_map, select_seed_pairs, Preprocess};
use diachron::corpus::{bucket_by_decade, Document, FrequencyStore, TimePeriod};
use diachron::embed::{train_svd, SvdConfig};
use diachron::evaluate::{evaluate_methods, generate_synthetic_replacement_corpus, EvalReport, EvalSettings, Maps, SynthSpec};

fn main() -> diachron::Result<()> {
    let dim: usize = std::env::args().nth(1).map_or(300, |a| a.parse().expect("dim"));
    let synth = generate_synthetic_replacement_corpus(&SynthSpec::default())?;
    let docs = synth.documents.iter().map(|(y, t)| Document::from_text(*y, t)).collect();
    let corpora = bucket_by_decade(docs, 1920);
    let freq = FrequencyStore::from_corpora(corpora.values());

    let base_pc = &corpora[&"1930".parse::<TimePeriod>()?];
    let target_pc = &corpora[&"1980".parse::<TimePeriod>()?];
    let cfg = SvdConfig { dim, ..Default::default() };
    let base = train_svd(base_pc, &cfg)?;
    let target = train_svd(target_pc, &cfg)?;
    println!("vocab: base {} target {}, dim {}", base.len(), target.len(), base.dim());

    let op = orthogonal_procrustes(&intersect(&base, &target, Preprocess::L2Normalize)?)?;
    let seeds = select_seed_pairs(&base, &target, &base_pc.vocabulary, &target_pc.vocabulary, 1000, Preprocess::L2Normalize)?;
    let lt = ridge_linear_map(&seeds, 0.2)?;
    let maps = Maps { orthogonal: Some(&op), linear: Some(&lt) };

    let settings = EvalSettings::default();
    let report = EvalReport {
        cells: evaluate_methods(&base, &target, maps, Some(&freq), &synth.gold, "svd", &settings)?,
        conventions: settings.conventions(),
    };
    report.write_summary(std::io::stdout()).expect("stdout");
    Ok(())
}
