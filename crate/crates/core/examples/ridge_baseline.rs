//! Fits the ridge linear map on frequent seed words for several penalties
//! and compares it with the orthogonal map on the planted pairs.

use diachron::align::{intersect, orthogonal_procrustes, ridge_linear_map, select_seed_pairs, Preprocess};
use diachron::corpus::{bucket_by_decade, Document, FrequencyStore, TimePeriod};
use diachron::embed::{train_svd, SvdConfig};
use diachron::evaluate::{evaluate_methods, generate_synthetic_replacement_corpus, EvalSettings, Maps, SynthSpec};
use diachron::retrieve::Method;

fn main() -> diachron::Result<()> {
    let synth = generate_synthetic_replacement_corpus(&SynthSpec::default())?;
    let docs = synth.documents.iter().map(|(y, t)| Document::from_text(*y, t)).collect();
    let periods = bucket_by_decade(docs, 1920);
    let freq = FrequencyStore::from_corpora(periods.values());
    let (bp, tp) = (&periods[&"1930".parse::<TimePeriod>()?], &periods[&"1980".parse::<TimePeriod>()?]);
    let cfg = SvdConfig { dim: 50, ..Default::default() };
    let base = train_svd(bp, &cfg)?;
    let target = train_svd(tp, &cfg)?;

    let op = orthogonal_procrustes(&intersect(&base, &target, Preprocess::L2Normalize)?)?;
    let settings = EvalSettings {
        methods: vec![Method::Op, Method::Lt],
        ks: vec![1, 10],
        ..Default::default()
    };
    for top_n in [50, 1000] {
        let seeds = select_seed_pairs(&base, &target, &bp.vocabulary, &tp.vocabulary, top_n, Preprocess::L2Normalize)?;
        for alpha in [0.01, 0.2, 10.0] {
            let lt = ridge_linear_map(&seeds, alpha)?;
            let maps = Maps { orthogonal: Some(&op), linear: Some(&lt) };
            let cells = evaluate_methods(&base, &target, maps, Some(&freq), &synth.gold, "svd", &settings)?;
            let lt_cell = cells.iter().find(|c| c.method == Method::Lt).unwrap();
            let op_cell = cells.iter().find(|c| c.method == Method::Op).unwrap();
            println!(
                "seeds {:>3} alpha {alpha:>5}: residual {:>9.4}  LT R@1 {:.2} R@10 {:.2}  (OP R@1 {:.2})",
                seeds.tokens.len(),
                lt.stats.residual,
                lt_cell.recall_at[&1],
                lt_cell.recall_at[&10],
                op_cell.recall_at[&1]
            );
        }
    }
    Ok(())
}
