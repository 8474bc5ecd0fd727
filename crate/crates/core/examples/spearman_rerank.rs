//! Queries one planted OLD word with plain OP and with OP+SC. OP+SC
//! reorders the cosine pool by Spearman correlation of frequency series.

use diachron::align::{intersect, orthogonal_procrustes, Preprocess};
use diachron::corpus::{bucket_by_decade, Document, FrequencyStore, TimePeriod};
use diachron::embed::{train_svd, SvdConfig};
use diachron::evaluate::{generate_synthetic_replacement_corpus, SynthSpec};
use diachron::retrieve::{spearman_series, Method, QueryOptions, RerankOrder, Retriever};

fn main() -> diachron::Result<()> {
    let synth = generate_synthetic_replacement_corpus(&SynthSpec::default())?;
    let docs = synth.documents.iter().map(|(y, t)| Document::from_text(*y, t)).collect();
    let periods = bucket_by_decade(docs, 1920);
    let freq = FrequencyStore::from_corpora(periods.values());
    let cfg = SvdConfig { dim: 30, ..Default::default() };
    let base = train_svd(&periods[&"1930".parse::<TimePeriod>()?], &cfg)?;
    let target = train_svd(&periods[&"1980".parse::<TimePeriod>()?], &cfg)?;
    let map = orthogonal_procrustes(&intersect(&base, &target, Preprocess::L2Normalize)?)?;
    let retriever = Retriever::new(&base, &target, &map, Some(&freq))?;

    let (old, new) = &synth.gold.pairs[3];
    println!("query {old}, planted counterpart {new}");
    println!("rho({old}, {new}) = {}", spearman_series(&freq.series(old), &freq.series(new))?);

    let stdout = || std::io::stdout();
    retriever.query(old, Method::Op, &QueryOptions::new(5))?.write_tsv(stdout()).unwrap();
    for order in [RerankOrder::AnticorrelatedFirst, RerankOrder::CorrelatedFirst] {
        let opts = QueryOptions { order, ..QueryOptions::new(5) };
        retriever.query(old, Method::OpSc, &opts)?.write_tsv(stdout()).unwrap();
    }
    Ok(())
}
