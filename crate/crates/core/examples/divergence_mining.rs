//! Ranks the words that contribute most to the Jensen-Shannon divergence
//! between two decades and labels how their frequency moved.

use diachron::corpus::{bucket_by_decade, Document, FrequencyStore, TimePeriod};
use diachron::evaluate::{generate_synthetic_replacement_corpus, SynthSpec};
use diachron::lexstats::{categorize_words, period_jsd, top_divergence_words, ShiftThresholds};

fn main() -> diachron::Result<()> {
    let synth = generate_synthetic_replacement_corpus(&SynthSpec::default())?;
    let docs = synth.documents.iter().map(|(y, t)| Document::from_text(*y, t)).collect();
    let periods = bucket_by_decade(docs, 1920);
    let base: TimePeriod = "1930".parse()?;
    let target: TimePeriod = "2010".parse()?;

    let report = period_jsd(&periods[&target], &periods[&base])?;
    println!("JSD({base}, {target}) = {:.6} nats", report.jsd);

    let top = top_divergence_words(&report, 10);
    let store = FrequencyStore::from_corpora(periods.values());
    let shifts = categorize_words(&top, |w| store.series(w), &base, &target, &ShiftThresholds::default())?;
    for (w, c) in report.contributions.iter().take(10) {
        println!("{w:<12} {c:.6} {:?}", shifts[w]);
    }

    let planted: Vec<&str> = synth.gold.pairs.iter().flat_map(|(o, n)| [o.as_str(), n.as_str()]).collect();
    let hits = top.iter().filter(|w| planted.contains(&w.as_str())).count();
    println!("{hits} of the top 10 are planted OLD/NEW words");
    Ok(())
}
