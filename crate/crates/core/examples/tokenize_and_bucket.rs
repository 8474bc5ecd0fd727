//! Tokenizes a few dated documents, groups them by decade and prints each
//! word's relative-frequency series.

use diachron::corpus::{bucket_by_decade, tokenize, Document, FrequencyStore};

fn main() {
    println!("{:?}", tokenize("İSTANBUL'da Işık, \"vesika\" ve belge... 1928"));

    let docs = vec![
        Document::from_text(1928, "Bu vesika mühim bir vesikadır. Vesika elimizde."),
        Document::from_text(1934, "Vesika ile belge arasında fark yok."),
        Document::from_text(1951, "Belge teslim edildi, vesika istenmedi."),
        Document::from_text(1987, "Belge belge üstüne geldi."),
    ];
    let periods = bucket_by_decade(docs, 1920);
    for pc in periods.values() {
        println!("{}: {} docs, {} tokens", pc.period, pc.documents.len(), pc.token_count);
    }

    let store = FrequencyStore::from_corpora(periods.values());
    let words = vec!["vesika".to_string(), "belge".to_string()];
    store.write_tsv(&words, std::io::stdout()).unwrap();
}
