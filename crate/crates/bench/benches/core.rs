use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use subreg_core::rnn::{forward, loss_and_gradient, Batch, CellKind, RnnConfig, RnnModel};
use subreg_core::{
    characteristic_sample, compile, generate_train, rpni, rpni_on_corpus, sample_words, Alphabet, Label, Language,
    LengthCountTable, Regimen,
};

fn automata(c: &mut Criterion) {
    for lang in [Language::SL8, Language::SP8] {
        let g = lang.grammar();
        c.bench_function(&format!("compile+minimize {lang}"), |b| b.iter(|| compile(black_box(&g))));
    }
    let dfa = compile(&Language::SP8.grammar());
    c.bench_function("count table SP8 to length 50", |b| b.iter(|| LengthCountTable::new(black_box(&dfa), 50)));
    c.bench_function("sample 2000 SP8 words of length 40", |b| {
        b.iter(|| sample_words(&dfa, 40, 2000, 7, true).unwrap())
    });
}

fn learners(c: &mut Criterion) {
    let dfa = compile(&Language::SL8.grammar());
    let (pos, neg) = characteristic_sample(&dfa);
    let sigma = Alphabet::abcd();
    c.bench_function("rpni characteristic sample SL8", |b| b.iter(|| rpni(&pos, &neg, &sigma).unwrap()));
    let train = generate_train("SP4", &Language::SP4.grammar(), Regimen::K1, 42).unwrap();
    c.bench_function("rpni SP4 1k corpus", |b| b.iter(|| rpni_on_corpus(&train).unwrap()));

    let words: Vec<&[u8]> = train.entries.iter().take(128).map(|e| &e.word[..]).collect();
    let labels: Vec<Label> = train.entries.iter().take(128).map(|e| e.label).collect();
    for (cell, d) in [(CellKind::Lstm, 10), (CellKind::Lstm, 100), (CellKind::Elman, 100)] {
        let model = RnnModel::seeded(&RnnConfig::new(cell, d, 4)).unwrap();
        let batch = Batch::from_sequences(&words, 4);
        c.bench_function(&format!("{cell}-v{d} forward, batch 128"), |b| {
            b.iter(|| forward(&model, black_box(&batch)).unwrap())
        });
        c.bench_function(&format!("{cell}-v{d} forward+backward, batch 128"), |b| {
            b.iter_batched(|| batch.clone(), |batch| loss_and_gradient(&model, &batch, &labels).unwrap(), BatchSize::SmallInput)
        });
    }
}

criterion_group!(benches, automata, learners);
criterion_main!(benches);
