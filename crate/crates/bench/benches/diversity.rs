use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use newsdiv::{collection_diversity, fixtures, greedy_select, max_diversity_oracle, DocumentProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOPICS: [&str; 2] = ["Climate", "Immigration"];
const FRAMES: [&str; 4] = ["Health", "Cultural", "Security", "Economy"];

fn random_pool(n: usize, seed: u64) -> Vec<DocumentProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            fixtures::doc(
                &format!("d{i:05}"),
                TOPICS[rng.gen_range(0..TOPICS.len())],
                FRAMES[rng.gen_range(0..FRAMES.len())],
            )
        })
        .collect()
}

fn bench_collection(c: &mut Criterion) {
    let schema = fixtures::guiding_schema();
    let mut group = c.benchmark_group("collection_diversity");
    for n in [10, 100, 500] {
        let pool = random_pool(n, 7);
        group.bench_with_input(BenchmarkId::from_parameter(n), &pool, |b, pool| {
            b.iter(|| collection_diversity(&schema, black_box(pool)).unwrap())
        });
    }
    group.finish();
}

fn bench_greedy(c: &mut Criterion) {
    let schema = fixtures::guiding_schema();
    let mut group = c.benchmark_group("greedy_select");
    for n in [50, 200] {
        let pool = random_pool(n, 11);
        group.bench_with_input(BenchmarkId::from_parameter(n), &pool, |b, pool| {
            b.iter(|| greedy_select(&schema, black_box(pool), 10).unwrap())
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let schema = fixtures::guiding_schema();
    let pool = random_pool(14, 3);
    c.bench_function("max_diversity_oracle/14c5", |b| {
        b.iter(|| max_diversity_oracle(&schema, black_box(&pool), 5).unwrap())
    });
}

criterion_group!(benches, bench_collection, bench_greedy, bench_oracle);
criterion_main!(benches);
