use criterion::{black_box, criterion_group, criterion_main, Criterion};
use disgeo::geometry::{area, jaccard, overlap_ratio, union_all, Geom};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_rects(n: usize, seed: u64) -> Vec<Geom> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = rng.gen_range(-20.0..20.0);
            let y = rng.gen_range(-20.0..20.0);
            let w = rng.gen_range(0.5..5.0);
            let h = rng.gen_range(0.5..5.0);
            Geom::rect(x, y, x + w, y + h)
        })
        .collect()
}

fn bench_overlap(c: &mut Criterion) {
    let rects = random_rects(64, 11);
    let mut group = c.benchmark_group("overlap");
    group.bench_function("pairwise_jaccard", |bencher| {
        bencher.iter(|| {
            let mut acc = 0.0;
            for pair in rects.chunks(2) {
                acc += jaccard(black_box(&pair[0]), black_box(&pair[1])).unwrap();
            }
            acc
        })
    });
    group.bench_function("overlap_ratio", |bencher| {
        bencher.iter(|| overlap_ratio(black_box(&rects[0]), black_box(&rects[1])).unwrap())
    });
    group.finish();
}

fn bench_dissolve(c: &mut Criterion) {
    let rects = random_rects(32, 13);
    let mut group = c.benchmark_group("dissolve");
    group.bench_function("union_32_rects", |bencher| {
        bencher.iter(|| {
            let dissolved = union_all(black_box(&rects)).unwrap();
            area(&dissolved).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_overlap, bench_dissolve);
criterion_main!(benches);
