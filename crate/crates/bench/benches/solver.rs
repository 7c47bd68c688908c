use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use membrane_lab_bench::{graded_profile, patch_profile};

use membrane_lab::analysis::{analyze, compute_spectrum, AnalysisConfig, Window};
use membrane_lab::config::Bundle;
use membrane_lab::loading::{optimize_two_region, simulate_layers, SearchOptions, Stabilization, TwoRegionBounds};
use membrane_lab::membrane::{composite_modes, guaranteed_ceiling, lowest_modes};
use membrane_lab::synth::{render_stroke, RenderSpec, StrokeName};

fn modes(c: &mut Criterion) {
    let b = Bundle::embedded().unwrap();
    c.bench_function("lowest_modes/uniform/13", |x| {
        x.iter(|| lowest_modes(black_box(&b.uniform_profile), 13).unwrap())
    });
    c.bench_function("lowest_modes/two_region/13", |x| {
        x.iter(|| lowest_modes(black_box(&b.harmonic_profile), 13).unwrap())
    });
    let patch = patch_profile();
    c.bench_function("lowest_modes/patch/13", |x| {
        x.iter(|| lowest_modes(black_box(&patch), 13).unwrap())
    });
    for rings in [4, 16, 32] {
        let p = graded_profile(rings);
        c.bench_function(&format!("lowest_modes/graded{rings}/13"), |x| {
            x.iter(|| lowest_modes(black_box(&p), 13).unwrap())
        });
    }
    let p = &b.harmonic_profile;
    let ceiling = guaranteed_ceiling(p, 4, 4);
    c.bench_function("composite_modes/two_region/m4n4", |x| {
        x.iter(|| composite_modes(black_box(p), 4, 4, ceiling).unwrap())
    });
}

fn loading(c: &mut Criterion) {
    let b = Bundle::embedded().unwrap();
    let mut g = c.benchmark_group("loading");
    g.sample_size(10);
    let options = SearchOptions {
        budget: 500,
        ..SearchOptions::default()
    };
    g.bench_function("optimize_two_region/budget500", |x| {
        x.iter(|| optimize_two_region(&b.uniform_profile, &TwoRegionBounds::default(), &options).unwrap())
    });
    g.bench_function("simulate_layers/bundled", |x| {
        x.iter(|| simulate_layers(&b.uniform_profile, &b.layer_steps, &Stabilization::default()).unwrap())
    });
    g.finish();
}

fn audio(c: &mut Criterion) {
    let b = Bundle::embedded().unwrap();
    let template = b.template(StrokeName::Chappu);
    let table = b.mode_table(template.head, None).unwrap();
    let spec = RenderSpec::default();
    let clip = render_stroke(&table, template, &spec).unwrap();

    let mut g = c.benchmark_group("audio");
    g.sample_size(20);
    g.bench_function("render_stroke/chappu/3s", |x| {
        x.iter(|| render_stroke(&table, template, &spec).unwrap())
    });
    g.bench_function("spectrum/65536", |x| {
        x.iter(|| compute_spectrum(black_box(&clip), 44100, 1 << 16, Window::Hann).unwrap())
    });
    g.bench_function("analyze/chappu/3s", |x| {
        x.iter_batched(
            || clip.clone(),
            |clip| analyze(&clip, 44100, &AnalysisConfig::default()).unwrap(),
            BatchSize::LargeInput,
        )
    });
    g.finish();
}

criterion_group!(benches, modes, loading, audio);
criterion_main!(benches);
