use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use s3radon::geometry::fibre_circle;
use s3radon::harmonics::{project_radon_coeffs, WignerD};
use s3radon::kernels::kernel_double_radon;
use s3radon::reconstruction::{
    center_dictionary, fit_harmonic, fit_rbf, forward_w_rbf, synthesize_samples, DesignGrid, OdfModel, RbfComponent,
    RbfMixture,
};
use s3radon::transforms::{abel_reconstruct, generalized_radon, radon, w_transform};
use s3radon::{Dir3, KernelSpec, Quat, Rules};

fn mixture(rng: &mut ChaCha8Rng, n: usize) -> RbfMixture {
    let spec = KernelSpec::dlvp(4.0).unwrap();
    let w = 1.0 / n as f64;
    RbfMixture::new((0..n).map(|_| RbfComponent { center: Quat::random(rng), weight: w, spec }).collect()).unwrap()
}

fn transforms(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = mixture(&mut rng, 2);
    let rules = Rules::default();
    let h = Dir3::random(&mut rng);
    let r = Dir3::random(&mut rng);
    let circle = fibre_circle(h, r);

    c.bench_function("radon/256 nodes", |b| b.iter(|| radon(&f, black_box(&circle), &rules)));
    c.bench_function("generalized_radon/default", |b| {
        b.iter(|| generalized_radon(&f, black_box(&circle), 1.0, &rules).unwrap())
    });
    c.bench_function("w_transform/default", |b| b.iter(|| w_transform(&f, black_box(h), r, 1.0, &rules).unwrap()));
    c.bench_function("forward_w_rbf/2 components", |b| b.iter(|| forward_w_rbf(&f, black_box(h), r, 1.0).unwrap()));
    let ap = KernelSpec::abel_poisson(0.5).unwrap();
    c.bench_function("kernel_double_radon/abel_poisson", |b| b.iter(|| kernel_double_radon(&ap, black_box(0.7), 1.3)));

    let small = Rules::for_polynomial_degree(8);
    let q = Quat::random(&mut rng);
    c.bench_function("abel_reconstruct/grid 128", |b| {
        b.iter(|| abel_reconstruct(&f, black_box(q), 128, &small).unwrap())
    });
    c.bench_function("project_radon_coeffs/L=4", |b| b.iter(|| project_radon_coeffs(&f, 4, &small)));
    let wd = WignerD::new(8);
    c.bench_function("wigner_d/L=8", |b| b.iter(|| wd.matrices(black_box(q))));
}

fn fits(c: &mut Criterion) {
    let spec = KernelSpec::dlvp(20.0).unwrap();
    let centers = center_dictionary(30, 1).unwrap();
    let truth = RbfMixture::new(
        [0.5, 0.3, 0.2].iter().zip(&centers).map(|(&weight, &center)| RbfComponent { center, weight, spec }).collect(),
    )
    .unwrap();
    let samples = synthesize_samples(&OdfModel::Rbf(truth), &DesignGrid::random(500, 2), 0.0, 0).unwrap();

    let mut g = c.benchmark_group("fit");
    g.sample_size(20);
    g.bench_function("rbf/500x30", |b| b.iter(|| fit_rbf(black_box(&samples), &centers, &spec, 0.0, false).unwrap()));
    g.bench_function("rbf nonneg/500x30", |b| {
        b.iter(|| fit_rbf(black_box(&samples), &centers, &spec, 0.0, true).unwrap())
    });
    g.bench_function("harmonic/L=4", |b| b.iter(|| fit_harmonic(black_box(&samples), 4, 0.0).unwrap()));
    g.finish();
}

criterion_group!(benches, transforms, fits);
criterion_main!(benches);
