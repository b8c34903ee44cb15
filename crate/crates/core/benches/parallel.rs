//! Throughput of the data-parallel kernels.
//!
//! With the default `parallel` feature each workload runs twice: on rayon's
//! global pool and inside a one-thread pool. Build with
//! `--no-default-features` for the plain sequential baseline.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nme_audit::audit::{audit_dataset, score_records, AuditConfig};
use nme_audit::simulate::{simulate_records, AttributeSim, SimulationSpec};
use nme_audit::stats::{bootstrap_mean_diff_ci, permutation_test, PermutationMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn spec(per_stratum: u64) -> SimulationSpec {
    SimulationSpec {
        dataset: "bench".into(),
        seed: 1,
        attributes: ["young", "men"]
            .iter()
            .map(|name| AttributeSim {
                name: name.to_string(),
                n_with: per_stratum,
                n_without: per_stratum,
                mean_with: 0.044,
                mean_without: 0.048,
                sigma: 0.015,
            })
            .collect(),
    }
}

fn samples(n: usize, mean: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(mean, 1.0).unwrap();
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

/// Runs `f` under each available execution mode.
fn modes(c: &mut Criterion, group: &str, f: impl Fn() + Sync) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    #[cfg(feature = "parallel")]
    {
        g.bench_function(criterion::BenchmarkId::new("rayon-global", rayon::current_num_threads()), |b| b.iter(&f));
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        g.bench_function(criterion::BenchmarkId::new("rayon-single", 1), |b| single.install(|| b.iter(&f)));
    }
    #[cfg(not(feature = "parallel"))]
    g.bench_function("sequential", |b| b.iter(&f));
    g.finish();
}

fn bench(c: &mut Criterion) {
    let a = samples(2_000, 0.0, 1);
    let b = samples(2_000, 0.1, 2);
    modes(c, "permutation_montecarlo_10k", || {
        let mode = PermutationMode::MonteCarlo { iterations: 10_000, seed: 3 };
        black_box(permutation_test(&a, &b, mode).unwrap());
    });
    modes(c, "bootstrap_2k", || {
        black_box(bootstrap_mean_diff_ci(&a, &b, 0.95, 2_000, 4).unwrap());
    });

    let spec = spec(25_000);
    modes(c, "simulate_100k", || {
        black_box(simulate_records(&spec).unwrap());
    });

    let records = simulate_records(&spec).unwrap();
    let config = AuditConfig::default();
    modes(c, "score_100k", || {
        black_box(score_records(&records, &config));
    });
    let attributes = vec!["young".to_string(), "men".to_string()];
    modes(c, "audit_100k", || {
        black_box(audit_dataset(&records, &attributes, &config).unwrap());
    });
}

criterion_group!(benches, bench);
criterion_main!(benches);
