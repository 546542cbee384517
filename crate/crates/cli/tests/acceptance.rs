//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::time::{Duration, Instant};

use pvnne::ensemble::trim_aggregate;
use pvnne::evaluation::{
    error_variance, mape, r_squared, run_benchmarks, select_test_days, BenchmarkConfig, BenchmarkModel, Season,
};
use pvnne::neural::{init_network, train_lm, Activation, LmConfig, Network, NetworkSpec};
use pvnne::pso::{pso_minimize, train_pso, PsoConfig};
use pvnne::sky::{self, DayKind, SiteGeometry};
use pvnne::synth::{
    cell_temperature, generate_year, kind_counts, pv_power, PlantParams, SynthConfig, TABLE_COMPOSITION,
};
use pvnne::wavelet::{decompose, reconstruct, Extension, WaveletName, WaveletSpec};
use pvnne::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn wavelet_round_trip() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let names = [WaveletName::Haar, WaveletName::Db2, WaveletName::Db4];
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let n = rng.random_range(64..=1024);
        let spec = WaveletSpec::new(names[i % 3], rng.random_range(1..=3)).unwrap();
        let ext = if i % 2 == 0 { Extension::Symmetric } else { Extension::Periodic };
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-3..=3))).collect();
        let y = reconstruct(&decompose(&x, &spec, ext).unwrap()).unwrap();
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = x.iter().zip(&y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
        worst = worst.max(err);
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(worst <= 1e-8 && secs < 10.0, format!("worst relative error {worst:.2e}, {secs:.2} s"))
}

fn trim_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0;
    let mut alpha_zero = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=200);
        let alpha = rng.random_range(0.0..=95.0);
        let values: Vec<f64> =
            (0..n).map(|_| rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-6..=6))).collect();
        if trim_aggregate(&values, alpha).ok() != common::trimmed_mean_oracle(&values, alpha) {
            mismatches += 1;
        }
        let mean = common::exact_sum_oracle(&values) / n as f64;
        if trim_aggregate(&values, 0.0).unwrap().to_bits() != mean.to_bits() {
            alpha_zero += 1;
        }
    }
    verdict(
        mismatches == 0 && alpha_zero == 0,
        format!("{mismatches} oracle mismatches, {alpha_zero} alpha=0 mismatches in 10000 cases"),
    )
}

fn metric_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..=200);
        let peak = rng.random_range(1.0..500.0);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..peak)).collect();
        let f: Vec<f64> = a.iter().map(|x| (x + rng.random_range(-0.3..0.3) * peak).max(0.0)).collect();
        let e: Vec<f64> = a.iter().zip(&f).map(|(x, y)| (x - y) / peak).collect();
        let m = 100.0 * e.iter().rev().map(|v| v.abs()).sum::<f64>() / n as f64;
        let em = e.iter().rev().sum::<f64>() / n as f64;
        let var = e.iter().map(|v| v * v).sum::<f64>() / n as f64 - em * em;
        let am = a.iter().rev().sum::<f64>() / n as f64;
        let r2 = 1.0
            - a.iter().zip(&f).map(|(x, y)| (y - x).powi(2)).sum::<f64>()
                / a.iter().map(|x| (am - x).powi(2)).sum::<f64>();
        worst = worst
            .max((mape(&a, &f, peak).unwrap() - m).abs())
            .max((error_variance(&a, &f, peak).unwrap() - var).abs())
            .max((r_squared(&a, &f).unwrap() - r2).abs());
    }
    let hand = mape(&[50.0, 80.0], &[45.0, 88.0], 100.0).unwrap() == 6.5
        && error_variance(&[50.0, 80.0], &[45.0, 72.0], 100.0).unwrap() == 2.25e-4
        && r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap() == 0.5;
    verdict(worst <= 1e-12 && hand, format!("worst deviation {worst:.2e}, hand examples exact: {hand}"))
}

fn gradient_check() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for case in 0..50 {
        let mut sizes = vec![rng.random_range(1..=6)];
        sizes.extend((0..rng.random_range(1..=3)).map(|_| rng.random_range(1..=8)));
        sizes.push(rng.random_range(1..=3));
        let spec = NetworkSpec::new(sizes.clone(), case);
        let mut net = init_network(&spec).unwrap();
        let params: Vec<f64> = net.parameters().iter().map(|p| p + rng.random_range(-0.3..0.3)).collect();
        net.set_parameters(&params).unwrap();
        let rows = 7;
        let x = Matrix::from_vec(rows, sizes[0], (0..rows * sizes[0]).map(|_| rng.random_range(-1.0..1.0)).collect());
        let outs = *sizes.last().unwrap();
        let y = Matrix::from_vec(rows, outs, (0..rows * outs).map(|_| rng.random_range(-1.0..1.0)).collect());
        let grad = net.gradient(&x, &y).unwrap();
        for i in 0..params.len() {
            let mut p = params.clone();
            p[i] += h;
            let fp = Network::from_parameters(&spec, p.clone()).unwrap().mse(&x, &y).unwrap();
            p[i] -= 2.0 * h;
            let fm = Network::from_parameters(&spec, p).unwrap().mse(&x, &y).unwrap();
            worst = worst.max((grad[i] - (fp - fm) / (2.0 * h)).abs());
        }
    }
    verdict(worst <= 1e-6, format!("worst component difference {worst:.2e} over 50 networks"))
}

fn trainers() -> Verdict {
    let xs: Vec<f64> = (0..21).map(|i| -1.0 + 0.1 * i as f64).collect();
    let x = Matrix::from_vec(21, 1, xs.clone());
    let y = Matrix::from_vec(21, 1, xs.iter().map(|v| 2.0 * v + 1.0).collect());
    let spec = NetworkSpec { output_activation: Activation::Linear, ..NetworkSpec::new(vec![1, 1], 0) };
    let (_, lm) = train_lm(
        &init_network(&spec).unwrap(),
        &x,
        &y,
        &LmConfig { max_epochs: 5, tolerance: 1e-12, ..Default::default() },
    )
    .unwrap();
    let lm_ok = lm.final_mse < 1e-12 && lm.epochs_run <= 5;

    let start = Instant::now();
    let mut best: Vec<f64> = (0..20)
        .map(|seed| {
            pso_minimize(|p| p.iter().map(|v| v * v).sum(), 10, &PsoConfig { seed, ..Default::default() })
                .unwrap()
                .best_value
        })
        .collect();
    let pso_secs = start.elapsed().as_secs_f64();
    best.sort_by(f64::total_cmp);
    let median = 0.5 * (best[9] + best[10]);
    let pso_ok = median < 1e-3 && pso_secs < 5.0;

    let xor_x = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
    let xor_y = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![1.0], vec![0.0]]);
    let solved = (0..10u64)
        .filter(|&seed| {
            let net = init_network(&NetworkSpec::new(vec![2, 4, 1], seed)).unwrap();
            let (_, r) = train_pso(&net, &xor_x, &xor_y, &PsoConfig { seed, ..Default::default() }).unwrap();
            r.final_mse < 0.01
        })
        .count();
    verdict(
        lm_ok && pso_ok && solved >= 8,
        format!(
            "LM line mse {:.1e} in {} epochs; PSO sphere median {median:.1e} in {pso_secs:.2} s; XOR solved {solved}/10",
            lm.final_mse, lm.epochs_run
        ),
    )
}

fn sky_module() -> Verdict {
    use DayKind::*;
    let grid = [
        (0.1, Cloudy),
        (0.24, Cloudy),
        (0.25, PartiallyCloudy),
        (0.26, PartiallyCloudy),
        (0.3, PartiallyCloudy),
        (0.44, PartiallyCloudy),
        (0.45, Clear),
        (0.46, Clear),
        (0.5, Clear),
    ];
    let table = grid.iter().all(|&(k, kind)| sky::classify_day(k, 1.0).unwrap().kind == kind);
    let summer = sky::declination(171).unwrap();
    let winter = sky::declination(354).unwrap();
    let decl = (summer - 23.45).abs() <= 0.01 && (winter + 23.45).abs() <= 0.01;
    let site = SiteGeometry { latitude_deg: 0.0, ..Default::default() };
    let equinox = 80;
    assert_eq!(sky::declination(equinox).unwrap(), 0.0);
    let h0 = sky::extraterrestrial_insolation(equinox, &site).unwrap();
    let expected = 24.0 * sky::extraterrestrial_irradiance(equinox, &site).unwrap() / std::f64::consts::PI;
    let rel = ((h0 - expected) / expected).abs();
    verdict(
        table && decl && rel <= 1e-9,
        format!("class grid ok: {table}; declination {summer:.4}/{winter:.4}; equator equinox H0 rel err {rel:.1e}"),
    )
}

fn physics() -> Verdict {
    let t = cell_temperature(25.0, 1000.0, 45.0);
    let p = pv_power(800.0, 56.25, &PlantParams::single(300.0, 0.004));
    verdict(t == 56.25 && p == 210.0, format!("cell temperature {t}, power {p}"))
}

fn synthetic_closed_loop() -> Verdict {
    let cfg = SynthConfig::default();
    let year = generate_year(&cfg).unwrap();
    let mut worst = 0usize;
    for (w, chunk) in year.days.chunks(cfg.window_days).enumerate() {
        let target = kind_counts(&TABLE_COMPOSITION[w], chunk.len());
        for (i, kind) in DayKind::ALL.iter().enumerate() {
            let got = chunk.iter().filter(|d| d.class.kind == *kind).count();
            worst = worst.max(got.abs_diff(target[i]));
        }
    }
    let matching = year.days.iter().filter(|d| d.class.kind == d.requested).count();
    let share = matching as f64 / year.days.len() as f64;
    verdict(
        worst <= 1 && share >= 0.95,
        format!("worst window deviation {worst} day(s); {:.1}% classify as requested", 100.0 * share),
    )
}

const FIXTURE_SEEDS: [u64; 3] = [2014, 2015, 2016];
const REFERENCE_JOBS: usize = 8;

struct SeedRun {
    seed: u64,
    m1: f64,
    m6: f64,
    members: f64,
    /// (season, kind, M1 variance, M6 variance)
    cells: Vec<(Season, DayKind, f64, f64)>,
    failures: usize,
}

fn benchmark_fixture() -> (Vec<SeedRun>, Duration, usize) {
    let threads = rayon::current_num_threads();
    let start = Instant::now();
    let runs = FIXTURE_SEEDS
        .iter()
        .map(|&seed| {
            let year = generate_year(&SynthConfig { seed, ..Default::default() }).unwrap();
            let mut cfg =
                BenchmarkConfig { peak_power_kw: Some(PlantParams::default().peak_kw()), ..Default::default() };
            cfg.ensemble.base_seed = seed;
            let days = select_test_days(&year.dataset, &cfg.site, cfg.history_days()).unwrap();
            let report = run_benchmarks(&year.dataset, &days, &cfg).unwrap();
            let failures = report.rows.iter().flat_map(|r| &r.results).filter(|r| r.failure.is_some()).count();
            let cells = report
                .rows
                .iter()
                .map(|r| {
                    let v = |m| r.variance(m).unwrap_or(f64::NAN);
                    (r.season, r.kind, v(BenchmarkModel::M1), v(BenchmarkModel::M6))
                })
                .collect();
            SeedRun {
                seed,
                m1: report.average_mape[&BenchmarkModel::M1].unwrap_or(f64::NAN),
                m6: report.average_mape[&BenchmarkModel::M6].unwrap_or(f64::NAN),
                members: report.average_member_mape.unwrap_or(f64::NAN),
                cells,
                failures,
            }
        })
        .collect();
    (runs, start.elapsed(), threads)
}

fn end_to_end_ordering(runs: &[SeedRun], elapsed: Duration, threads: usize) -> Verdict {
    let full = runs.iter().all(|r| r.cells.len() == 12 && r.failures == 0);
    let beats_persistence = runs.iter().filter(|r| r.m6 < r.m1).count();
    let beats_members = runs.iter().filter(|r| r.m6 <= r.members).count();
    // Work is spread over members, so time scales with the thread count.
    let projected = elapsed.as_secs_f64() * threads as f64 / REFERENCE_JOBS as f64;
    let per_seed: Vec<String> = runs
        .iter()
        .map(|r| format!("seed {}: M6 {:.2}% M1 {:.2}% members {:.2}%", r.seed, r.m6, r.m1, r.members))
        .collect();
    verdict(
        full && beats_persistence == 3 && beats_members == 3 && projected < 600.0,
        format!(
            "{}; M6<M1 {beats_persistence}/3, M6<=members {beats_members}/3; {:.0} s on {threads} thread(s), {projected:.0} s projected at {REFERENCE_JOBS} jobs",
            per_seed.join("; "),
            elapsed.as_secs_f64()
        ),
    )
}

fn variance_ordering(runs: &[SeedRun]) -> Verdict {
    let mut cells: std::collections::BTreeMap<(Season, DayKind), (f64, f64)> = Default::default();
    for r in runs {
        for &(s, k, v1, v6) in &r.cells {
            let e = cells.entry((s, k)).or_default();
            e.0 += v1 / runs.len() as f64;
            e.1 += v6 / runs.len() as f64;
        }
    }
    let better = cells.values().filter(|(v1, v6)| v6 <= v1).count();
    let per_seed: Vec<usize> = runs.iter().map(|r| r.cells.iter().filter(|c| c.3 <= c.2).count()).collect();
    verdict(
        cells.len() == 12 && better >= 10,
        format!("M6 variance <= M1 in {better}/12 seed-averaged cells (per seed {per_seed:?})"),
    )
}

fn cli_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        "seed = 77\n\
         [synth]\nn_days = 45\n\
         [ensemble]\nn_structures = 2\nmodels_per_structure = 4\nhidden_schedule = [6, 8]\ntrainer_split = [\"lm\", \"pso\"]\n\
         [trainers.lm]\nmax_epochs = 10\n\
         [trainers.pso]\nswarm_size = 10\nmax_iterations = 15\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for jobs in [1, 2, 4] {
        let out = dir.path().join(format!("jobs{jobs}"));
        for cmd in ["train", "forecast"] {
            let code = pvnne_cli::run([
                "pvnne",
                cmd,
                "--config",
                config.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--jobs",
                &jobs.to_string(),
            ]);
            if code != 0 {
                return verdict(false, format!("{cmd} exited with {code} at --jobs {jobs}"));
            }
        }
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap())
            .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
            .collect();
        files.sort();
        outputs.push(files);
    }
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    verdict(
        identical && names.contains(&"forecast.csv"),
        format!("files {names:?} identical across --jobs 1/2/4: {identical}"),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Verdict)> = vec![
        (1, "wavelet round trip", wavelet_round_trip()),
        (2, "trim aggregation oracle", trim_oracle()),
        (3, "metric oracles", metric_oracles()),
        (4, "gradient check", gradient_check()),
        (5, "trainers", trainers()),
        (6, "sky module", sky_module()),
        (7, "physics", physics()),
        (8, "synthetic-year closed loop", synthetic_closed_loop()),
    ];
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(REFERENCE_JOBS.min(std::thread::available_parallelism().map_or(1, |n| n.get())))
        .build()
        .unwrap();
    let (runs, elapsed, threads) = pool.install(benchmark_fixture);
    results.push((9, "end-to-end ordering", end_to_end_ordering(&runs, elapsed, threads)));
    results.push((10, "error-variance ordering", variance_ordering(&runs)));
    results.push((11, "determinism across --jobs", cli_determinism()));

    for (id, name, v) in &results {
        println!("criterion {id:>2} {}: {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
