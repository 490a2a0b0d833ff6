//! Acceptance suite: one line per criterion, nonzero exit if any fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{brute_glcm, random_clusters, svm_kkt_violations, NbOracle};
use texturemap::classifiers::{
    Classifier, ClassifierSpec, Kernel, LabeledSample, ModelMeta, NbModel, PersistedModel,
    SvmModel, SvmParams, TrainingSet,
};
use texturemap::evaluation::{benchmark_runtime, cross_validate};
use texturemap::glcm::{compute_glcm, extract_features, Glcm};
use texturemap::pipeline::{extract_table, ExtractConfig};
use texturemap::synth::balanced_mosaic;
use texturemap::{Direction, Execution, OffsetSpec, QuantizedImage, WindowSpec};

type Check = Result<String, String>;

/// Name, check and runtime budget.
type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn training_set(rows: &[([f64; 4], u8)]) -> TrainingSet {
    TrainingSet::from_samples(rows.iter().map(|r| LabeledSample::new(r.0, r.1)).collect()).unwrap()
}

fn whole(img: &QuantizedImage) -> WindowSpec {
    WindowSpec::new(0, 0, img.width())
}

fn random_square(rng: &mut ChaCha8Rng, min: usize, max: usize, levels: usize) -> Vec<Vec<u8>> {
    let side = rng.gen_range(min..=max);
    (0..side)
        .map(|_| (0..side).map(|_| rng.gen_range(0..levels) as u8).collect())
        .collect()
}

fn glcm_oracle() -> Check {
    let canonical = [[0u8, 0, 1, 1], [0, 0, 1, 1], [0, 2, 2, 2], [2, 2, 3, 3]];
    let img = QuantizedImage::from_rows(4, &canonical).unwrap();
    let asym = compute_glcm(&img, whole(&img), OffsetSpec::default().symmetric(false)).unwrap();
    let mut table = [0u64; 16];
    for (i, j, c) in [
        (0, 0, 2),
        (0, 1, 2),
        (1, 1, 2),
        (0, 2, 1),
        (2, 2, 3),
        (2, 3, 1),
        (3, 3, 1),
    ] {
        table[i * 4 + j] = c;
    }
    ensure(asym.counts() == &table[..] && asym.total() == 12, || {
        format!("asymmetric counts {:?}", asym.counts())
    })?;
    let sym = compute_glcm(&img, whole(&img), OffsetSpec::default()).unwrap();
    let summed: Vec<u64> = (0..16)
        .map(|k| table[k] + table[(k % 4) * 4 + k / 4])
        .collect();
    ensure(sym.counts() == &summed[..] && sym.total() == 24, || {
        format!("symmetric counts {:?}", sym.counts())
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut comparisons = 0;
    for n in 0..200 {
        let levels = rng.gen_range(2..=4);
        let win = random_square(&mut rng, 2, 6, levels);
        let img = QuantizedImage::from_rows(levels as u16, &win).unwrap();
        for distance in 1..win.len() as u32 {
            for dir in Direction::ALL {
                for (sym, avg) in [(false, false), (true, false), (false, true), (true, true)] {
                    let off = OffsetSpec::new(distance, dir)
                        .unwrap()
                        .symmetric(sym)
                        .average_directions(avg);
                    let got = compute_glcm(&img, whole(&img), off).unwrap();
                    let want = brute_glcm(&win, levels, distance, dir.degrees(), sym, avg);
                    ensure(got.counts() == &want[..], || {
                        format!("window {n} {win:?} d={distance} {dir} sym={sym} avg={avg}")
                    })?;
                    comparisons += 1;
                }
            }
        }
    }
    Ok(format!(
        "12-pair table exact, 200 windows / {comparisons} offset settings exact"
    ))
}

fn closed_form() -> Check {
    let close = |a: [f64; 4], b: [f64; 4]| (0..4).all(|f| (a[f] - b[f]).abs() <= 1e-12);
    let off = OffsetSpec::default();
    for k in [0u8, 3, 7] {
        let img = QuantizedImage::from_rows(8, &[[k; 9]; 9]).unwrap();
        let f = extract_features(&img, whole(&img), off).unwrap().to_array();
        ensure(close(f, [1.0, 0.0, 1.0, 0.0]), || {
            format!("constant {k}: {f:?}")
        })?;
    }
    let rows: Vec<Vec<u8>> = (0..10)
        .map(|y| (0..10).map(|x| ((x + y) % 2) as u8).collect())
        .collect();
    let img = QuantizedImage::from_rows(2, &rows).unwrap();
    let f = extract_features(&img, whole(&img), off).unwrap().to_array();
    ensure(close(f, [0.5, 1.0, 0.5, 2f64.ln()]), || {
        format!("checkerboard: {f:?}")
    })?;
    for g in [2u16, 4, 8, 16, 64, 256] {
        let n = g as usize * g as usize;
        let e = Glcm::from_counts(g, vec![5; n], off)
            .unwrap()
            .normalize()
            .unwrap()
            .entropy();
        ensure((e - (n as f64).ln()).abs() <= 1e-12, || {
            format!("uniform G={g}: entropy {e}")
        })?;
    }
    Ok("constant, checkerboard and uniform (G=2..256) within 1e-12".into())
}

fn normalization_bounds() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 0..500 {
        let levels = [4usize, 8, 16][rng.gen_range(0..3)];
        let win = random_square(&mut rng, 8, 128, levels);
        let img = QuantizedImage::from_rows(levels as u16, &win).unwrap();
        let dir = Direction::ALL[rng.gen_range(0..4)];
        let off = OffsetSpec::new(rng.gen_range(1..=3), dir)
            .unwrap()
            .symmetric(rng.gen())
            .average_directions(rng.gen());
        let p = compute_glcm(&img, whole(&img), off)
            .unwrap()
            .normalize()
            .unwrap();
        let sum: f64 = p.probabilities().iter().sum();
        ensure((sum - 1.0).abs() <= 1e-12, || {
            format!("window {n}: sum p = {sum}")
        })?;
        ensure(p.probabilities().iter().all(|&v| v >= 0.0), || {
            format!("window {n}: negative p")
        })?;
        let [h, c, e, s] = p.features().to_array();
        let g = levels as f64;
        let ok = h > 0.0
            && h <= 1.0
            && e > 0.0
            && e <= 1.0
            && (0.0..=(g - 1.0).powi(2)).contains(&c)
            && s >= 0.0
            && s <= 2.0 * g.ln() + 1e-12;
        ensure(ok, || {
            format!("window {n}: features ({h}, {c}, {e}, {s}) out of bounds")
        })?;
    }
    Ok("500 windows, sum p = 1 within 1e-12, bounds hold".into())
}

fn naive_bayes() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut pairs = 0;
    while pairs < 1000 {
        let (k, n, spread) = (
            rng.gen_range(2..=6),
            rng.gen_range(2..40),
            rng.gen_range(0.3..5.0),
        );
        let rows = random_clusters(&mut rng, k, n, spread);
        let model = NbModel::fit(&training_set(&rows)).unwrap();
        let oracle = NbOracle::fit(&rows);
        for _ in 0..10 {
            let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-10.0..10.0));
            let (got, want) = (model.predict(&x.into()), oracle.predict(&x));
            ensure(got == want, || {
                format!("pair {pairs}: model {got}, oracle {want} at {x:?}")
            })?;
            pairs += 1;
        }
    }
    for t in 0..100 {
        let rows = random_clusters(&mut rng, 3, 25, 2.0);
        let a: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.01..100.0));
        let b: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-100.0..100.0));
        let map = |x: &[f64; 4]| -> [f64; 4] { std::array::from_fn(|f| a[f] * x[f] + b[f]) };
        let moved: Vec<_> = rows.iter().map(|r| (map(&r.0), r.1)).collect();
        let (m1, m2) = (
            NbModel::fit(&training_set(&rows)).unwrap(),
            NbModel::fit(&training_set(&moved)).unwrap(),
        );
        for _ in 0..20 {
            let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-6.0..6.0));
            ensure(m1.predict(&x.into()) == m2.predict(&map(&x).into()), || {
                format!("transform {t} changed argmax at {x:?}")
            })?;
        }
    }
    Ok("1000 oracle pairs agree, 100 affine transforms preserve argmax".into())
}

fn svm_optimizer() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for set in 0..50u64 {
        let (k, n, spread) = (
            rng.gen_range(2..=4),
            rng.gen_range(10..40),
            rng.gen_range(0.5..6.0),
        );
        let rows = random_clusters(&mut rng, k, n, spread);
        let kernel = if set % 2 == 0 {
            Kernel::Linear
        } else {
            Kernel::Rbf {
                gamma: rng.gen_range(0.05..2.0),
            }
        };
        let params = SvmParams {
            c: rng.gen_range(0.1..20.0),
            kernel,
            ..SvmParams::default()
        };
        let model = SvmModel::fit(&training_set(&rows), &params).unwrap();
        model
            .check_converged()
            .map_err(|e| format!("set {set}: {e}"))?;
        let bad = svm_kkt_violations(&model, &rows, params.tol);
        ensure(bad.is_empty(), || format!("set {set}: {}", bad.join("; ")))?;
    }

    let four = [
        ([2.0, 0.0, 0.0, 0.0], 1),
        ([3.0, 0.0, 0.0, 0.0], 1),
        ([-2.0, 0.0, 0.0, 0.0], 0),
        ([-3.0, 0.0, 0.0, 0.0], 0),
    ];
    let linear = SvmParams {
        c: 100.0,
        kernel: Kernel::Linear,
        ..SvmParams::default()
    };
    let model = SvmModel::fit(&training_set(&four), &linear).unwrap();
    let (w, b) = model.linear_weights(1).unwrap();
    ensure(
        (w[0] - 0.5).abs() <= 1e-3 && w[1].abs() <= 1e-3 && b.abs() <= 1e-3,
        || format!("w = {w:?}, b = {b}"),
    )?;

    let xor = [
        ([0.0, 0.0, 0.0, 0.0], 1),
        ([1.0, 1.0, 0.0, 0.0], 1),
        ([0.0, 1.0, 0.0, 0.0], 0),
        ([1.0, 0.0, 0.0, 0.0], 0),
    ];
    let rbf = SvmParams {
        c: 100.0,
        kernel: Kernel::Rbf { gamma: 1.0 },
        ..SvmParams::default()
    };
    let model = SvmModel::fit(&training_set(&xor), &rbf).unwrap();
    let right = xor
        .iter()
        .filter(|r| model.predict(&r.0.into()) == r.1)
        .count();
    ensure(right == 4, || format!("XOR training accuracy {right}/4"))?;
    Ok(format!(
        "50 sets feasible + KKT, w = ({:.6}, {:.6}), b = {:.1e}, XOR 4/4",
        w[0], w[1], b
    ))
}

fn mosaic_rows(per_class: u32, seed: u64) -> Vec<LabeledSample> {
    let m = balanced_mosaic(per_class, 50, seed).unwrap();
    let cfg = ExtractConfig {
        purity: 1.0,
        ..ExtractConfig::default()
    };
    let table = extract_table(&m.image, Some(&m.labels), &cfg, Execution::Parallel).unwrap();
    table
        .labeled_rows()
        .map(|(r, l)| LabeledSample::new(r.features, l))
        .collect()
}

fn synthetic_benchmark() -> Check {
    let samples = mosaic_rows(200, 2024);
    let data = TrainingSet::from_samples(samples).unwrap();
    let counts: Vec<usize> = data.class_counts().iter().map(|c| c.1).collect();
    ensure(counts == [200; 4], || format!("class counts {counts:?}"))?;
    let nb = cross_validate(
        &data,
        &ClassifierSpec::NaiveBayes,
        5,
        42,
        Execution::Parallel,
    )
    .unwrap();
    let svm = cross_validate(
        &data,
        &ClassifierSpec::Svm(SvmParams::default()),
        5,
        42,
        Execution::Parallel,
    )
    .unwrap();
    ensure(nb.accuracy >= 0.90 && svm.accuracy >= 0.90, || {
        format!("nb {} svm {}", nb.accuracy, svm.accuracy)
    })?;
    let order = if nb.accuracy > svm.accuracy {
        "nb ahead"
    } else if nb.accuracy < svm.accuracy {
        "svm ahead"
    } else {
        "tied"
    };
    Ok(format!(
        "800 windows, 5-fold accuracy nb {:.4}, svm {:.4} ({order})",
        nb.accuracy, svm.accuracy
    ))
}

fn runtime_tradeoff() -> Check {
    // 28 x 28 tiles of 100 pixels.
    let m = balanced_mosaic(196, 100, 7).unwrap();
    ensure(m.image.width() == 2800 && m.image.height() == 2800, || {
        "image size".into()
    })?;
    let img = m.image.quantize(8).unwrap();
    let report = benchmark_runtime(
        &img,
        &[50, 70],
        3,
        OffsetSpec::default(),
        Execution::Sequential,
    )
    .unwrap();
    let (r50, r70) = (&report.rows[0], &report.rows[1]);
    ensure(r50.windows == 3136 && r70.windows == 1600, || {
        format!("counts {} / {}", r50.windows, r70.windows)
    })?;
    ensure(r70.seconds < r50.seconds, || {
        format!(
            "median 70: {:.4}s not below median 50: {:.4}s",
            r70.seconds, r50.seconds
        )
    })?;
    Ok(format!(
        "3136 vs 1600 windows, medians {:.4}s (50) > {:.4}s (70)",
        r50.seconds, r70.seconds
    ))
}

fn persistence() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows = random_clusters(&mut rng, 4, 40, 3.0);
    let data = training_set(&rows);
    let meta = ModelMeta {
        levels: 8,
        window: 50,
        offset: OffsetSpec::default(),
    };
    let specs = [
        ClassifierSpec::NaiveBayes,
        ClassifierSpec::Svm(SvmParams::default()),
        ClassifierSpec::Svm(SvmParams {
            kernel: Kernel::Linear,
            ..SvmParams::default()
        }),
    ];
    for (i, spec) in specs.iter().enumerate() {
        let original = PersistedModel {
            meta,
            model: spec.fit(&data).unwrap(),
        };
        let path = dir.path().join(format!("model{i}"));
        original.save(&path).unwrap();
        let loaded = PersistedModel::load(&path).unwrap();
        ensure(loaded.meta == meta, || "metadata changed".into())?;
        for n in 0..1000 {
            let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-12.0..12.0));
            let (a, b) = (
                original.model.scores(&x.into()),
                loaded.model.scores(&x.into()),
            );
            ensure(
                a == b && original.model.predict(&x.into()) == loaded.model.predict(&x.into()),
                || format!("{} vector {n}: {a:?} vs {b:?}", spec.name()),
            )?;
        }
    }
    Ok("nb, svm rbf, svm linear: 1000 vectors each, identical scores".into())
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_texturemap"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_cli(
        d,
        &[
            "synth",
            "--image",
            "m.png",
            "--labels",
            "l.png",
            "--per-class",
            "25",
            "--seed",
            "9",
        ],
    )?;
    let one = run_cli(
        d,
        &[
            "extract",
            "m.png",
            "--labels",
            "l.png",
            "--window",
            "50,30",
            "--threads",
            "1",
        ],
    )?;
    let eight = run_cli(
        d,
        &[
            "extract",
            "m.png",
            "--labels",
            "l.png",
            "--window",
            "50,30",
            "--threads",
            "8",
        ],
    )?;
    ensure(one == eight, || {
        "feature tables differ between 1 and 8 threads".into()
    })?;
    std::fs::write(d.join("t.csv"), &one).unwrap();
    for classifier in ["nb", "svm"] {
        let args = [
            "evaluate",
            "t.csv",
            "--window",
            "50",
            "--classifier",
            classifier,
            "--seed",
            "42",
        ];
        let (a, b) = (run_cli(d, &args)?, run_cli(d, &args)?);
        ensure(a == b && !a.is_empty(), || {
            format!("{classifier} reports differ")
        })?;
    }
    Ok(format!(
        "{}-byte tables identical at 1 and 8 threads, nb/svm reports identical",
        one.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "GLCM oracle equivalence",
            glcm_oracle,
            Duration::from_secs(1),
        ),
        ("closed-form features", closed_form, Duration::MAX),
        (
            "normalization and bounds",
            normalization_bounds,
            Duration::from_secs(5),
        ),
        ("naive Bayes correctness", naive_bayes, Duration::MAX),
        ("SVM optimizer", svm_optimizer, Duration::from_secs(30)),
        (
            "synthetic four-texture benchmark",
            synthetic_benchmark,
            Duration::MAX,
        ),
        (
            "window-size runtime tradeoff",
            runtime_tradeoff,
            Duration::from_secs(180),
        ),
        ("persistence roundtrip", persistence, Duration::MAX),
        ("determinism", determinism, Duration::MAX),
    ];
    let mut failed = 0;
    for (n, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= budget {
                Ok(detail)
            } else {
                Err(format!(
                    "{detail}; took {:.2}s, budget {}s",
                    elapsed.as_secs_f64(),
                    budget.as_secs()
                ))
            }
        });
        match outcome {
            Ok(detail) => println!(
                "PASS {} {name}: {detail} [{:.2}s]",
                n + 1,
                elapsed.as_secs_f64()
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "FAIL {} {name}: {why} [{:.2}s]",
                    n + 1,
                    elapsed.as_secs_f64()
                );
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
