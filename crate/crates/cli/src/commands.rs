use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use texturemap::classifiers::{LabeledSample, Model, ModelMeta, PersistedModel, TrainingSet};
use texturemap::evaluation::{benchmark_runtime, cross_validate, misclassification_map};
use texturemap::fmt::sig;
use texturemap::glcm::FeatureTable;
use texturemap::imaging::{load_image, load_label_raster, save_png_gray, save_png_rgb, write_pgm};
use texturemap::pipeline::{classify_windows, extract_table};
use texturemap::synth::{balanced_mosaic, Texture};
use texturemap::{ClassId, ClassMap, Error, Execution, GrayImage, OffsetSpec, UNLABELED};

use crate::config::RunConfig;
use crate::Command;

/// A failed run: usage and input problems exit with 2, computation with 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Compute(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Compute(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Compute(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EmptyGlcm
            | Error::EmptyClass(_)
            | Error::TooFewClasses(_)
            | Error::ClassTooSmall { .. }
            | Error::NotConverged { .. } => Failure::Compute(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| usage(format!("cannot write output: {e}")))
        }
    }
}

fn load_gray(path: &Path) -> Result<GrayImage, Failure> {
    Ok(load_image(path)?.into_gray())
}

fn save_gray(path: &Path, img: &GrayImage) -> Outcome {
    let is_pgm = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if is_pgm {
        write_pgm(path, img)?;
    } else {
        save_png_gray(path, img)?;
    }
    Ok(())
}

pub fn run(command: Command, cfg: &RunConfig, out: Option<&Path>) -> Outcome {
    match command {
        Command::Extract { image, labels } => extract(&image, labels.as_deref(), cfg, out),
        Command::Train { tables, classes } => train(&tables, classes.as_deref(), cfg, out),
        Command::Predict {
            model,
            image,
            labels,
            overlay,
        } => predict(
            &model,
            &image,
            labels.as_deref(),
            overlay.as_deref(),
            cfg,
            out,
        ),
        Command::Evaluate { tables, classes } => evaluate(&tables, classes.as_deref(), cfg, out),
        Command::Bench { image } => bench(&image, cfg, out),
        Command::Synth {
            image,
            labels,
            classes,
            per_class,
            tile,
        } => synth(&image, &labels, classes.as_deref(), per_class, tile, cfg),
    }
}

fn extract(image: &Path, labels: Option<&Path>, cfg: &RunConfig, out: Option<&Path>) -> Outcome {
    let gray = load_gray(image)?;
    let raster = labels.map(load_label_raster).transpose()?;
    let table = extract_table(
        &gray,
        raster.as_ref(),
        &cfg.extract_config(),
        Execution::Parallel,
    )?;
    emit(out, &table.to_text())
}

/// Labelled rows of all tables, restricted to `--window` sizes when given.
fn load_samples(
    tables: &[std::path::PathBuf],
    cfg: &RunConfig,
) -> Result<(Vec<LabeledSample>, BTreeSet<u32>), Failure> {
    let mut samples = Vec::new();
    let mut sizes = BTreeSet::new();
    for path in tables {
        let table = FeatureTable::load(path)?;
        if !table.labeled {
            return Err(usage(format!("{} has no label column", path.display())));
        }
        for (row, label) in table.labeled_rows() {
            if cfg.is_explicit("window") && !cfg.windows.contains(&row.window.size) {
                continue;
            }
            sizes.insert(row.window.size);
            samples.push(LabeledSample::new(row.features, label));
        }
    }
    if samples.is_empty() {
        return Err(usage("no labelled windows in the given tables"));
    }
    Ok((samples, sizes))
}

/// Class map for the samples: from `--classes` when given, restricted to the
/// classes actually present; otherwise generated names.
fn class_map(samples: &[LabeledSample], classes: Option<&Path>) -> Result<ClassMap, Failure> {
    let present: BTreeSet<ClassId> = samples.iter().map(|s| s.label).collect();
    let Some(path) = classes else {
        return Ok(ClassMap::from_ids(present)?);
    };
    let full = ClassMap::load(path)?;
    if let Some(id) = present.iter().find(|id| full.index_of(**id).is_none()) {
        return Err(usage(format!(
            "label {id} is not listed in {}",
            path.display()
        )));
    }
    for (id, name) in full.entries() {
        if !present.contains(id) {
            eprintln!("warning: class {id} ({name}) has no labelled windows; leaving it out");
        }
    }
    Ok(full.restrict(&present.into_iter().collect::<Vec<_>>()))
}

fn offset_text(o: &OffsetSpec) -> String {
    format!(
        "distance {} direction {}{}{}",
        o.distance,
        o.direction.degrees(),
        if o.symmetric { " symmetric" } else { "" },
        if o.average_directions {
            " averaged"
        } else {
            ""
        }
    )
}

fn train(
    tables: &[std::path::PathBuf],
    classes: Option<&Path>,
    cfg: &RunConfig,
    out: Option<&Path>,
) -> Outcome {
    let out = out.ok_or_else(|| usage("train needs --out for the model file"))?;
    let (samples, sizes) = load_samples(tables, cfg)?;
    if sizes.len() > 1 {
        let list: Vec<String> = sizes.iter().map(u32::to_string).collect();
        return Err(usage(format!(
            "tables mix window sizes {}; choose one with --window",
            list.join(",")
        )));
    }
    let window = *sizes.iter().next().expect("non-empty samples");
    let map = class_map(&samples, classes)?;
    let data = TrainingSet::new(samples, map).map_err(|e| match e {
        Error::UnknownClass(_) => Failure::Usage(e.to_string()),
        other => Failure::from(other),
    })?;
    let spec = cfg.classifier_spec();
    let model = spec.fit(&data)?;

    let meta = ModelMeta {
        levels: cfg.levels,
        window,
        offset: cfg.offset(),
    };
    PersistedModel {
        meta,
        model: model.clone(),
    }
    .save(out)?;

    let mut summary = format!(
        "trained {} on {} windows of size {}, levels {}, {}\n",
        spec.name(),
        data.len(),
        window,
        cfg.levels,
        offset_text(&meta.offset)
    );
    let counts = data.class_counts();
    for (i, (id, n)) in counts.iter().enumerate() {
        let name = data.classes().name(*id).unwrap_or("");
        let _ = write!(summary, "  class {id} {name}: {n} windows");
        if let Model::Svm(svm) = &model {
            let _ = write!(
                summary,
                ", {} support vectors",
                svm.problems()[i].n_support()
            );
        }
        summary.push('\n');
    }
    if let Model::Svm(svm) = &model {
        for p in svm.problems().iter().filter(|p| !p.converged()) {
            eprintln!(
                "warning: class {} problem stopped after {} sweeps without meeting tolerance {}",
                p.class(),
                p.sweeps(),
                cfg.tol
            );
        }
    }
    let _ = writeln!(summary, "model written to {}", out.display());
    emit(None, &summary)
}

/// Config values given explicitly must agree with the model's training
/// setup; anything left unset is taken from the model.
fn check_meta(meta: &ModelMeta, cfg: &RunConfig) -> Result<(), Failure> {
    let mut mismatches = Vec::new();
    let mut check = |key: &str, ours: String, theirs: String| {
        if cfg.is_explicit(key) && ours != theirs {
            mismatches.push(format!("{key} {ours} (model: {theirs})"));
        }
    };
    let windows: Vec<String> = cfg.windows.iter().map(u32::to_string).collect();
    check("window", windows.join(","), meta.window.to_string());
    check("levels", cfg.levels.to_string(), meta.levels.to_string());
    check(
        "distance",
        cfg.distance.to_string(),
        meta.offset.distance.to_string(),
    );
    check(
        "direction",
        cfg.direction.degrees().to_string(),
        meta.offset.direction.degrees().to_string(),
    );
    check(
        "symmetric",
        cfg.symmetric.to_string(),
        meta.offset.symmetric.to_string(),
    );
    check(
        "avg_directions",
        cfg.avg_directions.to_string(),
        meta.offset.average_directions.to_string(),
    );
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(usage(format!(
            "config does not match the model: {}",
            mismatches.join(", ")
        )))
    }
}

fn predict(
    model_path: &Path,
    image: &Path,
    labels: Option<&Path>,
    overlay: Option<&Path>,
    cfg: &RunConfig,
    out: Option<&Path>,
) -> Outcome {
    if overlay.is_some() && labels.is_none() {
        return Err(usage("--overlay needs --labels"));
    }
    let persisted = PersistedModel::load(model_path)?;
    check_meta(&persisted.meta, cfg)?;
    let meta = persisted.meta;
    let gray = load_gray(image)?;
    let raster = labels.map(load_label_raster).transpose()?;
    if let Some(r) = &raster {
        r.check_matches(gray.width(), gray.height())?;
    }

    let img = gray.quantize(meta.levels)?;
    let (windows, preds) = classify_windows(
        &persisted.model,
        &img,
        meta.window,
        meta.offset,
        Execution::Parallel,
    )?;
    let mut text = String::from("origin_x,origin_y,size,class_id\n");
    for (w, p) in windows.iter().zip(&preds) {
        let _ = writeln!(text, "{},{},{},{}", w.x, w.y, w.size, p);
    }
    emit(out, &text)?;

    if let Some(raster) = raster {
        let truths: Vec<Option<ClassId>> = windows
            .iter()
            .map(|w| raster.window_label(*w, cfg.purity))
            .collect();
        let scored: Vec<(ClassId, ClassId)> = truths
            .iter()
            .zip(&preds)
            .filter_map(|(t, p)| t.filter(|&t| t != UNLABELED).map(|t| (t, *p)))
            .collect();
        let correct = scored.iter().filter(|(t, p)| t == p).count();
        let accuracy = if scored.is_empty() {
            0.0
        } else {
            correct as f64 / scored.len() as f64
        };
        eprintln!(
            "{} of {} labelled windows correct (accuracy {})",
            correct,
            scored.len(),
            sig(accuracy, 4)
        );
        if let Some(path) = overlay {
            let map = misclassification_map(&gray, &windows, &truths, &preds)?;
            save_png_rgb(path, &map)?;
        }
    }
    Ok(())
}

fn evaluate(
    tables: &[std::path::PathBuf],
    classes: Option<&Path>,
    cfg: &RunConfig,
    out: Option<&Path>,
) -> Outcome {
    let (samples, sizes) = load_samples(tables, cfg)?;
    let map = class_map(&samples, classes)?;
    let data = TrainingSet::new(samples, map)?;
    let spec = cfg.classifier_spec();
    let result = cross_validate(&data, &spec, cfg.folds, cfg.seed, Execution::Parallel)?;

    let sizes: Vec<String> = sizes.iter().map(u32::to_string).collect();
    let mut report = format!(
        "classifier {}\nwindows {} (size {})\nfolds {} seed {}\n",
        spec.name(),
        data.len(),
        sizes.join(","),
        cfg.folds,
        cfg.seed
    );
    report.push_str(&result.confusion.to_text());
    let folds: Vec<String> = result.fold_accuracy.iter().map(|a| sig(*a, 6)).collect();
    let _ = writeln!(report, "fold accuracy {}", folds.join(" "));
    if result.unconverged > 0 {
        let _ = writeln!(report, "unconverged svm problems {}", result.unconverged);
    }
    emit(None, &report)?;
    if let Some(path) = out {
        let csv = result.confusion.to_csv();
        std::fs::write(path, csv)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn bench(image: &Path, cfg: &RunConfig, out: Option<&Path>) -> Outcome {
    let gray = load_gray(image)?;
    let img = gray.quantize(cfg.levels)?;
    let sizes = if cfg.is_explicit("window") {
        cfg.windows.clone()
    } else {
        vec![50, 70]
    };
    let report = benchmark_runtime(&img, &sizes, cfg.repeats, cfg.offset(), Execution::Parallel)?;
    emit(out, &report.to_text())
}

fn synth(
    image: &Path,
    labels: &Path,
    classes: Option<&Path>,
    per_class: u32,
    tile: u32,
    cfg: &RunConfig,
) -> Outcome {
    if per_class == 0 || tile < 2 {
        return Err(usage("--per-class must be positive and --tile at least 2"));
    }
    let mosaic = balanced_mosaic(per_class, tile, cfg.seed)?;
    save_gray(image, &mosaic.image)?;
    let raster = GrayImage::new(
        mosaic.labels.width(),
        mosaic.labels.height(),
        mosaic.labels.pixels().to_vec(),
    )?;
    save_gray(labels, &raster)?;
    if let Some(path) = classes {
        let text: String = Texture::ALL
            .iter()
            .enumerate()
            .map(|(i, t)| format!("{i},{}\n", t.name()))
            .collect();
        std::fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}
