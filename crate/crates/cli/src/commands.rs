//! Subcommand implementations.

use anyhow::{anyhow, bail, Context, Result};
use ndarray::Array2;
use song::eval::{adjusted_mutual_information, consecutive_displacement, kmeans, make_blobs, pca_reduce, BlobSpec};
use song::io::csv::write_csv_to;
use song::io::{load_csv, load_model, save_model};
use song::{fit as train, partial_fit, DataMatrix, HyperParams, SongModel, TrainReport};

use crate::input::{load, load_args};
use crate::output::{write_atomic, Report};
use crate::svg::{scatter, Style};
use crate::{BlobsArgs, EvalArgs, FitArgs, GrowArgs, PlotArgs, ReportArgs};

/// Applies one `name=value` override.
pub fn set_hyper(h: &mut HyperParams, assignment: &str) -> Result<()> {
    let (name, value) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("hyperparameter override {assignment:?} is not NAME=VALUE"))?;
    let (name, value) = (name.trim(), value.trim());
    let bad = |e: &dyn std::fmt::Display| anyhow!("invalid value {value:?} for {name}: {e}");
    macro_rules! parse {
        () => {
            value.parse().map_err(|e| bad(&e))?
        };
    }
    match name {
        "k" => h.k = parse!(),
        "t_max" => h.t_max = parse!(),
        "alpha_0" => h.alpha_0 = parse!(),
        "a" => h.a = parse!(),
        "b" => h.b = parse!(),
        "epsilon_decay" => h.epsilon_decay = parse!(),
        "e_min" => h.e_min = parse!(),
        "theta_g" => h.theta_g = if value == "auto" { None } else { Some(parse!()) },
        "theta_g_factor" => h.theta_g_factor = parse!(),
        "neg_rate" => h.neg_rate = parse!(),
        "dist_floor" => h.dist_floor = parse!(),
        "max_step" => h.max_step = parse!(),
        "max_coding_vectors" => h.max_coding_vectors = parse!(),
        "coding_vector_ratio" => h.coding_vector_ratio = parse!(),
        "centroid_with_input" => h.centroid_with_input = parse!(),
        "replay_reference" => h.replay_reference = parse!(),
        "seed" => h.seed = parse!(),
        _ => bail!("unknown hyperparameter {name:?}"),
    }
    Ok(())
}

fn add_training(report: &mut Report, r: &TrainReport) {
    report.set("epochs_run", r.epochs_run);
    report.set("terminated_early", r.terminated_early);
    report.set("growth_events", r.growth_events);
    report.set("growth_skipped", r.growth_skipped);
    report.set("coding_vectors", r.coding_vectors);
    report.set("final_qe", r.final_qe);
    report.set("final_alpha", r.final_alpha);
    report.set("edge_changes_per_epoch", r.edge_changes_per_epoch.clone());
    report.set("growth_per_epoch", r.growth_per_epoch.clone());
    report.set("qe_per_epoch", r.qe_per_epoch.clone());
}

fn csv_bytes(rows: &Array2<f64>, labels: Option<&[i64]>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv_to(&mut buf, rows, labels)?;
    Ok(buf)
}

fn finish_training(model: &SongModel, data: &DataMatrix, outputs: &ReportArgs, report: &Report) -> Result<()> {
    if let Some(path) = &outputs.embedding_out {
        let y = model.transform(data)?;
        write_atomic(path, &csv_bytes(&y, data.labels())?)?;
    }
    report.emit(outputs.report.as_deref())
}

pub fn fit(args: FitArgs) -> Result<()> {
    let raw = load_args(&args.data)?;
    let mut hyper = HyperParams::default().with_seed(args.seed);
    for assignment in &args.hyper {
        set_hyper(&mut hyper, assignment)?;
    }
    let (data, projection) = match args.pca {
        Some(n) => {
            let (reduced, p) = pca_reduce(&raw, n).context("PCA")?;
            (reduced, Some(p))
        }
        None => (raw, None),
    };
    let mut model = SongModel::init_for(&data, args.dims, hyper)?;
    let r = train(&mut model, &data)?;
    model.set_projection(projection)?;
    save_model(&model, &args.model_out).with_context(|| format!("saving {}", args.model_out.display()))?;

    let mut report = Report::new("fit");
    report.set("model", args.model_out.display().to_string());
    report.set("points", data.len());
    report.set("input_dim", model.input_dim());
    report.set("output_dim", model.output_dim());
    add_training(&mut report, &r);
    finish_training(&model, &data, &args.report, &report)
}

pub fn grow(args: GrowArgs) -> Result<()> {
    let mut model = load_model(&args.model).with_context(|| format!("loading {}", args.model.display()))?;
    let raw = load_args(&args.data)?;
    let data = if raw.is_empty() {
        DataMatrix::unlabeled(Array2::zeros((0, model.input_dim())))?
    } else {
        model.prepare_input(&raw)?
    };
    let reference = model.reference().cloned();
    let before = reference.as_ref().map(|r| model.transform(&DataMatrix::unlabeled(r.clone())?)).transpose()?;
    let r = partial_fit(&mut model, &data)?;
    save_model(&model, &args.model_out).with_context(|| format!("saving {}", args.model_out.display()))?;

    let mut report = Report::new("grow");
    report.set("model", args.model_out.display().to_string());
    report.set("points", data.len());
    add_training(&mut report, &r);
    if let (Some(reference), Some(before)) = (reference, before) {
        let after = model.transform(&DataMatrix::unlabeled(reference)?)?;
        let cdy = consecutive_displacement(&before, &after)?;
        report.set("cdy_points", cdy.per_point.len());
        report.set("cdy_mean", cdy.mean);
        report.set("cdy_std", cdy.std);
    }
    finish_training(&model, &data, &args.report, &report)
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let model = load_model(&args.model).with_context(|| format!("loading {}", args.model.display()))?;
    let raw = load_args(&args.data)?;
    if raw.labels().is_none() {
        bail!("evaluation needs labels (--label-column or --labels)");
    }
    let data = model.prepare_input(&raw)?;
    let labels = data.labels().expect("labels checked above");
    let clusters = match args.clusters {
        Some(k) => k,
        None => {
            let mut distinct = labels.to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            distinct.len()
        }
    };
    if args.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    let y = model.transform(&data)?;
    let samples = (0..args.repeats as u64)
        .map(|r| {
            let found: Vec<i64> = kmeans(&y, clusters, args.seed.wrapping_add(r))?
                .into_iter()
                .map(|l| l as i64)
                .collect();
            Ok(adjusted_mutual_information(labels, &found)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let std = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / samples.len() as f64).sqrt();

    let mut report = Report::new("eval");
    report.set("points", data.len());
    report.set("clusters", clusters);
    report.set("repeats", args.repeats);
    report.set("ami_mean", mean);
    report.set("ami_std", std);
    report.set("ami_samples", samples);
    report.emit(args.report.as_deref())
}

pub fn plot(args: PlotArgs) -> Result<()> {
    let (points, labels) = match (&args.embedding, &args.model, &args.data) {
        (Some(path), _, _) => {
            let e = load_csv(path, args.header, args.embedding_label_column)
                .with_context(|| format!("reading {}", path.display()))?;
            e.into_parts()
        }
        (None, Some(model), Some(data)) => {
            let model = load_model(model).with_context(|| format!("loading {}", model.display()))?;
            let data = model.prepare_input(&load(data, args.header, args.label_column, args.labels.as_deref())?)?;
            let y = model.transform(&data)?;
            (y, data.labels().map(<[i64]>::to_vec))
        }
        _ => bail!("plot needs --embedding, or --model with --data"),
    };
    let style = Style {
        color_by_label: !args.no_color,
        point_size: args.point_size,
    };
    let svg = scatter(&points, labels.as_deref(), style)?;
    write_atomic(&args.svg_out, svg.as_bytes())?;

    let mut report = Report::new("plot");
    report.set("svg", args.svg_out.display().to_string());
    report.set("points", points.nrows());
    report.emit(None)
}

pub fn blobs(args: BlobsArgs) -> Result<()> {
    let spec = BlobSpec {
        n_clusters: args.clusters,
        cluster_std: args.std,
        dims: args.dims,
        points_per_cluster: args.per_cluster,
        seed: args.seed,
        center_box: (args.center_min, args.center_max),
    };
    let data = make_blobs(&spec)?;
    write_atomic(&args.csv_out, &csv_bytes(data.rows(), data.labels())?)?;

    let mut report = Report::new("blobs");
    report.set("csv", args.csv_out.display().to_string());
    report.set("points", data.len());
    report.set("dims", data.dim());
    report.set("label_column", data.dim());
    report.emit(None)
}
