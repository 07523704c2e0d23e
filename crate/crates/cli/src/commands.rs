//! Command implementations.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use csmds::baselines::{classical_mds, run_smacof, smacof};
use csmds::data::{
    euclidean_target, generate_swissroll, geodesic_distances_with, knn_graph, read_idx_images,
    read_idx_labels, subsample, LabeledDataset, ShortestPaths,
};
use csmds::eval::{evaluate_knn, train_test_split};
use csmds::rng::derive_stream;
use csmds::{
    config_for_variant, io, stress1, ConfigOverrides, CoordinateSearch, Embedding, RunConfig,
    TargetMatrix, TraceRecord, Variant,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::manifest::{sidecar, Manifest};
use crate::{
    Algorithm, DistancesArgs, EmbedArgs, GridArgs, Invocation, KnnEvalArgs, Method, Metric,
    MnistArgs, SwissrollArgs,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    NotConverged(String),
    Core(csmds::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::NotConverged(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "I/O: {e}"),
        }
    }
}

impl From<csmds::Error> for CliError {
    fn from(e: csmds::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(invocation: Invocation) -> Result<()> {
    match &invocation {
        Invocation::GenerateSwissroll(a) => generate_swissroll_cmd(a, &invocation),
        Invocation::GenerateMnist(a) => generate_mnist(a, &invocation),
        Invocation::Distances(a) => distances(a, &invocation),
        Invocation::Embed(a) => embed(a, &invocation),
        Invocation::KnnEval(a) => knn_eval(a, &invocation),
        Invocation::Grid(a) => grid(a, &invocation),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("arguments serialize")
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(v).expect("json") + "\n")?;
    Ok(())
}

fn generate_swissroll_cmd(a: &SwissrollArgs, inv: &Invocation) -> Result<()> {
    let cloud = generate_swissroll(a.n, a.noise, a.seed)?;
    io::write_point_cloud(&a.out, &cloud)?;
    let mut m = Manifest::new(inv.clone(), to_json(a), a.seed);
    m.outputs.push(a.out.clone());
    m.write(&sidecar(&a.out))
}

fn generate_mnist(a: &MnistArgs, inv: &Invocation) -> Result<()> {
    let images = read_idx_images(&a.images)?;
    let labels = read_idx_labels(&a.labels)?;
    if labels.len() != images.pixels.nrows() {
        return Err(CliError::Data(format!(
            "{} images but {} labels",
            images.pixels.nrows(),
            labels.len()
        )));
    }
    let ds = LabeledDataset::new(images.pixels, labels.into_iter().map(u32::from).collect())?;
    let sub = subsample(&ds, &a.classes, a.count, a.seed)?;
    io::write_matrix(&a.out, "x", sub.vectors.view())?;
    io::write_labels(&a.labels_out, &sub.labels)?;
    let mut m = Manifest::new(inv.clone(), to_json(a), a.seed);
    m.inputs = vec![a.images.clone(), a.labels.clone()];
    m.outputs = vec![a.out.clone(), a.labels_out.clone()];
    m.write(&sidecar(&a.out))
}

fn distances(a: &DistancesArgs, inv: &Invocation) -> Result<()> {
    let cloud = io::read_point_cloud(&a.input)?;
    let target = match a.metric {
        Metric::Euclidean => euclidean_target(cloud.view())?,
        Metric::Geodesic => {
            let k = a.knn.ok_or_else(|| CliError::Usage("--metric geodesic needs --knn".into()))?;
            let graph = knn_graph(cloud.view(), k)?;
            let algo = match a.algorithm {
                Algorithm::Dijkstra => ShortestPaths::Dijkstra,
                Algorithm::BellmanFord => ShortestPaths::BellmanFord,
            };
            geodesic_distances_with(&graph, algo).map_err(|e| match e {
                csmds::Error::Disconnected { components } => CliError::Data(format!(
                    "k-NN graph with k={k} has {components} connected components; \
                     geodesic distances need a connected graph, try a larger --knn"
                )),
                other => other.into(),
            })?
        }
    };
    io::write_target(&a.out, &target)?;
    let mut m = Manifest::new(inv.clone(), to_json(a), 0);
    m.inputs.push(a.input.clone());
    m.outputs.push(a.out.clone());
    m.write(&sidecar(&a.out))
}

fn variant_of(method: Method) -> Option<Variant> {
    match method {
        Method::Fs => Some(Variant::FullSearch),
        Method::Rn => Some(Variant::Randomized),
        Method::Bs => Some(Variant::Bootstrapped),
        Method::Smacof | Method::Classical => None,
    }
}

fn run_config_json(c: &RunConfig) -> Value {
    json!({
        "variant": c.variant.short_name(),
        "dims": c.dims,
        "r0": c.r0,
        "epsilon": c.epsilon,
        "delta": c.delta,
        "p_init": c.p_init,
        "p_a": c.p_a,
        "p_th": c.p_th,
        "max_epochs": c.max_epochs,
        "seed": c.seed,
        "stream": c.stream,
    })
}

fn reject_flags(method: &str, flags: &[(&str, bool)]) -> Result<()> {
    let given: Vec<&str> = flags.iter().filter(|f| f.1).map(|f| f.0).collect();
    if given.is_empty() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{} not applicable to --method {method}", given.join(", "))))
    }
}

/// Everything `embed` writes besides the manifest.
struct EmbedResult {
    embedding: Embedding,
    trace: Vec<TraceRecord>,
    resolved: Value,
    summary: Value,
    converged: bool,
}

fn embed(a: &EmbedArgs, inv: &Invocation) -> Result<()> {
    let target = io::read_target(&a.target)?;
    let clock = Instant::now();
    let mut r = match variant_of(a.method) {
        Some(variant) => embed_csmds(a, variant, &target)?,
        None if a.method == Method::Smacof => embed_smacof(a, &target)?,
        None => embed_classical(a, &target)?,
    };
    let embed_time_ms = clock.elapsed().as_secs_f64() * 1e3;

    std::fs::create_dir_all(&a.out_dir)?;
    let emb_path = a.out_dir.join("embedding.csv");
    let trace_path = a.out_dir.join("trace.csv");
    let summary_path = a.out_dir.join("summary.json");
    io::write_matrix(&emb_path, "x", r.embedding.coords())?;
    io::write_trace_file(&trace_path, &r.trace)?;
    let s1 = stress1(&target, r.embedding.distances()).ok();
    let summary = r.summary.as_object_mut().expect("summary is an object");
    summary.insert("method".into(), to_json(&a.method));
    summary.insert("dims".into(), json!(a.dims));
    summary.insert("n".into(), json!(target.n()));
    summary.insert("stress1".into(), json!(s1));
    summary.insert("converged".into(), json!(r.converged));
    summary.insert("embed_time_ms".into(), json!(embed_time_ms));
    write_json(&summary_path, &r.summary)?;

    let mut m = Manifest::new(inv.clone(), r.resolved, a.seed);
    m.inputs.push(a.target.clone());
    m.outputs = vec![emb_path, trace_path, summary_path];
    m.write(&a.out_dir.join("manifest.json"))?;
    if r.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "{} did not converge within its iteration cap; outputs written to {}",
            to_json(&a.method).as_str().expect("method name"),
            a.out_dir.display()
        )))
    }
}

fn embed_csmds(a: &EmbedArgs, variant: Variant, target: &TargetMatrix) -> Result<EmbedResult> {
    reject_flags(variant.short_name(), &[("--tol", a.tol.is_some()), ("--max-iter", a.max_iter.is_some())])?;
    let overrides = ConfigOverrides {
        r0: a.r0,
        epsilon: a.eps,
        delta: a.delta,
        p_init: a.p_init,
        p_a: a.p_a,
        p_th: a.p_th,
        max_epochs: a.max_epochs,
        seed: Some(a.seed),
        stream: None,
    };
    let config = config_for_variant(variant, a.dims, &overrides)?;
    let resolved = run_config_json(&config);
    let run = CoordinateSearch::new(target, config)?.run()?;
    Ok(EmbedResult {
        summary: json!({
            "initial_stress": run.initial_stress,
            "stress": run.stress,
            "epochs": run.trace.len(),
            "evals": run.evals,
            "halvings": run.halvings,
        }),
        converged: run.converged,
        embedding: run.embedding,
        trace: run.trace,
        resolved,
    })
}

fn csmds_only_flags(a: &EmbedArgs) -> [(&'static str, bool); 7] {
    [
        ("--r0", a.r0.is_some()),
        ("--eps", a.eps.is_some()),
        ("--delta", a.delta.is_some()),
        ("--p-init", a.p_init.is_some()),
        ("--p-a", a.p_a.is_some()),
        ("--p-th", a.p_th.is_some()),
        ("--max-epochs", a.max_epochs.is_some()),
    ]
}

fn embed_smacof(a: &EmbedArgs, target: &TargetMatrix) -> Result<EmbedResult> {
    reject_flags("smacof", &csmds_only_flags(a))?;
    let tol = a.tol.unwrap_or(smacof::DEFAULT_TOL);
    let max_iter = a.max_iter.unwrap_or(smacof::DEFAULT_MAX_ITER);
    let run = run_smacof(target, a.dims, tol, max_iter, a.seed)?;
    Ok(EmbedResult {
        summary: json!({ "stress": run.stress, "iterations": run.iterations }),
        resolved: json!({ "method": "smacof", "dims": a.dims, "tol": tol, "max_iter": max_iter, "seed": a.seed }),
        converged: run.converged,
        embedding: run.embedding,
        trace: run.trace,
    })
}

fn embed_classical(a: &EmbedArgs, target: &TargetMatrix) -> Result<EmbedResult> {
    let mut flags = csmds_only_flags(a).to_vec();
    flags.extend([("--tol", a.tol.is_some()), ("--max-iter", a.max_iter.is_some())]);
    reject_flags("classical", &flags)?;
    let cmds = classical_mds(target, a.dims)?;
    let stress = csmds::raw_stress(target, cmds.embedding.distances())?;
    Ok(EmbedResult {
        trace: vec![TraceRecord { epoch: 1, stress, radius: 0.0, evals: 0, elapsed_ms: 0.0 }],
        summary: json!({
            "stress": stress,
            "eigenvalues": &cmds.eigenvalues[..a.dims],
            "clamped_negative_eigenvalues": cmds.clamped,
        }),
        resolved: json!({ "method": "classical", "dims": a.dims }),
        converged: true,
        embedding: cmds.embedding,
    })
}

/// Method name and embedding time from a `summary.json` next to `path`.
fn sibling_summary(path: &Path) -> Option<(String, f64)> {
    let dir = path.parent()?;
    let text = std::fs::read_to_string(dir.join("summary.json")).ok()?;
    let v: Value = serde_json::from_str(&text).ok()?;
    Some((v["method"].as_str()?.to_string(), v["embed_time_ms"].as_f64().unwrap_or(0.0)))
}

fn knn_eval(a: &KnnEvalArgs, inv: &Invocation) -> Result<()> {
    let x = io::read_matrix(&a.embedding)?;
    let labels = io::read_labels(&a.labels)?;
    if x.nrows() != labels.len() {
        return Err(CliError::Data(format!(
            "{} has {} rows but {} has {} labels",
            a.embedding.display(),
            x.nrows(),
            a.labels.display(),
            labels.len()
        )));
    }
    let split = train_test_split(x.nrows(), a.train_frac, a.seed)?;
    let scores = evaluate_knn(x.view(), &labels, &split, &a.k)?;
    let summary = sibling_summary(&a.embedding);
    let method = a
        .method
        .clone()
        .or_else(|| summary.as_ref().map(|s| s.0.clone()))
        .unwrap_or_else(|| "initial".into());
    let embed_time_ms = summary.map_or(0.0, |s| s.1);

    let mut out = csv::Writer::from_path(&a.out).map_err(csv_err)?;
    out.write_record(["method", "dims", "K", "accuracy", "embed_time_ms"]).map_err(csv_err)?;
    for (k, acc) in &scores {
        out.write_record([
            method.clone(),
            x.ncols().to_string(),
            k.to_string(),
            acc.to_string(),
            embed_time_ms.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;

    let mut resolved = to_json(a);
    resolved["method"] = json!(method);
    let mut m = Manifest::new(inv.clone(), resolved, a.seed);
    m.inputs = vec![a.embedding.clone(), a.labels.clone()];
    m.outputs.push(a.out.clone());
    m.write(&sidecar(&a.out))
}

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::Io(io),
        other => CliError::Data(format!("{other:?}")),
    }
}

/// One grid job: its label, grid coordinates and configuration.
struct Cell {
    name: String,
    p_th: Option<f64>,
    config: RunConfig,
}

/// Worker count from `CSMDS_WORKERS`, defaulting to the available cores.
fn worker_count() -> Result<usize> {
    match std::env::var("CSMDS_WORKERS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!("CSMDS_WORKERS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, usize::from)),
    }
}

fn grid_cells(a: &GridArgs) -> Result<(Vec<Cell>, Vec<String>)> {
    let base = |variant: Variant, p_init: Option<f64>, p_a: Option<f64>, p_th: Option<f64>, coords: &[u64]| {
        config_for_variant(
            variant,
            a.dims,
            &ConfigOverrides {
                r0: a.r0,
                epsilon: a.eps,
                delta: a.delta,
                p_init,
                p_a,
                p_th,
                max_epochs: a.max_epochs,
                seed: Some(a.seed),
                stream: Some(derive_stream(a.seed, coords)),
            },
        )
    };
    let mut cells = vec![Cell {
        name: "fs".into(),
        p_th: None,
        config: base(Variant::FullSearch, None, None, None, &[0])?,
    }];
    let mut skipped = Vec::new();
    for (i, &p) in a.p_init_grid.iter().enumerate() {
        cells.push(Cell {
            name: format!("rn_p{p}"),
            p_th: None,
            config: base(Variant::Randomized, Some(p), None, None, &[1, i as u64])?,
        });
        for (j, &th) in a.p_th_grid.iter().enumerate() {
            let name = format!("bs_p{p}_th{th}");
            if th >= p {
                skipped.push(name);
                continue;
            }
            cells.push(Cell {
                name,
                p_th: Some(th),
                config: base(Variant::Bootstrapped, Some(p), Some(a.p_a), Some(th), &[2, i as u64, j as u64])?,
            });
        }
    }
    Ok((cells, skipped))
}

fn grid(a: &GridArgs, inv: &Invocation) -> Result<()> {
    let target = io::read_target(&a.target)?;
    let (cells, skipped) = grid_cells(a)?;
    for name in &skipped {
        eprintln!("warning: skipping {name}: bootstrapped search needs p_th < p_init");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let runs = pool.install(|| {
        cells
            .par_iter()
            .map(|c| CoordinateSearch::new(&target, c.config.clone())?.run())
            .collect::<csmds::Result<Vec<_>>>()
    })?;

    let trace_dir = a.out_dir.join("traces");
    std::fs::create_dir_all(&trace_dir)?;
    let combined_path = a.out_dir.join("grid.csv");
    let mut combined = csv::Writer::from_path(&combined_path).map_err(csv_err)?;
    combined
        .write_record(["cell", "variant", "p_init", "p_th", "epoch", "stress", "radius", "evals"])
        .map_err(csv_err)?;
    let mut outputs = vec![combined_path.clone()];
    let mut not_converged = Vec::new();
    for (cell, run) in cells.iter().zip(&runs) {
        let path = trace_dir.join(format!("{}.csv", cell.name));
        io::write_trace_file(&path, &run.trace)?;
        outputs.push(path);
        if !run.converged {
            not_converged.push(cell.name.clone());
        }
        let p_th = cell.p_th.map_or(String::new(), |v| v.to_string());
        for r in &run.trace {
            combined
                .write_record([
                    cell.name.clone(),
                    cell.config.variant.short_name().to_string(),
                    cell.config.p_init.to_string(),
                    p_th.clone(),
                    r.epoch.to_string(),
                    r.stress.to_string(),
                    r.radius.to_string(),
                    r.evals.to_string(),
                ])
                .map_err(csv_err)?;
        }
    }
    combined.flush()?;

    let resolved = json!({
        "cells": cells.iter().map(|c| json!({ "name": c.name, "config": run_config_json(&c.config) })).collect::<Vec<_>>(),
        "skipped": skipped,
    });
    let mut m = Manifest::new(inv.clone(), resolved, a.seed);
    m.inputs.push(a.target.clone());
    m.outputs = outputs;
    m.write(&a.out_dir.join("manifest.json"))?;
    if not_converged.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "cells hit the epoch cap before the radius fell below delta: {}",
            not_converged.join(", ")
        )))
    }
}
