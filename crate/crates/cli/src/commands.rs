use std::collections::BTreeMap;
use std::path::Path;

use graphforge::analysis::topology_report;
use graphforge::bundle::{self, StagedBundle, StagedDir};
use graphforge::config::DEFAULT_THETA;
use graphforge::ingest::{self, ClassBalanceSpec, CsvOptions};
use graphforge::{construct, oracle, ConstructionConfig, GabrielBoundary, Graph, Method, Metric, PointSet, Symmetrize};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use crate::args::{BuildArgs, Cli, Command, CsvArgs, MethodArgs, SampleArgs, SplitArgs, StatsArgs, ValidateArgs};
use crate::error::CliError;
use crate::manifest::{RunManifest, MANIFEST_FILE};

pub fn run(cli: Cli, command_line: Vec<String>) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => pool = pool.num_threads(n),
        None => {}
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Build(a) => build(a, command_line),
        Command::Stats(a) => stats(a, command_line),
        Command::Validate(a) => validate(a, command_line),
        Command::Sample(a) => sample(a, command_line),
        Command::Split(a) => split(a, command_line),
    })
}

/// Keys accepted in a `--config` TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    method: Option<Method>,
    k: Option<usize>,
    theta: Option<usize>,
    epsilon: Option<f64>,
    metric: Option<Metric>,
    symmetrize: Option<Symmetrize>,
    gabriel_mode: Option<String>,
    gabriel_boundary: Option<GabrielBoundary>,
    snn_weighted: Option<bool>,
    label_col: Option<String>,
    id_col: Option<String>,
    delimiter: Option<char>,
    dedup: Option<bool>,
}

fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

/// Flags over file over defaults. SNN has no implicit θ here.
fn resolve_config(
    method: Option<Method>,
    params: &MethodArgs,
    file: &FileConfig,
    require_theta: bool,
) -> Result<ConstructionConfig, CliError> {
    let method = method.or(file.method).ok_or_else(|| CliError::Usage("--method is required".into()))?;
    let mut cfg = ConstructionConfig::new(method);
    if let Some(k) = params.k.or(file.k) {
        cfg.k = k;
    }
    match params.theta.or(file.theta) {
        Some(theta) => cfg.theta = theta,
        None if require_theta && method == Method::Snn => {
            return Err(CliError::Usage("method snn requires --theta (θ, the shared-neighbour threshold)".into()))
        }
        None => cfg.theta = DEFAULT_THETA,
    }
    if let Some(eps) = params.epsilon.or(file.epsilon) {
        cfg.epsilon = eps;
    }
    if let Some(metric) = file.metric {
        cfg.metric = metric;
    }
    if let Some(sym) = params.symmetrize.or(file.symmetrize) {
        cfg.symmetrize = sym;
    }
    if let Some(mode) = params.gabriel_mode {
        cfg.gabriel_mode = mode;
    } else if let Some(mode) = &file.gabriel_mode {
        cfg.gabriel_mode = mode.parse().map_err(|e| CliError::Usage(format!("config: {e}")))?;
    }
    if let Some(boundary) = params.gabriel_boundary.or(file.gabriel_boundary) {
        cfg.gabriel_boundary = boundary;
    }
    cfg.snn_weighted = params.snn_weighted || file.snn_weighted.unwrap_or(false);
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn csv_options(csv: &CsvArgs, file: &FileConfig) -> Result<CsvOptions, CliError> {
    let delimiter = match csv.delimiter.or(file.delimiter) {
        None => b',',
        Some(c) if c.is_ascii() => c as u8,
        Some(c) => return Err(CliError::Usage(format!("delimiter '{c}' is not a single ASCII character"))),
    };
    Ok(CsvOptions {
        label_column: csv.label_col.clone().or_else(|| file.label_col.clone()),
        id_column: csv.id_col.clone().or_else(|| file.id_col.clone()),
        delimiter,
    })
}

fn require_label(opts: &CsvOptions) -> Result<&str, CliError> {
    opts.label_column.as_deref().ok_or_else(|| CliError::Usage("--label-col is required".into()))
}

fn bundle_outputs(g: &Graph, ps: &PointSet) -> Vec<String> {
    let mut files = vec![bundle::META_FILE, bundle::FEATURES_FILE, bundle::EDGES_FILE];
    if ps.labels().is_some() {
        files.push(bundle::LABELS_FILE);
    }
    if g.weights().is_some() {
        files.push(bundle::WEIGHTS_FILE);
    }
    files.push(MANIFEST_FILE);
    files.into_iter().map(String::from).collect()
}

fn build(args: BuildArgs, command_line: Vec<String>) -> Result<(), CliError> {
    let file = match &args.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };
    let cfg = resolve_config(args.method, &args.params, &file, true)?;
    let opts = csv_options(&args.csv, &file)?;
    let dedup = args.dedup || file.dedup.unwrap_or(false);

    let mut manifest = RunManifest::new("build", command_line);
    manifest.config = json!({
        "construction": cfg,
        "input": args.csv.input.display().to_string(),
        "label_col": opts.label_column,
        "id_col": opts.id_column,
        "delimiter": (opts.delimiter as char).to_string(),
        "dedup": dedup,
        "config_file": args.config.as_ref().map(|p| p.display().to_string()),
    });
    manifest.seeds.insert("seed".into(), args.seed);
    manifest.record_input(&args.csv.input)?;
    if let Some(path) = &args.config {
        manifest.record_input(path)?;
    }

    let ps = manifest.time("ingest", || -> Result<PointSet, CliError> {
        let ps = ingest::load_csv(&args.csv.input, &opts)?;
        Ok(if dedup { ingest::dedup(&ps) } else { ps })
    })?;
    let g = manifest.time("construct", || construct::build(&ps, &cfg))?;
    let report = manifest.time("analyze", || topology_report(&g, ps.labels())).expect("labels match point count");
    let staged = manifest.time("export", || StagedBundle::new(&g, &ps, &args.out))?;

    manifest.outputs = bundle_outputs(&g, &ps);
    manifest.results = json!({ "topology": report });
    staged.add_file(MANIFEST_FILE, &manifest.to_bytes())?;
    let out = staged.commit()?;
    println!("{}: {} nodes, {} edges -> {}", cfg.method, g.n_nodes(), g.n_edges(), out.display());
    Ok(())
}

fn stats(args: StatsArgs, command_line: Vec<String>) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("stats", command_line);
    manifest.config = json!({ "bundle": args.bundle.display().to_string() });
    let (g, ps) = manifest.time("load", || bundle::read_bundle(&args.bundle))?;
    manifest.record_input(&args.bundle.join(bundle::META_FILE))?;
    manifest.record_input(&args.bundle.join(bundle::FEATURES_FILE))?;
    manifest.record_input(&args.bundle.join(bundle::EDGES_FILE))?;
    let report = manifest.time("analyze", || topology_report(&g, ps.labels())).expect("labels match point count");
    let as_json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    if args.json {
        print!("{as_json}");
    } else {
        print!("{report}");
    }
    if let Some(out) = args.out {
        let dir = StagedDir::new(&out)?;
        dir.add_file("report.json", as_json.as_bytes())?;
        dir.add_file("report.txt", report.to_string().as_bytes())?;
        manifest.outputs = vec!["report.json".into(), "report.txt".into(), MANIFEST_FILE.into()];
        manifest.results = json!({ "topology": report });
        dir.add_file(MANIFEST_FILE, &manifest.to_bytes())?;
        dir.commit()?;
    }
    Ok(())
}

#[derive(Debug, serde::Serialize)]
struct Check {
    label: String,
    method: Method,
    n_edges: usize,
    mismatch: Option<String>,
}

fn random_points(n: usize, dim: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    PointSet::from_flat(values, dim).expect("finite coordinates")
}

fn check(label: String, ps: &PointSet, cfg: &ConstructionConfig) -> Result<Check, CliError> {
    let g = construct::build(ps, cfg)?;
    let mismatch = oracle::compare(&g, &oracle::build(ps, cfg)).err();
    Ok(Check { label, method: cfg.method, n_edges: g.n_edges(), mismatch })
}

fn validate(args: ValidateArgs, command_line: Vec<String>) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("validate", command_line);
    let checks = if let Some(path) = &args.bundle {
        manifest.config = json!({ "bundle": path.display().to_string() });
        manifest.record_input(&path.join(bundle::META_FILE))?;
        let (g, ps) = manifest.time("load", || bundle::read_bundle(path))?;
        let cfg =
            g.provenance().config.ok_or_else(|| CliError::Data("bundle records no construction config".into()))?;
        let mismatch = manifest.time("oracle", || oracle::compare(&g, &oracle::build(&ps, &cfg)).err());
        vec![Check { label: path.display().to_string(), method: cfg.method, n_edges: g.n_edges(), mismatch }]
    } else {
        if args.n < 2 || args.dim == 0 {
            return Err(CliError::Usage("--n must be at least 2 and --dim at least 1".into()));
        }
        let methods = if args.methods.is_empty() { Method::ALL.to_vec() } else { args.methods.clone() };
        let configs = methods
            .iter()
            .map(|&m| resolve_config(Some(m), &args.params, &FileConfig::default(), false))
            .collect::<Result<Vec<_>, _>>()?;
        manifest.config = json!({ "n": args.n, "dim": args.dim, "trials": args.trials, "configs": configs });
        manifest.seeds.insert("seed".into(), args.seed);
        manifest.time("oracle", || -> Result<Vec<Check>, CliError> {
            let mut checks = Vec::new();
            for trial in 0..args.trials {
                let seed = args.seed.wrapping_add(trial as u64);
                let ps = random_points(args.n, args.dim, seed);
                for cfg in &configs {
                    checks.push(check(format!("seed {seed}"), &ps, cfg)?);
                }
            }
            Ok(checks)
        })?
    };

    for c in &checks {
        match &c.mismatch {
            None => println!("ok       {:<8} {} ({} edges)", c.method, c.label, c.n_edges),
            Some(m) => println!("MISMATCH {:<8} {}: {m}", c.method, c.label),
        }
    }
    let failures = checks.iter().filter(|c| c.mismatch.is_some()).count();
    if let Some(out) = &args.out {
        let dir = StagedDir::new(out)?;
        let report = serde_json::to_vec_pretty(&checks).expect("checks serialize");
        dir.add_file("report.json", &report)?;
        manifest.outputs = vec!["report.json".into(), MANIFEST_FILE.into()];
        manifest.results = json!({ "checks": checks.len(), "mismatches": failures });
        dir.add_file(MANIFEST_FILE, &manifest.to_bytes())?;
        dir.commit()?;
    }
    if failures > 0 {
        return Err(CliError::Mismatch(format!("{failures} of {} checks disagree with the oracle", checks.len())));
    }
    Ok(())
}

fn class_counts(ps: &PointSet) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for label in ps.labels().unwrap_or_default() {
        *counts.entry(label.clone()).or_insert(0) += 1;
    }
    counts
}

fn sample(args: SampleArgs, command_line: Vec<String>) -> Result<(), CliError> {
    let opts = csv_options(&args.csv, &FileConfig::default())?;
    let label = require_label(&opts)?.to_string();
    let mut targets = BTreeMap::new();
    for (class, count) in &args.targets {
        if targets.insert(class.clone(), *count).is_some() {
            return Err(CliError::Usage(format!("class '{class}' given more than once")));
        }
    }
    let spec = ClassBalanceSpec { targets, seed: args.seed };

    let mut manifest = RunManifest::new("sample", command_line);
    manifest.config = json!({ "input": args.csv.input.display().to_string(), "label_col": label, "dedup": args.dedup, "targets": spec.targets });
    manifest.seeds.insert("seed".into(), args.seed);
    manifest.record_input(&args.csv.input)?;

    let ps = manifest.time("ingest", || ingest::load_csv(&args.csv.input, &opts))?;
    let before = ps.len();
    let ps = if args.dedup { manifest.time("dedup", || ingest::dedup(&ps)) } else { ps };
    let deduplicated = ps.len();
    let sampled = manifest.time("sample", || ingest::stratified_downsample(&ps, &spec))?;

    let counts = class_counts(&sampled);
    let total = sampled.len() as f64;
    for (class, count) in &counts {
        println!("{class}\t{count}\t{:.2}%", 100.0 * *count as f64 / total);
    }
    let dir = StagedDir::new(&args.out)?;
    manifest.time("export", || ingest::write_csv(&sampled, dir.staged_path("sample.csv"), &label, true))?;
    manifest.outputs = vec!["sample.csv".into(), MANIFEST_FILE.into()];
    manifest.results = json!({ "rows_in": before, "rows_after_dedup": deduplicated, "class_counts": counts });
    dir.add_file(MANIFEST_FILE, &manifest.to_bytes())?;
    dir.commit()?;
    Ok(())
}

fn split(args: SplitArgs, command_line: Vec<String>) -> Result<(), CliError> {
    let opts = csv_options(&args.csv, &FileConfig::default())?;
    let label = require_label(&opts)?.to_string();
    let mut manifest = RunManifest::new("split", command_line);
    manifest.config = json!({
        "input": args.csv.input.display().to_string(),
        "label_col": label,
        "test_fraction": args.test_fraction,
        "scale": args.scale,
    });
    manifest.seeds.insert("seed".into(), args.seed);
    manifest.record_input(&args.csv.input)?;

    let ps = manifest.time("ingest", || ingest::load_csv(&args.csv.input, &opts))?;
    let (train, test) = manifest.time("split", || ingest::train_test_split(&ps, args.test_fraction, args.seed))?;
    let dir = StagedDir::new(&args.out)?;
    let (train, test) = if args.scale {
        let (train, test, params) = manifest.time("scale", || ingest::standardize_fit_transform(&train, &test))?;
        params.save(dir.staged_path("scaler.json"))?;
        manifest.outputs.push("scaler.json".into());
        (train, test)
    } else {
        (train, test)
    };
    manifest.time("export", || -> Result<(), CliError> {
        ingest::write_csv(&train, dir.staged_path("train.csv"), &label, true)?;
        ingest::write_csv(&test, dir.staged_path("test.csv"), &label, true)?;
        Ok(())
    })?;
    println!("train {} rows, test {} rows", train.len(), test.len());
    manifest.outputs.extend(["train.csv".into(), "test.csv".into(), MANIFEST_FILE.into()]);
    manifest.results = json!({
        "train_rows": train.len(),
        "test_rows": test.len(),
        "train_class_counts": class_counts(&train),
        "test_class_counts": class_counts(&test),
    });
    dir.add_file(MANIFEST_FILE, &manifest.to_bytes())?;
    dir.commit()?;
    Ok(())
}
