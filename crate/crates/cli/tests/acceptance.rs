//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use graphforge::analysis::connected_components;
use graphforge::bundle::write_bundle;
use graphforge::index::build_index;
use graphforge::ingest::{self, ClassBalanceSpec};
use graphforge::{
    construct, oracle, ConstructionConfig, GabrielBoundary, GabrielMode, Graph, Method, PointSet, Symmetrize,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn uniform(n: usize, d: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointSet::from_flat((0..n * d).map(|_| rng.random::<f64>()).collect(), d).unwrap()
}

fn gaussian(n: usize, d: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointSet::from_flat((0..n * d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(), d).unwrap()
}

fn edge_set(g: &Graph) -> BTreeSet<(u32, u32)> {
    g.edges().iter().copied().collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let configs = [
        ConstructionConfig::new(Method::Knn).with_symmetrize(Symmetrize::None),
        ConstructionConfig::new(Method::Knn),
        ConstructionConfig::new(Method::Mnn),
        ConstructionConfig::new(Method::Snn).with_theta(2).with_snn_weighted(true),
        ConstructionConfig::new(Method::Epsilon).with_epsilon(0.5),
        ConstructionConfig::new(Method::Gabriel),
    ];
    let mut comparisons = 0;
    for set in 0..100u64 {
        let n = [50, 200, 500][set as usize % 3];
        let d = [2, 6][(set as usize / 3) % 2];
        let ps = uniform(n, d, 1_000 + set);
        for cfg in &configs {
            let g = construct::build(&ps, cfg).map_err(|e| format!("set {set} {}: {e}", cfg.method))?;
            oracle::compare(&g, &oracle::build(&ps, cfg))
                .map_err(|e| format!("set {set} (n={n}, d={d}) {cfg:?}: {e}"))?;
            comparisons += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:.1?}"))?;
    Ok(format!("{comparisons} comparisons, 0 mismatches, {:.1}s", elapsed.as_secs_f64()))
}

fn proximity_hierarchy() -> Outcome {
    let mut checks = 0usize;
    for set in 0..100u64 {
        let ps = uniform(200, 2, 2_000 + set);
        let gabriel =
            construct::gabriel_graph(&ps, GabrielMode::Exact, GabrielBoundary::Open).map_err(|e| e.to_string())?;
        for (i, nn) in oracle::knn_sets(&ps, 1).iter().enumerate() {
            ensure(gabriel.contains_edge(i as u32, nn[0]), || {
                format!("set {set}: nearest edge ({i}, {}) missing", nn[0])
            })?;
            checks += 1;
        }
        let components = connected_components(&gabriel).count;
        ensure(components == 1, || format!("set {set}: Gabriel has {components} components"))?;

        let knn = edge_set(&construct::knn_graph(&ps, 3, Symmetrize::Union).unwrap());
        let mnn = edge_set(&construct::mnn_graph(&ps, 3).unwrap());
        ensure(mnn.is_subset(&knn), || format!("set {set}: MNN not inside kNN"))?;

        let mut previous = BTreeSet::new();
        for eps in [0.02, 0.05, 0.1, 0.2] {
            let edges = edge_set(&construct::epsilon_graph(&ps, eps).unwrap());
            ensure(previous.is_subset(&edges), || format!("set {set}: ε={eps} loses edges"))?;
            previous = edges;
        }

        let mut previous: Option<BTreeSet<(u32, u32)>> = None;
        for theta in 1..=3 {
            let edges = edge_set(&construct::snn_graph(&ps, 3, theta, false).unwrap());
            if let Some(prev) = &previous {
                ensure(edges.is_subset(prev), || format!("set {set}: θ={theta} adds edges"))?;
            }
            previous = Some(edges);
        }
        checks += 4;
    }
    Ok(format!("100 sets, {checks} checks, 0 violations"))
}

fn bundle_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "manifest.json")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let ps = gaussian(1_500, 6, 3).with_labels((0..1_500).map(|i| ["a", "b", "c"][i % 3])).unwrap();
    ingest::write_csv(&ps, dir.path().join("input.csv"), "label", false).map_err(|e| e.to_string())?;
    let variants: [&[&str]; 7] = [
        &["--method", "knn", "--symmetrize", "none"],
        &["--method", "knn"],
        &["--method", "mnn"],
        &["--method", "snn", "--theta", "2", "--snn-weighted"],
        &["--method", "epsilon", "--epsilon", "0.5"],
        &["--method", "gabriel"],
        &["--method", "gabriel", "--gabriel-mode", "candidate:20"],
    ];
    let mut runs = 0;
    for (v, extra) in variants.iter().enumerate() {
        let mut outputs = Vec::new();
        for (r, threads) in ["1", "8", "1", "8"].iter().enumerate() {
            let out = format!("b{v}-{r}");
            let status = Command::new(env!("CARGO_BIN_EXE_graphforge"))
                .args([
                    "build",
                    "--input",
                    "input.csv",
                    "--label-col",
                    "label",
                    "--seed",
                    "7",
                    "--threads",
                    threads,
                    "--out",
                    &out,
                ])
                .args(*extra)
                .current_dir(dir.path())
                .env_remove("GRAPHFORGE_THREADS")
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.success(), || format!("{extra:?}: {}", String::from_utf8_lossy(&status.stderr)))?;
            outputs.push(bundle_bytes(&dir.path().join(&out)));
            runs += 1;
        }
        ensure(outputs.windows(2).all(|w| w[0] == w[1]), || format!("{extra:?}: bundles differ"))?;
    }
    Ok(format!("{} configurations x threads 1,8,1,8: {runs} runs byte-identical (manifest excluded)", variants.len()))
}

fn peak_rss_bytes() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn scale_check() -> Outcome {
    let ps = gaussian(100_000, 6, 4);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs = [
        ConstructionConfig::new(Method::Knn),
        ConstructionConfig::new(Method::Mnn),
        ConstructionConfig::new(Method::Snn).with_theta(2),
        ConstructionConfig::new(Method::Epsilon).with_epsilon(0.5),
        ConstructionConfig::new(Method::Gabriel).with_gabriel_mode(GabrielMode::Candidate(20)),
    ];
    let mut parts = Vec::new();
    for cfg in configs {
        let start = Instant::now();
        let g = construct::build(&ps, &cfg).map_err(|e| format!("{}: {e}", cfg.method))?;
        write_bundle(&g, &ps, dir.path().join(cfg.method.as_str())).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        ensure(elapsed < Duration::from_secs(600), || format!("{} took {elapsed:.1?}", cfg.method))?;
        parts.push(format!("{} {:.1}s/{}e", cfg.method, elapsed.as_secs_f64(), g.n_edges()));
    }
    let peak = peak_rss_bytes().ok_or("peak memory unavailable")?;
    ensure(peak < 8 << 30, || format!("peak memory {:.2} GiB", peak as f64 / (1u64 << 30) as f64))?;
    Ok(format!(
        "n=100000 d=6 on {} thread(s): {}; peak RSS {:.0} MiB",
        rayon::current_num_threads(),
        parts.join(", "),
        peak as f64 / (1u64 << 20) as f64
    ))
}

fn ingest_protocol() -> Outcome {
    let sizes = [("A", 6_100usize), ("B", 5_400), ("C", 2_500)];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (class, count) in sizes {
        for _ in 0..count {
            rows.push((0..4).map(|_| rng.random_range(0..40) as f64).collect::<Vec<f64>>());
            labels.push(class);
        }
    }
    for i in (0..rows.len()).step_by(50) {
        rows.push(rows[i].clone());
        labels.push(labels[i]);
    }
    let ps = PointSet::from_rows(rows).unwrap().with_labels(labels).unwrap();
    let unique = ingest::dedup(&ps);
    let mut seen = BTreeSet::new();
    for i in 0..unique.len() {
        let key: Vec<u64> = unique.row(i).iter().map(|v| v.to_bits()).collect();
        ensure(seen.insert((key, unique.label(i).unwrap().to_string())), || "dedup left a duplicate".into())?;
    }
    ensure(unique.len() <= ps.len() - ps.len().div_ceil(51), || "dedup kept injected duplicates".into())?;

    let spec = ClassBalanceSpec::new([("A", 5_000), ("B", 5_000), ("C", 2_322)], 11);
    let sampled = ingest::stratified_downsample(&unique, &spec).map_err(|e| e.to_string())?;
    let count = |p: &PointSet, c: &str| p.labels().unwrap().iter().filter(|l| *l == c).count();
    let counts: Vec<usize> = ["A", "B", "C"].iter().map(|c| count(&sampled, c)).collect();
    ensure(counts == [5_000, 5_000, 2_322], || format!("counts {counts:?}"))?;
    let pct: Vec<String> = counts.iter().map(|&c| format!("{:.2}", 100.0 * c as f64 / sampled.len() as f64)).collect();
    ensure(pct == ["40.58", "40.58", "18.84"], || format!("proportions {pct:?}"))?;

    let (train, test) = ingest::train_test_split(&sampled, 0.2, 12).map_err(|e| e.to_string())?;
    let train_ids: BTreeSet<u64> = train.row_ids().iter().copied().collect();
    let test_ids: BTreeSet<u64> = test.row_ids().iter().copied().collect();
    let all_ids: BTreeSet<u64> = sampled.row_ids().iter().copied().collect();
    ensure(train_ids.is_disjoint(&test_ids), || "train and test overlap".into())?;
    ensure(&train_ids | &test_ids == all_ids, || "split loses rows".into())?;
    let expected = ingest::stratified_test_counts(&counts, 0.2);
    let got: Vec<usize> = ["A", "B", "C"].iter().map(|c| count(&test, c)).collect();
    ensure(got == expected && got == [1_000, 1_000, 464], || format!("test counts {got:?}"))?;
    ensure((train.len(), test.len()) == (9_858, 2_464), || format!("train {} test {}", train.len(), test.len()))?;
    Ok(format!(
        "{} rows -> {} unique -> {:?} ({}%), split {}/{} with test {:?}",
        ps.len(),
        unique.len(),
        counts,
        pct.join("/"),
        train.len(),
        test.len(),
        got
    ))
}

fn tie_and_boundary() -> Outcome {
    let pts = |rows: &[&[f64]]| PointSet::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap();
    let line = pts(&[&[0.0], &[0.4], &[0.5]]);
    let hits = build_index(&line).unwrap().range_query(0, 0.5).unwrap();
    ensure(hits == [1], || format!("range query at 0.5 gave {hits:?}"))?;
    let eps = construct::epsilon_graph(&pts(&[&[0.0, 0.0], &[0.5, 0.0]]), 0.5).unwrap();
    ensure(eps.n_edges() == 0, || "distance exactly ε formed an edge".into())?;
    let eps = construct::epsilon_graph(&pts(&[&[0.0, 0.0], &[0.4, 0.0]]), 0.5).unwrap();
    ensure(eps.n_edges() == 1, || "distance 0.4 < ε formed no edge".into())?;

    let tie = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[-1.0, 0.0]]);
    let nn = build_index(&tie).unwrap().knn_query(0, 1).unwrap();
    ensure(nn.neighbors == [(1, 1.0)], || format!("tie resolved to {:?}", nn.neighbors))?;
    let directed = construct::knn_graph(&tie, 1, Symmetrize::None).unwrap();
    ensure(directed.edges() == [(0, 1), (1, 0), (2, 0)], || format!("tied kNN edges {:?}", directed.edges()))?;

    let on_sphere = pts(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, 1.0]]);
    let centre = pts(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, 0.0]]);
    let open = GabrielBoundary::default();
    ensure(open == GabrielBoundary::Open, || "default boundary is not open".into())?;
    ensure(construct::gabriel_pair_test(&on_sphere, 0, 1, open).unwrap(), || "open: boundary point blocked".into())?;
    ensure(!construct::gabriel_pair_test(&on_sphere, 0, 1, GabrielBoundary::Closed).unwrap(), || {
        "closed: boundary point did not block".into()
    })?;
    for boundary in [GabrielBoundary::Open, GabrielBoundary::Closed] {
        ensure(!construct::gabriel_pair_test(&centre, 0, 1, boundary).unwrap(), || "midpoint did not block".into())?;
    }
    let square = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
    let g = construct::gabriel_graph(&square, GabrielMode::Exact, GabrielBoundary::Open).unwrap();
    ensure(g.n_edges() == 6, || format!("open square has {} edges", g.n_edges()))?;
    let g = construct::gabriel_graph(&square, GabrielMode::Exact, GabrielBoundary::Closed).unwrap();
    ensure(g.edges() == [(0, 1), (0, 2), (1, 3), (2, 3)], || format!("closed square edges {:?}", g.edges()))?;
    Ok("ε strict, index tie-break, open and closed Gabriel boundaries pinned".into())
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("oracle equivalence, all constructors", oracle_equivalence),
        ("proximity-hierarchy properties", proximity_hierarchy),
        ("byte-identical bundles across threads and repeats", determinism),
        ("scale check, n=100000 in 6-D", scale_check),
        ("ingest protocol: dedup, class targets, stratified split", ingest_protocol),
        ("tie and boundary semantics", tie_and_boundary),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
