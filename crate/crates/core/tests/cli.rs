use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use diachron::cli::{run_from, RunManifest};
use diachron::Error;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diachron")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = bin(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Synth corpus ingested into a store, with SVD spaces for 1930 and 1980.
struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
    store: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let store = root.join("store");
    ok(&["synth", "--out", s(&root.join("syn"))]);
    ok(&["ingest", s(&root.join("syn/corpus.jsonl")), "--store", s(&store)]);
    for p in ["1930", "1980"] {
        ok(&["train", "svd", "--period", p, "--dim", "50", "--store", s(&store)]);
    }
    Fixture { _dir: dir, root, store }
}

#[test]
fn usage_errors_map_to_exit_code_two() {
    let err = run_from(["diachron", "frobnicate"]).unwrap_err();
    assert!(matches!(err, Error::Usage(_)));
    assert_eq!(err.exit_code(), 2);
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bin(&["train", "svd"]).status.code(), Some(2));
}

#[test]
fn refuses_to_overwrite_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("syn");
    let args = ["synth", "--pairs", "3", "--fillers", "20", "--out", s(&out)];
    ok(&args);
    let again = bin(&args);
    assert_eq!(again.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&again.stderr).contains("--force"));
    let mut forced = args.to_vec();
    forced.push("--force");
    ok(&forced);
}

#[test]
fn pipeline_query_eval_and_manifests() {
    let f = fixture();
    let store = s(&f.store);
    ok(&["align", "op", "--base", "1930", "--target", "1980", "--store", store]);
    let map = f.store.join("maps/op-svd-1930-1939__1980-1989.map");
    assert!(map.exists());

    let gold = fs::read_to_string(f.root.join("syn/gold.tsv")).unwrap();
    let (old, new) = gold
        .lines()
        .find(|l| !l.starts_with('#'))
        .and_then(|l| l.split_once('\t'))
        .unwrap();
    let tsv = ok(&["query", old, "--method", "opsc", "--k", "10", "--base", "1930", "--target", "1980", "--store", store]);
    let header = tsv.lines().next().unwrap();
    assert!(header.contains("method=OP+SC") && header.contains("k=10") && header.contains("pool=15"), "{header}");
    let rows: Vec<&str> = tsv.lines().skip(2).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| !r.split('\t').nth(1).unwrap().eq(old)));
    assert!(rows.iter().any(|r| r.split('\t').nth(1) == Some(new)), "{tsv}");

    let missing = bin(&["query", "nosuchword", "--base", "1930", "--target", "1980", "--store", store]);
    assert_eq!(missing.status.code(), Some(3));

    let prefix = f.root.join("report");
    ok(&["eval", "--gold", s(&f.root.join("syn/gold.tsv")), "--base", "1930", "--target", "1980", "--methods", "op,opsc,lt", "--store", store, "--out", s(&prefix)]);
    let csv = fs::read_to_string(f.root.join("report.csv")).unwrap();
    assert!(csv.starts_with("method,embedding,base,target,k,recall,mrr"));
    assert!(csv.lines().any(|l| l.starts_with("LT,")), "LT map is fitted on the fly");

    let manifest: RunManifest =
        serde_json::from_str(&fs::read_to_string(f.store.join("maps/op-svd-1930-1939__1980-1989.map.manifest.json")).unwrap()).unwrap();
    assert!(manifest.command.contains("align op"));
    assert_eq!(manifest.input_digests.len(), 2);
    assert!(manifest.input_digests.values().all(|d| d.len() == 64));
    assert_eq!(manifest.tool_version, env!("CARGO_PKG_VERSION"));
    assert!(manifest.outputs.iter().any(|o| o.ends_with(".map")));
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let f = fixture();
    let store = s(&f.store);
    let cfg = f.root.join("run.conf");
    fs::write(&cfg, "# training\ndim = 20\nwindow=3\n").unwrap();
    let out = f.root.join("a.vec");
    ok(&["train", "svd", "--period", "1930", "--config", s(&cfg), "--window", "4", "--store", store, "--out", s(&out)]);
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(f.root.join("a.vec.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.config_snapshot["dim"], "20");
    assert_eq!(manifest.config_snapshot["window"], "4");
    assert_eq!(manifest.config_snapshot["min_count"], diachron::embed::SvdConfig::default().min_count.to_string());
}

#[test]
fn seeded_outputs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for run in ["a", "b"] {
        let syn = d.join(run);
        let store = d.join(format!("{run}-store"));
        ok(&["synth", "--pairs", "4", "--fillers", "40", "--out", s(&syn)]);
        ok(&["ingest", s(&syn.join("corpus.jsonl")), "--store", s(&store)]);
        ok(&["train", "cbow", "--period", "1930", "--dim", "8", "--epochs", "2", "--min-count", "1", "--seed", "3", "--workers", "1", "--store", s(&store)]);
    }
    let same = |rel: &str| fs::read(d.join("a").join(rel)).unwrap() == fs::read(d.join("b").join(rel)).unwrap();
    assert!(same("corpus.jsonl") && same("gold.tsv"));
    let vec = |run: &str| fs::read(d.join(format!("{run}-store/embeddings/cbow-1930-1939.vec"))).unwrap();
    assert_eq!(vec("a"), vec("b"));
}
