#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::{Path, PathBuf};
use std::process::Command;

use motive_height::document::{parse_motive, to_text, MotiveDocument, SpecDocument};
use motive_height::{run, Outcome};
use rand::Rng;
use support::{random_invariance_case, rng};
use tempfile::TempDir;

const EXAMPLES: [&str; 6] = ["tate:0", "tate:1", "tate:-1", "tate:3", "elliptic:square", "trivial"];

fn cli(args: &[&str]) -> Outcome {
    run(std::iter::once("motive-height").chain(args.iter().copied()))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn example_file(dir: &Path, name: &str) -> PathBuf {
    let out = cli(&["example", name]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    write(dir, &format!("{}.json", name.replace(':', "_")), &out.stdout)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `(h_mid, h_rad)` from a single rows record.
fn row_h(out: &Outcome) -> (f64, f64) {
    let fields: Vec<&str> = out.stdout.trim_end().split('\t').collect();
    assert_eq!(fields.len(), 6, "{:?}", out.stdout);
    (fields[3].parse().unwrap(), fields[4].parse().unwrap())
}

#[test]
fn examples_round_trip_and_validate() {
    let dir = TempDir::new().unwrap();
    for name in EXAMPLES {
        let path = example_file(dir.path(), name);
        let text = std::fs::read_to_string(&path).unwrap();
        let doc = parse_motive(&text).unwrap();
        // emitted documents are already canonical
        assert_eq!(to_text(&doc.canonical().unwrap()), text, "{name}");
        assert_eq!(cli(&["canonical", s(&path)]).stdout, text);
        let v = cli(&["validate", s(&path)]);
        assert_eq!(v.code, 0, "{name}: {}", v.stderr);
        assert_eq!(v.stdout, format!("{name}: valid\n"));
        // through the data model and back
        let m = doc.to_motive(200).unwrap();
        let again = MotiveDocument::from_motive(&m, doc.metadata.id.clone(), 60);
        assert_eq!(again.local, doc.local);
        assert_eq!((again.mtype.clone(), again.dr.clone()), (doc.mtype.clone(), doc.dr.clone()));
    }
}

#[test]
fn canonical_form_normalizes_spelling_and_order() {
    let dir = TempDir::new().unwrap();
    let path = example_file(dir.path(), "elliptic:square");
    let mut doc = parse_motive(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let canonical = to_text(&doc);
    doc.local.reverse();
    doc.bad_primes = vec![2, 2];
    doc.period[0][0].re = format!("+0{}000", doc.period[0][0].re);
    doc.period[1][0].re = "-0.0e5".into();
    if let Some(fl) = doc.local[0].fl.as_mut() {
        let q = motive_core::lines::parse_rational(&fl.phi[0][0]).unwrap();
        fl.phi[0][0] = format!("{}/{}", q.numer() * 6, q.denom() * 6);
        fl.lattice[0][0] = "3/3".into();
    }
    let messy = write(dir.path(), "messy.json", &serde_json::to_string(&doc).unwrap());
    assert_eq!(cli(&["canonical", s(&messy)]).stdout, canonical);
}

#[test]
fn tate_heights_from_documents() {
    let dir = TempDir::new().unwrap();
    let t0 = example_file(dir.path(), "tate:0");
    let out = cli(&["height", s(&t0)]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.lines().any(|l| l == "h = 0 ± 0"), "{}", out.stdout);
    let t1 = example_file(dir.path(), "tate:1");
    let out = cli(&["height", s(&t1)]);
    assert!(out.stdout.contains("h = -1.8378770664"), "{}", out.stdout);
    assert!(out.stdout.contains("window: (-1, 0)"));
    let (mid, rad) = row_h(&cli(&["height", s(&t1), "--format", "rows"]));
    assert!((mid + (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
    assert!(rad < 1e-30);
}

#[test]
fn non_nested_filtration_is_reported_with_its_location() {
    let dir = TempDir::new().unwrap();
    let path = example_file(dir.path(), "elliptic:square");
    let mut doc = parse_motive(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let entry = doc.local.iter_mut().find(|e| e.p == 5).unwrap();
    entry.fl.as_mut().unwrap().filtration[0].generators = vec![vec!["1/5".into()], vec!["0".into()]];
    let bad = write(dir.path(), "bad.json", &to_text(&doc));
    let out = cli(&["validate", s(&bad)]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("local.5"), "{}", out.stderr);
    assert!(out.stderr.contains("not nested at index 0"), "{}", out.stderr);
    assert_eq!(cli(&["height", s(&bad)]).code, 1);
}

#[test]
fn failing_strong_divisibility_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let path = example_file(dir.path(), "elliptic:square");
    let mut doc = parse_motive(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let entry = doc.local.iter_mut().find(|e| e.p == 7).unwrap();
    entry.fl.as_mut().unwrap().phi = vec![vec!["1".into(), "0".into()], vec!["0".into(), "1".into()]];
    let bad = write(dir.path(), "bad.json", &to_text(&doc));
    let out = cli(&["validate", s(&bad)]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("error at local.7.strong_divisibility"), "{}", out.stderr);
}

#[test]
fn malformed_input_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let good = std::fs::read_to_string(example_file(dir.path(), "tate:1")).unwrap();
    let cases = [
        ("not json", "{ nope".to_string()),
        ("unknown field", good.replacen("\"betti\"", "\"extra\": 1, \"betti\"", 1)),
        ("version", good.replace("\"format_version\": \"1\"", "\"format_version\": \"2\"")),
        ("float literal", good.replace("\"rank\": 1", "\"rank\": 1.5")),
        ("decimal", good.replacen("\"re\": \"0\"", "\"re\": \"zero\"", 1)),
        ("precision word", good.replace("\"precision\": 1", "\"precision\": \"roughly\"")),
        ("basis", good.replace("adapted-ascending", "descending")),
    ];
    for (what, text) in cases {
        assert_ne!(text, good, "{what}: substitution did not apply");
        let path = write(dir.path(), "m.json", &text);
        let out = cli(&["height", s(&path)]);
        assert_eq!(out.code, 3, "{what}: {}", out.stderr);
        assert!(out.stderr.starts_with("error: malformed input"), "{what}: {}", out.stderr);
    }
    let path = example_file(dir.path(), "elliptic:square");
    let text = std::fs::read_to_string(&path).unwrap().replacen("\"phi\": [\n", "\"phi\": [\n[\"1/0\"],\n", 1);
    let out = cli(&["validate", s(&write(dir.path(), "z.json", &text))]);
    assert_eq!(out.code, 3, "{}", out.stderr);
    assert_eq!(cli(&["height", "/nonexistent/file.json"]).code, 3);
    assert_eq!(cli(&["frobnicate"]).code, 3);
    assert_eq!(cli(&["height", s(&path), "--window", "1"]).code, 3);
    assert_eq!(cli(&["example", "tate:x"]).code, 3);
}

#[test]
fn dimension_mismatches_are_validation_errors() {
    let dir = TempDir::new().unwrap();
    let good = std::fs::read_to_string(example_file(dir.path(), "tate:1")).unwrap();
    for (what, text, location) in [
        ("rank", good.replace("\"rank\": 1", "\"rank\": 2"), "betti.rank"),
        ("dims", good.replace("\"-1\": 1,\n      \"0\": 0", "\"-1\": 1,\n      \"0\": 1"), "dr.filtration_dims.0"),
    ] {
        assert_ne!(text, good, "{what}");
        let out = cli(&["validate", s(&write(dir.path(), "m.json", &text))]);
        assert_eq!(out.code, 1, "{what}: {}", out.stderr);
        assert!(out.stderr.contains(location), "{what}: {}", out.stderr);
    }
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    for name in EXAMPLES {
        let path = example_file(dir.path(), name);
        for args in [vec!["height", s(&path)], vec!["local", s(&path), "5"], vec!["invariants", s(&path)]] {
            let first = cli(&args);
            assert_eq!(first, cli(&args), "{args:?}");
        }
    }
    let a = cli(&["batch", s(dir.path()), "--format", "rows"]);
    let b = cli(&["batch", s(dir.path()), "--format", "rows"]);
    assert_eq!(a, b);
}

#[test]
fn higher_precision_never_widens_the_radius() {
    let dir = TempDir::new().unwrap();
    for name in ["tate:1", "tate:-2", "elliptic:square"] {
        let text = cli(&["example", name, "--precision", "400"]).stdout;
        let path = write(dir.path(), "m.json", &text);
        let mut last = f64::INFINITY;
        for prec in [32, 48, 64, 96, 128, 160, 192, 256, 320] {
            let (_, rad) = row_h(&cli(&["height", s(&path), "--format", "rows", "--precision", &prec.to_string()]));
            assert!(rad <= last, "{name} at {prec} bits: {rad} > {last}");
            last = rad;
        }
        assert!(last < 1e-90, "{name}: {last}");
    }
}

#[test]
fn batch_rows_follow_input_order() {
    let dir = TempDir::new().unwrap();
    let mut r = rng(91);
    let names: Vec<String> = (0..12).map(|i| format!("tate:{}", r.gen_range(-3..=3) + i % 2)).collect();
    let mut paths = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let text =
            cli(&["example", name]).stdout.replace(&format!("\"id\": \"{name}\""), &format!("\"id\": \"m{i:02}\""));
        paths.push(write(dir.path(), &format!("{:02}.json", 11 - i), &text));
    }
    // explicit list: given order
    let args: Vec<&str> = ["batch", "--format", "rows"].into_iter().chain(paths.iter().map(|p| s(p))).collect();
    let out = cli(&args);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let ids: Vec<String> = out.stdout.lines().map(|l| l.split('\t').next().unwrap().to_string()).collect();
    assert_eq!(ids, (0..12).map(|i| format!("m{i:02}")).collect::<Vec<_>>());
    // directory: file name order
    let out = cli(&["batch", "--format", "rows", s(dir.path())]);
    let ids: Vec<String> = out.stdout.lines().map(|l| l.split('\t').next().unwrap().to_string()).collect();
    assert_eq!(ids, (0..12).rev().map(|i| format!("m{i:02}")).collect::<Vec<_>>());
    for (line, name) in out.stdout.lines().zip(names.iter().rev()) {
        let j: i64 = name[5..].parse().unwrap();
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!((f[1], f[2]), (&*(-j).to_string(), &*(1 - j).to_string()));
    }
}

#[test]
fn batch_reports_failures_without_dropping_rows() {
    let dir = TempDir::new().unwrap();
    let good = example_file(dir.path(), "tate:1");
    let bad = write(dir.path(), "broken.json", "{}");
    let out = cli(&["batch", "--format", "rows", s(&good), s(&bad), s(&good)]);
    assert_eq!(out.code, 3);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("broken\t") && lines[1].contains("\terror\t"));
    assert!(out.stderr.contains("broken.json"));
}

#[test]
fn window_override_is_echoed() {
    let dir = TempDir::new().unwrap();
    let path = example_file(dir.path(), "tate:1");
    let out = cli(&["height", s(&path), "--window", "-2,1"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("window: (-2, 1)"));
    // the Hodge number must stay inside the window
    let out = cli(&["height", s(&path), "--window", "0,2"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("--window"));
    // elliptic modules at p = 3 only allow windows of length at most 2
    let e = example_file(dir.path(), "elliptic:square");
    let out = cli(&["height", s(&e), "--window", "-1,2"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("local.3.window"), "{}", out.stderr);
}

#[test]
fn local_and_invariant_reports() {
    let dir = TempDir::new().unwrap();
    let e = example_file(dir.path(), "elliptic:square");
    let out = cli(&["local", s(&e), "2"]);
    assert_eq!(out.stdout, "p = 2 (override)\nv(-1) = 0\nv(0) = 0\nv(1) = 0\n");
    let out = cli(&["local", s(&e), "11", "--format", "rows"]);
    assert_eq!(out.stdout, "11\t-1\t0\tfl\n11\t0\t0\tfl\n11\t1\t0\tfl\n");
    assert!(cli(&["local", s(&e), "23"]).stdout.starts_with("p = 23 (default)"));
    let out = cli(&["invariants", s(&e)]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("s = -1\nt = -1\n"));
    // h(0) = h(1) = 1 in weight 0 is not Hodge symmetric
    let text = std::fs::read_to_string(&e).unwrap().replace("\"w\": -1", "\"w\": 0").replace(
        "\"h\": {\n      \"-1\": 1,\n      \"0\": 1\n    },\n    \"a\": -1,\n    \"b\": 1",
        "\"h\": {\n      \"0\": 1,\n      \"1\": 1\n    },\n    \"a\": 0,\n    \"b\": 2",
    );
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut doc: MotiveDocument = serde_json::from_value(doc).unwrap();
    doc.dr.filtration_dims = [(0, 2), (1, 1), (2, 0)].into();
    doc.local.clear();
    let odd = write(dir.path(), "odd.json", &to_text(&doc));
    let out = cli(&["invariants", s(&odd)]);
    assert_eq!(out.code, 1, "{}", out.stderr);
    assert!(out.stdout.contains("s - t = 1\n"), "{}", out.stdout);
    assert!(out.stdout.contains("s = t: FAIL"));
}

#[test]
fn experiment_command_passes_on_random_specs() {
    let dir = TempDir::new().unwrap();
    let mut r = rng(92);
    for i in 0..6 {
        let p = [3u64, 5, 7][i % 3];
        let n = (i % 3) as u32;
        let (m, spec) = random_invariance_case(&mut r, p, 1, 200);
        let doc = MotiveDocument::from_motive(&m, Some(format!("case{i}")), 60);
        let mp = write(dir.path(), "m.json", &to_text(&doc));
        let sp = write(dir.path(), "s.json", &to_text(&SpecDocument::from_spec(&spec)));
        let out = cli(&["experiment", s(&mp), s(&sp), "--n", &n.to_string()]);
        assert_eq!(out.code, 0, "{}\n{}", out.stdout, out.stderr);
        assert!(out.stdout.contains(&format!("p = {p}, n = {n}")));
        assert!(out.stdout.ends_with("result: pass\n"));
    }
    // a specification at a prime without a module is rejected
    let (m, mut spec) = random_invariance_case(&mut r, 5, 1, 200);
    spec.p = 11;
    let mp = write(dir.path(), "m.json", &to_text(&MotiveDocument::from_motive(&m, None, 60)));
    let sp = write(dir.path(), "s.json", &to_text(&SpecDocument::from_spec(&spec)));
    let out = cli(&["experiment", s(&mp), s(&sp)]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("quotient specification is incompatible"), "{}", out.stderr);
}

#[test]
fn binary_reads_stdin_and_sets_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_motive-height");
    let example = Command::new(exe).args(["example", "tate:0"]).output().unwrap();
    assert!(example.status.success());
    let mut child = Command::new(exe)
        .args(["height", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(&example.stdout).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("h = 0 ± 0\n"));
    let missing = Command::new(exe).args(["validate", "/nonexistent.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(3));
    let help = Command::new(exe).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
