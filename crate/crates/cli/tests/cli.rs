use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rpdc::dataio::read_trace_csv;
use rpdc::Trace;

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("experiment.toml");
    fs::write(&path, body).unwrap();
    path
}

fn rpdc(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpdc"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{stdout}\nstderr:\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    stdout
}

fn trace(path: &Path) -> Trace {
    read_trace_csv(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn traces_in(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv") && p.to_string_lossy().contains("_seed"))
        .collect();
    v.sort();
    v
}

fn assert_svg(path: &Path) {
    let text = fs::read_to_string(path).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert!(doc.descendants().any(|n| n.has_tag_name("polyline")), "{} has no curves", path.display());
}

/// Two far-apart points with a narrow kernel give `Q = I₂`, `y = (1, −1)`:
/// the saddle is `u* = (1, 1)`, `p* = 0`.
fn toy_svm_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("toy.svm"), "+1 1:0\n-1 1:100\n").unwrap();
    dir
}

#[test]
fn solve_appal_reaches_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "algorithms = [\"appal\"]\nmax_iter = 100000\ntol = 1e-8\n[problem]\nkind = \"synthetic\"\nn = 30\nm = 3\n",
    );
    let out = dir.path().join("out");
    let stdout = ok(&rpdc(&["solve"], &cfg, &out));
    assert!(stdout.contains("synthetic_appal_N2_seed0"), "{stdout}");
    let t = trace(&out.join("synthetic_appal_N2_seed0.csv"));
    assert!(t.last().unwrap().kkt <= 1e-8);
    assert_eq!(t.metadata.stop_reason, "converged");
}

#[test]
fn solve_rpdc_two_seeds_gives_distinct_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "seeds = [1, 2]\nmax_iter = 500\ntol = 0\nrecord_every = 1\n[problem]\nkind = \"synthetic\"\nn = 20\nm = 2\n",
    );
    let out = dir.path().join("out");
    ok(&rpdc(&["solve", "--seed-offset", "10"], &cfg, &out));
    let files = traces_in(&out);
    let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["synthetic_rpdc_N2_seed11.csv", "synthetic_rpdc_N2_seed12.csv"]);
    let (a, b) = (trace(&files[0]), trace(&files[1]));
    assert_eq!(a.records.len(), 501);
    assert_eq!(a.metadata.seed, Some(11));
    assert!(a.records.iter().zip(&b.records).any(|(x, y)| x.dist_w != y.dist_w));
}

#[test]
fn bad_epsilon_reports_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[params]\nepsilon = 50.0\nrho = 0.1\n[problem]\nkind = \"synthetic\"\nn = 10\nm = 2\n",
    );
    let out = rpdc(&["solve"], &cfg, &dir.path().join("out"));
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("epsilon upper bound"), "{stderr}");
}

#[test]
fn invalid_config_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[problem]\nkind = \"svm\"\ndata = \"nowhere.svm\"\n");
    let out = rpdc(&["solve"], &cfg, &dir.path().join("out"));
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));
    let missing = Command::new(env!("CARGO_BIN_EXE_rpdc")).arg("solve").output().unwrap();
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("--config"));
}

#[test]
fn help_documents_defaults() {
    let out = Command::new(env!("CARGO_BIN_EXE_rpdc")).arg("--help").output().unwrap();
    let text = ok(&out);
    for needle in ["solve", "compare", "sweep", "oracle", "--jobs", "--seed-offset", "max_iter     = 10000", "gamma   = 1.0"] {
        assert!(text.contains(needle), "missing {needle:?} in help");
    }
}

#[test]
fn compare_on_toy_svm_drives_every_metric_down() {
    let dir = toy_svm_dir();
    let cfg = write_config(
        dir.path(),
        "seeds = [0, 1]\nmax_iter = 3000\ntol = 0\ntarget = 1e-6\n[problem]\nkind = \"svm\"\ndata = \"toy.svm\"\nsigma = 1.0\n",
    );
    let out = dir.path().join("out");
    let stdout = ok(&rpdc(&["compare", "--jobs", "2"], &cfg, &out));
    let files = traces_in(&out);
    assert_eq!(files.len(), 5, "{files:?}");
    for f in &files {
        let t = trace(f);
        let last = t.last().unwrap();
        assert!(last.subopt.abs() + last.feas < 1e-6, "{}: {last:?}", f.display());
    }
    let summary = fs::read_to_string(out.join("svm_compare_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 6);
    assert!(summary.lines().skip(1).all(|l| l.split(',').nth(4).is_some_and(|f| !f.is_empty())), "{summary}");
    for kind in ["iter", "time"] {
        assert_svg(&out.join(format!("svm_compare_N2_{kind}.svg")));
    }
    assert!(stdout.contains("rcd") && stdout.contains("appal"), "{stdout}");
    assert_eq!(fs::read_dir(out.join("saddles")).unwrap().count(), 1);
}

#[test]
fn rpdc_steps_are_cheaper_than_appal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "blocks = [2, 5]\nmax_iter = 3000\ntol = 0\nrecord_every = 1000\n[problem]\nkind = \"synthetic\"\nn = 300\nm = 5\n",
    );
    let out = dir.path().join("out");
    ok(&rpdc(&["compare"], &cfg, &out));
    let summary = fs::read_to_string(out.join("synthetic_compare_summary.csv")).unwrap();
    let step = |alg: &str, n: &str| -> f64 {
        summary
            .lines()
            .find(|l| l.starts_with(&format!("{alg},{n},")))
            .and_then(|l| l.rsplit(',').next())
            .unwrap()
            .parse()
            .unwrap()
    };
    for n in ["2", "5"] {
        assert!(step("rpdc", n) < step("appal", n), "N={n}: {summary}");
    }
}

fn strip_times(path: &Path) -> Vec<String> {
    let t = trace(path);
    t.records
        .iter()
        .map(|r| format!("{} {} {} {} {} {} {}", r.iter, r.dist_w, r.subopt, r.feas, r.kkt, r.lambda, r.phi))
        .collect()
}

#[test]
fn sweep_fits_a_rate_per_block_count_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "blocks = [2, 5, 10]\nseeds = [0, 1]\nmax_iter = 3000\ntol = 0\nrecord_every = 1\n[problem]\nkind = \"synthetic\"\n",
    );
    let (first, second) = (dir.path().join("a"), dir.path().join("b"));
    let stdout = ok(&rpdc(&["sweep", "--jobs", "3"], &cfg, &first));
    ok(&rpdc(&["sweep"], &cfg, &second));

    let rates = fs::read_to_string(first.join("synthetic_sweep_rates.csv")).unwrap();
    let rows: Vec<Vec<&str>> = rates.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3, "{rates}");
    for r in &rows {
        let alpha: f64 = r[2].parse().unwrap();
        assert!(alpha > 0.0 && alpha < 1.0, "{rates}");
    }
    assert!(stdout.contains("alpha_hat"));
    for kind in ["dist", "subopt", "feas"] {
        assert_svg(&first.join(format!("synthetic_sweep_{kind}.svg")));
    }

    assert_eq!(rates, fs::read_to_string(second.join("synthetic_sweep_rates.csv")).unwrap());
    assert_eq!(
        fs::read_to_string(first.join("synthetic_sweep_curves.csv")).unwrap(),
        fs::read_to_string(second.join("synthetic_sweep_curves.csv")).unwrap()
    );
    let (a, b) = (traces_in(&first), traces_in(&second));
    assert_eq!(a.len(), 6);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(strip_times(x), strip_times(y));
    }
}

#[test]
fn oracle_caches_the_saddle() {
    let dir = toy_svm_dir();
    let cfg = write_config(dir.path(), "[problem]\nkind = \"svm\"\ndata = \"toy.svm\"\nsigma = 1.0\n");
    let out = dir.path().join("out");
    let stdout = ok(&rpdc(&["oracle"], &cfg, &out));
    let cached: Vec<PathBuf> = fs::read_dir(out.join("saddles")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(cached.len(), 1);
    let name = cached[0].file_name().unwrap().to_string_lossy().into_owned();
    assert!(name.starts_with("saddle_") && name.ends_with(".csv"), "{name}");
    assert!(stdout.contains("F*       -1.0000000"), "{stdout}");
    // second run reads the cache, `solve` then has reference columns
    ok(&rpdc(&["oracle"], &cfg, &out));
    ok(&rpdc(&["solve"], &cfg, &out));
    let t = trace(&out.join("svm_rpdc_N2_seed0.csv"));
    assert!(t.records[0].subopt.is_finite());
}
