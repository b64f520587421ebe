use std::path::Path;
use std::process::Command;

use nlsqp::config::RunConfig;

const PLANE_WAVE: &str = "[problem]\nd = 1\np = 1\ndelta = 1e-3\nj = [[2]]\na = [0.7]\n";
const TWO_MODE: &str = "[problem]\nd = 1\np = 1\ndelta = 1e-3\nj = [[1], [2]]\na = [0.6, 0.8]\n";
const PLANAR: &str = "[problem]\nd = 2\np = 2\ndelta = 1e-3\nj = [[1, 0], [0, 1]]\na = [0.6, 0.8]\n";

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn nlsqp(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_nlsqp"))
        .args(args)
        .env("NLSQP_THREADS", "2")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_two_mode_passes_both_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "two_mode.toml", TWO_MODE);
    let (code, out, _) = nlsqp(&["check", s(&cfg)]);
    assert_eq!(code, 0, "{out}");
    let v: toml::Value = toml::from_str(&out).unwrap();
    assert_eq!(v["condition_i"]["verdict"].as_str(), Some("Pass"));
    assert_eq!(v["condition_ii"]["verdict"].as_str(), Some("Pass"));
    let parts = v["condition_ii"]["parts"].as_array().unwrap();
    assert_eq!(parts.len(), 2);
    assert_eq!(v["header"]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn check_prints_the_rank_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let text = TWO_MODE
        .replace("[[1], [2]]", "[[1], [2], [3], [4]]")
        .replace("[0.6, 0.8]", "[0.5, 0.5, 0.5, 0.5]");
    let cfg = write(dir.path(), "four.toml", &text);
    let (code, out, _) = nlsqp(&["check", s(&cfg)]);
    let v: toml::Value = toml::from_str(&out).unwrap();
    assert_eq!(v["rank_test"]["verdict"].as_str(), Some("Inconclusive"));
    let kernel: Vec<i64> = v["rank_test"]["kernel"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_integer().unwrap())
        .collect();
    assert_eq!(kernel, vec![-1, 3, -3, 1]);
    // the verdict comes from the walk and graph checks
    assert_eq!(code, 0);
    assert_eq!(v["condition_ii"]["verdict"].as_str(), Some("Pass"));
}

#[test]
fn solve_plane_wave_reports_the_modulated_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "plane_wave.toml", PLANE_WAVE);
    let out = dir.path().join("run");
    let (code, _, err) = nlsqp(&["solve", s(&cfg), "--out", s(&out)]);
    assert_eq!(code, 0, "{err}");
    let v: toml::Value = toml::from_str(&std::fs::read_to_string(out.join("report.toml")).unwrap()).unwrap();
    let w = v["frequencies"]["omega"][0].as_float().unwrap();
    assert!((w - (4.0 + 1e-3 * 0.49)).abs() < 1e-12);
    assert_eq!(v["gate"]["condition_i"].as_str(), Some("Pass"));
    assert_eq!(v["convergence"]["iterations"].as_integer(), Some(1));

    let (code, report, err) = nlsqp(&["verify", s(&cfg), "--solution", s(&out.join("solution.txt"))]);
    assert_eq!(code, 0, "{err}");
    let v: toml::Value = toml::from_str(&report).unwrap();
    assert!(v["collocation"]["sup"].as_float().unwrap() < 1e-12);
    assert!(v["drift"]["mass_error"].as_float().unwrap() < 1e-10);
}

#[test]
fn solve_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "two_mode.toml", TWO_MODE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(nlsqp(&["solve", s(&cfg), "--out", s(&a)]).0, 0);
    assert_eq!(nlsqp(&["solve", s(&cfg), "--out", s(&b)]).0, 0);
    for f in ["report.toml", "solution.txt", "config.toml"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn sweep_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{PLANE_WAVE}[sweep]\nn_samples = 200\nseed = 7\nepsilons = [1e-1, 1e-3]\n");
    let cfg = write(dir.path(), "sweep.toml", &text);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(nlsqp(&["sweep", s(&cfg), "--out", s(&a)]).0, 0);
    assert_eq!(nlsqp(&["sweep", s(&cfg), "--out", s(&b)]).0, 0);
    let table = std::fs::read_to_string(&a).unwrap();
    assert_eq!(table, std::fs::read_to_string(&b).unwrap());
    assert_eq!(table.lines().count(), 3);
    let samples = std::fs::read_to_string(dir.path().join("a-samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 201);
    assert!(samples.starts_with("sample,a1,min_normalized_det,diophantine_margin"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let zero = write(dir.path(), "zero.toml", &PLANE_WAVE.replace("[[2]]", "[[0]]"));
    let (code, _, err) = nlsqp(&["check", s(&zero)]);
    assert_eq!(code, 4);
    assert!(err.contains("j_k != 0") && err.contains("line 5"), "{err}");

    // right angle at j_c violates non-intersection in d = 2
    let angle = "[problem]\nd = 2\np = 1\ndelta = 1e-3\nj = [[-4, 0], [-2, -3], [-4, -3]]\na = [0.5, 0.5, 0.5]\n";
    let angle = write(dir.path(), "angle.toml", angle);
    assert_eq!(nlsqp(&["check", s(&angle)]).0, 1);
    assert_eq!(nlsqp(&["solve", s(&angle), "--out", s(&out)]).0, 1);

    let short = write(dir.path(), "short.toml", &format!("{TWO_MODE}[newton]\nmax_iter = 1\n"));
    assert_eq!(nlsqp(&["solve", s(&short), "--out", s(&out)]).0, 2);

    let excised = write(dir.path(), "excised.toml", &format!("{PLANE_WAVE}[newton]\nexcision_epsilon = 10.0\n"));
    let (code, _, err) = nlsqp(&["solve", s(&excised), "--out", s(&out)]);
    assert_eq!(code, 3, "{err}");

    assert_eq!(nlsqp(&["check", s(&dir.path().join("missing.toml"))]).0, 4);
}

#[test]
fn planar_config_round_trips() {
    let c = RunConfig::parse(PLANAR).unwrap();
    let text = c.to_toml();
    let again = RunConfig::parse(&text).unwrap();
    assert_eq!(c, again);
    assert_eq!(text, again.to_toml());
    assert_eq!(c.hash(), again.hash());
}
