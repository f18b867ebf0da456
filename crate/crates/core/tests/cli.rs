use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const E5: &str = "\
[problem]
a = u
f = \"-ut + 2/u*ut^2\"

[reduction]
branch = plus
g = u

[grid]
x = 0.5, 2
t = 0, 1
u = 0.5, 2
ux = -2, 2
";

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(cmd: &str, cfg: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperint"))
        .arg(cmd)
        .arg(cfg)
        .args(extra)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Value of a `name = value` report line.
fn value(report: &str, name: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{name} = ")))
        .unwrap_or_else(|| panic!("no `{name}` in:\n{report}"))
        .parse()
        .unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn check_passes_on_e5() {
    let dir = TempDir::new().unwrap();
    let o = run("check", &write(&dir, "e5.ini", E5), &[]);
    let out = stdout(&o);
    assert!(o.status.success(), "{out}{}", stderr(&o));
    assert!(value(&out, "con1.max_scaled") <= 1e-10);
    assert!(value(&out, "det.max_abs") <= 1e-12);
    assert!(out.ends_with("result = pass\n"));
}

#[test]
fn check_fails_on_wrong_g() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.ini", &E5.replace("g = u", "g = 2*u"));
    let o = run("check", &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(value(&out, "con1.max_abs") > 1e-3);
    assert!(out.contains("result = fail"));
}

#[test]
fn check_fails_on_scaled_g() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "scaled.ini", &E5.replace("g = u", "g = u\ng_scale = 1.1"));
    let o = run("check", &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(value(&stdout(&o), "con1.max_abs") >= 1e-3);
}

#[test]
fn check_on_family_and_linear_sections() {
    let dir = TempDir::new().unwrap();
    let fam = write(&dir, "f.ini", "[family]\nid = E5\n[functions]\nu0 = 1 + sigma\n[grid]\nu = 0.5, 2\n");
    assert!(run("check", &fam, &[]).status.success());
    let good = write(&dir, "epd2.ini", "[linear]\nspec = epd\nalpha0 = 2\n");
    let o = run("check", &good, &[]);
    assert!(o.status.success(), "{}", stdout(&o));
    let bad = write(&dir, "epd1.ini", "[linear]\nspec = epd\nalpha0 = 1\n");
    let o = run("check", &bad, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(value(&stdout(&o), "structural.plus") >= 1e-2);
}

#[test]
fn unknown_key_is_named() {
    let dir = TempDir::new().unwrap();
    let o = run("check", &write(&dir, "k.ini", &E5.replace("branch", "brnach")), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`brnach`"), "{}", stderr(&o));
    let o = run("check", &write(&dir, "l.ini", "[linear]\nspec = kgf\nc0 = 1\nalpha0 = 2\n"), &[]);
    assert!(stderr(&o).contains("`alpha0`"), "{}", stderr(&o));
}

#[test]
fn expression_errors_report_offset() {
    let dir = TempDir::new().unwrap();
    let o = run("check", &write(&dir, "p.ini", &E5.replace("g = u", "g = \"2*sqrt(u\"")), &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 7") && err.contains("byte"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn simple_wave_past_breakdown_is_crossed() {
    let dir = TempDir::new().unwrap();
    let cfg = "[family]\nid = SIMPLE_WAVE\n[params]\na = u\n[functions]\nu0 = sigma\n[grid]\nx = -1, 1\nt = 0, 1.5\nnx = 5\nnt = 4\n";
    let o = run("family", &write(&dir, "sw.ini", cfg), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("crossed"), "{}", stderr(&o));
}

#[test]
fn family_csv_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "fam.ini",
        "[family]\nid = E5\n[functions]\nu0 = 1 + sigma/2\n[grid]\nx = 0, 1\nt = 0, 0.5\nnx = 6\nnt = 3\n",
    );
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let o = run("family", &cfg, &["-o", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("x,t,u\n") && !text.contains('\r'));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 18);
    for r in rows {
        // u = u0(σ) e^t along x = σ - u0(σ)(e^t - 1), linear in σ for this u0.
        let e = r[1].exp() - 1.0;
        let sigma = (r[0] + e) / (1.0 - e / 2.0);
        assert!((r[2] - (1.0 + sigma / 2.0) * r[1].exp()).abs() <= 1e-10, "{r:?}");
    }
}

#[test]
fn reduce_writes_strip() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{E5}\n[initial]\nu0 = 1 + sigma/2\ninterval = 0, 1\n").replace("t = 0, 1\n", "t = 0, 1\nt_end = 0.2\nn_sigma = 5\nh_t = 0.01\n");
    let out = dir.path().join("strip.csv");
    let o = run("reduce", &write(&dir, "r.ini", &cfg), &["--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("strip.breakdown_time = none"));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("sigma,t,x,u\n"));
    assert_eq!(csv_rows(&text).len(), 5 * 21);
}

#[test]
fn linear_general_telegraph() {
    let dir = TempDir::new().unwrap();
    let cfg = "[linear]\nspec = telegraph\nc = 1\nq1 = -2\nf1 = 1\n[grid]\nx = 0.5, 2\nt = 0, 1\nnx = 4\nnt = 3\n";
    let o = run("linear-general", &write(&dir, "t.ini", cfg), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 12);
    for r in rows {
        assert!((r[2] - ((r[0] - r[1]) / 2.0).exp()).abs() <= 1e-14);
    }
}

#[test]
fn linear_ivp_wave() {
    let dir = TempDir::new().unwrap();
    let cfg = "[linear]\na = 1\nphi = x^2\npsi = 0\ninterval = -2.5, 2.5\n[grid]\nx = -1, 1\nt = 0, 1\nnx = 5\nnt = 5\n";
    let o = run("linear-ivp", &write(&dir, "w.ini", cfg), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    for r in csv_rows(&stdout(&o)) {
        assert!((r[2] - (r[0] * r[0] + r[1] * r[1])).abs() <= 1e-6);
    }
}

#[test]
fn verify_telegraph_against_leapfrog() {
    let dir = TempDir::new().unwrap();
    let cfg = "\
[linear]
spec = telegraph
c = 1
q1 = -2
f1 = 1

[verify]
phi = exp(x/2)
psi = -exp(x/2)/2

[grid]
x = 0.5, 2
t = 0, 1
points = 100
dx = 0.01
dt = 0.005
";
    let o = run("verify", &write(&dir, "v.ini", cfg), &[]);
    let out = stdout(&o);
    assert!(o.status.success(), "{out}{}", stderr(&o));
    assert!(value(&out, "fd.max") <= 1e-5);
    assert!(value(&out, "compare.linf") <= 5e-4);
    let strict = write(&dir, "s.ini", &format!("{cfg}\n[tolerance]\ncompare = 1e-12\n"));
    assert_eq!(run("verify", &strict, &[]).status.code(), Some(1));
}

#[test]
fn sample_configs_pass() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = TempDir::new().unwrap();
    for (name, cmd) in [
        ("e5-check", "check"),
        ("e5-reduce", "reduce"),
        ("simple-wave", "family"),
        ("telegraph-general", "linear-general"),
        ("wave-ivp", "linear-ivp"),
        ("telegraph-verify", "verify"),
    ] {
        let out = dir.path().join(format!("{name}.csv"));
        let o = run(cmd, &root.join(format!("{name}.ini")), &["-o", out.to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}{}", stdout(&o), stderr(&o));
    }
}
