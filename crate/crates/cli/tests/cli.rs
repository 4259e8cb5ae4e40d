use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = "\
N = 4
n_small = 32
grid.n = 256
grid.L = 1.5
run.t_end = 0.5
run.output_every = 0.05
run.checkpoint_every = 0.25
tracers.shells = 32
tracers.per_shell = 128
tracers.cone_points = 8
tracers.line_points = 8
";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_thinflow"));
    c.env_remove("THINFLOW_OUT").env("RUST_LOG", "error");
    c
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_dirs(root: &Path) -> Vec<PathBuf> {
    let mut v: Vec<_> = fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn only_run(root: &Path) -> PathBuf {
    let v = run_dirs(root);
    assert_eq!(v.len(), 1, "{v:?}");
    v[0].clone()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("json error line");
    serde_json::from_str(line).unwrap()
}

#[test]
fn selftest_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().args(["selftest", "--out"]).arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    let pass = text.lines().filter(|l| l.starts_with("PASS ")).count();
    assert!(pass >= 10, "{text}");
    assert!(!text.contains("FAIL "));
    let dir = only_run(tmp.path());
    assert!(dir.join("selftest.txt").is_file());
}

#[test]
fn zero_length_simulation_writes_one_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &format!("{SMALL}run.t_end = 0.0\n").replace("run.t_end = 0.5\n", ""));
    let out = tmp.path().join("runs");
    let o = bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = only_run(&out);
    let frames = fs::read_to_string(dir.join("frames.csv")).unwrap();
    let lines: Vec<_> = frames.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(
        lines[0],
        "t,energy,enstrophy,palinstrophy,energy_L,energy_S,cross_energy,asym,sup_u,dt"
    );
    assert!(lines[1].starts_with("0.0000000000000000e0,"));
    assert_eq!(manifest(&dir)["status"], "finished");
}

#[test]
fn prescribed_study_passes_every_row() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().args(["prescribed", "--out"]).arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = only_run(tmp.path());
    let text = fs::read_to_string(dir.join("prescribed.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "M,t,energy,bound,pass");
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.ends_with(",true")), "{text}");
    let m = manifest(&dir);
    assert_eq!(m["grid"]["n"], 1024);
    assert_eq!(m["filter"], "off");
}

#[test]
fn halted_run_resumes_bitwise_and_completed_resume_is_a_no_op() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));

    let o = bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&a).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let full = only_run(&a);

    let o = bin()
        .args(["simulate", "--halt-at", "0.25", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&b)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let part = only_run(&b);
    assert_eq!(manifest(&part)["status"], "halted");
    let frames = fs::read_to_string(part.join("frames.csv")).unwrap();
    assert_eq!(frames.lines().count(), 1 + 6);

    let o = bin().arg("resume").arg(&part).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["frames.csv", "transfer.csv", "imeasure.csv", "classify.csv", "events.csv", "tracers.csv"] {
        assert_eq!(fs::read(full.join(f)).unwrap(), fs::read(part.join(f)).unwrap(), "{f}");
    }
    assert_eq!(
        fs::read(full.join("snapshots/omega_final.thnf")).unwrap(),
        fs::read(part.join("snapshots/omega_final.thnf")).unwrap()
    );

    let before = fs::read(part.join("manifest.json")).unwrap();
    let o = bin().arg("simulate").arg("--resume").arg(&part).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("already complete"));
    assert_eq!(fs::read(part.join("manifest.json")).unwrap(), before);
}

#[test]
fn corrupted_checkpoint_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL);
    let o = bin()
        .args(["transfer", "--halt-at", "0.25", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("runs"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = only_run(&tmp.path().join("runs"));
    let target = dir.join("checkpoint/omega.thnf");
    let mut bytes = fs::read(&target).unwrap();
    let k = bytes.len() - 3;
    bytes[k] ^= 0x40;
    fs::write(&target, bytes).unwrap();
    let o = bin().arg("resume").arg(&dir).output().unwrap();
    assert_eq!(code(&o), 1);
    let err = stderr_json(&o);
    assert_eq!(err["error"], "checksum");
    assert_eq!(err["exit_code"], 1);
}

#[test]
fn manifest_lists_every_file_with_its_checksum() {
    use sha2::{Digest, Sha256};
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &SMALL.replace("run.t_end = 0.5", "run.t_end = 0.3"));
    let o = bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(tmp.path().join("r")).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = only_run(&tmp.path().join("r"));
    let m = manifest(&dir);
    let listed: Vec<String> = m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            let path = f["path"].as_str().unwrap().to_string();
            let bytes = fs::read(dir.join(&path)).unwrap();
            assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64, "{path}");
            assert_eq!(f["sha256"].as_str().unwrap(), hex_digest(&Sha256::digest(&bytes)), "{path}");
            path
        })
        .collect();
    let mut on_disk = Vec::new();
    collect(&dir, &dir, &mut on_disk);
    on_disk.retain(|p| p != "manifest.json");
    on_disk.sort();
    let mut sorted = listed.clone();
    sorted.sort();
    assert_eq!(sorted, on_disk);
    for key in ["scenario", "config", "started", "finished", "horizon", "blowup_factor", "threads"] {
        assert!(!m[key].is_null(), "{key}");
    }
    assert_eq!(m["bit_deterministic"], true);
}

fn hex_digest(b: &[u8]) -> String {
    b.iter().map(|x| format!("{x:02x}")).collect()
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<String>) {
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            collect(root, &p, out);
        } else {
            out.push(p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/"));
        }
    }
}

#[test]
fn runs_never_overwrite_and_respect_the_output_variable() {
    let tmp = tempfile::tempdir().unwrap();
    for _ in 0..2 {
        let o = bin()
            .arg("selftest")
            .env("THINFLOW_OUT", tmp.path())
            .current_dir(tmp.path())
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
    }
    let dirs = run_dirs(tmp.path());
    assert_eq!(dirs.len(), 2);
    assert!(dirs.iter().all(|d| d.file_name().unwrap().to_string_lossy().starts_with("selftest-")));
}

#[test]
fn config_errors_exit_1_with_a_json_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown.toml", "N = 4\nresolution = 3\n"),
        ("nested.toml", "grid.size = 512\n"),
        ("value.toml", "run.cfl = 1.5\n"),
    ];
    for (name, text) in cases {
        let cfg = write_config(tmp.path(), name, text);
        let o = bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(tmp.path()).output().unwrap();
        assert_eq!(code(&o), 1, "{name}");
        assert_eq!(stderr_json(&o)["error"], "invalid_config", "{name}");
    }
    let o = bin().args(["nonsense", "--out"]).arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr_json(&o)["message"].as_str().unwrap().contains("unknown mode"));
    let o = bin().args(["simulate", "--bogus-flag"]).output().unwrap();
    assert_eq!(code(&o), 1);
    let o = bin().args(["simulate", "--halt-at", "0.1", "--out"]).arg(tmp.path()).args(["--config"]).arg(write_config(tmp.path(), "nock.toml", "run.checkpoint_every = 0.0\n")).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn missing_config_file_is_an_io_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["simulate", "--config"])
        .arg(tmp.path().join("absent.toml"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
    assert_eq!(stderr_json(&o)["error"], "io");
}

#[test]
fn stability_sweep_with_parallel_members() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "N = 4\nn_small = 32\ngrid.n = 256\ngrid.L = 1.5\nperturbation.radius = 0.12\nperturbation.center = [0.3, -0.2]\n\
                run.t_end = 0.1\nrun.output_every = 0.05\nrun.checkpoint_every = 0.0\n\
                tracers.shells = 8\ntracers.per_shell = 16\ntracers.cone_points = 4\ntracers.line_points = 4\n";
    let cfg = write_config(tmp.path(), "s.toml", text);
    let o = bin()
        .args(["stability", "--jobs", "2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("r"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = only_run(&tmp.path().join("r"));
    let text = fs::read_to_string(dir.join("stability.csv")).unwrap();
    assert!(text.starts_with("eps,t,stretch_diff,jacobian_diff,bound,within_bound\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 3);
    let m = manifest(&dir);
    assert_eq!(m["jobs"], 2);
    let resume = bin().arg("resume").arg(&dir).output().unwrap();
    assert_eq!(code(&resume), 0);
}

#[test]
fn zlatos_table_and_resume_mode_mismatch() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().args(["zlatos", "--out"]).arg(tmp.path()).args(["--config"]).arg(write_config(tmp.path(), "z.toml", "N = 4\nn_small = 32\ngrid.n = 512\n")).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = run_dirs(tmp.path()).into_iter().find(|p| p.is_dir()).unwrap();
    let text = fs::read_to_string(dir.join("zlatos.csv")).unwrap();
    assert!(text.starts_with("t,x1,x2,i,u_over_x,Q,B,bound,exponent\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 16);
    let o = bin().args(["simulate", "--resume"]).arg(&dir).output().unwrap();
    assert_eq!(code(&o), 1);
}
