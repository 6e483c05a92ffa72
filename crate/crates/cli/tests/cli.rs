use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dataval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dataval"))
        .args(args)
        .env_remove("DATAVAL_REF_BOUND")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/assets/fixtures").join(name)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn nominal_run_exits_zero() {
    let o = dataval(&["run", "--data", p(&fixture("nominal.xml"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("result: PASS (exit 0)"));
}

#[test]
fn mutation_run_names_property_and_counterexample() {
    let o = dataval(&["run", "--data", p(&fixture("sig_prot_upstream.xml"))]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL     p_sig_prot_afterwards"), "{out}");
    assert!(out.contains("counterexample: mansig = s3"), "{out}");
}

#[test]
fn records_format_is_json_lines() {
    let o = dataval(&["run", "--format", "records", "--workers", "2", "--data", p(&fixture("kp_below_eps.xml"))]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.lines().next().unwrap().contains("\"record\":\"header\""));
    assert!(out.contains("\"record\":\"summary\""));
    assert!(out.contains("\"exit\":1"));
}

#[test]
fn binary_pipeline_and_flipped_bit() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("nominal.dval");
    let o = dataval(&["encode", "--data", p(&fixture("nominal.xml")), "-o", p(&bin)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(dataval(&["roundtrip", "--data", p(&bin)]).status.code(), Some(0));
    assert_eq!(dataval(&["run", "--data", p(&bin)]).status.code(), Some(0));

    let xml = dir.path().join("decoded.xml");
    assert_eq!(dataval(&["decode", "--data", p(&bin), "-o", p(&xml)]).status.code(), Some(0));
    assert_eq!(dataval(&["run", "--data", p(&xml)]).status.code(), Some(0));

    let mut bytes = std::fs::read(&bin).unwrap();
    bytes[30] ^= 0x10;
    let flipped = dir.path().join("flipped.dval");
    std::fs::write(&flipped, bytes).unwrap();
    assert_eq!(dataval(&["roundtrip", "--data", p(&flipped)]).status.code(), Some(4));
    let o = dataval(&["run", "--data", p(&flipped)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("round trip failed"));
    assert!(stdout(&o).contains("0 properties"));
}

#[test]
fn load_errors_exit_five() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.xml");
    std::fs::write(&bad, "<network><block").unwrap();
    let o = dataval(&["run", "--data", p(&bad)]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("error:"));
    assert_eq!(dataval(&["run", "--data", p(&dir.path().join("missing.xml"))]).status.code(), Some(5));
}

#[test]
fn main_only_engine_warns() {
    let o = dataval(&["run", "--engine", "main", "--data", p(&fixture("nominal.xml"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("single-chain"));
    assert!(stdout(&o).starts_with("WARNING: single-chain"));
}

#[test]
fn ref_bound_falls_back_to_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_dataval"))
        .args(["run", "--data", p(&fixture("nominal.xml"))])
        .env("DATAVAL_REF_BOUND", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains(" 0 reference-incomplete"), "{}", stdout(&o));
}

#[test]
fn explain_expands_one_level_per_flag() {
    let data = fixture("sig_prot_behind.xml");
    let base = ["explain", "--property", "p_sig_prot_afterwards", "--data", p(&data)];
    let plain = stdout(&dataval(&base));
    assert!(plain.contains("counterexample: mansig = s1"), "{plain}");
    assert!(!plain.contains("definitions, level"));
    let mut once = base.to_vec();
    once.push("-x");
    let once = stdout(&dataval(&once));
    assert!(once.contains("definitions, level 1") && !once.contains("level 2"), "{once}");
    let mut twice = base.to_vec();
    twice.push("-xx");
    assert!(stdout(&dataval(&twice)).contains("definitions, level 2"));
    assert_eq!(dataval(&["explain", "--data", p(&data)]).status.code(), Some(5));
}

#[test]
fn harness_and_trace() {
    let o = dataval(&["test"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("harness: PASS\n"));
    let o = dataval(&["test", "--fixtures", p(&fixture(""))]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let dir = tempfile::tempdir().unwrap();
    let reqs = dir.path().join("requirements");
    std::fs::write(&reqs, "REQ_SIG_PROT\nREQ_UNCOVERED\n").unwrap();
    let o = dataval(&["trace", "--requirements", p(&reqs), "--data", p(&fixture("nominal.xml"))]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("REQ_UNCOVERED") && out.contains("ORPHAN"), "{out}");
    assert!(out.contains("p_sig_prot_afterwards  TRUE"), "{out}");
}

#[test]
fn gen_writes_networks_and_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.xml");
    let args = ["gen", "--seed", "9", "--blocks", "20", "--switches", "2", "--flips", "2", "-o", p(&net)];
    assert_eq!(dataval(&args).status.code(), Some(0));
    assert_eq!(dataval(&["run", "--data", p(&net)]).status.code(), Some(0));

    let fx = dir.path().join("fx");
    assert_eq!(dataval(&["gen", "--fixtures", p(&fx)]).status.code(), Some(0));
    for entry in std::fs::read_dir(fixture("")).unwrap() {
        let entry = entry.unwrap();
        let shipped = std::fs::read(entry.path()).unwrap();
        assert_eq!(std::fs::read(fx.join(entry.file_name())).unwrap(), shipped, "{:?}", entry.file_name());
    }
    assert_eq!(dataval(&["gen", "--blocks", "2", "--switches", "5"]).status.code(), Some(5));
}

#[test]
fn usage_errors_exit_five() {
    assert_eq!(dataval(&["run"]).status.code(), Some(5));
    assert_eq!(dataval(&["run", "--engine", "neither", "--data", "x"]).status.code(), Some(5));
    assert_eq!(dataval(&["--help"]).status.code(), Some(0));
}
