use std::fs;
use std::process::{Command, Output};

fn btcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btcert")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

#[test]
fn table2_defaults_pass() {
    let o = btcert(&["table2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("# summary.pass=true"));
    assert!(text.contains("lambda11,lambda12,lambda21,lambda11p,Lambda,M,column,n4,rhs,reference_rhs,tolerance,pass"));
    // the unbounded last range
    assert!(text.lines().any(|l| l.starts_with("0.86,inf,")));
}

#[test]
fn psi_check_verdicts() {
    assert_eq!(code(&btcert(&["psi-check", "--M", "7"])), 0);
    assert_eq!(code(&btcert(&["psi-check", "--M", "5"])), 1);
    assert_eq!(code(&btcert(&["psi-check", "--eta", "1.5"])), 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&btcert(&["g2", "--bogus"])), 2);
    assert_eq!(code(&btcert(&[])), 2);
    assert_eq!(code(&btcert(&["table1", "--format", "xml"])), 2);
    assert_eq!(code(&btcert(&["table2", "--phi", "0.3"])), 2);
    assert_eq!(code(&btcert(&["g2", "--config", "/nonexistent/btcert.conf"])), 2);
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    fs::write(&path, "[psi]\nM = 7\nzeta = 1\n").unwrap();
    let o = btcert(&["psi-check", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("zeta"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    fs::write(&path, "# scalar check\n[psi]\nM = 5\neta = 0.05\n[output]\nformat = json\n").unwrap();
    let p = path.to_str().unwrap();
    let o = btcert(&["psi-check", "--config", p]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["psi.eta"], "0.05");
    // flags override the file
    let o = btcert(&["psi-check", "--config", p, "--M", "7", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("# config.psi.M=7"));
}

#[test]
fn coverage_gap_exits_3() {
    let o = btcert(&["table2", "--lambda-end", "1.30"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not cover"));
}

#[test]
fn json_writes_inf_and_embeds_config() {
    let o = btcert(&["table1", "--format", "json", "--lambda-end", "1.30"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"], "density_table");
    assert_eq!(v["config"]["table1.lambda_end"], "1.3");
    assert_eq!(v["config"]["convention.li"], "integral from 2 to x of dt/log t");
    let rows = v["rows"].as_array().unwrap();
    assert!(rows.iter().any(|r| r["bound"] == "inf"));
    assert!(rows.iter().all(|r| r["bound"].is_u64() || r["bound"] == "inf"));
}

#[test]
fn reports_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = btcert(&["g2", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let (x, y) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.contains("piece,index,value"));
    assert!(text.contains("# config.weights.lambda_min=0.35"));
}

#[test]
fn all_writes_one_file_per_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let o = btcert(&["all", "--out", out.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for stage in ["g2", "table1", "table2", "siegel", "psi-check", "verify-primes"] {
        let text = fs::read_to_string(out.join(format!("{stage}.json"))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["summary"]["pass"], true, "{stage}");
        assert_eq!(v["config"]["assembly.M"], "7.999");
    }
}

#[test]
fn all_reports_coverage_over_failures() {
    let dir = tempfile::tempdir().unwrap();
    let o = btcert(&["all", "--out", dir.path().to_str().unwrap(), "--lambda-end", "1.30", "--M", "5"]);
    assert_eq!(code(&o), 3);
    assert!(!dir.path().join("table2.csv").exists());
    assert!(dir.path().join("siegel.csv").exists());
}

#[test]
fn verify_primes_small_range() {
    let o = btcert(&["verify-primes", "--q", "3,5", "--x", "100000"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("# summary.q3.partition=true"));
    assert!(text.contains("# summary.q5.label=empirical illustration"));
    // 2 classes mod 3, 4 classes mod 5
    let data = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(data, 1 + 2 + 4);
}

#[test]
fn siegel_rejects_oversized_b() {
    assert_eq!(code(&btcert(&["siegel", "--B", "10"])), 2);
}
