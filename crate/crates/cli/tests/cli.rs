use std::process::Command as Process;

use dicke_cli::run;

fn dicke(args: &[&str]) -> dicke_cli::Outcome {
    run(std::iter::once("dicke").chain(args.iter().copied()))
}

/// Data rows (no `#` lines, no header) split into fields.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn thermo_zero_coupling_matches_closed_form() {
    let out = dicke(&["thermo", "--kinds", "AH,DICKE", "--n-list", "3,5", "--beta-list", "0.7", "--lambda-list", "0"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let beta = 0.7f64;
    let spin = -(2.0 * (0.5 * beta).cosh()).ln() / beta;
    for r in rows(&out.stdout) {
        let n: f64 = num(&r[1]);
        let mut f = spin;
        if r[0] == "DICKE" {
            let m: f64 = num(&r[5]);
            f -= ((1.0 - (-beta * (m + 1.0)).exp()) / (1.0 - (-beta).exp())).ln() / (beta * n);
        }
        assert!((num(&r[6]) - f).abs() < 1e-10, "{r:?}");
    }
    assert_eq!(rows(&out.stdout).len(), 4);
}

#[test]
fn thermo_header_and_format() {
    let out = dicke(&["thermo", "--kinds", "LZ", "--n-list", "2", "--beta-list", "1", "--lambda-list", "0.5"]);
    let header = out.stdout.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "kind,N,beta,lambda,epsilon,M,f,u,s,exp_photons_per_N,exp_Jx2_per_N2,exp_Jz_per_N");
    let r = &rows(&out.stdout)[0];
    assert_eq!(r[2], "1.0000000000000000e0");
    assert_eq!(r[5], "");
    assert_eq!(r[9], "");
    assert!(!r[10].is_empty());
    assert!(!out.stdout.contains('\r'));
    let bare = dicke(&["thermo", "--no-expectations", "--kinds", "LZ", "--n-list", "2", "--beta-list", "1", "--lambda-list", "0.5"]);
    assert_eq!(rows(&bare.stdout)[0][10], "");
    assert_eq!(rows(&bare.stdout)[0][6], r[6]);
}

#[test]
fn empty_grid_is_a_config_error() {
    let out = dicke(&["thermo", "--n-list", "", "--beta-list", "1", "--lambda-list", "0"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("empty grid: N"), "{}", out.stderr);
    assert_eq!(dicke(&["thermo", "--beta-list", "1", "--lambda-list", "0"]).code, 2);
    assert_eq!(dicke(&["thermo", "--n-list", "2", "--beta-list", "-1", "--lambda-list", "0"]).code, 2);
    assert_eq!(dicke(&["thermo", "--n-list", "2", "--beta-list", "1", "--lambda-list", "0", "--kinds", "XY"]).code, 2);
    assert_eq!(dicke(&["thermo", "--bogus"]).code, 2);
}

#[test]
fn numerical_failure_exit_code() {
    let out = dicke(&["thermo", "--kinds", "DICKE", "--n-list", "2", "--beta-list", "1", "--lambda-list", "0.5", "--max-dim", "10"]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("cutoff"));
}

#[test]
fn reruns_are_byte_identical_across_threads() {
    let args = ["thermo", "--kinds", "DICKE,CT", "--n-list", "2,3,6", "--beta-list", "0.5,2", "--lambda-list", "0.3,0.9"];
    let a = dicke(&[&args[..], &["--threads", "1"]].concat());
    let b = dicke(&[&args[..], &["--threads", "3"]].concat());
    let c = dicke(&args);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn gap_identical_kinds_suppresses_fit() {
    let out = dicke(&["gap", "--kinds", "AH,AH", "--n-list", "2,4,8", "--beta-list", "1", "--lambda-list", "0.6"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("underflow points: all"));
    assert!(rows(&out.stdout).iter().all(|r| num(&r[10]) == 0.0));
}

#[test]
fn gap_needs_two_kinds() {
    let out = dicke(&["gap", "--kinds", "AH", "--n-list", "2", "--beta-list", "1", "--lambda-list", "1"]);
    assert_eq!(out.code, 2);
    let out = dicke(&["gap", "--kinds", "AH,CT", "--n-list", "4,2", "--beta-list", "1", "--lambda-list", "1"]);
    assert_eq!(out.code, 2);
}

#[test]
fn gap_dicke_ah_decays() {
    let out = dicke(&["gap", "--kinds", "DICKE,AH", "--n-list", "4,8,16", "--beta-list", "1", "--lambda-list", "0.6"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let fit = out.stdout.lines().find(|l| l.starts_with("# fit")).unwrap();
    let p: f64 = num(fit.split("p=").nth(1).unwrap().split(',').next().unwrap());
    assert!(p >= 0.4, "{fit}");
    assert!(out.stdout.contains("# strictly_decreasing beta=1.0000000000000000e0 lambda=5.9999999999999998e-1: 1"));
    assert!(!out.stdout.contains("# non_decay"));
}

#[test]
fn gap_dicke_ct_does_not_decay() {
    let out = dicke(&["gap", "--kinds", "DICKE,CT", "--n-list", "2,4,16", "--beta-list", "1", "--lambda-list", "0.6"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("# non_decay beta=1.0000000000000000e0 lambda=5.9999999999999998e-1: 1"));
    let short = dicke(&["gap", "--kinds", "DICKE,CT", "--n-list", "2,4", "--beta-list", "1", "--lambda-list", "0.6"]);
    assert!(short.stdout.contains(": n/a"));
}

#[test]
fn limits_pass_on_defaults() {
    let out = dicke(&["limits"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(!out.stdout.contains("FAIL"));
    let kct = out.stdout.lines().find(|l| l.contains("kappa_CT(0.01)")).unwrap();
    assert!(kct.contains("value=2.99"), "{kct}");
    assert!(out.stdout.contains("slope=2.0000000000000000e0"));
}

#[test]
fn concurrence_scan_table() {
    let out = dicke(&["concurrence", "--kinds", "AH,DICKE", "--n-list", "8", "--lambda-list", "0:1:0.05"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let rs = rows(&out.stdout);
    assert_eq!(rs.len(), 42);
    for r in rs.iter().filter(|r| num(&r[2]) == 0.0) {
        assert_eq!(num(&r[3]), 0.0);
    }
    assert!(rs.iter().all(|r| r[5] == "0"));
    let argmax: Vec<(String, f64, f64)> = out
        .stdout
        .lines()
        .filter(|l| l.starts_with("# argmax"))
        .map(|l| {
            let field = |k: &str| num(l.split(k).nth(1).unwrap().split(',').next().unwrap());
            (l.split("kind=").nth(1).unwrap().split(' ').next().unwrap().to_string(), field("lambda="), field("rescaledC="))
        })
        .collect();
    assert_eq!(argmax[0].0, "AH");
    assert!((0.4..=0.7).contains(&argmax[0].1));
    assert!(argmax[0].2 >= argmax[1].2);
    assert_eq!(dicke(&["concurrence", "--kinds", "LZ", "--n-list", "4", "--lambda-list", "0.5"]).code, 2);
}

#[test]
fn oracle_check_default_and_fault() {
    let out = dicke(&["oracle-check"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let passed: usize = out
        .stdout
        .lines()
        .find_map(|l| l.strip_prefix("checks passed: "))
        .and_then(|s| s.split(' ').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(passed >= 12);
    let bad = dicke(&["oracle-check", "--inject-fault"]);
    assert_eq!(bad.code, 5);
    assert!(bad.stderr.contains("worst offender"));
    let big = dicke(&["oracle-check", "--max-n", "4"]);
    assert_eq!(big.code, 0, "{}", big.stderr);
    assert!(big.stdout.contains("spectrum DICKE N=4"));
    assert!(!out.stdout.contains("N=4"));
}

#[test]
fn config_file_with_overrides() {
    let dir = std::env::temp_dir().join(format!("dicke-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.conf");
    let out_path = dir.join("out.csv");
    std::fs::write(&cfg, "# sweep\nkinds = AH\nn-list = 2,3\nbeta-list = 1\nlambda-list = 0.2\nthreads = 2\n").unwrap();
    let a = dicke(&["thermo", "--config", cfg.to_str().unwrap(), "--n-list", "4", "--out", out_path.to_str().unwrap()]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert!(a.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let rs = rows(&text);
    assert_eq!(rs.len(), 1);
    assert_eq!(rs[0][1], "4");
    assert!(text.contains("# n-list: 4\n"));
    assert!(!text.contains("threads"));
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(dicke(&["limits", "--config", cfg.to_str().unwrap()]).code, 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_dicke");
    let ok = Process::new(bin).arg("--version").output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains(env!("CARGO_PKG_VERSION")));
    let bad = Process::new(bin).args(["thermo", "--n-list", ""]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("empty grid: N"));
    let fault = Process::new(bin).args(["oracle-check", "--inject-fault", "--max-n", "1"]).output().unwrap();
    assert_eq!(fault.status.code(), Some(5));
}
