//! Acceptance criteria 1-8. Every criterion runs through the `dicke` command
//! line front end, so criterion 8 can replay the same invocations on another
//! thread count and compare bytes.

use std::time::{Duration, Instant};

use dicke_core::entanglement::{wootters_concurrence, TwoQubitState};

struct Run {
    args: Vec<String>,
    text: String,
}

struct Verdict {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn cli(args: &[&str], threads: usize) -> (dicke_cli::Outcome, Duration) {
    let t = threads.to_string();
    let full = std::iter::once("dicke").chain(args.iter().copied()).chain(["--threads", t.as_str()]);
    let start = Instant::now();
    let out = dicke_cli::run(full);
    (out, start.elapsed())
}

/// Runs once on 4 threads and records the text for criterion 8.
fn record(runs: &mut Vec<Run>, args: &[&str]) -> Result<(String, Duration), String> {
    let (out, took) = cli(args, 4);
    if out.code != 0 {
        return Err(format!("`dicke {}` exited {}: {}", args.join(" "), out.code, out.stderr.trim()));
    }
    runs.push(Run { args: args.iter().map(|s| s.to_string()).collect(), text: out.stdout.clone() });
    Ok((out.stdout, took))
}

fn rows(csv: &str) -> Vec<Vec<&str>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or(f64::NAN)
}

/// `(name, deviation)` from oracle-check report lines.
fn oracle_lines(text: &str) -> Vec<(&str, f64)> {
    text.lines()
        .filter_map(|l| l.strip_prefix("PASS ").or_else(|| l.strip_prefix("FAIL ")))
        .filter_map(|l| {
            let (name, rest) = l.split_once(": deviation=")?;
            Some((name, num(rest.split(',').next()?)))
        })
        .collect()
}

fn summary_value<'a>(text: &'a str, prefix: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(prefix))
}

fn criterion_1(runs: &mut Vec<Run>) -> Result<(bool, String), String> {
    let args = ["thermo", "--no-expectations", "--kinds", "DICKE,AH", "--n-list", "1:16:1", "--beta-list", "0.5,1,2,5", "--lambda-list", "0"];
    let (text, took) = record(runs, &args)?;
    let mut worst = 0.0f64;
    let table = rows(&text);
    for r in &table {
        let (n, beta, f) = (num(r[1]), num(r[2]), num(r[6]));
        let mut closed = -(2.0 * (0.5 * beta).cosh()).ln() / beta;
        if r[0] == "DICKE" {
            let m = num(r[5]);
            closed -= ((1.0 - (-beta * (m + 1.0)).exp()) / (1.0 - (-beta).exp())).ln() / (beta * n);
        }
        worst = worst.max((f - closed).abs());
    }
    let pass = table.len() == 2 * 16 * 4 && worst <= 1e-10 && took < Duration::from_secs(10);
    Ok((pass, format!("{} rows, max |f - closed form| = {worst:.2e} (tol 1e-10), {:.1} s (limit 10 s)", table.len(), took.as_secs_f64())))
}

fn criteria_2_and_7(runs: &mut Vec<Run>) -> Result<[(bool, String); 2], String> {
    let (text, took) = record(runs, &["oracle-check", "--max-n", "4"])?;
    let lines = oracle_lines(&text);
    let pick = |prefix: &str| -> Vec<(&str, f64)> { lines.iter().copied().filter(|(n, _)| n.starts_with(prefix)).collect() };
    let worst = |v: &[(&str, f64)]| v.iter().map(|x| x.1).fold(0.0f64, f64::max);

    let free = pick("free energy");
    let spectra = pick("spectrum");
    let spectrum_ns: Vec<bool> = (1..=4).map(|n| spectra.iter().any(|(name, _)| name.contains(&format!(" N={n} ")))).collect();
    let pass2 = free.len() == 32
        && spectrum_ns.iter().all(|&b| b)
        && worst(&free) <= 1e-10
        && worst(&spectra) <= 1e-10
        && took < Duration::from_secs(30);
    let detail2 = format!(
        "{} free-energy checks max dev {:.2e}, {} spectrum checks (N <= 4) max dev {:.2e} (tol 1e-10), {:.1} s (limit 30 s)",
        free.len(),
        worst(&free),
        spectra.len(),
        worst(&spectra),
        took.as_secs_f64()
    );

    let pairs = pick("pair reduction");
    let w = pick("W state N=3");
    let h = 0.5;
    let bell = TwoQubitState::new([[h, 0.0, 0.0, h], [0.0; 4], [0.0; 4], [h, 0.0, 0.0, h]]).map_err(|e| e.to_string())?;
    let mut down = [[0.0; 4]; 4];
    down[3][3] = 1.0;
    let product = TwoQubitState::new(down).map_err(|e| e.to_string())?;
    let c_bell = wootters_concurrence(&bell).map_err(|e| e.to_string())?;
    let c_prod = wootters_concurrence(&product).map_err(|e| e.to_string())?;
    let pair_ns = [2, 3].iter().all(|n| pairs.iter().any(|(name, _)| name.contains(&format!("N={n} "))));
    let pass7 = pair_ns
        && worst(&pairs) <= 1e-9
        && w.len() == 1
        && w[0].1 <= 1e-10
        && (c_bell - 1.0).abs() <= 1e-10
        && c_prod.abs() <= 1e-10;
    let detail7 = format!(
        "{} pair-reduction checks max dev {:.2e} (tol 1e-9), |C_W - 2/3| = {:.2e}, C_Bell = {c_bell}, C_product = {c_prod}",
        pairs.len(),
        worst(&pairs),
        w.first().map_or(f64::NAN, |x| x.1)
    );
    Ok([(pass2, detail2), (pass7, detail7)])
}

fn criterion_3(runs: &mut Vec<Run>) -> Result<(bool, String), String> {
    let args = ["gap", "--kinds", "DICKE,AH", "--n-list", "4,8,16,32", "--beta-list", "0.5,1,2,5", "--lambda-list", "0.4,0.6"];
    let (text, took) = record(runs, &args)?;
    let mut pass = took < Duration::from_secs(15 * 60);
    let mut notes = Vec::new();
    for lambda in ["4.0000000000000002e-1", "5.9999999999999998e-1"] {
        for beta in ["5.0000000000000000e-1", "1.0000000000000000e0", "2.0000000000000000e0", "5.0000000000000000e0"] {
            let at = format!("beta={beta} lambda={lambda}");
            let dec = summary_value(&text, &format!("# strictly_decreasing {at}: ")) == Some("1");
            let p = summary_value(&text, &format!("# fit {at}: p="))
                .and_then(|s| s.split(',').next())
                .map_or(f64::NAN, num);
            let ok = dec && p >= 0.4;
            pass &= ok;
            notes.push(format!(
                "(l={}, b={}) p={p:.3}{}",
                num(lambda),
                num(beta),
                if dec { "" } else { " NOT strictly decreasing" }
            ));
        }
    }
    Ok((pass, format!("{}; {:.1} s (limit 900 s)", notes.join(", "), took.as_secs_f64())))
}

fn gaps(text: &str, beta: f64) -> Vec<(usize, f64)> {
    rows(text)
        .iter()
        .filter(|r| num(r[3]) == beta)
        .map(|r| (r[2].parse().unwrap_or(0), num(r[10])))
        .collect()
}

fn criterion_4(runs: &mut Vec<Run>) -> Result<(bool, String), String> {
    let common = ["--n-list", "4,8,16,32", "--beta-list", "1,50", "--lambda-list", "0.6"];
    let (ct, _) = record(runs, &[&["gap", "--kinds", "DICKE,CT"][..], &common].concat())?;
    let (ah, _) = record(runs, &[&["gap", "--kinds", "DICKE,AH"][..], &common].concat())?;
    let at = |v: &[(usize, f64)], n: usize| v.iter().find(|p| p.0 == n).map_or(f64::NAN, |p| p.1.abs());

    let (ct1, ah1) = (gaps(&ct, 1.0), gaps(&ah, 1.0));
    let persist = at(&ct1, 32) / at(&ct1, 4);
    let exclusion = at(&ct1, 32) / at(&ah1, 32);
    let (ct50, ah50) = (gaps(&ct, 50.0), gaps(&ah, 50.0));
    let ratios: Vec<f64> = [4, 8, 16, 32].iter().map(|&n| at(&ct50, n) / at(&ah50, n)).collect();
    let track = ratios.iter().all(|r| (0.5..=2.0).contains(r));
    let pass = persist >= 0.5 && exclusion >= 10.0 && track;
    Ok((
        pass,
        format!(
            "beta=1: |gap_CT(32)|/|gap_CT(4)| = {persist:.3} (need >= 0.5), |gap_CT(32)|/|gap_AH(32)| = {exclusion:.3} (need >= 10); \
             beta=50: |gap_CT|/|gap_AH| at N=4,8,16,32 = {:.3?} (need within [0.5, 2])",
            ratios
        ),
    ))
}

fn criterion_5(runs: &mut Vec<Run>) -> Result<(bool, String), String> {
    let (text, took) = record(runs, &["limits"])?;
    let kappa = text.lines().find(|l| l.contains("kappa_LZ(0.01) - 1 < 1e-4"));
    let slopes: Vec<&str> = text.lines().filter(|l| l.contains("LZ prefactor slope")).collect();
    let pass = kappa.is_some_and(|l| l.starts_with("PASS"))
        && !slopes.is_empty()
        && slopes.iter().all(|l| l.starts_with("PASS"))
        && took < Duration::from_secs(1);
    let value = kappa.and_then(|l| l.split("value=").nth(1)).and_then(|s| s.split(',').next()).unwrap_or("?");
    Ok((
        pass,
        format!("kappa_LZ(0.01) - 1 = {value}, {} slope checks within 1% of 2 lambda^2/N, {:.3} s (limit 1 s)", slopes.len(), took.as_secs_f64()),
    ))
}

fn criterion_6(runs: &mut Vec<Run>) -> Result<(bool, String), String> {
    let args = ["concurrence", "--kinds", "AH,DICKE", "--n-list", "8,16", "--lambda-list", "0:1:0.02"];
    let (text, took) = record(runs, &args)?;
    let parity_clean = rows(&text).iter().all(|r| r[5] == "0");
    let argmax = |kind: &str, n: usize| -> (f64, f64) {
        let line = summary_value(&text, &format!("# argmax kind={kind} N={n}: lambda=")).unwrap_or("");
        let lambda = num(line.split(',').next().unwrap_or(""));
        let c = line.split("C=").nth(1).and_then(|s| s.split(',').next()).map_or(f64::NAN, num);
        (lambda, c)
    };
    let mut pass = parity_clean && took < Duration::from_secs(300) && rows(&text).len() == 4 * 51;
    let mut notes = Vec::new();
    for n in [8, 16] {
        let (la, ca) = argmax("AH", n);
        let (ld, cd) = argmax("DICKE", n);
        pass &= ca >= cd && (0.4..=0.7).contains(&la) && (0.4..=0.7).contains(&ld);
        notes.push(format!("N={n}: max C_AH = {ca:.5} at {la}, max C_DICKE = {cd:.5} at {ld}"));
    }
    Ok((pass, format!("{}; parity moments < 1e-8: {parity_clean}; {:.1} s (limit 300 s)", notes.join("; "), took.as_secs_f64())))
}

fn criterion_8(runs: &[Run]) -> (bool, String) {
    let mut mismatched = Vec::new();
    for run in runs {
        let args: Vec<&str> = run.args.iter().map(String::as_str).collect();
        let (again, _) = cli(&args, 1);
        if again.code != 0 || again.stdout != run.text {
            mismatched.push(run.args.join(" "));
        }
    }
    let pass = mismatched.is_empty();
    let detail = if pass {
        format!("{} invocations byte-identical on 1 and 4 threads", runs.len())
    } else {
        format!("differences in: {}", mismatched.join(" | "))
    };
    (pass, detail)
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture` or a filter;
    // the suite always runs in full.
    let mut runs = Vec::new();
    let mut verdicts = Vec::new();
    let mut push = |id, title, r: Result<(bool, String), String>| {
        let (pass, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
        verdicts.push(Verdict { id, title, pass, detail });
    };

    push(1, "closed-form thermodynamics at lambda = 0", criterion_1(&mut runs));
    let (c2, c7) = match criteria_2_and_7(&mut runs) {
        Ok([a, b]) => (Ok(a), Ok(b)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    push(2, "sector path agrees with the brute-force oracle", c2);
    push(3, "DICKE/AH gap decays at every temperature", criterion_3(&mut runs));
    push(4, "CT gap persists at beta = 1 and tracks AH at beta = 50", criterion_4(&mut runs));
    push(5, "LZ classical limit and prefactor blow-up", criterion_5(&mut runs));
    push(6, "effective Hamiltonian overestimates the concurrence maximum", criterion_6(&mut runs));
    push(7, "pair reduction agrees with the brute-force partial trace", c7);
    let (p8, d8) = criterion_8(&runs);
    push(8, "CSV output independent of thread count", Ok((p8, d8)));

    verdicts.sort_by_key(|v| v.id);
    println!();
    for v in &verdicts {
        println!("{} criterion {}: {} -- {}", if v.pass { "PASS" } else { "FAIL" }, v.id, v.title, v.detail);
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("\nacceptance: {} of {} criteria passed", verdicts.len() - failed, verdicts.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
