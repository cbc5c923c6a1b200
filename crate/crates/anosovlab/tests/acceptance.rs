//! Runs every acceptance criterion against the bundled configs and prints one
//! line per criterion. Exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;

use anosov_core::roof::periodic_point_count;
use anosov_core::IntegerMatrix;
use anosovlab::{run_with_workers, ExperimentConfig, Report};

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&config_dir().join(format!("{name}.json"))).expect("bundled config parses")
}

fn run(name: &str) -> Result<Report, String> {
    run_with_workers(&load(name), None).map_err(|e| e.to_string())
}

fn num(r: &Report, key: &str) -> Result<f64, String> {
    r.summary_f64(key).ok_or_else(|| format!("{} summary lacks {key}", r.experiment))
}

fn check(cond: bool, detail: String) -> Result<String, String> {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pcf_vanishing() -> Result<String, String> {
    let mut worst = 0.0_f64;
    for name in ["pcf_constant_cat", "pcf_constant_companion"] {
        let r = run(name)?;
        if num(&r, "quadrilaterals")? != 100.0 {
            return Err(format!("{name}: expected 100 quadrilaterals"));
        }
        worst = worst.max(num(&r, "max_abs_series")?).max(num(&r, "max_abs_geometric")?);
    }
    check(worst <= 1e-10, format!("max |rho| = {worst:e} over 2 x 100 quadrilaterals"))
}

fn dual_oracle() -> Result<String, String> {
    let r = run("pcf_cat_cos")?;
    let d = num(&r, "max_discrepancy")?;
    let mean = num(&r, "mean_abs_series")?;
    let r3 = run("pcf_companion_cos")?;
    let d3 = num(&r3, "max_discrepancy")?;
    check(
        d <= 1e-6 && d3 <= 1e-6 && mean > 1e-4,
        format!("max |series - geometric| = {d:e} (cat map), {d3:e} (companion); mean |rho| = {mean:e}"),
    )
}

fn conjugacy_invariance() -> Result<String, String> {
    let r = run("pcf_invariance")?;
    let e = num(&r, "max_invariance_error")?;
    check(e <= 1e-6, format!("max |rho1 - rho2 o h| = {e:e} over 100 quadrilaterals"))
}

fn livshits() -> Result<String, String> {
    let p = run("livshits_planted")?;
    let c = run("livshits_cos")?;
    let res = num(&p, "residual_sup")?;
    let sp = num(&p, "spread")?;
    let sc = num(&c, "spread")?;
    let ok = p.summary["status"] == "coboundary" && c.summary["status"] == "obstructed";
    check(
        ok && res <= 1e-9 && sp <= 1e-12 && sc > 1e-3,
        format!("planted: residual {res:e}, spread {sp:e}; cos roof: spread {sc:e}"),
    )
}

/// `|det(M^n - I)|` by repeated integer multiplication and Laplace expansion.
fn det_oracle(m: &IntegerMatrix, n: u32) -> u128 {
    let d = m.dim();
    let mut p: Vec<i128> = (0..d * d).map(|k| i128::from(k / d == k % d)).collect();
    for _ in 0..n {
        p = (0..d * d)
            .map(|ij| (0..d).map(|k| p[(ij / d) * d + k] * m.get(k, ij % d) as i128).sum())
            .collect();
    }
    for i in 0..d {
        p[i * d + i] -= 1;
    }
    fn laplace(d: usize, a: &[i128]) -> i128 {
        if d == 1 {
            return a[0];
        }
        (0..d)
            .map(|j| {
                let minor: Vec<i128> = (1..d)
                    .flat_map(|i| (0..d).filter(move |&c| c != j).map(move |c| a[i * d + c]))
                    .collect();
                (if j % 2 == 0 { 1 } else { -1 }) * a[j] * laplace(d - 1, &minor)
            })
            .sum()
    }
    laplace(d, &p).unsigned_abs()
}

fn periodic_counts() -> Result<String, String> {
    let mats = [("cat map", IntegerMatrix::cat_map()), ("companion", IntegerMatrix::companion(&[-1, 0, 1]).unwrap())];
    let mut checked = 0;
    for (name, m) in &mats {
        for n in 1..=6 {
            let got = periodic_point_count(m, n).map_err(|e| e.to_string())?;
            let want = det_oracle(m, n);
            if got != want {
                return Err(format!("{name}, n = {n}: {got} != {want}"));
            }
            checked += 1;
        }
    }
    check(true, format!("{checked} counts equal |det(M^n - I)|"))
}

fn gap_checker() -> Result<String, String> {
    let r = run("catalog_d3")?;
    let mut rd = csv::Reader::from_reader(r.file("catalog.csv").ok_or("catalog.csv missing")?);
    let headers = rd.headers().map_err(|e| e.to_string())?.clone();
    let col = |h: &str| headers.iter().position(|x| x == h).ok_or(format!("no column {h}"));
    let (cp, cl, cr, cs) = (col("polynomial")?, col("lhs")?, col("rhs")?, col("satisfied")?);
    for rec in rd.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        if &rec[cp] == "x^3 + x^2 - 1" {
            let lhs: f64 = rec[cl].parse().map_err(|_| "bad lhs")?;
            let rhs: f64 = rec[cr].parse().map_err(|_| "bad rhs")?;
            return check(
                (lhs - 0.0593).abs() <= 1e-3 && rhs == 0.0 && &rec[cs] == "true",
                format!("x^3 + x^2 - 1: lhs = {lhs:.6}, rhs = {rhs}, satisfied = {}", &rec[cs]),
            );
        }
    }
    Err("companion row missing from catalog".into())
}

fn bunching() -> Result<String, String> {
    let c = run("bunching_companion")?;
    let k = run("bunching_cat")?;
    let s3 = num(&c, "stable_sup_at_one")?;
    let s2 = num(&k, "stable_sup_at_one")?;
    let j3 = num(&c, "jacobian_product")?;
    let j2 = num(&k, "jacobian_product")?;
    check(
        (s3 - 0.86885).abs() <= 1e-4 && (s2 - 1.0).abs() <= 1e-9 && (j3 - 1.0).abs() <= 1e-12 && (j2 - 1.0).abs() <= 1e-12,
        format!("companion nu = 1: {s3:.6}; cat map: {s2}; J^s J^u - 1 = {:e}, {:e}", j3 - 1.0, j2 - 1.0),
    )
}

fn claim44() -> Result<String, String> {
    let r = run("claim44_companion")?;
    let order = num(&r, "fitted_order")?;
    let exp = num(&r, "remainder_exponent")?;
    let kappa = num(&r, "kappa")?;
    check(
        order >= 0.9 && exp >= 1.8,
        format!("fitted order {order:.4}, remainder exponent {exp:.4}, kappa {kappa:.4}"),
    )
}

fn matching_kernel() -> Result<String, String> {
    let c = run("subbundle_constant")?;
    let g = run("subbundle_companion")?;
    let kc = num(&c, "kernel_dim")?;
    let du = num(&c, "unstable_dim")?;
    let pairs = num(&g, "independent_pairs")?;
    let draws = num(&g, "draws")?;
    let kg = num(&g, "kernel_dim")?;
    let patch = num(&g, "patch_sup_error")?;
    check(
        kc == du && pairs == 2.0 && draws <= 200.0 && kg == 0.0 && patch <= 1e-4,
        format!("constant roof kernel {kc}/{du}; cos roof: 2 pairs in {draws} draws, kernel {kg}; patch sup error {patch:e}"),
    )
}

fn sweep() -> Result<String, String> {
    let c = run("sweep_companion")?;
    let q = run("sweep_quartic")?;
    let vac = c.summary["vacuous"] == true && num(&c, "invariant_subspaces")? == 0.0;
    let n = num(&q, "invariant_subspaces")?;
    let diam = num(&q, "diameter")?;
    let avoiding = num(&q, "avoiding")?;
    check(
        vac && n == 6.0 && q.summary["any_avoids_all"] == true && diam > 0.0,
        format!("complex pair vacuous = {vac}; quartic: {n} subspaces, {avoiding} gradients avoid all, diameter {diam:.4}"),
    )
}

fn determinism() -> Result<String, String> {
    let mut names: Vec<String> = std::fs::read_dir(config_dir())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().trim_end_matches(".json").to_string())
        .collect();
    names.sort();
    for name in &names {
        let cfg = load(name);
        let a = run_with_workers(&cfg, Some(1)).map_err(|e| format!("{name}: {e}"))?;
        let b = run_with_workers(&cfg, Some(1)).map_err(|e| format!("{name}: {e}"))?;
        let c = run_with_workers(&cfg, Some(4)).map_err(|e| format!("{name}: {e}"))?;
        if a.files != b.files {
            return Err(format!("{name}: two runs differ"));
        }
        if a.files != c.files {
            return Err(format!("{name}: 1 and 4 workers differ"));
        }
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        a.write_to(dir.path()).map_err(|e| e.to_string())?;
        for (file, bytes) in &a.files {
            if std::fs::read(dir.path().join(file)).map_err(|e| e.to_string())? != *bytes {
                return Err(format!("{name}: {file} differs on disk"));
            }
        }
    }
    check(true, format!("{} configs byte-identical across runs and 1 vs 4 workers", names.len()))
}

type Criterion = fn() -> Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("PCF vanishing", pcf_vanishing),
        ("dual-oracle PCF agreement", dual_oracle),
        ("conjugacy invariance", conjugacy_invariance),
        ("Livshits", livshits),
        ("periodic counts", periodic_counts),
        ("gap inequality checker", gap_checker),
        ("bunching", bunching),
        ("holonomy derivative", claim44),
        ("matching kernel", matching_kernel),
        ("Grassmannian sweep", sweep),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail}", i + 1);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
