//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use shiftcert::blockops::{bergman_alpha0_exact_check, bergman_battery, bergman_norm_equivalence};
use shiftcert::calculus::{imbedding_adjoint_on, tail_ratio_probe};
use shiftcert::certify::{cauchy_schwarz_ordering, certify_scenario, cond_esterle};
use shiftcert::gate::{GateParams, Verdict};
use shiftcert::inner::{carleson_sum, verify_reciprocal_identity, InnerFn, SingularMeasure};
use shiftcert::shifts::{adjoint_power_apply, build_bilateral, build_unilateral_plus};
use shiftcert::weights::{check_dissymmetric, make_dominated_weight, make_step_weight, make_summable_weight};
use shiftcert::WeightSequence;
use shiftcert::Complex64;
use shiftcert_cli::commands::{blockprobe, certify_input, identity_study};
use shiftcert_cli::scenario::{load, Loaded, ModelSpec, WeightsMakeSpec};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn scenario(name: &str) -> Loaded {
    load(&scenario_dir().join(format!("{name}.toml"))).expect("shipped scenario parses")
}

fn shipped() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    v.sort();
    v
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn reciprocal_identity() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for a in [0.25, 1.0, 4.0] {
        let th = InnerFn::new(SingularMeasure::single(0.0, a).unwrap());
        let r = verify_reciprocal_identity(&th.coeffs_theta(2000).coeffs, &th.coeffs_inv_theta(2000), 2000).unwrap();
        let c0 = (r.constant_term - Complex64::new(1.0, 0.0)).norm();
        pass &= r.max_relative_residual <= 1e-6 && c0 <= 1e-10;
        parts.push(format!("a={a}: rel {:.2e}, |c0-1| {:.1e}", r.max_relative_residual, c0));
    }
    let t = secs(start.elapsed());
    pass &= t < 10.0;
    Outcome { pass, detail: format!("{}; {t:.2}s", parts.join("; ")) }
}

fn theta_inverse_identity() -> Outcome {
    let start = Instant::now();
    let s = scenario("scenario_b");
    match identity_study(&s.scenario) {
        Ok(i) => {
            let t = secs(start.elapsed());
            let doubled = i.relative_residual_doubled.unwrap_or(f64::INFINITY);
            Outcome {
                pass: i.relative_residual <= 1e-4 && doubled <= i.relative_residual && t < 30.0,
                detail: format!(
                    "N={} rel {:.2e}; 2N={} rel {:.2e}; {t:.2}s",
                    i.cutoff, i.relative_residual, i.cutoff_doubled, doubled
                ),
            }
        }
        Err(e) => Outcome { pass: false, detail: e.to_string() },
    }
}

fn condition_gate() -> Outcome {
    let p = GateParams::default();
    let small = InnerFn::new(SingularMeasure::single(0.0, 0.1).unwrap());
    let big = InnerFn::new(SingularMeasure::single(0.0, 1.0).unwrap());
    let mut pass = true;
    let mut parts = Vec::new();
    for beta in [0.3, 0.5, 0.7] {
        let v = cond_esterle(&WeightSequence::log_exp(beta), &small, 4000, &p).verdict;
        pass &= v == Verdict::Converged;
        parts.push(format!("β={beta}: {v:?}"));
    }
    for (name, w) in [("ω=1", WeightSequence::constant()), ("ω=(n+1)", WeightSequence::polynomial(1.0))] {
        let v = cond_esterle(&w, &big, 4000, &p).verdict;
        pass &= v == Verdict::Diverged;
        parts.push(format!("{name}, a=1: {v:?}"));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn witness_separation() -> Outcome {
    let start = Instant::now();
    let s = scenario("scenario_a");
    let input = certify_input(&s.scenario).unwrap();
    match certify_scenario(&input) {
        Ok(r) => {
            let t = secs(start.elapsed());
            let sep = r
                .witness_rows
                .iter()
                .filter(|w| {
                    w.diff_norm >= 1e3 * w.residual && w.residual <= input.residual_tol * (w.u_norm + w.v_norm)
                })
                .count();
            let best = r.witness.as_ref();
            Outcome {
                pass: sep > 0 && r.witness_rows.len() == 64 && t < 120.0,
                detail: format!(
                    "{sep}/{} grid points separate; best ‖u-v‖ {:.3e}, residual {:.3e}, tol·(‖u‖+‖v‖) {:.3e}; {t:.2}s",
                    r.witness_rows.len(),
                    best.map_or(f64::NAN, |w| w.diff_norm),
                    best.map_or(f64::NAN, |w| w.residual),
                    best.map_or(f64::NAN, |w| input.residual_tol * (w.u_norm + w.v_norm)),
                ),
            }
        }
        Err(e) => Outcome { pass: false, detail: e.to_string() },
    }
}

fn carleson() -> Outcome {
    let mut worst = 0f64;
    worst = worst.max(carleson_sum(&[0.4f64]).unwrap().abs());
    worst = worst.max((carleson_sum(&[0.4f64, 0.4 + std::f64::consts::PI]).unwrap() + 2f64.ln()).abs());
    for k in 2..=8usize {
        let a: Vec<f64> = (0..k).map(|j| 1.0 + std::f64::consts::TAU * j as f64 / k as f64).collect();
        worst = worst.max((carleson_sum(&a).unwrap() + (k as f64).ln()).abs());
    }
    Outcome { pass: worst <= 1e-12, detail: format!("max deviation from closed forms {worst:.2e}") }
}

fn weight_constructors() -> Outcome {
    let range = -100_000i64..=100_000;
    let mut pass = true;
    let mut parts = Vec::new();
    let base: WeightSequence = WeightSequence::exp_sqrt();
    let step = make_step_weight(&base, &[1, 4, 16, 64, 256, 1024]).unwrap();
    let d = check_dissymmetric(&step, range.clone()).unwrap();
    pass &= d.pass;
    parts.push(format!("step: dissymmetric {}", d.pass));

    let l = scenario("weights_dominated");
    let WeightsMakeSpec::Dominated { beta_power, len } = l.scenario.weights_make.clone().unwrap() else { unreachable!() };
    let beta: Vec<f64> = (0..len).map(|n| (n as f64 + 1.0).powf(beta_power)).collect();
    let dw = make_dominated_weight(&beta, &l.scenario.weight.build()).unwrap();
    let ok = (dw.n0..len).all(|n| dw.weight.eval(-(n as i64) - 1) <= beta[n]);
    let d = check_dissymmetric(&dw.weight, range.clone()).unwrap();
    pass &= ok && d.pass;
    parts.push(format!("dominated: n0 {}, ω(-n-1) <= β_n {ok}, dissymmetric {}", dw.n0, d.pass));

    let l = scenario("weights_summable");
    let WeightsMakeSpec::Summable { eps_power, len } = l.scenario.weights_make.clone().unwrap() else { unreachable!() };
    let eps: Vec<f64> = (0..len).map(|n| (n as f64 + 1.0).powf(-eps_power)).collect();
    let sw = make_summable_weight(&eps, &l.scenario.weight.build(), &GateParams::default()).unwrap();
    let ok = sw.weighted_partial_sums.iter().all(|s| *s <= sw.total_bound);
    let d = check_dissymmetric(&sw.weight, range).unwrap();
    pass &= ok && d.pass;
    parts.push(format!("summable: partial sums <= {:.4e} {ok}, dissymmetric {}", sw.total_bound, d.pass));
    Outcome { pass, detail: parts.join("; ") }
}

fn cauchy_schwarz() -> Outcome {
    let mut pass = true;
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for p in shipped() {
        let s = load(&p).unwrap().scenario;
        let w = s.weight.build();
        let win = s.truncation.window().unwrap();
        let op = match s.truncation.model {
            ModelSpec::Bilateral => build_bilateral(&w, win).unwrap(),
            ModelSpec::Unilateral => build_unilateral_plus(&w, win).unwrap(),
        };
        let Ok(u0) = imbedding_adjoint_on(&op, &s.g()) else { continue };
        let pw = adjoint_power_apply(&op, s.truncation.n_coeffs, &u0).unwrap();
        let r = cauchy_schwarz_ordering(&s.inner(), &w, pw.trusted_norms(), 1e-12);
        pass &= r.holds;
        worst = worst.max(r.max_relative_excess);
        count += 1;
    }
    Outcome { pass: pass && count > 0, detail: format!("{count} scenarios, max relative excess {worst:.2e}") }
}

fn bergman() -> Outcome {
    let exact = bergman_alpha0_exact_check(1000);
    let float_ok = (0..=1000usize).all(|n| {
        let mut f = vec![Complex64::new(0.0, 0.0); n + 1];
        f[n] = Complex64::new(1.0, 0.0);
        (bergman_norm_equivalence(0.0, &f).unwrap().ratio - 1.0).abs() < 1e-12
    });
    let e1 = bergman_battery(-0.5f64, 100, 100, 100).unwrap();
    let e2 = bergman_battery(-0.5f64, 1000, 100, 1000).unwrap();
    let lo = (e1.min - e2.min).abs() / e2.min;
    let hi = (e1.max - e2.max).abs() / e2.max;
    Outcome {
        pass: exact && float_ok && lo < 0.1 && hi < 0.1,
        detail: format!(
            "α=0 exact {exact}, f64 {float_ok}; α=-0.5 deg 100 [{:.4}, {:.4}], deg 1000 [{:.4}, {:.4}]",
            e1.min, e1.max, e2.min, e2.max
        ),
    }
}

fn block_identities() -> Outcome {
    let s = scenario("blockprobe_a");
    match blockprobe(&s.scenario) {
        Ok(r) => {
            let rows: Vec<String> = r.power.rows.iter().map(|p| format!("dim {} sup {:.6}", p.dim, p.sup_norm)).collect();
            Outcome {
                pass: r.intertwining.max_abs_error <= 1e-10
                    && r.function_model.max_abs_error <= 1e-10
                    && r.power.relative_spread < 0.05
                    && r.windows == [300, 600]
                    && r.power.n_max == 200,
                detail: format!(
                    "intertwining {:.1e}, function_model {:.1e} (degree 50); {}; spread {:.2e}",
                    r.intertwining.max_abs_error,
                    r.function_model.max_abs_error,
                    rows.join(", "),
                    r.power.relative_spread
                ),
            }
        }
        Err(e) => Outcome { pass: false, detail: e.to_string() },
    }
}

fn tail_operator_shadow() -> Outcome {
    let ks = [0, 1, 3, 7, 15, 31];
    let r = tail_ratio_probe::<f64>(200, 512, &ks, 20240601).unwrap();
    let rows: Vec<String> = r.rows.iter().map(|x| format!("k={} {:.3}", x.k, x.max_ratio)).collect();
    Outcome {
        pass: r.all_within && r.fitted_c.is_finite(),
        detail: format!("C = {:.4}; max ratios {}", r.fitted_c, rows.join(", ")),
    }
}

fn command_for(p: &Path) -> &'static str {
    let n = p.file_stem().unwrap().to_string_lossy();
    if n.starts_with("blockprobe") {
        "blockprobe"
    } else if n.starts_with("weights") {
        "weights-make"
    } else if n.starts_with("carleson") {
        "carleson"
    } else if n == "atom_one" {
        "coeffs"
    } else {
        "certify"
    }
}

fn run_all(out: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    for p in shipped() {
        for cmd in [command_for(&p), "coeffs"] {
            Command::new(env!("CARGO_BIN_EXE_shiftcert"))
                .args([cmd, "--scenario"])
                .arg(&p)
                .arg("--out")
                .arg(out)
                .output()
                .unwrap();
        }
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files.into_iter().map(|f| (f.file_name().unwrap().into(), std::fs::read(&f).unwrap())).collect()
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_all(a.path());
    let rb = run_all(b.path());
    let same = ra == rb;
    Outcome {
        pass: same && !ra.is_empty(),
        detail: format!("{} scenarios, {} output files, byte-identical {same}", shipped().len(), ra.len()),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("reciprocal identity", reciprocal_identity),
        ("θ(T*)u = u0 on the unilateral scenario", theta_inverse_identity),
        ("condition gate verdicts", condition_gate),
        ("witness separation on scenario A", witness_separation),
        ("Carleson sums", carleson),
        ("weight constructors", weight_constructors),
        ("Cauchy-Schwarz ordering", cauchy_schwarz),
        ("Bergman norm equivalence", bergman),
        ("block identities and power bound", block_identities),
        ("tail operator log bound", tail_operator_shadow),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
