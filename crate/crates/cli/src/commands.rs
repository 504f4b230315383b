//! Subcommand implementations. Each writes its files under the output
//! directory and returns an exit code with a short text summary.

use crate::scenario::{Loaded, Scenario, WeightsMakeSpec};
use serde::Serialize;
use shiftcert::blockops::{
    bergman_alpha0_exact_check, bergman_battery, build_prop51, build_thm72, build_chain_ungated, check_function_model, check_intertwining,
    disc_grid, eigenvalue_absence_probe, power_bound_probe, BergmanSpec, EigenReport, Envelope as BergmanEnvelope, IdentityError,
    PowerBoundReport, STAND_IN_NOTE,
};
use shiftcert::calculus::{
    imbedding_adjoint_on, select_cutoff, series_adjoint_vector, verify_theta_inverse_identity, witness_scan, AnalyticFn,
    WitnessContext,
};
use shiftcert::certify::{certify_scenario, Conclusion, Model};
use shiftcert::{CertificateReport, CertifyInput};
use shiftcert::inner::{carleson_sum, growth_fit, verify_reciprocal_identity, GrowthFit};
use shiftcert::shifts::{build_bilateral, build_minus, build_unilateral_plus, spectrum_probe, SpectrumReport, TruncationWindow};
use shiftcert::weights::{check_dissymmetric, make_dominated_weight, make_step_weight, make_summable_weight, Clause};
use shiftcert::{Complex64, Error, GateParams, TruncatedOperator};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] crate::scenario::ScenarioError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Gate { .. }) | CliError::Core(Error::Diverged(_)) => 2,
            CliError::Core(Error::Inconclusive { .. }) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub grid: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationOut {
    pub model: Model,
    pub n_coeffs: usize,
    pub window_lo: i64,
    pub window_hi: i64,
    pub xi_grid: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope<'a, R> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub scenario_id: &'a str,
    pub scenario_hash: &'a str,
    pub truncation: TruncationOut,
    pub report: R,
}

fn envelope<'a, R: Serialize>(command: &'static str, l: &'a Loaded, report: R) -> Envelope<'a, R> {
    let s = &l.scenario;
    Envelope {
        tool: "shiftcert",
        version: env!("CARGO_PKG_VERSION"),
        command,
        scenario_id: &s.id,
        scenario_hash: &l.hash,
        truncation: TruncationOut {
            model: s.truncation.model(),
            n_coeffs: s.truncation.n_coeffs,
            window_lo: s.truncation.window_lo,
            window_hi: s.truncation.window_hi,
            xi_grid: s.xi_grid,
        },
        report,
    }
}

pub fn apply_overrides(l: &mut Loaded, o: Overrides) {
    if let Some(n) = o.n {
        l.scenario.truncation.n_coeffs = n;
        if let Some(b) = l.scenario.block.as_mut() {
            b.n_max = n;
        }
    }
    if let Some(g) = o.grid {
        l.scenario.xi_grid = g;
    }
}

fn write(out: &Path, name: String, body: &str, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.display().to_string(), source })?;
    let p = out.join(name);
    std::fs::write(&p, body).map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
    files.push(p);
    Ok(())
}

fn json<R: Serialize>(v: &R) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn gate(s: &Scenario) -> GateParams {
    GateParams::with_tol(s.tolerances.tail_tol)
}

fn operator(s: &Scenario) -> Result<TruncatedOperator, CliError> {
    let w = s.weight.build();
    let win = s.truncation.window().map_err(CliError::Usage)?;
    Ok(match s.truncation.model() {
        Model::Bilateral => build_bilateral(&w, win)?,
        Model::Unilateral => build_unilateral_plus(&w, win)?,
    })
}

#[derive(Debug, Clone, Serialize)]
struct CoeffsReport {
    degree: usize,
    theta_precision_flag: bool,
    theta_reliable_degree: usize,
    theta_max_rel_error_estimate: f64,
    reciprocal_max_abs_residual: f64,
    reciprocal_max_relative_residual: f64,
    constant_term: Complex64,
    inv_theta_growth: Option<GrowthFit<f64>>,
}

/// θ and 1/θ coefficients with reciprocal-identity residuals.
pub fn cmd_coeffs(l: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    let s = &l.scenario;
    let n = s.truncation.n_coeffs;
    let th = s.inner();
    let tc = th.coeffs_theta(n);
    let inv = th.coeffs_inv_theta(n);
    let rec = verify_reciprocal_identity(&tc.coeffs, &inv, n)?;
    let mut csv = String::from("n,theta_re,theta_im,inv_theta_re,inv_theta_im,reciprocal_residual\n");
    for k in 0..=n {
        let (a, b) = (tc.coeffs.get(k as i64), inv.get(k as i64));
        let _ = writeln!(csv, "{k},{:e},{:e},{:e},{:e},{:e}", a.re, a.im, b.re, b.im, rec.abs_residuals[k]);
    }
    let rep = CoeffsReport {
        degree: n,
        theta_precision_flag: tc.precision_flag,
        theta_reliable_degree: tc.reliable_degree,
        theta_max_rel_error_estimate: tc.max_rel_error_estimate,
        reciprocal_max_abs_residual: rec.max_abs_residual,
        reciprocal_max_relative_residual: rec.max_relative_residual,
        constant_term: rec.constant_term,
        inv_theta_growth: if th.measure().is_empty() || n < 64 { None } else { growth_fit(&inv).ok() },
    };
    let mut files = Vec::new();
    write(out, format!("{}.coeffs.csv", s.id), &csv, &mut files)?;
    write(out, format!("{}.coeffs.json", s.id), &json(&envelope("coeffs", l, &rep)), &mut files)?;
    let summary = format!(
        "coeffs {}: degree {n}, max relative reciprocal residual {:.3e}, θ precision flag {}",
        s.id, rec.max_relative_residual, tc.precision_flag
    );
    Ok(Outcome { exit_code: 0, files, summary })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityStudy {
    pub cutoff: usize,
    pub tail_bound: f64,
    pub relative_residual: f64,
    pub cutoff_doubled: usize,
    pub relative_residual_doubled: Option<f64>,
    pub doubled_error: Option<String>,
}

/// `‖θ(T*)u - u₀‖/‖u₀‖` at the tail-selected cutoff and at twice that cutoff.
pub fn identity_study(s: &Scenario) -> Result<IdentityStudy, CliError> {
    let t = operator(s)?;
    let th = s.inner();
    let u0 = imbedding_adjoint_on(&t, &s.g())?;
    let params = gate(s);
    let a = select_cutoff(&th, &t, &u0, s.truncation.n_coeffs, &params)?;
    let ra = verify_theta_inverse_identity(&th, &t, &a.u, &u0)?;
    let n2 = 2 * a.cutoff;
    let (rb, err) = match series_adjoint_vector(&th, &t, &u0, n2, &params) {
        Ok(b) => (Some(verify_theta_inverse_identity(&th, &t, &b.u, &u0)?.relative), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(IdentityStudy {
        cutoff: a.cutoff,
        tail_bound: a.tail_bound,
        relative_residual: ra.relative,
        cutoff_doubled: n2,
        relative_residual_doubled: rb,
        doubled_error: err,
    })
}

pub fn certify_input(s: &Scenario) -> Result<CertifyInput, CliError> {
    Ok(CertifyInput {
        id: s.id.clone(),
        model: s.truncation.model(),
        weight: s.weight.build(),
        theta: s.inner(),
        g: s.g(),
        n_coeffs: s.truncation.n_coeffs,
        window: s.truncation.window().map_err(CliError::Usage)?,
        xi_grid: s.xi_grid,
        tail_tol: s.tolerances.tail_tol,
        residual_tol: s.tolerances.residual_tol,
    })
}

#[derive(Debug, Clone, Serialize)]
struct CertifyOut<'a> {
    certificate: &'a CertificateReport,
    identity: Option<IdentityStudy>,
    identity_error: Option<String>,
}

fn certificate_text(l: &Loaded, c: &CertificateReport, id: &Option<IdentityStudy>) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "scenario {} (sha256 {})", c.scenario_id, l.hash);
    let _ = writeln!(t, "model {:?}, N = {}, window [{}, {}]", c.model, c.n_coeffs, c.window_lo, c.window_hi);
    let _ = writeln!(t, "governing condition {}", c.governing);
    for (name, st) in &c.conditions {
        let _ = writeln!(
            t,
            "  {name}: {:?}, sum {:.6e}, tail {}, resolved {}",
            st.verdict,
            st.sum(),
            st.tail_estimate.map_or("none".into(), |v| format!("{v:.3e}")),
            st.resolved
        );
    }
    if let Some(cs) = &c.cauchy_schwarz {
        let _ = writeln!(t, "  Cauchy-Schwarz ordering over {} prefixes: {}", cs.prefixes, cs.holds);
    }
    if let Some(w) = &c.witness {
        let _ = writeln!(
            t,
            "witness: best ξ angle {:.6}, ‖u-v‖ {:.6e}, residual {:.6e}, separated at {} of {} grid points",
            w.best_xi_angle, w.diff_norm, w.residual, w.separated_points, w.grid
        );
    }
    if let Some(i) = id {
        let _ = writeln!(t, "identity: N = {}, relative residual {:.3e}", i.cutoff, i.relative_residual);
    }
    for a in &c.assumptions {
        let _ = writeln!(t, "assumption: {a}");
    }
    for n in &c.notes {
        let _ = writeln!(t, "note: {n}");
    }
    if let Some(h) = c.required_n_hint {
        let _ = writeln!(t, "required N hint: {h}");
    }
    let _ = writeln!(t, "conclusion: {:?}: {}", c.conclusion, c.conclusion_text);
    t
}

fn witness_csv(rows: impl Iterator<Item = (f64, f64, f64, f64)>) -> String {
    let mut csv = String::from("xi_angle,diff_norm,residual,tail_bound\n");
    for (a, d, r, tb) in rows {
        let _ = writeln!(csv, "{a:e},{d:e},{r:e},{tb:e}");
    }
    csv
}

/// Governing condition plus witness scan; exit 0/2/3 by conclusion.
pub fn cmd_certify(l: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    let s = &l.scenario;
    let cert = certify_scenario(&certify_input(s)?)?;
    let (identity, identity_error) = if cert.conclusion == Conclusion::NotCertified && cert.witness.is_none() {
        (None, Some("skipped: governing condition failed".into()))
    } else {
        match identity_study(s) {
            Ok(i) => (Some(i), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    let mut files = Vec::new();
    let body = CertifyOut { certificate: &cert, identity: identity.clone(), identity_error };
    write(out, format!("{}.certificate.json", s.id), &json(&envelope("certify", l, &body)), &mut files)?;
    write(out, format!("{}.certificate.txt", s.id), &certificate_text(l, &cert, &identity), &mut files)?;
    let csv = witness_csv(cert.witness_rows.iter().map(|r| (r.xi_angle, r.diff_norm, r.residual, r.tail_bound)));
    write(out, format!("{}.witness.csv", s.id), &csv, &mut files)?;
    let mut summary = format!("certify {}: {:?}: {}", s.id, cert.conclusion, cert.conclusion_text);
    if let Some(h) = cert.required_n_hint {
        let _ = write!(summary, " (required N hint {h})");
    }
    Ok(Outcome { exit_code: cert.conclusion.exit_code(), files, summary })
}

/// Witness pairs on the ξ grid without the certificate logic.
pub fn cmd_witness_scan(l: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    let s = &l.scenario;
    let t = operator(s)?;
    let th = s.inner();
    let g = s.g();
    let ctx = WitnessContext::new(&th, &t, &g, s.truncation.n_coeffs, &gate(s))?;
    let pairs = witness_scan(&ctx, s.xi_grid).into_iter().collect::<Result<Vec<_>, _>>()?;
    let csv = witness_csv(pairs.iter().map(|p| (p.xi.arg(), p.diff_norm, p.residual, p.tail_bound)));
    let mut files = Vec::new();
    write(out, format!("{}.witness.csv", s.id), &csv, &mut files)?;
    let best = pairs.iter().map(|p| p.diff_norm / p.residual.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    let summary = format!("witness-scan {}: {} points, best ‖u-v‖/residual {:.3e}", s.id, pairs.len(), best);
    Ok(Outcome { exit_code: 0, files, summary })
}

#[derive(Debug, Clone, Serialize)]
struct CarlesonReport {
    points: usize,
    sum: f64,
    convention: &'static str,
}

pub fn cmd_carleson(l: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    let s = &l.scenario;
    let angles = s.inner().measure().support_angles();
    if angles.is_empty() {
        return Err(CliError::Usage("carleson needs at least one atom".into()));
    }
    let rep = CarlesonReport {
        points: angles.len(),
        sum: carleson_sum(&angles)?,
        convention: "Σ m log m over complementary arcs, arc length in turns",
    };
    let mut files = Vec::new();
    write(out, format!("{}.carleson.json", s.id), &json(&envelope("carleson", l, &rep)), &mut files)?;
    let summary = format!("carleson {}: {} points, sum {:.15e}", s.id, rep.points, rep.sum);
    Ok(Outcome { exit_code: 0, files, summary })
}

#[derive(Debug, Clone, Serialize)]
struct WeightsReport {
    kind: &'static str,
    breakpoints: Vec<i64>,
    n0: Option<usize>,
    total_bound: Option<f64>,
    weighted_sum: Option<f64>,
    /// Target inequality checked pointwise on the supplied prefix.
    target_holds: bool,
    max_target_excess: f64,
    dissymmetric: bool,
    dissymmetric_window: (i64, i64),
}

/// Largest window on which the constructed weights are checked.
pub const WEIGHT_CHECK_RADIUS: i64 = 100_000;

pub fn cmd_weights_make(l: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    let s = &l.scenario;
    let spec = s.weights_make.as_ref().ok_or_else(|| CliError::Usage("scenario has no [weights_make] section".into()))?;
    let base = s.weight.build();
    let (kind, w, rep_parts) = match spec {
        WeightsMakeSpec::Dominated { beta_power, len } => {
            let beta: Vec<f64> = (0..*len).map(|n| (n as f64 + 1.0).powf(*beta_power)).collect();
            let d = make_dominated_weight(&beta, &base)?;
            let excess = (d.n0..*len).map(|n| d.weight.eval(-(n as i64) - 1) - beta[n]).fold(f64::NEG_INFINITY, f64::max);
            ("dominated", d.weight, (d.breakpoints, Some(d.n0), None, None, excess))
        }
        WeightsMakeSpec::Summable { eps_power, len } => {
            let eps: Vec<f64> = (0..*len).map(|n| (n as f64 + 1.0).powf(-eps_power)).collect();
            let m = make_summable_weight(&eps, &base, &gate(s))?;
            let last = *m.weighted_partial_sums.last().unwrap_or(&0.0);
            ("summable", m.weight, (m.breakpoints, None, Some(m.total_bound), Some(last), last - m.total_bound))
        }
        WeightsMakeSpec::Step { breakpoints } => {
            let w = make_step_weight(&base, breakpoints)?;
            ("step", w, (breakpoints.clone(), None, None, None, f64::NEG_INFINITY))
        }
    };
    let (breakpoints, n0, total_bound, weighted_sum, excess) = rep_parts;
    let d = check_dissymmetric(&w, -WEIGHT_CHECK_RADIUS..=WEIGHT_CHECK_RADIUS)?;
    let rep = WeightsReport {
        kind,
        breakpoints,
        n0,
        total_bound,
        weighted_sum,
        target_holds: excess <= 0.0,
        max_target_excess: excess,
        dissymmetric: d.pass,
        dissymmetric_window: (-WEIGHT_CHECK_RADIUS, WEIGHT_CHECK_RADIUS),
    };
    let hi = rep.breakpoints.last().copied().unwrap_or(1).max(64) * 2;
    let mut csv = String::from("n,omega\n");
    for n in -hi..=0 {
        let _ = writeln!(csv, "{n},{:e}", w.eval(n));
    }
    let mut files = Vec::new();
    write(out, format!("{}.weights.csv", s.id), &csv, &mut files)?;
    write(out, format!("{}.weights.json", s.id), &json(&envelope("weights-make", l, &rep)), &mut files)?;
    let summary = format!(
        "weights-make {}: {kind}, {} breakpoints, dissymmetric {}, target inequality {}",
        s.id,
        rep.breakpoints.len(),
        rep.dissymmetric,
        rep.target_holds
    );
    Ok(Outcome { exit_code: if rep.dissymmetric && rep.target_holds { 0 } else { 2 }, files, summary })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockProbeReport {
    pub note: &'static str,
    pub alpha: f64,
    pub gates: Vec<Clause>,
    pub windows: Vec<usize>,
    pub structural_ok: bool,
    pub parts_match_standalone: bool,
    pub power: PowerBoundReport<f64>,
    pub zero_coupling_sup: f64,
    pub doubled_coupling_sup: f64,
    pub intertwining: IdentityError<f64>,
    pub function_model: IdentityError<f64>,
    pub eigen: EigenReport<f64>,
    pub resolvent: SpectrumReport<f64>,
    pub bergman_degree_100: BergmanEnvelope<f64>,
    pub bergman_degree_1000: BergmanEnvelope<f64>,
    pub bergman_alpha0_monomials_exact: Option<bool>,
}

/// Deterministic test vector with decaying, sign-varying entries.
pub fn probe_vector(len: usize, phase: f64) -> Vec<Complex64> {
    (0..len)
        .map(|j| {
            let x = j as f64;
            Complex64::new((1.3 * x + phase).cos(), (0.7 * x - phase).sin()) / (1.0 + 0.05 * x)
        })
        .collect()
}

pub fn blockprobe(s: &Scenario) -> Result<BlockProbeReport, CliError> {
    let b = s.block.as_ref().ok_or_else(|| CliError::Usage("scenario has no [block] section".into()))?;
    let w = s.weight.build();
    let params = gate(s);
    let bergman = BergmanSpec::new(b.alpha)?;
    let build = |m: usize| -> Result<_, CliError> {
        let blk = if b.ungated {
            (build_chain_ungated(bergman, &w, m, m)?, Vec::new())
        } else {
            let r = build_thm72(b.alpha, &w, m, m, &params)?;
            (r.block, r.gates)
        };
        Ok((blk.0.with_coupling_scale(b.coupling_scale)?, blk.1))
    };
    let mut blocks = Vec::new();
    let mut gates = Vec::new();
    for &m in &b.windows {
        let (blk, g) = build(m)?;
        gates = g;
        blocks.push(blk);
    }
    let structural_ok = blocks.iter().all(|x| x.structural_check());
    let parts_match_standalone = blocks.iter().all(|x| {
        let m = x.upper_left.dim() as i64;
        let up = build_unilateral_plus(&bergman.weight(), TruncationWindow::new(0, m - 1).unwrap()).unwrap();
        let lo = build_minus(&w, TruncationWindow::new(-(x.lower_right.dim() as i64), -1).unwrap()).unwrap();
        up.matrix() == x.upper_left.matrix() && lo.matrix() == x.lower_right.matrix()
    });
    let refs: Vec<_> = blocks.iter().collect();
    let power = power_bound_probe(&refs, b.n_max)?;
    let first = &blocks[0];
    let zero_coupling_sup = power_bound_probe(&[&first.with_coupling_scale(0.0)?], b.n_max)?.rows[0].sup_norm;
    let doubled_coupling_sup = power_bound_probe(&[&first.with_coupling_scale(2.0)?], b.n_max)?.rows[0].sup_norm;

    let deg = b.phi_degree;
    let phi = AnalyticFn::polynomial(&probe_vector(deg + 1, 0.25));
    let m0 = first.upper_left.dim();
    let intertwining = if deg < m0 {
        check_intertwining(first, &phi, &probe_vector(first.lower_right.dim(), 0.5))?
    } else {
        return Err(CliError::Usage(format!("phi_degree {deg} must be below the smallest window {m0}")));
    };
    let t0 = build_minus(&w, TruncationWindow::new(-(m0 as i64), -1)?)?;
    let xc = imbedding_adjoint_on(&t0, &shiftcert::CoeffVector::monomial(-1))?;
    let p51 = build_prop51(m0, &t0, &xc)?;
    let function_model = check_function_model(&p51, &phi, &probe_vector(t0.dim(), 0.75))?;

    let (eig_block, _) = build(b.eig_window)?;
    let eigen = eigenvalue_absence_probe(&eig_block.assembled, &disc_grid(b.eig_rings, b.eig_rays, b.eig_rmax))?;
    let quarter = std::f64::consts::FRAC_PI_2;
    let resolvent = spectrum_probe(&eig_block.assembled, &[0.0, quarter, 2.0 * quarter, 3.0 * quarter], &[0.5, 0.9, 0.99, 1.01, 1.1, 1.5])?;
    let bergman_degree_100 = bergman_battery(b.alpha, 100, 100, 100)?;
    let bergman_degree_1000 = bergman_battery(b.alpha, 1000, 100, 1000)?;
    let bergman_alpha0_monomials_exact = (b.alpha == 0.0).then(|| bergman_alpha0_exact_check(200));
    Ok(BlockProbeReport {
        note: STAND_IN_NOTE,
        alpha: b.alpha,
        gates,
        windows: b.windows.clone(),
        structural_ok,
        parts_match_standalone,
        power,
        zero_coupling_sup,
        doubled_coupling_sup,
        intertwining,
        function_model,
        eigen,
        resolvent,
        bergman_degree_100,
        bergman_degree_1000,
        bergman_alpha0_monomials_exact,
    })
}

pub fn cmd_blockprobe(l: &Loaded, out: &Path) -> Result<Outcome, CliError> {
    let s = &l.scenario;
    let rep = blockprobe(s)?;
    let mut files = Vec::new();
    write(out, format!("{}.blockprobe.json", s.id), &json(&envelope("blockprobe", l, &rep)), &mut files)?;
    let summary = format!(
        "blockprobe {}: power sups {:?} (spread {:.3e}), intertwining {:.1e}, function_model {:.1e}, min σ(T-λ) {:.3e}",
        s.id,
        rep.power.rows.iter().map(|r| r.sup_norm).collect::<Vec<_>>(),
        rep.power.relative_spread,
        rep.intertwining.max_abs_error,
        rep.function_model.max_abs_error,
        rep.eigen.min_sigma_rect
    );
    Ok(Outcome { exit_code: 0, files, summary })
}
