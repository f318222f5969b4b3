//! Runners behind the CLI subcommands. Each returns the rendered report and
//! whether every tolerance check passed; numerical failures surface as
//! errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bls::{
    brute_force_k_min, chern_curvature_fd, curvature_hermitian_defect, gauss_griffiths_check, griffiths_not_nakano,
    random_instance, schur_complement_demailly, FiniteBLSField, HermitianFormOnTensor, POSITIVITY_TOL,
};
use crate::config::{ExperimentConfig, Tolerances};
use crate::curvature::{curvature_h, hodge_riemann_check, lift_independence_check, CurvatureReport};
use crate::error::{Error, Result};
use crate::family::{
    kappa, primitive_lift, primitivity_residual, trivialization_lift, FamilyFiber, FamilySpec, HorizontalLift, LiftKind,
};
use crate::field::VerticalVectorField;
use crate::hodge::HodgeOptions;
use crate::identities::{run_identity_suite, IdentityReport, IdentityTolerances};
use crate::linalg::{c, CMat, C64};
use crate::oracle::{fd_chern_curvature_h, rank_scan};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub pass: bool,
    /// `bidegree,index,eigenvalue` rows when a spectrum dump was requested.
    pub spectrum_csv: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Check {
        Check { name: name.into(), value, tolerance, pass: value <= tolerance }
    }

    fn at_least(name: &str, value: f64, bound: f64) -> Check {
        Check { name: name.into(), value, tolerance: bound, pass: value >= bound }
    }
}

fn render<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn fiber_context(cfg: &ExperimentConfig) -> Result<(FamilySpec, FamilyFiber)> {
    let spec = cfg.family_spec()?;
    let opts = HodgeOptions { rank_tol: cfg.tolerances.rank, seed: cfg.seed, ..HodgeOptions::default() };
    let ctx = FamilyFiber::new(&spec, spec.t, cfg.disc(&spec), opts)?;
    Ok((spec, ctx))
}

/// The lift named in the config: the trivialization lift, optionally moved
/// by a seeded random vertical field, optionally made primitive.
pub fn configured_lift(cfg: &ExperimentConfig, ctx: &FamilyFiber) -> Result<HorizontalLift> {
    let base = trivialization_lift(ctx, cfg.tau());
    let perturbed = || -> Result<HorizontalLift> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let v = VerticalVectorField::random(&ctx.fiber, cfg.lift.band, cfg.lift.amplitude, &mut rng)?;
        Ok(base.perturbed(&v))
    };
    match cfg.lift.kind {
        LiftKind::Trivialization => Ok(base),
        LiftKind::Perturbed => perturbed(),
        LiftKind::Primitive => primitive_lift(ctx, &perturbed()?),
    }
}

#[derive(Serialize)]
struct HodgeCheckOutput {
    command: &'static str,
    family: String,
    t: C64,
    seed: u64,
    tolerances: IdentityTolerances,
    identities: IdentityReport,
    pass: bool,
}

fn hodge_check(cfg: &ExperimentConfig) -> Result<(HodgeCheckOutput, FamilyFiber)> {
    let (spec, ctx) = fiber_context(cfg)?;
    let tol = IdentityTolerances {
        operator: cfg.tolerances.identity,
        hodge: cfg.tolerances.hodge,
        minimal_solution: cfg.tolerances.minimal_solution,
    };
    let identities = run_identity_suite(&ctx.fiber, &ctx.hodge, tol, cfg.seed)?;
    let out = HodgeCheckOutput {
        command: "hodge-check",
        family: spec.id,
        t: spec.t,
        seed: cfg.seed,
        tolerances: tol,
        pass: identities.pass,
        identities,
    };
    Ok((out, ctx))
}

fn spectrum_csv(ctx: &FamilyFiber) -> Result<String> {
    let n = ctx.n();
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["bidegree", "index", "eigenvalue"]).map_err(io)?;
    for p in 0..=n {
        for q in 0..=n {
            for (i, v) in ctx.hodge.package(p, q)?.spectrum.iter().enumerate() {
                w.write_record([format!("({p},{q})"), i.to_string(), format!("{v:e}")]).map_err(io)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn run_hodge_check(cfg: &ExperimentConfig, dump_spectrum: bool) -> Result<Outcome> {
    let (out, ctx) = hodge_check(cfg)?;
    let spectrum_csv = if dump_spectrum { Some(spectrum_csv(&ctx)?) } else { None };
    Ok(Outcome { pass: out.pass, body: render(&out)?, spectrum_csv })
}

#[derive(Serialize)]
struct OracleComparison {
    fd_step: f64,
    #[serde(serialize_with = "crate::curvature::serialize_cmat")]
    fd: CMat,
    relative_error: f64,
    relative_error_bly: f64,
}

#[derive(Serialize)]
struct CurvatureOutput {
    command: &'static str,
    seed: u64,
    tolerances: Tolerances,
    report: CurvatureReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleComparison>,
    checks: Vec<Check>,
    pass: bool,
}

fn curvature(cfg: &ExperimentConfig) -> Result<CurvatureOutput> {
    let (spec, ctx) = fiber_context(cfg)?;
    let lift = configured_lift(cfg, &ctx)?;
    let basis = ctx.harmonic_basis()?;
    let report = curvature_h(&ctx, &lift, Some(&basis), cfg.sigma(), cfg.tau())?;
    let tol = &cfg.tolerances;
    let mut checks = Vec::new();
    if report.rank > 0 && !report.jump_flag {
        checks.push(Check::at_most("residual_routes", report.residual_routes, tol.routes));
        checks.push(Check::at_most("residual_sff_routes", report.residual_sff_routes, tol.sff_routes));
        checks.push(Check::at_most("residual_primitive", report.residual_primitive, tol.representatives));
        checks.push(Check::at_most("residual_orthogonal", report.residual_orthogonal, tol.representatives));
        checks.push(Check::at_most("residual_class", report.residual_class, tol.representatives));
        checks.push(Check::at_least("nakano_min_eig", report.nakano_min_eig, -tol.nakano));
        checks.push(Check::at_least("sff_min_eig", report.sff_min_eig, -tol.sff_psd));
        checks.push(Check::at_most("hermitian_defect", report.hermitian_defect, 1e-10));
    }
    let oracle = if cfg.oracle && report.rank > 0 && !report.jump_flag {
        let grid = ctx.fiber.grid_size().unwrap_or(0);
        let fd = fd_chern_curvature_h(&spec, spec.t, tol.fd_step, grid, Some(&basis))? * (cfg.sigma() * cfg.tau().conj());
        let scale = report.theta_h.norm();
        let relative_error = (&report.theta_h - &fd).norm() / scale;
        let relative_error_bly = (&report.theta_h_bly - &fd).norm() / scale;
        checks.push(Check::at_most("oracle_three_term", relative_error, tol.oracle));
        checks.push(Check::at_most("oracle_bly", relative_error_bly, tol.oracle));
        Some(OracleComparison { fd_step: tol.fd_step, fd, relative_error, relative_error_bly })
    } else {
        None
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(CurvatureOutput { command: "curvature", seed: cfg.seed, tolerances: *tol, report, oracle, checks, pass })
}

pub fn run_curvature(cfg: &ExperimentConfig) -> Result<Outcome> {
    let out = curvature(cfg)?;
    Ok(Outcome { pass: out.pass, body: render(&out)?, spectrum_csv: None })
}

/// CSV with columns `t_re, t_im, rank, lambda1`.
pub fn run_scan_rank(cfg: &ExperimentConfig) -> Result<Outcome> {
    let spec = cfg.family_spec()?;
    let samples = rank_scan(&spec, &cfg.scan_points()?)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["t_re", "t_im", "rank", "lambda1"]).map_err(io)?;
    for s in &samples {
        w.write_record([s.t.re.to_string(), s.t.im.to_string(), s.rank.to_string(), s.lambda1.to_string()])
            .map_err(io)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
        .map_err(|e| Error::Io(e.to_string()))?;
    Ok(Outcome { body, pass: samples.iter().all(|s| s.gap_ok), spectrum_csv: None })
}

#[derive(Serialize)]
struct HodgeRiemannEntry {
    lhs: C64,
    rhs: f64,
    relative_residual: f64,
}

#[derive(Serialize)]
struct PrimitiveLiftOutput {
    command: &'static str,
    family: String,
    t: C64,
    seed: u64,
    n: usize,
    base_lift: LiftKind,
    residual_before: f64,
    residual_after: f64,
    /// `‖w_primitive - w_base‖`; zero on curves.
    vertical_change: f64,
    hodge_riemann: Vec<HodgeRiemannEntry>,
    lift_independence: f64,
    checks: Vec<Check>,
    pass: bool,
}

fn primitive(cfg: &ExperimentConfig) -> Result<PrimitiveLiftOutput> {
    let (spec, ctx) = fiber_context(cfg)?;
    if !spec.is_flat() {
        return Err(Error::ConfigInvalid("primitive-lift runs on flat-bundle families".into()));
    }
    let base = match cfg.lift.kind {
        LiftKind::Primitive => {
            let mut c = cfg.clone();
            c.lift.kind = LiftKind::Perturbed;
            configured_lift(&c, &ctx)?
        }
        _ => configured_lift(cfg, &ctx)?,
    };
    let prim = primitive_lift(&ctx, &base)?;
    let basis = ctx.harmonic_basis()?;
    let residual_before = primitivity_residual(&base, &basis)?;
    let residual_after = primitivity_residual(&prim, &basis)?;
    let diff = prim.vertical.sub(&base.vertical);
    let vertical_change = diff.comps.iter().map(|f| f.norm().powi(2)).sum::<f64>().sqrt();
    let mut hodge_riemann = Vec::new();
    for f in &basis {
        let k = kappa(&prim, f)?;
        let hr = hodge_riemann_check(&k)?;
        let scale = hr.rhs.abs();
        let relative_residual = if scale > 0.0 { hr.residual / scale } else { hr.residual };
        hodge_riemann.push(HodgeRiemannEntry { lhs: hr.lhs, rhs: hr.rhs, relative_residual });
    }
    let tol = &cfg.tolerances;
    let lift_independence = lift_independence_check(&ctx, Some(&basis), &base, &prim, cfg.sigma(), cfg.tau())?;
    let mut checks = vec![Check::at_most("primitivity_residual", residual_after, tol.primitivity)];
    let worst_hr = hodge_riemann.iter().map(|h| h.relative_residual).fold(0.0, f64::max);
    checks.push(Check::at_most("hodge_riemann", worst_hr, tol.hodge_riemann));
    checks.push(Check::at_most("lift_independence", lift_independence, tol.lift_independence));
    if ctx.n() == 1 {
        checks.push(Check::at_most("curve_lift_unchanged", vertical_change, 0.0));
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(PrimitiveLiftOutput {
        command: "primitive-lift",
        family: spec.id,
        t: spec.t,
        seed: cfg.seed,
        n: ctx.n(),
        base_lift: base.kind,
        residual_before,
        residual_after,
        vertical_change,
        hodge_riemann,
        lift_independence,
        checks,
        pass,
    })
}

pub fn run_primitive_lift(cfg: &ExperimentConfig) -> Result<Outcome> {
    let out = primitive(cfg)?;
    Ok(Outcome { pass: out.pass, body: render(&out)?, spectrum_csv: None })
}

#[derive(Serialize)]
struct SchurCase {
    seed: u64,
    m: usize,
    r: usize,
    split: (usize, usize),
    k: usize,
    als_min: f64,
    brute_min: f64,
    als_positive: bool,
    brute_positive: bool,
    form_positive: bool,
}

#[derive(Serialize)]
struct GriffithsNotNakano {
    form: HermitianFormOnTensor,
    one_positive: bool,
    two_positive: bool,
    one_min: f64,
    two_min: f64,
    brute_one_min: f64,
    brute_two_min: f64,
}

#[derive(Serialize)]
struct BlsOutput {
    command: &'static str,
    seed: u64,
    step: f64,
    restarts: usize,
    checks: Vec<Check>,
    disagreements: usize,
    monotonicity_violations: usize,
    /// Full-rank instances where a positive form has a non-positive Schur complement.
    nakano_schur_violations: usize,
    /// Rank-`k` instances where the form is `k`-positive on the whole space
    /// but its Schur complement is not; the completing tensor raises the rank.
    low_rank_schur_counterexamples: Vec<(u64, usize)>,
    cases: Vec<SchurCase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    griffiths_not_nakano: Option<GriffithsNotNakano>,
    pass: bool,
}

fn bls(cfg: &ExperimentConfig) -> Result<BlsOutput> {
    let b = cfg.bls;
    let step = b.step;
    let tol = 10.0 * step * step;
    let mut checks = Vec::new();

    let t = c(0.2, -0.4);
    let unit = FiniteBLSField::exponential(&[1.0, 1.0]);
    let k = chern_curvature_fd(&unit, t, step)?;
    checks.push(Check::at_most("exponential_curvature", (k + CMat::identity(2, 2)).norm(), 2.0 * step * step));
    let rates = [1.0, 2.5];
    let diag = FiniteBLSField::exponential(&rates);
    let k = chern_curvature_fd(&diag, t, step)?;
    let want = CMat::from_diagonal(&nalgebra::DVector::from_iterator(2, rates.iter().map(|a| C64::from(-a))));
    checks.push(Check::at_most("diagonal_curvature", (&k - want).norm(), 2.0 * 2.5f64.powi(2) * step * step));
    checks.push(Check::at_most("curvature_hermitian", curvature_hermitian_defect(&diag, t, &k)?, tol));

    // d h(f₁, f₂)/dt against h(∇f₁, f₂) + h(f₁, ∇̄f₂) for constant sections
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut gauss = || C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    let f1 = nalgebra::DVector::from_iterator(2, (0..2).map(|_| gauss()));
    let f2 = nalgebra::DVector::from_iterator(2, (0..2).map(|_| gauss()));
    let pair = |z: C64| -> Result<C64> { Ok((f2.adjoint() * diag.metric(z)? * &f1)[(0, 0)]) };
    let dx = (pair(t + step)? - pair(t - step)?) / (2.0 * step);
    let dy = (pair(t + C64::new(0.0, step))? - pair(t - C64::new(0.0, step))?) / (2.0 * step);
    let d_pair = (dx - dy * C64::new(0.0, 1.0)) * 0.5;
    let h = diag.metric(t)?;
    let hx = (diag.metric(t + step)? - diag.metric(t - step)?) / C64::from(2.0 * step);
    let hy = (diag.metric(t + C64::new(0.0, step))? - diag.metric(t - C64::new(0.0, step))?) / C64::from(2.0 * step);
    let dh = (hx - hy * C64::new(0.0, 1.0)) * C64::from(0.5);
    let nabla_f1 = crate::linalg::inverse(&h)? * dh * &f1;
    let compat = (d_pair - (f2.adjoint() * &h * nabla_f1)[(0, 0)]).norm();
    checks.push(Check::at_most("metric_compatibility", compat, tol));

    let gg = gauss_griffiths_check(&FiniteBLSField::rotating_line(), c(0.3, 0.2), step)?;
    checks.push(Check::at_most("gauss_griffiths_rotating_line", gg.residual, tol));
    let gg_id = gauss_griffiths_check(&FiniteBLSField::exponential(&[1.0, 0.5]), c(0.1, 0.2), step)?;
    checks.push(Check::at_most("gauss_griffiths_whole_space", gg_id.residual, tol));

    let mut cases = Vec::new();
    let (mut disagreements, mut monotonicity_violations, mut nakano_schur_violations) = (0, 0, 0);
    let mut low_rank_schur_counterexamples = Vec::new();
    for i in 0..b.instances {
        let seed = cfg.seed.wrapping_add(i as u64);
        let form = random_instance(seed);
        let whole = HermitianFormOnTensor::new(form.m, form.r, form.phi.clone(), (form.m, 0), form.fiber_metric.clone())?;
        let mut verdicts = Vec::new();
        for k in 1..=2 {
            let als = schur_complement_demailly(&form, k, b.restarts, seed)?;
            let brute_min = brute_force_k_min(&form, k)?;
            let brute_positive = brute_min > POSITIVITY_TOL;
            let form_positive = schur_complement_demailly(&whole, k, b.restarts, seed)?.is_k_positive;
            if als.is_k_positive != brute_positive {
                disagreements += 1;
            }
            if form_positive && !brute_positive {
                low_rank_schur_counterexamples.push((seed, k));
            }
            verdicts.push(brute_positive);
            cases.push(SchurCase {
                seed,
                m: form.m,
                r: form.r,
                split: form.split,
                k,
                als_min: als.min_value,
                brute_min,
                als_positive: als.is_k_positive,
                brute_positive,
                form_positive,
            });
        }
        if verdicts[1] && !verdicts[0] {
            monotonicity_violations += 1;
        }
        let whole_nakano = brute_force_k_min(&whole, form.m.min(form.r))?;
        let schur_nakano = brute_force_k_min(&form, form.split.0.min(form.r))?;
        if whole_nakano > POSITIVITY_TOL && schur_nakano <= POSITIVITY_TOL {
            nakano_schur_violations += 1;
        }
    }
    checks.push(Check::at_most("schur_disagreements", disagreements as f64, 0.0));
    checks.push(Check::at_most("monotonicity_violations", monotonicity_violations as f64, 0.0));
    checks.push(Check::at_most("nakano_schur_violations", nakano_schur_violations as f64, 0.0));

    let griffiths_not_nakano = if b.inject_griffiths_not_nakano {
        let form = griffiths_not_nakano();
        let one = schur_complement_demailly(&form, 1, b.restarts, cfg.seed)?;
        let two = schur_complement_demailly(&form, 2, b.restarts, cfg.seed)?;
        let g = GriffithsNotNakano {
            one_positive: one.is_k_positive,
            two_positive: two.is_k_positive,
            one_min: one.min_value,
            two_min: two.min_value,
            brute_one_min: brute_force_k_min(&form, 1)?,
            brute_two_min: brute_force_k_min(&form, 2)?,
            form,
        };
        let ok = g.one_positive && !g.two_positive && (g.brute_one_min > POSITIVITY_TOL) && g.brute_two_min < 0.0;
        checks.push(Check { name: "griffiths_not_nakano".into(), value: g.two_min, tolerance: 0.0, pass: ok });
        Some(g)
    } else {
        None
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(BlsOutput {
        command: "bls",
        seed: cfg.seed,
        step,
        restarts: b.restarts,
        checks,
        disagreements,
        monotonicity_violations,
        nakano_schur_violations,
        low_rank_schur_counterexamples,
        cases,
        griffiths_not_nakano,
        pass,
    })
}

pub fn run_bls(cfg: &ExperimentConfig) -> Result<Outcome> {
    let out = bls(cfg)?;
    Ok(Outcome { pass: out.pass, body: render(&out)?, spectrum_csv: None })
}

#[derive(Serialize)]
struct FullReport {
    command: &'static str,
    hodge_check: HodgeCheckOutput,
    curvature: CurvatureOutput,
    pass: bool,
}

/// Identity suite and curvature pipeline for one configuration.
pub fn run_report(cfg: &ExperimentConfig, dump_spectrum: bool) -> Result<Outcome> {
    let (hodge_check, ctx) = hodge_check(cfg)?;
    let spectrum_csv = if dump_spectrum { Some(spectrum_csv(&ctx)?) } else { None };
    let curvature = curvature(cfg)?;
    let pass = hodge_check.pass && curvature.pass;
    let out = FullReport { command: "report", hodge_check, curvature, pass };
    Ok(Outcome { pass, body: render(&out)?, spectrum_csv })
}
