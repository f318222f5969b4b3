//! One-parameter families of tori, horizontal lifts, Kodaira–Spencer
//! representatives, holomorphic extensions of fiber sections and the
//! representative corrections used by the curvature formulas.
//!
//! Every family is written in the universal trivialization `z = x + Ω(t) y`
//! with `(x, y)` held fixed. The trivialization lift is `∂/∂t` at fixed
//! `(x, y)`; its `∂̄` along the fiber is the constant form
//! `K₀ = -Σ M_{jl} dz̄_l ⊗ ∂/∂z_j` with `M = Ω'(Ω - Ω̄)^{-1}`. A general lift
//! adds a vertical field `w`, giving `∂̄ξ = K₀ + ∂̄w`. Lifts are stored for
//! the unit base direction and scaled by `τ` on use.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{KsForm, ScalarField, VerticalVectorField};
use crate::hodge::{minimal_solution_tol, neumann_project, HodgeOptions, HodgeSystem};
use crate::linalg::{inverse, CMat, C64, I, ONE, ZERO};
use crate::operator::{assemble_dbar, assemble_nabla10, lefschetz_l, lefschetz_lambda};
use crate::space::{Disc, Fiber, FormSection};
use crate::torus::{BundleData, LatticeTorus};

/// Holomorphic period maps of the catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum PeriodMap {
    /// `Ω(t) = t` on elliptic curves.
    Elliptic,
    /// `Ω(t) = [[t, b], [b, c]]` on abelian surfaces.
    SiegelDiagonal { b: C64, c: C64 },
    /// A fixed period matrix: the trivial family.
    Constant(CMat),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BundleMap {
    Flat { character: Vec<f64> },
    /// Flat bundle of the divisor `[0] - [a(t)]`, `a(t)` the image of `√-1`.
    Jumping,
    Positive { degree: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub id: String,
    pub period_map: PeriodMap,
    pub bundle_map: BundleMap,
    /// Base point.
    pub t: C64,
    /// Base tangent direction.
    pub tau: C64,
}

/// Character of the jumping family at `t`: the point `√-1 = x + t y` of the
/// fiber gives `χ = (y, -x) mod 1`.
pub fn jumping_character(t: C64) -> [f64; 2] {
    let y = 1.0 / t.im;
    let x = -t.re / t.im;
    let wrap = |v: f64| {
        let r = v.rem_euclid(1.0);
        if (1.0 - r).abs() < 1e-12 {
            0.0
        } else {
            r
        }
    };
    [wrap(y), wrap(-x)]
}

/// Integers `(m, n)` with `m + n t = √-1`, if any (tolerance 1e-9).
pub fn jump_locus_member(t: C64) -> Option<(i64, i64)> {
    if t.im <= 0.0 {
        return None;
    }
    let n = 1.0 / t.im;
    let m = -n * t.re;
    let (rn, rm) = (n.round(), m.round());
    ((n - rn).abs() <= 1e-9 && (m - rm).abs() <= 1e-9).then_some((rm as i64, rn as i64))
}

/// The family `ℂ/(ℤ + tℤ)` with the flat bundle of `[0] - [√-1]`.
pub fn jumping_family(t: C64) -> FamilySpec {
    FamilySpec { id: "jumping".into(), period_map: PeriodMap::Elliptic, bundle_map: BundleMap::Jumping, t, tau: ONE }
}

impl FamilySpec {
    pub fn elliptic(t: C64, bundle_map: BundleMap) -> Self {
        FamilySpec { id: "elliptic".into(), period_map: PeriodMap::Elliptic, bundle_map, t, tau: ONE }
    }

    pub fn siegel_diagonal(t: C64, b: C64, c: C64, character: Vec<f64>) -> Self {
        FamilySpec {
            id: "siegel-diagonal".into(),
            period_map: PeriodMap::SiegelDiagonal { b, c },
            bundle_map: BundleMap::Flat { character },
            t,
            tau: ONE,
        }
    }

    pub fn constant(period: CMat, bundle_map: BundleMap, t: C64) -> Self {
        FamilySpec { id: "constant".into(), period_map: PeriodMap::Constant(period), bundle_map, t, tau: ONE }
    }

    pub fn with_direction(mut self, tau: C64) -> Self {
        self.tau = tau;
        self
    }

    pub fn dim(&self) -> usize {
        match &self.period_map {
            PeriodMap::Elliptic => 1,
            PeriodMap::SiegelDiagonal { .. } => 2,
            PeriodMap::Constant(p) => p.nrows(),
        }
    }

    pub fn period(&self, t: C64) -> CMat {
        match &self.period_map {
            PeriodMap::Elliptic => CMat::from_element(1, 1, t),
            PeriodMap::SiegelDiagonal { b, c } => CMat::from_row_slice(2, 2, &[t, *b, *b, *c]),
            PeriodMap::Constant(p) => p.clone(),
        }
    }

    /// `dΩ/dt`.
    pub fn period_derivative(&self) -> CMat {
        match &self.period_map {
            PeriodMap::Elliptic => CMat::from_element(1, 1, ONE),
            PeriodMap::SiegelDiagonal { .. } => CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]),
            PeriodMap::Constant(p) => CMat::zeros(p.nrows(), p.ncols()),
        }
    }

    pub fn torus(&self, t: C64) -> Result<LatticeTorus> {
        LatticeTorus::new(self.dim(), self.period(t))
    }

    pub fn bundle(&self, torus: &LatticeTorus, t: C64) -> Result<BundleData> {
        match &self.bundle_map {
            BundleMap::Flat { character } => BundleData::flat(torus, character),
            BundleMap::Jumping => BundleData::flat(torus, &jumping_character(t)),
            BundleMap::Positive { degree } => BundleData::positive(torus, *degree, None),
        }
    }

    pub fn is_flat(&self) -> bool {
        !matches!(self.bundle_map, BundleMap::Positive { .. })
    }

    /// Grid `N=64` for positive bundles, spectral `M=8` (`n=1`) or `M=4`.
    pub fn default_disc(&self) -> Disc {
        match (&self.bundle_map, self.dim()) {
            (BundleMap::Positive { .. }, _) => Disc::Grid { n: 64 },
            (_, 1) => Disc::Spectral { m: 8 },
            _ => Disc::Spectral { m: 4 },
        }
    }

    pub fn fiber(&self, t: C64, disc: Disc) -> Result<Arc<Fiber>> {
        let torus = self.torus(t)?;
        let bundle = self.bundle(&torus, t)?;
        Fiber::new(torus, bundle, disc)
    }
}

/// A fiber of a family with its lazily built Hodge packages.
#[derive(Debug)]
pub struct FamilyFiber {
    pub family: FamilySpec,
    pub t: C64,
    pub fiber: Arc<Fiber>,
    pub hodge: HodgeSystem,
    scalar: std::sync::OnceLock<Arc<HodgeSystem>>,
}

impl FamilyFiber {
    pub fn new(family: &FamilySpec, t: C64, disc: Disc, opts: HodgeOptions) -> Result<Self> {
        let fiber = family.fiber(t, disc)?;
        Ok(FamilyFiber {
            family: family.clone(),
            t,
            hodge: HodgeSystem::new(fiber.clone(), opts),
            fiber,
            scalar: std::sync::OnceLock::new(),
        })
    }

    pub fn at_base_point(family: &FamilySpec) -> Result<Self> {
        Self::new(family, family.t, family.default_disc(), HodgeOptions::default())
    }

    pub fn n(&self) -> usize {
        self.fiber.n()
    }

    /// `M = Ω'(Ω - Ω̄)^{-1}`.
    pub fn m_matrix(&self) -> CMat {
        self.family.period_derivative() * self.fiber.torus.a_matrix()
    }

    /// Orthonormal basis of `ℋ_t`, the harmonic `(n,0)`-forms.
    pub fn harmonic_basis(&self) -> Result<Vec<FormSection>> {
        let n = self.n();
        Ok(self.hodge.package(n, 0)?.harmonic_basis.clone())
    }

    /// Hodge packages of scalar forms (trivial bundle, same discretization).
    fn scalar_hodge(&self) -> Result<Arc<HodgeSystem>> {
        if let Some(h) = self.scalar.get() {
            return Ok(h.clone());
        }
        if !self.fiber.is_spectral() {
            return Err(Error::HodgeUnavailable("scalar forms need the spectral backend".into()));
        }
        let torus = self.fiber.torus.clone();
        let zero = vec![0.0; 2 * torus.n];
        let bundle = BundleData::flat(&torus, &zero)?;
        let fib = Fiber::new(torus, bundle, self.fiber.disc)?;
        let sys = Arc::new(HodgeSystem::new(fib, self.hodge.opts));
        let _ = self.scalar.set(sys);
        Ok(self.scalar.get().expect("just set").clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftKind {
    Trivialization,
    Perturbed,
    Primitive,
}

/// `ξ = τ(∂/∂t + w)` on one fiber.
#[derive(Debug, Clone)]
pub struct HorizontalLift {
    pub t: C64,
    pub tau: C64,
    pub kind: LiftKind,
    /// Vertical part `w` for the unit direction.
    pub vertical: VerticalVectorField,
    /// `K₀`, the fiber `∂̄` of the trivialization lift.
    pub k0: KsForm,
    /// `∂̄ξ = K₀ + ∂̄w` for the unit direction.
    pub ks: KsForm,
}

pub fn trivialization_lift(ctx: &FamilyFiber, tau: C64) -> HorizontalLift {
    let k0 = KsForm::constant(&ctx.fiber, &(-ctx.m_matrix()));
    HorizontalLift {
        t: ctx.t,
        tau,
        kind: LiftKind::Trivialization,
        vertical: VerticalVectorField::zero(&ctx.fiber),
        ks: k0.clone(),
        k0,
    }
}

impl HorizontalLift {
    /// The lift `ξ + τ v` for a vertical field `v`.
    pub fn perturbed(&self, v: &VerticalVectorField) -> HorizontalLift {
        let vertical = self.vertical.add(v);
        let ks = self.k0.add(&vertical.dbar());
        HorizontalLift { kind: LiftKind::Perturbed, vertical, ks, ..self.clone() }
    }
}

/// `∂̄ξ^θ_τ` restricted to the fiber.
pub fn ks_representative(lift: &HorizontalLift) -> KsForm {
    lift.ks.scale(lift.tau)
}

/// `κ f = (∂̄ξ) ⌟ f`.
pub fn kappa(lift: &HorizontalLift, f: &FormSection) -> Result<FormSection> {
    Ok(lift.ks.contract(f)?.scale(lift.tau))
}

/// `‖ω ∧ (∂̄ξ ⌟ f)‖ / ‖f‖`, maximized over the given sections.
pub fn primitivity_residual(lift: &HorizontalLift, sections: &[FormSection]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for f in sections {
        let k = lift.ks.contract(f)?;
        let (p, q) = k.bidegree();
        let n = f.space.fiber.n();
        if p + 1 > n || q + 1 > n {
            continue;
        }
        let wk = lefschetz_l(&k.space)?.apply(&k)?;
        let fnorm = f.norm();
        if fnorm > 0.0 {
            worst = worst.max(wk.norm() / fnorm);
        }
    }
    Ok(worst)
}

/// Corrects `base` by `η = (∂̄*G(∂̄ξ ⌟ ω))^♯` so that `∂̄ξ ⌟ ω` has no
/// `∂̄`-exact part. On curves `(0,2)`-forms vanish and `base` is returned.
pub fn primitive_lift(ctx: &FamilyFiber, base: &HorizontalLift) -> Result<HorizontalLift> {
    let n = ctx.n();
    if n == 1 {
        return Ok(base.clone());
    }
    let scalar = ctx.scalar_hodge()?;
    let ext = &ctx.fiber.ext;
    let omega = ext.omega_power(1);
    let kw = base.ks.contract_constant(&omega, (1, 1))?;
    let s02 = scalar.space(0, 2)?;
    let coeffs: Vec<C64> = kw.iter().flat_map(|f| f.values.iter().copied()).collect();
    let alpha = FormSection::new(s02, coeffs)?;
    let pkg = scalar.package(0, 2)?;
    let beta = assemble_dbar(&scalar.space(0, 1)?)?.adjoint().apply(&pkg.green(&alpha)?)?;
    // ι_{E_a} ω as (0,1)-forms, column a
    let s01 = scalar.space(0, 1)?;
    let om = nalgebra::DVector::from_column_slice(&omega);
    let mut contr = CMat::zeros(s01.components(), n);
    for a in 0..n {
        contr.set_column(a, &(ext.iota(a, (1, 1)) * &om));
    }
    let sharp = inverse(&contr)?;
    let sites = ctx.fiber.sites;
    let beta_fields: Vec<ScalarField> = (0..s01.components())
        .map(|c| ScalarField { fiber: ctx.fiber.clone(), values: beta.coeffs[c * sites..(c + 1) * sites].to_vec() })
        .collect();
    let eta_frame: Vec<ScalarField> = (0..n)
        .map(|a| {
            let mut acc = ScalarField::zero(&ctx.fiber);
            for (b, f) in beta_fields.iter().enumerate() {
                acc = acc.add(&f.scale(sharp[(a, b)]));
            }
            acc
        })
        .collect();
    let eta = VerticalVectorField::from_frame(&ctx.fiber, eta_frame)?;
    let vertical = base.vertical.sub(&eta);
    let ks = base.k0.add(&vertical.dbar());
    Ok(HorizontalLift { kind: LiftKind::Primitive, vertical, ks, ..base.clone() })
}

/// Holomorphic extension data of `f ∈ ℋ_t` along the unit base direction.
#[derive(Debug, Clone)]
pub struct Extension {
    /// `f = a · dz_1 ∧ … ∧ dz_n`.
    pub a: FormSection,
    /// `ȧ`, the minimal solution of `∂̄ȧ = K₀ ⌟ ∇^{1,0} a`.
    pub a_dot: FormSection,
    /// `φ⁰ = (ȧ + tr(M) a) dz_1 ∧ … ∧ dz_n`, the `t`-derivative of the
    /// extension at fixed `(x, y)`.
    pub phi0: FormSection,
    /// `‖℘(K₀ ⌟ ∇a)‖ / ‖K₀ ⌟ ∇a‖`; nonzero means no holomorphic extension.
    pub obstruction: f64,
}

/// Extension of `f` to nearby fibers, holomorphic in `t` to first order.
pub fn extension(ctx: &FamilyFiber, f: &FormSection, tol: f64) -> Result<Extension> {
    let n = ctx.n();
    if f.bidegree() != (n, 0) {
        return Err(Error::InvalidArgument("extensions are built for (n,0)-forms".into()));
    }
    let tff = ctx.fiber.torus.top_form_factor();
    let s00 = ctx.hodge.space(0, 0)?;
    let a = f.pointwise(&CMat::from_element(1, 1, ONE / tff), &s00)?;
    let k0 = KsForm::constant(&ctx.fiber, &(-ctx.m_matrix()));
    let rhs = k0.contract(&assemble_nabla10(&s00)?.apply(&a)?)?;
    let pkg = ctx.hodge.package(0, 1)?;
    let rn = rhs.norm();
    let obstruction = if rn > 0.0 { pkg.harmonic_projection(&rhs)?.norm() / rn } else { 0.0 };
    let a_dot = match minimal_solution_tol(&pkg, &rhs, tol) {
        Ok(u) => u,
        Err(Error::NotCoexact(r)) => return Err(Error::ExtensionNotAdmissible(r)),
        Err(e) => return Err(e),
    };
    let tr = ctx.m_matrix().trace();
    let coeff = a_dot.axpy(tr, &a);
    let phi0 = coeff.pointwise(&CMat::from_element(1, 1, tff), &f.space)?;
    Ok(Extension { a, a_dot, phi0, obstruction })
}

/// `ι*(L^{1,0}_ξ u) = τ(∇^{1,0}(w ⌟ f) + φ⁰)` for the holomorphic
/// extension `u` of `f`.
pub fn lie_derivative_10(ctx: &FamilyFiber, lift: &HorizontalLift, f: &FormSection) -> Result<FormSection> {
    let ext = extension(ctx, f, 1e-6)?;
    let wf = lift.vertical.contract(f)?;
    let out = assemble_nabla10(&wf.space)?.apply(&wf)?.add(&ext.phi0)?;
    Ok(out.scale(lift.tau))
}

/// `ι*(L^{0,1}_ξ̄ u) = τ̄ (w̄ ⌟ ∂̄f)` for the holomorphic extension of an
/// `(n,0)`-form `f`.
pub fn lie_derivative_01(lift: &HorizontalLift, f: &FormSection) -> Result<FormSection> {
    let df = assemble_dbar(&f.space)?.apply(f)?;
    Ok(lift.vertical.contract_conj(&df)?.scale(lift.tau.conj()))
}

/// Decomposition of a section of `ℋ` near `t` with the corrections that make
/// the contracted derivatives primitive and orthogonal to `ℋ_t`, for the
/// unit base direction.
#[derive(Debug, Clone)]
pub struct RepresentativeSet {
    pub f: FormSection,
    /// `α⁰ = K₀ ⌟ f`
    pub alpha0: FormSection,
    /// `γ = w ⌟ ∂̄f`
    pub gamma: FormSection,
    pub phi0: FormSection,
    /// `Λ ∂̄* G(ω ∧ (γ + α⁰))`
    pub v1: FormSection,
    /// `∇^{1,0*} G P⊥ φ⁰`
    pub v2: FormSection,
    /// `w ⌟ f + V¹ + V²`
    pub x: FormSection,
    /// `γ + α⁰ - ∂̄(V¹ + V²)`
    pub y: FormSection,
    /// `‖ω ∧ Y‖ / ‖f‖`
    pub residual_primitive: f64,
    /// `‖P⊥(φ⁰ - ∇V)‖ / ‖f‖`
    pub residual_orthogonal: f64,
    /// `‖℘((∂̄ξ) ⌟ f - Y)‖ / ‖f‖`
    pub residual_class: f64,
    pub primitive_ok: bool,
    pub orthogonality_ok: bool,
}

pub fn berndtsson_representative(ctx: &FamilyFiber, lift: &HorizontalLift, f: &FormSection) -> Result<RepresentativeSet> {
    const TOL: f64 = 1e-6;
    let n = ctx.n();
    if f.bidegree() != (n, 0) {
        return Err(Error::InvalidArgument("representatives are built for (n,0)-forms".into()));
    }
    let fnorm = f.norm();
    let rel = |x: f64| if fnorm > 0.0 { x / fnorm } else { x };
    let ext = extension(ctx, f, TOL)?;
    let alpha0 = lift.k0.contract(f)?;
    let df = assemble_dbar(&f.space)?.apply(f)?;
    let gamma = lift.vertical.contract(&df)?;
    let ga = gamma.add(&alpha0)?;
    let s_n1 = ctx.hodge.space(n - 1, 1)?;
    let s_v = ctx.hodge.space(n - 1, 0)?;

    let v1 = if n >= 2 {
        let wg = lefschetz_l(&s_n1)?.apply(&ga)?;
        let pkg = ctx.hodge.package(n, 2)?;
        let d = assemble_dbar(&ctx.hodge.space(n, 1)?)?.adjoint().apply(&pkg.green(&wg)?)?;
        lefschetz_lambda(&d.space)?.apply(&d)?
    } else {
        s_v.zeros()
    };
    let pkg_n1 = ctx.hodge.package(n, 1)?;
    let perp = neumann_project(&pkg_n1, &ext.phi0)?;
    let pkg_n0 = ctx.hodge.package(n, 0)?;
    let nabla = assemble_nabla10(&s_v)?;
    let v2 = nabla.adjoint().apply(&pkg_n0.green(&perp)?)?;
    let v = v1.add(&v2)?;
    let x = lift.vertical.contract(f)?.add(&v)?;
    let y = ga.sub(&assemble_dbar(&s_v)?.apply(&v)?)?;

    let residual_primitive = if n >= 2 { rel(lefschetz_l(&s_n1)?.apply(&y)?.norm()) } else { 0.0 };
    let residual_orthogonal = rel(neumann_project(&pkg_n1, &ext.phi0.sub(&nabla.apply(&v)?)?)?.norm());
    let kf = lift.ks.contract(f)?;
    let pkg_class = ctx.hodge.package(n - 1, 1)?;
    let residual_class = rel(pkg_class.harmonic_projection(&kf.sub(&y)?)?.norm());
    Ok(RepresentativeSet {
        f: f.clone(),
        alpha0,
        gamma,
        phi0: ext.phi0,
        v1,
        v2,
        x,
        y,
        residual_primitive,
        residual_orthogonal,
        residual_class,
        primitive_ok: residual_primitive <= TOL,
        orthogonality_ok: residual_orthogonal <= TOL,
    })
}

/// `i` times a `(0,1)`-form-valued contraction, used by the curvature
/// routes: `(w ⌟ iΘ(h)) ∧ f`.
pub fn curvature_wedge_i(lift: &HorizontalLift, f: &FormSection) -> Result<FormSection> {
    Ok(lift.vertical.curvature_wedge(f)?.scale(I))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn jumping_character_vanishes_on_the_locus() {
        assert_eq!(jumping_character(I), [0.0, 0.0]);
        assert_eq!(jumping_character(c(-1.0, 1.0)), [0.0, 0.0]);
        let chi = jumping_character(c(0.1, 1.0));
        assert!(chi[0].abs() < 1e-12 && (chi[1] - 0.1).abs() < 1e-12);
        assert_eq!(jump_locus_member(c(-1.0, 1.0)), Some((1, 1)));
        assert_eq!(jump_locus_member(c(0.0, 0.5)), Some((0, 2)));
        assert_eq!(jump_locus_member(c(0.1, 1.0)), None);
        assert_eq!(jump_locus_member(c(0.0, 0.7)), None);
    }

    #[test]
    fn jumping_character_is_lipschitz_away_from_wraparound() {
        let t = c(0.37, 1.3);
        let a = jumping_character(t);
        for d in [c(1e-3, 0.0), c(0.0, 1e-3), c(-7e-4, 7e-4)] {
            let b = jumping_character(t + d);
            let diff = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            assert!(diff <= 5.0 * d.norm());
        }
    }

    #[test]
    fn trivialization_lift_of_the_elliptic_family() {
        let t = c(0.25, 1.2);
        let fam = FamilySpec::elliptic(t, BundleMap::Flat { character: vec![0.0, 0.0] });
        let ctx = FamilyFiber::new(&fam, t, Disc::Spectral { m: 3 }, HodgeOptions::default()).unwrap();
        let lift = trivialization_lift(&ctx, c(0.5, 0.5));
        let k = ks_representative(&lift);
        let expected = -c(0.5, 0.5) / (t - t.conj());
        assert!((k.coeffs[0][0].mean() - expected).norm() < 1e-14);
        assert!(trivialization_lift(&ctx, ZERO).ks.scale(ZERO).norm() == 0.0);
        let fam0 = FamilySpec::constant(CMat::from_element(1, 1, t), BundleMap::Flat { character: vec![0.0, 0.0] }, t);
        let ctx0 = FamilyFiber::new(&fam0, t, Disc::Spectral { m: 3 }, HodgeOptions::default()).unwrap();
        assert_eq!(trivialization_lift(&ctx0, ONE).ks.norm(), 0.0);
    }

    #[test]
    fn holomorphic_vertical_fields_do_not_change_the_ks_form() {
        let t = c(0.1, 0.9);
        let fam = FamilySpec::elliptic(t, BundleMap::Flat { character: vec![0.0, 0.0] });
        let ctx = FamilyFiber::new(&fam, t, Disc::Spectral { m: 3 }, HodgeOptions::default()).unwrap();
        let lift = trivialization_lift(&ctx, ONE);
        let v = VerticalVectorField::constant(&ctx.fiber, &[c(0.3, -1.0)]).unwrap();
        let moved = lift.perturbed(&v);
        assert_eq!(moved.ks.sub(&lift.ks).norm(), 0.0);
    }

    #[test]
    fn primitive_lift_is_identity_on_curves() {
        let t = c(0.1, 0.9);
        let fam = FamilySpec::elliptic(t, BundleMap::Flat { character: vec![0.0, 0.0] });
        let ctx = FamilyFiber::new(&fam, t, Disc::Spectral { m: 3 }, HodgeOptions::default()).unwrap();
        let lift = trivialization_lift(&ctx, ONE);
        let p = primitive_lift(&ctx, &lift).unwrap();
        assert_eq!(p.kind, LiftKind::Trivialization);
        assert_eq!(p.ks.sub(&lift.ks).norm(), 0.0);
    }
}
