//! Curvature of the direct-image bundle `ℋ` of harmonic `(n,0)`-forms and of
//! the `L²` bundle along a horizontal lift, the second fundamental form of
//! `ℋ` inside it, and the pointwise Hodge–Riemann and Lefschetz tools the
//! curvature formulas rely on.
//!
//! Matrices are indexed `Q_{ij} = Θ(f_j, f_i)` in the chosen basis of `ℋ_t`.
//! Each route is evaluated for the unit base direction and then scaled by
//! `σ τ̄`.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::family::{
    berndtsson_representative, jump_locus_member, BundleMap, FamilyFiber, HorizontalLift, LiftKind,
    RepresentativeSet,
};
use crate::field::ScalarField;
use crate::hodge::neumann_project;
use crate::linalg::{herm_eig, herm_min_eig, hermitian_defect, hermitian_part, kernel_basis, CMat, C64, I, ZERO};
use crate::operator::{assemble_dbar, assemble_nabla10, curvature_commutator, lefschetz_lambda};
use crate::space::{hr_pairing, FormSection, FormSpace};

/// Serializes a matrix as rows of `[re, im]` pairs.
pub fn serialize_cmat<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> =
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
    rows.serialize(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub family: String,
    pub t: C64,
    pub sigma: C64,
    pub tau: C64,
    pub lift: LiftKind,
    /// `dim ℋ_t`
    pub rank: usize,
    /// The base point sits on (or numerically next to) a jump of `dim ℋ_t`;
    /// only the generic-rank object is reported.
    pub jump_flag: bool,
    #[serde(serialize_with = "serialize_cmat")]
    pub gram: CMat,
    /// `⟨Θ(h)_{ξσ, ξ̄τ} f_j, f_i⟩`
    #[serde(serialize_with = "serialize_cmat")]
    pub term_theta_h: CMat,
    /// Hodge–Riemann pairing of `(∂̄ξσ) ⌟ f_j` with `(∂̄ξτ) ⌟ f_i`.
    #[serde(serialize_with = "serialize_cmat")]
    pub term_kappa: CMat,
    /// `⟨II_σ f_j, II_τ f_i⟩`
    #[serde(serialize_with = "serialize_cmat")]
    pub term_sff: CMat,
    /// `term_theta_h - term_kappa - term_sff`
    #[serde(serialize_with = "serialize_cmat")]
    pub theta_h: CMat,
    /// The same curvature from the representative route.
    #[serde(serialize_with = "serialize_cmat")]
    pub theta_h_bly: CMat,
    pub nakano_min_eig: f64,
    pub sff_min_eig: f64,
    /// `‖theta_h - theta_h_bly‖ / ‖theta_h‖`, normalized by the sizes of
    /// the three terms instead when `theta_h` vanishes to roundoff.
    pub residual_routes: f64,
    /// Worst relative disagreement of the two second-fundamental-form routes.
    pub residual_sff_routes: f64,
    pub residual_primitive: f64,
    pub residual_orthogonal: f64,
    pub residual_class: f64,
    /// Largest `‖Q - Qᴴ‖` before symmetrization.
    pub hermitian_defect: f64,
}

/// `φ · u` for a scalar field `φ` and a form `u`.
fn multiply(phi: &ScalarField, u: &FormSection) -> FormSection {
    let sites = u.space.fiber.sites;
    let coeffs = u.coeffs.chunks(sites).flat_map(|c| phi.mul_values(c)).collect();
    FormSection { space: u.space.clone(), coeffs }
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// `‖q‖`, or the summed size of its terms when `q` cancels to roundoff.
fn cancellation_scale(q: &CMat, terms: &[&CMat]) -> f64 {
    let total: f64 = terms.iter().map(|m| m.norm()).sum();
    if q.norm() > 1e-12 * total {
        q.norm()
    } else {
        total
    }
}

fn sff_from_phi0(lift: &HorizontalLift, ctx: &FamilyFiber, f: &FormSection, phi0: &FormSection) -> Result<FormSection> {
    let n = ctx.n();
    let wf = lift.vertical.contract(f)?;
    let lie = assemble_nabla10(&wf.space)?.apply(&wf)?.add(phi0)?;
    Ok(neumann_project(&*ctx.hodge.package(n, 1)?, &lie)?.scale(lift.tau))
}

/// `II f = P⊥ ι*(L^{1,0}_ξ u)` with `u` the holomorphic extension of `f`.
pub fn second_fundamental_form(ctx: &FamilyFiber, lift: &HorizontalLift, f: &FormSection) -> Result<FormSection> {
    let ext = crate::family::extension(ctx, f, 1e-6)?;
    sff_from_phi0(lift, ctx, f, &ext.phi0)
}

/// `II f = -∂̄* G((ξ ⌟ Θ(h)) ∧ f + ∇^{1,0}((∂̄ξ) ⌟ f))`.
pub fn second_fundamental_form_green(
    ctx: &FamilyFiber,
    lift: &HorizontalLift,
    f: &FormSection,
) -> Result<FormSection> {
    let n = ctx.n();
    let kf = lift.ks.contract(f)?;
    let mut src = assemble_nabla10(&kf.space)?.apply(&kf)?;
    if !ctx.fiber.bundle.is_flat() && !lift.vertical.is_zero() {
        src = src.add(&lift.vertical.curvature_wedge(f)?)?;
    }
    let g = ctx.hodge.package(n, 1)?.green(&src)?;
    Ok(assemble_dbar(&f.space)?.adjoint().apply(&g)?.scale(-lift.tau))
}

/// `Θ(h)(w, w̄) f`
fn theta_value(lift: &HorizontalLift, ctx: &FamilyFiber, f: &FormSection) -> FormSection {
    if ctx.fiber.bundle.is_flat() || lift.vertical.is_zero() {
        return f.space.zeros();
    }
    multiply(&lift.vertical.curvature_value(), f)
}

/// Curvature of the `L²` bundle along the lift, evaluated on harmonic
/// `f₁, f₂`: the `Θ(h)` term minus the Hodge–Riemann pairing of the
/// Kodaira–Spencer contractions.
pub fn curvature_l_theta(
    ctx: &FamilyFiber,
    lift: &HorizontalLift,
    f1: &FormSection,
    f2: &FormSection,
    sigma: C64,
    tau: C64,
) -> Result<C64> {
    let th = theta_value(lift, ctx, f1).inner(f2)?;
    let kap = hr_pairing(&lift.ks.contract(f1)?, &lift.ks.contract(f2)?)?;
    Ok((th - kap) * sigma * tau.conj())
}

struct PerSection {
    rep: RepresentativeSet,
    theta: FormSection,
    kappa: FormSection,
    sff: FormSection,
    sff_green: FormSection,
    /// `Λ((w ⌟ iΘ) ∧ f)`
    lambda_wedge: FormSection,
    /// `[iΘ, Λ] X`
    comm_x: FormSection,
}

fn per_section(ctx: &FamilyFiber, lift: &HorizontalLift, f: &FormSection) -> Result<PerSection> {
    let unit = HorizontalLift { tau: C64::from(1.0), ..lift.clone() };
    let rep = berndtsson_representative(ctx, &unit, f)?;
    let sff = sff_from_phi0(&unit, ctx, f, &rep.phi0)?;
    let sff_green = second_fundamental_form_green(ctx, &unit, f)?;
    let comm_x = curvature_commutator(&rep.x.space)?.apply(&rep.x)?;
    let lambda_wedge = if ctx.fiber.bundle.is_flat() || unit.vertical.is_zero() {
        rep.x.space.zeros()
    } else {
        let wf = unit.vertical.curvature_wedge(f)?.scale(I);
        lefschetz_lambda(&wf.space)?.apply(&wf)?
    };
    Ok(PerSection {
        theta: theta_value(&unit, ctx, f),
        kappa: unit.ks.contract(f)?,
        rep,
        sff,
        sff_green,
        lambda_wedge,
        comm_x,
    })
}

fn gram_of(
    items: &[PerSection],
    pair: impl Fn(&PerSection, &PerSection) -> Result<C64>,
) -> Result<CMat> {
    let k = items.len();
    let mut m = CMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = pair(&items[j], &items[i])?;
        }
    }
    Ok(m)
}

/// Curvature of `ℋ` at `ctx.t` in the direction `(σ, τ̄)` by the three-term
/// formula and by the representative route. `basis` defaults to the
/// orthonormal harmonic basis.
pub fn curvature_h(
    ctx: &FamilyFiber,
    lift: &HorizontalLift,
    basis: Option<&[FormSection]>,
    sigma: C64,
    tau: C64,
) -> Result<CurvatureReport> {
    let owned;
    let basis = match basis {
        Some(b) => b,
        None => {
            owned = ctx.harmonic_basis()?;
            &owned[..]
        }
    };
    let jumping = matches!(ctx.family.bundle_map, BundleMap::Jumping);
    let empty = CMat::zeros(0, 0);
    let mut report = CurvatureReport {
        family: ctx.family.id.clone(),
        t: ctx.t,
        sigma,
        tau,
        lift: lift.kind,
        rank: basis.len(),
        jump_flag: false,
        gram: empty.clone(),
        term_theta_h: empty.clone(),
        term_kappa: empty.clone(),
        term_sff: empty.clone(),
        theta_h: empty.clone(),
        theta_h_bly: empty,
        nakano_min_eig: 0.0,
        sff_min_eig: 0.0,
        residual_routes: 0.0,
        residual_sff_routes: 0.0,
        residual_primitive: 0.0,
        residual_orthogonal: 0.0,
        residual_class: 0.0,
        hermitian_defect: 0.0,
    };
    if jumping {
        // the generic rank of the jumping family is zero
        report.jump_flag = !basis.is_empty() || jump_locus_member(ctx.t).is_some();
        return Ok(report);
    }
    if basis.is_empty() {
        return Ok(report);
    }
    let items = basis.par_iter().map(|f| per_section(ctx, lift, f)).collect::<Result<Vec<_>>>()?;

    let gram = CMat::from_fn(basis.len(), basis.len(), |i, j| basis[j].inner(&basis[i]).unwrap_or(ZERO));
    let th = gram_of(&items, |a, b| a.theta.inner(&b.rep.f))?;
    let kap = gram_of(&items, |a, b| hr_pairing(&a.kappa, &b.kappa))?;
    let sff = gram_of(&items, |a, b| a.sff.inner(&b.sff))?;
    let q = &th - &kap - &sff;
    let corr = gram_of(&items, |a, b| {
        Ok(a.lambda_wedge.inner(&b.rep.x)? + a.rep.x.inner(&b.lambda_wedge)? - a.comm_x.inner(&b.rep.x)?
            + a.rep.y.inner(&b.rep.y)?)
    })?;
    let bly = &th + corr;

    let defect = [&th, &kap, &sff, &q, &bly].iter().map(|m| hermitian_defect(m)).fold(0.0, f64::max);
    let (th, kap, sff, q, bly) =
        (hermitian_part(&th), hermitian_part(&kap), hermitian_part(&sff), hermitian_part(&q), hermitian_part(&bly));

    let mut sff_res: f64 = 0.0;
    for (it, f) in items.iter().zip(basis) {
        let diff = it.sff.sub(&it.sff_green)?.norm();
        let scale = it.sff.norm().max(it.sff_green.norm());
        sff_res = sff_res.max(if scale > 1e-12 * f.norm() { diff / scale } else { relative(diff, f.norm()) });
    }

    let factor = sigma * tau.conj();
    let mag = tau.norm_sqr();
    report.gram = gram;
    report.nakano_min_eig = herm_min_eig(&q) * mag;
    report.sff_min_eig = herm_min_eig(&sff) * mag;
    report.residual_routes = relative((&q - &bly).norm(), cancellation_scale(&q, &[&th, &kap, &sff]));
    report.residual_sff_routes = sff_res;
    report.residual_primitive = items.iter().map(|i| i.rep.residual_primitive).fold(0.0, f64::max);
    report.residual_orthogonal = items.iter().map(|i| i.rep.residual_orthogonal).fold(0.0, f64::max);
    report.residual_class = items.iter().map(|i| i.rep.residual_class).fold(0.0, f64::max);
    report.hermitian_defect = defect;
    report.term_theta_h = th * factor;
    report.term_kappa = kap * factor;
    report.term_sff = sff * factor;
    report.theta_h = q * factor;
    report.theta_h_bly = bly * factor;
    Ok(report)
}

/// `‖Θ^ℋ(lift₁) - Θ^ℋ(lift₂)‖ / ‖Θ^ℋ(lift₁)‖`.
pub fn lift_independence_check(
    ctx: &FamilyFiber,
    basis: Option<&[FormSection]>,
    lift1: &HorizontalLift,
    lift2: &HorizontalLift,
    sigma: C64,
    tau: C64,
) -> Result<f64> {
    let a = curvature_h(ctx, lift1, basis, sigma, tau)?;
    let b = curvature_h(ctx, lift2, basis, sigma, tau)?;
    let scale = cancellation_scale(&a.theta_h, &[&a.term_theta_h, &a.term_kappa, &a.term_sff]);
    Ok(relative((&a.theta_h - &b.theta_h).norm(), scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HodgeRiemann {
    /// `√-1^{k²}/(n-k)! ∫⟨α ∧ ᾱ ∧ ω^{n-k}⟩`
    pub lhs: C64,
    /// `(-1)^q ‖α‖²`
    pub rhs: f64,
    pub residual: f64,
}

/// Hodge–Riemann bilinear relation for a primitive `(p,q)`-form, `p+q ≤ n`.
pub fn hodge_riemann_check(alpha: &FormSection) -> Result<HodgeRiemann> {
    let (p, q) = alpha.bidegree();
    let n = alpha.space.fiber.n();
    if p + q > n {
        return Err(Error::BidegreeOverflow(p, q));
    }
    let norm = alpha.norm();
    if p >= 1 && q >= 1 {
        let lam = lefschetz_lambda(&alpha.space)?.apply(alpha)?.norm();
        if lam > 1e-10 * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::NotPrimitive(lam / norm));
        }
    }
    let lhs = hr_pairing(alpha, alpha)?;
    let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
    let rhs = sign * norm * norm;
    Ok(HodgeRiemann { lhs, rhs, residual: (lhs - rhs).norm() })
}

/// Components `(j, α_j)` of `α = Σ_j ω^j ∧ α_j` with every `α_j` primitive.
/// Vanishing components are omitted.
pub fn lefschetz_decompose(alpha: &FormSection) -> Result<Vec<(usize, FormSection)>> {
    let (p, q) = alpha.bidegree();
    let fiber = &alpha.space.fiber;
    let ext = &fiber.ext;
    let sites = fiber.sites;
    // columns: ω^j ∧ (primitive basis of bidegree (p-j, q-j))
    let mut blocks: Vec<(usize, CMat, CMat)> = Vec::new();
    for j in 0..=p.min(q) {
        let (a, b) = (p - j, q - j);
        let dim = ext.count(a, b);
        let prim = if a >= 1 && b >= 1 { kernel_basis(&ext.lambda((a, b)), 1e-12) } else { CMat::identity(dim, dim) };
        if prim.ncols() == 0 {
            continue;
        }
        let mut lift = CMat::identity(dim, dim);
        for k in 0..j {
            lift = ext.lefschetz((a + k, b + k)) * lift;
        }
        let cols = &lift * &prim;
        if cols.norm() == 0.0 {
            continue;
        }
        blocks.push((j, prim, cols));
    }
    let total: usize = blocks.iter().map(|b| b.2.ncols()).sum();
    let mut sys = CMat::zeros(ext.count(p, q), total);
    let mut at = 0;
    for (_, _, cols) in &blocks {
        sys.view_mut((0, at), (cols.nrows(), cols.ncols())).copy_from(cols);
        at += cols.ncols();
    }
    let solver = sys.clone().svd(true, true);
    let mut comps: Vec<Vec<C64>> = blocks.iter().map(|(_, prim, _)| vec![ZERO; prim.nrows() * sites]).collect();
    for s in 0..sites {
        let rhs = nalgebra::DVector::from_iterator(sys.nrows(), alpha.at_site(s));
        let x = solver.solve(&rhs, 1e-12).map_err(|e| Error::EigenFailure(e.to_string()))?;
        let mut at = 0;
        for (bi, (_, prim, _)) in blocks.iter().enumerate() {
            let v = prim * x.rows(at, prim.ncols());
            at += prim.ncols();
            for (c, val) in v.iter().enumerate() {
                comps[bi][c * sites + s] = *val;
            }
        }
    }
    let scale = alpha.norm();
    let mut out = Vec::new();
    for ((j, _, _), coeffs) in blocks.iter().zip(comps) {
        let space = FormSpace::new(fiber.clone(), p - j, q - j)?;
        let sec = FormSection::new(space, coeffs)?;
        if sec.norm() > 1e-13 * scale {
            out.push((*j, sec));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct XuWangBound {
    #[serde(serialize_with = "serialize_cmat")]
    pub lhs: CMat,
    #[serde(serialize_with = "serialize_cmat")]
    pub rhs: CMat,
    /// Smallest eigenvalue of `lhs - rhs`.
    pub margin: f64,
}

/// `Θ^ℋ` against the lower bound
/// `Θ(h)-term - ⟨[iΘ,Λ]^{-1}(ξ ⌟ Θ(h)) ∧ f, (ξ ⌟ Θ(h)) ∧ f⟩` in the
/// direction `(σ, σ̄)`.
pub fn xu_wang_bound(
    ctx: &FamilyFiber,
    lift: &HorizontalLift,
    basis: Option<&[FormSection]>,
    sigma: C64,
) -> Result<XuWangBound> {
    let fiber = &ctx.fiber;
    let n = ctx.n();
    if fiber.bundle.is_flat() {
        return Err(Error::CurvatureNotInvertible(0.0));
    }
    let ext = &fiber.ext;
    let base = fiber.bundle.frame_curvature(&fiber.torus);
    let unit = CMat::identity(n, n);
    let wc: Vec<f64> = fiber.grid_derivs().map(|g| g.weight_curvature.clone()).unwrap_or_default();
    // [iΘ, Λ] on (n,1) at one site
    let block = |extra: f64| -> CMat {
        let th = &base + unit.scale(extra);
        let mut m = ext.wedge_11(&th, (n - 1, 0)) * ext.lambda((n, 1)) * I;
        if n >= 2 {
            m -= ext.lambda((n + 1, 2)) * ext.wedge_11(&th, (n, 1)) * I;
        }
        m
    };
    let site_extra = |s: usize| wc.get(s).copied().unwrap_or(0.0);
    let mut inverses = Vec::with_capacity(fiber.sites);
    for s in 0..fiber.sites.max(1) {
        if s > 0 && wc.is_empty() {
            break;
        }
        let b = block(site_extra(s));
        let (vals, vecs) = herm_eig(&b);
        let lo = vals.first().copied().unwrap_or(f64::INFINITY);
        if lo < 1e-10 {
            return Err(Error::CurvatureNotInvertible(lo));
        }
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|v| C64::from(1.0 / v))));
        inverses.push(&vecs * d * vecs.adjoint());
    }
    let report = curvature_h(ctx, lift, basis, sigma, sigma)?;
    let owned;
    let basis = match basis {
        Some(b) => b,
        None => {
            owned = ctx.harmonic_basis()?;
            &owned[..]
        }
    };
    let unit_lift = HorizontalLift { tau: C64::from(1.0), ..lift.clone() };
    let wedges = basis
        .iter()
        .map(|f| {
            if unit_lift.vertical.is_zero() {
                Ok(FormSpace::new(fiber.clone(), n, 1)?.zeros())
            } else {
                unit_lift.vertical.curvature_wedge(f)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let sites = fiber.sites;
    let solved: Vec<FormSection> = wedges
        .iter()
        .map(|u| {
            let comps = u.space.components();
            let mut out = u.space.zeros();
            for s in 0..sites {
                let inv = &inverses[if wc.is_empty() { 0 } else { s }];
                let v = inv * nalgebra::DVector::from_iterator(comps, u.at_site(s));
                for c in 0..comps {
                    out.coeffs[c * sites + s] = v[c];
                }
            }
            out
        })
        .collect();
    let k = basis.len();
    let mut corr = CMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            corr[(i, j)] = solved[j].inner(&wedges[i])?;
        }
    }
    let rhs = &report.term_theta_h - hermitian_part(&corr) * C64::from(sigma.norm_sqr());
    let margin = herm_min_eig(&(&report.theta_h - &rhs));
    Ok(XuWangBound { lhs: report.theta_h, rhs, margin: if k == 0 { 0.0 } else { margin } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{jumping_family, trivialization_lift, FamilySpec};
    use crate::hodge::HodgeOptions;
    use crate::linalg::c;
    use crate::space::Disc;
    use rand::SeedableRng;

    fn flat_ctx(fam: &FamilySpec, m: usize) -> FamilyFiber {
        FamilyFiber::new(fam, fam.t, Disc::Spectral { m }, HodgeOptions::default()).unwrap()
    }

    #[test]
    fn curve_pairing_of_01_forms_is_negative() {
        let fam = FamilySpec::elliptic(c(0.3, 1.1), BundleMap::Flat { character: vec![0.2, 0.7] });
        let ctx = flat_ctx(&fam, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let a = FormSection::random(&ctx.hodge.space(0, 1).unwrap(), &mut rng);
        let hr = hodge_riemann_check(&a).unwrap();
        assert!(hr.rhs < 0.0);
        assert!(hr.residual <= 1e-12 * hr.rhs.abs());
        let zero = hodge_riemann_check(&a.space.zeros()).unwrap();
        assert_eq!((zero.lhs, zero.rhs), (ZERO, 0.0));
    }

    #[test]
    fn non_primitive_forms_are_rejected() {
        let fam = FamilySpec::siegel_diagonal(c(0.0, 1.0), c(0.1, 0.1), c(0.0, 1.2), vec![0.0; 4]);
        let ctx = flat_ctx(&fam, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let a = FormSection::random(&ctx.hodge.space(1, 1).unwrap(), &mut rng);
        assert!(matches!(hodge_riemann_check(&a), Err(Error::NotPrimitive(_))));
    }

    #[test]
    fn lefschetz_components_reconstruct_and_satisfy_hodge_riemann() {
        let fam = FamilySpec::siegel_diagonal(c(0.0, 1.0), c(0.1, 0.1), c(0.0, 1.2), vec![0.0; 4]);
        let ctx = flat_ctx(&fam, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let s11 = ctx.hodge.space(1, 1).unwrap();
        let a = FormSection::random(&s11, &mut rng);
        let parts = lefschetz_decompose(&a).unwrap();
        assert_eq!(parts.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 1]);
        let prim = &parts[0].1;
        let l = crate::operator::lefschetz_l(&parts[1].1.space).unwrap().apply(&parts[1].1).unwrap();
        let rebuilt = prim.add(&l).unwrap();
        assert!(rebuilt.sub(&a).unwrap().norm() <= 1e-9 * a.norm());
        assert!(prim.inner(&l).unwrap().norm() <= 1e-9 * a.norm() * a.norm());
        let hr = hodge_riemann_check(prim).unwrap();
        assert!(hr.residual <= 1e-8 * hr.rhs.abs());

        let single = lefschetz_decompose(prim).unwrap();
        assert_eq!(single.len(), 1);
        assert!(single[0].1.sub(prim).unwrap().norm() <= 1e-12 * prim.norm());
        let scalar = lefschetz_decompose(&l).unwrap();
        assert_eq!(scalar.len(), 1);
        assert_eq!(scalar[0].0, 1);
    }

    #[test]
    fn trivial_family_has_flat_direct_image() {
        let t = c(0.2, 1.4);
        let fam = FamilySpec::constant(CMat::from_element(1, 1, t), BundleMap::Flat { character: vec![0.0, 0.0] }, t);
        let ctx = flat_ctx(&fam, 3);
        let lift = trivialization_lift(&ctx, c(1.0, 0.0));
        let r = curvature_h(&ctx, &lift, None, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(r.theta_h.norm(), 0.0);
        assert_eq!(lift_independence_check(&ctx, None, &lift, &lift, c(1.0, 0.0), c(1.0, 0.0)).unwrap(), 0.0);
        let f = ctx.harmonic_basis().unwrap();
        assert_eq!(second_fundamental_form(&ctx, &lift, &f[0]).unwrap().norm(), 0.0);
        assert_eq!(curvature_l_theta(&ctx, &lift, &f[0], &f[0], c(1.0, 0.0), c(1.0, 0.0)).unwrap(), ZERO);
        assert!(matches!(xu_wang_bound(&ctx, &lift, None, c(1.0, 0.0)), Err(Error::CurvatureNotInvertible(_))));
    }

    #[test]
    fn flat_elliptic_curvature_is_the_kappa_term() {
        let t = c(-0.4, 0.8);
        let fam = FamilySpec::elliptic(t, BundleMap::Flat { character: vec![0.0, 0.0] });
        let ctx = flat_ctx(&fam, 3);
        let lift = trivialization_lift(&ctx, c(1.0, 0.0));
        let sigma = c(0.6, -0.3);
        let r = curvature_h(&ctx, &lift, None, sigma, sigma).unwrap();
        let expect = sigma.norm_sqr() / (4.0 * t.im * t.im);
        assert!((r.theta_h[(0, 0)].re - expect).abs() < 1e-12);
        assert!((r.theta_h_bly[(0, 0)].re - expect).abs() < 1e-12);
        let f = ctx.harmonic_basis().unwrap();
        let l = curvature_l_theta(&ctx, &lift, &f[0], &f[0], sigma, sigma).unwrap();
        assert!((l - r.theta_h[(0, 0)]).norm() < 1e-12);
    }

    #[test]
    fn jumping_family_reports_the_generic_rank() {
        let t = c(0.3, 1.2);
        let fam = jumping_family(t);
        let ctx = flat_ctx(&fam, 3);
        let lift = trivialization_lift(&ctx, c(1.0, 0.0));
        let r = curvature_h(&ctx, &lift, None, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(r.rank, 0);
        assert!(!r.jump_flag);
        assert_eq!(r.theta_h.nrows(), 0);
        let on = jumping_family(I);
        let ctx = flat_ctx(&on, 3);
        let r = curvature_h(&ctx, &trivialization_lift(&ctx, c(1.0, 0.0)), None, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(r.rank, 1);
        assert!(r.jump_flag);
    }

    #[test]
    fn matrices_serialize_as_complex_pairs() {
        #[derive(Serialize)]
        struct W(#[serde(serialize_with = "serialize_cmat")] CMat);
        let m = CMat::from_row_slice(1, 2, &[c(1.0, 2.0), c(3.0, -4.0)]);
        assert_eq!(serde_json::to_string(&W(m)).unwrap(), "[[[1.0,2.0],[3.0,-4.0]]]");
    }
}
