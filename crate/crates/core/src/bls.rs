//! Finite-dimensional fields of Hermitian spaces over a disc in `ℂ`: Chern
//! curvature of a matrix metric by finite differences, the Gauss–Griffiths
//! identity for a holomorphic subfield, and `k`-positivity of Schur
//! complements of Hermitian forms on `M ⊗ F`.
//!
//! Curvatures are endomorphisms `K` with `Θ = K dt ∧ dt̄`,
//! `K = -∂_t̄(h^{-1} ∂_t h)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::serialize_cmat;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_upper, herm_eig, herm_min_eig, hermitian_part, inverse, kron, orthonormal_columns, CMat, C64, I};

pub const MIN_STEP: f64 = 1e-5;

type MatrixMap = Arc<dyn Fn(C64) -> CMat + Send + Sync>;

/// A trivialized field `t ↦ (ℂ^N, h(t))` with a holomorphic subfield
/// spanned by the columns of `S(t)`.
#[derive(Clone)]
pub struct FiniteBLSField {
    pub ambient_dim: usize,
    metric: MatrixMap,
    subframe: MatrixMap,
}

impl std::fmt::Debug for FiniteBLSField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiniteBLSField").field("ambient_dim", &self.ambient_dim).finish_non_exhaustive()
    }
}

impl FiniteBLSField {
    pub fn new(
        ambient_dim: usize,
        metric: impl Fn(C64) -> CMat + Send + Sync + 'static,
        subframe: impl Fn(C64) -> CMat + Send + Sync + 'static,
    ) -> Self {
        FiniteBLSField { ambient_dim, metric: Arc::new(metric), subframe: Arc::new(subframe) }
    }

    /// `h = diag(e^{a_i |t|²})` with the whole space as subfield.
    pub fn exponential(rates: &[f64]) -> Self {
        let rates = rates.to_vec();
        let n = rates.len();
        FiniteBLSField::new(
            n,
            move |t| CMat::from_fn(n, n, |i, j| if i == j { C64::from((rates[i] * t.norm_sqr()).exp()) } else { C64::from(0.0) }),
            move |_| CMat::identity(n, n),
        )
    }

    /// The line spanned by `(1, t)` inside `(ℂ², e^{|t|²} Id)`.
    pub fn rotating_line() -> Self {
        FiniteBLSField::new(
            2,
            |t| CMat::identity(2, 2) * C64::from(t.norm_sqr().exp()),
            |t| CMat::from_column_slice(2, 1, &[C64::from(1.0), t]),
        )
    }

    /// The line spanned by `(t, 0)`, which collapses at `t = 0`.
    pub fn vanishing_line() -> Self {
        FiniteBLSField::new(2, |_| CMat::identity(2, 2), |t| CMat::from_column_slice(2, 1, &[t, C64::from(0.0)]))
    }

    pub fn metric(&self, t: C64) -> Result<CMat> {
        let h = (self.metric)(t);
        if h.nrows() != self.ambient_dim || h.ncols() != self.ambient_dim {
            return Err(Error::ShapeMismatch(format!("metric of shape {:?}", h.shape())));
        }
        let lo = herm_min_eig(&h);
        if !(lo > 1e-12) {
            return Err(Error::InvalidArgument(format!("metric is not positive definite (min eig {lo:e})")));
        }
        Ok(h)
    }

    pub fn subframe(&self, t: C64) -> CMat {
        (self.subframe)(t)
    }

    /// Numerical rank of the subfield at `t`.
    pub fn rank(&self, t: C64) -> Result<usize> {
        let h = self.metric(t)?;
        let s = self.subframe(t);
        let g = s.adjoint() * h * &s;
        let scale = herm_eig(&(s.adjoint() * &s)).0.last().copied().unwrap_or(0.0).max(1.0);
        Ok(herm_eig(&g).0.iter().filter(|&&v| v > 1e-10 * scale).count())
    }

    /// `h`-orthogonal projector onto the subfield, `Π = S H_S^{-1} Sᴴ h`.
    pub fn projector(&self, t: C64) -> Result<CMat> {
        let h = self.metric(t)?;
        let s = self.subframe(t);
        let hs = s.adjoint() * &h * &s;
        if self.rank(t)? < s.ncols() {
            return Err(Error::SingularBlock(herm_min_eig(&hs)));
        }
        Ok(&s * inverse(&hs)? * s.adjoint() * h)
    }
}

struct Stencil {
    center: CMat,
    dt: CMat,
    dtbar: CMat,
    /// `∂_t ∂_t̄ = Δ/4`
    dtdtbar: CMat,
}

fn stencil(f: impl Fn(C64) -> Result<CMat>, t: C64, step: f64) -> Result<Stencil> {
    if !(step >= MIN_STEP) {
        return Err(Error::StepTooSmall(step));
    }
    let c = f(t)?;
    let (xp, xm, yp, ym) = (f(t + step)?, f(t - step)?, f(t + I * step)?, f(t - I * step)?);
    let dx = (&xp - &xm) / C64::from(2.0 * step);
    let dy = (&yp - &ym) / C64::from(2.0 * step);
    let lap = (xp + xm + yp + ym - &c * C64::from(4.0)) / C64::from(step * step);
    Ok(Stencil {
        dt: (&dx - &dy * I) * C64::from(0.5),
        dtbar: (dx + dy * I) * C64::from(0.5),
        dtdtbar: lap * C64::from(0.25),
        center: c,
    })
}

/// `K = -∂_t̄(H^{-1}∂_t H) = H^{-1}(∂_t̄ H)H^{-1}(∂_t H) - H^{-1}∂_t̄∂_t H`.
fn curvature_of(s: &Stencil) -> Result<CMat> {
    let hinv = inverse(&s.center)?;
    Ok(&hinv * &s.dtbar * &hinv * &s.dt - hinv * &s.dtdtbar)
}

/// Chern curvature of `(ℂ^N, h)` at `t` by central differences.
pub fn chern_curvature_fd(field: &FiniteBLSField, t: C64, step: f64) -> Result<CMat> {
    curvature_of(&stencil(|z| field.metric(z), t, step)?)
}

/// `‖hK - (hK)ᴴ‖`, which vanishes when `iΘ` is `h`-self-adjoint.
pub fn curvature_hermitian_defect(field: &FiniteBLSField, t: C64, k: &CMat) -> Result<f64> {
    let hk = field.metric(t)? * k;
    Ok((&hk - hk.adjoint()).norm())
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussGriffiths {
    /// `Sᴴ h K_L S`
    #[serde(serialize_with = "serialize_cmat")]
    pub restricted: CMat,
    /// `H_S K_S`
    #[serde(serialize_with = "serialize_cmat")]
    pub subbundle: CMat,
    /// `IIᴴ h II`
    #[serde(serialize_with = "serialize_cmat")]
    pub second_fundamental: CMat,
    pub residual: f64,
}

/// `Sᴴ h K_L S = H_S K_S + IIᴴ h II` with `II = (1 - Π)(∂_t S + h^{-1}∂_t h S)`.
pub fn gauss_griffiths_check(field: &FiniteBLSField, t: C64, step: f64) -> Result<GaussGriffiths> {
    if !(step >= MIN_STEP) {
        return Err(Error::StepTooSmall(step));
    }
    let r0 = field.rank(t)?;
    for z in [t + step, t - step, t + I * step, t - I * step] {
        let r = field.rank(z)?;
        if r != r0 {
            return Err(Error::RankJump(r0, r));
        }
    }
    let ambient = stencil(|z| field.metric(z), t, step)?;
    let k_l = curvature_of(&ambient)?;
    let sub = stencil(
        |z| {
            let s = field.subframe(z);
            Ok(s.adjoint() * field.metric(z)? * s)
        },
        t,
        step,
    )?;
    let k_s = curvature_of(&sub)?;
    let frame = stencil(|z| Ok(field.subframe(z)), t, step)?;
    let h = &ambient.center;
    let s = &frame.center;
    let conn = inverse(h)? * &ambient.dt;
    let pi = field.projector(t)?;
    let nabla_s = &frame.dt + conn * s;
    let ii = (CMat::identity(field.ambient_dim, field.ambient_dim) - pi) * nabla_s;
    let restricted = s.adjoint() * h * k_l * s;
    let subbundle = &sub.center * k_s;
    let second_fundamental = ii.adjoint() * h * &ii;
    let residual = (&restricted - &subbundle - &second_fundamental).norm();
    Ok(GaussGriffiths { restricted, subbundle, second_fundamental, residual })
}

/// Hermitian form `Φ` on `M ⊗ F`, `M = M₁ ⊕ M₂`, with basis index
/// `i·r + a` for `i ∈ M`, `a ∈ F`, and a fiber metric `φ` on `F`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermitianFormOnTensor {
    pub m: usize,
    pub r: usize,
    #[serde(serialize_with = "serialize_cmat")]
    pub phi: CMat,
    pub split: (usize, usize),
    #[serde(serialize_with = "serialize_cmat")]
    pub fiber_metric: CMat,
}

impl HermitianFormOnTensor {
    pub fn new(m: usize, r: usize, phi: CMat, split: (usize, usize), fiber_metric: CMat) -> Result<Self> {
        if split.0 + split.1 != m || split.0 == 0 {
            return Err(Error::InvalidArgument(format!("split {split:?} of dimension {m}")));
        }
        if phi.shape() != (m * r, m * r) || fiber_metric.shape() != (r, r) {
            return Err(Error::ShapeMismatch("form and fiber metric shapes".into()));
        }
        if (&phi - phi.adjoint()).norm() > 1e-12 * phi.norm().max(1.0) {
            return Err(Error::InvalidArgument("form is not Hermitian".into()));
        }
        cholesky_upper(&fiber_metric)?;
        Ok(HermitianFormOnTensor { m, r, phi, split, fiber_metric })
    }

    /// Block `𝔍_{ij}` of `Φ` for the split `M₁ ⊕ M₂`.
    pub fn block(&self, i: usize, j: usize) -> CMat {
        let (m1, _) = self.split;
        let r = self.r;
        let (ro, rn) = if i == 1 { (0, m1 * r) } else { (m1 * r, (self.m - m1) * r) };
        let (co, cn) = if j == 1 { (0, m1 * r) } else { (m1 * r, (self.m - m1) * r) };
        self.phi.view((ro, co), (rn, cn)).clone_owned()
    }

    /// `𝔍₁₁ - 𝔍₁₂ 𝔍₂₂^{-1} 𝔍₂₁` on `M₁ ⊗ F`.
    pub fn schur_complement(&self) -> Result<CMat> {
        let j11 = self.block(1, 1);
        if self.split.1 == 0 {
            return Ok(j11);
        }
        let j22 = self.block(2, 2);
        let lo = herm_min_eig(&j22);
        if !(lo >= 1e-12) {
            return Err(Error::SingularBlock(lo));
        }
        Ok(hermitian_part(&(j11 - self.block(1, 2) * inverse(&j22)? * self.block(2, 1))))
    }
}

/// A quadratic form on `m₁ × r` tensors in `φ`-orthonormal `F` coordinates.
#[derive(Debug, Clone)]
struct TensorForm {
    m1: usize,
    r: usize,
    q: CMat,
}

impl TensorForm {
    fn value(&self, v: &CMat) -> f64 {
        let x = nalgebra::DVector::from_iterator(self.m1 * self.r, v.transpose().iter().copied());
        let n = x.norm_squared();
        (x.adjoint() * &self.q * &x)[(0, 0)].re / n
    }

    /// Minimum over tensors whose `F`-factors lie in the span of `b`
    /// (columns): `C^{m₁} ⊗ span(b)`.
    fn min_with_f_span(&self, b: &CMat) -> CMat {
        let bo = orthonormal_columns(b, 1e-12);
        let k = bo.ncols();
        let p = kron(&CMat::identity(self.m1, self.m1), &bo);
        let (_, vecs) = herm_eig(&(p.adjoint() * &self.q * &p));
        let y = vecs.column(0);
        let yy = CMat::from_fn(self.m1, k, |i, l| y[i * k + l]);
        yy * bo.transpose()
    }

    fn min_with_m_span(&self, a: &CMat) -> CMat {
        let ao = orthonormal_columns(a, 1e-12);
        let k = ao.ncols();
        let p = kron(&ao, &CMat::identity(self.r, self.r));
        let (_, vecs) = herm_eig(&(p.adjoint() * &self.q * &p));
        let z = vecs.column(0);
        &ao * CMat::from_fn(k, self.r, |l, c| z[l * self.r + c])
    }
}

fn orthonormal_form(form: &HermitianFormOnTensor) -> Result<TensorForm> {
    let schur = form.schur_complement()?;
    let m1 = form.split.0;
    let l = cholesky_upper(&form.fiber_metric)?;
    let w = kron(&CMat::identity(m1, m1), &inverse(&l)?);
    Ok(TensorForm { m1, r: form.r, q: hermitian_part(&(w.adjoint() * schur * &w)) })
}

fn to_original(form: &HermitianFormOnTensor, v: &CMat) -> Result<CMat> {
    let l = cholesky_upper(&form.fiber_metric)?;
    let u = v * inverse(&l)?.transpose();
    let n = (u.adjoint() * &u * form.fiber_metric.transpose()).trace().re.sqrt();
    Ok(u / C64::from(n))
}

#[derive(Debug, Clone, Serialize)]
pub struct KPositivity {
    pub k: usize,
    /// Minimum of `⟨S u, u⟩ / ‖u‖²` over tensors of rank at most `k`.
    pub min_value: f64,
    pub is_k_positive: bool,
    /// A tensor (`m₁ × r`, unit norm) with non-positive value when found.
    #[serde(serialize_with = "serialize_opt_cmat")]
    pub witness: Option<CMat>,
}

fn serialize_opt_cmat<S: serde::Serializer>(m: &Option<CMat>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match m {
        Some(m) => serialize_cmat(m, s),
        None => s.serialize_none(),
    }
}

/// Threshold below which a minimum counts as non-positive.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// `k`-positivity of the Schur complement by alternating minimization over
/// rank-`k` tensors from `restarts` seeded random starts.
pub fn schur_complement_demailly(
    form: &HermitianFormOnTensor,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<KPositivity> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let tf = orthonormal_form(form)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kk = k.min(tf.m1).min(tf.r);
    let mut best: Option<(f64, CMat)> = None;
    for _ in 0..restarts.max(1) {
        let mut b = CMat::from_fn(tf.r, kk, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let mut v = tf.min_with_f_span(&b);
        let mut val = tf.value(&v);
        for _ in 0..500 {
            let a = v.clone();
            v = tf.min_with_m_span(&a);
            b = v.transpose();
            v = tf.min_with_f_span(&b);
            let next = tf.value(&v);
            let done = (val - next).abs() <= 1e-15 * val.abs().max(1.0);
            val = next;
            if done {
                break;
            }
        }
        if best.as_ref().is_none_or(|(bv, _)| val < *bv) {
            best = Some((val, v));
        }
    }
    let (min_value, v) = best.expect("at least one restart");
    let is_k_positive = min_value > POSITIVITY_TOL;
    let witness = if is_k_positive { None } else { Some(to_original(form, &v)?) };
    Ok(KPositivity { k, min_value, is_k_positive, witness })
}

/// Exact rank-`k` minimum for `min(m₁, r) ≤ 2`: the smallest eigenvalue
/// when the rank bound is vacuous, otherwise a search over `ℂP¹` for the
/// two-dimensional factor with the other factor minimized exactly.
pub fn brute_force_k_min(form: &HermitianFormOnTensor, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let tf = orthonormal_form(form)?;
    let small = tf.m1.min(tf.r);
    if k >= small {
        return Ok(herm_min_eig(&tf.q));
    }
    if small != 2 {
        return Err(Error::UnsupportedDimension(format!("brute force needs min(m1, r) <= 2, got {small}")));
    }
    // compressed form for the unit 2-vector (cos θ, e^{iψ} sin θ)
    let on_m = tf.m1 == 2;
    let eval = |theta: f64, psi: f64| -> f64 {
        let x = CMat::from_column_slice(2, 1, &[C64::from(theta.cos()), C64::from_polar(theta.sin(), psi)]);
        let p = if on_m { kron(&x, &CMat::identity(tf.r, tf.r)) } else { kron(&CMat::identity(tf.m1, tf.m1), &x) };
        herm_min_eig(&(p.adjoint() * &tf.q * p))
    };
    let (nt, np) = (48usize, 96usize);
    let (ht, hp) = (std::f64::consts::FRAC_PI_2 / nt as f64, std::f64::consts::TAU / np as f64);
    let mut starts: Vec<(f64, f64, f64)> = Vec::with_capacity((nt + 1) * np);
    for i in 0..=nt {
        for j in 0..np {
            let (th, ps) = (i as f64 * ht, j as f64 * hp);
            starts.push((eval(th, ps), th, ps));
        }
    }
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = starts[0].0;
    for &(v0, th0, ps0) in starts.iter().take(6) {
        let (mut v, mut th, mut ps) = (v0, th0, ps0);
        let (mut st, mut sp) = (ht, hp);
        while st > 1e-10 {
            let mut moved = false;
            for (dt, dp) in [(st, 0.0), (-st, 0.0), (0.0, sp), (0.0, -sp), (st, sp), (st, -sp), (-st, sp), (-st, -sp)] {
                let cand = (th + dt, ps + dp);
                let cv = eval(cand.0, cand.1);
                if cv < v {
                    v = cv;
                    th = cand.0;
                    ps = cand.1;
                    moved = true;
                }
            }
            if !moved {
                st *= 0.5;
                sp *= 0.5;
            }
        }
        best = best.min(v);
    }
    Ok(best)
}

/// Rank-one-positive (Griffiths) but not 2-positive (Nakano) form:
/// `𝔍₁₁ = Id - (3/2) a aᴴ` with `a = (e₁⊗e₂ - e₂⊗e₁)/√2`, `𝔍₂₂ = Id`,
/// `𝔍₁₂ = 0`, on `M = ℂ² ⊕ ℂ`, `F = ℂ²`. Griffiths minimum `1/4`, Nakano
/// minimum `-1/2`.
pub fn griffiths_not_nakano() -> HermitianFormOnTensor {
    let s = 1.0 / 2f64.sqrt();
    let a = nalgebra::DVector::from_vec(vec![C64::from(0.0), C64::from(s), C64::from(-s), C64::from(0.0)]);
    let j11 = CMat::identity(4, 4) - &a * a.adjoint() * C64::from(1.5);
    let mut phi = CMat::identity(6, 6);
    phi.view_mut((0, 0), (4, 4)).copy_from(&j11);
    HermitianFormOnTensor::new(3, 2, phi, (2, 1), CMat::identity(2, 2)).expect("valid catalog instance")
}

/// Seeded random instance with `m·r ≤ 9`, `m ≥ 2`: `Φ = AᴴA` with a random
/// shift of the `M₁` block so that both verdicts occur.
pub fn random_instance(seed: u64) -> HermitianFormOnTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes: Vec<(usize, usize)> =
        (2..=9).flat_map(|m| (1..=9).map(move |r| (m, r))).filter(|&(m, r)| m * r <= 9).collect();
    let (m, r) = shapes[rng.gen_range(0..shapes.len())];
    let m1 = rng.gen_range(1..m);
    let n = m * r;
    let mut gauss = || C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    let a = CMat::from_fn(n, n, |_, _| gauss());
    let c = CMat::from_fn(r, r, |_, _| gauss());
    let mut phi = a.adjoint() * &a + CMat::identity(n, n) * C64::from(0.05);
    let shift = rng.gen::<f64>() * 0.6;
    let top = m1 * r;
    for i in 0..top {
        phi[(i, i)] -= C64::from(shift);
    }
    let fiber_metric = c.adjoint() * c + CMat::identity(r, r) * C64::from(0.5);
    HermitianFormOnTensor::new(m, r, hermitian_part(&phi), (m1, m - m1), hermitian_part(&fiber_metric))
        .expect("generated instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn constant_metric_is_flat() {
        let f = FiniteBLSField::exponential(&[0.0, 0.0]);
        assert_eq!(chern_curvature_fd(&f, c(0.3, 0.1), 1e-3).unwrap().norm(), 0.0);
    }

    #[test]
    fn exponential_metrics_have_constant_curvature() {
        let step = 1e-3;
        let f = FiniteBLSField::exponential(&[1.0, 2.5]);
        let t = c(0.2, -0.4);
        let k = chern_curvature_fd(&f, t, step).unwrap();
        let want = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1.0, 0.0), c(-2.5, 0.0)]));
        assert!((k.clone() - want).norm() <= 2.0 * 2.5f64.powi(2) * step * step);
        assert!(curvature_hermitian_defect(&f, t, &k).unwrap() <= 10.0 * step * step);
    }

    #[test]
    fn tiny_steps_are_refused() {
        let f = FiniteBLSField::exponential(&[1.0]);
        assert!(matches!(chern_curvature_fd(&f, c(0.0, 0.0), 1e-6), Err(Error::StepTooSmall(_))));
        assert!(matches!(gauss_griffiths_check(&f, c(0.0, 0.0), 1e-7), Err(Error::StepTooSmall(_))));
    }

    #[test]
    fn whole_space_has_no_second_fundamental_form() {
        let f = FiniteBLSField::exponential(&[1.0, 0.5]);
        let g = gauss_griffiths_check(&f, c(0.1, 0.2), 1e-3).unwrap();
        assert!(g.second_fundamental.norm() < 1e-12);
        assert!(g.residual < 1e-12);
    }

    #[test]
    fn rotating_line_satisfies_gauss_griffiths() {
        let step = 1e-3;
        let g = gauss_griffiths_check(&FiniteBLSField::rotating_line(), c(0.3, 0.2), step).unwrap();
        assert!(g.second_fundamental[(0, 0)].re > 0.1);
        assert!(g.residual <= 10.0 * step * step, "{}", g.residual);
    }

    #[test]
    fn collapsing_subfield_is_detected() {
        let f = FiniteBLSField::vanishing_line();
        assert!(matches!(gauss_griffiths_check(&f, c(0.0, 0.0), 1e-3), Err(Error::RankJump(0, 1))));
        assert!(gauss_griffiths_check(&f, c(0.5, 0.0), 1e-3).is_ok());
    }

    #[test]
    fn identity_form_is_positive_in_every_rank() {
        let form = HermitianFormOnTensor::new(3, 2, CMat::identity(6, 6), (2, 1), CMat::identity(2, 2)).unwrap();
        assert!((form.schur_complement().unwrap() - CMat::identity(4, 4)).norm() < 1e-15);
        for k in 1..=2 {
            let p = schur_complement_demailly(&form, k, 5, 1).unwrap();
            assert!(p.is_k_positive && (p.min_value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_block_is_reported() {
        let mut phi = CMat::identity(4, 4);
        phi[(3, 3)] = C64::from(0.0);
        phi[(2, 2)] = C64::from(0.0);
        let form = HermitianFormOnTensor::new(2, 2, phi, (1, 1), CMat::identity(2, 2)).unwrap();
        assert!(matches!(form.schur_complement(), Err(Error::SingularBlock(_))));
    }

    #[test]
    fn griffiths_positive_form_is_not_nakano_positive() {
        let form = griffiths_not_nakano();
        let one = schur_complement_demailly(&form, 1, 50, 7).unwrap();
        let two = schur_complement_demailly(&form, 2, 50, 7).unwrap();
        assert!(one.is_k_positive && (one.min_value - 0.25).abs() < 1e-9);
        assert!(!two.is_k_positive && (two.min_value + 0.5).abs() < 1e-9);
        assert!(two.witness.is_some());
        assert!((brute_force_k_min(&form, 1).unwrap() - 0.25).abs() < 1e-9);
        assert!((brute_force_k_min(&form, 2).unwrap() + 0.5).abs() < 1e-12);
    }
}
