//! Periodic scalar fields, vertical `(1,0)`-vector fields and
//! `T^{1,0}`-valued `(0,1)`-forms on a fiber, with their contractions into
//! bundle-valued forms.
//!
//! Spectral fields store Fourier coefficients of integer modes on the same
//! box as the fiber, so multiplication is a truncated convolution. Grid
//! fields store periodic samples and multiply pointwise.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{site_xy, spectral_derivative};
use crate::linalg::{inverse, CMat, C64, ONE, ZERO};
use crate::space::{Fiber, FormSection, FormSpace};

fn compatible(a: &Fiber, b: &Fiber) -> Result<()> {
    if a.disc != b.disc || a.torus != b.torus {
        return Err(Error::ShapeMismatch("field and section live on different discretizations".into()));
    }
    Ok(())
}

/// A smooth periodic complex function on the fiber.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub fiber: Arc<Fiber>,
    pub values: Vec<C64>,
}

impl ScalarField {
    pub fn zero(fiber: &Arc<Fiber>) -> Self {
        ScalarField { fiber: fiber.clone(), values: vec![ZERO; fiber.sites] }
    }

    pub fn constant(fiber: &Arc<Fiber>, c: C64) -> Self {
        let mut f = Self::zero(fiber);
        if fiber.is_spectral() {
            let origin = vec![0; 2 * fiber.n()];
            let idx = fiber.mode_index(&origin).expect("origin is in the box");
            f.values[idx] = c;
        } else {
            f.values.iter_mut().for_each(|v| *v = c);
        }
        f
    }

    /// `Σ c · exp(2πi(k·x + l·y))` over integer modes `(k, l)`.
    pub fn trig(fiber: &Arc<Fiber>, terms: &[(Vec<i32>, C64)]) -> Result<Self> {
        let n = fiber.n();
        let mut f = Self::zero(fiber);
        for (mu, c) in terms {
            if mu.len() != 2 * n {
                return Err(Error::ShapeMismatch(format!("mode vector of length {}", mu.len())));
            }
            if fiber.is_spectral() {
                let idx = fiber
                    .mode_index(mu)
                    .ok_or_else(|| Error::InvalidArgument(format!("mode {mu:?} outside the box")))?;
                f.values[idx] += c;
            } else {
                let ng = fiber.grid_size().expect("grid backend");
                for (s, v) in f.values.iter_mut().enumerate() {
                    let (x, y) = site_xy(s, ng);
                    *v += c * C64::from_polar(1.0, TAU * (mu[0] as f64 * x + mu[1] as f64 * y));
                }
            }
        }
        Ok(f)
    }

    /// Random trigonometric polynomial with modes `|μ_i| ≤ band` and
    /// L² norm `amplitude`.
    pub fn random<R: Rng>(fiber: &Arc<Fiber>, band: i32, amplitude: f64, rng: &mut R) -> Result<Self> {
        let n = fiber.n();
        let side = (2 * band + 1) as usize;
        let mut terms = Vec::new();
        for idx in 0..side.pow(2 * n as u32) {
            let mut rest = idx;
            let mut mu = vec![0i32; 2 * n];
            for slot in (0..2 * n).rev() {
                mu[slot] = (rest % side) as i32 - band;
                rest /= side;
            }
            let decay = (-(mu.iter().map(|v| v * v).sum::<i32>() as f64) / 2.0).exp();
            let z = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * decay;
            terms.push((mu, z));
        }
        let f = Self::trig(fiber, &terms)?;
        let norm = f.norm();
        Ok(if norm > 0.0 { f.scale(C64::from(amplitude / norm)) } else { f })
    }

    pub fn scale(&self, z: C64) -> Self {
        ScalarField { fiber: self.fiber.clone(), values: self.values.iter().map(|v| v * z).collect() }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        ScalarField { fiber: self.fiber.clone(), values }
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.add(&other.scale(C64::from(-1.0)))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == ZERO)
    }

    /// L² norm over the unit-volume fiber.
    pub fn norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.fiber.site_weight()).sqrt()
    }

    /// Mean value `∫ f`.
    pub fn mean(&self) -> C64 {
        if self.fiber.is_spectral() {
            let origin = vec![0; 2 * self.fiber.n()];
            self.values[self.fiber.mode_index(&origin).expect("origin")]
        } else {
            self.values.iter().sum::<C64>() / self.values.len() as f64
        }
    }

    pub fn conj(&self) -> Self {
        if !self.fiber.is_spectral() {
            let values = self.values.iter().map(|v| v.conj()).collect();
            return ScalarField { fiber: self.fiber.clone(), values };
        }
        let modes = self.fiber.modes().expect("spectral");
        let values = modes
            .iter()
            .map(|mu| {
                let neg: Vec<i32> = mu.iter().map(|v| -v).collect();
                self.values[self.fiber.mode_index(&neg).expect("box is symmetric")].conj()
            })
            .collect();
        ScalarField { fiber: self.fiber.clone(), values }
    }

    /// Multiplies one component array of a section (length `sites`).
    pub fn mul_values(&self, u: &[C64]) -> Vec<C64> {
        if !self.fiber.is_spectral() {
            return self.values.iter().zip(u).map(|(a, b)| a * b).collect();
        }
        let fiber = &self.fiber;
        let m = fiber.mode_cutoff().expect("spectral") as i32;
        let modes = fiber.modes().expect("spectral");
        let side = (2 * m + 1) as i64;
        let dims = modes[0].len();
        let mut out = vec![ZERO; u.len()];
        for (fi, &c) in self.values.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            let nu = &modes[fi];
            let offset: i64 = nu.iter().fold(0i64, |acc, &v| acc * side + v as i64);
            for (s, mu) in modes.iter().enumerate() {
                if u[s] == ZERO {
                    continue;
                }
                if (0..dims).all(|i| (mu[i] + nu[i]).abs() <= m) {
                    out[(s as i64 + offset) as usize] += c * u[s];
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        ScalarField { fiber: self.fiber.clone(), values: self.mul_values(&other.values) }
    }

    /// Coordinate derivatives `∂/∂z̄_j` (`bar = true`) or `∂/∂z_j`.
    fn coord_derivative(&self, j: usize, bar: bool) -> Self {
        let fiber = &self.fiber;
        let torus = &fiber.torus;
        let n = fiber.n();
        if let Some(modes) = fiber.modes() {
            let values = modes
                .iter()
                .zip(&self.values)
                .map(|(mu, v)| {
                    if *v == ZERO {
                        return ZERO;
                    }
                    let k: Vec<f64> = mu[..n].iter().map(|&x| x as f64).collect();
                    let l: Vec<f64> = mu[n..].iter().map(|&x| x as f64).collect();
                    let s = if bar { torus.dbar_symbol(&k, &l) } else { torus.d_symbol(&k, &l) };
                    s[j] * v
                })
                .collect();
            return ScalarField { fiber: fiber.clone(), values };
        }
        let ng = fiber.grid_size().expect("grid backend");
        let t = torus.period[(0, 0)];
        let a = ONE / (t - t.conj());
        let px = spectral_derivative(&self.values, ng, 1, 0);
        let py = spectral_derivative(&self.values, ng, 0, 1);
        let values = px
            .iter()
            .zip(&py)
            .map(|(x, y)| if bar { a * (t * x - y) } else { a * (y - t.conj() * x) })
            .collect();
        ScalarField { fiber: fiber.clone(), values }
    }

    pub fn dzbar(&self, j: usize) -> Self {
        self.coord_derivative(j, true)
    }

    pub fn dz(&self, j: usize) -> Self {
        self.coord_derivative(j, false)
    }
}

/// `Σ_t field_t · (M_t u)` for constant pointwise maps `M_t`.
fn apply_field_maps(u: &FormSection, target: &FormSpace, terms: &[(ScalarField, CMat)]) -> Result<FormSection> {
    let sites = u.sites();
    let mut out = target.zeros();
    for (field, m) in terms {
        compatible(&field.fiber, &u.space.fiber)?;
        if field.is_zero() || m.iter().all(|z| *z == ZERO) {
            continue;
        }
        let v = u.pointwise(m, target)?;
        for r in 0..target.components() {
            let comp = &v.coeffs[r * sites..(r + 1) * sites];
            if comp.iter().all(|z| *z == ZERO) {
                continue;
            }
            let prod = field.mul_values(comp);
            for (o, p) in out.coeffs[r * sites..(r + 1) * sites].iter_mut().zip(prod) {
                *o += p;
            }
        }
    }
    Ok(out)
}

/// Linear combination `Σ_j m_{aj} f_j` of fields.
fn combine(fields: &[ScalarField], m: &CMat) -> Vec<ScalarField> {
    (0..m.nrows())
        .map(|a| {
            let mut acc = ScalarField::zero(&fields[0].fiber);
            for (j, f) in fields.iter().enumerate() {
                if m[(a, j)] != ZERO {
                    acc = acc.add(&f.scale(m[(a, j)]));
                }
            }
            acc
        })
        .collect()
}

/// Section of `T^{1,0}` of the fiber: `Σ w^j ∂/∂z_j`.
#[derive(Debug, Clone)]
pub struct VerticalVectorField {
    pub fiber: Arc<Fiber>,
    /// Coordinate components `w^j`.
    pub comps: Vec<ScalarField>,
}

impl VerticalVectorField {
    pub fn zero(fiber: &Arc<Fiber>) -> Self {
        VerticalVectorField { fiber: fiber.clone(), comps: vec![ScalarField::zero(fiber); fiber.n()] }
    }

    pub fn constant(fiber: &Arc<Fiber>, w: &[C64]) -> Result<Self> {
        if w.len() != fiber.n() {
            return Err(Error::ShapeMismatch(format!("{} components for dimension {}", w.len(), fiber.n())));
        }
        let comps = w.iter().map(|&c| ScalarField::constant(fiber, c)).collect();
        Ok(VerticalVectorField { fiber: fiber.clone(), comps })
    }

    pub fn from_components(comps: Vec<ScalarField>) -> Result<Self> {
        let fiber = comps.first().ok_or_else(|| Error::InvalidArgument("no components".into()))?.fiber.clone();
        if comps.len() != fiber.n() {
            return Err(Error::ShapeMismatch(format!("{} components for dimension {}", comps.len(), fiber.n())));
        }
        for c in &comps {
            compatible(&c.fiber, &fiber)?;
        }
        Ok(VerticalVectorField { fiber, comps })
    }

    /// Random band-limited field, each component of L² norm `amplitude`.
    pub fn random<R: Rng>(fiber: &Arc<Fiber>, band: i32, amplitude: f64, rng: &mut R) -> Result<Self> {
        let comps = (0..fiber.n())
            .map(|_| ScalarField::random(fiber, band, amplitude, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(VerticalVectorField { fiber: fiber.clone(), comps })
    }

    pub fn add(&self, other: &Self) -> Self {
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect();
        VerticalVectorField { fiber: self.fiber.clone(), comps }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(b)).collect();
        VerticalVectorField { fiber: self.fiber.clone(), comps }
    }

    pub fn scale(&self, z: C64) -> Self {
        VerticalVectorField { fiber: self.fiber.clone(), comps: self.comps.iter().map(|c| c.scale(z)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(ScalarField::is_zero)
    }

    /// Components `w_E^a` in the unitary frame.
    pub fn frame_components(&self) -> Vec<ScalarField> {
        combine(&self.comps, &self.fiber.torus.vector_to_frame())
    }

    /// Inverse of [`Self::frame_components`].
    pub fn from_frame(fiber: &Arc<Fiber>, frame: Vec<ScalarField>) -> Result<Self> {
        let back = inverse(&fiber.torus.vector_to_frame())?;
        Self::from_components(combine(&frame, &back))
    }

    /// Interior product `w ⌟ u` in the holomorphic slots.
    pub fn contract(&self, u: &FormSection) -> Result<FormSection> {
        let (p, q) = u.bidegree();
        if p == 0 {
            return Err(Error::BidegreeUnderflow("contraction needs a holomorphic slot".into()));
        }
        let ext = &u.space.fiber.ext;
        let target = u.space.at(p - 1, q)?;
        let terms: Vec<_> =
            self.frame_components().into_iter().enumerate().map(|(a, f)| (f, ext.iota(a, (p, q)))).collect();
        apply_field_maps(u, &target, &terms)
    }

    /// Interior product of the conjugate field `w̄` in the anti-holomorphic
    /// slots.
    pub fn contract_conj(&self, u: &FormSection) -> Result<FormSection> {
        let (p, q) = u.bidegree();
        if q == 0 {
            return Err(Error::BidegreeUnderflow("contraction needs an anti-holomorphic slot".into()));
        }
        let ext = &u.space.fiber.ext;
        let target = u.space.at(p, q - 1)?;
        let terms: Vec<_> = self
            .frame_components()
            .into_iter()
            .enumerate()
            .map(|(b, f)| (f.conj(), ext.iota_bar(b, (p, q))))
            .collect();
        apply_field_maps(u, &target, &terms)
    }

    /// `∂̄w` as a vector-valued `(0,1)`-form.
    pub fn dbar(&self) -> KsForm {
        let n = self.fiber.n();
        let coeffs = (0..n).map(|j| (0..n).map(|l| self.comps[j].dzbar(l)).collect()).collect();
        KsForm { fiber: self.fiber.clone(), coeffs }
    }

    /// Frame curvature matrices `Θ_{ab}` as fields: the translation-invariant
    /// part plus the weight contribution on the grid.
    fn curvature_fields(&self) -> Vec<Vec<ScalarField>> {
        let fiber = &self.fiber;
        let n = fiber.n();
        let base = fiber.bundle.frame_curvature(&fiber.torus);
        let wc = fiber.grid_derivs().map(|g| g.weight_curvature.clone());
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let mut f = ScalarField::constant(fiber, base[(a, b)]);
                        if let (Some(wc), true) = (&wc, a == b) {
                            for (v, w) in f.values.iter_mut().zip(wc) {
                                *v += *w;
                            }
                        }
                        f
                    })
                    .collect()
            })
            .collect()
    }

    /// Frame coefficients `Σ_a w_E^a Θ_{ab}` of the `(0,1)`-form `w ⌟ Θ(h)`.
    pub fn curvature_contraction(&self) -> Vec<ScalarField> {
        let w = self.frame_components();
        let th = self.curvature_fields();
        let n = self.fiber.n();
        (0..n)
            .map(|b| {
                let mut acc = ScalarField::zero(&self.fiber);
                for a in 0..n {
                    if !th[a][b].is_zero() {
                        acc = acc.add(&w[a].mul(&th[a][b]));
                    }
                }
                acc
            })
            .collect()
    }

    /// `(w ⌟ Θ(h)) ∧ u`.
    pub fn curvature_wedge(&self, u: &FormSection) -> Result<FormSection> {
        let (p, q) = u.bidegree();
        let target = u.space.at(p, q + 1)?;
        let ext = &u.space.fiber.ext;
        let terms: Vec<_> = self
            .curvature_contraction()
            .into_iter()
            .enumerate()
            .map(|(b, f)| (f, ext.theta_bar(b, (p, q))))
            .collect();
        apply_field_maps(u, &target, &terms)
    }

    /// The function `Θ(h)(w, w̄) = Σ w^a conj(w^b) Θ_{ab}`.
    pub fn curvature_value(&self) -> ScalarField {
        let wt = self.curvature_contraction();
        let w = self.frame_components();
        let mut acc = ScalarField::zero(&self.fiber);
        for (c, wb) in wt.iter().zip(&w) {
            acc = acc.add(&c.mul(&wb.conj()));
        }
        acc
    }
}

/// `T^{1,0}`-valued `(0,1)`-form `Σ K_{jl} dz̄_l ⊗ ∂/∂z_j`.
#[derive(Debug, Clone)]
pub struct KsForm {
    pub fiber: Arc<Fiber>,
    /// `coeffs[j][l] = K_{jl}`.
    pub coeffs: Vec<Vec<ScalarField>>,
}

impl KsForm {
    pub fn constant(fiber: &Arc<Fiber>, k: &CMat) -> Self {
        let n = fiber.n();
        let coeffs = (0..n).map(|j| (0..n).map(|l| ScalarField::constant(fiber, k[(j, l)])).collect()).collect();
        KsForm { fiber: fiber.clone(), coeffs }
    }

    pub fn zero(fiber: &Arc<Fiber>) -> Self {
        let n = fiber.n();
        Self::constant(fiber, &CMat::zeros(n, n))
    }

    fn zip(&self, other: &KsForm, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> KsForm {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(r1, r2)| r1.iter().zip(r2).map(|(a, b)| f(a, b)).collect())
            .collect();
        KsForm { fiber: self.fiber.clone(), coeffs }
    }

    pub fn add(&self, other: &KsForm) -> KsForm {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &KsForm) -> KsForm {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, z: C64) -> KsForm {
        let coeffs = self.coeffs.iter().map(|r| r.iter().map(|c| c.scale(z)).collect()).collect();
        KsForm { fiber: self.fiber.clone(), coeffs }
    }

    /// L² norm of the coefficient array in the unitary frame.
    pub fn norm(&self) -> f64 {
        self.frame().iter().flatten().map(|f| f.norm().powi(2)).sum::<f64>().sqrt()
    }

    /// Frame coefficients `K^F = C̄ K C^{-1}`:
    /// `Σ K^F_{ab} θ̄_b ⊗ E_a`.
    pub fn frame(&self) -> Vec<Vec<ScalarField>> {
        let torus = &self.fiber.torus;
        let n = torus.n;
        let cbar = torus.chol.map(|z| z.conj());
        let cinv = inverse(&torus.chol).expect("invertible");
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let mut acc = ScalarField::zero(&self.fiber);
                        for j in 0..n {
                            for l in 0..n {
                                let w = cbar[(a, j)] * cinv[(l, b)];
                                if w != ZERO && !self.coeffs[j][l].is_zero() {
                                    acc = acc.add(&self.coeffs[j][l].scale(w));
                                }
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    /// `K ⌟ u = Σ K^F_{ab} θ̄_b ∧ ι_{E_a} u`, mapping `(p,q) → (p-1,q+1)`.
    pub fn contract(&self, u: &FormSection) -> Result<FormSection> {
        let (p, q) = u.bidegree();
        let n = u.space.fiber.n();
        if p == 0 {
            return Err(Error::BidegreeUnderflow("contraction needs a holomorphic slot".into()));
        }
        if q + 1 > n {
            return Err(Error::BidegreeOverflow(p - 1, q + 1));
        }
        let ext = &u.space.fiber.ext;
        let target = u.space.at(p - 1, q + 1)?;
        let kf = self.frame();
        let mut terms = Vec::new();
        for (a, row) in kf.into_iter().enumerate() {
            for (b, f) in row.into_iter().enumerate() {
                terms.push((f, ext.theta_bar(b, (p - 1, q)) * ext.iota(a, (p, q))));
            }
        }
        apply_field_maps(u, &target, &terms)
    }

    /// Frame coefficients of the scalar `(p-1,q+1)`-form `K ⌟ ω^k`-type
    /// contraction of a constant pointwise form `c` of bidegree `(p,q)`.
    pub fn contract_constant(&self, c: &[C64], (p, q): (usize, usize)) -> Result<Vec<ScalarField>> {
        let fiber = &self.fiber;
        let n = fiber.n();
        if p == 0 || q + 1 > n {
            return Err(Error::BidegreeUnderflow("contraction needs a holomorphic slot".into()));
        }
        let ext = &fiber.ext;
        let v = nalgebra::DVector::from_column_slice(c);
        let kf = self.frame();
        let mut out = vec![ScalarField::zero(fiber); ext.count(p - 1, q + 1)];
        for (a, row) in kf.iter().enumerate() {
            for (b, f) in row.iter().enumerate() {
                let img = ext.theta_bar(b, (p - 1, q)) * ext.iota(a, (p, q)) * &v;
                for (o, z) in out.iter_mut().zip(img.iter()) {
                    if *z != ZERO {
                        *o = o.add(&f.scale(*z));
                    }
                }
            }
        }
        Ok(out)
    }
}
