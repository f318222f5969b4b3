//! Discretized fibers, form spaces and sections.
//!
//! A [`Fiber`] couples a torus, a line bundle and a discretization. Flat
//! bundles use Fourier modes `exp(2πi((k+χ_x)·x + (l+χ_y)·y))` with
//! `(k, l) ∈ [-M, M]^{2n}` enumerated lexicographically in
//! `(k_1, …, k_n, l_1, …, l_n)`. Positive bundles on elliptic curves use an
//! `N×N` grid, point `(j/N, k/N)` at index `k·N + j`, with sections
//! satisfying `F(x+1, y) = F` and `F(x, y+1) = e^{-2πi d x} F` in the unitary
//! gauge of the weighted metric.
//!
//! Coefficients of a `(p,q)`-form are stored component-major:
//! `index = component · sites + site`, components ordered as in
//! [`Exterior`]. All spaces carry unit total volume, so the L² inner
//! product is a plain sum over modes (Parseval) or a mean over grid points.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exterior::Exterior;
use crate::grid;
use crate::linalg::{CMat, C64, ZERO};
use crate::torus::{BundleData, BundleKind, LatticeTorus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Disc {
    Spectral { m: usize },
    Grid { n: usize },
}

#[derive(Debug)]
pub(crate) enum Backend {
    Spectral {
        m: usize,
        modes: Vec<Vec<i32>>,
        /// symbols of `D_{Ē_b}` per mode, `n` entries each
        dbar: Vec<Vec<C64>>,
        /// symbols of `D_{E_a}` per mode
        d: Vec<Vec<C64>>,
    },
    Grid { n: usize, derivs: grid::GridDerivs },
}

#[derive(Debug)]
pub struct Fiber {
    pub torus: LatticeTorus,
    pub bundle: BundleData,
    pub disc: Disc,
    pub ext: Exterior,
    pub sites: usize,
    pub(crate) backend: Backend,
}

fn mode_list(n: usize, m: usize) -> Vec<Vec<i32>> {
    let side = 2 * m + 1;
    let total = side.pow(2 * n as u32);
    (0..total)
        .map(|mut idx| {
            let mut v = vec![0i32; 2 * n];
            for slot in (0..2 * n).rev() {
                v[slot] = (idx % side) as i32 - m as i32;
                idx /= side;
            }
            v
        })
        .collect()
}

impl Fiber {
    pub fn new(torus: LatticeTorus, bundle: BundleData, disc: Disc) -> Result<Arc<Fiber>> {
        let n = torus.n;
        let ext = Exterior::new(n);
        match (&bundle.kind, disc) {
            (BundleKind::Flat { character }, Disc::Spectral { m }) => {
                if m == 0 {
                    return Err(Error::InvalidArgument("mode cutoff must be positive".into()));
                }
                let modes = mode_list(n, m);
                let fd = torus.frame_dbar();
                let fdd = torus.frame_d();
                let mut dbar = Vec::with_capacity(modes.len());
                let mut d = Vec::with_capacity(modes.len());
                for mu in &modes {
                    let k: Vec<f64> = (0..n).map(|i| mu[i] as f64 + character[i]).collect();
                    let l: Vec<f64> = (0..n).map(|i| mu[n + i] as f64 + character[n + i]).collect();
                    let sb = torus.dbar_symbol(&k, &l);
                    let sd = torus.d_symbol(&k, &l);
                    dbar.push((0..n).map(|b| (0..n).map(|j| fd[(j, b)] * sb[j]).sum()).collect());
                    d.push((0..n).map(|a| (0..n).map(|j| fdd[(j, a)] * sd[j]).sum()).collect());
                }
                let sites = modes.len();
                Ok(Arc::new(Fiber {
                    torus,
                    bundle,
                    disc,
                    ext,
                    sites,
                    backend: Backend::Spectral { m, modes, dbar, d },
                }))
            }
            (BundleKind::Positive { degree, weight }, Disc::Grid { n: ng }) => {
                if ng < 4 {
                    return Err(Error::InvalidArgument("grid needs at least 4 points".into()));
                }
                if let Some(w) = weight {
                    if w.n_grid != ng {
                        return Err(Error::DiscMismatch(format!(
                            "weight sampled on {} points, grid has {ng}",
                            w.n_grid
                        )));
                    }
                }
                let derivs = grid::GridDerivs::new(&torus, *degree, ng, weight.as_ref());
                Ok(Arc::new(Fiber {
                    torus,
                    bundle,
                    disc,
                    ext,
                    sites: ng * ng,
                    backend: Backend::Grid { n: ng, derivs },
                }))
            }
            (BundleKind::Flat { .. }, Disc::Grid { .. }) => Err(Error::DiscMismatch(
                "flat bundles use the spectral backend".into(),
            )),
            (BundleKind::Positive { .. }, Disc::Spectral { .. }) => Err(Error::DiscMismatch(
                "positive bundles use the grid backend".into(),
            )),
        }
    }

    pub fn n(&self) -> usize {
        self.torus.n
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self.backend, Backend::Spectral { .. })
    }

    /// Mode vectors of the spectral backend.
    pub fn modes(&self) -> Option<&[Vec<i32>]> {
        match &self.backend {
            Backend::Spectral { modes, .. } => Some(modes),
            Backend::Grid { .. } => None,
        }
    }

    pub fn mode_cutoff(&self) -> Option<usize> {
        match &self.backend {
            Backend::Spectral { m, .. } => Some(*m),
            Backend::Grid { .. } => None,
        }
    }

    pub fn grid_size(&self) -> Option<usize> {
        match &self.backend {
            Backend::Grid { n, .. } => Some(*n),
            Backend::Spectral { .. } => None,
        }
    }

    /// Index of a mode vector, if inside the box.
    pub fn mode_index(&self, mu: &[i32]) -> Option<usize> {
        let m = self.mode_cutoff()? as i32;
        let side = 2 * m + 1;
        let mut idx = 0usize;
        for &v in mu {
            if v < -m || v > m {
                return None;
            }
            idx = idx * side as usize + (v + m) as usize;
        }
        Some(idx)
    }

    /// Per-mode symbols of `D_{Ē_b}` (spectral backend).
    pub fn dbar_symbols(&self) -> Option<&[Vec<C64>]> {
        match &self.backend {
            Backend::Spectral { dbar, .. } => Some(dbar),
            _ => None,
        }
    }

    pub fn d_symbols(&self) -> Option<&[Vec<C64>]> {
        match &self.backend {
            Backend::Spectral { d, .. } => Some(d),
            _ => None,
        }
    }

    /// Frame derivatives `D_Ē`, `D_E` on functions (grid backend).
    pub fn grid_derivs(&self) -> Option<&grid::GridDerivs> {
        match &self.backend {
            Backend::Grid { derivs, .. } => Some(derivs),
            _ => None,
        }
    }

    /// Integration weight of one site.
    pub fn site_weight(&self) -> f64 {
        if self.is_spectral() {
            1.0
        } else {
            1.0 / self.sites as f64
        }
    }

    pub fn space(self: &Arc<Self>, p: usize, q: usize) -> Result<FormSpace> {
        FormSpace::new(self.clone(), p, q)
    }
}

/// `Ω^{p,q}(X, E)` at a fixed discretization.
#[derive(Debug, Clone)]
pub struct FormSpace {
    pub fiber: Arc<Fiber>,
    pub p: usize,
    pub q: usize,
}

impl PartialEq for FormSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.fiber, &other.fiber) && self.p == other.p && self.q == other.q
    }
}

impl FormSpace {
    pub fn new(fiber: Arc<Fiber>, p: usize, q: usize) -> Result<Self> {
        if p > fiber.n() || q > fiber.n() {
            return Err(Error::BidegreeOverflow(p, q));
        }
        Ok(FormSpace { fiber, p, q })
    }

    pub fn components(&self) -> usize {
        self.fiber.ext.count(self.p, self.q)
    }

    pub fn dim(&self) -> usize {
        self.components() * self.fiber.sites
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    /// Space of the same fiber at another bidegree.
    pub fn at(&self, p: usize, q: usize) -> Result<FormSpace> {
        FormSpace::new(self.fiber.clone(), p, q)
    }

    pub fn zeros(&self) -> FormSection {
        FormSection { space: self.clone(), coeffs: vec![ZERO; self.dim()] }
    }
}

#[derive(Debug, Clone)]
pub struct FormSection {
    pub space: FormSpace,
    pub coeffs: Vec<C64>,
}

pub(crate) fn same_space(a: &FormSpace, b: &FormSpace) -> Result<()> {
    if a != b {
        return Err(Error::ShapeMismatch(format!(
            "sections live in ({},{}) and ({},{}) or on different fibers",
            a.p, a.q, b.p, b.q
        )));
    }
    Ok(())
}

impl FormSection {
    pub fn new(space: FormSpace, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a space of dimension {}",
                coeffs.len(),
                space.dim()
            )));
        }
        Ok(FormSection { space, coeffs })
    }

    /// Random smooth section. Spectral: Gaussian-decaying mode amplitudes.
    /// Grid: `Σ_k φ(x, y+k) w(y+k) e^{2πi d k x}` with `φ` a random
    /// trigonometric polynomial and `w` a Gaussian packet, which satisfies
    /// the factor of automorphy by construction.
    pub fn random<R: Rng>(space: &FormSpace, rng: &mut R) -> Self {
        let sites = space.fiber.sites;
        fn gauss<R: Rng>(rng: &mut R) -> C64 {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        }
        let coeffs = match (space.fiber.modes(), space.fiber.grid_size()) {
            (Some(ms), _) => (0..space.dim())
                .map(|i| {
                    let r2: i32 = ms[i % sites].iter().map(|v| v * v).sum();
                    gauss(rng) * (-(r2 as f64) / 4.0).exp()
                })
                .collect(),
            (None, Some(n)) => {
                let d = space.fiber.bundle.degree() as f64;
                let mut out = Vec::with_capacity(space.dim());
                for _ in 0..space.components() {
                    let center = rng.gen::<f64>();
                    let trig: Vec<(i32, i32, C64)> = (-2..=2)
                        .flat_map(|a| (-2..=2).map(move |b| (a, b)))
                        .map(|(a, b)| (a, b, gauss(rng) * (-((a * a + b * b) as f64) / 2.0).exp()))
                        .collect();
                    for s in 0..sites {
                        let (x, y) = crate::grid::site_xy(s, n);
                        let mut acc = ZERO;
                        for k in -4i32..=4 {
                            let yk = y + k as f64;
                            let w = (-6.0 * (yk - center).powi(2)).exp();
                            let phi: C64 = trig
                                .iter()
                                .map(|&(a, b, z)| z * C64::from_polar(1.0, TAU * (a as f64 * x + b as f64 * yk)))
                                .sum();
                            acc += phi * w * C64::from_polar(1.0, TAU * d * k as f64 * x);
                        }
                        out.push(acc);
                    }
                }
                out
            }
            _ => unreachable!("every fiber has a discretization"),
        };
        FormSection { space: space.clone(), coeffs }
    }

    pub fn bidegree(&self) -> (usize, usize) {
        self.space.bidegree()
    }

    pub fn sites(&self) -> usize {
        self.space.fiber.sites
    }

    /// L² inner product, linear in the first slot.
    pub fn inner(&self, other: &FormSection) -> Result<C64> {
        same_space(&self.space, &other.space)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &FormSection) -> C64 {
        let s: C64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum();
        s * self.space.fiber.site_weight()
    }

    pub fn norm(&self) -> f64 {
        self.inner_unchecked(self).re.max(0.0).sqrt()
    }

    pub fn scale(&self, z: C64) -> FormSection {
        FormSection { space: self.space.clone(), coeffs: self.coeffs.iter().map(|c| c * z).collect() }
    }

    pub fn add(&self, other: &FormSection) -> Result<FormSection> {
        same_space(&self.space, &other.space)?;
        Ok(self.axpy(ZERO + 1.0, other))
    }

    pub fn sub(&self, other: &FormSection) -> Result<FormSection> {
        same_space(&self.space, &other.space)?;
        Ok(self.axpy(C64::from(-1.0), other))
    }

    /// `self + a·other`, spaces assumed equal.
    pub(crate) fn axpy(&self, a: C64, other: &FormSection) -> FormSection {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + a * y).collect();
        FormSection { space: self.space.clone(), coeffs }
    }

    /// Pointwise components at one site.
    pub fn at_site(&self, site: usize) -> Vec<C64> {
        let s = self.sites();
        (0..self.space.components()).map(|c| self.coeffs[c * s + site]).collect()
    }

    /// Applies the same pointwise linear map at every site.
    pub fn pointwise(&self, m: &CMat, target: &FormSpace) -> Result<FormSection> {
        if m.ncols() != self.space.components() || m.nrows() != target.components() {
            return Err(Error::ShapeMismatch("pointwise map".into()));
        }
        let s = self.sites();
        let mut out = target.zeros();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let a = m[(r, c)];
                if a == ZERO {
                    continue;
                }
                let (dst, src) = (&mut out.coeffs[r * s..(r + 1) * s], &self.coeffs[c * s..(c + 1) * s]);
                for (d, v) in dst.iter_mut().zip(src) {
                    *d += a * v;
                }
            }
        }
        Ok(out)
    }

    pub fn to_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.coeffs)
    }
}

/// `√-1^{n²} ∫ ⟨u ∧ v̄⟩` on `(n,0)`-forms and the L² inner product on every
/// other bidegree.
pub fn pair_l2(u: &FormSection, v: &FormSection) -> Result<C64> {
    same_space(&u.space, &v.space)?;
    let n = u.space.fiber.n();
    if u.bidegree() == (n, 0) {
        return hr_pairing(u, v);
    }
    Ok(u.inner_unchecked(v))
}

/// `√-1^{k²}/(n-k)! ∫ ⟨α ∧ β̄ ∧ ω^{n-k}⟩` for `(p,q)`-forms, `k = p+q ≤ n`.
pub fn hr_pairing(a: &FormSection, b: &FormSection) -> Result<C64> {
    same_space(&a.space, &b.space)?;
    let (p, q) = a.bidegree();
    let fiber = &a.space.fiber;
    if p + q > fiber.n() {
        return Err(Error::BidegreeOverflow(p, q));
    }
    let s = fiber.ext.hr_matrix(p, q);
    let sites = fiber.sites;
    let mut total = ZERO;
    for i in 0..s.nrows() {
        for j in 0..s.ncols() {
            let w = s[(i, j)];
            if w == ZERO {
                continue;
            }
            let x = &a.coeffs[i * sites..(i + 1) * sites];
            let y = &b.coeffs[j * sites..(j + 1) * sites];
            let dot: C64 = x.iter().zip(y).map(|(u, v)| u * v.conj()).sum();
            total += w * dot;
        }
    }
    Ok(total * fiber.site_weight())
}
