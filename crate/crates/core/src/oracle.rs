//! Independent ground truth: theta-function frames of `ℋ_t` for positive
//! bundles, Gram matrices by quadrature, the Chern curvature of the Gram
//! metric by finite differences in `t`, closed-form flat spectra and the
//! rank scan of the jumping family.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::{BundleMap, FamilySpec};
use crate::grid::site_xy;
use crate::hodge::HodgeOptions;
use crate::linalg::{binom, herm_eig, inverse, CMat, C64, I, ZERO};
use crate::space::{FormSection, FormSpace};
use crate::torus::LatticeTorus;

/// Samples of the classical theta functions with characteristics `a/d`,
/// `F_a(x, y) = Σ_k exp(πi d t s²) e^{2πi(dk + a)x}`, `s = y + k + a/d`,
/// in the gauge of the grid backend.
#[derive(Debug, Clone)]
pub struct ThetaFrame {
    pub t: C64,
    pub d: u32,
    pub n_grid: usize,
    /// `sections[a][k·N + j]`
    pub sections: Vec<Vec<C64>>,
}

pub fn theta_frame(t: C64, d: u32, n_grid: usize) -> Result<ThetaFrame> {
    if d == 0 {
        return Err(Error::InvalidArgument("theta frames need degree d >= 1".into()));
    }
    if t.im <= 0.0 {
        return Err(Error::NonPositivePeriod(t.im));
    }
    let df = d as f64;
    // |term| = exp(-π d Im t s²) drops below 1e-16 past this many shifts
    let reach = ((16.0 * std::f64::consts::LN_10) / (PI * df * t.im)).sqrt().ceil() as i64 + 2;
    let sections = (0..d)
        .map(|a| {
            (0..n_grid * n_grid)
                .map(|site| {
                    let (x, y) = site_xy(site, n_grid);
                    let mut acc = ZERO;
                    for k in -reach..=reach {
                        let s = y + k as f64 + a as f64 / df;
                        let phase = I * PI * df * t * s * s + I * 2.0 * PI * (df * k as f64 + a as f64) * x;
                        acc += phase.exp();
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(ThetaFrame { t, d, n_grid, sections })
}

impl ThetaFrame {
    /// The sections `F_a dz` as `(1,0)`-forms of a grid fiber.
    pub fn forms(&self, space: &FormSpace) -> Result<Vec<FormSection>> {
        let fiber = &space.fiber;
        if space.bidegree() != (1, 0) || fiber.grid_size() != Some(self.n_grid) || fiber.bundle.degree() != self.d {
            return Err(Error::DiscMismatch("theta frame and fiber differ".into()));
        }
        let tff = fiber.torus.top_form_factor();
        self.sections
            .iter()
            .map(|s| FormSection::new(space.clone(), s.iter().map(|v| v * tff).collect()))
            .collect()
    }

    /// Trapezoidal Gram matrix `H_{ab} = ∫ ⟨F_b dz, F_a dz⟩` with
    /// `|dz|² = 2 Im t` for the default Kähler form.
    pub fn gram(&self) -> CMat {
        let d = self.d as usize;
        let weight = 2.0 * self.t.im / (self.n_grid * self.n_grid) as f64;
        CMat::from_fn(d, d, |a, b| {
            let s: C64 = self.sections[b].iter().zip(&self.sections[a]).map(|(u, v)| u * v.conj()).sum();
            s * weight
        })
    }
}

/// `∫|F_a|² |dz|² = 2 Im t / √(2 d Im t)`; distinct characteristics are
/// orthogonal.
pub fn theta_gram_closed_form(t: C64, d: u32) -> CMat {
    let v = 2.0 * t.im / (2.0 * d as f64 * t.im).sqrt();
    CMat::identity(d as usize, d as usize) * C64::from(v)
}

/// Gram matrix of the holomorphic frame of `ℋ_{t'}` used by the oracle:
/// theta sections for positive bundles, `dz_1 ∧ … ∧ dz_n` for the trivial
/// flat bundle, nothing for flat bundles without sections.
fn frame_gram(family: &FamilySpec, t: C64, n_grid: usize) -> Result<CMat> {
    match &family.bundle_map {
        BundleMap::Positive { degree } => Ok(theta_frame(t, *degree, n_grid)?.gram()),
        BundleMap::Flat { character } => {
            if character.iter().any(|&c| c != 0.0) {
                return Ok(CMat::zeros(0, 0));
            }
            let torus = family.torus(t)?;
            Ok(CMat::from_element(1, 1, C64::from(torus.top_form_factor().norm_sqr())))
        }
        BundleMap::Jumping => {
            Err(Error::StencilQuadratureFailure("the jumping family is not locally trivial".into()))
        }
    }
}

/// Overlaps `⟨f_i, e_a⟩` of sections with the oracle frame at `t`.
fn frame_overlaps(family: &FamilySpec, t: C64, basis: &[FormSection]) -> Result<CMat> {
    let first = basis.first().ok_or_else(|| Error::InvalidArgument("empty basis".into()))?;
    let frame: Vec<FormSection> = match &family.bundle_map {
        BundleMap::Positive { degree } => {
            theta_frame(t, *degree, first.space.fiber.grid_size().unwrap_or(0))?.forms(&first.space)?
        }
        _ => {
            let fiber = &first.space.fiber;
            let origin = fiber
                .mode_index(&vec![0; 2 * fiber.n()])
                .ok_or_else(|| Error::DiscMismatch("flat frames need the spectral backend".into()))?;
            let mut e = first.space.zeros();
            e.coeffs[origin] = fiber.torus.top_form_factor();
            vec![e]
        }
    };
    let mut c = CMat::zeros(frame.len(), basis.len());
    for (a, e) in frame.iter().enumerate() {
        for (i, f) in basis.iter().enumerate() {
            c[(a, i)] = f.inner(e)?;
        }
    }
    Ok(c)
}

/// Chern curvature `K = -∂_t̄(H^{-1}∂_t H)` of the frame Gram matrix by
/// central differences on the stencil `t ± h`, `t ± ih`, returned as the
/// matrix `Q_{ij} = Θ(f_j, f_i)` in the given basis of `ℋ_t`, or in the
/// orthonormalized oracle frame when `basis` is `None`.
pub fn fd_chern_curvature_h(
    family: &FamilySpec,
    t: C64,
    step: f64,
    n_grid: usize,
    basis: Option<&[FormSection]>,
) -> Result<CMat> {
    if !(step > 1e-7) {
        return Err(Error::StencilQuadratureFailure(format!("step {step} is below the quadrature noise floor")));
    }
    let offsets = [C64::from(0.0), C64::from(step), C64::from(-step), I * step, -I * step];
    let grams = offsets
        .par_iter()
        .map(|o| frame_gram(family, t + o, n_grid))
        .collect::<Result<Vec<_>>>()?;
    let h = &grams[0];
    let dim = h.nrows();
    if dim == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    for g in &grams {
        if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) || herm_eig(g).0[0] <= 0.0 {
            return Err(Error::StencilQuadratureFailure("Gram matrix lost positivity".into()));
        }
    }
    let dx = (&grams[1] - &grams[2]) / C64::from(2.0 * step);
    let dy = (&grams[3] - &grams[4]) / C64::from(2.0 * step);
    let lap = (&grams[1] + &grams[2] + &grams[3] + &grams[4] - h * C64::from(4.0)) / C64::from(step * step);
    let dt = (&dx - &dy * I) * C64::from(0.5);
    let dtbar = (&dx + &dy * I) * C64::from(0.5);
    let hinv = inverse(h)?;
    let k = &hinv * &dtbar * &hinv * &dt - &hinv * lap * C64::from(0.25);
    let u = match basis {
        Some(b) => &hinv * frame_overlaps(family, t, b)?,
        None => {
            let (vals, vecs) = herm_eig(h);
            let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                dim,
                vals.iter().map(|v| C64::from(1.0 / v.sqrt())),
            ));
            &vecs * d * vecs.adjoint()
        }
    };
    Ok(u.adjoint() * h * k * u)
}

/// Closed-form spectrum of `□` on `(p,q)`-forms of the flat bundle with
/// character `χ`, over the modes `[-M, M]^{2n}`: each mode contributes
/// `2 sᴴ ḡ^{-1} s` (with `s` the symbol of `∂/∂z̄`) with multiplicity
/// `C(n,p)·C(n,q)`.
pub fn exact_flat_spectrum(torus: &LatticeTorus, chi: &[f64], (p, q): (usize, usize), m: usize) -> Result<Vec<f64>> {
    let n = torus.n;
    if chi.len() != 2 * n {
        return Err(Error::ShapeMismatch(format!("character of length {}", chi.len())));
    }
    if p > n || q > n {
        return Err(Error::BidegreeOverflow(p, q));
    }
    let ginv = inverse(&torus.kaehler)?;
    let side = 2 * m + 1;
    let mult = binom(n, p) * binom(n, q);
    let mut out = Vec::with_capacity(side.pow(2 * n as u32) * mult);
    for idx in 0..side.pow(2 * n as u32) {
        let mut rest = idx;
        let mut mu = vec![0f64; 2 * n];
        for slot in (0..2 * n).rev() {
            mu[slot] = (rest % side) as f64 - m as f64 + chi[slot];
            rest /= side;
        }
        let s = torus.dbar_symbol(&mu[..n], &mu[n..]);
        let mut lam = ZERO;
        for j in 0..n {
            for k in 0..n {
                lam += s[j].conj() * ginv[(j, k)].conj() * s[k];
            }
        }
        for _ in 0..mult {
            out.push(2.0 * lam.re);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RankSample {
    pub t: C64,
    /// `dim ℋ_t`
    pub rank: usize,
    /// Smallest eigenvalue above the kernel cut.
    pub lambda1: f64,
    /// The kernel is separated from the rest by a ratio above `1e4`.
    pub gap_ok: bool,
}

/// `dim ℋ_t` along `samples` for a flat family, from the closed-form
/// `(n,0)` spectrum with the default mode box and kernel cut.
pub fn rank_scan(family: &FamilySpec, samples: &[C64]) -> Result<Vec<RankSample>> {
    if !family.is_flat() {
        return Err(Error::InvalidArgument("rank scans need a flat-bundle family".into()));
    }
    let m = match family.default_disc() {
        crate::space::Disc::Spectral { m } => m,
        crate::space::Disc::Grid { .. } => unreachable!("flat families are spectral"),
    };
    let rank_tol = HodgeOptions::default().rank_tol;
    samples
        .par_iter()
        .map(|&t| {
            let torus = family.torus(t)?;
            let bundle = family.bundle(&torus, t)?;
            let chi = bundle.character().expect("flat bundle").to_vec();
            let n = torus.n;
            let spec = exact_flat_spectrum(&torus, &chi, (n, 0), m)?;
            let cut = rank_tol * spec.last().copied().unwrap_or(0.0);
            let rank = spec.iter().take_while(|&&v| v <= cut).count();
            let lambda1 = spec.get(rank).copied().unwrap_or(f64::INFINITY);
            let gap_ok = rank == 0 || spec[rank - 1] <= 0.0 || lambda1 / spec[rank - 1] > 1e4;
            Ok(RankSample { t, rank, lambda1, gap_ok })
        })
        .collect()
}
