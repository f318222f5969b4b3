//! Flat complex tori `ℂ^n/(ℤ^n + Ω ℤ^n)` and Hermitian line bundles on them.
//!
//! Real coordinates `(x, y) ∈ [0,1)^{2n}` are the universal trivialization:
//! `z = x + Ω y`. The flat Kähler form is `ω = (i/2) Σ g_{jk} dz_j ∧ dz̄_k`,
//! and `g = Cᴴ C` fixes the unitary coframe `θ = C̄ dz / √2`.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_upper, herm_eig, inverse, CMat, C64, I};

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeTorus {
    pub n: usize,
    pub period: CMat,
    pub kaehler: CMat,
    /// Upper-triangular factor with `kaehler = Cᴴ C`.
    pub chol: CMat,
}

fn check_period(n: usize, period: &CMat) -> Result<()> {
    if !(1..=2).contains(&n) {
        return Err(Error::UnsupportedDimension(format!("torus dimension {n}")));
    }
    if period.nrows() != n || period.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "period matrix is {}x{}, expected {n}x{n}",
            period.nrows(),
            period.ncols()
        )));
    }
    if (period - period.transpose()).norm() > 1e-12 {
        return Err(Error::InvalidArgument("period matrix must be symmetric".into()));
    }
    let im = period.map(|z| C64::from(z.im));
    let min = herm_eig(&im).0[0];
    if min <= 1e-12 {
        return Err(Error::NonPositivePeriod(min));
    }
    Ok(())
}

fn imag_part(m: &CMat) -> CMat {
    m.map(|z| C64::from(z.im))
}

/// `det(g) · det(Im Ω)`, the volume of `ω^n/n!`.
fn raw_volume(kaehler: &CMat, period: &CMat) -> f64 {
    (kaehler.determinant() * imag_part(period).determinant()).re
}

impl LatticeTorus {
    /// Torus with the default flat Kähler form `g = (Im Ω)^{-1}` (unit volume).
    pub fn new(n: usize, period: CMat) -> Result<Self> {
        check_period(n, &period)?;
        let g = inverse(&imag_part(&period))?;
        Self::with_kaehler(n, period, g)
    }

    /// Torus with a prescribed flat Kähler form, rescaled to unit volume.
    pub fn with_kaehler(n: usize, period: CMat, kaehler: CMat) -> Result<Self> {
        check_period(n, &period)?;
        let vol = Self::validate_kaehler(n, &kaehler, &period)?;
        let g = kaehler.scale(vol.powf(-1.0 / n as f64));
        Self::assemble(n, period, g)
    }

    fn validate_kaehler(n: usize, kaehler: &CMat, period: &CMat) -> Result<f64> {
        if kaehler.nrows() != n || kaehler.ncols() != n {
            return Err(Error::ShapeMismatch("kaehler matrix".into()));
        }
        if (kaehler - kaehler.adjoint()).norm() > 1e-12 {
            return Err(Error::InvalidArgument("kaehler matrix must be Hermitian".into()));
        }
        if herm_eig(kaehler).0[0] <= 0.0 {
            return Err(Error::InvalidArgument("kaehler matrix must be positive definite".into()));
        }
        Ok(raw_volume(kaehler, period))
    }

    fn assemble(n: usize, period: CMat, kaehler: CMat) -> Result<Self> {
        let chol = cholesky_upper(&kaehler)?;
        Ok(LatticeTorus { n, period, kaehler, chol })
    }

    /// Same lattice with `ω` replaced by `c·ω` and no renormalization.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if factor <= 0.0 {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        Self::assemble(self.n, self.period.clone(), self.kaehler.scale(factor))
    }

    pub fn volume(&self) -> f64 {
        raw_volume(&self.kaehler, &self.period)
    }

    /// `(Ω - Ω̄)^{-1}`
    pub fn a_matrix(&self) -> CMat {
        let d = imag_part(&self.period) * C64::new(0.0, 2.0);
        inverse(&d).expect("checked positive imaginary part")
    }

    /// Symbol of `∂/∂z̄` acting on `exp(2πi(k·x + l·y))` for real wave
    /// vectors `k`, `l`.
    pub fn dbar_symbol(&self, k: &[f64], l: &[f64]) -> Vec<C64> {
        let a = self.a_matrix();
        let tau = std::f64::consts::TAU;
        let n = self.n;
        let v: Vec<C64> = (0..n)
            .map(|r| {
                let ok: C64 = (0..n).map(|s| self.period[(r, s)] * k[s]).sum();
                I * tau * (ok - l[r])
            })
            .collect();
        (0..n).map(|r| (0..n).map(|s| a[(r, s)] * v[s]).sum()).collect()
    }

    /// Symbol of `∂/∂z` on the same plane wave.
    pub fn d_symbol(&self, k: &[f64], l: &[f64]) -> Vec<C64> {
        let a = self.a_matrix();
        let tau = std::f64::consts::TAU;
        let n = self.n;
        let v: Vec<C64> = (0..n)
            .map(|r| {
                let ok: C64 = (0..n).map(|s| self.period[(r, s)].conj() * k[s]).sum();
                I * tau * (C64::from(l[r]) - ok)
            })
            .collect();
        (0..n).map(|r| (0..n).map(|s| a[(r, s)] * v[s]).sum()).collect()
    }

    /// Coefficients of `D_{Ē_b}` in terms of `∂/∂z̄_j`: `√2 (C^{-1})_{jb}`.
    pub fn frame_dbar(&self) -> CMat {
        inverse(&self.chol).expect("Cholesky factor is invertible").scale(2f64.sqrt())
    }

    /// Coefficients of `D_{E_b}` in terms of `∂/∂z_j`: `√2 (C̄^{-1})_{jb}`.
    pub fn frame_d(&self) -> CMat {
        self.frame_dbar().map(|z| z.conj())
    }

    /// Converts coordinate components `v^j` of a `(1,0)`-vector to the
    /// unitary frame: `v_E = C̄ v / √2`.
    pub fn vector_to_frame(&self) -> CMat {
        self.chol.map(|z| z.conj()).scale(1.0 / 2f64.sqrt())
    }

    /// Coefficient of `dz_1 ∧ … ∧ dz_n` on `θ_1 ∧ … ∧ θ_n`:
    /// `2^{n/2} det(C̄^{-1})`.
    pub fn top_form_factor(&self) -> C64 {
        let cbar = self.chol.map(|z| z.conj());
        C64::from(2f64.powf(self.n as f64 / 2.0)) / cbar.determinant()
    }
}

/// Smooth periodic potential `ψ` sampled on the `N×N` grid (index `k·N + j`
/// for the point `(j/N, k/N)`); the metric becomes `e^{-ψ}` times the
/// translation-invariant one.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    pub n_grid: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BundleKind {
    Flat { character: Vec<f64> },
    Positive { degree: u32, weight: Option<Weight> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleData {
    pub kind: BundleKind,
    /// Coefficients `R_{jk}` of the translation-invariant part of the
    /// curvature, `Θ = Σ R_{jk} dz_j ∧ dz̄_k` (the weight adds `∂∂̄ψ`).
    pub curvature: CMat,
}

impl BundleData {
    pub fn flat(torus: &LatticeTorus, character: &[f64]) -> Result<Self> {
        if character.len() != 2 * torus.n {
            return Err(Error::ShapeMismatch(format!(
                "character has {} entries, expected {}",
                character.len(),
                2 * torus.n
            )));
        }
        if character.iter().any(|&c| !(0.0..1.0).contains(&c)) {
            return Err(Error::InvalidArgument("character entries must lie in [0,1)".into()));
        }
        Ok(BundleData {
            kind: BundleKind::Flat { character: character.to_vec() },
            curvature: CMat::zeros(torus.n, torus.n),
        })
    }

    /// Degree-`d` bundle on an elliptic curve with `iΘ = 2πd ω` plus `i∂∂̄ψ`.
    pub fn positive(torus: &LatticeTorus, degree: u32, weight: Option<Weight>) -> Result<Self> {
        if torus.n != 1 {
            return Err(Error::UnsupportedDimension(
                "positive bundles are implemented on elliptic curves only".into(),
            ));
        }
        if degree == 0 {
            return Err(Error::InvalidArgument("degree must be at least 1".into()));
        }
        if let Some(w) = &weight {
            if w.values.len() != w.n_grid * w.n_grid {
                return Err(Error::ShapeMismatch("weight samples".into()));
            }
        }
        // Θ = -2πi d dx∧dy and dz∧dz̄ = -2i Im(t) dx∧dy
        let r = std::f64::consts::PI * degree as f64 * torus.kaehler[(0, 0)].re;
        Ok(BundleData {
            kind: BundleKind::Positive { degree, weight },
            curvature: CMat::from_element(1, 1, C64::from(r)),
        })
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, BundleKind::Flat { .. })
    }

    pub fn degree(&self) -> u32 {
        match self.kind {
            BundleKind::Flat { .. } => 0,
            BundleKind::Positive { degree, .. } => degree,
        }
    }

    pub fn character(&self) -> Option<&[f64]> {
        match &self.kind {
            BundleKind::Flat { character } => Some(character),
            _ => None,
        }
    }

    pub fn weight(&self) -> Option<&Weight> {
        match &self.kind {
            BundleKind::Positive { weight, .. } => weight.as_ref(),
            _ => None,
        }
    }

    /// Curvature in the unitary frame: `Θ = Σ Θ_{ab} θ_a ∧ θ̄_b`,
    /// `Θ_F = 2 (C̄^{-1})ᵀ R C^{-1}` (translation-invariant part).
    pub fn frame_curvature(&self, torus: &LatticeTorus) -> CMat {
        let cinv = inverse(&torus.chol).expect("invertible");
        let cbar_inv = cinv.map(|z| z.conj());
        (cbar_inv.transpose() * &self.curvature * cinv).scale(2.0)
    }

    /// `(i/2π) ∫ Θ` for the translation-invariant part (the weight part
    /// integrates to zero).
    pub fn degree_integral(&self, torus: &LatticeTorus) -> f64 {
        if torus.n != 1 {
            return 0.0;
        }
        // ∫ dz∧dz̄ = -2i Im(t)
        let im_t = torus.period[(0, 0)].im;
        let val = I / std::f64::consts::TAU * self.curvature[(0, 0)] * C64::new(0.0, -2.0 * im_t);
        val.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn one(z: C64) -> CMat {
        CMat::from_element(1, 1, z)
    }

    #[test]
    fn square_torus_has_unit_volume() {
        let t = LatticeTorus::new(1, one(I)).unwrap();
        assert!((t.volume() - 1.0).abs() < 1e-12);
        assert!((t.kaehler[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_lattice_rejected() {
        assert!(matches!(LatticeTorus::new(1, one(c(1.0, 0.0))), Err(Error::NonPositivePeriod(_))));
        assert!(matches!(LatticeTorus::new(1, one(c(0.0, -1.0))), Err(Error::NonPositivePeriod(_))));
        assert!(matches!(LatticeTorus::new(3, CMat::identity(3, 3)), Err(Error::UnsupportedDimension(_))));
    }

    #[test]
    fn prescribed_kaehler_is_normalized() {
        let omega = CMat::from_row_slice(2, 2, &[c(0.2, 1.3), c(0.1, 0.2), c(0.1, 0.2), c(-0.3, 0.9)]);
        let g = CMat::from_row_slice(2, 2, &[c(3.0, 0.0), c(0.5, 0.2), c(0.5, -0.2), c(2.0, 0.0)]);
        let t = LatticeTorus::with_kaehler(2, omega, g).unwrap();
        assert!((t.volume() - 1.0).abs() < 1e-12);
        assert!((t.chol.adjoint() * &t.chol - &t.kaehler).norm() < 1e-12);
    }

    #[test]
    fn scaled_torus_is_not_renormalized() {
        let t = LatticeTorus::new(1, one(c(0.3, 1.7))).unwrap();
        assert!((t.scaled(2.5).unwrap().volume() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn symbols_on_square_torus() {
        let t = LatticeTorus::new(1, one(I)).unwrap();
        // ∂_z̄ e^{2πi x} = π i e^{2πix} on the square torus
        let s = t.dbar_symbol(&[1.0], &[0.0]);
        assert!((s[0] - c(0.0, std::f64::consts::PI)).norm() < 1e-12);
        let s = t.d_symbol(&[1.0], &[0.0]);
        assert!((s[0] - c(0.0, std::f64::consts::PI)).norm() < 1e-12);
    }

    #[test]
    fn positive_bundle_degree() {
        let t = LatticeTorus::new(1, one(c(0.4, 1.3))).unwrap();
        for d in 1..4 {
            let b = BundleData::positive(&t, d, None).unwrap();
            assert!((b.degree_integral(&t) - d as f64).abs() < 1e-10);
            let f = b.frame_curvature(&t);
            assert!((f[(0, 0)].re - std::f64::consts::TAU * d as f64).abs() < 1e-12);
        }
        assert!(BundleData::positive(&t, 0, None).is_err());
        let t2 = LatticeTorus::new(2, CMat::identity(2, 2) * I).unwrap();
        assert!(matches!(BundleData::positive(&t2, 1, None), Err(Error::UnsupportedDimension(_))));
    }

    #[test]
    fn flat_bundle_checks() {
        let t = LatticeTorus::new(1, one(I)).unwrap();
        let b = BundleData::flat(&t, &[0.5, 0.0]).unwrap();
        assert_eq!(b.curvature.norm(), 0.0);
        assert!(BundleData::flat(&t, &[1.0, 0.0]).is_err());
        assert!(BundleData::flat(&t, &[0.0]).is_err());
    }
}
