//! FFT machinery for the `N×N` grid backend.
//!
//! The degree-`d` bundle is realized in the gauge `D = d + 2πi d y dx`, with
//! sections satisfying `F(x+1, y) = F` and `F(x, y+1) = e^{-2πi d x} F`.
//! `D_x` is the Fourier derivative along each row plus `2πi d y`; `D_y` is
//! the Fourier derivative along each column after untwisting by
//! `e^{2πi d x y}`. Both are anti-Hermitian and have no spurious zero
//! symbols, so the discrete kernel of `∂̄` on sections has dimension `d`.
//! `D_E` is defined as `-D_Ē^†`, which makes the discrete Hodge identities
//! exact.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::linalg::{C64, I, ZERO};
use crate::torus::{LatticeTorus, Weight};

/// Wavenumber of FFT slot `i`. The window is `-N/2+1 ..= N/2` for even `N`,
/// so the Nyquist slot gets `+N/2` and no nonzero mode has zero symbol.
fn wavenumber(i: usize, n: usize) -> f64 {
    if i <= n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

/// Frame derivatives `D_Ē = a_x D_x + a_y D_y + w̄` and
/// `D_E = conj(a_x) D_x + conj(a_y) D_y - conj(w̄)` on grid functions.
pub struct GridDerivs {
    pub n: usize,
    pub degree: u32,
    ax: C64,
    ay: C64,
    /// `½ f ψ_z̄` per site, present for non-constant weights.
    shift: Option<Vec<C64>>,
    /// `e^{2πi d x_j y_k}` at index `k·N + j`.
    untwist: Vec<C64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `|symbol of D_Ē|²` for free plane waves, FFT order.
    free_symbol: Vec<f64>,
    /// `∂∂̄ψ` in frame units per site (zero without weight).
    pub weight_curvature: Vec<f64>,
}

impl fmt::Debug for GridDerivs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridDerivs").field("n", &self.n).field("degree", &self.degree).finish_non_exhaustive()
    }
}

impl GridDerivs {
    pub fn new(torus: &LatticeTorus, degree: u32, n: usize, weight: Option<&Weight>) -> Self {
        let t = torus.period[(0, 0)];
        let a = C64::from(1.0) / (t - t.conj());
        let fd = torus.frame_dbar()[(0, 0)];
        let ax = fd * a * t;
        let ay = -fd * a;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let h = 1.0 / n as f64;
        let dd = degree as f64;
        let untwist = (0..n * n)
            .map(|s| {
                let (j, k) = (s % n, s / n);
                C64::from_polar(1.0, TAU * dd * (j as f64 * h) * (k as f64 * h))
            })
            .collect();
        let free_symbol = (0..n * n)
            .map(|s| {
                let (j, k) = (s % n, s / n);
                (ax * I * TAU * wavenumber(j, n) + ay * I * TAU * wavenumber(k, n)).norm_sqr()
            })
            .collect();
        let mut out = GridDerivs {
            n,
            degree,
            ax,
            ay,
            shift: None,
            untwist,
            fwd,
            inv,
            free_symbol,
            weight_curvature: vec![0.0; n * n],
        };
        if let Some(w) = weight {
            let psi: Vec<C64> = w.values.iter().map(|&v| C64::from(v)).collect();
            let px = spectral_derivative(&psi, n, 1, 0);
            let py = spectral_derivative(&psi, n, 0, 1);
            let psi_zbar: Vec<C64> = px.iter().zip(&py).map(|(x, y)| a * (t * x - y)).collect();
            let zx = spectral_derivative(&psi_zbar, n, 1, 0);
            let zy = spectral_derivative(&psi_zbar, n, 0, 1);
            let g = torus.kaehler[(0, 0)].re;
            for i in 0..n * n {
                let psi_zzbar = a * (zy[i] - t.conj() * zx[i]);
                out.weight_curvature[i] = 2.0 * psi_zzbar.re / g;
            }
            out.shift = Some(psi_zbar.iter().map(|z| z * fd * 0.5).collect());
        }
        out
    }

    fn spectral_rows(&self, buf: &mut [C64]) {
        let n = self.n;
        for row in buf.chunks_mut(n) {
            self.fwd.process(row);
            for (j, z) in row.iter_mut().enumerate() {
                *z *= I * TAU * wavenumber(j, n) / n as f64;
            }
            self.inv.process(row);
        }
    }

    /// `D_x = ∂_x + 2πi d y`
    pub fn dx(&self, f: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut out = f.to_vec();
        self.spectral_rows(&mut out);
        let dd = self.degree as f64;
        for (s, z) in out.iter_mut().enumerate() {
            let y = (s / n) as f64 / n as f64;
            *z += I * TAU * dd * y * f[s];
        }
        out
    }

    /// `D_y = ∂_y` on twisted-periodic columns.
    pub fn dy(&self, f: &[C64]) -> Vec<C64> {
        let n = self.n;
        let dd = self.degree as f64;
        let mut out = vec![ZERO; n * n];
        let mut col = vec![ZERO; n];
        for j in 0..n {
            let x = j as f64 / n as f64;
            for k in 0..n {
                col[k] = f[k * n + j] * self.untwist[k * n + j];
            }
            self.fwd.process(&mut col);
            for (k, z) in col.iter_mut().enumerate() {
                *z *= I * TAU * (wavenumber(k, n) - dd * x) / n as f64;
            }
            self.inv.process(&mut col);
            for k in 0..n {
                out[k * n + j] = col[k] * self.untwist[k * n + j].conj();
            }
        }
        out
    }

    pub fn dbar(&self, f: &[C64]) -> Vec<C64> {
        self.combine(f, self.ax, self.ay, 1.0)
    }

    pub fn d(&self, f: &[C64]) -> Vec<C64> {
        self.combine(f, self.ax.conj(), self.ay.conj(), -1.0)
    }

    fn combine(&self, f: &[C64], cx: C64, cy: C64, shift_sign: f64) -> Vec<C64> {
        let x = self.dx(f);
        let y = self.dy(f);
        let mut out: Vec<C64> = x.iter().zip(&y).map(|(a, b)| cx * a + cy * b).collect();
        if let Some(sh) = &self.shift {
            for (s, z) in out.iter_mut().enumerate() {
                let w = if shift_sign > 0.0 { sh[s] } else { -sh[s].conj() };
                *z += w * f[s];
            }
        }
        out
    }

    /// `(σ + |D_Ē|²_free)^{-1}` applied to one grid function: a Hermitian
    /// positive definite approximation of the inverse shifted Laplacian.
    pub fn precondition(&self, f: &[C64], sigma: f64) -> Vec<C64> {
        let n = self.n;
        let mut buf = f.to_vec();
        fft2(&mut buf, n, &*self.fwd);
        for (z, s) in buf.iter_mut().zip(&self.free_symbol) {
            *z /= (sigma + s) * (n * n) as f64;
        }
        fft2(&mut buf, n, &*self.inv);
        buf
    }
}

/// Spectral derivative `∂_x^{ox} ∂_y^{oy}` of periodic samples on the grid.
/// The Nyquist mode is dropped for odd orders so real data stays real.
pub fn spectral_derivative(values: &[C64], n: usize, ox: u32, oy: u32) -> Vec<C64> {
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf = values.to_vec();
    fft2(&mut buf, n, &*fwd);
    for k in 0..n {
        for j in 0..n {
            let (fx, fy) = (wavenumber(j, n), wavenumber(k, n));
            let nyq = (n % 2 == 0) && ((ox % 2 == 1 && j == n / 2) || (oy % 2 == 1 && k == n / 2));
            let sym = if nyq { ZERO } else { (I * TAU * fx).powu(ox) * (I * TAU * fy).powu(oy) };
            buf[k * n + j] *= sym;
        }
    }
    fft2(&mut buf, n, &*inv);
    let scale = 1.0 / (n * n) as f64;
    buf.iter().map(|z| z * scale).collect()
}

fn fft2(buf: &mut [C64], n: usize, plan: &dyn Fft<f64>) {
    for row in buf.chunks_mut(n) {
        plan.process(row);
    }
    let mut col = vec![ZERO; n];
    for j in 0..n {
        for k in 0..n {
            col[k] = buf[k * n + j];
        }
        plan.process(&mut col);
        for k in 0..n {
            buf[k * n + j] = col[k];
        }
    }
}

/// Grid coordinates `(x, y)` of a site.
pub fn site_xy(site: usize, n: usize) -> (f64, f64) {
    ((site % n) as f64 / n as f64, (site / n) as f64 / n as f64)
}
