//! Laplacians, harmonic spaces and Green operators.
//!
//! Spectral packages diagonalize `□` block by block, which is exact. Grid
//! packages find the low spectrum by LOBPCG and apply the Green operator by
//! conjugate gradients on the complement of the kernel, both preconditioned
//! by the inverse of the shifted free Laplacian. Small grids are
//! diagonalized densely.

use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, CMat, C64, ZERO};
use crate::operator::{assemble_dbar, d_laplacian, dbar_laplacian, OperatorMatrix};
use crate::space::{same_space, Fiber, FormSection, FormSpace};

#[derive(Debug, Clone, Copy)]
pub struct HodgeOptions {
    /// Kernel cut relative to the largest eigenvalue.
    pub rank_tol: f64,
    /// Number of low eigenvalues resolved on the grid backend.
    pub low_count: usize,
    pub shift: f64,
    pub seed: u64,
}

impl Default for HodgeOptions {
    fn default() -> Self {
        HodgeOptions { rank_tol: 1e-7, low_count: 4, shift: 1.0, seed: 11 }
    }
}

#[derive(Debug)]
enum Solver {
    Spectral { eig: Vec<(Vec<f64>, CMat)> },
    Dense { vals: Vec<f64>, vecs: CMat },
    Grid { shift: f64 },
}

#[derive(Debug)]
pub struct HodgePackage {
    pub space: FormSpace,
    pub laplacian: OperatorMatrix,
    pub laplacian10: OperatorMatrix,
    /// Orthonormal basis of the numerical kernel of `□`.
    pub harmonic_basis: Vec<FormSection>,
    /// Relative kernel threshold.
    pub rank_tol: f64,
    pub lambda_max: f64,
    /// Sorted eigenvalues: the full spectrum for spectral packages, the
    /// resolved low part for grid packages.
    pub spectrum: Vec<f64>,
    solver: Solver,
}

pub fn build_hodge(space: &FormSpace) -> Result<HodgePackage> {
    build_hodge_with(space, HodgeOptions::default())
}

pub fn build_hodge_with(space: &FormSpace, opts: HodgeOptions) -> Result<HodgePackage> {
    let laplacian = dbar_laplacian(space)?;
    let laplacian10 = d_laplacian(space)?;
    if space.fiber.is_spectral() {
        build_spectral(space, laplacian, laplacian10, opts)
    } else {
        build_grid(space, laplacian, laplacian10, opts)
    }
}

fn build_spectral(space: &FormSpace, lap: OperatorMatrix, lap10: OperatorMatrix, opts: HodgeOptions) -> Result<HodgePackage> {
    let sites = space.fiber.sites;
    let eig: Vec<(Vec<f64>, CMat)> = (0..sites).map(|s| herm_eig(&lap.block(s).expect("spectral blocks"))).collect();
    let mut spectrum: Vec<f64> = eig.iter().flat_map(|(v, _)| v.iter().copied()).collect();
    spectrum.sort_by(f64::total_cmp);
    let lambda_max = spectrum.last().copied().unwrap_or(0.0).max(0.0);
    let cut = opts.rank_tol * lambda_max;
    let comps = space.components();
    let mut harmonic_basis = Vec::new();
    for (s, (vals, vecs)) in eig.iter().enumerate() {
        for (i, &v) in vals.iter().enumerate() {
            if v <= cut {
                let mut h = space.zeros();
                for c in 0..comps {
                    h.coeffs[c * sites + s] = vecs[(c, i)];
                }
                harmonic_basis.push(h);
            }
        }
    }
    Ok(HodgePackage {
        space: space.clone(),
        laplacian: lap,
        laplacian10: lap10,
        harmonic_basis,
        rank_tol: opts.rank_tol,
        lambda_max,
        spectrum,
        solver: Solver::Spectral { eig },
    })
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn power_max(op: &OperatorMatrix, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..op.domain.dim()).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let mut est = 0.0;
    for _ in 0..400 {
        let nv = norm(&v);
        v.iter_mut().for_each(|z| *z /= nv);
        let w = op.apply_raw(&v);
        let new = norm(&w);
        let done = (new - est).abs() <= 1e-6 * new;
        est = new;
        v = w;
        if done {
            break;
        }
    }
    est
}

/// Grids up to this many unknowns are diagonalized densely.
const DENSE_LIMIT: usize = 600;

fn build_grid(space: &FormSpace, lap: OperatorMatrix, lap10: OperatorMatrix, opts: HodgeOptions) -> Result<HodgePackage> {
    let dim = space.dim();
    let (spectrum, vecs, lambda_max) = if dim <= DENSE_LIMIT {
        let (vals, v) = herm_eig(&crate::linalg::hermitian_part(&lap.to_dense()));
        let top = vals.last().copied().unwrap_or(0.0).max(0.0);
        (vals, v, top)
    } else {
        let lambda_max = power_max(&lap, opts.seed);
        let cut = opts.rank_tol * lambda_max;
        let derivs = space.fiber.grid_derivs().expect("grid backend");
        let sites = space.fiber.sites;
        let precond = |r: &[C64]| -> Vec<C64> {
            r.chunks(sites).flat_map(|comp| derivs.precondition(comp, opts.shift)).collect()
        };
        let mut want = opts.low_count.max(1).min(dim);
        loop {
            let (vals, v) = lobpcg(|x| lap.apply_raw(x), precond, dim, want, want + 4, opts.seed, 1e-8 * lambda_max)?;
            if vals.iter().any(|&l| l > cut) || want >= dim / 4 {
                let v = polish_kernel(&lap, &precond, &vals, v, cut, 1e-12 * lambda_max)?;
                break (vals, v, lambda_max);
            }
            want *= 2;
        }
    };
    let cut = opts.rank_tol * lambda_max;
    let scale = (space.fiber.sites as f64).sqrt();
    let harmonic_basis: Vec<FormSection> = (0..spectrum.len())
        .filter(|&i| spectrum[i] <= cut)
        .map(|i| FormSection { space: space.clone(), coeffs: vecs.column(i).iter().map(|z| z * scale).collect() })
        .collect();
    let solver = if dim <= DENSE_LIMIT {
        Solver::Dense { vals: spectrum.clone(), vecs }
    } else {
        Solver::Grid { shift: opts.shift }
    };
    Ok(HodgePackage {
        space: space.clone(),
        laplacian: lap,
        laplacian10: lap10,
        harmonic_basis,
        rank_tol: opts.rank_tol,
        lambda_max,
        spectrum,
        solver,
    })
}

/// Kernel vectors from LOBPCG carry a residual near `√(λ_max·ε)`; one step
/// `x ← x - □⁺□x` removes it, then the kernel block is re-orthonormalized.
fn polish_kernel(
    lap: &OperatorMatrix,
    precond: &impl Fn(&[C64]) -> Vec<C64>,
    vals: &[f64],
    vecs: CMat,
    cut: f64,
    floor: f64,
) -> Result<CMat> {
    let k = vals.iter().filter(|&&v| v <= cut).count();
    if k == 0 {
        return Ok(vecs);
    }
    let kernel = columns(&vecs.columns(0, k).into_owned());
    let mut fixed = Vec::with_capacity(k);
    for x in &kernel {
        let c = projected_pcg(|v| lap.apply_raw(v), precond, &kernel, &lap.apply_raw(x), floor)?;
        fixed.push(x.iter().zip(&c).map(|(a, b)| a - b).collect::<Vec<_>>());
    }
    let q = crate::linalg::orthonormal_columns(&from_columns(vecs.nrows(), &fixed), 1e-8);
    if q.ncols() < k {
        return Err(Error::EigenFailure("kernel polishing lost rank".into()));
    }
    let mut out = vecs;
    out.columns_mut(0, k).copy_from(&q);
    Ok(out)
}

fn columns(m: &CMat) -> Vec<Vec<C64>> {
    (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect()
}

fn from_columns(dim: usize, cols: &[Vec<C64>]) -> CMat {
    CMat::from_fn(dim, cols.len(), |i, j| cols[j][i])
}

/// Rayleigh-Ritz on the span of `s` after SVQB orthonormalization. Returns
/// the lowest `keep` Ritz values, vectors and their images.
fn rayleigh_ritz(s: &CMat, as_: &CMat, keep: usize) -> Result<(Vec<f64>, CMat, CMat)> {
    let mut s = s.clone();
    let mut as_ = as_.clone();
    for j in 0..s.ncols() {
        let nj = s.column(j).norm();
        if nj > 0.0 {
            s.column_mut(j).unscale_mut(nj);
            as_.column_mut(j).unscale_mut(nj);
        }
    }
    let (s, as_) = (&s, &as_);
    let gram = s.adjoint() * s;
    let (gv, gw) = herm_eig(&crate::linalg::hermitian_part(&gram));
    let top = gv.last().copied().unwrap_or(0.0);
    let kept: Vec<usize> = (0..gv.len()).filter(|&i| gv[i] > 1e-13 * top).collect();
    if kept.len() < keep {
        return Err(Error::EigenFailure("search space collapsed".into()));
    }
    let t = CMat::from_fn(gv.len(), kept.len(), |i, j| gw[(i, kept[j])] / gv[kept[j]].sqrt());
    let q = s * &t;
    let aq = as_ * &t;
    let h = crate::linalg::hermitian_part(&(q.adjoint() * &aq));
    let (theta, c) = herm_eig(&h);
    let c = c.columns(0, keep).into_owned();
    Ok((theta[..keep].to_vec(), &q * &c, &aq * &c))
}

/// Lowest `want` eigenpairs of a Hermitian positive semidefinite operator by
/// preconditioned LOBPCG with block size `block`, stopped once every wanted
/// residual is below `tol`. Eigenvectors are unit vectors in the Euclidean
/// norm.
fn lobpcg(
    apply: impl Fn(&[C64]) -> Vec<C64>,
    precond: impl Fn(&[C64]) -> Vec<C64>,
    dim: usize,
    want: usize,
    block: usize,
    seed: u64,
    tol: f64,
) -> Result<(Vec<f64>, CMat)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = CMat::from_fn(dim, block, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let ax0 = from_columns(dim, &columns(&x0).iter().map(|c| apply(c)).collect::<Vec<_>>());
    let (mut theta, mut x, mut ax) = rayleigh_ritz(&x0, &ax0, block)?;
    let mut p: Option<(CMat, CMat)> = None;
    for it in 0..3000 {
        let mut r = ax.clone();
        for j in 0..block {
            let xj = x.column(j) * C64::from(theta[j]);
            let mut col = r.column_mut(j);
            col -= xj;
        }
        let converged = (0..want).all(|j| r.column(j).norm() <= tol);
        if it % 25 == 24 && !converged {
            // the implicit updates of AX and AP drift; refresh them
            ax = from_columns(dim, &columns(&x).iter().map(|c| apply(c)).collect::<Vec<_>>());
            p = None;
            let (nt, nx, nax) = rayleigh_ritz(&x, &ax, block)?;
            theta = nt;
            x = nx;
            ax = nax;
            continue;
        }
        if converged {
            return Ok((theta[..want].to_vec(), x.columns(0, want).into_owned()));
        }
        let w = from_columns(dim, &columns(&r).iter().map(|c| precond(c)).collect::<Vec<_>>());
        let w = &w - &x * (x.adjoint() * &w);
        let aw = from_columns(dim, &columns(&w).iter().map(|c| apply(c)).collect::<Vec<_>>());
        let (s, as_) = match &p {
            Some((pp, ap)) => {
                let mut s = CMat::zeros(dim, 3 * block);
                let mut a = CMat::zeros(dim, 3 * block);
                s.columns_mut(0, block).copy_from(&x);
                s.columns_mut(block, block).copy_from(&w);
                s.columns_mut(2 * block, block).copy_from(pp);
                a.columns_mut(0, block).copy_from(&ax);
                a.columns_mut(block, block).copy_from(&aw);
                a.columns_mut(2 * block, block).copy_from(ap);
                (s, a)
            }
            None => {
                let mut s = CMat::zeros(dim, 2 * block);
                let mut a = CMat::zeros(dim, 2 * block);
                s.columns_mut(0, block).copy_from(&x);
                s.columns_mut(block, block).copy_from(&w);
                a.columns_mut(0, block).copy_from(&ax);
                a.columns_mut(block, block).copy_from(&aw);
                (s, a)
            }
        };
        let (nt, nx, nax) = rayleigh_ritz(&s, &as_, block)?;
        let overlap = x.adjoint() * &nx;
        let pp = &nx - &x * &overlap;
        let ap = &nax - &ax * &overlap;
        p = Some((pp, ap));
        theta = nt;
        x = nx;
        ax = nax;
    }
    Err(Error::EigenFailure("LOBPCG did not converge".into()))
}

/// Preconditioned conjugate gradients for `A x = b` on the orthogonal
/// complement of the span of `kernel` (Euclidean unit vectors). Stops at a
/// relative residual of 1e-13 or on stagnation; succeeds if the best
/// residual is within `max(1e-10‖b‖, floor)`.
fn projected_pcg(
    apply: impl Fn(&[C64]) -> Vec<C64>,
    precond: impl Fn(&[C64]) -> Vec<C64>,
    kernel: &[Vec<C64>],
    b: &[C64],
    floor: f64,
) -> Result<Vec<C64>> {
    let project = |v: &mut Vec<C64>| {
        for k in kernel {
            let c = dot(k, v);
            v.iter_mut().zip(k).for_each(|(z, h)| *z -= c * h);
        }
    };
    let mut x = vec![ZERO; b.len()];
    let mut r = b.to_vec();
    project(&mut r);
    let bn = norm(&r);
    if bn == 0.0 {
        return Ok(x);
    }
    let mut z = precond(&r);
    project(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z).re;
    let (mut best, mut best_x, mut since) = (f64::INFINITY, x.clone(), 0);
    for _ in 0..20000 {
        let ap = apply(&p);
        let alpha = rz / dot(&p, &ap).re;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += pi * alpha);
        r.iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= api * alpha);
        let rn = norm(&r);
        if rn < best {
            best = rn;
            best_x.copy_from_slice(&x);
            since = 0;
        } else {
            since += 1;
        }
        if rn <= 1e-13 * bn || since > 50 {
            break;
        }
        z = precond(&r);
        project(&mut z);
        let rz_new = dot(&r, &z).re;
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + *pi * beta);
    }
    if best <= (1e-10 * bn).max(floor) {
        project(&mut best_x);
        return Ok(best_x);
    }
    Err(Error::EigenFailure(format!("Green solve stalled at relative residual {:.1e}", best / bn)))
}

impl HodgePackage {
    pub fn harmonic_dim(&self) -> usize {
        self.harmonic_basis.len()
    }

    /// Absolute kernel threshold.
    pub fn kernel_cut(&self) -> f64 {
        self.rank_tol * self.lambda_max
    }

    /// Orthogonal projection `℘` onto harmonic forms.
    pub fn harmonic_projection(&self, x: &FormSection) -> Result<FormSection> {
        same_space(&self.space, &x.space)?;
        let mut out = self.space.zeros();
        for h in &self.harmonic_basis {
            let c = x.inner_unchecked(h);
            out = out.axpy(c, h);
        }
        Ok(out)
    }

    /// Green operator `G`: inverse of `□` on the complement of the kernel,
    /// zero on the kernel.
    pub fn green(&self, x: &FormSection) -> Result<FormSection> {
        same_space(&self.space, &x.space)?;
        let cut = self.kernel_cut();
        match &self.solver {
            Solver::Spectral { eig } => {
                let sites = self.space.fiber.sites;
                let comps = self.space.components();
                let mut out = self.space.zeros();
                for (s, (vals, vecs)) in eig.iter().enumerate() {
                    for (i, &v) in vals.iter().enumerate() {
                        if v <= cut {
                            continue;
                        }
                        let mut c = ZERO;
                        for k in 0..comps {
                            c += vecs[(k, i)].conj() * x.coeffs[k * sites + s];
                        }
                        c /= v;
                        for k in 0..comps {
                            out.coeffs[k * sites + s] += vecs[(k, i)] * c;
                        }
                    }
                }
                Ok(out)
            }
            Solver::Dense { vals, vecs } => {
                let xv = CMat::from_column_slice(x.coeffs.len(), 1, &x.coeffs);
                let mut c = vecs.adjoint() * xv;
                for (i, &v) in vals.iter().enumerate() {
                    c[(i, 0)] = if v <= cut { ZERO } else { c[(i, 0)] / v };
                }
                let out = vecs * c;
                Ok(FormSection { space: self.space.clone(), coeffs: out.iter().copied().collect() })
            }
            Solver::Grid { shift } => {
                let derivs = self.space.fiber.grid_derivs().expect("grid backend");
                let sites = self.space.fiber.sites;
                let scale = 1.0 / (sites as f64).sqrt();
                let kernel: Vec<Vec<C64>> =
                    self.harmonic_basis.iter().map(|h| h.coeffs.iter().map(|z| z * scale).collect()).collect();
                let precond = |r: &[C64]| -> Vec<C64> {
                    r.chunks(sites).flat_map(|comp| derivs.precondition(comp, *shift)).collect()
                };
                let sol = projected_pcg(|v| self.laplacian.apply_raw(v), precond, &kernel, &x.coeffs, 0.0)?;
                Ok(FormSection { space: self.space.clone(), coeffs: sol })
            }
        }
    }

    /// `λ¹`: the smallest eigenvalue above the kernel cut.
    pub fn smallest_positive_eigenvalue(&self) -> Result<f64> {
        let cut = self.kernel_cut();
        self.spectrum.iter().copied().find(|&v| v > cut).ok_or(Error::EmptySpectrum)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.first().copied().unwrap_or(0.0)
    }
}

/// Minimal `L²` solution `u₀ = ∂̄*Gα` of `∂̄u = α`. `pkg` is the package
/// of `α`'s bidegree.
pub fn minimal_solution(pkg: &HodgePackage, alpha: &FormSection) -> Result<FormSection> {
    minimal_solution_tol(pkg, alpha, 1e-8)
}

pub fn minimal_solution_tol(pkg: &HodgePackage, alpha: &FormSection, tol: f64) -> Result<FormSection> {
    same_space(&pkg.space, &alpha.space)?;
    let (p, q) = alpha.bidegree();
    let n = alpha.space.fiber.n();
    if q == 0 {
        return Err(Error::BidegreeUnderflow("minimal solutions need q >= 1".into()));
    }
    let an = alpha.norm();
    if an == 0.0 {
        return Ok(alpha.space.at(p, q - 1)?.zeros());
    }
    if q < n {
        let closed = assemble_dbar(&alpha.space)?.apply(alpha)?.norm() / an;
        if closed > tol {
            return Err(Error::NotClosed(closed));
        }
    }
    let harm = pkg.harmonic_projection(alpha)?.norm() / an;
    if harm > tol {
        return Err(Error::NotCoexact(harm));
    }
    let dbar = assemble_dbar(&alpha.space.at(p, q - 1)?)?;
    dbar.adjoint().apply(&pkg.green(alpha)?)
}

/// `P f = f - ∂̄*G∂̄f` for `(n,0)`-forms; `pkg_n1` is the `(n,1)` package.
pub fn bergman_project(pkg_n1: &HodgePackage, f: &FormSection) -> Result<FormSection> {
    let n = f.space.fiber.n();
    if f.bidegree() != (n, 0) || pkg_n1.space.bidegree() != (n, 1) {
        return Err(Error::InvalidArgument("Bergman projection acts on (n,0)-forms".into()));
    }
    let dbar = assemble_dbar(&f.space)?;
    let g = pkg_n1.green(&dbar.apply(f)?)?;
    f.sub(&dbar.adjoint().apply(&g)?)
}

pub fn neumann_project(pkg_n1: &HodgePackage, f: &FormSection) -> Result<FormSection> {
    f.sub(&bergman_project(pkg_n1, f)?)
}

/// Packages for every bidegree of a fiber, built on first use.
#[derive(Debug)]
pub struct HodgeSystem {
    pub fiber: Arc<Fiber>,
    pub opts: HodgeOptions,
    cells: Vec<OnceLock<Arc<HodgePackage>>>,
}

impl HodgeSystem {
    pub fn new(fiber: Arc<Fiber>, opts: HodgeOptions) -> Self {
        let n = fiber.n();
        let cells = (0..(n + 1) * (n + 1)).map(|_| OnceLock::new()).collect();
        HodgeSystem { fiber, opts, cells }
    }

    pub fn package(&self, p: usize, q: usize) -> Result<Arc<HodgePackage>> {
        let n = self.fiber.n();
        if p > n || q > n {
            return Err(Error::BidegreeOverflow(p, q));
        }
        let cell = &self.cells[p * (n + 1) + q];
        if let Some(pkg) = cell.get() {
            return Ok(pkg.clone());
        }
        let built = Arc::new(build_hodge_with(&self.fiber.space(p, q)?, self.opts)?);
        let _ = cell.set(built);
        Ok(cell.get().expect("just set").clone())
    }

    pub fn space(&self, p: usize, q: usize) -> Result<FormSpace> {
        self.fiber.space(p, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::space::Disc;
    use crate::torus::{BundleData, LatticeTorus};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn curve(t: C64) -> LatticeTorus {
        LatticeTorus::new(1, CMat::from_element(1, 1, t)).unwrap()
    }

    fn trivial_curve() -> Arc<Fiber> {
        let torus = curve(c(0.2, 1.3));
        let bundle = BundleData::flat(&torus, &[0.0, 0.0]).unwrap();
        Fiber::new(torus, bundle, Disc::Spectral { m: 3 }).unwrap()
    }

    fn positive_curve(d: u32, n: usize) -> Arc<Fiber> {
        let torus = curve(c(0.2, 1.3));
        let bundle = BundleData::positive(&torus, d, None).unwrap();
        Fiber::new(torus, bundle, Disc::Grid { n }).unwrap()
    }

    #[test]
    fn trivial_bundle_has_one_harmonic_form_per_bidegree() {
        let sys = HodgeSystem::new(trivial_curve(), HodgeOptions::default());
        for (p, q) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let pkg = sys.package(p, q).unwrap();
            assert_eq!(pkg.harmonic_dim(), 1, "({p},{q})");
            assert!(pkg.min_eigenvalue().abs() < 1e-12);
        }
        assert!(matches!(sys.package(2, 0), Err(Error::BidegreeOverflow(2, 0))));
    }

    #[test]
    fn nontrivial_character_has_no_kernel() {
        let torus = curve(c(0.0, 1.0));
        let bundle = BundleData::flat(&torus, &[0.5, 0.0]).unwrap();
        let fiber = Fiber::new(torus, bundle, Disc::Spectral { m: 2 }).unwrap();
        let pkg = build_hodge(&fiber.space(0, 0).unwrap()).unwrap();
        assert_eq!(pkg.harmonic_dim(), 0);
        // |k + 1/2|² at k = 0 on the square torus, in the 2π² normalization
        let want = 2.0 * std::f64::consts::PI.powi(2) * 0.25;
        assert!((pkg.smallest_positive_eigenvalue().unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn positive_bundle_kernels() {
        for d in 1..=3 {
            let sys = HodgeSystem::new(positive_curve(d, 16), HodgeOptions::default());
            assert_eq!(sys.package(1, 0).unwrap().harmonic_dim(), d as usize);
            // index zero forces d kernel vectors on (1,1) as well; they live
            // at the edge of the frequency window
            assert_eq!(sys.package(1, 1).unwrap().harmonic_dim(), d as usize);
        }
        let sys = HodgeSystem::new(positive_curve(1, 32), HodgeOptions::default());
        let pkg = sys.package(1, 1).unwrap();
        let u = FormSection::random(&pkg.space, &mut ChaCha8Rng::seed_from_u64(7));
        assert!(pkg.harmonic_projection(&u).unwrap().norm() <= 1e-12 * u.norm());
    }

    #[test]
    fn minimal_solution_error_paths() {
        let fiber = trivial_curve();
        let sys = HodgeSystem::new(fiber.clone(), HodgeOptions::default());
        let pkg00 = sys.package(0, 0).unwrap();
        let u = pkg00.space.zeros();
        assert!(matches!(minimal_solution(&pkg00, &u), Err(Error::BidegreeUnderflow(_))));
        // a constant (0,1)-form is harmonic, so ∂̄u = α has no solution
        let pkg01 = sys.package(0, 1).unwrap();
        let h = pkg01.harmonic_basis[0].clone();
        assert!(matches!(minimal_solution(&pkg01, &h), Err(Error::NotCoexact(_))));
        assert_eq!(minimal_solution(&pkg01, &pkg01.space.zeros()).unwrap().norm(), 0.0);
        assert!(minimal_solution(&pkg00, &pkg01.space.zeros()).is_err());
    }

    #[test]
    fn minimal_solution_rejects_non_closed_forms() {
        let period = CMat::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        let torus = LatticeTorus::new(2, period).unwrap();
        let bundle = BundleData::flat(&torus, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let fiber = Fiber::new(torus, bundle, Disc::Spectral { m: 1 }).unwrap();
        let pkg = build_hodge(&fiber.space(0, 1).unwrap()).unwrap();
        let alpha = FormSection::random(&pkg.space, &mut ChaCha8Rng::seed_from_u64(5));
        assert!(matches!(minimal_solution(&pkg, &alpha), Err(Error::NotClosed(_))));
    }

    #[test]
    fn bergman_projection_needs_top_degree() {
        let sys = HodgeSystem::new(trivial_curve(), HodgeOptions::default());
        let pkg = sys.package(1, 1).unwrap();
        let f = sys.space(0, 0).unwrap().zeros();
        assert!(matches!(bergman_project(&pkg, &f), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn grid_green_operator_inverts_the_laplacian() {
        let sys = HodgeSystem::new(positive_curve(2, 16), HodgeOptions::default());
        let pkg = sys.package(1, 0).unwrap();
        let u = FormSection::random(&pkg.space, &mut ChaCha8Rng::seed_from_u64(6));
        let rebuilt = pkg.harmonic_projection(&u).unwrap().add(&pkg.laplacian.apply(&pkg.green(&u).unwrap()).unwrap()).unwrap();
        assert!(rebuilt.sub(&u).unwrap().norm() <= 1e-9 * u.norm());
        assert!(pkg.harmonic_projection(&pkg.green(&u).unwrap()).unwrap().norm() <= 1e-9 * u.norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn bergman_projection_is_an_orthogonal_projection(seed in any::<u64>()) {
            let sys = HodgeSystem::new(positive_curve(1, 12), HodgeOptions::default());
            let pkg = sys.package(1, 1).unwrap();
            let space = sys.space(1, 0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = FormSection::random(&space, &mut rng);
            let g = FormSection::random(&space, &mut rng);
            let pf = bergman_project(&pkg, &f).unwrap();
            let twice = bergman_project(&pkg, &pf).unwrap();
            prop_assert!(twice.sub(&pf).unwrap().norm() <= 1e-8 * f.norm());
            let nf = neumann_project(&pkg, &f).unwrap();
            prop_assert!(nf.add(&pf).unwrap().sub(&f).unwrap().norm() <= 1e-12 * f.norm());
            let pg = bergman_project(&pkg, &g).unwrap();
            let sym = pf.inner(&g).unwrap() - f.inner(&pg).unwrap();
            prop_assert!(sym.norm() <= 1e-8 * f.norm() * g.norm());
        }
    }
}
