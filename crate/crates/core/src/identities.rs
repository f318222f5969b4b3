//! Residuals of the operator identities and of the Hodge decomposition on
//! one fiber, evaluated on seeded random smooth sections.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::hodge::{minimal_solution, HodgeSystem};
use crate::linalg::{C64, I};
use crate::operator::{
    assemble_dbar, assemble_nabla10, curvature_commutator, d_laplacian, dbar_laplacian, lefschetz_l, lefschetz_lambda,
};
use crate::oracle::exact_flat_spectrum;
use crate::space::{Fiber, FormSection, FormSpace};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub bidegree: (usize, usize),
    /// `‖lhs - rhs‖ / ‖u‖` for a random smooth operand `u`.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelCount {
    pub bidegree: (usize, usize),
    pub numerical: usize,
    /// Closed-form count, for flat bundles on the spectral backend.
    pub expected: Option<usize>,
    /// Largest eigenvalue mismatch against the closed-form spectrum.
    pub spectrum_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub residuals: Vec<IdentityResidual>,
    pub kernels: Vec<KernelCount>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityTolerances {
    pub operator: f64,
    pub hodge: f64,
    pub minimal_solution: f64,
}

impl Default for IdentityTolerances {
    fn default() -> Self {
        IdentityTolerances { operator: 1e-10, hodge: 1e-9, minimal_solution: 1e-8 }
    }
}

fn entry(name: &'static str, u: &FormSection, diff: &FormSection, tolerance: f64) -> IdentityResidual {
    let scale = u.norm();
    let residual = if scale > 0.0 { diff.norm() / scale } else { diff.norm() };
    IdentityResidual { name, bidegree: u.bidegree(), residual, tolerance, pass: residual <= tolerance }
}

fn operator_identities(space: &FormSpace, u: &FormSection, tol: f64) -> Result<Vec<IdentityResidual>> {
    let (p, q) = space.bidegree();
    let n = space.fiber.n();
    let mut out = Vec::new();
    if q + 2 <= n {
        let d1 = assemble_dbar(space)?;
        let d2 = assemble_dbar(&d1.codomain)?;
        out.push(entry("dbar_squared", u, &d2.apply(&d1.apply(u)?)?, tol));
    }
    if p + 2 <= n && space.fiber.bundle.is_flat() {
        let d1 = assemble_nabla10(space)?;
        let d2 = assemble_nabla10(&d1.codomain)?;
        out.push(entry("nabla10_squared", u, &d2.apply(&d1.apply(u)?)?, tol));
    }
    // [Λ, ∂̄] = -i ∇^{1,0*} and [Λ, ∇^{1,0}] = i ∂̄*
    if p >= 1 && q + 1 <= n {
        let dbar = assemble_dbar(space)?;
        let lam_after = lefschetz_lambda(&dbar.codomain)?;
        let mut lhs = lam_after.apply(&dbar.apply(u)?)?;
        if q >= 1 {
            let lam = lefschetz_lambda(space)?;
            lhs = lhs.sub(&assemble_dbar(&lam.codomain)?.apply(&lam.apply(u)?)?)?;
        }
        let nabla_star = assemble_nabla10(&space.at(p - 1, q)?)?.adjoint();
        let rhs = nabla_star.apply(u)?.scale(-I);
        out.push(entry("kaehler_lambda_dbar", u, &lhs.sub(&rhs)?, tol));
    }
    if q >= 1 && p + 1 <= n {
        let nabla = assemble_nabla10(space)?;
        let lam_after = lefschetz_lambda(&nabla.codomain)?;
        let mut lhs = lam_after.apply(&nabla.apply(u)?)?;
        if p >= 1 {
            let lam = lefschetz_lambda(space)?;
            lhs = lhs.sub(&assemble_nabla10(&lam.codomain)?.apply(&lam.apply(u)?)?)?;
        }
        let dbar_star = assemble_dbar(&space.at(p, q - 1)?)?.adjoint();
        let rhs = dbar_star.apply(u)?.scale(I);
        out.push(entry("kaehler_lambda_nabla", u, &lhs.sub(&rhs)?, tol));
    }
    // □'' - □' = [iΘ, Λ]
    let bk = dbar_laplacian(space)?.sub(&d_laplacian(space)?)?.sub(&curvature_commutator(space)?)?;
    out.push(entry("bochner_kodaira", u, &bk.apply(u)?, tol));
    // [L, Λ] = (p + q - n) on (p,q)-forms
    let mut comm = u.scale(C64::from(n as f64 - (p + q) as f64));
    if p + 1 <= n && q + 1 <= n {
        let l = lefschetz_l(space)?;
        comm = comm.sub(&lefschetz_lambda(&l.codomain)?.apply(&l.apply(u)?)?)?;
    }
    if p >= 1 && q >= 1 {
        let lam = lefschetz_lambda(space)?;
        comm = comm.add(&lefschetz_l(&lam.codomain)?.apply(&lam.apply(u)?)?)?;
    }
    out.push(entry("lefschetz_commutator", u, &comm, tol));
    Ok(out)
}

/// All identity residuals on every bidegree of `fiber`, plus kernel
/// dimensions (checked against the closed form for flat spectral fibers).
pub fn run_identity_suite(
    fiber: &Arc<Fiber>,
    hodge: &HodgeSystem,
    tol: IdentityTolerances,
    seed: u64,
) -> Result<IdentityReport> {
    let n = fiber.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residuals = Vec::new();
    let mut kernels = Vec::new();
    for p in 0..=n {
        for q in 0..=n {
            let space = fiber.space(p, q)?;
            let u = FormSection::random(&space, &mut rng);
            residuals.extend(operator_identities(&space, &u, tol.operator)?);

            let pkg = hodge.package(p, q)?;
            let box_g = pkg.laplacian.apply(&pkg.green(&u)?)?;
            let rebuilt = pkg.harmonic_projection(&u)?.add(&box_g)?;
            residuals.push(entry("hodge_decomposition", &u, &rebuilt.sub(&u)?, tol.hodge));

            if q + 1 <= n {
                // α = ∂̄v is exact; the minimal solution has ‖u₀‖² = ⟨Gα, α⟩
                let alpha = assemble_dbar(&space)?.apply(&u)?;
                let target = hodge.package(p, q + 1)?;
                let u0 = minimal_solution(&target, &alpha)?;
                let expect = target.green(&alpha)?.inner(&alpha)?.re;
                let got = u0.norm().powi(2);
                let rel = if expect > 0.0 { (got - expect).abs() / expect } else { got };
                residuals.push(IdentityResidual {
                    name: "minimal_solution_norm",
                    bidegree: (p, q + 1),
                    residual: rel,
                    tolerance: tol.minimal_solution,
                    pass: rel <= tol.minimal_solution,
                });
            }

            let (expected, spectrum_error) = match (fiber.bundle.character(), fiber.mode_cutoff()) {
                (Some(chi), Some(m)) => {
                    let exact = exact_flat_spectrum(&fiber.torus, chi, (p, q), m)?;
                    let cut = pkg.kernel_cut();
                    let err = exact.iter().zip(&pkg.spectrum).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    let scale = pkg.lambda_max.max(1.0);
                    (Some(exact.iter().filter(|&&v| v <= cut).count()), Some(err / scale))
                }
                _ => (None, None),
            };
            kernels.push(KernelCount { bidegree: (p, q), numerical: pkg.harmonic_dim(), expected, spectrum_error });
        }
    }
    let pass = residuals.iter().all(|r| r.pass)
        && kernels.iter().all(|k| {
            k.expected.is_none_or(|e| e == k.numerical) && k.spectrum_error.is_none_or(|e| e <= tol.operator)
        });
    Ok(IdentityReport { residuals, kernels, pass })
}
