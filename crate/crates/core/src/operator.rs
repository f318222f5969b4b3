//! Assembled linear operators between form spaces and the first-order
//! operators of the twisted Dolbeault complex.
//!
//! Spectral operators are stored as one small block per Fourier mode. Grid
//! operators are kept matrix-free as sums of products of atoms: constant or
//! site-dependent pointwise maps and `m ⊗ D` with `D` a frame derivative.
//! Form bases are orthonormal and both sides of an operator share the same
//! integration weight, so the L² adjoint is the conjugate transpose.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::GridDerivs;
use crate::linalg::{inverse, op_norm, CMat, C64, I, ONE, ZERO};
use crate::space::{same_space, FormSection, FormSpace};

/// Which frame derivative a piece of an operator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    Dbar,
    D,
}

#[derive(Debug, Clone)]
pub enum Atom {
    /// The same `rows × cols` map at every site.
    Const(CMat),
    /// Row-major `rows × cols` block per site.
    Varying { rows: usize, cols: usize, data: Arc<Vec<C64>> },
    /// `m ⊗ D`: the frame derivative of every component, then `m`.
    Deriv(CMat, Deriv),
}

impl Atom {
    fn shape(&self) -> (usize, usize) {
        match self {
            Atom::Const(m) | Atom::Deriv(m, _) => (m.nrows(), m.ncols()),
            Atom::Varying { rows, cols, .. } => (*rows, *cols),
        }
    }

    fn adjoint(&self) -> Atom {
        match self {
            Atom::Const(m) => Atom::Const(m.adjoint()),
            Atom::Varying { rows, cols, data } => {
                let (rows, cols) = (*rows, *cols);
                let mut out = vec![ZERO; data.len()];
                for (src, dst) in data.chunks(rows * cols).zip(out.chunks_mut(rows * cols)) {
                    for r in 0..rows {
                        for c in 0..cols {
                            dst[c * rows + r] = src[r * cols + c].conj();
                        }
                    }
                }
                Atom::Varying { rows: cols, cols: rows, data: Arc::new(out) }
            }
            // D_E = -D_Ē^† by construction
            Atom::Deriv(m, Deriv::Dbar) => Atom::Deriv(-m.adjoint(), Deriv::D),
            Atom::Deriv(m, Deriv::D) => Atom::Deriv(-m.adjoint(), Deriv::Dbar),
        }
    }

    fn apply(&self, x: &[C64], sites: usize, derivs: &GridDerivs) -> Vec<C64> {
        let (rows, cols) = self.shape();
        let mut out = vec![ZERO; rows * sites];
        match self {
            Atom::Const(m) => mix(m, x, &mut out, sites),
            Atom::Deriv(m, which) => {
                let mut dx = vec![ZERO; cols * sites];
                for c in 0..cols {
                    if (0..rows).all(|r| m[(r, c)] == ZERO) {
                        continue;
                    }
                    let src = &x[c * sites..(c + 1) * sites];
                    let v = match which {
                        Deriv::Dbar => derivs.dbar(src),
                        Deriv::D => derivs.d(src),
                    };
                    dx[c * sites..(c + 1) * sites].copy_from_slice(&v);
                }
                mix(m, &dx, &mut out, sites);
            }
            Atom::Varying { data, .. } => {
                for s in 0..sites {
                    let b = &data[s * rows * cols..(s + 1) * rows * cols];
                    for r in 0..rows {
                        let mut acc = ZERO;
                        for c in 0..cols {
                            acc += b[r * cols + c] * x[c * sites + s];
                        }
                        out[r * sites + s] = acc;
                    }
                }
            }
        }
        out
    }
}

fn mix(m: &CMat, x: &[C64], out: &mut [C64], sites: usize) {
    for r in 0..m.nrows() {
        let dst = &mut out[r * sites..(r + 1) * sites];
        for c in 0..m.ncols() {
            let a = m[(r, c)];
            if a == ZERO {
                continue;
            }
            for (o, v) in dst.iter_mut().zip(&x[c * sites..(c + 1) * sites]) {
                *o += a * v;
            }
        }
    }
}

/// Merge `second ∘ first` when one side is a constant map.
fn fuse(first: &Atom, second: &Atom) -> Option<Atom> {
    match (first, second) {
        (Atom::Const(a), Atom::Const(b)) => Some(Atom::Const(b * a)),
        (Atom::Deriv(a, w), Atom::Const(b)) => Some(Atom::Deriv(b * a, *w)),
        (Atom::Const(a), Atom::Deriv(b, w)) => Some(Atom::Deriv(b * a, *w)),
        _ => None,
    }
}

/// `Σ c_i · (A_{i,k} ∘ … ∘ A_{i,1})`, atoms listed in application order.
#[derive(Debug, Clone, Default)]
pub struct GridExpr {
    pub terms: Vec<(C64, Vec<Atom>)>,
}

#[derive(Debug, Clone)]
pub enum OpData {
    /// Row-major `rows × cols` block per mode.
    Blocks { rows: usize, cols: usize, data: Vec<C64> },
    Grid(GridExpr),
}

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub domain: FormSpace,
    pub codomain: FormSpace,
    pub data: OpData,
}

impl OperatorMatrix {
    pub fn shape(&self) -> (usize, usize) {
        (self.codomain.dim(), self.domain.dim())
    }

    fn grid_atom(domain: &FormSpace, codomain: &FormSpace, atom: Atom) -> Self {
        OperatorMatrix {
            domain: domain.clone(),
            codomain: codomain.clone(),
            data: OpData::Grid(GridExpr { terms: vec![(ONE, vec![atom])] }),
        }
    }

    /// Zero operator.
    pub fn zero(domain: &FormSpace, codomain: &FormSpace) -> Self {
        let data = if domain.fiber.is_spectral() {
            let (rows, cols) = (codomain.components(), domain.components());
            OpData::Blocks { rows, cols, data: vec![ZERO; rows * cols * domain.fiber.sites] }
        } else {
            OpData::Grid(GridExpr::default())
        };
        OperatorMatrix { domain: domain.clone(), codomain: codomain.clone(), data }
    }

    /// The same pointwise map at every site.
    pub fn pointwise(domain: &FormSpace, codomain: &FormSpace, m: &CMat) -> Self {
        Self::from_pieces(domain, codomain, &[(m.clone(), None)])
    }

    /// `Σ m_i ⊗ D_i` where each `D_i` is a frame derivative
    /// `(Deriv, direction)` or the identity.
    pub fn from_pieces(domain: &FormSpace, codomain: &FormSpace, pieces: &[(CMat, Option<(Deriv, usize)>)]) -> Self {
        let fiber = &domain.fiber;
        let sites = fiber.sites;
        let (rows, cols) = (codomain.components(), domain.components());
        if let (Some(dbar), Some(d)) = (fiber.dbar_symbols(), fiber.d_symbols()) {
            let mut data = vec![ZERO; rows * cols * sites];
            for (s, block) in data.chunks_mut(rows * cols).enumerate() {
                for (m, which) in pieces {
                    let factor = match which {
                        None => ONE,
                        Some((Deriv::Dbar, b)) => dbar[s][*b],
                        Some((Deriv::D, a)) => d[s][*a],
                    };
                    if factor == ZERO {
                        continue;
                    }
                    for r in 0..rows {
                        for c in 0..cols {
                            block[r * cols + c] += m[(r, c)] * factor;
                        }
                    }
                }
            }
            return OperatorMatrix {
                domain: domain.clone(),
                codomain: codomain.clone(),
                data: OpData::Blocks { rows, cols, data },
            };
        }
        // the grid backend lives on elliptic curves: one direction only
        let mut constant = CMat::zeros(rows, cols);
        let mut dbar = CMat::zeros(rows, cols);
        let mut d = CMat::zeros(rows, cols);
        for (m, which) in pieces {
            match which {
                None => constant += m,
                Some((Deriv::Dbar, _)) => dbar += m,
                Some((Deriv::D, _)) => d += m,
            }
        }
        let mut terms = Vec::new();
        for (m, atom) in [
            (&constant, Atom::Const(constant.clone())),
            (&dbar, Atom::Deriv(dbar.clone(), Deriv::Dbar)),
            (&d, Atom::Deriv(d.clone(), Deriv::D)),
        ] {
            if m.iter().any(|z| *z != ZERO) {
                terms.push((ONE, vec![atom]));
            }
        }
        OperatorMatrix { domain: domain.clone(), codomain: codomain.clone(), data: OpData::Grid(GridExpr { terms }) }
    }

    /// Site-dependent pointwise map: `m(site)` at each point.
    pub(crate) fn pointwise_varying(domain: &FormSpace, codomain: &FormSpace, m: impl Fn(usize) -> CMat) -> Self {
        let sites = domain.fiber.sites;
        let (rows, cols) = (codomain.components(), domain.components());
        let mut data = Vec::with_capacity(rows * cols * sites);
        for s in 0..sites {
            let b = m(s);
            for r in 0..rows {
                for c in 0..cols {
                    data.push(b[(r, c)]);
                }
            }
        }
        if domain.fiber.is_spectral() {
            return OperatorMatrix {
                domain: domain.clone(),
                codomain: codomain.clone(),
                data: OpData::Blocks { rows, cols, data },
            };
        }
        Self::grid_atom(domain, codomain, Atom::Varying { rows, cols, data: Arc::new(data) })
    }

    /// Apply to a raw coefficient vector in the component-major layout.
    pub fn apply_raw(&self, x: &[C64]) -> Vec<C64> {
        let sites = self.domain.fiber.sites;
        match &self.data {
            OpData::Blocks { rows, cols, data } => {
                let (rows, cols) = (*rows, *cols);
                let mut out = vec![ZERO; rows * sites];
                for s in 0..sites {
                    let b = &data[s * rows * cols..(s + 1) * rows * cols];
                    for r in 0..rows {
                        let mut acc = ZERO;
                        for c in 0..cols {
                            acc += b[r * cols + c] * x[c * sites + s];
                        }
                        out[r * sites + s] = acc;
                    }
                }
                out
            }
            OpData::Grid(expr) => {
                let derivs = self.domain.fiber.grid_derivs().expect("grid backend");
                let mut out = vec![ZERO; self.codomain.dim()];
                for (coef, atoms) in &expr.terms {
                    let mut v = x.to_vec();
                    for atom in atoms {
                        v = atom.apply(&v, sites, derivs);
                    }
                    for (o, z) in out.iter_mut().zip(&v) {
                        *o += coef * z;
                    }
                }
                out
            }
        }
    }

    pub fn apply(&self, x: &FormSection) -> Result<FormSection> {
        same_space(&self.domain, &x.space)?;
        Ok(FormSection { space: self.codomain.clone(), coeffs: self.apply_raw(&x.coeffs) })
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        same_space(&self.domain, &other.codomain)?;
        let data = match (&self.data, &other.data) {
            (OpData::Blocks { rows: r1, cols: c1, data: a }, OpData::Blocks { cols: c2, data: b, .. }) => {
                let (r1, c1, c2) = (*r1, *c1, *c2);
                let sites = self.domain.fiber.sites;
                let mut out = vec![ZERO; r1 * c2 * sites];
                for s in 0..sites {
                    let (ba, bb) = (&a[s * r1 * c1..(s + 1) * r1 * c1], &b[s * c1 * c2..(s + 1) * c1 * c2]);
                    let o = &mut out[s * r1 * c2..(s + 1) * r1 * c2];
                    for i in 0..r1 {
                        for k in 0..c1 {
                            let v = ba[i * c1 + k];
                            if v == ZERO {
                                continue;
                            }
                            for j in 0..c2 {
                                o[i * c2 + j] += v * bb[k * c2 + j];
                            }
                        }
                    }
                }
                OpData::Blocks { rows: r1, cols: c2, data: out }
            }
            (OpData::Grid(a), OpData::Grid(b)) => {
                let mut terms = Vec::with_capacity(a.terms.len() * b.terms.len());
                for (cb, first) in &b.terms {
                    for (ca, second) in &a.terms {
                        let mut atoms = first.clone();
                        for atom in second {
                            match atoms.last().and_then(|last| fuse(last, atom)) {
                                Some(f) => *atoms.last_mut().expect("nonempty") = f,
                                None => atoms.push(atom.clone()),
                            }
                        }
                        terms.push((ca * cb, atoms));
                    }
                }
                OpData::Grid(GridExpr { terms })
            }
            _ => return Err(Error::ShapeMismatch("mixed operator storage".into())),
        };
        Ok(OperatorMatrix { domain: other.domain.clone(), codomain: self.codomain.clone(), data })
    }

    fn zip(&self, other: &OperatorMatrix, sign: f64) -> Result<OperatorMatrix> {
        same_space(&self.domain, &other.domain)?;
        same_space(&self.codomain, &other.codomain)?;
        let data = match (&self.data, &other.data) {
            (OpData::Blocks { rows, cols, data: a }, OpData::Blocks { data: b, .. }) => OpData::Blocks {
                rows: *rows,
                cols: *cols,
                data: a.iter().zip(b).map(|(x, y)| x + y * sign).collect(),
            },
            (OpData::Grid(a), OpData::Grid(b)) => {
                let mut terms = a.terms.clone();
                terms.extend(b.terms.iter().map(|(c, atoms)| (c * sign, atoms.clone())));
                OpData::Grid(GridExpr { terms })
            }
            _ => return Err(Error::ShapeMismatch("mixed operator storage".into())),
        };
        Ok(OperatorMatrix { domain: self.domain.clone(), codomain: self.codomain.clone(), data })
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.zip(other, 1.0)
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.zip(other, -1.0)
    }

    pub fn scale(&self, z: C64) -> OperatorMatrix {
        let data = match &self.data {
            OpData::Blocks { rows, cols, data } => {
                OpData::Blocks { rows: *rows, cols: *cols, data: data.iter().map(|x| x * z).collect() }
            }
            OpData::Grid(e) => {
                OpData::Grid(GridExpr { terms: e.terms.iter().map(|(c, a)| (c * z, a.clone())).collect() })
            }
        };
        OperatorMatrix { domain: self.domain.clone(), codomain: self.codomain.clone(), data }
    }

    /// L² adjoint (conjugate transpose in the orthonormal form bases).
    pub fn adjoint(&self) -> OperatorMatrix {
        let data = match &self.data {
            OpData::Blocks { rows, cols, data } => {
                let (rows, cols) = (*rows, *cols);
                let mut out = vec![ZERO; data.len()];
                for (src, dst) in data.chunks(rows * cols).zip(out.chunks_mut(rows * cols)) {
                    for r in 0..rows {
                        for c in 0..cols {
                            dst[c * rows + r] = src[r * cols + c].conj();
                        }
                    }
                }
                OpData::Blocks { rows: cols, cols: rows, data: out }
            }
            OpData::Grid(e) => OpData::Grid(GridExpr {
                terms: e.terms.iter().map(|(c, atoms)| (c.conj(), atoms.iter().rev().map(Atom::adjoint).collect())).collect(),
            }),
        };
        OperatorMatrix { domain: self.codomain.clone(), codomain: self.domain.clone(), data }
    }

    /// Block of one Fourier mode (spectral backend).
    pub fn block(&self, site: usize) -> Option<CMat> {
        match &self.data {
            OpData::Blocks { rows, cols, data } => {
                let b = &data[site * rows * cols..(site + 1) * rows * cols];
                Some(CMat::from_row_slice(*rows, *cols, b))
            }
            OpData::Grid(_) => None,
        }
    }

    /// Dense matrix in the component-major basis (small spaces only).
    pub fn to_dense(&self) -> CMat {
        let (r, c) = self.shape();
        let mut m = CMat::zeros(r, c);
        match &self.data {
            OpData::Blocks { rows, cols, data } => {
                let sites = self.domain.fiber.sites;
                for s in 0..sites {
                    for i in 0..*rows {
                        for j in 0..*cols {
                            m[(i * sites + s, j * sites + s)] = data[s * rows * cols + i * cols + j];
                        }
                    }
                }
            }
            OpData::Grid(_) => {
                let mut e = vec![ZERO; c];
                for j in 0..c {
                    e[j] = ONE;
                    for (i, v) in self.apply_raw(&e).into_iter().enumerate() {
                        m[(i, j)] = v;
                    }
                    e[j] = ZERO;
                }
            }
        }
        m
    }

    /// Operator 2-norm: exact per-mode maximum for spectral blocks, power
    /// iteration on `AᴴA` for grid operators.
    pub fn norm(&self) -> f64 {
        match &self.data {
            OpData::Blocks { rows, cols, data } => data
                .chunks((rows * cols).max(1))
                .map(|b| op_norm(&CMat::from_row_slice(*rows, *cols, b)))
                .fold(0.0, f64::max),
            OpData::Grid(e) => {
                if e.terms.is_empty() {
                    return 0.0;
                }
                let ah = self.adjoint();
                let mut rng = ChaCha8Rng::seed_from_u64(7);
                let mut v: Vec<C64> =
                    (0..self.domain.dim()).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
                let mut est = 0.0;
                for _ in 0..500 {
                    let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    if nv == 0.0 {
                        return 0.0;
                    }
                    v.iter_mut().for_each(|z| *z /= nv);
                    let w = ah.apply_raw(&self.apply_raw(&v));
                    let new = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    let done = (new - est).abs() <= 1e-8 * new;
                    est = new;
                    v = w;
                    if done {
                        break;
                    }
                }
                est.sqrt()
            }
        }
    }

    /// Matrix-market style text dump (coordinate format, 1-based).
    pub fn dump_matrix_market(&self) -> String {
        let d = self.to_dense();
        let mut entries = Vec::new();
        for j in 0..d.ncols() {
            for i in 0..d.nrows() {
                if d[(i, j)] != ZERO {
                    entries.push((i, j, d[(i, j)]));
                }
            }
        }
        let (r, c) = self.shape();
        let mut out = format!("%%MatrixMarket matrix coordinate complex general\n{r} {c} {}\n", entries.len());
        for (i, j, v) in entries {
            out.push_str(&format!("{} {} {:e} {:e}\n", i + 1, j + 1, v.re, v.im));
        }
        out
    }
}

/// Adjoint with respect to general Gram matrices:
/// `⟨A x, y⟩_cod = ⟨x, A† y⟩_dom` with `⟨u, v⟩_G = vᴴ G u`.
pub fn adjoint(op: &CMat, gram_domain: &CMat, gram_codomain: &CMat) -> Result<CMat> {
    if gram_domain.nrows() != op.ncols()
        || gram_domain.ncols() != op.ncols()
        || gram_codomain.nrows() != op.nrows()
        || gram_codomain.ncols() != op.nrows()
    {
        return Err(Error::ShapeMismatch("Gram matrices do not match the operator".into()));
    }
    Ok(inverse(gram_domain)? * op.adjoint() * gram_codomain)
}

/// `∂̄ : Ω^{p,q} → Ω^{p,q+1}`
pub fn assemble_dbar(space: &FormSpace) -> Result<OperatorMatrix> {
    let (p, q) = space.bidegree();
    let n = space.fiber.n();
    if q + 1 > n {
        return Err(Error::BidegreeOverflow(p, q + 1));
    }
    let target = space.at(p, q + 1)?;
    let ext = &space.fiber.ext;
    let pieces: Vec<_> = (0..n).map(|b| (ext.theta_bar(b, (p, q)), Some((Deriv::Dbar, b)))).collect();
    Ok(OperatorMatrix::from_pieces(space, &target, &pieces))
}

/// `∇^{1,0} : Ω^{p,q} → Ω^{p+1,q}`
pub fn assemble_nabla10(space: &FormSpace) -> Result<OperatorMatrix> {
    let (p, q) = space.bidegree();
    let n = space.fiber.n();
    if p + 1 > n {
        return Err(Error::BidegreeOverflow(p + 1, q));
    }
    let target = space.at(p + 1, q)?;
    let ext = &space.fiber.ext;
    let pieces: Vec<_> = (0..n).map(|a| (ext.theta(a, (p, q)), Some((Deriv::D, a)))).collect();
    Ok(OperatorMatrix::from_pieces(space, &target, &pieces))
}

pub fn lefschetz_l(space: &FormSpace) -> Result<OperatorMatrix> {
    let (p, q) = space.bidegree();
    let n = space.fiber.n();
    if p + 1 > n || q + 1 > n {
        return Err(Error::BidegreeOverflow(p + 1, q + 1));
    }
    let target = space.at(p + 1, q + 1)?;
    Ok(OperatorMatrix::pointwise(space, &target, &space.fiber.ext.lefschetz((p, q))))
}

pub fn lefschetz_lambda(space: &FormSpace) -> Result<OperatorMatrix> {
    let (p, q) = space.bidegree();
    if p == 0 || q == 0 {
        return Err(Error::BidegreeOverflow(p.wrapping_sub(1), q.wrapping_sub(1)));
    }
    let target = space.at(p - 1, q - 1)?;
    Ok(OperatorMatrix::pointwise(space, &target, &space.fiber.ext.lambda((p, q))))
}

/// Wedge by the curvature `Θ(h)` into `(p+1, q+1)`.
pub fn curvature_action(space: &FormSpace) -> Result<OperatorMatrix> {
    let (p, q) = space.bidegree();
    let fiber = &space.fiber;
    let n = fiber.n();
    if p + 1 > n || q + 1 > n {
        return Err(Error::BidegreeOverflow(p + 1, q + 1));
    }
    let target = space.at(p + 1, q + 1)?;
    if fiber.bundle.is_flat() {
        return Ok(OperatorMatrix::zero(space, &target));
    }
    let base = fiber.bundle.frame_curvature(&fiber.torus);
    let unit = fiber.ext.wedge_11(&CMat::identity(n, n), (p, q));
    let fixed = fiber.ext.wedge_11(&base, (p, q));
    let wc = fiber.grid_derivs().expect("grid backend").weight_curvature.clone();
    if wc.iter().all(|&v| v == 0.0) {
        return Ok(OperatorMatrix::pointwise(space, &target, &fixed));
    }
    Ok(OperatorMatrix::pointwise_varying(space, &target, |s| &fixed + unit.scale(wc[s])))
}

/// `[iΘ(h), Λ]` on `(p,q)`-forms.
pub fn curvature_commutator(space: &FormSpace) -> Result<OperatorMatrix> {
    let (p, q) = space.bidegree();
    let n = space.fiber.n();
    let mut out = OperatorMatrix::zero(space, space);
    if p >= 1 && q >= 1 {
        let lam = lefschetz_lambda(space)?;
        let th = curvature_action(&lam.codomain)?;
        out = out.add(&th.compose(&lam)?.scale(I))?;
    }
    if p + 1 <= n && q + 1 <= n {
        let th = curvature_action(space)?;
        let lam = lefschetz_lambda(&th.codomain)?;
        out = out.sub(&lam.compose(&th)?.scale(I))?;
    }
    Ok(out)
}

/// `□'' = ∂̄∂̄* + ∂̄*∂̄` on the given space.
pub fn dbar_laplacian(space: &FormSpace) -> Result<OperatorMatrix> {
    laplacian(space, Deriv::Dbar)
}

/// `□' = ∇^{1,0}∇^{1,0*} + ∇^{1,0*}∇^{1,0}`
pub fn d_laplacian(space: &FormSpace) -> Result<OperatorMatrix> {
    laplacian(space, Deriv::D)
}

fn laplacian(space: &FormSpace, which: Deriv) -> Result<OperatorMatrix> {
    let (p, q) = space.bidegree();
    let n = space.fiber.n();
    let (deg, asm): (usize, fn(&FormSpace) -> Result<OperatorMatrix>) = match which {
        Deriv::Dbar => (q, assemble_dbar),
        Deriv::D => (p, assemble_nabla10),
    };
    let mut out = OperatorMatrix::zero(space, space);
    if deg + 1 <= n {
        let a = asm(space)?;
        out = out.add(&a.adjoint().compose(&a)?)?;
    }
    if deg >= 1 {
        let prev = match which {
            Deriv::Dbar => space.at(p, q - 1)?,
            Deriv::D => space.at(p - 1, q)?,
        };
        let a = asm(&prev)?;
        out = out.add(&a.compose(&a.adjoint())?)?;
    }
    Ok(out)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::space::{Disc, Fiber};
    use crate::torus::{BundleData, LatticeTorus};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn flat_surface() -> Arc<Fiber> {
        let period = CMat::from_row_slice(2, 2, &[c(0.1, 1.2), c(0.1, 0.2), c(0.1, 0.2), c(0.0, 1.1)]);
        let torus = LatticeTorus::new(2, period).unwrap();
        let bundle = BundleData::flat(&torus, &[0.1, 0.0, 0.3, 0.5]).unwrap();
        Fiber::new(torus, bundle, Disc::Spectral { m: 1 }).unwrap()
    }

    fn positive_curve(n: usize) -> Arc<Fiber> {
        let torus = LatticeTorus::new(1, CMat::from_element(1, 1, c(0.2, 1.3))).unwrap();
        let bundle = BundleData::positive(&torus, 2, None).unwrap();
        Fiber::new(torus, bundle, Disc::Grid { n }).unwrap()
    }

    #[test]
    fn degree_bounds_are_enforced() {
        let fiber = positive_curve(8);
        assert!(matches!(assemble_dbar(&fiber.space(0, 1).unwrap()), Err(Error::BidegreeOverflow(0, 2))));
        assert!(matches!(assemble_nabla10(&fiber.space(1, 0).unwrap()), Err(Error::BidegreeOverflow(2, 0))));
        assert!(lefschetz_l(&fiber.space(1, 0).unwrap()).is_err());
        assert!(lefschetz_lambda(&fiber.space(0, 1).unwrap()).is_err());
        assert!(curvature_action(&fiber.space(1, 1).unwrap()).is_err());
    }

    #[test]
    fn compose_requires_matching_spaces() {
        let fiber = flat_surface();
        let d = assemble_dbar(&fiber.space(0, 0).unwrap()).unwrap();
        assert!(matches!(d.compose(&d), Err(Error::ShapeMismatch(_))));
        assert!(d.add(&d.adjoint()).is_err());
    }

    #[test]
    fn gram_adjoint_checks_shapes() {
        let a = CMat::identity(2, 3);
        assert!(matches!(adjoint(&a, &CMat::identity(2, 2), &CMat::identity(2, 2)), Err(Error::ShapeMismatch(_))));
        let g = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)]);
        let op = CMat::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.0, 1.0), c(-1.0, 0.5), c(2.0, 0.0)]);
        let adj = adjoint(&op, &g, &g).unwrap();
        let (x, y) = (CMat::from_column_slice(2, 1, &[c(1.0, 0.3), c(-0.2, 0.7)]), CMat::from_column_slice(2, 1, &[c(0.4, -1.0), c(0.9, 0.1)]));
        let lhs = (y.adjoint() * &g * &op * &x)[(0, 0)];
        let rhs = ((&adj * &y).adjoint() * &g * &x)[(0, 0)];
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn flat_curvature_action_vanishes() {
        let fiber = flat_surface();
        assert_eq!(curvature_action(&fiber.space(0, 0).unwrap()).unwrap().norm(), 0.0);
        assert_eq!(curvature_commutator(&fiber.space(1, 1).unwrap()).unwrap().norm(), 0.0);
    }

    #[test]
    fn dense_form_agrees_with_application() {
        let fiber = positive_curve(6);
        let space = fiber.space(0, 0).unwrap();
        let d = assemble_dbar(&space).unwrap();
        let u = FormSection::random(&space, &mut ChaCha8Rng::seed_from_u64(2));
        let dense = d.to_dense() * u.to_dvector();
        let applied = d.apply(&u).unwrap().to_dvector();
        assert!((dense - &applied).norm() <= 1e-12 * applied.norm());
        let mm = d.dump_matrix_market();
        assert!(mm.starts_with("%%MatrixMarket matrix coordinate complex general\n36 36 "));
    }

    #[test]
    fn curvature_commutator_is_a_signed_constant() {
        // [iΘ, Λ] is a positive multiple of the identity on (1,1) and the
        // opposite multiple on (0,0); it vanishes on (1,0)
        let fiber = positive_curve(16);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ratios = Vec::new();
        for (p, q) in [(1, 1), (0, 0)] {
            let space = fiber.space(p, q).unwrap();
            let u = FormSection::random(&space, &mut rng);
            let comm = curvature_commutator(&space).unwrap().apply(&u).unwrap();
            let ratio = comm.inner(&u).unwrap() / u.inner(&u).unwrap();
            assert!(ratio.im.abs() < 1e-12);
            assert!(comm.sub(&u.scale(ratio)).unwrap().norm() <= 1e-12 * u.norm());
            ratios.push(ratio.re);
        }
        assert!(ratios[0] > 0.0 && (ratios[0] + ratios[1]).abs() < 1e-12);
        assert_eq!(curvature_commutator(&fiber.space(1, 0).unwrap()).unwrap().norm(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn operators_satisfy_their_adjoint_relation(seed in any::<u64>(), p in 0usize..2, q in 0usize..2) {
            let fiber = flat_surface();
            let space = fiber.space(p, q).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for op in [assemble_dbar(&space).unwrap(), assemble_nabla10(&space).unwrap(), lefschetz_l(&space).unwrap()] {
                let u = FormSection::random(&space, &mut rng);
                let v = FormSection::random(&op.codomain, &mut rng);
                let lhs = op.apply(&u).unwrap().inner(&v).unwrap();
                let rhs = u.inner(&op.adjoint().apply(&v).unwrap()).unwrap();
                prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
            }
        }

        #[test]
        fn laplacians_are_nonnegative(seed in any::<u64>(), p in 0usize..3, q in 0usize..3) {
            let fiber = flat_surface();
            let space = fiber.space(p, q).unwrap();
            let u = FormSection::random(&space, &mut ChaCha8Rng::seed_from_u64(seed));
            for lap in [dbar_laplacian(&space).unwrap(), d_laplacian(&space).unwrap()] {
                let v = lap.apply(&u).unwrap().inner(&u).unwrap();
                prop_assert!(v.re >= -1e-12 * u.norm().powi(2));
                prop_assert!(v.im.abs() <= 1e-12 * (1.0 + v.re.abs()));
            }
        }
    }
}
