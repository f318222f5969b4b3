//! Pointwise exterior algebra on an `n`-dimensional Hermitian vector space.
//!
//! Generators are the unitary coframe `θ_0..θ_{n-1}` (bits `0..n`) and its
//! conjugates `θ̄_0..θ̄_{n-1}` (bits `n..2n`). A monomial is a bitmask whose
//! canonical order is ascending bit index. Components of a `(p,q)`-form are
//! ordered lexicographically by `(I, J)`, with `I` and `J` as sorted index
//! tuples. The basis is orthonormal, so pointwise adjoints are conjugate
//! transposes.

use crate::linalg::{binom, c, CMat, C64, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exterior {
    pub n: usize,
}

fn subsets(n: usize, k: usize) -> Vec<u32> {
    // lexicographic order of sorted index tuples
    fn rec(start: usize, n: usize, k: usize, cur: u32, out: &mut Vec<u32>) {
        if k == 0 {
            out.push(cur);
            return;
        }
        for i in start..n {
            rec(i + 1, n, k - 1, cur | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, 0, &mut out);
    }
    out
}

/// Sign of `a ∧ b` relative to the canonical order of `a | b`, or `None`
/// when the monomials share a generator.
pub fn wedge_sign(a: u32, b: u32) -> Option<f64> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    Some(if inversions % 2 == 0 { 1.0 } else { -1.0 })
}

impl Exterior {
    pub fn new(n: usize) -> Self {
        Exterior { n }
    }

    pub fn count(&self, p: usize, q: usize) -> usize {
        binom(self.n, p) * binom(self.n, q)
    }

    pub fn basis(&self, p: usize, q: usize) -> Vec<u32> {
        let n = self.n;
        let mut out = Vec::new();
        for i in subsets(n, p) {
            for j in subsets(n, q) {
                out.push(i | (j << n));
            }
        }
        out
    }

    pub fn bidegree_of(&self, mask: u32) -> (usize, usize) {
        let low = (1u32 << self.n) - 1;
        ((mask & low).count_ones() as usize, (mask >> self.n).count_ones() as usize)
    }

    fn index_in(&self, basis: &[u32], mask: u32) -> Option<usize> {
        basis.iter().position(|&m| m == mask)
    }

    /// Matrix of a monomial-to-monomial linear map `(p,q) → (p2,q2)`.
    fn build(
        &self,
        (p, q): (usize, usize),
        (p2, q2): (usize, usize),
        f: impl Fn(u32) -> Option<(u32, C64)>,
    ) -> CMat {
        let src = self.basis(p, q);
        let dst = if p2 <= self.n && q2 <= self.n { self.basis(p2, q2) } else { vec![] };
        let mut m = CMat::zeros(dst.len(), src.len());
        for (col, &s) in src.iter().enumerate() {
            if let Some((t, v)) = f(s) {
                if let Some(row) = self.index_in(&dst, t) {
                    m[(row, col)] += v;
                }
            }
        }
        m
    }

    /// Left wedge by the generator with bit `g`.
    pub fn wedge_gen(&self, g: usize, from: (usize, usize)) -> CMat {
        let to = if g < self.n { (from.0 + 1, from.1) } else { (from.0, from.1 + 1) };
        self.build(from, to, |m| {
            wedge_sign(1 << g, m).map(|s| (m | (1 << g), c(s, 0.0)))
        })
    }

    /// Interior product by the dual vector of generator `g`.
    pub fn interior_gen(&self, g: usize, from: (usize, usize)) -> CMat {
        let is_holo = g < self.n;
        if (is_holo && from.0 == 0) || (!is_holo && from.1 == 0) {
            let to_count = 0;
            return CMat::zeros(to_count, self.count(from.0, from.1));
        }
        let to = if is_holo { (from.0 - 1, from.1) } else { (from.0, from.1 - 1) };
        self.build(from, to, |m| {
            if m & (1 << g) == 0 {
                return None;
            }
            let below = (m & ((1u32 << g) - 1)).count_ones();
            let s = if below % 2 == 0 { 1.0 } else { -1.0 };
            Some((m & !(1 << g), c(s, 0.0)))
        })
    }

    /// `θ_a ∧ ·`
    pub fn theta(&self, a: usize, from: (usize, usize)) -> CMat {
        self.wedge_gen(a, from)
    }

    /// `θ̄_b ∧ ·`
    pub fn theta_bar(&self, b: usize, from: (usize, usize)) -> CMat {
        self.wedge_gen(self.n + b, from)
    }

    /// Contraction with the frame vector `E_a` (dual to `θ_a`).
    pub fn iota(&self, a: usize, from: (usize, usize)) -> CMat {
        self.interior_gen(a, from)
    }

    /// Contraction with `Ē_b` (dual to `θ̄_b`).
    pub fn iota_bar(&self, b: usize, from: (usize, usize)) -> CMat {
        self.interior_gen(self.n + b, from)
    }

    /// `L = ω ∧ ·` with `ω = i Σ θ_a ∧ θ̄_a`.
    pub fn lefschetz(&self, from: (usize, usize)) -> CMat {
        let (p, q) = from;
        let mut m = CMat::zeros(self.count(p + 1, q + 1), self.count(p, q));
        if m.nrows() == 0 {
            return m;
        }
        for a in 0..self.n {
            m += self.theta(a, (p, q + 1)) * self.theta_bar(a, from) * I;
        }
        m
    }

    /// `Λ = L^*`, mapping `(p,q) → (p-1,q-1)`.
    pub fn lambda(&self, from: (usize, usize)) -> CMat {
        let (p, q) = from;
        if p == 0 || q == 0 {
            return CMat::zeros(0, self.count(p, q));
        }
        self.lefschetz((p - 1, q - 1)).adjoint()
    }

    /// Wedge by the (1,1)-form `Σ r_{ab} θ_a ∧ θ̄_b`.
    pub fn wedge_11(&self, r: &CMat, from: (usize, usize)) -> CMat {
        let (p, q) = from;
        let mut m = CMat::zeros(self.count(p + 1, q + 1), self.count(p, q));
        if m.nrows() == 0 {
            return m;
        }
        for a in 0..self.n {
            for b in 0..self.n {
                if r[(a, b)] != ZERO {
                    m += self.theta(a, (p, q + 1)) * self.theta_bar(b, from) * r[(a, b)];
                }
            }
        }
        m
    }

    /// Wedge product of two pointwise forms.
    pub fn wedge(
        &self,
        (p1, q1): (usize, usize),
        a: &[C64],
        (p2, q2): (usize, usize),
        b: &[C64],
    ) -> Vec<C64> {
        let ba = self.basis(p1, q1);
        let bb = self.basis(p2, q2);
        let (p3, q3) = (p1 + p2, q1 + q2);
        if p3 > self.n || q3 > self.n {
            return vec![];
        }
        let bc = self.basis(p3, q3);
        let mut out = vec![ZERO; bc.len()];
        for (i, &ma) in ba.iter().enumerate() {
            if a[i] == ZERO {
                continue;
            }
            for (j, &mb) in bb.iter().enumerate() {
                if let Some(s) = wedge_sign(ma, mb) {
                    let k = self.index_in(&bc, ma | mb).expect("wedge lands in basis");
                    out[k] += a[i] * b[j] * s;
                }
            }
        }
        out
    }

    /// Complex conjugate of a `(p,q)`-form as a `(q,p)`-form.
    pub fn conj(&self, (p, q): (usize, usize), a: &[C64]) -> Vec<C64> {
        let n = self.n;
        let low = (1u32 << n) - 1;
        let src = self.basis(p, q);
        let dst = self.basis(q, p);
        let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
        let mut out = vec![ZERO; dst.len()];
        for (i, &m) in src.iter().enumerate() {
            let swapped = ((m & low) << n) | (m >> n);
            let k = self.index_in(&dst, swapped).expect("conjugate lands in basis");
            out[k] = a[i].conj() * sign;
        }
        out
    }

    /// Powers of ω as pointwise `(k,k)`-forms.
    pub fn omega_power(&self, k: usize) -> Vec<C64> {
        let mut f = vec![ONE];
        for j in 0..k {
            let l = self.lefschetz((j, j));
            let v = nalgebra::DVector::from_vec(f);
            f = (l * v).iter().copied().collect();
        }
        f
    }

    /// Coefficient of the volume form `ω^n/n!` on the canonical top monomial.
    pub fn volume_coefficient(&self) -> C64 {
        let top = self.omega_power(self.n);
        let fact: f64 = (1..=self.n).map(|x| x as f64).product();
        top[0] / fact
    }

    /// Sesquilinear matrix `S` with
    /// `i^{k²}/(n-k)! · α ∧ β̄ ∧ ω^{n-k} = (Σ α_I conj(β_J) S_{IJ}) dV`
    /// for `(p,q)`-forms with `k = p + q ≤ n`.
    pub fn hr_matrix(&self, p: usize, q: usize) -> CMat {
        let k = p + q;
        assert!(k <= self.n, "Hodge-Riemann pairing needs p+q <= n");
        let cnt = self.count(p, q);
        let om = self.omega_power(self.n - k);
        let fact: f64 = (1..=(self.n - k)).map(|x| x as f64).product();
        let phase = I.powu((k * k) as u32 % 4);
        let vol = self.volume_coefficient();
        let mut s = CMat::zeros(cnt, cnt);
        for i in 0..cnt {
            for j in 0..cnt {
                let mut a = vec![ZERO; cnt];
                a[i] = ONE;
                let mut b = vec![ZERO; cnt];
                b[j] = ONE;
                let bbar = self.conj((p, q), &b);
                let ab = self.wedge((p, q), &a, (q, p), &bbar);
                let top = self.wedge((k, k), &ab, (self.n - k, self.n - k), &om);
                // conj(b) was built from b = e_j, so the pairing is linear in conj(β_J)
                s[(i, j)] = phase * top[0] / (vol * fact);
            }
        }
        s
    }
}
