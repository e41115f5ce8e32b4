//! Truncated Laurent series over `F_{q²}` modelling `E = F_{q²}((ϖ))`, the
//! unitary group `G ⊂ GL₃(E)` for the antidiagonal form, and the coset
//! representative families used by the Hecke convolutions.
//!
//! An element stores its valuation, a window of at most `P` coefficients and
//! an exactness flag. Inexact elements are known modulo `ϖ^(val + len)`.
//! Operations that would need coefficients outside the known window fail
//! with [`LocalError::Precision`] instead of guessing.

use crate::finitegroups::{Cell, GroupError, Groups, Residue, Which, M3};
use crate::fieldtower::TorusElem;
use thiserror::Error;

pub const DEFAULT_PRECISION: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LocalError {
    #[error("precision exhausted: {0}")]
    Precision(&'static str),
    #[error("division by zero")]
    DivisionByZero,
    #[error("unipotent parameters violate x conj(x) + y + conj(y) = 0")]
    Constraint,
    #[error("matrix is not in G to working precision")]
    NotInGroup,
    #[error("entry is not integral")]
    NotIntegral,
    #[error("coset family index n = {0} is outside |n| <= 2")]
    Unsupported(i64),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// `ϖ^val · Σ window[k] ϖ^k`, plus `O(ϖ^(val + window.len()))` when inexact.
///
/// A known-zero inexact element has an empty window and `val` equal to its
/// absolute precision. The exact zero has an empty window and `val = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentElem {
    pub val: i64,
    pub window: Vec<u8>,
    pub exact: bool,
}

impl LaurentElem {
    pub fn zero() -> LaurentElem {
        LaurentElem { val: 0, window: Vec::new(), exact: true }
    }

    /// Zero to the known precision (exact zero or `O(ϖ^N)`).
    pub fn is_zero(&self) -> bool {
        self.window.is_empty()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.exact && self.window.is_empty()
    }

    /// Absolute precision `N` (the element is known mod `ϖ^N`); `None` if exact.
    pub fn abs_prec(&self) -> Option<i64> {
        (!self.exact).then_some(self.val + self.window.len() as i64)
    }

    /// Valuation; `i64::MAX` for the exact zero.
    pub fn valuation(&self) -> Result<i64, LocalError> {
        if self.window.is_empty() {
            if self.exact {
                return Ok(i64::MAX);
            }
            return Err(LocalError::Precision("valuation of an unresolved zero"));
        }
        Ok(self.val)
    }

    /// Coefficient of `ϖ^k`.
    pub fn coeff(&self, k: i64) -> Result<u8, LocalError> {
        if let Some(n) = self.abs_prec() {
            if k >= n {
                return Err(LocalError::Precision("coefficient beyond the window"));
            }
        }
        if self.window.is_empty() || k < self.val {
            return Ok(0);
        }
        Ok(self.window.get((k - self.val) as usize).copied().unwrap_or(0))
    }

    fn coeff_or_zero(&self, k: i64) -> u8 {
        if self.window.is_empty() || k < self.val {
            return 0;
        }
        self.window.get((k - self.val) as usize).copied().unwrap_or(0)
    }

    /// Leading coefficient (the element must be known to be nonzero).
    pub fn leading(&self) -> Result<u8, LocalError> {
        self.valuation()?;
        self.window.first().copied().ok_or(LocalError::Precision("leading coefficient of zero"))
    }

    /// Nonnegative valuation, or zero.
    pub fn is_integral(&self) -> Result<bool, LocalError> {
        if self.window.is_empty() {
            if self.exact || self.val >= 0 {
                return Ok(true);
            }
            return Err(LocalError::Precision("integrality of an unresolved zero"));
        }
        Ok(self.val >= 0)
    }
}

/// A 3×3 matrix of Laurent elements, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalMatrix {
    pub entries: Vec<LaurentElem>,
}

impl LocalMatrix {
    pub fn get(&self, r: usize, c: usize) -> &LaurentElem {
        &self.entries[3 * r + c]
    }
}

/// The six distinguished elements of `G`.
#[derive(Clone, Debug)]
pub struct DistinguishedElements {
    pub s: LocalMatrix,
    pub s_prime: LocalMatrix,
    pub n_s: LocalMatrix,
    pub n_s_prime: LocalMatrix,
    pub alpha: LocalMatrix,
    pub alpha_inv: LocalMatrix,
}

/// The two cells of `G = B·I(1) ⊔ B·n_s·I(1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CosetClass {
    BI1,
    BNsI1,
}

/// `g = b·k` with `b` upper triangular in `G` and `k ∈ K`.
#[derive(Clone, Debug)]
pub struct Iwasawa {
    pub b: LocalMatrix,
    pub k: LocalMatrix,
}

/// `g = b·w·k1` with `b` upper triangular, `w ∈ {1, n_s}` and `k1 ∈ I(1)`.
#[derive(Clone, Debug)]
pub struct CellDecomposition {
    pub b: LocalMatrix,
    pub cell: CosetClass,
    pub k1: LocalMatrix,
}

/// Labels of the double-coset decompositions.
///
/// `NsLeft` and `NsPrimeLeft` list `g` with `IwI = ⊔ gI`; the other labels
/// list `g` with `IwI = ⊔ Ig`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CosetFamily {
    /// `I n_s I = ⊔ u(x,y) n_s I`.
    NsLeft,
    /// `I n_{s'} I = ⊔ u⁻(0, ϖy) n_{s'} I`.
    NsPrimeLeft,
    /// `IαI = ⊔ I α u(x, y)`, `x ∈ F_{q²}`, `y ∈ o_E/p_E²`.
    Alpha,
    /// `Iα⁻¹I = ⊔ I α⁻¹ u⁻(ϖx, ϖy)`.
    AlphaInv,
    /// `I n_s αⁿ I` in right-coset form.
    NsAlpha(i64),
}

/// Arithmetic context: the residue field and the window length.
#[derive(Clone, Debug)]
pub struct LocalField {
    pub rf: Residue,
    pub precision: usize,
    pub q: u64,
}

impl LocalField {
    pub fn new(groups: &Groups, precision: usize) -> LocalField {
        LocalField { rf: groups.rf.clone(), precision, q: groups.q }
    }

    fn one_res(&self) -> u8 {
        self.rf.exp(0)
    }

    pub fn sqrt_eps(&self) -> u8 {
        self.rf.sqrt_eps
    }

    // ---- scalars -----------------------------------------------------------

    fn build(&self, mut lo: i64, mut dense: Vec<u8>, exact: bool) -> LaurentElem {
        let end = lo + dense.len() as i64;
        let lead = dense.iter().position(|&c| c != 0);
        let Some(lead) = lead else {
            return if exact { LaurentElem::zero() } else { LaurentElem { val: end, window: Vec::new(), exact: false } };
        };
        dense.drain(..lead);
        lo += lead as i64;
        let mut exact = exact;
        if exact {
            while dense.last() == Some(&0) {
                dense.pop();
            }
        }
        if dense.len() > self.precision {
            dense.truncate(self.precision);
            exact = false;
        }
        LaurentElem { val: lo, window: dense, exact }
    }

    /// Exact Laurent polynomial `ϖ^val Σ c_k ϖ^k`.
    pub fn poly(&self, val: i64, coeffs: &[u8]) -> LaurentElem {
        self.build(val, coeffs.to_vec(), true)
    }

    /// Constant (Teichmüller-style) lift of a residue element.
    pub fn constant(&self, c: u8) -> LaurentElem {
        self.poly(0, &[c])
    }

    pub fn one(&self) -> LaurentElem {
        self.constant(self.one_res())
    }

    /// `c ϖ^k`.
    pub fn monomial(&self, c: u8, k: i64) -> LaurentElem {
        self.poly(k, &[c])
    }

    pub fn uniformizer_pow(&self, k: i64) -> LaurentElem {
        self.monomial(self.one_res(), k)
    }

    pub fn add(&self, a: &LaurentElem, b: &LaurentElem) -> LaurentElem {
        if a.is_exact_zero() {
            return b.clone();
        }
        if b.is_exact_zero() {
            return a.clone();
        }
        let f = &self.rf;
        if a.exact && b.exact {
            let lo = a.val.min(b.val);
            let hi = (a.val + a.window.len() as i64).max(b.val + b.window.len() as i64);
            let dense = (lo..hi).map(|k| f.add(a.coeff_or_zero(k), b.coeff_or_zero(k))).collect();
            return self.build(lo, dense, true);
        }
        let n = [a, b].iter().filter_map(|e| e.abs_prec()).min().expect("one operand is inexact");
        let lo = [a, b].iter().filter(|e| !e.window.is_empty()).map(|e| e.val).min().unwrap_or(n).min(n);
        let dense = (lo..n).map(|k| f.add(a.coeff_or_zero(k), b.coeff_or_zero(k))).collect();
        self.build(lo, dense, false)
    }

    pub fn neg(&self, a: &LaurentElem) -> LaurentElem {
        LaurentElem { val: a.val, window: a.window.iter().map(|&c| self.rf.neg(c)).collect(), exact: a.exact }
    }

    pub fn sub(&self, a: &LaurentElem, b: &LaurentElem) -> LaurentElem {
        self.add(a, &self.neg(b))
    }

    /// Coefficientwise `x ↦ x^q`; `ϖ` is fixed.
    pub fn conj(&self, a: &LaurentElem) -> LaurentElem {
        LaurentElem { val: a.val, window: a.window.iter().map(|&c| self.rf.conj(c)).collect(), exact: a.exact }
    }

    pub fn mul(&self, a: &LaurentElem, b: &LaurentElem) -> LaurentElem {
        if a.is_exact_zero() || b.is_exact_zero() {
            return LaurentElem::zero();
        }
        if a.window.is_empty() || b.window.is_empty() {
            // O(ϖ^N) times something of known valuation (or another O(.)).
            return LaurentElem { val: a.val + b.val, window: Vec::new(), exact: false };
        }
        let f = &self.rf;
        let val = a.val + b.val;
        let full = a.window.len() + b.window.len() - 1;
        let len = match (a.exact, b.exact) {
            (true, true) => full,
            (true, false) => b.window.len(),
            (false, true) => a.window.len(),
            (false, false) => a.window.len().min(b.window.len()),
        };
        let mut dense = vec![0u8; len];
        for (i, &x) in a.window.iter().enumerate().take(len) {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.window.iter().enumerate().take(len - i) {
                dense[i + j] = f.add(dense[i + j], f.mul(x, y));
            }
        }
        self.build(val, dense, a.exact && b.exact)
    }

    pub fn inv(&self, a: &LaurentElem) -> Result<LaurentElem, LocalError> {
        if a.window.is_empty() {
            return Err(if a.exact { LocalError::DivisionByZero } else { LocalError::Precision("inverse of an unresolved zero") });
        }
        let f = &self.rf;
        let c0i = f.inv(a.window[0]);
        if a.exact && a.window.len() == 1 {
            return Ok(self.monomial(c0i, -a.val));
        }
        let r = if a.exact { self.precision } else { a.window.len() };
        let mut b = vec![0u8; r];
        b[0] = c0i;
        for k in 1..r {
            let mut acc = 0u8;
            for j in 1..=k {
                let cj = a.window.get(j).copied().unwrap_or(0);
                acc = f.add(acc, f.mul(cj, b[k - j]));
            }
            b[k] = f.neg(f.mul(c0i, acc));
        }
        Ok(self.build(-a.val, b, false))
    }

    pub fn div(&self, a: &LaurentElem, b: &LaurentElem) -> Result<LaurentElem, LocalError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Residue class of an integral element.
    pub fn reduce(&self, a: &LaurentElem) -> Result<u8, LocalError> {
        if !a.is_integral()? {
            return Err(LocalError::NotIntegral);
        }
        a.coeff(0)
    }

    // ---- matrices ----------------------------------------------------------

    pub fn mat(&self, entries: Vec<LaurentElem>) -> LocalMatrix {
        assert_eq!(entries.len(), 9);
        LocalMatrix { entries }
    }

    pub fn identity(&self) -> LocalMatrix {
        self.diag(&self.one(), &self.one(), &self.one())
    }

    pub fn diag(&self, a: &LaurentElem, b: &LaurentElem, c: &LaurentElem) -> LocalMatrix {
        let z = LaurentElem::zero;
        self.mat(vec![a.clone(), z(), z(), z(), b.clone(), z(), z(), z(), c.clone()])
    }

    /// Constant lift of a residue matrix.
    pub fn lift(&self, m: &M3) -> LocalMatrix {
        self.mat(m.iter().map(|&c| self.constant(c)).collect())
    }

    pub fn mat_mul(&self, a: &LocalMatrix, b: &LocalMatrix) -> LocalMatrix {
        let mut out = Vec::with_capacity(9);
        for r in 0..3 {
            for c in 0..3 {
                let mut acc = LaurentElem::zero();
                for k in 0..3 {
                    acc = self.add(&acc, &self.mul(a.get(r, k), b.get(k, c)));
                }
                out.push(acc);
            }
        }
        self.mat(out)
    }

    pub fn mat_mul_all(&self, ms: &[&LocalMatrix]) -> LocalMatrix {
        let mut acc = self.identity();
        for m in ms {
            acc = self.mat_mul(&acc, m);
        }
        acc
    }

    /// Conjugate transpose.
    pub fn star(&self, a: &LocalMatrix) -> LocalMatrix {
        let mut out = Vec::with_capacity(9);
        for r in 0..3 {
            for c in 0..3 {
                out.push(self.conj(a.get(c, r)));
            }
        }
        self.mat(out)
    }

    /// `s` as a matrix.
    pub fn form(&self) -> LocalMatrix {
        let z = LaurentElem::zero;
        let o = || self.one();
        self.mat(vec![z(), z(), o(), z(), o(), z(), o(), z(), z()])
    }

    /// Inverse of a group element: `g⁻¹ = s g* s`.
    pub fn inverse(&self, g: &LocalMatrix) -> LocalMatrix {
        let s = self.form();
        self.mat_mul_all(&[&s, &self.star(g), &s])
    }

    /// Entrywise equality to the known precision.
    pub fn mat_eq(&self, a: &LocalMatrix, b: &LocalMatrix) -> bool {
        a.entries.iter().zip(&b.entries).all(|(x, y)| self.sub(x, y).is_zero())
    }

    /// `g* s g = s` to working precision.
    pub fn is_unitary(&self, g: &LocalMatrix) -> bool {
        let s = self.form();
        let lhs = self.mat_mul_all(&[&self.star(g), &s, g]);
        self.mat_eq(&lhs, &s)
    }

    pub fn is_integral(&self, g: &LocalMatrix) -> Result<bool, LocalError> {
        for e in &g.entries {
            if !e.is_integral()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Reduction mod `ϖ` of an integral matrix.
    pub fn reduce_mat(&self, g: &LocalMatrix) -> Result<M3, LocalError> {
        let mut out = [0u8; 9];
        for (o, e) in out.iter_mut().zip(&g.entries) {
            *o = self.reduce(e)?;
        }
        Ok(out)
    }

    /// Membership in `K'`: unitary with entry valuations bounded below by
    /// `[[0,0,-1],[1,0,0],[1,1,0]]`.
    pub fn in_k_prime(&self, g: &LocalMatrix) -> Result<bool, LocalError> {
        const MIN: [i64; 9] = [0, 0, -1, 1, 0, 0, 1, 1, 0];
        for (e, &m) in g.entries.iter().zip(MIN.iter()) {
            if e.window.is_empty() {
                if !e.exact && e.val < m {
                    return Err(LocalError::Precision("K' membership of an unresolved zero"));
                }
                continue;
            }
            if e.val < m {
                return Ok(false);
            }
        }
        Ok(self.is_unitary(g))
    }

    /// Membership in `I`: integral and upper triangular mod `ϖ`.
    pub fn in_iwahori(&self, g: &LocalMatrix) -> Result<bool, LocalError> {
        if !self.is_integral(g)? {
            return Ok(false);
        }
        let m = self.reduce_mat(g)?;
        Ok(m[3] == 0 && m[6] == 0 && m[7] == 0)
    }

    // ---- distinguished elements and unipotents ------------------------------

    pub fn distinguished(&self) -> DistinguishedElements {
        let f = &self.rf;
        let z = LaurentElem::zero;
        let o = || self.one();
        let w = |k| self.uniformizer_pow(k);
        let se = self.sqrt_eps();
        let sei = f.inv(se);
        let s = self.form();
        let s_prime = self.mat(vec![z(), z(), w(-1), z(), o(), z(), w(1), z(), z()]);
        let n_s = self.mat(vec![z(), z(), self.constant(f.neg(sei)), z(), o(), z(), self.constant(se), z(), z()]);
        let n_s_prime = self.mat(vec![z(), z(), self.monomial(f.neg(sei), -1), z(), o(), z(), self.monomial(se, 1), z(), z()]);
        let alpha = self.diag(&w(-1), &o(), &w(1));
        let alpha_inv = self.diag(&w(1), &o(), &w(-1));
        DistinguishedElements { s, s_prime, n_s, n_s_prime, alpha, alpha_inv }
    }

    /// `x conj(x) + y + conj(y)`.
    pub fn constraint(&self, x: &LaurentElem, y: &LaurentElem) -> LaurentElem {
        let xx = self.mul(x, &self.conj(x));
        self.add(&xx, &self.add(y, &self.conj(y)))
    }

    /// `u(x,y)` (upper) or `u⁻(x,y)` (lower).
    pub fn unipotent(&self, x: &LaurentElem, y: &LaurentElem, lower: bool) -> Result<LocalMatrix, LocalError> {
        if !self.constraint(x, y).is_zero() {
            return Err(LocalError::Constraint);
        }
        Ok(self.unipotent_unchecked(x, y, lower))
    }

    fn unipotent_unchecked(&self, x: &LaurentElem, y: &LaurentElem, lower: bool) -> LocalMatrix {
        let z = LaurentElem::zero;
        let o = || self.one();
        let mx = self.neg(&self.conj(x));
        if lower {
            self.mat(vec![o(), z(), z(), x.clone(), o(), z(), y.clone(), mx, o()])
        } else {
            self.mat(vec![o(), x.clone(), y.clone(), z(), o(), mx, z(), z(), o()])
        }
    }

    /// `diag(a, δ, conj(a)⁻¹)`.
    pub fn torus(&self, a: &LaurentElem, delta: &LaurentElem) -> Result<LocalMatrix, LocalError> {
        Ok(self.diag(a, delta, &self.inv(&self.conj(a))?))
    }

    // ---- decompositions ----------------------------------------------------

    /// Iwasawa decomposition `g = b·k`. Integral inputs return `(1, g)`.
    pub fn iwasawa_decompose(&self, g: &LocalMatrix) -> Result<Iwasawa, LocalError> {
        if self.is_integral(g)? {
            return Ok(Iwasawa { b: self.identity(), k: g.clone() });
        }
        // k⁻¹ e₁ must be the primitive multiple of g⁻¹ e₁.
        let gi = self.inverse(g);
        let col: Vec<LaurentElem> = (0..3).map(|r| gi.get(r, 0).clone()).collect();
        let mut m = i64::MAX;
        for e in &col {
            if !e.window.is_empty() {
                m = m.min(e.val);
            } else if !e.exact {
                return Err(LocalError::Precision("Iwasawa column has an unresolved entry"));
            }
        }
        if m == i64::MAX {
            return Err(LocalError::NotInGroup);
        }
        let shift = self.uniformizer_pow(-m);
        let v: Vec<LaurentElem> = col.iter().map(|e| self.mul(e, &shift)).collect();
        let se = self.constant(self.sqrt_eps());
        let kinv = if v[0].valuation()? == 0 {
            let a = v[0].clone();
            let x = self.div(&v[1], &a)?;
            let y = self.div(&v[2], &a)?;
            let u = self.unipotent_unchecked(&x, &y, true);
            self.mat_mul(&u, &self.torus(&a, &self.one())?)
        } else {
            if v[2].valuation()? != 0 {
                return Err(LocalError::NotInGroup);
            }
            let a = self.div(&v[2], &se)?;
            let x = self.div(&v[1], &a)?;
            let y = self.neg(&self.div(&self.mul(&se, &v[0]), &a)?);
            let u = self.unipotent_unchecked(&x, &y, true);
            let ns = self.distinguished().n_s;
            self.mat_mul_all(&[&ns, &u, &self.torus(&a, &self.one())?])
        };
        let b = self.mat_mul(g, &kinv);
        for idx in [3usize, 6, 7] {
            if !b.entries[idx].is_zero() {
                return Err(LocalError::NotInGroup);
            }
        }
        let k = self.inverse(&kinv);
        Ok(Iwasawa { b, k })
    }

    /// `g = b·w·k1` with `k1 ∈ I(1)`, obtained by pushing the Borel part of the
    /// Bruhat decomposition of `k mod ϖ` into `b`.
    pub fn cell_decompose(&self, groups: &Groups, g: &LocalMatrix) -> Result<CellDecomposition, LocalError> {
        let iw = self.iwasawa_decompose(g)?;
        let kbar = self.reduce_mat(&iw.k)?;
        let (cell, w, ubar) = match groups.bruhat(Which::Gamma, &kbar)? {
            Cell::Borel { u, .. } => (CosetClass::BI1, groups.identity(), groups.unip_elem(u)),
            Cell::Big { u2, .. } => (CosetClass::BNsI1, groups.ns, groups.unip_elem(u2)),
        };
        let wu = groups.mul(&w, &ubar);
        let beta = groups.mul(&kbar, &groups.inverse(&wu));
        let beta_l = self.lift(&beta);
        let b = self.mat_mul(&iw.b, &beta_l);
        let w_l = self.lift(&w);
        let k1 = self.mat_mul_all(&[&self.inverse(&w_l), &self.inverse(&beta_l), &iw.k]);
        Ok(CellDecomposition { b, cell, k1 })
    }

    pub fn coset_class(&self, groups: &Groups, g: &LocalMatrix) -> Result<CosetClass, LocalError> {
        Ok(self.cell_decompose(groups, g)?.cell)
    }

    /// Residue torus element and valuation `v` of an upper triangular `b`,
    /// so that `diag(b) ∈ α^{-v} · [t] · T_1`.
    pub fn torus_part(&self, groups: &Groups, b: &LocalMatrix) -> Result<(i64, TorusElem), LocalError> {
        let a = b.get(0, 0);
        let d = b.get(1, 1);
        let v = a.valuation()?;
        if d.valuation()? != 0 {
            return Err(LocalError::NotInGroup);
        }
        let f = &self.rf;
        let a0 = a.leading()?;
        let d0 = d.leading()?;
        let h = groups.torus_of(&groups.diag(a0, d0, f.inv(f.conj(a0)))).ok_or(LocalError::NotInGroup)?;
        Ok((v, h))
    }

    // ---- coset families ----------------------------------------------------

    fn trace_zero(&self) -> Vec<u8> {
        (0..self.rf.order as u8).filter(|&c| self.rf.trace(c) == 0).collect()
    }

    /// All `t` with `t + conj(t) = c` (`c ∈ F_q`).
    fn trace_solutions(&self, c: u8) -> Vec<u8> {
        let f = &self.rf;
        let half = f.div(c, f.from_int(2));
        self.trace_zero().into_iter().map(|z| f.add(half, z)).collect()
    }

    /// Pairs of digit vectors `(x, y)` with `x` of length `lx`, `y` of length
    /// `ly`, and `shift·x conj(x) + y + conj(y) ≡ 0` through degree `ly - 1`,
    /// where `shift ∈ {0, 1}` multiplies by `ϖ^shift`.
    fn constrained_digits(&self, lx: usize, ly: usize, shift: usize) -> Vec<(Vec<u8>, Vec<u8>)> {
        let f = &self.rf;
        let n = self.rf.order;
        let mut xs: Vec<Vec<u8>> = vec![Vec::new()];
        for _ in 0..lx {
            xs = xs.into_iter().flat_map(|v| (0..n as u8).map(move |c| [v.clone(), vec![c]].concat())).collect();
        }
        let mut out = Vec::new();
        for x in xs {
            // coefficients of x conj(x)
            let mut xx = vec![0u8; 2 * lx.max(1)];
            for i in 0..lx {
                for j in 0..lx {
                    xx[i + j] = f.add(xx[i + j], f.mul(x[i], f.conj(x[j])));
                }
            }
            let target = |k: usize| -> u8 {
                if k < shift {
                    return 0;
                }
                f.neg(xx.get(k - shift).copied().unwrap_or(0))
            };
            let mut ys: Vec<Vec<u8>> = vec![Vec::new()];
            for k in 0..ly {
                let sols = self.trace_solutions(target(k));
                ys = ys.into_iter().flat_map(|v| sols.iter().map(move |&c| [v.clone(), vec![c]].concat())).collect();
            }
            for y in ys {
                out.push((x.clone(), y));
            }
        }
        out
    }

    /// Representatives for a double-coset decomposition.
    pub fn coset_family(&self, groups: &Groups, label: CosetFamily) -> Result<Vec<LocalMatrix>, LocalError> {
        let d = self.distinguished();
        let mut out = Vec::new();
        match label {
            CosetFamily::NsLeft => {
                for p in &groups.unip {
                    let u = self.unipotent(&self.constant(p.x), &self.constant(p.y), false)?;
                    out.push(self.mat_mul(&u, &d.n_s));
                }
            }
            CosetFamily::NsPrimeLeft => {
                for y in self.trace_zero() {
                    let u = self.unipotent(&LaurentElem::zero(), &self.monomial(y, 1), true)?;
                    out.push(self.mat_mul(&u, &d.n_s_prime));
                }
            }
            CosetFamily::Alpha => {
                for (x, y) in self.constrained_digits(1, 2, 0) {
                    let u = self.unipotent(&self.poly(0, &x), &self.poly(0, &y), false)?;
                    out.push(self.mat_mul(&d.alpha, &u));
                }
            }
            CosetFamily::AlphaInv => {
                for (x, y) in self.constrained_digits(1, 2, 1) {
                    let u = self.unipotent(&self.poly(1, &x), &self.poly(1, &y), true)?;
                    out.push(self.mat_mul(&d.alpha_inv, &u));
                }
            }
            CosetFamily::NsAlpha(n) => {
                if n.abs() > 2 {
                    return Err(LocalError::Unsupported(n));
                }
                let a = if n >= 0 { &d.alpha } else { &d.alpha_inv };
                let mut head = d.n_s.clone();
                for _ in 0..n.abs() {
                    head = self.mat_mul(&head, a);
                }
                let (lx, ly, shift, lower) = if n >= 0 {
                    ((n + 1) as usize, (2 * n + 1) as usize, 0, false)
                } else {
                    ((-n - 1) as usize, (-2 * n - 1) as usize, 1, true)
                };
                for (x, y) in self.constrained_digits(lx, ly, shift) {
                    let v = if lower { 1 } else { 0 };
                    let u = self.unipotent(&self.poly(v, &x), &self.poly(v, &y), lower)?;
                    out.push(self.mat_mul(&head, &u));
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldtower::Tower;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Groups, LocalField) {
        let tower = Tower::char_p(3, 1, 0).unwrap();
        let groups = Groups::new(&tower).unwrap();
        let lf = LocalField::new(&groups, DEFAULT_PRECISION);
        (groups, lf)
    }

    fn random_elem(lf: &LocalField, rng: &mut ChaCha8Rng, lo: i64, len: usize) -> LaurentElem {
        let coeffs: Vec<u8> = (0..len).map(|_| rng.gen_range(0..lf.rf.order as u8)).collect();
        lf.poly(lo, &coeffs)
    }

    #[test]
    fn series_inverse_and_valuation() {
        let (_, lf) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let lo = rng.gen_range(-3..3);
            let a = random_elem(&lf, &mut rng, lo, 4);
            if a.is_zero() {
                continue;
            }
            let lo = rng.gen_range(-3..3);
            let b = random_elem(&lf, &mut rng, lo, 4);
            let ai = lf.inv(&a).unwrap();
            let prod = lf.mul(&a, &ai);
            assert!(lf.sub(&prod, &lf.one()).is_zero());
            if !b.is_zero() {
                assert_eq!(lf.mul(&a, &b).valuation().unwrap(), a.val + b.val);
            }
            assert_eq!(lf.conj(&lf.conj(&a)), a);
        }
    }

    #[test]
    fn unresolved_zero_reports_precision() {
        let (_, lf) = setup();
        let a = lf.inv(&lf.poly(0, &[1, 1])).unwrap();
        let d = lf.sub(&a, &a);
        assert!(d.is_zero());
        assert_eq!(d.valuation(), Err(LocalError::Precision("valuation of an unresolved zero")));
        assert!(matches!(lf.inv(&d), Err(LocalError::Precision(_))));
    }

    #[test]
    fn distinguished_identities() {
        let (_, lf) = setup();
        let d = lf.distinguished();
        assert!(lf.mat_eq(&lf.mat_mul(&d.s_prime, &d.s), &d.alpha));
        assert!(lf.mat_eq(&lf.mat_mul(&d.s, &d.s_prime), &d.alpha_inv));
        let f = &lf.rf;
        let m1 = lf.constant(f.neg(f.exp(0)));
        assert!(lf.mat_eq(&lf.mat_mul(&d.n_s, &d.n_s), &lf.diag(&m1, &lf.one(), &m1)));
        assert!(lf.mat_eq(&lf.mat_mul(&d.alpha, &d.n_s), &d.n_s_prime));
        for m in [&d.s, &d.s_prime, &d.n_s, &d.n_s_prime, &d.alpha, &d.alpha_inv] {
            assert!(lf.is_unitary(m));
        }
        assert!(lf.in_k_prime(&d.n_s_prime).unwrap());
        assert!(lf.in_k_prime(&d.s_prime).unwrap());
        assert!(!lf.in_k_prime(&d.n_s).unwrap());
    }

    #[test]
    fn unipotents_and_inverses() {
        let (groups, lf) = setup();
        assert!(lf.mat_eq(&lf.unipotent(&LaurentElem::zero(), &LaurentElem::zero(), false).unwrap(), &lf.identity()));
        let mut count = 0;
        for x in 0..9u8 {
            for y in 0..9u8 {
                let (xe, ye) = (lf.constant(x), lf.constant(y));
                let Ok(u) = lf.unipotent(&xe, &ye, false) else { continue };
                count += 1;
                let inv = lf.unipotent(&lf.neg(&xe), &lf.conj(&ye), false).unwrap();
                assert!(lf.mat_eq(&lf.mat_mul(&u, &inv), &lf.identity()));
                assert!(lf.mat_eq(&lf.inverse(&u), &inv));
            }
        }
        assert_eq!(count, 27);
        assert_eq!(count, groups.unip.len());
        assert_eq!(lf.unipotent(&lf.one(), &LaurentElem::zero(), false), Err(LocalError::Constraint));
    }

    #[test]
    fn lower_unipotent_factorisation_identity() {
        // u⁻(x,y) = u(-x̄ ȳ⁻¹, y⁻¹) n_s diag(y√ε⁻¹, -ȳ y⁻¹, -ȳ⁻¹√ε) u(-x̄ y⁻¹, y⁻¹), y ≠ 0
        let (groups, lf) = setup();
        let f = &lf.rf;
        let d = lf.distinguished();
        let se = lf.sqrt_eps();
        let mut checked = 0;
        for p in &groups.unip {
            let (x, y) = (p.x, p.y);
            if y == 0 {
                continue;
            }
            let lhs = lf.unipotent(&lf.constant(x), &lf.constant(y), true).unwrap();
            let xb = f.conj(x);
            let yb = f.conj(y);
            let u1 = lf.unipotent(&lf.constant(f.neg(f.div(xb, yb))), &lf.constant(f.inv(y)), false).unwrap();
            let t = lf.diag(
                &lf.constant(f.div(y, se)),
                &lf.constant(f.neg(f.div(yb, y))),
                &lf.constant(f.neg(f.div(se, yb))),
            );
            let u2 = lf.unipotent(&lf.constant(f.neg(f.div(xb, y))), &lf.constant(f.inv(y)), false).unwrap();
            let rhs = lf.mat_mul_all(&[&u1, &d.n_s, &t, &u2]);
            assert!(lf.mat_eq(&lhs, &rhs), "identity fails at ({x}, {y})");
            checked += 1;
        }
        assert_eq!(checked, 26);
    }

    #[test]
    fn iwasawa_on_integral_and_distinguished_elements() {
        let (groups, lf) = setup();
        let d = lf.distinguished();
        let iw = lf.iwasawa_decompose(&d.n_s).unwrap();
        assert!(lf.mat_eq(&iw.b, &lf.identity()));
        assert_eq!(lf.coset_class(&groups, &lf.identity()).unwrap(), CosetClass::BI1);
        assert_eq!(lf.coset_class(&groups, &d.n_s).unwrap(), CosetClass::BNsI1);

        // u⁻(0, ϖ ȳ) α n_s⁻¹ = u(0, ϖ⁻¹ȳ⁻¹) diag(-y⁻¹√ε, 1, -y√ε⁻¹) u⁻(0, ϖ ε y⁻¹)
        let f = &lf.rf;
        let se = lf.sqrt_eps();
        for y in lf.trace_zero().into_iter().filter(|&y| y != 0) {
            let yb = f.conj(y);
            let u = lf.unipotent(&LaurentElem::zero(), &lf.monomial(yb, 1), true).unwrap();
            let g = lf.mat_mul_all(&[&u, &d.alpha, &lf.inverse(&d.n_s)]);
            let cd = lf.cell_decompose(&groups, &g).unwrap();
            assert_eq!(cd.cell, CosetClass::BI1);
            let expect = [f.neg(f.div(se, y)), f.exp(0), f.neg(f.div(y, se))];
            for (i, e) in expect.iter().enumerate() {
                assert_eq!(cd.b.get(i, i).valuation().unwrap(), 0);
                assert_eq!(cd.b.get(i, i).leading().unwrap(), *e);
            }
            let back = lf.mat_mul(&cd.b, &lf.mat_mul(&lf.identity(), &cd.k1));
            assert!(lf.mat_eq(&back, &g));
        }
    }

    #[test]
    fn lower_unipotent_lies_in_big_cell() {
        let (groups, lf) = setup();
        let f = &lf.rf;
        let se = lf.sqrt_eps();
        let eps = f.mul(se, se);
        for p in &groups.unip {
            if p.y == 0 {
                continue;
            }
            let x = f.mul(f.conj(p.x), se);
            let y = f.neg(f.mul(f.conj(p.y), eps));
            let g = lf.unipotent(&lf.constant(x), &lf.constant(y), true).unwrap();
            assert_eq!(lf.coset_class(&groups, &g).unwrap(), CosetClass::BNsI1);
            let kbar = lf.reduce_mat(&g).unwrap();
            assert!(matches!(groups.bruhat(Which::Gamma, &kbar).unwrap(), Cell::Big { .. }));
        }
    }

    fn random_k(groups: &Groups, lf: &LocalField, rng: &mut ChaCha8Rng) -> LocalMatrix {
        let gamma = groups.element(Which::Gamma, rng.gen_range(0..groups.order(Which::Gamma)));
        let x = random_elem(lf, rng, 1, 3);
        let half = lf.constant(lf.rf.div(lf.rf.neg(lf.rf.exp(0)), lf.rf.from_int(2)));
        let tz = lf.trace_zero();
        let w: Vec<u8> = (0..3).map(|_| tz[rng.gen_range(0..tz.len())]).collect();
        let y = lf.add(&lf.mul(&half, &lf.mul(&x, &lf.conj(&x))), &lf.poly(1, &w));
        let u = lf.unipotent(&x, &y, true).unwrap();
        lf.mat_mul(&lf.lift(&gamma), &u)
    }

    #[test]
    fn iwasawa_round_trip_on_seeded_samples() {
        let (groups, lf) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tz = lf.trace_zero();
        let half = lf.constant(lf.rf.div(lf.rf.neg(lf.rf.exp(0)), lf.rf.from_int(2)));
        for _ in 0..100 {
            let lo = rng.gen_range(-2..1);
            let x = random_elem(&lf, &mut rng, lo, 3);
            let w: Vec<u8> = (0..3).map(|_| tz[rng.gen_range(0..tz.len())]).collect();
            let y = lf.add(&lf.mul(&half, &lf.mul(&x, &lf.conj(&x))), &lf.poly(rng.gen_range(-3..1), &w));
            let u = lf.unipotent(&x, &y, false).unwrap();
            let a = lf.monomial(rng.gen_range(1..9), rng.gen_range(-2..3));
            let t = lf.torus(&a, &lf.one()).unwrap();
            let k = random_k(&groups, &lf, &mut rng);
            let g = lf.mat_mul_all(&[&u, &t, &k]);
            assert!(lf.is_unitary(&g));
            let iw = lf.iwasawa_decompose(&g).unwrap();
            assert!(lf.mat_eq(&lf.mat_mul(&iw.b, &iw.k), &g));
            assert!(lf.is_integral(&iw.k).unwrap());
            assert!(lf.is_unitary(&iw.k));
            let again = lf.iwasawa_decompose(&iw.k).unwrap();
            assert!(lf.mat_eq(&again.b, &lf.identity()));
            let cd = lf.cell_decompose(&groups, &g).unwrap();
            let w = if cd.cell == CosetClass::BI1 { lf.identity() } else { lf.distinguished().n_s };
            assert!(lf.mat_eq(&lf.mat_mul_all(&[&cd.b, &w, &cd.k1]), &g));
            let k1bar = lf.reduce_mat(&cd.k1).unwrap();
            assert!(groups.unip_index_of(&k1bar).is_some());
        }
    }

    fn pairwise_distinct(lf: &LocalField, reps: &[LocalMatrix], left: bool) -> bool {
        let invs: Vec<LocalMatrix> = reps.iter().map(|g| lf.inverse(g)).collect();
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                let m = if left { lf.mat_mul(&invs[i], &reps[j]) } else { lf.mat_mul(&reps[i], &invs[j]) };
                if lf.in_iwahori(&m).unwrap() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn coset_family_counts_and_distinctness() {
        let (groups, lf) = setup();
        let cases = [
            (CosetFamily::NsLeft, 27, true),
            (CosetFamily::NsPrimeLeft, 3, true),
            (CosetFamily::Alpha, 81, false),
            (CosetFamily::AlphaInv, 81, false),
            (CosetFamily::NsAlpha(0), 27, false),
            (CosetFamily::NsAlpha(-1), 3, false),
            (CosetFamily::NsAlpha(1), 2187, false),
        ];
        for (label, n, left) in cases {
            let reps = lf.coset_family(&groups, label).unwrap();
            assert_eq!(reps.len(), n, "{label:?}");
            assert!(reps.iter().all(|g| lf.is_unitary(g)));
            if n <= 81 {
                assert!(pairwise_distinct(&lf, &reps, left), "{label:?}");
            }
        }
        assert_eq!(lf.coset_family(&groups, CosetFamily::NsAlpha(3)).unwrap_err(), LocalError::Unsupported(3));
    }

    #[test]
    fn alpha_conjugation_shifts_valuations() {
        let (groups, lf) = setup();
        let d = lf.distinguished();
        for p in &groups.unip {
            let (x, y) = (lf.constant(p.x), lf.constant(p.y));
            let u = lf.unipotent(&x, &y, false).unwrap();
            let c = lf.mat_mul_all(&[&d.alpha_inv, &u, &d.alpha]);
            let expect = lf.unipotent(&lf.mul(&x, &lf.uniformizer_pow(1)), &lf.mul(&y, &lf.uniformizer_pow(2)), false).unwrap();
            assert!(lf.mat_eq(&c, &expect));
        }
    }
}
