//! The pro-p Iwahori Hecke algebra `H_C(G, I(1))` block by block.
//!
//! A block is attached to an orbit `{χ, χ^s}`. When `χ^s = χ` it is spanned
//! by the alternating words in `T_{n_s}`, `T_{n_{s'}}` subject to two
//! quadratic relations. When `χ^s ≠ χ` it is spanned by the powers of
//! `T_α`, `T_{α⁻¹}` on either side together with the intertwiners `S_{n,·}`.
//! Products are composition: `a·b` means "apply `b`, then `a`".

use crate::fieldtower::{CharCase, Fe, Field, TorusChar};
use crate::linalg::{Mat, Subspace};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub const WORD_WINDOW: u32 = 8;
pub const REGULAR_WINDOW: i64 = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockError {
    #[error("product leaves the degree window at {0}")]
    WindowOverflow(String),
    #[error("label {0} does not belong to a {1} block")]
    WrongLabel(String, &'static str),
    #[error("supersingularity is only defined in characteristic p")]
    NotCharP,
    #[error("invalid module parameters: {0}")]
    Parameters(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Gen {
    S,
    SPrime,
}

impl Gen {
    fn other(self) -> Gen {
        match self {
            Gen::S => Gen::SPrime,
            Gen::SPrime => Gen::S,
        }
    }
}

/// Basis labels. `Word` is used by trivial and hybrid blocks; `T` and `S`
/// by regular blocks, with `side` 0 for `χ` and 1 for `χ^s`.
///
/// `T { side, k }` is `T_{α,side}^k` for `k > 0`, `T_{α⁻¹,side}^{-k}` for
/// `k < 0` and `id_side` for `k = 0`. `S { side, n }` is `S_{n,side}`, which
/// maps the `side` summand to the other one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Label {
    Word { start: Gen, len: u32 },
    T { side: u8, k: i64 },
    S { side: u8, n: i64 },
}

impl Label {
    pub const ONE_WORD: Label = Label::Word { start: Gen::S, len: 0 };

    pub fn word(start: Gen, len: u32) -> Label {
        if len == 0 {
            Label::ONE_WORD
        } else {
            Label::Word { start, len }
        }
    }

    /// Summand the operator reads from.
    fn source(self) -> u8 {
        match self {
            Label::Word { .. } => 0,
            Label::T { side, .. } | Label::S { side, .. } => side,
        }
    }

    /// Summand the operator writes to.
    fn target(self) -> u8 {
        match self {
            Label::Word { .. } => 0,
            Label::T { side, .. } => side,
            Label::S { side, .. } => 1 - side,
        }
    }

    fn letters(self) -> Vec<Gen> {
        match self {
            Label::Word { start, len } => {
                let mut g = start;
                let mut out = Vec::with_capacity(len as usize);
                for _ in 0..len {
                    out.push(g);
                    g = g.other();
                }
                out
            }
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |s: &u8| if *s == 0 { "χ" } else { "χ^s" };
        match self {
            Label::Word { len: 0, .. } => write!(f, "1"),
            Label::Word { .. } => {
                let names: Vec<&str> = self.letters().iter().map(|g| if *g == Gen::S { "T_s" } else { "T_s'" }).collect();
                write!(f, "{}", names.join("·"))
            }
            Label::T { side: s, k: 0 } => write!(f, "id_{}", side(s)),
            Label::T { side: s, k } if *k > 0 => write!(f, "T_(α,{})^{}", side(s), k),
            Label::T { side: s, k } => write!(f, "T_(α⁻¹,{})^{}", side(s), -k),
            Label::S { side: s, n } => write!(f, "S_({},{})", n, side(s)),
        }
    }
}

/// Finite linear combination of basis labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockElem {
    pub terms: BTreeMap<Label, Fe>,
}

impl BlockElem {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, l: Label) -> Fe {
        self.terms.get(&l).copied().unwrap_or(Fe::ZERO)
    }
}

/// One block `H_C(G, γ_χ)` over a finite coefficient field.
#[derive(Clone, Debug)]
pub struct BlockAlgebra {
    pub case: CharCase,
    pub chi: TorusChar,
    pub chi_s: TorusChar,
    pub p: u64,
    pub q: u64,
    pub field: Field,
    /// `ζ(-1)` in the coefficient field.
    pub zeta: Fe,
    pub word_window: u32,
    pub regular_window: i64,
}

/// Representative of the orbit `{χ, χ^s}`: the lexicographically smaller one.
pub fn canonical(chi: TorusChar, q: u64) -> TorusChar {
    chi.min(chi.s_conj(q))
}

impl BlockAlgebra {
    /// Block of `χ`, keeping `χ` as the first summand.
    pub fn new(chi: TorusChar, p: u64, q: u64, field: Field) -> BlockAlgebra {
        let zeta = field.from_i64(chi.zeta_minus_one());
        BlockAlgebra {
            case: chi.case(q),
            chi,
            chi_s: chi.s_conj(q),
            p,
            q,
            field,
            zeta,
            word_window: WORD_WINDOW,
            regular_window: REGULAR_WINDOW,
        }
    }

    pub fn is_char_p(&self) -> bool {
        self.field.ell() == self.p
    }

    fn regular(&self) -> bool {
        self.case == CharCase::Regular
    }

    /// `q^e` in the coefficient field.
    pub fn qpow(&self, e: u64) -> Fe {
        let f = &self.field;
        f.pow(f.from_i64(self.q as i64), e)
    }

    pub fn int(&self, k: i64) -> Fe {
        self.field.from_i64(k)
    }

    /// `(a, b)` with `T² = aT + b` for the generator.
    pub fn quadratic(&self, g: Gen) -> (Fe, Fe) {
        let f = &self.field;
        let q = self.q as i64;
        match (g, self.case) {
            (Gen::SPrime, _) => (f.from_i64(q - 1), f.from_i64(q)),
            (Gen::S, CharCase::Trivial) => (f.from_i64(q.pow(3) - 1), f.from_i64(q.pow(3))),
            (Gen::S, _) => (f.from_i64(q - q * q), f.from_i64(q.pow(3))),
        }
    }

    // ---- elements ----------------------------------------------------------

    pub fn zero(&self) -> BlockElem {
        BlockElem::default()
    }

    pub fn basis(&self, l: Label) -> BlockElem {
        self.scaled(Fe::ONE, l)
    }

    fn scaled(&self, c: Fe, l: Label) -> BlockElem {
        let mut e = BlockElem::default();
        if !c.is_zero() {
            e.terms.insert(l, c);
        }
        e
    }

    pub fn one(&self) -> BlockElem {
        if self.regular() {
            self.add(&self.basis(Label::T { side: 0, k: 0 }), &self.basis(Label::T { side: 1, k: 0 }))
        } else {
            self.basis(Label::ONE_WORD)
        }
    }

    pub fn add(&self, a: &BlockElem, b: &BlockElem) -> BlockElem {
        let f = &self.field;
        let mut out = a.clone();
        for (&l, &c) in &b.terms {
            let v = f.add(out.coeff(l), c);
            if v.is_zero() {
                out.terms.remove(&l);
            } else {
                out.terms.insert(l, v);
            }
        }
        out
    }

    pub fn scale(&self, c: Fe, a: &BlockElem) -> BlockElem {
        let f = &self.field;
        let mut out = BlockElem::default();
        for (&l, &v) in &a.terms {
            let w = f.mul(c, v);
            if !w.is_zero() {
                out.terms.insert(l, w);
            }
        }
        out
    }

    pub fn sub(&self, a: &BlockElem, b: &BlockElem) -> BlockElem {
        self.add(a, &self.scale(self.field.neg(Fe::ONE), b))
    }

    /// `T_{n_s} e_{γ_χ}`.
    pub fn t_s(&self) -> BlockElem {
        if self.regular() {
            self.add(&self.basis(Label::S { side: 0, n: 0 }), &self.basis(Label::S { side: 1, n: 0 }))
        } else {
            self.basis(Label::word(Gen::S, 1))
        }
    }

    /// `T_{n_{s'}} e_{γ_χ}`.
    pub fn t_s_prime(&self) -> BlockElem {
        if self.regular() {
            self.add(&self.basis(Label::S { side: 0, n: -1 }), &self.basis(Label::S { side: 1, n: -1 }))
        } else {
            self.basis(Label::word(Gen::SPrime, 1))
        }
    }

    /// Idempotent `e_χ` (side 0) or `e_{χ^s}` (side 1); the unit for
    /// trivial and hybrid blocks.
    pub fn idempotent(&self, side: u8) -> BlockElem {
        if self.regular() {
            self.basis(Label::T { side, k: 0 })
        } else {
            self.one()
        }
    }

    fn check_label(&self, l: Label) -> Result<Label, BlockError> {
        let ok = match l {
            Label::Word { len, .. } => !self.regular() && len <= self.word_window,
            Label::T { k, .. } => self.regular() && k.abs() <= self.regular_window,
            Label::S { n, .. } => self.regular() && n.abs() <= self.regular_window,
        };
        match (ok, l) {
            (true, _) => Ok(l),
            (false, Label::Word { .. }) if !self.regular() => Err(BlockError::WindowOverflow(l.to_string())),
            (false, Label::T { .. } | Label::S { .. }) if self.regular() => Err(BlockError::WindowOverflow(l.to_string())),
            _ => Err(BlockError::WrongLabel(l.to_string(), self.case.name())),
        }
    }

    /// Windowed basis: words of length at most `bound`, or all regular
    /// labels with exponent and index at most `bound` in absolute value.
    pub fn basis_labels(&self, bound: i64) -> Vec<Label> {
        let mut out = Vec::new();
        if self.regular() {
            for side in 0..2u8 {
                for k in -bound..=bound {
                    out.push(Label::T { side, k });
                }
                for n in -bound..=bound {
                    out.push(Label::S { side, n });
                }
            }
        } else {
            out.push(Label::ONE_WORD);
            for len in 1..=bound as u32 {
                out.push(Label::word(Gen::S, len));
                out.push(Label::word(Gen::SPrime, len));
            }
        }
        out
    }

    pub fn mul(&self, a: &BlockElem, b: &BlockElem) -> Result<BlockElem, BlockError> {
        let f = &self.field;
        let mut out = BlockElem::default();
        for (&la, &ca) in &a.terms {
            for (&lb, &cb) in &b.terms {
                let prod = self.mul_labels(la, lb)?;
                out = self.add(&out, &self.scale(f.mul(ca, cb), &prod));
            }
        }
        Ok(out)
    }

    pub fn mul_labels(&self, a: Label, b: Label) -> Result<BlockElem, BlockError> {
        self.check_label(a)?;
        self.check_label(b)?;
        if self.regular() {
            self.mul_regular(a, b)
        } else {
            let mut acc = self.basis(b);
            for g in a.letters().into_iter().rev() {
                acc = self.left_gen(g, &acc)?;
            }
            Ok(acc)
        }
    }

    /// `T_g · x` for a combination of words.
    fn left_gen(&self, g: Gen, x: &BlockElem) -> Result<BlockElem, BlockError> {
        let f = &self.field;
        let (qa, qb) = self.quadratic(g);
        let mut out = BlockElem::default();
        for (&w, &c) in &x.terms {
            let Label::Word { start, len } = w else { unreachable!("word block") };
            if len == 0 || start != g {
                let nw = self.check_label(Label::word(g, len + 1))?;
                out = self.add(&out, &self.scaled(c, nw));
            } else {
                let tail = Label::word(g.other(), len - 1);
                out = self.add(&out, &self.scaled(f.mul(c, qa), w));
                out = self.add(&out, &self.scaled(f.mul(c, qb), tail));
            }
        }
        Ok(out)
    }

    /// Coefficient of `S_{n+1}` in `S_n T_α` (equivalently `T_{α⁻¹} S_n`).
    fn c_plus(&self, n: i64) -> Fe {
        match n {
            n if n >= 0 => Fe::ONE,
            -1 => self.qpow(1),
            _ => self.qpow(4),
        }
    }

    /// Coefficient of `S_{n-1}` in `S_n T_{α⁻¹}` (equivalently `T_α S_n`).
    fn c_minus(&self, n: i64) -> Fe {
        match n {
            n if n >= 1 => self.qpow(4),
            0 => self.qpow(3),
            _ => Fe::ONE,
        }
    }

    /// Coefficient of `T^{m-n}` in `S_{n,·} S_{m,·}`.
    fn c_compose(&self, n: i64, m: i64) -> Fe {
        let f = &self.field;
        let e = if n >= 0 && m >= 0 {
            3 + 4 * n.min(m)
        } else if n < 0 && m < 0 {
            1 + 4 * (-n - 1).min(-m - 1)
        } else {
            0
        };
        f.mul(self.zeta, self.qpow(e as u64))
    }

    fn shift_s(&self, side: u8, mut n: i64, steps: i64) -> Result<BlockElem, BlockError> {
        let f = &self.field;
        let mut c = Fe::ONE;
        for _ in 0..steps.abs() {
            if steps > 0 {
                c = f.mul(c, self.c_plus(n));
                n += 1;
            } else {
                c = f.mul(c, self.c_minus(n));
                n -= 1;
            }
        }
        let l = self.check_label(Label::S { side, n })?;
        Ok(self.scaled(c, l))
    }

    fn mul_regular(&self, a: Label, b: Label) -> Result<BlockElem, BlockError> {
        if a.source() != b.target() {
            return Ok(self.zero());
        }
        match (a, b) {
            (Label::T { side, k: k1 }, Label::T { k: k2, .. }) => {
                let cancel = if k1.signum() * k2.signum() < 0 { k1.abs().min(k2.abs()) } else { 0 };
                let l = self.check_label(Label::T { side, k: k1 + k2 })?;
                Ok(self.scaled(self.qpow(4 * cancel as u64), l))
            }
            // S_n · T_α^k: T_α raises n, T_{α⁻¹} lowers it.
            (Label::S { side, n }, Label::T { k, .. }) => self.shift_s(side, n, k),
            // T_{α⁻¹,other}^m · S_n raises n; T_{α,other}^m lowers it.
            (Label::T { k, .. }, Label::S { side, n }) => self.shift_s(side, n, -k),
            (Label::S { n, .. }, Label::S { side, n: m }) => {
                let l = self.check_label(Label::T { side, k: m - n })?;
                Ok(self.scaled(self.c_compose(n, m), l))
            }
            _ => Err(BlockError::WrongLabel(a.to_string(), self.case.name())),
        }
    }

    // ---- centre ------------------------------------------------------------

    /// Non-idempotent generators of the centre, built from `T_{n_s}`,
    /// `T_{n_{s'}}` and the idempotents.
    pub fn center_generators(&self) -> Result<Vec<BlockElem>, BlockError> {
        let ts = self.t_s();
        let tp = self.t_s_prime();
        let one = self.one();
        match self.case {
            CharCase::Trivial | CharCase::Hybrid => {
                let (a_s, _) = self.quadratic(Gen::S);
                let (a_p, _) = self.quadratic(Gen::SPrime);
                let x = self.mul(&ts, &self.sub(&tp, &self.scale(a_p, &one)))?;
                let y = self.mul(&tp, &self.sub(&ts, &self.scale(a_s, &one)))?;
                let mut z = self.add(&x, &y);
                if self.case == CharCase::Trivial {
                    z = self.add(&z, &one);
                }
                Ok(vec![z])
            }
            CharCase::Regular => {
                let e0 = self.idempotent(0);
                let e1 = self.idempotent(1);
                let ps = self.mul(&tp, &ts)?;
                let sp = self.mul(&ts, &tp)?;
                let z1 = self.add(&self.mul(&ps, &e0)?, &self.mul(&sp, &e1)?);
                let z2 = self.add(&self.mul(&ps, &e1)?, &self.mul(&sp, &e0)?);
                Ok(vec![self.scale(self.zeta, &z1), self.scale(self.zeta, &z2)])
            }
        }
    }

    // ---- modules -----------------------------------------------------------

    fn mat(&self, rows: &[&[i64]]) -> Mat {
        let f = &self.field;
        Mat::from_rows(&rows.iter().map(|r| r.iter().map(|&x| f.from_i64(x)).collect()).collect::<Vec<_>>())
    }

    fn word_module(&self, kind: ModuleKind, rs: Mat, rp: Mat) -> SimpleModule {
        let dim = rs.rows;
        let mut gens = BTreeMap::new();
        gens.insert(Label::word(Gen::S, 1), rs);
        gens.insert(Label::word(Gen::SPrime, 1), rp);
        SimpleModule { chi: self.chi, case: self.case, kind, dim, gens }
    }

    /// Character `T_{n_s} ↦ θ`, `T_{n_{s'}} ↦ θ'` of a trivial or hybrid block.
    pub fn character(&self, theta: Fe, theta_prime: Fe) -> Result<SimpleModule, BlockError> {
        if self.regular() {
            return Err(BlockError::Parameters("regular blocks have no characters μ_{θ,θ'}"));
        }
        let one = |x: Fe| Mat::from_rows(&[vec![x]]);
        Ok(self.word_module(ModuleKind::Character { theta, theta_prime }, one(theta), one(theta_prime)))
    }

    /// Roots of the two quadratic relations, deduplicated.
    pub fn character_params(&self) -> Vec<(Fe, Fe)> {
        let f = &self.field;
        let q = self.q as i64;
        let thetas = match self.case {
            CharCase::Trivial => vec![f.from_i64(-1), f.from_i64(q.pow(3))],
            CharCase::Hybrid => vec![f.from_i64(-q * q), f.from_i64(q)],
            CharCase::Regular => return Vec::new(),
        };
        let primes = [f.from_i64(-1), f.from_i64(q)];
        let mut out = Vec::new();
        for &t in &thetas {
            for &tp in &primes {
                if !out.contains(&(t, tp)) {
                    out.push((t, tp));
                }
            }
        }
        out
    }

    /// `M(λ)`: two-dimensional module with central character `λ`.
    pub fn module_m(&self, lambda: Fe) -> Result<SimpleModule, BlockError> {
        let f = &self.field;
        let q = self.q as i64;
        let kind = ModuleKind::M(lambda);
        match self.case {
            CharCase::Trivial | CharCase::Hybrid => {
                let rp = self.mat(&[&[0, 1], &[q, q - 1]]);
                let mut rs = if self.case == CharCase::Trivial {
                    self.mat(&[&[-1, 0], &[-q, q.pow(3)]])
                } else {
                    self.mat(&[&[-q * q, 0], &[q * q - q.pow(3), q]])
                };
                rs.set(1, 0, f.add(rs.get(1, 0), lambda));
                Ok(self.word_module(kind, rs, rp))
            }
            CharCase::Regular => {
                if self.is_char_p() {
                    return Err(BlockError::Parameters("use module_pair in characteristic p"));
                }
                let inv = f.inv(lambda).ok_or(BlockError::Parameters("λ must be a unit"))?;
                let q4l = f.mul(self.qpow(4), inv);
                let z = self.zeta;
                let mut g = RegularGens::new();
                g.t[0] = (lambda, q4l);
                g.t[1] = (q4l, lambda);
                g.s_from_w1 = (f.mul(self.qpow(3), inv), Fe::ONE);
                g.s_from_w2 = (f.mul(z, lambda), f.mul(z, self.qpow(1)));
                Ok(self.regular_module(kind, g))
            }
        }
    }

    /// `M(λ, λ')` with `λλ' = 0` in characteristic `p`.
    ///
    /// `M(0,0)` is returned in its split form `μ₀ ⊕ μ₁`.
    pub fn module_pair(&self, lambda: Fe, lambda_prime: Fe) -> Result<SimpleModule, BlockError> {
        if !self.regular() || !self.is_char_p() {
            return Err(BlockError::Parameters("M(λ,λ') lives in regular blocks in characteristic p"));
        }
        let f = &self.field;
        if !f.mul(lambda, lambda_prime).is_zero() {
            return Err(BlockError::Parameters("λλ' must vanish"));
        }
        let z = self.zeta;
        let mut g = RegularGens::new();
        g.t[0] = (lambda, lambda_prime);
        g.t[1] = (lambda_prime, lambda);
        if !lambda.is_zero() {
            // w1 ↦ w2' by S_{-1,χ^s}; w2' ↦ ζλ w1 by S_{0,χ}
            g.s_from_w1 = (Fe::ZERO, Fe::ONE);
            g.s_from_w2 = (f.mul(z, lambda), Fe::ZERO);
        } else if !lambda_prime.is_zero() {
            // w1 ↦ w2' by S_{0,χ^s}; w2' ↦ ζλ' w1 by S_{-1,χ}
            g.s_from_w1 = (Fe::ONE, Fe::ZERO);
            g.s_from_w2 = (Fe::ZERO, f.mul(z, lambda_prime));
        }
        Ok(self.regular_module(ModuleKind::Pair(lambda, lambda_prime), g))
    }

    /// `μ_i`: `id_{χ^{s^i}} ↦ 1`, every other basis element ↦ 0.
    pub fn mu(&self, i: u8) -> Result<SimpleModule, BlockError> {
        if !self.regular() || !self.is_char_p() {
            return Err(BlockError::Parameters("μ_i lives in regular blocks in characteristic p"));
        }
        let mut gens = BTreeMap::new();
        for side in 0..2u8 {
            let v = if side == i { Fe::ONE } else { Fe::ZERO };
            gens.insert(Label::T { side, k: 0 }, Mat::from_rows(&[vec![v]]));
            for k in [1, -1] {
                gens.insert(Label::T { side, k }, Mat::zeros(1, 1));
            }
            for n in [0, -1] {
                gens.insert(Label::S { side, n }, Mat::zeros(1, 1));
            }
        }
        Ok(SimpleModule { chi: self.chi, case: self.case, kind: ModuleKind::Mu(i), dim: 1, gens })
    }

    fn regular_module(&self, kind: ModuleKind, g: RegularGens) -> SimpleModule {
        let unit = |i: usize, j: usize, c: Fe| {
            let mut m = Mat::zeros(2, 2);
            m.set(i, j, c);
            m
        };
        let mut gens = BTreeMap::new();
        for side in 0..2u8 {
            let s = side as usize;
            gens.insert(Label::T { side, k: 0 }, unit(s, s, Fe::ONE));
            let (ta, tai) = g.t[s];
            gens.insert(Label::T { side, k: 1 }, unit(s, s, ta));
            gens.insert(Label::T { side, k: -1 }, unit(s, s, tai));
        }
        // S_{n,χ^s} reads w1 (the χ summand) and writes w2'.
        gens.insert(Label::S { side: 1, n: 0 }, unit(0, 1, g.s_from_w1.0));
        gens.insert(Label::S { side: 1, n: -1 }, unit(0, 1, g.s_from_w1.1));
        gens.insert(Label::S { side: 0, n: 0 }, unit(1, 0, g.s_from_w2.0));
        gens.insert(Label::S { side: 0, n: -1 }, unit(1, 0, g.s_from_w2.1));
        SimpleModule { chi: self.chi, case: self.case, kind, dim: 2, gens }
    }

    /// The algebra with the two summands swapped: `χ^s` becomes the first.
    pub fn flipped(&self) -> BlockAlgebra {
        let mut b = BlockAlgebra::new(self.chi_s, self.p, self.q, self.field.clone());
        b.word_window = self.word_window;
        b.regular_window = self.regular_window;
        b
    }
}

/// Side swap on regular labels; the identity on words.
pub fn flip_label(l: Label) -> Label {
    match l {
        Label::T { side, k } => Label::T { side: 1 - side, k },
        Label::S { side, n } => Label::S { side: 1 - side, n },
        w => w,
    }
}

/// Scalars of the regular two-dimensional modules on the basis `{w1, w2'}`.
struct RegularGens {
    /// `t[i] = (T_α, T_{α⁻¹})` on side `i`: `w1` for `χ`, `w2'` for `χ^s`.
    t: [(Fe, Fe); 2],
    /// `(S_{0,χ^s}, S_{-1,χ^s})` coefficients of `w1 ↦ w2'`.
    s_from_w1: (Fe, Fe),
    /// `(S_{0,χ}, S_{-1,χ})` coefficients of `w2' ↦ w1`.
    s_from_w2: (Fe, Fe),
}

impl RegularGens {
    fn new() -> RegularGens {
        RegularGens { t: [(Fe::ZERO, Fe::ZERO); 2], s_from_w1: (Fe::ZERO, Fe::ZERO), s_from_w2: (Fe::ZERO, Fe::ZERO) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ModuleKind {
    Character { theta: Fe, theta_prime: Fe },
    Mu(u8),
    M(Fe),
    Pair(Fe, Fe),
}

/// A finite-dimensional module, stored through the images of generating
/// labels (row-vector convention: `v·T = v R(T)`).
#[derive(Clone, Debug)]
pub struct SimpleModule {
    pub chi: TorusChar,
    pub case: CharCase,
    pub kind: ModuleKind,
    pub dim: usize,
    pub gens: BTreeMap<Label, Mat>,
}

impl SimpleModule {
    fn gen(&self, l: Label) -> Result<&Mat, BlockError> {
        self.gens.get(&l).ok_or_else(|| BlockError::WrongLabel(l.to_string(), self.case.name()))
    }

    /// Matrix of a basis label.
    pub fn action(&self, alg: &BlockAlgebra, l: Label) -> Result<Mat, BlockError> {
        let f = &alg.field;
        alg.check_label(l)?;
        match l {
            Label::Word { .. } => {
                let mut m = Mat::identity(self.dim);
                for g in l.letters() {
                    m = m.mul(f, self.gen(Label::word(g, 1))?);
                }
                Ok(m)
            }
            Label::T { side, k } => {
                let base = if k == 0 { self.gen(l)? } else { self.gen(Label::T { side, k: k.signum() })? };
                Ok(if k == 0 { base.clone() } else { base.pow(f, k.unsigned_abs()) })
            }
            Label::S { side, n } => {
                let (start, step, e) = if n >= 0 { (0, 1, n) } else { (-1, -1, -n - 1) };
                let s = self.gen(Label::S { side, n: start })?;
                let t = self.gen(Label::T { side, k: step })?;
                Ok(s.mul(f, &t.pow(f, e as u64)))
            }
        }
    }

    pub fn act(&self, alg: &BlockAlgebra, x: &BlockElem) -> Result<Mat, BlockError> {
        let f = &alg.field;
        let mut m = Mat::zeros(self.dim, self.dim);
        for (&l, &c) in &x.terms {
            m = m.axpy(f, c, &self.action(alg, l)?);
        }
        Ok(m)
    }

    /// `R(a)R(b) = R(ab)` for all pairs of labels from `domain`.
    pub fn respects_relations(&self, alg: &BlockAlgebra, domain: &[Label]) -> Result<bool, BlockError> {
        let f = &alg.field;
        let mats: Vec<Mat> = domain.iter().map(|&l| self.action(alg, l)).collect::<Result<_, _>>()?;
        for (i, &a) in domain.iter().enumerate() {
            for (j, &b) in domain.iter().enumerate() {
                let lhs = mats[i].mul(f, &mats[j]);
                let rhs = self.act(alg, &alg.mul_labels(a, b)?)?;
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
        // the unit acts as the identity
        Ok(self.act(alg, &alg.one())? == Mat::identity(self.dim))
    }

    /// Values of the centre generators, if each acts by a scalar.
    pub fn center_character(&self, alg: &BlockAlgebra) -> Result<Option<Vec<Fe>>, BlockError> {
        let mut out = Vec::new();
        for z in alg.center_generators()? {
            let m = self.act(alg, &z)?;
            let c = m.get(0, 0);
            if m != Mat::scalar(self.dim, c) {
                return Ok(None);
            }
            out.push(c);
        }
        Ok(Some(out))
    }

    /// All non-idempotent centre generators act by zero.
    pub fn is_supersingular(&self, alg: &BlockAlgebra) -> Result<bool, BlockError> {
        if !alg.is_char_p() {
            return Err(BlockError::NotCharP);
        }
        for z in alg.center_generators()? {
            if !self.act(alg, &z)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn generator_mats(&self) -> Vec<Mat> {
        self.gens.values().cloned().collect()
    }

    /// Dimension of the span of the image algebra.
    pub fn burnside_dim(&self, f: &Field) -> usize {
        algebra_span_dim(f, self.dim, &self.generator_mats())
    }

    /// Simple by the density criterion: the image is all of `M_n`.
    pub fn is_simple_burnside(&self, f: &Field) -> bool {
        self.burnside_dim(f) == self.dim * self.dim
    }

    /// Common invariant lines, found by brute force over the projective line.
    pub fn invariant_lines(&self, f: &Field) -> Vec<Vec<Fe>> {
        common_invariant_lines(f, self.dim, &self.generator_mats())
    }

    pub fn name(&self, f: &Field) -> String {
        match &self.kind {
            ModuleKind::Character { theta, theta_prime } => format!("μ_({},{})", f.display(*theta), f.display(*theta_prime)),
            ModuleKind::Mu(i) => format!("μ_{i}"),
            ModuleKind::M(l) => format!("M({})", f.display(*l)),
            ModuleKind::Pair(a, b) => format!("M({},{})", f.display(*a), f.display(*b)),
        }
    }
}

/// Dimension of the unital algebra generated by `gens` inside `M_n(F)`.
pub fn algebra_span_dim(f: &Field, n: usize, gens: &[Mat]) -> usize {
    let mut span = Subspace::new(n * n);
    let mut frontier = vec![Mat::identity(n)];
    span.insert(f, &frontier[0].data);
    while let Some(m) = frontier.pop() {
        for g in gens {
            let p = m.mul(f, g);
            if span.insert(f, &p.data) {
                frontier.push(p);
            }
        }
    }
    span.dim()
}

/// Lines `⟨v⟩` with `v R ∈ ⟨v⟩` for every `R` (row vectors). Dimension 2 only;
/// in dimension 1 the whole space is returned.
pub fn common_invariant_lines(f: &Field, n: usize, gens: &[Mat]) -> Vec<Vec<Fe>> {
    if n == 1 {
        return vec![vec![Fe::ONE]];
    }
    assert_eq!(n, 2, "line search is implemented for dimension 2");
    let mut candidates: Vec<Vec<Fe>> = vec![vec![Fe::ZERO, Fe::ONE]];
    candidates.extend(f.elements().map(|t| vec![Fe::ONE, t]));
    candidates
        .into_iter()
        .filter(|v| {
            gens.iter().all(|r| {
                let w = r.transpose().mul_vec(f, v);
                // w ∥ v  ⇔  det[v; w] = 0
                f.sub(f.mul(v[0], w[1]), f.mul(v[1], w[0])).is_zero()
            })
        })
        .collect()
}

/// Invertible `P` with `A_i P = P B_i` for all `i`, if one exists.
pub fn intertwiner(f: &Field, a: &[Mat], b: &[Mat]) -> Option<Mat> {
    let n = a.first()?.rows;
    let m = b.first()?.rows;
    if n != m {
        return None;
    }
    // unknown P (n×n), vectorised row-major: coefficient of P[r][c]
    let mut eqs: Vec<Vec<Fe>> = Vec::new();
    for (ai, bi) in a.iter().zip(b) {
        for i in 0..n {
            for j in 0..n {
                let mut row = vec![Fe::ZERO; n * n];
                for k in 0..n {
                    // (A P)_{ij} = Σ_k A_ik P_kj
                    row[k * n + j] = f.add(row[k * n + j], ai.get(i, k));
                    // (P B)_{ij} = Σ_k P_ik B_kj
                    row[i * n + k] = f.sub(row[i * n + k], bi.get(k, j));
                }
                eqs.push(row);
            }
        }
    }
    let sys = Mat::from_rows(&eqs);
    let null = sys.nullspace(f);
    let try_vec = |v: &Vec<Fe>| {
        let p = Mat { rows: n, cols: n, data: v.clone() };
        p.inverse(f).map(|_| p)
    };
    for v in &null {
        if let Some(p) = try_vec(v) {
            return Some(p);
        }
    }
    // pairwise sums cover the small kernels met here
    for i in 0..null.len() {
        for j in i + 1..null.len() {
            let v: Vec<Fe> = null[i].iter().zip(&null[j]).map(|(&x, &y)| f.add(x, y)).collect();
            if let Some(p) = try_vec(&v) {
                return Some(p);
            }
        }
    }
    None
}

/// `M` and `N` are isomorphic through an explicit intertwiner on `labels`.
pub fn isomorphic(alg: &BlockAlgebra, m: &SimpleModule, n: &SimpleModule, labels: &[Label]) -> Result<bool, BlockError> {
    if m.dim != n.dim {
        return Ok(false);
    }
    let a: Vec<Mat> = labels.iter().map(|&l| m.action(alg, l)).collect::<Result<_, _>>()?;
    let b: Vec<Mat> = labels.iter().map(|&l| n.action(alg, l)).collect::<Result<_, _>>()?;
    Ok(intertwiner(&alg.field, &a, &b).is_some())
}

/// Labels whose images generate any module of the block.
pub fn generating_labels(alg: &BlockAlgebra) -> Vec<Label> {
    if alg.case == CharCase::Regular {
        let mut out = Vec::new();
        for side in 0..2u8 {
            for k in [0, 1, -1] {
                out.push(Label::T { side, k });
            }
            for n in [0, -1] {
                out.push(Label::S { side, n });
            }
        }
        out
    } else {
        vec![Label::word(Gen::S, 1), Label::word(Gen::SPrime, 1)]
    }
}

// ---- classification ----------------------------------------------------------

/// Parameters excluded from the two-dimensional family by the closed-form
/// criterion. Regular blocks in characteristic `p` exclude only `(0,0)`.
pub fn excluded_parameters(alg: &BlockAlgebra) -> Vec<Fe> {
    let f = &alg.field;
    let q = alg.q as i64;
    match alg.case {
        CharCase::Trivial => {
            if f.from_i64(q.pow(3) + 1).is_zero() {
                vec![f.from_i64(q)]
            } else {
                dedup(vec![f.from_i64(q.pow(3) + q + 1), f.from_i64(-q.pow(4))])
            }
        }
        CharCase::Hybrid => {
            if alg.is_char_p() {
                vec![Fe::ZERO]
            } else {
                dedup(vec![f.from_i64(q.pow(3) + q), f.from_i64(-2 * q * q)])
            }
        }
        CharCase::Regular => Vec::new(),
    }
}

fn dedup(mut v: Vec<Fe>) -> Vec<Fe> {
    v.sort();
    v.dedup();
    v
}

/// Parameters of the two-dimensional family at which the module has a
/// common invariant line, found by sweeping the whole coefficient field.
/// The density criterion is evaluated alongside; `agree` records that both
/// routes classify every parameter the same way.
#[derive(Clone, Debug, Serialize)]
pub struct ReducibilitySweep {
    pub reducible: Vec<String>,
    pub formula: Vec<String>,
    pub agree: bool,
    pub matches_formula: bool,
    pub swept: usize,
}

pub fn reducibility_sweep(alg: &BlockAlgebra) -> Result<ReducibilitySweep, BlockError> {
    let f = &alg.field;
    let mut reducible = Vec::new();
    let mut agree = true;
    let mut swept = 0;
    let mut record = |m: SimpleModule, key: String| {
        swept += 1;
        let lines = !m.invariant_lines(f).is_empty();
        let dense = m.is_simple_burnside(f);
        if lines == dense {
            agree = false;
        }
        if lines {
            reducible.push(key);
        }
    };
    let formula: Vec<String>;
    match alg.case {
        CharCase::Trivial | CharCase::Hybrid => {
            for l in f.elements() {
                record(alg.module_m(l)?, f.display(l));
            }
            formula = excluded_parameters(alg).iter().map(|&x| f.display(x)).collect();
        }
        CharCase::Regular if alg.is_char_p() => {
            for l in f.elements() {
                record(alg.module_pair(l, Fe::ZERO)?, format!("({},0)", f.display(l)));
                if !l.is_zero() {
                    record(alg.module_pair(Fe::ZERO, l)?, format!("(0,{})", f.display(l)));
                }
            }
            formula = vec!["(0,0)".to_string()];
        }
        CharCase::Regular => {
            for l in f.elements().filter(|l| !l.is_zero()) {
                record(alg.module_m(l)?, f.display(l));
            }
            formula = Vec::new();
        }
    }
    let mut a = reducible.clone();
    let mut b = formula.clone();
    a.sort();
    b.sort();
    Ok(ReducibilitySweep { matches_formula: a == b, reducible, formula, agree, swept })
}

/// Simple modules of a block: the characters and the admissible part of
/// the two-dimensional family, described by its excluded parameters.
#[derive(Clone, Debug)]
pub struct BlockCatalog {
    pub characters: Vec<SimpleModule>,
    pub family: FamilyKind,
    pub excluded: Vec<Fe>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    /// `M(λ)`, `λ ∈ C` minus the excluded values.
    M,
    /// `M(λ)`, `λ ∈ C^×`.
    MUnit,
    /// `M(λ, λ')`, `λλ' = 0`, `(λ,λ') ≠ (0,0)`.
    Pair,
}

pub fn classify_simples(alg: &BlockAlgebra) -> Result<BlockCatalog, BlockError> {
    let characters = match alg.case {
        CharCase::Trivial | CharCase::Hybrid => {
            alg.character_params().into_iter().map(|(t, tp)| alg.character(t, tp)).collect::<Result<_, _>>()?
        }
        CharCase::Regular if alg.is_char_p() => vec![alg.mu(0)?, alg.mu(1)?],
        CharCase::Regular => Vec::new(),
    };
    let family = match alg.case {
        CharCase::Regular if alg.is_char_p() => FamilyKind::Pair,
        CharCase::Regular => FamilyKind::MUnit,
        _ => FamilyKind::M,
    };
    Ok(BlockCatalog { characters, family, excluded: excluded_parameters(alg) })
}

impl BlockCatalog {
    /// Every member of the two-dimensional family over the coefficient field.
    pub fn family_members(&self, alg: &BlockAlgebra) -> Result<Vec<SimpleModule>, BlockError> {
        let f = &alg.field;
        let mut out = Vec::new();
        match self.family {
            FamilyKind::M => {
                for l in f.elements().filter(|l| !self.excluded.contains(l)) {
                    out.push(alg.module_m(l)?);
                }
            }
            FamilyKind::MUnit => {
                for l in f.elements().filter(|l| !l.is_zero()) {
                    out.push(alg.module_m(l)?);
                }
            }
            FamilyKind::Pair => {
                for l in f.elements().filter(|l| !l.is_zero()) {
                    out.push(alg.module_pair(l, Fe::ZERO)?);
                    out.push(alg.module_pair(Fe::ZERO, l)?);
                }
            }
        }
        Ok(out)
    }
}

// ---- supersingular modules ----------------------------------------------------

/// One supersingular module `M_{χ,𝐉}`.
#[derive(Clone, Debug, Serialize)]
pub struct SupersingularEntry {
    pub r: u64,
    pub c: u64,
    pub case: &'static str,
    pub j: &'static str,
    pub t_s: i64,
    pub t_s_prime: i64,
    pub verified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SupersingularReport {
    pub q: u64,
    pub p: u64,
    pub entries: Vec<SupersingularEntry>,
    pub det_type: usize,
    pub hybrid: usize,
    pub regular: usize,
    pub total: usize,
    /// `p²(p+1)`, the lower bound quoted for comparison.
    pub claimed_lower_bound: u64,
    /// The enumerated count differs from `p²(p+1)`.
    pub mismatch: bool,
}

/// Lists `M_{χ,𝐉}` for every `χ` and checks each against the centre.
pub fn enumerate_supersingular(p: u64, q: u64, field: &Field) -> Result<SupersingularReport, BlockError> {
    let mut entries = Vec::new();
    let (mut det_type, mut hybrid, mut regular) = (0, 0, 0);
    for chi in TorusChar::all(q) {
        let alg = BlockAlgebra::new(chi, p, q, field.clone());
        if !alg.is_char_p() {
            return Err(BlockError::NotCharP);
        }
        let f = &alg.field;
        let specs: Vec<(&'static str, i64, i64)> = match alg.case {
            CharCase::Trivial => vec![("(S,∅)", 0, -1), ("(∅,S')", -1, 0)],
            CharCase::Hybrid => vec![("(∅,S')", 0, 0), ("(∅,∅)", 0, -1)],
            CharCase::Regular => vec![("(∅,∅)", 0, 0)],
        };
        for (j, ts, tp) in specs {
            let m = if alg.case == CharCase::Regular { alg.mu(0)? } else { alg.character(f.from_i64(ts), f.from_i64(tp))? };
            let domain = alg.basis_labels(2);
            let verified = m.respects_relations(&alg, &domain)? && m.is_supersingular(&alg)?;
            match alg.case {
                CharCase::Trivial => det_type += 1,
                CharCase::Hybrid => hybrid += 1,
                CharCase::Regular => regular += 1,
            }
            entries.push(SupersingularEntry { r: chi.r, c: chi.c, case: alg.case.name(), j, t_s: ts, t_s_prime: tp, verified });
        }
    }
    let total = entries.len();
    let claimed = p * p * (p + 1);
    Ok(SupersingularReport {
        q,
        p,
        entries,
        det_type,
        hybrid,
        regular,
        total,
        claimed_lower_bound: claimed,
        mismatch: total as u64 != claimed,
    })
}

// ---- structural checks ---------------------------------------------------------

/// Associativity `(ab)c = a(bc)` over all triples from `domain`.
pub fn check_associativity(alg: &BlockAlgebra, domain: &[Label]) -> Result<bool, BlockError> {
    for &a in domain {
        for &b in domain {
            let ab = alg.mul_labels(a, b)?;
            for &c in domain {
                let bc = alg.mul_labels(b, c)?;
                let lhs = alg.mul(&ab, &alg.basis(c))?;
                let rhs = alg.mul(&alg.basis(a), &bc)?;
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Each centre generator commutes with every label in `domain`.
pub fn check_center(alg: &BlockAlgebra, domain: &[Label]) -> Result<bool, BlockError> {
    for z in alg.center_generators()? {
        for &l in domain {
            let b = alg.basis(l);
            if alg.mul(&z, &b)? != alg.mul(&b, &z)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The quadratic relations of `T_{n_s}` and `T_{n_{s'}}` on the whole block.
pub fn check_quadratic(alg: &BlockAlgebra) -> Result<bool, BlockError> {
    let f = &alg.field;
    let one = alg.one();
    for (t, g) in [(alg.t_s(), Gen::S), (alg.t_s_prime(), Gen::SPrime)] {
        let sq = alg.mul(&t, &t)?;
        let expect = if alg.case == CharCase::Regular {
            let e = if g == Gen::S { 3 } else { 1 };
            alg.scale(f.mul(alg.zeta, alg.qpow(e)), &one)
        } else {
            let (a, b) = alg.quadratic(g);
            alg.add(&alg.scale(a, &t), &alg.scale(b, &one))
        };
        if sq != expect {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The span of products of `T_{n_s}e_·`, `T_{n_{s'}}e_·` and the idempotents,
/// up to `depth` factors, contains every label of `target`.
pub fn check_generation(alg: &BlockAlgebra, target: &[Label], depth: usize) -> Result<bool, BlockError> {
    let mut gens = vec![alg.t_s(), alg.t_s_prime()];
    if alg.case == CharCase::Regular {
        let mut split = Vec::new();
        for side in 0..2u8 {
            let e = alg.idempotent(side);
            split.push(e.clone());
            for g in &gens {
                split.push(alg.mul(g, &e)?);
            }
        }
        gens = split;
    } else {
        gens.push(alg.one());
    }
    let all = alg.basis_labels(alg.regular_window.max(alg.word_window as i64));
    let index: BTreeMap<Label, usize> = all.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let f = &alg.field;
    let to_vec = |e: &BlockElem| -> Option<Vec<Fe>> {
        let mut v = vec![Fe::ZERO; all.len()];
        for (l, &c) in &e.terms {
            v[*index.get(l)?] = c;
        }
        Some(v)
    };
    let mut span = Subspace::new(all.len());
    let mut layer = gens.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for x in &layer {
            if let Some(v) = to_vec(x) {
                if span.insert(f, &v) {
                    for g in &gens {
                        match alg.mul(x, g) {
                            Ok(y) => next.push(y),
                            Err(BlockError::WindowOverflow(_)) => {}
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
        layer = next;
    }
    Ok(target.iter().all(|l| to_vec(&alg.basis(*l)).is_some_and(|v| span.contains(f, &v))))
}

// ---- twisted matrix algebra (characteristic p) -------------------------------------

/// Basis monomials of `M₂` with entries `C[X,Y]/(XY)` on the diagonal,
/// `C[X] ⊕ C[Y]` at (1,2) and `C[Y] ⊕ C[X]` at (2,1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TwistKey {
    /// Corner `i`, monomial `X^e` (`x = true`) or `Y^e`; `e = 0` is `1`.
    Diag { corner: u8, x: bool, e: u32 },
    /// (1,2) entry; `first` is the `C[X]` component.
    Upper { first: bool, e: u32 },
    /// (2,1) entry; `first` is the `C[Y]` component.
    Lower { first: bool, e: u32 },
}

fn diag_key(corner: u8, x: bool, e: u32) -> TwistKey {
    TwistKey::Diag { corner, x: x || e == 0, e }
}

/// Image of a regular label.
pub fn twist_image(l: Label) -> Option<TwistKey> {
    Some(match l {
        Label::T { side: 0, k } => diag_key(0, k < 0, k.unsigned_abs() as u32),
        Label::T { side: 1, k } => diag_key(1, k > 0, k.unsigned_abs() as u32),
        Label::S { side: 0, n } if n >= 0 => TwistKey::Lower { first: true, e: n as u32 },
        Label::S { side: 0, n } => TwistKey::Lower { first: false, e: (-n - 1) as u32 },
        Label::S { side: 1, n } if n >= 0 => TwistKey::Upper { first: true, e: n as u32 },
        Label::S { side: 1, n } => TwistKey::Upper { first: false, e: (-n - 1) as u32 },
        _ => return None,
    })
}

/// Product of two monomials: `None` for zero, otherwise `(ζ-power, key)`.
pub fn twist_mul(a: TwistKey, b: TwistKey) -> Option<(bool, TwistKey)> {
    use TwistKey::*;
    // multiply a polynomial monomial on either side of an off-diagonal pair
    let act = |is_x_component: bool, e: u32, hx: bool, he: u32| -> Option<u32> {
        if he == 0 {
            Some(e)
        } else if hx == is_x_component {
            Some(e + he)
        } else {
            None
        }
    };
    match (a, b) {
        (Diag { corner: i, x: ax, e: ae }, Diag { corner: j, x: bx, e: be }) if i == j => {
            if ae == 0 {
                Some((false, b))
            } else if be == 0 {
                Some((false, a))
            } else if ax == bx {
                Some((false, diag_key(i, ax, ae + be)))
            } else {
                None
            }
        }
        // (2,1)·(1,1) and (2,2)·(2,1)
        (Lower { first, e }, Diag { corner: 0, x, e: he }) | (Diag { corner: 1, x, e: he }, Lower { first, e }) => {
            act(!first, e, x, he).map(|e| (false, Lower { first, e }))
        }
        // (1,2)·(2,2) and (1,1)·(1,2)
        (Upper { first, e }, Diag { corner: 1, x, e: he }) | (Diag { corner: 0, x, e: he }, Upper { first, e }) => {
            act(first, e, x, he).map(|e| (false, Upper { first, e }))
        }
        // (f, f')(g', g) = ζ X f g + ζ Y f' g'
        (Upper { first: fa, e: ea }, Lower { first: fb, e: eb }) => {
            (fa != fb).then(|| (true, diag_key(0, fa, ea + eb + 1)))
        }
        (Lower { first: fb, e: eb }, Upper { first: fa, e: ea }) => {
            (fa != fb).then(|| (true, diag_key(1, fa, ea + eb + 1)))
        }
        _ => None,
    }
}

/// The label product agrees with the twisted matrix algebra on all pairs
/// from `domain` (characteristic `p`, regular block).
pub fn check_twisted_matrix_algebra(alg: &BlockAlgebra, domain: &[Label]) -> Result<bool, BlockError> {
    if !alg.is_char_p() {
        return Err(BlockError::NotCharP);
    }
    let back: BTreeMap<TwistKey, Label> = alg.basis_labels(alg.regular_window).into_iter().filter_map(|l| twist_image(l).map(|k| (k, l))).collect();
    for &a in domain {
        for &b in domain {
            let lhs = alg.mul_labels(a, b)?;
            let (ka, kb) = (twist_image(a).unwrap(), twist_image(b).unwrap());
            let rhs = match twist_mul(ka, kb) {
                None => alg.zero(),
                Some((z, k)) => {
                    let l = *back.get(&k).ok_or_else(|| BlockError::WindowOverflow(format!("{k:?}")))?;
                    alg.scaled(if z { alg.zeta } else { Fe::ONE }, l)
                }
            };
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---- catalog -------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct CatalogRow {
    pub r: u64,
    pub c: u64,
    pub case: &'static str,
    pub kind: String,
    pub parameters: String,
    pub supersingular: Option<bool>,
    pub center_character: String,
}

/// One row per character and one per two-dimensional family, over every
/// block (regular blocks keyed by their canonical character).
pub fn catalog_rows(p: u64, q: u64, field: &Field) -> Result<Vec<CatalogRow>, BlockError> {
    let mut rows = Vec::new();
    for chi in TorusChar::all(q) {
        if canonical(chi, q) != chi {
            continue;
        }
        let alg = BlockAlgebra::new(chi, p, q, field.clone());
        let f = &alg.field;
        let cat = classify_simples(&alg)?;
        for m in &cat.characters {
            let cc = m.center_character(&alg)?.unwrap_or_default();
            rows.push(CatalogRow {
                r: chi.r,
                c: chi.c,
                case: alg.case.name(),
                kind: "character".into(),
                parameters: m.name(f),
                supersingular: alg.is_char_p().then(|| m.is_supersingular(&alg)).transpose()?,
                center_character: cc.iter().map(|&x| f.display(x)).collect::<Vec<_>>().join(";"),
            });
        }
        let excluded: Vec<String> = cat.excluded.iter().map(|&x| f.display(x)).collect();
        let (kind, params, center) = match cat.family {
            FamilyKind::M => ("M(λ)", format!("λ ∉ {{{}}}", excluded.join(",")), "λ"),
            FamilyKind::MUnit => ("M(λ)", "λ ≠ 0".to_string(), "λ;q⁴/λ"),
            FamilyKind::Pair => ("M(λ,λ')", "λλ' = 0, (λ,λ') ≠ (0,0)".to_string(), "λ;λ'"),
        };
        rows.push(CatalogRow {
            r: chi.r,
            c: chi.c,
            case: alg.case.name(),
            kind: kind.into(),
            parameters: params,
            supersingular: alg.is_char_p().then_some(false),
            center_character: center.into(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi_of(q: u64, case: CharCase) -> TorusChar {
        TorusChar::all(q).into_iter().find(|c| c.case(q) == case).unwrap()
    }

    fn block(case: CharCase, ell: u64, m: u32) -> BlockAlgebra {
        BlockAlgebra::new(chi_of(3, case), 3, 3, Field::new(ell, m, 0).unwrap())
    }

    #[test]
    fn trivial_block_quadratic_relation() {
        let alg = block(CharCase::Trivial, 5, 1);
        let t = alg.t_s();
        let sq = alg.mul(&t, &t).unwrap();
        let f = &alg.field;
        // (q³-1) T_s + q³
        assert_eq!(sq.coeff(Label::word(Gen::S, 1)), f.from_i64(26));
        assert_eq!(sq.coeff(Label::ONE_WORD), f.from_i64(27));
        for case in [CharCase::Trivial, CharCase::Hybrid, CharCase::Regular] {
            for (ell, m) in [(3, 2), (5, 1), (7, 2)] {
                assert!(check_quadratic(&block(case, ell, m)).unwrap());
            }
        }
    }

    #[test]
    fn regular_products_from_the_tables() {
        let alg = block(CharCase::Regular, 7, 1);
        let f = &alg.field;
        let s0s = Label::S { side: 1, n: 0 };
        let s0 = Label::S { side: 0, n: 0 };
        let prod = alg.mul_labels(s0s, s0).unwrap();
        assert_eq!(prod.coeff(Label::T { side: 0, k: 0 }), f.mul(alg.zeta, f.from_i64(27)));
        let p = alg.mul_labels(s0, Label::T { side: 0, k: 1 }).unwrap();
        assert_eq!(p, alg.basis(Label::S { side: 0, n: 1 }));
        let charp = block(CharCase::Regular, 3, 2);
        assert!(charp.mul_labels(s0s, s0).unwrap().is_zero());
        assert!(matches!(alg.mul_labels(Label::S { side: 0, n: 4 }, Label::T { side: 0, k: 1 }), Err(BlockError::WindowOverflow(_))));
    }

    #[test]
    fn associativity_on_small_windows() {
        for (ell, m) in [(3, 2), (5, 1)] {
            for case in [CharCase::Trivial, CharCase::Hybrid] {
                let alg = block(case, ell, m);
                assert!(check_associativity(&alg, &alg.basis_labels(2)).unwrap());
            }
            let alg = block(CharCase::Regular, ell, m);
            assert!(check_associativity(&alg, &alg.basis_labels(1)).unwrap());
        }
    }

    #[test]
    fn center_commutes_and_matches_simplified_form() {
        for (ell, m) in [(3, 2), (5, 1)] {
            for case in [CharCase::Trivial, CharCase::Hybrid] {
                let alg = block(case, ell, m);
                assert!(check_center(&alg, &alg.basis_labels(6)).unwrap());
            }
            let alg = block(CharCase::Regular, ell, m);
            assert!(check_center(&alg, &alg.basis_labels(3)).unwrap());
            let z = alg.center_generators().unwrap();
            let z1 = alg.add(&alg.basis(Label::T { side: 0, k: 1 }), &alg.basis(Label::T { side: 1, k: -1 }));
            let z2 = alg.add(&alg.basis(Label::T { side: 0, k: -1 }), &alg.basis(Label::T { side: 1, k: 1 }));
            assert_eq!(z, vec![z1, z2]);
        }
    }

    #[test]
    fn twisted_matrix_algebra_matches() {
        let alg = block(CharCase::Regular, 3, 2);
        assert!(check_twisted_matrix_algebra(&alg, &alg.basis_labels(2)).unwrap());
        let other = BlockAlgebra::new(TorusChar::new(3, 1, 0), 3, 3, Field::new(3, 2, 0).unwrap());
        assert_eq!(other.case, CharCase::Regular);
        assert_eq!(other.zeta, other.field.from_i64(-1));
        assert!(check_twisted_matrix_algebra(&other, &other.basis_labels(2)).unwrap());
    }

    #[test]
    fn modules_respect_relations_and_central_characters() {
        for (ell, m) in [(3, 2), (5, 1), (7, 1)] {
            for case in [CharCase::Trivial, CharCase::Hybrid, CharCase::Regular] {
                let alg = block(case, ell, m);
                let f = alg.field.clone();
                let domain = alg.basis_labels(2);
                let cat = classify_simples(&alg).unwrap();
                for md in cat.characters.iter().chain(cat.family_members(&alg).unwrap().iter()) {
                    assert!(md.respects_relations(&alg, &domain).unwrap(), "{}", md.name(&f));
                    let cc = md.center_character(&alg).unwrap().expect("central character");
                    match md.kind {
                        ModuleKind::M(l) if case != CharCase::Regular => assert_eq!(cc, vec![l]),
                        ModuleKind::M(l) => assert_eq!(cc, vec![l, f.mul(alg.qpow(4), f.inv(l).unwrap())]),
                        ModuleKind::Pair(a, b) => assert_eq!(cc, vec![a, b]),
                        _ => {}
                    }
                }
            }
        }
    }

    #[test]
    fn reducibility_loci_match_closed_forms() {
        // trivial: char 5 gives {31, -81} = {1, 4}; char 7 has q³+1 = 0
        for (case, ell, m) in [
            (CharCase::Trivial, 5, 1),
            (CharCase::Trivial, 5, 2),
            (CharCase::Trivial, 7, 1),
            (CharCase::Trivial, 7, 2),
            (CharCase::Hybrid, 5, 1),
            (CharCase::Hybrid, 13, 1),
            (CharCase::Hybrid, 3, 2),
            (CharCase::Hybrid, 3, 4),
            (CharCase::Regular, 3, 2),
            (CharCase::Regular, 3, 4),
            (CharCase::Regular, 5, 1),
        ] {
            let alg = block(case, ell, m);
            let sweep = reducibility_sweep(&alg).unwrap();
            assert!(sweep.agree, "{case:?} F_{ell}^{m}");
            assert!(sweep.matches_formula, "{case:?} F_{ell}^{m}: {:?} vs {:?}", sweep.reducible, sweep.formula);
        }
        let alg = block(CharCase::Trivial, 5, 1);
        let f = &alg.field;
        assert_eq!(excluded_parameters(&alg), dedup(vec![f.from_i64(1), f.from_i64(4)]));
    }

    #[test]
    fn split_reducible_modules() {
        // q³+1 = 0 in F_7: M(q) = μ_{-1,q} ⊕ μ_{-1,-1}
        let alg = block(CharCase::Trivial, 7, 1);
        let f = alg.field.clone();
        let m = alg.module_m(f.from_i64(3)).unwrap();
        assert_eq!(m.invariant_lines(&f).len(), 2);
        // char p regular: M(0,0) = μ₀ ⊕ μ₁
        let alg = block(CharCase::Regular, 3, 2);
        let f = alg.field.clone();
        let m = alg.module_pair(Fe::ZERO, Fe::ZERO).unwrap();
        let lines = m.invariant_lines(&f);
        assert_eq!(lines, vec![vec![Fe::ZERO, Fe::ONE], vec![Fe::ONE, Fe::ZERO]]);
        let gens = generating_labels(&alg);
        let restrict = |v: &[Fe]| -> Vec<Fe> {
            gens.iter().map(|&l| {
                let r = m.action(&alg, l).unwrap();
                let w = r.transpose().mul_vec(&f, v);
                if v[0].is_zero() { w[1] } else { w[0] }
            }).collect()
        };
        let mu = |i: u8| -> Vec<Fe> { gens.iter().map(|&l| alg.mu(i).unwrap().action(&alg, l).unwrap().get(0, 0)).collect() };
        assert_eq!(restrict(&lines[1]), mu(0));
        assert_eq!(restrict(&lines[0]), mu(1));
    }

    #[test]
    fn supersingular_predicate_values() {
        let alg = block(CharCase::Trivial, 3, 2);
        let f = alg.field.clone();
        let ss = |t: i64, tp: i64| alg.character(f.from_i64(t), f.from_i64(tp)).unwrap().is_supersingular(&alg).unwrap();
        assert!(ss(0, -1));
        assert!(ss(-1, 0));
        assert!(!ss(-1, -1));
        assert!(!ss(0, 0));
        let reg = block(CharCase::Regular, 3, 2);
        let g = reg.field.clone();
        assert!(!reg.module_pair(g.from_i64(2), Fe::ZERO).unwrap().is_supersingular(&reg).unwrap());
        assert!(reg.mu(0).unwrap().is_supersingular(&reg).unwrap());
        let not_p = block(CharCase::Trivial, 5, 1);
        let h = not_p.field.clone();
        assert_eq!(not_p.character(h.from_i64(-1), h.from_i64(-1)).unwrap().is_supersingular(&not_p), Err(BlockError::NotCharP));
    }

    #[test]
    fn supersingular_enumeration_at_three() {
        let rep = enumerate_supersingular(3, 3, &Field::new(3, 2, 0).unwrap()).unwrap();
        assert_eq!(rep.det_type, 8);
        assert_eq!(rep.hybrid, 24);
        assert_eq!(rep.regular, 16);
        assert_eq!(rep.total, 48);
        assert_eq!(rep.claimed_lower_bound, 36);
        assert!(rep.mismatch);
        assert!(rep.entries.iter().all(|e| e.verified));
    }

    #[test]
    fn base_change_swaps_parameters() {
        let alg = block(CharCase::Regular, 3, 2);
        let flip = alg.flipped();
        let f = alg.field.clone();
        let labels = generating_labels(&alg);
        let flipped_labels: Vec<Label> = labels.iter().map(|&l| flip_label(l)).collect();
        for l in f.elements().filter(|l| !l.is_zero()) {
            for (a, b) in [(l, Fe::ZERO), (Fe::ZERO, l)] {
                let m = alg.module_pair(a, b).unwrap();
                let n = flip.module_pair(b, a).unwrap();
                let ma: Vec<Mat> = labels.iter().map(|&x| m.action(&alg, x).unwrap()).collect();
                let nb: Vec<Mat> = flipped_labels.iter().map(|&x| n.action(&flip, x).unwrap()).collect();
                assert!(intertwiner(&f, &ma, &nb).is_some());
                // and not with the unswapped parameters
                let wrong = flip.module_pair(a, b).unwrap();
                let wb: Vec<Mat> = flipped_labels.iter().map(|&x| wrong.action(&flip, x).unwrap()).collect();
                assert!(intertwiner(&f, &ma, &wb).is_none());
            }
        }
        let alg = block(CharCase::Regular, 7, 1);
        let flip = alg.flipped();
        let f = alg.field.clone();
        for l in f.elements().filter(|l| !l.is_zero()) {
            let m = alg.module_m(l).unwrap();
            let n = flip.module_m(f.mul(alg.qpow(4), f.inv(l).unwrap())).unwrap();
            let ma: Vec<Mat> = labels.iter().map(|&x| m.action(&alg, x).unwrap()).collect();
            let nb: Vec<Mat> = labels.iter().map(|&x| n.action(&flip, flip_label(x)).unwrap()).collect();
            assert!(intertwiner(&f, &ma, &nb).is_some());
        }
    }

    #[test]
    fn generators_span_the_window() {
        for (ell, m) in [(3, 2), (5, 1)] {
            for case in [CharCase::Trivial, CharCase::Hybrid] {
                let alg = block(case, ell, m);
                assert!(check_generation(&alg, &alg.basis_labels(4), 5).unwrap());
            }
            let alg = block(CharCase::Regular, ell, m);
            assert!(check_generation(&alg, &alg.basis_labels(2), 8).unwrap());
        }
    }

    #[test]
    fn catalog_has_one_family_row_per_block() {
        let rows = catalog_rows(3, 3, &Field::new(3, 2, 0).unwrap()).unwrap();
        let families = rows.iter().filter(|r| r.kind != "character").count();
        // 4 trivial + 12 hybrid + 8 regular orbits
        assert_eq!(families, 24);
    }
}
