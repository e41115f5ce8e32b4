//! The finite unitary groups `Γ = U(2,1)(F_{q²}/F_q)` and
//! `Γ' = (U(1,1) × U(1))(F_{q²}/F_q)` as groups of 3×3 matrices over the
//! residue field preserving the antidiagonal Hermitian form.
//!
//! `Γ'` sits inside the same ambient shape: its elements only have nonzero
//! entries at the corners and the centre, and its Borel `𝔹'` is the
//! *lower* triangular one. Every element has a canonical index obtained
//! from its Bruhat coordinates, so no element table is ever needed.

use crate::fieldtower::{Fe, Field, TorusElem, Tower};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("unsupported q = {0}")]
    UnsupportedQ(u64),
    #[error("matrix is not in the group")]
    NotInGroup,
    #[error("unipotent parameters violate x conj(x) + y + conj(y) = 0")]
    Constraint,
}

/// Which of the two finite reductive quotients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Which {
    Gamma,
    GammaPrime,
}

impl Which {
    pub fn name(self) -> &'static str {
        match self {
            Which::Gamma => "Gamma",
            Which::GammaPrime => "Gamma'",
        }
    }
}

/// Table-driven copy of `F_{q²}` with one-byte elements.
#[derive(Clone, Debug)]
pub struct Residue {
    pub q: u64,
    pub order: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    conj: Vec<u8>,
    log: Vec<u32>,
    exp: Vec<u8>,
    pub sqrt_eps: u8,
}

impl Residue {
    pub fn new(tower: &Tower) -> Residue {
        let f: &Field = &tower.residue;
        let n = f.order() as usize;
        assert!(n <= 256, "residue field too large for byte tables");
        let mut add = vec![0u8; n * n];
        let mut mul = vec![0u8; n * n];
        for a in 0..n {
            for b in 0..n {
                add[a * n + b] = f.add(Fe(a as u64), Fe(b as u64)).0 as u8;
                mul[a * n + b] = f.mul(Fe(a as u64), Fe(b as u64)).0 as u8;
            }
        }
        let neg = (0..n).map(|a| f.neg(Fe(a as u64)).0 as u8).collect();
        let inv = (0..n).map(|a| f.inv(Fe(a as u64)).map_or(0, |x| x.0 as u8)).collect();
        let conj = (0..n).map(|a| tower.conj(Fe(a as u64)).0 as u8).collect();
        let g = tower.res_gen();
        let mut exp = vec![0u8; n - 1];
        let mut log = vec![u32::MAX; n];
        let mut cur = Fe::ONE;
        for k in 0..n - 1 {
            exp[k] = cur.0 as u8;
            log[cur.0 as usize] = k as u32;
            cur = f.mul(cur, g);
        }
        Residue { q: tower.q, order: n, add, mul, neg, inv, conj, log, exp, sqrt_eps: tower.sqrt_eps().0 as u8 }
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.order + b as usize]
    }
    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg[b as usize])
    }
    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.order + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }
    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }
    #[inline]
    pub fn conj(&self, a: u8) -> u8 {
        self.conj[a as usize]
    }
    #[inline]
    pub fn div(&self, a: u8, b: u8) -> u8 {
        self.mul(a, self.inv(b))
    }
    /// Discrete logarithm to base `g`.
    #[inline]
    pub fn log(&self, a: u8) -> u64 {
        self.log[a as usize] as u64
    }
    /// `g^k`.
    #[inline]
    pub fn exp(&self, k: i64) -> u8 {
        self.exp[k.rem_euclid(self.order as i64 - 1) as usize]
    }
    pub fn norm(&self, a: u8) -> u8 {
        self.mul(a, self.conj(a))
    }
    /// Trace `a + conj(a)`.
    pub fn trace(&self, a: u8) -> u8 {
        self.add(a, self.conj(a))
    }
    /// Elements of `F_q`.
    pub fn base_field(&self) -> Vec<u8> {
        (0..self.order as u8).filter(|&a| self.conj(a) == a).collect()
    }
    pub fn from_int(&self, k: i64) -> u8 {
        // repeated addition keeps this independent of the element encoding
        let mut acc = 0u8;
        let one = self.exp(0);
        let m = k.rem_euclid(self.char_p() as i64);
        for _ in 0..m {
            acc = self.add(acc, one);
        }
        acc
    }
    pub fn char_p(&self) -> u64 {
        let one = self.exp(0);
        let mut acc = one;
        let mut k = 1;
        while acc != 0 {
            acc = self.add(acc, one);
            k += 1;
        }
        k
    }
}

pub type M3 = [u8; 9];

/// Element of `𝕌`: `u(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnipParam {
    pub x: u8,
    pub y: u8,
}

/// Bruhat coordinates. For `Γ`: `g = h u` or `g = u1 n_s h u2` with `u ∈ 𝕌`;
/// for `Γ'`: the same with `𝕌'` and the Weyl element `n'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Borel { h: TorusElem, u: usize },
    Big { u1: usize, h: TorusElem, u2: usize },
}

/// Both groups at a fixed `q`, with their unipotent radicals indexed.
#[derive(Clone, Debug)]
pub struct Groups {
    pub q: u64,
    pub rf: Residue,
    /// Elements of `𝕌` in a fixed order.
    pub unip: Vec<UnipParam>,
    unip_index: Vec<u32>,
    /// Parameters `c` of `𝕌' = { u⁻(0, c) : c + conj(c) = 0 }`.
    pub unip_prime: Vec<u8>,
    unip_prime_index: Vec<u32>,
    pub ns: M3,
    pub ns_inv: M3,
}

impl Groups {
    pub fn new(tower: &Tower) -> Result<Groups, GroupError> {
        let q = tower.q;
        if q * q > 256 {
            return Err(GroupError::UnsupportedQ(q));
        }
        let rf = Residue::new(tower);
        let n = rf.order;
        let mut unip = Vec::new();
        let mut unip_index = vec![u32::MAX; n * n];
        for x in 0..n as u8 {
            for y in 0..n as u8 {
                if rf.add(rf.norm(x), rf.trace(y)) == 0 {
                    unip_index[x as usize * n + y as usize] = unip.len() as u32;
                    unip.push(UnipParam { x, y });
                }
            }
        }
        let mut unip_prime = Vec::new();
        let mut unip_prime_index = vec![u32::MAX; n];
        for c in 0..n as u8 {
            if rf.trace(c) == 0 {
                unip_prime_index[c as usize] = unip_prime.len() as u32;
                unip_prime.push(c);
            }
        }
        let se = rf.sqrt_eps;
        let sei = rf.inv(se);
        let one = rf.exp(0);
        let ns = [0, 0, rf.neg(sei), 0, one, 0, se, 0, 0];
        let ns_inv = [0, 0, sei, 0, one, 0, rf.neg(se), 0, 0];
        Ok(Groups { q, rf, unip, unip_index, unip_prime, unip_prime_index, ns, ns_inv })
    }

    pub fn torus_order(&self) -> usize {
        ((self.q * self.q - 1) * (self.q + 1)) as usize
    }

    // ---- matrix arithmetic -------------------------------------------------

    pub fn identity(&self) -> M3 {
        let o = self.rf.exp(0);
        [o, 0, 0, 0, o, 0, 0, 0, o]
    }

    #[inline]
    pub fn mul(&self, a: &M3, b: &M3) -> M3 {
        let f = &self.rf;
        let mut r = [0u8; 9];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0u8;
                for k in 0..3 {
                    let x = a[3 * i + k];
                    let y = b[3 * k + j];
                    if x != 0 && y != 0 {
                        acc = f.add(acc, f.mul(x, y));
                    }
                }
                r[3 * i + j] = acc;
            }
        }
        r
    }

    pub fn mul_all(&self, ms: &[&M3]) -> M3 {
        ms.iter().fold(self.identity(), |acc, m| self.mul(&acc, m))
    }

    /// Conjugate transpose.
    pub fn star(&self, a: &M3) -> M3 {
        let mut r = [0u8; 9];
        for i in 0..3 {
            for j in 0..3 {
                r[3 * j + i] = self.rf.conj(a[3 * i + j]);
            }
        }
        r
    }

    /// `g⁻¹ = s g* s` for elements of the unitary group.
    pub fn inverse(&self, g: &M3) -> M3 {
        let st = self.star(g);
        let mut r = [0u8; 9];
        for i in 0..3 {
            for j in 0..3 {
                r[3 * i + j] = st[3 * (2 - i) + (2 - j)];
            }
        }
        r
    }

    /// `g* s g = s`.
    pub fn is_unitary(&self, g: &M3) -> bool {
        let st = self.star(g);
        let mut sg = [0u8; 9];
        for i in 0..3 {
            for j in 0..3 {
                sg[3 * i + j] = g[3 * (2 - i) + j];
            }
        }
        let prod = self.mul(&st, &sg);
        let one = self.rf.exp(0);
        (0..3).all(|i| (0..3).all(|j| prod[3 * i + j] == if i + j == 2 { one } else { 0 }))
    }

    /// Membership in `Γ'`: unitary with the corner-and-centre shape.
    pub fn in_gamma_prime(&self, g: &M3) -> bool {
        g[1] == 0 && g[3] == 0 && g[5] == 0 && g[7] == 0 && self.is_unitary(g)
    }

    pub fn contains(&self, which: Which, g: &M3) -> bool {
        match which {
            Which::Gamma => self.is_unitary(g),
            Which::GammaPrime => self.in_gamma_prime(g),
        }
    }

    pub fn diag(&self, a: u8, b: u8, c: u8) -> M3 {
        [a, 0, 0, 0, b, 0, 0, 0, c]
    }

    /// `diag(a, δ, conj(a)⁻¹)` for `a = g^i`, `δ = w^j`.
    pub fn torus(&self, h: TorusElem) -> M3 {
        let f = &self.rf;
        let q = self.q as i64;
        let a = f.exp(h.i as i64);
        let d = f.exp((q - 1) * h.j as i64);
        self.diag(a, d, f.inv(f.conj(a)))
    }

    /// Read a diagonal matrix as a torus element.
    pub fn torus_of(&self, m: &M3) -> Option<TorusElem> {
        let f = &self.rf;
        if m[0] == 0 || m[4] == 0 {
            return None;
        }
        let i = f.log(m[0]);
        let ld = f.log(m[4]);
        if ld % (self.q - 1) != 0 {
            return None;
        }
        let h = TorusElem { i, j: ld / (self.q - 1) };
        (self.torus(h) == *m).then_some(h)
    }

    /// `u(x, y) = [[1, x, y], [0, 1, -conj(x)], [0, 0, 1]]`.
    pub fn unipotent(&self, x: u8, y: u8) -> Result<M3, GroupError> {
        let f = &self.rf;
        if f.add(f.norm(x), f.trace(y)) != 0 {
            return Err(GroupError::Constraint);
        }
        let o = f.exp(0);
        Ok([o, x, y, 0, o, f.neg(f.conj(x)), 0, 0, o])
    }

    /// `u⁻(x, y)`, the transpose-shaped lower unipotent.
    pub fn unipotent_lower(&self, x: u8, y: u8) -> Result<M3, GroupError> {
        let f = &self.rf;
        if f.add(f.norm(x), f.trace(y)) != 0 {
            return Err(GroupError::Constraint);
        }
        let o = f.exp(0);
        Ok([o, 0, 0, x, o, 0, y, f.neg(f.conj(x)), o])
    }

    pub fn unip_elem(&self, k: usize) -> M3 {
        let p = self.unip[k];
        self.unipotent(p.x, p.y).unwrap()
    }

    pub fn unip_prime_elem(&self, k: usize) -> M3 {
        self.unipotent_lower(0, self.unip_prime[k]).unwrap()
    }

    pub fn unip_len(&self, which: Which) -> usize {
        match which {
            Which::Gamma => self.unip.len(),
            Which::GammaPrime => self.unip_prime.len(),
        }
    }

    /// `k`-th element of the unipotent radical of the standard Borel.
    pub fn radical_elem(&self, which: Which, k: usize) -> M3 {
        match which {
            Which::Gamma => self.unip_elem(k),
            Which::GammaPrime => self.unip_prime_elem(k),
        }
    }

    /// Index of an upper unitriangular element in `𝕌`.
    pub fn unip_index_of(&self, m: &M3) -> Option<usize> {
        let k = self.unip_index[m[1] as usize * self.rf.order + m[2] as usize];
        (k != u32::MAX && self.unip_elem(k as usize) == *m).then_some(k as usize)
    }

    pub fn unip_prime_index_of(&self, m: &M3) -> Option<usize> {
        let k = self.unip_prime_index[m[6] as usize];
        (k != u32::MAX && self.unip_prime_elem(k as usize) == *m).then_some(k as usize)
    }

    /// The Weyl element (the same matrix serves `n_s` in `Γ` and `n_{s'}`
    /// in the model of `Γ'`).
    pub fn weyl(&self) -> M3 {
        self.ns
    }

    /// `h_s(y) = diag(y, conj(y)/y, conj(y)⁻¹)` for `y ∈ F_{q²}^×`.
    pub fn h_s(&self, y: u8) -> TorusElem {
        let f = &self.rf;
        let m = self.diag(y, f.div(f.conj(y), y), f.inv(f.conj(y)));
        self.torus_of(&m).expect("h_s(y) lies in H")
    }

    // ---- Bruhat decomposition ----------------------------------------------

    /// Bruhat coordinates of `g`.
    pub fn bruhat(&self, which: Which, g: &M3) -> Result<Cell, GroupError> {
        match which {
            Which::Gamma => self.bruhat_gamma(g),
            Which::GammaPrime => self.bruhat_gamma_prime(g),
        }
    }

    fn bruhat_gamma(&self, g: &M3) -> Result<Cell, GroupError> {
        let f = &self.rf;
        let borel = |b: &M3| -> Result<(TorusElem, usize), GroupError> {
            if b[3] != 0 || b[6] != 0 || b[7] != 0 {
                return Err(GroupError::NotInGroup);
            }
            let d = self.diag(b[0], b[4], b[8]);
            let h = self.torus_of(&d).ok_or(GroupError::NotInGroup)?;
            let di = self.torus(h.inverse(self.q));
            let u = self.mul(&di, b);
            let k = self.unip_index_of(&u).ok_or(GroupError::NotInGroup)?;
            Ok((h, k))
        };
        if g[6] == 0 {
            let (h, u) = borel(g)?;
            return Ok(Cell::Borel { h, u });
        }
        // first column of g is g31 * (y, -conj(x), 1)
        let x = f.neg(f.conj(f.div(g[3], g[6])));
        let y = f.div(g[0], g[6]);
        let u1m = self.unipotent(x, y).map_err(|_| GroupError::NotInGroup)?;
        let u1 = self.unip_index_of(&u1m).ok_or(GroupError::NotInGroup)?;
        let u1inv = self.inverse(&u1m);
        let b = self.mul(&self.ns_inv, &self.mul(&u1inv, g));
        let (h, u2) = borel(&b)?;
        Ok(Cell::Big { u1, h, u2 })
    }

    fn bruhat_gamma_prime(&self, g: &M3) -> Result<Cell, GroupError> {
        let f = &self.rf;
        if g[1] != 0 || g[3] != 0 || g[5] != 0 || g[7] != 0 {
            return Err(GroupError::NotInGroup);
        }
        let borel = |b: &M3| -> Result<(TorusElem, usize), GroupError> {
            if b[2] != 0 {
                return Err(GroupError::NotInGroup);
            }
            let d = self.diag(b[0], b[4], b[8]);
            let h = self.torus_of(&d).ok_or(GroupError::NotInGroup)?;
            let di = self.torus(h.inverse(self.q));
            let u = self.mul(&di, b);
            let k = self.unip_prime_index_of(&u).ok_or(GroupError::NotInGroup)?;
            Ok((h, k))
        };
        if g[2] == 0 {
            let (h, u) = borel(g)?;
            return Ok(Cell::Borel { h, u });
        }
        // third column of g is g13 * (1, 0, c)
        let c = f.div(g[8], g[2]);
        let u1m = self.unipotent_lower(0, c).map_err(|_| GroupError::NotInGroup)?;
        let u1 = self.unip_prime_index_of(&u1m).ok_or(GroupError::NotInGroup)?;
        let u1inv = self.inverse(&u1m);
        let b = self.mul(&self.ns_inv, &self.mul(&u1inv, g));
        let (h, u2) = borel(&b)?;
        Ok(Cell::Big { u1, h, u2 })
    }

    /// Matrix with the given Bruhat coordinates.
    pub fn from_cell(&self, which: Which, c: &Cell) -> M3 {
        match *c {
            Cell::Borel { h, u } => self.mul(&self.torus(h), &self.radical_elem(which, u)),
            Cell::Big { u1, h, u2 } => self.mul_all(&[
                &self.radical_elem(which, u1),
                &self.ns,
                &self.torus(h),
                &self.radical_elem(which, u2),
            ]),
        }
    }

    // ---- enumeration and indexing ------------------------------------------

    /// Group order from the cell decomposition `|H||U|(1 + |U|)`.
    pub fn order(&self, which: Which) -> usize {
        let u = self.unip_len(which);
        self.torus_order() * u * (1 + u)
    }

    /// Canonical index in `0..order`.
    pub fn index(&self, which: Which, g: &M3) -> Result<usize, GroupError> {
        let u = self.unip_len(which);
        let nh = self.torus_order();
        Ok(match self.bruhat(which, g)? {
            Cell::Borel { h, u: k } => h.index(self.q) * u + k,
            Cell::Big { u1, h, u2 } => nh * u + (u1 * nh + h.index(self.q)) * u + u2,
        })
    }

    pub fn element(&self, which: Which, k: usize) -> M3 {
        let u = self.unip_len(which);
        let nh = self.torus_order();
        let borel = nh * u;
        let cell = if k < borel {
            Cell::Borel { h: TorusElem::from_index(k / u, self.q), u: k % u }
        } else {
            let r = k - borel;
            let u2 = r % u;
            let hu1 = r / u;
            Cell::Big { u1: hu1 / nh, h: TorusElem::from_index(hu1 % nh, self.q), u2 }
        };
        self.from_cell(which, &cell)
    }

    /// All elements, in index order.
    pub fn enumerate(&self, which: Which) -> Vec<M3> {
        (0..self.order(which)).map(|k| self.element(which, k)).collect()
    }

    /// Generators: two torus generators, a generating set of the unipotent
    /// radical and the Weyl element.
    pub fn generators(&self, which: Which) -> Vec<M3> {
        let mut out = vec![self.torus(TorusElem { i: 1, j: 0 }), self.torus(TorusElem { i: 0, j: 1 })];
        out.extend(self.radical_generators(which));
        out.push(self.ns);
        out
    }

    /// A generating set of `𝕌` (resp. `𝕌'`) built from `F_p`-bases.
    pub fn radical_generators(&self, which: Which) -> Vec<M3> {
        let f = &self.rf;
        let fdeg = self.fdeg();
        let z = f.exp((self.q + 1) as i64);
        let half = f.inv(f.from_int(2));
        let mut out = Vec::new();
        // centre: u(0, sqrt_eps t) for t in an F_p-basis of F_q
        let mut t = f.exp(0);
        for _ in 0..fdeg {
            let y = f.mul(f.sqrt_eps, t);
            out.push(match which {
                Which::Gamma => self.unipotent(0, y).unwrap(),
                Which::GammaPrime => self.unipotent_lower(0, y).unwrap(),
            });
            t = f.mul(t, z);
        }
        if which == Which::Gamma {
            let g = f.exp(1);
            let mut b = f.exp(0);
            for _ in 0..2 * fdeg {
                let y = f.neg(f.mul(f.norm(b), half));
                out.push(self.unipotent(b, y).unwrap());
                b = f.mul(b, g);
            }
        }
        out
    }

    /// `f` with `q = p^f`.
    pub fn fdeg(&self) -> u32 {
        let p = self.rf.char_p();
        let mut f = 0;
        let mut x = 1;
        while x < self.q {
            x *= p;
            f += 1;
        }
        f
    }

    // ---- cosets -------------------------------------------------------------

    /// Left cosets `Γ/𝔹` (resp. `Γ'/𝔹'`).
    pub fn coset_table(&self, which: Which) -> CosetTable {
        let mut reps = vec![self.identity()];
        for k in 0..self.unip_len(which) {
            reps.push(self.mul(&self.radical_elem(which, k), &self.ns));
        }
        CosetTable { which, reps }
    }

    /// Decompose `g = b · x_j` with `x_0 = 1`, `x_{1+k} = n u_k`: returns
    /// the torus part of `b`'s image in `𝔹/𝕌` and `j`.
    pub fn right_coset(&self, which: Which, g: &M3) -> Result<(TorusElem, usize), GroupError> {
        Ok(match self.bruhat(which, g)? {
            Cell::Borel { h, .. } => (h, 0),
            // g = u1 (n h n⁻¹) (n u2)
            Cell::Big { h, u2, .. } => (h.s_conj(self.q), 1 + u2),
        })
    }

    /// Representatives of `𝔹\Γ`.
    pub fn right_coset_reps(&self, which: Which) -> Vec<M3> {
        let mut reps = vec![self.identity()];
        for k in 0..self.unip_len(which) {
            reps.push(self.mul(&self.ns, &self.radical_elem(which, k)));
        }
        reps
    }

    // ---- orders and classes ------------------------------------------------

    pub fn pow(&self, g: &M3, mut e: u64) -> M3 {
        let mut r = self.identity();
        let mut b = *g;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        r
    }

    /// `p'`-part of the group order.
    pub fn p_prime_part(&self, which: Which) -> u64 {
        let p = self.rf.char_p();
        let mut n = self.order(which) as u64;
        while n % p == 0 {
            n /= p;
        }
        n
    }

    /// `g` has order prime to `p`.
    pub fn is_p_regular(&self, which: Which, g: &M3) -> bool {
        self.pow(g, self.p_prime_part(which)) == self.identity()
    }

    /// Number of conjugacy classes of `p`-regular elements, by orbit
    /// enumeration under conjugation by generators.
    pub fn p_regular_class_count(&self, which: Which) -> Result<usize, GroupError> {
        if self.q > 5 && which == Which::Gamma {
            return Err(GroupError::UnsupportedQ(self.q));
        }
        let n = self.order(which);
        let e = self.p_prime_part(which);
        let id = self.identity();
        let gens: Vec<(M3, M3)> = self.generators(which).iter().map(|g| (*g, self.inverse(g))).collect();
        let mut seen = vec![false; n];
        let mut classes = 0;
        let mut stack = Vec::new();
        for k in 0..n {
            if seen[k] {
                continue;
            }
            let g = self.element(which, k);
            seen[k] = true;
            if self.pow(&g, e) != id {
                continue;
            }
            classes += 1;
            stack.push(g);
            while let Some(x) = stack.pop() {
                for (a, ai) in &gens {
                    let y = self.mul(a, &self.mul(&x, ai));
                    let j = self.index(which, &y)?;
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(y);
                    }
                }
            }
        }
        Ok(classes)
    }
}

/// Representatives of the left cosets of the standard Borel.
#[derive(Clone, Debug)]
pub struct CosetTable {
    pub which: Which,
    pub reps: Vec<M3>,
}

impl CosetTable {
    pub fn len(&self) -> usize {
        self.reps.len()
    }
    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Index of the coset `g𝔹`.
    pub fn index_of(&self, groups: &Groups, g: &M3) -> Result<usize, GroupError> {
        Ok(match groups.bruhat(self.which, g)? {
            Cell::Borel { .. } => 0,
            Cell::Big { u1, .. } => 1 + u1,
        })
    }

    /// Permutation `i -> j` with `g x_i 𝔹 = x_j 𝔹`.
    pub fn permutation(&self, groups: &Groups, g: &M3) -> Result<Vec<usize>, GroupError> {
        self.reps.iter().map(|x| self.index_of(groups, &groups.mul(g, x))).collect()
    }
}

/// Closed-form orders: `|U(2,1)| = q³(q+1)(q²-1)(q³+1)`,
/// `|U(1,1) × U(1)| = q(q+1)²(q-1)(q+1)`.
pub fn closed_form_order(which: Which, q: u64) -> u64 {
    match which {
        Which::Gamma => q.pow(3) * (q + 1) * (q * q - 1) * (q.pow(3) + 1),
        Which::GammaPrime => q * (q + 1) * (q + 1) * (q - 1) * (q + 1),
    }
}
