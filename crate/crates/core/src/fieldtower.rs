//! Exact arithmetic in finite fields `F_{l^m}`, the residue field `F_{q^2}`
//! with its conjugation, and characters of the finite torus `H`.
//!
//! Every element is a small `Copy` handle [`Fe`]; the owning [`Field`]
//! interprets it. Two backends exist: a Zech-logarithm table for fields with
//! at most a few million elements, and packed base-`l` polynomials for larger
//! coefficient fields such as `F_{5^12}` or `F_{3^40}`.

use serde::Serialize;
use thiserror::Error;

/// Largest field order served by the Zech-logarithm backend.
const ZECH_LIMIT: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not an odd prime")]
    BadPrime(u64),
    #[error("extension degree {0} is unsupported")]
    BadDegree(u32),
    #[error("field order {0}^{1} does not fit in 64 bits")]
    TooLarge(u64, u32),
    #[error("coefficient characteristic {ell} divides |H| = {order}")]
    EllDividesTorus { ell: u64, order: u64 },
    #[error("no element of order {0} exists in the coefficient field")]
    NoRootOfUnity(u64),
    #[error("element does not lie in the residue field layer")]
    NotResidue,
}

/// A field element handle. Zero is always `Fe(0)` and one is always `Fe(1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Fe(pub u64);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);
    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Public description of a field, echoed into report headers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldParams {
    pub ell: u64,
    pub m: u32,
    /// Monic modulus, coefficients from constant term upwards.
    pub modulus: Vec<u64>,
}

#[derive(Clone, Debug)]
enum Backend {
    /// `Fe(k+1) = g^k`. `zech[k]` is the handle of `1 + g^k`.
    Zech { zech: Vec<u32>, packed: Vec<u32>, from_packed: Vec<u32> },
    /// `Fe(x)` is the base-`l` packing of the coefficient vector.
    Poly,
}

#[derive(Clone, Debug)]
pub struct Field {
    params: FieldParams,
    order: u64,
    backend: Backend,
    neg_one: Fe,
}

// ---------------------------------------------------------------------------
// prime-field polynomial helpers used for modulus selection

fn mulmod(a: u64, b: u64, l: u64) -> u64 {
    ((a as u128 * b as u128) % l as u128) as u64
}

fn powmod_int(mut b: u64, mut e: u64, l: u64) -> u64 {
    let mut r = 1 % l;
    b %= l;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, l);
        }
        b = mulmod(b, b, l);
        e >>= 1;
    }
    r
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime divisors by trial division.
pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Multiplicative order of `a` modulo `n` by iteration.
pub fn multiplicative_order(a: u64, n: u64) -> Option<u32> {
    if n <= 1 {
        return Some(1);
    }
    let mut x = a % n;
    for k in 1..=n as u32 {
        if x == 1 {
            return Some(k);
        }
        x = mulmod(x, a, n);
    }
    None
}

fn ptrim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn pmulmod(a: &[u64], b: &[u64], f: &[u64], l: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + mulmod(x, y, l)) % l;
        }
    }
    prem(&mut r, f, l);
    r
}

/// Reduce in place modulo a monic `f`.
fn prem(r: &mut Vec<u64>, f: &[u64], l: u64) {
    let d = f.len() - 1;
    ptrim(r);
    while r.len() > d {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - d;
        for (k, &c) in f.iter().enumerate() {
            let t = mulmod(lead, c, l);
            r[shift + k] = (r[shift + k] + l - t) % l;
        }
        ptrim(r);
    }
}

fn pgcd(a: &[u64], b: &[u64], l: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    ptrim(&mut a);
    ptrim(&mut b);
    while !b.is_empty() {
        let inv = powmod_int(*b.last().unwrap(), l - 2, l);
        let bm: Vec<u64> = b.iter().map(|&c| mulmod(c, inv, l)).collect();
        prem(&mut a, &bm, l);
        std::mem::swap(&mut a, &mut b);
    }
    a
}

/// `x^(l^k) mod f`.
fn frob_x(f: &[u64], l: u64, k: u32) -> Vec<u64> {
    let mut cur = vec![0, 1];
    prem(&mut cur, f, l);
    for _ in 0..k {
        let mut res = vec![1];
        let mut base = cur.clone();
        let mut e = l;
        while e > 0 {
            if e & 1 == 1 {
                res = pmulmod(&res, &base, f, l);
            }
            base = pmulmod(&base, &base, f, l);
            e >>= 1;
        }
        cur = res;
    }
    cur
}

/// Rabin's irreducibility test for a monic polynomial over `F_l`.
pub fn is_irreducible(f: &[u64], l: u64) -> bool {
    let m = (f.len() - 1) as u32;
    if m == 1 {
        return true;
    }
    let xq = frob_x(f, l, m);
    if xq != vec![0, 1] {
        return false;
    }
    for r in prime_divisors(m as u64) {
        let mut h = frob_x(f, l, m / r as u32);
        while h.len() < 2 {
            h.push(0);
        }
        h[1] = (h[1] + l - 1) % l;
        let g = pgcd(f, &h, l);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// First monic irreducible polynomial of degree `m` in lexicographic order,
/// starting the scan at index `seed`.
pub fn find_modulus(l: u64, m: u32, seed: u64) -> Vec<u64> {
    let total = l.pow(m);
    for t in 0..total {
        let mut idx = (seed.wrapping_add(t)) % total;
        let mut f = Vec::with_capacity(m as usize + 1);
        for _ in 0..m {
            f.push(idx % l);
            idx /= l;
        }
        f.push(1);
        if m > 1 && f[0] == 0 {
            continue;
        }
        if is_irreducible(&f, l) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

// ---------------------------------------------------------------------------

impl Field {
    /// Build `F_{l^m}` with the modulus chosen by [`find_modulus`].
    pub fn new(ell: u64, m: u32, seed: u64) -> Result<Field, FieldError> {
        if ell == 2 || !is_prime(ell) {
            return Err(FieldError::BadPrime(ell));
        }
        if m == 0 {
            return Err(FieldError::BadDegree(m));
        }
        let order = ell
            .checked_pow(m)
            .ok_or(FieldError::TooLarge(ell, m))?;
        let modulus = find_modulus(ell, m, seed);
        let params = FieldParams { ell, m, modulus };
        let mut field = Field {
            params,
            order,
            backend: Backend::Poly,
            neg_one: Fe(ell - 1),
        };
        if order <= ZECH_LIMIT {
            field.build_zech();
        }
        Ok(field)
    }

    fn build_zech(&mut self) {
        let n = self.order - 1;
        let primes = prime_divisors(n);
        // smallest packed polynomial that generates the multiplicative group
        let mut g = 0u64;
        for cand in 2..self.order {
            let c = Fe(cand);
            if primes.iter().all(|&r| self.pow(c, n / r) != Fe::ONE) {
                g = cand;
                break;
            }
        }
        if n == 1 {
            g = 1;
        }
        let gen = Fe(g);
        let mut packed = vec![0u32; n as usize + 1];
        let mut from_packed = vec![0u32; self.order as usize];
        let mut cur = Fe::ONE;
        for k in 0..n {
            packed[k as usize + 1] = cur.0 as u32;
            from_packed[cur.0 as usize] = (k + 1) as u32;
            cur = self.mul(cur, gen);
        }
        let mut zech = vec![0u32; n as usize];
        for k in 0..n {
            let p = packed[k as usize + 1] as u64;
            let s = self.add(Fe(p), Fe::ONE);
            zech[k as usize] = from_packed[s.0 as usize];
        }
        self.backend = Backend::Zech { zech, packed, from_packed };
        self.neg_one = if n % 2 == 0 { Fe(n / 2 + 1) } else { Fe::ONE };
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }
    pub fn ell(&self) -> u64 {
        self.params.ell
    }
    pub fn degree(&self) -> u32 {
        self.params.m
    }
    pub fn order(&self) -> u64 {
        self.order
    }
    pub fn is_zech(&self) -> bool {
        matches!(self.backend, Backend::Zech { .. })
    }

    #[inline]
    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }
    #[inline]
    pub fn one(&self) -> Fe {
        Fe::ONE
    }

    /// Coefficient vector (constant term first) of an element.
    pub fn coeffs(&self, x: Fe) -> Vec<u64> {
        let mut v = match &self.backend {
            Backend::Zech { packed, .. } => packed[x.0 as usize] as u64,
            Backend::Poly => x.0,
        };
        let l = self.params.ell;
        (0..self.params.m)
            .map(|_| {
                let d = v % l;
                v /= l;
                d
            })
            .collect()
    }

    /// Element with the given coefficient vector.
    pub fn from_coeffs(&self, c: &[u64]) -> Fe {
        let l = self.params.ell;
        let mut v = 0u64;
        for &d in c.iter().take(self.params.m as usize).rev() {
            v = v * l + d % l;
        }
        self.from_packed(v)
    }

    fn from_packed(&self, v: u64) -> Fe {
        match &self.backend {
            Backend::Zech { from_packed, .. } => {
                if v == 0 {
                    Fe::ZERO
                } else {
                    Fe(from_packed[v as usize] as u64)
                }
            }
            Backend::Poly => Fe(v),
        }
    }

    /// Image of an integer in the prime field.
    pub fn from_i64(&self, k: i64) -> Fe {
        let l = self.params.ell as i64;
        let r = k.rem_euclid(l) as u64;
        self.from_packed(r)
    }

    /// Integer representative of a prime-field element.
    pub fn to_prime(&self, x: Fe) -> Option<u64> {
        let c = self.coeffs(x);
        if c.iter().skip(1).all(|&d| d == 0) {
            Some(c[0])
        } else {
            None
        }
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        match &self.backend {
            Backend::Zech { zech, .. } => {
                let n = self.order - 1;
                let (i, j) = (a.0 - 1, b.0 - 1);
                let d = if j >= i { j - i } else { j + n - i };
                let z = zech[d as usize] as u64;
                if z == 0 {
                    Fe::ZERO
                } else {
                    Fe((i + z - 1) % n + 1)
                }
            }
            Backend::Poly => {
                let l = self.params.ell;
                let (mut x, mut y) = (a.0, b.0);
                let mut out = 0u64;
                let mut place = 1u64;
                for k in 0..self.params.m {
                    let d = (x % l + y % l) % l;
                    out += d * place;
                    x /= l;
                    y /= l;
                    if k + 1 < self.params.m {
                        place *= l;
                    }
                }
                Fe(out)
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.is_zero() {
            return a;
        }
        match &self.backend {
            Backend::Zech { .. } => self.mul(a, self.neg_one),
            Backend::Poly => {
                let l = self.params.ell;
                let mut x = a.0;
                let mut out = 0u64;
                let mut place = 1u64;
                for k in 0..self.params.m {
                    let d = x % l;
                    out += ((l - d) % l) * place;
                    x /= l;
                    if k + 1 < self.params.m {
                        place *= l;
                    }
                }
                Fe(out)
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.is_zero() || b.is_zero() {
            return Fe::ZERO;
        }
        match &self.backend {
            Backend::Zech { .. } => {
                let n = self.order - 1;
                Fe((a.0 - 1 + b.0 - 1) % n + 1)
            }
            Backend::Poly => {
                let l = self.params.ell;
                let ca = self.coeffs(a);
                let cb = self.coeffs(b);
                let r = pmulmod(&ca, &cb, &self.params.modulus, l);
                self.from_coeffs(&r)
            }
        }
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.is_zero() {
            return Fe::ZERO;
        }
        if let Backend::Zech { .. } = &self.backend {
            let n = self.order - 1;
            let k = ((a.0 - 1) as u128 * e as u128 % n as u128) as u64;
            return Fe(k + 1);
        }
        let mut r = Fe::ONE;
        let mut b = a;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    /// Power with a signed exponent; panics on `0^(negative)`.
    pub fn powi(&self, a: Fe, e: i64) -> Fe {
        if e >= 0 {
            self.pow(a, e as u64)
        } else {
            self.pow(self.inv(a).expect("inverse of zero"), (-e) as u64)
        }
    }

    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.is_zero() {
            return None;
        }
        match &self.backend {
            Backend::Zech { .. } => {
                let n = self.order - 1;
                Some(Fe((n - (a.0 - 1)) % n + 1))
            }
            Backend::Poly => Some(self.pow(a, self.order - 2)),
        }
    }

    pub fn div(&self, a: Fe, b: Fe) -> Option<Fe> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// Frobenius `x -> x^l`.
    pub fn frobenius(&self, a: Fe) -> Fe {
        self.pow(a, self.params.ell)
    }

    /// Multiplicative order of a nonzero element, given a multiple of it.
    pub fn order_dividing(&self, a: Fe, multiple: u64) -> u64 {
        let mut n = multiple;
        for r in prime_divisors(multiple) {
            while n % r == 0 && self.pow(a, n / r) == Fe::ONE {
                n /= r;
            }
        }
        n
    }

    /// Discrete logarithm to the table generator (Zech backend only).
    pub fn log(&self, a: Fe) -> Option<u64> {
        match &self.backend {
            Backend::Zech { .. } if !a.is_zero() => Some(a.0 - 1),
            _ => None,
        }
    }

    /// The table generator (Zech backend), `Fe(2)`.
    pub fn generator(&self) -> Option<Fe> {
        match &self.backend {
            Backend::Zech { .. } if self.order > 2 => Some(Fe(2)),
            _ => None,
        }
    }

    /// Deterministic element of exact order `n` (`n | order - 1`).
    pub fn element_of_order(&self, n: u64) -> Result<Fe, FieldError> {
        let big = self.order - 1;
        if big % n != 0 {
            return Err(FieldError::NoRootOfUnity(n));
        }
        if let Some(g) = self.generator() {
            return Ok(self.pow(g, big / n));
        }
        let primes = prime_divisors(n);
        for cand in 2..self.order {
            let z = self.pow(Fe(cand), big / n);
            if primes.iter().all(|&r| self.pow(z, n / r) != Fe::ONE) {
                return Ok(z);
            }
        }
        Err(FieldError::NoRootOfUnity(n))
    }

    /// Iterate over all field elements (small fields only).
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        assert!(self.order <= ZECH_LIMIT, "refusing to enumerate a large field");
        let zech = self.is_zech();
        (0..self.order).map(move |k| if zech { Fe(k) } else { Fe(k) })
    }

    pub fn sum<I: IntoIterator<Item = Fe>>(&self, it: I) -> Fe {
        it.into_iter().fold(Fe::ZERO, |a, b| self.add(a, b))
    }

    /// Readable rendering: prime-field elements as integers, else as a
    /// coefficient list.
    pub fn display(&self, a: Fe) -> String {
        match self.to_prime(a) {
            Some(v) => v.to_string(),
            None => format!("{:?}", self.coeffs(a)),
        }
    }
}

// ---------------------------------------------------------------------------
// residue field, coefficient field and characters of H

/// Which coefficient track a tower was built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Track {
    /// Coefficients of characteristic `p`; `iota` is a field embedding.
    CharP,
    /// Coefficients of characteristic `l` prime to `|H|`; `iota` is only
    /// multiplicative.
    CharEll,
}

/// Residue field `F_{q^2}`, coefficient field, and the fixed embedding of
/// `F_{q^2}^x` into the coefficient field.
#[derive(Clone, Debug)]
pub struct Tower {
    pub p: u64,
    pub f: u32,
    pub q: u64,
    pub residue: Field,
    pub coeff: Field,
    pub track: Track,
    /// Image of the residue generator, a primitive `(q^2-1)`-th root of unity.
    pub omega: Fe,
    omega_pow: Vec<Fe>,
    conj_table: Vec<u8>,
    sqrt_eps: Fe,
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerDescription {
    pub p: u64,
    pub f: u32,
    pub q: u64,
    pub residue: FieldParams,
    pub coeff: FieldParams,
    pub track: Track,
    pub omega: Vec<u64>,
}

/// Smallest `m` with `n | l^m - 1`.
pub fn coefficient_degree(ell: u64, n: u64) -> Option<u32> {
    multiplicative_order(ell, n)
}

/// Smallest prime congruent to 1 modulo `n`.
pub fn smallest_prime_one_mod(n: u64) -> u64 {
    let mut k = n + 1;
    while !is_prime(k) {
        k += n;
    }
    k
}

impl Tower {
    /// Build the tower for `q = p^f` with coefficient characteristic `ell`.
    /// `coeff_deg` overrides the default degree (the multiplicative order of
    /// `ell` modulo `|H|`).
    pub fn build(p: u64, f: u32, ell: u64, seed: u64, coeff_deg: Option<u32>) -> Result<Tower, FieldError> {
        if p == 2 || !is_prime(p) {
            return Err(FieldError::BadPrime(p));
        }
        if f == 0 {
            return Err(FieldError::BadDegree(f));
        }
        let q = p.pow(f);
        let h_order = (q * q - 1) * (q + 1);
        let track = if ell == p { Track::CharP } else { Track::CharEll };
        if track == Track::CharEll && h_order % ell == 0 {
            return Err(FieldError::EllDividesTorus { ell, order: h_order });
        }
        let residue = Field::new(p, 2 * f, seed)?;
        let m = match coeff_deg {
            Some(m) => m,
            None => coefficient_degree(ell, h_order).ok_or(FieldError::EllDividesTorus { ell, order: h_order })?,
        };
        let coeff = Field::new(ell, m, seed)?;
        let qq1 = q * q - 1;
        if (coeff.order() - 1) % qq1 != 0 {
            return Err(FieldError::NoRootOfUnity(qq1));
        }
        let omega = match track {
            Track::CharEll => coeff.element_of_order(qq1)?,
            Track::CharP => Self::embedding_root(&residue, &coeff, qq1)?,
        };
        let mut omega_pow = Vec::with_capacity(qq1 as usize);
        let mut cur = Fe::ONE;
        for _ in 0..qq1 {
            omega_pow.push(cur);
            cur = coeff.mul(cur, omega);
        }
        let conj_table: Vec<u8> = (0..residue.order()).map(|k| residue.pow(Fe(k), q).0 as u8).collect();
        // sqrt(eps): an element with conj = -itself, i.e. g^((q+1)/2)
        let g = residue.generator().expect("residue field has a generator");
        let sqrt_eps = residue.pow(g, (q + 1) / 2);
        Ok(Tower { p, f, q, residue, coeff, track, omega, omega_pow, conj_table, sqrt_eps })
    }

    /// Default characteristic-`p` tower.
    pub fn char_p(p: u64, f: u32, seed: u64) -> Result<Tower, FieldError> {
        Self::build(p, f, p, seed, None)
    }

    /// Default characteristic-`l` tower with `l` the smallest prime `= 1 mod |H|`.
    pub fn char_ell(p: u64, f: u32, seed: u64) -> Result<Tower, FieldError> {
        let q = p.pow(f);
        let ell = smallest_prime_one_mod((q * q - 1) * (q + 1));
        Self::build(p, f, ell, seed, None)
    }

    /// A root of the minimal polynomial of the residue generator, of exact
    /// order `q^2 - 1`, so that `iota` extends to a field embedding.
    fn embedding_root(residue: &Field, coeff: &Field, qq1: u64) -> Result<Fe, FieldError> {
        let g = residue.generator().expect("residue field has a generator");
        let p = residue.ell();
        let deg = residue.degree();
        // minimal polynomial prod (x - g^(p^i)) over the residue field
        let mut minpoly = vec![Fe::ONE];
        let mut conj = g;
        for _ in 0..deg {
            let mut next = vec![Fe::ZERO; minpoly.len() + 1];
            for (i, &c) in minpoly.iter().enumerate() {
                next[i + 1] = residue.add(next[i + 1], c);
                next[i] = residue.sub(next[i], residue.mul(c, conj));
            }
            minpoly = next;
            conj = residue.pow(conj, p);
        }
        let ints: Vec<u64> = minpoly
            .iter()
            .map(|&c| residue.to_prime(c).expect("minimal polynomial has prime-field coefficients"))
            .collect();
        let z = coeff.element_of_order(qq1)?;
        let mut cand = Fe::ONE;
        for _ in 0..qq1 {
            cand = coeff.mul(cand, z);
            let mut acc = Fe::ZERO;
            for &c in ints.iter().rev() {
                acc = coeff.add(coeff.mul(acc, cand), coeff.from_i64(c as i64));
            }
            if acc.is_zero() && coeff.order_dividing(cand, qq1) == qq1 {
                return Ok(cand);
            }
        }
        Err(FieldError::NoRootOfUnity(qq1))
    }

    pub fn describe(&self) -> TowerDescription {
        TowerDescription {
            p: self.p,
            f: self.f,
            q: self.q,
            residue: self.residue.params().clone(),
            coeff: self.coeff.params().clone(),
            track: self.track,
            omega: self.coeff.coeffs(self.omega),
        }
    }

    /// `|H| = (q^2-1)(q+1)`.
    pub fn torus_order(&self) -> u64 {
        (self.q * self.q - 1) * (self.q + 1)
    }

    /// `q^2 - 1`.
    pub fn qq1(&self) -> u64 {
        self.q * self.q - 1
    }

    /// Conjugation `x -> x^q` on the residue field.
    #[inline]
    pub fn conj(&self, x: Fe) -> Fe {
        Fe(self.conj_table[x.0 as usize] as u64)
    }

    /// Conjugation on an element that must lie in the residue field.
    pub fn conjugate(&self, x: Fe) -> Result<Fe, FieldError> {
        if x.0 >= self.residue.order() {
            return Err(FieldError::NotResidue);
        }
        Ok(self.conj(x))
    }

    /// A fixed square root of the nonsquare `eps = sqrt_eps^2 in F_q`;
    /// it satisfies `conj(sqrt_eps) = -sqrt_eps`.
    pub fn sqrt_eps(&self) -> Fe {
        self.sqrt_eps
    }

    /// Generator `g` of `F_{q^2}^x` used to index `H`.
    pub fn res_gen(&self) -> Fe {
        Fe(2)
    }

    /// `w = g^(q-1)`, a generator of `U(1)`.
    pub fn u1_gen(&self) -> Fe {
        self.residue.pow(self.res_gen(), self.q - 1)
    }

    /// `iota(g^k) = omega^k`.
    #[inline]
    pub fn omega_pow(&self, k: i64) -> Fe {
        let n = self.qq1() as i64;
        self.omega_pow[k.rem_euclid(n) as usize]
    }

    /// The embedding of a nonzero residue element.
    pub fn iota(&self, x: Fe) -> Fe {
        let k = self.residue.log(x).expect("iota of zero");
        self.omega_pow(k as i64)
    }

    /// `q` as an element of the coefficient field.
    pub fn q_coeff(&self) -> Fe {
        self.coeff.from_i64(self.q as i64)
    }

    /// Integer as an element of the coefficient field.
    pub fn int(&self, k: i64) -> Fe {
        self.coeff.from_i64(k)
    }
}

/// Element `diag(a, delta, conj(a)^-1)` of `H`, with `a = g^i`,
/// `delta = w^j`, `i mod q^2-1`, `j mod q+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TorusElem {
    pub i: u64,
    pub j: u64,
}

/// Character `diag(a, delta, .) -> iota(a)^r iota(delta)^c` of `H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TorusChar {
    pub r: u64,
    pub c: u64,
}

/// Case of a character according to its behaviour under `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CharCase {
    /// Factors through the determinant.
    Trivial,
    /// Fixed by `s` but does not factor through the determinant.
    Hybrid,
    /// Moved by `s`.
    Regular,
}

impl CharCase {
    pub fn name(self) -> &'static str {
        match self {
            CharCase::Trivial => "trivial",
            CharCase::Hybrid => "hybrid",
            CharCase::Regular => "regular",
        }
    }
}

impl TorusChar {
    pub fn new(q: u64, r: i64, c: i64) -> TorusChar {
        TorusChar {
            r: r.rem_euclid((q * q - 1) as i64) as u64,
            c: c.rem_euclid((q + 1) as i64) as u64,
        }
    }

    /// All `|H|` characters in `(r, c)` lexicographic order.
    pub fn all(q: u64) -> Vec<TorusChar> {
        let mut out = Vec::new();
        for r in 0..q * q - 1 {
            for c in 0..q + 1 {
                out.push(TorusChar { r, c });
            }
        }
        out
    }

    /// `chi^s(h) = chi(n_s^-1 h n_s)`: `(r, c) -> (-q r, c)`.
    pub fn s_conj(self, q: u64) -> TorusChar {
        TorusChar::new(q, -((q * self.r) as i64), self.c as i64)
    }

    /// Exponent `e` with `zeta(a) = iota(a)^e`.
    pub fn zeta_exponent(self, q: u64) -> u64 {
        (self.r + self.c * (q - 1)) % (q * q - 1)
    }

    pub fn case(self, q: u64) -> CharCase {
        if self.zeta_exponent(q) == 0 {
            CharCase::Trivial
        } else if self.s_conj(q) == self {
            CharCase::Hybrid
        } else {
            CharCase::Regular
        }
    }

    /// `zeta(-1) = (-1)^r`.
    pub fn zeta_minus_one(self) -> i64 {
        if self.r % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Pointwise product.
    pub fn mul(self, other: TorusChar, q: u64) -> TorusChar {
        TorusChar::new(q, (self.r + other.r) as i64, (self.c + other.c) as i64)
    }

    pub fn inverse(self, q: u64) -> TorusChar {
        TorusChar::new(q, -(self.r as i64), -(self.c as i64))
    }

    /// Exponent of `omega` in `chi(h)`.
    pub fn exponent_at(self, h: TorusElem, q: u64) -> u64 {
        let n = q * q - 1;
        ((self.r as u128 * h.i as u128 + self.c as u128 * ((q - 1) * h.j) as u128) % n as u128) as u64
    }

    /// Value of the character at `h` in the coefficient field.
    pub fn value(self, tower: &Tower, h: TorusElem) -> Fe {
        tower.omega_pow(self.exponent_at(h, tower.q) as i64)
    }
}

impl TorusElem {
    pub fn all(q: u64) -> Vec<TorusElem> {
        let mut out = Vec::new();
        for i in 0..q * q - 1 {
            for j in 0..q + 1 {
                out.push(TorusElem { i, j });
            }
        }
        out
    }
    pub fn identity() -> TorusElem {
        TorusElem { i: 0, j: 0 }
    }
    pub fn mul(self, o: TorusElem, q: u64) -> TorusElem {
        TorusElem { i: (self.i + o.i) % (q * q - 1), j: (self.j + o.j) % (q + 1) }
    }
    pub fn inverse(self, q: u64) -> TorusElem {
        let n = q * q - 1;
        TorusElem { i: (n - self.i % n) % n, j: (q + 1 - self.j % (q + 1)) % (q + 1) }
    }
    /// `n_s^-1 h n_s = diag(conj(a)^-1, delta, a)`.
    pub fn s_conj(self, q: u64) -> TorusElem {
        let n = q * q - 1;
        TorusElem { i: (n - (q * self.i) % n) % n, j: self.j }
    }
    /// Dense index in `0..|H|`.
    pub fn index(self, q: u64) -> usize {
        (self.i * (q + 1) + self.j) as usize
    }
    pub fn from_index(k: usize, q: u64) -> TorusElem {
        TorusElem { i: k as u64 / (q + 1), j: k as u64 % (q + 1) }
    }
}

/// Evaluate `chi` at `h`.
pub fn char_value(tower: &Tower, chi: TorusChar, h: TorusElem) -> Fe {
    chi.value(tower, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_on_f9() {
        let f = Field::new(3, 2, 0).unwrap();
        let els: Vec<Fe> = f.elements().collect();
        assert_eq!(els.len(), 9);
        for &a in &els {
            assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
            if !a.is_zero() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
            }
            for &b in &els {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for &c in &els {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn backends_agree_on_f81() {
        // The same modulus through both backends must give the same arithmetic.
        let z = Field::new(3, 4, 5).unwrap();
        let mut p = z.clone();
        p.backend = Backend::Poly;
        p.neg_one = Fe(2);
        for a in 0..81u64 {
            for b in 0..81u64 {
                let za = z.from_coeffs(&p.coeffs(Fe(a)));
                let zb = z.from_coeffs(&p.coeffs(Fe(b)));
                assert_eq!(z.coeffs(z.mul(za, zb)), p.coeffs(p.mul(Fe(a), Fe(b))));
                assert_eq!(z.coeffs(z.add(za, zb)), p.coeffs(p.add(Fe(a), Fe(b))));
            }
            assert_eq!(z.coeffs(z.neg(z.from_coeffs(&p.coeffs(Fe(a))))), p.coeffs(p.neg(Fe(a))));
        }
    }

    #[test]
    fn coefficient_degree_for_q3() {
        // ord(3 mod 32) by iteration
        let mut k = 1;
        let mut x = 3u64;
        while x != 1 {
            x = x * 3 % 32;
            k += 1;
        }
        assert_eq!(k, 8);
        let t = Tower::char_p(3, 1, 0).unwrap();
        assert_eq!(t.coeff.degree(), 8);
        assert_eq!(t.coeff.mul(Fe::ONE, Fe::ONE), Fe::ONE);
        assert_eq!(t.residue.mul(Fe::ONE, Fe::ONE), Fe::ONE);
    }

    #[test]
    fn conjugation_is_an_involution_fixing_fq() {
        let t = Tower::char_p(3, 1, 0).unwrap();
        let mut fixed = 0;
        for x in t.residue.elements() {
            assert_eq!(t.conj(t.conj(x)), x);
            if t.conj(x) == x {
                fixed += 1;
            }
            for y in t.residue.elements() {
                assert_eq!(t.conj(t.residue.add(x, y)), t.residue.add(t.conj(x), t.conj(y)));
            }
        }
        assert_eq!(fixed, 3);
        let g = t.res_gen();
        assert_eq!(t.conj(g), t.residue.pow(g, 3));
        let norm = t.residue.mul(g, t.conj(g));
        assert_eq!(t.residue.pow(norm, 2), Fe::ONE);
        assert_eq!(t.conj(t.sqrt_eps()), t.residue.neg(t.sqrt_eps()));
    }

    #[test]
    fn iota_is_a_field_embedding_in_char_p() {
        let t = Tower::char_p(3, 1, 0).unwrap();
        let mut image = std::collections::HashSet::new();
        for x in t.residue.elements().filter(|x| !x.is_zero()) {
            image.insert(t.iota(x));
            for y in t.residue.elements().filter(|y| !y.is_zero()) {
                let s = t.residue.add(x, y);
                if !s.is_zero() {
                    assert_eq!(t.iota(s), t.coeff.add(t.iota(x), t.iota(y)));
                }
            }
        }
        assert_eq!(image.len(), 8);
    }

    #[test]
    fn characters_multiplicative_and_orthogonal_q3() {
        let t = Tower::char_p(3, 1, 0).unwrap();
        let q = 3;
        let hs = TorusElem::all(q);
        let chars = TorusChar::all(q);
        assert_eq!(hs.len(), 32);
        for &chi in &chars {
            for &a in &hs {
                for &b in &hs {
                    assert_eq!(chi.value(&t, a.mul(b, q)), t.coeff.mul(chi.value(&t, a), chi.value(&t, b)));
                }
            }
        }
        let order = t.coeff.from_i64(32);
        for &x in &chars {
            for &y in &chars {
                let s = t.coeff.sum(hs.iter().map(|&h| t.coeff.mul(x.value(&t, h), y.value(&t, h.inverse(q)))));
                assert_eq!(s, if x == y { order } else { Fe::ZERO });
            }
        }
    }

    #[test]
    fn char_ell_track_defaults() {
        let t = Tower::char_ell(3, 1, 0).unwrap();
        assert_eq!(t.coeff.ell(), 97);
        assert_eq!(t.coeff.degree(), 1);
        let t5 = Tower::char_ell(5, 1, 0).unwrap();
        assert_eq!(t5.coeff.ell(), 433);
        assert!(Tower::build(3, 1, 2, 0, None).is_err());
        assert!(Tower::build(3, 1, 7, 0, None).is_ok());
    }

    #[test]
    fn large_poly_backend_fields() {
        let t = Tower::char_p(5, 1, 0).unwrap();
        assert_eq!(t.coeff.degree(), 12);
        assert!(!t.coeff.is_zech());
        let f = &t.coeff;
        let x = f.from_coeffs(&[1, 2, 3, 4, 0, 1]);
        assert_eq!(f.mul(x, f.inv(x).unwrap()), Fe::ONE);
        assert_eq!(f.pow(t.omega, 24), Fe::ONE);
        assert_eq!(f.order_dividing(t.omega, 24), 24);
        // Frobenius has order m on a generator of the field
        let mut y = x;
        for _ in 0..12 {
            y = f.frobenius(y);
        }
        assert_eq!(y, x);
    }

    #[test]
    fn modulus_scan_is_deterministic_and_irreducible() {
        let a = find_modulus(3, 8, 17);
        let b = find_modulus(3, 8, 17);
        assert_eq!(a, b);
        assert!(is_irreducible(&a, 3));
        assert!(!is_irreducible(&[1, 0, 1], 5)); // x^2+1 = (x-2)(x-3) mod 5
        assert!(is_irreducible(&[1, 0, 1], 3));
    }
}
