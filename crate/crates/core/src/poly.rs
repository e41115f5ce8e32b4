//! Univariate polynomials over a [`Field`], coefficients from constant term
//! upwards. Used for characteristic polynomials and root finding.

use crate::fieldtower::{Fe, Field};
use rand::Rng;

pub type Poly = Vec<Fe>;

pub fn trim(a: &mut Poly) {
    while a.last().map_or(false, |c| c.is_zero()) {
        a.pop();
    }
}

pub fn degree(a: &Poly) -> Option<usize> {
    let mut d = a.len();
    while d > 0 && a[d - 1].is_zero() {
        d -= 1;
    }
    d.checked_sub(1)
}

pub fn add(f: &Field, a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    let mut r: Poly = (0..n)
        .map(|i| f.add(*a.get(i).unwrap_or(&Fe::ZERO), *b.get(i).unwrap_or(&Fe::ZERO)))
        .collect();
    trim(&mut r);
    r
}

pub fn sub(f: &Field, a: &Poly, b: &Poly) -> Poly {
    let nb: Poly = b.iter().map(|&c| f.neg(c)).collect();
    add(f, a, &nb)
}

pub fn mul(f: &Field, a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![Fe::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = f.add(r[i + j], f.mul(x, y));
        }
    }
    trim(&mut r);
    r
}

/// Quotient and remainder; panics on division by zero.
pub fn divrem(f: &Field, a: &Poly, b: &Poly) -> (Poly, Poly) {
    let db = degree(b).expect("division by the zero polynomial");
    let inv = f.inv(b[db]).unwrap();
    let mut r = a.clone();
    trim(&mut r);
    if r.len() <= db {
        return (vec![], r);
    }
    let mut qt = vec![Fe::ZERO; r.len() - db];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = f.mul(r[dr], inv);
        let shift = dr - db;
        qt[shift] = c;
        for k in 0..=db {
            r[shift + k] = f.sub(r[shift + k], f.mul(c, b[k]));
        }
        trim(&mut r);
    }
    trim(&mut qt);
    (qt, r)
}

pub fn rem(f: &Field, a: &Poly, b: &Poly) -> Poly {
    divrem(f, a, b).1
}

pub fn monic(f: &Field, a: &Poly) -> Poly {
    let mut a = a.clone();
    trim(&mut a);
    if let Some(&lead) = a.last() {
        let inv = f.inv(lead).unwrap();
        for c in a.iter_mut() {
            *c = f.mul(*c, inv);
        }
    }
    a
}

pub fn gcd(f: &Field, a: &Poly, b: &Poly) -> Poly {
    let mut a = a.clone();
    let mut b = b.clone();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = rem(f, &a, &b);
        a = b;
        b = r;
    }
    monic(f, &a)
}

/// `base^e mod m`.
pub fn powmod(f: &Field, base: &Poly, mut e: u64, m: &Poly) -> Poly {
    let mut result: Poly = rem(f, &vec![Fe::ONE], m);
    let mut b = rem(f, base, m);
    while e > 0 {
        if e & 1 == 1 {
            result = rem(f, &mul(f, &result, &b), m);
        }
        b = rem(f, &mul(f, &b, &b), m);
        e >>= 1;
    }
    result
}

pub fn eval(f: &Field, a: &Poly, x: Fe) -> Fe {
    a.iter().rev().fold(Fe::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
}

/// Distinct roots in the field, sorted by handle.
pub fn roots<R: Rng>(f: &Field, a: &Poly, rng: &mut R) -> Vec<Fe> {
    let mut a = monic(f, a);
    if degree(&a).unwrap_or(0) == 0 {
        return vec![];
    }
    let mut out = Vec::new();
    if a[0].is_zero() {
        out.push(Fe::ZERO);
        while !a.is_empty() && a[0].is_zero() {
            a.remove(0);
        }
    }
    if degree(&a).unwrap_or(0) > 0 {
        // product of the distinct linear factors: gcd(a, x^Q - x)
        let x = vec![Fe::ZERO, Fe::ONE];
        let xq = powmod(f, &x, f.order(), &a);
        let lin = gcd(f, &a, &sub(f, &xq, &x));
        split_linear(f, &lin, rng, &mut out);
    }
    out.sort();
    out.dedup();
    out
}

fn split_linear<R: Rng>(f: &Field, a: &Poly, rng: &mut R, out: &mut Vec<Fe>) {
    match degree(a) {
        None | Some(0) => {}
        Some(1) => out.push(f.neg(f.mul(a[0], f.inv(a[1]).unwrap()))),
        Some(_) => {
            let half = (f.order() - 1) / 2;
            loop {
                let shift = random_elem(f, rng);
                let t = vec![shift, Fe::ONE];
                let h = powmod(f, &t, half, a);
                let g = gcd(f, a, &sub(f, &h, &vec![Fe::ONE]));
                let dg = degree(&g).unwrap_or(0);
                if dg > 0 && dg < degree(a).unwrap() {
                    let (qt, _) = divrem(f, a, &g);
                    split_linear(f, &g, rng, out);
                    split_linear(f, &monic(f, &qt), rng, out);
                    return;
                }
            }
        }
    }
}

/// Uniform random element.
pub fn random_elem<R: Rng>(f: &Field, rng: &mut R) -> Fe {
    let c: Vec<u64> = (0..f.degree()).map(|_| rng.gen_range(0..f.ell())).collect();
    f.from_coeffs(&c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roots_of_split_polynomial() {
        let f = Field::new(7, 2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rs = [f.from_i64(3), Fe(10), Fe(20), Fe::ZERO];
        let mut p = vec![Fe::ONE];
        for &r in &rs {
            p = mul(&f, &p, &vec![f.neg(r), Fe::ONE]);
        }
        // an irreducible quadratic factor contributes no roots
        let g = f.generator().unwrap();
        let quad = vec![f.neg(g), Fe::ZERO, Fe::ONE];
        let mut irr = quad.clone();
        // x^2 - g has no root in F_49 because g is not a square
        assert!(roots(&f, &irr, &mut rng).is_empty());
        irr = mul(&f, &irr, &p);
        let mut expect = rs.to_vec();
        expect.sort();
        assert_eq!(roots(&f, &irr, &mut rng), expect);
    }

    #[test]
    fn divrem_reconstructs() {
        let f = Field::new(5, 1, 0).unwrap();
        let a: Poly = [1, 2, 3, 4, 1].iter().map(|&k| f.from_i64(k)).collect();
        let b: Poly = [2, 0, 1].iter().map(|&k| f.from_i64(k)).collect();
        let (qt, r) = divrem(&f, &a, &b);
        assert_eq!(add(&f, &mul(&f, &qt, &b), &r), a);
        assert!(degree(&r).map_or(true, |d| d < 2));
    }
}
