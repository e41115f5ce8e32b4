//! Dense exact linear algebra over a [`Field`]. Vectors are columns; a
//! matrix acts on the left.

use crate::fieldtower::{Fe, Field};
use crate::poly::{self, Poly};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Fe>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![Fe::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Fe::ONE;
        }
        m
    }

    pub fn scalar(n: usize, c: Fe) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Fe>]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut m = Mat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(n: usize, cols: &[Vec<Fe>]) -> Mat {
        let mut m = Mat::zeros(n, cols.len());
        for (j, v) in cols.iter().enumerate() {
            for i in 0..n {
                m.data[i * cols.len() + j] = v[i];
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Fe) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<Fe> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<Fe> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn mul(&self, f: &Field, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let mut r = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let orow = &o.data[k * o.cols..(k + 1) * o.cols];
                let rrow = &mut r.data[i * o.cols..(i + 1) * o.cols];
                for (x, &b) in rrow.iter_mut().zip(orow) {
                    if !b.is_zero() {
                        *x = f.add(*x, f.mul(a, b));
                    }
                }
            }
        }
        r
    }

    pub fn mul_vec(&self, f: &Field, v: &[Fe]) -> Vec<Fe> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Fe::ZERO;
                for (j, &x) in v.iter().enumerate() {
                    let a = self.data[i * self.cols + j];
                    if !a.is_zero() && !x.is_zero() {
                        acc = f.add(acc, f.mul(a, x));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, f: &Field, o: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(&a, &b)| f.add(a, b)).collect() }
    }

    pub fn sub(&self, f: &Field, o: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(&a, &b)| f.sub(a, b)).collect() }
    }

    pub fn scale(&self, f: &Field, c: Fe) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| f.mul(a, c)).collect() }
    }

    /// `self + c * o`.
    pub fn axpy(&self, f: &Field, c: Fe, o: &Mat) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(&a, &b)| f.add(a, f.mul(c, b))).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn trace(&self, f: &Field) -> Fe {
        f.sum((0..self.rows.min(self.cols)).map(|i| self.get(i, i)))
    }

    pub fn pow(&self, f: &Field, mut e: u64) -> Mat {
        let mut r = Mat::identity(self.rows);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(f, &b);
            }
            b = b.mul(f, &b);
            e >>= 1;
        }
        r
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self, f: &Field) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = f.inv(m.get(r, c)).unwrap();
            for j in c..m.cols {
                let v = m.get(r, j);
                m.set(r, j, f.mul(v, inv));
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self, f: &Field) -> usize {
        self.rref(f).1.len()
    }

    /// Basis of `{x : self x = 0}`.
    pub fn nullspace(&self, f: &Field) -> Vec<Vec<Fe>> {
        let (m, pivots) = self.rref(f);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![Fe::ZERO; self.cols];
                v[fc] = Fe::ONE;
                for (i, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(m.get(i, fc));
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self, f: &Field) -> Option<Mat> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Mat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, Fe::ONE);
        }
        let (r, piv) = aug.rref(f);
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j));
            }
        }
        Some(inv)
    }

    /// Characteristic polynomial `det(x - A)` via Hessenberg reduction.
    pub fn charpoly(&self, f: &Field) -> Poly {
        assert!(self.is_square());
        let n = self.rows;
        let mut h = self.clone();
        // reduce to upper Hessenberg form by similarity
        for c in 0..n.saturating_sub(2) {
            let Some(p) = (c + 1..n).find(|&i| !h.get(i, c).is_zero()) else { continue };
            if p != c + 1 {
                for j in 0..n {
                    h.data.swap(p * n + j, (c + 1) * n + j);
                }
                for i in 0..n {
                    h.data.swap(i * n + p, i * n + c + 1);
                }
            }
            let inv = f.inv(h.get(c + 1, c)).unwrap();
            for i in c + 2..n {
                let t = f.mul(h.get(i, c), inv);
                if t.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = f.sub(h.get(i, j), f.mul(t, h.get(c + 1, j)));
                    h.set(i, j, v);
                }
                for k in 0..n {
                    let v = f.add(h.get(k, c + 1), f.mul(t, h.get(k, i)));
                    h.set(k, c + 1, v);
                }
            }
        }
        // recurrence on leading principal minors
        let mut ps: Vec<Poly> = vec![vec![Fe::ONE]];
        for k in 1..=n {
            let x_minus = vec![f.neg(h.get(k - 1, k - 1)), Fe::ONE];
            let mut pk = poly::mul(f, &x_minus, &ps[k - 1]);
            let mut t = Fe::ONE;
            for i in 1..k {
                t = f.mul(t, h.get(k - i, k - i - 1));
                let coef = f.mul(t, h.get(k - i - 1, k - 1));
                if coef.is_zero() {
                    continue;
                }
                let term: Poly = ps[k - i - 1].iter().map(|&c| f.mul(c, coef)).collect();
                pk = poly::sub(f, &pk, &term);
            }
            ps.push(pk);
        }
        let mut out = ps.pop().unwrap();
        out.resize(n + 1, Fe::ZERO);
        out
    }

    /// Evaluate a polynomial at this matrix.
    pub fn eval_poly(&self, f: &Field, p: &Poly) -> Mat {
        let n = self.rows;
        let mut acc = Mat::zeros(n, n);
        for &c in p.iter().rev() {
            acc = acc.mul(f, self);
            for i in 0..n {
                let v = f.add(acc.get(i, i), c);
                acc.set(i, i, v);
            }
        }
        acc
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, o: &Mat) -> Mat {
        let mut m = Mat::zeros(self.rows + o.rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j));
            }
        }
        for i in 0..o.rows {
            for j in 0..o.cols {
                m.set(self.rows + i, self.cols + j, o.get(i, j));
            }
        }
        m
    }
}

/// Subspace of `F^n` kept in fully reduced echelon form.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub n: usize,
    pub basis: Vec<Vec<Fe>>,
    pub pivots: Vec<usize>,
}

impl Subspace {
    pub fn new(n: usize) -> Subspace {
        Subspace { n, basis: vec![], pivots: vec![] }
    }

    pub fn spanned(f: &Field, n: usize, vs: &[Vec<Fe>]) -> Subspace {
        let mut s = Subspace::new(n);
        for v in vs {
            s.insert(f, v);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Residual of `v` after elimination against the basis.
    pub fn reduce(&self, f: &Field, v: &[Fe]) -> Vec<Fe> {
        let mut w = v.to_vec();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            let c = w[p];
            if c.is_zero() {
                continue;
            }
            for (x, &y) in w.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x = f.sub(*x, f.mul(c, y));
                }
            }
        }
        w
    }

    pub fn contains(&self, f: &Field, v: &[Fe]) -> bool {
        self.reduce(f, v).iter().all(|x| x.is_zero())
    }

    /// Insert a vector; returns true if the dimension grew.
    pub fn insert(&mut self, f: &Field, v: &[Fe]) -> bool {
        let w = self.reduce(f, v);
        let Some(p) = w.iter().position(|x| !x.is_zero()) else { return false };
        let inv = f.inv(w[p]).unwrap();
        let w: Vec<Fe> = w.iter().map(|&x| f.mul(x, inv)).collect();
        for b in self.basis.iter_mut() {
            let c = b[p];
            if c.is_zero() {
                continue;
            }
            for (x, &y) in b.iter_mut().zip(&w) {
                if !y.is_zero() {
                    *x = f.sub(*x, f.mul(c, y));
                }
            }
        }
        let pos = self.pivots.iter().position(|&q| q > p).unwrap_or(self.pivots.len());
        self.basis.insert(pos, w);
        self.pivots.insert(pos, p);
        true
    }

    /// Coordinates of a member vector in the echelon basis.
    pub fn coords(&self, v: &[Fe]) -> Vec<Fe> {
        self.pivots.iter().map(|&p| v[p]).collect()
    }

    /// Intersection with another subspace of the same ambient space.
    pub fn intersect(&self, f: &Field, o: &Subspace) -> Subspace {
        // solve sum a_i b_i = sum c_j o_j
        let k = self.dim();
        let l = o.dim();
        let mut cols = Vec::with_capacity(k + l);
        for b in &self.basis {
            cols.push(b.clone());
        }
        for b in &o.basis {
            cols.push(b.iter().map(|&x| f.neg(x)).collect());
        }
        if cols.is_empty() {
            return Subspace::new(self.n);
        }
        let m = Mat::from_cols(self.n, &cols);
        let ns = m.nullspace(f);
        let vs: Vec<Vec<Fe>> = ns
            .iter()
            .map(|c| {
                let mut v = vec![Fe::ZERO; self.n];
                for (i, b) in self.basis.iter().enumerate() {
                    if c[i].is_zero() {
                        continue;
                    }
                    for (x, &y) in v.iter_mut().zip(b) {
                        *x = f.add(*x, f.mul(c[i], y));
                    }
                }
                v
            })
            .collect();
        Subspace::spanned(f, self.n, &vs)
    }

    pub fn sum(&self, f: &Field, o: &Subspace) -> Subspace {
        let mut s = self.clone();
        for b in &o.basis {
            s.insert(f, b);
        }
        s
    }
}

pub fn vec_add(f: &Field, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
}

pub fn vec_scale(f: &Field, c: Fe, a: &[Fe]) -> Vec<Fe> {
    a.iter().map(|&x| f.mul(c, x)).collect()
}

pub fn vec_axpy(f: &Field, a: &mut [Fe], c: Fe, b: &[Fe]) {
    if c.is_zero() {
        return;
    }
    for (x, &y) in a.iter_mut().zip(b) {
        if !y.is_zero() {
            *x = f.add(*x, f.mul(c, y));
        }
    }
}

pub fn is_zero_vec(a: &[Fe]) -> bool {
    a.iter().all(|x| x.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(f: &Field, rows: &[&[i64]]) -> Mat {
        Mat::from_rows(&rows.iter().map(|r| r.iter().map(|&k| f.from_i64(k)).collect()).collect::<Vec<_>>())
    }

    #[test]
    fn charpoly_matches_companion() {
        let f = Field::new(7, 1, 0).unwrap();
        // companion matrix of x^3 - 2x^2 + 3x - 5
        let a = m(&f, &[&[0, 0, 5], &[1, 0, -3], &[0, 1, 2]]);
        let cp = a.charpoly(&f);
        let expect: Vec<Fe> = [-5, 3, -2, 1].iter().map(|&k| f.from_i64(k)).collect();
        assert_eq!(cp, expect);
        assert!(a.eval_poly(&f, &cp).is_zero());
    }

    #[test]
    fn charpoly_of_random_matrices_annihilates() {
        let f = Field::new(3, 2, 0).unwrap();
        let mut x = 1u64;
        for _ in 0..20 {
            let mut a = Mat::zeros(6, 6);
            for k in 0..36 {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                a.data[k] = Fe((x >> 33) % 9);
            }
            let cp = a.charpoly(&f);
            assert!(a.eval_poly(&f, &cp).is_zero());
            assert_eq!(cp[6], Fe::ONE);
        }
    }

    #[test]
    fn nullspace_and_inverse() {
        let f = Field::new(5, 1, 0).unwrap();
        let a = m(&f, &[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        let ns = a.nullspace(&f);
        assert_eq!(ns.len(), 1);
        assert!(is_zero_vec(&a.mul_vec(&f, &ns[0])));
        let b = m(&f, &[&[1, 2], &[3, 4]]);
        let bi = b.inverse(&f).unwrap();
        assert_eq!(b.mul(&f, &bi), Mat::identity(2));
        assert!(a.inverse(&f).is_none());
    }

    #[test]
    fn subspace_operations() {
        let f = Field::new(3, 1, 0).unwrap();
        let v = |xs: &[i64]| xs.iter().map(|&k| f.from_i64(k)).collect::<Vec<_>>();
        let s = Subspace::spanned(&f, 3, &[v(&[1, 1, 0]), v(&[0, 1, 1])]);
        let t = Subspace::spanned(&f, 3, &[v(&[1, 0, 0]), v(&[0, 0, 1])]);
        assert_eq!(s.dim(), 2);
        let i = s.intersect(&f, &t);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&f, &v(&[1, 0, 2])));
        assert_eq!(s.sum(&f, &t).dim(), 3);
    }
}
