//! Modules for the finite groups over the coefficient field, given by the
//! matrices of a fixed generating set. Covers Borel and torus induction,
//! Hecke-operator images, composition factors, socles, summand splitting
//! and projective covers (which are the injective hulls here).

use crate::fieldtower::{CharCase, Fe, Field, TorusChar, TorusElem, Tower};
use crate::finitegroups::{Cell, GroupError, Groups, Which, M3};
use crate::linalg::{is_zero_vec, vec_axpy, Mat, Subspace};
use crate::poly;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("no decision after {0} random attempts; retry with another seed")]
    Budget(usize),
    #[error("subspace is not invariant under the group")]
    NotInvariant,
    #[error("module is not simple: fixed space of dimension {0}")]
    NotSimple(usize),
    #[error("no summand with the requested socle")]
    NoSummand,
    #[error("{0}")]
    Other(String),
}

/// Tower plus both groups: everything needed to build modules at one `q`.
#[derive(Clone, Debug)]
pub struct Env {
    pub tower: Tower,
    pub groups: Groups,
}

impl Env {
    pub fn new(tower: Tower) -> Result<Env, GroupError> {
        let groups = Groups::new(&tower)?;
        Ok(Env { tower, groups })
    }

    pub fn field(&self) -> &Field {
        &self.tower.coeff
    }

    pub fn q(&self) -> u64 {
        self.tower.q
    }

    /// Positions of the radical generators inside `Groups::generators`.
    pub fn radical_gen_range(&self, which: Which) -> std::ops::Range<usize> {
        let k = self.groups.radical_generators(which).len();
        2..2 + k
    }

    pub fn weyl_gen_index(&self, which: Which) -> usize {
        self.groups.generators(which).len() - 1
    }

    /// `ind_𝔹^Γ(χ)` (resp. `ind_{𝔹'}^{Γ'}(χ)`) on functions `f(by) = χ(b) f(y)`,
    /// coordinates `f(x_i)` at the right coset representatives `1, n u`.
    pub fn induce_from_borel(&self, which: Which, chi: TorusChar) -> Result<FModule, ModError> {
        let g = &self.groups;
        let reps = g.right_coset_reps(which);
        let n = reps.len();
        let mut gens = Vec::new();
        for x in g.generators(which) {
            let mut m = Mat::zeros(n, n);
            for (i, r) in reps.iter().enumerate() {
                let (h, j) = g.right_coset(which, &g.mul(r, &x))?;
                m.set(i, j, chi.value(&self.tower, h));
            }
            gens.push(m);
        }
        Ok(FModule { which, dim: n, gens })
    }

    /// The intertwiner `T : ind(χ) → ind(χ^s)`, `(Tf)(y) = Σ_u f(n⁻¹ u y)`.
    pub fn weyl_operator(&self, which: Which, chi: TorusChar) -> Result<Mat, ModError> {
        let g = &self.groups;
        let f = self.field();
        let reps = g.right_coset_reps(which);
        let n = reps.len();
        let mut t = Mat::zeros(n, n);
        for (i, r) in reps.iter().enumerate() {
            for k in 0..g.unip_len(which) {
                let y = g.mul_all(&[&g.ns_inv, &g.radical_elem(which, k), r]);
                let (h, j) = g.right_coset(which, &y)?;
                let v = f.add(t.get(i, j), chi.value(&self.tower, h));
                t.set(i, j, v);
            }
        }
        Ok(t)
    }

    /// Carter–Lusztig image: `im(T) ⊂ ind(χ^s)`, or `im(1 + T) ⊂ ind(χ)`
    /// when `plus_one` (requires `χ^s = χ`).
    pub fn hecke_image(&self, which: Which, chi: TorusChar, plus_one: bool) -> Result<FModule, ModError> {
        let f = self.field();
        let q = self.q();
        let t = self.weyl_operator(which, chi)?;
        let target = self.induce_from_borel(which, chi.s_conj(q))?;
        let op = if plus_one {
            if chi.s_conj(q) != chi {
                return Err(ModError::Other("1 + T needs an s-fixed character".into()));
            }
            t.add(f, &Mat::identity(t.rows))
        } else {
            t
        };
        let cols: Vec<Vec<Fe>> = (0..op.cols).map(|j| op.col(j)).collect();
        let img = Subspace::spanned(f, op.rows, &cols);
        target.submodule(f, &img)
    }

    /// `ind_H^G(χ)` on functions `f(h y) = χ(h) f(y)`. Only for groups small
    /// enough to enumerate.
    pub fn induce_from_torus(&self, which: Which, chi: TorusChar) -> Result<FModule, ModError> {
        let g = &self.groups;
        let q = self.q();
        let order = g.order(which);
        let hs: Vec<M3> = TorusElem::all(q).into_iter().map(|h| g.torus(h)).collect();
        // canonical representative of H y: smallest index in the coset
        let mut rep_of = vec![usize::MAX; order];
        let mut reps = Vec::new();
        for k in 0..order {
            if rep_of[k] != usize::MAX {
                continue;
            }
            let y = g.element(which, k);
            let id = reps.len();
            for h in &hs {
                rep_of[g.index(which, &g.mul(h, &y))?] = id;
            }
            reps.push(y);
        }
        let n = reps.len();
        let mut gens = Vec::new();
        for x in g.generators(which) {
            let mut m = Mat::zeros(n, n);
            for (i, r) in reps.iter().enumerate() {
                let y = g.mul(r, &x);
                let j = rep_of[g.index(which, &y)?];
                let hm = g.mul(&y, &g.inverse(&reps[j]));
                let h = g.torus_of(&hm).ok_or(GroupError::NotInGroup)?;
                m.set(i, j, chi.value(&self.tower, h));
            }
            gens.push(m);
        }
        Ok(FModule { which, dim: n, gens })
    }

    /// Trivial one-dimensional module.
    pub fn trivial(&self, which: Which) -> FModule {
        let k = self.groups.generators(which).len();
        FModule { which, dim: 1, gens: vec![Mat::identity(1); k] }
    }
}

/// A representation given by the matrices of `Groups::generators(which)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FModule {
    pub which: Which,
    pub dim: usize,
    pub gens: Vec<Mat>,
}

/// Isomorphism invariant of a simple module: dimension and the character
/// by which `H` acts on the fixed line of the unipotent radical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Signature {
    pub dim: usize,
    pub chi: TorusChar,
}

impl FModule {
    pub fn act(&self, f: &Field, gen: usize, v: &[Fe]) -> Vec<Fe> {
        self.gens[gen].mul_vec(f, v)
    }

    /// Smallest invariant subspace containing `vs`.
    pub fn spin(&self, f: &Field, vs: &[Vec<Fe>]) -> Subspace {
        spin_with(f, &self.gens, self.dim, vs)
    }

    pub fn is_invariant(&self, f: &Field, w: &Subspace) -> bool {
        w.basis.iter().all(|b| self.gens.iter().all(|g| w.contains(f, &g.mul_vec(f, b))))
    }

    /// Action on an invariant subspace in its echelon basis.
    pub fn submodule(&self, f: &Field, w: &Subspace) -> Result<FModule, ModError> {
        let mut gens = Vec::with_capacity(self.gens.len());
        for g in &self.gens {
            let mut m = Mat::zeros(w.dim(), w.dim());
            for (j, b) in w.basis.iter().enumerate() {
                let img = g.mul_vec(f, b);
                if !w.contains(f, &img) {
                    return Err(ModError::NotInvariant);
                }
                for (i, c) in w.coords(&img).into_iter().enumerate() {
                    m.set(i, j, c);
                }
            }
            gens.push(m);
        }
        Ok(FModule { which: self.which, dim: w.dim(), gens })
    }

    /// Action on `V / W`, in the basis of standard vectors at non-pivot columns.
    pub fn quotient(&self, f: &Field, w: &Subspace) -> Result<FModule, ModError> {
        let free: Vec<usize> = (0..self.dim).filter(|c| !w.pivots.contains(c)).collect();
        let k = free.len();
        let mut gens = Vec::with_capacity(self.gens.len());
        for g in &self.gens {
            let mut m = Mat::zeros(k, k);
            for (j, &c) in free.iter().enumerate() {
                let col = g.col(c);
                let red = w.reduce(f, &col);
                for (i, &r) in free.iter().enumerate() {
                    m.set(i, j, red[r]);
                }
            }
            gens.push(m);
        }
        Ok(FModule { which: self.which, dim: k, gens })
    }

    pub fn direct_sum(&self, o: &FModule) -> FModule {
        FModule {
            which: self.which,
            dim: self.dim + o.dim,
            gens: self.gens.iter().zip(&o.gens).map(|(a, b)| a.direct_sum(b)).collect(),
        }
    }

    /// Contragredient: `g ↦ ρ(g⁻¹)ᵀ`.
    pub fn dual(&self, f: &Field) -> FModule {
        FModule {
            which: self.which,
            dim: self.dim,
            gens: self.gens.iter().map(|g| g.inverse(f).expect("invertible").transpose()).collect(),
        }
    }
}

/// Spin a list of vectors under a set of matrices.
pub fn spin_with(f: &Field, gens: &[Mat], n: usize, vs: &[Vec<Fe>]) -> Subspace {
    let mut s = Subspace::new(n);
    let mut queue = Vec::new();
    for v in vs {
        if s.insert(f, v) {
            queue.push(v.clone());
        }
    }
    while let Some(v) = queue.pop() {
        for g in gens {
            let w = g.mul_vec(f, &v);
            if s.insert(f, &w) {
                queue.push(w);
            }
        }
    }
    s
}

/// Action of arbitrary group elements on a module, via Bruhat coordinates.
pub struct Action<'a> {
    env: &'a Env,
    module: &'a FModule,
    t1: Vec<Mat>,
    t2: Vec<Mat>,
    unip: Vec<Mat>,
    weyl: Mat,
}

impl<'a> Action<'a> {
    pub fn new(env: &'a Env, module: &'a FModule) -> Result<Action<'a>, ModError> {
        let f = env.field();
        let g = &env.groups;
        let q = env.q();
        let which = module.which;
        let n = module.dim;
        let powers = |m: &Mat, k: u64| {
            let mut out = vec![Mat::identity(n)];
            for _ in 1..k {
                out.push(out.last().unwrap().mul(f, m));
            }
            out
        };
        let t1 = powers(&module.gens[0], q * q - 1);
        let t2 = powers(&module.gens[1], q + 1);
        let gens_m = g.radical_generators(which);
        let range = env.radical_gen_range(which);
        let rad_mats = &module.gens[range];
        let size = g.unip_len(which);
        let mut unip: Vec<Option<Mat>> = vec![None; size];
        let id_idx = radical_index(g, which, &g.identity())?;
        unip[id_idx] = Some(Mat::identity(n));
        let mut stack = vec![(g.identity(), id_idx)];
        while let Some((x, xi)) = stack.pop() {
            for (gm, gmat) in gens_m.iter().zip(rad_mats) {
                let y = g.mul(&x, gm);
                let yi = radical_index(g, which, &y)?;
                if unip[yi].is_none() {
                    unip[yi] = Some(unip[xi].as_ref().unwrap().mul(f, gmat));
                    stack.push((y, yi));
                }
            }
        }
        let unip = unip.into_iter().map(|m| m.expect("radical generated")).collect();
        let weyl = module.gens[env.weyl_gen_index(which)].clone();
        Ok(Action { env, module, t1, t2, unip, weyl })
    }

    pub fn torus(&self, h: TorusElem) -> Mat {
        self.t1[h.i as usize].mul(self.env.field(), &self.t2[h.j as usize])
    }

    pub fn radical(&self, k: usize) -> &Mat {
        &self.unip[k]
    }

    pub fn weyl(&self) -> &Mat {
        &self.weyl
    }

    pub fn rho(&self, g: &M3) -> Result<Mat, ModError> {
        let f = self.env.field();
        Ok(match self.env.groups.bruhat(self.module.which, g)? {
            Cell::Borel { h, u } => self.torus(h).mul(f, &self.unip[u]),
            Cell::Big { u1, h, u2 } => self.unip[u1].mul(f, &self.weyl).mul(f, &self.torus(h)).mul(f, &self.unip[u2]),
        })
    }
}

fn radical_index(g: &Groups, which: Which, m: &M3) -> Result<usize, ModError> {
    let k = match which {
        Which::Gamma => g.unip_index_of(m),
        Which::GammaPrime => g.unip_prime_index_of(m),
    };
    k.ok_or(ModError::Group(GroupError::NotInGroup))
}

/// Vectors fixed by the unipotent radical.
pub fn fixed_space(env: &Env, m: &FModule) -> Vec<Vec<Fe>> {
    constrained_space(env, m, None)
}

/// Vectors fixed by the radical on which `H` acts by `chi`.
pub fn weight_space(env: &Env, m: &FModule, chi: TorusChar) -> Vec<Vec<Fe>> {
    constrained_space(env, m, Some(chi))
}

fn constrained_space(env: &Env, m: &FModule, chi: Option<TorusChar>) -> Vec<Vec<Fe>> {
    let f = env.field();
    let n = m.dim;
    let mut blocks: Vec<Mat> = env
        .radical_gen_range(m.which)
        .map(|k| m.gens[k].sub(f, &Mat::identity(n)))
        .collect();
    if let Some(chi) = chi {
        let a = chi.value(&env.tower, TorusElem { i: 1, j: 0 });
        let b = chi.value(&env.tower, TorusElem { i: 0, j: 1 });
        blocks.push(m.gens[0].sub(f, &Mat::scalar(n, a)));
        blocks.push(m.gens[1].sub(f, &Mat::scalar(n, b)));
    }
    let mut rows = Vec::new();
    for b in &blocks {
        for i in 0..n {
            rows.push(b.row(i));
        }
    }
    Mat::from_rows(&rows).nullspace(f)
}

/// Character of `H` on an eigenline spanned by `v`.
pub fn line_character(env: &Env, m: &FModule, v: &[Fe]) -> Option<TorusChar> {
    let f = env.field();
    let q = env.q();
    let k = v.iter().position(|x| !x.is_zero())?;
    let ratio = |g: &Mat| -> Option<Fe> {
        let w = g.mul_vec(f, v);
        let c = f.div(w[k], v[k])?;
        let scaled: Vec<Fe> = v.iter().map(|&x| f.mul(c, x)).collect();
        (scaled == w).then_some(c)
    };
    let a = ratio(&m.gens[0])?;
    let b = ratio(&m.gens[1])?;
    let qq1 = (q * q - 1) as i64;
    let ea = (0..qq1).find(|&e| env.tower.omega_pow(e) == a)?;
    let eb = (0..qq1).find(|&e| env.tower.omega_pow(e) == b)?;
    if eb % (q as i64 - 1) != 0 {
        return None;
    }
    Some(TorusChar::new(q, ea, eb / (q as i64 - 1)))
}

/// Signature of a simple module.
pub fn signature(env: &Env, m: &FModule) -> Result<Signature, ModError> {
    let fixed = fixed_space(env, m);
    if fixed.len() != 1 {
        return Err(ModError::NotSimple(fixed.len()));
    }
    let chi = line_character(env, m, &fixed[0]).ok_or(ModError::NotSimple(1))?;
    Ok(Signature { dim: m.dim, chi })
}

/// Composition factors with multiplicities.
#[derive(Clone, Debug, Serialize)]
pub struct ChopReport {
    pub dim: usize,
    pub factors: Vec<(Signature, usize)>,
}

impl ChopReport {
    pub fn multiplicity(&self, s: &Signature) -> usize {
        self.factors.iter().find(|(t, _)| t == s).map_or(0, |(_, m)| *m)
    }
    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|(s, m)| s.dim * m).sum()
    }
}

fn random_fe<R: Rng>(f: &Field, rng: &mut R) -> Fe {
    poly::random_elem(f, rng)
}

/// One Norton-style attempt loop: a proper submodule, or `None` if the
/// module is certified irreducible.
pub fn find_submodule<R: Rng>(f: &Field, m: &FModule, rng: &mut R, budget: usize) -> Result<Option<Subspace>, ModError> {
    let n = m.dim;
    if n <= 1 {
        return Ok(None);
    }
    let mut pool: Vec<Mat> = m.gens.clone();
    let transposes: Vec<Mat> = m.gens.iter().map(|g| g.transpose()).collect();
    for _ in 0..budget {
        if pool.len() < 32 {
            let a = rng.gen_range(0..pool.len());
            let b = rng.gen_range(0..pool.len());
            let p = pool[a].mul(f, &pool[b]);
            pool.push(p);
        }
        let mut alg = Mat::zeros(n, n);
        for _ in 0..3 {
            let k = rng.gen_range(0..pool.len());
            alg = alg.axpy(f, random_fe(f, rng), &pool[k]);
        }
        let cp = alg.charpoly(f);
        for lambda in poly::roots(f, &cp, rng) {
            let shifted = alg.sub(f, &Mat::scalar(n, lambda));
            let kernel = shifted.nullspace(f);
            let s = m.spin(f, &kernel[..1]);
            if s.dim() < n {
                return Ok(Some(s));
            }
            if kernel.len() == 1 {
                let kt = shifted.transpose().nullspace(f);
                let sd = spin_with(f, &transposes, n, &kt[..1]);
                if sd.dim() < n {
                    let ann = Mat::from_rows(&sd.basis).nullspace(f);
                    return Ok(Some(Subspace::spanned(f, n, &ann)));
                }
                return Ok(None);
            }
        }
    }
    Err(ModError::Budget(budget))
}

/// Composition factors of `m` as simple modules.
pub fn composition_factors(env: &Env, m: &FModule, seed: u64, budget: usize) -> Result<Vec<FModule>, ModError> {
    let f = env.field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut todo = vec![m.clone()];
    let mut out = Vec::new();
    while let Some(x) = todo.pop() {
        match find_submodule(f, &x, &mut rng, budget)? {
            None => out.push(x),
            Some(s) => {
                todo.push(x.submodule(f, &s)?);
                todo.push(x.quotient(f, &s)?);
            }
        }
    }
    Ok(out)
}

/// Chop a module into labelled composition factors.
pub fn chop(env: &Env, m: &FModule, seed: u64, budget: usize) -> Result<ChopReport, ModError> {
    let mut counts: BTreeMap<Signature, usize> = BTreeMap::new();
    for x in composition_factors(env, m, seed, budget)? {
        *counts.entry(signature(env, &x)?).or_default() += 1;
    }
    Ok(ChopReport { dim: m.dim, factors: counts.into_iter().collect() })
}

/// A simple module prepared for computing homomorphisms out of it: a
/// spinning word basis from its fixed vector and the relations among it.
pub struct CyclicSimple {
    pub sig: Signature,
    dim: usize,
    words: Vec<(usize, usize)>,
    relations: Vec<(usize, usize, Vec<Fe>)>,
    basis_inv: Mat,
}

impl CyclicSimple {
    pub fn new(env: &Env, tau: &FModule) -> Result<CyclicSimple, ModError> {
        let f = env.field();
        let sig = signature(env, tau)?;
        let v0 = weight_space(env, tau, sig.chi).remove(0);
        let mut sub = Subspace::new(tau.dim);
        sub.insert(f, &v0);
        let mut basis = vec![v0];
        let mut words = vec![(usize::MAX, 0)];
        let mut i = 0;
        while i < basis.len() {
            for (gi, g) in tau.gens.iter().enumerate() {
                let w = g.mul_vec(f, &basis[i]);
                if sub.insert(f, &w) {
                    basis.push(w);
                    words.push((i, gi));
                }
            }
            i += 1;
        }
        if basis.len() != tau.dim {
            return Err(ModError::NotSimple(basis.len()));
        }
        let bmat = Mat::from_cols(tau.dim, &basis);
        let basis_inv = bmat.inverse(f).ok_or(ModError::NotSimple(0))?;
        let mut relations = Vec::new();
        for (k, b) in basis.iter().enumerate() {
            for (gi, g) in tau.gens.iter().enumerate() {
                let c = basis_inv.mul_vec(f, &g.mul_vec(f, b));
                relations.push((k, gi, c));
            }
        }
        Ok(CyclicSimple { sig, dim: tau.dim, words, relations, basis_inv })
    }

    fn images(&self, f: &Field, m: &FModule, v: &[Fe]) -> Vec<Vec<Fe>> {
        let mut imgs: Vec<Vec<Fe>> = Vec::with_capacity(self.dim);
        for &(parent, gi) in &self.words {
            if parent == usize::MAX {
                imgs.push(v.to_vec());
            } else {
                let w = m.gens[gi].mul_vec(f, &imgs[parent]);
                imgs.push(w);
            }
        }
        imgs
    }

    /// Basis of `Hom(τ, M)`, each as a `dim M × dim τ` matrix.
    pub fn homs_into(&self, env: &Env, m: &FModule) -> Vec<Mat> {
        let f = env.field();
        let cands = weight_space(env, m, self.sig.chi);
        if cands.is_empty() {
            return vec![];
        }
        let all_imgs: Vec<Vec<Vec<Fe>>> = cands.iter().map(|v| self.images(f, m, v)).collect();
        let mut cols: Vec<Vec<Fe>> = vec![Vec::new(); cands.len()];
        for (k, gi, c) in &self.relations {
            for (t, imgs) in all_imgs.iter().enumerate() {
                let mut d = m.gens[*gi].mul_vec(f, &imgs[*k]);
                for (l, &cl) in c.iter().enumerate() {
                    if !cl.is_zero() {
                        vec_axpy(f, &mut d, f.neg(cl), &imgs[l]);
                    }
                }
                cols[t].extend(d);
            }
        }
        let sol = Mat::from_cols(cols[0].len(), &cols).nullspace(f);
        sol.iter()
            .map(|a| {
                let mut imgs = vec![vec![Fe::ZERO; m.dim]; self.dim];
                for (t, &at) in a.iter().enumerate() {
                    for (l, img) in all_imgs[t].iter().enumerate() {
                        vec_axpy(f, &mut imgs[l], at, img);
                    }
                }
                Mat::from_cols(m.dim, &imgs).mul(f, &self.basis_inv)
            })
            .collect()
    }
}

/// The simple modules of one group, labelled by Carter–Lusztig data.
pub struct Catalog {
    pub which: Which,
    pub entries: Vec<CatalogEntry>,
    pub cyclic: Vec<CyclicSimple>,
    by_sig: HashMap<Signature, usize>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub chi: TorusChar,
    /// `J = J₀(χ)` (the image of `1 + T`) rather than `J = ∅`.
    pub full_j: bool,
    pub sig: Signature,
    pub module: FModule,
}

/// `J₀(χ)` (resp. `J₀'(χ)`) is nonempty.
pub fn j0_nonempty(which: Which, chi: TorusChar, q: u64) -> bool {
    match which {
        Which::Gamma => chi.case(q) == CharCase::Trivial,
        Which::GammaPrime => chi.s_conj(q) == chi,
    }
}

impl Catalog {
    pub fn build(env: &Env, which: Which) -> Result<Catalog, ModError> {
        Self::build_for(env, which, &TorusChar::all(env.q()))
    }

    /// Catalog restricted to the given characters.
    pub fn build_for(env: &Env, which: Which, chis: &[TorusChar]) -> Result<Catalog, ModError> {
        let q = env.q();
        let mut entries = Vec::new();
        for &chi in chis {
            let mut push = |full_j: bool| -> Result<(), ModError> {
                let module = env.hecke_image(which, chi, full_j)?;
                let sig = signature(env, &module)?;
                entries.push(CatalogEntry { chi, full_j, sig, module });
                Ok(())
            };
            push(false)?;
            if j0_nonempty(which, chi, q) {
                push(true)?;
            }
        }
        let mut cyclic = Vec::new();
        let mut by_sig = HashMap::new();
        for (k, e) in entries.iter().enumerate() {
            cyclic.push(CyclicSimple::new(env, &e.module)?);
            by_sig.insert(e.sig, k);
        }
        Ok(Catalog { which, entries, cyclic, by_sig })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, sig: &Signature) -> Option<&CatalogEntry> {
        self.by_sig.get(sig).map(|&k| &self.entries[k])
    }

    pub fn find(&self, chi: TorusChar, full_j: bool) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.chi == chi && e.full_j == full_j)
    }

    /// Socle of `m` and its constituents.
    pub fn socle(&self, env: &Env, m: &FModule) -> (Subspace, Vec<(Signature, usize)>) {
        let f = env.field();
        let mut soc = Subspace::new(m.dim);
        let mut parts = Vec::new();
        for (e, cyc) in self.entries.iter().zip(&self.cyclic) {
            let homs = cyc.homs_into(env, m);
            if homs.is_empty() {
                continue;
            }
            parts.push((e.sig, homs.len()));
            for h in &homs {
                for j in 0..h.cols {
                    soc.insert(f, &h.col(j));
                }
            }
        }
        (soc, parts)
    }

    pub fn hom_dim(&self, env: &Env, sig: &Signature, m: &FModule) -> usize {
        self.by_sig.get(sig).map_or(0, |&k| self.cyclic[k].homs_into(env, m).len())
    }
}

/// Basis of `End_G(m)` (only for small modules).
pub fn endomorphisms(f: &Field, m: &FModule) -> Vec<Mat> {
    let n = m.dim;
    let mut rows = Vec::new();
    for g in &m.gens {
        for i in 0..n {
            for j in 0..n {
                // (X g - g X)[i][j]
                let mut row = vec![Fe::ZERO; n * n];
                for k in 0..n {
                    let a = g.get(k, j);
                    if !a.is_zero() {
                        row[i * n + k] = f.add(row[i * n + k], a);
                    }
                    let b = g.get(i, k);
                    if !b.is_zero() {
                        row[k * n + j] = f.sub(row[k * n + j], b);
                    }
                }
                if !is_zero_vec(&row) {
                    rows.push(row);
                }
            }
        }
    }
    let sol = if rows.is_empty() {
        (0..n * n).map(|k| {
            let mut v = vec![Fe::ZERO; n * n];
            v[k] = Fe::ONE;
            v
        }).collect()
    } else {
        Mat::from_rows(&rows).nullspace(f)
    };
    sol.into_iter().map(|v| Mat { rows: n, cols: n, data: v }).collect()
}

/// Decomposition into indecomposable summands, each returned as an
/// invariant subspace of `m`. A summand is declared indecomposable when
/// `budget` random endomorphisms fail to split it.
pub fn indecomposable_summands(env: &Env, m: &FModule, seed: u64, budget: usize) -> Result<Vec<Subspace>, ModError> {
    let f = env.field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let whole = Subspace::spanned(f, m.dim, &(0..m.dim).map(|k| unit(m.dim, k)).collect::<Vec<_>>());
    let mut todo = vec![whole];
    let mut out = Vec::new();
    'outer: while let Some(w) = todo.pop() {
        let sub = m.submodule(f, &w)?;
        let n = sub.dim;
        if n == 1 {
            out.push(w);
            continue;
        }
        let ends = endomorphisms(f, &sub);
        for _ in 0..budget {
            let mut e = Mat::zeros(n, n);
            for b in &ends {
                e = e.axpy(f, random_fe(f, &mut rng), b);
            }
            let cp = e.charpoly(f);
            for lambda in poly::roots(f, &cp, &mut rng) {
                let nmat = e.sub(f, &Mat::scalar(n, lambda)).pow(f, n as u64);
                let rank = nmat.rank(f);
                if rank == 0 || rank == n {
                    continue;
                }
                let ker = nmat.nullspace(f);
                let im: Vec<Vec<Fe>> = (0..n).map(|j| nmat.col(j)).collect();
                for part in [ker, im] {
                    let amb: Vec<Vec<Fe>> = part.iter().map(|c| lift(f, &w, c)).collect();
                    todo.push(Subspace::spanned(f, m.dim, &amb));
                }
                continue 'outer;
            }
        }
        out.push(w);
    }
    Ok(out)
}

fn unit(n: usize, k: usize) -> Vec<Fe> {
    let mut v = vec![Fe::ZERO; n];
    v[k] = Fe::ONE;
    v
}

/// Ambient vector with the given coordinates in the echelon basis of `w`.
pub fn lift(f: &Field, w: &Subspace, coords: &[Fe]) -> Vec<Fe> {
    let mut v = vec![Fe::ZERO; w.n];
    for (b, &c) in w.basis.iter().zip(coords) {
        vec_axpy(f, &mut v, c, b);
    }
    v
}

/// Projective cover of a simple module, found as the indecomposable
/// summand of `ind_H^G(χ)` whose socle is the simple. For finite group
/// algebras this is also its injective hull.
pub struct Hull {
    pub module: FModule,
    pub socle_parts: Vec<(Signature, usize)>,
    pub socle_dim: usize,
}

pub fn injective_hull(env: &Env, catalog: &Catalog, sig: &Signature, seed: u64) -> Result<Hull, ModError> {
    let f = env.field();
    let ind = env.induce_from_torus(catalog.which, sig.chi)?;
    for w in indecomposable_summands(env, &ind, seed, 40)? {
        let s = ind.submodule(f, &w)?;
        if catalog.hom_dim(env, sig, &s) == 0 {
            continue;
        }
        let (soc, parts) = catalog.socle(env, &s);
        return Ok(Hull { module: s, socle_parts: parts, socle_dim: soc.dim() });
    }
    Err(ModError::NoSummand)
}

/// `M` is projective iff it is free over the Sylow subgroup `𝕌`, iff the
/// norm element `Σ_u u` has image of dimension `dim M / |𝕌|`.
pub fn is_projective(env: &Env, m: &FModule) -> Result<bool, ModError> {
    let f = env.field();
    let act = Action::new(env, m)?;
    let size = env.groups.unip_len(m.which);
    let mut norm = Mat::zeros(m.dim, m.dim);
    for k in 0..size {
        norm = norm.add(f, act.radical(k));
    }
    Ok(norm.rank(f) * size == m.dim)
}

/// Check `ρ(a)ρ(b) = ρ(ab)` on pseudo-random pairs, and the orders of the
/// torus generators.
pub fn check_representation(env: &Env, m: &FModule, samples: usize, seed: u64) -> Result<bool, ModError> {
    let f = env.field();
    let g = &env.groups;
    let q = env.q();
    let act = Action::new(env, m)?;
    if m.gens[0].pow(f, q * q - 1) != Mat::identity(m.dim) || m.gens[1].pow(f, q + 1) != Mat::identity(m.dim) {
        return Ok(false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = g.order(m.which);
    for _ in 0..samples {
        let a = g.element(m.which, rng.gen_range(0..order));
        let b = g.element(m.which, rng.gen_range(0..order));
        if act.rho(&a)?.mul(f, &act.rho(&b)?) != act.rho(&g.mul(&a, &b))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Trace of `ρ(h)` for torus elements.
pub fn torus_trace(env: &Env, m: &FModule, h: TorusElem) -> Result<Fe, ModError> {
    let act = Action::new(env, m)?;
    Ok(act.torus(h).trace(env.field()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env3() -> Env {
        Env::new(Tower::char_p(3, 1, 0).unwrap()).unwrap()
    }

    #[test]
    fn induced_modules_are_representations() {
        let env = env3();
        for which in [Which::Gamma, Which::GammaPrime] {
            for chi in [TorusChar::new(3, 0, 0), TorusChar::new(3, 1, 2), TorusChar::new(3, 5, 1)] {
                let m = env.induce_from_borel(which, chi).unwrap();
                assert_eq!(m.dim, if which == Which::Gamma { 28 } else { 4 });
                assert!(check_representation(&env, &m, 40, 7).unwrap());
            }
        }
    }

    #[test]
    fn torus_trace_is_fixed_point_sum() {
        let env = env3();
        let f = env.field();
        let g = &env.groups;
        let chi = TorusChar::new(3, 3, 1);
        let m = env.induce_from_borel(Which::Gamma, chi).unwrap();
        let reps = g.right_coset_reps(Which::Gamma);
        for h in TorusElem::all(3) {
            let mut expect = Fe::ZERO;
            for r in &reps {
                let (b, j) = g.right_coset(Which::Gamma, &g.mul(r, &g.torus(h))).unwrap();
                let (_, i) = g.right_coset(Which::Gamma, r).unwrap();
                if i == j {
                    expect = f.add(expect, chi.value(&env.tower, b));
                }
            }
            assert_eq!(torus_trace(&env, &m, h).unwrap(), expect);
        }
    }

    #[test]
    fn weyl_operator_intertwines() {
        let env = env3();
        let f = env.field();
        for which in [Which::Gamma, Which::GammaPrime] {
            for chi in TorusChar::all(3).into_iter().step_by(5) {
                let a = env.induce_from_borel(which, chi).unwrap();
                let b = env.induce_from_borel(which, chi.s_conj(3)).unwrap();
                let t = env.weyl_operator(which, chi).unwrap();
                for (ga, gb) in a.gens.iter().zip(&b.gens) {
                    assert_eq!(t.mul(f, ga), gb.mul(f, &t));
                }
            }
        }
    }

    #[test]
    fn steinberg_and_trivial_images() {
        let env = env3();
        let one = TorusChar::new(3, 0, 0);
        let st = env.hecke_image(Which::Gamma, one, false).unwrap();
        assert_eq!(st.dim, 27);
        let triv = env.hecke_image(Which::Gamma, one, true).unwrap();
        assert_eq!(triv.dim, 1);
        assert!(is_projective(&env, &st).unwrap());
        assert!(!is_projective(&env, &triv).unwrap());
        // regular character of Γ' with (j, k) = (1, 2)
        let chi = TorusChar::new(3, 1, 0);
        assert_eq!(env.hecke_image(Which::GammaPrime, chi, false).unwrap().dim, 2);
    }

    #[test]
    fn chop_is_seed_independent_and_sums_to_dim() {
        let env = env3();
        for chi in [TorusChar::new(3, 0, 0), TorusChar::new(3, 1, 0), TorusChar::new(3, 2, 3)] {
            let m = env.induce_from_borel(Which::Gamma, chi).unwrap();
            let base = chop(&env, &m, 0, 200).unwrap();
            assert_eq!(base.total_dim(), 28);
            for seed in 1..10 {
                let r = chop(&env, &m, seed, 200).unwrap();
                assert_eq!(r.factors, base.factors);
            }
        }
    }

    #[test]
    fn chop_of_simple_is_itself() {
        let env = env3();
        let st = env.hecke_image(Which::Gamma, TorusChar::new(3, 0, 0), false).unwrap();
        let r = chop(&env, &st, 3, 200).unwrap();
        assert_eq!(r.factors.len(), 1);
        assert_eq!(r.factors[0].1, 1);
        assert_eq!(r.factors[0].0.dim, 27);
    }

    #[test]
    fn gamma_prime_regular_principal_series_has_two_factors() {
        let env = env3();
        for chi in TorusChar::all(3) {
            if chi.s_conj(3) == chi {
                continue;
            }
            let m = env.induce_from_borel(Which::GammaPrime, chi).unwrap();
            let r = chop(&env, &m, 1, 200).unwrap();
            let dims: Vec<usize> = r.factors.iter().flat_map(|(s, k)| std::iter::repeat(s.dim).take(*k)).collect();
            assert_eq!(dims, vec![2, 2]);
        }
    }

    #[test]
    fn homs_and_socle() {
        let env = env3();
        let f = env.field();
        let cat = Catalog::build(&env, Which::GammaPrime).unwrap();
        assert_eq!(cat.len(), 48);
        let chi = TorusChar::new(3, 1, 0);
        let m = env.induce_from_borel(Which::GammaPrime, chi).unwrap();
        let (soc, parts) = cat.socle(&env, &m);
        assert_eq!(soc.dim(), 2);
        assert_eq!(parts.len(), 1);
        // every hom found is an intertwiner
        for e in &cat.entries {
            let homs = cat.cyclic[cat.entries.iter().position(|x| x.sig == e.sig).unwrap()].homs_into(&env, &m);
            for h in homs {
                for (gt, gm) in e.module.gens.iter().zip(&m.gens) {
                    assert_eq!(h.mul(f, gt), gm.mul(f, &h));
                }
            }
        }
    }

    #[test]
    fn hulls_at_q3() {
        let env = env3();
        let cat = Catalog::build(&env, Which::GammaPrime).unwrap();
        let mut total = 0;
        for e in &cat.entries {
            let hull = injective_hull(&env, &cat, &e.sig, 5).unwrap();
            assert_eq!(hull.socle_dim, e.sig.dim);
            let expect = if e.chi.s_conj(3) == e.chi { 3 } else { 6 };
            assert_eq!(hull.module.dim, expect, "{:?}", e.sig);
            total += e.sig.dim * hull.module.dim;
        }
        assert_eq!(total, 384);
    }

    #[test]
    fn dual_and_quotient_dimensions() {
        let env = env3();
        let f = env.field();
        let chi = TorusChar::new(3, 0, 0);
        let m = env.induce_from_borel(Which::Gamma, chi).unwrap();
        let t = env.weyl_operator(Which::Gamma, chi).unwrap();
        let cols: Vec<Vec<Fe>> = (0..28).map(|j| t.col(j)).collect();
        let img = Subspace::spanned(f, 28, &cols);
        let quo = m.quotient(f, &img).unwrap();
        assert_eq!(quo.dim, 1);
        assert!(check_representation(&env, &quo, 20, 1).unwrap());
        let d = m.dual(f);
        assert!(check_representation(&env, &d, 20, 2).unwrap());
    }
}
