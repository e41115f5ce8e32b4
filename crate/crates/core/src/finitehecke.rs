//! The finite Hecke algebras `End_Γ(ind_𝕌^Γ 1)` and `End_{Γ'}(ind_{𝕌'}^{Γ'} 1)`
//! as convolution algebras of biinvariant functions, their simple modules,
//! and the functor of radical invariants.

use crate::fieldtower::{CharCase, Fe, Field, TorusChar, TorusElem};
use crate::finitegroups::{Cell, GroupError, Groups, Which, M3};
use crate::linalg::Mat;
use crate::modrep::{fixed_space, line_character, Action, Env, FModule, ModError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HeckeError {
    #[error("elements of different algebras: {0} and {1}")]
    TagMismatch(&'static str, &'static str),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Module(#[from] ModError),
}

/// Double coset `𝕌 h 𝕌` or `𝕌 n h 𝕌`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Label {
    Torus(TorusElem),
    Weyl(TorusElem),
}

impl Label {
    pub fn index(self, q: u64) -> usize {
        let hn = ((q * q - 1) * (q + 1)) as usize;
        match self {
            Label::Torus(h) => h.index(q),
            Label::Weyl(h) => hn + h.index(q),
        }
    }

    pub fn from_index(k: usize, q: u64) -> Label {
        let hn = ((q * q - 1) * (q + 1)) as usize;
        if k < hn {
            Label::Torus(TorusElem::from_index(k, q))
        } else {
            Label::Weyl(TorusElem::from_index(k - hn, q))
        }
    }

    /// Double coset containing `g`.
    pub fn of(groups: &Groups, which: Which, g: &M3) -> Result<Label, GroupError> {
        Ok(match groups.bruhat(which, g)? {
            Cell::Borel { h, .. } => Label::Torus(h),
            Cell::Big { h, .. } => Label::Weyl(h),
        })
    }

    /// A representative matrix.
    pub fn rep(self, groups: &Groups) -> M3 {
        match self {
            Label::Torus(h) => groups.torus(h),
            Label::Weyl(h) => groups.mul(&groups.ns, &groups.torus(h)),
        }
    }
}

/// Element of a finite Hecke algebra in the basis `T_h`, `T_{nh}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeElem {
    pub which: Which,
    pub coeffs: Vec<Fe>,
}

/// Convolution algebra with `T_n²` obtained by counting over `Γ/𝕌`.
pub struct HeckeAlgebra {
    pub which: Which,
    pub q: u64,
    field: Field,
    h_order: usize,
    /// Integer structure constants of `T_n * T_n`.
    pub nn_counts: Vec<u64>,
}

/// Representatives `y` of `Γ/𝕌` lying in a double coset.
fn left_cosets_in(groups: &Groups, which: Which, a: Label) -> Vec<M3> {
    match a {
        Label::Torus(h) => vec![groups.torus(h)],
        Label::Weyl(_) => {
            let nh = a.rep(groups);
            (0..groups.unip_len(which)).map(|k| groups.mul(&groups.radical_elem(which, k), &nh)).collect()
        }
    }
}

/// `T_a * T_b` by direct counting: `(φ₁*φ₂)(g) = Σ_{y ∈ Γ/𝕌} φ₁(y) φ₂(y⁻¹ g)`,
/// as integer coefficients on the double-coset basis.
pub fn brute_product(groups: &Groups, which: Which, a: Label, b: Label) -> Result<Vec<u64>, GroupError> {
    let q = groups.q;
    let n = 2 * groups.torus_order();
    let ys = left_cosets_in(groups, which, a);
    let yinv: Vec<M3> = ys.iter().map(|y| groups.inverse(y)).collect();
    let mut out = vec![0u64; n];
    for (c, slot) in out.iter_mut().enumerate() {
        let g = Label::from_index(c, q).rep(groups);
        for yi in &yinv {
            if Label::of(groups, which, &groups.mul(yi, &g))? == b {
                *slot += 1;
            }
        }
    }
    Ok(out)
}

impl HeckeAlgebra {
    pub fn build(env: &Env, which: Which) -> Result<HeckeAlgebra, HeckeError> {
        let q = env.q();
        let id = TorusElem::identity();
        let nn_counts = brute_product(&env.groups, which, Label::Weyl(id), Label::Weyl(id))?;
        Ok(HeckeAlgebra {
            which,
            q,
            field: env.field().clone(),
            h_order: env.groups.torus_order(),
            nn_counts,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.h_order
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn zero(&self) -> HeckeElem {
        HeckeElem { which: self.which, coeffs: vec![Fe::ZERO; self.dim()] }
    }

    pub fn basis(&self, l: Label) -> HeckeElem {
        let mut e = self.zero();
        e.coeffs[l.index(self.q)] = Fe::ONE;
        e
    }

    pub fn one(&self) -> HeckeElem {
        self.basis(Label::Torus(TorusElem::identity()))
    }

    pub fn t_n(&self) -> HeckeElem {
        self.basis(Label::Weyl(TorusElem::identity()))
    }

    pub fn t_h(&self, h: TorusElem) -> HeckeElem {
        self.basis(Label::Torus(h))
    }

    pub fn add(&self, a: &HeckeElem, b: &HeckeElem) -> HeckeElem {
        let f = &self.field;
        HeckeElem { which: self.which, coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| f.add(x, y)).collect() }
    }

    pub fn scale(&self, c: Fe, a: &HeckeElem) -> HeckeElem {
        let f = &self.field;
        HeckeElem { which: self.which, coeffs: a.coeffs.iter().map(|&x| f.mul(c, x)).collect() }
    }

    pub fn sub(&self, a: &HeckeElem, b: &HeckeElem) -> HeckeElem {
        self.add(a, &self.scale(self.field.neg(Fe::ONE), b))
    }

    /// Convolution product.
    pub fn convolve(&self, a: &HeckeElem, b: &HeckeElem) -> Result<HeckeElem, HeckeError> {
        if a.which != self.which || b.which != self.which {
            return Err(HeckeError::TagMismatch(a.which.name(), b.which.name()));
        }
        let f = &self.field;
        let q = self.q;
        let hn = self.h_order;
        let mut out = vec![Fe::ZERO; self.dim()];
        // Σ α_{nh} β_{nh'} collected on k = h^s h', to be hit by T_n² later
        let mut acc = vec![Fe::ZERO; hn];
        for (ka, &x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (kb, &y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let xy = f.mul(x, y);
                let (la, lb) = (Label::from_index(ka, q), Label::from_index(kb, q));
                let target = match (la, lb) {
                    (Label::Torus(h), Label::Torus(h2)) => Label::Torus(h.mul(h2, q)),
                    (Label::Torus(h), Label::Weyl(h2)) => Label::Weyl(h.s_conj(q).mul(h2, q)),
                    (Label::Weyl(h), Label::Torus(h2)) => Label::Weyl(h.mul(h2, q)),
                    (Label::Weyl(h), Label::Weyl(h2)) => {
                        let k = h.s_conj(q).mul(h2, q).index(q);
                        acc[k] = f.add(acc[k], xy);
                        continue;
                    }
                };
                let t = target.index(q);
                out[t] = f.add(out[t], xy);
            }
        }
        for (k, &c) in acc.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let h2 = TorusElem::from_index(k, q);
            for (t, &cnt) in self.nn_counts.iter().enumerate() {
                if cnt == 0 {
                    continue;
                }
                let target = match Label::from_index(t, q) {
                    Label::Torus(h) => Label::Torus(h.mul(h2, q)),
                    Label::Weyl(h) => Label::Weyl(h.mul(h2, q)),
                };
                let i = target.index(q);
                out[i] = f.add(out[i], f.mul(c, f.from_i64(cnt as i64)));
            }
        }
        Ok(HeckeElem { which: self.which, coeffs: out })
    }

    pub fn mul(&self, a: &HeckeElem, b: &HeckeElem) -> HeckeElem {
        self.convolve(a, b).expect("same algebra")
    }

    /// `e_χ = |H|⁻¹ Σ_h χ(h) T_h`.
    pub fn idempotent(&self, env: &Env, chi: TorusChar) -> HeckeElem {
        let f = &self.field;
        let inv = f.inv(f.from_i64(self.h_order as i64)).expect("|H| is invertible");
        let mut e = self.zero();
        for h in TorusElem::all(self.q) {
            e.coeffs[h.index(self.q)] = f.mul(inv, chi.value(&env.tower, h));
        }
        e
    }

    /// `Σ_{y} T_{h_s(y)}` over `F_{q²}^×` (or `F_q^×` when `small`).
    pub fn h_s_sum(&self, env: &Env, small: bool) -> HeckeElem {
        let rf = &env.groups.rf;
        let ys: Vec<u8> = if small {
            rf.base_field().into_iter().filter(|&y| y != 0).collect()
        } else {
            (1..(self.q * self.q) as usize).map(|y| y as u8).collect()
        };
        let mut e = self.zero();
        for y in ys {
            let k = Label::Torus(env.groups.h_s(y)).index(self.q);
            e.coeffs[k] = self.field.add(e.coeffs[k], Fe::ONE);
        }
        e
    }

    /// `τ_s = (q+1) Σ_{F_{q²}^×} T_{h_s(y)} − q Σ_{F_q^×} T_{h_s(y)}`.
    pub fn tau_s(&self, env: &Env) -> HeckeElem {
        let f = &self.field;
        let big = self.scale(f.from_i64(self.q as i64 + 1), &self.h_s_sum(env, false));
        let small = self.scale(f.from_i64(self.q as i64), &self.h_s_sum(env, true));
        self.sub(&big, &small)
    }

    /// `τ_{s'} = Σ_{F_q^×} T_{h_s(y)}`.
    pub fn tau_s_prime(&self, env: &Env) -> HeckeElem {
        self.h_s_sum(env, true)
    }

    /// Size of `𝕌` (resp. `𝕌'`): `q³` or `q`.
    pub fn radical_size(&self) -> u64 {
        match self.which {
            Which::Gamma => self.q.pow(3),
            Which::GammaPrime => self.q,
        }
    }
}

/// Expected constants `(a, b)` in `T_n² e_χ = a T_n e_χ + b e_χ`.
pub fn expected_quadratic(which: Which, chi: TorusChar, q: u64) -> (i64, i64) {
    let q = q as i64;
    let z = chi.zeta_minus_one();
    match (which, chi.case(q as u64)) {
        (Which::Gamma, CharCase::Trivial) => (q.pow(3) - 1, q.pow(3)),
        (Which::Gamma, CharCase::Hybrid) => (q - q * q, q.pow(3)),
        (Which::Gamma, CharCase::Regular) => (0, z * q.pow(3)),
        (Which::GammaPrime, CharCase::Regular) => (0, z * q),
        (Which::GammaPrime, _) => (q - 1, q),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadraticReport {
    pub which: &'static str,
    pub r: u64,
    pub c: u64,
    pub case: &'static str,
    /// Measured constants as residues in the prime field.
    pub measured: (u64, u64),
    pub expected: (i64, i64),
    /// `T_n² e_χ` equals `a T_n e_χ + b e_χ` on the full basis.
    pub exact_form: bool,
    pub matches: bool,
}

/// Measure `T_n² e_χ` by convolution and compare with the case table.
pub fn verify_quadratic(alg: &HeckeAlgebra, env: &Env, chi: TorusChar) -> QuadraticReport {
    let f = alg.field();
    let q = alg.q;
    let e = alg.idempotent(env, chi);
    let tn = alg.t_n();
    let tne = alg.mul(&tn, &e);
    let lhs = alg.mul(&tn, &tne);
    let hn = f.from_i64(alg.h_order as i64);
    let id = TorusElem::identity();
    // coefficient of T_n (resp. 1) in e_χ is |H|⁻¹
    let a = f.mul(hn, lhs.coeffs[Label::Weyl(id).index(q)]);
    let b = f.mul(hn, lhs.coeffs[Label::Torus(id).index(q)]);
    let rhs = alg.add(&alg.scale(a, &tne), &alg.scale(b, &e));
    let exact_form = rhs == lhs;
    let expected = expected_quadratic(alg.which, chi, q);
    let matches = exact_form && a == f.from_i64(expected.0) && b == f.from_i64(expected.1);
    let res = |x: Fe| f.to_prime(x).unwrap_or(u64::MAX);
    QuadraticReport {
        which: alg.which.name(),
        r: chi.r,
        c: chi.c,
        case: chi.case(q).name(),
        measured: (res(a), res(b)),
        expected,
        exact_form,
        matches,
    }
}

/// A one-dimensional right module: `e_χ ↦ 1`, `T_n ↦ value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteHeckeChar {
    pub chi: TorusChar,
    /// `J = J₀(χ)`; false means `J = ∅`.
    pub full_j: bool,
    /// Image of `T_n` as an integer: `0` or `-1`.
    pub t_value: i64,
}

/// `J₀(χ)` or `J₀'(χ)` is nonempty.
pub fn j0_nonempty(which: Which, chi: TorusChar, q: u64) -> bool {
    crate::modrep::j0_nonempty(which, chi, q)
}

/// All simple right modules, by Carter–Lusztig data.
pub fn catalog_characters(which: Which, q: u64) -> Vec<FiniteHeckeChar> {
    let mut out = Vec::new();
    for chi in TorusChar::all(q) {
        if j0_nonempty(which, chi, q) {
            out.push(FiniteHeckeChar { chi, full_j: false, t_value: -1 });
            out.push(FiniteHeckeChar { chi, full_j: true, t_value: 0 });
        } else {
            out.push(FiniteHeckeChar { chi, full_j: false, t_value: 0 });
        }
    }
    out
}

impl FiniteHeckeChar {
    /// Value on an arbitrary algebra element: `T_h ↦ χ(h)⁻¹`,
    /// `T_{nh} ↦ t χ(h)⁻¹`.
    pub fn eval(&self, alg: &HeckeAlgebra, env: &Env, x: &HeckeElem) -> Fe {
        let f = alg.field();
        let q = alg.q;
        let t = f.from_i64(self.t_value);
        let inv = self.chi.inverse(q);
        let mut acc = Fe::ZERO;
        for (k, &c) in x.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = match Label::from_index(k, q) {
                Label::Torus(h) => inv.value(&env.tower, h),
                Label::Weyl(h) => f.mul(t, inv.value(&env.tower, h)),
            };
            acc = f.add(acc, f.mul(c, v));
        }
        acc
    }

    /// The character respects the defining relations it touches: the
    /// commutation `T_n e_ψ = e_{ψ^s} T_n` for every `ψ`, and the quadratic
    /// relation for `χ`. Checked by substitution.
    pub fn respects_relations(&self, alg: &HeckeAlgebra, env: &Env) -> bool {
        let f = alg.field();
        let q = alg.q;
        let tn = alg.t_n();
        let ev = |x: &HeckeElem| self.eval(alg, env, x);
        let t = ev(&tn);
        for psi in TorusChar::all(q) {
            let lhs = f.mul(t, ev(&alg.idempotent(env, psi)));
            let rhs = f.mul(ev(&alg.idempotent(env, psi.s_conj(q))), t);
            if lhs != rhs {
                return false;
            }
        }
        let e = alg.idempotent(env, self.chi);
        if ev(&e) != Fe::ONE {
            return false;
        }
        let (a, b) = expected_quadratic(alg.which, self.chi, q);
        f.mul(t, t) == f.add(f.mul(f.from_i64(a), t), f.from_i64(b))
    }
}

/// Radical invariants `M^𝕌` with the right Hecke action
/// `v·T_h = h⁻¹v`, `v·T_n = Σ_u u n⁻¹ v`.
pub struct InvariantsModule {
    pub basis: Vec<Vec<Fe>>,
    /// Matrix of `v ↦ v·T_n` in the basis (columns are images).
    pub t_n: Mat,
    /// Characters of `H` on the basis vectors, when it is an eigenbasis.
    pub characters: Vec<Option<TorusChar>>,
}

pub fn invariants_functor(env: &Env, m: &FModule) -> Result<InvariantsModule, HeckeError> {
    let f = env.field();
    let basis = fixed_space(env, m);
    let act = Action::new(env, m)?;
    let ninv = act.rho(&env.groups.ns_inv)?;
    let mut sum = Mat::zeros(m.dim, m.dim);
    for k in 0..env.groups.unip_len(m.which) {
        sum = sum.add(f, act.radical(k));
    }
    let op = sum.mul(f, &ninv);
    let sub = crate::linalg::Subspace::spanned(f, m.dim, &basis);
    let basis = sub.basis.clone();
    let k = basis.len();
    let mut t_n = Mat::zeros(k, k);
    for (j, b) in basis.iter().enumerate() {
        let img = op.mul_vec(f, b);
        for (i, c) in sub.coords(&img).into_iter().enumerate() {
            t_n.set(i, j, c);
        }
    }
    let characters = basis.iter().map(|b| line_character(env, m, b)).collect();
    Ok(InvariantsModule { basis, t_n, characters })
}

impl InvariantsModule {
    /// For a one-dimensional result: the matching catalog character.
    pub fn as_character(&self, which: Which, q: u64, f: &Field) -> Option<FiniteHeckeChar> {
        if self.basis.len() != 1 {
            return None;
        }
        let chi = self.characters[0]?;
        let t = self.t_n.get(0, 0);
        let t_value = if t.is_zero() {
            0
        } else if t == f.neg(Fe::ONE) {
            -1
        } else {
            return None;
        };
        catalog_characters(which, q).into_iter().find(|c| c.chi == chi && c.t_value == t_value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldtower::Tower;
    use crate::modrep::Catalog;

    fn env_p() -> Env {
        Env::new(Tower::char_p(3, 1, 0).unwrap()).unwrap()
    }
    fn env_ell() -> Env {
        Env::new(Tower::char_ell(3, 1, 0).unwrap()).unwrap()
    }

    #[test]
    fn rule_based_product_matches_brute_counting() {
        let env = env_ell();
        let f = env.field();
        for which in [Which::Gamma, Which::GammaPrime] {
            let alg = HeckeAlgebra::build(&env, which).unwrap();
            for a in 0..alg.dim() {
                for b in (0..alg.dim()).step_by(if which == Which::Gamma { 3 } else { 1 }) {
                    let (la, lb) = (Label::from_index(a, 3), Label::from_index(b, 3));
                    let brute = brute_product(&env.groups, which, la, lb).unwrap();
                    let fast = alg.mul(&alg.basis(la), &alg.basis(lb));
                    let expect: Vec<Fe> = brute.iter().map(|&c| f.from_i64(c as i64)).collect();
                    assert_eq!(fast.coeffs, expect, "{la:?} {lb:?}");
                }
            }
        }
    }

    #[test]
    fn idempotents_at_q3() {
        for env in [env_p(), env_ell()] {
            for which in [Which::Gamma, Which::GammaPrime] {
                let alg = HeckeAlgebra::build(&env, which).unwrap();
                let chis = TorusChar::all(3);
                let es: Vec<HeckeElem> = chis.iter().map(|&c| alg.idempotent(&env, c)).collect();
                let mut total = alg.zero();
                for (i, e) in es.iter().enumerate() {
                    assert_eq!(alg.mul(e, e), *e);
                    for e2 in es.iter().skip(i + 1).step_by(5) {
                        assert_eq!(alg.mul(e, e2), alg.zero());
                    }
                    total = alg.add(&total, e);
                }
                assert_eq!(total, alg.one());
            }
        }
    }

    #[test]
    fn quadratic_relations_both_tracks() {
        for env in [env_p(), env_ell()] {
            for which in [Which::Gamma, Which::GammaPrime] {
                let alg = HeckeAlgebra::build(&env, which).unwrap();
                for chi in TorusChar::all(3) {
                    let r = verify_quadratic(&alg, &env, chi);
                    assert!(r.matches, "{r:?}");
                }
            }
        }
    }

    #[test]
    fn quadratic_relations_char_three_values() {
        let env = env_p();
        let alg = HeckeAlgebra::build(&env, Which::Gamma).unwrap();
        let one = TorusChar::new(3, 0, 0);
        let e = alg.idempotent(&env, one);
        let tne = alg.mul(&alg.t_n(), &e);
        let sq = alg.mul(&alg.t_n(), &tne);
        assert_eq!(alg.add(&sq, &tne), alg.zero());
        let gp = HeckeAlgebra::build(&env, Which::GammaPrime).unwrap();
        let regular = TorusChar::new(3, 1, 0);
        let e = gp.idempotent(&env, regular);
        let sq = gp.mul(&gp.t_n(), &gp.mul(&gp.t_n(), &e));
        assert_eq!(sq, gp.zero());
    }

    #[test]
    fn quadratic_relation_in_tau_form() {
        let env = env_ell();
        let f = env.field();
        let minus = env.groups.h_s(env.groups.rf.from_int(-1));
        for which in [Which::Gamma, Which::GammaPrime] {
            let alg = HeckeAlgebra::build(&env, which).unwrap();
            let tau = match which {
                Which::Gamma => alg.tau_s(&env),
                Which::GammaPrime => alg.tau_s_prime(&env),
            };
            let lhs = alg.mul(&alg.t_n(), &alg.t_n());
            let rhs = alg.add(
                &alg.mul(&alg.t_n(), &tau),
                &alg.scale(f.from_i64(alg.radical_size() as i64), &alg.t_h(minus)),
            );
            assert_eq!(lhs, rhs);
        }
        let alg = HeckeAlgebra::build(&env, Which::Gamma).unwrap();
        let (ts, tsp) = (alg.tau_s(&env), alg.tau_s_prime(&env));
        let expect = alg.scale(f.from_i64(2), &ts);
        assert_eq!(alg.mul(&ts, &tsp), expect);
        assert_eq!(alg.mul(&tsp, &ts), expect);
    }

    #[test]
    fn catalog_counts() {
        assert_eq!(catalog_characters(Which::Gamma, 3).len(), 36);
        assert_eq!(catalog_characters(Which::GammaPrime, 3).len(), 48);
        let env = env_p();
        for which in [Which::Gamma, Which::GammaPrime] {
            let alg = HeckeAlgebra::build(&env, which).unwrap();
            for c in catalog_characters(which, 3) {
                assert!(c.respects_relations(&alg, &env), "{c:?}");
            }
            // a wrong value for T_n breaks the quadratic relation on J₀ ≠ ∅
            let bad = FiniteHeckeChar { chi: TorusChar::new(3, 0, 0), full_j: false, t_value: 1 };
            assert!(!bad.respects_relations(&alg, &env));
        }
    }

    #[test]
    fn invariants_of_catalog_simples_match_carter_lusztig() {
        let env = env_p();
        let f = env.field();
        for which in [Which::Gamma, Which::GammaPrime] {
            let cat = Catalog::build(&env, which).unwrap();
            for e in &cat.entries {
                let inv = invariants_functor(&env, &e.module).unwrap();
                let c = inv.as_character(which, 3, f).expect("one-dimensional");
                assert_eq!((c.chi, c.full_j), (e.chi, e.full_j), "{which:?} {:?}", e.sig);
            }
        }
    }

    #[test]
    fn steinberg_and_trivial_values() {
        let env = env_p();
        let f = env.field();
        let one = TorusChar::new(3, 0, 0);
        let st = env.hecke_image(Which::Gamma, one, false).unwrap();
        let inv = invariants_functor(&env, &st).unwrap();
        assert_eq!(inv.t_n.get(0, 0), f.neg(Fe::ONE));
        let triv = env.trivial(Which::Gamma);
        let inv = invariants_functor(&env, &triv).unwrap();
        assert_eq!(inv.t_n.get(0, 0), Fe::ZERO);
    }

    #[test]
    fn associativity_sampled_at_q5() {
        let env = Env::new(Tower::char_ell(5, 1, 0).unwrap()).unwrap();
        let alg = HeckeAlgebra::build(&env, Which::Gamma).unwrap();
        assert_eq!(alg.dim(), 288);
        let q = 5;
        let ls = [3usize, 150, 200, 17, 287];
        for &a in &ls {
            for &b in &ls {
                let (la, lb) = (Label::from_index(a, q), Label::from_index(b, q));
                let brute = brute_product(&env.groups, Which::Gamma, la, lb).unwrap();
                let expect: Vec<Fe> = brute.iter().map(|&c| env.field().from_i64(c as i64)).collect();
                assert_eq!(alg.mul(&alg.basis(la), &alg.basis(lb)).coeffs, expect);
                for &c in &ls {
                    let x = alg.basis(la);
                    let y = alg.basis(lb);
                    let z = alg.basis(Label::from_index(c, q));
                    assert_eq!(alg.mul(&alg.mul(&x, &y), &z), alg.mul(&x, &alg.mul(&y, &z)));
                }
            }
        }
        for chi in TorusChar::all(5).into_iter().step_by(7) {
            assert!(verify_quadratic(&alg, &env, chi).matches);
        }
    }
}
