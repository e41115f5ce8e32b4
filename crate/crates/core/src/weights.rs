//! Carter–Lusztig labels against highest weights.
//!
//! `ρ_{χ,J}` of `Γ` corresponds to `V_{j,k} ⊗ det^c` and `ρ'_{χ,J'}` of `Γ'`
//! to `V'_{j,k} ⊠ ω^c`. The matching is checked through the action of `H`
//! on the unipotent invariants of the modules built in `modrep`.

use crate::fieldtower::{CharCase, Fe, TorusChar};
use crate::finitegroups::Which;
use crate::finitehecke::HeckeAlgebra;
use crate::linalg::Mat;
use crate::modrep::{chop, fixed_space, line_character, Env, ModError};
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error(transparent)]
    Module(#[from] ModError),
    #[error(transparent)]
    Hecke(#[from] crate::finitehecke::HeckeError),
    #[error("no weight solves the congruence for r = {0}")]
    NoSolution(u64),
    #[error("weight for r = {0} is not unique")]
    NotUnique(u64),
}

/// Carter–Lusztig subset: `J = J₀(χ)` (the image of `1 + T`) or `J = ∅`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum JSet {
    Full,
    Empty,
}

impl JSet {
    pub fn full(self) -> bool {
        self == JSet::Full
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct WeightDescriptor {
    pub group: &'static str,
    pub j: u64,
    pub k: u64,
    pub c: u64,
    pub j_digits: Vec<u64>,
    /// Base-`p` digits of `k`; empty for `Γ'`, where `k` is a `det*` power.
    pub k_digits: Vec<u64>,
}

/// Little-endian base-`p` digits, padded to `f` places.
pub fn digits(mut n: u64, p: u64, f: u32) -> Vec<u64> {
    let mut out = Vec::with_capacity(f as usize);
    for _ in 0..f {
        out.push(n % p);
        n /= p;
    }
    out
}

pub fn from_digits(d: &[u64], p: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &x| acc * p + x)
}

fn descriptor(which: Which, j: u64, k: u64, c: u64, p: u64, f: u32) -> WeightDescriptor {
    WeightDescriptor {
        group: which.name(),
        j,
        k,
        c,
        j_digits: digits(j, p, f),
        k_digits: if which == Which::Gamma { digits(k, p, f) } else { Vec::new() },
    }
}

fn q_of(p: u64, f: u32) -> u64 {
    p.pow(f)
}

/// `(J, V_{j,k} ⊗ det^c)` for each `ρ_{χ,J}` of `Γ`.
pub fn dict_gamma(chi: TorusChar, p: u64, f: u32) -> Result<Vec<(JSet, WeightDescriptor)>, WeightError> {
    let q = q_of(p, f);
    // parameter of ζ in `a^r (a conj(a)⁻¹ δ)^c`
    let r = chi.zeta_exponent(q);
    let c = chi.c;
    if r == 0 {
        return Ok(vec![
            (JSet::Full, descriptor(Which::Gamma, 0, 0, c, p, f)),
            (JSet::Empty, descriptor(Which::Gamma, q - 1, q - 1, c, p, f)),
        ]);
    }
    let sols: Vec<(u64, u64)> = (0..q).flat_map(|j| (0..q).map(move |k| (j, k))).filter(|&(j, k)| j + q * k == r).collect();
    match sols.as_slice() {
        [] => Err(WeightError::NoSolution(r)),
        [(j, k)] => Ok(vec![(JSet::Empty, descriptor(Which::Gamma, *j, *k, c, p, f))]),
        _ => Err(WeightError::NotUnique(r)),
    }
}

/// `(J', V'_{j,k} ⊠ ω^c)` for each `ρ'_{χ,J'}` of `Γ'`.
pub fn dict_gamma_prime(chi: TorusChar, p: u64, f: u32) -> Result<Vec<(JSet, WeightDescriptor)>, WeightError> {
    let q = q_of(p, f);
    let n = (q * q - 1) as i64;
    let r = chi.r;
    let c = chi.c;
    let qi = q as i64;
    if r % (q - 1) == 0 {
        let ks: Vec<u64> = (0..=q).filter(|&k| ((1 - qi) * k as i64).rem_euclid(n) as u64 == r).collect();
        let [k] = ks.as_slice() else {
            return Err(if ks.is_empty() { WeightError::NoSolution(r) } else { WeightError::NotUnique(r) });
        };
        return Ok(vec![
            (JSet::Full, descriptor(Which::GammaPrime, 0, *k, c, p, f)),
            (JSet::Empty, descriptor(Which::GammaPrime, q - 1, (k + 1) % (q + 1), c, p, f)),
        ]);
    }
    let sols: Vec<(u64, u64)> = (1..q)
        .flat_map(|j| (0..=q).map(move |k| (j, k)))
        .filter(|&(j, k)| (-qi * j as i64 + (1 - qi) * k as i64).rem_euclid(n) as u64 == r)
        .collect();
    match sols.as_slice() {
        [] => Err(WeightError::NoSolution(r)),
        [(j, k)] => Ok(vec![(JSet::Empty, descriptor(Which::GammaPrime, *j, *k, c, p, f))]),
        _ => Err(WeightError::NotUnique(r)),
    }
}

pub fn dict(which: Which, chi: TorusChar, p: u64, f: u32) -> Result<Vec<(JSet, WeightDescriptor)>, WeightError> {
    match which {
        Which::Gamma => dict_gamma(chi, p, f),
        Which::GammaPrime => dict_gamma_prime(chi, p, f),
    }
}

/// Character of `H` on the unipotent-fixed line of the highest weight module.
pub fn highest_weight_character(w: &WeightDescriptor, q: u64) -> TorusChar {
    let (j, k, c) = (w.j as i64, w.k as i64, w.c as i64);
    let qi = q as i64;
    if w.group == Which::Gamma.name() {
        // a^{j+qk} (a conj(a)⁻¹ δ)^c, and a conj(a)⁻¹ = a^{1-q}
        TorusChar::new(q, j + qi * k + c * (1 - qi), c)
    } else {
        TorusChar::new(q, -qi * j + (1 - qi) * k, c)
    }
}

/// `∏ (j_i + 1)`: dimension of `Sym^{j_0} ⊗ (Sym^{j_1})^Fr ⊗ ⋯`.
pub fn predicted_dim_gamma_prime(w: &WeightDescriptor) -> u64 {
    w.j_digits.iter().map(|d| d + 1).product()
}

/// Dimensions known for `Γ` without weight-module theory: `r = 0` only.
pub fn predicted_dim_gamma(w: &WeightDescriptor, q: u64) -> Option<u64> {
    match (w.j, w.k) {
        (0, 0) => Some(1),
        (j, k) if j == q - 1 && k == q - 1 => Some(q.pow(3)),
        _ => None,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DictRow {
    pub group: &'static str,
    pub r: u64,
    pub c: u64,
    pub case: &'static str,
    pub j_set: JSet,
    pub j: u64,
    pub k: u64,
    pub predicted_dim: Option<u64>,
    pub measured_dim: usize,
    pub predicted_character: TorusChar,
    pub measured_character: Option<TorusChar>,
    pub verdict: bool,
}

/// One row per Carter–Lusztig module for the characters in `chis`.
pub fn dictionary_rows(env: &Env, which: Which, chis: &[TorusChar]) -> Result<Vec<DictRow>, WeightError> {
    let q = env.q();
    let p = env.tower.p;
    let f = env.tower.f;
    let mut rows = Vec::new();
    for &chi in chis {
        for (jset, w) in dict(which, chi, p, f)? {
            let m = env.hecke_image(which, chi, jset.full())?;
            let fixed = fixed_space(env, &m);
            let measured_character = match fixed.as_slice() {
                [v] => line_character(env, &m, v),
                _ => None,
            };
            let predicted_character = highest_weight_character(&w, q);
            let predicted_dim = match which {
                Which::Gamma => predicted_dim_gamma(&w, q),
                Which::GammaPrime => Some(predicted_dim_gamma_prime(&w)),
            };
            let verdict = measured_character == Some(predicted_character) && predicted_dim.map_or(true, |d| d == m.dim as u64);
            rows.push(DictRow {
                group: which.name(),
                r: chi.r,
                c: chi.c,
                case: chi.case(q).name(),
                j_set: jset,
                j: w.j,
                k: w.k,
                predicted_dim,
                measured_dim: m.dim,
                predicted_character,
                measured_character,
                verdict,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct Bijectivity {
    pub group: &'static str,
    pub modules: usize,
    pub distinct_weights: usize,
    pub expected: u64,
    pub injective: bool,
}

/// The dictionary is injective and hits `q²(q+1)` (resp. `q(q+1)²`) weights.
pub fn bijectivity(which: Which, p: u64, f: u32) -> Result<Bijectivity, WeightError> {
    let q = q_of(p, f);
    let mut seen = BTreeSet::new();
    let mut modules = 0;
    for chi in TorusChar::all(q) {
        for (_, w) in dict(which, chi, p, f)? {
            modules += 1;
            seen.insert(w);
        }
    }
    let expected = match which {
        Which::Gamma => q * q * (q + 1),
        Which::GammaPrime => q * (q + 1) * (q + 1),
    };
    Ok(Bijectivity { group: which.name(), modules, distinct_weights: seen.len(), expected, injective: seen.len() == modules })
}

#[derive(Clone, Debug, Serialize)]
pub struct DimLemmaRow {
    pub r: u64,
    pub c: u64,
    pub j_digits: Vec<u64>,
    pub predicted: u64,
    pub measured: usize,
    pub target: u64,
    pub equal: bool,
    /// `ρ'_{χ^s,∅} → ind(χ) → ρ'_{χ,∅}` is exact.
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimLemmaReport {
    pub q: u64,
    pub rows: Vec<DimLemmaRow>,
    pub all_equal: bool,
}

/// Regular characters of `Γ'` (those moved by `s`), or the given subset.
pub fn regular_prime_characters(q: u64) -> Vec<TorusChar> {
    TorusChar::all(q).into_iter().filter(|c| c.s_conj(q) != *c).collect()
}

/// `dim ρ'_{χ,∅} + dim ρ'_{χ^s,∅}` against `q + 1` for each `χ` in `chis`.
pub fn dimlemma_check(env: &Env, chis: &[TorusChar]) -> Result<DimLemmaReport, WeightError> {
    let q = env.q();
    let p = env.tower.p;
    let f = env.tower.f;
    let fld = env.field();
    let mut rows = Vec::new();
    for &chi in chis {
        let chi_s = chi.s_conj(q);
        let (_, w) = dict_gamma_prime(chi, p, f)?.remove(0);
        let predicted = predicted_dim_gamma_prime(&w) + w.j_digits.iter().map(|d| p - d).product::<u64>();
        let a = env.hecke_image(Which::GammaPrime, chi, false)?;
        let b = env.hecke_image(Which::GammaPrime, chi_s, false)?;
        let t = env.weyl_operator(Which::GammaPrime, chi)?;
        let t_s = env.weyl_operator(Which::GammaPrime, chi_s)?;
        // image of ind(χ^s) → ind(χ) is the kernel of ind(χ) → ind(χ^s)
        let exact = t.mul(fld, &t_s).is_zero() && t.rank(fld) + t_s.rank(fld) == (q + 1) as usize;
        let measured = a.dim + b.dim;
        rows.push(DimLemmaRow {
            r: chi.r,
            c: chi.c,
            j_digits: w.j_digits,
            predicted,
            measured,
            target: q + 1,
            equal: measured as u64 == q + 1,
            exact,
        });
    }
    let all_equal = rows.iter().all(|r| r.equal);
    Ok(DimLemmaReport { q, rows, all_equal })
}

/// `ind_{𝔹'}^{Γ'}(χ)` does not split: its socle is the single submodule `ρ'_{χ^s,∅}`.
pub fn prime_sequence_nonsplit(env: &Env, chi: TorusChar) -> Result<bool, WeightError> {
    let q = env.q();
    let ind = env.induce_from_borel(Which::GammaPrime, chi)?;
    let sub = env.hecke_image(Which::GammaPrime, chi.s_conj(q), false)?;
    let cat = crate::modrep::Catalog::build_for(env, Which::GammaPrime, &[chi, chi.s_conj(q)])?;
    let (soc, _) = cat.socle(env, &ind);
    Ok(soc.dim() == sub.dim && sub.dim < ind.dim)
}

/// Composition factor dimensions of `ind_{𝔹'}^{Γ'}(χ)`.
pub fn prime_induced_factor_dims(env: &Env, chi: TorusChar, seed: u64) -> Result<Vec<usize>, WeightError> {
    let ind = env.induce_from_borel(Which::GammaPrime, chi)?;
    let rep = chop(env, &ind, seed, 400)?;
    let mut dims: Vec<usize> = rep.factors.iter().flat_map(|(s, k)| std::iter::repeat(s.dim).take(*k)).collect();
    dims.sort();
    Ok(dims)
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitRow {
    pub group: &'static str,
    pub r: u64,
    pub c: u64,
    pub idempotents: bool,
    pub orthogonal: bool,
    pub complete: bool,
    /// Ranks of `1 + T` and `-T` on `ind(χ)`.
    pub image_dims: (usize, usize),
}

/// `e_χ(1 + T)e_χ` and `-e_χ T e_χ` are orthogonal idempotents summing to
/// `e_χ` in the finite Hecke algebra, and split `ind(χ)` accordingly.
pub fn split_idempotents(env: &Env, which: Which) -> Result<Vec<SplitRow>, WeightError> {
    let q = env.q();
    let fld = env.field();
    let alg = HeckeAlgebra::build(env, which)?;
    let t = alg.t_n();
    let one = alg.one();
    let mut rows = Vec::new();
    for chi in TorusChar::all(q) {
        let eligible = match which {
            Which::Gamma => chi.case(q) == CharCase::Trivial,
            Which::GammaPrime => chi.s_conj(q) == chi,
        };
        if !eligible {
            continue;
        }
        let e = alg.idempotent(env, chi);
        let x = alg.mul(&alg.mul(&e, &alg.add(&one, &t)), &e);
        let y = alg.scale(fld.neg(Fe::ONE), &alg.mul(&alg.mul(&e, &t), &e));
        let idempotents = alg.mul(&x, &x) == x && alg.mul(&y, &y) == y;
        let zero = alg.zero();
        let orthogonal = alg.mul(&x, &y) == zero && alg.mul(&y, &x) == zero;
        let complete = alg.add(&x, &y) == e;
        let w = env.weyl_operator(which, chi)?;
        let n = w.rows;
        let p1 = w.add(fld, &Mat::identity(n));
        let p2 = w.scale(fld, fld.neg(Fe::ONE));
        let image_dims = (p1.rank(fld), p2.rank(fld));
        rows.push(SplitRow { group: which.name(), r: chi.r, c: chi.c, idempotents, orthogonal, complete, image_dims });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldtower::Tower;
    use proptest::prelude::*;

    fn env3() -> Env {
        Env::new(Tower::char_p(3, 1, 0).unwrap()).unwrap()
    }

    #[test]
    fn base_q_digits() {
        let [(_, w)] = dict_gamma(TorusChar::new(3, 5, 0), 3, 1).unwrap().try_into().unwrap();
        assert_eq!((w.j, w.k), (2, 1));
        let st = dict_gamma(TorusChar::new(3, 6, 1), 3, 1).unwrap();
        assert_eq!(st[1].1.j, 2);
        assert_eq!(st[1].1.k, 2);
        assert_eq!(st[1].1.c, 1);
    }

    #[test]
    fn prime_dictionary_example() {
        let w = dict_gamma_prime(TorusChar::new(3, 1, 0), 3, 1).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!((w[0].1.j, w[0].1.k), (1, 2));
        assert_eq!(predicted_dim_gamma_prime(&w[0].1), 2);
        // exhaustive uniqueness: j = 2 never solves r = 1
        assert!((0..4).all(|k: i64| (-6 - 2 * k).rem_euclid(8) != 1));
        let fixed = dict_gamma_prime(TorusChar::new(3, 2, 1), 3, 1).unwrap();
        assert_eq!(fixed[0].0, JSet::Full);
        assert_eq!(fixed[0].1.j, 0);
    }

    #[test]
    fn steinberg_weights_at_q9() {
        let w = dict_gamma(TorusChar::new(9, 0, 0), 3, 2).unwrap();
        assert_eq!(w[1].1.j_digits, vec![2, 2]);
        assert_eq!(predicted_dim_gamma(&w[1].1, 9), Some(729));
    }

    #[test]
    fn dictionary_at_q3_matches_modules() {
        let env = env3();
        for which in [Which::Gamma, Which::GammaPrime] {
            let rows = dictionary_rows(&env, which, &TorusChar::all(3)).unwrap();
            for r in &rows {
                assert!(r.verdict, "{r:?}");
            }
        }
        let rows = dictionary_rows(&env, Which::Gamma, &[TorusChar::new(3, 5, 0)]).unwrap();
        assert_eq!(rows[0].measured_character, Some(TorusChar::new(3, 5, 0)));
    }

    #[test]
    fn bijective_counts() {
        for (p, f) in [(3u64, 1u32), (5, 1), (3, 2)] {
            let q = p.pow(f);
            let g = bijectivity(Which::Gamma, p, f).unwrap();
            assert!(g.injective);
            assert_eq!(g.distinct_weights as u64, q * q * (q + 1));
            let h = bijectivity(Which::GammaPrime, p, f).unwrap();
            assert!(h.injective);
            assert_eq!(h.distinct_weights as u64, q * (q + 1) * (q + 1));
        }
        let g = crate::finitegroups::Groups::new(&Tower::char_p(3, 1, 0).unwrap()).unwrap();
        assert_eq!(g.p_regular_class_count(Which::Gamma).unwrap(), 36);
        assert_eq!(g.p_regular_class_count(Which::GammaPrime).unwrap(), 48);
    }

    #[test]
    fn dimension_lemma_at_q3() {
        let env = env3();
        let rep = dimlemma_check(&env, &regular_prime_characters(3)).unwrap();
        assert_eq!(rep.rows.len(), 16);
        assert!(rep.all_equal);
        assert!(rep.rows.iter().all(|r| r.measured == 4 && r.predicted == 4 && r.exact));
        assert!(prime_sequence_nonsplit(&env, TorusChar::new(3, 1, 0)).unwrap());
    }

    #[test]
    fn dimension_lemma_fails_at_q9() {
        let env = Env::new(crate::principalseries::ps_tower(3, 2, 0).unwrap()).unwrap();
        let chi = TorusChar::new(9, 44, 0);
        assert_eq!(chi.s_conj(9), TorusChar::new(9, 4, 0));
        let rep = dimlemma_check(&env, &[chi]).unwrap();
        let row = &rep.rows[0];
        assert_eq!(row.j_digits, vec![1, 1]);
        assert_eq!(row.measured, 8);
        assert_eq!(row.predicted, 8);
        assert!(!row.equal);
        assert!(!row.exact);
    }

    #[test]
    fn split_idempotents_at_q3() {
        let env = env3();
        for (which, big) in [(Which::Gamma, 27), (Which::GammaPrime, 3)] {
            let rows = split_idempotents(&env, which).unwrap();
            assert!(!rows.is_empty());
            for r in rows {
                assert!(r.idempotents && r.orthogonal && r.complete, "{r:?}");
                assert_eq!(r.image_dims, (1, big));
            }
        }
    }

    proptest! {
        #[test]
        fn digits_roundtrip(n in 0u64..729, f in 1u32..4) {
            let p = 3u64;
            let m = n % p.pow(f);
            prop_assert_eq!(from_digits(&digits(m, p, f), p), m);
        }

        #[test]
        fn dictionary_weights_have_the_right_character(r in 0i64..80, c in 0i64..10) {
            let chi = TorusChar::new(9, r, c);
            for which in [Which::Gamma, Which::GammaPrime] {
                for (_, w) in dict(which, chi, 3, 2).unwrap() {
                    prop_assert_eq!(highest_weight_character(&w, 9), chi);
                    prop_assert_eq!(from_digits(&w.j_digits, 3), w.j);
                }
            }
        }
    }
}
