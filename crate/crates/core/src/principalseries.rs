//! `I(1)`-invariants of principal series `ind_B^G(ε)`.
//!
//! The space is spanned by `f₁` (support `B·I(1)`) and `f₂` (support
//! `B·n_s·I(1)`). Actions are computed twice: from the closed-form table and
//! by summing over explicit coset representatives in the local field.

use crate::fieldtower::{CharCase, Fe, Field, TorusChar, TorusElem, Tower};
use crate::finitegroups::{GroupError, Groups};
use crate::linalg::Mat;
use crate::localfield::{CosetClass, LocalError, LocalField, LocalMatrix};
use crate::proppihecke::{
    canonical, classify_simples, enumerate_supersingular, intertwiner, BlockAlgebra, BlockError, ModuleKind, SimpleModule,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PsError {
    #[error("ε(α) must be nonzero")]
    ZeroAlpha,
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Block(#[from] BlockError),
}

/// `ε` through its restriction `ε*` to `H` and its value at `α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PSCharacter {
    pub eps_star: TorusChar,
    pub alpha_value: Fe,
}

impl PSCharacter {
    pub fn new(eps_star: TorusChar, alpha_value: Fe) -> Result<PSCharacter, PsError> {
        if alpha_value.is_zero() {
            return Err(PsError::ZeroAlpha);
        }
        Ok(PSCharacter { eps_star, alpha_value })
    }
}

/// Action matrices on `{f₁, f₂}` (row convention).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PSModule {
    pub t_s: Mat,
    pub t_s_prime: Mat,
    /// `e_χ` for every `χ ∈ Ĥ`, in `TorusChar::all` order.
    pub idempotents: Vec<(TorusChar, Mat)>,
}

impl PSModule {
    pub fn idempotent(&self, chi: TorusChar) -> &Mat {
        &self.idempotents.iter().find(|(c, _)| *c == chi).expect("character of H").1
    }

    /// Exactly the idempotents of `ε*` and `(ε*)^s` act nonzero, and they
    /// sum to the identity.
    pub fn idempotents_consistent(&self, f: &Field, eps: &PSCharacter, q: u64) -> bool {
        let es = eps.eps_star.s_conj(q);
        let mut sum = Mat::zeros(2, 2);
        for (chi, m) in &self.idempotents {
            let expected_nonzero = *chi == eps.eps_star || *chi == es;
            if m.is_zero() == expected_nonzero {
                return false;
            }
            sum = sum.add(f, m);
        }
        sum == Mat::identity(2)
    }
}

fn mat2(a: Fe, b: Fe, c: Fe, d: Fe) -> Mat {
    Mat::from_rows(&[vec![a, b], vec![c, d]])
}

/// The closed-form action table.
pub fn ps_module_closed_form(eps: &PSCharacter, q: u64, f: &Field) -> PSModule {
    let chi = eps.eps_star;
    let u = eps.alpha_value;
    let z = Fe::ZERO;
    let one = Fe::ONE;
    let m1 = f.neg(one);
    let (t_s, t_s_prime) = match chi.case(q) {
        CharCase::Trivial => (mat2(z, one, z, m1), mat2(m1, z, u, z)),
        CharCase::Hybrid => (mat2(z, one, z, z), mat2(m1, z, u, z)),
        CharCase::Regular => {
            let zeta = f.from_i64(chi.zeta_minus_one());
            (mat2(z, one, z, z), mat2(z, z, f.mul(zeta, u), z))
        }
    };
    let chi_s = chi.s_conj(q);
    let idempotents = TorusChar::all(q)
        .into_iter()
        .map(|c| {
            let d = |b: bool| if b { one } else { z };
            (c, mat2(d(c == chi), z, z, d(c == chi_s)))
        })
        .collect();
    PSModule { t_s, t_s_prime, idempotents }
}

/// Evaluates `f₁`, `f₂` at points of `G` through the cell decomposition.
pub struct PsEvaluator<'a> {
    pub tower: &'a Tower,
    pub groups: &'a Groups,
    pub lf: LocalField,
    pub eps: PSCharacter,
}

impl<'a> PsEvaluator<'a> {
    pub fn new(tower: &'a Tower, groups: &'a Groups, precision: usize, eps: PSCharacter) -> PsEvaluator<'a> {
        PsEvaluator { tower, groups, lf: LocalField::new(groups, precision), eps }
    }

    fn eps_torus(&self, h: TorusElem) -> Fe {
        self.eps.eps_star.value(self.tower, h)
    }

    /// `f_i(g)` for `i ∈ {0, 1}`.
    pub fn eval(&self, i: usize, g: &LocalMatrix) -> Result<Fe, PsError> {
        let f = &self.tower.coeff;
        let cd = self.lf.cell_decompose(self.groups, g)?;
        let want = if i == 0 { CosetClass::BI1 } else { CosetClass::BNsI1 };
        if cd.cell != want {
            return Ok(Fe::ZERO);
        }
        // diag(b) = α^{-v} · [h] · (pro-p part)
        let (v, h) = self.lf.torus_part(self.groups, &cd.b)?;
        let ua = f.powi(self.eps.alpha_value, -v);
        Ok(f.mul(ua, self.eps_torus(h)))
    }

    fn points(&self) -> [LocalMatrix; 2] {
        [self.lf.identity(), self.lf.distinguished().n_s]
    }

    /// Matrix of `v ↦ Σ_k c_k · (g ↦ v(g·r_k))` on `{f₁, f₂}`.
    fn operator(&self, reps: &[(Fe, LocalMatrix)]) -> Result<Mat, PsError> {
        let f = &self.tower.coeff;
        let pts = self.points();
        let mut m = Mat::zeros(2, 2);
        for i in 0..2 {
            for (j, g0) in pts.iter().enumerate() {
                let mut acc = Fe::ZERO;
                for (c, r) in reps {
                    let x = self.eval(i, &self.lf.mat_mul(g0, r))?;
                    acc = f.add(acc, f.mul(*c, x));
                }
                m.set(i, j, acc);
            }
        }
        Ok(m)
    }

    /// `v·T_{n_s} = Σ u(-x, conj y) n_s⁻¹ · v` over `𝕌`.
    pub fn t_s_reps(&self) -> Result<Vec<(Fe, LocalMatrix)>, PsError> {
        let lf = &self.lf;
        let rf = &self.groups.rf;
        let ns_inv = lf.inverse(&lf.distinguished().n_s);
        let mut out = Vec::new();
        for p in &self.groups.unip {
            let u = lf.unipotent(&lf.constant(rf.neg(p.x)), &lf.constant(rf.conj(p.y)), false)?;
            out.push((Fe::ONE, lf.mat_mul(&u, &ns_inv)));
        }
        Ok(out)
    }

    /// `v·T_{n_{s'}} = Σ u⁻(0, ϖ conj y) α n_s⁻¹ · v` over `y + conj y = 0`.
    pub fn t_s_prime_reps(&self) -> Result<Vec<(Fe, LocalMatrix)>, PsError> {
        let lf = &self.lf;
        let rf = &self.groups.rf;
        let d = lf.distinguished();
        let tail = lf.mat_mul(&d.alpha, &lf.inverse(&d.n_s));
        let mut out = Vec::new();
        for &y in &self.groups.unip_prime {
            let u = lf.unipotent(&crate::localfield::LaurentElem::zero(), &lf.monomial(rf.conj(y), 1), true)?;
            out.push((Fe::ONE, lf.mat_mul(&u, &tail)));
        }
        Ok(out)
    }

    /// `v·e_χ = |H|⁻¹ Σ_t χ(t) · t⁻¹·v`.
    pub fn idempotent_reps(&self, chi: TorusChar) -> Vec<(Fe, LocalMatrix)> {
        let f = &self.tower.coeff;
        let q = self.groups.q;
        let inv_h = f.inv(f.from_i64(self.groups.torus_order() as i64)).expect("|H| is a unit");
        TorusElem::all(q)
            .into_iter()
            .map(|t| {
                let c = f.mul(inv_h, chi.value(self.tower, t));
                let m = self.lf.lift(&self.groups.torus(t.inverse(q)));
                (c, m)
            })
            .collect()
    }
}

/// Action matrices measured by summing over coset representatives.
pub fn ps_module_from_cosets(tower: &Tower, groups: &Groups, precision: usize, eps: PSCharacter) -> Result<PSModule, PsError> {
    let ev = PsEvaluator::new(tower, groups, precision, eps);
    let t_s = ev.operator(&ev.t_s_reps()?)?;
    let t_s_prime = ev.operator(&ev.t_s_prime_reps()?)?;
    let mut idempotents = Vec::new();
    for chi in TorusChar::all(groups.q) {
        idempotents.push((chi, ev.operator(&ev.idempotent_reps(chi))?));
    }
    Ok(PSModule { t_s, t_s_prime, idempotents })
}

// ---- classification ---------------------------------------------------------

/// The catalog module matched by `ind_B^G(ε)^{I(1)}`.
#[derive(Clone, Debug, Serialize)]
pub struct PsClassification {
    pub case: &'static str,
    /// Module in the block of `ε*`.
    pub module: ModuleKind,
    /// `(sub, quotient)` when the module is a nonsplit extension of characters.
    pub extension: Option<(ModuleKind, ModuleKind)>,
    /// An explicit intertwiner with the catalog module exists.
    pub isomorphic: bool,
    pub simple: bool,
}

fn generator_images(alg: &BlockAlgebra, m: &SimpleModule) -> Result<Vec<Mat>, BlockError> {
    let mut xs = vec![alg.t_s(), alg.t_s_prime()];
    if alg.case == CharCase::Regular {
        xs.push(alg.idempotent(0));
        xs.push(alg.idempotent(1));
    }
    xs.iter().map(|x| m.act(alg, x)).collect()
}

fn ps_generator_images(ps: &PSModule, eps: &PSCharacter, q: u64, regular: bool) -> Vec<Mat> {
    let mut out = vec![ps.t_s.clone(), ps.t_s_prime.clone()];
    if regular {
        out.push(ps.idempotent(eps.eps_star).clone());
        out.push(ps.idempotent(eps.eps_star.s_conj(q)).clone());
    }
    out
}

/// Eigenvalue of `R` on the row vector `v`, assuming `v` spans an invariant line.
fn eigenvalue(f: &Field, r: &Mat, v: &[Fe]) -> Fe {
    let w = r.transpose().mul_vec(f, v);
    let k = v.iter().position(|x| !x.is_zero()).expect("nonzero vector");
    f.div(w[k], v[k]).expect("nonzero pivot")
}

/// Matches the principal series module against the block catalog
/// (characteristic `p`).
pub fn classify_ps(eps: &PSCharacter, p: u64, q: u64, f: &Field) -> Result<PsClassification, PsError> {
    let alg = BlockAlgebra::new(eps.eps_star, p, q, f.clone());
    if !alg.is_char_p() {
        return Err(BlockError::NotCharP.into());
    }
    let ps = ps_module_closed_form(eps, q, f);
    let u = eps.alpha_value;
    let target = match alg.case {
        CharCase::Trivial | CharCase::Hybrid => alg.module_m(u)?,
        CharCase::Regular => alg.module_pair(Fe::ZERO, u)?,
    };
    let regular = alg.case == CharCase::Regular;
    let a = ps_generator_images(&ps, eps, q, regular);
    let b = generator_images(&alg, &target)?;
    let isomorphic = intertwiner(f, &a, &b).is_some();
    let lines = crate::proppihecke::common_invariant_lines(f, 2, &a);
    let extension = match lines.as_slice() {
        [] => None,
        [v] if !regular => {
            let (t0, t1) = (eigenvalue(f, &a[0], v), eigenvalue(f, &a[1], v));
            let sub = ModuleKind::Character { theta: t0, theta_prime: t1 };
            let quo = ModuleKind::Character {
                theta: f.sub(a[0].trace(f), t0),
                theta_prime: f.sub(a[1].trace(f), t1),
            };
            Some((sub, quo))
        }
        _ => None,
    };
    Ok(PsClassification {
        case: alg.case.name(),
        module: target.kind.clone(),
        simple: lines.is_empty(),
        extension,
        isomorphic,
    })
}

// ---- the nonsupersingular bijection -------------------------------------------

/// Module keyed by the orbit representative of its block. Regular modules
/// of the block of `χ^s` are moved to the block of `χ` by swapping sides.
pub fn normalize(chi: TorusChar, q: u64, kind: ModuleKind) -> (TorusChar, ModuleKind) {
    let c = canonical(chi, q);
    if c == chi {
        return (chi, kind);
    }
    let kind = match kind {
        ModuleKind::Pair(a, b) => ModuleKind::Pair(b, a),
        ModuleKind::Mu(i) => ModuleKind::Mu(1 - i),
        k => k,
    };
    (c, kind)
}

#[derive(Clone, Debug, Serialize)]
pub struct PsRow {
    pub r: u64,
    pub c: u64,
    pub alpha_value: String,
    pub case: &'static str,
    pub matched: String,
    pub agreement: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MatchReport {
    pub catalog: usize,
    pub supersingular: usize,
    pub realized: usize,
    /// `ε(α)` ran over all of `C^×`.
    pub exhaustive: bool,
    pub disjoint: bool,
    /// Every catalog module is supersingular or realized (restricted to the
    /// swept parameters when the sweep is sampled).
    pub covered: bool,
    /// Nothing outside the catalog is realized.
    pub contained: bool,
    /// Supersingular modules have zero central character, realized ones do not.
    pub center_separates: bool,
    pub all_isomorphic: bool,
    pub rows: Vec<PsRow>,
}

/// Values of `ε(α)`: all units when the field has degree at most 4, otherwise
/// 50 seeded samples.
pub fn alpha_sweep(f: &Field, seed: u64) -> (Vec<Fe>, bool) {
    let units: Vec<Fe> = f.elements().filter(|x| !x.is_zero()).collect();
    if f.degree() <= 4 {
        return (units, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick: Vec<Fe> = units.choose_multiple(&mut rng, 50).copied().collect();
    pick.sort();
    (pick, false)
}

fn module_parameter(kind: &ModuleKind) -> Option<Fe> {
    match kind {
        ModuleKind::M(l) => Some(*l),
        ModuleKind::Pair(a, b) => Some(if a.is_zero() { *b } else { *a }),
        _ => None,
    }
}

pub fn nonsupersingular_match(p: u64, q: u64, f: &Field, seed: u64) -> Result<MatchReport, PsError> {
    let (sweep, exhaustive) = alpha_sweep(f, seed);
    let mut catalog = BTreeSet::new();
    for chi in TorusChar::all(q).into_iter().filter(|&c| canonical(c, q) == c) {
        let alg = BlockAlgebra::new(chi, p, q, f.clone());
        let cat = classify_simples(&alg)?;
        for m in cat.characters.iter().chain(cat.family_members(&alg)?.iter()) {
            catalog.insert((chi, m.kind.clone()));
        }
    }
    let mut supersingular = BTreeSet::new();
    let mut center_separates = true;
    for e in enumerate_supersingular(p, q, f)?.entries {
        let chi = TorusChar { r: e.r, c: e.c };
        let alg = BlockAlgebra::new(chi, p, q, f.clone());
        let m = if alg.case == CharCase::Regular {
            alg.mu(0)?
        } else {
            alg.character(f.from_i64(e.t_s), f.from_i64(e.t_s_prime))?
        };
        let cc = m.center_character(&alg)?.unwrap_or_default();
        center_separates &= cc.iter().all(|x| x.is_zero());
        supersingular.insert(normalize(chi, q, m.kind));
    }
    let mut realized = BTreeSet::new();
    let mut rows = Vec::new();
    let mut all_isomorphic = true;
    for chi in TorusChar::all(q) {
        let alg = BlockAlgebra::new(chi, p, q, f.clone());
        for &u in &sweep {
            let eps = PSCharacter::new(chi, u)?;
            let cls = classify_ps(&eps, p, q, f)?;
            all_isomorphic &= cls.isomorphic;
            let pieces: Vec<ModuleKind> = match &cls.extension {
                Some((a, b)) => vec![a.clone(), b.clone()],
                None => vec![cls.module.clone()],
            };
            for k in &pieces {
                let m = match k {
                    ModuleKind::Character { theta, theta_prime } => alg.character(*theta, *theta_prime)?,
                    ModuleKind::M(l) => alg.module_m(*l)?,
                    ModuleKind::Pair(a, b) => alg.module_pair(*a, *b)?,
                    ModuleKind::Mu(i) => alg.mu(*i)?,
                };
                let cc = m.center_character(&alg)?.unwrap_or_default();
                center_separates &= cc.iter().any(|x| !x.is_zero());
                realized.insert(normalize(chi, q, k.clone()));
            }
            let matched = match &cls.extension {
                Some((a, b)) => format!("{} ⊂ {:?} ↠ {}", kind_name(f, a), cls.module, kind_name(f, b)),
                None => kind_name(f, &cls.module),
            };
            rows.push(PsRow {
                r: chi.r,
                c: chi.c,
                alpha_value: f.display(u),
                case: cls.case,
                matched,
                agreement: cls.isomorphic,
            });
        }
    }
    let disjoint = supersingular.is_disjoint(&realized);
    let union: BTreeSet<_> = supersingular.union(&realized).cloned().collect();
    let in_sweep = |k: &ModuleKind| module_parameter(k).map_or(true, |x| sweep.contains(&x));
    let covered = catalog.iter().filter(|(_, k)| in_sweep(k)).all(|x| union.contains(x));
    let contained = union.iter().all(|x| catalog.contains(x));
    Ok(MatchReport {
        catalog: catalog.len(),
        supersingular: supersingular.len(),
        realized: realized.len(),
        exhaustive,
        disjoint,
        covered,
        contained,
        center_separates,
        all_isomorphic,
        rows,
    })
}

pub fn kind_name(f: &Field, k: &ModuleKind) -> String {
    match k {
        ModuleKind::Character { theta, theta_prime } => format!("μ_({},{})", f.display(*theta), f.display(*theta_prime)),
        ModuleKind::Mu(i) => format!("μ_{i}"),
        ModuleKind::M(l) => format!("M({})", f.display(*l)),
        ModuleKind::Pair(a, b) => format!("M({},{})", f.display(*a), f.display(*b)),
    }
}

/// Closed form against coset sums for every `ε*` and the given `ε(α)` values.
#[derive(Clone, Debug, Serialize)]
pub struct AgreementRow {
    pub r: u64,
    pub c: u64,
    pub alpha_value: String,
    pub case: &'static str,
    pub agree: bool,
    pub idempotents_consistent: bool,
}

pub fn closed_form_vs_cosets(tower: &Tower, groups: &Groups, precision: usize, alphas: &[Fe]) -> Result<Vec<AgreementRow>, PsError> {
    let f = &tower.coeff;
    let q = tower.q;
    let mut rows = Vec::new();
    for chi in TorusChar::all(q) {
        for &u in alphas {
            let eps = PSCharacter::new(chi, u)?;
            let closed = ps_module_closed_form(&eps, q, f);
            let measured = ps_module_from_cosets(tower, groups, precision, eps)?;
            rows.push(AgreementRow {
                r: chi.r,
                c: chi.c,
                alpha_value: f.display(u),
                case: chi.case(q).name(),
                agree: closed == measured,
                idempotents_consistent: measured.idempotents_consistent(f, &eps, q),
            });
        }
    }
    Ok(rows)
}

/// Coefficient tower used for principal series: `F_{q²}` already contains
/// every value of every character of `H`.
pub fn ps_tower(p: u64, f: u32, seed: u64) -> Result<Tower, crate::fieldtower::FieldError> {
    Tower::build(p, f, p, seed, Some(2 * f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localfield::DEFAULT_PRECISION;

    fn setup() -> (Tower, Groups) {
        let tower = ps_tower(3, 1, 0).unwrap();
        let groups = Groups::new(&tower).unwrap();
        (tower, groups)
    }

    fn pick(q: u64, case: CharCase) -> TorusChar {
        TorusChar::all(q).into_iter().find(|c| c.case(q) == case).unwrap()
    }

    #[test]
    fn closed_form_table_entries() {
        let (tower, _) = setup();
        let f = &tower.coeff;
        let u = f.from_i64(2);
        for case in [CharCase::Trivial, CharCase::Hybrid, CharCase::Regular] {
            let eps = PSCharacter::new(pick(3, case), u).unwrap();
            let m = ps_module_closed_form(&eps, 3, f);
            // f₁·T_{n_s} = f₂
            assert_eq!(m.t_s.row(0), vec![Fe::ZERO, Fe::ONE]);
            assert!(m.idempotents_consistent(f, &eps, 3));
        }
        let m = ps_module_closed_form(&PSCharacter::new(pick(3, CharCase::Trivial), u).unwrap(), 3, f);
        assert_eq!(m.t_s.row(1), vec![Fe::ZERO, f.from_i64(-1)]);
        let chi = TorusChar::new(3, 1, 0);
        assert_eq!(chi.case(3), CharCase::Regular);
        let m = ps_module_closed_form(&PSCharacter::new(chi, u).unwrap(), 3, f);
        assert_eq!(m.t_s_prime.row(1), vec![f.neg(u), Fe::ZERO]);
        assert!(PSCharacter::new(chi, Fe::ZERO).is_err());
    }

    #[test]
    fn coset_sums_for_trivial_character() {
        let (tower, groups) = setup();
        let eps = PSCharacter::new(TorusChar { r: 0, c: 0 }, Fe::ONE).unwrap();
        let measured = ps_module_from_cosets(&tower, &groups, DEFAULT_PRECISION, eps).unwrap();
        assert_eq!(measured, ps_module_closed_form(&eps, 3, &tower.coeff));
    }

    #[test]
    fn coset_sums_hit_the_stated_zeros() {
        let (tower, groups) = setup();
        let f = &tower.coeff;
        let u = f.from_i64(-1);
        let reg = ps_module_from_cosets(&tower, &groups, DEFAULT_PRECISION, PSCharacter::new(pick(3, CharCase::Regular), u).unwrap()).unwrap();
        assert_eq!(reg.t_s_prime.row(0), vec![Fe::ZERO, Fe::ZERO]);
        let hyb = ps_module_from_cosets(&tower, &groups, DEFAULT_PRECISION, PSCharacter::new(pick(3, CharCase::Hybrid), u).unwrap()).unwrap();
        assert_eq!(hyb.t_s.row(1), vec![Fe::ZERO, Fe::ZERO]);
    }

    #[test]
    fn closed_form_matches_cosets_everywhere() {
        let (tower, groups) = setup();
        let f = &tower.coeff;
        let g = f.generator().unwrap();
        let alphas = [Fe::ONE, g, f.pow(g, 3)];
        let rows = closed_form_vs_cosets(&tower, &groups, DEFAULT_PRECISION, &alphas).unwrap();
        assert_eq!(rows.len(), 32 * 3);
        for r in &rows {
            assert!(r.agree, "{r:?}");
            assert!(r.idempotents_consistent, "{r:?}");
        }
    }

    #[test]
    fn trivial_character_gives_the_extension() {
        let (tower, _) = setup();
        let f = &tower.coeff;
        let cls = classify_ps(&PSCharacter::new(TorusChar { r: 0, c: 0 }, Fe::ONE).unwrap(), 3, 3, f).unwrap();
        assert!(!cls.simple);
        assert!(cls.isomorphic);
        let m1 = f.from_i64(-1);
        assert_eq!(
            cls.extension,
            Some((
                ModuleKind::Character { theta: Fe::ZERO, theta_prime: Fe::ZERO },
                ModuleKind::Character { theta: m1, theta_prime: m1 }
            ))
        );
    }

    #[test]
    fn generic_characters_give_simple_modules() {
        let (tower, _) = setup();
        let f = &tower.coeff;
        for chi in TorusChar::all(3) {
            for u in f.elements().filter(|x| !x.is_zero()) {
                let cls = classify_ps(&PSCharacter::new(chi, u).unwrap(), 3, 3, f).unwrap();
                assert!(cls.isomorphic);
                let reducible = chi.case(3) == CharCase::Trivial && u == Fe::ONE;
                assert_eq!(cls.simple, !reducible, "{chi:?} {}", f.display(u));
                if chi.case(3) == CharCase::Regular {
                    assert_eq!(cls.module, ModuleKind::Pair(Fe::ZERO, u));
                }
            }
        }
    }

    #[test]
    fn nonsupersingular_bijection() {
        let (tower, _) = setup();
        let rep = nonsupersingular_match(3, 3, &tower.coeff, 7).unwrap();
        assert!(rep.exhaustive);
        assert!(rep.disjoint);
        assert!(rep.covered);
        assert!(rep.contained);
        assert!(rep.center_separates);
        assert!(rep.all_isomorphic);
        assert_eq!(rep.catalog, rep.supersingular + rep.realized);
    }
}
