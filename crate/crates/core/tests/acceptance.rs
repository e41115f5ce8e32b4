use serde_json::Value;
use std::time::Instant;
use unihecke::cli::{run, Report, RunConfig, Suite, Verdict};
use unihecke::fieldtower::{smallest_prime_one_mod, CharCase, Field, TorusChar};
use unihecke::finitegroups::Which;
use unihecke::modrep::Env;
use unihecke::proppihecke::{reducibility_sweep, BlockAlgebra};

struct Outcome {
    ok: bool,
    detail: String,
}

fn config(q: u64, suites: &[Suite]) -> RunConfig {
    let mut c = RunConfig::new(q).expect("valid q");
    c.suites = suites.to_vec();
    c
}

fn rows<'a>(r: &'a Report, suite: &str, check: &str) -> Vec<&'a Value> {
    r.suite(suite).map_or(Vec::new(), |s| s.rows.iter().filter(|x| x["check"] == check).collect())
}

fn passed(r: &Report, suite: &str) -> bool {
    r.suite(suite).map_or(false, |s| s.verdict == Verdict::Pass)
}

fn all_ok(rs: &[&Value]) -> bool {
    !rs.is_empty() && rs.iter().all(|x| x["ok"] == true)
}

fn hecke(q: u64, ell: Option<u64>) -> (Report, usize) {
    let mut c = config(q, &[Suite::Fields, Suite::Groups, Suite::HeckeRelations]);
    c.coeff_char = ell;
    let r = run(&c).expect("hecke run");
    let n = rows(&r, "hecke-relations", "quadratic relation").len();
    (r, n)
}

fn criterion1(full: &Report) -> Outcome {
    let q3_chars = TorusChar::all(3).len();
    let q5_chars = TorusChar::all(5).len();
    let ell3 = smallest_prime_one_mod(32);
    let ell5 = smallest_prime_one_mod(24 * 6);
    let (r3l, n3l) = hecke(3, Some(ell3));
    let (r5p, n5p) = hecke(5, None);
    let (r5l, n5l) = hecke(5, Some(ell5));
    let n3p = rows(full, "hecke-relations", "quadratic relation").len();
    let coeff = &full.header.tower.coeff;
    let ok = passed(full, "hecke-relations")
        && (coeff.ell, coeff.m) == (3, 8)
        && passed(&r3l, "hecke-relations")
        && passed(&r5p, "hecke-relations")
        && passed(&r5l, "hecke-relations")
        && [n3p, n3l] == [2 * q3_chars; 2]
        && [n5p, n5l] == [2 * q5_chars; 2];
    Outcome {
        ok,
        detail: format!(
            "q=3 over F_{}^{} and F_{ell3}, q=5 over F_5^{} and F_{ell5}: {n3p}+{n3l}+{n5p}+{n5l} quadratic relations",
            coeff.ell, coeff.m, r5p.header.tower.coeff.m
        ),
    }
}

fn criterion2(full: &Report) -> Outcome {
    let (r3l, _) = hecke(3, Some(smallest_prime_one_mod(32)));
    let mut checked = 0;
    let mut ok = true;
    for r in [full, &r3l] {
        let a = rows(r, "hecke-relations", "T_n^2 = T_n tau + |U| T_h(-1)");
        let b = rows(r, "hecke-relations", "tau_s tau_s' = (q-1) tau_s");
        ok &= a.len() == 2 && b.len() == 1 && all_ok(&a) && all_ok(&b);
        checked += a.len() + b.len();
    }
    Outcome { ok, detail: format!("{checked} relation checks over both coefficient tracks") }
}

fn criterion3(full: &Report) -> Outcome {
    let rs = rows(full, "appendix-ps", "closed form = coset sums");
    let ok = all_ok(&rs) && rs.len() == 3 * TorusChar::all(3).len();
    Outcome { ok, detail: format!("{} (character, alpha) pairs agree exactly", rs.len()) }
}

fn criterion4() -> Outcome {
    let pick = |case| TorusChar::all(3).into_iter().find(|c: &TorusChar| c.case(3) == case).expect("case occurs");
    let instances = [
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
    ];
    let mut ok = true;
    let mut loci = Vec::new();
    for (case, ell, m) in instances {
        let alg = BlockAlgebra::new(pick(case), 3, 3, Field::new(ell, m, 0).expect("field"));
        match reducibility_sweep(&alg) {
            Ok(s) => {
                ok &= s.agree && s.matches_formula;
                loci.push(format!("{}/F_{ell}^{m}:{}", case.name(), s.reducible.len()));
            }
            Err(_) => ok = false,
        }
    }
    Outcome { ok, detail: format!("sweeps {}", loci.join(" ")) }
}

fn criterion5(full: &Report) -> Outcome {
    let r5 = run(&config(5, &[Suite::Fields, Suite::Groups, Suite::HeckeRelations, Suite::ProppClassify, Suite::SupersingularEnum]))
        .expect("q=5 run");
    let mut parts = Vec::new();
    let mut ok = true;
    for (q, r) in [(3, full), (5, &r5)] {
        ok &= passed(r, "supersingular-enum");
        if let Some(t) = rows(r, "supersingular-enum", "total against p^2(p+1)").first() {
            parts.push(format!("q={q}: total {} vs p^2(p+1) = {} (mismatch {})", t["total"], t["claimed_lower_bound"], t["mismatch"]));
        }
    }
    Outcome { ok, detail: parts.join("; ") }
}

fn criterion6(full: &Report) -> Outcome {
    let env = Env::new(RunConfig::new(3).unwrap().tower().unwrap()).expect("env");
    let mut dims_ok = true;
    for chi in TorusChar::all(3).into_iter().filter(|c| c.case(3) == CharCase::Trivial) {
        let st = env.hecke_image(Which::Gamma, chi, false).map(|m| m.dim);
        let one = env.hecke_image(Which::Gamma, chi, true).map(|m| m.dim);
        dims_ok &= st.ok() == Some(27) && one.ok() == Some(1);
    }
    let prime_rows: Vec<&Value> = rows(full, "dictionary", "weight dictionary").into_iter().filter(|r| r["group"] == Which::GammaPrime.name()).collect();
    let q3 = passed(full, "dictionary") && passed(full, "dimlemma") && all_ok(&prime_rows);
    let r9 = run(&config(9, &[Suite::Fields, Suite::Groups, Suite::Dictionary, Suite::Dimlemma])).expect("q=9 run");
    let head = rows(&r9, "dimlemma", "sum differs from q + 1 for some regular character");
    let unequal = rows(&r9, "dimlemma", "dimension sum = digit formula").iter().filter(|r| r["equal"] == false).count();
    let ok = dims_ok && q3 && passed(&r9, "dictionary") && passed(&r9, "dimlemma") && all_ok(&head) && unequal > 0;
    Outcome { ok, detail: format!("q=3 dims 27/1 and digit products hold; q=9: {unequal} regular characters with sum != 10") }
}

fn criterion7(full: &Report) -> Outcome {
    let rs = rows(full, "groups", "simple modules = p-regular classes");
    let counts: Vec<String> = rs.iter().map(|r| format!("{}={}", r["group"].as_str().unwrap_or("?"), r["classes"])).collect();
    let ok = all_ok(&rs) && rs.iter().map(|r| r["classes"].as_u64()).collect::<Vec<_>>() == vec![Some(36), Some(48)];
    Outcome { ok, detail: counts.join(", ") }
}

fn criterion8(full: &Report) -> Outcome {
    let sum = rows(full, "injective-hulls", "sum of dim * hull dim = |Gamma'|");
    let hulls = rows(full, "injective-hulls", "hull");
    let dims: std::collections::BTreeMap<String, usize> = hulls.iter().fold(Default::default(), |mut m, r| {
        *m.entry(format!("{}", r["hull_dim"])).or_insert(0) += 1;
        m
    });
    let ok = passed(full, "injective-hulls") && hulls.len() == 48 && sum.first().map_or(false, |r| r["sum"] == 384);
    Outcome { ok, detail: format!("{} hulls, dims {:?}, weighted sum {}", hulls.len(), dims, sum.first().map_or(Value::Null, |r| r["sum"].clone())) }
}

fn criterion9() -> Outcome {
    let r = run(&config(9, &[Suite::Fields, Suite::Groups, Suite::Dictionary, Suite::QneqPObstruction])).expect("q=9 run");
    let ok = passed(&r, "qneq-p-obstruction");
    let prof = rows(&r, "qneq-p-obstruction", "hull of the trivial module sees {1, mu, mu^s}");
    Outcome { ok, detail: format!("hull profile {}", prof.first().map_or(Value::Null, |x| x["profile"].clone())) }
}

fn criterion10(full: &Report) -> Outcome {
    let init = rows(full, "homology", "initial diagram");
    let pure = rows(full, "homology", "pure system: H0 = inj(P)");
    let levels = rows(full, "homology", "tree levels");
    let ok = passed(full, "homology") && init.len() == 48 && pure.len() == 4 && full.config.depth == 3;
    Outcome {
        ok,
        detail: format!(
            "depth 3 ball with {} vertices, {} initial diagrams, {} pure systems",
            levels.first().map_or(Value::Null, |x| x["vertices"].clone()),
            init.len(),
            pure.len()
        ),
    }
}

fn criterion11(full: &Report) -> Outcome {
    let again = run(&full.config).expect("second run");
    let (a, b) = (full.to_json().unwrap(), again.to_json().unwrap());
    Outcome { ok: a == b, detail: format!("{} bytes, identical = {}", a.len(), a == b) }
}

fn main() {
    let start = Instant::now();
    let full = run(&RunConfig::new(3).expect("q=3")).expect("full q=3 run");
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "Hecke quadratic relations", criterion1(&full)),
        (2, "braid-type relations in tau form", criterion2(&full)),
        (3, "principal series closed forms", criterion3(&full)),
        (4, "reducibility loci", criterion4()),
        (5, "supersingular enumeration", criterion5(&full)),
        (6, "dictionary and dimensions", criterion6(&full)),
        (7, "simple modules vs p-regular classes", criterion7(&full)),
        (8, "injective hulls", criterion8(&full)),
        (9, "obstruction at q = 9", criterion9()),
        (10, "coefficient systems and homology", criterion10(&full)),
        (11, "determinism", criterion11(&full)),
    ];
    let mut failed = 0;
    for (n, name, o) in &results {
        println!("criterion {n:>2} {} {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.ok);
    }
    println!("{} of {} criteria pass ({:.0?})", results.len() - failed, results.len(), start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
