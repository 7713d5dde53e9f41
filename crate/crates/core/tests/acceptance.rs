//! One PASS/FAIL line per acceptance criterion; exits nonzero on failure.

mod common;

use common::*;
use num_bigint::BigInt;
use polyres::homology::term_map;
use polyres::rewriting::rewrite_steps;
use polyres::{
    build_resolution, critical_branchings, critical_nfold, reduce, syzygy_generators, verify_complex, word_problem,
    Basis, Complex, NatElem, Path, Polygraph, Resolution,
};
use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;

type Outcome = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn terms(pairs: &[(&str, i64)]) -> BTreeMap<String, BigInt> {
    pairs.iter().map(|(k, c)| (k.to_string(), BigInt::from(*c))).collect()
}

/// The rendered syzygies of degree `n` as term maps.
fn syzygy_set(res: &Resolution, n: usize) -> Result<BTreeSet<BTreeMap<String, BigInt>>, String> {
    let gens = syzygy_generators(res, n).map_err(|e| e.to_string())?;
    Ok(gens.iter().map(|(_, x)| term_map(res.base(), x)).collect())
}

fn as_res(n: usize) -> Result<Resolution, String> {
    build_resolution(&as_p(), n).map_err(|e| e.to_string())
}

/// α and ℵ: the generators of dimension 3 and 4 of the resolution of As.
fn alpha_aleph(res: &Resolution) -> (String, String) {
    (res.cells(3)[0].name().to_string(), res.cells(4)[0].name().to_string())
}

fn criterion_1() -> Outcome {
    let res = as_res(3)?;
    let got = syzygy_set(&res, 2)?;
    let want = BTreeSet::from([terms(&[("[mu]a", 1), ("a[mu]", -1)])]);
    ensure(got == want, || format!("got {got:?}"))
}

fn criterion_2() -> Outcome {
    let res = as_res(4)?;
    let (a, _) = alpha_aleph(&res);
    let got = syzygy_set(&res, 3)?;
    let want = BTreeSet::from([terms(&[(&format!("a[{a}]"), 1), (&format!("[{a}]"), -1), (&format!("[{a}]a"), 1)])]);
    ensure(got == want, || format!("got {got:?}"))
}

fn criterion_3() -> Outcome {
    let res = as_res(5)?;
    let (_, x) = alpha_aleph(&res);
    let got = syzygy_set(&res, 4)?;
    let want = BTreeSet::from([terms(&[(&format!("[{x}]a"), 1), (&format!("a[{x}]"), -1)])]);
    ensure(got == want, || format!("got {got:?}"))
}

fn criterion_4() -> Outcome {
    let p = as_p();
    for n in 2..=6 {
        let c = critical_nfold(&p, n).map_err(|e| e.to_string())?;
        ensure(c.len() == 1, || format!("order {n}: {} branchings", c.len()))?;
        if n <= 4 {
            let got: BTreeSet<Sig> = c.iter().map(|b| sig_of(&p, &b.source, &b.steps)).collect();
            let want = brute_critical(&p, n, 7);
            ensure(got == want, || format!("order {n}: engine {got:?}, oracle {want:?}"))?;
        }
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let res = as_res(4)?;
    let p = res.base();
    let cx = Complex::new(&res);
    let (a, _) = alpha_aleph(&res);
    let aleph = &res.cells(4)[0];
    let src = term_map(p, &cx.bracket(&aleph.source).map_err(|e| e.to_string())?);
    let tgt = term_map(p, &cx.bracket(&aleph.target).map_err(|e| e.to_string())?);
    let want_src = terms(&[(&format!("[{a}]a"), 1), (&format!("[{a}]"), 1), (&format!("a[{a}]"), 1)]);
    let want_tgt = terms(&[(&format!("[{a}]"), 2)]);
    ensure(src == want_src, || format!("source {src:?}"))?;
    ensure(tgt == want_tgt, || format!("target {tgt:?}"))
}

/// `[tau]` at degree 2 with the given one-letter contexts.
fn tau_unit(cx: &Complex, p: &Polygraph, left: Option<&str>, rule: &str, right: Option<&str>) -> Result<NatElem, String> {
    let id = p.rule_id(rule).ok_or_else(|| format!("no rule {rule}"))?;
    let ctx = |s: Option<&str>, o| match s {
        Some(s) => p.parse_word(s).map_err(|e| e.to_string()),
        None => Ok(Path::identity(o)),
    };
    let r = p.rule(id);
    let l = ctx(left, r.lhs.start)?;
    let rr = ctx(right, r.lhs.end)?;
    cx.unit(2, &l, Basis::Cell(Arc::from(rule)), &rr).map_err(|e| e.to_string())
}

fn criterion_6() -> Outcome {
    let p = epi(6);
    let got: BTreeSet<Vec<String>> = critical_branchings(&p).iter().map(|b| p.names(&b.source.letters)).collect();
    let mut want = BTreeSet::new();
    for n in 0..=3 {
        for k in 0..=n {
            for j in 0..=k {
                for i in 0..=j {
                    want.insert(vec![format!("s{i}^{}", n + 2), format!("s{j}^{}", n + 1), format!("s{k}^{n}")]);
                }
            }
        }
    }
    ensure(got == want, || format!("branchings differ: {} vs {}", got.len(), want.len()))?;
    ensure(critical_branchings(&p).len() == want.len(), || "duplicate branchings".into())?;

    let res = build_resolution(&p, 3).map_err(|e| e.to_string())?;
    let cx = Complex::new(&res);
    let mut checked = 0;
    for (i, j, k) in [(0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 2), (1, 1, 1)] {
        for n in k..=3usize {
            let source = vec![format!("s{i}^{}", n + 2), format!("s{j}^{}", n + 1), format!("s{k}^{n}")];
            let cell = res
                .cells(3)
                .iter()
                .find(|c| p.names(&c.branching.source.letters) == source)
                .ok_or_else(|| format!("no cell on {source:?}"))?;
            let s = |x: usize, m: usize| format!("s{x}^{m}");
            let t = |a: usize, b: usize, m: usize| format!("tau{a}_{b}^{m}");
            let mut e = tau_unit(&cx, &p, None, &t(i, j, n + 1), Some(&s(k, n)))?;
            e.sub(&tau_unit(&cx, &p, Some(&s(k + 2, n + 2)), &t(i, j, n), None)?);
            e.add(&tau_unit(&cx, &p, Some(&s(j + 1, n + 2)), &t(i, k, n), None)?);
            e.sub(&tau_unit(&cx, &p, None, &t(i, k + 1, n + 1), Some(&s(j, n)))?);
            e.add(&tau_unit(&cx, &p, None, &t(j + 1, k + 1, n + 1), Some(&s(i, n)))?);
            e.sub(&tau_unit(&cx, &p, Some(&s(i, n + 2)), &t(j, k, n), None)?);
            let d = cx.delta(&cx.gen_unit(cell.name()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            ensure(d == e, || format!("({i},{j},{k}) at level {}: got {}, want {}", n + 3, d.render(&p), e.render(&p)))?;
            checked += 1;
        }
    }
    ensure(checked == 4 + 3 + 3 + 2 + 3, || format!("checked {checked} instances"))
}

fn criterion_7() -> Outcome {
    let p = right_zero();
    let res = build_resolution(&p, 3).map_err(|e| e.to_string())?;
    let cx = Complex::new(&res);
    let one = Path::identity(0);
    ensure(res.cells(3).len() == 8, || format!("{} generating confluences", res.cells(3).len()))?;
    for c in res.cells(3) {
        let n = p.names(&c.branching.source.letters);
        let (u, v, x) = (&n[0], &n[1], &n[2]);
        let m = |a: &str, b: &str| Basis::Cell(Arc::from(format!("m({a},{b})").as_str()));
        let word = |s: &str| p.parse_word(s).map_err(|e| e.to_string());
        let unit = |l: &Path, g, r: &Path| cx.unit(2, l, g, r).map_err(|e| e.to_string());
        // uv = v and vw = w.
        let mut want = unit(&one, m(u, v), &word(x)?)?;
        want.add(&unit(&one, m(v, x), &one)?);
        want.sub(&unit(&one, m(u, x), &one)?);
        want.sub(&unit(&word(u)?, m(v, x), &one)?);
        let got = cx.delta(&cx.gen_unit(c.name()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("{}: got {}, want {}", c.name(), got.render(&p), want.render(&p)))?;
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    let mut cases: Vec<(&str, Polygraph, usize)> = vec![("As", as_p(), 5), ("epi(5)", epi(5), 4)];
    cases.push(("{1,a} aa=1", z2(), 3));
    cases.push(("{1,a,b} xy=y", right_zero(), 3));
    for (name, p, n) in cases {
        let res = build_resolution(&p, n).map_err(|e| format!("{name}: {e}"))?;
        let report = verify_complex(&res, n, 2, None).map_err(|e| format!("{name}: {e}"))?;
        ensure(report.passed(), || format!("{name}: {report:?}"))?;
    }
    Ok(())
}

fn criterion_9() -> Outcome {
    for (name, p) in [("As", as_p()), ("epi(4)", epi(4))] {
        let norm = polyres::Normalizer::new(Arc::new(p.clone()));
        for word in p.paths_up_to(5) {
            let nf = norm.nf(&word).map_err(|e| e.to_string())?;
            let reached = reachable_nfs(&p, &word);
            ensure(reached == BTreeSet::from([nf]), || format!("{name}: {} reaches {} normal forms", show(&p, &word), reached.len()))?;
            ensure(reached.iter().all(|v| rewrite_steps(&p, v).map(|s| s.is_empty()).unwrap_or(false)), || {
                format!("{name}: reducible endpoint")
            })?;
        }
    }
    Ok(())
}

fn criterion_10() -> Outcome {
    let p = mon("a", &[("r", "aa", "a"), ("s", "aaa", "a")]);
    let q = reduce(&p).map_err(|e| e.to_string())?;
    let rules: Vec<(String, String)> = q.rules().iter().map(|r| (show(&q, &r.lhs), show(&q, &r.rhs))).collect();
    ensure(rules == [("a.a".to_string(), "a".to_string())], || format!("reduced rules {rules:?}"))?;
    let words = p.paths_up_to(4);
    for u in &words {
        for v in &words {
            let before = word_problem(&p, u, v).map_err(|e| e.to_string())?;
            let after = word_problem(&q, u, v).map_err(|e| e.to_string())?;
            ensure(before == after, || format!("{} = {} changed", show(&p, u), show(&p, v)))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("As syzygies in degree 2", criterion_1),
        ("As syzygies in degree 3", criterion_2),
        ("As syzygies in degree 4", criterion_3),
        ("As has one critical branching per order", criterion_4),
        ("boundaries of the order-3 generator of As", criterion_5),
        ("epi(6) branchings and boundary formula", criterion_6),
        ("reduced standard boundary formula", criterion_7),
        ("verify_complex on the reference presentations", criterion_8),
        ("every reduction order reaches the normal form", criterion_9),
        ("reduce preserves the word problem", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        match out {
            Ok(()) => println!("PASS {} {name}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
