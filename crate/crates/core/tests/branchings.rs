mod common;

use common::*;
use polyres::branchings::{classify, critical_tower, extend, BranchingClass, LocalBranching};
use polyres::rewriting::{is_reduced, rewrite_steps};
use polyres::{critical_branchings, critical_nfold, PolyError, Polygraph};
use proptest::prelude::*;
use std::collections::BTreeSet;

fn local(p: &Polygraph, word: &str, picks: [usize; 2]) -> LocalBranching {
    let source = w(p, word);
    let steps = rewrite_steps(p, &source).unwrap();
    LocalBranching { source, steps: picks.iter().map(|&i| steps[i].clone()).collect() }
}

fn emitted(p: &Polygraph, n: usize) -> BTreeSet<Sig> {
    critical_nfold(p, n).unwrap().iter().map(|b| sig_of(p, &b.source, &b.steps)).collect()
}

#[test]
fn classify_examples() {
    let p = as_p();
    assert_eq!(classify(&p, &local(&p, "a.a.a", [0, 0])), BranchingClass::Aspherical);
    assert_eq!(classify(&p, &local(&p, "a.a.a.a", [0, 2])), BranchingClass::Peiffer);
    assert_eq!(classify(&p, &local(&p, "a.a.a", [0, 1])), BranchingClass::Overlapping);
}

#[test]
fn as_has_one_critical_pair() {
    let p = as_p();
    let c = critical_branchings(&p);
    assert_eq!(c.len(), 1);
    assert_eq!(show(&p, &c[0].source), "a.a.a");
    let steps: Vec<String> = c[0].steps.iter().map(|s| s.render(&p)).collect();
    assert_eq!(steps, ["mu·a", "a·mu"]);
}

#[test]
fn as_has_one_critical_triple() {
    let p = as_p();
    let c = critical_nfold(&p, 3).unwrap();
    assert_eq!(c.len(), 1);
    let steps: Vec<String> = c[0].steps.iter().map(|s| s.render(&p)).collect();
    assert_eq!(steps, ["mu·a·a", "a·mu·a", "a·a·mu"]);
}

#[test]
fn as_has_one_critical_branching_per_order() {
    let p = as_p();
    for n in 2..=6 {
        let c = critical_nfold(&p, n).unwrap();
        assert_eq!(c.len(), 1, "order {n}");
        assert_eq!(c[0].source.len(), n + 1);
    }
}

#[test]
fn reduced_standard_has_one_branching_per_triple() {
    for (p, k) in [(right_zero(), 2usize), (z2(), 1)] {
        let got: BTreeSet<Vec<String>> = critical_branchings(&p).iter().map(|b| p.names(&b.source.letters)).collect();
        let elems: Vec<String> = p.gens().iter().map(|g| g.name.clone()).collect();
        assert_eq!(elems.len(), k);
        let mut want = BTreeSet::new();
        for u in &elems {
            for v in &elems {
                for x in &elems {
                    // Rule m(u,v) exists for every pair here, so every triple overlaps.
                    want.insert(vec![u.clone(), v.clone(), x.clone()]);
                }
            }
        }
        assert_eq!(got, want);
        assert_eq!(critical_branchings(&p).len(), k * k * k);
    }
}

#[test]
fn distinct_letters_do_not_overlap() {
    let p = mon("abc", &[("r", "ab", "c")]);
    assert!(critical_branchings(&p).is_empty());
}

#[test]
fn epi_branchings_are_indexed_by_triples() {
    for m in 3..=6 {
        let p = epi(m);
        let c = critical_branchings(&p);
        // Sources s_i^{n+2} s_j^{n+1} s_k^n with i ≤ j ≤ k ≤ n and n + 3 ≤ m.
        let mut want = BTreeSet::new();
        for n in 0..m.saturating_sub(2) {
            for k in 0..=n {
                for j in 0..=k {
                    for i in 0..=j {
                        want.insert(vec![format!("s{i}^{}", n + 2), format!("s{j}^{}", n + 1), format!("s{k}^{n}")]);
                    }
                }
            }
        }
        let got: BTreeSet<Vec<String>> = c.iter().map(|b| p.names(&b.source.letters)).collect();
        assert_eq!(got, want, "epi({m})");
        assert_eq!(c.len(), want.len());
    }
}

#[test]
fn order_two_outputs_overlap_and_are_minimal() {
    for p in [as_p(), epi(5), right_zero(), z2(), mon("a", &[("r", "aaa", "a")])] {
        for b in critical_branchings(&p) {
            assert_eq!(classify(&p, &b.as_local()), BranchingClass::Overlapping);
            // No whisker can be stripped: the redexes cover the source exactly.
            let start = b.steps.iter().map(|s| s.position()).min().unwrap();
            let end = b.steps.iter().map(|s| s.end(&p)).max().unwrap();
            assert_eq!((start, end), (0, b.source.len()));
        }
    }
}

#[test]
fn emitted_branchings_match_the_overlap_oracle() {
    let cases = [
        ("As", as_p()),
        ("epi(4)", epi(4)),
        ("epi(5)", epi(5)),
        ("right zero", right_zero()),
        ("z2", z2()),
        ("aaa=a", mon("a", &[("r", "aaa", "a")])),
    ];
    for (name, p) in cases {
        assert!(is_reduced(&p));
        for n in 2..=4 {
            let max_len = 7;
            let got: BTreeSet<Sig> = emitted(&p, n).into_iter().filter(|s| s.0.len() <= max_len).collect();
            assert_eq!(got, brute_critical(&p, n, max_len), "{name}, order {n}");
        }
    }
}

#[test]
fn extensions_rebuild_the_stored_steps() {
    let p = epi(5);
    let tower = critical_tower(&p, 4).unwrap();
    for level in &tower[1..] {
        for b in level {
            let parent = b.parent.as_ref().unwrap();
            assert_eq!(b.order, parent.order + 1);
            let v = p.slice(&b.source, parent.source.len(), b.source.len());
            assert!(!v.is_empty());
            assert_eq!(b.extension.overlap + v.len(), p.rule(b.extension.rule).lhs.len());
            assert!(extend(&p, parent).iter().any(|c| c.steps == b.steps && c.source == b.source));
            // The new step is the rightmost one.
            let last = b.last_step();
            let all = rewrite_steps(&p, &b.source).unwrap();
            assert_eq!(all.last(), Some(last));
        }
    }
}

#[test]
fn higher_orders_need_reduced_convergent_input() {
    let p = mon("a", &[("r", "aa", "a"), ("s", "aaa", "a")]);
    assert!(matches!(critical_nfold(&p, 3), Err(PolyError::NotReduced(_))));
    let q = mon("ab", &[("x", "ab", "a"), ("y", "ba", "b")]);
    assert!(is_reduced(&q));
    assert!(matches!(critical_nfold(&q, 3), Err(PolyError::NotConvergent(_))));
    assert!(matches!(critical_nfold(&as_p(), 1), Err(PolyError::DegreeOutOfRange(_))));
}

#[test]
fn inclusion_overlaps_are_emitted_for_non_reduced_input() {
    let p = mon("ab", &[("x", "aa", "a"), ("y", "aab", "b")]);
    let got: BTreeSet<Sig> = critical_branchings(&p).iter().map(|b| sig_of(&p, &b.source, &b.steps)).collect();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    assert!(got.contains(&(s(&["a", "a", "b"]), vec![(0, "x".into()), (0, "y".into())])));
    assert!(got.contains(&(s(&["a", "a", "a"]), vec![(0, "x".into()), (1, "x".into())])));
    assert!(got.contains(&(s(&["a", "a", "a", "b"]), vec![(0, "x".into()), (1, "y".into())])));
}

/// Brute force for order 2 on any polygraph: pairs of distinct redexes on a
/// word that overlap and jointly cover it.
fn brute_pairs(p: &Polygraph, max_len: usize) -> BTreeSet<Sig> {
    let mut out = BTreeSet::new();
    for word in p.paths_up_to(max_len) {
        let steps = rewrite_steps(p, &word).unwrap();
        for (i, f) in steps.iter().enumerate() {
            for g in &steps[i + 1..] {
                let overlap = f.position() < g.end(p) && g.position() < f.end(p);
                let covers = f.position().min(g.position()) == 0 && f.end(p).max(g.end(p)) == word.len();
                if overlap && covers {
                    out.insert(sig_of(p, &word, &[f.clone(), g.clone()]));
                }
            }
        }
    }
    out
}

fn arb_polygraph() -> impl Strategy<Value = Polygraph> {
    let rule = (prop::collection::vec(0u8..2, 1..4), prop::collection::vec(0u8..2, 0..3));
    prop::collection::vec(rule, 1..4).prop_map(|rules| {
        let spell = |v: &[u8]| v.iter().map(|&c| if c == 0 { 'a' } else { 'b' }).collect::<String>();
        let named: Vec<(String, String, String)> = rules
            .iter()
            .enumerate()
            .map(|(k, (l, r))| (format!("r{k}"), spell(l), spell(r)))
            .collect();
        let refs: Vec<(&str, &str, &str)> = named.iter().map(|(n, l, r)| (n.as_str(), l.as_str(), r.as_str())).collect();
        mon("ab", &refs)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn order_two_matches_brute_force(p in arb_polygraph()) {
        let got: BTreeSet<Sig> = critical_branchings(&p).iter().map(|b| sig_of(&p, &b.source, &b.steps)).collect();
        let max_lhs = p.rules().iter().map(|r| r.lhs.len()).max().unwrap();
        prop_assert_eq!(got, brute_pairs(&p, 2 * max_lhs - 1));
        for b in critical_branchings(&p) {
            prop_assert_eq!(classify(&p, &b.as_local()), BranchingClass::Overlapping);
        }
    }
}
