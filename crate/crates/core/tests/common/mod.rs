//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use polyres::presentation::{GenEntry, PresentationFile, RuleEntry, TerminationHint, TerminationMethod};
use polyres::rewriting::RewriteStep;
use polyres::{builtin, reduced_standard, Builtin, CategoryTable, Path, Polygraph};
use std::collections::{BTreeSet, HashMap};

pub fn as_p() -> Polygraph {
    builtin(&Builtin::As).expect("As")
}

pub fn epi(m: usize) -> Polygraph {
    builtin(&Builtin::Epi(m)).expect("epi")
}

/// `{1, a}` with `aa = 1`.
pub fn z2() -> Polygraph {
    let t = CategoryTable::monoid("1", &["a"], |_, _| "1".into());
    reduced_standard(&t).expect("z2")
}

/// `{1, a, b}` with `xy = y`.
pub fn right_zero() -> Polygraph {
    let t = CategoryTable::monoid("1", &["a", "b"], |_, y| y.to_string());
    reduced_standard(&t).expect("right zero")
}

/// A one-object presentation; generators are single letters and rules are
/// `(name, lhs, rhs)` with words spelled letter by letter (`""` = identity).
pub fn mon_file(gens: &str, rules: &[(&str, &str, &str)], method: Option<TerminationMethod>) -> PresentationFile {
    let letters = |s: &str| s.chars().map(|c| c.to_string()).collect::<Vec<_>>();
    PresentationFile {
        objects: vec!["x".into()],
        generators: gens
            .chars()
            .map(|c| GenEntry { name: c.to_string(), src: "x".into(), tgt: "x".into() })
            .collect(),
        rules: rules
            .iter()
            .map(|(n, l, r)| RuleEntry {
                name: (*n).into(),
                lhs: letters(l),
                lhs_start: "x".into(),
                rhs: letters(r),
                rhs_start: "x".into(),
            })
            .collect(),
        termination: method.map(|method| TerminationHint { method, weights: None, index: None }),
    }
}

pub fn mon(gens: &str, rules: &[(&str, &str, &str)]) -> Polygraph {
    Polygraph::from_file(&mon_file(gens, rules, None)).expect("presentation")
}

/// Parses `a.b.c` (or `1@x`).
pub fn w(p: &Polygraph, s: &str) -> Path {
    p.parse_word(s).expect("word")
}

pub fn show(p: &Polygraph, w: &Path) -> String {
    p.render_word(w)
}

/// Every `(position, rule)` whose lhs occurs in `w` at that position.
pub fn brute_redexes(p: &Polygraph, w: &Path) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    for (ri, r) in p.rules().iter().enumerate() {
        let m = &r.lhs.letters;
        if m.len() > w.len() {
            continue;
        }
        for i in 0..=w.len() - m.len() {
            if w.letters[i..i + m.len()] == m[..] && (i > 0 || r.lhs.start == w.start) {
                out.push((i, ri as u32));
            }
        }
    }
    out
}

/// Applies the rule at a position.
pub fn apply(p: &Polygraph, w: &Path, pos: usize, rule: u32) -> Path {
    let r = p.rule(rule);
    let left = p.slice(w, 0, pos);
    let right = p.slice(w, pos + r.lhs.len(), w.len());
    left.concat(&r.rhs).concat(&right)
}

/// The set of irreducible words reachable from `w` along every reduction
/// order. Assumes termination.
pub fn reachable_nfs(p: &Polygraph, w: &Path) -> BTreeSet<Path> {
    fn go(p: &Polygraph, w: &Path, memo: &mut HashMap<Path, BTreeSet<Path>>) -> BTreeSet<Path> {
        if let Some(s) = memo.get(w) {
            return s.clone();
        }
        let redexes = brute_redexes(p, w);
        let out = if redexes.is_empty() {
            BTreeSet::from([w.clone()])
        } else {
            let mut s = BTreeSet::new();
            for (i, r) in redexes {
                s.extend(go(p, &apply(p, w, i, r), memo));
            }
            s
        };
        memo.insert(w.clone(), out.clone());
        out
    }
    go(p, w, &mut HashMap::new())
}

/// Word-level signature of a family of steps on a common source: the
/// source and the `(position, rule name)` list.
pub type Sig = (Vec<String>, Vec<(usize, String)>);

pub fn sig_of(p: &Polygraph, source: &Path, steps: &[RewriteStep]) -> Sig {
    (
        p.names(&source.letters),
        steps.iter().map(|s| (s.position(), p.rule(s.rule).name.clone())).collect(),
    )
}

/// Brute-force critical n-fold branchings on words of length at most
/// `max_len`: families of `n` redexes with positions `0 = p_1 < ... < p_n`,
/// each redex overlapping the next, the last ending at the end of the word.
pub fn brute_critical(p: &Polygraph, n: usize, max_len: usize) -> BTreeSet<Sig> {
    let mut out = BTreeSet::new();
    for word in p.paths_up_to(max_len) {
        if word.is_empty() {
            continue;
        }
        let reds = brute_redexes(p, &word);
        let len = |r: u32| p.rule(r).lhs.len();
        let mut chain: Vec<(usize, u32)> = Vec::new();
        fn extend(
            reds: &[(usize, u32)],
            len: &dyn Fn(u32) -> usize,
            n: usize,
            total: usize,
            chain: &mut Vec<(usize, u32)>,
            found: &mut Vec<Vec<(usize, u32)>>,
        ) {
            if chain.len() == n {
                let (q, r) = *chain.last().expect("non-empty");
                if q + len(r) == total {
                    found.push(chain.clone());
                }
                return;
            }
            for &(q, r) in reds {
                let ok = match chain.last() {
                    None => q == 0,
                    Some(&(pq, pr)) => q > pq && q < pq + len(pr),
                };
                if ok {
                    chain.push((q, r));
                    extend(reds, len, n, total, chain, found);
                    chain.pop();
                }
            }
        }
        let mut found = Vec::new();
        extend(&reds, &len, n, word.len(), &mut chain, &mut found);
        for c in found {
            out.insert((
                p.names(&word.letters),
                c.into_iter().map(|(q, r)| (q, p.rule(r).name.clone())).collect(),
            ));
        }
    }
    out
}
