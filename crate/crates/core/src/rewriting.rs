//! Rewriting steps, normal forms, termination certificates, confluence and
//! the reduction of presentations.

use crate::branchings::critical_branchings;
use crate::error::{PolyError, Result};
use crate::presentation::{Path, Polygraph, Rule, RuleId, TerminationMethod};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::sync::{Arc, RwLock};

/// Default number of steps a single normalisation may take.
pub const DEFAULT_STEP_BUDGET: usize = 1_000_000;
/// Default word length explored by the loop search.
pub const DEFAULT_LOOP_SEARCH_LEN: usize = 6;

/// The step budget, overridable with `POLYRES_STEP_BUDGET`.
pub fn step_budget() -> usize {
    std::env::var("POLYRES_STEP_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_STEP_BUDGET)
}

/// The 2-cell `left·rule·right`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RewriteStep {
    pub left: Path,
    pub rule: RuleId,
    pub right: Path,
}

impl RewriteStep {
    pub fn position(&self) -> usize {
        self.left.len()
    }

    /// Position just past the redex in the source word.
    pub fn end(&self, p: &Polygraph) -> usize {
        self.left.len() + p.rule(self.rule).lhs.len()
    }

    pub fn source(&self, p: &Polygraph) -> Path {
        self.left.concat(&p.rule(self.rule).lhs).concat(&self.right)
    }

    pub fn target(&self, p: &Polygraph) -> Path {
        self.left.concat(&p.rule(self.rule).rhs).concat(&self.right)
    }

    /// The order on steps with a common source: left-context length, then
    /// rule name.
    pub fn cmp_in(&self, other: &RewriteStep, p: &Polygraph) -> Ordering {
        self.position()
            .cmp(&other.position())
            .then_with(|| p.rule(self.rule).name.cmp(&p.rule(other.rule).name))
    }

    pub fn render(&self, p: &Polygraph) -> String {
        let mut parts = Vec::new();
        if !self.left.is_empty() {
            parts.push(p.render_path(&self.left));
        }
        parts.push(p.rule(self.rule).name.clone());
        if !self.right.is_empty() {
            parts.push(p.render_path(&self.right));
        }
        parts.join("·")
    }
}

/// A rewriting sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteTrace {
    pub source: Path,
    pub steps: Vec<RewriteStep>,
}

impl RewriteTrace {
    pub fn target(&self, p: &Polygraph) -> Path {
        self.steps.last().map_or_else(|| self.source.clone(), |s| s.target(p))
    }
}

fn check_typed(p: &Polygraph, w: &Path) -> Result<()> {
    let typed = p.path(w.start, w.letters.clone())?;
    if typed.end != w.end {
        return Err(PolyError::Typing("path end object is inconsistent".into()));
    }
    Ok(())
}

fn steps_unchecked(p: &Polygraph, w: &Path) -> Vec<RewriteStep> {
    let mut out = Vec::new();
    for pos in 0..w.len() {
        for (r, rule) in p.rules().iter().enumerate() {
            let l = &rule.lhs.letters;
            if pos + l.len() <= w.len() && w.letters[pos..pos + l.len()] == l[..] {
                out.push(RewriteStep {
                    left: p.slice(w, 0, pos),
                    rule: r as RuleId,
                    right: p.slice(w, pos + l.len(), w.len()),
                });
            }
        }
    }
    out.sort_by(|a, b| a.cmp_in(b, p));
    out
}

/// All rewriting steps with source `w`, in increasing order.
pub fn rewrite_steps(p: &Polygraph, w: &Path) -> Result<Vec<RewriteStep>> {
    check_typed(p, w)?;
    Ok(steps_unchecked(p, w))
}

fn extreme_step(p: &Polygraph, w: &Path, side: Side) -> Option<RewriteStep> {
    let matches_at = |pos: usize| {
        p.rules().iter().enumerate().filter(move |(_, rule)| {
            let l = &rule.lhs.letters;
            pos + l.len() <= w.len() && w.letters[pos..pos + l.len()] == l[..]
        })
    };
    let pick = |pos: usize| {
        let found = matches_at(pos);
        let best = match side {
            Side::Leftmost => found.min_by(|a, b| a.1.name.cmp(&b.1.name)),
            Side::Rightmost => found.max_by(|a, b| a.1.name.cmp(&b.1.name)),
        };
        best.map(|(r, rule)| RewriteStep {
            left: p.slice(w, 0, pos),
            rule: r as RuleId,
            right: p.slice(w, pos + rule.lhs.len(), w.len()),
        })
    };
    match side {
        Side::Leftmost => (0..w.len()).find_map(pick),
        Side::Rightmost => (0..w.len()).rev().find_map(pick),
    }
}

/// The rightmost step on `w`, if any.
pub fn rightmost_step(p: &Polygraph, w: &Path) -> Option<RewriteStep> {
    extreme_step(p, w, Side::Rightmost)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Leftmost,
    Rightmost,
}

/// Normalises `w` by always applying the least (leftmost) or greatest
/// (rightmost) step.
pub fn normal_form(p: &Polygraph, w: &Path, side: Side) -> Result<(Path, RewriteTrace)> {
    check_typed(p, w)?;
    normal_form_with_budget(p, w, side, step_budget())
}

pub(crate) fn normal_form_with_budget(
    p: &Polygraph,
    w: &Path,
    side: Side,
    budget: usize,
) -> Result<(Path, RewriteTrace)> {
    let mut cur = w.clone();
    let mut steps = Vec::new();
    while let Some(s) = extreme_step(p, &cur, side) {
        if steps.len() >= budget {
            return Err(PolyError::StepBudgetExceeded { budget, word: p.render_path(w) });
        }
        cur = s.target(p);
        steps.push(s);
    }
    Ok((cur, RewriteTrace { source: w.clone(), steps }))
}

/// A memoising rightmost normaliser for a convergent polygraph.
#[derive(Debug)]
pub struct Normalizer {
    p: Arc<Polygraph>,
    cache: RwLock<HashMap<Path, Path>>,
}

impl Normalizer {
    pub fn new(p: Arc<Polygraph>) -> Normalizer {
        Normalizer { p, cache: RwLock::new(HashMap::new()) }
    }

    pub fn polygraph(&self) -> &Polygraph {
        &self.p
    }

    pub fn nf(&self, w: &Path) -> Result<Path> {
        if w.len() <= 1 && self.p.rules().iter().all(|r| r.lhs.len() > w.len()) {
            return Ok(w.clone());
        }
        if let Some(v) = self.cache.read().expect("cache lock").get(w) {
            return Ok(v.clone());
        }
        let (v, _) = normal_form_with_budget(&self.p, w, Side::Rightmost, step_budget())?;
        self.cache.write().expect("cache lock").insert(w.clone(), v.clone());
        Ok(v)
    }

    pub fn is_normal(&self, w: &Path) -> bool {
        steps_unchecked(&self.p, w).is_empty()
    }
}

/// Outcome of a termination check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Proved,
    Assumed,
    /// A rewriting sequence returning to its source.
    Refuted(RewriteTrace),
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TerminationCertificate {
    pub method: Option<TerminationMethod>,
    pub verdict: Verdict,
    pub detail: String,
}

impl TerminationCertificate {
    pub fn usable(&self) -> bool {
        matches!(self.verdict, Verdict::Proved | Verdict::Assumed)
    }
}

fn length_certificate(p: &Polygraph) -> std::result::Result<String, String> {
    for r in p.rules() {
        if r.lhs.len() <= r.rhs.len() {
            return Err(format!("rule `{}` does not shorten words", r.name));
        }
    }
    Ok("every rule strictly decreases length".into())
}

fn weights_certificate(p: &Polygraph) -> std::result::Result<String, String> {
    let w = p
        .termination_hint()
        .and_then(|h| h.weights.as_ref())
        .ok_or("no weights supplied")?;
    let weight = |path: &Path| -> std::result::Result<u64, String> {
        path.letters.iter().try_fold(0u64, |acc, &g| {
            let name = &p.gen(g).name;
            w.get(name).map(|x| acc + x).ok_or_else(|| format!("no weight for generator `{name}`"))
        })
    };
    for r in p.rules() {
        if weight(&r.lhs)? <= weight(&r.rhs)? {
            return Err(format!("rule `{}` does not decrease the weight", r.name));
        }
    }
    Ok("every rule strictly decreases the weight".into())
}

/// `#{p < q : index_p ≤ index_q}`.
pub fn inversion_count(index: &[i64]) -> usize {
    let mut n = 0;
    for a in 0..index.len() {
        for b in a + 1..index.len() {
            if index[a] <= index[b] {
                n += 1;
            }
        }
    }
    n
}

// Exchange rules x_i x_j → x_{j+1} x_i (i ≤ j). Each rule lowers the
// inversion count of its own source, but that count is not monotone under
// contexts (s1·s0·s0 → s1·s1·s0 keeps it at 1). Termination is certified
// instead by the index sum: it grows by exactly one per step, the length is
// preserved and every index is bounded by the largest index of a generator.
fn inversion_certificate(p: &Polygraph) -> std::result::Result<String, String> {
    let ix = p
        .termination_hint()
        .and_then(|h| h.index.as_ref())
        .ok_or("no generator index supplied")?;
    let idx = |g: u32| -> std::result::Result<i64, String> {
        let name = &p.gen(g).name;
        ix.get(name).copied().ok_or_else(|| format!("no index for generator `{name}`"))
    };
    for r in p.rules() {
        let (l, rr) = (&r.lhs.letters, &r.rhs.letters);
        if l.len() != 2 || rr.len() != 2 {
            return Err(format!("rule `{}` is not an exchange rule", r.name));
        }
        let (i, j) = (idx(l[0])?, idx(l[1])?);
        let (a, b) = (idx(rr[0])?, idx(rr[1])?);
        if !(i <= j && a == j + 1 && b == i) {
            return Err(format!("rule `{}` is not of the form x_i x_j → x_(j+1) x_i with i ≤ j", r.name));
        }
        debug_assert!(inversion_count(&[i, j]) > inversion_count(&[a, b]));
    }
    Ok("exchange system: index sum strictly increases and is bounded".into())
}

/// Searches for a rewriting cycle among words of length at most `max_len`.
pub fn find_loop(p: &Polygraph, max_len: usize) -> Option<RewriteTrace> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut mark: HashMap<Path, Mark> = HashMap::new();
    for root in p.paths_up_to(max_len) {
        if mark.contains_key(&root) {
            continue;
        }
        // Iterative DFS; the stack holds (word, its steps, next step index, step taken to reach it).
        let mut stack: Vec<(Path, Vec<RewriteStep>, usize)> = Vec::new();
        let mut via: Vec<Option<RewriteStep>> = Vec::new();
        mark.insert(root.clone(), Mark::Open);
        stack.push((root.clone(), steps_unchecked(p, &root), 0));
        via.push(None);
        while let Some((w, steps, next)) = stack.last_mut() {
            if *next == steps.len() {
                mark.insert(w.clone(), Mark::Done);
                stack.pop();
                via.pop();
                continue;
            }
            let s = steps[*next].clone();
            *next += 1;
            let t = s.target(p);
            if t.len() > max_len {
                continue;
            }
            match mark.get(&t) {
                Some(Mark::Done) => {}
                Some(Mark::Open) => {
                    let from = stack.iter().position(|(x, _, _)| *x == t).expect("open word on stack");
                    let mut cyc: Vec<RewriteStep> = via[from + 1..].iter().flatten().cloned().collect();
                    cyc.push(s);
                    return Some(RewriteTrace { source: t, steps: cyc });
                }
                None => {
                    mark.insert(t.clone(), Mark::Open);
                    let st = steps_unchecked(p, &t);
                    stack.push((t, st, 0));
                    via.push(Some(s));
                }
            }
        }
    }
    None
}

/// Checks termination with the default loop-search bound.
pub fn check_termination(p: &Polygraph) -> TerminationCertificate {
    check_termination_with(p, DEFAULT_LOOP_SEARCH_LEN)
}

pub fn check_termination_with(p: &Polygraph, loop_len: usize) -> TerminationCertificate {
    let method = p.termination_hint().map(|h| h.method);
    let attempt = match method {
        Some(TerminationMethod::Assume) => {
            return match find_loop(p, loop_len) {
                Some(l) => TerminationCertificate {
                    method,
                    verdict: Verdict::Refuted(l),
                    detail: "assumed termination contradicted by a rewriting cycle".into(),
                },
                None => TerminationCertificate {
                    method,
                    verdict: Verdict::Assumed,
                    detail: "termination assumed by the presentation".into(),
                },
            }
        }
        Some(TerminationMethod::Length) | None => length_certificate(p),
        Some(TerminationMethod::Weights) => weights_certificate(p),
        Some(TerminationMethod::Inversion) => inversion_certificate(p),
    };
    let method = method.or(Some(TerminationMethod::Length));
    match attempt {
        Ok(detail) => TerminationCertificate { method, verdict: Verdict::Proved, detail },
        Err(why) => match find_loop(p, loop_len) {
            Some(l) => TerminationCertificate {
                method,
                verdict: Verdict::Refuted(l),
                detail: format!("{why}; found a rewriting cycle"),
            },
            None => TerminationCertificate { method, verdict: Verdict::Unknown, detail: why },
        },
    }
}

/// Joinability data for one critical branching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchingJoin {
    pub source: Path,
    pub legs: (RewriteStep, RewriteStep),
    pub normal_forms: (Path, Path),
    pub traces: (RewriteTrace, RewriteTrace),
    pub joins: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfluenceReport {
    pub termination: TerminationCertificate,
    pub branchings: Vec<BranchingJoin>,
    pub confluent: bool,
}

/// Decides confluence through the critical branchings.
pub fn check_confluence(p: &Polygraph) -> Result<ConfluenceReport> {
    let termination = check_termination(p);
    if !termination.usable() {
        return Err(PolyError::NotTerminating(termination.detail.clone()));
    }
    let budget = step_budget();
    let mut branchings = Vec::new();
    for b in critical_branchings(p) {
        let (f, g) = (b.steps[0].clone(), b.steps[1].clone());
        let (nf1, t1) = normal_form_with_budget(p, &f.target(p), Side::Rightmost, budget)?;
        let (nf2, t2) = normal_form_with_budget(p, &g.target(p), Side::Rightmost, budget)?;
        branchings.push(BranchingJoin {
            source: b.source.clone(),
            joins: nf1 == nf2,
            legs: (f, g),
            normal_forms: (nf1, nf2),
            traces: (t1, t2),
        });
    }
    let confluent = branchings.iter().all(|b| b.joins);
    Ok(ConfluenceReport { termination, branchings, confluent })
}

/// Fails unless `p` is terminating (proved or assumed) and confluent.
pub fn ensure_convergent(p: &Polygraph) -> Result<()> {
    let report = check_confluence(p).map_err(|e| PolyError::NotConvergent(e.to_string()))?;
    if let Some(b) = report.branchings.iter().find(|b| !b.joins) {
        return Err(PolyError::NotConvergent(format!(
            "{} has normal forms {} and {}",
            p.render_path(&b.source),
            p.render_path(&b.normal_forms.0),
            p.render_path(&b.normal_forms.1)
        )));
    }
    Ok(())
}

/// Decides `u = v` in the presented category.
pub fn word_problem(p: &Polygraph, u: &Path, v: &Path) -> Result<bool> {
    check_typed(p, u)?;
    check_typed(p, v)?;
    if u.start != v.start || u.end != v.end {
        return Err(PolyError::MismatchedEndpoints(format!(
            "{} and {} are not parallel",
            p.render_path(u),
            p.render_path(v)
        )));
    }
    ensure_convergent(p)?;
    let budget = step_budget();
    let (a, _) = normal_form_with_budget(p, u, Side::Rightmost, budget)?;
    let (b, _) = normal_form_with_budget(p, v, Side::Rightmost, budget)?;
    Ok(a == b)
}

fn reducible_by_others(p: &Polygraph, r: usize, w: &Path) -> bool {
    p.rules().iter().enumerate().any(|(k, other)| {
        k != r && w.letters.windows(other.lhs.len()).any(|f| f == &other.lhs.letters[..])
    })
}

/// Every lhs is normal for the other rules and every rhs is normal.
pub fn is_reduced(p: &Polygraph) -> bool {
    p.rules().iter().enumerate().all(|(r, rule)| {
        !reducible_by_others(p, r, &rule.lhs) && steps_unchecked(p, &rule.rhs).is_empty()
    })
}

/// The reduction of a convergent polygraph: normalise every target, keep
/// one rule per source, drop rules whose source is reducible by another.
pub fn reduce(p: &Polygraph) -> Result<Polygraph> {
    ensure_convergent(p)?;
    let budget = step_budget();
    let mut rules: Vec<Rule> = Vec::new();
    let mut seen = HashSet::new();
    for r in p.rules() {
        if !seen.insert(r.lhs.clone()) {
            continue;
        }
        let (rhs, _) = normal_form_with_budget(p, &r.lhs, Side::Rightmost, budget)?;
        rules.push(Rule { name: r.name.clone(), lhs: r.lhs.clone(), rhs });
    }
    let deduped = p.with_rules(rules.clone());
    let kept: Vec<Rule> = rules
        .iter()
        .enumerate()
        .filter(|(k, r)| !reducible_by_others(&deduped, *k, &r.lhs))
        .map(|(_, r)| r.clone())
        .collect();
    Ok(p.with_rules(kept))
}
