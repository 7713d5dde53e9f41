//! Local branchings and critical n-fold branchings.

use crate::error::{PolyError, Result};
use crate::presentation::{Path, Polygraph, RuleId};
use crate::rewriting::{ensure_convergent, is_reduced, RewriteStep};
use serde::Serialize;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalBranching {
    pub source: Path,
    pub steps: Vec<RewriteStep>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchingClass {
    Aspherical,
    Peiffer,
    Overlapping,
}

/// Classifies a branching of order 2.
pub fn classify(p: &Polygraph, b: &LocalBranching) -> BranchingClass {
    let (f, g) = (&b.steps[0], &b.steps[1]);
    if f == g {
        BranchingClass::Aspherical
    } else if f.end(p) <= g.position() || g.end(p) <= f.position() {
        BranchingClass::Peiffer
    } else {
        BranchingClass::Overlapping
    }
}

/// The last step added to a critical branching: `rule` applied so that the
/// first `overlap` letters of its source lie in the parent's source (for
/// order 2, in the source of the first rule).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Extension {
    pub rule: RuleId,
    pub overlap: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalBranching {
    pub order: usize,
    pub source: Path,
    pub steps: Vec<RewriteStep>,
    pub parent: Option<Arc<CriticalBranching>>,
    pub extension: Extension,
}

impl CriticalBranching {
    pub fn as_local(&self) -> LocalBranching {
        LocalBranching { source: self.source.clone(), steps: self.steps.clone() }
    }

    /// The rightmost step (the last one).
    pub fn last_step(&self) -> &RewriteStep {
        self.steps.last().expect("branching has steps")
    }

    /// `rule@position` for each step, e.g. `mu@0,mu@1`.
    pub fn signature(&self, p: &Polygraph) -> String {
        self.steps
            .iter()
            .map(|s| format!("{}@{}", p.rule(s.rule).name, s.position()))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// The steps rendered as whiskered rules.
    pub fn render(&self, p: &Polygraph) -> String {
        self.steps.iter().map(|s| s.render(p)).collect::<Vec<_>>().join(", ")
    }
}

fn whisker_right(s: &RewriteStep, v: &Path) -> RewriteStep {
    RewriteStep { left: s.left.clone(), rule: s.rule, right: s.right.concat(v) }
}

/// Critical branchings of order 2: suffix/prefix overlaps of sources, and
/// for non-reduced input also inclusions of one source in another.
pub fn critical_branchings(p: &Polygraph) -> Vec<Arc<CriticalBranching>> {
    let reduced = is_reduced(p);
    let mut out = Vec::new();
    let rules = p.rules();
    for (fi, f) in rules.iter().enumerate() {
        let l = &f.lhs.letters;
        for (gi, g) in rules.iter().enumerate() {
            let m = &g.lhs.letters;
            for k in 1..l.len().min(m.len()) {
                if l[l.len() - k..] == m[..k] {
                    let rest = p.slice(&g.lhs, k, m.len());
                    let source = f.lhs.concat(&rest);
                    let pos = l.len() - k;
                    let first = RewriteStep { left: Path::identity(f.lhs.start), rule: fi as RuleId, right: rest };
                    let second = RewriteStep {
                        left: p.slice(&source, 0, pos),
                        rule: gi as RuleId,
                        right: Path::identity(source.end),
                    };
                    out.push(Arc::new(CriticalBranching {
                        order: 2,
                        source,
                        steps: vec![first, second],
                        parent: None,
                        extension: Extension { rule: gi as RuleId, overlap: k },
                    }));
                }
            }
            if fi == gi || m.len() > l.len() {
                continue;
            }
            for pos in 0..=l.len() - m.len() {
                if l[pos..pos + m.len()] != m[..] {
                    continue;
                }
                assert!(!reduced, "reduced polygraph with an inclusion overlap");
                // Equal sources: emit once, ordered by name.
                if m.len() == l.len() && f.name > g.name {
                    continue;
                }
                let outer = RewriteStep {
                    left: Path::identity(f.lhs.start),
                    rule: fi as RuleId,
                    right: Path::identity(f.lhs.end),
                };
                let inner = RewriteStep {
                    left: p.slice(&f.lhs, 0, pos),
                    rule: gi as RuleId,
                    right: p.slice(&f.lhs, pos + m.len(), l.len()),
                };
                let mut steps = vec![outer, inner];
                steps.sort_by(|a, b| a.cmp_in(b, p));
                out.push(Arc::new(CriticalBranching {
                    order: 2,
                    source: f.lhs.clone(),
                    steps,
                    parent: None,
                    extension: Extension { rule: gi as RuleId, overlap: l.len() - pos },
                }));
            }
        }
    }
    out
}

/// Extensions of a critical branching `c` by one rule overlapping its
/// rightmost redex.
pub fn extend(p: &Polygraph, c: &Arc<CriticalBranching>) -> Vec<Arc<CriticalBranching>> {
    let u = &c.source;
    let e = c.last_step().end(p);
    let mut out = Vec::new();
    for (ri, r) in p.rules().iter().enumerate() {
        let m = &r.lhs.letters;
        for s in 1..u.len() {
            let plen = u.len() - s;
            if s >= e || plen >= m.len() || u.letters[s..] != m[..plen] {
                continue;
            }
            let v = p.slice(&r.lhs, plen, m.len());
            let source = u.concat(&v);
            let mut steps: Vec<RewriteStep> = c.steps.iter().map(|st| whisker_right(st, &v)).collect();
            steps.push(RewriteStep {
                left: p.slice(&source, 0, s),
                rule: ri as RuleId,
                right: Path::identity(source.end),
            });
            out.push(Arc::new(CriticalBranching {
                order: c.order + 1,
                source,
                steps,
                parent: Some(c.clone()),
                extension: Extension { rule: ri as RuleId, overlap: plen },
            }));
        }
    }
    out
}

/// Critical branchings of orders 2..=n, indexed by `order - 2`.
pub fn critical_tower(p: &Polygraph, n: usize) -> Result<Vec<Vec<Arc<CriticalBranching>>>> {
    if n < 2 {
        return Err(PolyError::DegreeOutOfRange(format!("branching order {n} < 2")));
    }
    if n > 2 {
        if !is_reduced(p) {
            return Err(PolyError::NotReduced(
                "branchings of order 3 and more need a reduced polygraph".into(),
            ));
        }
        ensure_convergent(p)?;
    }
    let mut tower = vec![critical_branchings(p)];
    for _ in 3..=n {
        let next = tower.last().expect("tower non-empty").iter().flat_map(|c| extend(p, c)).collect();
        tower.push(next);
    }
    Ok(tower)
}

/// Critical branchings of order `n`.
pub fn critical_nfold(p: &Polygraph, n: usize) -> Result<Vec<Arc<CriticalBranching>>> {
    Ok(critical_tower(p, n)?.pop().expect("tower non-empty"))
}
