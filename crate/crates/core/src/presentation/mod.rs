//! Presentations of categories by generators and rewriting rules.
//!
//! A [`Polygraph`] is always well typed: it can only be obtained from a
//! [`PresentationFile`] that passed [`validate_file`], or from a builtin.
//! Internally objects, generators and rules are referred to by dense
//! indices; names are kept for rendering and for the file format.

mod builtin;

pub use builtin::{builtin, reduced_standard, Builtin, CategoryTable, CellEntry};

use crate::error::{PolyError, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

pub type ObjId = u32;
pub type GenId = u32;
pub type RuleId = u32;

/// A typed path of generating 1-cells. The empty path is the identity at
/// `start` (and then `end == start`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub start: ObjId,
    pub end: ObjId,
    pub letters: Vec<GenId>,
}

impl Path {
    pub fn identity(obj: ObjId) -> Path {
        Path { start: obj, end: obj, letters: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenation; the caller guarantees `self.end == other.start`.
    pub fn concat(&self, other: &Path) -> Path {
        debug_assert_eq!(self.end, other.start);
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Path { start: self.start, end: other.end, letters }
    }

    pub fn composable(&self, other: &Path) -> bool {
        self.end == other.start
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gen1 {
    pub name: String,
    pub src: ObjId,
    pub tgt: ObjId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub lhs: Path,
    pub rhs: Path,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminationMethod {
    Length,
    Weights,
    Inversion,
    Assume,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminationHint {
    pub method: TerminationMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<BTreeMap<String, u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<BTreeMap<String, i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenEntry {
    pub name: String,
    pub src: String,
    pub tgt: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleEntry {
    pub name: String,
    pub lhs: Vec<String>,
    pub lhs_start: String,
    pub rhs: Vec<String>,
    pub rhs_start: String,
}

/// The on-disk presentation format, field order as serialized.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresentationFile {
    pub objects: Vec<String>,
    pub generators: Vec<GenEntry>,
    pub rules: Vec<RuleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub termination: Option<TerminationHint>,
}

/// One invariant violation found by [`validate_file`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

fn diag(location: impl Into<String>, message: impl Into<String>) -> Diagnostic {
    Diagnostic { location: location.into(), message: message.into() }
}

/// Checks every typing invariant of a presentation file.
pub fn validate_file(file: &PresentationFile) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut objects = HashSet::new();
    for (i, o) in file.objects.iter().enumerate() {
        if !objects.insert(o.as_str()) {
            out.push(diag(format!("objects[{i}]"), format!("name collision: object `{o}`")));
        }
    }
    let mut gens: HashMap<&str, (&str, &str)> = HashMap::new();
    for (i, g) in file.generators.iter().enumerate() {
        let loc = format!("generators[{i}]");
        for end in [&g.src, &g.tgt] {
            if !objects.contains(end.as_str()) {
                out.push(diag(&loc, format!("unknown object `{end}` in generator `{}`", g.name)));
            }
        }
        if gens.insert(&g.name, (&g.src, &g.tgt)).is_some() {
            out.push(diag(&loc, format!("name collision: generator `{}`", g.name)));
        }
    }
    // Returns the end object of a path, or a diagnostic message.
    let type_path = |letters: &[String], start: &str| -> std::result::Result<String, String> {
        if !objects.contains(start) {
            return Err(format!("unknown object `{start}`"));
        }
        let mut at = start.to_string();
        for (k, l) in letters.iter().enumerate() {
            match gens.get(l.as_str()) {
                None => return Err(format!("unknown generator `{l}`")),
                Some((s, t)) => {
                    if *s != at {
                        return Err(format!(
                            "non-composable path: letter {k} `{l}` starts at `{s}`, expected `{at}`"
                        ));
                    }
                    at = t.to_string();
                }
            }
        }
        Ok(at)
    };
    let mut rules = HashSet::new();
    for (i, r) in file.rules.iter().enumerate() {
        let loc = format!("rules[{i}] `{}`", r.name);
        if !rules.insert(r.name.as_str()) {
            out.push(diag(&loc, format!("name collision: rule `{}`", r.name)));
        }
        if r.lhs.is_empty() {
            out.push(diag(&loc, "identity lhs: the source of a rule must be non-empty"));
        }
        let l = type_path(&r.lhs, &r.lhs_start);
        let rr = type_path(&r.rhs, &r.rhs_start);
        if let Err(m) = &l {
            out.push(diag(&loc, format!("lhs: {m}")));
        }
        if let Err(m) = &rr {
            out.push(diag(&loc, format!("rhs: {m}")));
        }
        if let (Ok(le), Ok(re)) = (&l, &rr) {
            if r.lhs_start != r.rhs_start || le != re {
                out.push(diag(
                    &loc,
                    format!(
                        "parallel-endpoint violation: lhs {}→{}, rhs {}→{}",
                        r.lhs_start, le, r.rhs_start, re
                    ),
                ));
            }
        }
    }
    if let Some(t) = &file.termination {
        if let Some(w) = &t.weights {
            for (g, v) in w {
                if !gens.contains_key(g.as_str()) {
                    out.push(diag("termination.weights", format!("unknown generator `{g}`")));
                }
                if *v == 0 {
                    out.push(diag("termination.weights", format!("weight of `{g}` must be positive")));
                }
            }
        }
        if let Some(ix) = &t.index {
            for g in ix.keys() {
                if !gens.contains_key(g.as_str()) {
                    out.push(diag("termination.index", format!("unknown generator `{g}`")));
                }
            }
        }
    }
    out
}

/// A validated 2-polygraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygraph {
    objects: Vec<String>,
    gens: Vec<Gen1>,
    rules: Vec<Rule>,
    termination: Option<TerminationHint>,
    obj_ix: HashMap<String, ObjId>,
    gen_ix: HashMap<String, GenId>,
    rule_ix: HashMap<String, RuleId>,
}

impl Polygraph {
    /// Builds a polygraph from a file, failing with the first diagnostic.
    pub fn from_file(file: &PresentationFile) -> Result<Polygraph> {
        if let Some(d) = validate_file(file).into_iter().next() {
            return Err(PolyError::Typing(d.to_string()));
        }
        let obj_ix: HashMap<String, ObjId> =
            file.objects.iter().enumerate().map(|(i, o)| (o.clone(), i as ObjId)).collect();
        let gens: Vec<Gen1> = file
            .generators
            .iter()
            .map(|g| Gen1 { name: g.name.clone(), src: obj_ix[&g.src], tgt: obj_ix[&g.tgt] })
            .collect();
        let gen_ix: HashMap<String, GenId> =
            gens.iter().enumerate().map(|(i, g)| (g.name.clone(), i as GenId)).collect();
        let mk = |letters: &[String], start: &str| {
            let letters: Vec<GenId> = letters.iter().map(|l| gen_ix[l]).collect();
            let start = obj_ix[start];
            let end = letters.last().map_or(start, |&g| gens[g as usize].tgt);
            Path { start, end, letters }
        };
        let rules: Vec<Rule> = file
            .rules
            .iter()
            .map(|r| Rule {
                name: r.name.clone(),
                lhs: mk(&r.lhs, &r.lhs_start),
                rhs: mk(&r.rhs, &r.rhs_start),
            })
            .collect();
        let rule_ix = rules.iter().enumerate().map(|(i, r)| (r.name.clone(), i as RuleId)).collect();
        Ok(Polygraph {
            objects: file.objects.clone(),
            gens,
            rules,
            termination: file.termination.clone(),
            obj_ix,
            gen_ix,
            rule_ix,
        })
    }

    pub fn to_file(&self) -> PresentationFile {
        PresentationFile {
            objects: self.objects.clone(),
            generators: self
                .gens
                .iter()
                .map(|g| GenEntry {
                    name: g.name.clone(),
                    src: self.objects[g.src as usize].clone(),
                    tgt: self.objects[g.tgt as usize].clone(),
                })
                .collect(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleEntry {
                    name: r.name.clone(),
                    lhs: self.names(&r.lhs.letters),
                    lhs_start: self.objects[r.lhs.start as usize].clone(),
                    rhs: self.names(&r.rhs.letters),
                    rhs_start: self.objects[r.rhs.start as usize].clone(),
                })
                .collect(),
            termination: self.termination.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("presentation serializes")
    }

    /// Same presentation with a different rule set (used by `reduce`).
    pub(crate) fn with_rules(&self, rules: Vec<Rule>) -> Polygraph {
        let rule_ix = rules.iter().enumerate().map(|(i, r)| (r.name.clone(), i as RuleId)).collect();
        Polygraph { rules, rule_ix, ..self.clone() }
    }

    pub fn with_termination(mut self, hint: Option<TerminationHint>) -> Polygraph {
        self.termination = hint;
        self
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn gens(&self) -> &[Gen1] {
        &self.gens
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn termination_hint(&self) -> Option<&TerminationHint> {
        self.termination.as_ref()
    }

    pub fn gen(&self, g: GenId) -> &Gen1 {
        &self.gens[g as usize]
    }

    pub fn rule(&self, r: RuleId) -> &Rule {
        &self.rules[r as usize]
    }

    pub fn object_id(&self, name: &str) -> Option<ObjId> {
        self.obj_ix.get(name).copied()
    }

    pub fn gen_id(&self, name: &str) -> Option<GenId> {
        self.gen_ix.get(name).copied()
    }

    pub fn rule_id(&self, name: &str) -> Option<RuleId> {
        self.rule_ix.get(name).copied()
    }

    pub fn object_name(&self, o: ObjId) -> &str {
        &self.objects[o as usize]
    }

    pub fn names(&self, letters: &[GenId]) -> Vec<String> {
        letters.iter().map(|&g| self.gens[g as usize].name.clone()).collect()
    }

    /// Types a sequence of generators starting at `start`.
    pub fn path(&self, start: ObjId, letters: Vec<GenId>) -> Result<Path> {
        let mut at = start;
        for (k, &g) in letters.iter().enumerate() {
            let gen = self
                .gens
                .get(g as usize)
                .ok_or_else(|| PolyError::Typing(format!("unknown generator index {g}")))?;
            if gen.src != at {
                return Err(PolyError::Typing(format!(
                    "letter {k} `{}` starts at `{}`, expected `{}`",
                    gen.name,
                    self.object_name(gen.src),
                    self.object_name(at)
                )));
            }
            at = gen.tgt;
        }
        Ok(Path { start, end: at, letters })
    }

    /// Types a non-empty sequence of generators.
    pub fn word(&self, letters: Vec<GenId>) -> Result<Path> {
        let first = *letters
            .first()
            .ok_or_else(|| PolyError::Typing("empty word has no start object".into()))?;
        self.path(self.gen(first).src, letters)
    }

    /// The factor `w[i..j]` as a typed path.
    pub fn slice(&self, w: &Path, i: usize, j: usize) -> Path {
        let start = if i == 0 { w.start } else { self.gen(w.letters[i - 1]).tgt };
        let end = if j == 0 { w.start } else { self.gen(w.letters[j - 1]).tgt };
        Path { start, end, letters: w.letters[i..j].to_vec() }
    }

    /// Parses the command-line word syntax: names joined by `.`, or `1@obj`.
    pub fn parse_word(&self, text: &str) -> Result<Path> {
        let text = text.trim();
        if let Some(obj) = text.strip_prefix("1@") {
            let o = self
                .object_id(obj)
                .ok_or_else(|| PolyError::Typing(format!("unknown object `{obj}`")))?;
            return Ok(Path::identity(o));
        }
        if text.is_empty() {
            return Err(PolyError::Syntax("empty word; write 1@object for an identity".into()));
        }
        let letters = text
            .split('.')
            .map(|n| self.gen_id(n).ok_or_else(|| PolyError::Typing(format!("unknown generator `{n}`"))))
            .collect::<Result<Vec<_>>>()?;
        self.word(letters)
    }

    /// Renders a path with letters joined by `·`; identities as `1_obj`.
    pub fn render_path(&self, w: &Path) -> String {
        if w.is_empty() {
            format!("1_{}", self.object_name(w.start))
        } else {
            self.names(&w.letters).join("·")
        }
    }

    /// Renders a path in the command-line syntax accepted by `parse_word`.
    pub fn render_word(&self, w: &Path) -> String {
        if w.is_empty() {
            format!("1@{}", self.object_name(w.start))
        } else {
            self.names(&w.letters).join(".")
        }
    }

    /// All typed paths of length at most `max_len`, shortest first.
    pub fn paths_up_to(&self, max_len: usize) -> Vec<Path> {
        let mut out: Vec<Path> = (0..self.objects.len() as ObjId).map(Path::identity).collect();
        let mut frontier = out.clone();
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for (g, gen) in self.gens.iter().enumerate() {
                    if gen.src == w.end {
                        let mut letters = w.letters.clone();
                        letters.push(g as GenId);
                        next.push(Path { start: w.start, end: gen.tgt, letters });
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

/// Parses and validates a presentation file.
pub fn parse_polygraph(text: &str) -> Result<Polygraph> {
    let file: PresentationFile =
        serde_json::from_str(text).map_err(|e| PolyError::Syntax(e.to_string()))?;
    Polygraph::from_file(&file)
}

/// Re-checks the invariants of a polygraph (always empty for values built
/// through this module, kept for symmetry with [`validate_file`]).
pub fn validate(p: &Polygraph) -> Vec<Diagnostic> {
    validate_file(&p.to_file())
}
