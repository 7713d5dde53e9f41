use super::{GenEntry, Polygraph, PresentationFile, RuleEntry, TerminationHint, TerminationMethod};
use crate::error::{PolyError, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// The builtin presentations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// One object, one generator `a`, one rule `mu: a·a ⇒ a`.
    As,
    /// Truncation of the category of monotone surjections at level `m`.
    Epi(usize),
    /// Reduced standard presentation of a finite category.
    ReducedStandard(CategoryTable),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellEntry {
    pub name: String,
    pub src: String,
    pub tgt: String,
}

/// A finite category given by its multiplication table. `products` lists
/// triples `[u, v, uv]` in diagrammatic order; products with identities
/// may be omitted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryTable {
    pub objects: Vec<String>,
    pub cells: Vec<CellEntry>,
    pub identities: BTreeMap<String, String>,
    pub products: Vec<[String; 3]>,
}

impl CategoryTable {
    /// A one-object table from a product function on named elements.
    pub fn monoid(unit: &str, elements: &[&str], product: impl Fn(&str, &str) -> String) -> CategoryTable {
        let mut cells = vec![CellEntry { name: unit.into(), src: "x".into(), tgt: "x".into() }];
        cells.extend(elements.iter().map(|e| CellEntry { name: (*e).into(), src: "x".into(), tgt: "x".into() }));
        let mut products = Vec::new();
        for u in elements {
            for v in elements {
                products.push([(*u).to_string(), (*v).to_string(), product(u, v)]);
            }
        }
        CategoryTable {
            objects: vec!["x".into()],
            cells,
            identities: BTreeMap::from([("x".to_string(), unit.to_string())]),
            products,
        }
    }
}

pub fn builtin(kind: &Builtin) -> Result<Polygraph> {
    match kind {
        Builtin::As => as_polygraph(),
        Builtin::Epi(m) => epi(*m),
        Builtin::ReducedStandard(t) => reduced_standard(t),
    }
}

fn gen(name: &str, src: &str, tgt: &str) -> GenEntry {
    GenEntry { name: name.into(), src: src.into(), tgt: tgt.into() }
}

fn as_polygraph() -> Result<Polygraph> {
    Polygraph::from_file(&PresentationFile {
        objects: vec!["x".into()],
        generators: vec![gen("a", "x", "x")],
        rules: vec![RuleEntry {
            name: "mu".into(),
            lhs: vec!["a".into(), "a".into()],
            lhs_start: "x".into(),
            rhs: vec!["a".into()],
            rhs_start: "x".into(),
        }],
        termination: Some(TerminationHint { method: TerminationMethod::Length, weights: None, index: None }),
    })
}

pub(crate) fn epi_gen_name(i: usize, n: usize) -> String {
    format!("s{i}^{n}")
}

pub(crate) fn epi_rule_name(i: usize, j: usize, n: usize) -> String {
    format!("tau{i}_{j}^{n}")
}

fn epi(m: usize) -> Result<Polygraph> {
    if m < 2 {
        return Err(PolyError::InvalidTruncation(format!(
            "epi({m}) has no rewriting rule; the level bound must be at least 2"
        )));
    }
    let objects: Vec<String> = (0..=m).map(|n| n.to_string()).collect();
    let mut generators = Vec::new();
    let mut index = BTreeMap::new();
    for n in 0..m {
        for i in 0..=n {
            let name = epi_gen_name(i, n);
            generators.push(gen(&name, &(n + 1).to_string(), &n.to_string()));
            index.insert(name, i as i64);
        }
    }
    // s_i^{n+1} s_j^{n} ⇒ s_{j+1}^{n+1} s_i^{n} for i ≤ j ≤ n, typed n+2 → n.
    let mut rules = Vec::new();
    for n in 0..m.saturating_sub(1) {
        for j in 0..=n {
            for i in 0..=j {
                rules.push(RuleEntry {
                    name: epi_rule_name(i, j, n),
                    lhs: vec![epi_gen_name(i, n + 1), epi_gen_name(j, n)],
                    lhs_start: (n + 2).to_string(),
                    rhs: vec![epi_gen_name(j + 1, n + 1), epi_gen_name(i, n)],
                    rhs_start: (n + 2).to_string(),
                });
            }
        }
    }
    Polygraph::from_file(&PresentationFile {
        objects,
        generators,
        rules,
        termination: Some(TerminationHint {
            method: TerminationMethod::Inversion,
            weights: None,
            index: Some(index),
        }),
    })
}

/// The reduced standard presentation: one generator per non-identity cell
/// and one rule `m(u,v): u·v ⇒ uv` per composable pair of them, whose
/// target is the empty path when `uv` is an identity.
pub fn reduced_standard(table: &CategoryTable) -> Result<Polygraph> {
    let typing = |m: String| PolyError::Typing(m);
    let mut cell: HashMap<&str, (&str, &str)> = HashMap::new();
    for c in &table.cells {
        if !table.objects.contains(&c.src) || !table.objects.contains(&c.tgt) {
            return Err(typing(format!("cell `{}` has an unknown endpoint", c.name)));
        }
        if cell.insert(&c.name, (&c.src, &c.tgt)).is_some() {
            return Err(typing(format!("duplicate cell `{}`", c.name)));
        }
    }
    let mut identity_of: HashMap<&str, &str> = HashMap::new();
    for o in &table.objects {
        let id = table
            .identities
            .get(o)
            .ok_or_else(|| typing(format!("object `{o}` has no identity")))?;
        match cell.get(id.as_str()) {
            Some((s, t)) if s == o && t == o => {}
            _ => return Err(typing(format!("identity `{id}` of `{o}` is not an endomorphism of `{o}`"))),
        }
        identity_of.insert(id, o);
    }
    let is_id = |c: &str| identity_of.contains_key(c);
    let mut prod: HashMap<(&str, &str), &str> = HashMap::new();
    for [u, v, w] in &table.products {
        let (us, ut) = *cell.get(u.as_str()).ok_or_else(|| typing(format!("unknown cell `{u}`")))?;
        let (vs, vt) = *cell.get(v.as_str()).ok_or_else(|| typing(format!("unknown cell `{v}`")))?;
        let (ws, wt) = *cell.get(w.as_str()).ok_or_else(|| typing(format!("unknown cell `{w}`")))?;
        if ut != vs || ws != us || wt != vt {
            return Err(typing(format!("ill-typed product {u}·{v} = {w}")));
        }
        if prod.insert((u, v), w).is_some_and(|old| old != w.as_str()) {
            return Err(typing(format!("conflicting products for {u}·{v}")));
        }
    }
    let names: Vec<&str> = table.cells.iter().map(|c| c.name.as_str()).collect();
    let mul = |u: &str, v: &str| -> Result<String> {
        if is_id(u) {
            return Ok(v.to_string());
        }
        if is_id(v) {
            return Ok(u.to_string());
        }
        prod.get(&(u, v))
            .map(|w| w.to_string())
            .ok_or_else(|| PolyError::Typing(format!("missing product {u}·{v}")))
    };
    let composable = |u: &str, v: &str| cell[u].1 == cell[v].0;
    for &u in &names {
        for &v in &names {
            if !composable(u, v) {
                continue;
            }
            let uv = mul(u, v)?;
            if is_id(u) && v != uv || is_id(v) && u != uv {
                return Err(PolyError::NonAssociativeTable(format!("identity law fails at {u}·{v}")));
            }
            for &w in &names {
                if !composable(v, w) {
                    continue;
                }
                let left = mul(&uv, w)?;
                let right = mul(u, &mul(v, w)?)?;
                if left != right {
                    return Err(PolyError::NonAssociativeTable(format!(
                        "({u}·{v})·{w} = {left} but {u}·({v}·{w}) = {right}"
                    )));
                }
            }
        }
    }
    let non_id: Vec<&str> = names.iter().copied().filter(|c| !is_id(c)).collect();
    let generators = non_id.iter().map(|c| gen(c, cell[c].0, cell[c].1)).collect();
    let mut rules = Vec::new();
    for &u in &non_id {
        for &v in &non_id {
            if !composable(u, v) {
                continue;
            }
            let uv = mul(u, v)?;
            rules.push(RuleEntry {
                name: format!("m({u},{v})"),
                lhs: vec![u.to_string(), v.to_string()],
                lhs_start: cell[u].0.to_string(),
                rhs: if is_id(&uv) { vec![] } else { vec![uv] },
                rhs_start: cell[u].0.to_string(),
            });
        }
    }
    Polygraph::from_file(&PresentationFile {
        objects: table.objects.clone(),
        generators,
        rules,
        termination: Some(TerminationHint { method: TerminationMethod::Length, weights: None, index: None }),
    })
}
