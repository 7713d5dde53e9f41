//! Free natural systems over the presented category, the abelianisation of
//! cells, the Reidemeister-Fox-Squier boundaries, the contracting homotopy
//! induced by the rightmost strategy, and homological syzygies.

use crate::cellalg::{Cell, HigherGen, Kind, Side};
use crate::error::{PolyError, Result};
use crate::presentation::{GenId, ObjId, Path, Polygraph};
use crate::resolution::Resolution;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

/// The generator slot of a basis triple `u[g]v`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    /// Degree −1: the integers, one copy per component.
    Unit,
    /// Degree 0: the pair `(u, v)` meeting at an object.
    Obj(ObjId),
    /// Degree 1.
    Letter(GenId),
    /// Degree ≥ 2: a rule or a resolution cell, by name.
    Cell(Arc<str>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub left: Path,
    pub gen: Basis,
    pub right: Path,
}

/// An element of a free natural system: an integer combination of triples
/// `u[g]v` with normal-form contexts, all over the same component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NatElem {
    pub degree: i64,
    pub component: Path,
    pub terms: BTreeMap<Term, BigInt>,
}

impl NatElem {
    pub fn zero(degree: i64, component: Path) -> NatElem {
        NatElem { degree, component, terms: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, t: Term, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(t).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add_scaled(&mut self, other: &NatElem, c: &BigInt) {
        debug_assert_eq!(self.degree, other.degree);
        for (t, v) in &other.terms {
            self.add_term(t.clone(), &(v * c));
        }
    }

    pub fn add(&mut self, other: &NatElem) {
        self.add_scaled(other, &BigInt::one());
    }

    pub fn sub(&mut self, other: &NatElem) {
        self.add_scaled(other, &-BigInt::one());
    }

    pub fn neg(&self) -> NatElem {
        let mut out = NatElem::zero(self.degree, self.component.clone());
        out.sub(self);
        out
    }

    /// Sum of the coefficients.
    pub fn coefficient_sum(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// Text form, e.g. `[mu]a - a[mu]`.
    pub fn render(&self, p: &Polygraph) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (t, c)) in self.sorted_terms(p).into_iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let a = c.abs();
            if !a.is_one() {
                let _ = write!(out, "{a}");
            }
            out.push_str(&render_term(p, t));
        }
        out
    }

    fn sorted_terms<'a>(&'a self, p: &Polygraph) -> Vec<(&'a Term, &'a BigInt)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by_cached_key(|(t, _)| (p.names(&t.left.letters), basis_name(p, &t.gen), p.names(&t.right.letters)));
        v
    }

    pub fn to_json(&self, p: &Polygraph) -> NatElemJson {
        NatElemJson {
            degree: self.degree,
            component: p.names(&self.component.letters),
            terms: self
                .sorted_terms(p)
                .into_iter()
                .map(|(t, c)| TermJson {
                    coeff: match c.to_i64() {
                        Some(n) => serde_json::Value::from(n),
                        None => serde_json::Value::from(c.to_string()),
                    },
                    left: p.names(&t.left.letters),
                    gen: basis_name(p, &t.gen),
                    right: p.names(&t.right.letters),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NatElemJson {
    pub degree: i64,
    pub component: Vec<String>,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermJson {
    pub coeff: serde_json::Value,
    pub left: Vec<String>,
    pub gen: String,
    pub right: Vec<String>,
}

pub fn basis_name(p: &Polygraph, b: &Basis) -> String {
    match b {
        Basis::Unit => "1".into(),
        Basis::Obj(o) => p.object_name(*o).to_string(),
        Basis::Letter(g) => p.gen(*g).name.clone(),
        Basis::Cell(n) => n.to_string(),
    }
}

fn render_term(p: &Polygraph, t: &Term) -> String {
    let mut s = String::new();
    if !t.left.is_empty() {
        s.push_str(&p.names(&t.left.letters).join("·"));
    }
    let _ = write!(s, "[{}]", basis_name(p, &t.gen));
    if !t.right.is_empty() {
        s.push_str(&p.names(&t.right.letters).join("·"));
    }
    s
}

/// Memo tables for the chain-level maps, owned by the resolution.
#[derive(Default)]
pub(crate) struct ChainCache {
    brackets: Mutex<HashMap<usize, (Cell, NatElem)>>,
    deltas: Mutex<HashMap<Basis, NatElem>>,
    homotopies: Mutex<HashMap<(Arc<str>, Path), NatElem>>,
}

/// The complex of free natural systems attached to a resolution.
pub struct Complex<'r> {
    res: &'r Resolution,
}

impl<'r> Complex<'r> {
    pub fn new(res: &'r Resolution) -> Complex<'r> {
        Complex { res }
    }

    pub fn resolution(&self) -> &Resolution {
        self.res
    }

    fn p(&self) -> &Polygraph {
        self.res.base()
    }

    fn cache(&self) -> &ChainCache {
        &self.res.chains
    }

    pub fn nf(&self, w: &Path) -> Result<Path> {
        self.res.nf(w)
    }

    fn gen(&self, name: &str) -> Result<Arc<HigherGen>> {
        self.res.gen_named(name).ok_or_else(|| PolyError::MissingCells(format!("no generator `{name}`")))
    }

    /// The 1-cell of the presented category carried by a basis element.
    fn image(&self, b: &Basis) -> Result<(ObjId, Path, ObjId)> {
        let p = self.p();
        Ok(match b {
            Basis::Unit => unreachable!("units have no image"),
            Basis::Obj(o) => (*o, Path::identity(*o), *o),
            Basis::Letter(g) => {
                let w = p.path(p.gen(*g).src, vec![*g])?;
                (w.start, w.clone(), w.end)
            }
            Basis::Cell(n) => {
                let g = self.gen(n)?;
                let w = self.nf(&g.src.word_boundary(Side::Source))?;
                (w.start, w.clone(), w.end)
            }
        })
    }

    /// The element `u[g]v` (contexts are normalised).
    pub fn unit(&self, degree: i64, left: &Path, gen: Basis, right: &Path) -> Result<NatElem> {
        let (_, img, _) = self.image(&gen)?;
        let left = self.nf(left)?;
        let right = self.nf(right)?;
        let component = self.nf(&left.concat(&img).concat(&right))?;
        let mut out = NatElem::zero(degree, component);
        out.add_term(Term { left, gen, right }, &BigInt::one());
        Ok(out)
    }

    /// The generator of degree `dim(g)` for a rule or resolution cell.
    pub fn gen_unit(&self, name: &str) -> Result<NatElem> {
        let g = self.gen(name)?;
        let (s, t) = (g.src.src0(), g.src.tgt0());
        self.unit(g.dim as i64, &Path::identity(s), Basis::Cell(Arc::from(name)), &Path::identity(t))
    }

    /// `(u, v) · x`.
    pub fn act(&self, u: &Path, x: &NatElem, v: &Path) -> Result<NatElem> {
        if u.is_empty() && v.is_empty() {
            return Ok(x.clone());
        }
        let component = self.nf(&u.concat(&x.component).concat(v))?;
        let mut out = NatElem::zero(x.degree, component);
        for (t, c) in &x.terms {
            let term = Term { left: self.nf(&u.concat(&t.left))?, gen: t.gen.clone(), right: self.nf(&t.right.concat(v))? };
            out.add_term(term, c);
        }
        Ok(out)
    }

    /// The derivation of a word, `[uv] = [u]v̄ + ū[v]`.
    pub fn bracket_word(&self, w: &Path) -> Result<NatElem> {
        let p = self.p();
        let mut out = NatElem::zero(1, self.nf(w)?);
        for i in 0..w.len() {
            let t = Term {
                left: self.nf(&p.slice(w, 0, i))?,
                gen: Basis::Letter(w.letters[i]),
                right: self.nf(&p.slice(w, i + 1, w.len()))?,
            };
            out.add_term(t, &BigInt::one());
        }
        Ok(out)
    }

    /// The abelianisation `[e]` of a cell of dimension `k ≥ 1`.
    pub fn bracket(&self, e: &Cell) -> Result<NatElem> {
        if e.dim() == 0 {
            return Err(PolyError::DegreeOutOfRange("bracket of a 0-cell".into()));
        }
        if let Some((_, x)) = self.cache().brackets.lock().expect("bracket lock").get(&e.addr()) {
            return Ok(x.clone());
        }
        let k = e.dim() as i64;
        let component = || self.nf(&e.word_boundary(Side::Source));
        let out = match e.kind() {
            Kind::Obj(_) => unreachable!("dimension checked"),
            Kind::Word(w) => self.bracket_word(w)?,
            Kind::Gen(g) => self.gen_unit(&g.name)?,
            Kind::Id(_) => NatElem::zero(k, component()?),
            Kind::Comp(0, a, b) => {
                let abar = self.nf(&a.word_boundary(Side::Source))?;
                let bbar = self.nf(&b.word_boundary(Side::Source))?;
                let mut x = self.act(&Path::identity(a.src0()), &self.bracket(a)?, &bbar)?;
                x.add(&self.act(&abar, &self.bracket(b)?, &Path::identity(b.tgt0()))?);
                x
            }
            Kind::Comp(_, a, b) => {
                let mut x = self.bracket(a)?;
                x.add(&self.bracket(b)?);
                x
            }
            Kind::Inv(a) => self.bracket(a)?.neg(),
            Kind::Whisk(l, a, r) => self.act(l, &self.bracket(a)?, r)?,
            Kind::Filled(a, _, _, terms) => {
                let mut x = self.bracket(a)?;
                for t in terms.iter() {
                    let g = self.act(&t.left, &self.gen_unit(&t.gen.name)?, &t.right)?;
                    x.add_scaled(&g, &BigInt::from(t.coeff));
                }
                x
            }
        };
        self.cache().brackets.lock().expect("bracket lock").insert(e.addr(), (e.clone(), out.clone()));
        Ok(out)
    }

    fn delta_basis(&self, b: &Basis) -> Result<NatElem> {
        if let Some(x) = self.cache().deltas.lock().expect("delta lock").get(b) {
            return Ok(x.clone());
        }
        let out = match b {
            Basis::Unit => return Err(PolyError::DegreeOutOfRange("δ of degree −1".into())),
            Basis::Obj(o) => {
                let mut x = NatElem::zero(-1, Path::identity(*o));
                x.add_term(unit_term(&Path::identity(*o)), &BigInt::one());
                x
            }
            Basis::Letter(g) => {
                let p = self.p();
                let gen = p.gen(*g);
                let w = p.path(gen.src, vec![*g])?;
                let mut x = self.unit(0, &w, Basis::Obj(gen.tgt), &Path::identity(gen.tgt))?;
                x.sub(&self.unit(0, &Path::identity(gen.src), Basis::Obj(gen.src), &w)?);
                x
            }
            Basis::Cell(n) => {
                let g = self.gen(n)?;
                let mut x = self.bracket(&g.src)?;
                x.sub(&self.bracket(&g.tgt)?);
                x
            }
        };
        self.cache().deltas.lock().expect("delta lock").insert(b.clone(), out.clone());
        Ok(out)
    }

    /// The boundary `δ_k`; in degree 0 this is the augmentation, returned as
    /// a degree −1 element.
    pub fn delta(&self, x: &NatElem) -> Result<NatElem> {
        if x.degree < 0 {
            return Err(PolyError::DegreeOutOfRange("δ of degree −1".into()));
        }
        if x.degree == 0 {
            let mut out = NatElem::zero(-1, x.component.clone());
            out.add_term(unit_term(&x.component), &x.coefficient_sum());
            return Ok(out);
        }
        let mut out = NatElem::zero(x.degree - 1, x.component.clone());
        for (t, c) in &x.terms {
            let d = self.delta_basis(&t.gen)?;
            out.add_scaled(&self.act(&t.left, &d, &t.right)?, c);
        }
        Ok(out)
    }

    /// The augmentation `ε`.
    pub fn augmentation(&self, x: &NatElem) -> Result<BigInt> {
        if x.degree != 0 {
            return Err(PolyError::DegreeOutOfRange(format!("ε of degree {}", x.degree)));
        }
        Ok(x.coefficient_sum())
    }

    /// The contracting homotopy `σ_k`, degree `k → k + 1`.
    pub fn homotopy(&self, x: &NatElem) -> Result<NatElem> {
        let p = self.p();
        let mut out = NatElem::zero(x.degree + 1, x.component.clone());
        for (t, c) in &x.terms {
            let end = Path::identity(t.right.end);
            let y = match &t.gen {
                Basis::Unit => {
                    let w = &x.component;
                    self.unit(0, w, Basis::Obj(w.end), &Path::identity(w.end))?
                }
                Basis::Obj(_) => self.act(&t.left, &self.bracket_word(&t.right)?, &end)?.neg(),
                Basis::Letter(g) => {
                    let w = p.path(p.gen(*g).src, vec![*g])?.concat(&t.right);
                    let s = self.res.sigma(&Cell::word(w))?;
                    self.act(&t.left, &self.bracket(&s)?, &end)?
                }
                Basis::Cell(n) => self.act(&t.left, &self.gen_homotopy(n, &t.right)?, &end)?,
            };
            out.add_scaled(&y, c);
        }
        Ok(out)
    }

    /// `σ_k([g]v) = [σ*(g·v)]`.
    fn gen_homotopy(&self, name: &Arc<str>, v: &Path) -> Result<NatElem> {
        let key = (name.clone(), v.clone());
        if let Some(x) = self.cache().homotopies.lock().expect("homotopy lock").get(&key) {
            return Ok(x.clone());
        }
        let g = self.gen(name)?;
        if g.dim + 1 > self.res.max_dim() {
            return Err(PolyError::MissingCells(format!("σ_{} needs cells of dimension {}", g.dim, g.dim + 1)));
        }
        let gw = crate::cellalg::whisk(&Path::identity(g.src.src0()), &Cell::gen(&g), v)?;
        let out = self.bracket(&self.res.sigma_star(&gw)?)?;
        self.cache().homotopies.lock().expect("homotopy lock").insert(key, out.clone());
        Ok(out)
    }

    /// `δ_{n+1}[ω_b]` for every generating `(n+1)`-cell, each checked to lie
    /// in the kernel of `δ_n`.
    pub fn syzygies(&self, n: usize) -> Result<Vec<(String, NatElem)>> {
        if n < 2 {
            return Err(PolyError::DegreeOutOfRange(format!("syzygies of degree {n} < 2")));
        }
        if n + 1 > self.res.max_dim() {
            return Err(PolyError::MissingCells(format!("syzygies of degree {n} need cells of dimension {}", n + 1)));
        }
        let mut out = Vec::new();
        for c in self.res.cells(n + 1) {
            let d = self.delta(&self.gen_unit(c.name())?)?;
            let dd = self.delta(&d)?;
            if !dd.is_zero() {
                return Err(PolyError::BoundaryMismatch(format!("δδ[{}] = {}", c.name(), dd.render(self.p()))));
            }
            out.push((c.name().to_string(), d));
        }
        Ok(out)
    }

    /// Generators of degree `k` as basis elements (`k ≥ 0`).
    pub fn basis(&self, k: usize) -> Vec<Basis> {
        let p = self.p();
        match k {
            0 => (0..p.objects().len() as ObjId).map(Basis::Obj).collect(),
            1 => (0..p.gens().len() as GenId).map(Basis::Letter).collect(),
            2 => p.rules().iter().map(|r| Basis::Cell(Arc::from(r.name.as_str()))).collect(),
            _ => self.res.cells(k).iter().map(|c| Basis::Cell(Arc::from(c.name()))).collect(),
        }
    }

    fn endpoints(&self, b: &Basis) -> Result<(ObjId, ObjId)> {
        let (s, _, t) = self.image(b)?;
        Ok((s, t))
    }

    /// Checks the complex identities up to degree `max_degree` on contexts of
    /// length at most `context_len`.
    pub fn verify(&self, max_degree: usize, context_len: usize) -> Result<VerifyReport> {
        let p = self.p();
        let mut checks = Vec::new();
        let normal: Vec<Path> = p.paths_up_to(context_len).into_iter().filter(|w| self.res.normalizer().is_normal(w)).collect();

        let mut eps = Check::new("augmentation", 1);
        for b in self.basis(1) {
            let x = self.delta(&self.delta(&self.delta_unit(1, &b)?)?)?;
            eps.record(x.is_zero(), || format!("εδ[{}] = {}", basis_name(p, &b), x.render(p)));
        }
        checks.push(eps);

        for k in 1..max_degree {
            let mut c = Check::new("boundary", k + 1);
            for b in self.basis(k + 1) {
                let x = self.delta(&self.delta(&self.delta_unit(k + 1, &b)?)?)?;
                c.record(x.is_zero(), || format!("δδ[{}] = {}", basis_name(p, &b), x.render(p)));
            }
            checks.push(c);
        }

        for k in 0..max_degree {
            let mut triples = Vec::new();
            for b in self.basis(k) {
                let (s, t) = self.endpoints(&b)?;
                for u in normal.iter().filter(|u| u.end == s) {
                    for v in normal.iter().filter(|v| v.start == t) {
                        triples.push((u.clone(), b.clone(), v.clone()));
                    }
                }
            }
            let results: Vec<Result<Option<String>>> =
                triples.par_iter().map(|(u, b, v)| self.homotopy_defect(k, u, b, v)).collect();
            let mut c = Check::new("homotopy", k);
            for r in results {
                let r = r?;
                let ok = r.is_none();
                c.record(ok, || r.unwrap_or_default());
            }
            checks.push(c);
        }
        Ok(VerifyReport { max_degree, context_len, checks, filled: self.res.filled_count() })
    }

    fn delta_unit(&self, k: usize, b: &Basis) -> Result<NatElem> {
        let (s, t) = self.endpoints(b)?;
        self.unit(k as i64, &Path::identity(s), b.clone(), &Path::identity(t))
    }

    /// `None` when `δσ + σδ = id` holds on `u[b]v`, else a witness.
    fn homotopy_defect(&self, k: usize, u: &Path, b: &Basis, v: &Path) -> Result<Option<String>> {
        let p = self.p();
        let x = self.unit(k as i64, u, b.clone(), v)?;
        let mut lhs = self.delta(&self.homotopy(&x)?)?;
        lhs.add(&self.homotopy(&self.delta(&x)?)?);
        if lhs == x {
            return Ok(None);
        }
        let mut diff = lhs.clone();
        diff.sub(&x);
        Ok(Some(format!("{}: defect {}", x.render(p), diff.render(p))))
    }
}

fn unit_term(component: &Path) -> Term {
    Term { left: Path::identity(component.start), gen: Basis::Unit, right: Path::identity(component.end) }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub degree: usize,
    pub total: usize,
    pub failed: usize,
    pub witnesses: Vec<String>,
}

const MAX_WITNESSES: usize = 5;

impl Check {
    fn new(name: &str, degree: usize) -> Check {
        Check { name: name.into(), degree, total: 0, failed: 0, witnesses: Vec::new() }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.total += 1;
        if !ok {
            self.failed += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub max_degree: usize,
    pub context_len: usize,
    pub checks: Vec<Check>,
    /// Strategy cells that carry a filler.
    pub filled: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

/// Convenience: `δ_{n+1}` of the resolution cells of dimension `n + 1`.
pub fn syzygy_generators(res: &Resolution, n: usize) -> Result<Vec<(String, NatElem)>> {
    Complex::new(res).syzygies(n)
}

/// Runs [`Complex::verify`]; `jobs` bounds the worker threads.
pub fn verify_complex(res: &Resolution, max_degree: usize, context_len: usize, jobs: Option<usize>) -> Result<VerifyReport> {
    let run = || Complex::new(res).verify(max_degree, context_len);
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| PolyError::DegreeOutOfRange(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// Component-wise term map by rendered name, for comparisons in tests.
pub fn term_map(p: &Polygraph, x: &NatElem) -> BTreeMap<String, BigInt> {
    x.terms.iter().map(|(t, c)| (render_term(p, t), c.clone())).collect()
}
