//! The rightmost normalisation strategy in all dimensions and the cells of
//! the polygraphic resolution indexed by critical branchings.

use crate::branchings::{critical_tower, CriticalBranching, Extension};
use crate::cellalg::{comp, same_shadow, comp_lift, inv, sequentialize0, whisk, Cell, FillTerm, HigherGen, Kind, Side};
use crate::homology::{Basis, ChainCache, Complex};
use num_traits::ToPrimitive;
use crate::error::{PolyError, Result};
use crate::presentation::{Path, Polygraph, RuleId};
use crate::rewriting::{ensure_convergent, is_reduced, normal_form, rightmost_step, Normalizer, RewriteStep};
use serde::Serialize;
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, Mutex};

/// A generating cell `ω_b` of dimension `order + 1`.
#[derive(Clone, Debug)]
pub struct ResolutionCell {
    pub gen: Arc<HigherGen>,
    pub branching: Arc<CriticalBranching>,
    pub source: Cell,
    pub target: Cell,
}

impl ResolutionCell {
    pub fn name(&self) -> &str {
        &self.gen.name
    }

    pub fn dim(&self) -> usize {
        self.gen.dim
    }

    pub fn cell(&self) -> Cell {
        Cell::gen(&self.gen)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum ParentKey {
    Rule(RuleId),
    Cell(String),
}

#[derive(Default)]
struct Memo {
    words: HashMap<Path, Cell>,
    gens: HashMap<(String, Path), Cell>,
    sigma: HashMap<usize, (Cell, Cell)>,
    filled: HashSet<(String, Path)>,
}

thread_local! {
    static IN_PROGRESS: RefCell<HashSet<(usize, (String, Path))>> = RefCell::new(HashSet::new());
}

/// The resolution truncated at `max_dim`, together with its strategy.
pub struct Resolution {
    base: Arc<Polygraph>,
    rule_gens: Vec<Arc<HigherGen>>,
    cells: BTreeMap<usize, Vec<ResolutionCell>>,
    by_name: HashMap<String, (usize, usize)>,
    by_key: HashMap<(ParentKey, Extension), (usize, usize)>,
    max_dim: usize,
    fixed_shortcut: bool,
    memo: Mutex<Memo>,
    norm: Normalizer,
    pub(crate) chains: ChainCache,
}

/// Per-dimension cell counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellCount {
    pub dim: usize,
    pub count: usize,
}

/// JSON report entry for one resolution cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellReport {
    pub name: String,
    pub dim: usize,
    pub branching: BranchingReport,
    pub source: String,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchingReport {
    pub rules: Vec<String>,
    pub positions: Vec<usize>,
}

/// `ω[...]` with the steps of `b` rendered as whiskered rules.
pub fn omega_name(p: &Polygraph, b: &CriticalBranching) -> String {
    let steps: Vec<String> = b.steps.iter().map(|s| s.render(p)).collect();
    format!("ω[{}]", steps.join(","))
}

fn step_cell(rule_gens: &[Arc<HigherGen>], s: &RewriteStep) -> Cell {
    whisk(&s.left, &Cell::gen(&rule_gens[s.rule as usize]), &s.right).expect("rewriting steps are typed")
}

impl Resolution {
    /// The base polygraph with its rules as 2-generators and no higher cells.
    pub fn base_only(p: Arc<Polygraph>) -> Result<Resolution> {
        let mut rule_gens = Vec::new();
        for r in p.rules() {
            rule_gens.push(HigherGen::new(r.name.clone(), Cell::word(r.lhs.clone()), Cell::word(r.rhs.clone()))?);
        }
        Ok(Resolution {
            rule_gens,
            cells: BTreeMap::new(),
            by_name: HashMap::new(),
            by_key: HashMap::new(),
            max_dim: 2,
            fixed_shortcut: true,
            memo: Mutex::new(Memo::default()),
            norm: Normalizer::new(p.clone()),
            chains: ChainCache::default(),
            base: p,
        })
    }

    pub fn base(&self) -> &Polygraph {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<Polygraph> {
        &self.base
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn rule_gen(&self, r: RuleId) -> &Arc<HigherGen> {
        &self.rule_gens[r as usize]
    }

    pub fn rule_cell(&self, r: RuleId) -> Cell {
        Cell::gen(&self.rule_gens[r as usize])
    }

    /// Generating cells of dimension `dim ≥ 3`.
    pub fn cells(&self, dim: usize) -> &[ResolutionCell] {
        self.cells.get(&dim).map_or(&[], |v| v.as_slice())
    }

    pub fn cell_by_name(&self, name: &str) -> Option<&ResolutionCell> {
        self.by_name.get(name).map(|&(d, i)| &self.cells[&d][i])
    }

    pub fn counts(&self) -> Vec<CellCount> {
        (3..=self.max_dim).map(|dim| CellCount { dim, count: self.cells(dim).len() }).collect()
    }

    /// Whether σ may return identities on cells marked as strategy values
    /// without recursing. On by default; turning it off clears the memo.
    pub fn set_fixed_shortcut(&mut self, on: bool) {
        self.fixed_shortcut = on;
        *self.memo.lock().expect("memo lock") = Memo::default();
        self.chains = ChainCache::default();
    }

    pub fn report(&self, dim: usize) -> Vec<CellReport> {
        let p = &self.base;
        self.cells(dim)
            .iter()
            .map(|c| CellReport {
                name: c.name().to_string(),
                dim: c.dim(),
                branching: BranchingReport {
                    rules: c.branching.steps.iter().map(|s| p.rule(s.rule).name.clone()).collect(),
                    positions: c.branching.steps.iter().map(|s| s.position()).collect(),
                },
                source: c.source.render(p),
                target: c.target.render(p),
            })
            .collect()
    }

    pub(crate) fn nf(&self, w: &Path) -> Result<Path> {
        self.norm.nf(w)
    }

    pub(crate) fn normalizer(&self) -> &Normalizer {
        &self.norm
    }

    /// A rule or resolution cell by name.
    pub fn gen_named(&self, name: &str) -> Option<Arc<HigherGen>> {
        match self.base.rule_id(name) {
            Some(r) => Some(self.rule_gens[r as usize].clone()),
            None => self.cell_by_name(name).map(|c| c.gen.clone()),
        }
    }

    /// The rightmost strategy on a word, as a left-associated `⋆_1` chain
    /// of whiskered rules.
    fn sigma_word(&self, w: &Path) -> Result<Cell> {
        if let Some(c) = self.memo.lock().expect("memo lock").words.get(w) {
            return Ok(c.clone());
        }
        let (_, trace) = normal_form(&self.base, w, crate::rewriting::Side::Rightmost)?;
        let mut out = Cell::id(&Cell::word(w.clone()));
        for s in &trace.steps {
            out = comp(1, &out, &step_cell(&self.rule_gens, s))?;
        }
        let out = out.mark_fixed();
        self.memo.lock().expect("memo lock").words.insert(w.clone(), out.clone());
        Ok(out)
    }

    /// `σ_e : e → ê`, a cell of dimension `dim(e) + 1`.
    pub fn sigma(&self, e: &Cell) -> Result<Cell> {
        if e.dim() == 0 {
            return Err(PolyError::DimMismatch("σ of a 0-cell".into()));
        }
        if self.fixed_shortcut && e.is_fixed() {
            return Ok(Cell::id(e).mark_fixed());
        }
        if let Some((_, c)) = self.memo.lock().expect("memo lock").sigma.get(&e.addr()) {
            return Ok(c.clone());
        }
        let out = match e.kind() {
            Kind::Obj(_) => unreachable!("dimension checked"),
            Kind::Word(w) => self.sigma_word(w)?,
            Kind::Id(_) => Cell::id(e),
            Kind::Comp(0, _, _) => self.sigma(&sequentialize0(e))?,
            Kind::Comp(i, a, b) => comp(*i, &self.sigma(a)?, &self.sigma(b)?)?,
            Kind::Inv(f) => self.sigma_inverse(f, &self.sigma(f)?)?,
            Kind::Whisk(l, a, r) => {
                let rhat = self.nf(r)?;
                let inner = whisk(l, &self.sigma_right(a, &rhat)?, &Path::identity(rhat.end))?;
                if rhat == *r {
                    inner
                } else {
                    let k = e.dim() + 1;
                    let sr = self.sigma_word(r)?;
                    let (u, v) = (a.word_boundary(Side::Source), a.word_boundary(Side::Target));
                    let pre = whisk(&l.concat(&u), &sr, &Path::identity(r.end))?;
                    let post = inv(&whisk(&l.concat(&v), &sr, &Path::identity(r.end))?)?;
                    comp(1, &comp(1, &Cell::lift(&pre, k), &inner)?, &Cell::lift(&post, k))?
                }
            }
            Kind::Gen(g) => self.unstar(&self.sigma_star_gen(g, &Path::identity(g.src.tgt0()))?, e)?,
            Kind::Filled(a, ..) => {
                let raw = self.sigma(a)?;
                let tgt = self.retarget(&raw.tgt(), e)?;
                self.repair(raw, e, &tgt)?
            }
        };
        let out = out.mark_fixed();
        self.memo.lock().expect("memo lock").sigma.insert(e.addr(), (e.clone(), out.clone()));
        Ok(out)
    }

    /// `σ_{a·w}` for a normal form `w`.
    fn sigma_right(&self, a: &Cell, w: &Path) -> Result<Cell> {
        if w.is_empty() {
            return self.sigma(a);
        }
        let e = whisk(&Path::identity(a.src0()), a, w)?;
        match a.kind() {
            Kind::Gen(g) => self.unstar(&self.sigma_star_gen(g, w)?, &e),
            Kind::Id(_) | Kind::Word(_) | Kind::Whisk(..) | Kind::Obj(_) => self.sigma(&e),
            Kind::Comp(0, _, _) => self.sigma_right(&sequentialize0(a), w),
            Kind::Comp(i, x, y) => comp(*i, &self.sigma_right(x, w)?, &self.sigma_right(y, w)?),
            Kind::Inv(x) => {
                let f = whisk(&Path::identity(x.src0()), x, w)?;
                self.sigma_inverse(&f, &self.sigma_right(x, w)?)
            }
            Kind::Filled(x, ..) => {
                let raw = self.sigma_right(x, w)?;
                let tgt = self.retarget(&raw.tgt(), &e)?;
                self.repair(raw, &e, &tgt)
            }
        }
    }

    /// `σ_{f⁻} = f⁻ ⋆ σ_f⁻ ⋆ f̂⁻`, composed in dimension `dim(f) - 1`.
    fn sigma_inverse(&self, f: &Cell, sf: &Cell) -> Result<Cell> {
        let k = f.dim();
        let fhat = self.hat(f)?;
        let a = comp(k - 1, &Cell::lift(&inv(f)?, k + 1), &inv(sf)?)?;
        comp(k - 1, &a, &Cell::lift(&inv(&fhat)?, k + 1))
    }

    /// `ê`: the normal form of a 1-cell, `σ_{s e} ⋆ σ_{t e}⁻` above.
    pub fn hat(&self, e: &Cell) -> Result<Cell> {
        match e.dim() {
            0 => Err(PolyError::DimMismatch("hat of a 0-cell".into())),
            1 => Ok(Cell::word(self.nf(e.as_word().expect("1-cell"))?).mark_fixed()),
            k => Ok(comp(k - 1, &self.sigma(&e.src())?, &inv(&self.sigma(&e.tgt())?)?)?.mark_fixed()),
        }
    }

    /// `e*`: `e` composed in each dimension `i < dim(e)` with `σ*` of its
    /// `i`-target.
    pub fn star(&self, e: &Cell) -> Result<Cell> {
        let k = e.dim();
        let mut x = e.clone();
        for i in 1..k {
            let t = e.boundary(i, Side::Target)?;
            x = comp(i, &x, &Cell::lift(&self.sigma_star(&t)?, k))?;
        }
        Ok(x)
    }

    /// `σ*_e = σ_{e*}`.
    pub fn sigma_star(&self, e: &Cell) -> Result<Cell> {
        if e.dim() == 1 {
            return self.sigma(e);
        }
        Ok(self.sigma(&self.star(e)?)?.mark_fixed())
    }

    /// Recovers `σ_f` from `σ*_f`.
    fn unstar(&self, z: &Cell, f: &Cell) -> Result<Cell> {
        let k = f.dim();
        let mut z = z.clone();
        for i in (1..k).rev() {
            let t = f.boundary(i, Side::Target)?;
            z = comp(i, &z, &Cell::lift(&inv(&self.sigma_star(&t)?)?, k + 1))?;
        }
        Ok(z)
    }

    fn gen_branching(&self, g: &HigherGen) -> Result<(ParentKey, usize, RuleId)> {
        if g.dim == 2 {
            let r = self
                .base
                .rule_id(&g.name)
                .ok_or_else(|| PolyError::MissingCells(format!("unknown rule `{}`", g.name)))?;
            return Ok((ParentKey::Rule(r), 0, r));
        }
        let c = self
            .cell_by_name(&g.name)
            .ok_or_else(|| PolyError::MissingCells(format!("unknown cell `{}`", g.name)))?;
        let last = c.branching.last_step();
        Ok((ParentKey::Cell(g.name.clone()), last.position(), last.rule))
    }

    /// `σ*_{G·w}` for a generator `G` of dimension `k ≥ 2` and a normal
    /// form `w`, by the branching case analysis.
    fn sigma_star_gen(&self, g: &Arc<HigherGen>, w: &Path) -> Result<Cell> {
        let key = (g.name.clone(), w.clone());
        if let Some(c) = self.memo.lock().expect("memo lock").gens.get(&key) {
            return Ok(c.clone());
        }
        let busy = IN_PROGRESS.with(|s| !s.borrow_mut().insert((self as *const Resolution as usize, key.clone())));
        if busy {
            return Err(PolyError::BoundaryMismatch(format!("σ* of {}·{} depends on itself", g.name, self.base.render_path(w))));
        }
        let out = self.sigma_star_gen_uncached(g, w);
        IN_PROGRESS.with(|s| s.borrow_mut().remove(&(self as *const Resolution as usize, key.clone())));
        let out = out?.mark_fixed();
        let mut memo = self.memo.lock().expect("memo lock");
        if matches!(out.kind(), Kind::Filled(..)) {
            memo.filled.insert(key.clone());
        }
        memo.gens.insert(key, out.clone());
        Ok(out)
    }

    fn sigma_star_gen_uncached(&self, g: &Arc<HigherGen>, w: &Path) -> Result<Cell> {
        let p = &*self.base;
        let k = g.dim;
        let gc = Cell::gen(g);
        let u = gc.word_boundary(Side::Source);
        let f = whisk(&Path::identity(u.start), &gc, w)?;
        let uw = u.concat(w);
        let rho = rightmost_step(p, &uw).expect("the source of a generator is reducible");
        let (parent, last_pos, last_rule) = self.gen_branching(g)?;
        if rho.position() == last_pos && rho.rule == last_rule {
            return Ok(Cell::id(&self.star(&f)?));
        }
        let cut = rho.end(p) - u.len();
        let w1 = p.slice(w, 0, cut);
        let w2 = p.slice(w, cut, w.len());
        let ext = Extension { rule: rho.rule, overlap: u.len() - rho.position() };
        let omega = self.lookup(k + 1, &parent, ext)?;
        let big_f = if k == 2 { gc.clone() } else { gc.boundary(2, Side::Source)? };
        let id_w2 = |c: &Cell| whisk(&Path::identity(c.src0()), c, &w2);

        let uhat = self.nf(&u)?;
        let s1 = self.sigma_word(&uhat.concat(&w1))?;
        let a1 = comp_lift(
            1,
            &whisk(&Path::identity(u.start), &big_f, w)?,
            &inv(&self.sigma_star(&id_w2(&s1)?)?)?,
        )?;

        let huw1 = self.nf(&u.concat(&w1))?;
        let a2 = comp_lift(1, &id_w2(&omega)?, &self.sigma_word(&huw1.concat(&w2))?)?;

        let rho1 = RewriteStep { left: rho.left.clone(), rule: rho.rule, right: p.slice(&rho.right, 0, rho.right.len() - w2.len()) };
        let s3 = self.sigma_word(&rho1.target(p))?;
        let a3 = comp_lift(1, &step_cell(&self.rule_gens, &rho), &self.sigma_star(&id_w2(&s3)?)?)?;

        let r = comp_lift(2, &comp_lift(2, &a1, &a2)?, &a3)?;
        if k >= 3 && !w2.is_empty() {
            let src = self.star(&f)?;
            let tgt = self.sigma(&src.src())?;
            return self.repair(r, &src, &tgt);
        }
        Ok(r)
    }

    /// Above dimension 3 the split composite agrees with its intended
    /// source only up to a cycle of σ*-cells of whiskered lower cells.
    /// `repair` re-sources `raw` at `src` with a filler given by the
    /// contracting homotopy applied to that cycle.
    fn repair(&self, raw: Cell, src: &Cell, tgt: &Cell) -> Result<Cell> {
        let cx = Complex::new(self);
        let mut defect = cx.bracket(src)?;
        defect.sub(&cx.bracket(tgt)?);
        defect.sub(&cx.delta(&cx.bracket(&raw)?)?);
        if defect.is_zero() && same_shadow(src, &raw.src()) && same_shadow(tgt, &raw.tgt()) {
            return Ok(raw);
        }
        let fill = cx.homotopy(&defect)?;
        let mut terms = Vec::new();
        for (t, c) in &fill.terms {
            let Basis::Cell(name) = &t.gen else {
                return Err(PolyError::DimMismatch("filler below dimension 2".into()));
            };
            let gen = self.gen_named(name).ok_or_else(|| PolyError::MissingCells(format!("no generator `{name}`")))?;
            let coeff = c.to_i64().ok_or_else(|| PolyError::BoundaryMismatch("filler coefficient overflow".into()))?;
            terms.push(FillTerm { left: t.left.clone(), gen, right: t.right.clone(), coeff });
        }
        Cell::filled(&raw, src, tgt, terms)
    }

    /// `c` with its boundaries moved to those of the parallel cell `e`
    /// through the strategy on each boundary.
    fn retarget(&self, c: &Cell, e: &Cell) -> Result<Cell> {
        let k = c.dim();
        let mut c = c.clone();
        if !same_shadow(&c.src(), &e.src()) {
            let pre = comp(k - 1, &self.sigma(&e.src())?, &inv(&self.sigma(&c.src())?)?)?;
            c = comp(k - 1, &pre, &c)?;
        }
        if !same_shadow(&c.tgt(), &e.tgt()) {
            let post = comp(k - 1, &self.sigma(&c.tgt())?, &inv(&self.sigma(&e.tgt())?)?)?;
            c = comp(k - 1, &c, &post)?;
        }
        Ok(c)
    }

    /// How many values `σ*(g·w)` computed so far carry a filler.
    pub fn filled_count(&self) -> usize {
        self.memo.lock().expect("memo lock").filled.len()
    }

    fn lookup(&self, dim: usize, parent: &ParentKey, ext: Extension) -> Result<Cell> {
        if dim > self.max_dim {
            return Err(PolyError::DimBudgetExceeded(format!(
                "a generating {dim}-cell is needed but the resolution stops at dimension {}",
                self.max_dim
            )));
        }
        let &(d, i) = self.by_key.get(&(parent.clone(), ext)).ok_or_else(|| {
            PolyError::MissingCells(format!("no generating {dim}-cell for the branching {parent:?} + {ext:?}"))
        })?;
        debug_assert_eq!(d, dim);
        Ok(self.cells[&d][i].cell())
    }

    fn parent_of(&self, b: &CriticalBranching) -> Result<(ParentKey, Cell)> {
        match &b.parent {
            None => {
                let r = b.steps[0].rule;
                Ok((ParentKey::Rule(r), self.rule_cell(r)))
            }
            Some(c) => {
                let name = omega_name(&self.base, c);
                let cell = self
                    .cell_by_name(&name)
                    .ok_or_else(|| PolyError::MissingCells(format!("`{name}` is not built")))?
                    .cell();
                Ok((ParentKey::Cell(name), cell))
            }
        }
    }

    /// The generating cell `ω_b : (P·v)* → σ*_{s(P)·v}` where `P` is the
    /// first rule (order 2) or the parent's cell, and `v` the extension.
    pub fn omega(&self, b: &CriticalBranching) -> Result<ResolutionCell> {
        let p = &*self.base;
        let (_, parent) = self.parent_of(b)?;
        let plen = parent.word_boundary(Side::Source).len();
        let v = p.slice(&b.source, plen, b.source.len());
        let pv = whisk(&Path::identity(b.source.start), &parent, &v)?;
        let source = self.star(&pv)?;
        let target = self.sigma_star(&whisk(&Path::identity(b.source.start), &parent.src(), &v)?)?;
        let gen = HigherGen::new(omega_name(p, b), source.clone(), target.clone())?;
        Ok(ResolutionCell { gen, branching: Arc::new(b.clone()), source, target })
    }

    fn push(&mut self, cell: ResolutionCell) -> Result<()> {
        let (parent, _) = self.parent_of(&cell.branching)?;
        let dim = cell.dim();
        let v = self.cells.entry(dim).or_default();
        let idx = v.len();
        self.by_name.insert(cell.name().to_string(), (dim, idx));
        self.by_key.insert((parent, cell.branching.extension), (dim, idx));
        v.push(cell);
        Ok(())
    }
}

/// Builds the resolution up to dimension `max_dim`, one generating
/// `(n+1)`-cell per critical `n`-fold branching.
pub fn build_resolution(p: &Polygraph, max_dim: usize) -> Result<Resolution> {
    build_resolution_arc(Arc::new(p.clone()), max_dim)
}

pub fn build_resolution_arc(p: Arc<Polygraph>, max_dim: usize) -> Result<Resolution> {
    if max_dim < 2 {
        return Err(PolyError::DegreeOutOfRange(format!("resolution dimension {max_dim} < 2")));
    }
    if !is_reduced(&p) {
        return Err(PolyError::NotReduced("the resolution needs a reduced polygraph".into()));
    }
    ensure_convergent(&p)?;
    let mut r = Resolution::base_only(p.clone())?;
    if max_dim == 2 {
        return Ok(r);
    }
    let tower = critical_tower(&p, (max_dim - 1).max(2))?;
    for (i, level) in tower.iter().enumerate() {
        let dim = i + 3;
        if dim > max_dim {
            break;
        }
        r.max_dim = dim;
        r.cells.entry(dim).or_default();
        for b in level {
            let cell = r.omega(b)?;
            r.push(cell)?;
        }
    }
    r.max_dim = max_dim;
    Ok(r)
}
