//! Cells of the free (n,1)-category generated by a polygraph and its
//! resolution cells, as typed expression trees.
//!
//! Constructors check typing. Equality of cells of dimension at least 2 is
//! not decidable here; composability is checked on a shadow of the cells
//! (1-dimensional boundaries, iterated boundaries, and the number of
//! occurrences of each top-dimensional generator counted with sign), which
//! is invariant under all relations of the free (n,1)-category. The
//! resolution module performs the finer parallelism check with contexts.

use crate::error::{PolyError, Result};
use crate::presentation::{ObjId, Path, Polygraph};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

/// A generating cell of dimension at least 2.
#[derive(Debug)]
pub struct HigherGen {
    pub name: String,
    pub dim: usize,
    pub src: Cell,
    pub tgt: Cell,
}

impl HigherGen {
    /// Checks that `src` and `tgt` are parallel cells of dimension `dim - 1`.
    pub fn new(name: impl Into<String>, src: Cell, tgt: Cell) -> Result<Arc<HigherGen>> {
        let name = name.into();
        if src.dim() != tgt.dim() || src.dim() == 0 {
            return Err(PolyError::DimMismatch(format!("boundaries of `{name}`")));
        }
        if !parallel(&src, &tgt) {
            return Err(PolyError::BoundaryMismatch(format!("boundaries of `{name}` are not parallel")));
        }
        Ok(Arc::new(HigherGen { name, dim: src.dim() + 1, src, tgt }))
    }
}

#[derive(Debug)]
pub enum Kind {
    Obj(ObjId),
    Word(Path),
    Gen(Arc<HigherGen>),
    Id(Cell),
    Comp(usize, Cell, Cell),
    Inv(Cell),
    Whisk(Path, Cell, Path),
    /// `base` with its source replaced by a cell equal to it up to the
    /// boundary of a formal sum of whiskered generators one dimension up.
    Filled(Cell, Cell, Cell, Arc<Vec<FillTerm>>),
}

/// A term `coeff · left·gen·right` of a filler.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FillTerm {
    pub left: Path,
    pub gen: Arc<HigherGen>,
    pub right: Path,
    pub coeff: i64,
}

impl PartialEq for HigherGen {
    fn eq(&self, other: &HigherGen) -> bool {
        self.name == other.name && self.dim == other.dim
    }
}

impl Eq for HigherGen {}

type Weights = Arc<Vec<(Arc<str>, i64)>>;

#[derive(Debug)]
pub struct Node {
    kind: Kind,
    dim: usize,
    src0: ObjId,
    tgt0: ObjId,
    weights: Weights,
    fixed: bool,
    src: OnceLock<Cell>,
    tgt: OnceLock<Cell>,
}

/// A shared, immutable cell expression.
#[derive(Clone, Debug)]
pub struct Cell(Arc<Node>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

fn empty_weights() -> Weights {
    static EMPTY: OnceLock<Weights> = OnceLock::new();
    EMPTY.get_or_init(|| Arc::new(Vec::new())).clone()
}

fn merge(a: &Weights, b: &Weights, sign: i64) -> Weights {
    if b.is_empty() {
        return a.clone();
    }
    if a.is_empty() && sign == 1 {
        return b.clone();
    }
    let mut m: BTreeMap<Arc<str>, i64> = a.iter().cloned().collect();
    for (k, v) in b.iter() {
        *m.entry(k.clone()).or_insert(0) += sign * v;
    }
    Arc::new(m.into_iter().filter(|(_, v)| *v != 0).collect())
}

impl Cell {
    fn mk(kind: Kind, dim: usize, src0: ObjId, tgt0: ObjId, weights: Weights) -> Cell {
        Cell(Arc::new(Node {
            kind,
            dim,
            src0,
            tgt0,
            weights,
            fixed: false,
            src: OnceLock::new(),
            tgt: OnceLock::new(),
        }))
    }

    pub fn obj(o: ObjId) -> Cell {
        Cell::mk(Kind::Obj(o), 0, o, o, empty_weights())
    }

    /// A 1-cell; the path is assumed typed.
    pub fn word(w: Path) -> Cell {
        let (s, t) = (w.start, w.end);
        Cell::mk(Kind::Word(w), 1, s, t, empty_weights())
    }

    pub fn gen(g: &Arc<HigherGen>) -> Cell {
        let w = Arc::new(vec![(Arc::<str>::from(g.name.as_str()), 1)]);
        Cell::mk(Kind::Gen(g.clone()), g.dim, g.src.src0(), g.src.tgt0(), w)
    }

    /// `base` with boundaries replaced by `src` and `tgt`, and filler
    /// `terms` of the same dimension.
    pub fn filled(base: &Cell, src: &Cell, tgt: &Cell, terms: Vec<FillTerm>) -> Result<Cell> {
        if src.dim() + 1 != base.dim() || tgt.dim() != src.dim() || terms.iter().any(|t| t.gen.dim != base.dim()) {
            return Err(PolyError::DimMismatch("filler dimensions".into()));
        }
        if src.src0() != base.src0() || src.tgt0() != base.tgt0() || tgt.src0() != base.src0() || tgt.tgt0() != base.tgt0() {
            return Err(PolyError::BoundaryMismatch("filler source endpoints".into()));
        }
        let mut w: Weights = base.0.weights.clone();
        for t in &terms {
            let one = Arc::new(vec![(Arc::<str>::from(t.gen.name.as_str()), t.coeff)]);
            w = merge(&w, &one, 1);
        }
        Ok(Cell::mk(Kind::Filled(base.clone(), src.clone(), tgt.clone(), Arc::new(terms)), base.dim(), base.src0(), base.tgt0(), w))
    }

    /// The identity on `x`, one dimension up.
    pub fn id(x: &Cell) -> Cell {
        if let Kind::Obj(o) = x.kind() {
            return Cell::word(Path::identity(*o));
        }
        Cell::mk(Kind::Id(x.clone()), x.dim() + 1, x.src0(), x.tgt0(), empty_weights())
    }

    /// Iterated identity of `x` in dimension `k` (no-op if `x` has dim `k`).
    pub fn lift(x: &Cell, k: usize) -> Cell {
        let mut c = x.clone();
        while c.dim() < k {
            c = Cell::id(&c);
        }
        c
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn src0(&self) -> ObjId {
        self.0.src0
    }

    pub fn tgt0(&self) -> ObjId {
        self.0.tgt0
    }

    pub fn ptr_eq(&self, other: &Cell) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub(crate) fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// Signed generator counts in the top dimension.
    pub fn weights(&self) -> &[(Arc<str>, i64)] {
        &self.0.weights
    }

    /// Whether the cell was marked as a value of a normalisation strategy
    /// (or a composite of such values), so that the strategy fixes it.
    pub fn is_fixed(&self) -> bool {
        self.0.fixed
    }

    pub fn mark_fixed(&self) -> Cell {
        if self.0.fixed {
            return self.clone();
        }
        let n = &self.0;
        let kind = match &n.kind {
            Kind::Obj(o) => Kind::Obj(*o),
            Kind::Word(w) => Kind::Word(w.clone()),
            Kind::Gen(g) => Kind::Gen(g.clone()),
            Kind::Id(x) => Kind::Id(x.clone()),
            Kind::Comp(i, a, b) => Kind::Comp(*i, a.clone(), b.clone()),
            Kind::Inv(a) => Kind::Inv(a.clone()),
            Kind::Whisk(l, a, r) => Kind::Whisk(l.clone(), a.clone(), r.clone()),
            Kind::Filled(a, x, y, t) => Kind::Filled(a.clone(), x.clone(), y.clone(), t.clone()),
        };
        let c = Cell(Arc::new(Node {
            kind,
            dim: n.dim,
            src0: n.src0,
            tgt0: n.tgt0,
            weights: n.weights.clone(),
            fixed: true,
            src: OnceLock::new(),
            tgt: OnceLock::new(),
        }));
        if let (Some(s), Some(t)) = (n.src.get(), n.tgt.get()) {
            let _ = c.0.src.set(s.clone());
            let _ = c.0.tgt.set(t.clone());
        }
        c
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind(), Kind::Id(_)) || matches!(self.kind(), Kind::Word(w) if w.is_empty())
    }

    /// `Some(w)` when the cell is an iterated identity of the 1-cell `w`.
    pub fn lifted_word(&self) -> Option<&Path> {
        match self.kind() {
            Kind::Word(w) => Some(w),
            Kind::Id(x) => x.lifted_word(),
            _ => None,
        }
    }

    pub fn as_word(&self) -> Option<&Path> {
        match self.kind() {
            Kind::Word(w) => Some(w),
            _ => None,
        }
    }

    /// Top-dimensional source (`dim - 1`).
    pub fn src(&self) -> Cell {
        self.0.src.get_or_init(|| self.compute_boundary(Side::Source)).clone()
    }

    /// Top-dimensional target (`dim - 1`).
    pub fn tgt(&self) -> Cell {
        self.0.tgt.get_or_init(|| self.compute_boundary(Side::Target)).clone()
    }

    pub fn top(&self, side: Side) -> Cell {
        match side {
            Side::Source => self.src(),
            Side::Target => self.tgt(),
        }
    }

    fn compute_boundary(&self, side: Side) -> Cell {
        let pick = |s: Cell, t: Cell| if side == Side::Source { s } else { t };
        match self.kind() {
            Kind::Obj(_) => panic!("a 0-cell has no boundary"),
            Kind::Word(w) => Cell::obj(if side == Side::Source { w.start } else { w.end }),
            Kind::Gen(g) => pick(g.src.clone(), g.tgt.clone()),
            Kind::Id(x) => x.clone(),
            Kind::Comp(i, a, b) => {
                if *i + 1 == self.dim() {
                    pick(a.src(), b.tgt())
                } else {
                    comp_unchecked(*i, &a.top(side), &b.top(side))
                }
            }
            Kind::Inv(a) => pick(a.tgt(), a.src()),
            Kind::Whisk(l, a, r) => whisk_unchecked(l, &a.top(side), r),
            Kind::Filled(_, x, y, _) => pick(x.clone(), y.clone()),
        }
    }

    /// Iterated boundary at dimension `i < dim`.
    pub fn boundary(&self, i: usize, side: Side) -> Result<Cell> {
        if i >= self.dim() {
            return Err(PolyError::DimMismatch(format!(
                "boundary {i} of a {}-cell",
                self.dim()
            )));
        }
        let mut c = self.top(side);
        while c.dim() > i {
            c = c.top(side);
        }
        Ok(c)
    }

    /// 1-dimensional source/target word (for cells of dimension ≥ 1).
    pub fn word_boundary(&self, side: Side) -> Path {
        let b = if self.dim() == 1 { self.clone() } else { self.boundary(1, side).expect("dim ≥ 1") };
        b.as_word().expect("1-cells are words").clone()
    }

    /// Renders the expression: generators by name, `⋆i` infix with
    /// parentheses, `^-` for inverses, whiskers as `u·e·v`.
    pub fn render(&self, p: &Polygraph) -> String {
        let mut s = String::new();
        render_into(self, p, &mut s);
        s
    }
}

fn atomic(c: &Cell) -> bool {
    matches!(c.kind(), Kind::Obj(_) | Kind::Gen(_) | Kind::Comp(..) | Kind::Id(_) | Kind::Filled(..))
        || matches!(c.kind(), Kind::Word(w) if w.len() <= 1)
}

fn render_into(c: &Cell, p: &Polygraph, out: &mut String) {
    match c.kind() {
        Kind::Obj(o) => out.push_str(p.object_name(*o)),
        Kind::Word(w) => out.push_str(&p.render_path(w)),
        Kind::Gen(g) => out.push_str(&g.name),
        Kind::Id(x) => {
            out.push_str("1(");
            render_into(x, p, out);
            out.push(')');
        }
        Kind::Comp(i, a, b) => {
            out.push('(');
            render_into(a, p, out);
            let _ = write!(out, " ⋆{i} ");
            render_into(b, p, out);
            out.push(')');
        }
        Kind::Inv(a) => {
            if atomic(a) {
                render_into(a, p, out);
            } else {
                out.push('(');
                render_into(a, p, out);
                out.push(')');
            }
            out.push_str("^-");
        }
        Kind::Whisk(l, a, r) => {
            if !l.is_empty() {
                out.push_str(&p.render_path(l));
                out.push('·');
            }
            let wrap = matches!(a.kind(), Kind::Whisk(..) | Kind::Inv(_));
            if wrap {
                out.push('(');
            }
            render_into(a, p, out);
            if wrap {
                out.push(')');
            }
            if !r.is_empty() {
                out.push('·');
                out.push_str(&p.render_path(r));
            }
        }
        Kind::Filled(a, _, _, t) => {
            out.push_str("fill(");
            render_into(a, p, out);
            let _ = write!(out, "; {} terms)", t.len());
        }
    }
}

/// Shadow equality: equal dimension, equal 0- and 1-dimensional boundaries,
/// equal signed generator counts, recursively on both top boundaries.
pub fn same_shadow(a: &Cell, b: &Cell) -> bool {
    if a.ptr_eq(b) {
        return true;
    }
    if a.dim() != b.dim() || a.src0() != b.src0() || a.tgt0() != b.tgt0() {
        return false;
    }
    match a.dim() {
        0 => true,
        1 => a.as_word() == b.as_word(),
        _ => a.weights() == b.weights() && same_shadow(&a.src(), &b.src()) && same_shadow(&a.tgt(), &b.tgt()),
    }
}

/// Two cells of the same dimension with shadow-equal top boundaries.
pub fn parallel(a: &Cell, b: &Cell) -> bool {
    a.dim() == b.dim()
        && match a.dim() {
            0 => true,
            _ => same_shadow(&a.src(), &b.src()) && same_shadow(&a.tgt(), &b.tgt()),
        }
}

pub(crate) fn comp_unchecked(i: usize, a: &Cell, b: &Cell) -> Cell {
    let k = a.dim();
    if k == 1 {
        let (wa, wb) = (a.as_word().expect("1-cell"), b.as_word().expect("1-cell"));
        return Cell::word(wa.concat(wb));
    }
    if i + 1 == k {
        if a.is_identity() {
            return b.clone();
        }
        if b.is_identity() {
            return a.clone();
        }
    }
    if i == 0 {
        if let Some(w) = a.lifted_word() {
            return whisk_unchecked(w, b, &Path::identity(b.tgt0()));
        }
        if let Some(w) = b.lifted_word() {
            return whisk_unchecked(&Path::identity(a.src0()), a, w);
        }
    }
    if let (Kind::Id(x), Kind::Id(y)) = (a.kind(), b.kind()) {
        return Cell::id(&comp_unchecked(i, x, y));
    }
    let w = merge(&a.0.weights, &b.0.weights, 1);
    Cell::mk(Kind::Comp(i, a.clone(), b.clone()), k, a.src0(), b.tgt0(), w)
}

pub(crate) fn whisk_unchecked(l: &Path, a: &Cell, r: &Path) -> Cell {
    if l.is_empty() && r.is_empty() {
        return a.clone();
    }
    let fixed = a.is_fixed() && r.is_empty();
    let c = match a.kind() {
        Kind::Word(w) => return Cell::word(l.concat(w).concat(r)),
        Kind::Id(x) => return Cell::id(&whisk_unchecked(l, x, r)),
        Kind::Whisk(l2, x, r2) => {
            let (l, r) = (l.concat(l2), r2.concat(r));
            Cell::mk(Kind::Whisk(l.clone(), x.clone(), r.clone()), a.dim(), l.start, r.end, a.0.weights.clone())
        }
        _ => Cell::mk(Kind::Whisk(l.clone(), a.clone(), r.clone()), a.dim(), l.start, r.end, a.0.weights.clone()),
    };
    if fixed {
        c.mark_fixed()
    } else {
        c
    }
}

/// `a ⋆_i b`, checking dimensions and `t_i(a) = s_i(b)` on shadows.
pub fn comp(i: usize, a: &Cell, b: &Cell) -> Result<Cell> {
    if a.dim() != b.dim() {
        return Err(PolyError::DimMismatch(format!(
            "⋆{i} of a {}-cell and a {}-cell",
            a.dim(),
            b.dim()
        )));
    }
    if i >= a.dim() {
        return Err(PolyError::DimMismatch(format!("⋆{i} of {}-cells", a.dim())));
    }
    let ok = if i == 0 {
        a.tgt0() == b.src0()
    } else {
        let t = a.boundary(i, Side::Target)?;
        let s = b.boundary(i, Side::Source)?;
        same_shadow(&t, &s)
    };
    if !ok {
        return Err(PolyError::BoundaryMismatch(format!("t_{i} of the left operand ≠ s_{i} of the right operand")));
    }
    Ok(comp_unchecked(i, a, b))
}

/// `a ⋆_i b` after lifting the lower-dimensional operand by identities.
pub fn comp_lift(i: usize, a: &Cell, b: &Cell) -> Result<Cell> {
    let k = a.dim().max(b.dim());
    comp(i, &Cell::lift(a, k), &Cell::lift(b, k))
}

/// Left-associated `⋆_i` composite of a non-empty sequence.
pub fn comp_chain(i: usize, cells: &[Cell]) -> Result<Cell> {
    let (first, rest) = cells.split_first().ok_or_else(|| PolyError::DimMismatch("empty composite".into()))?;
    rest.iter().try_fold(first.clone(), |acc, c| comp_lift(i, &acc, c))
}

pub fn inv(a: &Cell) -> Result<Cell> {
    if a.dim() < 2 {
        return Err(PolyError::InvBelowDim2(format!("inverse of a {}-cell", a.dim())));
    }
    Ok(inv_unchecked(a))
}

fn inv_unchecked(a: &Cell) -> Cell {
    let c = match a.kind() {
        Kind::Id(_) => return a.clone(),
        Kind::Inv(x) => return x.clone(),
        Kind::Whisk(l, x, r) => whisk_unchecked(l, &inv_unchecked(x), r),
        _ => {
            let w = merge(&empty_weights(), &a.0.weights, -1);
            Cell::mk(Kind::Inv(a.clone()), a.dim(), a.src0(), a.tgt0(), w)
        }
    };
    if a.is_fixed() {
        c.mark_fixed()
    } else {
        c
    }
}

/// `l·a·r`, checking that the paths compose with the 0-boundaries of `a`.
pub fn whisk(l: &Path, a: &Cell, r: &Path) -> Result<Cell> {
    if a.dim() == 0 {
        return Err(PolyError::DimMismatch("whiskering a 0-cell".into()));
    }
    if l.end != a.src0() || r.start != a.tgt0() {
        return Err(PolyError::BoundaryMismatch("whisker paths do not compose with the cell".into()));
    }
    Ok(whisk_unchecked(l, a, r))
}

/// A pair of parallel cells.
#[derive(Clone, Debug)]
pub struct Sphere {
    pub dim: usize,
    pub source: Cell,
    pub target: Cell,
}

impl Sphere {
    pub fn new(source: Cell, target: Cell) -> Result<Sphere> {
        if source.dim() != target.dim() {
            return Err(PolyError::DimMismatch("sphere sides of different dimensions".into()));
        }
        if !parallel(&source, &target) {
            return Err(PolyError::BoundaryMismatch("sphere sides are not parallel".into()));
        }
        Ok(Sphere { dim: source.dim(), source, target })
    }
}

/// Replaces every `a ⋆_0 b` where neither operand is an iterated identity
/// of a path by
/// `(a·s_1(b)) ⋆_1 (t_1(a)·b)`.
pub fn sequentialize0(e: &Cell) -> Cell {
    let mut memo = HashMap::new();
    seq0(e, &mut memo)
}

fn seq0(e: &Cell, memo: &mut HashMap<usize, Cell>) -> Cell {
    if let Some(c) = memo.get(&e.addr()) {
        return c.clone();
    }
    let out = match e.kind() {
        Kind::Obj(_) | Kind::Word(_) | Kind::Gen(_) => e.clone(),
        Kind::Id(x) => Cell::id(&seq0(x, memo)),
        Kind::Inv(x) => inv_unchecked(&seq0(x, memo)),
        Kind::Whisk(l, x, r) => whisk_unchecked(l, &seq0(x, memo), r),
        Kind::Filled(a, x, y, t) => Cell::filled(&seq0(a, memo), x, y, t.to_vec()).expect("same shape"),
        Kind::Comp(i, a, b) => {
            let (a, b) = (seq0(a, memo), seq0(b, memo));
            if *i == 0 && a.lifted_word().is_none() && b.lifted_word().is_none() {
                let left = whisk_unchecked(&Path::identity(a.src0()), &a, &b.word_boundary(Side::Source));
                let right = whisk_unchecked(&a.word_boundary(Side::Target), &b, &Path::identity(b.tgt0()));
                comp_unchecked(1, &left, &right)
            } else {
                comp_unchecked(*i, &a, &b)
            }
        }
    };
    let out = if e.is_fixed() { out.mark_fixed() } else { out };
    memo.insert(e.addr(), out.clone());
    out
}

impl PartialEq for Cell {
    /// Structural equality of expressions.
    fn eq(&self, other: &Cell) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        if self.dim() != other.dim() {
            return false;
        }
        match (self.kind(), other.kind()) {
            (Kind::Obj(a), Kind::Obj(b)) => a == b,
            (Kind::Word(a), Kind::Word(b)) => a == b,
            (Kind::Gen(a), Kind::Gen(b)) => Arc::ptr_eq(a, b) || (a.name == b.name && a.dim == b.dim),
            (Kind::Id(a), Kind::Id(b)) => a == b,
            (Kind::Comp(i, a, b), Kind::Comp(j, c, d)) => i == j && a == c && b == d,
            (Kind::Inv(a), Kind::Inv(b)) => a == b,
            (Kind::Whisk(l, a, r), Kind::Whisk(m, b, s)) => l == m && r == s && a == b,
            (Kind::Filled(a, x, y, t), Kind::Filled(b, z, v, u)) => a == b && x == z && y == v && t == u,
            _ => false,
        }
    }
}

impl Eq for Cell {}
