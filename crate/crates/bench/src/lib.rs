//! Shared fixtures for the benchmarks.

use polyres::{builtin, reduced_standard, Builtin, CategoryTable, Path, Polygraph};

pub fn as_polygraph() -> Polygraph {
    builtin(&Builtin::As).expect("builtin")
}

pub fn epi(m: usize) -> Polygraph {
    builtin(&Builtin::Epi(m)).expect("builtin")
}

/// The monoid `{1, a, b}` with `xy = y` for `x, y ∈ {a, b}`.
pub fn right_zero() -> Polygraph {
    let table = CategoryTable::monoid("1", &["a", "b"], |_, y| y.to_string());
    reduced_standard(&table).expect("reduced standard")
}

/// The word `a^n` in `As`.
pub fn power(p: &Polygraph, n: usize) -> Path {
    let a = p.gen_id("a").expect("generator a");
    p.word(vec![a; n]).expect("typed word")
}
