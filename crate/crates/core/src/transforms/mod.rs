//! AIG optimization passes and the recipe space built from them.
//!
//! Every pass takes a graph and returns a new, compacted graph computing the
//! same outputs. [`balance`] never increases depth; [`rewrite`],
//! [`refactor`] and [`resubstitute`] never increase the AND count.

mod balance;
mod rebuild;
mod refactor;
mod resub;
mod rewrite;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::aig::Aig;
use crate::npn::NpnLibrary;

pub use balance::balance;
pub use refactor::{factor_cubes, refactor, Expr};
pub use resub::resubstitute;
pub use rewrite::rewrite;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TransformId {
    Balance,
    Refactor,
    Rewrite,
    Resub,
}

impl TransformId {
    pub const ALL: [TransformId; 4] = [
        TransformId::Balance,
        TransformId::Refactor,
        TransformId::Rewrite,
        TransformId::Resub,
    ];

    /// Short command-line name.
    pub fn short(self) -> &'static str {
        match self {
            TransformId::Balance => "ba",
            TransformId::Refactor => "rf",
            TransformId::Rewrite => "rw",
            TransformId::Resub => "rs",
        }
    }

    /// Subscripted symbol as used in reports, e.g. `B_a`.
    pub fn symbol(self) -> &'static str {
        match self {
            TransformId::Balance => "B_a",
            TransformId::Refactor => "R_f",
            TransformId::Rewrite => "R_w",
            TransformId::Resub => "R_s",
        }
    }
}

impl fmt::Display for TransformId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown transform `{0}` (expected ba, rf, rw or rs)")]
pub struct UnknownTransform(pub String);

impl FromStr for TransformId {
    type Err = UnknownTransform;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "").as_str() {
            "ba" | "b" | "balance" => Ok(TransformId::Balance),
            "rf" | "refactor" => Ok(TransformId::Refactor),
            "rw" | "rewrite" => Ok(TransformId::Rewrite),
            "rs" | "resub" | "resubstitute" => Ok(TransformId::Resub),
            _ => Err(UnknownTransform(String::from(s))),
        }
    }
}

/// An ordered sequence of distinct transforms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Recipe(Vec<TransformId>);

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RecipeError {
    #[error("a recipe needs at least one transform")]
    Empty,
    #[error("transform {0} appears more than once")]
    Repeated(TransformId),
    #[error("the option set is empty")]
    EmptyOptions,
    #[error(transparent)]
    Unknown(#[from] UnknownTransform),
}

impl Recipe {
    pub fn new(steps: Vec<TransformId>) -> Result<Recipe, RecipeError> {
        if steps.is_empty() {
            return Err(RecipeError::Empty);
        }
        for (i, s) in steps.iter().enumerate() {
            if steps[..i].contains(s) {
                return Err(RecipeError::Repeated(*s));
            }
        }
        Ok(Recipe(steps))
    }

    pub fn steps(&self) -> &[TransformId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The recipe without its last step, if any steps remain.
    pub fn parent(&self) -> Option<Recipe> {
        (self.0.len() > 1).then(|| Recipe(self.0[..self.0.len() - 1].to_vec()))
    }

    /// `B_a, R_f, R_w` style rendering.
    pub fn symbols(&self) -> String {
        let mut s = String::new();
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(t.symbol());
        }
        s
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(t.short())?;
        }
        Ok(())
    }
}

impl FromStr for Recipe {
    type Err = RecipeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let steps = s
            .split([',', ';', ' '])
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.parse::<TransformId>())
            .collect::<Result<Vec<_>, _>>()?;
        Recipe::new(steps)
    }
}

/// All recipes over an option set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecipeSpace {
    options: Vec<TransformId>,
    recipes: Vec<Recipe>,
}

impl RecipeSpace {
    pub fn option_count(&self) -> usize {
        self.options.len()
    }

    pub fn options(&self) -> &[TransformId] {
        &self.options
    }

    pub fn recipes(&self) -> &[Recipe] {
        &self.recipes
    }

    pub fn len(&self) -> usize {
        self.recipes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recipes.is_empty()
    }

    pub fn position(&self, r: &Recipe) -> Option<usize> {
        self.recipes.iter().position(|x| x == r)
    }
}

/// Every ordering of every non-empty subset of `options`: shorter recipes
/// first, each length in lexicographic order of the option sequence
/// (`ba < rf < rw < rs`).
pub fn enumerate_recipes(options: &[TransformId]) -> Result<RecipeSpace, RecipeError> {
    let mut opts: Vec<TransformId> = options.to_vec();
    opts.sort_unstable();
    opts.dedup();
    if opts.is_empty() {
        return Err(RecipeError::EmptyOptions);
    }
    let mut recipes = Vec::new();
    let mut cur = Vec::new();
    for len in 1..=opts.len() {
        permutations(&opts, len, &mut cur, &mut recipes);
    }
    Ok(RecipeSpace { options: opts, recipes })
}

fn permutations(opts: &[TransformId], len: usize, cur: &mut Vec<TransformId>, out: &mut Vec<Recipe>) {
    if cur.len() == len {
        out.push(Recipe(cur.clone()));
        return;
    }
    for &o in opts {
        if !cur.contains(&o) {
            cur.push(o);
            permutations(opts, len, cur, out);
            cur.pop();
        }
    }
}

/// Runs one pass.
pub fn apply_transform(g: &Aig, t: TransformId, lib: &NpnLibrary) -> Aig {
    match t {
        TransformId::Balance => balance(g),
        TransformId::Refactor => refactor(g),
        TransformId::Rewrite => rewrite(g, lib),
        TransformId::Resub => resubstitute(g),
    }
}

/// Applies the steps of `r` in order.
pub fn apply_recipe(g: &Aig, r: &Recipe, lib: &NpnLibrary) -> Aig {
    let mut cur = g.cleanup();
    for &t in r.steps() {
        cur = apply_transform(&cur, t, lib);
    }
    cur
}

/// Results for every recipe of `space`, in recipe order.
///
/// Each recipe extends a shorter one by a single step, so the space is
/// evaluated breadth-first with one pass per recipe rather than one per
/// step. `map` runs the per-level work items and must return results in
/// input order.
pub fn apply_recipe_space<M>(g: &Aig, space: &RecipeSpace, lib: &NpnLibrary, map: M) -> Vec<Aig>
where
    M: Fn(&(dyn Fn(usize) -> Aig + Sync), usize) -> Vec<Aig>,
{
    let base = g.cleanup();
    let recipes = space.recipes();
    let mut results: Vec<Option<Aig>> = (0..recipes.len()).map(|_| None).collect();
    let max_len = recipes.iter().map(Recipe::len).max().unwrap_or(0);
    for len in 1..=max_len {
        let idx: Vec<usize> = (0..recipes.len()).filter(|&i| recipes[i].len() == len).collect();
        let parents: Vec<Option<usize>> = idx
            .iter()
            .map(|&i| recipes[i].parent().and_then(|p| space.position(&p)))
            .collect();
        let done: &Vec<Option<Aig>> = &results;
        let job = |k: usize| -> Aig {
            let i = idx[k];
            let src = match parents[k] {
                Some(p) => done[p].as_ref().expect("parent evaluated first"),
                None => &base,
            };
            let last = *recipes[i].steps().last().expect("non-empty recipe");
            apply_transform(src, last, lib)
        };
        let out = map(&job, idx.len());
        for (k, g) in out.into_iter().enumerate() {
            results[idx[k]] = Some(g);
        }
    }
    results
        .into_iter()
        .map(|r| r.expect("every recipe evaluated"))
        .collect()
}

/// Sequential work-item runner for [`apply_recipe_space`].
pub fn sequential_map(f: &(dyn Fn(usize) -> Aig + Sync), n: usize) -> Vec<Aig> {
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use TransformId::*;

    #[test]
    fn recipe_counts() {
        let counts: Vec<usize> = (1..=4)
            .map(|s| enumerate_recipes(&TransformId::ALL[..s]).unwrap().len())
            .collect();
        assert_eq!(counts, [1, 4, 15, 64]);
        assert_eq!(enumerate_recipes(&[]), Err(RecipeError::EmptyOptions));
    }

    #[test]
    fn three_option_listing() {
        let space = enumerate_recipes(&[Balance, Refactor, Rewrite]).unwrap();
        let got: Vec<String> = space.recipes().iter().map(|r| r.symbols()).collect();
        let want = [
            "B_a",
            "R_f",
            "R_w",
            "B_a, R_f",
            "B_a, R_w",
            "R_f, B_a",
            "R_f, R_w",
            "R_w, B_a",
            "R_w, R_f",
            "B_a, R_f, R_w",
            "B_a, R_w, R_f",
            "R_f, B_a, R_w",
            "R_f, R_w, B_a",
            "R_w, B_a, R_f",
            "R_w, R_f, B_a",
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn recipe_parsing() {
        let r: Recipe = "rw,rf,ba".parse().unwrap();
        assert_eq!(r.steps(), &[Rewrite, Refactor, Balance]);
        assert_eq!(r.to_string(), "rw,rf,ba");
        assert_eq!("ba,ba".parse::<Recipe>(), Err(RecipeError::Repeated(Balance)));
        assert!("xx".parse::<Recipe>().is_err());
        assert_eq!(Recipe::new(vec![]), Err(RecipeError::Empty));
    }

    #[test]
    fn every_prefix_is_a_recipe() {
        let space = enumerate_recipes(&TransformId::ALL).unwrap();
        for r in space.recipes() {
            if let Some(p) = r.parent() {
                assert!(space.position(&p).unwrap() < space.position(r).unwrap());
            }
        }
    }
}
