//! Finite measure spaces: atoms, a dyadically refinable non-atomic part, and
//! partition sub-σ-algebras.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::formula::Formula;
use crate::numeric::CompensatedSum;
use crate::young::YoungFunction;

/// Default refinement depth allowed by [`MeasureSpace::carve_subsets`].
pub const DEFAULT_MAX_DEPTH: u32 = 60;

/// Relative accuracy of carved masses.
pub const CARVE_REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellKind {
    Atom,
    NonAtomic { depth: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: String,
    pub mass: f64,
    #[serde(flatten)]
    pub kind: CellKind,
}

impl Cell {
    pub fn is_atom(&self) -> bool {
        self.kind == CellKind::Atom
    }
}

/// Atoms in order, followed by non-atomic cells. Refinement appends children.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSpace {
    cells: Vec<Cell>,
    index: BTreeMap<String, usize>,
    /// child id -> parent id for refined cells.
    lineage: BTreeMap<String, String>,
    serial: u64,
    truncation: Option<usize>,
}

impl MeasureSpace {
    /// Builds a space from `(id, mass)` lists.
    pub fn new<I, J, S, T>(atoms: I, nonatomic: J) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        J: IntoIterator<Item = (T, f64)>,
        S: Into<String>,
        T: Into<String>,
    {
        let cells = atoms
            .into_iter()
            .map(|(id, mass)| Cell {
                id: id.into(),
                mass,
                kind: CellKind::Atom,
            })
            .chain(nonatomic.into_iter().map(|(id, mass)| Cell {
                id: id.into(),
                mass,
                kind: CellKind::NonAtomic { depth: 0 },
            }))
            .collect();
        MeasureSpace::from_cells(cells)
    }

    fn from_cells(cells: Vec<Cell>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, c) in cells.iter().enumerate() {
            if !(c.mass > 0.0 && c.mass.is_finite()) {
                return Err(Error::InvalidSpace(format!(
                    "cell `{}` has mass {}; masses must be positive and finite",
                    c.id, c.mass
                )));
            }
            if c.id.contains('~') {
                return Err(Error::InvalidSpace(format!("cell id `{}` may not contain `~`", c.id)));
            }
            if index.insert(c.id.clone(), i).is_some() {
                return Err(Error::InvalidSpace(format!("duplicate cell id `{}`", c.id)));
            }
        }
        Ok(MeasureSpace {
            cells,
            index,
            lineage: BTreeMap::new(),
            serial: 0,
            truncation: None,
        })
    }

    /// Truncation `N` when the atoms come from a parametric family.
    pub fn truncation(&self) -> Option<usize> {
        self.truncation
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.is_atom())
    }

    pub fn nonatomic_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| !c.is_atom())
    }

    pub fn cell(&self, id: &str) -> Result<&Cell> {
        self.index
            .get(id)
            .map(|&i| &self.cells[i])
            .ok_or_else(|| Error::UnknownCell(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn mass(&self, id: &str) -> Result<f64> {
        self.cell(id).map(|c| c.mass)
    }

    pub fn total_mass(&self) -> f64 {
        crate::numeric::compensated_sum(self.cells.iter().map(|c| c.mass))
    }

    /// Mass of a set of ids.
    pub fn measure<'a>(&self, ids: impl IntoIterator<Item = &'a String>) -> Result<f64> {
        let mut sum = CompensatedSum::default();
        for id in ids {
            sum.add_f64(self.mass(id)?);
        }
        Ok(sum.total().to_f64())
    }

    /// The id this cell was ultimately refined from.
    pub fn root_of<'a>(&'a self, id: &'a str) -> &'a str {
        let mut cur = id;
        while let Some(p) = self.lineage.get(cur) {
            cur = p;
        }
        cur
    }

    /// `id` followed by its ancestors, innermost first.
    pub fn ancestry<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> {
        std::iter::successors(Some(id), move |c| self.lineage.get(*c).map(String::as_str))
    }

    /// Splits a non-atomic cell into two halves.
    pub fn refine(&self, id: &str) -> Result<MeasureSpace> {
        let mut out = self.clone();
        out.refine_in_place(id)?;
        Ok(out)
    }

    fn refine_in_place(&mut self, id: &str) -> Result<(String, String)> {
        let i = *self.index.get(id).ok_or_else(|| Error::UnknownCell(id.to_string()))?;
        let depth = match self.cells[i].kind {
            CellKind::Atom => {
                return Err(Error::RefineAtom(format!("`{id}` is an atom and cannot be split")));
            }
            CellKind::NonAtomic { depth } => depth + 1,
        };
        let half = 0.5 * self.cells[i].mass;
        if !(half > 0.0) {
            return Err(Error::RefineAtom(format!("`{id}` is too small to split further")));
        }
        let root = self.root_of(id).to_string();
        let child = |space: &mut Self| {
            space.serial += 1;
            format!("{root}~{}", space.serial)
        };
        let (c0, c1) = (child(self), child(self));
        let old = std::mem::replace(
            &mut self.cells[i],
            Cell {
                id: c0.clone(),
                mass: half,
                kind: CellKind::NonAtomic { depth },
            },
        );
        self.index.remove(&old.id);
        self.index.insert(c0.clone(), i);
        self.index.insert(c1.clone(), self.cells.len());
        self.cells.push(Cell {
            id: c1.clone(),
            mass: half,
            kind: CellKind::NonAtomic { depth },
        });
        self.lineage.insert(c0.clone(), old.id.clone());
        self.lineage.insert(c1.clone(), old.id);
        Ok((c0, c1))
    }

    /// Extends a function on an earlier version of this space to refined
    /// cells by copying each ancestor's value.
    pub fn lift_function(&self, f: &SimpleFunction) -> SimpleFunction {
        let mut out = SimpleFunction::zero();
        for c in &self.cells {
            if let Some(v) = self.ancestry(&c.id).find_map(|a| f.values.get(a)) {
                out.set(&c.id, *v);
            }
        }
        out
    }

    /// Refines cells of the non-atomic `region` until pairwise-disjoint unions
    /// with masses `targets` (relative error `<= 1e-9`) exist.
    ///
    /// Returns the refined space and one id list per target.
    pub fn carve_subsets(
        &self,
        region: &[String],
        targets: &[f64],
        max_depth: u32,
    ) -> Result<(MeasureSpace, Vec<Vec<String>>)> {
        let mut space = self.clone();
        // free cells keyed by (mass bits, id); positive f64 bits order like the values
        let mut free: BTreeMap<(u64, String), ()> = BTreeMap::new();
        for id in region {
            let c = self.cell(id)?;
            if c.is_atom() {
                return Err(Error::CarveFailure(format!("region cell `{id}` is an atom")));
            }
            if free.insert((c.mass.to_bits(), id.clone()), ()).is_some() {
                return Err(Error::CarveFailure(format!("region lists `{id}` twice")));
            }
        }
        let region_mass = self.measure(region)?;
        if let Some(bad) = targets.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::CarveFailure(format!("target mass {bad} is not positive and finite")));
        }
        let wanted = crate::numeric::compensated_sum(targets.iter().copied());
        if wanted > region_mass * (1.0 + CARVE_REL_TOL) {
            return Err(Error::CarveFailure(format!(
                "targets sum to {wanted}, exceeding region mass {region_mass}"
            )));
        }
        let mut sets = Vec::with_capacity(targets.len());
        for (k, &target) in targets.iter().enumerate() {
            let mut chosen = Vec::new();
            let mut got = CompensatedSum::default();
            loop {
                let remaining = target - got.total().to_f64();
                if remaining <= 0.5 * CARVE_REL_TOL * target {
                    break;
                }
                let slack = remaining * (1.0 + 0.25 * CARVE_REL_TOL);
                let fit = free.range(..=(slack.to_bits(), String::from("\u{10FFFF}"))).next_back();
                if let Some(((bits, id), _)) = fit {
                    let key = (*bits, id.clone());
                    free.remove(&key);
                    got.add_f64(f64::from_bits(key.0));
                    chosen.push(key.1);
                    continue;
                }
                let Some(((bits, id), _)) = free.iter().next() else {
                    return Err(Error::CarveFailure(format!(
                        "region exhausted while carving target {k} ({target})"
                    )));
                };
                let key = (*bits, id.clone());
                if let CellKind::NonAtomic { depth } = space.cell(&key.1)?.kind {
                    if depth >= max_depth {
                        return Err(Error::CarveFailure(format!(
                            "depth limit {max_depth} reached carving target {k} ({target})"
                        )));
                    }
                }
                free.remove(&key);
                let (c0, c1) = space.refine_in_place(&key.1)?;
                let half = space.mass(&c0)?.to_bits();
                free.insert((half, c0), ());
                free.insert((half, c1), ());
            }
            sets.push(chosen);
        }
        Ok((space, sets))
    }
}

/// A partition of the cell ids into named blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct SubSigmaAlgebra {
    names: Vec<String>,
    blocks: Vec<Vec<String>>,
    block_of: BTreeMap<String, usize>,
}

impl SubSigmaAlgebra {
    /// Validates `blocks` against `space`; ids not mentioned become singleton
    /// blocks named after the id.
    pub fn new(space: &MeasureSpace, blocks: &BTreeMap<String, Vec<String>>) -> Result<Self> {
        let mut names = Vec::new();
        let mut out = Vec::new();
        let mut block_of = BTreeMap::new();
        for (name, ids) in blocks {
            if ids.is_empty() {
                return Err(Error::InvalidAlgebra(format!("block `{name}` is empty")));
            }
            for id in ids {
                space.cell(id).map_err(|_| {
                    Error::InvalidAlgebra(format!("block `{name}` references unknown cell `{id}`"))
                })?;
                if let Some(prev) = block_of.insert(id.clone(), out.len()) {
                    return Err(Error::InvalidAlgebra(format!(
                        "cell `{id}` appears in blocks `{}` and `{name}`",
                        names[prev]
                    )));
                }
            }
            names.push(name.clone());
            out.push(ids.clone());
        }
        for c in space.cells() {
            if !block_of.contains_key(&c.id) {
                if blocks.contains_key(&c.id) {
                    return Err(Error::InvalidAlgebra(format!(
                        "block name `{}` clashes with an uncovered cell id",
                        c.id
                    )));
                }
                block_of.insert(c.id.clone(), out.len());
                names.push(c.id.clone());
                out.push(vec![c.id.clone()]);
            }
        }
        Ok(SubSigmaAlgebra {
            names,
            blocks: out,
            block_of,
        })
    }

    /// Every cell its own block (`E` is then the identity).
    pub fn identity(space: &MeasureSpace) -> Self {
        SubSigmaAlgebra::new(space, &BTreeMap::new()).expect("identity partition is valid")
    }

    /// A single block containing every cell.
    pub fn trivial(space: &MeasureSpace) -> Self {
        let all = space.cells().iter().map(|c| c.id.clone()).collect();
        SubSigmaAlgebra::new(space, &BTreeMap::from([("X".to_string(), all)])).expect("trivial partition is valid")
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.names.iter().map(String::as_str).zip(self.blocks.iter().map(Vec::as_slice))
    }

    pub fn block_name(&self, b: usize) -> &str {
        &self.names[b]
    }

    pub fn block_ids(&self, b: usize) -> &[String] {
        &self.blocks[b]
    }

    pub fn block_of(&self, id: &str) -> Option<usize> {
        self.block_of.get(id).copied()
    }

    /// Carries the partition over to a refinement of the space it was built
    /// on: each refined cell joins its ancestor's block.
    pub fn lift(&self, space: &MeasureSpace) -> Result<Self> {
        let mut blocks: Vec<Vec<String>> = vec![Vec::new(); self.blocks.len()];
        let mut block_of = BTreeMap::new();
        for c in space.cells() {
            let b = space
                .ancestry(&c.id)
                .find_map(|a| self.block_of(a))
                .ok_or_else(|| Error::InvalidAlgebra(format!("cell `{}` has no block in the original partition", c.id)))?;
            blocks[b].push(c.id.clone());
            block_of.insert(c.id.clone(), b);
        }
        if let Some(b) = blocks.iter().position(Vec::is_empty) {
            return Err(Error::InvalidAlgebra(format!(
                "block `{}` has no cells in the refined space",
                self.names[b]
            )));
        }
        Ok(SubSigmaAlgebra {
            names: self.names.clone(),
            blocks,
            block_of,
        })
    }

    /// Checks that `f` is constant on every block (`𝒜`-measurable).
    pub fn is_measurable(&self, f: &SimpleFunction, rel_tol: f64) -> bool {
        self.blocks.iter().all(|ids| {
            let first = f.get(&ids[0]);
            ids.iter().all(|id| {
                let v = f.get(id);
                v == first || (v - first).abs() <= rel_tol * v.abs().max(first.abs()).max(1.0)
            })
        })
    }
}

/// Cell-indexed real values, zero where unset. `+∞` values are allowed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimpleFunction {
    values: BTreeMap<String, f64>,
}

impl SimpleFunction {
    pub fn zero() -> Self {
        SimpleFunction::default()
    }

    pub fn from_values<I, S>(values: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        SimpleFunction {
            values: values.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn constant(space: &MeasureSpace, c: f64) -> Self {
        SimpleFunction::from_values(space.cells().iter().map(|cell| (cell.id.clone(), c)))
    }

    pub fn indicator<'a>(ids: impl IntoIterator<Item = &'a String>) -> Self {
        SimpleFunction::from_values(ids.into_iter().map(|id| (id.clone(), 1.0)))
    }

    pub fn get(&self, id: &str) -> f64 {
        self.values.get(id).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, id: &str, v: f64) {
        self.values.insert(id.to_string(), v);
    }

    /// Explicitly stored entries (possibly zero).
    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn map(&self, mut g: impl FnMut(f64) -> f64) -> Self {
        SimpleFunction {
            values: self.values.iter().map(|(k, v)| (k.clone(), g(*v))).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    fn zip_with(&self, other: &Self, g: impl Fn(f64, f64) -> f64) -> Self {
        let keys: BTreeSet<&String> = self.values.keys().chain(other.values.keys()).collect();
        SimpleFunction {
            values: keys.into_iter().map(|k| (k.clone(), g(self.get(k), other.get(k)))).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    /// Pointwise product with `0·∞ = 0`.
    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| if a == 0.0 || b == 0.0 { 0.0 } else { a * b })
    }

    /// `Φ ∘ f`; `∞` is stored as `f64::INFINITY`.
    pub fn compose(&self, phi: &YoungFunction) -> Self {
        self.map(|v| phi.evaluate(v).to_f64())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `ε_support = 1e-12 · max(max |f|, 1)`.
    pub fn support_eps(&self) -> f64 {
        let m = self.max_abs();
        1e-12 * if m.is_finite() { m.max(1.0) } else { 1.0 }
    }

    /// `S(f) = {id : |f(id)| > ε}`.
    pub fn support_with(&self, eps: f64) -> BTreeSet<String> {
        self.values
            .iter()
            .filter(|(_, v)| v.abs() > eps)
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn support(&self) -> BTreeSet<String> {
        self.support_with(self.support_eps())
    }

    /// `∫ f dμ` with compensated summation; `∞` propagates.
    pub fn integrate(&self, space: &MeasureSpace) -> ExtendedReal {
        let mut sum = CompensatedSum::default();
        for c in space.cells() {
            let v = self.get(&c.id);
            if v != 0.0 {
                sum.add(ExtendedReal::from_f64(v) * c.mass);
            }
        }
        sum.total()
    }
}

/// Atom list in a space description: an array of cells or
/// `{"parametric": …}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AtomsSpec {
    Explicit(Vec<CellSpec>),
    Parametric { parametric: ParametricAtoms },
}

// Dispatches on the JSON shape instead of `untagged` so nested errors keep
// their path.
impl<'de> Deserialize<'de> for AtomsSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::value::{MapAccessDeserializer, SeqAccessDeserializer};

        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wrapper {
            parametric: ParametricAtoms,
        }

        struct V;
        impl<'de> serde::de::Visitor<'de> for V {
            type Value = AtomsSpec;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an array of atoms or {\"parametric\": …}")
            }
            fn visit_seq<A: serde::de::SeqAccess<'de>>(self, a: A) -> std::result::Result<AtomsSpec, A::Error> {
                Vec::deserialize(SeqAccessDeserializer::new(a)).map(AtomsSpec::Explicit)
            }
            fn visit_map<A: serde::de::MapAccess<'de>>(self, a: A) -> std::result::Result<AtomsSpec, A::Error> {
                Wrapper::deserialize(MapAccessDeserializer::new(a)).map(|w| AtomsSpec::Parametric {
                    parametric: w.parametric,
                })
            }
        }
        d.deserialize_any(V)
    }
}

impl Default for AtomsSpec {
    fn default() -> Self {
        AtomsSpec::Explicit(Vec::new())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub id: String,
    pub mass: f64,
}

/// Atoms `A1, A2, …` with `μ(A_n) = mass_formula(n)`, truncated at `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametricAtoms {
    pub mass_formula: Formula,
    #[serde(rename = "N")]
    pub truncation: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    #[serde(default)]
    pub blocks: BTreeMap<String, Vec<String>>,
}

/// JSON description of a space together with its sub-σ-algebra.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default)]
    pub atoms: AtomsSpec,
    #[serde(default)]
    pub nonatomic: Vec<CellSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_algebra: Option<AlgebraSpec>,
}

/// Id of the `n`-th parametric atom (1-based).
pub fn atom_id(n: usize) -> String {
    format!("A{n}")
}

impl SpaceSpec {
    pub fn is_parametric(&self) -> bool {
        matches!(self.atoms, AtomsSpec::Parametric { .. })
    }

    /// The truncation stored in the spec, if parametric.
    pub fn truncation(&self) -> Option<usize> {
        match &self.atoms {
            AtomsSpec::Parametric { parametric } => Some(parametric.truncation),
            AtomsSpec::Explicit(_) => None,
        }
    }

    /// Builds the space (at `truncation` for parametric atoms, defaulting to
    /// the spec's `N`) and its algebra. Block entries naming parametric atoms
    /// beyond the truncation are dropped.
    pub fn materialize(&self, truncation: Option<usize>) -> Result<(MeasureSpace, SubSigmaAlgebra)> {
        let nonatomic = self.nonatomic.iter().map(|c| (c.id.clone(), c.mass));
        let (mut space, n) = match &self.atoms {
            AtomsSpec::Explicit(list) => (
                MeasureSpace::new(list.iter().map(|c| (c.id.clone(), c.mass)), nonatomic)?,
                None,
            ),
            AtomsSpec::Parametric { parametric } => {
                let n = truncation.unwrap_or(parametric.truncation);
                let atoms: Vec<(String, f64)> =
                    (1..=n).map(|k| (atom_id(k), parametric.mass_formula.eval(k as f64))).collect();
                (MeasureSpace::new(atoms, nonatomic)?, Some(n))
            }
        };
        space.truncation = n;
        let mut blocks = self.sigma_algebra.clone().unwrap_or_default().blocks;
        if n.is_some() {
            for ids in blocks.values_mut() {
                ids.retain(|id| space.contains(id) || !is_parametric_atom_id(id));
            }
            blocks.retain(|_, ids| !ids.is_empty());
        }
        let algebra = SubSigmaAlgebra::new(&space, &blocks)?;
        Ok((space, algebra))
    }
}

fn is_parametric_atom_id(id: &str) -> bool {
    id.strip_prefix('A').is_some_and(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))
}

/// JSON description of a function: explicit values, optionally with a
/// formula in `n` giving the value on the `n`-th atom.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<Formula>,
    #[serde(default)]
    pub values: BTreeMap<String, f64>,
}

impl FunctionSpec {
    pub fn materialize(&self, space: &MeasureSpace) -> Result<SimpleFunction> {
        let mut f = SimpleFunction::zero();
        if let Some(formula) = &self.formula {
            for (k, atom) in space.atoms().enumerate() {
                f.set(&atom.id, formula.eval((k + 1) as f64));
            }
        }
        for (id, v) in &self.values {
            if !space.contains(id) {
                if space.truncation().is_some() && is_parametric_atom_id(id) {
                    continue;
                }
                return Err(Error::UnknownCell(id.clone()));
            }
            f.set(id, *v);
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn integrate_examples() {
        let s = MeasureSpace::new([("A", 3.0)], Vec::<(String, f64)>::new()).unwrap();
        assert_eq!(SimpleFunction::constant(&s, 1.0).integrate(&s), ExtendedReal::Finite(3.0));
        assert_eq!(SimpleFunction::zero().integrate(&s), ExtendedReal::ZERO);
        let s = MeasureSpace::new([("a", 1.0), ("b", 0.5), ("c", 2.0)], Vec::<(String, f64)>::new()).unwrap();
        let f = SimpleFunction::from_values([("a", 1.0), ("b", 2.0), ("c", 3.0)]);
        assert_eq!(f.integrate(&s), ExtendedReal::Finite(8.0));
        let g = SimpleFunction::from_values([("a", f64::INFINITY)]);
        assert_eq!(g.integrate(&s), ExtendedReal::Infinite);
    }

    #[test]
    fn refine_examples() {
        let s = MeasureSpace::new([("A1", 1.0)], [("B", 1.0)]).unwrap();
        let r = s.refine("B").unwrap();
        let halves: Vec<f64> = r.nonatomic_cells().map(|c| c.mass).collect();
        assert_eq!(halves, vec![0.5, 0.5]);
        let first = r.nonatomic_cells().next().unwrap().id.clone();
        let r2 = r.refine(&first).unwrap();
        let big = r2.nonatomic_cells().find(|c| c.mass == 0.5).unwrap().id.clone();
        let r3 = r2.refine(&big).unwrap();
        let masses: Vec<f64> = r3.nonatomic_cells().map(|c| c.mass).collect();
        assert_eq!(masses, vec![0.25; 4]);
        assert_eq!(r3.total_mass(), 2.0);
        assert!(matches!(s.refine("A1"), Err(Error::RefineAtom(_))));
        assert!(r3.nonatomic_cells().all(|c| r3.root_of(&c.id) == "B"));
    }

    #[test]
    fn invalid_spaces() {
        assert!(MeasureSpace::new([("a", 0.0)], Vec::<(String, f64)>::new()).is_err());
        assert!(MeasureSpace::new([("a", 1.0)], [("a", 1.0)]).is_err());
        assert!(MeasureSpace::new([("a", f64::INFINITY)], Vec::<(String, f64)>::new()).is_err());
    }

    #[test]
    fn carve_dyadic() {
        let s = MeasureSpace::new(Vec::<(String, f64)>::new(), [("F", 1.0)]).unwrap();
        let (r, sets) = s.carve_subsets(&ids(&["F"]), &[0.5, 0.25], DEFAULT_MAX_DEPTH).unwrap();
        assert_eq!(r.measure(&sets[0]).unwrap(), 0.5);
        assert_eq!(r.measure(&sets[1]).unwrap(), 0.25);
        assert!(s.carve_subsets(&ids(&["F"]), &[1.5], DEFAULT_MAX_DEPTH).is_err());
    }

    #[test]
    fn carve_non_dyadic() {
        let s = MeasureSpace::new(Vec::<(String, f64)>::new(), [("F", 1.0)]).unwrap();
        let targets = [0.3, 0.1];
        let (r, sets) = s.carve_subsets(&ids(&["F"]), &targets, DEFAULT_MAX_DEPTH).unwrap();
        for (set, t) in sets.iter().zip(targets) {
            // oracle: truncated binary expansion of t in units of 2^-k
            let m = r.measure(set).unwrap();
            assert!((m - t).abs() <= 1e-9 * t, "{m} vs {t}");
        }
        let all: BTreeSet<&String> = sets.iter().flatten().collect();
        assert_eq!(all.len(), sets.iter().map(Vec::len).sum::<usize>());
        assert!(sets.iter().flatten().all(|id| r.root_of(id) == "F"));
    }

    #[test]
    fn carve_depth_limit() {
        let s = MeasureSpace::new(Vec::<(String, f64)>::new(), [("F", 1.0)]).unwrap();
        assert!(matches!(
            s.carve_subsets(&ids(&["F"]), &[1e-30], DEFAULT_MAX_DEPTH),
            Err(Error::CarveFailure(_))
        ));
        assert!(s.carve_subsets(&ids(&["F"]), &[1e-30], 200).is_ok());
    }

    #[test]
    fn algebra_defaults_and_lift() {
        let s = MeasureSpace::new([("A1", 1.0), ("A2", 1.0)], [("B", 2.0)]).unwrap();
        let blocks = BTreeMap::from([("C".to_string(), ids(&["A1", "B"]))]);
        let alg = SubSigmaAlgebra::new(&s, &blocks).unwrap();
        assert_eq!(alg.len(), 2);
        assert_eq!(alg.block_of("A2"), Some(1));
        let r = s.refine("B").unwrap();
        let lifted = alg.lift(&r).unwrap();
        assert_eq!(lifted.block_ids(0).len(), 3);
        let dup = BTreeMap::from([("C".to_string(), ids(&["A1"])), ("D".to_string(), ids(&["A1"]))]);
        assert!(SubSigmaAlgebra::new(&s, &dup).is_err());
    }

    #[test]
    fn parametric_rematerialization() {
        let spec: SpaceSpec =
            serde_json::from_str(r#"{"atoms":{"parametric":{"mass_formula":"2^-n","N":8}}}"#).unwrap();
        let (s8, _) = spec.materialize(None).unwrap();
        let (s16, alg) = spec.materialize(Some(16)).unwrap();
        assert_eq!(s8.truncation(), Some(8));
        assert_eq!(alg.len(), 16);
        for (a, b) in s8.atoms().zip(s16.atoms()) {
            assert_eq!(a, b);
        }
        assert_eq!(s16.mass("A16").unwrap(), 2f64.powi(-16));
    }

    #[test]
    fn function_spec_formula() {
        let spec: SpaceSpec =
            serde_json::from_str(r#"{"atoms":{"parametric":{"mass_formula":"1/n","N":4}},"nonatomic":[{"id":"B","mass":1}]}"#)
                .unwrap();
        let (s, _) = spec.materialize(None).unwrap();
        let f: FunctionSpec = serde_json::from_str(r#"{"formula":"n","values":{"B":7}}"#).unwrap();
        let f = f.materialize(&s).unwrap();
        assert_eq!(f.get("A3"), 3.0);
        assert_eq!(f.get("B"), 7.0);
    }

    #[test]
    fn support_threshold() {
        let f = SimpleFunction::from_values([("a", 1e-13), ("b", 2.0)]);
        assert_eq!(f.support(), BTreeSet::from(["b".to_string()]));
    }
}
