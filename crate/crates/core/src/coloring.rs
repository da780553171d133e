//! Red/blue colorings of codimension-2 faces in which every codimension-3
//! face sees exactly two red and one blue incident face.
//!
//! Everything here is exact: faces are named by the facets that cut them out
//! (for a simple polytope a codimension-c face lies on exactly c facets).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Polytope;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringInstance {
    /// Facet set of each item (a codimension-2 face), sorted.
    pub items: Vec<Vec<usize>>,
    /// Three item indices per codimension-3 face.
    pub constraints: Vec<[usize; 3]>,
    /// Facet set of each constraint face, sorted.
    pub constraint_faces: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Red,
    Blue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub assignment: Vec<Color>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Backtracking,
    Exhaustive,
}

/// Why no coloring exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnsatProof {
    /// Every item lies in a multiple of `gcd` constraints, but the constraints
    /// demand `demanded` red incidences in total, which `gcd` does not divide.
    Divisibility { gcd: usize, demanded: usize },
    /// All `2^items` assignments were checked.
    Exhaustive { assignments: u64 },
    /// The backtracking tree was exhausted.
    SearchExhausted { nodes: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ColoringOutcome {
    Colorable { coloring: Coloring },
    Unsatisfiable { proof: UnsatProof },
}

impl ColoringOutcome {
    pub fn coloring(&self) -> Option<&Coloring> {
        match self {
            ColoringOutcome::Colorable { coloring } => Some(coloring),
            ColoringOutcome::Unsatisfiable { .. } => None,
        }
    }
}

/// Largest instance the exhaustive mode accepts.
pub const EXHAUSTIVE_LIMIT: usize = 24;

impl ColoringInstance {
    /// Builds the instance from facet sets. Every constraint face must be
    /// contained in exactly three items.
    pub fn from_facet_sets(items: Vec<Vec<usize>>, constraint_faces: Vec<Vec<usize>>) -> Result<Self> {
        let items: Vec<Vec<usize>> = items.into_iter().map(sorted).collect();
        let constraint_faces: Vec<Vec<usize>> = constraint_faces.into_iter().map(sorted).collect();
        let mut constraints = Vec::with_capacity(constraint_faces.len());
        for c in &constraint_faces {
            let inc: Vec<usize> = (0..items.len())
                .filter(|&i| items[i].iter().all(|j| c.contains(j)))
                .collect();
            if inc.len() != 3 {
                return Err(Error::BadIncidence(format!(
                    "face on facets {c:?} has {} incident items, expected 3",
                    inc.len()
                )));
            }
            constraints.push([inc[0], inc[1], inc[2]]);
        }
        Ok(ColoringInstance {
            items,
            constraints,
            constraint_faces,
        })
    }

    /// Instance on the boundary of the `d`-simplex, whose facets are named `0..=d`.
    pub fn simplex(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::PreconditionFailed(format!("simplex dimension {d} < 3")));
        }
        let items = subsets(d + 1, 2);
        let constraint_faces = subsets(d + 1, 3);
        Self::from_facet_sets(items, constraint_faces)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Number of constraints each item takes part in.
    pub fn item_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.items.len()];
        for c in &self.constraints {
            for &i in c {
                deg[i] += 1;
            }
        }
        deg
    }

    pub fn item_index(&self, facets: &[usize]) -> Option<usize> {
        let key = sorted(facets.to_vec());
        self.items.iter().position(|i| *i == key)
    }

    /// DIMACS CNF: variable `i + 1` true means item `i` is red. Each
    /// constraint becomes "at least two" as three pairwise clauses and
    /// "at most two" as one negative clause.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "c red/blue coloring, variable i+1 true = item i red");
        let _ = writeln!(out, "p cnf {} {}", self.items.len(), 4 * self.constraints.len());
        for &[a, b, c] in &self.constraints {
            let (a, b, c) = (a + 1, b + 1, c + 1);
            let _ = writeln!(out, "{a} {b} 0");
            let _ = writeln!(out, "{a} {c} 0");
            let _ = writeln!(out, "{b} {c} 0");
            let _ = writeln!(out, "-{a} -{b} -{c} 0");
        }
        out
    }
}

impl Coloring {
    pub fn reds(&self) -> usize {
        self.assignment.iter().filter(|c| **c == Color::Red).count()
    }

    /// Index of the first violated constraint, if any.
    pub fn violation(&self, inst: &ColoringInstance) -> Option<usize> {
        if self.assignment.len() != inst.items.len() {
            return Some(0);
        }
        inst.constraints.iter().position(|c| {
            c.iter().filter(|&&i| self.assignment[i] == Color::Red).count() != 2
        })
    }

    pub fn is_valid(&self, inst: &ColoringInstance) -> bool {
        self.violation(inst).is_none()
    }

    /// Red incidences summed over items: equals twice the constraint count
    /// for any valid coloring.
    pub fn red_incidences(&self, inst: &ColoringInstance) -> usize {
        inst.item_degrees()
            .iter()
            .zip(&self.assignment)
            .filter(|(_, c)| **c == Color::Red)
            .map(|(d, _)| d)
            .sum()
    }

    /// Red items as facet sets.
    pub fn red_items(&self, inst: &ColoringInstance) -> Vec<Vec<usize>> {
        inst.items
            .iter()
            .zip(&self.assignment)
            .filter(|(_, c)| **c == Color::Red)
            .map(|(i, _)| i.clone())
            .collect()
    }

    /// Rebuilds a coloring from its red facet sets.
    pub fn from_red_items(inst: &ColoringInstance, reds: &[Vec<usize>]) -> Result<Self> {
        let mut assignment = vec![Color::Blue; inst.items.len()];
        for r in reds {
            let i = inst
                .item_index(r)
                .ok_or_else(|| Error::BadIncidence(format!("no item on facets {r:?}")))?;
            assignment[i] = Color::Red;
        }
        Ok(Coloring { assignment })
    }
}

/// The instance of a simple polytope of dimension at least 3.
pub fn instance_from_polytope(p: &Polytope) -> Result<ColoringInstance> {
    let n = p.dim();
    if n < 3 {
        return Err(Error::PreconditionFailed(format!("dimension {n} < 3")));
    }
    let items = p.faces_of_dim(n - 2).map(|f| f.facet_ids.clone()).collect();
    let cons = p.faces_of_dim(n - 3).map(|f| f.facet_ids.clone()).collect();
    ColoringInstance::from_facet_sets(items, cons)
}

/// Instance inherited by the simplex cutting off the vertex lying on
/// `vertex_facets`: the items and constraints through that vertex.
pub fn vertex_cut_instance(inst: &ColoringInstance, vertex_facets: &[usize]) -> Result<ColoringInstance> {
    let inside = |s: &Vec<usize>| s.iter().all(|j| vertex_facets.contains(j));
    let items = inst.items.iter().filter(|s| inside(s)).cloned().collect();
    let cons = inst.constraint_faces.iter().filter(|s| inside(s)).cloned().collect();
    ColoringInstance::from_facet_sets(items, cons)
}

/// Restriction of a coloring to a vertex-cut instance.
pub fn restrict(inst: &ColoringInstance, coloring: &Coloring, sub: &ColoringInstance) -> Option<Coloring> {
    let assignment = sub
        .items
        .iter()
        .map(|s| inst.item_index(s).map(|i| coloring.assignment[i]))
        .collect::<Option<Vec<_>>>()?;
    Some(Coloring { assignment })
}

/// Divisibility obstruction, when it applies.
pub fn divisibility_certificate(inst: &ColoringInstance) -> Option<UnsatProof> {
    let g = inst.item_degrees().into_iter().fold(0, gcd);
    let demanded = 2 * inst.constraints.len();
    if g > 1 && demanded % g != 0 {
        Some(UnsatProof::Divisibility { gcd: g, demanded })
    } else if g == 0 && demanded > 0 {
        // no item is in any constraint but constraints exist: impossible by construction
        Some(UnsatProof::Divisibility { gcd: 0, demanded })
    } else {
        None
    }
}

pub fn find_coloring(inst: &ColoringInstance, mode: SolveMode) -> Result<ColoringOutcome> {
    match mode {
        SolveMode::Exhaustive => exhaustive(inst),
        SolveMode::Backtracking => Ok(backtrack(inst)),
    }
}

fn exhaustive(inst: &ColoringInstance) -> Result<ColoringOutcome> {
    let m = inst.items.len();
    if m > EXHAUSTIVE_LIMIT {
        return Err(Error::PreconditionFailed(format!(
            "exhaustive search over {m} items exceeds the limit of {EXHAUSTIVE_LIMIT}"
        )));
    }
    let masks: Vec<u32> = inst
        .constraints
        .iter()
        .map(|c| c.iter().fold(0u32, |a, &i| a | (1 << i)))
        .collect();
    let total = 1u64 << m;
    for red in 0..total {
        let red = red as u32;
        if masks.iter().all(|&c| (red & c).count_ones() == 2) {
            let assignment = (0..m)
                .map(|i| if red & (1 << i) != 0 { Color::Red } else { Color::Blue })
                .collect();
            return Ok(ColoringOutcome::Colorable {
                coloring: Coloring { assignment },
            });
        }
    }
    Ok(ColoringOutcome::Unsatisfiable {
        proof: UnsatProof::Exhaustive { assignments: total },
    })
}

struct Search<'a> {
    inst: &'a ColoringInstance,
    by_item: Vec<Vec<usize>>,
    degree: Vec<usize>,
    value: Vec<Option<Color>>,
    trail: Vec<usize>,
    /// Red incidences fixed so far and still available from unassigned items.
    red_sum: usize,
    open_sum: usize,
    demanded: usize,
    nodes: u64,
}

impl Search<'_> {
    fn assign(&mut self, i: usize, c: Color) {
        self.value[i] = Some(c);
        self.trail.push(i);
        self.open_sum -= self.degree[i];
        if c == Color::Red {
            self.red_sum += self.degree[i];
        }
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let i = self.trail.pop().unwrap();
            if self.value[i] == Some(Color::Red) {
                self.red_sum -= self.degree[i];
            }
            self.open_sum += self.degree[i];
            self.value[i] = None;
        }
    }

    /// Unit propagation from item `start`; false on conflict.
    fn propagate(&mut self, start: usize) -> bool {
        let mut queue = vec![start];
        while let Some(i) = queue.pop() {
            for ci in 0..self.by_item[i].len() {
                let c = self.inst.constraints[self.by_item[i][ci]];
                let reds = c.iter().filter(|&&j| self.value[j] == Some(Color::Red)).count();
                let blues = c.iter().filter(|&&j| self.value[j] == Some(Color::Blue)).count();
                if reds > 2 || blues > 1 {
                    return false;
                }
                let forced = if blues == 1 {
                    Some(Color::Red)
                } else if reds == 2 {
                    Some(Color::Blue)
                } else {
                    None
                };
                if let Some(color) = forced {
                    for &j in &c {
                        if self.value[j].is_none() {
                            self.assign(j, color);
                            queue.push(j);
                        }
                    }
                }
            }
        }
        self.red_sum <= self.demanded && self.red_sum + self.open_sum >= self.demanded
    }

    fn solve(&mut self) -> bool {
        self.nodes += 1;
        // branch on the unassigned item of largest degree
        let Some(i) = (0..self.value.len())
            .filter(|&i| self.value[i].is_none())
            .max_by_key(|&i| (self.degree[i], std::cmp::Reverse(i)))
        else {
            return true;
        };
        for color in [Color::Red, Color::Blue] {
            let mark = self.trail.len();
            self.assign(i, color);
            if self.propagate(i) && self.solve() {
                return true;
            }
            self.undo_to(mark);
        }
        false
    }
}

fn backtrack(inst: &ColoringInstance) -> ColoringOutcome {
    if let Some(proof) = divisibility_certificate(inst) {
        return ColoringOutcome::Unsatisfiable { proof };
    }
    let degree = inst.item_degrees();
    let mut by_item = vec![Vec::new(); inst.items.len()];
    for (ci, c) in inst.constraints.iter().enumerate() {
        for &i in c {
            by_item[i].push(ci);
        }
    }
    let mut s = Search {
        inst,
        by_item,
        open_sum: degree.iter().sum(),
        degree,
        value: vec![None; inst.items.len()],
        trail: Vec::new(),
        red_sum: 0,
        demanded: 2 * inst.constraints.len(),
        nodes: 0,
    };
    if s.solve() {
        let assignment = s.value.iter().map(|v| v.unwrap_or(Color::Blue)).collect();
        ColoringOutcome::Colorable {
            coloring: Coloring { assignment },
        }
    } else {
        ColoringOutcome::Unsatisfiable {
            proof: UnsatProof::SearchExhausted { nodes: s.nodes },
        }
    }
}

/// Canonical form for isomorphism tests: sorted multiset of per-item
/// constraint-degree profiles plus constraint count. Enough to tell apart
/// the small instances compared in tests; not a full isomorphism check.
pub fn shape(inst: &ColoringInstance) -> (usize, usize, Vec<usize>) {
    let mut deg = inst.item_degrees();
    deg.sort_unstable();
    (inst.items.len(), inst.constraints.len(), deg)
}

/// Whether two instances are isomorphic, by brute force over item bijections
/// guided by constraint structure. Only meant for small instances.
pub fn isomorphic(a: &ColoringInstance, b: &ColoringInstance) -> bool {
    if shape(a) != shape(b) {
        return false;
    }
    let m = a.items.len();
    let target: std::collections::HashSet<[usize; 3]> = b.constraints.iter().map(|c| sorted3(*c)).collect();
    let mut map = vec![usize::MAX; m];
    let mut used = vec![false; m];
    let deg_a = a.item_degrees();
    let deg_b = b.item_degrees();
    fn go(
        i: usize,
        a: &ColoringInstance,
        target: &std::collections::HashSet<[usize; 3]>,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        deg_a: &[usize],
        deg_b: &[usize],
    ) -> bool {
        if i == map.len() {
            return a.constraints.iter().all(|c| target.contains(&sorted3([map[c[0]], map[c[1]], map[c[2]]])));
        }
        for j in 0..map.len() {
            if used[j] || deg_a[i] != deg_b[j] {
                continue;
            }
            map[i] = j;
            // constraints fully mapped so far must exist in b
            let ok = a.constraints.iter().all(|c| {
                c.iter().any(|&x| x > i) || target.contains(&sorted3([map[c[0]], map[c[1]], map[c[2]]]))
            });
            if ok {
                used[j] = true;
                if go(i + 1, a, target, map, used, deg_a, deg_b) {
                    return true;
                }
                used[j] = false;
            }
        }
        map[i] = usize::MAX;
        false
    }
    go(0, a, &target, &mut map, &mut used, &deg_a, &deg_b)
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn sorted3(mut c: [usize; 3]) -> [usize; 3] {
    c.sort_unstable();
    c
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (0..n).combinations(k).collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
