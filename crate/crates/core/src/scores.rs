//! Named scores: segregation, county splitting and plan-to-plan distance.

use std::collections::HashMap;
use std::sync::Arc;

use crate::entropy::{build_table, conditional_entropy, entropy};
use crate::error::{Error, Result};
use crate::numeric::{self, surprisal_term};
use crate::partition::{aligned_codes, LabeledPartition, UnitUniverse};

/// `Seg(R, T) = Ent(R|T) / Ent(R)`.
///
/// 0 means location fully determines category (complete segregation); 1
/// means every unit of `T` has the statewide mix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegregationResult {
    pub seg: f64,
    pub ent_conditional: f64,
    pub ent_marginal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountySplitReport {
    pub entropy_score: f64,
    pub splits: usize,
    /// `None` when no adjacency graph was available.
    pub pieces: Option<usize>,
}

/// Undirected unit adjacency, stored as deduplicated index pairs `(a, b)`
/// with `a < b`, sorted.
#[derive(Debug, Clone)]
pub struct AdjacencyGraph {
    universe: Arc<UnitUniverse>,
    edges: Vec<(usize, usize)>,
}

impl AdjacencyGraph {
    pub fn from_pairs<I, A, B>(universe: Arc<UnitUniverse>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let lookup = |id: &str| {
            universe.index_of(id).ok_or_else(|| Error::UnknownUnit {
                unit: id.to_string(),
            })
        };
        let mut edges = Vec::new();
        for (a, b) in pairs {
            let (a, b) = (a.as_ref(), b.as_ref());
            let (i, j) = (lookup(a)?, lookup(b)?);
            if i == j {
                return Err(Error::SelfLoop {
                    unit: a.to_string(),
                });
            }
            edges.push((i.min(j), i.max(j)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(AdjacencyGraph { universe, edges })
    }

    /// A graph with no edges.
    pub fn empty(universe: Arc<UnitUniverse>) -> Self {
        AdjacencyGraph {
            universe,
            edges: Vec::new(),
        }
    }

    pub fn universe(&self) -> &Arc<UnitUniverse> {
        &self.universe
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as unit-id pairs.
    pub fn id_pairs(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(a, b)| (self.universe.id(a), self.universe.id(b)))
    }

    /// Edges re-indexed onto `base`, which must hold the same unit ids.
    fn edges_in(&self, base: &Arc<UnitUniverse>) -> Result<Vec<(usize, usize)>> {
        if Arc::ptr_eq(base, &self.universe) || base.ids() == self.universe.ids() {
            return Ok(self.edges.clone());
        }
        if base.len() != self.universe.len() {
            return Err(Error::UniverseMismatch);
        }
        self.edges
            .iter()
            .map(|&(a, b)| {
                let ia = base.index_of(self.universe.id(a));
                let ib = base.index_of(self.universe.id(b));
                match (ia, ib) {
                    (Some(x), Some(y)) => Ok((x, y)),
                    _ => Err(Error::UniverseMismatch),
                }
            })
            .collect()
    }
}

/// Segregation of categories `r` over geographic units `t`.
///
/// Fails with `DegenerateMarginal` when `r` has zero entropy: the score is
/// undefined for a homogeneous population.
pub fn segregation_score(r: &LabeledPartition, t: &LabeledPartition) -> Result<SegregationResult> {
    let table = build_table(r, t)?;
    let ent_marginal = entropy(&table.row_marginal());
    if ent_marginal <= 0.0 {
        return Err(Error::DegenerateMarginal);
    }
    let ent_conditional = conditional_entropy(&table).min(ent_marginal);
    Ok(SegregationResult {
        seg: (ent_conditional / ent_marginal).clamp(0.0, 1.0),
        ent_conditional,
        ent_marginal,
    })
}

/// `Ent(D|C)`: bits needed on average to learn a resident's district once
/// their county is known.
pub fn county_split_entropy(d: &LabeledPartition, c: &LabeledPartition) -> Result<f64> {
    Ok(conditional_entropy(&build_table(d, c)?))
}

/// `Ent(D|C)` evaluated straight from population counts,
/// `sum_c pop(c)/T sum_d pop(c∩d)/pop(c) log2(pop(c)/pop(c∩d))`,
/// without going through a normalized table.
pub fn county_split_entropy_closed_form(d: &LabeledPartition, c: &LabeledPartition) -> Result<f64> {
    let universe = d.universe();
    let c_codes = aligned_codes(universe, c)?;
    let total = universe.total_weight();
    let mut county_pop = vec![0.0; c.num_labels()];
    let mut overlap: HashMap<(usize, usize), f64> = HashMap::new();
    for ((&dc, &cc), &w) in d.codes().iter().zip(c_codes.iter()).zip(universe.weights()) {
        county_pop[cc] += w;
        *overlap.entry((cc, dc)).or_insert(0.0) += w;
    }
    let mut keyed: Vec<_> = overlap.into_iter().collect();
    keyed.sort_by_key(|(k, _)| *k);
    let mut per_county = vec![Vec::new(); county_pop.len()];
    for ((cc, _), pop_cd) in keyed {
        if pop_cd > 0.0 {
            per_county[cc].push(pop_cd / county_pop[cc] * (county_pop[cc] / pop_cd).log2());
        }
    }
    let terms: Vec<f64> = per_county
        .iter()
        .zip(&county_pop)
        .filter(|(_, &pop)| pop > 0.0)
        .map(|(inner, &pop)| pop / total * numeric::sum(inner))
        .collect();
    Ok(numeric::sum(&terms))
}

/// Number of counties whose units carry two or more district labels.
///
/// With `count_zero_weight` false, units of zero weight are ignored, so the
/// count is zero exactly when `county_split_entropy` is.
pub fn splits_count(
    d: &LabeledPartition,
    c: &LabeledPartition,
    count_zero_weight: bool,
) -> Result<usize> {
    let universe = d.universe();
    let c_codes = aligned_codes(universe, c)?;
    let mut first: Vec<Option<usize>> = vec![None; c.num_labels()];
    let mut split = vec![false; c.num_labels()];
    for ((&dc, &cc), &w) in d.codes().iter().zip(c_codes.iter()).zip(universe.weights()) {
        if !count_zero_weight && w == 0.0 {
            continue;
        }
        match first[cc] {
            None => first[cc] = Some(dc),
            Some(seen) if seen != dc => split[cc] = true,
            _ => {}
        }
    }
    Ok(split.into_iter().filter(|&s| s).count())
}

/// Connected pieces of the county/district overlay: for every nonempty
/// `(county, district)` cell, the number of connected components of the
/// adjacency subgraph induced on its units, summed. Weights are ignored.
pub fn pieces_count(
    d: &LabeledPartition,
    c: &LabeledPartition,
    g: &AdjacencyGraph,
) -> Result<usize> {
    let universe = d.universe();
    let c_codes = aligned_codes(universe, c)?;
    let edges = g.edges_in(universe)?;
    let d_codes = d.codes();
    let mut sets = DisjointSets::new(universe.len());
    let mut pieces = universe.len();
    for (a, b) in edges {
        if d_codes[a] == d_codes[b] && c_codes[a] == c_codes[b] && sets.union(a, b) {
            pieces -= 1;
        }
    }
    Ok(pieces)
}

/// All three county-splitting scores; `pieces` only when `g` is given.
pub fn county_split_report(
    d: &LabeledPartition,
    c: &LabeledPartition,
    g: Option<&AdjacencyGraph>,
    count_zero_weight: bool,
) -> Result<CountySplitReport> {
    Ok(CountySplitReport {
        entropy_score: county_split_entropy(d, c)?,
        splits: splits_count(d, c, count_zero_weight)?,
        pieces: g.map(|g| pieces_count(d, c, g)).transpose()?,
    })
}

/// `(Ent(D1|D2), Ent(D2|D1))`.
pub fn directed_distances(d1: &LabeledPartition, d2: &LabeledPartition) -> Result<(f64, f64)> {
    let table = build_table(d1, d2)?;
    Ok((
        conditional_entropy(&table),
        conditional_entropy(&table.transpose()),
    ))
}

/// Symmetrized plan distance `(Ent(D1|D2) + Ent(D2|D1)) / 2`, in bits.
/// The plans may have different numbers of districts.
pub fn plan_distance(d1: &LabeledPartition, d2: &LabeledPartition) -> Result<f64> {
    let (a, b) = directed_distances(d1, d2)?;
    Ok((a + b) / 2.0)
}

/// Contribution of a single county to `Ent(D|C)` when a second district
/// takes a fraction `nibble` of it: `share * H(nibble)`.
pub fn nibble_contribution(county_share: f64, nibble: f64) -> f64 {
    county_share * (surprisal_term(nibble) + surprisal_term(1.0 - nibble))
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when `a` and `b` were in different sets.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}
