//! Units, their population weights, and labeled partitions over them.

use std::borrow::Cow;
use std::collections::HashMap;
use std::sync::Arc;

use crate::entropy::MarginalDistribution;
use crate::error::{Error, Result};
use crate::numeric;

/// The ground set of geographic units, each carrying a nonnegative
/// population weight. Unit order is significant: it fixes the order in
/// which labels are first seen, and therefore the row/column order of
/// every contingency table built over the universe.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitUniverse {
    ids: Vec<String>,
    weights: Vec<f64>,
    index: HashMap<String, usize>,
    total: f64,
}

impl UnitUniverse {
    pub fn new<I, S>(units: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut ids = Vec::new();
        let mut weights = Vec::new();
        let mut index = HashMap::new();
        for (id, weight) in units {
            let id = id.into();
            if !weight.is_finite() {
                return Err(Error::NonFiniteWeight { unit: id });
            }
            if weight < 0.0 {
                return Err(Error::NegativeWeight { unit: id, weight });
            }
            if index.insert(id.clone(), ids.len()).is_some() {
                return Err(Error::DuplicateUnit { unit: id });
            }
            ids.push(id);
            weights.push(weight);
        }
        let total = numeric::sum(&weights);
        if total <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        Ok(UnitUniverse {
            ids,
            weights,
            index,
            total,
        })
    }

    /// Every unit with weight 1.
    pub fn uniform<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(ids.into_iter().map(|id| (id, 1.0)))
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, unit: usize) -> &str {
        &self.ids[unit]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, unit: usize) -> f64 {
        self.weights[unit]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn total_weight(&self) -> f64 {
        self.total
    }

    /// Keep only the units accepted by `keep`, in the original order.
    pub fn restrict(&self, mut keep: impl FnMut(&str) -> bool) -> Result<UnitUniverse> {
        UnitUniverse::new(
            self.ids
                .iter()
                .zip(&self.weights)
                .filter(|(id, _)| keep(id))
                .map(|(id, &w)| (id.clone(), w)),
        )
    }

    /// Same units, every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<UnitUniverse> {
        UnitUniverse::new(
            self.ids
                .iter()
                .zip(&self.weights)
                .map(|(id, &w)| (id.clone(), w * factor)),
        )
    }

    /// For every unit of `self`, its index in `other`, provided both hold
    /// exactly the same units with the same weights.
    fn index_map_into(&self, other: &UnitUniverse) -> Option<Vec<usize>> {
        if self.len() != other.len() {
            return None;
        }
        self.ids
            .iter()
            .zip(&self.weights)
            .map(|(id, &w)| {
                let j = other.index_of(id)?;
                (other.weights[j] == w).then_some(j)
            })
            .collect()
    }
}

/// A total assignment of the units of a universe to opaque string labels.
///
/// Labels are interned as dense codes numbered by first appearance in the
/// universe's unit order.
#[derive(Debug, Clone)]
pub struct LabeledPartition {
    universe: Arc<UnitUniverse>,
    names: Vec<String>,
    codes: Vec<usize>,
}

impl LabeledPartition {
    /// One label per unit, in the universe's unit order.
    pub fn new<I, S>(universe: Arc<UnitUniverse>, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut names = Vec::new();
        let mut lookup: HashMap<String, usize> = HashMap::new();
        let mut codes = Vec::with_capacity(universe.len());
        for label in labels {
            if codes.len() == universe.len() {
                return Err(Error::UniverseMismatch);
            }
            let label = label.as_ref();
            let code = match lookup.get(label) {
                Some(&c) => c,
                None => {
                    let c = names.len();
                    names.push(label.to_string());
                    lookup.insert(label.to_string(), c);
                    c
                }
            };
            codes.push(code);
        }
        if codes.len() < universe.len() {
            return Err(Error::MissingLabel {
                unit: universe.id(codes.len()).to_string(),
            });
        }
        Ok(LabeledPartition {
            universe,
            names,
            codes,
        })
    }

    /// Build from `(unit_id, label)` pairs in any order. Every unit must be
    /// labeled exactly once.
    pub fn from_assignments<I, A, B>(universe: Arc<UnitUniverse>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: Into<String>,
    {
        let mut slots: Vec<Option<String>> = vec![None; universe.len()];
        for (unit, label) in pairs {
            let unit = unit.as_ref();
            let i = universe.index_of(unit).ok_or_else(|| Error::UnknownUnit {
                unit: unit.to_string(),
            })?;
            if slots[i].is_some() {
                return Err(Error::DuplicateUnit {
                    unit: unit.to_string(),
                });
            }
            slots[i] = Some(label.into());
        }
        let mut labels = Vec::with_capacity(slots.len());
        for (i, slot) in slots.into_iter().enumerate() {
            match slot {
                Some(label) => labels.push(label),
                None => {
                    return Err(Error::MissingLabel {
                        unit: universe.id(i).to_string(),
                    })
                }
            }
        }
        Self::new(universe, labels)
    }

    /// Label each unit by a function of its index and id.
    pub fn from_fn(
        universe: Arc<UnitUniverse>,
        mut label: impl FnMut(usize, &str) -> String,
    ) -> Self {
        let labels: Vec<String> = (0..universe.len())
            .map(|i| label(i, universe.id(i)))
            .collect();
        Self::new(universe, labels).expect("one label per unit")
    }

    pub fn universe(&self) -> &Arc<UnitUniverse> {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Distinct labels in order of first appearance.
    pub fn label_names(&self) -> &[String] {
        &self.names
    }

    pub fn num_labels(&self) -> usize {
        self.names.len()
    }

    pub fn codes(&self) -> &[usize] {
        &self.codes
    }

    pub fn code(&self, unit: usize) -> usize {
        self.codes[unit]
    }

    pub fn label_of(&self, unit: usize) -> &str {
        &self.names[self.codes[unit]]
    }

    /// `(unit_id, label)` pairs in unit order.
    pub fn assignments(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.universe
            .ids()
            .iter()
            .zip(&self.codes)
            .map(|(id, &c)| (id.as_str(), self.names[c].as_str()))
    }

    /// Population fraction of each part.
    pub fn marginal(&self) -> MarginalDistribution {
        let mut weights = vec![Vec::new(); self.names.len()];
        for (&c, &w) in self.codes.iter().zip(self.universe.weights()) {
            weights[c].push(w);
        }
        let total = self.universe.total_weight();
        let masses = weights.iter().map(|ws| numeric::sum(ws) / total).collect();
        MarginalDistribution::new_unchecked(self.names.clone(), masses)
    }

    /// The same partition carried onto another universe that holds the same
    /// units with the same weights.
    pub fn rebase(&self, universe: Arc<UnitUniverse>) -> Result<LabeledPartition> {
        let codes = aligned_codes(&universe, self)?;
        let labels: Vec<&str> = codes.iter().map(|&c| self.names[c].as_str()).collect();
        LabeledPartition::new(universe, labels)
    }
}

/// `partition`'s label codes indexed by the units of `base`.
///
/// Fails with `UniverseMismatch` unless both universes hold the same unit
/// ids with identical weights.
pub(crate) fn aligned_codes<'a>(
    base: &Arc<UnitUniverse>,
    partition: &'a LabeledPartition,
) -> Result<Cow<'a, [usize]>> {
    let other = partition.universe();
    if Arc::ptr_eq(base, other) || (base.ids == other.ids && base.weights == other.weights) {
        return Ok(Cow::Borrowed(&partition.codes));
    }
    let map = base.index_map_into(other).ok_or(Error::UniverseMismatch)?;
    Ok(Cow::Owned(
        map.into_iter().map(|j| partition.codes[j]).collect(),
    ))
}
