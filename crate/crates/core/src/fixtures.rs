//! Small synthetic grid states with known scores.
//!
//! * `aregon`, `barkansas`, `cattachusetts`, `ducklahoma`: a 4 x 2 grid of
//!   equal tracts, with a minority share placed in some cells.
//! * `grid-intact`, `grid-bisected`, `grid-quartered`, `grid-mixed`: a 4 x 4
//!   grid whose counties are the four rows, with district plans that split
//!   them 0, 1, 2 and 0.5 bits' worth.
//! * `rows-vs-columns`: two 4 x 4 plans, one by rows and one by columns.
//!
//! Every fixture carries rook adjacency between grid cells.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ingest::{write_adjacency, write_assignment, WeightTable};
use crate::partition::{LabeledPartition, UnitUniverse};
use crate::scores::AdjacencyGraph;

type CellLabel = fn(usize, usize) -> String;

/// Column names written for the segregation fixtures.
pub const CATEGORY_COLUMN: &str = "category";
pub const TOTAL_COLUMN: &str = "total";
pub const WEIGHT_COLUMN: &str = "weight";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FixtureName {
    Aregon,
    Barkansas,
    Cattachusetts,
    Ducklahoma,
    GridIntact,
    GridBisected,
    GridQuartered,
    GridMixed,
    RowsVsColumns,
}

impl FixtureName {
    pub const ALL: [FixtureName; 9] = [
        FixtureName::Aregon,
        FixtureName::Barkansas,
        FixtureName::Cattachusetts,
        FixtureName::Ducklahoma,
        FixtureName::GridIntact,
        FixtureName::GridBisected,
        FixtureName::GridQuartered,
        FixtureName::GridMixed,
        FixtureName::RowsVsColumns,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FixtureName::Aregon => "aregon",
            FixtureName::Barkansas => "barkansas",
            FixtureName::Cattachusetts => "cattachusetts",
            FixtureName::Ducklahoma => "ducklahoma",
            FixtureName::GridIntact => "grid-intact",
            FixtureName::GridBisected => "grid-bisected",
            FixtureName::GridQuartered => "grid-quartered",
            FixtureName::GridMixed => "grid-mixed",
            FixtureName::RowsVsColumns => "rows-vs-columns",
        }
    }
}

impl fmt::Display for FixtureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FixtureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FixtureName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::UnknownFixtureName {
                name: s.to_string(),
            })
    }
}

/// What each grid cell carries.
#[derive(Debug, Clone, PartialEq)]
pub enum FixtureLayers {
    /// Per-cell fraction of the population in the category, row-major.
    /// Every cell is its own tract.
    Categories { fractions: Vec<f64> },
    /// Named partitions, each a row-major list of cell labels.
    Labels(Vec<(String, Vec<String>)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub cell_weight: f64,
    pub layers: FixtureLayers,
}

impl FixtureSpec {
    pub fn named(name: &str) -> Result<Self> {
        Ok(Self::for_name(name.parse()?))
    }

    pub fn for_name(name: FixtureName) -> Self {
        use FixtureName::*;
        let categories = |cols: &[usize], fraction: f64| {
            let fractions = (0..8)
                .map(|k| {
                    if cols.contains(&(k % 4)) {
                        fraction
                    } else {
                        0.0
                    }
                })
                .collect();
            FixtureSpec {
                name: name.to_string(),
                width: 4,
                height: 2,
                cell_weight: 16.0,
                layers: FixtureLayers::Categories { fractions },
            }
        };
        let grid = |layers: Vec<(&str, CellLabel)>| FixtureSpec {
            name: name.to_string(),
            width: 4,
            height: 4,
            cell_weight: 1.0,
            layers: FixtureLayers::Labels(
                layers
                    .into_iter()
                    .map(|(role, f)| (role.to_string(), (0..16).map(|k| f(k / 4, k % 4)).collect()))
                    .collect(),
            ),
        };
        const COUNTY: [&str; 4] = ["red", "yellow", "green", "blue"];
        let county: fn(usize, usize) -> String = |r, _| COUNTY[r].to_string();
        match name {
            Aregon => categories(&[0], 0.25),
            Barkansas => categories(&[0, 1], 0.125),
            Cattachusetts => categories(&[0], 0.5),
            Ducklahoma => categories(&[0, 1], 0.25),
            GridIntact => grid(vec![
                ("districts", |r, _| format!("d{}", r + 1)),
                ("counties", county),
            ]),
            GridBisected => grid(vec![
                ("districts", |r, c| format!("d{}", 1 + 2 * (r / 2) + c / 2)),
                ("counties", county),
            ]),
            GridQuartered => grid(vec![
                ("districts", |_, c| format!("d{}", c + 1)),
                ("counties", county),
            ]),
            GridMixed => grid(vec![
                ("districts", |r, c| match r {
                    0 | 1 => format!("d{}", r + 1),
                    _ => format!("d{}", 3 + c / 2),
                }),
                ("counties", county),
            ]),
            RowsVsColumns => grid(vec![
                ("plan_a", |r, _| format!("d{}", r + 1)),
                ("plan_b", |_, c| format!("d{}", c + 1)),
            ]),
        }
    }

    fn validate(&self) -> Result<()> {
        let cells = self.width * self.height;
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidFixture(
                "grid dimensions must be at least 1".into(),
            ));
        }
        if !(self.cell_weight.is_finite() && self.cell_weight > 0.0) {
            return Err(Error::InvalidFixture("cell weight must be positive".into()));
        }
        match &self.layers {
            FixtureLayers::Categories { fractions } => {
                if fractions.len() != cells {
                    return Err(Error::InvalidFixture(format!(
                        "{} fractions for {cells} cells",
                        fractions.len()
                    )));
                }
                if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
                    return Err(Error::InvalidFixture("fractions must lie in [0, 1]".into()));
                }
            }
            FixtureLayers::Labels(layers) => {
                if layers.is_empty() {
                    return Err(Error::InvalidFixture("no label layers".into()));
                }
                if let Some((role, _)) = layers.iter().find(|(_, l)| l.len() != cells) {
                    return Err(Error::InvalidFixture(format!(
                        "layer {role:?} does not label {cells} cells"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A generated fixture: unit weights, named partitions over the units, and
/// rook adjacency.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    /// `category,total` for segregation fixtures, `weight` otherwise.
    pub weights: WeightTable,
    /// Units weighted by total population.
    pub universe: Arc<UnitUniverse>,
    pub partitions: Vec<(String, LabeledPartition)>,
    pub adjacency: AdjacencyGraph,
}

impl Fixture {
    pub fn partition(&self, role: &str) -> Option<&LabeledPartition> {
        self.partitions
            .iter()
            .find(|(r, _)| r == role)
            .map(|(_, p)| p)
    }

    pub fn is_segregation(&self) -> bool {
        self.weights.columns().iter().any(|c| c == CATEGORY_COLUMN)
    }

    /// Write `weights.csv`, one `<role>.csv` per partition and
    /// `adjacency.csv` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let weights = dir.join("weights.csv");
        self.weights.write(&weights)?;
        written.push(weights);
        for (role, p) in &self.partitions {
            let path = dir.join(format!("{role}.csv"));
            write_assignment(&path, p)?;
            written.push(path);
        }
        let adjacency = dir.join("adjacency.csv");
        write_adjacency(&adjacency, &self.adjacency)?;
        written.push(adjacency);
        Ok(written)
    }
}

/// Id of the grid cell in `row`, `col`.
pub fn grid_unit_id(row: usize, col: usize) -> String {
    format!("r{row}c{col}")
}

/// Rook (edge-sharing) adjacency on a `width x height` grid of
/// [`grid_unit_id`] units.
pub fn rook_adjacency(
    universe: Arc<UnitUniverse>,
    width: usize,
    height: usize,
) -> Result<AdjacencyGraph> {
    let mut pairs = Vec::new();
    for r in 0..height {
        for c in 0..width {
            if c + 1 < width {
                pairs.push((grid_unit_id(r, c), grid_unit_id(r, c + 1)));
            }
            if r + 1 < height {
                pairs.push((grid_unit_id(r, c), grid_unit_id(r + 1, c)));
            }
        }
    }
    AdjacencyGraph::from_pairs(universe, pairs)
}

pub fn make_fixture(spec: &FixtureSpec) -> Result<Fixture> {
    spec.validate()?;
    let ids: Vec<String> = (0..spec.width * spec.height)
        .map(|k| grid_unit_id(k / spec.width, k % spec.width))
        .collect();
    let (weights, partitions_raw) = match &spec.layers {
        FixtureLayers::Categories { fractions } => {
            let rows = ids
                .iter()
                .zip(fractions)
                .map(|(id, f)| (id.clone(), vec![f * spec.cell_weight, spec.cell_weight]))
                .collect();
            let table = WeightTable::new(vec![CATEGORY_COLUMN.into(), TOTAL_COLUMN.into()], rows)?;
            let tracts = ids.iter().map(|id| format!("t{}", &id[1..])).collect();
            (table, vec![("tracts".to_string(), tracts)])
        }
        FixtureLayers::Labels(layers) => {
            let rows = ids
                .iter()
                .map(|id| (id.clone(), vec![spec.cell_weight]))
                .collect();
            let table = WeightTable::new(vec![WEIGHT_COLUMN.into()], rows)?;
            (table, layers.clone())
        }
    };
    let total_column = if matches!(spec.layers, FixtureLayers::Categories { .. }) {
        TOTAL_COLUMN
    } else {
        WEIGHT_COLUMN
    };
    let universe = Arc::new(weights.universe(Some(total_column))?);
    let partitions = partitions_raw
        .into_iter()
        .map(|(role, labels)| Ok((role, LabeledPartition::new(universe.clone(), labels)?)))
        .collect::<Result<_>>()?;
    let adjacency = rook_adjacency(universe.clone(), spec.width, spec.height)?;
    Ok(Fixture {
        name: spec.name.clone(),
        weights,
        universe,
        partitions,
        adjacency,
    })
}

/// Shorthand for `make_fixture(&FixtureSpec::named(name)?)`.
pub fn named_fixture(name: &str) -> Result<Fixture> {
    make_fixture(&FixtureSpec::named(name)?)
}
