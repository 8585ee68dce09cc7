//! Bit-valued entropy over population-weighted partitions.
//!
//! Every score in this crate reduces to a [`ContingencyTable`]: the joint
//! population mass of two partitions, normalized to total 1. From it come the
//! absolute entropy of either marginal, the local entropy of a single column,
//! and the conditional entropy `Ent(X|Y) = sum_j q_j * Ent(X|Y_j)`.
//!
//! Logarithms are base 2 throughout and `0 * log2(1/0)` is taken to be 0.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{self, surprisal_term};
use crate::partition::{aligned_codes, LabeledPartition, UnitUniverse};

/// Tolerance on the total mass of a distribution or table.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Dense accumulation is used while `rows * cols` stays under this many cells.
const DENSE_CELL_LIMIT: usize = 1 << 22;

/// Normalized masses over a list of labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDistribution {
    labels: Vec<String>,
    masses: Vec<f64>,
}

impl MarginalDistribution {
    pub fn new(labels: Vec<String>, masses: Vec<f64>) -> Result<Self> {
        if labels.len() != masses.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} labels but {} masses",
                labels.len(),
                masses.len()
            )));
        }
        if masses.is_empty() {
            return Err(Error::InvalidDistribution("no labels".into()));
        }
        if let Some(m) = masses.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::InvalidDistribution(format!("invalid mass {m}")));
        }
        let total = numeric::sum(&masses);
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, not 1"
            )));
        }
        Ok(MarginalDistribution { labels, masses })
    }

    /// Normalize raw nonnegative weights.
    pub fn from_weights(labels: Vec<String>, weights: &[f64]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!("invalid weight {w}")));
        }
        let total = numeric::sum(weights);
        if total <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        Self::new(labels, weights.iter().map(|w| w / total).collect())
    }

    /// Unlabeled masses; labels are the indices `0..n`.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        Self::new(
            (0..masses.len()).map(|i| i.to_string()).collect(),
            masses.to_vec(),
        )
    }

    pub(crate) fn new_unchecked(labels: Vec<String>, masses: Vec<f64>) -> Self {
        debug_assert_eq!(labels.len(), masses.len());
        MarginalDistribution { labels, masses }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Number of labels with positive mass.
    pub fn support_size(&self) -> usize {
        self.masses.iter().filter(|&&m| m > 0.0).count()
    }
}

/// A nonzero entry of a contingency table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
    pub mass: f64,
}

/// Joint population mass `p(X_i ∩ Y_j)` of two partitions, normalized so
/// the grand total is 1.
///
/// Only positive cells are stored, grouped by column. Rows are the parts of
/// `X`, columns the parts of `Y`, each in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    cells: Vec<Cell>,
    col_start: Vec<usize>,
    row_marginals: Vec<f64>,
    col_marginals: Vec<f64>,
}

impl ContingencyTable {
    /// Table from a dense matrix of raw nonnegative weights
    /// (`weights[i][j]` for row `i`, column `j`), normalized by its total.
    pub fn from_weights(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        weights: &[Vec<f64>],
    ) -> Result<Self> {
        if weights.len() != row_labels.len() || weights.iter().any(|r| r.len() != col_labels.len())
        {
            return Err(Error::InvalidDistribution(
                "weight matrix shape does not match labels".into(),
            ));
        }
        let mut flat = Vec::with_capacity(row_labels.len() * col_labels.len());
        for row in weights {
            for &w in row {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidDistribution(format!("invalid weight {w}")));
                }
                flat.push(w);
            }
        }
        let total = numeric::sum(&flat);
        if total <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        let ncols = col_labels.len();
        let mut cells = Vec::new();
        for j in 0..ncols {
            for (i, row) in weights.iter().enumerate() {
                if row[j] > 0.0 {
                    cells.push(Cell {
                        row: i,
                        col: j,
                        mass: row[j] / total,
                    });
                }
            }
        }
        Ok(Self::assemble(row_labels, col_labels, cells))
    }

    /// `cells` must be sorted by `(col, row)` and hold positive masses only.
    fn assemble(row_labels: Vec<String>, col_labels: Vec<String>, cells: Vec<Cell>) -> Self {
        let ncols = col_labels.len();
        let mut col_start = vec![0; ncols + 1];
        for c in &cells {
            col_start[c.col + 1] += 1;
        }
        for j in 0..ncols {
            col_start[j + 1] += col_start[j];
        }
        let mut per_row = vec![Vec::new(); row_labels.len()];
        let mut per_col = vec![Vec::new(); ncols];
        for c in &cells {
            per_row[c.row].push(c.mass);
            per_col[c.col].push(c.mass);
        }
        let row_marginals = per_row.iter().map(|v| numeric::sum(v)).collect();
        let col_marginals = per_col.iter().map(|v| numeric::sum(v)).collect();
        ContingencyTable {
            row_labels,
            col_labels,
            cells,
            col_start,
            row_marginals,
            col_marginals,
        }
    }

    pub fn rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    /// Positive cells, grouped by column.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Positive cells of column `j`.
    pub fn column(&self, j: usize) -> &[Cell] {
        &self.cells[self.col_start[j]..self.col_start[j + 1]]
    }

    pub fn mass(&self, row: usize, col: usize) -> f64 {
        let column = self.column(col);
        column
            .binary_search_by_key(&row, |c| c.row)
            .map(|k| column[k].mass)
            .unwrap_or(0.0)
    }

    /// Population share `q_j` of each column part.
    pub fn col_marginals(&self) -> &[f64] {
        &self.col_marginals
    }

    pub fn row_marginals(&self) -> &[f64] {
        &self.row_marginals
    }

    pub fn row_marginal(&self) -> MarginalDistribution {
        MarginalDistribution::new_unchecked(self.row_labels.clone(), self.row_marginals.clone())
    }

    pub fn col_marginal(&self) -> MarginalDistribution {
        MarginalDistribution::new_unchecked(self.col_labels.clone(), self.col_marginals.clone())
    }

    pub fn grand_total(&self) -> f64 {
        let masses: Vec<f64> = self.cells.iter().map(|c| c.mass).collect();
        numeric::sum(&masses)
    }

    /// The same joint distribution with rows and columns exchanged.
    pub fn transpose(&self) -> ContingencyTable {
        let mut cells: Vec<Cell> = self
            .cells
            .iter()
            .map(|c| Cell {
                row: c.col,
                col: c.row,
                mass: c.mass,
            })
            .collect();
        cells.sort_by_key(|c| (c.col, c.row));
        Self::assemble(self.col_labels.clone(), self.row_labels.clone(), cells)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols()]; self.rows()];
        for c in &self.cells {
            dense[c.row][c.col] = c.mass;
        }
        dense
    }
}

/// Joint table of two partitions over the same units. Rows come from `x`,
/// columns from `y`.
pub fn build_table(x: &LabeledPartition, y: &LabeledPartition) -> Result<ContingencyTable> {
    let universe = x.universe();
    let y_codes = aligned_codes(universe, y)?;
    tabulate(
        universe,
        x.codes(),
        x.label_names(),
        &y_codes,
        y.label_names(),
    )
}

pub(crate) fn tabulate(
    universe: &Arc<UnitUniverse>,
    x_codes: &[usize],
    x_names: &[String],
    y_codes: &[usize],
    y_names: &[String],
) -> Result<ContingencyTable> {
    let total = universe.total_weight();
    if total <= 0.0 {
        return Err(Error::ZeroTotalWeight);
    }
    let (nx, ny) = (x_names.len(), y_names.len());
    let weights = universe.weights();
    let mut cells = Vec::new();
    if nx.saturating_mul(ny) <= DENSE_CELL_LIMIT {
        // column-major so the scan below comes out sorted by (col, row)
        let mut acc = vec![0.0; nx * ny];
        for ((&i, &j), &w) in x_codes.iter().zip(y_codes).zip(weights) {
            acc[j * nx + i] += w;
        }
        for (k, &w) in acc.iter().enumerate() {
            if w > 0.0 {
                cells.push(Cell {
                    row: k % nx,
                    col: k / nx,
                    mass: w / total,
                });
            }
        }
    } else {
        let mut acc: HashMap<(usize, usize), f64> = HashMap::new();
        for ((&i, &j), &w) in x_codes.iter().zip(y_codes).zip(weights) {
            *acc.entry((j, i)).or_insert(0.0) += w;
        }
        let mut keyed: Vec<_> = acc.into_iter().filter(|(_, w)| *w > 0.0).collect();
        keyed.sort_by_key(|(k, _)| *k);
        cells.extend(keyed.into_iter().map(|((j, i), w)| Cell {
            row: i,
            col: j,
            mass: w / total,
        }));
    }
    Ok(ContingencyTable::assemble(
        x_names.to_vec(),
        y_names.to_vec(),
        cells,
    ))
}

/// Absolute entropy `sum_i p_i log2(1/p_i)`, in bits.
pub fn entropy(m: &MarginalDistribution) -> f64 {
    let terms: Vec<f64> = m.masses().iter().map(|&p| surprisal_term(p)).collect();
    numeric::sum(&terms)
}

/// Entropy of a partition's population marginal.
pub fn partition_entropy(x: &LabeledPartition) -> f64 {
    entropy(&x.marginal())
}

/// Entropy of the row variable restricted to column `j`:
/// the entropy of `p_ij / q_j` over `i`.
pub fn local_entropy(t: &ContingencyTable, j: usize) -> Result<f64> {
    let q = t.col_marginals[j];
    if q <= 0.0 {
        return Err(Error::EmptyPart {
            part: t.col_labels[j].clone(),
        });
    }
    let terms: Vec<f64> = t
        .column(j)
        .iter()
        .map(|c| surprisal_term(c.mass / q))
        .collect();
    Ok(numeric::sum(&terms))
}

/// `Ent(X|Y) = sum_j q_j Ent(X|Y_j)` with rows as `X` and columns as `Y`.
/// Columns with no population contribute nothing.
pub fn conditional_entropy(t: &ContingencyTable) -> f64 {
    let terms: Vec<f64> = (0..t.cols())
        .filter(|&j| t.col_marginals[j] > 0.0)
        .map(|j| t.col_marginals[j] * local_entropy(t, j).expect("column has mass"))
        .collect();
    numeric::sum(&terms).max(0.0)
}

/// `Ent(X|Y) + Ent(Y) - Ent(Y|X) - Ent(X)`, which is zero by Bayes' rule for
/// entropy. Useful as a numerical self-check.
pub fn bayes_residual(t: &ContingencyTable) -> f64 {
    let transposed = t.transpose();
    let x_given_y = conditional_entropy(t);
    let y_given_x = conditional_entropy(&transposed);
    let ent_x = entropy(&t.row_marginal());
    let ent_y = entropy(&t.col_marginal());
    (x_given_y + ent_y) - (y_given_x + ent_x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<UnitUniverse> {
        let ids: Vec<String> = (0..n * n)
            .map(|k| format!("r{}c{}", k / n, k % n))
            .collect();
        Arc::new(UnitUniverse::uniform(ids).unwrap())
    }

    fn rows_cols(n: usize) -> (LabeledPartition, LabeledPartition) {
        let u = grid(n);
        let rows = LabeledPartition::from_fn(u.clone(), |k, _| format!("row{}", k / n));
        let cols = LabeledPartition::from_fn(u, |k, _| format!("col{}", k % n));
        (rows, cols)
    }

    #[test]
    fn singleton_table_is_diagonal() {
        let u = Arc::new(UnitUniverse::uniform(["a", "b", "c", "d"]).unwrap());
        let x = LabeledPartition::from_fn(u.clone(), |_, id| id.to_string());
        let t = build_table(&x, &x).unwrap();
        let dense = t.to_dense();
        for (i, row) in dense.iter().enumerate() {
            for (j, &m) in row.iter().enumerate() {
                assert_eq!(m, if i == j { 0.25 } else { 0.0 });
            }
        }
    }

    #[test]
    fn rows_by_columns_is_uniform() {
        let (rows, cols) = rows_cols(4);
        let t = build_table(&rows, &cols).unwrap();
        // oracle: enumerate units and count each (row, col) pair
        let mut counts = [[0usize; 4]; 4];
        for k in 0..16 {
            counts[k / 4][k % 4] += 1;
        }
        for (i, row) in t.to_dense().iter().enumerate() {
            for (j, &m) in row.iter().enumerate() {
                assert_eq!(m, counts[i][j] as f64 / 16.0);
            }
        }
        assert_eq!(t.row_labels()[0], "row0");
        assert_eq!(t.col_labels()[3], "col3");
    }

    #[test]
    fn two_bisected_two_intact_counties() {
        let u = grid(4);
        let counties = LabeledPartition::from_fn(u.clone(), |k, _| format!("c{}", k / 4));
        let districts = LabeledPartition::from_fn(u, |k, _| {
            let (r, c) = (k / 4, k % 4);
            match r {
                0 => "A".into(),
                1 => "B".into(),
                _ if c < 2 => "C".into(),
                _ => "D".into(),
            }
        });
        let t = build_table(&districts, &counties).unwrap();
        for j in 0..4 {
            let masses: Vec<f64> = t.column(j).iter().map(|c| c.mass).collect();
            if j < 2 {
                assert_eq!(masses, [0.25]);
            } else {
                assert_eq!(masses, [0.125, 0.125]);
            }
        }
        assert_eq!(conditional_entropy(&t), 0.5);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(
            entropy(&MarginalDistribution::from_masses(&[0.25; 4]).unwrap()),
            2.0
        );
        assert_eq!(
            entropy(&MarginalDistribution::from_masses(&[1.0]).unwrap()),
            0.0
        );
        let h = entropy(&MarginalDistribution::from_masses(&[1.0 / 16.0, 15.0 / 16.0]).unwrap());
        // 40-digit evaluation of H(1/16)
        assert!((h - 0.337_290_066_617_013_9).abs() < 1e-12);
    }

    #[test]
    fn distribution_rejects_bad_masses() {
        assert!(MarginalDistribution::from_masses(&[0.5, 0.4]).is_err());
        assert!(MarginalDistribution::from_masses(&[1.5, -0.5]).is_err());
        assert!(MarginalDistribution::from_masses(&[]).is_err());
    }

    #[test]
    fn local_entropy_examples() {
        let labels = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        let t = ContingencyTable::from_weights(
            labels(2),
            labels(3),
            &[vec![1.0, 1.0, 3.0], vec![0.0, 1.0, 1.0]],
        )
        .unwrap();
        assert_eq!(local_entropy(&t, 0).unwrap(), 0.0);
        assert_eq!(local_entropy(&t, 1).unwrap(), 1.0);
        // 40-digit evaluation of H(1/4)
        assert!((local_entropy(&t, 2).unwrap() - 0.811_278_124_459_132_9).abs() < 1e-12);
    }

    #[test]
    fn empty_column_is_an_error_but_contributes_nothing() {
        let u = Arc::new(UnitUniverse::new([("a", 1.0), ("b", 0.0), ("c", 1.0)]).unwrap());
        let x = LabeledPartition::new(u.clone(), ["p", "p", "q"]).unwrap();
        let y = LabeledPartition::new(u, ["A", "B", "A"]).unwrap();
        let t = build_table(&x, &y).unwrap();
        assert_eq!(t.cols(), 2);
        assert!(matches!(local_entropy(&t, 1), Err(Error::EmptyPart { part }) if part == "B"));
        assert_eq!(conditional_entropy(&t), 1.0);
    }

    #[test]
    fn mismatched_universes() {
        let a = Arc::new(UnitUniverse::uniform(["a", "b"]).unwrap());
        let b = Arc::new(UnitUniverse::uniform(["a", "c"]).unwrap());
        let x = LabeledPartition::from_fn(a, |_, id| id.into());
        let y = LabeledPartition::from_fn(b, |_, id| id.into());
        assert!(matches!(build_table(&x, &y), Err(Error::UniverseMismatch)));
    }

    #[test]
    fn diagonal_residual_is_tiny() {
        let (rows, _) = rows_cols(5);
        let t = build_table(&rows, &rows).unwrap();
        assert!(bayes_residual(&t).abs() < 1e-12);
        assert_eq!(conditional_entropy(&t), 0.0);
    }

    #[test]
    fn sparse_path_matches_dense_path() {
        // singletons against singletons exceed the dense limit at this size
        let n = 2100;
        let u = Arc::new(
            UnitUniverse::new((0..n).map(|i| (format!("u{i}"), (i % 7) as f64 + 1.0))).unwrap(),
        );
        let x = LabeledPartition::from_fn(u.clone(), |_, id| id.to_string());
        let y = LabeledPartition::from_fn(u, |i, _| format!("g{}", i % 13));
        let big = build_table(&x, &x).unwrap();
        assert_eq!(big.cells().len(), n);
        assert!(conditional_entropy(&big).abs() < 1e-15);
        let t = build_table(&y, &x).unwrap();
        assert_eq!(conditional_entropy(&t), 0.0);
        assert!(bayes_residual(&t).abs() < 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn weight_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
            (1usize..7, 1usize..5).prop_flat_map(|(r, c)| {
                prop::collection::vec(prop::collection::vec(0.0f64..100.0, c), r)
            })
        }

        fn table(w: &[Vec<f64>]) -> Option<ContingencyTable> {
            let rl = (0..w.len()).map(|i| format!("x{i}")).collect();
            let cl = (0..w[0].len()).map(|j| format!("y{j}")).collect();
            ContingencyTable::from_weights(rl, cl, w).ok()
        }

        proptest! {
            #[test]
            fn entropy_within_log_support(ws in prop::collection::vec(0.0f64..10.0, 1..20)) {
                prop_assume!(ws.iter().sum::<f64>() > 0.0);
                let labels = (0..ws.len()).map(|i| i.to_string()).collect();
                let m = MarginalDistribution::from_weights(labels, &ws).unwrap();
                let h = entropy(&m);
                let k = m.support_size() as f64;
                prop_assert!(h >= 0.0);
                prop_assert!(h <= k.log2() + 1e-9);
            }

            #[test]
            fn uniform_support_reaches_the_bound(k in 1usize..64, zeros in 0usize..5) {
                let mut ws = vec![3.0; k];
                ws.extend(std::iter::repeat_n(0.0, zeros));
                let m = MarginalDistribution::from_weights(
                    (0..ws.len()).map(|i| i.to_string()).collect(), &ws).unwrap();
                prop_assert!((entropy(&m) - (k as f64).log2()).abs() < 1e-9);
            }

            #[test]
            fn conditional_bounded_and_bayes(w in weight_matrix()) {
                let Some(t) = table(&w) else { return Ok(()) };
                let h = conditional_entropy(&t);
                prop_assert!(h >= 0.0);
                prop_assert!(h <= entropy(&t.row_marginal()) + 1e-9);
                prop_assert!(bayes_residual(&t).abs() < 1e-9);
                prop_assert!((t.grand_total() - 1.0).abs() < MASS_TOLERANCE);
            }

            #[test]
            fn zero_iff_columns_pure(w in weight_matrix(), sparsify in any::<u64>()) {
                // knock out entries to create some pure columns
                let w: Vec<Vec<f64>> = w.iter().enumerate().map(|(i, row)| {
                    row.iter().enumerate().map(|(j, &v)| {
                        if (sparsify >> ((i * 5 + j) % 64)) & 1 == 1 { 0.0 } else { v }
                    }).collect()
                }).collect();
                let Some(t) = table(&w) else { return Ok(()) };
                let pure = (0..t.cols()).all(|j| t.column(j).len() <= 1);
                let h = conditional_entropy(&t);
                prop_assert_eq!(pure, h == 0.0);
            }

            #[test]
            fn scale_and_order_invariance(
                weights in prop::collection::vec(0.0f64..50.0, 2..40),
                xl in prop::collection::vec(0u8..4, 40),
                yl in prop::collection::vec(0u8..5, 40),
                scale in 0.001f64..1000.0,
                seed in any::<u64>(),
            ) {
                prop_assume!(weights.iter().sum::<f64>() > 0.0);
                let n = weights.len();
                let units: Vec<(String, f64)> =
                    (0..n).map(|i| (format!("u{i}"), weights[i])).collect();
                let score = |units: Vec<(String, f64)>| {
                    let u = Arc::new(UnitUniverse::new(units).unwrap());
                    let x = LabeledPartition::from_fn(u.clone(), |_, id| {
                        let i: usize = id[1..].parse().unwrap();
                        format!("x{}", xl[i])
                    });
                    let y = LabeledPartition::from_fn(u, |_, id| {
                        let i: usize = id[1..].parse().unwrap();
                        format!("y{}", yl[i])
                    });
                    let t = build_table(&x, &y).unwrap();
                    (conditional_entropy(&t), entropy(&t.row_marginal()), entropy(&t.col_marginal()))
                };
                let base = score(units.clone());

                let scaled = units.iter().map(|(id, w)| (id.clone(), w * scale)).collect();
                let s = score(scaled);
                prop_assert!((base.0 - s.0).abs() < 1e-12);
                prop_assert!((base.1 - s.1).abs() < 1e-12);
                prop_assert!((base.2 - s.2).abs() < 1e-12);

                let mut shuffled = units;
                let mut state = seed | 1;
                for i in (1..shuffled.len()).rev() {
                    state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                    shuffled.swap(i, (state % (i as u64 + 1)) as usize);
                }
                let p = score(shuffled);
                prop_assert!((base.0 - p.0).abs() < 1e-12);
                prop_assert!((base.1 - p.1).abs() < 1e-12);
                prop_assert!((base.2 - p.2).abs() < 1e-12);
            }
        }
    }
}
