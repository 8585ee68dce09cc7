//! Ensemble analysis: pairwise plan distances, a classical MDS embedding of
//! the distance matrix, and mean-distance outlier ranks.

use std::borrow::Cow;
use std::sync::Arc;

use rayon::prelude::*;

use crate::entropy::{conditional_entropy, tabulate};
use crate::error::{Error, Result};
use crate::jacobi::symmetric_eigen;
use crate::partition::{aligned_codes, LabeledPartition, UnitUniverse};

pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Relative size below which an eigenvalue is treated as zero.
const EIGEN_ZERO: f64 = 1e-10;

/// Symmetric matrix of plan-to-plan distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    plan_ids: Vec<String>,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(plan_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = plan_ids.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix(format!("expected a {n} x {n} matrix")));
        }
        let entries: Vec<f64> = rows.into_iter().flatten().collect();
        for a in 0..n {
            if entries[a * n + a] != 0.0 {
                return Err(Error::InvalidMatrix(format!("nonzero diagonal at {a}")));
            }
            for b in 0..n {
                let x = entries[a * n + b];
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "invalid entry {x} at ({a}, {b})"
                    )));
                }
                if (x - entries[b * n + a]).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::InvalidMatrix(format!("asymmetric at ({a}, {b})")));
                }
            }
        }
        Ok(DistanceMatrix { plan_ids, entries })
    }

    pub fn n(&self) -> usize {
        self.plan_ids.len()
    }

    pub fn plan_ids(&self) -> &[String] {
        &self.plan_ids
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.n() + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        let n = self.n();
        &self.entries[a * n..(a + 1) * n]
    }

    pub fn index_of(&self, plan_id: &str) -> Option<usize> {
        self.plan_ids.iter().position(|p| p == plan_id)
    }
}

/// Distances between every pair of plans. All plans must cover the same
/// units with the same weights. Unordered pairs are computed once each, in
/// parallel; the result does not depend on scheduling.
pub fn pairwise_distances(plans: &[(String, LabeledPartition)]) -> Result<DistanceMatrix> {
    let n = plans.len();
    if n < 2 {
        return Err(Error::TooFewPlans { needed: 2, got: n });
    }
    let universe: &Arc<UnitUniverse> = plans[0].1.universe();
    let codes: Vec<Cow<[usize]>> = plans
        .iter()
        .map(|(_, p)| aligned_codes(universe, p))
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let table = tabulate(
                universe,
                &codes[a],
                plans[a].1.label_names(),
                &codes[b],
                plans[b].1.label_names(),
            )?;
            let forward = conditional_entropy(&table);
            let backward = conditional_entropy(&table.transpose());
            Ok((forward + backward) / 2.0)
        })
        .collect::<Result<_>>()?;

    let mut rows = vec![vec![0.0; n]; n];
    for (&(a, b), d) in pairs.iter().zip(values) {
        rows[a][b] = d;
        rows[b][a] = d;
    }
    DistanceMatrix::new(plans.iter().map(|(id, _)| id.clone()).collect(), rows)
}

/// Two-dimensional coordinates for each plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding2D {
    pub coordinates: Vec<[f64; 2]>,
    /// The two retained eigenvalues, largest first (before clamping).
    pub eigenvalues: [f64; 2],
    /// Eigenvalues of the centered matrix that were negative and clamped.
    pub negative_eigenvalues: usize,
    /// Set when every distance is zero; all points then sit at the origin.
    pub degenerate: bool,
}

/// Classical (Torgerson) multidimensional scaling into the plane.
///
/// Squared distances are double-centered, `B = -1/2 J D^2 J`, and each point
/// gets `v_k * sqrt(max(lambda_k, 0))` for the two largest eigenpairs of `B`.
/// Each axis is flipped so its largest-magnitude coordinate is positive.
pub fn classical_mds(dm: &DistanceMatrix) -> Embedding2D {
    let n = dm.n();
    if n == 0 || dm.entries.iter().all(|&d| d == 0.0) {
        return Embedding2D {
            coordinates: vec![[0.0; 2]; n],
            eigenvalues: [0.0; 2],
            negative_eigenvalues: 0,
            degenerate: true,
        };
    }

    let sq: Vec<f64> = dm.entries.iter().map(|d| d * d).collect();
    let row_mean: Vec<f64> = (0..n)
        .map(|i| sq[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    let grand_mean = row_mean.iter().sum::<f64>() / n as f64;
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] = -0.5 * (sq[i * n + j] - row_mean[i] - row_mean[j] + grand_mean);
        }
    }

    let eig = symmetric_eigen(&b, n);
    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep diagonal (plan index) order
    order.sort_by(|&x, &y| eig.values[y].total_cmp(&eig.values[x]));

    let largest = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero = EIGEN_ZERO * largest;
    let negative_eigenvalues = eig.values.iter().filter(|&&v| v < -zero).count();

    let mut coordinates = vec![[0.0; 2]; n];
    let mut eigenvalues = [0.0; 2];
    for (axis, &k) in order.iter().take(2).enumerate() {
        let lambda = eig.values[k];
        eigenvalues[axis] = lambda;
        if lambda <= zero {
            continue;
        }
        let scale = lambda.sqrt();
        let vector = &eig.vectors[k];
        let mut pivot = 0;
        for i in 1..n {
            if vector[i].abs() > vector[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if vector[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coordinates[i][axis] = sign * scale * vector[i];
        }
    }
    for axis in 0..2 {
        let mean = coordinates.iter().map(|c| c[axis]).sum::<f64>() / n as f64;
        for c in &mut coordinates {
            c[axis] -= mean;
        }
    }

    Embedding2D {
        coordinates,
        eigenvalues,
        negative_eigenvalues,
        degenerate: false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierEntry {
    pub index: usize,
    pub plan_id: String,
    pub mean_distance: f64,
    /// 1 is the most outlying plan. Tied means share a rank.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierReport {
    /// One entry per plan, in plan order.
    pub plans: Vec<OutlierEntry>,
    /// Entries for the flagged plans, in the order they were requested.
    pub flagged: Vec<OutlierEntry>,
}

impl OutlierReport {
    /// Entries ordered by rank, ties in plan order.
    pub fn ranked(&self) -> Vec<&OutlierEntry> {
        let mut v: Vec<&OutlierEntry> = self.plans.iter().collect();
        v.sort_by_key(|e| e.rank);
        v
    }
}

/// Mean distance from each plan to all others and its rank by that mean.
pub fn outlier_summary(dm: &DistanceMatrix, flagged: &[usize]) -> Result<OutlierReport> {
    let n = dm.n();
    if let Some(&index) = flagged.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index, len: n });
    }
    let means: Vec<f64> = (0..n)
        .map(|a| {
            if n < 2 {
                0.0
            } else {
                dm.row(a).iter().sum::<f64>() / (n - 1) as f64
            }
        })
        .collect();
    let tied = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0);
    let plans: Vec<OutlierEntry> = (0..n)
        .map(|a| OutlierEntry {
            index: a,
            plan_id: dm.plan_ids[a].clone(),
            mean_distance: means[a],
            rank: 1 + means
                .iter()
                .filter(|&&m| m > means[a] && !tied(m, means[a]))
                .count(),
        })
        .collect();
    let flagged = flagged.iter().map(|&i| plans[i].clone()).collect();
    Ok(OutlierReport { plans, flagged })
}
