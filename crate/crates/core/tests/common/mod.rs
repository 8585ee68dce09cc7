//! Shared generators and brute-force oracles for the integration suites.
//! The oracles work on grid coordinates directly and share no code with the
//! library's table, union-find or adjacency paths.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use geoentropy::{LabeledPartition, UnitUniverse};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn cell_id(row: usize, col: usize) -> String {
    format!("r{row}c{col}")
}

/// Uniform-weight `side x side` grid, row-major.
pub fn grid_universe(side: usize) -> Arc<UnitUniverse> {
    Arc::new(UnitUniverse::uniform((0..side * side).map(|k| cell_id(k / side, k % side))).unwrap())
}

pub fn grid_plan(universe: &Arc<UnitUniverse>, side: usize, labels: &[usize]) -> LabeledPartition {
    assert_eq!(labels.len(), side * side);
    LabeledPartition::from_fn(universe.clone(), |k, _| format!("d{}", labels[k]))
}

/// Arbitrary (possibly disconnected) labeling with up to `k` labels.
pub fn random_labels<R: Rng>(rng: &mut R, cells: usize, k: usize) -> Vec<usize> {
    (0..cells).map(|_| rng.gen_range(0..k)).collect()
}

/// `k` districts of exactly `cells / k` cells each, randomly placed.
pub fn balanced_labels<R: Rng>(rng: &mut R, cells: usize, k: usize) -> Vec<usize> {
    assert_eq!(cells % k, 0);
    let mut order: Vec<usize> = (0..cells).collect();
    order.shuffle(rng);
    let size = cells / k;
    let mut labels = vec![0; cells];
    for (rank, &cell) in order.iter().enumerate() {
        labels[cell] = rank / size;
    }
    labels
}

/// Counties with at least two distinct district labels among their cells.
pub fn splits_oracle(districts: &[usize], counties: &[usize]) -> usize {
    let mut seen: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (&d, &c) in districts.iter().zip(counties) {
        seen.entry(c).or_default().insert(d);
    }
    seen.values().filter(|s| s.len() > 1).count()
}

/// Flood fill over 4-neighbour grid cells sharing both labels.
pub fn pieces_oracle(side: usize, districts: &[usize], counties: &[usize]) -> usize {
    let mut visited = vec![false; side * side];
    let mut pieces = 0;
    for start in 0..side * side {
        if visited[start] {
            continue;
        }
        pieces += 1;
        visited[start] = true;
        let mut stack = vec![start];
        while let Some(k) = stack.pop() {
            let (r, c) = (k / side, k % side);
            let mut neighbours = Vec::new();
            if r > 0 {
                neighbours.push(k - side);
            }
            if r + 1 < side {
                neighbours.push(k + side);
            }
            if c > 0 {
                neighbours.push(k - 1);
            }
            if c + 1 < side {
                neighbours.push(k + 1);
            }
            for n in neighbours {
                if !visited[n] && districts[n] == districts[k] && counties[n] == counties[k] {
                    visited[n] = true;
                    stack.push(n);
                }
            }
        }
    }
    pieces
}

/// Rook adjacency pairs for a `side x side` grid.
pub fn rook_pairs(side: usize) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    for r in 0..side {
        for c in 0..side {
            if c + 1 < side {
                pairs.push((cell_id(r, c), cell_id(r, c + 1)));
            }
            if r + 1 < side {
                pairs.push((cell_id(r, c), cell_id(r + 1, c)));
            }
        }
    }
    pairs
}

pub fn euclidean_rows(points: &[[f64; 2]]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| points.iter().map(|q| planar_distance(p, q)).collect())
        .collect()
}

pub fn planar_distance(p: &[f64; 2], q: &[f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Symmetrized conditional entropy of two uniform-weight labelings, from raw
/// joint counts.
pub fn plan_distance_oracle(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut ca: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cb: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0;
        *ca.entry(x).or_default() += 1.0;
        *cb.entry(y).or_default() += 1.0;
    }
    let mut a_given_b = 0.0;
    let mut b_given_a = 0.0;
    for (&(x, y), &c) in &joint {
        a_given_b += c / n * (cb[&y] / c).log2();
        b_given_a += c / n * (ca[&x] / c).log2();
    }
    (a_given_b + b_given_a) / 2.0
}
