//! Matching estimated components to reference components.
//!
//! The mixture objective is invariant to relabeling, so distances to a
//! reference are taken under the permutation minimizing the total
//! Euclidean distance: exhaustive search for `k ≤ 5`, Hungarian
//! assignment above that.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Result};
use crate::linalg::distance;
use crate::params::ParamSet;

const EXHAUSTIVE_MAX_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    /// `order[j]` is the estimated component matched to reference `j`.
    pub order: Vec<usize>,
    /// Distance of each matched pair, indexed by reference component.
    pub distances: Vec<f64>,
}

impl Alignment {
    pub fn total(&self) -> f64 {
        self.distances.iter().sum()
    }

    pub fn max_distance(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }
}

pub fn align(estimate: &ParamSet, reference: &ParamSet) -> Result<Alignment> {
    ensure_dim(reference.k(), estimate.k())?;
    ensure_dim(reference.dim(), estimate.dim())?;
    let k = reference.k();
    // cost[j][i]: reference j against estimate i
    let cost: Vec<Vec<f64>> = reference
        .iter()
        .map(|r| estimate.iter().map(|e| distance(e, r)).collect())
        .collect();
    let order = if k <= EXHAUSTIVE_MAX_K {
        exhaustive(&cost)
    } else {
        hungarian(&cost)
    };
    let distances = order.iter().enumerate().map(|(j, &i)| cost[j][i]).collect();
    Ok(Alignment { order, distances })
}

fn exhaustive(cost: &[Vec<f64>]) -> Vec<usize> {
    let k = cost.len();
    let mut best = (f64::INFINITY, (0..k).collect::<Vec<_>>());
    for perm in (0..k).permutations(k) {
        let total: f64 = perm.iter().enumerate().map(|(j, &i)| cost[j][i]).sum();
        if total < best.0 {
            best = (total, perm);
        }
    }
    best.1
}

/// O(k³) Hungarian algorithm with potentials; returns, for each row, the
/// assigned column.
pub(crate) fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    assignment
}
