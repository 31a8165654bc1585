//! Probability measures on a finite state set, a regular barycentric grid on
//! the simplex, and piecewise-linear interpolation over its Freudenthal
//! triangulation.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for non-negativity and unit mass of a measure.
pub const MASS_TOL: f64 = 1e-12;

const SNAP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexMeasure(Vec<f64>);

impl SimplexMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_measure(&weights)?;
        Ok(Self(weights.into_iter().map(|w| w.max(0.0)).collect()))
    }

    /// Point mass on `state`.
    pub fn point(dim: usize, state: usize) -> Self {
        Self((0..dim).map(|s| if s == state { 1.0 } else { 0.0 }).collect())
    }

    pub fn uniform(dim: usize) -> Self {
        Self(vec![1.0 / dim as f64; dim])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

pub(crate) fn check_measure(m: &[f64]) -> Result<()> {
    if m.is_empty() {
        return Err(Error::OutsideSimplex("empty measure".into()));
    }
    if let Some(w) = m.iter().find(|w| !w.is_finite() || **w < -MASS_TOL) {
        return Err(Error::OutsideSimplex(format!("weight {w} is negative or not finite")));
    }
    let total: f64 = m.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::OutsideSimplex(format!("total mass {total}")));
    }
    Ok(())
}

/// Measures whose weights are multiples of `1 / resolution`.
#[derive(Debug, Clone)]
pub struct SimplexGrid {
    dim: usize,
    resolution: u32,
    nodes: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl SimplexGrid {
    pub fn new(dim: usize, resolution: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("the state set is empty".into()));
        }
        if resolution == 0 {
            return Err(Error::InvalidParameter {
                name: "resolution".into(),
                reason: "must be at least 1".into(),
            });
        }
        let mut nodes = Vec::new();
        compositions(resolution, dim, &mut Vec::with_capacity(dim), &mut nodes);
        let index = nodes.iter().enumerate().map(|(k, n)| (n.clone(), k)).collect();
        Ok(Self {
            dim,
            resolution,
            nodes,
            index,
        })
    }

    /// Default resolution: 20 steps per edge for two states, 10 for three,
    /// 6 beyond.
    pub fn default_for(dim: usize) -> Result<Self> {
        let r = match dim {
            0..=2 => 20,
            3 => 10,
            _ => 6,
        };
        Self::new(dim, r)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integer counts of node `k`, summing to the resolution.
    pub fn counts(&self, k: usize) -> &[u32] {
        &self.nodes[k]
    }

    pub fn node(&self, k: usize) -> Vec<f64> {
        let r = f64::from(self.resolution);
        self.nodes[k].iter().map(|&c| f64::from(c) / r).collect()
    }

    pub fn find_counts(&self, counts: &[u32]) -> Option<usize> {
        self.index.get(counts).copied()
    }

    /// Index of the node equal to `m`, if `m` lies on the grid.
    pub fn find(&self, m: &[f64]) -> Option<usize> {
        let r = f64::from(self.resolution);
        let counts: Vec<u32> = m.iter().map(|w| (w * r).round().max(0.0) as u32).collect();
        let k = self.find_counts(&counts)?;
        let exact = counts.iter().zip(m).all(|(&c, &w)| (f64::from(c) / r - w).abs() <= MASS_TOL);
        exact.then_some(k)
    }

    /// Vertices and barycentric weights of the grid cell containing `m`.
    pub fn locate(&self, m: &[f64]) -> Result<Vec<(usize, f64)>> {
        if m.len() != self.dim {
            return Err(Error::Dimension(format!("measure of length {} on a {}-state grid", m.len(), self.dim)));
        }
        check_measure(m)?;
        let d = self.dim;
        let r = f64::from(self.resolution);
        // cumulative coordinates z_k = r * sum_{l >= k} m_l, with z_0 = r
        let mut z = vec![0.0; d];
        let mut tail = 0.0;
        for k in (1..d).rev() {
            tail += m[k].max(0.0);
            let v = (r * tail).min(r);
            // snap rounding noise so on-grid measures hit their node exactly
            z[k] = if (v - v.round()).abs() < SNAP_TOL { v.round() } else { v };
        }
        z[0] = r;
        let base: Vec<i64> = z.iter().map(|v| v.floor() as i64).collect();
        let frac: Vec<f64> = z.iter().zip(&base).map(|(v, b)| v - *b as f64).collect();
        let mut order: Vec<usize> = (1..d).collect();
        order.sort_by(|&a, &b| frac[b].total_cmp(&frac[a]));

        let mut out = Vec::with_capacity(d);
        let mut vertex = base.clone();
        let mut prev = 1.0;
        for step in 0..d {
            let next = if step < order.len() { frac[order[step]] } else { 0.0 };
            let w = prev - next;
            if w > 0.0 {
                out.push((self.lookup(&vertex, m)?, w));
            }
            if step < order.len() {
                vertex[order[step]] += 1;
            }
            prev = next;
        }
        Ok(out)
    }

    fn lookup(&self, cumulative: &[i64], m: &[f64]) -> Result<usize> {
        let d = cumulative.len();
        let counts: Option<Vec<u32>> = (0..d)
            .map(|k| {
                let c = cumulative[k] - if k + 1 < d { cumulative[k + 1] } else { 0 };
                u32::try_from(c).ok()
            })
            .collect();
        counts
            .and_then(|c| self.find_counts(&c))
            .ok_or_else(|| Error::OutsideSimplex(format!("no grid cell contains {m:?}")))
    }

    /// Piecewise-linear interpolation of node values at `m`.
    pub fn interpolate(&self, values: &[f64], m: &[f64]) -> Result<f64> {
        Ok(self.locate(m)?.into_iter().map(|(k, w)| w * values[k]).sum())
    }

    /// The interpolation vertex with the largest weight; ties go to the first.
    pub fn dominant_vertex(&self, m: &[f64]) -> Result<usize> {
        let cell = self.locate(m)?;
        let mut best = cell[0];
        for &(k, w) in &cell[1..] {
            if w > best.1 {
                best = (k, w);
            }
        }
        Ok(best.0)
    }

    /// Indices of point masses, one per state.
    pub fn vertex_nodes(&self) -> Vec<usize> {
        (0..self.dim)
            .map(|s| {
                let counts: Vec<u32> = (0..self.dim).map(|k| if k == s { self.resolution } else { 0 }).collect();
                self.index[&counts]
            })
            .collect()
    }
}

/// All compositions of `total` into `parts` parts, first part descending.
fn compositions(total: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}
