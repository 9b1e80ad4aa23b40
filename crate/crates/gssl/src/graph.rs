//! Fully connected Gaussian-kernel similarity graph, its normalized
//! Laplacian L = (1/n)(D - W), and graph cuts.

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::Dataset;
use crate::numeric::pairwise_sum;

/// Gaussian kernel weight (2 pi sigma^2)^{-d/2} exp(-|xi-xj|^2 / (2 sigma^2)).
pub fn gaussian_weight(xi: &[f64], xj: &[f64], sigma: f64) -> Result<f64> {
    if sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    if xi.len() != xj.len() {
        return Err(Error::DimensionMismatch { expected: xi.len(), got: xj.len() });
    }
    let d = xi.len() as f64;
    let s2 = sigma * sigma;
    let sq: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((2.0 * std::f64::consts::PI * s2).powf(-0.5 * d) * (-sq / (2.0 * s2)).exp())
}

/// Dense similarity graph. Immutable after construction.
#[derive(Debug, Clone)]
pub struct SimilarityGraph {
    pub weights: Array2<f64>,
    pub degrees: Array1<f64>,
    pub sigma: f64,
    pub dim: usize,
}

impl SimilarityGraph {
    pub fn n(&self) -> usize {
        self.weights.nrows()
    }
}

/// Build the fully connected graph with zero diagonal.
pub fn build_graph(data: &Dataset, sigma: f64) -> Result<SimilarityGraph> {
    if sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let n = data.n();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if data.points.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dataset coordinates".into()));
    }
    let d = data.dim();
    let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.5 * d as f64);
    let inv2s2 = 1.0 / (2.0 * sigma * sigma);
    let pts = &data.points;
    let mut weights = Array2::zeros((n, n));
    weights
        .rows_mut()
        .into_iter()
        .enumerate()
        .collect::<Vec<_>>()
        .into_par_iter()
        .for_each(|(i, mut row)| {
            let xi = pts.row(i);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let xj = pts.row(j);
                let sq: f64 = xi.iter().zip(xj.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                row[j] = norm * (-sq * inv2s2).exp();
            }
        });
    // enforce exact symmetry against non-associative accumulation differences
    for i in 0..n {
        for j in (i + 1)..n {
            let w = weights[[i, j]];
            weights[[j, i]] = w;
        }
    }
    let degrees = Array1::from_iter(
        (0..n).map(|i| pairwise_sum(weights.row(i).as_slice().unwrap())),
    );
    Ok(SimilarityGraph { weights, degrees, sigma, dim: d })
}

/// Normalized Laplacian L = (1/n)(D - W).
pub fn laplacian(graph: &SimilarityGraph) -> Array2<f64> {
    let n = graph.n();
    let inv_n = 1.0 / n as f64;
    let mut l = graph.weights.mapv(|w| -w * inv_n);
    for i in 0..n {
        l[[i, i]] = graph.degrees[i] * inv_n;
    }
    l
}

fn check_binary(indicator: &Array1<f64>) -> Result<()> {
    for (i, &v) in indicator.iter().enumerate() {
        if v != 0.0 && v != 1.0 {
            return Err(Error::NonBinaryIndicator(v, i));
        }
    }
    Ok(())
}

/// Graph cut Σ_{i in S, j not in S} w_ij of a binary indicator, computed as
/// the direct cross-edge sum and cross-checked against the quadratic form
/// f'(D - W)f.
pub fn cut_value(graph: &SimilarityGraph, indicator: &Array1<f64>) -> Result<f64> {
    let n = graph.n();
    if indicator.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: indicator.len() });
    }
    check_binary(indicator)?;
    // direct double sum over cross pairs
    let mut terms = Vec::new();
    for i in 0..n {
        if indicator[i] != 1.0 {
            continue;
        }
        let row = graph.weights.row(i);
        let s: f64 = row
            .iter()
            .zip(indicator.iter())
            .filter(|(_, &ind)| ind == 0.0)
            .map(|(&w, _)| w)
            .sum();
        terms.push(s);
    }
    let direct = pairwise_sum(&terms);
    // quadratic form f'(D-W)f = sum_i d_i f_i^2 - f'Wf
    let mut q_terms = Vec::with_capacity(n);
    for i in 0..n {
        if indicator[i] != 1.0 {
            continue;
        }
        let row = graph.weights.row(i);
        let wf: f64 = row
            .iter()
            .zip(indicator.iter())
            .map(|(&w, &ind)| w * ind)
            .sum();
        q_terms.push(graph.degrees[i] - wf);
    }
    let quadratic = pairwise_sum(&q_terms);
    // the quadratic route cancels d_i against the within-class weight sum,
    // so its round-off scales with the degree mass of S, not with the cut;
    // allow that absolute floor on top of the relative agreement
    let deg_mass: f64 = (0..n)
        .filter(|&i| indicator[i] == 1.0)
        .map(|i| graph.degrees[i])
        .sum();
    let tol = 1e-9 * direct.abs().max(quadratic.abs()) + 1e-12 * deg_mass;
    if (direct - quadratic).abs() > tol {
        return Err(Error::CutCrossCheck { direct, quadratic });
    }
    Ok(direct)
}
