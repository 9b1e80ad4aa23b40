//! Sampling-theoretic machinery: labeled-set selection by pivoted
//! column-wise Gaussian elimination on the eigenvector matrix, cutoff
//! frequency, bandlimited least-squares reconstruction, thresholding, and
//! error metrics.

use ndarray::{Array1, Array2, s};
use ndarray_linalg::{JobSvd, SVDDC};

use crate::error::{Error, Result};
use crate::spectral::{bandwidth, eigencount, SpectralDecomposition};

/// A labeled node set with its cutoff frequency omega_c(L).
#[derive(Debug, Clone)]
pub struct LabelSet {
    /// sorted, distinct node indices
    pub indices: Vec<usize>,
    /// l-th smallest eigenvalue when produced by select_labels
    pub cutoff: f64,
}

/// Pick l rows by pivoted column-wise Gaussian elimination over the first l
/// eigenvector columns: at step k the unpicked row with the largest absolute
/// value in the (eliminated) k-th column is picked, then its component is
/// eliminated from the remaining columns. Ties break to the lowest index.
pub fn select_labels(decomp: &SpectralDecomposition, l: usize) -> Result<LabelSet> {
    let n = decomp.n();
    if l == 0 || l > n {
        return Err(Error::LabelOutOfRange(l, n));
    }
    let mut a: Array2<f64> = decomp.eigenvectors.slice(s![.., ..l]).to_owned();
    let mut picked = Vec::with_capacity(l);
    let mut is_picked = vec![false; n];
    for k in 0..l {
        let mut p = usize::MAX;
        let mut best = -1.0_f64;
        for i in 0..n {
            if is_picked[i] {
                continue;
            }
            let v = a[[i, k]].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        is_picked[p] = true;
        picked.push(p);
        let pivot = a[[p, k]];
        if pivot == 0.0 || k + 1 == l {
            continue; // nothing to eliminate
        }
        let ratios: Vec<f64> = (k + 1..l).map(|j| a[[p, j]] / pivot).collect();
        let col_k = a.column(k).to_owned();
        for (jj, j) in (k + 1..l).enumerate() {
            let r = ratios[jj];
            if r == 0.0 {
                continue;
            }
            let mut col = a.column_mut(j);
            col.zip_mut_with(&col_k, |cj, &ck| *cj -= r * ck);
        }
    }
    picked.sort_unstable();
    Ok(LabelSet { indices: picked, cutoff: decomp.eigenvalues[l - 1] })
}

/// The l-th smallest eigenvalue (1-indexed).
pub fn cutoff_frequency(decomp: &SpectralDecomposition, l: usize) -> Result<f64> {
    if l == 0 || l > decomp.n() {
        return Err(Error::LabelOutOfRange(l, decomp.n()));
    }
    Ok(decomp.eigenvalues[l - 1])
}

/// Result of a bandlimited reconstruction.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub signal: Array1<f64>,
    /// true when the labeled submatrix was rank-deficient and the
    /// minimum-norm solution was used
    pub rank_deficient: bool,
}

/// Least-squares bandlimited reconstruction: with R = {i : lambda_i <= theta},
/// find c minimizing |U_{L,R} c - f_L| (minimum-norm via singular-value
/// truncation at 1e-10 * sigma_max) and return g = U_{:,R} c.
pub fn reconstruct_bandlimited(
    decomp: &SpectralDecomposition,
    labels: &LabelSet,
    known_values: &Array1<f64>,
    theta: f64,
) -> Result<Reconstruction> {
    let n = decomp.n();
    if labels.indices.is_empty() {
        return Err(Error::InvalidParameter("label set is empty".into()));
    }
    if known_values.len() != labels.indices.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.indices.len(),
            got: known_values.len(),
        });
    }
    if let Some(&bad) = labels.indices.iter().find(|&&i| i >= n) {
        return Err(Error::LabelOutOfRange(bad, n));
    }
    let r = eigencount(decomp, theta);
    if r == 0 {
        return Err(Error::EmptyBand { theta, lambda_min: decomp.eigenvalues[0] });
    }
    let nl = labels.indices.len();
    let mut b = Array2::zeros((nl, r));
    for (row, &i) in labels.indices.iter().enumerate() {
        b.row_mut(row).assign(&decomp.eigenvectors.slice(s![i, ..r]));
    }
    let (u, sv, vt) = b
        .svddc(JobSvd::Some)
        .map_err(|e| Error::Eigensolver(format!("svd: {e}")))?;
    let u = u.expect("left singular vectors requested");
    let vt = vt.expect("right singular vectors requested");
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = 1e-10 * smax;
    let uty = u.t().dot(known_values);
    let mut z = Array1::zeros(sv.len());
    let mut kept = 0;
    for (i, &s) in sv.iter().enumerate() {
        if s > cutoff {
            z[i] = uty[i] / s;
            kept += 1;
        }
    }
    let rank_deficient = kept < nl.min(r);
    let c = vt.t().dot(&z);
    let signal = decomp.eigenvectors.slice(s![.., ..r]).dot(&c);
    Ok(Reconstruction { signal, rank_deficient })
}

/// Hard threshold: 1 where g[i] >= level, else 0.
pub fn threshold_signal(g: &Array1<f64>, level: f64) -> Array1<f64> {
    g.mapv(|v| f64::from(v >= level))
}

/// Fraction of mismatches over the unlabeled nodes.
pub fn mean_error(
    predicted: &Array1<f64>,
    truth: &Array1<f64>,
    labels: &LabelSet,
) -> Result<f64> {
    let n = truth.len();
    if predicted.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: predicted.len() });
    }
    if labels.indices.len() >= n {
        return Err(Error::NoUnlabeledNodes);
    }
    let mut labeled = vec![false; n];
    for &i in &labels.indices {
        if i >= n {
            return Err(Error::LabelOutOfRange(i, n));
        }
        labeled[i] = true;
    }
    let mut mism = 0usize;
    let mut total = 0usize;
    for i in 0..n {
        if labeled[i] {
            continue;
        }
        total += 1;
        if predicted[i] != truth[i] {
            mism += 1;
        }
    }
    Ok(mism as f64 / total as f64)
}

/// Label complexity (1/n) N_L(omega(f)).
pub fn label_complexity(
    decomp: &SpectralDecomposition,
    f: &Array1<f64>,
    energy_tol: f64,
) -> Result<f64> {
    let omega = bandwidth(decomp, f, energy_tol)?;
    Ok(eigencount(decomp, omega) as f64 / decomp.n() as f64)
}
