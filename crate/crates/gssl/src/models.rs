//! Generative data models: a Gaussian-mixture separable model with a
//! parameterized class boundary, and a nonseparable two-bump mixture with
//! an overlap region. Provides sampling, exact density evaluation, boundary
//! density suprema, sublevel-set masses, and the overlap integral that the
//! convergence experiments compare against.

use ndarray::{Array1, Array2};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, golden_section_max, scale_gauss_legendre};
use crate::rng;

/// One isotropic Gaussian mixture component: covariance = `covariance_scale * I`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mean: Vec<f64>,
    pub covariance_scale: f64,
    pub weight: f64,
}

impl GaussianComponent {
    pub fn new(mean: Vec<f64>, covariance_scale: f64, weight: f64) -> Result<Self> {
        if covariance_scale <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "covariance_scale must be positive, got {covariance_scale}"
            )));
        }
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "component weight must be in (0,1], got {weight}"
            )));
        }
        Ok(Self { mean, covariance_scale, weight })
    }

    fn density(&self, x: &[f64]) -> f64 {
        let d = self.mean.len() as f64;
        let sq: f64 = x
            .iter()
            .zip(&self.mean)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let norm = (2.0 * std::f64::consts::PI * self.covariance_scale).powf(-0.5 * d);
        self.weight * norm * (-sq / (2.0 * self.covariance_scale)).exp()
    }
}

/// Parameterized boundary family for the separable model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundaryKind {
    VerticalLine { c: f64 },
    HorizontalLine { c: f64 },
    /// x = y^2 - 1
    Parabola,
    Circle { radius: f64 },
}

/// A class boundary plus orientation. Points exactly on the boundary belong
/// to class S regardless of orientation (closed-set convention).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    #[serde(flatten)]
    pub kind: BoundaryKind,
    /// Swap which side is class S.
    #[serde(default)]
    pub flipped: bool,
}

impl BoundarySpec {
    pub fn new(kind: BoundaryKind) -> Self {
        Self { kind, flipped: false }
    }

    /// Signed boundary function: zero exactly on the boundary, negative on
    /// the default S side.
    fn signed(&self, x: &[f64]) -> f64 {
        match self.kind {
            BoundaryKind::VerticalLine { c } => x[0] - c,
            BoundaryKind::HorizontalLine { c } => x[1] - c,
            BoundaryKind::Parabola => x[0] - (x[1] * x[1] - 1.0),
            BoundaryKind::Circle { radius } => {
                x.iter().map(|v| v * v).sum::<f64>() - radius * radius
            }
        }
    }

    /// Deterministic, total membership predicate for class S.
    pub fn contains(&self, x: &[f64]) -> bool {
        let s = self.signed(x);
        if self.flipped {
            s >= 0.0
        } else {
            s <= 0.0
        }
    }

    /// Indicator signal of this boundary over a point set.
    pub fn indicator(&self, points: &Array2<f64>) -> Vec<u8> {
        points
            .rows()
            .into_iter()
            .map(|row| u8::from(self.contains(row.as_slice().unwrap())))
            .collect()
    }

    /// The five boundaries used with the paper-preset mixture: S1..S5.
    pub fn preset(name: &str) -> Option<Self> {
        let kind = match name {
            "S1" => BoundaryKind::VerticalLine { c: 0.0 },
            "S2" => BoundaryKind::VerticalLine { c: -1.0 },
            "S3" => BoundaryKind::Parabola,
            "S4" => BoundaryKind::HorizontalLine { c: 0.0 },
            "S5" => BoundaryKind::Circle { radius: 1.0 },
            _ => return None,
        };
        Some(Self::new(kind))
    }
}

/// Separable model: Gaussian mixture density split by a smooth boundary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparableModelSpec {
    pub components: Vec<GaussianComponent>,
    pub boundary: BoundarySpec,
}

impl SeparableModelSpec {
    pub fn new(components: Vec<GaussianComponent>, boundary: BoundarySpec) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("at least one component required".into()));
        }
        let d = components[0].mean.len();
        for c in &components {
            if c.mean.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: c.mean.len() });
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "component weights must sum to 1, got {total}"
            )));
        }
        Ok(Self { components, boundary })
    }

    /// The two-Gaussian mixture used throughout the experiments:
    /// 0.4 N([-1,0], 0.25 I) + 0.6 N([1,0], 0.16 I).
    pub fn paper_gmm(boundary: BoundarySpec) -> Self {
        Self::new(
            vec![
                GaussianComponent::new(vec![-1.0, 0.0], 0.25, 0.4).unwrap(),
                GaussianComponent::new(vec![1.0, 0.0], 0.16, 0.6).unwrap(),
            ],
            boundary,
        )
        .unwrap()
    }

    pub fn dim(&self) -> usize {
        self.components[0].mean.len()
    }

    /// Exact mixture density.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.components.iter().map(|c| c.density(x)).sum())
    }

    /// Supremum of the mixture density over a boundary, by dense grid search
    /// over the 1-D parameterization refined with golden-section search.
    pub fn boundary_sup_density(&self, boundary: &BoundarySpec) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::InvalidParameter(
                "boundary supremum search supports 2-D models only".into(),
            ));
        }
        // parameterization t -> point on boundary
        let point = |t: f64| -> [f64; 2] {
            match boundary.kind {
                BoundaryKind::VerticalLine { c } => [c, t],
                BoundaryKind::HorizontalLine { c } => [t, c],
                BoundaryKind::Parabola => [t * t - 1.0, t],
                BoundaryKind::Circle { radius } => [radius * t.cos(), radius * t.sin()],
            }
        };
        let (lo, hi) = match boundary.kind {
            BoundaryKind::Circle { .. } => (-std::f64::consts::PI, std::f64::consts::PI),
            // mixture density is negligible beyond |t| = 4 for unit-scale models
            _ => (-4.0, 4.0),
        };
        let f = |t: f64| self.density(&point(t)).unwrap();
        const GRID: usize = 10_000;
        let step = (hi - lo) / (GRID - 1) as f64;
        let mut best_i = 0;
        let mut best = f64::NEG_INFINITY;
        for i in 0..GRID {
            let v = f(lo + i as f64 * step);
            if v > best {
                best = v;
                best_i = i;
            }
        }
        let a = lo + step * (best_i.saturating_sub(1)) as f64;
        let b = (lo + step * (best_i + 1) as f64).min(hi);
        let (_, refined) = golden_section_max(f, a, b, 1e-8);
        Ok(refined.max(best))
    }
}

/// The compactly supported bump density q(x,y) = (3/pi)(1 - x^2 - y^2)^2 on
/// the unit disk.
pub fn bump_density(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    if r2 <= 1.0 {
        let t = 1.0 - r2;
        3.0 / std::f64::consts::PI * t * t
    } else {
        0.0
    }
}

/// Nonseparable model: mixture of two shifted copies of the bump density.
/// Class A is centered at `class_offsets[0]`, its complement at
/// `class_offsets[1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonseparableModelSpec {
    pub class_offsets: [[f64; 2]; 2],
    /// (alpha_A, alpha_Ac)
    pub selection_probabilities: [f64; 2],
}

impl NonseparableModelSpec {
    pub fn new(class_offsets: [[f64; 2]; 2], selection_probabilities: [f64; 2]) -> Result<Self> {
        let [a, b] = selection_probabilities;
        if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
            return Err(Error::InvalidParameter(
                "selection probabilities must lie in (0,1)".into(),
            ));
        }
        if (a + b - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(
                "selection probabilities must sum to 1".into(),
            ));
        }
        Ok(Self { class_offsets, selection_probabilities })
    }

    /// Bump centers at (+0.75, 0) and (-0.75, 0) with equal selection
    /// probabilities.
    pub fn paper() -> Self {
        Self::new([[0.75, 0.0], [-0.75, 0.0]], [0.5, 0.5]).unwrap()
    }

    /// Class-conditional density of class A (index 0) or its complement (1).
    pub fn class_density(&self, class: usize, x: &[f64]) -> f64 {
        let off = self.class_offsets[class];
        bump_density(x[0] - off[0], x[1] - off[1])
    }

    /// Mixture density alpha_A p_A + alpha_Ac p_Ac.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: x.len() });
        }
        Ok(self.selection_probabilities[0] * self.class_density(0, x)
            + self.selection_probabilities[1] * self.class_density(1, x))
    }

    /// Supremum of the mixture density over the overlap region
    /// {x : p_A(x) p_Ac(x) > 0}, by a dense 2-D grid over the lens bounding
    /// box. The density is Lipschitz with a modest constant on this
    /// unit-scale domain, so a 2000x2000 grid resolves the supremum well.
    pub fn overlap_sup_density(&self) -> Result<f64> {
        let bbox = match self.lens_bbox() {
            Some(b) => b,
            None => {
                return Err(Error::InvalidParameter(
                    "overlap region is empty (supports are disjoint)".into(),
                ))
            }
        };
        const GRID: usize = 2000;
        let mut best = 0.0_f64;
        for i in 0..GRID {
            let x = bbox.0 + (bbox.1 - bbox.0) * i as f64 / (GRID - 1) as f64;
            for j in 0..GRID {
                let y = bbox.2 + (bbox.3 - bbox.2) * j as f64 / (GRID - 1) as f64;
                let p = [x, y];
                if self.class_density(0, &p) > 0.0 && self.class_density(1, &p) > 0.0 {
                    best = best.max(self.density(&p)?);
                }
            }
        }
        Ok(best)
    }

    /// Bounding box (x_lo, x_hi, y_lo, y_hi) of the lens where both class
    /// supports overlap, or None if the supports are disjoint.
    fn lens_bbox(&self) -> Option<(f64, f64, f64, f64)> {
        let [a, b] = self.class_offsets;
        let dist = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        if dist >= 2.0 {
            return None;
        }
        let x_lo = (a[0] - 1.0).max(b[0] - 1.0);
        let x_hi = (a[0] + 1.0).min(b[0] + 1.0);
        let y_lo = (a[1] - 1.0).max(b[1] - 1.0);
        let y_hi = (a[1] + 1.0).min(b[1] + 1.0);
        Some((x_lo, x_hi, y_lo, y_hi))
    }
}

/// Overlap integral of Theorem-3 type:
/// ∫ alpha_A alpha_Ac p_A(x) p_Ac(x) dx, by tensor-product Gauss-Legendre
/// quadrature over the lens bounding box. Default 256 nodes per axis.
pub fn overlap_integral(spec: &NonseparableModelSpec) -> f64 {
    overlap_integral_with_nodes(spec, 256)
}

/// Overlap integral with an explicit per-axis node count (>= 128 in normal
/// use; smaller counts are allowed for convergence studies).
pub fn overlap_integral_with_nodes(spec: &NonseparableModelSpec, nodes: usize) -> f64 {
    let bbox = match spec.lens_bbox() {
        Some(b) => b,
        None => return 0.0,
    };
    let (t, w) = gauss_legendre(nodes);
    let (xs, wx) = scale_gauss_legendre(&t, &w, bbox.0, bbox.1);
    let (ys, wy) = scale_gauss_legendre(&t, &w, bbox.2, bbox.3);
    let alpha = spec.selection_probabilities[0] * spec.selection_probabilities[1];
    let mut total = 0.0;
    for (x, wxi) in xs.iter().zip(&wx) {
        let mut row = 0.0;
        for (y, wyj) in ys.iter().zip(&wy) {
            let p = [*x, *y];
            row += wyj * spec.class_density(0, &p) * spec.class_density(1, &p);
        }
        total += wxi * row;
    }
    alpha * total
}

/// Model specification for configuration and CLI dispatch.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelSpec {
    Separable(SeparableModelSpec),
    Nonseparable(NonseparableModelSpec),
}

impl ModelSpec {
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        match self {
            ModelSpec::Separable(m) => m.density(x),
            ModelSpec::Nonseparable(m) => m.density(x),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Separable(m) => m.dim(),
            ModelSpec::Nonseparable(_) => 2,
        }
    }

    pub fn sample(&self, n: usize, seed: SeedRecord) -> Result<Dataset> {
        match self {
            ModelSpec::Separable(m) => sample_separable(m, n, seed),
            ModelSpec::Nonseparable(m) => sample_nonseparable(m, n, seed),
        }
    }

    /// Supremum of the density over the model's boundary: the separable
    /// model's own boundary, or the overlap region for the nonseparable one.
    pub fn boundary_sup_density(&self) -> Result<f64> {
        match self {
            ModelSpec::Separable(m) => m.boundary_sup_density(&m.boundary),
            ModelSpec::Nonseparable(m) => m.overlap_sup_density(),
        }
    }
}

/// Seed record kept with every dataset for exact replay. `stream` selects
/// an independent ChaCha substream of `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

impl SeedRecord {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> rng::Rng {
        rng::substream(self.seed, self.stream)
    }
}

/// A sampled dataset: n points in R^d with a ground-truth class indicator.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: Array2<f64>,
    pub indicator: Vec<u8>,
    pub model_tag: String,
    pub seed: SeedRecord,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn indicator_signal(&self) -> Array1<f64> {
        Array1::from_iter(self.indicator.iter().map(|&b| f64::from(b)))
    }

    /// CSV with header `x0,...,x{d-1},label`.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::new();
        for j in 0..d {
            out.push_str(&format!("x{j},"));
        }
        out.push_str("label\n");
        for (row, &lab) in self.points.rows().into_iter().zip(&self.indicator) {
            for v in row.iter() {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{lab}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty dataset file".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.last() != Some(&"label") || cols.len() < 2 {
            return Err(Error::Config("dataset header must be x0,...,label".into()));
        }
        let d = cols.len() - 1;
        let mut flat = Vec::new();
        let mut labels = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != d + 1 {
                return Err(Error::Config(format!(
                    "row {}: expected {} fields, got {}",
                    i + 2,
                    d + 1,
                    parts.len()
                )));
            }
            for p in &parts[..d] {
                flat.push(p.parse::<f64>().map_err(|e| {
                    Error::Config(format!("row {}: bad float {p:?}: {e}", i + 2))
                })?);
            }
            labels.push(
                parts[d]
                    .parse::<u8>()
                    .map_err(|e| Error::Config(format!("row {}: bad label: {e}", i + 2)))?,
            );
        }
        let n = labels.len();
        let points = Array2::from_shape_vec((n, d), flat)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self { points, indicator: labels, model_tag: "file".into(), seed: SeedRecord::new(0) })
    }
}

fn standard_normal(rng: &mut rng::Rng) -> f64 {
    // Box-Muller; one value per call keeps the stream layout simple.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Draw n i.i.d. points from the separable model's mixture; the indicator is
/// the boundary membership of each point.
pub fn sample_separable(spec: &SeparableModelSpec, n: usize, seed: SeedRecord) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let d = spec.dim();
    let mut rng = seed.rng();
    let mut points = Array2::zeros((n, d));
    let mut indicator = Vec::with_capacity(n);
    for i in 0..n {
        let mut u: f64 = rng.gen();
        let mut comp = &spec.components[spec.components.len() - 1];
        for c in &spec.components {
            if u < c.weight {
                comp = c;
                break;
            }
            u -= c.weight;
        }
        let sd = comp.covariance_scale.sqrt();
        for j in 0..d {
            points[[i, j]] = comp.mean[j] + sd * standard_normal(&mut rng);
        }
        indicator.push(u8::from(spec.boundary.contains(points.row(i).as_slice().unwrap())));
    }
    Ok(Dataset { points, indicator, model_tag: "separable".into(), seed })
}

/// Draw one point from the bump density q via inverse transform of the
/// radius CDF F(r) = 1 - (1 - r^2)^3.
fn sample_bump(rng: &mut rng::Rng) -> (f64, f64) {
    let u: f64 = rng.gen();
    let v: f64 = rng.gen();
    let r = (1.0 - u.cbrt()).sqrt();
    let a = 2.0 * std::f64::consts::PI * v;
    (r * a.cos(), r * a.sin())
}

/// Draw n points from the nonseparable mixture; the indicator records which
/// class the point was drawn from (1 for class A).
pub fn sample_nonseparable(
    spec: &NonseparableModelSpec,
    n: usize,
    seed: SeedRecord,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = seed.rng();
    let mut points = Array2::zeros((n, 2));
    let mut indicator = Vec::with_capacity(n);
    for i in 0..n {
        let is_a = rng.gen::<f64>() < spec.selection_probabilities[0];
        let off = spec.class_offsets[usize::from(!is_a)];
        let (x, y) = sample_bump(&mut rng);
        points[[i, 0]] = x + off[0];
        points[[i, 1]] = y + off[1];
        indicator.push(u8::from(is_a));
    }
    Ok(Dataset { points, indicator, model_tag: "nonseparable".into(), seed })
}

/// Monte Carlo sublevel-set mass estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MassEstimate {
    pub mass: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of P({x : p(x) <= t}): draw from the model and test
/// the density at each draw. Unbiased and dimension-robust, unlike spatial
/// quadrature of the sublevel region.
pub fn sublevel_mass(
    model: &ModelSpec,
    t: f64,
    mc_samples: usize,
    seed: SeedRecord,
) -> Result<MassEstimate> {
    if mc_samples == 0 {
        return Err(Error::EmptySample);
    }
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("level must be >= 0, got {t}")));
    }
    let data = model.sample(mc_samples, seed)?;
    let mut hits = 0usize;
    for row in data.points.rows() {
        if model.density(row.as_slice().unwrap())? <= t {
            hits += 1;
        }
    }
    let mass = hits as f64 / mc_samples as f64;
    let std_error = (mass * (1.0 - mass) / mc_samples as f64).sqrt();
    Ok(MassEstimate { mass, std_error })
}
