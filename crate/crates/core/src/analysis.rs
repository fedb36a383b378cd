//! Reading tomogram grids: ridge detection, strand classification,
//! normalization audits, oracle comparison and Mandel Q curves.
//!
//! Reports implement `Display` as plain `key=value` lines.

use std::fmt;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fock::{self, Mode, TruncationSpec, TwoModeFock};
use crate::quad::{linspace, trapezoid};
use crate::tomography::{
    conditional_coefficients, conditional_mandel_q, two_mode_tomogram, CatSource, QuadraturePoint, TomogramGrid,
};

/// Fraction of the column maximum a ridge must reach.
pub const DEFAULT_RIDGE_THRESHOLD: f64 = 0.05;
/// Local maxima closer than this (quadrature units) belong to one ridge.
pub const MERGE_DISTANCE: f64 = 0.5;
/// Fraction of columns with two or more ridges that makes a grid double-stranded.
pub const DOUBLE_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ridge {
    pub x_position: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnRidges {
    pub theta: f64,
    pub ridges: Vec<Ridge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeSet {
    pub per_theta: Vec<ColumnRidges>,
}

impl RidgeSet {
    pub fn counts(&self) -> Vec<usize> {
        self.per_theta.iter().map(|c| c.ridges.len()).collect()
    }
}

fn column_ridges(xs: &[f64], col: &[f64], threshold: f64) -> Vec<Ridge> {
    let col_max = col.iter().copied().fold(0.0, f64::max);
    if col_max <= 0.0 {
        return Vec::new();
    }
    let peaks = (1..col.len().saturating_sub(1)).filter(|&j| col[j] > col[j - 1] && col[j] > col[j + 1]);

    // Merge on the full set of maxima so that the threshold only ever
    // removes whole groups.
    let mut groups: Vec<(f64, Ridge)> = Vec::new();
    for j in peaks {
        let ridge = Ridge { x_position: xs[j], height: col[j] };
        match groups.last_mut() {
            Some((last_x, best)) if xs[j] - *last_x < MERGE_DISTANCE => {
                *last_x = xs[j];
                if ridge.height > best.height {
                    *best = ridge;
                }
            }
            _ => groups.push((xs[j], ridge)),
        }
    }
    groups.into_iter().map(|(_, r)| r).filter(|r| r.height >= threshold * col_max).collect()
}

/// Ridges of every θ column of `grid`.
pub fn find_ridges(grid: &TomogramGrid, ridge_threshold: f64) -> Result<RidgeSet> {
    find_ridges_with(Exec::default(), grid, ridge_threshold)
}

pub fn find_ridges_with(exec: Exec, grid: &TomogramGrid, ridge_threshold: f64) -> Result<RidgeSet> {
    if !(ridge_threshold > 0.0 && ridge_threshold < 1.0) {
        return Err(Error::InvalidParameter(format!("ridge threshold must lie in (0, 1), got {ridge_threshold}")));
    }
    if grid.max_value() <= 0.0 {
        return Err(Error::EmptyGrid);
    }
    let xs = grid.x_axis();
    let per_theta = exec.map(grid.theta_axis().len(), |i| ColumnRidges {
        theta: grid.theta_axis()[i],
        ridges: column_ridges(xs, grid.column(i), ridge_threshold),
    });
    Ok(RidgeSet { per_theta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrandLabel {
    Single,
    Double,
}

impl fmt::Display for StrandLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrandLabel::Single => "single",
            StrandLabel::Double => "double",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrandVerdict {
    pub label: StrandLabel,
    pub fraction_double: f64,
    /// Phases whose ridge count falls below the most common count.
    pub crossing_thetas: Vec<f64>,
}

/// Single or double strand, decided by the share of columns carrying at
/// least two ridges.
pub fn classify_strands(ridges: &RidgeSet) -> StrandVerdict {
    let counts = ridges.counts();
    if counts.is_empty() {
        return StrandVerdict { label: StrandLabel::Single, fraction_double: 0.0, crossing_thetas: Vec::new() };
    }
    let doubles = counts.iter().filter(|&&c| c >= 2).count();
    let fraction_double = doubles as f64 / counts.len() as f64;

    let max_count = counts.iter().copied().max().unwrap_or(0);
    let mut freq = vec![0usize; max_count + 1];
    for &c in &counts {
        freq[c] += 1;
    }
    // ties go to the larger count
    let mode = (0..=max_count).rev().max_by_key(|&c| (freq[c], c)).unwrap_or(0);
    let crossing_thetas = ridges.per_theta.iter().filter(|c| c.ridges.len() < mode).map(|c| c.theta).collect();

    let label = if fraction_double >= DOUBLE_FRACTION { StrandLabel::Double } else { StrandLabel::Single };
    StrandVerdict { label, fraction_double, crossing_thetas }
}

impl fmt::Display for StrandVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "label={}", self.label)?;
        writeln!(f, "fraction_double={:.6}", self.fraction_double)?;
        let crossings: Vec<String> = self.crossing_thetas.iter().map(|t| format!("{t:.6}")).collect();
        writeln!(f, "crossing_count={}", crossings.len())?;
        writeln!(f, "crossing_thetas={}", crossings.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationReport {
    pub max_column_error: f64,
    pub worst_theta: f64,
}

impl fmt::Display for NormalizationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max_column_error={:e}", self.max_column_error)?;
        writeln!(f, "worst_theta={:.6}", self.worst_theta)
    }
}

/// Largest `|1 − ∫ column dX|` over the grid.
pub fn audit_normalization(grid: &TomogramGrid) -> NormalizationReport {
    let step = grid.x_step();
    let mut report = NormalizationReport { max_column_error: 0.0, worst_theta: grid.theta_axis()[0] };
    for (col, &theta) in grid.columns().zip(grid.theta_axis()) {
        let err = (1.0 - trapezoid(col, step)).abs();
        if err > report.max_column_error {
            report = NormalizationReport { max_column_error: err, worst_theta: theta };
        }
    }
    report
}

/// Points at which analytic and oracle tomograms are compared: every
/// `(X₁, θ₁, X₂, θ₂)` with both `X` from `x_axis` and both `θ` from `thetas`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSweep {
    pub x_axis: Vec<f64>,
    pub thetas: Vec<f64>,
}

impl Default for OracleSweep {
    /// 21 quadrature values on `[−5, 5]` and phases `{0, 0.7, π/2, 2.3, π}`.
    fn default() -> Self {
        use std::f64::consts::{FRAC_PI_2, PI};
        Self { x_axis: linspace(-5.0, 5.0, 21), thetas: vec![0.0, 0.7, FRAC_PI_2, 2.3, PI] }
    }
}

impl OracleSweep {
    pub fn len(&self) -> usize {
        let n = self.x_axis.len() * self.thetas.len();
        n * n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub max_abs_diff: f64,
    pub p1: QuadraturePoint,
    pub p2: QuadraturePoint,
    pub points: usize,
    pub dim: usize,
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max_abs_diff={:e}", self.max_abs_diff)?;
        writeln!(f, "argmax_x1={}", self.p1.x)?;
        writeln!(f, "argmax_theta1={:.6}", self.p1.theta)?;
        writeln!(f, "argmax_x2={}", self.p2.x)?;
        writeln!(f, "argmax_theta2={:.6}", self.p2.theta)?;
        writeln!(f, "points={}", self.points)?;
        writeln!(f, "fock_dim={}", self.dim)
    }
}

/// Worst pointwise gap between `analytic` and `|⟨X₁,θ₁|⟨X₂,θ₂|state⟩|²`.
pub fn compare_state<F>(exec: Exec, state: &TwoModeFock, sweep: &OracleSweep, analytic: F) -> Result<OracleReport>
where
    F: Fn(QuadraturePoint, QuadraturePoint) -> f64 + Sync + Send,
{
    if sweep.is_empty() {
        return Err(Error::InvalidParameter("oracle sweep has no points".into()));
    }
    let points: Vec<QuadraturePoint> =
        sweep.thetas.iter().flat_map(|&t| sweep.x_axis.iter().map(move |&x| QuadraturePoint::new(x, t))).collect();
    let bra: Vec<Vec<_>> = points.iter().map(|p| fock::quadrature_amps(state.dim(), p.x, p.theta)).collect();

    let per_p2 = exec.map(points.len(), |k| {
        let p2 = points[k];
        let conditional = state.contract_mode(Mode::D, p2.x, p2.theta);
        let mut worst = (-1.0, points[0]);
        for (p1, u) in points.iter().zip(&bra) {
            let amp: num_complex::Complex64 = u.iter().zip(conditional.amps()).map(|(u, c)| u * c).sum();
            let diff = (analytic(*p1, p2) - amp.norm_sqr()).abs();
            if diff > worst.0 || diff.is_nan() {
                worst = (diff, *p1);
            }
        }
        (worst.0, worst.1, p2)
    });

    let mut report =
        OracleReport { max_abs_diff: -1.0, p1: points[0], p2: points[0], points: sweep.len(), dim: state.dim() };
    for (diff, p1, p2) in per_p2 {
        if diff > report.max_abs_diff || diff.is_nan() {
            report.max_abs_diff = diff;
            report.p1 = p1;
            report.p2 = p2;
        }
    }
    Ok(report)
}

/// `|Φ_h⟩` from the Fock-space route: cat ⊗ vacuum through the beam splitter.
pub fn oracle_state(src: &CatSource, spec: &TruncationSpec) -> Result<TwoModeFock> {
    fock::entangled_output(src.alpha(), src.parity(), spec)
}

/// Closed-form `ω_h` against the Fock-space oracle over `sweep`.
pub fn compare_with_oracle(src: &CatSource, sweep: &OracleSweep, spec: &TruncationSpec) -> Result<OracleReport> {
    compare_with_oracle_using(Exec::default(), src, sweep, spec, two_mode_tomogram)
}

/// As [`compare_with_oracle`] with a caller-supplied analytic tomogram.
pub fn compare_with_oracle_using<F>(
    exec: Exec,
    src: &CatSource,
    sweep: &OracleSweep,
    spec: &TruncationSpec,
    analytic: F,
) -> Result<OracleReport>
where
    F: Fn(&CatSource, QuadraturePoint, QuadraturePoint) -> f64 + Sync + Send,
{
    let state = oracle_state(src, spec)?;
    compare_state(exec, &state, sweep, |p1, p2| analytic(src, p1, p2))
}

#[derive(Debug)]
pub struct QCurvePoint {
    /// Relative phase `|δ − θ₂|`; the measurement phase is `θ₂ = δ + φ`.
    pub phi: f64,
    pub q: Result<f64>,
}

/// Mandel Q of the conditional mode-`c` state across relative phases.
pub fn q_curve(src: &CatSource, x2: f64, phis: &[f64]) -> Vec<QCurvePoint> {
    phis.iter()
        .map(|&phi| {
            let p2 = QuadraturePoint::new(x2, src.delta() + phi);
            let q = conditional_coefficients(src, p2).and_then(|st| conditional_mandel_q(&st));
            QCurvePoint { phi, q }
        })
        .collect()
}
