//! Closed-form optical tomograms.
//!
//! The two-mode state is `|Φ_h⟩ = N_h [|β⟩|β⟩ + (-1)^h |−β⟩|−β⟩]` with
//! `β = α/√2`; its optical tomogram is a squared sum of products of the
//! Gaussian kernels [`eta_r`]. Phases are radians and are reduced into
//! `[0, 2π)` on entry.

use std::f64::consts::{PI, SQRT_2, TAU};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fock::Parity;
use crate::quad::{trapezoid, uniform_step};

/// Column integrals or conditional norms below this are treated as a
/// degenerate conditioning outcome.
pub const CONDITIONING_FLOOR: f64 = 1e-150;

const FRAC_1_PI_QUARTER: f64 = 0.751_125_544_464_942_5;

/// Reduces a phase into `[0, 2π)`.
pub fn reduce_phase(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Homodyne outcome `X` at local-oscillator phase `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePoint {
    pub x: f64,
    pub theta: f64,
}

impl QuadraturePoint {
    pub fn new(x: f64, theta: f64) -> Self {
        Self { x, theta: reduce_phase(theta) }
    }

    /// The same measurement outcome seen at `θ + π`.
    pub fn reflected(self) -> Self {
        Self::new(-self.x, self.theta + PI)
    }
}

/// Which coherent component of the superposition: `β_r = β e^{iπr}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Cat state `N_h[|α⟩ + (-1)^h|−α⟩]` fed into one port of the beam splitter,
/// vacuum in the other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatSource {
    alpha_sq: f64,
    delta: f64,
    h: Parity,
}

impl CatSource {
    pub fn new(alpha_sq: f64, delta: f64, h: Parity) -> Result<Self> {
        if !(alpha_sq >= 0.0 && alpha_sq.is_finite()) {
            return Err(Error::InvalidParameter(format!("|α|² must be finite and ≥ 0, got {alpha_sq}")));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("δ must be finite, got {delta}")));
        }
        if h == Parity::Odd && alpha_sq == 0.0 {
            return Err(Error::InvalidParameter("odd cat state needs |α|² > 0".into()));
        }
        Ok(Self { alpha_sq, delta: reduce_phase(delta), h })
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha_sq
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn parity(&self) -> Parity {
        self.h
    }

    pub fn alpha(&self) -> C64 {
        C64::from_polar(self.alpha_sq.sqrt(), self.delta)
    }

    pub fn beta(&self) -> C64 {
        self.alpha() / SQRT_2
    }

    pub fn beta_mag(&self) -> f64 {
        (0.5 * self.alpha_sq).sqrt()
    }

    pub fn beta_r(&self, r: Branch) -> C64 {
        self.beta() * r.sign()
    }

    /// `N_h`
    pub fn normalization(&self) -> f64 {
        let bracket = match self.h {
            Parity::Even => 1.0 + (-2.0 * self.alpha_sq).exp(),
            Parity::Odd => -(-2.0 * self.alpha_sq).exp_m1(),
        };
        std::f64::consts::FRAC_1_SQRT_2 / bracket.sqrt()
    }
}

/// Coherent state `|α⟩` in one port and vacuum in the other: the output is
/// the product `|β⟩|β⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentSource {
    alpha_sq: f64,
    delta: f64,
}

impl CoherentSource {
    pub fn new(alpha_sq: f64, delta: f64) -> Result<Self> {
        if !(alpha_sq >= 0.0 && alpha_sq.is_finite()) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid coherent source |α|² = {alpha_sq}, δ = {delta}")));
        }
        Ok(Self { alpha_sq, delta: reduce_phase(delta) })
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha_sq
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn beta_mag(&self) -> f64 {
        (0.5 * self.alpha_sq).sqrt()
    }
}

/// Which input produced a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceMeta {
    Entangled(CatSource),
    Separable(CoherentSource),
}

/// A two-mode output state with a closed-form optical tomogram.
pub trait TwoModeSource: Sync {
    /// Joint density `ω(X₁,θ₁; X₂,θ₂)`.
    fn omega(&self, p1: QuadraturePoint, p2: QuadraturePoint) -> f64;

    /// Marginal tomogram of mode `c`.
    fn marginal(&self, p: QuadraturePoint) -> f64;

    fn meta(&self) -> SourceMeta;
}

impl TwoModeSource for CatSource {
    fn omega(&self, p1: QuadraturePoint, p2: QuadraturePoint) -> f64 {
        two_mode_tomogram(self, p1, p2)
    }

    fn marginal(&self, p: QuadraturePoint) -> f64 {
        marginal_tomogram(self, p)
    }

    fn meta(&self) -> SourceMeta {
        SourceMeta::Entangled(*self)
    }
}

impl TwoModeSource for CoherentSource {
    fn omega(&self, p1: QuadraturePoint, p2: QuadraturePoint) -> f64 {
        separable_tomogram(self.beta_mag(), self.delta, p1, p2)
    }

    fn marginal(&self, p: QuadraturePoint) -> f64 {
        coherent_mode_tomogram(self.beta_mag(), self.delta, p)
    }

    fn meta(&self) -> SourceMeta {
        SourceMeta::Separable(*self)
    }
}

/// `exp(−|γ|²/2 − X²/2 + √2 γ X e^{−iθ} − γ² e^{−2iθ}/2)`, i.e. `π^{1/4}⟨X_θ|γ⟩`.
fn kernel(gamma: C64, p: QuadraturePoint) -> C64 {
    let rot = gamma * C64::from_polar(1.0, -p.theta);
    (-0.5 * gamma.norm_sqr() - 0.5 * p.x * p.x + SQRT_2 * p.x * rot - 0.5 * rot * rot).exp()
}

/// Quadrature amplitude `⟨X_θ|γ⟩` of a coherent state.
pub fn coherent_amplitude(gamma: C64, p: QuadraturePoint) -> C64 {
    kernel(gamma, p) * FRAC_1_PI_QUARTER
}

/// Kernel `η_r(X, θ)` of the two-mode tomogram.
pub fn eta_r(src: &CatSource, r: Branch, p: QuadraturePoint) -> C64 {
    kernel(src.beta_r(r), p)
}

/// `ω_h = (N_h²/π) |Σ_r (-1)^{rh} η_r(p₁) η_r(p₂)|²`
pub fn two_mode_tomogram(src: &CatSource, p1: QuadraturePoint, p2: QuadraturePoint) -> f64 {
    let n = src.normalization();
    let sum = eta_r(src, Branch::Plus, p1) * eta_r(src, Branch::Plus, p2)
        + src.h.sign() * eta_r(src, Branch::Minus, p1) * eta_r(src, Branch::Minus, p2);
    n * n / PI * sum.norm_sqr()
}

/// Mode-`c` marginal of `ω_h`, integrated over the mode-`d` outcome:
/// `N_h² [|ψ_β|² + |ψ_{−β}|² + 2(-1)^h e^{−2|β|²} Re ψ_β ψ*_{−β}]`.
pub fn marginal_tomogram(src: &CatSource, p: QuadraturePoint) -> f64 {
    let n = src.normalization();
    let plus = coherent_amplitude(src.beta(), p);
    let minus = coherent_amplitude(-src.beta(), p);
    let overlap = (-2.0 * src.beta().norm_sqr()).exp();
    let cross = 2.0 * src.h.sign() * overlap * (plus * minus.conj()).re;
    (n * n * (plus.norm_sqr() + minus.norm_sqr() + cross)).max(0.0)
}

/// Single-mode coherent tomogram `(1/√π) exp[−(X − √2|β| cos(δ−θ))²]`.
pub fn coherent_mode_tomogram(beta_mag: f64, delta: f64, p: QuadraturePoint) -> f64 {
    let shift = p.x - SQRT_2 * beta_mag * (delta - p.theta).cos();
    (-shift * shift).exp() / PI.sqrt()
}

/// Tomogram of `|β⟩|β⟩`: the product of the two mode tomograms.
pub fn separable_tomogram(beta_mag: f64, delta: f64, p1: QuadraturePoint, p2: QuadraturePoint) -> f64 {
    coherent_mode_tomogram(beta_mag, delta, p1) * coherent_mode_tomogram(beta_mag, delta, p2)
}

/// Mode-`c` state `c₊|β⟩ + c₋|−β⟩` (unnormalized) after measuring `X_{θ₂}`
/// on mode `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalState {
    pub c_plus: C64,
    pub c_minus: C64,
    pub beta: C64,
    pub norm: f64,
}

impl ConditionalState {
    pub fn new(c_plus: C64, c_minus: C64, beta: C64) -> Result<Self> {
        let overlap = (-2.0 * beta.norm_sqr()).exp();
        let norm_sq = c_plus.norm_sqr() + c_minus.norm_sqr() + 2.0 * (c_plus.conj() * c_minus).re * overlap;
        let norm = norm_sq.max(0.0).sqrt();
        if !(norm >= CONDITIONING_FLOOR) {
            return Err(Error::DegenerateProjection { weight: norm_sq });
        }
        Ok(Self { c_plus, c_minus, beta, norm })
    }

    /// `(|c₊|², |c₋|²)`
    pub fn branch_weights(&self) -> (f64, f64) {
        (self.c_plus.norm_sqr(), self.c_minus.norm_sqr())
    }

    /// Normalized quadrature density `|⟨X₁,θ₁|φ_c⟩|²`.
    pub fn quadrature_density(&self, p: QuadraturePoint) -> f64 {
        let amp = self.c_plus * coherent_amplitude(self.beta, p) + self.c_minus * coherent_amplitude(-self.beta, p);
        amp.norm_sqr() / (self.norm * self.norm)
    }
}

/// Coefficients of the conditional state: `c₊ = ψ_β(X₂,θ₂)`,
/// `c₋ = (-1)^h ψ_{−β}(X₂,θ₂)`.
pub fn conditional_coefficients(src: &CatSource, p2: QuadraturePoint) -> Result<ConditionalState> {
    let beta = src.beta();
    let c_plus = coherent_amplitude(beta, p2);
    let c_minus = coherent_amplitude(-beta, p2) * src.h.sign();
    ConditionalState::new(c_plus, c_minus, beta)
}

/// Mandel Q of `c₊|β⟩ + c₋|−β⟩`.
///
/// With `S = |c₊|² + |c₋|²` and `C = 2 Re(c₊* c₋) e^{−2|β|²}`,
/// `⟨n⟩ = |β|²(S − C)/(S + C)`, `⟨a†²a²⟩ = |β|⁴`, hence
/// `Q = 4|β|² S C / (S² − C²)`.
pub fn conditional_mandel_q(state: &ConditionalState) -> Result<f64> {
    let b2 = state.beta.norm_sqr();
    let s = state.c_plus.norm_sqr() + state.c_minus.norm_sqr();
    let c = 2.0 * (state.c_plus.conj() * state.c_minus).re * (-2.0 * b2).exp();
    let mean = b2 * (s - c) / (s + c);
    if !(mean >= 1e-12) {
        return Err(Error::ZeroMeanPhotons { mean });
    }
    Ok(4.0 * b2 * s * c / ((s - c) * (s + c)))
}

/// Candidate closed forms for `|ψ_{±β}(X, θ)|²`, differing in the
/// coefficient of the `|β|² cos 2(δ−θ)` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchExponent {
    /// Coefficient 1: the modulus square of the coherent amplitude.
    Derived,
    /// Coefficient 2, as sometimes quoted for this weight.
    Printed,
}

impl BranchExponent {
    pub const ALL: [BranchExponent; 2] = [BranchExponent::Derived, BranchExponent::Printed];

    pub fn name(self) -> &'static str {
        match self {
            BranchExponent::Derived => "derived",
            BranchExponent::Printed => "printed",
        }
    }
}

/// `(1/√π) exp[−|β|² − k|β|² cos 2(δ−θ) − X² ± 2√2 X|β| cos(δ−θ)]`.
pub fn branch_probability(
    variant: BranchExponent,
    beta_mag: f64,
    delta: f64,
    branch: Branch,
    p: QuadraturePoint,
) -> f64 {
    let k = match variant {
        BranchExponent::Derived => 1.0,
        BranchExponent::Printed => 2.0,
    };
    let phi = delta - p.theta;
    let b2 = beta_mag * beta_mag;
    let exponent =
        -b2 - k * b2 * (2.0 * phi).cos() - p.x * p.x + branch.sign() * 2.0 * SQRT_2 * p.x * beta_mag * phi.cos();
    exponent.exp() / PI.sqrt()
}

/// Optical tomogram samples over `(θ, X)`, stored θ-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TomogramGrid {
    theta_axis: Vec<f64>,
    x_axis: Vec<f64>,
    values: Vec<f64>,
    meta: Option<SourceMeta>,
    conditioning: Option<QuadraturePoint>,
    column_normalized: bool,
}

impl TomogramGrid {
    pub fn new(theta_axis: Vec<f64>, x_axis: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if theta_axis.is_empty() || x_axis.len() < 2 {
            return Err(Error::InvalidParameter("grid needs ≥ 1 phase and ≥ 2 quadrature samples".into()));
        }
        if !theta_axis.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("phase axis must be strictly increasing".into()));
        }
        if uniform_step(&x_axis).is_none() {
            return Err(Error::InvalidParameter("quadrature axis must be uniform and increasing".into()));
        }
        if values.len() != theta_axis.len() * x_axis.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                theta_axis.len() * x_axis.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!("tomogram value {bad} is not a density")));
        }
        Ok(Self { theta_axis, x_axis, values, meta: None, conditioning: None, column_normalized: false })
    }

    pub fn with_meta(mut self, meta: SourceMeta, conditioning: Option<QuadraturePoint>) -> Self {
        self.meta = Some(meta);
        self.conditioning = conditioning;
        self
    }

    pub fn theta_axis(&self) -> &[f64] {
        &self.theta_axis
    }

    pub fn x_axis(&self) -> &[f64] {
        &self.x_axis
    }

    pub fn x_step(&self) -> f64 {
        (self.x_axis[self.x_axis.len() - 1] - self.x_axis[0]) / (self.x_axis.len() - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, i: usize) -> &[f64] {
        let n = self.x_axis.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.x_axis.len())
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.x_axis.len() + j]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn meta(&self) -> Option<SourceMeta> {
        self.meta
    }

    pub fn conditioning(&self) -> Option<QuadraturePoint> {
        self.conditioning
    }

    pub fn is_column_normalized(&self) -> bool {
        self.column_normalized
    }

    /// Copy with every value multiplied by `factor` (no longer normalized).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let values = self.values.iter().map(|v| v * factor).collect();
        let mut out = Self::new(self.theta_axis.clone(), self.x_axis.clone(), values)?;
        out.meta = self.meta;
        out.conditioning = self.conditioning;
        Ok(out)
    }
}

fn check_axes(theta_axis: &[f64], x_axis: &[f64]) -> Result<()> {
    if theta_axis.is_empty() {
        return Err(Error::InvalidParameter("phase axis is empty".into()));
    }
    if uniform_step(x_axis).is_none() {
        return Err(Error::InvalidParameter("quadrature axis must be uniform with ≥ 2 points".into()));
    }
    Ok(())
}

/// Samples `f(X, θ)` on the grid, one column per phase.
pub fn sample_grid<F>(exec: Exec, theta_axis: &[f64], x_axis: &[f64], f: F) -> Result<TomogramGrid>
where
    F: Fn(QuadraturePoint) -> f64 + Sync + Send,
{
    check_axes(theta_axis, x_axis)?;
    let columns = exec.map(theta_axis.len(), |i| {
        x_axis.iter().map(|&x| f(QuadraturePoint::new(x, theta_axis[i]))).collect::<Vec<f64>>()
    });
    TomogramGrid::new(theta_axis.to_vec(), x_axis.to_vec(), columns.concat())
}

/// Mode-`c` marginal tomogram of `src` over the grid.
pub fn mode_tomogram(src: &dyn TwoModeSource, theta_axis: &[f64], x_axis: &[f64]) -> Result<TomogramGrid> {
    mode_tomogram_with(Exec::default(), src, theta_axis, x_axis)
}

pub fn mode_tomogram_with(
    exec: Exec,
    src: &dyn TwoModeSource,
    theta_axis: &[f64],
    x_axis: &[f64],
) -> Result<TomogramGrid> {
    Ok(sample_grid(exec, theta_axis, x_axis, |p| src.marginal(p))?.with_meta(src.meta(), None))
}

/// `ω(X₁,θ₁; X₂,θ₂)` over `(θ₁, X₁)` with each θ₁ column divided by its
/// trapezoid integral, i.e. the mode-`c` quadrature density conditioned on
/// the mode-`d` outcome `p2`.
pub fn conditional_tomogram(
    src: &dyn TwoModeSource,
    p2: QuadraturePoint,
    theta1_axis: &[f64],
    x1_axis: &[f64],
) -> Result<TomogramGrid> {
    conditional_tomogram_with(Exec::default(), src, p2, theta1_axis, x1_axis)
}

pub fn conditional_tomogram_with(
    exec: Exec,
    src: &dyn TwoModeSource,
    p2: QuadraturePoint,
    theta1_axis: &[f64],
    x1_axis: &[f64],
) -> Result<TomogramGrid> {
    check_axes(theta1_axis, x1_axis)?;
    let step = x1_axis[1] - x1_axis[0];
    let columns = exec.map(theta1_axis.len(), |i| {
        let col: Vec<f64> = x1_axis.iter().map(|&x| src.omega(QuadraturePoint::new(x, theta1_axis[i]), p2)).collect();
        let integral = trapezoid(&col, step);
        if !(integral >= CONDITIONING_FLOOR) {
            return Err(Error::DegenerateProjection { weight: integral });
        }
        Ok(col.into_iter().map(|v| v / integral).collect::<Vec<f64>>())
    });
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
    let mut grid =
        TomogramGrid::new(theta1_axis.to_vec(), x1_axis.to_vec(), columns.concat())?.with_meta(src.meta(), Some(p2));
    grid.column_normalized = true;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{linspace, phase_axis};
    use std::f64::consts::FRAC_PI_2;

    fn qp(x: f64, theta: f64) -> QuadraturePoint {
        QuadraturePoint::new(x, theta)
    }

    fn ref_source(h: Parity) -> CatSource {
        CatSource::new(10.0, 0.2, h).unwrap()
    }

    #[test]
    fn source_validation() {
        assert!(CatSource::new(-1.0, 0.0, Parity::Even).is_err());
        assert!(CatSource::new(f64::NAN, 0.0, Parity::Even).is_err());
        assert!(CatSource::new(0.0, 0.0, Parity::Odd).is_err());
        assert!(CatSource::new(0.0, 0.0, Parity::Even).is_ok());
        let s = CatSource::new(4.0, -0.5, Parity::Even).unwrap();
        assert!((s.delta() - (TAU - 0.5)).abs() < 1e-15);
        assert!((s.beta().norm_sqr() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn phase_reduction() {
        assert_eq!(qp(0.0, -1e-18).theta, 0.0);
        assert!(qp(0.0, 7.0).theta < TAU);
        assert_eq!(reduce_phase(TAU), 0.0);
    }

    #[test]
    fn vacuum_kernel() {
        let src = CatSource::new(0.0, 0.3, Parity::Even).unwrap();
        for (x, th) in [(0.0, 0.0), (1.7, 2.0), (-3.0, 5.0)] {
            let eta = eta_r(&src, Branch::Plus, qp(x, th));
            assert!((eta - C64::new((-0.5 * x * x).exp(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn minus_branch_is_plus_branch_of_negated_beta() {
        let src = CatSource::new(3.0, 0.4, Parity::Odd).unwrap();
        let flipped = CatSource::new(3.0, 0.4 + PI, Parity::Odd).unwrap();
        for (x, th) in [(0.5, 0.1), (-2.0, 3.3)] {
            let a = eta_r(&src, Branch::Minus, qp(x, th));
            let b = eta_r(&flipped, Branch::Plus, qp(x, th));
            assert!((a - b).norm() < 1e-13 * a.norm().max(1e-300));
        }
        // β_r² = β², so flipping the branch is the same as flipping X
        for (x, th) in [(1.1, 0.6), (-0.3, 4.2)] {
            let a = eta_r(&src, Branch::Minus, qp(x, th));
            let b = eta_r(&src, Branch::Plus, qp(-x, th));
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn kernel_modulus_is_coherent_tomogram() {
        let src = ref_source(Parity::Even);
        let p = qp(1.0, 0.4);
        for (r, shift) in [(Branch::Plus, 0.0), (Branch::Minus, PI)] {
            let lhs = eta_r(&src, r, p).norm_sqr() / PI.sqrt();
            let rhs = coherent_mode_tomogram(src.beta_mag(), src.delta() + shift, p);
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn coherent_tomogram_ridge() {
        let (b, delta): (f64, f64) = (5f64.sqrt(), 0.2);
        for th in [0.0, 0.9, 2.5, 4.4] {
            let peak = SQRT_2 * b * (delta - th).cos();
            let top = coherent_mode_tomogram(b, delta, qp(peak, th));
            assert!((top - 1.0 / PI.sqrt()).abs() < 1e-15);
            assert!(coherent_mode_tomogram(b, delta, qp(peak + 0.01, th)) < top);
            assert!(coherent_mode_tomogram(b, delta, qp(peak - 0.01, th)) < top);
        }
        let at = coherent_mode_tomogram(b, delta, qp(0.0, delta + FRAC_PI_2));
        assert!((at - 1.0 / PI.sqrt()).abs() < 1e-15);
        for th in [0.0, 1.0, 3.0] {
            let v = coherent_mode_tomogram(0.0, delta, qp(0.8, th));
            assert_eq!(v, (-0.64f64).exp() / PI.sqrt());
        }
    }

    #[test]
    fn separable_is_exact_product() {
        let (b, d) = (2.2, 1.0);
        for (p1, p2) in [(qp(0.3, 0.2), qp(-1.0, 2.0)), (qp(2.5, 5.0), qp(0.0, 0.0))] {
            let prod = coherent_mode_tomogram(b, d, p1) * coherent_mode_tomogram(b, d, p2);
            assert_eq!(separable_tomogram(b, d, p1, p2).to_bits(), prod.to_bits());
        }
    }

    fn joint_integral(f: impl Fn(f64, f64) -> f64) -> f64 {
        let xs = linspace(-14.0, 14.0, 561);
        let h = xs[1] - xs[0];
        let inner: Vec<f64> =
            xs.iter().map(|&x1| trapezoid(&xs.iter().map(|&x2| f(x1, x2)).collect::<Vec<_>>(), h)).collect();
        trapezoid(&inner, h)
    }

    #[test]
    fn joint_normalization() {
        for (a2, h) in [(10.0, Parity::Even), (10.0, Parity::Odd), (0.5, Parity::Odd), (2.0, Parity::Even)] {
            let src = CatSource::new(a2, 0.2, h).unwrap();
            for (t1, t2) in [(0.0, 0.0), (0.7, 2.3), (FRAC_PI_2, PI)] {
                let total = joint_integral(|x1, x2| two_mode_tomogram(&src, qp(x1, t1), qp(x2, t2)));
                assert!((total - 1.0).abs() < 1e-6, "{a2} {h:?} ({t1},{t2}): {total}");
            }
        }
        let sep = CoherentSource::new(10.0, 0.2).unwrap();
        let total = joint_integral(|x1, x2| sep.omega(qp(x1, 0.3), qp(x2, 1.9)));
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn even_state_is_inversion_symmetric() {
        let src = ref_source(Parity::Even);
        for (x1, t1, x2, t2) in [(1.0, 0.3, 2.0, 1.2), (-0.4, 4.0, 0.7, 0.1)] {
            let a = two_mode_tomogram(&src, qp(x1, t1), qp(x2, t2));
            let b = two_mode_tomogram(&src, qp(-x1, t1), qp(-x2, t2));
            assert!((a - b).abs() <= 1e-14 * a.max(1e-300));
        }
    }

    #[test]
    fn periodicity_and_reflection() {
        for h in [Parity::Even, Parity::Odd] {
            let src = ref_source(h);
            for (x1, t1, x2, t2) in [(1.0, 0.5, 2.0, 1.25), (-0.4, 4.0, 0.7, 0.1), (2.2, 2.3, -1.3, 0.7)] {
                let base = two_mode_tomogram(&src, qp(x1, t1), qp(x2, t2));
                let shifted = two_mode_tomogram(&src, qp(x1, t1 + TAU), qp(x2, t2 + TAU));
                assert!((base - shifted).abs() <= 1e-14);
                let refl = two_mode_tomogram(&src, qp(x1, t1).reflected(), qp(x2, t2));
                assert!((base - refl).abs() <= 1e-12);
                let refl2 = two_mode_tomogram(&src, qp(x1, t1), qp(x2, t2).reflected());
                assert!((base - refl2).abs() <= 1e-12);
            }
            // dyadic phases survive the reduction bit for bit
            let p1 = qp(1.0, 0.5);
            let p2 = qp(-0.5, 1.25);
            let a = two_mode_tomogram(&src, p1, p2);
            let b = two_mode_tomogram(&src, qp(1.0, 0.5 + TAU), qp(-0.5, 1.25 + TAU));
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn marginal_matches_integrated_joint() {
        let xs = linspace(-14.0, 14.0, 1121);
        for h in [Parity::Even, Parity::Odd] {
            let src = CatSource::new(2.0, 0.7, h).unwrap();
            for (x1, t1) in [(0.3, 0.1), (-1.2, 2.0), (0.0, FRAC_PI_2)] {
                let col: Vec<f64> = xs.iter().map(|&x2| two_mode_tomogram(&src, qp(x1, t1), qp(x2, 0.9))).collect();
                let integrated = trapezoid(&col, xs[1] - xs[0]);
                assert!((integrated - marginal_tomogram(&src, qp(x1, t1))).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn conditional_weights() {
        // X₂ = 0: equal weights for every θ₂
        for th in [0.0, 0.4, 1.9, 3.0] {
            let st = conditional_coefficients(&ref_source(Parity::Even), qp(0.0, th)).unwrap();
            let (p, m) = st.branch_weights();
            assert!((p - m).abs() <= 1e-14 * p);
        }
        // |δ−θ₂| = π/2 and 3π/2 at X₂ = 2: 50:50
        for phi in [FRAC_PI_2, 3.0 * FRAC_PI_2] {
            let st = conditional_coefficients(&ref_source(Parity::Even), qp(2.0, 0.2 + phi)).unwrap();
            let (p, m) = st.branch_weights();
            assert!((p - m).abs() <= 1e-12 * p);
        }
        // |δ−θ₂| = 0.3: |β⟩ dominates; ratio from a 40-digit evaluation
        let st = conditional_coefficients(&ref_source(Parity::Even), qp(2.0, 0.5)).unwrap();
        let (p, m) = st.branch_weights();
        assert!(((p / m) / 31_344_789_938.187_485 - 1.0).abs() < 1e-9, "{}", p / m);
    }

    #[test]
    fn conditional_norm_invariant() {
        let st = conditional_coefficients(&CatSource::new(0.8, 1.0, Parity::Odd).unwrap(), qp(0.4, 2.0)).unwrap();
        let overlap = (-2.0 * st.beta.norm_sqr()).exp();
        let expected =
            (st.c_plus.norm_sqr() + st.c_minus.norm_sqr() + 2.0 * (st.c_plus.conj() * st.c_minus * overlap).re).sqrt();
        assert!((st.norm - expected).abs() < 1e-12);
    }

    #[test]
    fn conditional_degenerate() {
        let err = conditional_coefficients(&ref_source(Parity::Even), qp(60.0, 0.0));
        assert!(matches!(err, Err(Error::DegenerateProjection { .. })));
    }

    #[test]
    fn conditional_q_values() {
        let beta = C64::new(5f64.sqrt(), 0.0);
        let coherent = ConditionalState::new(C64::new(0.7, 0.1), C64::new(0.0, 0.0), beta).unwrap();
        assert_eq!(conditional_mandel_q(&coherent).unwrap(), 0.0);

        let cat = ConditionalState::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0), beta).unwrap();
        let q = conditional_mandel_q(&cat).unwrap();
        assert!((q - 9.079_985_971_212_216e-4).abs() < 1e-15, "{q:e}");

        let vac = ConditionalState::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        assert!(matches!(conditional_mandel_q(&vac), Err(Error::ZeroMeanPhotons { .. })));
    }

    #[test]
    fn conditional_q_symmetric_about_pi() {
        let src = ref_source(Parity::Even);
        for phi in [0.1, 0.3, 1.0, FRAC_PI_2, 1.8, 2.5, 3.0] {
            let q = |p: f64| {
                conditional_mandel_q(&conditional_coefficients(&src, qp(2.0, src.delta() + p)).unwrap()).unwrap()
            };
            assert!((q(phi) - q(TAU - phi)).abs() < 1e-9);
        }
    }

    #[test]
    fn conditional_grid_matches_coefficients() {
        let src = ref_source(Parity::Even);
        let p2 = qp(2.0, 0.2 + 1.6);
        let thetas = phase_axis(16);
        let xs = linspace(-8.0, 8.0, 321);
        let grid = conditional_tomogram(&src, p2, &thetas, &xs).unwrap();
        let st = conditional_coefficients(&src, p2).unwrap();
        for (i, &t) in thetas.iter().enumerate() {
            for (j, &x) in xs.iter().enumerate() {
                assert!((grid.value(i, j) - st.quadrature_density(qp(x, t))).abs() < 1e-8);
            }
            assert!((trapezoid(grid.column(i), grid.x_step()) - 1.0).abs() < 1e-12);
        }
        assert!(grid.is_column_normalized());
        assert_eq!(grid.conditioning(), Some(p2));
    }

    #[test]
    fn conditional_grid_errors() {
        let src = ref_source(Parity::Even);
        assert!(conditional_tomogram(&src, qp(2.0, 0.0), &[], &linspace(-1.0, 1.0, 5)).is_err());
        assert!(conditional_tomogram(&src, qp(2.0, 0.0), &[0.0], &[0.0, 1.0, 3.0]).is_err());
        assert!(matches!(
            conditional_tomogram(&src, qp(80.0, 0.0), &[0.0, 1.0], &linspace(-8.0, 8.0, 33)),
            Err(Error::DegenerateProjection { .. })
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(TomogramGrid::new(vec![0.0], vec![0.0, 1.0], vec![1.0, -0.1]).is_err());
        assert!(TomogramGrid::new(vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0; 4]).is_err());
        assert!(TomogramGrid::new(vec![0.0], vec![0.0, 1.0], vec![0.0; 3]).is_err());
        assert!(TomogramGrid::new(vec![0.0], vec![0.0, 1.0], vec![f64::NAN, 0.0]).is_err());
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_grid_is_bit_identical() {
        let src = ref_source(Parity::Odd);
        let p2 = qp(2.0, 0.2 + 3.0 * FRAC_PI_2);
        let (t, x) = (phase_axis(64), linspace(-8.0, 8.0, 161));
        let a = conditional_tomogram_with(Exec::Serial, &src, p2, &t, &x).unwrap();
        let b = conditional_tomogram_with(Exec::Parallel, &src, p2, &t, &x).unwrap();
        assert_eq!(a, b);
    }
}
