//! Truncated Fock-space numerics.
//!
//! Everything here works on explicit photon-number amplitudes and knows
//! nothing about the closed-form tomograms in [`crate::tomography`]; it is the
//! ground truth those formulas are checked against.
//!
//! Quadrature convention: `X_θ = q cos θ + p sin θ` with vacuum variance 1/2,
//! and `⟨X_θ|n⟩ = e^{-inθ} ψ_n(X)` where `ψ_n` are the normalized Hermite
//! functions. With this phase choice `⟨X_θ|β⟩ = ⟨X|β e^{-iθ}⟩`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const FRAC_1_PI_QUARTER: f64 = 0.751_125_544_464_942_5; // π^{-1/4}

/// Weight below which a quadrature projection is considered undefined.
pub const PROJECTION_FLOOR: f64 = 1e-300;

/// Largest |amplitude|² accepted by the coherent-state builders. Beyond this
/// `e^{-|β|²/2}` underflows and the truncation check becomes meaningless.
const MAX_MEAN_PHOTONS: f64 = 700.0;

/// Photon-number parity of a cat state: `|α⟩ + (-1)^h |−α⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_index(h: u8) -> Result<Self> {
        match h {
            0 => Ok(Parity::Even),
            1 => Ok(Parity::Odd),
            _ => Err(Error::InvalidParameter(format!("parity must be 0 or 1, got {h}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    /// `(-1)^h`
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    fn admits(self, n: usize) -> bool {
        n % 2 == self.index() as usize
    }
}

/// Fock cutoff and the largest truncated probability mass tolerated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec {
    dim: usize,
    tail_tol: f64,
}

impl TruncationSpec {
    pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

    pub fn new(dim: usize, tail_tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("Fock dimension must be at least 1".into()));
        }
        if !(tail_tol > 0.0 && tail_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tail tolerance must be positive, got {tail_tol}")));
        }
        Ok(Self { dim, tail_tol })
    }

    /// Cutoff sized for a cat or coherent input of mean photon number
    /// `alpha_sq`: `ceil(2|α|² + 10|α| + 20)` with tail tolerance 1e-10.
    pub fn for_alpha_sq(alpha_sq: f64) -> Self {
        let a = alpha_sq.max(0.0);
        let dim = (2.0 * a + 10.0 * a.sqrt() + 20.0).ceil() as usize;
        Self { dim, tail_tol: Self::DEFAULT_TAIL_TOL }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    fn check_tail(&self, tail: f64) -> Result<()> {
        if tail < self.tail_tol {
            Ok(())
        } else {
            Err(Error::TruncationTooSmall { dim: self.dim, tail, tail_tol: self.tail_tol })
        }
    }
}

/// Single-mode state in the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<C64>,
}

impl FockVector {
    /// Wraps raw amplitudes without any normalization check.
    pub fn from_amps(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    /// Number state `|n⟩` in a space of dimension `dim`.
    pub fn number_state(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidParameter(format!("|{n}⟩ does not fit in dimension {dim}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[n] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `⟨self|other⟩` over the common support.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)`
    pub fn fidelity(&self, other: &FockVector) -> f64 {
        self.inner(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr())
    }

    /// `⟨X_θ|ψ⟩`
    pub fn quadrature_amplitude(&self, x: f64, theta: f64) -> C64 {
        quadrature_amps(self.dim(), x, theta).iter().zip(&self.amps).map(|(u, c)| u * c).sum()
    }

    /// `|⟨X_θ|ψ⟩|²`
    pub fn quadrature_density(&self, x: f64, theta: f64) -> f64 {
        self.quadrature_amplitude(x, theta).norm_sqr()
    }
}

/// Successive magnitudes-squared `e^{-m} mⁿ/n!` past `start` until they stop
/// contributing; `first` is the term at `start`.
fn poisson_tail(mean: f64, start: usize, first: f64, keep: impl Fn(usize) -> bool) -> f64 {
    let mut term = first;
    let mut tail = 0.0;
    let mut n = start;
    loop {
        if keep(n) {
            tail += term;
        }
        n += 1;
        term *= mean / n as f64;
        if (n as f64 > mean && term <= tail * 1e-18) || term < 1e-320 {
            break;
        }
    }
    tail
}

/// Raw coherent amplitudes `e^{-|β|²/2} βⁿ/√n!` and the Poisson mass
/// beyond the cutoff.
fn coherent_amps(beta: C64, dim: usize) -> Result<(Vec<C64>, f64)> {
    let mean = beta.norm_sqr();
    if !mean.is_finite() || mean > MAX_MEAN_PHOTONS {
        return Err(Error::InvalidParameter(format!("coherent amplitude |β|² = {mean} outside the supported range")));
    }
    let mut amps = Vec::with_capacity(dim);
    let mut c = C64::new((-0.5 * mean).exp(), 0.0);
    for n in 0..dim {
        if n > 0 {
            c = c * beta / (n as f64).sqrt();
        }
        amps.push(c);
    }
    let next = c * beta / (dim as f64).sqrt();
    let tail = poisson_tail(mean, dim, next.norm_sqr(), |_| true);
    Ok((amps, tail))
}

/// Truncated coherent state `|β⟩`.
pub fn make_coherent(beta: C64, spec: &TruncationSpec) -> Result<FockVector> {
    let (amps, tail) = coherent_amps(beta, spec.dim)?;
    spec.check_tail(tail)?;
    Ok(FockVector { amps })
}

/// Cat normalization `N_h = 2^{-1/2} [1 + (-1)^h e^{-2|α|²}]^{-1/2}`.
pub fn cat_normalization(alpha_sq: f64, h: Parity) -> f64 {
    let bracket = match h {
        Parity::Even => 1.0 + (-2.0 * alpha_sq).exp(),
        Parity::Odd => -(-2.0 * alpha_sq).exp_m1(),
    };
    std::f64::consts::FRAC_1_SQRT_2 / bracket.sqrt()
}

/// Truncated cat state `N_h [|α⟩ + (-1)^h |−α⟩]`. Amplitudes of the wrong
/// parity are exact zeros.
pub fn make_cat(alpha: C64, h: Parity, spec: &TruncationSpec) -> Result<FockVector> {
    let alpha_sq = alpha.norm_sqr();
    if h == Parity::Odd && alpha_sq == 0.0 {
        return Err(Error::InvalidParameter("odd cat state needs α ≠ 0".into()));
    }
    let (coh, _) = coherent_amps(alpha, spec.dim)?;
    let scale = 2.0 * cat_normalization(alpha_sq, h);
    let amps: Vec<C64> =
        coh.iter().enumerate().map(|(n, c)| if h.admits(n) { c * scale } else { C64::new(0.0, 0.0) }).collect();

    let dim = spec.dim;
    let first = (coh[dim - 1] * alpha / (dim as f64).sqrt()).norm_sqr();
    let tail = scale * scale * poisson_tail(alpha_sq, dim, first, |n| h.admits(n));
    spec.check_tail(tail)?;
    Ok(FockVector { amps })
}

/// Two-mode amplitudes `c_{mn}` over `|m⟩_c |n⟩_d`, row-major in `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeFock {
    dim: usize,
    amps: Vec<C64>,
}

/// Which output port a quadrature measurement acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    C,
    D,
}

impl TwoModeFock {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, amps: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let amps = (0..dim * dim).map(|i| f(i / dim, i % dim)).collect();
        Self { dim, amps }
    }

    /// `|a⟩ ⊗ |b⟩`, zero-padded to the larger dimension.
    pub fn product(a: &FockVector, b: &FockVector) -> Self {
        let dim = a.dim().max(b.dim());
        let zero = C64::new(0.0, 0.0);
        Self::from_fn(dim, |m, n| a.amps.get(m).copied().unwrap_or(zero) * b.amps.get(n).copied().unwrap_or(zero))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.amps[m * self.dim + n]
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Probability mass in the block of total photon number `total`.
    pub fn block_mass(&self, total: usize) -> f64 {
        (0..=total).filter(|&m| m < self.dim && total - m < self.dim).map(|m| self.get(m, total - m).norm_sqr()).sum()
    }

    /// Largest `m + n` carrying a nonzero amplitude.
    fn max_total(&self) -> Option<usize> {
        self.amps.iter().enumerate().filter(|(_, c)| c.norm_sqr() > 0.0).map(|(i, _)| i / self.dim + i % self.dim).max()
    }

    /// Contracts `mode` with `⟨X_θ|` and returns the unnormalized state of the
    /// other mode.
    pub fn contract_mode(&self, mode: Mode, x: f64, theta: f64) -> FockVector {
        let u = quadrature_amps(self.dim, x, theta);
        let d = self.dim;
        let amps = match mode {
            Mode::D => (0..d).map(|m| self.amps[m * d..(m + 1) * d].iter().zip(&u).map(|(c, u)| c * u).sum()).collect(),
            Mode::C => (0..d).map(|n| (0..d).map(|m| self.amps[m * d + n] * u[m]).sum()).collect(),
        };
        FockVector { amps }
    }

    /// `⟨X₁,θ₁|_c ⟨X₂,θ₂|_d |ψ⟩`
    pub fn contract_quadratures(&self, p1: (f64, f64), p2: (f64, f64)) -> C64 {
        self.contract_mode(Mode::D, p2.0, p2.1).quadrature_amplitude(p1.0, p1.1)
    }
}

/// Real orthogonal matrices of the 50/50 beam splitter on each
/// total-photon-number block.
///
/// Block `N` maps `|j, N−j⟩ ↦ Σ_k R[k][j] |k, N−k⟩` under the mode
/// transformation `a† → (a† + b†)/√2`, `b† → (b† − a†)/√2`, which sends
/// `|α⟩|0⟩` to `|α/√2⟩|α/√2⟩`.
#[derive(Debug, Clone)]
pub struct BeamSplitterBlocks {
    blocks: Vec<Vec<f64>>,
}

impl BeamSplitterBlocks {
    /// Builds blocks `0..=max_total`.
    ///
    /// Block `N` follows from block `N−1` through
    /// `|j, N−j⟩ = (√j a†|j−1, N−j⟩ + √(N−j) b†|j, N−j−1⟩) / N` with the
    /// transformed creation operators applied to the previous block's columns
    /// (Risbo's recursion in boson form). Every step is a contraction, so
    /// rounding errors do not amplify with `N`.
    pub fn new(max_total: usize) -> Self {
        let mut blocks: Vec<Vec<f64>> = Vec::with_capacity(max_total + 1);
        blocks.push(vec![1.0]);
        let sqrt: Vec<f64> = (0..=max_total + 1).map(|i| (i as f64).sqrt()).collect();
        for total in 1..=max_total {
            let prev = &blocks[total - 1];
            let (pw, w) = (total, total + 1);
            let scale = std::f64::consts::FRAC_1_SQRT_2 / total as f64;
            let mut cur = vec![0.0; w * w];
            for k in 0..pw {
                let (up, stay) = (sqrt[k + 1], sqrt[total - k]);
                for i in 0..pw {
                    let t = prev[k * pw + i] * scale;
                    if t == 0.0 {
                        continue;
                    }
                    let (from_a, from_b) = (sqrt[i + 1], sqrt[total - i]);
                    cur[(k + 1) * w + i + 1] += from_a * up * t;
                    cur[k * w + i + 1] += from_a * stay * t;
                    cur[k * w + i] += from_b * stay * t;
                    cur[(k + 1) * w + i] -= from_b * up * t;
                }
            }
            blocks.push(cur);
        }
        Self { blocks }
    }

    pub fn max_total(&self) -> usize {
        self.blocks.len() - 1
    }

    /// `⟨k, N−k| U |j, N−j⟩`
    pub fn element(&self, total: usize, k: usize, j: usize) -> f64 {
        self.blocks[total][k * (total + 1) + j]
    }
}

/// Applies the 50/50 beam splitter block by block.
///
/// The output dimension is large enough to hold every populated block
/// completely, so no amplitude is lost to truncation.
pub fn apply_beam_splitter(input: &TwoModeFock) -> TwoModeFock {
    let Some(max_total) = input.max_total() else {
        return input.clone();
    };
    let out_dim = input.dim.max(max_total + 1);
    let blocks = BeamSplitterBlocks::new(max_total);
    let mut out = TwoModeFock::zeros(out_dim);
    let zero = C64::new(0.0, 0.0);
    for total in 0..=max_total {
        let v: Vec<C64> = (0..=total)
            .map(|j| if j < input.dim && total - j < input.dim { input.get(j, total - j) } else { zero })
            .collect();
        if v.iter().all(|c| c.norm_sqr() == 0.0) {
            continue;
        }
        for k in 0..=total {
            let acc: C64 = v.iter().enumerate().map(|(j, c)| c * blocks.element(total, k, j)).sum();
            out.amps[k * out_dim + (total - k)] = acc;
        }
    }
    out
}

/// Normalized Hermite functions `ψ_0(x) … ψ_{count−1}(x)` by the forward
/// recurrence `ψ_{n+1} = x√(2/(n+1)) ψ_n − √(n/(n+1)) ψ_{n−1}`.
pub fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(FRAC_1_PI_QUARTER * (-0.5 * x * x).exp());
    if count > 1 {
        out.push(std::f64::consts::SQRT_2 * x * out[0]);
    }
    for n in 1..count.saturating_sub(1) {
        let nf = n as f64;
        let next = x * (2.0 / (nf + 1.0)).sqrt() * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// `⟨X_θ|n⟩` for `n = 0 … count−1`.
pub fn quadrature_amps(count: usize, x: f64, theta: f64) -> Vec<C64> {
    hermite_functions(count, x).into_iter().enumerate().map(|(n, h)| C64::from_polar(h, -(n as f64) * theta)).collect()
}

/// `⟨X_θ|n⟩` for a single `n`.
pub fn quadrature_amp(n: usize, x: f64, theta: f64) -> C64 {
    let h = hermite_functions(n + 1, x)[n];
    C64::from_polar(h, -(n as f64) * theta)
}

/// Conditional state left after a quadrature measurement.
#[derive(Debug, Clone)]
pub struct Projection {
    /// Unnormalized state of the unmeasured mode.
    pub vector: FockVector,
    /// Its squared norm: the marginal density of the measured outcome.
    pub weight: f64,
}

/// Projects `mode` of `state` onto `⟨X_θ|`.
pub fn project_quadrature(state: &TwoModeFock, mode: Mode, x: f64, theta: f64) -> Result<Projection> {
    let vector = state.contract_mode(mode, x, theta);
    let weight = vector.norm_sqr();
    if !(weight >= PROJECTION_FLOOR) {
        return Err(Error::DegenerateProjection { weight });
    }
    Ok(Projection { vector, weight })
}

/// Mandel `Q = (⟨n²⟩ − ⟨n⟩²)/⟨n⟩ − 1`, renormalizing the input.
pub fn mandel_q(state: &FockVector) -> Result<f64> {
    let norm = state.norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::ZeroMeanPhotons { mean: 0.0 });
    }
    let probs: Vec<f64> = state.amps.iter().map(|c| c.norm_sqr() / norm).collect();
    let mean: f64 = probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    if mean < 1e-12 {
        return Err(Error::ZeroMeanPhotons { mean });
    }
    let var: f64 = probs
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let d = n as f64 - mean;
            d * d * p
        })
        .sum();
    Ok(var / mean - 1.0)
}

/// Reduced density matrix of mode `c`.
#[derive(Debug, Clone)]
pub struct ReducedDensity {
    rho: DMatrix<C64>,
}

impl ReducedDensity {
    /// `ρ_c = A A† / tr(A A†)` with `A_{mn} = c_{mn}`.
    pub fn of_mode_c(state: &TwoModeFock) -> Result<Self> {
        let d = state.dim;
        let norm = state.norm_sqr();
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter("zero two-mode state".into()));
        }
        let a = DMatrix::from_fn(d, d, |m, n| state.get(m, n));
        let rho = (&a * a.adjoint()).unscale(norm);
        let out = Self { rho };
        out.check()?;
        Ok(out)
    }

    fn check(&self) -> Result<()> {
        let herm = (&self.rho - self.rho.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        let trace = self.rho.trace();
        if herm > 1e-12 || (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "reduced density not a state: hermiticity defect {herm:.2e}, trace {trace}"
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.rho.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Von Neumann entropy of mode `c` in bits.
pub fn entanglement_entropy(state: &TwoModeFock) -> Result<f64> {
    let rho = ReducedDensity::of_mode_c(state)?;
    let s = rho.eigenvalues().into_iter().filter(|&l| l > 1e-14).map(|l| -l * l.log2()).sum::<f64>();
    Ok(s.max(0.0))
}

/// `|Φ_h⟩` built from first principles: a cat in port `a`, vacuum in `b`,
/// through the beam splitter.
pub fn entangled_output(alpha: C64, h: Parity, spec: &TruncationSpec) -> Result<TwoModeFock> {
    let cat = make_cat(alpha, h, spec)?;
    let vacuum = FockVector::number_state(0, spec.dim)?;
    Ok(apply_beam_splitter(&TwoModeFock::product(&cat, &vacuum)))
}

/// `|β⟩|β⟩` built as `|α⟩|0⟩` through the beam splitter.
pub fn separable_output(alpha: C64, spec: &TruncationSpec) -> Result<TwoModeFock> {
    let coh = make_coherent(alpha, spec)?;
    let vacuum = FockVector::number_state(0, spec.dim)?;
    Ok(apply_beam_splitter(&TwoModeFock::product(&coh, &vacuum)))
}
