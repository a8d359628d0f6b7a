//! Two incoherent point sources imaged through a Gaussian PSF, represented
//! in a truncated Hermite–Gauss basis centred at the measurement
//! alignment point `x_m`.
//!
//! Lengths are in units of the PSF width: the amplitude PSF is
//! `g(x, x₀) = (2π)^{-1/4} exp(−(x − x₀)²/4)`, so `|g|²` is a unit-variance
//! Gaussian.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;
use crate::model::{DerivativeMode, ModelFamily, ParamPoint, StatisticalModel};
use crate::povm::Povm;
use crate::quadrature::integrate;
use crate::susceptibility::Measurement;

pub const CENTROID: &str = "x_c";
pub const SEPARATION: &str = "dx";
pub const INTENSITY: &str = "q";

pub const DEFAULT_N_MAX: usize = 20;
/// Truncation leakage above which evaluation is refused.
pub const MAX_LEAKAGE: f64 = 1e-8;

/// Probability below which outcomes of the optimal measurement are dropped.
pub const P_CUTOFF: f64 = 1e-100;

const QUADRATURE_TOL: f64 = 1e-12;

/// Weights of the four projective outcomes over the modes `Φ₀…Φ₃`.
pub fn optimal_weights() -> [[f64; 4]; 4] {
    let s = f64::sqrt;
    [
        [0.0, 1.0 / s(6.0), 1.0 / s(2.0), -1.0 / s(3.0)],
        [0.0, 1.0 / s(6.0), -1.0 / s(2.0), -1.0 / s(3.0)],
        [s(2.0 / 5.0), s(2.0 / 5.0), 0.0, 1.0 / s(5.0)],
        [-s(3.0 / 5.0), 2.0 / s(15.0), 0.0, s(2.0 / 15.0)],
    ]
}

/// Max-norm of `w·wᵀ − I`.
pub fn weight_orthonormality_residual(w: &[[f64; 4]; 4]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let dot: f64 = (0..4).map(|k| w[i][k] * w[j][k]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// Measurement alignment that is optimal for the given source parameters.
pub fn x_opt(x_c: f64, dx: f64, q: f64) -> f64 {
    x_c + (q - 0.5) * dx
}

pub fn psf(x: f64, x0: f64) -> f64 {
    (2.0 * std::f64::consts::PI).powf(-0.25) * (-(x - x0) * (x - x0) / 4.0).exp()
}

/// `H_n(u) / √(2ⁿ n!)` by the three-term recurrence.
pub fn scaled_hermite(n: usize, u: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = std::f64::consts::SQRT_2 * u;
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * u * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Un-normalized HG profile `g(x, x_m) H_n((x − x_m)/√2) / √(2ⁿ n!)`.
fn hg_profile(n: usize, x: f64, x_m: f64) -> f64 {
    psf(x, x_m) * scaled_hermite(n, (x - x_m) / std::f64::consts::SQRT_2)
}

/// Integration window covering mode `n` around `x_m` and a PSF at `x0`.
fn window(n: usize, x_m: f64, x0: f64) -> (f64, f64) {
    let half = f64::max(12.0, std::f64::consts::SQRT_2 * (((2 * n + 1) as f64).sqrt() + 8.0));
    (x_m.min(x0) - half, x_m.max(x0) + half)
}

/// Quadrature norm of the `n`-th mode profile.
pub fn hg_norm(n: usize, x_m: f64) -> Result<f64> {
    let (a, b) = window(n, x_m, x_m);
    Ok(integrate(|x| hg_profile(n, x, x_m).powi(2), a, b, QUADRATURE_TOL)?.sqrt())
}

/// `⟨Φ_n|Φ_m⟩` of the normalized modes, by quadrature.
pub fn hg_inner(n: usize, m: usize, x_m: f64) -> Result<f64> {
    let (a, b) = window(n.max(m), x_m, x_m);
    let raw = integrate(|x| hg_profile(n, x, x_m) * hg_profile(m, x, x_m), a, b, QUADRATURE_TOL)?;
    Ok(raw / (hg_norm(n, x_m)? * hg_norm(m, x_m)?))
}

/// `⟨Φ_n|ψ(x₀)⟩` for the normalized mode `Φ_n` centred at `x_m`, by
/// adaptive quadrature.
pub fn hg_overlap(n: usize, x0: f64, x_m: f64) -> Result<f64> {
    let norm = hg_norm(n, x_m)?;
    let (a, b) = window(n, x_m, x0);
    let raw = integrate(|x| hg_profile(n, x, x_m) * psf(x, x0), a, b, QUADRATURE_TOL)?;
    Ok(raw / norm)
}

/// Closed form of [`hg_overlap`]: `e^{−d²/8} (d/2)ⁿ / √n!` with `d = x₀ − x_m`.
pub fn hg_overlap_closed_form(n: usize, displacement: f64) -> f64 {
    displaced_coefficients(displacement, n)[n]
}

fn displaced_coefficients(d: f64, n_max: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(n_max + 1);
    c.push((-d * d / 8.0).exp());
    for n in 1..=n_max {
        let prev = c[n - 1];
        c.push(prev * (d / 2.0) / (n as f64).sqrt());
    }
    c
}

/// `d c_n / d d = ½√n c_{n−1} − (d/4) c_n`.
fn displaced_coefficient_derivatives(d: f64, c: &[f64]) -> Vec<f64> {
    (0..c.len())
        .map(|n| {
            let lower = if n > 0 { 0.5 * (n as f64).sqrt() * c[n - 1] } else { 0.0 };
            lower - d / 4.0 * c[n]
        })
        .collect()
}

fn leakage(c: &[f64]) -> f64 {
    (1.0 - c.iter().map(|x| x * x).sum::<f64>()).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSourceConfig {
    /// Highest HG mode kept; the basis has `n_max + 1` states.
    pub n_max: usize,
    /// Centre of the HG basis (and of the measurement).
    pub x_m: f64,
}

impl PointSourceConfig {
    pub fn new(n_max: usize, x_m: f64) -> Self {
        Self { n_max, x_m }
    }

    /// Aligns the measurement at `x_opt` for the point `(x_c, dx, q)`.
    pub fn aligned(n_max: usize, theta: &ParamPoint) -> Result<Self> {
        let get = |name: &str| theta.get(name).ok_or_else(|| Error::InvalidArgument(format!("missing parameter {name}")));
        Ok(Self::new(n_max, x_opt(get(CENTROID)?, get(SEPARATION)?, get(INTENSITY)?)))
    }
}

/// `ρ = q|ψ₊⟩⟨ψ₊| + (1−q)|ψ₋⟩⟨ψ₋|` with `ψ±` the PSF displaced to `x_c ± dx/2`.
#[derive(Debug, Clone)]
pub struct PointSources {
    config: PointSourceConfig,
}

struct Amplitudes {
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl PointSources {
    fn amplitudes(&self, theta: &[f64]) -> Result<Amplitudes> {
        let (x_c, dx) = (theta[0], theta[1]);
        let n = self.config.n_max;
        let plus = displaced_coefficients(x_c + dx / 2.0 - self.config.x_m, n);
        let minus = displaced_coefficients(x_c - dx / 2.0 - self.config.x_m, n);
        let worst = leakage(&plus).max(leakage(&minus));
        if worst >= MAX_LEAKAGE {
            return Err(Error::Truncation { leakage: worst, n_max: n });
        }
        Ok(Amplitudes { plus, minus })
    }
}

fn outer(a: &[f64]) -> HermitianOperator {
    HermitianOperator::real_symmetric_outer(a, a).scaled(0.5)
}

impl ModelFamily for PointSources {
    fn dim(&self) -> usize {
        self.config.n_max + 1
    }

    fn param_names(&self) -> Vec<String> {
        vec![CENTROID.into(), SEPARATION.into(), INTENSITY.into()]
    }

    fn check_domain(&self, theta: &[f64]) -> Result<()> {
        if !theta.iter().all(|x| x.is_finite()) {
            return Err(Error::Domain(format!("non-finite parameters {theta:?}")));
        }
        if theta[1] < 0.0 {
            return Err(Error::Domain(format!("separation must be non-negative, got {}", theta[1])));
        }
        if !(theta[2] > 0.0 && theta[2] < 1.0) {
            return Err(Error::Domain(format!("relative intensity must lie in (0, 1), got {}", theta[2])));
        }
        Ok(())
    }

    fn state(&self, theta: &[f64]) -> Result<HermitianOperator> {
        let amp = self.amplitudes(theta)?;
        let q = theta[2];
        Ok(&outer(&amp.plus).scaled(q) + &outer(&amp.minus).scaled(1.0 - q))
    }

    fn analytic_derivatives(&self, theta: &[f64]) -> Option<Result<Vec<HermitianOperator>>> {
        let run = || -> Result<Vec<HermitianOperator>> {
            let amp = self.amplitudes(theta)?;
            let (x_c, dx, q) = (theta[0], theta[1], theta[2]);
            let x_m = self.config.x_m;
            let dplus = displaced_coefficient_derivatives(x_c + dx / 2.0 - x_m, &amp.plus);
            let dminus = displaced_coefficient_derivatives(x_c - dx / 2.0 - x_m, &amp.minus);
            // ∂_d |ψ⟩⟨ψ| for either source
            let sp = HermitianOperator::real_symmetric_outer(&dplus, &amp.plus);
            let sm = HermitianOperator::real_symmetric_outer(&dminus, &amp.minus);
            let d_centroid = &sp.scaled(q) + &sm.scaled(1.0 - q);
            let d_separation = &sp.scaled(0.5 * q) - &sm.scaled(0.5 * (1.0 - q));
            let d_intensity = &outer(&amp.plus) - &outer(&amp.minus);
            Ok(vec![d_centroid, d_separation, d_intensity])
        };
        Some(run())
    }
}

/// Builds the model after checking that the truncated HG modes are
/// normalized to quadrature accuracy.
pub fn point_source_model(config: PointSourceConfig) -> Result<StatisticalModel> {
    if !config.x_m.is_finite() {
        return Err(Error::InvalidArgument("x_m must be finite".into()));
    }
    for n in 0..=config.n_max {
        let norm = hg_norm(n, config.x_m)?;
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("HG mode {n} has quadrature norm {norm}; the basis is not orthonormal")));
        }
    }
    Ok(StatisticalModel::new(PointSources { config }, DerivativeMode::Analytic))
}

/// Five-outcome measurement: four rank-one projectors over `Φ₀…Φ₃` built
/// from `weights`, plus the complement on the truncated space.
pub fn optimal_povm_from_weights(n_max: usize, weights: &[[f64; 4]; 4]) -> Result<Povm> {
    if n_max < 3 {
        return Err(Error::InvalidArgument(format!("n_max must be at least 3, got {n_max}")));
    }
    let dim = n_max + 1;
    let mut elements = Vec::with_capacity(5);
    let mut remainder = HermitianOperator::identity(dim);
    for row in weights {
        let mut v = vec![0.0; dim];
        v[..4].copy_from_slice(row);
        let e = outer(&v);
        remainder = &remainder - &e;
        elements.push(e);
    }
    let min = remainder.min_eigenvalue();
    if min < -1e-9 {
        return Err(Error::InvalidPovm(format!("complement element has eigenvalue {min:.3e}; the weight rows are not orthonormal")));
    }
    if weight_orthonormality_residual(weights) <= 1e-12 {
        // The rows span Φ₀…Φ₃ exactly, so the complement is the projector
        // onto the higher modes. Building it directly keeps the round-off
        // of the subtraction out of its (tiny) probability.
        remainder = HermitianOperator::from_real(&DMatrix::from_fn(dim, dim, |i, j| if i == j && i >= 4 { 1.0 } else { 0.0 }))?;
    }
    elements.push(remainder);
    let labels = ["v0", "v1", "v2", "v3", "rest"].iter().map(|s| s.to_string()).collect();
    Povm::new(elements, labels)
}

pub fn optimal_povm_point_sources(config: PointSourceConfig) -> Result<Povm> {
    optimal_povm_from_weights(config.n_max, &optimal_weights())
}

/// The optimal measurement at `theta`, aligned at `x_opt`, with a basis of
/// `n_max + 1` HG modes.
///
/// The complement outcome has probability of order `dx⁸` but a score of
/// order `1/dx`, so dropping it changes the susceptibility by orders of
/// magnitude. Its probability is exact to full relative precision, which
/// allows the much smaller [`P_CUTOFF`].
pub fn point_source_measurement(n_max: usize, theta: &ParamPoint) -> Result<(StatisticalModel, Measurement)> {
    let config = PointSourceConfig::aligned(n_max, theta)?;
    let model = point_source_model(config)?;
    let meas = Measurement::at_with_cutoff(&model, theta, &optimal_povm_point_sources(config)?, P_CUTOFF)?;
    Ok((model, meas))
}
