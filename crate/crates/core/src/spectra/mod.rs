//! Periodic space-time lattices, unitary DFTs and anisotropic Hörmander norms.
//!
//! A lattice discretizes `ℝᵏ × ℝ` by the torus `[0, L_x)ᵏ × [−L_t/2, L_t/2)`.
//! Samples are stored row-major with the time index varying fastest, so a
//! flat index decomposes as `((i₁·n_x + i₂)·n_x + …)·n_t + j`.
//!
//! The discrete norm at index `(s, γ, φ)` is
//!
//! ```text
//! ‖g‖² = cell_volume · Σ_{(ξ,η)} r_γ(ξ,η)^{2s} φ(r_γ(ξ,η))² |ĝ(ξ,η)|²
//! r_γ(ξ,η) = (1 + |ξ|² + |η|^{2γ})^{1/2}
//! ```
//!
//! with `ĝ` the unitary DFT and `cell_volume = (2π/L_x)ᵏ (2π/L_t)`.

pub mod io;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::class_m::PhiFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub k: usize,
    pub n_x: usize,
    pub n_t: usize,
    pub l_x: f64,
    pub l_t: f64,
}

impl Lattice {
    pub fn new(k: usize, n_x: usize, n_t: usize, l_x: f64, l_t: f64) -> Result<Self> {
        let lat = Lattice { k, n_x, n_t, l_x, l_t };
        lat.validate()?;
        Ok(lat)
    }

    /// `k` spatial axes of period 2π and a time window of length `l_t`.
    pub fn standard(k: usize, n_x: usize, n_t: usize, l_t: f64) -> Result<Self> {
        Self::new(k, n_x, n_t, 2.0 * PI, l_t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Argument("spatial dimension k must be >= 1".into()));
        }
        if !self.n_x.is_power_of_two() || !self.n_t.is_power_of_two() || self.n_x < 2 || self.n_t < 2 {
            return Err(Error::Argument(format!(
                "points per axis must be powers of two >= 2, got n_x={} n_t={}",
                self.n_x, self.n_t
            )));
        }
        if !(self.l_x > 0.0 && self.l_t > 0.0 && self.l_x.is_finite() && self.l_t.is_finite()) {
            return Err(Error::Argument("periods must be positive and finite".into()));
        }
        if self.n_x.checked_pow(self.k as u32).and_then(|s| s.checked_mul(self.n_t)).is_none() {
            return Err(Error::Argument("lattice too large".into()));
        }
        Ok(())
    }

    /// Doubles the resolution on every axis keeping the periods.
    pub fn refined(&self) -> Self {
        Lattice {
            n_x: self.n_x * 2,
            n_t: self.n_t * 2,
            ..*self
        }
    }

    pub fn spatial_len(&self) -> usize {
        self.n_x.pow(self.k as u32)
    }

    pub fn len(&self) -> usize {
        self.spatial_len() * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> Vec<usize> {
        let mut s = vec![self.n_x; self.k];
        s.push(self.n_t);
        s
    }

    pub fn cell_volume(&self) -> f64 {
        (2.0 * PI / self.l_x).powi(self.k as i32) * (2.0 * PI / self.l_t)
    }

    pub fn dx(&self) -> f64 {
        self.l_x / self.n_x as f64
    }

    pub fn dt(&self) -> f64 {
        self.l_t / self.n_t as f64
    }

    /// Index of the slice `t = 0`.
    pub fn zero_time_index(&self) -> usize {
        self.n_t / 2
    }

    pub fn time(&self, j: usize) -> f64 {
        -0.5 * self.l_t + j as f64 * self.dt()
    }

    pub fn split(&self, flat: usize) -> (usize, usize) {
        (flat / self.n_t, flat % self.n_t)
    }

    /// Spatial multi-index of a spatial flat index.
    pub fn spatial_multi_index(&self, spatial: usize, out: &mut [usize]) {
        let mut rest = spatial;
        for a in (0..self.k).rev() {
            out[a] = rest % self.n_x;
            rest /= self.n_x;
        }
    }

    /// Signed integer mode of a DFT bin: `0, 1, …, n/2−1, −n/2, …, −1`.
    pub fn signed_mode(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    pub fn xi_component(&self, i: usize) -> f64 {
        2.0 * PI * Self::signed_mode(i, self.n_x) as f64 / self.l_x
    }

    pub fn eta(&self, j: usize) -> f64 {
        2.0 * PI * Self::signed_mode(j, self.n_t) as f64 / self.l_t
    }

    /// Spatial frequency vector of a spatial flat index.
    pub fn spatial_frequency(&self, spatial: usize, xi: &mut [f64]) {
        let mut rest = spatial;
        for a in (0..self.k).rev() {
            xi[a] = self.xi_component(rest % self.n_x);
            rest /= self.n_x;
        }
    }

    /// Fills `xi` and returns `η` for the frequency at a flat index.
    pub fn frequency(&self, flat: usize, xi: &mut [f64]) -> f64 {
        let (s, j) = self.split(flat);
        self.spatial_frequency(s, xi);
        self.eta(j)
    }

    /// `|ξ|²` for every spatial frequency.
    pub fn spatial_frequency_norms2(&self) -> Vec<f64> {
        let mut xi = vec![0.0; self.k];
        (0..self.spatial_len())
            .map(|s| {
                self.spatial_frequency(s, &mut xi);
                xi.iter().map(|v| v * v).sum()
            })
            .collect()
    }

    /// Applies `f(ξ, η)` at every lattice frequency, in flat order.
    pub fn map_frequencies<T>(&self, mut f: impl FnMut(&[f64], f64) -> T) -> Vec<T> {
        let mut xi = vec![0.0; self.k];
        let etas: Vec<f64> = (0..self.n_t).map(|j| self.eta(j)).collect();
        let mut out = Vec::with_capacity(self.len());
        for s in 0..self.spatial_len() {
            self.spatial_frequency(s, &mut xi);
            for &eta in &etas {
                out.push(f(&xi, eta));
            }
        }
        out
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::Shape {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }
}

/// Complex samples on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    lattice: Lattice,
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(lattice: Lattice, samples: Vec<Complex64>) -> Result<Self> {
        lattice.validate()?;
        lattice.check_len(samples.len())?;
        Ok(GridFunction { lattice, samples })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        GridFunction {
            samples: vec![Complex64::new(0.0, 0.0); lattice.len()],
            lattice,
        }
    }

    /// Independent standard complex Gaussian samples.
    pub fn random<R: Rng + ?Sized>(lattice: Lattice, rng: &mut R) -> Self {
        let samples = (0..lattice.len())
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        GridFunction { lattice, samples }
    }

    /// Samples `f(x, t)` at every lattice point.
    pub fn from_fn(lattice: Lattice, mut f: impl FnMut(&[f64], f64) -> Complex64) -> Self {
        let dx = lattice.dx();
        let mut idx = vec![0usize; lattice.k];
        let mut x = vec![0.0; lattice.k];
        let mut samples = Vec::with_capacity(lattice.len());
        for s in 0..lattice.spatial_len() {
            lattice.spatial_multi_index(s, &mut idx);
            for (xa, &ia) in x.iter_mut().zip(&idx) {
                *xa = ia as f64 * dx;
            }
            for j in 0..lattice.n_t {
                samples.push(f(&x, lattice.time(j)));
            }
        }
        GridFunction { lattice, samples }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Discrete L₂ norm consistent with [`hnorm`] at `s = 0`, `φ ≡ 1`:
    /// `(cell_volume · Σ |g|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.lattice.cell_volume() * self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        GridFunction {
            lattice: self.lattice,
            samples: self.samples.iter().map(|&c| a * c).collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        if self.lattice != other.lattice {
            return Err(Error::Argument("lattices differ".into()));
        }
        Ok(GridFunction {
            lattice: self.lattice,
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Unitary DFT coefficients indexed like the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    lattice: Lattice,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(lattice: Lattice, coeffs: Vec<Complex64>) -> Result<Self> {
        lattice.validate()?;
        lattice.check_len(coeffs.len())?;
        Ok(SpectralField { lattice, coeffs })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// In-place unitary DFT over every axis of a row-major array.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    fft_axes(data, shape, &vec![true; shape.len()], inverse);
}

/// In-place unitary DFT over the selected axes of a row-major array.
pub fn fft_axes(data: &mut [Complex64], shape: &[usize], axes: &[bool], inverse: bool) {
    let total: usize = shape.iter().product();
    assert_eq!(total, data.len());
    assert_eq!(shape.len(), axes.len());
    let mut planner = FftPlanner::<f64>::new();
    let mut stride = total;
    let mut transformed = 1usize;
    for (&n, &on) in shape.iter().zip(axes) {
        stride /= n;
        if n == 1 || !on {
            continue;
        }
        transformed *= n;
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let block = n * stride;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for outer in 0..total / block {
            for inner in 0..stride {
                let base = outer * block + inner;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
    let scale = 1.0 / (transformed as f64).sqrt();
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Unitary DFT over the spatial axes only, leaving time untouched.
pub fn fft_space(data: &mut [Complex64], lattice: &Lattice, inverse: bool) {
    let mut axes = vec![true; lattice.k + 1];
    axes[lattice.k] = false;
    fft_axes(data, &lattice.shape(), &axes, inverse);
}

/// Unitary DFT over the time axis only.
pub fn fft_time(data: &mut [Complex64], lattice: &Lattice, inverse: bool) {
    let mut axes = vec![false; lattice.k + 1];
    axes[lattice.k] = true;
    fft_axes(data, &lattice.shape(), &axes, inverse);
}

pub fn dft(g: &GridFunction) -> SpectralField {
    let mut coeffs = g.samples.clone();
    fft_nd(&mut coeffs, &g.lattice.shape(), false);
    SpectralField {
        lattice: g.lattice,
        coeffs,
    }
}

pub fn idft(f: &SpectralField) -> GridFunction {
    let mut samples = f.coeffs.clone();
    fft_nd(&mut samples, &f.lattice.shape(), true);
    GridFunction {
        lattice: f.lattice,
        samples,
    }
}

/// Regularity index `(s, γ, φ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnisotropicIndex {
    pub s: f64,
    pub gamma: f64,
    pub phi: PhiFunction,
}

impl AnisotropicIndex {
    pub fn new(s: f64, gamma: f64, phi: PhiFunction) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Argument(format!("gamma must be positive, got {gamma}")));
        }
        if !s.is_finite() {
            return Err(Error::Argument("s must be finite".into()));
        }
        Ok(AnisotropicIndex { s, gamma, phi })
    }

    pub fn sobolev(s: f64, gamma: f64) -> Result<Self> {
        Self::new(s, gamma, PhiFunction::constant_one())
    }

    /// The integer `b` with `γ = 1/(2b)`, if there is one.
    pub fn parabolic_b(&self) -> Option<u32> {
        let b = 1.0 / (2.0 * self.gamma);
        let rb = b.round();
        ((b - rb).abs() < 1e-12 && rb >= 1.0).then_some(rb as u32)
    }

    pub fn weight(&self, xi: &[f64], eta: f64) -> f64 {
        hormander_weight(self, xi, eta)
    }

    /// Squared weights at every lattice frequency.
    pub fn weights2(&self, lattice: &Lattice) -> Vec<f64> {
        lattice.map_frequencies(|xi, eta| {
            let w = hormander_weight(self, xi, eta);
            w * w
        })
    }
}

/// `(1 + |ξ|² + |η|^{2γ})^{1/2}`.
pub fn r_gamma(xi: &[f64], eta: f64, gamma: f64) -> f64 {
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    (1.0 + xi2 + eta.abs().powf(2.0 * gamma)).sqrt()
}

/// `r_γ^s φ(r_γ)`.
pub fn hormander_weight(idx: &AnisotropicIndex, xi: &[f64], eta: f64) -> f64 {
    let r = r_gamma(xi, eta, idx.gamma);
    r.powf(idx.s) * idx.phi.eval_unchecked(r)
}

/// `(cell_volume · Σ w² |c|²)^{1/2}` for precomputed squared weights.
pub fn weighted_norm(coeffs: &[Complex64], weights2: &[f64], cell_volume: f64) -> f64 {
    debug_assert_eq!(coeffs.len(), weights2.len());
    let sum: f64 = coeffs.iter().zip(weights2).map(|(c, w)| w * c.norm_sqr()).sum();
    (cell_volume * sum).sqrt()
}

pub fn hnorm(g: &GridFunction, idx: &AnisotropicIndex) -> f64 {
    hnorm_spectral(&dft(g), idx)
}

pub fn hnorm_spectral(f: &SpectralField, idx: &AnisotropicIndex) -> f64 {
    weighted_norm(&f.coeffs, &idx.weights2(&f.lattice), f.lattice.cell_volume())
}

/// Factor converting [`hnorm`] into a quadrature of the continuum norm.
///
/// `hnorm` uses unitary coefficients, so for a fixed continuum function it
/// scales like `√N`; multiplying by this factor removes the dependence on
/// the resolution.
pub fn continuum_scale(lattice: &Lattice) -> f64 {
    let phys_cell = lattice.dx().powi(lattice.k as i32) * lattice.dt();
    (phys_cell / lattice.cell_volume()).sqrt()
}

/// Lattice maxima `(max w/w₁, max w₀/w)` certifying the discrete chain
/// `‖·‖_{idx0} ≤ c_high ‖·‖_{idx}` and `‖·‖_{idx} ≤ c_low ‖·‖_{idx1}`.
pub fn embedding_constants(
    idx0: &AnisotropicIndex,
    idx: &AnisotropicIndex,
    idx1: &AnisotropicIndex,
    lattice: &Lattice,
) -> Result<(f64, f64)> {
    if !(idx0.s <= idx.s && idx.s <= idx1.s) {
        return Err(Error::Argument(format!(
            "expected s0 <= s <= s1, got {} {} {}",
            idx0.s, idx.s, idx1.s
        )));
    }
    if idx0.gamma != idx.gamma || idx.gamma != idx1.gamma {
        return Err(Error::Argument("embedding constants need a common gamma".into()));
    }
    let mut c_low: f64 = 0.0;
    let mut c_high: f64 = 0.0;
    lattice.map_frequencies(|xi, eta| {
        let w0 = hormander_weight(idx0, xi, eta);
        let w = hormander_weight(idx, xi, eta);
        let w1 = hormander_weight(idx1, xi, eta);
        c_low = c_low.max(w / w1);
        c_high = c_high.max(w0 / w);
    });
    Ok((c_low, c_high))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::E;

    fn random_grid(lat: Lattice, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..lat.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        GridFunction::new(lat, samples).unwrap()
    }

    #[test]
    fn r_gamma_examples() {
        assert_eq!(r_gamma(&[0.0, 0.0], 0.0, 0.5), 1.0);
        assert!((r_gamma(&[1.0, 0.0], 0.0, 0.5) - 2f64.sqrt()).abs() < 1e-15);
        assert!((r_gamma(&[0.0, 0.0], 4.0, 0.5) - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn weight_examples() {
        let sob = |s| AnisotropicIndex::sobolev(s, 0.5).unwrap();
        assert_eq!(hormander_weight(&sob(0.0), &[3.0, 1.0], 7.0), 1.0);
        assert!((hormander_weight(&sob(2.0), &[1.0, 0.0], 0.0) - 2.0).abs() < 1e-14);
        let idx = AnisotropicIndex::new(1.0, 0.5, PhiFunction::log_power(vec![1.0]).unwrap()).unwrap();
        // r_γ = e when |η| = e² − 1
        let w = hormander_weight(&idx, &[0.0, 0.0], E * E - 1.0);
        assert!((w - E).abs() < 1e-13);
    }

    #[test]
    fn dft_of_delta_and_constant() {
        let lat = Lattice::standard(2, 4, 8, 1.0).unwrap();
        let mut delta = GridFunction::zeros(lat);
        delta.samples_mut()[0] = Complex64::new(1.0, 0.0);
        let spec = dft(&delta);
        let expect = 1.0 / (lat.len() as f64).sqrt();
        for c in spec.coeffs() {
            assert!((c - Complex64::new(expect, 0.0)).norm() < 1e-15);
        }

        let one = GridFunction::from_fn(lat, |_, _| Complex64::new(1.0, 0.0));
        let spec = dft(&one);
        assert!((spec.coeffs()[0].re - (lat.len() as f64).sqrt()).abs() < 1e-12);
        assert!(spec.coeffs()[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn round_trip_and_parseval() {
        let lat = Lattice::standard(2, 8, 16, 3.0).unwrap();
        let g = random_grid(lat, 7);
        let back = idft(&dft(&g));
        let err: f64 = back.samples().iter().zip(g.samples()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let nrm: f64 = g.samples().iter().map(|c| c.norm_sqr()).sum();
        assert!((err / nrm).sqrt() < 1e-13);

        let l2 = AnisotropicIndex::sobolev(0.0, 0.5).unwrap();
        assert!((hnorm(&g, &l2) - g.l2_norm()).abs() <= 1e-12 * g.l2_norm());
    }

    #[test]
    fn frequency_of_single_mode() {
        // e^{i(2x₁ − x₂ + 3·2πt/L_t)} has one nonzero coefficient
        let lat = Lattice::standard(2, 8, 16, 4.0).unwrap();
        let g = GridFunction::from_fn(lat, |x, t| {
            Complex64::from_polar(1.0, 2.0 * x[0] - x[1] + 3.0 * 2.0 * PI * t / 4.0)
        });
        let spec = dft(&g);
        let (imax, _) = spec
            .coeffs()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        let mut xi = [0.0; 2];
        let eta = lat.frequency(imax, &mut xi);
        assert_eq!(xi, [2.0, -1.0]);
        assert!((eta - 3.0 * 2.0 * PI / 4.0).abs() < 1e-12);
        assert!((spec.coeffs()[imax].norm() - (lat.len() as f64).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn single_mode_norm() {
        let lat = Lattice::standard(1, 8, 8, 2.0).unwrap();
        let idx = AnisotropicIndex::new(1.5, 0.5, PhiFunction::log_power(vec![1.0]).unwrap()).unwrap();
        let flat = 3 * lat.n_t + 5;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); lat.len()];
        coeffs[flat] = Complex64::new(1.0, 0.0);
        let f = SpectralField::new(lat, coeffs).unwrap();
        let mut xi = [0.0];
        let eta = lat.frequency(flat, &mut xi);
        let expect = hormander_weight(&idx, &xi, eta) * lat.cell_volume().sqrt();
        assert!((hnorm_spectral(&f, &idx) - expect).abs() < 1e-13 * expect);
        assert_eq!(hnorm(&GridFunction::zeros(lat), &idx), 0.0);
    }

    #[test]
    fn embedding_constant_examples() {
        let lat = Lattice::standard(2, 16, 16, 2.0 * PI).unwrap();
        let sob = |s| AnisotropicIndex::sobolev(s, 0.5).unwrap();
        let (lo, hi) = embedding_constants(&sob(1.0), &sob(2.0), &sob(3.0), &lat).unwrap();
        assert!(lo <= 1.0 + 1e-15 && hi <= 1.0 + 1e-15);
        assert_eq!(embedding_constants(&sob(2.0), &sob(2.0), &sob(2.0), &lat).unwrap(), (1.0, 1.0));
        assert!(embedding_constants(&sob(3.0), &sob(2.0), &sob(1.0), &lat).is_err());

        // brute force lattice scan for φ = 1/log
        let inv = PhiFunction::log_power(vec![-1.0]).unwrap();
        let mid = AnisotropicIndex::new(2.0, 0.5, inv.clone()).unwrap();
        let (lo, hi) = embedding_constants(&sob(1.0), &mid, &sob(3.0), &lat).unwrap();
        let mut blo: f64 = 0.0;
        let mut bhi: f64 = 0.0;
        for i1 in 0..16 {
            for i2 in 0..16 {
                for j in 0..16 {
                    let xi = [lat.xi_component(i1), lat.xi_component(i2)];
                    let r = (1.0 + xi[0] * xi[0] + xi[1] * xi[1] + lat.eta(j).abs()).sqrt();
                    let phi = if r < E { 1.0 } else { 1.0 / r.ln() };
                    blo = blo.max(r * r * phi / r.powi(3));
                    bhi = bhi.max(r / (r * r * phi));
                }
            }
        }
        assert!((lo - blo).abs() < 1e-12 * blo && (hi - bhi).abs() < 1e-12 * bhi);
    }

    #[test]
    fn weights_monotone_in_s() {
        let lat = Lattice::standard(1, 8, 8, 1.0).unwrap();
        let w1 = AnisotropicIndex::sobolev(0.7, 0.25).unwrap().weights2(&lat);
        let w2 = AnisotropicIndex::sobolev(1.3, 0.25).unwrap().weights2(&lat);
        assert!(w1.iter().zip(&w2).all(|(a, b)| a <= b));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let lat = Lattice::standard(1, 4, 4, 1.0).unwrap();
        assert!(matches!(
            GridFunction::new(lat, vec![Complex64::new(0.0, 0.0); 3]),
            Err(Error::Shape { expected: 16, got: 3 })
        ));
        assert!(Lattice::standard(1, 6, 4, 1.0).is_err());
    }
}
