//! Periodic-in-space parabolic model problems with zero Cauchy data.
//!
//! For a symbol of time order one, `A = a_t ∂_t + Σ a^α D^α + lower`, with
//! `D_k = i∂_k`, a spatial Fourier mode `e^{iξ·x}` obeys
//!
//! ```text
//! ∂_t û + λ(ξ) û = f̂ / a_t,    λ(ξ) = Σ a^α (−ξ)^α / a_t
//! ```
//!
//! which is solved exactly for forcing that is piecewise linear between the
//! time nodes:
//!
//! ```text
//! û_{j+1} = e^{−z} û_j + h [ (E₁ − E₂) f_j + E₂ f_{j+1} ],   z = λh,
//! E₁ = (1 − e^{−z})/z,   E₂ = (z − 1 + e^{−z})/z².
//! ```

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::class_m::PhiFunction;
use crate::error::{Error, Result};
use crate::parabolicity::{petrovskii_check, OperatorFile, PrincipalSymbol};
use crate::plus_spaces::{PlusSolver, RegionMask};
use crate::spectra::{continuum_scale, fft_nd, fft_space, fft_time, AnisotropicIndex, GridFunction, Lattice};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Samples used to confirm parabolicity when an operator is built.
pub const PARABOLICITY_SAMPLES: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicParabolicOperator {
    symbol: PrincipalSymbol,
    lower: BTreeMap<Vec<u32>, Complex64>,
    l_x: f64,
    tau: f64,
}

impl PeriodicParabolicOperator {
    pub fn new(
        symbol: PrincipalSymbol,
        lower: BTreeMap<Vec<u32>, Complex64>,
        l_x: f64,
        tau: f64,
    ) -> Result<Self> {
        if symbol.kappa() != 1 {
            return Err(Error::Unsupported(format!(
                "time order m/b = {} > 1 is not implemented; only first order in time",
                symbol.kappa()
            )));
        }
        if !(l_x > 0.0 && tau > 0.0) {
            return Err(Error::Argument("period and horizon must be positive".into()));
        }
        for alpha in lower.keys() {
            if alpha.len() != symbol.n() || alpha.iter().sum::<u32>() >= 2 * symbol.m() {
                return Err(Error::Structural(format!("lower-order term {alpha:?} is not of lower order")));
            }
        }
        let verdict = petrovskii_check(&symbol, PARABOLICITY_SAMPLES)?;
        if !verdict.pass {
            return Err(Error::Argument(format!(
                "symbol is not parabolic: |A°| = {:e} at xi = {:?}, p = {}",
                verdict.min_abs, verdict.witness_xi, verdict.witness_p
            )));
        }
        Ok(PeriodicParabolicOperator {
            symbol,
            lower,
            l_x,
            tau,
        })
    }

    /// `∂_t − Δ` on the `k`-torus of period `l_x`.
    pub fn heat(k: usize, l_x: f64, tau: f64) -> Result<Self> {
        Self::new(PrincipalSymbol::heat(k), BTreeMap::new(), l_x, tau)
    }

    pub fn from_file(file: &OperatorFile, l_x: f64, tau: f64) -> Result<Self> {
        Self::new(file.principal()?, file.lower_terms()?, l_x, tau)
    }

    pub fn symbol(&self) -> &PrincipalSymbol {
        &self.symbol
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn l_x(&self) -> f64 {
        self.l_x
    }

    /// `a_t λ(ξ)`: the spatial part of the symbol on `e^{iξ·x}`.
    pub fn spatial_multiplier(&self, xi: &[f64]) -> Complex64 {
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        let mono = |alpha: &[u32]| -> f64 { alpha.iter().zip(&neg).map(|(&a, &v)| v.powi(a as i32)).product() };
        let principal: Complex64 = self
            .symbol
            .coeffs()
            .iter()
            .filter(|((_, beta), _)| *beta == 0)
            .map(|((alpha, _), c)| c * mono(alpha))
            .sum();
        let lower: Complex64 = self.lower.iter().map(|(alpha, c)| c * mono(alpha)).sum();
        principal + lower
    }

    pub fn lambda(&self, xi: &[f64]) -> Complex64 {
        self.spatial_multiplier(xi) / self.symbol.time_coefficient()
    }

    fn check_lattice(&self, lat: &Lattice) -> Result<()> {
        if lat.k != self.symbol.n() {
            return Err(Error::Argument(format!(
                "lattice has {} spatial axes, operator acts in {}",
                lat.k,
                self.symbol.n()
            )));
        }
        if (lat.l_x - self.l_x).abs() > 1e-12 * self.l_x {
            return Err(Error::Argument(format!("lattice period {} differs from {}", lat.l_x, self.l_x)));
        }
        if !(self.tau < 0.5 * lat.l_t) {
            return Err(Error::Argument(format!("horizon {} must be below L_t/2 = {}", self.tau, 0.5 * lat.l_t)));
        }
        Ok(())
    }

    /// Mode rates `λ(ξ)` on the lattice, rejecting growing modes.
    fn rates(&self, lat: &Lattice) -> Result<Vec<Complex64>> {
        let mut xi = vec![0.0; lat.k];
        (0..lat.spatial_len())
            .map(|s| {
                lat.spatial_frequency(s, &mut xi);
                let l = self.lambda(&xi);
                if l.re < 0.0 {
                    Err(Error::Stability {
                        xi: xi.clone(),
                        re_lambda: l.re,
                    })
                } else {
                    Ok(l)
                }
            })
            .collect()
    }

    /// Region `V = ℝᵏ × (0, τ)` with support in `t ≥ 0`.
    pub fn window(&self, lat: Lattice) -> RegionMask {
        RegionMask::time_window(lat, 0.0, self.tau)
    }

    /// Anisotropy `γ = 1/(2b)`.
    pub fn gamma(&self) -> f64 {
        0.5 / self.symbol.b() as f64
    }
}

/// `(1 − e^{−z})/z` and `(z − 1 + e^{−z})/z²`, by series near zero.
pub fn phi_functions(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 0.1 {
        let mut e1 = ZERO;
        let mut e2 = ZERO;
        let mut term = Complex64::new(1.0, 0.0); // (−z)^k / k!
        for k in 0..20 {
            e1 += term / (k + 1) as f64;
            e2 += term / ((k + 1) * (k + 2)) as f64;
            term *= -z / (k + 1) as f64;
        }
        (e1, e2)
    } else {
        let ez = (-z).exp();
        ((1.0 - ez) / z, (z - 1.0 + ez) / (z * z))
    }
}

/// Per-mode nodal solution with the forcing it was computed from.
#[derive(Debug, Clone)]
pub struct DuhamelSolution {
    /// Solution samples.
    pub u: GridFunction,
    /// Spatial DFT of `u`, time untouched.
    u_hat: Vec<Complex64>,
    /// Spatial DFT of `f / a_t`.
    f_hat: Vec<Complex64>,
    lambda: Vec<Complex64>,
    a_t: Complex64,
}

impl DuhamelSolution {
    /// `(û(t), ∂_t û(t))` for spatial mode `s` at `t` inside the window,
    /// from the exact interval representation.
    pub fn mode_at(&self, s: usize, t: f64) -> (Complex64, Complex64) {
        let lat = self.u.lattice();
        let h = lat.dt();
        let pos = (t + 0.5 * lat.l_t) / h;
        let j = (pos.floor() as usize).min(lat.n_t - 2);
        let sec = t - lat.time(j);
        let base = s * lat.n_t;
        let (uj, fj, fj1) = (self.u_hat[base + j], self.f_hat[base + j], self.f_hat[base + j + 1]);
        let lam = self.lambda[s];
        let slope = (fj1 - fj) / h;
        let z = lam * sec;
        let (p1, p2) = phi_functions(z);
        let ez = (-z).exp();
        let u = ez * uj + fj * sec * p1 + slope * sec * sec * p2;
        let du = -lam * ez * uj + fj * ez + slope * sec * p1;
        (u, du)
    }

    /// `A u` for spatial mode `s` at time `t`.
    pub fn apply_mode_at(&self, s: usize, t: f64) -> Complex64 {
        let (u, du) = self.mode_at(s, t);
        self.a_t * (du + self.lambda[s] * u)
    }
}

pub fn solve_duhamel(op: &PeriodicParabolicOperator, f: &GridFunction) -> Result<DuhamelSolution> {
    let lat = *f.lattice();
    op.check_lattice(&lat)?;
    let scale = f.max_abs();
    let z = lat.zero_time_index();
    for (flat, c) in f.samples().iter().enumerate() {
        let t = lat.time(lat.split(flat).1);
        if (t < 0.0 || t > op.tau * (1.0 + 1e-12)) && c.norm() > 1e-12 * scale {
            return Err(Error::Argument(format!("forcing is nonzero at t = {t}, outside [0, tau]")));
        }
    }
    let lambda = op.rates(&lat)?;
    let a_t = op.symbol.time_coefficient();
    let mut f_hat: Vec<Complex64> = f.samples().iter().map(|c| c / a_t).collect();
    fft_space(&mut f_hat, &lat, false);
    let h = lat.dt();
    let mut u_hat = vec![ZERO; lat.len()];
    for (s, &lam) in lambda.iter().enumerate() {
        let zh = lam * h;
        let (e1, e2) = phi_functions(zh);
        let decay = (-zh).exp();
        let base = s * lat.n_t;
        for j in z..lat.n_t - 1 {
            u_hat[base + j + 1] =
                decay * u_hat[base + j] + h * ((e1 - e2) * f_hat[base + j] + e2 * f_hat[base + j + 1]);
        }
    }
    let mut u = u_hat.clone();
    fft_space(&mut u, &lat, true);
    // zero Cauchy data holds exactly, not just up to round-off
    for (flat, v) in u.iter_mut().enumerate() {
        if lat.split(flat).1 <= z {
            *v = ZERO;
        }
    }
    Ok(DuhamelSolution {
        u: GridFunction::new(lat, u)?,
        u_hat,
        f_hat,
        lambda,
        a_t,
    })
}

pub fn solve_periodic(op: &PeriodicParabolicOperator, f: &GridFunction) -> Result<GridFunction> {
    Ok(solve_duhamel(op, f)?.u)
}

/// `A u` with the spatial symbol applied spectrally and a spectral time
/// derivative over the whole (periodic) time window.
pub fn apply_operator(op: &PeriodicParabolicOperator, u: &GridFunction) -> Result<GridFunction> {
    let lat = *u.lattice();
    if lat.k != op.symbol.n() {
        return Err(Error::Argument("lattice dimension differs from operator".into()));
    }
    let a_t = op.symbol.time_coefficient();
    let mut data = u.samples().to_vec();
    fft_space(&mut data, &lat, false);
    fft_time(&mut data, &lat, false);
    let mut xi = vec![0.0; lat.k];
    for s in 0..lat.spatial_len() {
        lat.spatial_frequency(s, &mut xi);
        let spatial = op.spatial_multiplier(&xi);
        for j in 0..lat.n_t {
            let dt = if j == lat.n_t / 2 { ZERO } else { Complex64::new(0.0, lat.eta(j)) };
            data[s * lat.n_t + j] *= a_t * dt + spatial;
        }
    }
    fft_time(&mut data, &lat, true);
    fft_space(&mut data, &lat, true);
    GridFunction::new(lat, data)
}

const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Relative continuum L₂ norm on `(0, τ)` of `A u − f`, where `u` solves the
/// problem for the lattice samples of `forcing` and both sides are taken at
/// Gauss points between the time nodes.
pub fn residual(
    op: &PeriodicParabolicOperator,
    lat: Lattice,
    forcing: impl Fn(&[f64], f64) -> Complex64,
) -> Result<f64> {
    let f = GridFunction::from_fn(lat, &forcing);
    let sol = solve_duhamel(op, &f)?;
    let h = lat.dt();
    let z = lat.zero_time_index();
    let steps = (op.tau / h).round() as usize;
    let mut num = 0.0;
    let mut den = 0.0;
    for j in z..z + steps {
        for &(node, w) in &GAUSS3 {
            let t = lat.time(j) + 0.5 * h * (1.0 + node);
            // exact forcing at this time, spatially transformed
            let mut slice: Vec<Complex64> = Vec::with_capacity(lat.spatial_len());
            let mut x = vec![0.0; lat.k];
            let mut idx = vec![0usize; lat.k];
            for s in 0..lat.spatial_len() {
                lat.spatial_multi_index(s, &mut idx);
                for (xa, &ia) in x.iter_mut().zip(&idx) {
                    *xa = ia as f64 * lat.dx();
                }
                slice.push(forcing(&x, t));
            }
            fft_nd(&mut slice, &vec![lat.n_x; lat.k], false);
            for (s, &fs) in slice.iter().enumerate() {
                let r = sol.apply_mode_at(s, t) - fs;
                num += w * r.norm_sqr();
                den += w * fs.norm_sqr();
            }
        }
    }
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((num / den).sqrt())
}

/// Plus norms of solution and forcing on `V = (0, τ)` at a fixed lattice.
pub struct EstimateProbe {
    op: PeriodicParabolicOperator,
    u_solver: PlusSolver,
    f_solver: PlusSolver,
}

impl EstimateProbe {
    pub fn new(op: &PeriodicParabolicOperator, lat: Lattice, sigma: f64, phi: &PhiFunction) -> Result<Self> {
        op.check_lattice(&lat)?;
        let gamma = op.gamma();
        let two_m = 2.0 * op.symbol.m() as f64;
        let region = op.window(lat);
        let u_idx = AnisotropicIndex::new(sigma, gamma, phi.clone())?;
        let f_idx = AnisotropicIndex::new(sigma - two_m, gamma, phi.clone())?;
        Ok(EstimateProbe {
            op: op.clone(),
            u_solver: PlusSolver::new(&u_idx, &region)?,
            f_solver: PlusSolver::new(&f_idx, &region)?,
        })
    }

    /// `(‖u‖₊, ‖f‖₊)` at orders `σ` and `σ − 2m`.
    pub fn norms(&self, f: &GridFunction) -> Result<(f64, f64)> {
        let u = solve_periodic(&self.op, f)?;
        let region = self.u_solver.region();
        let nu = self.u_solver.solve(&region.restrict(&u)?)?.norm;
        let nf = self.f_solver.solve(&region.restrict(f)?)?.norm;
        Ok((nu, nf))
    }
}

/// `(min ρ, max ρ)` of `ρ(f) = ‖u‖₊ / ‖f‖₊` over the ensemble.
pub fn two_sided_ratio(
    op: &PeriodicParabolicOperator,
    ensemble: &[GridFunction],
    sigma: f64,
    phi: &PhiFunction,
) -> Result<(f64, f64)> {
    let Some(first) = ensemble.first() else {
        return Err(Error::Argument("empty ensemble".into()));
    };
    let sigma0 = 2.0 * op.symbol.m() as f64;
    if sigma <= sigma0 {
        return Err(Error::Argument(format!("sigma = {sigma} must exceed sigma0 = {sigma0}")));
    }
    let probe = EstimateProbe::new(op, *first.lattice(), sigma, phi)?;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for f in ensemble {
        if f.lattice() != first.lattice() {
            return Err(Error::Argument("ensemble members live on different lattices".into()));
        }
        let (nu, nf) = probe.norms(f)?;
        if nf == 0.0 {
            return Err(Error::Argument("ensemble contains a forcing with zero norm".into()));
        }
        lo = lo.min(nu / nf);
        hi = hi.max(nu / nf);
    }
    Ok((lo, hi))
}

/// Random forcing band-limited in space (`|m_a| ≤ band`) with a smooth time
/// profile vanishing to second order at `t = 0`, supported in `[0, τ]`.
///
/// The same seed gives the same continuum function on every lattice.
pub fn band_limited_forcing(lat: Lattice, tau: f64, band: i64, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = lat.k;
    let width = (2 * band + 1) as usize;
    let count = width.pow(k as u32);
    let mut modes = Vec::with_capacity(count);
    for idx in 0..count {
        let mut rest = idx;
        let mut m = vec![0i64; k];
        for a in (0..k).rev() {
            m[a] = (rest % width) as i64 - band;
            rest /= width;
        }
        let c: [Complex64; 3] = std::array::from_fn(|_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        modes.push((m, c));
    }
    let two_pi_l = 2.0 * std::f64::consts::PI / lat.l_x;
    GridFunction::from_fn(lat, |x, t| {
        if !(0.0..=tau).contains(&t) {
            return ZERO;
        }
        let s = t / tau;
        modes
            .iter()
            .map(|(m, c)| {
                let phase: f64 = m.iter().zip(x).map(|(&ma, &xa)| ma as f64 * two_pi_l * xa).sum();
                let profile = s * s * (c[0] + c[1] * s + c[2] * s * s);
                profile * Complex64::from_polar(1.0, phase)
            })
            .sum()
    })
}

/// Growth diagnostics of a norm sequence under lattice doubling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderReport {
    pub sizes: Vec<[usize; 2]>,
    pub f_norms: Vec<f64>,
    pub u_norms: Vec<f64>,
    /// `‖u‖` at step `i+1` over step `i`.
    pub step_ratios: Vec<f64>,
    /// Ratio of successive increments of `‖u‖²`; below 1 when converging.
    pub increment_ratios: Vec<f64>,
    /// Set when a step ratio exceeds 2 or the squared-norm increments stop
    /// shrinking (last ratio ≥ 0.9).
    pub flagged: bool,
}

pub const INCREMENT_LIMIT: f64 = 0.9;

fn ladder_report(sizes: Vec<[usize; 2]>, f_norms: Vec<f64>, u_norms: Vec<f64>) -> LadderReport {
    let step_ratios: Vec<f64> = u_norms.windows(2).map(|w| w[1] / w[0]).collect();
    let inc: Vec<f64> = u_norms.windows(2).map(|w| w[1] * w[1] - w[0] * w[0]).collect();
    let increment_ratios: Vec<f64> = inc.windows(2).map(|w| w[1] / w[0]).collect();
    let flagged = step_ratios.iter().any(|&r| r > 2.0)
        || increment_ratios.last().is_some_and(|&r| r >= INCREMENT_LIMIT);
    LadderReport {
        sizes,
        f_norms,
        u_norms,
        step_ratios,
        increment_ratios,
        flagged,
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Forcing `Σ_ξ a_ξ e^{iξ·x} χ(t)` with `|a_ξ| = ⟨ξ⟩^{−(σ−2m)−k/2−ε} / φ(⟨ξ⟩)`,
/// `⟨ξ⟩ = (1+|ξ|²)^{1/2}`, phases fixed per integer mode, and a smooth bump
/// `χ` supported in `(0, τ)`. Its `(σ − 2m, φ)` norm stays bounded under
/// refinement iff `ε > 0`.
pub fn decaying_forcing(lat: Lattice, order: f64, phi: &PhiFunction, eps: f64, tau: f64, seed: u64) -> GridFunction {
    let k = lat.k;
    let mut coeffs = vec![ZERO; lat.spatial_len()];
    let mut xi = vec![0.0; k];
    let mut idx = vec![0usize; k];
    for (s, c) in coeffs.iter_mut().enumerate() {
        lat.spatial_frequency(s, &mut xi);
        lat.spatial_multi_index(s, &mut idx);
        let mut key = seed;
        for &i in &idx {
            key = splitmix(key ^ (Lattice::signed_mode(i, lat.n_x) as u64));
        }
        let angle = (key >> 11) as f64 / (1u64 << 53) as f64 * std::f64::consts::TAU;
        let r = (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let amp = r.powf(-order - 0.5 * k as f64 - eps) / phi.eval_unchecked(r);
        *c = Complex64::from_polar(amp, angle);
    }
    // synthesize with a non-unitary inverse transform: coefficient = amplitude
    let mut field = vec![ZERO; lat.len()];
    for (s, c) in coeffs.iter().enumerate() {
        field[s * lat.n_t] = *c * (lat.spatial_len() as f64).sqrt();
    }
    fft_space(&mut field, &lat, true);
    let bump = |t: f64| {
        if t <= 0.0 || t >= tau {
            0.0
        } else {
            let s = t / tau;
            (-1.0 / (s * (1.0 - s))).exp() * 4f64.exp()
        }
    };
    let mut samples = vec![ZERO; lat.len()];
    for s in 0..lat.spatial_len() {
        let v = field[s * lat.n_t];
        for j in 0..lat.n_t {
            samples[s * lat.n_t + j] = v * bump(lat.time(j));
        }
    }
    GridFunction::new(lat, samples).expect("lattice shape")
}

/// Continuum-scaled plus norms of `u` at `(σ, φ)` and of `f` at `(σ − 2m, φ)`
/// across a lattice ladder, for forcing from [`decaying_forcing`]. Ladders
/// that refine space with the time grid held fixed isolate the spatial decay
/// from time discretization effects.
pub fn regularity_inheritance_check(
    op: &PeriodicParabolicOperator,
    sigma: f64,
    phi: &PhiFunction,
    eps: f64,
    ladder: &[Lattice],
    seed: u64,
) -> Result<LadderReport> {
    if ladder.len() < 2 {
        return Err(Error::Argument("ladder needs at least two lattices".into()));
    }
    let order = sigma - 2.0 * op.symbol.m() as f64;
    let mut sizes = Vec::new();
    let mut f_norms = Vec::new();
    let mut u_norms = Vec::new();
    for &lat in ladder {
        let f = decaying_forcing(lat, order, phi, eps, op.tau, seed);
        let (nu, nf) = EstimateProbe::new(op, lat, sigma, phi)?.norms(&f)?;
        let c = continuum_scale(&lat);
        sizes.push([lat.n_x, lat.n_t]);
        f_norms.push(nf * c);
        u_norms.push(nu * c);
    }
    Ok(ladder_report(sizes, f_norms, u_norms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lat(n_x: usize, n_t: usize) -> Lattice {
        Lattice::standard(2, n_x, n_t, 4.0).unwrap()
    }

    #[test]
    fn zero_forcing_zero_solution() {
        let op = PeriodicParabolicOperator::heat(2, 2.0 * PI, 1.0).unwrap();
        let u = solve_periodic(&op, &GridFunction::zeros(lat(8, 16))).unwrap();
        assert!(u.samples().iter().all(|c| *c == ZERO));
        let au = apply_operator(&op, &GridFunction::zeros(lat(8, 16))).unwrap();
        assert!(au.samples().iter().all(|c| *c == ZERO));
    }

    #[test]
    fn single_mode_matches_closed_form() {
        // f = cos(x₁) on [0, τ]: û(t) = (1 − e^{−t})/1 for |ξ|² = 1
        let tau = 1.0;
        let op = PeriodicParabolicOperator::heat(2, 2.0 * PI, tau).unwrap();
        let l = lat(8, 32);
        let f = GridFunction::from_fn(l, |x, t| {
            if (0.0..=tau).contains(&t) {
                Complex64::new(x[0].cos(), 0.0)
            } else {
                ZERO
            }
        });
        let u = solve_periodic(&op, &f).unwrap();
        for j in l.zero_time_index()..l.n_t {
            let t = l.time(j);
            if t > tau {
                break;
            }
            let want = 1.0 - (-t).exp();
            for s in 0..l.spatial_len() {
                let mut idx = [0usize; 2];
                l.spatial_multi_index(s, &mut idx);
                let x = idx[0] as f64 * l.dx();
                assert!((u.samples()[s * l.n_t + j].re - want * x.cos()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn causality_and_linearity() {
        let op = PeriodicParabolicOperator::heat(2, 2.0 * PI, 1.0).unwrap();
        let l = lat(8, 16);
        let f = band_limited_forcing(l, 1.0, 2, 1);
        let g = band_limited_forcing(l, 1.0, 2, 2);
        let u = solve_periodic(&op, &f).unwrap();
        for (flat, c) in u.samples().iter().enumerate() {
            if l.time(l.split(flat).1) <= 0.0 {
                assert_eq!(*c, ZERO);
            }
        }
        let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let combo = solve_periodic(&op, &f.scaled(a).add(&g.scaled(b)).unwrap()).unwrap();
        let sep = u.scaled(a).add(&solve_periodic(&op, &g).unwrap().scaled(b)).unwrap();
        let err: f64 = combo.samples().iter().zip(sep.samples()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * sep.max_abs());
    }

    #[test]
    fn residual_is_second_order() {
        let op = PeriodicParabolicOperator::heat(2, 2.0 * PI, 1.0).unwrap();
        let forcing = |x: &[f64], t: f64| {
            if (0.0..=1.0).contains(&t) {
                Complex64::new((x[0] + 2.0 * x[1]).cos() * (1.5 * t).sin() * t, 0.0)
            } else {
                ZERO
            }
        };
        let r1 = residual(&op, lat(8, 32), forcing).unwrap();
        let r2 = residual(&op, lat(8, 64), forcing).unwrap();
        assert!(r1 < 1e-2);
        assert!((r1 / r2 - 4.0).abs() < 0.4, "{r1} {r2}");
    }

    #[test]
    fn stability_and_kappa_errors() {
        let mut lower = BTreeMap::new();
        lower.insert(vec![0, 0], Complex64::new(-2.0, 0.0));
        let op = PeriodicParabolicOperator::new(PrincipalSymbol::heat(2), lower, 2.0 * PI, 1.0).unwrap();
        let err = solve_periodic(&op, &GridFunction::zeros(lat(4, 8))).unwrap_err();
        assert!(matches!(err, Error::Stability { .. }));
        assert!(PeriodicParabolicOperator::new(PrincipalSymbol::backward_heat(2), BTreeMap::new(), 1.0, 1.0).is_err());
    }

    #[test]
    fn constant_in_space_is_time_derivative() {
        let op = PeriodicParabolicOperator::heat(2, 2.0 * PI, 1.0).unwrap();
        let l = lat(4, 16);
        let u = GridFunction::from_fn(l, |_, t| Complex64::new((PI * t / 2.0).sin(), 0.0));
        let au = apply_operator(&op, &u).unwrap();
        for (flat, c) in au.samples().iter().enumerate() {
            let t = l.time(l.split(flat).1);
            assert!((c.re - PI / 2.0 * (PI * t / 2.0).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_forcing_gives_equal_bounds() {
        let op = PeriodicParabolicOperator::heat(2, 2.0 * PI, 1.0).unwrap();
        let f = band_limited_forcing(lat(8, 16), 1.0, 1, 3);
        let (lo, hi) = two_sided_ratio(&op, &[f], 4.0, &PhiFunction::constant_one()).unwrap();
        assert_eq!(lo, hi);
        assert!(lo > 0.0 && lo.is_finite());
        assert!(two_sided_ratio(&op, &[], 4.0, &PhiFunction::constant_one()).is_err());
        let z = GridFunction::zeros(lat(8, 16));
        assert!(two_sided_ratio(&op, &[z], 4.0, &PhiFunction::constant_one()).is_err());
    }

    #[test]
    fn borderline_decay_is_flagged() {
        let op = PeriodicParabolicOperator::heat(1, 2.0 * PI, 1.0).unwrap();
        let ladder: Vec<_> = [16, 32, 64, 128].iter().map(|&n| Lattice::standard(1, n, 128, 4.0).unwrap()).collect();
        let phi = PhiFunction::constant_one();
        let good = regularity_inheritance_check(&op, 4.0, &phi, 0.5, &ladder, 7).unwrap();
        let edge = regularity_inheritance_check(&op, 4.0, &phi, 0.0, &ladder, 7).unwrap();
        assert!(!good.flagged, "{good:?}");
        assert!(edge.flagged, "{edge:?}");
        assert!(good.step_ratios.iter().all(|&r| r < 1.01));
    }
}
