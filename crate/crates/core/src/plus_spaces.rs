//! Support-constrained ("plus") norms.
//!
//! Given values `u` on a region `V`, the plus norm is the smallest weighted
//! spectral norm over all lattice functions `w` with `w = u` on `V` and
//! `w = 0` at every point with `t < 0`. The quadratic form
//! `‖w‖² = w* M w` has the circulant Gram matrix
//!
//! ```text
//! M_{ab} = cell_volume / N · Σ_κ W(κ) exp(2πi κ·(a − b)/N)
//! ```
//!
//! so the minimizer solves `M_FF w_F = −M_FC u_C` on the free points `F`
//! with the constrained points `C` held fixed. When both masks depend on the
//! time index only, `M` is block diagonal in the spatial Fourier basis and
//! the problem splits into one small system per spatial mode.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectra::{
    dft, fft_nd, fft_space, fft_time, idft, weighted_norm, AnisotropicIndex, GridFunction, Lattice,
};

/// Above this estimated condition number the normal equations are
/// regularized by `REGULARIZATION · λ_max`.
pub const CONDITION_LIMIT: f64 = 1e12;
pub const REGULARIZATION: f64 = 1e-12;

/// Largest free set handled by the dense (non-separable) path.
pub const DENSE_LIMIT: usize = 4096;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    lattice: Lattice,
    v_mask: Vec<bool>,
    t_nonneg_mask: Vec<bool>,
}

impl RegionMask {
    pub fn new(lattice: Lattice, v_mask: Vec<bool>, t_nonneg_mask: Vec<bool>) -> Result<Self> {
        for m in [&v_mask, &t_nonneg_mask] {
            if m.len() != lattice.len() {
                return Err(Error::Shape {
                    expected: lattice.len(),
                    got: m.len(),
                });
            }
        }
        Ok(RegionMask {
            lattice,
            v_mask,
            t_nonneg_mask,
        })
    }

    /// `V = {t_lo < t < t_hi}` over all of space, support in `t ≥ 0`.
    pub fn time_window(lattice: Lattice, t_lo: f64, t_hi: f64) -> Self {
        Self::from_time_predicate(lattice, |t| t > t_lo && t < t_hi)
    }

    /// `V` given by a predicate on time, support in `t ≥ 0`.
    pub fn from_time_predicate(lattice: Lattice, in_v: impl Fn(f64) -> bool) -> Self {
        let z = lattice.zero_time_index();
        let n = lattice.len();
        let mut v_mask = Vec::with_capacity(n);
        let mut t_nonneg_mask = Vec::with_capacity(n);
        for flat in 0..n {
            let (_, j) = lattice.split(flat);
            v_mask.push(in_v(lattice.time(j)));
            t_nonneg_mask.push(j >= z);
        }
        RegionMask {
            lattice,
            v_mask,
            t_nonneg_mask,
        }
    }

    /// Same `V`, no support constraint.
    pub fn without_support(&self) -> Self {
        RegionMask {
            lattice: self.lattice,
            v_mask: self.v_mask.clone(),
            t_nonneg_mask: vec![true; self.lattice.len()],
        }
    }

    /// Same support constraint, `V` replaced.
    pub fn with_v_mask(&self, v_mask: Vec<bool>) -> Result<Self> {
        Self::new(self.lattice, v_mask, self.t_nonneg_mask.clone())
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn v_mask(&self) -> &[bool] {
        &self.v_mask
    }

    pub fn t_nonneg_mask(&self) -> &[bool] {
        &self.t_nonneg_mask
    }

    pub fn v_count(&self) -> usize {
        self.v_mask.iter().filter(|&&b| b).count()
    }

    /// Values of `g` at the points of `V`, in flat order.
    pub fn restrict(&self, g: &GridFunction) -> Result<Vec<Complex64>> {
        if g.lattice() != &self.lattice {
            return Err(Error::Argument("grid and region lattices differ".into()));
        }
        Ok(g.samples()
            .iter()
            .zip(&self.v_mask)
            .filter(|(_, &v)| v)
            .map(|(c, _)| *c)
            .collect())
    }

    /// Per-time masks if both masks are constant along space.
    fn time_profile(&self) -> Option<(Vec<bool>, Vec<bool>)> {
        let n_t = self.lattice.n_t;
        let v0 = self.v_mask[..n_t].to_vec();
        let t0 = self.t_nonneg_mask[..n_t].to_vec();
        let uniform = self
            .v_mask
            .chunks(n_t)
            .zip(self.t_nonneg_mask.chunks(n_t))
            .all(|(v, t)| v == v0.as_slice() && t == t0.as_slice());
        uniform.then_some((v0, t0))
    }
}

/// Result of a least-norm extension.
#[derive(Debug, Clone)]
pub struct PlusNorm {
    pub norm: f64,
    pub extension: GridFunction,
    /// Largest condition number met among the solved blocks.
    pub condition: f64,
    pub regularized: bool,
}

/// Linear map from fixed values to free values for one block.
#[derive(Debug, Clone)]
struct Block {
    free: Vec<usize>,
    fixed: Vec<usize>,
    gain: DMatrix<Complex64>,
    condition: f64,
    regularized: bool,
}

impl Block {
    /// Builds `−M_FF⁻¹ M_FC` from a Gram entry function.
    fn new(
        free: Vec<usize>,
        fixed: Vec<usize>,
        gram: impl Fn(usize, usize) -> Complex64,
    ) -> Result<Self> {
        if free.is_empty() {
            return Ok(Block {
                gain: DMatrix::zeros(0, fixed.len()),
                free,
                fixed,
                condition: 1.0,
                regularized: false,
            });
        }
        let nf = free.len();
        let mff = DMatrix::from_fn(nf, nf, |a, b| gram(free[a], free[b]));
        let mfc = DMatrix::from_fn(nf, fixed.len(), |a, b| gram(free[a], fixed[b]));
        let eig = SymmetricEigen::new(mff);
        let lmax = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(lmax > 0.0 && lmax.is_finite()) {
            return Err(Error::Conditioning {
                detail: format!("Gram block of size {nf} has no positive spectrum (λmax = {lmax:e})"),
                condition: f64::INFINITY,
            });
        }
        let condition = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
        let regularized = condition > CONDITION_LIMIT;
        let shift = if regularized { REGULARIZATION * lmax } else { 0.0 };
        let inv = DVector::from_iterator(
            nf,
            eig.eigenvalues.iter().map(|&l| Complex64::new(1.0 / (l.max(0.0) + shift), 0.0)),
        );
        let q = &eig.eigenvectors;
        let scaled = DMatrix::from_fn(nf, nf, |a, b| q[(a, b)] * inv[b]);
        let gain = -(scaled * q.adjoint() * mfc);
        Ok(Block {
            free,
            fixed,
            gain,
            condition,
            regularized,
        })
    }

    fn apply(&self, values: &mut [Complex64], base: usize, stride: usize) {
        if self.free.is_empty() {
            return;
        }
        let c = DVector::from_iterator(self.fixed.len(), self.fixed.iter().map(|&i| values[base + i * stride]));
        let f = &self.gain * c;
        for (a, &i) in self.free.iter().enumerate() {
            values[base + i * stride] = f[a];
        }
    }
}

#[derive(Debug, Clone)]
enum Layout {
    /// One block per distinct weight row, shared across spatial modes.
    Separable { blocks: Vec<Block>, mode_block: Vec<usize> },
    Dense(Block),
}

/// Precomputed least-norm extension for a fixed weight and region.
#[derive(Debug, Clone)]
pub struct PlusSolver {
    region: RegionMask,
    weights2: Vec<f64>,
    cell_volume: f64,
    layout: Layout,
}

impl PlusSolver {
    pub fn new(idx: &AnisotropicIndex, region: &RegionMask) -> Result<Self> {
        let weights2 = idx.weights2(region.lattice());
        Self::with_weights(weights2, region)
    }

    /// Solver for an arbitrary positive squared-weight array.
    pub fn with_weights(weights2: Vec<f64>, region: &RegionMask) -> Result<Self> {
        let lat = *region.lattice();
        if weights2.len() != lat.len() {
            return Err(Error::Shape {
                expected: lat.len(),
                got: weights2.len(),
            });
        }
        if region.v_count() == 0 {
            return Err(Error::Argument("region V is empty".into()));
        }
        let cell_volume = lat.cell_volume();
        let layout = match region.time_profile() {
            Some((v, t)) => separable_layout(&lat, &weights2, cell_volume, &v, &t)?,
            None => dense_layout(&lat, &weights2, cell_volume, region)?,
        };
        Ok(PlusSolver {
            region: region.clone(),
            weights2,
            cell_volume,
            layout,
        })
    }

    pub fn region(&self) -> &RegionMask {
        &self.region
    }

    pub fn weights2(&self) -> &[f64] {
        &self.weights2
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.layout, Layout::Separable { .. })
    }

    /// Least-norm extension of values given on `V` (flat order).
    pub fn solve(&self, u_on_v: &[Complex64]) -> Result<PlusNorm> {
        let lat = *self.region.lattice();
        let nv = self.region.v_count();
        if u_on_v.len() != nv {
            return Err(Error::Shape {
                expected: nv,
                got: u_on_v.len(),
            });
        }
        let mut w = vec![ZERO; lat.len()];
        let mut it = u_on_v.iter();
        for (flat, (&v, &t)) in self.region.v_mask.iter().zip(&self.region.t_nonneg_mask).enumerate() {
            if v {
                let val = *it.next().unwrap();
                if !t && val != ZERO {
                    return Err(Error::Infeasible(format!(
                        "nonzero value at t = {} < 0 inside V",
                        lat.time(lat.split(flat).1)
                    )));
                }
                w[flat] = val;
            }
        }
        let exact = w.clone();

        let (condition, regularized) = match &self.layout {
            Layout::Dense(block) => {
                block.apply(&mut w, 0, 1);
                (block.condition, block.regularized)
            }
            Layout::Separable { blocks, mode_block } => {
                fft_space(&mut w, &lat, false);
                for (s, &b) in mode_block.iter().enumerate() {
                    blocks[b].apply(&mut w, s * lat.n_t, 1);
                }
                fft_space(&mut w, &lat, true);
                let cond = blocks.iter().map(|b| b.condition).fold(1.0, f64::max);
                (cond, blocks.iter().any(|b| b.regularized))
            }
        };
        // Fixed entries are restored exactly; round-off only touches free ones.
        for (flat, (&v, &t)) in self.region.v_mask.iter().zip(&self.region.t_nonneg_mask).enumerate() {
            if v {
                w[flat] = exact[flat];
            } else if !t {
                w[flat] = ZERO;
            }
        }
        let extension = GridFunction::new(lat, w)?;
        let norm = weighted_norm(dft(&extension).coeffs(), &self.weights2, self.cell_volume);
        Ok(PlusNorm {
            norm,
            extension,
            condition,
            regularized,
        })
    }
}

fn separable_layout(
    lat: &Lattice,
    weights2: &[f64],
    cell_volume: f64,
    v: &[bool],
    t: &[bool],
) -> Result<Layout> {
    let n_t = lat.n_t;
    let fixed: Vec<usize> = (0..n_t).filter(|&j| v[j] || !t[j]).collect();
    let free: Vec<usize> = (0..n_t).filter(|&j| !v[j] && t[j]).collect();
    let mut by_row: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut blocks = Vec::new();
    let mut mode_block = Vec::with_capacity(lat.spatial_len());
    for row in weights2.chunks(n_t) {
        let key: Vec<u64> = row.iter().map(|w| w.to_bits()).collect();
        let b = match by_row.get(&key) {
            Some(&b) => b,
            None => {
                // kernel(d) = cv/n_t Σ_η W(η) e^{2πiηd/n_t}
                let mut kernel: Vec<Complex64> = row.iter().map(|&w| Complex64::new(w, 0.0)).collect();
                fft_nd(&mut kernel, &[n_t], true);
                let scale = cell_volume / (n_t as f64).sqrt();
                let block = Block::new(free.clone(), fixed.clone(), |a, b| {
                    kernel[(a + n_t - b) % n_t] * scale
                })?;
                blocks.push(block);
                by_row.insert(key, blocks.len() - 1);
                blocks.len() - 1
            }
        };
        mode_block.push(b);
    }
    Ok(Layout::Separable { blocks, mode_block })
}

fn dense_layout(lat: &Lattice, weights2: &[f64], cell_volume: f64, region: &RegionMask) -> Result<Layout> {
    let n = lat.len();
    let free: Vec<usize> = (0..n).filter(|&i| !region.v_mask[i] && region.t_nonneg_mask[i]).collect();
    let fixed: Vec<usize> = (0..n).filter(|&i| region.v_mask[i] || !region.t_nonneg_mask[i]).collect();
    if free.len() > DENSE_LIMIT {
        return Err(Error::Argument(format!(
            "region is not time-separable and has {} free points (limit {DENSE_LIMIT})",
            free.len()
        )));
    }
    let mut kernel: Vec<Complex64> = weights2.iter().map(|&w| Complex64::new(w, 0.0)).collect();
    fft_nd(&mut kernel, &lat.shape(), true);
    let scale = cell_volume / (n as f64).sqrt();
    let shape = lat.shape();
    let diff = |a: usize, b: usize| {
        let mut ra = a;
        let mut rb = b;
        let mut idx = 0;
        let mut stride = 1;
        for &m in shape.iter().rev() {
            let d = (ra % m + m - rb % m) % m;
            idx += d * stride;
            stride *= m;
            ra /= m;
            rb /= m;
        }
        idx
    };
    let block = Block::new(free, fixed, |a, b| kernel[diff(a, b)] * scale)?;
    Ok(Layout::Dense(block))
}

/// Smallest weighted norm of an extension of `u_on_v` vanishing for `t < 0`.
pub fn plus_norm(u_on_v: &[Complex64], idx: &AnisotropicIndex, region: &RegionMask) -> Result<PlusNorm> {
    PlusSolver::new(idx, region)?.solve(u_on_v)
}

/// Smallest weighted norm of any extension of `u_on_v` (no support constraint).
pub fn factor_norm(u_on_v: &[Complex64], idx: &AnisotropicIndex, region: &RegionMask) -> Result<PlusNorm> {
    PlusSolver::new(idx, &region.without_support())?.solve(u_on_v)
}

/// `M w` for the Gram matrix of the weighted norm.
pub fn gram_apply(w: &GridFunction, weights2: &[f64]) -> GridFunction {
    let mut spec = dft(w);
    let cv = w.lattice().cell_volume();
    for (c, &wt) in spec.coeffs_mut().iter_mut().zip(weights2) {
        *c *= wt * cv;
    }
    idft(&spec)
}

fn check_half_integer(s: f64, gamma: f64) -> Result<()> {
    let x = s * gamma - 0.5;
    if (x - x.round()).abs() < 1e-12 {
        return Err(Error::Unsupported(format!("s·γ − 1/2 = {x} is an integer")));
    }
    Ok(())
}

/// `k`-th spectral time derivative of `g`.
pub fn time_derivative(g: &GridFunction, order: u32) -> GridFunction {
    let lat = *g.lattice();
    let mut data = g.samples().to_vec();
    fft_time(&mut data, &lat, false);
    let nyquist = lat.n_t / 2;
    for (flat, c) in data.iter_mut().enumerate() {
        let j = flat % lat.n_t;
        if order % 2 == 1 && j == nyquist {
            *c = ZERO;
        } else {
            *c *= Complex64::new(0.0, lat.eta(j)).powu(order);
        }
    }
    fft_time(&mut data, &lat, true);
    GridFunction::new(lat, data).expect("lattice unchanged")
}

/// Spatial L₂ norms of `∂_t^k g` at `t = 0` for every integer `0 ≤ k < sγ − 1/2`.
pub fn trace_defect(g: &GridFunction, gamma: f64, s: f64) -> Result<Vec<f64>> {
    check_half_integer(s, gamma)?;
    let lat = *g.lattice();
    let bound = s * gamma - 0.5;
    let z = lat.zero_time_index();
    let cell = lat.dx().powi(lat.k as i32);
    let mut out = Vec::new();
    let mut k = 0u32;
    while (k as f64) < bound {
        let d = time_derivative(g, k);
        let sum: f64 = (0..lat.spatial_len()).map(|s| d.samples()[s * lat.n_t + z].norm_sqr()).sum();
        out.push((cell * sum).sqrt());
        k += 1;
    }
    Ok(out)
}

/// Ratio of the plus norm of `g|_V` to its unconstrained factor norm.
pub fn lemma51_equivalence_ratio(g: &GridFunction, idx: &AnisotropicIndex, region: &RegionMask) -> Result<f64> {
    if idx.s <= 0.0 {
        return Err(Error::Unsupported(format!("s must be positive, got {}", idx.s)));
    }
    check_half_integer(idx.s, idx.gamma)?;
    let u = region.restrict(g)?;
    let plus = plus_norm(&u, idx, region)?.norm;
    let free = factor_norm(&u, idx, region)?.norm;
    if free == 0.0 {
        return Ok(1.0);
    }
    Ok(plus / free)
}
