//! Interpolation with a function parameter for pairs diagonal in the DFT basis.
//!
//! For a pair with weights `μ₀ ≤ μ₁` the generating operator is the
//! multiplier `J = μ₁/μ₀`, and the interpolation space `X_ψ` carries the
//! norm `‖ψ(J) g‖_{X₀}`. With the parameter
//!
//! ```text
//! ψ(r) = r^θ φ(r^{1/(s₁−s₀)})   (r ≥ 1),    ψ(r) = φ(1)   (0 < r < 1),
//! θ = (s − s₀)/(s₁ − s₀)
//! ```
//!
//! and the Sobolev pair `μ_j = r_γ^{s_j}`, one has
//! `ψ(r_γ^{s₁−s₀}) = r_γ^{s−s₀} φ(r_γ)` pointwise, so `X_ψ` carries exactly
//! the norm of index `(s, γ, φ)`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::class_m::PhiFunction;
use crate::error::{Error, Result};
use crate::plus_spaces::{PlusSolver, RegionMask};
use crate::spectra::{dft, hnorm, r_gamma, AnisotropicIndex, GridFunction, Lattice};

/// Hilbert pair `[X₀, X₁]` given by spectral weights with `μ₁ ≥ μ₀ > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPair {
    lattice: Lattice,
    mu0: Vec<f64>,
    mu1: Vec<f64>,
}

impl DiagonalPair {
    pub fn new(lattice: Lattice, mu0: Vec<f64>, mu1: Vec<f64>) -> Result<Self> {
        for m in [&mu0, &mu1] {
            if m.len() != lattice.len() {
                return Err(Error::Shape {
                    expected: lattice.len(),
                    got: m.len(),
                });
            }
        }
        if let Some(i) = mu0.iter().zip(&mu1).position(|(&a, &b)| !(a > 0.0 && b >= a && b.is_finite())) {
            return Err(Error::Argument(format!(
                "pair is not admissible at index {i}: mu0 = {}, mu1 = {}",
                mu0[i], mu1[i]
            )));
        }
        Ok(DiagonalPair { lattice, mu0, mu1 })
    }

    /// `μ_j = r_γ^{s_j}` on the lattice.
    pub fn sobolev(lattice: Lattice, s0: f64, s1: f64, gamma: f64) -> Result<Self> {
        if s1 < s0 {
            return Err(Error::Argument(format!("need s0 <= s1, got {s0} > {s1}")));
        }
        let r = lattice.map_frequencies(|xi, eta| r_gamma(xi, eta, gamma));
        let mu0 = r.iter().map(|r| r.powf(s0)).collect();
        let mu1 = r.iter().map(|r| r.powf(s1)).collect();
        Self::new(lattice, mu0, mu1)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn mu0(&self) -> &[f64] {
        &self.mu0
    }

    pub fn mu1(&self) -> &[f64] {
        &self.mu1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpParameter {
    pub s0: f64,
    pub s: f64,
    pub s1: f64,
    pub phi: PhiFunction,
    pub theta: f64,
}

pub fn build_psi(s0: f64, s: f64, s1: f64, phi: PhiFunction) -> Result<InterpParameter> {
    if !(s0 < s && s < s1) {
        return Err(Error::Argument(format!("expected s0 < s < s1, got {s0}, {s}, {s1}")));
    }
    Ok(InterpParameter {
        s0,
        s,
        s1,
        theta: (s - s0) / (s1 - s0),
        phi,
    })
}

impl InterpParameter {
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("psi needs r > 0, got {r}")));
        }
        Ok(self.eval_unchecked(r))
    }

    pub fn eval_unchecked(&self, r: f64) -> f64 {
        if r < 1.0 {
            self.phi.eval_unchecked(1.0)
        } else {
            r.powf(self.theta) * self.phi.eval_unchecked(r.powf(1.0 / (self.s1 - self.s0)))
        }
    }
}

pub fn eval_psi(p: &InterpParameter, r: f64) -> Result<f64> {
    p.eval(r)
}

/// Mean of `log₂(ψ(2r)/ψ(r))` over the upper half of the ladder.
pub fn regular_variation_index(p: &InterpParameter, r_ladder: &[f64]) -> Result<f64> {
    if r_ladder.len() < 3 {
        return Err(Error::Argument("ladder needs at least 3 points".into()));
    }
    if r_ladder.windows(2).any(|w| !(w[0] < w[1])) || r_ladder[0] < 1.0 {
        return Err(Error::Argument("ladder must be ascending and >= 1".into()));
    }
    let tail = &r_ladder[r_ladder.len() / 2..];
    let sum: f64 = tail
        .iter()
        .map(|&r| (p.eval_unchecked(2.0 * r) / p.eval_unchecked(r)).log2())
        .sum();
    Ok(sum / tail.len() as f64)
}

/// The multiplier `μ₁/μ₀`.
pub fn generating_operator(pair: &DiagonalPair) -> Vec<f64> {
    pair.mu1.iter().zip(&pair.mu0).map(|(a, b)| a / b).collect()
}

fn interp_energy(coeffs: &[Complex64], mu0: &[f64], mu1: &[f64], cell_volume: f64, p: &InterpParameter) -> f64 {
    let sum: f64 = coeffs
        .iter()
        .zip(mu0.iter().zip(mu1))
        .map(|(c, (&a, &b))| {
            let w = a * p.eval_unchecked(b / a);
            w * w * c.norm_sqr()
        })
        .sum();
    cell_volume * sum
}

/// `‖ψ(J) g‖_{X₀}`.
pub fn interp_norm(g: &GridFunction, pair: &DiagonalPair, p: &InterpParameter) -> Result<f64> {
    if g.lattice() != &pair.lattice {
        return Err(Error::Argument("grid and pair lattices differ".into()));
    }
    let spec = dft(g);
    Ok(interp_energy(spec.coeffs(), &pair.mu0, &pair.mu1, pair.lattice.cell_volume(), p).sqrt())
}

/// Interpolation norm of the Sobolev pair `(s0, s1)` divided by the norm of
/// index `(s, γ, φ)`; `1` for `g = 0`.
pub fn verify_lemma71(g: &GridFunction, s0: f64, s: f64, s1: f64, gamma: f64, phi: PhiFunction) -> Result<f64> {
    let p = build_psi(s0, s, s1, phi.clone())?;
    let pair = DiagonalPair::sobolev(*g.lattice(), s0, s1, gamma)?;
    let lhs = interp_norm(g, &pair, &p)?;
    let rhs = hnorm(g, &AnisotropicIndex::new(s, gamma, phi)?);
    if rhs == 0.0 {
        return Ok(if lhs == 0.0 { 1.0 } else { f64::INFINITY });
    }
    Ok(lhs / rhs)
}

/// Gram matrix of the quadratic form `u ↦ ‖u‖²` of a least-norm extension.
pub fn plus_gram(solver: &PlusSolver) -> Result<DMatrix<Complex64>> {
    let nv = solver.region().v_count();
    let mut ext = Vec::with_capacity(nv);
    let mut e = vec![Complex64::new(0.0, 0.0); nv];
    for i in 0..nv {
        e[i] = Complex64::new(1.0, 0.0);
        ext.push(dft(&solver.solve(&e)?.extension).into_coeffs());
        e[i] = Complex64::new(0.0, 0.0);
    }
    let w2 = solver.weights2();
    let cv = solver.region().lattice().cell_volume();
    let mut g = DMatrix::from_element(nv, nv, Complex64::new(0.0, 0.0));
    for i in 0..nv {
        for j in i..nv {
            let v: Complex64 = ext[i]
                .iter()
                .zip(&ext[j])
                .zip(w2)
                .map(|((a, b), &w)| a.conj() * b * w)
                .sum::<Complex64>()
                * cv;
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    Ok(g)
}

/// Interpolation norm between two Hilbert norms on `ℂᵈ` with Gram matrices
/// `g0 ≤ g1`: with `g0 = LL*` and `L⁻¹ g1 L⁻* = Q Λ Q*`,
/// `‖v‖² = Σ ψ(λᵢ^{1/2})² |(Q* L* v)ᵢ|²`.
pub fn interp_gram_norm(
    g0: &DMatrix<Complex64>,
    g1: &DMatrix<Complex64>,
    v: &DVector<Complex64>,
    p: &InterpParameter,
) -> Result<f64> {
    let chol = Cholesky::new(g0.clone())
        .ok_or_else(|| Error::Numeric("lower Gram matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv_g1 = l
        .solve_lower_triangular(g1)
        .ok_or_else(|| Error::Numeric("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&linv_g1.adjoint())
        .ok_or_else(|| Error::Numeric("singular Cholesky factor".into()))?;
    let c = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(c);
    let y = eig.eigenvectors.adjoint() * (l.adjoint() * v);
    let sum: f64 = eig
        .eigenvalues
        .iter()
        .zip(y.iter())
        .map(|(&lam, yi)| {
            let psi = p.eval_unchecked(lam.max(0.0).sqrt());
            psi * psi * yi.norm_sqr()
        })
        .sum();
    Ok(sum.sqrt())
}

/// Interpolated plus norm between orders `s0` and `s1` against the plus
/// norm of index `(s, γ, φ)`, both for the values of `g` on `V`.
pub fn interp_subspace_norm(
    g_on_plus: &GridFunction,
    region: &RegionMask,
    s0: f64,
    s: f64,
    s1: f64,
    gamma: f64,
    phi: PhiFunction,
) -> Result<(f64, f64)> {
    if s0 < 0.0 {
        return Err(Error::Argument(format!("s0 must be nonnegative, got {s0}")));
    }
    if g_on_plus
        .samples()
        .iter()
        .zip(region.t_nonneg_mask())
        .any(|(c, &t)| !t && c.norm() != 0.0)
    {
        return Err(Error::Argument("function is not supported in t >= 0".into()));
    }
    let p = build_psi(s0, s, s1, phi.clone())?;
    let u = DVector::from_vec(region.restrict(g_on_plus)?);
    if u.iter().all(|c| c.norm() == 0.0) {
        return Ok((0.0, 0.0));
    }
    let g0 = plus_gram(&PlusSolver::new(&AnisotropicIndex::sobolev(s0, gamma)?, region)?)?;
    let g1 = plus_gram(&PlusSolver::new(&AnisotropicIndex::sobolev(s1, gamma)?, region)?)?;
    let lhs = interp_gram_norm(&g0, &g1, &u, &p)?;
    let rhs = PlusSolver::new(&AnisotropicIndex::new(s, gamma, phi)?, region)?
        .solve(u.as_slice())?
        .norm;
    Ok((lhs, rhs))
}

/// Interpolation norm on the direct sum of pairs against the root sum of
/// squares of the summand norms.
pub fn direct_sum_interp_check(
    pairs: &[DiagonalPair],
    g_list: &[GridFunction],
    p: &InterpParameter,
) -> Result<(f64, f64)> {
    if pairs.len() != g_list.len() || pairs.is_empty() {
        return Err(Error::Argument(format!(
            "{} pairs for {} inputs",
            pairs.len(),
            g_list.len()
        )));
    }
    let mut coeffs = Vec::new();
    let mut mu0 = Vec::new();
    let mut mu1 = Vec::new();
    let mut rhs2 = 0.0;
    for (pair, g) in pairs.iter().zip(g_list) {
        rhs2 += interp_norm(g, pair, p)?.powi(2);
        // fold the cell volume into the weights so one sum covers all summands
        let c = pair.lattice.cell_volume().sqrt();
        coeffs.extend(dft(g).into_coeffs());
        mu0.extend(pair.mu0.iter().map(|m| m * c));
        mu1.extend(pair.mu1.iter().map(|m| m * c));
    }
    let lhs = interp_energy(&coeffs, &mu0, &mu1, 1.0, p).sqrt();
    Ok((lhs, rhs2.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::E;

    fn random_grid(lat: Lattice, rng: &mut ChaCha8Rng) -> GridFunction {
        let v = (0..lat.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        GridFunction::new(lat, v).unwrap()
    }

    #[test]
    fn psi_examples() {
        let p = build_psi(0.0, 1.0, 2.0, PhiFunction::constant_one()).unwrap();
        assert_eq!(p.eval(9.0).unwrap(), 3.0);
        assert_eq!(p.eval(0.25).unwrap(), 1.0);
        let log = PhiFunction::log_power(vec![1.0]).unwrap();
        let p = build_psi(0.0, 1.0, 2.0, log.clone()).unwrap();
        // 4^{1/2} = 2 lies below the cutoff e, where φ is continued by φ(e) = 1
        assert!((p.eval(4.0).unwrap() - 2.0).abs() < 1e-15);
        let r = E.powi(6);
        assert!((p.eval(r).unwrap() - E.powi(3) * 3.0).abs() < 1e-12 * r);
        let p = build_psi(0.0, 1.0, 2.0, PhiFunction::log_power(vec![1.0]).unwrap()).unwrap();
        assert_eq!(p.eval(0.5).unwrap(), p.phi.eval(1.0).unwrap());
        assert!(p.eval(0.0).is_err());
        assert!(build_psi(1.0, 1.0, 2.0, log).is_err());
    }

    #[test]
    fn regular_variation_examples() {
        let ladder: Vec<f64> = (1..=12).map(|e| 10f64.powi(e)).collect();
        let p = build_psi(0.0, 1.0, 2.0, PhiFunction::constant_one()).unwrap();
        assert!((regular_variation_index(&p, &ladder).unwrap() - 0.5).abs() < 1e-14);
        let p = build_psi(0.0, 0.5, 2.0, PhiFunction::constant_one()).unwrap();
        assert!((regular_variation_index(&p, &ladder).unwrap() - 0.25).abs() < 1e-14);

        // log case: index(r) = θ + log₂(1 + ln 2 / ln r) with ψ(r) = r^{1/2} ln(r^{1/2})
        let p = build_psi(0.0, 1.0, 2.0, PhiFunction::log_power(vec![1.0]).unwrap()).unwrap();
        let r = 1e12;
        let est = regular_variation_index(&p, &[r / 4.0, r / 2.0, r]).unwrap();
        let idx = |r: f64| 0.5 + (1.0 + 2f64.ln() / r.ln()).log2();
        let want = 0.5 * (idx(r / 2.0) + idx(r));
        assert!((est - want).abs() < 1e-12);
        let far = regular_variation_index(&p, &[1e60, 1e70, 1e80]).unwrap();
        assert!((far - 0.5).abs() < 1e-2 && (far - 0.5) < (est - 0.5));
        assert!(regular_variation_index(&p, &[2.0, 4.0]).is_err());
    }

    #[test]
    fn generating_operator_examples() {
        let lat = Lattice::standard(1, 4, 4, 1.0).unwrap();
        let mu = vec![2.0; lat.len()];
        let pair = DiagonalPair::new(lat, mu.clone(), mu).unwrap();
        assert!(generating_operator(&pair).iter().all(|&j| j == 1.0));
        let pair = DiagonalPair::sobolev(lat, 1.0, 3.0, 0.5).unwrap();
        let r = lat.map_frequencies(|xi, eta| r_gamma(xi, eta, 0.5));
        for (j, r) in generating_operator(&pair).iter().zip(r) {
            assert!((j - r * r).abs() < 1e-12 * j);
        }
        assert!(DiagonalPair::new(lat, vec![2.0; 16], vec![1.0; 16]).is_err());
    }

    #[test]
    fn interp_norm_single_mode() {
        let lat = Lattice::standard(1, 8, 8, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mu0: Vec<f64> = (0..lat.len()).map(|_| rng.random_range(0.5..2.0)).collect();
        let mu1: Vec<f64> = mu0.iter().map(|m| m * rng.random_range(1.0..50.0)).collect();
        let pair = DiagonalPair::new(lat, mu0.clone(), mu1.clone()).unwrap();
        let p = build_psi(0.0, 0.7, 2.0, PhiFunction::log_power(vec![-1.0]).unwrap()).unwrap();
        let flat = 19;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); lat.len()];
        coeffs[flat] = Complex64::new(0.6, -0.8);
        let g = crate::spectra::idft(&crate::spectra::SpectralField::new(lat, coeffs).unwrap());
        let want = mu0[flat] * p.eval(mu1[flat] / mu0[flat]).unwrap() * lat.cell_volume().sqrt();
        let got = interp_norm(&g, &pair, &p).unwrap();
        assert!((got - want).abs() < 1e-13 * want);
    }

    #[test]
    fn interpolation_norm_pointwise_and_ratio() {
        let lat = Lattice::standard(2, 8, 8, 3.0).unwrap();
        let phi = PhiFunction::log_power(vec![2.0, -1.0]).unwrap();
        let (s0, s, s1, gamma) = (0.5, 1.7, 3.0, 0.5);
        let p = build_psi(s0, s, s1, phi.clone()).unwrap();
        lat.map_frequencies(|xi, eta| {
            let r = r_gamma(xi, eta, gamma);
            let lhs = p.eval_unchecked(r.powf(s1 - s0));
            let rhs = r.powf(s - s0) * phi.eval_unchecked(r);
            assert!((lhs - rhs).abs() <= 1e-13 * rhs);
        });
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_grid(lat, &mut rng);
        let ratio = verify_lemma71(&g, s0, s, s1, gamma, phi.clone()).unwrap();
        assert!((ratio - 1.0).abs() < 1e-12);
        assert_eq!(verify_lemma71(&GridFunction::zeros(lat), s0, s, s1, gamma, phi).unwrap(), 1.0);
    }

    #[test]
    fn direct_sum_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = build_psi(0.0, 1.0, 2.0, PhiFunction::log_power(vec![1.0]).unwrap()).unwrap();
        let lat = Lattice::standard(1, 4, 8, 1.0).unwrap();
        let pair = DiagonalPair::sobolev(lat, 0.0, 2.0, 0.5).unwrap();
        let g = random_grid(lat, &mut rng);
        let (l, r) = direct_sum_interp_check(std::slice::from_ref(&pair), std::slice::from_ref(&g), &p).unwrap();
        assert!((l - r).abs() <= 1e-13 * r);
        let (l, _) = direct_sum_interp_check(&[pair.clone(), pair.clone()], &[g.clone(), GridFunction::zeros(lat)], &p)
            .unwrap();
        assert!((l - interp_norm(&g, &pair, &p).unwrap()).abs() <= 1e-13 * l);
        assert!(direct_sum_interp_check(&[pair], &[], &p).is_err());
    }

    #[test]
    fn gram_interpolation_reduces_to_diagonal_case() {
        // diagonal Gram matrices reproduce the multiplier formula
        let p = build_psi(0.0, 1.0, 2.0, PhiFunction::log_power_with_cutoff(vec![1.0], E).unwrap()).unwrap();
        let d0 = [1.0, 2.0, 0.5];
        let d1 = [3.0, 200.0, 0.5];
        let g0 = DMatrix::from_fn(3, 3, |i, j| Complex64::new(if i == j { d0[i] } else { 0.0 }, 0.0));
        let g1 = DMatrix::from_fn(3, 3, |i, j| Complex64::new(if i == j { d1[i] } else { 0.0 }, 0.0));
        let v = DVector::from_vec(vec![Complex64::new(1.0, 1.0), Complex64::new(-0.5, 0.0), Complex64::new(0.0, 2.0)]);
        let got = interp_gram_norm(&g0, &g1, &v, &p).unwrap();
        let want: f64 = (0..3)
            .map(|i| {
                let psi = p.eval((d1[i] / d0[i]).sqrt()).unwrap();
                d0[i] * psi * psi * v[i].norm_sqr()
            })
            .sum::<f64>()
            .sqrt();
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn subspace_norm_zero_and_support() {
        let lat = Lattice::standard(1, 4, 8, 2.0).unwrap();
        let region = RegionMask::time_window(lat, 0.0, 0.8);
        let phi = PhiFunction::constant_one();
        let z = GridFunction::zeros(lat);
        assert_eq!(interp_subspace_norm(&z, &region, 0.0, 1.0, 2.0, 0.5, phi.clone()).unwrap(), (0.0, 0.0));
        let bad = GridFunction::from_fn(lat, |_, _| Complex64::new(1.0, 0.0));
        assert!(interp_subspace_norm(&bad, &region, 0.0, 1.0, 2.0, 0.5, phi).is_err());
    }
}
