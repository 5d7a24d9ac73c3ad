//! Parabolicity and covering checks for constant-coefficient principal symbols.
//!
//! A principal symbol is `A°(ξ, p) = Σ a^{α,β} ξ^α p^β` over
//! `|α| + 2bβ = 2m`. It is 2b-parabolic when `A°(ξ, p) ≠ 0` for real `ξ`,
//! `Re p ≥ 0`, `|ξ| + |p| ≠ 0`; by homogeneity it suffices to look at the
//! compact set `|ξ|² + |p|² = 1`.
//!
//! At a boundary frame `(ν, ξ_tan, p)` the polynomial `ζ ↦ A°(ξ_tan + ζν, p)`
//! has `m` roots in each half plane. The covering condition asks that the
//! boundary symbols `B_j°(ξ_tan + ζν, p)` be linearly independent modulo
//! `M⁺(ζ) = ∏ (ζ − ζ⁺_j)`, tested as full rank of the `m × m` matrix of
//! remainder coefficients.
//!
//! Polynomials in `ζ` are coefficient vectors in ascending degree.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible `|A°|` on the normalized sample set.
pub const DELTA_MIN: f64 = 1e-9;
/// Relative radius below which companion eigenvalues are merged.
pub const CLUSTER_RADIUS: f64 = 1e-7;
/// Roots with `|Im ζ| < NEAR_REAL · (1 + |ζ|)` are treated as real.
pub const NEAR_REAL: f64 = 1e-9;
/// Relative rank tolerance of the covering matrix.
pub const COVERING_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Key `(α, β)` of a monomial `ξ^α p^β`.
pub type Monomial = (Vec<u32>, u32);

fn check_terms(
    n: usize,
    b: u32,
    order: u32,
    coeffs: &BTreeMap<Monomial, Complex64>,
    what: &str,
) -> Result<()> {
    for ((alpha, beta), c) in coeffs {
        if alpha.len() != n {
            return Err(Error::Structural(format!(
                "{what}: multi-index {alpha:?} has length {}, expected {n}",
                alpha.len()
            )));
        }
        let weight: u32 = alpha.iter().sum::<u32>() + 2 * b * beta;
        if weight != order {
            return Err(Error::Structural(format!(
                "{what}: term ({alpha:?}, {beta}) has weight {weight}, expected {order}"
            )));
        }
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Structural(format!("{what}: non-finite coefficient")));
        }
    }
    Ok(())
}

fn monomial_eval(alpha: &[u32], beta: u32, xi: &[f64], p: Complex64) -> Complex64 {
    let x: f64 = alpha.iter().zip(xi).map(|(&a, &v)| v.powi(a as i32)).product();
    p.powu(beta) * x
}

fn eval_terms(coeffs: &BTreeMap<Monomial, Complex64>, xi: &[f64], p: Complex64) -> Complex64 {
    coeffs
        .iter()
        .map(|((alpha, beta), c)| c * monomial_eval(alpha, *beta, xi, p))
        .sum()
}

/// `ζ ↦ Σ c (ξ + ζν)^α p^β`, ascending coefficients of length `degree + 1`.
fn zeta_expand(
    coeffs: &BTreeMap<Monomial, Complex64>,
    degree: usize,
    nu: &[f64],
    xi_tan: &[f64],
    p: Complex64,
) -> Vec<Complex64> {
    let mut out = vec![ZERO; degree + 1];
    for ((alpha, beta), c) in coeffs {
        let mut poly = vec![c * p.powu(*beta)];
        for (k, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                // multiply by (ξ_k + ν_k ζ)
                let mut next = vec![ZERO; poly.len() + 1];
                for (d, v) in poly.iter().enumerate() {
                    next[d] += v * xi_tan[k];
                    next[d + 1] += v * nu[k];
                }
                poly = next;
            }
        }
        for (d, v) in poly.into_iter().enumerate() {
            out[d] += v;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalSymbol {
    n: usize,
    b: u32,
    m: u32,
    coeffs: BTreeMap<Monomial, Complex64>,
}

impl PrincipalSymbol {
    pub fn new(n: usize, b: u32, m: u32, coeffs: BTreeMap<Monomial, Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structural("spatial dimension must be >= 1".into()));
        }
        if b == 0 || m < b || !m.is_multiple_of(b) {
            return Err(Error::Structural(format!(
                "need m >= b >= 1 with m/b integer, got m = {m}, b = {b}"
            )));
        }
        check_terms(n, b, 2 * m, &coeffs, "principal symbol")?;
        let kappa = m / b;
        let lead = coeffs.get(&(vec![0; n], kappa)).copied().unwrap_or(ZERO);
        if lead == ZERO {
            return Err(Error::Structural(format!(
                "coefficient of p^{kappa} (alpha = 0) must be nonzero"
            )));
        }
        Ok(PrincipalSymbol { n, b, m, coeffs })
    }

    /// `p + |ξ|²` in `n` dimensions.
    pub fn heat(n: usize) -> Self {
        Self::laplace_type(n, 1.0)
    }

    /// `−p + |ξ|²`.
    pub fn backward_heat(n: usize) -> Self {
        Self::laplace_type(n, -1.0)
    }

    fn laplace_type(n: usize, p_coeff: f64) -> Self {
        let mut c = BTreeMap::new();
        c.insert((vec![0; n], 1), Complex64::new(p_coeff, 0.0));
        for k in 0..n {
            let mut a = vec![0; n];
            a[k] = 2;
            c.insert((a, 0), ONE);
        }
        Self::new(n, 1, 1, c).expect("well-formed symbol")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn kappa(&self) -> u32 {
        self.m / self.b
    }

    pub fn coeffs(&self) -> &BTreeMap<Monomial, Complex64> {
        &self.coeffs
    }

    /// Coefficient of `p^κ`.
    pub fn time_coefficient(&self) -> Complex64 {
        self.coeffs[&(vec![0; self.n], self.kappa())]
    }

    pub fn eval(&self, xi: &[f64], p: Complex64) -> Complex64 {
        eval_terms(&self.coeffs, xi, p)
    }

    /// Gradient of `A°` in `(ξ₁…ξ_n)` and the complex derivative in `p`.
    fn gradient(&self, xi: &[f64], p: Complex64) -> (Vec<Complex64>, Complex64) {
        let mut dxi = vec![ZERO; self.n];
        let mut dp = ZERO;
        for ((alpha, beta), c) in &self.coeffs {
            for k in 0..self.n {
                if alpha[k] > 0 {
                    let mut a = alpha.clone();
                    a[k] -= 1;
                    dxi[k] += c * alpha[k] as f64 * monomial_eval(&a, *beta, xi, p);
                }
            }
            if *beta > 0 {
                dp += c * *beta as f64 * monomial_eval(alpha, beta - 1, xi, p);
            }
        }
        (dxi, dp)
    }
}

pub fn symbol_eval(a: &PrincipalSymbol, xi: &[f64], p: Complex64) -> Complex64 {
    a.eval(xi, p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySymbol {
    m_j: u32,
    coeffs: BTreeMap<Monomial, Complex64>,
}

impl BoundarySymbol {
    pub fn new(n: usize, b: u32, m_j: u32, coeffs: BTreeMap<Monomial, Complex64>) -> Result<Self> {
        check_terms(n, b, m_j, &coeffs, "boundary symbol")?;
        Ok(BoundarySymbol { m_j, coeffs })
    }

    /// The constant symbol 1.
    pub fn dirichlet(n: usize) -> Self {
        let mut c = BTreeMap::new();
        c.insert((vec![0; n], 0), ONE);
        BoundarySymbol { m_j: 0, coeffs: c }
    }

    /// First derivative along coordinate axis `axis`.
    pub fn first_order(n: usize, axis: usize) -> Self {
        let mut a = vec![0; n];
        a[axis] = 1;
        let mut c = BTreeMap::new();
        c.insert((a, 0), ONE);
        BoundarySymbol { m_j: 1, coeffs: c }
    }

    pub fn m_j(&self) -> u32 {
        self.m_j
    }

    pub fn coeffs(&self) -> &BTreeMap<Monomial, Complex64> {
        &self.coeffs
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        BoundarySymbol {
            m_j: self.m_j,
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn eval(&self, xi: &[f64], p: Complex64) -> Complex64 {
        eval_terms(&self.coeffs, xi, p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFrame {
    pub nu: Vec<f64>,
    pub xi_tan: Vec<f64>,
    pub p: Complex64,
}

impl BoundaryFrame {
    pub fn new(nu: Vec<f64>, xi_tan: Vec<f64>, p: Complex64) -> Result<Self> {
        let f = BoundaryFrame { nu, xi_tan, p };
        f.validate(f.nu.len())?;
        Ok(f)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.nu.len() != n || self.xi_tan.len() != n {
            return Err(Error::DegenerateFrame(format!(
                "frame vectors must have length {n}"
            )));
        }
        let nn: f64 = self.nu.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (nn - 1.0).abs() > 1e-12 {
            return Err(Error::DegenerateFrame(format!("|nu| = {nn}, expected 1")));
        }
        let xn: f64 = self.xi_tan.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dot: f64 = self.nu.iter().zip(&self.xi_tan).map(|(a, b)| a * b).sum();
        if dot.abs() > 1e-10 * xn.max(1.0) {
            return Err(Error::DegenerateFrame(format!("xi_tan is not orthogonal to nu (dot = {dot:e})")));
        }
        if self.p.re < 0.0 {
            return Err(Error::DegenerateFrame(format!("Re p = {} < 0", self.p.re)));
        }
        if xn + self.p.norm() == 0.0 {
            return Err(Error::DegenerateFrame("xi_tan = 0 and p = 0".into()));
        }
        Ok(())
    }

    /// `(cξ_tan, c^{2b} p)`.
    pub fn scaled(&self, c: f64, b: u32) -> Self {
        BoundaryFrame {
            nu: self.nu.clone(),
            xi_tan: self.xi_tan.iter().map(|v| v * c).collect(),
            p: self.p * c.powi(2 * b as i32),
        }
    }

    /// Rescales so that `|ξ_tan|² + |p|^{1/b} = 1`.
    pub fn normalized(&self, b: u32) -> Self {
        let x2: f64 = self.xi_tan.iter().map(|v| v * v).sum();
        let pn = self.p.norm();
        // h(c) = c²|ξ|² + c²|p|^{1/b} is exactly c² h(1)
        let h = x2 + pn.powf(1.0 / b as f64);
        self.scaled(1.0 / h.sqrt(), b)
    }
}

/// Outcome of the sampled parabolicity test.
#[derive(Debug, Clone, PartialEq)]
pub struct PetrovskiiVerdict {
    pub pass: bool,
    pub min_abs: f64,
    pub witness_xi: Vec<f64>,
    pub witness_p: Complex64,
    pub samples: usize,
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `i` in base `base`.
fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut f = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % b) as f64;
        i /= b;
        f /= base as f64;
    }
    out
}

/// Quasi-random points on the unit sphere of `ℝ^dim` (Halton + Box–Muller).
pub fn halton_sphere(dim: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    let pairs = dim.div_ceil(2);
    if 2 * pairs > PRIMES.len() {
        return Err(Error::Unsupported(format!("sphere sampling supports dim <= {}", PRIMES.len())));
    }
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let mut g = Vec::with_capacity(2 * pairs);
        for q in 0..pairs {
            let u1 = radical_inverse(i, PRIMES[2 * q]);
            let u2 = radical_inverse(i, PRIMES[2 * q + 1]);
            let rad = (-2.0 * u1.max(f64::MIN_POSITIVE).ln()).sqrt();
            let ang = 2.0 * std::f64::consts::PI * u2;
            g.push(rad * ang.cos());
            g.push(rad * ang.sin());
        }
        g.truncate(dim);
        i += 1;
        let norm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            out.push(g.into_iter().map(|v| v / norm).collect());
        }
    }
    Ok(out)
}

/// Point `(ξ, Re p, Im p)` on the half sphere; returns `|A°|` there.
fn sample_abs(a: &PrincipalSymbol, x: &[f64]) -> f64 {
    let n = a.n;
    a.eval(&x[..n], Complex64::new(x[n], x[n + 1])).norm()
}

fn project(x: &mut [f64], n: usize) {
    x[n] = x[n].max(0.0);
    let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= norm;
    }
}

/// Damped minimum-norm Newton iteration on `(Re A°, Im A°, |x|² − 1) = 0`
/// accepting only steps that decrease `|A°|`.
fn polish(a: &PrincipalSymbol, start: &[f64]) -> (Vec<f64>, f64) {
    let n = a.n;
    let mut x = start.to_vec();
    let mut fx = sample_abs(a, &x);
    for _ in 0..60 {
        if fx < 1e-15 {
            break;
        }
        let p = Complex64::new(x[n], x[n + 1]);
        let val = a.eval(&x[..n], p);
        let (dxi, dp) = a.gradient(&x[..n], p);
        let dim = n + 2;
        let mut jac = DMatrix::<f64>::zeros(3, dim);
        for k in 0..n {
            jac[(0, k)] = dxi[k].re;
            jac[(1, k)] = dxi[k].im;
        }
        // ∂/∂(Re p) = A_p, ∂/∂(Im p) = i A_p
        jac[(0, n)] = dp.re;
        jac[(1, n)] = dp.im;
        jac[(0, n + 1)] = -dp.im;
        jac[(1, n + 1)] = dp.re;
        for k in 0..dim {
            jac[(2, k)] = 2.0 * x[k];
        }
        let rhs = DVector::from_vec(vec![val.re, val.im, x.iter().map(|v| v * v).sum::<f64>() - 1.0]);
        let Ok(step) = jac.svd(true, true).solve(&rhs, 1e-14) else {
            break;
        };
        let mut improved = false;
        let mut t = 1.0;
        for _ in 0..30 {
            let mut y: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, s)| xi - t * s).collect();
            project(&mut y, n);
            let fy = sample_abs(a, &y);
            if fy < fx {
                x = y;
                fx = fy;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, fx)
}

/// Sampled test of `A°(ξ, p) ≠ 0` on `|ξ|² + |p|² = 1`, `Re p ≥ 0`.
pub fn petrovskii_check(a: &PrincipalSymbol, n_samples: usize) -> Result<PetrovskiiVerdict> {
    if n_samples == 0 {
        return Err(Error::Argument("n_samples must be >= 1".into()));
    }
    let n = a.n;
    let dim = n + 2;
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n_samples + n + 2);
    // axis points: ξ = 0, p = 1 and p = 0, ξ = ±e_k
    let mut e = vec![0.0; dim];
    e[n] = 1.0;
    points.push(e);
    for k in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[k] = s;
            points.push(e);
        }
    }
    for mut x in halton_sphere(dim, n_samples)? {
        x[n] = x[n].abs();
        points.push(x);
    }
    let mut scored: Vec<(f64, usize)> = points.iter().enumerate().map(|(i, x)| (sample_abs(a, x), i)).collect();
    scored.sort_by(|u, v| u.0.total_cmp(&v.0).then(u.1.cmp(&v.1)));
    let mut best = points[scored[0].1].clone();
    let mut best_val = scored[0].0;
    for &(_, i) in scored.iter().take(8) {
        let (x, fx) = polish(a, &points[i]);
        if fx < best_val {
            best = x;
            best_val = fx;
        }
    }
    Ok(PetrovskiiVerdict {
        pass: best_val > DELTA_MIN,
        min_abs: best_val,
        witness_xi: best[..n].to_vec(),
        witness_p: Complex64::new(best[n], best[n + 1]),
        samples: points.len(),
    })
}

/// Coefficients of `ζ ↦ A°(ξ_tan + ζν, p)`, degree `2m`.
pub fn zeta_polynomial(a: &PrincipalSymbol, frame: &BoundaryFrame) -> Result<Vec<Complex64>> {
    frame.validate(a.n)?;
    Ok(zeta_expand(&a.coeffs, 2 * a.m as usize, &frame.nu, &frame.xi_tan, frame.p))
}

/// Coefficients of `ζ ↦ B°(ξ_tan + ζν, p)`, degree `m_j`.
pub fn boundary_zeta_polynomial(bsym: &BoundarySymbol, frame: &BoundaryFrame) -> Vec<Complex64> {
    zeta_expand(&bsym.coeffs, bsym.m_j as usize, &frame.nu, &frame.xi_tan, frame.p)
}

/// Parlett–Reinsch balancing by powers of two.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].l1_norm();
                    r += m[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r / f) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// All roots of a polynomial (ascending coefficients, nonzero leading term).
pub fn poly_roots(poly: &[Complex64]) -> Result<Vec<Complex64>> {
    let Some(deg) = poly.iter().rposition(|c| *c != ZERO) else {
        return Err(Error::Argument("zero polynomial".into()));
    };
    if deg + 1 != poly.len() {
        return Err(Error::Argument("leading coefficient is zero".into()));
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = poly[deg];
    let mut comp = DMatrix::from_element(deg, deg, ZERO);
    for j in 0..deg {
        comp[(0, j)] = -poly[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        comp[(i, i - 1)] = ONE;
    }
    balance(&mut comp);
    let schur = Schur::try_new(comp, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("companion eigenvalue iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut roots: Vec<Complex64> = (0..deg).map(|i| t[(i, i)]).collect();

    // merge clusters (multiple roots) to their mean
    let mut assigned = vec![false; deg];
    for i in 0..deg {
        if assigned[i] {
            continue;
        }
        let members: Vec<usize> = (i..deg)
            .filter(|&j| !assigned[j] && (roots[j] - roots[i]).norm() <= CLUSTER_RADIUS * (1.0 + roots[i].norm()))
            .collect();
        let mean = members.iter().map(|&j| roots[j]).sum::<Complex64>() / members.len() as f64;
        for &j in &members {
            assigned[j] = true;
            roots[j] = mean;
        }
    }
    roots.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    Ok(roots)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSplit {
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
}

/// Roots partitioned by the sign of the imaginary part.
pub fn root_split(poly: &[Complex64]) -> Result<RootSplit> {
    let roots = poly_roots(poly)?;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for z in roots {
        if z.im.abs() < NEAR_REAL * (1.0 + z.norm()) {
            return Err(Error::DegenerateFrame(format!("near-real root {z}")));
        }
        if z.im > 0.0 {
            plus.push(z);
        } else {
            minus.push(z);
        }
    }
    Ok(RootSplit { plus, minus })
}

/// [`root_split`] requiring `m` roots in each half plane.
pub fn root_split_balanced(poly: &[Complex64], m: usize) -> Result<RootSplit> {
    let split = root_split(poly)?;
    if split.plus.len() != m || split.minus.len() != m {
        return Err(Error::UnbalancedSplit {
            plus: split.plus.len(),
            minus: split.minus.len(),
            expected: m,
        });
    }
    Ok(split)
}

/// `∏ (ζ − ζ⁺_j)`, monic.
pub fn plus_polynomial(roots_plus: &[Complex64]) -> Result<Vec<Complex64>> {
    if roots_plus.is_empty() {
        return Err(Error::Argument("plus polynomial needs at least one root".into()));
    }
    let mut poly = vec![ONE];
    for &r in roots_plus {
        let mut next = vec![ZERO; poly.len() + 1];
        for (d, c) in poly.iter().enumerate() {
            next[d] -= c * r;
            next[d + 1] += c;
        }
        poly = next;
    }
    Ok(poly)
}

/// Long division `num = q·den + r` with `deg r < deg den`.
pub fn poly_divmod(num: &[Complex64], den: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let scale = den.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let Some(dd) = den.iter().rposition(|c| c.norm() > 1e-14 * scale) else {
        return Err(Error::DegenerateFrame("division by the zero polynomial".into()));
    };
    let lead = den[dd];
    let mut rem = num.to_vec();
    if rem.len() <= dd {
        rem.resize(dd, ZERO);
        return Ok((vec![ZERO], rem));
    }
    let mut quot = vec![ZERO; rem.len() - dd];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dd] / lead;
        quot[k] = c;
        for (i, d) in den[..=dd].iter().enumerate() {
            rem[k + i] -= c * d;
        }
    }
    rem.truncate(dd);
    Ok((quot, rem))
}

/// Per-frame covering result.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCovering {
    pub frame: BoundaryFrame,
    pub min_singular: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringVerdict {
    pub pass: bool,
    /// Smallest singular value over all frames.
    pub min_singular: f64,
    /// Index of the frame attaining `min_singular` or, on failure, the
    /// first failing frame.
    pub witness: usize,
    pub frames: Vec<FrameCovering>,
}

/// Remainder matrix of the boundary symbols modulo `M⁺` at one frame.
pub fn covering_matrix(
    a: &PrincipalSymbol,
    bs: &[BoundarySymbol],
    frame: &BoundaryFrame,
) -> Result<DMatrix<Complex64>> {
    let m = a.m as usize;
    let split = root_split_balanced(&zeta_polynomial(a, frame)?, m)?;
    let mplus = plus_polynomial(&split.plus)?;
    let mut mat = DMatrix::from_element(m, m, ZERO);
    for (j, bsym) in bs.iter().enumerate() {
        let (_, r) = poly_divmod(&boundary_zeta_polynomial(bsym, frame), &mplus)?;
        for (d, c) in r.iter().enumerate() {
            mat[(j, d)] = *c;
        }
    }
    Ok(mat)
}

pub fn covering_check(
    a: &PrincipalSymbol,
    bs: &[BoundarySymbol],
    frames: &[BoundaryFrame],
) -> Result<CoveringVerdict> {
    let m = a.m as usize;
    if bs.len() != m {
        return Err(Error::Argument(format!("expected {m} boundary symbols, got {}", bs.len())));
    }
    if frames.is_empty() {
        return Err(Error::Argument("no frames to check".into()));
    }
    let mut out = Vec::with_capacity(frames.len());
    for frame in frames {
        let mat = covering_matrix(a, bs, frame)?;
        let scale = mat.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let sv = mat.singular_values();
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let tolerance = COVERING_TOL * scale;
        out.push(FrameCovering {
            frame: frame.clone(),
            min_singular: smin,
            tolerance,
            pass: scale > 0.0 && smin > tolerance,
        });
    }
    let pass = out.iter().all(|f| f.pass);
    let witness = if pass {
        (0..out.len())
            .min_by(|&i, &j| out[i].min_singular.total_cmp(&out[j].min_singular))
            .unwrap()
    } else {
        out.iter().position(|f| !f.pass).unwrap()
    };
    Ok(CoveringVerdict {
        pass,
        min_singular: out.iter().map(|f| f.min_singular).fold(f64::INFINITY, f64::min),
        witness,
        frames: out,
    })
}

/// Random frame with the given normal, normalized to `|ξ_tan|² + |p|^{1/b} = 1`.
pub fn random_frame<R: Rng + ?Sized>(nu: &[f64], b: u32, rng: &mut R) -> BoundaryFrame {
    let n = nu.len();
    let mut xi: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let dot: f64 = xi.iter().zip(nu).map(|(a, b)| a * b).sum();
    for (x, v) in xi.iter_mut().zip(nu) {
        *x -= dot * v;
    }
    let pr: f64 = rng.sample::<f64, _>(StandardNormal).abs();
    let pi: f64 = rng.sample(StandardNormal);
    BoundaryFrame {
        nu: nu.to_vec(),
        xi_tan: xi,
        p: Complex64::new(pr, pi),
    }
    .normalized(b)
}

/// Axis frames plus `count` random frames for normal `nu`.
pub fn frame_set<R: Rng + ?Sized>(nu: &[f64], b: u32, count: usize, rng: &mut R) -> Vec<BoundaryFrame> {
    let n = nu.len();
    let mut frames = vec![BoundaryFrame {
        nu: nu.to_vec(),
        xi_tan: vec![0.0; n],
        p: ONE,
    }];
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let dot: f64 = nu[k];
        let xi: Vec<f64> = e.iter().zip(nu).map(|(a, v)| a - dot * v).collect();
        let len: f64 = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len > 1e-8 {
            frames.push(BoundaryFrame {
                nu: nu.to_vec(),
                xi_tan: xi.iter().map(|v| v / len).collect(),
                p: ZERO,
            });
        }
    }
    frames.extend((0..count).map(|_| random_frame(nu, b, rng)));
    frames
}

/// Smallest multiple of `2b` that is `≥ 2m` and `≥ m_j + 1` for every order.
pub fn sigma0(m: u32, b: u32, m_orders: &[u32]) -> Result<u32> {
    if b == 0 || m < b {
        return Err(Error::Argument(format!("need m >= b >= 1, got m = {m}, b = {b}")));
    }
    if !m.is_multiple_of(b) {
        return Err(Error::Argument(format!("m/b = {m}/{b} is not an integer")));
    }
    let lower = m_orders.iter().map(|&mj| mj + 1).fold(2 * m, u32::max);
    Ok(lower.div_ceil(2 * b) * 2 * b)
}

/// One `{alpha, beta, re, im}` entry of an operator file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub alpha: Vec<u32>,
    #[serde(default)]
    pub beta: u32,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub m_j: u32,
    pub coeffs: Vec<TermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    #[serde(default)]
    pub nu: Option<Vec<f64>>,
    pub xi_tan: Vec<f64>,
    #[serde(default)]
    pub p_re: f64,
    #[serde(default)]
    pub p_im: f64,
}

/// Operator definition file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorFile {
    pub n: usize,
    pub b: u32,
    pub m: u32,
    #[serde(rename = "A")]
    pub a: Vec<TermSpec>,
    #[serde(rename = "B", default)]
    pub b_list: Vec<BoundarySpec>,
    /// Inward normal used for generated frames (default `e_n`).
    #[serde(default)]
    pub nu: Option<Vec<f64>>,
    #[serde(default)]
    pub frames: Option<Vec<FrameSpec>>,
    /// Lower-order spatial terms `Σ c D^α` (`β = 0`, `|α| < 2m`).
    #[serde(default)]
    pub lower: Vec<TermSpec>,
}

fn collect_terms(terms: &[TermSpec]) -> BTreeMap<Monomial, Complex64> {
    let mut out = BTreeMap::new();
    for t in terms {
        *out.entry((t.alpha.clone(), t.beta)).or_insert(ZERO) += Complex64::new(t.re, t.im);
    }
    out
}

impl OperatorFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn principal(&self) -> Result<PrincipalSymbol> {
        PrincipalSymbol::new(self.n, self.b, self.m, collect_terms(&self.a))
    }

    pub fn boundary(&self) -> Result<Vec<BoundarySymbol>> {
        self.b_list
            .iter()
            .map(|bs| BoundarySymbol::new(self.n, self.b, bs.m_j, collect_terms(&bs.coeffs)))
            .collect()
    }

    pub fn normal(&self) -> Result<Vec<f64>> {
        match &self.nu {
            Some(nu) if nu.len() == self.n => Ok(nu.clone()),
            Some(nu) => Err(Error::Argument(format!("nu has length {}, expected {}", nu.len(), self.n))),
            None => {
                let mut e = vec![0.0; self.n];
                e[self.n - 1] = 1.0;
                Ok(e)
            }
        }
    }

    /// Explicit frames if given, else axis frames plus `count` random ones.
    pub fn frames<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<BoundaryFrame>> {
        let nu = self.normal()?;
        match &self.frames {
            Some(list) => list
                .iter()
                .map(|f| {
                    BoundaryFrame::new(
                        f.nu.clone().unwrap_or_else(|| nu.clone()),
                        f.xi_tan.clone(),
                        Complex64::new(f.p_re, f.p_im),
                    )
                })
                .collect(),
            None => Ok(frame_set(&nu, self.b, count, rng)),
        }
    }

    pub fn lower_terms(&self) -> Result<BTreeMap<Vec<u32>, Complex64>> {
        let mut out = BTreeMap::new();
        for t in &self.lower {
            if t.alpha.len() != self.n || t.beta != 0 || t.alpha.iter().sum::<u32>() >= 2 * self.m {
                return Err(Error::Structural(format!(
                    "lower-order term ({:?}, {}) must be spatial with |alpha| < 2m",
                    t.alpha, t.beta
                )));
            }
            *out.entry(t.alpha.clone()).or_insert(ZERO) += Complex64::new(t.re, t.im);
        }
        Ok(out)
    }
}
