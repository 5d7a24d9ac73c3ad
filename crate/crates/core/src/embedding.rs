//! Continuity criterion `∫₁^∞ dr / (r φ²(r)) < ∞` for the class of
//! `(p + b + n/2, φ)`-regular functions, lattice weight sums, the radial
//! reduction of the weight integral and a sharpness construction.

use std::cell::RefCell;

use num_complex::Complex64;
use serde::Serialize;

use crate::class_m::{PhiFunction, PhiKind};
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::spectra::{
    continuum_scale, fft_nd, hnorm, r_gamma, AnisotropicIndex, GridFunction, Lattice,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converges,
    Diverges,
}

/// Closed-form verdict: lexicographic in `2qᵢ` against 1.
pub fn criterion_verdict(phi: &PhiFunction) -> Verdict {
    if phi.kind() == PhiKind::ConstantOne {
        return Verdict::Diverges;
    }
    for &q in phi.exponents() {
        if 2.0 * q > 1.0 {
            return Verdict::Converges;
        }
        if 2.0 * q < 1.0 {
            return Verdict::Diverges;
        }
    }
    Verdict::Diverges
}

pub const PARTIAL_REL_TOL: f64 = 1e-8;
const MAX_INTERVALS: usize = 20_000;

/// The iterated-log level in which `dr / (r φ²)` has a pure power leading
/// factor: the first `i` with `2qᵢ ≠ 1`, or the deepest level.
pub fn working_level(phi: &PhiFunction) -> usize {
    let q = phi.exponents();
    if q.is_empty() {
        return 1;
    }
    q.iter().position(|&qi| 2.0 * qi != 1.0).map_or(q.len(), |i| i + 1)
}

fn iterate_log(mut v: f64, times: usize) -> f64 {
    for _ in 0..times {
        v = v.ln();
    }
    v
}

fn move_level(value: f64, from: usize, to: usize) -> Result<f64> {
    let v = if from <= to {
        iterate_log(value, to - from)
    } else {
        (0..from - to).fold(value, |acc, _| acc.exp())
    };
    if v.is_nan() || v == f64::INFINITY {
        return Err(Error::Domain(format!(
            "radius given at log level {from} is not representable at level {to}"
        )));
    }
    Ok(v)
}

/// `∫₁^R dr / (r φ²(r))` where `value = log^level R` (`log⁰ R = R`).
///
/// Below the cutoff `φ` is constant and the integral is closed form. Above
/// it the integrand is written in `v = log^L r` with `L` from
/// [`working_level`]; the critical factors `(log^i r)^{1−2qᵢ} = 1` for `i < L`
/// drop out, so no exponentials are needed and `R` may be far beyond `f64`.
pub fn criterion_partial_at_level(phi: &PhiFunction, level: usize, value: f64) -> Result<f64> {
    if level == 0 && !(value >= 1.0) {
        return Err(Error::Domain(format!("R must be at least 1, got {value}")));
    }
    if !value.is_finite() {
        return Err(Error::Argument("R must be finite at its log level".into()));
    }
    let q = phi.exponents();
    let big_l = working_level(phi);
    let r0 = phi.cutoff();
    let v_lo = iterate_log(r0, big_l);
    let v_hi = move_level(value, level, big_l)?;
    let phi0 = phi.eval_unchecked(r0);
    if v_hi <= v_lo {
        // R at or below the cutoff
        let ln_r = move_level(value, level, 1)?;
        return Ok(ln_r / (phi0 * phi0));
    }
    let head = r0.ln() / (phi0 * phi0);
    let ln_g = |v: f64| -> f64 {
        let mut acc = 0.0;
        let mut w = v;
        for &qi in q.get(big_l - 1..).unwrap_or(&[]) {
            acc -= 2.0 * qi * w.ln();
            w = w.ln();
        }
        acc
    };
    let tail = if v_lo <= 0.0 {
        integrate(|v| ln_g(v).exp(), v_lo, v_hi, PARTIAL_REL_TOL, 0.0, MAX_INTERVALS)?.value
    } else {
        // v = e^w spreads power laws evenly over the range
        integrate(
            |w| (ln_g(w.exp()) + w).exp(),
            v_lo.ln(),
            v_hi.ln(),
            PARTIAL_REL_TOL,
            0.0,
            MAX_INTERVALS,
        )?
        .value
    };
    Ok(head + tail)
}

/// `∫₁^R dr / (r φ²(r))` by adaptive quadrature to relative tolerance 1e-8.
pub fn criterion_partial(phi: &PhiFunction, r: f64) -> Result<f64> {
    criterion_partial_at_level(phi, 0, r)
}

/// Ratio of successive increments below which a ladder counts as bounded.
pub const CONVERGENCE_RATIO: f64 = 0.9;
/// Factor between ladder points in the working log level.
pub const LADDER_FACTOR: f64 = 4.0;
pub const LADDER_STEPS: usize = 8;

/// Growth classification of the partial integrals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub level: usize,
    /// `log^level R` at each ladder point.
    pub points: Vec<f64>,
    pub partials: Vec<f64>,
    /// Last ratio of successive increments.
    pub increment_ratio: f64,
    pub verdict: Verdict,
}

/// Classifies the criterion numerically from partial integrals on a ladder
/// that is geometric in the working log level. A power `v^{−2q}` there gives
/// increment ratios `4^{1−2q}`, so `q > 1/2` reads as bounded.
pub fn criterion_oracle(phi: &PhiFunction) -> Result<OracleReport> {
    let level = working_level(phi);
    let v_lo = iterate_log(phi.cutoff(), level).max(1.0);
    let points: Vec<f64> = (1..=LADDER_STEPS).map(|j| v_lo * LADDER_FACTOR.powi(j as i32)).collect();
    let partials = points
        .iter()
        .map(|&v| criterion_partial_at_level(phi, level, v))
        .collect::<Result<Vec<_>>>()?;
    let n = partials.len();
    let increment_ratio = (partials[n - 1] - partials[n - 2]) / (partials[n - 2] - partials[n - 3]);
    let verdict = if increment_ratio < CONVERGENCE_RATIO {
        Verdict::Converges
    } else {
        Verdict::Diverges
    };
    Ok(OracleReport {
        level,
        points,
        partials,
        increment_ratio,
        verdict,
    })
}

/// Lattice sum of `|ξ^α|² |η|^{2β} / (r_γ^{2s} φ²(r_γ))` times the frequency
/// cell volume: a Riemann sum of the weight integral over the lattice box.
pub fn derivative_weight_sum(
    lattice: &Lattice,
    s: f64,
    gamma: f64,
    phi: &PhiFunction,
    alpha: &[u32],
    beta: u32,
) -> Result<f64> {
    if alpha.len() != lattice.k {
        return Err(Error::Shape {
            expected: lattice.k,
            got: alpha.len(),
        });
    }
    if !(gamma > 0.0) {
        return Err(Error::Argument(format!("gamma must be positive, got {gamma}")));
    }
    let sum: f64 = lattice
        .map_frequencies(|xi, eta| {
            let r = r_gamma(xi, eta, gamma);
            let num: f64 = xi.iter().zip(alpha).map(|(x, &a)| x.powi(2 * a as i32)).product::<f64>()
                * eta.abs().powi(2 * beta as i32);
            let phi_r = phi.eval_unchecked(r);
            num / (r.powf(2.0 * s) * phi_r * phi_r)
        })
        .into_iter()
        .sum();
    Ok(sum * lattice.cell_volume())
}

/// Radius at which the constant of the radial reduction is calibrated.
pub const CALIBRATION_RADIUS: f64 = 10.0;
const RADIAL_REL_TOL: f64 = 1e-8;

// Outer levels of the iterated quadrature run looser than inner ones so the
// inner error does not stall the outer refinement.
fn level_tol(dim: usize, n: usize) -> f64 {
    RADIAL_REL_TOL * 10f64.powi((n - dim) as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialReduction {
    /// Weight integral over `{r_γ ≤ R}` by iterated quadrature.
    pub lhs: f64,
    /// Calibrated one-dimensional radial integral.
    pub rhs: f64,
    /// `lhs / rhs` at φ ≡ 1 and `R =` [`CALIBRATION_RADIUS`].
    pub constant: f64,
    pub relerr: f64,
}

fn capture<T>(slot: &RefCell<Option<Error>>, r: Result<T>, fallback: T) -> T {
    match r {
        Ok(v) => v,
        Err(e) => {
            slot.borrow_mut().get_or_insert(e);
            fallback
        }
    }
}

/// `∫_{r_γ(ξ,η) ≤ R} |ξ^α|² |η|^{2β} / (r_γ^{2s} φ²(r_γ)) dξ dη` over
/// `ℝⁿ × ℝ`, integrating each coordinate adaptively over the slice of the
/// region `|ξ|² + |η|^{2γ} ≤ R² − 1`.
pub fn weight_integral(s: f64, gamma: f64, phi: &PhiFunction, alpha: &[u32], beta: u32, r: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::Domain(format!("truncation radius must exceed 1, got {r}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::Argument(format!("gamma must be positive, got {gamma}")));
    }
    if alpha.is_empty() || alpha.len() > 3 {
        return Err(Error::Unsupported("iterated quadrature handles 1 to 3 spatial dimensions".into()));
    }
    let failure = RefCell::new(None);
    let xi = RefCell::new(vec![0.0; alpha.len()]);
    let orthant = nested(0, r * r - 1.0, s, gamma, phi, alpha, beta, &xi, &failure);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    // the integrand is even in every coordinate
    Ok(orthant * 2f64.powi(alpha.len() as i32 + 1))
}

#[allow(clippy::too_many_arguments)]
fn nested(
    dim: usize,
    rem2: f64,
    s: f64,
    gamma: f64,
    phi: &PhiFunction,
    alpha: &[u32],
    beta: u32,
    xi: &RefCell<Vec<f64>>,
    failure: &RefCell<Option<Error>>,
) -> f64 {
    if rem2 <= 0.0 || failure.borrow().is_some() {
        return 0.0;
    }
    if dim == alpha.len() {
        let xis = xi.borrow().clone();
        let mono: f64 = xis.iter().zip(alpha).map(|(x, &a)| x.powi(2 * a as i32)).product();
        let xi2: f64 = xis.iter().map(|x| x * x).sum();
        let eta_max = rem2.powf(0.5 / gamma);
        let f = |eta: f64| {
            let rr = (1.0 + xi2 + eta.powf(2.0 * gamma)).sqrt();
            let ph = phi.eval_unchecked(rr);
            mono * eta.powi(2 * beta as i32) / (rr.powf(2.0 * s) * ph * ph)
        };
        let r = integrate(f, 0.0, eta_max, level_tol(dim, alpha.len()), 0.0, MAX_INTERVALS).map(|q| q.value);
        return capture(failure, r, 0.0);
    }
    let r = integrate(
        |x| {
            xi.borrow_mut()[dim] = x;
            nested(dim + 1, rem2 - x * x, s, gamma, phi, alpha, beta, xi, failure)
        },
        0.0,
        rem2.sqrt(),
        level_tol(dim, alpha.len()),
        0.0,
        MAX_INTERVALS,
    )
    .map(|q| q.value);
    capture(failure, r, 0.0)
}

/// `∫₁^R (r²−1)^{e} r^{1−2s} φ^{−2}(r) dr` with
/// `e = |α| + 2bβ + b + n/2 − 1`, i.e. `s − 1 − δ(α, β)` for
/// `s = p + b + n/2`, `δ = p − |α| − 2bβ`.
pub fn radial_integral(s: f64, gamma: f64, phi: &PhiFunction, alpha: &[u32], beta: u32, r: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Argument(format!("gamma must be positive, got {gamma}")));
    }
    let e = radial_exponent(gamma, alpha, beta);
    let f = |x: f64| {
        let ph = phi.eval_unchecked(x);
        (x * x - 1.0).max(0.0).powf(e) * x.powf(1.0 - 2.0 * s) / (ph * ph)
    };
    Ok(integrate(f, 1.0, r, RADIAL_REL_TOL, 0.0, MAX_INTERVALS)?.value)
}

/// Exponent of `(r² − 1)` in the radial integrand.
pub fn radial_exponent(gamma: f64, alpha: &[u32], beta: u32) -> f64 {
    let b = 0.5 / gamma;
    let abs_alpha: u32 = alpha.iter().sum();
    abs_alpha as f64 + 2.0 * b * beta as f64 + b + 0.5 * alpha.len() as f64 - 1.0
}

/// Compares the truncated weight integral with the calibrated radial
/// integral at the same truncation radius. The constant depends only on
/// `(α, β)`, so it is fixed once at φ ≡ 1.
pub fn radial_reduction_check(
    s: f64,
    gamma: f64,
    phi: &PhiFunction,
    alpha: &[u32],
    beta: u32,
    r: f64,
) -> Result<RadialReduction> {
    let one = PhiFunction::constant_one();
    let constant = weight_integral(s, gamma, &one, alpha, beta, CALIBRATION_RADIUS)?
        / radial_integral(s, gamma, &one, alpha, beta, CALIBRATION_RADIUS)?;
    let lhs = weight_integral(s, gamma, phi, alpha, beta, r)?;
    let rhs = constant * radial_integral(s, gamma, phi, alpha, beta, r)?;
    Ok(RadialReduction {
        lhs,
        rhs,
        constant,
        relerr: (lhs - rhs).abs() / rhs.abs(),
    })
}

/// Norm and derivative size of the extremal functions on a lattice ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub p: u32,
    pub s: f64,
    pub sizes: Vec<[usize; 2]>,
    /// Continuum-scaled norm of each extremal function (1 by construction).
    pub norms: Vec<f64>,
    /// Maximum of `|∂₁^p w|` over the lattice points.
    pub sup_values: Vec<f64>,
    /// Lattice weight sums with `α = p e₁`, `β = 0`.
    pub weight_sums: Vec<f64>,
    pub increment_ratios: Vec<f64>,
}

/// For each lattice, the trigonometric polynomial `w` of unit
/// `(p + b + k/2, φ)` norm maximizing `∂₁^p w(0, 0)`:
/// `ŵ(ξ, η) ∝ (−iξ₁)^p / (r_γ^{2s} φ²(r_γ))`. By duality
/// `∂₁^p w(0, 0)² = S / (2π)^{k+1}` with `S` the weight sum, so the
/// derivatives are unbounded on the ladder exactly when the weight integral
/// diverges. Refuses φ satisfying the continuity criterion.
pub fn sharpness_demo(phi: &PhiFunction, p: u32, b: u32, ladder: &[Lattice]) -> Result<SharpnessReport> {
    if criterion_verdict(phi) == Verdict::Converges {
        return Err(Error::Argument(
            "phi satisfies the continuity criterion; no sharpness example exists".into(),
        ));
    }
    if b == 0 {
        return Err(Error::Argument("b must be positive".into()));
    }
    if ladder.is_empty() {
        return Err(Error::Argument("ladder needs at least one lattice".into()));
    }
    let gamma = 0.5 / b as f64;
    let mut report = SharpnessReport {
        p,
        s: 0.0,
        sizes: Vec::new(),
        norms: Vec::new(),
        sup_values: Vec::new(),
        weight_sums: Vec::new(),
        increment_ratios: Vec::new(),
    };
    for lat in ladder {
        lat.validate()?;
        let s = p as f64 + b as f64 + 0.5 * lat.k as f64;
        report.s = s;
        let idx = AnisotropicIndex::new(s, gamma, phi.clone())?;
        let w2 = idx.weights2(lat);
        let mut alpha = vec![0; lat.k];
        alpha[0] = p;
        let sum = derivative_weight_sum(lat, s, gamma, phi, &alpha, 0)?;
        let volume = lat.l_x.powi(lat.k as i32) * lat.l_t;
        let norm_raw = (sum / lat.cell_volume()).sqrt();
        let sqrt_n = (lat.len() as f64).sqrt();
        let t0 = lat.time(0);
        let ip = Complex64::new(0.0, 1.0).powi(p as i32);
        let mut xi = vec![0.0; lat.k];
        let mut w_hat = vec![Complex64::new(0.0, 0.0); lat.len()];
        let mut d_hat = w_hat.clone();
        for flat in 0..lat.len() {
            let eta = lat.frequency(flat, &mut xi);
            let xi1p = xi[0].powi(p as i32);
            // amplitude of e^{i(ξ·x + η t)}, shifted to the sample origin t₀
            let a = ip.conj() * xi1p / (w2[flat] * volume.sqrt() * norm_raw);
            let c = a * sqrt_n * Complex64::from_polar(1.0, eta * t0);
            w_hat[flat] = c;
            d_hat[flat] = c * ip * xi1p;
        }
        fft_nd(&mut w_hat, &lat.shape(), true);
        fft_nd(&mut d_hat, &lat.shape(), true);
        let w = GridFunction::new(*lat, w_hat)?;
        let d = GridFunction::new(*lat, d_hat)?;
        report.sizes.push([lat.n_x, lat.n_t]);
        report.norms.push(hnorm(&w, &idx) * continuum_scale(lat));
        report.sup_values.push(d.max_abs());
        report.weight_sums.push(sum);
    }
    let inc: Vec<f64> = report.weight_sums.windows(2).map(|w| w[1] - w[0]).collect();
    report.increment_ratios = inc.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn lp(q: &[f64]) -> PhiFunction {
        PhiFunction::log_power(q.to_vec()).unwrap()
    }

    #[test]
    fn verdicts() {
        assert_eq!(criterion_verdict(&PhiFunction::constant_one()), Verdict::Diverges);
        assert_eq!(criterion_verdict(&lp(&[0.6])), Verdict::Converges);
        assert_eq!(criterion_verdict(&lp(&[0.4])), Verdict::Diverges);
        assert_eq!(criterion_verdict(&lp(&[0.5, 0.6])), Verdict::Converges);
        assert_eq!(criterion_verdict(&lp(&[0.5, 0.4])), Verdict::Diverges);
        assert_eq!(criterion_verdict(&lp(&[0.5, 0.5, 0.5])), Verdict::Diverges);
        assert_eq!(criterion_verdict(&lp(&[0.5, 0.5, 0.7])), Verdict::Converges);
    }

    #[test]
    fn partial_integrals_closed_forms() {
        let one = PhiFunction::constant_one();
        assert!((criterion_partial(&one, E).unwrap() - 1.0).abs() < 1e-12);
        assert!((criterion_partial(&one, 10f64.exp()).unwrap() - 10.0).abs() < 1e-10);
        // φ = 1 on [1, e], then ∫_e^R dr/(r ln² r) = 1 − 1/ln R
        let q1 = lp(&[1.0]);
        for r in [1e3, 1e12, 1e100] {
            let want = 2.0 - 1.0 / f64::ln(r);
            assert!((criterion_partial(&q1, r).unwrap() - want).abs() < 1e-8 * want);
        }
        // below the cutoff
        assert!((criterion_partial(&q1, 2.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(criterion_partial(&q1, 0.5).is_err());
        // q = [0.5, 1]: ∫ dv / v² in v = ln ln r from 1, plus ln(e^e) / φ(e^e)² = e / e
        let q = lp(&[0.5, 1.0]);
        let v = 50.0;
        let got = criterion_partial_at_level(&q, 2, v).unwrap();
        assert!((got - (2.0 - 1.0 / v)).abs() < 1e-8, "{got}");
    }

    #[test]
    fn oracle_agrees_with_verdict() {
        for q in [
            vec![],
            vec![0.6],
            vec![0.4],
            vec![0.5],
            vec![1.0],
            vec![0.5, 0.6],
            vec![0.5, 0.4],
            vec![0.5, 0.5],
            vec![0.5, 0.5, 0.8],
            vec![0.8, -0.5],
            vec![0.3, 2.0],
        ] {
            let phi = if q.is_empty() { PhiFunction::constant_one() } else { lp(&q) };
            let rep = criterion_oracle(&phi).unwrap();
            assert_eq!(rep.verdict, criterion_verdict(&phi), "{q:?}: {rep:?}");
        }
    }

    #[test]
    fn weight_sum_matches_direct_summation() {
        let lat = Lattice::standard(2, 8, 8, 2.0 * PI).unwrap();
        let phi = lp(&[1.0]);
        let (s, gamma) = (2.5, 0.5);
        let got = derivative_weight_sum(&lat, s, gamma, &phi, &[0, 0], 0).unwrap();
        let mut want = 0.0;
        for a in -4i64..4 {
            for c in -4i64..4 {
                for m in -4i64..4 {
                    let r = (1.0 + (a * a + c * c) as f64 + (m as f64).abs()).sqrt();
                    let ph = if r <= E { 1.0 } else { r.ln() };
                    want += 1.0 / (r.powf(2.0 * s) * ph * ph);
                }
            }
        }
        assert!((got - want).abs() < 1e-13 * want);
        let with_alpha = derivative_weight_sum(&lat, s, gamma, &phi, &[1, 0], 1).unwrap();
        assert!(with_alpha > 0.0 && with_alpha.is_finite());
        assert!(derivative_weight_sum(&lat, s, gamma, &phi, &[0], 0).is_err());
    }

    #[test]
    fn weight_sum_ladders() {
        let one = PhiFunction::constant_one();
        // k = 1, b = 1, p = 0: s = p + b + 1/2
        let sums = |s: f64| -> Vec<f64> {
            [16, 32, 64, 128, 256]
                .iter()
                .map(|&n| derivative_weight_sum(&Lattice::standard(1, n, n, 2.0 * PI).unwrap(), s, 0.5, &one, &[0], 0).unwrap())
                .collect()
        };
        let edge = sums(1.5);
        let inc: Vec<f64> = edge.windows(2).map(|w| w[1] - w[0]).collect();
        // logarithmic growth: constant increments per doubling
        for w in inc.windows(2) {
            assert!((w[1] / w[0] - 1.0).abs() < 0.15, "{inc:?}");
        }
        let safe = sums(6.5);
        let inc: Vec<f64> = safe.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(inc.windows(2).all(|w| w[1] < 0.1 * w[0]), "{inc:?}");
    }

    #[test]
    fn radial_reduction_is_proportional() {
        let one = PhiFunction::constant_one();
        for r in [10.0, 30.0, 100.0] {
            let rep = radial_reduction_check(2.0, 0.5, &one, &[0, 0], 0, r).unwrap();
            assert!(rep.relerr < 1e-3, "{r}: {rep:?}");
        }
        let phi = lp(&[1.0]);
        let rep = radial_reduction_check(3.0, 0.5, &phi, &[1, 0], 0, 30.0).unwrap();
        assert!(rep.relerr < 1e-3, "{rep:?}");
    }

    #[test]
    fn near_origin_exponent() {
        // lhs(R) ∝ (R² − 1)^{e+1} as R → 1, with e the radial exponent
        let one = PhiFunction::constant_one();
        for (alpha, beta) in [([0u32, 0u32], 0u32), ([1, 0], 0), ([0, 0], 1)] {
            let f = |r: f64| weight_integral(3.0, 0.5, &one, &alpha, beta, r).unwrap();
            let (r1, r2) = (1.0 + 1e-4, 1.0 + 4e-4);
            let slope = (f(r2) / f(r1)).ln() / ((r2 * r2 - 1.0) / (r1 * r1 - 1.0)).ln();
            let want = radial_exponent(0.5, &alpha, beta) + 1.0;
            assert!((slope - want).abs() < 1e-2, "{alpha:?} {beta}: {slope} vs {want}");
        }
    }

    #[test]
    fn sharpness_extremals() {
        let one = PhiFunction::constant_one();
        let ladder: Vec<_> = [8, 16, 32, 64].iter().map(|&n| Lattice::standard(1, n, n, 2.0 * PI).unwrap()).collect();
        let rep = sharpness_demo(&one, 0, 1, &ladder).unwrap();
        for ((&norm, &sup), &sum) in rep.norms.iter().zip(&rep.sup_values).zip(&rep.weight_sums) {
            assert!((norm - 1.0).abs() < 1e-10);
            assert!((sup - (sum / (4.0 * PI * PI)).sqrt()).abs() < 1e-10 * sup);
        }
        assert!(rep.sup_values.windows(2).all(|w| w[1] > w[0]));
        assert!(sharpness_demo(&lp(&[0.6]), 0, 1, &ladder).is_err());
    }
}
