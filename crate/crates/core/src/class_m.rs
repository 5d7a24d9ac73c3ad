//! Slowly varying function parameters φ: [1, ∞) → (0, ∞).
//!
//! Only two shapes are represented: the constant `φ ≡ 1` and the iterated
//! logarithm family
//!
//! ```text
//! φ(r) = (log r)^q₁ · (log log r)^q₂ · … · (log…log r)^q_k     for r ≥ R₀
//! φ(r) = φ(R₀)                                                  for 1 ≤ r < R₀
//! ```
//!
//! where the cutoff `R₀` is at least `e↑↑k` (a tower of `k` exponentials), the
//! smallest point where every iterated logarithm is ≥ 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deepest supported iterated logarithm. `e↑↑4` does not fit in an `f64`.
pub const MAX_LOG_DEPTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiKind {
    ConstantOne,
    LogPower,
}

/// A function parameter from the class of slowly varying weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhiRepr", into = "PhiRepr")]
pub struct PhiFunction {
    kind: PhiKind,
    exponents: Vec<f64>,
    cutoff: f64,
}

#[derive(Serialize, Deserialize)]
struct PhiRepr {
    kind: PhiKind,
    #[serde(default)]
    exponents: Vec<f64>,
    #[serde(default)]
    cutoff: Option<f64>,
}

impl TryFrom<PhiRepr> for PhiFunction {
    type Error = Error;

    fn try_from(r: PhiRepr) -> Result<Self> {
        match r.kind {
            PhiKind::ConstantOne => {
                if !r.exponents.is_empty() {
                    return Err(Error::Argument(
                        "constant_one takes no exponents".into(),
                    ));
                }
                Ok(PhiFunction::constant_one())
            }
            PhiKind::LogPower => match r.cutoff {
                Some(c) => PhiFunction::log_power_with_cutoff(r.exponents, c),
                None => PhiFunction::log_power(r.exponents),
            },
        }
    }
}

impl From<PhiFunction> for PhiRepr {
    fn from(p: PhiFunction) -> Self {
        PhiRepr {
            kind: p.kind,
            exponents: p.exponents,
            cutoff: Some(p.cutoff),
        }
    }
}

/// `e↑↑k`: 1, e, e^e, e^(e^e).
pub fn exp_tower(k: usize) -> f64 {
    (0..k).fold(1.0, |acc, _| acc.exp())
}

impl PhiFunction {
    pub fn constant_one() -> Self {
        PhiFunction {
            kind: PhiKind::ConstantOne,
            exponents: Vec::new(),
            cutoff: 1.0,
        }
    }

    /// Iterated-log power with the smallest admissible cutoff `e↑↑k`.
    pub fn log_power(exponents: Vec<f64>) -> Result<Self> {
        let cutoff = exp_tower(exponents.len());
        Self::log_power_with_cutoff(exponents, cutoff)
    }

    pub fn log_power_with_cutoff(exponents: Vec<f64>, cutoff: f64) -> Result<Self> {
        if exponents.len() > MAX_LOG_DEPTH {
            return Err(Error::Unsupported(format!(
                "at most {MAX_LOG_DEPTH} iterated logarithms are representable, got {}",
                exponents.len()
            )));
        }
        if exponents.iter().any(|q| !q.is_finite()) {
            return Err(Error::Argument("exponents must be finite".into()));
        }
        let min_cutoff = exp_tower(exponents.len());
        // one ulp of slack so that e.g. `cutoff = e` passes for k = 1
        if !(cutoff.is_finite() && cutoff >= min_cutoff * (1.0 - 4.0 * f64::EPSILON)) {
            return Err(Error::Argument(format!(
                "cutoff {cutoff} must be at least e↑↑{} = {min_cutoff}",
                exponents.len()
            )));
        }
        Ok(PhiFunction {
            kind: PhiKind::LogPower,
            exponents,
            cutoff: cutoff.max(min_cutoff),
        })
    }

    pub fn kind(&self) -> PhiKind {
        self.kind
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn is_constant_one(&self) -> bool {
        self.kind == PhiKind::ConstantOne || self.exponents.iter().all(|&q| q == 0.0)
    }

    /// `ln φ(r)` for `r ≥ cutoff`, no domain checks.
    fn ln_formula(&self, r: f64) -> f64 {
        let mut level = r;
        let mut acc = 0.0;
        for &q in &self.exponents {
            level = level.ln();
            if q != 0.0 {
                acc += q * level.ln();
            }
        }
        acc
    }

    /// `φ(r)` for `r ≥ 1`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 1.0) {
            return Err(Error::Domain(format!("phi is defined on r >= 1, got {r}")));
        }
        Ok(self.eval_unchecked(r))
    }

    /// `φ(r)`; arguments below 1 are treated as 1.
    pub fn eval_unchecked(&self, r: f64) -> f64 {
        if self.kind == PhiKind::ConstantOne {
            return 1.0;
        }
        self.ln_formula(r.max(self.cutoff)).exp()
    }

    /// `ln φ(r)` where `value = log^level r` (with `log^0 r = r`).
    ///
    /// Lets callers evaluate φ at arguments far beyond `f64` range, e.g.
    /// `r = exp(exp(10⁶))` at `level = 2`. Iterated logs below `level` are
    /// recovered by exponentiation and may overflow to ±∞.
    pub fn ln_eval_from_level(&self, level: usize, value: f64) -> f64 {
        if self.is_constant_one() {
            return 0.0;
        }
        // logs[j] = log^j r for j = 0..=k
        let k = self.exponents.len();
        let cutoff_at_level = (0..level).fold(self.cutoff, |acc, _| acc.ln());
        if value < cutoff_at_level {
            return self.ln_formula(self.cutoff);
        }
        let depth = k.max(level);
        let mut logs = vec![0.0; depth + 1];
        logs[level] = value;
        for j in (0..level).rev() {
            logs[j] = logs[j + 1].exp();
        }
        for j in level + 1..=depth {
            logs[j] = logs[j - 1].ln();
        }
        self.exponents
            .iter()
            .enumerate()
            .filter(|(_, &q)| q != 0.0)
            .map(|(i, &q)| {
                // ln(log^{i+1} r) = log^{i+2} r
                let ln_level = if i + 2 <= depth {
                    logs[i + 2]
                } else {
                    logs[i + 1].ln()
                };
                q * ln_level
            })
            .sum()
    }
}

/// `φ(r)`, rejecting `r < 1`.
pub fn eval_phi(phi: &PhiFunction, r: f64) -> Result<f64> {
    phi.eval(r)
}

/// `|φ(λr)/φ(r) − 1|` at each `r`.
pub fn slow_variation_defect(phi: &PhiFunction, lambda: f64, r_values: &[f64]) -> Result<Vec<f64>> {
    if r_values.is_empty() {
        return Err(Error::Argument("r_values must be nonempty".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    r_values
        .iter()
        .map(|&r| {
            let base = phi.eval(r)?;
            let scaled = phi.eval(lambda * r)?;
            Ok((scaled / base - 1.0).abs())
        })
        .collect()
}

/// Points per decade in the geometric sample used by [`epsilon_bound_constant`].
pub const GEOMETRIC_SAMPLES_PER_DECADE: usize = 64;

/// Geometric ladder on `[1, r_max]` with both endpoints included.
pub fn geometric_sample(r_max: f64, per_decade: usize) -> Vec<f64> {
    if r_max <= 1.0 {
        return vec![1.0];
    }
    let decades = r_max.log10();
    let count = ((decades * per_decade as f64).ceil() as usize).max(1);
    (0..=count)
        .map(|i| 10f64.powf(decades * i as f64 / count as f64))
        .collect()
}

/// Smallest `c ≥ 1` with `c⁻¹ r^{−ε} ≤ φ(r) ≤ c r^ε` over a geometric sample of `[1, r_max]`.
pub fn epsilon_bound_constant(phi: &PhiFunction, eps: f64, r_max: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if !(r_max >= 1.0) {
        return Err(Error::Domain(format!("r_max must be >= 1, got {r_max}")));
    }
    let c = geometric_sample(r_max, GEOMETRIC_SAMPLES_PER_DECADE)
        .into_iter()
        .map(|r| {
            let v = phi.eval_unchecked(r);
            let re = r.powf(eps);
            (v / re).max(1.0 / (v * re))
        })
        .fold(1.0, f64::max);
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn constant_one_is_one() {
        assert_eq!(eval_phi(&PhiFunction::constant_one(), 17.0).unwrap(), 1.0);
    }

    #[test]
    fn log_at_cutoff_is_one() {
        let phi = PhiFunction::log_power_with_cutoff(vec![1.0], E).unwrap();
        assert!((phi.eval(E).unwrap() - 1.0).abs() < 1e-15);
        let phi = PhiFunction::log_power(vec![1.0]).unwrap();
        assert!((phi.eval(E * E).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn below_one_is_domain_error() {
        let phi = PhiFunction::log_power(vec![1.0]).unwrap();
        assert!(matches!(phi.eval(0.5), Err(Error::Domain(_))));
        assert!(matches!(phi.eval(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn cutoff_below_tower_rejected() {
        assert!(PhiFunction::log_power_with_cutoff(vec![1.0, 1.0], 10.0).is_err());
        assert!(PhiFunction::log_power(vec![1.0; 4]).is_err());
    }

    #[test]
    fn continuity_across_cutoff() {
        for q in [vec![1.0], vec![2.0, -1.0], vec![-0.5, 0.3, 1.0]] {
            let phi = PhiFunction::log_power(q).unwrap();
            let c = phi.cutoff();
            let below = phi.eval(c * (1.0 - 1e-14)).unwrap();
            let above = phi.eval(c * (1.0 + 1e-14)).unwrap();
            assert!(((below - above) / above).abs() < 1e-12, "{below} vs {above}");
        }
    }

    #[test]
    fn defect_examples() {
        let one = PhiFunction::constant_one();
        assert_eq!(slow_variation_defect(&one, 2.0, &[5.0, 1e9]).unwrap(), vec![0.0, 0.0]);

        let log = PhiFunction::log_power(vec![1.0]).unwrap();
        let d = slow_variation_defect(&log, 2.0, &[1e6, 1e12]).unwrap();
        let expect6 = ((2e6f64).ln() / (1e6f64).ln() - 1.0).abs();
        let expect12 = ((2e12f64).ln() / (1e12f64).ln() - 1.0).abs();
        assert!((d[0] - expect6).abs() < 1e-14);
        assert!((d[0] - 0.0502).abs() < 1e-4);
        assert!((d[1] - expect12).abs() < 1e-14);
        assert!((d[1] - 0.0251).abs() < 1e-4);
        assert!(d[1] < d[0]);

        assert!(slow_variation_defect(&log, 2.0, &[]).is_err());
    }

    #[test]
    fn defect_decreases_along_ladder() {
        let ladder = [1e3, 1e6, 1e9, 1e12];
        let phis = [
            PhiFunction::log_power(vec![1.0]).unwrap(),
            PhiFunction::log_power(vec![-1.0]).unwrap(),
            PhiFunction::log_power(vec![2.0, -1.0]).unwrap(),
            PhiFunction::log_power(vec![0.5, 0.6]).unwrap(),
        ];
        for phi in &phis {
            for lambda in [0.5, 2.0, 10.0] {
                let d = slow_variation_defect(phi, lambda, &ladder).unwrap();
                for w in d.windows(2) {
                    assert!(w[1] < w[0], "{phi:?} lambda={lambda}: {d:?}");
                }
            }
        }
    }

    #[test]
    fn epsilon_constant_examples() {
        let one = PhiFunction::constant_one();
        assert_eq!(epsilon_bound_constant(&one, 0.1, 1e6).unwrap(), 1.0);

        // brute force over the same ladder, written out independently
        let log = PhiFunction::log_power(vec![1.0]).unwrap();
        let mut brute: f64 = 1.0;
        for r in geometric_sample(1e3, GEOMETRIC_SAMPLES_PER_DECADE) {
            let v = if r < E { 1.0 } else { r.ln() };
            brute = brute.max(v / r).max(1.0 / (v * r));
        }
        let c = epsilon_bound_constant(&log, 1.0, 1e3).unwrap();
        assert!((c - brute).abs() < 1e-14);
        // 1/(φ r) is maximized at r = 1 with value 1
        assert_eq!(c, 1.0);

        let inv = PhiFunction::log_power(vec![-1.0]).unwrap();
        let c = epsilon_bound_constant(&inv, 0.5, 1e4).unwrap();
        // max of log r / sqrt(r) is 2/e at r = e²
        assert!(c.is_finite() && c >= 1.0);
        assert!(c <= 1.0f64.max(2.0 / E) + 1e-12);
    }

    #[test]
    fn json_round_trip_and_default_cutoff() {
        let phi: PhiFunction =
            serde_json::from_str(r#"{"kind":"log_power","exponents":[0.5,0.6]}"#).unwrap();
        assert!((phi.cutoff() - E.exp()).abs() < 1e-12);
        let text = serde_json::to_string(&phi).unwrap();
        let back: PhiFunction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, phi);
        let one: PhiFunction = serde_json::from_str(r#"{"kind":"constant_one"}"#).unwrap();
        assert!(one.is_constant_one());
        assert!(serde_json::from_str::<PhiFunction>(r#"{"kind":"log_power","exponents":[1],"cutoff":2}"#).is_err());
    }

    #[test]
    fn ln_eval_from_level_matches_direct() {
        let phi = PhiFunction::log_power(vec![0.5, -0.4]).unwrap();
        for r in [20.0f64, 1e3, 1e10, 1e200] {
            let direct = phi.eval(r).unwrap().ln();
            assert!((phi.ln_eval_from_level(0, r) - direct).abs() < 1e-12);
            assert!((phi.ln_eval_from_level(1, r.ln()) - direct).abs() < 1e-12);
            assert!((phi.ln_eval_from_level(2, r.ln().ln()) - direct).abs() < 1e-12);
        }
        // far beyond f64 range: ln φ = 0.5 ln(log r) − 0.4 ln(loglog r), log r = e^w
        let w: f64 = 1e6;
        let v = phi.ln_eval_from_level(2, w);
        assert!((v - (0.5 * w - 0.4 * w.ln())).abs() < 1e-6);
    }
}
