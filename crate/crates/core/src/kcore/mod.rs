//! Evaluation of Γ_k, ln Γ_k, ψ_k and ψ_k^(r) on real positive arguments.
//!
//! Three interchangeable backends:
//!
//! * [`Backend::Reduction`] uses `Γ_k(x) = k^{x/k−1} Γ(x/k)`, hence
//!   `ψ_k(x) = (ln k + ψ(x/k))/k` and `ψ_k^(r)(x) = ψ^(r)(x/k)/k^{r+1}`, over
//!   the classical functions at working precision.
//! * [`Backend::Series`] sums the defining k-series directly.
//! * [`Backend::Quadrature`] integrates the integral representations in
//!   double precision (see [`crate::oracles`]).
//!
//! Every result carries an absolute error bound. Bounds are conservative
//! estimates (truncation bound plus a per-operation rounding allowance), not
//! interval arithmetic.

mod classical;
mod precision;
mod series;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::oracles::{self, QuadratureSpec};
use crate::real::Real;

pub use precision::{PrecisionConfig, GUARD_DIGITS, MAX_WORKING_DIGITS, ROUNDING_ULPS};

/// Natural log of the largest finite `f64`; `gamma_k` reports overflow above it.
pub const LN_MAX_REPRESENTABLE: f64 = 709.782_712_893_384;

/// Scale, multiplication order and derivative order shared by every claim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KParams {
    pub k: f64,
    pub m: u32,
    pub r: u32,
}

impl KParams {
    pub fn new(k: f64, m: u32, r: u32) -> Result<Self> {
        require_positive("k", k)?;
        if m < 2 {
            return Err(Error::Domain {
                what: "m",
                value: f64::from(m),
                requirement: "an integer >= 2",
            });
        }
        if r < 1 {
            return Err(Error::Order {
                order: i64::from(r),
                min: 1,
            });
        }
        Ok(KParams { k, m, r })
    }

    pub fn with_r(self, r: u32) -> Result<Self> {
        Self::new(self.k, self.m, r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Reduction,
    Series,
    Quadrature,
    /// Closed-form arithmetic or a combination of other results.
    Direct,
}

impl Backend {
    pub const EVALUATORS: [Backend; 3] = [Backend::Reduction, Backend::Series, Backend::Quadrature];

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Reduction => "reduction",
            Backend::Series => "series",
            Backend::Quadrature => "quadrature",
            Backend::Direct => "direct",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reduction" => Ok(Backend::Reduction),
            "series" => Ok(Backend::Series),
            "quadrature" => Ok(Backend::Quadrature),
            other => Err(Error::Config(format!(
                "unknown backend '{other}' (expected reduction, series or quadrature)"
            ))),
        }
    }
}

/// A computed value with its propagated absolute error bound.
#[derive(Debug, Clone)]
pub struct EvalResult {
    pub value: Real,
    pub abs_error_bound: f64,
    pub backend: Backend,
    pub digits_requested: u32,
}

impl EvalResult {
    pub fn new(value: Real, abs_error_bound: f64, backend: Backend, digits_requested: u32) -> Self {
        EvalResult {
            value,
            abs_error_bound,
            backend,
            digits_requested,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// Whether two results for the same quantity are consistent:
    /// `|v1 − v2| ≤ b1 + b2`.
    pub fn agrees_with(&self, other: &EvalResult) -> bool {
        let diff = (&self.value - &other.value).abs().to_f64();
        diff <= self.abs_error_bound + other.abs_error_bound
    }
}

/// Backend plus precision; the common entry point for every evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluator {
    pub backend: Backend,
    pub precision: PrecisionConfig,
    pub quadrature: QuadratureSpec,
}

impl Default for Evaluator {
    fn default() -> Self {
        Evaluator::new(Backend::Reduction, PrecisionConfig::default())
    }
}

fn check_positive_real(what: &'static str, v: &Real) -> Result<()> {
    if v.is_positive() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: v.to_f64(),
            requirement: "a finite value > 0",
        })
    }
}

impl Evaluator {
    pub fn new(backend: Backend, precision: PrecisionConfig) -> Self {
        Evaluator {
            backend,
            precision,
            quadrature: QuadratureSpec::default(),
        }
    }

    pub fn with_backend(&self, backend: Backend) -> Self {
        Evaluator { backend, ..*self }
    }

    pub fn with_precision(&self, precision: PrecisionConfig) -> Self {
        Evaluator { precision, ..*self }
    }

    /// Lifts an `f64` to the working precision.
    pub fn real(&self, x: f64) -> Real {
        self.precision.real(x)
    }

    fn result(&self, value: Real, err: f64, backend: Backend) -> EvalResult {
        EvalResult::new(value, err, backend, self.precision.target_digits)
    }

    pub fn gamma_k(&self, x: f64, k: f64) -> Result<EvalResult> {
        require_positive("x", x)?;
        require_positive("k", k)?;
        self.gamma_k_at(&self.real(x), &self.real(k))
    }

    pub fn ln_gamma_k(&self, x: f64, k: f64) -> Result<EvalResult> {
        require_positive("x", x)?;
        require_positive("k", k)?;
        self.ln_gamma_k_at(&self.real(x), &self.real(k))
    }

    pub fn digamma_k(&self, x: f64, k: f64) -> Result<EvalResult> {
        require_positive("x", x)?;
        require_positive("k", k)?;
        self.psi_k_at(0, &self.real(x), &self.real(k))
    }

    pub fn polygamma_k(&self, r: u32, x: f64, k: f64) -> Result<EvalResult> {
        if r < 1 {
            return Err(Error::Order {
                order: i64::from(r),
                min: 1,
            });
        }
        require_positive("x", x)?;
        require_positive("k", k)?;
        self.psi_k_at(r, &self.real(x), &self.real(k))
    }

    /// Γ_k at a working-precision argument. Signals [`Error::Overflow`] when
    /// the value exceeds the `f64` range.
    pub fn gamma_k_at(&self, x: &Real, k: &Real) -> Result<EvalResult> {
        let ln = self.ln_gamma_k_at(x, k)?;
        let lnf = ln.to_f64();
        if lnf > LN_MAX_REPRESENTABLE {
            return Err(Error::Overflow {
                x: x.to_f64(),
                k: k.to_f64(),
                ln_value: lnf,
            });
        }
        let value = ln.value.exp();
        let v = value.to_f64();
        // |e^{a±b} − e^a| ≤ e^a (e^b − 1)
        let err = v * ln.abs_error_bound.exp_m1() + self.precision.rounding(2.0 + lnf.abs(), v);
        Ok(self.result(value, err, ln.backend))
    }

    pub fn ln_gamma_k_at(&self, x: &Real, k: &Real) -> Result<EvalResult> {
        check_positive_real("x", x)?;
        check_positive_real("k", k)?;
        let prec = &self.precision;
        match self.backend {
            Backend::Reduction | Backend::Direct => {
                // ln Γ_k(x) = (x/k − 1) ln k + ln Γ(x/k)
                let y = x / k;
                let lg = classical::ln_gamma(&y, prec);
                let a = (&y - 1.0) * k.ln();
                let value = &a + &lg.value;
                let yf = y.to_f64();
                // argument rounding: |ψ(y)| y δ with |ψ(y)| ≤ |ln y| + 1/y
                let arg = prec.rounding(2.0, yf * yf.ln().abs() + 1.0);
                let err =
                    lg.err + arg + prec.rounding(3.0, a.to_f64().abs() + value.to_f64().abs());
                Ok(self.result(value, err, Backend::Reduction))
            }
            Backend::Series => {
                let s = series::ln_gamma_k(x, k, prec);
                Ok(self.result(s.value, s.err, Backend::Series))
            }
            Backend::Quadrature => {
                let (xf, kf) = (x.to_f64(), k.to_f64());
                let q = oracles::ln_gamma_k_integral(xf, kf, &self.quadrature)?;
                // |ψ_k(x)| ≤ (|ln k| + |ln(x/k)| + k/x)/k
                let slope = (kf.ln().abs() + (xf / kf).ln().abs() + kf / xf) / kf;
                let err = q.abs_error_bound + slope * (x - &self.real(xf)).abs().to_f64();
                Ok(self.result(q.value.with_bits(prec.bits()), err, Backend::Quadrature))
            }
        }
    }

    /// ψ_k^(order) at a working-precision argument; order 0 is ψ_k itself.
    pub fn psi_k_at(&self, order: u32, x: &Real, k: &Real) -> Result<EvalResult> {
        check_positive_real("x", x)?;
        check_positive_real("k", k)?;
        let prec = &self.precision;
        match self.backend {
            Backend::Reduction | Backend::Direct => Ok(if order == 0 {
                self.digamma_reduction(x, k)
            } else {
                self.polygamma_reduction(order, x, k)
            }),
            Backend::Series => {
                let s = if order == 0 {
                    series::digamma_k(x, k, prec)
                } else {
                    series::polygamma_k(order, x, k, prec)
                };
                Ok(self.result(s.value, s.err, Backend::Series))
            }
            Backend::Quadrature => {
                let (xf, kf) = (x.to_f64(), k.to_f64());
                let q = if order == 0 {
                    oracles::digamma_k_integral(
                        xf,
                        kf,
                        &self.quadrature,
                        oracles::DigammaForm::HalfLine,
                    )?
                } else {
                    oracles::polygamma_k_integral(order, xf, kf, &self.quadrature)?
                };
                // |ψ_k^(order+1)(x)| ≤ (order+1)! (1/x^{order+2} + 1/((order+1) k x^{order+1}))
                let o = f64::from(order);
                let fact: f64 = (1..=order + 1).map(f64::from).product();
                let slope = fact * (xf.powf(-(o + 2.0)) + xf.powf(-(o + 1.0)) / ((o + 1.0) * kf));
                let err = q.abs_error_bound + slope * (x - &self.real(xf)).abs().to_f64();
                Ok(self.result(q.value.with_bits(prec.bits()), err, Backend::Quadrature))
            }
        }
    }

    fn digamma_reduction(&self, x: &Real, k: &Real) -> EvalResult {
        let prec = &self.precision;
        // shift x/k ≥ 8 with ψ_k(x+k) = 1/x + ψ_k(x), then reduce
        let (w, shift_sum, shifts) = series::shift_up(x, k);
        let y = &w / k;
        let psi = classical::digamma(&y, prec);
        let ln_k = k.ln();
        let value = (&ln_k + &psi.value) / k - &shift_sum;
        let (kf, yf) = (k.to_f64(), y.to_f64());
        let pf = psi.value.to_f64().abs();
        let err = psi.err / kf
            + prec.rounding(2.0, (1.0 + 1.0 / yf) / kf)
            + prec.rounding(4.0, (ln_k.to_f64().abs() + pf) / kf)
            + prec.rounding(
                2.0 * shifts as f64 + 2.0,
                shift_sum.to_f64() + value.to_f64().abs(),
            );
        self.result(value, err, Backend::Reduction)
    }

    fn polygamma_reduction(&self, r: u32, x: &Real, k: &Real) -> EvalResult {
        let prec = &self.precision;
        let y = x / k;
        let psi = classical::polygamma(r, &y, prec);
        let scale = k.powi(r as usize + 1);
        let value = &psi.value / &scale;
        let sf = scale.to_f64();
        let pf = psi.value.to_f64().abs();
        // argument rounding: |y ψ^(r+1)(y)| ≤ (r+1)|ψ^(r)(y)|
        let err = (psi.err + prec.rounding(f64::from(r) + 2.0, pf)) / sf
            + prec.rounding(f64::from(r) + 3.0, value.to_f64());
        self.result(value, err, Backend::Reduction)
    }
}

/// Pochhammer k-symbol `(x)_{n,k} = x (x+k) ⋯ (x+(n−1)k)`; 1 when `n = 0`.
pub fn pochhammer_k(x: f64, n: u32, k: f64) -> Result<f64> {
    require_positive("x", x)?;
    require_positive("k", k)?;
    Ok((0..n).map(|j| x + f64::from(j) * k).product())
}

pub fn gamma_k(
    x: f64,
    k: f64,
    backend: Backend,
    precision: &PrecisionConfig,
) -> Result<EvalResult> {
    Evaluator::new(backend, *precision).gamma_k(x, k)
}

/// ln Γ_k through the default reduction backend.
pub fn ln_gamma_k(x: f64, k: f64, precision: &PrecisionConfig) -> Result<EvalResult> {
    Evaluator::new(Backend::Reduction, *precision).ln_gamma_k(x, k)
}

pub fn digamma_k(
    x: f64,
    k: f64,
    backend: Backend,
    precision: &PrecisionConfig,
) -> Result<EvalResult> {
    Evaluator::new(backend, *precision).digamma_k(x, k)
}

pub fn polygamma_k(
    r: u32,
    x: f64,
    k: f64,
    backend: Backend,
    precision: &PrecisionConfig,
) -> Result<EvalResult> {
    Evaluator::new(backend, *precision).polygamma_k(r, x, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer_k(5.0, 0, 2.0).unwrap(), 1.0);
        assert_eq!(pochhammer_k(3.0, 2, 2.0).unwrap(), 15.0);
        assert_eq!(pochhammer_k(2.0, 3, 1.0).unwrap(), 24.0);
        assert!(matches!(
            pochhammer_k(0.0, 2, 1.0),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            pochhammer_k(1.0, 2, -1.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn kparams_validation() {
        assert!(KParams::new(1.0, 2, 1).is_ok());
        assert!(matches!(KParams::new(0.0, 2, 1), Err(Error::Domain { .. })));
        assert!(matches!(KParams::new(1.0, 1, 1), Err(Error::Domain { .. })));
        assert!(matches!(KParams::new(1.0, 2, 0), Err(Error::Order { .. })));
        assert!(KParams::new(f64::NAN, 2, 1).is_err());
    }

    #[test]
    fn gamma_k_examples() {
        for backend in Backend::EVALUATORS {
            let g = gamma_k(2.0, 2.0, backend, &prec()).unwrap();
            assert!(
                (g.to_f64() - 1.0).abs() <= g.abs_error_bound.max(1e-15),
                "{backend}"
            );
            let g = gamma_k(5.0, 1.0, backend, &prec()).unwrap();
            assert!((g.to_f64() - 24.0).abs() < 1e-11, "{backend}");
            let g = gamma_k(6.0, 2.0, backend, &prec()).unwrap();
            assert!((g.to_f64() - 8.0).abs() < 1e-11, "{backend}");
        }
    }

    #[test]
    fn ln_gamma_k_examples() {
        let p = prec();
        assert!(ln_gamma_k(2.0, 2.0, &p).unwrap().to_f64().abs() < 1e-30);
        let v = ln_gamma_k(5.0, 1.0, &p).unwrap().to_f64();
        assert!((v - 3.178_053_830_347_945_6).abs() < 1e-15);
        let v = ln_gamma_k(6.0, 2.0, &p).unwrap().to_f64();
        assert!((v - 2.079_441_541_679_835_7).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let p = prec();
        assert!(matches!(
            gamma_k(0.0, 1.0, Backend::Reduction, &p),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            gamma_k(1.0, 0.0, Backend::Series, &p),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            ln_gamma_k(-1.0, 1.0, &p),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            digamma_k(1.0, -2.0, Backend::Reduction, &p),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            polygamma_k(0, 1.0, 1.0, Backend::Reduction, &p),
            Err(Error::Order { order: 0, min: 1 })
        ));
        assert!(matches!(
            polygamma_k(1, 0.0, 1.0, Backend::Reduction, &p),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn gamma_k_signals_overflow() {
        // Γ_{0.5}(100) = 0.5^199 · 199! ≈ 1e312
        let e = gamma_k(100.0, 0.5, Backend::Reduction, &prec()).unwrap_err();
        assert!(matches!(e, Error::Overflow { .. }));
        let ln = ln_gamma_k(100.0, 0.5, &prec()).unwrap();
        assert!(ln.to_f64() > LN_MAX_REPRESENTABLE);
    }

    #[test]
    fn digamma_k_examples() {
        let p = prec();
        let g = p.euler_gamma().to_f64();
        for backend in Backend::EVALUATORS {
            let v = digamma_k(1.0, 1.0, backend, &p).unwrap();
            assert!((v.to_f64() + g).abs() < 1e-12, "{backend}");
            let v = digamma_k(2.0, 2.0, backend, &p).unwrap();
            assert!(
                (v.to_f64() - (2f64.ln() - g) / 2.0).abs() < 1e-12,
                "{backend}"
            );
            let v = digamma_k(2.0, 1.0, backend, &p).unwrap();
            assert!((v.to_f64() - (1.0 - g)).abs() < 1e-12, "{backend}");
        }
    }

    #[test]
    fn backend_parsing() {
        assert_eq!("series".parse::<Backend>().unwrap(), Backend::Series);
        assert!("lanczos".parse::<Backend>().is_err());
        assert_eq!(Backend::Quadrature.to_string(), "quadrature");
    }
}
