//! Residuals of the k-gamma identities at individual points.
//!
//! Every check evaluates both sides with the caller's [`Evaluator`], works in
//! log-space where gamma values are multiplied, and passes when the residual
//! is within `SAFETY_FACTOR` times the combined error bounds of the two sides.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::kcore::{Backend, EvalResult, Evaluator, PrecisionConfig};
use crate::oracles;
use crate::real::Real;

/// Multiplier on the summed operand bounds that a residual may not exceed.
pub const SAFETY_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityId {
    Recurrence,
    GaussMult,
    EulerProduct,
    PolygammaMult,
    DigammaMult,
    Lemma3,
    PowerKernel,
}

impl IdentityId {
    pub const ALL: [IdentityId; 7] = [
        IdentityId::Recurrence,
        IdentityId::GaussMult,
        IdentityId::EulerProduct,
        IdentityId::PolygammaMult,
        IdentityId::DigammaMult,
        IdentityId::Lemma3,
        IdentityId::PowerKernel,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IdentityId::Recurrence => "recurrence",
            IdentityId::GaussMult => "gauss-mult",
            IdentityId::EulerProduct => "euler-product",
            IdentityId::PolygammaMult => "polygamma-mult",
            IdentityId::DigammaMult => "digamma-mult",
            IdentityId::Lemma3 => "lemma3",
            IdentityId::PowerKernel => "power-kernel",
        }
    }
}

impl std::fmt::Display for IdentityId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for IdentityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown identity '{s}'")))
    }
}

/// The parameters an identity was checked at; unused ones are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct IdentityOutcome {
    pub identity_id: IdentityId,
    pub inputs: IdentityInputs,
    pub lhs: EvalResult,
    pub rhs: EvalResult,
    /// `lhs − rhs`.
    pub residual: Real,
    pub threshold: f64,
    pub pass: bool,
}

impl IdentityOutcome {
    fn equality(
        identity_id: IdentityId,
        inputs: IdentityInputs,
        lhs: EvalResult,
        rhs: EvalResult,
    ) -> Self {
        let residual = &lhs.value - &rhs.value;
        let threshold = SAFETY_FACTOR * (lhs.abs_error_bound + rhs.abs_error_bound);
        let pass = residual.abs().to_f64() <= threshold;
        IdentityOutcome {
            identity_id,
            inputs,
            lhs,
            rhs,
            residual,
            threshold,
            pass,
        }
    }

    pub fn residual_f64(&self) -> f64 {
        self.residual.to_f64()
    }
}

/// Running sum of weighted results and exactly-rounded constants.
struct Combination<'a> {
    prec: &'a PrecisionConfig,
    value: Real,
    err: f64,
    magnitude: f64,
    ops: f64,
    backend: Backend,
}

impl<'a> Combination<'a> {
    fn new(ev: &'a Evaluator) -> Self {
        Combination {
            prec: &ev.precision,
            value: Real::zero(ev.precision.bits()),
            err: 0.0,
            magnitude: 0.0,
            ops: 0.0,
            backend: ev.backend,
        }
    }

    fn add(&mut self, r: &EvalResult, coef: &Real) {
        let c = coef.to_f64().abs();
        let term = &r.value * coef;
        self.magnitude += term.to_f64().abs();
        self.value = &self.value + &term;
        self.err += c * r.abs_error_bound;
        self.backend = r.backend;
        self.ops += 2.0;
    }

    /// Adds a constant computed with `ops` roundings at working precision.
    fn add_constant(&mut self, v: Real, ops: f64) {
        self.err += self.prec.rounding(ops, v.to_f64());
        self.magnitude += v.to_f64().abs();
        self.value = &self.value + &v;
        self.ops += 1.0;
    }

    fn finish(self) -> EvalResult {
        let err = self.err + self.prec.rounding(self.ops + 1.0, self.magnitude);
        EvalResult::new(self.value, err, self.backend, self.prec.target_digits)
    }
}

fn require_m(m: u32) -> Result<()> {
    if m < 2 {
        return Err(Error::Domain {
            what: "m",
            value: f64::from(m),
            requirement: "an integer >= 2",
        });
    }
    Ok(())
}

/// `x + s k / m` at working precision.
fn shifted(x: &Real, k: &Real, s: u32, m: u32) -> Real {
    x + &(k * f64::from(s) / f64::from(m))
}

/// `ln Γ_k(x + k) = ln x + ln Γ_k(x)`.
pub fn check_recurrence(ev: &Evaluator, x: f64, k: f64) -> Result<IdentityOutcome> {
    require_positive("x", x)?;
    require_positive("k", k)?;
    let (xr, kr) = (ev.real(x), ev.real(k));
    let lhs = ev.ln_gamma_k_at(&(&xr + &kr), &kr)?;
    let g = ev.ln_gamma_k_at(&xr, &kr)?;
    let one = ev.real(1.0);
    let mut rhs = Combination::new(ev);
    rhs.add_constant(xr.ln(), 1.0);
    rhs.add(&g, &one);
    let inputs = IdentityInputs {
        x: Some(x),
        k: Some(k),
        ..Default::default()
    };
    Ok(IdentityOutcome::equality(
        IdentityId::Recurrence,
        inputs,
        lhs,
        rhs.finish(),
    ))
}

/// Gauss multiplication:
/// `ln Γ_k(mx) = (mx/k − 1/2) ln m + ((m−1)/2) ln k + ((1−m)/2) ln 2π + Σ_s ln Γ_k(x + sk/m)`.
pub fn check_gauss_multiplication(
    ev: &Evaluator,
    x: f64,
    k: f64,
    m: u32,
) -> Result<IdentityOutcome> {
    require_positive("x", x)?;
    require_positive("k", k)?;
    require_m(m)?;
    let prec = &ev.precision;
    let (xr, kr) = (ev.real(x), ev.real(k));
    let mf = f64::from(m);
    let lhs = ev.ln_gamma_k_at(&(&xr * mf), &kr)?;

    let ln_m = ev.real(mf).ln();
    let ln_k = kr.ln();
    let ln_2pi = (prec.pi() * 2.0).ln();
    let one = ev.real(1.0);
    let mut rhs = Combination::new(ev);
    rhs.add_constant((&xr * mf / &kr - 0.5) * &ln_m, 4.0);
    rhs.add_constant(&ln_k * ((mf - 1.0) / 2.0), 2.0);
    rhs.add_constant(&ln_2pi * ((1.0 - mf) / 2.0), 3.0);
    for s in 0..m {
        let g = ev.ln_gamma_k_at(&shifted(&xr, &kr, s, m), &kr)?;
        rhs.add(&g, &one);
    }
    let inputs = IdentityInputs {
        x: Some(x),
        k: Some(k),
        m: Some(m),
        ..Default::default()
    };
    Ok(IdentityOutcome::equality(
        IdentityId::GaussMult,
        inputs,
        lhs,
        rhs.finish(),
    ))
}

/// `Σ_{s=1}^{m−1} ln Γ_k(sk/m) = ((1−m)/2) ln k + ((m−1)/2) ln 2π − (1/2) ln m`.
pub fn check_euler_product(ev: &Evaluator, k: f64, m: u32) -> Result<IdentityOutcome> {
    require_positive("k", k)?;
    require_m(m)?;
    let prec = &ev.precision;
    let kr = ev.real(k);
    let mf = f64::from(m);
    let one = ev.real(1.0);
    let mut lhs = Combination::new(ev);
    for s in 1..m {
        let g = ev.ln_gamma_k_at(&(&kr * f64::from(s) / mf), &kr)?;
        lhs.add(&g, &one);
    }
    let mut rhs = Combination::new(ev);
    rhs.add_constant(kr.ln() * ((1.0 - mf) / 2.0), 2.0);
    rhs.add_constant((prec.pi() * 2.0).ln() * ((mf - 1.0) / 2.0), 3.0);
    rhs.add_constant(-(ev.real(mf).ln() * 0.5), 2.0);
    let mut rhs = rhs.finish();
    let lhs = lhs.finish();
    rhs.backend = lhs.backend;
    let inputs = IdentityInputs {
        k: Some(k),
        m: Some(m),
        ..Default::default()
    };
    Ok(IdentityOutcome::equality(
        IdentityId::EulerProduct,
        inputs,
        lhs,
        rhs,
    ))
}

/// `ψ_k^(r)(mx) = m^{−(r+1)} Σ_s ψ_k^(r)(x + sk/m)` for `r ≥ 1`.
pub fn check_polygamma_multiplication(
    ev: &Evaluator,
    r: u32,
    x: f64,
    k: f64,
    m: u32,
) -> Result<IdentityOutcome> {
    if r < 1 {
        return Err(Error::Order {
            order: i64::from(r),
            min: 1,
        });
    }
    require_positive("x", x)?;
    require_positive("k", k)?;
    require_m(m)?;
    let (xr, kr) = (ev.real(x), ev.real(k));
    let mf = f64::from(m);
    let lhs = ev.psi_k_at(r, &(&xr * mf), &kr)?;
    let weight = ev.real(mf).powi(r as usize + 1).recip();
    let mut rhs = Combination::new(ev);
    for s in 0..m {
        let p = ev.psi_k_at(r, &shifted(&xr, &kr, s, m), &kr)?;
        rhs.add(&p, &weight);
    }
    let inputs = IdentityInputs {
        x: Some(x),
        k: Some(k),
        m: Some(m),
        r: Some(r),
        ..Default::default()
    };
    Ok(IdentityOutcome::equality(
        IdentityId::PolygammaMult,
        inputs,
        lhs,
        rhs.finish(),
    ))
}

/// `ψ_k(mx) = (ln m)/k + (1/m) Σ_s ψ_k(x + sk/m)`, the order-0 companion of
/// the polygamma multiplication formula.
pub fn check_digamma_multiplication(
    ev: &Evaluator,
    x: f64,
    k: f64,
    m: u32,
) -> Result<IdentityOutcome> {
    require_positive("x", x)?;
    require_positive("k", k)?;
    require_m(m)?;
    let (xr, kr) = (ev.real(x), ev.real(k));
    let mf = f64::from(m);
    let lhs = ev.psi_k_at(0, &(&xr * mf), &kr)?;
    let weight = ev.real(mf).recip();
    let mut rhs = Combination::new(ev);
    rhs.add_constant(ev.real(mf).ln() / &kr, 2.0);
    for s in 0..m {
        let p = ev.psi_k_at(0, &shifted(&xr, &kr, s, m), &kr)?;
        rhs.add(&p, &weight);
    }
    let inputs = IdentityInputs {
        x: Some(x),
        k: Some(k),
        m: Some(m),
        ..Default::default()
    };
    Ok(IdentityOutcome::equality(
        IdentityId::DigammaMult,
        inputs,
        lhs,
        rhs.finish(),
    ))
}

/// `Δ(n, t) = Σ_{s=1}^{n} e^{−st/(n+1)} − n e^{−t}`; passes when `Δ` exceeds
/// the threshold (strict positivity with margin).
pub fn check_lemma3(prec: &PrecisionConfig, n: u32, t: f64) -> Result<IdentityOutcome> {
    if n < 1 {
        return Err(Error::Domain {
            what: "n",
            value: f64::from(n),
            requirement: "an integer >= 1",
        });
    }
    require_positive("t", t)?;
    let bits = prec.bits();
    let tr = prec.real(t);
    let np1 = f64::from(n + 1);
    let mut lhs = Real::zero(bits);
    for s in 1..=n {
        lhs = lhs + (-(&tr * f64::from(s) / np1)).exp();
    }
    let rhs = (-&tr).exp() * f64::from(n);
    let lf = lhs.to_f64();
    let lhs_err = prec.rounding(4.0 * f64::from(n) + 1.0, lf);
    let rhs_err = prec.rounding(3.0, rhs.to_f64());
    let residual = &lhs - &rhs;
    let threshold = SAFETY_FACTOR * (lhs_err + rhs_err);
    let pass = residual.to_f64() > threshold;
    let digits = prec.target_digits;
    Ok(IdentityOutcome {
        identity_id: IdentityId::Lemma3,
        inputs: IdentityInputs {
            n: Some(n),
            t: Some(t),
            ..Default::default()
        },
        lhs: EvalResult::new(lhs, lhs_err, Backend::Direct, digits),
        rhs: EvalResult::new(rhs, rhs_err, Backend::Direct, digits),
        residual,
        threshold,
        pass,
    })
}

/// Quadrature self-test: `∫_0^∞ t^r e^{−xt} dt = r!/x^{r+1}`.
pub fn check_power_kernel(ev: &Evaluator, r: u32, x: f64) -> Result<IdentityOutcome> {
    require_positive("x", x)?;
    let prec = &ev.precision;
    let lhs = oracles::power_kernel_integral(r, x, &ev.quadrature)?;
    let lhs = EvalResult::new(
        lhs.value.with_bits(prec.bits()),
        lhs.abs_error_bound,
        lhs.backend,
        prec.target_digits,
    );
    let xr = ev.real(x);
    let mut fact = ev.real(1.0);
    for i in 2..=r {
        fact = fact * f64::from(i);
    }
    let exact = &fact / &xr.powi(r as usize + 1);
    let err = prec.rounding(f64::from(r) + 3.0, exact.to_f64());
    let rhs = EvalResult::new(exact, err, Backend::Direct, prec.target_digits);
    let inputs = IdentityInputs {
        x: Some(x),
        r: Some(r),
        ..Default::default()
    };
    Ok(IdentityOutcome::equality(
        IdentityId::PowerKernel,
        inputs,
        lhs,
        rhs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev() -> Evaluator {
        Evaluator::default()
    }

    #[test]
    fn recurrence_examples() {
        for (x, k) in [(1.0, 1.0), (2.0, 2.0), (0.3, 0.7)] {
            let o = check_recurrence(&ev(), x, k).unwrap();
            assert!(o.pass, "x={x} k={k} residual {:e}", o.residual_f64());
            assert!(o.threshold < 1e-25);
        }
        let o = check_recurrence(&ev().with_backend(Backend::Series), 0.3, 0.7).unwrap();
        assert!(o.pass);
    }

    #[test]
    fn gauss_multiplication_examples() {
        for (x, k, m) in [(1.0, 1.0, 2), (2.0, 2.0, 2), (0.5, 1.5, 3)] {
            let o = check_gauss_multiplication(&ev(), x, k, m).unwrap();
            assert!(
                o.pass,
                "residual {:e} threshold {:e}",
                o.residual_f64(),
                o.threshold
            );
        }
        // Γ(2) = 1 on the left
        let o = check_gauss_multiplication(&ev(), 1.0, 1.0, 2).unwrap();
        assert!(o.lhs.to_f64().abs() < 1e-30);
    }

    #[test]
    fn euler_product_examples() {
        let o = check_euler_product(&ev(), 1.0, 2).unwrap();
        assert!(o.pass);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((o.lhs.to_f64().exp() - sqrt_pi).abs() < 1e-15);
        // Γ(1/3)Γ(2/3) = 2π/√3
        let o = check_euler_product(&ev(), 1.0, 3).unwrap();
        assert!(o.pass);
        let expected = (2.0 * std::f64::consts::PI / 3f64.sqrt()).ln();
        assert!((o.lhs.to_f64() - expected).abs() < 1e-14);
        assert!(check_euler_product(&ev(), 2.0, 2).unwrap().pass);
    }

    #[test]
    fn polygamma_multiplication_examples() {
        let o = check_polygamma_multiplication(&ev(), 1, 1.0, 1.0, 2).unwrap();
        assert!(o.pass);
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((o.lhs.to_f64() - (pi2 / 6.0 - 1.0)).abs() < 1e-15);
        assert!(
            check_polygamma_multiplication(&ev(), 2, 1.0, 1.0, 2)
                .unwrap()
                .pass
        );
        assert!(
            check_polygamma_multiplication(&ev(), 1, 0.7, 2.0, 3)
                .unwrap()
                .pass
        );
        assert!(matches!(
            check_polygamma_multiplication(&ev(), 0, 1.0, 1.0, 2),
            Err(Error::Order { .. })
        ));
    }

    #[test]
    fn digamma_multiplication_examples() {
        for (x, k, m) in [(1.0, 1.0, 2), (2.0, 2.0, 2), (0.4, 1.0, 4)] {
            let o = check_digamma_multiplication(&ev(), x, k, m).unwrap();
            assert!(o.pass, "residual {:e}", o.residual_f64());
        }
    }

    #[test]
    fn digamma_multiplication_needs_the_log_term() {
        // without (ln m)/k the order-0 formula is off by exactly that amount
        let o = check_digamma_multiplication(&ev(), 1.0, 1.0, 2).unwrap();
        let without = o.lhs.to_f64() - (o.rhs.to_f64() - 2f64.ln());
        assert!((without - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn lemma3_examples() {
        let p = PrecisionConfig::default();
        let o = check_lemma3(&p, 1, 1.0).unwrap();
        assert!(o.pass);
        let expected = (-0.5f64).exp() - (-1.0f64).exp();
        assert!((o.residual_f64() - expected).abs() < 1e-16);
        assert!((o.residual_f64() - 0.238_651_218_5).abs() < 1e-10);
        assert!(check_lemma3(&p, 3, 2.0).unwrap().pass);
        let tiny = check_lemma3(&p, 1, 1e-6).unwrap();
        assert!(tiny.pass);
        assert!((tiny.residual_f64() / 1e-6 - 0.5).abs() < 1e-5);
        assert!(matches!(
            check_lemma3(&p, 1, 0.0),
            Err(Error::Domain { .. })
        ));
        assert!(check_lemma3(&p, 0, 1.0).is_err());
    }

    #[test]
    fn power_kernel_examples() {
        for (r, x) in [(0, 1.0), (3, 1.0), (2, 2.0)] {
            let o = check_power_kernel(&ev(), r, x).unwrap();
            assert!(o.pass, "r={r} x={x} residual {:e}", o.residual_f64());
        }
    }

    #[test]
    fn euler_product_is_gauss_at_k_over_m() {
        for (k, m) in [(1.0, 2), (2.0, 3), (0.5, 4)] {
            let g = check_gauss_multiplication(&ev(), k / f64::from(m), k, m).unwrap();
            let e = check_euler_product(&ev(), k, m).unwrap();
            let sum = (&g.residual + &e.residual).abs().to_f64();
            assert!(sum <= g.threshold + e.threshold, "{sum:e}");
        }
    }

    #[test]
    fn broken_identity_is_caught() {
        // an O(1) violation is far above any threshold
        let ev = ev();
        let mut o = check_recurrence(&ev, 1.5, 1.0).unwrap();
        o.rhs.value = &o.rhs.value + 1e-10;
        let res = (&o.lhs.value - &o.rhs.value).abs().to_f64();
        assert!(res > o.threshold);
    }

    #[test]
    fn identity_names_round_trip() {
        for id in IdentityId::ALL {
            assert_eq!(id.name().parse::<IdentityId>().unwrap(), id);
        }
        assert!("nope".parse::<IdentityId>().is_err());
    }
}
