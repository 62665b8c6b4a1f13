//! Slow, independent evaluations used to cross-check the kcore backends.
//!
//! Quadrature runs in double precision over the integral representations;
//! improper integrals are truncated at a cutoff whose analytic tail bound is
//! added to the reported error. The limit definition of Γ_k is available as a
//! low-accuracy sanity check.

pub mod quadrature;

use crate::error::{require_positive, Error, Result};
use crate::kcore::{Backend, EvalResult, PrecisionConfig};
use crate::real::Real;

pub use quadrature::{integrate, Integral, QuadratureSpec, Rule};

/// Integrand evaluation error allowance, in units of machine epsilon.
const EVAL_ULPS: f64 = 8.0;

/// Lower end of the polygamma integral handled in closed form, times `1/k`.
pub const ENDPOINT_SPLIT: f64 = 1e-6;

fn oracle_result(value: Real, err: f64) -> EvalResult {
    EvalResult::new(value, err, Backend::Quadrature, 13)
}

fn oracle_bits() -> usize {
    PrecisionConfig::default().bits()
}

/// Integrates a sign-definite `f` over `[lo, ∞)`.
///
/// The finite part is integrated through `breaks` (which must start at `lo`);
/// the cutoff is pushed outward until `tail(T)` is below half the target.
fn half_line(
    f: impl Fn(f64) -> f64 + Copy,
    breaks: &[f64],
    tail: impl Fn(f64) -> f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    spec.validate()?;
    let sub = spec.max_subdivisions;
    if let Some(t) = spec.upper_cutoff {
        let mut pts: Vec<f64> = breaks.iter().copied().filter(|&b| b < t).collect();
        pts.push(t);
        let body = quadrature::integrate_pieces(
            f,
            &pts,
            spec.abs_tolerance / 2.0,
            spec.rel_tolerance,
            sub,
        )?;
        let tail_bound = tail(t);
        let target = spec.target(body.value);
        if tail_bound > target / 2.0 {
            return Err(Error::Config(format!(
                "upper_cutoff {t} leaves a tail bound {tail_bound:e} above half the tolerance {target:e}"
            )));
        }
        return Ok((body.value, body.error + tail_bound));
    }

    let body =
        quadrature::integrate_pieces(f, breaks, spec.abs_tolerance / 2.0, spec.rel_tolerance, sub)?;
    let mut value = body.value;
    let mut error = body.error;
    let mut t = *breaks.last().expect("non-empty breaks");
    let mut tail_bound = tail(t);
    let mut steps = 0;
    while tail_bound > spec.target(value) / 2.0 {
        steps += 1;
        if steps > 400 || !t.is_finite() {
            return Err(Error::Convergence {
                estimate: tail_bound,
                tolerance: spec.target(value) / 2.0,
                subdivisions: steps,
            });
        }
        let next = t * 1.5;
        let piece = quadrature::integrate(
            f,
            t,
            next,
            spec.abs_tolerance / 4.0,
            spec.rel_tolerance,
            sub,
        )?;
        value += piece.value;
        error += piece.error;
        t = next;
        tail_bound = tail(t);
    }
    Ok((value, error + tail_bound))
}

/// `Γ(r+1, z) = r! e^{−z} Σ_{j≤r} z^j/j!` for integer `r`, divided by `x^{r+1}`
/// where `z = x T`: the tail `∫_T^∞ t^r e^{−xt} dt`.
fn power_kernel_tail(r: u32, x: f64, t: f64) -> f64 {
    let z = x * t;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=r {
        term *= z / f64::from(j);
        sum += term;
    }
    let fact: f64 = (1..=r).map(f64::from).product();
    fact * (-z).exp() * sum / x.powi(r as i32 + 1)
}

/// `∫_0^∞ t^r e^{−xt} dt`, which equals `r!/x^{r+1}`; a self-test of the
/// quadrature machinery.
pub fn power_kernel_integral(r: u32, x: f64, spec: &QuadratureSpec) -> Result<EvalResult> {
    require_positive("x", x)?;
    let peak = f64::from(r) / x;
    let mut breaks = vec![0.0];
    if peak > 0.0 {
        breaks.push(peak);
    }
    breaks.push((peak * 2.0).max(1.0 / x));
    let ri = r as i32;
    let f = move |t: f64| t.powi(ri) * (-x * t).exp();
    let (value, err) = half_line(f, &breaks, |t| power_kernel_tail(r, x, t), spec)?;
    Ok(oracle_result(Real::from_f64(value, oracle_bits()), err))
}

/// `(−1)^{r+1} ∫_0^∞ t^r e^{−xt}/(1 − e^{−kt}) dt`.
///
/// On `(0, ε)` with `ε = 10⁻⁶/k` the integrand is replaced by its leading term
/// `t^{r−1}/k`; since `1 ≤ kt/(1−e^{−kt}) ≤ 1 + kt` and `1 − xt ≤ e^{−xt} ≤ 1`,
/// the replacement costs at most `ε^{r+1}(x+k)/((r+1)k)`.
pub fn polygamma_k_integral(r: u32, x: f64, k: f64, spec: &QuadratureSpec) -> Result<EvalResult> {
    if r < 1 {
        return Err(Error::Order {
            order: i64::from(r),
            min: 1,
        });
    }
    require_positive("x", x)?;
    require_positive("k", k)?;
    let rf = f64::from(r);
    let eps = ENDPOINT_SPLIT / k;
    let near = eps.powi(r as i32) / (rf * k);
    let near_err = eps.powi(r as i32 + 1) * (x + k) / ((rf + 1.0) * k);

    let ri = r as i32;
    let f = move |t: f64| t.powi(ri) * (-x * t).exp() / -(-k * t).exp_m1();
    let mut breaks = vec![eps];
    for b in [1.0 / x, 1.0 / k, (rf + 1.0) / x] {
        if b > eps {
            breaks.push(b);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let tail = |t: f64| power_kernel_tail(r, x, t) / -(-k * t).exp_m1();
    let (body, err) = half_line(f, &breaks, tail, spec)?;
    let total = body + near;
    let signed = if r % 2 == 1 { total } else { -total };
    Ok(oracle_result(
        Real::from_f64(signed, oracle_bits()),
        err + near_err + EVAL_ULPS * f64::EPSILON * total.abs(),
    ))
}

/// Which integral representation of ψ_k to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigammaForm {
    /// `∫_0^∞ (e^{−kt} − e^{−xt})/(1 − e^{−kt}) dt`
    HalfLine,
    /// `∫_0^1 (t^{k−1} − t^{x−1})/(1 − t^k) dt`
    UnitInterval,
}

/// `(ln k − γ)/k + ∫ …` in the chosen representation.
pub fn digamma_k_integral(
    x: f64,
    k: f64,
    spec: &QuadratureSpec,
    form: DigammaForm,
) -> Result<EvalResult> {
    require_positive("x", x)?;
    require_positive("k", k)?;
    spec.validate()?;
    let (integral, err) = match form {
        DigammaForm::HalfLine => digamma_half_line(x, k, spec)?,
        DigammaForm::UnitInterval => digamma_unit_interval(x, k, spec)?,
    };
    let prec = PrecisionConfig::default();
    let kr = prec.real(k);
    let constant = (kr.ln() - prec.euler_gamma()) / &kr;
    let value = &constant + &Real::from_f64(integral, prec.bits());
    let rounding = EVAL_ULPS * f64::EPSILON * integral.abs();
    Ok(oracle_result(value, err + rounding))
}

fn digamma_half_line(x: f64, k: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    if x == k {
        return Ok((0.0, 0.0));
    }
    // expm1 form near 0; the plain difference once both exponentials are
    // small, where the expm1 form cancels
    let f = move |t: f64| {
        let num = if t * x.min(k) < 1.0 {
            (-k * t).exp_m1() - (-x * t).exp_m1()
        } else {
            (-k * t).exp() - (-x * t).exp()
        };
        num / -(-k * t).exp_m1()
    };
    let mut breaks = vec![0.0, 1.0 / x.max(k), 1.0 / x.min(k)];
    breaks.dedup();
    let tail = |t: f64| ((-k * t).exp() / k + (-x * t).exp() / x) / -(-k * t).exp_m1();
    half_line(f, &breaks, tail, spec)
}

fn digamma_unit_interval(x: f64, k: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    if x == k {
        return Ok((0.0, 0.0));
    }
    // (0, ε): expand 1/(1 − t^k) = Σ t^{jk} and integrate termwise
    let eps = 10f64.powf(-3.0 / k).min(0.5);
    let ratio = eps.powf(k);
    let scale = (1.0 / k - 1.0 / x).abs();
    let target = spec.target(scale);
    let mut near = 0.0;
    let mut near_err = 0.0;
    for j in 0..10_000u32 {
        let jf = f64::from(j);
        let a = eps.powf(k * (jf + 1.0)) / (k * (jf + 1.0));
        let b = eps.powf(x + jf * k) / (x + jf * k);
        near += a - b;
        let next = eps.powf(k * (jf + 2.0)) / (k * (jf + 2.0))
            + eps.powf(x + (jf + 1.0) * k) / (x + (jf + 1.0) * k);
        if next < target * 1e-3 {
            // remaining terms shrink at least geometrically with ratio ε^k
            near_err = next / (1.0 - ratio);
            break;
        }
    }
    // (ε, 1) with t = e^{−s}
    let f = move |t: f64| {
        let s = -t.ln();
        -(-(k - 1.0) * s).exp() * (-(x - k) * s).exp_m1() / -(-k * s).exp_m1()
    };
    let mut breaks = vec![eps];
    let mut b = eps * 10.0;
    while b < 1.0 {
        breaks.push(b);
        b *= 10.0;
    }
    breaks.push(1.0);
    let body = quadrature::integrate_pieces(
        f,
        &breaks,
        spec.abs_tolerance / 2.0,
        spec.rel_tolerance,
        spec.max_subdivisions,
    )?;
    Ok((
        near + body.value,
        near_err + body.error + EVAL_ULPS * f64::EPSILON * near.abs(),
    ))
}

/// Log-scaled value of `∫_0^∞ t^{x−1} e^{−t^k/k} dt`: the integral equals
/// `e^{log_scale} · scaled`, with absolute error `e^{log_scale} · scaled_error`.
struct ScaledIntegral {
    log_scale: f64,
    scaled: f64,
    scaled_error: f64,
}

fn gamma_k_scaled(x: f64, k: f64, spec: &QuadratureSpec) -> Result<ScaledIntegral> {
    require_positive("x", x)?;
    require_positive("k", k)?;
    spec.validate()?;

    // (0, 1]; for x < 1 substitute t = v^{1/x} to remove the t^{x−1} singularity
    let low = if x < 1.0 {
        let f = move |v: f64| (-(v.powf(k / x)) / k).exp();
        let r = quadrature::integrate(
            f,
            0.0,
            1.0,
            spec.abs_tolerance / 4.0,
            spec.rel_tolerance,
            spec.max_subdivisions,
        )?;
        (r.value / x, r.error / x)
    } else {
        let f = move |t: f64| t.powf(x - 1.0) * (-t.powf(k) / k).exp();
        let r = quadrature::integrate(
            f,
            0.0,
            1.0,
            spec.abs_tolerance / 4.0,
            spec.rel_tolerance,
            spec.max_subdivisions,
        )?;
        (r.value, r.error)
    };

    // [1, ∞), scaled by the peak of ln(integrand) = (x−1) ln t − t^k/k
    let ell = move |t: f64| (x - 1.0) * t.ln() - t.powf(k) / k;
    let peak = if x > 1.0 {
        (x - 1.0).powf(1.0 / k).max(1.0)
    } else {
        1.0
    };
    let log_scale = ell(peak);
    let f = move |t: f64| (ell(t) - log_scale).exp();
    // ∫_T^∞ = k^{x/k−1} Γ(x/k, T^k/k) ≤ 2 T^{x−k} e^{−T^k/k} once T^k/k ≥ 2(x/k − 1)
    let s = x / k;
    let tail = move |t: f64| {
        let z = t.powf(k) / k;
        if z < 2.0 * (s - 1.0) {
            return f64::INFINITY;
        }
        let factor = if s > 1.0 { 2.0 } else { 1.0 };
        factor * ((x - k) * t.ln() - z - log_scale).exp()
    };
    let mut breaks = vec![1.0];
    if peak > 1.0 {
        breaks.push(peak);
    }
    let width = (peak.powf(1.0 - k) * (x - 1.0).abs().max(1.0))
        .sqrt()
        .max(1.0);
    breaks.push(peak + 4.0 * width);
    let (high, high_err) = half_line(f, &breaks, tail, spec)?;

    // evaluating ell(t) − log_scale in f64 perturbs the exponent by a few ulps of
    // the largest term involved
    let reach = *breaks.last().unwrap() * 4.0;
    let exponent_mag = (x - 1.0).abs() * reach.ln().abs() + reach.powf(k) / k + log_scale.abs();
    let eval_err = EVAL_ULPS * f64::EPSILON * (exponent_mag + 1.0) * high;

    let inv = (-log_scale).exp();
    Ok(ScaledIntegral {
        log_scale,
        scaled: low.0 * inv + high,
        scaled_error: low.1 * inv + high_err + eval_err + EVAL_ULPS * f64::EPSILON * low.0 * inv,
    })
}

/// `Γ_k(x) = ∫_0^∞ t^{x−1} e^{−t^k/k} dt` by quadrature.
pub fn gamma_k_integral(x: f64, k: f64, spec: &QuadratureSpec) -> Result<EvalResult> {
    let s = gamma_k_scaled(x, k, spec)?;
    let bits = oracle_bits();
    let scale = Real::from_f64(s.log_scale, bits).exp();
    let value = &scale * &Real::from_f64(s.scaled, bits);
    let err = (&scale * &Real::from_f64(s.scaled_error, bits)).to_f64();
    Ok(oracle_result(value, err))
}

/// `ln Γ_k(x)` from the same quadrature, without overflowing for large values.
pub fn ln_gamma_k_integral(x: f64, k: f64, spec: &QuadratureSpec) -> Result<EvalResult> {
    let s = gamma_k_scaled(x, k, spec)?;
    let bits = oracle_bits();
    let value = Real::from_f64(s.log_scale, bits) + Real::from_f64(s.scaled, bits).ln();
    let rel = s.scaled_error / s.scaled;
    // |ln(v ± e) − ln v| ≤ e/(v − e)
    let err = rel / (1.0 - rel).max(0.5) + f64::EPSILON * (s.log_scale.abs() + 1.0);
    Ok(oracle_result(value, err))
}

/// n-th term of `n! k^n (nk)^{x/k−1} / (x)_{n,k}`, which tends to Γ_k(x).
///
/// Converges like O(1/n); only a coarse sanity check.
pub fn gamma_k_limit(x: f64, k: f64, n: u32) -> Result<f64> {
    require_positive("x", x)?;
    require_positive("k", k)?;
    if n < 1 {
        return Err(Error::Domain {
            what: "n",
            value: f64::from(n),
            requirement: "an integer >= 1",
        });
    }
    let nf = f64::from(n);
    let mut log = nf * k.ln() + (x / k - 1.0) * (nf * k).ln();
    for j in 1..=n {
        let jf = f64::from(j);
        log += jf.ln() - (x + (jf - 1.0) * k).ln();
    }
    Ok(log.exp())
}
