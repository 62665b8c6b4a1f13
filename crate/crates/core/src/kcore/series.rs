//! Direct summation of the k-digamma and k-polygamma series.
//!
//! ψ_k(x)     = (ln k − γ)/k + Σ_{n≥0} [1/(nk+k) − 1/(nk+x)]
//! ψ_k^(r)(x) = (−1)^{r+1} r! Σ_{n≥0} 1/(nk+x)^{r+1}
//! ln Γ_k(x)  = (ln k − γ)(x−k)/k + Σ_{n≥0} [(x−k)/(nk+k) − ln((nk+x)/(nk+k))]
//!
//! The first `N` terms are summed exactly; the tail `Σ_{n≥N} f(n)` is the
//! integral `∫_N^∞ f` plus the Euler–Maclaurin boundary corrections. Each
//! summand is a signed combination of components whose derivatives of every
//! order keep one sign, so the remainder after `p` correction terms is at most
//! `|B_2p|/(2p)! · Σ_c |c^(2p−1)(N)|`.

use crate::bernoulli::even_bernoulli;
use crate::kcore::classical::asymptotic_threshold;
use crate::kcore::precision::PrecisionConfig;
use crate::real::Real;

use super::classical::Approx;

/// Smallest `x/k` the digamma series is summed at; smaller arguments are
/// first shifted with ψ_k(x+k) = 1/x + ψ_k(x).
pub(crate) const SHIFT_TARGET: f64 = 8.0;

/// Number of leading terms summed explicitly before the tail expansion.
fn head_terms(prec: &PrecisionConfig, order: u32, x_over_k: f64) -> usize {
    let z = asymptotic_threshold(prec, order);
    ((z - x_over_k).max(0.0).ceil() as usize).max(1)
}

/// Euler–Maclaurin boundary corrections `Σ_j B_2j/(2j)! f^(2j−1)(N)`.
///
/// `deriv(q)` returns the `q`-th derivative of every component at `N`
/// (already multiplied by its signed coefficient). Returns the correction
/// sum, the remainder bound, the summed magnitudes and the number of terms.
fn em_corrections(
    bits: usize,
    tol: f64,
    mut deriv: impl FnMut(usize) -> Vec<Real>,
) -> (Real, f64, f64, usize) {
    // past the head terms far fewer corrections than this are ever needed
    let bern = even_bernoulli(bits / 3 + 20, bits);
    let mut total = Real::zero(bits);
    let mut fact = Real::one(bits); // (2j)!
    let mut magnitude = 0.0;
    let mut prev_abs = f64::INFINITY;
    let mut used = 0usize;
    for (idx, b) in bern.iter().enumerate() {
        let j = idx + 1;
        fact = fact * ((2 * j - 1) as f64) * ((2 * j) as f64);
        let comps = deriv(2 * j - 1);
        let coef = b / &fact;
        let coef_abs = coef.to_f64().abs();
        let comp_sum: Real = comps.iter().cloned().sum();
        let comp_abs: f64 = comps.iter().map(|c| c.to_f64().abs()).sum();
        let term = &coef * &comp_sum;
        let abs_bound = coef_abs * comp_abs;
        if abs_bound >= prev_abs {
            // diverging from here on; keep the previous truncation
            return (total, prev_abs, magnitude, used);
        }
        total = total + &term;
        magnitude += abs_bound;
        used = j;
        prev_abs = abs_bound;
        if abs_bound <= tol {
            break;
        }
    }
    (total, prev_abs, magnitude, used)
}

/// `q`-th derivative of `1/(t k + a)` at `t = n`: `(−1)^q q! k^q / (n k + a)^{q+1}`.
fn recip_linear_deriv(q: usize, n: &Real, k: &Real, a: &Real, fact_q: &Real) -> Real {
    let base = n * k + a;
    let v = fact_q * &k.powi(q) / base.powi(q + 1);
    if q % 2 == 1 {
        -v
    } else {
        v
    }
}

fn factorial(q: usize, bits: usize) -> Real {
    let mut f = Real::one(bits);
    for i in 2..=q {
        f = f * i as f64;
    }
    f
}

/// Tolerance for the tail expansion, relative to `scale`.
fn tail_tol(prec: &PrecisionConfig, scale: f64) -> f64 {
    10f64.powi(-(prec.working_digits as i32) - 4) * scale.abs().max(f64::MIN_POSITIVE)
}

/// ψ_k^(r)(x) for r ≥ 1 from its defining series.
pub(crate) fn polygamma_k(r: u32, x: &Real, k: &Real, prec: &PrecisionConfig) -> Approx {
    let bits = x.bits();
    let p = (r + 1) as usize;
    let xk = (x / k).to_f64();
    let n_head = head_terms(prec, r, xk);

    let mut head = Real::zero(bits);
    for n in 0..n_head {
        head = head + (k * n as f64 + x).powi(p).recip();
    }
    let n_real = Real::from_u64(n_head as u64, bits);
    let base = &n_real * k + x;
    // ∫_N^∞ (tk+x)^{-(r+1)} dt = 1 / (r k (Nk+x)^r)
    let integral = (k * f64::from(r) * base.powi(r as usize)).recip();
    let half_first = base.powi(p).recip() * 0.5;

    // q-th derivative of (tk+x)^{-(r+1)}: (−1)^q (r+1)…(r+q) k^q (tk+x)^{-(r+1+q)}
    let scale = head.to_f64();
    let (corr, em_bound, em_mag, used) = em_corrections(bits, tail_tol(prec, scale), |q| {
        let mut rising = Real::one(bits);
        for i in 1..=q {
            rising = rising * (f64::from(r) + i as f64);
        }
        let v = rising * k.powi(q) / base.powi(p + q);
        vec![if q % 2 == 1 { -v } else { v }]
    });

    let sum = &head + &integral + &half_first - &corr;
    let fact_r = factorial(r as usize, bits);
    let magnitude = scale + integral.to_f64() + em_mag;
    let total = &fact_r * &sum;
    let value = if r % 2 == 1 { total } else { -total };
    let fr = fact_r.to_f64();
    let err = fr * em_bound + prec.rounding((n_head + used + 2 * p + 4) as f64, fr * magnitude);
    Approx { value, err }
}

/// ψ_k(x) from its defining series, after shifting x/k ≥ 8.
pub(crate) fn digamma_k(x: &Real, k: &Real, prec: &PrecisionConfig) -> Approx {
    let bits = x.bits();
    let (w, shift_sum, shifts) = shift_up(x, k);
    let wk = (&w / k).to_f64();
    let n_head = head_terms(prec, 0, wk);

    let mut head = Real::zero(bits);
    let mut head_mag = 0.0;
    for n in 0..n_head {
        let a = (k * (n + 1) as f64).recip();
        let b = (k * n as f64 + &w).recip();
        head_mag += a.to_f64() + b.to_f64();
        head = head + a - b;
    }
    let n_real = Real::from_u64(n_head as u64, bits);
    let at_k = &n_real * k + k;
    let at_w = &n_real * k + &w;
    let integral = (&at_w / &at_k).ln() / k;
    let half_first = (at_k.recip() - at_w.recip()) * 0.5;

    let scale = head_mag;
    let (corr, em_bound, em_mag, used) = em_corrections(bits, tail_tol(prec, scale), |q| {
        let fq = factorial(q, bits);
        vec![
            recip_linear_deriv(q, &n_real, k, k, &fq),
            -recip_linear_deriv(q, &n_real, k, &w, &fq),
        ]
    });

    let gamma = prec.euler_gamma();
    let constant = (k.ln() - &gamma) / k;
    let series = &head + &integral + &half_first - &corr;
    let value = &constant + &series - &shift_sum;
    let magnitude =
        constant.to_f64().abs() + head_mag + integral.to_f64().abs() + em_mag + shift_sum.to_f64();
    let err = em_bound + prec.rounding((n_head + used + shifts + 8) as f64, magnitude);
    Approx { value, err }
}

/// ln Γ_k(x) from the integrated digamma series, after shifting x/k ≥ 8.
pub(crate) fn ln_gamma_k(x: &Real, k: &Real, prec: &PrecisionConfig) -> Approx {
    let bits = x.bits();
    // ln Γ_k(x) = ln Γ_k(x + S k) − Σ_{j<S} ln(x + j k)
    let mut shifts = 0usize;
    let mut prod = Real::one(bits);
    let mut w = x.clone();
    while (&w / k).to_f64() < SHIFT_TARGET {
        prod = prod * &w;
        w = w + k;
        shifts += 1;
    }
    let ln_shift = if shifts > 0 {
        prod.ln()
    } else {
        Real::zero(bits)
    };

    let wk = (&w / k).to_f64();
    let n_head = head_terms(prec, 0, wk);
    let a = (&w - k) / k; // (w − k)/k
    let mut head = Real::zero(bits);
    let mut head_mag = 0.0;
    for n in 0..n_head {
        let lin = &a / (n + 1) as f64;
        let log = ((k * n as f64 + &w) / (k * (n + 1) as f64)).ln();
        head_mag += lin.to_f64().abs() + log.to_f64().abs();
        head = head + lin - log;
    }

    let n_real = Real::from_u64(n_head as u64, bits);
    let at_w = &n_real * k + &w;
    let at_k = &n_real * k + k;
    // F(t) antiderivative of the summand, F(∞) = −a ln k
    let antider = |t: &Real, at_w: &Real, at_k: &Real| -> Real {
        &a * (t + 1.0).ln() - (at_w * at_w.ln() - at_w) / k + (at_k * at_k.ln() - at_k) / k
    };
    let f_n = antider(&n_real, &at_w, &at_k);
    let integral = -(&a * k.ln()) - &f_n;
    let summand_n = &a / (&n_real + 1.0) - (&at_w / &at_k).ln();
    let half_first = &summand_n * 0.5;

    let scale = head_mag;
    let (corr, em_bound, em_mag, used) = em_corrections(bits, tail_tol(prec, scale), |q| {
        // q ≥ 1: a·(t+1)^{-1}, −ln(tk+w), +ln(tk+k)
        let fq = factorial(q, bits);
        let fqm1 = factorial(q - 1, bits);
        let sign = if q % 2 == 1 { -1.0 } else { 1.0 };
        let c1 = &a * &fq / (&n_real + 1.0).powi(q + 1) * sign;
        let kq = k.powi(q);
        let c2 = &fqm1 * &kq / at_w.powi(q) * sign; // −(−1)^{q−1} = (−1)^q
        let c3 = &fqm1 * &kq / at_k.powi(q) * (-sign);
        vec![c1, c2, c3]
    });

    let gamma = prec.euler_gamma();
    let linear = (k.ln() - &gamma) * &a;
    let value = &linear + &head + &integral + &half_first - &corr - &ln_shift;
    let magnitude = linear.to_f64().abs()
        + head_mag
        + f_n.to_f64().abs()
        + (&a * k.ln()).to_f64().abs()
        + em_mag
        + ln_shift.to_f64().abs();
    let err = em_bound
        + prec.rounding((n_head + used + 12) as f64, magnitude)
        + prec.rounding(shifts as f64 + 1.0, 1.0);
    Approx { value, err }
}

/// Shifts `x` by multiples of `k` until `x/k ≥ SHIFT_TARGET`, returning the
/// shifted argument and `Σ 1/(x + j k)` over the skipped points.
pub(crate) fn shift_up(x: &Real, k: &Real) -> (Real, Real, usize) {
    let mut w = x.clone();
    let mut sum = Real::zero(x.bits());
    let mut count = 0usize;
    while (&w / k).to_f64() < SHIFT_TARGET {
        sum = sum + w.recip();
        w = w + k;
        count += 1;
    }
    (w, sum, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    fn r(x: f64) -> Real {
        p().real(x)
    }

    fn assert_close(a: &Approx, expected: &Real, max_bound: f64) {
        let diff = (&a.value - expected).abs().to_f64();
        assert!(diff <= a.err, "diff {diff:e} > bound {:e}", a.err);
        assert!(a.err <= max_bound, "bound {:e} > {max_bound:e}", a.err);
    }

    #[test]
    fn trigamma_at_one() {
        let pi2 = p().pi() * p().pi();
        assert_close(
            &polygamma_k(1, &r(1.0), &r(1.0), &p()),
            &(&pi2 / 6.0),
            1e-30,
        );
        // k = 2, x = 2: (1/4) π²/6
        assert_close(
            &polygamma_k(1, &r(2.0), &r(2.0), &p()),
            &(&pi2 / 24.0),
            1e-30,
        );
    }

    #[test]
    fn digamma_k_anchor_values() {
        let g = p().euler_gamma();
        assert_close(&digamma_k(&r(1.0), &r(1.0), &p()), &(-&g), 1e-30);
        let expected = (r(2.0).ln() - &g) / 2.0;
        assert_close(&digamma_k(&r(2.0), &r(2.0), &p()), &expected, 1e-30);
        assert_close(&digamma_k(&r(2.0), &r(1.0), &p()), &(r(1.0) - &g), 1e-30);
    }

    #[test]
    fn ln_gamma_k_anchor_values() {
        assert_close(&ln_gamma_k(&r(2.0), &r(2.0), &p()), &r(0.0), 1e-29);
        assert_close(&ln_gamma_k(&r(6.0), &r(2.0), &p()), &r(8.0).ln(), 1e-29);
        assert_close(&ln_gamma_k(&r(5.0), &r(1.0), &p()), &r(24.0).ln(), 1e-29);
        let ln_sqrt_pi = p().pi().sqrt().ln();
        assert_close(&ln_gamma_k(&r(0.5), &r(1.0), &p()), &ln_sqrt_pi, 1e-29);
    }

    #[test]
    fn large_argument_over_k() {
        // ψ_k at x/k = 2e4 against the recurrence from x − k
        let k = r(0.5);
        let x = r(1e4);
        let a = digamma_k(&x, &k, &p());
        let b = digamma_k(&(&x - &k), &k, &p());
        let expected = &b.value + (&x - &k).recip();
        let diff = (&a.value - &expected).abs().to_f64();
        assert!(diff <= a.err + b.err, "{diff:e}");
    }

    #[test]
    fn shift_reaches_target() {
        let (w, sum, n) = shift_up(&r(0.25), &r(1.0));
        assert_eq!(n, 8);
        assert_eq!(w.to_f64(), 8.25);
        assert!(sum.to_f64() > 4.0);
    }
}
