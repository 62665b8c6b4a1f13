//! Classical ln Γ, ψ and ψ^(n) on (0, ∞) at working precision.
//!
//! Each routine shifts its argument upward with the unit recurrence until the
//! asymptotic (Stirling-type) expansion converges past the working accuracy,
//! then sums that expansion. For real positive arguments these expansions are
//! enveloping, so the first omitted term bounds the truncation error.

use crate::bernoulli::even_bernoulli;
use crate::kcore::precision::PrecisionConfig;
use crate::real::Real;

/// Value with an absolute error bound.
#[derive(Debug, Clone)]
pub(crate) struct Approx {
    pub value: Real,
    pub err: f64,
}

/// Most asymptotic terms summed; past the shift threshold far fewer are needed.
fn max_terms(prec: &PrecisionConfig) -> usize {
    prec.working_digits as usize + 20
}

/// Argument from which the expansion of the given derivative order is used.
pub(crate) fn asymptotic_threshold(prec: &PrecisionConfig, order: u32) -> f64 {
    0.4 * f64::from(prec.working_digits) + 0.25 * f64::from(order) + 6.0
}

/// Relative size below which an asymptotic term is dropped.
fn cutoff(prec: &PrecisionConfig) -> f64 {
    10f64.powi(-(prec.working_digits as i32) - 4)
}

fn shift_count(y: &Real, threshold: f64) -> usize {
    let yf = y.to_f64();
    if yf >= threshold {
        0
    } else {
        (threshold - yf).ceil() as usize
    }
}

/// ln Γ(y) for y > 0.
pub(crate) fn ln_gamma(y: &Real, prec: &PrecisionConfig) -> Approx {
    let n = shift_count(y, asymptotic_threshold(prec, 0));
    let mut prod = Real::one(y.bits());
    for j in 0..n {
        prod = prod * (y + j as f64);
    }
    let ln_prod = if n > 0 {
        prod.ln()
    } else {
        Real::zero(y.bits())
    };
    let z = y + n as f64;

    let ln_z = z.ln();
    let half_ln_2pi = (prec.pi() * 2.0).ln() * 0.5;
    let lead = (&z - 0.5) * &ln_z;
    let mut sum = &lead - &z + &half_ln_2pi;
    let mut magnitude = lead.to_f64().abs() + z.to_f64() + 1.0;

    let bern = even_bernoulli(max_terms(prec), y.bits());
    let z2 = &z * &z;
    let mut zpow = z.clone();
    let cut = cutoff(prec) * sum.to_f64().abs().max(1.0);
    let mut trunc = 0.0;
    let mut prev = f64::INFINITY;
    let mut terms = 0usize;
    for (idx, b) in bern.iter().enumerate() {
        let j = (idx + 1) as f64;
        let term = b / (&zpow * (2.0 * j * (2.0 * j - 1.0)));
        let t = term.to_f64().abs();
        if t <= cut || t >= prev {
            trunc = t;
            break;
        }
        sum = sum + &term;
        magnitude += t;
        prev = t;
        terms += 1;
        zpow = zpow * &z2;
    }

    let value = &sum - &ln_prod;
    let rounding = prec.rounding((terms + 4) as f64, magnitude)
        + prec.rounding(n as f64 + 1.0, 1.0)
        + prec.rounding(1.0, ln_prod.to_f64());
    Approx {
        value,
        err: trunc + rounding,
    }
}

/// ψ(y) for y > 0.
pub(crate) fn digamma(y: &Real, prec: &PrecisionConfig) -> Approx {
    let n = shift_count(y, asymptotic_threshold(prec, 0));
    let mut shift_sum = Real::zero(y.bits());
    for j in 0..n {
        shift_sum = shift_sum + (y + j as f64).recip();
    }
    let z = y + n as f64;

    let ln_z = z.ln();
    let mut sum = &ln_z - (&z * 2.0).recip();
    let mut magnitude = ln_z.to_f64().abs() + 1.0 / z.to_f64();

    let bern = even_bernoulli(max_terms(prec), y.bits());
    let z2 = &z * &z;
    let mut zpow = z2.clone();
    let cut = cutoff(prec) * sum.to_f64().abs().max(1.0 / z.to_f64());
    let mut trunc = 0.0;
    let mut prev = f64::INFINITY;
    let mut terms = 0usize;
    for (idx, b) in bern.iter().enumerate() {
        let j = (idx + 1) as f64;
        let term = b / (&zpow * (2.0 * j));
        let t = term.to_f64().abs();
        if t <= cut || t >= prev {
            trunc = t;
            break;
        }
        sum = sum - &term;
        magnitude += t;
        prev = t;
        terms += 1;
        zpow = zpow * &z2;
    }

    let value = &sum - &shift_sum;
    let s = shift_sum.to_f64();
    let rounding = prec.rounding((terms + 3) as f64, magnitude) + prec.rounding(2.0 * n as f64, s);
    Approx {
        value,
        err: trunc + rounding,
    }
}

/// ψ^(n)(y) for n ≥ 1, y > 0.
pub(crate) fn polygamma(n: u32, y: &Real, prec: &PrecisionConfig) -> Approx {
    debug_assert!(n >= 1);
    let bits = y.bits();
    let shift = shift_count(y, asymptotic_threshold(prec, n));
    let np1 = (n + 1) as usize;

    let mut shift_sum = Real::zero(bits);
    for j in 0..shift {
        shift_sum = shift_sum + (y + j as f64).powi(np1).recip();
    }
    let z = y + shift as f64;

    // factorials (n-1)! and n!
    let mut fact_nm1 = Real::one(bits);
    for i in 2..n {
        fact_nm1 = fact_nm1 * f64::from(i);
    }
    let fact_n = &fact_nm1 * f64::from(n);

    let z_n = z.powi(n as usize);
    let mut sum = &fact_nm1 / &z_n + &fact_n / (&z_n * &z * 2.0);
    let lead = sum.to_f64();
    let mut magnitude = lead;

    // c_j = (2j + n - 1)! / (2j)!, starting at c_1 = (n + 1)! / 2
    let mut c = &fact_n * f64::from(n + 1) * 0.5;
    let z2 = &z * &z;
    let mut zpow = &z_n * &z2;
    let bern = even_bernoulli(max_terms(prec), bits);
    let cut = cutoff(prec) * lead;
    let mut trunc = 0.0;
    let mut prev = f64::INFINITY;
    let mut terms = 0usize;
    for (idx, b) in bern.iter().enumerate() {
        let j = (idx + 1) as f64;
        let term = b * &c / &zpow;
        let t = term.to_f64().abs();
        if t <= cut || t >= prev {
            trunc = t;
            break;
        }
        sum = sum + &term;
        magnitude += t;
        prev = t;
        terms += 1;
        let nf = f64::from(n);
        c = c * ((2.0 * j + nf) * (2.0 * j + nf + 1.0)) / ((2.0 * j + 1.0) * (2.0 * j + 2.0));
        zpow = zpow * &z2;
    }

    let shifted = &fact_n * &shift_sum;
    let total = sum + &shifted;
    let value = if n % 2 == 1 { total } else { -total };
    let rounding = prec.rounding((terms + n as usize + 4) as f64, magnitude)
        + prec.rounding((shift + n as usize + 2) as f64, shifted.to_f64());
    Approx {
        value,
        err: trunc + rounding,
    }
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

    fn lit(s: &str) -> Real {
        Real::parse_decimal(s, p().bits()).unwrap()
    }

    /// |approx - reference| within the approx's bound, and the bound is tight.
    fn check(a: Approx, reference: &Real, max_bound: f64) {
        let diff = (&a.value - reference).abs().to_f64();
        assert!(diff <= a.err, "diff {diff:e} exceeds bound {:e}", a.err);
        assert!(
            a.err <= max_bound,
            "bound {:e} looser than {max_bound:e}",
            a.err
        );
    }

    // Reference literals are classical closed forms:
    // ln Γ(1/2) = ln √π, ψ(1) = -γ, ψ(1/2) = -γ - 2 ln 2, ψ'(1) = π²/6,
    // ψ''(1) = -2ζ(3), ψ'(1/2) = π²/2.

    #[test]
    fn ln_gamma_at_integers_and_half() {
        check(ln_gamma(&r(1.0), &p()), &r(0.0), 1e-29);
        check(ln_gamma(&r(2.0), &p()), &r(0.0), 1e-29);
        check(ln_gamma(&r(5.0), &p()), &r(24.0).ln(), 1e-29);
        let ln_sqrt_pi = p().pi().sqrt().ln();
        check(ln_gamma(&r(0.5), &p()), &ln_sqrt_pi, 1e-29);
        // large argument: ln Γ(101) = ln 100!
        let mut f = r(1.0);
        for i in 2..=100 {
            f = f * f64::from(i);
        }
        check(ln_gamma(&r(101.0), &p()), &f.ln(), 1e-29);
    }

    #[test]
    fn ln_gamma_small_argument() {
        // Γ(y) = Γ(1 + y) / y; both routes share nothing but the expansion
        let y = r(1e-3);
        let direct = ln_gamma(&y, &p());
        let via = ln_gamma(&(&y + 1.0), &p());
        let expected = &via.value - y.ln();
        check(direct, &expected, 1e-29);
    }

    #[test]
    fn digamma_reference_values() {
        let g = p().euler_gamma();
        check(digamma(&r(1.0), &p()), &(-&g), 1e-29);
        let two_ln2 = r(2.0).ln() * 2.0;
        check(digamma(&r(0.5), &p()), &(-&g - &two_ln2), 1e-29);
        check(digamma(&r(2.0), &p()), &(r(1.0) - &g), 1e-29);
    }

    #[test]
    fn polygamma_reference_values() {
        let pi2 = p().pi() * p().pi();
        check(polygamma(1, &r(1.0), &p()), &(&pi2 / 6.0), 1e-29);
        check(polygamma(1, &r(0.5), &p()), &(&pi2 / 2.0), 1e-29);
        let zeta3 = lit("1.2020569031595942853997381615114499907649862923405");
        check(polygamma(2, &r(1.0), &p()), &(-(zeta3 * 2.0)), 1e-29);
        // ψ'''(1) = 6 ζ(4) = π⁴/15
        check(polygamma(3, &r(1.0), &p()), &(&pi2 * &pi2 / 15.0), 1e-29);
    }

    #[test]
    fn polygamma_tiny_argument_is_dominated_by_pole() {
        // ψ^(5)(y) = 5!/y^6 + ψ^(5)(1 + y)
        let y = r(1e-3);
        let a = polygamma(5, &y, &p());
        let b = polygamma(5, &(&y + 1.0), &p());
        let expected = r(120.0) / y.powi(6) + &b.value;
        let diff = (&a.value - &expected).abs().to_f64();
        assert!(diff <= a.err + b.err, "{diff:e}");
        assert!(a.err / a.value.to_f64().abs() < 1e-31);
    }

    #[test]
    fn higher_precision_tightens_bounds() {
        let p68 = p().doubled();
        let a = polygamma(4, &Real::from_f64(0.3, p68.bits()), &p68);
        assert!(a.err / a.value.to_f64().abs() < 1e-64);
        let b = polygamma(4, &r(0.3), &p());
        let diff = (&a.value - &b.value).abs().to_f64();
        assert!(diff <= a.err + b.err);
    }
}
