//! Ratios F and G, their logarithmic derivatives, and grid certification of
//! the sign claims built on them.
//!
//! F(x) = Γ_k(mx) / (x^{m−1} Γ_k(x)^m), G(x) = Γ_k(mx) / Γ_k(x)^m.
//!
//! Each claim is turned into a quantity that is positive exactly when the
//! claim holds at a point. A point is certified positive when the quantity is
//! at least `MARGIN_FACTOR` times its error bound, certified negative when it
//! is at most minus that, and indeterminate otherwise. Indeterminate points are
//! re-evaluated once at doubled working precision.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::identities::check_lemma3;
use crate::kcore::{
    Backend, EvalResult, Evaluator, KParams, PrecisionConfig, LN_MAX_REPRESENTABLE,
};
use crate::real::Real;

/// A sign is certified when `|q| ≥ MARGIN_FACTOR · bound`.
pub const MARGIN_FACTOR: f64 = 10.0;

/// Relative half-width around `x = k` excluded from the Corollary 1 grids.
pub const SPLIT_EXCLUSION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ratio {
    F,
    G,
    #[serde(rename = "invG")]
    InvG,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSpec {
    pub which: Ratio,
    pub params: KParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClaimId {
    Thm1aLcmF,
    Thm1bLcmInvg,
    Cor1Lower,
    Cor1Upper,
    Cor1Reversed,
    /// Reversal of the upper bound on (0, k): `G(x) > x^{m−1}(m−1)!`.
    Cor1ReversedUpper,
    Cor2,
    Cor3Lower,
    Cor3Upper,
    Lemma3,
}

/// Which side of `x = k` a claim is stated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    All,
    BelowK,
    AboveK,
}

impl ClaimId {
    pub const ALL: [ClaimId; 10] = [
        ClaimId::Thm1aLcmF,
        ClaimId::Thm1bLcmInvg,
        ClaimId::Cor1Lower,
        ClaimId::Cor1Upper,
        ClaimId::Cor1Reversed,
        ClaimId::Cor1ReversedUpper,
        ClaimId::Cor2,
        ClaimId::Cor3Lower,
        ClaimId::Cor3Upper,
        ClaimId::Lemma3,
    ];

    /// Identifier used in reports, e.g. `THM1A_LCM_F`.
    pub fn id(&self) -> &'static str {
        match self {
            ClaimId::Thm1aLcmF => "THM1A_LCM_F",
            ClaimId::Thm1bLcmInvg => "THM1B_LCM_INVG",
            ClaimId::Cor1Lower => "COR1_LOWER",
            ClaimId::Cor1Upper => "COR1_UPPER",
            ClaimId::Cor1Reversed => "COR1_REVERSED",
            ClaimId::Cor1ReversedUpper => "COR1_REVERSED_UPPER",
            ClaimId::Cor2 => "COR2",
            ClaimId::Cor3Lower => "COR3_LOWER",
            ClaimId::Cor3Upper => "COR3_UPPER",
            ClaimId::Lemma3 => "LEMMA3",
        }
    }

    /// Short command-line name, e.g. `cor1-upper`.
    pub fn short_name(&self) -> &'static str {
        match self {
            ClaimId::Thm1aLcmF => "thm1a",
            ClaimId::Thm1bLcmInvg => "thm1b",
            ClaimId::Cor1Lower => "cor1-lower",
            ClaimId::Cor1Upper => "cor1-upper",
            ClaimId::Cor1Reversed => "cor1-reversed",
            ClaimId::Cor1ReversedUpper => "cor1-reversed-upper",
            ClaimId::Cor2 => "cor2",
            ClaimId::Cor3Lower => "cor3-lower",
            ClaimId::Cor3Upper => "cor3-upper",
            ClaimId::Lemma3 => "lemma3",
        }
    }

    pub fn side(&self) -> Side {
        match self {
            ClaimId::Cor1Lower | ClaimId::Cor1Upper => Side::AboveK,
            ClaimId::Cor1Reversed | ClaimId::Cor1ReversedUpper => Side::BelowK,
            _ => Side::All,
        }
    }

    pub fn is_sign_pattern(&self) -> bool {
        matches!(self, ClaimId::Thm1aLcmF | ClaimId::Thm1bLcmInvg)
    }

    /// The statement whose positivity is checked.
    pub fn statement(&self) -> &'static str {
        match self {
            ClaimId::Thm1aLcmF => "(-1)^r (ln F)^(r)(x) > 0",
            ClaimId::Thm1bLcmInvg => "(-1)^r (ln 1/G)^(r)(x) > 0",
            ClaimId::Cor1Lower => "G(x) > k^(m-1) (m-1)! for x > k",
            ClaimId::Cor1Upper => "G(x) < x^(m-1) (m-1)! for x > k",
            ClaimId::Cor1Reversed => "G(x) < k^(m-1) (m-1)! for 0 < x < k",
            ClaimId::Cor1ReversedUpper => "G(x) > x^(m-1) (m-1)! for 0 < x < k",
            ClaimId::Cor2 => "G(x) < x^(m-1) / m",
            ClaimId::Cor3Lower => "psi_k'(x) > (1/m) sum_s psi_k'(x + sk/m)",
            ClaimId::Cor3Upper => "psi_k'(x) < (1/m) sum_s psi_k'(x + sk/m) + (m-1)/(m x^2)",
            ClaimId::Lemma3 => "sum_{s=1}^n e^(-st/(n+1)) - n e^(-t) > 0",
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for ClaimId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase().replace('_', "-");
        ClaimId::ALL
            .into_iter()
            .find(|c| c.short_name() == lower || c.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown claim '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

/// Sampling plan in `x` (or `t` for Lemma 3).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub spacing: Spacing,
    /// Extra points merged into the grid when they fall inside `[x_min, x_max]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anchors: Vec<f64>,
    /// Keep only the points on this side of `x = k`, outside the exclusion band.
    #[serde(default = "default_side")]
    pub side: Side,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m_values: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r_values: Vec<u32>,
}

fn default_side() -> Side {
    Side::All
}

impl Default for GridSpec {
    /// 200 log-spaced points over `[1e-3, 1e3]` plus a few small integers and
    /// half-integers.
    fn default() -> Self {
        GridSpec {
            x_min: 1e-3,
            x_max: 1e3,
            points: 200,
            spacing: Spacing::Log,
            anchors: vec![0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 10.0],
            side: Side::All,
            k_values: Vec::new(),
            m_values: Vec::new(),
            r_values: Vec::new(),
        }
    }
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, points: usize, spacing: Spacing) -> Result<Self> {
        let g = GridSpec {
            x_min,
            x_max,
            points,
            spacing,
            anchors: Vec::new(),
            side: Side::All,
            k_values: Vec::new(),
            m_values: Vec::new(),
            r_values: Vec::new(),
        };
        g.validate()?;
        Ok(g)
    }

    /// 100 log-spaced `t` values over `[1e-3, 1e2]`.
    pub fn lemma3_default() -> Self {
        GridSpec {
            x_min: 1e-3,
            x_max: 1e2,
            points: 100,
            anchors: Vec::new(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min > 0.0 && self.x_min.is_finite()) {
            return Err(Error::Config(format!(
                "grid minimum must be > 0, got {}",
                self.x_min
            )));
        }
        if !(self.x_max > self.x_min && self.x_max.is_finite()) {
            return Err(Error::Config(format!(
                "grid maximum {} must exceed minimum {}",
                self.x_max, self.x_min
            )));
        }
        if self.points < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    /// The same grid restricted to one side of `x = k`.
    pub fn restricted(&self, side: Side) -> Self {
        GridSpec {
            side,
            ..self.clone()
        }
    }

    /// Sorted, deduplicated sample points; the side restriction (if any) is
    /// applied relative to `k`.
    pub fn points_for(&self, k: f64) -> Vec<f64> {
        let n = self.points;
        let mut xs: Vec<f64> = (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Log => {
                        let (a, b) = (self.x_min.ln(), self.x_max.ln());
                        (a + f * (b - a)).exp()
                    }
                    Spacing::Linear => self.x_min + f * (self.x_max - self.x_min),
                }
            })
            .collect();
        // pin the endpoints exactly
        xs[0] = self.x_min;
        xs[n - 1] = self.x_max;
        xs.extend(
            self.anchors
                .iter()
                .copied()
                .filter(|a| *a >= self.x_min && *a <= self.x_max),
        );
        xs.retain(|&x| match self.side {
            Side::All => true,
            Side::BelowK => x < k * (1.0 - SPLIT_EXCLUSION),
            Side::AboveK => x > k * (1.0 + SPLIT_EXCLUSION),
        });
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Indeterminate => "INDETERMINATE",
        }
    }

    /// Sign classification of a claimed-positive quantity.
    pub fn classify(value: f64, bound: f64) -> Verdict {
        let margin = MARGIN_FACTOR * bound;
        if value > 0.0 && value >= margin {
            Verdict::Pass
        } else if value < 0.0 && value <= -margin {
            Verdict::Fail
        } else {
            Verdict::Indeterminate
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A grid point with its claimed-positive quantity.
#[derive(Debug, Clone)]
pub struct Witness {
    pub x: f64,
    pub value: Real,
    pub error_bound: f64,
    /// `value / error_bound` (infinite when the bound is zero).
    pub margin: f64,
    pub verdict: Verdict,
}

impl Witness {
    fn from_result(x: f64, q: &EvalResult) -> Self {
        let v = q.to_f64();
        let margin = if q.abs_error_bound > 0.0 {
            v / q.abs_error_bound
        } else if v == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(v)
        };
        Witness {
            x,
            value: q.value.clone(),
            error_bound: q.abs_error_bound,
            margin,
            verdict: Verdict::classify(v, q.abs_error_bound),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub pass: usize,
    pub fail: usize,
    pub indeterminate: usize,
    /// Points re-evaluated at doubled precision.
    pub retried: usize,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub claim_id: ClaimId,
    pub params: KParams,
    /// Derivative order for sign-pattern claims, `n` for Lemma 3.
    pub order: Option<u32>,
    pub grid: GridSpec,
    pub verdict: Verdict,
    /// All failing and indeterminate points, sorted by `x`.
    pub witnesses: Vec<Witness>,
    /// The point with the smallest margin.
    pub weakest: Option<Witness>,
    pub stats: VerdictCounts,
}

impl Certificate {
    fn assemble(
        claim_id: ClaimId,
        params: KParams,
        order: Option<u32>,
        grid: GridSpec,
        points: Vec<(Witness, bool)>,
    ) -> Self {
        let mut stats = VerdictCounts::default();
        let mut witnesses = Vec::new();
        let mut weakest: Option<Witness> = None;
        for (w, retried) in points {
            if retried {
                stats.retried += 1;
            }
            match w.verdict {
                Verdict::Pass => stats.pass += 1,
                Verdict::Fail => stats.fail += 1,
                Verdict::Indeterminate => stats.indeterminate += 1,
            }
            if weakest.as_ref().is_none_or(|b| w.margin < b.margin) {
                weakest = Some(w.clone());
            }
            if w.verdict != Verdict::Pass {
                witnesses.push(w);
            }
        }
        witnesses.sort_by(|a, b| a.x.total_cmp(&b.x));
        let verdict = if stats.fail > 0 {
            Verdict::Fail
        } else if stats.indeterminate > 0 {
            Verdict::Indeterminate
        } else {
            Verdict::Pass
        };
        Certificate {
            claim_id,
            params,
            order,
            grid,
            verdict,
            witnesses,
            weakest,
            stats,
        }
    }

    /// The witness closest to `x`, if any.
    pub fn witness_near(&self, x: f64) -> Option<&Witness> {
        self.witnesses
            .iter()
            .min_by(|a, b| (a.x - x).abs().total_cmp(&(b.x - x).abs()))
    }
}

/// Log of a ratio at `x`: `ln Γ_k(mx) − m ln Γ_k(x)`, minus `(m−1) ln x` for F,
/// negated for 1/G.
pub fn ln_ratio(ev: &Evaluator, which: Ratio, x: f64, params: &KParams) -> Result<EvalResult> {
    require_positive("x", x)?;
    ln_ratio_at(ev, which, &ev.real(x), params)
}

/// [`ln_ratio`] at a working-precision argument.
pub fn ln_ratio_at(
    ev: &Evaluator,
    which: Ratio,
    xr: &Real,
    params: &KParams,
) -> Result<EvalResult> {
    let prec = &ev.precision;
    let kr = ev.real(params.k);
    let mf = f64::from(params.m);
    let big = ev.ln_gamma_k_at(&(xr * mf), &kr)?;
    let small = ev.ln_gamma_k_at(xr, &kr)?;
    let scaled = &small.value * mf;
    let mut value = &big.value - &scaled;
    let mut err = big.abs_error_bound + mf * small.abs_error_bound;
    let mut magnitude = big.to_f64().abs() + scaled.to_f64().abs();
    if which == Ratio::F {
        let lx = xr.ln() * (mf - 1.0);
        err += prec.rounding(2.0, lx.to_f64());
        magnitude += lx.to_f64().abs();
        value = value - lx;
    }
    if which == Ratio::InvG {
        value = -value;
    }
    err += prec.rounding(3.0, magnitude);
    Ok(EvalResult::new(value, err, big.backend, prec.target_digits))
}

fn exp_result(ev: &Evaluator, ln: EvalResult, x: f64, params: &KParams) -> Result<EvalResult> {
    let lnf = ln.to_f64();
    if lnf > LN_MAX_REPRESENTABLE {
        return Err(Error::Overflow {
            x,
            k: params.k,
            ln_value: lnf,
        });
    }
    let value = ln.value.exp();
    let v = value.to_f64();
    let err = v * ln.abs_error_bound.exp_m1() + ev.precision.rounding(2.0 + lnf.abs(), v);
    Ok(EvalResult::new(value, err, ln.backend, ln.digits_requested))
}

/// `F(x) = Γ_k(mx) / (x^{m−1} Γ_k(x)^m)`, evaluated through its logarithm.
#[allow(non_snake_case)]
pub fn ratio_F(ev: &Evaluator, x: f64, params: &KParams) -> Result<EvalResult> {
    let ln = ln_ratio(ev, Ratio::F, x, params)?;
    exp_result(ev, ln, x, params)
}

/// `G(x) = Γ_k(mx) / Γ_k(x)^m`, evaluated through its logarithm.
#[allow(non_snake_case)]
pub fn ratio_G(ev: &Evaluator, x: f64, params: &KParams) -> Result<EvalResult> {
    let ln = ln_ratio(ev, Ratio::G, x, params)?;
    exp_result(ev, ln, x, params)
}

fn order_check(r: u32) -> Result<()> {
    if r < 1 {
        return Err(Error::Order {
            order: i64::from(r),
            min: 1,
        });
    }
    Ok(())
}

/// `m^r ψ_k^(r−1)(mx)` and `m ψ_k^(r−1)(x)` with their bounds.
fn scaled_psi_pair(
    ev: &Evaluator,
    r: u32,
    x: f64,
    params: &KParams,
) -> Result<(Real, Real, f64, f64)> {
    let (xr, kr) = (ev.real(x), ev.real(params.k));
    let mf = f64::from(params.m);
    let at_mx = ev.psi_k_at(r - 1, &(&xr * mf), &kr)?;
    let at_x = ev.psi_k_at(r - 1, &xr, &kr)?;
    let mr = ev.real(mf).powi(r as usize);
    let a = &at_mx.value * &mr;
    let b = &at_x.value * mf;
    let ea = mr.to_f64() * at_mx.abs_error_bound;
    let eb = mf * at_x.abs_error_bound;
    Ok((a, b, ea, eb))
}

/// `(ln F)^(r)(x) = m^r ψ_k^(r−1)(mx) − m ψ_k^(r−1)(x) + (−1)^r (m−1)(r−1)!/x^r`.
pub fn log_deriv_f(ev: &Evaluator, r: u32, x: f64, params: &KParams) -> Result<EvalResult> {
    order_check(r)?;
    require_positive("x", x)?;
    let prec = &ev.precision;
    let (a, b, ea, eb) = scaled_psi_pair(ev, r, x, params)?;
    let mut fact = ev.real(1.0);
    for i in 2..r {
        fact = fact * f64::from(i);
    }
    let pole = fact * f64::from(params.m - 1) / ev.real(x).powi(r as usize);
    let pole = if r % 2 == 1 { -pole } else { pole };
    let value = &(&a - &b) + &pole;
    let magnitude = a.to_f64().abs() + b.to_f64().abs() + pole.to_f64().abs();
    let err = ea + eb + prec.rounding(f64::from(r) + 8.0, magnitude);
    Ok(EvalResult::new(value, err, ev.backend, prec.target_digits))
}

/// `(ln 1/G)^(r)(x) = m ψ_k^(r−1)(x) − m^r ψ_k^(r−1)(mx)`.
pub fn log_deriv_inv_g(ev: &Evaluator, r: u32, x: f64, params: &KParams) -> Result<EvalResult> {
    order_check(r)?;
    require_positive("x", x)?;
    let prec = &ev.precision;
    let (a, b, ea, eb) = scaled_psi_pair(ev, r, x, params)?;
    let value = &b - &a;
    let magnitude = a.to_f64().abs() + b.to_f64().abs();
    let err = ea + eb + prec.rounding(f64::from(r) + 4.0, magnitude);
    Ok(EvalResult::new(value, err, ev.backend, prec.target_digits))
}

/// Closed-form `(ln h)^(r)` for `h ∈ {F, G, 1/G}`.
pub fn log_deriv(
    ev: &Evaluator,
    which: Ratio,
    r: u32,
    x: f64,
    params: &KParams,
) -> Result<EvalResult> {
    match which {
        Ratio::F => log_deriv_f(ev, r, x, params),
        Ratio::InvG => log_deriv_inv_g(ev, r, x, params),
        Ratio::G => {
            let mut v = log_deriv_inv_g(ev, r, x, params)?;
            v.value = -v.value;
            Ok(v)
        }
    }
}

/// r-th central difference of `ln h` with step `h`, built from `ln Γ_k`:
/// `h^{−r} Σ_j (−1)^j C(r, j) ln h(x + (r/2 − j) step)`.
pub fn finite_diff_log_deriv(
    ev: &Evaluator,
    which: Ratio,
    r: u32,
    x: f64,
    params: &KParams,
    step: f64,
) -> Result<f64> {
    order_check(r)?;
    require_positive("x", x)?;
    require_positive("h", step)?;
    let half = f64::from(r) / 2.0;
    if x - half * step <= 0.0 {
        return Err(Error::Stencil {
            x,
            h: step,
            order: r,
        });
    }
    let bits = ev.precision.bits();
    let (xr, hr) = (ev.real(x), ev.real(step));
    let mut acc = Real::zero(bits);
    let mut binom = 1.0f64;
    for j in 0..=r {
        // nodes in working precision so the stencil stays exactly uniform
        let node = &xr + &(&hr * (half - f64::from(j)));
        let v = ln_ratio_at(ev, which, &node, params)?.value;
        let term = v * binom;
        acc = if j % 2 == 0 { acc + term } else { acc - term };
        binom = binom * f64::from(r - j) / f64::from(j + 1);
    }
    Ok((acc / hr.powi(r as usize)).to_f64())
}

/// The claimed-positive quantity `s_r(x) = (−1)^r (ln h)^(r)(x)`; `r = 0` gives
/// `ln h` itself.
pub fn sign_quantity(
    ev: &Evaluator,
    claim: ClaimId,
    r: u32,
    x: f64,
    params: &KParams,
) -> Result<EvalResult> {
    let which = match claim {
        ClaimId::Thm1aLcmF => Ratio::F,
        ClaimId::Thm1bLcmInvg => Ratio::InvG,
        other => {
            return Err(Error::Config(format!(
                "{other} is not a sign-pattern claim"
            )));
        }
    };
    if r == 0 {
        return ln_ratio(ev, which, x, params);
    }
    let mut d = log_deriv(ev, which, r, x, params)?;
    if r % 2 == 1 {
        d.value = -d.value;
    }
    Ok(d)
}

fn domain_error(claim: ClaimId, x: f64, k: f64) -> Error {
    let domain = match claim.side() {
        Side::AboveK => format!("x > k = {k}"),
        Side::BelowK => format!("0 < x < k = {k}"),
        Side::All => "x > 0".to_string(),
    };
    Error::GridDomain {
        claim: claim.id().to_string(),
        x,
        domain,
    }
}

/// `(1/m) Σ_s ψ_k'(x + sk/m)` and `ψ_k'(x)` with their bounds.
fn trigamma_average(ev: &Evaluator, x: f64, params: &KParams) -> Result<(EvalResult, EvalResult)> {
    let prec = &ev.precision;
    let (xr, kr) = (ev.real(x), ev.real(params.k));
    let m = params.m;
    let mf = f64::from(m);
    let mut sum = Real::zero(prec.bits());
    let mut err = 0.0;
    for s in 0..m {
        let arg = &xr + &(&kr * f64::from(s) / mf);
        let p = ev.psi_k_at(1, &arg, &kr)?;
        sum = sum + &p.value;
        err += p.abs_error_bound;
    }
    let avg = sum / mf;
    let avg_err = err / mf + prec.rounding(mf + 1.0, avg.to_f64());
    let at_x = ev.psi_k_at(1, &xr, &kr)?;
    Ok((
        EvalResult::new(avg, avg_err, ev.backend, prec.target_digits),
        at_x,
    ))
}

/// Signed slack of a corollary inequality at `x`, positive exactly when the
/// inequality holds there, together with its point verdict.
pub fn check_inequality(
    ev: &Evaluator,
    claim: ClaimId,
    x: f64,
    params: &KParams,
) -> Result<(EvalResult, Verdict)> {
    require_positive("x", x)?;
    let prec = &ev.precision;
    let k = params.k;
    let on_side = match claim.side() {
        Side::All => true,
        Side::AboveK => x > k,
        Side::BelowK => x < k,
    };
    if !on_side {
        return Err(domain_error(claim, x, k));
    }
    let m = params.m;
    let mf = f64::from(m);
    // ln((m−1)!)
    let mut ln_fact = Real::zero(prec.bits());
    for i in 2..m {
        ln_fact = ln_fact + ev.real(f64::from(i)).ln();
    }
    let ln_fact_err = prec.rounding(2.0 * mf, ln_fact.to_f64());
    let kr = ev.real(k);
    let xr = ev.real(x);

    let slack = match claim {
        ClaimId::Cor1Lower | ClaimId::Cor1Reversed => {
            let g = ln_ratio(ev, Ratio::G, x, params)?;
            let bound = kr.ln() * (mf - 1.0) + &ln_fact;
            let berr = ln_fact_err + prec.rounding(3.0, bound.to_f64());
            let d = &g.value - &bound;
            let v = if claim == ClaimId::Cor1Lower { d } else { -d };
            let err = g.abs_error_bound
                + berr
                + prec.rounding(1.0, g.to_f64().abs() + bound.to_f64().abs());
            EvalResult::new(v, err, g.backend, prec.target_digits)
        }
        ClaimId::Cor1Upper | ClaimId::Cor1ReversedUpper => {
            let g = ln_ratio(ev, Ratio::G, x, params)?;
            let bound = xr.ln() * (mf - 1.0) + &ln_fact;
            let berr = ln_fact_err + prec.rounding(3.0, bound.to_f64());
            let d = &bound - &g.value;
            let v = if claim == ClaimId::Cor1Upper { d } else { -d };
            let err = g.abs_error_bound
                + berr
                + prec.rounding(1.0, g.to_f64().abs() + bound.to_f64().abs());
            EvalResult::new(v, err, g.backend, prec.target_digits)
        }
        ClaimId::Cor2 => {
            let g = ln_ratio(ev, Ratio::G, x, params)?;
            let bound = xr.ln() * (mf - 1.0) - ev.real(mf).ln();
            let berr = prec.rounding(4.0, xr.ln().to_f64().abs() * mf + mf.ln());
            let v = &bound - &g.value;
            let err = g.abs_error_bound
                + berr
                + prec.rounding(1.0, g.to_f64().abs() + bound.to_f64().abs());
            EvalResult::new(v, err, g.backend, prec.target_digits)
        }
        ClaimId::Cor3Lower | ClaimId::Cor3Upper => {
            let (avg, at_x) = trigamma_average(ev, x, params)?;
            let base_err = avg.abs_error_bound + at_x.abs_error_bound;
            if claim == ClaimId::Cor3Lower {
                let v = &at_x.value - &avg.value;
                let err = base_err + prec.rounding(1.0, at_x.to_f64().abs());
                EvalResult::new(v, err, ev.backend, prec.target_digits)
            } else {
                let extra = ev.real(mf - 1.0) / (xr.powi(2) * mf);
                let v = &(&avg.value + &extra) - &at_x.value;
                let err = base_err + prec.rounding(6.0, extra.to_f64() + at_x.to_f64().abs());
                EvalResult::new(v, err, ev.backend, prec.target_digits)
            }
        }
        other => {
            return Err(Error::Config(format!("{other} is not an inequality claim")));
        }
    };
    let verdict = Verdict::classify(slack.to_f64(), slack.abs_error_bound);
    Ok((slack, verdict))
}

/// Evaluates `quantity` at each point in parallel, retrying indeterminate
/// points once at doubled working precision. Order of the output follows `xs`.
fn sweep<F>(ev: &Evaluator, xs: &[f64], quantity: F) -> Result<Vec<(Witness, bool)>>
where
    F: Fn(&Evaluator, f64) -> Result<EvalResult> + Sync,
{
    let doubled = ev.with_precision(ev.precision.doubled());
    xs.par_iter()
        .map(|&x| {
            let q = quantity(ev, x)?;
            let w = Witness::from_result(x, &q);
            if w.verdict != Verdict::Indeterminate || doubled.precision == ev.precision {
                return Ok((w, false));
            }
            let q2 = quantity(&doubled, x)?;
            Ok((Witness::from_result(x, &q2), true))
        })
        .collect()
}

/// Certifies the sign pattern `s_r > 0` for each `r` in `1..=r_max`, one
/// certificate per order.
pub fn certify_sign_pattern(
    ev: &Evaluator,
    claim: ClaimId,
    params: &KParams,
    r_max: u32,
    grid: &GridSpec,
) -> Result<Vec<Certificate>> {
    certify_sign_pattern_orders(ev, claim, params, 1..=r_max, grid)
}

/// As [`certify_sign_pattern`] over an explicit range of orders; including
/// `r = 0` checks `ln h ≥ 0` itself.
pub fn certify_sign_pattern_orders(
    ev: &Evaluator,
    claim: ClaimId,
    params: &KParams,
    orders: impl IntoIterator<Item = u32>,
    grid: &GridSpec,
) -> Result<Vec<Certificate>> {
    if !claim.is_sign_pattern() {
        return Err(Error::Config(format!(
            "{claim} is not a sign-pattern claim"
        )));
    }
    grid.validate()?;
    let xs = grid.points_for(params.k);
    let mut out = Vec::new();
    for r in orders {
        let pts = sweep(ev, &xs, |e, x| sign_quantity(e, claim, r, x, params))?;
        let p = if r >= 1 { params.with_r(r)? } else { *params };
        out.push(Certificate::assemble(claim, p, Some(r), grid.clone(), pts));
    }
    if out.is_empty() {
        return Err(Error::Config("r_max must be >= 1".into()));
    }
    Ok(out)
}

/// Lemma 3 over a `t`-grid for one `n`.
pub fn certify_lemma3(prec: &PrecisionConfig, n: u32, grid: &GridSpec) -> Result<Certificate> {
    grid.validate()?;
    let ts = grid.points_for(1.0);
    let ev = Evaluator::new(Backend::Direct, *prec);
    let pts = sweep(&ev, &ts, |e, t| {
        let o = check_lemma3(&e.precision, n, t)?;
        let bound = o.lhs.abs_error_bound + o.rhs.abs_error_bound;
        Ok(EvalResult::new(
            o.residual,
            bound,
            Backend::Direct,
            e.precision.target_digits,
        ))
    })?;
    let params = KParams::new(1.0, n + 1, 1)?;
    Ok(Certificate::assemble(
        ClaimId::Lemma3,
        params,
        Some(n),
        grid.clone(),
        pts,
    ))
}

/// Certifies one claim over `grid`. Sign-pattern claims use `params.r`;
/// Lemma 3 is checked with `n = m − 1`. Grid points on the wrong side of
/// `x = k` for a Corollary 1 claim are an error unless the grid is restricted
/// with [`GridSpec::restricted`].
pub fn certify_claim(
    ev: &Evaluator,
    claim: ClaimId,
    params: &KParams,
    grid: &GridSpec,
) -> Result<Certificate> {
    grid.validate()?;
    match claim {
        ClaimId::Thm1aLcmF | ClaimId::Thm1bLcmInvg => {
            let mut v = certify_sign_pattern_orders(ev, claim, params, [params.r], grid)?;
            Ok(v.remove(0))
        }
        ClaimId::Lemma3 => certify_lemma3(&ev.precision, params.m - 1, grid),
        _ => {
            let xs = grid.points_for(params.k);
            let side = claim.side();
            if let Some(&bad) = xs.iter().find(|&&x| match side {
                Side::All => false,
                Side::AboveK => x <= params.k,
                Side::BelowK => x >= params.k,
            }) {
                return Err(domain_error(claim, bad, params.k));
            }
            if xs.is_empty() {
                return Err(Error::Config(format!(
                    "grid has no points in the domain of {claim}"
                )));
            }
            let pts = sweep(ev, &xs, |e, x| {
                check_inequality(e, claim, x, params).map(|(q, _)| q)
            })?;
            Ok(Certificate::assemble(
                claim,
                *params,
                None,
                grid.clone(),
                pts,
            ))
        }
    }
}
