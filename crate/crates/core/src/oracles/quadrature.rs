//! Adaptive Gauss–Kronrod quadrature on finite intervals.
//!
//! Globally adaptive bisection: the interval with the largest error estimate
//! is split until the summed estimate meets the tolerance. Error estimates
//! follow the QUADPACK scaling of `|K15 − G7|`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 15-point Kronrod abscissae on [0, 1] (the odd-indexed entries are the
/// 7-point Gauss nodes).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Adaptive 7-point Gauss / 15-point Kronrod pair.
    GaussKronrod15,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: Rule,
    pub abs_tolerance: f64,
    /// Tolerance relative to the integral's magnitude; the effective target
    /// is `max(abs_tolerance, rel_tolerance · |I|)`.
    pub rel_tolerance: f64,
    pub max_subdivisions: usize,
    /// Truncation point for integrals over (0, ∞). `None` picks the smallest
    /// cutoff whose analytic tail bound is below half the tolerance.
    pub upper_cutoff: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rule: Rule::GaussKronrod15,
            abs_tolerance: 1e-15,
            rel_tolerance: 1e-13,
            max_subdivisions: 4000,
            upper_cutoff: None,
        }
    }
}

impl QuadratureSpec {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tolerance > 0.0) || !self.abs_tolerance.is_finite() {
            return Err(Error::Config("abs_tolerance must be > 0".into()));
        }
        if !(self.rel_tolerance >= 0.0) {
            return Err(Error::Config("rel_tolerance must be >= 0".into()));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::Config("max_subdivisions must be >= 1".into()));
        }
        if let Some(t) = self.upper_cutoff {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::Config(
                    "upper_cutoff must be a finite value > 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// Tolerance target for an integral of magnitude `scale`.
    pub fn target(&self, scale: f64) -> f64 {
        self.abs_tolerance.max(self.rel_tolerance * scale.abs())
    }
}

/// Result of a finite-interval integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One Gauss–Kronrod panel: (Kronrod value, error estimate).
pub fn gauss_kronrod_15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Adaptive integration of `f` over `[a, b]`.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol·|I|)`;
/// fails with [`Error::Convergence`] if that needs more than
/// `max_subdivisions` panels.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            subdivisions: 0,
        });
    }
    let (v0, e0) = gauss_kronrod_15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        value: v0,
        error: e0,
    });
    let mut total = v0;
    let mut total_err = e0;
    let mut panels = 1usize;
    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if panels >= max_subdivisions {
            return Err(Error::Convergence {
                estimate: total_err,
                tolerance: tol,
                subdivisions: panels,
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution
            return Err(Error::Convergence {
                estimate: total_err,
                tolerance: tol,
                subdivisions: panels,
            });
        }
        let (v1, e1) = gauss_kronrod_15(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        panels += 1;
    }
    // resum to shed the drift of the running totals
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(Integral {
        value,
        error,
        subdivisions: panels,
    })
}

/// Integrates over consecutive pieces `[b_0, b_1], [b_1, b_2], …`, splitting
/// the tolerance evenly.
pub fn integrate_pieces(
    f: impl Fn(f64) -> f64 + Copy,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<Integral> {
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    let mut out = Integral {
        value: 0.0,
        error: 0.0,
        subdivisions: 0,
    };
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let part = integrate(f, w[0], w[1], abs_tol / pieces, rel_tol, max_subdivisions)?;
        out.value += part.value;
        out.error += part.error;
        out.subdivisions += part.subdivisions;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        let k: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        // Kronrod-15 is exact through degree 22 on [-1, 1]
        for deg in 0..=22 {
            let (v, _) = gauss_kronrod_15(&|x: f64| x.powi(deg), -1.0, 1.0);
            let exact = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / f64::from(deg + 1)
            };
            assert!((v - exact).abs() < 1e-14, "degree {deg}: {v} vs {exact}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let r = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-10, 0.0, 2000).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
        assert!((r.value - 2.0).abs() <= r.error.max(1e-12));
    }

    #[test]
    fn reports_convergence_failure() {
        let e = integrate(|x: f64| (1.0 / x).sin(), 1e-9, 1.0, 1e-14, 0.0, 5).unwrap_err();
        assert!(matches!(e, Error::Convergence { .. }));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec {
            abs_tolerance: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec {
            max_subdivisions: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
