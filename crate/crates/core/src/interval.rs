//! Wilson score intervals over (possibly fractional) success counts.
//!
//! The interval is written in center/halfwidth form:
//!
//! ```text
//! center    = (s + z²/2) / (n + z²)
//! halfwidth = z / (n + z²) · sqrt(s·(n − s)/n + z²/4)
//! ```
//!
//! where `s` and `n` are the success and total counts. With kernel-weighted
//! pseudo-counts both may be fractional. At `n = 0` the variance term is taken
//! as 0, which gives the maximally uncertain interval `[0, 1]`.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

/// Tolerance for floating-point excursions of the bounds outside `[0, 1]`.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

/// Success and total counts of a Binomial experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Counts {
    successes: f64,
    total: f64,
}

impl Counts {
    pub fn new(successes: f64, total: f64) -> Result<Self> {
        if !successes.is_finite() || !total.is_finite() {
            return Err(Error::domain(format!(
                "counts must be finite (successes={successes}, total={total})"
            )));
        }
        if successes < 0.0 || total < 0.0 {
            return Err(Error::domain(format!(
                "counts must be nonnegative (successes={successes}, total={total})"
            )));
        }
        if successes > total {
            return Err(Error::domain(format!(
                "successes {successes} exceed total {total}"
            )));
        }
        Ok(Counts { successes, total })
    }

    pub fn zero() -> Self {
        Counts {
            successes: 0.0,
            total: 0.0,
        }
    }

    pub fn successes(&self) -> f64 {
        self.successes
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// A symmetric confidence bound `center ± halfwidth` on a success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceBound {
    pub center: f64,
    pub halfwidth: f64,
    pub z: f64,
}

impl ConfidenceBound {
    pub fn lower(&self) -> f64 {
        self.center - self.halfwidth
    }

    pub fn upper(&self) -> f64 {
        self.center + self.halfwidth
    }
}

/// Two-sided standard-normal quantile for confidence level `alpha`,
/// i.e. the `z` with `Φ(z) = 1 − (1 − alpha)/2`.
pub fn z_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "confidence level must lie in (0, 1), got {alpha}"
        )));
    }
    // Φ⁻¹(0.5 + alpha/2). Using the upper tail probability directly keeps
    // precision when alpha is tiny.
    Ok(-normal_quantile_lower_tail((1.0 - alpha) / 2.0))
}

/// Inverse of the standard normal CDF (Wichura's AS 241, PPND16).
///
/// Relative accuracy is about 1e-16 over `(0, 1)`.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    normal_quantile_lower_tail(p)
}

fn normal_quantile_lower_tail(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608_0e0,
        1.331_416_678_917_843_774_5e2,
        1.971_590_950_306_551_442_7e3,
        1.373_169_376_550_946_112_5e4,
        4.592_195_393_154_987_145_7e4,
        6.726_577_092_700_870_085_3e4,
        3.343_057_558_358_812_810_5e4,
        2.509_080_928_730_122_672_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_125_2e1,
        6.871_870_074_920_579_083_0e2,
        5.394_196_021_424_751_107_7e3,
        2.121_379_430_158_659_586_7e4,
        3.930_789_580_009_271_061_0e4,
        2.872_908_573_572_194_267_4e4,
        5.226_495_278_852_854_561_0e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34e0,
        4.630_337_846_156_545_295_90e0,
        5.769_497_221_460_691_405_50e0,
        3.647_848_324_763_204_605_04e0,
        1.270_458_252_452_368_382_58e0,
        2.417_807_251_774_506_117_70e-1,
        2.272_384_498_926_918_458_33e-2,
        7.745_450_142_783_414_076_40e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87e0,
        1.676_384_830_183_803_849_40e0,
        6.897_673_349_851_000_045_50e-1,
        1.481_039_764_274_800_745_90e-1,
        1.519_866_656_361_645_719_66e-2,
        5.475_938_084_995_344_946_00e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_20e0,
        5.463_784_911_164_114_369_90e0,
        1.784_826_539_917_291_335_80e0,
        2.965_605_718_285_048_912_30e-1,
        2.653_218_952_657_612_309_30e-2,
        1.242_660_947_388_078_438_60e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_879_376_90e-1,
        1.369_298_809_227_358_053_10e-1,
        1.487_536_129_085_061_485_25e-2,
        7.868_691_311_456_132_591_00e-4,
        1.846_318_317_510_054_681_80e-5,
        1.421_511_758_316_445_888_70e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        let r = r - 1.6;
        horner(&C, r) / horner(&D, r)
    } else {
        let r = r - 5.0;
        horner(&E, r) / horner(&F, r)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

fn horner(coeffs: &[f64; 8], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Wilson score interval for `counts` at standard-normal quantile `z`.
pub fn wilson_interval(counts: Counts, z: f64) -> Result<ConfidenceBound> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::domain(format!("z must be positive and finite, got {z}")));
    }
    let s = counts.successes;
    let n = counts.total;
    let z2 = z * z;
    let denom = n + z2;

    if n == 0.0 {
        // z/z² · sqrt(z²/4) = 1/2 exactly; skip the rounding
        return Ok(ConfidenceBound {
            center: 0.5,
            halfwidth: 0.5,
            z,
        });
    }
    let center = (s + 0.5 * z2) / denom;
    let spread = s * (n - s) / n;
    let halfwidth = z / denom * (spread.max(0.0) + 0.25 * z2).sqrt();

    clamp_bound(center, halfwidth, z)
}

/// Pulls the bound back into `[0, 1]` when rounding pushed it out by no more
/// than [`CLAMP_TOLERANCE`]; larger excursions are reported.
fn clamp_bound(center: f64, halfwidth: f64, z: f64) -> Result<ConfidenceBound> {
    let lower = center - halfwidth;
    let upper = center + halfwidth;
    if lower < -CLAMP_TOLERANCE || upper > 1.0 + CLAMP_TOLERANCE || !(halfwidth >= 0.0) {
        return Err(Error::Numerical(format!(
            "Wilson bound [{lower}, {upper}] escapes [0, 1]"
        )));
    }
    let halfwidth = halfwidth.min(center).min(1.0 - center);
    Ok(ConfidenceBound {
        center,
        halfwidth,
        z,
    })
}
