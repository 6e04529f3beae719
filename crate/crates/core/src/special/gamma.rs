//! Complex gamma function by the Lanczos approximation (g = 607/128,
//! 15 terms), with reflection into the left half-plane.
//!
//! Validated against frozen 18-digit oracle values to relative error below
//! 1e-12 throughout |z| <= 50 (and in practice far beyond); near-pole
//! evaluations are refused rather than returned inaccurately. The `ln_`
//! variants work in log space so that gamma-factor *ratios* can be formed at
//! heights where the factors themselves would over- or underflow.

use crate::error::{Error, Result};
use crate::{c64, C64};

const LANCZOS_G: f64 = 607.0 / 128.0;

const LANCZOS_C: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    3.3994649984811888699e-5,
    4.6523628927048575665e-5,
    -9.8374475304879564677e-5,
    1.5808870322491248884e-4,
    -2.1026444172410488319e-4,
    2.1743961811521264320e-4,
    -1.6431810653676389022e-4,
    8.4418223983852743293e-5,
    -2.6190838401581408670e-5,
    3.6899182659531622704e-6,
];

/// Distance to a pole below which evaluation is refused.
pub const POLE_EPS: f64 = 1e-8;

fn lanczos_series(z: C64) -> C64 {
    // z in the right half-plane convention: series in z - 1.
    let mut acc = c64(LANCZOS_C[0], 0.0);
    for (k, &c) in LANCZOS_C.iter().enumerate().skip(1) {
        acc += c / (z - 1.0 + k as f64);
    }
    acc
}

fn near_pole(z: C64) -> Option<(i64, f64)> {
    if z.re > 0.5 {
        return None;
    }
    let n = (-z.re).round() as i64;
    let d = (z + n as f64).norm();
    if d < POLE_EPS && n >= 0 {
        Some((n, d))
    } else {
        None
    }
}

/// log sin(pi z) on a branch suitable for exponentiation, stable for large
/// |Im z| (works through the dominant exponential explicitly).
pub fn ln_sin_pi(z: C64) -> C64 {
    let ipiz = c64(0.0, std::f64::consts::PI) * z;
    let ln2 = std::f64::consts::LN_2;
    let half_pi_i = c64(0.0, std::f64::consts::FRAC_PI_2);
    if z.im <= 0.0 {
        // sin(pi z) = e^{i pi z} (1 - e^{-2 i pi z}) / (2i), first factor dominant
        ipiz + (c64(1.0, 0.0) - (-ipiz * 2.0).exp()).ln() - ln2 - half_pi_i
    } else {
        // sin(pi z) = -e^{-i pi z} (1 - e^{2 i pi z}) / (2i)
        -ipiz + (c64(1.0, 0.0) - (ipiz * 2.0).exp()).ln() - ln2 + half_pi_i
    }
}

/// Principal-branch-compatible log gamma: exp(ln_gamma(z)) = gamma(z), with
/// Re part exact; the Im part may differ from the principal branch by a
/// multiple of 2 pi (irrelevant for ratio work, which exponentiates).
pub fn ln_gamma(z: C64) -> Result<C64> {
    if let Some((n, d)) = near_pole(z) {
        return Err(Error::NearPole {
            what: "ln_gamma",
            location: format!("z = -{n}"),
            distance: d,
        });
    }
    if z.re >= 0.5 {
        let t = z + (LANCZOS_G - 0.5);
        let half_log_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
        Ok(half_log_2pi + lanczos_series(z).ln() + (z - 0.5) * t.ln() - t)
    } else {
        // Reflection: ln Gamma(z) = ln pi - ln sin(pi z) - ln Gamma(1 - z)
        let lg = ln_gamma(c64(1.0, 0.0) - z)?;
        Ok(c64(std::f64::consts::PI.ln(), 0.0) - ln_sin_pi(z) - lg)
    }
}

/// Gamma(z). Validated range: poles excluded, |z| up to ~150 directly
/// (beyond that the value over/underflows f64 and an error is returned;
/// use [`ln_gamma`] or [`gamma_ratio`] instead).
pub fn gamma(z: C64) -> Result<C64> {
    if let Some((n, d)) = near_pole(z) {
        return Err(Error::NearPole {
            what: "gamma",
            location: format!("z = -{n}"),
            distance: d,
        });
    }
    if z.re >= 0.5 {
        let t = z + (LANCZOS_G - 0.5);
        let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
        let expo = (z - 0.5) * t.ln() - t;
        if expo.re > 700.0 {
            return Err(Error::RangeUnsupported {
                what: "gamma",
                detail: format!("overflow at z = {z}; use ln_gamma"),
            });
        }
        Ok(sqrt_2pi * lanczos_series(z) * expo.exp())
    } else {
        // Gamma(z) = pi / (sin(pi z) Gamma(1-z)); go through logs when the
        // pieces would overflow, directly otherwise.
        if z.im.abs() < 30.0 {
            let s = (std::f64::consts::PI * z).sin();
            let g = gamma(c64(1.0, 0.0) - z)?;
            Ok(std::f64::consts::PI / (s * g))
        } else {
            let lg = ln_gamma(z)?;
            if lg.re.abs() > 700.0 {
                return Err(Error::RangeUnsupported {
                    what: "gamma",
                    detail: format!("under/overflow at z = {z}; use ln_gamma"),
                });
            }
            Ok(lg.exp())
        }
    }
}

/// Gamma(a) / Gamma(b) through log space; immune to intermediate overflow.
pub fn gamma_ratio(a: C64, b: C64) -> Result<C64> {
    let d = ln_gamma(a)? - ln_gamma(b)?;
    if d.re > 700.0 {
        return Err(Error::RangeUnsupported {
            what: "gamma_ratio",
            detail: "ratio overflows f64".into(),
        });
    }
    Ok(d.exp())
}
