//! Gamma-factor machinery: the sine/cosine gamma factors G_0, G_1, G^{+-},
//! their degree-3 products, the closed product formula for the scattering
//! composition, and the Barnes-type gamma-ratio integral with its quadrature
//! oracle.

pub mod bessel;
pub mod gamma;
pub mod kernels;

use crate::error::{Error, Result};
use crate::quad;
use crate::{c64, C64};
use gamma::{gamma, ln_gamma, ln_sin_pi};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Largest admissible |Re mu_j| for a tempered-range spectral triple.
pub const THETA_BOUND: f64 = 5.0 / 14.0;

/// Zero-sum triple of spectral parameters.
#[derive(Debug, Clone, Copy)]
pub struct MuTriple {
    pub mu: [C64; 3],
}

impl MuTriple {
    pub fn new(mu: [C64; 3]) -> Result<Self> {
        let s: C64 = mu.iter().sum();
        if s.norm() > 1e-10 {
            return Err(Error::domain(format!("mu must sum to zero, got {s}")));
        }
        if mu.iter().any(|m| m.re.abs() > THETA_BOUND + 1e-12) {
            return Err(Error::domain(format!(
                "|Re mu_j| must stay within {THETA_BOUND}"
            )));
        }
        Ok(MuTriple { mu })
    }

    /// Construct from two free components, the third balancing the sum.
    pub fn from_two(m0: C64, m1: C64) -> Result<Self> {
        Self::new([m0, m1, -m0 - m1])
    }

    /// The dual triple -mu.
    pub fn neg(&self) -> MuTriple {
        MuTriple {
            mu: [-self.mu[0], -self.mu[1], -self.mu[2]],
        }
    }
}

/// ln cos(pi z / 2), stable at large |Im z|; branch irrelevant after exp.
pub(crate) fn ln_cos_half_pi(z: C64) -> C64 {
    // cos(pi z / 2) = sin(pi (z+1) / 2)
    ln_sin_pi((z + 1.0) / 2.0)
}

/// ln sin(pi z / 2).
fn ln_sin_half_pi(z: C64) -> C64 {
    ln_sin_pi(z / 2.0)
}

/// G^{+-}(s) = Gamma(s) (2 pi)^{-s} e^{+- i pi s / 2}. The two primitive
/// combinations; poles exactly at the Gamma poles s = 0, -1, -2, ...
pub fn g_pm(sign: i8, s: C64) -> Result<C64> {
    debug_assert!(sign == 1 || sign == -1);
    let lg = ln_gamma(s)?;
    let rot = c64(0.0, sign as f64 * std::f64::consts::FRAC_PI_2) * s;
    let expo = lg - s * TWO_PI.ln() + rot;
    if expo.re > 700.0 {
        return Err(Error::RangeUnsupported {
            what: "g_pm",
            detail: format!("overflow at s = {s}"),
        });
    }
    Ok(expo.exp())
}

/// G_0(s) = 2 (2 pi)^{-s} Gamma(s) cos(pi s / 2) = G^+(s) + G^-(s).
pub fn g0(s: C64) -> Result<C64> {
    let lg = ln_gamma(s)?;
    ((lg - s * TWO_PI.ln() + ln_cos_half_pi(s)) + 2.0f64.ln())
        .exp_checked("g0")
}

/// G_1(s) = 2 (2 pi)^{-s} Gamma(s) sin(pi s / 2).
pub fn g1(s: C64) -> Result<C64> {
    let lg = ln_gamma(s)?;
    ((lg - s * TWO_PI.ln() + ln_sin_half_pi(s)) + 2.0f64.ln())
        .exp_checked("g1")
}

trait ExpChecked {
    fn exp_checked(self, what: &'static str) -> Result<C64>;
}

impl ExpChecked for C64 {
    fn exp_checked(self, what: &'static str) -> Result<C64> {
        if self.re > 700.0 {
            return Err(Error::RangeUnsupported {
                what: "exp overflow",
                detail: what.to_string(),
            });
        }
        Ok(self.exp())
    }
}

/// The degree-3 signed gamma-factor product
/// calG^{+-}_mu(s) = (1/2) prod_j G_0(s + mu_j) +- (1/(2i)) prod_j G_1(s + mu_j).
///
/// Computed through logs of the two products with a shared scale so the
/// combination survives heights where each factor alone would underflow.
pub fn cal_g(sign: i8, mu: &MuTriple, s: C64) -> Result<C64> {
    debug_assert!(sign == 1 || sign == -1);
    let mut ln_p0 = c64(2.0f64.ln() * 3.0, 0.0); // three factors of 2
    let mut ln_p1 = ln_p0;
    for &m in &mu.mu {
        let z = s + m;
        let lg = ln_gamma(z)?;
        let base = lg - z * TWO_PI.ln();
        ln_p0 += base + ln_cos_half_pi(z);
        ln_p1 += base + ln_sin_half_pi(z);
    }
    let scale = ln_p0.re.max(ln_p1.re);
    if scale > 700.0 {
        return Err(Error::RangeUnsupported {
            what: "cal_g",
            detail: format!("overflow at s = {s}"),
        });
    }
    let p0 = (ln_p0 - scale).exp();
    let p1 = (ln_p1 - scale).exp();
    let half_over_i = c64(0.0, -0.5); // 1/(2i)
    let combo = p0 * 0.5 + half_over_i * p1 * sign as f64;
    Ok(combo * scale.exp())
}

/// Left side of the scattering composition: the two-term sum
/// sum_{e1 = +-1} e^{e1 i pi n / 2} calG^{-e1}_{-mu}(1 - v + n) calG^{e1 e2}_mu(v).
pub fn scattering_lhs(mu: &MuTriple, v: C64, n: u32, eps2: i8) -> Result<C64> {
    let neg = mu.neg();
    let mut acc = c64(0.0, 0.0);
    for &e1 in &[1i8, -1i8] {
        let phase = (c64(0.0, e1 as f64 * std::f64::consts::FRAC_PI_2) * n as f64).exp();
        let a = cal_g(-e1, &neg, c64(1.0, 0.0) - v + n as f64)?;
        let b = cal_g(e1 * eps2, mu, v)?;
        acc += phase * a * b;
    }
    Ok(acc)
}

/// Closed form of the same composition:
/// ((1 + e2)/2) (2 pi)^{-3n} prod_{k} prod_{j=1}^{n} (v - j + mu_k).
pub fn scattering_closed(mu: &MuTriple, v: C64, n: u32, eps2: i8) -> C64 {
    if eps2 == -1 {
        return c64(0.0, 0.0);
    }
    let mut prod = c64(1.0, 0.0);
    for &m in &mu.mu {
        for j in 1..=n {
            prod *= v - j as f64 + m;
        }
    }
    prod * TWO_PI.powi(-3 * n as i32)
}

/// Closed form of the Barnes-type integral
/// (1/2 pi i) int_(sigma) Gamma(a+s) Gamma(b-s) / (Gamma(c+s) Gamma(d-s)) ds
///   = Gamma(a+b) Gamma(c+d-1-a-b) / (Gamma(c-a) Gamma(d-b) Gamma(c+d-1)),
/// valid for Re(c+d) - 1 > Re(a+b) > 0.
pub fn barnes_ratio_integral(a: C64, b: C64, c: C64, d: C64) -> Result<C64> {
    if (c + d).re - 1.0 <= (a + b).re || (a + b).re <= 0.0 {
        return Err(Error::domain(format!(
            "barnes_ratio_integral: need Re(c+d)-1 > Re(a+b) > 0, got {} vs {}",
            (c + d).re - 1.0,
            (a + b).re
        )));
    }
    let num = gamma(a + b)? * gamma(c + d - a - b - 1.0)?;
    let den = gamma(c - a)? * gamma(d - b)? * gamma(c + d - 1.0)?;
    Ok(num / den)
}

/// Quadrature oracle for the same integral along Re s = sigma (which must
/// separate the pole families: Re b > sigma > -Re a). Vertical-line
/// integration with log-substituted tails; tolerance is absolute.
pub fn barnes_ratio_integral_quadrature(
    a: C64,
    b: C64,
    c: C64,
    d: C64,
    sigma: f64,
    tol: f64,
) -> Result<C64> {
    if !(b.re > sigma && sigma > -a.re) {
        return Err(Error::domain(
            "barnes quadrature: sigma must separate the gamma pole families",
        ));
    }
    let integrand = |s: C64| -> C64 {
        let ln = ln_gamma(a + s).and_then(|l1| {
            Ok(l1 + ln_gamma(b - s)? - ln_gamma(c + s)? - ln_gamma(d - s)?)
        });
        match ln {
            Ok(l) if l.re < 700.0 => l.exp(),
            _ => c64(0.0, 0.0),
        }
    };
    // central strip directly, tails by tau = e^v substitution on a finite
    // log-range. The cap tau <= 1e12 keeps the four log-gamma magnitudes
    // around 1e13, where their f64 cancellation noise perturbs the summed
    // exponent by ~1e-3 at worst; beyond the cap the remainder is bounded
    // by the measured local decay rate.
    let t0 = 10.0 + 2.0 * (a.norm() + b.norm() + c.norm() + d.norm());
    let central = quad::integrate(|t| integrand(c64(sigma, t)), -t0, t0, tol * 0.2)?;
    // the integrand decays like |t|^{-(1+decay)}; the substituted one like e^{-decay v}
    let decay = (c.re + d.re - 1.0 - a.re - b.re).max(0.25);
    let v_cap = (1e12 / t0).ln();
    let mut tails = c64(0.0, 0.0);
    for &dir in &[1.0f64, -1.0] {
        let mut f = |v: f64| {
            let tau = t0 * v.exp();
            integrand(c64(sigma, dir * tau)) * tau
        };
        let q = quad::integrate(&mut f, 0.0, v_cap, tol * 0.2)?;
        let rest = f(v_cap).norm() / decay;
        if rest > tol {
            return Err(Error::Convergence {
                what: "barnes quadrature: tail beyond the log-gamma noise cap",
                achieved: rest,
                wanted: tol,
            });
        }
        tails += q.value;
    }
    // the (1 / 2 pi i) normalization against ds = i dt
    Ok((central.value + tails) / TWO_PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn g_factor_forms_agree() {
        // G0 = G+ + G-, G1 = -i (G+ - G-), and the direct defining formula.
        for &s in &[c64(0.7, 0.3), c64(1.9, -2.0), c64(0.2, 5.0), c64(3.3, -7.7)] {
            let gp = g_pm(1, s).unwrap();
            let gm = g_pm(-1, s).unwrap();
            let g0v = g0(s).unwrap();
            let g1v = g1(s).unwrap();
            assert!(close(gp + gm, g0v, 1e-12), "s={s}");
            assert!(close((gp - gm) * c64(0.0, -1.0), g1v, 1e-12), "s={s}");
            let direct = 2.0 * (-s * TWO_PI.ln()).exp() * gamma(s).unwrap()
                * (s * std::f64::consts::FRAC_PI_2).cos();
            assert!(close(g0v, direct, 1e-11), "s={s}: {g0v} vs {direct}");
        }
    }

    #[test]
    fn g_pm_exponential_asymmetry() {
        // |G^+(sigma + it)| decays like e^{-pi t} for t -> +inf while
        // |G^-| stays polynomial (and vice versa for t -> -inf).
        let s_up = c64(0.5, 18.0);
        let gp = g_pm(1, s_up).unwrap().norm();
        let gm = g_pm(-1, s_up).unwrap().norm();
        assert!(gp < 1e-20 * gm, "gp={gp} gm={gm}");
    }

    #[test]
    fn cal_g_matches_product_form() {
        // calG^{+-} = 4 (2 pi)^{-3s} prod Gamma(s++mu_j) *
        //   (prod cos(pi(s+mu_j)/2) -+ i prod sin(pi(s+mu_j)/2)) ... with
        // the (1/i) convention folded in; verified against the direct form.
        let mu = MuTriple::from_two(c64(0.11, 0.4), c64(-0.2, 0.1)).unwrap();
        for &s in &[c64(0.8, 0.6), c64(1.4, -1.1), c64(0.33, 2.2)] {
            for &sign in &[1i8, -1] {
                let got = cal_g(sign, &mu, s).unwrap();
                let mut pg = c64(1.0, 0.0);
                let mut pc = c64(1.0, 0.0);
                let mut ps = c64(1.0, 0.0);
                for &m in &mu.mu {
                    let z = s + m;
                    pg *= gamma(z).unwrap() * (-z * TWO_PI.ln()).exp();
                    pc *= (z * std::f64::consts::FRAC_PI_2).cos();
                    ps *= (z * std::f64::consts::FRAC_PI_2).sin();
                }
                let combo = pc + c64(0.0, -1.0) * ps * sign as f64;
                let want = 4.0 * pg * combo;
                assert!(close(got, want, 1e-11), "s={s} sign={sign}");
            }
        }
    }

    #[test]
    fn scattering_composition_identity() {
        // The two-term gamma-factor composition collapses to the closed
        // polynomial product; n = 0 gives the scattering-matrix inversion
        // (identity 1 resp. 0).
        let mut rng = crate::arith::seeded_rng(7, 0x73636174, 0);
        for _ in 0..60 {
            let mu = MuTriple::from_two(
                c64(rng.gen_range(-0.2..0.2), rng.gen_range(-0.8..0.8)),
                c64(rng.gen_range(-0.2..0.2), rng.gen_range(-0.8..0.8)),
            )
            .unwrap();
            let v = c64(rng.gen_range(0.3..1.2), rng.gen_range(-0.9..0.9));
            for n in 0..=2u32 {
                for &e2 in &[1i8, -1] {
                    let lhs = scattering_lhs(&mu, v, n, e2).unwrap();
                    let rhs = scattering_closed(&mu, v, n, e2);
                    assert!(
                        (lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0),
                        "n={n} e2={e2} v={v}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn barnes_integral_closed_vs_quadrature() {
        // (1,1,2,2) at sigma = 0 evaluates to 1/2 exactly.
        let one = c64(1.0, 0.0);
        let two = c64(2.0, 0.0);
        let closed = barnes_ratio_integral(one, one, two, two).unwrap();
        assert!(close(closed, c64(0.5, 0.0), 1e-13));
        let q = barnes_ratio_integral_quadrature(one, one, two, two, 0.0, 1e-10).unwrap();
        assert!(close(q, c64(0.5, 0.0), 1e-9), "{q}");

        // generic complex parameters with delta >= 1
        let a = c64(0.9, 0.3);
        let b = c64(1.1, -0.2);
        let c = c64(2.3, 0.5);
        let d = c64(2.0, -0.6);
        let closed = barnes_ratio_integral(a, b, c, d).unwrap();
        let q = barnes_ratio_integral_quadrature(a, b, c, d, 0.1, 1e-10).unwrap();
        assert!(close(q, closed, 1e-8), "{q} vs {closed}");
    }

    #[test]
    fn barnes_precondition_enforced() {
        let one = c64(1.0, 0.0);
        assert!(barnes_ratio_integral(one, one, one, one).is_err());
    }

    #[test]
    fn mu_triple_validation() {
        assert!(MuTriple::new([c64(0.1, 0.0), c64(0.1, 0.0), c64(0.1, 0.0)]).is_err());
        assert!(MuTriple::from_two(c64(0.9, 0.0), c64(0.0, 0.0)).is_err());
        let m = MuTriple::from_two(c64(0.914, 0.0) / 3.0, c64(0.0, 1.0));
        assert!(m.is_ok());
    }
}
