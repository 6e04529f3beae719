//! Transforms between x-space test functions and their spectral data.
//!
//! Contents: Mellin transforms of the three Bessel kernels with an
//! independent quadrature oracle, the spectral synthesis transform (even
//! spectrum integral plus holomorphic completion), the classical inversion
//! pair built from J_a(4 pi x) (4 pi x)^{-b}, its positivity-corrected
//! variant, and a contour transform that twists Mellin data by the degree-3
//! gamma factors, with residue formulas and contour-independence checks.

use crate::error::{Error, Result};
use crate::quad;
use crate::special::bessel::{bessel_j, bessel_k_2it};
use crate::special::gamma::{gamma_ratio, ln_gamma};
use crate::special::kernels;
use crate::special::{cal_g, g_pm, MuTriple};
use crate::{c64, C64};

const PI: f64 = std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * PI;

/// Spectral coordinate paired with the kernel family it belongs to: the
/// even / odd continuous spectrum at parameter t, or the holomorphic
/// discrete spectrum at even weight k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spectral {
    Plus(f64),
    Minus(f64),
    Hol(u32),
}

/// Kernel value J^{kind}(x, .) at x > 0.
pub fn kernel_value(sp: Spectral, x: f64) -> Result<f64> {
    match sp {
        Spectral::Plus(t) => kernels::j_plus(x, t),
        Spectral::Minus(t) => kernels::j_minus(x, t),
        Spectral::Hol(k) => kernels::j_hol(x, k),
    }
}

/// Closed-form Mellin transform of the kernel in x.
pub fn kernel_mellin(sp: Spectral, u: C64) -> Result<C64> {
    match sp {
        Spectral::Plus(t) => kernels::mellin_j_plus(u, t),
        Spectral::Minus(t) => kernels::mellin_j_minus(u, t),
        Spectral::Hol(k) => kernels::mellin_j_hol(u, k),
    }
}

/// Termwise integral int_0^{y0} y^{s-1} J_nu(y) dy from the power series
/// (or I_nu when `modified`), with a cancellation-certified error estimate.
fn series_mellin_piece(nu: C64, s: C64, y0: f64, modified: bool) -> Result<(C64, f64)> {
    let ln_y0 = y0.ln();
    let ln2 = 2.0f64.ln();
    let mut ln_gamma_m = ln_gamma(nu + 1.0)?;
    let mut ln_mfact = 0.0f64;
    let mut sum = c64(0.0, 0.0);
    let mut max_mag = 0.0f64;
    let mut m = 0usize;
    loop {
        let mf = m as f64;
        if m > 0 {
            ln_mfact += mf.ln();
            ln_gamma_m += (nu + mf).ln();
        }
        let expo = (s + nu + 2.0 * mf) * ln_y0 - (nu + 2.0 * mf) * ln2 - ln_gamma_m - ln_mfact;
        let sign = if modified || m % 2 == 0 { 1.0 } else { -1.0 };
        let term = expo.exp() / (s + nu + 2.0 * mf) * sign;
        sum += term;
        max_mag = max_mag.max(term.norm());
        m += 1;
        if m > 6 && term.norm() <= 1e-20 * max_mag {
            break;
        }
        if m > 500 {
            return Err(Error::Convergence {
                what: "kernel mellin series piece: term budget",
                achieved: term.norm(),
                wanted: 1e-20 * max_mag,
            });
        }
    }
    let err = max_mag * 5e-16 * (m as f64).sqrt();
    Ok((sum, err))
}

/// Oscillatory Mellin tail int_{y_big}^inf y^{s-1} J_nu(y) dy by repeated
/// integration by parts through d[y^{mu+1} J_{mu+1}] = y^{mu+1} J_mu dy,
/// which trades a power of y for a shift of the order. Returns the value
/// and a remainder bound.
fn ibp_mellin_tail(nu: C64, s: C64, y_big: f64, steps: usize) -> Result<(C64, f64)> {
    let ln_y = y_big.ln();
    let mut coeff = c64(1.0, 0.0);
    let mut acc = c64(0.0, 0.0);
    for m in 0..steps {
        let mf = m as f64;
        let j = bessel_j(nu + (mf + 1.0), y_big)?;
        let boundary = ((s - mf - 1.0) * ln_y).exp() * j * (-1.0);
        acc += coeff * boundary;
        coeff *= -(s - nu - 2.0 * mf - 2.0);
    }
    let mf = steps as f64;
    if s.re >= mf {
        return Err(Error::domain(
            "ibp_mellin_tail: step count must exceed Re s for the remainder bound",
        ));
    }
    let j_last = bessel_j(nu + mf, y_big)?;
    let sup = 3.0 * j_last.norm().max((2.0 / (PI * y_big)).sqrt());
    let rem = coeff.norm() * sup * ((s.re - mf) * ln_y).exp() / (mf - s.re);
    Ok((acc, rem))
}

/// Quadrature oracle for the kernel Mellin transform, assembled from an
/// exact small-argument series integral, an adaptive middle piece, and an
/// analytic oscillatory (or exponential) tail. Returns value and an error
/// estimate. Valid for 0 < Re u < 1/2 (Plus/Hol) resp. 0 < Re u < 2
/// (Minus); |t| >= 0.05 keeps the sinh denominators tame.
pub fn kernel_mellin_quadrature(sp: Spectral, u: C64, tol: f64) -> Result<(C64, f64)> {
    let y0 = 6.0;
    let y_big = 90.0;
    let ibp_steps = 22usize;
    // the x-integral is (4 pi)^{-u} times the y-integral of the raw kernel
    let rescale = (-u * (4.0 * PI).ln()).exp();
    match sp {
        Spectral::Plus(t) => {
            if t.abs() < 0.05 {
                return Err(Error::domain(
                    "kernel mellin quadrature: Plus oracle needs |t| >= 0.05",
                ));
            }
            if !(u.re > 0.0 && u.re < 0.5) {
                return Err(Error::domain(
                    "kernel mellin quadrature: Plus oracle strip is 0 < Re u < 1/2",
                ));
            }
            let nu = c64(0.0, 2.0 * t);
            let sh = (PI * t).sinh();
            let pref = c64(0.0, PI) / sh;
            let (sp1, e1) = series_mellin_piece(nu, u, y0, false)?;
            let (sp2, e2) = series_mellin_piece(-nu, u, y0, false)?;
            let mid = quad::integrate_fallible(
                |y| {
                    let d = bessel_j(nu, y)? - bessel_j(-nu, y)?;
                    Ok(((u - 1.0) * y.ln()).exp() * d)
                },
                y0,
                y_big,
                tol * 0.3 * sh.abs() / PI,
            )?;
            let (t1, r1) = ibp_mellin_tail(nu, u, y_big, ibp_steps)?;
            let (t2, r2) = ibp_mellin_tail(-nu, u, y_big, ibp_steps)?;
            let total = pref * (sp1 - sp2 + mid.value + t1 - t2);
            let err = pref.norm() * (e1 + e2 + mid.err + r1 + r2);
            Ok((rescale * total, err))
        }
        Spectral::Hol(k) => {
            if k < 2 || k % 2 != 0 {
                return Err(Error::domain("kernel mellin quadrature: even k >= 2"));
            }
            if !(u.re > 0.0 && u.re < 0.5) {
                return Err(Error::domain(
                    "kernel mellin quadrature: Hol oracle strip is 0 < Re u < 1/2",
                ));
            }
            let nu = c64(k as f64 - 1.0, 0.0);
            let sign = if k % 4 == 0 { 1.0 } else { -1.0 };
            let (sp1, e1) = series_mellin_piece(nu, u, y0, false)?;
            let mid = quad::integrate_fallible(
                |y| Ok(((u - 1.0) * y.ln()).exp() * bessel_j(nu, y)?),
                y0,
                y_big,
                tol * 0.1,
            )?;
            let (t1, r1) = ibp_mellin_tail(nu, u, y_big, ibp_steps)?;
            let total = (sp1 + mid.value + t1) * (TWO_PI * sign);
            let err = TWO_PI * (e1 + mid.err + r1);
            Ok((rescale * total, err))
        }
        Spectral::Minus(t) => {
            if t.abs() < 0.05 {
                return Err(Error::domain(
                    "kernel mellin quadrature: Minus oracle needs |t| >= 0.05",
                ));
            }
            if !(u.re > 0.0 && u.re < 2.0) {
                return Err(Error::domain(
                    "kernel mellin quadrature: Minus oracle strip is 0 < Re u < 2",
                ));
            }
            let nu = c64(0.0, 2.0 * t);
            // K_{2it} = pi (I_{-2it} - I_{2it}) / (2 i sinh(2 pi t))
            let ch = (PI * t).cosh();
            let pref = c64(0.0, -2.0) * PI * ch / (TWO_PI * t).sinh();
            let (si1, e1) = series_mellin_piece(-nu, u, y0, true)?;
            let (si2, e2) = series_mellin_piece(nu, u, y0, true)?;
            let y_end = 45.0;
            let mid = quad::integrate_fallible(
                |y| {
                    let kv = bessel_k_2it(t, y)?;
                    Ok(((u - 1.0) * y.ln()).exp() * (4.0 * ch * kv))
                },
                y0,
                y_end,
                tol * 0.1,
            )?;
            // |K_{2it}(y)| <= sqrt(pi/2y) e^{-y} for y past the turning point
            let tail_bound =
                4.0 * ch * (PI / (2.0 * y_end)).sqrt() * (-y_end).exp() * 2.0
                    * ((u.re - 1.0) * y_end.ln()).exp();
            let small = pref * (si1 - si2);
            let total = small + mid.value;
            let err = pref.norm() * (e1 + e2) + mid.err + tail_bound;
            Ok((rescale * total, err))
        }
    }
}

/// The closed inversion test pair built on H(x) = i^{b-a} J_a(4 pi x)
/// (4 pi x)^{-b}, with its even-spectrum and holomorphic-spectrum closed
/// transforms. Requires 3 < b < a with a = b mod 2, which makes all three
/// closed forms real and the spectral side positive.
#[derive(Debug, Clone, Copy)]
pub struct BesselTestPair {
    pub a: u32,
    pub b: u32,
}

impl BesselTestPair {
    pub fn new(a: u32, b: u32) -> Result<Self> {
        if !(3 < b && b < a && (a - b) % 2 == 0) {
            return Err(Error::domain(format!(
                "test pair needs 3 < b < a, a = b mod 2; got a = {a}, b = {b}"
            )));
        }
        Ok(BesselTestPair { a, b })
    }

    /// i^{b-a} for even a-b.
    fn front_sign(&self) -> f64 {
        if ((self.a - self.b) / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// b! / 2^b as f64 (fine through b ~ 30).
    fn weight(&self) -> f64 {
        (1..=self.b).map(|j| j as f64 / 2.0).product::<f64>()
    }

    /// H(x) itself.
    pub fn target(&self, x: f64) -> Result<f64> {
        let y = 4.0 * PI * x;
        let j = bessel_j(c64(self.a as f64, 0.0), y)?;
        Ok(self.front_sign() * j.re * y.powi(-(self.b as i32)))
    }

    /// Even-spectrum transform: (b!/2^b) prod_{j=0}^{b} (t^2 + ((a+b)/2 - j)^2)^{-1}.
    pub fn spectral_side(&self, t: f64) -> f64 {
        self.spectral_side_c(c64(t, 0.0)).re
    }

    /// Analytic continuation of `spectral_side` for shifted contours.
    pub fn spectral_side_c(&self, t: C64) -> C64 {
        let mut denom = c64(1.0, 0.0);
        let half = (self.a + self.b) as f64 / 2.0;
        for j in 0..=self.b {
            let cj = half - j as f64;
            denom *= t * t + cj * cj;
        }
        c64(self.weight(), 0.0) / denom
    }

    /// Holomorphic-spectrum transform at even weight k: the same product
    /// with t^2 replaced by ((1-k) i / 2)^2 = -((k-1)/2)^2.
    pub fn holomorphic_side(&self, k: u32) -> f64 {
        let (sign, ln) = self.holomorphic_side_ln(k);
        sign * ln.exp()
    }

    /// Sign and log-magnitude of the holomorphic side, stable for large
    /// (a, b) where the plain product would over/underflow.
    pub fn holomorphic_side_ln(&self, k: u32) -> (f64, f64) {
        let half = (self.a + self.b) as f64 / 2.0;
        let kk = (k as f64 - 1.0) / 2.0;
        let mut sign = 1.0f64;
        let mut ln = 0.0f64;
        for j in 1..=self.b {
            ln -= (j as f64 / 2.0).ln();
        }
        ln = -ln; // ln(b!/2^b)
        for j in 0..=self.b {
            let cj = half - j as f64;
            let f = cj * cj - kk * kk;
            if f < 0.0 {
                sign = -sign;
            }
            ln -= f.abs().ln();
        }
        (sign, ln)
    }

    /// Mellin transform of H:
    /// i^{b-a} 2^{-b-1} (2 pi)^{-u} Gamma((a+u-b)/2) / Gamma((2+a+b-u)/2).
    pub fn mellin(&self, u: C64) -> Result<C64> {
        let a = self.a as f64;
        let b = self.b as f64;
        let ratio = gamma_ratio((u + (a - b)) / 2.0, (c64(2.0 + a + b, 0.0) - u) / 2.0)?;
        let scale = (-u * TWO_PI.ln()).exp() * 2.0f64.powi(-(self.b as i32) - 1);
        Ok(ratio * scale * self.front_sign())
    }

    /// Smallest constant c such that adding c k^{-2b-1} for k > a - b makes
    /// the holomorphic side nonnegative, inflated by 1e-9 relative margin.
    pub fn pos_constant(&self) -> f64 {
        let (ln, negative_seen) = self.pos_constant_ln();
        if !negative_seen {
            return 0.0;
        }
        ln.exp()
    }

    /// Log-space version of `pos_constant` (for large a, b the constant
    /// itself overflows f64). Also reports whether any negative value was
    /// seen at all.
    pub fn pos_constant_ln(&self) -> (f64, bool) {
        let start = self.a - self.b + 2;
        let mut best = f64::NEG_INFINITY;
        let mut seen = false;
        let mut prev = f64::INFINITY;
        let mut rising = 0usize;
        // |hol(k)| k^{2b+1} ~ const / k eventually decreases, so a bounded
        // scan with a monotone-tail confirmation covers all k.
        let k_end = 8 * (self.a + self.b) + 400;
        let mut k = start;
        while k <= k_end {
            let (sign, ln_abs) = self.holomorphic_side_ln(k);
            let score = ln_abs + (2.0 * self.b as f64 + 1.0) * (k as f64).ln();
            if sign < 0.0 {
                seen = true;
                if score > best {
                    best = score;
                }
            }
            if k > k_end - 100 {
                if score >= prev {
                    rising += 1;
                }
                prev = score;
            }
            k += 2;
        }
        debug_assert_eq!(rising, 0, "pos_constant scan tail must be decreasing");
        (best + 1e-9f64.ln_1p(), seen)
    }

    /// Holomorphic side with the positivity correction applied above the
    /// crossover weight a - b.
    pub fn holomorphic_side_pos(&self, k: u32) -> f64 {
        let base = self.holomorphic_side(k);
        if k as i64 > (self.a - self.b) as i64 {
            base + self.pos_constant() * (k as f64).powi(-(2 * self.b as i32) - 1)
        } else {
            base
        }
    }
}

/// Truncation height for the even-spectrum integral; the closed pairs decay
/// like t^{-2b-2} with b > 3, so the tail beyond is far below every
/// tolerance used here.
const SYNTH_T_MAX: f64 = 40.0;
/// Holomorphic completion cut; terms decay like k^{-2b-2}.
const SYNTH_K_MAX: u32 = 80;

/// Even-spectrum synthesis: (1/2 pi^2) int_R J^+(x, t) h(t) t tanh(pi t) dt
/// for the closed pair's h, using evenness to fold onto [0, T].
pub fn spectral_synthesis(pair: &BesselTestPair, x: f64, tol: f64) -> Result<f64> {
    let q = quad::integrate_fallible(
        |t| {
            let k = kernels::j_plus(x, t)?;
            Ok(c64(
                k * pair.spectral_side(t) * t * (PI * t).tanh(),
                0.0,
            ))
        },
        0.0,
        SYNTH_T_MAX,
        tol,
    )?;
    Ok(q.value.re / (PI * PI))
}

/// Same integral moved to the line Im t = delta (legal for |delta| < 1/2:
/// the tanh poles sit at +-i/2, the pair poles at +-i(a-b)/2). Exercises
/// the contour flexibility; the value must match `spectral_synthesis`.
pub fn spectral_synthesis_shifted(
    pair: &BesselTestPair,
    x: f64,
    delta: f64,
    tol: f64,
) -> Result<f64> {
    if delta.abs() >= 0.5 {
        return Err(Error::domain("synthesis shift must stay inside |Im t| < 1/2"));
    }
    let f = |tau: f64| -> Result<C64> {
        let t = c64(tau, delta);
        let k = kernels::j_plus_c(x, t)?;
        let th = (PI * t).tanh();
        Ok(k * pair.spectral_side_c(t) * t * th)
    };
    let q = quad::integrate_fallible(f, -SYNTH_T_MAX, SYNTH_T_MAX, tol)?;
    Ok(q.value.re / (2.0 * PI * PI))
}

/// Holomorphic completion sum: sum over even k of i^{-k} ((k-1)/pi)
/// h^hol(k) J_{k-1}(4 pi x), with `h_hol` supplied so the positivity
/// variant can reuse it.
fn holomorphic_completion<H: Fn(u32) -> f64>(x: f64, h_hol: H) -> Result<f64> {
    let y = 4.0 * PI * x;
    let mut acc = 0.0;
    let mut k = 2u32;
    while k <= SYNTH_K_MAX {
        let sign = if k % 4 == 0 { 1.0 } else { -1.0 }; // i^{-k}, k even
        let j = bessel_j(c64(k as f64 - 1.0, 0.0), y)?;
        acc += sign * (k as f64 - 1.0) / PI * h_hol(k) * j.re;
        k += 2;
    }
    Ok(acc)
}

/// Full synthesis: continuous part plus holomorphic completion.
pub fn full_synthesis(pair: &BesselTestPair, x: f64, tol: f64) -> Result<f64> {
    Ok(spectral_synthesis(pair, x, tol)? + holomorphic_completion(x, |k| pair.holomorphic_side(k))?)
}

/// Inversion residual |K*(h, h^hol) - H|(x): zero in exact arithmetic by
/// the classical inversion theorem for this pair family.
pub fn inversion_residual(pair: &BesselTestPair, x: f64, tol: f64) -> Result<f64> {
    let lhs = full_synthesis(pair, x, tol)?;
    let rhs = pair.target(x)?;
    Ok((lhs - rhs).abs())
}

/// Residual of the positivity-corrected identity: synthesizing
/// (h, h^hol_pos) must produce H plus the correction series, each
/// correction term carrying the same i^{-k} (k-1)/pi weight the
/// completion sum attaches to every discrete-spectrum term.
pub fn pos_identity_residual(pair: &BesselTestPair, x: f64, tol: f64) -> Result<f64> {
    let lhs = spectral_synthesis(pair, x, tol)?
        + holomorphic_completion(x, |k| pair.holomorphic_side_pos(k))?;
    let c = pair.pos_constant();
    let y = 4.0 * PI * x;
    let mut corr = 0.0;
    let mut k = pair.a - pair.b + 2;
    while k <= SYNTH_K_MAX {
        let sign = if k % 4 == 0 { 1.0 } else { -1.0 };
        let j = bessel_j(c64(k as f64 - 1.0, 0.0), y)?;
        corr += sign * (k as f64 - 1.0) / PI
            * c
            * (k as f64).powi(-(2 * pair.b as i32) - 1)
            * j.re;
        k += 2;
    }
    let rhs = pair.target(x)? + corr;
    Ok((lhs - rhs).abs())
}

/// Quadrature oracle for the closed spectral sides: projects H back through
/// the kernel, int_0^inf J^{kind}(x, .) H(x) dx / x. Tolerance is absolute.
pub fn spectral_projection_quadrature(
    sp: Spectral,
    pair: &BesselTestPair,
    tol: f64,
) -> Result<(C64, f64)> {
    // small-x cut: |H(x)| <= (2 pi x)^a / a! (4 pi x)^{-b} and the kernels
    // are bounded near 0 by a modest constant at fixed spectral point
    let x_lo = 5e-3;
    let x_hi = match sp {
        Spectral::Minus(_) => 4.0,
        _ => 45.0,
    };
    let q = quad::integrate_fallible(
        |x| {
            let k = kernel_value(sp, x)?;
            Ok(c64(k * pair.target(x)? / x, 0.0))
        },
        x_lo,
        x_hi,
        tol * 0.5,
    )?;
    // crude but sufficient bounds for both cut-offs
    let lo_bound = {
        let y = 4.0 * PI * x_lo;
        let a = pair.a as f64;
        // first series term of J_a at the cut, kernels bounded by ~10 here
        let ln = a * (y / 2.0).ln() - ln_gamma(c64(a + 1.0, 0.0))?.re;
        10.0 * ln.exp() * y.powi(-(pair.b as i32)) / (pair.a - pair.b) as f64
    };
    let hi_bound = match sp {
        Spectral::Minus(t) => {
            4.0 * (PI * t).cosh() * (-4.0 * PI * x_hi).exp()
        }
        _ => {
            // |H| ~ (4 pi x)^{-b-1/2}, kernels O(1): integrand x^{-b-3/2}
            let b = pair.b as f64;
            3.0 * (4.0 * PI * x_hi).powf(-b - 0.5) / ((b + 0.5) * x_hi.powf(b + 0.5) * 0.5)
        }
    };
    Ok((q.value, q.err + lo_bound + hi_bound))
}

/// Parameters of the gamma-factor contour twist: the two Mellin-side
/// variables (s, w), the auxiliary shift u, and the spectral triple.
#[derive(Debug, Clone)]
pub struct TwistPoint {
    pub s: C64,
    pub w: C64,
    pub u: C64,
    pub mu: MuTriple,
}

impl TwistPoint {
    fn v(&self) -> C64 {
        self.s + self.u / 2.0
    }

    fn mellin_arg(&self, xi: C64) -> C64 {
        self.s * 3.0 - self.w - 1.0 + self.u + xi * 2.0
    }
}

/// Integration path for the twist: either the hooked contour that dips
/// right of the origin (vertical tails at Re = -3/5, middle polyline
/// through 1/10), or a straight vertical line.
#[derive(Debug, Clone, Copy)]
pub enum TwistContour {
    Hooked,
    Vertical(f64),
}

fn twist_integrand(sign: i8, pt: &TwistPoint, pair: &BesselTestPair, xi: C64) -> Result<C64> {
    let v = pt.v();
    let neg = pt.mu.neg();
    let arg = c64(1.0, 0.0) - v - xi;
    let t1 = g_pm(1, xi)? * cal_g(-1, &neg, arg)? * cal_g(-sign, &pt.mu, v)?;
    let t2 = g_pm(-1, xi)? * cal_g(1, &neg, arg)? * cal_g(sign, &pt.mu, v)?;
    Ok(pair.mellin(pt.mellin_arg(xi))? * (t1 + t2))
}

/// The twist transform: (1/2 pi i) times the contour integral of the
/// twisted Mellin data. `sign` selects which of the two sign variants of
/// the gamma-factor pairing is used.
pub fn scattering_twist(
    sign: i8,
    pt: &TwistPoint,
    pair: &BesselTestPair,
    contour: TwistContour,
    tol: f64,
) -> Result<C64> {
    let f = |xi: C64| twist_integrand(sign, pt, pair, xi);
    let total = match contour {
        TwistContour::Hooked => {
            let lo = c64(-0.6, -1.0);
            let mid = c64(0.1, 0.0);
            let hi = c64(-0.6, 1.0);
            let middle = quad::integrate_polyline_fallible(f, &[lo, mid, hi], tol * 0.4)?;
            let i = c64(0.0, 1.0);
            let down = quad::integrate_semi_infinite_fallible(
                |vv| f(c64(-0.6, -1.0 - vv)),
                0.0,
                0.8,
                1.25,
                tol * 0.3,
                200,
            )?;
            let up = quad::integrate_semi_infinite_fallible(
                |vv| f(c64(-0.6, 1.0 + vv)),
                0.0,
                0.8,
                1.25,
                tol * 0.3,
                200,
            )?;
            middle.value + i * (down.value + up.value)
        }
        TwistContour::Vertical(cline) => {
            let i = c64(0.0, 1.0);
            let central = quad::integrate_fallible(
                |y| f(c64(cline, y)),
                -2.0,
                2.0,
                tol * 0.4,
            )?;
            let down = quad::integrate_semi_infinite_fallible(
                |vv| f(c64(cline, -2.0 - vv)),
                0.0,
                0.8,
                1.25,
                tol * 0.3,
                200,
            )?;
            let up = quad::integrate_semi_infinite_fallible(
                |vv| f(c64(cline, 2.0 + vv)),
                0.0,
                0.8,
                1.25,
                tol * 0.3,
                200,
            )?;
            i * (central.value + down.value + up.value)
        }
    };
    Ok(total / c64(0.0, TWO_PI))
}

/// Closed form of the residue picked up at xi = -n when sliding the
/// contour: zero for the + variant; for the - variant
/// Hhat(3s - w - 1 + u - 2n) (2 pi)^{-2n} (n!)^{-1}
///   prod_{j=1..n} prod_k (s + u/2 + mu_k - j).
pub fn twist_residue_closed(
    sign: i8,
    pt: &TwistPoint,
    pair: &BesselTestPair,
    n: u32,
) -> Result<C64> {
    if sign > 0 {
        return Ok(c64(0.0, 0.0));
    }
    let v = pt.v();
    let mut prod = c64(1.0, 0.0);
    for &m in &pt.mu.mu {
        for j in 1..=n {
            prod *= v + m - j as f64;
        }
    }
    let mut fact = 1.0f64;
    for j in 1..=n {
        fact *= j as f64;
    }
    let h = pair.mellin(pt.mellin_arg(c64(-(n as f64), 0.0)))?;
    Ok(h * prod * TWO_PI.powi(-2 * n as i32) / fact)
}

/// Residue oracle: mean-value circle integral of the twist integrand
/// around xi = -n (radius small enough to enclose only the gamma pole).
pub fn twist_residue_quadrature(
    sign: i8,
    pt: &TwistPoint,
    pair: &BesselTestPair,
    n: u32,
) -> Result<C64> {
    let center = c64(-(n as f64), 0.0);
    let r = 0.3;
    let nodes = 64usize;
    let mut acc = c64(0.0, 0.0);
    for k in 0..nodes {
        let th = TWO_PI * (k as f64 + 0.5) / nodes as f64;
        let e = c64(th.cos(), th.sin());
        acc += twist_integrand(sign, pt, pair, center + e * r)? * e;
    }
    Ok(acc * r / nodes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_point() -> TwistPoint {
        TwistPoint {
            s: c64(0.7, 0.3),
            w: c64(1.2, -0.2),
            u: c64(0.5, -0.3),
            mu: MuTriple::from_two(c64(0.11, 0.4), c64(-0.2, 0.1)).unwrap(),
        }
    }

    #[test]
    fn kernel_mellin_closed_vs_quadrature() {
        let cases = [
            (Spectral::Plus(0.8), c64(0.35, 0.4)),
            (Spectral::Plus(2.2), c64(0.2, -1.0)),
            (Spectral::Minus(0.6), c64(0.4, 0.7)),
            (Spectral::Minus(1.5), c64(1.2, -0.5)),
            (Spectral::Hol(6), c64(0.3, 0.5)),
            (Spectral::Hol(12), c64(0.42, -0.8)),
        ];
        for &(sp, u) in &cases {
            let closed = kernel_mellin(sp, u).unwrap();
            let (quadr, est) = kernel_mellin_quadrature(sp, u, 1e-10).unwrap();
            let diff = (closed - quadr).norm();
            assert!(
                diff <= 1e-8 * closed.norm().max(1.0),
                "{sp:?} u={u}: closed {closed} vs quad {quadr} (diff {diff:.2e}, est {est:.2e})"
            );
        }
    }

    #[test]
    fn pair_validation_and_shapes() {
        assert!(BesselTestPair::new(10, 4).is_ok());
        assert!(BesselTestPair::new(4, 10).is_err());
        assert!(BesselTestPair::new(11, 4).is_err());
        assert!(BesselTestPair::new(5, 4).is_err());
        let p = BesselTestPair::new(10, 4).unwrap();
        // spectral side positive and even, holomorphic side positive below
        // the crossover
        assert!(p.spectral_side(1.3) > 0.0);
        assert!((p.spectral_side(1.3) - p.spectral_side(-1.3)).abs() < 1e-18);
        assert!(p.holomorphic_side(2) > 0.0);
        assert!(p.holomorphic_side(4) > 0.0);
        // log form agrees with the direct product
        let (sign, ln) = p.holomorphic_side_ln(18);
        assert!((sign * ln.exp() - p.holomorphic_side(18)).abs() < 1e-15);
    }

    #[test]
    fn pos_correction_makes_holomorphic_side_nonnegative() {
        for &(a, b) in &[(10u32, 4u32), (12, 6)] {
            let p = BesselTestPair::new(a, b).unwrap();
            let c = p.pos_constant();
            assert!(c > 0.0, "correction must be active for ({a},{b})");
            let mut k = 2;
            while k <= 400 {
                assert!(
                    p.holomorphic_side_pos(k) >= 0.0,
                    "({a},{b}) k={k}: {}",
                    p.holomorphic_side_pos(k)
                );
                k += 2;
            }
        }
    }

    #[test]
    fn pos_constant_log_form_handles_huge_pairs() {
        // (1000, 400) overflows any direct product; the log form must still
        // classify signs and produce a finite log-constant.
        let p = BesselTestPair::new(1000, 400).unwrap();
        let (ln_c, seen) = p.pos_constant_ln();
        assert!(seen, "sign dips must exist above the crossover");
        assert!(ln_c.is_finite());
        let (sign_lo, _) = p.holomorphic_side_ln(600);
        assert!(sign_lo > 0.0, "below crossover everything is positive");
    }

    #[test]
    fn mellin_of_target_matches_quadrature() {
        // settles the overall constant: i^{b-a} 2^{-b-1} (2 pi)^{-u} ratio
        let p = BesselTestPair::new(10, 4).unwrap();
        for &u in &[c64(0.8, 0.3), c64(1.1, -0.6)] {
            let closed = p.mellin(u).unwrap();
            // y-integral of y^{(u-b)-1} J_a(y), rescaled by (4 pi)^{-u} and
            // the front sign
            let s = u - p.b as f64;
            let (small, e1) = series_mellin_piece(c64(p.a as f64, 0.0), s, 6.0, false).unwrap();
            let mid = quad::integrate_fallible(
                |y| Ok(((s - 1.0) * y.ln()).exp() * bessel_j(c64(p.a as f64, 0.0), y)?),
                6.0,
                60.0,
                1e-12,
            )
            .unwrap();
            let (tail, e2) = ibp_mellin_tail(c64(p.a as f64, 0.0), s, 60.0, 12).unwrap();
            let quadr = (small + mid.value + tail)
                * (-u * (4.0 * PI).ln()).exp()
                * p.front_sign();
            assert!(
                (closed - quadr).norm() <= 1e-9 * closed.norm().max(1e-12) + (e1 + e2) * 2.0,
                "u={u}: {closed} vs {quadr}"
            );
        }
    }

    #[test]
    fn inversion_recovers_target() {
        let p = BesselTestPair::new(10, 4).unwrap();
        let r = inversion_residual(&p, 0.5, 1e-9).unwrap();
        assert!(r < 1e-7, "residual {r}");
    }

    #[test]
    fn synthesis_contour_shift_is_neutral() {
        let p = BesselTestPair::new(10, 4).unwrap();
        let x = 0.4;
        let plain = spectral_synthesis(&p, x, 1e-10).unwrap();
        let shifted = spectral_synthesis_shifted(&p, x, 0.375, 1e-10).unwrap();
        assert!(
            (plain - shifted).abs() < 1e-8 * plain.abs().max(1.0),
            "{plain} vs {shifted}"
        );
    }

    #[test]
    fn pos_identity_holds() {
        let p = BesselTestPair::new(10, 4).unwrap();
        let r = pos_identity_residual(&p, 0.7, 1e-9).unwrap();
        assert!(r < 1e-7, "residual {r}");
    }

    #[test]
    fn projection_recovers_spectral_sides() {
        let p = BesselTestPair::new(10, 4).unwrap();
        for &(sp, want) in &[
            (Spectral::Plus(1.1), p.spectral_side(1.1)),
            (Spectral::Minus(0.7), 0.0),
            (Spectral::Hol(14), p.holomorphic_side(14)),
        ] {
            let (got, est) = spectral_projection_quadrature(sp, &p, 1e-8).unwrap();
            assert!(
                (got.re - want).abs() <= 1e-5 + 3.0 * est && got.im.abs() < 1e-9,
                "{sp:?}: {got} vs {want} (est {est:.2e})"
            );
        }
    }

    #[test]
    fn twist_plus_is_contour_independent() {
        let pt = test_point();
        let pair = BesselTestPair::new(10, 4).unwrap();
        let hooked = scattering_twist(1, &pt, &pair, TwistContour::Hooked, 1e-10).unwrap();
        let line = scattering_twist(1, &pt, &pair, TwistContour::Vertical(-0.6), 1e-10).unwrap();
        assert!(
            (hooked - line).norm() < 1e-9 * hooked.norm().max(1e-3),
            "{hooked} vs {line}"
        );
    }

    #[test]
    fn twist_minus_contour_difference_is_first_residue() {
        // Hook minus vertical line encloses exactly the origin pole
        // counterclockwise, so the difference equals the n = 0 residue,
        // which the closed formula says is Hhat(3s - w - 1 + u).
        let pt = test_point();
        let pair = BesselTestPair::new(10, 4).unwrap();
        let hooked = scattering_twist(-1, &pt, &pair, TwistContour::Hooked, 1e-10).unwrap();
        let line = scattering_twist(-1, &pt, &pair, TwistContour::Vertical(-0.6), 1e-10).unwrap();
        let res0 = twist_residue_closed(-1, &pt, &pair, 0).unwrap();
        assert!(
            (hooked - line - res0).norm() < 1e-9 * res0.norm().max(1e-3),
            "difference {} vs residue {res0}",
            hooked - line
        );
    }

    #[test]
    fn twist_residues_match_circle_oracle() {
        let pt = test_point();
        let pair = BesselTestPair::new(10, 4).unwrap();
        for n in 1..=2u32 {
            let closed = twist_residue_closed(-1, &pt, &pair, n).unwrap();
            let circle = twist_residue_quadrature(-1, &pt, &pair, n).unwrap();
            assert!(
                (closed - circle).norm() < 1e-10 * closed.norm().max(1e-6),
                "n={n}: closed {closed} vs circle {circle}"
            );
            // the + variant's residues vanish identically
            let plus = twist_residue_quadrature(1, &pt, &pair, n).unwrap();
            assert!(plus.norm() < 1e-12, "n={n}: plus residue {plus}");
        }
    }
}
