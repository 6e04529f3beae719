//! Spectral summation formulas checked on classical holomorphic data. The
//! rank-one space of weight 12 at level 1 makes the Petersson formula fully
//! computable from scratch: the discriminant-form coefficients come from an
//! exact integer product expansion, the Kloosterman side from direct
//! character sums with a certified Bessel tail, and the two must agree
//! through the rank-one factorization of the right-hand side. The module
//! also evaluates the explicit continuous-spectrum Fourier coefficients and
//! the diagonal main-term functional of a combined test-function pair.

use crate::arith::{divisors, factorize, gcd, kloosterman, moebius};
use crate::error::{Error, Result};
use crate::euler_local::{ntilde_sq, nu_factor, EisPoint};
use crate::quad;
use crate::series::{ipow_neg, zeta};
use crate::special::bessel::JMarcher;
use crate::{c64, C64};

/// Integer q-expansion of a holomorphic cusp form, 1-indexed, with the
/// arithmetic normalization lambda(n) = a(n) / n^{(weight - 1)/2}.
#[derive(Debug, Clone)]
pub struct QExpansion {
    coeffs: Vec<i128>,
    weight: u32,
}

impl QExpansion {
    /// The exact integer coefficient a(n); zero outside the stored range.
    pub fn coeff(&self, n: u64) -> i128 {
        if n == 0 || n as usize > self.coeffs.len() {
            0
        } else {
            self.coeffs[n as usize - 1]
        }
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Normalized Hecke eigenvalue lambda(n) = a(n) / n^{(k-1)/2}.
    pub fn lambda(&self, n: u64) -> f64 {
        let e = (self.weight as f64 - 1.0) / 2.0;
        self.coeff(n) as f64 / (n as f64).powf(e)
    }
}

/// Coefficients tau(1..=n_max) of the weight-12 discriminant form, computed
/// with exact integer arithmetic as q prod (1 - q^j)^24: the cube of the
/// eta-product is the sparse signed-triangular-number series, and seven
/// further multiplications by that series give the 24th power. tau(n)
/// stays below 10^28 for n <= 10^5, well inside i128.
pub fn delta_coeffs(n_max: usize) -> Result<QExpansion> {
    if n_max == 0 || n_max > 100_000 {
        return Err(Error::domain(format!(
            "delta_coeffs: need 1 <= n_max <= 100000, got {n_max}"
        )));
    }
    // (sum_k (-1)^k (2k+1) q^{k(k+1)/2})^8, truncated at degree n_max - 1.
    let deg = n_max - 1;
    let mut sparse: Vec<(usize, i128)> = Vec::new();
    let mut k = 0usize;
    loop {
        let t = k * (k + 1) / 2;
        if t > deg {
            break;
        }
        let c = (2 * k + 1) as i128;
        sparse.push((t, if k % 2 == 0 { c } else { -c }));
        k += 1;
    }
    let mut acc = vec![0i128; deg + 1];
    for &(t, c) in &sparse {
        acc[t] = c;
    }
    for _ in 0..7 {
        let mut next = vec![0i128; deg + 1];
        for (i, &a) in acc.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for &(t, c) in &sparse {
                if i + t > deg {
                    break;
                }
                next[i + t] += a * c;
            }
        }
        acc = next;
    }
    Ok(QExpansion {
        coeffs: acc,
        weight: 12,
    })
}

/// Right-hand side of the holomorphic spectral summation formula at even
/// weight k0 and level q:
/// (k0-1)/(2 pi^2) (delta_{n,m} + 2 pi i^{-k0} sum_{q | c <= c_cap}
/// S(m,n,c)/c J_{k0-1}(4 pi sqrt(mn)/c)).
/// The dropped tail is certified below 1e-12 through the trivial
/// |S(m,n,c)| <= c together with |J_{k-1}(x)| <= (x/2)^{k-1}/(k-1)!;
/// if the bound cannot be certified at this cap the call fails rather
/// than returning an uncertified number.
pub fn petersson_rhs(n: u64, m: u64, k0: u32, q: u64, c_cap: u64) -> Result<f64> {
    if n == 0 || m == 0 || q == 0 || k0 < 4 || k0 % 2 != 0 {
        return Err(Error::domain(format!(
            "petersson_rhs: need n, m, q >= 1 and even k0 >= 4, got ({n}, {m}, {k0}, {q})"
        )));
    }
    let root = (n as f64 * m as f64).sqrt();
    // sum_{c > cap} (2 pi sqrt(mn) / c)^{k-1} / (k-1)!
    //   <= (2 pi sqrt(mn))^{k-1} / (k-1)! * cap^{-(k-2)} / (k-2).
    let km1 = (k0 - 1) as f64;
    let mut ln_fact = 0.0;
    for j in 2..k0 {
        ln_fact += (j as f64).ln();
    }
    let ln_tail = km1 * (2.0 * std::f64::consts::PI * root).ln()
        - ln_fact
        - (km1 - 1.0) * (c_cap as f64).ln()
        - (km1 - 1.0).ln();
    let tail = ln_tail.exp();
    if !(tail < 1e-12) {
        return Err(Error::Convergence {
            what: "petersson kloosterman-bessel tail",
            achieved: tail,
            wanted: 1e-12,
        });
    }
    // March the Bessel order upward in argument, so iterate c downward.
    let mut marcher: Option<JMarcher> = None;
    let mut csum = 0.0f64;
    let mut c = c_cap - c_cap % q;
    while c >= q {
        let x = 4.0 * std::f64::consts::PI * root / c as f64;
        let j = match marcher {
            Some(ref mut mm) => mm.eval(x)?,
            None => {
                let mut mm = JMarcher::new(c64(km1, 0.0), x)?;
                let v = mm.eval(x)?;
                marcher = Some(mm);
                v
            }
        };
        csum += kloosterman(m as i64, n as i64, c)? / c as f64 * j.re;
        c -= q;
    }
    let sign = if k0 % 4 == 0 { 1.0 } else { -1.0 };
    let diag = if n == m { 1.0 } else { 0.0 };
    Ok((k0 as f64 - 1.0) / (2.0 * std::f64::consts::PI * std::f64::consts::PI)
        * (diag + 2.0 * std::f64::consts::PI * sign * csum))
}

/// Largest residual of the rank-one factorization
/// RHS(n,m) RHS(1,1) - RHS(n,1) RHS(1,m) over 1 <= n, m <= n_max, together
/// with the diagonal value RHS(1,1). A one-dimensional space forces the
/// spectral side to be a rank-one matrix, so the residual is a pure
/// consistency measure of the Kloosterman/Bessel evaluation chain.
pub fn rank_one_residual(k0: u32, q: u64, n_max: u64, c_cap: u64) -> Result<(f64, f64)> {
    let mut vals = vec![vec![0.0f64; n_max as usize]; n_max as usize];
    for n in 1..=n_max {
        for m in n..=n_max {
            let v = petersson_rhs(n, m, k0, q, c_cap)?;
            vals[n as usize - 1][m as usize - 1] = v;
            vals[m as usize - 1][n as usize - 1] = v;
        }
    }
    let base = vals[0][0];
    let mut worst = 0.0f64;
    for n in 0..n_max as usize {
        for m in 0..n_max as usize {
            let res = (vals[n][m] * base - vals[n][0] * vals[0][m]).abs();
            worst = worst.max(res);
        }
    }
    Ok((worst, base))
}

/// Continuous-spectrum Fourier coefficient rho(n, t) at ladder step m_lad
/// inside level big_n, for n >= 1, with the unimodular constant fixed to 1:
/// |n|^it / ((N nu(N))^{1/2} ntilde(M) L^{(N)}(1 + 2it, chi^2))
///   * (M1 / M2)^{1/2} sum_{delta | M2} delta mu(M2/delta) chi(delta)
///   * sum_{c M1 delta f = n, (c, N/M) = 1} chi(c) c^{-2it} chi(f).
/// The square of a real character is principal, so the L-factor collapses
/// to zeta(1 + 2it) times the finite Euler-factor removal over p | N.
pub fn eisenstein_rho(point: &EisPoint, m_lad: u64, big_n: u64, n: u64) -> Result<C64> {
    let d0 = point.chi.conductor();
    if m_lad == 0 || big_n == 0 || m_lad % (d0 * d0) != 0 || big_n % m_lad != 0 {
        return Err(Error::domain(format!(
            "eisenstein_rho: need conductor^2 | M | N, got conductor = {d0}, M = {m_lad}, N = {big_n}"
        )));
    }
    if n == 0 {
        return Err(Error::domain("eisenstein_rho: need n >= 1"));
    }
    if point.t.abs() < 1e-6 {
        return Err(Error::NearPole {
            what: "eisenstein_rho",
            location: "t = 0 (edge L-value pole)".into(),
            distance: point.t.abs(),
        });
    }
    // M = d0 * M1 * M2 with M1 supported on the conductor primes and M2
    // coprime to them.
    let mut m1 = 1u64;
    for (p, e) in factorize(m_lad) {
        if d0 % p == 0 {
            m1 *= p.pow(e - vp(d0, p));
        }
    }
    let m2 = m_lad / (d0 * m1);
    let it = c64(0.0, point.t);
    let mut edge = zeta(1.0 + 2.0 * it)?;
    for (p, _) in factorize(big_n) {
        edge *= 1.0 - ipow_neg(p, 1.0 + 2.0 * it);
    }
    let norm = ((big_n as f64 * nu_factor(big_n)) * ntilde_sq(m_lad, big_n)).sqrt();
    let blocked = big_n / m_lad;
    let mut sum = c64(0.0, 0.0);
    for de in divisors(m2) {
        let mu = moebius(m2 / de);
        if mu == 0 || n % (m1 * de) != 0 {
            continue;
        }
        let mut inner = c64(0.0, 0.0);
        for cv in divisors(n / (m1 * de)) {
            if gcd(cv, blocked) != 1 {
                continue;
            }
            let f = n / (m1 * de) / cv;
            inner += point.chi.eval(cv) * point.chi.eval(f) * ipow_neg(cv, 2.0 * it);
        }
        sum += de as f64 * mu as f64 * point.chi.eval(de) * inner;
    }
    let scale = (m1 as f64 / m2 as f64).sqrt() / norm;
    Ok(((n as f64).ln() * it).exp() * scale * sum / edge)
}

fn vp(mut n: u64, p: u64) -> u32 {
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

/// A combined test-function pair: an even weight function on the principal
/// spectrum and a discrete weight function on even integers, with explicit
/// support bounds so the diagonal functional can be certified.
pub struct TestFunctionPair<'a> {
    /// Even function of the spectral parameter.
    pub h: Box<dyn Fn(f64) -> f64 + 'a>,
    /// Weight at even integers k; queried only on 4 <= k <= k_max.
    pub h_hol: Box<dyn Fn(u32) -> f64 + 'a>,
    /// |h(t)| is negligible past this point.
    pub t_max: f64,
    /// h_hol vanishes above this weight.
    pub k_max: u32,
}

/// Diagonal main term of the combined summation formula:
/// int h(t) t tanh(pi t) dt / (2 pi^2) + sum_{k even} (k-1)/(2 pi^2) h_hol(k).
pub fn main_term(pair: &TestFunctionPair) -> Result<f64> {
    let two_pi_sq = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
    let integrand = |t: f64| {
        let v = (pair.h)(t) * t * (std::f64::consts::PI * t).tanh();
        c64(v, 0.0)
    };
    // h is even, so integrate the half line and double.
    let cont = if pair.t_max > 0.0 {
        2.0 * quad::integrate(integrand, 0.0, pair.t_max, 1e-12)?.value.re
    } else {
        0.0
    };
    let mut disc = 0.0;
    let mut k = 4;
    while k <= pair.k_max {
        disc += (k as f64 - 1.0) * (pair.h_hol)(k);
        k += 2;
    }
    Ok((cont + disc) / two_pi_sq)
}
