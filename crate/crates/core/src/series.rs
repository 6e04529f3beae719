//! Zeta and Hurwitz machinery plus the Dirichlet series built from GL(3)
//! coefficients and Kloosterman sums: the additively twisted coefficient
//! series Phi, its dual Xi, the triple-indexed double Dirichlet series D
//! in both its defining and unfolded representations (with the exact
//! index bijection between them), and Bump's double Dirichlet series with
//! its closed Euler-product form. Every truncated value carries a
//! certified tail bound where the region permits one.

use std::collections::HashMap;
use std::io::{Read as _, Write as _};
use std::path::PathBuf;

use crate::arith::{self, Gl3Form, SpfTable};
use crate::error::{Error, Result};
use crate::{c64, C64};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// B_2 through B_24, the only Bernoulli numbers the tail correction needs.
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Hurwitz zeta via Euler-Maclaurin: direct terms to a cutoff that scales
/// with |Im s|, then the integral, half-term, and twelve Bernoulli
/// corrections. Relative error is comfortably below 1e-10 for |Im s| <=
/// a few hundred.
pub fn hurwitz_zeta(s: C64, alpha: f64) -> Result<C64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!(
            "hurwitz zeta: shift must lie in (0, 1], got {alpha}"
        )));
    }
    if (s - 1.0).norm() < 1e-8 {
        return Err(Error::NearPole {
            what: "hurwitz zeta",
            location: "s = 1".into(),
            distance: (s - 1.0).norm(),
        });
    }
    let n = 24 + (1.3 * s.im.abs()) as usize;
    let mut sum = c64(0.0, 0.0);
    for k in 0..n {
        sum += (-s * (k as f64 + alpha).ln()).exp();
    }
    let base = n as f64 + alpha;
    let ln_base = base.ln();
    sum += (-(s - 1.0) * ln_base).exp() / (s - 1.0);
    sum += (-s * ln_base).exp() * 0.5;
    // sum_k B_2k/(2k)! * s(s+1)...(s+2k-2) * base^(-s-2k+1)
    let mut poch = s;
    let mut fact = 2.0f64;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let j = (2 * k + 1) as f64;
        sum += poch * (b / fact) * (-(s + j) * ln_base).exp();
        poch *= (s + j) * (s + j + 1.0);
        fact *= (j + 2.0) * (j + 3.0);
    }
    Ok(sum)
}

/// Riemann zeta as the alpha = 1 Hurwitz value.
pub fn zeta(s: C64) -> Result<C64> {
    hurwitz_zeta(s, 1.0)
}

fn zeta_real(sigma: f64) -> Result<f64> {
    Ok(zeta(c64(sigma, 0.0))?.re)
}

/// Leading Laurent data of zeta(s, alpha) at s = 1, normalized as
/// zeta(s, alpha) = 1/(s-1) - psi - gamma (s-1) + ...; returns
/// (psi, gamma). Richardson-extrapolated central differences of the
/// pole-subtracted function.
pub fn hurwitz_laurent(alpha: f64) -> Result<(f64, f64)> {
    let f = |s: f64| -> Result<f64> {
        Ok((hurwitz_zeta(c64(s, 0.0), alpha)? - 1.0 / (s - 1.0)).re)
    };
    let h0 = 0.01;
    let mut even = [0.0f64; 3];
    let mut odd = [0.0f64; 3];
    for (i, scale) in [1.0, 0.5, 0.25].iter().enumerate() {
        let h = h0 * scale;
        let (fp, fm) = (f(1.0 + h)?, f(1.0 - h)?);
        even[i] = 0.5 * (fp + fm);
        odd[i] = (fp - fm) / (2.0 * h);
    }
    let extrap = |v: [f64; 3]| {
        let r1a = (4.0 * v[1] - v[0]) / 3.0;
        let r1b = (4.0 * v[2] - v[1]) / 3.0;
        (16.0 * r1b - r1a) / 15.0
    };
    Ok((-extrap(even), -extrap(odd)))
}

/// Rankin-style tail certificate: sum_{n > cut} tau_k(n) n^{-sigma} is at
/// most cut^{-delta} zeta(sigma - delta)^k for every 0 < delta < sigma - 1;
/// minimized over a small grid. Infinite when sigma is too close to 1.
pub fn divisor_tail(cut: f64, sigma: f64, k: u32) -> f64 {
    let cut = cut.max(1.0);
    let mut best = f64::INFINITY;
    let mut delta = 0.1;
    while delta < sigma - 1.05 {
        if let Ok(z) = zeta_real(sigma - delta) {
            best = best.min(cut.powf(-delta) * z.powi(k as i32));
        }
        delta += 0.1;
    }
    best
}

/// A truncated series value together with a rigorous bound on the
/// discarded tail.
#[derive(Debug, Clone, Copy)]
pub struct SeriesValue {
    pub value: C64,
    pub tail: f64,
}

/// Per-index truncation length and an overall term-count cap that shrinks
/// the per-index length for multi-index sums.
#[derive(Debug, Clone, Copy)]
pub struct TruncationBudget {
    pub per_index: u64,
    pub total_cap: u64,
}

impl Default for TruncationBudget {
    fn default() -> Self {
        TruncationBudget {
            per_index: 10_000,
            total_cap: 10_000_000,
        }
    }
}

impl TruncationBudget {
    /// Effective length for a sum with `indices` free indices.
    pub fn length(&self, indices: u32) -> u64 {
        let root = (self.total_cap as f64).powf(1.0 / indices as f64) as u64;
        self.per_index.min(root.max(1))
    }
}

/// Evaluation point (s, w, u) for the triple Dirichlet series, tagged by
/// which convergence region it was validated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionTag {
    Variables,
    Lem1Cond,
    Bump,
    Custom,
}

#[derive(Debug, Clone, Copy)]
pub struct SeriesPoint {
    pub s: C64,
    pub w: C64,
    pub u: C64,
    pub region: RegionTag,
}

fn variables_ok(s: C64, w: C64, u: C64) -> bool {
    (w + u / 2.0).re > 1.0
        && (s * 3.0 + u / 2.0).re > 2.0
        && (s * 3.0 - u / 2.0).re > 4.0
        && u.re < -0.5
}

fn lem1_ok(s: C64, w: C64, u: C64) -> bool {
    (w + u / 2.0).re > 1.0 && (s + u / 2.0).re > 1.0 && u.re < -0.5
}

impl SeriesPoint {
    pub fn new(s: C64, w: C64, u: C64, region: RegionTag) -> Result<Self> {
        let ok = match region {
            RegionTag::Variables => variables_ok(s, w, u),
            RegionTag::Lem1Cond => lem1_ok(s, w, u),
            RegionTag::Bump => s.re > 1.0 && w.re > 1.0,
            RegionTag::Custom => true,
        };
        if !ok {
            return Err(Error::RangeUnsupported {
                what: "series point",
                detail: format!("({s}, {w}, {u}) violates the {region:?} region constraints"),
            });
        }
        Ok(SeriesPoint { s, w, u, region })
    }
}

/// base^(-e) for a positive integer base and complex exponent.
pub(crate) fn ipow_neg(base: u64, e: C64) -> C64 {
    (-e * (base as f64).ln()).exp()
}

/// tau_3 and first-row/first-column coefficient tables up to n_max
/// inclusive, filled multiplicatively from one smallest-prime-factor
/// sieve. `right[n]` holds A(1, n) and `left[n]` holds A(n, 1); the two
/// differ for forms with complex coefficients.
struct CoeffTables {
    tau3: Vec<u32>,
    right: Vec<C64>,
    left: Vec<C64>,
}

fn coeff_tables(form: &Gl3Form, n_max: u64) -> Result<CoeffTables> {
    let spf = SpfTable::new(n_max as usize);
    let mut tau3 = vec![0u32; n_max as usize + 1];
    let mut right = vec![c64(0.0, 0.0); n_max as usize + 1];
    let mut left = vec![c64(0.0, 0.0); n_max as usize + 1];
    if n_max >= 1 {
        tau3[1] = 1;
        right[1] = c64(1.0, 0.0);
        left[1] = c64(1.0, 0.0);
    }
    let mut pp: HashMap<(u64, u32), (C64, C64)> = HashMap::new();
    for n in 2..=n_max {
        let fac = spf.factorize(n);
        let mut t3 = 1u32;
        let mut ar = c64(1.0, 0.0);
        let mut al = c64(1.0, 0.0);
        for &(p, e) in &fac {
            t3 *= (e + 1) * (e + 2) / 2;
            let local = match pp.get(&(p, e)) {
                Some(&v) => v,
                None => {
                    let v = (form.coeff_pp(p, 0, e as i64)?, form.coeff_pp(p, e as i64, 0)?);
                    pp.insert((p, e), v);
                    v
                }
            };
            ar *= local.0;
            al *= local.1;
        }
        tau3[n as usize] = t3;
        right[n as usize] = ar;
        left[n as usize] = al;
    }
    Ok(CoeffTables { tau3, right, left })
}

/// Largest |A(t, 1)| over divisors t of m; the natural weight in the
/// uniform bound for the twisted coefficient series.
pub fn alpha_weight(form: &Gl3Form, m: u64) -> Result<f64> {
    let mut best = 0.0f64;
    for t in arith::divisors(m) {
        best = best.max(form.coeff(t, 1)?.norm());
    }
    Ok(best)
}

/// Twisted coefficient series sum_n A(m, n) e(sign n dbar / c) n^{-v},
/// truncated with a divisor-bound tail certificate. Convergent for
/// Re v > 1.
pub fn phi_series(
    form: &Gl3Form,
    c: u64,
    sign: i8,
    d: u64,
    m: u64,
    v: C64,
    budget: TruncationBudget,
) -> Result<SeriesValue> {
    if c == 0 || d == 0 || m == 0 || arith::gcd(c, d) != 1 {
        return Err(Error::domain(
            "phi series: needs positive c, d, m with (c, d) = 1",
        ));
    }
    if v.re <= 1.05 {
        return Err(Error::RangeUnsupported {
            what: "phi series",
            detail: format!("Re v = {} is outside the convergence region Re v > 1", v.re),
        });
    }
    let n_max = budget.length(1);
    let tables = coeff_tables(form, n_max)?;
    let dbar = arith::mod_inverse(d as i64, c as i64)
        .ok_or_else(|| Error::domain("phi series: d has no inverse mod c"))? as u64;
    // c-th roots of unity, indexed by the residue of sign * n * dbar
    let mut roots = Vec::with_capacity(c as usize);
    for j in 0..c {
        let th = TWO_PI * j as f64 / c as f64;
        roots.push(c64(th.cos(), th.sin()));
    }
    // divisor data of m for the joint-index expansion of A(m, n)
    let m_divisors: Vec<(u64, f64, C64)> = arith::divisors(m)
        .into_iter()
        .map(|t| -> Result<_> {
            Ok((t, arith::moebius(t) as f64, form.coeff(m / t, 1)?))
        })
        .collect::<Result<_>>()?;
    let mut acc = c64(0.0, 0.0);
    for n in 1..=n_max {
        let mut coeff = c64(0.0, 0.0);
        for &(t, mob, a_left) in &m_divisors {
            if mob != 0.0 && n % t == 0 {
                coeff += a_left * tables.right[(n / t) as usize] * mob;
            }
        }
        if coeff.norm_sqr() == 0.0 {
            continue;
        }
        let residue = ((n % c) * (dbar % c)) % c;
        let idx = if sign >= 0 { residue } else { (c - residue) % c };
        acc += coeff * roots[idx as usize] * ipow_neg(n, v);
    }
    let tail = alpha_weight(form, m)? * divisor_tail(n_max as f64, v.re, 4);
    Ok(SeriesValue { value: acc, tail })
}

/// Dual coefficient series: c sum_{n1 | cm} sum_{n2} A(n2, n1)/(n2 n1)
/// S(sign m d, n2, mc/n1) (n2 n1^2 / c^3 m)^{-v}, truncated in n2 with a
/// Weil-bound tail certificate. Convergent for Re v > 0.
pub fn xi_series(
    form: &Gl3Form,
    c: u64,
    sign: i8,
    d: u64,
    m: u64,
    v: C64,
    budget: TruncationBudget,
) -> Result<SeriesValue> {
    if c == 0 || d == 0 || m == 0 || arith::gcd(c, d) != 1 {
        return Err(Error::domain(
            "xi series: needs positive c, d, m with (c, d) = 1",
        ));
    }
    if v.re <= 0.05 {
        return Err(Error::RangeUnsupported {
            what: "xi series",
            detail: format!("Re v = {} is outside the convergence region Re v > 0", v.re),
        });
    }
    let n2_max = budget.length(1);
    let tables = coeff_tables(form, n2_max)?;
    let md = (m * d) as i64 * sign as i64;
    let mut acc = c64(0.0, 0.0);
    let mut tail = 0.0f64;
    for n1 in arith::divisors(c * m) {
        let modulus = m * c / n1;
        let scale = ipow_neg(n1, v * 2.0 + 1.0)
            * (v * ((c as f64).powi(3) * m as f64).ln()).exp();
        let n1_divisors: Vec<(u64, f64, C64)> = arith::divisors(n1)
            .into_iter()
            .map(|t| -> Result<_> {
                Ok((t, arith::moebius(t) as f64, form.coeff(1, n1 / t)?))
            })
            .collect::<Result<_>>()?;
        let mut inner = c64(0.0, 0.0);
        for n2 in 1..=n2_max {
            let mut coeff = c64(0.0, 0.0);
            for &(t, mob, a_right) in &n1_divisors {
                if mob != 0.0 && n2 % t == 0 {
                    coeff += tables.left[(n2 / t) as usize] * a_right * mob;
                }
            }
            if coeff.norm_sqr() == 0.0 {
                continue;
            }
            let s = arith::kloosterman(md, n2 as i64, modulus)?;
            inner += coeff * s * ipow_neg(n2, v + 1.0);
        }
        acc += inner * scale;
        // Weil bound on the modulus, tau3(n1) tau4(n2) on the coefficient
        let weil = arith::tau(modulus) as f64
            * (modulus as f64).sqrt()
            * (arith::gcd(md.unsigned_abs(), modulus) as f64).sqrt();
        tail += scale.norm()
            * tables.tau3[..]
                .get(n1 as usize)
                .copied()
                .unwrap_or_else(|| arith::tau3(n1) as u32) as f64
            * weil
            * divisor_tail(n2_max as f64, 1.0 + v.re, 4);
    }
    Ok(SeriesValue {
        value: acc * c as f64,
        tail: tail * c as f64,
    })
}

/// Index caps for the matched-box evaluation of the triple Dirichlet
/// series: the unfolded side ranges over (n1, r, c, n2) inside these caps
/// and the defining side over exactly the corresponding (c, d, m, n1, n2).
#[derive(Debug, Clone, Copy)]
pub struct MatchedCaps {
    pub n1: u64,
    pub r: u64,
    pub c: u64,
    pub n2: u64,
}

impl Default for MatchedCaps {
    fn default() -> Self {
        MatchedCaps {
            n1: 30,
            r: 60,
            c: 40,
            n2: 200,
        }
    }
}

/// Kloosterman lookup tables S(a, b, q) for all residues a, b and every
/// modulus q <= q_max.
struct KloostermanTables {
    by_modulus: Vec<Vec<f64>>,
}

impl KloostermanTables {
    fn new(q_max: u64) -> Result<Self> {
        let mut by_modulus = Vec::with_capacity(q_max as usize + 1);
        by_modulus.push(Vec::new());
        for q in 1..=q_max {
            let mut t = vec![0.0f64; (q * q) as usize];
            for a in 0..q {
                for b in 0..=a {
                    let s = arith::kloosterman(a as i64, b as i64, q)?;
                    t[(a * q + b) as usize] = s;
                    t[(b * q + a) as usize] = s;
                }
            }
            by_modulus.push(t);
        }
        Ok(KloostermanTables { by_modulus })
    }

    fn get(&self, a: i64, b: u64, q: u64) -> f64 {
        let ar = a.rem_euclid(q as i64) as u64;
        self.by_modulus[q as usize][(ar * q + b % q) as usize]
    }
}

/// Dense A(n2, n1) table for n1 <= caps.n1, n2 <= caps.n2.
fn coeff_grid(form: &Gl3Form, n1_max: u64, n2_max: u64) -> Result<Vec<Vec<C64>>> {
    let mut grid = Vec::with_capacity(n1_max as usize + 1);
    grid.push(Vec::new());
    for n1 in 1..=n1_max {
        let mut row = Vec::with_capacity(n2_max as usize + 1);
        row.push(c64(0.0, 0.0));
        for n2 in 1..=n2_max {
            row.push(form.coeff(n2, n1)?);
        }
        grid.push(row);
    }
    Ok(grid)
}

/// Unfolded representation of the triple Dirichlet series:
/// sum over ell | r, q | n1 c, n2 of A(n2, n1) S(sign r, n2, c) /
/// (n2^{s+u/2} n1^{2s} c^{1-u} r^{w+u/2}), over the finite index box.
pub fn d_series_alt(
    form: &Gl3Form,
    q: u64,
    ell: u64,
    sign: i8,
    point: &SeriesPoint,
    caps: MatchedCaps,
) -> Result<C64> {
    if q == 0 || ell == 0 || arith::gcd(q, ell) != 1 {
        return Err(Error::domain("d series: q, ell must be positive coprime"));
    }
    if !lem1_ok(point.s, point.w, point.u) {
        return Err(Error::RangeUnsupported {
            what: "d series unfolded form",
            detail: "point violates the unfolded-region constraints".into(),
        });
    }
    let (s, w, u) = (point.s, point.w, point.u);
    let grid = coeff_grid(form, caps.n1, caps.n2)?;
    let kl = KloostermanTables::new(caps.c)?;
    let pw_n2: Vec<C64> = (0..=caps.n2).map(|n| ipow_neg(n.max(1), s + u / 2.0)).collect();
    let mut acc = c64(0.0, 0.0);
    for n1 in 1..=caps.n1 {
        let f_n1 = ipow_neg(n1, s * 2.0);
        for c in 1..=caps.c {
            if (n1 * c) % q != 0 {
                continue;
            }
            let f_c = ipow_neg(c, c64(1.0, 0.0) - u);
            let mut r = ell;
            while r <= caps.r {
                let f_r = ipow_neg(r, w + u / 2.0);
                let f_out = f_n1 * f_c * f_r;
                let mut inner = c64(0.0, 0.0);
                for n2 in 1..=caps.n2 {
                    let a = grid[n1 as usize][n2 as usize];
                    if a.norm_sqr() == 0.0 {
                        continue;
                    }
                    inner += a * kl.get(sign as i64 * r as i64, n2, c) * pw_n2[n2 as usize];
                }
                acc += inner * f_out;
                r += ell;
            }
        }
    }
    Ok(acc)
}

/// Defining representation of the same series: sum over coprime (c, d) and
/// m with q | mc, ell | md of the dual coefficient series at
/// v = -1 + s + u/2, weighted by c^{-(3s+u/2-1)} m^{-(s+w)} d^{-(w+u/2)}.
/// The inner divisor sum is restricted to the image of the cap box under
/// the quintuple-triple correspondence, so the value is term-for-term
/// comparable with `d_series_alt` while being assembled through the
/// completely different dual-series grouping.
pub fn d_series_def(
    form: &Gl3Form,
    q: u64,
    ell: u64,
    sign: i8,
    point: &SeriesPoint,
    caps: MatchedCaps,
) -> Result<C64> {
    if q == 0 || ell == 0 || arith::gcd(q, ell) != 1 {
        return Err(Error::domain("d series: q, ell must be positive coprime"));
    }
    if !variables_ok(point.s, point.w, point.u) {
        return Err(Error::RangeUnsupported {
            what: "d series defining form",
            detail: "point violates the defining-region constraints".into(),
        });
    }
    let (s, w, u) = (point.s, point.w, point.u);
    let v = s + u / 2.0 - 1.0;
    let grid = coeff_grid(form, caps.n1, caps.n2)?;
    let kl = KloostermanTables::new(caps.c)?;
    let pw_n2: Vec<C64> = (0..=caps.n2)
        .map(|n| ipow_neg(n.max(1), v + 1.0))
        .collect();
    let mut acc = c64(0.0, 0.0);
    for m in 1..=caps.r {
        let c_cap = caps.c * caps.n1 / m;
        for d in 1..=caps.r / m {
            if (m * d) % ell != 0 {
                continue;
            }
            let f_md = ipow_neg(m, s + w) * ipow_neg(d, w + u / 2.0);
            for c in 1..=c_cap {
                if (m * c) % q != 0 || arith::gcd(c, d) != 1 {
                    continue;
                }
                let f_c = ipow_neg(c, s * 3.0 + u / 2.0 - 1.0);
                let cm_scale = (v * ((c as f64).powi(3) * m as f64).ln()).exp();
                let mut xi = c64(0.0, 0.0);
                for n1 in arith::divisors(c * m) {
                    if n1 > caps.n1 || (m * c / n1) > caps.c {
                        continue;
                    }
                    let modulus = m * c / n1;
                    let f_n1 = ipow_neg(n1, v * 2.0 + 1.0);
                    let mut inner = c64(0.0, 0.0);
                    for n2 in 1..=caps.n2 {
                        let a = grid[n1 as usize][n2 as usize];
                        if a.norm_sqr() == 0.0 {
                            continue;
                        }
                        inner +=
                            a * kl.get(sign as i64 * (m * d) as i64, n2, modulus)
                                * pw_n2[n2 as usize];
                    }
                    xi += inner * f_n1;
                }
                acc += xi * cm_scale * (c as f64) * f_md * f_c;
            }
        }
    }
    Ok(acc)
}

/// Quintuple side of the index correspondence underlying the unfolding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quintuple {
    pub d: u64,
    pub f: u64,
    pub g: u64,
    pub nu1: u64,
    pub gamma: u64,
}

impl Quintuple {
    /// Side conditions: ell | fgd, q | fg nu1 gamma, (nu1, g) = 1,
    /// (nu1 gamma, d) = 1.
    pub fn admissible(&self, q: u64, ell: u64) -> bool {
        (self.f * self.g * self.d) % ell == 0
            && (self.f * self.g * self.nu1 * self.gamma) % q == 0
            && arith::gcd(self.nu1, self.g) == 1
            && arith::gcd(self.nu1 * self.gamma, self.d) == 1
    }
}

/// (n1, r, c) = (nu1 f, f g d, g gamma).
pub fn quintuple_to_triple(t: Quintuple) -> (u64, u64, u64) {
    (t.nu1 * t.f, t.f * t.g * t.d, t.g * t.gamma)
}

/// Inverse map: (d, f, g, nu1, gamma) =
/// (r/(n1 c, r), (n1, r), (n1 c, r)/(n1, r), n1/(n1, r), c (n1, r)/(n1 c, r)).
pub fn triple_to_quintuple(n1: u64, r: u64, c: u64) -> Quintuple {
    let g1 = arith::gcd(n1 * c, r);
    let g2 = arith::gcd(n1, r);
    Quintuple {
        d: r / g1,
        f: g2,
        g: g1 / g2,
        nu1: n1 / g2,
        gamma: c * g2 / g1,
    }
}

/// Exhaustive round-trip check of the correspondence: every admissible
/// quintuple with entries <= bound must map to a triple satisfying
/// q | n1 c, ell | r and pull back to itself, and every triple with
/// entries <= bound must pull back to an admissible quintuple mapping
/// forward to itself. Returns (quintuples checked, triples checked).
pub fn bijection_roundtrip(bound: u64, q: u64, ell: u64) -> Result<(u64, u64)> {
    let mut quintuples = 0u64;
    for nu1 in 1..=bound {
        for g in 1..=bound {
            if arith::gcd(nu1, g) != 1 {
                continue;
            }
            for gamma in 1..=bound {
                for d in 1..=bound {
                    if arith::gcd(nu1 * gamma, d) != 1 {
                        continue;
                    }
                    for f in 1..=bound {
                        let t = Quintuple { d, f, g, nu1, gamma };
                        if !t.admissible(q, ell) {
                            continue;
                        }
                        let (n1, r, c) = quintuple_to_triple(t);
                        if (n1 * c) % q != 0 || r % ell != 0 {
                            return Err(Error::domain(format!(
                                "forward image of {t:?} violates the triple conditions"
                            )));
                        }
                        if triple_to_quintuple(n1, r, c) != t {
                            return Err(Error::domain(format!(
                                "round trip failed for quintuple {t:?}"
                            )));
                        }
                        quintuples += 1;
                    }
                }
            }
        }
    }
    let mut triples = 0u64;
    for n1 in 1..=bound {
        for r in (ell..=bound).step_by(ell as usize) {
            for c in 1..=bound {
                if (n1 * c) % q != 0 {
                    continue;
                }
                let t = triple_to_quintuple(n1, r, c);
                if !t.admissible(q, ell) {
                    return Err(Error::domain(format!(
                        "pullback of ({n1}, {r}, {c}) is not admissible: {t:?}"
                    )));
                }
                if quintuple_to_triple(t) != (n1, r, c) {
                    return Err(Error::domain(format!(
                        "round trip failed for triple ({n1}, {r}, {c})"
                    )));
                }
                triples += 1;
            }
        }
    }
    Ok((quintuples, triples))
}

/// Both sides of the closed form for Bump's double Dirichlet series:
/// lhs = truncated sum over ell | n2 and n1 of A(n2, n1) n2^{-(s+w)}
/// n1^{-2s}; rhs = zeta(s+w)^3 zeta(2s)^3 / (ell^{s+w} zeta(3s+w)) times
/// the ratio of the two ell-power local sums. Implemented for the
/// standard non-cuspidal coefficient system; ell must be 1 or prime.
pub fn bump_check(
    form: &Gl3Form,
    ell: u64,
    s: C64,
    w: C64,
    budget: TruncationBudget,
) -> Result<(SeriesValue, C64)> {
    if !matches!(form, Gl3Form::NonCusp) {
        return Err(Error::RangeUnsupported {
            what: "bump double series",
            detail: "closed form wired for the standard non-cuspidal system only".into(),
        });
    }
    if s.re <= 1.0 || w.re <= 1.0 {
        return Err(Error::RangeUnsupported {
            what: "bump double series",
            detail: "needs Re s > 1 and Re w > 1".into(),
        });
    }
    if ell != 1 && arith::factorize(ell) != vec![(ell, 1)] {
        return Err(Error::domain("bump double series: ell must be 1 or a prime"));
    }
    let n = budget.per_index.max(10);
    let spf = SpfTable::new(n as usize);
    let mut tau3 = vec![0u32; n as usize + 1];
    let mut mu = vec![0i8; n as usize + 1];
    tau3[1] = 1;
    mu[1] = 1;
    for k in 2..=n {
        let mut t3 = 1u32;
        let mut m = 1i8;
        for (_, e) in spf.factorize(k) {
            t3 *= (e + 1) * (e + 2) / 2;
            m = if e >= 2 { 0 } else { -m };
        }
        tau3[k as usize] = t3;
        mu[k as usize] = m;
    }
    // prefix sums T(x) = sum_{k <= x} tau3(k) k^{-2s}; the n1-sum for fixed
    // n2 is exactly sum_{t | n2, t <= n} mu(t) tau3(n2/t) t^{-2s} T(n/t),
    // the joint-index expansion re-grouped over n1 = t k (same finite box)
    let mut prefix = vec![c64(0.0, 0.0); n as usize + 1];
    for k in 1..=n {
        prefix[k as usize] =
            prefix[k as usize - 1] + ipow_neg(k, s * 2.0) * tau3[k as usize] as f64;
    }
    let mut lhs = c64(0.0, 0.0);
    let mut n2 = ell;
    while n2 <= n {
        let mut inner = c64(0.0, 0.0);
        for t in arith::divisors(n2) {
            if t > n || mu[t as usize] == 0 {
                continue;
            }
            inner += ipow_neg(t, s * 2.0)
                * (mu[t as usize] as f64 * tau3[(n2 / t) as usize] as f64)
                * prefix[(n / t) as usize];
        }
        lhs += inner * ipow_neg(n2, s + w);
        n2 += ell;
    }
    // tail: union bound over the three escape directions of (t, a, b) with
    // n1 = t a, n2 = t b against tau3 tau3 majorants
    let sig1 = 2.0 * s.re;
    let sig2 = (s + w).re;
    let mut tail = 0.0;
    for t in 1..=64u64 {
        let dt = (t as f64).powf(-(sig1 + sig2));
        tail += dt
            * (divisor_tail(n as f64 / t as f64, sig1, 3) * zeta_real(sig2)?.powi(3)
                + divisor_tail(n as f64 / t as f64, sig2, 3) * zeta_real(sig1)?.powi(3));
    }
    tail += zeta_real(sig1)?.powi(3) * zeta_real(sig2)?.powi(3)
        * 64.0f64.powf(-(sig1 + sig2 - 1.0))
        / (sig1 + sig2 - 1.0);
    // closed form
    let zsw = zeta(s + w)?;
    let z2s = zeta(s * 2.0)?;
    let z3sw = zeta(s * 3.0 + w)?;
    let correction = if ell == 1 {
        c64(1.0, 0.0)
    } else {
        let p = arith::factorize(ell)[0].0;
        let x = ipow_neg(p, s + w);
        let y = ipow_neg(p, s * 2.0);
        let mut num = c64(0.0, 0.0);
        let mut den = c64(0.0, 0.0);
        let cap = 60i64;
        let mut xb = c64(1.0, 0.0);
        for b in 0..cap {
            let mut ya = c64(1.0, 0.0);
            for a in 0..cap {
                num += arith::noncusp_coeff_pp(b + 1, a) * xb * ya;
                den += arith::noncusp_coeff_pp(b, a) * xb * ya;
                ya *= y;
            }
            xb *= x;
        }
        num / den
    };
    let rhs = zsw.powu(3) * z2s.powu(3) / (ipow_neg(ell, -(s + w)) * z3sw) * correction;
    Ok((SeriesValue { value: lhs, tail }, rhs))
}

/// On-disk coefficient memo: little-endian records (u64 n, u64 m, f64 re,
/// f64 im), one file per coefficient system. Appended on flush.
pub struct CoeffMemo {
    path: PathBuf,
    map: HashMap<(u64, u64), C64>,
    new_keys: Vec<(u64, u64)>,
}

/// File name carrying the coefficient-system identity.
pub fn memo_file_name(form: &Gl3Form) -> String {
    match form {
        Gl3Form::NonCusp => "gl3-noncusp.coeffs".into(),
        Gl3Form::Seeded(seed) => format!("gl3-seeded-{seed}.coeffs"),
        Gl3Form::Uniform(t) => {
            let mut h = 0xcbf29ce484222325u64;
            for a in t.alpha {
                for bits in [a.re.to_bits(), a.im.to_bits()] {
                    h ^= bits;
                    h = h.wrapping_mul(0x100000001b3);
                }
            }
            format!("gl3-uniform-{h:016x}.coeffs")
        }
    }
}

impl CoeffMemo {
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut map = HashMap::new();
        match std::fs::File::open(&path) {
            Ok(mut f) => {
                let mut buf = Vec::new();
                f.read_to_end(&mut buf)
                    .map_err(|e| Error::Memo(format!("read {}: {e}", path.display())))?;
                if buf.len() % 32 != 0 {
                    return Err(Error::Memo(format!(
                        "{}: length {} is not a whole number of records",
                        path.display(),
                        buf.len()
                    )));
                }
                for rec in buf.chunks_exact(32) {
                    let n = u64::from_le_bytes(rec[0..8].try_into().unwrap());
                    let m = u64::from_le_bytes(rec[8..16].try_into().unwrap());
                    let re = f64::from_le_bytes(rec[16..24].try_into().unwrap());
                    let im = f64::from_le_bytes(rec[24..32].try_into().unwrap());
                    map.insert((n, m), c64(re, im));
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::Memo(format!("open {}: {e}", path.display()))),
        }
        Ok(CoeffMemo {
            path,
            map,
            new_keys: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, n: u64, m: u64) -> Option<C64> {
        self.map.get(&(n, m)).copied()
    }

    /// Cached coefficient lookup, computing and recording on miss.
    pub fn coeff(&mut self, form: &Gl3Form, n: u64, m: u64) -> Result<C64> {
        if let Some(v) = self.get(n, m) {
            return Ok(v);
        }
        let v = form.coeff(n, m)?;
        self.map.insert((n, m), v);
        self.new_keys.push((n, m));
        Ok(v)
    }

    /// Append the records added since the last flush.
    pub fn flush(&mut self) -> Result<()> {
        if self.new_keys.is_empty() {
            return Ok(());
        }
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| Error::Memo(format!("append {}: {e}", self.path.display())))?;
        let mut buf = Vec::with_capacity(self.new_keys.len() * 32);
        for &(n, m) in &self.new_keys {
            let v = self.map[&(n, m)];
            buf.extend_from_slice(&n.to_le_bytes());
            buf.extend_from_slice(&m.to_le_bytes());
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        f.write_all(&buf)
            .map_err(|e| Error::Memo(format!("write {}: {e}", self.path.display())))?;
        self.new_keys.clear();
        Ok(())
    }
}
