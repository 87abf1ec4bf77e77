//! Characteristic polynomials `Q_m`, `Q̂_m`, the reduced polynomials `R`,
//! `R̂`, their special values, and the ε-perturbation studies that track how
//! the roots of `Q_m`/`Q̂_m` collapse onto `{0, -1, ..., -q}` plus the roots
//! of the reduced polynomial.

use serde::{Deserialize, Serialize};

use crate::arith::{
    cx, factorial, pochhammer, pochhammer_ipd, sigma_coeffs, stirling2, Cx, IpdSpec, INTEGER_SNAP,
};
use crate::error::{Error, Result};
use crate::poly::{roots, CPoly};

/// Relative agreement demanded between independent formulas for the same
/// quantity.
pub const DUAL_FORM_TOL: f64 = 1e-10;

fn agree(x: Cx, y: Cx, scale: f64, tol: f64) -> bool {
    (x - y).norm() <= tol * scale.max(x.norm()).max(y.norm()).max(f64::MIN_POSITIVE)
}

/// `Σ_{i=0}^{n} (top)_i / ((bottom)_i i!)`, the first `n + 1` terms of a
/// unit-argument series.
pub fn finite_unit_sum(n: usize, top: &[Cx], bottom: &[Cx]) -> Cx {
    let mut term = cx(1.0);
    let mut sum = cx(1.0);
    for i in 0..n {
        let ic = cx(i as f64);
        let mut num = cx(1.0);
        for &a in top {
            num *= a + ic;
        }
        let mut den = cx((i + 1) as f64);
        for &b in bottom {
            den *= b + ic;
        }
        term *= num / den;
        sum += term;
    }
    sum
}

fn ckr_stirling(k: usize, spec: &IpdSpec, sigma: &[Cx], fm: Cx) -> Result<(Cx, f64)> {
    let m = spec.m_total();
    let mut acc = cx(0.0);
    let mut mag = 0.0f64;
    for (j, &s) in sigma.iter().enumerate().take(m + 1).skip(k) {
        let st = stirling2(j, k)
            .ok_or_else(|| Error::InvalidSpec(format!("Stirling number S({j},{k}) overflows")))?;
        let term = s * (st as f64);
        mag = mag.max(term.norm());
        acc += term;
    }
    Ok((acc / fm, mag / fm.norm()))
}

fn ckr_series(k: usize, spec: &IpdSpec) -> (Cx, f64) {
    // ((-1)^k / k!) Σ_i (-k)_i (f+m)_i / ((f)_i i!)
    let tops = spec.tops();
    let mut term = cx(1.0);
    let mut sum = cx(1.0);
    let mut mag = 1.0f64;
    for i in 0..k {
        let ic = cx(i as f64);
        let mut num = cx(i as f64 - k as f64);
        for &a in &tops {
            num *= a + ic;
        }
        let mut den = cx((i + 1) as f64);
        for &b in &spec.f {
            den *= b + ic;
        }
        term *= num / den;
        mag = mag.max(term.norm());
        sum += term;
    }
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let s = sign / factorial(k);
    (sum * s, mag * s.abs())
}

/// `C_{k,r}(f)`, the coefficients of the characteristic polynomials.
///
/// Computed from the σ/Stirling expansion and checked against the
/// terminating-series form; disagreement is an internal error.
pub fn ckr(k: usize, spec: &IpdSpec) -> Result<Cx> {
    let sigma = sigma_coeffs(spec);
    let fm = pochhammer_ipd(spec, cx(0.0));
    ckr_checked(k, spec, &sigma, fm)
}

fn ckr_checked(k: usize, spec: &IpdSpec, sigma: &[Cx], fm: Cx) -> Result<Cx> {
    let m = spec.m_total();
    if k > m {
        return Err(Error::InvalidSpec(format!("k = {k} exceeds m = {m}")));
    }
    let (st, mag1) = ckr_stirling(k, spec, sigma, fm)?;
    let (se, mag2) = ckr_series(k, spec);
    if !agree(st, se, mag1.max(mag2), DUAL_FORM_TOL) {
        return Err(Error::Inconsistent(format!(
            "C_{k} disagrees between forms: {st} vs {se}"
        )));
    }
    Ok(st)
}

/// Both forms of `C_{k,r}` with the largest term magnitude seen, for
/// external consistency reports.
pub fn ckr_forms(k: usize, spec: &IpdSpec) -> Result<(Cx, Cx, f64)> {
    let m = spec.m_total();
    if k > m {
        return Err(Error::InvalidSpec(format!("k = {k} exceeds m = {m}")));
    }
    let sigma = sigma_coeffs(spec);
    let fm = pochhammer_ipd(spec, cx(0.0));
    let (st, mag1) = ckr_stirling(k, spec, &sigma, fm)?;
    let (se, mag2) = ckr_series(k, spec);
    Ok((st, se, mag1.max(mag2)))
}

/// `C_{0,r}, ..., C_{m,r}`.
pub fn ckr_all(spec: &IpdSpec) -> Result<Vec<Cx>> {
    let sigma = sigma_coeffs(spec);
    let fm = pochhammer_ipd(spec, cx(0.0));
    (0..=spec.m_total())
        .map(|k| ckr_checked(k, spec, &sigma, fm))
        .collect()
}

fn check_q(spec: &IpdSpec, q: usize) -> Result<()> {
    if q >= spec.m_total() {
        return Err(Error::InvalidSpec(format!(
            "q = {q} must be below m = {}",
            spec.m_total()
        )));
    }
    Ok(())
}

/// `true` when `(z)_n` vanishes, i.e. `z ∈ {1-n, ..., 0}` up to the snap
/// tolerance.
fn pochhammer_vanishes(z: Cx, n: usize) -> bool {
    n > 0 && crate::arith::distance_to_integer_range(z, 1 - n as i64, 0) <= INTEGER_SNAP
}

/// Smallest distance of `f_j - p` to the excluded integers
/// `{m-q-m_j, ..., 0}` over the `j` with `m - q - m_j <= 0`
/// (infinite when no index is constrained).
pub fn ipd_exclusion_distance(spec: &IpdSpec, p: Cx, q: usize) -> f64 {
    let m = spec.m_total() as i64;
    spec.f
        .iter()
        .zip(&spec.m)
        .filter(|(_, &mj)| m - q as i64 - mj as i64 <= 0)
        .map(|(&fj, &mj)| {
            crate::arith::distance_to_integer_range(fj - p, m - q as i64 - mj as i64, 0)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `Q_m(b, c, f | t)`.
pub fn qm_poly(b: Cx, c: Cx, spec: &IpdSpec) -> Result<CPoly> {
    let m = spec.m_total();
    let base = c - b - cx(m as f64);
    if pochhammer_vanishes(base, m) {
        return Err(Error::DegenerateNormalizer("(c-b-m)_m"));
    }
    let ck = ckr_all(spec)?;
    let mut acc = CPoly::zero();
    for (k, &ckk) in ck.iter().enumerate() {
        let term = CPoly::rising(cx(0.0), k)
            .mul(&CPoly::rising_neg(base, m - k))
            .scaled(pochhammer(b, k) * ckk);
        acc = acc.add(&term);
    }
    Ok(acc.scaled(cx(1.0) / pochhammer(base, m)))
}

/// Direct evaluation of the defining sum of `Q_m` at `t`.
pub fn qm_direct(b: Cx, c: Cx, spec: &IpdSpec, t: Cx) -> Result<Cx> {
    let m = spec.m_total();
    let base = c - b - cx(m as f64);
    let ck = ckr_all(spec)?;
    let mut acc = cx(0.0);
    for (k, &ckk) in ck.iter().enumerate() {
        acc += pochhammer(b, k) * ckk * pochhammer(t, k) * pochhammer(base - t, m - k);
    }
    Ok(acc / pochhammer(base, m))
}

/// `Q̂_m(a, b, c, f | t)`.
pub fn qmhat_poly(a: Cx, b: Cx, c: Cx, spec: &IpdSpec) -> Result<CPoly> {
    let m = spec.m_total();
    let mf = cx(m as f64);
    let ca = c - a - mf;
    let cb = c - b - mf;
    if pochhammer_vanishes(ca, m) {
        return Err(Error::DegenerateNormalizer("(c-a-m)_m"));
    }
    if pochhammer_vanishes(cb, m) {
        return Err(Error::DegenerateNormalizer("(c-b-m)_m"));
    }
    let cab = c - a - b - mf;
    let ck = ckr_all(spec)?;
    let mut acc = CPoly::zero();
    // (t)_k (t+k)_i = (t)_{k+i}; the inner 3F2 has m-k+1 terms
    for (k, &ckk) in ck.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let outer = ckk * pochhammer(a, k) * pochhammer(b, k) * sign;
        for i in 0..=(m - k) {
            let coeff = outer * pochhammer(cx(k as f64) - mf, i) * pochhammer(cab, i)
                / (pochhammer(ca, k + i) * pochhammer(cb, k + i) * factorial(i));
            acc = acc.add(&CPoly::rising(cx(0.0), k + i).scaled(coeff));
        }
    }
    Ok(acc)
}

/// Direct evaluation of the defining sum of `Q̂_m` at `t`.
pub fn qmhat_direct(a: Cx, b: Cx, c: Cx, spec: &IpdSpec, t: Cx) -> Result<Cx> {
    let m = spec.m_total();
    let mf = cx(m as f64);
    let ca = c - a - mf;
    let cb = c - b - mf;
    let ck = ckr_all(spec)?;
    let mut acc = cx(0.0);
    for (k, &ckk) in ck.iter().enumerate() {
        let kf = cx(k as f64);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let f32_ = finite_unit_sum(
            m - k,
            &[kf - mf, t + kf, c - a - b - mf],
            &[ca + kf, cb + kf],
        );
        acc += ckk * pochhammer(a, k) * pochhammer(b, k) * pochhammer(t, k) * sign
            / (pochhammer(ca, k) * pochhammer(cb, k))
            * f32_;
    }
    Ok(acc)
}

/// Reduced polynomial `R_{m-q-1}(b, f | t)` from its defining sum, checked
/// coefficient-wise against the alternative closed sum. The result may be
/// identically zero (see [`CPoly::is_identically_zero`]).
pub fn r_poly(b: Cx, spec: &IpdSpec, q: usize) -> Result<CPoly> {
    check_q(spec, q)?;
    let main = r_poly_sum(b, spec, q)?;
    let alt = r_poly_alt(b, spec, q);
    let scale = main.scale.max(alt.scale);
    let n = main.coeffs.len().max(alt.coeffs.len());
    for k in 0..n {
        let x = main.coeffs.get(k).copied().unwrap_or_default();
        let y = alt.coeffs.get(k).copied().unwrap_or_default();
        if !agree(x, y, scale, DUAL_FORM_TOL) {
            return Err(Error::Inconsistent(format!(
                "R coefficient {k} disagrees between forms: {x} vs {y}"
            )));
        }
    }
    Ok(main)
}

/// `Σ_k (b)_k C_k (-1)^k (1-t-k)_{m-q-1}`.
pub fn r_poly_sum(b: Cx, spec: &IpdSpec, q: usize) -> Result<CPoly> {
    check_q(spec, q)?;
    let m = spec.m_total();
    let deg = m - q - 1;
    let ck = ckr_all(spec)?;
    let mut acc = CPoly::zero();
    for (k, &ckk) in ck.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let term = CPoly::rising_neg(cx(1.0 - k as f64), deg).scaled(pochhammer(b, k) * ckk * sign);
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// `Σ_{k<m-q} (f-b-k)_m (b)_k (q+1-m)_k (b+k+1-t)_{m-q-1-k} / ((f)_m k!)`.
pub fn r_poly_alt(b: Cx, spec: &IpdSpec, q: usize) -> CPoly {
    let m = spec.m_total();
    let deg = m - q - 1;
    let fm = pochhammer_ipd(spec, cx(0.0));
    let mut acc = CPoly::zero();
    for k in 0..=deg {
        let kf = cx(k as f64);
        let coeff = pochhammer_ipd(spec, -b - kf)
            * pochhammer(b, k)
            * pochhammer(cx((q + 1) as f64 - m as f64), k)
            / (fm * factorial(k));
        acc = acc.add(&CPoly::rising_neg(b + kf + cx(1.0), deg - k).scaled(coeff));
    }
    acc
}

/// Second reduced polynomial `R̂_{m-q-1}(a, b, f | t)`.
pub fn rhat_poly(a: Cx, b: Cx, spec: &IpdSpec, q: usize) -> Result<CPoly> {
    check_q(spec, q)?;
    let m = spec.m_total();
    let mf = cx(m as f64);
    let qf = cx(q as f64);
    if crate::arith::distance_to_integer_range(a - b, q as i64 + 1 - m as i64, q as i64)
        <= INTEGER_SNAP
    {
        return Err(Error::ConstraintViolation(format!(
            "a - b = {} lies in {{q+1-m, ..., q}}",
            a - b
        )));
    }
    let ck = ckr_all(spec)?;
    let deg = m - q - 1;
    let mut acc = CPoly::zero();

    let pre = pochhammer(b, q + 1) / pochhammer(b - a, q + 1);
    for (k, &ckk) in ck.iter().enumerate().take(q + 1) {
        let kf = cx(k as f64);
        let outer =
            pre * pochhammer(kf - mf, q - k + 1) * pochhammer(a, k) * ckk / factorial(q - k + 1);
        // 3F2(1-m+q, t+q+1, 1-b-k; a-b+1, 2-k+q)
        for i in 0..=deg {
            let coeff = outer * pochhammer(cx(1.0) - mf + qf, i) * pochhammer(cx(1.0) - b - kf, i)
                / (pochhammer(a - b + cx(1.0), i)
                    * pochhammer(cx(2.0) - kf + qf, i)
                    * factorial(i));
            acc = acc.add(&CPoly::rising(qf + cx(1.0), i).scaled(coeff));
        }
    }
    for (k, &ckk) in ck.iter().enumerate().skip(q + 1) {
        let kf = cx(k as f64);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let outer = ckk * pochhammer(a, k) * pochhammer(b, k) * sign / factorial(k - q - 1);
        // (t+q+1)_{k-q-1} (t+k)_i = (t+q+1)_{k-q-1+i}
        for i in 0..=(m - k) {
            let coeff = outer * pochhammer(kf - mf, i) * pochhammer(-b - qf, i)
                / (pochhammer(a - b - qf, k + i) * pochhammer(kf - qf, i) * factorial(i));
            acc = acc.add(&CPoly::rising(qf + cx(1.0), k - q - 1 + i).scaled(coeff));
        }
    }
    Ok(acc)
}

/// `Q_m^0(-l)`, the limit of `Q_m(-l)` as `c - b - m → -q`.
pub fn q0_value(b: Cx, spec: &IpdSpec, q: usize, l: usize) -> Result<Cx> {
    check_q(spec, q)?;
    if l > q {
        return Err(Error::InvalidSpec(format!("l = {l} exceeds q = {q}")));
    }
    if l == 0 {
        return Ok(cx(1.0));
    }
    let m = spec.m_total();
    let ck = ckr_all(spec)?;
    let lf = cx(-(l as f64));
    let mut acc = cx(0.0);
    for (k, &ckk) in ck.iter().enumerate().take(l + 1) {
        acc += pochhammer(b, k) * ckk * pochhammer(lf, k) * pochhammer(cx((m - q) as f64), l - k);
    }
    Ok(acc / pochhammer(cx(-(q as f64)), l))
}

/// `Q̂_m^0(-l)`, the limit of `Q̂_m(-l)` as `c - a - m → -q`.
pub fn qhat0_value(a: Cx, b: Cx, spec: &IpdSpec, q: usize, l: usize) -> Result<Cx> {
    check_q(spec, q)?;
    if l > q {
        return Err(Error::InvalidSpec(format!("l = {l} exceeds q = {q}")));
    }
    if l == 0 {
        return Ok(cx(1.0));
    }
    let m = spec.m_total();
    let qf = cx(q as f64);
    let ck = ckr_all(spec)?;
    let mut acc = cx(0.0);
    for (k, &ckk) in ck.iter().enumerate().take(l + 1) {
        let kf = cx(k as f64);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let inner = finite_unit_sum(
            l - k,
            &[kf - cx(m as f64), kf - cx(l as f64), -b - qf],
            &[kf - qf, -b - qf + a + kf],
        );
        acc += pochhammer(cx(-(l as f64)), k) * pochhammer(a, k) * pochhammer(b, k) * ckk * sign
            / (pochhammer(-qf, k) * pochhammer(a - b - qf, k))
            * inner;
    }
    Ok(acc)
}

/// `R_{m-q-1}(-q-1)` from its closed sum.
pub fn r_at(b: Cx, spec: &IpdSpec, q: usize) -> Result<Cx> {
    check_q(spec, q)?;
    let m = spec.m_total();
    let ck = ckr_all(spec)?;
    let mut acc = cx(0.0);
    for (k, &ckk) in ck.iter().enumerate().take(q + 2) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += pochhammer(b, k) * ckk * sign * pochhammer(cx(k as f64 - m as f64), m - q - 1);
    }
    let sign = if (m - q + 1).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    Ok(acc * sign)
}

/// `R̂_{m-q-1}(-q-1)` from its closed sum.
pub fn rhat_at(a: Cx, b: Cx, spec: &IpdSpec, q: usize) -> Result<Cx> {
    check_q(spec, q)?;
    let m = spec.m_total();
    let ck = ckr_all(spec)?;
    let mut acc = cx(0.0);
    for (k, &ckk) in ck.iter().enumerate().take(q + 2) {
        acc += pochhammer(cx(k as f64 - m as f64), q + 1 - k) * pochhammer(a, k) * ckk
            / factorial(q + 1 - k);
    }
    Ok(acc * pochhammer(b, q + 1) / pochhammer(b - a, q + 1))
}

/// Which characteristic polynomial a limit study perturbs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LemmaParams {
    /// `Q_m(b, b+m-q+ε, f | t)`.
    First { b: Cx },
    /// `Q̂_m(a, b, a+m-q+ε, f | t)`.
    Second { a: Cx, b: Cx },
}

/// One ε of a limit study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub eps: f64,
    /// Roots of the perturbed polynomial, ordered to match `predicted`.
    pub roots: Vec<Cx>,
    /// Predicted limits `0, -1, ..., -q` followed by the reduced roots.
    pub predicted: Vec<Cx>,
    /// Largest [`root_distance`] under the best assignment.
    pub match_error: f64,
    /// `ε / ζ_1(ε)` (or `ε / η_1(ε)`), `ζ_1` being the root assigned to 0.
    pub ratio: Cx,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitStudy {
    pub params: LemmaParams,
    pub q: usize,
    pub rows: Vec<LimitRow>,
    pub predicted_ratio: Cx,
    /// Richardson extrapolation of the ratio from the two smallest ε.
    pub extrapolated_ratio: Cx,
    pub ratio_rel_err: f64,
    /// Least-squares slope of `log(match_error)` against `log(ε)`.
    pub slope: f64,
}

/// Distance beyond which a root assignment is reported as a failure.
pub const MATCH_BOUND: f64 = 0.1;

pub const DEFAULT_EPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(0, &mut cur, &mut out);
    out
}

/// Distance between a root and its target, relative once `|target| > 1`.
pub fn root_distance(found: Cx, target: Cx) -> f64 {
    (found - target).norm() / target.norm().max(1.0)
}

/// Assigns `found[perm[i]]` to `target[i]`, minimizing the largest
/// [`root_distance`] (ties broken by the total).
pub fn match_roots(found: &[Cx], target: &[Cx]) -> (Vec<Cx>, f64) {
    assert_eq!(found.len(), target.len());
    let n = found.len();
    if n == 0 {
        return (vec![], 0.0);
    }
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    for perm in permutations(n) {
        let mut worst = 0.0f64;
        let mut total = 0.0;
        for (i, &p) in perm.iter().enumerate() {
            let d = root_distance(found[p], target[i]);
            worst = worst.max(d);
            total += d;
        }
        let better = match &best {
            None => true,
            Some((w, t, _)) => worst < *w || (worst == *w && total < *t),
        };
        if better {
            best = Some((worst, total, perm));
        }
    }
    let (worst, _, perm) = best.unwrap();
    (perm.iter().map(|&p| found[p]).collect(), worst)
}

fn reduced_limit(params: LemmaParams, spec: &IpdSpec, q: usize) -> Result<(Cx, CPoly, Cx)> {
    check_q(spec, q)?;
    let m = spec.m_total();
    Ok(match params {
        LemmaParams::First { b } => {
            let r = r_poly(b, spec, q)?;
            let pr = r.eval(cx(0.0)) / factorial(m - q - 1);
            (b, r, pr)
        }
        LemmaParams::Second { a, b } => {
            let r = rhat_poly(a, b, spec, q)?;
            let sign = if (q + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
            let pr = r.eval(cx(0.0)) * sign;
            (a, r, pr)
        }
    })
}

/// Limit of `ε / ζ_1(ε)` as ε goes to 0.
pub fn predicted_ratio(params: LemmaParams, spec: &IpdSpec, q: usize) -> Result<Cx> {
    Ok(reduced_limit(params, spec, q)?.2)
}

/// Numerical realization of the limit lemmas: perturb `c` by each ε, root
/// the characteristic polynomial and compare against the predicted limits.
pub fn lemma_limit_study(
    params: LemmaParams,
    spec: &IpdSpec,
    q: usize,
    eps_list: &[f64],
) -> Result<LimitStudy> {
    check_q(spec, q)?;
    if eps_list.is_empty() || eps_list.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidSpec(
            "eps_list must hold positive values".into(),
        ));
    }
    let m = spec.m_total();
    let shift = cx(m as f64 - q as f64);
    let (pivot, reduced, predicted_ratio) = reduced_limit(params, spec, q)?;
    if ipd_exclusion_distance(spec, pivot, q) <= INTEGER_SNAP {
        return Err(Error::ConstraintViolation(
            "f_j minus the pivot parameter hits an excluded integer".into(),
        ));
    }
    if reduced.is_identically_zero() {
        return Err(Error::ConstraintViolation(
            "reduced polynomial vanishes identically".into(),
        ));
    }
    let mut predicted: Vec<Cx> = (0..=q).map(|l| cx(-(l as f64))).collect();
    predicted.extend(roots(&reduced)?.roots);

    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let poly = match params {
            LemmaParams::First { b } => qm_poly(b, b + shift + cx(eps), spec)?,
            LemmaParams::Second { a, b } => qmhat_poly(a, b, a + shift + cx(eps), spec)?,
        };
        let found = roots(&poly)?;
        if found.roots.len() != predicted.len() {
            return Err(Error::MatchingFailure(f64::INFINITY));
        }
        let (assigned, err) = match_roots(&found.roots, &predicted);
        if err > MATCH_BOUND {
            return Err(Error::MatchingFailure(err));
        }
        let ratio = cx(eps) / assigned[0];
        rows.push(LimitRow {
            eps,
            roots: assigned,
            predicted: predicted.clone(),
            match_error: err,
            ratio,
        });
    }

    let extrapolated_ratio = if rows.len() >= 2 {
        let r1 = &rows[rows.len() - 2];
        let r2 = &rows[rows.len() - 1];
        (r2.ratio * r1.eps - r1.ratio * r2.eps) / (r1.eps - r2.eps)
    } else {
        rows[0].ratio
    };
    let ratio_rel_err = (extrapolated_ratio - predicted_ratio).norm()
        / predicted_ratio.norm().max(f64::MIN_POSITIVE);
    let slope = loglog_slope(
        &rows.iter().map(|r| r.eps).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.match_error).collect::<Vec<_>>(),
    );
    Ok(LimitStudy {
        params,
        q,
        rows,
        predicted_ratio,
        extrapolated_ratio,
        ratio_rel_err,
        slope,
    })
}

/// Least-squares slope of `log y` against `log x` (NaN if undefined).
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
