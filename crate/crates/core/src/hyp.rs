//! Generalized hypergeometric series `pFq(top; bottom; x)`.
//!
//! Three regimes are handled:
//!
//! * terminating series (a top parameter is `-N`): exactly `N + 1` terms;
//! * `|x| < 1`, or any `x` when `p <= q`: direct summation with a ratio-test
//!   tail majorant that must hold on three consecutive terms;
//! * `x = 1` with `p = q + 1` and positive parametric excess: direct
//!   summation of a block of terms followed by an asymptotic evaluation of
//!   the remaining tail (large-`k` expansion of the term, summed with
//!   Euler-Maclaurin).

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::arith::{binomial, cx, factorial, nonpositive_integer, pochhammer, Cx, IpdSpec};
use crate::error::{Error, Result};

/// Snap tolerance for deciding that a parameter is a non-positive integer.
const TERMINATION_SNAP: f64 = 1e-13;

/// Default relative tolerance used by the identity checks.
pub const DEFAULT_REL_TOL: f64 = 1e-15;

static TERM_CAP: AtomicUsize = AtomicUsize::new(1_000_000);

/// Current cap on the number of series terms.
pub fn term_cap() -> usize {
    TERM_CAP.load(Ordering::Relaxed)
}

/// Overrides the cap on the number of series terms (process wide).
pub fn set_term_cap(cap: usize) {
    TERM_CAP.store(cap.max(16), Ordering::Relaxed);
}

/// Parameters of a `pFq` series. Both rows are stored in a canonical order
/// so that permuting them cannot change the computed value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypSpec {
    top: Vec<Cx>,
    bottom: Vec<Cx>,
    terminating_index: Option<usize>,
}

fn canonical(mut v: Vec<Cx>) -> Vec<Cx> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then_with(|| a.im.total_cmp(&b.im)));
    v
}

impl HypSpec {
    pub fn new(top: Vec<Cx>, bottom: Vec<Cx>) -> Self {
        let top = canonical(top);
        let bottom = canonical(bottom);
        let terminating_index = top
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| nonpositive_integer(a, TERMINATION_SNAP).map(|n| (n, i)))
            .min()
            .map(|(_, i)| i);
        HypSpec {
            top,
            bottom,
            terminating_index,
        }
    }

    pub fn top(&self) -> &[Cx] {
        &self.top
    }

    pub fn bottom(&self) -> &[Cx] {
        &self.bottom
    }

    pub fn terminating_index(&self) -> Option<usize> {
        self.terminating_index
    }

    /// Degree `N` of a terminating series.
    pub fn termination_degree(&self) -> Option<u64> {
        self.terminating_index
            .and_then(|i| nonpositive_integer(self.top[i], TERMINATION_SNAP))
    }

    /// Parametric excess `Σ bottom − Σ top`.
    pub fn excess(&self) -> Cx {
        self.bottom.iter().sum::<Cx>() - self.top.iter().sum::<Cx>()
    }

    fn max_abs_param(&self) -> f64 {
        self.top
            .iter()
            .chain(&self.bottom)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    // t_{k+1} / t_k without the argument factor.
    fn ratio(&self, k: usize) -> Cx {
        let kf = cx(k as f64);
        let mut num = cx(1.0);
        for &a in &self.top {
            num *= a + kf;
        }
        let mut den = cx(k as f64 + 1.0);
        for &b in &self.bottom {
            den *= b + kf;
        }
        num / den
    }

    // A bottom parameter -M with M < N (or any, for a non-terminating
    // series) makes a term divide by zero.
    fn check_bottom_poles(&self) -> Result<()> {
        let n = self.termination_degree();
        for &b in &self.bottom {
            if let Some(mb) = nonpositive_integer(b, TERMINATION_SNAP) {
                match n {
                    Some(n) if mb >= n => {}
                    _ => return Err(Error::BottomPole(b)),
                }
            }
        }
        Ok(())
    }
}

/// Outcome of a series evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub value: Cx,
    pub terms_used: usize,
    pub tail_bound: f64,
    pub converged: bool,
    /// Largest partial-sum magnitude seen; `max_partial / |value|` measures
    /// cancellation.
    pub max_partial: f64,
}

impl EvalReport {
    fn exact(value: Cx, terms_used: usize, max_partial: f64) -> Self {
        EvalReport {
            value,
            terms_used,
            tail_bound: 0.0,
            converged: true,
            max_partial,
        }
    }

    /// Report for a closed-form quantity (no series involved).
    pub fn closed_form(value: Cx) -> Self {
        Self::exact(value, 0, value.norm())
    }

    /// Scales the value by `factor` (error bounds scale along).
    pub fn scaled(self, factor: Cx) -> Self {
        let s = factor.norm();
        EvalReport {
            value: self.value * factor,
            tail_bound: self.tail_bound * s,
            max_partial: self.max_partial * s,
            ..self
        }
    }

    /// Combines two reports whose values are added.
    pub fn plus(self, other: EvalReport) -> Self {
        let value = self.value + other.value;
        EvalReport {
            value,
            terms_used: self.terms_used + other.terms_used,
            tail_bound: self.tail_bound + other.tail_bound,
            converged: self.converged && other.converged,
            max_partial: self.max_partial.max(other.max_partial).max(value.norm()),
        }
    }
}

fn sum_terminating(spec: &HypSpec, x: Cx, n: u64) -> EvalReport {
    let mut term = cx(1.0);
    let mut sum = cx(1.0);
    let mut max_partial = 1.0f64;
    for k in 0..n as usize {
        term *= spec.ratio(k) * x;
        sum += term;
        max_partial = max_partial.max(sum.norm()).max(term.norm());
    }
    EvalReport::exact(sum, n as usize + 1, max_partial)
}

/// Sums a `pFq` series at `x`.
pub fn eval_series(spec: &HypSpec, x: Cx, rel_tol: f64) -> Result<EvalReport> {
    spec.check_bottom_poles()?;
    if let Some(n) = spec.termination_degree() {
        return Ok(sum_terminating(spec, x, n));
    }
    if x == cx(0.0) {
        return Ok(EvalReport::exact(cx(1.0), 1, 1.0));
    }
    let p = spec.top.len();
    let q = spec.bottom.len();
    if p > q + 1 {
        return Err(Error::NonConvergent(format!(
            "{p}F{q} diverges for every x != 0 unless terminating"
        )));
    }
    if p == q + 1 {
        if (x - cx(1.0)).norm() <= 1e-14 {
            return eval_unit(spec, rel_tol);
        }
        if x.norm() >= 1.0 {
            return Err(Error::NonConvergent(format!(
                "|x| = {} >= 1 for a non-terminating {p}F{q}",
                x.norm()
            )));
        }
    }
    let limit_ratio = if p == q + 1 { x.norm() } else { 0.0 };
    let k_min = spec.max_abs_param().ceil() as usize + 2;
    let cap = term_cap();

    let mut term = cx(1.0);
    let mut sum = cx(1.0);
    let mut max_partial = 1.0f64;
    let mut quiet = 0;
    let mut tail = f64::INFINITY;
    let mut k = 0usize;
    while k < cap {
        let r = spec.ratio(k) * x;
        term *= r;
        sum += term;
        k += 1;
        max_partial = max_partial.max(sum.norm()).max(term.norm());
        if !sum.re.is_finite() || !sum.im.is_finite() {
            return Err(Error::NonConvergent("partial sums overflowed".into()));
        }
        if k < k_min {
            continue;
        }
        let rho = spec.ratio(k).norm() * x.norm();
        let rho = rho.max(limit_ratio);
        tail = if rho < 1.0 {
            term.norm() * rho / (1.0 - rho)
        } else {
            f64::INFINITY
        };
        if term.norm() + tail <= rel_tol * sum.norm().max(f64::MIN_POSITIVE) {
            quiet += 1;
            if quiet >= 3 {
                return Ok(EvalReport {
                    value: sum,
                    terms_used: k + 1,
                    tail_bound: tail,
                    converged: true,
                    max_partial,
                });
            }
        } else {
            quiet = 0;
        }
    }
    Ok(EvalReport {
        value: sum,
        terms_used: k + 1,
        tail_bound: tail,
        converged: false,
        max_partial,
    })
}

// Bernoulli numbers B_0..B_24 (B_1 = -1/2).
const BERNOULLI: [f64; 25] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
    0.0,
    7.0 / 6.0,
    0.0,
    -3617.0 / 510.0,
    0.0,
    43867.0 / 798.0,
    0.0,
    -174611.0 / 330.0,
    0.0,
    854513.0 / 138.0,
    0.0,
    -236364091.0 / 2730.0,
];

fn bernoulli_poly(n: usize, z: Cx) -> Cx {
    let mut acc = cx(0.0);
    let mut zp = cx(1.0);
    // Σ_k C(n,k) B_k z^{n-k}, accumulated from k = n down to 0
    for k in (0..=n).rev() {
        acc += cx(binomial(n, k) * BERNOULLI[k]) * zp;
        zp *= z;
    }
    acc
}

/// `Σ_{k>=n} k^{-sigma}` for `Re sigma > 1` and large `n`.
fn hurwitz_tail(sigma: Cx, n: f64) -> Cx {
    let nn = cx(n);
    let mut acc = nn.powc(cx(1.0) - sigma) / (sigma - cx(1.0)) + nn.powc(-sigma) * 0.5;
    for i in 1..=8usize {
        let coeff = BERNOULLI[2 * i] / factorial(2 * i);
        acc += cx(coeff) * pochhammer(sigma, 2 * i - 1) * nn.powc(-sigma - cx((2 * i - 1) as f64));
    }
    acc
}

/// Smallest relative truncation bound the unit-argument tail can certify.
const UNIT_TAIL_FLOOR: f64 = 1e-13;

/// Number of terms in the large-`k` expansion of a unit-argument term.
const TAIL_ORDER: usize = 12;

/// Sums a `pFq` series at `x = 1`.
pub fn eval_unit(spec: &HypSpec, rel_tol: f64) -> Result<EvalReport> {
    spec.check_bottom_poles()?;
    if let Some(n) = spec.termination_degree() {
        return Ok(sum_terminating(spec, cx(1.0), n));
    }
    let p = spec.top.len();
    let q = spec.bottom.len();
    if p <= q {
        return eval_series(spec, cx(1.0), rel_tol);
    }
    if p > q + 1 {
        return Err(Error::NonConvergent(format!("{p}F{q}(1) diverges")));
    }
    let s = spec.excess();
    if s.re <= 0.0 {
        return Err(Error::NonConvergent(format!(
            "parametric excess {s} has non-positive real part"
        )));
    }
    let cap = term_cap();
    let n_block = ((40.0 * (spec.max_abs_param() + 1.0)).ceil() as usize).max(500);
    if n_block >= cap {
        return Err(Error::NonConvergent(format!(
            "term cap {cap} too small for the direct block of {n_block} terms"
        )));
    }

    let mut term = cx(1.0);
    let mut sum = cx(1.0);
    let mut max_partial = 1.0f64;
    for k in 0..n_block - 1 {
        term *= spec.ratio(k);
        sum += term;
        max_partial = max_partial.max(sum.norm()).max(term.norm());
    }
    // term now holds t_{N-1}; advance to t_N, the first tail term.
    let t_n = term * spec.ratio(n_block - 1);
    let n = n_block as f64;

    // ln(t_k) = const − (1+s) ln k + Σ_j e_j k^{-j}
    let mut e = [cx(0.0); TAIL_ORDER];
    for (j, ej) in e.iter_mut().enumerate().skip(1) {
        let mut bsum = cx(0.0);
        for &a in &spec.top {
            bsum += bernoulli_poly(j + 1, a);
        }
        for &b in &spec.bottom {
            bsum -= bernoulli_poly(j + 1, b);
        }
        bsum -= bernoulli_poly(j + 1, cx(1.0));
        let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
        *ej = bsum * (sign / (j * (j + 1)) as f64);
    }
    // exp(Σ e_j u^j) = Σ d_j u^j via d' = e' d
    let mut d = [cx(0.0); TAIL_ORDER];
    d[0] = cx(1.0);
    for k in 1..TAIL_ORDER {
        let mut acc = cx(0.0);
        for j in 1..=k {
            acc += e[j] * d[k - j] * (j as f64);
        }
        d[k] = acc / (k as f64);
    }
    let sigma0 = cx(1.0) + s;
    let mut shape_at_n = cx(0.0);
    for (j, &dj) in d.iter().enumerate() {
        shape_at_n += dj * cx(n).powc(-sigma0 - cx(j as f64));
    }
    let scale = t_n / shape_at_n;
    let mut tail = cx(0.0);
    let mut last = 0.0;
    for (j, &dj) in d.iter().enumerate() {
        let piece = scale * dj * hurwitz_tail(sigma0 + cx(j as f64), n);
        tail += piece;
        last = piece.norm();
    }
    let value = sum + tail;
    max_partial = max_partial.max(value.norm());
    // rounding is reported through max_partial, not the tail bound
    let tail_bound = last;
    Ok(EvalReport {
        value,
        terms_used: n_block,
        tail_bound,
        converged: tail_bound <= rel_tol.max(UNIT_TAIL_FLOOR) * value.norm().max(1.0),
        max_partial,
    })
}

/// Left-hand side `(r+2)F(r+1)(a, b, f+m; c, f | x)`, or the confluent
/// `(r+1)F(r+1)(b, f+m; c, f | x)` when `a` is absent.
pub fn ipd_lhs_spec(a: Option<Cx>, b: Cx, c: Cx, spec: &IpdSpec) -> HypSpec {
    let mut top = Vec::with_capacity(spec.r() + 2);
    top.extend(a);
    top.push(b);
    top.extend(spec.tops());
    let mut bottom = Vec::with_capacity(spec.r() + 1);
    bottom.push(c);
    bottom.extend(spec.f.iter().copied());
    HypSpec::new(top, bottom)
}

pub fn eval_ipd_lhs(
    a: Option<Cx>,
    b: Cx,
    c: Cx,
    spec: &IpdSpec,
    x: Cx,
    rel_tol: f64,
) -> Result<EvalReport> {
    eval_series(&ipd_lhs_spec(a, b, c, spec), x, rel_tol)
}

/// Shorthand: evaluate `pFq(top; bottom; x)` at the default tolerance.
pub fn hyp(top: &[Cx], bottom: &[Cx], x: Cx) -> Result<EvalReport> {
    eval_series(
        &HypSpec::new(top.to_vec(), bottom.to_vec()),
        x,
        DEFAULT_REL_TOL,
    )
}

/// Shorthand: `pFq(top; bottom; 1)`.
pub fn hyp_unit(top: &[Cx], bottom: &[Cx]) -> Result<EvalReport> {
    eval_unit(
        &HypSpec::new(top.to_vec(), bottom.to_vec()),
        DEFAULT_REL_TOL,
    )
}

/// Value of a terminating series at unit argument (Chu–Vandermonde-style
/// finite sums inside the characteristic polynomials).
pub fn terminating_unit(top: &[Cx], bottom: &[Cx]) -> Result<Cx> {
    let spec = HypSpec::new(top.to_vec(), bottom.to_vec());
    if spec.termination_degree().is_none() {
        return Err(Error::Inconsistent(
            "expected a terminating series".to_string(),
        ));
    }
    Ok(eval_unit(&spec, DEFAULT_REL_TOL)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::gamma_ratio;

    fn close(a: Cx, b: Cx, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn binomial_series_closed_form() {
        let a = cx(1.5);
        let x = cx(0.25);
        let r = hyp(&[a], &[], x).unwrap();
        assert!(r.converged);
        assert!(close(r.value, (cx(1.0) - x).powc(-a), 1e-10));
    }

    #[test]
    fn terminating_polynomial() {
        let (b, c, x) = (cx(1.1), cx(2.3), cx(0.7));
        let r = hyp(&[cx(-2.0), b], &[c], x).unwrap();
        let expected = cx(1.0) - cx(2.0) * (b / c) * x
            + pochhammer(cx(-2.0), 2) * pochhammer(b, 2) / (pochhammer(c, 2) * 2.0) * x * x;
        assert!(close(r.value, expected, 1e-14));
        assert_eq!(r.terms_used, 3);
        assert!(r.converged);
    }

    #[test]
    fn termination_ignores_argument_size() {
        let r = hyp(&[cx(-4.0), cx(0.5), cx(1.5)], &[cx(2.5)], cx(7.0)).unwrap();
        assert_eq!(r.terms_used, 5);
        assert!(r.converged);
    }

    #[test]
    fn zero_argument() {
        let r = hyp(&[cx(0.3), cx(2.0)], &[cx(1.7)], cx(0.0)).unwrap();
        assert_eq!(r.value, cx(1.0));
    }

    #[test]
    fn gauss_sum_at_unit_argument() {
        let (a, b, c) = (cx(0.3), cx(0.4), cx(2.0));
        let r = hyp_unit(&[a, b], &[c]).unwrap();
        let g = gamma_ratio(&[c, c - a - b], &[c - a, c - b]).unwrap();
        assert!(close(r.value, g, 1e-12), "{} vs {}", r.value, g);
        assert!(r.converged);
    }

    #[test]
    fn slow_unit_series() {
        // excess 0.2: direct summation alone would need ~10^30 terms
        let (a, b) = (cx(0.9), cx(-0.7));
        let c = a + b + cx(0.2);
        let r = hyp_unit(&[a, b], &[c]).unwrap();
        let g = gamma_ratio(&[c, c - a - b], &[c - a, c - b]).unwrap();
        assert!(close(r.value, g, 1e-11), "{} vs {}", r.value, g);
    }

    #[test]
    fn unit_terminating_examples() {
        let b = cx(0.8);
        let c = cx(2.6);
        let r = hyp_unit(&[cx(-1.0), b], &[c]).unwrap();
        assert!(close(r.value, cx(1.0) - b / c, 1e-15));
        // 3F2(-2,1,1;2,2;1) = 1 - 2/4 + 2/9·... explicit
        let r = hyp_unit(&[cx(-2.0), cx(1.0), cx(1.0)], &[cx(2.0), cx(2.0)]).unwrap();
        let t1 = -2.0 * 1.0 * 1.0 / (2.0 * 2.0);
        let t2 = (-2.0 * -1.0) * (1.0 * 2.0) * (1.0 * 2.0) / ((2.0 * 3.0) * (2.0 * 3.0) * 2.0);
        assert!(close(r.value, cx(1.0 + t1 + t2), 1e-15));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            hyp(&[cx(0.5), cx(0.5)], &[cx(1.5)], cx(1.5)),
            Err(Error::NonConvergent(_))
        ));
        assert!(matches!(
            hyp_unit(&[cx(0.5), cx(0.7)], &[cx(1.0)]),
            Err(Error::NonConvergent(_))
        ));
        assert!(matches!(
            hyp(&[cx(0.5)], &[cx(-2.0)], cx(0.3)),
            Err(Error::BottomPole(_))
        ));
        // terminates before the bottom pole is reached
        assert!(hyp(&[cx(-2.0)], &[cx(-3.0)], cx(0.3)).is_ok());
        assert!(matches!(
            hyp(&[cx(-3.0)], &[cx(-2.0)], cx(0.3)),
            Err(Error::BottomPole(_))
        ));
        assert!(matches!(
            hyp(&[cx(0.1), cx(0.2), cx(0.3)], &[cx(0.4)], cx(0.1)),
            Err(Error::NonConvergent(_))
        ));
    }

    #[test]
    fn confluent_large_argument() {
        // 1F1(a; a; x) = e^x
        let a = cx(1.3);
        for &x in &[cx(15.0), cx(-10.0), Cx::new(3.0, 4.0)] {
            let r = hyp(&[a], &[a], x).unwrap();
            assert!(close(r.value, x.exp(), 1e-9), "{x}");
        }
    }

    #[test]
    fn permutation_is_bit_identical() {
        let x = Cx::new(0.31, -0.2);
        let t = [cx(0.3), Cx::new(1.2, 0.4), cx(-0.77)];
        let b = [cx(1.9), cx(2.2)];
        let r1 = hyp(&t, &b, x).unwrap().value;
        let r2 = hyp(&[t[2], t[0], t[1]], &[b[1], b[0]], x).unwrap().value;
        assert_eq!(r1, r2);
    }

    #[test]
    fn ipd_lhs_is_assembled_series() {
        let spec = IpdSpec::real(&[3.0], &[2]).unwrap();
        let (b, c, x) = (cx(0.7), cx(2.7), cx(0.3));
        let r = eval_ipd_lhs(None, b, c, &spec, x, DEFAULT_REL_TOL).unwrap();
        let by_hand = hyp(&[b, cx(5.0)], &[c, cx(3.0)], x).unwrap();
        assert_eq!(r.value, by_hand.value);
        let r0 = eval_ipd_lhs(
            Some(cx(1.0)),
            b,
            b + cx(2.0),
            &spec,
            cx(0.0),
            DEFAULT_REL_TOL,
        )
        .unwrap();
        assert_eq!(r0.value, cx(1.0));
        // a = -3: four explicit terms
        let a = cx(-3.0);
        let c = cx(1.9);
        let r = eval_ipd_lhs(Some(a), b, c, &spec, x, DEFAULT_REL_TOL).unwrap();
        let mut expected = cx(0.0);
        for k in 0..4 {
            expected += pochhammer(a, k) * pochhammer(b, k) * pochhammer(cx(5.0), k)
                / (pochhammer(c, k) * pochhammer(cx(3.0), k) * factorial(k))
                * x.powu(k as u32);
        }
        assert!(close(r.value, expected, 1e-14));
        assert_eq!(r.terms_used, 4);
    }
}
