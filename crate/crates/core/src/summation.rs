//! Unit-argument results: the generalized Karlsson summation, the two
//! transformations obtained by the beta integral method, their `q = 0`
//! forms, the `pFq(1)` reduction identity and the closed-form sums of the
//! worked examples.

use gauss_quad::GaussJacobi;
use serde::{Deserialize, Serialize};

use crate::arith::{
    cx, distance_to_integer_range, factorial, gamma_ratio, pochhammer, pochhammer_ipd,
    pochhammer_vec, Cx, IpdSpec, INTEGER_SNAP,
};
use crate::charpoly::{
    ipd_exclusion_distance, q0_value, qhat0_value, r_at, r_poly, rhat_at, rhat_poly,
};
use crate::error::{Error, Result};
use crate::hyp::{hyp, hyp_unit, EvalReport};
use crate::poly::roots;
use crate::transforms::{thm1_degenerate, Params, Residual};

/// Unit-argument identities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnitId {
    #[serde(rename = "THM4")]
    Thm4,
    #[serde(rename = "THM5")]
    Thm5,
    #[serde(rename = "THM6")]
    Thm6,
    #[serde(rename = "COR7a")]
    Cor7a,
    #[serde(rename = "COR7b")]
    Cor7b,
    #[serde(rename = "RED_LEMMA")]
    RedLemma,
    #[serde(rename = "EX2")]
    Ex2,
    #[serde(rename = "EX3_SUM")]
    Ex3Sum,
    #[serde(rename = "EX4")]
    Ex4,
}

impl UnitId {
    pub const ALL: &'static [UnitId] = &[
        UnitId::Thm4,
        UnitId::Thm5,
        UnitId::Thm6,
        UnitId::Cor7a,
        UnitId::Cor7b,
        UnitId::RedLemma,
        UnitId::Ex2,
        UnitId::Ex3Sum,
        UnitId::Ex4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            UnitId::Thm4 => "THM4",
            UnitId::Thm5 => "THM5",
            UnitId::Thm6 => "THM6",
            UnitId::Cor7a => "COR7a",
            UnitId::Cor7b => "COR7b",
            UnitId::RedLemma => "RED_LEMMA",
            UnitId::Ex2 => "EX2",
            UnitId::Ex3Sum => "EX3_SUM",
            UnitId::Ex4 => "EX4",
        }
    }
}

impl std::fmt::Display for UnitId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for UnitId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        UnitId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown identity id {s:?}")))
    }
}

fn one() -> Cx {
    cx(1.0)
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn plus(v: &[Cx], s: f64) -> Vec<Cx> {
    v.iter().map(|&z| z + cx(s)).collect()
}

fn with(head: &[Cx], rest: impl IntoIterator<Item = Cx>) -> Vec<Cx> {
    let mut v = head.to_vec();
    v.extend(rest);
    v
}

fn reduced_roots(p: &crate::poly::CPoly) -> Result<Vec<Cx>> {
    if p.is_identically_zero() {
        Ok(vec![])
    } else {
        Ok(roots(p)?.roots)
    }
}

fn require_excess(what: &str, s: Cx) -> Result<()> {
    if s.re <= 0.0 {
        return Err(Error::ConstraintViolation(format!(
            "{what}: parametric excess {s} must have positive real part"
        )));
    }
    Ok(())
}

/// Generalized Karlsson summation for `c = b + m - q`, valid for
/// `Re(a + q) < 0`.
pub fn karlsson_general(a: Cx, b: Cx, spec: &IpdSpec, q: usize) -> Result<Residual> {
    let m = spec.m_total();
    let c = b + cx((m - q) as f64);
    require_excess("generalized Karlsson sum", -a - cx(q as f64))?;
    let lhs = hyp_unit(
        &with(&[a, b], spec.tops()),
        &with(&[c], spec.f.iter().copied()),
    )?;
    let r = r_poly(b, spec, q)?.eval(a);
    let g = gamma_ratio(&[c, one() - a], &[b - a + cx((m - q) as f64)])?;
    let rhs = EvalReport::closed_form(g * r / factorial(m - q - 1));
    Ok(Residual::new(lhs, rhs))
}

/// Terminating transformation for `c = b + m - q` with a top parameter
/// `-n`; both sides are finite sums.
pub fn thomae_like_1(n: usize, b: Cx, d: Cx, e: Cx, spec: &IpdSpec, q: usize) -> Result<Residual> {
    let m = spec.m_total();
    if n == 0 {
        return Err(Error::InvalidSpec("n must be positive".into()));
    }
    let c = b + cx((m - q) as f64);
    let nf = cx(-(n as f64));
    let lhs = hyp_unit(
        &with(&[nf, b, d], spec.tops()),
        &with(&[c, e], spec.f.iter().copied()),
    )?;
    let mut head = cx(0.0);
    for j in 0..=q.min(n) {
        head += pochhammer(nf, j)
            * pochhammer(cx(-(q as f64)), j)
            * pochhammer(d, j)
            * q0_value(b, spec, q, j)?
            / (pochhammer(c, j) * pochhammer(one() + d - e - cx(n as f64), j) * factorial(j));
    }
    let mut rhs = EvalReport::closed_form(head * pochhammer(e - d, n) / pochhammer(e, n));
    let mut tail_bottoms = vec![];
    let rpoly = r_poly(b, spec, q)?;
    if n > q && !rpoly.is_identically_zero() {
        let lambda = reduced_roots(&rpoly)?;
        let coeff = pochhammer(d, q + 1) * sign(q + 1) * pochhammer(nf, q + 1)
            / pochhammer(c, q + 1)
            * pochhammer(e - d, n - q - 1)
            * r_at(b, spec, q)?
            / (pochhammer(e, n) * factorial(m - q - 1));
        let top = with(
            &[
                cx((q + 1) as f64) - cx(n as f64),
                one(),
                d + cx((q + 1) as f64),
            ],
            plus(&lambda, (q + 2) as f64),
        );
        let bottom = with(
            &[
                b + cx((m + 1) as f64),
                cx((q + 2) as f64) + d - e - cx(n as f64),
            ],
            plus(&lambda, (q + 1) as f64),
        );
        rhs = rhs.plus(hyp_unit(&top, &bottom)?.scaled(coeff));
        tail_bottoms = bottom;
    }
    Ok(Residual::new(lhs, rhs).with_roots(&tail_bottoms))
}

/// Unit-argument transformation for `c = a + m - q`.
pub fn thomae_like_2(a: Cx, b: Cx, d: Cx, e: Cx, spec: &IpdSpec, q: usize) -> Result<Residual> {
    let m = spec.m_total();
    let qf = cx(q as f64);
    let c = a + cx((m - q) as f64);
    require_excess("left side", e - b - d - qf)?;
    require_excess("tail series", e - d)?;
    let lhs = hyp_unit(
        &with(&[a, b, d], spec.tops()),
        &with(&[c, e], spec.f.iter().copied()),
    )?;
    let mut head = cx(0.0);
    for j in 0..=q {
        head += pochhammer(-qf, j)
            * pochhammer(a - b - qf, j)
            * pochhammer(d, j)
            * qhat0_value(a, b, spec, q, j)?
            / (pochhammer(c, j) * pochhammer(e - b - qf, j) * factorial(j));
    }
    let g_head = gamma_ratio(&[e, e - b - d - qf], &[e - d, e - b - qf])?;
    let mut rhs = EvalReport::closed_form(g_head * head);
    let mut tail_bottoms = vec![];
    let rpoly = rhat_poly(a, b, spec, q)?;
    if !rpoly.is_identically_zero() {
        let gamma = reduced_roots(&rpoly)?;
        let g_tail = gamma_ratio(&[e, e - b - d - qf], &[e - d, e - b + one()])?;
        let coeff =
            g_tail * pochhammer(b - a, q + 1) * pochhammer(d, q + 1) * rhat_at(a, b, spec, q)?
                / pochhammer(c, q + 1);
        let top = with(
            &[one(), a - b + one(), d + qf + one()],
            plus(&gamma, (q + 2) as f64),
        );
        let bottom = with(
            &[a + cx((m + 1) as f64), e - b + one()],
            plus(&gamma, (q + 1) as f64),
        );
        rhs = rhs.plus(hyp_unit(&top, &bottom)?.scaled(coeff));
        tail_bottoms = bottom;
    }
    Ok(Residual::new(lhs, rhs).with_roots(&tail_bottoms))
}

/// `q = 0` form of the terminating transformation.
pub fn cor7_first(n: usize, b: Cx, d: Cx, e: Cx, spec: &IpdSpec) -> Result<Residual> {
    let m = spec.m_total();
    let nf = cx(-(n as f64));
    let c = b + cx(m as f64);
    let lhs = hyp_unit(
        &with(&[nf, b, d], spec.tops()),
        &with(&[c, e], spec.f.iter().copied()),
    )?
    .scaled(pochhammer(e, n) / pochhammer(e - d, n));
    let w = pochhammer(b, m) / pochhammer_ipd(spec, cx(0.0));
    let lambda = reduced_roots(&r_poly(b, spec, 0)?)?;
    let top = with(&[nf, one(), d], plus(&lambda, 1.0));
    let bottom = with(&[c, one() - e + d - cx(n as f64)], lambda.iter().copied());
    let rhs = EvalReport::closed_form(w).plus(hyp_unit(&top, &bottom)?.scaled(one() - w));
    Ok(Residual::new(lhs, rhs).with_roots(&bottom))
}

/// `q = 0` form of the unit-argument transformation for `c = a + m`.
pub fn cor7_second(a: Cx, b: Cx, d: Cx, e: Cx, spec: &IpdSpec) -> Result<Residual> {
    let m = cx(spec.m_total() as f64);
    require_excess("left side", e - b - d)?;
    require_excess("tail series", e - d)?;
    let pre = gamma_ratio(&[e - d, e - b], &[e - b - d, e])?;
    let lhs = hyp_unit(
        &with(&[a, b, d], spec.tops()),
        &with(&[a + m, e], spec.f.iter().copied()),
    )?
    .scaled(pre);
    let gamma = reduced_roots(&rhat_poly(a, b, spec, 0)?)?;
    let ratio = a * spec.tops().iter().product::<Cx>() / ((a + m) * spec.f.iter().product::<Cx>());
    let top = with(&[one(), a - b + one(), d + one()], plus(&gamma, 2.0));
    let bottom = with(&[a + m + one(), e - b + one()], plus(&gamma, 1.0));
    let coeff = b * d / (e - b) * (ratio - one());
    let rhs = EvalReport::closed_form(one()).plus(hyp_unit(&top, &bottom)?.scaled(coeff));
    Ok(Residual::new(lhs, rhs).with_roots(&bottom))
}

/// `(p+1)F(q+1)(a, 1; b, r | 1)` reduced to `pFq(a-r+1; b-r+1 | 1)` minus
/// its first `r - 1` terms.
pub fn pfq_unit_reduction(top: &[Cx], bottom: &[Cx], r: usize) -> Result<Residual> {
    if r == 0 {
        return Err(Error::InvalidSpec("r must be positive".into()));
    }
    let (p, q) = (top.len(), bottom.len());
    let rf = cx(r as f64);
    let lhs = hyp_unit(&with(top, [one()]), &with(bottom, [rf]))?;
    let shift = |v: &[Cx]| -> Vec<Cx> { v.iter().map(|&z| z - rf + one()).collect() };
    let (ts, bs) = (shift(top), shift(bottom));
    let full = hyp_unit(&ts, &bs)?;
    let mut head = cx(0.0);
    for j in 0..r.saturating_sub(1) {
        head += pochhammer_vec(&ts, j) / (pochhammer_vec(&bs, j) * factorial(j));
    }
    let one_minus = |v: &[Cx]| -> Vec<Cx> { v.iter().map(|&z| one() - z).collect() };
    let exponent = (r - 1) * (p as isize - q as isize).unsigned_abs();
    let pre = pochhammer_vec(&one_minus(bottom), r - 1) * factorial(r - 1)
        / (pochhammer_vec(&one_minus(top), r - 1) * sign(exponent));
    let rhs = full.plus(EvalReport::closed_form(-head)).scaled(pre);
    Ok(Residual::new(lhs, rhs))
}

/// `4F3(a, b, d, f+1; a+1, e, f | 1)` against the general-`e` reduction.
pub fn example2_general(a: Cx, b: Cx, d: Cx, f: Cx, e: Cx) -> Result<Residual> {
    require_excess("left side", e - b - d)?;
    let lhs = hyp_unit(&[a, b, d, f + one()], &[a + one(), e, f])?;
    let k = b * (a - f) / ((a - b) * f);
    let inner = hyp_unit(&[d, a - b, one()], &[a + one(), e - b])?;
    let g = gamma_ratio(&[e, e - b - d], &[e - d, e - b])?;
    let rhs = EvalReport::closed_form(g * (one() - k)).plus(inner.scaled(g * k));
    Ok(Residual::new(lhs, rhs))
}

/// The same sum at `e = b + r`, in closed form.
pub fn example2_chain(a: Cx, b: Cx, d: Cx, f: Cx, r: usize) -> Result<Residual> {
    if r == 0 {
        return Err(Error::InvalidSpec("r must be positive".into()));
    }
    let rf = cx(r as f64);
    let e = b + rf;
    require_excess("left side", rf - d)?;
    let lhs = hyp_unit(&[a, b, d, f + one()], &[a + one(), e, f])?;
    let k = b * (a - f) / ((a - b) * f);
    let mut partial = cx(0.0);
    for j in 0..r - 1 {
        partial += pochhammer(d - rf + one(), j) * pochhammer(a - b - rf + one(), j)
            / (pochhammer(a - rf + cx(2.0), j) * factorial(j));
    }
    let inner =
        gamma_ratio(&[a - rf + cx(2.0), b - d + rf], &[one() - d + a, one() + b])? - partial;
    let fac = sign(r - 1) * pochhammer(-a, r - 1) * factorial(r - 1)
        / (pochhammer(one() - d, r - 1) * pochhammer(one() - a + b, r - 1));
    let g = gamma_ratio(&[b + rf, rf - d], &[b - d + rf, rf])?;
    let rhs = EvalReport::closed_form(g * (one() - k * (one() - fac * inner)));
    Ok(Residual::new(lhs, rhs))
}

/// The reduced root for `r = 1`, `m = 2`, `q = 0` of the second kind.
pub fn example3_gamma(a: Cx, b: Cx, f: Cx) -> Cx {
    let u = (one() + a - b) * (one() + f);
    let v = a * (f - b);
    (u + v) / (u - v)
}

/// Constant of the alternative `q = 0` form for `r = 1`, `m = 2`.
pub fn example3_a(a: Cx, b: Cx, f: Cx) -> Cx {
    (0..=2usize)
        .map(|k| {
            let binom = [1.0, 2.0, 1.0][k];
            cx(binom * sign(k))
                * pochhammer(a, k)
                * pochhammer(b, k)
                * pochhammer(-one() - a, 2 - k)
                / (pochhammer(f, k) * pochhammer(a - b, k) * pochhammer(b - a - one(), 2 - k))
        })
        .sum()
}

/// Closed forms of `4F3(a, b, d, f+2; a+2, e, f | 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ex3Form {
    /// Tail with `(γ+2; γ+1)` and the Γ-ratio prefactor.
    General,
    /// Tail in terms of the constant `A`.
    WithA,
    /// `e = b + 1`, tail summed by Gauss.
    EqualsBPlusOne,
    /// `e = b + 2`, tail summed via the reduction identity.
    EqualsBPlusTwo,
}

pub fn example3_sum(a: Cx, b: Cx, d: Cx, f: Cx, e: Cx, form: Ex3Form) -> Result<Residual> {
    let g = example3_gamma(a, b, f);
    let big_a = example3_a(a, b, f);
    let two = cx(2.0);
    let e = match form {
        Ex3Form::EqualsBPlusOne => b + one(),
        Ex3Form::EqualsBPlusTwo => b + two,
        _ => e,
    };
    require_excess("left side", e - b - d)?;
    let lhs = hyp_unit(&[a, b, d, f + two], &[a + two, e, f])?;
    let rhs = match form {
        Ex3Form::General => {
            let pre = gamma_ratio(&[e, e - b - d], &[e - d, e - b])?;
            let ratio = a * (f + two) / ((a + two) * f);
            let t = hyp_unit(
                &[one(), a - b + one(), d + one(), g + two],
                &[a + cx(3.0), e - b + one(), g + one()],
            )?;
            EvalReport::closed_form(pre).plus(t.scaled(pre * b * d / (e - b) * (ratio - one())))
        }
        Ex3Form::WithA => {
            let pre = gamma_ratio(&[e, e - b - d], &[e - d, e - b])?;
            let t = hyp_unit(&[d, a - b, one(), g + one()], &[a + two, e - b, g])?;
            EvalReport::closed_form(pre * big_a).plus(t.scaled(pre * (one() - big_a)))
        }
        Ex3Form::EqualsBPlusOne => {
            let pre = gamma_ratio(&[b + one(), one() - d], &[e - d])?;
            let gauss = gamma_ratio(&[a + two, b - d + two], &[b + two, a - d + two])?;
            let tail = gauss * (one() - d * (a - b) / (g * (d - b - one())));
            EvalReport::closed_form(pre * (big_a + (one() - big_a) * tail))
        }
        Ex3Form::EqualsBPlusTwo => {
            let pre = gamma_ratio(&[b + two, two - d], &[b - d + two])?;
            let inner = gamma_ratio(&[a + one(), b - d + cx(3.0)], &[b + two, a - d + two])?
                * (one() - (d - one()) * (a - b - one()) / ((g - one()) * (d - b - two)))
                - one();
            let tail = (a + one()) * (g - one()) / (g * (d - one()) * (a - b - one())) * inner;
            EvalReport::closed_form(pre * (big_a + (one() - big_a) * tail))
        }
    };
    Ok(Residual::new(lhs, rhs))
}

/// Reduced root for `m = (1, 1, 2)`, `q = 2`, second kind, as printed with
/// explicit products.
pub fn example4_gamma(a: Cx, b: Cx, f: [Cx; 3]) -> Cx {
    let [f1, f2, f3] = f;
    let p1 = (f1 - a - one()) * (f2 - a - one()) * (f3 - a - one());
    let p2 = (f1 - a) * (f2 - a) * (f3 - a + one());
    (a * p1 - (a + cx(4.0)) * p2) / (a * p1 / (a - b + one()) - p2) - cx(3.0)
}

/// Reduced root for `m = (1, 1, 2)`, `q = 2`, first kind.
pub fn example4_lambda(b: Cx, f: [Cx; 3]) -> Cx {
    let [f1, f2, f3] = f;
    one() + b
        - b * (f1 - b - one()) * (f2 - b - one()) * (f3 - b - one())
            / ((f1 - b) * (f2 - b) * (f3 - b + one()))
}

fn ex4_fm(f: [Cx; 3], s: Cx) -> Cx {
    let [f1, f2, f3] = f;
    (f1 + s) * (f2 + s) * pochhammer(f3 + s, 2)
}

/// `6F5(a, b, d, f1+1, f2+1, f3+2; a+2, e, f1, f2, f3 | 1)` by its
/// explicit closed form.
pub fn example4_unit(a: Cx, b: Cx, d: Cx, e: Cx, f: [Cx; 3]) -> Result<Residual> {
    let [f1, f2, f3] = f;
    let two = cx(2.0);
    require_excess("left side", e - b - d - two)?;
    let lhs = hyp_unit(
        &[a, b, d, f1 + one(), f2 + one(), f3 + two],
        &[a + two, e, f1, f2, f3],
    )?;
    let g_all = gamma_ratio(&[e, e - b - d - two], &[e - d])?;
    let g_head = g_all * gamma_ratio(&[], &[e - b - two])?;
    let mut b1 = cx(0.0);
    for j in 0..=2usize {
        let mut inner = cx(0.0);
        for k in 0..=j {
            let kf = cx(k as f64);
            let fk = hyp_unit(&[-kf, f1 + one(), f2 + one(), f3 + two], &[f1, f2, f3])?.value;
            let f32_ = hyp_unit(
                &[kf - cx(4.0), kf - cx(j as f64), -b - two],
                &[kf - two, a - b - two + kf],
            )?
            .value;
            inner += pochhammer(cx(-(j as f64)), k) * pochhammer(a, k) * pochhammer(b, k)
                / (pochhammer(-two, k) * pochhammer(a - b - two, k) * factorial(k))
                * fk
                * f32_;
        }
        b1 += pochhammer(-two, j) * pochhammer(a - b - two, j) * pochhammer(d, j)
            / (pochhammer(a + two, j) * pochhammer(e - b - two, j) * factorial(j))
            * inner;
    }
    b1 *= g_head;
    let b2 = g_all
        * pochhammer(d, 3)
        * pochhammer(b, 3)
        * ((a + cx(4.0)) * ex4_fm(f, -a) - a * ex4_fm(f, -a - one()))
        / (gamma_ratio(&[e - b + one()], &[])? * pochhammer(a + two, 3) * ex4_fm(f, cx(0.0)));
    let g = example4_gamma(a, b, f);
    let t = hyp_unit(
        &[one(), a - b + one(), d + cx(3.0), g + cx(4.0)],
        &[a + cx(5.0), e - b + one(), g + cx(3.0)],
    )?;
    let rhs = EvalReport::closed_form(b1).plus(t.scaled(-b2));
    Ok(Residual::new(lhs, rhs))
}

/// `e^{-x} 4F4(b, f1+1, f2+1, f3+2; b+2, f1, f2, f3 | x)` by its explicit
/// expansion.
pub fn example4_confluent(b: Cx, f: [Cx; 3], x: Cx) -> Result<Residual> {
    let [f1, f2, f3] = f;
    let two = cx(2.0);
    let lhs = hyp(
        &[b, f1 + one(), f2 + one(), f3 + two],
        &[b + two, f1, f2, f3],
        x,
    )?
    .scaled((-x).exp());
    let big_b = ((b + cx(4.0)) * ex4_fm(f, -b) - b * ex4_fm(f, -b - one()))
        / (pochhammer(b + two, 3) * ex4_fm(f, cx(0.0)));
    let lam = example4_lambda(b, f);
    let mut head = cx(0.0);
    for j in 0..=2usize {
        let jf = cx(j as f64);
        head += (-x).powu(j as u32) / factorial(j)
            * hyp_unit(
                &[-jf, b, f1 + one(), f2 + one(), f3 + two],
                &[b + two, f1, f2, f3],
            )?
            .value;
    }
    let tail = hyp(&[one(), lam + cx(4.0)], &[b + cx(5.0), lam + cx(3.0)], -x)?
        .scaled((-x).powu(3) * big_b);
    Ok(Residual::new(lhs, EvalReport::closed_form(head).plus(tail)))
}

/// Nodes of the Gauss–Jacobi rule used by the beta-integral cross-check.
pub const BETA_NODES: usize = 64;

/// The terminating transformation re-derived by integrating the degenerate
/// Euler–Pfaff identity (with `a = -n`) against the beta kernel
/// `x^{d-1} (1-x)^{e-d-1}` by Gauss–Jacobi quadrature. Returns the
/// quadrature value and the closed right side of the transformation.
pub fn beta_cross_check(
    n: usize,
    b: Cx,
    d: f64,
    e: f64,
    spec: &IpdSpec,
    q: usize,
) -> Result<Residual> {
    if !(d > 0.0 && e - d > 0.0) {
        return Err(Error::ConstraintViolation(
            "beta kernel needs d > 0 and e - d > 0".into(),
        ));
    }
    if n <= q {
        return Err(Error::ConstraintViolation(
            "every series on the right must terminate on [0, 1]: need n > q".into(),
        ));
    }
    let alpha = e - d - 1.0;
    let beta = d - 1.0;
    let rule = GaussJacobi::new(BETA_NODES, alpha, beta)
        .map_err(|err| Error::InvalidSpec(format!("quadrature rule: {err}")))?;
    let a = cx(-(n as f64));
    let mut acc = cx(0.0);
    let mut mag = 0.0f64;
    for &(s, w) in rule.as_node_weight_pairs() {
        let x = 0.5 * (1.0 + s);
        // (1-x)^n times the right side of the degenerate identity is a
        // polynomial in x
        let r = thm1_degenerate(a, b, spec, q, cx(x))?;
        let h = r.rhs * (1.0 - x).powi(n as i32);
        acc += h * w;
        mag = mag.max((h * w).norm());
    }
    let norm = 2f64.powf(-alpha - beta - 1.0);
    let beta_fn = gamma_ratio(&[cx(d), cx(e - d)], &[cx(e)])?;
    let quad = acc * norm / beta_fn;
    let closed = thomae_like_1(n, b, cx(d), cx(e), spec, q)?;
    let mut lhs = EvalReport::closed_form(quad);
    lhs.max_partial = mag * norm / beta_fn.norm();
    Ok(Residual::new(lhs, closed.rhs_report))
}

/// A fully specified unit-argument identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitCase {
    pub id: UnitId,
    pub params: Params,
    /// Integer `r` of the reduction identity, or the offset `e - b` of the
    /// closed-form example sums (absent for general `e`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_int: Option<usize>,
    pub spec: IpdSpec,
    pub tol: f64,
}

fn nonpositive_distance(z: Cx) -> f64 {
    distance_to_integer_range(z, -1_000_000, 0)
}

fn poch_zero_distance(z: Cx, n: usize) -> f64 {
    if n == 0 {
        f64::INFINITY
    } else {
        distance_to_integer_range(z, 1 - n as i64, 0)
    }
}

fn integer_distance(z: Cx) -> f64 {
    distance_to_integer_range(z, -1_000_000, 1_000_000)
}

impl UnitCase {
    pub fn new(
        id: UnitId,
        params: Params,
        r_int: Option<usize>,
        spec: IpdSpec,
        tol: f64,
    ) -> Result<Self> {
        let case = UnitCase {
            id,
            params,
            r_int,
            spec,
            tol,
        };
        for (name, dist) in case.constraints()? {
            if dist <= INTEGER_SNAP {
                return Err(Error::ConstraintViolation(format!("{}: {name}", case.id)));
            }
        }
        Ok(case)
    }

    fn need(&self, v: Option<Cx>, name: &str) -> Result<Cx> {
        v.ok_or_else(|| Error::InvalidSpec(format!("{}: parameter {name} is required", self.id)))
    }

    fn need_n(&self) -> Result<usize> {
        match self.params.n {
            Some(n) if n >= 1 => Ok(n),
            _ => Err(Error::InvalidSpec(format!(
                "{}: n >= 1 is required",
                self.id
            ))),
        }
    }

    fn need_r(&self) -> Result<usize> {
        match self.r_int {
            Some(r) if r >= 1 => Ok(r),
            _ => Err(Error::InvalidSpec(format!(
                "{}: r >= 1 is required",
                self.id
            ))),
        }
    }

    fn shape(&self, m: &[usize]) -> Result<()> {
        if self.spec.m != m {
            return Err(Error::InvalidSpec(format!("{} needs m = {m:?}", self.id)));
        }
        Ok(())
    }

    /// Effective `q`.
    pub fn q(&self) -> Result<usize> {
        let m = self.spec.m_total();
        let q = match self.id {
            UnitId::Cor7a | UnitId::Cor7b => 0,
            UnitId::Thm4 | UnitId::Thm5 | UnitId::Thm6 => self
                .params
                .q
                .ok_or_else(|| Error::InvalidSpec(format!("{}: q is required", self.id)))?,
            _ => 0,
        };
        if q >= m {
            return Err(Error::InvalidSpec(format!("q = {q} must be below m = {m}")));
        }
        Ok(q)
    }

    /// Hypotheses as `(description, distance to the excluded set)`;
    /// convergence conditions report the real part of the excess.
    pub fn constraints(&self) -> Result<Vec<(&'static str, f64)>> {
        let m = self.spec.m_total();
        let b = self.params.b;
        let mut out = Vec::new();
        match self.id {
            UnitId::Thm4 => {
                let q = self.q()?;
                let a = self.need(self.params.a, "a")?;
                out.push(("Re(a+q) must be negative", -(a.re + q as f64)));
                out.push((
                    "b+m-q is a non-positive integer",
                    nonpositive_distance(b + cx((m - q) as f64)),
                ));
                out.push((
                    "f_j - b hits an excluded integer",
                    ipd_exclusion_distance(&self.spec, b, q),
                ));
            }
            UnitId::Thm5 | UnitId::Cor7a => {
                let q = self.q()?;
                let n = self.need_n()?;
                let d = self.need(self.params.d, "d")?;
                let e = self.need(self.params.e, "e")?;
                out.push((
                    "b+m-q is a non-positive integer",
                    nonpositive_distance(b + cx((m - q) as f64)),
                ));
                out.push((
                    "f_j - b hits an excluded integer",
                    ipd_exclusion_distance(&self.spec, b, q),
                ));
                out.push(("(e)_n vanishes", poch_zero_distance(e, n)));
                out.push(("d - e is an integer", integer_distance(d - e)));
            }
            UnitId::Thm6 | UnitId::Cor7b => {
                let q = self.q()?;
                let a = self.need(self.params.a, "a")?;
                let d = self.need(self.params.d, "d")?;
                let e = self.need(self.params.e, "e")?;
                let qf = cx(q as f64);
                out.push(("Re(e-b-d-q) must be positive", (e - b - d - qf).re));
                out.push(("Re(e-d) must be positive", (e - d).re));
                out.push((
                    "a+m-q is a non-positive integer",
                    nonpositive_distance(a + cx((m - q) as f64)),
                ));
                out.push((
                    "a-b lies in {q+1-m, ..., q}",
                    distance_to_integer_range(a - b, q as i64 + 1 - m as i64, q as i64),
                ));
                out.push((
                    "f_j - a hits an excluded integer",
                    ipd_exclusion_distance(&self.spec, a, q),
                ));
                out.push((
                    "e-b-q is a non-positive integer",
                    nonpositive_distance(e - b - qf),
                ));
                out.push(("e is a non-positive integer", nonpositive_distance(e)));
            }
            UnitId::RedLemma => {
                let r = self.need_r()?;
                let a = self.need(self.params.a, "a")?;
                let e = self.need(self.params.e, "e")?;
                let rf = cx(r as f64);
                out.push((
                    "Re(e+r-a-b-1) must be positive",
                    (e + rf - a - b - cx(1.0)).re,
                ));
                out.push((
                    "e-r+1 is a non-positive integer",
                    nonpositive_distance(e - rf + cx(1.0)),
                ));
                out.push((
                    "(1-a)_{r-1} vanishes",
                    poch_zero_distance(cx(1.0) - a, r - 1),
                ));
                out.push((
                    "(1-b)_{r-1} vanishes",
                    poch_zero_distance(cx(1.0) - b, r - 1),
                ));
            }
            UnitId::Ex2 => {
                self.shape(&[1])?;
                let a = self.need(self.params.a, "a")?;
                let d = self.need(self.params.d, "d")?;
                let f = self.spec.f[0];
                out.push(("a = b", (a - b).norm()));
                out.push((
                    "a+1 is a non-positive integer",
                    nonpositive_distance(a + cx(1.0)),
                ));
                out.push(("f is zero", f.norm()));
                match self.r_int {
                    Some(r) => {
                        out.push(("Re(r-d) must be positive", r as f64 - d.re));
                        out.push((
                            "(1-d)_{r-1} vanishes",
                            poch_zero_distance(cx(1.0) - d, r.max(1) - 1),
                        ));
                        out.push(("a-b is an integer", integer_distance(a - b)));
                        out.push(("a is an integer", integer_distance(a)));
                    }
                    None => {
                        let e = self.need(self.params.e, "e")?;
                        out.push(("Re(e-b-d) must be positive", (e - b - d).re));
                        out.push(("e-b is a non-positive integer", nonpositive_distance(e - b)));
                    }
                }
            }
            UnitId::Ex3Sum => {
                self.shape(&[2])?;
                let a = self.need(self.params.a, "a")?;
                let d = self.need(self.params.d, "d")?;
                let f = self.spec.f[0];
                out.push((
                    "a-b lies in {-1, 0}",
                    distance_to_integer_range(a - b, -1, 0),
                ));
                out.push((
                    "a+2 is a non-positive integer",
                    nonpositive_distance(a + cx(2.0)),
                ));
                out.push((
                    "gamma is a non-positive integer",
                    nonpositive_distance(example3_gamma(a, b, f)),
                ));
                match self.r_int {
                    Some(r) => {
                        out.push(("Re(r-d) must be positive", r as f64 - d.re));
                        out.push(("d is an integer", integer_distance(d)));
                        out.push(("a-b is an integer", integer_distance(a - b)));
                    }
                    None => {
                        let e = self.need(self.params.e, "e")?;
                        out.push(("Re(e-b-d) must be positive", (e - b - d).re));
                        out.push(("e-b is a non-positive integer", nonpositive_distance(e - b)));
                    }
                }
            }
            UnitId::Ex4 => {
                self.shape(&[1, 1, 2])?;
                let a = self.need(self.params.a, "a")?;
                let d = self.need(self.params.d, "d")?;
                let e = self.need(self.params.e, "e")?;
                out.push(("Re(e-b-d-2) must be positive", (e - b - d - cx(2.0)).re));
                out.push((
                    "a-b lies in {-1, 0, 1, 2}",
                    distance_to_integer_range(a - b, -1, 2),
                ));
                out.push((
                    "a+2 is a non-positive integer",
                    nonpositive_distance(a + cx(2.0)),
                ));
                out.push((
                    "f_j - a hits an excluded integer",
                    ipd_exclusion_distance(&self.spec, a, 2),
                ));
                out.push((
                    "e-b-2 is a non-positive integer",
                    nonpositive_distance(e - b - cx(2.0)),
                ));
            }
        }
        Ok(out)
    }

    pub fn guard_distance(&self) -> Result<f64> {
        Ok(self
            .constraints()?
            .iter()
            .map(|(_, d)| *d)
            .fold(f64::INFINITY, f64::min))
    }

    pub fn evaluate(&self) -> Result<Residual> {
        let p = &self.params;
        let spec = &self.spec;
        let b = p.b;
        match self.id {
            UnitId::Thm4 => karlsson_general(self.need(p.a, "a")?, b, spec, self.q()?),
            UnitId::Thm5 => thomae_like_1(
                self.need_n()?,
                b,
                self.need(p.d, "d")?,
                self.need(p.e, "e")?,
                spec,
                self.q()?,
            ),
            UnitId::Thm6 => thomae_like_2(
                self.need(p.a, "a")?,
                b,
                self.need(p.d, "d")?,
                self.need(p.e, "e")?,
                spec,
                self.q()?,
            ),
            UnitId::Cor7a => cor7_first(
                self.need_n()?,
                b,
                self.need(p.d, "d")?,
                self.need(p.e, "e")?,
                spec,
            ),
            UnitId::Cor7b => cor7_second(
                self.need(p.a, "a")?,
                b,
                self.need(p.d, "d")?,
                self.need(p.e, "e")?,
                spec,
            ),
            UnitId::RedLemma => pfq_unit_reduction(
                &[self.need(p.a, "a")?, b],
                &[self.need(p.e, "e")?],
                self.need_r()?,
            ),
            UnitId::Ex2 => {
                let (a, d, f) = (self.need(p.a, "a")?, self.need(p.d, "d")?, spec.f[0]);
                match self.r_int {
                    Some(r) => example2_chain(a, b, d, f, r),
                    None => example2_general(a, b, d, f, self.need(p.e, "e")?),
                }
            }
            UnitId::Ex3Sum => {
                let (a, d, f) = (self.need(p.a, "a")?, self.need(p.d, "d")?, spec.f[0]);
                let (form, e) = match self.r_int {
                    None => (Ex3Form::General, self.need(p.e, "e")?),
                    Some(1) => (Ex3Form::EqualsBPlusOne, b + cx(1.0)),
                    Some(2) => (Ex3Form::EqualsBPlusTwo, b + cx(2.0)),
                    Some(r) => {
                        return Err(Error::InvalidSpec(format!(
                            "EX3_SUM has closed forms for e-b in {{1, 2}}, not {r}"
                        )))
                    }
                };
                example3_sum(a, b, d, f, e, form)
            }
            UnitId::Ex4 => example4_unit(
                self.need(p.a, "a")?,
                b,
                self.need(p.d, "d")?,
                self.need(p.e, "e")?,
                [spec.f[0], spec.f[1], spec.f[2]],
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec12() -> IpdSpec {
        IpdSpec::real(&[1.3, 2.7], &[1, 2]).unwrap()
    }

    #[test]
    fn karlsson_all_q() {
        let spec = spec12();
        let b = cx(0.45);
        for q in 0..3 {
            let a = cx(-0.9 - q as f64);
            let r = karlsson_general(a, b, &spec, q).unwrap();
            assert!(r.rel_err < 1e-9, "q={q}: {}", r.rel_err);
        }
        let r =
            karlsson_general(cx(-1.5), cx(0.7), &IpdSpec::real(&[2.3], &[2]).unwrap(), 0).unwrap();
        assert!(r.rel_err < 1e-9);
    }

    #[test]
    fn terminating_transformation() {
        let spec = spec12();
        let (b, d, e) = (cx(0.45), cx(0.8), cx(2.3));
        for q in 0..3 {
            for n in [1, 2, 4, 6] {
                let r = thomae_like_1(n, b, d, e, &spec, q).unwrap();
                assert!(r.rel_err < 1e-12, "q={q} n={n}: {}", r.rel_err);
            }
        }
    }

    #[test]
    fn unit_transformation() {
        let spec = spec12();
        let (a, b, d, e) = (cx(0.35), cx(0.45), cx(0.6), cx(5.3));
        for q in 0..3 {
            let r = thomae_like_2(a, b, d, e, &spec, q).unwrap();
            assert!(r.rel_err < 1e-9, "q={q}: {}", r.rel_err);
        }
    }

    #[test]
    fn q0_forms() {
        let spec = spec12();
        let b = cx(0.45);
        for n in [1, 3] {
            let r = cor7_first(n, b, cx(0.8), cx(2.3), &spec).unwrap();
            assert!(r.rel_err < 1e-12);
        }
        let r = cor7_second(cx(0.35), b, cx(0.6), cx(5.3), &spec).unwrap();
        assert!(r.rel_err < 1e-9, "{}", r.rel_err);
    }

    #[test]
    fn reduction_identity() {
        let top = [cx(0.3), cx(0.8)];
        let bottom = [cx(2.9)];
        for r in 1..=3 {
            let res = pfq_unit_reduction(&top, &bottom, r).unwrap();
            assert!(res.rel_err < 1e-9, "r={r}: {}", res.rel_err);
        }
    }

    #[test]
    fn example_two() {
        let (a, b, d, f) = (cx(0.4), cx(0.7), cx(0.3), cx(1.6));
        assert!(example2_general(a, b, d, f, cx(2.9)).unwrap().rel_err < 1e-9);
        for r in 1..=3 {
            let res = example2_chain(a, b, d, f, r).unwrap();
            assert!(res.rel_err < 1e-9, "r={r}: {}", res.rel_err);
        }
    }

    #[test]
    fn example_three() {
        let (a, b, f) = (cx(0.35), cx(0.6), cx(1.7));
        for (form, d, e) in [
            (Ex3Form::General, 0.5, 3.9),
            (Ex3Form::WithA, 0.5, 3.9),
            (Ex3Form::EqualsBPlusOne, 0.3, 0.0),
            (Ex3Form::EqualsBPlusTwo, 0.3, 0.0),
        ] {
            let r = example3_sum(a, b, cx(d), f, cx(e), form).unwrap();
            assert!(r.rel_err < 1e-9, "{form:?}: {}", r.rel_err);
        }
    }

    #[test]
    fn example_four() {
        let f = [cx(1.3), cx(2.1), cx(2.7)];
        let r = example4_confluent(cx(0.45), f, cx(0.6)).unwrap();
        assert!(r.rel_err < 1e-12, "{}", r.rel_err);
        let r = example4_unit(cx(0.35), cx(0.45), cx(0.6), cx(6.3), f).unwrap();
        assert!(r.rel_err < 1e-9, "{}", r.rel_err);
    }

    #[test]
    fn beta_method() {
        let spec = spec12();
        for q in 0..3 {
            let r = beta_cross_check(4, cx(0.45), 0.8, 2.3, &spec, q).unwrap();
            assert!(r.rel_err < 1e-10, "q={q}: {}", r.rel_err);
        }
    }
}
