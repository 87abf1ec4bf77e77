//! Finite-argument identities: the classical Miller–Paris transformations,
//! their degenerate limits, the `q = 0, m-2, m-1` corollaries and the
//! `r = m = 1` warm-up identities.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{
    cx, distance_to_integer_range, factorial, pochhammer, pochhammer_ipd, Cx, IpdSpec, INTEGER_SNAP,
};
use crate::charpoly::{
    ckr_all, ipd_exclusion_distance, q0_value, qhat0_value, qm_poly, qmhat_poly, r_at, r_poly,
    rhat_at, rhat_poly, DUAL_FORM_TOL,
};
use crate::error::{Error, Result};
use crate::hyp::{eval_ipd_lhs, hyp, EvalReport, DEFAULT_REL_TOL};
use crate::poly::{roots, CPoly};

macro_rules! identity_ids {
    ($($variant:ident => $name:literal),* $(,)?) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum IdentityId {
            $(#[serde(rename = $name)] $variant,)*
        }

        impl IdentityId {
            pub const ALL: &'static [IdentityId] = &[$(IdentityId::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(IdentityId::$variant => $name,)*
                }
            }
        }

        impl FromStr for IdentityId {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_uppercase().as_str() {
                    $(n if n == $name.to_ascii_uppercase() => Ok(IdentityId::$variant),)*
                    _ => Err(Error::InvalidSpec(format!("unknown identity id {s:?}"))),
                }
            }
        }
    };
}

identity_ids! {
    Mp1 => "MP1",
    Mp2 => "MP2",
    Mp3 => "MP3",
    Thm1 => "THM1",
    Thm2 => "THM2",
    Thm3 => "THM3",
    Cor1a => "COR1a",
    Cor1b => "COR1b",
    Cor2 => "COR2",
    Cor2Alt => "COR2alt",
    Cor3a => "COR3a",
    Cor3b => "COR3b",
    Cor4 => "COR4",
    Cor5a => "COR5a",
    Cor5b => "COR5b",
    Cor6 => "COR6",
    IntroA => "INTRO_A",
    IntroB => "INTRO_B",
    LimitM1 => "LIMIT_M1",
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl IdentityId {
    /// Identities whose left side has no `a` parameter.
    pub fn is_confluent(self) -> bool {
        matches!(
            self,
            IdentityId::Mp2
                | IdentityId::Thm2
                | IdentityId::Cor1b
                | IdentityId::Cor3b
                | IdentityId::Cor5b
        )
    }

    /// Identities whose construction fixes `q` (and thereby `c`).
    pub fn fixed_q(self, m: usize) -> Option<usize> {
        use IdentityId::*;
        match self {
            Cor1a | Cor1b | Cor2 | Cor2Alt => Some(0),
            Cor3a | Cor3b | Cor4 => Some(m.saturating_sub(1)),
            Cor5a | Cor5b | Cor6 => Some(m.saturating_sub(2)),
            _ => None,
        }
    }
}

/// Named scalar parameters of an identity; which ones are used depends on
/// the identity.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Cx>,
    pub b: Cx,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<Cx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Cx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<Cx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

/// Outcome of evaluating both sides of an identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub lhs: Cx,
    pub rhs: Cx,
    pub abs_err: f64,
    pub rel_err: f64,
    pub lhs_report: EvalReport,
    pub rhs_report: EvalReport,
    /// Smallest distance of a root-derived bottom parameter to a pole.
    pub root_pole_distance: f64,
}

impl Residual {
    pub fn new(lhs: EvalReport, rhs: EvalReport) -> Self {
        let abs_err = (lhs.value - rhs.value).norm();
        let rel_err = abs_err / lhs.value.norm().max(rhs.value.norm()).max(1.0);
        Residual {
            lhs: lhs.value,
            rhs: rhs.value,
            abs_err,
            rel_err,
            lhs_report: lhs,
            rhs_report: rhs,
            root_pole_distance: f64::INFINITY,
        }
    }

    pub(crate) fn with_roots(mut self, bottoms: &[Cx]) -> Self {
        self.root_pole_distance = bottoms
            .iter()
            .map(|&z| nonpositive_distance(z))
            .fold(f64::INFINITY, f64::min);
        self
    }

    pub fn converged(&self) -> bool {
        self.lhs_report.converged && self.rhs_report.converged
    }

    /// Largest ratio of a partial sum to the final value on either side.
    pub fn cancellation(&self) -> f64 {
        let c = |r: &EvalReport| r.max_partial / r.value.norm().max(f64::MIN_POSITIVE);
        c(&self.lhs_report).max(c(&self.rhs_report))
    }
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

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn one() -> Cx {
    cx(1.0)
}

fn plus(v: &[Cx], s: f64) -> Vec<Cx> {
    v.iter().map(|&z| z + cx(s)).collect()
}

fn y_of(x: Cx) -> Cx {
    x / (x - one())
}

/// `(1 - x)^p` on the principal branch.
fn one_minus_pow(x: Cx, p: Cx) -> Cx {
    if p == cx(0.0) {
        return one();
    }
    (one() - x).powc(p)
}

/// Roots of a reduced polynomial; an identically zero polynomial has no
/// usable roots and the caller drops the term it multiplies.
fn reduced_roots(p: &CPoly) -> Result<Vec<Cx>> {
    if p.is_identically_zero() {
        Ok(vec![])
    } else {
        Ok(roots(p)?.roots)
    }
}

fn lhs_series(a: Option<Cx>, b: Cx, c: Cx, spec: &IpdSpec, x: Cx) -> Result<EvalReport> {
    eval_ipd_lhs(a, b, c, spec, x, DEFAULT_REL_TOL)
}

/// Classical Miller–Paris transformation of Euler–Pfaff type.
pub fn mp_first(a: Cx, b: Cx, c: Cx, spec: &IpdSpec, x: Cx) -> Result<Residual> {
    let m = spec.m_total() as f64;
    let zeta = roots(&qm_poly(b, c, spec)?)?.roots;
    let lhs = lhs_series(Some(a), b, c, spec, x)?;
    let mut top = vec![a, c - b - cx(m)];
    top.extend(plus(&zeta, 1.0));
    let mut bottom = vec![c];
    bottom.extend(zeta.iter().copied());
    let rhs = hyp(&top, &bottom, y_of(x))?.scaled(one_minus_pow(x, -a));
    Ok(Residual::new(lhs, rhs).with_roots(&zeta))
}

/// Classical Miller–Paris transformation of Kummer type.
pub fn mp_kummer(b: Cx, c: Cx, spec: &IpdSpec, x: Cx) -> Result<Residual> {
    let m = spec.m_total() as f64;
    let zeta = roots(&qm_poly(b, c, spec)?)?.roots;
    let lhs = lhs_series(None, b, c, spec, x)?;
    let mut top = vec![c - b - cx(m)];
    top.extend(plus(&zeta, 1.0));
    let mut bottom = vec![c];
    bottom.extend(zeta.iter().copied());
    let rhs = hyp(&top, &bottom, -x)?.scaled(x.exp());
    Ok(Residual::new(lhs, rhs).with_roots(&zeta))
}

/// Classical Miller–Paris transformation of second-Euler type.
pub fn mp_second(a: Cx, b: Cx, c: Cx, spec: &IpdSpec, x: Cx) -> Result<Residual> {
    let m = cx(spec.m_total() as f64);
    let eta = roots(&qmhat_poly(a, b, c, spec)?)?.roots;
    let lhs = lhs_series(Some(a), b, c, spec, x)?;
    let mut top = vec![c - a - m, c - b - m];
    top.extend(plus(&eta, 1.0));
    let mut bottom = vec![c];
    bottom.extend(eta.iter().copied());
    let rhs = hyp(&top, &bottom, x)?.scaled(one_minus_pow(x, c - a - b - m));
    Ok(Residual::new(lhs, rhs).with_roots(&eta))
}

/// Degenerate Euler–Pfaff type transformation, `c = b + m - q`.
pub fn thm1_degenerate(a: Cx, b: Cx, spec: &IpdSpec, q: usize, x: Cx) -> Result<Residual> {
    let m = spec.m_total();
    let c = b + cx((m - q) as f64);
    let y = y_of(x);
    let lhs = lhs_series(Some(a), b, c, spec, x)?.scaled(one_minus_pow(x, a));
    let mut head = cx(0.0);
    for j in 0..=q {
        head += pochhammer(a, j) * pochhammer(cx(-(q as f64)), j) * q0_value(b, spec, q, j)?
            / (pochhammer(c, j) * factorial(j))
            * y.powu(j as u32);
    }
    let rpoly = r_poly(b, spec, q)?;
    let lambda = reduced_roots(&rpoly)?;
    let mut rhs = EvalReport::closed_form(head);
    if !rpoly.is_identically_zero() {
        let coeff = y.powu((q + 1) as u32) * pochhammer(a, q + 1) * r_at(b, spec, q)?
            / (pochhammer(c, q + 1) * factorial(m - q - 1));
        let mut top = vec![one(), a + cx((q + 1) as f64)];
        top.extend(plus(&lambda, (q + 2) as f64));
        let mut bottom = vec![b + cx((m + 1) as f64)];
        bottom.extend(plus(&lambda, (q + 1) as f64));
        rhs = rhs.plus(hyp(&top, &bottom, y)?.scaled(coeff));
    }
    Ok(Residual::new(lhs, rhs).with_roots(&plus(&lambda, (q + 1) as f64)))
}

/// Degenerate Kummer type transformation, `c = b + m - q`.
pub fn thm2_degenerate_kummer(b: Cx, spec: &IpdSpec, q: usize, x: Cx) -> Result<Residual> {
    let m = spec.m_total();
    let c = b + cx((m - q) as f64);
    let lhs = lhs_series(None, b, c, spec, x)?.scaled((-x).exp());
    let mut head = cx(0.0);
    for j in 0..=q {
        head += pochhammer(cx(-(q as f64)), j) * q0_value(b, spec, q, j)?
            / (pochhammer(c, j) * factorial(j))
            * (-x).powu(j as u32);
    }
    let rpoly = r_poly(b, spec, q)?;
    let lambda = reduced_roots(&rpoly)?;
    let mut rhs = EvalReport::closed_form(head);
    if !rpoly.is_identically_zero() {
        let coeff = (-x).powu((q + 1) as u32) * r_at(b, spec, q)?
            / (pochhammer(c, q + 1) * factorial(m - q - 1));
        let mut top = vec![one()];
        top.extend(plus(&lambda, (q + 2) as f64));
        let mut bottom = vec![b + cx((m + 1) as f64)];
        bottom.extend(plus(&lambda, (q + 1) as f64));
        rhs = rhs.plus(hyp(&top, &bottom, -x)?.scaled(coeff));
    }
    Ok(Residual::new(lhs, rhs).with_roots(&plus(&lambda, (q + 1) as f64)))
}

/// Degenerate second-Euler type transformation, `c = a + m - q`.
pub fn thm3_degenerate(a: Cx, b: Cx, spec: &IpdSpec, q: usize, x: Cx) -> Result<Residual> {
    let m = spec.m_total();
    let qf = cx(q as f64);
    let c = a + cx((m - q) as f64);
    let lhs = lhs_series(Some(a), b, c, spec, x)?.scaled(one_minus_pow(x, b + qf));
    let mut head = cx(0.0);
    for j in 0..=q {
        head += pochhammer(-qf, j) * pochhammer(a - b - qf, j) * qhat0_value(a, b, spec, q, j)?
            / (pochhammer(c, j) * factorial(j))
            * x.powu(j as u32);
    }
    let rpoly = rhat_poly(a, b, spec, q)?;
    let gamma = reduced_roots(&rpoly)?;
    let mut rhs = EvalReport::closed_form(head);
    if !rpoly.is_identically_zero() {
        let coeff = x.powu((q + 1) as u32) * rhat_at(a, b, spec, q)? * pochhammer(b - a, q + 1)
            / pochhammer(c, q + 1);
        let mut top = vec![one(), a - b + one()];
        top.extend(plus(&gamma, (q + 2) as f64));
        let mut bottom = vec![a + cx((m + 1) as f64)];
        bottom.extend(plus(&gamma, (q + 1) as f64));
        rhs = rhs.plus(hyp(&top, &bottom, x)?.scaled(coeff));
    }
    Ok(Residual::new(lhs, rhs).with_roots(&plus(&gamma, (q + 1) as f64)))
}

/// Variants of the corollaries: which theorem they specialize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    First,
    Kummer,
    Second,
    SecondAlt,
}

fn need_a(a: Option<Cx>) -> Result<Cx> {
    a.ok_or_else(|| Error::InvalidSpec("parameter a is required".into()))
}

fn partial_alternating(b: Cx, ck: &[Cx], j: usize) -> Cx {
    (0..=j).map(|k| pochhammer(b, k) * ck[k] * sign(k)).sum()
}

/// The `q = 0` corollaries.
pub fn cor_q0(a: Option<Cx>, b: Cx, spec: &IpdSpec, x: Cx, variant: Variant) -> Result<Residual> {
    let m = spec.m_total();
    let mf = cx(m as f64);
    let fm = pochhammer_ipd(spec, cx(0.0));
    match variant {
        Variant::First | Variant::Kummer => {
            let c = b + mf;
            let w = pochhammer(b, m) / fm;
            let lambda = reduced_roots(&r_poly(b, spec, 0)?)?;
            let (lhs, tail) = if variant == Variant::First {
                let a = need_a(a)?;
                let lhs = lhs_series(Some(a), b, c, spec, x)?.scaled(one_minus_pow(x, a));
                let mut top = vec![one(), a];
                top.extend(plus(&lambda, 1.0));
                let mut bottom = vec![c];
                bottom.extend(lambda.iter().copied());
                (lhs, hyp(&top, &bottom, y_of(x))?)
            } else {
                let lhs = lhs_series(None, b, c, spec, x)?.scaled((-x).exp());
                let mut top = vec![one()];
                top.extend(plus(&lambda, 1.0));
                let mut bottom = vec![c];
                bottom.extend(lambda.iter().copied());
                (lhs, hyp(&top, &bottom, -x)?)
            };
            let rhs = EvalReport::closed_form(w).plus(tail.scaled(one() - w));
            Ok(Residual::new(lhs, rhs).with_roots(&lambda))
        }
        Variant::Second | Variant::SecondAlt => {
            let a = need_a(a)?;
            let c = a + mf;
            let gamma = reduced_roots(&rhat_poly(a, b, spec, 0)?)?;
            let lhs = lhs_series(Some(a), b, c, spec, x)?.scaled(one_minus_pow(x, b));
            let rhs = if variant == Variant::Second {
                let ratio = a * spec.tops().iter().product::<Cx>()
                    / ((a + mf) * spec.f.iter().product::<Cx>());
                let mut top = vec![one(), a - b + one()];
                top.extend(plus(&gamma, 2.0));
                let mut bottom = vec![a + mf + one()];
                bottom.extend(plus(&gamma, 1.0));
                EvalReport::closed_form(one())
                    .plus(hyp(&top, &bottom, x)?.scaled(x * b * (ratio - one())))
            } else {
                let ck = ckr_all(spec)?;
                let mut big_a = cx(0.0);
                for (k, &ckk) in ck.iter().enumerate() {
                    big_a += ckk
                        * pochhammer(a, k)
                        * pochhammer(b, k)
                        * pochhammer(one() - a - mf, m - k)
                        * sign(k)
                        / (pochhammer(a - b, k) * pochhammer(one() - c + b, m - k));
                }
                let mut top = vec![one(), a - b];
                top.extend(plus(&gamma, 1.0));
                let mut bottom = vec![c];
                bottom.extend(gamma.iter().copied());
                EvalReport::closed_form(big_a).plus(hyp(&top, &bottom, x)?.scaled(one() - big_a))
            };
            Ok(Residual::new(lhs, rhs).with_roots(&plus(&gamma, 1.0)))
        }
    }
}

fn check_dual(what: &str, x: Cx, y: Cx) -> Result<()> {
    if (x - y).norm() > DUAL_FORM_TOL * x.norm().max(y.norm()).max(1.0) {
        return Err(Error::Inconsistent(format!("{what}: {x} vs {y}")));
    }
    Ok(())
}

/// The `q = m - 1` corollaries (`c = b + 1` or `c = a + 1`).
pub fn cor_qm1(a: Option<Cx>, b: Cx, spec: &IpdSpec, x: Cx, variant: Variant) -> Result<Residual> {
    let m = spec.m_total();
    let mf = cx(m as f64);
    let fm = pochhammer_ipd(spec, cx(0.0));
    let ck = ckr_all(spec)?;
    match variant {
        Variant::First | Variant::Kummer => {
            let c = b + one();
            let fb = pochhammer_ipd(spec, -b);
            let tops = {
                let mut t = vec![b];
                t.extend(spec.tops());
                t
            };
            let bottoms = {
                let mut t = vec![c];
                t.extend(spec.f.iter().copied());
                t
            };
            // coefficient of the j-th head term, computed from the partial
            // sums and from the terminating-series form
            let head_coeff = |j: usize| -> Result<Cx> {
                let jf = cx(-(j as f64));
                let mut t = vec![jf];
                t.extend(tops.iter().copied());
                let series = hyp(&t, &bottoms, one())?.value / factorial(j);
                let partial = partial_alternating(b, &ck, j) / pochhammer(c, j);
                check_dual("head coefficient", partial, series)?;
                Ok(partial)
            };
            if variant == Variant::First {
                let a = need_a(a)?;
                let y = y_of(x);
                let lhs = lhs_series(Some(a), b, c, spec, x)?.scaled(one_minus_pow(x, a));
                let mut head = cx(0.0);
                for j in 0..m {
                    head += pochhammer(a, j) * head_coeff(j)? * y.powu(j as u32);
                }
                let coeff = y.powu(m as u32) * pochhammer(a, m) * fb / (pochhammer(c, m) * fm);
                let tail = hyp(&[one(), a + mf], &[b + mf + one()], y)?.scaled(coeff);
                Ok(Residual::new(lhs, EvalReport::closed_form(head).plus(tail)))
            } else {
                let lhs = lhs_series(None, b, c, spec, x)?.scaled((-x).exp());
                let mut head = cx(0.0);
                for j in 0..m {
                    head += head_coeff(j)? * (-x).powu(j as u32);
                }
                let coeff = (-x).powu(m as u32) * fb / (pochhammer(c, m) * fm);
                let tail = hyp(&[one()], &[b + mf + one()], -x)?.scaled(coeff);
                Ok(Residual::new(lhs, EvalReport::closed_form(head).plus(tail)))
            }
        }
        Variant::Second | Variant::SecondAlt => {
            let a = need_a(a)?;
            let q = m - 1;
            let c = a + one();
            let lhs =
                lhs_series(Some(a), b, c, spec, x)?.scaled(one_minus_pow(x, b + cx(q as f64)));
            let mut head = cx(0.0);
            for j in 0..m {
                head += pochhammer(one() - mf, j) * pochhammer(a - b - mf + one(), j)
                    / (pochhammer(c, j) * factorial(j))
                    * qhat0_value(a, b, spec, q, j)?
                    * x.powu(j as u32);
            }
            let coeff =
                pochhammer(b, m) * pochhammer_ipd(spec, -a) * sign(m) / (pochhammer(c, m) * fm);
            let general = rhat_at(a, b, spec, q)? * pochhammer(b - a, m) / pochhammer(c, m);
            check_dual("tail coefficient", coeff, general)?;
            let tail = hyp(&[one(), one() - b + a], &[a + mf + one()], x)?
                .scaled(x.powu(m as u32) * coeff);
            Ok(Residual::new(lhs, EvalReport::closed_form(head).plus(tail)))
        }
    }
}

/// Root of the linear reduced polynomial `R_1` (q = m - 2).
pub fn lambda_qm2(b: Cx, spec: &IpdSpec) -> Cx {
    one() + b - b * pochhammer_ipd(spec, -b - one()) / pochhammer_ipd(spec, -b)
}

/// Root of the linear reduced polynomial `R̂_1` (q = m - 2).
pub fn gamma_qm2(a: Cx, b: Cx, spec: &IpdSpec) -> Cx {
    let m = cx(spec.m_total() as f64);
    let p1 = pochhammer_ipd(spec, -a - one());
    let p0 = pochhammer_ipd(spec, -a);
    one() - m + (a * p1 - (a + m) * p0) / (a * p1 / (a - b + one()) - p0)
}

fn check_root(what: &str, closed: Cx, poly: &CPoly) -> Result<()> {
    let r = roots(poly)?.roots;
    if r.len() != 1 || (r[0] - closed).norm() > 1e-9 * closed.norm().max(1.0) {
        return Err(Error::Inconsistent(format!(
            "{what}: closed form {closed} vs numerical roots {r:?}"
        )));
    }
    Ok(())
}

/// The `q = m - 2` corollaries (`c = b + 2` or `c = a + 2`); the single
/// reduced root is used in closed form.
pub fn cor_qm2(a: Option<Cx>, b: Cx, spec: &IpdSpec, x: Cx, variant: Variant) -> Result<Residual> {
    let m = spec.m_total();
    if m < 2 {
        return Err(Error::InvalidSpec("q = m - 2 needs m >= 2".into()));
    }
    let mf = cx(m as f64);
    let fm = pochhammer_ipd(spec, cx(0.0));
    let q = m - 2;
    match variant {
        Variant::First | Variant::Kummer => {
            let c = b + cx(2.0);
            let lambda = lambda_qm2(b, spec);
            check_root("lambda", lambda, &r_poly(b, spec, q)?)?;
            let ck = ckr_all(spec)?;
            let big_b = (b + mf) * pochhammer_ipd(spec, -b) - b * pochhammer_ipd(spec, -b - one());
            let inner = |j: usize| -> Cx {
                (0..=j)
                    .map(|k| pochhammer(b, k) * cx((j - k + 1) as f64) * ck[k] * sign(k))
                    .sum()
            };
            let bottoms = [b + mf + one(), lambda + mf - one()];
            if variant == Variant::First {
                let a = need_a(a)?;
                let y = y_of(x);
                let lhs = lhs_series(Some(a), b, c, spec, x)?.scaled(one_minus_pow(x, a));
                let mut head = cx(0.0);
                for j in 0..=q {
                    head += pochhammer(a, j) / pochhammer(c, j) * y.powu(j as u32) * inner(j);
                }
                let coeff = y.powu((m - 1) as u32) * pochhammer(a, m - 1) * big_b
                    / (pochhammer(c, m - 1) * fm);
                let tail = hyp(&[one(), a + mf - one(), lambda + mf], &bottoms, y)?.scaled(coeff);
                Ok(Residual::new(lhs, EvalReport::closed_form(head).plus(tail))
                    .with_roots(&[lambda + mf - one()]))
            } else {
                let lhs = lhs_series(None, b, c, spec, x)?.scaled((-x).exp());
                let mut head = cx(0.0);
                for j in 0..=q {
                    head += (-x).powu(j as u32) / pochhammer(c, j) * inner(j);
                }
                let coeff = (-x).powu((m - 1) as u32) * big_b / (pochhammer(c, m - 1) * fm);
                let tail = hyp(&[one(), lambda + mf], &bottoms, -x)?.scaled(coeff);
                Ok(Residual::new(lhs, EvalReport::closed_form(head).plus(tail))
                    .with_roots(&[lambda + mf - one()]))
            }
        }
        Variant::Second | Variant::SecondAlt => {
            let a = need_a(a)?;
            let c = a + cx(2.0);
            let gamma = gamma_qm2(a, b, spec);
            check_root("gamma", gamma, &rhat_poly(a, b, spec, q)?)?;
            let lhs =
                lhs_series(Some(a), b, c, spec, x)?.scaled(one_minus_pow(x, b + cx(q as f64)));
            let mut head = cx(0.0);
            for j in 0..=q {
                head += pochhammer(cx(2.0) - mf, j) * pochhammer(a - b - mf + cx(2.0), j)
                    / (pochhammer(c, j) * factorial(j))
                    * qhat0_value(a, b, spec, q, j)?
                    * x.powu(j as u32);
            }
            let coeff = pochhammer(b, m - 1)
                * sign(m - 1)
                * ((a + mf) * pochhammer_ipd(spec, -a) - a * pochhammer_ipd(spec, -a - one()))
                / (pochhammer(c, m - 1) * fm);
            let general = rhat_at(a, b, spec, q)? * pochhammer(b - a, m - 1) / pochhammer(c, m - 1);
            check_dual("tail coefficient", coeff, general)?;
            let tail = hyp(
                &[one(), a - b + one(), gamma + mf],
                &[a + mf + one(), gamma + mf - one()],
                x,
            )?
            .scaled(x.powu((m - 1) as u32) * coeff);
            Ok(Residual::new(lhs, EvalReport::closed_form(head).plus(tail))
                .with_roots(&[gamma + mf - one()]))
        }
    }
}

/// Which of the two `r = m = 1` identities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Intro {
    First,
    Second,
}

/// Right side of an `r = m = 1` identity for
/// `(1-x)^b 3F2(a, b, f+1; a+1, f | x)`.
pub fn intro_rhs(a: Cx, b: Cx, f: Cx, x: Cx, which: Intro) -> Result<EvalReport> {
    match which {
        Intro::First => {
            let k = b * (a - f) / (f * (a - b));
            Ok(EvalReport::closed_form(one() - k)
                .plus(hyp(&[one(), a - b], &[a + one()], x)?.scaled(k)))
        }
        Intro::Second => {
            let k = (f - a) / f;
            Ok(EvalReport::closed_form(one() - k)
                .plus(hyp(&[one(), b], &[a + one()], y_of(x))?.scaled(k)))
        }
    }
}

pub fn intro_identities(a: Cx, b: Cx, f: Cx, x: Cx, which: Intro) -> Result<Residual> {
    let lhs = hyp(&[a, b, f + one()], &[a + one(), f], x)?.scaled(one_minus_pow(x, b));
    Ok(Residual::new(lhs, intro_rhs(a, b, f, x, which)?))
}

/// `p+1Fp(ε, a; αε, b | x)` against `1 - 1/α + (1/α) pF(p-1)(a; b | x)`.
pub fn limit_formula(eps: f64, alpha: Cx, top: &[Cx], bottom: &[Cx], x: Cx) -> Result<Residual> {
    let mut t = vec![cx(eps)];
    t.extend(top.iter().copied());
    let mut bt = vec![alpha * eps];
    bt.extend(bottom.iter().copied());
    let lhs = hyp(&t, &bt, x)?;
    let inv = one() / alpha;
    let rhs = EvalReport::closed_form(one() - inv).plus(hyp(top, bottom, x)?.scaled(inv));
    Ok(Residual::new(lhs, rhs))
}

/// ε used by the limit-formula identity case; the formula's error is O(ε).
pub const LIMIT_EPS: f64 = 1e-10;

/// A fully specified identity ready for two-sided evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCase {
    pub id: IdentityId,
    pub params: Params,
    pub spec: IpdSpec,
    pub x: Cx,
    pub tol: f64,
}

impl IdentityCase {
    /// Builds a case and checks the hypotheses of the identity.
    pub fn new(id: IdentityId, params: Params, spec: IpdSpec, x: Cx, tol: f64) -> Result<Self> {
        let case = IdentityCase {
            id,
            params,
            spec,
            x,
            tol,
        };
        for (name, dist) in case.constraints()? {
            if dist <= INTEGER_SNAP {
                return Err(Error::ConstraintViolation(format!("{}: {name}", case.id)));
            }
        }
        Ok(case)
    }

    fn a(&self) -> Result<Cx> {
        need_a(self.params.a)
    }

    fn field(&self, v: Option<Cx>, name: &str) -> Result<Cx> {
        v.ok_or_else(|| Error::InvalidSpec(format!("{}: parameter {name} is required", self.id)))
    }

    /// Effective `q` of a degenerate identity.
    pub fn q(&self) -> Result<usize> {
        let m = self.spec.m_total();
        let q = match self.id.fixed_q(m) {
            Some(q) => q,
            None => self
                .params
                .q
                .ok_or_else(|| Error::InvalidSpec(format!("{}: q is required", self.id)))?,
        };
        if q >= m {
            return Err(Error::InvalidSpec(format!("q = {q} must be below m = {m}")));
        }
        Ok(q)
    }

    /// Hypotheses as `(description, distance to the excluded set)`.
    pub fn constraints(&self) -> Result<Vec<(&'static str, f64)>> {
        use IdentityId::*;
        let m = self.spec.m_total();
        let mf = cx(m as f64);
        let b = self.params.b;
        let mut out = Vec::new();
        match self.id {
            Mp1 | Mp2 | Mp3 => {
                let c = self.field(self.params.c, "c")?;
                out.push(("c is a non-positive integer", nonpositive_distance(c)));
                out.push(("(c-b-m)_m vanishes", poch_zero_distance(c - b - mf, m)));
                if self.id == Mp3 {
                    let a = self.a()?;
                    out.push(("(c-a-m)_m vanishes", poch_zero_distance(c - a - mf, m)));
                    out.push((
                        "(1+a+b-c)_m vanishes",
                        poch_zero_distance(one() + a + b - c, m),
                    ));
                }
                if self.id == Mp1 {
                    self.a()?;
                }
            }
            Thm1 | Thm2 | Cor1a | Cor1b | Cor3a | Cor3b | Cor5a | Cor5b => {
                if matches!(self.id, Cor5a | Cor5b) && m < 2 {
                    return Err(Error::InvalidSpec("q = m - 2 needs m >= 2".into()));
                }
                let q = self.q()?;
                out.push((
                    "b+m-q is a non-positive integer",
                    nonpositive_distance(b + cx((m - q) as f64)),
                ));
                out.push((
                    "f_j - b hits an excluded integer",
                    ipd_exclusion_distance(&self.spec, b, q),
                ));
                if !self.id.is_confluent() {
                    self.a()?;
                }
            }
            Thm3 | Cor2 | Cor2Alt | Cor4 | Cor6 => {
                if self.id == Cor6 && m < 2 {
                    return Err(Error::InvalidSpec("q = m - 2 needs m >= 2".into()));
                }
                let q = self.q()?;
                let a = self.a()?;
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
            }
            IntroA | IntroB => {
                if self.spec.r() != 1 || m != 1 {
                    return Err(Error::InvalidSpec(format!("{} needs r = m = 1", self.id)));
                }
                let a = self.a()?;
                let f = self.spec.f[0];
                out.push((
                    "a+1 is a non-positive integer",
                    nonpositive_distance(a + one()),
                ));
                if self.id == IntroA {
                    out.push(("a = b", (a - b).norm()));
                } else {
                    out.push(("f = a", (f - a).norm()));
                }
            }
            LimitM1 => {
                let a = self.a()?;
                let c = self.field(self.params.c, "c")?;
                let alpha = self.field(self.params.d, "d (alpha)")?;
                let _ = a;
                out.push(("c is a non-positive integer", nonpositive_distance(c)));
                out.push(("alpha = 0", alpha.norm()));
            }
        }
        Ok(out)
    }

    /// Smallest constraint distance (for guard-band sampling).
    pub fn guard_distance(&self) -> Result<f64> {
        Ok(self
            .constraints()?
            .iter()
            .map(|(_, d)| *d)
            .fold(f64::INFINITY, f64::min))
    }

    pub fn evaluate(&self) -> Result<Residual> {
        use IdentityId::*;
        let (b, x, spec) = (self.params.b, self.x, &self.spec);
        match self.id {
            Mp1 => mp_first(self.a()?, b, self.field(self.params.c, "c")?, spec, x),
            Mp2 => mp_kummer(b, self.field(self.params.c, "c")?, spec, x),
            Mp3 => mp_second(self.a()?, b, self.field(self.params.c, "c")?, spec, x),
            Thm1 => thm1_degenerate(self.a()?, b, spec, self.q()?, x),
            Thm2 => thm2_degenerate_kummer(b, spec, self.q()?, x),
            Thm3 => thm3_degenerate(self.a()?, b, spec, self.q()?, x),
            Cor1a => cor_q0(self.params.a, b, spec, x, Variant::First),
            Cor1b => cor_q0(None, b, spec, x, Variant::Kummer),
            Cor2 => cor_q0(self.params.a, b, spec, x, Variant::Second),
            Cor2Alt => cor_q0(self.params.a, b, spec, x, Variant::SecondAlt),
            Cor3a => cor_qm1(self.params.a, b, spec, x, Variant::First),
            Cor3b => cor_qm1(None, b, spec, x, Variant::Kummer),
            Cor4 => cor_qm1(self.params.a, b, spec, x, Variant::Second),
            Cor5a => cor_qm2(self.params.a, b, spec, x, Variant::First),
            Cor5b => cor_qm2(None, b, spec, x, Variant::Kummer),
            Cor6 => cor_qm2(self.params.a, b, spec, x, Variant::Second),
            IntroA => intro_identities(self.a()?, b, spec.f[0], x, Intro::First),
            IntroB => intro_identities(self.a()?, b, spec.f[0], x, Intro::Second),
            LimitM1 => limit_formula(
                LIMIT_EPS,
                self.field(self.params.d, "d")?,
                &[self.a()?, b],
                &[self.field(self.params.c, "c")?],
                x,
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
    fn classical_at_reference_point() {
        let spec = spec12();
        let (a, b, c, x) = (cx(0.35), cx(0.45), cx(4.9), cx(0.3));
        assert!(mp_first(a, b, c, &spec, x).unwrap().rel_err < 1e-12);
        assert!(mp_kummer(b, c, &spec, x).unwrap().rel_err < 1e-12);
        assert!(mp_second(a, b, c, &spec, x).unwrap().rel_err < 1e-12);
        let r = mp_first(a, b, c, &spec, cx(0.0)).unwrap();
        assert_eq!(r.lhs, cx(1.0));
        assert!((r.rhs - cx(1.0)).norm() < 1e-15);
    }

    #[test]
    fn classical_terminating() {
        let spec = IpdSpec::real(&[2.0], &[1]).unwrap();
        let r = mp_first(cx(-2.0), cx(0.6), cx(3.1), &spec, cx(0.4)).unwrap();
        assert!(r.rel_err < 1e-12);
        let r = mp_kummer(cx(0.6), cx(3.1), &spec, cx(2.5)).unwrap();
        assert!(r.rel_err < 1e-10);
        let r = mp_second(cx(0.3), cx(0.6), cx(4.2), &spec, cx(0.35)).unwrap();
        assert!(r.rel_err < 1e-10);
    }

    #[test]
    fn degenerate_theorems_all_q() {
        let spec = spec12();
        let (a, b, x) = (cx(0.35), cx(0.45), cx(0.3));
        for q in 0..3 {
            let r1 = thm1_degenerate(a, b, &spec, q, x).unwrap();
            let r2 = thm2_degenerate_kummer(b, &spec, q, x).unwrap();
            let r3 = thm3_degenerate(a, b, &spec, q, x).unwrap();
            assert!(r1.rel_err < 1e-12, "thm1 q={q}: {}", r1.rel_err);
            assert!(r2.rel_err < 1e-12, "thm2 q={q}: {}", r2.rel_err);
            assert!(r3.rel_err < 1e-12, "thm3 q={q}: {}", r3.rel_err);
        }
    }

    #[test]
    fn corollaries() {
        let spec = spec12();
        let (a, b, x) = (Some(cx(0.35)), cx(0.45), cx(0.3));
        let cases = [
            cor_q0(a, b, &spec, x, Variant::First),
            cor_q0(None, b, &spec, x, Variant::Kummer),
            cor_q0(a, b, &spec, x, Variant::Second),
            cor_q0(a, b, &spec, x, Variant::SecondAlt),
            cor_qm1(a, b, &spec, x, Variant::First),
            cor_qm1(None, b, &spec, x, Variant::Kummer),
            cor_qm1(a, b, &spec, x, Variant::Second),
            cor_qm2(a, b, &spec, x, Variant::First),
            cor_qm2(None, b, &spec, x, Variant::Kummer),
            cor_qm2(a, b, &spec, x, Variant::Second),
        ];
        for (i, c) in cases.into_iter().enumerate() {
            let c = c.unwrap();
            assert!(c.rel_err < 1e-12, "case {i}: {}", c.rel_err);
        }
    }

    #[test]
    fn specializations_agree_with_theorems() {
        let spec = spec12();
        let (a, b, x) = (cx(0.35), cx(0.45), cx(-0.3));
        let pairs = [
            (
                thm1_degenerate(a, b, &spec, 0, x),
                cor_q0(Some(a), b, &spec, x, Variant::First),
            ),
            (
                thm1_degenerate(a, b, &spec, 2, x),
                cor_qm1(Some(a), b, &spec, x, Variant::First),
            ),
            (
                thm1_degenerate(a, b, &spec, 1, x),
                cor_qm2(Some(a), b, &spec, x, Variant::First),
            ),
            (
                thm3_degenerate(a, b, &spec, 0, x),
                cor_q0(Some(a), b, &spec, x, Variant::Second),
            ),
            (
                thm3_degenerate(a, b, &spec, 2, x),
                cor_qm1(Some(a), b, &spec, x, Variant::Second),
            ),
            (
                thm3_degenerate(a, b, &spec, 1, x),
                cor_qm2(Some(a), b, &spec, x, Variant::Second),
            ),
        ];
        for (i, (t, c)) in pairs.into_iter().enumerate() {
            let (t, c) = (t.unwrap(), c.unwrap());
            assert!(
                (t.rhs - c.rhs).norm() < 1e-10 * t.rhs.norm().max(1.0),
                "pair {i}"
            );
        }
    }

    #[test]
    fn example_one_finite() {
        // (f)_2 (1-x)^a 3F2(a,b,f+2;b+2,f|x) = (b)_2 + ((f)_2-(b)_2) 3F2(a,1,λ+1;b+2,λ|y)
        let (b, f, a, x) = (cx(0.7), cx(3.0), cx(0.4), cx(0.3));
        let spec = IpdSpec::new(vec![f], vec![2]).unwrap();
        let lam = (f + b + one()) / (f - b + one());
        let lhs = hyp(&[a, b, f + cx(2.0)], &[b + cx(2.0), f], x)
            .unwrap()
            .value
            * one_minus_pow(x, a)
            * pochhammer(f, 2);
        let rhs = pochhammer(b, 2)
            + (pochhammer(f, 2) - pochhammer(b, 2))
                * hyp(&[a, one(), lam + one()], &[b + cx(2.0), lam], y_of(x))
                    .unwrap()
                    .value;
        assert!((lhs - rhs).norm() < 1e-12);
        let r = cor_q0(Some(a), b, &spec, x, Variant::First).unwrap();
        assert!((r.lhs * pochhammer(f, 2) - lhs).norm() < 1e-12);
    }

    #[test]
    fn intro_pair() {
        let (a, b, f, x) = (cx(0.4), cx(0.7), cx(1.6), cx(0.3));
        let r1 = intro_identities(a, b, f, x, Intro::First).unwrap();
        let r2 = intro_identities(a, b, f, x, Intro::Second).unwrap();
        assert!(r1.rel_err < 1e-12 && r2.rel_err < 1e-12);
        assert!((r1.rhs - r2.rhs).norm() < 1e-12);
    }

    #[test]
    fn limit_formula_small_eps() {
        let r = limit_formula(1e-6, cx(2.0), &[one(), one()], &[cx(2.0)], cx(0.3)).unwrap();
        assert!(r.rel_err < 1e-5);
        let r = limit_formula(LIMIT_EPS, cx(2.0), &[one(), one()], &[cx(2.0)], cx(0.3)).unwrap();
        assert!(r.rel_err < 1e-9);
    }

    #[test]
    fn case_validation() {
        let spec = IpdSpec::real(&[2.0], &[2]).unwrap();
        let p = Params {
            a: Some(cx(0.3)),
            b: cx(0.7),
            c: Some(cx(2.7)),
            ..Default::default()
        };
        let e = IdentityCase::new(IdentityId::Mp1, p.clone(), spec.clone(), cx(0.2), 1e-6);
        assert!(matches!(e, Err(Error::ConstraintViolation(_))));
        let p2 = Params {
            c: Some(cx(3.9)),
            ..p.clone()
        };
        let case = IdentityCase::new(IdentityId::Mp1, p2, spec.clone(), cx(0.2), 1e-6).unwrap();
        assert!(case.evaluate().unwrap().rel_err < 1e-12);
        // f - b = 0 with m_1 = m excluded for q = 0
        let p3 = Params {
            b: cx(2.0),
            q: Some(0),
            ..p
        };
        assert!(matches!(
            IdentityCase::new(IdentityId::Thm1, p3, spec, cx(0.2), 1e-6),
            Err(Error::ConstraintViolation(_))
        ));
        for id in IdentityId::ALL {
            assert_eq!(id.as_str().parse::<IdentityId>().unwrap(), *id);
        }
    }

    #[test]
    fn vanishing_reduced_polynomial() {
        // f = b, m = 1, q = 0: R ≡ 0 and the head alone must match
        let b = cx(0.6);
        let spec = IpdSpec::new(vec![b], vec![1]).unwrap();
        let r = thm1_degenerate(cx(0.3), b, &spec, 0, cx(0.25)).unwrap();
        assert!(r.rel_err < 1e-12);
    }
}
