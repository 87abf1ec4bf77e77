//! Fixed regression corpus: the worked examples for `r = 1` and
//! `m = (1, 1, 2)`, each at three parameter instantiations.

use serde::{Deserialize, Serialize};

use crate::arith::{cx, pochhammer, Cx, IpdSpec};
use crate::charpoly::{r_poly, rhat_poly};
use crate::error::Result;
use crate::harness::Status;
use crate::hyp::{hyp, terminating_unit};
use crate::poly::roots;
use crate::summation::{
    example2_chain, example2_general, example3_a, example3_gamma, example3_sum, example4_confluent,
    example4_gamma, example4_lambda, example4_unit, Ex3Form,
};
use crate::transforms::Residual;

pub const FINITE_TOL: f64 = 1e-8;
pub const UNIT_TOL: f64 = 1e-6;
pub const ROOT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenRecord {
    pub id: String,
    pub instance: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Cx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Cx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_err: Option<f64>,
    pub tol: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl GoldenRecord {
    fn from_residual(id: &str, instance: usize, tol: f64, r: Result<Residual>) -> Self {
        match r {
            Ok(r) => {
                let ok = r.rel_err <= tol && r.converged();
                GoldenRecord {
                    id: id.into(),
                    instance,
                    lhs: Some(r.lhs),
                    rhs: Some(r.rhs),
                    rel_err: Some(r.rel_err),
                    tol,
                    status: if ok { Status::Pass } else { Status::Fail },
                    error: (!r.converged()).then(|| "series did not converge".into()),
                }
            }
            Err(e) => GoldenRecord {
                id: id.into(),
                instance,
                lhs: None,
                rhs: None,
                rel_err: None,
                tol,
                status: Status::Fail,
                error: Some(e.to_string()),
            },
        }
    }

    /// A closed-form root against the single numerical root of `poly`.
    fn from_root(id: &str, instance: usize, closed: Cx, poly: Result<crate::CPoly>) -> Self {
        let found = poly.and_then(|p| roots(&p)).map(|r| r.roots);
        let r = found.and_then(|found| {
            if found.len() != 1 {
                return Err(crate::Error::Inconsistent(format!(
                    "expected one root, found {}",
                    found.len()
                )));
            }
            let abs = (found[0] - closed).norm();
            Ok(Residual {
                lhs: closed,
                rhs: found[0],
                abs_err: abs,
                rel_err: abs / closed.norm().max(1.0),
                lhs_report: crate::EvalReport::closed_form(closed),
                rhs_report: crate::EvalReport::closed_form(found[0]),
                root_pole_distance: f64::INFINITY,
            })
        });
        Self::from_residual(id, instance, ROOT_TOL, r)
    }
}

fn one() -> Cx {
    cx(1.0)
}

fn c(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

fn values(lhs: Cx, rhs: Cx) -> Residual {
    Residual::new(
        crate::EvalReport::closed_form(lhs),
        crate::EvalReport::closed_form(rhs),
    )
}

fn spec1(f: Cx) -> IpdSpec {
    IpdSpec::new(vec![f], vec![2]).expect("valid spec")
}

fn spec4(f: [Cx; 3]) -> IpdSpec {
    IpdSpec::new(f.to_vec(), vec![1, 1, 2]).expect("valid spec")
}

fn ex1_lambda(b: Cx, f: Cx) -> Cx {
    (f + b + one()) / (f - b + one())
}

fn ex1_r1(b: Cx, f: Cx, t: Cx) -> Cx {
    (one() - t) + cx(2.0) * b / f * t - pochhammer(b, 2) / pochhammer(f, 2) * (t + one())
}

fn ex1_finite(a: Cx, b: Cx, f: Cx, x: Cx) -> Result<Residual> {
    let two = cx(2.0);
    let lam = ex1_lambda(b, f);
    let lhs =
        hyp(&[a, b, f + two], &[b + two, f], x)?.scaled(pochhammer(f, 2) * (one() - x).powc(a));
    let rhs = hyp(&[a, one(), lam + one()], &[b + two, lam], x / (x - one()))?;
    let rhs = rhs
        .scaled(pochhammer(f, 2) - pochhammer(b, 2))
        .plus(crate::EvalReport::closed_form(pochhammer(b, 2)));
    Ok(Residual::new(lhs, rhs))
}

fn ex1_terminating(n: usize, b: Cx, d: Cx, e: Cx, f: Cx) -> Result<Residual> {
    let two = cx(2.0);
    let nn = cx(-(n as f64));
    let lam = ex1_lambda(b, f);
    let lhs = terminating_unit(&[nn, b, d, f + two], &[b + two, e, f])?
        * pochhammer(e, n)
        * pochhammer(f, 2)
        / pochhammer(e - d, n);
    let tail = terminating_unit(
        &[nn, one(), d, lam + one()],
        &[b + two, one() - e + d - cx(n as f64), lam],
    )?;
    let rhs = pochhammer(b, 2) + (pochhammer(f, 2) - pochhammer(b, 2)) * tail;
    Ok(values(lhs, rhs))
}

fn ex3_rhat1(a: Cx, b: Cx, f: Cx, t: Cx) -> Cx {
    let two = cx(2.0);
    two * b / (a - b) * (one() - (t + one()) * (one() - b) / (two * (a - b + one())))
        - two * a * b / (f * (a - b)) * (one() + (t + one()) * b / (a - b + one()))
        + pochhammer(a, 2) * pochhammer(b, 2) * (t + one())
            / (pochhammer(f, 2) * pochhammer(a - b, 2))
}

fn ex3_finite(a: Cx, b: Cx, f: Cx, x: Cx, alt: bool) -> Result<Residual> {
    let two = cx(2.0);
    let g = example3_gamma(a, b, f);
    let lhs = hyp(&[a, b, f + two], &[a + two, f], x)?.scaled((one() - x).powc(b));
    let rhs = if alt {
        let big_a = example3_a(a, b, f);
        hyp(&[a - b, one(), g + one()], &[a + two, g], x)?
            .scaled(one() - big_a)
            .plus(crate::EvalReport::closed_form(big_a))
    } else {
        let k = x * b * (a * (f + two) / ((a + two) * f) - one());
        hyp(
            &[one(), a - b + one(), g + two],
            &[a + cx(3.0), g + one()],
            x,
        )?
        .scaled(k)
        .plus(crate::EvalReport::closed_form(one()))
    };
    Ok(Residual::new(lhs, rhs))
}

fn root_poly_value(
    id: &str,
    instance: usize,
    printed: Cx,
    poly: Result<crate::CPoly>,
    t: Cx,
) -> GoldenRecord {
    let r = poly.map(|p| values(printed, p.eval(t)));
    GoldenRecord::from_residual(id, instance, FINITE_TOL, r)
}

/// Every example identity and closed-form root at its three instantiations.
pub fn golden_corpus() -> Vec<GoldenRecord> {
    let mut out = Vec::new();

    let ex1 = [
        (cx(0.7), cx(3.0), cx(0.4), cx(0.3)),
        (c(0.35, 0.2), cx(1.8), cx(-0.6), c(-0.25, 0.3)),
        (cx(1.3), c(2.4, -0.5), c(0.9, 0.1), cx(0.42)),
    ];
    for (i, &(b, f, a, x)) in ex1.iter().enumerate() {
        let spec = spec1(f);
        out.push(GoldenRecord::from_root(
            "EX1_LAMBDA",
            i,
            ex1_lambda(b, f),
            r_poly(b, &spec, 0),
        ));
        let t = c(0.37, -0.21);
        out.push(root_poly_value(
            "EX1_R1",
            i,
            ex1_r1(b, f, t),
            r_poly(b, &spec, 0),
            t,
        ));
        out.push(GoldenRecord::from_residual(
            "EX1_FINITE",
            i,
            FINITE_TOL,
            ex1_finite(a, b, f, x),
        ));
    }
    let ex1_term = [
        (3, cx(0.7), cx(0.45), cx(1.9), cx(3.0)),
        (5, c(0.35, 0.2), cx(-0.3), c(2.6, 0.4), cx(1.8)),
        (8, cx(1.3), cx(2.2), cx(0.55), c(2.4, -0.5)),
    ];
    for (i, &(n, b, d, e, f)) in ex1_term.iter().enumerate() {
        out.push(GoldenRecord::from_residual(
            "EX1_TERMINATING",
            i,
            FINITE_TOL,
            ex1_terminating(n, b, d, e, f),
        ));
    }

    let ex2 = [
        (cx(0.3), cx(0.6), cx(0.4), cx(1.7), cx(2.1)),
        (cx(-0.4), cx(1.2), cx(0.5), cx(0.8), cx(2.9)),
        (c(0.7, 0.2), cx(0.5), c(0.3, -0.1), cx(2.2), c(1.9, 0.3)),
    ];
    for (i, &(a, b, d, f, e)) in ex2.iter().enumerate() {
        out.push(GoldenRecord::from_residual(
            "EX2_GENERAL",
            i,
            UNIT_TOL,
            example2_general(a, b, d, f, e),
        ));
    }
    let (a, b, d, f) = (cx(0.3), cx(0.6), cx(0.4), cx(1.7));
    for r in 1..=3 {
        out.push(GoldenRecord::from_residual(
            "EX2_INTEGER_SHIFT",
            r - 1,
            UNIT_TOL,
            example2_chain(a, b, d, f, r),
        ));
    }

    let ex3 = [
        (cx(0.45), cx(0.8), cx(0.3), cx(1.6), cx(2.4), cx(0.3)),
        (cx(-0.35), cx(0.5), cx(0.6), cx(2.5), cx(1.9), c(-0.2, 0.25)),
        (
            cx(1.2),
            c(0.3, 0.15),
            cx(0.25),
            cx(0.9),
            c(1.5, 0.3),
            cx(-0.4),
        ),
    ];
    for (i, &(a, b, d, f, e, x)) in ex3.iter().enumerate() {
        let spec = spec1(f);
        out.push(GoldenRecord::from_root(
            "EX3_GAMMA",
            i,
            example3_gamma(a, b, f),
            rhat_poly(a, b, &spec, 0),
        ));
        let t = c(0.37, -0.21);
        out.push(root_poly_value(
            "EX3_RHAT1",
            i,
            ex3_rhat1(a, b, f, t),
            rhat_poly(a, b, &spec, 0),
            t,
        ));
        out.push(GoldenRecord::from_residual(
            "EX3_FINITE",
            i,
            FINITE_TOL,
            ex3_finite(a, b, f, x, false),
        ));
        out.push(GoldenRecord::from_residual(
            "EX3_FINITE_ALT",
            i,
            FINITE_TOL,
            ex3_finite(a, b, f, x, true),
        ));
        for (id, form) in [
            ("EX3_SUM", Ex3Form::General),
            ("EX3_SUM_A", Ex3Form::WithA),
            ("EX3_SUM_B1", Ex3Form::EqualsBPlusOne),
            ("EX3_SUM_B2", Ex3Form::EqualsBPlusTwo),
        ] {
            out.push(GoldenRecord::from_residual(
                id,
                i,
                UNIT_TOL,
                example3_sum(a, b, d, f, e, form),
            ));
        }
    }

    let ex4 = [
        (
            cx(0.4),
            cx(0.7),
            cx(0.3),
            cx(4.2),
            [cx(1.3), cx(2.1), cx(0.8)],
            cx(0.8),
        ),
        (
            cx(-0.3),
            cx(1.1),
            cx(0.45),
            cx(5.0),
            [cx(2.6), cx(0.55), cx(1.7)],
            cx(-1.5),
        ),
        (
            c(0.6, 0.2),
            cx(0.35),
            c(0.2, -0.1),
            c(3.6, 0.4),
            [cx(0.9), c(1.4, 0.3), cx(2.2)],
            c(1.2, 0.7),
        ),
    ];
    for (i, &(a, b, d, e, f, x)) in ex4.iter().enumerate() {
        let spec = spec4(f);
        out.push(GoldenRecord::from_root(
            "EX4_LAMBDA",
            i,
            example4_lambda(b, f),
            r_poly(b, &spec, 2),
        ));
        out.push(GoldenRecord::from_root(
            "EX4_GAMMA",
            i,
            example4_gamma(a, b, f),
            rhat_poly(a, b, &spec, 2),
        ));
        out.push(GoldenRecord::from_residual(
            "EX4_CONFLUENT",
            i,
            FINITE_TOL,
            example4_confluent(b, f, x),
        ));
        out.push(GoldenRecord::from_residual(
            "EX4_UNIT",
            i,
            UNIT_TOL,
            example4_unit(a, b, d, e, f),
        ));
    }
    out
}

pub fn all_pass(records: &[GoldenRecord]) -> bool {
    records.iter().all(|r| r.status == Status::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_passes() {
        let recs = golden_corpus();
        for r in recs.iter().filter(|r| r.status != Status::Pass) {
            eprintln!("{}", serde_json::to_string(r).unwrap());
        }
        assert!(all_pass(&recs));
        for id in ["EX1_LAMBDA", "EX3_GAMMA", "EX4_UNIT", "EX2_INTEGER_SHIFT"] {
            assert_eq!(recs.iter().filter(|r| r.id == id).count(), 3);
        }
    }
}
