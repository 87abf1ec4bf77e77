use hypid::arith::{distance_to_integer_range, gamma_cx, gamma_ratio, pochhammer, pochhammer_ipd};
use hypid::charpoly::{ckr_all, ipd_exclusion_distance};
use hypid::hyp::{eval_ipd_lhs, eval_unit, hyp, HypSpec};
use hypid::transforms::{thm1_degenerate, thm3_degenerate};
use hypid::{cx, Cx, IpdSpec};
use proptest::prelude::*;

fn complex(re: std::ops::Range<f64>, im: std::ops::Range<f64>) -> impl Strategy<Value = Cx> {
    (re, im).prop_map(|(r, i)| Cx::new(r, i))
}

fn disk(radius: f64) -> impl Strategy<Value = Cx> {
    (0.0..radius, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Cx::from_polar(r, t))
}

fn spec() -> impl Strategy<Value = IpdSpec> {
    prop::collection::vec((0.3..3.0f64, 1usize..=2), 1..=3).prop_map(|v| {
        let (f, m): (Vec<f64>, Vec<usize>) = v.into_iter().unzip();
        IpdSpec::real(&f, &m).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn gauss_contiguous_in_c(
        a in complex(-1.5..1.5, -0.5..0.5),
        b in complex(-1.5..1.5, -0.5..0.5),
        c in complex(1.2..4.0, -0.5..0.5),
        z in disk(0.8),
    ) {
        let f = |c: Cx| hyp(&[a, b], &[c], z).unwrap().value;
        let one = cx(1.0);
        let t1 = c * (c - one) * (z - one) * f(c - one);
        let t2 = c * (c - one - (cx(2.0) * c - a - b - one) * z) * f(c);
        let t3 = (c - a) * (c - b) * z * f(c + one);
        let scale = t1.norm() + t2.norm() + t3.norm();
        prop_assert!((t1 + t2 + t3).norm() <= 1e-8 * scale.max(1.0));
    }

    #[test]
    fn pochhammer_recurrence(a in complex(-5.0..5.0, -3.0..3.0), n in 0usize..40) {
        let lhs = pochhammer(a, n + 1);
        let rhs = pochhammer(a, n) * (a + cx(n as f64));
        prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1e-300));
    }

    #[test]
    fn pochhammer_is_gamma_ratio(a in complex(0.1..6.0, -3.0..3.0), n in 0usize..30) {
        let direct = pochhammer(a, n);
        let ratio = gamma_cx(a + cx(n as f64)).unwrap() / gamma_cx(a).unwrap();
        prop_assert!((direct - ratio).norm() <= 1e-10 * direct.norm());
    }

    #[test]
    fn alternating_ckr_sum(s in spec(), b in complex(-2.0..2.0, -1.0..1.0)) {
        let ck = ckr_all(&s).unwrap();
        let lhs: Cx = ck
            .iter()
            .enumerate()
            .map(|(k, &c)| pochhammer(b, k) * c * if k % 2 == 0 { 1.0 } else { -1.0 })
            .sum();
        let rhs = pochhammer_ipd(&s, -b) / pochhammer_ipd(&s, cx(0.0));
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
    }

    #[test]
    fn degenerate_lhs_is_limit(
        s in spec(),
        a in -1.5..1.5f64,
        b in 0.1..2.0f64,
        x in disk(0.45),
        q_pick in 0usize..10,
    ) {
        let m = s.m_total();
        let q = q_pick % m;
        let (a, b) = (cx(a), cx(b));
        prop_assume!(ipd_exclusion_distance(&s, b, q) >= 0.05);
        let c = b + cx((m - q) as f64);
        let degenerate = thm1_degenerate(a, b, &s, q, x).unwrap().lhs;
        let perturbed = eval_ipd_lhs(Some(a), b, c + cx(1e-6), &s, x, 1e-15).unwrap().value
            * (cx(1.0) - x).powc(a);
        prop_assert!((degenerate - perturbed).norm() <= 1e-5 * degenerate.norm().max(1.0));
    }

    #[test]
    fn terminating_closure(
        s in spec(),
        n in 0usize..=6,
        b in 0.1..2.0f64,
        x in disk(0.45),
        q_pick in 0usize..10,
    ) {
        let m = s.m_total();
        let q = q_pick % m;
        let (a, b) = (cx(-(n as f64)), cx(b));
        prop_assume!(ipd_exclusion_distance(&s, b, q) >= 0.05);
        let r1 = thm1_degenerate(a, b, &s, q, x).unwrap();
        prop_assert!(r1.rel_err <= 1e-12, "thm1 {}", r1.rel_err);
        prop_assume!(n + q < m && ipd_exclusion_distance(&s, a, q) >= 0.05);
        prop_assume!(distance_to_integer_range(a - b, q as i64 + 1 - m as i64, q as i64) >= 0.05);
        let r3 = thm3_degenerate(a, b, &s, q, x).unwrap();
        prop_assert!(r3.rel_err <= 1e-12, "thm3 {}", r3.rel_err);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gauss_unit_oracle(
        a in complex(-1.5..1.5, -0.5..0.5),
        b in complex(-1.5..1.5, -0.5..0.5),
        excess in complex(0.3..2.5, -0.5..0.5),
    ) {
        let c = a + b + excess;
        prop_assume!((c.re > 0.05 || c.im.abs() > 0.05) && (c - a).re > 0.05 && (c - b).re > 0.05);
        let series = eval_unit(&HypSpec::new(vec![a, b], vec![c]), 1e-15).unwrap();
        let closed = gamma_ratio(&[c, c - a - b], &[c - a, c - b]).unwrap();
        prop_assert!(series.converged);
        prop_assert!((series.value - closed).norm() <= 1e-8 * closed.norm().max(1.0));
    }
}
