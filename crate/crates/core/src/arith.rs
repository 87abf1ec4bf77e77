//! Scalar kernels: Pochhammer symbols, complex gamma, Stirling numbers and
//! the coefficients of products of shifted Pochhammer symbols.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used for every parameter and argument.
pub type Cx = Complex64;

/// Above this length a Pochhammer symbol is evaluated through log-gamma.
pub const POCHHAMMER_DIRECT_MAX: usize = 64;

/// Largest row of the memoized Stirling table.
pub const STIRLING_TABLE_MAX: usize = 64;

/// Tolerance used when deciding whether a complex number is an integer.
pub const INTEGER_SNAP: f64 = 1e-9;

#[inline]
pub fn cx(re: f64) -> Cx {
    Cx::new(re, 0.0)
}

/// Returns `Some(n)` if `z` lies within `tol` of the integer `n`.
pub fn near_integer(z: Cx, tol: f64) -> Option<i64> {
    let n = z.re.round();
    if (z.re - n).abs() <= tol && z.im.abs() <= tol && n.abs() < 9.0e15 {
        Some(n as i64)
    } else {
        None
    }
}

/// Returns `Some(n)` with `n >= 0` if `z` is (within `tol`) the integer `-n`.
pub fn nonpositive_integer(z: Cx, tol: f64) -> Option<u64> {
    match near_integer(z, tol) {
        Some(n) if n <= 0 => Some((-n) as u64),
        _ => None,
    }
}

/// Distance from `z` to the nearest point of an integer set `lo..=hi`.
pub fn distance_to_integer_range(z: Cx, lo: i64, hi: i64) -> f64 {
    if lo > hi {
        return f64::INFINITY;
    }
    let n = z.re.round().clamp(lo as f64, hi as f64);
    (z - cx(n)).norm()
}

/// Rising factorial `(a)_n = a (a+1) ... (a+n-1)`.
pub fn pochhammer(a: Cx, n: usize) -> Cx {
    if n <= POCHHAMMER_DIRECT_MAX {
        return direct_pochhammer(a, n);
    }
    // A zero factor or a pole of Γ(a) rules out the log-gamma route.
    if nonpositive_integer(a, 0.0).is_some() || nonpositive_integer(a + cx(n as f64), 0.0).is_some()
    {
        return direct_pochhammer(a, n);
    }
    match (lgamma_cx(a + cx(n as f64)), lgamma_cx(a)) {
        (Ok(hi), Ok(lo)) => (hi - lo).exp(),
        _ => direct_pochhammer(a, n),
    }
}

fn direct_pochhammer(a: Cx, n: usize) -> Cx {
    let mut p = cx(1.0);
    for i in 0..n {
        p *= a + cx(i as f64);
    }
    p
}

/// Product of scalar Pochhammer symbols over a parameter vector.
pub fn pochhammer_vec(v: &[Cx], n: usize) -> Cx {
    v.iter().map(|&a| pochhammer(a, n)).product()
}

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b.round()
}

/// Integral parameter differences: top parameters `f_j + m_j` paired with
/// bottom parameters `f_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpdSpec {
    pub f: Vec<Cx>,
    pub m: Vec<usize>,
}

impl IpdSpec {
    pub fn new(f: Vec<Cx>, m: Vec<usize>) -> Result<Self> {
        if f.is_empty() || f.len() != m.len() {
            return Err(Error::InvalidSpec(format!(
                "f and m must be non-empty and of equal length (got {} and {})",
                f.len(),
                m.len()
            )));
        }
        if m.contains(&0) {
            return Err(Error::InvalidSpec("every m_j must be positive".into()));
        }
        if let Some(fj) = f
            .iter()
            .find(|&&fj| nonpositive_integer(fj, INTEGER_SNAP).is_some())
        {
            return Err(Error::InvalidSpec(format!(
                "bottom parameter f_j = {fj} is a non-positive integer"
            )));
        }
        Ok(IpdSpec { f, m })
    }

    /// Convenience constructor for real `f`.
    pub fn real(f: &[f64], m: &[usize]) -> Result<Self> {
        Self::new(f.iter().map(|&v| cx(v)).collect(), m.to_vec())
    }

    pub fn r(&self) -> usize {
        self.f.len()
    }

    /// `m = m_1 + ... + m_r`.
    pub fn m_total(&self) -> usize {
        self.m.iter().sum()
    }

    /// Top parameters `f + m`.
    pub fn tops(&self) -> Vec<Cx> {
        self.f
            .iter()
            .zip(&self.m)
            .map(|(&fj, &mj)| fj + cx(mj as f64))
            .collect()
    }

    /// Same spec with every `f_j` shifted by `shift`.
    pub fn shifted(&self, shift: Cx) -> IpdSpec {
        IpdSpec {
            f: self.f.iter().map(|&fj| fj + shift).collect(),
            m: self.m.clone(),
        }
    }
}

/// `(f + shift)_m = ∏_j (f_j + shift)_{m_j}`.
pub fn pochhammer_ipd(spec: &IpdSpec, shift: Cx) -> Cx {
    spec.f
        .iter()
        .zip(&spec.m)
        .map(|(&fj, &mj)| pochhammer(fj + shift, mj))
        .product()
}

/// Coefficients σ_0..σ_m of `∏_j (f_j + x)_{m_j}` in powers of `x`.
pub fn sigma_coeffs(spec: &IpdSpec) -> Vec<Cx> {
    let mut coeffs = vec![cx(1.0)];
    for (&fj, &mj) in spec.f.iter().zip(&spec.m) {
        for i in 0..mj {
            // multiply by (x + f_j + i)
            let c0 = fj + cx(i as f64);
            let mut next = vec![cx(0.0); coeffs.len() + 1];
            for (k, &ck) in coeffs.iter().enumerate() {
                next[k] += ck * c0;
                next[k + 1] += ck;
            }
            coeffs = next;
        }
    }
    coeffs
}

fn stirling_table() -> &'static Vec<Vec<Option<u128>>> {
    static TABLE: OnceLock<Vec<Vec<Option<u128>>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = STIRLING_TABLE_MAX;
        let mut t = vec![vec![Some(0u128); n + 1]; n + 1];
        t[0][0] = Some(1);
        for j in 1..=n {
            for k in 1..=j {
                let a = t[j - 1][k].and_then(|v| v.checked_mul(k as u128));
                let b = t[j - 1][k - 1];
                t[j][k] = match (a, b) {
                    (Some(a), Some(b)) => a.checked_add(b),
                    _ => None,
                };
            }
        }
        t
    })
}

/// Stirling number of the second kind `S(j, k)`.
///
/// Returns `None` when the value overflows `u128` or `j` is beyond the
/// memoized table.
pub fn stirling2(j: usize, k: usize) -> Option<u128> {
    if k > j {
        return Some(0);
    }
    if j > STIRLING_TABLE_MAX {
        return None;
    }
    stirling_table()[j][k]
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

// Lanczos series for Re(z) >= 0.5, in log form.
fn lanczos_ln_gamma(z: Cx) -> Cx {
    let z = z - cx(1.0);
    let mut sum = cx(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += cx(c) / (z + cx(i as f64));
    }
    let t = z + cx(LANCZOS_G + 0.5);
    cx(0.5 * (2.0 * PI).ln()) + (z + cx(0.5)) * t.ln() - t + sum.ln()
}

// Shift Re(z) up by recurrence so that Lanczos is used well inside its
// accurate region, returning ln Γ(z).
fn ln_gamma_right(z: Cx) -> Cx {
    let mut z = z;
    let mut acc = cx(0.0);
    while z.re < 7.0 {
        acc -= z.ln();
        z += cx(1.0);
    }
    acc + lanczos_ln_gamma(z)
}

/// Complex log-gamma.
///
/// The result satisfies `exp(lgamma_cx(z)) = Γ(z)`. For `Re z >= 0.5` the
/// imaginary part is the sum of principal logarithms of the recurrence
/// factors plus the Lanczos term; for `Re z < 0.5` the reflection formula is
/// applied with principal logs, so the imaginary part is defined only modulo
/// 2π. Callers that need Γ-ratios must exponentiate differences.
pub fn lgamma_cx(z: Cx) -> Result<Cx> {
    if nonpositive_integer(z, 0.0).is_some() {
        return Err(Error::GammaPole(z));
    }
    if z.re >= 0.5 {
        Ok(ln_gamma_right(z))
    } else {
        let s = (cx(PI) * z).sin();
        Ok(cx(PI.ln()) - s.ln() - ln_gamma_right(cx(1.0) - z))
    }
}

/// Complex gamma function, Lanczos with reflection for `Re z < 0.5`.
pub fn gamma_cx(z: Cx) -> Result<Cx> {
    if nonpositive_integer(z, 0.0).is_some() {
        return Err(Error::GammaPole(z));
    }
    if z.re >= 0.5 {
        Ok(ln_gamma_right(z).exp())
    } else {
        let s = (cx(PI) * z).sin();
        Ok(cx(PI) / (s * ln_gamma_right(cx(1.0) - z).exp()))
    }
}

/// `∏ Γ(num_i) / ∏ Γ(den_j)` through a single exponentiated log-gamma sum.
pub fn gamma_ratio(num: &[Cx], den: &[Cx]) -> Result<Cx> {
    let mut acc = cx(0.0);
    for &z in num {
        acc += lgamma_cx(z)?;
    }
    for &z in den {
        acc -= lgamma_cx(z)?;
    }
    Ok(acc.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Cx, b: Cx, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(cx(0.3), 0), cx(1.0));
        assert_eq!(pochhammer(cx(-3.0), 5), cx(0.0));
        assert!(close(pochhammer(cx(2.5), 3), cx(39.375), 1e-15));
    }

    #[test]
    fn pochhammer_large_n_matches_product() {
        let a = Cx::new(0.37, 0.2);
        let direct = direct_pochhammer(a, 80);
        assert!(close(pochhammer(a, 80), direct, 1e-11));
        // zero factor beyond the crossover stays exactly zero
        assert_eq!(pochhammer(cx(-70.0), 80), cx(0.0));
    }

    #[test]
    fn pochhammer_vec_examples() {
        assert_eq!(pochhammer_vec(&[], 4), cx(1.0));
        assert!(close(
            pochhammer_vec(&[cx(1.0), cx(2.0)], 2),
            cx(12.0),
            1e-15
        ));
        assert_eq!(pochhammer_vec(&[cx(-1.0), cx(5.0)], 3), cx(0.0));
    }

    #[test]
    fn pochhammer_ipd_examples() {
        let s = IpdSpec::real(&[2.0], &[1]).unwrap();
        assert!(close(pochhammer_ipd(&s, cx(0.0)), cx(2.0), 1e-15));
        let s = IpdSpec::real(&[2.0, 3.0], &[1, 2]).unwrap();
        assert!(close(pochhammer_ipd(&s, cx(0.0)), cx(24.0), 1e-15));
        let s = IpdSpec::real(&[1.0], &[2]).unwrap();
        assert_eq!(pochhammer_ipd(&s, cx(-1.0)), cx(0.0));
    }

    #[test]
    fn stirling_examples() {
        for n in 0..10 {
            assert_eq!(stirling2(n, n), Some(1));
        }
        assert_eq!(stirling2(3, 0), Some(0));
        assert_eq!(stirling2(3, 2), Some(3));
        assert_eq!(stirling2(2, 5), Some(0));
        assert_eq!(stirling2(65, 3), None);
    }

    #[test]
    fn stirling_row_sum_identity() {
        // Σ_k S(j,k) x(x-1)...(x-k+1) = x^j
        for x in 1..=6i64 {
            for j in 0..=8usize {
                let mut total: i128 = 0;
                for k in 0..=j {
                    let mut falling: i128 = 1;
                    for i in 0..k as i64 {
                        falling *= (x - i) as i128;
                    }
                    total += stirling2(j, k).unwrap() as i128 * falling;
                }
                assert_eq!(total, (x as i128).pow(j as u32));
            }
        }
    }

    #[test]
    fn sigma_examples() {
        let s = IpdSpec::real(&[2.0], &[1]).unwrap();
        assert_eq!(sigma_coeffs(&s), vec![cx(2.0), cx(1.0)]);
        let s = IpdSpec::real(&[1.0, 1.0], &[1, 1]).unwrap();
        assert_eq!(sigma_coeffs(&s), vec![cx(1.0), cx(2.0), cx(1.0)]);
        let s = IpdSpec::real(&[0.3, 1.7, 2.2], &[2, 1, 3]).unwrap();
        assert_eq!(*sigma_coeffs(&s).last().unwrap(), cx(1.0));
    }

    #[test]
    fn gamma_examples() {
        assert!(close(gamma_cx(cx(1.0)).unwrap(), cx(1.0), 1e-14));
        assert!(close(gamma_cx(cx(0.5)).unwrap(), cx(PI.sqrt()), 1e-14));
        assert!(close(gamma_cx(cx(5.0)).unwrap(), cx(24.0), 1e-14));
        assert!(matches!(gamma_cx(cx(-2.0)), Err(Error::GammaPole(_))));
        assert!(matches!(lgamma_cx(cx(0.0)), Err(Error::GammaPole(_))));
    }

    #[test]
    fn gamma_reflection_and_recurrence() {
        // Γ(z)Γ(1-z) = π / sin(πz)
        for &z in &[Cx::new(0.3, 0.4), Cx::new(-1.7, 0.2), Cx::new(2.2, -1.5)] {
            let lhs = gamma_cx(z).unwrap() * gamma_cx(cx(1.0) - z).unwrap();
            let rhs = cx(PI) / (cx(PI) * z).sin();
            assert!(close(lhs, rhs, 1e-13), "{z}");
            let rec = gamma_cx(z + cx(1.0)).unwrap();
            assert!(close(rec, z * gamma_cx(z).unwrap(), 1e-13), "{z}");
            let via_log = lgamma_cx(z).unwrap().exp();
            assert!(close(via_log, gamma_cx(z).unwrap(), 1e-13), "{z}");
        }
    }

    #[test]
    fn gamma_known_values() {
        // Γ(1/3) and Γ(i) from standard tables.
        let g13 = gamma_cx(cx(1.0 / 3.0)).unwrap();
        assert!(close(g13, cx(2.678_938_534_707_747_6), 1e-14));
        let gi = gamma_cx(Cx::new(0.0, 1.0)).unwrap();
        assert!(close(
            gi,
            Cx::new(-0.154_949_828_301_810_7, -0.498_015_668_118_356),
            1e-13
        ));
        let g = gamma_cx(cx(-2.5)).unwrap();
        assert!(close(g, cx(-0.945_308_720_482_941_9), 1e-13));
    }
}
