//! Dense complex polynomials in the monomial basis and their roots.

use serde::{Deserialize, Serialize};

use crate::arith::{cx, Cx};
use crate::error::{Error, Result};

/// Coefficients below this fraction of the assembly scale count as zero.
pub const ZERO_REL: f64 = 1e-12;

/// Largest accepted scaled residual `|p(z)| / Σ|c_k||z|^k` at a root.
pub const ROOT_RESIDUAL_MAX: f64 = 1e-8;

/// Polynomial with ascending coefficients.
///
/// `scale` is the largest magnitude seen while the polynomial was assembled;
/// it is the yardstick for deciding that a coefficient (or the whole
/// polynomial) vanishes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CPoly {
    pub coeffs: Vec<Cx>,
    pub scale: f64,
}

fn max_norm(c: &[Cx]) -> f64 {
    c.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl CPoly {
    pub fn new(coeffs: Vec<Cx>) -> Self {
        let scale = max_norm(&coeffs);
        CPoly { coeffs, scale }
    }

    pub fn zero() -> Self {
        CPoly {
            coeffs: vec![cx(0.0)],
            scale: 0.0,
        }
    }

    pub fn constant(c: Cx) -> Self {
        Self::new(vec![c])
    }

    /// `u + v t`.
    pub fn linear(u: Cx, v: Cx) -> Self {
        Self::new(vec![u, v])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Cx]) -> Self {
        let mut p = Self::constant(cx(1.0));
        for &z in roots {
            p = p.mul_linear(-z, cx(1.0));
        }
        p
    }

    /// `(alpha + t)_n` as a polynomial in `t`.
    pub fn rising(alpha: Cx, n: usize) -> Self {
        let mut p = Self::constant(cx(1.0));
        for i in 0..n {
            p = p.mul_linear(alpha + cx(i as f64), cx(1.0));
        }
        p
    }

    /// `(alpha - t)_n` as a polynomial in `t`.
    pub fn rising_neg(alpha: Cx, n: usize) -> Self {
        let mut p = Self::constant(cx(1.0));
        for i in 0..n {
            p = p.mul_linear(alpha + cx(i as f64), cx(-1.0));
        }
        p
    }

    /// Multiplies by `u + v t`.
    pub fn mul_linear(&self, u: Cx, v: Cx) -> Self {
        let mut out = vec![cx(0.0); self.coeffs.len() + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k] += c * u;
            out[k + 1] += c * v;
        }
        let scale = max_norm(&out).max(self.scale * (u.norm() + v.norm()));
        CPoly { coeffs: out, scale }
    }

    pub fn mul(&self, other: &CPoly) -> Self {
        let mut out = vec![cx(0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        let scale = max_norm(&out).max(self.scale * other.scale);
        CPoly { coeffs: out, scale }
    }

    pub fn scaled(&self, s: Cx) -> Self {
        CPoly {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
            scale: self.scale * s.norm(),
        }
    }

    pub fn add(&self, other: &CPoly) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![cx(0.0); n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k] += c;
        }
        for (k, &c) in other.coeffs.iter().enumerate() {
            out[k] += c;
        }
        let scale = max_norm(&out).max(self.scale).max(other.scale);
        CPoly { coeffs: out, scale }
    }

    pub fn eval(&self, t: Cx) -> Cx {
        self.coeffs
            .iter()
            .rev()
            .fold(cx(0.0), |acc, &c| acc * t + c)
    }

    fn eval_with_derivative(&self, t: Cx) -> (Cx, Cx) {
        let mut p = cx(0.0);
        let mut dp = cx(0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }

    fn zero_threshold(&self) -> f64 {
        ZERO_REL * self.scale
    }

    pub fn is_identically_zero(&self) -> bool {
        let thr = self.zero_threshold();
        self.coeffs.iter().all(|c| c.norm() <= thr)
    }

    /// Degree after dropping negligible leading coefficients (0 for the zero
    /// polynomial).
    pub fn degree(&self) -> usize {
        let thr = self.zero_threshold();
        self.coeffs
            .iter()
            .rposition(|c| c.norm() > thr)
            .unwrap_or(0)
    }

    pub fn trimmed(&self) -> Self {
        CPoly {
            coeffs: self.coeffs[..=self.degree()].to_vec(),
            scale: self.scale,
        }
    }

    fn is_real(&self) -> bool {
        let thr = 1e-14 * self.scale.max(f64::MIN_POSITIVE);
        self.coeffs.iter().all(|c| c.im.abs() <= thr)
    }

    /// `|p(z)| / Σ |c_k| |z|^k`.
    pub fn scaled_residual(&self, z: Cx) -> f64 {
        let r = z.norm();
        let mag = self
            .coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm());
        if mag == 0.0 {
            0.0
        } else {
            self.eval(z).norm() / mag
        }
    }
}

/// Roots of a polynomial with their scaled residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Cx>,
    pub residuals: Vec<f64>,
}

impl RootSet {
    pub fn worst_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Sorts lexicographically by (real, imaginary).
pub fn sort_roots(roots: &mut [Cx]) {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then_with(|| a.im.total_cmp(&b.im)));
}

const ABERTH_MAX_ITER: usize = 500;

/// All roots of `p`, by Aberth–Ehrlich iteration followed by a Newton polish.
pub fn roots(p: &CPoly) -> Result<RootSet> {
    if p.is_identically_zero() {
        return Err(Error::IdenticallyZero);
    }
    let p = p.trimmed();
    let n = p.coeffs.len() - 1;
    if n == 0 {
        return Ok(RootSet {
            roots: vec![],
            residuals: vec![],
        });
    }
    let mut z = if n == 1 {
        vec![-p.coeffs[0] / p.coeffs[1]]
    } else {
        aberth(&p)
    };
    for zi in z.iter_mut() {
        polish(&p, zi);
    }
    if p.is_real() {
        for zi in z.iter_mut() {
            if zi.im.abs() <= 1e-12 * (1.0 + zi.re.abs()) {
                zi.im = 0.0;
            }
        }
    }
    sort_roots(&mut z);
    let residuals: Vec<f64> = z.iter().map(|&zi| p.scaled_residual(zi)).collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if !worst.is_finite() || worst > ROOT_RESIDUAL_MAX {
        return Err(Error::IllConditioned(worst));
    }
    Ok(RootSet {
        roots: z,
        residuals,
    })
}

fn aberth(p: &CPoly) -> Vec<Cx> {
    let n = p.coeffs.len() - 1;
    let lead = p.coeffs[n];
    let monic: Vec<Cx> = p.coeffs.iter().map(|&c| c / lead).collect();
    let monic = CPoly::new(monic);
    // Cauchy-type radius and the geometric mean of the root moduli
    let upper = 1.0
        + monic.coeffs[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let geo = monic.coeffs[0].norm().powf(1.0 / n as f64);
    let radius = if geo > 0.0 && geo.is_finite() {
        geo.min(upper)
    } else {
        upper * 0.5
    };
    let centre = -monic.coeffs[n - 1] / (n as f64);
    let mut z: Vec<Cx> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            centre + Cx::from_polar(radius.max(1e-3), theta)
        })
        .collect();
    for _ in 0..ABERTH_MAX_ITER {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (v, dv) = monic.eval_with_derivative(z[i]);
            if v == cx(0.0) {
                continue;
            }
            let ratio = v / dv;
            let mut s = cx(0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    s += cx(1.0) / (z[i] - zj);
                }
            }
            let step = ratio / (cx(1.0) - ratio * s);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-16 {
            break;
        }
    }
    z
}

fn polish(p: &CPoly, z: &mut Cx) {
    let mut best = p.scaled_residual(*z);
    for _ in 0..3 {
        let (v, dv) = p.eval_with_derivative(*z);
        if dv == cx(0.0) {
            return;
        }
        let cand = *z - v / dv;
        let r = p.scaled_residual(cand);
        if r < best {
            *z = cand;
            best = r;
        } else {
            return;
        }
    }
}
