//! Orthonormal Hermite basis on Gauss space, the spectral action of
//! `L = Laplacian - x . grad`, and the symmetric Poincare inequality with
//! constant 1/2.
//!
//! Everything is in the orthonormal (probabilists') normalization, so
//! Parseval and the spectral identities read off directly:
//! `-L H_alpha = |alpha| H_alpha`, `E |grad f|^2 = sum |alpha| f_alpha^2`,
//! and `d/dx h_k = sqrt(k) h_{k-1}`.

use crate::error::{Error, Result};
use crate::gauss::QuadratureRule;
use crate::grid::FunctionFamily;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Multi-indices with `|alpha| <= degree` in graded lexicographic order:
/// total degree ascending, first axis most significant (descending) within
/// each degree block. This order fixes the coefficient file layout.
pub fn multi_indices(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut scratch = vec![0usize; dim];
    for total in 0..=degree {
        fill_degree(dim, total, 0, &mut scratch, &mut out);
    }
    out
}

fn fill_degree(
    dim: usize,
    remaining: usize,
    axis: usize,
    scratch: &mut [usize],
    out: &mut Vec<Vec<usize>>,
) {
    if axis == dim - 1 {
        scratch[axis] = remaining;
        out.push(scratch.to_vec());
        return;
    }
    for k in (0..=remaining).rev() {
        scratch[axis] = k;
        fill_degree(dim, remaining - k, axis + 1, scratch, out);
    }
}

/// 1-D orthonormal Hermite values `h_0(x) .. h_deg(x)` by the stable
/// three-term recurrence `h_{k+1} = (x h_k - sqrt(k) h_{k-1}) / sqrt(k+1)`.
pub fn hermite_values_1d(deg: usize, x: f64, out: &mut [f64]) {
    debug_assert!(out.len() > deg);
    out[0] = 1.0;
    if deg >= 1 {
        out[1] = x;
    }
    for k in 1..deg {
        out[k + 1] = (x * out[k] - (k as f64).sqrt() * out[k - 1]) / ((k + 1) as f64).sqrt();
    }
}

/// Orthonormal Hermite polynomial `H_alpha(x)` as a product over axes.
pub fn hermite_eval(alpha: &[usize], x: &[f64]) -> f64 {
    debug_assert_eq!(alpha.len(), x.len());
    let mut buf = [0.0f64; 65];
    let mut prod = 1.0;
    for (&a, &xi) in alpha.iter().zip(x) {
        assert!(a <= 64, "per-axis degree limited to 64");
        hermite_values_1d(a, xi, &mut buf[..a + 1]);
        prod *= buf[a];
    }
    prod
}

/// Degree-truncated expansion `f = sum f_alpha H_alpha`, coefficients in
/// graded lex order.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteExpansion {
    dim: usize,
    degree: usize,
    alphas: Vec<Vec<usize>>,
    coeffs: Vec<f64>,
}

impl HermiteExpansion {
    /// Expansion with all coefficients zero.
    pub fn zero(dim: usize, degree: usize) -> Self {
        let alphas = multi_indices(dim, degree);
        let coeffs = vec![0.0; alphas.len()];
        HermiteExpansion {
            dim,
            degree,
            alphas,
            coeffs,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn alphas(&self) -> &[Vec<usize>] {
        &self.alphas
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn position(&self, alpha: &[usize]) -> Option<usize> {
        self.alphas.iter().position(|a| a == alpha)
    }

    pub fn coeff(&self, alpha: &[usize]) -> f64 {
        self.position(alpha).map_or(0.0, |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, alpha: &[usize], value: f64) -> Result<()> {
        match self.position(alpha) {
            Some(i) => {
                self.coeffs[i] = value;
                Ok(())
            }
            None => Err(Error::Hypothesis(format!(
                "multi-index {alpha:?} outside the degree-{} truncation",
                self.degree
            ))),
        }
    }

    /// Pointwise evaluation via per-axis recurrence tables.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let tables = self.tables(x);
        let mut total = 0.0;
        for (alpha, &c) in self.alphas.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            let mut prod = c;
            for (a, &k) in alpha.iter().enumerate() {
                prod *= tables[a][k];
            }
            total += prod;
        }
        total
    }

    /// Gradient via the exact derivative relation `d h_k = sqrt(k) h_{k-1}`.
    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        let tables = self.tables(x);
        out.fill(0.0);
        for (alpha, &c) in self.alphas.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            for (d, slot) in out.iter_mut().enumerate() {
                if alpha[d] == 0 {
                    continue;
                }
                let mut prod = c * (alpha[d] as f64).sqrt();
                for (a, &k) in alpha.iter().enumerate() {
                    let deg = if a == d { k - 1 } else { k };
                    prod *= tables[a][deg];
                }
                *slot += prod;
            }
        }
    }

    fn tables(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut tables = Vec::with_capacity(self.dim);
        for &xi in x {
            let mut t = vec![0.0; self.degree + 1];
            hermite_values_1d(self.degree, xi, &mut t);
            tables.push(t);
        }
        tables
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffRepr {
    alpha: Vec<usize>,
    coeff: f64,
}

impl Serialize for HermiteExpansion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let list: Vec<CoeffRepr> = self
            .alphas
            .iter()
            .zip(&self.coeffs)
            .map(|(a, &c)| CoeffRepr {
                alpha: a.clone(),
                coeff: c,
            })
            .collect();
        list.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermiteExpansion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let list = Vec::<CoeffRepr>::deserialize(d)?;
        if list.is_empty() {
            return Err(D::Error::custom("empty coefficient list"));
        }
        let dim = list[0].alpha.len();
        let degree = list
            .iter()
            .map(|r| r.alpha.iter().sum::<usize>())
            .max()
            .unwrap();
        let mut e = HermiteExpansion::zero(dim, degree);
        for r in &list {
            if r.alpha.len() != dim {
                return Err(D::Error::custom("inconsistent multi-index dimensions"));
            }
            e.set_coeff(&r.alpha, r.coeff).map_err(D::Error::custom)?;
        }
        Ok(e)
    }
}

/// Expand a family: `f_alpha = E f(X) H_alpha(X)` by tensor quadrature.
/// Requires `rule.order() >= degree + 1` so products `f H_alpha` of a
/// degree-`degree` polynomial integrate exactly.
pub fn expand(
    family: &FunctionFamily,
    dim: usize,
    degree: usize,
    rule: &QuadratureRule,
) -> Result<HermiteExpansion> {
    if rule.order() < degree + 1 {
        return Err(Error::Quadrature(format!(
            "rule order {} too small for degree {degree}",
            rule.order()
        )));
    }
    let mut e = HermiteExpansion::zero(dim, degree);
    let m = rule.order();
    // per-axis Hermite tables at the quadrature nodes
    let mut tables = vec![vec![0.0f64; degree + 1]; m];
    for (i, t) in tables.iter_mut().enumerate() {
        hermite_values_1d(degree, rule.nodes()[i], t);
    }
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0f64; dim];
    loop {
        let mut w = 1.0;
        for (a, &i) in idx.iter().enumerate() {
            point[a] = rule.nodes()[i];
            w *= rule.weights()[i];
        }
        let fv = family.eval(&point);
        if !fv.is_finite() {
            return Err(Error::Family(format!(
                "family {} not finite at {point:?}",
                family.name()
            )));
        }
        let wf = w * fv;
        for (slot, alpha) in e.alphas.iter().enumerate() {
            let mut basis = 1.0;
            for (a, &k) in alpha.iter().enumerate() {
                basis *= tables[idx[a]][k];
            }
            e.coeffs[slot] += wf * basis;
        }
        let mut a = dim;
        let mut done = false;
        loop {
            if a == 0 {
                done = true;
                break;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < m {
                break;
            }
            idx[a] = 0;
        }
        if done {
            break;
        }
    }
    Ok(e)
}

/// Spectral action of `L`: coefficient `alpha` maps to `-|alpha| f_alpha`.
pub fn apply_l(e: &HermiteExpansion) -> HermiteExpansion {
    let mut out = e.clone();
    for (alpha, c) in out.alphas.iter().zip(out.coeffs.iter_mut()) {
        let total: usize = alpha.iter().sum();
        *c *= -(total as f64);
    }
    out
}

/// Dirichlet energy `E |grad f|^2 = sum |alpha| f_alpha^2`.
pub fn dirichlet_energy(e: &HermiteExpansion) -> f64 {
    e.alphas
        .iter()
        .zip(&e.coeffs)
        .map(|(alpha, &c)| alpha.iter().sum::<usize>() as f64 * c * c)
        .sum()
}

/// Outcome of the symmetric Poincare check.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PoincareOutcome {
    /// `(sum f_alpha^2) / (1/2 sum |alpha| f_alpha^2)`
    pub ratio: f64,
    pub pass: bool,
}

const HYPOTHESIS_TOL: f64 = 1e-9;

/// Symmetric Poincare inequality `E f^2 <= 1/2 E |grad f|^2` for `f`
/// orthogonal to constants and linear functions. Errors (naming the
/// offending coefficient) if the hypothesis fails.
pub fn poincare_check(e: &HermiteExpansion) -> Result<PoincareOutcome> {
    for (alpha, &c) in e.alphas.iter().zip(&e.coeffs) {
        let total: usize = alpha.iter().sum();
        if total <= 1 && c.abs() > HYPOTHESIS_TOL {
            return Err(Error::Hypothesis(format!(
                "coefficient {alpha:?} = {c:.3e} violates orthogonality to degree <= 1"
            )));
        }
    }
    let num: f64 = e
        .alphas
        .iter()
        .zip(&e.coeffs)
        .filter(|(a, _)| a.iter().sum::<usize>() >= 2)
        .map(|(_, &c)| c * c)
        .sum();
    let den = 0.5 * dirichlet_energy(e);
    let ratio = if num == 0.0 { 0.0 } else { num / den };
    Ok(PoincareOutcome {
        ratio,
        pass: ratio <= 1.0 + HYPOTHESIS_TOL,
    })
}

/// Residual of the integration-by-parts identity
/// `-E (Lf) g = E grad f . grad g`, both sides by tensor quadrature.
pub fn integration_by_parts_check(
    e1: &HermiteExpansion,
    e2: &HermiteExpansion,
    rule: &QuadratureRule,
) -> Result<f64> {
    if e1.dim != e2.dim {
        return Err(Error::Hypothesis("dimension mismatch".into()));
    }
    if 2 * rule.order() < e1.degree + e2.degree + 1 {
        return Err(Error::Quadrature(format!(
            "rule order {} cannot integrate degree {} products exactly",
            rule.order(),
            e1.degree + e2.degree
        )));
    }
    let dim = e1.dim;
    let minus_lf = {
        let mut m = apply_l(e1);
        for c in m.coeffs.iter_mut() {
            *c = -*c;
        }
        m
    };
    let m = rule.order();
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0f64; dim];
    let mut g1 = vec![0.0f64; dim];
    let mut g2 = vec![0.0f64; dim];
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    loop {
        let mut w = 1.0;
        for (a, &i) in idx.iter().enumerate() {
            point[a] = rule.nodes()[i];
            w *= rule.weights()[i];
        }
        lhs += w * minus_lf.eval(&point) * e2.eval(&point);
        e1.grad(&point, &mut g1);
        e2.grad(&point, &mut g2);
        let dot: f64 = g1.iter().zip(&g2).map(|(a, b)| a * b).sum();
        rhs += w * dot;
        let mut a = dim;
        let mut done = false;
        loop {
            if a == 0 {
                done = true;
                break;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < m {
                break;
            }
            idx[a] = 0;
        }
        if done {
            break;
        }
    }
    Ok((lhs - rhs).abs())
}
