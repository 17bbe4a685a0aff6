//! Expectation against the standard Gaussian measure.
//!
//! Two integrators, on purpose: Gauss-Hermite quadrature (probabilists'
//! normalization) for closed-form integrands, and a Gaussian-weighted
//! trapezoid sum over the grid box for transform outputs that exist only on
//! the grid. Every verification report records which path produced each
//! factor.
//!
//! Quadrature nodes and weights come from the symmetric tridiagonal Jacobi
//! matrix, diagonalized by an in-repo implicit-QL routine. An independent
//! construction (Newton root-finding on the three-term recurrence with
//! Christoffel weights) cross-checks it in the tests.

use crate::error::{Error, Result};
use crate::fclass;
use crate::grid::{sample, FunctionFamily, GridFunction, GridSpec};
use crate::special;

/// Gauss-Hermite rule in probabilists' normalization: weights sum to 1 and
/// the rule integrates polynomials of degree <= 2m-1 exactly against the
/// standard Gaussian.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// One-dimensional expectation of a closed-form integrand.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

const MAX_ORDER: usize = 128;

/// Build the order-`m` Gauss-Hermite rule from the Jacobi matrix
/// eigenproblem. Nodes are symmetrized about 0 exactly and weights
/// normalized to sum to 1.
pub fn gauss_hermite_rule(m: usize) -> Result<QuadratureRule> {
    if m < 1 || m > MAX_ORDER {
        return Err(Error::Quadrature(format!(
            "order must be in 1..={MAX_ORDER}, got {m}"
        )));
    }
    // Probabilists' Hermite Jacobi matrix: zero diagonal, off-diagonal
    // sqrt(k) for k = 1..m-1.
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m];
    for k in 1..m {
        off[k - 1] = (k as f64).sqrt();
    }
    let mut first_row = vec![0.0; m];
    first_row[0] = 1.0;
    tridiag_ql(&mut diag, &mut off, &mut first_row)?;

    let mut pairs: Vec<(f64, f64)> = diag
        .into_iter()
        .zip(first_row)
        .map(|(x, z)| (x, z * z))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    symmetrize_rule(&mut nodes, &mut weights);
    Ok(QuadratureRule { nodes, weights })
}

/// Independent construction: Newton iteration on the orthonormal recurrence
/// with interlacing brackets, weights via the Christoffel function
/// `w_j = 1 / sum_{k<m} h_k(x_j)^2`. Used to validate the eigensolver path.
pub fn gauss_hermite_rule_newton(m: usize) -> Result<QuadratureRule> {
    if m < 1 || m > MAX_ORDER {
        return Err(Error::Quadrature(format!(
            "order must be in 1..={MAX_ORDER}, got {m}"
        )));
    }
    // Roots of h_k interlace those of h_{k+1}; build up from h_1.
    let mut roots = vec![0.0f64];
    for k in 2..=m {
        let bound = 2.0 * (k as f64).sqrt() + 2.0;
        let mut brackets = Vec::with_capacity(k + 1);
        brackets.push(-bound);
        brackets.extend_from_slice(&roots);
        brackets.push(bound);
        let mut next = Vec::with_capacity(k);
        for w in brackets.windows(2) {
            next.push(refine_root(k, w[0], w[1]));
        }
        roots = next;
    }
    let mut weights = Vec::with_capacity(m);
    let mut h = vec![0.0; m + 1];
    for &x in &roots {
        hermite_norm_values(x, &mut h);
        let s: f64 = h[..m].iter().map(|v| v * v).sum();
        weights.push(1.0 / s);
    }
    symmetrize_rule(&mut roots, &mut weights);
    Ok(QuadratureRule {
        nodes: roots,
        weights,
    })
}

// Orthonormal probabilists' Hermite values h_0..h_deg at x.
fn hermite_norm_values(x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 1..out.len() - 1 {
        out[k + 1] = (x * out[k] - (k as f64).sqrt() * out[k - 1]) / ((k + 1) as f64).sqrt();
    }
}

// Root of h_deg in (lo, hi) by bisection-guarded Newton, using
// h_deg'(x) = sqrt(deg) * h_{deg-1}(x).
fn refine_root(deg: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut h = vec![0.0; deg + 1];
    let eval = |x: f64, h: &mut [f64]| {
        hermite_norm_values(x, h);
        (h[deg], (deg as f64).sqrt() * h[deg - 1])
    };
    let (mut flo, _) = eval(lo, &mut h);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fx, dfx) = eval(x, &mut h);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == (flo < 0.0) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-16 * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

// Enforce exact node symmetry about 0 and unit weight mass.
fn symmetrize_rule(nodes: &mut [f64], weights: &mut [f64]) {
    let m = nodes.len();
    for j in 0..m / 2 {
        let k = m - 1 - j;
        let x = 0.5 * (nodes[k] - nodes[j]);
        nodes[j] = -x;
        nodes[k] = x;
        let w = 0.5 * (weights[j] + weights[k]);
        weights[j] = w;
        weights[k] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
}

// Implicit-QL diagonalization of a symmetric tridiagonal matrix, rotations
// accumulated into `row` (the first row of the eigenvector matrix).
// Eigenvalues land in `diag`.
fn tridiag_ql(diag: &mut [f64], off: &mut [f64], row: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n == 1 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::Quadrature(
                    "tridiagonal QL failed to converge".into(),
                ));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflowed = false;
            for i in (l..m).rev() {
                let mut f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    // a rotation annihilated early; restart the sweep
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflowed = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                // accumulate the rotation into the tracked row
                f = row[i + 1];
                row[i + 1] = s * row[i] + c * f;
                row[i] = c * row[i] - s * f;
            }
            if underflowed {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

/// Gaussian moment `E X^k`: 0 for odd k, (k-1)!! for even k.
pub fn gaussian_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        let mut acc = 1.0;
        let mut j = 1;
        while j < k {
            acc *= j as f64;
            j += 2;
        }
        acc
    }
}

/// Tensor-product expectation `E f(X)` for a closed-form family, `X`
/// standard Gaussian on `R^dim`.
pub fn expect_closed(family: &FunctionFamily, rule: &QuadratureRule, dim: usize) -> f64 {
    let m = rule.order();
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0f64; dim];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for (a, &i) in idx.iter().enumerate() {
            point[a] = rule.nodes[i];
            w *= rule.weights[i];
        }
        total += w * family.eval(&point);
        // odometer increment
        let mut a = dim;
        loop {
            if a == 0 {
                return total;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < m {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// Result of a grid expectation: the trapezoid value, the Gaussian mass
/// outside the box, and whether any `+inf` node was dropped.
#[derive(Clone, Copy, Debug)]
pub struct GridExpectation {
    pub value: f64,
    pub tail_mass: f64,
    pub truncated: bool,
}

/// Weight assigned to a node below which an `+inf` value is dropped (with
/// the `truncated` flag) instead of rejected.
const NEGLIGIBLE_WEIGHT: f64 = 1e-16;

/// Gaussian-weighted trapezoid sum of a grid function over its box.
/// `+inf` values are only tolerated at negligible-weight nodes.
pub fn expect_grid(f: &GridFunction) -> Result<GridExpectation> {
    let spec = f.spec();
    let dim = spec.dim();
    // Per-axis vectors: trapezoid weight times the 1-D Gaussian density.
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut axis_w: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for a in 0..dim {
        let n = spec.count(a);
        let h = spec.spacing(a);
        let mut w = Vec::with_capacity(n);
        for k in 0..n {
            let x = spec.coord(a, k);
            let trap = if k == 0 || k == n - 1 { 0.5 * h } else { h };
            w.push(trap * norm * (-0.5 * x * x).exp());
        }
        axis_w.push(w);
    }
    let mut multi = vec![0usize; dim];
    let mut total = 0.0;
    let mut truncated = false;
    for flat in 0..spec.len() {
        spec.multi_index(flat, &mut multi);
        let mut w = 1.0;
        for (a, &k) in multi.iter().enumerate() {
            w *= axis_w[a][k];
        }
        let v = f.value(flat);
        if v == f64::INFINITY {
            if w > NEGLIGIBLE_WEIGHT {
                return Err(Error::GridInvariant(format!(
                    "+inf value at node {flat} with non-negligible Gaussian weight {w:.3e}"
                )));
            }
            truncated = true;
            continue;
        }
        total += w * v;
    }
    let mut box_mass = 1.0;
    for a in 0..dim {
        box_mass *= special::normal_box_mass(spec.half_width(a));
    }
    Ok(GridExpectation {
        value: total,
        tail_mass: 1.0 - box_mass,
        truncated,
    })
}

/// Plain Lebesgue trapezoid integral of a grid function over its box.
/// Values must be finite.
pub fn box_lebesgue_integral(f: &GridFunction) -> Result<f64> {
    let spec = f.spec();
    let dim = spec.dim();
    let mut axis_w: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for a in 0..dim {
        let n = spec.count(a);
        let h = spec.spacing(a);
        let mut w = Vec::with_capacity(n);
        for k in 0..n {
            w.push(if k == 0 || k == n - 1 { 0.5 * h } else { h });
        }
        axis_w.push(w);
    }
    let mut multi = vec![0usize; dim];
    let mut total = 0.0;
    for flat in 0..spec.len() {
        let v = f.value(flat);
        if !v.is_finite() {
            return Err(Error::GridInvariant(format!(
                "Lebesgue integral requires finite values, found {v} at node {flat}"
            )));
        }
        spec.multi_index(flat, &mut multi);
        let mut w = 1.0;
        for (a, &k) in multi.iter().enumerate() {
            w *= axis_w[a][k];
        }
        total += w * v;
    }
    Ok(total)
}

/// Check the Gaussian concentration moment bound for a 1-Lipschitz,
/// mean-zero family: returns `max over p of (E|phi|^p)^{1/p} / sqrt(p)`.
///
/// The Lipschitz constant is measured on `spec` and must not exceed
/// `1 + 1e-9`; the family is centered by its quadrature mean, which must
/// land within `1e-6` of zero.
pub fn concentration_moment_check(
    family: &FunctionFamily,
    p_list: &[f64],
    rule: &QuadratureRule,
    spec: &GridSpec,
) -> Result<f64> {
    let sampled = sample(family, spec)?;
    let lip = fclass::lipschitz_estimate(&sampled)?;
    if lip > 1.0 + 1e-9 {
        return Err(Error::Hypothesis(format!(
            "family {} is not 1-Lipschitz: measured constant {lip}",
            family.name()
        )));
    }
    let dim = spec.dim();
    let mean = expect_closed(family, rule, dim);
    let centered = |x: &[f64]| family.eval(x) - mean;
    let residual = {
        let mut idx = vec![0usize; dim];
        let mut point = vec![0.0f64; dim];
        let mut total = 0.0;
        loop {
            let mut w = 1.0;
            for (a, &i) in idx.iter().enumerate() {
                point[a] = rule.nodes[i];
                w *= rule.weights[i];
            }
            total += w * centered(&point);
            let mut a = dim;
            let mut done = false;
            loop {
                if a == 0 {
                    done = true;
                    break;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < rule.order() {
                    break;
                }
                idx[a] = 0;
            }
            if done {
                break;
            }
        }
        total
    };
    if residual.abs() > 1e-6 {
        return Err(Error::Hypothesis(format!(
            "family {} not mean-zero after centering: residual {residual:.3e}",
            family.name()
        )));
    }
    let mut worst = 0.0f64;
    for &p in p_list {
        if p < 1.0 {
            return Err(Error::Hypothesis(format!("moment order p={p} < 1")));
        }
        let moment = tensor_integrate(rule, dim, |x| centered(x).abs().powf(p));
        let ratio = moment.powf(1.0 / p) / p.sqrt();
        if ratio > worst {
            worst = ratio;
        }
    }
    Ok(worst)
}

// Tensor-product quadrature of an arbitrary closure.
fn tensor_integrate(rule: &QuadratureRule, dim: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let m = rule.order();
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0f64; dim];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for (a, &i) in idx.iter().enumerate() {
            point[a] = rule.nodes[i];
            w *= rule.weights[i];
        }
        total += w * f(&point);
        let mut a = dim;
        loop {
            if a == 0 {
                return total;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < m {
                break;
            }
            idx[a] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn low_order_rules_match_closed_forms() {
        let r1 = gauss_hermite_rule(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert_eq!(r1.weights(), &[1.0]);

        let r2 = gauss_hermite_rule(2).unwrap();
        assert_abs_diff_eq!(r2.nodes()[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r2.nodes()[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r2.weights()[0], 0.5, epsilon = 1e-14);

        let r3 = gauss_hermite_rule(3).unwrap();
        let s3 = 3.0f64.sqrt();
        assert_abs_diff_eq!(r3.nodes()[0], -s3, epsilon = 1e-13);
        assert_abs_diff_eq!(r3.nodes()[1], 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(r3.nodes()[2], s3, epsilon = 1e-13);
        assert_abs_diff_eq!(r3.weights()[0], 1.0 / 6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r3.weights()[1], 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn rule_rejects_out_of_range_order() {
        assert!(gauss_hermite_rule(0).is_err());
        assert!(gauss_hermite_rule(129).is_err());
    }

    #[test]
    fn eigen_and_newton_paths_agree() {
        for m in [2, 5, 16, 40, 64] {
            let a = gauss_hermite_rule(m).unwrap();
            let b = gauss_hermite_rule_newton(m).unwrap();
            for j in 0..m {
                assert_abs_diff_eq!(a.nodes()[j], b.nodes()[j], epsilon = 1e-11);
                assert_relative_eq!(a.weights()[j], b.weights()[j], max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn moment_exactness_up_to_degree() {
        for m in [1usize, 2, 3, 5, 8, 13, 21, 40, 64] {
            let rule = gauss_hermite_rule(m).unwrap();
            assert_abs_diff_eq!(rule.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-14);
            let max_deg = (2 * m - 1).min(50);
            for k in 0..=max_deg {
                let got = rule.integrate(|x| x.powi(k as i32));
                let want = gaussian_moment(k);
                if k % 2 == 1 {
                    let scale = rule.integrate(|x| x.abs().powi(k as i32));
                    assert!(
                        got.abs() <= 1e-12 * scale.max(1.0),
                        "m={m} k={k}: odd moment {got:e}"
                    );
                } else if want == 0.0 {
                    assert_abs_diff_eq!(got, 0.0, epsilon = 1e-12);
                } else {
                    assert_relative_eq!(got, want, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn expect_closed_examples() {
        let rule = gauss_hermite_rule(32).unwrap();
        assert_abs_diff_eq!(
            expect_closed(&FunctionFamily::constant(1.0), &rule, 1),
            1.0,
            epsilon = 1e-14
        );
        let x2 = FunctionFamily::scale(2.0, FunctionFamily::quadratic(1.0));
        assert_abs_diff_eq!(expect_closed(&x2, &rule, 1), 1.0, epsilon = 1e-14);
        // E e^{-X^2/2} = 1/sqrt(2)
        assert_abs_diff_eq!(
            expect_closed(&FunctionFamily::gaussian_density(1.0), &rule, 1),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-7
        );
    }

    #[test]
    fn expect_grid_examples() {
        let spec = make_grid(1, &[6.0], &[241]).unwrap();
        let one = sample(&FunctionFamily::constant(1.0), &spec).unwrap();
        let e = expect_grid(&one).unwrap();
        assert_abs_diff_eq!(e.value, 1.0, epsilon = 2e-8);
        assert_relative_eq!(e.tail_mass, 1.973175290075389e-9, max_relative = 1e-6);
        assert!(!e.truncated);

        let x2 = sample(
            &FunctionFamily::scale(2.0, FunctionFamily::quadratic(1.0)),
            &spec,
        )
        .unwrap();
        assert_abs_diff_eq!(expect_grid(&x2).unwrap().value, 1.0, epsilon = 1e-5);

        // E e^X = e^{1/2}
        let ex = sample(
            &FunctionFamily::from_fn("exp", crate::grid::Parity::Neither, |x| x[0].exp()),
            &spec,
        )
        .unwrap();
        assert_abs_diff_eq!(expect_grid(&ex).unwrap().value, 1.6487212707001282, epsilon = 1e-4);
    }

    #[test]
    fn expect_grid_handles_infinite_tails() {
        // +inf only tolerated where the node weight drops below 1e-16,
        // which needs |x| beyond ~8.2; use a wide box
        let wide = make_grid(1, &[9.0], &[241]).unwrap();
        let mut values = vec![1.0; wide.len()];
        values[0] = f64::INFINITY;
        let f = GridFunction::new(wide.clone(), values).unwrap();
        let e = expect_grid(&f).unwrap();
        assert!(e.truncated);
        assert_abs_diff_eq!(e.value, 1.0, epsilon = 1e-7);

        // on the default desk grid every node weight exceeds the threshold
        let spec = make_grid(1, &[6.0], &[241]).unwrap();
        let mut bad = vec![1.0; spec.len()];
        bad[0] = f64::INFINITY;
        let g = GridFunction::new(spec.clone(), bad).unwrap();
        assert!(expect_grid(&g).is_err());

        let mut worse = vec![1.0; spec.len()];
        worse[spec.center()] = f64::INFINITY;
        let h = GridFunction::new(spec, worse).unwrap();
        assert!(expect_grid(&h).is_err());
    }

    #[test]
    fn grid_and_quadrature_paths_agree_on_smooth_families() {
        let rule = gauss_hermite_rule(40).unwrap();
        let spec = make_grid(1, &[6.0], &[241]).unwrap();
        for fam in [
            FunctionFamily::quadratic(1.0),
            FunctionFamily::power4(),
            FunctionFamily::cosine_bump(0.7, 1.3),
            FunctionFamily::gaussian_density(1.0),
            FunctionFamily::random_even_poly(9, 6),
        ] {
            let closed = expect_closed(&fam, &rule, 1);
            let grid = expect_grid(&sample(&fam, &spec).unwrap()).unwrap().value;
            assert_abs_diff_eq!(closed, grid, epsilon = 1e-4 * (1.0 + closed.abs()));
        }
    }

    #[test]
    fn lebesgue_integral_of_gaussian() {
        let spec = make_grid(1, &[6.0], &[241]).unwrap();
        let f = sample(&FunctionFamily::gaussian_density(1.0), &spec).unwrap();
        let v = box_lebesgue_integral(&f).unwrap();
        assert_relative_eq!(v, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn concentration_ratios_for_identity() {
        let rule = gauss_hermite_rule(40).unwrap();
        let spec = make_grid(1, &[6.0], &[241]).unwrap();
        let id = FunctionFamily::linear(1.0);
        let r2 = concentration_moment_check(&id, &[2.0], &rule, &spec).unwrap();
        assert_abs_diff_eq!(r2, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-10);
        let r4 = concentration_moment_check(&id, &[4.0], &rule, &spec).unwrap();
        assert_abs_diff_eq!(r4, 3.0f64.powf(0.25) / 2.0, epsilon = 1e-10);
        let z = concentration_moment_check(&FunctionFamily::constant(0.0), &[2.0, 7.0], &rule, &spec)
            .unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn concentration_rejects_non_lipschitz() {
        let rule = gauss_hermite_rule(20).unwrap();
        let spec = make_grid(1, &[6.0], &[241]).unwrap();
        let steep = FunctionFamily::quadratic(1.0);
        assert!(concentration_moment_check(&steep, &[2.0], &rule, &spec).is_err());
    }

    #[test]
    fn fitted_m_stays_below_two_on_lipschitz_corpus() {
        let rule = gauss_hermite_rule(64).unwrap();
        let spec = make_grid(1, &[6.0], &[241]).unwrap();
        let p_list: Vec<f64> = (1..=10).map(|k| 2.0 * k as f64).collect();
        let corpus = vec![
            FunctionFamily::linear(1.0),
            FunctionFamily::from_fn("sin", crate::grid::Parity::Odd, |x| x[0].sin()),
            FunctionFamily::from_fn("tanh", crate::grid::Parity::Odd, |x| x[0].tanh()),
            FunctionFamily::from_fn("cos_centered", crate::grid::Parity::Even, |x| x[0].cos()),
            FunctionFamily::huber(),
        ];
        let mut fitted = 0.0f64;
        for fam in &corpus {
            let r = concentration_moment_check(fam, &p_list, &rule, &spec).unwrap();
            fitted = fitted.max(r);
        }
        assert!(fitted <= 2.0, "fitted M = {fitted}");
        assert!(fitted > 0.3);
    }
}
