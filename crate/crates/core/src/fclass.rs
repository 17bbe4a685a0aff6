//! Measured membership in the Lipschitz/second-difference class F(C, eps)
//! and its closure properties.
//!
//! Constants are measured on the grid: the Lipschitz scan over adjacent
//! node pairs is a lower bound on the true constant, the second-difference
//! scan ranges over *all* lattice vectors `h` (long-`h` violations exist
//! for non-smooth functions). Both scans are monotone under grid
//! refinement, so a measured violation is conclusive while a pass is
//! evidence at the measured resolution.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::transforms::{symmetrize_partial, Block};
use serde::Serialize;

/// Membership slack: measured constants may exceed the bound by this
/// relative factor before membership is denied, avoiding spurious failures
/// at exact boundaries.
pub const MEMBERSHIP_SLACK: f64 = 1e-9;

/// Outcome of a membership scan.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClassCertificate {
    /// Measured Lipschitz constant (max |df|/h over adjacent node pairs).
    pub lip: f64,
    /// Max of (f(x+h) + f(x-h) - 2 f(x)) / |h|^2 over nodes and lattice h.
    pub second_diff: f64,
    pub c: f64,
    pub epsilon: f64,
    pub member: bool,
}

fn require_finite(f: &GridFunction) -> Result<()> {
    if let Some(i) = f.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::Class(format!(
            "scan requires finite values, found +inf at node {i}"
        )));
    }
    Ok(())
}

/// Max over axes and adjacent node pairs of `|f(x+h_a) - f(x)| / h_a`.
pub fn lipschitz_estimate(f: &GridFunction) -> Result<f64> {
    require_finite(f)?;
    let spec = f.spec();
    let values = f.values();
    let mut worst = 0.0f64;
    for axis in 0..spec.dim() {
        let n = spec.count(axis);
        let h = spec.spacing(axis);
        let stride = spec.stride(axis);
        let block = stride * n;
        let mut start = 0;
        while start < values.len() {
            for off in 0..stride {
                let base = start + off;
                for k in 0..n - 1 {
                    let d = (values[base + (k + 1) * stride] - values[base + k * stride]).abs() / h;
                    if d > worst {
                        worst = d;
                    }
                }
            }
            start += block;
        }
    }
    Ok(worst)
}

/// Max over nodes `x` and lattice vectors `h != 0` (both `x + h` and
/// `x - h` in the box) of `(f(x+h) + f(x-h) - 2 f(x)) / |h|^2`.
pub fn second_difference_ratio(f: &GridFunction) -> Result<f64> {
    require_finite(f)?;
    let spec = f.spec();
    let dim = spec.dim();
    let values = f.values();
    let mut multi = vec![0usize; dim];
    let mut radius = vec![0usize; dim];
    let mut offset = vec![0i64; dim];
    let mut worst = f64::NEG_INFINITY;
    for flat in 0..spec.len() {
        spec.multi_index(flat, &mut multi);
        for a in 0..dim {
            radius[a] = multi[a].min(spec.count(a) - 1 - multi[a]);
        }
        let center = values[flat];
        // h and -h give the same ratio; enumerate the half-space where the
        // first nonzero coordinate is positive.
        half_space_offsets(&radius, &mut offset, 0, true, &mut |off: &[i64]| {
            let mut idx_plus = 0usize;
            let mut idx_minus = 0usize;
            let mut h2 = 0.0;
            for a in 0..dim {
                let n = spec.count(a);
                idx_plus = idx_plus * n + (multi[a] as i64 + off[a]) as usize;
                idx_minus = idx_minus * n + (multi[a] as i64 - off[a]) as usize;
                let u = off[a] as f64 * spec.spacing(a);
                h2 += u * u;
            }
            let ratio = (values[idx_plus] + values[idx_minus] - 2.0 * center) / h2;
            if ratio > worst {
                worst = ratio;
            }
        });
    }
    if worst == f64::NEG_INFINITY {
        return Err(Error::Class(
            "grid too small for a second-difference scan".into(),
        ));
    }
    Ok(worst)
}

// Enumerates nonzero offset vectors whose first nonzero coordinate is
// positive, within the per-axis radius.
fn half_space_offsets(
    radius: &[usize],
    offset: &mut [i64],
    axis: usize,
    all_zero: bool,
    visit: &mut impl FnMut(&[i64]),
) {
    if axis == radius.len() {
        if !all_zero {
            visit(offset);
        }
        return;
    }
    let r = radius[axis] as i64;
    let lo = if all_zero { 0 } else { -r };
    for j in lo..=r {
        offset[axis] = j;
        half_space_offsets(radius, offset, axis + 1, all_zero && j == 0, visit);
    }
}

/// Measure both constants and decide membership in F(C, eps).
pub fn check_membership(f: &GridFunction, c: f64, epsilon: f64) -> Result<ClassCertificate> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Class(format!("C must be positive, got {c}")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Class(format!("epsilon must be in (0, 1], got {epsilon}")));
    }
    let lip = lipschitz_estimate(f)?;
    let second_diff = second_difference_ratio(f)?;
    let member = lip <= c * epsilon * (1.0 + MEMBERSHIP_SLACK)
        && second_diff <= c * epsilon * epsilon * (1.0 + MEMBERSHIP_SLACK);
    Ok(ClassCertificate {
        lip,
        second_diff,
        c,
        epsilon,
        member,
    })
}

/// Marginal log-integral: for `f` on a product grid `E1 x E2` (the first
/// `split` axes form `E1`), computes
/// `phi(y) = -log Integral over E1 of e^{-f(x,y)} d gamma(x)`
/// with the Gaussian-weighted trapezoid realization of the E1 integral and
/// a max-shifted log-sum-exp against overflow.
pub fn marginal_log_integral(f: &GridFunction, split: usize) -> Result<GridFunction> {
    require_finite(f)?;
    let spec = f.spec();
    let dim = spec.dim();
    if split == 0 || split >= dim {
        return Err(Error::GridInvariant(format!(
            "marginal split must satisfy 0 < split < dim, got {split}"
        )));
    }
    let e2 = spec.sub_spec(split..dim)?;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    // log of the Gaussian trapezoid weight per E1 node
    let mut axis_logw: Vec<Vec<f64>> = Vec::with_capacity(split);
    for a in 0..split {
        let n = spec.count(a);
        let h = spec.spacing(a);
        let mut w = Vec::with_capacity(n);
        for k in 0..n {
            let x = spec.coord(a, k);
            let trap = if k == 0 || k == n - 1 { 0.5 * h } else { h };
            w.push((trap * norm).ln() - 0.5 * x * x);
        }
        axis_logw.push(w);
    }
    let e2_len = e2.len();
    let mut max_term = vec![f64::NEG_INFINITY; e2_len];
    let mut multi = vec![0usize; dim];
    let values = f.values();
    // pass 1: per-slice maxima of  -f(x,y) + log W(x)
    let mut terms = vec![0.0f64; values.len()];
    for flat in 0..values.len() {
        spec.multi_index(flat, &mut multi);
        let mut lw = 0.0;
        for a in 0..split {
            lw += axis_logw[a][multi[a]];
        }
        let t = -values[flat] + lw;
        terms[flat] = t;
        let y_flat = flat % e2_len;
        if t > max_term[y_flat] {
            max_term[y_flat] = t;
        }
    }
    // pass 2: shifted sums
    let mut sums = vec![0.0f64; e2_len];
    for (flat, &t) in terms.iter().enumerate() {
        let y_flat = flat % e2_len;
        sums[y_flat] += (t - max_term[y_flat]).exp();
    }
    let phi: Vec<f64> = sums
        .iter()
        .zip(&max_term)
        .map(|(&s, &m)| -(m + s.ln()))
        .collect();
    GridFunction::new(e2, phi)
}

/// Translate a grid function by whole nodes, shrinking the box so every
/// read stays inside the original grid: result(x) = f(x + shift*h).
pub fn translate_by_nodes(f: &GridFunction, shifts: &[i64]) -> Result<GridFunction> {
    shifted_view(f, shifts, false)
}

/// Reflected translate: result(x) = f(-x + shift*h), on the same shrunk box.
pub fn reflect_translate_by_nodes(f: &GridFunction, shifts: &[i64]) -> Result<GridFunction> {
    shifted_view(f, shifts, true)
}

fn shifted_view(f: &GridFunction, shifts: &[i64], reflect: bool) -> Result<GridFunction> {
    let spec = f.spec();
    let dim = spec.dim();
    if shifts.len() != dim {
        return Err(Error::GridInvariant(format!(
            "expected {dim} shifts, got {}",
            shifts.len()
        )));
    }
    let mut half_widths = Vec::with_capacity(dim);
    let mut counts = Vec::with_capacity(dim);
    for a in 0..dim {
        let k = shifts[a].unsigned_abs() as usize;
        let n = spec.count(a);
        if n < 2 * k + 3 {
            return Err(Error::GridInvariant(format!(
                "axis {a}: shift {k} leaves fewer than 3 nodes"
            )));
        }
        counts.push(n - 2 * k);
        half_widths.push(spec.half_width(a) - k as f64 * spec.spacing(a));
    }
    let new_spec = GridSpec::new(half_widths, counts)?;
    let mut out = Vec::with_capacity(new_spec.len());
    let mut multi = vec![0usize; dim];
    for flat in 0..new_spec.len() {
        new_spec.multi_index(flat, &mut multi);
        let mut old_flat = 0usize;
        for a in 0..dim {
            let c_new = (new_spec.count(a) - 1) / 2;
            let c_old = (spec.count(a) - 1) / 2;
            let o = multi[a] as i64 - c_new as i64;
            let o_old = if reflect { -o + shifts[a] } else { o + shifts[a] };
            let idx = (c_old as i64 + o_old) as usize;
            debug_assert!(idx < spec.count(a), "axis {a} index {idx}");
            old_flat = old_flat * spec.count(a) + idx;
        }
        out.push(f.value(old_flat));
    }
    GridFunction::new(new_spec, out)
}

/// One closure-check entry: the operation applied and its certificate.
#[derive(Clone, Debug, Serialize)]
pub struct ClosureEntry {
    pub label: String,
    pub certificate: ClassCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub entries: Vec<ClosureEntry>,
    pub all_member: bool,
}

/// Verify that the class operations map members to members: convex
/// combinations, one-node translates and reflections, pointwise infima,
/// and partial symmetrization on product grids.
pub fn class_closure_checks(
    members: &[GridFunction],
    c: f64,
    epsilon: f64,
) -> Result<ClosureReport> {
    if members.is_empty() {
        return Err(Error::Class("closure checks need at least one member".into()));
    }
    let spec = members[0].spec().clone();
    for (i, f) in members.iter().enumerate() {
        if f.spec() != &spec {
            return Err(Error::Class(format!("member {i} lives on a different grid")));
        }
        let cert = check_membership(f, c, epsilon)?;
        if !cert.member {
            return Err(Error::Class(format!(
                "input {i} is not a member: lip={}, second_diff={}",
                cert.lip, cert.second_diff
            )));
        }
    }
    let mut entries = Vec::new();
    let mut push = |label: String, f: &GridFunction| -> Result<()> {
        let certificate = check_membership(f, c, epsilon)?;
        entries.push(ClosureEntry { label, certificate });
        Ok(())
    };

    // convex combinations of consecutive pairs
    for i in 0..members.len().saturating_sub(1) {
        let avg = GridFunction::new(
            spec.clone(),
            members[i]
                .values()
                .iter()
                .zip(members[i + 1].values())
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        )?;
        push(format!("avg(member{i}, member{})", i + 1), &avg)?;
    }
    // translates and reflections by one node along each axis
    for (i, f) in members.iter().enumerate() {
        for axis in 0..spec.dim() {
            let mut shifts = vec![0i64; spec.dim()];
            shifts[axis] = 1;
            let t = translate_by_nodes(f, &shifts)?;
            push(format!("translate(member{i}, axis{axis}, +1)"), &t)?;
            let r = reflect_translate_by_nodes(f, &shifts)?;
            push(format!("reflect_translate(member{i}, axis{axis}, +1)"), &r)?;
        }
    }
    // pointwise infimum of the whole family
    if members.len() > 1 {
        let mut inf = members[0].values().to_vec();
        for f in &members[1..] {
            for (dst, &v) in inf.iter_mut().zip(f.values()) {
                if v < *dst {
                    *dst = v;
                }
            }
        }
        push(
            format!("inf(member0..member{})", members.len() - 1),
            &GridFunction::new(spec.clone(), inf)?,
        )?;
    }
    // partial symmetrization on product grids
    if spec.dim() >= 2 {
        for (i, f) in members.iter().enumerate() {
            let s2 = symmetrize_partial(f, spec.dim() - 1, Block::Second)?;
            push(format!("S2(member{i})"), &s2)?;
        }
    }
    let all_member = entries.iter().all(|e| e.certificate.member);
    Ok(ClosureReport {
        entries,
        all_member,
    })
}

/// Per-slice certificates along one axis: the worst Lipschitz and
/// second-difference constants of the 1-D restrictions `t -> f(..t..)`.
/// Realizes membership "with respect to each coordinate separately".
pub fn per_axis_membership(
    f: &GridFunction,
    c: f64,
    epsilon: f64,
) -> Result<Vec<ClassCertificate>> {
    require_finite(f)?;
    let spec = f.spec();
    let values = f.values();
    let mut certs = Vec::with_capacity(spec.dim());
    for axis in 0..spec.dim() {
        let n = spec.count(axis);
        let h = spec.spacing(axis);
        let stride = spec.stride(axis);
        let block = stride * n;
        let mut lip = 0.0f64;
        let mut sdr = f64::NEG_INFINITY;
        let mut line = vec![0.0f64; n];
        let mut start = 0;
        while start < values.len() {
            for off in 0..stride {
                let base = start + off;
                for k in 0..n {
                    line[k] = values[base + k * stride];
                }
                for k in 0..n - 1 {
                    let d = (line[k + 1] - line[k]).abs() / h;
                    if d > lip {
                        lip = d;
                    }
                }
                for k in 0..n {
                    let r = k.min(n - 1 - k);
                    for j in 1..=r {
                        let num = line[k + j] + line[k - j] - 2.0 * line[k];
                        let ratio = num / (j as f64 * h).powi(2);
                        if ratio > sdr {
                            sdr = ratio;
                        }
                    }
                }
            }
            start += block;
        }
        let member = lip <= c * epsilon * (1.0 + MEMBERSHIP_SLACK)
            && sdr <= c * epsilon * epsilon * (1.0 + MEMBERSHIP_SLACK);
        certs.push(ClassCertificate {
            lip,
            second_diff: sdr,
            c,
            epsilon,
            member,
        });
    }
    Ok(certs)
}
