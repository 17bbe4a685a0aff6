//! The three transforms: infimum convolution with quadratic cost (`H` and
//! its `c/4` variant), the Legendre/polar transform, and the functional
//! Steiner symmetrization.
//!
//! All infima and suprema range over grid nodes, with out-of-box reads
//! treated as `+inf`. The discrete transform therefore dominates the
//! continuous one pointwise, and refining the grid can only move values
//! down. The quadratic infimum convolution runs in linear time per line via
//! a lower envelope of parabolas; `inf_conv_brute` is the quadratic-time
//! oracle kept for tests and audits.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

/// Quadratic displacement cost `y -> |y|^2/(2t)`. `t = 1` is the classical
/// Moreau/H cost `|y|^2/2`; `t = 2` is the quarter cost `|y|^2/4`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CostScale {
    t: f64,
}

impl CostScale {
    pub fn new(t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::GridInvariant(format!(
                "cost scale t must be positive and finite, got {t}"
            )));
        }
        Ok(CostScale { t })
    }

    /// Cost `|y|^2/2`, the classical `H` operator.
    pub fn half() -> Self {
        CostScale { t: 1.0 }
    }

    /// Cost `|y|^2/4`.
    pub fn quarter() -> Self {
        CostScale { t: 2.0 }
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// Lower envelope of the parabolas `p -> f[p] + scale*(q - p)^2` evaluated
/// at every integer `q`, written into `out`. Entries equal to `+inf` are
/// skipped; if every entry is `+inf` the output is `+inf` throughout.
///
/// Tie-breaking: when two parabolas intersect exactly at a node, the
/// lower-indexed parabola wins.
pub fn inf_conv_line_fast(f: &[f64], scale: f64, out: &mut [f64], scratch: &mut EnvelopeScratch) {
    let n = f.len();
    assert_eq!(out.len(), n);
    scratch.ensure(n);
    let loc = &mut scratch.loc;
    let bound = &mut scratch.bound;

    // Index of the first finite parabola.
    let mut start = 0;
    while start < n && f[start] == f64::INFINITY {
        start += 1;
    }
    if start == n {
        out.fill(f64::INFINITY);
        return;
    }

    let mut k = 0usize;
    loc[0] = start;
    bound[0] = f64::NEG_INFINITY;
    bound[1] = f64::INFINITY;

    for q in start + 1..n {
        if f[q] == f64::INFINITY {
            continue;
        }
        // Intersection abscissa of parabola q with the rightmost parabola
        // of the current envelope; pop until q extends the envelope.
        let mut s = intersect(f, scale, loc[k], q);
        while s <= bound[k] {
            k -= 1;
            s = intersect(f, scale, loc[k], q);
        }
        k += 1;
        loc[k] = q;
        bound[k] = s;
        bound[k + 1] = f64::INFINITY;
    }

    let mut k = 0usize;
    for q in 0..n {
        while bound[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - loc[k] as f64;
        out[q] = f[loc[k]] + scale * d * d;
    }
}

// Abscissa where parabola q overtakes parabola p (p < q), in index units.
fn intersect(f: &[f64], scale: f64, p: usize, q: usize) -> f64 {
    let pf = p as f64;
    let qf = q as f64;
    (f[q] - f[p]) / (2.0 * scale * (qf - pf)) + (qf + pf) / 2.0
}

/// Quadratic-time oracle for [`inf_conv_line_fast`].
pub fn inf_conv_line_brute(f: &[f64], scale: f64, out: &mut [f64]) {
    let n = f.len();
    assert_eq!(out.len(), n);
    for q in 0..n {
        let mut best = f64::INFINITY;
        for (p, &v) in f.iter().enumerate() {
            if v == f64::INFINITY {
                continue;
            }
            let d = q as f64 - p as f64;
            let cand = v + scale * d * d;
            if cand < best {
                best = cand;
            }
        }
        out[q] = best;
    }
}

/// Reusable buffers for the envelope scan.
#[derive(Default)]
pub struct EnvelopeScratch {
    loc: Vec<usize>,
    bound: Vec<f64>,
}

impl EnvelopeScratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure(&mut self, n: usize) {
        if self.loc.len() < n {
            self.loc.resize(n, 0);
        }
        if self.bound.len() < n + 1 {
            self.bound.resize(n + 1, 0.0);
        }
    }
}

// Runs `line_op` over every 1-D line of `values` along `axis`, in place.
// `line_op(input, output)` receives the gathered line.
fn for_each_line(
    spec: &GridSpec,
    axis: usize,
    values: &mut [f64],
    mut line_op: impl FnMut(&[f64], &mut [f64]),
) {
    let n = spec.count(axis);
    let stride = spec.stride(axis);
    let block = stride * n;
    let len = values.len();
    let mut input = vec![0.0; n];
    let mut output = vec![0.0; n];
    let mut start = 0;
    while start < len {
        for off in 0..stride {
            let base = start + off;
            for k in 0..n {
                input[k] = values[base + k * stride];
            }
            line_op(&input, &mut output);
            for k in 0..n {
                values[base + k * stride] = output[k];
            }
        }
        start += block;
    }
}

/// Infimum convolution with quadratic cost:
/// `out(x) = min over nodes z of f(z) + |z - x|^2/(2t)`.
///
/// Separable: one lower-envelope pass per axis, linear time per line. The
/// output is finite everywhere and satisfies `out <= f` pointwise.
pub fn inf_conv_quadratic(f: &GridFunction, cost: CostScale) -> GridFunction {
    let spec = f.spec().clone();
    let mut values = f.values().to_vec();
    let mut scratch = EnvelopeScratch::new();
    for axis in 0..spec.dim() {
        let h = spec.spacing(axis);
        let scale = h * h / (2.0 * cost.t());
        for_each_line(&spec, axis, &mut values, |input, output| {
            inf_conv_line_fast(input, scale, output, &mut scratch);
        });
    }
    GridFunction::new(spec, values).expect("inf-convolution preserves grid invariants")
}

/// Brute-force infimum convolution: same separable passes, quadratic-time
/// minimization per line. Used as the oracle in tests.
pub fn inf_conv_brute(f: &GridFunction, cost: CostScale) -> GridFunction {
    let spec = f.spec().clone();
    let mut values = f.values().to_vec();
    for axis in 0..spec.dim() {
        let h = spec.spacing(axis);
        let scale = h * h / (2.0 * cost.t());
        for_each_line(&spec, axis, &mut values, |input, output| {
            inf_conv_line_brute(input, scale, output);
        });
    }
    GridFunction::new(spec, values).expect("inf-convolution preserves grid invariants")
}

// One Legendre pass along `axis`: out(s) = max_p (s * x_p + acc[p]) where
// `acc` is the accumulated partial transform (-f on the first pass). -inf
// entries mark lines with no finite candidate yet and are skipped.
fn legendre_pass(
    primal: &GridSpec,
    dual: &GridSpec,
    axis: usize,
    shape: &[usize],
    values: &[f64],
) -> (Vec<usize>, Vec<f64>) {
    let n_in = primal.count(axis);
    let m_out = dual.count(axis);
    let mut out_shape = shape.to_vec();
    out_shape[axis] = m_out;

    let stride_in: usize = shape[axis + 1..].iter().product();
    let stride_out: usize = out_shape[axis + 1..].iter().product();
    debug_assert_eq!(stride_in, stride_out);
    let lines: usize = values.len() / n_in;
    let mut out = vec![0.0; lines * m_out];

    let block_in = stride_in * n_in;
    let block_out = stride_out * m_out;
    let n_blocks = values.len() / block_in;
    for b in 0..n_blocks {
        for off in 0..stride_in {
            let base_in = b * block_in + off;
            let base_out = b * block_out + off;
            for q in 0..m_out {
                let s = dual.coord(axis, q);
                let mut best = f64::NEG_INFINITY;
                for p in 0..n_in {
                    let v = values[base_in + p * stride_in];
                    if v == f64::NEG_INFINITY {
                        continue;
                    }
                    let cand = s * primal.coord(axis, p) + v;
                    if cand > best {
                        best = cand;
                    }
                }
                out[base_out + q * stride_out] = best;
            }
        }
    }
    (out_shape, out)
}

/// Discrete Legendre-Fenchel transform: `f*(s) = max over nodes x of
/// (s . x - f(x))`, evaluated at the nodes of `dual_spec`. Computed by one
/// 1-D conjugation per axis; exact because the lattice maximum factorizes.
pub fn legendre(f: &GridFunction, dual_spec: &GridSpec) -> Result<GridFunction> {
    if dual_spec.dim() != f.spec().dim() {
        return Err(Error::GridInvariant(format!(
            "dual grid dim {} does not match primal dim {}",
            dual_spec.dim(),
            f.spec().dim()
        )));
    }
    // Work on -f so every pass is a max of (s x + value).
    let mut values: Vec<f64> = f
        .values()
        .iter()
        .map(|&v| if v == f64::INFINITY { f64::NEG_INFINITY } else { -v })
        .collect();
    let mut shape = f.spec().counts().to_vec();
    for axis in 0..f.spec().dim() {
        let (new_shape, new_values) = legendre_pass(f.spec(), dual_spec, axis, &shape, &values);
        shape = new_shape;
        values = new_values;
    }
    GridFunction::new(dual_spec.clone(), values)
}

/// Polar transform of a non-negative function:
/// `F°(x) = inf over nodes y of e^{-x.y} / F(y)`, computed as
/// `exp(-psi*)` for `psi = -log F`.
pub fn polar(big_f: &GridFunction, dual_spec: &GridSpec) -> Result<GridFunction> {
    let mut any_positive = false;
    for (i, &v) in big_f.values().iter().enumerate() {
        if v < 0.0 {
            return Err(Error::GridInvariant(format!(
                "polar input must be non-negative, found {v} at node {i}"
            )));
        }
        any_positive |= v > 0.0 && v.is_finite();
    }
    if !any_positive {
        return Err(Error::GridInvariant(
            "polar input must be positive somewhere".into(),
        ));
    }
    let psi = big_f.map(|v| if v == 0.0 { f64::INFINITY } else { -v.ln() })?;
    let conj = legendre(&psi, dual_spec)?;
    conj.map(|v| (-v).exp())
}

/// Functional Steiner symmetrization
/// `Sf(x) = inf_u (1/2 (f(u+x) + f(u-x)) + 1/2 |u|^2)`, with `u` ranging
/// over lattice displacement vectors for which both reads stay in the box.
/// The output is exactly even on the node set: the candidate lists at `x`
/// and `-x` coincide term by term.
pub fn symmetrize(f: &GridFunction) -> GridFunction {
    let spec = f.spec().clone();
    let dim = spec.dim();
    let values = f.values();
    let mut out = vec![f64::INFINITY; spec.len()];
    let mut multi = vec![0usize; dim];

    // Per-axis admissible displacement radius at index i is
    // min(i, n-1-i): both i+j and (n-1-i)+j must stay in [0, n).
    let mut radius = vec![0usize; dim];
    let mut offset = vec![0i64; dim];

    for flat in 0..spec.len() {
        spec.multi_index(flat, &mut multi);
        for a in 0..dim {
            radius[a] = multi[a].min(spec.count(a) - 1 - multi[a]);
        }
        let mut best = f64::INFINITY;
        // Depth-first enumeration of displacement vectors within the radius.
        enumerate_offsets(&radius, &mut offset, 0, &mut |off: &[i64]| {
            let mut idx_plus = 0usize;
            let mut idx_minus = 0usize;
            let mut cost = 0.0;
            for a in 0..dim {
                let n = spec.count(a);
                let kp = (multi[a] as i64 + off[a]) as usize;
                let km = ((n - 1 - multi[a]) as i64 + off[a]) as usize;
                idx_plus = idx_plus * n + kp;
                idx_minus = idx_minus * n + km;
                let u = off[a] as f64 * spec.spacing(a);
                cost += u * u;
            }
            let cand = 0.5 * (values[idx_plus] + values[idx_minus]) + 0.5 * cost;
            if cand < best {
                best = cand;
            }
        });
        out[flat] = best;
    }
    GridFunction::new(spec, out).expect("symmetrization preserves grid invariants")
}

fn enumerate_offsets(radius: &[usize], offset: &mut [i64], axis: usize, visit: &mut impl FnMut(&[i64])) {
    if axis == radius.len() {
        visit(offset);
        return;
    }
    let r = radius[axis] as i64;
    for j in -r..=r {
        offset[axis] = j;
        enumerate_offsets(radius, offset, axis + 1, visit);
    }
}

/// Which block of a product grid `E1 x E2` a partial symmetrization acts on.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Block {
    First,
    Second,
}

/// Steiner symmetrization in one block of a product grid. `split` is the
/// number of leading axes forming `E1`; the remaining axes form `E2`. The
/// result is exactly even in the selected block, other coordinates fixed.
pub fn symmetrize_partial(g: &GridFunction, split: usize, block: Block) -> Result<GridFunction> {
    let spec = g.spec().clone();
    let dim = spec.dim();
    if split == 0 || split >= dim {
        return Err(Error::GridInvariant(format!(
            "block split must satisfy 0 < split < dim, got split={split}, dim={dim}"
        )));
    }
    let axes: Vec<usize> = match block {
        Block::First => (0..split).collect(),
        Block::Second => (split..dim).collect(),
    };
    let values = g.values();
    let mut out = vec![f64::INFINITY; spec.len()];
    let mut multi = vec![0usize; dim];
    let mut radius = vec![0usize; axes.len()];
    let mut offset = vec![0i64; axes.len()];

    for flat in 0..spec.len() {
        spec.multi_index(flat, &mut multi);
        for (slot, &a) in axes.iter().enumerate() {
            radius[slot] = multi[a].min(spec.count(a) - 1 - multi[a]);
        }
        let mut best = f64::INFINITY;
        enumerate_offsets(&radius, &mut offset, 0, &mut |off: &[i64]| {
            // Reads g at (.., i_a + j, ..) and (.., (n-1-i_a) + j, ..) with
            // the non-block coordinates untouched.
            let mut idx_plus = 0usize;
            let mut idx_minus = 0usize;
            let mut cost = 0.0;
            let mut slot = 0usize;
            for a in 0..dim {
                let n = spec.count(a);
                let (kp, km) = if slot < axes.len() && axes[slot] == a {
                    let j = off[slot];
                    let u = j as f64 * spec.spacing(a);
                    cost += u * u;
                    slot += 1;
                    (
                        (multi[a] as i64 + j) as usize,
                        ((n - 1 - multi[a]) as i64 + j) as usize,
                    )
                } else {
                    (multi[a], multi[a])
                };
                idx_plus = idx_plus * n + kp;
                idx_minus = idx_minus * n + km;
            }
            let cand = 0.5 * (values[idx_plus] + values[idx_minus]) + 0.5 * cost;
            if cand < best {
                best = cand;
            }
        });
        out[flat] = best;
    }
    GridFunction::new(spec, out)
}
