//! Symmetric uniform tensor grids and extended-real-valued functions on them.
//!
//! Grids are products of symmetric 1-D lattices with an odd node count, so
//! the origin is a node and the node set is closed under `x -> -x`. Values
//! are `f64` with `+inf` allowed as an out-of-domain sentinel; `NaN` and
//! `-inf` are rejected at construction. All transforms in this crate read
//! out-of-box points as `+inf`, which keeps every discrete infimum a
//! restriction of the continuous one.

use crate::error::{Error, Result};
use rand_core::{RngCore, SeedableRng};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

/// Parity of a function under `x -> -x`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Neither,
}

/// A symmetric uniform tensor grid: per axis a half-width `L` and an odd
/// node count `n`, spacing `h = 2L/(n-1)`. Node `k` on an axis sits at
/// `-L + k*h`; coordinates are computed centered so that reflection is
/// bitwise exact and the origin is exactly `0.0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    half_widths: Vec<f64>,
    counts: Vec<usize>,
}

impl GridSpec {
    pub fn new(half_widths: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if half_widths.len() != counts.len() {
            return Err(Error::GridInvariant(format!(
                "half_widths ({}) and counts ({}) differ in length",
                half_widths.len(),
                counts.len()
            )));
        }
        let dim = counts.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::GridInvariant(format!(
                "dim must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        for (axis, (&l, &n)) in half_widths.iter().zip(&counts).enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::GridInvariant(format!(
                    "axis {axis}: half_width must be positive and finite, got {l}"
                )));
            }
            if n < 3 || n % 2 == 0 {
                return Err(Error::GridInvariant(format!(
                    "axis {axis}: count must be odd and >= 3, got {n}"
                )));
            }
        }
        Ok(GridSpec {
            half_widths,
            counts,
        })
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn half_width(&self, axis: usize) -> f64 {
        self.half_widths[axis]
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    pub fn count(&self, axis: usize) -> usize {
        self.counts[axis]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Grid spacing on an axis, `2L/(n-1)`.
    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_widths[axis] / (self.counts[axis] - 1) as f64
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `k` on an axis. Computed as `(k - center)*h` so
    /// that `coord(n-1-k) == -coord(k)` bitwise and the center is `0.0`.
    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        let c = (self.counts[axis] - 1) / 2;
        (k as i64 - c as i64) as f64 * self.spacing(axis)
    }

    /// Row-major stride of an axis (last axis contiguous).
    pub fn stride(&self, axis: usize) -> usize {
        self.counts[axis + 1..].iter().product()
    }

    /// Flat index of a multi-index.
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim());
        let mut idx = 0;
        for (axis, &k) in multi.iter().enumerate() {
            debug_assert!(k < self.counts[axis]);
            idx = idx * self.counts[axis] + k;
        }
        idx
    }

    /// Multi-index of a flat index, written into `out`.
    pub fn multi_index(&self, flat: usize, out: &mut [usize]) {
        debug_assert_eq!(out.len(), self.dim());
        let mut rem = flat;
        for axis in (0..self.dim()).rev() {
            out[axis] = rem % self.counts[axis];
            rem /= self.counts[axis];
        }
    }

    /// Coordinates of a node, written into `out`.
    pub fn node(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for axis in (0..self.dim()).rev() {
            let k = rem % self.counts[axis];
            rem /= self.counts[axis];
            out[axis] = self.coord(axis, k);
        }
    }

    /// Flat index of the reflected node `-x`.
    pub fn reflect(&self, flat: usize) -> usize {
        let mut rem = flat;
        let mut out = 0;
        let mut mult = 1;
        for axis in (0..self.dim()).rev() {
            let k = rem % self.counts[axis];
            rem /= self.counts[axis];
            out += (self.counts[axis] - 1 - k) * mult;
            mult *= self.counts[axis];
        }
        out
    }

    /// Flat index of the origin node.
    pub fn center(&self) -> usize {
        let multi: Vec<usize> = self.counts.iter().map(|&n| (n - 1) / 2).collect();
        self.flat_index(&multi)
    }

    /// The sub-grid consisting of axes `range`.
    pub fn sub_spec(&self, range: std::ops::Range<usize>) -> Result<GridSpec> {
        GridSpec::new(
            self.half_widths[range.clone()].to_vec(),
            self.counts[range].to_vec(),
        )
    }

    fn summary(&self) -> String {
        let axes: Vec<String> = self
            .half_widths
            .iter()
            .zip(&self.counts)
            .map(|(l, n)| format!("L={l},n={n}"))
            .collect();
        axes.join(" x ")
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.summary())
    }
}

#[derive(Serialize, Deserialize)]
struct GridSpecRepr {
    dim: usize,
    half_widths: Vec<f64>,
    counts: Vec<usize>,
}

impl Serialize for GridSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridSpecRepr {
            dim: self.dim(),
            half_widths: self.half_widths.clone(),
            counts: self.counts.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GridSpecRepr::deserialize(d)?;
        if repr.dim != repr.counts.len() {
            return Err(D::Error::custom(format!(
                "dim field {} does not match counts length {}",
                repr.dim,
                repr.counts.len()
            )));
        }
        GridSpec::new(repr.half_widths, repr.counts).map_err(D::Error::custom)
    }
}

/// Construct a grid with the same half-width/count on every axis when the
/// slices have length 1, or per-axis values otherwise.
pub fn make_grid(dim: usize, half_widths: &[f64], counts: &[usize]) -> Result<GridSpec> {
    let expand = |k: usize| -> Result<(Vec<f64>, Vec<usize>)> {
        if half_widths.len() == k && counts.len() == k {
            Ok((half_widths.to_vec(), counts.to_vec()))
        } else if half_widths.len() == 1 && counts.len() == 1 {
            Ok((vec![half_widths[0]; k], vec![counts[0]; k]))
        } else {
            Err(Error::GridInvariant(format!(
                "expected {k} (or 1) half_widths/counts, got {}/{}",
                half_widths.len(),
                counts.len()
            )))
        }
    };
    let (hw, cnt) = expand(dim)?;
    GridSpec::new(hw, cnt)
}

/// Default desk-scale grid for a dimension: d=1 -> L=6,n=241; d=2 -> L=4,n=81
/// per axis; d=3 -> L=3,n=41 per axis.
pub fn default_grid(dim: usize) -> Result<GridSpec> {
    match dim {
        1 => make_grid(1, &[6.0], &[241]),
        2 => make_grid(2, &[4.0], &[81]),
        3 => make_grid(3, &[3.0], &[41]),
        _ => Err(Error::GridInvariant(format!("no default grid for dim {dim}"))),
    }
}

/// A function sampled on a grid. Values are extended reals: finite or
/// `+inf`. Immutable after construction; cheap to clone only when needed.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
    parity: Option<Parity>,
}

impl GridFunction {
    /// Validates the value vector against the grid invariants.
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::GridInvariant(format!(
                "value count {} does not match grid size {}",
                values.len(),
                spec.len()
            )));
        }
        let mut any_finite = false;
        for (i, &v) in values.iter().enumerate() {
            if v.is_nan() {
                return Err(Error::GridInvariant(format!("NaN value at node {i}")));
            }
            if v == f64::NEG_INFINITY {
                return Err(Error::GridInvariant(format!("-inf value at node {i}")));
            }
            any_finite |= v.is_finite();
        }
        if !any_finite {
            return Err(Error::GridInvariant("no finite value on the grid".into()));
        }
        Ok(GridFunction {
            spec,
            values,
            parity: None,
        })
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = Some(parity);
        self
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    /// Parity hint carried over from the sampled family, if any.
    pub fn parity_hint(&self) -> Option<Parity> {
        self.parity
    }

    /// Applies `op` to every value, revalidating the result.
    pub fn map(&self, op: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(self.spec.clone(), self.values.iter().map(|&v| op(v)).collect())
    }

    /// Max over nodes of `|f(x) - f(-x)|`; pairs mixing a finite value with
    /// `+inf` yield `+inf`.
    pub fn even_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.values.len() {
            let j = self.spec.reflect(i);
            if j < i {
                continue;
            }
            let (a, b) = (self.values[i], self.values[j]);
            let d = if a == f64::INFINITY && b == f64::INFINITY {
                0.0
            } else {
                (a - b).abs()
            };
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValueRepr {
    Num(f64),
    Tag(String),
}

impl Serialize for GridFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("GridFunction", 2)?;
        st.serialize_field("spec", &self.spec)?;
        let values: Vec<ValueRepr> = self
            .values
            .iter()
            .map(|&v| {
                if v == f64::INFINITY {
                    ValueRepr::Tag("inf".to_string())
                } else {
                    ValueRepr::Num(v)
                }
            })
            .collect();
        st.serialize_field("values", &values)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for GridFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            spec: GridSpec,
            values: Vec<ValueRepr>,
        }
        let repr = Repr::deserialize(d)?;
        let mut values = Vec::with_capacity(repr.values.len());
        for (i, v) in repr.values.into_iter().enumerate() {
            match v {
                ValueRepr::Num(x) => values.push(x),
                ValueRepr::Tag(tag) if tag == "inf" => values.push(f64::INFINITY),
                ValueRepr::Tag(tag) => {
                    return Err(D::Error::custom(format!(
                        "value {i}: unknown tag {tag:?} (only \"inf\" is accepted)"
                    )))
                }
            }
        }
        GridFunction::new(repr.spec, values).map_err(D::Error::custom)
    }
}

/// Closed-form test function on `R^d`. Builtins carry a compact
/// `name:key=val,...` spec usable from the CLI and suite configs;
/// combinators compose them programmatically.
#[derive(Clone)]
pub struct FunctionFamily {
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    /// a|x|^2/2
    Quadratic { a: f64 },
    /// b * (x_1 + ... + x_d)
    Linear { b: f64 },
    /// Euclidean norm |x|
    Abs,
    /// Huber: |x|^2/2 for |x| <= 1, |x| - 1/2 beyond
    Huber,
    /// |x|^4/4
    Power4,
    /// A * cos(w x_1) * ... * cos(w x_d)
    CosineBump { amplitude: f64, frequency: f64 },
    /// exp(-a|x|^2/2)
    GaussianDensity { a: f64 },
    /// N_K(x)^2/2 for K the unit l_p ball (p = +inf for the cube)
    LpGaugePower { p: f64 },
    /// Seeded even polynomial, sum over axes of even monomials
    RandomEvenPoly {
        seed: u64,
        degree: usize,
        coeffs: Vec<f64>,
    },
    Constant {
        c: f64,
    },
    Sum(Vec<FunctionFamily>),
    Scale {
        factor: f64,
        inner: Box<FunctionFamily>,
    },
    /// x -> f(x - offset)
    Shift {
        offset: Vec<f64>,
        inner: Box<FunctionFamily>,
    },
    /// x -> max(f(x), floor)
    ClipBelow {
        floor: f64,
        inner: Box<FunctionFamily>,
    },
    Custom {
        name: String,
        parity: Parity,
        func: std::sync::Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    },
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl FunctionFamily {
    pub fn quadratic(a: f64) -> Self {
        Self { kind: Kind::Quadratic { a } }
    }
    pub fn linear(b: f64) -> Self {
        Self { kind: Kind::Linear { b } }
    }
    pub fn abs() -> Self {
        Self { kind: Kind::Abs }
    }
    pub fn huber() -> Self {
        Self { kind: Kind::Huber }
    }
    pub fn power4() -> Self {
        Self { kind: Kind::Power4 }
    }
    pub fn cosine_bump(amplitude: f64, frequency: f64) -> Self {
        Self { kind: Kind::CosineBump { amplitude, frequency } }
    }
    pub fn gaussian_density(a: f64) -> Self {
        Self { kind: Kind::GaussianDensity { a } }
    }
    pub fn lp_gauge_power(p: f64) -> Self {
        Self { kind: Kind::LpGaugePower { p } }
    }
    pub fn constant(c: f64) -> Self {
        Self { kind: Kind::Constant { c } }
    }

    /// Even polynomial with coefficients drawn from a seeded ChaCha stream.
    /// Monomial `x^(2k)` gets coefficient `u/(2k)!`, `u` uniform in [-1, 1],
    /// independently per axis.
    pub fn random_even_poly(seed: u64, degree: usize) -> Self {
        let n_per_axis = degree / 2; // coefficients for x^2, x^4, ..., x^degree
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = Vec::with_capacity(MAX_DIM * n_per_axis);
        for _ in 0..MAX_DIM * n_per_axis {
            coeffs.push(uniform_unit(&mut rng) * 2.0 - 1.0);
        }
        Self {
            kind: Kind::RandomEvenPoly { seed, degree, coeffs },
        }
    }

    pub fn sum(terms: Vec<FunctionFamily>) -> Self {
        Self { kind: Kind::Sum(terms) }
    }
    pub fn scale(factor: f64, inner: FunctionFamily) -> Self {
        Self { kind: Kind::Scale { factor, inner: Box::new(inner) } }
    }
    pub fn shift(offset: Vec<f64>, inner: FunctionFamily) -> Self {
        Self { kind: Kind::Shift { offset, inner: Box::new(inner) } }
    }
    pub fn clip_below(floor: f64, inner: FunctionFamily) -> Self {
        Self { kind: Kind::ClipBelow { floor, inner: Box::new(inner) } }
    }
    pub fn from_fn(
        name: &str,
        parity: Parity,
        func: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: Kind::Custom {
                name: name.to_string(),
                parity,
                func: std::sync::Arc::new(func),
            },
        }
    }

    /// Evaluate at a point of `R^d` (any `d <= MAX_DIM`).
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Quadratic { a } => a * x.iter().map(|v| v * v).sum::<f64>() / 2.0,
            Kind::Linear { b } => b * x.iter().sum::<f64>(),
            Kind::Abs => norm2(x),
            Kind::Huber => {
                let r = norm2(x);
                if r <= 1.0 {
                    r * r / 2.0
                } else {
                    r - 0.5
                }
            }
            Kind::Power4 => {
                let r2 = x.iter().map(|v| v * v).sum::<f64>();
                r2 * r2 / 4.0
            }
            Kind::CosineBump { amplitude, frequency } => {
                amplitude * x.iter().map(|&v| (frequency * v).cos()).product::<f64>()
            }
            Kind::GaussianDensity { a } => {
                (-a * x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp()
            }
            Kind::LpGaugePower { p } => {
                let n = if p.is_infinite() {
                    x.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
                } else {
                    x.iter()
                        .map(|&v| v.abs().powf(*p))
                        .sum::<f64>()
                        .powf(1.0 / p)
                };
                n * n / 2.0
            }
            Kind::RandomEvenPoly { degree, coeffs, .. } => {
                let n_per_axis = degree / 2;
                let mut total = 0.0;
                for (axis, &v) in x.iter().enumerate() {
                    let v2 = v * v;
                    let mut pow = 1.0;
                    let mut fact = 1.0f64;
                    for k in 0..n_per_axis {
                        pow *= v2;
                        fact *= (2 * k + 1) as f64 * (2 * k + 2) as f64;
                        total += coeffs[axis * n_per_axis + k] * pow / fact;
                    }
                }
                total
            }
            Kind::Constant { c } => *c,
            Kind::Sum(terms) => terms.iter().map(|t| t.eval(x)).sum(),
            Kind::Scale { factor, inner } => factor * inner.eval(x),
            Kind::Shift { offset, inner } => {
                let shifted: Vec<f64> = x.iter().zip(offset).map(|(v, o)| v - o).collect();
                inner.eval(&shifted)
            }
            Kind::ClipBelow { floor, inner } => inner.eval(x).max(*floor),
            Kind::Custom { func, .. } => func(x),
        }
    }

    /// The coefficient `a` when this is the bare quadratic `a|x|^2/2`.
    pub fn as_quadratic(&self) -> Option<f64> {
        match &self.kind {
            Kind::Quadratic { a } => Some(*a),
            _ => None,
        }
    }

    /// Documented parity of the family.
    pub fn parity(&self) -> Parity {
        match &self.kind {
            Kind::Quadratic { .. }
            | Kind::Abs
            | Kind::Huber
            | Kind::Power4
            | Kind::CosineBump { .. }
            | Kind::GaussianDensity { .. }
            | Kind::LpGaugePower { .. }
            | Kind::RandomEvenPoly { .. }
            | Kind::Constant { .. } => Parity::Even,
            Kind::Linear { b } => {
                if *b == 0.0 {
                    Parity::Even
                } else {
                    Parity::Odd
                }
            }
            Kind::Sum(terms) => {
                let mut parity = Parity::Even;
                for t in terms {
                    parity = match (parity, t.parity()) {
                        (Parity::Even, p) => p,
                        (p, Parity::Even) => p,
                        (Parity::Odd, Parity::Odd) => Parity::Odd,
                        _ => Parity::Neither,
                    };
                }
                parity
            }
            Kind::Scale { inner, .. } => inner.parity(),
            Kind::Shift { offset, inner } => {
                if offset.iter().all(|&o| o == 0.0) {
                    inner.parity()
                } else {
                    Parity::Neither
                }
            }
            Kind::ClipBelow { inner, .. } => match inner.parity() {
                Parity::Even => Parity::Even,
                _ => Parity::Neither,
            },
            Kind::Custom { parity, .. } => *parity,
        }
    }

    /// Compact spec string, `name:key=val,...` for builtins.
    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Quadratic { a } => format!("quadratic:a={a}"),
            Kind::Linear { b } => format!("linear:b={b}"),
            Kind::Abs => "abs".to_string(),
            Kind::Huber => "huber".to_string(),
            Kind::Power4 => "power4".to_string(),
            Kind::CosineBump { amplitude, frequency } => {
                format!("cosine_bump:amplitude={amplitude},frequency={frequency}")
            }
            Kind::GaussianDensity { a } => format!("gaussian_density:a={a}"),
            Kind::LpGaugePower { p } => format!("lp_gauge_power:p={p}"),
            Kind::RandomEvenPoly { seed, degree, .. } => {
                format!("random_even_poly:seed={seed},degree={degree}")
            }
            Kind::Constant { c } => format!("constant:c={c}"),
            Kind::Sum(terms) => {
                let parts: Vec<String> = terms.iter().map(|t| t.name()).collect();
                format!("sum({})", parts.join("; "))
            }
            Kind::Scale { factor, inner } => format!("scale({factor}; {})", inner.name()),
            Kind::Shift { offset, inner } => format!("shift({offset:?}; {})", inner.name()),
            Kind::ClipBelow { floor, inner } => format!("clip_below({floor}; {})", inner.name()),
            Kind::Custom { name, .. } => name.clone(),
        }
    }

    /// Parse the compact `name:key=val,...` form used by the CLI and the
    /// suite config. Combinators are not parseable; they only arise
    /// programmatically.
    pub fn parse(spec: &str) -> Result<FunctionFamily> {
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n.trim(), a),
            None => (spec.trim(), ""),
        };
        let mut params = std::collections::BTreeMap::new();
        for pair in args.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Family(format!("bad parameter {pair:?} in {spec:?}")))?;
            let value = if v.trim() == "inf" {
                f64::INFINITY
            } else {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Family(format!("bad number {v:?} in {spec:?}")))?
            };
            params.insert(k.trim().to_string(), value);
        }
        let get = |key: &str| -> Result<f64> {
            params
                .get(key)
                .copied()
                .ok_or_else(|| Error::Family(format!("{name} requires parameter {key}")))
        };
        let fam = match name {
            "quadratic" => FunctionFamily::quadratic(get("a")?),
            "linear" => FunctionFamily::linear(get("b")?),
            "abs" => FunctionFamily::abs(),
            "huber" => FunctionFamily::huber(),
            "power4" => FunctionFamily::power4(),
            "cosine_bump" => FunctionFamily::cosine_bump(get("amplitude")?, get("frequency")?),
            "gaussian_density" => FunctionFamily::gaussian_density(get("a")?),
            "lp_gauge_power" => FunctionFamily::lp_gauge_power(get("p")?),
            "random_even_poly" => {
                FunctionFamily::random_even_poly(get("seed")? as u64, get("degree")? as usize)
            }
            "random_even_poly_clipped" => FunctionFamily::clip_below(
                get("floor")?,
                FunctionFamily::random_even_poly(get("seed")? as u64, get("degree")? as usize),
            ),
            "constant" => FunctionFamily::constant(get("c")?),
            "shifted_huber" => {
                let o = get("offset")?;
                FunctionFamily::shift(vec![o; MAX_DIM], FunctionFamily::huber())
            }
            "power4_mix" => FunctionFamily::sum(vec![
                FunctionFamily::scale(get("c4")?, FunctionFamily::power4()),
                FunctionFamily::quadratic(get("c2")?),
            ]),
            other => return Err(Error::Family(format!("unknown family {other:?}"))),
        };
        Ok(fam)
    }

    /// Names and parameter lists of all parseable builtins.
    pub fn builtin_catalog() -> Vec<(&'static str, &'static str)> {
        vec![
            ("quadratic", "a"),
            ("linear", "b"),
            ("abs", ""),
            ("huber", ""),
            ("power4", ""),
            ("cosine_bump", "amplitude,frequency"),
            ("gaussian_density", "a"),
            ("lp_gauge_power", "p"),
            ("random_even_poly", "seed,degree"),
            ("random_even_poly_clipped", "seed,degree,floor"),
            ("constant", "c"),
            ("shifted_huber", "offset"),
            ("power4_mix", "c4,c2"),
        ]
    }
}

impl std::fmt::Debug for FunctionFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FunctionFamily({})", self.name())
    }
}

/// Uniform f64 in [0, 1) from a raw 64-bit stream. Version-stable, unlike
/// the distribution plumbing in the rand crate family.
pub fn uniform_unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Sample a family on a grid. Errors if the evaluator produces NaN or -inf.
pub fn sample(family: &FunctionFamily, spec: &GridSpec) -> Result<GridFunction> {
    let mut values = Vec::with_capacity(spec.len());
    let mut point = vec![0.0; spec.dim()];
    for flat in 0..spec.len() {
        spec.node(flat, &mut point);
        let v = family.eval(&point);
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(Error::Family(format!(
                "family {} produced {v} at {point:?}",
                family.name()
            )));
        }
        values.push(v);
    }
    Ok(GridFunction::new(spec.clone(), values)?.with_parity(family.parity()))
}
