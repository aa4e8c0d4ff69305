//! Pointwise exterior algebra on a single chart (x, θ_1, …, θ_{2n-1}).
//!
//! Basis covectors are indexed by chart axis: axis 0 is `dx`, axis i for
//! i >= 1 is `dθ_i`. Forms keep a canonical antisymmetric representation:
//! coefficients are stored only on strictly increasing index tuples, so
//! antisymmetry is structural and the top coefficient is a single lookup.
//!
//! Coefficient functions come in three flavours: constants, polynomials in
//! x with trigonometric-polynomial coefficients in the angles (the exactly
//! integrable path used by the volume formulas), and opaque evaluable
//! closures (used for the desingularization profiles).

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A point of the chart Z × (-1, 1), Z a torus with angles θ_1 … θ_{2n-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    x: f64,
    thetas: Vec<f64>,
}

impl ChartPoint {
    /// Angles are reduced mod 2π; x must lie in the open interval (-1, 1).
    pub fn new(x: f64, thetas: &[f64]) -> Result<Self> {
        if !(x > -1.0 && x < 1.0) {
            return Err(Error::OutOfChart(x));
        }
        if thetas.is_empty() || thetas.len() % 2 == 0 {
            return Err(Error::BadDimension(thetas.len() + 1));
        }
        Ok(ChartPoint {
            x,
            thetas: thetas.iter().map(|t| t.rem_euclid(TAU)).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.thetas.len() + 1
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// Coordinate along a chart axis (0 = x, i >= 1 = θ_i).
    pub fn coord(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.x
        } else {
            self.thetas[axis - 1]
        }
    }

    /// The point shifted by `delta` along one axis. Fails when an x-shift
    /// exits the chart; angle shifts wrap.
    pub fn shifted(&self, axis: usize, delta: f64) -> Result<Self> {
        if axis == 0 {
            let x = self.x + delta;
            if !(x > -1.0 && x < 1.0) {
                return Err(Error::StencilOutOfDomain(x));
            }
            Ok(ChartPoint { x, thetas: self.thetas.clone() })
        } else {
            let mut thetas = self.thetas.clone();
            thetas[axis - 1] = (thetas[axis - 1] + delta).rem_euclid(TAU);
            Ok(ChartPoint { x: self.x, thetas })
        }
    }
}

/// A single harmonic in one angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Harmonic {
    Cos(u32),
    Sin(u32),
}

impl Harmonic {
    fn eval(self, theta: f64) -> f64 {
        match self {
            Harmonic::Cos(n) => (n as f64 * theta).cos(),
            Harmonic::Sin(n) => (n as f64 * theta).sin(),
        }
    }
}

/// amp · Π_a harmonic_a(θ_a); at most one harmonic per angle.
#[derive(Debug, Clone, PartialEq)]
struct TrigTerm {
    amp: f64,
    factors: BTreeMap<usize, Harmonic>,
}

impl TrigTerm {
    fn eval(&self, p: &ChartPoint) -> f64 {
        self.factors
            .iter()
            .fold(self.amp, |acc, (&axis, &h)| acc * h.eval(p.coord(axis)))
    }
}

// Product-to-sum for two harmonics of the same angle. `None` stands for the
// constant factor 1 (i.e. cos 0).
fn harmonic_product(a: Harmonic, b: Harmonic) -> Vec<(f64, Option<Harmonic>)> {
    use Harmonic::*;
    let cos = |n: u32| if n == 0 { None } else { Some(Cos(n)) };
    // signed sine: sin(-n) = -sin(n), sin(0) = 0
    let sin = |c: f64, m: i64| -> Option<(f64, Option<Harmonic>)> {
        match m {
            0 => None,
            m if m > 0 => Some((c, Some(Sin(m as u32)))),
            m => Some((-c, Some(Sin((-m) as u32)))),
        }
    };
    match (a, b) {
        (Cos(m), Cos(n)) => vec![(0.5, cos(m + n)), (0.5, cos(m.abs_diff(n)))],
        (Sin(m), Sin(n)) => vec![(0.5, cos(m.abs_diff(n))), (-0.5, cos(m + n))],
        (Sin(m), Cos(n)) => [sin(0.5, (m + n) as i64), sin(0.5, m as i64 - n as i64)]
            .into_iter()
            .flatten()
            .collect(),
        (Cos(m), Sin(n)) => [sin(0.5, (m + n) as i64), sin(0.5, n as i64 - m as i64)]
            .into_iter()
            .flatten()
            .collect(),
    }
}

/// Trigonometric polynomial in the torus angles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly::default()
    }

    pub fn constant(c: f64) -> Self {
        TrigPoly { terms: vec![TrigTerm { amp: c, factors: BTreeMap::new() }] }.normalized()
    }

    /// amp · cos(freq θ_axis) or amp · sin(freq θ_axis); `axis` is the chart
    /// axis of the angle (>= 1).
    pub fn harmonic(axis: usize, h: Harmonic, amp: f64) -> Self {
        assert!(axis >= 1, "angle axes start at 1");
        let mut factors = BTreeMap::new();
        factors.insert(axis, h);
        TrigPoly { terms: vec![TrigTerm { amp, factors }] }.normalized()
    }

    /// A single monomial amp · Π harmonics (one per distinct angle axis).
    pub fn monomial(amp: f64, harmonics: &[(usize, Harmonic)]) -> Self {
        let mut factors = BTreeMap::new();
        for &(axis, h) in harmonics {
            assert!(axis >= 1, "angle axes start at 1");
            assert!(!factors.contains_key(&axis), "one harmonic per angle in a monomial");
            factors.insert(axis, h);
        }
        TrigPoly { terms: vec![TrigTerm { amp, factors }] }.normalized()
    }

    fn normalized(self) -> Self {
        let mut merged: Vec<TrigTerm> = Vec::new();
        'outer: for mut t in self.terms {
            // cos(0θ) is the constant 1; sin(0θ) kills the term
            t.factors.retain(|_, h| *h != Harmonic::Cos(0));
            if t.factors.values().any(|h| *h == Harmonic::Sin(0)) || t.amp == 0.0 {
                continue;
            }
            for m in merged.iter_mut() {
                if m.factors == t.factors {
                    m.amp += t.amp;
                    continue 'outer;
                }
            }
            merged.push(t);
        }
        merged.retain(|t| t.amp != 0.0);
        TrigPoly { terms: merged }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, p: &ChartPoint) -> f64 {
        self.terms.iter().map(|t| t.eval(p)).sum()
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        TrigPoly { terms }.normalized()
    }

    pub fn scaled(&self, c: f64) -> TrigPoly {
        TrigPoly {
            terms: self
                .terms
                .iter()
                .map(|t| TrigTerm { amp: c * t.amp, factors: t.factors.clone() })
                .collect(),
        }
        .normalized()
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                // split shared angles via product-to-sum, keep the rest
                let mut partial: Vec<TrigTerm> =
                    vec![TrigTerm { amp: a.amp * b.amp, factors: BTreeMap::new() }];
                let mut axes: Vec<usize> =
                    a.factors.keys().chain(b.factors.keys()).copied().collect();
                axes.sort_unstable();
                axes.dedup();
                for axis in axes {
                    match (a.factors.get(&axis), b.factors.get(&axis)) {
                        (Some(&ha), Some(&hb)) => {
                            let expansion = harmonic_product(ha, hb);
                            let mut next = Vec::new();
                            for t in &partial {
                                for &(c, h) in &expansion {
                                    let mut factors = t.factors.clone();
                                    if let Some(h) = h {
                                        factors.insert(axis, h);
                                    }
                                    next.push(TrigTerm { amp: t.amp * c, factors });
                                }
                            }
                            partial = next;
                        }
                        (Some(&h), None) | (None, Some(&h)) => {
                            for t in partial.iter_mut() {
                                t.factors.insert(axis, h);
                            }
                        }
                        (None, None) => unreachable!(),
                    }
                }
                terms.extend(partial);
            }
        }
        TrigPoly { terms }.normalized()
    }

    /// ∫ over the torus with `n_angles` angles, each of length 2π. Exact:
    /// every nontrivial harmonic integrates to zero.
    pub fn integrate_torus(&self, n_angles: usize) -> f64 {
        let vol = TAU.powi(n_angles as i32);
        self.terms
            .iter()
            .filter(|t| t.factors.is_empty())
            .map(|t| t.amp * vol)
            .sum()
    }
}

/// Polynomial in x with trig-polynomial coefficients: Σ_p x^p · T_p(θ).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyTrig {
    xpows: Vec<TrigPoly>,
}

impl PolyTrig {
    pub fn zero() -> Self {
        PolyTrig::default()
    }

    pub fn constant(c: f64) -> Self {
        PolyTrig { xpows: vec![TrigPoly::constant(c)] }.normalized()
    }

    pub fn from_trig(t: TrigPoly) -> Self {
        PolyTrig { xpows: vec![t] }.normalized()
    }

    /// c · x^p
    pub fn x_power(p: usize, c: f64) -> Self {
        let mut xpows = vec![TrigPoly::zero(); p + 1];
        xpows[p] = TrigPoly::constant(c);
        PolyTrig { xpows }.normalized()
    }

    /// x^p · T(θ)
    pub fn x_power_trig(p: usize, t: TrigPoly) -> Self {
        let mut xpows = vec![TrigPoly::zero(); p + 1];
        xpows[p] = t;
        PolyTrig { xpows }.normalized()
    }

    fn normalized(mut self) -> Self {
        while self.xpows.last().is_some_and(|t| t.is_zero()) {
            self.xpows.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.xpows.is_empty()
    }

    /// Degree in x, or None for the zero polynomial.
    pub fn x_degree(&self) -> Option<usize> {
        self.xpows.len().checked_sub(1)
    }

    pub fn eval(&self, p: &ChartPoint) -> f64 {
        let mut acc = 0.0;
        for t in self.xpows.iter().rev() {
            acc = acc * p.x() + t.eval(p);
        }
        acc
    }

    pub fn add(&self, other: &PolyTrig) -> PolyTrig {
        let n = self.xpows.len().max(other.xpows.len());
        let mut xpows = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.xpows.get(i).cloned().unwrap_or_default();
            let b = other.xpows.get(i).cloned().unwrap_or_default();
            xpows.push(a.add(&b));
        }
        PolyTrig { xpows }.normalized()
    }

    pub fn scaled(&self, c: f64) -> PolyTrig {
        PolyTrig { xpows: self.xpows.iter().map(|t| t.scaled(c)).collect() }.normalized()
    }

    pub fn mul(&self, other: &PolyTrig) -> PolyTrig {
        if self.is_zero() || other.is_zero() {
            return PolyTrig::zero();
        }
        let mut xpows = vec![TrigPoly::zero(); self.xpows.len() + other.xpows.len() - 1];
        for (i, a) in self.xpows.iter().enumerate() {
            for (j, b) in other.xpows.iter().enumerate() {
                xpows[i + j] = xpows[i + j].add(&a.mul(b));
            }
        }
        PolyTrig { xpows }.normalized()
    }

    /// Exact torus integral per power of x: returns c_p with
    /// ∫_Z (this) = Σ_p c_p x^p.
    pub fn integrate_torus(&self, n_angles: usize) -> Vec<f64> {
        self.xpows.iter().map(|t| t.integrate_torus(n_angles)).collect()
    }
}

/// Coefficient function of a form on the chart.
#[derive(Clone)]
pub enum ScalarField {
    Constant(f64),
    PolyTrig(PolyTrig),
    Opaque(Arc<dyn Fn(&ChartPoint) -> f64 + Send + Sync>),
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(c) => write!(f, "Constant({c})"),
            ScalarField::PolyTrig(p) => write!(f, "PolyTrig({p:?})"),
            ScalarField::Opaque(_) => write!(f, "Opaque(..)"),
        }
    }
}

impl ScalarField {
    pub fn opaque<F>(f: F) -> Self
    where
        F: Fn(&ChartPoint) -> f64 + Send + Sync + 'static,
    {
        ScalarField::Opaque(Arc::new(f))
    }

    pub fn eval(&self, p: &ChartPoint) -> f64 {
        match self {
            ScalarField::Constant(c) => *c,
            ScalarField::PolyTrig(t) => t.eval(p),
            ScalarField::Opaque(f) => f(p),
        }
    }

    /// Structural zero test (opaque fields are never structurally zero).
    pub fn is_zero(&self) -> bool {
        match self {
            ScalarField::Constant(c) => *c == 0.0,
            ScalarField::PolyTrig(t) => t.is_zero(),
            ScalarField::Opaque(_) => false,
        }
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        use ScalarField::*;
        match (self, other) {
            (Constant(a), Constant(b)) => Constant(a * b),
            (Constant(a), PolyTrig(p)) | (PolyTrig(p), Constant(a)) => PolyTrig(p.scaled(*a)),
            (PolyTrig(a), PolyTrig(b)) => PolyTrig(a.mul(b)),
            _ => {
                let a = self.clone();
                let b = other.clone();
                ScalarField::opaque(move |p| a.eval(p) * b.eval(p))
            }
        }
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        use ScalarField::*;
        match (self, other) {
            (Constant(a), Constant(b)) => Constant(a + b),
            (Constant(a), PolyTrig(p)) | (PolyTrig(p), Constant(a)) => {
                PolyTrig(p.add(&crate::forms::PolyTrig::constant(*a)))
            }
            (PolyTrig(a), PolyTrig(b)) => PolyTrig(a.add(b)),
            _ => {
                let a = self.clone();
                let b = other.clone();
                ScalarField::opaque(move |p| a.eval(p) + b.eval(p))
            }
        }
    }
}

// Merge two strictly increasing tuples; None when they share an index.
// The sign is the parity of the interleaving permutation.
fn merge_tuples(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut inversions = 0usize;
    for &j in b {
        if a.binary_search(&j).is_ok() {
            return None;
        }
        inversions += a.iter().filter(|&&i| i > j).count();
    }
    let mut merged = Vec::with_capacity(a.len() + b.len());
    merged.extend_from_slice(a);
    merged.extend_from_slice(b);
    merged.sort_unstable();
    Some((merged, if inversions % 2 == 0 { 1.0 } else { -1.0 }))
}

/// Differential form on the chart in canonical representation.
#[derive(Debug, Clone)]
pub struct Form {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, ScalarField>,
}

impl Form {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(degree <= dim);
        Form { dim, degree, coeffs: BTreeMap::new() }
    }

    /// Degree-0 form with constant value.
    pub fn constant(dim: usize, value: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(Vec::new(), ScalarField::Constant(value));
        Form { dim, degree: 0, coeffs }
    }

    /// Basis monomial dμ_{i1} ∧ … ∧ dμ_{ip} with coefficient 1.
    pub fn basis(dim: usize, indices: &[usize]) -> Self {
        Form::zero(dim, indices.len()).with_term(indices, ScalarField::Constant(1.0))
    }

    /// Add a coefficient on a strictly increasing index tuple.
    pub fn with_term(mut self, indices: &[usize], field: ScalarField) -> Self {
        assert_eq!(indices.len(), self.degree, "tuple length must match degree");
        assert!(
            indices.windows(2).all(|w| w[0] < w[1]),
            "index tuple must be strictly increasing"
        );
        assert!(indices.iter().all(|&i| i < self.dim));
        let key = indices.to_vec();
        let entry = match self.coeffs.remove(&key) {
            Some(existing) => existing.add(&field),
            None => field,
        };
        if !entry.is_zero() {
            self.coeffs.insert(key, entry);
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&[usize], &ScalarField)> {
        self.coeffs.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn add(&self, other: &Form) -> Form {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out = out.with_term(k, v.clone());
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Form {
        self.scaled_field(&ScalarField::Constant(c))
    }

    pub fn scaled_field(&self, field: &ScalarField) -> Form {
        let mut out = Form::zero(self.dim, self.degree);
        for (k, v) in &self.coeffs {
            let prod = v.mul(field);
            if !prod.is_zero() {
                out.coeffs.insert(k.clone(), prod);
            }
        }
        out
    }

    pub fn wedge(&self, other: &Form) -> Result<Form> {
        assert_eq!(self.dim, other.dim);
        if self.degree + other.degree > self.dim {
            return Err(Error::DegreeOverflow {
                left: self.degree,
                right: other.degree,
                dim: self.dim,
            });
        }
        let mut out = Form::zero(self.dim, self.degree + other.degree);
        for (ka, va) in &self.coeffs {
            for (kb, vb) in &other.coeffs {
                if let Some((merged, sign)) = merge_tuples(ka, kb) {
                    let mut prod = va.mul(vb);
                    if sign < 0.0 {
                        prod = prod.mul(&ScalarField::Constant(-1.0));
                    }
                    out = out.with_term(&merged, prod);
                }
            }
        }
        Ok(out)
    }

    /// p-fold wedge power; p = 0 is the constant-1 form.
    pub fn wedge_power(&self, p: usize) -> Result<Form> {
        if p == 0 {
            return Ok(Form::constant(self.dim, 1.0));
        }
        if p * self.degree > self.dim {
            return Err(Error::DegreeOverflow {
                left: self.degree * (p - 1),
                right: self.degree,
                dim: self.dim,
            });
        }
        let mut acc = self.clone();
        for _ in 1..p {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    pub fn evaluate(&self, p: &ChartPoint) -> FormValue {
        assert_eq!(p.dim(), self.dim);
        let mut coeffs = BTreeMap::new();
        for (k, v) in &self.coeffs {
            let val = v.eval(p);
            if val != 0.0 {
                coeffs.insert(k.clone(), val);
            }
        }
        FormValue { dim: self.dim, degree: self.degree, coeffs }
    }

    /// Max-norm of a 2nd-order central-difference approximation of dα at p.
    /// For closed forms this is O(h²).
    pub fn exterior_derivative_residual(&self, p: &ChartPoint, h: f64) -> Result<f64> {
        if self.degree + 1 > self.dim {
            // d of a top form vanishes identically
            return Ok(0.0);
        }
        let mut d_coeffs: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (tuple, field) in &self.coeffs {
            for axis in 0..self.dim {
                if tuple.contains(&axis) {
                    continue;
                }
                let plus = field.eval(&p.shifted(axis, h)?);
                let minus = field.eval(&p.shifted(axis, -h)?);
                let deriv = (plus - minus) / (2.0 * h);
                let pos = tuple.iter().filter(|&&i| i < axis).count();
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                let mut merged = tuple.clone();
                merged.insert(pos, axis);
                *d_coeffs.entry(merged).or_insert(0.0) += sign * deriv;
            }
        }
        Ok(d_coeffs.values().fold(0.0, |m, v| m.max(v.abs())))
    }
}

/// Pointwise value of a form: real coefficients on canonical tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct FormValue {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, f64>,
}

impl FormValue {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(degree <= dim);
        FormValue { dim, degree, coeffs: BTreeMap::new() }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        let mut v = FormValue::zero(dim, 0);
        v.set(&[], value);
        v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficient(&self, indices: &[usize]) -> f64 {
        self.coeffs.get(indices).copied().unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.coeffs.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn set(&mut self, indices: &[usize], value: f64) {
        assert_eq!(indices.len(), self.degree);
        assert!(indices.windows(2).all(|w| w[0] < w[1]));
        if value == 0.0 {
            self.coeffs.remove(indices);
        } else {
            self.coeffs.insert(indices.to_vec(), value);
        }
    }

    pub fn accumulate(&mut self, indices: &[usize], value: f64) {
        let cur = self.coefficient(indices);
        self.set(indices, cur + value);
    }

    pub fn add(&self, other: &FormValue) -> FormValue {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.accumulate(k, *v);
        }
        out
    }

    pub fn sub(&self, other: &FormValue) -> FormValue {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, c: f64) -> FormValue {
        let mut out = FormValue::zero(self.dim, self.degree);
        if c != 0.0 {
            for (k, v) in &self.coeffs {
                out.coeffs.insert(k.clone(), c * v);
            }
        }
        out
    }

    pub fn wedge(&self, other: &FormValue) -> Result<FormValue> {
        assert_eq!(self.dim, other.dim);
        if self.degree + other.degree > self.dim {
            return Err(Error::DegreeOverflow {
                left: self.degree,
                right: other.degree,
                dim: self.dim,
            });
        }
        let mut out = FormValue::zero(self.dim, self.degree + other.degree);
        for (ka, va) in &self.coeffs {
            for (kb, vb) in &other.coeffs {
                if let Some((merged, sign)) = merge_tuples(ka, kb) {
                    out.accumulate(&merged, sign * va * vb);
                }
            }
        }
        Ok(out)
    }

    pub fn wedge_power(&self, p: usize) -> Result<FormValue> {
        if p == 0 {
            return Ok(FormValue::constant(self.dim, 1.0));
        }
        if p * self.degree > self.dim {
            return Err(Error::DegreeOverflow {
                left: self.degree * (p - 1),
                right: self.degree,
                dim: self.dim,
            });
        }
        let mut acc = self.clone();
        for _ in 1..p {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    /// Coefficient of dx ∧ dθ_1 ∧ … ∧ dθ_{2n-1}; the value must be of top
    /// degree.
    pub fn top_coefficient(&self) -> Result<f64> {
        if self.degree != self.dim {
            return Err(Error::WrongDegree { expected: self.dim, got: self.degree });
        }
        let full: Vec<usize> = (0..self.dim).collect();
        Ok(self.coefficient(&full))
    }

    /// Max absolute coefficient.
    pub fn norm_max(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pullback under the inclusion Z ↪ M: drops every tuple containing dx.
    pub fn restrict_to_z(&self) -> FormValue {
        let mut out = FormValue::zero(self.dim, self.degree);
        for (k, v) in &self.coeffs {
            if !k.contains(&0) {
                out.coeffs.insert(k.clone(), *v);
            }
        }
        out
    }
}

/// Tangent vector value: coefficients over {∂x, ∂θ_1, …}.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorValue {
    comps: Vec<f64>,
}

impl VectorValue {
    pub fn new(comps: Vec<f64>) -> Self {
        VectorValue { comps }
    }

    /// Unit vector along one chart axis.
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut comps = vec![0.0; dim];
        comps[axis] = 1.0;
        VectorValue { comps }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, axis: usize) -> f64 {
        self.comps[axis]
    }

    pub fn components(&self) -> &[f64] {
        &self.comps
    }
}

/// Interior product ι_v a. Sign convention: contraction into the first
/// slot, so contract(∂x, dx∧dθ_1) = +dθ_1.
pub fn contract(v: &VectorValue, a: &FormValue) -> Result<FormValue> {
    if a.degree == 0 {
        return Err(Error::ContractDegreeZero);
    }
    assert_eq!(v.dim(), a.dim);
    let mut out = FormValue::zero(a.dim, a.degree - 1);
    for (tuple, &coeff) in &a.coeffs {
        for (j, &axis) in tuple.iter().enumerate() {
            let vc = v.component(axis);
            if vc == 0.0 {
                continue;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let mut rest = tuple.clone();
            rest.remove(j);
            out.accumulate(&rest, sign * vc * coeff);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(x: f64, thetas: &[f64]) -> ChartPoint {
        ChartPoint::new(x, thetas).unwrap()
    }

    #[test]
    fn wedge_basis_case() {
        let dx = Form::basis(4, &[0]);
        let dth1 = Form::basis(4, &[1]);
        let w = dx.wedge(&dth1).unwrap();
        let v = w.evaluate(&pt(0.3, &[0.1, 0.2, 0.3]));
        assert_eq!(v.coefficient(&[0, 1]), 1.0);
    }

    #[test]
    fn wedge_self_vanishes() {
        let dx = Form::basis(4, &[0]);
        let w = dx.wedge(&dx).unwrap();
        let v = w.evaluate(&pt(0.0, &[0.0, 0.0, 0.0]));
        assert_eq!(v.norm_max(), 0.0);
    }

    #[test]
    fn wedge_square_of_symplectic_sum() {
        // (dx∧dθ1 + dθ2∧dθ3)^2 = 2 dx∧dθ1∧dθ2∧dθ3
        let a = Form::basis(4, &[0, 1]).add(&Form::basis(4, &[2, 3]));
        let sq = a.wedge_power(2).unwrap();
        let v = sq.evaluate(&pt(0.2, &[1.0, 2.0, 3.0]));
        assert_eq!(v.top_coefficient().unwrap(), 2.0);
        // brute-force check against the explicit left-associated product
        let v2 = a.wedge(&a).unwrap().evaluate(&pt(0.2, &[1.0, 2.0, 3.0]));
        assert_eq!(v, v2);
    }

    #[test]
    fn wedge_power_degree_overflow() {
        let a = Form::basis(4, &[0, 1]);
        assert!(a.wedge_power(3).is_err());
        assert!(matches!(
            a.wedge_power(3),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn wedge_power_zero_is_one() {
        let a = Form::basis(2, &[0, 1]);
        let one = a.wedge_power(0).unwrap();
        let v = one.evaluate(&pt(0.5, &[0.0]));
        assert_eq!(v.coefficient(&[]), 1.0);
    }

    #[test]
    fn evaluate_polynomial_and_trig() {
        // x^2 dx∧dθ1 at x = 0.5
        let f = Form::zero(2, 2).with_term(&[0, 1], ScalarField::PolyTrig(PolyTrig::x_power(2, 1.0)));
        let v = f.evaluate(&pt(0.5, &[0.7]));
        assert_abs_diff_eq!(v.coefficient(&[0, 1]), 0.25, epsilon = 1e-15);

        // cos(θ1) dθ1 at θ1 = 0
        let g = Form::zero(2, 1).with_term(
            &[1],
            ScalarField::PolyTrig(PolyTrig::from_trig(TrigPoly::harmonic(1, Harmonic::Cos(1), 1.0))),
        );
        let v = g.evaluate(&pt(0.0, &[0.0]));
        assert_abs_diff_eq!(v.coefficient(&[1]), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn top_coefficient_wrong_degree() {
        let v = FormValue::zero(4, 2);
        assert!(matches!(v.top_coefficient(), Err(Error::WrongDegree { .. })));
    }

    #[test]
    fn contract_conventions() {
        let p = pt(0.1, &[0.2, 0.3, 0.4]);
        let dth1 = Form::basis(4, &[1]).evaluate(&p);
        let one = contract(&VectorValue::basis(4, 1), &dth1).unwrap();
        assert_eq!(one.coefficient(&[]), 1.0);

        let dth23 = Form::basis(4, &[2, 3]).evaluate(&p);
        let z = contract(&VectorValue::basis(4, 1), &dth23).unwrap();
        assert_eq!(z.norm_max(), 0.0);

        // sign convention anchor: ι_{∂x}(dx∧dθ1) = +dθ1
        let dxdth1 = Form::basis(4, &[0, 1]).evaluate(&p);
        let r = contract(&VectorValue::basis(4, 0), &dxdth1).unwrap();
        assert_eq!(r.coefficient(&[1]), 1.0);
    }

    #[test]
    fn contract_degree_zero_is_error() {
        let v = FormValue::constant(2, 1.0);
        assert!(matches!(
            contract(&VectorValue::basis(2, 0), &v),
            Err(Error::ContractDegreeZero)
        ));
    }

    #[test]
    fn exterior_derivative_of_constants_vanishes() {
        let f = Form::basis(4, &[1, 2]);
        let r = f.exterior_derivative_residual(&pt(0.0, &[1.0, 2.0, 3.0]), 1e-4).unwrap();
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn exterior_derivative_of_x_dtheta() {
        // d(x dθ1) = dx∧dθ1, so the residual is ~1
        let f = Form::zero(2, 1).with_term(&[1], ScalarField::PolyTrig(PolyTrig::x_power(1, 1.0)));
        let r = f.exterior_derivative_residual(&pt(0.2, &[0.5]), 1e-4).unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn exterior_derivative_second_order_in_h() {
        // sin(θ1) dθ1 is closed; the finite-difference residual is O(h²)
        let f = Form::zero(2, 1).with_term(
            &[1],
            ScalarField::opaque(|p: &ChartPoint| p.coord(1).sin()),
        );
        let p = pt(0.0, &[0.9]);
        let r1 = f.exterior_derivative_residual(&p, 1e-2).unwrap();
        let r2 = f.exterior_derivative_residual(&p, 1e-3).unwrap();
        assert!(r1 < 1e-4 && r2 < 1e-6, "r1 = {r1}, r2 = {r2}");
    }

    #[test]
    fn stencil_out_of_domain() {
        let f = Form::zero(2, 1).with_term(&[1], ScalarField::PolyTrig(PolyTrig::x_power(1, 1.0)));
        let p = pt(0.99999, &[0.0]);
        assert!(matches!(
            f.exterior_derivative_residual(&p, 1e-4),
            Err(Error::StencilOutOfDomain(_))
        ));
    }

    #[test]
    fn trig_product_to_sum_evaluates_exactly() {
        let a = TrigPoly::harmonic(1, Harmonic::Sin(2), 1.5);
        let b = TrigPoly::harmonic(1, Harmonic::Cos(3), -0.5);
        let prod = a.mul(&b);
        for &th in &[0.0, 0.3, 1.1, 2.9, 5.5] {
            let p = pt(0.0, &[th]);
            assert_abs_diff_eq!(
                prod.eval(&p),
                1.5 * (2.0 * th).sin() * (-0.5) * (3.0 * th).cos(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn torus_integral_kills_harmonics() {
        let t = TrigPoly::constant(2.0)
            .add(&TrigPoly::harmonic(1, Harmonic::Sin(1), 3.0))
            .add(&TrigPoly::harmonic(2, Harmonic::Cos(4), -1.0));
        assert_abs_diff_eq!(t.integrate_torus(3), 2.0 * TAU.powi(3), epsilon = 1e-10);
        // sin² integrates to half the torus volume
        let s = TrigPoly::harmonic(1, Harmonic::Sin(1), 1.0);
        assert_abs_diff_eq!(s.mul(&s).integrate_torus(1), 0.5 * TAU, epsilon = 1e-12);
    }

    #[test]
    fn chart_point_reduces_angles() {
        let p = pt(0.0, &[TAU + 0.5, -0.5, 0.0]);
        assert_abs_diff_eq!(p.coord(1), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.coord(2), TAU - 0.5, epsilon = 1e-12);
    }

    #[test]
    fn chart_point_rejects_out_of_range_x() {
        assert!(ChartPoint::new(1.0, &[0.0]).is_err());
        assert!(ChartPoint::new(-1.5, &[0.0]).is_err());
    }
}
