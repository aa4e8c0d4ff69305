//! The desingularizing functions f and their scalings f_ε.
//!
//! Even case (m = 2k): f is odd, f' > 0 on [-1,1], and outside [-1,1]
//! equals -1/((2k-1) t^{2k-1}) ± 2 exactly. The interior is a polynomial:
//! f' is the even polynomial Hermite-matching t^{-2k} at t = 1 to J-1
//! derivatives, normalized so that f(1) = 2 - 1/(2k-1).
//!
//! Odd case (m = 2k+1): f is even, equals -t² + 2 on [-1,1], bridges to a
//! closed-form tail outside [-2,2] with a two-point Hermite polynomial on
//! [1,2]. The k > 0 tail comes in two modes: `Corrected` uses
//! -1/(2k t^{2k}) (whose derivative is t^{-(2k+1)}, so df_ε matches
//! dx/x^{2k+1} outside the band); `PaperLiteral` uses -1/((2k+2) t^{2k+2})
//! and demonstrably breaks that coincidence.
//!
//! All derivative evaluation is exact per piece (polynomial or closed-form
//! power differentiation); no finite differences.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::report::CheckReport;

/// Parity of the singularity order m the profile desingularizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileParity {
    /// m = 2k, k >= 1; f odd.
    Even,
    /// m = 2k + 1, k >= 0; f even.
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    Corrected,
    PaperLiteral,
}

/// Dense univariate polynomial with exact derivative evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval_deriv(&self, u: f64, order: usize) -> f64 {
        let mut acc = 0.0;
        for (j, &c) in self.coeffs.iter().enumerate().rev() {
            if j < order {
                break;
            }
            acc = acc * u + c * falling(j as f64, order);
        }
        acc
    }
}

/// a (a-1) … (a-r+1)
pub(crate) fn falling(a: f64, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (a - i as f64))
}

// Error-free transforms for the compensated residual below.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

// LU solve with iterative refinement against a compensated residual. The
// confluent Hermite systems get badly conditioned at high junction order;
// plain LU loses ~cond·eps ≈ 1e-8 of forward accuracy, refinement restores
// it to well below the 1e-9 junction tolerance.
fn refined_solve(mat: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = mat.clone().lu();
    let mut x = lu.solve(rhs)?;
    for _ in 0..3 {
        let mut r = DVector::zeros(rhs.len());
        for i in 0..rhs.len() {
            let (mut hi, mut lo) = (rhs[i], 0.0);
            for j in 0..x.len() {
                let (p, pe) = two_prod(-mat[(i, j)], x[j]);
                let (s, se) = two_sum(hi, p);
                hi = s;
                lo += pe + se;
            }
            r[i] = hi + lo;
        }
        let dx = lu.solve(&r)?;
        x += dx;
    }
    Some(x)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Desingularizing profile with exact piecewise derivatives.
#[derive(Debug, Clone)]
pub struct Profile {
    parity: ProfileParity,
    k: usize,
    junction_order: usize,
    tail_mode: TailMode,
    /// f on [-1,1]: odd polynomial (even case) or -t²+2 (odd case).
    interior: Poly,
    /// Odd case only: Hermite bridge on [1,2], in the variable u = t - 3/2.
    bridge: Option<Poly>,
    /// Even-case tail constant (+2 for t > 1); kept as a field so tests can
    /// inject a junction jump.
    tail_constant: f64,
    max_derivative_order: usize,
    warnings: Vec<String>,
}

const MAX_DERIVATIVE_ORDER: usize = 32;

impl Profile {
    pub fn parity(&self) -> ProfileParity {
        self.parity
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Singularity order m this profile matches.
    pub fn m(&self) -> usize {
        match self.parity {
            ProfileParity::Even => 2 * self.k,
            ProfileParity::Odd => 2 * self.k + 1,
        }
    }

    /// Effective junction order (may be lower than requested when the
    /// positivity constraint forced a reduction).
    pub fn junction_order(&self) -> usize {
        self.junction_order
    }

    pub fn tail_mode(&self) -> TailMode {
        self.tail_mode
    }

    pub fn max_derivative_order(&self) -> usize {
        self.max_derivative_order
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Coefficients of the interior polynomial piece of f, by power of t.
    pub fn interior_coeffs(&self) -> &[f64] {
        self.interior.coeffs()
    }

    /// Half-width (in t) of the region where f differs from its closed-form
    /// tail: 1 for the even case, 2 for the odd case.
    pub fn bridge_extent(&self) -> f64 {
        match self.parity {
            ProfileParity::Even => 1.0,
            ProfileParity::Odd => 2.0,
        }
    }

    #[cfg(test)]
    pub(crate) fn tamper_tail_constant(&mut self, c: f64) {
        self.tail_constant = c;
    }
}

/// Even-case profile: f' on [0,1] is the even polynomial of degree 2J
/// matching value and J-1 derivatives of t^{-2k} at t = 1, scaled so that
/// f(1) = 2 - 1/(2k-1); f is its odd antiderivative.
pub fn build_even_profile(k: usize, junction_order: usize) -> Result<Profile> {
    if k < 1 {
        return Err(Error::ProfileInfeasible("even case requires k >= 1".into()));
    }
    if junction_order < 1 {
        return Err(Error::ProfileInfeasible("junction order must be >= 1".into()));
    }
    let mut warnings = Vec::new();
    let mut j_eff = junction_order;
    loop {
        match try_build_even(k, j_eff) {
            Some(profile) => {
                let mut p = profile;
                p.warnings = warnings;
                return Ok(p);
            }
            None => {
                if j_eff == 1 {
                    return Err(Error::ProfileInfeasible(format!(
                        "no positive f' found for k = {k} at any junction order <= {junction_order}"
                    )));
                }
                warnings.push(format!(
                    "f' positivity failed at junction order {j_eff}; reduced to {}",
                    j_eff - 1
                ));
                j_eff -= 1;
            }
        }
    }
}

fn try_build_even(k: usize, j: usize) -> Option<Profile> {
    // unknowns: a_0..a_J with f'(t) = Σ a_i t^{2i}
    let dim = j + 1;
    let mut mat = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    // derivative matching of f' to t^{-2k} at t = 1, orders 0..J-1
    for r in 0..j {
        for i in 0..dim {
            mat[(r, i)] = falling(2.0 * i as f64, r);
        }
        rhs[r] = falling(-2.0 * k as f64, r);
    }
    // normalization ∫_0^1 f' = f(1) = 2 - 1/(2k-1)
    for i in 0..dim {
        mat[(j, i)] = 1.0 / (2.0 * i as f64 + 1.0);
    }
    rhs[j] = 2.0 - 1.0 / (2.0 * k as f64 - 1.0);

    let sol = refined_solve(&mat, &rhs)?;

    // f' as a full polynomial in t (even powers only)
    let mut fprime = vec![0.0; 2 * j + 1];
    for i in 0..dim {
        fprime[2 * i] = sol[i];
    }
    let fprime = Poly::new(fprime);

    // positivity of f' on [0,1] by dense sampling
    let samples = 1 << 12;
    for s in 0..=samples {
        let t = s as f64 / samples as f64;
        if fprime.eval_deriv(t, 0) <= 0.0 {
            return None;
        }
    }

    // odd antiderivative: f(t) = Σ a_i t^{2i+1}/(2i+1)
    let mut fcoeffs = vec![0.0; 2 * j + 2];
    for i in 0..dim {
        fcoeffs[2 * i + 1] = sol[i] / (2.0 * i as f64 + 1.0);
    }

    Some(Profile {
        parity: ProfileParity::Even,
        k,
        junction_order: j,
        tail_mode: TailMode::Corrected,
        interior: Poly::new(fcoeffs),
        bridge: None,
        tail_constant: 2.0,
        max_derivative_order: MAX_DERIVATIVE_ORDER,
        warnings: Vec::new(),
    })
}

/// Odd-case profile: f = -t²+2 on [-1,1], closed-form tail outside [-2,2]
/// selected by `tail_mode`, and a two-point Hermite bridge of degree 2J+1
/// on [1,2] matching J derivatives at both ends; even extension.
pub fn build_odd_profile(k: usize, junction_order: usize, tail_mode: TailMode) -> Result<Profile> {
    if junction_order < 1 {
        return Err(Error::ProfileInfeasible("junction order must be >= 1".into()));
    }
    let j = junction_order;
    let interior = Poly::new(vec![2.0, 0.0, -1.0]);

    // bridge p(u), u = t - 3/2, matching orders 0..J at u = -1/2 (parabola)
    // and u = +1/2 (tail)
    let dim = 2 * (j + 1);
    let mut mat = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    for r in 0..=j {
        for c in 0..dim {
            mat[(r, c)] = falling(c as f64, r) * (-0.5f64).powi(c as i32 - r as i32);
            mat[(j + 1 + r, c)] = falling(c as f64, r) * (0.5f64).powi(c as i32 - r as i32);
        }
        rhs[r] = interior.eval_deriv(1.0, r);
        rhs[j + 1 + r] = odd_tail(k, tail_mode, 2.0, r);
    }
    let sol = refined_solve(&mat, &rhs)
        .ok_or_else(|| Error::ProfileInfeasible("bridge Hermite system is singular".into()))?;

    Ok(Profile {
        parity: ProfileParity::Odd,
        k,
        junction_order: j,
        tail_mode,
        interior,
        bridge: Some(Poly::new(sol.iter().copied().collect())),
        tail_constant: 2.0,
        max_derivative_order: MAX_DERIVATIVE_ORDER,
        warnings: Vec::new(),
    })
}

// d^r/dt^r of the even-case tail at |t| > 1 (sign of t picks the constant).
fn even_tail(k: usize, tail_constant: f64, t: f64, order: usize) -> f64 {
    let a = 2.0 * k as f64 - 1.0; // f = -(1/a) t^{-a} ± tail_constant
    let c = -1.0 / a;
    let pow = c * falling(-a, order) * t.powi(-(a as i32) - order as i32);
    if order == 0 {
        pow + tail_constant * t.signum()
    } else {
        pow
    }
}

// d^r/dt^r of the odd-case tail at |t| > 2.
fn odd_tail(k: usize, mode: TailMode, t: f64, order: usize) -> f64 {
    if k == 0 {
        // f = log |t|
        if order == 0 {
            t.abs().ln()
        } else {
            // d^r log|t| = (-1)^{r-1} (r-1)! t^{-r}
            let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
            sign * falling(order as f64 - 1.0, order - 1) * t.powi(-(order as i32))
        }
    } else {
        let a = match mode {
            TailMode::Corrected => 2 * k,
            TailMode::PaperLiteral => 2 * k + 2,
        } as f64;
        let c = -1.0 / a;
        c * falling(-a, order) * t.powi(-(a as i32) - order as i32)
    }
}

impl Profile {
    /// d^order f / dt^order at t, exact per piece.
    pub fn eval(&self, t: f64, order: usize) -> Result<f64> {
        if order > self.max_derivative_order {
            return Err(Error::DerivativeOrder { order, max: self.max_derivative_order });
        }
        Ok(match self.parity {
            ProfileParity::Even => {
                if t.abs() <= 1.0 {
                    self.interior.eval_deriv(t, order)
                } else {
                    even_tail(self.k, self.tail_constant, t, order)
                }
            }
            ProfileParity::Odd => {
                // f even: f^(r)(t) = (-1)^r f^(r)(|t|)
                let s = t.abs();
                let v = if s <= 1.0 {
                    self.interior.eval_deriv(s, order)
                } else if s < 2.0 {
                    self.bridge.as_ref().expect("odd profile has a bridge").eval_deriv(s - 1.5, order)
                } else {
                    odd_tail(self.k, self.tail_mode, s, order)
                };
                if t < 0.0 && order % 2 == 1 {
                    -v
                } else {
                    v
                }
            }
        })
    }

    /// d^order f_ε / dx^order with f_ε(x) = ε^{-(2k-1)} f(x/ε) (even case)
    /// or ε^{-2k} f(x/ε) (odd case).
    pub fn eval_scaled(&self, eps: f64, x: f64, order: usize) -> Result<f64> {
        if eps <= 0.0 {
            return Err(Error::InvalidEps(eps));
        }
        let scale_pow = match self.parity {
            ProfileParity::Even => 2 * self.k as i32 - 1,
            ProfileParity::Odd => 2 * self.k as i32,
        };
        Ok(eps.powi(-scale_pow - order as i32) * self.eval(x / eps, order)?)
    }

    /// g(t) = 1/f'(t); even case only, where f' > 0 everywhere.
    pub fn reciprocal_derivative(&self, t: f64) -> Result<f64> {
        if self.parity != ProfileParity::Even {
            return Err(Error::ParityMismatch { m: self.m() });
        }
        let fp = self.eval(t, 1)?;
        if fp <= 0.0 {
            return Err(Error::ProfileNotMonotone(t));
        }
        Ok(1.0 / fp)
    }

    /// Exact derivatives g, g', …, g^{(j_max)} of g = 1/f' at t, by the
    /// recursion from (f'·g) = 1.
    pub fn reciprocal_derivatives(&self, t: f64, j_max: usize) -> Result<Vec<f64>> {
        let g0 = self.reciprocal_derivative(t)?;
        let mut g = vec![g0];
        for j in 1..=j_max {
            let mut acc = 0.0;
            for i in 1..=j {
                acc += binomial(j, i) * self.eval(t, i + 1)? * g[j - i];
            }
            g.push(-g0 * acc);
        }
        Ok(g)
    }

    /// Structural checks: symmetry, interior/tail formulas, junction
    /// continuity of derivatives 0..J, and the sign conditions on f'.
    pub fn validate(&self, tol: f64) -> CheckReport {
        let mut report = CheckReport::new(format!(
            "profile parity={:?} k={} J={}",
            self.parity, self.k, self.junction_order
        ));

        // exact symmetry on a fixed sample
        let mut sym = 0.0f64;
        for s in 0..200 {
            let t = -3.0 + 6.0 * (s as f64 + 0.5) / 200.0;
            let a = self.eval(t, 0).unwrap();
            let b = self.eval(-t, 0).unwrap();
            let d = match self.parity {
                ProfileParity::Even => (a + b).abs(),
                ProfileParity::Odd => (a - b).abs(),
            };
            sym = sym.max(d / (1.0 + a.abs()));
        }
        report.check_le("symmetry defect (relative)", sym, 1e-14);

        // junction continuity: relative one-sided mismatch per boundary
        let mut junction = 0.0f64;
        let boundaries: Vec<(f64, Box<dyn Fn(usize) -> f64>, Box<dyn Fn(usize) -> f64>)> =
            match self.parity {
                ProfileParity::Even => vec![(
                    1.0,
                    Box::new(|r| self.interior.eval_deriv(1.0, r)),
                    Box::new(|r| even_tail(self.k, self.tail_constant, 1.0, r)),
                )],
                ProfileParity::Odd => {
                    let bridge = self.bridge.as_ref().expect("odd profile has a bridge");
                    vec![
                        (
                            1.0,
                            Box::new(|r| self.interior.eval_deriv(1.0, r)),
                            Box::new(move |r| bridge.eval_deriv(-0.5, r)),
                        ),
                        (
                            2.0,
                            Box::new(move |r| bridge.eval_deriv(0.5, r)),
                            Box::new(|r| odd_tail(self.k, self.tail_mode, 2.0, r)),
                        ),
                    ]
                }
            };
        for (b, left, right) in &boundaries {
            for r in 0..=self.junction_order {
                let l = left(r);
                let rv = right(r);
                let mismatch = (l - rv).abs() / (1.0 + l.abs().max(rv.abs()));
                junction = junction.max(mismatch);
                let _ = b;
            }
        }
        report.check_le("max junction derivative mismatch (orders 0..J)", junction, tol);

        match self.parity {
            ProfileParity::Even => {
                report.check_le("f(0)", self.eval(0.0, 0).unwrap(), 1e-15);
                let target = 2.0 - 1.0 / (2.0 * self.k as f64 - 1.0);
                report.check_le(
                    "f(1) - (2 - 1/(2k-1))",
                    self.eval(1.0, 0).unwrap() - target,
                    1e-12,
                );
                let samples = 1 << 12;
                let mut min_fp = f64::INFINITY;
                for s in 0..=samples {
                    let t = s as f64 / samples as f64;
                    min_fp = min_fp.min(self.interior.eval_deriv(t, 1));
                }
                report.check_gt("min f' on [0,1]", min_fp, 0.0);
            }
            ProfileParity::Odd => {
                report.check_le("f(1) - 1", self.eval(1.0, 0).unwrap() - 1.0, 1e-14);
                report.check_le("f'(0)", self.eval(0.0, 1).unwrap(), 1e-14);
                report.check_le("f''(0) + 2", self.eval(0.0, 2).unwrap() + 2.0, 1e-14);
                // f'(1) = -2 < 0 while f'(2+) > 0 for the corrected/log tail,
                // so f' has a root in the bridge; report its location.
                if let Some(root) = self.bridge_derivative_root() {
                    report.record("f' sign change in (1,2) at t", root);
                }
            }
        }

        for w in &self.warnings {
            report.note(w.clone());
        }
        report
    }

    /// Root of f' inside the bridge interval (1,2), when the one-sided
    /// derivatives change sign. Bisection to 1e-14.
    pub fn bridge_derivative_root(&self) -> Option<f64> {
        let bridge = self.bridge.as_ref()?;
        let fp = |t: f64| bridge.eval_deriv(t - 1.5, 1);
        let (mut lo, mut hi) = (1.0 + 1e-12, 2.0 - 1e-12);
        if fp(lo) * fp(hi) >= 0.0 {
            return None;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if fp(lo) * fp(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    }
}
