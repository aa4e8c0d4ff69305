//! The desingularized forms ω_ε = df_ε ∧ (Σ x^i α_i) + β and their
//! verification: symplecticity (even m), foldedness (odd m), coincidence
//! with ω outside the ε-band, and C^{2k-1} convergence of the dual
//! bivector fields.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::forms::{ChartPoint, Form, FormValue, PolyTrig, ScalarField};
use crate::model::LaurentModel;
use crate::profile::{falling, Profile, ProfileParity};
use crate::report::CheckReport;

/// Grid resolution for the chart sweeps. The x-grid is clustered: half the
/// points uniform in x/ε inside the band, the rest uniform outside.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub x_points: usize,
    pub theta_points: usize,
    pub x_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { x_points: 401, theta_points: 16, x_max: 0.9 }
    }
}

impl GridSpec {
    /// Clustered x-grid resolving the ε-band.
    pub fn x_values(&self, eps: f64) -> Vec<f64> {
        let inner = self.x_points / 2;
        let outer = self.x_points - inner;
        let mut xs = Vec::with_capacity(self.x_points);
        for i in 0..inner {
            xs.push(-eps + 2.0 * eps * i as f64 / (inner.max(2) - 1) as f64);
        }
        let half = outer / 2;
        for i in 0..half {
            let t = eps + (self.x_max - eps) * (i as f64 + 1.0) / half as f64;
            xs.push(t);
            xs.push(-t);
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs
    }
}

fn ensure_parity(model: &LaurentModel, profile: &Profile) -> Result<()> {
    if profile.m() != model.m() {
        return Err(Error::ParityMismatch { m: model.m() });
    }
    Ok(())
}

fn ensure_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidEps(eps));
    }
    Ok(())
}

/// Value of ω_ε at p, with df_ε = f_ε'(x) dx.
pub fn desingularize(
    model: &LaurentModel,
    profile: &Profile,
    eps: f64,
    p: &ChartPoint,
) -> Result<FormValue> {
    ensure_parity(model, profile)?;
    ensure_eps(eps)?;
    let dfeps = profile.eval_scaled(eps, p.x(), 1)?;
    let dx = Form::basis(model.dim(), &[0]).evaluate(p);
    let singular_part = dx.wedge(&model.alpha_sum_value(p))?.scaled(dfeps);
    Ok(singular_part.add(&model.beta_value(p)?))
}

/// ω_ε as a symbolic form on the chart (opaque coefficient for the f_ε'
/// factor); used for finite-difference closedness checks.
pub fn desingularized_form(model: &LaurentModel, profile: &Profile, eps: f64) -> Result<Form> {
    ensure_parity(model, profile)?;
    ensure_eps(eps)?;
    let dim = model.dim();
    let prof = profile.clone();
    let dfeps = ScalarField::opaque(move |p: &ChartPoint| {
        prof.eval_scaled(eps, p.x(), 1).expect("eps > 0 and order 1 is available")
    });
    let mut alpha_sum = Form::zero(dim, 1);
    for (i, a) in model.alphas().iter().enumerate() {
        alpha_sum = alpha_sum.add(&a.scaled_field(&ScalarField::PolyTrig(PolyTrig::x_power(i, 1.0))));
    }
    let dx = Form::basis(dim, &[0]);
    let mut form = dx.scaled_field(&dfeps).wedge(&alpha_sum)?;
    form = form.add(&dx.wedge(model.gamma())?);
    for (j, b) in model.betas().iter().enumerate() {
        form = form.add(&b.scaled_field(&ScalarField::PolyTrig(PolyTrig::x_power(j, 1.0))));
    }
    Ok(form)
}

/// Even case: min |top(ω_ε^n)| and sign constancy over the grid, plus a
/// finite-difference closedness spot check. The minimum over the inner
/// band |x| <= ε is reported separately (it carries the ε^{-2k} growth).
pub fn check_symplectic(
    model: &LaurentModel,
    profile: &Profile,
    eps: f64,
    grid: &GridSpec,
) -> Result<CheckReport> {
    ensure_parity(model, profile)?;
    if profile.parity() != ProfileParity::Even {
        return Err(Error::ParityMismatch { m: model.m() });
    }
    ensure_eps(eps)?;
    let mut report = CheckReport::new(format!(
        "symplecticity of omega_eps, {} eps={eps}",
        model.label()
    ));

    let n = model.n();
    let mut min_global = f64::INFINITY;
    let mut min_inner = f64::INFINITY;
    let mut sign = 0.0f64;
    let mut sign_constant = true;
    for x in grid.x_values(eps) {
        for z in crate::model::z_grid(n, grid.theta_points) {
            let p = ChartPoint::new(x, z.thetas())?;
            let top = desingularize(model, profile, eps, &p)?
                .wedge_power(n)?
                .top_coefficient()?;
            min_global = min_global.min(top.abs());
            if x.abs() <= eps {
                min_inner = min_inner.min(top.abs());
            }
            if sign == 0.0 {
                sign = top.signum();
            } else if top.signum() != sign && top != 0.0 {
                sign_constant = false;
            }
        }
    }
    report.check_gt("min |top(omega_eps^n)| over grid", min_global, 0.0);
    report.check_that("sign of top(omega_eps^n)", sign, sign_constant && sign != 0.0);
    report.record("min |top(omega_eps^n)| on |x| <= eps", min_inner);

    // closedness spot check, relative to the local form magnitude
    let h = 1e-4;
    let sym = desingularized_form(model, profile, eps)?;
    let mut rel_res = 0.0f64;
    for &x in &[0.0, 0.4 * eps, -0.7 * eps, 1.5 * eps.min(0.3), -0.45] {
        let thetas = vec![0.6; 2 * n - 1];
        let p = ChartPoint::new(x, &thetas)?;
        let res = sym.exterior_derivative_residual(&p, h)?;
        let scale = 1.0 + desingularize(model, profile, eps, &p)?.norm_max();
        rel_res = rel_res.max(res / scale);
    }
    report.check_le("relative closedness residual (h=1e-4)", rel_res, 100.0 * h * h);
    Ok(report)
}

/// Half-width of the band outside of which ω_ε coincides with ω: ε for the
/// even case, 2ε for the odd case (the scaled bridge occupies ε < |x| < 2ε).
pub fn coincidence_band(profile: &Profile, eps: f64) -> f64 {
    profile.bridge_extent() * eps
}

/// Max coefficientwise |ω_ε − ω| over the outer grid; passes below 1e-11.
pub fn check_coincidence(
    model: &LaurentModel,
    profile: &Profile,
    eps: f64,
    outer_x: &[f64],
    theta_points: usize,
) -> Result<CheckReport> {
    ensure_parity(model, profile)?;
    ensure_eps(eps)?;
    let band = coincidence_band(profile, eps);
    let mut report = CheckReport::new(format!(
        "coincidence of omega_eps with omega, {} eps={eps}",
        model.label()
    ));
    let mut max_dev = 0.0f64;
    for &x in outer_x {
        if x.abs() <= band {
            return Err(Error::InsideBand { x, band });
        }
        for z in crate::model::z_grid(model.n(), theta_points) {
            let p = ChartPoint::new(x, z.thetas())?;
            let dev = desingularize(model, profile, eps, &p)?
                .sub(&model.raw_bm_form(&p)?)
                .norm_max();
            max_dev = max_dev.max(dev);
        }
    }
    report.check_le("max |omega_eps - omega| outside the band", max_dev, 1e-11);
    Ok(report)
}

/// Poisson coefficients dual to a nondegenerate 2-form value: Π = -Ω^{-1}
/// for the antisymmetric coefficient matrix Ω. Fails on fold loci.
pub fn invert_to_bivector(v: &FormValue) -> Result<DMatrix<f64>> {
    if v.degree() != 2 {
        return Err(Error::WrongDegree { expected: 2, got: v.degree() });
    }
    let dim = v.dim();
    let mut omega = DMatrix::zeros(dim, dim);
    for (tuple, c) in v.coefficients() {
        omega[(tuple[0], tuple[1])] = c;
        omega[(tuple[1], tuple[0])] = -c;
    }
    let inv = omega.try_inverse().ok_or(Error::SingularMatrix)?;
    Ok(-inv)
}

/// Sup-norms of d^j/dx^j (ε^{2k} g(x/ε) − x^{2k}) on [-ε, ε] per (ε, j),
/// with fitted log-log slopes.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub k: usize,
    /// (eps, derivative order j, sup-norm on [-eps, eps])
    pub rows: Vec<(f64, usize, f64)>,
    /// (j, fitted slope of log sup-norm vs log eps)
    pub slopes: Vec<(usize, f64)>,
}

/// C^{2k-1} convergence data for the dual bivector coefficient: the
/// difference ε^{2k} g(x/ε) − x^{2k} and its derivatives on the inner
/// band, g = 1/f'. Derivatives of g are exact (recursive quotient rule).
pub fn convergence_report(
    profile: &Profile,
    eps_ladder: &[f64],
    j_max: usize,
) -> Result<ConvergenceTable> {
    if profile.parity() != ProfileParity::Even {
        return Err(Error::ParityMismatch { m: profile.m() });
    }
    let k = profile.k();
    if k >= 1 && j_max > 2 * k - 1 {
        return Err(Error::DerivativeOrder { order: j_max, max: 2 * k - 1 });
    }
    if eps_ladder.windows(2).any(|w| w[1] >= w[0]) || eps_ladder.is_empty() {
        return Err(Error::IllConditioned("eps ladder must be strictly decreasing".into()));
    }

    // g^{(j)}(y) on a dense grid of [-1,1]; independent of eps
    let samples = 2001;
    let mut gder = Vec::with_capacity(samples);
    let mut ys = Vec::with_capacity(samples);
    for s in 0..samples {
        let y = -1.0 + 2.0 * s as f64 / (samples - 1) as f64;
        ys.push(y);
        gder.push(profile.reciprocal_derivatives(y, j_max)?);
    }

    let mut rows = Vec::new();
    for &eps in eps_ladder {
        ensure_eps(eps)?;
        for j in 0..=j_max {
            let mut sup = 0.0f64;
            for (y, g) in ys.iter().zip(&gder) {
                let x = eps * y;
                let lhs = eps.powi(2 * k as i32 - j as i32) * g[j];
                let rhs = falling(2.0 * k as f64, j) * x.powi(2 * k as i32 - j as i32);
                sup = sup.max((lhs - rhs).abs());
            }
            rows.push((eps, j, sup));
        }
    }

    let mut slopes = Vec::new();
    for j in 0..=j_max {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|(_, jj, sup)| *jj == j && *sup > 0.0)
            .map(|(e, _, sup)| (e.ln(), sup.ln()))
            .collect();
        slopes.push((j, linear_slope(&pts)));
    }
    Ok(ConvergenceTable { k, rows, slopes })
}

fn linear_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    num / den
}

/// Outside the band the bivector coefficient ε^{2k} g(x/ε) equals x^{2k}
/// algebraically; returns the max defect over the given |x| > ε points.
pub fn bivector_tail_defect(profile: &Profile, eps: f64, xs: &[f64]) -> Result<f64> {
    let k = profile.k() as i32;
    let mut max = 0.0f64;
    for &x in xs {
        if x.abs() <= eps {
            return Err(Error::InsideBand { x, band: eps });
        }
        let lhs = eps.powi(2 * k) * profile.reciprocal_derivative(x / eps)?;
        let defect = (lhs - x.powi(2 * k)).abs() / x.powi(2 * k).abs().max(1.0);
        max = max.max(defect);
    }
    Ok(max)
}

/// Odd case: fold structure at Z. Checks that top(ω_ε^n) vanishes on
/// {x = 0}, that its x-derivative there is bounded away from zero
/// (transversality) and that (i*ω_ε)^{n-1} is nonvanishing on Z.
pub fn check_folded(
    model: &LaurentModel,
    profile: &Profile,
    eps: f64,
    theta_points: usize,
) -> Result<CheckReport> {
    ensure_parity(model, profile)?;
    if profile.parity() != ProfileParity::Odd {
        return Err(Error::ParityMismatch { m: model.m() });
    }
    ensure_eps(eps)?;
    let n = model.n();
    let k = profile.k();
    let mut report = CheckReport::new(format!(
        "folded structure of omega_eps, {} eps={eps}",
        model.label()
    ));

    let h = 1e-3 * eps;
    let mut max_top_at_z = 0.0f64;
    let mut min_slope = f64::INFINITY;
    let mut min_leaf = f64::INFINITY;
    for z in crate::model::z_grid(n, theta_points) {
        let top_at = |x: f64| -> Result<f64> {
            let p = ChartPoint::new(x, z.thetas())?;
            desingularize(model, profile, eps, &p)?.wedge_power(n)?.top_coefficient()
        };
        max_top_at_z = max_top_at_z.max(top_at(0.0)?.abs());
        let slope = (top_at(h)? - top_at(-h)?) / (2.0 * h);
        min_slope = min_slope.min(slope.abs());

        let restricted = desingularize(model, profile, eps, &z)?.restrict_to_z();
        min_leaf = min_leaf.min(restricted.wedge_power(n - 1)?.norm_max());
    }
    let transversality_floor = 1e-6 * eps.powi(-(2 * k as i32 + 2));
    report.check_le("max |top(omega_eps^n)| at x = 0", max_top_at_z, 1e-10);
    report.check_gt("min |d/dx top(omega_eps^n)| at x = 0", min_slope, transversality_floor);
    report.check_gt("min |(i* omega_eps)^{n-1}| on Z", min_leaf, 0.0);
    Ok(report)
}

/// A zero of top(ω_ε^n) along an x-scan line.
#[derive(Debug, Clone, Copy)]
pub struct FoldRoot {
    pub x: f64,
    /// |d/dx top(ω_ε^n)| at the root.
    pub slope: f64,
    /// slope exceeds the ε-relative transversality floor.
    pub transversal: bool,
}

/// Sign changes of top(ω_ε^n) along x at fixed θ, refined by bisection to
/// 1e-12 and classified by transversality of the derivative.
pub fn fold_locus(
    model: &LaurentModel,
    profile: &Profile,
    eps: f64,
    x_scan: &[f64],
    thetas: &[f64],
) -> Result<Vec<FoldRoot>> {
    ensure_parity(model, profile)?;
    if profile.parity() != ProfileParity::Odd {
        return Err(Error::ParityMismatch { m: model.m() });
    }
    ensure_eps(eps)?;
    let n = model.n();
    let k = profile.k();
    let top_at = |x: f64| -> Result<f64> {
        let p = ChartPoint::new(x, thetas)?;
        desingularize(model, profile, eps, &p)?.wedge_power(n)?.top_coefficient()
    };
    let floor = 1e-6 * eps.powi(-(2 * k as i32 + 2));
    let mut roots: Vec<FoldRoot> = Vec::new();
    let mut push_root = |x: f64, top_at: &dyn Fn(f64) -> Result<f64>| -> Result<()> {
        if roots.iter().any(|r| (r.x - x).abs() < 1e-9) {
            return Ok(());
        }
        let h = 1e-7 * eps.max(x.abs());
        let slope = (top_at(x + h)? - top_at(x - h)?) / (2.0 * h);
        roots.push(FoldRoot { x, slope: slope.abs(), transversal: slope.abs() > floor });
        Ok(())
    };

    for w in x_scan.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (top_at(a)?, top_at(b)?);
        if fa == 0.0 {
            push_root(a, &top_at)?;
        }
        if fb == 0.0 {
            push_root(b, &top_at)?;
            continue;
        }
        if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                let fm = top_at(mid)?;
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            push_root(0.5 * (lo + hi), &top_at)?;
        }
    }
    roots.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
    Ok(roots)
}
