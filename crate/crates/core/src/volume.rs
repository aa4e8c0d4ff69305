//! Singular volume asymptotics in the even case m = 2k.
//!
//! On the chart, ω_ε^n = n df_ε ∧ A ∧ B^{n-1} + n dx∧γ ∧ B^{n-1} with
//! A = Σ x^i α_i and B = Σ x^j β_j (B^n = 0: it is a pure Z-form of degree
//! 2n on a (2n-1)-torus). Torus integration is exact for trig-polynomial
//! data, so the volume reduces to one-dimensional x-integrals of
//! f_ε'(x) x^p against the series coefficients
//!
//!   C(x) = Σ_p c_p x^p = ∫_Z n A ∧ B^{n-1},   G(x) = ∫_Z n γ ∧ B^{n-1}.
//!
//! Two independent routes are kept: closed-form antiderivatives
//! (complement + inside) and adaptive quadrature over the whole chart.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forms::{Form, PolyTrig, ScalarField};
use crate::model::LaurentModel;
use crate::profile::{Profile, ProfileParity};

fn as_poly_trig(f: &ScalarField) -> Result<PolyTrig> {
    match f {
        ScalarField::Constant(c) => Ok(PolyTrig::constant(*c)),
        ScalarField::PolyTrig(p) => Ok(p.clone()),
        ScalarField::Opaque(_) => Err(Error::Unsupported(
            "exact torus integration needs trig-polynomial coefficients".into(),
        )),
    }
}

// Torus integral (per power of x) of the top-Z coefficient of `form`.
fn top_z_series(form: &Form, n: usize) -> Result<Vec<f64>> {
    let n_angles = 2 * n - 1;
    let top: Vec<usize> = (1..2 * n).collect();
    for (tuple, field) in form.coefficients() {
        if tuple == top.as_slice() {
            return Ok(as_poly_trig(field)?.integrate_torus(n_angles));
        }
    }
    Ok(Vec::new())
}

/// Coefficients c_p of ∫_Z n A ∧ B^{n-1} = Σ_p c_p x^p.
pub fn z_top_series(model: &LaurentModel) -> Result<Vec<f64>> {
    let dim = model.dim();
    let n = model.n();
    let mut a = Form::zero(dim, 1);
    for (i, alpha) in model.alphas().iter().enumerate() {
        a = a.add(&alpha.scaled_field(&ScalarField::PolyTrig(PolyTrig::x_power(i, 1.0))));
    }
    let mut b = Form::zero(dim, 2);
    for (j, beta) in model.betas().iter().enumerate() {
        b = b.add(&beta.scaled_field(&ScalarField::PolyTrig(PolyTrig::x_power(j, 1.0))));
    }
    let w = a.wedge(&b.wedge_power(n - 1)?)?.scaled(n as f64);
    top_z_series(&w, n)
}

/// Coefficients g_p of ∫_Z n γ ∧ B^{n-1} = Σ_p g_p x^p (the dx∧γ part).
pub fn gamma_series(model: &LaurentModel) -> Result<Vec<f64>> {
    let dim = model.dim();
    let n = model.n();
    let mut b = Form::zero(dim, 2);
    for (j, beta) in model.betas().iter().enumerate() {
        b = b.add(&beta.scaled_field(&ScalarField::PolyTrig(PolyTrig::x_power(j, 1.0))));
    }
    let w = model.gamma().wedge(&b.wedge_power(n - 1)?)?.scaled(n as f64);
    top_z_series(&w, n)
}

/// ∫_Z α_0 ∧ β_0^{n-1}, the cosymplectic volume of Z.
pub fn z_leading(model: &LaurentModel) -> Result<f64> {
    let (a0, b0) = model.cosymplectic_pair();
    let w = a0.wedge(&b0.wedge_power(model.n() - 1)?)?;
    Ok(top_z_series(&w, model.n())?.first().copied().unwrap_or(0.0))
}

fn ensure_even(model: &LaurentModel, profile: &Profile) -> Result<usize> {
    if profile.parity() != ProfileParity::Even || profile.m() != model.m() {
        return Err(Error::ParityMismatch { m: model.m() });
    }
    Ok(profile.k())
}

fn ensure_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidEps(eps));
    }
    Ok(())
}

/// I_p = ∫_{-1}^{1} f'(y) y^p dy for p = 0..p_max, exact from the interior
/// polynomial: zero for odd p by parity.
pub fn moment_integrals(profile: &Profile, p_max: usize) -> Result<Vec<f64>> {
    if profile.parity() != ProfileParity::Even {
        return Err(Error::ParityMismatch { m: profile.m() });
    }
    // interior holds f = Σ c_j t^j (odd j only); f' = Σ j c_j t^{j-1}
    let coeffs = profile.interior_coeffs();
    let mut out = Vec::with_capacity(p_max + 1);
    for p in 0..=p_max {
        if p % 2 == 1 {
            out.push(0.0);
            continue;
        }
        let mut acc = 0.0;
        for (j, &c) in coeffs.iter().enumerate() {
            if j == 0 {
                continue;
            }
            // ∫_{-1}^1 t^{j-1+p}: nonzero only for even exponent
            if (j - 1 + p) % 2 == 0 {
                acc += j as f64 * c * 2.0 / (j + p) as f64;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// ∫∫ over {ε ≤ |x| ≤ 1} × Z of top(ω^n): exact antiderivatives against
/// the raw form dx/x^{2k} ∧ A + β.
pub fn volume_complement(model: &LaurentModel, profile: &Profile, eps: f64) -> Result<f64> {
    let k = ensure_even(model, profile)?;
    ensure_eps(eps)?;
    let c = z_top_series(model)?;
    let g = gamma_series(model)?;
    let mut total = 0.0;
    for (p, &cp) in c.iter().enumerate() {
        let e = p as i32 - 2 * k as i32;
        // odd integrand cancels over the symmetric region
        if e.rem_euclid(2) == 1 || cp == 0.0 {
            continue;
        }
        total += cp * 2.0 * (1.0 - eps.powi(e + 1)) / (e + 1) as f64;
    }
    for (p, &gp) in g.iter().enumerate() {
        if p % 2 == 1 || gp == 0.0 {
            continue;
        }
        total += gp * 2.0 * (1.0 - eps.powi(p as i32 + 1)) / (p + 1) as f64;
    }
    Ok(total)
}

/// ∫∫ over {|x| ≤ ε} × Z of top(ω_ε^n): exact via the substitution x = εy,
/// ∫ f_ε'(x) x^p dx = ε^{p-2k+1} I_p.
pub fn volume_inside(model: &LaurentModel, profile: &Profile, eps: f64) -> Result<f64> {
    let k = ensure_even(model, profile)?;
    ensure_eps(eps)?;
    let c = z_top_series(model)?;
    let g = gamma_series(model)?;
    let moments = moment_integrals(profile, c.len().saturating_sub(1))?;
    let mut total = 0.0;
    for (p, &cp) in c.iter().enumerate() {
        total += cp * moments[p] * eps.powi(p as i32 - 2 * k as i32 + 1);
    }
    for (p, &gp) in g.iter().enumerate() {
        if p % 2 == 1 {
            continue;
        }
        total += gp * 2.0 * eps.powi(p as i32 + 1) / (p + 1) as f64;
    }
    Ok(total)
}

/// Complement + inside.
pub fn volume_total(model: &LaurentModel, profile: &Profile, eps: f64) -> Result<f64> {
    Ok(volume_complement(model, profile, eps)? + volume_inside(model, profile, eps)?)
}

/// ∫∫ over the whole chart of top(ω_ε^n), by adaptive quadrature of
/// f_ε'(x) C(x) + G(x) over [-1,1] split at the profile junctions. An
/// independent route used to cross-check the closed-form volumes.
pub fn volume_desingularized(model: &LaurentModel, profile: &Profile, eps: f64) -> Result<f64> {
    ensure_even(model, profile)?;
    ensure_eps(eps)?;
    let c = z_top_series(model)?;
    let g = gamma_series(model)?;
    let poly = |coeffs: &[f64], x: f64| coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a);
    let integrand = |x: f64| -> f64 {
        profile.eval_scaled(eps, x, 1).expect("eps validated") * poly(&c, x) + poly(&g, x)
    };
    let mut knots = vec![-1.0];
    let extent = profile.bridge_extent() as i32;
    for j in (1..=extent).rev() {
        knots.push(-eps * j as f64);
    }
    for j in 1..=extent {
        knots.push(eps * j as f64);
    }
    knots.push(1.0);
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += adaptive_simpson(&integrand, w[0], w[1], 1e-11);
    }
    Ok(total)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol * (1.0 + (left + right).abs()) {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 40)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Fitted,
    Predicted,
}

/// Laurent expansion V(ε) = d_0 + Σ_{i=1..k} d_i ε^{-(2i-1)} + O(ε) of the
/// total volume: `d[0]` is the constant term, `d[i]` the coefficient of
/// ε^{-(2i-1)}. Only odd powers of 1/ε occur, by the parity of the moment
/// integrals. `residual` is the max relative deviation over the fitted
/// samples (0 for predicted expansions).
#[derive(Debug, Clone)]
pub struct VolumeExpansion {
    pub k: usize,
    pub d: Vec<f64>,
    pub residual: f64,
    pub provenance: Provenance,
}

impl VolumeExpansion {
    pub fn eval(&self, eps: f64) -> f64 {
        self.d[0]
            + self.d[1..]
                .iter()
                .enumerate()
                .map(|(i, &d)| d * eps.powi(-(2 * i as i32 + 1)))
                .sum::<f64>()
    }

    /// Leading coefficient d_k (of ε^{-(2k-1)}).
    pub fn leading(&self) -> f64 {
        self.d[self.k]
    }
}

/// Closed-form expansion coefficients from the exact antiderivatives,
/// dropping the O(ε) remainder. The γ-part contributes only to the
/// constant (its ε-dependence cancels between complement and inside).
pub fn predicted_expansion(model: &LaurentModel, profile: &Profile) -> Result<VolumeExpansion> {
    let k = ensure_even(model, profile)?;
    let c = z_top_series(model)?;
    let g = gamma_series(model)?;
    let moments = moment_integrals(profile, c.len().saturating_sub(1))?;
    // by_power[w]: coefficient of ε^{-w}; only odd w occur by parity
    let mut by_power = vec![0.0; 2 * k];
    for (p, &cp) in c.iter().enumerate() {
        let e = p as i32 - 2 * k as i32;
        if e.rem_euclid(2) == 1 || cp == 0.0 {
            continue;
        }
        // complement: 2cp (1 - ε^{e+1})/(e+1)
        by_power[0] += 2.0 * cp / (e + 1) as f64;
        if e + 1 < 0 {
            by_power[(-(e + 1)) as usize] += -2.0 * cp / (e + 1) as f64;
        }
        // inside: cp I_p ε^{p-2k+1}
        let q = e + 1;
        if q < 0 {
            by_power[(-q) as usize] += cp * moments[p];
        } else if q == 0 {
            by_power[0] += cp * moments[p];
        }
    }
    for (p, &gp) in g.iter().enumerate() {
        if p % 2 == 0 {
            by_power[0] += 2.0 * gp / (p + 1) as f64;
        }
    }
    let mut d = vec![by_power[0]];
    for i in 1..=k {
        d.push(by_power[2 * i - 1]);
    }
    Ok(VolumeExpansion { k, d, residual: 0.0, provenance: Provenance::Predicted })
}

/// The two candidate closed forms of the leading coefficient
/// d_{2k-1} / ∫_Z α_0∧β_0^{n-1}: the published constant 2(2 + 1/(2k-1))
/// and the value 4 implied by the exact antiderivatives
/// (2/(2k-1) from the complement plus I_0 = 4 - 2/(2k-1) from inside).
#[derive(Debug, Clone, Copy)]
pub struct LeadingConstants {
    pub z_integral: f64,
    pub published: f64,
    pub derived: f64,
}

pub fn leading_constants(model: &LaurentModel, profile: &Profile) -> Result<LeadingConstants> {
    let k = ensure_even(model, profile)? as f64;
    let z = z_leading(model)?;
    Ok(LeadingConstants {
        z_integral: z,
        published: 2.0 * (2.0 + 1.0 / (2.0 * k - 1.0)) * z,
        derived: 4.0 * z,
    })
}

/// (ε, volume_desingularized) samples over an ε-ladder, ready for fitting.
pub fn volume_samples(
    model: &LaurentModel,
    profile: &Profile,
    eps_ladder: &[f64],
) -> Result<Vec<(f64, f64)>> {
    eps_ladder
        .iter()
        .map(|&eps| Ok((eps, volume_desingularized(model, profile, eps)?)))
        .collect()
}

// Weighted least squares of V against {ε^{-w} : w ∈ powers}; weight 1/|V|
// so the constant term stays identifiable under ε^{-(2k-1)} dominance.
// Returns (coefficients per power, max relative residual).
fn fit_powers(samples: &[(f64, f64)], powers: &[i32]) -> Result<(Vec<f64>, f64)> {
    if samples.len() < powers.len() + 1 {
        return Err(Error::IllConditioned(format!(
            "need at least {} (eps, volume) samples for {} basis functions",
            powers.len() + 1,
            powers.len()
        )));
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(0.0f64, f64::max);
    if hi / lo < 4.0 {
        return Err(Error::IllConditioned(format!(
            "eps range ratio {:.2} < 4 cannot separate the powers",
            hi / lo
        )));
    }
    let mut mat = DMatrix::zeros(samples.len(), powers.len());
    let mut rhs = DVector::zeros(samples.len());
    for (s, &(eps, v)) in samples.iter().enumerate() {
        let w = 1.0 / v.abs().max(1e-300);
        for (j, &p) in powers.iter().enumerate() {
            mat[(s, j)] = w * eps.powi(-p);
        }
        rhs[s] = w * v;
    }
    let svd = mat.clone().svd(true, true);
    let sol = svd.solve(&rhs, 1e-14).map_err(|e| Error::IllConditioned(e.to_string()))?;
    let residual = (&mat * &sol - &rhs).amax();
    Ok((sol.iter().copied().collect(), residual))
}

/// Least-squares fit of volume samples against {1} ∪ {ε^{-(2i-1)}}_{i=1..k}
/// with relative weighting 1/V.
pub fn fit_expansion(samples: &[(f64, f64)], k: usize) -> Result<VolumeExpansion> {
    let mut powers = vec![0i32];
    powers.extend((1..=k as i32).map(|i| 2 * i - 1));
    let (d, residual) = fit_powers(samples, &powers)?;
    Ok(VolumeExpansion { k, d, residual, provenance: Provenance::Fitted })
}

/// Fit augmented with the even powers ε^{-2}, …, ε^{-2k}; their fitted
/// coefficients should be negligible for genuine b^{2k}-data. Returns
/// coefficients indexed by power of 1/ε (0..=2k).
pub fn fit_expansion_augmented(samples: &[(f64, f64)], k: usize) -> Result<Vec<f64>> {
    let powers: Vec<i32> = (0..=2 * k as i32).collect();
    let (coeffs, _) = fit_powers(samples, &powers)?;
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{Harmonic, TrigPoly};
    use crate::profile::{build_even_profile, build_odd_profile, TailMode};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn darboux21() -> (LaurentModel, Profile) {
        (LaurentModel::darboux(2, 1), build_even_profile(1, 4).unwrap())
    }

    #[test]
    fn moment_integrals_parity_and_normalization() {
        for k in 1..=2 {
            let p = build_even_profile(k, 2 * k + 2).unwrap();
            let moments = moment_integrals(&p, 5).unwrap();
            for i in [1, 3, 5] {
                assert!(moments[i].abs() < 1e-12, "I_{i} = {}", moments[i]);
            }
            let expected = 4.0 - 2.0 / (2.0 * k as f64 - 1.0);
            assert_abs_diff_eq!(moments[0], expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn series_darboux_values() {
        let model = LaurentModel::darboux(2, 1);
        let c = z_top_series(&model).unwrap();
        assert_eq!(c.len(), 1);
        assert_abs_diff_eq!(c[0], 2.0 * PI, epsilon = 1e-12);
        assert!(gamma_series(&model).unwrap().iter().all(|&g| g == 0.0));
        assert_abs_diff_eq!(z_leading(&model).unwrap(), 2.0 * PI, epsilon = 1e-12);

        // 4-dimensional product: n A∧B picks up the full torus volume
        let m22 = LaurentModel::darboux(2, 2);
        let c = z_top_series(&m22).unwrap();
        let tau = 2.0 * PI;
        assert_abs_diff_eq!(c[0], 2.0 * tau.powi(3), epsilon = 1e-9);
    }

    #[test]
    fn trig_part_integrates_away() {
        // α_0 = (1 + cos θ_1) dθ_1: same series as the constant part
        let dim = 2;
        let alpha = Form::zero(dim, 1).with_term(
            &[1],
            ScalarField::PolyTrig(
                PolyTrig::from_trig(TrigPoly::harmonic(1, Harmonic::Cos(1), 1.0))
                    .add(&PolyTrig::constant(1.0)),
            ),
        );
        let model = LaurentModel::new(
            2,
            1,
            vec![alpha, Form::zero(dim, 1)],
            vec![],
            Form::zero(dim, 1),
            "trig-alpha",
        )
        .unwrap();
        let c = z_top_series(&model).unwrap();
        assert_abs_diff_eq!(c[0], 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn darboux_volumes_closed_form() {
        let (model, profile) = darboux21();
        let eps = 0.1;
        // V = 8π/ε - 4π exactly for this model
        assert_abs_diff_eq!(
            volume_complement(&model, &profile, eps).unwrap(),
            36.0 * PI,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(volume_inside(&model, &profile, eps).unwrap(), 40.0 * PI, epsilon = 1e-9);
        assert_abs_diff_eq!(volume_total(&model, &profile, eps).unwrap(), 76.0 * PI, epsilon = 1e-9);
        assert_abs_diff_eq!(
            volume_total(&model, &profile, 0.25).unwrap(),
            28.0 * PI,
            epsilon = 1e-10
        );
    }

    #[test]
    fn quadrature_route_agrees_with_closed_form() {
        let (model, profile) = darboux21();
        for &eps in &[0.2, 0.1, 0.05] {
            let a = volume_total(&model, &profile, eps).unwrap();
            let b = volume_desingularized(&model, &profile, eps).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-7 * a.abs());
        }
    }

    #[test]
    fn predicted_expansion_darboux() {
        let (model, profile) = darboux21();
        let exp = predicted_expansion(&model, &profile).unwrap();
        assert_eq!(exp.d.len(), 2);
        assert_eq!(exp.provenance, Provenance::Predicted);
        assert_abs_diff_eq!(exp.d[1], 8.0 * PI, epsilon = 1e-10);
        assert_abs_diff_eq!(exp.d[0], -4.0 * PI, epsilon = 1e-10);
        assert_abs_diff_eq!(exp.leading(), 8.0 * PI, epsilon = 1e-10);
        // the expansion is exact here (no dropped O(ε) terms)
        assert_abs_diff_eq!(
            exp.eval(0.1),
            volume_total(&model, &profile, 0.1).unwrap(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn leading_constant_candidates() {
        let (model, profile) = darboux21();
        let lc = leading_constants(&model, &profile).unwrap();
        assert_abs_diff_eq!(lc.derived, 8.0 * PI, epsilon = 1e-10);
        assert_abs_diff_eq!(lc.published, 12.0 * PI, epsilon = 1e-10);
    }

    #[test]
    fn fit_recovers_expansion() {
        let (model, profile) = darboux21();
        let samples =
            volume_samples(&model, &profile, &[0.2, 0.15, 0.1, 0.05, 0.025]).unwrap();
        let fit = fit_expansion(&samples, 1).unwrap();
        assert_abs_diff_eq!(fit.d[1], 8.0 * PI, epsilon = 1e-3 * 8.0 * PI);
        assert_abs_diff_eq!(fit.d[0], -4.0 * PI, epsilon = 1e-2 * 4.0 * PI);
        assert_eq!(fit.provenance, Provenance::Fitted);
        assert!(fit.residual < 1e-6, "residual {}", fit.residual);
        let aug = fit_expansion_augmented(&samples, 1).unwrap();
        assert!(aug[2].abs() < 1e-3 * aug[1].abs(), "spurious eps^-2: {aug:?}");
    }

    #[test]
    fn fit_complement_only_samples() {
        let (model, profile) = darboux21();
        let samples: Vec<(f64, f64)> = [0.2, 0.1, 0.05, 0.025]
            .iter()
            .map(|&eps| (eps, volume_complement(&model, &profile, eps).unwrap()))
            .collect();
        let fit = fit_expansion(&samples, 1).unwrap();
        assert_abs_diff_eq!(fit.d[1], 4.0 * PI, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.d[0], -4.0 * PI, epsilon = 1e-8);
    }

    #[test]
    fn fit_constant_samples() {
        let samples = vec![(0.2, 7.5), (0.1, 7.5), (0.05, 7.5), (0.025, 7.5)];
        let fit = fit_expansion(&samples, 1).unwrap();
        assert_abs_diff_eq!(fit.d[0], 7.5, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.d[1], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn fit_preconditions() {
        let samples = vec![(0.2, 1.0), (0.1, 2.0)];
        assert!(matches!(fit_expansion(&samples, 1), Err(Error::IllConditioned(_))));
        let narrow: Vec<(f64, f64)> =
            [0.2, 0.19, 0.18, 0.17, 0.16].iter().map(|&e| (e, 1.0 / e)).collect();
        assert!(matches!(fit_expansion(&narrow, 1), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn volume_scales_linearly_in_alpha() {
        let dim = 2;
        let model = LaurentModel::new(
            2,
            1,
            vec![Form::basis(dim, &[1]).scaled(3.0), Form::zero(dim, 1)],
            vec![],
            Form::zero(dim, 1),
            "3dth1",
        )
        .unwrap();
        let (base, profile) = darboux21();
        for &eps in &[0.2, 0.1] {
            assert_abs_diff_eq!(
                volume_total(&model, &profile, eps).unwrap(),
                3.0 * volume_total(&base, &profile, eps).unwrap(),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn gamma_adds_constant_volume() {
        let dim = 2;
        let (base, profile) = darboux21();
        let model = LaurentModel::new(
            2,
            1,
            vec![Form::basis(dim, &[1]), Form::zero(dim, 1)],
            vec![],
            Form::basis(dim, &[1]),
            "with-gamma",
        )
        .unwrap();
        for &eps in &[0.2, 0.1] {
            let with = volume_total(&model, &profile, eps).unwrap();
            let without = volume_total(&base, &profile, eps).unwrap();
            assert_abs_diff_eq!(with - without, 4.0 * PI, epsilon = 1e-9);
        }
    }

    #[test]
    fn odd_profile_is_rejected() {
        let model = LaurentModel::darboux(2, 1);
        let odd = build_odd_profile(1, 3, TailMode::Corrected).unwrap();
        assert!(matches!(
            volume_total(&model, &odd, 0.1),
            Err(Error::ParityMismatch { .. })
        ));
    }

    #[test]
    fn opaque_coefficients_are_unsupported() {
        let dim = 2;
        let alpha = Form::zero(dim, 1)
            .with_term(&[1], ScalarField::opaque(|p: &crate::forms::ChartPoint| p.coord(1).cos() + 2.0));
        let model = LaurentModel::new(
            2,
            1,
            vec![alpha, Form::zero(dim, 1)],
            vec![],
            Form::zero(dim, 1),
            "opaque",
        )
        .unwrap();
        assert!(matches!(z_top_series(&model), Err(Error::Unsupported(_))));
    }
}
