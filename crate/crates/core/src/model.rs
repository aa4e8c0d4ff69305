//! b^m-symplectic structures on the tubular model U = Z × (-1,1) with
//! Z = T^{2n-1}, given by Laurent data
//!
//!   ω = dx/x^m ∧ (Σ_{i<m} x^i α_i) + β,
//!   β = dx ∧ γ + Σ_{j<m} x^j β_j + O(x^m),
//!
//! where the α_i are closed 1-forms on Z, the β_j closed 2-forms on Z and
//! γ a 1-form on Z. The O(x^m) remainder defaults to zero and is not
//! represented.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forms::{ChartPoint, Form, FormValue, VectorValue};
use crate::report::CheckReport;

/// Laurent data of a b^m-symplectic structure on Z × (-1,1).
#[derive(Debug, Clone)]
pub struct LaurentModel {
    m: usize,
    n: usize,
    alphas: Vec<Form>,
    betas: Vec<Form>,
    gamma: Form,
    label: String,
}

fn ensure_z_form(form: &Form, degree: usize, dim: usize, what: &str) -> Result<()> {
    if form.degree() != degree {
        return Err(Error::InvalidModel(format!(
            "{what} must be a {degree}-form, got degree {}",
            form.degree()
        )));
    }
    if form.dim() != dim {
        return Err(Error::InvalidModel(format!(
            "{what} lives on a chart of dimension {}, expected {dim}",
            form.dim()
        )));
    }
    if form.coefficients().any(|(tuple, _)| tuple.contains(&0)) {
        return Err(Error::InvalidModel(format!("{what} must not contain dx")));
    }
    Ok(())
}

impl LaurentModel {
    /// `alphas` are the m Laurent 1-form coefficients α_0..α_{m-1},
    /// `betas` the 2-forms β_0..β_{m-1} of the β-expansion and `gamma`
    /// the dx∧γ term. All must be forms on Z (no dx component) on the
    /// 2n-dimensional chart.
    pub fn new(
        m: usize,
        n: usize,
        alphas: Vec<Form>,
        betas: Vec<Form>,
        gamma: Form,
        label: impl Into<String>,
    ) -> Result<Self> {
        if m < 1 || n < 1 {
            return Err(Error::InvalidModel(format!("need m >= 1 and n >= 1, got m={m}, n={n}")));
        }
        let dim = 2 * n;
        if alphas.len() != m {
            return Err(Error::InvalidModel(format!(
                "expected m={m} Laurent coefficients alpha_i, got {}",
                alphas.len()
            )));
        }
        if betas.len() > m {
            return Err(Error::InvalidModel(format!(
                "expected at most m={m} beta_j coefficients, got {}",
                betas.len()
            )));
        }
        for (i, a) in alphas.iter().enumerate() {
            ensure_z_form(a, 1, dim, &format!("alpha_{i}"))?;
        }
        for (j, b) in betas.iter().enumerate() {
            ensure_z_form(b, 2, dim, &format!("beta_{j}"))?;
        }
        ensure_z_form(&gamma, 1, dim, "gamma")?;
        let mut betas = betas;
        while betas.len() < m {
            betas.push(Form::zero(dim, 2));
        }
        Ok(LaurentModel { m, n, alphas, betas, gamma, label: label.into() })
    }

    /// The b^m-Darboux model: α_0 = dθ_1, β_0 = dθ_2∧dθ_3 + … (n-1
    /// constant symplectic pairs), all other data zero.
    pub fn darboux(m: usize, n: usize) -> Self {
        let dim = 2 * n;
        let mut alphas = vec![Form::zero(dim, 1); m];
        alphas[0] = Form::basis(dim, &[1]);
        let mut beta0 = Form::zero(dim, 2);
        for pair in 0..n.saturating_sub(1) {
            beta0 = beta0.add(&Form::basis(dim, &[2 + 2 * pair, 3 + 2 * pair]));
        }
        let mut betas = vec![Form::zero(dim, 2); m];
        betas[0] = beta0;
        LaurentModel::new(m, n, alphas, betas, Form::zero(dim, 1), format!("darboux(m={m},n={n})"))
            .expect("darboux data is always well-formed")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn alphas(&self) -> &[Form] {
        &self.alphas
    }

    pub fn betas(&self) -> &[Form] {
        &self.betas
    }

    pub fn gamma(&self) -> &Form {
        &self.gamma
    }

    /// The cosymplectic pair (α̂_0, β_0) on Z.
    pub fn cosymplectic_pair(&self) -> (Form, Form) {
        (self.alphas[0].clone(), self.betas[0].clone())
    }

    /// Σ_i x^i α_i evaluated at p (the 1-form multiplying dx/x^m).
    pub fn alpha_sum_value(&self, p: &ChartPoint) -> FormValue {
        let mut acc = FormValue::zero(self.dim(), 1);
        let mut xp = 1.0;
        for a in &self.alphas {
            acc = acc.add(&a.evaluate(p).scaled(xp));
            xp *= p.x();
        }
        acc
    }

    /// β = dx∧γ + Σ_j x^j β_j evaluated at p.
    pub fn beta_value(&self, p: &ChartPoint) -> Result<FormValue> {
        let dx = Form::basis(self.dim(), &[0]).evaluate(p);
        let mut acc = dx.wedge(&self.gamma.evaluate(p))?;
        let mut xp = 1.0;
        for b in &self.betas {
            acc = acc.add(&b.evaluate(p).scaled(xp));
            xp *= p.x();
        }
        Ok(acc)
    }

    /// Value of the singular form ω at p (p.x ≠ 0), including the 1/x^m
    /// factor.
    pub fn raw_bm_form(&self, p: &ChartPoint) -> Result<FormValue> {
        if p.x() == 0.0 {
            return Err(Error::PoleAtZero);
        }
        let dx = Form::basis(self.dim(), &[0]).evaluate(p);
        let singular = dx
            .wedge(&self.alpha_sum_value(p))?
            .scaled(p.x().powi(-(self.m as i32)));
        Ok(singular.add(&self.beta_value(p)?))
    }

    /// The unique v tangent to Z with ι_v α̂_0 = 1 and ι_v β_0 = 0,
    /// obtained from the least-squares solution of the contraction
    /// equations; fails when the residual exceeds 1e-10.
    pub fn modular_vector_field(&self, z: &ChartPoint) -> Result<VectorValue> {
        let dim = self.dim();
        let nz = dim - 1; // unknown θ-components of v
        let alpha0 = self.alphas[0].evaluate(z);
        let beta0 = self.betas[0].evaluate(z);
        // rows: 1 equation ι_v α_0 = 1, then 2n-1 components of ι_v β_0 = 0
        let mut mat = DMatrix::zeros(dim, nz);
        let mut rhs = DVector::zeros(dim);
        for i in 1..dim {
            mat[(0, i - 1)] = alpha0.coefficient(&[i]);
        }
        rhs[0] = 1.0;
        for ell in 1..dim {
            for i in 1..dim {
                // coefficient of dθ_ell in ι_{∂θ_i} β_0
                let b = if i < ell {
                    beta0.coefficient(&[i, ell])
                } else if i > ell {
                    -beta0.coefficient(&[ell, i])
                } else {
                    0.0
                };
                mat[(ell, i - 1)] = b;
            }
        }
        let svd = mat.clone().svd(true, true);
        let sol = svd
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::Degenerate(e.to_string()))?;
        let residual = (&mat * &sol - &rhs).amax();
        if residual > 1e-10 {
            return Err(Error::Degenerate(format!(
                "contraction equations unsolvable at this point (residual {residual:.3e})"
            )));
        }
        let mut comps = vec![0.0; dim];
        comps[1..].copy_from_slice(sol.as_slice());
        Ok(VectorValue::new(comps))
    }

    /// Grid of Z-points (x = 0) with `pts` samples per angle.
    pub fn z_grid(&self, pts: usize) -> Vec<ChartPoint> {
        z_grid(self.n, pts)
    }

    /// Structural hypotheses on the Laurent data: numerical closedness of
    /// every coefficient form, nonvanishing of α_0 and of α_0 ∧ β_0^{n-1}
    /// on a Z-grid.
    pub fn validate(&self, grid_pts: usize, tol: f64) -> CheckReport {
        let mut report = CheckReport::new(format!("model {}", self.label));

        // closedness at interior sample points, h = 1e-4 central differences
        let h = 1e-4;
        let sample = closedness_sample(self.n);
        for (name, form) in self
            .alphas
            .iter()
            .enumerate()
            .map(|(i, a)| (format!("alpha_{i}"), a))
            .chain(self.betas.iter().enumerate().map(|(j, b)| (format!("beta_{j}"), b)))
        {
            let mut res = 0.0f64;
            for p in &sample {
                res = res.max(form.exterior_derivative_residual(p, h).unwrap_or(f64::INFINITY));
            }
            report.check_le(format!("closedness residual {name}"), res, tol);
        }

        // γ alone need not be closed: d(dx∧γ + Σ x^j β_j) = 0 couples dγ to
        // the x-dependent β_j (dγ = Σ j x^{j-1} β_j), so check the assembled
        // β-part instead.
        {
            let dx = Form::basis(self.dim(), &[0]);
            let mut beta_total = dx.wedge(&self.gamma).expect("degree fits");
            for (j, b) in self.betas.iter().enumerate() {
                beta_total = beta_total.add(&b.scaled_field(&crate::forms::ScalarField::PolyTrig(
                    crate::forms::PolyTrig::x_power(j, 1.0),
                )));
            }
            let mut res = 0.0f64;
            for p in &sample {
                res = res
                    .max(beta_total.exterior_derivative_residual(p, h).unwrap_or(f64::INFINITY));
            }
            report.check_le("closedness residual beta-part (dx∧gamma + sum x^j beta_j)", res, tol);
        }

        // nonvanishing of α_0 and α_0 ∧ β_0^{n-1} on the Z-grid
        let grid = self.z_grid(grid_pts);
        let mut min_alpha = f64::INFINITY;
        let mut min_top = f64::INFINITY;
        let top_tuple: Vec<usize> = (1..self.dim()).collect();
        for z in &grid {
            let a0 = self.alphas[0].evaluate(z);
            min_alpha = min_alpha.min(a0.norm_max());
            let w = a0
                .wedge(&self.betas[0].evaluate(z).wedge_power(self.n - 1).expect("degree fits"))
                .expect("degree fits");
            min_top = min_top.min(w.coefficient(&top_tuple).abs());
        }
        report.check_gt("min |alpha_0| on Z-grid", min_alpha, 1e-9);
        report.check_gt("min |alpha_0 ∧ beta_0^{n-1}| top Z-coefficient", min_top, 1e-9);
        report
    }
}

/// Grid over the torus Z (x = 0) with `pts` points per angle.
pub fn z_grid(n: usize, pts: usize) -> Vec<ChartPoint> {
    let n_angles = 2 * n - 1;
    let mut out = Vec::with_capacity(pts.pow(n_angles as u32));
    let mut idx = vec![0usize; n_angles];
    loop {
        let thetas: Vec<f64> = idx
            .iter()
            .map(|&i| i as f64 * std::f64::consts::TAU / pts as f64)
            .collect();
        out.push(ChartPoint::new(0.0, &thetas).expect("x = 0 is in the chart"));
        let mut carry = n_angles;
        for a in 0..n_angles {
            idx[a] += 1;
            if idx[a] < pts {
                carry = a;
                break;
            }
            idx[a] = 0;
        }
        if carry == n_angles {
            break;
        }
    }
    out
}

// Fixed interior sample for finite-difference closedness checks.
fn closedness_sample(n: usize) -> Vec<ChartPoint> {
    let n_angles = 2 * n - 1;
    let xs = [-0.45, 0.0, 0.37];
    let mut out = Vec::new();
    for (s, &x) in xs.iter().enumerate() {
        for t in 0..4 {
            let thetas: Vec<f64> = (0..n_angles)
                .map(|a| 0.25 + 1.49 * t as f64 + 0.71 * (a + s) as f64)
                .collect();
            out.push(ChartPoint::new(x, &thetas).expect("sample x is interior"));
        }
    }
    out
}
