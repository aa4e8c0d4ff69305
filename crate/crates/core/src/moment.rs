//! Moment-map images on the tubular model.
//!
//! Case 1: the moment map factors through Z; its image is the range of the
//! leaf moment over the torus, independent of ε. Case 2: the moment map is
//! x ↦ f_ε(x) on a slab |x| ≤ λ; since f_ε is strictly increasing in the
//! even case, the image is the interval [f_ε(-λ), f_ε(λ)], whose endpoints
//! diverge like ±2ε^{-(2k-1)}.

use crate::error::{Error, Result};
use crate::forms::ScalarField;
use crate::model::LaurentModel;
use crate::profile::{Profile, ProfileParity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentCase {
    /// Leaf moment on Z; ε-independent image.
    Case1,
    /// f_ε along the defect coordinate; ε-divergent endpoints.
    Case2,
}

#[derive(Debug, Clone, Copy)]
pub struct MomentImage {
    pub case: MomentCase,
    pub eps: Option<f64>,
    pub lower: f64,
    pub upper: f64,
}

/// Range of the leaf moment over a Z-grid with `grid_pts` points per angle.
pub fn moment_image_case1(
    model: &LaurentModel,
    leaf_moment: &ScalarField,
    grid_pts: usize,
) -> Result<MomentImage> {
    if grid_pts == 0 {
        return Err(Error::Degenerate("empty moment grid".into()));
    }
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for z in model.z_grid(grid_pts) {
        let v = leaf_moment.eval(&z);
        lower = lower.min(v);
        upper = upper.max(v);
    }
    Ok(MomentImage { case: MomentCase::Case1, eps: None, lower, upper })
}

/// [f_ε(-λ), f_ε(λ)] for an even profile (f_ε strictly increasing);
/// requires 0 < ε < λ <= 1.
pub fn moment_image_case2(profile: &Profile, eps: f64, lambda: f64) -> Result<MomentImage> {
    if profile.parity() != ProfileParity::Even {
        return Err(Error::ParityMismatch { m: profile.m() });
    }
    if !(eps > 0.0 && eps < lambda && lambda <= 1.0) {
        return Err(Error::InvalidEps(eps));
    }
    let upper = profile.eval_scaled(eps, lambda, 0)?;
    let lower = profile.eval_scaled(eps, -lambda, 0)?;
    Ok(MomentImage { case: MomentCase::Case2, eps: Some(eps), lower, upper })
}
