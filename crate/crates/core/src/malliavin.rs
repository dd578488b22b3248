//! Malliavin lowering operators and Cameron-Martin translation on truncated
//! chaos vectors.
//!
//! In concrete coordinates H_α = Π_k He_{α_k}(W(e_k)) the derivative at a
//! point is D_t H_α = Σ_k α_k·e_k(t)·H_{α-ε_k}, the directional derivative
//! along f lowers with weights c_k = (f, e_k), and translation by f acts per
//! coordinate through the Appell shift He_n(x+c) = Σ_j C(n,j)·c^{n-j}·He_j(x).

use crate::basis::{project, HermiteBasis};
use crate::chaos::{abs_gap, pointwise_product, wick_product, ChaosVector};
use crate::error::Result;
use crate::func::FunctionOnR;
use crate::index::{binomial, MultiIndex};
use crate::report::fit_loglog_slope;

/// How to evaluate the directional derivative.
///
/// Both routes land on the same coefficients; `ProductDifference` exists as a
/// cross-check and needs one level of degree headroom for its intermediates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Direct annihilation: Σ_k c_k·α_k·Φ_α·H_{α-ε_k}.
    Lowering,
    /// Φ·W(f) − Φ⋄W(f).
    ProductDifference,
}

/// D_tΦ for a fixed time point t.
pub fn malliavin_at(phi: &ChaosVector, basis: &HermiteBasis, t: f64) -> ChaosVector {
    let evals = basis.eval_functions(t);
    lower_with(phi, &evals)
}

/// Directional derivative with explicit direction coefficients.
pub fn directional_lower(phi: &ChaosVector, c: &[f64]) -> ChaosVector {
    lower_with(phi, c)
}

fn lower_with(phi: &ChaosVector, c: &[f64]) -> ChaosVector {
    let mut acc: std::collections::BTreeMap<MultiIndex, f64> = Default::default();
    for (alpha, v) in phi.terms() {
        for (k, e) in alpha.iter() {
            let w = c.get(k as usize).copied().unwrap_or(0.0);
            if w == 0.0 {
                continue;
            }
            let lowered = alpha.lower(k).expect("exponent is positive");
            // grouping matches the pointwise-product path bit for bit
            *acc.entry(lowered).or_insert(0.0) += (v * w) * e as f64;
        }
    }
    ChaosVector::from_terms(acc, phi.policy().clone()).expect("lowering shrinks degrees")
}

/// 𝒟_fΦ for a direction f, projected onto the basis span first.
pub fn directional_derivative(
    phi: &ChaosVector,
    f: &FunctionOnR,
    basis: &HermiteBasis,
    mode: DerivativeMode,
) -> Result<ChaosVector> {
    let c = project(f, basis).coeffs;
    match mode {
        DerivativeMode::Lowering => Ok(directional_lower(phi, &c)),
        DerivativeMode::ProductDifference => {
            phi.policy().require_headroom(1)?;
            let w = ChaosVector::first_order(&c, phi.policy().clone())?;
            pointwise_product(phi, &w)?.sub(&wick_product(phi, &w)?)
        }
    }
}

/// Translation T_f with explicit shift coefficients: Φ(· + Σ c_k e_k).
///
/// Degrees never grow, so every policy admits the result.
pub fn translate_coeffs(phi: &ChaosVector, c: &[f64]) -> ChaosVector {
    let mut acc: std::collections::BTreeMap<MultiIndex, f64> = Default::default();
    for (alpha, v) in phi.terms() {
        let support: Vec<(u32, u32)> = alpha.iter().collect();
        // per-coordinate Appell options (new exponent j, weight C(n,j)·c^{n-j})
        let options: Vec<Vec<(u32, f64)>> = support
            .iter()
            .map(|&(k, n)| {
                let ck = c.get(k as usize).copied().unwrap_or(0.0);
                (0..=n)
                    .map(|j| (j, binomial(n, j) * ck.powi((n - j) as i32)))
                    .filter(|&(_, w)| w != 0.0)
                    .collect()
            })
            .collect();
        let mut choice = vec![0usize; options.len()];
        'odometer: loop {
            let mut weight = v;
            let mut pairs = Vec::with_capacity(support.len());
            for (slot, &(k, _)) in support.iter().enumerate() {
                let (j, w) = options[slot][choice[slot]];
                weight *= w;
                if j > 0 {
                    pairs.push((k, j));
                }
            }
            *acc.entry(MultiIndex::from_pairs(&pairs)).or_insert(0.0) += weight;
            let mut slot = 0;
            loop {
                if slot == options.len() {
                    break 'odometer;
                }
                choice[slot] += 1;
                if choice[slot] < options[slot].len() {
                    break;
                }
                choice[slot] = 0;
                slot += 1;
            }
        }
    }
    ChaosVector::from_terms(acc, phi.policy().clone()).expect("translation keeps degrees")
}

/// T_fΦ for a shift function f, projected onto the basis span first.
pub fn translate(phi: &ChaosVector, f: &FunctionOnR, basis: &HermiteBasis) -> ChaosVector {
    translate_coeffs(phi, &project(f, basis).coeffs)
}

/// Residuals of the central difference (T_{hf}Φ − T_{-hf}Φ)/(2h) against the
/// lowering derivative, one per step size.
#[derive(Debug, Clone)]
pub struct TranslationCheck {
    /// (h, largest coefficient deviation) pairs.
    pub residuals: Vec<(f64, f64)>,
    /// Fitted order in h; None when every residual is at machine level,
    /// which is the exact outcome for degrees ≤ 2.
    pub fitted_order: Option<f64>,
}

pub fn translation_derivative_check(
    phi: &ChaosVector,
    f: &FunctionOnR,
    basis: &HermiteBasis,
    steps: &[f64],
) -> TranslationCheck {
    let c = project(f, basis).coeffs;
    let reference = directional_lower(phi, &c);
    let mut residuals = Vec::with_capacity(steps.len());
    for &h in steps {
        let plus: Vec<f64> = c.iter().map(|v| v * h).collect();
        let minus: Vec<f64> = c.iter().map(|v| -v * h).collect();
        let fd = translate_coeffs(phi, &plus)
            .sub(&translate_coeffs(phi, &minus))
            .expect("same policy")
            .scale(1.0 / (2.0 * h));
        residuals.push((h, abs_gap(&fd, &reference)));
    }
    let fitted_order = if residuals.iter().all(|&(_, r)| r < 1e-14) {
        None
    } else {
        let hs: Vec<f64> = residuals.iter().map(|p| p.0).collect();
        let errs: Vec<f64> = residuals.iter().map(|p| p.1).collect();
        fit_loglog_slope(&hs, &errs)
    };
    TranslationCheck {
        residuals,
        fitted_order,
    }
}
