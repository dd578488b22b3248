//! Orthonormal Hermite functions on the line, their quadrature, and projection.
//!
//! e_k(x) = (2^k k! √π)^{-1/2} H_k(x) e^{-x²/2} with H_k the physicists'
//! polynomials; these are the eigenfunctions of A = -d²/dx² + (1 + x²), with
//! A e_k = (2k+2) e_k. Chaos coefficients use probabilists' He_n (so that
//! ⟨He_m, He_n⟩ under N(0,1) is n!·δ_{mn}), evaluated by `hermite_poly_eval`;
//! the normalized-function recurrence below is the single conversion point
//! between the two families.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::func::FunctionOnR;
use crate::tol::Tolerances;

/// How the Gauss-Hermite nodes are placed on the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RangePolicy {
    /// Nodes of the weight e^{-x²} as computed; integrands must decay at
    /// least like a polynomial times e^{-x²} to be resolved.
    Natural,
    /// Nodes and weights scaled by λ > 0: resolves integrands wider than the
    /// natural range at the cost of more nodes for the same accuracy.
    Stretched(f64),
}

/// Node count plus range policy for the basis quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub nodes: usize,
    pub range: RangePolicy,
}

impl QuadratureSpec {
    /// Default rule for a basis of size K: 4K nodes (at least 16), natural range.
    pub fn for_basis(k: u32) -> Self {
        QuadratureSpec {
            nodes: (4 * k as usize).max(16),
            range: RangePolicy::Natural,
        }
    }
}

/// Largest node count before e^{x²} at the extreme nodes leaves f64 range.
const MAX_NODES: usize = 180;

/// Gauss-Hermite nodes and weights for ∫ f(x) e^{-x²} dx, via Golub-Welsch:
/// the Jacobi matrix for the (physicists') Hermite recurrence is symmetric
/// tridiagonal with zero diagonal and off-diagonal √(i/2); its eigenvalues
/// are the nodes and √π times the squared first eigenvector components are
/// the weights. Returned sorted by node.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for i in 0..n - 1 {
        let b = ((i as f64 + 1.0) / 2.0).sqrt();
        jacobi[(i, i + 1)] = b;
        jacobi[(i + 1, i)] = b;
    }
    let eigen = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = eigen
        .eigenvalues
        .iter()
        .zip(eigen.eigenvectors.row(0).iter())
        .map(|(&x, &v)| (x, v * v * std::f64::consts::PI.sqrt()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Probabilists' Hermite polynomial He_n(x):
/// He_0 = 1, He_1 = x, He_{n+1} = x·He_n − n·He_{n-1}.
pub fn hermite_poly_eval(n: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for m in 1..n {
        (prev, cur) = (cur, x * cur - m as f64 * prev);
    }
    cur
}

/// He_0(x) .. He_{n_max}(x) in one pass.
pub fn hermite_poly_all(n_max: u32, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    out.push(x);
    for m in 1..n_max {
        let next = x * out[m as usize] - m as f64 * out[m as usize - 1];
        out.push(next);
    }
    out
}

/// e_0(x) .. e_{count-1}(x) by the normalized recurrence
/// e_{k+1} = √(2/(k+1))·x·e_k − √(k/(k+1))·e_{k-1}.
pub fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let e0 = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
    out.push(e0);
    if count == 1 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * e0);
    for k in 1..count - 1 {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// K orthonormal Hermite functions with their quadrature grid and
/// A-eigenvalues λ_k = 2k+2. Immutable after construction.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    k: u32,
    grid: Vec<f64>,
    weights: Vec<f64>,
    eigenvalues: Vec<f64>,
    /// table[j][i] = e_j(grid[i])
    table: Vec<Vec<f64>>,
}

/// Builds the basis and hard-checks orthonormality under the default Gram
/// tolerance. See `build_basis_with` for a custom tolerance set.
pub fn build_basis(k: u32, spec: &QuadratureSpec) -> Result<HermiteBasis> {
    build_basis_with(k, spec, &Tolerances::default())
}

pub fn build_basis_with(k: u32, spec: &QuadratureSpec, tol: &Tolerances) -> Result<HermiteBasis> {
    if k < 1 {
        return Err(Error::Precondition("basis needs K >= 1".into()));
    }
    // 2·nodes − 1 ≥ 2K+2 keeps the Gram integrands exact.
    if spec.nodes < k as usize + 2 {
        return Err(Error::Precondition(format!(
            "quadrature needs at least K+2 = {} nodes, got {}",
            k + 2,
            spec.nodes
        )));
    }
    if spec.nodes > MAX_NODES {
        return Err(Error::Precondition(format!(
            "node count {} exceeds {MAX_NODES} (e^{{x²}} weight correction would overflow)",
            spec.nodes
        )));
    }
    let scale = match spec.range {
        RangePolicy::Natural => 1.0,
        RangePolicy::Stretched(s) if s > 0.0 => s,
        RangePolicy::Stretched(s) => {
            return Err(Error::Precondition(format!(
                "stretch factor must be positive, got {s}"
            )));
        }
    };

    let (raw_nodes, raw_weights) = gauss_hermite(spec.nodes);
    // Modified weights w̃ = scale·w·e^{x²} turn the rule into plain ∫ f dx.
    let grid: Vec<f64> = raw_nodes.iter().map(|&x| scale * x).collect();
    let weights: Vec<f64> = raw_nodes
        .iter()
        .zip(&raw_weights)
        .map(|(&x, &w)| scale * w * (x * x).exp())
        .collect();

    let table: Vec<Vec<f64>> = {
        let mut cols: Vec<Vec<f64>> = grid
            .iter()
            .map(|&x| hermite_functions(k as usize, x))
            .collect();
        (0..k as usize)
            .map(|j| cols.iter_mut().map(|c| std::mem::take(&mut c[j])).collect())
            .collect()
    };

    let basis = HermiteBasis {
        k,
        grid,
        weights,
        eigenvalues: (0..k).map(|j| (2 * j + 2) as f64).collect(),
        table,
    };
    let dev = basis.gram_deviation();
    // NaN deviation must fail the gate, not slip past it.
    if dev.is_nan() || dev > tol.gram {
        return Err(Error::GramDeviation {
            observed: dev,
            tol: tol.gram,
        });
    }
    Ok(basis)
}

impl HermiteBasis {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// λ_k = 2k+2.
    pub fn eigenvalue(&self, k: u32) -> f64 {
        self.eigenvalues[k as usize]
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Values of e_j on the quadrature grid.
    pub fn function_values(&self, j: u32) -> &[f64] {
        &self.table[j as usize]
    }

    /// e_0(x) .. e_{K-1}(x) at an arbitrary point.
    pub fn eval_functions(&self, x: f64) -> Vec<f64> {
        hermite_functions(self.k as usize, x)
    }

    /// ∫ f dx by the modified-weight rule.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Quadrature inner product ∫ f·g dx.
    pub fn inner_product(&self, f: &FunctionOnR, g: &FunctionOnR) -> f64 {
        self.integrate(|x| f.eval(x) * g.eval(x))
    }

    /// Max |G_{jk} − δ_{jk}| over the K×K Gram matrix.
    pub fn gram_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for j in 0..self.k as usize {
            for l in j..self.k as usize {
                let mut s = 0.0;
                for i in 0..self.grid.len() {
                    s += self.weights[i] * self.table[j][i] * self.table[l][i];
                }
                let target = if j == l { 1.0 } else { 0.0 };
                dev = dev.max((s - target).abs());
            }
        }
        dev
    }
}

/// Coefficients of a function against the basis plus the leftover quadrature
/// energy. The residual is reported, never hidden; a tiny negative value is
/// float noise from the subtraction.
#[derive(Debug, Clone)]
pub struct Projection {
    pub coeffs: Vec<f64>,
    pub residual: f64,
}

impl Projection {
    /// Wraps already-known coefficients (residual zero), for in-span inputs.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        Projection {
            coeffs,
            residual: 0.0,
        }
    }
}

/// c_j = ∫ f·e_j dx on the quadrature grid, with residual ∫f² − Σ c_j².
pub fn project(f: &FunctionOnR, basis: &HermiteBasis) -> Projection {
    let samples: Vec<f64> = basis.grid.iter().map(|&x| f.eval(x)).collect();
    let mut coeffs = Vec::with_capacity(basis.k as usize);
    for j in 0..basis.k as usize {
        let mut c = 0.0;
        for ((w, s), e) in basis.weights.iter().zip(&samples).zip(&basis.table[j]) {
            c += w * s * e;
        }
        coeffs.push(c);
    }
    let energy: f64 = basis
        .weights
        .iter()
        .zip(&samples)
        .map(|(&w, &s)| w * s * s)
        .sum();
    let captured: f64 = coeffs.iter().map(|c| c * c).sum();
    Projection {
        coeffs,
        residual: energy - captured,
    }
}
