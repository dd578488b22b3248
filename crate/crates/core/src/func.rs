//! Deterministic functions on the line: analytic descriptors or grid samples.
//!
//! Every variant carries an offset so that `shift` is exact for all of them
//! and the group law shift(shift(f,a),b) = shift(f,a+b) holds by arithmetic
//! on offsets, not by resampling.

use crate::basis::hermite_functions;

/// A deterministic function f: ℝ → ℝ.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionOnR {
    Zero,
    /// Σ_k coeffs[k] · e_k(x − offset), a finite Hermite-function combination.
    HermiteCombo {
        coeffs: Vec<f64>,
        offset: f64,
    },
    /// Unit-integral Gaussian density with the given center and width.
    GaussianBump {
        center: f64,
        sigma: f64,
    },
    /// Linear interpolation of values at strictly increasing xs (shifted by
    /// offset); zero outside the sampled range.
    Sampled {
        xs: Vec<f64>,
        values: Vec<f64>,
        offset: f64,
    },
}

impl FunctionOnR {
    pub fn combo(coeffs: Vec<f64>) -> Self {
        FunctionOnR::HermiteCombo {
            coeffs,
            offset: 0.0,
        }
    }

    pub fn bump(center: f64, sigma: f64) -> Self {
        assert!(sigma > 0.0, "bump width must be positive");
        FunctionOnR::GaussianBump { center, sigma }
    }

    /// Samples on a strictly increasing grid; lengths must match.
    pub fn sampled(xs: Vec<f64>, values: Vec<f64>) -> Result<Self, String> {
        if xs.len() != values.len() {
            return Err(format!(
                "{} sample points but {} values",
                xs.len(),
                values.len()
            ));
        }
        if xs.len() < 2 {
            return Err("need at least two sample points".into());
        }
        if !xs.windows(2).all(|p| p[0] < p[1]) {
            return Err("sample points must be strictly increasing".into());
        }
        Ok(FunctionOnR::Sampled {
            xs,
            values,
            offset: 0.0,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionOnR::Zero => 0.0,
            FunctionOnR::HermiteCombo { coeffs, offset } => {
                let e = hermite_functions(coeffs.len(), x - offset);
                coeffs.iter().zip(&e).map(|(c, v)| c * v).sum()
            }
            FunctionOnR::GaussianBump { center, sigma } => {
                let z = (x - center) / sigma;
                (-z * z / 2.0).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            FunctionOnR::Sampled { xs, values, offset } => {
                let u = x - offset;
                if u < xs[0] || u > *xs.last().unwrap() {
                    return 0.0;
                }
                let i = match xs.binary_search_by(|p| p.total_cmp(&u)) {
                    Ok(i) => return values[i],
                    Err(i) => i - 1,
                };
                let t = (u - xs[i]) / (xs[i + 1] - xs[i]);
                values[i] + t * (values[i + 1] - values[i])
            }
        }
    }

    /// The shifted function f^t(x) = f(x − t).
    pub fn shift(&self, t: f64) -> FunctionOnR {
        match self.clone() {
            FunctionOnR::Zero => FunctionOnR::Zero,
            FunctionOnR::HermiteCombo { coeffs, offset } => FunctionOnR::HermiteCombo {
                coeffs,
                offset: offset + t,
            },
            FunctionOnR::GaussianBump { center, sigma } => FunctionOnR::GaussianBump {
                center: center + t,
                sigma,
            },
            FunctionOnR::Sampled { xs, values, offset } => FunctionOnR::Sampled {
                xs,
                values,
                offset: offset + t,
            },
        }
    }

    /// Width proxy used by shrinking mollifier families (σ for bumps).
    pub fn width(&self) -> Option<f64> {
        match self {
            FunctionOnR::GaussianBump { sigma, .. } => Some(*sigma),
            _ => None,
        }
    }
}
