//! Stochastic integrals against white noise on a time grid: the integrator
//! abstraction (a noise process plus a combine rule), Skorohod and
//! Stratonovich integrals, an Ito comparator for adapted step processes,
//! and the identity checkers connecting them.
//!
//! Every integral here is the Gelfand integral of a combined process
//! s ↦ Φ(s) ∘ noise(s), with ∘ either the Wick or the pointwise product and
//! the time grid's quadrature weights as the measure. All duality and
//! continuity properties are therefore inherited from the Gelfand engine.

use crate::basis::{project, HermiteBasis};
use crate::chaos::{pairing, pointwise_product, rel_gap, wick_product, ChaosVector};
use crate::error::{Error, Result};
use crate::func::FunctionOnR;
use crate::gelfand::{
    gelfand_integrate, ConvergenceReport, MeasureGrid, ProductIntegrand, TestFamily, WeakIntegrand,
};
use crate::grid::TimeGrid;
use crate::malliavin::directional_lower;
use crate::policy::TruncationPolicy;
use crate::report::{fit_loglog_slope, ReportRow};

/// A mollifier f together with its shifted copies f^t = f(· − t) and an
/// optional shrinking family used by stability studies.
#[derive(Debug, Clone)]
pub struct SmoothingProfile {
    mollifier: FunctionOnR,
    family: Vec<FunctionOnR>,
}

impl SmoothingProfile {
    pub fn new(mollifier: FunctionOnR) -> SmoothingProfile {
        SmoothingProfile {
            mollifier,
            family: Vec::new(),
        }
    }

    /// Attaches a shrinking family f_1, f_2, ...; widths, where known, must
    /// strictly decrease.
    pub fn with_family(
        mollifier: FunctionOnR,
        family: Vec<FunctionOnR>,
    ) -> Result<SmoothingProfile> {
        let widths: Vec<f64> = family.iter().filter_map(|f| f.width()).collect();
        for w in widths.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::Precondition(format!(
                    "shrinking family widths must decrease, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(SmoothingProfile { mollifier, family })
    }

    pub fn mollifier(&self) -> &FunctionOnR {
        &self.mollifier
    }

    pub fn family(&self) -> &[FunctionOnR] {
        &self.family
    }

    /// f^t, the mollifier moved to time t.
    pub fn shifted(&self, t: f64) -> FunctionOnR {
        self.mollifier.shift(t)
    }

    /// Checks ∫f = 1 for the mollifier and every family member.
    pub fn validate_unit_integrals(&self, basis: &HermiteBasis, tol: f64) -> Result<()> {
        for f in std::iter::once(&self.mollifier).chain(&self.family) {
            let mass = basis.integrate(|x| f.eval(x));
            if (mass - 1.0).abs() > tol {
                return Err(Error::Precondition(format!(
                    "mollifier integral {mass} deviates from 1 beyond {tol}"
                )));
            }
        }
        Ok(())
    }
}

/// A chaos vector per time-grid point, all under one policy.
#[derive(Debug, Clone)]
pub struct ChaosProcess {
    values: Vec<ChaosVector>,
}

impl ChaosProcess {
    pub fn new(values: Vec<ChaosVector>) -> Result<ChaosProcess> {
        let first = values
            .first()
            .ok_or_else(|| Error::Precondition("process needs at least one value".into()))?;
        for v in &values[1..] {
            first.policy().require_compatible(v.policy())?;
        }
        Ok(ChaosProcess { values })
    }

    pub fn from_fn(len: usize, f: impl Fn(usize) -> ChaosVector) -> Result<ChaosProcess> {
        ChaosProcess::new((0..len).map(f).collect())
    }

    pub fn constant(len: usize, value: ChaosVector) -> Result<ChaosProcess> {
        ChaosProcess::new(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> &ChaosVector {
        &self.values[i]
    }

    pub fn values(&self) -> &[ChaosVector] {
        &self.values
    }

    pub fn policy(&self) -> &TruncationPolicy {
        self.values[0].policy()
    }

    pub fn map(
        &self,
        f: impl Fn(usize, &ChaosVector) -> Result<ChaosVector>,
    ) -> Result<ChaosProcess> {
        let mut out = Vec::with_capacity(self.values.len());
        for (i, v) in self.values.iter().enumerate() {
            out.push(f(i, v)?);
        }
        ChaosProcess::new(out)
    }

    pub fn to_integrand(&self) -> WeakIntegrand {
        WeakIntegrand::new(self.values.clone()).expect("process is already validated")
    }
}

/// Which product combines integrand and noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineRule {
    Wick,
    Pointwise,
}

/// Operand order for the combine step. With the commutative Wick product
/// both orders coincide; the flag exists to assert exactly that.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperandOrder {
    IntegrandFirst,
    NoiseFirst,
}

/// An integrator: noise density per grid point plus the combine rule.
/// Construction verifies the unit-element law Ξ(1) = noise exactly.
#[derive(Debug, Clone)]
pub struct IntegratorSpec {
    noise: ChaosProcess,
    combine: CombineRule,
    order: OperandOrder,
    unit: ChaosVector,
}

impl IntegratorSpec {
    pub fn new(noise: ChaosProcess, combine: CombineRule) -> Result<IntegratorSpec> {
        let unit = ChaosVector::unit(noise.policy().clone());
        let spec = IntegratorSpec {
            noise,
            combine,
            order: OperandOrder::IntegrandFirst,
            unit,
        };
        for i in 0..spec.noise.len() {
            let combined = spec.combine_one(&spec.unit, spec.noise.value(i))?;
            if crate::chaos::abs_gap(&combined, spec.noise.value(i)) != 0.0 {
                return Err(Error::Precondition(format!(
                    "unit-element law broken at grid point {i}"
                )));
            }
        }
        Ok(spec)
    }

    pub fn with_order(mut self, order: OperandOrder) -> IntegratorSpec {
        self.order = order;
        self
    }

    pub fn noise(&self) -> &ChaosProcess {
        &self.noise
    }

    pub fn combine(&self) -> CombineRule {
        self.combine
    }

    pub fn policy(&self) -> &TruncationPolicy {
        self.noise.policy()
    }

    fn combine_one(&self, phi: &ChaosVector, noise: &ChaosVector) -> Result<ChaosVector> {
        let (a, b) = match self.order {
            OperandOrder::IntegrandFirst => (phi, noise),
            OperandOrder::NoiseFirst => (noise, phi),
        };
        match self.combine {
            CombineRule::Wick => wick_product(a, b),
            CombineRule::Pointwise => pointwise_product(a, b),
        }
    }

    /// Ξ(Φ): the combined process as a weak integrand.
    pub fn transformed(&self, phi: &ChaosProcess) -> Result<WeakIntegrand> {
        if phi.len() != self.noise.len() {
            return Err(Error::Precondition(format!(
                "integrand has {} values but noise has {}",
                phi.len(),
                self.noise.len()
            )));
        }
        let mut out = Vec::with_capacity(phi.len());
        for i in 0..phi.len() {
            out.push(self.combine_one(phi.value(i), self.noise.value(i))?);
        }
        WeakIntegrand::new(out)
    }

    /// Direction coefficients of the noise at point i; requires the noise to
    /// be first-order (which raw and smoothed white noise are).
    pub fn noise_coeffs(&self, i: usize) -> Result<Vec<f64>> {
        first_order_coeffs(self.noise.value(i))
    }
}

fn first_order_coeffs(v: &ChaosVector) -> Result<Vec<f64>> {
    let k = v.policy().k as usize;
    let mut coeffs = vec![0.0; k];
    for (idx, c) in v.terms() {
        if idx.degree() != 1 {
            return Err(Error::Precondition(
                "noise must be first-order for Malliavin trace terms".into(),
            ));
        }
        let (coord, _) = idx.iter().next().expect("degree-1 index has one entry");
        coeffs[coord as usize] = c;
    }
    Ok(coeffs)
}

// --- noise constructors --------------------------------------------------------

/// Raw white noise at time t: Σ_k e_k(t)·H_{ε_k}, the projection of the
/// point evaluation. The out-of-span part of δ_t is inherent truncation
/// error; identities involving raw noise carry K-dependent tolerances.
pub fn white_noise(t: f64, basis: &HermiteBasis, policy: &TruncationPolicy) -> Result<ChaosVector> {
    if basis.k() != policy.k {
        return Err(Error::Precondition(format!(
            "basis has K = {} but policy has K = {}",
            basis.k(),
            policy.k
        )));
    }
    ChaosVector::first_order(&basis.eval_functions(t), policy.clone())
}

/// Smoothed white noise W̃(t) = Σ_k (f^t, e_k)·H_{ε_k}; returns the vector
/// and the projection residual of f^t.
pub fn smoothed_white_noise(
    t: f64,
    prof: &SmoothingProfile,
    basis: &HermiteBasis,
    policy: &TruncationPolicy,
) -> Result<(ChaosVector, f64)> {
    let proj = project(&prof.shifted(t), basis);
    let v = ChaosVector::first_order(&proj.coeffs, policy.clone())?;
    Ok((v, proj.residual))
}

pub fn raw_noise_process(
    grid: &TimeGrid,
    basis: &HermiteBasis,
    policy: &TruncationPolicy,
) -> Result<ChaosProcess> {
    ChaosProcess::new(
        grid.points()
            .iter()
            .map(|&t| white_noise(t, basis, policy))
            .collect::<Result<_>>()?,
    )
}

/// Smoothed noise along the grid, with per-point projection residuals.
pub fn smoothed_noise_process(
    prof: &SmoothingProfile,
    grid: &TimeGrid,
    basis: &HermiteBasis,
    policy: &TruncationPolicy,
) -> Result<(ChaosProcess, Vec<f64>)> {
    let mut values = Vec::with_capacity(grid.points().len());
    let mut residuals = Vec::with_capacity(grid.points().len());
    for &t in grid.points() {
        let (v, r) = smoothed_white_noise(t, prof, basis, policy)?;
        values.push(v);
        residuals.push(r);
    }
    Ok((ChaosProcess::new(values)?, residuals))
}

// --- the integrals ---------------------------------------------------------------

/// ∫_E Φ(s) δB(s): the Gelfand integral of Φ⋄noise with the grid weights.
pub fn skorohod_integral(
    phi: &ChaosProcess,
    spec: &IntegratorSpec,
    grid: &TimeGrid,
    event: &[usize],
) -> Result<ChaosVector> {
    if spec.combine() != CombineRule::Wick {
        return Err(Error::Precondition(
            "Skorohod integration needs a Wick integrator".into(),
        ));
    }
    integral_of_transformed(phi, spec, grid, event)
}

/// ∫_E Φ(s)·W̃(s) ds: the pointwise-rule integral.
pub fn stratonovich_integral(
    phi: &ChaosProcess,
    spec: &IntegratorSpec,
    grid: &TimeGrid,
    event: &[usize],
) -> Result<ChaosVector> {
    if spec.combine() != CombineRule::Pointwise {
        return Err(Error::Precondition(
            "Stratonovich integration needs a pointwise integrator".into(),
        ));
    }
    integral_of_transformed(phi, spec, grid, event)
}

fn integral_of_transformed(
    phi: &ChaosProcess,
    spec: &IntegratorSpec,
    grid: &TimeGrid,
    event: &[usize],
) -> Result<ChaosVector> {
    let combined = spec.transformed(phi)?;
    let mu = MeasureGrid::from_time_grid(grid);
    gelfand_integrate(&combined, event, &mu)
}

/// One step of an adapted simple process: the value plus the largest noise
/// index it was built from. Build steps only through these combinators so
/// the provenance tag stays truthful.
#[derive(Debug, Clone)]
pub struct AdaptedStep {
    value: ChaosVector,
    latest_dep: Option<usize>,
}

impl AdaptedStep {
    pub fn deterministic(value: ChaosVector) -> AdaptedStep {
        AdaptedStep {
            value,
            latest_dep: None,
        }
    }

    /// A value read off the noise at grid point i.
    pub fn from_noise(i: usize, value: ChaosVector) -> AdaptedStep {
        AdaptedStep {
            value,
            latest_dep: Some(i),
        }
    }

    pub fn value(&self) -> &ChaosVector {
        &self.value
    }

    pub fn latest_dep(&self) -> Option<usize> {
        self.latest_dep
    }

    pub fn add(&self, other: &AdaptedStep) -> Result<AdaptedStep> {
        Ok(AdaptedStep {
            value: self.value.add(&other.value)?,
            latest_dep: self.latest_dep.max(other.latest_dep),
        })
    }

    pub fn pointwise_mul(&self, other: &AdaptedStep) -> Result<AdaptedStep> {
        Ok(AdaptedStep {
            value: pointwise_product(&self.value, &other.value)?,
            latest_dep: self.latest_dep.max(other.latest_dep),
        })
    }

    pub fn scale(&self, a: f64) -> AdaptedStep {
        AdaptedStep {
            value: self.value.scale(a),
            latest_dep: self.latest_dep,
        }
    }
}

/// An adapted simple process: step i may depend on noise up to index i only.
#[derive(Debug, Clone)]
pub struct AdaptedProcess {
    steps: Vec<AdaptedStep>,
}

impl AdaptedProcess {
    pub fn new(steps: Vec<AdaptedStep>) -> Result<AdaptedProcess> {
        for (i, s) in steps.iter().enumerate() {
            if let Some(dep) = s.latest_dep {
                if dep > i {
                    return Err(Error::NotAdapted { step: i, dep });
                }
            }
        }
        let first = steps
            .first()
            .ok_or_else(|| Error::Precondition("adapted process needs at least one step".into()))?;
        for s in &steps[1..] {
            first.value.policy().require_compatible(s.value.policy())?;
        }
        Ok(AdaptedProcess { steps })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn step(&self, i: usize) -> &AdaptedStep {
        &self.steps[i]
    }
}

/// The discrete Brownian path B̃(t_i) = Σ_{j<i} Δ·W̃(t_j) as adapted steps;
/// step i depends on noise indices < i.
pub fn adapted_brownian_steps(spec: &IntegratorSpec, grid: &TimeGrid) -> Result<AdaptedProcess> {
    let n = grid.n_steps();
    let mut steps = Vec::with_capacity(n);
    let mut acc = AdaptedStep::deterministic(ChaosVector::zero(spec.policy().clone()));
    for i in 0..n {
        steps.push(acc.clone());
        let incr = AdaptedStep::from_noise(i, spec.noise.value(i).scale(grid.step()));
        acc = acc.add(&incr)?;
    }
    AdaptedProcess::new(steps)
}

/// Ito integral of an adapted step process: Σ_i X_i·(B̃(t_{i+1}) − B̃(t_i))
/// with the pointwise product; the increment over cell i is Δ·W̃(t_i).
/// This is by construction the left-endpoint sum.
pub fn ito_simple_integral(
    steps: &AdaptedProcess,
    spec: &IntegratorSpec,
    grid: &TimeGrid,
) -> Result<ChaosVector> {
    if spec.combine() != CombineRule::Pointwise {
        return Err(Error::Precondition(
            "Ito comparator uses the pointwise product".into(),
        ));
    }
    if steps.len() != grid.n_steps() {
        return Err(Error::Precondition(format!(
            "{} steps on a grid with {} cells",
            steps.len(),
            grid.n_steps()
        )));
    }
    let mut acc = ChaosVector::zero(spec.policy().clone());
    for i in 0..steps.len() {
        let increment = spec.noise.value(i).scale(grid.step());
        acc = acc.add(&pointwise_product(steps.step(i).value(), &increment)?)?;
    }
    Ok(acc)
}

// --- identity checkers -------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RelationReport {
    pub rel_gap: f64,
    pub stratonovich: ChaosVector,
    pub skorohod: ChaosVector,
    /// ∫_E 𝒟_{f^s}Φ(s) ds
    pub trace: ChaosVector,
}

/// Stratonovich = Skorohod + Malliavin trace, checked on one noise process.
pub fn relation_check(
    phi: &ChaosProcess,
    noise: &ChaosProcess,
    grid: &TimeGrid,
    event: &[usize],
) -> Result<RelationReport> {
    let wick = IntegratorSpec::new(noise.clone(), CombineRule::Wick)?;
    let pointwise = IntegratorSpec::new(noise.clone(), CombineRule::Pointwise)?;
    let strat = stratonovich_integral(phi, &pointwise, grid, event)?;
    let skor = skorohod_integral(phi, &wick, grid, event)?;
    let trace_process =
        phi.map(|i, v| Ok(directional_lower(v, &first_order_coeffs(noise.value(i))?)))?;
    let mu = MeasureGrid::from_time_grid(grid);
    let trace = gelfand_integrate(&trace_process.to_integrand(), event, &mu)?;
    let reconstructed = skor.add(&trace)?;
    Ok(RelationReport {
        rel_gap: rel_gap(&strat, &reconstructed),
        stratonovich: strat,
        skorohod: skor,
        trace,
    })
}

#[derive(Debug, Clone)]
pub struct PullOutReport {
    pub rel_gap: f64,
    pub lhs: ChaosVector,
    pub rhs: ChaosVector,
}

/// θ⋄∫_E Φ dξ = ∫_E (θ⋄Φ) dξ.
pub fn pull_out_constant(
    theta: &ChaosVector,
    phi: &ChaosProcess,
    spec: &IntegratorSpec,
    grid: &TimeGrid,
    event: &[usize],
) -> Result<PullOutReport> {
    let lhs = wick_product(theta, &skorohod_integral(phi, spec, grid, event)?)?;
    let moved = phi.map(|_, v| wick_product(theta, v))?;
    let rhs = skorohod_integral(&moved, spec, grid, event)?;
    Ok(PullOutReport {
        rel_gap: rel_gap(&lhs, &rhs),
        lhs,
        rhs,
    })
}

#[derive(Debug, Clone)]
pub struct StochasticFubiniReport {
    pub rel_gap: f64,
    pub order12: ChaosVector,
    pub order21: ChaosVector,
}

/// Iterated Skorohod integrals commute: both orders of
/// ∫∫ γ(x,y) δξ₂(y) δξ₁(x) agree. Both integrators must be Wick-type.
pub fn stochastic_fubini_check(
    gamma2: &ProductIntegrand,
    spec1: &IntegratorSpec,
    spec2: &IntegratorSpec,
    grid1: &TimeGrid,
    grid2: &TimeGrid,
    e1: &[usize],
    e2: &[usize],
) -> Result<StochasticFubiniReport> {
    if spec1.combine() != CombineRule::Wick || spec2.combine() != CombineRule::Wick {
        return Err(Error::Precondition(
            "stochastic Fubini needs Wick integrators on both axes".into(),
        ));
    }
    let rows = grid1.points().len();
    let cols = grid2.points().len();

    // inner integral in y, then x
    let inner_rows = ChaosProcess::new(
        (0..rows)
            .map(|i| {
                let row = ChaosProcess::from_fn(cols, |j| gamma2.value(i, j).clone())?;
                skorohod_integral(&row, spec2, grid2, e2)
            })
            .collect::<Result<_>>()?,
    )?;
    let order12 = skorohod_integral(&inner_rows, spec1, grid1, e1)?;

    // inner integral in x, then y
    let inner_cols = ChaosProcess::new(
        (0..cols)
            .map(|j| {
                let col = ChaosProcess::from_fn(rows, |i| gamma2.value(i, j).clone())?;
                skorohod_integral(&col, spec1, grid1, e1)
            })
            .collect::<Result<_>>()?,
    )?;
    let order21 = skorohod_integral(&inner_cols, spec2, grid2, e2)?;

    Ok(StochasticFubiniReport {
        rel_gap: rel_gap(&order12, &order21),
        order12,
        order21,
    })
}

#[derive(Debug, Clone)]
pub struct DualityRow {
    pub z_id: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct DualityReport {
    pub rows: Vec<DualityRow>,
    pub max_gap: f64,
}

/// ⟨∫_E Φ δB̃, z⟩ = ∫_E ⟨Φ(s), 𝒟_{f^s}z⟩ ds for every probe z.
pub fn duality_check(
    phi: &ChaosProcess,
    spec: &IntegratorSpec,
    grid: &TimeGrid,
    event: &[usize],
    z_family: &TestFamily,
) -> Result<DualityReport> {
    let integral = skorohod_integral(phi, spec, grid, event)?;
    let weights = grid.weights();
    let mut rows = Vec::with_capacity(z_family.len());
    let mut max_gap: f64 = 0.0;
    for (z_id, z) in z_family.iter() {
        let lhs = pairing(&integral, z);
        let mut rhs = 0.0;
        for &i in event {
            let lowered = directional_lower(z, &spec.noise_coeffs(i)?);
            rhs += weights[i] * pairing(phi.value(i), &lowered);
        }
        max_gap = max_gap.max((lhs - rhs).abs() / lhs.abs().max(1.0));
        rows.push(DualityRow {
            z_id: z_id.to_string(),
            lhs,
            rhs,
        });
    }
    Ok(DualityReport { rows, max_gap })
}

#[derive(Debug, Clone)]
pub struct IbpReport {
    pub rel_gap: f64,
    pub lhs: ChaosVector,
    pub rhs: ChaosVector,
}

/// Integration by parts: ∫_E θ·Φ δB̃ = θ·∫_E Φ δB̃ − ∫_E 𝒟_{f^s}(θ)·Φ(s) ds.
pub fn ibp_check(
    theta: &ChaosVector,
    phi: &ChaosProcess,
    spec: &IntegratorSpec,
    grid: &TimeGrid,
    event: &[usize],
) -> Result<IbpReport> {
    spec.policy().require_headroom(2)?;
    let moved = phi.map(|_, v| pointwise_product(theta, v))?;
    let lhs = skorohod_integral(&moved, spec, grid, event)?;

    let plain = skorohod_integral(phi, spec, grid, event)?;
    let correction_process = phi.map(|i, v| {
        let lowered_theta = directional_lower(theta, &spec.noise_coeffs(i)?);
        pointwise_product(&lowered_theta, v)
    })?;
    let mu = MeasureGrid::from_time_grid(grid);
    let correction = gelfand_integrate(&correction_process.to_integrand(), event, &mu)?;
    let rhs = pointwise_product(theta, &plain)?.sub(&correction)?;
    Ok(IbpReport {
        rel_gap: rel_gap(&lhs, &rhs),
        lhs,
        rhs,
    })
}

// --- stability studies ----------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// One row per (family member k, probe z); fitted_rate is the per-z
    /// log-log slope of error against mollifier width (or member number
    /// when widths are unknown).
    pub rows: Vec<ReportRow>,
    pub rates: Vec<(String, Option<f64>)>,
    /// Probes whose error failed to decrease across the family.
    pub flat_probes: Vec<String>,
}

/// Convergence of smoothed integrals to the raw-noise integral as the
/// mollifier family shrinks.
pub fn integrator_stability_check(
    prof: &SmoothingProfile,
    phi: &ChaosProcess,
    grid: &TimeGrid,
    event: &[usize],
    z_family: &TestFamily,
    basis: &HermiteBasis,
) -> Result<StabilityReport> {
    if prof.family().is_empty() {
        return Err(Error::Precondition(
            "stability study needs a mollifier family".into(),
        ));
    }
    let policy = phi.policy();
    let raw_spec = IntegratorSpec::new(raw_noise_process(grid, basis, policy)?, CombineRule::Wick)?;
    let reference = skorohod_integral(phi, &raw_spec, grid, event)?;

    let mut integrals = Vec::with_capacity(prof.family().len());
    let mut xs = Vec::with_capacity(prof.family().len());
    for (k, f) in prof.family().iter().enumerate() {
        let member = SmoothingProfile::new(f.clone());
        let (noise, _residuals) = smoothed_noise_process(&member, grid, basis, policy)?;
        let spec = IntegratorSpec::new(noise, CombineRule::Wick)?;
        integrals.push(skorohod_integral(phi, &spec, grid, event)?);
        xs.push(f.width().unwrap_or((k + 1) as f64));
    }

    let mut rows = Vec::new();
    let mut rates = Vec::new();
    let mut flat_probes = Vec::new();
    for (z_id, z) in z_family.iter() {
        let target = pairing(&reference, z);
        let errs: Vec<f64> = integrals
            .iter()
            .map(|v| (pairing(v, z) - target).abs())
            .collect();
        let rate = fit_loglog_slope(&xs, &errs);
        for (k, &e) in errs.iter().enumerate() {
            rows.push(ReportRow {
                k: (k + 1) as u32,
                z_id: z_id.to_string(),
                abs_error: e,
                fitted_rate: rate,
            });
        }
        let max_err = errs.iter().fold(0.0f64, |m, &e| m.max(e));
        let converged_or_tiny = max_err < 1e-14;
        if !converged_or_tiny && errs[errs.len() - 1] > 0.9 * errs[0] {
            flat_probes.push(z_id.to_string());
        }
        rates.push((z_id.to_string(), rate));
    }
    Ok(StabilityReport {
        rows,
        rates,
        flat_probes,
    })
}

/// Convergence in the integrand: ∫Φ_k δB̃ → ∫Φ δB̃, with pointwise
/// domination of the combined processes verified first. Delegates the
/// hypothesis bookkeeping to the dominated-convergence checker.
pub fn integrand_stability_check(
    sequence: &[ChaosProcess],
    limit: &ChaosProcess,
    spec: &IntegratorSpec,
    grid: &TimeGrid,
    z_family: &TestFamily,
    dominators: &[Vec<f64>],
) -> Result<ConvergenceReport> {
    let combined: Vec<WeakIntegrand> = sequence
        .iter()
        .map(|p| spec.transformed(p))
        .collect::<Result<_>>()?;
    let combined_limit = spec.transformed(limit)?;
    let mu = MeasureGrid::from_time_grid(grid);
    crate::gelfand::dominated_check(&combined, &combined_limit, &mu, z_family, dominators)
}

/// Direction coefficients of a degree-≤1 vector; exposed for tests and the
/// experiment harness.
pub fn noise_direction(v: &ChaosVector) -> Result<Vec<f64>> {
    first_order_coeffs(v)
}
