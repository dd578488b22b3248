//! Weak (Gelfand) integration of chaos-vector-valued maps over finite
//! measure grids, with the defining duality property, symmetric-difference
//! continuity, Fubini, Vitali and dominated-convergence checkers, and
//! commutation with linear operators.
//!
//! The integral of ψ over an event E is Λ_E = Σ_{i∈E} μ_i·ψ_i, summed
//! coefficientwise in ascending index order so results are reproducible.
//! Everything else in this module probes Λ through pairings against a
//! finite family of test vectors.

use crate::chaos::{pairing, rel_gap, ChaosVector};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::malliavin::{directional_lower, translate_coeffs};
use crate::policy::TruncationPolicy;
use crate::report::{fit_loglog_slope, ReportRow};

/// Grid size beyond which plain summation switches to compensated (Kahan)
/// accumulation.
const KAHAN_THRESHOLD: usize = 10_000;

/// A finite discrete measure: index set {0..len} with nonnegative masses.
/// Indices stand in for points of the underlying measurable space.
#[derive(Debug, Clone)]
pub struct MeasureGrid {
    masses: Vec<f64>,
}

impl MeasureGrid {
    pub fn new(masses: Vec<f64>) -> Result<MeasureGrid> {
        if masses.is_empty() {
            return Err(Error::Precondition(
                "measure grid needs at least one point".into(),
            ));
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::Precondition(
                "measure masses must be finite and ≥ 0".into(),
            ));
        }
        Ok(MeasureGrid { masses })
    }

    pub fn uniform(len: usize, total_mass: f64) -> Result<MeasureGrid> {
        if len == 0 {
            return Err(Error::Precondition(
                "measure grid needs at least one point".into(),
            ));
        }
        MeasureGrid::new(vec![total_mass / len as f64; len])
    }

    /// Masses from a time grid's quadrature weights.
    pub fn from_time_grid(grid: &TimeGrid) -> MeasureGrid {
        MeasureGrid {
            masses: grid.weights(),
        }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// μ(E) for an event given as sorted indices.
    pub fn measure(&self, event: &[usize]) -> f64 {
        event.iter().map(|&i| self.masses[i]).sum()
    }

    /// The symmetric difference EΔẼ as a sorted index list.
    pub fn symdiff(e1: &[usize], e2: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < e1.len() || j < e2.len() {
            match (e1.get(i), e2.get(j)) {
                (Some(&a), Some(&b)) if a == b => {
                    i += 1;
                    j += 1;
                }
                (Some(&a), Some(&b)) if a < b => {
                    out.push(a);
                    i += 1;
                }
                (Some(_), Some(&b)) => {
                    out.push(b);
                    j += 1;
                }
                (Some(&a), None) => {
                    out.push(a);
                    i += 1;
                }
                (None, Some(&b)) => {
                    out.push(b);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        out
    }

    /// Fréchet-Nikodym distance d_μ(E, Ẽ) = μ(EΔẼ).
    pub fn symdiff_measure(&self, e1: &[usize], e2: &[usize]) -> f64 {
        self.measure(&MeasureGrid::symdiff(e1, e2))
    }

    fn validate_event(&self, event: &[usize]) -> Result<()> {
        for w in event.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Precondition(format!(
                    "event indices must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = event.last() {
            if last >= self.masses.len() {
                return Err(Error::Precondition(format!(
                    "event index {last} outside grid of {} points",
                    self.masses.len()
                )));
            }
        }
        Ok(())
    }

    /// The full event 0..len.
    pub fn full_event(&self) -> Vec<usize> {
        (0..self.masses.len()).collect()
    }
}

/// ψ: grid index → chaos vector, all values under one truncation policy.
#[derive(Debug, Clone)]
pub struct WeakIntegrand {
    values: Vec<ChaosVector>,
}

impl WeakIntegrand {
    pub fn new(values: Vec<ChaosVector>) -> Result<WeakIntegrand> {
        let first = values
            .first()
            .ok_or_else(|| Error::Precondition("integrand needs at least one value".into()))?;
        for v in &values[1..] {
            first.policy().require_compatible(v.policy())?;
        }
        Ok(WeakIntegrand { values })
    }

    pub fn from_fn(len: usize, f: impl Fn(usize) -> ChaosVector) -> Result<WeakIntegrand> {
        WeakIntegrand::new((0..len).map(f).collect())
    }

    /// ψ ≡ value on a grid of the given size.
    pub fn constant(len: usize, value: ChaosVector) -> Result<WeakIntegrand> {
        WeakIntegrand::new(vec![value; len])
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

    /// Applies a map to every value, keeping the grid shape.
    pub fn map(&self, f: impl Fn(&ChaosVector) -> Result<ChaosVector>) -> Result<WeakIntegrand> {
        let mut out = Vec::with_capacity(self.values.len());
        for v in &self.values {
            out.push(f(v)?);
        }
        WeakIntegrand::new(out)
    }
}

/// Probe vectors for weak-star statements. Always contains the unit.
#[derive(Debug, Clone)]
pub struct TestFamily {
    entries: Vec<(String, ChaosVector)>,
}

impl TestFamily {
    /// Builds a family from labeled probes, prepending the unit vector.
    pub fn with_unit(
        policy: &TruncationPolicy,
        probes: Vec<(String, ChaosVector)>,
    ) -> Result<TestFamily> {
        let mut entries = vec![("one".to_string(), ChaosVector::unit(policy.clone()))];
        for (id, z) in probes {
            policy.require_compatible(z.policy())?;
            entries.push((id, z));
        }
        Ok(TestFamily { entries })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ChaosVector)> {
        self.entries.iter().map(|(id, z)| (id.as_str(), z))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

// --- the integral ------------------------------------------------------------

/// Λ_E = Σ_{i∈E} μ_i·ψ_i, coefficientwise, ascending in i.
///
/// The defining property pairing(Λ_E, z) = Σ_{i∈E} μ_i·pairing(ψ_i, z) then
/// holds up to float associativity. Compensated summation kicks in on grids
/// larger than 10⁴ points.
pub fn gelfand_integrate(
    psi: &WeakIntegrand,
    event: &[usize],
    mu: &MeasureGrid,
) -> Result<ChaosVector> {
    check_shapes(psi, mu)?;
    mu.validate_event(event)?;
    if event.len() > KAHAN_THRESHOLD {
        return Ok(integrate_kahan(psi, event, mu));
    }
    let mut acc = ChaosVector::zero(psi.policy().clone());
    for &i in event {
        acc = acc.add(&psi.value(i).scale(mu.mass(i)))?;
    }
    Ok(acc)
}

/// Parallel variant: fixed chunks summed independently, then reduced in
/// chunk order, so the result is independent of the thread schedule.
pub fn gelfand_integrate_par(
    psi: &WeakIntegrand,
    event: &[usize],
    mu: &MeasureGrid,
    chunk_size: usize,
) -> Result<ChaosVector> {
    use rayon::prelude::*;
    check_shapes(psi, mu)?;
    mu.validate_event(event)?;
    if chunk_size == 0 {
        return Err(Error::Precondition("chunk_size must be positive".into()));
    }
    let partials: Vec<ChaosVector> = event
        .par_chunks(chunk_size)
        .map(|chunk| {
            let mut acc = ChaosVector::zero(psi.policy().clone());
            for &i in chunk {
                acc = acc
                    .add(&psi.value(i).scale(mu.mass(i)))
                    .expect("shared policy");
            }
            acc
        })
        .collect();
    let mut acc = ChaosVector::zero(psi.policy().clone());
    for p in &partials {
        acc = acc.add(p)?;
    }
    Ok(acc)
}

fn check_shapes(psi: &WeakIntegrand, mu: &MeasureGrid) -> Result<()> {
    if psi.len() != mu.len() {
        return Err(Error::Precondition(format!(
            "integrand has {} values but grid has {} points",
            psi.len(),
            mu.len()
        )));
    }
    Ok(())
}

fn integrate_kahan(psi: &WeakIntegrand, event: &[usize], mu: &MeasureGrid) -> ChaosVector {
    use std::collections::BTreeMap;
    let mut sums: BTreeMap<crate::index::MultiIndex, (f64, f64)> = BTreeMap::new();
    for &i in event {
        let m = mu.mass(i);
        for (idx, c) in psi.value(i).terms() {
            let (sum, comp) = sums.entry(idx.clone()).or_insert((0.0, 0.0));
            let y = m * c - *comp;
            let t = *sum + y;
            *comp = (t - *sum) - y;
            *sum = t;
        }
    }
    ChaosVector::from_terms(
        sums.into_iter().map(|(i, (s, _))| (i, s)),
        psi.policy().clone(),
    )
    .expect("indices come from admitted vectors")
}

// --- symmetric-difference continuity ------------------------------------------

#[derive(Debug, Clone)]
pub struct SymdiffRow {
    pub z_id: String,
    /// |⟨Λ_E − Λ_Ẽ, z⟩|
    pub gap: f64,
    /// ∫_{EΔẼ} |⟨ψ, z⟩| dμ
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct SymdiffReport {
    /// d_μ(E, Ẽ)
    pub d_mu: f64,
    pub rows: Vec<SymdiffRow>,
}

impl SymdiffReport {
    pub fn sup_gap(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.gap))
    }

    pub fn sup_bound(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.bound))
    }
}

/// Checks |⟨Λ_E − Λ_Ẽ, z⟩| ≤ ∫_{EΔẼ} |⟨ψ, z⟩| dμ for every probe.
///
/// A violation beyond float slack means the accumulation itself is broken,
/// so it is a hard error rather than a report entry.
pub fn symdiff_bound_check(
    psi: &WeakIntegrand,
    e1: &[usize],
    e2: &[usize],
    mu: &MeasureGrid,
    z_family: &TestFamily,
) -> Result<SymdiffReport> {
    let l1 = gelfand_integrate(psi, e1, mu)?;
    let l2 = gelfand_integrate(psi, e2, mu)?;
    let diff_set = MeasureGrid::symdiff(e1, e2);
    let d_mu = mu.measure(&diff_set);
    let mut rows = Vec::with_capacity(z_family.len());
    for (z_id, z) in z_family.iter() {
        let gap = (pairing(&l1, z) - pairing(&l2, z)).abs();
        let bound: f64 = diff_set
            .iter()
            .map(|&i| mu.mass(i) * pairing(psi.value(i), z).abs())
            .sum();
        if gap > bound + 1e-12 * bound.max(1.0) {
            return Err(Error::Precondition(format!(
                "fundamental inequality violated for probe {z_id}: gap {gap:.3e} > bound {bound:.3e}"
            )));
        }
        rows.push(SymdiffRow {
            z_id: z_id.to_string(),
            gap,
            bound,
        });
    }
    Ok(SymdiffReport { d_mu, rows })
}

// --- Fubini -------------------------------------------------------------------

/// Two-parameter integrand on a product grid, row-major.
#[derive(Debug, Clone)]
pub struct ProductIntegrand {
    rows: usize,
    cols: usize,
    values: Vec<ChaosVector>,
}

impl ProductIntegrand {
    pub fn from_fn(
        rows: usize,
        cols: usize,
        f: impl Fn(usize, usize) -> ChaosVector,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        let first = values.first().ok_or_else(|| {
            Error::Precondition("product integrand needs at least one cell".into())
        })?;
        for v in &values[1..] {
            first.policy().require_compatible(v.policy())?;
        }
        Ok(ProductIntegrand { rows, cols, values })
    }

    pub fn value(&self, i: usize, j: usize) -> &ChaosVector {
        &self.values[i * self.cols + j]
    }

    pub fn policy(&self) -> &TruncationPolicy {
        self.values[0].policy()
    }
}

#[derive(Debug, Clone)]
pub struct FubiniReport {
    /// Largest relative gap among the three pairwise comparisons.
    pub max_gap: f64,
    pub order12: ChaosVector,
    pub order21: ChaosVector,
    pub product: ChaosVector,
}

/// Integrates a two-parameter ψ both iterated ways and as a single
/// product-measure sum (row-major order) and compares the three results.
pub fn fubini_check(
    psi2: &ProductIntegrand,
    mu1: &MeasureGrid,
    mu2: &MeasureGrid,
    e1: &[usize],
    e2: &[usize],
) -> Result<FubiniReport> {
    if psi2.rows != mu1.len() || psi2.cols != mu2.len() {
        return Err(Error::Precondition(format!(
            "product integrand is {}×{} but grids have {} and {} points",
            psi2.rows,
            psi2.cols,
            mu1.len(),
            mu2.len()
        )));
    }
    mu1.validate_event(e1)?;
    mu2.validate_event(e2)?;

    // inner in j, outer in i
    let inner_rows: Vec<ChaosVector> = (0..psi2.rows)
        .map(|i| {
            let row = WeakIntegrand::from_fn(psi2.cols, |j| psi2.value(i, j).clone())?;
            gelfand_integrate(&row, e2, mu2)
        })
        .collect::<Result<_>>()?;
    let order12 = gelfand_integrate(&WeakIntegrand::new(inner_rows)?, e1, mu1)?;

    // inner in i, outer in j
    let inner_cols: Vec<ChaosVector> = (0..psi2.cols)
        .map(|j| {
            let col = WeakIntegrand::from_fn(psi2.rows, |i| psi2.value(i, j).clone())?;
            gelfand_integrate(&col, e1, mu1)
        })
        .collect::<Result<_>>()?;
    let order21 = gelfand_integrate(&WeakIntegrand::new(inner_cols)?, e2, mu2)?;

    // single sum over the product grid, row-major
    let mut product = ChaosVector::zero(psi2.policy().clone());
    for &i in e1 {
        for &j in e2 {
            product = product.add(&psi2.value(i, j).scale(mu1.mass(i) * mu2.mass(j)))?;
        }
    }

    let max_gap = rel_gap(&order12, &order21)
        .max(rel_gap(&order12, &product))
        .max(rel_gap(&order21, &product));
    Ok(FubiniReport {
        max_gap,
        order12,
        order21,
        product,
    })
}

// --- Vitali and dominated convergence ------------------------------------------

/// Uniform-integrability evidence for a sequence ψ_k, checked numerically:
/// tail smallness outside `tail_set` and uniform smallness on all events of
/// measure below `delta`.
#[derive(Debug, Clone)]
pub struct VitaliCertificate {
    /// The finite-measure core G; the tail condition is checked on its
    /// complement.
    pub tail_set: Vec<usize>,
    /// Required bound on sup_k ∫_{M∖G} |⟨ψ_k, z⟩| dμ.
    pub epsilon_tail: f64,
    /// Event-measure threshold for the smallness condition.
    pub delta: f64,
    /// Required bound on sup_k ∫_E |⟨ψ_k, z⟩| dμ over events with μ(E) < delta.
    pub epsilon_small: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub hypotheses_satisfied: bool,
    /// Human-readable notes on failed or degenerate hypotheses.
    pub notes: Vec<String>,
    /// One row per (k, z); fitted_rate is the per-z decay order, repeated
    /// on each of that probe's rows. Empty when hypotheses failed.
    pub rows: Vec<ReportRow>,
    /// Per-z decay order of the pairing error in k; None at machine level.
    pub rates: Vec<(String, Option<f64>)>,
}

impl ConvergenceReport {
    fn hypotheses_failed(notes: Vec<String>) -> ConvergenceReport {
        ConvergenceReport {
            hypotheses_satisfied: false,
            notes,
            rows: Vec::new(),
            rates: Vec::new(),
        }
    }
}

/// Vitali-style convergence check for ψ_k → ψ over the full grid.
///
/// Hypotheses are verified numerically from the certificate: the tail bound
/// on the complement of G, and the small-event bound probed by a greedy
/// adversarial subset (indices sorted by contribution, added while the
/// event stays under delta). The greedy probe is not exhaustive; it is the
/// strongest single candidate, which is what a finite harness can afford.
/// On failure the conclusion is skipped and the report says why.
pub fn vitali_check(
    sequence: &[WeakIntegrand],
    limit: &WeakIntegrand,
    mu: &MeasureGrid,
    z_family: &TestFamily,
    cert: &VitaliCertificate,
) -> Result<ConvergenceReport> {
    if sequence.is_empty() {
        return Err(Error::Precondition("empty integrand sequence".into()));
    }
    for psi in sequence {
        check_shapes(psi, mu)?;
    }
    check_shapes(limit, mu)?;
    mu.validate_event(&cert.tail_set)?;

    let mut notes = Vec::new();
    let in_tail_set = {
        let mut mask = vec![false; mu.len()];
        for &i in &cert.tail_set {
            mask[i] = true;
        }
        mask
    };

    // tail condition on the complement of G
    for (z_id, z) in z_family.iter() {
        let worst = sequence
            .iter()
            .map(|psi| {
                (0..mu.len())
                    .filter(|&i| !in_tail_set[i])
                    .map(|i| mu.mass(i) * pairing(psi.value(i), z).abs())
                    .sum::<f64>()
            })
            .fold(0.0f64, f64::max);
        if worst > cert.epsilon_tail {
            notes.push(format!(
                "tail condition fails for probe {z_id}: sup_k tail mass {worst:.3e} > ε {:.3e}",
                cert.epsilon_tail
            ));
        }
    }

    // small-event condition via greedy adversarial subsets
    for (z_id, z) in z_family.iter() {
        for (k, psi) in sequence.iter().enumerate() {
            let mut contributions: Vec<(f64, usize)> = (0..mu.len())
                .map(|i| (mu.mass(i) * pairing(psi.value(i), z).abs(), i))
                .collect();
            contributions.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite contributions"));
            let mut mass = 0.0;
            let mut achieved = 0.0;
            for &(v, i) in &contributions {
                if mass + mu.mass(i) < cert.delta {
                    mass += mu.mass(i);
                    achieved += v;
                }
            }
            if achieved > cert.epsilon_small {
                notes.push(format!(
                    "small-event condition fails for probe {z_id} at k={}: mass {achieved:.3e} > ε {:.3e}",
                    k + 1,
                    cert.epsilon_small
                ));
            }
        }
    }

    if !notes.is_empty() {
        return Ok(ConvergenceReport::hypotheses_failed(notes));
    }
    conclusion_report(sequence, limit, mu, z_family, notes)
}

/// Dominated-convergence check: verifies |⟨ψ_k(x_i), z⟩| ≤ g^z(x_i)
/// pointwise on the grid, then the same pairing convergence as vitali_check.
/// `dominators[j]` is the grid function for the j-th probe of the family.
pub fn dominated_check(
    sequence: &[WeakIntegrand],
    limit: &WeakIntegrand,
    mu: &MeasureGrid,
    z_family: &TestFamily,
    dominators: &[Vec<f64>],
) -> Result<ConvergenceReport> {
    if sequence.is_empty() {
        return Err(Error::Precondition("empty integrand sequence".into()));
    }
    for psi in sequence {
        check_shapes(psi, mu)?;
    }
    check_shapes(limit, mu)?;
    if dominators.len() != z_family.len() {
        return Err(Error::Precondition(format!(
            "{} dominators for {} probes",
            dominators.len(),
            z_family.len()
        )));
    }

    let mut notes = Vec::new();
    for ((z_id, z), g) in z_family.iter().zip(dominators) {
        if g.len() != mu.len() {
            return Err(Error::Precondition(format!(
                "dominator for probe {z_id} has {} entries on a {}-point grid",
                g.len(),
                mu.len()
            )));
        }
        if g.iter().any(|v| *v < 0.0) {
            return Err(Error::Precondition(format!(
                "dominator for probe {z_id} is negative"
            )));
        }
        for (k, psi) in sequence.iter().enumerate() {
            for (i, &bound) in g.iter().enumerate() {
                let seen = pairing(psi.value(i), z).abs();
                if seen > bound + 1e-12 * bound.max(1.0) {
                    notes.push(format!(
                        "domination fails at k={}, grid point {i}, probe {z_id}: |⟨ψ_k,z⟩| = {seen:.6e} > g = {bound:.6e}",
                        k + 1
                    ));
                }
            }
        }
    }

    if !notes.is_empty() {
        return Ok(ConvergenceReport::hypotheses_failed(notes));
    }
    conclusion_report(sequence, limit, mu, z_family, notes)
}

fn conclusion_report(
    sequence: &[WeakIntegrand],
    limit: &WeakIntegrand,
    mu: &MeasureGrid,
    z_family: &TestFamily,
    notes: Vec<String>,
) -> Result<ConvergenceReport> {
    let full = mu.full_event();
    let limit_integral = gelfand_integrate(limit, &full, mu)?;
    let step_integrals: Vec<ChaosVector> = sequence
        .iter()
        .map(|psi| gelfand_integrate(psi, &full, mu))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut rates = Vec::new();
    for (z_id, z) in z_family.iter() {
        let target = pairing(&limit_integral, z);
        let errs: Vec<f64> = step_integrals
            .iter()
            .map(|v| (pairing(v, z) - target).abs())
            .collect();
        let ks: Vec<f64> = (1..=errs.len()).map(|k| k as f64).collect();
        // decay order: err ~ k^(-rate)
        let rate = fit_loglog_slope(&ks, &errs).map(|s| -s);
        for (k, &e) in errs.iter().enumerate() {
            rows.push(ReportRow {
                k: (k + 1) as u32,
                z_id: z_id.to_string(),
                abs_error: e,
                fitted_rate: rate,
            });
        }
        rates.push((z_id.to_string(), rate));
    }
    Ok(ConvergenceReport {
        hypotheses_satisfied: true,
        notes,
        rows,
        rates,
    })
}

// --- commutation with linear operators ------------------------------------------

/// The linear maps the commutation property is checked against.
#[derive(Debug, Clone)]
pub enum ChaosOp {
    Identity,
    /// Φ ↦ θ⋄Φ
    WickMultiply(ChaosVector),
    /// Φ ↦ 𝒟_cΦ with explicit direction coefficients
    Directional(Vec<f64>),
    /// Φ ↦ T_cΦ
    Translate(Vec<f64>),
}

impl ChaosOp {
    pub fn apply(&self, v: &ChaosVector) -> Result<ChaosVector> {
        match self {
            ChaosOp::Identity => Ok(v.clone()),
            ChaosOp::WickMultiply(theta) => crate::chaos::wick_product(theta, v),
            ChaosOp::Directional(c) => Ok(directional_lower(v, c)),
            ChaosOp::Translate(c) => Ok(translate_coeffs(v, c)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CommuteReport {
    pub rel_gap: f64,
    pub lhs: ChaosVector,
    pub rhs: ChaosVector,
}

/// Checks T(∫_E ψ dμ) = ∫_E T(ψ) dμ for a linear map T.
pub fn commute_operator(
    op: &ChaosOp,
    psi: &WeakIntegrand,
    event: &[usize],
    mu: &MeasureGrid,
) -> Result<CommuteReport> {
    let lhs = op.apply(&gelfand_integrate(psi, event, mu)?)?;
    let mapped = psi.map(|v| op.apply(v))?;
    let rhs = gelfand_integrate(&mapped, event, mu)?;
    Ok(CommuteReport {
        rel_gap: rel_gap(&lhs, &rhs),
        lhs,
        rhs,
    })
}
