//! Truncated chaos expansions as sparse coefficient vectors, with the Wick
//! and pointwise products, duality pairing, Hida norms, S-transform, Wick
//! exponentials and Monte-Carlo evaluation.
//!
//! Coordinates are concrete: H_α = Π_k He_{α_k}(W(e_k)), so a vector is a
//! sparse map α → Φ_α. Under this dictionary the n-th chaos pairing weight
//! is α!, the Wick product is coefficient convolution, and the pointwise
//! product is the per-coordinate linearization
//! He_m·He_n = Σ_r r!·C(m,r)·C(n,r)·He_{m+n-2r}, tensorized.

use std::collections::BTreeMap;

use crate::basis::{hermite_poly_all, HermiteBasis, Projection};
use crate::error::{Error, Result};
use crate::func::FunctionOnR;
use crate::index::{binomial, factorial, MultiIndex};
use crate::policy::TruncationPolicy;

/// Sparse map MultiIndex → coefficient under a truncation policy.
///
/// Values are immutable once built; every operation returns a new vector.
/// Map order is graded lexicographic, which fixes all summation orders.
#[derive(Debug, Clone)]
pub struct ChaosVector {
    terms: BTreeMap<MultiIndex, f64>,
    policy: TruncationPolicy,
}

impl ChaosVector {
    pub fn zero(policy: TruncationPolicy) -> Self {
        ChaosVector {
            terms: BTreeMap::new(),
            policy,
        }
    }

    /// The unit random variable 1 (coefficient 1 at the empty index).
    pub fn unit(policy: TruncationPolicy) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(MultiIndex::empty(), 1.0);
        ChaosVector { terms, policy }
    }

    /// A single term c·H_α.
    pub fn monomial(idx: MultiIndex, c: f64, policy: TruncationPolicy) -> Result<Self> {
        if !policy.admits(&idx) {
            return Err(Error::Precondition(format!(
                "index {idx} outside policy (K={}, budget={})",
                policy.k,
                policy.budget()
            )));
        }
        let mut v = ChaosVector::zero(policy);
        if c != 0.0 {
            v.terms.insert(idx, c);
        }
        Ok(v)
    }

    pub fn from_terms<I>(pairs: I, policy: TruncationPolicy) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut v = ChaosVector::zero(policy);
        for (idx, c) in pairs {
            if !v.policy.admits(&idx) {
                return Err(Error::Precondition(format!(
                    "index {idx} outside policy (K={}, budget={})",
                    v.policy.k,
                    v.policy.budget()
                )));
            }
            if c != 0.0 {
                *v.terms.entry(idx).or_insert(0.0) += c;
            }
        }
        v.prune();
        Ok(v)
    }

    /// W(f) for f with the given projected coefficients: Σ_k c_k H_{ε_k}.
    pub fn first_order(coeffs: &[f64], policy: TruncationPolicy) -> Result<Self> {
        if coeffs.len() > policy.k as usize {
            return Err(Error::Precondition(format!(
                "{} coefficients but K = {}",
                coeffs.len(),
                policy.k
            )));
        }
        Self::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| (MultiIndex::unit(k as u32), c)),
            policy,
        )
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    pub fn coeff(&self, idx: &MultiIndex) -> f64 {
        self.terms.get(idx).copied().unwrap_or(0.0)
    }

    /// Terms in graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(i, &c)| (i, c))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// E[Φ]: the coefficient at the empty index.
    pub fn expectation(&self) -> f64 {
        self.coeff(&MultiIndex::empty())
    }

    /// Largest total degree present (0 for the zero vector).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|i| i.degree()).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, &c| m.max(c.abs()))
    }

    pub fn add(&self, other: &ChaosVector) -> Result<ChaosVector> {
        self.policy.require_compatible(&other.policy)?;
        let mut out = self.clone();
        for (idx, &c) in &other.terms {
            *out.terms.entry(idx.clone()).or_insert(0.0) += c;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &ChaosVector) -> Result<ChaosVector> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, a: f64) -> ChaosVector {
        let mut out = self.clone();
        if a == 0.0 {
            out.terms.clear();
            return out;
        }
        for c in out.terms.values_mut() {
            *c *= a;
        }
        out.prune();
        out
    }

    /// Drops terms below drop_tol (and exact zeros). Called at operation
    /// boundaries only, never mid-accumulation, so identities stay exact.
    fn prune(&mut self) {
        let tol = self.policy.drop_tol;
        self.terms.retain(|_, c| *c != 0.0 && c.abs() >= tol);
    }

    /// Copy keeping only terms of total degree ≤ max_degree.
    pub fn truncated(&self, max_degree: u32) -> ChaosVector {
        let mut out = self.clone();
        out.terms.retain(|idx, _| idx.degree() <= max_degree);
        out
    }
}

/// ⟨⟨Φ, z⟩⟩ = Σ_α α!·Φ_α·z_α, the duality pairing.
pub fn pairing(a: &ChaosVector, b: &ChaosVector) -> f64 {
    let (small, large) = if a.terms.len() <= b.terms.len() {
        (a, b)
    } else {
        (b, a)
    };
    let mut s = 0.0;
    for (idx, &c) in &small.terms {
        if let Some(&d) = large.terms.get(idx) {
            s += idx.factorial() * c * d;
        }
    }
    s
}

/// ‖Φ‖_{2,p} = (Σ_α α!·Φ_α²·Π_k (2k+2)^{2p·α_k})^{1/2}.
pub fn hida_norm(a: &ChaosVector, p: i32) -> f64 {
    let mut s = 0.0;
    for (idx, &c) in &a.terms {
        let mut weight = idx.factorial() * c * c;
        for (k, e) in idx.iter() {
            weight *= ((2 * k + 2) as f64).powi(2 * p * e as i32);
        }
        s += weight;
    }
    s.sqrt()
}

/// Wick product: coefficient convolution (X⋄Y)_γ = Σ_{α+β=γ} X_α·Y_β.
pub fn wick_product(x: &ChaosVector, y: &ChaosVector) -> Result<ChaosVector> {
    x.policy.require_compatible(&y.policy)?;
    let mut out = ChaosVector::zero(x.policy.clone());
    for (alpha, &a) in &x.terms {
        for (beta, &b) in &y.terms {
            let gamma = alpha.add(beta);
            if !out.policy.accept_degree(gamma.degree())? {
                continue;
            }
            *out.terms.entry(gamma).or_insert(0.0) += a * b;
        }
    }
    out.prune();
    Ok(out)
}

/// Pointwise product via per-coordinate Hermite linearization.
pub fn pointwise_product(x: &ChaosVector, y: &ChaosVector) -> Result<ChaosVector> {
    x.policy.require_compatible(&y.policy)?;
    let mut out = ChaosVector::zero(x.policy.clone());
    for (alpha, &a) in &x.terms {
        for (beta, &b) in &y.terms {
            expand_pair(alpha, beta, a * b, &mut out)?;
        }
    }
    out.prune();
    Ok(out)
}

/// Adds c·H_α·H_β to acc, expanding Π_k He_{α_k}·He_{β_k} by contractions:
/// for each coordinate the contraction order r_k runs over 0..=min(α_k,β_k)
/// with weight r_k!·C(α_k,r_k)·C(β_k,r_k) and exponent α_k+β_k−2r_k.
fn expand_pair(alpha: &MultiIndex, beta: &MultiIndex, c: f64, acc: &mut ChaosVector) -> Result<()> {
    let mut support: Vec<u32> = alpha.iter().map(|(k, _)| k).collect();
    for (k, _) in beta.iter() {
        if !support.contains(&k) {
            support.push(k);
        }
    }
    support.sort_unstable();

    // per-coordinate (resulting exponent, weight) options
    let options: Vec<Vec<(u32, f64)>> = support
        .iter()
        .map(|&k| {
            let (a, b) = (alpha.exponent(k), beta.exponent(k));
            (0..=a.min(b))
                .map(|r| {
                    (
                        a + b - 2 * r,
                        factorial(r) * binomial(a, r) * binomial(b, r),
                    )
                })
                .collect()
        })
        .collect();

    let mut choice = vec![0usize; options.len()];
    loop {
        let mut weight = c;
        let mut pairs = Vec::with_capacity(support.len());
        for (slot, &k) in support.iter().enumerate() {
            let (e, w) = options[slot][choice[slot]];
            weight *= w;
            if e > 0 {
                pairs.push((k, e));
            }
        }
        let gamma = MultiIndex::from_pairs(&pairs);
        if acc.policy.accept_degree(gamma.degree())? {
            *acc.terms.entry(gamma).or_insert(0.0) += weight;
        }

        // odometer
        let mut slot = 0;
        loop {
            if slot == options.len() {
                return Ok(());
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

/// SΦ(ξ) = Σ_α Φ_α·Π_k c_k^{α_k} with c the projection of ξ.
pub fn s_transform(phi: &ChaosVector, xi: &Projection) -> f64 {
    let mut s = 0.0;
    for (idx, &coef) in &phi.terms {
        let mut m = coef;
        for (k, e) in idx.iter() {
            let c = xi.coeffs.get(k as usize).copied().unwrap_or(0.0);
            m *= c.powi(e as i32);
        }
        s += m;
    }
    s
}

/// Wick exponential exp⋄(W(ξ)) = Σ_α (c^α/α!)·H_α for projected ξ,
/// capped at degree n_max. Errors when the degree-(n_max+1) tail-mass bound
/// (Σ|c_k|)^{n+1}/(n+1)!·e^{Σ|c_k|} is not negligible under the policy.
pub fn wick_exp(
    xi: &Projection,
    policy: &TruncationPolicy,
    tail_threshold: f64,
) -> Result<ChaosVector> {
    let c = &xi.coeffs;
    if c.len() > policy.k as usize {
        return Err(Error::Precondition(format!(
            "{} direction coefficients but K = {}",
            c.len(),
            policy.k
        )));
    }
    let s: f64 = c.iter().map(|v| v.abs()).sum();
    let n = policy.n_max;
    let bound = s.powi(n as i32 + 1) / factorial(n + 1) * s.exp();
    let threshold = tail_threshold.max(policy.drop_tol);
    if bound > threshold {
        return Err(Error::TailMass { bound, threshold });
    }

    let mut out = ChaosVector::zero(policy.clone());
    for idx in crate::index::enumerate(c.len() as u32, n) {
        let mut v = 1.0;
        for (k, e) in idx.iter() {
            v *= c[k as usize].powi(e as i32) / factorial(e);
        }
        if v != 0.0 {
            out.terms.insert(idx, v);
        }
    }
    out.prune();
    Ok(out)
}

/// Σ_α Φ_α·Π_k He_{α_k}(g_k) for one vector of standard-normal draws.
pub fn sample_evaluate(phi: &ChaosVector, normals: &[f64]) -> f64 {
    debug_assert!(normals.len() >= phi.policy.k as usize);
    let max_deg = phi.degree();
    let table: Vec<Vec<f64>> = normals
        .iter()
        .map(|&g| hermite_poly_all(max_deg, g))
        .collect();
    let mut s = 0.0;
    for (idx, &c) in &phi.terms {
        let mut m = c;
        for (k, e) in idx.iter() {
            m *= table[k as usize][e as usize];
        }
        s += m;
    }
    s
}

/// Largest absolute coefficient difference between a and b.
pub fn abs_gap(a: &ChaosVector, b: &ChaosVector) -> f64 {
    let mut gap: f64 = 0.0;
    for (idx, c) in a.terms() {
        gap = gap.max((c - b.coeff(idx)).abs());
    }
    for (idx, c) in b.terms() {
        gap = gap.max((c - a.coeff(idx)).abs());
    }
    gap
}

/// Largest coefficient difference between a and b relative to their scale
/// (0 when both are zero).
pub fn rel_gap(a: &ChaosVector, b: &ChaosVector) -> f64 {
    let scale = a.max_abs_coeff().max(b.max_abs_coeff());
    if scale == 0.0 {
        return 0.0;
    }
    let mut gap: f64 = 0.0;
    for (idx, c) in a.terms() {
        gap = gap.max((c - b.coeff(idx)).abs());
    }
    for (idx, c) in b.terms() {
        gap = gap.max((c - a.coeff(idx)).abs());
    }
    gap / scale
}

// --- text serialization -----------------------------------------------------
//
// One line per term, `k1^a1 k2^a2 : coefficient`, empty index spelled `1`.
// Coefficients use 17 significant digits so the round trip is bit-exact.

impl ChaosVector {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (idx, &c) in &self.terms {
            out.push_str(&format!("{idx} : {c:.16e}\n"));
        }
        out
    }

    /// Parses the text form, inferring a minimal strict policy (K = largest
    /// coordinate + 1, n_max = largest degree) from the content.
    pub fn from_text(s: &str) -> Result<ChaosVector> {
        let mut parsed: Vec<(MultiIndex, f64)> = Vec::new();
        for (lineno, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (idx_part, coeff_part) = line.rsplit_once(':').ok_or(Error::Parse {
                line: lineno + 1,
                msg: "missing ':' separator".into(),
            })?;
            let idx = MultiIndex::parse(idx_part).map_err(|msg| Error::Parse {
                line: lineno + 1,
                msg,
            })?;
            let c: f64 = coeff_part.trim().parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad coefficient {:?}", coeff_part.trim()),
            })?;
            parsed.push((idx, c));
        }
        let k = parsed
            .iter()
            .filter_map(|(i, _)| i.max_coordinate())
            .max()
            .map_or(1, |m| m + 1);
        let n_max = parsed.iter().map(|(i, _)| i.degree()).max().unwrap_or(0);
        let policy = TruncationPolicy::strict(k, n_max, 0);
        ChaosVector::from_terms(parsed, policy)
    }

    /// Parses under a caller-supplied policy; terms must fit it.
    pub fn from_text_with_policy(s: &str, policy: TruncationPolicy) -> Result<ChaosVector> {
        let parsed = ChaosVector::from_text(s)?;
        ChaosVector::from_terms(parsed.terms, policy)
    }
}

/// Convenience: wick_exp of a function, projecting it first.
pub fn wick_exp_of(
    f: &FunctionOnR,
    basis: &HermiteBasis,
    policy: &TruncationPolicy,
) -> Result<ChaosVector> {
    let proj = crate::basis::project(f, basis);
    wick_exp(&proj, policy, crate::tol::Tolerances::default().tail_mass)
}
