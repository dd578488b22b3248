//! Sparse multi-indices α over basis coordinates.
//!
//! A `MultiIndex` is the exponent vector of a chaos monomial
//! H_α = Π_k He_{α_k}(W(e_k)); only nonzero exponents are stored. Ordering is
//! graded lexicographic so that map iteration visits low degrees first and
//! floating-point sums are reproducible.

use std::cmp::Ordering;
use std::fmt;

/// Sorted sparse exponent vector: pairs (basis index k, exponent α_k ≥ 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    entries: Vec<(u32, u32)>,
}

impl MultiIndex {
    /// The empty index (degree 0, the chaos coordinate of constants).
    pub fn empty() -> Self {
        MultiIndex::default()
    }

    /// The unit index ε_k.
    pub fn unit(k: u32) -> Self {
        MultiIndex {
            entries: vec![(k, 1)],
        }
    }

    /// Builds from (k, exponent) pairs; zero exponents are dropped, duplicate
    /// k are summed, entries are sorted by k.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        let mut entries: Vec<(u32, u32)> = Vec::with_capacity(pairs.len());
        let mut sorted = pairs.to_vec();
        sorted.sort_by_key(|&(k, _)| k);
        for (k, a) in sorted {
            if a == 0 {
                continue;
            }
            match entries.last_mut() {
                Some((k0, a0)) if *k0 == k => *a0 += a,
                _ => entries.push((k, a)),
            }
        }
        MultiIndex { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total degree |α| = Σ_k α_k.
    pub fn degree(&self) -> u32 {
        self.entries.iter().map(|&(_, a)| a).sum()
    }

    /// Exponent at coordinate k (0 if absent).
    pub fn exponent(&self, k: u32) -> u32 {
        self.entries
            .binary_search_by_key(&k, |&(k0, _)| k0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Largest basis index in the support, if any.
    pub fn max_coordinate(&self) -> Option<u32> {
        self.entries.last().map(|&(k, _)| k)
    }

    /// Iterates (k, α_k) in ascending k.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.entries.iter().copied()
    }

    /// α + β, componentwise.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let mut entries = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            let take_self = j >= other.entries.len()
                || (i < self.entries.len() && self.entries[i].0 <= other.entries[j].0);
            let take_other = i >= self.entries.len()
                || (j < other.entries.len() && other.entries[j].0 <= self.entries[i].0);
            match (take_self, take_other) {
                (true, true) => {
                    entries.push((self.entries[i].0, self.entries[i].1 + other.entries[j].1));
                    i += 1;
                    j += 1;
                }
                (true, false) => {
                    entries.push(self.entries[i]);
                    i += 1;
                }
                (false, true) => {
                    entries.push(other.entries[j]);
                    j += 1;
                }
                (false, false) => unreachable!(),
            }
        }
        MultiIndex { entries }
    }

    /// α − ε_k, or None when α_k = 0.
    pub fn lower(&self, k: u32) -> Option<MultiIndex> {
        let i = self.entries.binary_search_by_key(&k, |&(k0, _)| k0).ok()?;
        let mut entries = self.entries.clone();
        if entries[i].1 == 1 {
            entries.remove(i);
        } else {
            entries[i].1 -= 1;
        }
        Some(MultiIndex { entries })
    }

    /// α + ε_k.
    pub fn raise(&self, k: u32) -> MultiIndex {
        match self.entries.binary_search_by_key(&k, |&(k0, _)| k0) {
            Ok(i) => {
                let mut entries = self.entries.clone();
                entries[i].1 += 1;
                MultiIndex { entries }
            }
            Err(i) => {
                let mut entries = self.entries.clone();
                entries.insert(i, (k, 1));
                MultiIndex { entries }
            }
        }
    }

    /// Replaces the exponent at k (removing the entry when a = 0).
    pub fn with_exponent(&self, k: u32, a: u32) -> MultiIndex {
        let mut entries = self.entries.clone();
        match entries.binary_search_by_key(&k, |&(k0, _)| k0) {
            Ok(i) => {
                if a == 0 {
                    entries.remove(i);
                } else {
                    entries[i].1 = a;
                }
            }
            Err(i) => {
                if a > 0 {
                    entries.insert(i, (k, a));
                }
            }
        }
        MultiIndex { entries }
    }

    /// α! = Π_k α_k! as an exact small-integer float.
    pub fn factorial(&self) -> f64 {
        self.entries.iter().map(|&(_, a)| factorial(a)).product()
    }
}

/// n! for small n, exact in f64.
pub fn factorial(n: u32) -> f64 {
    let mut acc = 1.0;
    for m in 2..=n as u64 {
        acc *= m as f64;
    }
    acc
}

/// Binomial coefficient C(n, r), exact in f64 for the small degrees used here.
pub fn binomial(n: u32, r: u32) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    let mut acc = 1.0;
    for i in 0..r as u64 {
        acc = acc * (n as u64 - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// All multi-indices supported on coordinates 0..k with total degree
/// ≤ max_degree, in ascending (graded-lexicographic) order.
pub fn enumerate(k: u32, max_degree: u32) -> Vec<MultiIndex> {
    fn rec(k: u32, coord: u32, left: u32, stack: &mut Vec<(u32, u32)>, out: &mut Vec<MultiIndex>) {
        if coord == k {
            out.push(MultiIndex::from_pairs(stack));
            return;
        }
        for a in 0..=left {
            if a > 0 {
                stack.push((coord, a));
            }
            rec(k, coord + 1, left - a, stack, out);
            if a > 0 {
                stack.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(k, 0, max_degree, &mut Vec::new(), &mut out);
    out.sort();
    out.dedup();
    out
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.entries.cmp(&other.entries))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for &(k, a) in &self.entries {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{k}^{a}")?;
            first = false;
        }
        Ok(())
    }
}

impl MultiIndex {
    /// Parses the `Display` form: either `1` or space-separated `k^a` pairs.
    pub fn parse(s: &str) -> Result<MultiIndex, String> {
        let s = s.trim();
        if s == "1" {
            return Ok(MultiIndex::empty());
        }
        let mut pairs = Vec::new();
        for tok in s.split_whitespace() {
            let (k, a) = tok
                .split_once('^')
                .ok_or_else(|| format!("bad index term {tok:?}"))?;
            let k: u32 = k.parse().map_err(|_| format!("bad coordinate {k:?}"))?;
            let a: u32 = a.parse().map_err(|_| format!("bad exponent {a:?}"))?;
            if a == 0 {
                return Err(format!("zero exponent in {tok:?}"));
            }
            pairs.push((k, a));
        }
        let idx = MultiIndex::from_pairs(&pairs);
        if idx.entries.len() != pairs.len() {
            return Err(format!("duplicate coordinate in {s:?}"));
        }
        Ok(idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_counts_and_order() {
        let all = enumerate(2, 2);
        assert_eq!(all.len(), 6); // C(2+2, 2)
        assert_eq!(all[0], MultiIndex::empty());
        for w in all.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert_eq!(enumerate(3, 4).len(), 35); // C(3+4, 4)
    }

    #[test]
    fn construction_canonicalizes() {
        let a = MultiIndex::from_pairs(&[(3, 1), (0, 2), (3, 1), (5, 0)]);
        assert_eq!(a.exponent(0), 2);
        assert_eq!(a.exponent(3), 2);
        assert_eq!(a.exponent(5), 0);
        assert_eq!(a.degree(), 4);
        assert_eq!(a.max_coordinate(), Some(3));
    }

    #[test]
    fn add_and_lower() {
        let a = MultiIndex::from_pairs(&[(0, 1), (2, 2)]);
        let b = MultiIndex::from_pairs(&[(1, 1), (2, 1)]);
        let c = a.add(&b);
        assert_eq!(c, MultiIndex::from_pairs(&[(0, 1), (1, 1), (2, 3)]));
        assert_eq!(c.lower(1), Some(MultiIndex::from_pairs(&[(0, 1), (2, 3)])));
        assert_eq!(c.lower(4), None);
        assert_eq!(MultiIndex::unit(7).lower(7), Some(MultiIndex::empty()));
    }

    #[test]
    fn factorial_is_product_over_coordinates() {
        let a = MultiIndex::from_pairs(&[(0, 3), (4, 2)]);
        assert_eq!(a.factorial(), 12.0); // 3! * 2!
        assert_eq!(MultiIndex::empty().factorial(), 1.0);
        assert_eq!(factorial(6), 720.0);
    }

    #[test]
    fn binomial_small_table() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(8, 0), 1.0);
        assert_eq!(binomial(8, 8), 1.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(12, 6), 924.0);
    }

    #[test]
    fn graded_lex_order_puts_low_degree_first() {
        let mut v = [
            MultiIndex::from_pairs(&[(0, 2)]),
            MultiIndex::empty(),
            MultiIndex::unit(1),
            MultiIndex::unit(0),
            MultiIndex::from_pairs(&[(0, 1), (1, 1)]),
        ];
        v.sort();
        assert_eq!(v[0], MultiIndex::empty());
        assert_eq!(v[1], MultiIndex::unit(0));
        assert_eq!(v[2], MultiIndex::unit(1));
        assert!(v[3].degree() == 2 && v[4].degree() == 2);
    }

    #[test]
    fn display_parse_round_trip() {
        for idx in [
            MultiIndex::empty(),
            MultiIndex::unit(3),
            MultiIndex::from_pairs(&[(0, 2), (5, 1)]),
        ] {
            let s = idx.to_string();
            assert_eq!(MultiIndex::parse(&s).unwrap(), idx);
        }
        assert!(MultiIndex::parse("0^1 0^2").is_err());
        assert!(MultiIndex::parse("x^2").is_err());
    }
}
