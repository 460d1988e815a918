use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

/// Exponent vector of a monomial `z^α`.
///
/// Ordering is graded lexicographic: total degree first, then exponents
/// compared left to right with larger leading exponents first, so that for
/// `n = 2` the degree-two block reads `z1², z1 z2, z2²`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// `e_k` (zero-based `k`).
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = vec![0; n];
        v[k] = 1;
        Self(v)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.n(), other.n(), "multi-index length mismatch");
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Signed difference, used for Toeplitz classification.
    pub fn diff(&self, other: &MultiIndex) -> Vec<i64> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect()
    }

    /// `z^α` evaluated at a point.
    pub fn pow(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (zi, &e) in z.iter().zip(&self.0) {
            if e > 0 {
                acc *= zi.powu(e);
            }
        }
        acc
    }

    /// Human-readable monomial label such as `z1^2 z2`, or `1`.
    pub fn monomial(&self, var: &str) -> String {
        if self.is_zero() {
            return "1".into();
        }
        let mut parts = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("{var}{}", i + 1)),
                _ => parts.push(format!("{var}{}^{e}", i + 1)),
            }
        }
        parts.join(" ")
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "{}", s.join(","))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for MultiIndex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err("empty multi-index".into());
        }
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|e| format!("bad exponent '{}': {e}", t.trim()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(MultiIndex)
    }
}

/// All multi-indices with `|α| <= d` in graded-lex order.
pub fn enumerate_indices(n: usize, d: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for deg in 0..=d {
        let mut block = Vec::new();
        let mut cur = vec![0u32; n];
        compositions(n, deg, 0, &mut cur, &mut block);
        out.extend(block);
    }
    out
}

/// Exponent vectors of total degree `remaining` over positions `pos..`,
/// emitted with larger leading exponents first.
fn compositions(n: usize, remaining: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if n == 0 {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e;
        compositions(n, remaining - e, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// `C(n + d, d)`, the number of multi-indices with `|α| <= d`.
pub fn index_count(n: usize, d: u32) -> usize {
    let mut num: u128 = 1;
    for k in 1..=d as u128 {
        num = num * (n as u128 + k) / k;
    }
    num as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn univariate_order() {
        assert_eq!(enumerate_indices(1, 2), vec![mi(&[0]), mi(&[1]), mi(&[2])]);
    }

    #[test]
    fn bivariate_order_matches_monomial_headers() {
        let got = enumerate_indices(2, 2);
        let want = vec![mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1]), mi(&[2, 0]), mi(&[1, 1]), mi(&[0, 2])];
        assert_eq!(got, want);
        let labels: Vec<String> = got.iter().map(|a| a.monomial("z")).collect();
        assert_eq!(labels, ["1", "z1", "z2", "z1^2", "z1 z2", "z2^2"]);
    }

    #[test]
    fn counts() {
        assert_eq!(enumerate_indices(3, 2).len(), 10);
        assert_eq!(index_count(3, 2), 10);
        assert_eq!(enumerate_indices(2, 3).len(), index_count(2, 3));
    }

    #[test]
    fn sorted_and_unique() {
        let v = enumerate_indices(3, 4);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn parse_round_trip() {
        let a = mi(&[2, 0, 5]);
        assert_eq!(a.to_string().parse::<MultiIndex>().unwrap(), a);
        assert!("1,,2".parse::<MultiIndex>().is_err());
    }
}
