//! (r,δ)-locality: repair profiles, their verification, the Singleton-type
//! bound and the optimal-LRC predicate.
//!
//! Coordinates are 0-based in this module. Profiles are proposed from a
//! construction's block structure (or found by search) and are only trusted
//! after [`verify_locality`] has checked every punctured group code.

use serde::{Deserialize, Serialize};

use crate::code::{DistanceResult, LinearCode};
use crate::error::{Error, Result};

/// Groups of coordinates claimed to give every symbol (r,δ)-locality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairProfile {
    pub r: usize,
    pub delta: usize,
    pub groups: Vec<Vec<usize>>,
}

impl RepairProfile {
    /// Sorts each group; rejects `δ < 2`, `r = 0` and empty or repeated groups.
    pub fn new(r: usize, delta: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        if r == 0 || delta < 2 {
            return Err(Error::InvalidParameters(format!("need r ≥ 1 and δ ≥ 2, got r={r}, δ={delta}")));
        }
        let mut out = Vec::with_capacity(groups.len());
        for mut g in groups {
            g.sort_unstable();
            let len = g.len();
            g.dedup();
            if g.is_empty() || g.len() != len {
                return Err(Error::InvalidParameters("repair groups must be nonempty sets".into()));
            }
            out.push(g);
        }
        Ok(RepairProfile { r, delta, groups: out })
    }

    pub fn max_group_size(&self) -> usize {
        self.r + self.delta - 1
    }

    /// Coordinates of `[n]` not in any group.
    pub fn uncovered(&self, n: usize) -> Vec<usize> {
        let mut seen = vec![false; n];
        for g in &self.groups {
            for &i in g {
                if i < n {
                    seen[i] = true;
                }
            }
        }
        (0..n).filter(|&i| !seen[i]).collect()
    }

    /// Whether the groups are pairwise disjoint and cover `[n]`.
    pub fn is_partition(&self, n: usize) -> bool {
        let total: usize = self.groups.iter().map(Vec::len).sum();
        total == n && self.uncovered(n).is_empty() && self.groups.iter().flatten().all(|&i| i < n)
    }

    /// Same groups under new parameters.
    pub fn with_params(&self, r: usize, delta: usize) -> Result<Self> {
        Self::new(r, delta, self.groups.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalityMethod {
    Certificate,
    Search,
    Unverified,
}

impl LocalityMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            LocalityMethod::Certificate => "certificate",
            LocalityMethod::Search => "search",
            LocalityMethod::Unverified => "unverified",
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroupCheck {
    pub group: Vec<usize>,
    pub distance: DistanceResult,
}

#[derive(Clone, Debug)]
pub struct LocalityVerdict {
    pub verified: bool,
    pub groups: Vec<GroupCheck>,
    /// Index of the first group that fails, if any.
    pub failing_group: Option<usize>,
    pub uncovered: Vec<usize>,
    pub method: LocalityMethod,
    pub reason: Option<String>,
}

impl LocalityVerdict {
    fn failed(reason: String, groups: Vec<GroupCheck>, failing: Option<usize>, uncovered: Vec<usize>) -> Self {
        LocalityVerdict {
            verified: false,
            groups,
            failing_group: failing,
            uncovered,
            method: LocalityMethod::Unverified,
            reason: Some(reason),
        }
    }
}

/// `n − k + 1 − (⌈k/r⌉ − 1)(δ − 1)`, returned even when negative.
pub fn rd_bound(n: usize, k: usize, r: usize, delta: usize) -> Result<i64> {
    if r == 0 || k == 0 || delta < 2 || k > n {
        return Err(Error::InvalidParameters(format!("rd_bound({n}, {k}, {r}, {delta})")));
    }
    let (n, k, r, delta) = (n as i64, k as i64, r as i64, delta as i64);
    Ok(n - k + 1 - ((k + r - 1) / r - 1) * (delta - 1))
}

/// Checks every group of `profile` on `c`: size at most `r + δ − 1` and
/// punctured distance at least `δ`, with the groups covering `[n]`.
pub fn verify_locality(c: &LinearCode, profile: &RepairProfile, budget: u64) -> LocalityVerdict {
    let n = c.len();
    let uncovered = profile.uncovered(n);
    if let Some(bad) = profile.groups.iter().position(|g| g.iter().any(|&i| i >= n)) {
        return LocalityVerdict::failed(format!("group {bad} has a coordinate outside [n]"), vec![], Some(bad), uncovered);
    }
    let mut checks = Vec::with_capacity(profile.groups.len());
    let mut failing = None;
    let mut reason = None;
    for (idx, g) in profile.groups.iter().enumerate() {
        let punctured = c.puncture(g).expect("group was validated");
        let distance = punctured.min_distance(budget);
        if failing.is_none() {
            if g.len() > profile.max_group_size() {
                failing = Some(idx);
                reason = Some(format!("group {idx} has {} > r+δ−1 = {} coordinates", g.len(), profile.max_group_size()));
            } else if distance.capped() {
                failing = Some(idx);
                reason = Some(format!("distance of group {idx} not settled within budget"));
            } else if distance.lower < profile.delta {
                failing = Some(idx);
                reason = Some(format!("group {idx} has punctured distance {} < δ = {}", distance.lower, profile.delta));
            }
        }
        checks.push(GroupCheck { group: g.clone(), distance });
    }
    if let Some(reason) = reason {
        return LocalityVerdict::failed(reason, checks, failing, uncovered);
    }
    if !uncovered.is_empty() {
        return LocalityVerdict::failed(format!("{} coordinates are in no group", uncovered.len()), checks, None, uncovered);
    }
    LocalityVerdict {
        verified: true,
        groups: checks,
        failing_group: None,
        uncovered,
        method: LocalityMethod::Certificate,
        reason: None,
    }
}

/// Block structure a code came from, used to propose repair groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Construction {
    /// `t` blocks of `q − 1` coordinates.
    FamilyA { q: usize, t: usize },
    /// `t` blocks of `2q + v − 2` coordinates laid out as x | y | z.
    FamilyB { q: usize, v: usize, t: usize },
    /// `t` blocks of `m` coordinates.
    FamilyC { m: usize, t: usize },
    /// `segments` copies of a constituent of length `n`. `twisted` marks the
    /// two-segment construction whose second constituent is sign-twisted.
    MatrixProduct { constituent: Box<Construction>, n: usize, segments: usize, twisted: bool },
    Generic,
}

impl Construction {
    /// Repair groups implied by the block structure.
    fn groups(&self) -> Vec<Vec<Vec<usize>>> {
        match self {
            Construction::FamilyA { q, t } => vec![blocks(q - 1, *t)],
            Construction::FamilyC { m, t } => vec![blocks(*m, *t)],
            Construction::FamilyB { q, v, t } => {
                let len = 2 * q + v - 2;
                let mut groups = Vec::with_capacity(2 * t);
                for i in 0..*t {
                    let o = i * len;
                    groups.push((o..o + q - 1 + v).collect());
                    groups.push((o + q - 1..o + len).collect());
                }
                vec![groups]
            }
            Construction::MatrixProduct { constituent, n, segments, twisted } => {
                let mut out = Vec::new();
                for base in constituent.groups() {
                    let replicated: Vec<Vec<usize>> = (0..*segments)
                        .flat_map(|s| base.iter().map(move |g| g.iter().map(|&i| s * n + i).collect()))
                        .collect();
                    out.push(replicated);
                    if *twisted && *segments == 2 {
                        // Coordinate 0 of each segment swaps places with the
                        // other segment's: S1 = {0} ∪ {n+1..2n−1}, S2 = {n} ∪ {1..n−1},
                        // each intersected with the constituent groups.
                        let phi1 = |j: usize| if j == 0 { 0 } else { n + j };
                        let phi2 = |j: usize| if j == 0 { *n } else { j };
                        let mut groups: Vec<Vec<usize>> = base.iter().map(|g| g.iter().map(|&j| phi1(j)).collect()).collect();
                        groups.extend(base.iter().map(|g| g.iter().map(|&j| phi2(j)).collect::<Vec<_>>()));
                        out.push(groups);
                    }
                }
                out
            }
            Construction::Generic => vec![],
        }
    }
}

fn blocks(size: usize, t: usize) -> Vec<Vec<usize>> {
    (0..t).map(|i| (i * size..(i + 1) * size).collect()).collect()
}

/// Candidate profiles for `(r, δ)`, in the order they should be tried.
pub fn candidate_profiles(construction: &Construction, r: usize, delta: usize) -> Result<Vec<RepairProfile>> {
    construction
        .groups()
        .into_iter()
        .map(|g| RepairProfile::new(r, delta, g))
        .collect()
}

/// Tries the candidates in order and returns the first that verifies, or the
/// verdict of the last attempt.
pub fn verify_candidates(
    c: &LinearCode,
    candidates: &[RepairProfile],
    budget: u64,
) -> (Option<RepairProfile>, LocalityVerdict) {
    let mut last = LocalityVerdict::failed("no candidate profiles".into(), vec![], None, (0..c.len()).collect());
    for p in candidates {
        let v = verify_locality(c, p, budget);
        if v.verified {
            return (Some(p.clone()), v);
        }
        last = v;
    }
    (None, last)
}

/// Exact distance, using the profile's groups as a partition when they form one.
pub fn distance_for(c: &LinearCode, profile: Option<&RepairProfile>, budget: u64) -> DistanceResult {
    match profile {
        Some(p) if p.groups.len() > 1 && p.is_partition(c.len()) => c
            .distance_with_partition(&p.groups, budget)
            .expect("partition was checked"),
        _ => c.min_distance(budget),
    }
}

#[derive(Clone, Debug)]
pub struct OptimalityVerdict {
    pub optimal: bool,
    pub n: usize,
    pub k: usize,
    pub distance: DistanceResult,
    pub bound: Option<i64>,
    pub locality: LocalityVerdict,
    pub reason: Option<String>,
}

/// Whether `c` is an optimal (r,δ)-LRC with repair groups `profile`.
pub fn is_optimal_lrc(c: &LinearCode, profile: &RepairProfile, budget: u64) -> OptimalityVerdict {
    let distance = distance_for(c, Some(profile), budget);
    is_optimal_lrc_with(c, profile, distance, budget)
}

/// As [`is_optimal_lrc`], reusing an already computed distance.
pub fn is_optimal_lrc_with(c: &LinearCode, profile: &RepairProfile, distance: DistanceResult, budget: u64) -> OptimalityVerdict {
    let locality = verify_locality(c, profile, budget);
    let (n, k) = (c.len(), c.dim());
    let bound = rd_bound(n, k, profile.r, profile.delta).ok();
    let reason = if !locality.verified {
        Some(format!("locality: {}", locality.reason.clone().unwrap_or_default()))
    } else if distance.capped() {
        Some("distance not settled within budget".to_string())
    } else if distance.lower < profile.delta && bound.is_some() {
        Some(format!("d = {} < δ = {}", distance.lower, profile.delta))
    } else {
        match bound {
            None => Some("bound undefined for these parameters".to_string()),
            Some(b) if b != distance.lower as i64 => Some(format!("d = {} but the bound is {b}", distance.lower)),
            Some(_) => None,
        }
    };
    OptimalityVerdict { optimal: reason.is_none(), n, k, distance, bound, locality, reason }
}

/// Exhaustive search for a covering profile. Every uncovered coordinate gets
/// the smallest (then lexicographically first) set containing it whose
/// punctured distance is at least `δ`. `None` if some coordinate has no such
/// set or more than `cap` sets were examined.
pub fn search_locality(c: &LinearCode, r: usize, delta: usize, cap: u64) -> Option<RepairProfile> {
    let n = c.len();
    if r == 0 || delta < 2 {
        return None;
    }
    let max = (r + delta - 1).min(n);
    let mut covered = vec![false; n];
    let mut groups = Vec::new();
    let mut examined = 0u64;
    for i in 0..n {
        if covered[i] {
            continue;
        }
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let mut found = None;
        'sizes: for size in 1..=max {
            let mut comb: Vec<usize> = (0..size - 1).collect();
            loop {
                examined += 1;
                if examined > cap {
                    return None;
                }
                let mut s: Vec<usize> = comb.iter().map(|&x| others[x]).collect();
                s.push(i);
                s.sort_unstable();
                let p = c.puncture(&s).expect("valid subset");
                // Singleton on the punctured code rules out most sets cheaply.
                if s.len() + 1 >= p.dim() + delta && p.distance_at_least(delta, u64::MAX) == Some(true) {
                    found = Some(s);
                    break 'sizes;
                }
                if !next_combination(&mut comb, others.len()) {
                    break;
                }
            }
        }
        let s = found?;
        for &j in &s {
            covered[j] = true;
        }
        groups.push(s);
    }
    RepairProfile::new(r, delta, groups).ok()
}

/// Advances `comb` to the next k-subset of `[n]` in lexicographic order.
pub(crate) fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    for i in (0..k).rev() {
        if comb[i] < n - k + i {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::DEFAULT_BUDGET;
    use crate::galois::GaloisField;
    use crate::matrix::Mat;

    #[test]
    fn bound_values() {
        assert_eq!(rd_bound(12, 8, 4, 3).unwrap(), 3);
        assert_eq!(rd_bound(24, 20, 4, 3).unwrap(), -3);
        assert_eq!(rd_bound(10, 4, 5, 3).unwrap(), 7);
        assert!(rd_bound(10, 4, 0, 3).is_err());
        assert!(rd_bound(10, 4, 2, 1).is_err());
    }

    #[test]
    fn full_space_fails_locality() {
        let f = GaloisField::new(7, 1).unwrap();
        let c = LinearCode::full(&f, 4);
        let p = RepairProfile::new(1, 2, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let v = verify_locality(&c, &p, DEFAULT_BUDGET);
        assert!(!v.verified);
        assert_eq!(v.failing_group, Some(0));
        assert!(!is_optimal_lrc(&c, &p, DEFAULT_BUDGET).optimal);
    }

    #[test]
    fn mds_code_is_optimal() {
        // [4,2,3] Reed-Solomon over GF(5) on points 1,2,3,4.
        let f = GaloisField::new(5, 1).unwrap();
        let g = Mat::from_fn(&f, 2, 4, |i, j| f.pow(j as u32 + 1, i as i64).unwrap());
        let c = LinearCode::from_generator(&g);
        let p = RepairProfile::new(2, 3, vec![vec![0, 1, 2, 3]]).unwrap();
        let v = is_optimal_lrc(&c, &p, DEFAULT_BUDGET);
        assert!(v.optimal, "{:?}", v.reason);
        assert_eq!(v.bound, Some(3));
    }

    #[test]
    fn repetition_pairs() {
        let f = GaloisField::new(3, 1).unwrap();
        let c = LinearCode::from_generator(&Mat::from_fn(&f, 1, 5, |_, _| 1));
        let p = search_locality(&c, 1, 2, 10_000).unwrap();
        assert_eq!(p.groups[0], vec![0, 1]);
        assert!(verify_locality(&c, &p, DEFAULT_BUDGET).verified);
    }

    #[test]
    fn uncovered_coordinates_fail() {
        let f = GaloisField::new(3, 1).unwrap();
        let c = LinearCode::from_generator(&Mat::from_fn(&f, 1, 4, |_, _| 1));
        let p = RepairProfile::new(1, 2, vec![vec![0, 1]]).unwrap();
        let v = verify_locality(&c, &p, DEFAULT_BUDGET);
        assert!(!v.verified);
        assert_eq!(v.uncovered, vec![2, 3]);
    }

    #[test]
    fn combinations_in_order() {
        let mut c = vec![0, 1];
        let mut all = vec![c.clone()];
        while next_combination(&mut c, 4) {
            all.push(c.clone());
        }
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn mp_candidates_include_twisted_groups() {
        let c = Construction::MatrixProduct {
            constituent: Box::new(Construction::FamilyA { q: 4, t: 1 }),
            n: 3,
            segments: 2,
            twisted: true,
        };
        let ps = candidate_profiles(&c, 1, 3).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].groups, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert_eq!(ps[1].groups, vec![vec![0, 4, 5], vec![1, 2, 3]]);
    }
}
