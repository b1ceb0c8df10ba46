//! The three LRC families, the sign twist, and the quantum constructions that
//! combine them through matrix-product codes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::code::{DistanceResult, Duality, LinearCode};
use crate::error::{Error, Result};
use crate::galois::{prime_power, Field, GaloisField};
use crate::locality::{
    candidate_profiles, distance_for, is_optimal_lrc_with, search_locality, verify_candidates,
    Construction, LocalityVerdict, OptimalityVerdict, RepairProfile,
};
use crate::matrix::{Mat, Permutation};
use crate::mpkit::{type_one_matrix, type_two_matrix, MpSpec};

/// Expected classical parameters `[n, k, d]` with locality `(r, δ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LrcParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub r: usize,
    pub delta: usize,
}

fn require(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::HypothesisUnmet(what()))
    }
}

fn prime_power_of(q: usize) -> Result<(u32, u32)> {
    u32::try_from(q).ok().and_then(prime_power).ok_or(Error::NotPrimePower(q.min(u32::MAX as usize) as u32))
}

fn quadratic_extension(q: usize) -> Result<Field> {
    let (p, e) = prime_power_of(q)?;
    GaloisField::new(p, 2 * e)
}

/// Parity-check matrix with `t` diagonal Vandermonde blocks of `u` rows on the
/// powers `1..=u` of each block's root, and `v` global rows on powers `u+1..=u+v`.
fn block_vandermonde(f: &Field, roots: &[u32], len: usize, u: usize, v: usize) -> Mat {
    let t = roots.len();
    let mut h = Mat::zeros(f, t * u + v, t * len);
    for (b, &w) in roots.iter().enumerate() {
        for j in 0..len {
            let col = b * len + j;
            let x = f.pow(w, j as i64).expect("roots are nonzero");
            for a in 1..=u {
                h.set(b * u + a - 1, col, f.pow(x, a as i64).unwrap());
            }
            for a in u + 1..=u + v {
                h.set(t * u + a - u - 1, col, f.pow(x, a as i64).unwrap());
            }
        }
    }
    h
}

fn check_roots(f: &Field, roots: &[u32], order: u64, t: usize) -> Result<()> {
    require(roots.len() == t, || format!("{} roots given for t = {t}", roots.len()))?;
    for &w in roots {
        require(f.contains(w) && w != 0 && f.element_order(w) == Some(order as u32), || {
            format!("{w} is not a primitive {order}-th root of unity in GF({})", f.order())
        })?;
    }
    Ok(())
}

/// `C(u, v, t)` over GF(q²).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyAParams {
    pub q: usize,
    pub u: usize,
    pub v: usize,
    pub t: usize,
    /// Per-block primitive (q−1)-th roots; the canonical `g^{q+1}` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<u32>>,
}

impl FamilyAParams {
    pub fn new(q: usize, u: usize, v: usize, t: usize) -> Self {
        FamilyAParams { q, u, v, t, roots: None }
    }

    pub fn check(&self) -> Result<()> {
        let (q, u, v, t) = (self.q, self.u, self.v, self.t);
        prime_power_of(q)?;
        require(q >= 5, || format!("q = {q} < 5"))?;
        require(u >= 1 && t >= 1, || "u and t must be positive".into())?;
        require(v <= u, || format!("v = {v} > u = {u}"))?;
        require(u + v <= q - 2, || format!("u + v = {} > q − 2 = {}", u + v, q - 2))
    }

    pub fn expected(&self) -> LrcParams {
        let n = self.t * (self.q - 1);
        LrcParams { n, k: n - self.t * self.u - self.v, d: self.u + self.v + 1, r: self.q - 1 - self.u, delta: self.u + 1 }
    }

    pub fn construction(&self) -> Construction {
        Construction::FamilyA { q: self.q, t: self.t }
    }

    pub fn with_v(&self, v: usize) -> Self {
        FamilyAParams { v, ..self.clone() }
    }
}

pub fn family_a_parity(p: &FamilyAParams) -> Result<Mat> {
    p.check()?;
    let f = quadratic_extension(p.q)?;
    let order = (p.q - 1) as u64;
    let roots = match &p.roots {
        Some(r) => {
            check_roots(&f, r, order, p.t)?;
            r.clone()
        }
        None => vec![f.root_of_unity(order as u32)?; p.t],
    };
    Ok(block_vandermonde(&f, &roots, p.q - 1, p.u, p.v))
}

pub fn build_family_a(p: &FamilyAParams) -> Result<LinearCode> {
    Ok(LinearCode::from_parity_check(&family_a_parity(p)?))
}

/// `C(s, l, v, t)` over GF(q²).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyBParams {
    pub q: usize,
    pub s: usize,
    pub l: usize,
    pub v: usize,
    pub t: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mus: Option<Vec<u32>>,
}

impl FamilyBParams {
    pub fn new(q: usize, s: usize, l: usize, v: usize, t: usize) -> Self {
        FamilyBParams { q, s, l, v, t, roots: None, lambdas: None, mus: None }
    }

    pub fn check(&self) -> Result<()> {
        let (q, s, l, v, t) = (self.q, self.s, self.l, self.v, self.t);
        prime_power_of(q)?;
        require(q >= 8, || format!("q = {q} < 8"))?;
        require(s >= 1 && v >= 1 && t >= 1, || "s, v and t must be positive".into())?;
        require((q - 1) % v == 0, || format!("v = {v} does not divide q − 1 = {}", q - 1))?;
        require(s + l < v, || format!("s + l = {} > v − 1 = {}", s + l, v - 1))?;
        require(l <= s / 2 + 1, || format!("l = {l} > ⌊s/2⌋ + 1 = {}", s / 2 + 1))?;
        require(v * t + s + l + 2 <= q + v, || format!("vt = {} > q + v − s − l − 2", v * t))
    }

    pub fn block_len(&self) -> usize {
        2 * self.q + self.v - 2
    }

    pub fn expected(&self) -> LrcParams {
        let n = self.t * self.block_len();
        LrcParams {
            n,
            k: n - 2 * self.s * self.t - self.l,
            d: self.s + self.l + 1,
            r: self.q + self.v - self.s - 1,
            delta: self.s + 1,
        }
    }

    pub fn construction(&self) -> Construction {
        Construction::FamilyB { q: self.q, v: self.v, t: self.t }
    }

    pub fn with_l(&self, l: usize) -> Self {
        FamilyBParams { l, ..self.clone() }
    }
}

/// `{λ, μ, μ/λ}` avoid the subgroup generated by `ω`.
fn scalars_admissible(f: &GaloisField, order: u64, lambda: u32, mu: u32) -> bool {
    let outside = |x: u32| x != 0 && f.element_order(x).is_some_and(|e| !order.is_multiple_of(e as u64));
    lambda != 0 && outside(lambda) && outside(mu) && outside(f.div(mu, lambda).unwrap())
}

fn default_scalars(f: &GaloisField, order: u64) -> Option<(u32, u32)> {
    let (g, g2) = (f.exp(1), f.exp(2));
    if scalars_admissible(f, order, g, g2) {
        return Some((g, g2));
    }
    (1..f.order())
        .flat_map(|a| (1..f.order()).map(move |b| (a, b)))
        .find(|&(a, b)| scalars_admissible(f, order, a, b))
}

pub fn family_b_parity(p: &FamilyBParams) -> Result<Mat> {
    p.check()?;
    family_b_matrix(p)
}

/// Evaluation points of every block in column order, with the bands
/// (first, second) each point's column takes part in.
struct FamilyBPoints {
    field: Field,
    zeta: u32,
    blocks: Vec<Vec<(u32, bool, bool)>>,
}

fn family_b_points(p: &FamilyBParams) -> Result<FamilyBPoints> {
    let f = quadratic_extension(p.q)?;
    let order = (p.q - 1) as u64;
    let roots = match &p.roots {
        Some(r) => {
            check_roots(&f, r, order, p.t)?;
            r.clone()
        }
        None => vec![f.root_of_unity(order as u32)?; p.t],
    };
    let mut scalars = Vec::with_capacity(p.t);
    for i in 0..p.t {
        let given = (p.lambdas.as_ref().map(|v| v.get(i).copied()), p.mus.as_ref().map(|v| v.get(i).copied()));
        let pair = match given {
            (None, None) => default_scalars(&f, order).ok_or(Error::NoAdmissibleScalars { block: i + 1 })?,
            (Some(Some(a)), Some(Some(b))) => {
                require(f.contains(a) && f.contains(b) && scalars_admissible(&f, order, a, b), || {
                    format!("scalars λ = {a}, μ = {b} of block {} meet the root subgroup", i + 1)
                })?;
                (a, b)
            }
            _ => return Err(Error::InvalidParameters(format!("λ and μ must both be given for block {}", i + 1))),
        };
        scalars.push(pair);
    }
    let zeta = f.root_of_unity(p.v as u32)?;
    let powers = |base: u32, scale: u32, count: usize| -> Vec<u32> {
        (0..count).map(|j| f.mul(scale, f.pow(base, j as i64).unwrap())).collect()
    };
    let blocks = roots
        .iter()
        .zip(&scalars)
        .map(|(&w, &(lambda, mu))| {
            let xs = powers(w, lambda, p.q - 1);
            let ys = powers(zeta, 1, p.v);
            let zs = powers(w, mu, p.q - 1);
            xs.into_iter()
                .map(|x| (x, true, false))
                .chain(ys.into_iter().map(|y| (y, true, true)))
                .chain(zs.into_iter().map(|z| (z, false, true)))
                .collect()
        })
        .collect();
    Ok(FamilyBPoints { field: f, zeta, blocks })
}

fn family_b_matrix(p: &FamilyBParams) -> Result<Mat> {
    let FamilyBPoints { field: f, blocks, .. } = family_b_points(p)?;
    let (s, l, t) = (p.s, p.l, p.t);
    let len = p.block_len();
    let mut h = Mat::zeros(&f, 2 * s * t + l, t * len);
    for (b, pts) in blocks.iter().enumerate() {
        for (j, &(x, band1, band2)) in pts.iter().enumerate() {
            let col = b * len + j;
            for k in 1..=s {
                let xk = f.pow(x, k as i64).unwrap();
                if band1 {
                    h.set(b * 2 * s + k - 1, col, xk);
                }
                if band2 {
                    h.set(b * 2 * s + s + k - 1, col, xk);
                }
            }
            for k in s + 1..=s + l {
                h.set(2 * s * t + k - s - 1, col, f.pow(x, k as i64).unwrap());
            }
        }
    }
    Ok(h)
}

/// The coordinate permutation induced by multiplying every evaluation point
/// by `ζ`. Each row of the parity check is homogeneous in the points, so this
/// maps the code onto itself; callers still verify that before relying on it.
pub fn family_b_automorphism(p: &FamilyBParams) -> Result<Permutation> {
    let FamilyBPoints { field: f, zeta, blocks } = family_b_points(p)?;
    let len = p.block_len();
    let mut image = Vec::with_capacity(len * blocks.len());
    for (b, pts) in blocks.iter().enumerate() {
        for &(x, b1, b2) in pts {
            let target = f.mul(zeta, x);
            let j = pts
                .iter()
                .position(|&(y, c1, c2)| y == target && (c1, c2) == (b1, b2))
                .ok_or_else(|| Error::PostconditionFailed("ζ does not permute the evaluation points".into()))?;
            image.push(b * len + j);
        }
    }
    Permutation::new(image)
}

pub fn build_family_b(p: &FamilyBParams) -> Result<LinearCode> {
    Ok(LinearCode::from_parity_check(&family_b_parity(p)?))
}

/// `D(u, v, t, m)` over GF(q).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCParams {
    pub q: usize,
    pub u: usize,
    pub v: usize,
    pub t: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<u32>>,
}

impl FamilyCParams {
    pub fn new(q: usize, u: usize, v: usize, t: usize, m: usize) -> Self {
        FamilyCParams { q, u, v, t, m, roots: None }
    }

    pub fn check(&self) -> Result<()> {
        let (q, u, v, t, m) = (self.q, self.u, self.v, self.t, self.m);
        prime_power_of(q)?;
        require(q >= 5, || format!("q = {q} < 5"))?;
        require(u >= 1 && t >= 1 && m >= 1, || "u, t and m must be positive".into())?;
        require((q - 1) % m == 0, || format!("m = {m} does not divide q − 1 = {}", q - 1))?;
        require(v <= u, || format!("v = {v} > u = {u}"))?;
        require(u + v < m, || format!("u + v = {} > m − 1 = {}", u + v, m - 1))
    }

    pub fn expected(&self) -> LrcParams {
        let n = self.t * self.m;
        LrcParams { n, k: n - self.t * self.u - self.v, d: self.u + self.v + 1, r: self.m - self.u, delta: self.u + 1 }
    }

    pub fn construction(&self) -> Construction {
        Construction::FamilyC { m: self.m, t: self.t }
    }

    pub fn with_v(&self, v: usize) -> Self {
        FamilyCParams { v, ..self.clone() }
    }
}

pub fn family_c_parity(p: &FamilyCParams) -> Result<Mat> {
    p.check()?;
    let f = GaloisField::with_order(p.q as u32)?;
    let roots = match &p.roots {
        Some(r) => {
            check_roots(&f, r, p.m as u64, p.t)?;
            r.clone()
        }
        None => vec![f.root_of_unity(p.m as u32)?; p.t],
    };
    Ok(block_vandermonde(&f, &roots, p.m, p.u, p.v))
}

pub fn build_family_c(p: &FamilyCParams) -> Result<LinearCode> {
    Ok(LinearCode::from_parity_check(&family_c_parity(p)?))
}

/// Negates every generator column except the first.
pub fn monomial_twist(c: &LinearCode) -> LinearCode {
    let f = c.field();
    let g = c.generator();
    let twisted = Mat::from_fn(f, g.rows(), g.cols(), |i, j| if j == 0 { g.get(i, j) } else { f.neg(g.get(i, j)) });
    LinearCode::from_generator(&twisted)
}

/// The three equivalent non-nestedness conditions for `C1` and a twisted `C2'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NonNested {
    /// `C2' ⊄ C1`.
    pub twisted_outside: bool,
    /// `C2 + C2' ⊄ C1`.
    pub sum_outside: bool,
    /// The code generated by `(c'_1, 0, …, 0)` is not inside `C1`.
    pub first_column_outside: bool,
}

impl NonNested {
    pub fn agree(&self) -> bool {
        self.twisted_outside == self.sum_outside && self.sum_outside == self.first_column_outside
    }
}

/// Evaluates the three conditions; needs `C2 = twist(C2') ⊆ C1` and errors if
/// the conditions disagree.
pub fn check_non_nested(c1: &LinearCode, c2_twisted: &LinearCode) -> Result<NonNested> {
    let c2 = monomial_twist(c2_twisted);
    require(c1.contains(&c2)?, || "the untwisted code is not a subcode of C1".into())?;
    let twisted_outside = !c1.contains(c2_twisted)?;
    let sum = LinearCode::from_generator(&c2.generator().vstack(c2_twisted.generator())?);
    let sum_outside = !c1.contains(&sum)?;
    let g2 = c2.generator();
    let first = Mat::from_fn(c1.field(), g2.rows(), g2.cols(), |i, j| if j == 0 { g2.get(i, 0) } else { 0 });
    let first_column_outside = !c1.contains(&LinearCode::from_generator(&first))?;
    let verdict = NonNested { twisted_outside, sum_outside, first_column_outside };
    if !verdict.agree() {
        return Err(Error::PostconditionFailed(format!("non-nestedness conditions disagree: {verdict:?}")));
    }
    Ok(verdict)
}

/// Quantum constructions, tagged as on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    Mp12,
    Mp22,
    Mpess4,
    Mp32,
    Mp31,
}

impl Theorem {
    pub const ALL: [Theorem; 5] = [Theorem::Mp12, Theorem::Mp22, Theorem::Mpess4, Theorem::Mp32, Theorem::Mp31];

    pub fn tag(self) -> &'static str {
        match self {
            Theorem::Mp12 => "mp12",
            Theorem::Mp22 => "mp22",
            Theorem::Mpess4 => "mpess4",
            Theorem::Mp32 => "mp32",
            Theorem::Mp31 => "mp31",
        }
    }

    pub fn duality(self) -> Duality {
        match self {
            Theorem::Mp32 | Theorem::Mp31 => Duality::Euclidean,
            _ => Duality::Hermitian,
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.tag())
    }
}

impl FromStr for Theorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.tag() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameters(format!("unknown theorem tag {s:?}")))
    }
}

/// Parameters shared by the quantum constructions; unused ones are ignored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumInput {
    pub q: usize,
    /// Number of constituents `N`.
    #[serde(rename = "N")]
    pub big_n: usize,
    pub t: usize,
    #[serde(default)]
    pub u: usize,
    #[serde(default)]
    pub v: usize,
    #[serde(default)]
    pub s: usize,
    #[serde(default)]
    pub l: usize,
    #[serde(default)]
    pub m: usize,
}

/// `[[n, k, d]]_q` with locality `(r, δ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumTriple {
    pub n: usize,
    pub k: i64,
    pub d: usize,
    pub q: usize,
    pub r: usize,
    pub delta: usize,
}

impl fmt::Display for QuantumTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{},{}]]_{}, ({},{})", self.n, self.k, self.d, self.q, self.r, self.delta)
    }
}

/// An assembled quantum construction with the parameters its theorem predicts.
#[derive(Clone, Debug)]
pub struct QuantumInstance {
    pub theorem: Theorem,
    pub input: QuantumInput,
    pub spec: MpSpec,
    pub expected: QuantumTriple,
    pub duality: Duality,
    pub tau: Option<Permutation>,
    pub construction: Construction,
    /// Constituent repair profile, `(r, δ)` of the theorem.
    pub constituent_construction: Construction,
    /// Hypotheses of the theorem that do not hold for `input`.
    pub violated: Vec<String>,
}

fn theorem_hypotheses(th: Theorem, p: &QuantumInput) -> Vec<String> {
    let (q, n, u, v, s, l, m, t) = (p.q, p.big_n, p.u, p.v, p.s, p.l, p.m, p.t);
    let mut bad = Vec::new();
    let mut need = |ok: bool, what: String| {
        if !ok {
            bad.push(what);
        }
    };
    let pp = prime_power_of(q).ok();
    need(pp.is_some(), format!("q = {q} is a prime power"));
    need(t >= 1, "t ≥ 1".into());
    let type_two = |need: &mut dyn FnMut(bool, String)| {
        need(n >= 1 && (q * q - 1) % n == 0, format!("N = {n} divides q² − 1 = {}", q * q - 1));
        need(n >= 1 && (q + 1) % n != 0, format!("N = {n} does not divide q + 1 = {}", q + 1));
    };
    match th {
        Theorem::Mp12 => {
            type_two(&mut need);
            need(q >= 5, "q ≥ 5".into());
            need(u >= 1, "u ≥ 1".into());
            need(v <= u, format!("v = {v} ≤ u = {u}"));
            need(2 * u + v + 2 <= q, format!("2u + v = {} ≤ q − 2 = {}", 2 * u + v, q.saturating_sub(2)));
        }
        Theorem::Mp22 => {
            type_two(&mut need);
            need(q >= 8, "q ≥ 8".into());
            need(s >= 1 && v >= 1, "s, v ≥ 1".into());
            need(v >= 1 && (q - 1) % v == 0, format!("v = {v} divides q − 1 = {}", q - 1));
            need(2 * s + l < v, format!("2s + l = {} ≤ v − 1 = {}", 2 * s + l, v.saturating_sub(1)));
            need(l <= s / 2 + 1, format!("l = {l} ≤ ⌊s/2⌋ + 1 = {}", s / 2 + 1));
            need(n * v * t + s + l + 2 <= q + v, format!("Nvt = {} ≤ q + v − s − l − 2", n * v * t));
        }
        Theorem::Mpess4 => {
            need(n == 2, format!("N = {n} = 2"));
            need(q >= 5 && q % 2 == 1, format!("q = {q} is odd and ≥ 5"));
            need(u >= 1, "u ≥ 1".into());
            need(v <= u, format!("v = {v} ≤ u = {u}"));
            need(2 * (u + v) + 3 <= q, format!("u + v = {} ≤ (q − 3)/2", u + v));
        }
        Theorem::Mp32 | Theorem::Mp31 => {
            need(q >= 5 && q % 2 == 1, format!("q = {q} is odd and ≥ 5"));
            need(n >= 3, format!("N = {n} ≥ 3"));
            let sdiv = n >= 2 && (q - 1) % (n - 1) == 0;
            need(sdiv, format!("N − 1 = {} divides q − 1 = {}", n.saturating_sub(1), q - 1));
            need(sdiv && (q - 1) / (n - 1) >= 2, "s = (q − 1)/(N − 1) ≥ 2".into());
            let p = pp.map_or(0, |x| x.0 as usize);
            if th == Theorem::Mp32 {
                need(p != 0 && n % p == 0, format!("p = {p} divides N = {n}"));
                need(2 * u + v < m, format!("2u + v = {} ≤ m − 1 = {}", 2 * u + v, m.saturating_sub(1)));
            } else {
                need(p != 0 && n % p != 0, format!("p = {p} does not divide N = {n}"));
                need(u + v < m / 2, format!("u + v = {} ≤ ⌊m/2⌋ − 1", u + v));
            }
            need(u >= 1 && m >= 1, "u, m ≥ 1".into());
            need(v <= u, format!("v = {v} ≤ u = {u}"));
            need(m >= 1 && (q - 1) % m == 0, format!("m = {m} divides q − 1 = {}", q - 1));
        }
    }
    bad
}

/// Assembles the construction of `theorem`. With `enforce`, any violated
/// hypothesis is an error; otherwise violations are recorded and the build is
/// attempted anyway.
pub fn build_quantum(theorem: Theorem, input: &QuantumInput, enforce: bool) -> Result<QuantumInstance> {
    let violated = theorem_hypotheses(theorem, input);
    if enforce && !violated.is_empty() {
        return Err(Error::HypothesisUnmet(violated.join("; ")));
    }
    let p = input;
    let big_n = p.big_n;
    let copies = |first: LinearCode, last: LinearCode| -> Vec<LinearCode> {
        let mut v = vec![first; big_n - 1];
        v.push(last);
        v
    };
    let (a, tau, constituents, constituent_construction, expected, base) = match theorem {
        Theorem::Mp12 | Theorem::Mpess4 => {
            let fa = FamilyAParams::new(p.q, p.u, p.v, p.t);
            let c1 = build_family_a(&fa.with_v(0))?;
            let cn = build_family_a(&fa)?;
            let e = fa.expected();
            let (a, tau, cs) = if theorem == Theorem::Mp12 {
                let (a, tau) = type_two_matrix(p.q as u32, big_n)?;
                (a, Some(tau), copies(c1, cn))
            } else {
                let f = c1.field().clone();
                let a = Mat::from_rows(&f, 2, &[vec![1, 1], vec![1, f.neg(1)]])?;
                (a, None, vec![c1, monomial_twist(&cn)])
            };
            (a, tau, cs, fa.construction(), e, p.q)
        }
        Theorem::Mp22 => {
            let fb = FamilyBParams::new(p.q, p.s, p.l, p.v, p.t);
            let c1 = LinearCode::from_parity_check(&family_b_parity_unchecked(&fb.with_l(0))?);
            let cn = LinearCode::from_parity_check(&family_b_parity_unchecked(&fb)?);
            let (a, tau) = type_two_matrix(p.q as u32, big_n)?;
            (a, Some(tau), copies(c1, cn), fb.construction(), fb.expected(), p.q)
        }
        Theorem::Mp32 | Theorem::Mp31 => {
            let fc = FamilyCParams::new(p.q, p.u, p.v, p.t, p.m);
            let c1 = build_family_c(&fc.with_v(0))?;
            let cn = build_family_c(&fc)?;
            let (_, tr) = type_one_matrix(p.q as u32, big_n)?;
            (tr.transformed, Some(tr.tau), copies(c1, cn), fc.construction(), fc.expected(), p.q)
        }
    };
    let n = constituents[0].len();
    let segments = constituents.len();
    let spec = MpSpec::new(a, constituents)?;
    // The first N − 1 constituents drop the global rows: v of them (l for family B),
    // which is exactly d − δ.
    let k1 = expected.k + expected.d - expected.delta;
    let dim = (segments - 1) * k1 + expected.k;
    let expected = QuantumTriple {
        n: segments * n,
        k: 2 * dim as i64 - (segments * n) as i64,
        d: expected.d,
        q: base,
        r: expected.r,
        delta: expected.delta,
    };
    let construction = Construction::MatrixProduct {
        constituent: Box::new(constituent_construction.clone()),
        n,
        segments,
        twisted: theorem == Theorem::Mpess4,
    };
    Ok(QuantumInstance {
        theorem,
        input: input.clone(),
        spec,
        expected,
        duality: theorem.duality(),
        tau,
        construction,
        constituent_construction,
        violated,
    })
}

/// Family B parity check with only the structural requirements enforced, for
/// reproducing instances outside a theorem's stated range.
fn family_b_parity_unchecked(p: &FamilyBParams) -> Result<Mat> {
    prime_power_of(p.q)?;
    require(p.s >= 1 && p.t >= 1 && p.v >= 1 && (p.q - 1).is_multiple_of(p.v), || {
        "family B needs s, t, v ≥ 1 and v | q − 1".into()
    })?;
    family_b_matrix(p)
}

/// Conditions (a) to (e) for `C` to induce an optimal quantum (r,δ)-LRC.
#[derive(Clone, Debug)]
pub struct QuantumParams {
    pub n: usize,
    pub dim: usize,
    /// `2·dim − n`.
    pub k: i64,
    pub distance: DistanceResult,
    pub r: usize,
    pub delta: usize,
    pub duality: Duality,
    /// (a)
    pub dual_containing: bool,
    /// (b) `k ≥ 0` and `dim = (n + k)/2`.
    pub dim_consistent: bool,
    /// (c) `δ ≤ d(C^⊥)`; `None` if undecided within budget.
    pub delta_within_dual_distance: Option<bool>,
    /// (d)
    pub locality: LocalityVerdict,
    /// (e) `k + 2d + 2(⌈(n+k)/(2r)⌉ − 1)(δ − 1) = n + 2`; `None` if `d` is not exact.
    pub equality: Option<bool>,
    /// The same statement as classical optimality of `C`.
    pub classical: OptimalityVerdict,
    /// (e) and its classical restatement agree.
    pub agreement: bool,
    pub optimal: bool,
    pub reasons: Vec<String>,
}

/// `k + 2d + 2(⌈(n+k)/(2r)⌉ − 1)(δ − 1) − (n + 2)`.
pub fn quantum_defect(n: usize, k: i64, d: usize, r: usize, delta: usize) -> i64 {
    let (n, d, r, delta) = (n as i64, d as i64, r as i64, delta as i64);
    let groups = (n + k + 2 * r - 1).div_euclid(2 * r);
    k + 2 * d + 2 * (groups - 1) * (delta - 1) - (n + 2)
}

/// Evaluates every condition on `c` with repair groups `profile`. A known
/// `distance` is reused.
pub fn derive_quantum_params(
    c: &LinearCode,
    profile: &RepairProfile,
    duality: Duality,
    distance: Option<DistanceResult>,
    budget: u64,
) -> Result<QuantumParams> {
    let (n, dim) = (c.len(), c.dim());
    let (r, delta) = (profile.r, profile.delta);
    let k = 2 * dim as i64 - n as i64;
    let mut reasons = Vec::new();
    let dual_containing = c.is_dual_containing(duality)?;
    if !dual_containing {
        reasons.push(format!("dual-containment: C^⊥{} ⊄ C", duality.as_str()));
    }
    let dim_consistent = k >= 0 && (n as i64 + k) % 2 == 0 && (n as i64 + k) / 2 == dim as i64;
    if !dim_consistent {
        reasons.push(format!("dimension: k = {k} is negative"));
    }
    let delta_within_dual_distance = c.dual(duality)?.distance_at_least(delta, budget);
    match delta_within_dual_distance {
        Some(false) => reasons.push(format!("dual distance: d(C^⊥) < δ = {delta}")),
        None => reasons.push("dual distance: not settled within budget".into()),
        Some(true) => {}
    }
    let distance = distance.unwrap_or_else(|| distance_for(c, Some(profile), budget));
    let classical = is_optimal_lrc_with(c, profile, distance.clone(), budget);
    let locality = classical.locality.clone();
    if !locality.verified {
        reasons.push(format!("locality: {}", locality.reason.clone().unwrap_or_default()));
    }
    let equality = distance.exact_value().map(|d| quantum_defect(n, k, d, r, delta) == 0);
    match equality {
        Some(false) => reasons.push(format!("equality: defect {}", quantum_defect(n, k, distance.lower, r, delta))),
        None => reasons.push(format!("distance: only bracketed in [{}, {}]", distance.lower, distance.upper)),
        Some(true) => {}
    }
    // The classical restatement includes the locality check; compare the
    // equality against the bound equality alone.
    let bound_met = classical.bound.is_some() && distance.exact_value().map(|d| d as i64) == classical.bound;
    let agreement = equality.is_none() || equality == Some(bound_met);
    if !agreement {
        reasons.push("equality and classical optimality disagree".into());
    }
    let optimal = dual_containing
        && dim_consistent
        && delta_within_dual_distance == Some(true)
        && locality.verified
        && equality == Some(true)
        && classical.optimal
        && agreement;
    Ok(QuantumParams {
        n,
        dim,
        k,
        distance,
        r,
        delta,
        duality,
        dual_containing,
        dim_consistent,
        delta_within_dual_distance,
        locality,
        equality,
        classical,
        agreement,
        optimal,
        reasons,
    })
}

impl QuantumInstance {
    pub fn code(&self) -> LinearCode {
        self.spec.code()
    }

    /// Candidate repair profiles for the MP code.
    pub fn candidates(&self) -> Result<Vec<RepairProfile>> {
        candidate_profiles(&self.construction, self.expected.r, self.expected.delta)
    }

    /// Candidate repair profiles for each constituent.
    pub fn constituent_candidates(&self) -> Result<Vec<RepairProfile>> {
        candidate_profiles(&self.constituent_construction, self.expected.r, self.expected.delta)
    }
}

/// Everything recomputed for a quantum instance.
#[derive(Clone, Debug)]
pub struct QuantumReport {
    pub expected: QuantumTriple,
    pub computed: Option<QuantumTriple>,
    pub profile: Option<RepairProfile>,
    pub params: QuantumParams,
    pub non_nested: Option<NonNested>,
    /// `expected == computed` and `params.optimal`.
    pub verified: bool,
}

/// Recomputes an instance from scratch: locality from candidates (then a
/// bounded search), exact distance, all quantum conditions, and for the
/// twisted construction the non-nestedness conditions.
pub fn verify_quantum(inst: &QuantumInstance, search_cap: u64, budget: u64) -> Result<QuantumReport> {
    let code = inst.code();
    let (r, delta) = (inst.expected.r, inst.expected.delta);
    let (mut profile, _) = verify_candidates(&code, &inst.candidates()?, budget);
    if profile.is_none() && search_cap > 0 {
        profile = search_locality(&code, r, delta, search_cap);
    }
    let used = match &profile {
        Some(p) => p.clone(),
        None => verdict_profile(&inst.candidates()?, r, delta, code.len()),
    };
    let params = derive_quantum_params(&code, &used, inst.duality, None, budget)?;
    let computed = params.distance.exact_value().map(|d| QuantumTriple {
        n: params.n,
        k: params.k,
        d,
        q: inst.expected.q,
        r,
        delta,
    });
    let non_nested = if inst.theorem == Theorem::Mpess4 {
        Some(check_non_nested(&inst.spec.constituents[0], &inst.spec.constituents[1])?)
    } else {
        None
    };
    let verified = computed == Some(inst.expected)
        && params.optimal
        && profile.is_some()
        && non_nested.is_none_or(|nn| nn.twisted_outside);
    Ok(QuantumReport { expected: inst.expected, computed, profile, params, non_nested, verified })
}

fn verdict_profile(candidates: &[RepairProfile], r: usize, delta: usize, n: usize) -> RepairProfile {
    candidates
        .first()
        .cloned()
        .unwrap_or_else(|| RepairProfile::new(r, delta, vec![(0..n).collect()]).expect("one group is valid"))
}

/// Checks a single family code: `[n, k, d]` against `expected` and optimality
/// under the family's own repair groups.
///
/// A known automorphism `symmetry` (checked) speeds up the distance search.
pub fn verify_family(
    code: &LinearCode,
    expected: LrcParams,
    construction: &Construction,
    symmetry: Option<&Permutation>,
    budget: u64,
) -> Result<FamilyCheck> {
    let candidates = candidate_profiles(construction, expected.r, expected.delta)?;
    let (profile, locality) = verify_candidates(code, &candidates, budget);
    let used = profile.clone().unwrap_or_else(|| verdict_profile(&candidates, expected.r, expected.delta, code.len()));
    let distance = match symmetry {
        Some(sigma) => code.distance_with_symmetry(sigma, budget)?,
        None => distance_for(code, Some(&used), budget),
    };
    let verdict = is_optimal_lrc_with(code, &used, distance.clone(), budget);
    let matches = code.len() == expected.n && code.dim() == expected.k && distance.exact_value() == Some(expected.d);
    Ok(FamilyCheck { expected, n: code.len(), k: code.dim(), distance, locality, verdict, profile, matches })
}

#[derive(Clone, Debug)]
pub struct FamilyCheck {
    pub expected: LrcParams,
    pub n: usize,
    pub k: usize,
    pub distance: DistanceResult,
    pub locality: LocalityVerdict,
    pub verdict: OptimalityVerdict,
    pub profile: Option<RepairProfile>,
    pub matches: bool,
}

impl FamilyCheck {
    pub fn passed(&self) -> bool {
        self.matches && self.verdict.optimal
    }
}
