//! Matrix-product codes `C(A) = [C_1, .., C_N]·A` and the theory of their
//! defining matrices: prefix distances, NSC and τ-OD matrices, the greedy
//! τ rule, unit lower triangular congruences and the optimality criteria.

use crate::code::{hermitian_base, DistanceResult, Duality, LinearCode};
use crate::error::{Error, Result};
use crate::galois::{Field, GaloisField};
use crate::locality::{
    candidate_profiles, is_optimal_lrc_with, search_locality, verify_candidates, distance_for, Construction,
    OptimalityVerdict, RepairProfile,
};
use crate::matrix::{Mat, Permutation};

/// A defining matrix together with its constituent codes.
#[derive(Clone, Debug)]
pub struct MpSpec {
    pub a: Mat,
    pub constituents: Vec<LinearCode>,
}

impl MpSpec {
    pub fn new(a: Mat, constituents: Vec<LinearCode>) -> Result<Self> {
        if constituents.len() != a.rows() {
            return Err(Error::ShapeMismatch(format!(
                "{} constituents for a {}-row defining matrix",
                constituents.len(),
                a.rows()
            )));
        }
        if a.rows() == 0 || a.rows() > a.cols() {
            return Err(Error::ShapeMismatch(format!("defining matrix is {}x{}; need 1 ≤ N ≤ M", a.rows(), a.cols())));
        }
        let n = constituents[0].len();
        for c in &constituents {
            if c.field() != a.field() {
                return Err(Error::FieldMismatch { left: a.field().order(), right: c.field().order() });
            }
            if c.len() != n {
                return Err(Error::LengthMismatch(n, c.len()));
            }
        }
        Ok(MpSpec { a, constituents })
    }

    pub fn field(&self) -> &Field {
        self.a.field()
    }

    /// Constituent length `n`.
    pub fn n(&self) -> usize {
        self.constituents[0].len()
    }

    pub fn big_n(&self) -> usize {
        self.a.rows()
    }

    pub fn big_m(&self) -> usize {
        self.a.cols()
    }

    /// `C_1 ⊇ C_2 ⊇ … ⊇ C_N`, in the given order.
    pub fn is_nested(&self) -> bool {
        self.constituents.windows(2).all(|w| w[0].contains(&w[1]).unwrap_or(false))
    }

    pub fn code(&self) -> LinearCode {
        LinearCode::from_generator(&mp_generator(self))
    }

    /// Same constituents under `L·A`.
    pub fn with_matrix(&self, a: Mat) -> Result<Self> {
        MpSpec::new(a, self.constituents.clone())
    }
}

/// Block generator with `(i, j)` block `a_ij · G_i`.
pub fn mp_generator(spec: &MpSpec) -> Mat {
    let f = spec.field().clone();
    let (n, m) = (spec.n(), spec.big_m());
    let total: usize = spec.constituents.iter().map(LinearCode::dim).sum();
    let mut g = Mat::zeros(&f, total, m * n);
    let mut row = 0;
    for (i, c) in spec.constituents.iter().enumerate() {
        let gi = c.generator();
        for r in 0..gi.rows() {
            for j in 0..m {
                let a = spec.a.get(i, j);
                if a == 0 {
                    continue;
                }
                for col in 0..n {
                    g.set(row, j * n + col, f.mul(a, gi.get(r, col)));
                }
            }
            row += 1;
        }
    }
    g
}

/// `D_i(A)` for `i = 1..N`: distances of the codes spanned by row prefixes.
pub fn prefix_distances(a: &Mat) -> Vec<usize> {
    (1..=a.rows())
        .map(|i| {
            let prefix = a.select_rows(&(0..i).collect::<Vec<_>>());
            let d = LinearCode::from_generator(&prefix).min_distance(u64::MAX);
            d.exact_value().expect("unbounded budget")
        })
        .collect()
}

/// Every `i x i` submatrix of the first `i` rows is invertible.
pub fn is_nsc(a: &Mat) -> bool {
    let (big_n, m) = (a.rows(), a.cols());
    if big_n > m {
        return false;
    }
    for i in 1..=big_n {
        let rows: Vec<usize> = (0..i).collect();
        let mut cols: Vec<usize> = (0..i).collect();
        loop {
            if a.minor(&rows, &cols).expect("indices are in range") == 0 {
                return false;
            }
            if !crate::locality::next_combination(&mut cols, m) {
                break;
            }
        }
    }
    true
}

/// `A·Aᵀ` or `A·A†`.
pub fn gram(a: &Mat, duality: Duality) -> Result<Mat> {
    match duality {
        Duality::Euclidean => a.mul(&a.transpose()),
        Duality::Hermitian => a.mul(&a.conj_transpose(hermitian_base(a.field())?)?),
    }
}

/// Greedy τ: `τ(1)` is the first nonzero column of row 1, and `τ(i)` the
/// least unused column `s` with `minor(M, {1..i}, {τ(1..i−1), s}) ≠ 0`.
pub fn derive_tau(m: &Mat) -> Result<Permutation> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch("derive_tau needs a square matrix".into()));
    }
    let n = m.rows();
    let mut image: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for i in 0..n {
        let rows: Vec<usize> = (0..=i).collect();
        let mut found = None;
        for s in (0..n).filter(|&s| !used[s]) {
            let mut cols = image.clone();
            cols.push(s);
            if m.minor(&rows, &cols)? != 0 {
                found = Some(s);
                break;
            }
        }
        let s = found.ok_or(Error::NotDerivable { step: i + 1 })?;
        used[s] = true;
        image.push(s);
    }
    Permutation::new(image)
}

/// `L` unit lower triangular with `L·Gram·L*` τ-monomial, and `L·A`.
#[derive(Clone, Debug)]
pub struct TriangularTransform {
    pub l: Mat,
    pub tau: Permutation,
    /// `L·Gram(A)·L*`.
    pub monomial: Mat,
    /// `L·A`.
    pub transformed: Mat,
}

/// Builds `L` for an invertible square `A` over a field of odd characteristic.
///
/// τ comes from [`derive_tau`] on the Gram matrix. The rows `b_i` of `L·A`
/// are then orthogonalized in order: `b_i` is made orthogonal to every
/// earlier `b_k` except its partner `τ(i)`, and isotropic when `τ(i) ≠ i`
/// (this is where odd characteristic is needed). Earlier rows still waiting
/// for their partner are corrected with `b_{τ(i)}` when that comes first.
/// The result is checked.
pub fn build_unit_lower_l(a: &Mat, duality: Duality) -> Result<TriangularTransform> {
    let f = a.field().clone();
    if !a.is_square() {
        return Err(Error::ShapeMismatch("defining matrix must be square".into()));
    }
    if f.characteristic() == 2 {
        return Err(Error::HypothesisUnmet("characteristic must be odd".into()));
    }
    if a.det()? == 0 {
        return Err(Error::HypothesisUnmet("defining matrix is singular".into()));
    }
    let n = a.rows();
    let q0 = match duality {
        Duality::Euclidean => None,
        Duality::Hermitian => Some(hermitian_base(&f)?),
    };
    let conj = |x: u32| q0.map_or(x, |q0| f.conjugate(x, q0).unwrap());
    let m = gram(a, duality)?;
    let tau = derive_tau(&m)?;
    // form(x, y) = x · M · conj(y)ᵀ, the form in the coordinates of A's rows.
    let form = |x: &[u32], y: &[u32]| -> u32 {
        let mut acc = 0;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                if yj != 0 {
                    acc = f.add(acc, f.mul(xi, f.mul(m.get(i, j), conj(yj))));
                }
            }
        }
        acc
    };
    let post = |why: String| Error::PostconditionFailed(why);
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![0u32; n];
        e[i] = 1;
        // b_i = a_i + Σ y_k b_k over k < i.
        let mut b = e.clone();
        let partner = tau.apply(i);
        if partner < i {
            // A pending row b_k (partner after i) must end up orthogonal to
            // b_i. Adding a multiple of b_p, the partner of i, changes no
            // other product, and is allowed when p < k.
            let pivot = form(&e, &rows[partner]);
            for k in partner + 1..i {
                let target = form(&e, &rows[k]);
                if tau.apply(k) > i && target != 0 {
                    let conj_z = f.neg(f.div(target, pivot).map_err(|_| post(format!("row {} is orthogonal to its partner", i + 1)))?);
                    let src = rows[partner].clone();
                    axpy(&f, &mut rows[k], &src, conj(conj_z));
                }
            }
        }
        for k in 0..i {
            let tk = tau.apply(k);
            if tk < i {
                // Completed pair (k, τ(k)): clear <b_i, b_k> with b_{τ(k)}.
                let target = form(&e, &rows[k]);
                if target != 0 {
                    let denom = form(&rows[tk], &rows[k]);
                    let y = f.neg(f.div(target, denom).map_err(|_| post(format!("row {} has a null partner", k + 1)))?);
                    axpy(&f, &mut b, &rows[tk], y);
                }
            } else if tk != i && form(&e, &rows[k]) != 0 {
                return Err(post(format!("row {} is not orthogonal to pending row {}", i + 1, k + 1)));
            }
        }
        if partner < i {
            // Make b_i isotropic using its partner b_p (itself isotropic and
            // orthogonal to everything else so far).
            let cc = form(&b, &b);
            if cc != 0 {
                let beta = form(&b, &rows[partner]);
                let z = f.neg(f.div(cc, f.add(1, 1)).unwrap());
                // Solve conj(y)·β = z, so that y·conj(β) + conj(y)·β = −<c, c>.
                let conj_y = f.div(z, beta).map_err(|_| post(format!("row {} is orthogonal to its partner", i + 1)))?;
                axpy(&f, &mut b, &rows[partner], conj(conj_y));
            }
        }
        rows.push(b);
    }
    let l = Mat::from_rows(&f, n, &rows)?;
    let transformed = l.mul(a)?;
    let monomial = gram(&transformed, duality)?;
    let pattern = monomial.monomial_pattern().map_err(|_| post("L·Gram·L* is not monomial".into()))?;
    if pattern != tau {
        return Err(post(format!("L·Gram·L* has pattern {pattern}, expected {tau}")));
    }
    for i in 0..n {
        if l.get(i, i) != 1 || (i + 1..n).any(|j| l.get(i, j) != 0) {
            return Err(post("L is not unit lower triangular".into()));
        }
    }
    Ok(TriangularTransform { l, tau, monomial, transformed })
}

fn axpy(f: &GaloisField, dst: &mut [u32], src: &[u32], a: u32) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = f.add(*d, f.mul(a, s));
    }
}

/// Outcome of a τ-OD test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TauOd {
    Yes(Permutation),
    No(String),
}

impl TauOd {
    pub fn tau(&self) -> Option<&Permutation> {
        match self {
            TauOd::Yes(t) => Some(t),
            TauOd::No(_) => None,
        }
    }
}

/// NSC with a τ-monomial Gram matrix.
pub fn is_tau_od(a: &Mat, duality: Duality) -> Result<TauOd> {
    if !a.is_square() {
        return Ok(TauOd::No("matrix is not square".into()));
    }
    if !is_nsc(a) {
        return Ok(TauOd::No("matrix is not NSC".into()));
    }
    match gram(a, duality)?.monomial_pattern() {
        Ok(tau) => Ok(TauOd::Yes(tau)),
        Err(_) => Ok(TauOd::No("Gram matrix is not monomial".into())),
    }
}

/// `F_ij = ω^{ij}` (0-based) with `ω` of order `N`.
pub fn fourier_matrix(field: &Field, n: usize) -> Result<Mat> {
    let w = field.root_of_unity(n as u32)?;
    Ok(Mat::from_fn(field, n, n, |i, j| field.pow(w, (i * j) as i64).unwrap()))
}

/// `τ(i+1) = t_i + 1` with `i + q·t_i ≡ 0 (mod N)`.
pub fn fourier_tau(q: u32, n: usize) -> Result<Permutation> {
    let image = (0..n)
        .map(|i| {
            (0..n)
                .find(|&t| (i + q as usize % n * t).is_multiple_of(n))
                .ok_or_else(|| Error::HypothesisUnmet(format!("gcd(q, N) ≠ 1 for q={q}, N={n}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Permutation::new(image)
}

/// Type II τ-OD Fourier matrix over GF(q²); needs `N | q²−1` and `N ∤ q+1`.
pub fn type_two_matrix(q: u32, n: usize) -> Result<(Mat, Permutation)> {
    let (p, e) = crate::galois::prime_power(q).ok_or(Error::NotPrimePower(q))?;
    let big = (q as u64 * q as u64 - 1) as usize;
    if n == 0 || !big.is_multiple_of(n) {
        return Err(Error::HypothesisUnmet(format!("N={n} does not divide q²−1={big}")));
    }
    if (q as usize + 1).is_multiple_of(n) {
        return Err(Error::HypothesisUnmet(format!("N={n} divides q+1={}", q + 1)));
    }
    let f = GaloisField::new(p, 2 * e)?;
    let a = fourier_matrix(&f, n)?;
    match is_tau_od(&a, Duality::Hermitian)? {
        TauOd::Yes(t) => Ok((a, t)),
        TauOd::No(why) => Err(Error::PostconditionFailed(format!("Fourier matrix is not τ-OD: {why}"))),
    }
}

/// The type I construction over GF(q) for `q − 1 = (N − 1)s`, `N ≥ 3`, `s ≥ 2`:
/// row 1 all ones, rows `2..N−1` are `(0, 1, g^{js}, g^{2js}, …)`, row `N` is
/// `(0, 1, …, 1)`. Its Gram matrix is not monomial by itself.
pub fn type_one_base(q: u32, n: usize) -> Result<Mat> {
    let (p, e) = crate::galois::prime_power(q).ok_or(Error::NotPrimePower(q))?;
    if p == 2 {
        return Err(Error::HypothesisUnmet("q must be odd".into()));
    }
    if n < 3 {
        return Err(Error::HypothesisUnmet(format!("N={n} < 3")));
    }
    if !(q as usize - 1).is_multiple_of(n - 1) {
        return Err(Error::HypothesisUnmet(format!("N−1={} does not divide q−1={}", n - 1, q - 1)));
    }
    let s = (q as usize - 1) / (n - 1);
    if s < 2 {
        return Err(Error::HypothesisUnmet(format!("s=(q−1)/(N−1)={s} < 2")));
    }
    let f = GaloisField::new(p, e)?;
    Ok(Mat::from_fn(&f, n, n, |i, j| match (i, j) {
        (0, _) => 1,
        (_, 0) => 0,
        (i, j) if i == n - 1 => {
            let _ = j;
            1
        }
        (i, j) => f.exp((i * (j - 1) * s) as i64),
    }))
}

/// Closed-form τ for the type I construction: `Π_{i≥1}(i, N+1−i)` when `p | N`,
/// `Π_{i≥2}(i, N+1−i)` otherwise.
pub fn type_one_tau(p: u32, n: usize) -> Permutation {
    let start = if n.is_multiple_of(p as usize) { 1 } else { 2 };
    let pairs: Vec<(usize, usize)> = (start..=n.div_ceil(2)).filter(|&i| i != n + 1 - i).map(|i| (i, n + 1 - i)).collect();
    Permutation::from_transpositions(n, &pairs).expect("pairs are in range")
}

/// Type I τ-OD matrix `L·A` from [`type_one_base`].
pub fn type_one_matrix(q: u32, n: usize) -> Result<(Mat, TriangularTransform)> {
    let a = type_one_base(q, n)?;
    let t = build_unit_lower_l(&a, Duality::Euclidean)?;
    match is_tau_od(&t.transformed, Duality::Euclidean)? {
        TauOd::Yes(tau) if tau == t.tau => Ok((a, t)),
        TauOd::Yes(tau) => Err(Error::PostconditionFailed(format!("τ mismatch: {tau} vs {}", t.tau))),
        TauOd::No(why) => Err(Error::PostconditionFailed(why)),
    }
}

/// Distance of `C(A)` against the product bound `min D_i·d_i`.
#[derive(Clone, Debug)]
pub struct MpDistanceCheck {
    pub distance: DistanceResult,
    pub nested: bool,
    pub prefix: Vec<usize>,
    pub constituent_distances: Vec<usize>,
    pub lower_bound: usize,
    /// Nested: `d = bound`. Otherwise: `d ≥ bound`.
    pub consistent: bool,
}

/// Computes `d(C(A))` (with `profile` as a partition hint) and compares it with
/// the product bound.
pub fn mp_distance_check(spec: &MpSpec, profile: Option<&RepairProfile>, budget: u64) -> MpDistanceCheck {
    let prefix = prefix_distances(&spec.a);
    let constituent_distances: Vec<usize> = spec
        .constituents
        .iter()
        .map(|c| c.min_distance(budget).upper)
        .collect();
    let lower_bound = prefix.iter().zip(&constituent_distances).map(|(a, b)| a * b).min().unwrap_or(0);
    let nested = spec.is_nested();
    let distance = distance_for(&spec.code(), profile, budget);
    let consistent = match distance.exact_value() {
        Some(d) if nested => d == lower_bound,
        Some(d) => d >= lower_bound,
        None => false,
    };
    MpDistanceCheck { distance, nested, prefix, constituent_distances, lower_bound, consistent }
}

/// Evaluation of the MP optimality criteria against direct verification.
#[derive(Clone, Debug)]
pub struct CriterionVerdict {
    pub j0: usize,
    pub dims: Vec<usize>,
    pub distances: Vec<usize>,
    pub mp_distance: usize,
    pub condition1: bool,
    pub condition2: bool,
    /// `(1) ∧ (2)`.
    pub predicted: bool,
    /// `D_{N−1}(A)` and the case verdict, for nested constituents and square invertible `A`.
    pub case: Option<(usize, bool)>,
    pub direct: OptimalityVerdict,
    pub profile: Option<RepairProfile>,
    pub agrees: bool,
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Checks the hypotheses of the criterion, evaluates its conditions and
/// compares with a direct optimality check of `C(A)`.
///
/// `constituent_profiles[i]` must verify `C_i` as an optimal (r,δ)-LRC.
/// The MP code's repair groups come from `mp_candidates`, then from an
/// exhaustive search when `search_cap > 0`.
pub fn optimality_criterion(
    spec: &MpSpec,
    constituent_profiles: &[RepairProfile],
    mp_candidates: &[RepairProfile],
    search_cap: u64,
    budget: u64,
) -> Result<CriterionVerdict> {
    let big_n = spec.big_n();
    let Some(first) = constituent_profiles.first() else {
        return Err(Error::InvalidParameters("no constituent profiles".into()));
    };
    let (r, delta) = (first.r, first.delta);
    if constituent_profiles.len() != big_n || constituent_profiles.iter().any(|p| p.r != r || p.delta != delta) {
        return Err(Error::InvalidParameters("need one profile per constituent with common (r,δ)".into()));
    }
    let mut dims = Vec::with_capacity(big_n);
    let mut distances = Vec::with_capacity(big_n);
    for (i, (c, p)) in spec.constituents.iter().zip(constituent_profiles).enumerate() {
        let d = distance_for(c, Some(p), budget);
        let v = is_optimal_lrc_with(c, p, d.clone(), budget);
        if !v.optimal {
            return Err(Error::HypothesisUnmet(format!(
                "constituent {} is not an optimal ({r},{delta})-LRC: {}",
                i + 1,
                v.reason.unwrap_or_default()
            )));
        }
        dims.push(c.dim());
        distances.push(d.lower);
    }

    let code = spec.code();
    let (mut profile, _) = verify_candidates(&code, mp_candidates, budget);
    if profile.is_none() && search_cap > 0 {
        profile = search_locality(&code, r, delta, search_cap);
    }
    let Some(profile) = profile else {
        return Err(Error::HypothesisUnmet(format!("C(A) has no verified ({r},{delta}) repair profile")));
    };
    let d = distance_for(&code, Some(&profile), budget);
    let Some(mp_distance) = d.exact_value() else {
        return Err(Error::HypothesisUnmet("d(C(A)) not settled within budget".into()));
    };
    let nested = spec.is_nested();
    let j0 = if nested {
        big_n - 1
    } else {
        (0..big_n)
            .rev()
            .find(|&j| mp_distance <= distances[j])
            .ok_or_else(|| Error::HypothesisUnmet(format!("d(C(A)) = {mp_distance} exceeds every d_j")))?
    };
    if mp_distance > distances[j0] {
        return Err(Error::HypothesisUnmet(format!("d(C(A)) = {mp_distance} > d_N = {}", distances[j0])));
    }

    let condition1 = (0..big_n).all(|i| i == j0 || distances[i] == delta) && mp_distance == distances[j0];
    let k_sum: usize = dims.iter().sum();
    let condition2 = ceil_div(k_sum, r) == dims.iter().map(|&k| ceil_div(k, r)).sum::<usize>();
    let predicted = condition1 && condition2;

    let case = if nested && big_n >= 2 && spec.a.is_square() && spec.a.det()? != 0 {
        let dn1 = prefix_distances(&spec.a)[big_n - 2];
        let c = &spec.constituents;
        let k1 = dims[0];
        let holds = match dn1 {
            1 => {
                c.iter().all(|x| x == &c[0])
                    && distances.iter().all(|&d| d == delta)
                    && ceil_div(big_n * k1, r) == big_n * ceil_div(k1, r)
            }
            2 => {
                let kn = dims[big_n - 1];
                c[..big_n - 1].iter().all(|x| x == &c[0])
                    && distances[..big_n - 1].iter().all(|&d| d == delta)
                    && distances[big_n - 1] <= 2 * delta
                    && ceil_div((big_n - 1) * k1 + kn, r) == (big_n - 1) * ceil_div(k1, r) + ceil_div(kn, r)
            }
            _ => false,
        };
        Some((dn1, holds))
    } else {
        None
    };

    let direct = is_optimal_lrc_with(&code, &profile, d, budget);
    let agrees = direct.optimal == predicted && case.is_none_or(|(_, holds)| holds == direct.optimal);
    Ok(CriterionVerdict {
        j0,
        dims,
        distances,
        mp_distance,
        condition1,
        condition2,
        predicted,
        case,
        direct,
        profile: Some(profile),
        agrees,
    })
}

/// Candidate repair profiles for an MP code over constituents of a given construction.
pub fn mp_candidates(constituent: &Construction, n: usize, segments: usize, twisted: bool, r: usize, delta: usize) -> Result<Vec<RepairProfile>> {
    candidate_profiles(
        &Construction::MatrixProduct { constituent: Box::new(constituent.clone()), n, segments, twisted },
        r,
        delta,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::DEFAULT_BUDGET;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(q: u32) -> Field {
        GaloisField::with_order(q).unwrap()
    }

    fn hadamard(f: &Field) -> Mat {
        Mat::from_rows(f, 2, &[vec![1, 1], vec![1, f.neg(1)]]).unwrap()
    }

    #[test]
    fn example_generator() {
        let f = gf(7);
        let m1 = f.neg(1);
        let a = Mat::from_rows(&f, 2, &[vec![1, m1], vec![1, 1]]).unwrap();
        let c1 = LinearCode::from_generator(&Mat::from_rows(&f, 2, &[vec![1, 1]]).unwrap());
        let c2 = LinearCode::from_generator(&Mat::from_rows(&f, 2, &[vec![1, m1]]).unwrap());
        let spec = MpSpec::new(a, vec![c1, c2]).unwrap();
        let g = mp_generator(&spec);
        assert_eq!(g, Mat::from_rows(&f, 4, &[vec![1, 1, m1, m1], vec![1, m1, 1, m1]]).unwrap());
        let code = spec.code();
        assert_eq!(code.min_distance(DEFAULT_BUDGET).exact_value(), Some(2));
        let p14 = code.puncture(&[0, 3]).unwrap();
        assert_eq!((p14.dim(), p14.min_distance(DEFAULT_BUDGET).exact_value()), (1, Some(2)));
        let found = search_locality(&code, 1, 2, 100_000).unwrap();
        assert_eq!(found.groups, vec![vec![0, 3], vec![1, 2]]);
    }

    #[test]
    fn identity_defining_matrix_is_block_diagonal() {
        let f = gf(5);
        let c1 = LinearCode::from_generator(&Mat::from_rows(&f, 3, &[vec![1, 2, 3]]).unwrap());
        let c2 = LinearCode::full(&f, 3);
        let spec = MpSpec::new(Mat::identity(&f, 2), vec![c1.clone(), c2]).unwrap();
        let code = spec.code();
        assert_eq!(code.dim(), 4);
        assert_eq!(prefix_distances(&spec.a), vec![1, 1]);
        assert!(!spec.is_nested());
        assert!(MpSpec::new(Mat::identity(&f, 2), vec![c1]).is_err());
    }

    #[test]
    fn prefix_and_nsc() {
        let f = gf(7);
        let h = hadamard(&f);
        assert_eq!(prefix_distances(&h), vec![2, 1]);
        assert!(is_nsc(&h));
        assert!(!is_nsc(&Mat::identity(&f, 2)));
        let f9 = gf(9);
        let a = type_one_base(9, 3).unwrap();
        assert!(is_nsc(&a));
        assert_eq!(a.field(), &f9);
    }

    #[test]
    fn derive_tau_examples() {
        let f = gf(7);
        let d = Mat::from_fn(&f, 3, 3, |i, j| if i == j { (i + 1) as u32 } else { 0 });
        assert!(derive_tau(&d).unwrap().is_identity());
        let anti = Mat::from_fn(&f, 3, 3, |i, j| if i + j == 2 { 2 } else { 0 });
        assert_eq!(derive_tau(&anti).unwrap().to_string(), "(1 3)");
        assert!(matches!(derive_tau(&Mat::zeros(&f, 2, 2)), Err(Error::NotDerivable { step: 1 })));
    }

    #[test]
    fn hadamard_needs_no_transform() {
        let f = gf(7);
        let t = build_unit_lower_l(&hadamard(&f), Duality::Euclidean).unwrap();
        assert_eq!(t.l, Mat::identity(&f, 2));
        assert!(t.tau.is_identity());
        assert_eq!(t.monomial, Mat::identity(&f, 2).scale(2));
    }

    #[test]
    fn isotropic_pair_is_resolved() {
        // Gram [[0,1],[1,m]] needs L_21 = −m/2, not −m.
        let f = gf(5);
        let m = Mat::from_rows(&f, 2, &[vec![0, 1], vec![1, 3]]).unwrap();
        let mut found = None;
        'outer: for x in 0..25u32 {
            for y in 0..25u32 {
                let a = Mat::from_rows(&f, 2, &[vec![x / 5, x % 5], vec![y / 5, y % 5]]).unwrap();
                if gram(&a, Duality::Euclidean).unwrap() == m {
                    found = Some(a);
                    break 'outer;
                }
            }
        }
        let a = found.unwrap();
        let t = build_unit_lower_l(&a, Duality::Euclidean).unwrap();
        assert_eq!(t.tau.to_string(), "(1 2)");
    }

    #[test]
    fn random_matrices_decompose() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &q in &[9u32, 25, 49] {
            let f = gf(q);
            for kind in [Duality::Euclidean, Duality::Hermitian] {
                for _ in 0..30 {
                    let n = rng.gen_range(2..=4);
                    let a = Mat::from_fn(&f, n, n, |_, _| rng.gen_range(0..q));
                    if a.det().unwrap() == 0 {
                        continue;
                    }
                    let t = build_unit_lower_l(&a, kind).unwrap();
                    assert_eq!(t.monomial.monomial_pattern().unwrap(), t.tau);
                }
            }
        }
    }

    /// Whether some unit lower triangular `L` makes `L·G·L*` monomial, by
    /// trying every `L`.
    fn monomial_congruence_exists(g: &Mat, duality: Duality) -> bool {
        let f = g.field();
        let (n, q) = (g.rows(), f.order());
        let slots: Vec<(usize, usize)> = (1..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        (0..q.pow(slots.len() as u32)).any(|mut idx| {
            let mut l = Mat::identity(f, n);
            for &(i, j) in &slots {
                l.set(i, j, idx % q);
                idx /= q;
            }
            let lt = match duality {
                Duality::Euclidean => l.transpose(),
                Duality::Hermitian => l.conj_transpose(hermitian_base(f).unwrap()).unwrap(),
            };
            l.mul(g).unwrap().mul(&lt).unwrap().monomial_pattern().is_ok()
        })
    }

    #[test]
    fn decomposition_matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (q, n, kind, trials) in [(3, 3, Duality::Euclidean, 300), (3, 4, Duality::Euclidean, 60), (5, 3, Duality::Euclidean, 200), (9, 3, Duality::Hermitian, 100)] {
            let f = gf(q);
            for _ in 0..trials {
                let a = Mat::from_fn(&f, n, n, |_, _| rng.gen_range(0..q));
                if a.det().unwrap() == 0 {
                    continue;
                }
                let built = build_unit_lower_l(&a, kind).is_ok();
                assert_eq!(built, monomial_congruence_exists(&gram(&a, kind).unwrap(), kind), "{:?}", a.row_vecs());
            }
        }
    }

    #[test]
    fn pending_row_is_corrected_by_a_later_pair() {
        // Gram [[0,0,2,0],[0,0,1,1],[2,1,4,6],[0,1,6,4]], τ = (1 3)(2 4): row 2
        // of L·A needs a multiple of row 1 for row 3 to be orthogonal to it.
        let f = gf(7);
        let a = Mat::from_rows(&f, 4, &[vec![0, 4, 6, 2], vec![4, 0, 5, 6], vec![5, 4, 2, 1], vec![2, 6, 2, 3]]).unwrap();
        let t = build_unit_lower_l(&a, Duality::Euclidean).unwrap();
        assert_eq!(t.tau.to_string(), "(1 3)(2 4)");
        assert_ne!(t.l.get(1, 0), 0);
    }

    #[test]
    fn fourier_tau_for_q7() {
        let (a, tau) = type_two_matrix(7, 3).unwrap();
        assert_eq!(tau.to_string(), "(2 3)");
        assert_eq!(fourier_tau(7, 3).unwrap(), tau);
        assert_eq!(derive_tau(&gram(&a, Duality::Hermitian).unwrap()).unwrap(), tau);
        assert!(matches!(type_two_matrix(7, 4), Err(Error::HypothesisUnmet(_))));
    }

    #[test]
    fn type_one_examples() {
        let (_, t) = type_one_matrix(9, 3).unwrap();
        assert_eq!(t.tau.to_string(), "(1 3)");
        assert_eq!(type_one_tau(3, 3), t.tau);
        let (_, t) = type_one_matrix(13, 3).unwrap();
        assert!(t.tau.is_identity());
        assert!(type_one_matrix(7, 3).is_ok());
        assert!(matches!(type_one_base(5, 5), Err(Error::HypothesisUnmet(_))));
    }

    #[test]
    fn tau_od_rejects_identity() {
        let f = gf(7);
        assert!(matches!(is_tau_od(&Mat::identity(&f, 3), Duality::Euclidean).unwrap(), TauOd::No(_)));
    }

    fn code(f: &Field, n: usize, rows: &[Vec<u32>]) -> LinearCode {
        LinearCode::from_generator(&Mat::from_rows(f, n, rows).unwrap())
    }

    #[test]
    fn identity_with_non_nested_mds_constituents() {
        let f = gf(7);
        let c1 = LinearCode::from_parity_check(&Mat::from_rows(&f, 3, &[vec![1, 1, 1]]).unwrap());
        let c2 = LinearCode::from_parity_check(&Mat::from_rows(&f, 3, &[vec![1, 2, 3]]).unwrap());
        assert!(!c1.contains(&c2).unwrap() && !c2.contains(&c1).unwrap());
        let spec = MpSpec::new(Mat::identity(&f, 2), vec![c1, c2]).unwrap();
        let check = mp_distance_check(&spec, None, DEFAULT_BUDGET);
        assert!(!check.nested);
        assert_eq!(check.distance.exact_value(), Some(2));
        let p = RepairProfile::new(2, 2, vec![vec![0, 1, 2]]).unwrap();
        let v = optimality_criterion(&spec, &[p.clone(), p], &[], 1_000_000, DEFAULT_BUDGET).unwrap();
        assert!(v.condition1 && v.condition2 && v.predicted);
        assert!(v.direct.optimal && v.agrees);
        assert_eq!(v.j0, 1);
    }

    #[test]
    fn condition_two_violation_is_not_optimal() {
        let f = gf(5);
        let c1 = code(&f, 2, &[vec![1, 1]]);
        let c2 = code(&f, 2, &[vec![1, 2]]);
        let spec = MpSpec::new(Mat::identity(&f, 2), vec![c1, c2]).unwrap();
        let p = RepairProfile::new(2, 2, vec![vec![0, 1]]).unwrap();
        let v = optimality_criterion(&spec, &[p.clone(), p], &[], 1_000_000, DEFAULT_BUDGET).unwrap();
        assert!(v.condition1 && !v.condition2);
        assert!(!v.direct.optimal && v.agrees);
    }

    #[test]
    fn non_optimal_constituent_is_rejected() {
        let f = gf(5);
        let c = code(&f, 3, &[vec![1, 1, 0]]);
        let spec = MpSpec::new(hadamard(&f), vec![c.clone(), c]).unwrap();
        let p = RepairProfile::new(1, 2, vec![vec![0, 1], vec![2]]).unwrap();
        assert!(matches!(
            optimality_criterion(&spec, &[p.clone(), p], &[], 0, DEFAULT_BUDGET),
            Err(Error::HypothesisUnmet(_))
        ));
    }

    #[test]
    fn single_constituent() {
        let f = gf(7);
        let c = code(&f, 4, &[vec![1, 2, 3, 4], vec![0, 1, 1, 5]]);
        let spec = MpSpec::new(Mat::identity(&f, 1), vec![c.clone()]).unwrap();
        let check = mp_distance_check(&spec, None, DEFAULT_BUDGET);
        assert_eq!(check.distance.exact_value(), c.min_distance(DEFAULT_BUDGET).exact_value());
        assert!(check.consistent && check.nested);
    }

    fn random_invertible(rng: &mut ChaCha8Rng, f: &Field, n: usize) -> Mat {
        loop {
            let a = Mat::from_fn(f, n, n, |_, _| rng.gen_range(0..f.order()));
            if a.det().unwrap() != 0 {
                return a;
            }
        }
    }

    #[test]
    fn transform_preserves_nested_mp_code() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = gf(9);
        for _ in 0..20 {
            let a = random_invertible(&mut rng, &f, 3);
            let g = Mat::from_fn(&f, 3, 4, |_, _| rng.gen_range(0..9));
            let cs: Vec<LinearCode> = (0..3).map(|i| LinearCode::from_generator(&g.select_rows(&(0..3 - i).collect::<Vec<_>>()))).collect();
            let spec = MpSpec::new(a.clone(), cs).unwrap();
            assert!(spec.is_nested());
            let t = build_unit_lower_l(&a, Duality::Hermitian).unwrap();
            assert_eq!(spec.with_matrix(t.transformed).unwrap().code(), spec.code());
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn nsc_prefix_profile(seed in 0u64..u64::MAX, qi in 0usize..4, n in 1usize..=3, extra in 0usize..=2) {
            let q = [7u32, 9, 11, 13][qi];
            let f = gf(q);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = n + extra;
            let a = Mat::from_fn(&f, n, m, |_, _| rng.gen_range(1..q));
            let d = prefix_distances(&a);
            if is_nsc(&a) {
                proptest::prop_assert_eq!(d, (0..n).map(|i| m - i).collect::<Vec<_>>());
            }
        }

        #[test]
        fn penultimate_prefix_distance(seed in 0u64..u64::MAX, n in 2usize..=4) {
            let f = gf(7);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_invertible(&mut rng, &f, n);
            let d = prefix_distances(&a);
            proptest::prop_assert!(d[n - 2] == 1 || d[n - 2] == 2);
        }
    }
}
