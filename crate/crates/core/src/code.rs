//! Linear codes and exact minimum distance.
//!
//! A [`LinearCode`] stores the RREF basis of its row space and the RREF basis
//! of its Euclidean dual, so two codes are equal exactly when their stored
//! generators are.
//!
//! Minimum distance is computed by one of three exact strategies:
//!
//! * enumeration of all codewords up to scalars, for small `q^k`;
//! * search for the smallest set of linearly dependent parity-check columns;
//! * a partition bound: given a partition of the coordinates into blocks,
//!   `d ≥ min(min_i s_i, p_(1) + p_(2))` where `s_i` is the distance of the code
//!   shortened to block `i` and `p_(1) ≤ p_(2)` are the two smallest punctured
//!   block distances. When the minimum is attained by some `s_i` it is exact;
//!   otherwise the bound seeds the column search.
//!
//! Every strategy charges an operation budget and reports a bracket instead
//! of a value when the budget runs out.

use std::fmt;

use crate::error::{Error, Result};
use crate::galois::{Field, GaloisField};
use crate::matrix::{Mat, Permutation};

/// Default operation budget for a distance computation.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Codeword-count cap for the enumeration strategy.
pub const ENUMERATION_CAP: u64 = 20_000_000;

/// Budget from `LRCFORGE_BUDGET`, falling back to [`DEFAULT_BUDGET`].
pub fn default_budget() -> u64 {
    std::env::var("LRCFORGE_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Duality {
    Euclidean,
    Hermitian,
}

impl Duality {
    pub fn as_str(self) -> &'static str {
        match self {
            Duality::Euclidean => "euclidean",
            Duality::Hermitian => "hermitian",
        }
    }
}

impl fmt::Display for Duality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `q0` with `q0² = |F|`, for Hermitian forms over `F`.
pub fn hermitian_base(field: &GaloisField) -> Result<u32> {
    if !field.degree().is_multiple_of(2) {
        return Err(Error::NotQuadraticExtension { order: field.order(), base: 0 });
    }
    Ok(field.characteristic().pow(field.degree() / 2))
}

/// `Σ xᵢ yᵢ`.
pub fn euclidean_inner(f: &GaloisField, x: &[u32], y: &[u32]) -> u32 {
    x.iter().zip(y).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
}

/// `Σ xᵢ yᵢ^{q0}`.
pub fn hermitian_inner(f: &GaloisField, x: &[u32], y: &[u32]) -> Result<u32> {
    let q0 = hermitian_base(f)?;
    let mut acc = 0;
    for (&a, &b) in x.iter().zip(y) {
        acc = f.add(acc, f.mul(a, f.conjugate(b, q0)?));
    }
    Ok(acc)
}

#[derive(Clone)]
pub struct LinearCode {
    generator: Mat,
    parity: Mat,
}

impl LinearCode {
    pub fn from_generator(g: &Mat) -> LinearCode {
        let generator = g.row_basis();
        let parity = generator.kernel_basis().row_basis();
        LinearCode { generator, parity }
    }

    pub fn from_parity_check(h: &Mat) -> LinearCode {
        let parity = h.row_basis();
        let generator = parity.kernel_basis().row_basis();
        LinearCode { generator, parity }
    }

    pub fn zero(field: &Field, n: usize) -> LinearCode {
        LinearCode { generator: Mat::zeros(field, 0, n), parity: Mat::identity(field, n) }
    }

    pub fn full(field: &Field, n: usize) -> LinearCode {
        LinearCode { generator: Mat::identity(field, n), parity: Mat::zeros(field, 0, n) }
    }

    pub fn field(&self) -> &Field {
        self.generator.field()
    }

    pub fn len(&self) -> usize {
        self.generator.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.generator.rows()
    }

    pub fn redundancy(&self) -> usize {
        self.parity.rows()
    }

    /// Canonical (RREF) generator matrix.
    pub fn generator(&self) -> &Mat {
        &self.generator
    }

    /// Canonical (RREF) parity-check matrix.
    pub fn parity_check(&self) -> &Mat {
        &self.parity
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn encode(&self, msg: &[u32]) -> Vec<u32> {
        self.generator.vec_mul(msg)
    }

    pub fn contains_word(&self, x: &[u32]) -> bool {
        let f = self.field();
        x.len() == self.len() && (0..self.parity.rows()).all(|i| euclidean_inner(f, self.parity.row(i), x) == 0)
    }

    pub fn dual(&self, kind: Duality) -> Result<LinearCode> {
        match kind {
            Duality::Euclidean => Ok(LinearCode { generator: self.parity.clone(), parity: self.generator.clone() }),
            Duality::Hermitian => {
                let q0 = hermitian_base(self.field())?;
                // x ∈ C^⊥H ⇔ conj(x) ∈ C^⊥E.
                Ok(LinearCode::from_generator(&self.parity.conjugate(q0)?))
            }
        }
    }

    /// Whether `other ⊆ self`.
    pub fn contains(&self, other: &LinearCode) -> Result<bool> {
        if self.field() != other.field() {
            return Err(Error::FieldMismatch { left: self.field().order(), right: other.field().order() });
        }
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        Ok(self.parity.mul(&other.generator.transpose())?.is_zero())
    }

    pub fn is_dual_containing(&self, kind: Duality) -> Result<bool> {
        self.contains(&self.dual(kind)?)
    }

    /// Keeps the coordinates in `s`, in ascending order.
    pub fn puncture(&self, s: &[usize]) -> Result<LinearCode> {
        let idx = checked_support(s, self.len())?;
        Ok(LinearCode::from_generator(&self.generator.select_cols(&idx)))
    }

    /// Codewords vanishing outside `s`, restricted to `s`.
    pub fn shorten(&self, s: &[usize]) -> Result<LinearCode> {
        let idx = checked_support(s, self.len())?;
        Ok(LinearCode::from_parity_check(&self.parity.select_cols(&idx)))
    }

    pub fn weight(x: &[u32]) -> usize {
        x.iter().filter(|&&a| a != 0).count()
    }

    /// Exact distance with automatic strategy choice.
    pub fn min_distance(&self, budget: u64) -> DistanceResult {
        let mut meter = Meter::new(budget);
        if let Some(r) = self.trivial_distance() {
            return r;
        }
        if self.enumeration_feasible(budget) {
            self.enumerate(&mut meter)
        } else {
            self.column_search(1, usize::MAX, &mut meter)
        }
    }

    /// Distance by codeword enumeration only.
    pub fn distance_by_enumeration(&self, budget: u64) -> DistanceResult {
        self.trivial_distance().unwrap_or_else(|| self.enumerate(&mut Meter::new(budget)))
    }

    /// Distance by dependent-column search only.
    pub fn distance_by_column_search(&self, budget: u64) -> DistanceResult {
        self.trivial_distance().unwrap_or_else(|| self.column_search(1, usize::MAX, &mut Meter::new(budget)))
    }

    /// Whether permuting coordinates by `sigma` (position `j` moves to
    /// `sigma(j)`) maps the code onto itself.
    pub fn is_automorphism(&self, sigma: &Permutation) -> bool {
        if sigma.len() != self.len() {
            return false;
        }
        let g = &self.generator;
        (0..g.rows()).all(|i| {
            let mut word = vec![0u32; self.len()];
            for (j, &x) in g.row(i).iter().enumerate() {
                word[sigma.apply(j)] = x;
            }
            self.contains_word(&word)
        })
    }

    /// Column search modulo the cyclic group generated by the automorphism
    /// `sigma`. Orbits are taken in order of their least coordinate; a
    /// minimum-weight support can be moved by the group to contain the least
    /// coordinate of the first orbit it meets, so only such supports are searched.
    pub fn distance_with_symmetry(&self, sigma: &Permutation, budget: u64) -> Result<DistanceResult> {
        if !self.is_automorphism(sigma) {
            return Err(Error::HypothesisUnmet("the permutation is not an automorphism of the code".into()));
        }
        if let Some(r) = self.trivial_distance() {
            return Ok(r);
        }
        let n = self.len();
        let mut orbit_of = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for start in 0..n {
            if orbit_of[start] != usize::MAX {
                continue;
            }
            let mut j = start;
            while orbit_of[j] == usize::MAX {
                orbit_of[j] = reps.len();
                j = sigma.apply(j);
            }
            reps.push(start);
        }
        let mut meter = Meter::new(budget);
        let upper_singleton = n - self.dim() + 1;
        let mut search = ColumnSearch::new(&self.parity, &mut meter);
        for w in 1..=upper_singleton {
            for (o, &rep) in reps.iter().enumerate() {
                let mut cols = vec![rep];
                cols.extend((0..n).filter(|&j| j != rep && orbit_of[j] >= o));
                match search.find_among(w, &cols, true) {
                    Step::Found(cols) => {
                        let used = search.meter.used;
                        let word = self.word_on(&cols);
                        return Ok(DistanceResult::exact(w, Some(word), Some(cols), DistanceMethod::Symmetry, used));
                    }
                    Step::None => {}
                    Step::Capped => {
                        let used = search.meter.used;
                        return Ok(DistanceResult::bracket(w, upper_singleton, None, DistanceMethod::Symmetry, used));
                    }
                }
            }
        }
        unreachable!("any n-k+1 parity-check columns are dependent")
    }

    /// Distance using the partition bound over `blocks`, which must partition
    /// the coordinates. Falls back to column search from the bound.
    pub fn distance_with_partition(&self, blocks: &[Vec<usize>], budget: u64) -> Result<DistanceResult> {
        check_partition(blocks, self.len())?;
        if let Some(r) = self.trivial_distance() {
            return Ok(r);
        }
        let mut meter = Meter::new(budget);
        Ok(self.partition_distance(blocks, &mut meter))
    }

    /// Whether every `w - 1` columns of the parity-check matrix are
    /// independent, i.e. `d ≥ w`. `None` when the budget runs out.
    pub fn distance_at_least(&self, w: usize, budget: u64) -> Option<bool> {
        if w <= 1 || self.is_zero() {
            return Some(true);
        }
        let mut meter = Meter::new(budget);
        let mut search = ColumnSearch::new(&self.parity, &mut meter);
        for size in 1..w {
            match search.find(size) {
                Step::Found(_) => return Some(false),
                Step::None => {}
                Step::Capped => return None,
            }
        }
        Some(true)
    }

    pub fn singleton_defect(&self, d: usize) -> i64 {
        (self.len() as i64 - self.dim() as i64 + 1) - d as i64
    }

    fn trivial_distance(&self) -> Option<DistanceResult> {
        let n = self.len();
        if self.is_zero() {
            // Convention: the zero code has distance n + 1 and counts as MDS.
            return Some(DistanceResult::exact(n + 1, None, None, DistanceMethod::Trivial, 0));
        }
        None
    }

    fn enumeration_feasible(&self, budget: u64) -> bool {
        let q = self.field().order() as u64;
        let mut count: u64 = 1;
        for _ in 0..self.dim() {
            count = count.saturating_mul(q);
        }
        count <= ENUMERATION_CAP && (count / (q - 1)).saturating_mul(self.len() as u64) <= budget
    }

    fn enumerate(&self, meter: &mut Meter) -> DistanceResult {
        let f = self.field().clone();
        let (k, n) = (self.dim(), self.len());
        let q = f.order();
        // multiples[i][a] = a·G_i, flattened.
        let mut multiples = vec![0u32; k * q as usize * n];
        for i in 0..k {
            for a in 0..q {
                let base = (i * q as usize + a as usize) * n;
                for j in 0..n {
                    multiples[base + j] = f.mul(a, self.generator.get(i, j));
                }
            }
        }
        let mut best: Option<(usize, Vec<u32>)> = None;
        let mut partial = vec![vec![0u32; n]; k + 1];
        let capped = enumerate_rec(&f, &multiples, n, q, 0, false, &mut partial, &mut best, meter);
        let (w, word) = best.expect("a nonzero code has a nonzero codeword");
        if capped {
            DistanceResult::bracket(1, w, Some(word), DistanceMethod::Enumeration, meter.used)
        } else {
            let support = support_of(&word);
            DistanceResult::exact(w, Some(word), Some(support), DistanceMethod::Enumeration, meter.used)
        }
    }

    fn column_search(&self, start: usize, max_w: usize, meter: &mut Meter) -> DistanceResult {
        let n = self.len();
        let upper_singleton = n - self.dim() + 1;
        let mut search = ColumnSearch::new(&self.parity, meter);
        let mut w = start.max(1);
        while w <= max_w.min(upper_singleton) {
            match search.find(w) {
                Step::Found(cols) => {
                    let used = search.meter.used;
                    let word = self.word_on(&cols);
                    return DistanceResult::exact(w, Some(word), Some(cols), DistanceMethod::ColumnSearch, used);
                }
                Step::None => w += 1,
                Step::Capped => {
                    let used = search.meter.used;
                    return DistanceResult::bracket(w, upper_singleton, None, DistanceMethod::ColumnSearch, used);
                }
            }
        }
        unreachable!("any n-k+1 parity-check columns are dependent")
    }

    fn partition_distance(&self, blocks: &[Vec<usize>], meter: &mut Meter) -> DistanceResult {
        let n = self.len();
        let mut shortened: Option<(usize, usize)> = None; // (distance, block)
        let mut punctured = Vec::with_capacity(blocks.len());
        for (b, block) in blocks.iter().enumerate() {
            let sub_budget = meter.remaining();
            let short = self.shorten(block).expect("blocks were validated");
            let ds = short.min_distance(sub_budget);
            meter.charge(ds.ops);
            let punct = self.puncture(block).expect("blocks were validated");
            let dp = punct.min_distance(meter.remaining());
            meter.charge(dp.ops);
            if meter.exhausted() || ds.exact_value().is_none() || dp.exact_value().is_none() {
                return self.capped_partition(meter);
            }
            if !short.is_zero() && shortened.is_none_or(|(d, _)| ds.upper < d) {
                shortened = Some((ds.upper, b));
            }
            // A punctured block code that is zero means every codeword vanishes there.
            if !punct.is_zero() {
                punctured.push(dp.upper);
            }
        }
        punctured.sort_unstable();
        let pair = match punctured.as_slice() {
            [a, b, ..] => a + b,
            _ => usize::MAX,
        };
        if let Some((ds, b)) = shortened {
            if ds <= pair {
                // Lift the shortened witness back to full length.
                let short = self.shorten(&blocks[b]).unwrap();
                let sub = short.min_distance(u64::MAX);
                let mut word = vec![0u32; n];
                let local = sub.witness.expect("nonzero shortened code has a witness");
                for (pos, &c) in blocks[b].iter().enumerate() {
                    word[c] = local[pos];
                }
                let support = support_of(&word);
                return DistanceResult::exact(ds, Some(word), Some(support), DistanceMethod::Partition, meter.used);
            }
        }
        let lower = shortened.map_or(pair, |(d, _)| d.min(pair)).min(n - self.dim() + 1);
        let mut r = self.column_search(lower, usize::MAX, meter);
        r.method = DistanceMethod::Partition;
        r.lower = r.lower.max(lower);
        r
    }

    fn capped_partition(&self, meter: &Meter) -> DistanceResult {
        DistanceResult::bracket(1, self.len() - self.dim() + 1, None, DistanceMethod::Partition, meter.used)
    }

    /// Codeword supported on the minimal dependent set `cols`.
    fn word_on(&self, cols: &[usize]) -> Vec<u32> {
        let k = self.parity.select_cols(cols).kernel_basis();
        let mut word = vec![0u32; self.len()];
        for (pos, &c) in cols.iter().enumerate() {
            word[c] = k.get(0, pos);
        }
        word
    }
}

impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.generator == other.generator
    }
}

impl Eq for LinearCode {}

impl fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] code over {}", self.len(), self.dim(), self.field())
    }
}

fn checked_support(s: &[usize], n: usize) -> Result<Vec<usize>> {
    if s.is_empty() {
        return Err(Error::InvalidParameters("coordinate set is empty".into()));
    }
    let mut idx = s.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if idx.len() != s.len() || idx[idx.len() - 1] >= n {
        return Err(Error::InvalidParameters(format!("invalid coordinate set for length {n}")));
    }
    Ok(idx)
}

fn check_partition(blocks: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for b in blocks {
        for &i in b {
            if i >= n || seen[i] {
                return Err(Error::InvalidParameters("blocks do not partition the coordinates".into()));
            }
            seen[i] = true;
        }
    }
    if seen.iter().all(|&s| s) && blocks.iter().all(|b| !b.is_empty()) {
        Ok(())
    } else {
        Err(Error::InvalidParameters("blocks do not partition the coordinates".into()))
    }
}

fn support_of(word: &[u32]) -> Vec<usize> {
    word.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, _)| i).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceMethod {
    Trivial,
    Enumeration,
    ColumnSearch,
    Partition,
    Symmetry,
}

impl DistanceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMethod::Trivial => "trivial",
            DistanceMethod::Enumeration => "enumeration",
            DistanceMethod::ColumnSearch => "column-search",
            DistanceMethod::Partition => "partition",
            DistanceMethod::Symmetry => "symmetric-column-search",
        }
    }
}

/// Outcome of a distance computation: exact when `lower == upper`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceResult {
    pub lower: usize,
    pub upper: usize,
    /// A codeword of weight `upper`, when one was found.
    pub witness: Option<Vec<u32>>,
    /// Support of the witness: a set of dependent parity-check columns.
    pub dependent_columns: Option<Vec<usize>>,
    pub method: DistanceMethod,
    pub ops: u64,
}

impl DistanceResult {
    fn exact(d: usize, witness: Option<Vec<u32>>, cols: Option<Vec<usize>>, method: DistanceMethod, ops: u64) -> Self {
        DistanceResult { lower: d, upper: d, witness, dependent_columns: cols, method, ops }
    }

    fn bracket(lower: usize, upper: usize, witness: Option<Vec<u32>>, method: DistanceMethod, ops: u64) -> Self {
        DistanceResult { lower, upper, witness, dependent_columns: None, method, ops }
    }

    pub fn exact_value(&self) -> Option<usize> {
        (self.lower == self.upper).then_some(self.lower)
    }

    pub fn capped(&self) -> bool {
        self.lower != self.upper
    }
}

struct Meter {
    budget: u64,
    used: u64,
}

impl Meter {
    fn new(budget: u64) -> Self {
        Meter { budget, used: 0 }
    }

    #[inline]
    fn charge(&mut self, ops: u64) {
        self.used = self.used.saturating_add(ops);
    }

    #[inline]
    fn exhausted(&self) -> bool {
        self.used > self.budget
    }

    fn remaining(&self) -> u64 {
        self.budget.saturating_sub(self.used)
    }
}

/// Depth-first enumeration of messages whose first nonzero entry is 1.
/// Returns `true` if the budget ran out.
#[allow(clippy::too_many_arguments)]
fn enumerate_rec(
    f: &GaloisField,
    multiples: &[u32],
    n: usize,
    q: u32,
    depth: usize,
    leading: bool,
    partial: &mut [Vec<u32>],
    best: &mut Option<(usize, Vec<u32>)>,
    meter: &mut Meter,
) -> bool {
    let k = partial.len() - 1;
    if depth == k {
        if leading {
            let w = LinearCode::weight(&partial[k]);
            if best.as_ref().is_none_or(|(b, _)| w < *b) {
                *best = Some((w, partial[k].clone()));
            }
        }
        return false;
    }
    let upto = if leading { q } else { 2 };
    for a in 0..upto {
        meter.charge(n as u64);
        if meter.exhausted() {
            return true;
        }
        let (lo, hi) = partial.split_at_mut(depth + 1);
        let src = &lo[depth];
        let dst = &mut hi[0];
        if a == 0 {
            dst.copy_from_slice(src);
        } else {
            let base = (depth * q as usize + a as usize) * n;
            for j in 0..n {
                dst[j] = f.add(src[j], multiples[base + j]);
            }
        }
        if enumerate_rec(f, multiples, n, q, depth + 1, leading || a != 0, partial, best, meter) {
            return true;
        }
    }
    false
}

enum Step {
    Found(Vec<usize>),
    None,
    Capped,
}

/// Field arithmetic on `u16` elements, through full tables when `q ≤ 256`.
enum Arith {
    Table { q: usize, add: Vec<u16>, mul: Vec<u16> },
    Field(Field),
}

impl Arith {
    fn new(f: &Field) -> Self {
        let q = f.order() as usize;
        if q > 256 {
            return Arith::Field(f.clone());
        }
        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        for a in 0..q {
            for b in 0..q {
                add[a * q + b] = f.add(a as u32, b as u32) as u16;
                mul[a * q + b] = f.mul(a as u32, b as u32) as u16;
            }
        }
        Arith::Table { q, add, mul }
    }

    /// `dst[r] = src[r] + a·piv[r]` over the rows, skipping row `skip`.
    #[inline]
    fn axpy_skip(&self, dst: &mut [u16], src: &[u16], piv: &[u16], a: u16, skip: usize) {
        let (head, tail) = (&src[..skip], &src[skip + 1..]);
        let (phead, ptail) = (&piv[..skip], &piv[skip + 1..]);
        let (dhead, dtail) = dst.split_at_mut(skip);
        if a == 0 {
            dhead.copy_from_slice(head);
            dtail.copy_from_slice(tail);
            return;
        }
        match self {
            Arith::Table { q, add, mul } => {
                let row = &mul[a as usize * q..(a as usize + 1) * q];
                for ((d, &x), &y) in dhead.iter_mut().zip(head).zip(phead) {
                    *d = add[x as usize * q + row[y as usize] as usize];
                }
                for ((d, &x), &y) in dtail.iter_mut().zip(tail).zip(ptail) {
                    *d = add[x as usize * q + row[y as usize] as usize];
                }
            }
            Arith::Field(f) => {
                for ((d, &x), &y) in dhead.iter_mut().zip(head).zip(phead).chain(dtail.iter_mut().zip(tail).zip(ptail)) {
                    *d = f.add(x as u32, f.mul(a as u32, y as u32)) as u16;
                }
            }
        }
    }

    #[inline]
    fn mul(&self, a: u16, b: u16) -> u16 {
        match self {
            Arith::Table { q, mul, .. } => mul[a as usize * q + b as usize],
            Arith::Field(f) => f.mul(a as u32, b as u32) as u16,
        }
    }
}

/// Search for `w` linearly dependent columns of a parity-check matrix, assuming
/// no smaller dependent set exists. Subsets are visited in lexicographic
/// order, so the first hit is the lexicographically first minimal witness.
///
/// Level `L` of the search keeps the candidate columns reduced modulo the `L`
/// chosen ones, with the chosen pivot rows dropped, in a flat buffer.
struct ColumnSearch<'a> {
    f: Field,
    arith: Arith,
    m: usize,
    /// Columns of H, each of length m.
    columns: Vec<Vec<u16>>,
    bufs: Vec<Vec<u16>>,
    idx: Vec<Vec<usize>>,
    keys: Vec<u16>,
    order: Vec<usize>,
    meter: &'a mut Meter,
}

impl<'a> ColumnSearch<'a> {
    fn new(h: &Mat, meter: &'a mut Meter) -> Self {
        let columns = (0..h.cols()).map(|j| (0..h.rows()).map(|i| h.get(i, j) as u16).collect()).collect();
        ColumnSearch {
            f: h.field().clone(),
            arith: Arith::new(h.field()),
            m: h.rows(),
            columns,
            bufs: Vec::new(),
            idx: Vec::new(),
            keys: Vec::new(),
            order: Vec::new(),
            meter,
        }
    }

    fn find(&mut self, w: usize) -> Step {
        let all: Vec<usize> = (0..self.columns.len()).collect();
        self.find_among(w, &all, false)
    }

    /// Searches subsets of `cols` (in the given order); with `force_first`,
    /// only subsets containing `cols[0]`.
    fn find_among(&mut self, w: usize, cols: &[usize], force_first: bool) -> Step {
        let n = cols.len();
        if w > n || w == 0 {
            return Step::None;
        }
        let m = self.m;
        self.bufs.resize_with(w + 1, Vec::new);
        self.idx.resize_with(w + 1, Vec::new);
        for level in 0..=w {
            self.bufs[level].resize(n * m, 0);
            self.idx[level].resize(n, 0);
        }
        for (t, &j) in cols.iter().enumerate() {
            self.bufs[0][t * m..(t + 1) * m].copy_from_slice(&self.columns[j]);
            self.idx[0][t] = j;
        }
        let mut chosen = Vec::with_capacity(w);
        match self.dfs(0, n, m, &mut chosen, w - 1, force_first) {
            Step::Found(mut cols) => {
                cols.sort_unstable();
                Step::Found(cols)
            }
            other => other,
        }
    }

    /// `need` more columns must be chosen before the final dependent one.
    fn dfs(&mut self, level: usize, count: usize, rows: usize, chosen: &mut Vec<usize>, need: usize, only_first: bool) -> Step {
        if need == 0 {
            let end = if only_first { count.min(1) } else { count };
            let buf = &self.bufs[level];
            let hit = (0..end).find(|&t| buf[t * rows..(t + 1) * rows].iter().all(|&x| x == 0));
            return match hit {
                Some(t) => {
                    let mut out = chosen.clone();
                    out.push(self.idx[level][t]);
                    Step::Found(out)
                }
                None => Step::None,
            };
        }
        if need == 1 && !only_first {
            return self.parallel_pair(level, count, rows, chosen);
        }
        let last = if only_first { 1.min(count) } else { count };
        for i in 0..last {
            if count - i < need + 1 {
                break;
            }
            let rest = count - i - 1;
            self.meter.charge((rest * rows) as u64);
            if self.meter.exhausted() {
                return Step::Capped;
            }
            let (lo, hi) = self.bufs.split_at_mut(level + 1);
            let (cur, next) = (&lo[level], &mut hi[0]);
            let pv = &cur[i * rows..(i + 1) * rows];
            let Some(p) = pv.iter().position(|&x| x != 0) else {
                // Only reachable when a smaller dependent set exists.
                continue;
            };
            let inv = self.f.inv(pv[p] as u32).unwrap() as u16;
            let nrows = rows - 1;
            for t in 0..rest {
                let j = i + 1 + t;
                let v = &cur[j * rows..(j + 1) * rows];
                let factor = if v[p] == 0 { 0 } else { self.f.neg(self.arith.mul(v[p], inv) as u32) as u16 };
                self.arith.axpy_skip(&mut next[t * nrows..(t + 1) * nrows], v, pv, factor, p);
            }
            let (ilo, ihi) = self.idx.split_at_mut(level + 1);
            ihi[0][..rest].copy_from_slice(&ilo[level][i + 1..count]);
            chosen.push(ilo[level][i]);
            let step = self.dfs(level + 1, rest, nrows, chosen, need - 1, false);
            chosen.pop();
            match step {
                Step::None => {}
                other => return other,
            }
        }
        Step::None
    }

    /// Final level: find the lexicographically first pair of parallel columns.
    fn parallel_pair(&mut self, level: usize, count: usize, rows: usize, chosen: &[usize]) -> Step {
        self.meter.charge((count * (rows + 1)) as u64);
        if self.meter.exhausted() {
            return Step::Capped;
        }
        let buf = &self.bufs[level];
        self.keys.resize(count * rows, 0);
        self.order.clear();
        for t in 0..count {
            let v = &buf[t * rows..(t + 1) * rows];
            let Some(p) = v.iter().position(|&x| x != 0) else {
                continue;
            };
            let inv = self.f.inv(v[p] as u32).unwrap() as u16;
            for (k, &x) in self.keys[t * rows..(t + 1) * rows].iter_mut().zip(v) {
                *k = self.arith.mul(x, inv);
            }
            self.order.push(t);
        }
        let keys = &self.keys;
        let key = |t: usize| &keys[t * rows..(t + 1) * rows];
        // Candidates are in increasing column order, so ties keep that order.
        self.order.sort_by(|&a, &b| key(a).cmp(key(b)).then(a.cmp(&b)));
        let idx = &self.idx[level];
        let mut best: Option<(usize, usize)> = None;
        for pair in self.order.windows(2) {
            if key(pair[0]) == key(pair[1]) {
                let cand_pair = (idx[pair[0]], idx[pair[1]]);
                if best.is_none_or(|b| cand_pair < b) {
                    best = Some(cand_pair);
                }
            }
        }
        match best {
            Some((a, b)) => {
                let mut out = chosen.to_vec();
                out.push(a);
                out.push(b);
                Step::Found(out)
            }
            None => Step::None,
        }
    }
}
