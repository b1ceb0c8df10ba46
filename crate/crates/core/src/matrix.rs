//! Dense matrices over a [`GaloisField`] and the handful of exact linear
//! algebra routines the rest of the crate is built on.

use std::fmt;

use crate::error::{Error, Result};
use crate::galois::{Field, GaloisField};

/// A permutation of `{0, .., N-1}`. Displayed 1-based in cycle notation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Builds from a 0-based image array, checking bijectivity.
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &i in &image {
            if i >= n || seen[i] {
                return Err(Error::InvalidParameters(format!("{image:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Permutation(image))
    }

    /// Builds from a 1-based image array.
    pub fn from_one_based(image: &[usize]) -> Result<Self> {
        if image.contains(&0) {
            return Err(Error::InvalidParameters("permutation images are 1-based".into()));
        }
        Self::new(image.iter().map(|&i| i - 1).collect())
    }

    /// Product of disjoint transpositions given 1-based.
    pub fn from_transpositions(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut image: Vec<usize> = (0..n).collect();
        for &(a, b) in pairs {
            if a == 0 || b == 0 || a > n || b > n {
                return Err(Error::InvalidParameters(format!("transposition ({a} {b}) out of range")));
            }
            image.swap(a - 1, b - 1);
        }
        Self::new(image)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&i| i + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Nontrivial cycles, 1-based, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i + 1);
                i = self.0[i];
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|i| i.to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Dense row-major matrix over a field. Entries are canonical representatives.
#[derive(Clone)]
pub struct Mat {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Output of [`Mat::rref`].
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: Mat,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

impl Mat {
    pub fn new(field: Field, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&x| !field.contains(x)) {
            return Err(Error::InvalidParameters(format!("{bad} is not an element of {field}")));
        }
        Ok(Mat { field, rows, cols, data })
    }

    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Mat { field: field.clone(), rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// From a list of equal-length rows. `cols` is needed for the empty case.
    pub fn from_rows(field: &Field, cols: usize, rows: &[Vec<u32>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::ShapeMismatch(format!("row of length {} in a {cols}-column matrix", r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::new(field.clone(), rows.len(), cols, data)
    }

    /// Builds an `rows x cols` matrix entrywise from `f(i, j)`.
    pub fn from_fn(field: &Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { field: field.clone(), rows, cols, data }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        debug_assert!(self.field.contains(v));
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(&self.field, self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Entrywise `x ↦ x^{q0}` on a matrix over GF(q0²).
    pub fn conjugate(&self, q0: u32) -> Result<Mat> {
        let data = self
            .data
            .iter()
            .map(|&x| self.field.conjugate(x, q0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Mat { data, ..self.clone() })
    }

    /// `M†`: transpose with conjugated entries.
    pub fn conj_transpose(&self, q0: u32) -> Result<Mat> {
        Ok(self.conjugate(q0)?.transpose())
    }

    fn check_field(&self, other: &Mat) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch { left: self.field.order(), right: other.field.order() });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Mat::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a != 0 {
                    axpy(f, &mut out.data[i * other.cols..(i + 1) * other.cols], other.row(l), a);
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, x: &[u32]) -> Vec<u32> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0; self.cols];
        for (i, &a) in x.iter().enumerate() {
            if a != 0 {
                axpy(&self.field, &mut out, self.row(i), a);
            }
        }
        out
    }

    pub fn scale(&self, c: u32) -> Mat {
        let data = self.data.iter().map(|&x| self.field.mul(c, x)).collect();
        Mat { data, ..self.clone() }
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Mat) -> Result<Mat> {
        self.check_field(other)?;
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!("vstack of {} and {} columns", self.cols, other.cols)));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Mat { field: self.field.clone(), rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn select_rows(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(&self.field, idx.len(), self.cols, |i, j| self.get(idx[i], j))
    }

    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(&self.field, self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat {
        Mat::from_fn(&self.field, rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]))
    }

    /// Reduced row echelon form.
    pub fn rref(&self) -> Rref {
        let f = &self.field;
        let (r, c) = (self.rows, self.cols);
        let mut m = self.data.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..c {
            if row == r {
                break;
            }
            let Some(pr) = (row..r).find(|&i| m[i * c + col] != 0) else {
                continue;
            };
            if pr != row {
                for j in 0..c {
                    m.swap(pr * c + j, row * c + j);
                }
            }
            let inv = f.inv(m[row * c + col]).expect("pivot is nonzero");
            for x in &mut m[row * c + col..(row + 1) * c] {
                *x = f.mul(*x, inv);
            }
            let (before, rest) = m.split_at_mut(row * c);
            let (pivot_row, after) = rest.split_at_mut(c);
            for other in before.chunks_mut(c).chain(after.chunks_mut(c)) {
                let factor = other[col];
                if factor != 0 {
                    axpy(f, &mut other[col..], &pivot_row[col..], f.neg(factor));
                }
            }
            pivots.push(col);
            row += 1;
        }
        let rank = pivots.len();
        Rref {
            matrix: Mat { field: f.clone(), rows: r, cols: c, data: m },
            rank,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Nonzero rows of the RREF: a canonical basis of the row space.
    pub fn row_basis(&self) -> Mat {
        let Rref { matrix, rank, .. } = self.rref();
        Mat { rows: rank, data: matrix.data[..rank * self.cols].to_vec(), ..matrix }
    }

    /// Basis (as rows) of `{x : M·xᵀ = 0}`.
    pub fn kernel_basis(&self) -> Mat {
        let f = &self.field;
        let Rref { matrix: r, rank, pivots } = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&j| !is_pivot[j]).collect();
        let mut out = Mat::zeros(f, free.len(), self.cols);
        for (b, &fc) in free.iter().enumerate() {
            out.set(b, fc, 1);
            for (i, &pc) in pivots.iter().enumerate().take(rank) {
                out.set(b, pc, f.neg(r.get(i, fc)));
            }
        }
        out
    }

    /// Determinant by Gaussian elimination.
    pub fn det(&self) -> Result<u32> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(format!("determinant of a {}x{} matrix", self.rows, self.cols)));
        }
        let f = &self.field;
        let n = self.rows;
        let mut m = self.data.clone();
        let mut det = 1u32;
        for col in 0..n {
            let Some(pr) = (col..n).find(|&i| m[i * n + col] != 0) else {
                return Ok(0);
            };
            if pr != col {
                for j in 0..n {
                    m.swap(pr * n + j, col * n + j);
                }
                det = f.neg(det);
            }
            let piv = m[col * n + col];
            det = f.mul(det, piv);
            let inv = f.inv(piv).expect("pivot is nonzero");
            let (top, bottom) = m.split_at_mut((col + 1) * n);
            let pivot_row = &top[col * n..];
            for other in bottom.chunks_mut(n) {
                let factor = other[col];
                if factor != 0 {
                    axpy(f, &mut other[col..], &pivot_row[col..], f.neg(f.mul(factor, inv)));
                }
            }
        }
        Ok(det)
    }

    /// Determinant of the submatrix on the given row and column index sets.
    ///
    /// Both lists are sorted before extraction, so the result depends only on
    /// the sets, not on the order they are given in.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> Result<u32> {
        if rows.len() != cols.len() {
            return Err(Error::ShapeMismatch(format!("{} rows and {} columns", rows.len(), cols.len())));
        }
        let r = sorted_distinct(rows, self.rows, "row")?;
        let c = sorted_distinct(cols, self.cols, "column")?;
        self.submatrix(&r, &c).det()
    }

    /// `τ` if every row has exactly one nonzero entry and those positions
    /// form a permutation.
    pub fn monomial_pattern(&self) -> Result<Permutation> {
        if !self.is_square() {
            return Err(Error::NotMonomial);
        }
        let mut image = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut nz = self.row(i).iter().enumerate().filter(|(_, &x)| x != 0).map(|(j, _)| j);
            match (nz.next(), nz.next()) {
                (Some(j), None) => image.push(j),
                _ => return Err(Error::NotMonomial),
            }
        }
        Permutation::new(image).map_err(|_| Error::NotMonomial)
    }

    /// Solves `x · self = b` for a square invertible matrix.
    pub fn solve_left(&self, b: &[u32]) -> Result<Vec<u32>> {
        if !self.is_square() || b.len() != self.cols {
            return Err(Error::ShapeMismatch("solve_left needs a square system".into()));
        }
        let n = self.rows;
        // x·M = b  ⇔  Mᵀ·xᵀ = bᵀ; reduce [Mᵀ | bᵀ].
        let aug = Mat::from_fn(&self.field, n, n + 1, |i, j| if j < n { self.get(j, i) } else { b[i] });
        let Rref { matrix, rank, pivots } = aug.rref();
        if rank != n || pivots.iter().any(|&p| p >= n) {
            return Err(Error::DivisionByZero);
        }
        Ok((0..n).map(|i| matrix.get(i, n)).collect())
    }
}

/// `dst += a · src`, entrywise.
#[inline]
pub(crate) fn axpy(f: &GaloisField, dst: &mut [u32], src: &[u32], a: u32) {
    for (d, &s) in dst.iter_mut().zip(src) {
        if s != 0 {
            *d = f.add(*d, f.mul(a, s));
        }
    }
}

fn sorted_distinct(idx: &[usize], bound: usize, what: &str) -> Result<Vec<usize>> {
    let mut v = idx.to_vec();
    v.sort_unstable();
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::ShapeMismatch(format!("repeated {what} index")));
    }
    if v.last().is_some_and(|&x| x >= bound) {
        return Err(Error::ShapeMismatch(format!("{what} index out of range")));
    }
    Ok(v)
}

impl PartialEq for Mat {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl Eq for Mat {}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{} over {}", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::GaloisField;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(q: u32) -> Field {
        GaloisField::with_order(q).unwrap()
    }

    fn random(f: &Field, r: usize, c: usize, rng: &mut impl Rng) -> Mat {
        Mat::from_fn(f, r, c, |_, _| rng.gen_range(0..f.order()))
    }

    #[test]
    fn rref_examples() {
        let f = gf(7);
        let id = Mat::identity(&f, 4);
        let r = id.rref();
        assert_eq!(r.matrix, id);
        assert_eq!(r.rank, 4);
        let z = Mat::zeros(&f, 3, 5);
        assert_eq!(z.rref().matrix, z);
        assert_eq!(z.rank(), 0);
        let h = Mat::from_rows(&f, 2, &[vec![1, 1], vec![1, 6]]).unwrap();
        assert_eq!(h.det().unwrap(), 5); // -2 mod 7
        assert_eq!(h.rank(), 2);
    }

    #[test]
    fn kernel_examples() {
        let f = gf(7);
        assert_eq!(Mat::identity(&f, 3).kernel_basis().rows(), 0);
        let k = Mat::from_rows(&f, 2, &[vec![1, 1]]).unwrap().kernel_basis();
        assert_eq!(k.rows(), 1);
        assert_eq!(f.add(k.get(0, 0), k.get(0, 1)), 0);
        assert_ne!(k.get(0, 0), 0);

        let f9 = gf(9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = loop {
            let m = random(&f9, 3, 6, &mut rng);
            if m.rank() == 3 {
                break m;
            }
        };
        let k = m.kernel_basis();
        assert_eq!(k.rows(), 3);
        assert!(m.mul(&k.transpose()).unwrap().is_zero());
    }

    #[test]
    fn minor_examples() {
        let f = gf(13);
        let m = Mat::from_fn(&f, 3, 3, |i, j| ((i * 3 + j * j + 1) % 13) as u32);
        assert_eq!(m.minor(&[0, 1, 2], &[0, 1, 2]).unwrap(), m.det().unwrap());
        assert_eq!(m.minor(&[1, 0], &[0, 1]).unwrap(), m.minor(&[0, 1], &[0, 1]).unwrap());
        assert_eq!(m.minor(&[2], &[1]).unwrap(), m.get(2, 1));
        assert!(matches!(m.minor(&[0, 1], &[0]), Err(Error::ShapeMismatch(_))));
        assert!(matches!(m.minor(&[0, 0], &[0, 1]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn conj_transpose_examples() {
        let f = gf(49);
        let m = Mat::from_fn(&f, 2, 3, |i, j| (i * 3 + j) as u32 % 7);
        assert_eq!(m.conj_transpose(7).unwrap(), m.transpose());
        let w = f.root_of_unity(3).unwrap();
        let fourier = Mat::from_fn(&f, 3, 3, |i, j| f.pow(w, (i * j) as i64).unwrap());
        let ct = fourier.conj_transpose(7).unwrap();
        assert_eq!(ct.conj_transpose(7).unwrap(), fourier);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(ct.get(i, j), f.pow(w, (7 * i * j) as i64).unwrap());
            }
        }
    }

    #[test]
    fn monomial_pattern_examples() {
        let f = gf(7);
        let d = Mat::identity(&f, 2).scale(2);
        assert!(d.monomial_pattern().unwrap().is_identity());
        let anti = Mat::from_fn(&f, 3, 3, |i, j| if i + j == 2 { 3 } else { 0 });
        let tau = anti.monomial_pattern().unwrap();
        assert_eq!(tau, Permutation::from_transpositions(3, &[(1, 3)]).unwrap());
        assert_eq!(tau.to_string(), "(1 3)");
        let u = Mat::from_rows(&f, 2, &[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(u.monomial_pattern().unwrap_err(), Error::NotMonomial);
        let col_clash = Mat::from_rows(&f, 2, &[vec![1, 0], vec![2, 0]]).unwrap();
        assert_eq!(col_clash.monomial_pattern().unwrap_err(), Error::NotMonomial);
    }

    #[test]
    fn solve_left_round_trip() {
        let f = gf(13);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let m = random(&f, 4, 4, &mut rng);
            let x: Vec<u32> = (0..4).map(|_| rng.gen_range(0..13)).collect();
            let b = m.vec_mul(&x);
            match m.solve_left(&b) {
                Ok(sol) => assert_eq!(m.vec_mul(&sol), b),
                Err(_) => assert_eq!(m.det().unwrap(), 0),
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn mat_strategy() -> impl Strategy<Value = Mat> {
            (prop::sample::select(vec![2u32, 3, 4, 7, 9, 13, 49]), 1usize..6, 1usize..7)
                .prop_flat_map(|(q, r, c)| {
                    prop::collection::vec(0..q, r * c).prop_map(move |d| Mat::new(gf(q), r, c, d).unwrap())
                })
        }

        proptest! {
            #[test]
            fn rank_of_transpose(m in mat_strategy()) {
                prop_assert_eq!(m.rank(), m.transpose().rank());
            }

            #[test]
            fn rank_nullity(m in mat_strategy()) {
                let k = m.kernel_basis();
                prop_assert_eq!(k.rows() + m.rank(), m.cols());
                if k.rows() > 0 {
                    prop_assert!(m.mul(&k.transpose()).unwrap().is_zero());
                }
            }

            #[test]
            fn det_zero_iff_singular(m in mat_strategy()) {
                let n = m.rows().min(m.cols());
                let idx: Vec<usize> = (0..n).collect();
                let sq = m.submatrix(&idx, &idx);
                prop_assert_eq!(sq.det().unwrap() != 0, sq.rank() == n);
            }

            #[test]
            fn minor_ignores_order(m in mat_strategy(), seed in any::<u64>()) {
                let n = m.rows().min(m.cols());
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut rows: Vec<usize> = (0..m.rows()).collect();
                let mut cols: Vec<usize> = (0..m.cols()).collect();
                use rand::seq::SliceRandom;
                rows.shuffle(&mut rng);
                cols.shuffle(&mut rng);
                rows.truncate(n);
                cols.truncate(n);
                let mut rs = rows.clone();
                let mut cs = cols.clone();
                rs.sort();
                cs.sort();
                prop_assert_eq!(m.minor(&rows, &cols).unwrap(), m.minor(&rs, &cs).unwrap());
            }

            #[test]
            fn rref_preserves_row_space(m in mat_strategy()) {
                let r = m.rref();
                let stacked = m.vstack(&r.matrix).unwrap();
                prop_assert_eq!(stacked.rank(), r.rank);
            }
        }
    }
}
