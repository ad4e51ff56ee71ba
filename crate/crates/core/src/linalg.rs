//! Dense exact linear algebra over `F_p`.
//!
//! Matrices store canonical `u32` residues row-major together with their
//! modulus. [`EchelonBasis`] maintains a reduced row-echelon basis plus the
//! change of basis back to the vectors the caller inserted, so membership
//! tests also yield coefficients against the caller's own vectors.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf::{FieldElement, Prime};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    p: Prime,
    data: Vec<u32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, p: Prime) -> Self {
        Matrix {
            rows,
            cols,
            p,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, p: Prime) -> Self {
        Self::scalar(n, 1, p)
    }

    pub fn scalar(n: usize, c: u32, p: Prime) -> Self {
        let mut m = Self::zeros(n, n, p);
        for i in 0..n {
            m.data[i * n + i] = c % p.value();
        }
        m
    }

    /// Builds a matrix from signed integer rows, reducing every entry mod `p`.
    pub fn from_rows<R: AsRef<[i64]>>(p: Prime, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r.iter().map(|&x| p.reduce(x)));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            p,
            data,
        })
    }

    /// Wraps canonical residues; rejects entries `>= p`.
    pub fn from_raw(rows: usize, cols: usize, p: Prime, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(&bad) = data.iter().find(|&&x| x >= p.value()) {
            return Err(Error::InvalidParameter(format!(
                "entry {bad} is not a canonical residue mod {p}"
            )));
        }
        Ok(Matrix {
            rows,
            cols,
            p,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, p: Prime, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j) % p.value());
            }
        }
        Matrix {
            rows,
            cols,
            p,
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn modulus(&self) -> Prime {
        self.p
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        FieldElement::new(self.data[i * self.cols + j] as i64, self.p)
    }

    #[inline]
    pub fn raw(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: FieldElement) -> Result<()> {
        self.check_modulus(value.modulus())?;
        self.data[i * self.cols + j] = value.value();
        Ok(())
    }

    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn check_modulus(&self, q: Prime) -> Result<()> {
        if self.p != q {
            return Err(Error::ModulusMismatch(self.p.value(), q.value()));
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<()> {
        self.check_modulus(other.p)?;
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    fn require_square(&self) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::NotSquare(self.rows, self.cols));
        }
        Ok(self.rows)
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_modulus(other.p)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Matrix) -> Matrix {
        let p = self.p.value() as u64;
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = vec![0u32; n * m];
        let mut acc = vec![0u64; m];
        for i in 0..n {
            acc.iter_mut().for_each(|a| *a = 0);
            for l in 0..k {
                let a = self.data[i * k + l] as u64;
                if a == 0 {
                    continue;
                }
                let row = &other.data[l * m..(l + 1) * m];
                for (acc, &b) in acc.iter_mut().zip(row) {
                    // each term < p < 2^31, so 2^33 terms fit before overflow
                    *acc += (a * b as u64) % p;
                }
            }
            for (o, a) in out[i * m..(i + 1) * m].iter_mut().zip(&acc) {
                *o = (a % p) as u32;
            }
        }
        Matrix {
            rows: n,
            cols: m,
            p: self.p,
            data: out,
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        let p = self.p;
        Ok(self.zip_with(other, |a, b| p.add(a, b)))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        let p = self.p;
        Ok(self.zip_with(other, |a, b| p.sub(a, b)))
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(u32, u32) -> u32) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            p: self.p,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, c: FieldElement) -> Result<Matrix> {
        self.check_modulus(c.modulus())?;
        let p = self.p;
        Ok(Matrix {
            data: self.data.iter().map(|&a| p.mul(a, c.value())).collect(),
            ..self.clone()
        })
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, self.p, |i, j| self.raw(j, i))
    }

    /// Gauss–Jordan inversion.
    pub fn inv(&self) -> Result<Matrix> {
        let n = self.require_square()?;
        let p = self.p;
        let w = 2 * n;
        let mut a = vec![0u32; n * w];
        for i in 0..n {
            a[i * w..i * w + n].copy_from_slice(self.row(i));
            a[i * w + n + i] = 1;
        }
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r * w + col] != 0).ok_or(Error::Singular)?;
            if pivot != col {
                for j in 0..w {
                    a.swap(pivot * w + j, col * w + j);
                }
            }
            let s = p.inv(a[col * w + col])?;
            for j in 0..w {
                a[col * w + j] = p.mul(a[col * w + j], s);
            }
            for r in 0..n {
                let c = a[r * w + col];
                if r == col || c == 0 {
                    continue;
                }
                for j in 0..w {
                    let t = p.mul(c, a[col * w + j]);
                    a[r * w + j] = p.sub(a[r * w + j], t);
                }
            }
        }
        Ok(Matrix::from_fn(n, n, p, |i, j| a[i * w + n + j]))
    }

    /// `self^e` by square-and-multiply; negative exponents invert first.
    pub fn pow(&self, e: i64) -> Result<Matrix> {
        let n = self.require_square()?;
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Matrix::identity(n, self.p);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        Ok(acc)
    }

    pub fn det(&self) -> Result<FieldElement> {
        let n = self.require_square()?;
        let p = self.p;
        let mut a = self.data.clone();
        let mut det = 1u32;
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| a[r * n + col] != 0) else {
                return Ok(FieldElement::zero(p));
            };
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = p.neg(det);
            }
            let d = a[col * n + col];
            det = p.mul(det, d);
            let s = p.inv(d)?;
            for r in col + 1..n {
                let c = p.mul(a[r * n + col], s);
                if c == 0 {
                    continue;
                }
                for j in col..n {
                    let t = p.mul(c, a[col * n + j]);
                    a[r * n + j] = p.sub(a[r * n + j], t);
                }
            }
        }
        Ok(FieldElement::new(det as i64, p))
    }

    pub fn rank(&self) -> usize {
        let mut basis = EchelonBasis::new(self.p, self.cols);
        for i in 0..self.rows {
            let v = FlatVector::from_raw(self.p, self.row(i).to_vec());
            basis.insert(&v).expect("row length equals column count");
        }
        basis.rank()
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// True iff the matrix is `c·I` for some `c`, i.e. commutes with every
    /// elementary matrix `E_ij`.
    pub fn is_scalar(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows;
        let c = if n == 0 { 0 } else { self.data[0] };
        (0..n).all(|i| (0..n).all(|j| self.raw(i, j) == if i == j { c } else { 0 }))
    }

    pub fn is_identity(&self) -> bool {
        self.is_scalar() && (self.rows == 0 || self.data[0] == 1)
    }

    /// Row-major flattening into a coordinate vector of length `rows·cols`.
    pub fn vectorize(&self) -> FlatVector {
        FlatVector::from_raw(self.p, self.data.clone())
    }

    pub fn devectorize(v: &FlatVector, rows: usize, cols: usize) -> Result<Matrix> {
        if v.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: v.len(),
            });
        }
        Ok(Matrix {
            rows,
            cols,
            p: v.modulus(),
            data: v.raw().to_vec(),
        })
    }

    /// Matrix–column-vector product.
    pub fn apply(&self, v: &FlatVector) -> Result<FlatVector> {
        self.check_modulus(v.modulus())?;
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let p = self.p;
        let coords = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.raw())
                    .fold(0u32, |acc, (&a, &b)| p.add(acc, p.mul(a, b)))
            })
            .collect();
        Ok(FlatVector::from_raw(p, coords))
    }

    /// Collision-free canonical encoding: dimensions, modulus, then every
    /// entry as a big-endian `u32`, row-major.
    pub fn key_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 4 * self.data.len());
        out.extend_from_slice(&(self.rows as u32).to_be_bytes());
        out.extend_from_slice(&(self.cols as u32).to_be_bytes());
        out.extend_from_slice(&self.p.value().to_be_bytes());
        for &x in &self.data {
            out.extend_from_slice(&x.to_be_bytes());
        }
        out
    }

    /// Entry rows as `Vec<Vec<u32>>`, for display and serialization.
    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix<F_{}>{:?}", self.p, self.to_rows())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.data.iter().map(|x| x.to_string().len()).max().unwrap_or(1);
        for i in 0..self.rows {
            write!(f, "[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x:>width$}")?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// A coordinate vector over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlatVector {
    p: Prime,
    coords: Vec<u32>,
}

impl FlatVector {
    pub fn zeros(p: Prime, len: usize) -> Self {
        FlatVector {
            p,
            coords: vec![0; len],
        }
    }

    pub fn unit(p: Prime, len: usize, i: usize) -> Self {
        let mut v = Self::zeros(p, len);
        v.coords[i] = 1;
        v
    }

    pub fn from_i64(p: Prime, xs: &[i64]) -> Self {
        FlatVector {
            p,
            coords: xs.iter().map(|&x| p.reduce(x)).collect(),
        }
    }

    pub(crate) fn from_raw(p: Prime, coords: Vec<u32>) -> Self {
        debug_assert!(coords.iter().all(|&x| x < p.value()));
        FlatVector { p, coords }
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&x| x == 0)
    }

    pub fn get(&self, i: usize) -> FieldElement {
        FieldElement::new(self.coords[i] as i64, self.p)
    }

    pub fn raw(&self) -> &[u32] {
        &self.coords
    }

    pub fn elements(&self) -> Vec<FieldElement> {
        self.coords.iter().map(|&x| FieldElement::new(x as i64, self.p)).collect()
    }

    pub fn scale(&self, c: u32) -> FlatVector {
        let p = self.p;
        FlatVector::from_raw(p, self.coords.iter().map(|&x| p.mul(x, c)).collect())
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: u32, other: &FlatVector) -> Result<FlatVector> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p.value(), other.p.value()));
        }
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        let p = self.p;
        Ok(FlatVector::from_raw(
            p,
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| p.add(a, p.mul(c, b)))
                .collect(),
        ))
    }

    /// `Σ coeffs[j]·vectors[j]`.
    pub fn combine(p: Prime, len: usize, coeffs: &FlatVector, vectors: &[FlatVector]) -> Result<FlatVector> {
        if coeffs.len() != vectors.len() {
            return Err(Error::DimensionMismatch {
                expected: vectors.len(),
                found: coeffs.len(),
            });
        }
        vectors
            .iter()
            .zip(coeffs.raw())
            .try_fold(FlatVector::zeros(p, len), |acc, (v, &c)| acc.add_scaled(c, v))
    }
}

/// Reduced row-echelon basis of a subspace of `F_p^dim`.
///
/// Every stored row has a leading 1 at its pivot and zeros in all other pivot
/// columns; pivots are kept strictly increasing. `combos[r]` expresses row `r`
/// in terms of the vectors accepted by [`insert`](Self::insert), in insertion
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EchelonBasis {
    p: Prime,
    dim: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
    combos: Vec<Vec<u32>>,
}

impl EchelonBasis {
    pub fn new(p: Prime, dim: usize) -> Self {
        EchelonBasis {
            p,
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
            combos: Vec::new(),
        }
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> impl Iterator<Item = FlatVector> + '_ {
        self.rows.iter().map(|r| FlatVector::from_raw(self.p, r.clone()))
    }

    fn check(&self, v: &FlatVector) -> Result<()> {
        if v.modulus() != self.p {
            return Err(Error::ModulusMismatch(self.p.value(), v.modulus().value()));
        }
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Eliminates every pivot from `v`. Returns `c` with
    /// `v_before - v_after = Σ c_j·original_j`.
    fn reduce(&self, v: &mut [u32]) -> Vec<u32> {
        let p = self.p;
        let mut used = vec![0u32; self.rank()];
        for ((row, &pivot), combo) in self.rows.iter().zip(&self.pivots).zip(&self.combos) {
            let c = v[pivot];
            if c == 0 {
                continue;
            }
            for (x, &r) in v.iter_mut().zip(row).skip(pivot) {
                *x = p.sub(*x, p.mul(c, r));
            }
            for (u, &k) in used.iter_mut().zip(combo) {
                *u = p.add(*u, p.mul(c, k));
            }
        }
        used
    }

    /// Inserts `v` if it is outside the current span. Returns whether the
    /// basis grew.
    pub fn insert(&mut self, v: &FlatVector) -> Result<bool> {
        self.check(v)?;
        let p = self.p;
        let mut residual = v.raw().to_vec();
        let used = self.reduce(&mut residual);
        let Some(pivot) = residual.iter().position(|&x| x != 0) else {
            return Ok(false);
        };
        // residual = v - Σ used_r·row_r, rows written over the originals
        let mut combo: Vec<u32> = used.iter().map(|&u| p.neg(u)).collect();
        combo.push(1);
        let s = p.inv(residual[pivot])?;
        residual.iter_mut().for_each(|x| *x = p.mul(*x, s));
        combo.iter_mut().for_each(|x| *x = p.mul(*x, s));

        for c in &mut self.combos {
            c.push(0);
        }
        for (row, rc) in self.rows.iter_mut().zip(self.combos.iter_mut()) {
            let c = row[pivot];
            if c == 0 {
                continue;
            }
            for (x, &r) in row.iter_mut().zip(&residual) {
                *x = p.sub(*x, p.mul(c, r));
            }
            for (x, &r) in rc.iter_mut().zip(&combo) {
                *x = p.sub(*x, p.mul(c, r));
            }
        }
        let at = self.pivots.partition_point(|&q| q < pivot);
        self.rows.insert(at, residual);
        self.pivots.insert(at, pivot);
        self.combos.insert(at, combo);
        Ok(true)
    }

    pub fn contains(&self, v: &FlatVector) -> Result<bool> {
        self.check(v)?;
        let mut residual = v.raw().to_vec();
        self.reduce(&mut residual);
        Ok(residual.iter().all(|&x| x == 0))
    }

    /// Coefficients `c` with `Σ c_j·original_j = v`, where the originals are
    /// the vectors accepted by `insert`, in order. `None` when `v` is outside
    /// the span.
    pub fn solve_in_span(&self, v: &FlatVector) -> Result<Option<FlatVector>> {
        self.check(v)?;
        let mut residual = v.raw().to_vec();
        let used = self.reduce(&mut residual);
        if residual.iter().any(|&x| x != 0) {
            return Ok(None);
        }
        Ok(Some(FlatVector::from_raw(self.p, used)))
    }

    /// Basis of `{x : row·x = 0 for every stored row}`.
    pub fn null_space(&self) -> Vec<FlatVector> {
        let p = self.p;
        let mut is_pivot = vec![false; self.dim];
        for &q in &self.pivots {
            is_pivot[q] = true;
        }
        (0..self.dim)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut x = vec![0u32; self.dim];
                x[f] = 1;
                for (row, &q) in self.rows.iter().zip(&self.pivots) {
                    x[q] = p.neg(row[f]);
                }
                FlatVector::from_raw(p, x)
            })
            .collect()
    }
}
