//! Dense row-major matrices and instances.

use crate::par;
use crate::scalar::{GaussRat, Scalar};
use num::complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Index, IndexMut};

/// Products with at least this many scalar multiplications are computed
/// row-parallel when the `parallel` feature is on.
pub const PARALLEL_MATMUL_WORK: usize = 1 << 15;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    /// Panics on a zero dimension or a length mismatch.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrices have positive dimensions");
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix::from_vec(rows, cols, data)
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix::from_vec(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| T::from_i64(x)).collect())
                .collect(),
        )
    }

    pub fn from_gauss(m: &Matrix<GaussRat>) -> Self {
        m.map(T::from_gauss)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_vec(rows, cols, vec![T::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn ones_column(n: usize) -> Self {
        Matrix::from_vec(n, 1, vec![T::one(); n])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Plain transpose, without conjugation.
    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Panics on mismatched inner dimensions.
    pub fn matmul(&self, rhs: &Self) -> Self {
        let work = self.rows * self.cols * rhs.cols;
        self.matmul_with(rhs, par::enabled() && work >= PARALLEL_MATMUL_WORK)
    }

    /// Matrix product, optionally computed row-parallel.
    pub fn matmul_with(&self, rhs: &Self, parallel: bool) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        let mut data = vec![T::zero(); n * m];
        par::fill_chunks(&mut data, m, parallel, |i, out| {
            let a = &self.data[i * k..(i + 1) * k];
            for (l, a_il) in a.iter().enumerate() {
                let b = &rhs.data[l * m..(l + 1) * m];
                for (o, b_lj) in out.iter_mut().zip(b) {
                    *o = o.add(&a_il.mul(b_lj));
                }
            }
        });
        Matrix {
            rows: n,
            cols: m,
            data,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, T::add)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, T::sub)
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.mul(c))
    }

    pub fn zip_with(&self, rhs: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "shapes must agree");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(T::abs_f64).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(T::abs_f64).fold(0.0, f64::max)
    }

    pub fn is_zero_tol(&self, tol: f64) -> bool {
        self.data.iter().all(|x| x.is_zero_tol(tol))
    }

    /// Largest entrywise modulus of the difference; infinite on shape
    /// mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.sub(b).abs_f64())
            .fold(0.0, f64::max)
    }

    pub fn to_c64(&self) -> Matrix<Complex64> {
        self.map(T::to_c64)
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self[(i, j)] = v;
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// A map from matrix variable names to matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance<T> {
    vars: BTreeMap<String, Matrix<T>>,
}

impl<T: Scalar> Default for Instance<T> {
    fn default() -> Self {
        Instance {
            vars: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> Instance<T> {
    pub fn new() -> Self {
        Instance::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, Matrix<T>)>,
        S: Into<String>,
    {
        Instance {
            vars: pairs.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, m: Matrix<T>) -> Option<Matrix<T>> {
        self.vars.insert(name.into(), m)
    }

    pub fn with(&self, name: &str, m: Matrix<T>) -> Self {
        let mut out = self.clone();
        out.insert(name, m);
        out
    }

    pub fn get(&self, name: &str) -> Option<&Matrix<T>> {
        self.vars.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.vars.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Matrix<T>)> {
        self.vars.iter()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Instance<U> {
        Instance {
            vars: self
                .vars
                .iter()
                .map(|(k, m)| (k.clone(), m.map(&f)))
                .collect(),
        }
    }

    pub fn to_c64(&self) -> Instance<Complex64> {
        self.map(T::to_c64)
    }
}
