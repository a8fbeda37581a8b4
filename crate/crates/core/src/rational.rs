//! Exact rational matrices with labelled rows and columns.
//!
//! Rows and columns carry integer labels (vertex names or simplex indices) so
//! that column formulas can be checked in the labels they are stated in.
//! Rank and determinant use fraction-free (Bareiss) elimination on an integer
//! rescaling of the matrix; nothing in this module touches floating point.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// `p/q` rendering used in every serialized report, integers included.
pub fn rat_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Invalid(format!("not a rational: {s:?}")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Invalid(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(parse_int(n)?, d))
        }
        None => Ok(Rational::from_integer(parse_int(s)?)),
    }
}

pub fn ratio(num: &BigUint, den: &BigUint) -> Rational {
    Rational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

pub fn rat_from_uint(n: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(n.clone()))
}

pub fn l1_norm(v: &[Rational]) -> Rational {
    v.iter().fold(Rational::zero(), |acc, x| acc + x.abs())
}

pub fn l1_distance(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + (x - y).abs())
}

/// Dense exact matrix, `rows x cols`, with explicit labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    pub row_labels: Vec<u64>,
    pub col_labels: Vec<u64>,
    entries: Vec<Vec<Rational>>,
}

impl RationalMatrix {
    pub fn zeros(row_labels: Vec<u64>, col_labels: Vec<u64>) -> Self {
        let entries = vec![vec![Rational::zero(); col_labels.len()]; row_labels.len()];
        RationalMatrix {
            row_labels,
            col_labels,
            entries,
        }
    }

    pub fn identity(labels: Vec<u64>) -> Self {
        let mut m = Self::zeros(labels.clone(), labels);
        for i in 0..m.rows() {
            m.entries[i][i] = Rational::one();
        }
        m
    }

    /// Matrix with labels `0..rows` and `0..cols`.
    pub fn indexed(rows: usize, cols: usize) -> Self {
        Self::zeros((0..rows as u64).collect(), (0..cols as u64).collect())
    }

    pub fn from_columns(
        row_labels: Vec<u64>,
        col_labels: Vec<u64>,
        columns: &[Vec<Rational>],
    ) -> Result<Self> {
        if columns.len() != col_labels.len() || columns.iter().any(|c| c.len() != row_labels.len())
        {
            return Err(Error::Invalid("column data does not match labels".into()));
        }
        let mut m = Self::zeros(row_labels, col_labels);
        for (j, col) in columns.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m.entries[i][j] = x.clone();
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.entries[i][j] = value;
    }

    pub fn row_index(&self, label: u64) -> Option<usize> {
        self.row_labels.iter().position(|&l| l == label)
    }

    pub fn col_index(&self, label: u64) -> Option<usize> {
        self.col_labels.iter().position(|&l| l == label)
    }

    /// Entry addressed by labels; missing labels read as zero.
    pub fn at(&self, row: u64, col: u64) -> Rational {
        match (self.row_index(row), self.col_index(col)) {
            (Some(i), Some(j)) => self.entries[i][j].clone(),
            _ => Rational::zero(),
        }
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        self.entries.iter().map(|row| row[j].clone()).collect()
    }

    pub fn column_sums(&self) -> Vec<Rational> {
        (0..self.cols())
            .map(|j| {
                self.entries
                    .iter()
                    .fold(Rational::zero(), |acc, row| acc + &row[j])
            })
            .collect()
    }

    /// Non-negative entries and every column summing to exactly one.
    pub fn is_stochastic(&self) -> bool {
        let non_negative = self.entries.iter().flatten().all(|x| !x.is_negative());
        non_negative && self.column_sums().iter().all(|s| s.is_one())
    }

    pub fn mul(&self, rhs: &RationalMatrix) -> Result<RationalMatrix> {
        if self.col_labels != rhs.row_labels {
            return Err(Error::Invalid(format!(
                "shape mismatch in product: {}x{} times {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        let mut out = RationalMatrix::zeros(self.row_labels.clone(), rhs.col_labels.clone());
        for i in 0..self.rows() {
            for k in 0..self.cols() {
                let a = &self.entries[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols() {
                    let b = &rhs.entries[k][j];
                    if !b.is_zero() {
                        out.entries[i][j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols() {
            return Err(Error::Invalid(format!(
                "vector of length {} applied to matrix with {} columns",
                v.len(),
                self.cols()
            )));
        }
        Ok(self
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    /// Same entries, with labels replaced by positions `0..n`.
    pub fn relabel_indexed(&self) -> RationalMatrix {
        RationalMatrix {
            row_labels: (0..self.rows() as u64).collect(),
            col_labels: (0..self.cols() as u64).collect(),
            entries: self.entries.clone(),
        }
    }

    /// Each row scaled to integers by the lcm of its denominators.
    /// Returns the integer rows and the product of the scale factors.
    fn integer_rows(&self) -> (Vec<Vec<BigInt>>, BigInt) {
        let mut scale = BigInt::one();
        let rows = self
            .entries
            .iter()
            .map(|row| {
                let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                scale *= &l;
                row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
            })
            .collect();
        (rows, scale)
    }

    /// Rank by fraction-free elimination.
    pub fn rank(&self) -> usize {
        let (rows, _) = self.integer_rows();
        bareiss(rows, self.cols()).0
    }

    pub fn determinant(&self) -> Result<Rational> {
        if self.rows() != self.cols() {
            return Err(Error::Domain(format!(
                "determinant of a non-square {}x{} matrix",
                self.rows(),
                self.cols()
            )));
        }
        if self.rows() == 0 {
            return Ok(Rational::one());
        }
        let (rows, scale) = self.integer_rows();
        let (_, det) = bareiss(rows, self.cols());
        Ok(Rational::new(det, scale))
    }

    pub fn to_serial(&self) -> SerialMatrix {
        SerialMatrix {
            rows: self.row_labels.clone(),
            cols: self.col_labels.clone(),
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(rat_to_string).collect())
                .collect(),
        }
    }
}

/// JSON form: labels plus `"p/q"` strings row by row.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SerialMatrix {
    pub rows: Vec<u64>,
    pub cols: Vec<u64>,
    pub entries: Vec<Vec<String>>,
}

impl SerialMatrix {
    pub fn to_matrix(&self) -> Result<RationalMatrix> {
        let mut m = RationalMatrix::zeros(self.rows.clone(), self.cols.clone());
        if self.entries.len() != self.rows.len() {
            return Err(Error::Invalid("row count mismatch".into()));
        }
        for (i, row) in self.entries.iter().enumerate() {
            if row.len() != self.cols.len() {
                return Err(Error::Invalid("column count mismatch".into()));
            }
            for (j, s) in row.iter().enumerate() {
                m.entries[i][j] = parse_rational(s)?;
            }
        }
        Ok(m)
    }
}

/// Bareiss elimination on integer rows. Returns `(rank, det)`; `det` is the
/// determinant when the matrix is square and zero when it is singular.
fn bareiss(mut a: Vec<Vec<BigInt>>, cols: usize) -> (usize, BigInt) {
    let n = a.len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    let mut sign_flips = 0usize;
    for c in 0..cols {
        if rank == n {
            break;
        }
        let Some(p) = (rank..n).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        if p != rank {
            a.swap(p, rank);
            sign_flips += 1;
        }
        for i in rank + 1..n {
            for j in c + 1..cols {
                let v = &a[rank][c] * &a[i][j] - &a[i][c] * &a[rank][j];
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
    }
    let det = if rank == n && n == cols {
        if sign_flips % 2 == 1 {
            -prev
        } else {
            prev
        }
    } else {
        BigInt::zero()
    };
    (rank, det)
}
