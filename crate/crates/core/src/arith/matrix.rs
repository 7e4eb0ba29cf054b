use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::{format_rational, parse_rational};
use super::{ArithError, Rational};
use crate::metrics;

/// Dense row-major matrix of exact rationals.
#[derive(Clone)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
    // Entries over a common denominator, built on first use by products.
    integer_form: OnceLock<IntegerForm>,
}

#[derive(Clone, Debug)]
struct IntegerForm {
    denom: BigInt,
    numers: Vec<BigInt>,
}

fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

fn integerize(values: &[Rational]) -> (BigInt, Vec<BigInt>) {
    let denom = lcm_of_denominators(values);
    let numers = values
        .iter()
        .map(|v| v.numer() * (&denom / v.denom()))
        .collect();
    (denom, numers)
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self, ArithError> {
        if data.len() != rows * cols {
            return Err(ArithError::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            data,
            integer_form: OnceLock::new(),
        })
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, ArithError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(ArithError::DimensionMismatch {
                    expected: n_cols,
                    actual: row.len(),
                });
            }
            data.extend(row);
        }
        Self::new(n_rows, n_cols, data)
    }

    /// Builds a matrix from decimal strings such as `"8.5"`.
    pub fn parse_rows<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self, ArithError> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| parse_rational(s.as_ref())).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        Self::from_rows(parsed)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![Rational::zero(); rows * cols]).expect("sized")
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[Rational] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, col).clone()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c).clone());
            }
        }
        Matrix::new(self.cols, self.rows, data).expect("sized")
    }

    pub fn scale(&self, factor: &Rational) -> Matrix {
        Matrix::new(
            self.rows,
            self.cols,
            self.data.iter().map(|v| v * factor).collect(),
        )
        .expect("sized")
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && self.data.iter().enumerate().all(|(idx, v)| {
                if idx / self.cols == idx % self.cols {
                    v.is_one()
                } else {
                    v.is_zero()
                }
            })
    }

    fn integer_form(&self) -> &IntegerForm {
        self.integer_form.get_or_init(|| {
            let (denom, numers) = integerize(&self.data);
            IntegerForm { denom, numers }
        })
    }

    /// Entries multiplied by `factor`, or `None` if any product is fractional.
    pub fn to_integers(&self, factor: &BigInt) -> Option<Vec<Vec<BigInt>>> {
        let f = Rational::from_integer(factor.clone());
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .map(|v| {
                        let s = v * &f;
                        s.is_integer().then(|| s.to_integer())
                    })
                    .collect()
            })
            .collect()
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix, ArithError> {
        if self.cols != other.rows {
            return Err(ArithError::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let a = self.integer_form();
        let b = other.integer_form();
        let denom = Rational::from_integer(&a.denom * &b.denom);
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = BigInt::zero();
                for k in 0..self.cols {
                    acc += &a.numers[r * self.cols + k] * &b.numers[k * other.cols + c];
                }
                data.push(Rational::from_integer(acc) / &denom);
            }
        }
        metrics::record_macs((self.rows * self.cols * other.cols) as u64);
        Matrix::new(self.rows, other.cols, data)
    }

    /// Column-vector product `self · v`.
    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>, ArithError> {
        if v.len() != self.cols {
            return Err(ArithError::DimensionMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        let m = self.integer_form();
        let (vden, vnum) = integerize(v);
        let denom = Rational::from_integer(&m.denom * vden);
        let out = (0..self.rows)
            .map(|r| {
                let acc: BigInt = (0..self.cols)
                    .map(|c| &m.numers[r * self.cols + c] * &vnum[c])
                    .sum();
                Rational::from_integer(acc) / &denom
            })
            .collect();
        metrics::record_macs((self.rows * self.cols) as u64);
        Ok(out)
    }

    /// Exact inverse by fraction-free Gauss–Jordan elimination.
    ///
    /// Rows are first scaled to integers (`A' = R·A` with `R` diagonal), the
    /// augmented system `[A' | I]` is reduced with Bareiss' exact divisions,
    /// and `A⁻¹ = A'⁻¹·R`.
    pub fn invert(&self) -> Result<Matrix, ArithError> {
        if !self.is_square() {
            return Err(ArithError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let row_scales: Vec<BigInt> = (0..n).map(|r| lcm_of_denominators(self.row(r))).collect();
        let width = 2 * n;
        let mut a: Vec<Vec<BigInt>> = (0..n)
            .map(|r| {
                let mut row: Vec<BigInt> = self
                    .row(r)
                    .iter()
                    .map(|v| v.numer() * (&row_scales[r] / v.denom()))
                    .collect();
                row.extend((0..n).map(|c| {
                    if c == r {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                }));
                row
            })
            .collect();

        let mut prev = BigInt::one();
        for k in 0..n {
            let pivot = (k..n)
                .find(|&r| !a[r][k].is_zero())
                .ok_or(ArithError::Singular)?;
            a.swap(k, pivot);
            let pivot_row = a[k].clone();
            for (i, row) in a.iter_mut().enumerate() {
                if i == k {
                    continue;
                }
                let factor = row[k].clone();
                for j in 0..width {
                    let updated = &pivot_row[k] * &row[j] - &factor * &pivot_row[j];
                    debug_assert!((&updated % &prev).is_zero(), "Bareiss division not exact");
                    row[j] = updated / &prev;
                }
            }
            prev = pivot_row[k].clone();
        }
        metrics::record_macs((n * (n - 1) * width) as u64);

        let det = Rational::from_integer(prev);
        let mut data = Vec::with_capacity(n * n);
        for row in &a {
            for (c, scale) in row_scales.iter().enumerate() {
                data.push(Rational::from_integer(&row[n + c] * scale) / &det);
            }
        }
        Matrix::new(n, n, data)
    }

    /// Exact determinant via Bareiss elimination.
    pub fn determinant(&self) -> Result<Rational, ArithError> {
        if !self.is_square() {
            return Err(ArithError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Rational::one());
        }
        let row_scales: Vec<BigInt> = (0..n).map(|r| lcm_of_denominators(self.row(r))).collect();
        let mut a: Vec<Vec<BigInt>> = (0..n)
            .map(|r| {
                self.row(r)
                    .iter()
                    .map(|v| v.numer() * (&row_scales[r] / v.denom()))
                    .collect()
            })
            .collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            let Some(pivot) = (k..n).find(|&r| !a[r][k].is_zero()) else {
                return Ok(Rational::zero());
            };
            if pivot != k {
                a.swap(k, pivot);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let updated = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                    a[i][j] = updated / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        let scale: BigInt = row_scales.iter().product();
        Ok(Rational::new(sign * prev, scale))
    }

    /// Rank by fraction-free row reduction.
    pub fn rank(&self) -> usize {
        let mut a: Vec<Vec<BigInt>> = (0..self.rows)
            .map(|r| {
                let scale = lcm_of_denominators(self.row(r));
                self.row(r)
                    .iter()
                    .map(|v| v.numer() * (&scale / v.denom()))
                    .collect()
            })
            .collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..self.rows).find(|&r| !a[r][col].is_zero()) else {
                continue;
            };
            a.swap(rank, pivot);
            let pivot_row = a[rank].clone();
            for row in a.iter_mut().skip(rank + 1) {
                if row[col].is_zero() {
                    continue;
                }
                let factor = row[col].clone();
                for (j, cell) in row.iter_mut().enumerate().skip(col) {
                    *cell = &pivot_row[col] * &*cell - &factor * &pivot_row[j];
                }
                let g = row.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
                if !g.is_zero() && !g.is_one() {
                    row.iter_mut().for_each(|v| *v /= &g);
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl Eq for Matrix {}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let cells: Vec<String> = self.row(r).iter().map(format_rational).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|r| self.row(r).iter().map(format_rational).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        Matrix::parse_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Row-vector product `v · m`.
pub fn vec_mat_mul(v: &[Rational], m: &Matrix) -> Result<Vec<Rational>, ArithError> {
    if v.len() != m.rows {
        return Err(ArithError::DimensionMismatch {
            expected: m.rows,
            actual: v.len(),
        });
    }
    let form = m.integer_form();
    let (vden, vnum) = integerize(v);
    let denom = Rational::from_integer(&form.denom * vden);
    let out = (0..m.cols)
        .map(|c| {
            let acc: BigInt = (0..m.rows)
                .map(|r| &vnum[r] * &form.numers[r * m.cols + c])
                .sum();
            Rational::from_integer(acc) / &denom
        })
        .collect();
    metrics::record_macs((m.rows * m.cols) as u64);
    Ok(out)
}

pub fn dot(u: &[Rational], v: &[Rational]) -> Result<Rational, ArithError> {
    if u.len() != v.len() {
        return Err(ArithError::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let (uden, unum) = integerize(u);
    let (vden, vnum) = integerize(v);
    let acc: BigInt = unum.iter().zip(&vnum).map(|(a, b)| a * b).sum();
    metrics::record_macs(u.len() as u64);
    Ok(Rational::new(acc, uden * vden))
}

/// Inclusive range of sampled entries, expressed as `numerator / denominator`
/// with integer numerators. The default is `0.1 ..= 9.9` in steps of `0.1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRange {
    pub low: i64,
    pub high: i64,
    pub denominator: i64,
}

impl Default for EntryRange {
    fn default() -> Self {
        Self {
            low: 1,
            high: 99,
            denominator: 10,
        }
    }
}

impl EntryRange {
    /// Integer entries in `low ..= high`.
    pub fn integers(low: i64, high: i64) -> Self {
        Self {
            low,
            high,
            denominator: 1,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Rational {
        Rational::new(
            BigInt::from(rng.gen_range(self.low..=self.high)),
            BigInt::from(self.denominator),
        )
    }

    pub fn contains(&self, v: &Rational) -> bool {
        let scaled = v * Rational::from_integer(BigInt::from(self.denominator));
        scaled.is_integer()
            && scaled >= Rational::from_integer(BigInt::from(self.low))
            && scaled <= Rational::from_integer(BigInt::from(self.high))
    }
}

const SAMPLE_ATTEMPTS: usize = 64;

/// Samples an `n×n` invertible matrix with entries from `range`, resampling
/// singular draws.
pub fn sample_invertible<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    range: EntryRange,
) -> Result<Matrix, ArithError> {
    for _ in 0..SAMPLE_ATTEMPTS {
        let data = (0..n * n).map(|_| range.sample(rng)).collect();
        let m = Matrix::new(n, n, data)?;
        if !m.determinant()?.is_zero() {
            return Ok(m);
        }
    }
    Err(ArithError::ResampleExhausted(SAMPLE_ATTEMPTS))
}
