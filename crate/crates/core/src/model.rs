//! Value types shared by the solvers and the simulator.
//!
//! Matrices are stored row-major with users as rows and channels as
//! columns. Rates are in Mbit/s; airtime fractions are dimensionless.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column sums of externally supplied allocations may deviate from one by
/// at most this much. Allocations produced by the solvers are held to
/// [`COLUMN_SUM_TOLERANCE`].
pub const FEASIBILITY_TOLERANCE: f64 = 1e-6;

/// Column-sum tolerance met by every allocation the library produces.
pub const COLUMN_SUM_TOLERANCE: f64 = 1e-9;

/// Airtime at or below this value counts as zero when classifying support.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-9;

const RANGE_SLACK: f64 = 1e-12;

/// Dense row-major matrix without domain invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::dim(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_columns(columns: &[Vec<f64>], rows: usize) -> Self {
        let cols = columns.len();
        let mut m = Matrix::zeros(rows, cols);
        for (k, col) in columns.iter().enumerate() {
            debug_assert_eq!(col.len(), rows);
            for (i, &v) in col.iter().enumerate() {
                m.data[i * cols + k] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.cols + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, k: usize, value: f64) {
        self.data[i * self.cols + k] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, k)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column_sum(&self, k: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, k)).sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Bit rates `b[i][k]` of user `i` on channel `k`.
///
/// Every entry is finite and non-negative, and every user has a positive
/// rate on at least one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix(Matrix);

impl RateMatrix {
    pub fn new<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::from_matrix(Matrix::from_rows(rows)?)
    }

    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if m.rows() == 0 || m.cols() == 0 {
            return Err(Error::InvalidRates(
                "need at least one user and one channel".into(),
            ));
        }
        for i in 0..m.rows() {
            let row = m.row(i);
            if let Some(k) = row.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidRates(format!(
                    "entry ({i}, {k}) = {} is not a finite non-negative rate",
                    row[k]
                )));
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroRow { user: i });
            }
        }
        Ok(RateMatrix(m))
    }

    pub fn num_users(&self) -> usize {
        self.0.rows()
    }

    pub fn num_channels(&self) -> usize {
        self.0.cols()
    }

    #[inline]
    pub fn rate(&self, user: usize, channel: usize) -> f64 {
        self.0.get(user, channel)
    }

    pub fn user_rates(&self, user: usize) -> &[f64] {
        self.0.row(user)
    }

    pub fn channel_rates(&self, channel: usize) -> Vec<f64> {
        self.0.column(channel)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.to_rows()
    }

    /// Keeps only the listed users, in the given order.
    pub fn select_users(&self, users: &[usize]) -> Result<Self> {
        let rows: Vec<&[f64]> = users.iter().map(|&i| self.0.row(i)).collect();
        RateMatrix::new(&rows)
    }
}

/// Airtime fractions `P[i][k]`: each entry in `[0, 1]`, each column sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation(Matrix);

impl Allocation {
    pub fn new<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::from_matrix(Matrix::from_rows(rows)?)
    }

    /// Validates ranges and column sums (within [`FEASIBILITY_TOLERANCE`]).
    /// Entries within `1e-12` outside `[0, 1]` are clamped.
    pub fn from_matrix(mut m: Matrix) -> Result<Self> {
        if m.rows() == 0 || m.cols() == 0 {
            return Err(Error::dim("allocation must be non-empty"));
        }
        for i in 0..m.rows() {
            for k in 0..m.cols() {
                let v = m.get(i, k);
                if !v.is_finite() || !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&v) {
                    return Err(Error::OutOfRange {
                        user: i,
                        channel: k,
                        value: v,
                    });
                }
                m.set(i, k, v.clamp(0.0, 1.0));
            }
        }
        for k in 0..m.cols() {
            let sum = m.column_sum(k);
            if (sum - 1.0).abs() > FEASIBILITY_TOLERANCE {
                return Err(Error::Infeasible { channel: k, sum });
            }
        }
        Ok(Allocation(m))
    }

    /// Equal split of every channel among all users.
    pub fn uniform(users: usize, channels: usize) -> Self {
        Allocation(Matrix::filled(users, channels, 1.0 / users as f64))
    }

    pub(crate) fn from_columns_unchecked(columns: &[Vec<f64>], users: usize) -> Self {
        Allocation(Matrix::from_columns(columns, users))
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix) -> Self {
        Allocation(m)
    }

    pub fn num_users(&self) -> usize {
        self.0.rows()
    }

    pub fn num_channels(&self) -> usize {
        self.0.cols()
    }

    #[inline]
    pub fn fraction(&self, user: usize, channel: usize) -> f64 {
        self.0.get(user, channel)
    }

    pub fn user_fractions(&self, user: usize) -> &[f64] {
        self.0.row(user)
    }

    pub fn channel_fractions(&self, channel: usize) -> Vec<f64> {
        self.0.column(channel)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.to_rows()
    }

    /// Largest deviation of any column sum from one.
    pub fn max_column_error(&self) -> f64 {
        (0..self.num_channels())
            .map(|k| (self.0.column_sum(k) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Number of entries strictly above `zero_threshold`.
    pub fn support_size(&self, zero_threshold: f64) -> usize {
        self.0.as_slice().iter().filter(|&&v| v > zero_threshold).count()
    }
}

impl Serialize for Allocation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Allocation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Allocation::new(&rows).map_err(serde::de::Error::custom)
    }
}

/// Per-user utility weights (subscription costs). All strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidWeights("no weights given".into()));
        }
        if let Some(i) = values.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidWeights(format!(
                "weight {i} = {} is not a positive finite number",
                values[i]
            )));
        }
        Ok(Weights(values))
    }

    pub fn uniform(users: usize) -> Self {
        Weights(vec![1.0; users])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.0.iter().all(|&w| w == 1.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn check_len(&self, users: usize) -> Result<()> {
        if self.0.len() != users {
            return Err(Error::dim(format!(
                "{} weights for {users} users",
                self.0.len()
            )));
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for Weights {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        Weights::new(values).map_err(serde::de::Error::custom)
    }
}

/// An optimized allocation with its derived quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfSolution {
    pub allocation: Allocation,
    pub throughputs: Vec<f64>,
    pub shadow_prices: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
}
