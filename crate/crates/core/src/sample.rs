//! Row-major point samples with column names.

use crate::error::{AqError, Result};

/// An ordered list of `n` points in `R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    dim: usize,
    data: Vec<f64>,
    names: Vec<String>,
}

impl Sample {
    /// Builds a sample from row-major data. Column names default to `x1..xm`.
    pub fn from_rows(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(AqError::InvalidParameter("dimension must be positive".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(AqError::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        if data.is_empty() {
            return Err(AqError::EmptySample);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(AqError::NonFinite);
        }
        let names = (1..=dim).map(|k| format!("x{k}")).collect();
        Ok(Self { dim, data, names })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().ok_or(AqError::EmptySample)?.len();
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(AqError::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            data.extend_from_slice(p);
        }
        Self::from_rows(dim, data)
    }

    /// One-dimensional sample.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::from_rows(1, values.to_vec())
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim {
            return Err(AqError::DimensionMismatch {
                expected: self.dim,
                found: names.len(),
            });
        }
        self.names = names;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.dim + k]
    }

    /// Column `k` in point order.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.points().map(|p| p[k]).collect()
    }

    /// Column `k` restricted to `indices`, in the order given.
    pub fn column_of(&self, indices: &[usize], k: usize) -> Vec<f64> {
        indices.iter().map(|&i| self.value(i, k)).collect()
    }

    /// New sample made of the selected rows.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        Self::from_rows(self.dim, data)?.with_names(self.names.clone())
    }

    pub fn rows(&self) -> &[f64] {
        &self.data
    }
}

/// Mean of column `k` over `indices`, summed in the order given.
pub fn column_mean(sample: &Sample, indices: &[usize], k: usize) -> f64 {
    let sum: f64 = indices.iter().map(|&i| sample.value(i, k)).sum();
    sum / indices.len() as f64
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert_eq!(Sample::from_rows(2, vec![]), Err(AqError::EmptySample));
        assert_eq!(
            Sample::from_values(&[1.0, f64::NAN]),
            Err(AqError::NonFinite)
        );
        assert!(Sample::from_rows(2, vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn accessors() {
        let s = Sample::from_points(&[vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.point(1), &[2.0, 3.0]);
        assert_eq!(s.column(1), vec![1.0, 3.0]);
        assert_eq!(column_mean(&s, &[0, 1], 0), 1.0);
        assert_eq!(s.names(), &["x1".to_string(), "x2".to_string()]);
    }
}
