use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Least-squares polynomial fit on the local index `i = 1..=s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    /// Coefficients in ascending powers of `i`.
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
}

/// Quadratic trend `a i^2 + b i + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub fitted: Vec<f64>,
}

impl QuadFit {
    pub fn residuals<'a>(&'a self, values: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        values.iter().zip(&self.fitted).map(|(y, f)| y - f)
    }
}

pub fn quad_polyfit(values: &[f64]) -> Result<QuadFit> {
    let fit = polyfit(values, 2)?;
    Ok(QuadFit {
        a: fit.coefficients[2],
        b: fit.coefficients[1],
        c: fit.coefficients[0],
        fitted: fit.fitted,
    })
}

/// Fits a polynomial of the given order by SVD least squares.
pub fn polyfit(values: &[f64], order: usize) -> Result<PolyFit> {
    let s = values.len();
    if s < order + 1 {
        return Err(Error::InvalidParameter(format!(
            "order-{order} fit needs at least {} samples, got {s}",
            order + 1
        )));
    }
    let design = vandermonde(s, order);
    let y = DVector::from_column_slice(values);
    let svd = design.clone().svd(true, true);
    let coef = svd
        .solve(&y, f64::EPSILON * s as f64)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let fitted = &design * &coef;
    Ok(PolyFit {
        coefficients: coef.iter().copied().collect(),
        fitted: fitted.iter().copied().collect(),
    })
}

fn vandermonde(s: usize, order: usize) -> DMatrix<f64> {
    DMatrix::from_fn(s, order + 1, |r, p| ((r + 1) as f64).powi(p as i32))
}

/// Orthonormal polynomial basis on `1..=s`, used to remove the least-squares
/// trend from many equal-length segments without refitting each one.
#[derive(Debug, Clone)]
pub struct DetrendBasis {
    len: usize,
    // (order + 1) orthonormal columns stored contiguously.
    basis: Vec<Vec<f64>>,
}

impl DetrendBasis {
    pub fn new(s: usize, order: usize) -> Result<Self> {
        if s < order + 1 {
            return Err(Error::InvalidParameter(format!(
                "order-{order} detrending needs segments of at least {} samples, got {s}",
                order + 1
            )));
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
        // Centre and scale the index before Gram-Schmidt to keep powers tame.
        let mid = (s as f64 + 1.0) / 2.0;
        let half = (s as f64 / 2.0).max(1.0);
        for p in 0..=order {
            let mut v: Vec<f64> = (1..=s)
                .map(|i| ((i as f64 - mid) / half).powi(p as i32))
                .collect();
            // Two passes of modified Gram-Schmidt.
            for _ in 0..2 {
                for q in &basis {
                    let d = dot(&v, q);
                    v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
                }
            }
            let norm = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|a| *a /= norm);
            basis.push(v);
        }
        Ok(Self { len: s, basis })
    }

    pub fn segment_len(&self) -> usize {
        self.len
    }

    /// Writes `y - trend(y)` into `out`.
    pub fn residuals_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.len);
        out.copy_from_slice(y);
        for q in &self.basis {
            let d = dot(y, q);
            out.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
