//! Element-wise Lagrange interpolation of reduced systems over the
//! parameter space.
//!
//! A stencil of `C(n + m, m)` nearest training points is fitted with the
//! full polynomial space of total degree `n` in `m` variables. Parameters
//! are first mapped to `[0, 1]` per coordinate; distances and monomials are
//! evaluated in those coordinates.

use nalgebra::{DMatrix, DVector};

use crate::rom::{RomDatabase, RomInstance};

/// Stencils with a larger 2-norm condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;
pub const MAX_RETRIES: usize = 5;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum InterpError {
    #[error("need {needed} training points, have {available}")]
    TooFewPoints { needed: usize, available: usize },
    #[error("stencil {indices:?} is ill-conditioned (condition number {condition:e})")]
    IllConditioned { indices: Vec<usize>, condition: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Maps `theta` to `[0, 1]` per coordinate; degenerate ranges map to 0.
pub fn normalize(theta: &[f64], ranges: &[[f64; 2]]) -> Vec<f64> {
    theta
        .iter()
        .zip(ranges)
        .map(|(t, r)| {
            let w = r[1] - r[0];
            if w > 0.0 {
                (t - r[0]) / w
            } else {
                0.0
            }
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of monomials of total degree at most `degree` in `dim` variables.
pub fn stencil_size(degree: usize, dim: usize) -> usize {
    binomial(degree + dim, dim)
}

/// Exponents of the monomial basis, ordered by total degree, then by the
/// largest single exponent, then lexicographically descending. For two
/// variables and degree 2 this is `1, t1, t2, t1 t2, t1^2, t2^2`.
pub fn monomial_exponents(degree: usize, dim: usize) -> Vec<Vec<usize>> {
    fn all(dim: usize, total: usize) -> Vec<Vec<usize>> {
        if dim == 1 {
            return vec![vec![total]];
        }
        let mut out = Vec::new();
        for first in (0..=total).rev() {
            for mut rest in all(dim - 1, total - first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    let mut exps = Vec::new();
    for d in 0..=degree {
        let mut level = all(dim, d);
        level.sort_by(|a, b| {
            let ma = a.iter().max().unwrap_or(&0);
            let mb = b.iter().max().unwrap_or(&0);
            ma.cmp(mb).then_with(|| b.cmp(a))
        });
        exps.extend(level);
    }
    exps
}

fn monomials(exps: &[Vec<usize>], x: &[f64]) -> Vec<f64> {
    exps.iter()
        .map(|e| e.iter().zip(x).map(|(&p, &v)| v.powi(p as i32)).product())
        .collect()
}

/// Indices of the `count` training points closest to `query` in normalised
/// coordinates; ties go to the lower index.
pub fn nearest_neighbors(
    query: &[f64],
    train: &[Vec<f64>],
    ranges: &[[f64; 2]],
    count: usize,
) -> Result<Vec<usize>, InterpError> {
    if train.len() < count {
        return Err(InterpError::TooFewPoints {
            needed: count,
            available: train.len(),
        });
    }
    let mut order = ranked(query, train, ranges)?;
    order.truncate(count);
    Ok(order)
}

/// All training indices sorted by normalised distance to `query`.
fn ranked(query: &[f64], train: &[Vec<f64>], ranges: &[[f64; 2]]) -> Result<Vec<usize>, InterpError> {
    if query.len() != ranges.len() {
        return Err(InterpError::DimensionMismatch(format!(
            "query has {} coordinates, ranges have {}",
            query.len(),
            ranges.len()
        )));
    }
    let q = normalize(query, ranges);
    let mut dist = Vec::with_capacity(train.len());
    for (i, t) in train.iter().enumerate() {
        if t.len() != ranges.len() {
            return Err(InterpError::DimensionMismatch(format!(
                "training point {i} has {} coordinates",
                t.len()
            )));
        }
        let x = normalize(t, ranges);
        let d2: f64 = x.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum();
        dist.push((d2, i));
    }
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(dist.into_iter().map(|(_, i)| i).collect())
}

/// A fitted stencil: the selected points and the Lagrange weights of the
/// query, `l = M^{-T} a(query)`, so that the interpolant of any values `v`
/// is `l . v`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeStencil {
    pub degree: usize,
    pub indices: Vec<usize>,
    /// Rows are the monomials at each stencil point (normalised).
    pub vandermonde: DMatrix<f64>,
    pub weights: DVector<f64>,
    pub condition: f64,
    /// Factorisations performed to obtain this stencil.
    pub factorizations: usize,
    pub retries: usize,
    pub extrapolated: bool,
}

impl LagrangeStencil {
    pub fn eval(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = m.singular_values();
    if s.min() == 0.0 {
        f64::INFINITY
    } else {
        s.max() / s.min()
    }
}

fn fit(degree: usize, indices: Vec<usize>, points: &[Vec<f64>], query: &[f64]) -> Result<LagrangeStencil, InterpError> {
    let dim = query.len();
    let exps = monomial_exponents(degree, dim);
    let s = exps.len();
    let mut vandermonde = DMatrix::zeros(s, s);
    for (r, &i) in indices.iter().enumerate() {
        for (c, v) in monomials(&exps, &points[i]).into_iter().enumerate() {
            vandermonde[(r, c)] = v;
        }
    }
    let condition = condition_number(&vandermonde);
    if !(condition <= MAX_CONDITION) {
        return Err(InterpError::IllConditioned { indices, condition });
    }
    let a = DVector::from_vec(monomials(&exps, query));
    let weights = vandermonde
        .transpose()
        .lu()
        .solve(&a)
        .ok_or_else(|| InterpError::IllConditioned {
            indices: indices.clone(),
            condition,
        })?;
    Ok(LagrangeStencil {
        degree,
        indices,
        vandermonde,
        weights,
        condition,
        factorizations: 1,
        retries: 0,
        extrapolated: false,
    })
}

/// Chooses and factorises the stencil for `query`. An ill-conditioned
/// stencil has its farthest point swapped for the next-nearest unused one,
/// up to [`MAX_RETRIES`] times.
pub fn build_stencil(
    query: &[f64],
    train: &[Vec<f64>],
    ranges: &[[f64; 2]],
    degree: usize,
) -> Result<LagrangeStencil, InterpError> {
    let size = stencil_size(degree, ranges.len());
    let order = ranked(query, train, ranges)?;
    if order.len() < size {
        return Err(InterpError::TooFewPoints {
            needed: size,
            available: order.len(),
        });
    }
    let normalized: Vec<Vec<f64>> = train.iter().map(|t| normalize(t, ranges)).collect();
    let q = normalize(query, ranges);
    let extrapolated = q.iter().any(|&v| !(0.0..=1.0).contains(&v));
    if extrapolated {
        log::warn!("interpolation query {query:?} lies outside the training ranges");
    }
    let mut indices: Vec<usize> = order[..size].to_vec();
    let mut next = size;
    let mut last_err = None;
    for retry in 0..=MAX_RETRIES {
        match fit(degree, indices.clone(), &normalized, &q) {
            Ok(mut st) => {
                st.factorizations = retry + 1;
                st.retries = retry;
                st.extrapolated = extrapolated;
                return Ok(st);
            }
            Err(e) => {
                last_err = Some(e);
                if next >= order.len() {
                    break;
                }
                // indices are kept in distance order, so the last is the farthest
                indices.pop();
                indices.push(order[next]);
                next += 1;
            }
        }
    }
    Err(last_err.expect("at least one attempt was made"))
}

/// Fits the degree-`degree` polynomial through `values` at `points` and
/// evaluates it at `query`. All points form the stencil.
pub fn lagrange_fit_eval(
    points: &[Vec<f64>],
    values: &[f64],
    query: &[f64],
    ranges: &[[f64; 2]],
    degree: usize,
) -> Result<f64, InterpError> {
    let size = stencil_size(degree, ranges.len());
    if points.len() != size || values.len() != size {
        return Err(InterpError::DimensionMismatch(format!(
            "{} points and {} values for a stencil of {size}",
            points.len(),
            values.len()
        )));
    }
    let normalized: Vec<Vec<f64>> = points.iter().map(|t| normalize(t, ranges)).collect();
    let st = fit(degree, (0..size).collect(), &normalized, &normalize(query, ranges))?;
    Ok(st.eval(values))
}

/// Interpolates every entry of `B~` and `f~` at `query` with one shared
/// stencil, then symmetrises `B~`.
pub fn interpolate_rom(
    db: &RomDatabase,
    query: &[f64],
    degree: usize,
) -> Result<(RomInstance, LagrangeStencil), InterpError> {
    let thetas = db.thetas();
    let st = build_stencil(query, &thetas, &db.ranges, degree)?;
    let k = db.k();
    let mut b = DMatrix::<f64>::zeros(k, k);
    let mut f = DVector::zeros(k);
    for (&i, &w) in st.indices.iter().zip(st.weights.iter()) {
        b += &db.instances[i].b * w;
        f.axpy(w, &db.instances[i].f, 1.0);
    }
    let b = 0.5 * (&b + b.transpose());
    Ok((
        RomInstance {
            b,
            f,
            theta: query.to_vec(),
        },
        st,
    ))
}
