//! Small dense linear algebra: row-major matrices, pivoted LU, and
//! Sherman-Morrison rank-one maintenance of an explicit inverse.
//!
//! Dimensions in this crate are tiny (d is at most a few hundred), so
//! everything is plain `Vec<f64>` storage with straightforward loops.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominators `1 + vᵀM⁻¹u` at or below this magnitude are rejected.
pub const DENOMINATOR_EPSILON: f64 = 1e-12;

/// Pivots at or below this magnitude make `solve`/`invert` fail.
pub const PIVOT_EPSILON: f64 = 1e-12;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Vector {
            data: vec![0.0; dim],
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        Vector { data }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[i] = 1.0;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn norm2(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, alpha: f64) -> Vector {
        Vector::from_vec(self.data.iter().map(|x| alpha * x).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector::from_vec(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Vector { data }
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.data).finish()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
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

    pub fn identity(d: usize) -> Self {
        Self::scaled_identity(d, 1.0)
    }

    pub fn scaled_identity(d: usize, alpha: f64) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m.data[i * d + i] = alpha;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        let mut m = Self::zeros(d, d);
        for (i, v) in values.iter().enumerate() {
            m.data[i * d + i] = *v;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn mul_vec(&self, x: &Vector) -> Result<Vector> {
        if x.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.dim(),
            });
        }
        Ok(Vector::from_vec(self.mul_slice(x.as_slice())))
    }

    pub(crate) fn mul_slice(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                axpy(
                    a,
                    other.row(k),
                    &mut out.data[i * other.cols..(i + 1) * other.cols],
                );
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// `self += alpha * u vᵀ`
    pub fn add_outer(&mut self, alpha: f64, u: &[f64], v: &[f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (r, ur) in u.iter().enumerate() {
            let a = alpha * ur;
            if a == 0.0 {
                continue;
            }
            axpy(a, v, &mut self.data[r * self.cols..(r + 1) * self.cols]);
        }
    }

    pub fn add_diagonal(&mut self, alpha: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += alpha;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn same_shape(&self, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

/// Relative Frobenius distance `‖a − b‖ / max(‖b‖, tiny)`.
pub fn relative_frobenius_error(a: &Matrix, b: &Matrix) -> f64 {
    let diff = a.sub(b).map(|m| m.frobenius_norm()).unwrap_or(f64::INFINITY);
    diff / b.frobenius_norm().max(f64::MIN_POSITIVE)
}

/// Scratch buffers for repeated in-place rank-one updates.
#[derive(Debug, Default, Clone)]
pub struct RankOneWorkspace {
    mu: Vec<f64>,
    vm: Vec<f64>,
}

impl RankOneWorkspace {
    pub fn new(d: usize) -> Self {
        RankOneWorkspace {
            mu: vec![0.0; d],
            vm: vec![0.0; d],
        }
    }
}

/// Replaces `m_inv` (holding M⁻¹) by (M + uvᵀ)⁻¹. On failure returns the
/// offending denominator and leaves `m_inv` untouched.
pub(crate) fn rank_one_update_in_place(
    m_inv: &mut Matrix,
    u: &[f64],
    v: &[f64],
    ws: &mut RankOneWorkspace,
) -> std::result::Result<(), f64> {
    let d = m_inv.rows;
    ws.mu.resize(d, 0.0);
    ws.vm.resize(d, 0.0);

    // mu = M⁻¹u, vm = vᵀM⁻¹
    for r in 0..d {
        ws.mu[r] = dot(m_inv.row(r), u);
    }
    ws.vm.iter_mut().for_each(|x| *x = 0.0);
    for (r, vr) in v.iter().enumerate() {
        if *vr != 0.0 {
            axpy(*vr, m_inv.row(r), &mut ws.vm);
        }
    }

    let denominator = 1.0 + dot(v, &ws.mu);
    if !(denominator.abs() > DENOMINATOR_EPSILON) {
        return Err(denominator);
    }
    let scale = -1.0 / denominator;
    for r in 0..d {
        let a = scale * ws.mu[r];
        if a != 0.0 {
            axpy(a, &ws.vm, &mut m_inv.data[r * d..(r + 1) * d]);
        }
    }
    Ok(())
}

fn check_square(m: &Matrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows,
            found: m.cols,
        });
    }
    Ok(m.rows)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Returns (M + uvᵀ)⁻¹ given M⁻¹.
pub fn sherman_morrison(m_inv: &Matrix, u: &Vector, v: &Vector) -> Result<Matrix> {
    let d = check_square(m_inv)?;
    check_dim(d, u.dim())?;
    check_dim(d, v.dim())?;
    let mut out = m_inv.clone();
    let mut ws = RankOneWorkspace::new(d);
    rank_one_update_in_place(&mut out, u.as_slice(), v.as_slice(), &mut ws)
        .map_err(|denominator| Error::SingularUpdate { step: 0, denominator })?;
    if !out.is_finite() {
        return Err(Error::SingularUpdate {
            step: 0,
            denominator: f64::NAN,
        });
    }
    Ok(out)
}

/// Folds Sherman-Morrison over `pairs` in order, yielding (M + Σ u_t v_tᵀ)⁻¹.
///
/// A failure reports the zero-based index of the offending pair.
pub fn recursive_sherman_morrison<'a, I>(m_inv: &Matrix, pairs: I) -> Result<Matrix>
where
    I: IntoIterator<Item = (&'a Vector, &'a Vector)>,
{
    let d = check_square(m_inv)?;
    let mut out = m_inv.clone();
    let mut ws = RankOneWorkspace::new(d);
    for (step, (u, v)) in pairs.into_iter().enumerate() {
        check_dim(d, u.dim())?;
        check_dim(d, v.dim())?;
        rank_one_update_in_place(&mut out, u.as_slice(), v.as_slice(), &mut ws)
            .map_err(|denominator| Error::SingularUpdate { step, denominator })?;
    }
    if !out.is_finite() {
        return Err(Error::SingularUpdate {
            step: 0,
            denominator: f64::NAN,
        });
    }
    Ok(out)
}

/// LU factorization with partial pivoting, `PA = LU`.
#[derive(Debug, Clone)]
pub struct Lu {
    d: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Self> {
        let d = check_square(a)?;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..d).collect();
        for k in 0..d {
            let (p, pivot) = (k..d)
                .map(|r| (r, lu[r * d + k]))
                .fold((k, 0.0f64), |best, (r, x)| {
                    if x.abs() > best.1.abs() {
                        (r, x)
                    } else {
                        best
                    }
                });
            if !(pivot.abs() > PIVOT_EPSILON) {
                return Err(Error::Singular { column: k, pivot });
            }
            if p != k {
                for c in 0..d {
                    lu.swap(k * d + c, p * d + c);
                }
                perm.swap(k, p);
            }
            for r in k + 1..d {
                let factor = lu[r * d + k] / pivot;
                lu[r * d + k] = factor;
                if factor != 0.0 {
                    for c in k + 1..d {
                        lu[r * d + c] -= factor * lu[k * d + c];
                    }
                }
            }
        }
        Ok(Lu { d, lu, perm })
    }

    fn solve_slice(&self, b: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..d {
            let s = dot(&self.lu[r * d..r * d + r], &x[..r]);
            x[r] -= s;
        }
        for r in (0..d).rev() {
            let s = dot(&self.lu[r * d + r + 1..(r + 1) * d], &x[r + 1..]);
            x[r] = (x[r] - s) / self.lu[r * d + r];
        }
        x
    }

    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        check_dim(self.d, b.dim())?;
        let x = Vector::from_vec(self.solve_slice(b.as_slice()));
        if !x.is_finite() {
            return Err(Error::Singular {
                column: 0,
                pivot: f64::NAN,
            });
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        let d = self.d;
        let mut out = Matrix::zeros(d, d);
        let mut e = vec![0.0; d];
        for c in 0..d {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[c] = 1.0;
            let col = self.solve_slice(&e);
            for (r, x) in col.into_iter().enumerate() {
                out.data[r * d + c] = x;
            }
        }
        if !out.is_finite() {
            return Err(Error::Singular {
                column: 0,
                pivot: f64::NAN,
            });
        }
        Ok(out)
    }
}

pub fn solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    Lu::factor(a)?.solve(b)
}

pub fn invert(a: &Matrix) -> Result<Matrix> {
    Lu::factor(a)?.inverse()
}


#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;

    #[test]
    fn zero_update_is_identity() {
        let out = sherman_morrison(&Matrix::identity(2), &Vector::zeros(2), &Vector::zeros(2)).unwrap();
        assert_eq!(out, Matrix::identity(2));
    }

    #[test]
    fn basis_update_halves_one_entry() {
        let e1 = Vector::basis(2, 0);
        let out = sherman_morrison(&Matrix::identity(2), &e1, &e1).unwrap();
        assert_eq!(out, Matrix::diag(&[0.5, 1.0]));
    }

    #[test]
    fn singular_update_is_rejected() {
        // I + (-e1) e1ᵀ zeroes the first diagonal entry.
        let e1 = Vector::basis(2, 0);
        let err = sherman_morrison(&Matrix::identity(2), &e1.scaled(-1.0), &e1).unwrap_err();
        assert!(matches!(err, Error::SingularUpdate { step: 0, .. }));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = sherman_morrison(&Matrix::identity(3), &Vector::zeros(2), &Vector::zeros(3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, found: 2 }));
        assert!(solve(&Matrix::zeros(2, 3), &Vector::zeros(2)).is_err());
    }

    #[test]
    fn single_update_matches_direct_inverse() {
        let mut rng = rng(11);
        let m = random_well_conditioned(&mut rng, 4);
        let (u, v) = (random_vector(&mut rng, 4), random_vector(&mut rng, 4));
        let got = sherman_morrison(&invert(&m).unwrap(), &u, &v).unwrap();
        let want = direct_updated_inverse(&m, &[(u, v)]);
        assert!(relative_frobenius_error(&got, &want) <= 1e-10);
    }

    #[test]
    fn recursive_fold_edge_cases() {
        let mut rng = rng(5);
        let m_inv = invert(&random_well_conditioned(&mut rng, 3)).unwrap();
        let empty: Vec<(Vector, Vector)> = Vec::new();
        assert_eq!(
            recursive_sherman_morrison(&m_inv, empty.iter().map(|(u, v)| (u, v))).unwrap(),
            m_inv
        );

        let (u, v) = (random_vector(&mut rng, 3), random_vector(&mut rng, 3));
        assert_eq!(
            recursive_sherman_morrison(&m_inv, [(&u, &v)]).unwrap(),
            sherman_morrison(&m_inv, &u, &v).unwrap()
        );
    }

    #[test]
    fn recursive_fold_matches_direct_inverse() {
        let mut rng = rng(17);
        let m = random_well_conditioned(&mut rng, 3);
        let pairs: Vec<_> = (0..6)
            .map(|_| (random_vector(&mut rng, 3), random_vector(&mut rng, 3)))
            .collect();
        let got = recursive_sherman_morrison(&invert(&m).unwrap(), pairs.iter().map(|(u, v)| (u, v))).unwrap();
        let want = direct_updated_inverse(&m, &pairs);
        assert!(relative_frobenius_error(&got, &want) <= 1e-9);
    }

    #[test]
    fn recursive_fold_reports_failing_step() {
        let e1 = Vector::basis(2, 0);
        let half = e1.scaled(-0.5);
        let pairs = [(&half, &e1), (&half, &e1)];
        let err = recursive_sherman_morrison(&Matrix::identity(2), pairs).unwrap_err();
        assert!(matches!(err, Error::SingularUpdate { step: 1, .. }));
    }

    #[test]
    fn solve_small_systems() {
        let x = solve(&Matrix::identity(3), &Vector::from_vec(vec![1.0, 2.0, 3.0])).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 2.0, 3.0]);
        let x = solve(&Matrix::diag(&[2.0, 4.0]), &Vector::from_vec(vec![2.0, 4.0])).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn solve_random_spd_residual() {
        let mut rng = rng(3);
        let g = random_well_conditioned(&mut rng, 5);
        let mut spd = Matrix::zeros(5, 5);
        for r in 0..5 {
            for c in 0..5 {
                spd[(r, c)] = (0..5).map(|k| g[(k, r)] * g[(k, c)]).sum();
            }
        }
        let b = random_vector(&mut rng, 5);
        let x = solve(&spd, &b).unwrap();
        let residual = spd.mul_vec(&x).unwrap().sub(&b).norm_inf();
        assert!(residual <= 1e-8 * (1.0 + b.norm_inf()));
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let x = solve(&a, &Vector::from_vec(vec![3.0, 7.0])).unwrap();
        assert_eq!(x.as_slice(), &[7.0, 3.0]);
    }

    #[test]
    fn invert_small_and_random() {
        assert_eq!(invert(&Matrix::identity(4)).unwrap(), Matrix::identity(4));
        assert_eq!(invert(&Matrix::diag(&[2.0, 5.0])).unwrap(), Matrix::diag(&[0.5, 0.2]));

        let mut rng = rng(23);
        let a = random_well_conditioned(&mut rng, 6);
        let prod = a.matmul(&invert(&a).unwrap()).unwrap();
        assert!(prod.sub(&Matrix::identity(6)).unwrap().max_abs() <= 1e-8);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(invert(&a), Err(Error::Singular { .. })));
        assert!(matches!(
            solve(&Matrix::zeros(2, 2), &Vector::zeros(2)),
            Err(Error::Singular { column: 0, .. })
        ));
    }
}
