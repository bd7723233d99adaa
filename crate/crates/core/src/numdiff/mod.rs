//! Derivative engine and small dense linear algebra.
//!
//! Phase-space slots are 0-based everywhere: positions `q¹..q⁴` live in
//! slots `0..4` and momenta `p₁..p₄` in slots `4..8`. The same layout is
//! used for action coordinates `(Q, P)`.
//!
//! Fields are traits with a generic `eval` so the same evaluator runs on
//! `f64`, on [`Dual`] for first derivatives and on nested duals for
//! second derivatives.

mod scalar;

pub use scalar::{Dual, Scalar};

use nalgebra::{SMatrix, SVector};

use crate::error::{Result, WarpError};

pub type Matrix8 = SMatrix<f64, 8, 8>;
pub type Matrix4 = SMatrix<f64, 4, 4>;
pub type Vector8 = SVector<f64, 8>;

/// Default central-difference step for first derivatives.
pub const FD_STEP: f64 = 1e-6;
/// Default central-difference step used by the torsion cross-check.
pub const FD_STEP_SECOND: f64 = 1e-4;

/// Smallest |det| accepted by the inversions.
pub const DET_FLOOR: f64 = 1e-14;

pub trait ScalarField {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<S>;
}

pub trait VectorField {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[S; 8]>;
}

/// Point-dependent 8×8 component array: a (1,1)-tensor (row = upper index),
/// a bivector or a two-form, depending on how it is consumed.
pub trait MatrixField {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[[S; 8]; 8]>;
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<S> {
        (**self).eval(x)
    }
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[S; 8]> {
        (**self).eval(x)
    }
}

impl<F: MatrixField + ?Sized> MatrixField for &F {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[[S; 8]; 8]> {
        (**self).eval(x)
    }
}

/// Lifts `x` into duals with the derivative channel seeded along `dir`.
pub fn seed<S: Scalar>(x: &[S; 8], dir: usize) -> [Dual<S>; 8] {
    std::array::from_fn(|i| {
        if i == dir {
            Dual::variable(x[i])
        } else {
            Dual::constant(x[i])
        }
    })
}

pub fn lift<S: Scalar>(x: &[f64; 8]) -> [S; 8] {
    x.map(S::cst)
}

pub fn real_parts<S: Scalar>(x: &[S; 8]) -> [f64; 8] {
    std::array::from_fn(|i| x[i].re())
}

/// Gradient on any scalar level, one directional pass per slot.
pub fn grad_generic<S: Scalar, F: ScalarField>(f: &F, x: &[S; 8]) -> Result<[S; 8]> {
    let mut out = [S::zero(); 8];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = f.eval(&seed(x, k))?.eps;
    }
    Ok(out)
}

/// `(∂f/∂q¹..∂f/∂q⁴, ∂f/∂p₁..∂f/∂p₄)` at `x`.
pub fn grad<F: ScalarField>(f: &F, x: &[f64; 8]) -> Result<[f64; 8]> {
    let g = grad_generic(f, x)?;
    if g.iter().all(|v| v.is_finite()) {
        Ok(g)
    } else {
        Err(WarpError::NumericalDomain(format!("gradient at {x:?}")))
    }
}

/// `J[i][k] = ∂_k V^i`, generic so it can itself be differentiated.
pub fn jacobian_generic<S: Scalar, V: VectorField>(v: &V, x: &[S; 8]) -> Result<[[S; 8]; 8]> {
    let mut jac = [[S::zero(); 8]; 8];
    for k in 0..8 {
        let col = v.eval(&seed(x, k))?;
        for i in 0..8 {
            jac[i][k] = col[i].eps;
        }
    }
    Ok(jac)
}

pub fn jacobian<V: VectorField>(v: &V, x: &[f64; 8]) -> Result<Matrix8> {
    let jac = jacobian_generic(v, x)?;
    checked_matrix(&jac, "vector-field jacobian")
}

/// Value and all first partials of a matrix field: `d[k][i][j] = ∂_k M^i_j`.
pub fn matrix_partials<M: MatrixField>(m: &M, x: &[f64; 8]) -> Result<([[f64; 8]; 8], [[[f64; 8]; 8]; 8])> {
    let value = m.eval(x)?;
    let mut d = [[[0.0; 8]; 8]; 8];
    for (k, dk) in d.iter_mut().enumerate() {
        let lifted = m.eval(&seed(x, k))?;
        for i in 0..8 {
            for j in 0..8 {
                dk[i][j] = lifted[i][j].eps;
            }
        }
    }
    let finite = value.iter().flatten().chain(d.iter().flatten().flatten()).all(|v| v.is_finite());
    if !finite {
        return Err(WarpError::NumericalDomain(format!("matrix field partials at {x:?}")));
    }
    Ok((value, d))
}

/// Central-difference Jacobian, entry `(i, j) = (Fᵢ(x+h eⱼ) − Fᵢ(x−h eⱼ)) / 2h`.
pub fn fd_jacobian<F>(map: F, x: &[f64; 8], h: f64) -> Result<Matrix8>
where
    F: Fn(&[f64; 8]) -> Result<[f64; 8]>,
{
    if !(h > 0.0) {
        return Err(WarpError::NumericalDomain(format!("finite-difference step {h}")));
    }
    let mut jac = Matrix8::zeros();
    for j in 0..8 {
        let mut plus = *x;
        let mut minus = *x;
        plus[j] += h;
        minus[j] -= h;
        // divide by the realized step so the stencil is exact on linear maps
        let width = plus[j] - minus[j];
        let fp = map(&plus)?;
        let fm = map(&minus)?;
        for i in 0..8 {
            let v = (fp[i] - fm[i]) / width;
            if !v.is_finite() {
                return Err(WarpError::NumericalDomain(format!("stencil value in column {j}")));
            }
            jac[(i, j)] = v;
        }
    }
    Ok(jac)
}

pub fn fd_gradient<F>(f: F, x: &[f64; 8], h: f64) -> Result<[f64; 8]>
where
    F: Fn(&[f64; 8]) -> Result<f64>,
{
    let mut g = [0.0; 8];
    for (j, gj) in g.iter_mut().enumerate() {
        let mut plus = *x;
        let mut minus = *x;
        plus[j] += h;
        minus[j] -= h;
        *gj = (f(&plus)? - f(&minus)?) / (plus[j] - minus[j]);
        if !gj.is_finite() {
            return Err(WarpError::NumericalDomain(format!("finite difference in slot {j}")));
        }
    }
    Ok(g)
}

/// Inverse of a 4×4 metric matrix.
pub fn mat_inverse(g: &Matrix4) -> Result<Matrix4> {
    let det = g.determinant();
    if !det.is_finite() || det.abs() <= DET_FLOOR {
        return Err(WarpError::SingularMetric { det });
    }
    g.try_inverse().ok_or(WarpError::SingularMetric { det })
}

/// Gauss–Jordan inversion with partial pivoting on any scalar level.
pub fn invert4<S: Scalar>(g: &[[S; 4]; 4]) -> Result<[[S; 4]; 4]> {
    let mut a = *g;
    let mut inv = [[S::zero(); 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = S::one();
    }
    let mut det = 1.0;
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&r, &s| a[r][col].re().abs().total_cmp(&a[s][col].re().abs()))
            .unwrap_or(col);
        if pivot != col {
            a.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p.re();
        if p.re().abs() < 1e-300 {
            return Err(WarpError::SingularMetric { det: 0.0 });
        }
        let pinv = p.recip();
        for j in 0..4 {
            a[col][j] *= pinv;
            inv[col][j] *= pinv;
        }
        for r in 0..4 {
            if r == col {
                continue;
            }
            let factor = a[r][col];
            for j in 0..4 {
                let (ac, ic) = (a[col][j], inv[col][j]);
                a[r][j] -= factor * ac;
                inv[r][j] -= factor * ic;
            }
        }
    }
    if det.abs() <= DET_FLOOR {
        return Err(WarpError::SingularMetric { det });
    }
    Ok(inv)
}

pub fn to_matrix8(a: &[[f64; 8]; 8]) -> Matrix8 {
    Matrix8::from_fn(|i, j| a[i][j])
}

pub fn to_matrix4(a: &[[f64; 4]; 4]) -> Matrix4 {
    Matrix4::from_fn(|i, j| a[i][j])
}

pub fn checked_matrix(a: &[[f64; 8]; 8], what: &str) -> Result<Matrix8> {
    if a.iter().flatten().all(|v| v.is_finite()) {
        Ok(to_matrix8(a))
    } else {
        Err(WarpError::NumericalDomain(what.to_string()))
    }
}

pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Coord(usize);
    impl ScalarField for Coord {
        fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<S> {
            Ok(x[self.0])
        }
    }

    struct MomentumSquare;
    impl ScalarField for MomentumSquare {
        fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<S> {
            Ok(x[4] * x[4] + x[5] * x[5] + x[6] * x[6] + x[7] * x[7])
        }
    }

    struct Blowup;
    impl ScalarField for Blowup {
        fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<S> {
            Ok(x[0].sqrt())
        }
    }

    #[test]
    fn coordinate_gradient() {
        let g = grad(&Coord(0), &[0.3, 1.0, -2.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        assert_eq!(g, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn quadratic_gradient() {
        let g = grad(&MomentumSquare, &[0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(&g[4..], &[2.0, 4.0, 0.0, 0.0]);
        assert_eq!(&g[..4], &[0.0; 4]);
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let err = grad(&Blowup, &[0.0; 8]).unwrap_err();
        assert!(matches!(err, WarpError::NumericalDomain(_)));
    }

    #[test]
    fn fd_jacobian_identity_and_linear() {
        let x = [0.1, -0.2, 0.3, 0.4, 1.5, -2.5, 0.7, 0.9];
        let id = fd_jacobian(|y| Ok(*y), &x, 1e-5).unwrap();
        assert!((id - Matrix8::identity()).abs().max() < 1e-12);

        let a = Matrix8::from_fn(|i, j| ((i * 8 + j) as f64 * 0.37).sin());
        let lin = fd_jacobian(
            |y| {
                let v = a * Vector8::from_column_slice(y);
                Ok(std::array::from_fn(|i| v[i]))
            },
            &x,
            1e-3,
        )
        .unwrap();
        assert!((lin - a).abs().max() < 1e-10);
    }

    #[test]
    fn fd_jacobian_rejects_bad_step() {
        assert!(fd_jacobian(|y| Ok(*y), &[0.0; 8], 0.0).is_err());
    }

    #[test]
    fn minkowski_inverse_is_itself() {
        let eta = Matrix4::from_diagonal(&nalgebra::Vector4::new(-1.0, 1.0, 1.0, 1.0));
        assert_eq!(mat_inverse(&eta).unwrap(), eta);
        let generic = invert4(&[[-1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(to_matrix4(&generic), eta);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let g = Matrix4::from_fn(|i, _| i as f64);
        assert!(matches!(mat_inverse(&g), Err(WarpError::SingularMetric { .. })));
        let mut arr = [[0.0; 4]; 4];
        arr[0][0] = 1.0;
        assert!(invert4(&arr).is_err());
    }

    #[test]
    fn generic_inverse_differentiates() {
        // d/dt of (A + tB)^{-1} at t=0 is -A^{-1} B A^{-1}
        let a = [[2.0, 0.5, 0.0, 0.0], [0.5, 1.0, 0.0, 0.0], [0.0, 0.0, 3.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        let b = [[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]];
        let lifted: [[Dual<f64>; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| Dual::new(a[i][j], b[i][j])));
        let inv = invert4(&lifted).unwrap();
        let ai = mat_inverse(&to_matrix4(&a)).unwrap();
        let expected = -(ai * to_matrix4(&b) * ai);
        for i in 0..4 {
            for j in 0..4 {
                assert!((inv[i][j].eps - expected[(i, j)]).abs() < 1e-13);
                assert!((inv[i][j].re - ai[(i, j)]).abs() < 1e-13);
            }
        }
    }
}
