//! Krylov and direct solvers for the per-step linear systems.

use crate::scalar::Real;

pub trait LinearOperator<T> {
    fn size(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
}

/// `x ↦ shift·x + A x`.
pub struct Shifted<'a, T, A: ?Sized> {
    pub shift: T,
    pub op: &'a A,
}

impl<T: Real, A: LinearOperator<T> + ?Sized> LinearOperator<T> for Shifted<'_, T, A> {
    fn size(&self) -> usize {
        self.op.size()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.op.apply(x, y);
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi += self.shift * xi;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats<T> {
    pub iterations: usize,
    pub relative_residual: T,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Conjugate gradients for symmetric positive definite operators. `x` holds
/// the initial guess on entry. Converged when `‖b − Ax‖ <= tol ‖b‖`.
pub fn conjugate_gradient<T: Real, A: LinearOperator<T> + ?Sized>(
    op: &A,
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<SolveStats<T>, String> {
    let n = op.size();
    let b_norm = norm(b);
    if b_norm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: T::zero(),
        });
    }
    let mut ax = vec![T::zero(); n];
    op.apply(x, &mut ax);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![T::zero(); n];
    for it in 0..=max_iter {
        let rel = rr.sqrt() / b_norm;
        if rel <= tol {
            return Ok(SolveStats {
                iterations: it,
                relative_residual: rel,
            });
        }
        if it == max_iter || !rel.is_finite() {
            break;
        }
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(format!("operator not positive definite (pᵀAp = {pap})"));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(format!(
        "conjugate gradients did not reach {tol} in {max_iter} iterations"
    ))
}

/// BiCGStab for general nonsymmetric operators.
pub fn bicgstab<T: Real, A: LinearOperator<T> + ?Sized>(
    op: &A,
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<SolveStats<T>, String> {
    let n = op.size();
    let b_norm = norm(b);
    if b_norm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: T::zero(),
        });
    }
    let mut tmp = vec![T::zero(); n];
    op.apply(x, &mut tmp);
    let mut r: Vec<T> = b.iter().zip(&tmp).map(|(&bi, &ai)| bi - ai).collect();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (T::one(), T::one(), T::one());
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut s = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    for it in 0..max_iter {
        let rel = norm(&r) / b_norm;
        if rel <= tol {
            return Ok(SolveStats {
                iterations: it,
                relative_residual: rel,
            });
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new == T::zero() || omega == T::zero() {
            return Err("BiCGStab breakdown".into());
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        op.apply(&p, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / b_norm <= tol {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            return Ok(SolveStats {
                iterations: it + 1,
                relative_residual: norm(&s) / b_norm,
            });
        }
        op.apply(&s, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > T::zero() { dot(&t, &s) / tt } else { T::zero() };
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        if !omega.is_finite() || !alpha.is_finite() {
            return Err("BiCGStab produced non-finite coefficients".into());
        }
    }
    Err(format!("BiCGStab did not reach {tol} in {max_iter} iterations"))
}

/// Dense LU with partial pivoting. Returns `None` for a numerically singular
/// matrix.
pub fn dense_solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(T::zero(), |m, &x| m.max(x.abs()));
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if !(a[pivot][col].abs() > T::epsilon() * scale) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
            let bc = b[col];
            b[row] -= factor * bc;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let s: T = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Materialises an operator as a dense matrix by applying it to unit vectors.
pub fn to_dense<T: Real, A: LinearOperator<T> + ?Sized>(op: &A) -> Vec<Vec<T>> {
    let n = op.size();
    let mut a = vec![vec![T::zero(); n]; n];
    let mut e = vec![T::zero(); n];
    let mut y = vec![T::zero(); n];
    for j in 0..n {
        e[j] = T::one();
        op.apply(&e, &mut y);
        for i in 0..n {
            a[i][j] = y[i];
        }
        e[j] = T::zero();
    }
    a
}
