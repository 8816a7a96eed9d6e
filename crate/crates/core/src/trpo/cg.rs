//! Conjugate gradient for symmetric positive-definite operators given only
//! as matrix-vector products.

use alloc::vec;
use alloc::vec::Vec;

use crate::nn::linalg::{axpy, dot};

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    /// Norm of the recursively updated residual `b - A x`.
    pub residual_norm: f64,
    pub iterations: usize,
    /// Set when `p^T A p <= 0` was encountered (operator not SPD).
    pub breakdown: bool,
}

/// Solves `A x = b` starting from `x = 0`, stopping after `iters`
/// iterations or once the residual norm drops to `tol`.
pub fn conjugate_gradient<F>(mut op: F, b: &[f64], iters: usize, tol: f64) -> CgOutcome
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut x = vec![0.0; b.len()];
    let mut r = b.to_vec();
    let mut p = b.to_vec();
    let mut rs = dot(&r, &r);
    let mut iterations = 0;
    let mut breakdown = false;
    while iterations < iters && libm::sqrt(rs) > tol {
        let ap = op(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            breakdown = true;
            break;
        }
        let alpha = rs / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rs_new = dot(&r, &r);
        let beta = rs_new / rs;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rs = rs_new;
        iterations += 1;
    }
    CgOutcome { x, residual_norm: libm::sqrt(rs), iterations, breakdown }
}
