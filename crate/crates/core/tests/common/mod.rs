#![allow(dead_code)]

use coolsim::operator::{Operator, C64};
use ndarray::Array2;
use proptest::prelude::*;

/// Hermitian matrix from `2·d²` reals in `[−1, 1]`.
pub fn hermitian_from(d: usize, xs: &[f64]) -> Operator {
    let mut m = Array2::<C64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            m[[i, j]] = C64::new(xs[2 * (i * d + j)], xs[2 * (i * d + j) + 1]);
        }
    }
    let h = (&m + &m.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
    Operator::from_matrix(h).unwrap()
}

pub fn hermitian(max_dim: usize) -> impl Strategy<Value = Operator> {
    (1..=max_dim).prop_flat_map(|d| {
        proptest::collection::vec(-1.0f64..1.0, 2 * d * d).prop_map(move |xs| hermitian_from(d, &xs))
    })
}

/// Least-squares slope of `y` against `x`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn frobenius(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
