#![allow(dead_code)]

use batchbandit::environment::InteractionRecord;
use batchbandit::linalg::Vector;

/// Gauss–Jordan inversion with partial pivoting.
pub fn inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col && row[col] != 0.0 {
                let f = row[col];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn record(x: Vec<f64>, action: usize, reward: f64) -> InteractionRecord<f64> {
    InteractionRecord { round: 0, context: Vector::from(x), action, reward, optimal_mean: 0.0, chosen_mean: 0.0 }
}

/// `(B, b)` with `B = I + Σ x xᵀ`, `b = Σ x r` over the arm's records.
pub fn closed_form(records: &[InteractionRecord<f64>], arm: usize, d: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut b = vec![vec![0.0; d]; d];
    for (i, row) in b.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut s = vec![0.0; d];
    for r in records.iter().filter(|r| r.action == arm) {
        for i in 0..d {
            s[i] += r.context[i] * r.reward;
            for j in 0..d {
                b[i][j] += r.context[i] * r.context[j];
            }
        }
    }
    (b, s)
}
