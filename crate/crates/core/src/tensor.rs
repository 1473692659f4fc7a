//! Rank-3 tensor with the fixed index order (j, i, k) used for the
//! second-order coordinates y^j_{i,k} and for all Theta^l_{i,k} blocks.

use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Tensor3::zeros(n);
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    t[(j, i, k)] = f(j, i, k);
                }
            }
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Flat position of (j, i, k); lexicographic in that order.
    #[inline]
    pub fn flat(n: usize, j: usize, i: usize, k: usize) -> usize {
        (j * n + i) * n + k
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;
    #[inline]
    fn index(&self, (j, i, k): (usize, usize, usize)) -> &f64 {
        &self.data[Self::flat(self.n, j, i, k)]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    #[inline]
    fn index_mut(&mut self, (j, i, k): (usize, usize, usize)) -> &mut f64 {
        let p = Self::flat(self.n, j, i, k);
        &mut self.data[p]
    }
}
