//! Sampled space-time fields on `[0, X] x [0, T]`.

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{diff, quad_weights};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub spec: String,
    pub data: String,
}

/// `data[[c, j, i]]` is component `c` at `x_i = i h`, `t_j = j k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2D {
    pub h: f64,
    pub k: f64,
    pub data: Array3<f64>,
    pub meta: FieldMeta,
}

impl Field2D {
    pub fn zeros(q: usize, nx: usize, nt: usize, h: f64, k: f64) -> Self {
        Field2D {
            h,
            k,
            data: Array3::zeros((q, nt + 1, nx + 1)),
            meta: FieldMeta::default(),
        }
    }

    pub fn q(&self) -> usize {
        self.data.shape()[0]
    }

    /// Spatial intervals `N`.
    pub fn nx(&self) -> usize {
        self.data.shape()[2] - 1
    }

    /// Time intervals `M`.
    pub fn nt(&self) -> usize {
        self.data.shape()[1] - 1
    }

    pub fn x_extent(&self) -> f64 {
        self.nx() as f64 * self.h
    }

    pub fn t_extent(&self) -> f64 {
        self.nt() as f64 * self.k
    }

    pub fn get(&self, c: usize, i: usize, j: usize) -> f64 {
        self.data[[c, j, i]]
    }

    /// Component `c` at time index `j`, as a function of `x`.
    pub fn time_slice(&self, c: usize, j: usize) -> Vec<f64> {
        self.data.slice(ndarray::s![c, j, ..]).to_vec()
    }

    /// Component `c` at space index `i`, as a function of `t`.
    pub fn space_slice(&self, c: usize, i: usize) -> Vec<f64> {
        self.data.slice(ndarray::s![c, .., i]).to_vec()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Field2D {
        Field2D {
            data: &self.data * c,
            ..self.clone()
        }
    }

    /// `d/dx` of every component.
    pub fn dx(&self) -> Field2D {
        let mut out = self.clone();
        for c in 0..self.q() {
            for j in 0..=self.nt() {
                let d = diff(&self.time_slice(c, j), self.h);
                out.data.slice_mut(ndarray::s![c, j, ..]).assign(&ndarray::Array1::from(d));
            }
        }
        out
    }

    /// `d/dt` of every component.
    pub fn dt(&self) -> Field2D {
        let mut out = self.clone();
        for c in 0..self.q() {
            for i in 0..=self.nx() {
                let d = diff(&self.space_slice(c, i), self.k);
                out.data.slice_mut(ndarray::s![c, .., i]).assign(&ndarray::Array1::from(d));
            }
        }
        out
    }

    /// `int int w(t) |u|^2 dx dt` summed over components.
    pub fn weighted_l2_sq(&self, w: impl Fn(f64) -> f64) -> f64 {
        let wx = quad_weights(self.nx() + 1, self.h);
        let wt = quad_weights(self.nt() + 1, self.k);
        let mut acc = 0.0;
        for c in 0..self.q() {
            for (j, wtj) in wt.iter().enumerate() {
                let wj = wtj * w(j as f64 * self.k);
                let row: f64 = (0..=self.nx()).map(|i| wx[i] * self.data[[c, j, i]].powi(2)).sum();
                acc += wj * row;
            }
        }
        acc
    }

    pub fn check_same_grid(&self, o: &Field2D) -> Result<()> {
        if self.data.shape() != o.data.shape() {
            return Err(Error::Dimension(format!(
                "{:?} vs {:?}",
                self.data.shape(),
                o.data.shape()
            )));
        }
        Ok(())
    }
}
