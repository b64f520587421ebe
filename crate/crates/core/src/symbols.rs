//! The convolution symbols of the linearized operator.

use num_complex::Complex64;

use crate::error::Result;
use crate::lattice::{conv_power, convolve, SiteIndex, SparseSeries};

/// Row/column component of the doubled operator: `U` rows carry the
/// equation for `u`, `V` rows the equation for `v = conj(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comp {
    U,
    V,
}

/// `(u*v)^{*p}`, `(u*v)^{*(p-1)}*u*u` and `(u*v)^{*(p-1)}*v*v` for a pair `(u, v)`.
#[derive(Debug, Clone)]
pub struct Symbols {
    pub p: u32,
    /// `(u*v)^{*p}`; enters the diagonal blocks with factor `p + 1`.
    pub same: SparseSeries,
    /// `(u*v)^{*(p-1)}*u*u`; the `U`-row / `V`-column block with factor `p`.
    pub uu: SparseSeries,
    /// `(u*v)^{*(p-1)}*v*v`; the `V`-row / `U`-column block with factor `p`.
    pub vv: SparseSeries,
}

impl Symbols {
    pub fn new(u: &SparseSeries, v: &SparseSeries, p: u32) -> Result<Self> {
        let uv = convolve(u, v)?;
        let base = conv_power(&uv, p - 1)?;
        let same = convolve(&base, &uv)?;
        let uu = convolve(&convolve(&base, u)?, u)?;
        let vv = convolve(&convolve(&base, v)?, v)?;
        Ok(Self { p, same, uu, vv })
    }

    /// Symbol series for the `(row, col)` block, without the integer prefactor.
    pub fn series(&self, row: Comp, col: Comp) -> &SparseSeries {
        match (row, col) {
            (Comp::U, Comp::U) | (Comp::V, Comp::V) => &self.same,
            (Comp::U, Comp::V) => &self.uu,
            (Comp::V, Comp::U) => &self.vv,
        }
    }

    pub fn prefactor(&self, row: Comp, col: Comp) -> f64 {
        if row == col {
            (self.p + 1) as f64
        } else {
            self.p as f64
        }
    }

    /// `A((x,row),(y,col))` evaluated at `diff = x - y`.
    pub fn coefficient(&self, row: Comp, col: Comp, diff: &SiteIndex) -> Complex64 {
        self.series(row, col).get(diff) * self.prefactor(row, col)
    }
}
