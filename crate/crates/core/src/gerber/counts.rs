use std::borrow::Cow;

use ndarray::{Array2, ArrayView2, Axis};
use serde::Serialize;

use crate::error::{GerberError, Result};
use crate::indicators::{IndicatorSet, Provenance, Region};

/// Joint observation of one period for a pair of assets: `+1` when both pierce
/// their thresholds in the same direction, `-1` in opposite directions, `0`
/// when either stays neutral.
pub fn joint_observation(r_i: f64, r_j: f64, h_i: f64, h_j: f64) -> i8 {
    Region::classify(r_i, h_i).sign() * Region::classify(r_j, h_j).sign()
}

/// Occupancy of the nine-region grid for one ordered pair `(i, j)`.
///
/// The first letter of each field is asset `i`'s region, the second asset
/// `j`'s: `n_ud` counts periods with `i` up and `j` down.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PairCounts {
    pub n_uu: u64,
    pub n_un: u64,
    pub n_ud: u64,
    pub n_nu: u64,
    pub n_nn: u64,
    pub n_nd: u64,
    pub n_du: u64,
    pub n_dn: u64,
    pub n_dd: u64,
}

impl PairCounts {
    pub fn record(&mut self, first: Region, second: Region) {
        use Region::*;
        let cell = match (first, second) {
            (Up, Up) => &mut self.n_uu,
            (Up, Neutral) => &mut self.n_un,
            (Up, Down) => &mut self.n_ud,
            (Neutral, Up) => &mut self.n_nu,
            (Neutral, Neutral) => &mut self.n_nn,
            (Neutral, Down) => &mut self.n_nd,
            (Down, Up) => &mut self.n_du,
            (Down, Neutral) => &mut self.n_dn,
            (Down, Down) => &mut self.n_dd,
        };
        *cell += 1;
    }

    pub fn total(&self) -> u64 {
        self.n_uu
            + self.n_un
            + self.n_ud
            + self.n_nu
            + self.n_nn
            + self.n_nd
            + self.n_du
            + self.n_dn
            + self.n_dd
    }

    pub fn concordant(&self) -> u64 {
        self.n_uu + self.n_dd
    }

    pub fn discordant(&self) -> u64 {
        self.n_ud + self.n_du
    }

    /// Periods in which the first asset pierces either threshold.
    pub fn first_piercings(&self) -> u64 {
        self.n_uu + self.n_un + self.n_ud + self.n_du + self.n_dn + self.n_dd
    }

    /// Periods in which the second asset pierces either threshold.
    pub fn second_piercings(&self) -> u64 {
        self.n_uu + self.n_nu + self.n_du + self.n_ud + self.n_nd + self.n_dd
    }

    /// The grid seen from `(j, i)`.
    pub fn transposed(&self) -> Self {
        Self {
            n_uu: self.n_uu,
            n_un: self.n_nu,
            n_ud: self.n_du,
            n_nu: self.n_un,
            n_nn: self.n_nn,
            n_nd: self.n_dn,
            n_du: self.n_ud,
            n_dn: self.n_nd,
            n_dd: self.n_dd,
        }
    }
}

fn region_at(ind: &IndicatorSet, t: usize, k: usize) -> Region {
    match (ind.u[[t, k]], ind.d[[t, k]]) {
        (1, 0) => Region::Up,
        (0, 1) => Region::Down,
        (0, 0) => Region::Neutral,
        (u, d) => panic!("indicator cell ({t}, {k}) is both up ({u}) and down ({d})"),
    }
}

/// Nine-region counts for assets `i` and `j`, by a direct pass over periods.
pub fn pair_counts(ind: &IndicatorSet, i: usize, j: usize) -> Result<PairCounts> {
    let len = ind.assets();
    for index in [i, j] {
        if index >= len {
            return Err(GerberError::IndexOutOfRange { index, len });
        }
    }
    let mut counts = PairCounts::default();
    for t in 0..ind.periods() {
        counts.record(region_at(ind, t, i), region_at(ind, t, j));
    }
    Ok(counts)
}

/// Integer count matrices built from products of the indicator matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CountMatrices {
    /// UᵀU
    pub n_uu: Array2<i64>,
    /// DᵀD
    pub n_dd: Array2<i64>,
    pub n_conc: Array2<i64>,
    /// UᵀD + DᵀU
    pub n_disc: Array2<i64>,
    /// N_conc − N_disc, equal to FᵀF.
    pub h: Array2<i64>,
    pub meta: Provenance,
}

impl CountMatrices {
    pub fn assets(&self) -> usize {
        self.h.nrows()
    }

    pub fn periods(&self) -> usize {
        self.meta.periods
    }
}

pub fn count_matrices(ind: &IndicatorSet) -> CountMatrices {
    let n_uu = gram(ind.u.view());
    let n_dd = gram(ind.d.view());
    let ud = cross(ind.u.view(), ind.d.view());
    let n_disc = &ud + &ud.t();
    let n_conc = &n_uu + &n_dd;
    let h = &n_conc - &n_disc;
    CountMatrices {
        n_uu,
        n_dd,
        n_conc,
        n_disc,
        h,
        meta: ind.meta.clone(),
    }
}

/// PᵀP: for every pair, the number of periods in which both are neutral.
pub fn neutral_counts(ind: &IndicatorSet) -> Array2<i64> {
    gram(ind.p.view())
}

fn columns<'a>(a: ArrayView2<'a, i8>) -> Vec<Cow<'a, [i8]>> {
    (0..a.ncols())
        .map(|j| a.index_axis_move(Axis(1), j))
        .map(|c| match c.to_slice() {
            Some(s) => Cow::Borrowed(s),
            None => Cow::Owned(c.to_vec()),
        })
        .collect()
}

fn dot(x: &[i8], y: &[i8]) -> i64 {
    // i32 accumulation vectorizes well; T would have to exceed 2^31 to overflow
    x.iter()
        .zip(y)
        .map(|(&a, &b)| i32::from(a) * i32::from(b))
        .fold(0i64, |acc, v| acc + i64::from(v))
}

/// AᵀB for two T×K integer matrices.
pub fn cross(a: ArrayView2<'_, i8>, b: ArrayView2<'_, i8>) -> Array2<i64> {
    assert_eq!(a.dim(), b.dim(), "operands must share a shape");
    let ca = columns(a);
    let cb = columns(b);
    Array2::from_shape_fn((ca.len(), cb.len()), |(i, j)| dot(&ca[i], &cb[j]))
}

/// AᵀA, filled from the upper triangle so the result is exactly symmetric.
pub fn gram(a: ArrayView2<'_, i8>) -> Array2<i64> {
    let cols = columns(a);
    let k = cols.len();
    let mut out = Array2::zeros((k, k));
    for i in 0..k {
        for j in i..k {
            let v = dot(&cols[i], &cols[j]);
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gerber::fixtures::four_period;

    #[test]
    fn joint_observation_cases() {
        assert_eq!(joint_observation(1.5, 2.0, 1.0, 1.0), 1);
        assert_eq!(joint_observation(-1.5, -2.0, 1.0, 1.0), 1);
        assert_eq!(joint_observation(1.1, -1.3, 1.0, 1.0), -1);
        assert_eq!(joint_observation(-1.1, 1.3, 1.0, 1.0), -1);
        assert_eq!(joint_observation(0.5, 2.0, 1.0, 1.0), 0);
    }

    #[test]
    fn fixture_pair_counts() {
        let (_, ind) = four_period();
        let pc = pair_counts(&ind, 0, 1).unwrap();
        let expected = PairCounts {
            n_uu: 1,
            n_dd: 1,
            n_ud: 1,
            n_nu: 1,
            ..Default::default()
        };
        assert_eq!(pc, expected);
        assert_eq!(pc.total(), 4);
        assert_eq!(pair_counts(&ind, 1, 0).unwrap(), pc.transposed());
    }

    #[test]
    fn self_pair_has_no_mixed_cells() {
        let (_, ind) = four_period();
        let pc = pair_counts(&ind, 0, 0).unwrap();
        assert_eq!(pc.n_ud + pc.n_du + pc.n_un + pc.n_nu + pc.n_dn + pc.n_nd, 0);
        assert_eq!(pc.n_uu + pc.n_dd + pc.n_nn, 4);
    }

    #[test]
    fn all_neutral_pair() {
        let ind = IndicatorSet::from_signs(&Array2::zeros((5, 2)), 0.5).unwrap();
        let pc = pair_counts(&ind, 0, 1).unwrap();
        assert_eq!(pc.n_nn, 5);
        assert_eq!(pc.total(), 5);
        assert!(matches!(
            pair_counts(&ind, 0, 2),
            Err(GerberError::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn fixture_count_matrices() {
        let (_, ind) = four_period();
        let cm = count_matrices(&ind);
        assert_eq!(cm.n_conc[[0, 1]], 2);
        assert_eq!(cm.n_disc[[0, 1]], 1);
        assert_eq!(cm.h[[0, 1]], 1);
        assert_eq!(cm.h[[0, 0]], 3);
        assert_eq!(cm.h[[1, 1]], 4);
        assert_eq!(cm.n_disc.diag().to_vec(), [0, 0]);
        assert_eq!(neutral_counts(&ind)[[0, 1]], 0);
    }

    #[test]
    fn zero_indicators_give_zero_counts() {
        let ind = IndicatorSet::from_signs(&Array2::zeros((3, 3)), 0.5).unwrap();
        let cm = count_matrices(&ind);
        for m in [&cm.n_uu, &cm.n_dd, &cm.n_conc, &cm.n_disc, &cm.h] {
            assert!(m.iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn single_column_piercing_count() {
        let ind =
            IndicatorSet::from_signs(&ndarray::array![[1], [-1], [0], [-1], [1]], 0.5).unwrap();
        assert_eq!(count_matrices(&ind).h, ndarray::array![[4]]);
    }
}
