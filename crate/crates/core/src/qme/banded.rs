//! Banded LU factorization with partial pivoting for complex systems.
//!
//! Row `i` keeps the column window `[i − kl, i + kl + ku]`; the extra `kl`
//! columns on the right absorb the fill produced by row interchanges.

use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandedMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![ZERO; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    /// Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside band");
        let o = self.offset(i, j);
        self.data[o] = v;
    }

    pub fn clear_row(&mut self, i: usize) {
        let s = i * self.width;
        self.data[s..s + self.width].fill(ZERO);
    }

    /// Factorizes in place. Never fails; exact zero pivots are recorded and
    /// reported by [`BandedLu::min_pivot_ratio`].
    pub fn factorize(mut self) -> BandedLu {
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.width);
        let mut pivots = vec![0usize; n];
        let mut mults = vec![ZERO; n * kl.max(1)];
        let mut pivot_abs = vec![0.0f64; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.offset(k, k)].norm();
            for r in k + 1..=last_row {
                let v = self.data[self.offset(r, k)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            pivots[k] = p;
            pivot_abs[k] = best;
            if p != k {
                let (ok, op) = (self.offset(k, k), self.offset(p, k));
                let len = last_col - k + 1;
                for t in 0..len {
                    self.data.swap(ok + t, op + t);
                }
            }
            if best == 0.0 {
                continue;
            }
            let okk = self.offset(k, k);
            let inv = 1.0 / self.data[okk];
            let len = last_col - k;
            for r in k + 1..=last_row {
                let ork = self.offset(r, k);
                let l = self.data[ork] * inv;
                mults[k * kl + (r - k - 1)] = l;
                self.data[ork] = ZERO;
                if l == ZERO {
                    continue;
                }
                // row r and row k share columns k+1..=last_col
                let (head, tail) = self.data.split_at_mut(ork + 1);
                let src = &head[okk + 1..okk + 1 + len];
                let dst = &mut tail[..len];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= l * s;
                }
            }
        }
        debug_assert_eq!(w, 2 * kl + ku + 1);
        BandedLu {
            u: self,
            pivots,
            mults,
            pivot_abs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    u: BandedMatrix,
    pivots: Vec<usize>,
    mults: Vec<C64>,
    pivot_abs: Vec<f64>,
}

impl BandedLu {
    /// `min |u_kk| / max |u_kk|`; zero for a singular matrix.
    pub fn min_pivot_ratio(&self) -> f64 {
        let max = self.pivot_abs.iter().copied().fold(0.0, f64::max);
        let min = self.pivot_abs.iter().copied().fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }

    /// Solves `A x = b` in place. The result is non-finite if `A` is singular.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let (n, kl, ku) = (self.u.n, self.u.kl, self.u.ku);
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk == ZERO {
                continue;
            }
            for r in k + 1..=(k + kl).min(n - 1) {
                b[r] -= self.mults[k * kl + (r - k - 1)] * bk;
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + kl + ku).min(n - 1);
            let ok = self.u.offset(k, k);
            let row = &self.u.data[ok..ok + (last_col - k) + 1];
            let mut acc = b[k];
            for (t, u) in row.iter().enumerate().skip(1) {
                acc -= u * b[k + t];
            }
            b[k] = acc / row[0];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    /// Deterministic pseudo-random entries.
    fn entry(i: usize, j: usize) -> C64 {
        let s = ((i * 7919 + j * 104_729) % 1000) as f64 / 1000.0;
        let t = ((i * 31 + j * 17 + 5) % 97) as f64 / 97.0;
        C64::new(s - 0.5, t - 0.5)
    }

    fn build(n: usize, kl: usize, ku: usize, diag_scale: f64) -> (BandedMatrix, DMatrix<C64>) {
        let mut b = BandedMatrix::zeros(n, kl, ku);
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                let mut v = entry(i, j);
                if i == j {
                    v *= diag_scale;
                }
                b.set(i, j, v);
                d[(i, j)] = v;
            }
        }
        (b, d)
    }

    #[test]
    fn matches_dense_solve() {
        for &(n, kl, ku, scale) in &[(1, 0, 0, 1.0), (12, 2, 3, 1.0), (40, 5, 1, 0.0), (30, 7, 7, 0.1), (25, 0, 4, 3.0)] {
            let (b, d) = build(n, kl, ku, scale);
            let rhs: Vec<C64> = (0..n).map(|i| C64::new(i as f64 + 1.0, -(i as f64))).collect();
            let expected = d.clone().lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
            let lu = b.factorize();
            assert!(lu.min_pivot_ratio() > 0.0);
            let mut x = rhs.clone();
            lu.solve_in_place(&mut x);
            let residual = &d * DVector::from_vec(x.clone()) - DVector::from_vec(rhs);
            assert!(residual.norm() < 1e-10, "n={n} kl={kl} ku={ku}: {}", residual.norm());
            for (a, e) in x.iter().zip(expected.iter()) {
                assert!((a - e).norm() < 1e-8 * (1.0 + e.norm()));
            }
        }
    }

    #[test]
    fn singular_matrix_has_zero_pivot() {
        let mut b = BandedMatrix::zeros(3, 1, 1);
        b.set(0, 0, C64::new(1.0, 0.0));
        b.set(0, 1, C64::new(2.0, 0.0));
        b.set(1, 0, C64::new(2.0, 0.0));
        b.set(1, 1, C64::new(4.0, 0.0));
        b.set(2, 2, C64::new(1.0, 0.0));
        let lu = b.factorize();
        assert_eq!(lu.min_pivot_ratio(), 0.0);
    }

    #[test]
    #[should_panic]
    fn set_outside_band_panics() {
        BandedMatrix::zeros(5, 1, 1).set(0, 3, C64::new(1.0, 0.0));
    }
}
