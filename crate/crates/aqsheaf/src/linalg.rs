//! Dense matrices over the chain ring Z/p^e and their Smith normal form.
//!
//! Every ideal of Z/p^e is (p^v), so a pivot of minimal valuation divides
//! every other entry and elimination never needs gcd steps.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<u64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_cols(rows: usize, cols: &[Vec<u64>]) -> Self {
        let mut m = Mat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, &v) in c.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul(&self, other: &Mat, m: u64) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = (out.get(i, j) + a * other.get(k, j)) % m;
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &[u64], m: u64) -> Vec<u64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut s = 0u64;
                for (j, &xj) in x.iter().enumerate() {
                    s = (s + self.get(i, j) * xj) % m;
                }
                s
            })
            .collect()
    }

    /// Horizontal concatenation.
    pub fn hcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        let mut out = Mat::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += c * row[src]
    fn add_row(&mut self, dst: usize, src: usize, c: u64, m: u64) {
        if c == 0 {
            return;
        }
        for j in 0..self.cols {
            let v = (self.get(dst, j) + c * self.get(src, j)) % m;
            self.set(dst, j, v);
        }
    }

    /// col[dst] += c * col[src]
    fn add_col(&mut self, dst: usize, src: usize, c: u64, m: u64) {
        if c == 0 {
            return;
        }
        for i in 0..self.rows {
            let v = (self.get(i, dst) + c * self.get(i, src)) % m;
            self.set(i, dst, v);
        }
    }

    fn scale_row(&mut self, r: usize, c: u64, m: u64) {
        for j in 0..self.cols {
            let v = self.get(r, j) * c % m;
            self.set(r, j, v);
        }
    }

    fn scale_col(&mut self, col: usize, c: u64, m: u64) {
        for i in 0..self.rows {
            let v = self.get(i, col) * c % m;
            self.set(i, col, v);
        }
    }
}

/// The ring Z/p^e.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainRing {
    pub p: u64,
    pub e: u32,
    pub m: u64,
}

impl ChainRing {
    pub fn new(p: u64, e: u32) -> Self {
        assert!(e >= 1 && p >= 2);
        let m = p.checked_pow(e).expect("modulus overflow");
        assert!(m < (1 << 31), "modulus too large");
        ChainRing { p, e, m }
    }

    /// p-adic valuation of a residue; `e` for zero.
    pub fn val(&self, a: u64) -> u32 {
        let mut a = a % self.m;
        if a == 0 {
            return self.e;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    pub fn pow_p(&self, v: u32) -> u64 {
        if v >= self.e {
            0
        } else {
            self.p.pow(v)
        }
    }

    pub fn inv_unit(&self, a: u64) -> u64 {
        let (mut t, mut nt) = (0i128, 1i128);
        let (mut r, mut nr) = (self.m as i128, (a % self.m) as i128);
        while nr != 0 {
            let q = r / nr;
            (t, nt) = (nt, t - q * nt);
            (r, nr) = (nr, r - q * nr);
        }
        assert_eq!(r, 1, "{a} is not a unit mod {}", self.m);
        t.rem_euclid(self.m as i128) as u64
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.m - a % self.m) % self.m
    }
}

/// `u * a * v = diag(p^d_0, p^d_1, ...)` with `d` ascending over the rank.
#[derive(Debug, Clone)]
pub struct Snf {
    pub ring: ChainRing,
    /// Valuations of the nonzero diagonal entries; `len()` is the rank.
    pub d: Vec<u32>,
    pub u: Mat,
    pub u_inv: Mat,
    pub v: Mat,
    pub v_inv: Mat,
}

pub fn snf(a: &Mat, ring: ChainRing) -> Snf {
    let m = ring.m;
    let mut a = a.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut u = Mat::identity(rows);
    let mut u_inv = Mat::identity(rows);
    let mut v = Mat::identity(cols);
    let mut v_inv = Mat::identity(cols);
    let mut d = Vec::new();
    for t in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let x = a.get(i, j);
                if x != 0 {
                    let vv = ring.val(x);
                    if best.is_none_or(|b| vv < b.0) {
                        best = Some((vv, i, j));
                    }
                }
            }
            if best.is_some_and(|b| b.0 == 0) {
                break;
            }
        }
        let Some((pv, pi, pj)) = best else { break };
        a.swap_rows(t, pi);
        u.swap_rows(t, pi);
        u_inv.swap_cols(t, pi);
        a.swap_cols(t, pj);
        v.swap_cols(t, pj);
        v_inv.swap_rows(t, pj);
        let pp = ring.pow_p(pv);
        let unit = a.get(t, t) / pp;
        let ui = ring.inv_unit(unit);
        a.scale_row(t, ui, m);
        u.scale_row(t, ui, m);
        u_inv.scale_col(t, unit % m, m);
        for i in t + 1..rows {
            let x = a.get(i, t);
            if x != 0 {
                let c = ring.neg(x / pp);
                a.add_row(i, t, c, m);
                u.add_row(i, t, c, m);
                u_inv.add_col(t, i, ring.neg(c), m);
            }
        }
        for j in t + 1..cols {
            let x = a.get(t, j);
            if x != 0 {
                let c = ring.neg(x / pp);
                a.add_col(j, t, c, m);
                v.add_col(j, t, c, m);
                v_inv.add_row(t, j, ring.neg(c), m);
            }
        }
        d.push(pv);
    }
    Snf { ring, d, u, u_inv, v, v_inv }
}

impl Snf {
    pub fn rank(&self) -> usize {
        self.d.len()
    }

    /// Generators (as columns) of `{x : a x = 0}`.
    pub fn kernel(&self) -> Mat {
        let ring = self.ring;
        let cols = self.v.rows;
        let mut gens = Vec::new();
        for i in 0..cols {
            let scale = if i < self.d.len() { ring.pow_p(ring.e - self.d[i]) } else { 1 };
            if scale == 0 {
                continue;
            }
            gens.push(self.v.col(i).iter().map(|&x| x * scale % ring.m).collect::<Vec<_>>());
        }
        Mat::from_cols(cols, &gens)
    }

    /// Some `z` with `a z = b`, if one exists.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        let ring = self.ring;
        let ub = self.u.apply(b, ring.m);
        let mut y = vec![0u64; self.v.rows];
        for (i, &x) in ub.iter().enumerate() {
            if i < self.d.len() {
                let pp = ring.pow_p(self.d[i]);
                if ring.val(x) < self.d[i] {
                    return None;
                }
                y[i] = if x == 0 { 0 } else { x / pp };
            } else if x != 0 {
                return None;
            }
        }
        Some(self.v.apply(&y, ring.m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag_check(a: &Mat, s: &Snf) {
        let m = s.ring.m;
        let prod = s.u.mul(a, m).mul(&s.v, m);
        for i in 0..prod.rows {
            for j in 0..prod.cols {
                let want = if i == j && i < s.d.len() { s.ring.pow_p(s.d[i]) } else { 0 };
                assert_eq!(prod.get(i, j), want, "entry ({i},{j})");
            }
        }
        assert_eq!(s.u.mul(&s.u_inv, m), Mat::identity(a.rows));
        assert_eq!(s.v.mul(&s.v_inv, m), Mat::identity(a.cols));
    }

    #[test]
    fn snf_of_small_matrix_over_z8() {
        let ring = ChainRing::new(2, 3);
        let a = Mat::from_cols(2, &[vec![2, 4], vec![6, 0], vec![4, 4]]);
        let s = snf(&a, ring);
        diag_check(&a, &s);
        assert_eq!(s.d, vec![1, 2]);
    }

    #[test]
    fn kernel_and_solve_over_f5() {
        let ring = ChainRing::new(5, 1);
        let a = Mat::from_cols(2, &[vec![1, 2], vec![2, 4], vec![0, 1]]);
        let s = snf(&a, ring);
        let k = s.kernel();
        assert_eq!(k.cols, 1);
        assert!(a.mul(&k, 5).is_zero());
        let z = s.solve(&[3, 1]).unwrap();
        assert_eq!(a.apply(&z, 5), vec![3, 1]);
    }

    proptest! {
        #[test]
        fn snf_reconstructs(rows in 1usize..5, cols in 1usize..5, seed in proptest::collection::vec(0u64..9, 25)) {
            let ring = ChainRing::new(3, 2);
            let mut a = Mat::zeros(rows, cols);
            for i in 0..rows { for j in 0..cols { a.set(i, j, seed[i * 5 + j]); } }
            let s = snf(&a, ring);
            diag_check(&a, &s);
            let k = s.kernel();
            prop_assert!(a.mul(&k, ring.m).is_zero());
            let b = a.apply(&vec![1; cols], ring.m);
            let z = s.solve(&b).unwrap();
            prop_assert_eq!(a.apply(&z, ring.m), b);
        }
    }
}
