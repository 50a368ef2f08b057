//! Dense linear algebra over the chain ring `o_L/π^m`.

use crate::field::{OLElement, OLRing};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<OLElement>,
}

impl Matrix {
    pub fn zeros(r: &OLRing, rows: usize, cols: usize, prec: u32) -> Self {
        Matrix { rows, cols, data: vec![r.zero(prec); rows * cols] }
    }

    pub fn identity(r: &OLRing, n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(r, n, n, prec);
        for i in 0..n {
            m.set(i, i, r.one(prec));
        }
        m
    }

    pub fn from_columns(r: &OLRing, rows: usize, cols: &[Vec<OLElement>], prec: u32) -> Self {
        let mut m = Self::zeros(r, rows, cols.len(), prec);
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, *x);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> OLElement {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: OLElement) {
        self.data[i * self.cols + j] = x;
    }

    pub fn column(&self, j: usize) -> Vec<OLElement> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<OLElement>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn mul(&self, r: &OLRing, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let prec = self.data.first().or(o.data.first()).map_or(1, |x| x.prec());
        let mut out = Matrix::zeros(r, self.rows, o.cols, prec);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if r.is_zero(&a) {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !r.is_zero(&b) {
                        let idx = i * out.cols + j;
                        out.data[idx] = r.add(&out.data[idx], &r.mul(&a, &b));
                    }
                }
            }
        }
        out
    }

    /// `[self | o]`.
    pub fn hcat(&self, r: &OLRing, o: &Matrix) -> Matrix {
        assert_eq!(self.rows, o.rows, "row mismatch");
        let prec = self.data.first().or(o.data.first()).map_or(1, |x| x.prec());
        let mut out = Matrix::zeros(r, self.rows, self.cols + o.cols, prec);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
            for j in 0..o.cols {
                out.set(i, self.cols + j, o.get(i, j));
            }
        }
        out
    }

    pub fn is_zero(&self, r: &OLRing) -> bool {
        self.data.iter().all(|x| r.is_zero(x))
    }
}

/// `S·A·T = diag(π^{d_0}, …)`, keeping only `T`.
#[derive(Clone, Debug)]
pub struct Snf {
    /// Valuations of the diagonal; `m` marks a zero pivot.
    pub diag: Vec<u32>,
    pub t: Matrix,
}

fn valuation(r: &OLRing, x: &OLElement, m: u32) -> u32 {
    r.valuation(x).unwrap_or(m)
}

/// Smith form over `o_L/π^m`, pivoting on the least valuation.
pub fn snf(r: &OLRing, a: &Matrix, m: u32) -> Snf {
    let mut a = a.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut t = Matrix::identity(r, cols, m);
    let mut diag = Vec::new();
    for k in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                let v = valuation(r, &a.get(i, j), m);
                if v < m && best.is_none_or(|b| v < b.0) {
                    best = Some((v, i, j));
                    if v == 0 {
                        break;
                    }
                }
            }
            if best.is_some_and(|b| b.0 == 0) {
                break;
            }
        }
        let Some((v, pi, pj)) = best else { break };
        swap_rows(&mut a, k, pi);
        swap_cols(&mut a, k, pj);
        swap_cols(&mut t, k, pj);
        let piv = a.get(k, k);
        // piv = π^v·u
        let u_inv = r.with_prec(&r.inv(&r.with_prec(&r.div_pi_pow(&piv, v).unwrap(), m - v)).unwrap(), m);
        let factor = |x: &OLElement| r.with_prec(&r.mul(&r.with_prec(&r.div_pi_pow(x, v).unwrap(), m), &u_inv), m);
        for i in k + 1..rows {
            let x = a.get(i, k);
            if r.is_zero(&x) {
                continue;
            }
            let c = factor(&x);
            for j in k..cols {
                let y = r.sub(&a.get(i, j), &r.mul(&c, &a.get(k, j)));
                a.set(i, j, y);
            }
        }
        for j in k + 1..cols {
            let x = a.get(k, j);
            if r.is_zero(&x) {
                continue;
            }
            let c = factor(&x);
            for i in 0..rows {
                let y = r.sub(&a.get(i, j), &r.mul(&c, &a.get(i, k)));
                a.set(i, j, y);
            }
            for i in 0..cols {
                let y = r.sub(&t.get(i, j), &r.mul(&c, &t.get(i, k)));
                t.set(i, j, y);
            }
        }
        diag.push(v);
    }
    Snf { diag, t }
}

fn swap_rows(a: &mut Matrix, i: usize, j: usize) {
    if i != j {
        for c in 0..a.cols {
            a.data.swap(i * a.cols + c, j * a.cols + c);
        }
    }
}

fn swap_cols(a: &mut Matrix, i: usize, j: usize) {
    if i != j {
        for row in 0..a.rows {
            a.data.swap(row * a.cols + i, row * a.cols + j);
        }
    }
}

/// Generators of `ker A`.
pub fn kernel(r: &OLRing, a: &Matrix, m: u32) -> Matrix {
    let s = snf(r, a, m);
    let mut gens = Vec::new();
    for j in 0..a.cols {
        let col = s.t.column(j);
        match s.diag.get(j) {
            Some(&v) if v > 0 => gens.push(col.iter().map(|x| r.mul_pi_pow(&r.with_prec(x, v), m - v)).collect()),
            Some(_) => {}
            None => gens.push(col),
        }
    }
    Matrix::from_columns(r, a.cols, &gens, m)
}

/// Invariants of a finite `o_L/π^m`-module `⊕ o_L/π^{b_i}`, each `b_i ≥ 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModuleType(pub Vec<u32>);

impl ModuleType {
    /// Length, i.e. `log_q` of the order.
    pub fn length(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Number of cyclic summands, i.e. the dimension of the `π`-torsion.
    pub fn rank(&self) -> usize {
        self.0.len()
    }
}

/// The type of `(V + U)/U` with `V`, `U` the column spans of `gv`, `gu`.
pub fn subquotient(r: &OLRing, gv: &Matrix, gu: &Matrix, m: u32) -> ModuleType {
    let k = gv.cols;
    if k == 0 {
        return ModuleType::default();
    }
    // relations c with gv·c ∈ span(gu)
    let rel_full = kernel(r, &gv.hcat(r, gu), m);
    let mut rel = Matrix::zeros(r, k, rel_full.cols, m);
    for j in 0..rel_full.cols {
        for i in 0..k {
            rel.set(i, j, rel_full.get(i, j));
        }
    }
    let s = snf(r, &rel, m);
    let mut out: Vec<u32> = s.diag.iter().copied().filter(|&v| v > 0).collect();
    out.extend(std::iter::repeat_n(m, k - s.diag.len()));
    out.sort_unstable_by(|a, b| b.cmp(a));
    ModuleType(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;
    use std::sync::Arc;

    fn ring() -> Arc<OLRing> {
        OLRing::new(FieldParams::unramified(3, 1)).unwrap()
    }

    fn mat(r: &OLRing, rows: &[&[i64]], m: u32) -> Matrix {
        let mut a = Matrix::zeros(r, rows.len(), rows[0].len(), m);
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                a.set(i, j, r.from_int(x, m));
            }
        }
        a
    }

    #[test]
    fn snf_over_z_mod_27() {
        let r = ring();
        let a = mat(&r, &[&[3, 6], &[9, 0]], 3);
        let s = snf(&r, &a, 3);
        let mut d = s.diag.clone();
        d.sort();
        // det = -54 = -2·27, so the divisors are 3 and 9
        assert_eq!(d, vec![1, 2]);
    }

    #[test]
    fn kernel_mod_9() {
        let r = ring();
        let a = mat(&r, &[&[3, 0], &[0, 1]], 2);
        let k = kernel(&r, &a, 2);
        assert!(a.mul(&r, &k).is_zero(&r));
        // ker = 3·Z/9 ⊕ 0, a cyclic module of order 3
        let ty = subquotient(&r, &k, &Matrix::zeros(&r, 2, 0, 2), 2);
        assert_eq!(ty, ModuleType(vec![1]));
    }

    #[test]
    fn subquotient_types() {
        let r = ring();
        let id = Matrix::identity(&r, 2, 2);
        let u = mat(&r, &[&[3], &[0]], 2);
        assert_eq!(subquotient(&r, &id, &u, 2), ModuleType(vec![2, 1]));
        let empty = Matrix::zeros(&r, 2, 0, 2);
        assert_eq!(subquotient(&r, &id, &empty, 2), ModuleType(vec![2, 2]));
        assert_eq!(subquotient(&r, &u, &id, 2), ModuleType(vec![]));
    }
}
