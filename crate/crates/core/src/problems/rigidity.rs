//! Dense matrices over a prime field and the `(g, h, c)`-rigidity check:
//! every `k x w` submatrix with `k <= g` and `w >= cols - h` has rank at
//! least `c k`.

use std::io::Read;

use crate::error::invalid;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    modulus: u64,
    data: Vec<u64>,
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % p as u128) as u64;
        }
        b = (b as u128 * b as u128 % p as u128) as u64;
        e >>= 1;
    }
    r
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, modulus: u64, data: Vec<u64>) -> Result<Self> {
        if !is_prime(modulus) {
            return Err(invalid(format!("modulus {modulus} is not prime")));
        }
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{} entries for {rows} x {cols}", data.len())));
        }
        Ok(Matrix { rows, cols, modulus, data: data.into_iter().map(|x| x % modulus).collect() })
    }

    pub fn from_rows(rows: &[Vec<u64>], modulus: u64) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Matrix::new(rows.len(), cols, modulus, rows.concat())
    }

    pub fn identity(n: usize, modulus: u64) -> Result<Self> {
        Matrix::new(n, n, modulus, (0..n * n).map(|i| u64::from(i / n == i % n)).collect())
    }

    /// Headerless CSV, one matrix row per line.
    pub fn read_csv<R: Read>(input: R, modulus: u64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
        let mut rows = Vec::new();
        for rec in rdr.deserialize() {
            let row: Vec<u64> = rec?;
            rows.push(row);
        }
        Matrix::from_rows(&rows, modulus)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let data = rows.iter().flat_map(|&i| cols.iter().map(move |&j| self.get(i, j))).collect();
        Matrix { rows: rows.len(), cols: cols.len(), modulus: self.modulus, data }
    }

    /// Rank by Gaussian elimination over `F_p`.
    pub fn rank(&self) -> usize {
        let p = self.modulus;
        let mut a = self.data.clone();
        let (r, c) = (self.rows, self.cols);
        let mut rank = 0;
        for col in 0..c {
            let Some(pivot) = (rank..r).find(|&i| a[i * c + col] != 0) else { continue };
            for j in 0..c {
                a.swap(rank * c + j, pivot * c + j);
            }
            let inv = pow_mod(a[rank * c + col], p - 2, p);
            for i in 0..r {
                if i != rank && a[i * c + col] != 0 {
                    let factor = (a[i * c + col] as u128 * inv as u128 % p as u128) as u64;
                    for j in 0..c {
                        let sub = (factor as u128 * a[rank * c + j] as u128 % p as u128) as u64;
                        a[i * c + j] = (a[i * c + j] + p - sub) % p;
                    }
                }
            }
            rank += 1;
            if rank == r {
                break;
            }
        }
        rank
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows || self.modulus != other.modulus {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.modulus as u128;
        let mut data = vec![0u64; self.rows * other.cols];
        for i in 0..self.rows {
            for j in 0..other.cols {
                let s: u128 = (0..self.cols)
                    .map(|k| self.get(i, k) as u128 * other.get(k, j) as u128 % p)
                    .sum();
                data[i * other.cols + j] = (s % p) as u64;
            }
        }
        Ok(Matrix { rows: self.rows, cols: other.cols, modulus: self.modulus, data })
    }

    pub fn mul_vec(&self, x: &[u64]) -> Result<Vec<u64>> {
        if x.len() != self.cols {
            return Err(Error::ShapeMismatch(format!("vector of {} for {} columns", x.len(), self.cols)));
        }
        let p = self.modulus as u128;
        Ok((0..self.rows)
            .map(|i| ((0..self.cols).map(|k| self.get(i, k) as u128 * (x[k] as u128 % p) % p).sum::<u128>() % p) as u64)
            .collect())
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..=n - (k - cur.len()) {
            cur.push(i);
            let keep = go(i + 1, n, k, cur, f);
            cur.pop();
            if !keep {
                return false;
            }
        }
        true
    }
    go(0, n, k, &mut Vec::with_capacity(k), f)
}

pub const DEFAULT_RIGIDITY_GUARD: u128 = 2_000_000;

pub fn is_rigid(m: &Matrix, g: usize, h: usize, c: f64) -> Result<bool> {
    is_rigid_guarded(m, g, h, c, DEFAULT_RIGIDITY_GUARD)
}

/// Exhaustive rigidity check. Removing columns never raises rank, so only
/// column subsets of size exactly `max(cols - h, 0)` are tried; every row
/// subset of size `1..=min(g, rows)` is tried.
pub fn is_rigid_guarded(m: &Matrix, g: usize, h: usize, c: f64, guard: u128) -> Result<bool> {
    let w = m.cols.saturating_sub(h);
    let kmax = g.min(m.rows);
    let col_sets = binomial(m.cols, w);
    let row_sets: u128 = (1..=kmax).map(|k| binomial(m.rows, k)).sum();
    if row_sets.saturating_mul(col_sets) > guard {
        return Err(Error::GuardExceeded(format!(
            "{} submatrices exceed guard {guard}",
            row_sets.saturating_mul(col_sets)
        )));
    }
    let mut col_subsets = Vec::new();
    for_each_subset(m.cols, w, &mut |s| {
        col_subsets.push(s.to_vec());
        true
    });
    for k in 1..=kmax {
        let need = c * k as f64;
        let ok = for_each_subset(m.rows, k, &mut |rows| {
            col_subsets.iter().all(|cols| m.submatrix(rows, cols).rank() as f64 >= need)
        });
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_over_prime_field() {
        assert_eq!(Matrix::identity(3, 7).unwrap().rank(), 3);
        let m = Matrix::from_rows(&[vec![1, 2], vec![2, 4]], 7).unwrap();
        assert_eq!(m.rank(), 1);
        let m = Matrix::from_rows(&[vec![1, 1], vec![1, 3]], 2).unwrap();
        assert_eq!(m.rank(), 1);
        assert!(Matrix::new(1, 1, 4, vec![1]).is_err());
    }

    #[test]
    fn rigidity_examples() {
        assert!(is_rigid(&Matrix::identity(3, 3).unwrap(), 1, 0, 1.0).unwrap());
        let zero = Matrix::new(3, 3, 3, vec![0; 9]).unwrap();
        assert!(!is_rigid(&zero, 1, 0, 1.0).unwrap());
        let m = Matrix::from_rows(&[vec![1, 1], vec![1, 0]], 3).unwrap();
        assert!(!is_rigid(&m, 2, 1, 0.5).unwrap());
        assert!(is_rigid(&m, 2, 0, 1.0).unwrap());
    }

    #[test]
    fn products() {
        let a = Matrix::from_rows(&[vec![1, 2], vec![3, 4]], 5).unwrap();
        let id = Matrix::identity(2, 5).unwrap();
        assert_eq!(id.mul(&a).unwrap(), a);
        assert_eq!(a.mul_vec(&[1, 1]).unwrap(), vec![3, 2]);
        assert!(a.mul_vec(&[1]).is_err());
    }

    #[test]
    fn csv_matrix() {
        let m = Matrix::read_csv("1,0\n0,1\n".as_bytes(), 3).unwrap();
        assert_eq!(m, Matrix::identity(2, 3).unwrap());
    }
}
