use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rat::{format_rat, int, parse_rat, round_half_toward_zero, Rat, RatVec};
use crate::error::{Result, WavekitError};

/// Square matrix of exact rationals, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    n: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(n: usize) -> Self {
        RatMatrix {
            n,
            data: vec![Rat::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, &Rat::one())
    }

    pub fn scalar(n: usize, s: &Rat) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = s.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(WavekitError::Dimension(format!(
                "matrix must be square and nonempty, got {} rows",
                n
            )));
        }
        Ok(RatMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    /// Matrix whose j-th column is `cols[j]`.
    pub fn from_columns(cols: &[RatVec]) -> Result<Self> {
        let n = cols.len();
        if n == 0 || cols.iter().any(|c| c.dim() != n) {
            return Err(WavekitError::Dimension("column count must equal column length".into()));
        }
        let mut m = Self::zeros(n);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                m.data[i * n + j] = c[i].clone();
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rat) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> RatVec {
        RatVec(self.data[i * self.n..(i + 1) * self.n].to_vec())
    }

    pub fn col(&self, j: usize) -> RatVec {
        RatVec((0..self.n).map(|i| self.get(i, j).clone()).collect())
    }

    pub fn rows(&self) -> Vec<Vec<Rat>> {
        self.data.chunks(self.n).map(<[Rat]>::to_vec).collect()
    }

    pub fn transpose(&self) -> RatMatrix {
        let n = self.n;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.data[k * n + j];
                    if !b.is_zero() {
                        out.data[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &RatVec) -> RatVec {
        RatVec(
            (0..self.n)
                .map(|i| {
                    (0..self.n).fold(Rat::zero(), |acc, j| {
                        let a = &self.data[i * self.n + j];
                        if a.is_zero() {
                            acc
                        } else {
                            acc + a * &v[j]
                        }
                    })
                })
                .collect(),
        )
    }

    pub fn add(&self, other: &RatMatrix) -> RatMatrix {
        RatMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &RatMatrix) -> RatMatrix {
        RatMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &Rat) -> RatMatrix {
        RatMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn pow(&self, p: u32) -> RatMatrix {
        let mut result = Self::identity(self.n);
        let mut base = self.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        result
    }

    /// Signed integer power; negative exponents go through the inverse.
    pub fn powi(&self, e: i64) -> Result<RatMatrix> {
        if e >= 0 {
            Ok(self.pow(e as u32))
        } else {
            Ok(self.inverse()?.pow((-e) as u32))
        }
    }

    /// `Some(c)` when the matrix equals `c·I`.
    pub fn as_scalar(&self) -> Option<Rat> {
        let c = self.get(0, 0).clone();
        for i in 0..self.n {
            for j in 0..self.n {
                let expected = if i == j { &c } else { &Rat::zero() };
                if self.get(i, j) != expected {
                    return None;
                }
            }
        }
        Some(c)
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|a| a.is_integer())
    }

    /// Exact determinant by Bareiss fraction-free elimination on the
    /// integer matrix obtained by clearing each row's denominators.
    pub fn det(&self) -> Rat {
        let n = self.n;
        let mut scale = BigInt::one();
        let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(n);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let l = row.iter().fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
            scale *= &l;
            m.push(row.iter().map(|a| a.numer() * (&l / a.denom())).collect());
        }
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                    Some(r) => {
                        m.swap(k, r);
                        sign = -sign;
                    }
                    None => return Rat::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                    m[i][j] = v;
                }
                m[i][k] = BigInt::zero();
            }
            prev = m[k][k].clone();
        }
        Rat::new(sign * &m[n - 1][n - 1], scale)
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<RatMatrix> {
        let n = self.n;
        let mut a = self.rows();
        let mut inv = Self::identity(n).rows();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(WavekitError::Singular)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col].clone();
            for j in 0..n {
                a[col][j] = &a[col][j] / &p;
                inv[col][j] = &inv[col][j] / &p;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for j in 0..n {
                    let da = &f * &a[col][j];
                    a[r][j] -= da;
                    let di = &f * &inv[col][j];
                    inv[r][j] -= di;
                }
            }
        }
        RatMatrix::from_rows(inv)
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n)
            .map(|r| r.iter().map(super::rat::to_f64).collect())
            .collect()
    }

    /// Parses the CLI syntax `a,b,c;d,e,f;g,h,i`.
    pub fn parse(s: &str) -> Result<RatMatrix> {
        let rows = s
            .split(';')
            .map(|row| row.split(',').map(parse_rat).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        RatMatrix::from_rows(rows)
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .data
            .chunks(self.n)
            .map(|r| r.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

impl Serialize for RatMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .data
            .chunks(self.n)
            .map(|r| r.iter().map(format_rat).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<Vec<String>>::deserialize(d)?;
        let rows = raw
            .iter()
            .map(|r| r.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        RatMatrix::from_rows(rows).map_err(D::Error::custom)
    }
}

/// The cyclic permutation `C` with `C e_j = e_{j+1}` (indices mod n), so
/// `C v = (v_n, v_1, ..., v_{n-1})`.
pub fn cyclic_matrix(n: usize) -> Result<RatMatrix> {
    if n < 2 {
        return Err(WavekitError::Dimension(format!("cyclic matrix needs n >= 2, got {n}")));
    }
    let mut c = RatMatrix::zeros(n);
    for j in 0..n {
        c.set((j + 1) % n, j, Rat::one());
    }
    Ok(c)
}

/// Applies the cyclic shift without building the matrix.
pub fn cyclic_shift(v: &RatVec) -> RatVec {
    let n = v.dim();
    RatVec((0..n).map(|i| v[(i + n - 1) % n].clone()).collect())
}

pub const DEFAULT_P_MAX: u32 = 12;

/// Smallest `p <= p_max` with `A^p = d·I`, `d > 0`. When some `A^p = -c·I`
/// turns up first, the pair `(2p, c²)` is reported.
pub fn scalar_power_probe(a: &RatMatrix, p_max: u32) -> Option<(u32, Rat)> {
    let mut power = RatMatrix::identity(a.dim());
    for p in 1..=p_max {
        power = power.mul(a);
        if let Some(c) = power.as_scalar() {
            if c.is_positive() {
                return Some((p, c));
            }
            if c.is_negative() {
                return Some((2 * p, &c * &c));
            }
            // A^p = 0: nilpotent, never a positive scalar
            return None;
        }
    }
    None
}

/// Coordinate-wise nearest integer vector; exact halves go toward zero.
pub fn nearest_integer_vector(x: &RatVec) -> RatVec {
    RatVec(
        x.iter()
            .map(|c| Rat::from_integer(round_half_toward_zero(c)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::super::rat::rat;
    use super::*;

    fn mat1_star() -> RatMatrix {
        RatMatrix::from_int_rows(&[&[3, 0, 0], &[0, 3, 0], &[1, 0, -3]]).unwrap()
    }

    fn mat_b_star() -> RatMatrix {
        RatMatrix::from_int_rows(&[&[2, 0, 1], &[0, -2, 0], &[0, 0, -2]]).unwrap()
    }

    /// Cofactor expansion, kept independent of the Bareiss path.
    fn det_cofactor(m: &[Vec<Rat>]) -> Rat {
        let n = m.len();
        if n == 1 {
            return m[0][0].clone();
        }
        let mut total = Rat::zero();
        for j in 0..n {
            let minor: Vec<Vec<Rat>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
                .collect();
            let term = &m[0][j] * det_cofactor(&minor);
            if j % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
        total
    }

    #[test]
    fn cyclic_matrix_shapes() {
        let c2 = cyclic_matrix(2).unwrap();
        assert_eq!(c2, RatMatrix::from_int_rows(&[&[0, 1], &[1, 0]]).unwrap());
        let c3 = cyclic_matrix(3).unwrap();
        assert_eq!(c3.mul_vec(&RatVec::from_ints(&[1, 2, 3])), RatVec::from_ints(&[3, 1, 2]));
        assert_eq!(cyclic_shift(&RatVec::from_ints(&[1, 2, 3])), RatVec::from_ints(&[3, 1, 2]));
        for n in 2..=6 {
            let c = cyclic_matrix(n).unwrap();
            assert_eq!(c.pow(n as u32), RatMatrix::identity(n));
            let sign = if (n - 1) % 2 == 0 { 1 } else { -1 };
            assert_eq!(c.det(), int(sign));
        }
        assert!(matches!(cyclic_matrix(1), Err(WavekitError::Dimension(_))));
    }

    #[test]
    fn stein_basis_inverse_n2() {
        let alpha = rat(1, 2);
        let m = RatMatrix::identity(2).sub(&cyclic_matrix(2).unwrap().scale(&alpha));
        let inv = m.inverse().unwrap();
        let expected = RatMatrix::from_rows(vec![
            vec![rat(4, 3), rat(2, 3)],
            vec![rat(2, 3), rat(4, 3)],
        ])
        .unwrap();
        assert_eq!(inv, expected);
        assert_eq!(m.mul(&inv), RatMatrix::identity(2));
        assert_eq!(m.det(), int(1) - &alpha * &alpha);
        assert_eq!(RatMatrix::identity(4).inverse().unwrap(), RatMatrix::identity(4));
    }

    #[test]
    fn determinants_match_cofactor_oracle() {
        let alpha = rat(1, 3);
        let m = RatMatrix::identity(3).sub(&cyclic_matrix(3).unwrap().scale(&alpha));
        assert_eq!(det_cofactor(&m.rows()), rat(26, 27));
        assert_eq!(m.det(), rat(26, 27));
        assert_eq!(det_cofactor(&mat1_star().rows()), int(-27));
        assert_eq!(mat1_star().det(), int(-27));
        let singular = RatMatrix::from_int_rows(&[&[1, 2], &[2, 4]]).unwrap();
        assert_eq!(singular.det(), Rat::zero());
        assert_eq!(singular.inverse(), Err(WavekitError::Singular));
    }

    #[test]
    fn probe_examples() {
        assert_eq!(scalar_power_probe(&mat1_star(), DEFAULT_P_MAX), Some((2, int(9))));
        assert_eq!(scalar_power_probe(&mat1_star().transpose(), DEFAULT_P_MAX), Some((2, int(9))));
        assert_eq!(scalar_power_probe(&mat_b_star(), DEFAULT_P_MAX), Some((2, int(4))));
        assert_eq!(
            scalar_power_probe(&RatMatrix::scalar(3, &int(2)), DEFAULT_P_MAX),
            Some((1, int(2)))
        );
        assert_eq!(
            scalar_power_probe(&RatMatrix::scalar(2, &int(-2)), DEFAULT_P_MAX),
            Some((2, int(4)))
        );
        let shear = RatMatrix::from_int_rows(&[&[1, 1], &[0, 1]]).unwrap();
        assert_eq!(scalar_power_probe(&shear, DEFAULT_P_MAX), None);
    }

    #[test]
    fn nearest_integer_examples() {
        let a_inv = mat1_star().inverse().unwrap();
        let x = a_inv.mul_vec(&RatVec::filled(3, &rat(9, 2)));
        assert_eq!(x, RatVec(vec![rat(3, 2), rat(3, 2), int(-1)]));
        assert_eq!(nearest_integer_vector(&x), RatVec::from_ints(&[1, 1, -1]));

        let b_inv = mat_b_star().inverse().unwrap();
        let y = b_inv.mul_vec(&RatVec::filled(3, &int(8)));
        assert_eq!(nearest_integer_vector(&y), RatVec::from_ints(&[6, -4, -4]));
        assert_eq!(nearest_integer_vector(&RatVec::zeros(4)), RatVec::zeros(4));
    }

    #[test]
    fn parse_cli_matrix() {
        let m = RatMatrix::parse("3,0,0;0,3,0;1,0,-3").unwrap();
        assert_eq!(m, mat1_star());
        assert_eq!(RatMatrix::parse("3/2,0;0,3/2").unwrap(), RatMatrix::scalar(2, &rat(3, 2)));
        assert!(RatMatrix::parse("1,2;3").is_err());
    }
}
