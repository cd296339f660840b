//! Shared exact integer/rational linear algebra: ranks, kernels,
//! saturations and basis coordinates.

use crate::lattice::{Int, LatticeError, Result, Vector};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub fn big(v: &[Int]) -> Vec<BigInt> {
    v.iter().map(|&a| BigInt::from(a)).collect()
}

pub fn big_dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn primitive_big(v: &[BigInt]) -> Vec<BigInt> {
    let mut g = BigInt::zero();
    for a in v {
        g = g.gcd(a);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    v.iter().map(|a| a / &g).collect()
}

pub fn to_int_vec(v: &[BigInt]) -> Result<Vector> {
    v.iter()
        .map(|a| a.to_i128().ok_or(LatticeError::Overflow))
        .collect()
}

pub fn rat(n: Int) -> BigRational {
    BigRational::from(BigInt::from(n))
}

/// Rank of an integer matrix (fraction-free elimination).
pub fn rank_of(rows: &[Vector]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<BigInt>> = rows.iter().map(|r| big(r)).collect();
    let ncols = m[0].len();
    let mut rank = 0;
    let mut col = 0;
    while rank < m.len() && col < ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            col += 1;
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            if !m[r][col].is_zero() {
                let (pr, mr) = (m[rank][col].clone(), m[r][col].clone());
                for c in col..ncols {
                    let v = &m[r][c] * &pr - &m[rank][c] * &mr;
                    m[r][c] = v;
                }
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}

/// Saturated basis of `{x in Z^n : row . x = 0 for every row}` via a
/// column-style Hermite reduction with a unimodular column transform.
pub fn integer_kernel(rows: &[Vector], n: usize) -> Result<Vec<Vector>> {
    if rows.is_empty() {
        return Ok((0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                e
            })
            .collect());
    }
    let m = rows.len();
    let mut a: Vec<Vec<BigInt>> = rows.iter().map(|r| big(r)).collect();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from(Int::from(i == j))).collect())
        .collect();
    let mut lead = 0usize;
    for row in 0..m {
        loop {
            let mut nz: Vec<usize> = (lead..n).filter(|&jj| !a[row][jj].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            if nz.len() == 1 {
                let j = nz[0];
                for r in a.iter_mut() {
                    r.swap(lead, j);
                }
                for r in u.iter_mut() {
                    r.swap(lead, j);
                }
                lead += 1;
                break;
            }
            nz.sort_by_key(|&jj| a[row][jj].magnitude().clone());
            let j0 = nz[0];
            let piv = a[row][j0].clone();
            for &j in nz.iter().skip(1) {
                let q = a[row][j].div_floor(&piv);
                if !q.is_zero() {
                    for r in a.iter_mut() {
                        let v = &r[j] - &q * &r[j0];
                        r[j] = v;
                    }
                    for r in u.iter_mut() {
                        let v = &r[j] - &q * &r[j0];
                        r[j] = v;
                    }
                }
            }
        }
    }
    let mut kernel = Vec::new();
    for j in lead..n {
        let col: Vec<BigInt> = (0..n).map(|i| u[i][j].clone()).collect();
        kernel.push(to_int_vec(&primitive_big(&col))?);
    }
    Ok(kernel)
}

/// Basis of the saturation `(Q-span of rows) ∩ Z^n`: the kernel of the
/// Euclidean orthogonal complement (kernels are saturated).
pub fn saturate_rows(rows: &[Vector], n: usize) -> Result<Vec<Vector>> {
    let comp = integer_kernel(rows, n)?;
    integer_kernel(&comp, n)
}

/// Exact inverse of a square integer matrix, as rationals.
pub fn invert_rational(c: &[Vec<Int>]) -> Result<Vec<Vec<BigRational>>> {
    let d = c.len();
    let mut a: Vec<Vec<BigRational>> = c
        .iter()
        .map(|r| r.iter().map(|&x| rat(x)).collect())
        .collect();
    let mut inv: Vec<Vec<BigRational>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    for c0 in 0..d {
        let p = (c0..d)
            .find(|&r| !a[r][c0].is_zero())
            .ok_or(LatticeError::Degenerate)?;
        a.swap(c0, p);
        inv.swap(c0, p);
        let piv = a[c0][c0].clone();
        for j in 0..d {
            a[c0][j] = a[c0][j].clone() / piv.clone();
            inv[c0][j] = inv[c0][j].clone() / piv.clone();
        }
        for r in 0..d {
            if r != c0 && !a[r][c0].is_zero() {
                let f = a[r][c0].clone();
                for j in 0..d {
                    let v = a[r][j].clone() - f.clone() * a[c0][j].clone();
                    a[r][j] = v;
                    let w = inv[r][j].clone() - f.clone() * inv[c0][j].clone();
                    inv[r][j] = w;
                }
            }
        }
    }
    Ok(inv)
}

/// Express each row of `vs` as integer coordinates in `basis` (row vectors).
/// Errors if a vector is not an integer combination.
pub fn express_in_basis(vs: &[Vector], basis: &[Vector]) -> Result<Vec<Vector>> {
    let d = basis.len();
    let n = basis[0].len();
    let mut out = Vec::with_capacity(vs.len());
    for v in vs {
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..d).map(|j| rat(basis[j][i])).collect())
            .collect();
        let mut b: Vec<BigRational> = v.iter().map(|&x| rat(x)).collect();
        let mut row = 0usize;
        let mut sol = vec![BigRational::zero(); d];
        let mut pivcols = Vec::new();
        for col in 0..d {
            let Some(p) = (row..n).find(|&r| !a[r][col].is_zero()) else {
                continue;
            };
            a.swap(row, p);
            b.swap(row, p);
            let piv = a[row][col].clone();
            for j in 0..d {
                a[row][j] = a[row][j].clone() / piv.clone();
            }
            b[row] = b[row].clone() / piv;
            for r in 0..n {
                if r != row && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for j in 0..d {
                        let vv = a[r][j].clone() - f.clone() * a[row][j].clone();
                        a[r][j] = vv;
                    }
                    let w = b[r].clone() - f.clone() * b[row].clone();
                    b[r] = w;
                }
            }
            pivcols.push((row, col));
            row += 1;
        }
        for r in row..n {
            if !b[r].is_zero() {
                return Err(LatticeError::Invalid("vector not in span of basis".into()));
            }
        }
        for &(r, c) in &pivcols {
            sol[c] = b[r].clone();
        }
        let coords: Vector = sol
            .iter()
            .map(|x| {
                if x.is_integer() {
                    x.to_integer().to_i128().ok_or(LatticeError::Overflow)
                } else {
                    Err(LatticeError::Invalid("vector not integral in basis".into()))
                }
            })
            .collect::<Result<_>>()?;
        out.push(coords);
    }
    Ok(out)
}

/// Gram matrix of a set of vectors under a lattice form.
pub fn gram_of(lattice: &crate::lattice::GramLattice, vs: &[Vector]) -> Result<Vec<Vec<Int>>> {
    let mut g = vec![vec![0; vs.len()]; vs.len()];
    for i in 0..vs.len() {
        for j in i..vs.len() {
            let v = lattice.inner(&vs[i], &vs[j])?;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_saturated() {
        let k = integer_kernel(&[vec![2, 4]], 2).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].iter().map(|a| a.abs()).min(), Some(1));
    }

    #[test]
    fn kernel_of_two_rows() {
        let k = integer_kernel(&[vec![1, 1, 1], vec![0, 1, 2]], 3).unwrap();
        assert_eq!(k.len(), 1);
        let v = &k[0];
        assert_eq!(v[0] + v[1] + v[2], 0);
        assert_eq!(v[1] + 2 * v[2], 0);
    }

    #[test]
    fn saturation_divides_content() {
        // span of (2,0) saturates to (1,0)
        let s = saturate_rows(&[vec![2, 0]], 2).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0][0].abs(), 1);
        assert_eq!(s[0][1], 0);
    }

    #[test]
    fn express_coordinates() {
        let basis = vec![vec![1, 1], vec![0, 2]];
        let coords = express_in_basis(&[vec![1, 3], vec![2, 2]], &basis).unwrap();
        assert_eq!(coords, vec![vec![1, 1], vec![2, 0]]);
        assert!(express_in_basis(&[vec![1, 2]], &basis).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_of(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(rank_of(&[vec![1, 0], vec![0, 1]]), 2);
    }
}
