//! Exact enumeration of lattice vectors of prescribed norm.
//!
//! `short_vectors` lists all vectors of a fixed (negative) norm in a negative
//! definite lattice by Fincke-Pohst search over an exact rational Cholesky
//! decomposition. `solve_hyperbolic` solves `v^2 = n, v.D = d` in a
//! hyperbolic lattice by enumerating the projection of the lattice to `D^T`
//! and testing integrality of each lift.

use crate::lattice::{
    add_vec, scale_vec, GramLattice, Int, LatticeError, Result, Vector,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Query for vectors of prescribed norm and (optionally) degree.
#[derive(Debug, Clone)]
pub struct NormDegreeQuery<'a> {
    pub lattice: &'a GramLattice,
    pub norm: Int,
    pub degree_vector: Option<&'a [Int]>,
    pub degree: Option<Int>,
}

fn rat(n: Int) -> BigRational {
    BigRational::from(BigInt::from(n))
}

/// Exact Cholesky data for a positive definite rational Gram matrix `Q`:
/// `Q(x) = sum_i q[i][i] (x_i + sum_{j>i} q[i][j] x_j)^2`.
struct Cholesky {
    q: Vec<Vec<BigRational>>,
}

impl Cholesky {
    /// `gram` must be positive definite (checked by pivot positivity).
    fn new(gram: &[Vec<BigRational>]) -> Result<Self> {
        let n = gram.len();
        let mut q: Vec<Vec<BigRational>> = gram.to_vec();
        for i in 0..n {
            if !q[i][i].is_positive() {
                return Err(LatticeError::Invalid(
                    "form is not positive definite".into(),
                ));
            }
            for j in i + 1..n {
                let qji = q[i][j].clone() / q[i][i].clone();
                for k in j..n {
                    let v = q[j][k].clone() - qji.clone() * q[i][k].clone();
                    q[j][k] = v.clone();
                    q[k][j] = v;
                }
            }
            let qii = q[i][i].clone();
            for j in i + 1..n {
                q[i][j] = q[i][j].clone() / qii.clone();
            }
        }
        Ok(Cholesky { q })
    }
}

/// Exact LLL reduction of a positive definite rational Gram matrix.
/// Returns the unimodular transform `T` (rows = reduced basis in the old
/// coordinates); enumeration runs on `T Q T^t` and maps back. This is an
/// internal conditioning step for the search tree, not a public capability.
fn lll_transform(gram: &[Vec<BigRational>]) -> Result<Vec<Vec<BigInt>>> {
    let n = gram.len();
    let mut t: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BigInt::from(Int::from(i == j)))
                .collect()
        })
        .collect();
    let form = |t: &[Vec<BigInt>], i: usize, j: usize| -> BigRational {
        let mut s = BigRational::zero();
        for (a, row) in gram.iter().enumerate() {
            if t[i][a].is_zero() {
                continue;
            }
            let ta = BigRational::from(t[i][a].clone());
            for (b, g) in row.iter().enumerate() {
                if !t[j][b].is_zero() {
                    s += &ta * g * BigRational::from(t[j][b].clone());
                }
            }
        }
        s
    };
    // full GSO state, recomputed from scratch after each basis update; the
    // ranks here are <= 19 and exactness trumps asymptotics
    let gso = |t: &[Vec<BigInt>]| -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
        let mut mu = vec![vec![BigRational::zero(); n]; n];
        let mut bstar = vec![BigRational::zero(); n];
        for i in 0..n {
            for j in 0..i {
                let mut v = form(t, i, j);
                for l in 0..j {
                    v -= mu[i][l].clone() * mu[j][l].clone() * bstar[l].clone();
                }
                mu[i][j] = v / bstar[j].clone();
            }
            let mut v = form(t, i, i);
            for l in 0..i {
                v -= mu[i][l].clone() * mu[i][l].clone() * bstar[l].clone();
            }
            bstar[i] = v;
        }
        (mu, bstar)
    };
    let round = |x: &BigRational| -> BigInt {
        let num = x.numer() * BigInt::from(2) + x.denom();
        let den = x.denom() * BigInt::from(2);
        num_integer::Integer::div_floor(&num, &den)
    };
    let delta = BigRational::new(BigInt::from(3), BigInt::from(4));
    let (mut mu, mut bstar) = gso(&t);
    let mut k = 1usize;
    let mut steps = 0usize;
    let step_cap = 64 * n * n * n + 4096;
    while k < n {
        steps += 1;
        if steps > step_cap {
            break; // conditioning only; any unimodular T keeps correctness
        }
        // size-reduce b_k against b_{k-1} .. b_0
        let mut changed = false;
        for j in (0..k).rev() {
            let q = round(&mu[k][j]);
            if !q.is_zero() {
                for c in 0..n {
                    let v = &t[k][c] - &q * &t[j][c];
                    t[k][c] = v;
                }
                changed = true;
                // update mu row k exactly
                let qr = BigRational::from(q);
                for l in 0..j {
                    let v = mu[k][l].clone() - qr.clone() * mu[j][l].clone();
                    mu[k][l] = v;
                }
                let v = mu[k][j].clone() - qr;
                mu[k][j] = v;
            }
        }
        let _ = changed;
        // Lovász test
        let lhs = bstar[k].clone();
        let rhs =
            (delta.clone() - mu[k][k - 1].clone() * mu[k][k - 1].clone()) * bstar[k - 1].clone();
        if lhs < rhs {
            t.swap(k, k - 1);
            let fresh = gso(&t);
            mu = fresh.0;
            bstar = fresh.1;
            k = k.max(2) - 1;
        } else {
            k += 1;
        }
    }
    Ok(t)
}

/// All `x` in `Z^n` with `Q(x) = target` for a positive definite rational
/// `Q`, both signs included. Deterministic order is not guaranteed here;
/// callers sort.
fn enumerate_exact(gram: &[Vec<BigRational>], target: &BigRational) -> Result<Vec<Vector>> {
    let n = gram.len();
    if target.is_negative() {
        return Ok(Vec::new());
    }
    if target.is_zero() {
        return Ok(vec![vec![0; n]]);
    }
    // condition the basis first, enumerate in reduced coordinates
    let t = lll_transform(gram)?;
    let mut reduced = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = BigRational::zero();
            for a in 0..n {
                if t[i][a].is_zero() {
                    continue;
                }
                let ta = BigRational::from(t[i][a].clone());
                for b in 0..n {
                    if !t[j][b].is_zero() {
                        s += &ta * &gram[a][b] * BigRational::from(t[j][b].clone());
                    }
                }
            }
            reduced[i][j] = s;
        }
    }
    let raw = enumerate_reduced(&reduced, target)?;
    let mut out = Vec::with_capacity(raw.len());
    for y in raw {
        let x: Vector = (0..n)
            .map(|c| {
                let mut acc = BigInt::zero();
                for (yi, trow) in y.iter().zip(&t) {
                    acc += BigInt::from(*yi) * &trow[c];
                }
                acc.to_i128().ok_or(LatticeError::Overflow)
            })
            .collect::<Result<_>>()?;
        out.push(x);
    }
    Ok(out)
}

fn enumerate_reduced(gram: &[Vec<BigRational>], target: &BigRational) -> Result<Vec<Vector>> {
    let n = gram.len();
    let chol = Cholesky::new(gram)?;
    let mut out = Vec::new();
    // Depth-first over coordinates n-1 .. 0; at level i the remaining budget
    // is `rem[i]` and the inner offset is `off[i] = sum_{j>i} q[i][j] x_j`.
    let mut x = vec![0 as Int; n];
    struct Frame {
        i: usize,
        hi: Int,
        cur: Int,
        rem: BigRational,
        off: BigRational,
    }
    let mut stack: Vec<Frame> = Vec::new();
    let bounds = |i: usize, rem: &BigRational, off: &BigRational| -> Option<(Int, Int)> {
        // q_ii (x_i + off)^2 <= rem  =>  |x_i + off| <= sqrt(rem / q_ii)
        let m = rem / &chol.q[i][i];
        if m.is_negative() {
            return None;
        }
        // isqrt of rational upper bound: floor(sqrt(num/den))
        let bound = rational_sqrt_floor(&m);
        let lo_r = -&bound - off;
        let hi_r = bound - off;
        let lo = lo_r.ceil().to_integer().to_i128()?;
        let hi = hi_r.floor().to_integer().to_i128()?;
        Some((lo, hi))
    };
    let top = n - 1;
    let (lo, hi) = match bounds(top, target, &BigRational::zero()) {
        Some(b) => b,
        None => return Ok(Vec::new()),
    };
    stack.push(Frame {
        i: top,
        hi,
        cur: lo,
        rem: target.clone(),
        off: BigRational::zero(),
    });
    while let Some(f) = stack.last_mut() {
        if f.cur > f.hi {
            stack.pop();
            if let Some(g) = stack.last_mut() {
                g.cur += 1;
            }
            continue;
        }
        let i = f.i;
        let xi = f.cur;
        x[i] = xi;
        let t = rat(xi) + &f.off;
        let used = &chol.q[i][i] * &t * &t;
        let rem_next = &f.rem - used;
        if rem_next.is_negative() {
            f.cur += 1;
            continue;
        }
        if i == 0 {
            if rem_next.is_zero() {
                out.push(x.clone());
            }
            f.cur += 1;
            continue;
        }
        // push child frame for coordinate i-1
        let mut off_next = BigRational::zero();
        for j in i - 1..n {
            if j > i - 1 {
                off_next += &chol.q[i - 1][j] * rat(x[j]);
            }
        }
        let (lo, hi) = match bounds(i - 1, &rem_next, &off_next) {
            Some(b) => b,
            None => {
                f.cur += 1;
                continue;
            }
        };
        if lo > hi {
            f.cur += 1;
            continue;
        }
        stack.push(Frame {
            i: i - 1,
            hi,
            cur: lo,
            rem: rem_next,
            off: off_next,
        });
    }
    Ok(out)
}

/// floor(sqrt(r)) for nonnegative rational r, returned as a rational >= the
/// exact floor but <= sqrt(r); used only to bound integer ranges, so we
/// return a slightly careful rational: p/q with p = isqrt(num*den), q = den.
fn rational_sqrt_floor(r: &BigRational) -> BigRational {
    let num = r.numer();
    let den = r.denom();
    let s = (num * den).sqrt(); // BigInt integer sqrt (floor)
    // s/den <= sqrt(num/den) < (s+1)/den
    BigRational::new(s, den.clone())
}

/// Canonical ordering of output vectors: by degree against an optional
/// reference vector, then lexicographic coordinates.
pub fn sort_canonical(mut vs: Vec<Vector>, degrees: Option<Vec<Int>>) -> Vec<Vector> {
    match degrees {
        Some(d) => {
            let mut paired: Vec<(Int, Vector)> = d.into_iter().zip(vs).collect();
            paired.sort();
            paired.into_iter().map(|(_, v)| v).collect()
        }
        None => {
            vs.sort();
            vs
        }
    }
}

/// All vectors `v` with `v^2 = norm` in a negative definite lattice,
/// both signs included, sorted lexicographically.
pub fn short_vectors(lattice: &GramLattice, norm: Int) -> Result<Vec<Vector>> {
    if norm >= 0 {
        return Err(LatticeError::Invalid(
            "short_vectors expects a negative target norm".into(),
        ));
    }
    if !lattice.is_negative_definite() {
        return Err(LatticeError::Invalid(
            "short_vectors requires a negative definite lattice".into(),
        ));
    }
    let n = lattice.rank();
    let gram_pos: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| rat(-lattice.gram[i][j])).collect())
        .collect();
    let mut vs = enumerate_exact(&gram_pos, &rat(-norm))?;
    vs.sort();
    Ok(vs)
}

/// Extends a primitive vector to a basis of `Z^n`; returns the columns
/// `c_2..c_n` completing `d` (all as coordinate vectors).
fn complete_to_basis(d: &[Int]) -> Result<Vec<Vector>> {
    // Column-style HNF: build unimodular M with first column d.
    let n = d.len();
    let mut cols: Vec<Vector> = Vec::with_capacity(n + 1);
    cols.push(d.to_vec());
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        cols.push(e);
    }
    // Gaussian elimination over Z keeping track of an echelon set of columns
    // spanning Z^n together with d: we transform to find n columns forming a
    // unimodular matrix whose first column is d.
    // Simpler: compute kernel-free approach via HNF of the 1 x n matrix d^T.
    // Use the standard algorithm: unimodular U with U d = (g, 0, .., 0)^T.
    let (u, g) = unimodular_reduce(d)?;
    if g.abs() != 1 {
        return Err(LatticeError::Invalid(
            "vector is not primitive".into(),
        ));
    }
    // U d = +-e1, so d = U^{-1} (+-e1): columns 2..n of U^{-1} complete d.
    let uinv = invert_unimodular(&u)?;
    let mut comp = Vec::with_capacity(n - 1);
    for j in 1..n {
        let col: Vector = (0..n).map(|i| uinv[i][j]).collect();
        comp.push(col);
    }
    let _ = cols;
    Ok(comp)
}

/// Returns (U, g) with U unimodular and U x = (g,0,...,0)^T.
fn unimodular_reduce(x: &[Int]) -> Result<(Vec<Vec<Int>>, Int)> {
    let n = x.len();
    let mut u: Vec<Vec<Int>> = (0..n)
        .map(|i| (0..n).map(|j| Int::from(i == j)).collect())
        .collect();
    let mut v = x.to_vec();
    loop {
        // find pivot = nonzero of least absolute value
        let mut p = None;
        for (i, &a) in v.iter().enumerate() {
            if a != 0 && p.map_or(true, |(_, b): (usize, Int)| a.abs() < b.abs()) {
                p = Some((i, a));
            }
        }
        let Some((pi, pv)) = p else {
            return Err(LatticeError::Invalid("zero vector".into()));
        };
        let mut done = true;
        for i in 0..n {
            if i == pi || v[i] == 0 {
                continue;
            }
            let q = v[i].div_euclid(pv);
            if q != 0 {
                v[i] -= q * pv;
                let row_p = u[pi].clone();
                for (a, b) in u[i].iter_mut().zip(row_p) {
                    *a = a
                        .checked_sub(q.checked_mul(b).ok_or(LatticeError::Overflow)?)
                        .ok_or(LatticeError::Overflow)?;
                }
            }
            if v[i] != 0 {
                done = false;
            }
        }
        if done {
            // move pivot to the front
            v.swap(0, pi);
            u.swap(0, pi);
            if v[0] < 0 {
                v[0] = -v[0];
                for a in u[0].iter_mut() {
                    *a = -*a;
                }
            }
            return Ok((u, v[0]));
        }
    }
}

fn invert_unimodular(u: &[Vec<Int>]) -> Result<Vec<Vec<Int>>> {
    let n = u.len();
    // Gauss-Jordan over rationals, exact; entries stay integral since det=+-1.
    let mut a: Vec<Vec<BigRational>> = u
        .iter()
        .map(|r| r.iter().map(|&x| rat(x)).collect())
        .collect();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { rat(1) } else { BigRational::zero() })
                .collect()
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .find(|&r| !a[r][c].is_zero())
            .ok_or(LatticeError::Degenerate)?;
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c].clone();
        for j in 0..n {
            a[c][j] = a[c][j].clone() / piv.clone();
            inv[c][j] = inv[c][j].clone() / piv.clone();
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..n {
                    let v = a[r][j].clone() - f.clone() * a[c][j].clone();
                    a[r][j] = v;
                    let w = inv[r][j].clone() - f.clone() * inv[c][j].clone();
                    inv[r][j] = w;
                }
            }
        }
    }
    let mut out = vec![vec![0 as Int; n]; n];
    for i in 0..n {
        for j in 0..n {
            if !inv[i][j].is_integer() {
                return Err(LatticeError::Invalid("matrix is not unimodular".into()));
            }
            out[i][j] = inv[i][j]
                .to_integer()
                .to_i128()
                .ok_or(LatticeError::Overflow)?;
        }
    }
    Ok(out)
}

/// All `v` with `v^2 = norm` and `v.D = d` in a lattice of signature
/// `(1, n-1)`, for `D^2 > 0`, `d >= 0`. Output sorted lexicographically.
///
/// The solver projects the lattice along `D`: candidates live in the
/// negative definite quotient `L / Z D0` (`D0` the primitive part of `D`)
/// and each is lifted back when the lift is integral.
pub fn solve_hyperbolic(q: &NormDegreeQuery) -> Result<Vec<Vector>> {
    let lattice = q.lattice;
    let d_vec = q
        .degree_vector
        .ok_or_else(|| LatticeError::Invalid("degree vector required".into()))?;
    let degree = q
        .degree
        .ok_or_else(|| LatticeError::Invalid("degree required".into()))?;
    if degree < 0 {
        return Err(LatticeError::Invalid("degree must be nonnegative".into()));
    }
    let n2 = lattice.norm(d_vec)?;
    if n2 <= 0 {
        return Err(LatticeError::Invalid("degree vector must have positive square".into()));
    }
    if !lattice.is_hyperbolic() {
        return Err(LatticeError::Invalid(
            "solve_hyperbolic requires signature (1, n-1)".into(),
        ));
    }
    // Reduce to a primitive degree vector.
    let d0 = crate::lattice::primitive_part(d_vec, false);
    let m = d_vec
        .iter()
        .zip(&d0)
        .find_map(|(&a, &b)| if b != 0 { Some(a / b) } else { None })
        .unwrap_or(1);
    if degree % m != 0 {
        return Ok(Vec::new());
    }
    let deg0 = degree / m;
    let n0 = lattice.norm(&d0)?;

    let n = lattice.rank();
    let comp = complete_to_basis(&d0)?;
    // Projected Gram of the quotient basis: for images of c_i,
    // Qbar_ij = c_i.c_j - (c_i.D0)(c_j.D0)/D0^2   (negative definite)
    let ci_d: Vec<Int> = comp
        .iter()
        .map(|c| lattice.inner(c, &d0))
        .collect::<Result<_>>()?;
    let mut qbar = vec![vec![BigRational::zero(); n - 1]; n - 1];
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let cij = lattice.inner(&comp[i], &comp[j])?;
            qbar[i][j] = rat(-cij) + rat(ci_d[i]) * rat(ci_d[j]) / rat(n0);
        }
    }
    // target: -(norm - deg0^2/N0)
    let target = rat(-q.norm) + rat(deg0) * rat(deg0) / rat(n0);
    if target.is_negative() {
        return Ok(Vec::new());
    }
    let sols = enumerate_exact(&qbar, &target)?;
    let mut out = Vec::new();
    for s in sols {
        // x = sum s_i c_i ; v = x + k D0 with k = (deg0 - x.D0)/N0
        let mut x = vec![0 as Int; n];
        for (i, &si) in s.iter().enumerate() {
            x = add_vec(&x, &scale_vec(&comp[i], si)?)?;
        }
        let xd = lattice.inner(&x, &d0)?;
        let num = deg0 - xd;
        if num % n0 != 0 {
            continue;
        }
        let k = num / n0;
        let v = add_vec(&x, &scale_vec(&d0, k)?)?;
        debug_assert_eq!(lattice.norm(&v).unwrap(), q.norm);
        debug_assert_eq!(lattice.inner(&v, d_vec).unwrap(), degree);
        out.push(v);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Convenience wrapper for `solve_hyperbolic` with explicit arguments.
pub fn vectors_with_degree(
    lattice: &GramLattice,
    degree_vector: &[Int],
    norm: Int,
    degree: Int,
) -> Result<Vec<Vector>> {
    solve_hyperbolic(&NormDegreeQuery {
        lattice,
        norm,
        degree_vector: Some(degree_vector),
        degree: Some(degree),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;

    fn lat(s: &str) -> GramLattice {
        GramLattice::from_spec(s, &LatticeSpec::parse(s).unwrap()).unwrap()
    }

    /// Brute-force box oracle for short vectors.
    fn brute_force(l: &GramLattice, norm: Int, bound: Int) -> Vec<Vector> {
        let n = l.rank();
        let mut out = Vec::new();
        let mut v = vec![-bound; n];
        loop {
            if l.norm(&v).unwrap() == norm {
                out.push(v.clone());
            }
            let mut i = 0;
            loop {
                if i == n {
                    out.sort();
                    return out;
                }
                v[i] += 1;
                if v[i] <= bound {
                    break;
                }
                v[i] = -bound;
                i += 1;
            }
        }
    }

    #[test]
    fn a1_roots() {
        let l = lat("A1");
        assert_eq!(short_vectors(&l, -2).unwrap(), vec![vec![-1], vec![1]]);
    }

    #[test]
    fn d4_has_24_roots() {
        let l = lat("D4");
        let roots = short_vectors(&l, -2).unwrap();
        assert_eq!(roots.len(), 24);
        assert_eq!(roots, brute_force(&l, -2, 3));
    }

    #[test]
    fn e8_has_240_roots() {
        let l = lat("E8");
        let roots = short_vectors(&l, -2).unwrap();
        assert_eq!(roots.len(), 240);
        for v in &roots {
            assert_eq!(l.norm(v).unwrap(), -2);
        }
        // closed under negation, no duplicates
        for v in &roots {
            let neg: Vector = v.iter().map(|&a| -a).collect();
            assert!(roots.binary_search(&neg).is_ok());
        }
    }

    #[test]
    fn oracle_equivalence_small_ranks() {
        for spec in ["A1", "A2", "A3", "A1^2", "A1+A2", "D4", "A2(2)"] {
            let l = lat(spec);
            for norm in [-2, -4] {
                let got = short_vectors(&l, norm).unwrap();
                let want = brute_force(&l, norm, 4);
                assert_eq!(got, want, "mismatch for {spec} norm {norm}");
            }
        }
    }

    #[test]
    fn hyperbolic_u_basic() {
        let u = lat("U");
        // v^2=-2, v.(e+f)=0 -> {(1,-1),(-1,1)}
        let s = vectors_with_degree(&u, &[1, 1], -2, 0).unwrap();
        assert_eq!(s, vec![vec![-1, 1], vec![1, -1]]);
    }

    #[test]
    fn hyperbolic_s113() {
        // S_{1,1,3} in the curve basis A1,A2,A3 of its 4 curves.
        let l = lat("gram [[-2,3,2],[3,-2,0],[2,0,-2]]");
        let d2 = [1, 1, 0];
        assert_eq!(l.norm(&d2).unwrap(), 2);
        let s = vectors_with_degree(&l, &d2, -2, 1).unwrap();
        // contains the classes of A1 and A2
        assert!(s.contains(&vec![1, 0, 0]));
        assert!(s.contains(&vec![0, 1, 0]));
    }

    #[test]
    fn hyperbolic_rejects_bad_input() {
        let u = lat("U");
        assert!(vectors_with_degree(&u, &[1, -1], -2, 0).is_err()); // D^2<0
        assert!(vectors_with_degree(&u, &[1, 1], -2, -1).is_err()); // d<0
    }

    #[test]
    fn nonprimitive_degree_vector() {
        let u = lat("U");
        // D = 2e+2f, D^2=8; v.D = 2 means v.(e+f)=1: v=(a,b), 2ab=-2, a+b=1
        let s = vectors_with_degree(&u, &[2, 2], -2, 2).unwrap();
        assert!(s.is_empty());
        // v.D = 0 same as primitive case
        let s0 = vectors_with_degree(&u, &[2, 2], -2, 0).unwrap();
        assert_eq!(s0.len(), 2);
    }
}
