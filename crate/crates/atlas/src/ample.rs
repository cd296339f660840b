//! Ample-class search: construct a positive-square class orthogonal to no
//! root, certifying a chamber interior point of the positive cone.

use crate::lattice::{
    add_vec, dot, neg_vec, scale_vec, GramLattice, Int, LatticeError, Result, Vector,
};
use crate::linalg::rat;
use crate::shortvec::vectors_with_degree;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Certificate that a class is in the interior of a Weyl chamber: positive
/// square and no orthogonal roots. By transitivity of the Weyl-group action
/// on chambers this is an ample class for the family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmpleCertificate {
    pub divisor: Vector,
    pub square: Int,
    pub checked_no_orthogonal_roots: bool,
}

/// Cap on the `a` multiplier in the `a*u + D'` search.
const MULTIPLIER_CAP: Int = 1_000_000;

/// True iff `D^2 > 0` and no root is orthogonal to `D`.
pub fn is_ample_candidate(lattice: &GramLattice, d: &[Int]) -> Result<bool> {
    if !lattice.is_hyperbolic() {
        return Err(LatticeError::Invalid(
            "ample test requires signature (1, n-1)".into(),
        ));
    }
    if lattice.norm(d)? <= 0 {
        return Ok(false);
    }
    Ok(vectors_with_degree(lattice, d, -2, 0)?.is_empty())
}

/// Of `v` and `-v` (a root not orthogonal to the ample class), the effective
/// one: positive degree against `D`.
pub fn effective_sign(lattice: &GramLattice, d: &[Int], v: &[Int]) -> Result<Vector> {
    if lattice.norm(v)? != -2 {
        return Err(LatticeError::Invalid("not a root".into()));
    }
    let deg = lattice.inner(v, d)?;
    if deg == 0 {
        return Err(LatticeError::Invalid(
            "root orthogonal to the polarization has no effective sign".into(),
        ));
    }
    Ok(if deg > 0 { v.to_vec() } else { neg_vec(v) })
}

/// Finds an ample certificate. Starts from a class pairing positively with a
/// root basis of the definite part plus a multiple of a positive-square
/// class, then walks off any remaining root hyperplane by tilting with a
/// small vector that pairs nonzero against every offending root.
/// Deterministic for a fixed lattice; the result is oriented into the
/// positive-cone component of the seed vector.
pub fn find_ample(lattice: &GramLattice) -> Result<AmpleCertificate> {
    if !lattice.is_hyperbolic() {
        return Err(LatticeError::Invalid(
            "ample search requires signature (1, n-1)".into(),
        ));
    }
    let u = positive_square_vector(lattice)?;
    let dprime = definite_part_weight(lattice)?;
    // smallest multiplier giving positive square
    let mut cand = dprime.clone();
    let mut a: Int = 1;
    loop {
        cand = add_vec(&scale_vec(&u, a)?, &dprime)?;
        if lattice.norm(&cand)? > 0 {
            break;
        }
        a = if a < 16 { a + 1 } else { a * 2 };
        if a > MULTIPLIER_CAP {
            return Err(LatticeError::Invalid(format!(
                "no positive-square seed for {} within the multiplier cap",
                lattice.name
            )));
        }
    }
    for _attempt in 0..64 {
        let orthogonal = vectors_with_degree(lattice, &cand, -2, 0)?;
        if orthogonal.is_empty() {
            // orient into the component of u
            let oriented = if lattice.inner(&cand, &u)? < 0 {
                neg_vec(&cand)
            } else {
                cand
            };
            return Ok(AmpleCertificate {
                square: lattice.norm(&oriented)?,
                divisor: oriented,
                checked_no_orthogonal_roots: true,
            });
        }
        let w = tilt_vector(lattice, &orthogonal)?;
        // M c + w leaves every wall of `orthogonal`; retry growing M until
        // no previously seen wall reappears and the square stays positive
        let mut m: Int = 2;
        loop {
            let next = add_vec(&scale_vec(&cand, m)?, &w)?;
            if lattice.norm(&next)? > 0 {
                cand = next;
                break;
            }
            m *= 2;
            if m > MULTIPLIER_CAP {
                return Err(LatticeError::Invalid(
                    "wall-escape multiplier cap exceeded".into(),
                ));
            }
        }
    }
    Err(LatticeError::Invalid(format!(
        "no ample class found for {} within the search cap",
        lattice.name
    )))
}

/// A small vector pairing nonzero with every given root, found by a
/// height-ordered scan over sums of basis vectors.
fn tilt_vector(lattice: &GramLattice, roots: &[Vector]) -> Result<Vector> {
    let n = lattice.rank();
    // single basis vectors, then signed pairs, then signed triples
    let mut candidates: Vec<Vector> = Vec::new();
    for i in 0..n {
        let mut v = vec![0; n];
        v[i] = 1;
        candidates.push(v);
    }
    for i in 0..n {
        for j in i + 1..n {
            for (a, b) in [(1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2)] {
                let mut v = vec![0; n];
                v[i] = a;
                v[j] = b;
                candidates.push(v);
            }
        }
    }
    for w in &candidates {
        let mut ok = true;
        for r in roots {
            if lattice.inner(w, r)? == 0 {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(w.clone());
        }
    }
    // last resort: sum of a basis vector with the first root
    add_vec(&candidates[0], &roots[0])
}

/// A deterministic positive-square vector: tries basis vectors, then sums of
/// two basis vectors, then a rational-eigenvector-free sweep.
fn positive_square_vector(lattice: &GramLattice) -> Result<Vector> {
    let n = lattice.rank();
    for i in 0..n {
        let mut v = vec![0; n];
        v[i] = 1;
        if lattice.norm(&v)? > 0 {
            return Ok(v);
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for (ci, cj) in [(1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2)] {
                let mut v = vec![0; n];
                v[i] = ci;
                v[j] = cj;
                if lattice.norm(&v)? > 0 {
                    return Ok(v);
                }
            }
        }
    }
    // scan small boxes; signature (1, n-1) guarantees a positive vector exists
    for bound in [2 as Int, 3, 4, 6, 8, 12] {
        let mut v = vec![-bound; n];
        'scan: loop {
            if lattice.norm(&v)? > 0 {
                return Ok(v);
            }
            let mut i = 0;
            loop {
                if i == n {
                    break 'scan;
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
    Err(LatticeError::Invalid(
        "no positive-square vector found".into(),
    ))
}

/// An integer vector pairing positively with every basis vector of negative
/// square (the root-basis tie-break: all degrees equal). Solves
/// `inner(x, b_i) = t` rationally and clears denominators; zero if the
/// system is unsolvable.
fn definite_part_weight(lattice: &GramLattice) -> Result<Vector> {
    let n = lattice.rank();
    let idx: Vec<usize> = (0..n).filter(|&i| lattice.gram[i][i] < 0).collect();
    if idx.is_empty() {
        return Ok(vec![0; n]);
    }
    // least-squares-free: solve sum_j x_j gram[b][j] = 1 for b in idx, using
    // only the coordinates in idx (block-diagonal case); fall back to zero.
    let k = idx.len();
    let mut m: Vec<Vec<BigRational>> = (0..k)
        .map(|r| (0..k).map(|c| rat(lattice.gram[idx[r]][idx[c]])).collect())
        .collect();
    let mut b: Vec<BigRational> = vec![rat(1); k];
    // gaussian elimination
    for col in 0..k {
        let Some(p) = (col..k).find(|&r| !m[r][col].is_zero()) else {
            return Ok(vec![0; n]);
        };
        m.swap(col, p);
        b.swap(col, p);
        let piv = m[col][col].clone();
        for j in 0..k {
            m[col][j] = m[col][j].clone() / piv.clone();
        }
        b[col] = b[col].clone() / piv;
        for r in 0..k {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in 0..k {
                    let v = m[r][j].clone() - f.clone() * m[col][j].clone();
                    m[r][j] = v;
                }
                let w = b[r].clone() - f.clone() * b[col].clone();
                b[r] = w;
            }
        }
    }
    // clear denominators
    let mut denom = num_bigint::BigInt::from(1);
    for x in &b {
        denom = num_integer::lcm(denom.clone(), x.denom().clone());
    }
    let mut out = vec![0 as Int; n];
    for (r, &i) in idx.iter().enumerate() {
        let v = (b[r].clone() * BigRational::from(denom.clone())).to_integer();
        out[i] = v.to_i128().ok_or(LatticeError::Overflow)?;
    }
    Ok(out)
}

/// Ample certificate plus degrees of a set of classes, for reporting.
pub fn degrees(lattice: &GramLattice, d: &[Int], classes: &[Vector]) -> Result<Vec<Int>> {
    classes.iter().map(|c| lattice.inner(c, d)).collect()
}

/// Convenience: the Euclidean height of a vector (for deterministic
/// tie-breaking in scans).
pub fn height(v: &[Int]) -> Int {
    dot(v, v).unwrap_or(Int::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;

    fn lat(s: &str) -> GramLattice {
        GramLattice::from_spec(s, &LatticeSpec::parse(s).unwrap()).unwrap()
    }

    #[test]
    fn paper_divisors_are_ample() {
        // S_{1,1,1} in its curve basis: D22 = 3A1+6A2+7A3
        let s111 = lat("gram [[-2,0,1],[0,-2,2],[1,2,-2]]");
        assert!(is_ample_candidate(&s111, &[3, 6, 7]).unwrap());
        assert_eq!(s111.norm(&[3, 6, 7]).unwrap(), 22);
        assert!(!is_ample_candidate(&s111, &[1, 0, 0]).unwrap()); // square -2
        // U + A1^8: D6 = (7,5,-2,...,-2)
        let l = lat("U+A1^8");
        let d6 = vec![7, 5, -2, -2, -2, -2, -2, -2, -2, -2];
        assert_eq!(l.norm(&d6).unwrap(), 6);
        assert!(is_ample_candidate(&l, &d6).unwrap());
    }

    #[test]
    fn effective_sign_orientation() {
        let s111 = lat("gram [[-2,0,1],[0,-2,2],[1,2,-2]]");
        let d = [3, 6, 7];
        let root = [1, 0, 0];
        assert_eq!(effective_sign(&s111, &d, &root).unwrap(), vec![1, 0, 0]);
        let neg = [-1, 0, 0];
        assert_eq!(effective_sign(&s111, &d, &neg).unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn find_ample_self_check() {
        for spec in [
            "gram [[-2,0,2],[0,-2,2],[2,2,-2]]", // S_{1,1,2}
            "U+A1+A2",
            "U(2)+A1^3",
            "[8]+D4",
        ] {
            let l = lat(spec);
            let cert = find_ample(&l).unwrap();
            assert!(cert.square > 0);
            assert!(is_ample_candidate(&l, &cert.divisor).unwrap(), "{spec}");
        }
    }

    #[test]
    fn find_ample_large_block_lattice() {
        let l = lat("U+E8+E8");
        let cert = find_ample(&l).unwrap();
        assert!(is_ample_candidate(&l, &cert.divisor).unwrap());
    }
}
