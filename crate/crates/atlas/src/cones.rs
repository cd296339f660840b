//! Exact rational polyhedral cones: extremal rays by incremental double
//! description, facet detection, and Hilbert bases of pointed cones.
//!
//! Cones are given by inequality normals under the Euclidean pairing. When a
//! cone lives inside a lattice, admissibility is `inner(x, c) >= 0`, so the
//! caller passes `gram * c` as the Euclidean normal (see
//! [`ConeDescription::from_lattice_walls`]).

use crate::lattice::{GramLattice, Int, LatticeError, Result, Vector};
use crate::linalg::{big, big_dot, primitive_big, rank_of, to_int_vec};
use crate::snf::smith_normal_form;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Inequality description of a polyhedral cone `{x : n.x >= 0}`.
#[derive(Debug, Clone)]
pub struct ConeDescription {
    pub ambient_rank: usize,
    /// Euclidean inequality normals.
    pub normals: Vec<Vector>,
}

impl ConeDescription {
    pub fn new(ambient_rank: usize, normals: Vec<Vector>) -> Self {
        ConeDescription {
            ambient_rank,
            normals,
        }
    }

    /// Nef-style cone in a lattice: `x` admissible iff `inner(x, w) >= 0`
    /// for every wall `w`.
    pub fn from_lattice_walls(lattice: &GramLattice, walls: &[Vector]) -> Result<Self> {
        let normals = walls
            .iter()
            .map(|w| lattice.functional(w))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConeDescription {
            ambient_rank: lattice.rank(),
            normals,
        })
    }

    pub fn contains(&self, x: &[Int]) -> bool {
        self.normals
            .iter()
            .all(|n| big_dot(&big(n), &big(x)) >= BigInt::zero())
    }
}

#[derive(Debug, Clone)]
struct Ray {
    coords: Vec<BigInt>,
    /// Bitset of inequality indices tight at this ray.
    tight: Vec<u64>,
}

fn bit_set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn bit_and_subset(a: &[u64], b: &[u64], c: &[u64]) -> bool {
    a.iter()
        .zip(b)
        .zip(c)
        .all(|((x, y), z)| (x & y) & !z == 0)
}

/// V-representation: `cone = span(lineality) + cone(rays)`.
#[derive(Debug, Clone)]
pub struct VRepresentation {
    pub rays: Vec<Vector>,
    pub lineality: Vec<Vector>,
}

/// Incremental double description with exact arithmetic.
pub fn v_representation(cone: &ConeDescription) -> Result<VRepresentation> {
    let n = cone.ambient_rank;
    let m = cone.normals.len();
    let words = m.div_ceil(64).max(1);
    let mut lineality: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from(Int::from(i == j))).collect())
        .collect();
    let mut rays: Vec<Ray> = Vec::new();
    for (k, normal) in cone.normals.iter().enumerate() {
        let a = big(normal);
        // 1. reduce the lineality space against the new hyperplane
        let pivot = lineality.iter().position(|l| !big_dot(&a, l).is_zero());
        if let Some(p) = pivot {
            let l0 = lineality.remove(p);
            let al0 = big_dot(&a, &l0);
            let sign = if al0.is_negative() {
                BigInt::from(-1)
            } else {
                BigInt::from(1)
            };
            for l in lineality.iter_mut() {
                let al = big_dot(&a, l);
                if !al.is_zero() {
                    let new: Vec<BigInt> = l
                        .iter()
                        .zip(&l0)
                        .map(|(x, y)| &al0 * x - &al * y)
                        .collect();
                    *l = primitive_big(&new);
                }
            }
            for r in rays.iter_mut() {
                let ar = big_dot(&a, &r.coords);
                if !ar.is_zero() {
                    // project into a^perp, staying on the positive side of
                    // hyperplanes already processed (l0 was lineality there)
                    let new: Vec<BigInt> = r
                        .coords
                        .iter()
                        .zip(&l0)
                        .map(|(x, y)| (&al0 * x - &ar * y) * &sign)
                        .collect();
                    r.coords = primitive_big(&new);
                }
            }
            // the removed generator survives as the ray on the positive side
            let r0: Vec<BigInt> = if al0.is_positive() {
                l0
            } else {
                l0.iter().map(|x| -x).collect()
            };
            let mut tight = vec![0u64; words];
            for kk in 0..k {
                bit_set(&mut tight, kk); // previous normals vanished on the lineality
            }
            rays.push(Ray {
                coords: primitive_big(&r0),
                tight,
            });
        }
        // 2. split rays by sign against the new inequality
        let mut pos: Vec<Ray> = Vec::new();
        let mut zero: Vec<Ray> = Vec::new();
        let mut neg: Vec<Ray> = Vec::new();
        for mut r in rays.drain(..) {
            let ar = big_dot(&a, &r.coords);
            if ar.is_zero() {
                bit_set(&mut r.tight, k);
                zero.push(r);
            } else if ar.is_positive() {
                pos.push(r);
            } else {
                neg.push(r);
            }
        }
        let mut new_rays: Vec<Ray> = Vec::new();
        for (pi, p) in pos.iter().enumerate() {
            for (ni, ne) in neg.iter().enumerate() {
                let adjacent = pos
                    .iter()
                    .enumerate()
                    .filter(|(qi, _)| *qi != pi)
                    .map(|(_, q)| q)
                    .chain(zero.iter())
                    .chain(
                        neg.iter()
                            .enumerate()
                            .filter(|(qi, _)| *qi != ni)
                            .map(|(_, q)| q),
                    )
                    .all(|q| !bit_and_subset(&p.tight, &ne.tight, &q.tight));
                if !adjacent {
                    continue;
                }
                let ap = big_dot(&a, &p.coords);
                let an = big_dot(&a, &ne.coords);
                // positive combination ap * n - an * p lies on the hyperplane
                let coords: Vec<BigInt> = ne
                    .coords
                    .iter()
                    .zip(&p.coords)
                    .map(|(x, y)| &ap * x - &an * y)
                    .collect();
                let coords = primitive_big(&coords);
                let mut tight = vec![0u64; words];
                for w in 0..words {
                    tight[w] = p.tight[w] & ne.tight[w];
                }
                bit_set(&mut tight, k);
                new_rays.push(Ray { coords, tight });
            }
        }
        rays = pos;
        rays.extend(zero);
        rays.extend(new_rays);
    }
    let mut out_rays: Vec<Vector> = rays
        .iter()
        .map(|r| to_int_vec(&r.coords))
        .collect::<Result<_>>()?;
    out_rays.sort();
    out_rays.dedup();
    let out_lin: Vec<Vector> = lineality
        .iter()
        .map(|l| to_int_vec(l))
        .collect::<Result<_>>()?;
    Ok(VRepresentation {
        rays: out_rays,
        lineality: out_lin,
    })
}

/// Minimal generating set of extreme rays of a pointed cone, primitive and
/// canonically sorted. Errors if the cone has a nonzero lineality space.
pub fn extremal_rays(cone: &ConeDescription) -> Result<Vec<Vector>> {
    let v = v_representation(cone)?;
    if !v.lineality.is_empty() {
        return Err(LatticeError::Invalid(
            "cone is not pointed: nonzero lineality space".into(),
        ));
    }
    Ok(v.rays)
}

/// Indices of the input normals that support facets of the cone, given its
/// extremal rays: the tight rays must span a hyperplane of the cone's span.
pub fn facet_normals(cone: &ConeDescription, rays: &[Vector]) -> Vec<usize> {
    let dim = rank_of(rays);
    let mut out = Vec::new();
    for (i, nrm) in cone.normals.iter().enumerate() {
        let nb = big(nrm);
        let tight: Vec<Vector> = rays
            .iter()
            .filter(|r| big_dot(&nb, &big(r)).is_zero())
            .cloned()
            .collect();
        if dim >= 1 && rank_of(&tight) == dim - 1 {
            out.push(i);
        }
    }
    out
}

/// The unique minimal generating set of `cone ∩ Z^n` for a pointed rational
/// cone: extremal rays plus fundamental-parallelepiped points of simplicial
/// ray subsets, globally reduced to irreducibles. Output sorted.
pub fn hilbert_basis(cone: &ConeDescription) -> Result<Vec<Vector>> {
    let rays = extremal_rays(cone)?;
    if rays.is_empty() {
        return Ok(Vec::new());
    }
    let dim = rank_of(&rays);
    let n = cone.ambient_rank;
    let mut candidates: Vec<Vector> = rays.clone();
    let idx: Vec<usize> = (0..rays.len()).collect();
    for subset in combinations(&idx, dim) {
        let sub: Vec<Vector> = subset.iter().map(|&i| rays[i].clone()).collect();
        if rank_of(&sub) != dim {
            continue;
        }
        parallelepiped_points(&sub, n, &mut candidates)?;
    }
    candidates.retain(|x| x.iter().any(|&a| a != 0) && cone.contains(x));
    candidates.sort();
    candidates.dedup();
    // strictly positive functional: the sum of all inequality normals is
    // positive on cone \ {0} for a pointed cone
    let mut w = vec![BigInt::zero(); n];
    for nrm in &cone.normals {
        for (wi, &a) in w.iter_mut().zip(nrm.iter()) {
            *wi += BigInt::from(a);
        }
    }
    let weight = |x: &Vector| -> BigInt { big_dot(&w, &big(x)) };
    let mut order: Vec<(BigInt, Vector)> =
        candidates.into_iter().map(|x| (weight(&x), x)).collect();
    if order.iter().any(|(w, _)| !w.is_positive()) {
        return Err(LatticeError::Invalid(
            "cone is not pointed (non-positive generator weight)".into(),
        ));
    }
    order.sort();
    let mut basis: Vec<Vector> = Vec::new();
    'next: for (wx, x) in &order {
        for (wy, y) in &order {
            if wy >= wx {
                break;
            }
            let diff: Vector = x.iter().zip(y.iter()).map(|(&a, &b)| a - b).collect();
            if cone.contains(&diff) {
                continue 'next; // x = y + (x - y) decomposes in the monoid
            }
        }
        basis.push(x.clone());
    }
    basis.sort();
    Ok(basis)
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(
        items: &[usize],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Integer points of the half-open parallelepiped spanned by independent
/// `rays` (other than 0), appended to `out`. These are coset representatives
/// of `(span ∩ Z^n) / <rays>`, lifted and reduced into the box.
fn parallelepiped_points(rays: &[Vector], n: usize, out: &mut Vec<Vector>) -> Result<()> {
    let d = rays.len();
    let span_basis = crate::linalg::saturate_rows(rays, n)?;
    if span_basis.len() != d {
        return Err(LatticeError::Invalid("rays are not independent".into()));
    }
    let c = crate::linalg::express_in_basis(rays, &span_basis)?;
    // group (Z^d) / (rows of c) via SNF of c^T (column convention)
    let ct: Vec<Vec<Int>> = (0..d).map(|i| (0..d).map(|j| c[j][i]).collect()).collect();
    let snf = smith_normal_form(&ct)?;
    let diag: Vec<Int> = (0..d).map(|i| snf.diag(i)).collect();
    let mut counters = vec![0 as Int; d];
    loop {
        // coset representative z = Uinv * counters
        let z: Vector = (0..d)
            .map(|i| (0..d).map(|j| snf.uinv[i][j] * counters[j]).sum())
            .collect();
        let zred = reduce_mod_rows(&z, &c)?;
        if zred.iter().any(|&a| a != 0) {
            let x: Vector = (0..n)
                .map(|j| (0..d).map(|i| zred[i] * span_basis[i][j]).sum())
                .collect();
            out.push(x);
        }
        let mut i = 0;
        loop {
            if i == d {
                return Ok(());
            }
            counters[i] += 1;
            if counters[i] < diag[i].abs().max(1) {
                break;
            }
            counters[i] = 0;
            i += 1;
        }
    }
}

/// Reduces `z` modulo the row lattice of `c` into `lambda in [0,1)^d`
/// coordinates: returns `z - floor(z c^{-1}) c`.
fn reduce_mod_rows(z: &[Int], c: &[Vec<Int>]) -> Result<Vector> {
    let d = z.len();
    let cinv = crate::linalg::invert_rational(c)?;
    let lambda: Vec<num_rational::BigRational> = (0..d)
        .map(|j| {
            (0..d)
                .map(|i| crate::linalg::rat(z[i]) * &cinv[i][j])
                .sum()
        })
        .collect();
    let floor: Vec<Int> = lambda
        .iter()
        .map(|l| {
            l.floor()
                .to_integer()
                .to_i128()
                .ok_or(LatticeError::Overflow)
        })
        .collect::<Result<_>>()?;
    Ok((0..d)
        .map(|j| z[j] - (0..d).map(|i| floor[i] * c[i][j]).sum::<Int>())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_quadrant() {
        let cone = ConeDescription::new(2, vec![vec![1, 0], vec![0, 1]]);
        let rays = extremal_rays(&cone).unwrap();
        assert_eq!(rays, vec![vec![0, 1], vec![1, 0]]);
        let hb = hilbert_basis(&cone).unwrap();
        assert_eq!(hb, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn non_pointed_is_rejected() {
        let cone = ConeDescription::new(2, vec![vec![1, 0]]);
        assert!(extremal_rays(&cone).is_err());
    }

    #[test]
    fn simplex_cone_rays() {
        let cone = ConeDescription::new(
            3,
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, -1], vec![0, 0, 1]],
        );
        let rays = extremal_rays(&cone).unwrap();
        assert_eq!(rays.len(), 4);
        assert!(rays.contains(&vec![1, 0, 0]));
        assert!(rays.contains(&vec![1, 0, 1]));
        assert!(rays.contains(&vec![0, 1, 1]));
        assert!(rays.contains(&vec![0, 1, 0]));
    }

    #[test]
    fn hilbert_basis_with_interior_generator() {
        // cone generated by (1,0) and (1,2): basis {(1,0),(1,1),(1,2)}
        let cone = ConeDescription::new(2, vec![vec![0, 1], vec![2, -1]]);
        let hb = hilbert_basis(&cone).unwrap();
        assert_eq!(hb, vec![vec![1, 0], vec![1, 1], vec![1, 2]]);
    }

    #[test]
    fn hilbert_basis_elements_are_irreducible() {
        let cone = ConeDescription::new(2, vec![vec![0, 1], vec![3, -1]]);
        let hb = hilbert_basis(&cone).unwrap();
        for x in &hb {
            for y in &hb {
                let diff: Vector = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
                if diff.iter().any(|&a| a != 0) && cone.contains(&diff) && y != x {
                    // x = y + diff would witness reducibility
                    assert!(
                        !hb.contains(&diff) || diff == *x,
                        "{x:?} = {y:?} + {diff:?} is reducible"
                    );
                }
            }
        }
    }

    #[test]
    fn facet_detection() {
        let cone = ConeDescription::new(2, vec![vec![1, 0], vec![0, 1], vec![1, 1]]);
        let rays = extremal_rays(&cone).unwrap();
        let f = facet_normals(&cone, &rays);
        assert_eq!(f, vec![0, 1]);
    }
}
