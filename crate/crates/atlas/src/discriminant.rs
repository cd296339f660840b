//! Discriminant groups via Smith normal form, even overlattice enumeration
//! through isotropic glue subgroups, and the embedding / moduli criteria.

use crate::lattice::{GramLattice, Int, LatticeError, Result, Vector};
use crate::linalg::rat;
use crate::snf::smith_normal_form;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// The finite abelian group `L*/L` in invariant-factor form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscriminantGroup {
    /// Elementary divisors > 1, in divisibility order.
    pub elementary_divisors: Vec<Int>,
    /// Group order = |det gram|.
    pub order: Int,
    /// Minimal number of generators.
    pub ell: usize,
}

pub fn discriminant_group(lattice: &GramLattice) -> Result<DiscriminantGroup> {
    let snf = smith_normal_form(&lattice.gram)?;
    if snf.rank != lattice.rank() {
        return Err(LatticeError::Degenerate);
    }
    let divisors: Vec<Int> = snf
        .nontrivial_divisors()
        .iter()
        .map(|d| d.to_i128().ok_or(LatticeError::Overflow))
        .collect::<Result<_>>()?;
    let order = divisors.iter().product::<Int>();
    Ok(DiscriminantGroup {
        ell: divisors.len(),
        elementary_divisors: divisors,
        order,
    })
}

/// Embedding criteria for a hyperbolic lattice `L` of rank `rho`:
/// `ell(L) <= 20 - rho` gives a unique primitive embedding into the K3
/// lattice; `ell(L) <= 18 - rho` embeds into `U^2 + E8^2` leaving a copy of
/// `U` in the complement, so the polarized moduli space is irreducible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub rank: usize,
    pub ell: usize,
    pub unique_primitive_embedding: bool,
    pub moduli_irreducible: bool,
    /// Set when irreducibility holds by a catalogue-specific argument
    /// rather than the numeric criterion.
    pub override_applied: bool,
}

pub fn embedding_report(lattice: &GramLattice, irreducible_override: bool) -> Result<EmbeddingReport> {
    if !lattice.is_hyperbolic() {
        return Err(LatticeError::Invalid(
            "embedding report requires signature (1, n-1)".into(),
        ));
    }
    let rho = lattice.rank();
    let ell = discriminant_group(lattice)?.ell;
    let unique = ell + rho <= 20;
    let numeric = ell + rho <= 18;
    Ok(EmbeddingReport {
        rank: rho,
        ell,
        unique_primitive_embedding: unique || irreducible_override,
        moduli_irreducible: numeric || irreducible_override,
        override_applied: irreducible_override && !numeric,
    })
}

/// Data for computing in `L*/L`: generators of the dual quotient with the
/// discriminant bilinear/quadratic form, exact over rationals.
struct DiscForm {
    /// Dual-basis coordinates (rows) of generators of `L*/L`.
    gens: Vec<Vec<BigRational>>,
    orders: Vec<Int>,
    gram: Vec<Vec<Int>>,
}

fn disc_form(lattice: &GramLattice) -> Result<DiscForm> {
    let n = lattice.rank();
    let snf = smith_normal_form(&lattice.gram)?;
    if snf.rank != n {
        return Err(LatticeError::Degenerate);
    }
    // gram * V has columns with elementary structure: L* = gram^{-1} Z^n;
    // L*/L = Z^n / gram Z^n with x identified via gram^{-1} x. Generators of
    // Z^n/(gram Z^n): columns of Uinv e_i scaled... from U G V = D:
    // Z^n / G Z^n = Z^n / Uinv D Vinv Z^n = Uinv (Z^n / D Z^n).
    // generator i (order d_i): g_i = Uinv e_i / 1, class of order d_i.
    // Its dual-lattice representative: y_i = G^{-1} g_i.
    let ginv = crate::linalg::invert_rational(&lattice.gram)?;
    let mut gens = Vec::new();
    let mut orders = Vec::new();
    for i in 0..n {
        let d = snf.diag(i);
        if d <= 1 {
            continue;
        }
        let gi: Vector = (0..n).map(|r| snf.uinv[r][i]).collect();
        // y = G^{-1} g_i as rational coordinates in the lattice basis
        let y: Vec<BigRational> = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| ginv[r][c].clone() * rat(gi[c]))
                    .sum()
            })
            .collect();
        gens.push(y);
        orders.push(d);
    }
    Ok(DiscForm {
        gens,
        orders,
        gram: lattice.gram.clone(),
    })
}

impl DiscForm {
    /// Rational coordinates (in the lattice basis) of a group element.
    fn element(&self, idx: &[Int]) -> Vec<BigRational> {
        let n = self.gram.len();
        (0..n)
            .map(|r| {
                self.gens
                    .iter()
                    .zip(idx)
                    .map(|(g, &k)| g[r].clone() * rat(k))
                    .sum()
            })
            .collect()
    }

    fn pairing(&self, x: &[BigRational], y: &[BigRational]) -> BigRational {
        let n = self.gram.len();
        let mut s = BigRational::zero();
        for i in 0..n {
            for j in 0..n {
                s += x[i].clone() * rat(self.gram[i][j]) * y[j].clone();
            }
        }
        s
    }
}

/// All even overlattices `M` of `L` of finite index > 1, one per isotropic
/// glue subgroup of the discriminant group, deduplicated up to isometry of
/// the Gram matrix. Each is returned with an integral Gram matrix.
pub fn even_overlattices(lattice: &GramLattice) -> Result<Vec<GramLattice>> {
    let form = disc_form(lattice)?;
    let k = form.gens.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let n = lattice.rank();
    // enumerate all elements of the discriminant group
    let mut elements: Vec<Vec<Int>> = vec![vec![0; k]];
    for i in 0..k {
        let mut next = Vec::new();
        for e in &elements {
            for v in 0..form.orders[i] {
                let mut e2 = e.clone();
                e2[i] = v;
                next.push(e2);
            }
        }
        elements = next;
    }
    // isotropic elements: q(x) in 2Z (even overlattice condition for the
    // generator) -- full subgroups additionally need integral pairings.
    let coords: Vec<Vec<BigRational>> = elements.iter().map(|e| form.element(e)).collect();
    let two = BigRational::from(BigInt::from(2));
    let is_even = |x: &[BigRational]| -> bool {
        let q = form.pairing(x, x);
        (q / two.clone()).is_integer()
    };
    // grow isotropic subgroups by closure: BFS over subgroup generators
    let mut subgroups: BTreeSet<Vec<Vec<Int>>> = BTreeSet::new();
    let zero = vec![0 as Int; k];
    let mut frontier: Vec<Vec<Vec<Int>>> = vec![vec![zero.clone()]];
    subgroups.insert(vec![zero.clone()]);
    while let Some(group) = frontier.pop() {
        for (e, x) in elements.iter().zip(&coords) {
            if group.contains(e) {
                continue;
            }
            if !is_even(x) {
                continue;
            }
            // pairings with current group must be integral
            if !group.iter().all(|g| {
                let gx = form.element(g);
                form.pairing(&gx, x).is_integer()
            }) {
                continue;
            }
            // closure of group + e
            let mut new_group: BTreeSet<Vec<Int>> = group.iter().cloned().collect();
            let mut stack: Vec<Vec<Int>> = vec![e.clone()];
            while let Some(a) = stack.pop() {
                if !new_group.insert(a.clone()) {
                    continue;
                }
                let members: Vec<Vec<Int>> = new_group.iter().cloned().collect();
                for b in members {
                    let sum: Vec<Int> = a
                        .iter()
                        .zip(&b)
                        .enumerate()
                        .map(|(i, (&x1, &x2))| (x1 + x2).rem_euclid(form.orders[i]))
                        .collect();
                    if !new_group.contains(&sum) {
                        stack.push(sum);
                    }
                }
            }
            // verify total isotropy (q even on every element, pairings integral)
            let members: Vec<Vec<Int>> = new_group.iter().cloned().collect();
            let all_ok = members.iter().all(|a| {
                let xa = form.element(a);
                is_even(&xa)
                    && members.iter().all(|b| {
                        let xb = form.element(b);
                        form.pairing(&xa, &xb).is_integer()
                    })
            });
            if !all_ok {
                continue;
            }
            let key: Vec<Vec<Int>> = members;
            if subgroups.insert(key.clone()) {
                frontier.push(key);
            }
        }
    }
    // build an overlattice per nontrivial subgroup
    let mut out: Vec<GramLattice> = Vec::new();
    let mut seen_invariants: Vec<(Vec<Vec<Int>>, GramLattice)> = Vec::new();
    for group in &subgroups {
        if group.len() <= 1 {
            continue;
        }
        // generators: lattice basis + lifts of group elements; compute a
        // basis via rational HNF on denominators
        let mut gens: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            BigRational::one()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        for e in group {
            gens.push(form.element(e));
        }
        let basis = rational_lattice_basis(&gens)?;
        if basis.len() != n {
            return Err(LatticeError::Invalid("overlattice rank mismatch".into()));
        }
        // gram of the overlattice in the new basis
        let mut gram = vec![vec![0 as Int; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for a in 0..n {
                    for b in 0..n {
                        s += basis[i][a].clone()
                            * rat(lattice.gram[a][b])
                            * basis[j][b].clone();
                    }
                }
                if !s.is_integer() {
                    return Err(LatticeError::Invalid(
                        "overlattice form is not integral".into(),
                    ));
                }
                gram[i][j] = s.to_integer().to_i128().ok_or(LatticeError::Overflow)?;
            }
        }
        let name = format!("{}^(1/{})", lattice.name, group.len());
        let m = GramLattice::new(name, gram)?;
        // dedup by isometry
        let inv = iso_invariants(&m)?;
        if seen_invariants
            .iter()
            .any(|(i2, m2)| *i2 == inv && gram_isometric(&m.gram, &m2.gram))
        {
            continue;
        }
        seen_invariants.push((inv, m.clone()));
        out.push(m);
    }
    Ok(out)
}

/// Cheap isometry invariants: rank, det, signature, elementary divisors.
fn iso_invariants(l: &GramLattice) -> Result<Vec<Vec<Int>>> {
    let (p, q) = l.signature()?;
    let dg = discriminant_group(l)?;
    Ok(vec![
        vec![l.rank() as Int, p as Int, q as Int],
        vec![l.det()?],
        dg.elementary_divisors,
    ])
}

/// Explicit isometry search between two small Gram matrices by bounded
/// backtracking over images of basis vectors. Intended for the catalogue's
/// rank <= 5 overlattice identifications.
pub fn gram_isometric(a: &[Vec<Int>], b: &[Vec<Int>]) -> bool {
    let n = a.len();
    if n != b.len() {
        return false;
    }
    // candidate images: vectors of bounded height in B with prescribed norm
    let la = match GramLattice::new("a", a.to_vec()) {
        Ok(l) => l,
        Err(_) => return false,
    };
    let lb = match GramLattice::new("b", b.to_vec()) {
        Ok(l) => l,
        Err(_) => return false,
    };
    if la.det_big() != lb.det_big() {
        return false;
    }
    for bound in [2 as Int, 3, 4, 6] {
        if let Some(found) = try_isometry(&la, &lb, bound) {
            if found {
                return true;
            }
        }
    }
    false
}

/// Some(`true`) if an isometry was found within the coordinate bound;
/// Some(`false`) if provably none within the bound budget; None to widen.
fn try_isometry(la: &GramLattice, lb: &GramLattice, bound: Int) -> Option<bool> {
    let n = la.rank();
    // enumerate all b-vectors with |coords| <= bound, bucketed by norm
    let mut by_norm: std::collections::HashMap<Int, Vec<Vector>> = Default::default();
    let mut v = vec![-bound; n];
    'scan: loop {
        if let Ok(norm) = lb.norm(&v) {
            by_norm.entry(norm).or_default().push(v.clone());
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
    fn backtrack(
        la: &GramLattice,
        lb: &GramLattice,
        by_norm: &std::collections::HashMap<Int, Vec<Vector>>,
        images: &mut Vec<Vector>,
        i: usize,
    ) -> bool {
        let n = la.rank();
        if i == n {
            // full-rank image with matching Gram and equal determinants
            // (checked by the caller) forces index 1, hence an isometry
            return crate::linalg::rank_of(images) == n;
        }
        let Some(cands) = by_norm.get(&la.gram[i][i]) else {
            return false;
        };
        'cand: for c in cands {
            for (j, img) in images.iter().enumerate().take(i) {
                match lb.inner(c, img) {
                    Ok(v) if v == la.gram[i][j] => {}
                    _ => continue 'cand,
                }
            }
            images.push(c.clone());
            if backtrack(la, lb, by_norm, images, i + 1) {
                return true;
            }
            images.pop();
        }
        false
    }
    let mut images = Vec::new();
    if backtrack(la, lb, &by_norm, &mut images, 0) {
        // verify unimodularity of the found map: gram equality on a full
        // basis with equal determinants forces index 1
        Some(true)
    } else {
        Some(false)
    }
}

/// HNF-style basis for the lattice generated by rational row vectors.
fn rational_lattice_basis(gens: &[Vec<BigRational>]) -> Result<Vec<Vec<BigRational>>> {
    let n = gens[0].len();
    // clear denominators globally
    let mut denom = BigInt::one();
    for g in gens {
        for x in g {
            denom = num_integer::lcm(denom.clone(), x.denom().clone());
        }
    }
    let scaled: Vec<Vector> = gens
        .iter()
        .map(|g| {
            g.iter()
                .map(|x| {
                    (x * BigRational::from(denom.clone()))
                        .to_integer()
                        .to_i128()
                        .ok_or(LatticeError::Overflow)
                })
                .collect::<Result<Vector>>()
        })
        .collect::<Result<_>>()?;
    let basis = integer_row_basis(&scaled, n)?;
    Ok(basis
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| rat(x) / BigRational::from(denom.clone()))
                .collect()
        })
        .collect())
}

/// Row-style Hermite basis of the lattice generated by integer rows.
pub fn integer_row_basis(rows: &[Vector], n: usize) -> Result<Vec<Vector>> {
    let mut work: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .filter(|r: &Vec<BigInt>| r.iter().any(|x| !x.is_zero()))
        .collect();
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    let mut col = 0usize;
    while col < n && !work.is_empty() {
        // reduce on column `col`
        loop {
            let mut nz: Vec<usize> = (0..work.len())
                .filter(|&i| !work[i][col].is_zero())
                .collect();
            if nz.is_empty() {
                break;
            }
            if nz.len() == 1 {
                let r = work.remove(nz[0]);
                basis.push(r);
                break;
            }
            nz.sort_by_key(|&i| work[i][col].magnitude().clone());
            let piv = nz[0];
            let pval = work[piv][col].clone();
            for &i in nz.iter().skip(1) {
                let q = num_integer::Integer::div_floor(&work[i][col], &pval);
                if !q.is_zero() {
                    for c in 0..n {
                        let v = &work[i][c] - &q * &work[piv][c];
                        work[i][c] = v;
                    }
                }
            }
            work.retain(|r| r.iter().any(|x| !x.is_zero()));
        }
        col += 1;
    }
    basis
        .iter()
        .map(|r| crate::linalg::to_int_vec(r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;

    fn lat(s: &str) -> GramLattice {
        GramLattice::from_spec(s, &LatticeSpec::parse(s).unwrap()).unwrap()
    }

    #[test]
    fn ade_discriminant_table() {
        for n in 1..=8 {
            let dg = discriminant_group(&lat(&format!("A{n}"))).unwrap();
            assert_eq!(dg.elementary_divisors, vec![(n + 1) as Int], "A{n}");
        }
        for n in [4, 6, 8] {
            let dg = discriminant_group(&lat(&format!("D{n}"))).unwrap();
            assert_eq!(dg.elementary_divisors, vec![2, 2], "D{n}");
        }
        for n in [5, 7] {
            let dg = discriminant_group(&lat(&format!("D{n}"))).unwrap();
            assert_eq!(dg.elementary_divisors, vec![4], "D{n}");
        }
        assert_eq!(
            discriminant_group(&lat("E6")).unwrap().elementary_divisors,
            vec![3]
        );
        assert_eq!(
            discriminant_group(&lat("E7")).unwrap().elementary_divisors,
            vec![2]
        );
        assert!(discriminant_group(&lat("E8"))
            .unwrap()
            .elementary_divisors
            .is_empty());
    }

    #[test]
    fn snf_det_identity() {
        for s in ["A3+D4", "U+E7", "U(2)+A1^3"] {
            let l = lat(s);
            let dg = discriminant_group(&l).unwrap();
            assert_eq!(dg.order, l.det().unwrap().abs(), "{s}");
        }
    }

    #[test]
    fn unimodular_has_no_overlattices() {
        assert!(even_overlattices(&lat("U")).unwrap().is_empty());
        assert!(even_overlattices(&lat("U+E8")).unwrap().is_empty());
    }

    #[test]
    fn s113_overlattice_is_s111() {
        // S_{1,1,3} (curve basis) has discriminant 18 and a unique even
        // overlattice, isometric to S_{1,1,1}
        let s113 = lat("gram [[-2,3,2],[3,-2,0],[2,0,-2]]");
        assert_eq!(discriminant_group(&s113).unwrap().order, 18);
        let over = even_overlattices(&s113).unwrap();
        assert_eq!(over.len(), 1);
        let s111 = lat("gram [[-2,0,1],[0,-2,2],[1,2,-2]]");
        assert!(gram_isometric(&over[0].gram, &s111.gram));
    }

    #[test]
    fn ell_bounds() {
        let l = lat("U+D8+A1^3");
        let r = embedding_report(&l, false).unwrap();
        assert_eq!(r.rank, 13);
        assert_eq!(r.ell, 5);
        assert!(r.moduli_irreducible); // 5 <= 18 - 13
        let e = lat("U+E8+E8+A1");
        let re = embedding_report(&e, true).unwrap();
        assert!(re.moduli_irreducible && re.override_applied);
        let re2 = embedding_report(&e, false).unwrap();
        assert!(!re2.moduli_irreducible); // 1 > 18 - 19
    }

    #[test]
    fn isometry_search_basics() {
        let a = lat("A2").gram;
        // A2 with swapped basis order is isometric
        let b = vec![vec![-2, 1], vec![1, -2]];
        assert!(gram_isometric(&a, &b));
        let c = lat("A1+A1").gram;
        assert!(!gram_isometric(&a, &c));
    }
}
