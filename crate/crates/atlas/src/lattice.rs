//! Even integer lattices given by Gram matrices: construction from block
//! specs (`U(k)`, ADE root blocks, rank-one `[m]` summands, explicit Gram
//! matrices), bilinear form evaluation, exact signature and reflections.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Coordinate / form-value integer. All lattice arithmetic is exact; every
/// operation that can grow coordinates goes through the checked helpers so
/// overflow surfaces as an error instead of silent wraparound.
pub type Int = i128;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("integer overflow in lattice arithmetic")]
    Overflow,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate Gram matrix")]
    Degenerate,
    #[error("invalid block: {0}")]
    InvalidBlock(String),
    #[error("parse error in lattice spec: {0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, LatticeError>;

#[inline]
pub fn add(a: Int, b: Int) -> Result<Int> {
    a.checked_add(b).ok_or(LatticeError::Overflow)
}

#[inline]
pub fn mul(a: Int, b: Int) -> Result<Int> {
    a.checked_mul(b).ok_or(LatticeError::Overflow)
}

/// A vector in a fixed lattice basis.
pub type Vector = Vec<Int>;

/// Dot of coordinate vectors (not the lattice form).
pub fn dot(x: &[Int], y: &[Int]) -> Result<Int> {
    let mut s: Int = 0;
    for (a, b) in x.iter().zip(y) {
        s = add(s, mul(*a, *b)?)?;
    }
    Ok(s)
}

pub fn scale_vec(x: &[Int], c: Int) -> Result<Vector> {
    x.iter().map(|&a| mul(a, c)).collect()
}

pub fn add_vec(x: &[Int], y: &[Int]) -> Result<Vector> {
    x.iter().zip(y).map(|(&a, &b)| add(a, b)).collect()
}

pub fn sub_vec(x: &[Int], y: &[Int]) -> Result<Vector> {
    x.iter().zip(y).map(|(&a, &b)| add(a, -b)).collect()
}

pub fn neg_vec(x: &[Int]) -> Vector {
    x.iter().map(|&a| -a).collect()
}

pub fn is_zero_vec(x: &[Int]) -> bool {
    x.iter().all(|&a| a == 0)
}

/// Divides by the gcd of the entries, keeping the first nonzero entry
/// positive when `orient` is set.
pub fn primitive_part(x: &[Int], orient: bool) -> Vector {
    let mut g: Int = 0;
    for &a in x {
        g = num_integer::gcd(g, a.abs());
    }
    if g == 0 {
        return x.to_vec();
    }
    let mut v: Vector = x.iter().map(|&a| a / g).collect();
    if orient {
        if let Some(&first) = v.iter().find(|&&a| a != 0) {
            if first < 0 {
                v = neg_vec(&v);
            }
        }
    }
    v
}

/// Block descriptor of a lattice spec.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    /// Hyperbolic plane `U(scale)`, Gram `[[0,s],[s,0]]`.
    U { scale: Int },
    /// Root block `A_n`, `D_n` or `E_n`, negative definite, optionally scaled.
    Root { kind: RootKind, n: usize, scale: Int },
    /// Rank-one lattice `[m]`.
    One { m: Int },
    /// Explicit Gram matrix block.
    Gram { gram: Vec<Vec<Int>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RootKind {
    A,
    D,
    E,
}

impl fmt::Display for RootKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootKind::A => write!(f, "A"),
            RootKind::D => write!(f, "D"),
            RootKind::E => write!(f, "E"),
        }
    }
}

/// Catalogue input format for lattices, e.g. `U(2) + A1^7` or
/// `[8] + A1^3` or `gram [[-2,0,1],[0,-2,2],[1,2,-2]]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub blocks: Vec<Block>,
}

impl LatticeSpec {
    pub fn parse(input: &str) -> Result<Self> {
        let cleaned: String = input
            .chars()
            .map(|c| match c {
                '\u{2212}' => '-', // unicode minus
                '\u{2295}' => '+', // direct sum sign
                c => c,
            })
            .collect();
        let mut blocks = Vec::new();
        for part in split_top_level(&cleaned)? {
            let part = part.trim();
            if part.is_empty() {
                return Err(LatticeError::Parse("empty summand".into()));
            }
            let (body, reps) = match part.rfind('^') {
                Some(i) => {
                    let reps: usize = part[i + 1..]
                        .trim()
                        .parse()
                        .map_err(|_| LatticeError::Parse(format!("bad repeat count in `{part}`")))?;
                    (part[..i].trim(), reps)
                }
                None => (part, 1),
            };
            if reps == 0 {
                return Err(LatticeError::Parse(format!("zero repeat in `{part}`")));
            }
            let block = parse_block(body)?;
            for _ in 0..reps {
                blocks.push(block.clone());
            }
        }
        if blocks.is_empty() {
            return Err(LatticeError::Parse("empty spec".into()));
        }
        Ok(LatticeSpec { blocks })
    }

    pub fn rank(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::U { .. } => 2,
                Block::Root { n, .. } => *n,
                Block::One { .. } => 1,
                Block::Gram { gram } => gram.len(),
            })
            .sum()
    }
}

/// Splits on `+` that are not inside brackets.
fn split_top_level(s: &str) -> Result<Vec<String>> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '[' | '(' => {
                depth += 1;
                cur.push(c);
            }
            ']' | ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| LatticeError::Parse("unbalanced brackets".into()))?;
                cur.push(c);
            }
            '+' if depth == 0 => {
                parts.push(std::mem::take(&mut cur));
            }
            c => cur.push(c),
        }
    }
    if depth != 0 {
        return Err(LatticeError::Parse("unbalanced brackets".into()));
    }
    parts.push(cur);
    Ok(parts)
}

fn parse_block(body: &str) -> Result<Block> {
    let b = body.trim();
    if let Some(rest) = b.strip_prefix("gram") {
        let gram = parse_matrix(rest.trim())?;
        return Ok(Block::Gram { gram });
    }
    if b.starts_with('[') {
        let inner = b
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .ok_or_else(|| LatticeError::Parse(format!("bad rank-one block `{b}`")))?;
        let m: Int = inner
            .trim()
            .parse()
            .map_err(|_| LatticeError::Parse(format!("bad rank-one block `{b}`")))?;
        if m == 0 {
            return Err(LatticeError::InvalidBlock("[0] is degenerate".into()));
        }
        return Ok(Block::One { m });
    }
    // U, U(k), A n, D n, E n with optional (scale)
    let (head, scale) = match b.find('(') {
        Some(i) => {
            let inner = b[i..]
                .strip_prefix('(')
                .and_then(|x| x.strip_suffix(')'))
                .ok_or_else(|| LatticeError::Parse(format!("bad scale in `{b}`")))?;
            let s: Int = inner
                .trim()
                .parse()
                .map_err(|_| LatticeError::Parse(format!("bad scale in `{b}`")))?;
            (b[..i].trim(), s)
        }
        None => (b, 1),
    };
    if scale < 1 {
        return Err(LatticeError::InvalidBlock(format!("scale must be >=1 in `{b}`")));
    }
    if head.eq_ignore_ascii_case("U") {
        return Ok(Block::U { scale });
    }
    let kind = match head.chars().next() {
        Some('A') | Some('a') => RootKind::A,
        Some('D') | Some('d') => RootKind::D,
        Some('E') | Some('e') => RootKind::E,
        _ => return Err(LatticeError::Parse(format!("unknown block `{b}`"))),
    };
    let n: usize = head[1..]
        .trim()
        .parse()
        .map_err(|_| LatticeError::Parse(format!("bad index in `{b}`")))?;
    match kind {
        RootKind::A if n >= 1 => {}
        RootKind::D if n >= 4 => {}
        RootKind::E if (6..=8).contains(&n) => {}
        _ => {
            return Err(LatticeError::InvalidBlock(format!(
                "block {kind}{n} out of range"
            )))
        }
    }
    Ok(Block::Root { kind, n, scale })
}

fn parse_matrix(s: &str) -> Result<Vec<Vec<Int>>> {
    let s = s.trim();
    let inner = s
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| LatticeError::Parse("matrix must be [[..],[..]]".into()))?;
    let mut rows = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for c in inner.chars() {
        match c {
            '[' => {
                depth += 1;
                if depth == 1 {
                    cur.clear();
                    continue;
                }
                cur.push(c);
            }
            ']' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| LatticeError::Parse("unbalanced matrix".into()))?;
                if depth == 0 {
                    let row: Vec<Int> = cur
                        .split(',')
                        .map(|t| {
                            t.trim()
                                .parse::<Int>()
                                .map_err(|_| LatticeError::Parse(format!("bad entry `{t}`")))
                        })
                        .collect::<Result<_>>()?;
                    rows.push(row);
                    continue;
                }
                cur.push(c);
            }
            c if depth >= 1 => cur.push(c),
            _ => {}
        }
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(LatticeError::Parse("matrix is not square".into()));
    }
    Ok(rows)
}

/// Standard negative-definite root block Gram matrix, Dynkin-chain numbered:
/// `A_n` is the plain chain, `D_n` forks at node `n-2`, `E_n` hangs the branch
/// node off position 3 of an `n-1` chain.
pub fn root_gram(kind: RootKind, n: usize) -> Vec<Vec<Int>> {
    let mut g = vec![vec![0; n]; n];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = -2;
    }
    let join = |g: &mut Vec<Vec<Int>>, i: usize, j: usize| {
        g[i][j] = 1;
        g[j][i] = 1;
    };
    match kind {
        RootKind::A => {
            for i in 0..n.saturating_sub(1) {
                join(&mut g, i, i + 1);
            }
        }
        RootKind::D => {
            for i in 0..n - 3 {
                join(&mut g, i, i + 1);
            }
            join(&mut g, n - 3, n - 2);
            join(&mut g, n - 3, n - 1);
        }
        RootKind::E => {
            for i in 0..n - 2 {
                join(&mut g, i, i + 1);
            }
            join(&mut g, 2, n - 1);
        }
    }
    g
}

/// An even nondegenerate lattice presented by a basis and its Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GramLattice {
    pub name: String,
    pub gram: Vec<Vec<Int>>,
    pub basis_labels: Vec<String>,
}

impl GramLattice {
    pub fn new(name: impl Into<String>, gram: Vec<Vec<Int>>) -> Result<Self> {
        let n = gram.len();
        if n == 0 || gram.iter().any(|r| r.len() != n) {
            return Err(LatticeError::Invalid("Gram matrix is not square".into()));
        }
        for i in 0..n {
            if gram[i][i] % 2 != 0 {
                return Err(LatticeError::Invalid(format!(
                    "odd diagonal entry at {i}: lattice is not even"
                )));
            }
            for j in 0..n {
                if gram[i][j] != gram[j][i] {
                    return Err(LatticeError::Invalid("Gram matrix is not symmetric".into()));
                }
            }
        }
        let labels = (1..=n).map(|i| format!("g{i}")).collect();
        let lat = GramLattice {
            name: name.into(),
            gram,
            basis_labels: labels,
        };
        if lat.det_big().is_zero() {
            return Err(LatticeError::Degenerate);
        }
        Ok(lat)
    }

    /// Builds the block-diagonal lattice of a spec, blocks in catalogue order.
    pub fn from_spec(name: impl Into<String>, spec: &LatticeSpec) -> Result<Self> {
        let rank = spec.rank();
        let mut gram = vec![vec![0; rank]; rank];
        let mut labels = vec![String::new(); rank];
        let mut off = 0usize;
        let mut u_count = 0usize;
        let mut one_count = 0usize;
        let mut root_count = 0usize;
        for block in &spec.blocks {
            match block {
                Block::U { scale } => {
                    u_count += 1;
                    gram[off][off + 1] = *scale;
                    gram[off + 1][off] = *scale;
                    labels[off] = format!("e{u_count}");
                    labels[off + 1] = format!("f{u_count}");
                    off += 2;
                }
                Block::Root { kind, n, scale } => {
                    root_count += 1;
                    let g = root_gram(*kind, *n);
                    for i in 0..*n {
                        for j in 0..*n {
                            gram[off + i][off + j] = mul(g[i][j], *scale)?;
                        }
                        labels[off + i] = format!("{kind}{n}.{root_count}.r{}", i + 1);
                    }
                    off += n;
                }
                Block::One { m } => {
                    one_count += 1;
                    gram[off][off] = *m;
                    labels[off] = format!("u{one_count}");
                    off += 1;
                }
                Block::Gram { gram: g } => {
                    let n = g.len();
                    for i in 0..n {
                        for j in 0..n {
                            gram[off + i][off + j] = g[i][j];
                        }
                        labels[off + i] = format!("g{}", off + i + 1);
                    }
                    off += n;
                }
            }
        }
        let mut lat = GramLattice::new(name, gram)?;
        lat.basis_labels = labels;
        Ok(lat)
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    fn check_dim(&self, x: &[Int]) -> Result<()> {
        if x.len() != self.rank() {
            return Err(LatticeError::DimensionMismatch {
                expected: self.rank(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Bilinear form `x . y`.
    pub fn inner(&self, x: &[Int], y: &[Int]) -> Result<Int> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let mut s: Int = 0;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            let mut row: Int = 0;
            for (j, &yj) in y.iter().enumerate() {
                if yj != 0 {
                    row = add(row, mul(self.gram[i][j], yj)?)?;
                }
            }
            s = add(s, mul(xi, row)?)?;
        }
        Ok(s)
    }

    pub fn norm(&self, x: &[Int]) -> Result<Int> {
        self.inner(x, x)
    }

    /// `gram * x` as a coordinate functional (the hyperplane normal of `x`).
    pub fn functional(&self, x: &[Int]) -> Result<Vector> {
        self.check_dim(x)?;
        (0..self.rank()).map(|i| dot(&self.gram[i], x)).collect()
    }

    /// Reflection in a `(-2)`-vector: `x -> x + (x.d) d`.
    pub fn reflect(&self, x: &[Int], delta: &[Int]) -> Result<Vector> {
        if self.norm(delta)? != -2 {
            return Err(LatticeError::Invalid(
                "reflection vector must have square -2".into(),
            ));
        }
        let c = self.inner(x, delta)?;
        add_vec(x, &scale_vec(delta, c)?)
    }

    /// Exact determinant (Bareiss over BigInt).
    pub fn det_big(&self) -> BigInt {
        let n = self.rank();
        let mut m: Vec<Vec<BigInt>> = self
            .gram
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let mut sign = 1i32;
        let mut prev = BigInt::from(1);
        for k in 0..n {
            if m[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                    return BigInt::zero();
                };
                m.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                    m[i][j] = v;
                }
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    pub fn det(&self) -> Result<Int> {
        let d = self.det_big();
        i128::try_from(&d).map_err(|_| LatticeError::Overflow)
    }

    /// Exact signature `(positive, negative)` by rational symmetric pivoting
    /// (Sylvester's law of inertia).
    pub fn signature(&self) -> Result<(usize, usize)> {
        let n = self.rank();
        let mut m: Vec<Vec<BigRational>> = self
            .gram
            .iter()
            .map(|r| r.iter().map(|&x| BigRational::from(BigInt::from(x))).collect())
            .collect();
        let mut pos = 0usize;
        let mut neg = 0usize;
        let mut rows: Vec<usize> = (0..n).collect();
        while let Some(&r0) = rows.first() {
            // find a nonzero diagonal pivot, or synthesize one from an
            // off-diagonal pair (x+y basis change)
            let pivot = rows.iter().copied().find(|&i| !m[i][i].is_zero());
            let p = match pivot {
                Some(p) => p,
                None => {
                    let mut found = None;
                    'outer: for &i in &rows {
                        for &j in &rows {
                            if i != j && !m[i][j].is_zero() {
                                found = Some((i, j));
                                break 'outer;
                            }
                        }
                    }
                    let Some((i, j)) = found else {
                        return Err(LatticeError::Degenerate);
                    };
                    // replace e_i by e_i + e_j so the diagonal becomes nonzero
                    let mij = m[i][j].clone();
                    let mjj = m[j][j].clone();
                    m[i][i] = m[i][i].clone() + BigRational::from(BigInt::from(2)) * mij + mjj;
                    for &k in &rows {
                        if k != i {
                            m[i][k] = m[i][k].clone() + m[k][j].clone();
                            m[k][i] = m[i][k].clone();
                        }
                    }
                    i
                }
            };
            let _ = r0;
            let piv = m[p][p].clone();
            if piv.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            rows.retain(|&i| i != p);
            for a in 0..rows.len() {
                for b in 0..rows.len() {
                    let (i, j) = (rows[a], rows[b]);
                    let v = m[i][j].clone() - m[i][p].clone() * m[p][j].clone() / piv.clone();
                    m[i][j] = v;
                }
            }
        }
        if pos + neg != n {
            return Err(LatticeError::Degenerate);
        }
        Ok((pos, neg))
    }

    pub fn is_negative_definite(&self) -> bool {
        matches!(self.signature(), Ok((0, n)) if n == self.rank())
    }

    pub fn is_hyperbolic(&self) -> bool {
        matches!(self.signature(), Ok((1, n)) if n + 1 == self.rank())
    }
}

impl fmt::Display for GramLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} (rank {})", self.name, self.rank())?;
        for row in &self.gram {
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(s: &str) -> GramLattice {
        GramLattice::from_spec(s, &LatticeSpec::parse(s).unwrap()).unwrap()
    }

    #[test]
    fn block_construction() {
        assert_eq!(lat("A1").gram, vec![vec![-2]]);
        assert_eq!(lat("U(2)").gram, vec![vec![0, 2], vec![2, 0]]);
        let s111 = lat("gram [[-2,0,1],[0,-2,2],[1,2,-2]]");
        assert_eq!(s111.gram[0][2], 1);
        assert_eq!(s111.det().unwrap(), 2);
    }

    #[test]
    fn parse_rejects_bad_blocks() {
        assert!(LatticeSpec::parse("A0").is_err());
        assert!(LatticeSpec::parse("D3").is_err());
        assert!(LatticeSpec::parse("E9").is_err());
        assert!(LatticeSpec::parse("U(0)").is_err());
        assert!(LatticeSpec::parse("[0]").is_err());
        assert!(LatticeSpec::parse("").is_err());
    }

    #[test]
    fn parse_repeats_and_whitespace() {
        let s = LatticeSpec::parse(" U(2)+ A1^7 ").unwrap();
        assert_eq!(s.rank(), 9);
        let l = GramLattice::from_spec("U(2)+A1^7", &s).unwrap();
        assert_eq!(l.gram[2][2], -2);
        assert_eq!(l.gram[0][1], 2);
    }

    #[test]
    fn inner_and_reflection() {
        let u = lat("U");
        assert_eq!(u.inner(&[1, 0], &[0, 1]).unwrap(), 1);
        let s111 = lat("gram [[-2,0,1],[0,-2,2],[1,2,-2]]");
        assert_eq!(s111.norm(&[0, 0, 1]).unwrap(), -2);
        // reflect(d, d) = -d
        let d = vec![0, 0, 1];
        assert_eq!(s111.reflect(&d, &d).unwrap(), vec![0, 0, -1]);
        // U: reflect(e, e-f) = f
        let e = vec![1, 0];
        let emf = vec![1, -1];
        assert_eq!(u.reflect(&e, &emf).unwrap(), vec![0, 1]);
    }

    #[test]
    fn signatures() {
        assert_eq!(lat("U").signature().unwrap(), (1, 1));
        assert_eq!(lat("E8").signature().unwrap(), (0, 8));
        assert_eq!(lat("U+E8+E8").signature().unwrap(), (1, 17));
        assert_eq!(lat("U(4)").signature().unwrap(), (1, 1));
        assert_eq!(lat("A5").signature().unwrap(), (0, 5));
        assert_eq!(lat("D7").signature().unwrap(), (0, 7));
    }

    #[test]
    fn determinant_identities() {
        // det(A (+) B) = det A * det B
        let a = lat("A2");
        let b = lat("D4");
        let ab = lat("A2+D4");
        assert_eq!(
            ab.det().unwrap(),
            a.det().unwrap() * b.det().unwrap()
        );
        // det(L(m)) = m^rank det(L)
        let a2_3 = lat("A2(3)");
        assert_eq!(a2_3.det().unwrap(), 9 * a.det().unwrap());
        // U + E8 + E8 is unimodular
        assert_eq!(lat("U+E8+E8").det().unwrap(), -1);
    }

    #[test]
    fn ade_dets() {
        for n in 1..=9 {
            assert_eq!(lat(&format!("A{n}")).det().unwrap().abs(), (n + 1) as Int);
        }
        for n in 4..=9 {
            assert_eq!(lat(&format!("D{n}")).det().unwrap().abs(), 4);
        }
        assert_eq!(lat("E6").det().unwrap().abs(), 3);
        assert_eq!(lat("E7").det().unwrap().abs(), 2);
        assert_eq!(lat("E8").det().unwrap().abs(), 1);
    }

    #[test]
    fn reflection_is_involution_and_isometry() {
        let l = lat("gram [[-2,0,1],[0,-2,2],[1,2,-2]]");
        let roots = [vec![0, 0, 1], vec![1, 0, 0], vec![0, 1, 0]];
        let xs = [vec![1, 2, 3], vec![-4, 0, 7], vec![5, -5, 2]];
        for d in &roots {
            if l.norm(d).unwrap() != -2 {
                continue;
            }
            for x in &xs {
                let rx = l.reflect(x, d).unwrap();
                assert_eq!(l.reflect(&rx, d).unwrap(), *x);
                for y in &xs {
                    let ry = l.reflect(y, d).unwrap();
                    assert_eq!(l.inner(&rx, &ry).unwrap(), l.inner(x, y).unwrap());
                }
            }
        }
    }
}
