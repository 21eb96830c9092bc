//! Enumeration and classification of connectivity matrices.
//!
//! A connectivity matrix of order `r` is an `r x r` nonnegative integer
//! matrix `F` with zero diagonal, all row and column sums equal to 2,
//! and nonvanishing first cofactor of `2I - F`.  Interpreted as the
//! adjacency matrix of a directed multigraph, the conditions say every
//! vertex has in- and out-degree 2 (the four strands of two walk
//! passages) and the graph is connected.  The `r`-th moment of the
//! renormalized intersection local time is a sum over the equivalence
//! classes of such matrices under simultaneous row/column permutation,
//! each class weighted by combinatorial data computed here.
//!
//! Orders 2 to 4 have 1, 2, and 5 classes; this crate labels them
//! `f1` .. `f8` (see [`ClassId`]) with fixed reference representatives,
//! and all tabulated per-class data is keyed by those labels.

use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CombinatoricsError {
    #[error("matrix order must be between 2 and 6, got {0}")]
    InvalidOrder(usize),
    #[error("entry table has {got} entries, expected {expected}")]
    EntryCount { got: usize, expected: usize },
    #[error("diagonal entry at index {0} is nonzero")]
    NonzeroDiagonal(usize),
    #[error("row {0} does not sum to 2")]
    RowSum(usize),
    #[error("column {0} does not sum to 2")]
    ColumnSum(usize),
    #[error("first cofactor of 2I - F vanishes (disconnected walk pattern)")]
    ZeroCofactor,
}

/// A matrix satisfying all four connectivity conditions.  Construction
/// validates them, so a value of this type is always admissible.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConnectivityMatrix {
    r: usize,
    entries: Vec<u8>, // row-major
}

impl ConnectivityMatrix {
    /// Validate and wrap a row-major entry table.
    pub fn new(r: usize, entries: Vec<u8>) -> Result<Self, CombinatoricsError> {
        if !(2..=6).contains(&r) {
            return Err(CombinatoricsError::InvalidOrder(r));
        }
        if entries.len() != r * r {
            return Err(CombinatoricsError::EntryCount {
                got: entries.len(),
                expected: r * r,
            });
        }
        for i in 0..r {
            if entries[i * r + i] != 0 {
                return Err(CombinatoricsError::NonzeroDiagonal(i));
            }
            let row: u8 = entries[i * r..(i + 1) * r].iter().sum();
            if row != 2 {
                return Err(CombinatoricsError::RowSum(i));
            }
            let col: u8 = (0..r).map(|k| entries[k * r + i]).sum();
            if col != 2 {
                return Err(CombinatoricsError::ColumnSum(i));
            }
        }
        let m = ConnectivityMatrix { r, entries };
        if m.cofactor() == 0 {
            return Err(CombinatoricsError::ZeroCofactor);
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.r
    }

    /// Entry `F[i][j]`.
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.r + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    /// First cofactor of `2I - F`: the determinant after deleting the
    /// first row and column, in exact integer arithmetic.  For an
    /// admissible matrix this is positive and counts the spanning
    /// arborescences of the directed multigraph (see
    /// [`arborescence_count`]).
    pub fn cofactor(&self) -> i64 {
        let r = self.r;
        let mut minor = vec![0i64; (r - 1) * (r - 1)];
        for i in 1..r {
            for j in 1..r {
                let diag = if i == j { 2 } else { 0 };
                minor[(i - 1) * (r - 1) + (j - 1)] = diag - i64::from(self.get(i, j));
            }
        }
        int_determinant(r - 1, &mut minor)
    }

    /// The product of the factorials of all entries.
    pub fn multiplicity(&self) -> u64 {
        self.entries
            .iter()
            .map(|&e| match e {
                0 | 1 => 1u64,
                2 => 2,
                n => (1..=u64::from(n)).product(),
            })
            .product()
    }

    /// Lexicographically smallest conjugate, the canonical class key.
    fn canonical_key(&self) -> Vec<u8> {
        let mut best = self.entries.clone();
        for sigma in permutations(self.r) {
            let cand = conjugate_entries(self.r, &self.entries, &sigma);
            if cand < best {
                best = cand;
            }
        }
        best
    }
}

impl fmt::Display for ConnectivityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.r {
            for j in 0..self.r {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            if i + 1 < self.r {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Exact integer determinant by fraction-free (Bareiss) elimination.
pub(crate) fn int_determinant(n: usize, a: &mut [i64]) -> i64 {
    if n == 0 {
        return 1;
    }
    let mut sign = 1i64;
    let mut prev = 1i64;
    for k in 0..n - 1 {
        if a[k * n + k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i * n + k] != 0) else {
                return 0;
            };
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
            }
            a[i * n + k] = 0;
        }
        prev = a[k * n + k];
    }
    sign * a[(n - 1) * n + (n - 1)]
}

fn conjugate_entries(r: usize, entries: &[u8], sigma: &[usize]) -> Vec<u8> {
    let mut out = vec![0u8; r * r];
    for i in 0..r {
        for j in 0..r {
            out[i * r + j] = entries[sigma[i] * r + sigma[j]];
        }
    }
    out
}

/// All permutations of `0..r` in lexicographic order.
pub(crate) fn permutations(r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..r).collect();
    let mut used = vec![false; r];
    fn rec(
        r: usize,
        cur: &mut Vec<usize>,
        used: &mut Vec<bool>,
        depth: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if depth == r {
            out.push(cur.clone());
            return;
        }
        for v in 0..r {
            if !used[v] {
                used[v] = true;
                cur[depth] = v;
                rec(r, cur, used, depth + 1, out);
                used[v] = false;
            }
        }
    }
    rec(r, &mut cur, &mut used, 0, &mut out);
    out
}

/// Simultaneous row/column permutation: `F'[i][j] = F[sigma[i]][sigma[j]]`.
///
/// The result satisfies the same four conditions, so it is returned as
/// a [`ConnectivityMatrix`] directly.
///
/// # Panics
/// If `sigma` is not a permutation of `0..F.order()`.
pub fn conjugate(f: &ConnectivityMatrix, sigma: &[usize]) -> ConnectivityMatrix {
    let r = f.order();
    assert_eq!(sigma.len(), r, "permutation length mismatch");
    let mut seen = vec![false; r];
    for &s in sigma {
        assert!(s < r && !seen[s], "not a permutation of 0..{r}");
        seen[s] = true;
    }
    ConnectivityMatrix {
        r,
        entries: conjugate_entries(r, &f.entries, sigma),
    }
}

/// Every admissible matrix of order `r`, each exactly once, in
/// ascending lexicographic (row-major) order.
///
/// Any candidate with row and column sums 2 is a sum of two permutation
/// matrices, so the enumeration runs over pairs of derangements (fixed
/// points would violate the zero diagonal), then filters the cofactor
/// condition and deduplicates.  This covers the space exhaustively
/// without scanning all 3^(r^2) entry tables.
///
/// # Examples
///
/// ```
/// use silt::combinatorics::enumerate_matrices;
///
/// assert_eq!(enumerate_matrices(2).unwrap().len(), 1);
/// assert_eq!(enumerate_matrices(3).unwrap().len(), 3);
/// assert_eq!(enumerate_matrices(4).unwrap().len(), 39);
/// ```
pub fn enumerate_matrices(r: usize) -> Result<Vec<ConnectivityMatrix>, CombinatoricsError> {
    if !(2..=6).contains(&r) {
        return Err(CombinatoricsError::InvalidOrder(r));
    }
    let derangements: Vec<Vec<usize>> = permutations(r)
        .into_iter()
        .filter(|p| p.iter().enumerate().all(|(i, &pi)| pi != i))
        .collect();
    let mut seen = std::collections::BTreeSet::new();
    for a in &derangements {
        for b in &derangements {
            let mut entries = vec![0u8; r * r];
            for i in 0..r {
                entries[i * r + a[i]] += 1;
                entries[i * r + b[i]] += 1;
            }
            seen.insert(entries);
        }
    }
    Ok(seen
        .into_iter()
        .filter_map(|entries| ConnectivityMatrix::new(r, entries).ok())
        .collect())
}

/// Labels for the equivalence classes of orders 2 to 4, in their
/// conventional order: `f1` is the unique order-2 class, `f2`/`f3` the
/// order-3 classes, `f4` .. `f8` the order-4 classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
}

pub const ALL_CLASSES: [ClassId; 8] = [
    ClassId::F1,
    ClassId::F2,
    ClassId::F3,
    ClassId::F4,
    ClassId::F5,
    ClassId::F6,
    ClassId::F7,
    ClassId::F8,
];

impl ClassId {
    /// The fixed reference representative of this class.
    pub fn reference(self) -> ConnectivityMatrix {
        let (r, raw): (usize, &[u8]) = match self {
            ClassId::F1 => (2, &[0, 2, 2, 0]),
            ClassId::F2 => (3, &[0, 1, 1, 1, 0, 1, 1, 1, 0]),
            ClassId::F3 => (3, &[0, 2, 0, 0, 0, 2, 2, 0, 0]),
            ClassId::F4 => (4, &[0, 0, 0, 2, 0, 0, 2, 0, 1, 1, 0, 0, 1, 1, 0, 0]),
            ClassId::F5 => (4, &[0, 0, 0, 2, 0, 0, 2, 0, 2, 0, 0, 0, 0, 2, 0, 0]),
            ClassId::F6 => (4, &[0, 0, 0, 2, 1, 0, 1, 0, 1, 1, 0, 0, 0, 1, 1, 0]),
            ClassId::F7 => (4, &[0, 0, 1, 1, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1, 0, 0]),
            ClassId::F8 => (4, &[0, 0, 1, 1, 1, 0, 0, 1, 1, 1, 0, 0, 0, 1, 1, 0]),
        };
        ConnectivityMatrix::new(r, raw.to_vec()).expect("reference matrices are admissible")
    }

    pub fn order(self) -> usize {
        match self {
            ClassId::F1 => 2,
            ClassId::F2 | ClassId::F3 => 3,
            _ => 4,
        }
    }

    /// Tabulated moment coefficient `g(F) * U(F)` of this class.  The
    /// factor `U(F)` is inherited data (its general definition lives
    /// outside this crate's scope), so the products are stored as exact
    /// rationals rather than derived.
    pub fn coefficient(self) -> Rational {
        match self {
            ClassId::F1 => Rational::new(1, 2),
            ClassId::F2 => Rational::new(3, 1),
            ClassId::F3 => Rational::new(1, 1),
            ClassId::F4 => Rational::new(12, 1),
            ClassId::F5 => Rational::new(3, 1),
            ClassId::F6 => Rational::new(36, 1),
            ClassId::F7 => Rational::new(12, 1),
            ClassId::F8 => Rational::new(30, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassId::F1 => "f1",
            ClassId::F2 => "f2",
            ClassId::F3 => "f3",
            ClassId::F4 => "f4",
            ClassId::F5 => "f5",
            ClassId::F6 => "f6",
            ClassId::F7 => "f7",
            ClassId::F8 => "f8",
        }
    }

    pub fn parse(s: &str) -> Option<ClassId> {
        ALL_CLASSES.iter().copied().find(|c| c.name() == s)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An exact rational number; only what the tabulated coefficients need.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let s = if den < 0 { -1 } else { 1 };
        Rational {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn numerator(self) -> i64 {
        self.num
    }

    pub fn denominator(self) -> i64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// One equivalence class under simultaneous row/column permutation.
#[derive(Debug, Clone)]
pub struct MatrixClass {
    /// Label, for orders 2 to 4 where the classes are tabulated.
    pub id: Option<ClassId>,
    /// Lexicographically smallest member.
    pub representative: ConnectivityMatrix,
    /// Number of permutations fixing the representative (`#S_F`).
    pub symmetry_count: u64,
    /// Class size `g = r! / symmetry_count`.
    pub weight: u64,
    /// Shared first cofactor of `2I - F`.
    pub cofactor: i64,
    /// Shared entry-factorial product `M`.
    pub multiplicity: u64,
    /// Tabulated coefficient `g * U`, when the class is labeled.
    pub coefficient: Option<Rational>,
}

/// Partition the full enumeration of one order into classes.
///
/// Classes of orders 2 to 4 are matched to their [`ClassId`] labels by
/// conjugation equivalence with the reference representatives and
/// returned in label order; unlabeled classes (order 5 and up) follow
/// in order of their canonical representatives.
pub fn classify(matrices: &[ConnectivityMatrix]) -> Vec<MatrixClass> {
    let mut groups: BTreeMap<Vec<u8>, Vec<&ConnectivityMatrix>> = BTreeMap::new();
    for m in matrices {
        groups.entry(m.canonical_key()).or_default().push(m);
    }
    let r = match matrices.first() {
        Some(m) => m.order(),
        None => return Vec::new(),
    };
    let r_factorial: u64 = (1..=r as u64).product();
    // Keys of the labeled references at this order, for identification.
    let labels: Vec<(Vec<u8>, ClassId)> = ALL_CLASSES
        .iter()
        .filter(|c| c.order() == r)
        .map(|&c| (c.reference().canonical_key(), c))
        .collect();

    let mut classes: Vec<MatrixClass> = groups
        .into_iter()
        .map(|(key, members)| {
            let weight = members.len() as u64;
            let representative = ConnectivityMatrix {
                r,
                entries: key.clone(),
            };
            let id = labels.iter().find(|(k, _)| *k == key).map(|&(_, c)| c);
            MatrixClass {
                id,
                symmetry_count: r_factorial / weight,
                weight,
                cofactor: representative.cofactor(),
                multiplicity: representative.multiplicity(),
                coefficient: id.map(ClassId::coefficient),
                representative,
            }
        })
        .collect();
    classes.sort_by(|a, b| match (a.id, b.id) {
        (Some(x), Some(y)) => x.cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.representative.entries.cmp(&b.representative.entries),
    });
    classes
}

/// True if some simultaneous permutation makes the symmetrizations
/// agree: `F1^sigma + (F1^sigma)^t = F2 + F2^t`.  Matrices related this
/// way describe the same undirected multigraph, hence share every
/// integral value attached to the class.
pub fn transpose_equivalent(f1: &ConnectivityMatrix, f2: &ConnectivityMatrix) -> bool {
    if f1.order() != f2.order() {
        return false;
    }
    let r = f1.order();
    let sym = |e: &[u8]| -> Vec<u8> {
        let mut s = vec![0u8; r * r];
        for i in 0..r {
            for j in 0..r {
                s[i * r + j] = e[i * r + j] + e[j * r + i];
            }
        }
        s
    };
    let target = sym(&f2.entries);
    permutations(r)
        .iter()
        .any(|sigma| sym(&conjugate_entries(r, &f1.entries, sigma)) == target)
}

/// Count spanning arborescences oriented toward `root` by brute force:
/// every non-root vertex picks one of its outgoing edges (parallel
/// edges counted by multiplicity) and the selection must flow into the
/// root without cycles.  Independent of the determinant machinery, so
/// it serves as the cross-check oracle for [`ConnectivityMatrix::cofactor`];
/// for these balanced matrices the count is also independent of `root`.
pub fn arborescence_count(f: &ConnectivityMatrix, root: usize) -> u64 {
    let r = f.order();
    assert!(root < r, "root out of range");
    // Distinct out-neighbors with multiplicities, per non-root vertex.
    let vertices: Vec<usize> = (0..r).filter(|&v| v != root).collect();
    let choices: Vec<Vec<(usize, u64)>> = vertices
        .iter()
        .map(|&v| {
            (0..r)
                .filter(|&w| f.get(v, w) > 0)
                .map(|w| (w, u64::from(f.get(v, w))))
                .collect()
        })
        .collect();
    let mut total = 0u64;
    let mut pick = vec![0usize; vertices.len()];
    loop {
        // Follow the chosen out-edges: acyclic iff every path hits root.
        let mut ways = 1u64;
        for (slot, &v) in vertices.iter().enumerate() {
            ways *= choices[slot][pick[slot]].1;
            let _ = v;
        }
        let next = |v: usize| -> usize {
            let slot = vertices.iter().position(|&u| u == v).unwrap();
            choices[slot][pick[slot]].0
        };
        let mut ok = true;
        for &start in &vertices {
            let mut v = start;
            let mut steps = 0;
            while v != root {
                v = next(v);
                steps += 1;
                if steps > r {
                    ok = false;
                    break;
                }
            }
            if !ok {
                break;
            }
        }
        if ok {
            total += ways;
        }
        // Odometer over the choice lists.
        let mut slot = 0;
        loop {
            if slot == pick.len() {
                return total;
            }
            pick[slot] += 1;
            if pick[slot] < choices[slot].len() {
                break;
            }
            pick[slot] = 0;
            slot += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_matrices(2).unwrap().len(), 1);
        assert_eq!(enumerate_matrices(3).unwrap().len(), 3);
        assert_eq!(enumerate_matrices(4).unwrap().len(), 39);
        assert_eq!(
            enumerate_matrices(1),
            Err(CombinatoricsError::InvalidOrder(1))
        );
        assert_eq!(
            enumerate_matrices(7),
            Err(CombinatoricsError::InvalidOrder(7))
        );
    }

    #[test]
    fn order_two_is_the_reference() {
        let ms = enumerate_matrices(2).unwrap();
        assert_eq!(ms[0], ClassId::F1.reference());
    }

    #[test]
    fn enumeration_is_sorted_and_unique() {
        for r in 2..=4 {
            let ms = enumerate_matrices(r).unwrap();
            for w in ms.windows(2) {
                assert!(w[0].entries() < w[1].entries());
            }
        }
    }

    #[test]
    fn class_table_orders_2_to_4() {
        // Frozen tabulated values: weight g, cofactor, multiplicity M,
        // coefficient g*U per class in label order.
        #[allow(clippy::type_complexity)]
        let expected: [(ClassId, u64, i64, u64, (i64, i64)); 8] = [
            (ClassId::F1, 1, 2, 4, (1, 2)),
            (ClassId::F2, 1, 3, 1, (3, 1)),
            (ClassId::F3, 2, 4, 8, (1, 1)),
            (ClassId::F4, 12, 4, 4, (12, 1)),
            (ClassId::F5, 6, 8, 16, (3, 1)),
            (ClassId::F6, 12, 6, 2, (36, 1)),
            (ClassId::F7, 3, 4, 1, (12, 1)),
            (ClassId::F8, 6, 5, 1, (30, 1)),
        ];
        let mut got = Vec::new();
        for r in 2..=4 {
            got.extend(classify(&enumerate_matrices(r).unwrap()));
        }
        assert_eq!(got.len(), 8);
        for (class, (id, g, cof, m, (cn, cd))) in got.iter().zip(expected) {
            assert_eq!(class.id, Some(id));
            assert_eq!(class.weight, g, "{id}: weight");
            assert_eq!(class.cofactor, cof, "{id}: cofactor");
            assert_eq!(class.multiplicity, m, "{id}: multiplicity");
            assert_eq!(class.coefficient, Some(Rational::new(cn, cd)), "{id}");
            assert_eq!(
                class.weight * class.symmetry_count,
                (1..=class.representative.order() as u64).product::<u64>()
            );
        }
    }

    #[test]
    fn reference_matrices_carry_their_table_row() {
        // The reference representative itself (not just the class
        // canonical form) must reproduce cofactor and multiplicity.
        let rows: [(ClassId, i64, u64); 8] = [
            (ClassId::F1, 2, 4),
            (ClassId::F2, 3, 1),
            (ClassId::F3, 4, 8),
            (ClassId::F4, 4, 4),
            (ClassId::F5, 8, 16),
            (ClassId::F6, 6, 2),
            (ClassId::F7, 4, 1),
            (ClassId::F8, 5, 1),
        ];
        for (id, cof, m) in rows {
            let f = id.reference();
            assert_eq!(f.cofactor(), cof, "{id}");
            assert_eq!(f.multiplicity(), m, "{id}");
        }
    }

    #[test]
    fn conjugation_examples() {
        let f3 = ClassId::F3.reference();
        let id3: Vec<usize> = vec![0, 1, 2];
        assert_eq!(conjugate(&f3, &id3), f3);
        // The 3-cycle fixes f3 ...
        assert_eq!(conjugate(&f3, &[1, 2, 0]), f3);
        // ... but a transposition moves it within its class.
        let swapped = conjugate(&f3, &[1, 0, 2]);
        assert_ne!(swapped, f3);
        let classes = classify(&enumerate_matrices(3).unwrap());
        let f3_class = classes.iter().find(|c| c.id == Some(ClassId::F3)).unwrap();
        assert_eq!(f3_class.weight, 2);
    }

    #[test]
    fn transpose_equivalence_pairs() {
        let pairs = [
            (ClassId::F2, ClassId::F3, true),
            (ClassId::F5, ClassId::F7, true),
            (ClassId::F6, ClassId::F8, true),
            (ClassId::F1, ClassId::F1, true),
            (ClassId::F4, ClassId::F5, false),
            (ClassId::F4, ClassId::F7, false),
        ];
        for (a, b, want) in pairs {
            assert_eq!(
                transpose_equivalent(&a.reference(), &b.reference()),
                want,
                "{a} vs {b}"
            );
        }
    }

    #[test]
    fn arborescences_match_cofactors_exhaustively() {
        for r in 2..=4 {
            for f in enumerate_matrices(r).unwrap() {
                let cof = f.cofactor() as u64;
                for root in 0..r {
                    assert_eq!(arborescence_count(&f, root), cof, "root {root} of\n{f}");
                }
            }
        }
    }

    #[test]
    fn explicit_arborescence_examples() {
        assert_eq!(arborescence_count(&ClassId::F1.reference(), 0), 2);
        assert_eq!(arborescence_count(&ClassId::F3.reference(), 0), 4);
        assert_eq!(arborescence_count(&ClassId::F2.reference(), 1), 3);
    }

    #[test]
    fn invalid_matrices_rejected() {
        assert!(matches!(
            ConnectivityMatrix::new(2, vec![1, 1, 1, 1]),
            Err(CombinatoricsError::NonzeroDiagonal(0))
        ));
        assert!(matches!(
            ConnectivityMatrix::new(2, vec![0, 1, 1, 0]),
            Err(CombinatoricsError::RowSum(0))
        ));
        // Block-diagonal pair of 2-cycles inside order 4: row/col sums
        // fine, but disconnected, so the cofactor vanishes.
        let disconnected = vec![0, 2, 0, 0, 2, 0, 0, 0, 0, 0, 0, 2, 0, 0, 2, 0];
        assert_eq!(
            ConnectivityMatrix::new(4, disconnected),
            Err(CombinatoricsError::ZeroCofactor)
        );
    }

    fn permutation_strategy(r: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..r).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn conjugates_stay_in_the_enumerated_set(
            r in 2usize..=4,
            seed in 0usize..200,
            sigma in permutation_strategy(4),
        ) {
            let ms = enumerate_matrices(r).unwrap();
            let f = &ms[seed % ms.len()];
            let sigma: Vec<usize> = sigma.iter().copied().filter(|&s| s < r).collect();
            let g = conjugate(f, &sigma);
            prop_assert!(ms.contains(&g), "conjugate left the set");
        }

        #[test]
        fn cofactor_and_multiplicity_are_class_invariants(
            r in 2usize..=4,
            seed in 0usize..200,
            sigma in permutation_strategy(4),
        ) {
            let ms = enumerate_matrices(r).unwrap();
            let f = &ms[seed % ms.len()];
            let sigma: Vec<usize> = sigma.iter().copied().filter(|&s| s < r).collect();
            let g = conjugate(f, &sigma);
            prop_assert_eq!(f.cofactor(), g.cofactor());
            prop_assert_eq!(f.multiplicity(), g.multiplicity());
        }

        #[test]
        fn class_size_times_symmetry_is_factorial(r in 2usize..=4) {
            let classes = classify(&enumerate_matrices(r).unwrap());
            let rf: u64 = (1..=r as u64).product();
            for c in classes {
                prop_assert_eq!(c.weight * c.symmetry_count, rf);
            }
        }
    }
}
