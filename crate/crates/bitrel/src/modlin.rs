//! Exact linear algebra over Z/2^w.
//!
//! Residues are `u64` values masked to `width` bits; matrices are row-major
//! `Vec<Vec<u64>>`. The canonical form used throughout is the Howell form,
//! the analog of echelon form that stays canonical in the presence of zero
//! divisors: pivots are powers of two, entries above a pivot are reduced
//! modulo it, and the row set is closed under the leading-zero shifts
//! `2^(w-s) * row`. Two matrices span the same row module iff their Howell
//! forms are syntactically equal, which is what makes equality tests,
//! projection and the constraint/generator duality exact.

use std::fmt;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModlinError {
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(u32, u32),
    #[error("variable order mismatch")]
    VarMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

/// Arithmetic context for residues mod 2^width, 1 <= width <= 64.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ring {
    width: u32,
    mask: u64,
}

impl Ring {
    pub fn new(width: u32) -> Ring {
        assert!((1..=64).contains(&width), "width must be in 1..=64");
        let mask = if width == 64 { !0 } else { (1u64 << width) - 1 };
        Ring { width, mask }
    }

    #[inline]
    pub fn width(self) -> u32 {
        self.width
    }

    #[inline]
    pub fn reduce(self, x: u64) -> u64 {
        x & self.mask
    }

    #[inline]
    pub fn add(self, x: u64, y: u64) -> u64 {
        x.wrapping_add(y) & self.mask
    }

    #[inline]
    pub fn sub(self, x: u64, y: u64) -> u64 {
        x.wrapping_sub(y) & self.mask
    }

    #[inline]
    pub fn mul(self, x: u64, y: u64) -> u64 {
        x.wrapping_mul(y) & self.mask
    }

    #[inline]
    pub fn neg(self, x: u64) -> u64 {
        0u64.wrapping_sub(x) & self.mask
    }

    /// 2^s as a residue (zero once s reaches the width).
    #[inline]
    pub fn pow2(self, s: u32) -> u64 {
        if s >= self.width {
            0
        } else {
            1u64 << s
        }
    }

    /// 2-adic valuation of a nonzero residue.
    #[inline]
    pub fn val2(self, x: u64) -> u32 {
        debug_assert!(x != 0);
        x.trailing_zeros()
    }

    /// Inverse of an odd residue, by Newton iteration.
    pub fn inv_odd(self, a: u64) -> u64 {
        debug_assert!(a & 1 == 1, "only odd residues are units mod 2^w");
        let mut x = a; // correct to 3 bits: a*a = 1 (mod 8) for odd a
        for _ in 0..6 {
            x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x)));
        }
        x & self.mask
    }

    /// Dot product of two residue vectors.
    pub fn dot(self, x: &[u64], y: &[u64]) -> u64 {
        debug_assert_eq!(x.len(), y.len());
        let mut acc = 0u64;
        for (a, b) in x.iter().zip(y) {
            acc = acc.wrapping_add(a.wrapping_mul(*b));
        }
        acc & self.mask
    }
}

fn row_sub_scaled(ring: Ring, target: &mut [u64], source: &[u64], factor: u64) {
    for (t, s) in target.iter_mut().zip(source) {
        *t = ring.sub(*t, ring.mul(factor, *s));
    }
}

fn leading(row: &[u64]) -> Option<usize> {
    row.iter().position(|&x| x != 0)
}

/// Howell form of a matrix over Z/2^width: the unique canonical matrix with
/// the same row span. Pivots are powers of two in strictly increasing
/// columns, entries above each pivot are reduced modulo it, and the span is
/// closed under the leading-zero shifts.
pub fn howell_form(rows: &[Vec<u64>], num_cols: usize, ring: Ring) -> Vec<Vec<u64>> {
    let mut work: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), num_cols);
            r.iter().map(|&x| ring.reduce(x)).collect()
        })
        .filter(|r: &Vec<u64>| leading(r).is_some())
        .collect();
    let mut out: Vec<Vec<u64>> = Vec::new();

    for col in 0..num_cols {
        // Invariant: every row in `work` is zero before `col`.
        let best = work
            .iter()
            .enumerate()
            .filter(|(_, r)| r[col] != 0)
            .min_by_key(|(i, r)| (ring.val2(r[col]), *i))
            .map(|(i, _)| i);
        let Some(best) = best else { continue };
        let mut pivot_row = work.remove(best);

        // Scale by the odd unit so the pivot becomes 2^s.
        let s = ring.val2(pivot_row[col]);
        let unit_inv = ring.inv_odd(pivot_row[col] >> s);
        for x in pivot_row.iter_mut() {
            *x = ring.mul(*x, unit_inv);
        }
        debug_assert_eq!(pivot_row[col], ring.pow2(s));

        // Eliminate the column from the remaining rows. Every entry has
        // valuation >= s, so the shifted quotient is exact.
        let mut i = 0;
        while i < work.len() {
            if work[i][col] != 0 {
                let q = work[i][col] >> s;
                let (row, piv) = (&mut work[i], &pivot_row);
                row_sub_scaled(ring, row, piv, q);
                debug_assert_eq!(work[i][col], 0);
            }
            if leading(&work[i]).is_none() {
                work.remove(i);
            } else {
                i += 1;
            }
        }

        // Leading-zero closure: 2^(w-s) * pivot_row has a zero pivot but may
        // contribute further to the span in later columns.
        if s > 0 {
            let shift = ring.pow2(ring.width() - s);
            let shadow: Vec<u64> = pivot_row.iter().map(|&x| ring.mul(x, shift)).collect();
            if leading(&shadow).is_some() {
                work.push(shadow);
            }
        }

        out.push(pivot_row);
    }

    // Reduce entries above each pivot modulo the pivot value.
    for i in 1..out.len() {
        let col = leading(&out[i]).unwrap();
        let s = ring.val2(out[i][col]);
        let pivot_row = out[i].clone();
        for row in out.iter_mut().take(i) {
            let q = row[col] >> s;
            if q != 0 {
                row_sub_scaled(ring, row, &pivot_row, q);
            }
        }
    }

    out
}

/// Reduces a vector against a Howell-form matrix, returning the unique
/// canonical coset representative.
pub fn reduce_vector(vector: &[u64], howell_rows: &[Vec<u64>], ring: Ring) -> Vec<u64> {
    let mut v: Vec<u64> = vector.iter().map(|&x| ring.reduce(x)).collect();
    for row in howell_rows {
        let col = leading(row).expect("Howell rows are nonzero");
        let s = ring.val2(row[col]);
        let q = v[col] >> s;
        if q != 0 {
            row_sub_scaled(ring, &mut v, row, q);
        }
    }
    v
}

/// Tests membership of a vector in the row span of a Howell-form matrix.
pub fn in_span(vector: &[u64], howell_rows: &[Vec<u64>], ring: Ring) -> bool {
    leading(&reduce_vector(vector, howell_rows, ring)).is_none()
}

/// Howell basis of { c : c . g = 0 (mod 2^width) for every row g }.
///
/// Computed by Howell-reducing the block matrix [G^T | I]: reduced rows whose
/// G^T-part vanished record, in the identity part, the combinations of
/// coordinates annihilating every row — and the Howell closure property
/// guarantees all of them are spanned.
pub fn nullspace(rows: &[Vec<u64>], num_cols: usize, ring: Ring) -> Vec<Vec<u64>> {
    let m = rows.len();
    let block: Vec<Vec<u64>> = (0..num_cols)
        .map(|j| {
            let mut row = Vec::with_capacity(m + num_cols);
            row.extend(rows.iter().map(|g| ring.reduce(g[j])));
            row.extend((0..num_cols).map(|k| u64::from(k == j)));
            row
        })
        .collect();
    let reduced = howell_form(&block, m + num_cols, ring);
    let kernel: Vec<Vec<u64>> = reduced
        .into_iter()
        .filter(|r| r[..m].iter().all(|&x| x == 0))
        .map(|r| r[m..].to_vec())
        .collect();
    howell_form(&kernel, num_cols, ring)
}

/// One congruence Σ coeffs[j]·x_j ≡ rhs (mod 2^width).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<u64>,
    pub rhs: u64,
}

impl Row {
    pub fn new(coeffs: Vec<u64>, rhs: u64) -> Row {
        Row { coeffs, rhs }
    }

    /// Left-hand side value at an arbitrary residue vector (not restricted
    /// to 0-1 entries).
    pub fn eval(&self, point: &[u64], ring: Ring) -> u64 {
        ring.dot(&self.coeffs, point)
    }

    pub fn satisfied_by(&self, point: &[u64], ring: Ring) -> bool {
        self.eval(point, ring) == ring.reduce(self.rhs)
    }
}

/// A conjunction of congruences mod 2^width over named variables.
///
/// Canonical systems are in Howell form over the augmented matrix [A | b];
/// the canonical inconsistent system is the single row `0 ≡ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceSystem {
    pub width: u32,
    pub var_names: Vec<String>,
    pub rows: Vec<Row>,
}

impl CongruenceSystem {
    pub fn new(width: u32, var_names: Vec<String>, rows: Vec<Row>) -> CongruenceSystem {
        let ring = Ring::new(width);
        let rows = rows
            .into_iter()
            .map(|r| {
                assert_eq!(r.coeffs.len(), var_names.len());
                Row {
                    coeffs: r.coeffs.iter().map(|&c| ring.reduce(c)).collect(),
                    rhs: ring.reduce(r.rhs),
                }
            })
            .collect();
        CongruenceSystem {
            width,
            var_names,
            rows,
        }
    }

    /// The trivially-true system (no constraints).
    pub fn unconstrained(width: u32, var_names: Vec<String>) -> CongruenceSystem {
        CongruenceSystem {
            width,
            var_names,
            rows: Vec::new(),
        }
    }

    /// The canonical unsatisfiable system `0 ≡ 1`.
    pub fn inconsistent(width: u32, var_names: Vec<String>) -> CongruenceSystem {
        let n = var_names.len();
        CongruenceSystem {
            width,
            var_names,
            rows: vec![Row::new(vec![0; n], 1)],
        }
    }

    pub fn ring(&self) -> Ring {
        Ring::new(self.width)
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn is_inconsistent(&self) -> bool {
        self.rows
            .iter()
            .any(|r| r.rhs != 0 && r.coeffs.iter().all(|&c| c == 0))
    }

    /// Howell canonicalization of the augmented matrix, collapsing any
    /// inconsistency to the canonical `0 ≡ 1` row.
    pub fn canonicalize(&self) -> CongruenceSystem {
        let ring = self.ring();
        let n = self.num_vars();
        let aug: Vec<Vec<u64>> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = r.coeffs.clone();
                v.push(r.rhs);
                v
            })
            .collect();
        let reduced = howell_form(&aug, n + 1, ring);
        let rows: Vec<Row> = reduced
            .into_iter()
            .map(|mut v| {
                let rhs = v.pop().unwrap();
                Row::new(v, rhs)
            })
            .collect();
        let system = CongruenceSystem {
            width: self.width,
            var_names: self.var_names.clone(),
            rows,
        };
        if system.is_inconsistent() {
            CongruenceSystem::inconsistent(self.width, self.var_names.clone())
        } else {
            system
        }
    }

    /// True iff the residue vector satisfies every row.
    pub fn satisfied_by(&self, point: &[u64]) -> bool {
        let ring = self.ring();
        self.rows.iter().all(|r| r.satisfied_by(point, ring))
    }

    /// True iff the given congruence holds on every solution of the system,
    /// decided by Howell reduction of the augmented row against the
    /// canonicalized augmented matrix.
    pub fn implies_row(&self, row: &Row) -> bool {
        let ring = self.ring();
        let canon = self.canonicalize();
        let aug_rows: Vec<Vec<u64>> = canon
            .rows
            .iter()
            .map(|r| {
                let mut v = r.coeffs.clone();
                v.push(r.rhs);
                v
            })
            .collect();
        let mut target = row.coeffs.clone();
        target.push(row.rhs);
        in_span(&target, &aug_rows, ring)
    }

    /// Single-row rendering with explicit modulus, e.g. `x + 2*y ≡ 3 (mod 2^4)`.
    pub fn row_display(&self, index: usize) -> String {
        format!("{} (mod 2^{})", self.row_string(index), self.width)
    }

    fn row_string(&self, index: usize) -> String {
        let row = &self.rows[index];
        let mut terms: Vec<String> = Vec::new();
        for (coeff, name) in row.coeffs.iter().zip(&self.var_names) {
            match coeff {
                0 => {}
                1 => terms.push(name.clone()),
                c => terms.push(format!("{c}*{name}")),
            }
        }
        let lhs = if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        };
        format!("{lhs} \u{2261} {}", row.rhs)
    }

    /// JSON rendering with the fixed field names `width`, `vars`, `rows`.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "width": self.width,
            "vars": self.var_names,
            "rows": self.rows.iter().map(|r| json!({
                "coeffs": r.coeffs,
                "rhs": r.rhs,
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for CongruenceSystem {
    /// One congruence per line (modulus omitted), then a `mod 2^w` footer.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows.is_empty() {
            writeln!(f, "(no constraints)")?;
        }
        for i in 0..self.rows.len() {
            writeln!(f, "{}", self.row_string(i))?;
        }
        write!(f, "mod 2^{}", self.width)
    }
}

/// An affine subspace of (Z/2^width)^n in generator representation:
/// { point + Σ λ_i·gen_i } with the generators kept in Howell form and the
/// point reduced against them, so equal sets have equal representations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSpace {
    width: u32,
    var_names: Vec<String>,
    kind: SpaceKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum SpaceKind {
    Empty,
    Affine { point: Vec<u64>, gens: Vec<Vec<u64>> },
}

impl AffineSpace {
    pub fn empty(width: u32, var_names: Vec<String>) -> AffineSpace {
        AffineSpace {
            width,
            var_names,
            kind: SpaceKind::Empty,
        }
    }

    /// Canonicalizing constructor: generators go to Howell form, the point
    /// to its unique coset representative.
    pub fn affine(
        width: u32,
        var_names: Vec<String>,
        point: Vec<u64>,
        gens: Vec<Vec<u64>>,
    ) -> AffineSpace {
        let ring = Ring::new(width);
        let n = var_names.len();
        assert_eq!(point.len(), n);
        let gens = howell_form(&gens, n, ring);
        let point = reduce_vector(&point, &gens, ring);
        AffineSpace {
            width,
            var_names,
            kind: SpaceKind::Affine { point, gens },
        }
    }

    pub fn single_point(width: u32, var_names: Vec<String>, point: Vec<u64>) -> AffineSpace {
        AffineSpace::affine(width, var_names, point, Vec::new())
    }

    /// The full space (every vector).
    pub fn top(width: u32, var_names: Vec<String>) -> AffineSpace {
        let n = var_names.len();
        let gens = (0..n)
            .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
            .collect();
        AffineSpace::affine(width, var_names, vec![0; n], gens)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn ring(&self) -> Ring {
        Ring::new(self.width)
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.kind, SpaceKind::Empty)
    }

    pub fn point(&self) -> Option<&[u64]> {
        match &self.kind {
            SpaceKind::Empty => None,
            SpaceKind::Affine { point, .. } => Some(point),
        }
    }

    pub fn generators(&self) -> &[Vec<u64>] {
        match &self.kind {
            SpaceKind::Empty => &[],
            SpaceKind::Affine { gens, .. } => gens,
        }
    }

    pub fn contains(&self, vector: &[u64]) -> bool {
        match &self.kind {
            SpaceKind::Empty => false,
            SpaceKind::Affine { point, gens } => {
                let ring = self.ring();
                let diff: Vec<u64> = vector
                    .iter()
                    .zip(point)
                    .map(|(&v, &p)| ring.sub(ring.reduce(v), p))
                    .collect();
                in_span(&diff, gens, ring)
            }
        }
    }

    /// Coordinate deletion onto the `keep` indices — exact on the generator
    /// representation, then re-canonicalized.
    pub fn project(&self, keep: &[usize]) -> AffineSpace {
        for &k in keep {
            assert!(k < self.var_names.len(), "projection index out of range");
        }
        let names: Vec<String> = keep.iter().map(|&k| self.var_names[k].clone()).collect();
        match &self.kind {
            SpaceKind::Empty => AffineSpace::empty(self.width, names),
            SpaceKind::Affine { point, gens } => {
                let pick = |v: &Vec<u64>| keep.iter().map(|&k| v[k]).collect::<Vec<u64>>();
                let point = keep.iter().map(|&k| point[k]).collect();
                let gens = gens.iter().map(pick).collect();
                AffineSpace::affine(self.width, names, point, gens)
            }
        }
    }

    /// Projection by variable name.
    pub fn project_names(&self, keep: &[String]) -> Result<AffineSpace, ModlinError> {
        let indices = keep
            .iter()
            .map(|name| {
                self.var_names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| ModlinError::UnknownVariable(name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.project(&indices))
    }

    /// Same space over renamed coordinates.
    pub fn renamed(&self, var_names: Vec<String>) -> AffineSpace {
        assert_eq!(var_names.len(), self.var_names.len());
        AffineSpace {
            width: self.width,
            var_names,
            kind: self.kind.clone(),
        }
    }
}

/// Constraint representation of an affine space: nullspace rows against the
/// generators, right-hand sides evaluated at the point. The result describes
/// exactly the same solution set.
pub fn constraints_of(space: &AffineSpace) -> CongruenceSystem {
    let ring = space.ring();
    match (&space.kind, space.var_names.len()) {
        (SpaceKind::Empty, _) => {
            CongruenceSystem::inconsistent(space.width, space.var_names.clone())
        }
        (SpaceKind::Affine { point, gens }, n) => {
            let rows = nullspace(gens, n, ring)
                .into_iter()
                .map(|coeffs| {
                    let rhs = ring.dot(&coeffs, point);
                    Row::new(coeffs, rhs)
                })
                .collect();
            CongruenceSystem::new(space.width, space.var_names.clone(), rows).canonicalize()
        }
    }
}

/// Solution set of a congruence system as an affine space (or Empty).
///
/// Works on the homogenized system over (t, x): kernel vectors with t = 1
/// are exactly the solutions, and the Howell form of the kernel surfaces a
/// t-pivot row iff a particular solution exists.
pub fn space_of(system: &CongruenceSystem) -> AffineSpace {
    let ring = system.ring();
    let n = system.num_vars();
    let homogeneous: Vec<Vec<u64>> = system
        .rows
        .iter()
        .map(|r| {
            let mut v = Vec::with_capacity(n + 1);
            v.push(ring.neg(r.rhs));
            v.extend_from_slice(&r.coeffs);
            v
        })
        .collect();
    let kernel = nullspace(&homogeneous, n + 1, ring);

    match kernel.first() {
        Some(first) if first[0] == 1 => {
            let point = first[1..].to_vec();
            let gens = kernel[1..].iter().map(|r| r[1..].to_vec()).collect();
            AffineSpace::affine(system.width, system.var_names.clone(), point, gens)
        }
        // A t-pivot of 2^s (s > 0), or no t-pivot at all: no kernel member
        // has t = 1, so the system has no solution.
        _ => AffineSpace::empty(system.width, system.var_names.clone()),
    }
}

/// Conjunction of two systems over the same variables: row union, then
/// Howell canonicalization.
pub fn intersect(
    a: &CongruenceSystem,
    b: &CongruenceSystem,
) -> Result<CongruenceSystem, ModlinError> {
    if a.width != b.width {
        return Err(ModlinError::WidthMismatch(a.width, b.width));
    }
    if a.var_names != b.var_names {
        return Err(ModlinError::VarMismatch);
    }
    let mut rows = a.rows.clone();
    rows.extend(b.rows.iter().cloned());
    Ok(CongruenceSystem::new(a.width, a.var_names.clone(), rows).canonicalize())
}
