use std::fmt;

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::expr::{integer, rational_to_f64, Coeff, Expr, Rational};

/// Chart variable order shared by every 4×4 matrix and field.
pub const CHART_VARS: [&str; 4] = ["s1", "s2", "t1", "t2"];

/// An exact 4×4 antisymmetric matrix over `(s1, s2, t1, t2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymplecticMatrix {
    entries: [[Rational; 4]; 4],
}

impl SymplecticMatrix {
    /// Rejects matrices that are not antisymmetric.
    pub fn new(entries: [[Rational; 4]; 4]) -> Option<Self> {
        let m = Self { entries };
        m.is_antisymmetric().then_some(m)
    }

    pub fn from_ints(e: [[i64; 4]; 4]) -> Option<Self> {
        Self::new(e.map(|row| row.map(integer)))
    }

    pub fn zero() -> Self {
        Self { entries: std::array::from_fn(|_| std::array::from_fn(|_| Rational::zero())) }
    }

    /// Build from the upper triangle `(w01, w02, w03, w12, w13, w23)`.
    pub fn from_upper(u: [Rational; 6]) -> Self {
        let mut m = Self::zero();
        let idx = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        for ((i, j), v) in idx.into_iter().zip(u) {
            m.entries[j][i] = -v.clone();
            m.entries[i][j] = v;
        }
        m
    }

    pub fn entries(&self) -> &[[Rational; 4]; 4] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| self.entries[i][j] == -self.entries[j][i].clone()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self { entries: self.entries.clone().map(|row| row.map(|x| x * c)) }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(Zero::is_zero)
    }

    /// Exact rank by fraction-free elimination.
    pub fn rank(&self) -> usize {
        rank_of(self.entries.iter().map(|r| r.to_vec()).collect())
    }

    /// `P W Pᵀ` for the permutation sending new index `i` to old index `perm[i]`.
    pub fn permuted(&self, perm: [usize; 4]) -> Self {
        Self { entries: std::array::from_fn(|i| std::array::from_fn(|j| self.entries[perm[i]][perm[j]].clone())) }
    }

    /// `c` with `self = c · other`, if one exists.
    pub fn proportionality(&self, other: &Self) -> Option<Rational> {
        let mut c: Option<Rational> = None;
        for i in 0..4 {
            for j in 0..4 {
                let (a, b) = (&self.entries[i][j], &other.entries[i][j]);
                if b.is_zero() {
                    if !a.is_zero() {
                        return None;
                    }
                    continue;
                }
                let r = a / b;
                match &c {
                    None => c = Some(r),
                    Some(prev) if *prev != r => return None,
                    _ => {}
                }
            }
        }
        c.or_else(|| Some(Rational::zero()))
    }

    /// Smallest-index permutation `P` and scale `c` with `self = c · P other Pᵀ`.
    pub fn relation_to(&self, other: &Self) -> Option<([usize; 4], Rational)> {
        for perm in permutations4() {
            if let Some(c) = self.proportionality(&other.permuted(perm)) {
                if !c.is_zero() || self.is_zero() {
                    return Some((perm, c));
                }
            }
        }
        None
    }

    pub fn to_f64(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|i| std::array::from_fn(|j| rational_to_f64(&self.entries[i][j])))
    }

    /// `Σ W[i][j] a_i b_j` for vectors of expressions.
    pub fn pair(&self, a: &[Expr; 4], b: &[Expr; 4]) -> Expr {
        let mut terms = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                let w = &self.entries[i][j];
                if w.is_zero() {
                    continue;
                }
                terms.push(Expr::product(vec![Expr::rational(w.clone()), a[i].clone(), b[j].clone()]));
            }
        }
        Expr::sum(terms)
    }

    /// Interior product `(i_ξ W)_j = Σ_i ξ^i W[i][j]`.
    pub fn contract_left(&self, xi: &[Expr; 4]) -> [Expr; 4] {
        std::array::from_fn(|j| {
            Expr::sum(
                (0..4)
                    .filter(|i| !self.entries[*i][j].is_zero())
                    .map(|i| Expr::product(vec![Expr::Const(Coeff::real(self.entries[i][j].clone())), xi[i].clone()]))
                    .collect(),
            )
        })
    }
}

pub(crate) fn rank_of(mut m: Vec<Vec<Rational>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = &m[r][col] / &pivot;
                for c in col..cols {
                    let sub = &f * &m[rank][c];
                    m[r][c] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|k| p.contains(&k)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

impl fmt::Display for SymplecticMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, row) in self.entries.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            write!(f, "[{}]", cells.join(", "))?;
            if k < 3 {
                f.write_str("\n")?;
            }
        }
        Ok(())
    }
}

impl Serialize for SymplecticMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self.entries.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
        rows.serialize(s)
    }
}

impl Default for SymplecticMatrix {
    fn default() -> Self {
        Self::zero()
    }
}
