//! Exact sparse Gauss-Jordan elimination over the rationals.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

pub type SparseRow = BTreeMap<usize, BigRational>;

/// Reduced row echelon form, built incrementally.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    columns: usize,
    /// pivot column → row with a unit pivot, fully reduced against the others.
    rows: BTreeMap<usize, SparseRow>,
}

fn axpy(target: &mut SparseRow, factor: &BigRational, source: &SparseRow) {
    for (c, v) in source {
        let e = target.entry(*c).or_insert_with(BigRational::zero);
        *e += factor * v;
        if e.is_zero() {
            target.remove(c);
        }
    }
}

impl Echelon {
    pub fn new(columns: usize) -> Echelon {
        Echelon {
            columns,
            rows: BTreeMap::new(),
        }
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    fn reduce(&self, mut row: SparseRow) -> SparseRow {
        loop {
            let hit = row.iter().find(|(c, _)| self.rows.contains_key(c)).map(|(c, v)| (*c, v.clone()));
            match hit {
                Some((c, v)) => axpy(&mut row, &-v, &self.rows[&c]),
                None => return row,
            }
        }
    }

    /// Adds a row; returns false when it was already dependent.
    pub fn push(&mut self, row: SparseRow) -> bool {
        let row = self.reduce(row);
        let Some((&pivot, lead)) = row.iter().next() else { return false };
        let inv = lead.recip();
        let row: SparseRow = row.into_iter().map(|(c, v)| (c, v * &inv)).collect();
        for other in self.rows.values_mut() {
            if let Some(v) = other.get(&pivot).cloned() {
                axpy(other, &-v, &row);
            }
        }
        self.rows.insert(pivot, row);
        true
    }

    /// Basis of the nullspace, one vector per free column in ascending order.
    pub fn nullspace(&self) -> Vec<Vec<BigRational>> {
        (0..self.columns)
            .filter(|c| !self.rows.contains_key(c))
            .map(|free| {
                let mut v = vec![BigRational::zero(); self.columns];
                v[free] = BigRational::one();
                for (p, row) in &self.rows {
                    if let Some(x) = row.get(&free) {
                        v[*p] = -x;
                    }
                }
                v
            })
            .collect()
    }
}

pub fn nullspace(rows: impl IntoIterator<Item = SparseRow>, columns: usize) -> Vec<Vec<BigRational>> {
    let mut e = Echelon::new(columns);
    for r in rows {
        e.push(r);
    }
    e.nullspace()
}

/// Solves `A x = b` (rows carry `b` in column `columns`); `None` when
/// inconsistent, else one particular solution with free variables zero.
pub fn solve_affine(rows: impl IntoIterator<Item = SparseRow>, columns: usize) -> Option<Vec<BigRational>> {
    let mut e = Echelon::new(columns + 1);
    for r in rows {
        e.push(r);
    }
    if e.rows.contains_key(&columns) {
        return None;
    }
    let mut x = vec![BigRational::zero(); columns];
    for (p, row) in &e.rows {
        x[*p] = row.get(&columns).cloned().unwrap_or_else(BigRational::zero);
    }
    Some(x)
}

/// Whether `target` lies in the span of `basis`; returns the coefficients.
pub fn span_coefficients(basis: &[Vec<BigRational>], target: &[BigRational]) -> Option<Vec<BigRational>> {
    let k = basis.len();
    let rows = (0..target.len()).map(|i| {
        let mut row: SparseRow = basis
            .iter()
            .enumerate()
            .filter(|(_, b)| !b[i].is_zero())
            .map(|(j, b)| (j, b[i].clone()))
            .collect();
        if !target[i].is_zero() {
            row.insert(k, target[i].clone());
        }
        row
    });
    solve_affine(rows, k)
}
