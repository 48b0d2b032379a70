//! Dense linear algebra over GF(2).
//!
//! Rows are [`BitPoly`] values read as bit vectors: bit `j` of row `i` is the
//! entry in column `j`. A [`BitMatrix`] additionally fixes the column count.

use thiserror::Error;

use crate::gf2poly::BitPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("row has a bit in column {bit} but the matrix has {ncols} columns")]
    RowTooWide { bit: usize, ncols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<BitPoly>,
    ncols: usize,
}

/// Output of [`BitMatrix::echelonize`].
#[derive(Clone, Debug)]
pub struct Echelon {
    /// Reduced row-echelon form; zero rows at the bottom.
    pub echelon: BitMatrix,
    pub rank: usize,
    /// Invertible `nrows x nrows` matrix with `echelon = transform * M`.
    pub transform: BitMatrix,
    /// Pivot column of each of the first `rank` rows, strictly increasing.
    pub pivots: Vec<usize>,
}

impl BitMatrix {
    pub fn new(ncols: usize) -> Self {
        BitMatrix {
            rows: Vec::new(),
            ncols,
        }
    }

    pub fn zero(nrows: usize, ncols: usize) -> Self {
        BitMatrix {
            rows: vec![BitPoly::zero(); nrows],
            ncols,
        }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix {
            rows: (0..n).map(BitPoly::monomial).collect(),
            ncols: n,
        }
    }

    pub fn from_rows(rows: Vec<BitPoly>, ncols: usize) -> Result<Self, LinalgError> {
        let mut m = BitMatrix::new(ncols);
        for row in rows {
            m.push_row(row)?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, row: BitPoly) -> Result<(), LinalgError> {
        check_width(&row, self.ncols)?;
        self.rows.push(row);
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[BitPoly] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitPoly {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].coeff(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(j < self.ncols, "column {j} out of range");
        self.rows[i].set(j, value);
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitPoly::is_zero)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zero(self.ncols, self.nrows());
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); self.ncols];
        for (i, row) in self.rows.iter().enumerate() {
            for j in row.exponents() {
                cols[j].push(i);
            }
        }
        for (j, col) in cols.into_iter().enumerate() {
            out.rows[j] = BitPoly::from_exponents(col);
        }
        out
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix, LinalgError> {
        if self.ncols != other.nrows() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.ncols,
                got: other.nrows(),
            });
        }
        let rows = self.rows.iter().map(|r| other.combine_rows(r)).collect();
        Ok(BitMatrix {
            rows,
            ncols: other.ncols,
        })
    }

    /// Row vector times matrix: XOR of the rows selected by `selector`.
    pub fn combine_rows(&self, selector: &BitPoly) -> BitPoly {
        let mut acc = BitPoly::zero();
        for i in selector.exponents() {
            acc += &self.rows[i];
        }
        acc
    }

    /// Matrix times column vector.
    pub fn apply(&self, v: &BitPoly) -> BitPoly {
        BitPoly::from_exponents(
            self.rows
                .iter()
                .enumerate()
                .filter(|(_, row)| parity_of_and(row, v))
                .map(|(i, _)| i),
        )
    }

    /// Reduced row-echelon form, choosing at each step the lowest column
    /// that still has a pivot candidate.
    pub fn echelonize(&self) -> Echelon {
        let n = self.nrows();
        let mut rows = self.rows.clone();
        let mut transform: Vec<BitPoly> = (0..n).map(BitPoly::monomial).collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..self.ncols {
            if rank == n {
                break;
            }
            let Some(found) = (rank..n).find(|&i| rows[i].coeff(col)) else {
                continue;
            };
            rows.swap(rank, found);
            transform.swap(rank, found);
            let (pivot_row, pivot_tr) = (rows[rank].clone(), transform[rank].clone());
            for i in 0..n {
                if i != rank && rows[i].coeff(col) {
                    rows[i] += &pivot_row;
                    transform[i] += &pivot_tr;
                }
            }
            pivots.push(col);
            rank += 1;
        }
        Echelon {
            echelon: BitMatrix {
                rows,
                ncols: self.ncols,
            },
            rank,
            transform: BitMatrix {
                rows: transform,
                ncols: n,
            },
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.echelonize().rank
    }

    /// Basis of `{v : M v = 0}`. One vector per free column `f`; its highest
    /// set bit is `f`, and it has no other free-column bits.
    pub fn kernel_basis(&self) -> Vec<BitPoly> {
        let ech = self.echelonize();
        let mut is_pivot = vec![false; self.ncols];
        for &p in &ech.pivots {
            is_pivot[p] = true;
        }
        (0..self.ncols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = BitPoly::monomial(f);
                for (i, &p) in ech.pivots.iter().enumerate() {
                    if ech.echelon.rows[i].coeff(f) {
                        v.flip(p);
                    }
                }
                v
            })
            .collect()
    }

    /// Finds `x` with `x * M = v`, i.e. a set of rows whose XOR is `v`.
    /// `Ok(None)` means no such combination exists.
    pub fn solve(&self, v: &BitPoly) -> Result<Option<BitPoly>, LinalgError> {
        check_width(v, self.ncols)?;
        let ech = self.echelonize();
        let mut residual = v.clone();
        let mut x = BitPoly::zero();
        for (i, &p) in ech.pivots.iter().enumerate() {
            if residual.coeff(p) {
                residual += &ech.echelon.rows[i];
                x += &ech.transform.rows[i];
            }
        }
        Ok(residual.is_zero().then_some(x))
    }
}

fn check_width(row: &BitPoly, ncols: usize) -> Result<(), LinalgError> {
    match row.deg() {
        Some(bit) if bit >= ncols => Err(LinalgError::RowTooWide { bit, ncols }),
        _ => Ok(()),
    }
}

fn parity_of_and(a: &BitPoly, b: &BitPoly) -> bool {
    a.words()
        .iter()
        .zip(b.words())
        .map(|(x, y)| (x & y).count_ones())
        .sum::<u32>()
        % 2
        == 1
}

/// Result of feeding a row to an [`IncrementalEchelon`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Insertion {
    /// The row was independent; its reduced form has this leading bit.
    Independent { lead: usize },
    /// The row is the XOR of the earlier inputs selected by `combination`
    /// (bit `i` = input number `i`).
    Dependent { combination: BitPoly },
}

/// Result of reducing a vector against an [`IncrementalEchelon`].
#[derive(Clone, Debug)]
pub struct Reduction {
    /// Zero iff the vector lies in the span.
    pub residual: BitPoly,
    /// Inputs used; `vector = residual + XOR(inputs in combination)`.
    pub combination: BitPoly,
}

/// Echelon structure fed one row at a time, keyed by leading (highest) bit.
///
/// Stored rows have pairwise distinct leading bits. Every stored row
/// remembers which original inputs it is the XOR of, so dependencies are
/// reported in terms of the inputs.
#[derive(Clone, Debug, Default)]
pub struct IncrementalEchelon {
    slot_of_lead: Vec<Option<usize>>,
    rows: Vec<BitPoly>,
    combos: Vec<BitPoly>,
    inputs: usize,
}

impl IncrementalEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Number of rows fed so far, dependent ones included.
    pub fn inputs(&self) -> usize {
        self.inputs
    }

    /// Leading bits of the stored rows, in insertion order.
    pub fn leads(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.deg().unwrap()).collect()
    }

    pub fn reduce(&self, v: &BitPoly) -> Reduction {
        let mut residual = v.clone();
        let mut combination = BitPoly::zero();
        while let Some(lead) = residual.deg() {
            match self.slot_of_lead.get(lead).copied().flatten() {
                Some(slot) => {
                    residual += &self.rows[slot];
                    combination += &self.combos[slot];
                }
                None => break,
            }
        }
        Reduction {
            residual,
            combination,
        }
    }

    pub fn contains(&self, v: &BitPoly) -> bool {
        self.reduce(v).residual.is_zero()
    }

    pub fn insert(&mut self, v: BitPoly) -> Insertion {
        let id = self.inputs;
        self.inputs += 1;
        let Reduction {
            residual,
            mut combination,
        } = self.reduce(&v);
        combination.flip(id);
        match residual.deg() {
            None => {
                combination.flip(id);
                Insertion::Dependent { combination }
            }
            Some(lead) => {
                if lead >= self.slot_of_lead.len() {
                    self.slot_of_lead.resize(lead + 1, None);
                }
                self.slot_of_lead[lead] = Some(self.rows.len());
                self.rows.push(residual);
                self.combos.push(combination);
                Insertion::Independent { lead }
            }
        }
    }
}
