//! Partitions, the sets P(l,k) of partitions fitting in an l×k box, and the
//! lattice-path bijection between such partitions and index sets.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("parts {0:?} are not weakly decreasing positive integers")]
    NotPartition(Vec<usize>),
    #[error("partition {partition} does not fit in a {rows}x{cols} box")]
    NotInBox {
        partition: Partition,
        rows: usize,
        cols: usize,
    },
    #[error("index set {elements:?} is invalid for bound {bound} and size {size}")]
    BadIndexSet {
        elements: Vec<usize>,
        bound: usize,
        size: usize,
    },
}

/// A weakly decreasing list of positive parts. Trailing zeros are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Builds a partition, stripping trailing zeros.
    pub fn new(mut parts: Vec<usize>) -> Result<Self, PartitionError> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) || parts.contains(&0) {
            return Err(PartitionError::NotPartition(parts));
        }
        Ok(Partition(parts))
    }

    pub fn single_row(k: usize) -> Self {
        if k == 0 {
            Self::empty()
        } else {
            Partition(vec![k])
        }
    }

    pub fn single_column(k: usize) -> Self {
        Partition(vec![1; k])
    }

    /// The full l×k rectangle.
    pub fn box_shape(rows: usize, cols: usize) -> Self {
        if cols == 0 {
            Self::empty()
        } else {
            Partition(vec![cols; rows])
        }
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// λ_i with 1-based `i`; zero beyond the length.
    pub fn part(&self, i: usize) -> usize {
        if i == 0 {
            return 0;
        }
        self.0.get(i - 1).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn first_part(&self) -> usize {
        self.0.first().copied().unwrap_or(0)
    }

    pub fn fits_in_box(&self, rows: usize, cols: usize) -> bool {
        self.len() <= rows && self.first_part() <= cols
    }

    pub fn transpose(&self) -> Partition {
        let width = self.first_part();
        let cols = (1..=width)
            .map(|j| self.0.iter().take_while(|&&p| p >= j).count())
            .collect();
        Partition(cols)
    }

    /// Containment of Young diagrams.
    pub fn contains(&self, other: &Partition) -> bool {
        other.len() <= self.len() && other.0.iter().zip(&self.0).all(|(a, b)| a <= b)
    }

    /// Complement inside box(l,k), rotated by 180 degrees.
    pub fn complement(&self, rows: usize, cols: usize) -> Result<Partition, PartitionError> {
        self.check_box(rows, cols)?;
        let parts = (1..=rows).map(|i| cols - self.part(rows + 1 - i)).collect();
        Ok(Partition::new(parts).expect("complement of a box partition is a partition"))
    }

    /// Transpose of the complement; lands in P(cols, rows).
    pub fn hat(&self, rows: usize, cols: usize) -> Result<Partition, PartitionError> {
        Ok(self.complement(rows, cols)?.transpose())
    }

    fn check_box(&self, rows: usize, cols: usize) -> Result<(), PartitionError> {
        if self.fits_in_box(rows, cols) {
            Ok(())
        } else {
            Err(PartitionError::NotInBox {
                partition: self.clone(),
                rows,
                cols,
            })
        }
    }
}

impl Ord for Partition {
    /// Weight first, then lexicographic on parts.
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight().cmp(&other.weight()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = PartitionError;
    fn try_from(parts: Vec<usize>) -> Result<Self, Self::Error> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All partitions of `weight` with at most `max_len` parts, each at most `max_part`,
/// in lexicographic order of parts.
pub fn partitions_of(weight: usize, max_len: usize, max_part: usize) -> Vec<Partition> {
    fn rec(remaining: usize, max_len: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition(prefix.clone()));
            return;
        }
        if max_len == 0 {
            return;
        }
        // Smallest parts first so the output is lexicographically increasing.
        let lo = remaining.div_ceil(max_len);
        for p in lo..=max_part.min(remaining) {
            prefix.push(p);
            rec(remaining - p, max_len - 1, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(weight, max_len, max_part, &mut Vec::new(), &mut out);
    out
}

/// P(l,k) ordered by weight, then lexicographically.
pub fn partitions_in_box(rows: usize, cols: usize) -> Vec<Partition> {
    (0..=rows * cols).flat_map(|w| partitions_of(w, rows, cols)).collect()
}

/// A strictly increasing set of indices in 1..=bound.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexSet {
    elements: Vec<usize>,
    bound: usize,
}

impl IndexSet {
    pub fn new(elements: Vec<usize>, bound: usize) -> Result<Self, PartitionError> {
        let increasing = elements.windows(2).all(|w| w[0] < w[1]);
        let in_range = elements.iter().all(|&j| (1..=bound).contains(&j));
        if !increasing || !in_range {
            return Err(PartitionError::BadIndexSet {
                size: elements.len(),
                elements,
                bound,
            });
        }
        Ok(IndexSet { elements, bound })
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// The q-weight 2·Σ j carried by the square-free monomial on these indices.
    pub fn q_weight(&self) -> i64 {
        2 * self.elements.iter().sum::<usize>() as i64
    }

    /// Reads J as the positions of the L-steps in a word of D and L steps of
    /// length r+s. Row i of the partition (from the top) is the number of L
    /// steps following the i-th D step.
    pub fn to_partition(&self, r: usize, s: usize) -> Result<Partition, PartitionError> {
        if self.elements.len() != s || self.bound != r + s {
            return Err(PartitionError::BadIndexSet {
                elements: self.elements.clone(),
                bound: self.bound,
                size: s,
            });
        }
        let mut is_l = vec![false; r + s + 1];
        for &j in &self.elements {
            is_l[j] = true;
        }
        let mut parts = Vec::with_capacity(r);
        let mut ls_after = s;
        for pos in 1..=r + s {
            if is_l[pos] {
                ls_after -= 1;
            } else {
                parts.push(ls_after);
            }
        }
        Ok(Partition::new(parts).expect("row lengths along a lattice path decrease"))
    }

    /// Inverse of [`IndexSet::to_partition`].
    pub fn from_partition(lambda: &Partition, r: usize, s: usize) -> Result<Self, PartitionError> {
        lambda.check_box(r, s)?;
        let mut elements = Vec::with_capacity(s);
        let mut pos = 0;
        let mut ls_remaining = s;
        for i in 1..=r {
            let row = lambda.part(i);
            while ls_remaining > row {
                pos += 1;
                elements.push(pos);
                ls_remaining -= 1;
            }
            pos += 1; // the D step of row i
        }
        while ls_remaining > 0 {
            pos += 1;
            elements.push(pos);
            ls_remaining -= 1;
        }
        IndexSet::new(elements, r + s)
    }
}
