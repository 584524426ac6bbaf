//! Persistence of a filtered chain complex by column reduction, over `ℤ/2`
//! (fast, sorted index vectors) or `ℚ` (exact big-rational arithmetic).

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Coefficient field of a homology computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Z2,
    Q,
}

/// One persistence bar; `death = None` marks an essential class.
#[derive(Debug, Clone)]
pub struct Bar {
    pub degree: usize,
    pub birth: f64,
    pub death: Option<f64>,
    /// Filtration-order index of the cell that created the class.
    pub creator: usize,
}

#[derive(Debug, Clone)]
pub struct PersistenceDiagram {
    pub bars: Vec<Bar>,
    pub field: Field,
}

impl PersistenceDiagram {
    pub fn essential(&self) -> impl Iterator<Item = &Bar> {
        self.bars.iter().filter(|b| b.death.is_none())
    }
}

/// A filtered complex ready for reduction: cells in filtration order, each
/// with its dimension, filtration value, and boundary written in
/// filtration-order indices with orientation signs.
pub struct FilteredComplex {
    pub values: Vec<f64>,
    pub dims: Vec<usize>,
    pub columns: Vec<Vec<(u32, i8)>>,
}

/// Standard persistence pairing.  Bars of zero length are dropped; every
/// unpaired creator yields an essential bar.
pub fn reduce(complex: &FilteredComplex, field: Field) -> PersistenceDiagram {
    let pairs = match field {
        Field::Z2 => reduce_z2(&complex.columns, &complex.dims),
        Field::Q => reduce_q(&complex.columns, &complex.dims),
    };
    let n = complex.values.len();
    let mut killed = alloc::vec![false; n];
    let mut bars = Vec::new();
    for &(birth_i, death_i) in &pairs {
        killed[birth_i] = true;
        killed[death_i] = true;
        let (b, d) = (complex.values[birth_i], complex.values[death_i]);
        if d > b {
            bars.push(Bar { degree: complex.dims[birth_i], birth: b, death: Some(d), creator: birth_i });
        }
    }
    for i in 0..n {
        // unpaired cells have zero reduced columns and were never killed:
        // their classes are essential
        if !killed[i] {
            bars.push(Bar { degree: complex.dims[i], birth: complex.values[i], death: None, creator: i });
        }
    }
    bars.sort_by(|a, b| (a.degree, a.birth).partial_cmp(&(b.degree, b.birth)).unwrap());
    PersistenceDiagram { bars, field }
}

/// `ℤ/2` reduction with sorted index vectors; returns `(birth, death)`
/// index pairs.  Columns are processed by decreasing dimension so that the
/// birth column of every recorded pair can be cleared instead of reduced
/// (its reduction is known to reach zero); pivots live one dimension below,
/// so the cross-dimension processing order does not affect the pairing.
fn reduce_z2(columns: &[Vec<(u32, i8)>], dims: &[usize]) -> Vec<(usize, usize)> {
    let n = columns.len();
    let max_dim = dims.iter().copied().max().unwrap_or(0);
    let mut reduced: Vec<Vec<u32>> = alloc::vec![Vec::new(); n];
    let mut pivot_owner: Vec<u32> = alloc::vec![u32::MAX; n];
    let mut cleared = alloc::vec![false; n];
    let mut pairs = Vec::new();
    for d in (0..=max_dim).rev() {
        for j in 0..n {
            if dims[j] != d || cleared[j] {
                continue;
            }
            let mut col: Vec<u32> = columns[j].iter().map(|&(i, _)| i).collect();
            col.sort_unstable();
            col.dedup(); // characteristic 2: duplicated entries cancel
            loop {
                let Some(&low) = col.last() else { break };
                let owner = pivot_owner[low as usize];
                if owner == u32::MAX {
                    pivot_owner[low as usize] = j as u32;
                    pairs.push((low as usize, j));
                    cleared[low as usize] = true;
                    break;
                }
                col = xor_sorted(&col, &reduced[owner as usize]);
            }
            reduced[j] = col;
        }
    }
    pairs
}

fn xor_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Exact `ℚ` reduction; columns are sorted `(index, coefficient)` vectors.
/// Uses the same clearing strategy as the `ℤ/2` path.
fn reduce_q(columns: &[Vec<(u32, i8)>], dims: &[usize]) -> Vec<(usize, usize)> {
    type QCol = Vec<(u32, BigRational)>;
    let n = columns.len();
    let max_dim = dims.iter().copied().max().unwrap_or(0);
    let mut reduced: Vec<QCol> = alloc::vec![Vec::new(); n];
    let mut pivot_owner: Vec<u32> = alloc::vec![u32::MAX; n];
    let mut cleared = alloc::vec![false; n];
    let mut pairs = Vec::new();
    for d in (0..=max_dim).rev() {
    for j in 0..n {
        if dims[j] != d || cleared[j] {
            continue;
        }
        let mut col: QCol = {
            let mut c: Vec<(u32, i8)> = columns[j].clone();
            c.sort_unstable_by_key(|&(i, _)| i);
            let mut out: QCol = Vec::with_capacity(c.len());
            for (i, s) in c {
                let r = BigRational::from_integer(BigInt::from(s));
                match out.last_mut() {
                    Some(last) if last.0 == i => last.1 += r,
                    _ => out.push((i, r)),
                }
            }
            out.retain(|(_, r)| !r.is_zero());
            out
        };
        loop {
            let Some((low, coeff)) = col.last().cloned() else { break };
            let owner = pivot_owner[low as usize];
            if owner == u32::MAX {
                pivot_owner[low as usize] = j as u32;
                pairs.push((low as usize, j));
                cleared[low as usize] = true;
                break;
            }
            let other = &reduced[owner as usize];
            let other_coeff = &other.last().unwrap().1;
            let factor = -coeff / other_coeff;
            col = axpy(&col, &factor, other);
        }
        reduced[j] = col;
    }
    }
    pairs
}

fn axpy(
    a: &[(u32, BigRational)],
    factor: &BigRational,
    b: &[(u32, BigRational)],
) -> Vec<(u32, BigRational)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            core::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                out.push((b[j].0, factor * &b[j].1));
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                let c = &a[i].1 + factor * &b[j].1;
                if !c.is_zero() {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    out.extend(b[j..].iter().map(|(k, c)| (*k, factor * c)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Filtered circle: two vertices, two edges.
    fn circle() -> FilteredComplex {
        FilteredComplex {
            values: vec![0.0, 0.0, 1.0, 2.0],
            dims: vec![0, 0, 1, 1],
            columns: vec![
                vec![],
                vec![],
                vec![(0, -1), (1, 1)],
                vec![(0, -1), (1, 1)],
            ],
        }
    }

    #[test]
    fn circle_has_one_component_and_one_loop() {
        for field in [Field::Z2, Field::Q] {
            let d = reduce(&circle(), field);
            let essential: Vec<_> = d.essential().collect();
            assert_eq!(essential.len(), 2, "{field:?}: {essential:?}");
            assert!(essential.iter().any(|b| b.degree == 0 && b.birth == 0.0));
            assert!(essential.iter().any(|b| b.degree == 1 && b.birth == 2.0));
            // the merge pair (0,0)-(1.0) is a finite bar
            assert!(d.bars.iter().any(|b| b.degree == 0 && b.death == Some(1.0)));
        }
    }

    #[test]
    fn fields_agree_on_a_coned_circle() {
        // cone the whole circle to an apex z entering first: the end result
        // is a disc, so only the apex component survives; all loops die the
        // moment they are born
        let complex = FilteredComplex {
            values: vec![-1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 2.0, 2.0],
            dims: vec![0, 0, 0, 1, 1, 1, 2, 1, 2],
            columns: vec![
                vec![],                          // z
                vec![],                          // v1
                vec![],                          // v2
                vec![(1, 1), (0, -1)],           // z*v1
                vec![(2, 1), (0, -1)],           // z*v2
                vec![(1, -1), (2, 1)],           // e1
                vec![(5, 1), (3, 1), (4, -1)],   // z*e1
                vec![(1, -1), (2, 1)],           // e2
                vec![(7, 1), (3, 1), (4, -1)],   // z*e2
            ],
        };
        for field in [Field::Z2, Field::Q] {
            let d = reduce(&complex, field);
            let essential: Vec<_> = d.essential().collect();
            assert_eq!(essential.len(), 1, "{field:?}: {essential:?}");
            assert!(essential[0].degree == 0 && essential[0].birth == -1.0);
            assert!(
                !d.bars.iter().any(|b| b.degree == 1),
                "no 1-bar should survive: {:?}",
                d.bars
            );
        }
    }
}
