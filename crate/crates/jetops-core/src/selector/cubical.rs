//! Sublevel cubical filtration of a fiber function on a box, with the deep
//! sublevel set coned to an apex so that persistence computes the relative
//! homology `H_*(f^λ, f^{≤ thr})`.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::Rect;

use super::persistence::FilteredComplex;
use super::FiberFunction;

pub struct CubicalOutput {
    pub complex: FilteredComplex,
    /// Barycenter of the creating cell, in fiber coordinates; `None` for
    /// cone cells and the apex.
    pub barycenters: Vec<Option<Vec<f64>>>,
    /// Number of cells swept into the cone; kept for diagnostics.
    #[allow(dead_code)]
    pub coned_cells: usize,
}

/// Mixed-radix decode of `id` with per-axis radix `radix`.
fn decode(mut id: usize, radix: &[usize], out: &mut [usize]) {
    for (o, &r) in out.iter_mut().zip(radix) {
        *o = id % r;
        id /= r;
    }
}

fn encode(digits: &[usize], radix: &[usize]) -> usize {
    let mut id = 0usize;
    let mut mul = 1usize;
    for (&d, &r) in digits.iter().zip(radix) {
        id += d * mul;
        mul *= r;
    }
    id
}

/// Build the coned filtration.  Cell values follow the lower-star (max of
/// vertices) convention; every cell with value ≤ `cone_threshold` is coned.
pub fn build(
    f: &dyn FiberFunction,
    bx: &Rect,
    cells_per_axis: usize,
    cone_threshold: f64,
) -> CubicalOutput {
    let k = bx.dim();
    let m = cells_per_axis + 1; // vertices per axis
    let vrad = vec![m; k];
    let coord = |axis: usize, pos: usize| -> f64 {
        bx.lo[axis] + (bx.hi[axis] - bx.lo[axis]) * pos as f64 / cells_per_axis as f64
    };
    let nverts = m.pow(k as u32);
    let mut vvals = vec![0.0f64; nverts];
    let mut digits = vec![0usize; k];
    for (vid, val) in vvals.iter_mut().enumerate() {
        decode(vid, &vrad, &mut digits);
        let w: Vec<f64> = (0..k).map(|a| coord(a, digits[a])).collect();
        *val = f.eval(&w);
    }

    let srad = vec![2 * m - 1; k]; // cell slots per axis
    let ncells = srad.iter().product::<usize>();
    let mut cell_value = vec![0.0f64; ncells];
    let mut cell_dim = vec![0usize; ncells];
    let mut slots = vec![0usize; k];
    for cid in 0..ncells {
        decode(cid, &srad, &mut slots);
        let dim = slots.iter().filter(|&&s| s % 2 == 1).count();
        // max of f over the cell's corners
        let mut best = f64::NEG_INFINITY;
        let corners = 1usize << dim;
        for c in 0..corners {
            let mut vd = vec![0usize; k];
            let mut bit = 0;
            for a in 0..k {
                if slots[a] % 2 == 0 {
                    vd[a] = slots[a] / 2;
                } else {
                    vd[a] = slots[a] / 2 + ((c >> bit) & 1);
                    bit += 1;
                }
            }
            best = best.max(vvals[encode(&vd, &vrad)]);
        }
        cell_value[cid] = best;
        cell_dim[cid] = dim;
    }

    // cone membership and ids
    let mut cone_of = vec![usize::MAX; ncells];
    let mut ncone = 0usize;
    for cid in 0..ncells {
        if cell_value[cid] <= cone_threshold {
            cone_of[cid] = ncone;
            ncone += 1;
        }
    }
    let min_value = cell_value.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let apex_value = min_value - 1.0;

    // entry list: 0 = apex, 1..=ncells = base, rest = cone
    let total = 1 + ncells + ncone;
    let entry_value = |e: usize| -> f64 {
        if e == 0 {
            apex_value
        } else if e <= ncells {
            cell_value[e - 1]
        } else {
            let cone_idx = e - 1 - ncells;
            // invert cone_of lazily below; placeholder replaced in sort keys
            let _ = cone_idx;
            0.0
        }
    };
    let mut cone_base = vec![0usize; ncone];
    for cid in 0..ncells {
        if cone_of[cid] != usize::MAX {
            cone_base[cone_of[cid]] = cid;
        }
    }
    let value_of = |e: usize| -> f64 {
        if e > ncells {
            cell_value[cone_base[e - 1 - ncells]]
        } else {
            entry_value(e)
        }
    };
    let dim_of = |e: usize| -> usize {
        if e == 0 {
            0
        } else if e <= ncells {
            cell_dim[e - 1]
        } else {
            cell_dim[cone_base[e - 1 - ncells]] + 1
        }
    };
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| {
        (value_of(a), dim_of(a), a)
            .partial_cmp(&(value_of(b), dim_of(b), b))
            .unwrap()
    });
    let mut rank = vec![0usize; total];
    for (r, &e) in order.iter().enumerate() {
        rank[e] = r;
    }

    // boundaries
    let faces = |cid: usize| -> Vec<(usize, i8)> {
        let mut sl = vec![0usize; k];
        decode(cid, &srad, &mut sl);
        let mut out = Vec::new();
        let mut sign = 1i8;
        for a in 0..k {
            if sl[a] % 2 == 1 {
                let mut lo = sl.clone();
                lo[a] -= 1;
                let mut hi = sl.clone();
                hi[a] += 1;
                out.push((encode(&hi, &srad), sign));
                out.push((encode(&lo, &srad), -sign));
                sign = -sign;
            }
        }
        out
    };

    let mut columns: Vec<Vec<(u32, i8)>> = vec![Vec::new(); total];
    let mut barycenters: Vec<Option<Vec<f64>>> = vec![None; total];
    for cid in 0..ncells {
        let e = cid + 1;
        columns[rank[e]] = faces(cid)
            .into_iter()
            .map(|(fc, s)| (rank[fc + 1] as u32, s))
            .collect();
        let mut sl = vec![0usize; k];
        decode(cid, &srad, &mut sl);
        let bc: Vec<f64> = (0..k)
            .map(|a| {
                if sl[a] % 2 == 0 {
                    coord(a, sl[a] / 2)
                } else {
                    0.5 * (coord(a, sl[a] / 2) + coord(a, sl[a] / 2 + 1))
                }
            })
            .collect();
        barycenters[rank[e]] = Some(bc);
    }
    for (ci, &cid) in cone_base.iter().enumerate() {
        let e = 1 + ncells + ci;
        let mut col: Vec<(u32, i8)> = vec![(rank[cid + 1] as u32, 1)];
        if cell_dim[cid] == 0 {
            col.push((rank[0] as u32, -1)); // apex
        } else {
            for (fc, s) in faces(cid) {
                // every face of a coned cell is coned
                let fci = cone_of[fc];
                debug_assert_ne!(fci, usize::MAX, "cone subcomplex not closed");
                col.push(((rank[1 + ncells + fci]) as u32, -s));
            }
        }
        columns[rank[e]] = col;
    }

    let values: Vec<f64> = order.iter().map(|&e| value_of(e)).collect();
    let dims: Vec<usize> = order.iter().map(|&e| dim_of(e)).collect();
    CubicalOutput {
        complex: FilteredComplex { values, dims, columns },
        barycenters,
        coned_cells: ncone,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selector::persistence::{reduce, Field};
    use crate::selector::ClosureFiber;

    #[test]
    fn boundary_of_boundary_vanishes_over_q() {
        let f = ClosureFiber::new(2, |w: &[f64]| w[0] * w[0] - w[1] * w[1]);
        let out = build(&f, &Rect::centered(2, 2.0), 6, -3.0);
        // compose the boundary twice symbolically over the rationals by
        // checking each 2-chain's boundary-of-boundary cancels
        for (j, col) in out.complex.columns.iter().enumerate() {
            if out.complex.dims[j] != 2 {
                continue;
            }
            let mut acc: alloc::collections::BTreeMap<u32, i32> = Default::default();
            for &(face, s) in col {
                for &(ff, s2) in &out.complex.columns[face as usize] {
                    *acc.entry(ff).or_insert(0) += s as i32 * s2 as i32;
                }
            }
            assert!(acc.values().all(|&v| v == 0), "dd != 0 at column {j}: {acc:?}");
        }
    }

    #[test]
    fn saddle_has_one_essential_bar_in_degree_one() {
        let f = ClosureFiber::new(2, |w: &[f64]| w[0] * w[0] - w[1] * w[1]);
        let out = build(&f, &Rect::centered(2, 2.0), 20, -2.0);
        for field in [Field::Z2, Field::Q] {
            let d = reduce(&out.complex, field);
            let ess: alloc::vec::Vec<_> = d.essential().filter(|b| b.birth > -3.0).collect();
            assert_eq!(ess.len(), 1, "{field:?}: {ess:?}");
            assert_eq!(ess[0].degree, 1);
            assert!(ess[0].birth.abs() < 0.05, "saddle value ~0, got {}", ess[0].birth);
        }
    }
}
