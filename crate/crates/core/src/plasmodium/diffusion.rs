//! Synchronous 3×3 mean-filter diffusion with damping.

use crate::exec::{for_each_chunk_mut, Exec};

/// Writes one diffusion step of `src` into `dst`.
///
/// Each habitable cell becomes `damping × (sum of its 3×3 block) / 9`, where
/// cells outside the lattice or not habitable contribute zero. Non-habitable
/// cells are set to zero. Every output cell reads only `src`, so the result
/// does not depend on sweep order or on `exec`.
pub fn diffuse_into(
    src: &[f64],
    dst: &mut [f64],
    mask: &[bool],
    width: usize,
    height: usize,
    damping: f64,
    exec: Exec,
) {
    assert_eq!(src.len(), width * height);
    assert_eq!(dst.len(), src.len());
    assert_eq!(mask.len(), src.len());
    for_each_chunk_mut(exec, dst, width, |y, row| {
        diffuse_row(src, mask, width, height, damping, y, row)
    });
}

fn diffuse_row(
    src: &[f64],
    mask: &[bool],
    width: usize,
    height: usize,
    damping: f64,
    y: usize,
    row: &mut [f64],
) {
    let y0 = y.saturating_sub(1);
    let y1 = (y + 1).min(height - 1);
    for (x, out) in row.iter_mut().enumerate() {
        let i = y * width + x;
        if !mask[i] {
            *out = 0.0;
            continue;
        }
        let x0 = x.saturating_sub(1);
        let x1 = (x + 1).min(width - 1);
        let mut sum = 0.0;
        for yy in y0..=y1 {
            let base = yy * width;
            for xx in x0..=x1 {
                let j = base + xx;
                if mask[j] {
                    sum += src[j];
                }
            }
        }
        *out = damping * (sum / 9.0);
    }
}

/// Allocating convenience wrapper around [`diffuse_into`].
pub fn diffuse(
    src: &[f64],
    mask: &[bool],
    width: usize,
    height: usize,
    damping: f64,
    exec: Exec,
) -> Vec<f64> {
    let mut dst = vec![0.0; src.len()];
    diffuse_into(src, &mut dst, mask, width, height, damping, exec);
    dst
}
