//! Packed AVX-512 double-precision gemm.
//!
//! Three-level blocking: a `KC`-deep slab of `op(b)` is packed into `NR`-wide
//! column panels, an `MC x KC` block of `op(a)` is packed into `MR`-row panels
//! that stay in L2, and each B panel stays in L1 while every A panel of the
//! block sweeps past it. The micro-kernel keeps an `MR x NR` tile of `c` in 24
//! zmm registers. Edge tiles use masked loads/stores on columns and a row
//! count on rows; padded packing lanes are zero.

use std::arch::x86_64::*;

use super::gemm::Layout;

const MR: usize = 8;
const NV: usize = 3;
const NR: usize = 8 * NV;
const KC: usize = 128;
const MC: usize = 240;
const B_RESIDENT_BYTES: usize = 1 << 20;

/// Element `(i, p)` of the `rows x cols` operand `op(x)`.
#[inline(always)]
fn at(x: &[f64], layout: Layout, rows: usize, cols: usize, i: usize, p: usize) -> f64 {
    match layout {
        Layout::Normal => x[i * cols + p],
        Layout::Transposed => x[p * rows + i],
    }
}

/// Packs rows `i0..i0+MR` (zero-padded past `m`) of `op(a)` restricted to
/// depth `p0..p0+kc`, laid out `p`-major with `MR` contiguous rows.
#[allow(clippy::too_many_arguments)]
fn pack_a(
    a: &[f64],
    layout: Layout,
    m: usize,
    k: usize,
    i0: usize,
    p0: usize,
    kc: usize,
    out: &mut [f64],
) {
    let rows = MR.min(m - i0);
    match layout {
        Layout::Normal if rows == MR => {
            let src: [&[f64]; MR] =
                std::array::from_fn(|r| &a[(i0 + r) * k + p0..(i0 + r) * k + p0 + kc]);
            for (p, dst) in out[..kc * MR].chunks_exact_mut(MR).enumerate() {
                for (d, row) in dst.iter_mut().zip(&src) {
                    *d = row[p];
                }
            }
        }
        Layout::Normal => {
            for p in 0..kc {
                for r in 0..MR {
                    out[p * MR + r] = if r < rows { a[(i0 + r) * k + p0 + p] } else { 0.0 };
                }
            }
        }
        Layout::Transposed => {
            for p in 0..kc {
                let dst = &mut out[p * MR..(p + 1) * MR];
                let src = &a[(p0 + p) * m + i0..(p0 + p) * m + i0 + rows];
                dst[..rows].copy_from_slice(src);
                dst[rows..].fill(0.0);
            }
        }
    }
}

/// Packs depth `p0..p0+kc` of `op(b)` into `ceil(n / NR)` panels, each
/// `p`-major with `NR` contiguous columns.
fn pack_b(b: &[f64], layout: Layout, k: usize, n: usize, p0: usize, kc: usize, out: &mut [f64]) {
    let panels = n.div_ceil(NR);
    for jp in 0..panels {
        let j0 = jp * NR;
        let cols = NR.min(n - j0);
        let panel = &mut out[jp * NR * kc..(jp + 1) * NR * kc];
        match layout {
            Layout::Normal => {
                for p in 0..kc {
                    let dst = &mut panel[p * NR..(p + 1) * NR];
                    let src = &b[(p0 + p) * n + j0..(p0 + p) * n + j0 + cols];
                    dst[..cols].copy_from_slice(src);
                    dst[cols..].fill(0.0);
                }
            }
            Layout::Transposed => {
                for p in 0..kc {
                    for c in 0..NR {
                        panel[p * NR + c] = if c < cols {
                            at(b, layout, k, n, p0 + p, j0 + c)
                        } else {
                            0.0
                        };
                    }
                }
            }
        }
    }
}

/// What the first depth slab does with the existing contents of `c`.
#[derive(Clone, Copy)]
pub(crate) enum Start<'a> {
    /// `c += product`.
    Accumulate,
    /// `c = product`; prior contents are never read.
    Overwrite,
    /// `c = product + bias`, with `bias` (length `n`) added to every row.
    RowBias(&'a [f64]),
}

/// Tile epilogue for one kernel call.
#[derive(Clone, Copy)]
enum Epilogue {
    Accumulate,
    Overwrite,
    /// Pointer to the bias entries of the tile's first column.
    RowBias(*const f64),
}

/// `c[0..rows, 0..cols] (op)= alpha * A_panel * B_panel` over depth `kc`,
/// where the epilogue decides how `c`'s prior contents enter.
///
/// # Safety
/// Requires AVX-512F. `a` holds `kc * MR` and `b` holds `kc * NR` values;
/// `c` is valid for `rows` rows of stride `ldc` with `cols` writable columns;
/// a bias pointer is valid for `cols` reads.
#[target_feature(enable = "avx512f")]
#[allow(clippy::too_many_arguments)]
unsafe fn kernel(
    kc: usize,
    alpha: f64,
    a: *const f64,
    b: *const f64,
    c: *mut f64,
    ldc: usize,
    rows: usize,
    cols: usize,
    epilogue: Epilogue,
) {
    let mut acc = [[_mm512_setzero_pd(); NV]; MR];
    let mut ap = a;
    let mut bp = b;
    for _ in 0..kc {
        let mut bv = [_mm512_setzero_pd(); NV];
        for (v, reg) in bv.iter_mut().enumerate() {
            *reg = _mm512_loadu_pd(bp.add(8 * v));
        }
        for (r, row) in acc.iter_mut().enumerate() {
            let av = _mm512_set1_pd(*ap.add(r));
            for v in 0..NV {
                row[v] = _mm512_fmadd_pd(av, bv[v], row[v]);
            }
        }
        ap = ap.add(MR);
        bp = bp.add(NR);
    }
    let scale = _mm512_set1_pd(alpha);
    let mut masks: [__mmask8; NV] = [0; NV];
    for (v, m) in masks.iter_mut().enumerate() {
        let n = cols.saturating_sub(8 * v).min(8);
        *m = ((1u16 << n) - 1) as __mmask8;
    }
    let mut bias = [_mm512_setzero_pd(); NV];
    if let Epilogue::RowBias(src) = epilogue {
        for (v, reg) in bias.iter_mut().enumerate() {
            *reg = _mm512_maskz_loadu_pd(masks[v], src.add(v * 8));
        }
    }
    for (r, row) in acc.iter().enumerate().take(rows) {
        let dst = c.add(r * ldc);
        for (v, (&reg, &mask)) in row.iter().zip(&masks).enumerate() {
            if mask == 0 {
                continue;
            }
            let p = dst.add(v * 8);
            let value = match epilogue {
                Epilogue::Accumulate => _mm512_fmadd_pd(reg, scale, _mm512_maskz_loadu_pd(mask, p)),
                Epilogue::Overwrite => _mm512_mul_pd(reg, scale),
                Epilogue::RowBias(_) => _mm512_fmadd_pd(reg, scale, bias[v]),
            };
            _mm512_mask_storeu_pd(p, mask, value);
        }
    }
}

pub(crate) fn available() -> bool {
    is_x86_feature_detected!("avx512f")
}

/// `c <- alpha * op(a) * op(b) + start`, where `start` is `c`, zero or a
/// broadcast bias row. Requires `k > 0`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm_packed(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    a_layout: Layout,
    b: &[f64],
    b_layout: Layout,
    start: Start<'_>,
    c: &mut [f64],
) {
    assert!(available());
    assert!(k > 0);
    if let Start::RowBias(bias) = start {
        assert_eq!(bias.len(), n);
    }
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    assert_eq!(c.len(), m * n);
    let panels = n.div_ceil(NR);
    let slabs = k.div_ceil(KC);
    // Packed op(b) for every depth slab when it fits comfortably in L2, so
    // row blocks can be the outer loop and each MC x n block of c stays in
    // L2 across slabs. Otherwise slabs are the outer loop.
    let whole_b = panels * NR * k * 8 <= B_RESIDENT_BYTES;
    let slab_len = |kc: usize| panels * NR * kc;
    let mut bpack = vec![0.0; if whole_b { panels * NR * k } else { slab_len(KC.min(k)) }];
    let mut apack = vec![0.0; MC * KC.min(k)];
    if whole_b {
        for s in 0..slabs {
            let p0 = s * KC;
            let kc = KC.min(k - p0);
            pack_b(b, b_layout, k, n, p0, kc, &mut bpack[panels * NR * p0..][..slab_len(kc)]);
        }
    }
    let blocks = |p0: usize, kc: usize, bslab: &[f64], apack: &mut [f64], ic: usize, c: &mut [f64]| {
        let first = p0 == 0;
        let mc = MC.min(m - ic);
        let row_panels = mc.div_ceil(MR);
        for ip in 0..row_panels {
            let dst = &mut apack[ip * MR * kc..(ip + 1) * MR * kc];
            pack_a(a, a_layout, m, k, ic + ip * MR, p0, kc, dst);
        }
        for jp in 0..panels {
            let j0 = jp * NR;
            let cols = NR.min(n - j0);
            let epilogue = match start {
                Start::Accumulate => Epilogue::Accumulate,
                _ if !first => Epilogue::Accumulate,
                Start::Overwrite => Epilogue::Overwrite,
                Start::RowBias(bias) => Epilogue::RowBias(bias[j0..].as_ptr()),
            };
            for ip in 0..row_panels {
                let i0 = ic + ip * MR;
                let rows = MR.min(m - i0);
                // SAFETY: AVX-512F was checked above. The packed buffers hold
                // kc*MR and kc*NR values for these panels, the written tile
                // (rows x cols at (i0, j0), stride n) lies inside c, and a
                // bias slice of length n has cols entries from j0.
                unsafe {
                    kernel(
                        kc,
                        alpha,
                        apack.as_ptr().add(ip * MR * kc),
                        bslab.as_ptr().add(jp * NR * kc),
                        c.as_mut_ptr().add(i0 * n + j0),
                        n,
                        rows,
                        cols,
                        epilogue,
                    );
                }
            }
        }
    };
    if whole_b {
        for ic in (0..m).step_by(MC) {
            for s in 0..slabs {
                let p0 = s * KC;
                let kc = KC.min(k - p0);
                let bslab = &bpack[panels * NR * p0..][..slab_len(kc)];
                blocks(p0, kc, bslab, &mut apack, ic, c);
            }
        }
    } else {
        for s in 0..slabs {
            let p0 = s * KC;
            let kc = KC.min(k - p0);
            pack_b(b, b_layout, k, n, p0, kc, &mut bpack);
            for ic in (0..m).step_by(MC) {
                blocks(p0, kc, &bpack[..slab_len(kc)], &mut apack, ic, c);
            }
        }
    }
}
