/// Storage of a gemm operand relative to the shape the product needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Layout {
    /// Stored row-major with the shape the product uses.
    Normal,
    /// Stored row-major as the transpose of the shape the product uses.
    Transposed,
}

impl Layout {
    /// Row and column strides of an operand that is `rows x cols` inside the product.
    fn strides(self, rows: usize, cols: usize) -> (isize, isize) {
        match self {
            Layout::Normal => (cols as isize, 1),
            Layout::Transposed => (1, rows as isize),
        }
    }
}

/// `c <- alpha * op(a) * op(b) + beta * c`, with `op(a)` of shape `m x k`,
/// `op(b)` of shape `k x n` and `c` row-major `m x n`.
///
/// Uses the packed AVX-512 kernel when the CPU has it and `matrixmultiply`
/// otherwise. Single-threaded; the accumulation order depends only on the
/// shapes and the selected kernel, so repeated calls on identical inputs give
/// bit-identical results.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    a_layout: Layout,
    b: &[f64],
    b_layout: Layout,
    beta: f64,
    c: &mut [f64],
) {
    assert_eq!(a.len(), m * k, "gemm: lhs length");
    assert_eq!(b.len(), k * n, "gemm: rhs length");
    assert_eq!(c.len(), m * n, "gemm: output length");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        for v in c.iter_mut() {
            *v = if beta == 0.0 { 0.0 } else { *v * beta };
        }
        return;
    }
    #[cfg(target_arch = "x86_64")]
    if super::gemm_avx512::available() {
        use super::gemm_avx512::{gemm_packed, Start};
        let start = if beta == 0.0 {
            Start::Overwrite
        } else {
            if beta != 1.0 {
                for v in c.iter_mut() {
                    *v *= beta;
                }
            }
            Start::Accumulate
        };
        gemm_packed(m, k, n, alpha, a, a_layout, b, b_layout, start, c);
        return;
    }
    portable(m, k, n, alpha, a, a_layout, b, b_layout, beta, c);
}

/// `c <- op(a) * op(b) + 1 bias^T`: every row of `c` gets `bias` (length `n`)
/// added. Shapes as in [`gemm`]; prior contents of `c` are ignored.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm_bias(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_layout: Layout,
    b: &[f64],
    b_layout: Layout,
    bias: &[f64],
    c: &mut [f64],
) {
    assert_eq!(bias.len(), n, "gemm: bias length");
    assert_eq!(c.len(), m * n, "gemm: output length");
    #[cfg(target_arch = "x86_64")]
    if k > 0 && super::gemm_avx512::available() {
        use super::gemm_avx512::{gemm_packed, Start};
        assert_eq!(a.len(), m * k, "gemm: lhs length");
        assert_eq!(b.len(), k * n, "gemm: rhs length");
        gemm_packed(m, k, n, 1.0, a, a_layout, b, b_layout, Start::RowBias(bias), c);
        return;
    }
    if n > 0 {
        for row in c.chunks_exact_mut(n) {
            row.copy_from_slice(bias);
        }
    }
    gemm(m, k, n, 1.0, a, a_layout, b, b_layout, 1.0, c);
}

#[allow(clippy::too_many_arguments)]
fn portable(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    a_layout: Layout,
    b: &[f64],
    b_layout: Layout,
    beta: f64,
    c: &mut [f64],
) {
    let (rsa, csa) = a_layout.strides(m, k);
    let (rsb, csb) = b_layout.strides(k, n);
    // SAFETY: the asserts above pin every operand length to the shape implied
    // by the strides, so all reads and writes stay in bounds.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(m: usize, k: usize, n: usize, a: &[f64], ta: bool, b: &[f64], tb: bool) -> Vec<f64> {
        let mut c = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for p in 0..k {
                    let av = if ta { a[p * m + i] } else { a[i * k + p] };
                    let bv = if tb { b[j * k + p] } else { b[p * n + j] };
                    s += av * bv;
                }
                c[i * n + j] = s;
            }
        }
        c
    }

    #[test]
    fn all_layouts_match_naive_product() {
        let (m, k, n) = (7, 5, 3);
        let a: Vec<f64> = (0..m * k).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..k * n).map(|i| (i as f64 * 0.91).cos()).collect();
        for (ta, tb) in [(false, false), (true, false), (false, true), (true, true)] {
            let la = if ta { Layout::Transposed } else { Layout::Normal };
            let lb = if tb { Layout::Transposed } else { Layout::Normal };
            let mut c = vec![0.0; m * n];
            gemm(m, k, n, 1.0, &a, la, &b, lb, 0.0, &mut c);
            let expect = naive(m, k, n, &a, ta, &b, tb);
            for (x, y) in c.iter().zip(&expect) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernels_agree_on_ragged_shapes() {
        for (m, k, n) in [(1, 1, 1), (9, 300, 25), (17, 513, 3), (3, 2, 49), (64, 256, 256)] {
            let a: Vec<f64> = (0..m * k).map(|i| (i as f64 * 0.113).sin()).collect();
            let b: Vec<f64> = (0..k * n).map(|i| (i as f64 * 0.071).cos()).collect();
            for (la, lb) in [
                (Layout::Normal, Layout::Normal),
                (Layout::Transposed, Layout::Normal),
                (Layout::Normal, Layout::Transposed),
                (Layout::Transposed, Layout::Transposed),
            ] {
                let init: Vec<f64> = (0..m * n).map(|i| i as f64 * 0.5).collect();
                let mut fast = init.clone();
                let mut slow = init.clone();
                gemm(m, k, n, 0.75, &a, la, &b, lb, -2.0, &mut fast);
                portable(m, k, n, 0.75, &a, la, &b, lb, -2.0, &mut slow);
                let expect = naive(
                    m,
                    k,
                    n,
                    &a,
                    la == Layout::Transposed,
                    &b,
                    lb == Layout::Transposed,
                );
                for i in 0..m * n {
                    let e = 0.75 * expect[i] - 2.0 * init[i];
                    assert!((fast[i] - e).abs() < 1e-10, "{m}x{k}x{n} {la:?} {lb:?}");
                    assert!((slow[i] - e).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn bias_rows_match_prefilled_accumulate() {
        for (m, k, n) in [(1, 1, 1), (9, 300, 25), (17, 3, 49), (5, 0, 4)] {
            let a: Vec<f64> = (0..m * k).map(|i| (i as f64 * 0.3).sin()).collect();
            let b: Vec<f64> = (0..k * n).map(|i| (i as f64 * 0.2).cos()).collect();
            let bias: Vec<f64> = (0..n).map(|j| j as f64 - 1.5).collect();
            let mut c = vec![f64::NAN; m * n];
            gemm_bias(m, k, n, &a, Layout::Normal, &b, Layout::Transposed, &bias, &mut c);
            let expect = naive(m, k, n, &a, false, &b, true);
            for i in 0..m {
                for j in 0..n {
                    assert!((c[i * n + j] - expect[i * n + j] - bias[j]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn beta_zero_clears_nan() {
        let mut c = [f64::NAN; 4];
        gemm(2, 1, 2, 1.0, &[1.0, 2.0], Layout::Normal, &[3.0, 4.0], Layout::Normal, 0.0, &mut c);
        assert_eq!(c, [3.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn beta_accumulates() {
        let a = [1.0, 2.0];
        let b = [3.0, 4.0];
        let mut c = [10.0];
        gemm(1, 2, 1, 1.0, &a, Layout::Normal, &b, Layout::Normal, 1.0, &mut c);
        assert_eq!(c[0], 21.0);
    }
}


