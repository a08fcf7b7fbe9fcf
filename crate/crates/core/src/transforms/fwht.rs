//! Walsh-Hadamard butterflies.

/// Unnormalized in-place Walsh-Hadamard transform in natural (Sylvester) order.
///
/// `buf.len()` must be a power of two. Entry `k` of the result is
/// `sum_j (-1)^{popcount(j & k)} x[j]`.
pub fn fwht_in_place(buf: &mut [f64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in buf.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// `perm[s]` is the natural-order row holding the Walsh function with `s` sign changes.
pub fn sequency_permutation(n: usize) -> Vec<usize> {
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    (0..n)
        .map(|s| {
            let gray = s ^ (s >> 1);
            if bits == 0 {
                0
            } else {
                gray.reverse_bits() >> (usize::BITS - bits)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impulse_maps_to_constant() {
        let mut buf = [1.0, 0.0, 0.0, 0.0];
        fwht_in_place(&mut buf);
        assert_eq!(buf, [1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn sequency_permutation_is_a_permutation() {
        for n in [1usize, 2, 8, 64] {
            let mut p = sequency_permutation(n);
            p.sort_unstable();
            assert_eq!(p, (0..n).collect::<Vec<_>>());
        }
        assert_eq!(sequency_permutation(4), vec![0, 2, 3, 1]);
    }
}
