//! String subsequence kernel.
//!
//! `k_p(s, t)` sums, over every pair of index tuples `i` in `s` and `j` in
//! `t` spelling the same length-`p` subsequence, the weight
//! `λ^(i_p − i_1 + 1) · λ^(j_p − j_1 + 1)`. The dynamic program below is the
//! usual `O(p·|s|·|t|)` recursion through the auxiliary kernels `K'` and `K''`.

/// Unnormalized length-`p` subsequence kernel.
pub fn ssk_raw(s: &[u8], t: &[u8], p: usize, decay: f64) -> f64 {
    let (n, m) = (s.len(), t.len());
    if p == 0 || p > n.min(m) {
        return 0.0;
    }
    let width = m + 1;
    let lam2 = decay * decay;
    // prev[a * width + b] = K'_{l-1}(s[..a], t[..b]); K'_0 ≡ 1.
    let mut prev = vec![1.0; (n + 1) * width];
    let mut next = vec![0.0; (n + 1) * width];
    for l in 1..p {
        next.iter_mut().for_each(|v| *v = 0.0);
        for a in l..=n {
            let sa = s[a - 1];
            // K''_l(s[..a], t[..b]), accumulated along b.
            let mut kpp = 0.0;
            for b in l..=m {
                kpp *= decay;
                if t[b - 1] == sa {
                    kpp += lam2 * prev[(a - 1) * width + (b - 1)];
                }
                next[a * width + b] = decay * next[(a - 1) * width + b] + kpp;
            }
        }
        std::mem::swap(&mut prev, &mut next);
    }
    let mut total = 0.0;
    for a in p..=n {
        let sa = s[a - 1];
        for b in p..=m {
            if t[b - 1] == sa {
                total += lam2 * prev[(a - 1) * width + (b - 1)];
            }
        }
    }
    total
}

/// `raw / √(self_s · self_t)` with `0/0` defined as 0.
pub fn normalize(raw: f64, self_s: f64, self_t: f64) -> f64 {
    let denom = (self_s * self_t).sqrt();
    if denom > 0.0 {
        raw / denom
    } else {
        0.0
    }
}

/// Subsequence kernel, optionally normalized to unit self-similarity.
#[cfg(test)]
pub fn ssk_eval(s: &[u8], t: &[u8], p: usize, decay: f64, normalized: bool) -> f64 {
    let raw = ssk_raw(s, t, p, decay);
    if !normalized {
        return raw;
    }
    normalize(raw, ssk_raw(s, s, p, decay), ssk_raw(t, t, p, decay))
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_examples() {
        assert_eq!(ssk_eval(b"ab", b"ab", 2, 1.0, false), 1.0);
        assert!((ssk_eval(b"cat", b"car", 2, 0.5, false) - 0.0625).abs() < 1e-15);
        assert!((ssk_eval(b"cat", b"cat", 2, 1.0, true) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn short_and_empty_strings_give_zero() {
        assert_eq!(ssk_eval(b"ab", b"abc", 3, 0.5, false), 0.0);
        assert_eq!(ssk_eval(b"", b"abc", 1, 0.5, false), 0.0);
        assert_eq!(ssk_eval(b"", b"", 1, 0.5, true), 0.0);
    }

    fn dna(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(prop::sample::select(b"ACGT".to_vec()), 0..=max_len)
    }

    proptest! {
        #[test]
        fn matches_enumeration(s in dna(8), t in dna(8), p in 1usize..=3, half in any::<bool>()) {
            let decay = if half { 0.5 } else { 1.0 };
            let dp = ssk_raw(&s, &t, p, decay);
            let bf = oracle::brute_force(&s, &t, p, decay);
            prop_assert!((dp - bf).abs() <= 1e-12 * bf.max(1.0));
        }

        #[test]
        fn normalized_is_bounded_and_symmetric(s in dna(10), t in dna(10), p in 1usize..=3) {
            let k = ssk_eval(&s, &t, p, 0.8, true);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&k));
            prop_assert!((k - ssk_eval(&t, &s, p, 0.8, true)).abs() < 1e-12);
            if s.len() >= p {
                prop_assert!((ssk_eval(&s, &s, p, 0.8, true) - 1.0).abs() < 1e-12);
            }
        }
    }
}
