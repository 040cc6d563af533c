use proptest::prelude::*;
use qpolar::polar::{bit_reversal, encode_bits};

/// Dense `G_N = B_N F^{⊗n}` built entry by entry.
fn dense_generator(n: usize) -> Vec<Vec<u8>> {
    let mut f = vec![vec![1u8]];
    while f.len() < n {
        let m = f.len();
        let mut g = vec![vec![0u8; 2 * m]; 2 * m];
        for r in 0..m {
            for c in 0..m {
                g[r][c] = f[r][c];
                g[m + r][c] = f[r][c];
                g[m + r][m + c] = f[r][c];
            }
        }
        f = g;
    }
    let perm = bit_reversal(n.trailing_zeros());
    (0..n).map(|r| f[perm.apply(r + 1) - 1].clone()).collect()
}

fn multiply(u: &[u8], g: &[Vec<u8>]) -> Vec<u8> {
    let n = u.len();
    (0..n).map(|c| (0..n).fold(0u8, |acc, r| acc ^ (u[r] & g[r][c]))).collect()
}

#[test]
fn matches_dense_generator_on_every_input() {
    for n in [2usize, 4, 8] {
        let g = dense_generator(n);
        for w in 0..(1u32 << n) {
            let u: Vec<u8> = (0..n).map(|i| ((w >> i) & 1) as u8).collect();
            assert_eq!(encode_bits(&u).unwrap().bits(), multiply(&u, &g).as_slice(), "N={n} u={u:?}");
        }
    }
}

fn word() -> impl Strategy<Value = Vec<u8>> {
    (0u32..=10).prop_flat_map(|n| proptest::collection::vec(0u8..=1, 1usize << n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn encoding_twice_is_identity(u in word()) {
        let x = encode_bits(&u).unwrap();
        let back = encode_bits(x.bits()).unwrap();
        prop_assert_eq!(back.bits(), u.as_slice());
    }

    #[test]
    fn encoding_is_linear(pair in (0u32..=10).prop_flat_map(|n| {
        let len = 1usize << n;
        (proptest::collection::vec(0u8..=1, len), proptest::collection::vec(0u8..=1, len))
    })) {
        let (a, b) = pair;
        let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let lhs = encode_bits(&sum).unwrap();
        let eb = encode_bits(&b).unwrap();
        let rhs = encode_bits(&a).unwrap().xor(&eb).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
