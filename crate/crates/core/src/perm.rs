//! Small permutation helpers over `0..n`, stored as `Vec<u8>` images.

/// Advances `perm` to the next permutation in lexicographic order; returns
/// false (leaving `perm` sorted ascending) once the last one has been passed.
pub fn next_permutation(perm: &mut [u8]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        perm.reverse();
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// All `n!` permutations of `0..n`, identity first, lexicographic.
pub fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut cur: Vec<u8> = (0..n as u8).collect();
    let mut out = Vec::with_capacity(factorial(n) as usize);
    loop {
        out.push(cur.clone());
        if !next_permutation(&mut cur) {
            return out;
        }
    }
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

pub fn inverse(perm: &[u8]) -> Vec<u8> {
    let mut inv = vec![0u8; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p as usize] = i as u8;
    }
    inv
}

/// `first` applied after `second`: `x -> first[second[x]]`.
pub fn compose(first: &[u8], second: &[u8]) -> Vec<u8> {
    second.iter().map(|&s| first[s as usize]).collect()
}

/// Lexicographic rank of a permutation among all permutations of its length.
pub fn rank(perm: &[u8]) -> usize {
    let n = perm.len();
    let mut r = 0usize;
    for i in 0..n {
        let smaller = perm[i + 1..].iter().filter(|&&x| x < perm[i]).count();
        r = r * (n - i) + smaller;
    }
    r
}
