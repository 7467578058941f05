//! Set partitions with a fixed number of blocks, as restricted growth strings.

/// Stirling number of the second kind `S(n, k)`.
pub fn stirling2(n: usize, k: usize) -> u128 {
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = j as u128 * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    row[k]
}

/// Every partition of `{0, …, n−1}` into exactly `k` non-empty blocks, each
/// given as the block label of every element. Labels form restricted growth
/// strings (element 0 in block 0, each new block opened by its smallest
/// element) and are produced in lexicographic order.
pub fn partitions_into(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut labels = vec![0usize; n];
    grow(&mut labels, 1, 1, k, &mut out);
    out
}

fn grow(labels: &mut [usize], pos: usize, used: usize, k: usize, out: &mut Vec<Vec<usize>>) {
    let n = labels.len();
    if pos == n {
        if used == k {
            out.push(labels.to_vec());
        }
        return;
    }
    // too few elements left to open the missing blocks
    if k - used > n - pos {
        return;
    }
    for label in 0..=used.min(k - 1) {
        labels[pos] = label;
        let next_used = if label == used { used + 1 } else { used };
        grow(labels, pos + 1, next_used, k, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_stirling() {
        for n in 1..=8 {
            for k in 1..=n {
                assert_eq!(partitions_into(n, k).len() as u128, stirling2(n, k), "S({n},{k})");
            }
        }
        assert_eq!(stirling2(4, 2), 7);
        assert_eq!(stirling2(8, 6), 266);
    }

    #[test]
    fn four_into_two() {
        let expected: Vec<Vec<usize>> = vec![
            vec![0, 0, 0, 1],
            vec![0, 0, 1, 0],
            vec![0, 0, 1, 1],
            vec![0, 1, 0, 0],
            vec![0, 1, 0, 1],
            vec![0, 1, 1, 0],
            vec![0, 1, 1, 1],
        ];
        assert_eq!(partitions_into(4, 2), expected);
    }
}
