//! External clustering metrics: ACC, ARI and NMI.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Contingency table with rows indexed by predicted and columns by true
/// labels, after compacting both label sets to `0..K`.
pub fn contingency(pred: &[usize], truth: &[usize]) -> Result<Vec<Vec<u64>>> {
    if pred.len() != truth.len() {
        return Err(Error::Shape(format!("{} predictions for {} labels", pred.len(), truth.len())));
    }
    let compact = |xs: &[usize]| {
        let mut ids = BTreeMap::new();
        for &x in xs {
            let next = ids.len();
            ids.entry(x).or_insert(next);
        }
        (xs.iter().map(|x| ids[x]).collect::<Vec<_>>(), ids.len())
    };
    let (p, kp) = compact(pred);
    let (t, kt) = compact(truth);
    let mut table = vec![vec![0u64; kt]; kp];
    for (a, b) in p.iter().zip(&t) {
        table[*a][*b] += 1;
    }
    Ok(table)
}

/// Best matching fraction over all bijections between predicted and true
/// clusters; the table is padded to square with zeros.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = contingency(pred, truth)?;
    if pred.is_empty() {
        return Ok(1.0);
    }
    let k = table.len().max(table[0].len());
    let mut sq = vec![vec![0i64; k]; k];
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            sq[i][j] = c as i64;
        }
    }
    let matched = if k <= 8 { best_permutation(&sq) } else { hungarian(&sq) };
    Ok(matched as f64 / pred.len() as f64)
}

fn best_permutation(w: &[Vec<i64>]) -> i64 {
    fn go(w: &[Vec<i64>], row: usize, used: &mut [bool], acc: i64, best: &mut i64) {
        if row == w.len() {
            *best = (*best).max(acc);
            return;
        }
        for c in 0..w.len() {
            if !used[c] {
                used[c] = true;
                go(w, row + 1, used, acc + w[row][c], best);
                used[c] = false;
            }
        }
    }
    let mut best = 0;
    go(w, 0, &mut vec![false; w.len()], 0, &mut best);
    best
}

fn hungarian(w: &[Vec<i64>]) -> i64 {
    let m = pathfinding::matrix::Matrix::from_rows(w.iter().cloned()).expect("square table");
    pathfinding::kuhn_munkres::kuhn_munkres(&m).0
}

fn choose2(n: u64) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index. Returns 1.0 when the expected and maximal indices
/// coincide, which only happens for identical trivial partitions.
pub fn ari(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = contingency(pred, truth)?;
    let n = pred.len() as u64;
    if n < 2 {
        return Ok(1.0);
    }
    let index: f64 = table.iter().flatten().map(|&c| choose2(c)).sum();
    let rows: f64 = table.iter().map(|r| choose2(r.iter().sum())).sum();
    let kt = table.first().map_or(0, Vec::len);
    let cols: f64 = (0..kt).map(|j| choose2(table.iter().map(|r| r[j]).sum())).sum();
    let expected = rows * cols / choose2(n);
    let max = 0.5 * (rows + cols);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

fn entropy(counts: impl Iterator<Item = u64>, n: f64) -> f64 {
    -counts.filter(|&c| c > 0).map(|c| c as f64 / n).map(|p| p * p.ln()).sum::<f64>()
}

/// Mutual information normalised by the arithmetic mean of the entropies.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = contingency(pred, truth)?;
    if pred.is_empty() {
        return Ok(1.0);
    }
    let n = pred.len() as f64;
    let rows: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..table[0].len()).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let hp = entropy(rows.iter().copied(), n);
    let ht = entropy(cols.iter().copied(), n);
    if hp == 0.0 && ht == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    Ok((mi / (0.5 * (hp + ht))).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Scores {
    pub acc: f64,
    pub ari: f64,
    pub nmi: f64,
}

pub fn score(pred: &[usize], truth: &[usize]) -> Result<Scores> {
    Ok(Scores { acc: accuracy(pred, truth)?, ari: ari(pred, truth)?, nmi: nmi(pred, truth)? })
}
