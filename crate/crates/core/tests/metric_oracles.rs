use fnclust::metrics::{accuracy, ari, nmi};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn acc_oracle(pred: &[usize], truth: &[usize], k: usize) -> f64 {
    permutations(k)
        .iter()
        .map(|perm| pred.iter().zip(truth).filter(|(p, t)| perm[**p] == **t).count())
        .max()
        .unwrap() as f64
        / pred.len() as f64
}

fn ari_oracle(pred: &[usize], truth: &[usize]) -> f64 {
    let (mut n11, mut n10, mut n01, mut n00) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..pred.len() {
        for j in i + 1..pred.len() {
            match (pred[i] == pred[j], truth[i] == truth[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if den == 0.0 {
        1.0
    } else {
        2.0 * (n00 * n11 - n01 * n10) / den
    }
}

fn nmi_oracle(pred: &[usize], truth: &[usize], k: usize) -> f64 {
    let n = pred.len() as f64;
    let count = |f: &dyn Fn(usize) -> bool| (0..pred.len()).filter(|&i| f(i)).count() as f64;
    let h = |xs: &[usize]| {
        -(0..k).map(|a| xs.iter().filter(|&&x| x == a).count() as f64 / n).filter(|&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
    };
    let (hp, ht) = (h(pred), h(truth));
    if hp == 0.0 && ht == 0.0 {
        return 1.0;
    }
    let mut mi = 0.0;
    for a in 0..k {
        for b in 0..k {
            let pab = count(&|i| pred[i] == a && truth[i] == b) / n;
            if pab > 0.0 {
                let pa = count(&|i| pred[i] == a) / n;
                let pb = count(&|i| truth[i] == b) / n;
                mi += pab * (pab / (pa * pb)).ln();
            }
        }
    }
    mi / ((hp + ht) / 2.0)
}

#[test]
fn metrics_match_brute_force_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let n = rng.random_range(1..=10);
        let k = rng.random_range(1..=4);
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        assert!((accuracy(&pred, &truth).unwrap() - acc_oracle(&pred, &truth, k)).abs() <= 1e-12);
        assert!((ari(&pred, &truth).unwrap() - ari_oracle(&pred, &truth)).abs() <= 1e-12, "{pred:?} {truth:?}");
        assert!((nmi(&pred, &truth).unwrap() - nmi_oracle(&pred, &truth, k)).abs() <= 1e-12, "{pred:?} {truth:?}");
    }
}

proptest! {
    #[test]
    fn metrics_ignore_relabeling(
        pairs in prop::collection::vec((0usize..4, 0usize..4), 1..30),
        shift in 1usize..4,
    ) {
        let pred: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let truth: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let relabeled: Vec<usize> = pred.iter().map(|p| (p + shift) % 4 + 10).collect();
        prop_assert!((accuracy(&pred, &truth).unwrap() - accuracy(&relabeled, &truth).unwrap()).abs() < 1e-12);
        prop_assert!((ari(&pred, &truth).unwrap() - ari(&relabeled, &truth).unwrap()).abs() < 1e-12);
        prop_assert!((nmi(&pred, &truth).unwrap() - nmi(&truth, &relabeled).unwrap()).abs() < 1e-12);
        let a = ari(&pred, &truth).unwrap();
        let m = nmi(&pred, &truth).unwrap();
        prop_assert!((-1.0..=1.0).contains(&a));
        prop_assert!((0.0..=1.0).contains(&m));
    }
}
