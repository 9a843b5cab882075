//! Pearson and Spearman correlation, and pairwise-complete correlation
//! matrices between methods.

use std::collections::BTreeMap;

/// 1-based ranks, ascending; tied values share the mean of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let mean = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = mean;
        }
        start = end;
    }
    ranks
}

/// Pearson's r. `None` for fewer than two points or zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "pearson needs paired samples");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson on average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Minimum paired items for a matrix entry.
pub const MIN_PAIRED_ITEMS: usize = 3;

/// Symmetric Pearson matrix over methods, each given as item → value.
/// Entries use the items both methods scored; fewer than
/// [`MIN_PAIRED_ITEMS`] pairs or zero variance leaves the entry `None`.
/// The diagonal is 1 for any method with variance.
pub fn pearson_matrix<K: Ord + Clone>(records: &BTreeMap<K, BTreeMap<String, f64>>) -> BTreeMap<(K, K), Option<f64>> {
    let keys: Vec<&K> = records.keys().collect();
    let mut out = BTreeMap::new();
    for (i, a) in keys.iter().enumerate() {
        for b in &keys[i..] {
            let (ra, rb) = (&records[*a], &records[*b]);
            let (xs, ys): (Vec<f64>, Vec<f64>) =
                ra.iter().filter_map(|(item, &x)| rb.get(item).map(|&y| (x, y))).unzip();
            let r = if xs.len() < MIN_PAIRED_ITEMS {
                None
            } else if a == b {
                pearson(&xs, &ys).map(|_| 1.0)
            } else {
                pearson(&xs, &ys)
            };
            out.insert(((*a).clone(), (*b).clone()), r);
            out.insert(((*b).clone(), (*a).clone()), r);
        }
    }
    out
}
