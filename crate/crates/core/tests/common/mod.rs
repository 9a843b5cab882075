//! Reference implementations for the integration and acceptance suites.
//! Each follows the textbook definition directly and shares no code with
//! the library; the mock provider in [`mock`] wraps the library stub.

#![allow(dead_code)]

pub mod mock;

use std::collections::BTreeMap;

use grade_uq::categorical::Label;
use grade_uq::effectiveness::ScoredItem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Counts per label, computed by scanning the samples for each label.
fn counts(samples: &[Label]) -> Vec<usize> {
    let mut distinct: Vec<Label> = Vec::new();
    for s in samples {
        if !distinct.contains(s) {
            distinct.push(*s);
        }
    }
    distinct.iter().map(|d| samples.iter().filter(|s| *s == d).count()).collect()
}

pub fn numset(samples: &[Label]) -> f64 {
    counts(samples).len() as f64
}

pub fn mar(samples: &[Label]) -> f64 {
    let top = counts(samples).into_iter().max().unwrap();
    1.0 - top as f64 / samples.len() as f64
}

pub fn entropy(samples: &[Label]) -> f64 {
    let n = samples.len() as f64;
    let mut h = 0.0;
    for c in counts(samples) {
        let p = c as f64 / n;
        h -= p * p.ln();
    }
    h.abs()
}

pub fn fsd(samples: &[Label]) -> f64 {
    let mut c = counts(samples);
    c.sort_unstable_by(|a, b| b.cmp(a));
    c.push(0);
    1.0 - (c[0] - c[1]) as f64 / samples.len() as f64
}

/// Every sequence of length `n` over `alphabet`, which covers every
/// histogram of `n` samples over that alphabet.
pub fn all_sequences(alphabet: &[Label], n: usize) -> Vec<Vec<Label>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                alphabet.iter().map(move |&l| {
                    let mut next = prefix.clone();
                    next.push(l);
                    next
                })
            })
            .collect();
    }
    out
}

/// Random symmetric matrix with unit diagonal. Mixes uniform entries with
/// exact 0/1 entries and block structure so disconnected and tied cases
/// occur.
pub fn random_similarity(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let style = rng.gen_range(0..4);
    let blocks: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
    let mut m = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = match style {
                0 => rng.gen::<f64>(),
                1 => [0.0, 0.5, 1.0][rng.gen_range(0..3)],
                2 => {
                    if blocks[i] == blocks[j] {
                        rng.gen_range(0.7..=1.0)
                    } else {
                        rng.gen_range(0.0..0.1)
                    }
                }
                _ => {
                    if blocks[i] == blocks[j] {
                        rng.gen_range(0.2..=1.0)
                    } else {
                        0.0
                    }
                }
            };
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// Random directed entailment matrix with unit diagonal.
pub fn random_directed(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let coarse = rng.gen_bool(0.5);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        1.0
                    } else if coarse {
                        [0.0, 0.5, 0.51, 1.0][rng.gen_range(0..4)]
                    } else {
                        rng.gen()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn nad(s: &[Vec<f64>]) -> f64 {
    let n = s.len();
    let mut total = 0.0;
    let mut pairs = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += s[i][j];
                pairs += 1.0;
            }
        }
    }
    1.0 - total / pairs
}

/// Shortest path lengths from `src` by Dijkstra over distances `1 - s`.
fn dijkstra(s: &[Vec<f64>], src: usize) -> Vec<f64> {
    let n = s.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[src] = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !done[v])
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
            .unwrap();
        done[u] = true;
        for v in 0..n {
            if v != u {
                let w = 1.0 - s[u][v];
                if dist[u] + w < dist[v] {
                    dist[v] = dist[u] + w;
                }
            }
        }
    }
    dist
}

pub fn eccentricity(s: &[Vec<f64>]) -> f64 {
    let n = s.len();
    (0..n)
        .map(|i| dijkstra(s, i).into_iter().fold(0.0, f64::max))
        .sum::<f64>()
        / n as f64
}

/// Full spectrum of `D - A` by nalgebra, ascending.
pub fn laplacian_spectrum(s: &[Vec<f64>]) -> Vec<f64> {
    let n = s.len();
    let l = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (0..n).filter(|&k| k != i).map(|k| s[i][k]).sum()
        } else {
            -s[i][j]
        }
    });
    let mut eig: Vec<f64> = nalgebra::SymmetricEigen::new(l).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Connected components of the bidirectional relation, by flood fill.
pub fn clusters(directed: &[Vec<f64>], threshold: f64) -> Vec<usize> {
    let n = directed.len();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = next;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if label[v] == usize::MAX && directed[u][v] > threshold && directed[v][u] > threshold {
                    label[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    label
}

pub fn auroc(items: &[ScoredItem]) -> Option<f64> {
    let mut credit = 0.0;
    let mut pairs = 0usize;
    for a in items.iter().filter(|it| !it.correct) {
        for b in items.iter().filter(|it| it.correct) {
            pairs += 1;
            credit += if a.uncertainty > b.uncertainty {
                1.0
            } else if a.uncertainty == b.uncertainty {
                0.5
            } else {
                0.0
            };
        }
    }
    (pairs > 0).then(|| credit / pairs as f64)
}

pub fn c_index(items: &[ScoredItem]) -> Option<f64> {
    let mut credit = 0.0;
    let mut pairs = 0usize;
    for a in items {
        for b in items {
            if a.abs_error > b.abs_error {
                pairs += 1;
                credit += if a.uncertainty > b.uncertainty {
                    1.0
                } else if a.uncertainty == b.uncertainty {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    (pairs > 0).then(|| credit / pairs as f64)
}

/// Mean of `value` over the items kept after rejecting the `j` most
/// uncertain (ties broken by item_id), for each `j`.
pub fn rejection_curve(items: &[ScoredItem], value: impl Fn(&ScoredItem) -> f64) -> Vec<(f64, f64)> {
    let mut sorted: Vec<&ScoredItem> = items.iter().collect();
    sorted.sort_by(|a, b| a.uncertainty.partial_cmp(&b.uncertainty).unwrap().then(a.item_id.cmp(&b.item_id)));
    let m = sorted.len();
    (0..m)
        .map(|j| {
            let kept = &sorted[..m - j];
            (j as f64 / m as f64, kept.iter().map(|it| value(it)).sum::<f64>() / kept.len() as f64)
        })
        .collect()
}

pub fn random_items(rng: &mut ChaCha8Rng, m: usize, max_error: u64, levels: usize) -> Vec<ScoredItem> {
    (0..m)
        .map(|i| {
            let u = rng.gen_range(0..levels) as f64 / levels as f64;
            ScoredItem::new(format!("item{i:02}"), u, rng.gen_range(0..=max_error))
        })
        .collect()
}

/// Histogram of cluster labels as categorical samples.
pub fn cluster_labels(labels: &[usize]) -> Vec<Label> {
    labels.iter().map(|&l| Label::Score(l as i64)).collect()
}

pub fn tally<K: Ord + Clone>(keys: &[K]) -> BTreeMap<K, usize> {
    let mut m = BTreeMap::new();
    for k in keys {
        *m.entry(k.clone()).or_insert(0) += 1;
    }
    m
}

/// Eccentricity via a plain Floyd–Warshall over distances `1 - s`.
pub fn floyd_warshall_eccentricity(s: &[Vec<f64>]) -> f64 {
    let n = s.len();
    let mut d: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 - s[i][j] }).collect())
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    d.iter().map(|row| row.iter().cloned().fold(0.0, f64::max)).sum::<f64>() / n as f64
}
