use super::ScoredSample;
use crate::numerics::{self, RngStream};

/// Uniform sample without replacement.
pub fn baseline_random(unlabeled: &[usize], budget: usize, rng: &RngStream) -> Vec<usize> {
    let mut pool = unlabeled.to_vec();
    let take = budget.min(pool.len());
    let mut rng = rng.clone();
    // Partial Fisher-Yates: the first `take` slots end up uniformly drawn.
    for i in 0..take {
        let j = i + rng.index(pool.len() - i);
        pool.swap(i, j);
    }
    pool.truncate(take);
    pool
}

pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Gap between the two largest probabilities.
pub fn margin(probs: &[f64]) -> f64 {
    let (mut top, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &p in probs {
        if p > top {
            second = top;
            top = p;
        } else if p > second {
            second = p;
        }
    }
    if second == f64::NEG_INFINITY {
        1.0
    } else {
        top - second
    }
}

fn top_by(
    scored: &[ScoredSample],
    budget: usize,
    key: impl Fn(&ScoredSample) -> f64,
) -> Vec<usize> {
    let mut ranked: Vec<(f64, usize)> = scored.iter().map(|s| (key(s), s.index)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ranked.into_iter().take(budget).map(|(_, i)| i).collect()
}

/// Highest predictive entropy first.
pub fn baseline_entropy(scored: &[ScoredSample], budget: usize) -> Vec<usize> {
    top_by(scored, budget, |s| -entropy(&s.class_probs))
}

/// Smallest top-1 / top-2 margin first.
pub fn baseline_margin(scored: &[ScoredSample], budget: usize) -> Vec<usize> {
    top_by(scored, budget, |s| margin(&s.class_probs))
}

/// Greedy k-center over Euclidean distance.
///
/// `centers` are the already-labeled points; `candidates` pairs each sample
/// index with its embedding. Without centers the first pick is the candidate
/// farthest from the candidates' centroid. Returns picks in selection order.
pub fn baseline_coreset(
    centers: &[&[f64]],
    candidates: &[(usize, &[f64])],
    budget: usize,
) -> Vec<usize> {
    let take = budget.min(candidates.len());
    let mut picked = Vec::with_capacity(take);
    if take == 0 {
        return picked;
    }
    let mut min_dist: Vec<f64> = vec![f64::INFINITY; candidates.len()];
    let mut chosen = vec![false; candidates.len()];

    let relax = |min_dist: &mut [f64], center: &[f64]| {
        for (m, (_, p)) in min_dist.iter_mut().zip(candidates) {
            *m = m.min(numerics::squared_distance(p, center));
        }
    };

    if centers.is_empty() {
        let d = candidates[0].1.len();
        let mut centroid = vec![0.0; d];
        for (_, p) in candidates {
            for (c, v) in centroid.iter_mut().zip(p.iter()) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= candidates.len() as f64;
        }
        let far: Vec<f64> = candidates
            .iter()
            .map(|(_, p)| numerics::squared_distance(p, &centroid))
            .collect();
        let first = farthest(&far, &chosen, candidates);
        chosen[first] = true;
        picked.push(candidates[first].0);
        relax(&mut min_dist, candidates[first].1);
    } else {
        for c in centers {
            relax(&mut min_dist, c);
        }
    }

    while picked.len() < take {
        let next = farthest(&min_dist, &chosen, candidates);
        chosen[next] = true;
        picked.push(candidates[next].0);
        relax(&mut min_dist, candidates[next].1);
    }
    picked
}

/// Position of the unchosen candidate with the largest score; lowest sample
/// index wins ties.
fn farthest(score: &[f64], chosen: &[bool], candidates: &[(usize, &[f64])]) -> usize {
    let mut best: Option<usize> = None;
    for j in 0..score.len() {
        if chosen[j] {
            continue;
        }
        best = match best {
            None => Some(j),
            Some(b) => {
                let better = score[j] > score[b]
                    || (score[j] == score[b] && candidates[j].0 < candidates[b].0);
                Some(if better { j } else { b })
            }
        };
    }
    best.expect("an unchosen candidate remains")
}

/// Loss-gradient embedding of the last layer: `(p - onehot(y)) ⊗ v`.
pub fn gradient_embedding(class_probs: &[f64], pseudo_label: usize, v: &[f64]) -> Vec<f64> {
    let mut g = Vec::with_capacity(class_probs.len() * v.len());
    for (k, &p) in class_probs.iter().enumerate() {
        let coef = p - if k == pseudo_label { 1.0 } else { 0.0 };
        g.extend(v.iter().map(|x| coef * x));
    }
    g
}

/// k-means++ seeding over gradient embeddings.
///
/// The first seed is uniform; every later seed is drawn with probability
/// proportional to its squared distance to the nearest seed so far. When
/// all remaining distances are zero the draw falls back to uniform.
pub fn baseline_badge(
    embeddings: &[(usize, Vec<f64>)],
    budget: usize,
    rng: &RngStream,
) -> Vec<usize> {
    let take = budget.min(embeddings.len());
    let mut rng = rng.clone();
    let mut picked = Vec::with_capacity(take);
    let mut chosen = vec![false; embeddings.len()];
    let mut d2 = vec![f64::INFINITY; embeddings.len()];

    while picked.len() < take {
        let total: f64 = d2
            .iter()
            .zip(&chosen)
            .filter(|(_, &c)| !c)
            .map(|(&d, _)| d)
            .sum();
        let next = if picked.is_empty() || !(total > 0.0) || !total.is_finite() {
            let open: Vec<usize> = (0..embeddings.len()).filter(|&j| !chosen[j]).collect();
            open[rng.index(open.len())]
        } else {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for j in (0..embeddings.len()).filter(|&j| !chosen[j] && d2[j] > 0.0) {
                acc += d2[j];
                pick = Some(j);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive mass")
        };
        chosen[next] = true;
        picked.push(embeddings[next].0);
        let seed = &embeddings[next].1;
        for (j, (_, g)) in embeddings.iter().enumerate() {
            d2[j] = d2[j].min(numerics::squared_distance(g, seed));
        }
    }
    picked
}
