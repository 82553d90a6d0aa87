//! Slow reference implementations the library is checked against.

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use rand_distr::Normal;
use rpys_core::{ref_similarity, ParsedCitedRef, RefKey, Scale};

/// Connected components of the all-pairs `similarity >= threshold` graph,
/// restricted to pairs sharing year and author initial.
pub fn brute_force_closure(refs: &[ParsedCitedRef], threshold: f64) -> BTreeSet<BTreeSet<RefKey>> {
    let n = refs.len();
    let same_block = |a: &ParsedCitedRef, b: &ParsedCitedRef| {
        a.rpy.is_some()
            && a.rpy == b.rpy
            && a.first_author.chars().next() == b.first_author.chars().next()
    };
    let mut adjacent = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            adjacent[i][j] = i == j
                || (same_block(&refs[i], &refs[j])
                    && ref_similarity(&refs[i], &refs[j]) >= threshold);
        }
    }
    let mut component = vec![usize::MAX; n];
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component[start] = start;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if adjacent[i][j] && component[j] == usize::MAX {
                    component[j] = start;
                    stack.push(j);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<RefKey>> = Default::default();
    for (i, c) in component.into_iter().enumerate() {
        groups.entry(c).or_default().insert(refs[i].key.clone());
    }
    groups.into_values().collect()
}

pub fn refines(fine: &BTreeSet<BTreeSet<RefKey>>, coarse: &BTreeSet<BTreeSet<RefKey>>) -> bool {
    fine.iter().all(|f| coarse.iter().any(|c| f.is_subset(c)))
}

/// SSE of the least-squares line through `ys` (x = 0, 1, ...), two-pass.
pub fn ols_sse(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = (0..ys.len()).map(|i| (i as f64 - mx).powi(2)).sum();
    let sxy: f64 = ys
        .iter()
        .enumerate()
        .map(|(i, y)| (i as f64 - mx) * (y - my))
        .sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    ys.iter()
        .enumerate()
        .map(|(i, y)| (y - my - b * (i as f64 - mx)).powi(2))
        .sum()
}

/// Minimum total SSE and its breakpoints over every valid placement.
pub fn exhaustive(ys: &[f64], k: usize, min_len: usize) -> Option<(f64, Vec<usize>)> {
    fn go(
        ys: &[f64],
        start: usize,
        left: usize,
        min_len: usize,
        cuts: &mut Vec<usize>,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let n = ys.len();
        if left == 1 {
            if n - start < min_len {
                return;
            }
            let mut bounds = vec![0];
            bounds.extend(cuts.iter().copied());
            bounds.push(n);
            let total: f64 = bounds.windows(2).map(|w| ols_sse(&ys[w[0]..w[1]])).sum();
            if best.as_ref().is_none_or(|(b, _)| total < *b) {
                *best = Some((total, cuts.clone()));
            }
            return;
        }
        for cut in start + min_len..=n.saturating_sub(min_len * (left - 1)) {
            cuts.push(cut);
            go(ys, cut, left - 1, min_len, cuts, best);
            cuts.pop();
        }
    }
    let mut best = None;
    go(ys, 0, k, min_len, &mut Vec::new(), &mut best);
    best
}

pub fn transformed(series: &[(i32, f64)], scale: Scale) -> Vec<f64> {
    series
        .iter()
        .map(|&(_, v)| match scale {
            Scale::Linear => v,
            Scale::Log1p => v.ln_1p(),
        })
        .collect()
}

/// Piecewise-linear log-scale series with a level jump of `jump` at each
/// breakpoint and Gaussian noise, returned as raw counts so that the Log1p fit sees `levels + noise` exactly.
pub fn planted(
    seed: u64,
    lengths: &[usize],
    slopes: &[f64],
    start: f64,
    sigma: f64,
    jump: f64,
) -> (Vec<(i32, f64)>, Vec<i32>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut series = Vec::new();
    let mut breaks = Vec::new();
    let mut level = start;
    let mut year = 1900;
    for (i, (&len, &slope)) in lengths.iter().zip(slopes).enumerate() {
        if i > 0 {
            breaks.push(year);
            level += jump;
        }
        for _ in 0..len {
            let y: f64 = level + rng.sample(noise);
            series.push((year, y.exp_m1()));
            level += slope;
            year += 1;
        }
    }
    (series, breaks)
}

pub fn within_one(found: &[i32], planted: &[i32]) -> bool {
    found.len() == planted.len() && found.iter().zip(planted).all(|(a, b)| (a - b).abs() <= 1)
}
