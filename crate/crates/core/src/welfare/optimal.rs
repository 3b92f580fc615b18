use rayon::prelude::*;

use crate::model::{social_output, Attenuation, EffortProfile, NetworkTopology, ProductivityModel};

use super::WelfareError;

/// Above this many tensor-grid points the search falls back to coordinate ascent.
const TENSOR_CAP: usize = 2_000_000;
const REFINE_POINTS: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalMethod {
    ClosedFormBalanced,
    ClosedFormFlat,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimalEffortOptions {
    /// Grid points per coordinate in the first pass.
    pub grid: usize,
    /// Rounds of local refinement, each ten times finer than the last.
    pub refine_rounds: usize,
    /// Node cap for brute force on networks that are not balanced trees.
    pub max_nodes: usize,
    /// Skip the closed forms and always search.
    pub force_brute_force: bool,
}

impl Default for OptimalEffortOptions {
    fn default() -> Self {
        Self {
            grid: 101,
            refine_rounds: 3,
            max_nodes: 12,
            force_brute_force: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalEffort {
    pub x: EffortProfile,
    pub social_output: f64,
    pub method: OptimalMethod,
    /// Grid density and refinement rounds used (zero for closed forms).
    pub grid: usize,
    pub refine_rounds: usize,
}

/// `-ln(1 - 1/d)`: the attenuation-free EP threshold at or above which zero internal
/// effort is optimal on a balanced `d`-ary tree. Infinite for `d = 1`.
pub fn optimal_threshold(d: usize) -> f64 {
    if d <= 1 {
        f64::INFINITY
    } else {
        -(1.0 - 1.0 / d as f64).ln()
    }
}

/// A social-output maximizing effort profile.
///
/// Closed forms apply to EP balanced trees without attenuation: at or above
/// [`optimal_threshold`] every internal node communicates full time; below it a flat tree
/// has everyone produce. Everything else is searched on a grid. Leaves are fixed at 1
/// (their effort only scales their own output). Balanced trees are searched per level;
/// other networks coordinate-wise, seeded with the best 0/1 profile of the internal nodes.
pub fn optimal_effort(
    net: &NetworkTopology,
    model: &ProductivityModel,
    opts: &OptimalEffortOptions,
) -> Result<OptimalEffort, WelfareError> {
    if opts.grid < 2 {
        return Err(WelfareError::Domain(format!(
            "grid needs at least 2 points, got {}",
            opts.grid
        )));
    }
    let n = net.node_count();
    let shape = net.balanced_shape();

    if !opts.force_brute_force {
        if let (Some((d, depth)), ProductivityModel::Ep(p)) = (shape, model) {
            if p.mu() == Attenuation::One && d >= 2 {
                let closed = if p.beta() >= optimal_threshold(d) {
                    Some((internal_zero(net), OptimalMethod::ClosedFormBalanced))
                } else if depth == 1 {
                    Some((vec![1.0; n], OptimalMethod::ClosedFormFlat))
                } else {
                    None
                };
                if let Some((x, method)) = closed {
                    return Ok(OptimalEffort {
                        social_output: social_output(net, model, &x),
                        x: EffortProfile::new(x).expect("0/1 profile"),
                        method,
                        grid: 0,
                        refine_rounds: 0,
                    });
                }
            }
        }
    }

    let x = match shape {
        Some((d, depth)) => search_levels(net, model, d, depth, opts),
        None => {
            if n > opts.max_nodes {
                return Err(WelfareError::TooLarge {
                    nodes: n,
                    cap: opts.max_nodes,
                });
            }
            search_nodes(net, model, opts)
        }
    };
    Ok(OptimalEffort {
        social_output: social_output(net, model, &x),
        x: EffortProfile::new(x).expect("search stays in [0, 1]"),
        method: OptimalMethod::BruteForce,
        grid: opts.grid,
        refine_rounds: opts.refine_rounds,
    })
}

fn internal_zero(net: &NetworkTopology) -> Vec<f64> {
    (0..net.node_count())
        .map(|i| if net.is_leaf(i) { 1.0 } else { 0.0 })
        .collect()
}

/// Per-level search: all nodes on a level share one effort, leaves play 1.
fn search_levels(
    net: &NetworkTopology,
    model: &ProductivityModel,
    d: usize,
    depth: usize,
    opts: &OptimalEffortOptions,
) -> Vec<f64> {
    // one representative node per internal level: follow first children from the root
    let mut reps = vec![0usize];
    while reps.len() < depth {
        let last = *reps.last().unwrap();
        reps.push(net.children(last)[0]);
    }
    let df = d as f64;
    let level_so = |levels: &[f64]| {
        let mut total = 0.0;
        let mut p = 1.0;
        let mut width = 1.0;
        for (k, &xk) in levels.iter().enumerate() {
            total += width * p * xk;
            p *= model.factor(net, reps[k], xk);
            width *= df;
        }
        total + width * p
    };
    let starts = [
        vec![1.0; depth],
        vec![0.0; depth],
        best_vertex(depth, &level_so),
    ];
    let best = maximize(depth, &level_so, opts, &starts);
    let mut x = vec![1.0; net.node_count()];
    for (i, xi) in x.iter_mut().enumerate() {
        if !net.is_leaf(i) {
            *xi = best[net.depth(i)];
        }
    }
    x
}

/// Coordinate-wise search over the internal nodes of a small network.
fn search_nodes(
    net: &NetworkTopology,
    model: &ProductivityModel,
    opts: &OptimalEffortOptions,
) -> Vec<f64> {
    let n = net.node_count();
    let internal: Vec<usize> = (0..n).filter(|&i| !net.is_leaf(i)).collect();
    let expand = |vars: &[f64]| {
        let mut x = vec![1.0; n];
        for (&i, &v) in internal.iter().zip(vars) {
            x[i] = v;
        }
        x
    };
    let so = |vars: &[f64]| social_output(net, model, &expand(vars));

    // Output is convex in each coordinate for the supported models, so the best 0/1
    // profile is a strong seed.
    let k = internal.len();
    let starts = [vec![1.0; k], vec![0.0; k], best_vertex(k, &so)];
    expand(&maximize(k, &so, opts, &starts))
}

/// Best point of `{0,1}^dim` (lowest mask on ties); `dim` is small here.
fn best_vertex(dim: usize, f: &(impl Fn(&[f64]) -> f64 + Sync)) -> Vec<f64> {
    let decode = |mask: usize| {
        (0..dim)
            .map(|b| ((mask >> b) & 1) as f64)
            .collect::<Vec<_>>()
    };
    let (_, mask) = (0..1usize << dim)
        .into_par_iter()
        .map(|mask| (f(&decode(mask)), mask))
        .reduce(|| (f64::NEG_INFINITY, usize::MAX), better);
    decode(mask)
}

/// Larger value wins; ties go to the lower index.
fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Grid search on `[0,1]^dim` followed by local refinement.
fn maximize(
    dim: usize,
    f: &(impl Fn(&[f64]) -> f64 + Sync),
    opts: &OptimalEffortOptions,
    starts: &[Vec<f64>],
) -> Vec<f64> {
    if dim == 0 {
        return Vec::new();
    }
    let mut boxes = vec![(0.0, 1.0); dim];
    let mut best = grid_pass(&boxes, opts.grid, f, starts);
    let mut spacing = 1.0 / (opts.grid - 1) as f64;
    for _ in 0..opts.refine_rounds {
        for (b, &c) in boxes.iter_mut().zip(&best) {
            *b = ((c - spacing).max(0.0), (c + spacing).min(1.0));
        }
        let candidate = grid_pass(&boxes, REFINE_POINTS, f, std::slice::from_ref(&best));
        if f(&candidate) >= f(&best) {
            best = candidate;
        }
        spacing /= 10.0;
    }
    best
}

fn axis(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |k| {
        if k + 1 == points {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (points - 1) as f64
        }
    })
}

fn grid_pass(
    boxes: &[(f64, f64)],
    points: usize,
    f: &(impl Fn(&[f64]) -> f64 + Sync),
    starts: &[Vec<f64>],
) -> Vec<f64> {
    let dim = boxes.len();
    let total = points.checked_pow(dim as u32).filter(|&t| t <= TENSOR_CAP);
    if let Some(total) = total {
        let decode = |mut idx: usize| {
            let mut v = vec![0.0; dim];
            for (c, &(lo, hi)) in boxes.iter().enumerate() {
                let k = idx % points;
                idx /= points;
                v[c] = axis(lo, hi, points).nth(k).unwrap();
            }
            v
        };
        let (_, idx) = (0..total)
            .into_par_iter()
            .map(|idx| (f(&decode(idx)), idx))
            .reduce(|| (f64::NEG_INFINITY, usize::MAX), better);
        return decode(idx);
    }

    // coordinate ascent from each start, restricted to the box grid
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in starts {
        let mut x: Vec<f64> = s
            .iter()
            .zip(boxes)
            .map(|(&v, &(lo, hi))| v.clamp(lo, hi))
            .collect();
        let mut val = f(&x);
        loop {
            let mut improved = false;
            for c in 0..dim {
                let (lo, hi) = boxes[c];
                let keep = x[c];
                let mut arg = keep;
                for t in axis(lo, hi, points) {
                    x[c] = t;
                    let v = f(&x);
                    if v > val {
                        val = v;
                        arg = t;
                        improved = true;
                    }
                }
                x[c] = arg;
            }
            if !improved {
                break;
            }
        }
        if best.as_ref().is_none_or(|(bv, _)| val > *bv) {
            best = Some((val, x));
        }
    }
    best.expect("at least one start").1
}
