//! Grid scan followed by Nelder–Mead refinement on the unit box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Convergence threshold on the simplex diameter (unit-box coordinates).
const SIMPLEX_TOL: f64 = 1e-10;
const MAX_RESTARTS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SearchOutcome {
    pub best: Vec<f64>,
    pub best_score: f64,
    pub grid_best_score: f64,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

/// Grid points per axis for a 2-D search with `budget` evaluations: at most
/// `preferred`, and never more than half the budget.
pub(crate) fn grid_side(preferred: usize, budget: usize) -> usize {
    let mut g = preferred.max(2);
    while g > 2 && g * g > budget / 2 {
        g -= 1;
    }
    g
}

struct Counter<'a, F> {
    objective: &'a F,
    used: usize,
    budget: usize,
    best_seen: Option<(f64, Vec<f64>)>,
}

impl<F: Fn(&[f64]) -> f64> Counter<'_, F> {
    /// Evaluates `u` if budget remains, remembering the best point seen.
    fn track(&mut self, u: &[f64]) -> Option<f64> {
        if self.used >= self.budget {
            return None;
        }
        self.used += 1;
        let f = sanitize((self.objective)(&clamp(u)));
        if self.best_seen.as_ref().is_none_or(|(b, v)| better((f, u), (*b, v))) {
            self.best_seen = Some((f, u.to_vec()));
        }
        Some(f)
    }
}

fn sanitize(f: f64) -> f64 {
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

fn clamp(u: &[f64]) -> Vec<f64> {
    u.iter().map(|x| x.clamp(0.0, 1.0)).collect()
}

fn better(a: (f64, &[f64]), b: (f64, &[f64])) -> bool {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a.1.iter().zip(b.1).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y),
    }
}

/// Minimises `objective` over `[0, 1]^2`: a `side × side` grid evaluated in
/// parallel (ties broken lexicographically), then seeded simplex restarts
/// from the best of the grid and the optional `start` point.
pub(crate) fn minimize_box<F>(
    objective: &F,
    side: usize,
    budget: usize,
    seed: u64,
    start: Option<[f64; 2]>,
) -> SearchOutcome
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let step = 1.0 / (side - 1) as f64;
    let mut points: Vec<[f64; 2]> = (0..side)
        .flat_map(|i| (0..side).map(move |j| [i as f64 * step, j as f64 * step]))
        .collect();
    points.truncate(budget);
    let scores: Vec<f64> = points.par_iter().map(|p| sanitize(objective(p))).collect();
    let mut best = (scores[0], points[0].to_vec());
    for (s, p) in scores.iter().zip(&points).skip(1) {
        if better((*s, p), (best.0, &best.1)) {
            best = (*s, p.to_vec());
        }
    }
    let grid_best_score = best.0;

    let mut counter = Counter {
        objective,
        used: points.len(),
        budget,
        best_seen: None,
    };
    if let Some(s) = start {
        if let Some(f) = counter.track(&s) {
            if better((f, &s), (best.0, &best.1)) {
                best = (f, s.to_vec());
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exhausted = false;
    for restart in 0..MAX_RESTARTS {
        let size = step * if restart == 0 { 1.0 } else { rng.gen_range(0.25..0.75) };
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let before = best.0;
        match nelder_mead(&mut counter, &best.1, best.0, size, angle) {
            Some((f, u)) => {
                if better((f, &u), (best.0, &best.1)) {
                    best = (f, u);
                }
            }
            None => {
                exhausted = true;
                break;
            }
        }
        if restart > 0 && !(best.0 < before - 1e-12 * before.abs()) {
            break;
        }
    }
    // a run that stopped on the budget may still have improved
    if let Some((f, u)) = counter.best_seen.take() {
        if better((f, &u), (best.0, &best.1)) {
            best = (f, u);
        }
    }
    SearchOutcome {
        best: clamp(&best.1),
        best_score: best.0,
        grid_best_score,
        evaluations: counter.used,
        budget_exhausted: exhausted,
    }
}

/// One Nelder–Mead run; `None` when the budget ran out first (the best
/// point seen is then left in `counter.best_seen`).
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    counter: &mut Counter<'_, F>,
    origin: &[f64],
    origin_score: f64,
    size: f64,
    angle: f64,
) -> Option<(f64, Vec<f64>)> {
    let (c, s) = (angle.cos(), angle.sin());
    let mut simplex: Vec<(f64, Vec<f64>)> = vec![(origin_score, origin.to_vec())];
    for dir in [[c, s], [-s, c]] {
        let v: Vec<f64> = clamp(&[origin[0] + size * dir[0], origin[1] + size * dir[1]]);
        let f = counter.track(&v)?;
        simplex.push((f, v));
    }
    loop {
        simplex.sort_by(|a, b| {
            if better((a.0, &a.1), (b.0, &b.1)) {
                std::cmp::Ordering::Less
            } else if better((b.0, &b.1), (a.0, &a.1)) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
        let diameter = simplex[1..]
            .iter()
            .map(|(_, v)| {
                v.iter()
                    .zip(&simplex[0].1)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter < SIMPLEX_TOL || simplex[2].0 - simplex[0].0 <= 1e-15 * simplex[0].0.abs().max(1e-300) {
            return Some(simplex.swap_remove(0));
        }
        let centroid: Vec<f64> = (0..2).map(|k| 0.5 * (simplex[0].1[k] + simplex[1].1[k])).collect();
        let toward = |t: f64| -> Vec<f64> {
            clamp(
                &(0..2)
                    .map(|k| centroid[k] + t * (simplex[2].1[k] - centroid[k]))
                    .collect::<Vec<_>>(),
            )
        };
        let reflected = toward(-1.0);
        let fr = counter.track(&reflected)?;
        if fr < simplex[0].0 {
            let expanded = toward(-2.0);
            let fe = counter.track(&expanded)?;
            simplex[2] = if fe < fr { (fe, expanded) } else { (fr, reflected) };
            continue;
        }
        if fr < simplex[1].0 {
            simplex[2] = (fr, reflected);
            continue;
        }
        let (contracted, outside) = if fr < simplex[2].0 {
            (toward(-0.5), true)
        } else {
            (toward(0.5), false)
        };
        let fc = counter.track(&contracted)?;
        if (outside && fc <= fr) || (!outside && fc < simplex[2].0) {
            simplex[2] = (fc, contracted);
            continue;
        }
        for i in 1..3 {
            let v: Vec<f64> = (0..2)
                .map(|k| simplex[0].1[k] + 0.5 * (simplex[i].1[k] - simplex[0].1[k]))
                .collect();
            let f = counter.track(&v)?;
            simplex[i] = (f, v);
        }
    }
}
