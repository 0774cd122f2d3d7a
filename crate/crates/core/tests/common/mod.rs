//! Test-only oracles, written independently of the library code paths.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use stancedrift::{Mode, Panel, Quarter};

/// Raw quarter × group data for a random panel.
#[derive(Debug, Clone)]
pub struct RawPanel {
    pub quarters: Vec<Quarter>,
    pub groups: Vec<String>,
    /// `[t][g]`, zero for an absent group
    pub weight: Vec<Vec<f64>>,
    /// `[t][g]`, meaningful only where weight > 0
    pub stance: Vec<Vec<f64>>,
}

impl RawPanel {
    pub fn random<R: Rng>(rng: &mut R, max_groups: usize, max_quarters: usize) -> Self {
        let g = rng.random_range(1..=max_groups);
        let t = rng.random_range(1..=max_quarters);
        let absent_rate = rng.random_range(0.0..0.5);
        let mut q = Quarter::new(rng.random_range(2014..2020), rng.random_range(1..=4)).unwrap();
        let mut quarters = Vec::new();
        for _ in 0..t {
            quarters.push(q);
            q = q.succ();
        }
        let mut weight = vec![vec![0.0; g]; t];
        let mut stance = vec![vec![0.0; g]; t];
        for ti in 0..t {
            for gi in 0..g {
                if rng.random::<f64>() >= absent_rate {
                    weight[ti][gi] = if rng.random_bool(0.5) {
                        rng.random_range(1..20) as f64
                    } else {
                        rng.random_range(0.01..5.0)
                    };
                    stance[ti][gi] = rng.random_range(-1.0..=1.0);
                }
            }
        }
        RawPanel {
            quarters,
            groups: (0..g).map(|i| format!("g{i}")).collect(),
            weight,
            stance,
        }
    }

    pub fn to_panel(&self) -> Panel {
        let cells = self
            .weight
            .iter()
            .zip(&self.stance)
            .map(|(w, s)| {
                w.iter()
                    .zip(s)
                    .map(|(&w, &s)| (w, (w > 0.0).then_some(s), (w > 0.0) as u64))
                    .collect()
            })
            .collect();
        Panel::from_weights("oracle", self.quarters.clone(), self.groups.clone(), cells).unwrap()
    }
}

/// Literal term-by-term evaluation of the four-sum counterfactual.
/// `None` in the outer result means the scenario itself is undefined (a
/// frozen stance for a group that never appears).
pub fn four_sum_oracle(raw: &RawPanel, modes: &[Mode], renormalize: bool) -> Option<Vec<Option<f64>>> {
    let nt = raw.quarters.len();
    let ng = raw.groups.len();
    let totals: Vec<f64> = raw.weight.iter().map(|row| row.iter().sum()).collect();
    let nonempty: Vec<usize> = (0..nt).filter(|&t| totals[t] > 0.0).collect();
    let p = |t: usize, g: usize| raw.weight[t][g] / totals[t];
    let present = |t: usize, g: usize| raw.weight[t][g] > 0.0;

    let mut p_bar = vec![0.0; ng];
    let mut l_bar: Vec<Option<f64>> = vec![None; ng];
    for g in 0..ng {
        if !nonempty.is_empty() {
            p_bar[g] = nonempty.iter().map(|&t| p(t, g)).sum::<f64>() / nonempty.len() as f64;
        }
        let seen: Vec<f64> = (0..nt).filter(|&t| present(t, g)).map(|t| raw.stance[t][g]).collect();
        if !seen.is_empty() {
            l_bar[g] = Some(seen.iter().sum::<f64>() / seen.len() as f64);
        }
    }
    let m1: Vec<usize> = (0..ng).filter(|&g| modes[g] == Mode::VaryBoth).collect();
    let m2: Vec<usize> = (0..ng).filter(|&g| modes[g] == Mode::ProportionOnly).collect();
    let m3: Vec<usize> = (0..ng).filter(|&g| modes[g] == Mode::StanceOnly).collect();
    let m4: Vec<usize> = (0..ng).filter(|&g| modes[g] == Mode::Fixed).collect();
    if m2.iter().chain(&m4).any(|&g| l_bar[g].is_none()) {
        return None;
    }
    if nonempty.is_empty() {
        // no averages exist at all
        return None;
    }
    let all_fixed = m4.len() == ng;

    let mut out = Vec::with_capacity(nt);
    for t in 0..nt {
        if totals[t] == 0.0 && !(all_fixed && !renormalize) {
            out.push(None);
            continue;
        }
        if !renormalize {
            let mut v = 0.0;
            for &g in &m1 {
                if present(t, g) {
                    v += p(t, g) * raw.stance[t][g];
                }
            }
            for &g in &m2 {
                v += p(t, g) * l_bar[g].unwrap();
            }
            for &g in &m3 {
                if present(t, g) {
                    v += p_bar[g] * raw.stance[t][g];
                }
            }
            for &g in &m4 {
                v += p_bar[g] * l_bar[g].unwrap();
            }
            out.push(Some(v));
        } else {
            // effective proportion and stance for each contributing group
            let mut terms: Vec<(f64, f64)> = Vec::new();
            for &g in &m1 {
                if present(t, g) {
                    terms.push((p(t, g), raw.stance[t][g]));
                }
            }
            for &g in &m2 {
                terms.push((p(t, g), l_bar[g].unwrap()));
            }
            for &g in &m3 {
                if present(t, g) {
                    terms.push((p_bar[g], raw.stance[t][g]));
                }
            }
            for &g in &m4 {
                if present(t, g) {
                    terms.push((p_bar[g], l_bar[g].unwrap()));
                }
            }
            let s: f64 = terms.iter().map(|x| x.0).sum();
            if s <= 0.0 {
                out.push(None);
            } else {
                out.push(Some(terms.iter().map(|(w, l)| w / s * l).sum()));
            }
        }
    }
    Some(out)
}

/// Minimum cost over every monotone warping path, by exhaustive recursion.
pub fn dtw_brute(x: &[f64], y: &[f64]) -> f64 {
    fn walk(x: &[f64], y: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (x[i] - y[j]).abs();
        if i + 1 == x.len() && j + 1 == y.len() {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if i + 1 < x.len() && j + 1 < y.len() {
            walk(x, y, i + 1, j + 1, acc, best);
        }
        if i + 1 < x.len() {
            walk(x, y, i + 1, j, acc, best);
        }
        if j + 1 < y.len() {
            walk(x, y, i, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(x, y, 0, 0, 0.0, &mut best);
    best
}

/// Top-down memoized DTW, usable at lengths where enumeration is not.
pub fn dtw_memo(x: &[f64], y: &[f64]) -> f64 {
    fn go(x: &[f64], y: &[f64], i: usize, j: usize, memo: &mut Vec<Vec<Option<f64>>>) -> f64 {
        if let Some(v) = memo[i][j] {
            return v;
        }
        let c = (x[i] - y[j]).abs();
        let v = if i == 0 && j == 0 {
            c
        } else {
            let mut best = f64::INFINITY;
            if i > 0 && j > 0 {
                best = best.min(go(x, y, i - 1, j - 1, memo));
            }
            if i > 0 {
                best = best.min(go(x, y, i - 1, j, memo));
            }
            if j > 0 {
                best = best.min(go(x, y, i, j - 1, memo));
            }
            best + c
        };
        memo[i][j] = Some(v);
        v
    }
    let mut memo = vec![vec![None; y.len()]; x.len()];
    go(x, y, x.len() - 1, y.len() - 1, &mut memo)
}

/// I_x(a, 1/2) by Gauss–Legendre quadrature after the substitution
/// t = sin²φ, which turns the integrand into 2·sin^(2a−1)φ.
pub fn inc_beta_half_quadrature(a: f64, x: f64) -> f64 {
    let integrand = |phi: f64| 2.0 * phi.sin().powf(2.0 * a - 1.0);
    let part = gauss_legendre(&integrand, 0.0, x.sqrt().asin(), 400);
    let whole = gauss_legendre(&integrand, 0.0, std::f64::consts::FRAC_PI_2, 400);
    part / whole
}

fn gauss_legendre(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    // 8-point rule
    const NODES: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const WEIGHTS: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + h * (k as f64 + 0.5);
        let half = h / 2.0;
        for (n, w) in NODES.iter().zip(WEIGHTS) {
            total += w * half * (f(mid - half * n) + f(mid + half * n));
        }
    }
    total
}
