#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ridenuc_core::{
    excess_vector, lex_compare_tol, parse_char_table, parse_instance, Allocation, Coalition, Game,
    Instance,
};

pub fn data(name: &str) -> String {
    let path = format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn table_game(name: &str, capacity: usize) -> Game {
    let table = parse_char_table(&data(name)).unwrap().to_table().unwrap();
    Game::from_table(table, Some(capacity)).unwrap()
}

pub fn instance(name: &str) -> Instance {
    parse_instance(&data(name)).unwrap()
}

pub fn members(list: &[usize]) -> Coalition {
    Coalition::from_members(list.iter().map(|i| i - 1))
}

pub fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Cheapest single-vehicle route for `s` by trying every driver and every
/// stop order that picks each passenger up before dropping them off.
pub fn brute_route_cost(inst: &Instance, s: Coalition) -> f64 {
    fn walk(
        inst: &Instance,
        todo: &mut Vec<usize>,
        done: &mut Vec<usize>,
        at: usize,
        end: usize,
    ) -> f64 {
        let n = inst.len();
        if todo.is_empty() {
            return inst.cost().get(at, end);
        }
        let mut best = f64::INFINITY;
        for k in 0..todo.len() {
            let v = todo[k];
            if v > n && !done.contains(&(v - n)) {
                continue;
            }
            todo.swap_remove(k);
            done.push(v);
            best = best.min(inst.cost().get(at, v) + walk(inst, todo, done, v, end));
            done.pop();
            todo.push(v);
            let last = todo.len() - 1;
            todo.swap(k, last);
        }
        best
    }
    let n = inst.len();
    s.members()
        .map(|d| {
            let mut todo: Vec<usize> = s
                .members()
                .filter(|&i| i != d)
                .flat_map(|i| [i + 1, i + 1 + n])
                .collect();
            walk(inst, &mut todo, &mut Vec::new(), d + 1, d + 1 + n)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Looks for an efficient allocation near `y` whose sorted excess vector
/// beats that of `y`. Perturbation sizes range over five decades.
pub fn lex_counterexample(game: &Game, y: &[f64], trials: usize, seed: u64) -> Option<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = y.len();
    let base = excess_vector(game.table(), &Allocation::new(y.to_vec())).unwrap();
    let scale = game.grand_cost().abs().max(1.0) / n as f64;
    for _ in 0..trials {
        let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = d.iter().sum::<f64>() / n as f64;
        let size = scale * 10f64.powf(rng.gen_range(-4.0..1.0));
        d.iter_mut().for_each(|v| *v = (*v - mean) * size);
        let cand: Vec<f64> = y.iter().zip(&d).map(|(a, b)| a + b).collect();
        let ev = excess_vector(game.table(), &Allocation::new(cand.clone())).unwrap();
        if lex_compare_tol(&ev, &base, 1e-9).unwrap() == std::cmp::Ordering::Greater {
            return Some(cand);
        }
    }
    None
}

/// Smallest excess over the capacity-feasible proper coalitions.
pub fn min_feasible_excess(game: &Game, y: &[f64]) -> f64 {
    (1..game.grand().mask())
        .map(Coalition::from_mask)
        .filter(|&s| game.is_feasible(s))
        .map(|s| game.cost(s) - s.sum(y))
        .fold(f64::INFINITY, f64::min)
}
