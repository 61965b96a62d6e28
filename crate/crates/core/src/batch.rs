//! Independent trials and trajectories, run data-parallel with the `parallel`
//! feature and sequentially without it. Results are identical either way.

use crate::error::Result;
use crate::geodesics::{integrate, GeodesicState, IntegrateOptions, Trajectory};

/// `f(0), …, f(n − 1)` in order.
#[cfg(feature = "parallel")]
pub fn map_trials<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_trials<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_trials_sequential(n, f)
}

pub fn map_trials_sequential<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

pub fn integrate_many(states: &[GeodesicState], opts: &IntegrateOptions) -> Vec<Result<Trajectory>> {
    map_trials(states.len(), |i| integrate(&states[i], opts))
}

pub fn integrate_many_sequential(states: &[GeodesicState], opts: &IntegrateOptions) -> Vec<Result<Trajectory>> {
    map_trials_sequential(states.len(), |i| integrate(&states[i], opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn order_is_preserved() {
        assert_eq!(map_trials(50, |i| i * i), (0..50).map(|i| i * i).collect::<Vec<_>>());
        assert!(map_trials(0, |i| i).is_empty());
    }

    #[test]
    fn parallel_matches_sequential() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let states: Vec<_> = (0..6).map(|_| random_state(5, 2, &mut rng)).collect();
        let opts = IntegrateOptions {
            t_max: 0.2,
            dt: 1e-2,
            ..Default::default()
        };
        let a = integrate_many(&states, &opts);
        let b = integrate_many_sequential(&states, &opts);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.as_ref().unwrap(), y.as_ref().unwrap());
        }
    }
}
