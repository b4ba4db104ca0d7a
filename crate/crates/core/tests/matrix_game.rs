use adaptnet_core::learning::MaddpgParams;
use adaptnet_core::modes::training::{matching_payoff, matrix_game_trial};

/// Optimal joint actions of the coordination game, found by enumerating
/// the sign table.
fn optima() -> Vec<(bool, bool)> {
    let signs = [(true, true), (true, false), (false, true), (false, false)];
    let value = |(a, b): (bool, bool)| matching_payoff(if a { 1.0 } else { -1.0 }, if b { 1.0 } else { -1.0 });
    let best = signs.iter().map(|&s| value(s)).fold(f64::MIN, f64::max);
    signs.into_iter().filter(|&s| value(s) == best).collect()
}

#[test]
fn table_oracle_finds_the_matching_pairs() {
    assert_eq!(optima(), vec![(true, true), (false, false)]);
}

#[test]
fn maddpg_coordinates_in_most_seeds() {
    let params = MaddpgParams {
        gamma: 0.0,
        lr: 1e-2,
        tau: 0.05,
    };
    let opt = optima();
    let solved = (0..10)
        .filter(|&seed| {
            let o = matrix_game_trial(seed, 2000, &[8, 8], params, 0.5, 32).unwrap();
            let (a, b) = (o.actions[0], o.actions[1]);
            a != 0.0 && b != 0.0 && opt.contains(&(a > 0.0, b > 0.0))
        })
        .count();
    assert!(solved >= 8, "solved {solved}/10");
}
