use snslab::noise::rng::gaussian;

#[test]
fn keyed_draws_are_order_independent() {
    let forward: Vec<f64> = (0..16).map(|c| gaussian(7, 3, c)).collect();
    let backward: Vec<f64> = (0..16).rev().map(|c| gaussian(7, 3, c)).collect();
    let mut b = backward;
    b.reverse();
    assert_eq!(forward, b);
}

#[test]
fn streams_differ() {
    assert_ne!(gaussian(7, 0, 5), gaussian(7, 1, 5));
    assert_ne!(gaussian(7, 0, 5), gaussian(8, 0, 5));
}
