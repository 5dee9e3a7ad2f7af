mod common;

use common::{inner_rect, oracle_crossing, tri_window};
use hyperperc::cli::{family_vectors, Family};
use hyperperc::hypermap::builtin;
use hyperperc::ncpart::{NCPartition, ProbabilityVector};
use hyperperc::percsim::{
    cluster_survey, crossing, dual_config, dual_window, estimate_crossing, sample, scan_rect, BoundaryMode, Direction,
    Rect, Window,
};

/// Pearson statistic of observed state counts against expected probabilities.
fn chi_square(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

/// Upper 0.1% point of chi-square with 4 degrees of freedom.
const CHI2_4_999: f64 = 18.467;

fn torus(n: i32) -> Window {
    Window::new(&builtin("tri").unwrap(), (0, n), (0, n), BoundaryMode::Torus).unwrap()
}

#[test]
fn top_state_frequency() {
    let w = torus(10);
    let v = [ProbabilityVector::competition(0.5).unwrap()];
    let top = NCPartition::top(3);
    let (mut hits, mut draws) = (0u64, 0u64);
    for t in 0..1000 {
        let c = sample(&w, &v, 11, t).unwrap();
        for e in 0..w.edges().len() {
            draws += 1;
            hits += u64::from(*c.state(&w, e) == top);
        }
    }
    assert_eq!(draws, 100_000);
    let freq = hits as f64 / draws as f64;
    let sigma = (0.125f64 * 0.875 / draws as f64).sqrt();
    assert!((freq - 0.125).abs() <= 3.0 * sigma, "top frequency {freq}");
}

#[test]
fn state_frequencies_fit_vector() {
    let w = torus(8);
    let v = ProbabilityVector::competition(0.3).unwrap();
    let states = w.states(3).to_vec();
    let mut counts = vec![0u64; states.len()];
    for t in 0..400 {
        let c = sample(&w, std::slice::from_ref(&v), 5, t).unwrap();
        for &s in c.indices() {
            counts[s] += 1;
        }
    }
    let probs: Vec<f64> = states.iter().map(|pi| v.prob(pi)).collect();
    let stat = chi_square(&counts, &probs);
    assert!(stat < CHI2_4_999, "chi-square {stat}");
}

#[test]
fn dual_samples_follow_dual_vector() {
    let p = 0.35;
    let v = ProbabilityVector::competition(p).unwrap();
    let expected = v.dual_vector();
    assert!(expected.max_abs_diff(&ProbabilityVector::competition(1.0 - p).unwrap()) < 1e-15);

    let primal = builtin("tri").unwrap();
    let w = torus(8);
    let dw = dual_window(&w, &primal.compute_dual()).unwrap();
    let states = dw.states(3).to_vec();
    let mut counts = vec![0u64; states.len()];
    for t in 0..400 {
        let c = sample(&w, std::slice::from_ref(&v), 8, t).unwrap();
        for &s in dual_config(&w, &c, &dw).unwrap().indices() {
            counts[s] += 1;
        }
    }
    let probs: Vec<f64> = states.iter().map(|pi| expected.prob(pi)).collect();
    let stat = chi_square(&counts, &probs);
    assert!(stat < CHI2_4_999, "chi-square {stat}");
}

#[test]
fn dual_configs_need_torus() {
    let primal = builtin("tri").unwrap();
    let w = tri_window(6);
    assert!(matches!(dual_window(&w, &primal.compute_dual()), Err(hyperperc::Error::UnsupportedMode(_))));
}

/// A black horizontal crossing and a white vertical crossing of the same
/// rectangle should (almost) exclude and complement each other.
#[test]
fn primal_and_dual_crossings_complement() {
    let primal = builtin("tri").unwrap();
    let dual = primal.compute_dual();
    let rect = scan_rect(&primal, 32, 1.0);
    let w = Window::around_rect(&primal, rect, 2, BoundaryMode::Torus).unwrap();
    let dw = dual_window(&w, &dual).unwrap();
    let v = [ProbabilityVector::competition(0.5).unwrap()];
    let trials = 400;
    let mut total = 0u64;
    for t in 0..trials {
        let c = sample(&w, &v, 3, t).unwrap();
        let d = dual_config(&w, &c, &dw).unwrap();
        total += u64::from(crossing(&w, &c, rect, Direction::Horizontal).unwrap());
        total += u64::from(crossing(&dw, &d, rect, Direction::Vertical).unwrap());
    }
    let mean = total as f64 / trials as f64;
    assert!((mean - 1.0).abs() <= 0.05, "H_black + V_white = {mean}");
}

#[test]
fn crossing_grows_under_domination() {
    let m = builtin("tri").unwrap();
    let rect = scan_rect(&m, 16, 1.0);
    let w = Window::around_rect(&m, rect, 2, BoundaryMode::Open).unwrap();
    let low = ProbabilityVector::competition(0.45).unwrap();
    let high = ProbabilityVector::competition(0.55).unwrap();
    assert!(high.dominates(&low, false).unwrap());
    let a = estimate_crossing(&w, &[low], rect, Direction::Horizontal, 2000, 17).unwrap();
    let b = estimate_crossing(&w, &[high], rect, Direction::Horizontal, 2000, 17).unwrap();
    assert!(b.estimate > a.estimate, "{} <= {}", b.estimate, a.estimate);
}

#[test]
fn pair_ab_gives_horizontal_lines() {
    let m = builtin("tri").unwrap();
    let v = family_vectors(&m, Family::PairAb, 0.0, None).unwrap();
    let rect = scan_rect(&m, 12, 1.0);
    let w = Window::around_rect(&m, rect, 2, BoundaryMode::Open).unwrap();
    let h = estimate_crossing(&w, &v, rect, Direction::Horizontal, 50, 1).unwrap();
    let vert = estimate_crossing(&w, &v, rect, Direction::Vertical, 50, 1).unwrap();
    assert_eq!((h.hits, vert.hits), (50, 0));
}

#[test]
fn trivial_surveys() {
    let m = builtin("tri").unwrap();
    let w = Window::new(&m, (0, 16), (0, 16), BoundaryMode::Torus).unwrap();
    let bottom = family_vectors(&m, Family::Bottom, 0.0, None).unwrap();
    let s = cluster_survey(&w, &bottom, &[1.0, 4.0], 100, 2).unwrap();
    assert_eq!(s.size_histogram.get(&1), Some(&100));
    assert!(s.tail.iter().all(|r| r.count == 0));

    let top = family_vectors(&m, Family::Top, 0.0, None).unwrap();
    let s = cluster_survey(&w, &top, &[1.0, 4.0], 100, 2).unwrap();
    assert_eq!(s.size_histogram.get(&w.vertex_count()), Some(&100));
    assert!(s.tail.iter().all(|r| r.count == 100));

    let open = Window::new(&m, (0, 8), (0, 8), BoundaryMode::Open).unwrap();
    assert!(cluster_survey(&open, &top, &[16.0], 10, 2).is_err());
}

#[test]
fn crossing_matches_oracle_at_high_density() {
    let w = tri_window(8);
    let rect: Rect = inner_rect(&w);
    let v = [ProbabilityVector::competition(0.9).unwrap()];
    let mut hits = 0;
    for t in 0..300 {
        let c = sample(&w, &v, 21, t).unwrap();
        for dir in [Direction::Horizontal, Direction::Vertical] {
            let got = crossing(&w, &c, rect, dir).unwrap();
            assert_eq!(got, oracle_crossing(&w, &c, rect, dir), "trial {t} {dir:?}");
            hits += u32::from(got);
        }
    }
    assert!(hits > 500, "dense configurations should mostly cross ({hits})");
}
