use proptest::prelude::*;
use rand::Rng;
use uavbs_core::nn::{DiagGaussian, Mlp, MlpSpec};
use uavbs_core::rng::{stream, StreamId};
use uavbs_core::trpo::{Policy, ValueFunction};

const H: f64 = 1e-5;

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    diff / scale.max(1e-300)
}

fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + H;
            let up = f(&p);
            p[i] = x[i] - H;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * H)
        })
        .collect()
}

fn small_policy(seed: u64) -> Policy {
    let mut p = Policy::new(MlpSpec { input_dim: 3, hidden: vec![5, 4], heads: vec![2, 2] });
    p.init(&mut stream(seed, StreamId::Init), &[0.4, -0.2]);
    // Spread the heads out so the check is not dominated by the tiny mean head.
    let params: Vec<f64> = p.params().iter().map(|v| v * 3.0).collect();
    p.set_params(params).unwrap();
    p
}

fn random_inputs(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = stream(seed, StreamId::Geometry);
    (0..n).map(|_| rng.random_range(-1.5..1.5)).collect()
}

#[test]
fn log_prob_gradient_matches_finite_differences() {
    let policy = small_policy(1);
    assert!(policy.net().num_params() <= 1000);
    let n = 7;
    let states = random_inputs(2, n * 3);
    let actions = random_inputs(3, n * 2);
    let weights = random_inputs(4, n);
    let eval = policy.evaluate(&states, n).unwrap();
    let analytic = policy.weighted_log_prob_grad(policy.params(), &eval, &actions, &weights).unwrap();
    let f = |p: &[f64]| {
        let e = policy.evaluate_with(p, &states, n).unwrap();
        policy.log_probs(&e, &actions).iter().zip(&weights).map(|(l, w)| l * w).sum::<f64>()
    };
    let fd = central_diff(f, policy.params());
    assert!(rel_err(&analytic, &fd) < 1e-5, "rel err {}", rel_err(&analytic, &fd));
}

#[test]
fn kl_gradient_matches_finite_differences() {
    let policy = small_policy(5);
    let n = 6;
    let states = random_inputs(6, n * 3);
    let old = policy.evaluate(&states, n).unwrap();
    let shifted: Vec<f64> = policy.params().iter().zip(random_inputs(7, policy.params().len())).map(|(p, d)| p + 0.05 * d).collect();
    let new = policy.evaluate_with(&shifted, &states, n).unwrap();
    let analytic = policy.mean_kl_grad(&shifted, &old, &new).unwrap();
    let f = |p: &[f64]| policy.mean_kl(&old, &policy.evaluate_with(p, &states, n).unwrap());
    let fd = central_diff(f, &shifted);
    assert!(rel_err(&analytic, &fd) < 1e-5, "rel err {}", rel_err(&analytic, &fd));
}

#[test]
fn value_mse_gradient_matches_finite_differences() {
    let mut value = ValueFunction::new(MlpSpec { input_dim: 3, hidden: vec![6, 5], heads: vec![1] });
    value.init(&mut stream(8, StreamId::Init));
    let n = 9;
    let states = random_inputs(9, n * 3);
    let targets = random_inputs(10, n);
    let (_, analytic) = value.mse_and_grad(value.params(), &states, &targets).unwrap();
    let fd = central_diff(|p| value.mse(p, &states, &targets).unwrap(), value.params());
    assert!(rel_err(&analytic, &fd) < 1e-5, "rel err {}", rel_err(&analytic, &fd));
}

#[test]
fn log_density_integrates_to_one() {
    let (mu, log_std) = (0.3, (0.7f64).ln());
    let d = DiagGaussian::new(vec![mu], vec![log_std]);
    let sigma = 0.7;
    // Composite Simpson over +-12 sigma.
    let (lo, hi, m) = (mu - 12.0 * sigma, mu + 12.0 * sigma, 20_000);
    let h = (hi - lo) / m as f64;
    let (mut mass, mut first) = (0.0, 0.0);
    for i in 0..=m {
        let x = lo + i as f64 * h;
        let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let p = d.log_prob(&[x]).exp();
        mass += w * p;
        first += w * p * x;
    }
    mass *= h / 3.0;
    first *= h / 3.0;
    assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    assert!((first - mu).abs() < 1e-6, "{first}");
}

#[test]
fn kl_matches_monte_carlo() {
    let p = DiagGaussian::new(vec![0.1, -0.4, 1.0], vec![-0.3, 0.2, 0.0]);
    let q = DiagGaussian::new(vec![0.5, 0.0, 0.7], vec![0.1, -0.2, 0.3]);
    let mut rng = stream(12, StreamId::Actions);
    let n = 1_000_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let a = p.sample(&mut rng);
        let v = p.log_prob(&a) - q.log_prob(&a);
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - p.kl(&q)).abs() < 3.0 * se, "mc {mean} closed {} se {se}", p.kl(&q));
}

#[test]
fn sample_moments() {
    let d = DiagGaussian::new(vec![2.0, -1.0], vec![0.5, -1.0]);
    let std = d.std();
    let mut rng = stream(13, StreamId::Actions);
    let n = 1_000_000;
    let mut s = [0.0; 2];
    let mut s2 = [0.0; 2];
    for _ in 0..n {
        let a = d.sample(&mut rng);
        for j in 0..2 {
            s[j] += a[j];
            s2[j] += a[j] * a[j];
        }
    }
    for j in 0..2 {
        let mean = s[j] / n as f64;
        let var = s2[j] / n as f64 - mean * mean;
        assert!((mean - d.mean()[j]).abs() < 0.005 * std[j]);
        assert!((var / (std[j] * std[j]) - 1.0).abs() < 0.02);
    }
}

proptest! {
    #[test]
    fn flatten_unflatten_round_trip(
        input in 1usize..5,
        hidden in prop::collection::vec(1usize..6, 0..3),
        heads in prop::collection::vec(1usize..4, 1..3),
        seed in any::<u64>(),
    ) {
        let net = Mlp::new(MlpSpec { input_dim: input, hidden, heads });
        let mut rng = stream(seed, StreamId::Init);
        let flat: Vec<f64> = (0..net.num_params()).map(|_| rng.random_range(-10.0..10.0)).collect();
        let layers = net.unflatten(&flat).unwrap();
        prop_assert_eq!(layers.iter().map(|l| l.weights.len() + l.bias.len()).sum::<usize>(), net.num_params());
        prop_assert_eq!(net.flatten(&layers).unwrap(), flat);
    }

    #[test]
    fn forward_is_deterministic(seed in any::<u64>()) {
        let policy = small_policy(seed);
        let states = random_inputs(seed, 12);
        let a = policy.evaluate(&states, 4).unwrap();
        let b = policy.evaluate(&states, 4).unwrap();
        prop_assert_eq!(a.mean(), b.mean());
        prop_assert_eq!(a.log_std, b.log_std);
    }
}
