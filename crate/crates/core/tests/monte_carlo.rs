//! Exact distortions and moments against seeded Monte Carlo estimates.

use mismatch_quant::{
    channel::{noisy_distortion, Channel, NoisyDecoder, Strategy},
    generative_codebook, lloyd_max_design, mc_means, mc_noisy_distortions, report_for, strategy_report, Distribution64, LloydConfig,
    McConfig, Quantizer64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const K: f64 = 5.0;

fn design(law: &Distribution64, bits: u32) -> Quantizer64 {
    lloyd_max_design(law, bits, &LloydConfig::default()).unwrap()
}

/// `E[(X - c_i) 1{X in bin i}]` vanishes when `c_i` is the exact conditional mean.
fn assert_conditional_means(q: &Quantizer64, law: &Distribution64, seed: u64) {
    let exact = generative_codebook(q.partition(), law).unwrap();
    let n = exact.len();
    let est = mc_means(law, &McConfig::new(seed, 1_000_000), n, |x, row| {
        let i = q.encode(x);
        row[i] = x - exact.get(i);
    });
    for (i, e) in est.iter().enumerate() {
        assert!(e.agrees_with(0.0, K), "bin {i}: {} +- {}", e.mean, e.stderr);
    }
}

#[test]
fn conditional_means_under_the_true_law() {
    let q = design(&Distribution64::standard_normal(), 3);
    for (seed, law) in [
        Distribution64::unit_laplace(),
        Distribution64::gaussian(0.7, 1.4).unwrap(),
        Distribution64::mixture(&[(0.3, -1.5, 0.5), (0.7, 1.0, 0.8)]).unwrap(),
    ]
    .iter()
    .enumerate()
    {
        assert_conditional_means(&q, law, seed as u64 + 11);
    }
}

#[test]
fn encoder_agrees_with_design_centroids() {
    for law in [Distribution64::standard_normal(), Distribution64::unit_laplace()] {
        let q = design(&law, 4);
        assert_conditional_means(&q, &law, 21);
    }
}

#[test]
fn report_distortions_at_ten_million_samples() {
    let cases = [
        (Distribution64::standard_normal(), Distribution64::unit_laplace(), 3),
        (Distribution64::standard_normal(), Distribution64::gaussian(1.0, 1.0).unwrap(), 2),
        (Distribution64::unit_laplace(), Distribution64::mixture(&[(0.5, -1.0, 0.6), (0.5, 1.2, 0.9)]).unwrap(), 4),
    ];
    for (seed, (d, t, bits)) in cases.iter().enumerate() {
        let q = design(d, *bits);
        let mc = McConfig::new(seed as u64 + 1, 10_000_000);
        let r = report_for(&q, t, &LloydConfig::default(), Some(&mc)).unwrap();
        let se = r.mc_stderr.unwrap();
        assert!((r.mc_d_fix.unwrap() - r.d_fix).abs() <= K * se, "{} vs {}", r.mc_d_fix.unwrap(), r.d_fix);
        assert!((r.mc_d_gen.unwrap() - r.d_gen).abs() <= K * se, "{} vs {}", r.mc_d_gen.unwrap(), r.d_gen);
    }
}

#[test]
fn one_bit_unadjusted_variance_mismatch() {
    let q = design(&Distribution64::standard_normal(), 1);
    let truth = Distribution64::gaussian(0.0, 2.0).unwrap();
    let r = report_for(&q, &truth, &LloydConfig::default(), Some(&McConfig::new(5, 10_000_000))).unwrap();
    let closed = 4.0 - 6.0 / std::f64::consts::PI;
    assert!((r.d_fix - closed).abs() < 1e-12);
    assert!((r.mc_d_fix.unwrap() - closed).abs() <= K * r.mc_stderr.unwrap());
}

/// Draw, encode, flip each index bit with probability `eps`, decode.
fn simulate_bsc(q: &Quantizer64, dec: &NoisyDecoder<f64>, truth: &Distribution64, eps: f64, n: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let x = truth.draw(&mut rng);
        let mut j = q.encode(x);
        for b in 0..q.bits() {
            if rng.random::<f64>() < eps {
                j ^= 1 << b;
            }
        }
        let e = (x - dec.table.get(j)).powi(2);
        sum += e;
        sum_sq += e * e;
    }
    let mean = sum / n as f64;
    (mean, ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt())
}

#[test]
fn noisy_index_distortions() {
    let truth = Distribution64::gaussian(0.0, 2.0).unwrap();
    for (bits, eps) in [(1, 0.1), (2, 0.05), (3, 0.2)] {
        let q = design(&Distribution64::standard_normal(), bits);
        let ch = Channel::bsc(bits, eps).unwrap();
        for strategy in [Strategy::StandardSeparation, Strategy::HardGenerative, Strategy::SoftGenerative] {
            let dec = NoisyDecoder::build(strategy, &q, &truth, &ch).unwrap();
            let exact = noisy_distortion(q.partition(), &ch, &dec, &truth).unwrap();
            let (mean, se) = simulate_bsc(&q, &dec, &truth, eps, 2_000_000);
            assert!((mean - exact).abs() <= K * se, "{bits} bits, {strategy:?}: {mean} vs {exact}");
            let est = mc_noisy_distortions(q.partition(), &ch, &[&dec.table], &truth, &McConfig::new(bits.into(), 2_000_000)).unwrap();
            assert!(est[0].agrees_with(exact, K), "{bits} bits, {strategy:?}: {} vs {exact}", est[0].mean);
        }
    }
    let closed = strategy_report(1.0, 2.0, 0.1).unwrap();
    let q = design(&Distribution64::standard_normal(), 1);
    let ch = Channel::bsc(1, 0.1).unwrap();
    let dec = NoisyDecoder::build(Strategy::SoftGenerative, &q, &truth, &ch).unwrap();
    assert!((noisy_distortion(q.partition(), &ch, &dec, &truth).unwrap() - closed.d_opt).abs() < 1e-12);
}
