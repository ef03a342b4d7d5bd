use mismatch_quant::{
    channel::{noisy_distortion, soft_codebook, Channel, NoisyDecoder, Strategy as Decoding},
    distributions::Interval,
    expected_distortion, generative_codebook, lloyd_max_design, map_labels, penalty_factor, phi,
    quadrature::{integrate_with_breaks, QuadConfig},
    report, task_codebook,
    taskaware::{accuracy, classification_report},
    Codebook, Distribution64, LabeledSource, LloydConfig, Partition, TaskConfig, TaskLoss,
};
use proptest::prelude::*;

fn law() -> impl Strategy<Value = Distribution64> {
    prop_oneof![
        (-3.0..3.0, 0.2..3.0).prop_map(|(m, s)| Distribution64::gaussian(m, s).unwrap()),
        (-3.0..3.0, 0.2..2.0).prop_map(|(m, b)| Distribution64::laplace(m, b).unwrap()),
        (0.1..0.9, -3.0..0.0, 0.3..1.5, 0.0..3.0, 0.3..1.5)
            .prop_map(|(w, m1, s1, m2, s2)| Distribution64::mixture(&[(w, m1, s1), (1.0 - w, m2, s2)]).unwrap()),
    ]
}

fn partition(max_bits: u32) -> impl Strategy<Value = Partition<f64>> {
    (1..=max_bits)
        .prop_flat_map(|bits| prop::collection::vec(-4.0..4.0_f64, (1usize << bits) - 1))
        .prop_filter_map("boundaries must be distinct", |mut b| {
            b.sort_by(f64::total_cmp);
            Partition::new(b).ok()
        })
}

/// Adaptive quadrature of `x^n pdf` over the interval, normalized by its mass.
fn quadrature_moment(law: &Distribution64, n: i32, iv: &Interval<f64>) -> (f64, f64) {
    let cfg = QuadConfig::default().with_rel_tol(1e-13);
    let marks: Vec<f64> = law.landmarks().into_iter().filter(|&m| m > iv.lo() && m < iv.hi()).collect();
    let int = |g: &dyn Fn(f64) -> f64| integrate_with_breaks(|x| g(x) * law.pdf(x), iv.lo(), iv.hi(), &marks, &cfg).unwrap().value;
    let mass = int(&|_| 1.0);
    (int(&|x| x.powi(n)) / mass, int(&|x| x.abs().powi(n)) / mass)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn masses_sum_to_one(law in law(), p in partition(6)) {
        let total: f64 = p.intervals().map(|iv| law.mass(&iv)).sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "total {}", total);
    }

    #[test]
    fn total_expectation(law in law(), p in partition(6)) {
        let total: f64 = p.intervals().filter_map(|iv| law.bin_stats(&iv).ok()).map(|s| s.mass * s.mean).sum();
        prop_assert!((total - law.mean()).abs() < 1e-8);
    }

    #[test]
    fn truncated_moments_match_quadrature(
        law in law(),
        lo in prop_oneof![Just(f64::NEG_INFINITY), -5.0..5.0],
        width in prop_oneof![Just(f64::INFINITY), 0.01..6.0],
        n in 1u32..=2,
    ) {
        let hi = if lo.is_finite() { lo + width } else { width.min(5.0) - 5.0 + 1e-3 };
        let iv = Interval::new(lo, hi).unwrap();
        prop_assume!(law.mass(&iv) > 1e-6);
        let (oracle, scale) = quadrature_moment(&law, n as i32, &iv);
        let m = law.truncated_moment(n, &iv).unwrap();
        prop_assert!((m - oracle).abs() <= 1e-7 * scale.max(1e-3), "{} vs {}", m, oracle);
    }

    #[test]
    fn lloyd_fixed_point_conditions(law in law(), bits in 1u32..=4) {
        let q = lloyd_max_design(&law, bits, &LloydConfig::default()).unwrap();
        let c = q.design_codebook().values();
        for (t, w) in q.partition().boundaries().iter().zip(c.windows(2)) {
            prop_assert!((t - (w[0] + w[1]) / 2.0).abs() < 1e-9);
        }
        let centroids = generative_codebook(q.partition(), &law).unwrap();
        for (a, b) in c.iter().zip(centroids.values()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert!(q.design_codebook().is_sorted());
    }

    #[test]
    fn encoder_is_nearest_neighbor(bits in 1u32..=5, x in -3.0..3.0_f64) {
        let q = lloyd_max_design(&Distribution64::standard_normal(), bits, &LloydConfig::default()).unwrap();
        let own = (x - q.decode(q.encode(x))).abs();
        for &a in q.design_codebook().values() {
            prop_assert!(own <= (x - a).abs() + 1e-12);
        }
    }

    #[test]
    fn generative_codebook_beats_perturbations(
        law in law(),
        p in partition(4),
        noise in prop::collection::vec(-1.0..1.0_f64, 16),
        scale in 1e-6..1.0_f64,
    ) {
        prop_assume!(p.intervals().all(|iv| law.mass(&iv) > 0.0));
        let gen = generative_codebook(&p, &law).unwrap();
        let best = expected_distortion(&p, &gen, &law).unwrap();
        let moved = Codebook::new(gen.values().iter().zip(&noise).map(|(a, e)| a + scale * e).collect()).unwrap();
        prop_assert!(expected_distortion(&p, &moved, &law).unwrap() >= best - 1e-15 * best.max(1.0));
    }

    #[test]
    fn distortion_hierarchy(design in law(), truth in law(), bits in 1u32..=3) {
        let r = report(&design, &truth, bits, &LloydConfig::default()).unwrap();
        let d_ideal = r.d_ideal.unwrap();
        prop_assert!(d_ideal <= r.d_gen + 1e-9 && r.d_gen <= r.d_fix + 1e-9, "{} {} {}", d_ideal, r.d_gen, r.d_fix);
        prop_assert!(r.excess >= 0.0);
        prop_assert!((r.relative_gain_pct - (1.0 - r.d_gen / r.d_fix) * 100.0).abs() < 1e-9);
    }

    #[test]
    fn one_bit_scale_mismatch_is_ideal(s0 in 0.2..3.0_f64, s1 in 0.2..3.0_f64, mu in -2.0..2.0_f64) {
        let design = Distribution64::gaussian(mu, s0).unwrap();
        let truth = Distribution64::gaussian(mu, s1).unwrap();
        let r = report(&design, &truth, 1, &LloydConfig::default()).unwrap();
        prop_assert!((r.d_gen - r.d_ideal.unwrap()).abs() < 1e-10);
        if (s0 - s1).abs() > 1e-3 {
            prop_assert!(r.d_fix > r.d_gen);
        }
    }

    #[test]
    fn mean_drift_gain_is_symmetric(mu in 0.0..2.5_f64, bits in 1u32..=4) {
        let design = Distribution64::standard_normal();
        let gain = |m: f64| report(&design, &Distribution64::gaussian(m, 1.0).unwrap(), bits, &LloydConfig::default()).unwrap().relative_gain_pct;
        prop_assert!((gain(mu) - gain(-mu)).abs() < 1e-9);
    }

    #[test]
    fn posterior_rows_are_normalized(bits in 1u32..=4, eps in 0.0..0.5_f64, received in 0usize..16, raw in prop::collection::vec(0.01..1.0_f64, 16)) {
        let ch = Channel::bsc(bits, eps).unwrap();
        let n = ch.size();
        let total: f64 = raw[..n].iter().sum();
        let priors: Vec<f64> = raw[..n].iter().map(|p| p / total).collect();
        let post = ch.index_posterior(&priors, received % n).unwrap();
        prop_assert!((post.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(post.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn soft_table_is_the_noisy_mmse(
        law in law(),
        bits in 1u32..=3,
        eps in 0.0..0.5_f64,
        noise in prop::collection::vec(-1.0..1.0_f64, 8),
    ) {
        let q = lloyd_max_design(&Distribution64::standard_normal(), bits, &LloydConfig::default()).unwrap();
        prop_assume!(q.partition().intervals().all(|iv| law.mass(&iv) > 0.0));
        let ch = Channel::bsc(bits, eps).unwrap();
        let p = q.partition();
        let soft = NoisyDecoder::build(Decoding::SoftGenerative, &q, &law, &ch).unwrap();
        let gen = generative_codebook(p, &law).unwrap();
        let (lo, hi) = (gen.values()[0], gen.values()[gen.len() - 1]);
        prop_assert!(soft.table.values().iter().all(|&a| a >= lo - 1e-12 && a <= hi + 1e-12));

        let best = noisy_distortion(p, &ch, &soft, &law).unwrap();
        let other = NoisyDecoder {
            strategy: Decoding::StandardSeparation,
            table: Codebook::new(soft.table.values().iter().zip(&noise).map(|(a, e)| a + e).collect()).unwrap(),
        };
        let worse = noisy_distortion(p, &ch, &other, &law).unwrap();
        prop_assert!(worse >= best);

        // excess = sum_j P(received j) (a_j - a_j^opt)^2
        let priors: Vec<f64> = p.intervals().map(|iv| law.mass(&iv)).collect();
        let marginals = ch.received_marginals(&priors);
        let excess: f64 = marginals.iter().zip(other.table.values().iter().zip(soft.table.values())).map(|(m, (a, b))| m * (a - b) * (a - b)).sum();
        prop_assert!((worse - best - excess).abs() < 1e-9);
    }

    #[test]
    fn squared_error_task_codebook_is_generative(law in law(), p in partition(3)) {
        prop_assume!(p.intervals().all(|iv| law.mass(&iv) > 1e-12));
        let task = task_codebook(&p, &law, &TaskLoss::SquaredError, &TaskConfig::default()).unwrap();
        let gen = generative_codebook(&p, &law).unwrap();
        for (a, b) in task.values().iter().zip(gen.values()) {
            prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
        }
    }

    #[test]
    fn weighted_task_minimizer_is_moment_ratio(law in law(), p in partition(3)) {
        prop_assume!(p.intervals().all(|iv| law.mass(&iv) > 1e-12));
        let task = task_codebook(&p, &law, &TaskLoss::WeightedMseCsi, &TaskConfig::default()).unwrap();
        for (a, iv) in task.values().iter().zip(p.intervals()) {
            let (_, m) = law.raw_moments(&iv).unwrap();
            let exact = m[3] / m[2];
            prop_assert!((a - exact).abs() < 1e-8 * (1.0 + exact.abs()), "{} vs {}", a, exact);
        }
    }

    #[test]
    fn map_labels_ignore_common_prior_scale(
        means in prop::collection::vec(-4.0..4.0_f64, 2..5),
        raw in prop::collection::vec(0.05..1.0_f64, 5),
        scale in 1e-3..1e3_f64,
        p in partition(3),
    ) {
        let k = means.len();
        let build = |factor: f64| {
            let w: Vec<f64> = raw[..k].iter().map(|r| r * factor).collect();
            let total: f64 = w.iter().sum();
            LabeledSource::new(means.iter().zip(&w).map(|(&m, &wi)| (wi / total, Distribution64::gaussian(m, 0.8).unwrap())).collect()).unwrap()
        };
        let (a, b) = (build(1.0), build(scale));
        prop_assume!(p.intervals().all(|iv| a.classes().iter().any(|c| c.law.mass(&iv) > 0.0)));
        prop_assert_eq!(map_labels(&p, &a).unwrap(), map_labels(&p, &b).unwrap());
    }

    #[test]
    fn generative_labels_never_lose_accuracy(
        means in prop::collection::vec(-4.0..4.0_f64, 2..6),
        keep in prop::collection::vec(any::<bool>(), 6),
        bits in 1u32..=3,
    ) {
        let design = LabeledSource::gaussian_classes(&means, 0.7).unwrap();
        let active: Vec<usize> = (0..means.len()).filter(|&i| keep[i]).collect();
        prop_assume!(!active.is_empty());
        let truth = design.restrict(&active).unwrap();
        let cfg = LloydConfig::default();
        let q = lloyd_max_design(&design.marginal().unwrap(), bits, &cfg).unwrap();
        let r = classification_report(q.partition(), &truth, &design, &cfg).unwrap();
        prop_assert!(r.acc_gen >= r.acc_fix - 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.acc_gen));
        let labels = map_labels(q.partition(), &truth);
        if let Ok(labels) = labels {
            prop_assert!((accuracy(q.partition(), &labels, &truth).unwrap() - r.acc_gen).abs() < 1e-12);
        }
    }

    #[test]
    fn penalty_factor_is_at_least_one(s1 in 0.3..1.2_f64, shift in -1.0..1.0_f64) {
        let l = penalty_factor(&Distribution64::standard_normal(), &Distribution64::gaussian(shift, s1).unwrap()).unwrap();
        prop_assert!(l >= 1.0 - 1e-6, "{}", l);
    }
}

#[test]
fn phi_decreases_in_k() {
    let values: Vec<f64> = (0..=100).map(|i| phi(f64::from(i) * 0.5).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    assert!(values[100] > 1.0);
}

#[test]
fn matched_penalty_factor_is_one() {
    for law in [Distribution64::standard_normal(), Distribution64::unit_laplace()] {
        assert!((penalty_factor(&law, &law).unwrap() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn noiseless_channel_reduces_to_expected_distortion() {
    let q = lloyd_max_design(&Distribution64::standard_normal(), 3, &LloydConfig::default()).unwrap();
    let truth = Distribution64::unit_laplace();
    let ch = Channel::bsc(3, 0.0).unwrap();
    let dec = NoisyDecoder::build(Decoding::HardGenerative, &q, &truth, &ch).unwrap();
    let noisy = noisy_distortion(q.partition(), &ch, &dec, &truth).unwrap();
    assert!((noisy - expected_distortion(q.partition(), &dec.table, &truth).unwrap()).abs() < 1e-15);
    assert_eq!(soft_codebook(q.partition(), &truth, &ch).unwrap(), dec.table);
}

#[test]
fn one_bit_threshold_redesign_keeps_the_soft_distortion() {
    let truth = Distribution64::gaussian(0.0, 2.0).unwrap();
    let ch = Channel::bsc(1, 0.15).unwrap();
    let mismatched = lloyd_max_design(&Distribution64::standard_normal(), 1, &LloydConfig::default()).unwrap();
    let redesigned = lloyd_max_design(&truth, 1, &LloydConfig::default()).unwrap();
    let d = |q: &mismatch_quant::Quantizer64| {
        let dec = NoisyDecoder::build(Decoding::SoftGenerative, q, &truth, &ch).unwrap();
        noisy_distortion(q.partition(), &ch, &dec, &truth).unwrap()
    };
    assert!((d(&mismatched) - d(&redesigned)).abs() < 1e-10);
}

#[test]
fn single_and_double_precision_agree() {
    let r64 = report(&Distribution64::standard_normal(), &Distribution64::unit_laplace(), 3, &LloydConfig::default()).unwrap();
    let r32 = report(
        &mismatch_quant::Distribution32::standard_normal(),
        &mismatch_quant::Distribution32::unit_laplace(),
        3,
        &LloydConfig::default(),
    )
    .unwrap();
    assert!((f64::from(r32.d_gen) - r64.d_gen).abs() < 1e-4);
    assert!((f64::from(r32.relative_gain_pct) - r64.relative_gain_pct).abs() < 1e-2);
}
