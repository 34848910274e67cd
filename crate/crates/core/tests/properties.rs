use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use athermal::channels::Channel;
use athermal::divergences::{
    channel_max_rel_entropy_log, channel_rel_entropy_bruteforce, channel_rel_entropy_log, ht_rel_entropy,
    max_rel_entropy, rel_entropy, AscentOptions, OracleMode,
};
use athermal::qcore::linalg::{self, kron};
use athermal::qcore::random::{density_matrix_with, ginibre, haar_unitary, rng_from_seed};
use athermal::qcore::{mutual_information, vn_entropy, Hermitian, ThermalContext};
use athermal::thermo::athermality;

fn bath(seed: u64) -> ThermalContext {
    let mut rng = rng_from_seed(seed);
    let h = linalg::hermitize(&ginibre(2, 2, &mut rng));
    ThermalContext::new(Hermitian::from_raw(h), 0.3 + (seed % 17) as f64 / 10.0).unwrap()
}

/// `ln Σ_i e^{βE_i} + ln Σ_i e^{−βE_i}`, the divergence of every unitary
/// from the thermal channel.
fn unitary_divergence(ctx: &ThermalContext) -> f64 {
    let b = ctx.beta();
    let e = ctx.hamiltonian().eigenvalues();
    let up: f64 = e.iter().map(|x| (b * x).exp()).sum();
    let down: f64 = e.iter().map(|x| (-b * x).exp()).sum();
    up.ln() + down.ln()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relative_entropy_is_nonnegative_and_faithful(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let rho = density_matrix_with(3, &mut rng);
        let sigma = density_matrix_with(3, &mut rng);
        prop_assert!(rel_entropy(&rho, &sigma.as_hermitian()).unwrap() >= -1e-12);
        prop_assert!(rel_entropy(&rho, &rho.as_hermitian()).unwrap().abs() < 1e-10);
    }

    #[test]
    fn data_processing(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let rho = density_matrix_with(2, &mut rng);
        let sigma = density_matrix_with(2, &mut rng);
        let n = Channel::random(2, 3, 2, &mut rng);
        let before = rel_entropy(&rho, &sigma.as_hermitian()).unwrap();
        let after = rel_entropy(&n.apply(&rho).unwrap(), &n.apply(&sigma).unwrap().as_hermitian()).unwrap();
        prop_assert!(after <= before + 1e-9, "{after} > {before}");
    }

    #[test]
    fn mutual_information_is_divergence_from_product(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let rho = density_matrix_with(6, &mut rng);
        let a = rho.reduce(&[2, 3], &[0]).unwrap();
        let b = rho.reduce(&[2, 3], &[1]).unwrap();
        let i = mutual_information(&rho, 2, 3).unwrap();
        let d = rel_entropy(&rho, &a.tensor(&b).as_hermitian()).unwrap();
        prop_assert!((i - d).abs() < 1e-9);
        prop_assert!((i - (vn_entropy(&a) + vn_entropy(&b) - vn_entropy(&rho))).abs() < 1e-9);
    }

    #[test]
    fn max_divergence_dominates_relative_entropy(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let rho = density_matrix_with(2, &mut rng);
        let sigma = density_matrix_with(2, &mut rng).as_hermitian();
        let d = rel_entropy(&rho, &sigma).unwrap();
        let dmax = max_rel_entropy(&rho, &sigma).unwrap();
        prop_assert!(d <= dmax + 1e-9);
        let mut prev = f64::NEG_INFINITY;
        for eps in [0.0, 0.1, 0.3, 0.6] {
            let h = ht_rel_entropy(&rho, &sigma, eps).unwrap();
            prop_assert!(h >= prev - 1e-9, "not monotone in eps");
            prev = h;
        }
    }

    #[test]
    fn choi_and_kraus_actions_agree(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let n = Channel::random(3, 2, 3, &mut rng);
        let rho = density_matrix_with(3, &mut rng);
        let a = n.apply(&rho).unwrap();
        let b = n.apply_via_choi(&rho).unwrap();
        prop_assert!((a.matrix() - b.matrix()).norm() < 1e-12);
        prop_assert!((n.choi().trace().re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unitaries_share_one_divergence(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let ctx = bath(seed);
        let u = Channel::unitary(haar_unitary(2, &mut rng)).unwrap();
        let d = athermality(&u, &ctx, &AscentOptions::default()).unwrap().value;
        prop_assert!((d - unitary_divergence(&ctx)).abs() < 1e-6, "{d}");
    }

    #[test]
    fn channel_max_divergence_bounds_relative(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let ctx = bath(seed);
        let n = Channel::random(2, 2, 2, &mut rng);
        let lg = ctx.log_gamma();
        let d = channel_rel_entropy_log(&n, &lg, &AscentOptions::default()).unwrap().value;
        let dmax = channel_max_rel_entropy_log(&n, &lg).unwrap().value;
        prop_assert!(d <= dmax + 1e-8);
    }

    #[test]
    fn free_energy_is_convex(seed in any::<u64>(), t in 0.05f64..0.95) {
        let mut rng = rng_from_seed(seed);
        let ctx = bath(seed);
        let n = Channel::random(2, 2, 2, &mut rng);
        let m = Channel::random(2, 2, 2, &mut rng);
        let mix = Channel::mixture(&[t, 1.0 - t], &[&n, &m]).unwrap();
        let opts = AscentOptions::default();
        let f = |c: &Channel| athermality(c, &ctx, &opts).unwrap().value;
        prop_assert!(f(&mix) <= t * f(&n) + (1.0 - t) * f(&m) + 1e-6);
    }
}

#[test]
fn ascent_matches_bruteforce_on_fifty_channels() {
    let mut rng = rng_from_seed(50);
    for i in 0..50 {
        let n = Channel::random(2, 2, 1 + i % 4, &mut rng);
        let omega = density_matrix_with(2, &mut rng).as_hermitian();
        let log_omega = Hermitian::from_raw(linalg::log_support(omega.matrix(), 0.0));
        let ascent = channel_rel_entropy_log(&n, &log_omega, &AscentOptions::default()).unwrap();
        let grid = channel_rel_entropy_bruteforce(
            &n,
            &omega,
            OracleMode::Grid {
                density: 9,
                polish: true,
            },
        )
        .unwrap();
        assert!(
            ascent.value >= grid.value - 1e-9,
            "channel {i}: ascent below a feasible input"
        );
        assert_abs_diff_eq!(ascent.value, grid.value, epsilon = 1e-4);
    }
}

#[test]
fn max_divergence_is_additive() {
    let mut rng = rng_from_seed(3);
    let n = Channel::random(2, 2, 2, &mut rng);
    let ctx = bath(3);
    let lg = ctx.log_gamma();
    let single = channel_max_rel_entropy_log(&n, &lg).unwrap().value;
    // ln(γ⊗γ) = ln γ ⊗ I + I ⊗ ln γ
    let i2 = linalg::identity(2);
    let joint_log = Hermitian::from_raw(kron(lg.matrix(), &i2) + kron(&i2, lg.matrix()));
    let joint = channel_max_rel_entropy_log(&n.tensor(&n), &joint_log).unwrap().value;
    assert_abs_diff_eq!(joint, 2.0 * single, epsilon = 1e-8);
}
