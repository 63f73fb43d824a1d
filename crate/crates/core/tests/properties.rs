use igplab::igp::{free_superop_conjugate, igp_max_at_purity, trace_m};
use igplab::sampling::{
    random_real_unital_channel, real_pure_state, real_state_at_purity, spectrum_random_at_purity, spectrum_two_level,
};
use igplab::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn rng(seed: u64) -> SampleRng {
    RngStream::new(seed, 7).rng()
}

fn gaussian_matrix(d: usize, r: &mut SampleRng) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |_, _| C64::new(r.gaussian(), r.gaussian()))
}

/// `G G^dag / Tr(G G^dag)`, optionally with real `G`.
fn random_state(d: usize, real: bool, r: &mut SampleRng) -> DensityMatrix {
    let mut g = gaussian_matrix(d, r);
    if real {
        g = g.map(|z| C64::new(z.re, 0.0));
    }
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    DensityMatrix::validate(&ComplexSquareMatrix::new(rho.map(|z| z / tr)).unwrap(), &Tolerances::default()).unwrap()
}

fn conjugate_state(u: &UnitaryMatrix, rho: &DensityMatrix) -> DensityMatrix {
    let m = u.as_inner() * rho.as_inner() * u.as_inner().adjoint();
    DensityMatrix::validate(&ComplexSquareMatrix::new(m).unwrap(), &Tolerances::default()).unwrap()
}

fn dims() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 3, 4, 5, 8])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_states_have_purity_in_range(seed in any::<u64>(), d in dims(), t in 0.0f64..=1.0, random in any::<bool>()) {
        let mut r = rng(seed);
        let p = 1.0 / d as f64 + t * (1.0 - 1.0 / d as f64);
        let mode = if random { SpectrumMode::Random } else { SpectrumMode::TwoLevel };
        let rho = real_state_at_purity(d, p, &mut r, mode).unwrap();
        let got = purity(&rho);
        prop_assert!(got >= 1.0 / d as f64 - 1e-9 && got <= 1.0 + 1e-9);
        prop_assert!((got - p).abs() <= 1e-9);
        DensityMatrix::validate(rho.matrix(), &Tolerances::default()).unwrap();
    }

    #[test]
    fn spectra_sum_to_one_at_purity(seed in any::<u64>(), d in dims(), t in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let p = 1.0 / d as f64 + t * (1.0 - 1.0 / d as f64);
        for s in [spectrum_two_level(d, p).unwrap(), spectrum_random_at_purity(d, p, &mut r).unwrap()] {
            prop_assert!((s.lambdas().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!((s.lambdas().iter().map(|l| l * l).sum::<f64>() - p).abs() <= 1e-10);
            prop_assert!(s.lambdas().iter().all(|&l| l >= 0.0));
        }
    }

    #[test]
    fn hs_norm_two_ways(seed in any::<u64>(), d in 1usize..9) {
        let a = ComplexSquareMatrix::new(gaussian_matrix(d, &mut rng(seed))).unwrap();
        let direct = hs_norm_sq(&a);
        let via_trace = a.adjoint().mul(&a).unwrap().trace().re;
        prop_assert!((direct - via_trace).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn tensor_is_associative(seed in any::<u64>(), da in 2usize..4, db in 2usize..4, dc in 2usize..4) {
        let mut r = rng(seed);
        let a = ComplexSquareMatrix::new(gaussian_matrix(da, &mut r)).unwrap();
        let b = ComplexSquareMatrix::new(gaussian_matrix(db, &mut r)).unwrap();
        let c = ComplexSquareMatrix::new(gaussian_matrix(dc, &mut r)).unwrap();
        let left = tensor(&tensor(&a, &b), &c);
        let right = tensor(&a, &tensor(&b, &c));
        prop_assert!((left.as_inner() - right.as_inner()).camax() <= 1e-12);
    }

    #[test]
    fn fidelity_ignores_global_phase(seed in any::<u64>(), d in dims(), phase in 0.0f64..std::f64::consts::TAU) {
        let mut r = rng(seed);
        let amps: Vec<C64> = (0..d).map(|_| C64::new(r.gaussian(), r.gaussian())).collect();
        let n = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi = PureStateVector::new(amps.iter().map(|z| z / n).collect(), &Tolerances::default()).unwrap();
        let rho = random_state(d, false, &mut r);
        let f0 = fidelity_pure(&psi, &rho).unwrap();
        let f1 = fidelity_pure(&psi.with_global_phase(phase), &rho).unwrap();
        prop_assert!((f0 - f1).abs() <= 1e-12);
    }

    #[test]
    fn imaginarity_is_faithful(seed in any::<u64>(), d in dims(), real in any::<bool>()) {
        let rho = random_state(d, real, &mut rng(seed));
        let zero = imaginarity(&rho) == 0.0;
        prop_assert_eq!(zero, rho.matrix().max_abs_imag() <= 1e-10);
        prop_assert_eq!(zero, real);
    }

    #[test]
    fn imaginarity_monotone_under_real_unital_channels(seed in any::<u64>(), d in dims(), k in 1usize..5) {
        let mut r = rng(seed);
        let rho = random_state(d, false, &mut r);
        let ch = random_real_unital_channel(d, k, &mut r).unwrap();
        let out = apply_channel(&ch, &rho).unwrap();
        prop_assert!(imaginarity(&out) <= imaginarity(&rho) + 1e-10);
    }

    #[test]
    fn imaginarity_orthogonal_invariance(seed in any::<u64>(), d in dims()) {
        let mut r = rng(seed);
        let rho = random_state(d, false, &mut r);
        let o = haar_orthogonal(d, &mut r).unwrap();
        let out = conjugate_state(&o.to_unitary(), &rho);
        prop_assert!((imaginarity(&out) - imaginarity(&rho)).abs() <= 1e-10);
    }

    #[test]
    fn imaginarity_convex(seed in any::<u64>(), d in dims(), lambda in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let a = random_state(d, false, &mut r);
        let b = random_state(d, false, &mut r);
        let mix = a.as_inner().map(|z| z * lambda) + b.as_inner().map(|z| z * (1.0 - lambda));
        let mix = DensityMatrix::validate(&ComplexSquareMatrix::new(mix).unwrap(), &Tolerances::default()).unwrap();
        prop_assert!(imaginarity(&mix) <= lambda * imaginarity(&a) + (1.0 - lambda) * imaginarity(&b) + 1e-10);
    }

    #[test]
    fn imaginarity_range(seed in any::<u64>(), d in dims()) {
        let rho = random_state(d, false, &mut rng(seed));
        let i = imaginarity(&rho);
        prop_assert!(i >= 0.0 && i <= 0.5 * purity(&rho) + 1e-12);
    }

    #[test]
    fn igp_faithful_and_positive(seed in any::<u64>(), d in dims()) {
        let mut r = rng(seed);
        prop_assert_eq!(igp_pure(&haar_orthogonal(d, &mut r).unwrap().to_unitary()).value, 0.0);
        let u = haar_unitary(d, &mut r).unwrap();
        prop_assume!(u.matrix().max_abs_imag() > 1e-4);
        prop_assert!(igp_pure(&u).value > 0.0);
    }

    #[test]
    fn igp_invariant_under_free_superoperations(seed in any::<u64>(), d in dims(), t in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let u = haar_unitary(d, &mut r).unwrap();
        let o1 = haar_orthogonal(d, &mut r).unwrap();
        let o2 = haar_orthogonal(d, &mut r).unwrap();
        let v = free_superop_conjugate(&u, &o1, &o2).unwrap();
        let p = 1.0 / d as f64 + t * (1.0 - 1.0 / d as f64);
        let a = igp_at_purity(&u, p).unwrap().value;
        let b = igp_at_purity(&v, p).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12);
        let pa = run_fidelity_protocol(&u).unwrap().trace_sq;
        let pb = run_fidelity_protocol(&v).unwrap().trace_sq;
        prop_assert!((pa - pb).abs() <= 1e-10);
    }

    #[test]
    fn igp_ensemble_equality(seed in any::<u64>(), d in dims(), k in 1usize..6) {
        let mut r = rng(seed);
        let u = haar_unitary(d, &mut r).unwrap();
        let raw: Vec<f64> = (0..k).map(|_| r.exponential()).collect();
        let total: f64 = raw.iter().sum();
        let mut avg = 0.0;
        for x in raw {
            let o1 = haar_orthogonal(d, &mut r).unwrap();
            let o2 = haar_orthogonal(d, &mut r).unwrap();
            avg += x / total * igp_pure(&free_superop_conjugate(&u, &o1, &o2).unwrap()).value;
        }
        prop_assert!((avg - igp_pure(&u).value).abs() <= 1e-12);
    }

    #[test]
    fn igp_bounded_by_maximum(seed in any::<u64>(), d in prop::sample::select(vec![2usize, 3, 4, 8]), t in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let p = 1.0 / d as f64 + t * (1.0 - 1.0 / d as f64);
        for _ in 0..50 {
            let u = haar_unitary(d, &mut r).unwrap();
            prop_assert!(igp_at_purity(&u, p).unwrap().value <= igp_max_at_purity(d, p).unwrap() + 1e-12);
        }
    }

    #[test]
    fn corollary_and_normalized_identities(seed in any::<u64>(), d in dims(), t in 0.05f64..=1.0) {
        let u = haar_unitary(d, &mut rng(seed)).unwrap();
        prop_assert_eq!(igp_at_purity(&u, 1.0).unwrap().value, igp_pure(&u).value);
        let p = 1.0 / d as f64 + t * (1.0 - 1.0 / d as f64);
        let ratio = igp_at_purity(&u, p).unwrap().value / igp_max_at_purity(d, p).unwrap();
        prop_assert!((ratio - igp_normalized(&u)).abs() <= 1e-12);
    }

    #[test]
    fn takagi_diagonal_sum_matches_trace(seed in any::<u64>(), d in dims()) {
        let mut r = rng(seed);
        let u = haar_unitary(d, &mut r).unwrap();
        let f = takagi_symmetric_unitary(&m_matrix(&u), &mut r).unwrap();
        let sum: C64 = f.d.iter().sum();
        prop_assert!((sum.norm() - trace_m(&u).norm()).abs() <= 1e-8);
    }

    #[test]
    fn protocol_fidelity_in_unit_interval(seed in any::<u64>(), d in dims()) {
        let r = run_fidelity_protocol(&haar_unitary(d, &mut rng(seed)).unwrap()).unwrap();
        prop_assert!(r.fidelity >= -1e-12 && r.fidelity <= 1.0 + 1e-12);
        prop_assert!(r.residual <= 1e-10);
    }

    #[test]
    fn samplers_reproduce_bit_for_bit(seed in any::<u64>(), d in dims()) {
        let a = haar_unitary(d, &mut rng(seed)).unwrap();
        let b = haar_unitary(d, &mut rng(seed)).unwrap();
        prop_assert_eq!(a, b);
        let x = real_pure_state(d, &mut rng(seed)).unwrap();
        let y = real_pure_state(d, &mut rng(seed)).unwrap();
        prop_assert_eq!(x, y);
    }
}
