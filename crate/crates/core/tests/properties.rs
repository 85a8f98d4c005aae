use num_complex::Complex64;
use proptest::prelude::*;

use rdft::dft::{dft, idft};
use rdft::interp::build_kernel;
use rdft::zmod::{DiscreteInterval, GridFunction, GridSize};

fn grid_function(max_n: usize) -> impl Strategy<Value = GridFunction> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |v| {
            let vals = v
                .into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect();
            GridFunction::new(GridSize::new(n).unwrap(), vals).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_undoes_forward(f in grid_function(40)) {
        let back = idft(&dft(&f));
        prop_assert!(back.sub(&f).unwrap().max_abs() <= 1e-12 * (1.0 + f.max_abs()));
    }

    #[test]
    fn square_is_scaled_reflection(f in grid_function(40)) {
        let n = f.len() as f64;
        let ff = dft(&dft(&f));
        let want = f.reflected().scaled(Complex64::new(n, 0.0));
        prop_assert!(ff.sub(&want).unwrap().max_abs() <= 1e-11 * n * (1.0 + f.max_abs()));
    }

    #[test]
    fn parseval(f in grid_function(40)) {
        let n = f.len() as f64;
        let lhs = dft(&f).norm().powi(2);
        prop_assert!((lhs - n * f.norm().powi(2)).abs() <= 1e-10 * lhs.max(1.0));
    }

    #[test]
    fn reconstruction_recovers_random_functions(f in grid_function(20), t in 0.0f64..1.0) {
        let n = f.grid();
        let nn = n.get();
        // a uniform over the half-widths with 4a + 2 >= N
        let lo = (nn + 1) / 4;
        let hi = (nn - 1) / 2;
        let a = (lo + ((hi - lo + 1) as f64 * t) as usize).min(hi);
        let kernel = build_kernel(n, a).unwrap();
        let err = rdft::interp::reconstruction_error(&kernel, &f).unwrap();
        prop_assert!(err <= 1e-8, "N={} a={} err={}", nn, a, err);
    }

    #[test]
    fn interval_indices_partition_the_grid(n in 2usize..60, t in 0.0f64..1.0) {
        let g = GridSize::new(n).unwrap();
        let a = ((((n - 1) / 2) as f64 + 1.0) * t) as usize;
        let a = a.min((n - 1) / 2);
        let iv = DiscreteInterval::new(g, a).unwrap();
        let mut all = iv.indices();
        all.extend(iv.complement_indices());
        all.sort();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }
}
