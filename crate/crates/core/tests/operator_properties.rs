use ko_core::matrixops::{
    eigen_decomposition, eigenvalues, mminus, mplus_01, pplus_k, subspace_trace, Frame, PucciParams, SymMatrix,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn sym_matrix(max_n: usize, bound: f64) -> impl Strategy<Value = SymMatrix> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(-bound..=bound, n * n).prop_map(move |raw| {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| if i <= j { raw[i * n + j] } else { raw[j * n + i] }).collect())
                .collect();
            SymMatrix::from_rows(&rows).unwrap()
        })
    })
}

fn psd_like(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-3.0..=3.0_f64, n * n).prop_map(move |g| SymMatrix::gram(n, &g))
}

fn pair_with_psd() -> impl Strategy<Value = (SymMatrix, SymMatrix)> {
    sym_matrix(6, 10.0).prop_flat_map(|x| {
        let n = x.n();
        (Just(x), psd_like(n))
    })
}

proptest! {
    #[test]
    fn spectrum_is_sorted_and_sums_to_trace(x in sym_matrix(7, 10.0)) {
        let s = eigenvalues(&x);
        prop_assert!(s.values().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((s.sum() - x.trace()).abs() <= TOL * x.scale());
    }

    #[test]
    fn eigenvectors_reconstruct_the_matrix(x in sym_matrix(6, 10.0)) {
        let d = eigen_decomposition(&x);
        let n = x.n();
        for i in 0..n {
            for j in 0..n {
                let rebuilt: f64 = (0..n)
                    .map(|m| d.spectrum.values()[m] * d.vectors[m][i] * d.vectors[m][j])
                    .sum();
                prop_assert!((rebuilt - x.get(i, j)).abs() <= 1e-10 * x.scale());
            }
        }
    }

    #[test]
    fn partial_traces_sit_below_the_positive_part(x in sym_matrix(6, 10.0)) {
        let m = mplus_01(&x);
        for k in 1..=x.n() {
            prop_assert!(pplus_k(&x, k).unwrap() <= m + TOL * x.scale());
        }
        prop_assert!((pplus_k(&x, x.n()).unwrap() - x.trace()).abs() <= TOL * x.scale());
    }

    #[test]
    fn degenerate_ellipticity((x, y) in pair_with_psd()) {
        let xy = x.add(&y).unwrap();
        let slack = TOL * xy.scale();
        let d = mplus_01(&xy) - mplus_01(&x);
        prop_assert!(d >= -slack && d <= y.trace() + slack, "ℳ⁺ increment {} vs tr {}", d, y.trace());
        for k in 1..=x.n() {
            let d = pplus_k(&xy, k).unwrap() - pplus_k(&x, k).unwrap();
            prop_assert!(d >= -slack && d <= y.trace() + slack, "k={} increment {}", k, d);
        }
        let p = PucciParams::new(0.5, 2.0).unwrap();
        prop_assert!(mminus(&xy, &p) >= mminus(&x, &p) - slack);
    }

    #[test]
    fn positive_homogeneity(x in sym_matrix(6, 10.0), t in 0.0..8.0_f64, lo in 0.1..2.0_f64, spread in 1.0..4.0_f64) {
        let tx = x.scale_by(t);
        let p = PucciParams::new(lo, lo * spread).unwrap();
        let slack = TOL * tx.scale();
        prop_assert!((mminus(&tx, &p) - t * mminus(&x, &p)).abs() <= slack * spread);
        prop_assert!((mplus_01(&tx) - t * mplus_01(&x)).abs() <= slack);
        for k in 1..=x.n() {
            prop_assert!((pplus_k(&tx, k).unwrap() - t * pplus_k(&x, k).unwrap()).abs() <= slack);
        }
    }

    #[test]
    fn frames_never_beat_the_partial_trace(x in sym_matrix(6, 10.0), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 1..=x.n() {
            let best = pplus_k(&x, k).unwrap();
            for _ in 0..10 {
                let w = Frame::random(x.n(), k, &mut rng).unwrap();
                prop_assert!(subspace_trace(&x, &w).unwrap() <= best + TOL * x.scale());
            }
            let top = Frame::top_eigenvectors(&x, k).unwrap();
            prop_assert!((subspace_trace(&x, &top).unwrap() - best).abs() <= TOL * x.scale());
        }
    }

    #[test]
    fn matrix_json_round_trips(x in sym_matrix(5, 1e3)) {
        let text = serde_json::to_string(&x).unwrap();
        let back: SymMatrix = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, x);
    }
}

fn orthonormalize(mut vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for i in 0..vs.len() {
        for j in 0..i {
            let d: f64 = vs[i].iter().zip(&vs[j]).map(|(a, b)| a * b).sum();
            let vj = vs[j].clone();
            for (a, b) in vs[i].iter_mut().zip(&vj) {
                *a -= d * b;
            }
        }
        let len = vs[i].iter().map(|a| a * a).sum::<f64>().sqrt();
        vs[i].iter_mut().for_each(|a| *a /= len);
    }
    vs
}

#[test]
fn frames_approach_the_supremum_quadratically() {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let x = SymMatrix::random_uniform(5, 10.0, &mut rng);
    let best = pplus_k(&x, 2).unwrap();
    let top = Frame::top_eigenvectors(&x, 2).unwrap();
    let gap = |delta: f64, rng: &mut ChaCha8Rng| {
        let vs: Vec<Vec<f64>> = top
            .vectors()
            .iter()
            .map(|v| v.iter().map(|a| { let z: f64 = StandardNormal.sample(rng); a + delta * z }).collect())
            .collect();
        best - subspace_trace(&x, &Frame::new(orthonormalize(vs)).unwrap()).unwrap()
    };
    let coarse = gap(1e-2, &mut rng);
    let fine = gap(1e-3, &mut rng);
    assert!(coarse >= -TOL && fine >= -TOL);
    assert!(fine < coarse / 30.0, "gaps {coarse} and {fine} do not shrink quadratically");
    let random_best = (0..500)
        .map(|_| subspace_trace(&x, &Frame::random(5, 2, &mut rng).unwrap()).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(random_best <= best + TOL * x.scale());
}
