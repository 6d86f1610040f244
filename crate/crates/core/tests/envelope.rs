use proptest::prelude::*;

use pluripot::envelope::{extremal_function, psh_envelope, CompactSet};
use pluripot::ma::monge_ampere;
use pluripot::{make_model, ToricModel};

/// Largest function below `u` that is convex with slopes in `[0, d]`: the
/// minimum over chords between two nodes and over the two rays allowed by
/// the slope bounds.
fn minorant(model: &ToricModel, u: &[f64]) -> Vec<f64> {
    let x = model.axis();
    let d = model.degree_f64();
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut best = f64::INFINITY;
            for a in 0..=i {
                best = best.min(u[a] + d * (x[i] - x[a]));
                for b in i..n {
                    if b > a {
                        let s = (x[i] - x[a]) / (x[b] - x[a]);
                        best = best.min((1.0 - s) * u[a] + s * u[b]);
                    }
                }
            }
            for b in i..n {
                best = best.min(u[b]);
            }
            best
        })
        .collect()
}

#[test]
fn tent_is_cut_down_to_the_minorant() {
    let m = make_model(1, 1, 16.0, 128).unwrap();
    let u: Vec<f64> = m
        .axis()
        .iter()
        .zip(m.reference_values())
        .map(|(&t, r)| r + (1.0 - (t - 1.0).abs()).max(0.0))
        .collect();
    let env = psh_envelope(&m, &u).unwrap();
    let oracle = minorant(&m, &u);
    for (i, (e, o)) in env.values().iter().zip(&oracle).enumerate() {
        assert!((e - o).abs() < 1e-12, "node {i}: {e} vs {o}");
    }
    let inside = m.node_at(1.0).unwrap();
    assert!(env.values()[inside] < u[inside] - 0.1);
}

#[test]
fn envelope_of_the_reference_is_the_reference() {
    for m in [make_model(1, 1, 20.0, 256).unwrap(), make_model(2, 1, 20.0, 16).unwrap()] {
        let env = psh_envelope(&m, m.reference_values()).unwrap();
        assert!(env.sup_distance(&m.reference()) < 1e-12);
    }
}

#[test]
fn larger_sets_give_smaller_extremal_functions() {
    let m = make_model(1, 1, 20.0, 512).unwrap();
    let v = vec![0.0; m.len()];
    let small = extremal_function(&m, &CompactSet::slab(&m, -1.0, 1.0), &v).unwrap();
    let large = extremal_function(&m, &CompactSet::slab(&m, -3.0, 2.0), &v).unwrap();
    let whole = extremal_function(&m, &CompactSet::whole(&m), &v).unwrap();
    assert!(large.values().iter().zip(small.values()).all(|(l, s)| l <= s));
    assert!(whole.sup_distance(&m.reference()) < 1e-12);
}

fn noise_1d() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 33)
}

fn perturbed(m: &ToricModel, noise: &[f64]) -> Vec<f64> {
    m.reference_values().iter().zip(noise).map(|(r, e)| r + e).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn envelope_matches_minorant(noise in noise_1d()) {
        let m = make_model(1, 2, 16.0, 32).unwrap();
        let u = perturbed(&m, &noise);
        let env = psh_envelope(&m, &u).unwrap();
        for (e, o) in env.values().iter().zip(minorant(&m, &u)) {
            prop_assert!((e - o).abs() < 1e-10);
        }
    }

    #[test]
    fn envelope_is_idempotent_below_and_equivariant(noise in noise_1d(), c in -5.0..5.0f64) {
        let m = make_model(1, 1, 16.0, 32).unwrap();
        let u = perturbed(&m, &noise);
        let env = psh_envelope(&m, &u).unwrap();
        prop_assert!(env.values().iter().zip(&u).all(|(e, v)| *e <= v + 1e-12));
        let again = psh_envelope(&m, env.values()).unwrap();
        prop_assert!(again.sup_distance(&env) < 1e-12);
        let shifted: Vec<f64> = u.iter().map(|v| v + c).collect();
        let env_c = psh_envelope(&m, &shifted).unwrap();
        prop_assert!(env_c.sup_distance(&env.shifted(c)) < 1e-10);
    }

    #[test]
    fn envelope_is_monotone(noise in noise_1d(), lift in prop::collection::vec(0.0..1.0f64, 33)) {
        let m = make_model(1, 1, 16.0, 32).unwrap();
        let u = perturbed(&m, &noise);
        let w: Vec<f64> = u.iter().zip(&lift).map(|(a, b)| a + b).collect();
        let (pu, pw) = (psh_envelope(&m, &u).unwrap(), psh_envelope(&m, &w).unwrap());
        prop_assert!(pu.values().iter().zip(pw.values()).all(|(a, b)| *a <= b + 1e-12));
    }

    #[test]
    fn planar_envelope_is_idempotent_and_measure_ignores_constants(
        noise in prop::collection::vec(-1.0..1.0f64, 289),
        c in -5.0..5.0f64,
    ) {
        let m = make_model(2, 1, 16.0, 16).unwrap();
        let u: Vec<f64> = m.reference_values().iter().zip(&noise).map(|(r, e)| r + e).collect();
        let env = psh_envelope(&m, &u).unwrap();
        prop_assert!(env.values().iter().zip(&u).all(|(e, v)| *e <= v + 1e-12));
        prop_assert!(psh_envelope(&m, env.values()).unwrap().sup_distance(&env) < 1e-10);
        let a = monge_ampere(&m, &env).unwrap();
        let b = monge_ampere(&m, &env.shifted(c)).unwrap();
        prop_assert!(a.l1_distance(&b) < 1e-10);
        prop_assert!((a.total() - 1.0).abs() < 1e-10);
    }
}
