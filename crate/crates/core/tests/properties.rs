mod common;

use guessbound::bounds::{cor_bound, nu_upper, prop1_rhs, proof_chain_terms, thm1_bound};
use guessbound::dist::entropy;
use guessbound::encoders::{eval_case2, induced_joint_xs, map_estimator_case2};
use guessbound::harness::instance::{load_instance, save_instance, InstanceFile};
use guessbound::search::{exact_case2, local_search_case2, partition_count, partitions_up_to_k, DEFAULT_BUDGET};
use guessbound::{Encoder, JointDist};
use proptest::prelude::*;

use common::*;

/// Positive weights, renormalized; a zero entry shows up with some probability.
fn table(xmax: usize, ymax: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=xmax, 1..=ymax).prop_flat_map(|(x, y)| {
        prop::collection::vec(prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.01f64..1.0], y), x)
            .prop_filter("non-zero mass", |rows| rows.iter().flatten().sum::<f64>() > 0.0)
            .prop_map(|rows| {
                let total: f64 = rows.iter().flatten().sum();
                rows.into_iter().map(|r| r.into_iter().map(|v| v / total).collect()).collect()
            })
    })
}

fn joint(xmax: usize, ymax: usize) -> impl Strategy<Value = JointDist> {
    table(xmax, ymax).prop_map(|rows| JointDist::from_rows(&rows).unwrap())
}

fn joint_and_map(xmax: usize, ymax: usize, lmax: usize) -> impl Strategy<Value = (JointDist, Encoder)> {
    (joint(xmax, ymax), 1..=lmax).prop_flat_map(|(j, l)| {
        let y = j.y_size();
        (Just(j), prop::collection::vec(0..l, y).prop_map(move |m| Encoder::new(m, l).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn marginals_are_consistent(j in joint(5, 5)) {
        let px = j.marginal_x();
        let py = j.marginal_y();
        prop_assert!((px.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((py.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((j.p_max() - px.iter().cloned().fold(0.0, f64::max)).abs() < 1e-15);
    }

    #[test]
    fn mutual_information_is_symmetric_and_bounded(j in joint(5, 5)) {
        let mi = j.mutual_information().bits();
        prop_assert!(mi >= 0.0);
        prop_assert!((mi - j.transpose().mutual_information().bits()).abs() < 1e-12);
        prop_assert!(mi <= entropy(&j.marginal_x()).min(entropy(&j.marginal_y())) + 1e-12);
        prop_assert!((mi - mi_oracle(&j.rows()).max(0.0)).abs() < 1e-9);
    }

    #[test]
    fn merging_columns_conserves_mass_and_loses_information((j, phi) in joint_and_map(4, 6, 4)) {
        let xs = induced_joint_xs(&j, &phi).unwrap();
        prop_assert!((xs.total_mass() - 1.0).abs() < 1e-12);
        let merged = merge_columns(&j.rows(), &phi);
        for (a, b) in xs.rows().iter().flatten().zip(merged.iter().flatten()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!(xs.mutual_information().bits() <= j.mutual_information().bits() + 1e-12);
    }

    #[test]
    fn coarser_encoders_never_help((j, phi) in joint_and_map(4, 6, 4)) {
        // Merging two blocks of phi gives a coarser encoder.
        let coarse = Encoder::new(phi.map().iter().map(|&b| b.min(1)).collect(), 2.min(phi.range_size())).unwrap();
        prop_assert!(phi.refines(&coarse));
        let fine = map_estimator_case2(&induced_joint_xs(&j, &phi).unwrap()).1.p_correct;
        let rough = map_estimator_case2(&induced_joint_xs(&j, &coarse).unwrap()).1.p_correct;
        prop_assert!(rough <= fine + 1e-12);
        let mi_f = induced_joint_xs(&j, &phi).unwrap().mutual_information().bits();
        let mi_c = induced_joint_xs(&j, &coarse).unwrap().mutual_information().bits();
        prop_assert!(mi_c <= mi_f + 1e-12);
    }

    #[test]
    fn map_beats_every_estimator((j, phi) in joint_and_map(3, 4, 3)) {
        let map = map_estimator_case2(&induced_joint_xs(&j, &phi).unwrap()).1.p_correct;
        for psi in all_estimators(1, phi.range_size(), j.x_size()) {
            prop_assert!(eval_case2(&j, &phi, &psi).unwrap().p_correct <= map + 1e-12);
        }
    }

    #[test]
    fn positive_part_markov_step_holds((j, phi) in joint_and_map(4, 5, 3), eta in 0.01f64..3.0, frac in 0.01f64..0.99) {
        prop_assume!(j.p_max() < 1.0);
        let nu = frac * nu_upper(j.p_max());
        let c = proof_chain_terms(&j, &phi, eta, nu).unwrap();
        prop_assert!(c.step("markov-positive").unwrap().holds);
        prop_assert!(c.step("spectrum-bound").unwrap().holds);
        prop_assert!(c.exact_pc <= c.prop1_rhs + 1e-9);
    }

    #[test]
    fn theorem_and_corollary_hold_per_encoder((j, phi) in joint_and_map(4, 5, 3), frac in 0.001f64..0.999) {
        prop_assume!(j.p_max() < 1.0);
        let upper = nu_upper(j.p_max());
        let nu = frac * upper;
        let r = thm1_bound(&j, &phi, nu).unwrap();
        prop_assert!(r.exact_pc.unwrap() <= r.thm1_bound + 1e-9);
        if nu < upper.min(1.0) {
            let c = cor_bound(&j, &phi, nu).unwrap();
            prop_assert!(c.thm1_bound <= c.cor_bound.unwrap() + 1e-12);
        }
    }

    #[test]
    fn prop1_rhs_grows_with_message_size((j, phi) in joint_and_map(4, 5, 3), eta in 0.01f64..5.0) {
        let mut prev = 0.0;
        for m in 1..=4 {
            let r = prop1_rhs(&j, &phi, m, eta).unwrap();
            prop_assert!(r >= prev - 1e-15);
            prev = r;
        }
    }

    #[test]
    fn instance_files_round_trip(j in joint(4, 4)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i.json");
        save_instance(&InstanceFile::from_joint(&j), &path).unwrap();
        let back = load_instance(&path).unwrap().joint().unwrap();
        prop_assert_eq!(back.x_labels(), j.x_labels());
        for (a, b) in back.rows().iter().flatten().zip(j.rows().iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn local_search_never_beats_exact(j in joint(4, 6), l in 1usize..=3, seed in any::<u64>()) {
        let exact = exact_case2(&j, l, DEFAULT_BUDGET).unwrap().best_value;
        let local = local_search_case2(&j, l, 3, seed).unwrap();
        prop_assert!(local.best_value <= exact + 1e-12);
        prop_assert_eq!(&local, &local_search_case2(&j, l, 3, seed).unwrap());
    }
}

#[test]
fn every_map_has_exactly_one_canonical_partition() {
    for n in 1..=6 {
        for k in 1..=4 {
            let parts: Vec<Encoder> = partitions_up_to_k(n, k).collect();
            assert_eq!(parts.len() as u128, partition_count(n, k));
            let mut seen: Vec<Vec<usize>> = parts.iter().map(|p| p.map().to_vec()).collect();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), parts.len());
            for phi in all_maps(n, k) {
                let c = phi.canonical();
                assert!(parts.iter().any(|p| p.map() == c.map()), "{:?}", phi.map());
            }
        }
    }
}

#[test]
fn plain_markov_step_has_counterexample() {
    // The information density is negative off the diagonal, so the tail mass
    // at ν = 0.5 exceeds I/ν even though the final bound still holds.
    let j = JointDist::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
    let c = proof_chain_terms(&j, &Encoder::identity(2), 0.5, 0.5).unwrap();
    assert!((c.spectrum_tail - 0.8).abs() < 1e-12);
    assert!(c.markov_bound < 0.56);
    assert!(!c.step("markov").unwrap().holds);
    assert!(c.exact_pc <= thm1_bound(&j, &Encoder::identity(2), 0.5).unwrap().thm1_bound);
}

#[test]
fn local_search_usually_finds_the_optimum() {
    let instances = dirichlet_instances(100, 0x10CA1, 4, 4, 6);
    let hits = instances
        .iter()
        .filter(|j| {
            let exact = exact_case2(j, 3, DEFAULT_BUDGET).unwrap().best_value;
            let local = local_search_case2(j, 3, 10, 1).unwrap().best_value;
            (exact - local).abs() <= 1e-12
        })
        .count();
    assert!(hits >= 90, "local search matched exact on {hits}/100");
}
