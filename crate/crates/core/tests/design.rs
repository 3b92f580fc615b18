use effortnet::design::{
    check_stability, design_reward_scheme, stability_lp, DesignOptions, Guarantee,
};
use effortnet::equilibrium::{solve_equilibrium_tree, uniqueness_certificate_tree, Verdict};
use effortnet::welfare::optimal_effort;
use effortnet::{Attenuation, EpParams, NetworkTopology, ProductivityModel, RewardScheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> NetworkTopology {
    let parents: Vec<Option<usize>> = (0..n)
        .map(|i| (i > 0).then(|| rng.random_range(0..i)))
        .collect();
    NetworkTopology::from_parents(&parents).unwrap()
}

#[test]
fn per_node_lp_matches_closed_form() {
    // stars isolate a single node's subproblem: the root with k leaves
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut stable = 0;
    for _ in 0..500 {
        let k = rng.random_range(1..8);
        let net = NetworkTopology::flat(k + 1);
        let p = EpParams::new(
            rng.random_range(0.0..3.0),
            rng.random_range(0.0..1.0),
            Attenuation::One,
        )
        .unwrap();
        let mut x = vec![1.0; k + 1];
        x[0] = rng.random();
        let a = check_stability(&net, &p, &x).unwrap();
        let l = stability_lp(&net, &p, &x).unwrap();
        assert_eq!(a.stable, l.stable, "{p:?} {x:?}");
        stable += a.stable as usize;
    }
    assert!(stable > 50 && stable < 450, "{stable}");
}

#[test]
fn flat_binary_optimum_round_trips() {
    let net = NetworkTopology::balanced(2, 1);
    let p = EpParams::new(0.8, 0.0, Attenuation::One).unwrap();
    let opt = optimal_effort(&net, &ProductivityModel::Ep(p), &Default::default()).unwrap();
    let r = check_stability(&net, &p, &opt.x).unwrap();
    let h = r.h.expect("optimum is stable for beta <= 1");
    let eq = solve_equilibrium_tree(&net, &p, &h).unwrap();
    for (a, b) in eq.x.iter().zip(opt.x.iter()) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn stable_schemes_are_certified_unique() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    for _ in 0..300 {
        let n = rng.random_range(2..12);
        let net = random_tree(&mut rng, n);
        let p = EpParams::new(
            rng.random_range(0.2..2.0),
            rng.random_range(0.0..1.0),
            Attenuation::One,
        )
        .unwrap();
        let x: Vec<f64> = (0..n)
            .map(|i| {
                if net.is_leaf(i) {
                    1.0
                } else {
                    rng.random_range(0.5..1.0)
                }
            })
            .collect();
        let r = check_stability(&net, &p, &x).unwrap();
        let Some(h) = r.h else { continue };
        checked += 1;
        let eq = solve_equilibrium_tree(&net, &p, &h).unwrap();
        for (a, b) in eq.x.iter().zip(&x) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(!eq.multiplicity());
        // random interior profiles never exhaust a node's budget exactly
        assert_eq!(
            uniqueness_certificate_tree(&net, &p, &h).unwrap().verdict,
            Verdict::Unique
        );
        for b in &r.binding {
            assert!(b.output_slack.abs() <= 1e-9);
            assert!(b.budget_slack >= -1e-12);
        }
    }
    assert!(checked > 20, "{checked}");
}

#[test]
fn designed_schemes_respect_budgets_and_beat_no_sharing() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let n = rng.random_range(2..9);
        let net = random_tree(&mut rng, n);
        let p = EpParams::new(
            rng.random_range(0.2..3.0),
            rng.random_range(0.0..0.5),
            Attenuation::One,
        )
        .unwrap();
        let opts = DesignOptions {
            candidates: 50,
            ..Default::default()
        };
        let r = design_reward_scheme(&net, &p, &opts).unwrap();
        for i in 0..n {
            assert!(r.h.row_sum(i) <= p.share_budget() + 1e-12);
        }
        let base = solve_equilibrium_tree(&net, &p, &RewardScheme::zero(n)).unwrap();
        match r.guarantee {
            Guarantee::OptimalSupported => assert!((r.poa() - 1.0).abs() < 1e-6),
            Guarantee::HeuristicBestFound { .. } => assert!(r.achieved_so >= base.social_output()),
            Guarantee::BalancedBounded { .. } => {}
        }
        assert!(r.achieved_so <= r.so_optimal + 1e-9);
    }
}
