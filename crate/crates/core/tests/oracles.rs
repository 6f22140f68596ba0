mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use skconverse::hyptest::{beta_raw, np_tail_bound, renyi_beta_bound};
use skconverse::prob::{divergence, mutual_information, tv_distance, Divergence};
use skconverse::smooth::{d_max, d_max_smooth, h_min, h_min_smooth};
use skconverse::structure::{enum_partitions, mcf, mss, Partition, MSS_TOL};
use skconverse::{beta_epsilon, Channel, JointDist, MassFunction, Var};

#[test]
fn beta_matches_enumeration() {
    let mut r = rng(1);
    for _ in 0..300 {
        let n = r.gen_range(1..=7);
        let p = random_pmf(&mut r, n, 0.2);
        let q = random_pmf(&mut r, n, 0.2);
        let eps = r.gen_range(0.0..0.9);
        let got = beta_raw(&p, &q, eps).unwrap().beta;
        let want = beta_oracle(&p, &q, eps);
        assert!((got - want).abs() < 1e-9, "p={p:?} q={q:?} eps={eps}: {got} vs {want}");
    }
}

#[test]
fn beta_certificate_is_a_feasible_test() {
    let mut r = rng(2);
    for _ in 0..100 {
        let n = r.gen_range(2..=6);
        let p = dist(random_pmf(&mut r, n, 0.2));
        let q = dist(random_pmf(&mut r, n, 0.2));
        let eps = r.gen_range(0.0..0.5);
        let c = beta_epsilon(&p, &q, eps).unwrap();
        let t = c.test(n);
        let pacc: f64 = t.iter().zip(p.pmf()).map(|(a, b)| a * b).sum();
        let qacc: f64 = t.iter().zip(q.pmf()).map(|(a, b)| a * b).sum();
        assert!(pacc >= 1.0 - eps - 1e-12);
        assert!((qacc - c.beta).abs() < 1e-12);
    }
}

#[test]
fn smooth_entropies_match_bisection() {
    let mut r = rng(3);
    for _ in 0..200 {
        let n = r.gen_range(1..=8);
        let p = random_pmf(&mut r, n, 0.2);
        let q = random_pmf(&mut r, n, 0.2);
        let eh = r.gen_range(0.0..0.5);
        let h = h_min_smooth(&dist(p.clone()), eh).unwrap().value;
        let ho = h_min_smooth_oracle(&p, eh);
        assert!((h - ho).abs() < 1e-6, "{h} vs {ho}");
        let ed = r.gen_range(0.01..0.99);
        let d = d_max_smooth(&dist(p.clone()), &dist(q.clone()), ed).unwrap().value;
        let dor = d_max_smooth_oracle(&p, &q, ed);
        assert!((d == dor) || (d - dor).abs() < 1e-6, "{d} vs {dor}");
    }
}

#[test]
fn tail_bound_is_valid_upper_bound() {
    // both closed-form bounds sit above the exact −log β_ε
    let mut r = rng(4);
    for _ in 0..100 {
        let n = r.gen_range(2..=6);
        let p = dist(random_pmf(&mut r, n, 0.0));
        let q = dist(random_pmf(&mut r, n, 0.0));
        let eps = r.gen_range(0.0..0.5);
        let nlb = beta_epsilon(&p, &q, eps).unwrap().neg_log2();
        let t = np_tail_bound(&p, &q, eps, None).unwrap();
        if !t.infeasible {
            assert!(nlb <= t.value + 1e-9, "{nlb} > {}", t.value);
        }
        let rb = renyi_beta_bound(&p, &q, eps, (1.0 - eps) / 2.0, 1.5).unwrap();
        assert!(nlb <= rb + 1e-9, "{nlb} > {rb}");
    }
}

#[test]
fn partition_counts_are_bell_numbers() {
    // B(m) − 1 partitions with at least two blocks
    for (m, bell) in [(2, 2), (3, 5), (4, 15), (5, 52), (6, 203)] {
        assert_eq!(enum_partitions(m, 2).unwrap().len(), bell - 1);
    }
}

#[test]
fn mcf_and_mss_of_block_diagonal() {
    // block-diagonal joint: components {0,1}×{0} and {2}×{1,2}
    let vars = vec![Var::range("A", 3).unwrap(), Var::range("B", 3).unwrap()];
    let j = JointDist::new(vars, vec![0.2, 0.0, 0.0, 0.3, 0.0, 0.0, 0.0, 0.25, 0.25]).unwrap();
    let (la, lb) = mcf(&j, "A", "B").unwrap();
    assert_eq!(la.labels, vec![0, 0, 1]);
    assert_eq!(lb.labels, vec![0, 1, 1]);
    let s = mss(&j, "A", "B", MSS_TOL).unwrap();
    assert_eq!(s.labels, vec![0, 0, 1]);
}

fn pmf_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_filter_map("all zero", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-6).then(|| w.into_iter().map(|x| x / s).collect())
    })
}

fn pq_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|n| (pmf_strategy(n), pmf_strategy(n)))
}

proptest! {
    #[test]
    fn beta_in_unit_interval_and_monotone((p, q) in pq_strategy(), e1 in 0.0f64..0.99, e2 in 0.0f64..0.99) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let b_lo = beta_raw(&p, &q, lo).unwrap().beta;
        let b_hi = beta_raw(&p, &q, hi).unwrap().beta;
        prop_assert!((0.0..=1.0 + 1e-12).contains(&b_lo));
        prop_assert!(b_hi <= b_lo + 1e-12);
    }

    #[test]
    fn beta_of_identical_hypotheses(p in (1usize..=6).prop_flat_map(pmf_strategy), eps in 0.0f64..0.99) {
        let b = beta_raw(&p, &p, eps).unwrap().beta;
        prop_assert!((b - (1.0 - eps)).abs() < 1e-9);
    }

    #[test]
    fn neg_log_beta_below_kl_plus_slack((p, q) in pq_strategy(), eps in 0.01f64..0.9) {
        // −log β_ε ≤ (D(P‖Q) + h(ε)) / (1 − ε)
        let pd = dist(p.clone());
        let qd = dist(q.clone());
        let kl = divergence(&pd, &qd, Divergence::Kl).unwrap();
        prop_assume!(kl.is_finite());
        let h = skconverse::numeric::binary_entropy(eps);
        let nlb = beta_raw(&p, &q, eps).unwrap().neg_log2();
        prop_assert!(nlb <= (kl + h) / (1.0 - eps) + 1e-9);
    }

    #[test]
    fn tv_is_a_metric((p, q) in pq_strategy(), seed in 0u64..1000) {
        let n = p.len();
        let mut r = rng(seed);
        let s = random_pmf(&mut r, n, 0.0);
        let (a, b, c) = (dist(p), dist(q), dist(s));
        let ab = tv_distance(&a, &b).unwrap();
        prop_assert!((ab - tv_distance(&b, &a).unwrap()).abs() < 1e-15);
        prop_assert!(ab <= tv_distance(&a, &c).unwrap() + tv_distance(&c, &b).unwrap() + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
    }

    #[test]
    fn smoothing_is_monotone(p in (1usize..=8).prop_flat_map(pmf_strategy), e1 in 0.0f64..0.49, e2 in 0.0f64..0.49) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let d = dist(p);
        let h0 = h_min(&d).unwrap();
        let a = h_min_smooth(&d, lo).unwrap().value;
        let b = h_min_smooth(&d, hi).unwrap().value;
        prop_assert!(h0 <= a + 1e-12 && a <= b + 1e-12);
    }

    #[test]
    fn smooth_dmax_below_dmax((p, q) in pq_strategy(), eps in 0.01f64..0.99) {
        let (a, b) = (dist(p), dist(q));
        let d = d_max(&a, &b).unwrap();
        let ds = d_max_smooth(&a, &b, eps).unwrap();
        prop_assert!(ds.value <= d + 1e-12);
        prop_assert!(ds.witness.total_mass() >= 1.0 - eps - 1e-9);
        prop_assert!(ds.witness.pmf().iter().zip(a.pmf()).all(|(w, p)| *w <= p + 1e-15));
    }

    #[test]
    fn mutual_information_symmetric(w in pmf_strategy(6)) {
        let j = JointDist::new(vec![Var::range("A", 2).unwrap(), Var::range("B", 3).unwrap()], w).unwrap();
        let ab = mutual_information(&j, &["A"], &["B"]).unwrap();
        let ba = mutual_information(&j, &["B"], &["A"]).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn conditional_product_factorizes(w in pmf_strategy(8)) {
        let j = JointDist::new((1..=3).map(|i| Var::range(format!("X{i}"), 2).unwrap()).collect(), w).unwrap();
        for pi in enum_partitions(3, 2).unwrap() {
            let q = j.conditional_product(&pi, &[]).unwrap();
            prop_assert!((q.total_mass() - 1.0).abs() < 1e-12);
            prop_assert!(q.factorization_gap(&pi, &[]).unwrap() < 1e-12);
        }
    }

    #[test]
    fn beta_data_processing((p, q) in pq_strategy(), seed in 0u64..1000, eps in 0.0f64..0.9) {
        let n = p.len();
        let mut r = rng(seed);
        let m = r.gen_range(1..=4);
        let rows = random_channel(&mut r, n, m);
        let w = Channel::new(vec![Var::range("X", n).unwrap()], vec![Var::range("Y", m).unwrap()], rows).unwrap();
        let (a, b) = (dist(p), dist(q));
        let (wa, wb) = (w.pushforward(&a).unwrap(), w.pushforward(&b).unwrap());
        prop_assert!(beta_epsilon(&wa, &wb, eps).unwrap().beta >= beta_epsilon(&a, &b, eps).unwrap().beta - 1e-9);
    }

    #[test]
    fn partitions_round_trip(m in 2usize..=6) {
        for pi in enum_partitions(m, 2).unwrap() {
            let text = pi.to_string();
            prop_assert_eq!(Partition::parse(&text).unwrap(), pi);
        }
    }
}
