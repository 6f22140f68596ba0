//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any fail.

mod common;

use common::*;
use rand::Rng;
use skconverse::bounds::{bc_bound, bc_capacity_bound, ot_capacity_bound, secure_transmission_check, sk_capacity_formula, ComputeSlacks};
use skconverse::hyptest::beta_raw;
use skconverse::prob::mutual_information;
use skconverse::protosim::{
    check_bc_reduction, check_ot_reduction, empty_bc_protocol, fuzz, ideal_ot_protocol, measure_bc, measure_ot, ot_correlation, otp_bc_protocol,
    FuzzConfig, OtVariant,
};
use skconverse::smooth::{d_max_smooth, h_min_smooth};
use skconverse::{beta_epsilon, beta_epsilon_iid, Channel, JointDist, Var};
use std::time::Instant;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn c1_beta_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let n = r.gen_range(1..=6);
        let p = random_pmf(&mut r, n, 0.15);
        let q = random_pmf(&mut r, n, 0.15);
        let eps = [0.0, 0.1, 0.3][i % 3];
        let got = beta_raw(&p, &q, eps).unwrap().beta;
        worst = worst.max((got - beta_oracle(&p, &q, eps)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    (worst <= 1e-9 && secs < 5.0, format!("max |Δβ| = {worst:.2e} over 200 pairs, {secs:.2}s"))
}

fn c2_stein() -> Outcome {
    let start = Instant::now();
    let p = JointDist::from_probs("X", vec![0.7, 0.3]).unwrap();
    let q = JointDist::from_probs("X", vec![0.5, 0.5]).unwrap();
    let n = 10_000u64;
    let c = beta_epsilon_iid(&p, &q, n, 0.1).unwrap();
    let rate = -c.log2_beta / n as f64;
    let secs = start.elapsed().as_secs_f64();
    let err = (rate - 0.11870).abs();
    (err <= 0.01 && secs < 2.0, format!("−(1/n)log β = {rate:.5} at n = {n} (|Δ| = {err:.5}), {secs:.2}s"))
}

fn c3_no_dispersion() -> Outcome {
    // P uniform on 2 of 8 points, Q uniform on all 8: ratio 4 on supp P, D = 2
    let mut p = vec![0.0; 8];
    p[0] = 0.5;
    p[5] = 0.5;
    let q = vec![0.125; 8];
    let mut worst: f64 = 0.0;
    for eps in [0.0, 0.05, 0.1, 0.25, 0.5, 0.9] {
        let b = beta_raw(&p, &q, eps).unwrap();
        worst = worst.max((b.beta - (1.0 - eps) / 4.0).abs());
        worst = worst.max((b.neg_log2() - (2.0 - (1.0f64 - eps).log2())).abs());
    }
    (worst <= 1e-12, format!("max deviation from (1−ε)2^{{−D}} = {worst:.2e}"))
}

fn c4_data_processing() -> Outcome {
    let mut r = rng(104);
    let mut violations = 0;
    for _ in 0..100 {
        let n = r.gen_range(2..=6);
        let m = r.gen_range(1..=5);
        let (p, q) = (dist(random_pmf(&mut r, n, 0.1)), dist(random_pmf(&mut r, n, 0.1)));
        let w = Channel::new(vec![Var::range("X", n).unwrap()], vec![Var::range("Y", m).unwrap()], random_channel(&mut r, n, m)).unwrap();
        let (wp, wq) = (w.pushforward(&p).unwrap(), w.pushforward(&q).unwrap());
        let eb = r.gen_range(0.0..0.9);
        if beta_epsilon(&wp, &wq, eb).unwrap().beta < beta_epsilon(&p, &q, eb).unwrap().beta - 1e-9 {
            violations += 1;
        }
        let ed = r.gen_range(0.01..0.99);
        let before = d_max_smooth(&p, &q, ed).unwrap().value;
        let after = d_max_smooth(&wp, &wq, ed).unwrap().value;
        if after > before + 1e-9 {
            violations += 1;
        }
    }
    (violations == 0, format!("{violations} violations over 100 channels (β and D_max^ε)"))
}

fn c5_smooth_oracles() -> Outcome {
    let mut r = rng(105);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = r.gen_range(1..=8);
        let p = random_pmf(&mut r, n, 0.15);
        let q = random_pmf(&mut r, n, 0.15);
        let eh = r.gen_range(0.0..0.5);
        worst = worst.max((h_min_smooth(&dist(p.clone()), eh).unwrap().value - h_min_smooth_oracle(&p, eh)).abs());
        let ed = r.gen_range(0.01..0.99);
        let d = d_max_smooth(&dist(p.clone()), &dist(q.clone()), ed).unwrap().value;
        let o = d_max_smooth_oracle(&p, &q, ed);
        if d != o {
            worst = worst.max((d - o).abs());
        }
    }
    (worst <= 1e-6, format!("max deviation {worst:.2e} over 100 instances"))
}

fn c6_capacity() -> Outcome {
    let mut r = rng(106);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (a, b) = (r.gen_range(2..=4), r.gen_range(2..=4));
        let j = JointDist::new(vec![Var::range("X1", a).unwrap(), Var::range("X2", b).unwrap()], random_pmf(&mut r, a * b, 0.2)).unwrap();
        let (c, _) = sk_capacity_formula(&j, &[]).unwrap();
        worst = worst.max((c - mutual_information(&j, &["X1"], &["X2"]).unwrap()).abs());
    }
    let bits: Vec<Var> = (1..=3).map(|i| Var::range(format!("X{i}"), 2).unwrap()).collect();
    let mut pmf = vec![0.0; 8];
    pmf[0] = 0.5;
    pmf[7] = 0.5;
    let (same, _) = sk_capacity_formula(&JointDist::new(bits.clone(), pmf).unwrap(), &[]).unwrap();
    let (indep, _) = sk_capacity_formula(&JointDist::uniform(bits).unwrap(), &[]).unwrap();
    let pass = worst <= 1e-9 && same == 1.0 && indep.abs() <= 1e-12;
    (pass, format!("max |C − I| = {worst:.2e}; identical bits {same}; independent {indep:.2e}"))
}

fn c7_ot_bc() -> Outcome {
    let j = ot_correlation(1).unwrap();
    let ot = ot_capacity_bound(&j, "X1", "X2").unwrap();
    let bc = bc_capacity_bound(&j, "X1", "X2").unwrap();
    let mut worst: f64 = 0.0;
    for n in 1..=3u32 {
        let jn = ot_correlation(n).unwrap();
        for &(e, d1, d2, xi) in &[(0.0, 0.0, 0.0, 0.1), (0.05, 0.02, 0.01, 0.1), (0.1, 0.1, 0.1, 0.05)] {
            let got = bc_bound(&jn, "X1", "X2", e, d1, d2, xi).unwrap().value;
            let want = n as f64 + (1.0 / (1.0 - e - d1 - d2 - xi)).log2() + 2.0 * (1.0 / xi).log2();
            worst = worst.max((got - want).abs());
        }
    }
    let pass = ot == 1.0 && bc == 1.0 && worst <= 1e-9;
    (pass, format!("ot_capacity = {ot}, bc_capacity = {bc}; BC-to-OT form max deviation {worst:.2e}"))
}

fn c8_example2() -> Outcome {
    let n = 4;
    let short = 1usize << n;
    let long = 1usize << (2 * n);
    let mut pmf = vec![0.5 / short as f64; short];
    pmf.extend(std::iter::repeat_n(0.5 / long as f64, long));
    let y = JointDist::from_probs("Y", pmf).unwrap();
    let h = h_min_smooth(&y, 0.25).unwrap().value;
    let exact = (h - 9.0).abs() <= 1e-9;
    let at_least = h >= 2.0 * n as f64;
    let kappa = (2 * n - 3) as f64;
    let even = secure_transmission_check(&y, kappa, ComputeSlacks::even(0.0, 0.0, 0.45)).unwrap();
    // any admissible split of the budget μ = 0.45 with ε = δ = 0
    let mut fails_somewhere = !even.pass;
    let steps = 40;
    for a in 1..steps {
        for b in 1..steps - a {
            let c = steps - a - b;
            let (two_xi, zeta, eta) = (0.45 * a as f64 / steps as f64, 0.45 * b as f64 / steps as f64, 0.45 * c as f64 / steps as f64);
            let s = ComputeSlacks { eps: 0.0, delta: 0.0, xi: two_xi / 2.0, zeta, eta };
            if !secure_transmission_check(&y, kappa, s).unwrap().pass {
                fails_somewhere = true;
            }
        }
    }
    let pass = exact && at_least && fails_somewhere;
    (
        pass,
        format!(
            "H_min^1/4 = {h:.4} (=9: {exact}, ≥2n: {at_least}); κ = {kappa}: even split lhs {:.3} vs rhs {:.3}, check fails for some split: {fails_somewhere}",
            even.lhs, even.rhs
        ),
    )
}

fn c9_fuzz() -> Outcome {
    let start = Instant::now();
    let s = fuzz(&FuzzConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = s.instances == 500 && s.clean() && secs < 60.0;
    (
        pass,
        format!(
            "{} protocols ({} checked at η = 0.05, {} skipped): converse {} / acceptance-region test {} / criteria relation {} violations, {secs:.1}s",
            s.instances, s.converse_checked, s.skipped, s.converse_violations, s.lemma1_violations, s.prop1_violations
        ),
    )
}

fn c10_reductions() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for l in 1..=2 {
        let (j, ot) = ideal_ot_protocol(l).unwrap();
        let m = measure_ot(&j, &ot).unwrap();
        ok &= m.epsilon == 0.0 && m.delta1 == 0.0 && m.delta2 == 0.0;
        for v in [OtVariant::One, OtVariant::Two] {
            let r = check_ot_reduction(&j, &ot, v).unwrap();
            ok &= r.pass && r.key.key_len_bits == l as f64;
            notes.push(format!("OT l={l} {v:?}: ε′={:.1e}≤{:.1e}", r.key.epsilon, r.claim));
        }
    }
    for (name, (j, bc)) in [("otp", otp_bc_protocol().unwrap()), ("empty", empty_bc_protocol().unwrap())] {
        let m = measure_bc(&j, &bc).unwrap();
        let r = check_bc_reduction(&j, &bc).unwrap();
        ok &= r.pass;
        notes.push(format!("BC {name} (δ2={}): ε_rec={:.1e}≤{:.1e}, δ_sec={:.1e}≤{:.1e}", m.delta2, r.key.eps_rec, r.claim_rec, r.key.delta_sec, r.claim_sec));
    }
    (ok, notes.join("; "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("beta oracle equivalence", c1_beta_oracle),
        ("Stein exponent", c2_stein),
        ("no-dispersion exactness", c3_no_dispersion),
        ("data processing", c4_data_processing),
        ("smooth-entropy oracles", c5_smooth_oracles),
        ("capacity formula", c6_capacity),
        ("OT/BC structural bounds", c7_ot_bc),
        ("secure transmission example", c8_example2),
        ("converse fuzzing", c9_fuzz),
        ("reduction lemmas", c10_reductions),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = f();
        failed += usize::from(!pass);
        println!("criterion {:>2} {name}: {} ({detail})", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
