use skconverse::protosim::*;
use skconverse::structure::Partition;
use skconverse::{JointDist, Var};

fn bits2(pmf: Vec<f64>) -> JointDist {
    JointDist::new(vec![Var::range("X1", 2).unwrap(), Var::range("X2", 2).unwrap()], pmf).unwrap()
}

fn copy_key_protocol(j: &JointDist) -> Protocol {
    let mut b = ProtocolBuilder::new(j);
    let p1 = b.party(&["X1"], vec![1.0]).unwrap();
    let p2 = b.party(&["X2"], vec![1.0]).unwrap();
    b.output_det(p1, 2, |o, _, _| o).unwrap();
    b.output_det(p2, 2, |o, _, _| o).unwrap();
    b.build().unwrap()
}

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

#[test]
fn perfect_shared_bit_key() {
    let j = bits2(vec![0.5, 0.0, 0.0, 0.5]);
    let r = eval_sk_security(&j, &copy_key_protocol(&j)).unwrap();
    assert_eq!(r.epsilon, 0.0);
    assert_eq!(r.key_len_bits, 1.0);
    assert!(r.prop1_holds(1e-12));
}

#[test]
fn independent_bits_give_half() {
    // P(k1,k2) = 1/4 everywhere against 1/2 on the diagonal:
    // ½(2·|1/4 − 1/2| + 2·1/4) = 1/2
    let j = bits2(vec![0.25; 4]);
    let r = eval_sk_security(&j, &copy_key_protocol(&j)).unwrap();
    close(r.epsilon, 0.5, 1e-15);
    close(r.eps_rec, 0.5, 1e-15);
    close(r.delta_sec, 0.0, 1e-15);
    assert!(r.prop1_holds(1e-12));
}

#[test]
fn constant_keys() {
    let j = bits2(vec![0.25; 4]);
    let mut b = ProtocolBuilder::new(&j);
    let p1 = b.party(&["X1"], vec![1.0]).unwrap();
    let p2 = b.party(&["X2"], vec![1.0]).unwrap();
    b.output_det(p1, 1, |_, _, _| 0).unwrap();
    b.output_det(p2, 1, |_, _, _| 0).unwrap();
    let p = b.build().unwrap();
    let r = eval_sk_security(&j, &p).unwrap();
    assert_eq!(r.epsilon, 0.0);
    assert_eq!(r.key_len_bits, 0.0);
    let c = check_converse(&j, &p, 0.05).unwrap();
    assert!(c.pass);
}

#[test]
fn converse_on_perfect_key() {
    // β_{0.05}: keep mass 0.95 of the diagonal at Q/P = 1/2, so β = 0.475
    let j = bits2(vec![0.5, 0.0, 0.0, 0.5]);
    let c = check_converse(&j, &copy_key_protocol(&j), 0.05).unwrap();
    let expect = -(0.475f64).log2() + 2.0 * 20f64.log2();
    close(c.bound.value, expect, 1e-9);
    assert!(c.pass);
    close(c.slack, expect - 1.0, 1e-9);
}

#[test]
fn lemma1_on_perfect_key() {
    let j = bits2(vec![0.5, 0.0, 0.0, 0.5]);
    let pi = Partition::singletons(2);
    let r = lemma1_test(&j, &copy_key_protocol(&j), &pi, 0.05).unwrap();
    // under Q the keys are independent uniform bits: Q(A) = Q(diagonal) = 1/2
    close(r.lambda, 1.0 - 2.0 * 20f64.log2(), 1e-12);
    close(r.type2, 0.5, 1e-15);
    close(r.type2_bound, 0.5 * 400.0, 1e-9);
    assert_eq!(r.type1, 0.0);
    assert!(r.pass);
}

#[test]
fn lemma1_trivial_key() {
    let j = bits2(vec![0.1, 0.2, 0.3, 0.4]);
    let mut b = ProtocolBuilder::new(&j);
    let p1 = b.party(&["X1"], vec![1.0]).unwrap();
    let p2 = b.party(&["X2"], vec![1.0]).unwrap();
    b.output_det(p1, 1, |_, _, _| 0).unwrap();
    b.output_det(p2, 1, |_, _, _| 0).unwrap();
    let r = lemma1_test(&j, &b.build().unwrap(), &Partition::singletons(2), 0.1).unwrap();
    assert!(r.lambda < 0.0);
    assert_eq!(r.type1, 0.0);
    close(r.type2, 1.0, 1e-15);
    assert!(r.pass);
}

#[test]
fn independence_preserved_by_exchange() {
    let j = bits2(vec![0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4]);
    let pi = Partition::singletons(2);
    let r = interactive_independence_check(&j, &copy_key_protocol(&j), &pi).unwrap();
    assert!(r.pass);
    assert_eq!(r.transcripts, 1);

    let mut b = ProtocolBuilder::new(&j);
    let p1 = b.party(&["X1"], vec![1.0]).unwrap();
    let p2 = b.party(&["X2"], vec![0.5, 0.5]).unwrap();
    b.round();
    b.message_det(p1, 2, |o, _, _| o).unwrap();
    b.message_det(p2, 2, |o, r, t| o ^ r ^ t[0]).unwrap();
    b.output_det(p1, 2, |o, _, _| o).unwrap();
    b.output_det(p2, 2, |o, _, t| o ^ t[0]).unwrap();
    let r = interactive_independence_check(&j, &b.build().unwrap(), &pi).unwrap();
    assert!(r.pass);
    assert_eq!(r.transcripts, 4);

    let corr = bits2(vec![0.5, 0.0, 0.0, 0.5]);
    assert!(interactive_independence_check(&corr, &copy_key_protocol(&corr), &pi).is_err());
}

#[test]
fn schedule_violations_rejected() {
    let j = bits2(vec![0.25; 4]);
    let mut p = copy_key_protocol(&j);
    let msg = |sender| MessageSpec { sender, alphabet: skconverse::Alphabet::range(2).unwrap(), table: vec![1.0, 0.0, 0.0, 1.0] };
    p.rounds = vec![vec![msg(1), msg(0)]];
    assert!(matches!(p.layout(&j), Err(skconverse::Error::Schedule(_))));
    p.rounds = vec![vec![msg(2)]];
    assert!(matches!(p.layout(&j), Err(skconverse::Error::Schedule(_))));
}

#[test]
fn ideal_ot_is_perfect() {
    for l in 1..=2 {
        let (j, ot) = ideal_ot_protocol(l).unwrap();
        let m = measure_ot(&j, &ot).unwrap();
        assert_eq!((m.epsilon, m.delta1, m.delta2), (0.0, 0.0, 0.0), "l = {l}");
    }
}

#[test]
fn ot_reductions_on_ideal_protocol() {
    for l in 1..=2 {
        let (j, ot) = ideal_ot_protocol(l).unwrap();
        for v in [OtVariant::One, OtVariant::Two] {
            let r = check_ot_reduction(&j, &ot, v).unwrap();
            assert!(r.pass);
            assert!(r.key.epsilon < 1e-15, "{v:?}: {}", r.key.epsilon);
            assert_eq!(r.key.key_len_bits, l as f64);
            assert_eq!(r.fallbacks, 0);
        }
    }
}

/// Ideal OT whose receiver flips its output bit with probability `flip`.
fn noisy_ot(flip: f64) -> (JointDist, OtProtocol) {
    let (j, mut ot) = ideal_ot_protocol(1).unwrap();
    let out = &mut ot.protocol.outputs[RECEIVER].table;
    for row in out.chunks_mut(2) {
        let hit = if row[0] == 1.0 { 0 } else { 1 };
        row[hit] = 1.0 - flip;
        row[1 - hit] = flip;
    }
    (j, ot)
}

#[test]
fn noisy_ot_reduction_arithmetic() {
    let (j, ot) = noisy_ot(0.1);
    let m = measure_ot(&j, &ot).unwrap();
    close(m.epsilon, 0.1, 1e-12);
    assert!(m.delta1 < 1e-15 && m.delta2 < 1e-15);
    for v in [OtVariant::One, OtVariant::Two] {
        let r = check_ot_reduction(&j, &ot, v).unwrap();
        assert!(r.pass, "{v:?}: {} > {}", r.key.epsilon, r.claim);
        close(r.key.eps_rec, 0.1, 1e-12);
    }
}

#[test]
fn otp_commitment_and_reduction() {
    let (j, bc) = otp_bc_protocol().unwrap();
    let m = measure_bc(&j, &bc).unwrap();
    assert_eq!(m.epsilon, 0.0);
    assert!(m.delta1 < 1e-15);
    close(m.delta2, 0.5, 1e-15);
    let r = check_bc_reduction(&j, &bc).unwrap();
    assert!(r.pass);
    assert!(r.key.eps_rec <= m.epsilon + m.delta2);
    assert!(r.key.delta_sec <= m.delta1 + 1e-15);
    // party 2 learns X1 through the sufficient statistic, so it decodes exactly
    assert_eq!(r.key.eps_rec, 0.0);
    assert_eq!(r.key.key_len_bits, 1.0);

    let a = reduce_bc_to_sk(&j, &bc).unwrap();
    let b = reduce_bc_to_sk(&j, &bc).unwrap();
    assert_eq!(a.protocol, b.protocol);
}

#[test]
fn empty_commitment_gives_empty_key() {
    let (j, bc) = empty_bc_protocol().unwrap();
    let m = measure_bc(&j, &bc).unwrap();
    assert_eq!((m.epsilon, m.delta1, m.delta2), (0.0, 0.0, 0.0));
    let r = check_bc_reduction(&j, &bc).unwrap();
    assert!(r.pass);
    assert_eq!(r.key.epsilon, 0.0);
    assert_eq!(r.key.key_len_bits, 0.0);
}

#[test]
fn interface_mismatch() {
    let j = bits2(vec![0.25; 4]);
    assert!(matches!(OtProtocol::new(1, copy_key_protocol(&j)), Err(skconverse::Error::Interface(_))));
    assert!(matches!(BcProtocol::new(1, copy_key_protocol(&j), vec![]), Err(skconverse::Error::Interface(_))));
}

#[test]
fn leftover_hash_examples() {
    let j = JointDist::from_probs("X", vec![1.0 / 8.0; 8]).unwrap();
    let r = leftover_hash(&j, &["X"], &[], 0.0, 0.5, 0).unwrap();
    // 2 log(1/2η) = 0 at η = 1/2, so the whole string is extracted
    assert_eq!(r.out_len, 3);
    assert!(r.distance < 1e-15);
    let zero = hash_distance(&j, &["X"], &[], &Toeplitz::from_seed(0, 3, 7)).unwrap();
    assert!(zero < 1e-15);
}

#[test]
fn leftover_hash_random_sources() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let nx = rng.gen_range(2..=16);
        let ny = rng.gen_range(1..=3);
        let w: Vec<f64> = (0..nx * ny).map(|_| rng.gen::<f64>()).collect();
        let j = JointDist::normalized(vec![Var::range("X", nx).unwrap(), Var::range("Y", ny).unwrap()], w).unwrap();
        let r = leftover_hash(&j, &["X"], &["Y"], 0.0, 0.25, 0).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn protocol_json_round_trip() {
    let (j, ot) = ideal_ot_protocol(1).unwrap();
    let file = ot_file(&j, &ot).unwrap();
    let text = file.to_json().unwrap();
    let back = ProtocolFile::parse(&text).unwrap();
    let j2 = back.source().unwrap().unwrap();
    assert!(j2.approx_eq(&j, 0.0));
    let ot2 = back.ot(&j2).unwrap();
    assert_eq!(ot2.protocol, ot.protocol);

    let (j, bc) = otp_bc_protocol().unwrap();
    let text = bc_file(&j, &bc).unwrap().to_json().unwrap();
    let back = ProtocolFile::parse(&text).unwrap();
    assert_eq!(back.bc(&j).unwrap(), bc);
}

#[test]
fn json_missing_row_rejected() {
    let j = bits2(vec![0.25; 4]);
    let mut file = ProtocolFile::from_protocol(&j, &copy_key_protocol(&j)).unwrap();
    assert!(file.outputs[0].table.remove("0|0|").is_some());
    assert!(matches!(file.protocol(&j), Err(skconverse::Error::Malformed(_))));
}

#[test]
fn fuzz_streams_are_reproducible() {
    let a = random_instance(5, 3, false).unwrap();
    let b = random_instance(5, 3, false).unwrap();
    assert_eq!(a.1, b.1);
    assert!(a.0.approx_eq(&b.0, 0.0));
}

#[test]
fn fuzz_harness_clean() {
    let s = fuzz(&FuzzConfig::default()).unwrap();
    assert_eq!(s.instances, 500);
    assert!(s.clean(), "{s:?}");
    assert!(s.converse_checked > 100, "{s:?}");
    assert!(s.keyed_instances > 100);
    assert!(s.independence_checked >= 100);
    assert_eq!(s.independence_violations, 0);
}

#[test]
fn nonperfect_keys_respect_converse() {
    let j = bits2(vec![0.45, 0.05, 0.05, 0.45]);
    let c = check_converse(&j, &copy_key_protocol(&j), 0.05).unwrap();
    close(c.security.eps_rec, 0.1, 1e-12);
    assert!(c.pass);
}
