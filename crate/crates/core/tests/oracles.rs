//! Closed-form values derived by hand, checked against the simulator.

use std::f64::consts::{FRAC_PI_2, PI};

use qpq::analysis::{decompose_all, info_bound, profile, repeated_query_exact, verify_theorem, RepeatedQuery};
use qpq::protocol::{run_session_exact, Database, QuerySpec, Scenario, SessionOptions};
use qpq::qcore::{fidelity, Complex, StateVector};
use qpq::strategies::{
    honest, lucky_reprepare_attack, measure_resend, multi_answer_database, multi_answer_rhetoric_attack,
    weak_entangling,
};
use qpq::variants::{averaged_pass_probability, entangled_query, run_non_rhetoric_session, VariantConfig, ORDERS};

fn db() -> Database {
    Database::standard(2, 8).unwrap()
}

fn opts() -> SessionOptions {
    SessionOptions::default()
}

fn pass(spec: &QuerySpec, s: Scenario, st: &qpq::strategies::BobStrategy) -> f64 {
    run_session_exact(spec, s, &db(), st, &opts()).unwrap().pass_probability
}

#[test]
fn weak_entangling_closed_forms() {
    for k in 0..=8 {
        let lambda = k as f64 * FRAC_PI_2 / 8.0;
        let st = weak_entangling(2, lambda).unwrap();
        let (s, c) = lambda.sin_cos();
        for j in 1..4 {
            assert!((pass(&QuerySpec::canonical(j), Scenario::A, &st) - 1.0).abs() < 1e-12);
            let pb = pass(&QuerySpec::canonical(j), Scenario::B, &st);
            assert!((pb - 0.5 * (1.0 + c * c)).abs() < 1e-12, "λ={lambda}");
        }
        let report = verify_theorem(&st, &db(), &opts()).unwrap();
        assert!((report.epsilon - s * s / 2.0).abs() < 1e-12);
        // σ* = cos λ|∅⟩ + sin λ|marker of 0⟩; ρ^a(j) is pure with overlap cos²λ.
        let sigma = &report.sigma_star;
        assert!((sigma.amplitude(&[0]).unwrap().norm() - c).abs() < 1e-12);
        assert!((sigma.amplitude(&[1]).unwrap().norm() - s).abs() < 1e-12);
        assert!((report.min_fidelity - c.powi(4)).abs() < 1e-12);
        let p = profile(&st, &db(), &opts()).unwrap();
        let fb = fidelity(&p.query(2).unwrap().b.residual, sigma).unwrap();
        assert!((fb - 0.5 * (1.0 + c.powi(4))).abs() < 1e-12);
    }
}

#[test]
fn weak_entangling_decomposition() {
    let lambda = 0.3f64;
    let st = weak_entangling(2, lambda).unwrap();
    let decs = decompose_all(&st, &db()).unwrap();
    let c = lambda.cos();
    for d in &decs[1..] {
        assert!((d.eta1.eta - 1.0).abs() < 1e-12);
        assert!((d.eta2_bar.eta - 1.0).abs() < 1e-12);
        assert!((d.eta1_bar.eta - 0.5 * (1.0 + c * c)).abs() < 1e-12);
        assert!((d.eta2.eta - 1.0).abs() < 1e-12);
        assert!(d.eta1.check_leak < 1e-12 && d.eta1_bar.check_leak < 1e-12);
        // |⟨Φ_j^{(1)}|Φ_0^{(1)}⟩|² = cos⁴λ
        let o = d.eta1.phi.as_ref().unwrap().inner(decs[0].eta1.phi.as_ref().unwrap()).unwrap();
        assert!((o.norm_sqr() - c.powi(4)).abs() < 1e-12);
    }
}

#[test]
fn measure_resend_values() {
    let st = measure_resend(2, 2);
    assert!((pass(&QuerySpec::canonical(0), Scenario::A, &st) - 1.0).abs() < 1e-12);
    for j in 1..4 {
        for s in Scenario::BOTH {
            assert!((pass(&QuerySpec::canonical(j), s, &st) - 0.5).abs() < 1e-12);
            assert!((pass(&QuerySpec::entangled(j), s, &st) - 0.5).abs() < 1e-12);
        }
    }
    let info = info_bound(&st, &db(), &opts()).unwrap();
    assert!((info.chi - 2.0).abs() < 1e-9);
    // P̄ = (1 + 3/2)/4 and q = 1/(N P̄)
    assert!((info.mean_pass - 0.625).abs() < 1e-12);
    assert!((info.q - 0.4).abs() < 1e-12);
}

#[test]
fn lucky_reprepare_values() {
    let st = lucky_reprepare_attack(0.0);
    for j in 1..4 {
        let spec = QuerySpec::canonical(j);
        assert!((pass(&spec, Scenario::A, &st) - 0.75).abs() < 1e-12);
        assert!((pass(&spec, Scenario::B, &st) - 0.5).abs() < 1e-12);
        // Alice's phase θ survives the lucky branch with probability cos²(θ/2).
        for theta in [0.5, PI / 3.0, PI] {
            let pa = pass(&QuerySpec::with_phase(j, theta), Scenario::A, &st);
            assert!((pa - (0.25 + 0.5 * (theta / 2.0).cos().powi(2))).abs() < 1e-12);
        }
        let ent = averaged_pass_probability(&VariantConfig::EntanglementAssisted, j, &db(), &st, &opts()).unwrap();
        assert!((ent - 7.0 / 16.0).abs() < 1e-12);
    }
}

#[test]
fn entangled_honest_reply() {
    let d = db();
    let psi = entangled_query(3, 2, "Q1").unwrap();
    let layout = qpq::qcore::RegisterLayout::new([("Q1", 4), ("R1", 8), ("A", 4)]).unwrap();
    let input = StateVector::product(&[psi, StateVector::ket("R1", 8, 0).unwrap()]).unwrap().reordered(&layout).unwrap();
    let out = input.apply(&qpq::protocol::qram_unitary(&d, "Q1", "R1", None).unwrap()).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((out.amplitude(&[3, d.answer(3).unwrap(), 0]).unwrap().re - h).abs() < 1e-12);
    assert!((out.amplitude(&[0, d.answer(0).unwrap(), 3]).unwrap().re - h).abs() < 1e-12);
}

#[test]
fn three_message_measure_resend() {
    let d = Database::standard(2, 4).unwrap();
    let st = measure_resend(2, 3);
    for t in [0.2f64, 0.7, 1.1] {
        let (a, b) = (t.cos(), t.sin());
        for order in ORDERS {
            let out = run_non_rhetoric_session(1, 2, Complex::new(a, 0.0), Complex::new(b, 0.0), order, &d, &st, &opts())
                .unwrap();
            assert!((out.pass_probability - (a.powi(4) + b.powi(4))).abs() < 1e-12);
        }
        let out = run_non_rhetoric_session(1, 2, Complex::new(a, 0.0), Complex::new(b, 0.0), ORDERS[0], &d, &honest(3), &opts())
            .unwrap();
        assert!((out.pass_probability - 1.0).abs() < 1e-12);
        assert_eq!(out.recovered_answer, Some(d.answer(1).unwrap()));
        assert_eq!(out.decoy_answer, Some(d.answer(2).unwrap()));
    }
}

#[test]
fn repeated_sessions_expose_the_attack() {
    let d = multi_answer_database(5).unwrap();
    let st = multi_answer_rhetoric_attack(&d).unwrap();
    let r = repeated_query_exact(&st, &d, &RepeatedQuery::new(2, 3, true)).unwrap();
    assert!((r.mismatch_probability - 0.75).abs() < 1e-12);
    assert!((r.all_pass_probability - 1.0).abs() < 1e-12);
}
