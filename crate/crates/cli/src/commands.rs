use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::path::{Path, PathBuf};

use qpq::analysis::{
    classical_decoy_bound, fmt_sig, helstrom_advantage, holevo_chi, info_bound_with, profile, sweep as run_sweep,
    verify_with_profile, write_csv, Ensemble, InequalityCheck, InfoBound, CHECK_TOL, FIDELITY_COEFF,
};
use qpq::protocol::{run_session_exact, run_session_with_rng, Database, QuerySpec, Scenario, SessionOptions, Transcript};
use qpq::qcore::{trace_distance, DensityMatrix, RegisterLayout};
use qpq::strategies::{by_name, honest, random_near_honest, validate_scope, weak_entangling, BobStrategy, RandomStrategyConfig};
use qpq::variants::{
    averaged_pass_probability, sample_variant_parameters, AmplitudeDistribution, DecoyPolicy, VariantConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, Settings};
use crate::CliError;

/// Seed for the random strategies of `verify` when none is given.
pub const DEFAULT_VERIFY_SEED: u64 = 2024;

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Io(e.to_string()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(io),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io),
    }
}

/// `out.json` -> `out.<suffix>.json`
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{suffix}.json"))
}

fn check_scope(strategy: &BobStrategy, rounds: usize, unconstrained: bool) -> Result<(), CliError> {
    let report = validate_scope(strategy, rounds, unconstrained);
    if report.is_ok() {
        return Ok(());
    }
    let mut msg = report.to_string();
    if strategy.requires_unconstrained && !unconstrained {
        msg.push_str(&format!(
            "; `{}` acts on a later query before it arrives, rerun with --unconstrained to lift the ordering rule",
            strategy.name
        ));
    }
    Err(CliError::Scope(msg))
}

fn session_options(s: &Settings) -> SessionOptions {
    SessionOptions {
        unconstrained: s.unconstrained,
        ..Default::default()
    }
}

fn target(s: &Settings, db: &Database) -> Result<usize, CliError> {
    let j = s.j.unwrap_or(1);
    if j >= db.entries() {
        return Err(CliError::Config(format!("--j {j} is not below N = {}", db.entries())));
    }
    Ok(j)
}

#[derive(Debug, Serialize)]
struct TrialRecord {
    trial: usize,
    seed: u64,
    scenario: Option<Scenario>,
    passed: bool,
    recovered_answer: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Secret {
    trial: usize,
    spec: QuerySpec,
}

#[derive(Debug, Serialize)]
struct RunSummary {
    command: &'static str,
    strategy: String,
    variant: String,
    n: u32,
    #[serde(rename = "d_R")]
    d_r: usize,
    j: usize,
    seed: u64,
    trials: usize,
    passes: usize,
    pass_frequency: f64,
    /// Answer -> number of passing sessions that recovered it.
    recovered_answers: BTreeMap<usize, usize>,
    exact_pass_probability: Option<f64>,
}

pub fn run(s: &Settings) -> Result<(), CliError> {
    let seed = s.require_seed("run")?;
    if s.trials == 0 {
        return Err(CliError::Config("--trials must be positive".into()));
    }
    let name = s.strategy_name("honest");
    let db = s.database(&name)?;
    let strategy = s.load_strategy(&name, &db)?;
    check_scope(&strategy, s.rounds(&strategy.name), s.unconstrained)?;
    let j = target(s, &db)?;
    let opts = session_options(s);

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..s.trials).map(|_| master.random()).collect();
    let results = seeds
        .par_iter()
        .enumerate()
        .map(|(t, &ts)| -> Result<(TrialRecord, Secret, Option<Transcript>), CliError> {
            let mut rng = ChaCha8Rng::seed_from_u64(ts);
            let drawn = sample_variant_parameters(&s.variant, j, db.entries(), &mut rng)?;
            let (out, transcript) = run_session_with_rng(&drawn.spec, None, &db, &strategy, &opts, &mut rng, ts)?;
            Ok((
                TrialRecord {
                    trial: t,
                    seed: ts,
                    scenario: out.scenario,
                    passed: out.passed,
                    recovered_answer: out.recovered_answer,
                },
                Secret {
                    trial: t,
                    spec: drawn.spec,
                },
                (t == 0).then_some(transcript),
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let passes = results.iter().filter(|r| r.0.passed).count();
    let mut recovered = BTreeMap::new();
    for (r, _, _) in &results {
        if let Some(a) = r.recovered_answer {
            *recovered.entry(a).or_insert(0) += 1;
        }
    }
    let exact = averaged_pass_probability(&s.variant, j, &db, &strategy, &opts).ok();
    let summary = RunSummary {
        command: "run",
        strategy: strategy.name.clone(),
        variant: s.variant.name().to_string(),
        n: db.n(),
        d_r: db.answer_dim(),
        j,
        seed,
        trials: s.trials,
        passes,
        pass_frequency: passes as f64 / s.trials as f64,
        recovered_answers: recovered,
        exact_pass_probability: exact,
    };
    eprintln!(
        "pass frequency {} ({passes}/{}), recovered answers {:?}",
        fmt_sig(summary.pass_frequency),
        s.trials,
        summary.recovered_answers
    );
    let body = match s.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&summary)?,
        Format::Csv => {
            let mut out = String::from("trial,seed,scenario,passed,recovered_answer\n");
            for (r, _, _) in &results {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.trial,
                    r.seed,
                    r.scenario.map(|x| x.tag()).unwrap_or("-"),
                    r.passed,
                    r.recovered_answer.map(|a| a.to_string()).unwrap_or_default()
                ));
            }
            out
        }
    };
    emit(s.output.as_deref(), &body)?;
    if let Some(path) = &s.output {
        if let Some(t) = results.first().and_then(|r| r.2.as_ref()) {
            std::fs::write(sibling(path, "transcript"), t.to_json()? + "\n").map_err(io)?;
        }
        let secrets: Vec<&Secret> = results.iter().map(|r| &r.1).collect();
        std::fs::write(sibling(path, "alice"), to_json(&secrets)?).map_err(io)?;
    }
    Ok(())
}

type Matrix = Vec<Vec<[f64; 2]>>;

fn matrix(rho: &DensityMatrix) -> Matrix {
    let m = rho.matrix();
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

#[derive(Debug, Serialize)]
struct AttackRow {
    j: usize,
    decoy: Option<usize>,
    pass_a: Option<f64>,
    pass_b: Option<f64>,
    pass_mean: f64,
    canonical_pass_mean: Option<f64>,
    residual: Matrix,
    /// Trace distance to the expected residual state, where one is known.
    reference_distance: Option<f64>,
}

#[derive(Debug, Serialize)]
struct AttackReport {
    command: &'static str,
    attack: String,
    variant: String,
    n: u32,
    #[serde(rename = "d_R")]
    d_r: usize,
    #[serde(rename = "d_B")]
    d_b: usize,
    rows: Vec<AttackRow>,
    /// Holevo information of B about the target, uniform over the rows' targets.
    chi_bits: f64,
    max_pairwise_advantage: f64,
}

/// Residual states of the rhetoric multi-answer attack for j = 0, 1, 2.
fn rhetoric_reference(j: usize) -> Option<DensityMatrix> {
    let l = RegisterLayout::single("B", 3).ok()?;
    let w = match j {
        0 => [1.0, 0.0, 0.0],
        1 => [0.5, 0.5, 0.0],
        2 => [0.5, 0.0, 0.5],
        _ => return None,
    };
    DensityMatrix::diagonal(l, &w).ok()
}

fn mix(parts: &[(f64, DensityMatrix)]) -> Result<DensityMatrix, CliError> {
    let refs: Vec<(f64, &DensityMatrix)> = parts.iter().map(|(w, r)| (*w, r)).collect();
    Ok(DensityMatrix::mixture(&refs)?)
}

fn max_advantage(states: &[DensityMatrix]) -> Result<f64, CliError> {
    let mut best: f64 = 0.0;
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            best = best.max(helstrom_advantage(a, b)?);
        }
    }
    Ok(best)
}

fn variant_row(
    variant: &VariantConfig,
    j: usize,
    db: &Database,
    strategy: &BobStrategy,
    opts: &SessionOptions,
) -> Result<(f64, f64, DensityMatrix), CliError> {
    let (mut pa, mut pb) = (0.0, 0.0);
    let mut parts = Vec::new();
    for (w, spec) in variant.support(j, db.entries())? {
        let a = run_session_exact(&spec, Scenario::A, db, strategy, opts)?;
        let b = run_session_exact(&spec, Scenario::B, db, strategy, opts)?;
        pa += w * a.pass_probability;
        pb += w * b.pass_probability;
        parts.push((0.5 * w, a.bob_residual));
        parts.push((0.5 * w, b.bob_residual));
    }
    Ok((pa, pb, mix(&parts)?))
}

pub fn attack(s: &Settings, name: &str) -> Result<(), CliError> {
    let db = s.database(name)?;
    let strategy = match &s.strategy_file {
        Some(_) => s.load_strategy(name, &db)?,
        None => {
            let param = s.param.unwrap_or(if name == "weak_entangling" { 0.3 } else { 0.0 });
            by_name(name, db.n(), s.rounds(name), param, &db).map_err(|e| CliError::Config(e.to_string()))?
        }
    };
    let rounds = strategy.num_rounds();
    check_scope(&strategy, if rounds == 3 { 3 } else { s.rounds(name) }, s.unconstrained)?;
    let opts = session_options(s);
    let indices: Vec<usize> = match name {
        "multi_answer_rhetoric" | "multi_answer_nonrhetoric" => (0..3).collect(),
        _ => (0..db.entries()).collect(),
    };

    let mut rows = Vec::new();
    let mut per_target = Vec::new();
    if rounds == 3 {
        let amplitudes = match &s.variant {
            VariantConfig::NonRhetoric { amplitudes, .. } => amplitudes.clone(),
            _ => AmplitudeDistribution::Grid { points: 8 },
        };
        let cfg = VariantConfig::NonRhetoric {
            decoy: DecoyPolicy::Uniform,
            amplitudes,
        };
        for &j in &indices {
            let mut target_parts = Vec::new();
            for &d in indices.iter().filter(|&&d| d != j) {
                let specs: Vec<(f64, QuerySpec)> = cfg
                    .support(j, db.entries())?
                    .into_iter()
                    .filter(|(_, q)| q.partner() == d)
                    .collect();
                let total: f64 = specs.iter().map(|(w, _)| w).sum();
                let mut pass = 0.0;
                let mut parts = Vec::new();
                for (w, spec) in specs {
                    let out = run_session_exact(&spec, Scenario::A, &db, &strategy, &opts)?;
                    pass += w / total * out.pass_probability;
                    parts.push((w / total, out.bob_residual));
                }
                let rho = mix(&parts)?;
                rows.push(AttackRow {
                    j,
                    decoy: Some(d),
                    pass_a: None,
                    pass_b: None,
                    pass_mean: pass,
                    canonical_pass_mean: None,
                    residual: matrix(&rho),
                    reference_distance: None,
                });
                target_parts.push(rho);
            }
            let w = 1.0 / target_parts.len() as f64;
            per_target.push(mix(&target_parts.into_iter().map(|r| (w, r)).collect::<Vec<_>>())?);
        }
    } else {
        for &j in &indices {
            let (pa, pb, rho) = variant_row(&s.variant, j, &db, &strategy, &opts)?;
            let canonical = if s.variant == VariantConfig::Canonical {
                None
            } else {
                Some(variant_row(&VariantConfig::Canonical, j, &db, &strategy, &opts).map(|r| 0.5 * (r.0 + r.1))?)
            };
            let reference_distance = match name {
                "multi_answer_rhetoric" => rhetoric_reference(j).map(|r| trace_distance(&rho, &r)).transpose()?,
                _ => None,
            };
            rows.push(AttackRow {
                j,
                decoy: None,
                pass_a: Some(pa),
                pass_b: Some(pb),
                pass_mean: 0.5 * (pa + pb),
                canonical_pass_mean: canonical,
                residual: matrix(&rho),
                reference_distance,
            });
            per_target.push(rho);
        }
    }
    let chi = holevo_chi(&Ensemble::uniform(per_target.clone())?)?;
    let report = AttackReport {
        command: "attack",
        attack: strategy.name.clone(),
        variant: s.variant.name().to_string(),
        n: db.n(),
        d_r: db.answer_dim(),
        d_b: strategy.b_dim,
        rows,
        chi_bits: chi,
        max_pairwise_advantage: max_advantage(&per_target)?,
    };
    for r in &report.rows {
        let decoy = r.decoy.map(|d| format!(" j'={d}")).unwrap_or_default();
        let canon = r
            .canonical_pass_mean
            .map(|c| format!(" (canonical {})", fmt_sig(c)))
            .unwrap_or_default();
        eprintln!("j={}{decoy}: pass {}{canon}", r.j, fmt_sig(r.pass_mean));
    }
    eprintln!("Holevo chi {} bits", fmt_sig(chi));
    emit(s.output.as_deref(), &to_json(&report)?)
}

pub fn sweep(s: &Settings, from: f64, to: Option<f64>, points: usize) -> Result<(), CliError> {
    let name = s.strategy_name("weak_entangling");
    let to = to.unwrap_or(FRAC_PI_2);
    if points == 0 || !from.is_finite() || !to.is_finite() {
        return Err(CliError::Config("sweep needs a finite range and at least one point".into()));
    }
    let grid: Vec<f64> = match points {
        1 => vec![from],
        _ => (0..points).map(|k| from + (to - from) * k as f64 / (points - 1) as f64).collect(),
    };
    let db = s.database(&name)?;
    let probe = by_name(&name, db.n(), 2, from, &db).map_err(|e| CliError::Config(e.to_string()))?;
    check_scope(&probe, 2, s.unconstrained)?;
    let opts = session_options(s);
    let n = db.n();
    let rows = run_sweep(|x| by_name(&name, n, 2, x, &db), &grid, &db, &opts);
    for r in &rows {
        if let Err(e) = &r.point {
            eprintln!("parameter {}: {e}", fmt_sig(r.parameter));
        }
    }
    let body = match s.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf).map_err(io)?;
            String::from_utf8(buf).expect("ascii csv")
        }
        Format::Json => to_json(&rows)?,
    };
    emit(s.output.as_deref(), &body)
}

#[derive(Debug, Serialize)]
struct StrategyEntry {
    name: String,
    epsilon: f64,
    vacuous: bool,
    min_fidelity: f64,
    fidelity_rhs: f64,
    info: InfoBound,
    checks: Vec<InequalityCheck>,
}

#[derive(Debug, Serialize)]
struct VerifyMeta {
    n: u32,
    #[serde(rename = "d_R")]
    d_r: usize,
    seed: u64,
    random_count: usize,
    epsilon_threshold: Option<f64>,
    fidelity_coefficient: f64,
    tolerance: f64,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    metadata: VerifyMeta,
    strategies: Vec<StrategyEntry>,
    /// Strategies whose ε exceeds the threshold.
    skipped: Vec<(String, f64)>,
    total_checks: usize,
    violations: usize,
}

pub fn verify(s: &Settings, count: usize) -> Result<(), CliError> {
    let seed = s.seed.unwrap_or(DEFAULT_VERIFY_SEED);
    let db = Database::standard(s.n, s.d_r)?;
    let mut family: Vec<(String, BobStrategy)> = vec![("honest".into(), honest(2))];
    for k in 0..9 {
        let lambda = k as f64 * FRAC_PI_2 / 8.0;
        family.push((format!("weak_entangling(lambda={})", fmt_sig(lambda)), weak_entangling(s.n, lambda)?));
    }
    let cfg = RandomStrategyConfig {
        n: s.n,
        d_r: s.d_r,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        family.push((format!("random_near_honest#{i}"), random_near_honest(&cfg, &mut rng)?));
    }
    let opts = SessionOptions::default();
    let entries = family
        .par_iter()
        .map(|(name, st)| -> Result<StrategyEntry, CliError> {
            let p = profile(st, &db, &opts)?;
            let report = verify_with_profile(st, &db, &p)?;
            let info = info_bound_with(&p, &report.sigma_star)?;
            Ok(StrategyEntry {
                name: name.clone(),
                epsilon: report.epsilon,
                vacuous: report.vacuous,
                min_fidelity: report.min_fidelity,
                fidelity_rhs: report.fidelity_rhs,
                info,
                checks: report.checks,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (kept, skipped): (Vec<_>, Vec<_>) = entries
        .into_iter()
        .partition(|e| s.epsilon_threshold.is_none_or(|t| e.epsilon <= t));
    let total_checks = kept.iter().map(|e| e.checks.len() + 2).sum();
    let mut dump = Vec::new();
    for e in &kept {
        for c in e.checks.iter().filter(|c| !c.holds) {
            dump.push(format!(
                "{}: {} j={} {:?} lhs={} rhs={}",
                e.name, c.name, c.j, c.scenario, c.lhs, c.rhs
            ));
        }
        if !e.info.holds_sharp {
            dump.push(format!("{}: chi {} > sharp bound {}", e.name, e.info.chi, e.info.bound_sharp));
        }
        if !e.info.holds_simple {
            dump.push(format!("{}: chi {} > simple bound {}", e.name, e.info.chi, e.info.bound_simple));
        }
    }
    let report = VerifyReport {
        metadata: VerifyMeta {
            n: s.n,
            d_r: s.d_r,
            seed,
            random_count: count,
            epsilon_threshold: s.epsilon_threshold,
            fidelity_coefficient: FIDELITY_COEFF,
            tolerance: CHECK_TOL,
        },
        skipped: skipped.iter().map(|e| (e.name.clone(), e.epsilon)).collect(),
        strategies: kept,
        total_checks,
        violations: dump.len(),
    };
    emit(s.output.as_deref(), &to_json(&report)?)?;
    eprintln!(
        "{} strategies, {} checks, {} violations",
        report.strategies.len(),
        report.total_checks,
        report.violations
    );
    if dump.is_empty() {
        Ok(())
    } else {
        for line in &dump {
            eprintln!("  {line}");
        }
        Err(CliError::Verify(format!("{} inequality violations", dump.len())))
    }
}

#[derive(Debug, Serialize)]
struct DecoyRow {
    n_entries: usize,
    m: usize,
    bound_bits: f64,
}

pub fn decoy(s: &Settings, m: Option<usize>) -> Result<(), CliError> {
    let big_n = s.entries();
    let ms: Vec<usize> = match m {
        Some(m) => vec![m],
        None => (1..=big_n).collect(),
    };
    let rows = ms
        .into_iter()
        .map(|m| {
            Ok(DecoyRow {
                n_entries: big_n,
                m,
                bound_bits: classical_decoy_bound(big_n, m)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let body = match s.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("N,M,bound_bits\n");
            for r in &rows {
                out.push_str(&format!("{},{},{}\n", r.n_entries, r.m, fmt_sig(r.bound_bits)));
            }
            out
        }
        Format::Json => to_json(&rows)?,
    };
    emit(s.output.as_deref(), &body)
}
