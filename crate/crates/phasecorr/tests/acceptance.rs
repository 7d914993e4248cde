//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stderr and then asserts.

use std::io::Write;
use std::sync::OnceLock;

use phasecorr::config::parse_spec;
use phasecorr::runner::{run_delays, DelayOutcome, DelayProtocol, ModelVariant, Workers};
use phasecorr::AppError;
use phasecorr_core::bose_hubbard::{BoseHubbard, ModelParams, Propagator};
use phasecorr_core::ensemble::Ensemble;
use phasecorr_core::multitime::{g2_delay, special_correlators, tally, SnapshotStore};
use phasecorr_core::oracle::{multitime_delay_grid, DensityMatrix, Ladder, Liouvillian, OracleSettings};
use phasecorr_core::rng::NoiseKind;
use phasecorr_core::sde::{advance_trajectory, doubling_sweep, NoiseSource, StepConfig, StepScratch, StreamNoise};
use phasecorr_core::stats::Estimate;
use phasecorr_core::{SOrder, C64};

const SIGMA: f64 = 3.0;
const DT: f64 = 0.01;
const T0: f64 = 20.0;
const BLOCKS: usize = 32;
const ENSEMBLE: usize = 1 << 14;
const LARGE_ENSEMBLE: usize = 1 << 16;

const BLOCKADE_DIP_MAX: f64 = 0.05;
const THERMAL_DIP: f64 = 0.1;
const THERMAL_DIP_TOL: f64 = 0.05;
const WEAK_N1: f64 = 3.87e-7;
const STRONG_N1: f64 = 0.043;
const STRONG_N2: f64 = 0.98;
const STRONG_FRACTION: f64 = 0.95;
const BREAKDOWN_SIGMA: f64 = 10.0;
const RECOVERY_SIGMA: f64 = 5.0;
const RECOVERY_FRACTION: f64 = 0.8;
const ORDER_TARGET: f64 = 2.0;
const ORDER_TOL: f64 = 0.2;
const DRIFT_SEPARATION: f64 = 5.0;
const ORACLE_EXACT: f64 = 1e-9;
const FRONT_TOL: f64 = 0.25;

fn verdict(id: u32, title: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr().lock(), "{tag} criterion {id} ({title}): {detail}");
    assert!(pass, "criterion {id} ({title}) failed: {detail}");
}

fn grid(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step).round() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

fn blockade(nbar: f64, drive: f64) -> ModelParams {
    ModelParams::chain(2, 0.0856, 3.0, -0.275, 1.0, nbar, drive)
}

fn protocol(params: ModelParams, initial: SOrder, size: usize, seed: u64, taus: Vec<f64>, switch: bool) -> DelayProtocol {
    DelayProtocol {
        params,
        initial,
        size,
        blocks: BLOCKS,
        seed,
        step: StepConfig { dt: DT, iterations: 1, escape_cap: 1e10 },
        noise: NoiseKind::Gaussian,
        variant: ModelVariant::default(),
        t0: T0,
        taus,
        switch_at_t0: switch,
        keep_normal: !switch,
        occupation_every: 0,
    }
}

/// Runs a delay protocol collecting `g_{first,second}` at every delay.
fn g2_run(proto: &DelayProtocol, first: usize, second: usize) -> (Vec<Estimate>, DelayOutcome) {
    let w = Workers::new(None).unwrap();
    let mut points = Vec::new();
    let out = run_delays(&w, proto, None, &mut |_: usize, tau: f64, store: &SnapshotStore| -> Result<(), AppError> {
        points.push(g2_delay(store, first, second, proto.t0, &[tau], proto.blocks)?.points[0]);
        Ok(())
    })
    .unwrap();
    (points, out)
}

fn oracle_state(params: &ModelParams, cutoff: usize, time: f64) -> (Liouvillian, DensityMatrix) {
    let l = Liouvillian::new(params, cutoff).unwrap();
    let rho = l.state_from_vacuum(time, &OracleSettings { cutoff, ..OracleSettings::default() }).unwrap();
    (l, rho)
}

fn oracle_g2(l: &Liouvillian, rho: &DensityMatrix, first: usize, second: usize, taus: &[f64]) -> Vec<f64> {
    use Ladder::{Annihilate as A, Create as C};
    let num = multitime_delay_grid(l, rho, &[(C, first, false), (C, second, true), (A, second, true), (A, first, false)], taus, DT).unwrap();
    let late = multitime_delay_grid(l, rho, &[(C, second, true), (A, second, true)], taus, DT).unwrap();
    let early = l.occupation(rho, first);
    num.iter().zip(&late).map(|(n, d)| n.re / (early * d.re)).collect()
}

fn z(got: f64, err: f64, want: f64) -> f64 {
    (got - want).abs() / err.max(1e-300)
}

struct WeakRun {
    taus: Vec<f64>,
    g11: Vec<Estimate>,
    n1: Estimate,
}

fn weak_run() -> &'static WeakRun {
    static RUN: OnceLock<WeakRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let taus = grid(8.0, 0.25);
        let proto = protocol(blockade(0.0, 0.01), SOrder::POSITIVE_P, LARGE_ENSEMBLE, 101, taus.clone(), false);
        let (g11, out) = g2_run(&proto, 0, 0);
        let n1 = out.at_t0.occupation(0, BLOCKS).unwrap();
        WeakRun { taus, g11, n1 }
    })
}

#[test]
fn criterion_1_blockade_antibunching() {
    let run = weak_run();
    let (l, rho) = oracle_state(&blockade(0.0, 0.01), 6, T0);
    let want = oracle_g2(&l, &rho, 0, 0, &run.taus);
    let zs: Vec<f64> = run.g11.iter().zip(&want).map(|(g, w)| z(g.value.re, g.err_re, *w)).collect();
    let worst = zs.iter().cloned().fold(0.0, f64::max);
    let g0 = run.g11[0].value.re;
    let pass = worst <= SIGMA && g0 < BLOCKADE_DIP_MAX;
    verdict(1, "blockade g11 vs oracle", pass, &format!("{} delays, worst deviation {worst:.2} sigma, g11(0) = {g0:.4} (oracle {:.2e})", zs.len(), want[0]));
}

#[test]
fn criterion_2_thermal_degradation() {
    let taus = grid(8.0, 0.25);
    let proto = protocol(blockade(1e-8, 0.01), SOrder::POSITIVE_P, ENSEMBLE, 202, taus.clone(), false);
    let (g11, _) = g2_run(&proto, 0, 0);
    let (k, dip) = g11.iter().enumerate().min_by(|a, b| a.1.value.re.total_cmp(&b.1.value.re)).map(|(k, e)| (k, *e)).unwrap();
    let dip_ok = (dip.value.re - THERMAL_DIP).abs() <= THERMAL_DIP_TOL;

    let (lr, relaxed) = oracle_state(&blockade(0.0, 0.01), 6, 60.0);
    let stationary = lr.occupation(&relaxed, 0);
    let rounded = format!("{stationary:.2e}").parse::<f64>().unwrap();
    let oracle_ok = rounded == WEAK_N1;

    let (l, rho) = oracle_state(&blockade(0.0, 0.01), 6, T0);
    let n1 = weak_run().n1;
    let n1_oracle = l.occupation(&rho, 0);
    let n1_z = z(n1.value.re, n1.err_re, n1_oracle);
    let pass = dip_ok && oracle_ok && n1_z <= SIGMA;
    verdict(
        2,
        "thermal degradation and stationary n1",
        pass,
        &format!(
            "dip {:.3} +- {:.3} at tau {}, oracle stationary n1 {stationary:.4e} -> {rounded:.2e}, stochastic n1 {:.4e} +- {:.1e} vs oracle {n1_oracle:.4e} ({n1_z:.2} sigma)",
            dip.value.re, dip.err_re, taus[k], n1.value.re, n1.err_re
        ),
    );
}

#[test]
fn criterion_3_mixed_order_strong_drive() {
    let taus = grid(5.0, 0.25);
    let params = blockade(0.0, 3.0);
    let proto = protocol(params.clone(), SOrder::POSITIVE_P, ENSEMBLE, 303, taus.clone(), true);
    let w = Workers::new(None).unwrap();
    let mut got: [Vec<Estimate>; 4] = Default::default();
    let out = run_delays(&w, &proto, None, &mut |_: usize, tau: f64, store: &SnapshotStore| -> Result<(), AppError> {
        let s = special_correlators(store, 1, T0, &[tau], BLOCKS)?;
        for (dst, src) in got.iter_mut().zip([s.ga, s.gb, s.gc, s.gd]) {
            dst.push(src[0]);
        }
        Ok(())
    })
    .unwrap();

    let (l, rho) = oracle_state(&params, 12, T0);
    use Ladder::{Annihilate as A, Create as C};
    let factors: [&[(Ladder, usize, bool)]; 4] = [
        &[(A, 1, false), (A, 1, true), (C, 1, true), (C, 1, false)],
        &[(A, 1, true), (A, 1, true), (C, 1, false), (C, 1, false)],
        &[(A, 1, true), (C, 1, true), (C, 1, false), (A, 1, false)],
        &[(A, 1, false), (C, 1, true), (C, 1, true), (A, 1, false)],
    ];
    let mut parts = Vec::new();
    let mut curves_ok = true;
    for (k, f) in factors.iter().enumerate() {
        let want = multitime_delay_grid(&l, &rho, f, &taus, DT).unwrap();
        let name = ["G_a", "G_b", "G_c", "G_d"][k];
        let mut components = vec![("Re", true)];
        if k == 1 || k == 3 {
            components.push(("Im", false));
        }
        for (label, real) in components {
            let inside = got[k]
                .iter()
                .zip(&want)
                .filter(|(e, o)| if real { z(e.value.re, e.err_re, o.re) <= SIGMA } else { z(e.value.im, e.err_im, o.im) <= SIGMA })
                .count();
            let frac = inside as f64 / taus.len() as f64;
            curves_ok &= frac >= STRONG_FRACTION;
            parts.push(format!("{label} {name} {inside}/{}", taus.len()));
        }
    }
    let (n1, n2) = (out.at_t0.occupation(0, BLOCKS).unwrap(), out.at_t0.occupation(1, BLOCKS).unwrap());
    let (z1, z2) = (z(n1.value.re, n1.err_re, STRONG_N1), z(n2.value.re, n2.err_re, STRONG_N2));
    let pass = curves_ok && z1 <= SIGMA && z2 <= SIGMA;
    verdict(
        3,
        "anti-normal and mixed correlations after the switch",
        pass,
        &format!(
            "{}; n1 {:.4} +- {:.4} vs {STRONG_N1} ({z1:.1} sigma; oracle {:.4}), n2 {:.4} +- {:.4} vs {STRONG_N2} ({z2:.1} sigma; oracle {:.4})",
            parts.join(", "),
            n1.value.re,
            n1.err_re,
            l.occupation(&rho, 0),
            n2.value.re,
            n2.err_re,
            l.occupation(&rho, 1)
        ),
    );
}

#[test]
fn criterion_4_classical_p_breakdown() {
    let taus = grid(5.0, 0.25);
    let mut result = Vec::new();
    for (nbar, seed) in [(5e-8, 401), (2e-5, 402)] {
        let params = blockade(nbar, 0.01);
        let proto = protocol(params.clone(), SOrder::CLASSICAL_P, ENSEMBLE, seed, taus.clone(), false);
        let (g11, out) = g2_run(&proto, 0, 0);
        let (l, rho) = oracle_state(&params, 6, T0);
        let want = oracle_g2(&l, &rho, 0, 0, &taus);
        let zs: Vec<f64> = g11.iter().zip(&want).map(|(g, w)| z(g.value.re, g.err_re, *w)).collect();
        result.push((zs, out.stats.clamps));
    }
    let (bad, bad_clamps) = &result[0];
    let (good, _) = &result[1];
    let worst = bad.iter().cloned().fold(0.0, f64::max);
    let agree = good.iter().filter(|&&z| z <= RECOVERY_SIGMA).count();
    let frac = agree as f64 / good.len() as f64;
    let pass = worst > BREAKDOWN_SIGMA && *bad_clamps > 0 && frac >= RECOVERY_FRACTION;
    verdict(
        4,
        "classical-P breakdown",
        pass,
        &format!("nbar 5e-8: worst deviation {worst:.1} sigma, {bad_clamps} negative-eigenvalue clamps; nbar 2e-5: {agree}/{} delays within {RECOVERY_SIGMA} sigma", good.len()),
    );
}

#[test]
fn criterion_5_tallies() {
    let t3 = tally(3, 3);
    let t4 = tally(4, 2);
    let listed: Vec<String> = [
        "a+_1(t1) a+_1(t2) a+_1(t0)",
        "a_1(t1) a+_1(t2) a_1(t0)",
        "a_1(t0) a_1(t2) a_1(t1)",
        "a_1(t0) a+_1(t2) a_1(t1)",
        "a_1(t2) a_1(t1) a+_1(t0)",
        "a+_1(t2) a_1(t1) a+_1(t0)",
    ]
    .iter()
    .map(|s| parse_spec(s).unwrap().to_string())
    .collect();
    let mut ours: Vec<String> = t3.infeasible.iter().map(|s| s.to_string()).collect();
    let mut expected = listed.clone();
    ours.sort();
    expected.sort();
    let three = [t3.total, t3.doable(), t3.time_ordered_not_doable(), t3.not_time_ordered];
    let four = [t4.total, t4.doable(), t4.time_ordered_not_doable(), t4.not_time_ordered];
    let pass = three == [104, 74, 6, 24] && four == [240, 160, 0, 80] && ours == expected;
    let missing: Vec<&String> = expected.iter().filter(|s| !ours.contains(s)).collect();
    let extra: Vec<&String> = ours.iter().filter(|s| !expected.contains(s)).collect();
    verdict(
        5,
        "product tallies",
        pass,
        &format!("3 factors/3 times {three:?} (want [104, 74, 6, 24]); 4 factors/2 times {four:?} (want [240, 160, 0, 80]); list missing {missing:?}, extra {extra:?}"),
    );
}

struct Silent;

impl NoiseSource for Silent {
    fn fill(&mut self, _step: u64, _dt: f64, out: &mut [f64]) {
        out.fill(0.0);
    }
}

fn slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let (mx, my) = (xy.iter().map(|p| p.0).sum::<f64>() / n, xy.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `<alpha beta>(T)` over a positive-P ensemble started coherent, with or without the drift correction.
fn kerr_pair_moment(corrected: bool, amp: C64, u: f64, dt: f64, steps: u64, size: usize) -> (Estimate, Estimate) {
    let params = ModelParams::chain(1, u, 0.0, 0.0, 0.0, 0.0, 0.0);
    let base = BoseHubbard::new(params, SOrder::POSITIVE_P).unwrap();
    let model = if corrected { base } else { base.without_correction() };
    let mut e = Ensemble::coherent(&[amp], size, SOrder::POSITIVE_P, 606).unwrap();
    let cfg = StepConfig { dt, iterations: 1, escape_cap: 1e10 };
    let mut scratch = StepScratch::new(&model);
    for (i, (v, esc)) in e.trajectories_mut().enumerate() {
        *esc = advance_trajectory(&model, v, &mut StreamNoise::new(606, i as u64, NoiseKind::Gaussian), 0, steps, &cfg, &mut scratch).escaped;
    }
    (e.average(BLOCKS, |p| p.alpha[0] * p.beta[0]).unwrap(), e.average(BLOCKS, |p| p.alpha[0]).unwrap())
}

#[test]
fn criterion_6_integrator_order() {
    let (delta, gamma, f, t_end) = (-0.275, 1.0, 0.7, 2.0);
    let params = ModelParams::chain(1, 0.0, 0.0, delta, gamma, 0.0, f);
    let model = BoseHubbard::new(params, SOrder::POSITIVE_P).unwrap().with_propagator(Propagator::Linear);
    let kappa = C64::new(-0.5 * gamma, delta);
    let exact = C64::new(0.0, f) / kappa * (C64::new(1.0, 0.0) - (kappa * t_end).exp());
    let mut points = Vec::new();
    for level in 0..5 {
        let dt = 0.1 / (1 << level) as f64;
        let mut v = vec![C64::new(0.0, 0.0); 2];
        let mut scratch = StepScratch::new(&model);
        let cfg = StepConfig { dt, iterations: 1, escape_cap: 1e10 };
        advance_trajectory(&model, &mut v, &mut Silent, 0, (t_end / dt).round() as u64, &cfg, &mut scratch);
        points.push((dt.ln(), (v[0] - exact).norm().ln()));
    }
    let order = slope(&points);
    let order_ok = (order - ORDER_TARGET).abs() <= ORDER_TOL;

    let kerr = BoseHubbard::new(ModelParams::chain(1, 0.0856, 0.0, -0.275, 1.0, 0.0, 3.0), SOrder::POSITIVE_P).unwrap();
    let starts = vec![vec![C64::new(0.0, 0.0); 2]; 16];
    let rows = doubling_sweep(&kerr, &starts, 7, NoiseKind::Gaussian, &StepConfig { dt: 0.02, iterations: 1, escape_cap: 1e10 }, 4, 2.0);
    let shrinking = rows.windows(2).all(|w| w[1].discrepancy < w[0].discrepancy);
    let sweep: Vec<String> = rows.iter().map(|r| format!("{:.1e}", r.discrepancy)).collect();

    let (amp, u, dt, steps, size) = (C64::new(1.0, 0.0), 0.3, 0.01, 200, ENSEMBLE);
    let (cor, cor_mean) = kerr_pair_moment(true, amp, u, dt, steps, size);
    let (unc, unc_mean) = kerr_pair_moment(false, amp, u, dt, steps, size);
    let n0 = amp.norm_sqr();
    let cor_conserved = z(cor.value.re, cor.err_re, n0) <= SIGMA;
    let separation = (cor.value.re - unc.value.re).abs() / cor.err_re.hypot(unc.err_re).max(1e-300);
    let drift_ok = cor_conserved && separation > DRIFT_SEPARATION && z(unc.value.re, unc.err_re, n0) > DRIFT_SEPARATION;
    let t = dt * steps as f64;
    let kerr_mean = amp * (n0 * (C64::new(0.0, -u * t).exp() - 1.0)).exp();
    let mean_z = |e: &Estimate| z(e.value.re, e.err_re, kerr_mean.re).max(z(e.value.im, e.err_im, kerr_mean.im));

    let pass = order_ok && shrinking && drift_ok;
    verdict(
        6,
        "integrator order and drift correction",
        pass,
        &format!(
            "deterministic order {order:.3}; doubling discrepancies {}; <alpha beta> corrected {:.4} +- {:.4}, uncorrected {:.4} +- {:.4} vs {n0} (separation {separation:.2} sigma); <alpha> corrected {:.4} ({:.1} sigma), uncorrected {:.4} ({:.1} sigma), exact {kerr_mean:.4}",
            sweep.join(" > "),
            cor.value.re,
            cor.err_re,
            unc.value.re,
            unc.err_re,
            cor_mean.value,
            mean_z(&cor_mean),
            unc_mean.value,
            mean_z(&unc_mean)
        ),
    );
}

fn evolve(w: &Workers, params: &ModelParams, order: SOrder, size: usize, seed: u64, until: f64) -> Ensemble {
    let dynamics = phasecorr::runner::Dynamics::for_order(params, order).unwrap();
    let mut e = Ensemble::vacuum(params.modes, size, order, seed).unwrap();
    let cfg = StepConfig { dt: DT, iterations: 1, escape_cap: 1e10 };
    phasecorr::runner::evolve_to(w, &dynamics, &mut e, until, &cfg, NoiseKind::Gaussian, 0, BLOCKS, &mut Vec::new()).unwrap();
    e
}

#[test]
fn criterion_7_properties() {
    let w = Workers::new(None).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;

    let p = evolve(&w, &blockade(0.0, 3.0), SOrder::POSITIVE_P, 8192, 701, 5.0);
    let q = p.convert(SOrder::DOUBLED_Q).unwrap();
    for j in 0..2 {
        let a = p.average(BLOCKS, |pt| pt.alpha[j] * pt.beta[j]).unwrap();
        let b = q.average(BLOCKS, |pt| pt.alpha[j] * pt.beta[j]).unwrap();
        let zz = (b.value.re - a.value.re - 1.0).abs() / a.err_re.hypot(b.err_re);
        pass &= zz <= SIGMA;
        parts.push(format!("commutator mode {} {zz:.2} sigma", j + 1));
    }

    let nbar = 0.1;
    let thermal = ModelParams::chain(2, 0.0, 3.0, -0.275, 1.0, nbar, 0.0);
    let t = evolve(&w, &thermal, SOrder::POSITIVE_P, 8192, 702, 12.0);
    for j in 0..2 {
        let n = t.occupation(j, BLOCKS).unwrap();
        let zz = z(n.value.re, n.err_re, nbar);
        pass &= zz <= SIGMA;
        parts.push(format!("thermal n{} {:.4} ({zz:.2} sigma)", j + 1, n.value.re));
    }

    let linear = ModelParams::chain(2, 0.0, 3.0, -0.275, 1.0, 0.0, 0.5);
    let mut proto = protocol(linear.clone(), SOrder::POSITIVE_P, 1024, 703, grid(2.0, 0.25), false);
    proto.t0 = 5.0;
    let (g11, _) = g2_run(&proto, 0, 0);
    let worst = g11.iter().map(|g| (g.value.re - 1.0).abs() - SIGMA * g.err_re).fold(f64::MIN, f64::max);
    pass &= worst <= 1e-9;
    parts.push(format!("coherent g11 max excess {:.1e}", worst.max(0.0)));

    let mut oracle_worst: f64 = 0.0;
    for (params, cutoff) in [(blockade(0.0, 0.01), 6), (blockade(0.0, 3.0), 12), (thermal, 10)] {
        let (l, rho) = oracle_state(&params, cutoff, T0);
        oracle_worst = oracle_worst.max((rho.trace() - C64::new(1.0, 0.0)).norm()).max(rho.hermiticity_error());
        let _ = l;
    }
    pass &= oracle_worst < ORACLE_EXACT;
    parts.push(format!("oracle trace/hermiticity error {oracle_worst:.1e}"));

    let mut snapshots = Vec::new();
    for workers in [1, 4] {
        let w = Workers::new(Some(workers)).unwrap();
        let mut proto = protocol(blockade(0.0, 3.0), SOrder::POSITIVE_P, 512, 704, grid(1.0, 0.5), true);
        proto.t0 = 2.0;
        proto.keep_normal = true;
        let out = run_delays(&w, &proto, None, &mut |_: usize, _: f64, _: &SnapshotStore| -> Result<(), AppError> { Ok(()) }).unwrap();
        snapshots.push((out.at_t0.raw().to_vec(), out.last.raw().to_vec()));
    }
    let identical = snapshots[0] == snapshots[1];
    pass &= identical;
    parts.push(format!("1 vs 4 workers bit-identical: {identical}"));

    verdict(7, "property suite", pass, &parts.join("; "));
}

#[test]
fn criterion_8_chain_front() {
    let sites = 12;
    let taus = grid(3.0, 0.05);
    let params = ModelParams::chain(sites, 0.0856, 3.0, -0.275, 1.0, 0.0, 3.0);
    let proto = protocol(params, SOrder::POSITIVE_P, 4096, 808, taus.clone(), false);
    let w = Workers::new(None).unwrap();
    let mut curves = vec![Vec::new(); sites];
    run_delays(&w, &proto, None, &mut |_: usize, tau: f64, store: &SnapshotStore| -> Result<(), AppError> {
        for (j, c) in curves.iter_mut().enumerate() {
            c.push(g2_delay(store, 0, j, T0, &[tau], BLOCKS)?.points[0].value.re);
        }
        Ok(())
    })
    .unwrap();
    let arrivals: Vec<(f64, f64)> = (1..sites - 1)
        .map(|j| {
            let k = curves[j].iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).unwrap();
            (j as f64, taus[k])
        })
        .collect();
    let speed = 1.0 / slope(&arrivals);
    let target = 2.0 * 3.0;
    let pass = ((speed - target) / target).abs() <= FRONT_TOL;
    let times: Vec<String> = arrivals.iter().map(|a| format!("{:.2}", a.1)).collect();
    verdict(8, "chain correlation front", pass, &format!("arrival times sites 2..{} [{}], speed {speed:.2} sites per unit time vs {target}", sites - 1, times.join(", ")));
}
