//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toric_moc::harness::{
    run_ensemble, run_ensemble_with, Ensemble, LateTime, Observable, CROSSOVER_PX, SLOW_PS, TRANSITION_PS,
};
use toric_moc::observables::{sg_pairs, tee};
use toric_moc::oracle;
use toric_moc::protocol::{trajectory_rng, LayerMode, Observers, Protocol, ProtocolConfig};
use toric_moc::{Basis, LatticeGeometry, Outcome, Partition, PartitionKind, PauliString, StabilizerTableau};

mod common;

const WINDOW: usize = 9;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Ensembles keyed by config, so criteria sharing a point share the runs.
#[derive(Default)]
struct Cache {
    runs: HashMap<String, Ensemble>,
}

impl Cache {
    fn get(&mut self, config: &ProtocolConfig, samples: u64) -> &Ensemble {
        let key = format!("{config:?}/{samples}");
        self.runs.entry(key).or_insert_with(|| run_ensemble(config, samples, None).expect("valid point"))
    }
}

fn late(e: &Ensemble, obs: Observable) -> LateTime {
    e.late_time(obs, WINDOW).expect("enough sample times")
}

fn bulk_point(p_s: f64, seed: u64) -> ProtocolConfig {
    let mut c = ProtocolConfig::new(14, 10, p_s, 0.5);
    if SLOW_PS.contains(&p_s) {
        c.duration = 30 * c.num_qubits() as u64;
    }
    c.seed = seed;
    c
}

const BULK_SEED: u64 = 505;
const BULK_SAMPLES: u64 = 200;

fn criterion1() -> Verdict {
    let g = LatticeGeometry::new(14, 10).unwrap();
    let t = StabilizerTableau::initial_state(&g).unwrap();
    let kp = tee(&t, &Partition::default_for(&g, PartitionKind::KitaevPreskill).unwrap()).unwrap();
    let lw = tee(&t, &Partition::default_for(&g, PartitionKind::LevinWen).unwrap()).unwrap();
    let rank = t.basis().rank();
    let (cz, cx) = (sg_pairs(&t, &g, Basis::Z), sg_pairs(&t, &g, Basis::X));
    verdict(
        kp == -1 && lw == -2 && rank == 280 && cz == 0 && cx == 0,
        format!("gamma_kp={kp} gamma_lw={lw} rank={rank} chi_z={cz} chi_x={cx}"),
    )
}

fn criterion2() -> Verdict {
    let g = LatticeGeometry::new(2, 2).unwrap();
    let n = g.num_qubits();
    let (mut layers, mut measurements, mut regions, mut probes) = (0, 0, 0, 0);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for seed in 0..50u64 {
        let mut meta = ChaCha8Rng::seed_from_u64(seed);
        let mut c = ProtocolConfig::new(2, 2, meta.random(), meta.random());
        c.p_z = (1.0 - c.p_x) * meta.random_range(0.7..=1.0);
        c.seed = seed;
        if seed % 2 == 1 {
            c.layer_mode = LayerMode::Sweep;
        }
        let protocol = Protocol::new(c).unwrap();
        let mut rng = trajectory_rng(seed, 0);
        let mut t = StabilizerTableau::initial_state(&g).unwrap();
        let mut d = oracle::prepare(&g).unwrap();
        for _ in 0..1000 {
            layers += 1;
            for op in protocol.draw_step(&mut rng) {
                measurements += 1;
                let p = protocol.operator(op);
                let e = d.expectation(&p).unwrap();
                let certain = (e.abs() - 1.0).abs() < 1e-8;
                let balanced = e.abs() < 1e-8;
                let o = protocol.apply(&mut t, op);
                if (o == Outcome::Deterministic && !certain) || (o == Outcome::Random && !balanced) {
                    failures.push(format!("seed {seed}: {op:?} tableau {o:?}, <P>={e}"));
                }
                d = d.measure(&p, &mut rng).unwrap().1;
            }
            for _ in 0..50 {
                regions += 1;
                let r = common::random_region(n, &mut rng);
                let dev = (d.entropy(&r).unwrap() - t.subsystem_entropy(&r).unwrap() as f64).abs();
                worst = worst.max(dev);
            }
            let gens: Vec<PauliString> = t.generators().collect();
            for k in 0..4 {
                let mut p = common::random_pauli(n, &mut rng);
                if k % 2 == 1 {
                    p = PauliString::identity(n);
                    for gen in &gens {
                        if rng.random::<bool>() {
                            p.mul_assign(gen);
                        }
                    }
                    if p.is_identity() {
                        continue;
                    }
                }
                probes += 1;
                let e = d.expectation(&p).unwrap();
                if t.contains(&p) != ((e * e - 1.0).abs() < 1e-8) {
                    failures.push(format!("seed {seed}: membership of {p} disagrees, <P>={e}"));
                }
            }
        }
    }
    let pass = failures.is_empty() && worst < 1e-8;
    let mut detail = format!(
        "{layers} layers / {measurements} measurements / {regions} regions / {probes} membership probes; max entropy deviation {worst:.1e}"
    );
    if let Some(f) = failures.first() {
        detail += &format!("; {} disagreements, first: {f}", failures.len());
    }
    verdict(pass, detail)
}

fn criterion3() -> Verdict {
    let mut problems = Vec::new();
    let sizes = [(6, 6), (8, 7), (10, 10)];
    // full recovery: the initial state is a fixed point
    for seed in 0..20u64 {
        let (w, h) = sizes[seed as usize % sizes.len()];
        let mut c = ProtocolConfig::new(w, h, 1.0, 0.5);
        c.layer_mode = LayerMode::Sweep;
        c.duration = 30;
        c.measure_every = 1;
        c.seed = seed;
        let rec = toric_moc::protocol::run_trajectory(&c, 0).unwrap();
        for s in &rec.samples {
            if s.gamma_kp != Some(-1) || s.chi_z_pairs != Some(0) || s.chi_x_pairs != Some(0) {
                problems.push(format!("p_s=1 seed {seed} t={}: {s:?}", s.t));
            }
        }
    }
    // no recovery, one Pauli type: boundary order saturates after one sweep
    for (basis, p_x) in [(Basis::Z, 0.0), (Basis::X, 1.0)] {
        for seed in 0..20u64 {
            let (w, h) = sizes[seed as usize % sizes.len()];
            let mut c = ProtocolConfig::new(w, h, 0.0, p_x);
            c.layer_mode = LayerMode::Sweep;
            c.duration = 10;
            c.measure_every = 1;
            c.seed = seed;
            let protocol = Protocol::new(c).unwrap();
            let observers = Observers { spin_glass: true, kitaev_preskill: None, levin_wen: None };
            let rec = protocol.run_trajectory(0, &observers).unwrap();
            for s in &rec.samples[1..] {
                let pairs = match basis {
                    Basis::Z => s.chi_z_pairs,
                    Basis::X => s.chi_x_pairs,
                };
                if pairs != Some(w * (w - 1)) {
                    problems.push(format!("{basis:?} seed {seed} t={}: pairs {pairs:?}, want {}", s.t, w * (w - 1)));
                }
            }
        }
    }
    let detail = match problems.first() {
        None => "p_s=1: gamma_kp=-1, chi=0 at every layer (20 seeds); p_s=0: chi_z=L_x-1 (p_z=1) and chi_x=L_x-1 (p_x=1) from layer 1 on".to_string(),
        Some(p) => format!("{} violations, first: {p}", problems.len()),
    };
    verdict(problems.is_empty(), detail)
}

fn per_trajectory_window(e: &Ensemble, obs: Observable) -> Vec<f64> {
    let nt = e.times().len();
    e.records
        .iter()
        .map(|r| {
            r.samples[nt - WINDOW..].iter().map(|s| obs.value(s, e.config.width).unwrap()).sum::<f64>() / WINDOW as f64
        })
        .collect()
}

fn criterion4() -> Verdict {
    let mut a = ProtocolConfig::new(10, 10, 0.5, 0.3);
    a.seed = 404;
    let mut b = ProtocolConfig::new(10, 10, 0.5, 0.7);
    b.seed = 405;
    let ea = run_ensemble(&a, 500, None).unwrap();
    let eb = run_ensemble(&b, 500, None).unwrap();
    let (x, z) = (late(&ea, Observable::ChiX), late(&eb, Observable::ChiZ));
    let combined = (x.std_error.powi(2) + z.std_error.powi(2)).sqrt();
    let diff = (x.mean - z.mean).abs();
    // distribution check beyond the mean: compare spreads of the window averages
    let (sx, sz) = (
        toric_moc::observables::ensemble_stats(&per_trajectory_window(&ea, Observable::ChiX), 10).unwrap(),
        toric_moc::observables::ensemble_stats(&per_trajectory_window(&eb, Observable::ChiZ), 10).unwrap(),
    );
    verdict(
        diff <= 3.0 * combined,
        format!(
            "chi_x(p_x=0.3)={:.4}±{:.4} chi_z(p_x=0.7)={:.4}±{:.4} |diff|={diff:.4} <= 3*{combined:.4}; sd {:.3} vs {:.3}",
            x.mean,
            x.std_error,
            z.mean,
            z.std_error,
            sx.variance.sqrt(),
            sz.variance.sqrt()
        ),
    )
}

fn argmax(values: &[(f64, f64)]) -> f64 {
    values.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0
}

fn criterion5(cache: &mut Cache) -> Verdict {
    let mut rows = Vec::new();
    let mut pass = true;
    let mut fluct = Vec::new();
    for &p_s in &TRANSITION_PS {
        let e = cache.get(&bulk_point(p_s, BULK_SEED), BULK_SAMPLES);
        let g = late(e, Observable::GammaKp);
        fluct.push((p_s, g.fluctuation));
        if p_s == 0.5 {
            pass &= g.mean.abs() <= 0.1;
        }
        if p_s >= 0.8 {
            pass &= (g.mean + 1.0).abs() <= 0.05;
        }
        rows.push(format!("{p_s}:{:.3}/{:.3}", g.mean, g.fluctuation));
    }
    let peak = argmax(&fluct);
    pass &= (0.6..=0.7).contains(&peak);
    verdict(pass, format!("p_s:<gamma_kp>/var = {}; fluctuation peak at p_s={peak}", rows.join(" ")))
}

type SigmaPoint = (f64, f64, f64);

fn criterion6(cache: &mut Cache) -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    // (p_x, sigma/L_x, its standard error) per (L_x, basis)
    let mut sigma: HashMap<(usize, Basis), Vec<SigmaPoint>> = HashMap::new();
    for lx in [10usize, 14] {
        let mut zs = Vec::new();
        let mut xs = Vec::new();
        for &p_x in &CROSSOVER_PX {
            let mut c = ProtocolConfig::new(lx, 10, 0.5, p_x);
            c.seed = if lx == 14 && p_x == 0.5 { BULK_SEED } else { 606 };
            let e = cache.get(&c, BULK_SAMPLES);
            let (z, x) = (late(e, Observable::ChiZ), late(e, Observable::ChiX));
            let n = e.samples() as f64;
            // standard error of a standard deviation estimate
            let se_sigma = |l: &LateTime| l.sigma_per_width / (2.0 * (n - 1.0)).sqrt();
            sigma.entry((lx, Basis::Z)).or_default().push((p_x, z.sigma_per_width, se_sigma(&z)));
            sigma.entry((lx, Basis::X)).or_default().push((p_x, x.sigma_per_width, se_sigma(&x)));
            zs.push(z);
            xs.push(x);
        }
        for i in 1..CROSSOVER_PX.len() {
            let tol = |a: &LateTime, b: &LateTime| 2.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            if zs[i].mean > zs[i - 1].mean + tol(&zs[i], &zs[i - 1]) {
                pass = false;
                notes.push(format!(
                    "L_x={lx}: chi_z rises between p_x={} and {}",
                    CROSSOVER_PX[i - 1],
                    CROSSOVER_PX[i]
                ));
            }
            if xs[i].mean < xs[i - 1].mean - tol(&xs[i], &xs[i - 1]) {
                pass = false;
                notes.push(format!(
                    "L_x={lx}: chi_x falls between p_x={} and {}",
                    CROSSOVER_PX[i - 1],
                    CROSSOVER_PX[i]
                ));
            }
        }
        notes.push(format!(
            "L_x={lx} chi_z {} | chi_x {}",
            zs.iter().map(|l| format!("{:.2}", l.mean)).collect::<Vec<_>>().join(","),
            xs.iter().map(|l| format!("{:.2}", l.mean)).collect::<Vec<_>>().join(",")
        ));
    }
    // A peak that grows with system size: an interior local maximum of
    // sigma/L_x at L_x = 14 that also exceeds the L_x = 10 value beyond noise.
    for basis in [Basis::Z, Basis::X] {
        let small = &sigma[&(10, basis)];
        let large = &sigma[&(14, basis)];
        for i in 1..large.len() - 1 {
            let (p_x, s, se) = large[i];
            let is_peak = s > large[i - 1].1 && s > large[i + 1].1;
            let grows = s - small[i].1 > 2.0 * (se * se + small[i].2 * small[i].2).sqrt();
            if is_peak && grows {
                pass = false;
                notes.push(format!("sigma/L_x of chi_{basis:?} has a growing peak at p_x={p_x}"));
            }
        }
        notes.push(format!(
            "sigma/L_x chi_{basis:?} L_x=10 {} L_x=14 {}",
            small.iter().map(|v| format!("{:.3}", v.1)).collect::<Vec<_>>().join(","),
            large.iter().map(|v| format!("{:.3}", v.1)).collect::<Vec<_>>().join(",")
        ));
    }
    verdict(pass, notes.join("; "))
}

fn criterion7() -> Verdict {
    let mut c = ProtocolConfig::new(14, 10, 0.5, 0.2);
    c.measure_every = c.num_qubits() as u64 / 10;
    c.seed = 707;
    let protocol = Protocol::new(c).unwrap();
    let g = protocol.geometry();
    let observers = Observers {
        spin_glass: true,
        kitaev_preskill: Some(Partition::default_for(g, PartitionKind::KitaevPreskill).unwrap()),
        levin_wen: None,
    };
    let e = run_ensemble_with(&protocol, &observers, 200, None).unwrap();
    let chi_late = late(&e, Observable::ChiZ).mean;
    let t_gamma = e.first_time(Observable::GammaKp, |m| m.abs() < 0.1);
    let t_chi = e.first_time(Observable::ChiZ, |m| m > chi_late / 2.0);
    let pass = matches!((t_gamma, t_chi), (Some(a), Some(b)) if a < b);
    let l = protocol.config().num_qubits() as f64;
    let fmt = |t: Option<u64>| t.map(|t| format!("{:.1}L", t as f64 / l)).unwrap_or_else(|| "never".into());
    verdict(
        pass,
        format!("|<gamma_kp>|<0.1 first at {}; <chi_z> > {:.3}/2 first at {}", fmt(t_gamma), chi_late, fmt(t_chi)),
    )
}

fn criterion8(cache: &mut Cache) -> Verdict {
    let mut fluct = Vec::new();
    let mut rows = Vec::new();
    for &p_s in &TRANSITION_PS {
        let e = cache.get(&bulk_point(p_s, BULK_SEED), BULK_SAMPLES);
        let g = late(e, Observable::GammaLw);
        fluct.push((p_s, g.fluctuation));
        rows.push(format!("{p_s}:{:.3}/{:.3}", g.mean, g.fluctuation));
    }
    let peak = argmax(&fluct);
    verdict(
        (0.6..=0.7).contains(&peak),
        format!("p_s:<gamma_lw>/var = {}; fluctuation peak at p_s={peak}", rows.join(" ")),
    )
}

fn main() {
    let mut cache = Cache::default();
    let mut failed = 0;
    let mut run = |n: usize, name: &str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{tag} criterion {n} ({name}, {:.0}s): {}", start.elapsed().as_secs_f64(), o.detail);
    };
    run(1, "initial-state pins", &mut criterion1);
    run(2, "oracle equivalence", &mut criterion2);
    run(3, "exact fixed points", &mut criterion3);
    run(4, "duality symmetry", &mut criterion4);
    run(5, "bulk transition", &mut || criterion5(&mut cache));
    run(6, "boundary crossover", &mut || criterion6(&mut cache));
    run(7, "bulk before boundary", &mut criterion7);
    run(8, "Levin-Wen transition", &mut || criterion8(&mut cache));
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
