use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use toric_moc::harness::{self, Figure, Observable, PointSummary, Scale, SweepPlan};
use toric_moc::observables::{self, Partition, PartitionKind};
use toric_moc::oracle;
use toric_moc::protocol::{trajectory_rng, Protocol, ProtocolConfig};
use toric_moc::tableau::Outcome;
use toric_moc::{Basis, LatticeGeometry, StabilizerTableau};

#[derive(Parser)]
#[command(name = "toric-moc", version, about = "Measurement-only circuit dynamics of the toric code on a cylinder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Trajectories per point.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    lx: Option<usize>,
    #[arg(long)]
    ly: Option<usize>,
    #[arg(long)]
    ps: Option<f64>,
    /// Also sets p_z = 1 - p_x.
    #[arg(long)]
    px: Option<f64>,
    /// Number of time steps.
    #[arg(long)]
    duration: Option<u64>,
}

impl Overrides {
    fn apply(&self, c: &mut ProtocolConfig) {
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(w) = self.lx {
            c.width = w;
        }
        if let Some(h) = self.ly {
            c.height = h;
        }
        if let Some(p) = self.ps {
            c.p_s = p;
        }
        if let Some(p) = self.px {
            c.p_x = p;
            c.p_z = 1.0 - p;
        }
        if let Some(d) = self.duration {
            c.duration = d;
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one ensemble from a TOML config file.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        over: Overrides,
    },
    /// Run every point of a sweep plan.
    Sweep {
        plan: PathBuf,
        #[command(flatten)]
        over: Overrides,
    },
    /// Generate the dataset behind one figure.
    Figure {
        name: String,
        #[arg(long, value_enum, default_value = "desk")]
        scale: Scale,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        over: Overrides,
    },
    /// Check the engine against the dense oracle and the initial-state values.
    Validate {
        #[command(flatten)]
        over: Overrides,
    },
    /// Time the engine and a full observed trajectory.
    Bench {
        #[command(flatten)]
        over: Overrides,
    },
}

fn report(s: &PointSummary) {
    let c = &s.config;
    let part = |o: Observable| s.get(o).map(|l| format!("{:.3}", l.mean)).unwrap_or_else(|| "-".into());
    eprintln!(
        "lx={} ly={} p_s={} p_x={} p_z={} samples={}  chi_z={} chi_x={} gamma_kp={} gamma_lw={}",
        c.width,
        c.height,
        c.p_s,
        c.p_x,
        c.p_z,
        s.samples,
        part(Observable::ChiZ),
        part(Observable::ChiX),
        part(Observable::GammaKp),
        part(Observable::GammaLw)
    );
}

fn run(config: PathBuf, out: PathBuf, over: Overrides) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
    let mut cfg = ProtocolConfig::from_toml(&text).with_context(|| format!("parsing {}", config.display()))?;
    over.apply(&mut cfg);
    cfg.validate()?;
    let ens = harness::run_ensemble(&cfg, over.samples.unwrap_or(1), over.workers)?;
    ens.write_csv(&out, harness::DEFAULT_WINDOW)?;
    let late = Observable::ALL.iter().filter_map(|&o| Some((o, ens.late_time(o, harness::DEFAULT_WINDOW)?))).collect();
    report(&PointSummary { config: cfg, samples: ens.samples() as u64, late });
    Ok(())
}

fn sweep(path: PathBuf, over: Overrides) -> anyhow::Result<()> {
    let mut plan = SweepPlan::load(&path)?;
    if let Some(s) = over.seed {
        plan.seed = s;
    }
    if over.workers.is_some() {
        plan.workers = over.workers;
    }
    if let Some(n) = over.samples {
        plan.samples = n;
        plan.grids.iter_mut().for_each(|g| g.samples = None);
        plan.points.iter_mut().for_each(|p| p.samples = None);
    }
    harness::run_plan(&plan, report)?;
    Ok(())
}

fn figure(name: String, scale: Scale, out: PathBuf, over: Overrides) -> anyhow::Result<()> {
    let fig: Figure = name.parse()?;
    let mut plan = harness::figure_plan(fig, scale, out, over.seed.unwrap_or(0), over.workers);
    if let Some(n) = over.samples {
        plan.grids.iter_mut().for_each(|g| g.samples = Some(n));
    }
    if let Some(w) = over.lx {
        plan.grids.iter_mut().for_each(|g| g.widths = vec![w]);
        plan.grids.dedup_by(|a, b| a.p_s == b.p_s && a.horizon == b.horizon);
    }
    if let Some(h) = over.ly {
        plan.grids.iter_mut().for_each(|g| g.height = h);
    }
    harness::run_plan(&plan, report)?;
    Ok(())
}

fn validate(over: Overrides) -> anyhow::Result<()> {
    // Initial-state values on the reference lattice.
    let g = LatticeGeometry::new(over.lx.unwrap_or(14), over.ly.unwrap_or(10))?;
    let t = StabilizerTableau::initial_state(&g)?;
    let kp = observables::tee(&t, &Partition::default_for(&g, PartitionKind::KitaevPreskill)?)?;
    let lw = observables::tee(&t, &Partition::default_for(&g, PartitionKind::LevinWen)?)?;
    let rank = t.basis().rank();
    let chi = (observables::sg_pairs(&t, &g, Basis::Z), observables::sg_pairs(&t, &g, Basis::X));
    println!("initial state {}x{}: gamma_kp={kp} gamma_lw={lw} rank={rank} chi_pairs={chi:?}", g.width(), g.height());
    if kp != -1 || lw != -2 || rank != g.num_qubits() || chi != (0, 0) {
        bail!("initial-state values differ from -1, -2, full rank, zero order");
    }

    // Random protocol steps on the smallest lattice, replayed into the oracle.
    let mut cfg = ProtocolConfig::new(2, 2, 0.5, 0.5);
    cfg.seed = over.seed.unwrap_or(0);
    let protocol = Protocol::new(cfg)?;
    let g = protocol.geometry().clone();
    let n = g.num_qubits();
    let layers = over.duration.unwrap_or(200);
    let mut rng = trajectory_rng(protocol.config().seed, 0);
    let mut tableau = StabilizerTableau::initial_state(&g)?;
    let mut dense = oracle::prepare(&g)?;
    let mut worst: f64 = 0.0;
    for _ in 0..layers {
        for op in protocol.draw_step(&mut rng) {
            let pauli = protocol.operator(op);
            let certain = dense.expectation(&pauli)?.abs() > 1.0 - 1e-8;
            let outcome = protocol.apply(&mut tableau, op);
            if certain != (outcome == Outcome::Deterministic) {
                bail!("{op:?}: tableau says {outcome:?}, oracle certainty {certain}");
            }
            dense = dense.measure(&pauli, &mut rng)?.1;
        }
        for mask in 1u32..(1 << n) {
            let region: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
            let e = dense.entropy(&region)?;
            worst = worst.max((e - tableau.subsystem_entropy(&region)? as f64).abs());
        }
    }
    println!("oracle agreement over {layers} steps: max entropy deviation {worst:.2e}");
    if worst > 1e-8 {
        bail!("tableau and oracle entropies disagree");
    }
    println!("ok");
    Ok(())
}

fn bench(over: Overrides) -> anyhow::Result<()> {
    let r = harness::bench(over.lx.unwrap_or(14), over.ly.unwrap_or(10), over.seed.unwrap_or(0))?;
    println!(
        "L={} steps={} per-measurement={:.3}us trajectory={:.3}s overhead={:.2}x",
        r.qubits,
        r.steps,
        r.per_measurement * 1e6,
        r.trajectory,
        r.overhead
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, over } => run(config, out, over),
        Command::Sweep { plan, over } => sweep(plan, over),
        Command::Figure { name, scale, out, over } => figure(name, scale, out, over),
        Command::Validate { over } => validate(over),
        Command::Bench { over } => bench(over),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
