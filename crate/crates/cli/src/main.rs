use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use klmsim::equivalence::{
    compare_runs, run_equivalence_suite, Engine, EquivalenceReport, FirstQEngine, FockEngine,
    SuiteConfig, DISTRIBUTION_THRESHOLD, STATE_THRESHOLD, SYMMETRY_THRESHOLD,
};
use klmsim::firstq::{evolve, permanent_state, run_firstq};
use klmsim::report::{
    counts_json, counts_tsv, firstq_leaves, fock_leaves, leaves_json, leaves_tsv, record_label,
};
use klmsim::{
    compile_segment, fock, presets, validate, Circuit, Element, RunMode, RunOutput,
    SymmetrizedAssignment,
};
use serde_json::json;

/// Simulate linear-optical circuits in the Fock and first-quantized pictures.
#[derive(Parser)]
#[command(name = "klmsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a circuit file on the occupation-number engine.
    RunFock(RunArgs),
    /// Run a circuit file on the first-quantized engine.
    RunFirstq(RunArgs),
    /// Compare both engines on seeded random circuits.
    Equiv(EquivArgs),
    /// Run a built-in example.
    Demo(DemoArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Circuit JSON file.
    #[arg(value_name = "CIRCUIT", conflicts_with = "circuit")]
    path: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    circuit: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
    mode: Mode,
    /// Number of shots (sampled mode).
    #[arg(long)]
    shots: Option<u64>,
    /// RNG seed (sampled mode).
    #[arg(long)]
    seed: Option<u64>,
    /// Write JSON here and a TSV summary next to it instead of printing.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Args)]
struct EquivArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    max_modes: usize,
    #[arg(long, default_value_t = 3)]
    max_photons: usize,
    #[arg(long, default_value_t = 2)]
    max_detectors: usize,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(value_enum)]
    name: Demo,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    /// Two photons on a 50/50 beamsplitter.
    Hom,
    /// The same pair as a symmetrized two-particle tensor.
    Eq7,
    /// Mesh with a mid-circuit detector and feed-forward, on both engines.
    Fig3,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let rendered = e.render().to_string();
            eprint!("{rendered}");
            if !rendered.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(1);
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::RunFock(args) => run_circuit(args, EngineKind::Fock),
        Command::RunFirstq(args) => run_circuit(args, EngineKind::FirstQ),
        Command::Equiv(args) => equiv(args),
        Command::Demo(args) => match args.name {
            Demo::Hom => demo_hom(args.out.as_deref()),
            Demo::Eq7 => demo_eq7(args.out.as_deref()),
            Demo::Fig3 => demo_fig3(args.out.as_deref()),
        },
    }
}

#[derive(Clone, Copy)]
enum EngineKind {
    Fock,
    FirstQ,
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            bail!("file not found: {}", path.display())
        }
        Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
    };
    let circuit =
        Circuit::from_json(&text).with_context(|| format!("parsing circuit {}", path.display()))?;
    validate(&circuit).into_result()?;
    Ok(circuit)
}

fn run_mode(args: &RunArgs) -> Result<RunMode> {
    match args.mode {
        Mode::Exhaustive => {
            if args.shots.is_some() {
                bail!("--shots only applies to --mode sampled");
            }
            Ok(RunMode::Exhaustive)
        }
        Mode::Sampled => {
            let Some(shots) = args.shots else {
                bail!("--mode sampled requires --shots");
            };
            let Some(seed) = args.seed else {
                bail!("--mode sampled requires --seed");
            };
            if shots == 0 {
                bail!("--shots must be at least 1");
            }
            Ok(RunMode::Sampled { seed, shots })
        }
    }
}

fn run_circuit(args: RunArgs, engine: EngineKind) -> Result<ExitCode> {
    let Some(path) = args.path.as_ref().or(args.circuit.as_ref()) else {
        bail!("no circuit given (pass a path or --circuit PATH)");
    };
    let circuit = load_circuit(path)?;
    let mode = run_mode(&args)?;
    let (json, tsv) = match engine {
        EngineKind::Fock => match fock::run(&circuit, mode)? {
            RunOutput::Branches(leaves) => {
                let leaves = fock_leaves(&leaves);
                (leaves_json(&leaves), leaves_tsv(&leaves))
            }
            RunOutput::Counts(counts) => (counts_json(&counts), counts_tsv(&counts)),
        },
        EngineKind::FirstQ => match run_firstq(&circuit, mode)? {
            RunOutput::Branches(leaves) => {
                let leaves = firstq_leaves(&leaves)?;
                (leaves_json(&leaves), leaves_tsv(&leaves))
            }
            RunOutput::Counts(counts) => (counts_json(&counts), counts_tsv(&counts)),
        },
    };
    emit(args.out.as_deref(), &json, &tsv)?;
    Ok(ExitCode::SUCCESS)
}

fn equiv(args: EquivArgs) -> Result<ExitCode> {
    let report = run_equivalence_suite(SuiteConfig {
        trials: args.trials,
        max_modes: args.max_modes,
        max_photons: args.max_photons,
        max_detectors: args.max_detectors,
        seed: args.seed,
    });
    let json = serde_json::to_string_pretty(&report)?;
    emit(args.out.as_deref(), &json, &report_tsv(&report))?;
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "{} of {} circuits disagree",
            report.failures.len(),
            report.circuits_tested
        );
        Ok(ExitCode::from(2))
    }
}

fn report_tsv(report: &EquivalenceReport) -> String {
    let mut out = format!(
        "circuits_tested\t{}\nmax_distribution_distance\t{:e}\n\
         max_state_distance\t{:e}\nmax_symmetry_defect\t{:e}\nfailures\t{}\n",
        report.circuits_tested,
        report.max_distribution_distance,
        report.max_state_distance,
        report.max_symmetry_defect,
        report.failures.len()
    );
    if !report.failures.is_empty() {
        out.push_str("\ntrial\tdistribution_distance\tstate_distance\tsymmetry_defect\terror\n");
        for f in &report.failures {
            out.push_str(&format!(
                "{}\t{:e}\t{:e}\t{:e}\t{}\n",
                f.trial,
                f.distribution_distance,
                f.state_distance,
                f.symmetry_defect,
                f.error.as_deref().unwrap_or("-")
            ));
        }
    }
    out
}

/// Probabilities are rounded to 12 decimals for display.
fn round12(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn demo_hom(out: Option<&Path>) -> Result<ExitCode> {
    let leaves = fock::run_exhaustive(&presets::hong_ou_mandel())?;
    let probability = |counts: &[u32]| {
        leaves
            .iter()
            .filter(|l| l.record.counts() == counts)
            .fold(0.0, |acc, l| acc + l.probability)
    };
    let rows = [[2, 0], [0, 2]].map(|c| (c, round12(probability(&c))));
    let coincidence = round12(probability(&[1, 1]));
    let json = json!({
        "demo": "hom",
        "input": [1, 1],
        "probabilities": rows
            .iter()
            .map(|(c, p)| json!({ "counts": c, "p": p }))
            .collect::<Vec<_>>(),
        "coincidence": coincidence,
    });
    let mut tsv = String::from("counts\tp\n");
    for (c, p) in &rows {
        tsv.push_str(&format!("({},{})\t{p}\n", c[0], c[1]));
    }
    tsv.push_str(&format!("(1,1)\t{coincidence}\n"));
    emit(out, &serde_json::to_string_pretty(&json)?, &tsv)?;
    Ok(ExitCode::SUCCESS)
}

fn demo_eq7(out: Option<&Path>) -> Result<ExitCode> {
    let state = permanent_state(&SymmetrizedAssignment::new(&[0, 1]), 2)?;
    let u = compile_segment(&[Element::bs(0, 1, std::f64::consts::FRAC_PI_4, 0.0)], 2)?;
    let state = evolve(&state, &u)?;
    let mut entries = Vec::new();
    let mut tsv = String::from("modes\tre\tim\n");
    for (index, a) in state.amplitudes().iter().enumerate() {
        let modes = state.decode(index);
        let (re, im) = (round12(a.re), round12(a.im));
        tsv.push_str(&format!("({},{})\t{re}\t{im}\n", modes[0], modes[1]));
        entries.push(json!({ "modes": modes, "re": re, "im": im }));
    }
    let json = json!({ "demo": "eq7", "input": [0, 1], "amplitudes": entries });
    emit(out, &serde_json::to_string_pretty(&json)?, &tsv)?;
    Ok(ExitCode::SUCCESS)
}

fn demo_fig3(out: Option<&Path>) -> Result<ExitCode> {
    let circuit = presets::feed_forward_mesh();
    let a = FockEngine.run_mapped(&circuit)?;
    let b = FirstQEngine.run_mapped(&circuit)?;
    let cmp = compare_runs(&a, &b);

    let mut rows = Vec::new();
    let mut tsv = String::from("record\tp_fock\tp_firstq\n");
    for leaf in &a.leaves {
        let q = b
            .leaves
            .iter()
            .find(|l| l.record == leaf.record)
            .map_or(0.0, |l| l.probability);
        tsv.push_str(&format!(
            "{}\t{:.12}\t{:.12}\n",
            record_label(&leaf.record),
            leaf.probability,
            q
        ));
        rows.push(json!({ "record": leaf.record, "p_fock": leaf.probability, "p_firstq": q }));
    }
    let agree = cmp.distribution_distance < DISTRIBUTION_THRESHOLD
        && cmp.state_distance < STATE_THRESHOLD
        && b.symmetry_defect < SYMMETRY_THRESHOLD
        && a.leaves.len() == b.leaves.len();
    let json = json!({
        "demo": "fig3",
        "circuit": serde_json::to_value(&circuit)?,
        "leaves": rows,
        "distribution_distance": cmp.distribution_distance,
        "state_distance": cmp.state_distance,
        "symmetry_defect": b.symmetry_defect,
        "agree": agree,
    });
    emit(out, &serde_json::to_string_pretty(&json)?, &tsv)?;
    Ok(if agree {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn tsv_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "tsv") {
        let mut name = out.as_os_str().to_owned();
        name.push(".tsv");
        PathBuf::from(name)
    } else {
        out.with_extension("tsv")
    }
}

fn emit(out: Option<&Path>, json: &str, tsv: &str) -> Result<()> {
    match out {
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{json}")?;
        }
        Some(path) => {
            fs::write(path, format!("{json}\n"))
                .with_context(|| format!("writing {}", path.display()))?;
            let tsv_out = tsv_path(path);
            fs::write(&tsv_out, tsv).with_context(|| format!("writing {}", tsv_out.display()))?;
        }
    }
    Ok(())
}
