use std::path::Path;

use pulsefit::circuits::build_deutsch_jozsa;
use pulsefit::evolve::SolverOptions;
use pulsefit::ga::{self, baseline_genome, CircuitFitness, GAConfig};
use pulsefit::harness::cli::{main_with_args, EXIT_OK};
use pulsefit::harness::{
    parse_generation_log, run_experiment, Algorithm, ExperimentConfig, ExperimentResult, GenomeRecord,
    BEST_GENOME_FILE, LOG_FILE, SUMMARY_FILE,
};
use pulsefit::noise::NoiseParams;
use pulsefit::pulse::{build_spin_chain_processor, CompilationCache, PulseSchedule};
use pulsefit::qmath::{matrix_exponential, ComplexMatrix, I};

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn cli_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let code = main_with_args([
        "pulsefit", "--algorithm", "dj", "--qubits", "2", "--population", "6", "--generations", "3",
        "--seed", "5", "--workers", "2", "--output-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    for f in [
        LOG_FILE, BEST_GENOME_FILE, SUMMARY_FILE, "plot_data.csv", "circuit.csv", "config.json",
        "schedule_best.csv", "waveform_best.csv", "schedule_baseline.csv", "waveform_baseline.csv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let log = parse_generation_log(&read(&out, LOG_FILE), &out.join(LOG_FILE)).unwrap();
    assert_eq!(log.len(), 4);
    let cfg = ExperimentConfig::from_json(&read(&out, "config.json")).unwrap();
    assert_eq!(cfg.ga.master_seed, 5);
    assert_eq!(cfg.ga.population_size, 6);
}

fn small(dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        algorithm: Algorithm::DeutschJozsa,
        n_qubits: 3,
        ga: GAConfig {
            population_size: 6,
            generations: 3,
            master_seed: 11,
            ..Default::default()
        },
        workers: 1,
        output_dir: dir.to_path_buf(),
        ..Default::default()
    }
}

#[test]
fn exported_pulses_match_best_genome() {
    let dir = tempfile::tempdir().unwrap();
    let result = run_experiment(&small(dir.path())).unwrap();
    let record = GenomeRecord::from_json(&read(dir.path(), BEST_GENOME_FILE)).unwrap();
    assert_eq!(record.fitness, result.best_fidelity);
    let slots: u32 = record.genes.iter().map(|g| g.num_tslots).sum();

    let waveform = read(dir.path(), "waveform_best.csv");
    assert_eq!(waveform.lines().count() - 1, slots as usize);
    let schedule = PulseSchedule::from_csv(&read(dir.path(), "schedule_best.csv")).unwrap();
    assert_eq!(schedule.len(), slots as usize);
    let total: f64 = record.genes.iter().map(|g| g.evo_time).sum();
    assert!((schedule.total_time() - total).abs() < 1e-9);

    // the exported genome reproduces its recorded fitness
    let circuit = build_deutsch_jozsa(2).unwrap();
    let proc = build_spin_chain_processor(3).unwrap();
    let fitness = CircuitFitness::new(circuit, proc, NoiseParams::default(), SolverOptions::default()).unwrap();
    let again = ga::evaluate_fitness(
        &record.genes,
        record.seed,
        fitness.circuit(),
        fitness.processor(),
        &NoiseParams::default(),
        &SolverOptions::default(),
    )
    .unwrap();
    assert!((again - record.fitness).abs() < 1e-9, "{again} vs {}", record.fitness);
}

#[test]
fn summary_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let result = run_experiment(&small(dir.path())).unwrap();
    let back = ExperimentResult::from_json(&read(dir.path(), SUMMARY_FILE)).unwrap();
    assert_eq!(back, result);
    assert_eq!(back.generations_run, 3);
    assert!(back.best_fidelity >= back.best_avg_fidelity);
    assert!(back.log_path.ends_with(LOG_FILE));
}

#[test]
fn log_statistics_match_fitness_history() {
    let circuit = build_deutsch_jozsa(1).unwrap();
    let proc = build_spin_chain_processor(2).unwrap();
    let fitness = CircuitFitness::new(circuit, proc, NoiseParams::default(), SolverOptions::default()).unwrap();
    let cfg = GAConfig {
        population_size: 7,
        generations: 4,
        master_seed: 3,
        ..Default::default()
    };
    let out = ga::run(&cfg, 5, &fitness, 2).unwrap();
    assert_eq!(out.log.len(), out.fitness_history.len());
    for (row, values) in out.log.iter().zip(&out.fitness_history) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((row.avg - mean).abs() < 1e-12);
        assert!((row.std - std).abs() < 1e-12);
        assert_eq!(row.max, values.iter().copied().fold(f64::MIN, f64::max));
        assert_eq!(row.min, values.iter().copied().fold(f64::MAX, f64::min));
    }
}

/// Product of slice exponentials, built directly from the processor Hamiltonian.
fn schedule_unitary(schedule: &PulseSchedule, proc: &pulsefit::pulse::Processor) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(proc.dim());
    for s in schedule.slices() {
        let step = matrix_exponential(&proc.hamiltonian(&s.amplitudes).scale(-I * s.duration)).unwrap();
        u = &step * &u;
    }
    u
}

#[test]
fn every_baseline_gate_compiles_noiselessly() {
    let circuit = build_deutsch_jozsa(3).unwrap();
    let proc = build_spin_chain_processor(circuit.n_qubits).unwrap();
    let cache = CompilationCache::new();
    let d = proc.dim() as f64;
    for (k, (gate, gene)) in circuit.gates.iter().zip(baseline_genome(&circuit)).enumerate() {
        let compiled = cache.get_or_compile(gate, &proc, gene, 0).unwrap();
        let u = schedule_unitary(&compiled.schedule(proc.n_controls(), k), &proc);
        let target = gate.full_unitary(circuit.n_qubits).unwrap();
        let overlap = (&target.adjoint() * &u).trace().norm() / d;
        assert!(overlap * overlap >= 0.99, "gate {k} ({}) reached {}", gate.name, overlap * overlap);
    }
}

#[test]
fn presets_load() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets");
    let short = ExperimentConfig::load(&root.join("short.json")).unwrap();
    let long = ExperimentConfig::load(&root.join("long.json")).unwrap();
    for cfg in [&short, &long] {
        cfg.validate().unwrap();
        assert_eq!(cfg.n_qubits, 4);
        assert_eq!((cfg.noise.t1, cfg.noise.t2), (50.0, 30.0));
        assert_eq!((cfg.noise.p_bit_flip, cfg.noise.p_phase_flip), (0.02, 0.02));
    }
    assert_eq!((short.ga.population_size, short.ga.generations), (50, 30));
    assert_eq!((long.ga.population_size, long.ga.generations), (250, 500));
}
