use std::io::Write;
use std::path::Path;

use cmc_core::ea::{run_ea, EaConfig};
use cmc_core::pso::{run_pso, SwarmConfig};
use cmc_core::rng::Stream;
use cmc_core::sampler::{sample_feasible, SamplerConfig};
use cmc_core::simulator::{synth_panel, Simulator};
use cmc_core::{CountTensor, ModelParams, RatingPanel, TraceRecord, TransitionMatrix};

use crate::args::*;
use crate::error::{CliError, Result};
use crate::io::*;

/// Seed of run `r` in a stability batch; runs are spaced so that the
/// per-component offsets of different runs never coincide.
pub fn run_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add(1000 * r as u64)
}

fn gaps(panel: &RatingPanel) -> usize {
    let obs: Vec<_> = panel.observations().collect();
    obs.windows(2)
        .filter(|w| w[0].company == w[1].company && w[1].period > w[0].period + 1)
        .count()
}

pub fn estimate_p(args: &EstimatePArgs, out: &mut dyn Write) -> Result<()> {
    let panel = read_panel(&args.panel, args.classes)?;
    let p: TransitionMatrix<f64> = TransitionMatrix::estimate(&panel)?;
    let path = args.common.out_dir.join("transition_matrix.csv");
    write_file(&path, &format_matrix(&p))?;
    let counts = TransitionMatrix::<f64>::row_counts(&panel);
    let _ = writeln!(out, "companies: {}, observations: {}", panel.company_count(), panel.len());
    for (m, n) in counts.iter().enumerate().take(panel.classes()) {
        let _ = writeln!(out, "class {}: {n} transitions", m + 1);
    }
    let _ = writeln!(out, "gaps skipped: {}", gaps(&panel));
    let _ = writeln!(out, "wrote {}", path.display());
    Ok(())
}

fn load_inputs(args: &EstimateArgs) -> Result<(CountTensor, TransitionMatrix<f64>)> {
    let (panel, p) = match &args.matrix {
        Some(path) => {
            let p = read_matrix(path)?;
            if args.classes.is_some_and(|m| m != p.classes()) {
                return Err(CliError::Usage(format!("matrix has {} classes", p.classes())));
            }
            (read_panel(&args.panel, Some(p.classes()))?, p)
        }
        None => {
            let panel = read_panel(&args.panel, args.classes)?;
            let p = TransitionMatrix::estimate(&panel)?;
            (panel, p)
        }
    };
    let sectors = args.sectors.unwrap_or_else(|| panel.max_sector());
    Ok((CountTensor::from_panel(&panel, sectors)?, p))
}

struct Fit {
    params: ModelParams<f64>,
    loglik: f64,
    iterations: usize,
    trace: Vec<TraceRecord<f64>>,
}

fn fit(args: &EstimateArgs, counts: &CountTensor, p: &TransitionMatrix<f64>, seed: u64) -> Result<Fit> {
    let population = match args.method {
        Method::Pso => args.swarm_size,
        Method::Ea => args.initial_population,
    };
    let sampler = SamplerConfig {
        n_functionals: args.sampling.functionals,
        k_directions: args.sampling.k_directions,
        l_samples: args.sampling.l_samples.unwrap_or(population),
        seed,
    };
    Ok(match args.method {
        Method::Pso => {
            let cfg = SwarmConfig {
                c0: args.c0,
                c1: args.c1,
                c2: args.c2,
                swarm_size: args.swarm_size,
                max_iterations: args.iters,
                var_threshold: args.var_threshold,
                seed,
                max_bounces: args.max_bounces,
            };
            let o = run_pso(counts, p, &cfg, &sampler)?;
            Fit { params: o.best, loglik: o.best_value, iterations: o.iterations, trace: o.trace }
        }
        Method::Ea => {
            let cfg = EaConfig {
                elite: args.elite,
                crossover: args.crossover,
                mutants: args.mutants,
                random: args.random,
                initial_population: args.initial_population,
                max_iterations: args.iters,
                seed,
            };
            let o = run_ea(counts, p, &cfg, &sampler)?;
            Fit { params: o.best, loglik: o.best_value, iterations: o.iterations, trace: o.trace }
        }
    })
}

fn parameter_names(params: &ModelParams<f64>) -> Vec<String> {
    let mut names = Vec::new();
    for m in 0..params.classes() {
        for s in 0..params.sectors() {
            names.push(format!("q_{}_{}", m + 1, s + 1));
        }
    }
    for k in 0..params.chi.probs().len() {
        names.push(format!("chi_{k}"));
    }
    names
}

/// `parameter,min,max,max_diff` over all runs, followed by the largest
/// difference within Q and within the tendency law.
pub fn stability_report(fits: &[ModelParams<f64>]) -> String {
    let names = parameter_names(&fits[0]);
    let nq = fits[0].q.as_slice().len();
    let positions: Vec<Vec<f64>> = fits.iter().map(ModelParams::to_position).collect();
    let mut s = String::from("parameter,min,max,max_diff\n");
    let (mut q_max, mut chi_max) = (0.0f64, 0.0f64);
    for (i, name) in names.iter().enumerate() {
        let lo = positions.iter().map(|x| x[i]).fold(f64::INFINITY, f64::min);
        let hi = positions.iter().map(|x| x[i]).fold(f64::NEG_INFINITY, f64::max);
        let d = hi - lo;
        if i < nq {
            q_max = q_max.max(d);
        } else {
            chi_max = chi_max.max(d);
        }
        s.push_str(&format!("{name},{lo},{hi},{d}\n"));
    }
    s.push_str(&format!("q_max,,,{q_max}\nchi_max,,,{chi_max}\n"));
    s
}

pub fn estimate(args: &EstimateArgs, out: &mut dyn Write) -> Result<()> {
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let (counts, p) = load_inputs(args)?;
    let dir = &args.common.out_dir;
    let mut fits = Vec::with_capacity(args.runs);
    let mut runs = String::from("run,seed,loglik,iterations\n");
    for r in 0..args.runs {
        let seed = run_seed(args.common.seed, r);
        let f = fit(args, &counts, &p, seed)?;
        runs.push_str(&format!("{r},{seed},{},{}\n", f.loglik, f.iterations));
        if r == 0 {
            let result = ResultFile::new(&f.params, f.loglik, args.method.name(), seed, f.iterations);
            write_file(&dir.join("result.json"), &format_result(&result))?;
            write_file(&dir.join("chi.csv"), &format_chi(&f.params.chi))?;
            write_file(&dir.join("trace.csv"), &format_trace(&f.trace))?;
            let _ = writeln!(out, "method: {}, iterations: {}, loglik: {}", args.method.name(), f.iterations, f.loglik);
        }
        fits.push(f.params);
    }
    if args.runs > 1 {
        write_file(&dir.join("runs.csv"), &runs)?;
        let report = stability_report(&fits);
        write_file(&dir.join("stability.csv"), &report)?;
        for line in report.lines().rev().take(2) {
            let _ = writeln!(out, "{line}");
        }
    }
    let _ = writeln!(out, "wrote results to {}", dir.display());
    Ok(())
}

fn load_params(matrix: &Path, params: &Path) -> Result<(TransitionMatrix<f64>, ModelParams<f64>)> {
    let p = read_matrix(matrix)?;
    let params = read_result(params)?.params(&p.nondeterioration())?;
    if params.classes() != p.classes() {
        return Err(CliError::Usage(format!(
            "parameters have {} classes but the matrix has {}",
            params.classes(),
            p.classes()
        )));
    }
    Ok((p, params))
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let (p, params) = load_params(&args.matrix, &args.params)?;
    let panel = read_panel(&args.panel, Some(p.classes()))?;
    let latest = panel.latest();
    let names: Vec<String> = latest.iter().map(|l| l.0.clone()).collect();
    let sectors: Vec<usize> = latest.iter().map(|l| l.1).collect();
    let initial: Vec<usize> = latest.iter().map(|l| l.2).collect();
    let sim = Simulator::new(&p, &params)?;
    let seed = Stream::Simulator.seed(args.common.seed);
    let batch = sim.simulate_batch(&initial, &sectors, args.periods, args.replications, seed)?;
    let path = args.common.out_dir.join("scenarios.csv");
    write_file(&path, &format_scenarios(&batch, &names))?;
    let _ = writeln!(out, "{} rows written to {}", batch.len(), path.display());
    Ok(())
}

pub fn sample(args: &SampleFeasibleArgs, out: &mut dyn Write) -> Result<()> {
    let p = read_matrix(&args.matrix)?;
    let cfg = SamplerConfig {
        n_functionals: args.sampling.functionals,
        k_directions: args.sampling.k_directions,
        l_samples: args.sampling.l_samples.unwrap_or(200),
        seed: args.common.seed,
    };
    let s = sample_feasible(&p.nondeterioration(), args.sectors, &cfg)?;
    let dir = &args.common.out_dir;
    write_file(&dir.join("samples.csv"), &format_samples(&s))?;
    write_file(&dir.join("vertices.csv"), &format_vertices(&s.vertices))?;
    let summary = format!(
        "k_directions={}\nl_samples={}\nvertices={}\nsamples={}\n",
        cfg.k_directions,
        cfg.l_samples,
        s.vertices.len(),
        s.samples.len()
    );
    write_file(&dir.join("sampling.txt"), &summary)?;
    let _ = write!(out, "{summary}");
    Ok(())
}

pub fn synth(args: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let (p, params) = load_params(&args.matrix, &args.params)?;
    let seed = Stream::Simulator.seed(args.common.seed);
    let panel = synth_panel(&p, &params, args.companies, args.periods, seed)?;
    let path = args.common.out_dir.join("panel.csv");
    write_file(&path, &format_panel(&panel))?;
    let _ = writeln!(out, "{} observations written to {}", panel.len(), path.display());
    Ok(())
}
