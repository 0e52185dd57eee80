use std::fs::File;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use causalprior::bayesnet::{fit_cpds, BayesianNetwork, Evidence};
use causalprior::data::{load_csv, write_csv, CategoricalDataset, CsvOptions, DiscretizationSpec};
use causalprior::graph::{Dag, Pdag, VariableScheme};
use causalprior::intervention::{ate, ate_grid, GridConfig, InterventionQuery};
use causalprior::notears::notears_fit;
use causalprior::nsclc::{table1_cohort_spec, GRID_GENES, GRID_TREATMENTS};
use causalprior::pc::pc_run;
use causalprior::scoring::{BdeuScorer, ScoreTable, ScoreVariant};
use causalprior::synth::{generate_cohort, sample_from_network};
use causalprior_llm::{
    elicit_graph, refine, write_jsonl, AliasMap, ElicitationTranscript, HttpBackend, LlmBackend, PairwiseMode,
    ReplayBackend, Strategy,
};

use crate::config::ToolkitConfig;
use crate::error::{CliError, CliResult};
use crate::{AlgoArg, AteArgs, Cli, Command, DiscoverArgs, ElicitArgs, ModeArg, ScoreArgs, ScoringFlags, StrategyArg};

struct Ctx {
    cfg: ToolkitConfig,
    scheme: Arc<VariableScheme>,
    discretization: DiscretizationSpec,
    seed: u64,
}

impl Ctx {
    /// Relative output paths land in the configured output directory.
    fn out_path(&self, p: &Path) -> CliResult<PathBuf> {
        let path = match &self.cfg.output_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        };
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        Ok(path)
    }

    fn write(&self, p: &Path, contents: &str) -> CliResult<PathBuf> {
        let path = self.out_path(p)?;
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    fn read(&self, p: &Path) -> CliResult<String> {
        std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))
    }

    fn load_data(&self, p: &Path) -> CliResult<CategoricalDataset> {
        let file = File::open(p).map_err(|e| CliError::io(p, e))?;
        let report = load_csv(file, self.scheme.clone(), &self.discretization, CsvOptions::default())?;
        if report.dropped > 0 {
            eprintln!("{}: dropped {} rows with missing values", p.display(), report.dropped);
        }
        Ok(report.dataset)
    }

    fn load_dag(&self, p: &Path) -> CliResult<Dag> {
        Ok(Dag::from_json(&self.read(p)?, self.scheme.clone())?)
    }

    fn load_network(&self, p: &Path) -> CliResult<BayesianNetwork> {
        Ok(BayesianNetwork::from_json(&self.read(p)?, self.scheme.clone())?)
    }

    fn aliases(&self) -> CliResult<AliasMap> {
        match &self.cfg.llm.aliases {
            Some(p) => Ok(AliasMap::from_json(&self.read(p)?, &self.scheme)?),
            None => Ok(AliasMap::nsclc(&self.scheme)?),
        }
    }

    fn backend(&self, replay: Option<&Path>, fallback: Option<&str>) -> CliResult<Box<dyn LlmBackend>> {
        match replay {
            Some(p) => {
                let mut b = ReplayBackend::from_path(p)?;
                if let Some(f) = fallback {
                    b = b.with_fallback(f);
                }
                Ok(Box::new(b))
            }
            None => Ok(Box::new(HttpBackend::new(self.cfg.llm.http_config())?)),
        }
    }

    fn score_settings(&self, flags: &ScoringFlags) -> CliResult<(Vec<f64>, ScoreVariant)> {
        let ess = flags.ess.clone().unwrap_or_else(|| self.cfg.scoring.ess.clone());
        if ess.is_empty() || ess.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(CliError::Usage("--ess needs one or more positive values".into()));
        }
        let variant = match &flags.variant {
            Some(v) => v.parse().map_err(|e: causalprior::Error| CliError::Usage(e.to_string()))?,
            None => self.cfg.scoring.variant,
        };
        Ok((ess, variant))
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => ToolkitConfig::load(p)?,
        None => ToolkitConfig::default(),
    };
    let ctx = Ctx {
        scheme: cfg.load_scheme()?,
        discretization: cfg.discretization(),
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
        cfg,
    };
    match cli.command {
        Command::Ingest { input, out, delimiter } => ingest(&ctx, &input, &out, delimiter),
        Command::Cohort { n, out } => {
            let data = generate_cohort(ctx.scheme.clone(), &table1_cohort_spec(n, ctx.seed))?;
            write_data(&ctx, &data, &out)
        }
        Command::Sample { network, n, out } => {
            let net = ctx.load_network(&network)?;
            let data = sample_from_network(&net, n, ctx.seed)?;
            write_data(&ctx, &data, &out)
        }
        Command::Elicit(args) => elicit(&ctx, args),
        Command::Refine {
            session,
            replay,
            out_graph,
        } => {
            let stdin = std::io::stdin();
            refine_loop(&ctx, &session, replay.as_deref(), out_graph.as_deref(), stdin.lock(), std::io::stdout())
        }
        Command::Discover(args) => discover(&ctx, args),
        Command::Score(args) => score(&ctx, args),
        Command::Compare {
            data,
            graphs,
            scoring,
            out,
        } => score(
            &ctx,
            ScoreArgs {
                data,
                graph: graphs,
                scoring,
                out,
                report: None,
            },
        ),
        Command::Fit { data, graph, ess, out } => {
            let data = ctx.load_data(&data)?;
            let dag = ctx.load_dag(&graph)?;
            let net = fit_cpds(&dag, &data, ess)?;
            ctx.write(&out, &net.to_json())?;
            Ok(())
        }
        Command::Ate(args) => run_ate(&ctx, args),
        Command::ExportDot { graph, out } => {
            let pdag = Pdag::from_json(&ctx.read(&graph)?, ctx.scheme.clone())?;
            match out {
                Some(p) => {
                    ctx.write(&p, &pdag.to_dot())?;
                }
                None => print!("{}", pdag.to_dot()),
            }
            Ok(())
        }
    }
}

fn write_data(ctx: &Ctx, data: &CategoricalDataset, out: &Path) -> CliResult<()> {
    let path = ctx.out_path(out)?;
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    write_csv(data, file, CsvOptions::default())?;
    eprintln!("{} rows written to {}", data.n_rows(), path.display());
    Ok(())
}

fn ingest(ctx: &Ctx, input: &Path, out: &Path, delimiter: char) -> CliResult<()> {
    if !delimiter.is_ascii() {
        return Err(CliError::Usage("delimiter must be a single ASCII character".into()));
    }
    let file = File::open(input).map_err(|e| CliError::io(input, e))?;
    let options = CsvOptions {
        delimiter: delimiter as u8,
    };
    let report = load_csv(file, ctx.scheme.clone(), &ctx.discretization, options)?;
    eprintln!("dropped {} rows with missing values", report.dropped);
    write_data(ctx, &report.dataset, out)
}

fn elicit(ctx: &Ctx, args: ElicitArgs) -> CliResult<()> {
    let strategy = match args.strategy {
        StrategyArg::Single => Strategy::Single {
            constraints: args.constraints,
        },
        StrategyArg::Pairwise => Strategy::Pairwise(match args.mode {
            ModeArg::Symmetric => PairwiseMode::Symmetric,
            ModeArg::Ordered => PairwiseMode::Ordered,
        }),
    };
    let aliases = ctx.aliases()?;
    let mut backend = ctx.backend(args.replay.as_deref(), args.fallback.as_deref())?;
    let context = args.context.unwrap_or_else(|| ctx.cfg.llm.context.clone());
    let (dag, transcript) = elicit_graph(
        &strategy,
        ctx.scheme.clone(),
        backend.as_mut(),
        &aliases,
        &context,
        ctx.cfg.llm.temperature,
    )?;
    ctx.write(&args.out, &dag.to_json())?;
    if let Some(p) = &args.session {
        ctx.write(p, &transcript.to_json())?;
    }
    if let Some(p) = &args.transcript {
        let mut buf = Vec::new();
        write_jsonl(&transcript.exchanges, &mut buf)?;
        ctx.write(p, &String::from_utf8_lossy(&buf))?;
    }
    eprintln!("{} edges from {} exchanges", dag.edge_count(), transcript.exchanges.len());
    Ok(())
}

/// Reads corrections line by line until `:done` or end of input. Only
/// accepted drafts are written back to the session file.
fn refine_loop<R: BufRead, W: Write>(
    ctx: &Ctx,
    session_path: &Path,
    replay: Option<&Path>,
    out_graph: Option<&Path>,
    input: R,
    mut out: W,
) -> CliResult<()> {
    let mut session = ElicitationTranscript::from_json(&ctx.read(session_path)?)?;
    let latest = session
        .latest()
        .ok_or_else(|| CliError::Usage(format!("{} holds no draft to refine", session_path.display())))?;
    let aliases = ctx.aliases()?;
    let mut backend = ctx.backend(replay, None)?;
    let io = |e| CliError::io(Path::new("<stdout>"), e);

    writeln!(out, "{} ({} edges)", latest.version, latest.edges.len()).map_err(io)?;
    for (a, b) in &latest.edges {
        writeln!(out, "  {a} -> {b}").map_err(io)?;
    }
    for line in input.lines() {
        let line = line.map_err(|e| CliError::io(Path::new("<stdin>"), e))?;
        let correction = line.trim();
        if correction == ":done" {
            break;
        }
        if correction.is_empty() {
            continue;
        }
        match refine(
            &session,
            correction,
            backend.as_mut(),
            &ctx.scheme,
            &aliases,
            ctx.cfg.llm.temperature,
        ) {
            Ok(next) => {
                session = next;
                let draft = session.latest().expect("refine appends a draft");
                writeln!(out, "{} ({} edges)", draft.version, draft.edges.len()).map_err(io)?;
                if let Some(diff) = &draft.diff {
                    for (a, b) in &diff.added {
                        writeln!(out, "+ {a} -> {b}").map_err(io)?;
                    }
                    for (a, b) in &diff.removed {
                        writeln!(out, "- {a} -> {b}").map_err(io)?;
                    }
                }
                ctx.write(session_path, &session.to_json())?;
                if let Some(p) = out_graph {
                    ctx.write(p, &draft.to_dag(ctx.scheme.clone())?.to_json())?;
                }
            }
            Err(e) => writeln!(out, "rejected: {e}").map_err(io)?,
        }
    }
    Ok(())
}

fn discover(ctx: &Ctx, args: DiscoverArgs) -> CliResult<()> {
    let data = ctx.load_data(&args.data)?;
    let pdag = match args.algo {
        AlgoArg::Pc => {
            let mut cfg = ctx.cfg.pc_config();
            if let Some(a) = args.alpha {
                cfg.alpha = a;
            }
            if args.max_cond_size.is_some() {
                cfg.max_cond_size = args.max_cond_size;
            }
            if let Some(t) = &args.ci_test {
                cfg.ci_test = t.parse().map_err(|e: causalprior::Error| CliError::Usage(e.to_string()))?;
            }
            if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
                return Err(CliError::Usage("--alpha must lie in (0, 1)".into()));
            }
            pc_run(&data, &cfg)?
        }
        AlgoArg::Notears => {
            let mut cfg = ctx.cfg.notears;
            if let Some(v) = args.max_iter {
                cfg.max_iter = v;
            }
            if let Some(v) = args.h_tol {
                cfg.h_tol = v;
            }
            if let Some(v) = args.w_threshold {
                cfg.w_threshold = v;
            }
            if let Some(v) = args.l1 {
                cfg.l1_penalty = v;
            }
            cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let result = notears_fit(&data, &cfg)?;
            if !result.converged {
                eprintln!("warning: NOTEARS stopped before reaching h_tol (h = {:e})", result.h);
            }
            if let Some(p) = &args.weights {
                ctx.write(p, &result.raw.to_csv())?;
            }
            result.dag.to_pdag()
        }
    };
    ctx.write(&args.out, &pdag.to_json())?;
    if let Some(p) = &args.dot {
        ctx.write(p, &pdag.to_dot())?;
    }
    Ok(())
}

fn graph_label(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string())
}

fn score(ctx: &Ctx, args: ScoreArgs) -> CliResult<()> {
    let (ess, variant) = ctx.score_settings(&args.scoring)?;
    let data = ctx.load_data(&args.data)?;
    let graphs = args
        .graph
        .iter()
        .map(|p| Ok((graph_label(p), ctx.load_dag(p)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let table = ScoreTable::build(&graphs, &data, &ess, variant)?;
    print!("{}", table.to_text());
    if let Some(p) = &args.out {
        ctx.write(p, &table.to_csv())?;
    }
    if let Some(p) = &args.report {
        let report = BdeuScorer::new(&data).total(&graphs[0].1, ess[0], variant)?;
        ctx.write(p, &report.to_json())?;
    }
    Ok(())
}

fn parse_evidence(net: &BayesianNetwork, given: &[String]) -> CliResult<Evidence> {
    let mut pairs = Vec::with_capacity(given.len());
    for g in given {
        let (var, state) = g
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--given expects VAR=STATE, got `{g}`")))?;
        pairs.push((var.trim(), state.trim()));
    }
    Ok(net.evidence_from_names(&pairs)?)
}

fn run_ate(ctx: &Ctx, args: AteArgs) -> CliResult<()> {
    let net = ctx.load_network(&args.network)?;
    let csv = if args.grid {
        let treatments: Vec<String> = args
            .treatments
            .unwrap_or_else(|| GRID_TREATMENTS.iter().map(|s| s.to_string()).collect());
        let mutations: Vec<String> = args
            .mutations
            .unwrap_or_else(|| GRID_GENES.iter().map(|s| s.to_string()).collect());
        let t: Vec<&str> = treatments.iter().map(String::as_str).collect();
        let m: Vec<&str> = mutations.iter().map(String::as_str).collect();
        let grid = ate_grid(&net, &t, &m, &GridConfig::nsclc_default())?;
        print!("{}", grid.to_text());
        grid.to_csv()
    } else {
        let (Some(treatment), Some(treated), Some(control), Some(outcome), Some(values)) =
            (args.treatment, args.treated, args.control, args.outcome, args.values)
        else {
            return Err(CliError::Usage(
                "give --grid, or --treatment with --treated, --control, --outcome and --values".into(),
            ));
        };
        let scheme = net.scheme();
        let t = scheme.index_of(&treatment)?;
        let o = scheme.index_of(&outcome)?;
        let q = InterventionQuery {
            treatment: t,
            treated_state: scheme.state_index(t, &treated)?,
            control_state: scheme.state_index(t, &control)?,
            outcome: o,
            outcome_values: values,
            evidence: parse_evidence(&net, &args.given)?,
        };
        let effect = ate(&net, &q)?;
        println!("{effect:.6}");
        format!("treatment,treated,control,outcome,ate\n{treatment},{treated},{control},{outcome},{effect:.6}\n")
    };
    if let Some(p) = &args.out {
        ctx.write(p, &csv)?;
    }
    Ok(())
}
