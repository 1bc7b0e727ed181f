//! Command dispatch for the `structlti` binary.
//!
//! Exit codes:
//!
//! | code | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0    | the check passed                                     |
//! | 1    | the check failed, or a method precondition failed    |
//! | 2    | unreadable or malformed input                        |
//! | 3    | indeterminate (spectrum inside the Hurwitz dead band) |
//! | 4    | two independent criteria disagree                    |

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use structlti::graph::{adjacency, validate_graph, SparsityPattern};
use structlti::io::{graph_to_json, parse_graph, parse_system, to_json, SystemInput};
use structlti::realize::{minimal_realization, realize_chain, realize_stable, verify_structured_realization};
use structlti::stability::{internal_stability_ss, internal_stability_tf};
use structlti::synthesis::{
    build_youla_generator, close_lft, diagonal_test_with, structured_stabilizability_test, synthesize_k0_with,
};
use structlti::system::is_structured_tf;
use structlti::{Error, Graph, StateSpaceSystem, StructuredPattern, StructuredRealization, Tolerances, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    Fail = 1,
    Input = 2,
    Indeterminate = 3,
    Disagreement = 4,
}

impl Exit {
    fn of(v: Verdict) -> Exit {
        match v {
            Verdict::Yes => Exit::Pass,
            Verdict::No => Exit::Fail,
            Verdict::Indeterminate => Exit::Indeterminate,
        }
    }

    /// Exit code for a library error raised while analysing valid input.
    fn of_error(e: &Error) -> Exit {
        match e {
            Error::Input(_) | Error::Dimension(_) | Error::Graph(_) => Exit::Input,
            Error::Marginal { .. } => Exit::Indeterminate,
            _ => Exit::Fail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Stable,
    Chain,
}

#[derive(Debug, Parser)]
#[command(name = "structlti", version, about = "Structured realization and stabilization of LTI systems over graphs")]
pub struct Cli {
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_rank: f64,
    /// Dead band around the imaginary axis for Hurwitz tests.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_hurwitz: f64,
    /// Tolerance for transfer-matrix equality.
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub tol_match: f64,
    /// Seed for probe points and randomized gains.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check self-loops, transitive closure and acyclicity of a graph.
    CheckGraph { graph: PathBuf },
    /// Check that a system's transfer matrix (and realization, if it has a
    /// state index) respects a graph.
    CheckStructure { system: PathBuf, graph: PathBuf },
    /// Construct a structured realization.
    Realize {
        system: PathBuf,
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Stable)]
        method: Method,
        /// Also write the realized system to this file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Minimal realization (no structure).
    Minreal { system: PathBuf },
    /// Decide whether a structured stabilizing controller exists.
    Stabilizability {
        system: PathBuf,
        graph: PathBuf,
        /// Rescale the diagonal sub-controller gains using --seed.
        #[arg(long)]
        randomize_gains: bool,
    },
    /// Emit the controller K0, or F_l(J, Q) for a stable structured Q.
    Synth {
        system: PathBuf,
        graph: PathBuf,
        #[arg(long)]
        q: Option<PathBuf>,
        /// Rescale the block gains using --seed.
        #[arg(long)]
        randomize_gains: bool,
        /// Also write the controller to this file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Internal stability of the loop (G, K) by both criteria.
    VerifyLoop { plant: PathBuf, controller: PathBuf },
}

/// What a command produced: an exit code, a JSON report and a text
/// rendering of it.
#[derive(Debug)]
pub struct Outcome {
    pub exit: Exit,
    pub report: Value,
    pub text: String,
}

impl Outcome {
    fn new(exit: Exit, report: Value, text: impl Into<String>) -> Self {
        Outcome {
            exit,
            report,
            text: text.into(),
        }
    }

    fn error(e: &Error) -> Self {
        Outcome::new(Exit::of_error(e), json!({ "error": e.to_string() }), format!("error: {e}"))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => to_json(&self.report),
            Format::Text => self.text.clone(),
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph, Error> {
    parse_graph(&read(path)?).map_err(|e| with_path(e, path))
}

fn load_input(path: &Path) -> Result<SystemInput, Error> {
    parse_system(&read(path)?).map_err(|e| with_path(e, path))
}

fn load_system(path: &Path) -> Result<StateSpaceSystem, Error> {
    load_input(path)?.to_state_space().map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
        Error::Dimension(m) => Error::Dimension(format!("{}: {m}", path.display())),
        other => other,
    }
}

/// Pattern of `sys` over a valid graph.
fn load_pattern(sys: &StateSpaceSystem, graph: &Path) -> Result<StructuredPattern, Error> {
    let g = load_graph(graph)?;
    sys.io_pattern(&adjacency(&g)?)
}

/// A structured realization of `sys`: the supplied one if it has a state
/// index and verifies, else one built by column stacking (stable plants) or
/// over the chain (full lower-triangular patterns).
fn structured_realization(
    input: &SystemInput,
    sys: &StateSpaceSystem,
    pattern: &StructuredPattern,
    tol: &Tolerances,
) -> Result<Option<(StructuredRealization, &'static str)>, Error> {
    if matches!(input, SystemInput::StateSpace(_)) && sys.states().is_some() {
        if let Ok(r) = StructuredRealization::verified(sys.clone(), pattern.clone(), tol) {
            return Ok(Some((r, "supplied")));
        }
    }
    if let Ok(r) = realize_stable(sys, pattern, tol) {
        return Ok(Some((r, "stable")));
    }
    let n = pattern.sparsity().n_nodes();
    if pattern.sparsity() == &SparsityPattern::lower_triangular(n) {
        if let Ok(r) = realize_chain(sys, tol) {
            return Ok(Some((r, "chain")));
        }
    }
    Ok(None)
}

fn write_system(path: &Path, sys: &StateSpaceSystem) -> Result<(), Error> {
    std::fs::write(path, to_json(sys) + "\n").map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
}

pub fn tolerances(cli: &Cli) -> Result<Tolerances, Error> {
    let t = Tolerances {
        rank_tol: cli.tol_rank,
        hurwitz_margin: cli.tol_hurwitz,
        match_tol: cli.tol_match,
        probe_seed: cli.seed,
    };
    t.validate()?;
    Ok(t)
}

pub fn run(cli: &Cli) -> Outcome {
    let tol = match tolerances(cli) {
        Ok(t) => t,
        Err(e) => return Outcome::error(&e),
    };
    let result = match &cli.command {
        Command::CheckGraph { graph } => check_graph(graph),
        Command::CheckStructure { system, graph } => check_structure(system, graph, &tol),
        Command::Realize {
            system,
            graph,
            method,
            output,
        } => realize(system, graph, *method, output.as_deref(), &tol),
        Command::Minreal { system } => minreal(system, &tol),
        Command::Stabilizability {
            system,
            graph,
            randomize_gains,
        } => stabilizability(system, graph, randomize_gains.then_some(cli.seed), &tol),
        Command::Synth {
            system,
            graph,
            q,
            randomize_gains,
            output,
        } => synth(system, graph, q.as_deref(), randomize_gains.then_some(cli.seed), output.as_deref(), &tol),
        Command::VerifyLoop { plant, controller } => verify_loop(plant, controller, &tol),
    };
    result.unwrap_or_else(|e| Outcome::error(&e))
}

fn check_graph(path: &Path) -> Result<Outcome, Error> {
    let g = load_graph(path)?;
    let violations: Vec<String> = validate_graph(&g).iter().map(|v| v.to_string()).collect();
    let valid = violations.is_empty();
    let text = if valid {
        format!("valid graph with {} nodes", g.n_nodes())
    } else {
        format!("invalid graph: {}", violations.join("; "))
    };
    Ok(Outcome::new(
        if valid { Exit::Pass } else { Exit::Fail },
        json!({ "valid": valid, "violations": violations, "graph": graph_to_json(&g) }),
        text,
    ))
}

fn check_structure(system: &Path, graph: &Path, tol: &Tolerances) -> Result<Outcome, Error> {
    let input = load_input(system)?;
    let sys = input.to_state_space()?;
    let pattern = load_pattern(&sys, graph)?;
    let tf = is_structured_tf(&sys, &pattern, tol)?;
    let mut report = json!({ "transfer": tf });
    let mut ok = tf.structured;
    let mut text = if tf.structured {
        "transfer matrix respects the graph".to_string()
    } else {
        let blocks: Vec<String> = tf
            .violations
            .iter()
            .map(|v| format!("({}, {})", v.row_node + 1, v.col_node + 1))
            .collect();
        format!("transfer matrix is nonzero in forbidden blocks {}", blocks.join(", "))
    };
    // Only a realization supplied with a state index is checked; transfer
    // input gets an internal realization that is not the user's.
    if matches!(input, SystemInput::StateSpace(_)) && sys.states().is_some() {
        let rep = verify_structured_realization(&sys, &pattern, tol)?;
        text.push_str(&format!("\nrealization: {}", rep.summary()));
        ok &= rep.accepted;
        report["realization"] = serde_json::to_value(&rep).expect("serializable");
    }
    report["structured"] = json!(ok);
    Ok(Outcome::new(if ok { Exit::Pass } else { Exit::Fail }, report, text))
}

fn realize(system: &Path, graph: &Path, method: Method, output: Option<&Path>, tol: &Tolerances) -> Result<Outcome, Error> {
    let sys = load_system(system)?;
    let pattern = load_pattern(&sys, graph)?;
    let built = match method {
        Method::Stable => realize_stable(&sys, &pattern, tol),
        Method::Chain => realize_chain(&sys, tol).and_then(|r| {
            // The chain pattern may be denser than the graph's.
            StructuredRealization::verified(r.into_system(), pattern.clone(), tol)
        }),
    };
    let r = match built {
        Ok(r) => r,
        Err(e @ (Error::Precondition(_) | Error::Structure(_) | Error::Numerical(_))) => {
            return Ok(Outcome::new(
                Exit::Fail,
                json!({ "realized": false, "error": e.to_string() }),
                format!("no realization: {e}"),
            ));
        }
        Err(e) => return Err(e),
    };
    if let Some(path) = output {
        write_system(path, r.sys())?;
    }
    let text = format!(
        "structured realization of order {} with n = {:?}: {}",
        r.sys().n_states(),
        r.states().dims(),
        r.report().summary()
    );
    Ok(Outcome::new(Exit::Pass, serde_json::to_value(&r).expect("serializable"), text))
}

fn minreal(system: &Path, tol: &Tolerances) -> Result<Outcome, Error> {
    let sys = load_system(system)?;
    let min = minimal_realization(&sys, tol)?;
    let text = format!("minimal order {} (from {})", min.n_states(), sys.n_states());
    Ok(Outcome::new(Exit::Pass, serde_json::to_value(&min).expect("serializable"), text))
}

fn stabilizability(system: &Path, graph: &Path, gain_seed: Option<u64>, tol: &Tolerances) -> Result<Outcome, Error> {
    let input = load_input(system)?;
    let sys = input.to_state_space()?;
    let pattern = load_pattern(&sys, graph)?;
    let diag = diagonal_test_with(&sys, &pattern, tol, gain_seed)?;
    let mut report = json!({ "diagonal_test": diag });
    let mut text = format!("diagonal-controller test: {}", verdict_text(diag.stabilizable));
    let mut exit = Exit::of(diag.stabilizable);
    match structured_realization(&input, &sys, &pattern, tol)? {
        Some((r, how)) => {
            let blocks = structured_stabilizability_test(&r, tol)?;
            text.push_str(&format!("\ndiagonal-block test ({how} realization): {}", verdict_text(blocks.stabilizable)));
            for f in &blocks.failing_blocks {
                text.push_str(&format!("\n  node {}: {:?} fails at {}", f.node + 1, f.kind, f.eig));
            }
            let decided = |v| v != Verdict::Indeterminate;
            if decided(blocks.stabilizable) && decided(diag.stabilizable) && blocks.stabilizable != diag.stabilizable {
                exit = Exit::Disagreement;
                text.push_str("\nthe two tests disagree");
            }
            report["realization"] = json!(how);
            report["block_test"] = serde_json::to_value(&blocks).expect("serializable");
        }
        None => {
            text.push_str("\nno structured realization available; block test skipped");
            report["realization"] = Value::Null;
        }
    }
    report["stabilizable"] = json!(diag.stabilizable);
    Ok(Outcome::new(exit, report, text))
}

fn verdict_text(v: Verdict) -> &'static str {
    match v {
        Verdict::Yes => "stabilizable",
        Verdict::No => "not stabilizable",
        Verdict::Indeterminate => "indeterminate",
    }
}

fn synth(
    system: &Path,
    graph: &Path,
    q: Option<&Path>,
    gain_seed: Option<u64>,
    output: Option<&Path>,
    tol: &Tolerances,
) -> Result<Outcome, Error> {
    let input = load_input(system)?;
    let sys = input.to_state_space()?;
    let pattern = load_pattern(&sys, graph)?;
    let q = q.map(load_system).transpose()?;
    let Some((r, how)) = structured_realization(&input, &sys, &pattern, tol)? else {
        return Ok(Outcome::new(
            Exit::Fail,
            json!({ "synthesized": false, "error": "no structured stabilizable and detectable realization available" }),
            "no structured realization available; supply one with a state index",
        ));
    };
    let blocks = structured_stabilizability_test(&r, tol)?;
    if blocks.stabilizable != Verdict::Yes {
        return Ok(Outcome::new(
            Exit::of(blocks.stabilizable),
            json!({ "synthesized": false, "block_test": blocks }),
            format!("not stabilizable: {} failing diagonal block(s)", blocks.failing_blocks.len()),
        ));
    }
    let design = synthesize_k0_with(&r, tol, gain_seed)?;
    let (controller, closed_loop, extra) = match q {
        None => (design.controller.clone(), design.closed_loop.clone(), Value::Null),
        Some(q) => {
            let gen = build_youla_generator(&r, &design.gains, tol)?;
            let c = close_lft(&gen, &q, tol)?;
            let extra = json!({
                "identity_residual": c.identity_residual,
                "lft_deviation": c.lft_deviation,
                "q_states": c.parameter.states().dims(),
            });
            (c.controller, c.closed_loop, extra)
        }
    };
    if let Some(path) = output {
        write_system(path, controller.sys())?;
    }
    let exit = Exit::of(closed_loop.verdict);
    let text = format!(
        "{} controller of order {} (plant realization: {how}); closed-loop abscissa {:.3e}",
        if extra.is_null() { "K0" } else { "F_l(J, Q)" },
        controller.sys().n_states(),
        closed_loop.abscissa
    );
    let mut report = json!({
        "synthesized": true,
        "realization": how,
        "controller": controller.sys(),
        "gains": design.gains,
        "closed_loop": closed_loop,
    });
    if !extra.is_null() {
        report["lft"] = extra;
    }
    Ok(Outcome::new(exit, report, text))
}

fn verify_loop(plant: &Path, controller: &Path, tol: &Tolerances) -> Result<Outcome, Error> {
    let g = load_system(plant)?;
    let k = load_system(controller)?;
    let ss = internal_stability_ss(&g, &k, tol)?;
    let tf = internal_stability_tf(&g, &k, &tol.clone())?;
    let agree = ss.verdict == tf.verdict;
    let exit = if agree { Exit::of(ss.verdict) } else { Exit::Disagreement };
    let text = format!(
        "state-space criterion: {:?}; transfer criterion: {:?}{}",
        ss.verdict,
        tf.verdict,
        if agree { "" } else { " (disagreement)" }
    );
    Ok(Outcome::new(
        exit,
        json!({ "agree": agree, "verdict": ss.verdict, "state_space": ss, "transfer": tf }),
        text,
    ))
}
