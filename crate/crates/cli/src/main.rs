mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qwalk_core::experiment::{
    row_seed, sample_counts, simulate, usd_grid, usd_sweep, ImperfectionConfig, REFERENCE_TOTAL,
};
use qwalk_core::json::{CircuitFile, ComplexJson, PovmSetJson};
use qwalk_core::linalg::Vec2;
use qwalk_core::optics::{
    compile_netlist, format_dms, output_ports, state_prep_angles, usd_plate_angle, QwpConvention,
};
use qwalk_core::povm::extract_povm;
use qwalk_core::scenario::{usd_state, Scenario};
use qwalk_core::walk::{position_distribution, run_with, CoinSchedule};
use qwalk_core::{Error, Tolerances};

use output::{sig, Table};

#[derive(Parser)]
#[command(name = "qwalk", version, about = "Quantum-walk POVM circuits: simulate, extract, compile, sample")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Overrides every numerical tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Output distribution for one input or every built-in input.
    Run(RunArgs),
    /// Sampled count tables (default 40000 detections per input).
    Sample(RunArgs),
    /// POVM realized by a circuit.
    Extract(CircuitArgs),
    /// Wave-plate netlist for a circuit.
    Compile(CompileArgs),
    /// Discrimination success probability over a θ grid.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ScenarioName {
    Trine,
    Sic,
    Usd,
}

#[derive(Args, Clone)]
struct CircuitArgs {
    #[arg(long, value_enum, conflicts_with = "file", required_unless_present = "file")]
    scenario: Option<ScenarioName>,
    /// Custom circuit: coin layers, iteration pairs or a target POVM.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Discrimination angle, radians or degrees with a `°` suffix.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    /// Built-in state label or a JSON 2-vector such as `[0.6, {"re":0,"im":0.8}]`.
    #[arg(long)]
    input: Option<String>,
    /// `ideal` or a number of detections.
    #[arg(long)]
    counts: Option<String>,
    /// Imperfection config file, or `none`.
    #[arg(long, default_value = "none")]
    imperfections: String,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    /// Zero reference used when reporting QWP angles.
    #[arg(long, default_value = "conjugate")]
    convention: QwpConvention,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated θ values; defaults to kπ/20, k = 1..10.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    thetas: Option<Vec<String>>,
    /// Feed ψ₋ by negating the θ grid.
    #[arg(long)]
    negative: bool,
    #[arg(long, default_value_t = REFERENCE_TOTAL)]
    counts: u64,
    #[arg(long, default_value = "none")]
    imperfections: String,
}

/// A failure with its exit status: 1 for invalid input, 2 for a broken
/// numerical invariant.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::invalid(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli).and_then(|text| emit(&cli, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn tolerances(cli: &Cli) -> CliResult<Tolerances> {
    match cli.tolerance {
        None => Ok(Tolerances::default()),
        Some(t) if t > 0.0 && t.is_finite() => Ok(Tolerances::uniform(t)),
        Some(t) => Err(Failure::invalid(format!("tolerance must be positive, got {t}"))),
    }
}

fn execute(cli: &Cli) -> CliResult<String> {
    let tol = tolerances(cli)?;
    match &cli.command {
        Command::Run(args) => cmd_run(cli, args, &tol, false),
        Command::Sample(args) => cmd_run(cli, args, &tol, true),
        Command::Extract(args) => cmd_extract(cli, args, &tol),
        Command::Compile(args) => cmd_compile(cli, args, &tol),
        Command::Sweep(args) => cmd_sweep(cli, args),
    }
}

/// Parses radians, or degrees written as `45°`, `45deg` or `12°14′`.
fn parse_angle(text: &str) -> CliResult<f64> {
    let bad = || Failure::invalid(format!("cannot parse angle '{text}'"));
    let t = text.trim();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    if let Some(deg) = t.strip_suffix("deg") {
        return Ok(num(deg)?.to_radians());
    }
    if let Some((d, rest)) = t.split_once('°') {
        let degrees = num(d)?;
        let rest = rest.trim().trim_end_matches(['′', '\'']);
        let minutes = if rest.is_empty() { 0.0 } else { num(rest)? };
        let sign = if d.trim_start().starts_with('-') { -1.0 } else { 1.0 };
        return Ok((degrees + sign * minutes / 60.0).to_radians());
    }
    num(t)
}

fn load_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_config(spec: &str) -> CliResult<Option<ImperfectionConfig>> {
    if spec == "none" {
        return Ok(None);
    }
    let text = load_text(Path::new(spec))?;
    let cfg: ImperfectionConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::invalid(format!("imperfection config {spec}: {e}")))?;
    cfg.validate()?;
    Ok(Some(cfg))
}

/// A resolved circuit and the scenario it came from, if built in.
struct Circuit {
    name: String,
    scenario: Option<Scenario>,
    theta: Option<f64>,
    schedule: CoinSchedule,
}

fn resolve_circuit(args: &CircuitArgs, tol: &Tolerances) -> CliResult<Circuit> {
    let theta = args.theta.as_deref().map(parse_angle).transpose()?;
    if let Some(path) = &args.file {
        if theta.is_some() {
            return Err(Failure::invalid("--theta applies only to --scenario usd"));
        }
        let text = load_text(path)?;
        let file = CircuitFile::parse(&text)
            .map_err(|e| Failure::invalid(format!("{}: not a circuit file: {e}", path.display())))?;
        let schedule = file
            .schedule(tol)
            .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
        return Ok(Circuit {
            name: "custom".into(),
            scenario: None,
            theta: None,
            schedule,
        });
    }
    let scenario = match args.scenario.expect("clap requires scenario or file") {
        ScenarioName::Trine => Scenario::Trine,
        ScenarioName::Sic => Scenario::Sic,
        ScenarioName::Usd => Scenario::Usd {
            theta: theta.ok_or_else(|| Failure::invalid("--scenario usd needs --theta"))?,
        },
    };
    if theta.is_some() && !matches!(scenario, Scenario::Usd { .. }) {
        return Err(Failure::invalid("--theta applies only to --scenario usd"));
    }
    Ok(Circuit {
        name: scenario.name().into(),
        scenario: Some(scenario),
        theta,
        schedule: scenario.schedule()?,
    })
}

fn parse_vector(text: &str) -> CliResult<Vec2> {
    let parts: [ComplexJson; 2] = serde_json::from_str(text)
        .map_err(|_| Failure::invalid(format!("unknown input state '{text}'")))?;
    Ok(Vec2::new(parts[0].into(), parts[1].into()))
}

fn resolve_inputs(circuit: &Circuit, input: Option<&str>) -> CliResult<Vec<(String, Vec2)>> {
    let builtin: Vec<(String, Vec2)> = match circuit.scenario {
        Some(sc) => sc.inputs().into_iter().map(|s| (s.label, s.state)).collect(),
        None => vec![("H".into(), Vec2::H), ("V".into(), Vec2::V)],
    };
    match input {
        None => Ok(builtin),
        Some(label) => {
            if let Some(found) = builtin.iter().find(|(l, _)| l == label) {
                return Ok(vec![found.clone()]);
            }
            match label {
                "H" => Ok(vec![("H".into(), Vec2::H)]),
                "V" => Ok(vec![("V".into(), Vec2::V)]),
                _ => Ok(vec![(label.to_string(), parse_vector(label)?)]),
            }
        }
    }
}

#[derive(Serialize)]
struct RunRow {
    state: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    counts: Option<BTreeMap<i64, u64>>,
    probabilities: BTreeMap<i64, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_errors: Option<BTreeMap<i64, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn parse_counts(spec: Option<&str>, sampled: bool) -> CliResult<Option<u64>> {
    match spec {
        None if sampled => Ok(Some(REFERENCE_TOTAL)),
        None | Some("ideal") => Ok(None),
        Some(n) => match n.parse::<u64>() {
            Ok(0) | Err(_) => Err(Failure::invalid(format!("--counts must be 'ideal' or a positive integer, got '{n}'"))),
            Ok(k) => Ok(Some(k)),
        },
    }
}

fn cmd_run(cli: &Cli, args: &RunArgs, tol: &Tolerances, sampled: bool) -> CliResult<String> {
    let circuit = resolve_circuit(&args.circuit, tol)?;
    let total = parse_counts(args.counts.as_deref(), sampled)?;
    let config = load_config(&args.imperfections)?;
    let inputs = resolve_inputs(&circuit, args.input.as_deref())?;
    let ports = output_ports(&circuit.schedule);

    let mut rows = Vec::with_capacity(inputs.len());
    for (i, (label, state)) in inputs.iter().enumerate() {
        let dist = match &config {
            None => {
                let mut d: BTreeMap<i64, f64> = ports.iter().map(|&p| (p, 0.0)).collect();
                d.extend(position_distribution(&run_with(&circuit.schedule, *state, tol)?));
                d
            }
            Some(cfg) => simulate(&circuit.schedule, *state, cfg)?,
        };
        let sum: f64 = dist.values().sum();
        if (sum - 1.0).abs() > tol.normalization {
            return Err(Failure::numerical(format!("{label}: probabilities sum to {sum}")));
        }
        rows.push(match total {
            None => RunRow {
                state: label.clone(),
                counts: None,
                probabilities: dist,
                std_errors: None,
                seed: None,
            },
            Some(n) => {
                let seed = row_seed(cli.seed, i);
                let t = sample_counts(&dist, n, seed)?;
                RunRow {
                    state: label.clone(),
                    counts: Some(t.counts),
                    probabilities: t.probabilities,
                    std_errors: Some(t.std_errors),
                    seed: Some(seed),
                }
            }
        });
    }

    match cli.format {
        Format::Json => {
            let doc = json!({
                "scenario": circuit.name,
                "theta": circuit.theta,
                "counts": total.map_or(json!("ideal"), |n| json!(n)),
                "seed": total.map(|_| cli.seed),
                "rows": rows,
            });
            Ok(output::json_text(&doc))
        }
        Format::Csv => {
            let all_ports: Vec<i64> = rows
                .iter()
                .flat_map(|r| r.probabilities.keys().copied())
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            let mut header = vec!["state".to_string()];
            for p in &all_ports {
                header.push(format!("P{p}"));
                if total.is_some() {
                    header.push(format!("err{p}"));
                }
            }
            if total.is_some() {
                header.push("seed".into());
            }
            let mut table = Table::new(header);
            for r in &rows {
                let mut line = vec![r.state.clone()];
                for p in &all_ports {
                    line.push(sig(r.probabilities.get(p).copied().unwrap_or(0.0)));
                    if let Some(err) = &r.std_errors {
                        line.push(sig(err.get(p).copied().unwrap_or(0.0)));
                    }
                }
                if let Some(seed) = r.seed {
                    line.push(seed.to_string());
                }
                table.push(line);
            }
            table.render()
        }
    }
}

fn cmd_extract(cli: &Cli, args: &CircuitArgs, tol: &Tolerances) -> CliResult<String> {
    let circuit = resolve_circuit(args, tol)?;
    let povm = extract_povm(&circuit.schedule)?;
    let limit = cli.tolerance.unwrap_or(tol.completeness);
    if povm.completeness_residual > limit {
        return Err(Failure::numerical(format!(
            "completeness residual {:.3e} exceeds {limit:.1e}",
            povm.completeness_residual
        )));
    }
    match cli.format {
        Format::Json => Ok(output::json_text(&PovmSetJson::from(&povm))),
        Format::Csv => {
            let mut header = vec!["label".to_string(), "port".into(), "weight".into()];
            for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                header.push(format!("e{r}{c}_re"));
                header.push(format!("e{r}{c}_im"));
            }
            let mut table = Table::new(header);
            for e in &povm.elements {
                let mut line = vec![e.label.clone(), e.port.to_string(), sig(e.weight())];
                for z in e.matrix.0.iter().flatten() {
                    line.push(sig(z.re));
                    line.push(sig(z.im));
                }
                table.push(line);
            }
            table.push_comment(&format!("residual={}", sig(povm.completeness_residual)));
            table.render()
        }
    }
}

fn cmd_compile(cli: &Cli, args: &CompileArgs, tol: &Tolerances) -> CliResult<String> {
    let circuit = resolve_circuit(&args.circuit, tol)?;
    let netlist = compile_netlist(&circuit.schedule);
    for (step, layer) in circuit.schedule.steps().iter().enumerate() {
        for (&x, op) in layer {
            let err = netlist.realized_coin(x, step + 1).phase_distance(op.matrix());
            if err > 1e-10 {
                return Err(Failure::numerical(format!(
                    "plates at step {} position {x} miss the coin by {err:.2e}",
                    step + 1
                )));
            }
        }
    }
    let view = netlist.to_json(args.convention);
    match cli.format {
        Format::Json => Ok(output::json_text(&view)),
        Format::Csv => {
            let mut table = Table::new(
                ["step", "position", "kind", "angle_deg", "angle_dms"].map(String::from).to_vec(),
            );
            for p in &view.plates {
                let kind = serde_json::to_value(p.kind).ok().and_then(|v| v.as_str().map(String::from));
                table.push(vec![
                    p.step.to_string(),
                    p.position.to_string(),
                    kind.unwrap_or_default(),
                    sig(p.angle_deg),
                    p.angle_dms.clone(),
                ]);
            }
            table.render()
        }
    }
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> CliResult<String> {
    let mut thetas = match &args.thetas {
        None => usd_grid(),
        Some(list) => list.iter().map(|s| parse_angle(s)).collect::<CliResult<Vec<_>>>()?,
    };
    if args.negative {
        thetas.iter_mut().for_each(|t| *t = -*t);
    }
    if thetas.is_empty() {
        return Err(Failure::invalid("empty θ grid"));
    }
    let mut config = load_config(&args.imperfections)?.unwrap_or_default();
    config.seed = cli.seed;
    let rows = usd_sweep(&thetas, &config, args.counts)?;

    let mut records = Vec::with_capacity(rows.len());
    for row in &rows {
        let prep = state_prep_angles(usd_state(row.theta.abs(), row.theta > 0.0));
        let c12 = usd_plate_angle(row.theta.abs())?;
        records.push((row, prep.hwp_deg, c12));
    }
    match cli.format {
        Format::Json => {
            let doc: Vec<Value> = records
                .iter()
                .map(|(r, hwp1, c12)| {
                    json!({
                        "theta": r.theta,
                        "hwp1_deg": hwp1,
                        "hwp1_dms": format_dms(*hwp1),
                        "c12_deg": c12,
                        "c12_dms": format_dms(*c12),
                        "p_theory": r.p_theory,
                        "p_sampled": r.p_sampled,
                        "std_error": r.std_error,
                        "seed": r.seed,
                    })
                })
                .collect();
            Ok(output::json_text(&json!({ "counts": args.counts, "seed": cli.seed, "rows": doc })))
        }
        Format::Csv => {
            let mut table = Table::new(
                [
                    "theta", "hwp1_deg", "hwp1_dms", "c12_deg", "c12_dms", "p_theory", "p_sampled",
                    "std_error", "seed",
                ]
                .map(String::from)
                .to_vec(),
            );
            for (r, hwp1, c12) in &records {
                table.push(vec![
                    sig(r.theta),
                    sig(*hwp1),
                    format_dms(*hwp1),
                    sig(*c12),
                    format_dms(*c12),
                    sig(r.p_theory),
                    sig(r.p_sampled),
                    sig(r.std_error),
                    r.seed.to_string(),
                ]);
            }
            table.render()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles_in_both_units() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(parse_angle("1.25").unwrap(), 1.25));
        assert!(close(parse_angle("45°").unwrap(), std::f64::consts::FRAC_PI_4));
        assert!(close(parse_angle("45deg").unwrap(), std::f64::consts::FRAC_PI_4));
        assert!(close(parse_angle("12°14′").unwrap(), (12.0f64 + 14.0 / 60.0).to_radians()));
        assert!(close(parse_angle("-2°15'").unwrap(), (-2.25f64).to_radians()));
        assert!(parse_angle("abc").is_err());
    }

    #[test]
    fn explicit_vectors() {
        let v = parse_vector(r#"[0.6, {"re": 0, "im": 0.8}]"#).unwrap();
        assert_eq!(v.0[1].im, 0.8);
        assert!(parse_vector("psi9-1").is_err());
    }

    #[test]
    fn counts_spec() {
        assert_eq!(parse_counts(None, false).ok().flatten(), None);
        assert_eq!(parse_counts(None, true).ok().flatten(), Some(40_000));
        assert_eq!(parse_counts(Some("ideal"), false).ok().flatten(), None);
        assert_eq!(parse_counts(Some("123"), false).ok().flatten(), Some(123));
        assert!(parse_counts(Some("0"), false).is_err());
        assert!(parse_counts(Some("-4"), false).is_err());
    }
}
