use std::fs;

use rayon::prelude::*;
use serde::Serialize;
use thermoforge_core::bath::{
    build_toy_bath, check_bath_assumptions, energy_window, finite_bath_majorization_with_tolerance, integer_energies,
    verify_oplus_theorem, MAX_PRODUCT_MICROSTATES, MAX_TOY_ENERGY,
};
use thermoforge_core::curve::{build_curve, feasible_transition_with_tolerance};
use thermoforge_core::gibbs_map::{
    detailed_balance_feasible_with, is_gibbs_preserving, lp_transition_feasible_with, satisfies_detailed_balance,
    GibbsMap, LpBackend, EXACT_LP_LIMIT,
};
use thermoforge_core::model::tensor_with_cap;
use thermoforge_core::quantum::dephased_classical;
use thermoforge_core::work::{
    self, f_max, f_min, helmholtz_free_energy, switch_work, switch_work_closed_form, thermal_switch_work, SwitchScenario,
    WorkMode, WorkQuote,
};
use thermoforge_core::{ClassicalState, Error, DEFAULT_TOLERANCE, SUPPORT_TOLERANCE};

use crate::output::{Cell, Report, Table};
use crate::schema::{parse, Input, MapFile, StateFile};
use crate::{CliError, Command, RunConfig};

/// Reads the input files and runs the command.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    let mut texts = Vec::with_capacity(config.inputs.len());
    for path in &config.inputs {
        let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        texts.push((path.display().to_string(), text));
    }
    run_on_texts(config, &texts)
}

/// Runs the command on already-loaded `(source name, JSON text)` inputs.
pub fn run_on_texts(config: &RunConfig, inputs: &[(String, String)]) -> Result<Report, CliError> {
    config.validate()?;
    let ctx = Context { config, inputs };
    match config.command {
        Command::Curve => ctx.curve(),
        Command::Feasible => ctx.feasible(),
        Command::Work => ctx.work(),
        Command::Switch => ctx.switch(),
        Command::LpCheck => ctx.lp_check(false),
        Command::DbCheck => ctx.lp_check(true),
        Command::Oracle => ctx.oracle(),
        Command::Info => ctx.info(),
    }
}

struct Context<'a> {
    config: &'a RunConfig,
    inputs: &'a [(String, String)],
}

#[derive(Serialize)]
struct Quote {
    value: f64,
    epsilon: f64,
    mode: String,
    exact: bool,
    certificate_margin: f64,
}

impl From<WorkQuote> for Quote {
    fn from(q: WorkQuote) -> Self {
        Quote {
            value: q.value,
            epsilon: q.epsilon,
            mode: q.mode.to_string(),
            exact: q.exact,
            certificate_margin: q.certificate_margin,
        }
    }
}

fn with_source<T>(source: &str, r: Result<T, CliError>) -> Result<T, CliError> {
    r.map_err(|e| CliError { kind: e.kind, message: format!("{source}: {}", e.message) })
}

impl Context<'_> {
    fn expect_inputs(&self, min: usize, max: usize) -> Result<(), CliError> {
        let n = self.inputs.len();
        if n < min || n > max {
            let want = if min == max { format!("{min}") } else if max == usize::MAX { format!("at least {min}") } else { format!("{min} to {max}") };
            return Err(CliError::input(format!("`{}` takes {want} input file(s), got {n}", self.config.command.name())));
        }
        Ok(())
    }

    fn files(&self) -> Result<Vec<StateFile>, CliError> {
        self.inputs.iter().map(|(source, text)| parse(text, source)).collect()
    }

    /// `--beta`, else the value shared by the files that give one.
    fn beta(&self, files: &[StateFile]) -> Result<Option<f64>, CliError> {
        if let Some(beta) = self.config.beta {
            return Ok(Some(beta));
        }
        let mut found: Option<(f64, &str)> = None;
        for (file, (source, _)) in files.iter().zip(self.inputs) {
            if let Some(b) = file.beta {
                match found {
                    Some((a, first)) if (a - b).abs() > self.config.tolerance * a.abs().max(1.0) => {
                        return Err(CliError::input(format!(
                            "{first} has beta {a} but {source} has beta {b}; pass --beta to choose"
                        )));
                    }
                    None => found = Some((b, source)),
                    _ => {}
                }
            }
        }
        Ok(found.map(|(b, _)| b))
    }

    fn require_beta(&self, files: &[StateFile]) -> Result<f64, CliError> {
        self.beta(files)?.ok_or_else(|| CliError::input("no inverse temperature: set `beta` in the input or pass --beta"))
    }

    fn state(&self, files: &[StateFile], k: usize, beta: Option<f64>) -> Result<Input, CliError> {
        with_source(&self.inputs[k].0, files[k].state(beta, self.config.tolerance))
    }

    fn classical(&self, files: &[StateFile], k: usize, beta: Option<f64>) -> Result<ClassicalState, CliError> {
        with_source(&self.inputs[k].0, self.state(files, k, beta)?.classical())
    }

    fn same_system(&self, a: &ClassicalState, b: &ClassicalState, k: usize) -> Result<(), CliError> {
        if a.system() != b.system() {
            return Err(CliError::input(format!(
                "{} describes a different system from {} ({} vs {} microstates or different energies)",
                self.inputs[k].0,
                self.inputs[0].0,
                b.dimension(),
                a.dimension()
            )));
        }
        Ok(())
    }

    fn curve(&self) -> Result<Report, CliError> {
        #[derive(Serialize)]
        struct Point {
            x: f64,
            y: f64,
            x_normalized: f64,
        }
        #[derive(Serialize)]
        struct Body {
            beta: f64,
            partition_function: f64,
            total_mass: f64,
            order: Vec<usize>,
            points: Vec<Point>,
        }
        self.expect_inputs(1, 1)?;
        let files = self.files()?;
        let beta = self.require_beta(&files)?;
        let p = self.classical(&files, 0, Some(beta))?;
        let curve = build_curve(&p, beta)?;
        let z = curve.x_max();
        let points: Vec<Point> =
            curve.breakpoints().into_iter().map(|(x, y)| Point { x, y, x_normalized: x / z }).collect();
        let mut table = Table::new(&["x", "y", "x_normalized"]);
        for pt in &points {
            table.push(vec![pt.x.into(), pt.y.into(), pt.x_normalized.into()]);
        }
        let body = Body {
            beta,
            partition_function: curve.x_max(),
            total_mass: curve.total_mass(),
            order: curve.order().to_vec(),
            points,
        };
        Report::new(&body, table, false)
    }

    fn feasible(&self) -> Result<Report, CliError> {
        #[derive(Serialize)]
        struct Body {
            feasible: bool,
            margin: f64,
            tolerance: f64,
            marginal: bool,
            beta: f64,
        }
        self.expect_inputs(2, 2)?;
        let files = self.files()?;
        let beta = self.require_beta(&files)?;
        let p = self.classical(&files, 0, Some(beta))?;
        let q = self.classical(&files, 1, Some(beta))?;
        self.same_system(&p, &q, 1)?;
        let v = feasible_transition_with_tolerance(&p, &q, beta, self.config.tolerance)?;
        let mut table = Table::new(&["feasible", "margin", "tolerance", "marginal"]);
        table.push(vec![v.holds.into(), v.margin.into(), v.tolerance.into(), v.is_marginal().into()]);
        let body = Body { feasible: v.holds, margin: v.margin, tolerance: v.tolerance, marginal: v.is_marginal(), beta };
        Report::new(&body, table, !v.holds)
    }

    fn work(&self) -> Result<Report, CliError> {
        #[derive(Serialize)]
        struct FreeEnergy {
            helmholtz: Option<f64>,
            thermal: f64,
            f_min: f64,
            f_max: f64,
        }
        #[derive(Serialize)]
        struct Body {
            beta: f64,
            epsilon: f64,
            copies: usize,
            dimension: usize,
            free_energy: FreeEnergy,
            distill: Quote,
            form: Quote,
            per_copy_distill: f64,
            per_copy_form: f64,
        }
        self.expect_inputs(1, 1)?;
        let files = self.files()?;
        let beta = self.require_beta(&files)?;
        let eps = self.config.epsilon;
        let mut input = self.state(&files, 0, Some(beta))?;
        let copies = self.config.copies;
        if copies > 1 {
            let one = with_source(&self.inputs[0].0, input.classical())
                .map_err(|e| CliError { message: format!("{} (--copies needs a diagonal state)", e.message), ..e })?;
            let mut power = one.clone();
            for _ in 1..copies {
                power = tensor_with_cap(&power, &one, self.config.max_microstates)?;
            }
            input = Input::Classical(power);
        }
        let (distill, form, helmholtz, fmin, fmax) = match &input {
            Input::Classical(p) => (
                work::w_distill(p, beta, eps)?,
                work::w_form(p, beta, eps)?,
                Some(helmholtz_free_energy(p, beta)?),
                f_min(p, beta, eps)?,
                f_max(p, beta, eps)?,
            ),
            Input::Quantum(rho) => (
                work::w_distill(rho, beta, eps)?,
                work::w_form(rho, beta, eps)?,
                None,
                f_min(rho, beta, eps)?,
                f_max(rho, beta, eps)?,
            ),
        };
        let thermal = -input.system().ln_partition_function(beta)? / beta;
        let n = copies as f64;
        let mut table = Table::new(&["mode", "value", "per_copy", "epsilon", "exact", "certificate_margin"]);
        for q in [&distill, &form] {
            table.push(vec![
                q.mode.to_string().as_str().into(),
                q.value.into(),
                (q.value / n).into(),
                q.epsilon.into(),
                q.exact.into(),
                q.certificate_margin.into(),
            ]);
        }
        let body = Body {
            beta,
            epsilon: eps,
            copies,
            dimension: input.system().dimension(),
            free_energy: FreeEnergy { helmholtz, thermal, f_min: fmin, f_max: fmax },
            per_copy_distill: distill.value / n,
            per_copy_form: form.value / n,
            distill: distill.into(),
            form: form.into(),
        };
        Report::new(&body, table, false)
    }

    fn switch(&self) -> Result<Report, CliError> {
        #[derive(Serialize)]
        struct ModeBody {
            closed_form: f64,
            bisection: Option<Quote>,
        }
        #[derive(Serialize)]
        struct Partition {
            initial: f64,
            #[serde(rename = "final")]
            final_: f64,
        }
        #[derive(Serialize)]
        struct Body {
            beta: f64,
            epsilon: f64,
            work: Option<f64>,
            thermal_work: f64,
            distill: Option<ModeBody>,
            form: Option<ModeBody>,
            initial_f_min: f64,
            partition_functions: Partition,
        }
        self.expect_inputs(2, 2)?;
        let files = self.files()?;
        let beta = self.require_beta(&files)?;
        let eps = self.config.epsilon;
        let initial = self.classical(&files, 0, Some(beta))?;
        let final_state = self.classical(&files, 1, Some(beta))?;
        let scenario = SwitchScenario::new(initial.clone(), final_state.clone(), beta)?;
        let is_thermal = |s: &ClassicalState| -> Result<bool, CliError> {
            let tau = ClassicalState::gibbs(s.system(), beta)?;
            Ok(s.probs().iter().zip(tau.probs()).map(|(a, b)| (a - b).abs()).sum::<f64>() <= DEFAULT_TOLERANCE)
        };
        let mut negative = false;
        let mut mode_body = |mode: WorkMode| -> Result<ModeBody, CliError> {
            let closed_form = switch_work_closed_form(&scenario, eps, mode)?;
            let bisection = match switch_work(&scenario, eps, mode) {
                Ok(q) => Some(Quote::from(q)),
                Err(Error::NoFeasibleWork) => {
                    negative = true;
                    None
                }
                Err(e) => return Err(e.into()),
            };
            Ok(ModeBody { closed_form, bisection })
        };
        let distill = if is_thermal(&final_state)? { Some(mode_body(WorkMode::Distill)?) } else { None };
        let form = if is_thermal(&initial)? { Some(mode_body(WorkMode::Form)?) } else { None };
        if distill.is_none() && form.is_none() {
            return Err(CliError::input(
                "switch needs a thermal final state (distill) or a thermal initial state (form); \
                 leave out `probabilities` to request the Gibbs state",
            ));
        }
        let work = distill.as_ref().or(form.as_ref()).and_then(|m| m.bisection.as_ref()).map(|q| q.value);
        let thermal_work = thermal_switch_work(initial.system(), final_state.system(), beta)?;
        let initial_f_min = f_min(&initial, beta, eps)?;

        let mut table = Table::new(&["quantity", "value"]);
        table.push(vec!["thermal_work".into(), thermal_work.into()]);
        for (name, m) in [("distill", &distill), ("form", &form)] {
            if let Some(m) = m {
                table.push(vec![format!("{name}_closed_form").as_str().into(), m.closed_form.into()]);
                if let Some(q) = &m.bisection {
                    table.push(vec![format!("{name}_bisection").as_str().into(), q.value.into()]);
                    table.push(vec![format!("{name}_certificate_margin").as_str().into(), q.certificate_margin.into()]);
                }
            }
        }
        table.push(vec!["initial_f_min".into(), initial_f_min.into()]);
        let body = Body {
            beta,
            epsilon: eps,
            work,
            thermal_work,
            distill,
            form,
            initial_f_min,
            partition_functions: Partition {
                initial: scenario.initial_partition_function()?,
                final_: scenario.final_partition_function()?,
            },
        };
        Report::new(&body, table, negative)
    }

    fn lp_check(&self, detailed_balance: bool) -> Result<Report, CliError> {
        #[derive(Serialize)]
        struct Body {
            feasible: bool,
            detailed_balance: bool,
            exact: bool,
            residual: f64,
            pivots: usize,
            witness: Option<MapFile>,
            supplied_map: Option<MapCheck>,
        }
        self.expect_inputs(2, 3)?;
        let (state_texts, map_text) = self.inputs.split_at(2);
        let files: Vec<StateFile> = state_texts.iter().map(|(s, t)| parse(t, s)).collect::<Result<_, _>>()?;
        let beta = self.require_beta(&files)?;
        let p = self.classical(&files, 0, Some(beta))?;
        let q = self.classical(&files, 1, Some(beta))?;
        self.same_system(&p, &q, 1)?;
        let system = p.system().clone();
        let tau = ClassicalState::gibbs(&system, beta)?;
        let backend = if self.config.exact { LpBackend::Exact } else { LpBackend::Auto };
        let report = if detailed_balance {
            detailed_balance_feasible_with(&p, &q, &system, beta, backend)?
        } else {
            lp_transition_feasible_with(&p, &q, &tau, backend)?
        };
        let tol = self.config.tolerance;
        let supplied_map = match map_text.first() {
            None => None,
            Some((source, text)) => {
                let m: MapFile = parse(text, source)?;
                Some(with_source(source, check_map(&m, &p, &q, &tau, beta, tol))?)
            }
        };
        let mut header = vec!["target".to_string()];
        header.extend((0..p.dimension()).map(|i| format!("from_{i}")));
        let mut table = Table { header, rows: Vec::new() };
        if let Some(w) = &report.witness {
            for (j, row) in w.rows().into_iter().enumerate() {
                let mut cells = vec![Cell::from(j)];
                cells.extend(row.into_iter().map(Cell::from));
                table.push(cells);
            }
        }
        let map_ok = supplied_map.as_ref().map_or(true, |m| {
            m.gibbs_preserving && m.maps_initial_to_target && (!detailed_balance || m.detailed_balance == Some(true))
        });
        let body = Body {
            feasible: report.feasible,
            detailed_balance,
            exact: report.exact,
            residual: report.residual,
            pivots: report.pivots,
            witness: report.witness.as_ref().map(MapFile::from_map),
            supplied_map,
        };
        Report::new(&body, table, !(report.feasible && map_ok))
    }

    fn oracle(&self) -> Result<Report, CliError> {
        #[derive(Serialize)]
        struct Bath {
            max_energy: i64,
            growth: f64,
            microstates: u64,
        }
        #[derive(Serialize)]
        struct Assumptions {
            window: [i64; 2],
            mean_energy: f64,
            peaked: bool,
            exponential_growth: bool,
            energy_matching: bool,
            residual: f64,
            worst: Option<[i64; 2]>,
            delta: f64,
            residual_ok: bool,
            effective_beta: f64,
        }
        #[derive(Serialize)]
        struct Block {
            total_energy: i64,
            distance: f64,
        }
        #[derive(Serialize)]
        struct Theorem {
            max_distance: f64,
            bound: f64,
            within_bound: bool,
            window_mass: f64,
            blocks: Vec<Block>,
        }
        #[derive(Serialize)]
        struct Row {
            /// position of the target among the input files
            target: usize,
            total_energy: i64,
            bath: bool,
            bath_margin: f64,
            curve: bool,
            curve_margin: f64,
            marginal: bool,
            agree: bool,
        }
        #[derive(Serialize)]
        struct Body {
            beta: f64,
            bath: Bath,
            assumptions: Assumptions,
            theorem: Theorem,
            agreement: Vec<Row>,
            all_agree: bool,
        }
        self.expect_inputs(1, usize::MAX)?;
        let files = self.files()?;
        let beta = self.beta(&files)?.unwrap_or(std::f64::consts::LN_2);
        let tol = self.config.tolerance;
        let p = self.classical(&files, 0, Some(beta))?;
        let system = p.system().clone();
        let energies = with_source(&self.inputs[0].0, integer_energies(&system).map_err(CliError::from))?;
        let mut targets = Vec::new();
        for k in 1..files.len() {
            let q = self.classical(&files, k, Some(beta))?;
            self.same_system(&p, &q, k)?;
            targets.push(q);
        }
        if targets.is_empty() {
            targets.push(ClassicalState::gibbs(&system, beta)?);
        }
        let bath = build_toy_bath(beta, self.config.bath_max_energy)?;
        let assumptions = check_bath_assumptions(&bath, &energies, self.config.delta)?;
        let window = energy_window(&bath, &system)?;
        let oplus = verify_oplus_theorem(&bath, &p, &window)?;
        let bound = 2.0 * self.config.delta;

        let curves = targets
            .iter()
            .map(|q| feasible_transition_with_tolerance(&p, q, bath.beta(), tol))
            .collect::<Result<Vec<_>, _>>()?;
        let cells: Vec<(usize, i64)> = (0..targets.len()).flat_map(|k| window.iter().map(move |&e| (k, e))).collect();
        let compute = || {
            cells
                .par_iter()
                .map(|&(k, e)| {
                    let v = finite_bath_majorization_with_tolerance(&p, &targets[k], &bath, e, tol)?;
                    let c = curves[k];
                    Ok(Row {
                        target: k + 1,
                        total_energy: e,
                        bath: v.holds,
                        bath_margin: v.margin,
                        curve: c.holds,
                        curve_margin: c.margin,
                        marginal: v.is_marginal() || c.is_marginal(),
                        agree: v.holds == c.holds,
                    })
                })
                .collect::<Result<Vec<Row>, Error>>()
        };
        let agreement = match self.config.jobs {
            Some(jobs) => rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| CliError::compute(e.to_string()))?
                .install(compute)?,
            None => compute()?,
        };
        let all_agree = agreement.iter().all(|r| r.agree || r.marginal);

        let mut table = Table::new(&[
            "target",
            "total_energy",
            "bath",
            "bath_margin",
            "curve",
            "curve_margin",
            "marginal",
            "agree",
        ]);
        for r in &agreement {
            table.push(vec![
                r.target.into(),
                r.total_energy.into(),
                r.bath.into(),
                r.bath_margin.into(),
                r.curve.into(),
                r.curve_margin.into(),
                r.marginal.into(),
                r.agree.into(),
            ]);
        }
        let within_bound = oplus.max_distance <= bound + tol;
        let body = Body {
            beta,
            bath: Bath {
                max_energy: bath.max_energy(),
                growth: bath.growth(),
                microstates: u64::try_from(bath.dimension()).unwrap_or(u64::MAX),
            },
            assumptions: Assumptions {
                window: [assumptions.window.0, assumptions.window.1],
                mean_energy: assumptions.mean_energy,
                peaked: assumptions.peaked,
                exponential_growth: assumptions.exponential_growth,
                energy_matching: assumptions.energy_matching,
                residual: assumptions.residual,
                worst: assumptions.worst.map(|(e, s)| [e, s]),
                delta: assumptions.delta,
                residual_ok: assumptions.residual_ok(),
                effective_beta: assumptions.effective_beta,
            },
            theorem: Theorem {
                max_distance: oplus.max_distance,
                bound,
                within_bound,
                window_mass: oplus.window_mass,
                blocks: oplus.blocks.iter().map(|&(total_energy, distance)| Block { total_energy, distance }).collect(),
            },
            agreement,
            all_agree,
        };
        Report::new(&body, table, !(all_agree && within_bound))
    }

    fn info(&self) -> Result<Report, CliError> {
        #[derive(Serialize)]
        struct Constants {
            default_tolerance: f64,
            support_tolerance: f64,
            exact_lp_limit: usize,
            max_microstates: usize,
            max_toy_energy: i64,
            max_product_microstates: u64,
        }
        #[derive(Serialize)]
        struct Summary {
            source: String,
            label: Option<String>,
            dimension: usize,
            levels: usize,
            beta: Option<f64>,
            partition_function: Option<f64>,
            mean_energy: f64,
            entropy: f64,
            state: StateFile,
        }
        #[derive(Serialize)]
        struct Body {
            name: &'static str,
            version: &'static str,
            constants: Constants,
            inputs: Vec<Summary>,
        }
        let files = self.files()?;
        let mut table = Table::new(&["key", "value"]);
        let constants = Constants {
            default_tolerance: DEFAULT_TOLERANCE,
            support_tolerance: SUPPORT_TOLERANCE,
            exact_lp_limit: EXACT_LP_LIMIT,
            max_microstates: self.config.max_microstates,
            max_toy_energy: MAX_TOY_ENERGY,
            max_product_microstates: MAX_PRODUCT_MICROSTATES as u64,
        };
        table.push(vec!["version".into(), env!("CARGO_PKG_VERSION").into()]);
        table.push(vec!["default_tolerance".into(), constants.default_tolerance.into()]);
        table.push(vec!["support_tolerance".into(), constants.support_tolerance.into()]);
        table.push(vec!["exact_lp_limit".into(), constants.exact_lp_limit.into()]);
        table.push(vec!["max_microstates".into(), constants.max_microstates.into()]);
        let mut inputs = Vec::with_capacity(files.len());
        for (k, file) in files.iter().enumerate() {
            let source = self.inputs[k].0.clone();
            let beta = self.config.beta.or(file.beta);
            let input = self.state(&files, k, beta)?;
            let system = input.system();
            let (mean_energy, entropy) = match &input {
                Input::Classical(p) => (p.mean_energy(), p.entropy()),
                Input::Quantum(rho) => (dephased_classical(rho)?.mean_energy(), rho.entropy()),
            };
            let partition_function = beta.map(|b| system.partition_function(b)).transpose()?;
            table.push(vec![format!("{source}.dimension").as_str().into(), system.dimension().into()]);
            table.push(vec![format!("{source}.mean_energy").as_str().into(), mean_energy.into()]);
            table.push(vec![format!("{source}.entropy").as_str().into(), entropy.into()]);
            inputs.push(Summary {
                source,
                label: system.label().map(String::from),
                dimension: system.dimension(),
                levels: system.levels().len(),
                beta,
                partition_function,
                mean_energy,
                entropy,
                state: StateFile::from_input(&input, beta),
            });
        }
        let body = Body { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION"), constants, inputs };
        Report::new(&body, table, false)
    }
}

#[derive(Serialize)]
struct MapCheck {
    gibbs_preserving: bool,
    maps_initial_to_target: bool,
    max_deviation: f64,
    detailed_balance: Option<bool>,
}

/// Checks a supplied map against `p → q`.
fn check_map(
    m: &MapFile,
    p: &ClassicalState,
    q: &ClassicalState,
    tau: &ClassicalState,
    beta: f64,
    tol: f64,
) -> Result<MapCheck, CliError> {
    let d = p.dimension();
    let flat = m.flat(d)?;
    for i in 0..d {
        let column: f64 = (0..d).map(|j| flat[j * d + i]).sum();
        if (column - 1.0).abs() > tol {
            return Err(CliError::input(format!("map column {i} sums to {column}, not 1")));
        }
    }
    if let Some(k) = flat.iter().position(|&x| x < -tol || !x.is_finite()) {
        return Err(CliError::input(format!("map entry matrix[{}][{}] = {} is not a probability", k / d, k % d, flat[k])));
    }
    if let Some(i) = (0..d).find(|&i| (m.tau[i] - tau.probs()[i]).abs() > tol) {
        return Err(CliError::input(format!(
            "map `tau[{i}]` = {} but the Gibbs state of the system has {}",
            m.tau[i],
            tau.probs()[i]
        )));
    }
    let gibbs_preserving = is_gibbs_preserving(&flat, tau, tol);
    let max_deviation = (0..d)
        .map(|j| ((0..d).map(|i| flat[j * d + i] * p.probs()[i]).sum::<f64>() - q.probs()[j]).abs())
        .fold(0.0, f64::max);
    let detailed_balance = if gibbs_preserving {
        Some(satisfies_detailed_balance(&GibbsMap::new(flat, tau.clone(), tol)?, p.system(), beta, tol)?)
    } else {
        None
    };
    Ok(MapCheck { gibbs_preserving, maps_initial_to_target: max_deviation <= tol, max_deviation, detailed_balance })
}
