//! Command-line front end for `kreinspec`.

pub mod model;
pub mod table;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use kreinspec::discrete_graph::{almost_mathieu_bulk_spectrum, almost_mathieu_spectrum, graph_spectrum, z2_bloch_bands, FluxModel};
use kreinspec::dot_array::{array_spectrum, butterfly_dataset, fock_levels, BUTTERFLY_HEADER};
use kreinspec::krein::ScalarQ;
use kreinspec::linrel::validate_boundary_pair;
use kreinspec::probe::{ac_density, interval_measure, point_mass, LatticeProbe, MatrixProbe, MeasureEstimate, ProbeConfig, ProbeKernel};
use kreinspec::quantum_graph::{duality_spectrum_auto, finite_difference_oracle, secular_oracle};
use kreinspec::sturm_liouville::{dirichlet_spectrum, eta_map, fundamental_system, segment_q_matrix, SegmentQFunction};
use kreinspec::{CMatrix, Multiplicity, RationalNevanlinna, SpectrumDescription, C64};

use crate::model::{ModelFile, ProbeQFile, SchemaError};
use crate::table::{Cell, Table};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SCHEMA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "kreinspec", version, about = "Spectra of self-adjoint extensions via Krein Q-functions")]
pub struct Cli {
    /// Emit a JSON envelope {meta, rows} instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads for internal scans (default: all processors).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum SlAction {
    Fundamental,
    Dirichlet,
    Qmatrix,
    Eta,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum GraphAction {
    Spectrum,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum QgraphAction {
    Duality,
    Secular,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum DotsAction {
    Levels,
    Q,
    Spectrum,
    Butterfly,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum ProbeAction {
    Measure,
    Density,
    Pointmass,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated numbers, got {s:?}"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if !(a.is_finite() && b.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok((a, b))
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = parse_pair(s)?;
    if a >= b {
        return Err(format!("window {a},{b} is empty"));
    }
    Ok((a, b))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a boundary pair (A, B) defines a self-adjoint relation.
    ValidateBc {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Sturm–Liouville segment data for a potential file.
    Sl {
        action: SlAction,
        file: PathBuf,
        /// Spectral parameter as RE,IM.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        z: Option<(f64, f64)>,
        /// Number of Dirichlet eigenvalues.
        #[arg(long)]
        count: Option<usize>,
        /// Coupling α in η(z).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
    },
    /// Discrete magnetic Laplacian of a graph file.
    Graph { action: GraphAction, file: PathBuf },
    /// Bloch bands of the ℤ² magnetic Laplacian at flux p/q.
    Bloch {
        #[arg(long, allow_hyphen_values = true)]
        p: i64,
        #[arg(long)]
        q: u64,
        #[arg(long, allow_hyphen_values = true)]
        l1: f64,
        #[arg(long, allow_hyphen_values = true)]
        l2: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// Truncated almost-Mathieu spectrum.
    Mathieu {
        #[arg(long, allow_hyphen_values = true)]
        p: i64,
        #[arg(long)]
        q: u64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        trunc: usize,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        l1: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        l2: f64,
        /// Drop boundary-localised eigenvalues.
        #[arg(long)]
        bulk: bool,
    },
    /// Equilateral quantum graph spectra.
    Qgraph {
        action: QgraphAction,
        file: PathBuf,
        #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
        window: (f64, f64),
        /// Mesh size for the finite-difference oracle.
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        /// Scan cells for the secular oracle.
        #[arg(long, default_value_t = 2000)]
        grid: usize,
    },
    /// Quantum-dot array model.
    Dots {
        action: DotsAction,
        file: PathBuf,
        #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
        window: Option<(f64, f64)>,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        z: Option<(f64, f64)>,
        /// Levels with m + n < cutoff.
        #[arg(long, default_value_t = 4)]
        cutoff: usize,
        #[arg(long, default_value_t = 10)]
        qmax: u64,
        /// Gap index of q for the butterfly.
        #[arg(long, default_value_t = 1)]
        gap: usize,
    },
    /// Spectral-measure probes.
    Probe {
        action: ProbeAction,
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<f64>,
        #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
        window: Option<(f64, f64)>,
    },
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::ValidateBc { .. } => "validate-bc".into(),
            Command::Sl { action, .. } => format!("sl {}", action_name(*action)),
            Command::Graph { .. } => "graph spectrum".into(),
            Command::Bloch { .. } => "bloch".into(),
            Command::Mathieu { .. } => "mathieu".into(),
            Command::Qgraph { action, .. } => format!("qgraph {}", action_name(*action)),
            Command::Dots { action, .. } => format!("dots {}", action_name(*action)),
            Command::Probe { action, .. } => format!("probe {}", action_name(*action)),
        }
    }
}

fn action_name(a: impl ValueEnum) -> String {
    a.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Schema(SchemaError),
    Model(kreinspec::Error),
    Numerical(kreinspec::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Schema(_) | CliError::Model(_) => EXIT_SCHEMA,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Schema(e) => write!(f, "schema error: {e}"),
            CliError::Model(e) => write!(f, "model rejected: {e}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<kreinspec::Error> for CliError {
    fn from(e: kreinspec::Error) -> Self {
        use kreinspec::Error as E;
        match e {
            E::Input(_) | E::Dimension(_) | E::Precondition { .. } | E::Hypothesis(_) => CliError::Model(e),
            _ => CliError::Numerical(e),
        }
    }
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        CliError::Schema(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn load(path: &Path) -> CliResult<ModelFile> {
    Ok(model::parse_model_file(path)?)
}

fn wrong_kind(path: &Path, got: &ModelFile, want: &str) -> CliError {
    CliError::Schema(SchemaError {
        path: "kind".into(),
        message: format!("{} has kind {:?}; this command needs {want:?}", path.display(), got.kind()),
    })
}

fn need<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("missing required flag {flag}")))
}

fn multiplicity_cell(m: Multiplicity) -> Cell {
    match m {
        Multiplicity::Finite(k) => Cell::from(k),
        Multiplicity::Infinite => Cell::from("inf"),
    }
}

fn point_table(s: &SpectrumDescription) -> Table {
    let mut t = Table::new(&["energy", "multiplicity"]);
    for p in &s.points {
        t.push(vec![p.energy.into(), multiplicity_cell(p.multiplicity)]);
    }
    t
}

fn spectrum_table(s: &SpectrumDescription) -> Table {
    let mut t = Table::new(&["kind", "lo", "hi", "multiplicity", "types"]);
    let mut rows: Vec<(f64, Vec<Cell>)> = Vec::new();
    for p in &s.points {
        rows.push((
            p.energy,
            vec!["point".into(), p.energy.into(), p.energy.into(), multiplicity_cell(p.multiplicity), p.types.to_string().into()],
        ));
    }
    for b in &s.bands {
        rows.push((b.lo, vec!["band".into(), b.lo.into(), b.hi.into(), "inf".into(), b.types.to_string().into()]));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, r) in rows {
        t.push(r);
    }
    t
}

fn estimate_table(e: &MeasureEstimate) -> Table {
    let mut t = Table::new(&["value", "uncertainty", "converged"]);
    t.push(vec![e.value.into(), e.uncertainty.into(), e.converged.into()]);
    t
}

fn complex_rows(t: &mut Table, name: &str, z: C64) {
    t.push(vec![name.into(), z.re.into(), z.im.into()]);
}

pub fn execute(cmd: &Command) -> CliResult<Table> {
    match cmd {
        Command::ValidateBc { file, tol } => {
            let m = load(file)?;
            let ModelFile::BoundaryPair(bp) = &m else { return Err(wrong_kind(file, &m, "boundary_pair")) };
            let pair = model::to_pair(bp)?;
            let r = validate_boundary_pair(&pair, *tol)?;
            let mut t = Table::new(&["self_adjoint", "symmetry_defect", "rank_defect", "dim"]);
            t.push(vec![r.self_adjoint.into(), r.symmetry_defect.into(), r.rank_defect.into(), pair.dim().into()]);
            Ok(t)
        }
        Command::Sl { action, file, z, count, alpha } => {
            let m = load(file)?;
            let ModelFile::Potential(pf) = &m else { return Err(wrong_kind(file, &m, "potential")) };
            let u = model::to_potential(pf)?;
            let zc = || need(*z, "--z").map(|(re, im)| C64::new(re, im));
            match action {
                SlAction::Dirichlet => {
                    let k = need(*count, "--count")?;
                    let mut t = Table::new(&["index", "energy"]);
                    for (i, e) in dirichlet_spectrum(&u, k)?.into_iter().enumerate() {
                        t.push(vec![(i + 1).into(), e.into()]);
                    }
                    Ok(t)
                }
                SlAction::Fundamental => {
                    let fs = fundamental_system(&u, zc()?)?;
                    let mut t = Table::new(&["quantity", "re", "im"]);
                    complex_rows(&mut t, "c(1)", fs.c1);
                    complex_rows(&mut t, "c'(1)", fs.c1p);
                    complex_rows(&mut t, "s(1)", fs.s1);
                    complex_rows(&mut t, "s'(1)", fs.s1p);
                    Ok(t)
                }
                SlAction::Qmatrix => {
                    let q = segment_q_matrix(&u, zc()?)?.q;
                    let mut t = Table::new(&["row", "col", "re", "im"]);
                    for i in 0..2 {
                        for j in 0..2 {
                            t.push(vec![i.into(), j.into(), q[(i, j)].re.into(), q[(i, j)].im.into()]);
                        }
                    }
                    Ok(t)
                }
                SlAction::Eta => {
                    let e = eta_map(&u, *alpha, zc()?)?;
                    let mut t = Table::new(&["re", "im"]);
                    t.push(vec![e.re.into(), e.im.into()]);
                    Ok(t)
                }
            }
        }
        Command::Graph { file, .. } => {
            let m = load(file)?;
            let ModelFile::Graph(g) = &m else { return Err(wrong_kind(file, &m, "graph")) };
            Ok(point_table(&graph_spectrum(&model::to_graph(g)?)?))
        }
        Command::Bloch { p, q, l1, l2, grid } => {
            let fm = FluxModel::new(*p, *q, *l1, *l2)?;
            let bands = z2_bloch_bands(&fm, (*grid, *grid))?;
            let mut t = Table::new(&["band", "lo", "hi"]);
            for (i, (lo, hi)) in bands.bands.iter().enumerate() {
                t.push(vec![i.into(), (*lo).into(), (*hi).into()]);
            }
            Ok(t)
        }
        Command::Mathieu { p, q, theta, trunc, l1, l2, bulk } => {
            let fm = FluxModel::new(*p, *q, *l1, *l2)?;
            let ev = if *bulk {
                almost_mathieu_bulk_spectrum(&fm, *theta, *trunc)?
            } else {
                almost_mathieu_spectrum(&fm, *theta, *trunc)?
            };
            let mut t = Table::new(&["index", "energy"]);
            for (i, e) in ev.into_iter().enumerate() {
                t.push(vec![i.into(), e.into()]);
            }
            Ok(t)
        }
        Command::Qgraph { action, file, window, h, grid } => {
            let m = load(file)?;
            let ModelFile::QuantumGraph(qf) = &m else { return Err(wrong_kind(file, &m, "quantum_graph")) };
            let qg = model::to_quantum_graph(qf)?;
            match action {
                QgraphAction::Duality => Ok(point_table(&duality_spectrum_auto(&qg, *window)?)),
                QgraphAction::Secular => {
                    let s = secular_oracle(&qg, *window, *grid)?;
                    let mut t = Table::new(&["energy", "multiplicity", "dirichlet_coincident"]);
                    let mut rows: Vec<(f64, Vec<Cell>)> = Vec::new();
                    for (list, tag) in [(&s.eigenvalues, false), (&s.dirichlet_coincident, true)] {
                        for p in &list.points {
                            rows.push((p.energy, vec![p.energy.into(), multiplicity_cell(p.multiplicity), tag.into()]));
                        }
                    }
                    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
                    rows.into_iter().for_each(|(_, r)| t.push(r));
                    t.warnings = s.warnings;
                    Ok(t)
                }
                QgraphAction::Fd => {
                    let fd = finite_difference_oracle(&qg, *h, *window)?;
                    let mut t = Table::new(&["energy", "coarse", "fine"]);
                    for i in 0..fd.values.len() {
                        t.push(vec![fd.values[i].into(), fd.coarse[i].into(), fd.fine[i].into()]);
                    }
                    Ok(t.meta("h", *h))
                }
            }
        }
        Command::Dots { action, file, window, z, cutoff, qmax, gap } => {
            let m = load(file)?;
            let ModelFile::DotArray(df) = &m else { return Err(wrong_kind(file, &m, "dot_array")) };
            let dm = model::to_dot(df)?;
            match action {
                DotsAction::Levels => {
                    let mut t = Table::new(&["energy", "degeneracy", "labels"]);
                    for l in fock_levels(&dm, *cutoff)? {
                        let labels: Vec<String> = l.labels.iter().map(|(m, n)| format!("{m}:{n}")).collect();
                        t.push(vec![l.energy.into(), l.labels.len().into(), labels.join(";").into()]);
                    }
                    Ok(t)
                }
                DotsAction::Q => {
                    let (re, im) = need(*z, "--z")?;
                    let v = dm.q().eval(C64::new(re, im))?;
                    let mut t = Table::new(&["re", "im"]);
                    t.push(vec![v.re.into(), v.im.into()]);
                    Ok(t)
                }
                DotsAction::Spectrum => {
                    let s = array_spectrum(&dm, need(*window, "--window")?)?;
                    let mut t = spectrum_table(&s.spectrum);
                    if !s.excluded_levels.is_empty() {
                        t.warnings.push(format!(
                            "single-dot levels inside the window are not covered by the pullback: {:?}",
                            s.excluded_levels
                        ));
                    }
                    let levels: Vec<serde_json::Value> = s.excluded_levels.iter().map(|&e| e.into()).collect();
                    Ok(t.meta("excluded_levels", levels))
                }
                DotsAction::Butterfly => {
                    let rows = butterfly_dataset(&dm, *qmax, *gap)?;
                    let header: Vec<&'static str> = BUTTERFLY_HEADER.split(',').collect();
                    let mut t = Table::new(&header);
                    for r in rows {
                        t.push(vec![r.p.into(), r.q.into(), r.gap.into(), r.lo.into(), r.hi.into()]);
                    }
                    Ok(t.meta("energy_unit", "Omega"))
                }
            }
        }
        Command::Probe { action, file, at, window } => {
            let m = load(file)?;
            let ModelFile::Probe(pf) = &m else { return Err(wrong_kind(file, &m, "probe")) };
            let zeta0 = C64::new(pf.zeta0[0], pf.zeta0[1]);
            let cfg = ProbeConfig::default();
            let run = |k: &dyn ProbeKernel| -> CliResult<Table> {
                match action {
                    ProbeAction::Measure => {
                        let (a, b) = need(*window, "--window")?;
                        Ok(estimate_table(&interval_measure(k, zeta0, a, b, &cfg)?))
                    }
                    ProbeAction::Density => Ok(estimate_table(&ac_density(k, zeta0, need(*at, "--at")?, &cfg)?)),
                    ProbeAction::Pointmass => {
                        let pm = point_mass(k, zeta0, need(*at, "--at")?, &cfg)?;
                        let mut t = Table::new(&["raw", "raw_uncertainty", "mass", "mass_uncertainty", "converged"]);
                        t.push(vec![
                            pm.raw.value.into(),
                            pm.raw.uncertainty.into(),
                            pm.mass.value.into(),
                            pm.mass.uncertainty.into(),
                            pm.mass.converged.into(),
                        ]);
                        Ok(t)
                    }
                }
            };
            match &pf.q {
                ProbeQFile::DotArray(df) => {
                    let dm = model::to_dot(df)?;
                    if dm.flux.p != 0 {
                        return Err(CliError::Model(kreinspec::Error::Input(
                            "the lattice probe supports zero flux only".into(),
                        )));
                    }
                    let dq = dm.q();
                    run(&LatticeProbe::new(&dq, dm.flux.lambda1, dm.flux.lambda2))
                }
                ProbeQFile::Rational { constant, slope, poles } => {
                    let lambda = model::to_matrix(&pf.lambda);
                    let n = lambda.nrows();
                    let id = CMatrix::identity(n, n);
                    let scaled = |x: f64| &id * C64::new(x, 0.0);
                    let poles = poles.iter().map(|&[p, w]| (p, scaled(w))).collect();
                    let q = RationalNevanlinna::new(scaled(*constant), scaled(*slope), poles)?;
                    run(&MatrixProbe::new(&q, lambda, model::to_vector(&pf.h))?)
                }
                ProbeQFile::Segment { potential } => {
                    let q = SegmentQFunction::new(model::to_potential(potential)?)?;
                    run(&MatrixProbe::new(&q, model::to_matrix(&pf.lambda), model::to_vector(&pf.h))?)
                }
            }
        }
    }
}

fn emit(cli: &Cli, table: &Table) -> CliResult<()> {
    let text = if cli.json { table.to_json(&cli.command.name()) } else { table.to_csv() };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(CliError::Io),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(CliError::Io)
        }
    }
}

/// Parse `argv`, run, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("usage error: --threads must be positive");
            return EXIT_USAGE;
        }
        // Ignore the error if a pool already exists (e.g. repeated in-process runs).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = execute(&cli.command).and_then(|t| {
        for w in &t.warnings {
            eprintln!("warning: {w}");
        }
        emit(&cli, &t)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
