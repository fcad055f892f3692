//! Model files: one JSON document with a top-level `kind`.

use std::fmt;
use std::path::Path;

use kreinspec::discrete_graph::{FluxModel, MagneticEdge, MagneticGraph};
use kreinspec::dot_array::DotArrayModel;
use kreinspec::quantum_graph::QuantumGraphModel;
use kreinspec::sturm_liouville::{Interpolation, Potential};
use kreinspec::{BoundaryPair, CMatrix, CVector, C64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A schema violation, with the JSON path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for SchemaError {}

/// A matrix or vector entry: a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn value(self) -> C64 {
        match self {
            Entry::Real(x) => C64::new(x, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryPairFile {
    pub a: Vec<Vec<Entry>>,
    pub b: Vec<Vec<Entry>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialType {
    Constant,
    Piecewise,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpolationFile {
    Nearest,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialFile {
    #[serde(rename = "type")]
    pub kind: PotentialType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<InterpolationFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    pub src: usize,
    pub dst: usize,
    #[serde(default)]
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: usize,
    pub edges: Vec<EdgeFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumGraphFile {
    pub graph: GraphFile,
    pub potential: PotentialFile,
    /// `α` in `α(v) = (deg v/2)·α`; taken from `graph.alpha` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DotArrayFile {
    pub xi: f64,
    pub omega: f64,
    pub p: i64,
    pub q: u64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Q-function under a probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeQFile {
    /// `q(z) = constant + slope·z + Σ w/(p − z)` times the identity of `dim`.
    Rational {
        constant: f64,
        #[serde(default)]
        slope: f64,
        #[serde(default)]
        poles: Vec<[f64; 2]>,
    },
    /// The Sturm–Liouville segment Q-matrix.
    Segment { potential: PotentialFile },
    /// The dot-array lattice model at zero flux.
    DotArray(DotArrayFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeFile {
    pub q: ProbeQFile,
    /// Hermitian `Λ`; ignored for the dot-array lattice model.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h: Vec<Entry>,
    pub zeta0: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelFile {
    BoundaryPair(BoundaryPairFile),
    Potential(PotentialFile),
    Graph(GraphFile),
    QuantumGraph(QuantumGraphFile),
    DotArray(DotArrayFile),
    Probe(ProbeFile),
}

impl ModelFile {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelFile::BoundaryPair(_) => "boundary_pair",
            ModelFile::Potential(_) => "potential",
            ModelFile::Graph(_) => "graph",
            ModelFile::QuantumGraph(_) => "quantum_graph",
            ModelFile::DotArray(_) => "dot_array",
            ModelFile::Probe(_) => "probe",
        }
    }

    /// Canonical JSON: `kind` first, then the body fields in declaration order.
    pub fn to_json(&self) -> Value {
        let body = match self {
            ModelFile::BoundaryPair(m) => serde_json::to_value(m),
            ModelFile::Potential(m) => serde_json::to_value(m),
            ModelFile::Graph(m) => serde_json::to_value(m),
            ModelFile::QuantumGraph(m) => serde_json::to_value(m),
            ModelFile::DotArray(m) => serde_json::to_value(m),
            ModelFile::Probe(m) => serde_json::to_value(m),
        }
        .expect("model types serialise");
        let mut out = serde_json::Map::new();
        out.insert("kind".into(), Value::String(self.kind().into()));
        if let Value::Object(fields) = body {
            out.extend(fields);
        }
        Value::Object(out)
    }
}

fn body<T: for<'de> Deserialize<'de>>(mut v: Value) -> Result<T, SchemaError> {
    if let Value::Object(map) = &mut v {
        map.remove("kind");
    }
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        SchemaError::at(path, e.into_inner().to_string())
    })
}

pub fn parse_model_str(text: &str) -> Result<ModelFile, SchemaError> {
    let v: Value = serde_json::from_str(text).map_err(|e| SchemaError::at("", format!("invalid JSON: {e}")))?;
    let kind = v
        .get("kind")
        .ok_or_else(|| SchemaError::at("kind", "missing field"))?
        .as_str()
        .ok_or_else(|| SchemaError::at("kind", "expected a string"))?
        .to_owned();
    let model = match kind.as_str() {
        "boundary_pair" => ModelFile::BoundaryPair(body(v)?),
        "potential" => ModelFile::Potential(body(v)?),
        "graph" => ModelFile::Graph(body(v)?),
        "quantum_graph" => ModelFile::QuantumGraph(body(v)?),
        "dot_array" => ModelFile::DotArray(body(v)?),
        "probe" => ModelFile::Probe(body(v)?),
        other => {
            return Err(SchemaError::at(
                "kind",
                format!("unknown kind {other:?}; expected boundary_pair, potential, graph, quantum_graph, dot_array or probe"),
            ))
        }
    };
    validate(&model)?;
    Ok(model)
}

pub fn parse_model_file(path: &Path) -> Result<ModelFile, SchemaError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SchemaError::at("", format!("cannot read {}: {e}", path.display())))?;
    parse_model_str(&text)
}

fn check_finite(path: &str, xs: impl IntoIterator<Item = f64>) -> Result<(), SchemaError> {
    for (i, x) in xs.into_iter().enumerate() {
        if !x.is_finite() {
            return Err(SchemaError::at(format!("{path}[{i}]"), "must be finite"));
        }
    }
    Ok(())
}

fn check_matrix(path: &str, m: &[Vec<Entry>]) -> Result<(), SchemaError> {
    let n = m.len();
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(SchemaError::at(format!("{path}[{i}]"), format!("row has {} entries, expected {n}", row.len())));
        }
        for (j, e) in row.iter().enumerate() {
            let z = e.value();
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(SchemaError::at(format!("{path}[{i}][{j}]"), "must be finite"));
            }
        }
    }
    Ok(())
}

fn validate_potential(path: &str, p: &PotentialFile) -> Result<(), SchemaError> {
    let need = |field: &str, present: bool| {
        if present {
            Ok(())
        } else {
            Err(SchemaError::at(format!("{path}.{field}"), "missing field"))
        }
    };
    match p.kind {
        PotentialType::Constant => {
            need("value", p.value.is_some())?;
            check_finite(&format!("{path}.value"), p.value)?;
        }
        PotentialType::Piecewise => {
            need("breakpoints", p.breakpoints.is_some())?;
            need("values", p.values.is_some())?;
        }
        PotentialType::Grid => need("samples", p.samples.is_some())?,
    }
    to_potential(p).map(|_| ()).map_err(|e| SchemaError::at(path, e.to_string()))
}

fn validate(model: &ModelFile) -> Result<(), SchemaError> {
    match model {
        ModelFile::BoundaryPair(m) => {
            check_matrix("a", &m.a)?;
            check_matrix("b", &m.b)?;
            if m.a.len() != m.b.len() {
                return Err(SchemaError::at("b", format!("dimension {} differs from a ({})", m.b.len(), m.a.len())));
            }
        }
        ModelFile::Potential(p) => validate_potential("", p)?,
        ModelFile::Graph(g) => validate_graph("", g)?,
        ModelFile::QuantumGraph(q) => {
            validate_graph("graph", &q.graph)?;
            validate_potential("potential", &q.potential)?;
            check_finite("alpha_scale", q.alpha_scale)?;
        }
        ModelFile::DotArray(d) => validate_dot("", d)?,
        ModelFile::Probe(p) => {
            match &p.q {
                ProbeQFile::Rational { constant, slope, poles } => {
                    check_finite("q.constant", [*constant, *slope])?;
                    check_finite("q.poles", poles.iter().flatten().copied())?;
                }
                ProbeQFile::Segment { potential } => validate_potential("q.potential", potential)?,
                ProbeQFile::DotArray(d) => validate_dot("q", d)?,
            }
            check_finite("zeta0", p.zeta0)?;
            if !matches!(p.q, ProbeQFile::DotArray(_)) {
                check_matrix("lambda", &p.lambda)?;
                let dim = if matches!(p.q, ProbeQFile::Segment { .. }) { 2 } else { p.lambda.len() };
                if p.lambda.len() != dim || dim == 0 {
                    return Err(SchemaError::at("lambda", format!("expected a {dim}×{dim} matrix")));
                }
                if p.h.len() != dim {
                    return Err(SchemaError::at("h", format!("expected {dim} entries, found {}", p.h.len())));
                }
            }
        }
    }
    Ok(())
}

fn join(prefix: &str, field: &str) -> String {
    if prefix.is_empty() {
        field.to_owned()
    } else {
        format!("{prefix}.{field}")
    }
}

fn validate_graph(prefix: &str, g: &GraphFile) -> Result<(), SchemaError> {
    if g.vertices == 0 {
        return Err(SchemaError::at(join(prefix, "vertices"), "must be positive"));
    }
    for (i, e) in g.edges.iter().enumerate() {
        if e.src >= g.vertices {
            return Err(SchemaError::at(join(prefix, &format!("edges[{i}].src")), format!("vertex {} out of range 0..{}", e.src, g.vertices)));
        }
        if e.dst >= g.vertices {
            return Err(SchemaError::at(join(prefix, &format!("edges[{i}].dst")), format!("vertex {} out of range 0..{}", e.dst, g.vertices)));
        }
        if !e.beta.is_finite() {
            return Err(SchemaError::at(join(prefix, &format!("edges[{i}].beta")), "must be finite"));
        }
    }
    if !g.alpha.is_empty() && g.alpha.len() != g.vertices {
        return Err(SchemaError::at(join(prefix, "alpha"), format!("expected {} entries, found {}", g.vertices, g.alpha.len())));
    }
    check_finite(&join(prefix, "alpha"), g.alpha.iter().copied())?;
    to_graph(g).map(|_| ()).map_err(|e| SchemaError::at(prefix, e.to_string()))
}

fn validate_dot(prefix: &str, d: &DotArrayFile) -> Result<(), SchemaError> {
    for (name, v) in [("xi", d.xi), ("omega", d.omega), ("lambda1", d.lambda1), ("lambda2", d.lambda2)] {
        if !v.is_finite() {
            return Err(SchemaError::at(join(prefix, name), "must be finite"));
        }
    }
    if d.omega <= 0.0 {
        return Err(SchemaError::at(join(prefix, "omega"), "must be positive"));
    }
    to_dot(d).map(|_| ()).map_err(|e| SchemaError::at(join(prefix, "q"), e.to_string()))
}

pub fn to_matrix(m: &[Vec<Entry>]) -> CMatrix {
    let n = m.len();
    CMatrix::from_fn(n, n, |i, j| m[i][j].value())
}

pub fn to_vector(v: &[Entry]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|e| e.value()))
}

pub fn to_pair(m: &BoundaryPairFile) -> kreinspec::Result<BoundaryPair> {
    BoundaryPair::new(to_matrix(&m.a), to_matrix(&m.b))
}

pub fn to_potential(p: &PotentialFile) -> kreinspec::Result<Potential> {
    let u = match p.kind {
        PotentialType::Constant => Potential::Constant(p.value.unwrap_or(0.0)),
        PotentialType::Piecewise => {
            Potential::piecewise(p.breakpoints.clone().unwrap_or_default(), p.values.clone().unwrap_or_default())?
        }
        PotentialType::Grid => {
            let interp = match p.interpolation.unwrap_or(InterpolationFile::Linear) {
                InterpolationFile::Nearest => Interpolation::Nearest,
                InterpolationFile::Linear => Interpolation::Linear,
            };
            Potential::grid(p.samples.clone().unwrap_or_default(), interp)?
        }
    };
    u.validate()?;
    Ok(u)
}

pub fn to_graph(g: &GraphFile) -> kreinspec::Result<MagneticGraph> {
    let edges = g.edges.iter().map(|e| MagneticEdge { src: e.src, dst: e.dst, beta: e.beta }).collect();
    MagneticGraph::new(g.vertices, edges, g.alpha.clone())
}

pub fn to_quantum_graph(q: &QuantumGraphFile) -> kreinspec::Result<QuantumGraphModel> {
    let graph = to_graph(&q.graph)?;
    let potential = to_potential(&q.potential)?;
    match q.alpha_scale {
        Some(a) => QuantumGraphModel::new(graph, potential, a),
        None => QuantumGraphModel::from_graph_alpha(graph, potential),
    }
}

pub fn to_dot(d: &DotArrayFile) -> kreinspec::Result<DotArrayModel> {
    DotArrayModel::new(d.xi, d.omega, FluxModel::new(d.p, d.q, d.lambda1, d.lambda2)?)
}
