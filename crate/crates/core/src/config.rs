//! Flat sectioned `key = value` experiment configs. Unknown sections or keys
//! are hard errors: a silent typo in an exponent would invalidate every
//! estimate downstream. Full-line `#` comments are allowed.

use crate::error::ConfigError;
use crate::expr::Expr;
use crate::graph::MonotoneGraph;
use crate::grid::{FluxField, Grid, LerayLionsField};
use crate::measure::MeasureData;
use crate::solver::EpsilonSchedule;
use crate::tolerances;

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

#[derive(Debug, Clone)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

const SECTIONS: &[&str] = &[
    "grid", "operator", "beta", "mu", "schedule", "output", "verify", "capacity",
];

const KEYS: &[(&str, &[&str])] = &[
    ("grid", &["dim", "n", "length", "p"]),
    (
        "operator",
        &["weight_1", "weight_2", "d_1", "d_2", "lambda", "gamma"],
    ),
    ("beta", &["graph"]),
    ("mu", &["f", "F_1", "F_2", "atom"]),
    ("schedule", &["eps0", "rho", "count", "tol_scheme"]),
    ("output", &["dir", "trace_k"]),
    ("verify", &["seed"]),
    ("capacity", &["set", "refine"]),
];

/// Keys that may appear more than once within their section.
const REPEATABLE: &[(&str, &str)] = &[("mu", "atom")];

fn parse_sections(file: &str, text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(ConfigError::new(file, line, name, "", "unknown section"));
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(ConfigError::new(file, line, name, "", "duplicate section"));
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(eq) = trimmed.find('=') else {
            return Err(ConfigError::new(
                file,
                line,
                "",
                trimmed,
                "expected 'key = value'",
            ));
        };
        let key = trimmed[..eq].trim().to_string();
        let value = trimmed[eq + 1..].trim().to_string();
        let Some(section) = sections.last_mut() else {
            return Err(ConfigError::new(
                file,
                line,
                "",
                &key,
                "key outside any [section]",
            ));
        };
        let allowed = KEYS
            .iter()
            .find(|(s, _)| *s == section.name)
            .map(|(_, ks)| *ks)
            .unwrap_or(&[]);
        if !allowed.contains(&key.as_str()) {
            return Err(ConfigError::new(
                file,
                line,
                &section.name,
                &key,
                "unknown key",
            ));
        }
        let repeatable = REPEATABLE.contains(&(section.name.as_str(), key.as_str()));
        if !repeatable && section.entries.iter().any(|e| e.key == key) {
            return Err(ConfigError::new(
                file,
                line,
                &section.name,
                &key,
                "duplicate key",
            ));
        }
        section.entries.push(Entry { line, key, value });
    }
    Ok(sections)
}

struct SectionView<'a> {
    file: &'a str,
    section: Option<&'a Section>,
    name: &'a str,
}

impl<'a> SectionView<'a> {
    fn get(&self, key: &str) -> Option<&'a Entry> {
        self.section
            .and_then(|s| s.entries.iter().find(|e| e.key == key))
    }

    fn all(&self, key: &str) -> Vec<&'a Entry> {
        self.section
            .map(|s| s.entries.iter().filter(|e| e.key == key).collect())
            .unwrap_or_default()
    }

    fn err(&self, line: usize, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::new(self.file, line, self.name, key, msg)
    }

    fn required(&self, key: &str) -> Result<&'a Entry, ConfigError> {
        self.get(key).ok_or_else(|| {
            let line = self.section.map(|s| s.line).unwrap_or(0);
            self.err(line, key, "required key is missing")
        })
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(e) => e.value.parse::<f64>().map_err(|_| {
                self.err(e.line, key, format!("expected a number, got '{}'", e.value))
            }),
        }
    }

    fn usize_list(&self, entry: &Entry) -> Result<Vec<usize>, ConfigError> {
        entry
            .value
            .split(',')
            .map(|t| {
                t.trim().parse::<usize>().map_err(|_| {
                    self.err(
                        entry.line,
                        &entry.key,
                        format!("expected integers, got '{}'", t.trim()),
                    )
                })
            })
            .collect()
    }

    fn f64_list(&self, entry: &Entry) -> Result<Vec<f64>, ConfigError> {
        entry
            .value
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| {
                    self.err(
                        entry.line,
                        &entry.key,
                        format!("expected numbers, got '{}'", t.trim()),
                    )
                })
            })
            .collect()
    }
}

/// Continuum description of a capacity set; resolved to nodes per grid.
#[derive(Debug, Clone)]
pub enum SetSpec {
    Point(Vec<f64>),
    Box(Vec<(f64, f64)>),
}

#[derive(Debug, Clone)]
pub struct CapacitySpec {
    pub set: SetSpec,
    pub refine: Vec<usize>,
    pub label: String,
}

/// A fully parsed experiment.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: Grid,
    pub field: LerayLionsField,
    pub graph: MonotoneGraph,
    pub measure: MeasureData,
    pub schedule: EpsilonSchedule,
    pub tol_scheme: f64,
    pub out_dir: Option<String>,
    pub trace_k: Vec<f64>,
    pub seed: u64,
    pub capacity: Option<CapacitySpec>,
}

impl RunConfig {
    pub fn from_file(path: &str) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(path, 0, "", "", format!("cannot read file: {e}")))?;
        Self::from_str_named(&text, path)
    }

    pub fn from_str_named(text: &str, file: &str) -> Result<RunConfig, ConfigError> {
        let sections = parse_sections(file, text)?;
        let view = |name: &'static str| SectionView {
            file,
            section: sections.iter().find(|s| s.name == name),
            name,
        };

        // [grid]
        let gsec = view("grid");
        if gsec.section.is_none() {
            return Err(ConfigError::new(
                file,
                0,
                "grid",
                "",
                "missing [grid] section",
            ));
        }
        let dim_entry = gsec.required("dim")?;
        let dim: usize = dim_entry
            .value
            .parse()
            .map_err(|_| gsec.err(dim_entry.line, "dim", "expected 1 or 2"))?;
        if dim == 0 || dim > 2 {
            return Err(gsec.err(dim_entry.line, "dim", "dimension must be 1 or 2"));
        }
        let broadcast =
            |mut v: Vec<f64>, line: usize, key: &str| -> Result<Vec<f64>, ConfigError> {
                if v.len() == 1 && dim == 2 {
                    v.push(v[0]);
                }
                if v.len() != dim {
                    return Err(gsec.err(line, key, format!("expected {dim} value(s)")));
                }
                Ok(v)
            };
        let n_entry = gsec.required("n")?;
        let mut counts = gsec.usize_list(n_entry)?;
        if counts.len() == 1 && dim == 2 {
            counts.push(counts[0]);
        }
        if counts.len() != dim {
            return Err(gsec.err(n_entry.line, "n", format!("expected {dim} value(s)")));
        }
        let p_entry = gsec.required("p")?;
        let exponents = broadcast(gsec.f64_list(p_entry)?, p_entry.line, "p")?;
        let lengths = match gsec.get("length") {
            Some(e) => broadcast(gsec.f64_list(e)?, e.line, "length")?,
            None => vec![1.0; dim],
        };
        let grid = Grid::new(&counts, &lengths, &exponents)
            .map_err(|e| gsec.err(n_entry.line, "n", e.to_string()))?;

        // [operator]
        let osec = view("operator");
        let parse_expr = |sec: &SectionView, key: &str| -> Result<Option<Expr>, ConfigError> {
            match sec.get(key) {
                None => Ok(None),
                Some(e) => Expr::parse(&e.value, dim)
                    .map(Some)
                    .map_err(|pe| sec.err(e.line, key, pe.to_string())),
            }
        };
        let mut weights = vec![parse_expr(&osec, "weight_1")?];
        let mut offsets = vec![parse_expr(&osec, "d_1")?];
        if dim == 2 {
            weights.push(parse_expr(&osec, "weight_2")?);
            offsets.push(parse_expr(&osec, "d_2")?);
        } else {
            if let Some(e) = osec.get("weight_2") {
                return Err(osec.err(e.line, "weight_2", "axis 2 does not exist on a 1D grid"));
            }
            if let Some(e) = osec.get("d_2") {
                return Err(osec.err(e.line, "d_2", "axis 2 does not exist on a 1D grid"));
            }
        }
        let lambda = osec.f64("lambda", 1.0)?;
        let gamma = osec.f64("gamma", lambda.max(1.0))?;
        let field =
            LerayLionsField::with_weights(weights, offsets, lambda, gamma).map_err(|e| {
                osec.err(
                    osec.section.map(|s| s.line).unwrap_or(0),
                    "lambda",
                    e.to_string(),
                )
            })?;

        // [beta]
        let bsec = view("beta");
        if bsec.section.is_none() {
            return Err(ConfigError::new(
                file,
                0,
                "beta",
                "",
                "missing [beta] section",
            ));
        }
        let graph_entry = bsec.required("graph")?;
        let graph = parse_graph(&bsec, graph_entry)?;

        // [mu]
        let msec = view("mu");
        let density = match &msec.get("f") {
            None => vec![0.0; grid.node_count()],
            Some(e) => {
                let expr = Expr::parse(&e.value, dim)
                    .map_err(|pe| msec.err(e.line, "f", pe.to_string()))?;
                (0..grid.node_count())
                    .map(|j| {
                        let pos = grid.node_position(j);
                        expr.eval(&pos[..dim])
                    })
                    .collect()
            }
        };
        let mut flux_exprs = vec![parse_expr(&msec, "F_1")?];
        if dim == 2 {
            flux_exprs.push(parse_expr(&msec, "F_2")?);
        } else if let Some(e) = msec.get("F_2") {
            return Err(msec.err(e.line, "F_2", "axis 2 does not exist on a 1D grid"));
        }
        let flux = FluxField::from_exprs(&grid, &flux_exprs);
        let mut atoms = Vec::new();
        for e in msec.all("atom") {
            // both `atom = x, w` and `atom = (x, w)` are accepted
            let stripped = Entry {
                line: e.line,
                key: e.key.clone(),
                value: e
                    .value
                    .trim_start_matches('(')
                    .trim_end_matches(')')
                    .to_string(),
            };
            let parts = msec.f64_list(&stripped)?;
            if parts.len() != 2 {
                return Err(msec.err(e.line, "atom", "expected 'position, weight'"));
            }
            if dim != 1 {
                return Err(msec.err(
                    e.line,
                    "atom",
                    "point masses are only diffuse on 1D grids (a 2D point has vanishing \
                     capacity); rejected",
                ));
            }
            let h = grid.spacings()[0];
            let idx = (parts[0] / h).round() as usize;
            if idx >= grid.node_count() || grid.is_boundary(idx) {
                return Err(msec.err(e.line, "atom", "atom must land on an interior node"));
            }
            atoms.push((idx, parts[1]));
        }
        let measure = MeasureData::new(&grid, density, flux, atoms).map_err(|e| {
            msec.err(
                msec.section.map(|s| s.line).unwrap_or(0),
                "f",
                e.to_string(),
            )
        })?;

        // [schedule]
        let ssec = view("schedule");
        let eps0 = ssec.f64("eps0", 1.0)?;
        let rho = ssec.f64("rho", 0.5)?;
        let count = match ssec.get("count") {
            None => 20,
            Some(e) => e
                .value
                .parse::<usize>()
                .map_err(|_| ssec.err(e.line, "count", "expected a positive integer"))?,
        };
        let schedule = EpsilonSchedule::new(eps0, rho, count).map_err(|e| {
            ssec.err(
                ssec.section.map(|s| s.line).unwrap_or(0),
                "eps0",
                e.to_string(),
            )
        })?;
        let tol_scheme = ssec.f64("tol_scheme", tolerances::DEFAULT_TOL_SCHEME)?;

        // [output]
        let outsec = view("output");
        let out_dir = outsec.get("dir").map(|e| e.value.clone());
        let trace_k = match outsec.get("trace_k") {
            None => Vec::new(),
            Some(e) => outsec.f64_list(e)?,
        };

        // [verify]
        let vsec = view("verify");
        let seed = match vsec.get("seed") {
            None => 0,
            Some(e) => e
                .value
                .parse::<u64>()
                .map_err(|_| vsec.err(e.line, "seed", "expected an unsigned integer"))?,
        };

        // [capacity]
        let csec = view("capacity");
        let capacity = match csec.section {
            None => None,
            Some(_) => {
                let set_entry = csec.required("set")?;
                let set = parse_set(&csec, set_entry, dim)?;
                let refine = match csec.get("refine") {
                    None => vec![counts[0]],
                    Some(e) => csec.usize_list(e)?,
                };
                Some(CapacitySpec {
                    set,
                    refine,
                    label: set_entry.value.clone(),
                })
            }
        };

        Ok(RunConfig {
            grid,
            field,
            graph,
            measure,
            schedule,
            tol_scheme,
            out_dir,
            trace_k,
            seed,
            capacity,
        })
    }
}

fn parse_graph(sec: &SectionView, entry: &Entry) -> Result<MonotoneGraph, ConfigError> {
    let toks: Vec<&str> = entry.value.split_whitespace().collect();
    let fail = |msg: String| sec.err(entry.line, "graph", msg);
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| fail(format!("expected a number, got '{t}'")))
    };
    match toks.as_slice() {
        ["identity"] => Ok(MonotoneGraph::identity()),
        ["zero"] => Ok(MonotoneGraph::zero()),
        ["power", q] => MonotoneGraph::power(num(q)?).map_err(|e| fail(e.to_string())),
        ["indicator", m, big] => {
            MonotoneGraph::indicator(num(m)?, num(big)?).map_err(|e| fail(e.to_string()))
        }
        ["piecewise", rest @ ..] if !rest.is_empty() => {
            let mut pts = Vec::new();
            for t in rest {
                let Some((x, w)) = t.split_once(':') else {
                    return Err(fail(format!("expected 'x:w' pairs, got '{t}'")));
                };
                pts.push((num(x)?, num(w)?));
            }
            MonotoneGraph::piecewise_linear(&pts).map_err(|e| fail(e.to_string()))
        }
        _ => Err(fail(format!(
            "unknown graph '{}'; use identity | zero | power q | indicator m M | piecewise x:w ...",
            entry.value
        ))),
    }
}

fn parse_set(sec: &SectionView, entry: &Entry, dim: usize) -> Result<SetSpec, ConfigError> {
    let toks: Vec<&str> = entry.value.split_whitespace().collect();
    let fail = |msg: String| sec.err(entry.line, "set", msg);
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| fail(format!("expected a number, got '{t}'")))
    };
    match toks.split_first() {
        Some((&"point", coords)) => {
            if coords.len() != dim {
                return Err(fail(format!("point needs {dim} coordinate(s)")));
            }
            Ok(SetSpec::Point(
                coords.iter().map(|t| num(t)).collect::<Result<_, _>>()?,
            ))
        }
        Some((&"box", coords)) => {
            if coords.len() != 2 * dim {
                return Err(fail(format!(
                    "box needs {} numbers (lo hi per axis)",
                    2 * dim
                )));
            }
            let vals: Vec<f64> = coords.iter().map(|t| num(t)).collect::<Result<_, _>>()?;
            Ok(SetSpec::Box(vals.chunks(2).map(|c| (c[0], c[1])).collect()))
        }
        _ => Err(fail("expected 'point ...' or 'box ...'".into())),
    }
}

/// Resolve a continuum set description to grid nodes.
pub fn resolve_set(grid: &Grid, spec: &SetSpec) -> crate::capacity::NodeSet {
    let mut indices = Vec::new();
    match spec {
        SetSpec::Point(coords) => {
            let mut multi = [0usize; 2];
            for d in 0..grid.dim() {
                let h = grid.spacings()[d];
                multi[d] = (coords[d] / h).round() as usize;
                multi[d] = multi[d].min(grid.counts()[d] - 1);
            }
            indices.push(grid.node_index(&multi[..grid.dim()]));
        }
        SetSpec::Box(ranges) => {
            for idx in 0..grid.node_count() {
                let pos = grid.node_position(idx);
                let inside = (0..grid.dim())
                    .all(|d| pos[d] >= ranges[d].0 - 1e-12 && pos[d] <= ranges[d].1 + 1e-12);
                if inside && !grid.is_boundary(idx) {
                    indices.push(idx);
                }
            }
        }
    }
    crate::capacity::NodeSet::compact(indices)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
[grid]
dim = 1
n = 33
p = 2

[beta]
graph = indicator -1 1

[mu]
f = 10

[schedule]
eps0 = 1
rho = 0.5
count = 8
";

    #[test]
    fn parses_a_minimal_config() {
        let cfg = RunConfig::from_str_named(GOOD, "test.cfg").unwrap();
        assert_eq!(cfg.grid.dim(), 1);
        assert_eq!(cfg.grid.counts(), &[33]);
        assert_eq!(cfg.schedule.count, 8);
        assert_eq!(cfg.graph.dom(), (-1.0, 1.0));
        assert!((cfg.measure.density()[5] - 10.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_are_hard_errors_with_location() {
        let bad = GOOD.replace("rho = 0.5", "rho = 0.5\nbogus = 1");
        let err = RunConfig::from_str_named(&bad, "bad.cfg").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.cfg"), "{msg}");
        assert!(msg.contains("bogus"), "{msg}");
        assert!(msg.contains("unknown key"), "{msg}");
        assert!(msg.contains("schedule"), "{msg}");
    }

    #[test]
    fn unknown_section_rejected() {
        let bad = format!("{GOOD}\n[plotting]\nstyle = fancy\n");
        assert!(RunConfig::from_str_named(&bad, "bad.cfg").is_err());
    }

    #[test]
    fn atom_rejected_in_2d_with_diffuseness_message() {
        let cfg = "\
[grid]
dim = 2
n = 9
p = 2

[beta]
graph = identity

[mu]
atom = 0.5, 1.0
";
        let err = RunConfig::from_str_named(cfg, "atom2d.cfg").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("capacity"), "{msg}");
        assert!(msg.contains("atom2d.cfg:"), "{msg}");
    }

    #[test]
    fn atoms_accumulate_in_1d() {
        let cfg = GOOD.replace("f = 10", "f = 0\natom = 0.25, 1\natom = (0.75, -2)");
        let parsed = RunConfig::from_str_named(&cfg, "atoms.cfg").unwrap();
        assert_eq!(parsed.measure.atoms().len(), 2);
        assert_eq!(parsed.measure.atoms()[0].0, 8);
        assert_eq!(parsed.measure.atoms()[1], (24, -2.0));
    }

    #[test]
    fn graph_presets_parse() {
        for (txt, dom) in [
            ("identity", (f64::NEG_INFINITY, f64::INFINITY)),
            ("zero", (f64::NEG_INFINITY, f64::INFINITY)),
            ("power 3", (f64::NEG_INFINITY, f64::INFINITY)),
            ("indicator -2 0.5", (-2.0, 0.5)),
            (
                "piecewise -0.5:-3 0:0 1:0.5 1:2.5",
                (f64::NEG_INFINITY, f64::INFINITY),
            ),
        ] {
            let cfg = GOOD.replace("graph = indicator -1 1", &format!("graph = {txt}"));
            let parsed = RunConfig::from_str_named(&cfg, "g.cfg").unwrap();
            assert_eq!(parsed.graph.dom(), dom, "{txt}");
        }
        let cfg = GOOD.replace("graph = indicator -1 1", "graph = mystery");
        assert!(RunConfig::from_str_named(&cfg, "g.cfg").is_err());
    }

    #[test]
    fn capacity_set_resolution() {
        let cfg = format!("{GOOD}\n[capacity]\nset = point 0.5\nrefine = 9,17\n");
        let parsed = RunConfig::from_str_named(&cfg, "cap.cfg").unwrap();
        let spec = parsed.capacity.unwrap();
        assert_eq!(spec.refine, vec![9, 17]);
        let g = Grid::new(&[9], &[1.0], &[2.0]).unwrap();
        let set = resolve_set(&g, &spec.set);
        assert_eq!(set.indices, vec![4]);

        let gb = Grid::new(&[5, 5], &[1.0, 1.0], &[2.0, 2.0]).unwrap();
        let set = resolve_set(&gb, &SetSpec::Box(vec![(0.2, 0.8), (0.2, 0.8)]));
        assert_eq!(set.indices.len(), 9);
    }

    #[test]
    fn operator_weights_reach_the_field() {
        let cfg = "\
[grid]
dim = 2
n = 9
p = 2

[operator]
weight_1 = 1 + 0.5*y
d_1 = 0.1
lambda = 1
gamma = 1.5

[beta]
graph = identity
";
        let parsed = RunConfig::from_str_named(cfg, "weighted.cfg").unwrap();
        assert!((parsed.field.weight(0, &[0.0, 1.0]) - 1.5).abs() < 1e-15);
        assert_eq!(parsed.field.weight(1, &[0.0, 1.0]), 1.0);
        assert_eq!(parsed.field.offset(0, &[0.3, 0.3]), 0.1);
        assert_eq!(parsed.field.gamma, 1.5);
        // per-axis keys are rejected on the wrong dimension
        let bad = cfg
            .replace("dim = 2", "dim = 1")
            .replace("weight_1 = 1 + 0.5*y\n", "weight_2 = 1\n")
            .replace("d_1 = 0.1\n", "");
        assert!(RunConfig::from_str_named(&bad, "w.cfg").is_err());
    }

    #[test]
    fn bad_expression_reports_line() {
        let bad = GOOD.replace("f = 10", "f = 10 +* x");
        let err = RunConfig::from_str_named(&bad, "expr.cfg").unwrap_err();
        assert!(err.to_string().contains("expr.cfg"));
        assert!(err.line > 0);
    }
}
