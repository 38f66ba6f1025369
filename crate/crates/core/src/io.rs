//! Reading instance, catalog and solution files; writing run records.
//!
//! Instances use a subset of the EPANET INP format. Only the sections that
//! describe a gravity-fed network are interpreted: `[JUNCTIONS]`,
//! `[RESERVOIRS]`, `[PIPES]`, `[PATTERNS]`, `[DEMANDS]` and `[OPTIONS]`.
//! Pipe diameters and roughness in `[PIPES]` are ignored because pipe types
//! come from the catalog.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize, Serializer};

use crate::error::ParseError;
use crate::network::{
    DemandCategory, DemandModel, Network, Node, NodeKind, Pipe, PipeType, PipeTypeCatalog, Solution, DEFAULT_PERIODS,
};

/// Sections that carry network elements this model cannot represent.
const UNSUPPORTED: [&str; 3] = ["PUMPS", "VALVES", "TANKS"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Junctions,
    Reservoirs,
    Pipes,
    Patterns,
    Demands,
    Options,
    Unsupported,
    Ignored,
}

fn section(name: &str) -> Section {
    match name.to_ascii_uppercase().as_str() {
        "JUNCTIONS" => Section::Junctions,
        "RESERVOIRS" => Section::Reservoirs,
        "PIPES" => Section::Pipes,
        "PATTERNS" => Section::Patterns,
        "DEMANDS" => Section::Demands,
        "OPTIONS" => Section::Options,
        n if UNSUPPORTED.contains(&n) => Section::Unsupported,
        _ => Section::Ignored,
    }
}

fn number(tok: &str, what: &str, line: usize) -> Result<f64, ParseError> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ParseError::at(line, format!("{what} {tok:?} is not a number"))),
    }
}

fn fields(toks: &[&str], min: usize, record: &str, line: usize) -> Result<(), ParseError> {
    if toks.len() < min {
        return Err(ParseError::at(
            line,
            format!("{record} record needs at least {min} fields"),
        ));
    }
    Ok(())
}

struct RawJunction {
    line: usize,
    label: String,
    elevation: f64,
    demand: Option<(f64, Option<String>)>,
}

struct RawDemand {
    line: usize,
    junction: String,
    base: f64,
    pattern: Option<String>,
}

struct RawPipe {
    line: usize,
    label: String,
    from: String,
    to: String,
    length: f64,
}

/// Parses an instance file into a [`Network`].
///
/// Flow units default to LPS; `CMS` is also accepted. A `[DEMANDS]` entry
/// for a junction replaces the demand given in `[JUNCTIONS]`, several
/// entries for the same junction form its demand categories. Demands
/// without a pattern use the `Pattern` option if one is set and are
/// constant otherwise. The horizon has as many periods as the longest
/// pattern, or 24 without patterns.
pub fn parse_instance(text: &str) -> Result<Network, ParseError> {
    let mut current = Section::Ignored;
    let mut junctions: Vec<RawJunction> = Vec::new();
    let mut reservoirs: Vec<(usize, String, f64)> = Vec::new();
    let mut pipes: Vec<RawPipe> = Vec::new();
    let mut demands: Vec<RawDemand> = Vec::new();
    let mut patterns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut flow_scale = 1e-3;
    let mut default_pattern: Option<(usize, String)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split(';').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ParseError::at(line, format!("malformed section header {content:?}")))?
                .trim();
            if name.eq_ignore_ascii_case("END") {
                break;
            }
            current = section(name);
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match current {
            Section::Junctions => {
                fields(&toks, 2, "junction", line)?;
                let demand = match toks.get(2) {
                    Some(d) => Some((number(d, "demand", line)?, toks.get(3).map(|p| p.to_string()))),
                    None => None,
                };
                junctions.push(RawJunction {
                    line,
                    label: toks[0].to_string(),
                    elevation: number(toks[1], "elevation", line)?,
                    demand,
                });
            }
            Section::Reservoirs => {
                fields(&toks, 2, "reservoir", line)?;
                reservoirs.push((line, toks[0].to_string(), number(toks[1], "head", line)?));
            }
            Section::Pipes => {
                fields(&toks, 4, "pipe", line)?;
                let length = number(toks[3], "length", line)?;
                if length <= 0.0 {
                    return Err(ParseError::at(
                        line,
                        format!("pipe {:?} has nonpositive length {length}", toks[0]),
                    ));
                }
                pipes.push(RawPipe {
                    line,
                    label: toks[0].to_string(),
                    from: toks[1].to_string(),
                    to: toks[2].to_string(),
                    length,
                });
            }
            Section::Patterns => {
                fields(&toks, 2, "pattern", line)?;
                let values = toks[1..]
                    .iter()
                    .map(|t| number(t, "multiplier", line))
                    .collect::<Result<Vec<_>, _>>()?;
                if values.iter().any(|v| *v < 0.0) {
                    return Err(ParseError::at(
                        line,
                        format!("pattern {:?} has a negative multiplier", toks[0]),
                    ));
                }
                patterns.entry(toks[0].to_string()).or_default().extend(values);
            }
            Section::Demands => {
                fields(&toks, 2, "demand", line)?;
                demands.push(RawDemand {
                    line,
                    junction: toks[0].to_string(),
                    base: number(toks[1], "demand", line)?,
                    pattern: toks.get(2).map(|p| p.to_string()),
                });
            }
            Section::Options => {
                let key = toks[0].to_ascii_uppercase();
                match key.as_str() {
                    "UNITS" => {
                        let unit = toks
                            .get(1)
                            .ok_or_else(|| ParseError::at(line, "Units option without a value"))?;
                        flow_scale = match unit.to_ascii_uppercase().as_str() {
                            "LPS" => 1e-3,
                            "CMS" => 1.0,
                            _ => return Err(ParseError::at(line, format!("unsupported flow units {unit:?}"))),
                        };
                    }
                    "PATTERN" => {
                        if let Some(p) = toks.get(1) {
                            default_pattern = Some((line, p.to_string()));
                        }
                    }
                    _ => {}
                }
            }
            Section::Unsupported => {
                return Err(ParseError::at(line, "pumps, valves and tanks are not supported"));
            }
            Section::Ignored => {}
        }
    }

    if let Some((line, p)) = &default_pattern {
        if !patterns.contains_key(p) {
            return Err(ParseError::at(*line, format!("unknown default pattern {p:?}")));
        }
    }
    let default_pattern = default_pattern.map(|(_, p)| p);
    let resolve = |pattern: &Option<String>, line: usize| -> Result<Option<String>, ParseError> {
        match pattern {
            Some(p) if !patterns.contains_key(p) => Err(ParseError::at(line, format!("unknown pattern {p:?}"))),
            Some(p) => Ok(Some(p.clone())),
            None => Ok(default_pattern.clone()),
        }
    };
    let category = |base: f64, pattern: &Option<String>, line: usize| -> Result<DemandCategory, ParseError> {
        if base < 0.0 {
            return Err(ParseError::at(line, format!("negative demand {base}")));
        }
        Ok(DemandCategory {
            base_load: base * flow_scale,
            pattern: resolve(pattern, line)?,
        })
    };

    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut nodes = Vec::with_capacity(junctions.len() + reservoirs.len());
    for j in &junctions {
        if index.insert(&j.label, nodes.len()).is_some() {
            return Err(ParseError::at(j.line, format!("duplicate node id {:?}", j.label)));
        }
        let demands = match &j.demand {
            Some((base, pattern)) => vec![category(*base, pattern, j.line)?],
            None => Vec::new(),
        };
        nodes.push(Node::junction(j.label.clone(), j.elevation, demands));
    }
    for (line, label, head) in &reservoirs {
        if index.insert(label, nodes.len()).is_some() {
            return Err(ParseError::at(*line, format!("duplicate node id {label:?}")));
        }
        nodes.push(Node::reservoir(label.clone(), *head));
    }

    let mut replaced = vec![false; nodes.len()];
    for d in &demands {
        let &n = index
            .get(d.junction.as_str())
            .ok_or_else(|| ParseError::at(d.line, format!("demand for unknown node {:?}", d.junction)))?;
        if nodes[n].is_reservoir() {
            return Err(ParseError::at(
                d.line,
                format!("demand assigned to reservoir {:?}", d.junction),
            ));
        }
        if !replaced[n] {
            nodes[n].demands.clear();
            replaced[n] = true;
        }
        nodes[n].demands.push(category(d.base, &d.pattern, d.line)?);
    }

    let mut pipe_labels: HashMap<&str, ()> = HashMap::new();
    let mut links = Vec::with_capacity(pipes.len());
    for p in &pipes {
        if pipe_labels.insert(&p.label, ()).is_some() {
            return Err(ParseError::at(p.line, format!("duplicate pipe id {:?}", p.label)));
        }
        let end = |label: &str| {
            index
                .get(label)
                .copied()
                .ok_or_else(|| ParseError::at(p.line, format!("pipe {:?} references unknown node {label:?}", p.label)))
        };
        let (from, to) = (end(&p.from)?, end(&p.to)?);
        if from == to {
            return Err(ParseError::at(
                p.line,
                format!("pipe {:?} connects node {:?} to itself", p.label, p.from),
            ));
        }
        links.push(Pipe {
            label: p.label.clone(),
            from: crate::network::NodeId(from),
            to: crate::network::NodeId(to),
            length: p.length,
        });
    }

    let periods = patterns.values().map(Vec::len).max().unwrap_or(DEFAULT_PERIODS);
    let dm = DemandModel::new(patterns, periods)?;
    Ok(Network::new(nodes, links, dm)?)
}

/// Writes `net` as an instance file that [`parse_instance`] reads back to
/// an equal network. Flows are written in CMS so no unit conversion is
/// involved.
pub fn write_instance(net: &Network, mut sink: impl Write) -> io::Result<()> {
    writeln!(sink, "[TITLE]")?;
    writeln!(sink, "[OPTIONS]")?;
    writeln!(sink, " Units CMS")?;
    writeln!(sink, "\n[JUNCTIONS]")?;
    for n in net.nodes().iter().filter(|n| !n.is_reservoir()) {
        writeln!(sink, " {}\t{}", n.label, n.elevation)?;
    }
    writeln!(sink, "\n[RESERVOIRS]")?;
    for n in net.nodes() {
        if let NodeKind::Reservoir { head } = n.kind {
            writeln!(sink, " {}\t{}", n.label, head)?;
        }
    }
    writeln!(sink, "\n[PIPES]")?;
    for p in net.pipes() {
        let (a, b) = (&net.node(p.from).label, &net.node(p.to).label);
        writeln!(sink, " {}\t{}\t{}\t{}", p.label, a, b, p.length)?;
    }
    writeln!(sink, "\n[DEMANDS]")?;
    for n in net.nodes() {
        for d in &n.demands {
            match &d.pattern {
                Some(p) => writeln!(sink, " {}\t{}\t{}", n.label, d.base_load, p)?,
                None => writeln!(sink, " {}\t{}", n.label, d.base_load)?,
            }
        }
    }
    writeln!(sink, "\n[PATTERNS]")?;
    for (id, mult) in net.demand_model().patterns() {
        for chunk in mult.chunks(12) {
            write!(sink, " {id}")?;
            for m in chunk {
                write!(sink, "\t{m}")?;
            }
            writeln!(sink)?;
        }
    }
    writeln!(sink, "\n[END]")
}

#[derive(Debug, Deserialize)]
struct CatalogRow {
    index: String,
    diameter_mm: f64,
    roughness: f64,
    unit_cost: f64,
}

/// Parses a pipe-type catalog from CSV rows `index,diameter_mm,roughness,
/// unit_cost`. A header row is optional; lines starting with `#` are
/// comments. Indices must run 1, 2, 3, ...
pub fn parse_type_catalog(text: &str) -> Result<PipeTypeCatalog, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(text.as_bytes());
    let mut types = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            ParseError {
                line,
                message: format!("malformed catalog: {e}"),
            }
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        if i == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if record.len() != 4 {
            return Err(ParseError::at(
                line,
                format!("catalog row has {} fields, expected 4", record.len()),
            ));
        }
        let row: CatalogRow = record
            .deserialize(None)
            .map_err(|e| ParseError::at(line, format!("malformed catalog row: {e}")))?;
        let expected = types.len() + 1;
        if row.index.parse::<usize>().ok() != Some(expected) {
            return Err(ParseError::at(
                line,
                format!("type index {:?}, expected {expected}", row.index),
            ));
        }
        types.push(PipeType {
            index: expected,
            diameter_mm: row.diameter_mm,
            roughness: row.roughness,
            unit_cost: row.unit_cost,
        });
    }
    Ok(PipeTypeCatalog::new(types)?)
}

/// Writes the catalog in the format read by [`parse_type_catalog`].
pub fn write_type_catalog(cat: &PipeTypeCatalog, mut sink: impl Write) -> io::Result<()> {
    writeln!(sink, "index,diameter_mm,roughness,unit_cost")?;
    for t in cat.types() {
        writeln!(sink, "{},{},{},{}", t.index, t.diameter_mm, t.roughness, t.unit_cost)?;
    }
    Ok(())
}

/// Reads a solution file: one `pipe_label type_index` pair per line, `;`
/// starts a comment. Every pipe of `net` must appear exactly once.
pub fn parse_solution(text: &str, net: &Network) -> Result<Solution, ParseError> {
    let mut types = vec![0usize; net.pipe_count()];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split(';').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(ParseError::at(line, "expected `pipe type`"));
        }
        let pipe = net
            .pipe_id(toks[0])
            .ok_or_else(|| ParseError::at(line, format!("unknown pipe {:?}", toks[0])))?;
        let t: usize = toks[1]
            .parse()
            .ok()
            .filter(|t| *t >= 1)
            .ok_or_else(|| ParseError::at(line, format!("invalid type index {:?}", toks[1])))?;
        if types[pipe.0] != 0 {
            return Err(ParseError::at(line, format!("pipe {:?} assigned twice", toks[0])));
        }
        types[pipe.0] = t;
    }
    if let Some(missing) = types.iter().position(|t| *t == 0) {
        return Err(ParseError::new(format!(
            "pipe {:?} has no type",
            net.pipes()[missing].label
        )));
    }
    Ok(Solution::new(types))
}

pub fn write_solution(sol: &Solution, net: &Network, mut sink: impl Write) -> io::Result<()> {
    for (p, t) in net.pipes().iter().zip(sol.types()) {
        writeln!(sink, "{}\t{}", p.label, t)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    /// The instance has no feasible uniform assignment.
    Infeasible,
    Error,
}

/// Outcome of one seeded run, serialized as one JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub seed: u64,
    #[serde(serialize_with = "compact_float")]
    pub time_limit_s: f64,
    pub variant: String,
    #[serde(serialize_with = "compact_opt_float")]
    pub best_cost: Option<f64>,
    pub time_to_best_s: f64,
    pub iterations: u64,
    pub simulator_calls: u64,
    pub tested_solutions: u64,
    pub feasible_fraction: f64,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Integral values are written without a fractional part.
fn compact_float<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        s.serialize_i64(*v as i64)
    } else {
        s.serialize_f64(*v)
    }
}

fn compact_opt_float<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => compact_float(v, s),
        None => s.serialize_none(),
    }
}

/// Appends `rec` to `sink` as a single line.
pub fn write_run_record(rec: &RunRecord, mut sink: impl Write) -> io::Result<()> {
    serde_json::to_writer(&mut sink, rec)?;
    sink.write_all(b"\n")
}

/// Reads records written by [`write_run_record`]; blank lines are skipped.
pub fn read_run_records(reader: impl BufRead) -> Result<Vec<RunRecord>, ParseError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| ParseError::at(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| ParseError::at(line_no, format!("bad record: {e}")))?;
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[JUNCTIONS]
;id elev demand
 J1  10  2
[RESERVOIRS]
 R1  50
[PIPES]
 P1  R1  J1  100  300  130
[END]
";

    #[test]
    fn minimal_instance() {
        let net = parse_instance(MINIMAL).unwrap();
        assert_eq!(net.node_count(), 2);
        assert_eq!(net.pipe_count(), 1);
        let j = net.node_id("J1").unwrap();
        assert!((net.demand_at(j, 1).unwrap() - 0.002).abs() < 1e-15);
        assert_eq!(net.period_count(), DEFAULT_PERIODS);
    }

    #[test]
    fn unknown_node_is_located() {
        let text = MINIMAL.replace(" P1  R1  J1", " P1  R1  X");
        let err = parse_instance(&text).unwrap_err();
        assert_eq!(err.line, Some(7));
        assert!(err.message.contains("\"X\""), "{err}");
    }

    #[test]
    fn located_errors() {
        let cases = [
            (MINIMAL.replace("100  300", "0  300"), 7),
            (MINIMAL.replace("[RESERVOIRS]\n R1", "[RESERVOIRS]\n J1"), 5),
            (MINIMAL.replace("[END]", "[OPTIONS]\n Units GPM\n[END]"), 9),
        ];
        for (text, line) in cases {
            let err = parse_instance(&text).unwrap_err();
            assert_eq!(err.line, Some(line), "{err}");
        }
    }

    #[test]
    fn pattern_continuation_rows() {
        let twelve = ["1.0"; 12].join(" ");
        let text = MINIMAL.replace(
            "[END]",
            &format!("[PATTERNS]\n P {twelve}\n P {}\n[END]", ["0.5"; 12].join(" ")),
        );
        let net = parse_instance(&text).unwrap();
        assert_eq!(net.demand_model().pattern("P").unwrap().len(), 24);
        assert_eq!(net.period_count(), 24);
    }

    #[test]
    fn demands_replace_junction_demand() {
        let text = MINIMAL.replace(
            "[END]",
            "[DEMANDS]\n J1 1 A\n J1 3\n[PATTERNS]\n A 1 2\n[OPTIONS]\n Units CMS\n[END]",
        );
        let net = parse_instance(&text).unwrap();
        let j = net.node_id("J1").unwrap();
        assert_eq!(net.node(j).demands.len(), 2);
        assert_eq!(net.period_count(), 2);
        assert_eq!(net.demand_at(j, 2).unwrap(), 5.0);
    }

    #[test]
    fn rejects_pumps() {
        let text = MINIMAL.replace("[END]", "[PUMPS]\n PU1 R1 J1 HEAD 1\n[END]");
        assert!(parse_instance(&text).is_err());
        let empty = MINIMAL.replace("[END]", "[PUMPS]\n[TAGS]\n NODE J1 x\n[END]");
        assert!(parse_instance(&empty).is_ok());
    }

    #[test]
    fn catalog_with_and_without_header() {
        let cat = parse_type_catalog("index,diameter_mm,roughness,unit_cost\n1,100,130,10\n2,150,130,20\n").unwrap();
        assert_eq!(cat.len(), 2);
        assert_eq!(parse_type_catalog("1, 20, 130, 9").unwrap().len(), 1);
        let err = parse_type_catalog("1,100,130,10\n2,50,130,20\n").unwrap_err();
        assert!(err.message.contains("sorted"), "{err}");
    }

    #[test]
    fn catalog_round_trip() {
        let cat = PipeTypeCatalog::hg_mp();
        let mut buf = Vec::new();
        write_type_catalog(&cat, &mut buf).unwrap();
        assert_eq!(parse_type_catalog(std::str::from_utf8(&buf).unwrap()).unwrap(), cat);
    }

    fn record(cost: Option<f64>) -> RunRecord {
        RunRecord {
            instance_id: "a".into(),
            seed: 1,
            time_limit_s: 60.0,
            variant: "full".into(),
            best_cost: cost,
            time_to_best_s: 0.5,
            iterations: 3,
            simulator_calls: 30,
            tested_solutions: 10,
            feasible_fraction: 0.1401,
            status: RunStatus::Ok,
            error: None,
        }
    }

    #[test]
    fn zero_cost_is_written_as_integer() {
        let mut buf = Vec::new();
        write_run_record(&record(Some(0.0)), &mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert!(line.contains("\"best_cost\":0,"), "{line}");
        assert!(line.ends_with('\n') && line.matches('\n').count() == 1);
    }

    #[test]
    fn records_round_trip_in_order() {
        let mut buf = Vec::new();
        let a = record(Some(12.5));
        let mut b = record(None);
        b.seed = 2;
        b.status = RunStatus::Error;
        b.error = Some("unreadable".into());
        write_run_record(&a, &mut buf).unwrap();
        write_run_record(&b, &mut buf).unwrap();
        let back = read_run_records(buf.as_slice()).unwrap();
        assert_eq!(back, vec![a, b]);
    }
}
