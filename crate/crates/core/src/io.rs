//! Text file formats. Every file starts with a header line naming its
//! columns; floats are written with 17 significant digits so they read back
//! exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ifs::{InnerModel, TimeModel};
use crate::newton::NewtonPoly;
use crate::planner::{drift_time, CellGraph, DriftOrbit};
use crate::ssm::{
    FitMeta, Harmonic, PortraitOrbit, ScatteringGrid, SsmModel, Torus, TorusSample,
};

pub const GRID_HEADER: &str = "I,phi,I_prime,phi_prime";
pub const INNER_HEADER: &str = "I,nu,nu_p";
pub const ORBIT_HEADER: &str = "step,map,I,phi,t_cum";
pub const GRAPH_HEADER: &str = "src_cell,dst_cell,map,time";
pub const PORTRAIT_HEADER: &str = "orbit,iter,I,phi";
pub const MODEL_HEADER: &str = "key,values";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("not a number: {field:?}"),
    })
}

/// Non-empty data lines after the header, with 1-based line numbers.
fn data_lines<'a>(text: &'a str, header: &str) -> Result<Vec<(usize, &'a str)>> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
    match lines.next() {
        Some((_, h)) if h == header => {}
        Some((_, h)) => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header {header:?}, found {h:?}"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty file".into(),
            })
        }
    }
    Ok(lines.filter(|(_, l)| !l.is_empty()).collect())
}

fn numeric_row<const K: usize>(line: usize, text: &str) -> Result<[f64; K]> {
    let fields: Vec<&str> = text.split(',').collect();
    if fields.len() != K {
        return Err(Error::Parse {
            line,
            msg: format!("expected {K} fields, found {}", fields.len()),
        });
    }
    let mut out = [0.0; K];
    for (o, f) in out.iter_mut().zip(fields) {
        *o = parse_f64(f, line)?;
    }
    Ok(out)
}

pub fn parse_grid(text: &str) -> Result<ScatteringGrid> {
    let mut tori: Vec<Torus> = Vec::new();
    for (line, row) in data_lines(text, GRID_HEADER)? {
        let [action, phi, action_prime, phi_prime] = numeric_row::<4>(line, row)?;
        let sample = TorusSample {
            phi,
            phi_prime,
            action_prime,
        };
        match tori.last_mut() {
            Some(t) if t.action == action => t.samples.push(sample),
            _ => tori.push(Torus {
                action,
                samples: vec![sample],
            }),
        }
    }
    ScatteringGrid::new(tori)
}

pub fn format_grid(grid: &ScatteringGrid) -> String {
    let mut s = String::from(GRID_HEADER);
    s.push('\n');
    for t in &grid.tori {
        for p in &t.samples {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                num(t.action),
                num(p.phi),
                num(p.action_prime),
                num(p.phi_prime)
            );
        }
    }
    s
}

pub fn load_grid(path: &Path) -> Result<ScatteringGrid> {
    parse_grid(&fs::read_to_string(path)?)
}

pub fn save_grid(path: &Path, grid: &ScatteringGrid) -> Result<()> {
    Ok(fs::write(path, format_grid(grid))?)
}

pub fn parse_inner(text: &str) -> Result<InnerModel> {
    let (mut nodes, mut nu, mut nu_p) = (Vec::new(), Vec::new(), Vec::new());
    for (line, row) in data_lines(text, INNER_HEADER)? {
        let [i, a, b] = numeric_row::<3>(line, row)?;
        nodes.push(i);
        nu.push(a);
        nu_p.push(b);
    }
    InnerModel::new(nodes, nu, nu_p)
}

pub fn format_inner(im: &InnerModel) -> String {
    let mut s = String::from(INNER_HEADER);
    s.push('\n');
    for (i, a, b) in im.rows() {
        let _ = writeln!(s, "{},{},{}", num(i), num(a), num(b));
    }
    s
}

pub fn load_inner(path: &Path) -> Result<InnerModel> {
    parse_inner(&fs::read_to_string(path)?)
}

fn list(values: &[f64]) -> String {
    values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(",")
}

/// Model file: one `key,values...` row per item.
///
/// ```text
/// key,values
/// fourier_degree,4
/// newton_degree,5
/// action_max,7.0000000000000000e0
/// omega_nodes,...
/// omega_dd,...
/// a2_nodes,...
/// a2_dd,...
/// b2_nodes,...
/// b2_dd,...
/// ```
pub fn format_model(m: &SsmModel) -> String {
    let mut s = String::from(MODEL_HEADER);
    s.push('\n');
    let _ = writeln!(s, "fourier_degree,{}", m.fourier_degree);
    let _ = writeln!(s, "newton_degree,{}", m.newton_degree);
    let _ = writeln!(s, "action_max,{}", num(m.action_max));
    let _ = writeln!(s, "odd_harmonic_max,{}", num(m.meta.odd_harmonic_max));
    let _ = writeln!(s, "omega_spread,{}", num(m.meta.omega_spread));
    let _ = writeln!(s, "omega_nodes,{}", list(m.omega.nodes()));
    let _ = writeln!(s, "omega_dd,{}", list(m.omega.divided_differences()));
    for h in &m.harmonics {
        for (c, p) in [('a', &h.a), ('b', &h.b)] {
            let _ = writeln!(s, "{c}{}_nodes,{}", h.n, list(p.nodes()));
            let _ = writeln!(s, "{c}{}_dd,{}", h.n, list(p.divided_differences()));
        }
    }
    s
}

pub fn parse_model(text: &str) -> Result<SsmModel> {
    let mut rows: BTreeMap<String, (usize, Vec<f64>)> = BTreeMap::new();
    for (line, row) in data_lines(text, MODEL_HEADER)? {
        let mut fields = row.split(',');
        let key = fields.next().unwrap_or_default().trim().to_string();
        let values = fields
            .map(|f| parse_f64(f, line))
            .collect::<Result<Vec<f64>>>()?;
        if rows.insert(key.clone(), (line, values)).is_some() {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate key {key:?}"),
            });
        }
    }
    let take = |rows: &mut BTreeMap<String, (usize, Vec<f64>)>, key: &str| {
        rows.remove(key).ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("missing key {key:?}"),
        })
    };
    let scalar = |rows: &mut BTreeMap<String, (usize, Vec<f64>)>, key: &str| -> Result<f64> {
        let (line, v) = take(rows, key)?;
        match v.as_slice() {
            [x] => Ok(*x),
            _ => Err(Error::Parse {
                line,
                msg: format!("{key} expects one value"),
            }),
        }
    };
    let count = |x: f64, key: &str| -> Result<usize> {
        if x >= 0.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(Error::Parse {
                line: 0,
                msg: format!("{key} = {x} is not a count"),
            })
        }
    };
    let poly = |rows: &mut BTreeMap<String, (usize, Vec<f64>)>, prefix: &str| -> Result<NewtonPoly> {
        let (_, nodes) = take(rows, &format!("{prefix}_nodes"))?;
        let (line, dd) = take(rows, &format!("{prefix}_dd"))?;
        NewtonPoly::from_parts(nodes, dd).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })
    };

    let fourier_degree = count(scalar(&mut rows, "fourier_degree")?, "fourier_degree")?;
    let newton_degree = count(scalar(&mut rows, "newton_degree")?, "newton_degree")?;
    let action_max = scalar(&mut rows, "action_max")?;
    let odd_harmonic_max = scalar(&mut rows, "odd_harmonic_max").unwrap_or(0.0);
    let omega_spread = scalar(&mut rows, "omega_spread").unwrap_or(0.0);
    let omega = poly(&mut rows, "omega")?;
    let mut harmonics = Vec::new();
    for n in (2..=fourier_degree as u32).step_by(2) {
        if !rows.contains_key(&format!("a{n}_nodes")) {
            continue;
        }
        harmonics.push(Harmonic {
            n,
            a: poly(&mut rows, &format!("a{n}"))?,
            b: poly(&mut rows, &format!("b{n}"))?,
        });
    }
    if let Some((key, (line, _))) = rows.into_iter().next() {
        return Err(Error::Parse {
            line,
            msg: format!("unexpected key {key:?}"),
        });
    }
    Ok(SsmModel {
        fourier_degree,
        newton_degree,
        harmonics,
        omega,
        action_max,
        meta: FitMeta {
            source: "model file".into(),
            odd_harmonic_max,
            omega_spread,
        },
    })
}

pub fn load_model(path: &Path) -> Result<SsmModel> {
    let mut m = parse_model(&fs::read_to_string(path)?)?;
    m.meta.source = path.display().to_string();
    Ok(m)
}

pub fn save_model(path: &Path, m: &SsmModel) -> Result<()> {
    Ok(fs::write(path, format_model(m))?)
}

/// Orbit rows; row 0 is the start point with map `-`.
pub fn format_orbit(o: &DriftOrbit, tm: &TimeModel) -> String {
    let mut s = String::from(ORBIT_HEADER);
    s.push('\n');
    let _ = writeln!(s, "0,-,{},{},{}", num(o.start.0), num(o.start.1), num(0.0));
    let mut t = 0.0;
    for (k, step) in o.steps.iter().enumerate() {
        t += tm.step_time(step.label);
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            k + 1,
            step.label,
            num(step.action),
            num(step.angle),
            num(t)
        );
    }
    debug_assert!((t - drift_time(o, tm)).abs() <= 1e-9 * t.max(1.0));
    s
}

pub fn format_graph(g: &CellGraph) -> String {
    let mut s = String::from(GRAPH_HEADER);
    s.push('\n');
    for (src, out) in g.edges.iter().enumerate() {
        for e in out {
            let _ = writeln!(s, "{src},{},{},{}", e.to, e.label, num(e.time));
        }
    }
    s
}

pub fn format_portrait(orbits: &[PortraitOrbit]) -> String {
    let mut s = String::from(PORTRAIT_HEADER);
    s.push('\n');
    for o in orbits {
        let _ = writeln!(s, "{},0,{},{}", o.id, num(o.start.0), num(o.start.1));
        for (k, p) in o.points.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{}", o.id, k + 1, num(p.0), num(p.1));
        }
    }
    s
}

/// Flat `key = value` config text; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: k + 1,
                msg: format!("expected key=value, found {line:?}"),
            });
        };
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}
