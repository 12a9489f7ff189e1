//! Plain-text graph format.
//!
//! ```text
//! # comment
//! torus <tau_re> <tau_im>
//! v <id> <x> <y>
//! e <tail> <head> <conductance> <a> <b>
//! ```
//!
//! `(a, b)` is the crossing of the edge: the head's lift is its stored
//! position plus `a + b*tau`. Every directed edge is listed explicitly.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex;

use super::{Edge, Modulus, TorusGraph};
use crate::error::{Error, Result};
use crate::homology::Crossing;
use crate::scalar::Real;

pub fn load_graph<T: Real>(path: impl AsRef<Path>) -> Result<TorusGraph<T>> {
    parse_graph(&std::fs::read_to_string(path)?)
}

pub fn parse_graph<T: Real>(text: &str) -> Result<TorusGraph<T>> {
    let mut tau = None;
    let mut vertices: Vec<(usize, usize, Complex<T>)> = Vec::new();
    let mut edges = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let tag = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.collect();
        let arity = |n: usize| {
            if rest.len() == n {
                Ok(())
            } else {
                Err(Error::Parse { line, msg: format!("`{tag}` expects {n} fields, found {}", rest.len()) })
            }
        };
        match tag {
            "torus" => {
                arity(2)?;
                if tau.is_some() {
                    return Err(Error::Parse { line, msg: "duplicate torus line".into() });
                }
                let t = Complex::new(T::lit(field(rest[0], line)?), T::lit(field(rest[1], line)?));
                tau = Some(Modulus::new(t)?);
            }
            "v" => {
                arity(3)?;
                let id: usize = field(rest[0], line)?;
                let pos = Complex::new(T::lit(field(rest[1], line)?), T::lit(field(rest[2], line)?));
                vertices.push((id, line, pos));
            }
            "e" => {
                arity(5)?;
                let c: f64 = field(rest[2], line)?;
                if c < 0.0 {
                    return Err(Error::NegativeConductance(line));
                }
                if !c.is_finite() {
                    return Err(Error::Parse { line, msg: "conductance is not finite".into() });
                }
                edges.push((
                    line,
                    Edge {
                        tail: field(rest[0], line)?,
                        head: field(rest[1], line)?,
                        conductance: T::lit(c),
                        crossing: Crossing::new(field(rest[3], line)?, field(rest[4], line)?),
                    },
                ));
            }
            other => {
                return Err(Error::Parse { line, msg: format!("unknown record `{other}`") });
            }
        }
    }

    let modulus = tau.ok_or(Error::Parse { line: 0, msg: "missing torus line".into() })?;
    let nv = vertices.len();
    let mut positions = vec![None; nv];
    for &(id, line, pos) in &vertices {
        if id >= nv {
            return Err(Error::Parse { line, msg: format!("vertex id {id} out of range 0..{nv}") });
        }
        if positions[id].replace(pos).is_some() {
            return Err(Error::Parse { line, msg: format!("vertex {id} defined twice") });
        }
    }
    let positions: Vec<Complex<T>> = positions.into_iter().map(|p| p.expect("ids form a permutation")).collect();
    for (line, e) in &edges {
        if e.tail >= nv || e.head >= nv {
            return Err(Error::Parse { line: *line, msg: "edge references an undefined vertex".into() });
        }
    }
    TorusGraph::from_parts(modulus, positions, edges.into_iter().map(|(_, e)| e).collect())
}

/// Serialises a graph; floats use shortest round-trip formatting so
/// `parse_graph(write_graph(g)) == g`.
pub fn write_graph<T: Real>(g: &TorusGraph<T>) -> String {
    let mut out = String::new();
    let tau = g.tau();
    let _ = writeln!(out, "torus {} {}", tau.re.as_f64(), tau.im.as_f64());
    for (id, p) in g.positions().iter().enumerate() {
        let _ = writeln!(out, "v {id} {} {}", p.re.as_f64(), p.im.as_f64());
    }
    for e in g.edges() {
        let _ = writeln!(out, "e {} {} {} {} {}", e.tail, e.head, e.conductance.as_f64(), e.crossing.a, e.crossing.b);
    }
    out
}

fn field<F: FromStr>(s: &str, line: usize) -> Result<F> {
    s.parse().map_err(|_| Error::Parse { line, msg: format!("cannot parse `{s}`") })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ConductanceProfile;

    #[test]
    fn round_trip_square() {
        let g = TorusGraph::<f64>::square(3, (1, 3), ConductanceProfile::Uniform).unwrap();
        let text = write_graph(&g);
        let h: TorusGraph<f64> = parse_graph(&text).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn negative_conductance_reports_line() {
        let g = TorusGraph::<f64>::square(2, (0, 2), ConductanceProfile::Uniform).unwrap();
        let mut text = write_graph(&g);
        text = text.replacen(" 0.25 ", " -0.25 ", 1);
        // torus line + four vertex lines precede the first edge
        assert!(matches!(parse_graph::<f64>(&text), Err(Error::NegativeConductance(6))));
    }

    #[test]
    fn bad_records() {
        assert!(matches!(parse_graph::<f64>("torus 0 1\nv 0 0 0\nq 1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_graph::<f64>("v 0 0 0\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_graph::<f64>("torus 0 -1\n"), Err(Error::DegenerateTorus(_))));
        assert!(matches!(parse_graph::<f64>("torus 0 1\nv 1 0 0\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn non_contractible_face_detected() {
        // one vertex per row of a 2x2 grid, but the east edge of vertex 0
        // claims an extra wrap around the torus
        let g = TorusGraph::<f64>::square(2, (0, 2), ConductanceProfile::Uniform).unwrap();
        let text = write_graph(&g);
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        // edge 0 is 0 -> 1 east with crossing (0,0); its reverse is edge 6 (1 -> 0 west)
        lines[5] = "e 0 1 0.25 0 1".into();
        lines[5 + 6] = "e 1 0 0.25 0 -1".into();
        let err = parse_graph::<f64>(&lines.join("\n")).unwrap_err();
        assert!(matches!(err, Error::NonContractibleFace { .. } | Error::NonCellular(_)), "{err:?}");
    }

    #[test]
    fn missing_reverse_detected() {
        let g = TorusGraph::<f64>::square(2, (0, 2), ConductanceProfile::Uniform).unwrap();
        let text = write_graph(&g);
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[5] = "e 0 1 0.25 1 1".into();
        assert!(matches!(parse_graph::<f64>(&lines.join("\n")), Err(Error::InconsistentCrossings(_))));
    }
}
