//! ASCII OFF and OBJ reading and writing.
//!
//! Coordinates are written with 17 significant digits so that a save/load
//! round trip reproduces every `f64` exactly. OBJ support is limited to `v`
//! and `f` records; other record types are ignored on input.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::TriMesh;
use crate::error::{Error, Result};
use crate::geom::Point3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(MeshFormat::Off),
            "obj" => Ok(MeshFormat::Obj),
            other => Err(Error::InvalidParameter(format!("unknown mesh format {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Fan-triangulate polygons with more than three corners instead of failing.
    pub allow_polygons: bool,
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriMesh> {
    load_mesh_with(path, format, LoadOptions::default())
}

pub fn load_mesh_with(path: &Path, format: MeshFormat, opts: LoadOptions) -> Result<TriMesh> {
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_mesh(BufReader::new(file), format, opts)
}

pub fn read_mesh<R: Read>(reader: R, format: MeshFormat, opts: LoadOptions) -> Result<TriMesh> {
    let mut lines = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        lines.push(line);
    }
    let (vertices, polygons) = match format {
        MeshFormat::Off => parse_off(&lines)?,
        MeshFormat::Obj => parse_obj(&lines)?,
    };
    let mut faces = Vec::with_capacity(polygons.len());
    for (line, poly) in polygons {
        match poly.len() {
            3 => faces.push([poly[0], poly[1], poly[2]]),
            k if k > 3 && opts.allow_polygons => {
                faces.extend((1..k - 1).map(|j| [poly[0], poly[j], poly[j + 1]]));
            }
            k => {
                return Err(Error::Parse {
                    line,
                    message: format!("face with {k} corners (only triangles are accepted)"),
                })
            }
        }
    }
    TriMesh::new(vertices, faces)
}

type Polygons = Vec<(usize, Vec<usize>)>;

fn parse_num<T: FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid number {tok:?}"),
    })
}

fn parse_off(lines: &[String]) -> Result<(Vec<Point3>, Polygons)> {
    // (line number, tokens) with comments and blank lines removed
    let mut rows = lines.iter().enumerate().filter_map(|(i, l)| {
        let body = l.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then(|| (i + 1, body.split_whitespace().collect::<Vec<_>>()))
    });

    let (hline, header) = rows.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    if header[0] != "OFF" {
        return Err(Error::Parse {
            line: hline,
            message: format!("expected OFF header, found {:?}", header[0]),
        });
    }
    let (cline, counts) = if header.len() > 1 {
        (hline, header[1..].to_vec())
    } else {
        rows.next().ok_or(Error::Parse {
            line: hline,
            message: "missing counts line".into(),
        })?
    };
    if counts.len() < 2 {
        return Err(Error::Parse {
            line: cline,
            message: "counts line needs vertex and face counts".into(),
        });
    }
    let nv: usize = parse_num(counts[0], cline)?;
    let nf: usize = parse_num(counts[1], cline)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, tok) = rows.next().ok_or(Error::Parse {
            line: lines.len(),
            message: format!("expected {nv} vertices, found {}", vertices.len()),
        })?;
        if tok.len() < 3 {
            return Err(Error::Parse {
                line,
                message: "vertex needs three coordinates".into(),
            });
        }
        vertices.push(Point3::new(
            parse_num(tok[0], line)?,
            parse_num(tok[1], line)?,
            parse_num(tok[2], line)?,
        ));
    }

    let mut polygons = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, tok) = rows.next().ok_or(Error::Parse {
            line: lines.len(),
            message: format!("expected {nf} faces, found {}", polygons.len()),
        })?;
        let k: usize = parse_num(tok[0], line)?;
        if tok.len() < k + 1 {
            return Err(Error::Parse {
                line,
                message: format!("face declares {k} corners but lists {}", tok.len() - 1),
            });
        }
        let idx = tok[1..=k]
            .iter()
            .map(|t| parse_num(t, line))
            .collect::<Result<Vec<usize>>>()?;
        check_range(&idx, nv, line)?;
        polygons.push((line, idx));
    }
    Ok((vertices, polygons))
}

fn parse_obj(lines: &[String]) -> Result<(Vec<Point3>, Polygons)> {
    let mut vertices = Vec::new();
    let mut polygons = Vec::new();
    for (i, l) in lines.iter().enumerate() {
        let line = i + 1;
        let body = l.split('#').next().unwrap_or("");
        let mut tok = body.split_whitespace();
        match tok.next() {
            Some("v") => {
                let c: Vec<&str> = tok.collect();
                if c.len() < 3 {
                    return Err(Error::Parse {
                        line,
                        message: "vertex needs three coordinates".into(),
                    });
                }
                vertices.push(Point3::new(
                    parse_num(c[0], line)?,
                    parse_num(c[1], line)?,
                    parse_num(c[2], line)?,
                ));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for t in tok {
                    // "i", "i/t", "i//n", "i/t/n"; negative indices are relative
                    let head = t.split('/').next().unwrap_or("");
                    let raw: i64 = parse_num(head, line)?;
                    let abs = match raw {
                        0 => {
                            return Err(Error::Parse {
                                line,
                                message: "OBJ indices are 1-based".into(),
                            })
                        }
                        r if r > 0 => r - 1,
                        r => vertices.len() as i64 + r,
                    };
                    if abs < 0 {
                        return Err(Error::Parse {
                            line,
                            message: format!("relative index {raw} before start"),
                        });
                    }
                    idx.push(abs as usize);
                }
                polygons.push((line, idx));
            }
            _ => {}
        }
    }
    for (line, idx) in &polygons {
        check_range(idx, vertices.len(), *line)?;
    }
    Ok((vertices, polygons))
}

fn check_range(idx: &[usize], n: usize, line: usize) -> Result<()> {
    match idx.iter().find(|&&i| i >= n) {
        Some(i) => Err(Error::Parse {
            line,
            message: format!("vertex index {i} out of range (mesh has {n} vertices)"),
        }),
        None => Ok(()),
    }
}

pub fn save_mesh(mesh: &TriMesh, path: &Path, format: MeshFormat) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    write_mesh(&mut w, mesh, format).map_err(io_err)?;
    w.flush().map_err(io_err)
}

pub fn write_mesh<W: Write>(w: &mut W, mesh: &TriMesh, format: MeshFormat) -> std::io::Result<()> {
    match format {
        MeshFormat::Off => {
            writeln!(w, "OFF")?;
            writeln!(w, "{} {} {}", mesh.num_vertices(), mesh.num_faces(), mesh.num_edges())?;
            for p in mesh.vertices() {
                writeln!(w, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)?;
            }
            for f in mesh.faces() {
                writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
            }
        }
        MeshFormat::Obj => {
            for p in mesh.vertices() {
                writeln!(w, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)?;
            }
            for f in mesh.faces() {
                writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
            }
        }
    }
    Ok(())
}
