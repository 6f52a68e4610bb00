//! Graph file formats.
//!
//! Text: one `u v` pair per line with 0-based ids; `#` starts a comment. A
//! `# vertices N` comment fixes the vertex count so trailing isolated
//! vertices survive a round trip.
//!
//! Binary (little-endian): magic `FGGS`, `u32` version, `u64` vertex count,
//! `u64` undirected edge count, `u32` scale, then `vertex_count + 1` `u64`
//! offsets and `2·edge_count` `u64` neighbor ids.

use super::{scale_for, Graph};
use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"FGGS";
pub const VERSION: u32 = 1;

pub fn read_edge_list<R: Read>(reader: R) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut declared: Option<usize> = None;
    let mut max_id: Option<u32> = None;
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let (body, comment) = match line.find('#') {
            Some(i) => (&line[..i], Some(&line[i + 1..])),
            None => (line.as_str(), None),
        };
        if let Some(c) = comment {
            let mut words = c.split_whitespace();
            if words.next() == Some("vertices") {
                if let Some(n) = words.next().and_then(|w| w.parse().ok()) {
                    declared = Some(n);
                }
            }
        }
        let mut fields = body.split_whitespace();
        let Some(first) = fields.next() else { continue };
        let second = fields
            .next()
            .ok_or_else(|| Error::Format(format!("line {}: expected two ids", lineno + 1)))?;
        let parse = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| Error::Format(format!("line {}: bad vertex id '{s}'", lineno + 1)))
        };
        let (u, v) = (parse(first)?, parse(second)?);
        max_id = Some(max_id.unwrap_or(0).max(u).max(v));
        edges.push((u, v));
    }
    let n = declared.unwrap_or_else(|| max_id.map_or(0, |m| m as usize + 1));
    Graph::undirect(n, &edges)
}

pub fn write_edge_list<W: Write>(g: &Graph, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "# vertices {}", g.vertex_count())?;
    writeln!(w, "# edges {}", g.undirected_edge_count())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_binary<W: Write>(g: &Graph, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.vertex_count() as u64).to_le_bytes())?;
    w.write_all(&g.undirected_edge_count().to_le_bytes())?;
    w.write_all(&g.scale().to_le_bytes())?;
    for &o in g.offsets() {
        w.write_all(&o.to_le_bytes())?;
    }
    for &x in g.neighbor_array() {
        w.write_all(&(x as u64).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(reader: R) -> Result<Graph> {
    let mut r = BufReader::new(reader);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("file too short for a graph header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format("missing FGGS magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported graph version {version}"
        )));
    }
    let n = read_u64(&mut r)?;
    let m = read_u64(&mut r)?;
    let scale = read_u32(&mut r)?;
    if n > u32::MAX as u64 {
        return Err(Error::Format(format!("vertex count {n} too large")));
    }
    let mut offsets = Vec::with_capacity(n as usize + 1);
    for _ in 0..=n {
        offsets.push(read_u64(&mut r)?);
    }
    let mut neighbors = Vec::with_capacity(2 * m as usize);
    for _ in 0..2 * m {
        let x = read_u64(&mut r)?;
        if x >= n {
            return Err(Error::Format(format!("neighbor id {x} out of range")));
        }
        neighbors.push(x as u32);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after neighbor array".into()));
    }
    Graph::from_csr(offsets, neighbors, scale)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| Error::Format("truncated graph file".into()))?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|_| Error::Format("truncated graph file".into()))?;
    Ok(u64::from_le_bytes(b))
}

/// Loads either format, sniffing the magic bytes.
pub fn load(path: &Path) -> Result<Graph> {
    let mut f = std::fs::File::open(path)?;
    let mut head = [0u8; 4];
    let got = f.read(&mut head)?;
    drop(f);
    let f = std::fs::File::open(path)?;
    if got == 4 && &head == MAGIC {
        read_binary(f)
    } else {
        let g = read_edge_list(f)?;
        let s = scale_for(g.vertex_count());
        Ok(g.with_scale(s))
    }
}

/// Saves as text when the extension is `.txt`, `.el` or `.edges`, else binary.
pub fn save(g: &Graph, path: &Path) -> Result<()> {
    let text = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("txt" | "el" | "edges")
    );
    let f = std::fs::File::create(path)?;
    if text {
        write_edge_list(g, f)
    } else {
        write_binary(g, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Graph {
        Graph::undirect(6, &[(0, 1), (1, 2), (2, 0), (3, 4)]).unwrap()
    }

    #[test]
    fn text_round_trip_keeps_isolated_vertices() {
        let g = sample();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let h = read_edge_list(buf.as_slice()).unwrap();
        assert_eq!(h.vertex_count(), 6);
        assert_eq!(h.offsets(), g.offsets());
        assert_eq!(h.neighbor_array(), g.neighbor_array());
    }

    #[test]
    fn text_comments_and_blank_lines() {
        let src = "# a comment\n\n0 1 # trailing\n1\t2\n";
        let g = read_edge_list(src.as_bytes()).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.undirected_edge_count(), 2);
    }

    #[test]
    fn text_rejects_garbage() {
        assert!(read_edge_list("0 x\n".as_bytes()).is_err());
        assert!(read_edge_list("7\n".as_bytes()).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let g = sample().with_scale(3);
        let mut buf = Vec::new();
        write_binary(&g, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"FGGS");
        assert_eq!(read_binary(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn binary_rejects_corruption() {
        let mut buf = Vec::new();
        write_binary(&sample(), &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_binary(bad.as_slice()).is_err());
        assert!(read_binary(&buf[..buf.len() - 3]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_binary(extra.as_slice()).is_err());
    }
}
