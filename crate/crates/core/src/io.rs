//! JSON mesh documents and SVG rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{MeshError, Result};
use crate::mesh::{ElementId, Mesh, MeshParams};
use crate::topology::{Orientation, Topology};

pub const FORMAT: &str = "astmesh/1";

/// On-disk form of a mesh. Elements are `[level, i, j]` triples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshDocument {
    pub format: String,
    pub p: u32,
    pub q: u32,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub elements: Vec<(u32, u64, u64)>,
}

impl MeshDocument {
    pub fn from_mesh(mesh: &Mesh) -> Self {
        MeshDocument {
            format: FORMAT.to_string(),
            p: mesh.p(),
            q: mesh.q(),
            m: mesh.m(),
            n: mesh.n(),
            elements: mesh
                .sorted_elements()
                .into_iter()
                .map(|k| (k.level, k.i, k.j))
                .collect(),
        }
    }

    pub fn to_mesh(&self) -> Result<Mesh> {
        if self.format != FORMAT {
            return Err(MeshError::UnsupportedFormat(self.format.clone()));
        }
        let params = MeshParams::new(self.p, self.q, self.m, self.n)?;
        Mesh::from_elements(
            params,
            self.elements.iter().map(|&(l, i, j)| ElementId::new(l, i, j)),
        )
    }
}

/// Canonical compact JSON with elements sorted by `(level, i, j)`.
pub fn serialize(mesh: &Mesh) -> String {
    serde_json::to_string(&MeshDocument::from_mesh(mesh)).expect("mesh documents always serialize")
}

/// Parses and validates a mesh document.
pub fn parse(text: &str) -> Result<Mesh> {
    // check the tag first so documents of other versions get a precise error
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("format").and_then(|f| f.as_str()) {
        Some(FORMAT) => {}
        Some(other) => return Err(MeshError::UnsupportedFormat(other.to_string())),
        None => return Err(MeshError::UnsupportedFormat(String::new())),
    }
    let doc: MeshDocument = serde_json::from_value(value)?;
    doc.to_mesh()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SvgOptions {
    /// Pixels per index unit.
    pub scale: u32,
    pub highlight: Vec<ElementId>,
    pub extensions: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            scale: 50,
            highlight: Vec::new(),
            extensions: false,
        }
    }
}

const FILL: &str = "#ffffff";
const HIGHLIGHT_FILL: &str = "#add8e6";
const EXTENSION_STROKE: &str = "#d62728";

/// SVG 1.1 drawing, `y` pointing up. Identical inputs give identical bytes.
pub fn render_svg(mesh: &Mesh, options: &SvgOptions) -> String {
    let s = options.scale as i64;
    let px = |v: Dyadic| v.mul_int(s).to_f64();
    let w = mesh.m() as i64 * s;
    let h = mesh.n() as i64 * s;
    let flip = |y: Dyadic| px(Dyadic::from_int(mesh.n() as i64) - y);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    let stroke = (options.scale as f64 / 50.0).clamp(0.25, 1.0);
    writeln!(out, r##"<g stroke="#000000" stroke-width="{stroke}">"##).unwrap();
    for k in mesh.sorted_elements() {
        let r = k.rect();
        let fill = if options.highlight.contains(&k) {
            HIGHLIGHT_FILL
        } else {
            FILL
        };
        writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
            px(r.x0),
            flip(r.y1),
            px(r.width()),
            px(r.height()),
        )
        .unwrap();
    }
    out.push_str("</g>\n");
    if options.extensions {
        let exts = Topology::new(mesh).extensions().unwrap_or_default();
        writeln!(
            out,
            r#"<g stroke="{EXTENSION_STROKE}" stroke-width="{}">"#,
            2.0 * stroke
        )
        .unwrap();
        for e in exts {
            let u = e.union();
            let (x1, y1, x2, y2) = match u.orientation {
                Orientation::Horizontal => (px(u.lo), flip(u.fixed), px(u.hi), flip(u.fixed)),
                Orientation::Vertical => (px(u.fixed), flip(u.lo), px(u.fixed), flip(u.hi)),
            };
            writeln!(out, r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>"#).unwrap();
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
