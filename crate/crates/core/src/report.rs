//! Static HTML reports for accepted candidates: a property table for the
//! start/final pair and the pathway rendered step by step, molecules as
//! inline SVG. Output is self-contained and byte-deterministic.

use std::f64::consts::TAU;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::elements::symbol;
use crate::pathway::PathwayStep;
use crate::pipeline::CandidateResult;
use crate::properties::PropertyProfile;
use crate::smiles::{canonical_smiles, validate_chemistry, BondOrder, Molecule};

const BOND_LEN: f64 = 35.0;
const LABEL_GAP: f64 = 9.0;
const MARGIN: f64 = 22.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub html: String,
    /// Inline SVG per molecule step, in pathway order.
    pub images: Vec<String>,
    pub step_count: usize,
}

fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// 2D layout
// ---------------------------------------------------------------------------

type Point = (f64, f64);

fn distance(a: Point, b: Point) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Circumradius of a regular polygon with `k` sides of length `side`.
fn circumradius(k: usize, side: f64) -> f64 {
    side / (2.0 * (std::f64::consts::PI / k as f64).sin())
}

struct Layout {
    positions: Vec<Point>,
    overlaps: bool,
}

/// Place a whole ring as a regular polygon centered at `center`, walking
/// the cycle from `start_index` with the first vertex at `start_angle`.
fn place_polygon(
    ring: &[usize],
    start_index: usize,
    center: Point,
    start_angle: f64,
    direction: f64,
    positions: &mut [Option<Point>],
) {
    let k = ring.len();
    let radius = circumradius(k, BOND_LEN);
    let step = TAU / k as f64;
    for offset in 0..k {
        let atom = ring[(start_index + offset) % k];
        if positions[atom].is_none() {
            let angle = start_angle + direction * step * offset as f64;
            positions[atom] =
                Some((center.0 + radius * angle.cos(), center.1 + radius * angle.sin()));
        }
    }
}

/// Fold a ring over an already-placed edge `(u, v)` that is adjacent in the
/// cycle, putting the new vertices on the side away from `away_from`.
fn place_ring_on_edge(
    ring: &[usize],
    u: usize,
    v: usize,
    away_from: Point,
    positions: &mut [Option<Point>],
) {
    let k = ring.len();
    let pu = positions[u].expect("edge endpoint placed");
    let pv = positions[v].expect("edge endpoint placed");
    let mid = ((pu.0 + pv.0) / 2.0, (pu.1 + pv.1) / 2.0);
    let side = distance(pu, pv).max(1e-9);
    let apothem = (circumradius(k, side).powi(2) - (side / 2.0).powi(2)).max(0.0).sqrt();
    let normal = (-(pv.1 - pu.1) / side, (pv.0 - pu.0) / side);
    let c1 = (mid.0 + apothem * normal.0, mid.1 + apothem * normal.1);
    let c2 = (mid.0 - apothem * normal.0, mid.1 - apothem * normal.1);
    let center = if distance(c1, away_from) >= distance(c2, away_from) { c1 } else { c2 };

    let iu = ring.iter().position(|&a| a == u).expect("u in ring");
    let forward = ring[(iu + 1) % k] == v;
    let start_angle = (pu.1 - center.1).atan2(pu.0 - center.0);
    let next_angle = (pv.1 - center.1).atan2(pv.0 - center.0);
    // Rotation direction that carries u onto v in one polygon step.
    let mut delta = next_angle - start_angle;
    while delta > std::f64::consts::PI {
        delta -= TAU;
    }
    while delta < -std::f64::consts::PI {
        delta += TAU;
    }
    let direction = if delta >= 0.0 { 1.0 } else { -1.0 };
    let (start_index, walk) = if forward { (iu, direction) } else { (iu, -direction) };
    // Walk the cycle in its stored orientation if that is the direction that
    // reaches v next; otherwise walk the reversed cycle.
    if forward {
        place_polygon(ring, start_index, center, start_angle, walk, positions);
    } else {
        let reversed: Vec<usize> = ring.iter().rev().copied().collect();
        let ri = reversed.iter().position(|&a| a == u).expect("u in ring");
        place_polygon(&reversed, ri, center, start_angle, direction, positions);
    }
}

/// Average position of the placed neighbors of `atom`, used to point new
/// geometry away from what already exists.
fn placed_neighbor_centroid(
    m: &Molecule,
    adj: &[Vec<(usize, usize)>],
    atom: usize,
    positions: &[Option<Point>],
) -> Option<Point> {
    let _ = m;
    let placed: Vec<Point> =
        adj[atom].iter().filter_map(|&(nb, _)| positions[nb]).collect();
    if placed.is_empty() {
        return None;
    }
    let n = placed.len() as f64;
    Some((placed.iter().map(|p| p.0).sum::<f64>() / n, placed.iter().map(|p| p.1).sum::<f64>() / n))
}

/// Direction (radians) for a new neighbor of a placed atom: the candidate
/// on a 15-degree grid farthest from every already-used direction.
fn spread_angle(used: &[f64]) -> f64 {
    if used.is_empty() {
        return 0.0;
    }
    let mut best = 0.0;
    let mut best_score = f64::NEG_INFINITY;
    for i in 0..24 {
        let candidate = i as f64 * TAU / 24.0;
        let score = used
            .iter()
            .map(|&u| {
                let mut d = (candidate - u) % TAU;
                if d < 0.0 {
                    d += TAU;
                }
                d.min(TAU - d)
            })
            .fold(f64::INFINITY, f64::min);
        if score > best_score + 1e-9 {
            best_score = score;
            best = candidate;
        }
    }
    best
}

fn layout(m: &Molecule) -> Layout {
    let n = m.atoms.len();
    let mut positions: Vec<Option<Point>> = vec![None; n];
    if n == 0 {
        return Layout { positions: Vec::new(), overlaps: false };
    }
    let adj = m.adjacency();

    // Seed: the first ring as a polygon, or atom 0 for acyclic molecules.
    if let Some(ring) = m.rings.first() {
        place_polygon(ring, 0, (0.0, 0.0), -TAU / 4.0, 1.0, &mut positions);
    } else {
        positions[0] = Some((0.0, 0.0));
    }

    // One placement action per pass until everything has coordinates.
    loop {
        // Rings with a placed in-cycle edge fold over it; rings touching a
        // single placed atom grow away from its surroundings.
        let mut acted = false;
        for ring in &m.rings {
            if ring.iter().all(|&a| positions[a].is_some()) {
                continue;
            }
            let k = ring.len();
            let mut edge = None;
            for i in 0..k {
                let (u, v) = (ring[i], ring[(i + 1) % k]);
                if positions[u].is_some() && positions[v].is_some() {
                    edge = Some((u, v));
                    break;
                }
            }
            if let Some((u, v)) = edge {
                let hint = placed_neighbor_centroid(m, &adj, u, &positions)
                    .unwrap_or((positions[u].unwrap().0, positions[u].unwrap().1 - BOND_LEN));
                place_ring_on_edge(ring, u, v, hint, &mut positions);
                acted = true;
                break;
            }
            if let Some(&w) = ring.iter().find(|&&a| positions[a].is_some()) {
                let pw = positions[w].unwrap();
                let hint = placed_neighbor_centroid(m, &adj, w, &positions)
                    .unwrap_or((pw.0 - BOND_LEN, pw.1));
                let dir = ((pw.0 - hint.0), (pw.1 - hint.1));
                let len = (dir.0 * dir.0 + dir.1 * dir.1).sqrt().max(1e-9);
                let radius = circumradius(k, BOND_LEN);
                let center = (pw.0 + radius * dir.0 / len, pw.1 + radius * dir.1 / len);
                let start_angle = (pw.1 - center.1).atan2(pw.0 - center.0);
                let iw = ring.iter().position(|&a| a == w).unwrap();
                place_polygon(ring, iw, center, start_angle, 1.0, &mut positions);
                acted = true;
                break;
            }
        }
        if acted {
            continue;
        }

        // Chain growth: lowest-index placed atom with an unplaced neighbor.
        let mut grew = false;
        'outer: for atom in 0..n {
            if positions[atom].is_none() {
                continue;
            }
            for &(nb, _) in &adj[atom] {
                if positions[nb].is_some() {
                    continue;
                }
                let p = positions[atom].unwrap();
                let used: Vec<f64> = adj[atom]
                    .iter()
                    .filter_map(|&(other, _)| positions[other])
                    .map(|q| (q.1 - p.1).atan2(q.0 - p.0))
                    .collect();
                let angle = spread_angle(&used);
                positions[nb] =
                    Some((p.0 + BOND_LEN * angle.cos(), p.1 + BOND_LEN * angle.sin()));
                grew = true;
                break 'outer;
            }
        }
        if grew {
            continue;
        }

        // Disconnected leftovers start a fresh patch to the right.
        match (0..n).find(|&a| positions[a].is_none()) {
            Some(orphan) => {
                let max_x = positions
                    .iter()
                    .flatten()
                    .map(|p| p.0)
                    .fold(f64::NEG_INFINITY, f64::max);
                let x = if max_x.is_finite() { max_x + 2.0 * BOND_LEN } else { 0.0 };
                if let Some(ring) = m.rings.iter().find(|r| r.contains(&orphan)) {
                    let radius = circumradius(ring.len(), BOND_LEN);
                    place_polygon(ring, 0, (x + radius, 0.0), -TAU / 4.0, 1.0, &mut positions);
                } else {
                    positions[orphan] = Some((x, 0.0));
                }
            }
            None => break,
        }
    }

    let placed: Vec<Point> = positions.into_iter().map(|p| p.expect("all placed")).collect();
    let mut overlaps = false;
    'scan: for i in 0..placed.len() {
        for j in i + 1..placed.len() {
            if m.bond_between(i, j).is_none() && distance(placed[i], placed[j]) < 0.6 * BOND_LEN {
                overlaps = true;
                break 'scan;
            }
        }
    }
    Layout { positions: placed, overlaps }
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

fn atom_color(element: u8) -> &'static str {
    match element {
        7 => "#1d4ed8",
        8 => "#c2271f",
        9 | 17 => "#15803d",
        16 => "#a16207",
        15 => "#b45309",
        35 => "#92400e",
        53 => "#7e22ce",
        _ => "#1f2328",
    }
}

fn atom_label(m: &Molecule, index: usize) -> Option<String> {
    let atom = &m.atoms[index];
    let lone = m.degree(index) == 0;
    if atom.element == 6 && atom.charge == 0 && atom.isotope.is_none() && !lone {
        return None;
    }
    let mut label = String::new();
    if let Some(isotope) = atom.isotope {
        let _ = write!(label, "{isotope}");
    }
    label.push_str(if atom.element == 0 { "*" } else { symbol(atom.element) });
    match atom.charge {
        0 => {}
        1 => label.push('+'),
        -1 => label.push('-'),
        c if c > 1 => {
            let _ = write!(label, "{c}+");
        }
        c => {
            let _ = write!(label, "{}-", -c);
        }
    }
    Some(label)
}

/// Trim a bond line back from a labeled endpoint so it does not strike the
/// label text.
fn shorten(from: Point, to: Point, trim_from: bool, trim_to: bool) -> (Point, Point) {
    let d = distance(from, to).max(1e-9);
    let ux = (to.0 - from.0) / d;
    let uy = (to.1 - from.1) / d;
    let a = if trim_from { (from.0 + ux * LABEL_GAP, from.1 + uy * LABEL_GAP) } else { from };
    let b = if trim_to { (to.0 - ux * LABEL_GAP, to.1 - uy * LABEL_GAP) } else { to };
    (a, b)
}

fn svg_line(out: &mut String, a: Point, b: Point, offset: f64) {
    let d = distance(a, b).max(1e-9);
    let nx = -(b.1 - a.1) / d * offset;
    let ny = (b.0 - a.0) / d * offset;
    let _ = writeln!(
        out,
        r#"  <line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
        a.0 + nx,
        a.1 + ny,
        b.0 + nx,
        b.1 + ny
    );
}

/// Render one sanitized molecule as a standalone inline SVG element.
pub fn depict_molecule(m: &Molecule) -> String {
    let Layout { positions, overlaps } = layout(m);
    let labels: Vec<Option<String>> = (0..m.atoms.len()).map(|i| atom_label(m, i)).collect();

    let min_x = positions.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).min(0.0);
    let min_y = positions.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).min(0.0);
    let max_x = positions.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let max_y = positions.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let shift = |p: Point| (p.0 - min_x + MARGIN, p.1 - min_y + MARGIN);
    let width = max_x - min_x + 2.0 * MARGIN;
    let height = max_y - min_y + 2.0 * MARGIN;

    let mut body = String::new();
    let title = if overlaps {
        format!("{}; layout overlaps", canonical_smiles(m))
    } else {
        canonical_smiles(m)
    };
    let _ = writeln!(body, "  <title>{}</title>", escape_html(&title));

    body.push_str("  <g stroke=\"#1f2328\" stroke-width=\"1.4\">\n");
    let mut bond_lines = String::new();
    for (bi, bond) in m.bonds.iter().enumerate() {
        let order = m.kekule.get(bi).copied().unwrap_or(bond.order);
        let (a, b) = shorten(
            shift(positions[bond.a]),
            shift(positions[bond.b]),
            labels[bond.a].is_some(),
            labels[bond.b].is_some(),
        );
        match order {
            BondOrder::Single | BondOrder::Aromatic => svg_line(&mut bond_lines, a, b, 0.0),
            BondOrder::Double => {
                svg_line(&mut bond_lines, a, b, 2.2);
                svg_line(&mut bond_lines, a, b, -2.2);
            }
            BondOrder::Triple => {
                svg_line(&mut bond_lines, a, b, 0.0);
                svg_line(&mut bond_lines, a, b, 3.2);
                svg_line(&mut bond_lines, a, b, -3.2);
            }
        }
    }
    body.push_str(&bond_lines);
    body.push_str("  </g>\n");

    for (i, label) in labels.iter().enumerate() {
        let Some(text) = label else { continue };
        let (x, y) = shift(positions[i]);
        let _ = writeln!(
            body,
            r##"  <circle cx="{x:.2}" cy="{y:.2}" r="8.5" fill="#ffffff"/>"##
        );
        let _ = writeln!(
            body,
            r#"  <text x="{x:.2}" y="{y:.2}" fill="{}" font-family="monospace" font-size="13" text-anchor="middle" dominant-baseline="central">{}</text>"#,
            atom_color(m.atoms[i].element),
            escape_html(text)
        );
    }

    format!(
        "<svg viewBox=\"0 0 {width:.2} {height:.2}\" width=\"{width:.2}\" height=\"{height:.2}\" role=\"img\">\n{body}</svg>"
    )
}

// ---------------------------------------------------------------------------
// HTML assembly
// ---------------------------------------------------------------------------

const STYLE: &str = "\
body{font-family:Georgia,serif;max-width:56rem;margin:2rem auto;padding:0 1rem;color:#1f2328;background:#ffffff}\
h1{font-size:1.5rem;border-bottom:2px solid #1f2328;padding-bottom:0.4rem}\
table{border-collapse:collapse;margin:1rem 0}\
th,td{border:1px solid #9aa0a6;padding:0.35rem 0.8rem;text-align:right}\
th:first-child,td:first-child{text-align:left}\
code{font-family:monospace;background:#f2f2f2;padding:0.1rem 0.3rem;word-break:break-all}\
ol.pathway{list-style:none;padding:0}\
ol.pathway li{margin:1rem 0}\
li.molecule-step{border:1px solid #d0d4d9;padding:0.8rem}\
li.reaction-step{padding-left:2rem;font-style:italic}\
.meta{color:#57606a}";

fn push_row(html: &mut String, name: &str, start: &str, fin: &str) {
    let _ = writeln!(html, "<tr><td>{name}</td><td>{start}</td><td>{fin}</td></tr>");
}

fn property_table(
    start: &PropertyProfile,
    fin: Option<&PropertyProfile>,
    similarity: Option<f64>,
) -> String {
    let mut html = String::from(
        "<table class=\"properties\">\n<tr><th>Property</th><th>Start</th><th>Final</th></tr>\n",
    );
    let fmt2 = |v: f64| format!("{v:.2}");
    let int = |v: u32| v.to_string();
    let missing = "\u{2014}".to_string();
    let f = |get: &dyn Fn(&PropertyProfile) -> String| fin.map(|p| get(p)).unwrap_or_else(|| missing.clone());
    push_row(&mut html, "Molecular weight", &fmt2(start.mw), &f(&|p| fmt2(p.mw)));
    push_row(&mut html, "logP", &fmt2(start.logp), &f(&|p| fmt2(p.logp)));
    push_row(&mut html, "H-bond donors", &int(start.hbd), &f(&|p| int(p.hbd)));
    push_row(&mut html, "H-bond acceptors", &int(start.hba), &f(&|p| int(p.hba)));
    push_row(&mut html, "Synthetic accessibility", &fmt2(start.sa_score), &f(&|p| fmt2(p.sa_score)));
    push_row(
        &mut html,
        "Lipinski violations",
        &int(start.lipinski_violations),
        &f(&|p| int(p.lipinski_violations)),
    );
    let similarity_text = similarity.map(|s| format!("{s:.3}")).unwrap_or(missing);
    let _ = writeln!(
        html,
        "<tr><td>Similarity to start</td><td colspan=\"2\">{similarity_text}</td></tr>"
    );
    html.push_str("</table>\n");
    html
}

/// Render an accepted candidate. Returns `None` when the result carries no
/// valid pathway — only fully validated candidates have anything to show.
pub fn render_report(result: &CandidateResult) -> Option<ReportDocument> {
    let pathway = result.pathway.as_ref()?;
    let start_profile = result.start_profile.as_ref()?;

    let mut molecules = Vec::new();
    for smiles in pathway.molecules() {
        molecules.push(validate_chemistry(smiles).molecule?);
    }

    let mut html = String::from("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    html.push_str("<title>Design candidate</title>\n");
    let _ = writeln!(html, "<style>{STYLE}</style>");
    html.push_str("</head>\n<body>\n<h1>Design candidate</h1>\n");
    let _ = writeln!(
        html,
        "<p class=\"meta\">Objective: {}</p>",
        escape_html(&result.task.objective)
    );
    let _ = writeln!(
        html,
        "<p class=\"meta\">Starting molecule: <code>{}</code></p>",
        escape_html(&result.task.start_smiles)
    );

    html.push_str(&property_table(
        start_profile,
        result.final_profile.as_ref(),
        result.similarity,
    ));

    html.push_str("<h2>Pathway</h2>\n<ol class=\"pathway\">\n");
    let mut images = Vec::new();
    let mut step_count = 0usize;
    let mut molecule_cursor = 0usize;
    for step in &pathway.steps {
        match step {
            PathwayStep::Molecule { smiles } => {
                step_count += 1;
                let svg = depict_molecule(&molecules[molecule_cursor]);
                molecule_cursor += 1;
                let _ = writeln!(
                    html,
                    "<li class=\"molecule-step\">\n<h3>Step {step_count}</h3>\n{svg}\n<p><code>{}</code></p>\n</li>",
                    escape_html(smiles)
                );
                images.push(svg);
            }
            PathwayStep::Reaction { description } => {
                let _ = writeln!(
                    html,
                    "<li class=\"reaction-step\"><p>{}</p></li>",
                    escape_html(description)
                );
            }
        }
    }
    html.push_str("</ol>\n</body>\n</html>\n");

    Some(ReportDocument { html, images, step_count })
}
