// Rendering only: every radius, color, opacity and level comes from the
// engine payloads; this file just maps them onto SVG.
import init, { clusterView, enrichment, highlight } from "./pkg/geneweave_wasm.js";

const SAMPLE = {
  clusters: `geneEntrezId\tgeneName\tGLYCOLYSIS\tCITRATE_CYCLE\tPENTOSE
101\tHK1\t0.9\t0.1\t
102\tPFKM\t0.8\t\t0.2
103\tALDOA\t1.0\t\t
104\tENO2\t0.6\t0.4\t
105\tCS\t\t1.0\t
106\tACO2\t\t0.7\t0.3
107\tIDH3A\t\t0.9\t
108\tMDH2\t0.2\t0.8\t
109\tG6PD\t\t\t1.0
110\tPGLS\t\t0.1\t0.9
111\tTALDO1\t0.3\t\t0.7
112\tTKT\t\t\t0.8`,
  interactions: `SourceGeneId,TargetGeneId,score
101,102,0.9
102,103,0.7
103,104,0.5
101,104,0.3
108,101,0.6
105,106,0.8
106,107,0.4
105,108,0.95
109,110,0.85
110,111,0.2
111,112,0.65
104,105,0.5`,
  diseases: `Genes,Disease/Trait,p-Value
HK1,Type 2 diabetes,1e-9
PFKM,Type 2 diabetes,3e-6
ALDOA,Type 2 diabetes,0.002
ENO2,Type 2 diabetes,4e-5
CS,Type 2 diabetes,0.04
G6PD,Hemolytic anemia,2e-7
TALDO1,Hemolytic anemia,0.01`,
};

const $ = (id) => document.getElementById(id);
const SVG = "http://www.w3.org/2000/svg";
let clusterPayload = null;

function el(name, attrs, parent) {
  const node = document.createElementNS(SVG, name);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (parent) parent.appendChild(node);
  return node;
}

function run(fn) {
  $("error").textContent = "";
  try {
    fn();
  } catch (e) {
    let msg = String(e);
    try {
      const err = JSON.parse(msg);
      const at = err.location ? ` (line ${err.location.line}${err.location.column ? `, column ${err.location.column}` : ""})` : "";
      msg = `${err.error_code}${at}: ${err.message}`;
    } catch (_) {}
    $("error").textContent = msg;
  }
}

// Fit payload coordinates (plus radii) into the 1000x1000 viewBox.
function fitter(points) {
  let [x0, y0, x1, y1] = [Infinity, Infinity, -Infinity, -Infinity];
  for (const p of points) {
    x0 = Math.min(x0, p.x - p.r); y0 = Math.min(y0, p.y - p.r);
    x1 = Math.max(x1, p.x + p.r); y1 = Math.max(y1, p.y + p.r);
  }
  const scale = 900 / Math.max(x1 - x0, y1 - y0, 1);
  return { scale, x: (x) => 50 + (x - x0) * scale, y: (y) => 50 + (y - y0) * scale };
}

function drawClusters(payload, overlay) {
  const svg = $("clusterSvg");
  svg.replaceChildren();
  const fit = fitter(payload.nodes.map((n) => ({ x: n.x, y: n.y, r: n.major_radius })));
  const byId = new Map(payload.nodes.map((n) => [n.id, n]));
  const style = new Map((overlay || []).map((r) => [r.cluster, r]));
  for (const e of payload.edges) {
    const a = byId.get(e.a), b = byId.get(e.b);
    const dimmed = overlay && style.get(e.a).opacity < 1 && style.get(e.b).opacity < 1;
    el("line", {
      x1: fit.x(a.x), y1: fit.y(a.y), x2: fit.x(b.x), y2: fit.y(b.y),
      stroke: "#555", "stroke-width": e.width, "stroke-opacity": dimmed ? style.get(e.a).opacity * e.intensity : e.intensity,
    }, svg);
  }
  for (const n of payload.nodes) {
    const o = style.get(n.id);
    el("ellipse", {
      cx: fit.x(n.x), cy: fit.y(n.y), rx: n.major_radius * fit.scale, ry: n.minor_radius * fit.scale,
      fill: o ? o.color : n.color, "fill-opacity": o ? o.opacity : 1, stroke: "#333",
    }, svg);
    const label = el("text", { x: fit.x(n.x), y: fit.y(n.y), "text-anchor": "middle" }, svg);
    label.textContent = `${n.name} (${n.gene_count})`;
  }
}

function arc(cx, cy, r, start, end) {
  if (end - start >= 2 * Math.PI - 1e-9) return null;
  const large = end - start > Math.PI ? 1 : 0;
  const [sx, sy] = [cx + r * Math.cos(start), cy + r * Math.sin(start)];
  const [ex, ey] = [cx + r * Math.cos(end), cy + r * Math.sin(end)];
  return `M ${cx} ${cy} L ${sx} ${sy} A ${r} ${r} 0 ${large} 1 ${ex} ${ey} Z`;
}

function drawGenes(view, hl) {
  const svg = $("geneSvg");
  svg.replaceChildren();
  const fit = fitter(view.nodes.map((n) => ({ x: n.x, y: n.y, r: n.radius })));
  const pos = new Map(view.nodes.map((n) => [n.id, n]));
  const level = new Map(hl.nodes.map((n) => [n.gene, n.level]));
  const chosen = new Set(hl.edges.map((e) => `${e.a}-${e.b}`));
  const colors = new Map((clusterPayload ? clusterPayload.nodes : []).map((n) => [n.id, n.color]));
  for (const e of view.edges) {
    const a = pos.get(e.a), b = pos.get(e.b);
    const on = chosen.has(`${e.a}-${e.b}`) || chosen.has(`${e.b}-${e.a}`);
    el("line", {
      x1: fit.x(a.x), y1: fit.y(a.y), x2: fit.x(b.x), y2: fit.y(b.y),
      stroke: on ? "#d62728" : "#777", "stroke-width": e.width, "stroke-opacity": on ? 1 : 0.25 * e.intensity,
    }, svg);
  }
  for (const n of view.nodes) {
    const [cx, cy, r] = [fit.x(n.x), fit.y(n.y), n.radius * fit.scale];
    const g = el("g", { opacity: level.has(n.id) ? 1 : 0.3 }, svg);
    let angle = -Math.PI / 2;
    for (const slice of n.pie) {
      const end = angle + slice.fraction * 2 * Math.PI;
      const d = arc(cx, cy, r, angle, end);
      const fill = colors.get(slice.cluster) || "#bbb";
      if (d) el("path", { d, fill, stroke: "#fff" }, g);
      else el("circle", { cx, cy, r, fill }, g);
      angle = end;
    }
    const label = el("text", { x: cx, y: cy + r + 22, "text-anchor": "middle" }, g);
    label.textContent = n.name;
    if (level.has(n.id)) {
      el("circle", { cx: cx + r, cy: cy - r, r: 14, fill: "#d62728" }, svg);
      const badge = el("text", { x: cx + r, y: cy - r + 6, "text-anchor": "middle", class: "badge" }, svg);
      badge.textContent = level.get(n.id);
    }
  }
}

function layout() {
  run(() => {
    clusterPayload = JSON.parse(clusterView($("clusters").value, Number($("seed").value), Number($("minOverlap").value)));
    drawClusters(clusterPayload, null);
    $("enrichTable").replaceChildren();
  });
}

function enrich() {
  run(() => {
    if (!clusterPayload) layout();
    const rows = JSON.parse(enrichment($("clusters").value, $("diseases").value, $("disease").value));
    drawClusters(clusterPayload, rows);
    const table = document.createElement("table");
    table.innerHTML = "<tr><th>cluster</th><th>n</th><th>k</th><th>EASE p</th><th>class</th></tr>";
    for (const r of rows) {
      const tr = table.insertRow();
      for (const v of [r.name, r.n, r.k, r.ease_p]) tr.insertCell().textContent = v;
      tr.insertCell().innerHTML = `<span class="swatch" style="background:${r.color}"></span> ${r.color_class}`;
    }
    $("enrichTable").replaceChildren(table);
  });
}

function doHighlight() {
  run(() => {
    if (!clusterPayload) layout();
    const out = JSON.parse(highlight(
      $("clusters").value, $("interactions").value, $("cluster").value,
      Number($("gene").value), $("mode").value, Number($("param").value), Number($("seed").value),
    ));
    drawGenes(out.view, out.highlight);
  });
}

await init();
for (const k of Object.keys(SAMPLE)) $(k).value = SAMPLE[k];
$("layoutBtn").onclick = layout;
$("reseedBtn").onclick = () => { $("seed").value = Math.floor(Math.random() * 1e9); layout(); };
$("enrichBtn").onclick = enrich;
$("clearBtn").onclick = () => { if (clusterPayload) drawClusters(clusterPayload, null); $("enrichTable").replaceChildren(); };
$("highlightBtn").onclick = doHighlight;
$("mode").onchange = () => { $("param").value = { levels: 2, threshold: 0.5, top_n: 3 }[$("mode").value]; };
layout();
doHighlight();
