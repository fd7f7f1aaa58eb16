/** Force-directed subgraph rendering.
 *
 * Layout runs synchronously to a fixed tick count so positions are stable
 * for a given export. The node/edge count badge is computed from the export
 * itself; MAX_EXPORT_NODES mirrors the service's subgraph truncation cap.
 */

import {
  forceCenter,
  forceLink,
  forceManyBody,
  forceSimulation,
  type SimulationLinkDatum,
  type SimulationNodeDatum,
} from "d3-force";

import type { SubgraphExport } from "./types.js";

export const MAX_EXPORT_NODES = 256;
const WIDTH = 640;
const HEIGHT = 480;
const TICKS = 120;

interface LayoutNode extends SimulationNodeDatum {
  addr: string;
  hop: number;
}

export interface Layout {
  nodes: Map<string, { x: number; y: number }>;
}

export function computeLayout(sg: SubgraphExport): Layout {
  const nodes: LayoutNode[] = sg.nodes.map((n) => ({ addr: n.addr, hop: n.hop }));
  const byAddr = new Map(nodes.map((n) => [n.addr, n]));
  const links: SimulationLinkDatum<LayoutNode>[] = sg.edges.map((e) => ({
    source: byAddr.get(e.from)!,
    target: byAddr.get(e.to)!,
  }));
  const sim = forceSimulation(nodes)
    .force("charge", forceManyBody().strength(-60))
    .force("link", forceLink(links).distance(60))
    .force("center", forceCenter(WIDTH / 2, HEIGHT / 2))
    .stop();
  sim.tick(TICKS);
  return {
    nodes: new Map(nodes.map((n) => [n.addr, { x: n.x ?? 0, y: n.y ?? 0 }])),
  };
}

export function countBadge(sg: SubgraphExport): string {
  const n = sg.nodes.length;
  const truncated = n >= MAX_EXPORT_NODES ? " (truncated)" : "";
  return `${n}${truncated} nodes / ${sg.edges.length} edges`;
}

function validateExport(sg: SubgraphExport): string | null {
  if (!Array.isArray(sg.nodes) || !Array.isArray(sg.edges)) {
    return "malformed export: nodes/edges missing";
  }
  const addrs = new Set(sg.nodes.map((n) => n.addr));
  if (!addrs.has(sg.center)) return "malformed export: center not in node list";
  for (const e of sg.edges) {
    if (!addrs.has(e.from) || !addrs.has(e.to)) {
      return `malformed export: edge ${e.tx_id} references unknown node`;
    }
  }
  return null;
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderSubgraph(container: HTMLElement, sg: SubgraphExport): void {
  container.textContent = "";
  const problem = validateExport(sg);
  if (problem !== null) {
    const err = document.createElement("p");
    err.className = "graph-error";
    err.textContent = problem;
    container.appendChild(err);
    return;
  }

  const badge = document.createElement("p");
  badge.className = "count-badge";
  badge.textContent = countBadge(sg);
  container.appendChild(badge);

  const layout = computeLayout(sg);
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("class", "subgraph");

  for (const e of sg.edges) {
    const a = layout.nodes.get(e.from)!;
    const b = layout.nodes.get(e.to)!;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("class", "edge");
    line.setAttribute("x1", String(a.x));
    line.setAttribute("y1", String(a.y));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y));
    const tip = document.createElementNS(SVG_NS, "title");
    tip.textContent = `${e.tx_id} value=${e.value} ts=${e.timestamp}`;
    line.appendChild(tip);
    svg.appendChild(line);
  }

  for (const n of sg.nodes) {
    const p = layout.nodes.get(n.addr)!;
    const circle = document.createElementNS(SVG_NS, "circle");
    const isCenter = n.addr === sg.center;
    circle.setAttribute("class", isCenter ? "node center" : "node");
    circle.setAttribute("cx", String(p.x));
    circle.setAttribute("cy", String(p.y));
    circle.setAttribute("r", isCenter ? "10" : "6");
    circle.dataset.addr = n.addr;
    circle.dataset.hop = String(n.hop);
    const tip = document.createElementNS(SVG_NS, "title");
    tip.textContent = `${n.addr} (hop ${n.hop})`;
    circle.appendChild(tip);
    svg.appendChild(circle);
  }
  container.appendChild(svg);
}
