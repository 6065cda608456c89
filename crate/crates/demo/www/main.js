import init, { pushforward, choquet, eval as evaluate } from "./pkg/valuations_demo.js";

const SVG = "http://www.w3.org/2000/svg";
const COLORS = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f"];

const $ = (id) => document.getElementById(id);

function num(pq) {
  const [p, q] = pq.split("/");
  return Number(p) / (q === undefined ? 1 : Number(q));
}

function el(name, attrs, text) {
  const node = document.createElementNS(SVG, name);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function clear(svg) {
  while (svg.firstChild) svg.removeChild(svg.firstChild);
}

function call(fn, ...args) {
  const result = JSON.parse(fn(...args));
  if (result.error) throw new Error(result.error);
  return result;
}

function show(id, text, isError = false) {
  const out = $(id);
  out.textContent = text;
  out.classList.toggle("error", isError);
}

function frame(svg, pad) {
  const w = Number(svg.getAttribute("width"));
  const h = Number(svg.getAttribute("height"));
  const x = (t) => pad + t * (w - 2 * pad);
  const y = (v) => h - pad - v * (h - 2 * pad);
  svg.appendChild(el("line", { x1: x(0), y1: y(0), x2: x(1), y2: y(0), stroke: "#888" }));
  svg.appendChild(el("line", { x1: x(0), y1: y(0), x2: x(0), y2: y(1), stroke: "#888" }));
  svg.appendChild(el("text", { x: x(0) - 4, y: y(0) + 14 }, "0"));
  svg.appendChild(el("text", { x: x(1) - 4, y: y(0) + 14 }, "1"));
  svg.appendChild(el("text", { x: x(0) - 16, y: y(1) + 4 }, "1"));
  return { x, y };
}

function runPushforward() {
  const svg = $("pf-plot");
  clear(svg);
  try {
    const r = call(pushforward, $("doc").value, $("pf-cdf").value, $("pf-map").value);
    const { x, y } = frame(svg, 30);
    const color = (e) => COLORS[r.elements.indexOf(e) % COLORS.length];
    for (const cell of r.cells) {
      const x0 = x(num(cell.from));
      const x1 = x(num(cell.to));
      svg.appendChild(el("rect", { x: x0, y: y(0) + 2, width: x1 - x0, height: 10, fill: color(cell.element) }));
    }
    let path = "";
    r.cdf.forEach(([px, left, right], k) => {
      path += `${k === 0 ? "M" : "L"}${x(num(px))},${y(num(left))} L${x(num(px))},${y(num(right))} `;
    });
    svg.appendChild(el("path", { d: path, fill: "none", stroke: "#222", "stroke-width": 2 }));
    r.elements.forEach((e, k) => {
      svg.appendChild(el("rect", { x: x(1) - 90, y: 10 + 14 * k, width: 10, height: 10, fill: color(e) }));
      svg.appendChild(el("text", { x: x(1) - 75, y: 19 + 14 * k }, e));
    });
    const lines = r.cells.map((c) => `[${c.from}, ${c.to}) -> ${c.element}   mass ${c.mass}`);
    show("pf-out", `${r.text}\n\n${lines.join("\n")}`);
  } catch (e) {
    show("pf-out", e.message, true);
  }
}

function runChoquet() {
  const svg = $("ch-plot");
  clear(svg);
  try {
    const r = call(choquet, $("doc").value, $("ch-val").value, $("ch-fn").value);
    const { x, y } = frame(svg, 30);
    for (const s of r.steps) {
      const x0 = x(num(s.from));
      const x1 = x(num(s.to));
      const top = y(num(s.mass));
      svg.appendChild(el("rect", { x: x0, y: top, width: x1 - x0, height: y(0) - top, fill: "#4e79a7", "fill-opacity": 0.35, stroke: "#4e79a7" }));
      svg.appendChild(el("text", { x: (x0 + x1) / 2 - 10, y: top - 4 }, s.mass));
    }
    svg.appendChild(el("text", { x: x(0.5) - 40, y: y(0) + 24 }, "threshold t"));
    const verdict = r.equal ? "==" : "!=";
    show("ch-out", `weighted sum ${r.closed_form} ${verdict} shaded area ${r.oracle}`);
  } catch (e) {
    show("ch-out", e.message, true);
  }
}

function runEval() {
  try {
    const r = call(evaluate, $("doc").value, $("prog").value);
    show("ev-out", `${r.text}\nmass ${r.valuation.mass}`);
  } catch (e) {
    show("ev-out", e.message, true);
  }
}

await init();
$("pf-run").addEventListener("click", runPushforward);
$("ch-run").addEventListener("click", runChoquet);
$("ev-run").addEventListener("click", runEval);
runPushforward();
runChoquet();
runEval();
