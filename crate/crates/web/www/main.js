import init, { levels_scan, ita_line, rabi_trace } from "./pkg/squid_gate_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

function rows(flat, width) {
  const out = [];
  for (let i = 0; i < flat.length; i += width) out.push(Array.from(flat.subarray(i, i + width)));
  return out;
}

// Draws each series as a polyline; `log` plots log10 of the values.
function plot(xs, series, names, { log = false, xlabel = "" } = {}) {
  const c = $("plot");
  const g = c.getContext("2d");
  const [w, h, pad] = [c.width, c.height, 50];
  g.clearRect(0, 0, w, h);
  const tf = (v) => (log ? (v > 0 ? Math.log10(v) : NaN) : v);
  const ys = series.flat().map(tf).filter(Number.isFinite);
  if (ys.length === 0) return;
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y0 === y1) [y0, y1] = [y0 - 1, y1 + 1];
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (y) => h - pad + ((y0 - y) / (y1 - y0)) * (h - 2 * pad);
  g.strokeStyle = "#888";
  g.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  g.fillStyle = "#222";
  g.font = "12px monospace";
  g.fillText(x0.toPrecision(6), pad, h - pad + 16);
  g.fillText(x1.toPrecision(6), w - pad - 60, h - pad + 16);
  g.fillText((log ? "1e" : "") + y1.toPrecision(4), 2, pad + 4);
  g.fillText((log ? "1e" : "") + y0.toPrecision(4), 2, h - pad);
  g.fillText(xlabel, w / 2 - 20, h - 8);
  series.forEach((s, k) => {
    g.strokeStyle = COLORS[k % COLORS.length];
    g.beginPath();
    let pen = false;
    s.forEach((v, i) => {
      const y = tf(v);
      if (!Number.isFinite(y)) { pen = false; return; }
      pen ? g.lineTo(px(xs[i]), py(y)) : g.moveTo(px(xs[i]), py(y));
      pen = true;
    });
    g.stroke();
    g.fillStyle = g.strokeStyle;
    g.fillText(names[k], w - pad + 4, pad + 14 * (k + 1));
  });
}

async function run(label, job) {
  $("status").textContent = `${label}…`;
  await new Promise((r) => setTimeout(r, 20));
  const t0 = performance.now();
  try {
    job();
    $("status").textContent = `${label}: ${((performance.now() - t0) / 1000).toFixed(2)} s`;
  } catch (e) {
    $("status").textContent = `${label} failed: ${e}`;
  }
}

await init();

$("levels").onclick = () =>
  run("level spacings", () => {
    const r = rows(levels_scan(num("beta"), num("xe1"), num("kappa"), num("min"), num("max"), num("count") | 0), 7);
    const names = ["ΔE12", "ΔE13", "ΔE14", "ΔE23", "ΔE24", "ΔE34"];
    plot(r.map((x) => x[0]), names.map((_, k) => r.map((x) => x[k + 1])), names, { xlabel: "x_e2" });
  });

$("ita").onclick = () =>
  run("ITA leakage", () => {
    const r = rows(ita_line(num("beta"), num("xe1"), num("kappa"), num("xm0"), num("min"), num("max"), num("count") | 0), 2);
    plot(r.map((x) => x[0]), [r.map((x) => x[1])], ["η"], { log: true, xlabel: "x_e2" });
  });

$("trace").onclick = () =>
  run("population trace", () => {
    const r = rows(rabi_trace(num("beta"), num("xe1"), num("xe2"), num("kappa"), num("xm0"), parseInt($("initial").value)), 6);
    const names = ["|00⟩", "|01⟩", "|10⟩", "|11⟩", "other"];
    plot(r.map((x) => x[0]), names.map((_, k) => r.map((x) => x[k + 1])), names, { xlabel: "τ" });
  });
