import init, { Demo } from "./pkg/sublevy_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
let demo = null;

function status(msg) {
  $("status").textContent = msg || "";
}

// Line plot of several series sharing an x axis; series = [{ ys, color }].
function plot(canvas, xs, series) {
  const g = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 30;
  g.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => s.ys).filter(Number.isFinite);
  let lo = Math.min(0, ...all), hi = Math.max(0, ...all);
  if (hi === lo) hi = lo + 1;
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - lo) / (hi - lo)) * (h - 2 * pad);
  g.strokeStyle = "#999";
  g.beginPath();
  g.moveTo(pad, py(0));
  g.lineTo(w - pad, py(0));
  g.stroke();
  g.fillStyle = "#555";
  g.fillText(hi.toPrecision(3), 2, pad - 4);
  g.fillText(lo.toPrecision(3), 2, h - pad + 12);
  g.fillText(x1.toPrecision(3), w - pad - 20, h - 6);
  for (const s of series) {
    g.strokeStyle = s.color;
    g.beginPath();
    s.ys.forEach((y, i) => (i ? g.lineTo(px(xs[i]), py(y)) : g.moveTo(px(xs[i]), py(y))));
    g.stroke();
  }
}

function bars(canvas, lo, hi, counts) {
  const g = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 30;
  g.clearRect(0, 0, w, h);
  const top = Math.max(...counts, 1);
  const bw = (w - 2 * pad) / counts.length;
  g.fillStyle = "#1f77b4";
  counts.forEach((c, i) => {
    const bh = (c / top) * (h - 2 * pad);
    g.fillRect(pad + i * bw, h - pad - bh, Math.max(bw - 1, 1), bh);
  });
  g.fillStyle = "#555";
  g.fillText(lo.toPrecision(3), pad, h - 8);
  g.fillText(hi.toPrecision(3), w - pad - 30, h - 8);
}

function rebuild() {
  try {
    demo?.free();
    demo = new Demo($("family").value, num("p1"), num("p2"), num("b1"), num("b2"), num("q1"), num("q2"));
    $("class").textContent = demo.classification();
    status();
    drawCurve();
  } catch (e) {
    demo = null;
    $("class").textContent = "";
    status(String(e));
  }
}

function drawCurve() {
  if (!demo) return;
  try {
    const c = demo.exponent_curve(num("angle"), num("rmax"), 200);
    const xs = [], re = [], im = [];
    for (let i = 0; i < c.length; i += 3) {
      xs.push(c[i]);
      re.push(c[i + 1]);
      im.push(c[i + 2]);
    }
    plot($("curve"), xs, [{ ys: re, color: "#1f77b4" }, { ys: im, color: "#d62728" }]);
  } catch (e) {
    status(String(e));
  }
}

function drawHistogram() {
  if (!demo) return;
  try {
    const h = demo.projection_histogram(num("angle"), num("t"), num("n"), 60, BigInt(num("seed")));
    bars($("hist"), h[0], h[1], Array.from(h.slice(2)));
  } catch (e) {
    status(String(e));
  }
}

function drawPath() {
  if (!demo) return;
  try {
    const p = demo.sample_path(num("tmax"), num("steps"), BigInt(num("seed")));
    const ts = [], x1 = [], x2 = [];
    for (let i = 0; i < p.length; i += 3) {
      ts.push(p[i]);
      x1.push(p[i + 1]);
      x2.push(p[i + 2]);
    }
    plot($("path"), ts, [{ ys: x1, color: "#1f77b4" }, { ys: x2, color: "#2ca02c" }]);
  } catch (e) {
    status(String(e));
  }
}

await init();
for (const id of ["family", "p1", "p2", "b1", "b2", "q1", "q2"]) $(id).addEventListener("change", rebuild);
$("angle").addEventListener("input", drawCurve);
$("rmax").addEventListener("change", drawCurve);
$("hist-run").addEventListener("click", drawHistogram);
$("path-run").addEventListener("click", drawPath);
rebuild();
drawHistogram();
drawPath();
