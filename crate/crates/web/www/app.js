import init, { bands, stretch_factors, kernel, kernel_constant } from "./pkg/dirac_floquet_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);
const vec = (id) => $(id).value.split(",").map((s) => parseFloat(s));

function plot(canvas, series) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.x), ys = series.flatMap((s) => s.y).filter(Number.isFinite);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-12) { y0 -= 1; y1 += 1; }
  const px = (x) => pad + (x - x0) / (x1 - x0 || 1) * (w - 2 * pad);
  const py = (y) => h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad);
  ctx.strokeStyle = "#999"; ctx.lineWidth = 1;
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#555"; ctx.font = "11px sans-serif";
  ctx.fillText(x0.toFixed(2), pad, h - pad + 14);
  ctx.fillText(x1.toFixed(2), w - pad - 30, h - pad + 14);
  ctx.fillText(y1.toFixed(2), 2, pad + 4);
  ctx.fillText(y0.toFixed(2), 2, h - pad);
  if (y0 < 0 && y1 > 0) {
    ctx.strokeStyle = "#ddd"; ctx.beginPath();
    ctx.moveTo(pad, py(0)); ctx.lineTo(w - pad, py(0)); ctx.stroke();
  }
  for (const s of series) {
    ctx.strokeStyle = ctx.fillStyle = s.color;
    if (s.dots) {
      s.x.forEach((x, i) => { ctx.beginPath(); ctx.arc(px(x), py(s.y[i]), 2.2, 0, 2 * Math.PI); ctx.fill(); });
    } else {
      ctx.lineWidth = 1.4; ctx.beginPath();
      s.x.forEach((x, i) => (i ? ctx.lineTo(px(x), py(s.y[i])) : ctx.moveTo(px(x), py(s.y[i]))));
      ctx.stroke();
    }
  }
}

function guarded(note, f) {
  return () => {
    try { f(); if (note) note.classList.remove("err"); }
    catch (e) { if (note) { note.textContent = String(e); note.classList.add("err"); } }
  };
}

const runBands = guarded($("b-note"), () => {
  const out = JSON.parse(bands(num("b-mass"), num("b-v"), Math.round(num("b-n")), num("b-cut"), 8));
  const palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
  plot($("b-plot"), out.bands.map((b, i) => ({ x: out.xi, y: b, color: palette[i % palette.length] })));
  $("b-note").textContent = `${out.modes} Fourier modes, ${out.bands.length} bands shown.`;
});

const runStretch = guarded(null, () => {
  const out = JSON.parse(stretch_factors(vec("g-k"), vec("g-e"), vec("g-m").map(Math.round), num("g-kmax"), 80));
  plot($("g-plot"), [
    { x: out.kappa, y: out.g_minus, color: "#1f77b4" },
    { x: out.kappa, y: out.g_plus, color: "#d62728" },
    { x: out.kappa, y: out.sigma_min, color: "#1f77b4", dots: true },
    { x: out.kappa, y: out.sigma_max, color: "#d62728", dots: true },
  ]);
});

const runKernel = guarded($("k-note"), () => {
  const out = JSON.parse(kernel(num("k-scale"), num("k-rmax"), 400));
  plot($("k-plot"), [{ x: out.r, y: out.g, color: "#2ca02c" }]);
});

const runConstant = guarded($("k-note"), () => {
  const r = JSON.parse(kernel_constant(num("k-scale")));
  $("k-note").textContent =
    `C = ${r.constant.toPrecision(10)}, ‖g‖₁ = ${r.l1_norm.toPrecision(10)}, ` +
    `second route ${r.cross_check_l1.toPrecision(10)} (relative gap ${r.cross_check_residual.toExponential(1)}), ` +
    `truncated at r = ${r.truncation_radius}`;
});

await init();
$("status").textContent = "ready";
$("b-run").onclick = runBands;
$("g-run").onclick = runStretch;
$("k-run").onclick = runKernel;
$("k-const").onclick = runConstant;
runBands(); runStretch(); runKernel();
