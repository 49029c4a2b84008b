import init, { mlePath, escapeCurve, traceSumCurves } from "./pkg/asgld_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// series: [{xs, ys, color}]; log flags transform the axes.
function plot(canvas, series, { logX = false, logY = false, hline = null } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 50;
  ctx.clearRect(0, 0, W, H);
  const tx = (v) => (logX ? Math.log10(v) : v);
  const ty = (v) => (logY ? Math.log10(v) : v);
  let x0 = Infinity, x1 = -Infinity, y0 = Infinity, y1 = -Infinity;
  for (const s of series) {
    s.xs.forEach((x, i) => {
      const X = tx(x), Y = ty(s.ys[i]);
      if (!isFinite(X) || !isFinite(Y)) return;
      x0 = Math.min(x0, X); x1 = Math.max(x1, X);
      y0 = Math.min(y0, Y); y1 = Math.max(y1, Y);
    });
  }
  if (hline !== null) { y0 = Math.min(y0, hline); y1 = Math.max(y1, hline); }
  if (!isFinite(x0)) return;
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const px = (X) => pad + ((X - x0) / (x1 - x0)) * (W - 2 * pad);
  const py = (Y) => H - pad + ((Y - y0) / (y1 - y0)) * (2 * pad - H);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  const fmt = (v, log) => (log ? "1e" + v.toFixed(1) : Math.abs(v) >= 1e4 ? v.toExponential(1) : +v.toPrecision(3));
  for (let i = 0; i <= 4; i++) {
    const X = x0 + (i / 4) * (x1 - x0), Y = y0 + (i / 4) * (y1 - y0);
    ctx.fillText(fmt(X, logX), px(X) - 12, H - pad + 14);
    ctx.fillText(fmt(Y, logY), 4, py(Y) + 4);
  }
  if (hline !== null) {
    ctx.strokeStyle = "#aaa";
    ctx.setLineDash([4, 4]);
    ctx.beginPath(); ctx.moveTo(pad, py(hline)); ctx.lineTo(W - pad, py(hline)); ctx.stroke();
    ctx.setLineDash([]);
  }
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    let started = false;
    s.xs.forEach((x, i) => {
      const X = tx(x), Y = ty(s.ys[i]);
      if (!isFinite(X) || !isFinite(Y)) { started = false; return; }
      if (started) ctx.lineTo(px(X), py(Y)); else ctx.moveTo(px(X), py(Y));
      started = true;
    });
    ctx.stroke();
  }
}

function legend(el, names) {
  el.innerHTML = names.map((n, i) => `<span style="color:${COLORS[i % COLORS.length]}">■ ${n}</span>`).join("");
}

function guarded(msgId, fn) {
  return () => {
    $(msgId).textContent = "";
    try { fn(); } catch (e) { $(msgId).textContent = String(e.message ?? e); }
  };
}

function runMle() {
  const methods = [...$("mle-methods").selectedOptions].map((o) => o.value);
  const steps = num("mle-steps");
  const every = Math.max(1, Math.floor(steps / 500));
  const series = methods.map((m, i) => {
    const rows = mlePath(m, num("mle-eta"), num("mle-s2"), num("mle-delta"), num("mle-b"), steps, every, num("mle-seed"));
    const xs = [], ys = [];
    for (let j = 0; j < rows.length; j += 4) { xs.push(rows[j]); ys.push(rows[j + 3]); }
    return { xs, ys, color: COLORS[i % COLORS.length] };
  });
  legend($("mle-legend"), methods);
  plot($("mle-plot"), series, { logY: true });
}

function runEscape() {
  const thr = num("esc-thr");
  const f = escapeCurve($("esc-method").value, num("esc-d"), num("esc-eta"), num("esc-s2"),
    num("esc-delta"), num("esc-noise"), thr, num("esc-steps"), num("esc-seed"));
  const k = f[f.length - 1];
  const ys = Array.from(f.slice(0, -1));
  $("esc-out").textContent = k >= 0 ? `escaped at step ${k}` : "no escape within the budget";
  const cut = k >= 0 ? Math.min(ys.length, Math.ceil(k * 1.5) + 5) : ys.length;
  plot($("esc-plot"), [{ xs: ys.slice(0, cut).map((_, i) => i), ys: ys.slice(0, cut), color: COLORS[0] }], { hline: -thr });
}

function runTraceSums() {
  const steps = num("ts-steps");
  const s = traceSumCurves(num("ts-eta"), num("ts-delta"), steps, num("ts-seeds"));
  const ks = Array.from({ length: steps }, (_, i) => i + 1);
  const names = ["φ = 0.5", "φ = 1", "φ = 2"];
  legend($("ts-legend"), names);
  plot($("ts-plot"), names.map((_, b) => ({ xs: ks, ys: Array.from(s.slice(b * steps, (b + 1) * steps)), color: COLORS[b] })), { logX: true, logY: true });
}

await init();
$("status").textContent = "ready";
$("mle-run").onclick = guarded("mle-msg", runMle);
$("esc-run").onclick = guarded("esc-msg", runEscape);
$("ts-run").onclick = guarded("ts-msg", runTraceSums);
