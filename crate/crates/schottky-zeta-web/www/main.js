import init, { dimensionCurve, graphZeros, torusScan } from "./pkg/schottky_zeta_web.js";

const $ = (id) => document.getElementById(id);

function report(id, f) {
  const out = $(id);
  out.classList.remove("error");
  try {
    return f();
  } catch (e) {
    out.textContent = String(e);
    out.classList.add("error");
    return null;
  }
}

// Draws point series on a canvas with linear axes fitted to the data.
function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, width, height);
  const xs = series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = series.flatMap((s) => s.points.map((p) => p[1]));
  if (xs.length === 0) return;
  let [x0, x1] = opts.xRange ?? [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = opts.yRange ?? [Math.min(...ys), Math.max(...ys)];
  if (x1 === x0) { x0 -= 1; x1 += 1; }
  if (y1 === y0) { y0 -= 1; y1 += 1; }
  const sx = (x) => pad + ((x - x0) / (x1 - x0)) * (width - 2 * pad);
  const sy = (y) => height - pad - ((y - y0) / (y1 - y0)) * (height - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);
  if (y0 < 0 && y1 > 0) {
    ctx.beginPath();
    ctx.moveTo(pad, sy(0));
    ctx.lineTo(width - pad, sy(0));
    ctx.stroke();
  }
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.fillText(x0.toPrecision(3), pad, height - pad + 15);
  ctx.fillText(x1.toPrecision(3), width - pad - 30, height - pad + 15);
  ctx.fillText(y0.toPrecision(3), 2, height - pad);
  ctx.fillText(y1.toPrecision(3), 2, pad + 10);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    if (s.line) {
      ctx.beginPath();
      s.points.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
      ctx.stroke();
    } else {
      for (const [x, y, r] of s.points) {
        ctx.beginPath();
        ctx.arc(sx(x), sy(y), r ?? 3, 0, 2 * Math.PI);
        ctx.fill();
      }
    }
  }
}

function runDimension() {
  const res = report("dim-out", () =>
    JSON.parse(dimensionCurve(+$("dim-min").value, +$("dim-max").value, +$("dim-n").value)),
  );
  if (!res) return;
  plot($("dim-plot"), [
    { color: "#c33", line: true, points: res.map((p) => [p.ell, p.main_term]) },
    { color: "#36c", points: res.map((p) => [p.ell, p.dim]) },
  ]);
  $("dim-out").textContent = res
    .map((p) => `l = ${p.ell.toFixed(2)}  dim = ${p.dim.toPrecision(10)}  log4/l = ${p.main_term.toPrecision(10)}`)
    .join("\n");
}

function runGraph() {
  const lengths = new Float64Array($("graph-lengths").value.split(",").map(Number));
  const reMin = +$("graph-re-min").value;
  const reMax = +$("graph-re-max").value;
  const res = report("graph-out", () => JSON.parse(graphZeros($("graph-kind").value, lengths, reMin, reMax)));
  if (!res) return;
  plot(
    $("graph-plot"),
    [{ color: "#36c", points: res.zeros.map(([re, im, m]) => [re, im, 2 + 2 * m]) }],
    { xRange: [reMin, reMax], yRange: [-res.period / 2, res.period / 2] },
  );
  $("graph-out").textContent =
    `period ${res.period.toPrecision(10)}, ${res.zeros.length} distinct zeros\n` +
    res.zeros.map(([re, im, m]) => `${re.toFixed(10)} ${im > -5e-11 ? "+" : "-"} ${Math.abs(im).toFixed(10)}i  (multiplicity ${m})`).join("\n");
}

function runTorus() {
  const res = report("torus-out", () =>
    JSON.parse(torusScan(+$("torus-phi").value, +$("torus-ell").value, +$("torus-smax").value, 400)),
  );
  if (!res) return;
  const series = [{ color: "#36c", line: true, points: res.s.map((s, i) => [s, res.value[i]]) }];
  if (res.first_zero !== null) series.push({ color: "#c33", points: [[res.first_zero, 0, 5]] });
  plot($("torus-plot"), series);
  $("torus-out").textContent =
    res.first_zero === null
      ? "no sign change in the scanned range"
      : `first zero s0 = ${res.first_zero.toPrecision(12)}, dimension estimate ${res.dim_estimate.toPrecision(8)}`;
}

await init();
$("dim-run").addEventListener("click", runDimension);
$("graph-run").addEventListener("click", runGraph);
$("torus-run").addEventListener("click", runTorus);
runGraph();
runTorus();
