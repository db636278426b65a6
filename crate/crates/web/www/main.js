import init, { halpern_run, resolvent_vs_projection, geodesic } from "./pkg/halpern_web.js";

const sph = (theta, phi) => [Math.sin(theta) * Math.cos(phi), Math.sin(theta) * Math.sin(phi), Math.cos(theta)];

const defaultConfig = {
  schema: 1,
  space: { kind: "unit_sphere", dim: 2 },
  mappings: [0, 1, 2].map((k) => ({ kind: "cap_projection", center: sph(0.35, (k * 2 * Math.PI) / 3), radius: 0.5 })),
  alpha: { kind: "constant", values: [0.5, 0.5, 0.5], a: 0.4 },
  beta: { kind: "power_law", q: 0.5 },
  u: sph(0.6, Math.PI / 3),
  x1: sph(0.6, Math.PI),
  max_iters: 200000,
  stop_tolerance: 5e-3,
  oracle: {},
  seed: 1,
};

const canvas = document.getElementById("view");
const ctx = canvas.getContext("2d");
const out = document.getElementById("out");
const hint = document.getElementById("hint");
const configBox = document.getElementById("config");
configBox.value = JSON.stringify(defaultConfig, null, 2);

const R = 240;
const cx = canvas.width / 2;
const cy = canvas.height / 2;
let yaw = 0.4;
let pitch = 0.6;

const fixedCap = { center: [0, 0, 1], radius: 0.5 };
let mode = "run";
let picture = { caps: [], curves: [], dots: [] };
let geodesicEnds = [];

function rotate([x, y, z]) {
  const x1 = Math.cos(yaw) * x - Math.sin(yaw) * y;
  const y1 = Math.sin(yaw) * x + Math.cos(yaw) * y;
  const y2 = Math.cos(pitch) * y1 - Math.sin(pitch) * z;
  const z2 = Math.sin(pitch) * y1 + Math.cos(pitch) * z;
  return [x1, y2, z2];
}

function project(p) {
  const [x, depth, z] = rotate(p);
  return { sx: cx + R * x, sy: cy - R * z, visible: depth <= 0 };
}

function unproject(sx, sy) {
  const x1 = (sx - cx) / R;
  const z2 = -(sy - cy) / R;
  const rr = x1 * x1 + z2 * z2;
  if (rr > 1) return null;
  const y2 = -Math.sqrt(1 - rr);
  const y1 = Math.cos(pitch) * y2 + Math.sin(pitch) * z2;
  const z = -Math.sin(pitch) * y2 + Math.cos(pitch) * z2;
  return [Math.cos(yaw) * x1 + Math.sin(yaw) * y1, -Math.sin(yaw) * x1 + Math.cos(yaw) * y1, z];
}

function capCircle({ center, radius }) {
  const c = center.map((v) => v / Math.hypot(...center));
  const a = Math.abs(c[0]) < 0.9 ? [1, 0, 0] : [0, 1, 0];
  const dot = a[0] * c[0] + a[1] * c[1] + a[2] * c[2];
  let e1 = a.map((v, i) => v - dot * c[i]);
  e1 = e1.map((v) => v / Math.hypot(...e1));
  const e2 = [c[1] * e1[2] - c[2] * e1[1], c[2] * e1[0] - c[0] * e1[2], c[0] * e1[1] - c[1] * e1[0]];
  const pts = [];
  for (let i = 0; i <= 120; i++) {
    const phi = (i / 120) * 2 * Math.PI;
    pts.push(c.map((v, k) => Math.cos(radius) * v + Math.sin(radius) * (Math.cos(phi) * e1[k] + Math.sin(phi) * e2[k])));
  }
  return pts;
}

function strokePath(pts, color, width = 1.5) {
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  let pen = false;
  for (const p of pts) {
    const q = project(p);
    if (!q.visible) {
      pen = false;
      continue;
    }
    if (pen) ctx.lineTo(q.sx, q.sy);
    else ctx.moveTo(q.sx, q.sy);
    pen = true;
  }
  ctx.stroke();
}

function dot(p, color, size = 4) {
  const q = project(p);
  ctx.fillStyle = color;
  ctx.globalAlpha = q.visible ? 1 : 0.25;
  ctx.beginPath();
  ctx.arc(q.sx, q.sy, size, 0, 2 * Math.PI);
  ctx.fill();
  ctx.globalAlpha = 1;
}

function draw() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#fafafa";
  ctx.beginPath();
  ctx.arc(cx, cy, R, 0, 2 * Math.PI);
  ctx.fill();
  ctx.strokeStyle = "#999";
  ctx.lineWidth = 1;
  ctx.stroke();
  for (let k = 1; k < 6; k++) strokePath(capCircle({ center: [0, 0, 1], radius: (k * Math.PI) / 6 }), "#e4e4e4", 1);
  for (const cap of picture.caps) strokePath(capCircle(cap), "#888");
  for (const c of picture.curves) strokePath(c.points, c.color, 2);
  for (const d of picture.dots) dot(d.p, d.color, d.size);
}

function show(obj) {
  out.textContent = typeof obj === "string" ? obj : JSON.stringify(obj, null, 2);
}

function fmt(v) {
  return typeof v === "number" ? v.toExponential(3) : String(v);
}

function runHalpern() {
  let cfg;
  try {
    cfg = JSON.parse(configBox.value);
  } catch (e) {
    show(`config is not JSON: ${e.message}`);
    return;
  }
  try {
    const view = JSON.parse(halpern_run(configBox.value, 2000));
    const s = view.summary;
    picture = {
      caps: cfg.mappings.filter((m) => m.kind === "cap_projection"),
      curves: [{ points: view.path, color: "#37c" }],
      dots: [
        { p: cfg.u, color: "#c33", size: 5 },
        { p: view.path[view.path.length - 1], color: "#37c", size: 4 },
      ],
    };
    if (s.oracle) picture.dots.push({ p: s.oracle.point, color: "#090", size: 5 });
    show({
      stop_reason: s.stop_reason,
      iterations: s.iterations,
      final_d_oracle: fmt(s.final_d_oracle),
      oracle_method: s.oracle && s.oracle.method,
      min_lyapunov_slack: s.monitor && fmt(s.monitor.min_lyapunov_slack),
      conditions: s.conditions,
    });
  } catch (e) {
    show(`error: ${e.message ?? e}`);
  }
  draw();
}

function clickResolvent(x) {
  try {
    const v = JSON.parse(resolvent_vs_projection(fixedCap.center, fixedCap.radius, x));
    picture = {
      caps: [fixedCap],
      curves: [],
      dots: [
        { p: x, color: "#c33", size: 5 },
        { p: v.projection, color: "#090", size: 7 },
        { p: v.tansin, color: "#a0a", size: 4 },
        { p: v.logcos, color: "#a0a", size: 2 },
      ],
    };
    show({ tansin_error: fmt(v.tansin_error), logcos_error: fmt(v.logcos_error) });
  } catch (e) {
    show(`error: ${e.message ?? e}`);
  }
  draw();
}

function clickGeodesic(x) {
  geodesicEnds = geodesicEnds.length >= 2 ? [x] : [...geodesicEnds, x];
  picture = { caps: [], curves: [], dots: geodesicEnds.map((p) => ({ p, color: "#c33", size: 5 })) };
  if (geodesicEnds.length === 2) {
    try {
      const v = JSON.parse(geodesic(geodesicEnds[0], geodesicEnds[1], [0, 0, 1], 64));
      picture.curves.push({ points: v.points, color: "#37c" });
      picture.dots.push({ p: v.midpoint, color: "#090", size: 5 });
      show({ distance: v.distance, comparison_residual_vs_north_pole: fmt(v.comparison_residual) });
    } catch (e) {
      show(`error: ${e.message ?? e}`);
    }
  }
  draw();
}

const hints = {
  run: "Edit the config and press Run.",
  resolvent: "Click a point: both resolvents of the indicator of the drawn cap are compared with its projection.",
  geodesic: "Click two points to draw the geodesic between them.",
};

for (const r of document.querySelectorAll("input[name=mode]")) {
  r.addEventListener("change", () => {
    mode = r.value;
    hint.textContent = hints[mode];
    document.getElementById("run-panel").style.display = mode === "run" ? "" : "none";
    picture = { caps: mode === "resolvent" ? [fixedCap] : [], curves: [], dots: [] };
    geodesicEnds = [];
    show("");
    draw();
  });
}

let drag = null;
canvas.addEventListener("mousedown", (e) => {
  drag = { x: e.offsetX, y: e.offsetY, yaw, pitch, moved: false };
});
canvas.addEventListener("mousemove", (e) => {
  if (!drag) return;
  const dx = e.offsetX - drag.x;
  const dy = e.offsetY - drag.y;
  if (Math.abs(dx) + Math.abs(dy) > 3) drag.moved = true;
  yaw = drag.yaw + dx * 0.01;
  pitch = Math.max(-1.5, Math.min(1.5, drag.pitch + dy * 0.01));
  draw();
});
canvas.addEventListener("mouseup", (e) => {
  const wasDrag = drag && drag.moved;
  drag = null;
  if (wasDrag) return;
  const p = unproject(e.offsetX, e.offsetY);
  if (!p) return;
  if (mode === "resolvent") clickResolvent(p);
  else if (mode === "geodesic") clickGeodesic(p);
});
document.getElementById("run").addEventListener("click", runHalpern);

await init();
hint.textContent = hints.run;
draw();
