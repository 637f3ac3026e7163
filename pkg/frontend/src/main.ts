/**
 * Browser companion: pick a model/dataset image, paint a region mask at
 * native resolution (zoom is display-only), configure the constraint,
 * launch attacks and inspect results and importance overlays.
 */

import { ApiClient, ConstraintBody, JobStatus, RegionBox } from "./api.js";
import { MaskBitmap, fromBase64, toBase64 } from "./mask.js";
import { decodePng } from "./png.js";

const ZOOM = 10;
const api = new ApiClient("");

interface Session {
  model: string;
  dataset: string;
  index: number;
  width: number;
  height: number;
  mask: MaskBitmap;
  imagePixels: Uint8Array | null;
  imageChannels: number;
  label: number;
  prediction: number;
  tool: "rectangle" | "brush" | "erase";
  brushRadius: number;
  overlay: { png: Uint8Array; regions: RegionBox[] } | null;
  jobs: string[];
}

const state: Session = {
  model: "", dataset: "", index: 0, width: 28, height: 28,
  mask: new MaskBitmap(28, 28), imagePixels: null, imageChannels: 1,
  label: -1, prediction: -1, tool: "rectangle", brushRadius: 1.5,
  overlay: null, jobs: [],
};

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function canvasCoords(canvas: HTMLCanvasElement, event: PointerEvent):
    [number, number] {
  const rect = canvas.getBoundingClientRect();
  return [((event.clientX - rect.left) / rect.width) * state.width,
          ((event.clientY - rect.top) / rect.height) * state.height];
}

function drawImageLayer(): void {
  const canvas = el<HTMLCanvasElement>("image-canvas");
  const ctx = canvas.getContext("2d")!;
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!state.imagePixels) return;
  const image = ctx.createImageData(state.width, state.height);
  for (let i = 0; i < state.width * state.height; i++) {
    const c = state.imageChannels;
    image.data[i * 4] = state.imagePixels[i * c];
    image.data[i * 4 + 1] = state.imagePixels[i * c + (c > 1 ? 1 : 0)];
    image.data[i * 4 + 2] = state.imagePixels[i * c + (c > 1 ? 2 : 0)];
    image.data[i * 4 + 3] = 255;
  }
  const off = new OffscreenCanvas(state.width, state.height);
  off.getContext("2d")!.putImageData(image, 0, 0);
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
  if (state.overlay) drawOverlay(ctx);
}

function drawOverlay(ctx: CanvasRenderingContext2D): void {
  if (!state.overlay) return;
  decodePng(state.overlay.png).then((heat) => {
    const image = ctx.createImageData(state.width, state.height);
    for (let i = 0; i < state.width * state.height; i++) {
      const v = heat.pixels[i * heat.channels];
      image.data[i * 4] = 255;
      image.data[i * 4 + 1] = 64;
      image.data[i * 4 + 2] = 0;
      image.data[i * 4 + 3] = Math.round(v * 0.6);
    }
    const off = new OffscreenCanvas(state.width, state.height);
    off.getContext("2d")!.putImageData(image, 0, 0);
    ctx.drawImage(off, 0, 0, state.width * ZOOM, state.height * ZOOM);
    ctx.strokeStyle = "#00e0ff";
    ctx.lineWidth = 2;
    for (const region of state.overlay!.regions) {
      ctx.strokeRect(region.col * ZOOM, region.row * ZOOM,
                     region.width * ZOOM, region.height * ZOOM);
    }
  });
}

function drawMaskLayer(): void {
  const canvas = el<HTMLCanvasElement>("mask-canvas");
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "rgba(64, 220, 64, 0.45)";
  for (let y = 0; y < state.height; y++) {
    for (let x = 0; x < state.width; x++) {
      if (state.mask.get(x, y)) {
        ctx.fillRect(x * ZOOM, y * ZOOM, ZOOM, ZOOM);
      }
    }
  }
  el<HTMLSpanElement>("mask-count").textContent =
    `${state.mask.count()} pixels selected`;
}

async function loadImage(): Promise<void> {
  const doc = await api.getImage(state.dataset, state.index, state.model);
  const decoded = await decodePng(fromBase64(doc.png));
  state.width = decoded.width;
  state.height = decoded.height;
  state.imagePixels = decoded.pixels;
  state.imageChannels = decoded.channels;
  state.label = doc.label;
  state.prediction = doc.prediction;
  if (state.mask.width !== decoded.width || state.mask.height !== decoded.height) {
    state.mask = new MaskBitmap(decoded.width, decoded.height);
  }
  for (const id of ["image-canvas", "mask-canvas"]) {
    const canvas = el<HTMLCanvasElement>(id);
    canvas.width = state.width * ZOOM;
    canvas.height = state.height * ZOOM;
  }
  el<HTMLSpanElement>("image-meta").textContent =
    `label ${doc.label}, predicted ${doc.prediction}`;
  state.overlay = null;
  drawImageLayer();
  drawMaskLayer();
}

function wireMaskTools(): void {
  const canvas = el<HTMLCanvasElement>("mask-canvas");
  let dragStart: [number, number] | null = null;
  let stroke: Array<[number, number]> = [];
  let preview: MaskBitmap | null = null;

  canvas.addEventListener("pointerdown", (event) => {
    canvas.setPointerCapture(event.pointerId);
    const at = canvasCoords(canvas, event);
    if (state.tool === "rectangle") {
      dragStart = at;
      preview = state.mask.clone();
    } else {
      stroke = [at];
      state.mask.brush(stroke, state.brushRadius, state.tool === "erase");
      drawMaskLayer();
    }
  });
  canvas.addEventListener("pointermove", (event) => {
    if (!(event.buttons & 1)) return;
    const at = canvasCoords(canvas, event);
    if (state.tool === "rectangle" && dragStart && preview) {
      state.mask.data.set(preview.data);
      state.mask.paintRect(dragStart[0], dragStart[1], at[0], at[1]);
      drawMaskLayer();
    } else if (state.tool !== "rectangle" && stroke.length) {
      stroke.push(at);
      state.mask.brush(stroke.slice(-2), state.brushRadius,
                       state.tool === "erase");
      drawMaskLayer();
    }
  });
  canvas.addEventListener("pointerup", () => {
    dragStart = null;
    preview = null;
    stroke = [];
  });

  for (const tool of ["rectangle", "brush", "erase"] as const) {
    el<HTMLButtonElement>(`tool-${tool}`).addEventListener("click", () => {
      state.tool = tool;
      for (const other of ["rectangle", "brush", "erase"]) {
        el(`tool-${other}`).classList.toggle("active", other === tool);
      }
    });
  }
  el<HTMLButtonElement>("tool-clear").addEventListener("click", () => {
    state.mask.clear();
    drawMaskLayer();
  });
  el<HTMLInputElement>("brush-radius").addEventListener("input", (event) => {
    state.brushRadius = Number((event.target as HTMLInputElement).value);
  });
}

function constraintFromForm(): ConstraintBody {
  const kind = el<HTMLSelectElement>("constraint-kind").value as
    ConstraintBody["kind"];
  const eps = Number(el<HTMLInputElement>("eps").value);
  const body: ConstraintBody = { kind };
  if (kind === "uniform" || kind === "region") body.eps = eps;
  if (kind === "ratio") {
    body.ratio = Number(el<HTMLInputElement>("ratio").value);
    if (eps > 0) body.eps = eps;
  }
  if (kind === "imperceptible") {
    body.adaptive = el<HTMLInputElement>("adaptive").checked;
  }
  return body;
}

async function renderResult(status: JobStatus): Promise<void> {
  const panel = el<HTMLDivElement>("results");
  if (status.status === "failed") {
    panel.innerHTML = `<p class="error">job failed: ${status.error}</p>`;
    return;
  }
  const report = status.report!;
  if (!report.success) {
    panel.innerHTML =
      `<p class="error">no adversarial example found ` +
      `(${report.iterations.deepfool} search iterations)</p>`;
    return;
  }
  panel.innerHTML = "";
  for (const name of ["clean", "adversarial", "delta"]) {
    const url = status.images![name];
    const figure = document.createElement("figure");
    const img = document.createElement("img");
    img.src = url;
    img.width = state.width * 6;
    img.style.imageRendering = "pixelated";
    const caption = document.createElement("figcaption");
    caption.textContent = name;
    figure.append(img, caption);
    panel.append(figure);
  }
  const norms = report.norms!;
  const table = document.createElement("p");
  table.className = "metrics";
  table.textContent =
    `linf ${norms.linf.toFixed(5)} | l2 ${norms.l2.toFixed(3)} | ` +
    `l0 ${norms.l0} | ssim ${report.ssim!.toFixed(4)}` +
    (report.ciede2000 !== null
      ? ` | ciede2000 ${report.ciede2000.toFixed(2)}` : "") +
    ` | iters ${report.iterations.deepfool}+${report.iterations.bb}` +
    (status.wall_ms !== undefined ? ` | ${Math.round(status.wall_ms)} ms` : "");
  panel.append(table);
}

async function launchAttack(): Promise<void> {
  const statusLine = el<HTMLParagraphElement>("status-line");
  try {
    const constraint = constraintFromForm();
    if (constraint.kind === "region") {
      if (state.mask.count() === 0) {
        statusLine.textContent = "paint a region first";
        return;
      }
      constraint.mask = toBase64(await state.mask.toPng());
    }
    const jobId = await api.submitAttack({
      model: state.model, dataset: state.dataset, index: state.index,
      constraint, seed: Number(el<HTMLInputElement>("seed").value) || 0,
    });
    state.jobs.push(jobId);
    statusLine.textContent = `job ${jobId} running...`;
    const done = await api.pollJob(jobId);
    statusLine.textContent = `job ${jobId}: ${done.status}`;
    await renderResult(done);
  } catch (error) {
    statusLine.textContent = `error: ${error}`;
  }
}

async function toggleImportance(): Promise<void> {
  const statusLine = el<HTMLParagraphElement>("status-line");
  if (state.overlay) {
    state.overlay = null;
    drawImageLayer();
    return;
  }
  try {
    statusLine.textContent = "computing importance map...";
    const doc = await api.importance({
      model: state.model, dataset: state.dataset, index: state.index,
      window: { h: 10, w: 10 }, k: 3,
    });
    state.overlay = { png: fromBase64(doc.png), regions: doc.regions };
    statusLine.textContent =
      `importance ready; best window at (${doc.regions[0].row}, ` +
      `${doc.regions[0].col})`;
    drawImageLayer();
  } catch (error) {
    statusLine.textContent = `error: ${error}`;
  }
}

async function boot(): Promise<void> {
  const models = await api.listModels();
  const datasets = await api.listDatasets();
  const modelSelect = el<HTMLSelectElement>("model");
  const datasetSelect = el<HTMLSelectElement>("dataset");
  for (const name of Object.keys(models)) {
    modelSelect.add(new Option(name, name));
  }
  for (const name of Object.keys(datasets)) {
    datasetSelect.add(new Option(name, name));
  }
  state.model = modelSelect.value;
  state.dataset = datasetSelect.value;
  modelSelect.addEventListener("change", () => {
    state.model = modelSelect.value;
    loadImage();
  });
  datasetSelect.addEventListener("change", () => {
    state.dataset = datasetSelect.value;
    loadImage();
  });
  el<HTMLInputElement>("index").addEventListener("change", (event) => {
    state.index = Number((event.target as HTMLInputElement).value) || 0;
    loadImage();
  });
  el<HTMLButtonElement>("submit").addEventListener("click", launchAttack);
  el<HTMLButtonElement>("importance").addEventListener("click", toggleImportance);
  wireMaskTools();
  await loadImage();
}

boot().catch((error) => {
  el<HTMLParagraphElement>("status-line").textContent =
    `cannot reach the attack service: ${error}`;
});
