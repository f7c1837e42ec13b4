/** Browser wiring: owns the single ConsoleModel instance, connects the bridge
 * client, and re-renders on every model change. */

import { BridgeClient } from "./client";
import { buildGuide, buildRelease, buildSetParams, ParamsForm } from "./commands";
import {
  applyMessage,
  ConsoleModel,
  initialModel,
  markCommandSent,
  setConnection,
} from "./model";
import { canvasToWorld, drawConfidenceChart, drawMap, Viewport } from "./render";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

export function start(): void {
  const mapCanvas = byId<HTMLCanvasElement>("map");
  const chartCanvas = byId<HTMLCanvasElement>("chart");
  const statusEl = byId<HTMLSpanElement>("status");
  const bannerEl = byId<HTMLDivElement>("banner");
  const releaseButton = byId<HTMLButtonElement>("release");
  const paramsForm = byId<HTMLFormElement>("params");
  const paramsMessage = byId<HTMLSpanElement>("params-message");

  let model: ConsoleModel = initialModel();
  const viewport: Viewport = {
    centerX: 0,
    centerY: 0,
    scale: 5,
    width: mapCanvas.width,
    height: mapCanvas.height,
  };

  function render(): void {
    statusEl.textContent =
      model.connection + (model.pendingCommand ? ` (pending ${model.pendingCommand})` : "");
    bannerEl.textContent = model.error ?? "";
    bannerEl.style.display = model.error ? "block" : "none";
    const mapCtx = mapCanvas.getContext("2d");
    const chartCtx = chartCanvas.getContext("2d");
    if (mapCtx) drawMap(mapCtx, model, viewport);
    if (chartCtx) drawConfidenceChart(chartCtx, model, chartCanvas.width, chartCanvas.height);
  }

  function update(next: ConsoleModel): void {
    model = next;
    render();
  }

  const url = `ws://${window.location.host}/ws`;
  const client = new BridgeClient({
    url,
    onMessage: (raw) => update(applyMessage(model, raw)),
    onStatus: (status) => update(setConnection(model, status)),
  });

  mapCanvas.addEventListener("click", (ev) => {
    if (!client.connected) return; // steering disabled while disconnected
    const rect = mapCanvas.getBoundingClientRect();
    const world = canvasToWorld(viewport, {
      x: ev.clientX - rect.left,
      y: ev.clientY - rect.top,
    });
    if (client.send(buildGuide(world.x, world.y))) {
      update(markCommandSent(model, "guide"));
    }
  });

  releaseButton.addEventListener("click", () => {
    if (client.send(buildRelease())) {
      update(markCommandSent(model, "release"));
    }
  });

  paramsForm.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const form: ParamsForm = {};
    for (const name of ["c1", "c2", "c3", "c4", "c5", "s", "T"] as const) {
      const input = paramsForm.elements.namedItem(name) as HTMLInputElement | null;
      if (input && input.value !== "") form[name] = Number(input.value);
    }
    const { command, problems } = buildSetParams(form);
    if (command === null) {
      paramsMessage.textContent = problems.join("; ");
      return;
    }
    paramsMessage.textContent = "";
    if (client.send(command)) {
      update(markCommandSent(model, "set_params"));
    }
  });

  client.open();
  render();
}

if (typeof document !== "undefined") {
  start();
}
