/**
 * Browser entry point: wires the session to the DOM. Layout echoes a
 * handheld remote — status strip on top, mode buttons, map view below.
 */

import { FIRMNESS_MODES, FirmnessMode } from "./protocol.js";
import {
  formatStatus,
  renderSnapshot,
  renderSparklineSVG,
  staleLabel,
} from "./render.js";
import { ConsoleSession } from "./session.js";

const DEADBAND_KGF = 0.05; // display band only; the controller owns the real one

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function startConsole(url: string): ConsoleSession {
  const session = new ConsoleSession(url);
  const banner = el<HTMLDivElement>("banner");
  const statusLine = el<HTMLDivElement>("status");
  const maps = el<HTMLDivElement>("maps");
  const strip = el<HTMLDivElement>("strip");
  const toast = el<HTMLDivElement>("toast");
  const buttons = el<HTMLDivElement>("buttons");
  const profileInput = el<HTMLInputElement>("profile-name");

  let peakKgf = 0;
  const deviationTrace: number[] = [];

  const actions: [string, () => void][] = [
    ["Activate", () => session.activate(currentMode())],
    ["Deactivate", () => session.deactivate()],
    ["Load body", () => session.loadBody(profileInput.value.trim())],
  ];
  for (const [label, handler] of actions) {
    const button = document.createElement("button");
    button.textContent = label;
    button.addEventListener("click", handler);
    buttons.appendChild(button);
  }
  const modeSelect = document.createElement("select");
  for (const mode of FIRMNESS_MODES) {
    const option = document.createElement("option");
    option.value = mode;
    option.textContent = mode;
    modeSelect.appendChild(option);
  }
  modeSelect.addEventListener("change", () => {
    if (session.latestStatus?.active) session.setMode(currentMode());
  });
  buttons.appendChild(modeSelect);

  function currentMode(): FirmnessMode {
    return modeSelect.value as FirmnessMode;
  }

  function redraw(): void {
    banner.textContent =
      session.state === "open" ? "" : `connection ${session.state}…`;
    banner.hidden = session.state === "open";
    for (const button of buttons.querySelectorAll("button, select")) {
      (button as HTMLButtonElement).disabled = !session.connected;
    }
    if (session.latestStatus) {
      statusLine.textContent = formatStatus(session.latestStatus);
      // The selector shows the server-confirmed mode, never the click.
      modeSelect.value = session.latestStatus.mode;
    }
    const snapshot = session.latestSnapshot;
    if (snapshot) {
      const peak = Math.max(...snapshot.pressures.map((row) => Math.max(...row)));
      if (peakKgf === 0) peakKgf = Math.max(peak, 0.1); // fixed scale per run
      maps.innerHTML = renderSnapshot(snapshot, peakKgf);
      deviationTrace.push(maxDeviation(snapshot));
      if (deviationTrace.length > 120) deviationTrace.shift();
      strip.innerHTML = renderSparklineSVG(deviationTrace, DEADBAND_KGF);
    }
  }

  // Deviation for display only: pressure spread inside the server-sent
  // support region; the authoritative converged flag comes from Status.
  function maxDeviation(snapshot: { pressures: number[][]; support: number[][] }): number {
    const inside: number[] = [];
    snapshot.support.forEach((row, r) =>
      row.forEach((bit, c) => {
        if (bit) inside.push(snapshot.pressures[r]![c]!);
      }),
    );
    if (inside.length === 0) return 0;
    const mean = inside.reduce((a, b) => a + b, 0) / inside.length;
    return Math.max(...inside.map((v) => Math.abs(v - mean)));
  }

  session.onUpdate = redraw;
  session.onServerError = (code, message) => {
    toast.textContent = `${code}: ${message}`;
    toast.hidden = false;
    setTimeout(() => { toast.hidden = true; }, 4000);
  };
  setInterval(() => {
    const label = staleLabel(session.snapshotAgeMs());
    const stale = el<HTMLDivElement>("stale");
    stale.textContent = label;
    stale.hidden = label === "";
  }, 500);

  session.connect();
  return session;
}

if (typeof document !== "undefined" && document.getElementById("maps")) {
  const host = location.hostname || "127.0.0.1";
  startConsole(`ws://${host}:7471`);
}
