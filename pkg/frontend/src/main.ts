/** DOM wiring for the scenario explorer.
 *
 * All analysis numbers come from the API; this file only moves them into
 * the document. Pure logic (request building, card models, legend, paths,
 * tray, sequencing) lives in the sibling modules, which carry the tests.
 */

import { ApiError, fetchHealth, fetchMap, postScenario } from "./api.js";
import {
  BAND_CHOICES,
  SCENARIO_CHOICES,
  assignFieldErrors,
  defaultFormState,
  needsTarget,
  needsUniformRate,
  toRequest,
  validateForm,
  type FormState,
} from "./form.js";
import {
  bboxOfCollection,
  colorForClass,
  featureTooltip,
  geometryToPath,
  legendFromCollection,
  makeProjector,
} from "./map.js";
import { flagSummary, outcomeTitle, outcomeToCards } from "./outcome.js";
import { RequestSequencer } from "./seq.js";
import { ComparisonTray } from "./tray.js";
import type { MapCollection, ScenarioOutcome } from "./types.js";

const MAP_WIDTH = 720;
const MAP_HEIGHT = 560;

const state: FormState = defaultFormState();
const tray = new ComparisonTray();
const scenarioSeq = new RequestSequencer();
const mapSeq = new RequestSequencer();
let currentOutcome: ScenarioOutcome | null = null;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function renderForm(): void {
  const form = byId("scenario-form");
  form.innerHTML = "";

  const kindField = el("label", { class: "field" }, "Scenario");
  const kindSelect = el("select", { id: "kind" });
  for (const choice of SCENARIO_CHOICES) {
    const opt = el("option", { value: choice.value }, choice.label);
    if (choice.value === state.kind) opt.selected = true;
    kindSelect.append(opt);
  }
  kindSelect.addEventListener("change", () => {
    state.kind = kindSelect.value;
    renderForm();
  });
  kindField.append(kindSelect, errorSlot("kind"));
  form.append(kindField);

  const bandField = el("label", { class: "field" }, "Estimate band");
  const bandSelect = el("select", { id: "band" });
  for (const choice of BAND_CHOICES) {
    const opt = el("option", { value: choice.value }, choice.label);
    if (choice.value === state.band) opt.selected = true;
    bandSelect.append(opt);
  }
  bandSelect.addEventListener("change", () => {
    state.band = bandSelect.value as FormState["band"];
    void refreshAll();
  });
  bandField.append(bandSelect, errorSlot("band"));
  form.append(bandField);

  const capField = el("label", { class: "field checkbox" });
  const capBox = el("input", { type: "checkbox", id: "aez-cap" }) as HTMLInputElement;
  capBox.checked = state.aezCap;
  capBox.addEventListener("change", () => {
    state.aezCap = capBox.checked;
  });
  capField.append(capBox, document.createTextNode(" Cap at AEZ yield ceilings"));
  capField.append(errorSlot("aez_cap"));
  form.append(capField);

  if (needsUniformRate(state.kind)) {
    const gField = el("label", { class: "field" }, "Uniform growth (kg/ha/year)");
    const gInput = el("input", { type: "number", step: "any", id: "g" }) as HTMLInputElement;
    gInput.value = state.g;
    gInput.addEventListener("input", () => {
      state.g = gInput.value;
    });
    gField.append(gInput, errorSlot("g"));
    form.append(gField);
  }
  if (needsTarget(state.kind)) {
    const tField = el("label", { class: "field" }, "Common 2030 target (kg/ha)");
    const tInput = el("input", { type: "number", step: "any", id: "target" }) as HTMLInputElement;
    tInput.value = state.target;
    tInput.addEventListener("input", () => {
      state.target = tInput.value;
    });
    tField.append(tInput, errorSlot("target"));
    form.append(tField);
  }

  const submit = el("button", { type: "submit", class: "submit" }, "Evaluate scenario");
  form.append(submit, el("div", { id: "form-general-error", class: "general-error" }));
}

function errorSlot(field: string): HTMLElement {
  return el("span", { class: "field-error", id: `error-${field}` });
}

function clearFieldErrors(): void {
  for (const node of document.querySelectorAll(".field-error")) node.textContent = "";
  byId("form-general-error").textContent = "";
}

function showFieldErrors(fieldErrors: Record<string, string>, general: string[] = []): void {
  for (const [field, message] of Object.entries(fieldErrors)) {
    const slot = document.getElementById(`error-${field}`);
    if (slot) slot.textContent = message;
  }
  byId("form-general-error").textContent = general.join(" · ");
}

function renderOutcome(outcome: ScenarioOutcome): void {
  const panel = byId("outcome-panel");
  panel.innerHTML = "";
  const heading = el("div", { class: "outcome-heading" });
  heading.append(el("h2", {}, outcomeTitle(outcome)));
  if (outcome.capped) heading.append(el("span", { class: "badge" }, "capped"));
  const pinButton = el("button", { class: "pin" }, tray.full ? "tray full" : "pin for comparison");
  if (tray.full) pinButton.setAttribute("disabled", "disabled");
  pinButton.addEventListener("click", () => {
    tray.pin(outcome);
    renderTray();
    renderOutcome(outcome);
  });
  heading.append(pinButton);
  panel.append(heading);

  const cards = el("div", { class: "cards" });
  for (const card of outcomeToCards(outcome)) {
    const node = el("div", { class: "card", "data-metric": card.key });
    node.append(el("div", { class: "card-label" }, card.label));
    node.append(el("div", { class: "card-value" }, card.display));
    node.append(el("div", { class: "card-unit" }, card.unit));
    if (card.detail) node.append(el("div", { class: "card-detail" }, card.detail));
    cards.append(node);
  }
  panel.append(cards);
  const flags = flagSummary(outcome);
  panel.append(el("div", { class: "flags" }, flags ? `flags: ${flags}` : ""));
  panel.append(
    el("div", { class: "n-villages" }, `${outcome.n_villages} villages evaluated`),
  );
}

function renderTray(): void {
  const host = byId("comparison-tray");
  host.innerHTML = "";
  const entries = tray.list();
  if (!entries.length) {
    host.append(el("p", { class: "tray-empty" }, "Pin outcomes to compare them side by side."));
    return;
  }
  const grid = el("div", { class: "tray-grid" });
  for (const entry of entries) {
    const column = el("div", { class: "tray-column" });
    const head = el("div", { class: "tray-head" });
    head.append(el("strong", {}, outcomeTitle(entry.outcome)));
    const unpin = el("button", { class: "unpin" }, "unpin");
    unpin.addEventListener("click", () => {
      tray.unpin(entry.id);
      renderTray();
      if (currentOutcome) renderOutcome(currentOutcome);
    });
    head.append(unpin);
    column.append(head);
    for (const card of outcomeToCards(entry.outcome)) {
      const row = el("div", { class: "tray-row" });
      row.append(el("span", { class: "tray-label" }, card.label));
      row.append(el("span", { class: "tray-value" }, `${card.display} ${card.unit}`));
      column.append(row);
    }
    grid.append(column);
  }
  host.append(grid);
}

function renderMap(collection: MapCollection): void {
  const host = byId("map-panel");
  host.innerHTML = "";
  if (!collection.features.length) {
    host.append(el("p", { class: "map-empty" }, "No data to display."));
    return;
  }
  const legend = legendFromCollection(collection);
  const bbox = bboxOfCollection(collection);
  if (!bbox) {
    host.append(el("p", { class: "map-empty" }, "No drawable geometry."));
    return;
  }
  const project = makeProjector(bbox, MAP_WIDTH, MAP_HEIGHT);
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${MAP_WIDTH} ${MAP_HEIGHT}`);
  svg.setAttribute("class", "choropleth");
  const tooltip = byId("map-tooltip");
  for (const feature of collection.features) {
    const d = geometryToPath(feature, project);
    if (!d) continue;
    const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
    path.setAttribute("d", d);
    path.setAttribute("fill", colorForClass(feature.properties.class, legend));
    path.setAttribute("class", "village");
    const label = featureTooltip(feature);
    path.addEventListener("mousemove", (event) => {
      tooltip.textContent = label;
      tooltip.style.display = "block";
      tooltip.style.left = `${event.pageX + 12}px`;
      tooltip.style.top = `${event.pageY + 12}px`;
    });
    path.addEventListener("mouseleave", () => {
      tooltip.style.display = "none";
    });
    svg.append(path);
  }
  host.append(svg);

  const legendHost = el("div", { class: "legend" });
  for (const label of legend) {
    const item = el("span", { class: "legend-item" });
    const swatch = el("span", { class: "legend-swatch" });
    swatch.style.background = colorForClass(label, legend);
    item.append(swatch, document.createTextNode(` ${label}`));
    legendHost.append(item);
  }
  host.append(legendHost);
  if (collection.nodata_count > 0) {
    host.append(
      el("div", { class: "nodata-note" }, `${collection.nodata_count} villages without data`),
    );
  }
}

async function refreshOutcome(): Promise<void> {
  clearFieldErrors();
  const validation = validateForm(state);
  if (!validation.ok) {
    showFieldErrors(validation.fieldErrors);
    return;
  }
  const token = scenarioSeq.next();
  try {
    const outcome = await postScenario(toRequest(state));
    if (!scenarioSeq.isCurrent(token)) return; // stale
    currentOutcome = outcome;
    renderOutcome(outcome);
  } catch (error) {
    if (!scenarioSeq.isCurrent(token)) return;
    if (error instanceof ApiError && error.status === 400) {
      const { fieldErrors, general } = assignFieldErrors(error.fieldErrors);
      showFieldErrors(fieldErrors, general);
    } else if (error instanceof ApiError) {
      showFieldErrors({}, [error.detail]);
    } else {
      showFieldErrors({}, [String(error)]);
    }
  }
}

async function refreshMap(): Promise<void> {
  const validation = validateForm(state);
  if (!validation.ok) return;
  const token = mapSeq.next();
  const request = toRequest(state);
  try {
    const collection = await fetchMap(
      request.kind,
      request.band,
      request.aez_cap,
      request.g,
      request.target,
    );
    if (!mapSeq.isCurrent(token)) return; // stale
    renderMap(collection);
  } catch (error) {
    if (!mapSeq.isCurrent(token)) return;
    const host = byId("map-panel");
    host.innerHTML = "";
    const message = error instanceof ApiError ? error.detail : String(error);
    host.append(el("p", { class: "map-empty" }, `Map unavailable: ${message}`));
  }
}

async function refreshAll(): Promise<void> {
  await Promise.all([refreshOutcome(), refreshMap()]);
}

async function init(): Promise<void> {
  renderForm();
  renderTray();
  byId("scenario-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void refreshAll();
  });
  try {
    const health = await fetchHealth();
    byId("status-line").textContent =
      `connected · ${health.villages} villages · engine ${health.version}`;
  } catch {
    byId("status-line").textContent = "service unreachable; start `yieldtrack serve`";
    return;
  }
  await refreshAll();
}

void init();
