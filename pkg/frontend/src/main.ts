import { GatewayClient } from "./api.js";
import { EditorApp } from "./app.js";
import { renderMenu, renderTracePanel, showToast } from "./dom.js";
import type { Suggestion } from "./types.js";

const API_BASE = (window as { CITESCRIBE_API?: string }).CITESCRIBE_API ?? "";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const editor = byId<HTMLTextAreaElement>("editor");
const bibtexPane = byId<HTMLTextAreaElement>("bibtex");
const menuHost = byId<HTMLDivElement>("suggestion-menu");
const tracePanel = byId<HTMLDivElement>("trace-panel");
const toastHost = byId<HTMLDivElement>("toasts");
const abstractInput = byId<HTMLTextAreaElement>("abstract");
const yYearsInput = byId<HTMLInputElement>("y-years");
const keepFractionInput = byId<HTMLInputElement>("keep-fraction");
const statusLine = byId<HTMLDivElement>("status");

const client = new GatewayClient(API_BASE);
let menuPosition: { x: number; y: number } | null = null;

const app = new EditorApp(client, {
  renderMenu: (menu) =>
    renderMenu(menuHost, menu, menuPosition, (s: Suggestion) => void app.chooseSuggestion(s), (id) =>
      client.work(id),
    ),
  renderTrace: (trace, partial) => renderTracePanel(tracePanel, trace, partial, API_BASE),
  renderState: (state) => {
    if (editor.value !== state.document) {
      editor.value = state.document;
      editor.selectionStart = editor.selectionEnd = state.cursor;
    }
    if (bibtexPane.value !== state.bibtex) {
      bibtexPane.value = state.bibtex;
    }
  },
  toast: (message) => showToast(toastHost, message),
});

editor.addEventListener("input", () => {
  app.setDocument(editor.value, editor.selectionStart);
});
editor.addEventListener("selectionchange", () => app.setCursor(editor.selectionStart));
editor.addEventListener("click", () => app.setCursor(editor.selectionStart));
editor.addEventListener("keyup", () => app.setCursor(editor.selectionStart));

editor.addEventListener("contextmenu", (event) => {
  event.preventDefault();
  app.setDocument(editor.value, editor.selectionStart);
  menuPosition = { x: event.clientX, y: event.clientY };
  void app.requestSuggestions();
});

document.addEventListener("keydown", (event) => {
  if (!app.menu) return;
  if (["Enter", "Escape", "ArrowDown", "ArrowUp"].includes(event.key) || /^[1-9]$/.test(event.key)) {
    event.preventDefault();
    void app.handleMenuKey(event.key);
  }
});
document.addEventListener("click", (event) => {
  if (app.menu && !menuHost.contains(event.target as Node)) {
    app.closeMenu();
  }
});

bibtexPane.addEventListener("input", () => app.setBibtex(bibtexPane.value));

byId<HTMLButtonElement>("undo-insert").addEventListener("click", () => {
  if (!app.undoLastInsert()) showToast(toastHost, "nothing to undo");
});

byId<HTMLButtonElement>("run-intro").addEventListener("click", () => {
  const abstract = abstractInput.value.trim();
  if (!abstract) {
    showToast(toastHost, "enter the manuscript abstract first");
    return;
  }
  void app.runIntro({
    abstract,
    y_years: Number(yYearsInput.value) || undefined,
    keep_fraction: keepFractionInput.value === "" ? undefined : Number(keepFractionInput.value),
  });
});

byId<HTMLButtonElement>("adopt-intro").addEventListener("click", () => {
  if (!app.adoptIntroText()) showToast(toastHost, "no composed introduction yet");
});

void client
  .health()
  .then((health) => {
    statusLine.textContent = `connected: ${health.index_count} works indexed (v${health.version})`;
  })
  .catch(() => {
    statusLine.textContent = "gateway unreachable";
  });
