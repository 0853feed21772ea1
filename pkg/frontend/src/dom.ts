/** DOM rendering for the editor shell: suggestion popup, trace panel, toasts.
 * All state decisions live in app.ts; this layer only draws. */

import type { MenuModel } from "./menu.js";
import { STAGE_ORDER, segmentIntroText, voteCards } from "./trace.js";
import type { IntroTrace, Suggestion, WorkRecord } from "./types.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function showToast(container: HTMLElement, message: string): void {
  const toast = el("div", "toast", message);
  container.appendChild(toast);
  setTimeout(() => toast.remove(), 4000);
}

function sourceBadge(suggestion: Suggestion): HTMLElement {
  const badge = el("span", `badge badge-${suggestion.source}`, suggestion.source);
  badge.title =
    suggestion.source === "bibtex" ? "from your bibliography" : "from the work index";
  return badge;
}

export function renderMenu(
  container: HTMLElement,
  menu: MenuModel | null,
  position: { x: number; y: number } | null,
  onPick: (suggestion: Suggestion) => void,
  fetchRecord: (id: string) => Promise<WorkRecord | null>,
): void {
  container.innerHTML = "";
  if (!menu) {
    container.classList.add("hidden");
    return;
  }
  container.classList.remove("hidden");
  if (position) {
    container.style.left = `${position.x}px`;
    container.style.top = `${position.y}px`;
  }
  if (!menu.items.length) {
    container.appendChild(el("div", "menu-empty", "no candidates"));
    return;
  }
  menu.items.forEach((suggestion, index) => {
    const row = el("div", "menu-row" + (index === menu.selected ? " selected" : ""));
    row.appendChild(el("span", "rank", String(suggestion.rank)));
    const body = el("div", "menu-body");
    body.appendChild(el("div", "title", suggestion.title));
    const meta = el("div", "meta");
    meta.appendChild(el("span", "year", suggestion.year === null ? "n.d." : String(suggestion.year)));
    if (suggestion.venue) meta.appendChild(el("span", "venue", suggestion.venue));
    meta.appendChild(sourceBadge(suggestion));
    meta.appendChild(el("span", "score", suggestion.score.toFixed(3)));
    body.appendChild(meta);
    row.appendChild(body);

    const expand = el("button", "expand", "abstract");
    expand.addEventListener("click", async (event) => {
      event.stopPropagation();
      const existing = row.querySelector(".abstract");
      if (existing) {
        existing.remove();
        return;
      }
      const record = await fetchRecord(suggestion.work_id);
      const abstract = el(
        "div",
        "abstract",
        record?.abstract ?? "(no abstract on record)",
      );
      row.appendChild(abstract);
    });
    row.appendChild(expand);
    row.addEventListener("click", () => onPick(suggestion));
    container.appendChild(row);
  });
}

export function renderTracePanel(
  container: HTMLElement,
  trace: IntroTrace | null,
  partial: boolean,
  apiBase: string,
): void {
  container.innerHTML = "";
  if (!trace) return;
  if (partial) {
    container.appendChild(el("div", "partial-note", "partial trace: the chain stopped early"));
  }
  for (const stage of STAGE_ORDER) {
    const card = el("section", `stage stage-${stage.id}`);
    card.appendChild(el("h3", "stage-title", stage.title));
    if (stage.id === "split") {
      card.appendChild(
        el("div", "split-line", `fundamental: ${trace.canonical_refs.length} — recent: ${trace.recent_refs.length} (Y = ${trace.y_years})`),
      );
      const list = el("ul", "ref-list");
      [...trace.canonical_refs, ...trace.recent_refs].forEach((ref, i) => {
        list.appendChild(el("li", "ref", `[${i + 1}] ${ref.title} (${ref.publication_year ?? "n.d."})`));
      });
      card.appendChild(list);
    } else if (stage.id === "votes") {
      for (const vote of voteCards(trace)) {
        const row = el("div", "vote-card" + (vote.kept ? " kept" : ""));
        row.appendChild(el("span", "vote-label", vote.label));
        row.appendChild(el("span", "vote-excerpt", vote.excerpt));
        card.appendChild(row);
      }
    } else if (stage.id === "kept") {
      if (!trace.kept_paragraphs.length) {
        card.appendChild(el("div", "empty", "no paragraphs survived the vote"));
      }
      for (const paragraph of trace.kept_paragraphs) {
        card.appendChild(el("p", "kept-paragraph", paragraph));
      }
    } else if (stage.id === "summary") {
      card.appendChild(el("p", "summary", trace.summary || "(not reached)"));
    } else {
      const body = el("p", "intro-text");
      for (const segment of segmentIntroText(trace)) {
        if (segment.kind === "text") {
          body.appendChild(document.createTextNode(segment.text));
        } else if (segment.dangling) {
          const bad = el("span", "citation dangling", `[${segment.bracket}]`);
          bad.title = "dangling citation: no such reference number";
          body.appendChild(bad);
        } else {
          const link = el("a", "citation", `[${segment.bracket}]`) as HTMLAnchorElement;
          link.href = `${apiBase}/works/${encodeURIComponent(segment.workId ?? "")}`;
          link.target = "_blank";
          body.appendChild(link);
        }
      }
      card.appendChild(body);
    }
    container.appendChild(card);
  }
}
