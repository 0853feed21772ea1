/** Suggestion menu model. Keyboard contract: arrows move the highlight,
 * Enter inserts the highlighted row (the top-ranked one on a fresh menu),
 * digits insert by rank, Escape closes. */

import type { Suggestion, SuggestionBatch } from "./types.js";

export interface MenuModel {
  items: Suggestion[];
  selected: number;
  requestId: number;
}

export type MenuAction =
  | { kind: "insert"; suggestion: Suggestion }
  | { kind: "move"; menu: MenuModel }
  | { kind: "close" }
  | { kind: "none" };

export function createMenu(batch: SuggestionBatch, requestId: number): MenuModel {
  const items = [...batch.suggestions].sort((a, b) => a.rank - b.rank);
  return { items, selected: 0, requestId };
}

export function moveSelection(menu: MenuModel, delta: number): MenuModel {
  if (!menu.items.length) return menu;
  const selected = (menu.selected + delta + menu.items.length) % menu.items.length;
  return { ...menu, selected };
}

export function keyAction(menu: MenuModel, key: string): MenuAction {
  if (key === "Escape") return { kind: "close" };
  if (!menu.items.length) return { kind: "none" };
  if (key === "ArrowDown") return { kind: "move", menu: moveSelection(menu, 1) };
  if (key === "ArrowUp") return { kind: "move", menu: moveSelection(menu, -1) };
  if (key === "Enter") return { kind: "insert", suggestion: menu.items[menu.selected] };
  if (/^[1-9]$/.test(key)) {
    const byRank = menu.items.find((s) => s.rank === Number(key));
    return byRank ? { kind: "insert", suggestion: byRank } : { kind: "none" };
  }
  return { kind: "none" };
}
