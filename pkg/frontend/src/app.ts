/** Orchestration between the gateway client, the editor state, and whatever
 * renders it. DOM-free so the whole user loop is testable against a mock
 * gateway; newer suggestion requests cancel the rendering of stale responses
 * via a monotonically increasing request id. */

import { GatewayClient, GatewayError } from "./api.js";
import { createMenu, keyAction, MenuAction, MenuModel } from "./menu.js";
import {
  EditorState,
  InsertResult,
  Snapshot,
  clampCursor,
  createState,
  insertCitation,
  restore,
} from "./state.js";
import type { IntroRequest, IntroTrace, Suggestion } from "./types.js";

export interface RenderHooks {
  renderMenu(menu: MenuModel | null): void;
  renderTrace(trace: IntroTrace | null, partial: boolean): void;
  renderState(state: EditorState): void;
  toast(message: string): void;
}

export class EditorApp {
  state: EditorState;
  menu: MenuModel | null = null;
  private client: GatewayClient;
  private hooks: RenderHooks;
  private undoStack: Snapshot[] = [];
  private requestCounter = 0;

  constructor(client: GatewayClient, hooks: RenderHooks, initial?: EditorState) {
    this.client = client;
    this.hooks = hooks;
    this.state = initial ?? createState();
  }

  setDocument(document: string, cursor: number): void {
    this.state = clampCursor({ ...this.state, document, cursor });
    this.hooks.renderState(this.state);
  }

  setBibtex(bibtex: string): void {
    this.state = { ...this.state, bibtex };
    this.hooks.renderState(this.state);
  }

  setCursor(cursor: number): void {
    this.state = clampCursor({ ...this.state, cursor });
  }

  /** Right-click entry point: ask the gateway for suggestions at the cursor. */
  async requestSuggestions(): Promise<void> {
    const requestId = ++this.requestCounter;
    try {
      const batch = await this.client.suggest(
        this.state.document,
        this.state.cursor,
        this.state.bibtex,
      );
      if (requestId !== this.requestCounter) {
        return; // a newer request superseded this one
      }
      this.state = { ...this.state, lastBatch: batch };
      this.menu = createMenu(batch, requestId);
      this.hooks.renderMenu(this.menu);
    } catch (error) {
      if (requestId !== this.requestCounter) return;
      const stage = error instanceof GatewayError && error.stage ? error.stage : "request";
      this.hooks.toast(`suggestion failed at: ${stage}`);
    }
  }

  closeMenu(): void {
    this.menu = null;
    this.hooks.renderMenu(null);
  }

  async handleMenuKey(key: string): Promise<void> {
    if (!this.menu) return;
    const action: MenuAction = keyAction(this.menu, key);
    if (action.kind === "close") {
      this.closeMenu();
    } else if (action.kind === "move") {
      this.menu = action.menu;
      this.hooks.renderMenu(this.menu);
    } else if (action.kind === "insert") {
      await this.chooseSuggestion(action.suggestion);
    }
  }

  /** Insert a chosen suggestion; index-sourced works pull the full record for
   * authors/abstract before the BibTeX entry is generated. */
  async chooseSuggestion(suggestion: Suggestion): Promise<InsertResult> {
    let record = null;
    if (suggestion.source === "index") {
      try {
        record = await this.client.work(suggestion.work_id);
      } catch {
        record = null; // fall back to the fields the suggestion already carries
      }
    }
    const result = insertCitation(this.state, suggestion, record);
    this.undoStack.push(result.snapshot);
    this.state = result.state;
    this.closeMenu();
    this.hooks.renderState(this.state);
    return result;
  }

  /** Restore the exact document and bibliography from before the last insert. */
  undoLastInsert(): boolean {
    const snap = this.undoStack.pop();
    if (!snap) return false;
    this.state = restore(this.state, snap);
    this.hooks.renderState(this.state);
    return true;
  }

  async runIntro(request: Omit<IntroRequest, "manuscript" | "bibtex">): Promise<void> {
    try {
      const response = await this.client.intro({
        manuscript: this.state.document,
        bibtex: this.state.bibtex,
        ...request,
      });
      this.state = { ...this.state, lastTrace: response.trace };
      this.hooks.renderTrace(response.trace, false);
    } catch (error) {
      if (error instanceof GatewayError) {
        this.hooks.toast(`introduction failed at: ${error.stage ?? "request"}`);
        if (error.partialTrace) {
          this.state = { ...this.state, lastTrace: error.partialTrace };
          this.hooks.renderTrace(error.partialTrace, true);
        }
        return;
      }
      throw error;
    }
  }

  /** Copy a finished introduction into the editor at the cursor. */
  adoptIntroText(): boolean {
    const trace = this.state.lastTrace;
    if (!trace || !trace.intro_text) return false;
    const cursor = this.state.cursor;
    const document =
      this.state.document.slice(0, cursor) + trace.intro_text + this.state.document.slice(cursor);
    this.state = { ...this.state, document, cursor: cursor + trace.intro_text.length };
    this.hooks.renderState(this.state);
    return true;
  }
}
