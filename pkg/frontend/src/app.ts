/** Workbench shell: query form, results, subgraph view, narrative panel.
 *
 * At most one query is in flight at a time; submitting while one is pending
 * is a no-op. Network failures raise the offline banner; HTTP errors show a
 * toast with status and body.
 */

import { ApiClient, NetworkError, ServiceError, type FetchLike } from "./client.js";
import { renderSubgraph } from "./graphview.js";
import { NarrativePanel } from "./narrative.js";
import { renderResults } from "./results.js";
import type { Hit, QueryMode, QueryRequest, QueryResult } from "./types.js";

export interface AppConfig {
  serviceBaseUrl: string;
  fetchImpl?: FetchLike;
}

const SUBGRAPH_K = 2;

export class App {
  readonly client: ApiClient;
  readonly narrativePanel: NarrativePanel;
  private inFlight = false;
  private lastResult: QueryResult | null = null;

  constructor(
    private root: HTMLElement,
    config: AppConfig,
  ) {
    this.client = new ApiClient(config.serviceBaseUrl, config.fetchImpl);
    this.root.innerHTML = `
      <div class="offline-banner" hidden>service unreachable</div>
      <div class="toast" hidden></div>
      <form class="query-form">
        <select name="mode">
          <option value="text">text</option>
          <option value="tx_example">tx example</option>
          <option value="account_example">account example</option>
        </select>
        <input name="q" type="text" placeholder="query text / tx id / address" />
        <input name="k" type="number" value="10" min="1" max="100" />
        <button type="submit">Search</button>
      </form>
      <section class="results"></section>
      <section class="subgraph-view"></section>
      <section class="narrative-panel"></section>
    `;
    this.narrativePanel = new NarrativePanel(
      this.section(".narrative-panel"),
      this.client,
      { onError: (m) => this.toast(m) },
    );
    this.root
      .querySelector("form")!
      .addEventListener("submit", (ev) => {
        ev.preventDefault();
        void this.submitFromForm();
      });
  }

  private section(selector: string): HTMLElement {
    return this.root.querySelector(selector) as HTMLElement;
  }

  get result(): QueryResult | null {
    return this.lastResult;
  }

  toast(message: string): void {
    const el = this.section(".toast");
    el.textContent = message;
    el.hidden = false;
  }

  private setOffline(offline: boolean): void {
    this.section(".offline-banner").hidden = !offline;
  }

  private submitFromForm(): Promise<void> {
    const form = this.root.querySelector("form")!;
    const mode = (form.elements.namedItem("mode") as HTMLSelectElement)
      .value as QueryMode;
    const q = (form.elements.namedItem("q") as HTMLInputElement).value;
    const k = Number((form.elements.namedItem("k") as HTMLInputElement).value);
    const req: QueryRequest = { mode, k };
    if (mode === "text") req.text = q;
    else if (mode === "tx_example") req.tx_id = q;
    else req.addr = q;
    return this.submitQuery(req);
  }

  async submitQuery(req: QueryRequest): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    this.section(".toast").hidden = true;
    try {
      const result = await this.client.query(req);
      this.setOffline(false);
      this.lastResult = result;
      renderResults(this.section(".results"), result, {
        onSelect: (hit) => void this.selectHit(hit),
      });
      const first = result.subgraphs[0];
      if (first !== undefined) {
        renderSubgraph(this.section(".subgraph-view"), first);
      }
    } catch (err) {
      if (err instanceof NetworkError) {
        this.setOffline(true);
      } else if (err instanceof ServiceError) {
        this.toast(`query failed (${err.status}): ${err.body}`);
      } else {
        this.toast(String(err));
      }
    } finally {
      this.inFlight = false;
    }
  }

  async selectHit(hit: Hit): Promise<void> {
    if (hit.space === "graph") {
      const attached = this.lastResult?.subgraphs.find(
        (sg) => sg.center === hit.id,
      );
      const sg = attached ?? (await this.client.getSubgraph(hit.id, SUBGRAPH_K));
      renderSubgraph(this.section(".subgraph-view"), sg);
      return;
    }
    await this.narrativePanel.show(hit.id);
  }
}

export function mount(root: HTMLElement, config: AppConfig): App {
  return new App(root, config);
}
