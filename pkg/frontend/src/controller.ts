import { ApiClient, ApiError } from "./api.js";
import type { AggRequest, QueryResponse, RectJson } from "./api.js";
import { Debouncer } from "./debounce.js";
import { AppState } from "./store.js";

// Turns viewport/setting changes into service queries: debounced, at most
// one mutating query in flight (changes arriving mid-flight coalesce into
// one follow-up), and responses carry sequence numbers so anything stale is
// discarded instead of overwriting a newer answer.
export class QueryController {
  private seq = 0;
  private lastApplied = 0;
  private inflight = false;
  private dirty = false;

  constructor(
    private api: ApiClient,
    private state: AppState,
    private getRect: () => RectJson,
    private debouncer: Debouncer = new Debouncer(150),
    private onChange: () => void = () => {},
  ) {}

  viewportChanged(): void {
    this.debouncer.schedule(() => void this.issue());
  }

  settingsChanged(): void {
    this.debouncer.schedule(() => void this.issue());
  }

  flush(): Promise<void> {
    this.debouncer.cancel();
    return this.issue();
  }

  private currentRequest(): AggRequest[] {
    return [{ function: this.state.func, attribute: this.state.attribute }];
  }

  handleResponse(seq: number, resp: QueryResponse): boolean {
    if (seq <= this.lastApplied) return false; // stale: a newer answer already landed
    this.lastApplied = seq;
    this.state.applyResponse(resp);
    return true;
  }

  handleError(seq: number, err: unknown): void {
    if (seq <= this.lastApplied) return;
    this.state.applyError(err instanceof ApiError ? `${err.status}: ${err.message}` : String(err));
  }

  async issue(): Promise<void> {
    if (this.inflight) {
      this.dirty = true;
      return;
    }
    this.inflight = true;
    const seq = ++this.seq;
    try {
      const resp = await this.api.query(this.getRect(), this.currentRequest(), this.state.phi);
      this.handleResponse(seq, resp);
    } catch (err) {
      this.handleError(seq, err);
    } finally {
      this.inflight = false;
      this.onChange();
      if (this.dirty) {
        this.dirty = false;
        void this.issue();
      }
    }
  }
}
