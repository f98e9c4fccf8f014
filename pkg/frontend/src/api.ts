// Typed client for the tileprobe HTTP API. The UI performs no aggregate
// math: every number it shows comes out of these responses untouched.

export interface RectJson {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

export interface AggRequest {
  function: string;
  attribute: number | string | null;
}

export interface CiJson {
  lo: number;
  hi: number;
}

export interface QueryResult {
  agg: string;
  value: number | null;
  ci: CiJson | null;
  reportedBound: number;
}

export interface Telemetry {
  rowsRead: number;
  tilesSplit: number;
  elapsedUs: number;
}

export interface QueryResponse {
  results: QueryResult[];
  telemetry: Telemetry;
}

export interface DatasetInfo {
  file: string;
  columns: string[];
  axisX: number;
  axisY: number;
  tracked: string[];
  rowCount: number;
  domain: RectJson;
}

export interface TileStats {
  sum: number;
  min: number;
  max: number;
}

export interface TileNode {
  bounds: RectJson;
  depth: number;
  count: number;
  stats: Record<string, TileStats>;
  children?: TileNode[];
}

export interface TileSnapshot {
  domain: RectJson;
  initial_grid: number;
  split_factor: number;
  row_count: number;
  tiles_split: number;
  tiles: TileNode[];
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  dataset(): Promise<DatasetInfo> {
    return this.fetchFn(`${this.base}/api/dataset`).then((r) => asJson<DatasetInfo>(r));
  }

  query(rect: RectJson, requests: AggRequest[], phi: number | null): Promise<QueryResponse> {
    return this.fetchFn(`${this.base}/api/query`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ rect, requests, phi }),
    }).then((r) => asJson<QueryResponse>(r));
  }

  tiles(maxDepth?: number): Promise<TileSnapshot> {
    const suffix = maxDepth === undefined ? "" : `?max_depth=${maxDepth}`;
    return this.fetchFn(`${this.base}/api/tiles${suffix}`).then((r) => asJson<TileSnapshot>(r));
  }

  points(rect: RectJson, limit: number): Promise<[number, number][]> {
    const r = `${rect.xMin},${rect.xMax},${rect.yMin},${rect.yMax}`;
    return this.fetchFn(`${this.base}/api/points?rect=${encodeURIComponent(r)}&limit=${limit}`)
      .then((resp) => asJson<{ points: [number, number][] }>(resp))
      .then((body) => body.points);
  }

  stats(): Promise<Record<string, number>> {
    return this.fetchFn(`${this.base}/api/stats`).then((r) => asJson<Record<string, number>>(r));
  }
}
