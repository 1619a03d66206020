/** Typed client for the snapshot engine's HTTP/JSON API. */

export interface IntervalRef {
  level: number;
  k: number;
  start: number;
  end: number;
}

export interface HierarchyLevel {
  level: number;
  intervals: { k: number; start: number; end: number }[];
}

export interface HierarchyInfo {
  schema_version: number;
  bucket_count: number;
  bucket_width: number;
  origin: number;
  summary_types: string[];
  levels: HierarchyLevel[];
}

export interface GraphNode {
  id: string;
  x: number;
  y: number;
  size?: number;
}

export interface GraphEdge {
  source: string;
  target: string;
  weight: number;
  sign?: number;
}

export interface GraphMetrics {
  node_count: number;
  edge_count: number;
  density: number;
  avg_clustering: number;
  transitivity: number;
  components: number;
}

export interface SnapshotPayload extends IntervalRef {
  schema_version: number;
  session_id: string;
  summary_type: string;
  nodes: GraphNode[];
  edges: GraphEdge[];
  metrics: GraphMetrics;
  clustered?: boolean;
  members?: Record<string, string[]>;
  frames?: { nodes: GraphNode[]; edges: GraphEdge[]; metrics: GraphMetrics }[];
}

export interface KnnNeighbor extends IntervalRef {
  summary_type: string;
  distance: number;
}

export interface KnnRequest {
  level?: number;
  k_index?: number;
  summary_type?: string;
  vector?: number[];
  k: number;
  levels?: number[];
  summary_filter?: string | null;
  time_range?: [number, number] | null;
}

export interface LayoutInfo {
  algorithm: string;
  seed: number;
  positions: Record<string, [number, number]>;
}

export interface AbstractView {
  level: number;
  k: number;
  start: number;
  end: number;
  metaphor: string;
  abstracted: boolean;
  summary_type: string;
  color: string | null;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchFn = typeof fetch;

export class ApiClient {
  constructor(
    private base: string,
    private fetchFn: FetchFn = fetch.bind(globalThis),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.base + path);
    if (!resp.ok) {
      const body = await resp.json().catch(() => ({}));
      throw new ApiError(resp.status, body?.error?.message ?? resp.statusText);
    }
    return resp.json() as Promise<T>;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) {
      const payload = await resp.json().catch(() => ({}));
      throw new ApiError(resp.status, payload?.error?.message ?? resp.statusText);
    }
    return resp.json() as Promise<T>;
  }

  hierarchy(): Promise<HierarchyInfo> {
    return this.get("/api/hierarchy");
  }

  snapshot(
    level: number,
    k: number,
    opts: {
      summaryType?: string;
      cluster?: boolean;
      metaphor?: string;
      sessionId?: string;
    } = {},
  ): Promise<SnapshotPayload> {
    const q = new URLSearchParams();
    if (opts.summaryType) q.set("summary_type", opts.summaryType);
    if (opts.cluster) q.set("cluster", "true");
    if (opts.metaphor) q.set("metaphor", opts.metaphor);
    if (opts.sessionId) q.set("session_id", opts.sessionId);
    const qs = q.toString();
    return this.get(`/api/snapshot/${level}/${k}${qs ? "?" + qs : ""}`);
  }

  metrics(level: number, k: number): Promise<{ metrics: Record<string, GraphMetrics> }> {
    return this.get(`/api/metrics/${level}/${k}`);
  }

  knn(req: KnnRequest): Promise<{ neighbors: KnnNeighbor[] }> {
    return this.post("/api/knn", req);
  }

  filter(sessionId: string, nodes: string[] | null): Promise<{ filter: string[] | null }> {
    return this.post("/api/filter", { session_id: sessionId, nodes });
  }

  abstract(visible: object[]): Promise<{ visible: AbstractView[] }> {
    return this.post("/api/abstract", { visible });
  }

  layout(): Promise<LayoutInfo> {
    return this.get("/api/layout");
  }

  session(sessionId?: string): Promise<{ session_id: string; filter: string[] | null }> {
    const qs = sessionId ? `?session_id=${sessionId}` : "";
    return this.get(`/api/session${qs}`);
  }
}
