import type { RequestDoc } from "./types.js";

/** Canonical string form used for set-equality of request documents. */
export function requestKey(req: RequestDoc): string {
  switch (req.type) {
    case "avoid":
      return `avoid:${req.target}`;
    case "include":
      return `include:${req.target}`;
    case "order_before":
      return `order_before:${req.first}:${req.second}`;
    case "change_io": {
      const fmt = (xs?: { resource: string; format: string }[]) =>
        (xs ?? [])
          .map((x) => `${x.resource}/${x.format}`)
          .sort()
          .join(",");
      return `change_io:[${fmt(req.initial)}]:[${fmt(req.goal)}]`;
    }
  }
}

export function sameRequestSet(a: RequestDoc[], b: RequestDoc[]): boolean {
  const ka = new Set(a.map(requestKey));
  const kb = new Set(b.map(requestKey));
  return ka.size === kb.size && [...ka].every((k) => kb.has(k));
}

/** Parse documents coming back from the server (or persisted history) into a
 * basket; unknown types are rejected rather than silently dropped. */
export function parseRequests(docs: unknown[]): RequestDoc[] {
  return docs.map((doc) => {
    const d = doc as Record<string, unknown>;
    switch (d.type) {
      case "avoid":
      case "include":
        if (typeof d.target !== "string") {
          throw new Error(`malformed ${d.type} request: missing target`);
        }
        return { type: d.type, target: d.target } as RequestDoc;
      case "order_before":
        if (typeof d.first !== "string" || typeof d.second !== "string") {
          throw new Error("malformed order_before request");
        }
        return { type: "order_before", first: d.first, second: d.second };
      case "change_io":
        return {
          type: "change_io",
          ...(d.initial !== undefined
            ? { initial: d.initial as { resource: string; format: string }[] }
            : {}),
          ...(d.goal !== undefined
            ? { goal: d.goal as { resource: string; format: string }[] }
            : {}),
        };
      default:
        throw new Error(`unknown request type ${String(d.type)}`);
    }
  });
}

/** The pending refinement requests a user has assembled through UI gestures.
 * Client-side validation only flags obvious contradictions; all real
 * constraint checking happens server-side. */
export class RequestBasket {
  private requests: RequestDoc[] = [];

  /** Node context-menu gesture. */
  avoid(target: string): this {
    return this.add({ type: "avoid", target });
  }

  /** Service-palette gesture. */
  include(target: string): this {
    return this.add({ type: "include", target });
  }

  orderBefore(first: string, second: string): this {
    return this.add({ type: "order_before", first, second });
  }

  /** Drag-between-nodes gesture: use `service` after `after` and before
   * `before`; expands to one inclusion plus two ordering constraints. */
  insertBetween(service: string, after: string, before: string): this {
    this.include(service);
    this.orderBefore(after, service);
    this.orderBefore(service, before);
    return this;
  }

  /** Endpoints-panel gesture. */
  changeIO(io: {
    initial?: { resource: string; format: string }[];
    goal?: { resource: string; format: string }[];
  }): this {
    return this.add({ type: "change_io", ...io });
  }

  private add(req: RequestDoc): this {
    if (!this.requests.some((r) => requestKey(r) === requestKey(req))) {
      this.requests.push(req);
    }
    return this;
  }

  remove(req: RequestDoc): this {
    const key = requestKey(req);
    this.requests = this.requests.filter((r) => requestKey(r) !== key);
    return this;
  }

  clear(): this {
    this.requests = [];
    return this;
  }

  get size(): number {
    return this.requests.length;
  }

  /** Obvious client-side contradictions, surfaced as inline warnings before
   * submit: same target both avoided and included, or a directed ordering
   * cycle among the order_before requests. */
  contradictions(): string[] {
    const out: string[] = [];
    const avoided = new Set(
      this.requests.filter((r) => r.type === "avoid").map((r) => r.target),
    );
    for (const r of this.requests) {
      if (r.type === "include" && avoided.has(r.target)) {
        out.push(`"${r.target}" is both avoided and included`);
      }
    }
    const edges = this.requests.filter((r) => r.type === "order_before");
    const adj = new Map<string, string[]>();
    for (const e of edges) {
      adj.set(e.first, [...(adj.get(e.first) ?? []), e.second]);
    }
    const visiting = new Set<string>();
    const done = new Set<string>();
    let cyclic = false;
    const visit = (v: string) => {
      if (done.has(v) || cyclic) return;
      if (visiting.has(v)) {
        cyclic = true;
        return;
      }
      visiting.add(v);
      for (const next of adj.get(v) ?? []) visit(next);
      visiting.delete(v);
      done.add(v);
    };
    for (const v of adj.keys()) visit(v);
    if (cyclic) out.push("ordering constraints form a cycle");
    return out;
  }

  /** Serialize the basket to the wire documents, in insertion order. */
  serialize(): RequestDoc[] {
    return this.requests.map((r) => ({ ...r }));
  }

  static fromDocs(docs: unknown[]): RequestBasket {
    const basket = new RequestBasket();
    for (const req of parseRequests(docs)) basket.add(req);
    return basket;
  }
}
