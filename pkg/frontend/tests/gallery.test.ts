import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { buildGallery, displayQoS, serviceChain } from "../src/gallery.js";
import type {
  QoSDoc,
  RefineResponse,
  RegistryDoc,
  WorkflowDoc,
} from "../src/types.js";

const fig3: WorkflowDoc = JSON.parse(
  readFileSync(join(__dirname, "fixtures", "fig3.json"), "utf-8"),
);
const registry: RegistryDoc = JSON.parse(
  readFileSync(join(__dirname, "fixtures", "phylo_registry.json"), "utf-8"),
);

const report = {
  node_level: 1.1,
  edge_level: 0.9,
  topo_level: 0.5,
  combined: 0.91,
  edit_distance: 1,
  edit_distance_exact: true,
  node_ids_a: [],
  node_ids_b: [],
  node_matrix: [],
};

function response(mode: "approx" | "exact"): RefineResponse {
  return {
    mode,
    truncated: false,
    original: fig3,
    candidates: [
      {
        workflow: fig3,
        similarity: mode === "exact" ? report : null,
        score: 0.91,
      },
      { workflow: fig3, similarity: mode === "exact" ? report : null, score: 0.5 },
    ],
  };
}

describe("buildGallery", () => {
  it("preserves server ordering and assigns ranks", () => {
    const gallery = buildGallery(response("exact"));
    expect(gallery.items.map((i) => i.rank)).toEqual([1, 2]);
    expect(gallery.items.map((i) => i.score)).toEqual([0.91, 0.5]);
  });

  it("carries the per-level breakdown in exact mode", () => {
    const item = buildGallery(response("exact")).items[0]!;
    expect(item.breakdown).toEqual({
      node: 1.1,
      edge: 0.9,
      topo: 0.5,
      editDistance: 1,
      exact: true,
    });
  });

  it("has no breakdown in approximate mode", () => {
    const gallery = buildGallery(response("approx"));
    expect(gallery.items.every((i) => i.breakdown === null)).toBe(true);
  });

  it("captions each card with the service chain", () => {
    const item = buildGallery(response("exact")).items[0]!;
    expect(item.caption.startsWith("Get_GeneTree_from_Genes ->")).toBe(true);
    expect(item.caption.split(" -> ")).toHaveLength(6);
  });
});

describe("serviceChain", () => {
  it("orders services by step", () => {
    const chain = serviceChain(fig3).split(" -> ");
    expect(chain[0]).toBe("Get_GeneTree_from_Genes");
    expect(chain[5]).toBe("Get_ReconciliationTree");
  });
});

describe("displayQoS", () => {
  it("aggregates sum/mean/min for the caption", () => {
    const byService = new Map<string, QoSDoc>(
      registry.services.map((s) => [s.name, s.qos]),
    );
    const agg = displayQoS(fig3, byService);
    expect(agg).not.toBeNull();
    const vectors = fig3.nodes.map((n) => byService.get(n.service)!);
    expect(agg!.rt).toBeCloseTo(vectors.reduce((a, v) => a + v.rt, 0), 10);
    expect(agg!.av).toBeCloseTo(Math.min(...vectors.map((v) => v.av)), 10);
    expect(agg!.tp).toBeCloseTo(
      vectors.reduce((a, v) => a + v.tp, 0) / vectors.length,
      10,
    );
  });

  it("returns null when a service is unknown", () => {
    expect(displayQoS(fig3, new Map())).toBeNull();
  });
});
