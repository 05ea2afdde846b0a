import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { renderWorkflow, toSvg } from "../src/render.js";
import type { RegistryDoc, WorkflowDoc } from "../src/types.js";

const fixture = (name: string) =>
  JSON.parse(readFileSync(join(__dirname, "fixtures", name), "utf-8"));

const fig3: WorkflowDoc = fixture("fig3.json");
const phyloRegistry: RegistryDoc = fixture("phylo_registry.json");
const converterWf: WorkflowDoc = fixture("converter_wf.json");
const converterRegistry: RegistryDoc = fixture("converters_registry.json");

describe("renderWorkflow", () => {
  it("renders the six-step fixture as 6 nodes and 7 labeled edges", () => {
    const view = renderWorkflow(fig3, phyloRegistry);
    expect(view.kind).toBe("dag");
    if (view.kind !== "dag") return;
    expect(view.nodes).toHaveLength(6);
    // 6 port-to-port edges plus the consumed initial resource arrow
    expect(view.edges).toHaveLength(7);
    for (const e of view.edges) expect(e.label.length).toBeGreaterThan(0);
  });

  it("is isomorphic to the document", () => {
    const view = renderWorkflow(fig3, phyloRegistry);
    if (view.kind !== "dag") throw new Error("expected dag");
    const renderedNodes = new Map(view.nodes.map((n) => [n.id, n.service]));
    for (const n of fig3.nodes) {
      expect(renderedNodes.get(n.id)).toBe(n.service);
    }
    const docPairs = fig3.edges.map((e) => `${e.src}>${e.dst}`).sort();
    const viewPairs = view.edges
      .filter((e) => e.src !== "input")
      .map((e) => `${e.src}>${e.dst}`)
      .sort();
    expect(viewPairs).toEqual(docPairs);
  });

  it("lays layers out by step, left to right", () => {
    const view = renderWorkflow(fig3, phyloRegistry);
    if (view.kind !== "dag") throw new Error("expected dag");
    for (const n of view.nodes) expect(n.layer).toBe(n.step);
    const xs = [...view.nodes].sort((a, b) => a.step - b.step).map((n) => n.x);
    for (let i = 1; i < xs.length; i++) expect(xs[i]!).toBeGreaterThan(xs[i - 1]!);
  });

  it("reveals service metadata when the registry is attached", () => {
    const view = renderWorkflow(fig3, phyloRegistry);
    if (view.kind !== "dag") throw new Error("expected dag");
    const first = view.nodes.find((n) => n.service === "Get_GeneTree_from_Genes");
    expect(first?.meta).toBeDefined();
    expect(first?.meta?.class).toBe("gene_tree_extraction");
    expect(first?.meta?.qos.av).toBeGreaterThan(0);
  });

  it("tags converter nodes", () => {
    const view = renderWorkflow(converterWf, converterRegistry);
    if (view.kind !== "dag") throw new Error("expected dag");
    const tagged = view.nodes.filter((n) => n.converter).map((n) => n.service);
    expect(tagged.sort()).toEqual([
      "convert_csv_to_tsv",
      "convert_tsv_to_parquet",
    ]);
    const extractor = view.nodes.find((n) => n.service === "extract_table_csv");
    expect(extractor?.converter).toBe(false);
  });

  it("shows an empty-state message for an empty workflow", () => {
    const view = renderWorkflow({ nodes: [], edges: [], initial: [], goal: [] });
    expect(view.kind).toBe("empty");
  });

  it("turns malformed documents into an error panel, not a crash", () => {
    const broken = {
      nodes: [{ id: "n1", service: "x", step: 1 }],
      edges: [{ src: "n1", dst: "ghost", out_port: "o", in_port: "i" }],
      initial: [],
      goal: [],
    } as WorkflowDoc;
    const view = renderWorkflow(broken);
    expect(view.kind).toBe("error");
    if (view.kind === "error") expect(view.message).toContain("ghost");
    expect(renderWorkflow({} as WorkflowDoc).kind).toBe("error");
  });
});

describe("toSvg", () => {
  it("serializes every node and edge", () => {
    const view = renderWorkflow(fig3, phyloRegistry);
    const svg = toSvg(view);
    expect(svg.match(/class="node/g)).toHaveLength(6);
    expect(svg.match(/class="edge"/g)).toHaveLength(7);
  });

  it("marks converters and escapes text", () => {
    const svg = toSvg(renderWorkflow(converterWf, converterRegistry));
    expect(svg.match(/class="node converter"/g)).toHaveLength(2);
    const errSvg = toSvg({ kind: "error", message: "<oops>" });
    expect(errSvg).toContain("&lt;oops&gt;");
  });
});
