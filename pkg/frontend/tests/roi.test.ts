import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { RegionSetJson } from "../src/protocol.js";
import {
  EMPTY_DRAFT,
  addRegion,
  addVertex,
  draftFromRegionSet,
  draftToRegionSet,
  moveVertex,
  rectangleRegion,
  validateDraft,
} from "../src/roi.js";
import { INITIAL_STATE, reduce } from "../src/state.js";

const roiMoved = JSON.parse(
  readFileSync(new URL("./fixtures/roi_moved.json", import.meta.url), "utf-8"),
) as RegionSetJson;

function fullDraft() {
  return {
    regions: [
      rectangleRegion("foot-L", 4, 0.2, 15.4, 15.3),
      rectangleRegion("foot-R", 16.6, 0.2, 28, 15.3),
      rectangleRegion("heel-L", 4.5, 0.6, 15, 7.2),
      rectangleRegion("heel-R", 17, 0.6, 27.5, 7.2),
      rectangleRegion("metatarsal-L", 4.5, 9.6, 15, 14.8),
      rectangleRegion("metatarsal-R", 17, 9.6, 27.5, 14.8),
    ],
  };
}

describe("roi editor model", () => {
  it("adds vertices immutably", () => {
    const base = addRegion(EMPTY_DRAFT, "foot-L");
    const once = addVertex(base, 0, [1, 2]);
    const twice = addVertex(once, 0, [3, 4]);
    expect(base.regions[0].vertices).toHaveLength(0);
    expect(once.regions[0].vertices).toEqual([[1, 2]]);
    expect(twice.regions[0].vertices).toEqual([[1, 2], [3, 4]]);
  });

  it("moves vertices without touching other drafts", () => {
    const draft = fullDraft();
    const moved = moveVertex(draft, 0, 0, [5, 5]);
    expect(moved.regions[0].vertices[0]).toEqual([5, 5]);
    expect(draft.regions[0].vertices[0]).toEqual([4, 0.2]);
  });

  it("validates required labels", () => {
    const draft = fullDraft();
    draft.regions.splice(1, 1); // drop foot-R
    const problems = validateDraft(draft);
    expect(problems.some((p) => p.includes("missing region: foot-R"))).toBe(true);
  });

  it("accepts a complete rectangle set", () => {
    expect(validateDraft(fullDraft())).toEqual([]);
  });

  it("flags self-intersecting polygons", () => {
    const bowtie = {
      regions: [
        ...fullDraft().regions.filter((r) => r.label !== "heel-L"),
        { label: "heel-L", vertices: [[5, 1], [9, 5], [9, 1], [5, 5]] as [number, number][] },
      ],
    };
    expect(validateDraft(bowtie).some((p) => p.includes("self-intersects"))).toBe(true);
  });

  it("flags under-defined polygons and duplicates", () => {
    let draft = addRegion(fullDraft(), "callus-1");
    draft = addVertex(draft, 6, [20, 12]);
    expect(validateDraft(draft).some((p) => p.includes("at least 3 vertices"))).toBe(true);
    const duplicated = addRegion(fullDraft(), "foot-L");
    expect(validateDraft(duplicated).some((p) => p.includes("duplicate label"))).toBe(true);
  });

  it("round-trips GeoJSON region sets (closed rings normalized)", () => {
    const draft = draftFromRegionSet(roiMoved);
    expect(draft.regions.map((r) => r.label)).toContain("metatarsal-R");
    const back = draftToRegionSet(draft);
    const again = draftFromRegionSet(back);
    expect(again).toEqual(draft);
  });
});

describe("undo", () => {
  it("restores the previous draft state exactly", () => {
    let state = INITIAL_STATE;
    const draft1 = fullDraft();
    const draft2 = moveVertex(draft1, 2, 1, [14, 0.9]);
    state = reduce(state, { kind: "edit_roi", draft: draft1 });
    state = reduce(state, { kind: "edit_roi", draft: draft2 });
    expect(state.roiDraft).toEqual(draft2);
    state = reduce(state, { kind: "undo_roi" });
    expect(state.roiDraft).toEqual(draft1);
    state = reduce(state, { kind: "undo_roi" });
    expect(state.roiDraft).toEqual(EMPTY_DRAFT);
    // Undo on an empty stack is a no-op.
    expect(reduce(state, { kind: "undo_roi" }).roiDraft).toEqual(EMPTY_DRAFT);
  });
});
