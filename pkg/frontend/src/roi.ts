/**
 * ROI draft editing: an immutable polygon-editing model with undo.
 *
 * Drafts are value objects; every edit returns a new draft, so the undo
 * stack stores plain snapshots and replay/undo restore state exactly. The
 * draft never touches the last server-acknowledged region set.
 */

import { RegionSetJson } from "./protocol.js";

export const REQUIRED_LABELS = [
  "foot-L", "foot-R", "heel-L", "heel-R", "metatarsal-L", "metatarsal-R",
] as const;

export const LABEL_CHOICES = [...REQUIRED_LABELS, "callus-1", "callus-2", "callus-3"];

export type Point = [number, number];

export interface DraftRegion {
  label: string;
  vertices: Point[];
}

export interface RoiDraft {
  regions: DraftRegion[];
}

export const EMPTY_DRAFT: RoiDraft = { regions: [] };

function cloneDraft(draft: RoiDraft): RoiDraft {
  return { regions: draft.regions.map((r) => ({ label: r.label, vertices: r.vertices.map((v) => [v[0], v[1]] as Point) })) };
}

export function addRegion(draft: RoiDraft, label: string): RoiDraft {
  const next = cloneDraft(draft);
  next.regions.push({ label, vertices: [] });
  return next;
}

export function removeRegion(draft: RoiDraft, index: number): RoiDraft {
  const next = cloneDraft(draft);
  next.regions.splice(index, 1);
  return next;
}

export function addVertex(draft: RoiDraft, region: number, point: Point): RoiDraft {
  const next = cloneDraft(draft);
  next.regions[region].vertices.push([point[0], point[1]]);
  return next;
}

export function moveVertex(draft: RoiDraft, region: number, vertex: number, point: Point): RoiDraft {
  const next = cloneDraft(draft);
  next.regions[region].vertices[vertex] = [point[0], point[1]];
  return next;
}

export function rectangleRegion(label: string, x0: number, y0: number, x1: number, y1: number): DraftRegion {
  return { label, vertices: [[x0, y0], [x1, y0], [x1, y1], [x0, y1]] };
}

function segmentsIntersect(a: Point, b: Point, c: Point, d: Point): boolean {
  const cross = (o: Point, p: Point, q: Point) =>
    (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0]);
  const d1 = cross(c, d, a);
  const d2 = cross(c, d, b);
  const d3 = cross(a, b, c);
  const d4 = cross(a, b, d);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

function isSelfIntersecting(vertices: Point[]): boolean {
  const n = vertices.length;
  for (let i = 0; i < n; i++) {
    const a = vertices[i];
    const b = vertices[(i + 1) % n];
    for (let j = i + 1; j < n; j++) {
      if (j === i || (j + 1) % n === i || j === (i + 1) % n) continue;
      const c = vertices[j];
      const d = vertices[(j + 1) % n];
      if (segmentsIntersect(a, b, c, d)) return true;
    }
  }
  return false;
}

/** Field-level validation messages, empty when the draft can be submitted.
 * The server remains the authority (containment, feet disjointness); this
 * catches what the editor can know locally. */
export function validateDraft(draft: RoiDraft): string[] {
  const problems: string[] = [];
  const present = new Set(draft.regions.map((r) => r.label));
  for (const label of REQUIRED_LABELS) {
    if (!present.has(label)) problems.push(`missing region: ${label}`);
  }
  const counts = new Map<string, number>();
  for (const region of draft.regions) {
    counts.set(region.label, (counts.get(region.label) ?? 0) + 1);
    if (region.vertices.length < 3) {
      problems.push(`${region.label}: needs at least 3 vertices (has ${region.vertices.length})`);
    } else if (isSelfIntersecting(region.vertices)) {
      problems.push(`${region.label}: polygon self-intersects`);
    }
  }
  for (const [label, count] of counts) {
    if (count > 1) problems.push(`duplicate label: ${label}`);
  }
  return problems;
}

export function draftToRegionSet(draft: RoiDraft): RegionSetJson {
  return {
    type: "FeatureCollection",
    features: draft.regions.map((region) => ({
      type: "Feature",
      properties: { label: region.label },
      geometry: { type: "Polygon", coordinates: [region.vertices.map((v) => [v[0], v[1]] as Point)] },
    })),
  };
}

export function draftFromRegionSet(regions: RegionSetJson): RoiDraft {
  return {
    regions: regions.features.map((feature) => {
      const ring = feature.geometry.coordinates[0].map((v) => [v[0], v[1]] as Point);
      // GeoJSON rings may close explicitly; the editor keeps open rings.
      if (ring.length > 3) {
        const first = ring[0];
        const last = ring[ring.length - 1];
        if (first[0] === last[0] && first[1] === last[1]) ring.pop();
      }
      return { label: feature.properties.label, vertices: ring };
    }),
  };
}
