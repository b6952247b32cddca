/** Choropleth rendering from raw GeoJSON: projection, SVG paths, legend.
 *
 * The legend is derived from the payload's class labels, never from a
 * client-side reclassification of ratios.
 */

import type { MapCollection, MapFeature } from "./types.js";

export interface Bbox {
  minLon: number;
  minLat: number;
  maxLon: number;
  maxLat: number;
}

type Position = [number, number];
type Ring = Position[];

const CLASS_COLORS = ["#c7522a", "#e5a23d", "#d6d46d", "#4d9944", "#1a6e3c"];
const NODATA_COLOR = "#cfcfcf";

/** Ordered legend entries straight from the payload. */
export function legendFromCollection(collection: MapCollection): string[] {
  if (Array.isArray(collection.class_labels) && collection.class_labels.length) {
    return [...collection.class_labels];
  }
  // fallback: distinct classes in feature order
  const seen: string[] = [];
  for (const f of collection.features) {
    if (!seen.includes(f.properties.class)) {
      seen.push(f.properties.class);
    }
  }
  return seen;
}

export function colorForClass(label: string, legend: string[]): string {
  if (label === "nodata") return NODATA_COLOR;
  const ordered = legend.filter((entry) => entry !== "nodata");
  const index = ordered.indexOf(label);
  if (index < 0) return NODATA_COLOR;
  const palette = CLASS_COLORS.slice(0, Math.max(ordered.length, 1));
  return palette[Math.min(index, palette.length - 1)] ?? NODATA_COLOR;
}

function eachPosition(feature: MapFeature, visit: (p: Position) => void): void {
  const geometry = feature.geometry;
  if (!geometry) return;
  const walk = (node: unknown): void => {
    if (Array.isArray(node)) {
      if (node.length >= 2 && typeof node[0] === "number" && typeof node[1] === "number") {
        visit([node[0], node[1]] as Position);
      } else {
        for (const child of node) walk(child);
      }
    }
  };
  walk(geometry.coordinates);
}

export function bboxOfCollection(collection: MapCollection): Bbox | null {
  let minLon = Infinity;
  let minLat = Infinity;
  let maxLon = -Infinity;
  let maxLat = -Infinity;
  for (const feature of collection.features) {
    eachPosition(feature, ([lon, lat]) => {
      if (lon < minLon) minLon = lon;
      if (lat < minLat) minLat = lat;
      if (lon > maxLon) maxLon = lon;
      if (lat > maxLat) maxLat = lat;
    });
  }
  if (!Number.isFinite(minLon)) return null;
  return { minLon, minLat, maxLon, maxLat };
}

export type Projector = (p: Position) => Position;

/** Equirectangular fit of the bbox into a width x height viewport with a
 * small margin; latitude flips because SVG y grows downward. */
export function makeProjector(bbox: Bbox, width: number, height: number, margin = 8): Projector {
  const spanLon = Math.max(bbox.maxLon - bbox.minLon, 1e-9);
  const spanLat = Math.max(bbox.maxLat - bbox.minLat, 1e-9);
  const scale = Math.min(
    (width - 2 * margin) / spanLon,
    (height - 2 * margin) / spanLat,
  );
  const offsetX = (width - scale * spanLon) / 2;
  const offsetY = (height - scale * spanLat) / 2;
  return ([lon, lat]) => [
    offsetX + (lon - bbox.minLon) * scale,
    height - (offsetY + (lat - bbox.minLat) * scale),
  ];
}

function ringToPath(ring: Ring, project: Projector): string {
  if (!ring.length) return "";
  const parts = ring.map((pos, i) => {
    const [x, y] = project(pos);
    return `${i === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`;
  });
  return `${parts.join("")}Z`;
}

/** SVG path data for a Polygon or MultiPolygon feature. */
export function geometryToPath(feature: MapFeature, project: Projector): string {
  const geometry = feature.geometry;
  if (!geometry) return "";
  if (geometry.type === "Polygon") {
    const rings = geometry.coordinates as Ring[];
    return rings.map((r) => ringToPath(r, project)).join("");
  }
  if (geometry.type === "MultiPolygon") {
    const polys = geometry.coordinates as Ring[][];
    return polys
      .map((rings) => rings.map((r) => ringToPath(r, project)).join(""))
      .join("");
  }
  return "";
}

export function featureTooltip(feature: MapFeature): string {
  const props = feature.properties;
  if (props.ratio === null || props.ratio === undefined) {
    return `${props.village_id} · no data`;
  }
  const growth =
    props.growth === null || props.growth === undefined
      ? ""
      : ` · growth ${props.growth.toFixed(1)} kg/ha/yr`;
  return `${props.village_id} · ratio ${props.ratio.toFixed(2)}${growth}`;
}

/** Query string for the map endpoint; band switches refetch through this. */
export function mapQuery(band: string, aezCap: boolean, g?: number, target?: number): string {
  const params = new URLSearchParams({ band });
  if (aezCap) params.set("cap", "true");
  if (g !== undefined) params.set("g", String(g));
  if (target !== undefined) params.set("target", String(target));
  return params.toString();
}

export function mapUrl(
  kind: string,
  band: string,
  aezCap: boolean,
  g?: number,
  target?: number,
): string {
  return `/api/map/${encodeURIComponent(kind)}?${mapQuery(band, aezCap, g, target)}`;
}
