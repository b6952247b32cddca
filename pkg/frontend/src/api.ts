/** Thin fetch wrappers over the JSON API. */

import type {
  EvaluationErrorBody,
  HealthResponse,
  MapCollection,
  ScenarioOutcome,
  ScenarioRequest,
  TrajectoryResponse,
  ValidationErrorBody,
} from "./types.js";
import { mapUrl } from "./map.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly fieldErrors: ReadonlyArray<{ field: string; message: string }>,
    public readonly detail: string,
  ) {
    super(detail || `request failed with status ${status}`);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let fieldErrors: { field: string; message: string }[] = [];
  let detail = "";
  try {
    const body = (await response.json()) as ValidationErrorBody & EvaluationErrorBody;
    if (Array.isArray(body.errors)) fieldErrors = body.errors;
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    detail = response.statusText;
  }
  return new ApiError(response.status, fieldErrors, detail);
}

async function getJson<T>(url: string): Promise<T> {
  const response = await fetch(url, { headers: { Accept: "application/json" } });
  if (!response.ok) throw await parseError(response);
  return (await response.json()) as T;
}

export function fetchHealth(): Promise<HealthResponse> {
  return getJson<HealthResponse>("/api/health");
}

export function fetchTrajectory(): Promise<TrajectoryResponse> {
  return getJson<TrajectoryResponse>("/api/trajectory");
}

export async function postScenario(body: ScenarioRequest): Promise<ScenarioOutcome> {
  const response = await fetch("/api/scenario", {
    method: "POST",
    headers: { "Content-Type": "application/json", Accept: "application/json" },
    body: JSON.stringify(body),
  });
  if (!response.ok) throw await parseError(response);
  return (await response.json()) as ScenarioOutcome;
}

export function fetchMap(
  kind: string,
  band: string,
  aezCap: boolean,
  g?: number,
  target?: number,
): Promise<MapCollection> {
  return getJson<MapCollection>(mapUrl(kind, band, aezCap, g, target));
}
