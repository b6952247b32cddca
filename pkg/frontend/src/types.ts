/** Wire types mirroring the JSON API. All metrics are server-computed; the
 * client only formats them. */

export type BandName = "mean" | "lower" | "upper";

export type ScenarioKindAlias =
  | "sc1"
  | "sc2"
  | "sc3"
  | "sc4"
  | "sc5"
  | "sc6"
  | "sc7"
  | "custom_uniform"
  | "custom_target";

export interface ScenarioRequest {
  kind: string;
  band: BandName;
  aez_cap: boolean;
  g?: number;
  target?: number;
}

/** Infinite years arrive as the string "inf". */
export type ApiNumber = number | "inf" | "-inf" | "nan";

export interface ScenarioOutcome {
  scenario: string;
  band: BandName;
  capped: boolean;
  natl_progress_pct: ApiNumber;
  additional_years: ApiNumber;
  village_progress_pct: ApiNumber;
  equality_ratio: ApiNumber;
  bounds: [ApiNumber, ApiNumber];
  greatest_growth: ApiNumber;
  n_villages: number;
  flags: Record<string, number>;
}

export interface FieldError {
  field: string;
  message: string;
}

export interface ValidationErrorBody {
  errors: FieldError[];
}

export interface EvaluationErrorBody {
  detail: string;
}

export interface VillageFeatureProps {
  village_id: string;
  ratio: number | null;
  on_track: boolean | null;
  growth: number | null;
  class: string;
  [key: string]: unknown;
}

export interface MapFeature {
  type: "Feature";
  geometry: {
    type: string;
    coordinates: unknown;
  } | null;
  properties: VillageFeatureProps;
}

export interface MapCollection {
  type: "FeatureCollection";
  class_labels: string[];
  nodata_count: number;
  features: MapFeature[];
}

export interface TrajectoryResponse {
  fao_baseline: number;
  years: number[];
  observed_mean: number[];
  preliminary: boolean[];
  sdg_line: { years: number[]; values: number[] };
}

export interface HealthResponse {
  status: string;
  version: string;
  villages: number;
}
