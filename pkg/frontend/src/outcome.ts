/** Rendering model for scenario outcomes: the five metric cards.
 *
 * Values pass straight from the API response into the cards; formatting is
 * display-only (fixed decimals), and the raw value is kept alongside so
 * tests can assert the rendered number equals the API field.
 */

import type { ApiNumber, ScenarioOutcome } from "./types.js";

export interface MetricCard {
  key: string;
  label: string;
  unit: string;
  raw: ApiNumber;
  display: string;
  decimals: number;
  detail: string;
}

export function formatApiNumber(value: ApiNumber, decimals: number): string {
  if (value === "inf") return "inf";
  if (value === "-inf") return "-inf";
  if (value === "nan") return "n/a";
  return value.toFixed(decimals);
}

function card(
  key: string,
  label: string,
  unit: string,
  raw: ApiNumber,
  decimals: number,
  detail = "",
): MetricCard {
  return {
    key,
    label,
    unit,
    raw,
    display: formatApiNumber(raw, decimals),
    decimals,
    detail,
  };
}

export function outcomeToCards(outcome: ScenarioOutcome): MetricCard[] {
  return [
    card("natl_progress_pct", "Natl SDG progress 2030", "% of goal",
         outcome.natl_progress_pct, 1),
    card("additional_years", "Additional years to meet SDG", "years",
         outcome.additional_years, 1),
    card("village_progress_pct", "Village SDG progress 2030", "% of villages",
         outcome.village_progress_pct, 1),
    card("equality_ratio", "Equality 2030", "ratio", outcome.equality_ratio, 1,
         `bounds ${formatApiNumber(outcome.bounds[0], 2)} to ${formatApiNumber(outcome.bounds[1], 2)}`),
    card("greatest_growth", "Greatest growth rate after 2024", "kg/ha/year",
         outcome.greatest_growth, 0),
  ];
}

export function outcomeTitle(outcome: ScenarioOutcome): string {
  const capped = outcome.capped ? " (capped)" : "";
  return `${outcome.scenario} · ${outcome.band}${capped}`;
}

export function flagSummary(outcome: ScenarioOutcome): string {
  const parts = Object.entries(outcome.flags)
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([name, count]) => `${name.replace(/_/g, " ")}: ${count}`);
  return parts.join(" · ");
}
