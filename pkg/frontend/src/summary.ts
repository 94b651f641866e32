// Turning the summary payload into renderable table blocks.

import { percent } from "./format.js";
import { CRITERIA, CRITERION_TITLES, Criterion, SummaryPayload } from "./types.js";

export interface SummaryBlock {
  criterion: Criterion;
  title: string;
  labels: string[];
  rows: { view: string; cells: string[] }[];
}

export function summaryBlocks(payload: SummaryPayload): SummaryBlock[] {
  return (Object.keys(CRITERIA) as Criterion[]).map((criterion) => {
    const labels = [...CRITERIA[criterion]];
    const rows = ["unanimous", "majority"].map((view) => ({
      view,
      cells: labels.map((label) =>
        percent(payload.values[`${criterion}|${view}|${label}`] ?? 0),
      ),
    }));
    return {
      criterion,
      title: CRITERION_TITLES[criterion],
      labels,
      rows,
    };
  });
}

export function progressRatio(payload: SummaryPayload): number {
  const { judged, total } = payload.progress;
  return total > 0 ? judged / total : 0;
}
